use num_complex::Complex64;
use proptest::prelude::*;

use symbell::analysis::{ckw_check, geometric_measure, maximize_violation, OptimizeOptions};
use symbell::bell::BellExpression;
use symbell::lhv::{grouped_lhv_bound, lhv_bound_exhaustive, DeterministicStrategy};
use symbell::lp::LinearProgram;
use symbell::measurement::{quantum_box, BoxDistribution, SettingsProfile};
use symbell::monogamy::{nonsignaling_check, strict_monogamy_audit};
use symbell::prescription::prescribe;
use symbell::symstate::{
    collapse, majorana_points, state_from_majorana, BlochPoint, SymmetricState, DEFAULT_CLUSTER_TOL,
};

fn coeffs(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n + 1)
        .prop_filter("nonzero", |v| {
            v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3
        })
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn state(lo: usize, hi: usize) -> impl Strategy<Value = SymmetricState> {
    (lo..=hi)
        .prop_flat_map(coeffs)
        .prop_map(|c| SymmetricState::new(c).unwrap())
}

fn angles(n: usize) -> impl Strategy<Value = SettingsProfile> {
    prop::collection::vec(prop::array::uniform4(0.0f64..6.3), n)
        .prop_map(|a| SettingsProfile::from_angles(&a))
}

fn state_and_settings(
    lo: usize,
    hi: usize,
) -> impl Strategy<Value = (SymmetricState, SettingsProfile)> {
    (lo..=hi).prop_flat_map(|n| {
        (
            coeffs(n).prop_map(|c| SymmetricState::new(c).unwrap()),
            angles(n),
        )
    })
}

fn random_box(n: usize) -> impl Strategy<Value = BoxDistribution> {
    let size = 1usize << n;
    prop::collection::vec(0.01f64..1.0, size * size).prop_map(move |mut t| {
        for row in t.chunks_mut(size) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        BoxDistribution::new(n, t).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn majorana_round_trip(s in state(1, 8)) {
        let back = state_from_majorana(&majorana_points(&s, DEFAULT_CLUSTER_TOL));
        prop_assert!(s.fidelity(&back) >= 1.0 - 1e-10);
    }

    #[test]
    fn mobius_keeps_degeneracy(
        k in 0usize..4,
        m in prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0)),
    ) {
        let s = [
            SymmetricState::zzz_plus(),
            SymmetricState::tetrahedron(),
            SymmetricState::dicke(6, 2).unwrap(),
            SymmetricState::zzz_theta(2.0).unwrap(),
        ][k].clone();
        let [a, b, c, d] = m.map(|(re, im)| Complex64::new(re, im));
        prop_assume!((a * d - b * c).norm() > 1e-3);
        let set = majorana_points(&s, DEFAULT_CLUSTER_TOL);
        let mapped = set.mobius(a, b, c, d).unwrap();
        prop_assert_eq!(mapped.degeneracy_profile(), set.degeneracy_profile());
    }

    #[test]
    fn degenerate_point_survives_collapse(s in state(3, 6), theta in 0.0f64..3.1, phi in 0.0f64..6.2) {
        // force a double point at (theta, phi)
        let set = majorana_points(&s, DEFAULT_CLUSTER_TOL);
        let mut pts = set.expanded();
        let p = BlochPoint::new(theta, phi);
        pts[0] = p;
        pts[1] = p;
        let s2 = state_from_majorana(&symbell::symstate::MajoranaSet::from_points(&pts, DEFAULT_CLUSTER_TOL));
        let q = BlochPoint::new(theta + 1.0, phi + 0.5);
        if let Ok((_, r)) = collapse(&s2, &q) {
            let after = majorana_points(&r, 1e-4);
            prop_assert!(after.expanded().iter().any(|x| x.chordal_distance(&p) < 1e-4));
        }
    }

    #[test]
    fn primed_identities_and_ordering(b in (2usize..=4).prop_flat_map(random_box)) {
        let n = b.n();
        let p = BellExpression::p(n).unwrap().evaluate_box(&b).unwrap().value;
        let pp = BellExpression::p_prime(n).unwrap().evaluate_box(&b).unwrap().value;
        prop_assert!((pp - p - (n + 1) as f64).abs() < 1e-10);
        for d in 2..n {
            let q = BellExpression::q(n, d).unwrap().evaluate_box(&b).unwrap().value;
            let qp = BellExpression::q_prime(n, d).unwrap().evaluate_box(&b).unwrap().value;
            prop_assert!((qp - q - (n + d) as f64).abs() < 1e-10);
            prop_assert!(q <= p + 1e-12);
        }
        prop_assert!(p <= 1.0 + 1e-12);
    }

    #[test]
    fn entanglement_caps_every_setting((s, sp) in state_and_settings(2, 5)) {
        let cap = geometric_measure(&s).max_overlap_sq;
        let n = s.n();
        let p = BellExpression::p(n).unwrap().evaluate_state(&s, &sp).unwrap().value;
        prop_assert!(p <= cap + 1e-9);
        if n >= 3 {
            for d in 2..n {
                let q = BellExpression::q(n, d).unwrap().evaluate_state(&s, &sp).unwrap().value;
                prop_assert!(q <= p + 1e-12);
            }
        }
    }

    #[test]
    fn quantum_boxes_are_valid((s, sp) in state_and_settings(2, 5)) {
        let b = quantum_box(&s, &sp).unwrap();
        prop_assert!(b.normalization_error() < 1e-12);
        prop_assert!(nonsignaling_check(&b) < 1e-9);
        let n = s.n();
        let direct = BellExpression::p(n).unwrap().evaluate_state(&s, &sp).unwrap().value;
        let via_box = BellExpression::p(n).unwrap().evaluate_box(&b).unwrap().value;
        prop_assert!((direct - via_box).abs() < 1e-9);
    }

    #[test]
    fn prescription_zeroes_negative_terms(s in state(3, 5)) {
        if let Ok(r) = prescribe(&s) {
            let rep = BellExpression::p(s.n()).unwrap().evaluate_state(&s, &r.settings).unwrap();
            prop_assert!((rep.value - r.predicted_value).abs() < 1e-10);
            for t in &rep.terms[1..] {
                prop_assert!(t.probability < 1e-12);
            }
        }
    }

    #[test]
    fn ckw_holds(s in state(3, 6)) {
        let r = ckw_check(&s).unwrap();
        prop_assert!(r.lhs <= r.rhs + 1e-9);
    }

    #[test]
    fn deterministic_boxes_are_points(n in 2usize..=4, code in any::<u64>()) {
        let code = code & ((1u64 << (2 * n)) - 1);
        let b = DeterministicStrategy { n, code }.to_box().unwrap();
        prop_assert_eq!(b.normalization_error(), 0.0);
        prop_assert_eq!(nonsignaling_check(&b), 0.0);
        prop_assert!(b.table().iter().all(|&p| p == 0.0 || p == 1.0));
        for e in [BellExpression::p(n).unwrap(), BellExpression::p_prime(n).unwrap()] {
            let v = DeterministicStrategy { n, code }.evaluate(&e);
            prop_assert!(v <= e.classical_bound);
        }
    }

    #[test]
    fn lp_solutions_are_certified(
        x0 in prop::collection::vec(0.0f64..1.0, 6),
        a in prop::collection::vec(-2i32..=2, 12),
        c in prop::collection::vec(-3.0f64..3.0, 6),
    ) {
        let mut rows = vec![vec![1.0; 6]];
        rows.extend(a.chunks(6).map(|r| r.iter().map(|&v| v as f64).collect::<Vec<_>>()));
        let rhs: Vec<f64> = rows.iter().map(|r| r.iter().zip(&x0).map(|(a, v)| a * v).sum()).collect();
        let lp = LinearProgram::new(c.clone(), rows, rhs).unwrap();
        let s = lp.maximize().unwrap();
        let (eq, neg) = lp.residuals(&s.x);
        prop_assert!(eq <= 1e-8 && neg <= 1e-10);
        // the feasible point x0 cannot beat the optimum
        let v0: f64 = c.iter().zip(&x0).map(|(c, v)| c * v).sum();
        prop_assert!(s.value >= v0 - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Mixing toward the uniform box keeps a flag-extension correlation of
    /// `lambda (1 - lambda) max |B - U|`.
    #[test]
    fn audit_lower_bound_under_mixing(code in 0u64..16, lambda in 0.05f64..0.95, pr in any::<bool>()) {
        let base = if pr {
            BoxDistribution::pr_box()
        } else {
            DeterministicStrategy { n: 2, code }.to_box().unwrap()
        };
        let u = BoxDistribution::uniform(2).unwrap();
        let gap = base.table().iter().zip(u.table()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let audit = strict_monogamy_audit(&base.mix(&u, lambda).unwrap()).unwrap();
        prop_assert!(audit.max_abs_correlation >= lambda * (1.0 - lambda) * gap - 1e-7);
    }
}

#[test]
fn lhv_bounds_below_algebraic_max() {
    for n in 3..=6 {
        let mut exprs = vec![
            BellExpression::p(n).unwrap(),
            BellExpression::p_prime(n).unwrap(),
        ];
        for d in 2..n {
            exprs.push(BellExpression::q(n, d).unwrap());
            exprs.push(BellExpression::q_prime(n, d).unwrap());
        }
        for k in 1..=n - 2 {
            exprs.push(BellExpression::l(n, k).unwrap());
        }
        for e in exprs {
            let (v, s) = lhv_bound_exhaustive(&e).unwrap();
            assert!(v <= e.algebraic_max, "{}", e.name);
            assert_eq!(v, e.classical_bound, "{}", e.name);
            assert_eq!(e.evaluate_box(&s.to_box().unwrap()).unwrap().value, v);
        }
    }
}

/// All set partitions of `0..n`.
fn partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in partitions(n - 1) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].push(n - 1);
            out.push(q);
        }
        let mut q = p.clone();
        q.push(vec![n - 1]);
        out.push(q);
    }
    out
}

fn refines(fine: &[Vec<usize>], coarse: &[Vec<usize>]) -> bool {
    fine.iter()
        .all(|f| coarse.iter().any(|c| f.iter().all(|p| c.contains(p))))
}

#[test]
fn coarser_partitions_never_lower_grouped_bound() {
    let n = 4;
    let exprs = [
        BellExpression::p(n).unwrap(),
        BellExpression::q(n, 2).unwrap(),
        BellExpression::l(n, 1).unwrap(),
    ];
    let parts: Vec<_> = partitions(n)
        .into_iter()
        .filter(|p| p.len() == 2 || p.len() == 3)
        .collect();
    for e in &exprs {
        let values: Vec<f64> = parts
            .iter()
            .map(|p| grouped_lhv_bound(e, p).unwrap().0)
            .collect();
        let singles: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let base = grouped_lhv_bound(e, &singles).unwrap().0;
        assert!(values.iter().all(|&v| v >= base));
        for (i, fine) in parts.iter().enumerate() {
            for (j, coarse) in parts.iter().enumerate() {
                if i != j && refines(fine, coarse) {
                    assert!(values[j] >= values[i], "{}: {coarse:?} < {fine:?}", e.name);
                }
            }
        }
    }
}

#[test]
fn optimizer_independent_of_thread_count() {
    let s = SymmetricState::zzz_theta(1.3).unwrap();
    let p = BellExpression::p(4).unwrap();
    let opts = OptimizeOptions {
        starts: 12,
        seed: 99,
        ..OptimizeOptions::default()
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| maximize_violation(&s, &p, &opts).unwrap());
    let many = maximize_violation(&s, &p, &opts).unwrap();
    assert_eq!(single.best_value, many.best_value);
    assert_eq!(single.best_settings, many.best_settings);
    let again = p.evaluate_state(&s, &many.best_settings).unwrap().value;
    assert!((again - many.best_value).abs() < 1e-10);
}

#[test]
fn optimizer_respects_entanglement_cap_on_named_states() {
    let opts = OptimizeOptions {
        starts: 16,
        ..OptimizeOptions::default()
    };
    for s in [
        SymmetricState::tetrahedron(),
        SymmetricState::ghz(4).unwrap(),
        SymmetricState::zzz_plus(),
        SymmetricState::w(5).unwrap(),
    ] {
        let n = s.n();
        let cap = geometric_measure(&s).max_overlap_sq;
        let p = maximize_violation(&s, &BellExpression::p(n).unwrap(), &opts)
            .unwrap()
            .best_value;
        let q = maximize_violation(&s, &BellExpression::q(n, 3).unwrap(), &opts)
            .unwrap()
            .best_value;
        assert!(p <= cap + 1e-9);
        assert!(q <= cap + 1e-9);
    }
}
