//! Measurement settings from the Majorana representation, and the
//! closed-form settings for W, GHZ and Dicke states.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::binomial;
use crate::error::{Error, Result};
use crate::measurement::{Basis, SettingsProfile};
use crate::symstate::{
    collapse, majorana_points, product_overlap, BlochPoint, SymmetricState, DEFAULT_CLUSTER_TOL,
};

/// Chordal tolerance for deciding that two clusters are antipodal.
const ANTIPODAL_TOL: f64 = 1e-6;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescriptionResult {
    pub settings: SettingsProfile,
    /// Majorana point defining setting 1 (outcome 0).
    pub chosen_mp: BlochPoint,
    /// Majorana point of the collapsed state whose antipode defines
    /// setting 0 (outcome 0).
    pub residual_mp: BlochPoint,
    /// `P(0..0|0..0)`, the value of `P^n` under these settings.
    pub predicted_value: f64,
}

/// Whether the Majorana points form one cluster or two antipodal clusters,
/// i.e. the state is a Dicke state up to a rotation of the sphere.
pub fn is_dicke_like(state: &SymmetricState) -> bool {
    let set = majorana_points(state, DEFAULT_CLUSTER_TOL);
    match set.entries() {
        [_] => true,
        [a, b] => (a.point.chordal_distance(&b.point) - 2.0).abs() <= ANTIPODAL_TOL,
        _ => false,
    }
}

/// Settings that zero every negative term of `P^n` while keeping
/// `P(0..0|0..0)` positive.
///
/// Setting 1 measures along a Majorana point `eta` of the state, so that
/// `P(1..1|1..1) = |<eta_perp|^n psi>|^2 = 0`. Setting 0 measures along the
/// antipode of a Majorana point of `<eta|psi>`, which zeroes every term where
/// a single party switches to setting 1. Among all such pairs the one with
/// the largest `P(0..0|0..0)` is returned; ties go to the lexicographically
/// smallest `(theta, phi)` pair.
pub fn prescribe(state: &SymmetricState) -> Result<PrescriptionResult> {
    let n = state.n();
    if n < 3 {
        return Err(Error::InvalidParameter(
            "prescription requires n >= 3".into(),
        ));
    }
    if is_dicke_like(state) {
        return Err(Error::DickeState);
    }
    let points = majorana_points(state, DEFAULT_CLUSTER_TOL);
    let mut best: Option<(f64, BlochPoint, BlochPoint)> = None;
    let mut saw_zero = false;
    for eta in points.entries().iter().map(|e| e.point) {
        let residual = match collapse(state, &eta) {
            Ok((_, r)) => r,
            Err(Error::ZeroProjection) => {
                saw_zero = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        for mu in majorana_points(&residual, DEFAULT_CLUSTER_TOL)
            .entries()
            .iter()
            .map(|e| e.point)
        {
            let value = product_overlap(state, &mu.antipode()).norm_sqr();
            let better = match &best {
                None => true,
                Some((v, _, _)) => value > v + TIE_TOL,
            };
            if better {
                best = Some((value, eta, mu));
            }
        }
    }
    let (value, eta, mu) = best.ok_or(if saw_zero {
        Error::ZeroProjection
    } else {
        Error::DickeState
    })?;
    Ok(PrescriptionResult {
        settings: SettingsProfile::uniform(
            n,
            Basis::from_point(mu.antipode()),
            Basis::from_point(eta),
        ),
        chosen_mp: eta,
        residual_mp: mu,
        predicted_value: value,
    })
}

/// Setting 0 = `{|+>, |->}`, setting 1 = `{|1>, |0>}` for every party.
///
/// Outcome 0 of setting 1 is `|1>`: with that labelling all single-flip
/// terms reduce to `|<+|^(n-1)|0..0>|^2 / n` and `P(1..1|1..1) = |<0..0|W>|^2`
/// vanishes.
pub fn w_settings(n: usize) -> SettingsProfile {
    SettingsProfile::uniform(n, Basis::sigma_x(), Basis::from_point(BlochPoint::south()))
}

/// Reported closed form `(n - 2) / (n 2^n)` for the W-state violation.
pub fn v_w(n: usize) -> f64 {
    (n as f64 - 2.0) / (n as f64 * 2f64.powi(n as i32))
}

/// Exact value of `P^n` on `|W_n>` under [`w_settings`]:
/// `n/2^n - n * 1/(n 2^(n-1)) = (n - 2) / 2^n`.
pub fn w_settings_value(n: usize) -> f64 {
    (n as f64 - 2.0) / 2f64.powi(n as i32)
}

fn equatorial(ket1_phase: f64, sign: f64) -> Basis {
    // (|0> + sign e^{i ket1_phase} |1>) / sqrt2
    let c1 = Complex64::from_polar(1.0, ket1_phase) * sign;
    let r = 0.5f64.sqrt();
    Basis::from_point(BlochPoint::from_ket(Complex64::new(r, 0.0), c1 * r))
}

/// Closed-form GHZ bases, identical for every party.
///
/// Setting 1, outcome 0: `(|0> - e^{-i pi/n}|1>)/sqrt2`, a Majorana point of
/// `|GHZ_n>` for both parities of `n`. Setting 0, outcome 0:
/// `(|0> + e^{-i a}|1>)/sqrt2` with `a = (2n-1) pi / (n(n-1))`, orthogonal to
/// a Majorana point of the collapsed state.
pub fn ghz_settings(n: usize) -> SettingsProfile {
    let nf = n as f64;
    let alpha = (2.0 * nf - 1.0) * PI / (nf * (nf - 1.0));
    let setting1 = equatorial(-PI / nf, -1.0);
    let setting0 = equatorial(-alpha, 1.0);
    SettingsProfile::uniform(n, setting0, setting1)
}

/// `(1 + cos((2n-1) pi / (n-1))) / 2^n`.
pub fn v_g(n: usize) -> f64 {
    let nf = n as f64;
    (1.0 + ((2.0 * nf - 1.0) * PI / (nf - 1.0)).cos()) / 2f64.powi(n as i32)
}

/// Setting 0 = `sigma_z`, setting 1 = `sigma_x` (outcome 0 is `|+>`).
pub fn dicke_sigma_settings(n: usize) -> SettingsProfile {
    SettingsProfile::uniform(n, Basis::sigma_z(), Basis::sigma_x())
}

/// `1 - C(n,k) / 2^(n-1)`.
pub fn v_l(n: usize, k: usize) -> Result<f64> {
    if k < 1 || n < k + 2 {
        return Err(Error::InvalidParameter(format!(
            "v_L(n,k) requires 1 <= k <= n-2 (got n={n}, k={k})"
        )));
    }
    Ok(1.0 - binomial(n, k) / 2f64.powi(n as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::BellExpression;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p_report(state: &SymmetricState, sp: &SettingsProfile) -> crate::bell::EvaluationReport {
        BellExpression::p(state.n())
            .unwrap()
            .evaluate_state(state, sp)
            .unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_abs_diff_eq!(v_w(3), 1.0 / 24.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v_g(4), 3.0 / 32.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v_g(3), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(v_l(3, 1).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(v_l(6, 3).unwrap(), 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(v_l(10, 1).unwrap(), 1.0 - 10.0 / 512.0, epsilon = 1e-15);
        assert!(v_l(4, 3).is_err());
        // v_w decreases for n >= 4
        for n in 4..30 {
            assert!(v_w(n + 1) < v_w(n));
        }
    }

    #[test]
    fn w_settings_exact_value() {
        for n in 3..=10 {
            let r = p_report(&SymmetricState::w(n).unwrap(), &w_settings(n));
            assert_abs_diff_eq!(r.value, w_settings_value(n), epsilon = 1e-12);
            assert!(r.value >= v_w(n));
            assert!(r.terms.last().unwrap().probability < 1e-15);
        }
    }

    #[test]
    fn ghz_settings_match_closed_form() {
        for n in 3..=10 {
            let r = p_report(&SymmetricState::ghz(n).unwrap(), &ghz_settings(n));
            assert_abs_diff_eq!(r.value, v_g(n), epsilon = 1e-12);
            for t in &r.terms[1..] {
                assert!(t.probability < 1e-12, "n={n}: {}", t.probability);
            }
        }
    }

    #[test]
    fn dicke_sigma_matches_closed_form() {
        for n in 3..=8 {
            for k in 1..=n - 2 {
                let v = BellExpression::l(n, k)
                    .unwrap()
                    .evaluate_state(
                        &SymmetricState::dicke(n, k).unwrap(),
                        &dicke_sigma_settings(n),
                    )
                    .unwrap()
                    .value;
                assert_abs_diff_eq!(v, v_l(n, k).unwrap(), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn prescription_examples() {
        let s = SymmetricState::zzz_theta(PI / 2.0).unwrap();
        let r = prescribe(&s).unwrap();
        let rep = p_report(&s, &r.settings);
        assert!(rep.value > 0.0);
        for t in &rep.terms[1..] {
            assert!(t.probability < 1e-12);
        }
        assert_abs_diff_eq!(rep.value, r.predicted_value, epsilon = 1e-10);

        let t = SymmetricState::tetrahedron();
        let r = prescribe(&t).unwrap();
        assert!(r.predicted_value > 0.0 && r.predicted_value <= 0.1745 + 1e-3);
        assert_abs_diff_eq!(
            p_report(&t, &r.settings).value,
            r.predicted_value,
            epsilon = 1e-10
        );

        assert_eq!(
            prescribe(&SymmetricState::w(4).unwrap()),
            Err(Error::DickeState)
        );
        assert_eq!(
            prescribe(&SymmetricState::dicke(5, 2).unwrap()),
            Err(Error::DickeState)
        );
        assert_eq!(
            prescribe(&SymmetricState::dicke(4, 0).unwrap()),
            Err(Error::DickeState)
        );
    }

    #[test]
    fn prescription_zeroes_q_terms_for_degenerate_points() {
        // zzz_theta has a threefold point; Q^4_3's added terms must vanish
        // when that point is chosen.
        let s = SymmetricState::zzz_theta(1.2).unwrap();
        let r = prescribe(&s).unwrap();
        let set = majorana_points(&s, DEFAULT_CLUSTER_TOL);
        let d = set
            .entries()
            .iter()
            .find(|e| e.point.chordal_distance(&r.chosen_mp) < 1e-9)
            .unwrap()
            .multiplicity;
        if d >= 2 {
            let q = BellExpression::q(4, d)
                .unwrap()
                .evaluate_state(&s, &r.settings)
                .unwrap();
            for t in &q.terms[1..] {
                assert!(t.probability < 1e-12);
            }
        }
    }

    #[test]
    fn prescription_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for i in 0..200 {
            let n = 3 + i % 3;
            let s = SymmetricState::new(
                (0..=n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
            .unwrap();
            let r = prescribe(&s).unwrap();
            assert!(r.predicted_value > 0.0);
            let rep = p_report(&s, &r.settings);
            assert_abs_diff_eq!(rep.value, r.predicted_value, epsilon = 1e-10);
            for t in &rep.terms[1..] {
                assert!(t.probability < 1e-12, "{}", t.probability);
            }
        }
    }
}
