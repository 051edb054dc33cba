//! Multistart maximization of Bell values over measurement settings, the
//! geometric measure of entanglement, and pairwise tangles.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::BellExpression;
use crate::binomial;
use crate::error::{Error, Result};
use crate::measurement::{SettingsProfile, StateVector};
use crate::neldermead;
use crate::prescription::{dicke_sigma_settings, ghz_settings, prescribe, w_settings};
use crate::symstate::{product_overlap, BlochPoint, SymmetricState};

const GRID_THETA: usize = 129;
const GRID_PHI: usize = 256;
const INITIAL_STEP: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Every party shares the same two bases.
    pub symmetric_restriction: bool,
    /// Number of random starts, in addition to the deterministic seeds.
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    /// Iteration budget per start.
    pub max_iters: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            symmetric_restriction: false,
            starts: 64,
            seed: 0,
            tol: 1e-8,
            max_iters: 2000,
        }
    }
}

impl OptimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidParameter("starts must be >= 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter("tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    /// `prescription`, `sigma`, `w`, `ghz`, `symmetric` or `random`.
    pub origin: String,
    pub initial_value: f64,
    pub final_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_value: f64,
    pub best_settings: SettingsProfile,
    pub starts: Vec<StartSummary>,
}

fn params_to_settings(x: &[f64], n: usize, symmetric: bool) -> SettingsProfile {
    if symmetric {
        SettingsProfile::from_angles(&vec![[x[0], x[1], x[2], x[3]]; n])
    } else {
        let angles: Vec<[f64; 4]> = x
            .chunks_exact(4)
            .map(|c| [c[0], c[1], c[2], c[3]])
            .collect();
        SettingsProfile::from_angles(&angles)
    }
}

fn settings_to_params(sp: &SettingsProfile, symmetric: bool) -> Vec<f64> {
    let angles = sp.angles();
    if symmetric {
        angles[0].to_vec()
    } else {
        angles.iter().flatten().copied().collect()
    }
}

fn random_basis_angles(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    [(1.0 - 2.0 * u).clamp(-1.0, 1.0).acos(), 2.0 * PI * v]
}

/// Larger value wins; equal values go to the lexicographically smaller
/// angle vector.
fn prefer(a: (f64, Vec<f64>), b: (f64, Vec<f64>)) -> (f64, Vec<f64>) {
    let b_wins = b.0 > a.0
        || (b.0 == a.0
            && b.1
                .iter()
                .zip(&a.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                == Some(std::cmp::Ordering::Less));
    if b_wins {
        b
    } else {
        a
    }
}

/// Maximizes `expr` on `state` over both bases of every party.
///
/// Deterministic seeds (the Majorana prescription when it applies, sigma_z /
/// sigma_x, the analytic W and GHZ bases, and without the symmetric
/// restriction the best symmetric settings) are refined alongside
/// `opts.starts` uniformly random starts. Random start `i` draws from a
/// ChaCha stream keyed by `(opts.seed, i)`, so the result does not depend
/// on thread scheduling.
pub fn maximize_violation(
    state: &SymmetricState,
    expr: &BellExpression,
    opts: &OptimizeOptions,
) -> Result<OptimizeResult> {
    opts.validate()?;
    let n = state.n();
    if expr.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: expr.n,
        });
    }
    let sym = opts.symmetric_restriction;
    let sv = StateVector::new(state);
    let value = |x: &[f64]| -> f64 {
        expr.evaluate_vector(&sv, &params_to_settings(x, n, sym))
            .map(|r| r.value)
            .unwrap_or(f64::NEG_INFINITY)
    };

    let mut seeds: Vec<(String, Vec<f64>)> = Vec::new();
    if n >= 3 {
        if let Ok(p) = prescribe(state) {
            seeds.push(("prescription".into(), settings_to_params(&p.settings, sym)));
        }
    }
    seeds.push((
        "sigma".into(),
        settings_to_params(&dicke_sigma_settings(n), sym),
    ));
    seeds.push(("w".into(), settings_to_params(&w_settings(n), sym)));
    if n >= 3 {
        seeds.push(("ghz".into(), settings_to_params(&ghz_settings(n), sym)));
    }
    if !sym {
        let restricted = OptimizeOptions {
            symmetric_restriction: true,
            ..opts.clone()
        };
        let r = maximize_violation(state, expr, &restricted)?;
        seeds.push(("symmetric".into(), settings_to_params(&r.best_settings, false)));
    }
    let dim = if sym { 4 } else { 4 * n };
    for i in 0..opts.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(i as u64);
        let x: Vec<f64> = (0..dim / 2)
            .flat_map(|_| random_basis_angles(&mut rng))
            .collect();
        seeds.push(("random".into(), x));
    }

    let runs: Vec<(StartSummary, Vec<f64>)> = seeds
        .into_par_iter()
        .map(|(origin, x0)| {
            let initial_value = value(&x0);
            let out =
                neldermead::minimize(|x| -value(x), &x0, INITIAL_STEP, opts.tol, opts.max_iters);
            let summary = StartSummary {
                origin,
                initial_value,
                final_value: -out.value,
                evaluations: out.evaluations,
                converged: out.converged,
            };
            (summary, out.x)
        })
        .collect();

    let (_, best_x) = runs
        .iter()
        .map(|(s, x)| (s.final_value, x.clone()))
        .reduce(prefer)
        .expect("at least one start");
    let best_settings = params_to_settings(&best_x, n, sym);
    let best_value = expr.evaluate_vector(&sv, &best_settings)?.value;
    if !best_value.is_finite() {
        return Err(Error::Numerical(
            "optimizer produced a non-finite value".into(),
        ));
    }
    Ok(OptimizeResult {
        best_value,
        best_settings,
        starts: runs.into_iter().map(|(s, _)| s).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricMeasure {
    /// `-log2` of `max_overlap_sq`.
    pub e_g: f64,
    pub max_overlap_sq: f64,
    /// Single-qubit state whose `n`-fold product is closest to the state.
    pub point: BlochPoint,
}

/// Geometric measure of entanglement, searching symmetric product states
/// only: a 129 x 256 grid over the sphere followed by simplex refinement.
pub fn geometric_measure(state: &SymmetricState) -> GeometricMeasure {
    let overlap =
        |theta: f64, phi: f64| product_overlap(state, &BlochPoint::new(theta, phi)).norm_sqr();
    let (g, gt, gp) = (0..GRID_THETA)
        .into_par_iter()
        .map(|i| {
            let theta = PI * i as f64 / (GRID_THETA - 1) as f64;
            (0..GRID_PHI)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / GRID_PHI as f64;
                    (overlap(theta, phi), theta, phi)
                })
                .fold(
                    (f64::NEG_INFINITY, 0.0, 0.0),
                    |a, b| if b.0 > a.0 { b } else { a },
                )
        })
        .reduce(
            || (f64::NEG_INFINITY, 0.0, 0.0),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    let out = neldermead::minimize(
        |x| -overlap(x[0], x[1]),
        &[gt, gp],
        PI / (GRID_THETA - 1) as f64,
        1e-16,
        4000,
    );
    let (best, point) = if -out.value >= g {
        (-out.value, BlochPoint::new(out.x[0], out.x[1]))
    } else {
        (g, BlochPoint::new(gt, gp))
    };
    let best = best.min(1.0);
    GeometricMeasure {
        e_g: 0.0 - best.log2(),
        max_overlap_sq: best,
        point,
    }
}

/// Two-party reduced density matrix in the basis `00, 01, 10, 11`.
pub fn pair_density_matrix(state: &SymmetricState) -> Result<Matrix4<Complex64>> {
    let n = state.n();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "pair reduction requires n >= 2".into(),
        ));
    }
    let a = state.coeffs();
    // c[j][m]: amplitude of |D_2^j>|D_{n-2}^m>
    let c = |j: usize, m: usize| -> Complex64 {
        a[j + m] * (binomial(2, j) * binomial(n - 2, m) / binomial(n, j + m)).sqrt()
    };
    let mut sym = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (j, row) in sym.iter_mut().enumerate() {
        for (jp, entry) in row.iter_mut().enumerate() {
            *entry = (0..=n - 2).map(|m| c(j, m) * c(jp, m).conj()).sum();
        }
    }
    // columns: D_2^0 = |00>, D_2^1 = (|01> + |10>)/sqrt2, D_2^2 = |11>
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let embed = [
        [1.0, 0.0, 0.0],
        [0.0, r, 0.0],
        [0.0, r, 0.0],
        [0.0, 0.0, 1.0],
    ];
    Ok(Matrix4::from_fn(|i, k| {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            for jp in 0..3 {
                s += sym[j][jp] * embed[i][j] * embed[k][jp];
            }
        }
        s
    }))
}

fn hermitian_sqrt(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let eig = m.symmetric_eigen();
    let d = eig
        .eigenvalues
        .map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    let u = &eig.eigenvectors;
    u * Matrix4::from_diagonal(&d) * u.adjoint()
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence(rho: &Matrix4<Complex64>) -> f64 {
    // sigma_y (x) sigma_y in the computational basis
    let mut yy = Matrix4::<Complex64>::zeros();
    yy[(0, 3)] = Complex64::new(-1.0, 0.0);
    yy[(3, 0)] = Complex64::new(-1.0, 0.0);
    yy[(1, 2)] = Complex64::new(1.0, 0.0);
    yy[(2, 1)] = Complex64::new(1.0, 0.0);
    let tilde = yy * rho.conjugate() * yy;
    let s = hermitian_sqrt(rho);
    let m = s * tilde * s;
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut l: Vec<f64> = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// Tangle (squared concurrence) of any pair of parties.
pub fn pair_tangle(state: &SymmetricState) -> Result<f64> {
    if state.n() < 3 {
        return Err(Error::InvalidParameter(
            "pair tangle requires n >= 3".into(),
        ));
    }
    Ok(concurrence(&pair_density_matrix(state)?).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkwReport {
    /// Sum of the pair tangles between one party and each other party.
    pub lhs: f64,
    /// One-versus-rest tangle `4 det(rho_A)`.
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn ckw_check(state: &SymmetricState) -> Result<CkwReport> {
    let lhs = (state.n() - 1) as f64 * pair_tangle(state)?;
    let r = state.single_party_rdm();
    let rhs = 4.0 * (r[0][0] * r[1][1] - r[0][1] * r[1][0]).re;
    Ok(CkwReport {
        lhs,
        rhs,
        satisfied: lhs <= rhs + 1e-9,
    })
}
