//! Simultaneous polynomial root finding (Aberth–Ehrlich iteration).

use num_complex::Complex64;

const MAX_ITERS: usize = 500;
const CONVERGENCE: f64 = 1e-13;

/// Evaluates `p` and `p'` at `z` with Horner's scheme. Coefficients are in
/// descending order of degree.
fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of the polynomial with the given coefficients (descending
/// degree). The leading coefficient must be nonzero.
pub(crate) fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[0];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    if degree == 1 {
        return vec![-monic[1]];
    }

    // Initial guesses on a circle whose radius is the geometric mean of the
    // root moduli, rotated off the real axis to avoid symmetric stalls.
    let radius = {
        let c0 = monic[degree].norm();
        if c0 > 0.0 {
            c0.powf(1.0 / degree as f64)
        } else {
            1.0
        }
    };
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    for _ in 0..MAX_ITERS {
        let mut max_step: f64 = 0.0;
        for i in 0..degree {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..degree {
                if i != j {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() > 0.0 {
                ratio / denom
            } else {
                ratio
            };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < CONVERGENCE {
            break;
        }
    }

    // One Newton step per root; large roots are polished on the reversed
    // polynomial in w = 1/z, which is better conditioned there.
    let reversed: Vec<Complex64> = monic.iter().rev().copied().collect();
    for root in z.iter_mut() {
        if root.norm() <= 1.0 {
            let (p, dp) = horner(&monic, *root);
            let step = p / dp;
            if step.is_finite() {
                *root -= step;
            }
        } else {
            let w = root.inv();
            let (p, dp) = horner(&reversed, w);
            let step = p / dp;
            if step.is_finite() {
                *root = (w - step).inv();
            }
        }
    }
    z
}
