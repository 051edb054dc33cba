//! Derivative-free simplex minimization with restarts.

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with an initial simplex of edge `step`.
///
/// Converges when the spread of simplex values falls below `tol`. Each time
/// that happens the simplex is rebuilt around the best vertex with a
/// quarter of the previous edge; the search stops once a restart fails to
/// improve by more than `tol` or `max_iters` iterations are spent.
pub(crate) fn minimize(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_iters: usize,
) -> Outcome {
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best_x = x0.to_vec();
    let mut best_v = eval(&best_x);
    let mut edge = step;
    let mut iters = 0usize;
    let mut converged = false;
    while iters < max_iters {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((best_x.clone(), best_v));
        for i in 0..dim {
            let mut x = best_x.clone();
            x[i] += edge;
            let v = eval(&x);
            simplex.push((x, v));
        }
        let mut local_converged = false;
        while iters < max_iters {
            iters += 1;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[dim].1 - simplex[0].1 <= tol {
                local_converged = true;
                break;
            }
            let mut centroid = vec![0.0; dim];
            for (x, _) in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim as f64;
                }
            }
            let along = |t: f64, worst: &[f64]| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(worst)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let worst = simplex[dim].0.clone();
            let xr = along(-1.0, &worst);
            let vr = eval(&xr);
            if vr < simplex[0].1 {
                let xe = along(-2.0, &worst);
                let ve = eval(&xe);
                simplex[dim] = if ve < vr { (xe, ve) } else { (xr, vr) };
            } else if vr < simplex[dim - 1].1 {
                simplex[dim] = (xr, vr);
            } else {
                let (xc, vc) = if vr < simplex[dim].1 {
                    let x = along(-0.5, &worst);
                    let v = eval(&x);
                    (x, v)
                } else {
                    let x = along(0.5, &worst);
                    let v = eval(&x);
                    (x, v)
                };
                if vc < simplex[dim].1.min(vr) {
                    simplex[dim] = (xc, vc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = x0
                            .iter()
                            .zip(&vertex.0)
                            .map(|(a, b)| a + 0.5 * (b - a))
                            .collect();
                        let v = eval(&x);
                        *vertex = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let improved = best_v - simplex[0].1;
        if simplex[0].1 < best_v {
            best_x = simplex[0].0.clone();
            best_v = simplex[0].1;
        }
        if local_converged && improved <= tol {
            converged = true;
            break;
        }
        edge *= 0.25;
        if edge < 1e-12 {
            converged = local_converged;
            break;
        }
    }
    Outcome {
        x: best_x,
        value: best_v,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::minimize;

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            0.5,
            1e-14,
            5000,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 2.0).abs() < 1e-5);
        assert!(r.evaluations > 0);
    }

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            0.3,
            1e-16,
            20000,
        );
        assert!(r.value < 1e-8, "{}", r.value);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| x.iter().map(|v| v.sin()).sum::<f64>();
        let x0 = [0.3, -0.2, 1.0, 2.0];
        let r = minimize(f, &x0, 0.4, 1e-10, 100);
        assert!(r.value <= f(&x0));
    }
}
