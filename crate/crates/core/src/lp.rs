//! Dense two-phase simplex for `max c.x` subject to `A x = b`, `x >= 0`.
//!
//! Pricing is Dantzig's largest reduced cost; after a run of degenerate
//! pivots the solver switches to Bland's smallest-index rule until the
//! objective moves again, which rules out cycling. Every reported optimum
//! is re-checked against the original constraints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-9;
/// Equality residual accepted by the certificate check.
pub const CERT_EQ_TOL: f64 = 1e-8;
/// Negativity accepted by the certificate check.
pub const CERT_NONNEG_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Row-major constraint matrix.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        if rows.len() != rhs.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: rhs.len(),
            });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.len(),
            });
        }
        Ok(LinearProgram {
            objective,
            rows,
            rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn maximize(&self) -> Result<LpSolution> {
        FeasibleBasis::new(&self.rows, &self.rhs)?.maximize(&self.objective)
    }

    /// Largest equality residual and largest negativity of `x`.
    pub fn residuals(&self, x: &[f64]) -> (f64, f64) {
        residuals(&self.rows, &self.rhs, x)
    }
}

fn residuals(rows: &[Vec<f64>], rhs: &[f64], x: &[f64]) -> (f64, f64) {
    let eq = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| (r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
        .fold(0.0, f64::max);
    let neg = x.iter().map(|v| -v).fold(0.0, f64::max);
    (eq, neg)
}

/// Phase-one result: a feasible basis for `A x = b, x >= 0`, with redundant
/// rows removed. Reusable across many objectives.
#[derive(Debug, Clone)]
pub struct FeasibleBasis {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    tableau: Tableau,
}

#[derive(Debug, Clone)]
struct Tableau {
    /// Columns `0..n` are structural, column `n` is the right-hand side.
    t: Vec<f64>,
    m: usize,
    n: usize,
    /// Basic variable of each row; indices `>= n` are artificial.
    basis: Vec<usize>,
}

impl Tableau {
    fn w(&self) -> usize {
        self.n + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.w() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[r * self.w() + self.n]
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let w = self.w();
        let p = self.t[r * w + q];
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for v in prow.iter_mut() {
            *v /= p;
        }
        prow[q] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        eliminate(d);
        self.basis[r] = q;
    }

    /// Runs simplex iterations maximizing the objective whose reduced-cost
    /// row is `d` (length `n + 1`, last entry minus the current value).
    fn optimize(&mut self, d: &mut [f64]) -> Result<()> {
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                (0..self.n).find(|&j| d[j] > PIVOT_TOL)
            } else {
                (0..self.n)
                    .filter(|&j| d[j] > PIVOT_TOL)
                    .fold(None, |best: Option<usize>, j| match best {
                        Some(b) if d[b] >= d[j] => Some(b),
                        _ => Some(j),
                    })
            };
            let Some(q) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, q);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    let replace = match leave {
                        None => true,
                        Some((lr, lv)) => {
                            ratio < lv - 1e-12
                                || (ratio <= lv + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if replace {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Unbounded);
            };
            if ratio * d[q] <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, d);
        }
        Err(Error::Numerical(format!(
            "no convergence after {MAX_PIVOTS} pivots"
        )))
    }
}

impl FeasibleBasis {
    pub fn new(rows: &[Vec<f64>], rhs: &[f64]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let w = n + 1;
        let mut t = vec![0.0; m * w];
        for (i, (row, &b)) in rows.iter().zip(rhs).enumerate() {
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            for (j, &a) in row.iter().enumerate() {
                t[i * w + j] = sign * a;
            }
            t[i * w + n] = sign * b;
        }
        let mut tab = Tableau {
            t,
            m,
            n,
            basis: (n..n + m).collect(),
        };
        // Phase one: maximize minus the sum of artificials.
        let mut d = vec![0.0; w];
        for i in 0..m {
            for (j, dj) in d.iter_mut().enumerate() {
                *dj += tab.at(i, j);
            }
        }
        tab.optimize(&mut d)?;
        let scale = 1.0 + rhs.iter().map(|b| b.abs()).fold(0.0, f64::max);
        let infeasibility: f64 = (0..m)
            .filter(|&r| tab.basis[r] >= n)
            .map(|r| tab.rhs(r).abs())
            .sum();
        if infeasibility > 1e-9 * scale {
            return Err(Error::Infeasible);
        }
        // Drive remaining artificials out; rows where that fails are
        // linear combinations of the others.
        let mut redundant = Vec::new();
        for r in 0..m {
            if tab.basis[r] < n {
                continue;
            }
            let q = (0..n)
                .filter(|&j| tab.at(r, j).abs() > PIVOT_TOL)
                .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
            match q {
                Some(q) => tab.pivot(r, q, &mut d),
                None => redundant.push(r),
            }
        }
        if !redundant.is_empty() {
            let keep: Vec<usize> = (0..m).filter(|r| !redundant.contains(r)).collect();
            let mut t = Vec::with_capacity(keep.len() * w);
            for &r in &keep {
                t.extend_from_slice(&tab.t[r * w..(r + 1) * w]);
            }
            tab.basis = keep.iter().map(|&r| tab.basis[r]).collect();
            tab.m = keep.len();
            tab.t = t;
        }
        Ok(FeasibleBasis {
            rows: rows.to_vec(),
            rhs: rhs.to_vec(),
            tableau: tab,
        })
    }

    /// Rows kept after removing redundant constraints.
    pub fn rank(&self) -> usize {
        self.tableau.m
    }

    /// The basic feasible solution found by phase one.
    pub fn point(&self) -> Vec<f64> {
        extract(&self.tableau)
    }

    pub fn maximize(&self, objective: &[f64]) -> Result<LpSolution> {
        let n = self.tableau.n;
        if objective.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: objective.len(),
            });
        }
        let mut tab = self.tableau.clone();
        let mut d = vec![0.0; n + 1];
        d[..n].copy_from_slice(objective);
        for r in 0..tab.m {
            let cb = objective[tab.basis[r]];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * tab.at(r, j);
                }
            }
        }
        tab.optimize(&mut d)?;
        let x = extract(&tab);
        let (eq, neg) = residuals(&self.rows, &self.rhs, &x);
        if eq > CERT_EQ_TOL || neg > CERT_NONNEG_TOL {
            return Err(Error::Numerical(format!(
                "certificate check failed: residual {eq:.3e}, negativity {neg:.3e}"
            )));
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { value, x })
    }

    pub fn minimize(&self, objective: &[f64]) -> Result<LpSolution> {
        let neg: Vec<f64> = objective.iter().map(|c| -c).collect();
        let s = self.maximize(&neg)?;
        Ok(LpSolution {
            value: -s.value,
            x: s.x,
        })
    }
}

fn extract(tab: &Tableau) -> Vec<f64> {
    let mut x = vec![0.0; tab.n];
    for r in 0..tab.m {
        if tab.basis[r] < tab.n {
            // clear roundoff below the pivot tolerance
            let v = tab.rhs(r);
            x[tab.basis[r]] = if v.abs() < 1e-13 { 0.0 } else { v };
        }
    }
    x
}
