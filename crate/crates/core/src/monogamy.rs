//! Nonsignaling checks, strict-monogamy audits of boxes, and the
//! multiparty monogamy sums with their nonsignaling maxima.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::BellExpression;
use crate::error::{Error, Result};
use crate::lp::FeasibleBasis;
use crate::measurement::{assignment_masks, BoxDistribution};

/// Largest audited box.
pub const MAX_AUDIT_PARTIES: usize = 3;
/// Largest scenario handed to [`lp_max_monogamy_sum`].
pub const MAX_LP_PARTIES: usize = 5;
/// Largest expression built by [`build_monogamy_sum`].
pub const MAX_SUM_PARTIES: usize = 8;
/// `|D|` at or below this counts as uncorrelated.
pub const MONOGAMY_TOL: f64 = 1e-7;
const SIGNALING_TOL: f64 = 1e-8;

/// Largest change of any single-party marginal when one other party
/// switches setting.
pub fn nonsignaling_check(b: &BoxDistribution) -> f64 {
    let n = b.n();
    let size = 1usize << n;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let bit = 1usize << k;
        for s in (0..size).filter(|s| s & bit == 0) {
            for o in (0..size).filter(|o| o & bit == 0) {
                let m0 = b.get(s, o) + b.get(s, o | bit);
                let m1 = b.get(s | bit, o) + b.get(s | bit, o | bit);
                worst = worst.max((m0 - m1).abs());
            }
        }
    }
    worst
}

/// Equality rows stating that summing out party `k` gives the same table
/// for both of its settings, for every party, over `n` parties. Variables
/// are indexed `(s << n) | o`.
fn nonsignaling_rows(n: usize) -> Vec<Vec<f64>> {
    let size = 1usize << n;
    let mut rows = Vec::new();
    for k in 0..n {
        let bit = 1usize << k;
        for s in (0..size).filter(|s| s & bit == 0) {
            for o in (0..size).filter(|o| o & bit == 0) {
                let mut row = vec![0.0; size * size];
                for ok in [0, bit] {
                    row[(s << n) | o | ok] += 1.0;
                    row[((s | bit) << n) | o | ok] -= 1.0;
                }
                rows.push(row);
            }
        }
    }
    rows
}

/// Coordinate of an extension: joint settings of all `n + 1` parties (bit
/// `n` is the extra party), outcomes of the original parties, and the
/// extra party's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionCoordinate {
    pub settings: usize,
    pub outcomes: usize,
    pub extension_outcome: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionAudit {
    pub max_abs_correlation: f64,
    pub witness: ExtensionCoordinate,
    pub monogamous: bool,
    /// Linear programs solved.
    pub lp_count: usize,
}

/// Nonsignaling extensions of an `n`-party box to `n + 1` parties.
///
/// Variables `x[(S << (n+1)) | O]` over all `n + 1` parties. Constraints:
/// summing out the extra party reproduces the box for each of its settings,
/// and every original party is nonsignaling. The extra party's
/// nonsignaling follows from the first family.
#[derive(Debug, Clone)]
pub struct ExtensionPolytope {
    n: usize,
    table: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl ExtensionPolytope {
    pub fn new(b: &BoxDistribution) -> Result<Self> {
        let n = b.n();
        if n > MAX_AUDIT_PARTIES {
            return Err(Error::TooLarge(format!(
                "audit of {n} parties (limit {MAX_AUDIT_PARTIES})"
            )));
        }
        let total = n + 1;
        let size = 1usize << n;
        let vars = 1usize << (2 * total);
        let extra = 1usize << n;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for s in 0..size {
            for c in [0, extra] {
                for o in 0..size {
                    let mut row = vec![0.0; vars];
                    for oc in [0, extra] {
                        row[((s | c) << total) | o | oc] = 1.0;
                    }
                    rows.push(row);
                    rhs.push(b.get(s, o));
                }
            }
        }
        let ns = nonsignaling_rows(total);
        let per_party = ns.len() / total;
        // rows for parties 0..n come first
        for row in ns.into_iter().take(per_party * n) {
            rows.push(row);
            rhs.push(0.0);
        }
        Ok(ExtensionPolytope {
            n,
            table: b.table().to_vec(),
            rows,
            rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        1usize << (2 * (self.n + 1))
    }

    /// Largest constraint violation of a candidate extension, including
    /// negativity.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let eq = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| (r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        x.iter().map(|v| -v).fold(eq, f64::max)
    }

    /// Coefficients of `D = x[S, (o, c)] - P(o|s) * sum_o' x[S, (o', c)]`.
    pub fn correlation_functional(&self, coord: &ExtensionCoordinate) -> Vec<f64> {
        let n = self.n;
        let total = n + 1;
        let size = 1usize << n;
        let s = coord.settings & (size - 1);
        let p = self.table[(s << n) | coord.outcomes];
        let oc = (coord.extension_outcome as usize) << n;
        let mut f = vec![0.0; self.num_vars()];
        for o in 0..size {
            f[(coord.settings << total) | o | oc] -= p;
        }
        f[(coord.settings << total) | coord.outcomes | oc] += 1.0;
        f
    }

    pub fn correlation(&self, x: &[f64], coord: &ExtensionCoordinate) -> f64 {
        self.correlation_functional(coord)
            .iter()
            .zip(x)
            .map(|(a, v)| a * v)
            .sum()
    }

    /// Product extension `P(o|s) Q(c|t)` for a single-party box `q[t][c]`.
    pub fn product_extension(&self, q: [[f64; 2]; 2]) -> Vec<f64> {
        let n = self.n;
        let total = n + 1;
        let size = 1usize << n;
        let mut x = vec![0.0; self.num_vars()];
        for s in 0..size {
            for t in 0..2 {
                for o in 0..size {
                    for c in 0..2 {
                        x[((s | t << n) << total) | o | c << n] =
                            self.table[(s << n) | o] * q[t][c];
                    }
                }
            }
        }
        x
    }
}

/// Strict-monogamy audit: the largest `|D|` over all nonsignaling
/// extensions and all coordinates.
///
/// `D` at extension outcome 1 is minus `D` at outcome 0 on the polytope, so
/// only outcome-0 coordinates are optimized, in both directions.
pub fn strict_monogamy_audit(b: &BoxDistribution) -> Result<ExtensionAudit> {
    let poly = ExtensionPolytope::new(b)?;
    let signal = nonsignaling_check(b);
    if signal > SIGNALING_TOL || b.normalization_error() > SIGNALING_TOL {
        return Err(Error::Signaling(signal.max(b.normalization_error())));
    }
    let basis = FeasibleBasis::new(&poly.rows, &poly.rhs)?;
    let n = b.n();
    let coords: Vec<ExtensionCoordinate> = (0..1usize << (n + 1))
        .flat_map(|settings| {
            (0..1usize << n).map(move |outcomes| ExtensionCoordinate {
                settings,
                outcomes,
                extension_outcome: 0,
            })
        })
        .collect();
    let results: Vec<(f64, ExtensionCoordinate)> = coords
        .par_iter()
        .map(|c| {
            let f = poly.correlation_functional(c);
            let hi = basis.maximize(&f)?.value;
            let lo = basis.minimize(&f)?.value;
            Ok((hi.abs().max(lo.abs()), *c))
        })
        .collect::<Result<Vec<_>>>()?;
    let (max_abs, witness) =
        results
            .iter()
            .copied()
            .fold((f64::NEG_INFINITY, coords[0]), |a, b| {
                if b.0 > a.0 {
                    b
                } else {
                    a
                }
            });
    Ok(ExtensionAudit {
        max_abs_correlation: max_abs,
        witness,
        monogamous: max_abs <= MONOGAMY_TOL,
        lp_count: 2 * coords.len(),
    })
}

fn sum_of_copies(
    base: &BellExpression,
    n: usize,
    k: usize,
    copies: usize,
) -> Result<BellExpression> {
    if k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "requires 1 <= k <= n-1 (got n={n}, k={k})"
        )));
    }
    if copies == 0 {
        return Err(Error::InvalidParameter("copies must be >= 1".into()));
    }
    let total = k + copies * (n - k);
    if total > MAX_SUM_PARTIES {
        return Err(Error::TooLarge(format!(
            "{total} parties (limit {MAX_SUM_PARTIES})"
        )));
    }
    let mut terms = Vec::new();
    for i in 0..copies {
        let parties: Vec<usize> = (0..k)
            .chain(k + i * (n - k)..k + (i + 1) * (n - k))
            .collect();
        terms.extend(base.embed(total, &parties)?.terms);
    }
    Ok(BellExpression {
        name: format!("sum_{copies}({})", base.name),
        n: total,
        terms,
        classical_bound: copies as f64 * base.classical_bound,
        algebraic_max: copies as f64 * base.algebraic_max,
    })
}

/// `sum_i P^n'(A, B^i)`: party block `A = 0..k` is shared, the blocks `B^i`
/// of `n - k` parties are disjoint. `copies` defaults to `n - k + 2`.
pub fn build_monogamy_sum(n: usize, k: usize, copies: Option<usize>) -> Result<BellExpression> {
    let copies = copies.unwrap_or((n + 2).saturating_sub(k));
    sum_of_copies(&BellExpression::p_prime(n)?, n, k, copies)
}

/// Same construction with `Q^n_d'`; bound `copies (n + d)`.
pub fn build_monogamy_sum_q(
    n: usize,
    d: usize,
    k: usize,
    copies: Option<usize>,
) -> Result<BellExpression> {
    let copies = copies.unwrap_or((n + 2).saturating_sub(k));
    sum_of_copies(&BellExpression::q_prime(n, d)?, n, k, copies)
}

/// Objective vector of `expr` over box variables `(s << n) | o`;
/// unassigned parties use setting 0.
fn expression_objective(expr: &BellExpression) -> Vec<f64> {
    let n = expr.n;
    let size = 1usize << n;
    let mut c = vec![0.0; size * size];
    for t in &expr.terms {
        let (s, mask, bits) = assignment_masks(&t.assignment);
        let free = !mask & (size - 1);
        let mut sub = free;
        loop {
            c[(s << n) | bits | sub] += t.coefficient;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonogamyMax {
    pub value: f64,
    pub bound: f64,
    pub within_bound: bool,
    /// Maximizing box.
    pub optimum: BoxDistribution,
}

/// Exact maximum of `expr` over the nonsignaling polytope.
pub fn lp_max_monogamy_sum(expr: &BellExpression) -> Result<MonogamyMax> {
    let n = expr.n;
    if n > MAX_LP_PARTIES {
        return Err(Error::TooLarge(format!(
            "{n} parties (limit {MAX_LP_PARTIES})"
        )));
    }
    let size = 1usize << n;
    // Normalization of the all-zero settings row; nonsignaling carries it
    // to every other row.
    let mut rows = vec![(0..size * size)
        .map(|i| if i < size { 1.0 } else { 0.0 })
        .collect::<Vec<f64>>()];
    rows.extend(nonsignaling_rows(n));
    let mut rhs = vec![0.0; rows.len()];
    rhs[0] = 1.0;
    let sol = FeasibleBasis::new(&rows, &rhs)?.maximize(&expression_objective(expr))?;
    Ok(MonogamyMax {
        value: sol.value,
        bound: expr.classical_bound,
        within_bound: sol.value <= expr.classical_bound + 1e-6,
        optimum: BoxDistribution::new(n, sol.x)?,
    })
}
