//! Bell expressions as data: signed sums of (possibly marginal) outcome
//! probabilities.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::binomial;
use crate::error::{Error, Result};
use crate::measurement::{BoxDistribution, Local, SettingsProfile, StateVector};
use crate::symstate::SymmetricState;

/// `coefficient * P(assigned outcomes | assigned settings)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub assignment: Vec<Option<Local>>,
}

impl Term {
    fn new(coefficient: f64, assignment: Vec<Option<Local>>) -> Self {
        debug_assert!(assignment.iter().any(|a| a.is_some()));
        Term {
            coefficient,
            assignment,
        }
    }

    /// All parties assigned with the given settings and outcomes bits.
    fn full(coefficient: f64, n: usize, settings: usize, outcomes: usize) -> Self {
        Term::new(
            coefficient,
            (0..n)
                .map(|i| {
                    Some(Local::new(
                        ((settings >> i) & 1) as u8,
                        ((outcomes >> i) & 1) as u8,
                    ))
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellExpression {
    pub name: String,
    pub n: usize,
    pub terms: Vec<Term>,
    /// Maximum over local hidden variable models.
    pub classical_bound: f64,
    /// Maximum over all normalized boxes.
    pub algebraic_max: f64,
}

/// Value of an expression together with every term's probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub value: f64,
    pub terms: Vec<TermValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermValue {
    pub coefficient: f64,
    pub probability: f64,
}

fn all_ones(n: usize) -> usize {
    (1usize << n) - 1
}

impl BellExpression {
    /// `P(0..0|0..0) - sum_j P(0..0|e_j) - P(1..1|1..1) <= 0`.
    pub fn p(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("P^n requires n >= 2".into()));
        }
        let mut terms = vec![Term::full(1.0, n, 0, 0)];
        for j in 0..n {
            terms.push(Term::full(-1.0, n, 1 << j, 0));
        }
        terms.push(Term::full(-1.0, n, all_ones(n), all_ones(n)));
        Ok(BellExpression {
            name: format!("P^{n}"),
            n,
            terms,
            classical_bound: 0.0,
            algebraic_max: 1.0,
        })
    }

    /// `P^n` minus the marginals `P(1..1|1..1)` on the first `m` parties for
    /// `m = n-1 .. n-d+1`.
    pub fn q(n: usize, d: usize) -> Result<Self> {
        if d < 2 || n < d + 1 {
            return Err(Error::InvalidParameter(format!(
                "Q^n_d requires d >= 2 and n - d + 1 >= 2 (got n={n}, d={d})"
            )));
        }
        let mut expr = Self::p(n)?;
        for m in (n + 1 - d..n).rev() {
            expr.terms.push(Term::new(
                -1.0,
                (0..n)
                    .map(|i| if i < m { Some(Local::new(1, 1)) } else { None })
                    .collect(),
            ));
        }
        expr.name = format!("Q^{n}_{d}");
        Ok(expr)
    }

    /// Dicke-state expression `L(n,k)`.
    ///
    /// Positive terms: every arrangement of `n-k` zeros and `k` ones with all
    /// parties at setting 0. Negative terms: every ordered pair `(i, j)`
    /// measuring setting 1 with outcomes `(0, 1)`, the others at setting 0
    /// holding `n-k-1` zeros and `k-1` ones; plus `P(0..0|1..1)` and
    /// `P(1..1|1..1)`.
    pub fn l(n: usize, k: usize) -> Result<Self> {
        if k < 1 || n < k + 2 {
            return Err(Error::InvalidParameter(format!(
                "L(n,k) requires 1 <= k <= n-2 (got n={n}, k={k})"
            )));
        }
        let mut terms = Vec::new();
        for o in arrangements(n, k) {
            terms.push(Term::full(1.0, n, 0, o));
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let rest: Vec<usize> = (0..n).filter(|&p| p != i && p != j).collect();
                for pattern in arrangements(n - 2, k - 1) {
                    let mut outcomes = 1usize << j;
                    for (b, &p) in rest.iter().enumerate() {
                        outcomes |= ((pattern >> b) & 1) << p;
                    }
                    terms.push(Term::full(-1.0, n, (1 << i) | (1 << j), outcomes));
                }
            }
        }
        terms.push(Term::full(-1.0, n, all_ones(n), 0));
        terms.push(Term::full(-1.0, n, all_ones(n), all_ones(n)));
        Ok(BellExpression {
            name: format!("L({n},{k})"),
            n,
            terms,
            classical_bound: 0.0,
            algebraic_max: 1.0,
        })
    }

    /// All-positive rewrite of `P^n`: the complement of each negative term
    /// within its settings row. Equals `P^n + (n + 1)` on normalized boxes.
    pub fn p_prime(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("P^n' requires n >= 2".into()));
        }
        let mut terms = vec![Term::full(1.0, n, 0, 0)];
        for j in 0..n {
            for o in 1..=all_ones(n) {
                terms.push(Term::full(1.0, n, 1 << j, o));
            }
        }
        for o in 0..all_ones(n) {
            terms.push(Term::full(1.0, n, all_ones(n), o));
        }
        Ok(BellExpression {
            name: format!("P^{n}'"),
            n,
            terms,
            classical_bound: (n + 1) as f64,
            algebraic_max: (n + 2) as f64,
        })
    }

    /// All-positive rewrite of `Q^n_d`; equals `Q^n_d + (n + d)` on
    /// normalized boxes.
    pub fn q_prime(n: usize, d: usize) -> Result<Self> {
        Self::q(n, d)?;
        let mut expr = Self::p_prime(n)?;
        for m in (n + 1 - d..n).rev() {
            for o in 0..all_ones(m) {
                expr.terms.push(Term::new(
                    1.0,
                    (0..n)
                        .map(|i| {
                            if i < m {
                                Some(Local::new(1, ((o >> i) & 1) as u8))
                            } else {
                                None
                            }
                        })
                        .collect(),
                ));
            }
        }
        expr.name = format!("Q^{n}_{d}'");
        expr.classical_bound = (n + d) as f64;
        expr.algebraic_max = (n + d + 1) as f64;
        Ok(expr)
    }

    pub fn evaluate_state(
        &self,
        state: &SymmetricState,
        sp: &SettingsProfile,
    ) -> Result<EvaluationReport> {
        self.evaluate_vector(&StateVector::new(state), sp)
    }

    /// Same as [`Self::evaluate_state`] with a precomputed amplitude vector.
    pub fn evaluate_vector(
        &self,
        sv: &StateVector,
        sp: &SettingsProfile,
    ) -> Result<EvaluationReport> {
        if sv.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: sv.n(),
            });
        }
        // Rows holding many full-assignment terms are transformed once and
        // read off; everything else is contracted term by term.
        let mut rows: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, t) in self.terms.iter().enumerate() {
            if t.assignment.iter().all(|a| a.is_some()) {
                rows.entry(full_settings(&t.assignment))
                    .or_default()
                    .push(i);
            }
        }
        let mut probability = vec![f64::NAN; self.terms.len()];
        for (&settings, idx) in rows.iter().filter(|(_, idx)| 2 * idx.len() > self.n) {
            let row = sv.row_probabilities(sp, settings)?;
            for &i in idx {
                probability[i] = row[full_outcomes(&self.terms[i].assignment)];
            }
        }
        let terms = self
            .terms
            .iter()
            .zip(probability)
            .map(|(t, p)| {
                Ok(TermValue {
                    coefficient: t.coefficient,
                    probability: if p.is_nan() {
                        sv.probability(sp, &t.assignment)?
                    } else {
                        p
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvaluationReport {
            value: terms.iter().map(|t| t.coefficient * t.probability).sum(),
            terms,
        })
    }

    /// Value on a box; marginal terms use setting 0 for unassigned parties.
    pub fn evaluate_box(&self, b: &BoxDistribution) -> Result<EvaluationReport> {
        if b.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: b.n(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(TermValue {
                    coefficient: t.coefficient,
                    probability: b.marginal(&t.assignment)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvaluationReport {
            value: terms.iter().map(|t| t.coefficient * t.probability).sum(),
            terms,
        })
    }

    /// Copies the expression onto `parties` of a larger scenario with
    /// `total` parties; the other parties are left unassigned.
    pub fn embed(&self, total: usize, parties: &[usize]) -> Result<Self> {
        if parties.len() != self.n || parties.iter().any(|&p| p >= total) {
            return Err(Error::InvalidParameter("bad embedding".into()));
        }
        let distinct: BTreeSet<usize> = parties.iter().copied().collect();
        if distinct.len() != parties.len() {
            return Err(Error::InvalidParameter("embedding repeats a party".into()));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut a = vec![None; total];
                for (src, &dst) in parties.iter().enumerate() {
                    a[dst] = t.assignment[src];
                }
                Term::new(t.coefficient, a)
            })
            .collect();
        Ok(BellExpression {
            name: self.name.clone(),
            n: total,
            terms,
            classical_bound: self.classical_bound,
            algebraic_max: self.algebraic_max,
        })
    }
}

fn full_settings(assignment: &[Option<Local>]) -> usize {
    assignment
        .iter()
        .enumerate()
        .map(|(i, a)| (a.map_or(0, |l| l.setting) as usize) << i)
        .sum()
}

fn full_outcomes(assignment: &[Option<Local>]) -> usize {
    assignment
        .iter()
        .enumerate()
        .map(|(i, a)| (a.map_or(0, |l| l.outcome) as usize) << i)
        .sum()
}

/// Bit patterns over `n` positions with exactly `k` ones, ascending.
pub(crate) fn arrangements(n: usize, k: usize) -> Vec<usize> {
    (0..1usize << n)
        .filter(|x| x.count_ones() as usize == k)
        .collect()
}

/// Closed-form count of `L(n,k)` terms.
pub fn l_term_count(n: usize, k: usize) -> usize {
    let pos = binomial(n, k);
    let neg = (n * (n - 1)) as f64 * binomial(n - 2, k - 1);
    (pos + neg) as usize + 2
}
