//! Exact classical bounds by exhaustive enumeration of deterministic local
//! strategies, and the grouped (partially nonlocal) variant where blocks of
//! parties act as one composite party.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::BellExpression;
use crate::error::{Error, Result};
use crate::measurement::BoxDistribution;

/// Largest party count accepted by [`lhv_bound_exhaustive`].
pub const MAX_LHV_PARTIES: usize = 13;
/// Largest block accepted by [`grouped_lhv_bound`].
pub const MAX_BLOCK_SIZE: usize = 3;
/// Cap on the number of grouped strategies enumerated.
pub const MAX_GROUPED_STRATEGIES: u128 = 100_000_000;

/// Deterministic local strategy. Bit `2i` of `code` is party `i`'s outcome
/// for setting 0, bit `2i + 1` its outcome for setting 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub n: usize,
    pub code: u64,
}

impl DeterministicStrategy {
    pub fn outcome(&self, party: usize, setting: u8) -> u8 {
        ((self.code >> (2 * party + setting as usize)) & 1) as u8
    }

    /// Value of `expr` under this strategy.
    pub fn evaluate(&self, expr: &BellExpression) -> f64 {
        CompiledTerms::new(expr).value(self.code)
    }

    /// The 0/1 box this strategy induces.
    pub fn to_box(&self) -> Result<BoxDistribution> {
        let n = self.n;
        BoxDistribution::from_fn(n, |s, o| {
            let hit =
                (0..n).all(|i| self.outcome(i, ((s >> i) & 1) as u8) as usize == (o >> i) & 1);
            if hit {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Terms as `(mask, want)` pairs over the strategy code: a term holds iff
/// `code & mask == want`.
struct CompiledTerms {
    terms: Vec<(u64, u64, f64)>,
}

impl CompiledTerms {
    fn new(expr: &BellExpression) -> Self {
        let terms = expr
            .terms
            .iter()
            .map(|t| {
                let mut mask = 0u64;
                let mut want = 0u64;
                for (i, a) in t.assignment.iter().enumerate() {
                    if let Some(l) = a {
                        let bit = 1u64 << (2 * i + l.setting as usize);
                        mask |= bit;
                        if l.outcome == 1 {
                            want |= bit;
                        }
                    }
                }
                (mask, want, t.coefficient)
            })
            .collect();
        CompiledTerms { terms }
    }

    fn value(&self, code: u64) -> f64 {
        self.terms
            .iter()
            .filter(|(m, w, _)| code & m == *w)
            .map(|(_, _, c)| c)
            .sum()
    }
}

/// Keeps the larger value; on equal values the smaller code wins.
fn better(a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Exact maximum of `expr` over all `4^n` deterministic strategies.
pub fn lhv_bound_exhaustive(expr: &BellExpression) -> Result<(f64, DeterministicStrategy)> {
    let n = expr.n;
    if n > MAX_LHV_PARTIES {
        return Err(Error::TooLarge(format!(
            "{n} parties (limit {MAX_LHV_PARTIES})"
        )));
    }
    let compiled = CompiledTerms::new(expr);
    let total: u64 = 1 << (2 * n);
    let chunk: u64 = 1 << 12;
    let chunks = total.div_ceil(chunk);
    let (value, code) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(total);
            (start..end).fold((f64::NEG_INFINITY, u64::MAX), |acc, code| {
                better(acc, (compiled.value(code), code))
            })
        })
        .reduce(|| (f64::NEG_INFINITY, u64::MAX), better);
    Ok((value, DeterministicStrategy { n, code }))
}

/// Deterministic strategy where each block of parties maps its joint
/// settings to joint outcomes.
///
/// `tables[b][s]` holds the outcome bits of block `b` (bit `j` is the
/// block's `j`-th party) for joint setting `s` (bit `j` is the setting of
/// the block's `j`-th party).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupedStrategy {
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
    pub tables: Vec<Vec<u8>>,
}

impl GroupedStrategy {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>, tables: Vec<Vec<u8>>) -> Result<Self> {
        validate_partition(n, &blocks)?;
        if tables.len() != blocks.len()
            || blocks.iter().zip(&tables).any(|(b, t)| {
                t.len() != 1 << b.len() || t.iter().any(|&o| o as usize >= 1 << b.len())
            })
        {
            return Err(Error::InvalidParameter(
                "strategy tables do not match blocks".into(),
            ));
        }
        Ok(GroupedStrategy { n, blocks, tables })
    }

    /// Value of `expr`; parties without an assignment inside a block use
    /// setting 0.
    pub fn evaluate(&self, expr: &BellExpression) -> Result<f64> {
        if expr.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: expr.n,
            });
        }
        Ok(GroupedTerms::new(expr, &self.blocks).value(&self.tables))
    }
}

fn validate_partition(n: usize, blocks: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n];
    for b in blocks {
        if b.is_empty() {
            return Err(Error::InvalidParameter("empty block".into()));
        }
        for &p in b {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameter(format!(
                    "blocks must partition 0..{n}"
                )));
            }
            seen[p] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidParameter(format!("blocks must cover 0..{n}")));
    }
    Ok(())
}

/// `(block, joint setting, outcome mask, want)`.
type BlockCondition = (usize, usize, u8, u8);

/// Terms compiled per block, each with its coefficient.
struct GroupedTerms {
    terms: Vec<(Vec<BlockCondition>, f64)>,
}

impl GroupedTerms {
    fn new(expr: &BellExpression, blocks: &[Vec<usize>]) -> Self {
        let terms = expr
            .terms
            .iter()
            .map(|t| {
                let mut reqs = Vec::new();
                for (bi, block) in blocks.iter().enumerate() {
                    let mut setting = 0usize;
                    let mut mask = 0u8;
                    let mut want = 0u8;
                    for (j, &p) in block.iter().enumerate() {
                        if let Some(l) = t.assignment[p] {
                            setting |= (l.setting as usize) << j;
                            mask |= 1 << j;
                            want |= l.outcome << j;
                        }
                    }
                    if mask != 0 {
                        reqs.push((bi, setting, mask, want));
                    }
                }
                (reqs, t.coefficient)
            })
            .collect();
        GroupedTerms { terms }
    }

    fn value(&self, tables: &[Vec<u8>]) -> f64 {
        self.terms
            .iter()
            .filter(|(reqs, _)| reqs.iter().all(|&(b, s, m, w)| tables[b][s] & m == w))
            .map(|(_, c)| c)
            .sum()
    }
}

/// Exact maximum of `expr` over grouped deterministic strategies for the
/// given partition of the parties.
pub fn grouped_lhv_bound(
    expr: &BellExpression,
    blocks: &[Vec<usize>],
) -> Result<(f64, GroupedStrategy)> {
    let n = expr.n;
    validate_partition(n, blocks)?;
    if let Some(b) = blocks.iter().find(|b| b.len() > MAX_BLOCK_SIZE) {
        return Err(Error::TooLarge(format!(
            "block of {} parties (limit {MAX_BLOCK_SIZE})",
            b.len()
        )));
    }
    // Block b has (2^|b|)^(2^|b|) tables.
    let radices: Vec<u64> = blocks
        .iter()
        .map(|b| (1u64 << b.len()).pow(1 << b.len()))
        .collect();
    let total: u128 = radices.iter().map(|&r| r as u128).product();
    if total > MAX_GROUPED_STRATEGIES {
        return Err(Error::TooLarge(format!(
            "{total} grouped strategies (limit {MAX_GROUPED_STRATEGIES})"
        )));
    }
    let total = total as u64;
    let compiled = GroupedTerms::new(expr, blocks);
    let decode_into = |mut index: u64, tables: &mut [Vec<u8>]| {
        for ((b, &r), table) in blocks.iter().zip(&radices).zip(tables.iter_mut()) {
            let mut digit = index % r;
            index /= r;
            let width = 1u64 << b.len();
            for o in table.iter_mut() {
                *o = (digit % width) as u8;
                digit /= width;
            }
        }
    };
    let fresh = || -> Vec<Vec<u8>> { blocks.iter().map(|b| vec![0u8; 1 << b.len()]).collect() };
    let chunk: u64 = 1 << 14;
    let chunks = total.div_ceil(chunk);
    let (value, index) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(total);
            let mut tables = fresh();
            (start..end).fold((f64::NEG_INFINITY, u64::MAX), |acc, i| {
                decode_into(i, &mut tables);
                better(acc, (compiled.value(&tables), i))
            })
        })
        .reduce(|| (f64::NEG_INFINITY, u64::MAX), better);
    let mut tables = fresh();
    decode_into(index, &mut tables);
    Ok((
        value,
        GroupedStrategy {
            n,
            blocks: blocks.to_vec(),
            tables,
        },
    ))
}

/// Grouped strategy reaching `L(n,k) = 1` with parties 0 and 1 in one
/// block.
///
/// The block answers `00` on joint setting `00`, `11` on `01` and `10`, and
/// `01` (party 0 outputs 0, party 1 outputs 1) on `11`. Parties
/// `2..n-k` output their setting; parties `n-k..n` always output 1.
pub fn paired_block_strategy(n: usize, k: usize) -> Result<GroupedStrategy> {
    if n < 3 || k < 1 || n < k + 2 {
        return Err(Error::InvalidParameter(format!(
            "requires n >= 3 and 1 <= k <= n-2 (got n={n}, k={k})"
        )));
    }
    let mut blocks = vec![vec![0, 1]];
    // joint setting index s0 | s1 << 1 -> outcome bits o0 | o1 << 1
    let mut tables = vec![vec![0b00, 0b11, 0b11, 0b10]];
    for p in 2..n {
        blocks.push(vec![p]);
        if p < n - k {
            tables.push(vec![0, 1]);
        } else {
            tables.push(vec![1, 1]);
        }
    }
    GroupedStrategy::new(n, blocks, tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::Local;

    #[test]
    fn p_bound_is_zero() {
        for n in 2..=6 {
            let (v, s) = lhv_bound_exhaustive(&BellExpression::p(n).unwrap()).unwrap();
            assert_eq!(v, 0.0);
            assert_eq!(s.evaluate(&BellExpression::p(n).unwrap()), 0.0);
            // ties resolve to the smallest code
            for code in 0..s.code {
                let d = DeterministicStrategy { n, code };
                assert!(d.evaluate(&BellExpression::p(n).unwrap()) < 0.0);
            }
        }
    }

    #[test]
    fn strategy_value_matches_box_value() {
        let expr = BellExpression::l(4, 1).unwrap();
        for code in [0u64, 5, 77, 130, 255] {
            let s = DeterministicStrategy { n: 4, code };
            let b = s.to_box().unwrap();
            assert_eq!(b.normalization_error(), 0.0);
            assert!(b.table().iter().all(|&p| p == 0.0 || p == 1.0));
            let via_box = expr.evaluate_box(&b).unwrap().value;
            assert_eq!(s.evaluate(&expr), via_box);
        }
        let q = BellExpression::q(4, 3).unwrap();
        for code in 0..256u64 {
            let s = DeterministicStrategy { n: 4, code };
            assert_eq!(
                s.evaluate(&q),
                q.evaluate_box(&s.to_box().unwrap()).unwrap().value
            );
        }
    }

    #[test]
    fn too_many_parties() {
        let e = BellExpression {
            name: "big".into(),
            n: 14,
            terms: vec![crate::bell::Term {
                coefficient: 1.0,
                assignment: {
                    let mut a = vec![None; 14];
                    a[0] = Some(Local::new(0, 0));
                    a
                },
            }],
            classical_bound: 0.0,
            algebraic_max: 1.0,
        };
        assert!(matches!(lhv_bound_exhaustive(&e), Err(Error::TooLarge(_))));
    }

    #[test]
    fn grouped_examples() {
        let l41 = BellExpression::l(4, 1).unwrap();
        let (v, _) = grouped_lhv_bound(&l41, &[vec![0, 1], vec![2], vec![3]]).unwrap();
        assert_eq!(v, 1.0);
        // n = 3 makes the first block a single party, i.e. no grouping;
        // n = 5 already exceeds the enumeration cap
        let p = BellExpression::p(4).unwrap();
        let (v, _) = grouped_lhv_bound(&p, &[vec![0, 1], vec![2], vec![3]]).unwrap();
        assert_eq!(v, 1.0);
        for n in 3..=5 {
            let p = BellExpression::p(n).unwrap();
            let singles: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
            let (v, _) = grouped_lhv_bound(&p, &singles).unwrap();
            assert_eq!(v, 0.0);
            assert_eq!(v, lhv_bound_exhaustive(&p).unwrap().0);
        }
    }

    #[test]
    fn grouped_argmax_evaluates_to_max() {
        let l = BellExpression::l(4, 2).unwrap();
        let blocks = vec![vec![0, 1], vec![2], vec![3]];
        let (v, s) = grouped_lhv_bound(&l, &blocks).unwrap();
        assert_eq!(s.evaluate(&l).unwrap(), v);
    }

    #[test]
    fn partition_errors() {
        let p = BellExpression::p(4).unwrap();
        assert!(grouped_lhv_bound(&p, &[vec![0, 1], vec![2]]).is_err());
        assert!(grouped_lhv_bound(&p, &[vec![0, 1], vec![1, 2], vec![3]]).is_err());
        assert!(matches!(
            grouped_lhv_bound(&p, &[vec![0, 1, 2, 3]]),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn paired_block_examples() {
        for (n, k) in [(3, 1), (4, 1), (4, 2), (5, 1), (5, 2), (5, 3), (6, 2)] {
            let s = paired_block_strategy(n, k).unwrap();
            let l = BellExpression::l(n, k).unwrap();
            assert_eq!(s.evaluate(&l).unwrap(), 1.0, "({n},{k})");
        }
        assert!(paired_block_strategy(4, 3).is_err());
        assert!(paired_block_strategy(2, 1).is_err());
    }
}
