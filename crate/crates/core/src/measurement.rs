//! Projective two-setting measurements and outcome probabilities.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symstate::{BlochPoint, SymmetricState};

/// Largest party count for which a full correlation table is materialized.
pub const MAX_BOX_PARTIES: usize = 12;

/// One party's choice in a probability term: measure `setting`, observe
/// `outcome`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Local {
    pub setting: u8,
    pub outcome: u8,
}

impl Local {
    pub const fn new(setting: u8, outcome: u8) -> Self {
        Local { setting, outcome }
    }
}

/// Per-party partial assignment; `None` marks a marginalized party.
pub type Assignment = Vec<Option<Local>>;

/// Dichotomic projective measurement. Outcome 0 projects onto the Bloch
/// direction `point`, outcome 1 onto its antipode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    point: BlochPoint,
}

impl Basis {
    pub fn from_point(point: BlochPoint) -> Self {
        Basis { point }
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Basis {
            point: BlochPoint::new(theta, phi),
        }
    }

    /// Basis whose outcome-0 projector has Bloch vector `v` (must be unit).
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "Bloch vector has norm {norm}, expected 1"
            )));
        }
        Ok(Basis {
            point: BlochPoint::from_bloch_vector(v),
        })
    }

    /// `sigma_z`: outcome 0 is `|0>`.
    pub fn sigma_z() -> Self {
        Basis::from_point(BlochPoint::north())
    }

    /// `sigma_x`: outcome 0 is `|+>`.
    pub fn sigma_x() -> Self {
        Basis::from_angles(std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn point(&self) -> BlochPoint {
        self.point
    }

    pub fn bloch0(&self) -> [f64; 3] {
        self.point.bloch_vector()
    }

    /// State vector selected by `outcome`.
    pub fn ket(&self, outcome: u8) -> [Complex64; 2] {
        if outcome == 0 {
            self.point.ket()
        } else {
            self.point.antipode().ket()
        }
    }

    /// `(I +- (alpha X + beta Y + gamma Z)) / 2`, `+` for outcome 0.
    pub fn projector(&self, outcome: u8) -> [[Complex64; 2]; 2] {
        let [a, b, g] = self.bloch0();
        let s = if outcome == 0 { 0.5 } else { -0.5 };
        [
            [
                Complex64::new(0.5 + s * g, 0.0),
                Complex64::new(s * a, -s * b),
            ],
            [
                Complex64::new(s * a, s * b),
                Complex64::new(0.5 - s * g, 0.0),
            ],
        ]
    }
}

/// Two bases per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsProfile {
    bases: Vec<[Basis; 2]>,
}

impl SettingsProfile {
    pub fn new(bases: Vec<[Basis; 2]>) -> Self {
        SettingsProfile { bases }
    }

    /// Every party uses the same pair of bases.
    pub fn uniform(n: usize, setting0: Basis, setting1: Basis) -> Self {
        SettingsProfile {
            bases: vec![[setting0, setting1]; n],
        }
    }

    /// From `(theta0, phi0, theta1, phi1)` per party.
    pub fn from_angles(angles: &[[f64; 4]]) -> Self {
        SettingsProfile {
            bases: angles
                .iter()
                .map(|a| {
                    [
                        Basis::from_angles(a[0], a[1]),
                        Basis::from_angles(a[2], a[3]),
                    ]
                })
                .collect(),
        }
    }

    pub fn angles(&self) -> Vec<[f64; 4]> {
        self.bases
            .iter()
            .map(|[b0, b1]| {
                let (p, q) = (b0.point(), b1.point());
                [p.theta, p.phi, q.theta, q.phi]
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.bases.len()
    }

    pub fn basis(&self, party: usize, setting: u8) -> &Basis {
        &self.bases[party][setting as usize]
    }

    pub fn bases(&self) -> &[[Basis; 2]] {
        &self.bases
    }
}

/// `2^n` amplitude vector of a symmetric state, reused across many
/// probability evaluations.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(state: &SymmetricState) -> Self {
        StateVector {
            n: state.n(),
            amps: state.amplitudes(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of a partial assignment: assigned parties are contracted
    /// with the bra of their outcome vector, the rest are traced out.
    pub fn probability(&self, sp: &SettingsProfile, assignment: &[Option<Local>]) -> Result<f64> {
        if sp.n() != self.n || assignment.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: if sp.n() != self.n {
                    sp.n()
                } else {
                    assignment.len()
                },
            });
        }
        if assignment.iter().all(|a| a.is_none()) {
            return Err(Error::InvalidParameter("empty assignment".into()));
        }
        let mut v = self.amps.clone();
        // Contract from the highest party down so lower bit positions stay put.
        for party in (0..self.n).rev() {
            if let Some(local) = assignment[party] {
                let k = sp.basis(party, local.setting).ket(local.outcome);
                v = contract(&v, party, [k[0].conj(), k[1].conj()]);
            }
        }
        Ok(v.iter().map(|c| c.norm_sqr()).sum())
    }
    /// `P(o | settings)` for every outcome string `o` (bit `i` is party `i`).
    pub fn row_probabilities(&self, sp: &SettingsProfile, settings: usize) -> Result<Vec<f64>> {
        if sp.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: sp.n(),
            });
        }
        let mut v = self.amps.clone();
        for party in 0..self.n {
            let basis = sp.basis(party, ((settings >> party) & 1) as u8);
            let [k0, k1] = [basis.ket(0), basis.ket(1)];
            let bit = 1usize << party;
            for i in (0..v.len()).filter(|i| i & bit == 0) {
                let (a, b) = (v[i], v[i | bit]);
                v[i] = k0[0].conj() * a + k0[1].conj() * b;
                v[i | bit] = k1[0].conj() * a + k1[1].conj() * b;
            }
        }
        Ok(v.iter().map(|c| c.norm_sqr()).collect())
    }
}

/// Applies the bra `(b0, b1)` to qubit `party` of `v`.
fn contract(v: &[Complex64], party: usize, bra: [Complex64; 2]) -> Vec<Complex64> {
    let half = v.len() / 2;
    let low_mask = (1usize << party) - 1;
    (0..half)
        .map(|i| {
            let idx0 = ((i & !low_mask) << 1) | (i & low_mask);
            bra[0] * v[idx0] + bra[1] * v[idx0 | (1 << party)]
        })
        .collect()
}

/// Probability that the assigned parties obtain their outcomes; see
/// [`StateVector::probability`].
pub fn term_probability(
    state: &SymmetricState,
    sp: &SettingsProfile,
    assignment: &[Option<Local>],
) -> Result<f64> {
    StateVector::new(state).probability(sp, assignment)
}

/// Full conditional probability table `P(outcomes | settings)` for `n`
/// parties with binary settings and outcomes.
///
/// Entry `(s, o)` lives at index `(s << n) | o`; bit `i` of `s` and `o` is
/// party `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDistribution {
    n: usize,
    table: Vec<f64>,
}

impl BoxDistribution {
    pub fn new(n: usize, table: Vec<f64>) -> Result<Self> {
        if n > MAX_BOX_PARTIES {
            return Err(Error::TooLarge(format!("box with {n} parties")));
        }
        if table.len() != 1usize << (2 * n) {
            return Err(Error::InvalidParameter(format!(
                "table has {} entries, expected {}",
                table.len(),
                1usize << (2 * n)
            )));
        }
        Ok(BoxDistribution { n, table })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let size = 1usize << n;
        let table = (0..size * size)
            .map(|i| f(i >> n, i & (size - 1)))
            .collect();
        Self::new(n, table)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let p = 1.0 / (1usize << n) as f64;
        Self::from_fn(n, |_, _| p)
    }

    /// The Popescu–Rohrlich box `P(ab|xy) = [a xor b = x and y] / 2`.
    pub fn pr_box() -> Self {
        Self::from_fn(2, |s, o| {
            let xy = (s & 1) & (s >> 1);
            let ab = (o & 1) ^ (o >> 1);
            if ab == xy {
                0.5
            } else {
                0.0
            }
        })
        .expect("two-party box")
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &BoxDistribution, w: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| w * a + (1.0 - w) * b)
            .collect();
        Self::new(self.n, table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, settings: usize, outcomes: usize) -> f64 {
        self.table[(settings << self.n) | outcomes]
    }

    /// Largest deviation of any settings row from unit sum.
    pub fn normalization_error(&self) -> f64 {
        let size = 1usize << self.n;
        self.table
            .chunks(size)
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Probability of a partial assignment. Unassigned parties are summed
    /// over with setting 0, which is immaterial for nonsignaling boxes.
    pub fn marginal(&self, assignment: &[Option<Local>]) -> Result<f64> {
        if assignment.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: assignment.len(),
            });
        }
        let (settings, fixed_mask, fixed_bits) = assignment_masks(assignment);
        let free_mask = !fixed_mask & ((1usize << self.n) - 1);
        let mut total = 0.0;
        let mut sub = free_mask;
        loop {
            total += self.get(settings, fixed_bits | sub);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free_mask;
        }
        Ok(total)
    }
}

/// `(settings index with setting 0 for free parties, assigned-party mask,
/// assigned outcome bits)`.
pub(crate) fn assignment_masks(assignment: &[Option<Local>]) -> (usize, usize, usize) {
    let mut settings = 0usize;
    let mut mask = 0usize;
    let mut bits = 0usize;
    for (i, a) in assignment.iter().enumerate() {
        if let Some(l) = a {
            mask |= 1 << i;
            settings |= (l.setting as usize & 1) << i;
            bits |= (l.outcome as usize & 1) << i;
        }
    }
    (settings, mask, bits)
}

/// Full correlation table of `state` measured with `sp`.
pub fn quantum_box(state: &SymmetricState, sp: &SettingsProfile) -> Result<BoxDistribution> {
    let n = state.n();
    if sp.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sp.n(),
        });
    }
    if n > MAX_BOX_PARTIES {
        return Err(Error::TooLarge(format!("box with {n} parties")));
    }
    let amps = state.amplitudes();
    let size = 1usize << n;
    let rows: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|s| {
            let mut v = amps.clone();
            for party in 0..n {
                let basis = sp.basis(party, ((s >> party) & 1) as u8);
                let k0 = basis.ket(0);
                let k1 = basis.ket(1);
                rotate(
                    &mut v,
                    party,
                    [[k0[0].conj(), k0[1].conj()], [k1[0].conj(), k1[1].conj()]],
                );
            }
            v.iter().map(|c| c.norm_sqr().max(0.0)).collect()
        })
        .collect();
    BoxDistribution::new(n, rows.concat())
}

/// Applies the 2x2 matrix `u` (rows are outcome bras) to qubit `party`.
fn rotate(v: &mut [Complex64], party: usize, u: [[Complex64; 2]; 2]) {
    let bit = 1usize << party;
    for i in 0..v.len() {
        if i & bit == 0 {
            let (a, b) = (v[i], v[i | bit]);
            v[i] = u[0][0] * a + u[0][1] * b;
            v[i | bit] = u[1][0] * a + u[1][1] * b;
        }
    }
}
