//! Permutation-symmetric multiqubit states in the Dicke basis and their
//! Majorana (stellar) representation.
//!
//! A symmetric state of `n` qubits is stored as its `n + 1` amplitudes over
//! the Dicke states `|S(n,k)>`, where `k` counts excitations (`|1>`s). The
//! Majorana points are the roots of
//!
//! ```text
//! q(z) = sum_k (-1)^k sqrt(C(n,k)) a_k z^(n-k)
//! ```
//!
//! under the stereographic map `z = tan(theta/2) e^(i phi)`, so that a root
//! `z` corresponds to the qubit `cos(theta/2)|0> + e^(i phi) sin(theta/2)|1>`.
//! Missing leading powers (vanishing `a_0, a_1, ...`) are roots at infinity,
//! i.e. points at the south pole.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::binomial;
use crate::error::{Error, Result};
use crate::roots::polynomial_roots;

/// Default chordal clustering radius for merging numerically split roots.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

const NORM_TOL: f64 = 1e-12;
/// Relative magnitude below which a polynomial coefficient is treated as zero.
const ZERO_COEFF: f64 = 1e-13;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A point on the Bloch sphere, `cos(theta/2)|0> + e^(i phi) sin(theta/2)|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub theta: f64,
    pub phi: f64,
}

impl BlochPoint {
    /// Creates a point, wrapping `phi` into `[0, 2pi)` and folding `theta`
    /// into `[0, pi]`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(2.0 * PI);
        let mut phi = phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        BlochPoint {
            theta,
            phi: wrap_angle(phi),
        }
    }

    pub fn north() -> Self {
        BlochPoint {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn south() -> Self {
        BlochPoint {
            theta: PI,
            phi: 0.0,
        }
    }

    /// The point representing the (normalized) qubit `c0|0> + c1|1>`.
    pub fn from_ket(c0: Complex64, c1: Complex64) -> Self {
        let (r0, r1) = (c0.norm(), c1.norm());
        let theta = 2.0 * r1.atan2(r0);
        let phi = if r0 == 0.0 || r1 == 0.0 {
            0.0
        } else {
            c1.arg() - c0.arg()
        };
        BlochPoint {
            theta,
            phi: wrap_angle(phi),
        }
    }

    /// The point whose stereographic coordinate is `z`.
    pub fn from_stereographic(z: Complex64) -> Self {
        if !z.is_finite() {
            return Self::south();
        }
        let r = z.norm();
        let phi = if r == 0.0 { 0.0 } else { z.arg() };
        BlochPoint {
            theta: 2.0 * r.atan(),
            phi: wrap_angle(phi),
        }
    }

    pub fn from_bloch_vector(v: [f64; 3]) -> Self {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        let phi = if v[0] == 0.0 && v[1] == 0.0 {
            0.0
        } else {
            v[1].atan2(v[0])
        };
        BlochPoint {
            theta: z.acos(),
            phi: wrap_angle(phi),
        }
    }

    /// Qubit amplitudes `(<0|p>, <1|p>)`.
    pub fn ket(&self) -> [Complex64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [c64(c, 0.0), Complex64::from_polar(s, self.phi)]
    }

    /// The orthogonal state, represented by the antipodal point.
    pub fn antipode(&self) -> Self {
        BlochPoint {
            theta: PI - self.theta,
            phi: wrap_angle(self.phi + PI),
        }
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Euclidean distance between the two points in R^3.
    pub fn chordal_distance(&self, other: &BlochPoint) -> f64 {
        let a = self.bloch_vector();
        let b = other.bloch_vector();
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &BlochPoint) -> Complex64 {
        let a = self.ket();
        let b = other.ket();
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }

    fn lex_key(&self) -> (f64, f64) {
        (self.theta, self.phi)
    }
}

pub(crate) fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// One distinct Majorana point with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajoranaPoint {
    pub point: BlochPoint,
    pub multiplicity: usize,
}

/// Multiset of Bloch-sphere points, stored as distinct entries with
/// multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajoranaSet {
    points: Vec<MajoranaPoint>,
}

impl MajoranaSet {
    /// Clusters `points` within chordal distance `tol` and merges each
    /// cluster into one entry placed at the cluster's mean direction.
    pub fn from_points(points: &[BlochPoint], tol: f64) -> Self {
        let mut clusters: Vec<([f64; 3], usize, BlochPoint)> = Vec::new();
        for p in points {
            let v = p.bloch_vector();
            let hit = clusters
                .iter_mut()
                .find(|(_, _, rep)| rep.chordal_distance(p) <= tol);
            match hit {
                Some((sum, count, rep)) => {
                    for i in 0..3 {
                        sum[i] += v[i];
                    }
                    *count += 1;
                    *rep = BlochPoint::from_bloch_vector(*sum);
                }
                None => clusters.push((v, 1, *p)),
            }
        }
        let mut points: Vec<MajoranaPoint> = clusters
            .into_iter()
            .map(|(_, multiplicity, point)| MajoranaPoint {
                point,
                multiplicity,
            })
            .collect();
        sort_entries(&mut points);
        MajoranaSet { points }
    }

    /// Builds a set from explicit entries; entries are not re-clustered.
    pub fn from_entries(entries: Vec<MajoranaPoint>) -> Result<Self> {
        if entries.iter().any(|e| e.multiplicity == 0) {
            return Err(Error::InvalidParameter("zero multiplicity".into()));
        }
        let mut points = entries;
        sort_entries(&mut points);
        Ok(MajoranaSet { points })
    }

    pub fn entries(&self) -> &[MajoranaPoint] {
        &self.points
    }

    /// Total multiplicity.
    pub fn n(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Every point repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<BlochPoint> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.point, p.multiplicity))
            .collect()
    }

    /// Multiplicities in descending order.
    pub fn degeneracy_profile(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.points.iter().map(|p| p.multiplicity).collect();
        m.sort_unstable_by(|a, b| b.cmp(a));
        m
    }

    /// Applies `z -> (a z + b) / (c z + d)` to every point, keeping
    /// multiplicities. The south pole is the point at infinity.
    pub fn mobius(
        &self,
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<MajoranaSet> {
        let det = a * d - b * c;
        if det.norm() < 1e-12 {
            return Err(Error::ConstantMap);
        }
        // Homogeneous coordinates (w0, w1) with z = w1 / w0.
        let points = self
            .points
            .iter()
            .map(|e| {
                let [w0, w1] = e.point.ket();
                let new_w1 = a * w1 + b * w0;
                let new_w0 = c * w1 + d * w0;
                let norm = (new_w0.norm_sqr() + new_w1.norm_sqr()).sqrt();
                MajoranaPoint {
                    point: BlochPoint::from_ket(new_w0 / norm, new_w1 / norm),
                    multiplicity: e.multiplicity,
                }
            })
            .collect();
        MajoranaSet::from_entries(points)
    }
}

fn sort_entries(points: &mut [MajoranaPoint]) {
    points.sort_by(|a, b| {
        a.point
            .lex_key()
            .partial_cmp(&b.point.lex_key())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Unit-norm permutation-symmetric state over the Dicke basis.
///
/// States are kept in canonical phase: the first coefficient with modulus
/// above `1e-12` is real and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricState {
    coeffs: Vec<Complex64>,
}

impl SymmetricState {
    /// Normalizes `coeffs` (amplitudes of `|S(n,0)>..|S(n,n)>`).
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidParameter(
                "a symmetric state needs at least one party".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < NORM_TOL {
            return Err(Error::NotNormalizable);
        }
        let mut coeffs: Vec<Complex64> = coeffs.into_iter().map(|c| c / norm).collect();
        if let Some(first) = coeffs.iter().find(|c| c.norm() > NORM_TOL) {
            let phase = first.conj() / first.norm();
            for c in coeffs.iter_mut() {
                *c *= phase;
            }
        }
        Ok(SymmetricState { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&r| c64(r, 0.0)).collect())
    }

    /// Dicke state `|S(n,k)>`.
    pub fn dicke(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "dicke({n},{k}) requires n >= 1 and 0 <= k <= n"
            )));
        }
        let mut coeffs = vec![c64(0.0, 0.0); n + 1];
        coeffs[k] = c64(1.0, 0.0);
        Self::new(coeffs)
    }

    pub fn w(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("w(n) requires n >= 1".into()));
        }
        Self::dicke(n, 1)
    }

    pub fn ghz(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("ghz(n) requires n >= 1".into()));
        }
        let mut coeffs = vec![c64(0.0, 0.0); n + 1];
        coeffs[0] = c64(1.0, 0.0);
        coeffs[n] = c64(1.0, 0.0);
        Self::new(coeffs)
    }

    /// `sqrt(1/3)|S(4,0)> + sqrt(2/3)|S(4,3)>`.
    pub fn tetrahedron() -> Self {
        Self::from_real(&[(1.0f64 / 3.0).sqrt(), 0.0, 0.0, (2.0f64 / 3.0).sqrt(), 0.0])
            .expect("valid coefficients")
    }

    /// `(2/sqrt5)|0000> + (1/sqrt5)|S(4,1)>`, the symmetrization of `|000+>`.
    pub fn zzz_plus() -> Self {
        Self::from_real(&[2.0, 1.0, 0.0, 0.0, 0.0]).expect("valid coefficients")
    }

    /// Normalized symmetrization of `|0>|0>|0>(cos(t/2)|0> + sin(t/2)|1>)`.
    pub fn zzz_theta(theta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "theta = {theta} outside [0, pi]"
            )));
        }
        let n = BlochPoint::north();
        let set = MajoranaSet::from_entries(vec![
            MajoranaPoint {
                point: n,
                multiplicity: 3,
            },
            MajoranaPoint {
                point: BlochPoint::new(theta, 0.0),
                multiplicity: 1,
            },
        ])?;
        Ok(state_from_majorana(&set))
    }

    pub fn from_spec(spec: &StateSpec) -> Result<Self> {
        match spec {
            StateSpec::Dicke { n, k } => Self::dicke(*n, *k),
            StateSpec::W(n) => Self::w(*n),
            StateSpec::Ghz(n) => Self::ghz(*n),
            StateSpec::Tetrahedron => Ok(Self::tetrahedron()),
            StateSpec::ZzzPlus => Ok(Self::zzz_plus()),
            StateSpec::ZzzTheta(t) => Self::zzz_theta(*t),
            StateSpec::Raw(c) => Self::new(c.clone()),
        }
    }

    /// Number of parties.
    pub fn n(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &SymmetricState) -> f64 {
        if self.n() != other.n() {
            return 0.0;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }

    /// Full `2^n` amplitude vector; bit `i` of the index is party `i`.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        let n = self.n();
        let scale: Vec<f64> = (0..=n).map(|k| binomial(n, k).sqrt().recip()).collect();
        (0..1usize << n)
            .map(|x| {
                let k = x.count_ones() as usize;
                self.coeffs[k] * scale[k]
            })
            .collect()
    }

    /// Whether all coefficients but one vanish (a Dicke state in the
    /// computational frame).
    pub fn is_dicke_in_computational_basis(&self) -> bool {
        self.coeffs.iter().filter(|c| c.norm() > NORM_TOL).count() == 1
    }

    /// Single-qubit reduced density matrix (any party).
    pub fn single_party_rdm(&self) -> [[Complex64; 2]; 2] {
        let n = self.n() as f64;
        let a = &self.coeffs;
        let mut r00 = 0.0;
        let mut r11 = 0.0;
        let mut r01 = c64(0.0, 0.0);
        for k in 0..a.len() {
            let kf = k as f64;
            r00 += a[k].norm_sqr() * (n - kf) / n;
            r11 += a[k].norm_sqr() * kf / n;
            if k + 1 < a.len() {
                r01 += a[k] * a[k + 1].conj() * ((n - kf) * (kf + 1.0)).sqrt() / n;
            }
        }
        [[c64(r00, 0.0), r01], [r01.conj(), c64(r11, 0.0)]]
    }
}

/// Named-state descriptor accepted by [`SymmetricState::from_spec`].
///
/// Text forms: `dicke:N,K`, `w:N`, `ghz:N`, `tetra`, `zzz_plus` (or `000+`),
/// `zzz_theta:T` (or `000theta:T`), and `raw:c0,c1,...` where each
/// coefficient is real or complex written as `re+imi`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Dicke { n: usize, k: usize },
    W(usize),
    Ghz(usize),
    Tetrahedron,
    ZzzPlus,
    ZzzTheta(f64),
    Raw(Vec<Complex64>),
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("expected an integer, got '{s}'")))
}

/// Parses `1`, `-0.5`, `0.3+0.4i`, `0.3-0.4i`, `2i`, `-i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || Error::Parse(format!("invalid complex number '{s}'"));
    if t.is_empty() {
        return Err(err());
    }
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not the leading one and not an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-')
                && bytes[i - 1] != b'e'
                && bytes[i - 1] != b'E'
            {
                split = Some(i);
                break;
            }
        }
        let imag = |x: &str| -> Result<f64> {
            match x {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => x.parse().map_err(|_| err()),
            }
        };
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().map_err(|_| err())?;
                Ok(c64(re, imag(&body[i..])?))
            }
            None => Ok(c64(0.0, imag(body)?)),
        }
    } else {
        Ok(c64(t.parse().map_err(|_| err())?, 0.0))
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim().to_ascii_lowercase(), Some(b.trim())),
            None => (s.to_ascii_lowercase(), None),
        };
        let need = || arg.ok_or_else(|| Error::Parse(format!("state '{name}' needs an argument")));
        match name.as_str() {
            "dicke" => {
                let a = need()?;
                let (n, k) = a
                    .split_once([',', ':'])
                    .ok_or_else(|| Error::Parse("dicke needs N,K".into()))?;
                Ok(StateSpec::Dicke {
                    n: parse_usize(n)?,
                    k: parse_usize(k)?,
                })
            }
            "w" => Ok(StateSpec::W(parse_usize(need()?)?)),
            "ghz" => Ok(StateSpec::Ghz(parse_usize(need()?)?)),
            "tetra" | "tetrahedron" | "t" => Ok(StateSpec::Tetrahedron),
            "zzz_plus" | "000+" => Ok(StateSpec::ZzzPlus),
            "zzz_theta" | "000theta" => {
                let a = need()?;
                let t: f64 = a
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid angle '{a}'")))?;
                Ok(StateSpec::ZzzTheta(t))
            }
            "raw" => {
                let a = need()?;
                let coeffs = a
                    .split(',')
                    .map(parse_complex)
                    .collect::<Result<Vec<_>>>()?;
                Ok(StateSpec::Raw(coeffs))
            }
            _ => Err(Error::Parse(format!("unknown state '{s}'"))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Dicke { n, k } => write!(f, "dicke:{n},{k}"),
            StateSpec::W(n) => write!(f, "w:{n}"),
            StateSpec::Ghz(n) => write!(f, "ghz:{n}"),
            StateSpec::Tetrahedron => write!(f, "tetra"),
            StateSpec::ZzzPlus => write!(f, "zzz_plus"),
            StateSpec::ZzzTheta(t) => write!(f, "zzz_theta:{t}"),
            StateSpec::Raw(c) => {
                let parts: Vec<String> = c.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
                write!(f, "raw:{}", parts.join(","))
            }
        }
    }
}

/// Majorana points of `state`, clustered with chordal radius `tol`.
pub fn majorana_points(state: &SymmetricState, tol: f64) -> MajoranaSet {
    let n = state.n();
    // poly[k] multiplies z^(n-k)
    let poly: Vec<Complex64> = state
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            a * (sign * binomial(n, k).sqrt())
        })
        .collect();
    let scale = poly.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let is_zero = |c: &Complex64| c.norm() <= ZERO_COEFF * scale;

    let south = poly.iter().take_while(|c| is_zero(c)).count();
    let north = poly.iter().rev().take_while(|c| is_zero(c)).count();
    let mut points = Vec::with_capacity(n);
    points.extend(std::iter::repeat_n(BlochPoint::south(), south));
    points.extend(std::iter::repeat_n(BlochPoint::north(), north));
    if south + north < n {
        let core = &poly[south..poly.len() - north];
        points.extend(
            polynomial_roots(core)
                .into_iter()
                .map(BlochPoint::from_stereographic),
        );
    }
    MajoranaSet::from_points(&points, tol)
}

/// Normalized symmetrization of the product of the given single-qubit
/// states.
pub fn state_from_majorana(points: &MajoranaSet) -> SymmetricState {
    let kets: Vec<[Complex64; 2]> = points.expanded().iter().map(|p| p.ket()).collect();
    let n = kets.len();
    // Coefficients of prod_j (e0_j X + e1_j Y), indexed by the power of Y.
    let mut e = vec![c64(1.0, 0.0)];
    for [k0, k1] in &kets {
        let mut next = vec![c64(0.0, 0.0); e.len() + 1];
        for (i, &v) in e.iter().enumerate() {
            next[i] += v * k0;
            next[i + 1] += v * k1;
        }
        e = next;
    }
    let coeffs = e
        .into_iter()
        .enumerate()
        .map(|(k, v)| v / binomial(n, k).sqrt())
        .collect();
    SymmetricState::new(coeffs).expect("symmetrized product states never vanish")
}

/// Projects one party onto `p`: returns `(||<p|psi>||, <p|psi> / ||<p|psi>||)`.
pub fn collapse(state: &SymmetricState, p: &BlochPoint) -> Result<(f64, SymmetricState)> {
    let n = state.n();
    if n < 2 {
        return Err(Error::InvalidParameter("collapse requires n >= 2".into()));
    }
    let [p0, p1] = p.ket();
    let (p0, p1) = (p0.conj(), p1.conj());
    let a = state.coeffs();
    let residual: Vec<Complex64> = (0..n)
        .map(|j| {
            let base = binomial(n - 1, j);
            p0 * a[j] * (base / binomial(n, j)).sqrt()
                + p1 * a[j + 1] * (base / binomial(n, j + 1)).sqrt()
        })
        .collect();
    let amplitude = residual.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if amplitude < NORM_TOL {
        return Err(Error::ZeroProjection);
    }
    Ok((amplitude, SymmetricState::new(residual)?))
}

/// `<p|^{(x)n} |psi>`.
pub fn product_overlap(state: &SymmetricState, p: &BlochPoint) -> Complex64 {
    let n = state.n();
    let [p0, p1] = p.ket();
    let (p0, p1) = (p0.conj(), p1.conj());
    state
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, a)| a * binomial(n, k).sqrt() * p0.powu((n - k) as u32) * p1.powu(k as u32))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> SymmetricState {
        let coeffs = (0..=n)
            .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SymmetricState::new(coeffs).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng) -> BlochPoint {
        let u: f64 = rng.gen_range(-1.0..1.0);
        BlochPoint::new(u.acos(), rng.gen_range(0.0..2.0 * PI))
    }

    #[test]
    fn named_states() {
        let t = SymmetricState::tetrahedron();
        let want = [(1.0f64 / 3.0).sqrt(), 0.0, 0.0, (2.0f64 / 3.0).sqrt(), 0.0];
        for (c, w) in t.coeffs().iter().zip(want) {
            assert_abs_diff_eq!(c.re, w, epsilon = 1e-15);
            assert_abs_diff_eq!(c.im, 0.0);
        }
        let z = SymmetricState::zzz_theta(0.0).unwrap();
        assert_abs_diff_eq!(z.coeffs()[0].re, 1.0, epsilon = 1e-15);
        let zp = SymmetricState::zzz_theta(PI).unwrap();
        assert!(zp.fidelity(&SymmetricState::w(4).unwrap()) > 1.0 - 1e-14);
        let plus = SymmetricState::zzz_theta(PI / 2.0).unwrap();
        assert!(plus.fidelity(&SymmetricState::zzz_plus()) > 1.0 - 1e-14);
        let g = SymmetricState::ghz(5).unwrap();
        assert_abs_diff_eq!(g.coeffs()[0].re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.coeffs()[5].re, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            SymmetricState::from_real(&[0.0, 0.0, 0.0]),
            Err(Error::NotNormalizable)
        );
        assert!(SymmetricState::dicke(3, 4).is_err());
        assert!(SymmetricState::zzz_theta(4.0).is_err());
    }

    #[test]
    fn canonical_phase() {
        let s = SymmetricState::new(vec![c64(0.0, 0.0), c64(0.0, 2.0), c64(-1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(s.coeffs()[1].im, 0.0);
        assert!(s.coeffs()[1].re > 0.0);
    }

    #[test]
    fn antipode_is_orthogonal_and_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = random_point(&mut rng);
            let q = p.antipode();
            assert!(p.overlap(&q).norm() < 1e-12);
            let back = q.antipode();
            assert_abs_diff_eq!(back.theta, p.theta, epsilon = 1e-12);
            let dphi = (back.phi - p.phi).rem_euclid(2.0 * PI);
            assert!(dphi < 1e-12 || 2.0 * PI - dphi < 1e-12);
        }
    }

    #[test]
    fn ghz4_points_on_equator() {
        let set = majorana_points(&SymmetricState::ghz(4).unwrap(), DEFAULT_CLUSTER_TOL);
        assert_eq!(set.degeneracy_profile(), vec![1, 1, 1, 1]);
        let mut phis: Vec<f64> = set.entries().iter().map(|e| e.point.phi).collect();
        phis.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (j, phi) in phis.iter().enumerate() {
            assert_abs_diff_eq!(*phi, PI / 4.0 * (2 * j + 1) as f64, epsilon = 1e-10);
        }
        for e in set.entries() {
            assert_abs_diff_eq!(e.point.theta, PI / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn w_and_product_points() {
        for n in 2..8 {
            let set = majorana_points(&SymmetricState::w(n).unwrap(), DEFAULT_CLUSTER_TOL);
            assert_eq!(set.degeneracy_profile(), vec![n - 1, 1]);
            let north = set.entries().iter().find(|e| e.point.theta == 0.0).unwrap();
            assert_eq!(north.multiplicity, n - 1);
            let south = set.entries().iter().find(|e| e.point.theta == PI).unwrap();
            assert_eq!(south.multiplicity, 1);
            let back = state_from_majorana(&set);
            assert!(back.fidelity(&SymmetricState::w(n).unwrap()) > 1.0 - 1e-14);

            let prod = majorana_points(&SymmetricState::dicke(n, 0).unwrap(), DEFAULT_CLUSTER_TOL);
            assert_eq!(prod.entries().len(), 1);
            assert_eq!(prod.entries()[0].multiplicity, n);
            assert_eq!(prod.entries()[0].point.theta, 0.0);
        }
    }

    #[test]
    fn state_from_points_examples() {
        let set = MajoranaSet::from_entries(vec![
            MajoranaPoint {
                point: BlochPoint::north(),
                multiplicity: 3,
            },
            MajoranaPoint {
                point: BlochPoint::south(),
                multiplicity: 1,
            },
        ])
        .unwrap();
        let s = state_from_majorana(&set);
        assert!(s.fidelity(&SymmetricState::w(4).unwrap()) > 1.0 - 1e-14);

        let square: Vec<BlochPoint> = (0..4)
            .map(|j| BlochPoint::new(PI / 2.0, PI / 4.0 * (2 * j + 1) as f64))
            .collect();
        let s = state_from_majorana(&MajoranaSet::from_points(&square, DEFAULT_CLUSTER_TOL));
        assert!(s.fidelity(&SymmetricState::ghz(4).unwrap()) > 1.0 - 1e-14);
    }

    #[test]
    fn degeneracy_examples() {
        let tol = DEFAULT_CLUSTER_TOL;
        let w4 = majorana_points(&SymmetricState::w(4).unwrap(), tol);
        assert_eq!(w4.degeneracy_profile(), vec![3, 1]);
        let zp = majorana_points(&SymmetricState::zzz_plus(), tol);
        assert_eq!(zp.degeneracy_profile(), vec![3, 1]);
        let t = majorana_points(&SymmetricState::tetrahedron(), tol);
        assert_eq!(t.degeneracy_profile(), vec![1, 1, 1, 1]);
        // tetrahedron vertices: pairwise chordal distance sqrt(8/3)
        let e = t.entries();
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_abs_diff_eq!(
                    e[i].point.chordal_distance(&e[j].point),
                    (8.0f64 / 3.0).sqrt(),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn round_trip_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=10 {
            for _ in 0..10 {
                let s = random_state(&mut rng, n);
                let back = state_from_majorana(&majorana_points(&s, DEFAULT_CLUSTER_TOL));
                assert!(back.fidelity(&s) >= 1.0 - 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn mobius_examples() {
        let one = c64(1.0, 0.0);
        let zero = c64(0.0, 0.0);
        let w4 = majorana_points(&SymmetricState::w(4).unwrap(), DEFAULT_CLUSTER_TOL);
        assert_eq!(w4.mobius(one, zero, zero, one).unwrap(), w4);
        let inv = w4.mobius(zero, one, one, zero).unwrap();
        let south = inv.entries().iter().find(|e| e.point.theta > 3.0).unwrap();
        assert_eq!(south.multiplicity, 3);
        let north = inv.entries().iter().find(|e| e.point.theta < 0.1).unwrap();
        assert_eq!(north.multiplicity, 1);
        assert_eq!(w4.mobius(one, one, one, one), Err(Error::ConstantMap));
    }

    #[test]
    fn mobius_preserves_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = || c64(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let set = MajoranaSet::from_entries(vec![
            MajoranaPoint {
                point: BlochPoint::new(0.3, 1.0),
                multiplicity: 3,
            },
            MajoranaPoint {
                point: BlochPoint::new(2.0, 4.0),
                multiplicity: 2,
            },
            MajoranaPoint {
                point: BlochPoint::south(),
                multiplicity: 1,
            },
        ])
        .unwrap();
        for _ in 0..50 {
            let mapped = set.mobius(g(), g(), g(), g()).unwrap();
            assert_eq!(mapped.degeneracy_profile(), vec![3, 2, 1]);
        }
    }

    #[test]
    fn collapse_examples() {
        let (amp, res) = collapse(&SymmetricState::ghz(3).unwrap(), &BlochPoint::north()).unwrap();
        assert_abs_diff_eq!(amp, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(res.fidelity(&SymmetricState::dicke(2, 0).unwrap()) > 1.0 - 1e-15);

        let (amp, res) = collapse(&SymmetricState::w(3).unwrap(), &BlochPoint::south()).unwrap();
        assert_abs_diff_eq!(amp, (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert!(res.fidelity(&SymmetricState::dicke(2, 0).unwrap()) > 1.0 - 1e-15);

        let (amp, res) =
            collapse(&SymmetricState::dicke(2, 1).unwrap(), &BlochPoint::north()).unwrap();
        assert_abs_diff_eq!(amp, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(res.fidelity(&SymmetricState::dicke(1, 1).unwrap()) > 1.0 - 1e-15);

        assert_eq!(
            collapse(&SymmetricState::dicke(3, 0).unwrap(), &BlochPoint::south()),
            Err(Error::ZeroProjection)
        );
    }

    #[test]
    fn collapse_keeps_degenerate_points() {
        // A point of multiplicity d survives any single-party projection with
        // multiplicity at least d - 1.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let eta = random_point(&mut rng);
            let others = [random_point(&mut rng), random_point(&mut rng)];
            let set = MajoranaSet::from_entries(vec![
                MajoranaPoint {
                    point: eta,
                    multiplicity: 3,
                },
                MajoranaPoint {
                    point: others[0],
                    multiplicity: 1,
                },
                MajoranaPoint {
                    point: others[1],
                    multiplicity: 1,
                },
            ])
            .unwrap();
            let psi = state_from_majorana(&set);
            let chi = random_point(&mut rng);
            let (_, res) = collapse(&psi, &chi).unwrap();
            // <eta_perp|^{n-1} annihilates the residual to second order
            let amp = product_overlap(&res, &eta.antipode()).norm();
            assert!(amp < 1e-12, "{amp}");
            let pts = majorana_points(&res, 1e-4);
            let near = pts
                .expanded()
                .iter()
                .filter(|p| p.chordal_distance(&eta) < 1e-4)
                .count();
            assert!(near >= 2, "{near}");
        }
    }

    #[test]
    fn overlap_examples() {
        for n in 2..8 {
            let g = SymmetricState::ghz(n).unwrap();
            assert_abs_diff_eq!(
                product_overlap(&g, &BlochPoint::north()).norm(),
                0.5f64.sqrt(),
                epsilon = 1e-15
            );
            let p = SymmetricState::dicke(n, 0).unwrap();
            assert_abs_diff_eq!(
                product_overlap(&p, &BlochPoint::north()).norm(),
                1.0,
                epsilon = 1e-15
            );
        }
        // |<eta|^3 W3>|^2 = 3 c^4 s^2 is maximal at s^2 = 1/3: 4/9.
        let w3 = SymmetricState::w(3).unwrap();
        let theta = 2.0 * (1.0f64 / 3.0).sqrt().asin();
        let v = product_overlap(&w3, &BlochPoint::new(theta, 0.7)).norm_sqr();
        assert_abs_diff_eq!(v, 4.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn overlap_matches_amplitude_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..7 {
            let s = random_state(&mut rng, n);
            let p = random_point(&mut rng);
            let k = p.ket();
            let amps = s.amplitudes();
            let brute: Complex64 = amps
                .iter()
                .enumerate()
                .map(|(x, a)| (0..n).fold(*a, |acc, i| acc * k[(x >> i) & 1].conj()))
                .sum();
            assert!((brute - product_overlap(&s, &p)).norm() < 1e-13);
        }
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("w:4".parse::<StateSpec>().unwrap(), StateSpec::W(4));
        assert_eq!(
            "dicke:6,3".parse::<StateSpec>().unwrap(),
            StateSpec::Dicke { n: 6, k: 3 }
        );
        assert_eq!(
            "tetra".parse::<StateSpec>().unwrap(),
            StateSpec::Tetrahedron
        );
        assert_eq!("000+".parse::<StateSpec>().unwrap(), StateSpec::ZzzPlus);
        match "raw:1,0.5-0.25i,-i".parse::<StateSpec>().unwrap() {
            StateSpec::Raw(c) => {
                assert_eq!(c, vec![c64(1.0, 0.0), c64(0.5, -0.25), c64(0.0, -1.0)]);
            }
            other => panic!("{other:?}"),
        }
        assert!("bogus:3".parse::<StateSpec>().is_err());
        assert!("w:x".parse::<StateSpec>().is_err());
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), c64(1e-3, 20.0));
    }
}
