//! Text forms of expressions, settings sources, state families and ranges.

use std::str::FromStr;

use symbell::bell::BellExpression;
use symbell::measurement::SettingsProfile;
use symbell::symstate::{StateSpec, SymmetricState};
use symbell::{Error, Result};

/// `P`, `Q:d`, `L:k`, `L` (k taken from the state), `Pprime`, `Qprime:d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprName {
    P,
    Q(usize),
    L(Option<usize>),
    PPrime,
    QPrime(usize),
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: expected an integer, got '{s}'")))
}

impl FromStr for ExprName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b)),
            None => (s.trim(), None),
        };
        let need = || arg.ok_or_else(|| Error::Parse(format!("expression '{name}' needs ':d'")));
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("p", None) => Ok(ExprName::P),
            ("pprime" | "p'", None) => Ok(ExprName::PPrime),
            ("q", _) => Ok(ExprName::Q(parse_usize(need()?, "Q")?)),
            ("qprime" | "q'", _) => Ok(ExprName::QPrime(parse_usize(need()?, "Qprime")?)),
            ("l", None) => Ok(ExprName::L(None)),
            ("l", Some(k)) => Ok(ExprName::L(Some(parse_usize(k, "L")?))),
            _ => Err(Error::Parse(format!(
                "unknown expression '{s}' (expected P, Q:d, L:k, Pprime or Qprime:d)"
            ))),
        }
    }
}

impl ExprName {
    /// `state_k` supplies `k` for a bare `L`.
    pub fn build(&self, n: usize, state_k: Option<usize>) -> Result<BellExpression> {
        match *self {
            ExprName::P => BellExpression::p(n),
            ExprName::Q(d) => BellExpression::q(n, d),
            ExprName::L(Some(k)) => BellExpression::l(n, k),
            ExprName::L(None) => {
                let k = state_k.ok_or_else(|| {
                    Error::Parse("bare 'L' needs a Dicke or W state; write L:k".into())
                })?;
                BellExpression::l(n, k)
            }
            ExprName::PPrime => BellExpression::p_prime(n),
            ExprName::QPrime(d) => BellExpression::q_prime(n, d),
        }
    }
}

/// Excitation number of a Dicke-family spec.
pub fn dicke_k(spec: &StateSpec) -> Option<usize> {
    match spec {
        StateSpec::Dicke { k, .. } => Some(*k),
        StateSpec::W(_) => Some(1),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SettingsSource {
    Prescribe,
    /// Closed-form bases for W, GHZ or Dicke states.
    Analytic,
    Sigma,
    Optimize,
    /// One `[theta0, phi0, theta1, phi1]` group per party, or one group
    /// shared by all parties.
    Angles(Vec<[f64; 4]>),
}

impl FromStr for SettingsSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "prescribe" | "prescription" => return Ok(SettingsSource::Prescribe),
            "analytic" => return Ok(SettingsSource::Analytic),
            "sigma" => return Ok(SettingsSource::Sigma),
            "optimize" => return Ok(SettingsSource::Optimize),
            _ => {}
        }
        let body = lower
            .strip_prefix("angles:")
            .ok_or_else(|| Error::Parse(format!("unknown settings source '{s}'")))?;
        let groups = body
            .split(';')
            .map(|g| {
                let v = g
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("invalid angle '{x}'")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                <[f64; 4]>::try_from(v.as_slice())
                    .map_err(|_| Error::Parse(format!("angle group '{g}' needs 4 values")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SettingsSource::Angles(groups))
    }
}

impl SettingsSource {
    pub fn explicit(groups: &[[f64; 4]], n: usize) -> Result<SettingsProfile> {
        match groups.len() {
            1 => Ok(SettingsProfile::from_angles(&vec![groups[0]; n])),
            m if m == n => Ok(SettingsProfile::from_angles(groups)),
            m => Err(Error::DimensionMismatch {
                expected: n,
                got: m,
            }),
        }
    }
}

/// State family indexed by the number of parties, for `scan n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    W,
    Ghz,
    Dicke(usize),
    DickeHalf,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase();
        match t.as_str() {
            "w" => Ok(Family::W),
            "ghz" => Ok(Family::Ghz),
            "dicke:k=n/2" => Ok(Family::DickeHalf),
            _ => {
                let k = t.strip_prefix("dicke:k=").ok_or_else(|| {
                    Error::Parse(format!(
                        "unknown state family '{s}' (expected w, ghz, dicke:k=K or dicke:k=n/2)"
                    ))
                })?;
                Ok(Family::Dicke(parse_usize(k, "dicke family")?))
            }
        }
    }
}

impl Family {
    pub fn spec(&self, n: usize) -> StateSpec {
        match *self {
            Family::W => StateSpec::W(n),
            Family::Ghz => StateSpec::Ghz(n),
            Family::Dicke(k) => StateSpec::Dicke { n, k },
            Family::DickeHalf => StateSpec::Dicke { n, k: n / 2 },
        }
    }
}

/// Closed-form bases for the named families, when one applies.
pub fn analytic_settings(spec: &StateSpec, state: &SymmetricState) -> Result<SettingsProfile> {
    use symbell::prescription::{dicke_sigma_settings, ghz_settings, w_settings};
    let n = state.n();
    match spec {
        StateSpec::W(_) => Ok(w_settings(n)),
        StateSpec::Ghz(_) => Ok(ghz_settings(n)),
        StateSpec::Dicke { .. } => Ok(dicke_sigma_settings(n)),
        _ => Err(Error::InvalidParameter(format!(
            "no closed-form settings for state '{spec}'"
        ))),
    }
}

/// Inclusive range `a..b` or `a..=b`, or a single integer.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let (a, b) = (parse_usize(a, "range")?, parse_usize(b, "range")?);
    if a > b {
        return Err(Error::Parse(format!("empty range '{s}'")));
    }
    Ok((a, b))
}

/// Blocks written as `0,1|2|3`.
pub fn parse_groups(s: &str) -> Result<Vec<Vec<usize>>> {
    s.split('|')
        .map(|b| b.split(',').map(|p| parse_usize(p, "group")).collect())
        .collect()
}
