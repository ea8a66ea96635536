//! Parameter types shared by the solvers: branch labels, the boundary
//! parameter γ and the fiber triple `(b, γ, ξ)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Label `(±, n)` of a dispersion curve; `n >= 1`.
///
/// Ordering puts all negative branches before positive ones, each by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    pub sign: Sign,
    pub n: u32,
}

impl Branch {
    pub fn new(sign: Sign, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("branch index must be >= 1".into()));
        }
        Ok(Self { sign, n })
    }

    pub fn plus(n: u32) -> Self {
        Self::new(Sign::Plus, n).expect("n >= 1")
    }

    pub fn minus(n: u32) -> Self {
        Self::new(Sign::Minus, n).expect("n >= 1")
    }

    /// Signed index `j` of the curve `λ_j` (positive for `+`, negative for `-`).
    pub fn signed_index(self) -> i64 {
        match self.sign {
            Sign::Plus => self.n as i64,
            Sign::Minus => -(self.n as i64),
        }
    }

    pub fn flip(self) -> Self {
        Self {
            sign: self.sign.flip(),
            n: self.n,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sign, self.n)
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'+') => (Sign::Plus, &s[1..]),
            Some(b'-') => (Sign::Minus, &s[1..]),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "branch `{s}` must start with + or -"
                )))
            }
        };
        let n: u32 = rest
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad branch index in `{s}`")))?;
        Branch::new(sign, n)
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Branch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Boundary parameter γ ∈ ℝ ∪ {+∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Finite(f64),
    Infinite,
}

/// |γ| at or below this is dispatched as the γ = 0 zigzag case.
pub const ZIGZAG_ZERO: f64 = 1e-12;
/// |γ| at or above this is dispatched as the γ = +∞ zigzag case.
pub const ZIGZAG_INF: f64 = 1e12;

impl Gamma {
    pub fn finite(g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be finite, got {g}")));
        }
        Ok(Gamma::Finite(g))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Gamma::Infinite)
    }

    /// Finite value, if any.
    pub fn value(self) -> Option<f64> {
        match self {
            Gamma::Finite(g) => Some(g),
            Gamma::Infinite => None,
        }
    }

    /// Snap near-zero and huge values onto the zigzag cases.
    pub fn clamped(self) -> Self {
        match self {
            Gamma::Finite(g) if g.abs() <= ZIGZAG_ZERO => Gamma::Finite(0.0),
            Gamma::Finite(g) if g.abs() >= ZIGZAG_INF => Gamma::Infinite,
            other => other,
        }
    }

    pub fn is_zigzag(self) -> bool {
        matches!(self.clamped(), Gamma::Infinite | Gamma::Finite(0.0))
    }

    /// γ ↦ γ⁻¹ with 0 and +∞ exchanged.
    pub fn inverse(self) -> Self {
        match self.clamped() {
            Gamma::Infinite => Gamma::Finite(0.0),
            Gamma::Finite(g) if g == 0.0 => Gamma::Infinite,
            Gamma::Finite(g) => Gamma::Finite(1.0 / g),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Finite(g) => write!(f, "{g}"),
            Gamma::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Gamma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" | "∞" => Ok(Gamma::Infinite),
            _ => {
                let g: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("cannot parse gamma `{s}`")))?;
                if g == f64::INFINITY {
                    Ok(Gamma::Infinite)
                } else {
                    Gamma::finite(g)
                }
            }
        }
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gamma::Finite(g) => s.serialize_f64(*g),
            Gamma::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(g) => Gamma::finite(g).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// γ from the angle η of the general local boundary condition,
/// `γ = cos η / (1 + sin η)`, with η = −π/2 mapped to +∞.
pub fn gamma_from_eta(eta: f64) -> Result<Gamma> {
    use std::f64::consts::{FRAC_PI_2, PI};
    if !(eta.is_finite() && (-FRAC_PI_2..1.5 * PI).contains(&eta)) {
        return Err(Error::InvalidParameter(format!(
            "eta must lie in [-pi/2, 3pi/2), got {eta}"
        )));
    }
    if eta == -FRAC_PI_2 {
        return Ok(Gamma::Infinite);
    }
    Ok(Gamma::Finite(eta.cos() / (1.0 + eta.sin())).clamped())
}

/// One fiber problem `D_{γ,ξ}(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberParams {
    pub b: f64,
    pub gamma: Gamma,
    pub xi: f64,
}

impl FiberParams {
    pub fn new(b: f64, gamma: Gamma, xi: f64) -> Result<Self> {
        if !(b.is_finite() && b != 0.0) {
            return Err(Error::InvalidParameter(format!("b must be finite and nonzero, got {b}")));
        }
        if !xi.is_finite() {
            return Err(Error::InvalidParameter(format!("xi must be finite, got {xi}")));
        }
        if let Gamma::Finite(g) = gamma {
            if !g.is_finite() {
                return Err(Error::InvalidParameter(format!("bad gamma {g}")));
            }
        }
        Ok(Self { b, gamma, xi })
    }

    /// Canonical means `b > 0` and `γ ∈ [0, +∞]`.
    pub fn is_canonical(&self) -> bool {
        self.b > 0.0
            && match self.gamma {
                Gamma::Infinite => true,
                Gamma::Finite(g) => g >= 0.0,
            }
    }
}
