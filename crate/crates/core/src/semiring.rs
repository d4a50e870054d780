//! Idempotent semifields.
//!
//! | kind       | carrier            | ⊕   | ⊗ | 𝟘    | 𝟙 |
//! |------------|--------------------|-----|---|------|---|
//! | `MaxPlus`  | ℝ ∪ {−∞}           | max | + | −∞   | 0 |
//! | `MinPlus`  | ℝ ∪ {+∞}           | min | + | +∞   | 0 |
//! | `MaxTimes` | ℝ₊ ∪ {0}           | max | × | 0    | 1 |
//! | `MinTimes` | ℝ₊ ∪ {+∞}          | min | × | +∞   | 1 |
//!
//! The four kinds are isomorphic. Everything downstream computes in
//! `MaxPlus`; the other kinds are reached through [`TropicalScalar::convert`].
//!
//! The zero element is stored as a dedicated variant (`None` in the raw
//! representation), never as an IEEE infinity, so `𝟘 ⊗ x` cannot turn into
//! `−∞ + ∞`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemifieldKind {
    MaxPlus,
    MinPlus,
    MaxTimes,
    MinTimes,
}

impl SemifieldKind {
    pub const ALL: [SemifieldKind; 4] = [
        SemifieldKind::MaxPlus,
        SemifieldKind::MinPlus,
        SemifieldKind::MaxTimes,
        SemifieldKind::MinTimes,
    ];

    fn is_max(self) -> bool {
        matches!(self, SemifieldKind::MaxPlus | SemifieldKind::MaxTimes)
    }

    fn is_additive(self) -> bool {
        matches!(self, SemifieldKind::MaxPlus | SemifieldKind::MinPlus)
    }

    /// Finite representation of 𝟙.
    pub fn one_value(self) -> f64 {
        if self.is_additive() {
            0.0
        } else {
            1.0
        }
    }

    /// Whether `v` is a finite (non-𝟘) element of this carrier.
    pub fn admits(self, v: f64) -> bool {
        v.is_finite() && (self.is_additive() || v > 0.0)
    }

    /// ⊕ on raw elements (`None` is 𝟘).
    #[inline]
    pub fn add_raw(self, a: Option<f64>, b: Option<f64>) -> Option<f64> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => Some(if self.is_max() { x.max(y) } else { x.min(y) }),
        }
    }

    /// ⊗ on raw elements (`None` is 𝟘 and absorbs).
    #[inline]
    pub fn mul_raw(self, a: Option<f64>, b: Option<f64>) -> Option<f64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if self.is_additive() { x + y } else { x * y }),
            _ => None,
        }
    }

    /// `x^y` for a finite element `x`.
    pub fn pow_raw(self, x: f64, y: f64) -> f64 {
        if self.is_additive() {
            x * y
        } else {
            x.powf(y)
        }
    }

    /// `x^{1/m}` for a finite element `x`; exactly `x / m` in the additive kinds.
    pub fn root_raw(self, x: f64, m: u32) -> f64 {
        if self.is_additive() {
            x / f64::from(m)
        } else {
            x.powf(1.0 / f64::from(m))
        }
    }

    fn to_canonical(self, v: f64) -> f64 {
        match self {
            SemifieldKind::MaxPlus => v,
            SemifieldKind::MinPlus => -v,
            SemifieldKind::MaxTimes => v.ln(),
            SemifieldKind::MinTimes => -v.ln(),
        }
    }

    fn from_canonical(self, v: f64) -> f64 {
        match self {
            SemifieldKind::MaxPlus => v,
            SemifieldKind::MinPlus => -v,
            SemifieldKind::MaxTimes => v.exp(),
            SemifieldKind::MinTimes => (-v).exp(),
        }
    }

    /// Text token used for 𝟘.
    pub fn zero_token(self) -> &'static str {
        match self {
            SemifieldKind::MaxPlus => "-inf",
            SemifieldKind::MaxTimes => "0",
            SemifieldKind::MinPlus | SemifieldKind::MinTimes => "+inf",
        }
    }
}

/// An element of an idempotent semifield: either 𝟘 or a finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TropicalScalar {
    kind: SemifieldKind,
    value: Option<f64>,
}

impl TropicalScalar {
    pub fn new(kind: SemifieldKind, value: f64) -> Result<Self> {
        if !kind.admits(value) {
            return Err(Error::Domain { kind, value });
        }
        Ok(Self {
            kind,
            value: Some(value),
        })
    }

    pub fn zero(kind: SemifieldKind) -> Self {
        Self { kind, value: None }
    }

    pub fn one(kind: SemifieldKind) -> Self {
        Self {
            kind,
            value: Some(kind.one_value()),
        }
    }

    /// Max-plus element with finite value `v`.
    ///
    /// Panics if `v` is not finite; use [`TropicalScalar::zero`] for 𝟘.
    pub fn max_plus(v: f64) -> Self {
        assert!(v.is_finite(), "max-plus value must be finite, got {v}");
        Self {
            kind: SemifieldKind::MaxPlus,
            value: Some(v),
        }
    }

    pub(crate) fn from_raw(kind: SemifieldKind, value: Option<f64>) -> Self {
        Self { kind, value }
    }

    pub fn kind(&self) -> SemifieldKind {
        self.kind
    }

    /// Finite value, or `None` for 𝟘.
    pub fn value(&self) -> Option<f64> {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_none()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                left: self.kind,
                right: other.kind,
            });
        }
        Ok(())
    }

    pub fn oplus(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_raw(self.kind, self.kind.add_raw(self.value, other.value)))
    }

    pub fn otimes(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_raw(self.kind, self.kind.mul_raw(self.value, other.value)))
    }

    /// `x^{1/m}`, `m >= 1`.
    pub fn root(&self, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::UndefinedPower { exponent: f64::INFINITY });
        }
        Ok(Self::from_raw(self.kind, self.value.map(|x| self.kind.root_raw(x, m))))
    }

    /// `x^y`. 𝟘 raised to a positive power stays 𝟘; to a non-positive power it is undefined.
    pub fn power(&self, y: f64) -> Result<Self> {
        match self.value {
            None if y > 0.0 => Ok(*self),
            None => Err(Error::UndefinedPower { exponent: y }),
            Some(x) => Ok(Self::from_raw(self.kind, Some(self.kind.pow_raw(x, y)))),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        self.power(-1.0)
    }

    /// Maps through the isomorphism onto `target`.
    pub fn convert(&self, target: SemifieldKind) -> Result<Self> {
        match self.value {
            None => Ok(Self::zero(target)),
            Some(v) => {
                if !self.kind.admits(v) {
                    return Err(Error::Domain {
                        kind: self.kind,
                        value: v,
                    });
                }
                let canonical = self.kind.to_canonical(v);
                Ok(Self::from_raw(target, Some(target.from_canonical(canonical))))
            }
        }
    }

    /// Semiring order: `x ≤ y` iff `x ⊕ y = y`.
    pub fn semiring_cmp(&self, other: &Self) -> Result<Ordering> {
        self.check(other)?;
        let ord = match (self.value, other.value) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => {
                let natural = a.partial_cmp(&b).unwrap_or(Ordering::Equal);
                if self.kind.is_max() {
                    natural
                } else {
                    natural.reverse()
                }
            }
        };
        Ok(ord)
    }

    /// Parses a decimal or the kind's zero token.
    pub fn parse(kind: SemifieldKind, s: &str) -> Result<Self> {
        let t = s.trim();
        let zero_aliases: &[&str] = match kind {
            SemifieldKind::MaxPlus => &["-inf", "-infinity", "eps"],
            SemifieldKind::MinPlus | SemifieldKind::MinTimes => &["+inf", "inf", "infinity", "eps"],
            SemifieldKind::MaxTimes => &["0", "eps"],
        };
        if zero_aliases.iter().any(|z| t.eq_ignore_ascii_case(z)) {
            return Ok(Self::zero(kind));
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("not a {kind:?} scalar: {t:?}")))?;
        if kind == SemifieldKind::MaxTimes && v == 0.0 {
            return Ok(Self::zero(kind));
        }
        Self::new(kind, v)
    }
}

impl fmt::Display for TropicalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            None => f.write_str(self.kind.zero_token()),
            Some(v) => write!(f, "{v}"),
        }
    }
}
