//! Scalar grades in the unit interval.
//!
//! Every algorithm in this crate only compares, takes minima and takes maxima
//! of grades; no arithmetic is ever performed. Any totally ordered scalar with
//! a least element `0` and a greatest element `1` therefore works, and the
//! [`Grade`] trait captures exactly that. [`Possibility`] is the default: an
//! exact decimal with at most nine fractional digits.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use ordered_float::OrderedFloat;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A membership grade drawn from a bounded chain `[0, 1]`.
pub trait Grade: Copy + Ord + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;

    /// Parses a textual grade, rejecting values outside `[0, 1]`.
    fn parse_grade(text: &str) -> Result<Self>;

    fn is_zero(self) -> bool {
        self == Self::zero()
    }
}

const SCALE: u32 = 1_000_000_000;
const MAX_FRACTION_DIGITS: usize = 9;

/// An exact possibility degree, stored as an integer count of 10⁻⁹ units.
///
/// Parsing is strict: plain decimal notation, no sign, no exponent and at most
/// nine fractional digits. Display always produces the shortest canonical
/// literal, so `parse(display(x)) == x` bit for bit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Possibility(u32);

impl Possibility {
    pub const ZERO: Possibility = Possibility(0);
    pub const ONE: Possibility = Possibility(SCALE);

    /// Builds a grade from a count of 10⁻⁹ units; `None` above one.
    pub const fn from_nanos(nanos: u32) -> Option<Self> {
        if nanos <= SCALE {
            Some(Possibility(nanos))
        } else {
            None
        }
    }

    pub const fn nanos(self) -> u32 {
        self.0
    }

    /// `k / 10` for `k` in `0..=10`; handy for the usual one-decimal grids.
    pub fn tenths(k: u32) -> Self {
        assert!(k <= 10, "tenths out of range: {k}");
        Possibility(k * (SCALE / 10))
    }
}

fn invalid(text: &str, reason: &'static str) -> Error {
    Error::InvalidGrade {
        text: text.to_string(),
        reason,
    }
}

/// Splits a plain decimal literal into integer digits and fractional digits.
fn split_decimal(text: &str) -> Result<(&str, &str)> {
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => {
            if f.is_empty() {
                return Err(invalid(text, "missing fractional digits"));
            }
            (i, f)
        }
        None => (text, ""),
    };
    if int.is_empty() {
        return Err(invalid(text, "missing integer digits"));
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(invalid(text, "expected a plain decimal literal"));
    }
    Ok((int, frac))
}

impl FromStr for Possibility {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let (int, frac) = split_decimal(trimmed)?;
        if frac.len() > MAX_FRACTION_DIGITS {
            return Err(invalid(trimmed, "more than 9 fractional digits"));
        }
        let int = int.trim_start_matches('0');
        let whole: u64 = match int {
            "" => 0,
            "1" => 1,
            _ => return Err(invalid(trimmed, "value exceeds 1")),
        };
        let mut frac_nanos: u64 = 0;
        for (k, b) in frac.bytes().enumerate() {
            frac_nanos += u64::from(b - b'0') * 10u64.pow((MAX_FRACTION_DIGITS - 1 - k) as u32);
        }
        let total = whole * u64::from(SCALE) + frac_nanos;
        if total > u64::from(SCALE) {
            return Err(invalid(trimmed, "value exceeds 1"));
        }
        Ok(Possibility(total as u32))
    }
}

impl fmt::Display for Possibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / SCALE;
        let frac = self.0 % SCALE;
        if frac == 0 {
            return write!(f, "{whole}");
        }
        let digits = format!("{frac:09}");
        write!(f, "{whole}.{}", digits.trim_end_matches('0'))
    }
}

impl fmt::Debug for Possibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Grade for Possibility {
    fn zero() -> Self {
        Possibility::ZERO
    }

    fn one() -> Self {
        Possibility::ONE
    }

    fn parse_grade(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl Serialize for Possibility {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Possibility {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact rational grades; accepts `p/q` or plain decimal literals.
impl Grade for Ratio<i64> {
    fn zero() -> Self {
        <Ratio<i64> as Zero>::zero()
    }

    fn one() -> Self {
        <Ratio<i64> as One>::one()
    }

    fn parse_grade(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let value = if let Some((num, den)) = trimmed.split_once('/') {
            let num: i64 = num
                .trim()
                .parse()
                .map_err(|_| invalid(trimmed, "bad numerator"))?;
            let den: i64 = den
                .trim()
                .parse()
                .map_err(|_| invalid(trimmed, "bad denominator"))?;
            if den == 0 {
                return Err(invalid(trimmed, "zero denominator"));
            }
            Ratio::new(num, den)
        } else {
            let (int, frac) = split_decimal(trimmed)?;
            if frac.len() > 18 {
                return Err(invalid(trimmed, "more than 18 fractional digits"));
            }
            let digits = format!("{int}{frac}");
            let num: i64 = digits
                .parse()
                .map_err(|_| invalid(trimmed, "value exceeds 1"))?;
            Ratio::new(num, 10i64.pow(frac.len() as u32))
        };
        if value < <Ratio<i64> as Zero>::zero() || value > <Ratio<i64> as One>::one() {
            return Err(invalid(trimmed, "value outside [0, 1]"));
        }
        Ok(value)
    }
}

macro_rules! float_grade {
    ($t:ty) => {
        /// Floating-point grades. Exact under min/max, so no tolerance is needed.
        impl Grade for OrderedFloat<$t> {
            fn zero() -> Self {
                OrderedFloat(<$t as Zero>::zero())
            }

            fn one() -> Self {
                OrderedFloat(<$t as One>::one())
            }

            fn parse_grade(text: &str) -> Result<Self> {
                let trimmed = text.trim();
                let value: $t = trimmed
                    .parse()
                    .map_err(|_| invalid(trimmed, "not a number"))?;
                if !(0.0..=1.0).contains(&value) {
                    return Err(invalid(trimmed, "value outside [0, 1]"));
                }
                Ok(OrderedFloat(value))
            }
        }
    };
}

float_grade!(f32);
float_grade!(f64);
