//! Exponent ranges and exact admissibility checks.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Energy-critical exponent: `None` stands for `+∞` (`d ≤ 4`), otherwise `4/(d-4)`.
pub fn p_star(d: usize) -> Option<f64> {
    if d <= 4 {
        None
    } else {
        Some(4.0 / (d as f64 - 4.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentCheck {
    pub d: usize,
    pub p: f64,
    pub components: usize,
    pub p_star: Option<f64>,
    pub decay_ok: bool,
    pub scattering_ok: bool,
    /// `3 ≤ d ≤ 8`, where the decay and scattering statements are made.
    pub in_theory_range: bool,
}

impl ExponentCheck {
    /// `key=value` lines for machine consumption.
    pub fn to_key_values(&self) -> String {
        let p_star = self
            .p_star
            .map_or_else(|| "inf".to_string(), |v| format!("{v}"));
        format!(
            "d={}\np={}\nN={}\np_star={}\ndecay_ok={}\nscattering_ok={}\nin_theory_range={}\n",
            self.d,
            self.p,
            self.components,
            p_star,
            self.decay_ok,
            self.scattering_ok,
            self.in_theory_range
        )
    }
}

/// Never fails; flags are pure functions of `(d, p, N)`.
pub fn check_exponents(d: usize, p: f64, components: usize) -> ExponentCheck {
    let star = p_star(d);
    let below_star = star.is_none_or(|s| p < s);
    let coupled_ok = components <= 1 || p >= 1.0;
    let decay_ok = p > 0.0 && below_star && coupled_ok;
    let scattering_ok = p >= 1.0 && below_star && p * d as f64 > 4.0 && coupled_ok;
    ExponentCheck {
        d,
        p,
        components,
        p_star: star,
        decay_ok,
        scattering_ok,
        in_theory_range: (3..=8).contains(&d),
    }
}

/// Lebesgue exponent, finite rational or infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exponent {
    Finite(Rational),
    Infinite,
}

impl Exponent {
    pub fn int(v: i64) -> Self {
        Self::Finite(Rational::from_integer(v))
    }

    /// Reciprocal, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> Rational {
        match self {
            Self::Finite(v) => v.recip(),
            Self::Infinite => Rational::from_integer(0),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Finite(v) => *v.numer() as f64 / *v.denom() as f64,
            Self::Infinite => f64::INFINITY,
        }
    }

    fn at_least_two(&self) -> bool {
        match self {
            Self::Finite(v) => *v >= Rational::from_integer(2),
            Self::Infinite => true,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

/// Parses `inf`, integers, fractions `a/b` and finite decimals such as `1.25`, exactly.
impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::InvalidArgument(format!("cannot parse exponent {s:?}"));
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Self::Infinite);
        }
        if let Some((a, b)) = t.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            return Ok(Self::Finite(Rational::new(a, b)));
        }
        if let Some((int, frac)) = t.split_once('.') {
            if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
            let denom = 10i64.pow(frac.len() as u32);
            let frac_val: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            let numer = whole.abs() * denom + frac_val;
            let numer = if negative { -numer } else { numer };
            return Ok(Self::Finite(Rational::new(numer, denom)));
        }
        Ok(Self::Finite(Rational::from_integer(t.parse().map_err(|_| bad())?)))
    }
}

/// Exact test of `4/q + n/r = n/2` with `q, r ≥ 2`, excluding `(2, ∞, 4)`.
pub fn admissible_pair(q: Exponent, r: Exponent, n: usize) -> bool {
    if !q.at_least_two() || !r.at_least_two() {
        return false;
    }
    if q == Exponent::int(2) && r == Exponent::Infinite && n == 4 {
        return false;
    }
    let n = Rational::from_integer(n as i64);
    Rational::from_integer(4) * q.reciprocal() + n * r.reciprocal() == n / Rational::from_integer(2)
}

/// `(q, r) = (8(p+1)/(np), 2p+2)`, checked for admissibility.
pub fn pair_from_p(p: Rational, n: usize) -> Result<(Exponent, Exponent)> {
    if p <= Rational::from_integer(0) || n == 0 {
        return Err(Error::InvalidArgument(format!("need p > 0 and n ≥ 1, got p={p}, n={n}")));
    }
    let one = Rational::from_integer(1);
    let nr = Rational::from_integer(n as i64);
    let q = Exponent::Finite(Rational::from_integer(8) * (p + one) / (nr * p));
    let r = Exponent::Finite(Rational::from_integer(2) * (p + one));
    if !admissible_pair(q, r, n) {
        return Err(Error::InvalidArgument(format!(
            "pair ({q}, {r}) from p={p} is not admissible in dimension {n}"
        )));
    }
    Ok((q, r))
}

/// Best rational approximation of a configured floating-point `p`.
pub fn rational_from_f64(p: f64) -> Result<Rational> {
    Rational::approximate_float(p)
        .ok_or_else(|| Error::InvalidArgument(format!("cannot represent p={p} as a rational")))
}
