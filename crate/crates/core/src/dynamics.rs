//! Closed-form rotations and skew products on the circle and torus.
//!
//! Every system evaluates `T^j x` in O(1) for any `j` and knows the exact
//! integral of its test functions against the invariant (Lebesgue or
//! counting) measure.
//!
//! Multiples `j·α mod 1` are computed exactly from the dyadic expansion of
//! the stored double, so large iterates lose no precision beyond the final
//! rounding.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::sum::ComplexNeumaier;

/// Reduce to `[0, 1)`, mapping a rounded-up `1.0` back to `0.0`.
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `frac(m·x)` for a double `x`, exact up to the final rounding.
pub fn frac_mul(x: f64, m: u128) -> f64 {
    let x = wrap(x);
    if x == 0.0 || m == 0 {
        return 0.0;
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let (mant, shift) = if exp_bits == 0 {
        (bits & ((1 << 52) - 1), 1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - exp_bits)
    };
    // x = mant · 2^(-shift) with shift >= 53 since x < 1
    let mant = mant as u128;
    if shift <= 128 {
        let prod = m.wrapping_mul(mant);
        let frac = if shift == 128 {
            prod
        } else {
            prod & ((1u128 << shift) - 1)
        };
        wrap(frac as f64 * 2f64.powi(-shift))
    } else {
        // x < 2^-75: the product stays far below 1 unless m is huge
        let mut t = (m as f64) * x;
        t -= t.floor();
        wrap(t)
    }
}

/// `e(t) = exp(2πi t)` for `t` already reduced mod 1.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t)
}

/// A rotation number with a record of how it was supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// Exact `p/q` in lowest terms with `0 <= p < q`.
    Rational { p: u64, q: u64 },
    /// `(√5 − 1)/2`
    Golden,
    /// `√2 − 1`
    Sqrt2Minus1,
    /// A raw double reduced mod 1; rationality unknown.
    Decimal(f64),
}

impl Alpha {
    pub fn rational(p: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("denominator must be nonzero".into()));
        }
        let r = p.rem_euclid(q as i64) as u64;
        let g = gcd(r, q);
        Ok(Alpha::Rational { p: r / g, q: q / g })
    }

    pub fn decimal(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite, got {x}")));
        }
        Ok(Alpha::Decimal(wrap(x)))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Alpha::Rational { p, q } => p as f64 / q as f64,
            Alpha::Golden => (5f64.sqrt() - 1.0) / 2.0,
            Alpha::Sqrt2Minus1 => 2f64.sqrt() - 1.0,
            Alpha::Decimal(x) => x,
        }
    }

    /// True only for the named irrationals. A decimal is a finite binary
    /// fraction and is never treated as irrational.
    pub fn is_irrational(&self) -> bool {
        matches!(self, Alpha::Golden | Alpha::Sqrt2Minus1)
    }

    /// `frac(m·α)`, exact for rationals.
    pub fn frac_mul(&self, m: u128) -> f64 {
        match *self {
            Alpha::Rational { p, q } => {
                let r = (m % q as u128) * p as u128 % q as u128;
                r as f64 / q as f64
            }
            _ => frac_mul(self.value(), m),
        }
    }

    /// `frac(m·α)` for a signed multiplier.
    pub fn frac_mul_signed(&self, m: i128) -> f64 {
        let t = self.frac_mul(m.unsigned_abs());
        if m < 0 && t != 0.0 {
            wrap(1.0 - t)
        } else {
            t
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Rational { p, q } => write!(f, "{p}/{q}"),
            Alpha::Golden => f.write_str("golden"),
            Alpha::Sqrt2Minus1 => f.write_str("sqrt2m1"),
            Alpha::Decimal(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// Accepts `p/q`, `golden`, `sqrt2m1`, or a decimal literal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "golden" => return Ok(Alpha::Golden),
            "sqrt2m1" => return Ok(Alpha::Sqrt2Minus1),
            _ => {}
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad numerator in {s:?}")))?;
            let q: u64 = q
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad denominator in {s:?}")))?;
            return Alpha::rational(p, q);
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::Domain(format!("alpha must be p/q, golden, sqrt2m1 or a decimal; got {s:?}")))?;
        Alpha::decimal(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Circle(f64),
    Cyclic(u64),
    Torus(Vec<f64>),
    Skew(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynSystem {
    /// `x ↦ x + α` on the circle.
    Circle(Alpha),
    /// `x ↦ x + 1 mod q` on `q` points.
    Cyclic(u64),
    /// Componentwise rotation on the d-torus.
    Torus(Vec<Alpha>),
    /// `(x, y) ↦ (x + α, y + x)` on the 2-torus.
    Skew(Alpha),
}

impl DynSystem {
    pub fn circle(alpha: Alpha) -> Self {
        DynSystem::Circle(alpha)
    }

    pub fn cyclic(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::Domain(format!("cyclic rotation needs q >= 2, got {q}")));
        }
        Ok(DynSystem::Cyclic(q))
    }

    pub fn torus(alphas: Vec<Alpha>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::Domain("torus rotation needs at least one angle".into()));
        }
        Ok(DynSystem::Torus(alphas))
    }

    pub fn skew(alpha: Alpha) -> Self {
        DynSystem::Skew(alpha)
    }

    /// Constructor-level flag; no detection is attempted.
    ///
    /// Rotations qualify when every angle is a named irrational and, on the
    /// torus, the named irrationals are distinct (golden and √2−1 are
    /// rationally independent together with 1). The skew product over an
    /// irrational rotation also qualifies. Cyclic systems never do.
    pub fn is_totally_uniquely_ergodic(&self) -> bool {
        match self {
            DynSystem::Circle(a) | DynSystem::Skew(a) => a.is_irrational(),
            DynSystem::Cyclic(_) => false,
            DynSystem::Torus(v) => {
                v.iter().all(Alpha::is_irrational) && v.iter().enumerate().all(|(i, a)| v[..i].iter().all(|b| b != a))
            }
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        let unit = |t: f64| (0.0..1.0).contains(&t);
        let ok = match (self, x) {
            (DynSystem::Circle(_), Point::Circle(t)) => unit(*t),
            (DynSystem::Cyclic(q), Point::Cyclic(i)) => i < q,
            (DynSystem::Torus(a), Point::Torus(v)) => a.len() == v.len() && v.iter().all(|&t| unit(t)),
            (DynSystem::Skew(_), Point::Skew(a, b)) => unit(*a) && unit(*b),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {x:?} does not belong to {self:?}")))
        }
    }

    /// A natural base point: the origin, or state 0.
    pub fn origin(&self) -> Point {
        match self {
            DynSystem::Circle(_) => Point::Circle(0.0),
            DynSystem::Cyclic(_) => Point::Cyclic(0),
            DynSystem::Torus(a) => Point::Torus(vec![0.0; a.len()]),
            DynSystem::Skew(_) => Point::Skew(0.0, 0.0),
        }
    }

    /// `T^j x` in closed form.
    pub fn iterate(&self, j: u64, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        let j128 = j as u128;
        Ok(match (self, x) {
            (DynSystem::Circle(a), Point::Circle(t)) => Point::Circle(wrap(t + a.frac_mul(j128))),
            (DynSystem::Cyclic(q), Point::Cyclic(i)) => Point::Cyclic(((*i as u128 + j128) % *q as u128) as u64),
            (DynSystem::Torus(a), Point::Torus(v)) => {
                Point::Torus(a.iter().zip(v).map(|(a, t)| wrap(t + a.frac_mul(j128))).collect())
            }
            (DynSystem::Skew(a), Point::Skew(x0, y0)) => {
                // T^j(x, y) = (x + jα, y + jx + j(j-1)/2·α)
                let tri = if j == 0 { 0 } else { j128 * (j128 - 1) / 2 };
                let x1 = wrap(x0 + a.frac_mul(j128));
                let y1 = wrap(wrap(y0 + frac_mul(*x0, j128)) + a.frac_mul(tri));
                Point::Skew(x1, y1)
            }
            _ => unreachable!("checked above"),
        })
    }

    /// One application of `T`, written out without the closed form.
    pub fn step(&self, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        Ok(match (self, x) {
            (DynSystem::Circle(a), Point::Circle(t)) => Point::Circle(wrap(t + a.value())),
            (DynSystem::Cyclic(q), Point::Cyclic(i)) => Point::Cyclic((i + 1) % q),
            (DynSystem::Torus(a), Point::Torus(v)) => {
                Point::Torus(a.iter().zip(v).map(|(a, t)| wrap(t + a.value())).collect())
            }
            (DynSystem::Skew(a), Point::Skew(x0, y0)) => Point::Skew(wrap(x0 + a.value()), wrap(y0 + x0)),
            _ => unreachable!("checked above"),
        })
    }

    /// `∫ f dμ` for the invariant measure.
    pub fn invariant_integral(&self, f: &TestFunction) -> Result<Complex64> {
        self.check_function(f)?;
        Ok(match f {
            TestFunction::Trig(h) => {
                if *h == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            TestFunction::TrigVec(h) => {
                if h.iter().all(|&c| c == 0) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            TestFunction::PointValues(v) => {
                let mut acc = ComplexNeumaier::new();
                for &z in v {
                    acc.add(z);
                }
                acc.value() / v.len() as f64
            }
        })
    }

    pub fn check_function(&self, f: &TestFunction) -> Result<()> {
        let ok = match (self, f) {
            (DynSystem::Circle(_), TestFunction::Trig(_)) => true,
            (DynSystem::Circle(_), TestFunction::TrigVec(h)) => h.len() == 1,
            (DynSystem::Torus(a), TestFunction::TrigVec(h)) => h.len() == a.len(),
            (DynSystem::Torus(a), TestFunction::Trig(_)) => a.len() == 1,
            (DynSystem::Skew(_), TestFunction::TrigVec(h)) => h.len() == 2,
            (DynSystem::Cyclic(q), TestFunction::PointValues(v)) => v.len() as u64 == *q,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("test function {f:?} is not defined on {self:?}")))
        }
    }

    /// `(1/J) Σ_{j=1..J} f(T^j x)`.
    pub fn birkhoff_average(&self, f: &TestFunction, x: &Point, big_j: u64) -> Result<Complex64> {
        if big_j == 0 {
            return Err(Error::Domain("birkhoff_average needs J >= 1".into()));
        }
        self.check_function(f)?;
        let mut acc = ComplexNeumaier::new();
        for j in 1..=big_j {
            acc.add(f.eval(&self.iterate(j, x)?)?);
        }
        Ok(acc.value() / big_j as f64)
    }

    /// Values `f(T^ω x)` for `ω = 0..len`.
    pub fn orbit_values(&self, f: &TestFunction, x: &Point, len: usize) -> Result<Vec<Complex64>> {
        self.check_function(f)?;
        (0..len as u64).map(|j| f.eval(&self.iterate(j, x)?)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `x ↦ e(hx)` on the circle.
    Trig(i64),
    /// `x ↦ e(h·x)` on a torus or skew product.
    TrigVec(Vec<i64>),
    /// Arbitrary values on the points of a cyclic system.
    PointValues(Vec<Complex64>),
}

impl TestFunction {
    pub fn eval(&self, x: &Point) -> Result<Complex64> {
        let dot = |h: &[i64], v: &[f64]| {
            let mut t = 0.0;
            for (&c, &xi) in h.iter().zip(v) {
                t = wrap(t + Alpha::Decimal(xi).frac_mul_signed(c as i128));
            }
            e(t)
        };
        match (self, x) {
            (TestFunction::Trig(h), Point::Circle(t)) => Ok(dot(&[*h], &[*t])),
            (TestFunction::Trig(h), Point::Torus(v)) if v.len() == 1 => Ok(dot(&[*h], v)),
            (TestFunction::TrigVec(h), Point::Circle(t)) if h.len() == 1 => Ok(dot(h, &[*t])),
            (TestFunction::TrigVec(h), Point::Torus(v)) if h.len() == v.len() => Ok(dot(h, v)),
            (TestFunction::TrigVec(h), Point::Skew(a, b)) if h.len() == 2 => Ok(dot(h, &[*a, *b])),
            (TestFunction::PointValues(v), Point::Cyclic(i)) if (*i as usize) < v.len() => Ok(v[*i as usize]),
            _ => Err(Error::Domain(format!(
                "test function {self:?} cannot be evaluated at {x:?}"
            ))),
        }
    }
}
