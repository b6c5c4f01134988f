//! The scalar field: exact rationals, truncated formal power series over the
//! rationals, and arbitrary-precision binary floats behind one abstraction.
//!
//! All downstream algebra (polynomials, rational functions, residues) is
//! written against [`Scalar`]. The three modes obey these mixing rules:
//!
//! - rational + rational stays rational (exact, no rounding);
//! - a rational meeting a series is promoted to a constant series; two series
//!   truncate to the smaller order `min(K1, K2)`;
//! - a rational meeting a float is promoted at the float's precision; two
//!   floats combine at the larger precision (precision never silently drops);
//! - series and float never mix; such an operation is a programming error and
//!   panics loudly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rug::float::Round;
use rug::ops::CompleteRound;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncated formal power series in one perturbation parameter with exact
/// rational coefficients. `coeffs[i]` is the coefficient of `t^i`; the vector
/// always has length `order + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub coeffs: Vec<BigRational>,
    pub order: usize,
}

impl Series {
    pub fn new(mut coeffs: Vec<BigRational>, order: usize) -> Self {
        coeffs.resize(order + 1, BigRational::zero());
        coeffs.truncate(order + 1);
        Series { coeffs, order }
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order + 1];
        coeffs[0] = c;
        Series { coeffs, order }
    }

    /// The parameter itself, `t`, at truncation order `order`.
    pub fn param(order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order + 1];
        if order >= 1 {
            coeffs[1] = BigRational::one();
        }
        Series { coeffs, order }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn truncate_to(&self, order: usize) -> Series {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, BigRational::zero());
        c.truncate(order + 1);
        Series { coeffs: c, order }
    }

    fn binop(a: &Series, b: &Series, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> Series {
        let order = a.order.min(b.order);
        let coeffs = (0..=order).map(|i| f(&a.coeffs[i], &b.coeffs[i])).collect();
        Series { coeffs, order }
    }

    fn mul(a: &Series, b: &Series) -> Series {
        let order = a.order.min(b.order);
        let mut coeffs = vec![BigRational::zero(); order + 1];
        for i in 0..=order {
            if a.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=order - i {
                if !b.coeffs[j].is_zero() {
                    coeffs[i + j] += &a.coeffs[i] * &b.coeffs[j];
                }
            }
        }
        Series { coeffs, order }
    }

    /// Multiplicative inverse; requires a unit (nonzero constant term).
    pub fn inv(&self) -> Series {
        assert!(
            !self.coeffs[0].is_zero(),
            "series inverse requires nonzero constant term"
        );
        let order = self.order;
        let mut inv = vec![BigRational::zero(); order + 1];
        inv[0] = self.coeffs[0].recip();
        for k in 1..=order {
            let mut acc = BigRational::zero();
            for i in 1..=k {
                acc += &self.coeffs[i] * &inv[k - i];
            }
            inv[k] = -acc * &inv[0];
        }
        Series { coeffs: inv, order }
    }

    /// Square root with rational constant term; the constant term must itself
    /// be a square of a rational.
    pub fn sqrt(&self) -> Option<Series> {
        let s0 = rational_sqrt(&self.coeffs[0])?;
        let order = self.order;
        let mut s = vec![BigRational::zero(); order + 1];
        s[0] = s0;
        let two_s0 = BigRational::from_integer(BigInt::from(2)) * &s[0];
        if two_s0.is_zero() {
            return self.is_zero().then(|| Series::constant(BigRational::zero(), order));
        }
        for k in 1..=order {
            let mut acc = self.coeffs[k].clone();
            for i in 1..k {
                acc -= &s[i] * &s[k - i];
            }
            s[k] = acc / &two_s0;
        }
        Some(Series { coeffs: s, order })
    }
}

/// Exact square root of a rational, if one exists.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Arbitrary-precision complex binary float carrying its working precision
/// in bits. Contour calculus and zero images of the extra polynomial are
/// genuinely complex, so the float mode is complex throughout; real results
/// surface as values with negligible imaginary part.
#[derive(Clone, Debug)]
pub struct BigFloat(pub rug::Complex);

impl BigFloat {
    pub fn with_prec(prec: u32, v: f64) -> Self {
        BigFloat(rug::Complex::with_val(prec, (v, 0.0)))
    }

    pub fn complex(prec: u32, re: f64, im: f64) -> Self {
        BigFloat(rug::Complex::with_val(prec, (re, im)))
    }

    pub fn from_rational(prec: u32, r: &BigRational) -> Self {
        let n = rug::Integer::from_str_radix(&r.numer().to_string(), 10).unwrap();
        let d = rug::Integer::from_str_radix(&r.denom().to_string(), 10).unwrap();
        let q = rug::Rational::from((n, d));
        BigFloat(rug::Complex::with_val(prec, rug::Float::with_val(prec, &q)))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec().0
    }

    pub fn re(&self) -> &rug::Float {
        self.0.real()
    }

    /// `|x| < 2^(-prec/2)`: the working tolerance for zero tests in float mode.
    pub fn is_negligible(&self) -> bool {
        if self.0.is_zero() {
            return true;
        }
        let p = self.prec();
        let tol = rug::Float::with_val(p, rug::Float::i_exp(1, -(p as i32) / 2));
        *self.0.clone().abs().real() < tol
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// A scalar in one of the three arithmetic modes.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rat(BigRational),
    Series(Series),
    Float(BigFloat),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(BigRational::one())
    }

    pub fn from_i64(n: i64) -> Self {
        Scalar::Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rat(num: i64, den: i64) -> Self {
        Scalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(r: BigRational) -> Self {
        Scalar::Rat(r)
    }

    pub fn float(prec: u32, v: f64) -> Self {
        Scalar::Float(BigFloat::with_prec(prec, v))
    }

    /// Exact zero test. In float mode this is a strict comparison with 0;
    /// use [`Scalar::is_negligible`] for tolerance-aware tests.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Series(s) => s.is_zero(),
            Scalar::Float(f) => f.0.is_zero(),
        }
    }

    /// Zero test at the mode's working tolerance: exact for rationals and
    /// series, `|x| < 2^(-P/2)` for floats.
    pub fn is_negligible(&self) -> bool {
        match self {
            Scalar::Float(f) => f.is_negligible(),
            _ => self.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Series(s) => s.coeffs[0].is_one() && s.coeffs[1..].iter().all(|c| c.is_zero()),
            Scalar::Float(f) => f.0 == 1,
        }
    }

    /// Constant (t^0 / exact) part as a rational, when the scalar is exact.
    pub fn constant_part(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::Series(s) => Some(&s.coeffs[0]),
            Scalar::Float(_) => None,
        }
    }

    pub fn as_rat(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(r) => Some(r),
            _ => None,
        }
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => {
                assert!(!r.is_zero(), "division by zero scalar");
                Scalar::Rat(r.recip())
            }
            Scalar::Series(s) => Scalar::Series(s.inv()),
            Scalar::Float(f) => {
                Scalar::Float(BigFloat(rug::Complex::with_val(f.prec(), f.0.clone().recip())))
            }
        }
    }

    pub fn sqrt(&self) -> Option<Scalar> {
        match self {
            Scalar::Rat(r) => rational_sqrt(r).map(Scalar::Rat),
            Scalar::Series(s) => s.sqrt().map(Scalar::Series),
            Scalar::Float(f) => Some(Scalar::Float(BigFloat(f.0.clone().sqrt()))),
        }
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Magnitude classification against the unit circle, used for pole
    /// placement. Series scalars are judged by their constant term (the
    /// deformation never moves a pole across the circle at finite truncation
    /// order).
    pub fn abs_cmp_one(&self) -> Ordering {
        match self {
            Scalar::Rat(r) => r.abs().cmp(&BigRational::one()),
            Scalar::Series(s) => s.coeffs[0].abs().cmp(&BigRational::one()),
            Scalar::Float(f) => {
                let a = f.0.clone().abs();
                let a = a.real();
                if *a == 1 {
                    Ordering::Equal
                } else if *a < 1 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    /// Approximate f64 value (constant term for series).
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Series(s) => s.coeffs[0].to_f64().unwrap_or(f64::NAN),
            Scalar::Float(f) => f.0.real().to_f64(),
        }
    }

    /// Convert to a float scalar at the given precision. Series refuse.
    pub fn to_float(&self, prec: u32) -> BigFloat {
        match self {
            Scalar::Rat(r) => BigFloat::from_rational(prec, r),
            Scalar::Float(f) => BigFloat(rug::Complex::with_val(prec, &f.0)),
            Scalar::Series(_) => panic!("cannot convert a series scalar to a float"),
        }
    }

    /// Evaluate a series scalar at a rational parameter value; identity on
    /// rationals (used by the series-consistency checks).
    pub fn eval_param(&self, t: &BigRational) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(r.clone()),
            Scalar::Series(s) => {
                let mut acc = BigRational::zero();
                for c in s.coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                Scalar::Rat(acc)
            }
            Scalar::Float(f) => Scalar::Float(f.clone()),
        }
    }

    fn promote(a: &Scalar, b: &Scalar) -> (Scalar, Scalar) {
        match (a, b) {
            (Scalar::Rat(_), Scalar::Rat(_))
            | (Scalar::Series(_), Scalar::Series(_))
            | (Scalar::Float(_), Scalar::Float(_)) => (a.clone(), b.clone()),
            (Scalar::Rat(r), Scalar::Series(s)) => (
                Scalar::Series(Series::constant(r.clone(), s.order)),
                b.clone(),
            ),
            (Scalar::Series(s), Scalar::Rat(r)) => (
                a.clone(),
                Scalar::Series(Series::constant(r.clone(), s.order)),
            ),
            (Scalar::Rat(r), Scalar::Float(f)) => {
                (Scalar::Float(BigFloat::from_rational(f.prec(), r)), b.clone())
            }
            (Scalar::Float(f), Scalar::Rat(r)) => {
                (a.clone(), Scalar::Float(BigFloat::from_rational(f.prec(), r)))
            }
            _ => panic!("incompatible scalar modes: series and float cannot mix"),
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $ratop:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let (a, b) = Scalar::promote(self, rhs);
                match (a, b) {
                    (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x $ratop y),
                    (Scalar::Series(x), Scalar::Series(y)) => {
                        Scalar::Series(scalar_binop!(@series $method, x, y))
                    }
                    (Scalar::Float(x), Scalar::Float(y)) => {
                        let prec = x.prec().max(y.prec());
                        Scalar::Float(BigFloat((&x.0 $ratop &y.0).complete((prec, prec))))
                    }
                    _ => unreachable!(),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
    (@series add, $x:ident, $y:ident) => { Series::binop(&$x, &$y, |a, b| a + b) };
    (@series sub, $x:ident, $y:ident) => { Series::binop(&$x, &$y, |a, b| a - b) };
    (@series mul, $x:ident, $y:ident) => { Series::mul(&$x, &$y) };
    (@series div, $x:ident, $y:ident) => { Series::mul(&$x, &$y.inv()) };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r.clone()),
            Scalar::Series(s) => Scalar::Series(Series {
                coeffs: s.coeffs.iter().map(|c| -c.clone()).collect(),
                order: s.order,
            }),
            Scalar::Float(f) => Scalar::Float(BigFloat(-f.0.clone())),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{}", r),
            Scalar::Series(s) => {
                let terms: Vec<String> = s
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| if i == 0 { format!("{}", c) } else { format!("({})*t^{}", c, i) })
                    .collect();
                if terms.is_empty() {
                    write!(f, "0 + O(t^{})", s.order + 1)
                } else {
                    write!(f, "{} + O(t^{})", terms.join(" + "), s.order + 1)
                }
            }
            Scalar::Float(x) => write!(f, "{}", x.0),
        }
    }
}

// ---- Serialization ----
//
// Exact rationals serialize as "p/q" strings; series as coefficient lists
// with explicit truncation order; floats as decimal strings with precision.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Rat(String),
    Series { series: Vec<String>, order: usize },
    Float { float: String, prec: u32 },
}

pub fn rat_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_from_string(s: &str) -> Result<BigRational, String> {
    let parse_int = |t: &str| t.trim().parse::<BigInt>().map_err(|e| e.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(BigRational::new(parse_int(n)?, den))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Scalar::Rat(r) => ScalarRepr::Rat(rat_to_string(r)),
            Scalar::Series(s) => ScalarRepr::Series {
                series: s.coeffs.iter().map(rat_to_string).collect(),
                order: s.order,
            },
            Scalar::Float(f) => ScalarRepr::Float {
                float: format!("{} {}", f.0.real().to_string_radix(10, None), f.0.imag().to_string_radix(10, None)),
                prec: f.prec(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ScalarRepr::deserialize(deserializer)?;
        match repr {
            ScalarRepr::Rat(s) => rat_from_string(&s).map(Scalar::Rat).map_err(serde::de::Error::custom),
            ScalarRepr::Series { series, order } => {
                let coeffs: Result<Vec<_>, _> = series.iter().map(|s| rat_from_string(s)).collect();
                Ok(Scalar::Series(Series::new(coeffs.map_err(serde::de::Error::custom)?, order)))
            }
            ScalarRepr::Float { float, prec } => {
                let (re, im) = float.split_once(' ').unwrap_or((float.as_str(), "0"));
                let re = rug::Float::parse(re).map_err(|e| serde::de::Error::custom(e.to_string()))?;
                let im = rug::Float::parse(im).map_err(|e| serde::de::Error::custom(e.to_string()))?;
                let re = rug::Float::with_val_round(prec, re, Round::Nearest).0;
                let im = rug::Float::with_val_round(prec, im, Round::Nearest).0;
                Ok(Scalar::Float(BigFloat(rug::Complex::with_val(prec, (re, im)))))
            }
        }
    }
}

impl Series {
    /// Re-truncate; useful when combining with lower-order data.
    pub fn with_order(&self, order: usize) -> Series {
        self.truncate_to(order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::rat(n, d)
    }

    #[test]
    fn rational_field_ops() {
        let a = q(1, 3);
        let b = q(2, 5);
        assert_eq!(&a + &b, q(11, 15));
        assert_eq!(&a * &b, q(2, 15));
        assert_eq!((&a / &b), q(5, 6));
        assert_eq!(&(&a + &b) * &q(15, 1), q(11, 1));
    }

    #[test]
    fn series_truncation_rule() {
        // (1+t)(1-t) at K=1 drops the t^2 term and stays 1.
        let one_plus = Scalar::Series(Series::new(
            vec![BigRational::one(), BigRational::one()],
            1,
        ));
        let one_minus = Scalar::Series(Series::new(
            vec![BigRational::one(), -BigRational::one()],
            1,
        ));
        let prod = &one_plus * &one_minus;
        assert!(prod.is_one());
    }

    #[test]
    fn series_mixed_orders_take_min() {
        let a = Scalar::Series(Series::param(5));
        let b = Scalar::Series(Series::param(3));
        match &a * &b {
            Scalar::Series(s) => assert_eq!(s.order, 3),
            _ => panic!("expected series"),
        }
    }

    #[test]
    fn series_inverse_and_sqrt() {
        // 1/(1-t) = 1 + t + t^2 + ...
        let s = Series::new(vec![BigRational::one(), -BigRational::one()], 4);
        let inv = s.inv();
        assert!(inv.coeffs.iter().all(|c| c.is_one()));
        // sqrt(1 - 12 t) starts 1 - 6t - 18t^2.
        let f = Series::new(
            vec![BigRational::one(), BigRational::from_integer((-12).into())],
            2,
        );
        let r = f.sqrt().unwrap();
        assert_eq!(r.coeffs[1], BigRational::from_integer((-6).into()));
        assert_eq!(r.coeffs[2], BigRational::from_integer((-18).into()));
    }

    #[test]
    fn series_eval_at_zero_matches_exact() {
        let s = Scalar::Series(Series::new(vec![BigRational::new(3.into(), 7.into())], 2));
        assert_eq!(s.eval_param(&BigRational::zero()), q(3, 7));
    }

    #[test]
    fn float_precision_never_drops() {
        let a = Scalar::float(128, 1.0);
        let b = Scalar::float(256, 3.0);
        match &a + &b {
            Scalar::Float(f) => assert_eq!(f.prec(), 256),
            _ => panic!(),
        }
    }

    #[test]
    fn float_rat_agreement() {
        let a = q(1, 3);
        let fa = a.to_float(192);
        let diff = (&Scalar::Float(fa) - &a).to_f64().abs();
        assert!(diff < 1e-50);
    }

    #[test]
    #[should_panic(expected = "incompatible scalar modes")]
    fn series_float_mix_panics() {
        let s = Scalar::Series(Series::param(2));
        let f = Scalar::float(64, 1.0);
        let _ = &s + &f;
    }

    #[test]
    fn scalar_serde_roundtrip() {
        let a = q(-22, 7);
        let js = serde_json::to_string(&a).unwrap();
        assert_eq!(js, "\"-22/7\"");
        let back: Scalar = serde_json::from_str(&js).unwrap();
        assert_eq!(back, a);
    }
}
