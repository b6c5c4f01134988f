//! Dense univariate polynomials over [`Scalar`].
//!
//! Coefficients are stored in ascending degree order; the representation is
//! canonical (empty vector for zero, nonzero leading coefficient otherwise).
//! The variable tag is carried alongside and checked on binary operations.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Identifier of a formal variable. By convention `Var(0)` is the active
/// integration variable and `Var(i)` for `i >= 1` are marked points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(pub u16);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub var: Var,
    coeffs: Vec<Scalar>,
}

impl Poly {
    fn normalize(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn zero(var: Var) -> Self {
        Poly { var, coeffs: Vec::new() }
    }

    pub fn one(var: Var) -> Self {
        Poly { var, coeffs: vec![Scalar::one()] }
    }

    pub fn constant(var: Var, c: Scalar) -> Self {
        let mut p = Poly { var, coeffs: vec![c] };
        p.normalize();
        p
    }

    /// The monomial `c * z^deg`.
    pub fn monomial(var: Var, c: Scalar, deg: usize) -> Self {
        if c.is_zero() {
            return Self::zero(var);
        }
        let mut coeffs = vec![Scalar::zero(); deg + 1];
        coeffs[deg] = c;
        Poly { var, coeffs }
    }

    pub fn ident(var: Var) -> Self {
        Poly::monomial(var, Scalar::one(), 1)
    }

    /// `z - root`.
    pub fn linear_root(var: Var, root: &Scalar) -> Self {
        Poly::from_coeffs(var, vec![-root, Scalar::one()])
    }

    pub fn from_coeffs(var: Var, coeffs: Vec<Scalar>) -> Self {
        let mut p = Poly { var, coeffs };
        p.normalize();
        p
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero(self.var);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| &Scalar::from_i64(i as i64) * c)
            .collect();
        Poly::from_coeffs(self.var, coeffs)
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        Poly::from_coeffs(self.var, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    /// Euclidean division; panics on division by zero.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert_eq!(self.var, d.var, "variable mismatch in division");
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let lead_inv = d.leading().unwrap().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() < dd + 1 {
            return (Poly::zero(self.var), self.clone());
        }
        let qn = rem.len() - dd;
        let mut quot = vec![Scalar::zero(); qn];
        for i in (0..qn).rev() {
            let c = &rem[i + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                let t = &c * dc;
                rem[i + j] = &rem[i + j] - &t;
            }
            quot[i] = c;
        }
        (Poly::from_coeffs(self.var, quot), Poly::from_coeffs(self.var, rem))
    }

    /// Exact division: `Some(q)` iff `self = q * d` exactly.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Monic gcd via the Euclidean algorithm over the scalar field.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(self.var);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `x -> x + shift` (Taylor shift), used for local expansions.
    pub fn shift(&self, shift: &Scalar) -> Poly {
        let mut acc = Poly::zero(self.var);
        let lin = Poly::from_coeffs(self.var, vec![shift.clone(), Scalar::one()]);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Poly::constant(self.var, c.clone());
        }
        acc
    }

    /// Coefficients of the reciprocal power series `1/self` at `x = 0` up to
    /// `x^order`; requires a nonzero constant term.
    pub fn recip_series(&self, order: usize) -> Vec<Scalar> {
        let c0 = self.coeff(0);
        assert!(!c0.is_zero(), "reciprocal series needs nonzero constant term");
        let c0i = c0.recip();
        let mut out = vec![Scalar::zero(); order + 1];
        out[0] = c0i.clone();
        for k in 1..=order {
            let mut acc = Scalar::zero();
            for i in 1..=k {
                let ci = self.coeff(i);
                if !ci.is_zero() {
                    acc = &acc + &(&ci * &out[k - i]);
                }
            }
            out[k] = -(&acc * &c0i);
        }
        out
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.var, rhs.var, "variable mismatch");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect();
        Poly::from_coeffs(self.var, coeffs)
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.var, rhs.var, "variable mismatch");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect();
        Poly::from_coeffs(self.var, coeffs)
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.var, rhs.var, "variable mismatch");
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(self.var);
        }
        let mut coeffs = vec![Scalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                }
            }
        }
        Poly::from_coeffs(self.var, coeffs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.var, self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! poly_owned_ops {
    ($($trait:ident, $method:ident);*) => {$(
        impl $trait<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly { (&self).$method(&rhs) }
        }
        impl $trait<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly { (&self).$method(rhs) }
        }
        impl $trait<Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly { self.$method(&rhs) }
        }
    )*};
}

poly_owned_ops!(Add, add; Sub, sub; Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{}", c),
                1 => format!("({})*{}", c, self.var),
                _ => format!("({})*{}^{}", c, self.var, i),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z: Var = Var(0);

    fn p(coeffs: &[i64]) -> Poly {
        Poly::from_coeffs(Z, coeffs.iter().map(|&c| Scalar::from_i64(c)).collect())
    }

    #[test]
    fn degree_tracks_last_nonzero() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert_eq!(p(&[0]).degree(), None);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[2, 0, 1, 3]);
        let b = p(&[1, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn gcd_of_shared_factor() {
        let shared = p(&[-1, 1]); // z - 1
        let a = &shared * &p(&[3, 1]);
        let b = &shared * &p(&[5, 0, 1]);
        assert_eq!(a.gcd(&b), shared);
    }

    #[test]
    fn shift_evaluates_consistently() {
        let a = p(&[1, -4, 0, 2]);
        let s = Scalar::from_i64(3);
        let shifted = a.shift(&s);
        let x = Scalar::rat(7, 2);
        assert_eq!(shifted.eval(&x), a.eval(&(&x + &s)));
    }

    #[test]
    fn recip_series_inverts() {
        let a = p(&[1, 2, 3]);
        let inv = a.recip_series(5);
        // product of a with its reciprocal series is 1 + O(x^6)
        let mut conv = vec![Scalar::zero(); 6];
        for k in 0..6 {
            for i in 0..=k {
                conv[k] = &conv[k] + &(&a.coeff(i) * &inv[k - i]);
            }
        }
        assert!(conv[0].is_one());
        assert!(conv[1..].iter().all(|c| c.is_zero()));
    }
}
