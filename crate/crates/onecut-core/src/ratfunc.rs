//! Univariate rational functions with factored denominators.
//!
//! The denominator is kept as a list of monic factors with positive
//! exponents; the canonical form has every factor coprime to the numerator.
//! All residue and Laurent machinery lives here. In float mode the gcd-based
//! cancellation is skipped (it is numerically meaningless) and pole orders
//! are decided with the `2^(-P/2)` tolerance instead.

use crate::poly::{Poly, Var};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatFunc {
    pub num: Poly,
    /// Monic factors with positive exponents.
    pub den: Vec<(Poly, u32)>,
}

/// Location of a Laurent/residue expansion.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Finite(Scalar),
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatFuncError {
    DivisionByZero,
    NonLinearFactor(String),
    VariableMismatch,
}

impl fmt::Display for RatFuncError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatFuncError::DivisionByZero => write!(f, "division by the zero function"),
            RatFuncError::NonLinearFactor(p) => write!(
                f,
                "denominator factor {} is not linear over the working field; \
                 factor it or switch to numeric mode",
                p
            ),
            RatFuncError::VariableMismatch => write!(f, "operands use different variables"),
        }
    }
}

impl std::error::Error for RatFuncError {}

fn is_float_mode(p: &Poly) -> bool {
    p.coeffs().iter().any(|c| matches!(c, Scalar::Float(_)))
}

impl RatFunc {
    pub fn zero(var: Var) -> Self {
        RatFunc { num: Poly::zero(var), den: Vec::new() }
    }

    pub fn one(var: Var) -> Self {
        RatFunc { num: Poly::one(var), den: Vec::new() }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Vec::new() }
    }

    pub fn constant(var: Var, c: Scalar) -> Self {
        RatFunc::from_poly(Poly::constant(var, c))
    }

    /// `num / prod(factors^exp)`; factors need not be monic.
    pub fn new(num: Poly, den: Vec<(Poly, u32)>) -> Self {
        let mut f = RatFunc { num, den };
        f.canonicalize();
        f
    }

    pub fn var(&self) -> Var {
        self.num.var
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Expanded denominator polynomial.
    pub fn den_poly(&self) -> Poly {
        let mut d = Poly::one(self.var());
        for (f, e) in &self.den {
            d = &d * &f.pow(*e);
        }
        d
    }

    /// Canonical form: monic factors, scalars absorbed into the numerator,
    /// equal factors merged, numerator coprime to every factor (exact modes).
    pub fn canonicalize(&mut self) {
        let var = self.var();
        // Absorb factor leading coefficients, drop constants, split merged roots.
        let mut units = Scalar::one();
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        for (f, e) in self.den.drain(..) {
            if f.is_zero() {
                panic!("zero factor in denominator");
            }
            match f.degree() {
                None | Some(0) => {
                    units = &units * &f.coeff(0).pow(e);
                }
                _ => {
                    let lead = f.leading().unwrap().clone();
                    units = &units * &lead.pow(e);
                    factors.push((f.monic(), e));
                }
            }
        }
        self.num = self.num.scale(&units.recip());

        if self.num.is_zero() {
            self.den = Vec::new();
            return;
        }

        let float_mode = is_float_mode(&self.num) || factors.iter().any(|(f, _)| is_float_mode(f));
        let rat_mode = !float_mode
            && self.num.coeffs().iter().all(|c| matches!(c, Scalar::Rat(_)))
            && factors
                .iter()
                .all(|(f, _)| f.coeffs().iter().all(|c| matches!(c, Scalar::Rat(_))));

        // Cancel common content between numerator and factors. Linear factors
        // cancel by root evaluation (safe in every exact mode); higher-degree
        // factors use the Euclidean gcd, which needs a coefficient field and
        // is therefore restricted to pure-rational data.
        if !float_mode {
            let mut work = factors;
            factors = Vec::new();
            while let Some((f, mut e)) = work.pop() {
                if f.degree() == Some(1) {
                    let root = -f.coeff(0);
                    while e > 0 && self.num.eval(&root).is_zero() {
                        match self.num.exact_div_or_deflate(&root) {
                            Some(q) => {
                                self.num = q;
                                e -= 1;
                            }
                            None => break,
                        }
                    }
                    if e > 0 {
                        factors.push((f, e));
                    }
                    continue;
                }
                if !rat_mode {
                    factors.push((f, e));
                    continue;
                }
                let g = self.num.gcd(&f);
                if g.degree().map_or(true, |d| d == 0) {
                    factors.push((f, e));
                    continue;
                }
                if g == f {
                    while e > 0 {
                        match self.num.exact_div(&f) {
                            Some(q) => {
                                self.num = q;
                                e -= 1;
                            }
                            None => break,
                        }
                    }
                    if e > 0 {
                        factors.push((f, e));
                    }
                } else {
                    // Partial overlap: split the factor and retry both parts.
                    let rest = f.exact_div(&g).expect("gcd divides factor");
                    work.push((g, e));
                    work.push((rest, e));
                }
            }
        }

        // Merge equal factors and order deterministically.
        factors.sort_by(|a, b| poly_key(&a.0).cmp(&poly_key(&b.0)));
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (f, e) in factors {
            if let Some(last) = merged.last_mut() {
                if last.0 == f {
                    last.1 += e;
                    continue;
                }
            }
            merged.push((f, e));
        }
        let _ = var;
        self.den = merged;
    }

    /// Decidable equality by cross-multiplication (exact modes).
    pub fn equals(&self, other: &RatFunc) -> bool {
        &self.num * &other.den_poly() == &other.num * &self.den_poly()
    }

    pub fn recip(&self) -> Result<RatFunc, RatFuncError> {
        if self.is_zero() {
            return Err(RatFuncError::DivisionByZero);
        }
        Ok(RatFunc::new(self.den_poly(), vec![(self.num.clone(), 1)]))
    }

    pub fn div(&self, rhs: &RatFunc) -> Result<RatFunc, RatFuncError> {
        if self.var() != rhs.var() {
            return Err(RatFuncError::VariableMismatch);
        }
        Ok(self * &rhs.recip()?)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut d = Scalar::one();
        for (f, e) in &self.den {
            d = &d * &f.eval(x).pow(*e);
        }
        assert!(!d.is_zero(), "evaluation at a pole");
        &self.num.eval(x) / &d
    }

    pub fn derivative(&self) -> RatFunc {
        // d(N / prod F^e) = [N' prod F - N sum e F' prod_{j != i} F] / prod F^{e+1}
        let var = self.var();
        if self.den.is_empty() {
            return RatFunc::from_poly(self.num.derivative());
        }
        let mut prod_all = Poly::one(var);
        for (f, _) in &self.den {
            prod_all = &prod_all * f;
        }
        let mut num = &self.num.derivative() * &prod_all;
        for (i, (f, e)) in self.den.iter().enumerate() {
            let mut rest = Poly::one(var);
            for (j, (g, _)) in self.den.iter().enumerate() {
                if i != j {
                    rest = &rest * g;
                }
            }
            let term = &(&self.num * &f.derivative()).scale(&Scalar::from_i64(*e as i64)) * &rest;
            num = &num - &term;
        }
        let den = self.den.iter().map(|(f, e)| (f.clone(), e + 1)).collect();
        RatFunc::new(num, den)
    }

    /// Order of the pole at `a` declared by the denominator (0 if no factor
    /// vanishes there) together with the denominator with that linear part
    /// removed. A numerator zero at `a` is handled downstream: the Laurent
    /// coefficients simply come out with leading zeros.
    fn pole_order_at(&self, a: &Scalar) -> (u32, Poly) {
        let var = self.var();
        let mut order = 0u32;
        let mut rest = Poly::one(var);
        for (f, e) in &self.den {
            let mut g = f.clone();
            let mut local = 0u32;
            while g.degree().is_some() && g.eval(a).is_negligible() {
                match g.exact_div_or_deflate(a) {
                    Some(q) => {
                        g = q;
                        local += 1;
                    }
                    None => break,
                }
            }
            order += local * e;
            rest = &rest * &g.pow(*e);
        }
        (order, rest)
    }

    /// Laurent coefficients at a finite point `a`: coefficients of
    /// `(z-a)^j` for `j = -m ..= max_order` where `m` is the pole order.
    /// Returns `(m, coeffs)` with `coeffs[i]` the coefficient of
    /// `(z-a)^(i - m)`.
    pub fn laurent_at(&self, a: &Scalar, max_order: i64) -> (u32, Vec<Scalar>) {
        let (m, rest) = self.pole_order_at(a);
        let n_terms = (max_order + m as i64 + 1).max(0) as usize;
        if n_terms == 0 {
            return (m, Vec::new());
        }
        let num_s = self.num.shift(a);
        let den_s = rest.shift(a);
        let inv = den_s.recip_series(n_terms.saturating_sub(1));
        let mut out = vec![Scalar::zero(); n_terms];
        for k in 0..n_terms {
            let mut acc = Scalar::zero();
            for i in 0..=k {
                let c = num_s.coeff(i);
                if !c.is_zero() {
                    acc = &acc + &(&c * &inv[k - i]);
                }
            }
            out[k] = acc;
        }
        (m, out)
    }

    /// Residue at a finite point or at infinity. Returns zero when the point
    /// is not actually a pole.
    pub fn residue_at(&self, point: &Point) -> Scalar {
        match point {
            Point::Finite(a) => {
                let (m, coeffs) = self.laurent_at(a, -1);
                if m == 0 {
                    return Scalar::zero();
                }
                coeffs.get((m - 1) as usize).cloned().unwrap_or_else(Scalar::zero)
            }
            Point::Infinity => {
                // Res_inf = -(coefficient of 1/z).
                let c = self.laurent_at_infinity(1);
                -c.coeff_of_inv_power(1)
            }
        }
    }

    /// Expansion at infinity in powers of 1/z, up to order `1/z^max_inv`.
    pub fn laurent_at_infinity(&self, max_inv: i64) -> InfinityExpansion {
        let var = self.var();
        let den = self.den_poly();
        let dn = self.num.degree().map_or(0, |d| d as i64);
        let dd = den.degree().map_or(0, |d| d as i64);
        if self.num.is_zero() {
            return InfinityExpansion { leading: 0, coeffs: Vec::new() };
        }
        // f(1/u) = u^(dd-dn) * rev(num)(u) / rev(den)(u); expand at u = 0.
        let rev = |p: &Poly, deg: i64| {
            let mut c: Vec<Scalar> = (0..=deg as usize).map(|i| p.coeff(deg as usize - i)).collect();
            while c.last().map_or(false, |x| x.is_zero()) {
                c.pop();
            }
            Poly::from_coeffs(var, c)
        };
        let rn = rev(&self.num, dn);
        let rd = rev(&den, dd);
        let leading = dd - dn; // f ~ z^(-leading)
        let n_terms = (max_inv - leading + 1).max(0) as usize;
        if n_terms == 0 {
            return InfinityExpansion { leading, coeffs: Vec::new() };
        }
        let inv = rd.recip_series(n_terms - 1);
        let mut coeffs = vec![Scalar::zero(); n_terms];
        for k in 0..n_terms {
            let mut acc = Scalar::zero();
            for i in 0..=k {
                let c = rn.coeff(i);
                if !c.is_zero() {
                    acc = &acc + &(&c * &inv[k - i]);
                }
            }
            coeffs[k] = acc;
        }
        InfinityExpansion { leading, coeffs }
    }

    /// The involution `z -> 1/z` applied to the argument.
    pub fn subst_recip(&self) -> RatFunc {
        let var = self.var();
        let dn = self.num.degree().unwrap_or(0);
        let dd_each: Vec<usize> = self.den.iter().map(|(f, _)| f.degree().unwrap_or(0)).collect();
        let dd: usize = self
            .den
            .iter()
            .zip(&dd_each)
            .map(|((_, e), d)| d * *e as usize)
            .sum();
        // N(1/z)/D(1/z) = z^(dd - dn) * revN(z) / revD-in-factors(z)
        let rev = |p: &Poly| {
            let d = p.degree().unwrap_or(0);
            let c: Vec<Scalar> = (0..=d).map(|i| p.coeff(d - i)).collect();
            Poly::from_coeffs(var, c)
        };
        let mut num = rev(&self.num);
        let mut den: Vec<(Poly, u32)> = self.den.iter().map(|(f, e)| (rev(f), *e)).collect();
        let shift = dd as i64 - dn as i64;
        if shift >= 0 {
            num = &num * &Poly::monomial(var, Scalar::one(), shift as usize);
        } else {
            den.push((Poly::ident(var), (-shift) as u32));
        }
        RatFunc::new(num, den)
    }

    /// Partial-fraction decomposition over linear factors.
    ///
    /// Returns the polynomial part and, per pole, the principal-part
    /// coefficients `(pole, order k, coefficient of (z-pole)^(-k))`.
    pub fn partial_fractions(&self) -> Result<PartialFractions, RatFuncError> {
        for (f, _) in &self.den {
            if f.degree() != Some(1) {
                return Err(RatFuncError::NonLinearFactor(format!("{}", f)));
            }
        }
        let den = self.den_poly();
        let (poly_part, rem) = self.num.div_rem(&den);
        let mut terms = Vec::new();
        for (f, e) in &self.den {
            let a = -f.coeff(0); // monic linear: z - a
            let g = RatFunc { num: rem.clone(), den: self.den.clone() };
            let (m, coeffs) = g.laurent_at(&a, -1);
            debug_assert_eq!(m, *e, "pole order mismatch in partial fractions");
            for k in 1..=m {
                let c = coeffs[(m - k) as usize].clone();
                if !c.is_zero() {
                    terms.push((a.clone(), k, c));
                }
            }
        }
        Ok(PartialFractions { poly_part, terms, var: self.var() })
    }

    /// All distinct poles (roots of denominator factors) with total orders.
    /// Requires linear factors.
    pub fn poles(&self) -> Result<Vec<(Scalar, u32)>, RatFuncError> {
        let mut out: Vec<(Scalar, u32)> = Vec::new();
        for (f, e) in &self.den {
            if f.degree() != Some(1) {
                return Err(RatFuncError::NonLinearFactor(format!("{}", f)));
            }
            let a = -f.coeff(0);
            match out.iter_mut().find(|(b, _)| *b == a) {
                Some((_, acc)) => *acc += e,
                None => out.push((a, *e)),
            }
        }
        Ok(out)
    }
}

/// Result of an expansion at infinity: `f = sum coeffs[i] * z^-(leading+i)`.
pub struct InfinityExpansion {
    pub leading: i64,
    pub coeffs: Vec<Scalar>,
}

impl InfinityExpansion {
    /// Coefficient of `z^(-j)`.
    pub fn coeff_of_inv_power(&self, j: i64) -> Scalar {
        let idx = j - self.leading;
        if idx < 0 {
            return Scalar::zero();
        }
        self.coeffs.get(idx as usize).cloned().unwrap_or_else(Scalar::zero)
    }
}

pub struct PartialFractions {
    pub poly_part: Poly,
    /// `(pole, order, coefficient)` of `(z - pole)^(-order)`.
    pub terms: Vec<(Scalar, u32, Scalar)>,
    pub var: Var,
}

impl PartialFractions {
    /// Rebuild the rational function; in exact modes this reproduces the
    /// input identically.
    pub fn reconstruct(&self) -> RatFunc {
        let mut acc = RatFunc::from_poly(self.poly_part.clone());
        for (pole, order, coeff) in &self.terms {
            let den = vec![(Poly::linear_root(self.var, pole), *order)];
            let term = RatFunc::new(Poly::constant(self.var, coeff.clone()), den);
            acc = &acc + &term;
        }
        acc
    }
}

fn poly_key(p: &Poly) -> (usize, String) {
    (p.degree().unwrap_or(0), format!("{}", p))
}

impl Poly {
    /// Divide by `(z - a)` when `a` is an exact root; in float mode the
    /// remainder is discarded when negligible. Returns `None` if `a` is not
    /// a root at the working tolerance.
    pub fn exact_div_or_deflate(&self, a: &Scalar) -> Option<Poly> {
        if !self.eval(a).is_negligible() {
            return None;
        }
        // Synthetic division.
        let d = self.degree()?;
        let mut out = vec![Scalar::zero(); d];
        let mut carry = Scalar::zero();
        for i in (0..=d).rev() {
            let c = &self.coeff(i) + &(&carry * a);
            if i == 0 {
                break;
            }
            out[i - 1] = c.clone();
            carry = c;
        }
        Some(Poly::from_coeffs(self.var, out))
    }
}

impl Add<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        assert_eq!(self.var(), rhs.var(), "variable mismatch");
        // Common denominator by factor-wise lcm.
        let mut factors: Vec<(Poly, u32)> = self.den.clone();
        for (f, e) in &rhs.den {
            match factors.iter_mut().find(|(g, _)| g == f) {
                Some((_, fe)) => *fe = (*fe).max(*e),
                None => factors.push((f.clone(), *e)),
            }
        }
        let mult_for = |own: &[(Poly, u32)]| {
            let mut m = Poly::one(self.var());
            for (f, e) in &factors {
                let have = own.iter().find(|(g, _)| g == f).map_or(0, |(_, x)| *x);
                if *e > have {
                    m = &m * &f.pow(e - have);
                }
            }
            m
        };
        let num = &(&self.num * &mult_for(&self.den)) + &(&rhs.num * &mult_for(&rhs.den));
        RatFunc::new(num, factors)
    }
}

impl Sub<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        assert_eq!(self.var(), rhs.var(), "variable mismatch");
        let mut den = self.den.clone();
        for (f, e) in &rhs.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, fe)) => *fe += e,
                None => den.push((f.clone(), *e)),
            }
        }
        RatFunc::new(&self.num * &rhs.num, den)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! ratfunc_owned_ops {
    ($($trait:ident, $method:ident);*) => {$(
        impl $trait<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: RatFunc) -> RatFunc { (&self).$method(&rhs) }
        }
        impl $trait<&RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: &RatFunc) -> RatFunc { (&self).$method(rhs) }
        }
        impl $trait<RatFunc> for &RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: RatFunc) -> RatFunc { self.$method(&rhs) }
        }
    )*};
}

ratfunc_owned_ops!(Add, add; Sub, sub; Mul, mul);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        let den: Vec<String> = self
            .den
            .iter()
            .map(|(p, e)| if *e == 1 { format!("({})", p) } else { format!("({})^{}", p, e) })
            .collect();
        write!(f, "[{}] / {}", self.num, den.join(""))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z: Var = Var(0);

    fn s(n: i64) -> Scalar {
        Scalar::from_i64(n)
    }

    fn lin(root: i64) -> Poly {
        Poly::linear_root(Z, &s(root))
    }

    fn pol(coeffs: &[i64]) -> Poly {
        Poly::from_coeffs(Z, coeffs.iter().map(|&c| s(c)).collect())
    }

    #[test]
    fn add_combines_over_common_denominator() {
        // 1/(z-1) + 1/(z+1) = 2z/(z^2-1)
        let a = RatFunc::new(Poly::one(Z), vec![(lin(1), 1)]);
        let b = RatFunc::new(Poly::one(Z), vec![(lin(-1), 1)]);
        let sum = &a + &b;
        let expect = RatFunc::new(pol(&[0, 2]), vec![(lin(1), 1), (lin(-1), 1)]);
        assert!(sum.equals(&expect));
    }

    #[test]
    fn mul_by_reciprocal_is_one() {
        // f * (1/f) = 1 for f = (3 z^2 + 1)/(z - 5)
        let f = RatFunc::new(pol(&[1, 0, 3]), vec![(lin(5), 1)]);
        let g = f.recip().unwrap();
        let prod = &f * &g;
        assert!(prod.den.is_empty());
        assert!(prod.num == Poly::one(Z));
    }

    #[test]
    fn derivative_of_inverse_power() {
        // d/dz (1/z) = -1/z^2
        let f = RatFunc::new(Poly::one(Z), vec![(Poly::ident(Z), 1)]);
        let d = f.derivative();
        let expect = RatFunc::new(pol(&[-1]), vec![(Poly::ident(Z), 2)]);
        assert!(d.equals(&expect));
    }

    #[test]
    fn leibniz_rule_randomized() {
        let f = RatFunc::new(pol(&[2, -1, 4]), vec![(lin(1), 2), (Poly::ident(Z), 1)]);
        let g = RatFunc::new(pol(&[3, 5]), vec![(lin(-2), 1)]);
        let lhs = (&f * &g).derivative();
        let rhs = &(&f.derivative() * &g) + &(&f * &g.derivative());
        assert!(lhs.equals(&rhs));
    }

    #[test]
    fn residue_simple_pole() {
        // residue of 1/(z-2) at 2 is 1
        let f = RatFunc::new(Poly::one(Z), vec![(lin(2), 1)]);
        assert_eq!(f.residue_at(&Point::Finite(s(2))), Scalar::one());
        // not a pole: returns 0
        assert_eq!(f.residue_at(&Point::Finite(s(3))), Scalar::zero());
    }

    #[test]
    fn residue_high_order_pole() {
        // residue of z/((z-1)^2 (z+3)) at 1 is 3/16
        let f = RatFunc::new(pol(&[0, 1]), vec![(lin(1), 2), (lin(-3), 1)]);
        assert_eq!(f.residue_at(&Point::Finite(s(1))), Scalar::rat(3, 16));
    }

    #[test]
    fn global_residue_theorem() {
        let f = RatFunc::new(pol(&[7, 2, 5]), vec![(lin(1), 2), (lin(-3), 1), (Poly::ident(Z), 3)]);
        let mut total = Scalar::zero();
        for (pole, _) in f.poles().unwrap() {
            total = &total + &f.residue_at(&Point::Finite(pole));
        }
        total = &total + &f.residue_at(&Point::Infinity);
        assert!(total.is_zero());
    }

    #[test]
    fn partial_fractions_basic() {
        // 1/(z^2-1) -> 1/2 at 1, -1/2 at -1
        let f = RatFunc::new(Poly::one(Z), vec![(lin(1), 1), (lin(-1), 1)]);
        let pf = f.partial_fractions().unwrap();
        assert!(pf.poly_part.is_zero());
        let mut terms = pf.terms.clone();
        terms.sort_by_key(|(p, _, _)| format!("{}", p));
        assert_eq!(terms[0], (s(-1), 1, Scalar::rat(-1, 2)));
        assert_eq!(terms[1], (s(1), 1, Scalar::rat(1, 2)));
        assert!(pf.reconstruct().equals(&f));
    }

    #[test]
    fn partial_fractions_poly_part() {
        // (z^2+1)/(z-1) = (z+1) + 2/(z-1)
        let f = RatFunc::new(pol(&[1, 0, 1]), vec![(lin(1), 1)]);
        let pf = f.partial_fractions().unwrap();
        assert_eq!(pf.poly_part, pol(&[1, 1]));
        assert_eq!(pf.terms, vec![(s(1), 1, s(2))]);
        assert!(pf.reconstruct().equals(&f));
    }

    #[test]
    fn partial_fractions_rejects_nonlinear() {
        let f = RatFunc::new(Poly::one(Z), vec![(pol(&[1, 0, 1]), 1)]);
        assert!(matches!(f.partial_fractions(), Err(RatFuncError::NonLinearFactor(_))));
    }

    #[test]
    fn infinity_expansion_of_inverse() {
        let f = RatFunc::new(Poly::one(Z), vec![(Poly::ident(Z), 1)]);
        let exp = f.laurent_at_infinity(3);
        assert_eq!(exp.coeff_of_inv_power(1), Scalar::one());
        assert_eq!(exp.coeff_of_inv_power(2), Scalar::zero());
        assert_eq!(exp.coeff_of_inv_power(3), Scalar::zero());
    }

    #[test]
    fn involution_squares_to_identity() {
        let f = RatFunc::new(pol(&[1, 2, 3]), vec![(lin(2), 1), (Poly::ident(Z), 2)]);
        let g = f.subst_recip().subst_recip();
        assert!(f.equals(&g));
    }

    #[test]
    fn laurent_coefficients_shift_under_derivative() {
        // coefficient list of df/dz is the order-shifted list of f's
        // coefficients scaled by exponents
        let f = RatFunc::new(pol(&[3, 1]), vec![(lin(2), 3)]);
        let df = f.derivative();
        let (m, c) = f.laurent_at(&s(2), 4);
        let (md, cd) = df.laurent_at(&s(2), 4);
        assert_eq!(md, m + 1);
        // d/dz (z-2)^j = j (z-2)^(j-1)
        for j in -(m as i64)..=3 {
            let cf = &c[(j + m as i64) as usize];
            let expected = &Scalar::from_i64(j) * cf;
            let got = &cd[(j - 1 + md as i64) as usize];
            assert_eq!(got, &expected);
        }
    }
}
