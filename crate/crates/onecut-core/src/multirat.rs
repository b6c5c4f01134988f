//! Multivariate rational functions with a restricted denominator catalog.
//!
//! The recursion only ever produces denominators built from three factor
//! shapes: `(z_i - c)` with `c` a scalar (branch points, zero, images of
//! zeros of the extra polynomial), differences `(z_i - z_j)` (the cylinder
//! diagonal), and conjugate pairs `(z_i z_j - 1)` (poles at the sheet
//! conjugate of a marked point, which appear in intermediate integrands).
//! Anything else is rejected loudly as a bug detector.
//!
//! Variable index 0 is by convention the active integration variable;
//! indices 1.. are marked points.

use crate::poly::{Poly, Var};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Sparse multivariate polynomial: exponent vector -> coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Scalar>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        let mut p = MPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        MPoly::constant(nvars, Scalar::one())
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        assert!(v < nvars);
        let mut e = vec![0; nvars];
        e[v] = 1;
        let mut p = MPoly::zero(nvars);
        p.terms.insert(e, Scalar::one());
        p
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: Scalar) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = MPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    fn insert_add(&mut self, exps: Vec<u32>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn scale(&self, s: &Scalar) -> MPoly {
        if s.is_zero() {
            return MPoly::zero(self.nvars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c * s))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        MPoly { nvars: self.nvars, terms }
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// Coefficients as a dense polynomial in `v` with `MPoly` coefficients
    /// (exponent of `v` zeroed in each coefficient).
    pub fn coeffs_in(&self, v: usize) -> Vec<MPoly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![MPoly::zero(self.nvars); d + 1];
        for (e, c) in &self.terms {
            let k = e[v] as usize;
            let mut e2 = e.clone();
            e2[v] = 0;
            out[k].insert_add(e2, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(v: usize, coeffs: Vec<MPoly>, nvars: usize) -> MPoly {
        let mut out = MPoly::zero(nvars);
        for (k, c) in coeffs.into_iter().enumerate() {
            for (mut e, s) in c.terms {
                assert_eq!(e[v], 0);
                e[v] = k as u32;
                out.insert_add(e, s);
            }
        }
        out
    }

    pub fn derivative(&self, v: usize) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[v] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[v] -= 1;
            out.insert_add(e2, c * &Scalar::from_i64(e[v] as i64));
        }
        out
    }

    /// Substitute a scalar for variable `v` (Horner in that variable).
    pub fn eval_var(&self, v: usize, x: &Scalar) -> MPoly {
        let coeffs = self.coeffs_in(v);
        let mut acc = MPoly::zero(self.nvars);
        for c in coeffs.into_iter().rev() {
            acc = &acc.scale(x) + &c;
        }
        acc
    }

    /// Substitute variable `w` for variable `v` (exponents merge).
    pub fn rename_var(&self, v: usize, w: usize) -> MPoly {
        if v == w {
            return self.clone();
        }
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[w] += e2[v];
            e2[v] = 0;
            out.insert_add(e2, c.clone());
        }
        out
    }

    /// Remap variables into a (possibly larger) variable space;
    /// `map[i]` is the new index of old variable `i`.
    pub fn map_vars(&self, map: &[usize], new_nvars: usize) -> MPoly {
        assert_eq!(map.len(), self.nvars);
        let mut out = MPoly::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0u32; new_nvars];
            for (i, &x) in e.iter().enumerate() {
                e2[map[i]] += x;
            }
            out.insert_add(e2, c.clone());
        }
        out
    }

    /// Multiply by `z_v^k`.
    pub fn mul_var_pow(&self, v: usize, k: u32) -> MPoly {
        if k == 0 {
            return self.clone();
        }
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[v] += k;
            out.insert_add(e2, c.clone());
        }
        out
    }

    /// Full evaluation at a point.
    pub fn eval(&self, point: &[Scalar]) -> Scalar {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Scalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &point[i].pow(k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Embed a univariate polynomial as variable `v`.
    pub fn from_poly(p: &Poly, v: usize, nvars: usize) -> MPoly {
        let mut out = MPoly::zero(nvars);
        for (i, c) in p.coeffs().iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; nvars];
                e[v] = i as u32;
                out.insert_add(e, c.clone());
            }
        }
        out
    }

    /// Extract as a univariate polynomial in `v`; panics if any other
    /// variable appears.
    pub fn to_poly(&self, v: usize, var: Var) -> Poly {
        let d = self.degree_in(v) as usize;
        let mut coeffs = vec![Scalar::zero(); d + 1];
        for (e, c) in &self.terms {
            for (i, &x) in e.iter().enumerate() {
                assert!(i == v || x == 0, "polynomial is not univariate in the requested variable");
            }
            coeffs[e[v] as usize] = c.clone();
        }
        Poly::from_coeffs(var, coeffs)
    }

    /// Exact division by `z_v - root`; `None` when not divisible.
    fn div_lin(&self, v: usize, root: &Scalar) -> Option<MPoly> {
        let coeffs = self.coeffs_in(v);
        if coeffs.len() <= 1 {
            return if self.is_zero() { Some(MPoly::zero(self.nvars)) } else { None };
        }
        let d = coeffs.len() - 1;
        let mut out = vec![MPoly::zero(self.nvars); d];
        let mut carry = MPoly::zero(self.nvars);
        for i in (0..=d).rev() {
            let c = &coeffs[i] + &carry.scale(root);
            if i == 0 {
                if !c.is_zero() {
                    return None;
                }
                break;
            }
            out[i - 1] = c.clone();
            carry = c;
        }
        Some(MPoly::from_coeffs_in(v, out, self.nvars))
    }

    /// Exact division by `z_a - z_b`; `None` when not divisible.
    fn div_diff(&self, a: usize, b: usize) -> Option<MPoly> {
        let coeffs = self.coeffs_in(a);
        if coeffs.len() <= 1 {
            return if self.is_zero() { Some(MPoly::zero(self.nvars)) } else { None };
        }
        let d = coeffs.len() - 1;
        let zb = MPoly::var(self.nvars, b);
        let mut out = vec![MPoly::zero(self.nvars); d];
        let mut carry = MPoly::zero(self.nvars);
        for i in (0..=d).rev() {
            let c = &coeffs[i] + &(&carry * &zb);
            if i == 0 {
                if !c.is_zero() {
                    return None;
                }
                break;
            }
            out[i - 1] = c.clone();
            carry = c;
        }
        Some(MPoly::from_coeffs_in(a, out, self.nvars))
    }

    /// Exact division by `z_a z_b - 1`; `None` when not divisible.
    /// With `f = sum c_i z_a^i`, the quotient coefficients obey
    /// `g_0 = -c_0`, `g_i = g_{i-1} z_b - c_i`, and exactness requires
    /// `g_{d-1} z_b = c_d`.
    fn div_conj(&self, a: usize, b: usize) -> Option<MPoly> {
        let coeffs = self.coeffs_in(a);
        if coeffs.is_empty() {
            return Some(MPoly::zero(self.nvars));
        }
        let d = coeffs.len() - 1;
        if d == 0 {
            return if self.is_zero() { Some(MPoly::zero(self.nvars)) } else { None };
        }
        let zb = MPoly::var(self.nvars, b);
        let mut g = vec![MPoly::zero(self.nvars); d];
        g[0] = -&coeffs[0];
        for i in 1..d {
            g[i] = &(&g[i - 1] * &zb) - &coeffs[i];
        }
        if &g[d - 1] * &zb != coeffs[d] {
            return None;
        }
        Some(MPoly::from_coeffs_in(a, g, self.nvars))
    }
}

impl Add<&MPoly> for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }
}

impl Sub<&MPoly> for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), -c);
        }
        out
    }
}

impl Mul<&MPoly> for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert_add(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

macro_rules! mpoly_owned_ops {
    ($($trait:ident, $method:ident);*) => {$(
        impl $trait<MPoly> for MPoly {
            type Output = MPoly;
            fn $method(self, rhs: MPoly) -> MPoly { (&self).$method(&rhs) }
        }
        impl $trait<&MPoly> for MPoly {
            type Output = MPoly;
            fn $method(self, rhs: &MPoly) -> MPoly { (&self).$method(rhs) }
        }
        impl $trait<MPoly> for &MPoly {
            type Output = MPoly;
            fn $method(self, rhs: MPoly) -> MPoly { self.$method(&rhs) }
        }
    )*};
}

mpoly_owned_ops!(Add, add; Sub, sub; Mul, mul);

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        -&self
    }
}

/// Denominator factor shapes admitted by the pole discipline.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    /// `z_v - root` (root may be zero).
    Lin { v: usize, root: ScalarKey },
    /// `z_a - z_b`, `a < b`.
    Diff { a: usize, b: usize },
    /// `z_a z_b - 1`, `a <= b`.
    Conj { a: usize, b: usize },
}

/// Scalar wrapper with a total order so factors can be sorted and merged
/// deterministically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarKey(pub Scalar);

impl PartialEq for ScalarKey {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}
impl Eq for ScalarKey {}
impl PartialOrd for ScalarKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ScalarKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        format!("{:?}", self.0).cmp(&format!("{:?}", other.0))
    }
}

impl Factor {
    pub fn lin(v: usize, root: Scalar) -> Factor {
        Factor::Lin { v, root: ScalarKey(root) }
    }

    /// `z_a - z_b` normalized to `a < b`; the boolean reports a sign flip.
    pub fn diff(a: usize, b: usize) -> (Factor, bool) {
        assert_ne!(a, b);
        if a < b {
            (Factor::Diff { a, b }, false)
        } else {
            (Factor::Diff { a: b, b: a }, true)
        }
    }

    pub fn conj(a: usize, b: usize) -> Factor {
        Factor::Conj { a: a.min(b), b: a.max(b) }
    }

    pub fn to_mpoly(&self, nvars: usize) -> MPoly {
        match self {
            Factor::Lin { v, root } => {
                &MPoly::var(nvars, *v) - &MPoly::constant(nvars, root.0.clone())
            }
            Factor::Diff { a, b } => &MPoly::var(nvars, *a) - &MPoly::var(nvars, *b),
            Factor::Conj { a, b } => {
                let mut e = vec![0; nvars];
                e[*a] += 1;
                e[*b] += 1;
                &MPoly::monomial(nvars, e, Scalar::one()) - &MPoly::one(nvars)
            }
        }
    }

    pub fn involves(&self, v: usize) -> bool {
        match self {
            Factor::Lin { v: w, .. } => *w == v,
            Factor::Diff { a, b } | Factor::Conj { a, b } => *a == v || *b == v,
        }
    }

    fn div_into(&self, p: &MPoly) -> Option<MPoly> {
        match self {
            Factor::Lin { v, root } => p.div_lin(*v, &root.0),
            Factor::Diff { a, b } => p.div_diff(*a, *b),
            Factor::Conj { a, b } => {
                if a == b {
                    // z_a^2 - 1 splits into linear factors; normalize upstream.
                    let m1 = p.div_lin(*a, &Scalar::one())?;
                    m1.div_lin(*a, &(-Scalar::one()))
                } else {
                    p.div_conj(*a, *b)
                }
            }
        }
    }
}

/// A multivariate rational function `num / prod(factor^exp)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiRat {
    pub nvars: usize,
    pub num: MPoly,
    pub den: Vec<(Factor, u32)>,
}

/// Substitution target for [`MultiRat::subst_var`].
#[derive(Clone, Debug)]
pub enum Subst {
    Scalar(Scalar),
    Var(usize),
    InvVar(usize),
}

impl MultiRat {
    pub fn zero(nvars: usize) -> Self {
        MultiRat { nvars, num: MPoly::zero(nvars), den: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        MultiRat { nvars, num: MPoly::one(nvars), den: Vec::new() }
    }

    pub fn from_mpoly(num: MPoly) -> Self {
        let nvars = num.nvars;
        MultiRat { nvars, num, den: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        MultiRat::from_mpoly(MPoly::constant(nvars, c))
    }

    pub fn new(num: MPoly, den: Vec<(Factor, u32)>) -> Self {
        let nvars = num.nvars;
        let mut f = MultiRat { nvars, num, den };
        f.canonicalize();
        f
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Merge equal factors, cancel the numerator against each factor,
    /// sort deterministically.
    pub fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let mut merged: BTreeMap<Factor, u32> = BTreeMap::new();
        for (f, e) in self.den.drain(..) {
            if e > 0 {
                *merged.entry(f).or_insert(0) += e;
            }
        }
        let mut out = Vec::new();
        for (f, mut e) in merged {
            while e > 0 {
                match f.div_into(&self.num) {
                    Some(q) => {
                        self.num = q;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e > 0 {
                out.push((f, e));
            }
        }
        self.den = out;
    }

    pub fn den_mpoly(&self) -> MPoly {
        let mut d = MPoly::one(self.nvars);
        for (f, e) in &self.den {
            let fp = f.to_mpoly(self.nvars);
            for _ in 0..*e {
                d = &d * &fp;
            }
        }
        d
    }

    /// Decidable equality by cross-multiplication.
    pub fn equals(&self, other: &MultiRat) -> bool {
        &self.num * &other.den_mpoly() == &other.num * &self.den_mpoly()
    }

    pub fn mul_scalar(&self, s: &Scalar) -> MultiRat {
        if s.is_zero() {
            return MultiRat::zero(self.nvars);
        }
        MultiRat { nvars: self.nvars, num: self.num.scale(s), den: self.den.clone() }
    }

    /// Push `factor^exp` into the denominator.
    pub fn div_factor(&self, factor: Factor, exp: u32) -> MultiRat {
        let mut den = self.den.clone();
        den.push((factor, exp));
        MultiRat::new(self.num.clone(), den)
    }

    pub fn derivative(&self, v: usize) -> MultiRat {
        if self.den.is_empty() {
            return MultiRat::from_mpoly(self.num.derivative(v));
        }
        let mut prod_all = MPoly::one(self.nvars);
        for (f, _) in &self.den {
            prod_all = &prod_all * &f.to_mpoly(self.nvars);
        }
        let mut num = &self.num.derivative(v) * &prod_all;
        for (i, (f, e)) in self.den.iter().enumerate() {
            let fd = f.to_mpoly(self.nvars).derivative(v);
            if fd.is_zero() {
                continue;
            }
            let mut rest = MPoly::one(self.nvars);
            for (j, (g, _)) in self.den.iter().enumerate() {
                if j != i {
                    rest = &rest * &g.to_mpoly(self.nvars);
                }
            }
            let term = &(&self.num * &fd).scale(&Scalar::from_i64(*e as i64)) * &rest;
            num = &num - &term;
        }
        let den = self.den.iter().map(|(f, e)| (f.clone(), e + 1)).collect();
        MultiRat::new(num, den)
    }

    /// Remap variable indices; `map[i]` gives the new index of old `i`.
    pub fn map_vars(&self, map: &[usize], new_nvars: usize) -> MultiRat {
        let num = self.num.map_vars(map, new_nvars);
        let mut flips = 0u32;
        let den = self
            .den
            .iter()
            .map(|(f, e)| {
                let nf = match f {
                    Factor::Lin { v, root } => Factor::Lin { v: map[*v], root: root.clone() },
                    Factor::Diff { a, b } => {
                        let (nf, flipped) = Factor::diff(map[*a], map[*b]);
                        if flipped {
                            flips += e;
                        }
                        nf
                    }
                    Factor::Conj { a, b } => Factor::conj(map[*a], map[*b]),
                };
                (nf, *e)
            })
            .collect();
        let num = if flips % 2 == 1 { -&num } else { num };
        MultiRat::new(num, den)
    }

    /// Full evaluation at a point (panics at a pole).
    pub fn eval(&self, point: &[Scalar]) -> Scalar {
        let mut d = Scalar::one();
        for (f, e) in &self.den {
            d = &d * &f.to_mpoly(self.nvars).eval(point).pow(*e);
        }
        assert!(!d.is_zero(), "evaluation at a pole");
        &self.num.eval(point) / &d
    }

    /// Substitute for variable `v`: a scalar, another variable, or the
    /// reciprocal of another variable. The result no longer involves `v`.
    pub fn subst_var(&self, v: usize, target: &Subst) -> MultiRat {
        let nvars = self.nvars;
        let mut num;
        let mut den: Vec<(Factor, u32)> = Vec::new();

        match target {
            Subst::Scalar(c) => {
                num = self.num.eval_var(v, c);
                for (f, e) in &self.den {
                    if !f.involves(v) {
                        den.push((f.clone(), *e));
                        continue;
                    }
                    match f {
                        Factor::Lin { root, .. } => {
                            let val = c - &root.0;
                            assert!(!val.is_zero(), "substitution lands on a pole");
                            num = num.scale(&val.recip().pow(*e));
                        }
                        Factor::Diff { a, b } => {
                            // a == v: (c - z_other) = -(z_other - c)
                            let other = if *a == v { *b } else { *a };
                            if *a == v && *e % 2 == 1 {
                                num = -&num;
                            }
                            den.push((Factor::lin(other, c.clone()), *e));
                        }
                        Factor::Conj { a, b } => {
                            // (c z_other - 1) = c (z_other - 1/c)
                            assert!(!c.is_zero(), "conjugate factor collapses at zero");
                            let other = if *a == v { *b } else { *a };
                            num = num.scale(&c.recip().pow(*e));
                            den.push((Factor::lin(other, c.recip()), *e));
                        }
                    }
                }
            }
            Subst::Var(j) => {
                assert_ne!(*j, v);
                num = self.num.rename_var(v, *j);
                for (f, e) in &self.den {
                    if !f.involves(v) {
                        den.push((f.clone(), *e));
                        continue;
                    }
                    match f {
                        Factor::Lin { root, .. } => den.push((Factor::lin(*j, root.0.clone()), *e)),
                        Factor::Diff { a, b } => {
                            let other = if *a == v { *b } else { *a };
                            assert_ne!(other, *j, "substitution lands on the diagonal pole");
                            // old sign reference: factor was z_a - z_b
                            let (nf, flipped) = if *a == v {
                                Factor::diff(*j, other)
                            } else {
                                Factor::diff(other, *j)
                            };
                            if flipped && *e % 2 == 1 {
                                num = -&num;
                            }
                            den.push((nf, *e));
                        }
                        Factor::Conj { a, b } => {
                            let other = if *a == v { *b } else { *a };
                            den.push((Factor::conj(*j, other), *e));
                        }
                    }
                }
            }
            Subst::InvVar(j) => {
                assert_ne!(*j, v);
                // z_v^k -> z_j^(D-k) with an overall z_j^-D.
                let coeffs = self.num.coeffs_in(v);
                let deg = coeffs.len().saturating_sub(1) as i64;
                num = MPoly::zero(nvars);
                for (k, c) in coeffs.iter().enumerate() {
                    num = &num + &c.mul_var_pow(*j, (deg as u32) - (k as u32));
                }
                let mut net_inv_pow: i64 = deg; // accumulated power of z_j in the denominator
                for (f, e) in &self.den {
                    if !f.involves(v) {
                        den.push((f.clone(), *e));
                        continue;
                    }
                    match f {
                        Factor::Lin { root, .. } => {
                            let c = &root.0;
                            if c.is_zero() {
                                // 1/(1/z_j) = z_j
                                net_inv_pow -= *e as i64;
                            } else {
                                // (1/z_j - c) = -c (z_j - 1/c) / z_j
                                net_inv_pow -= *e as i64;
                                let scale = (-c.clone()).recip().pow(*e);
                                num = num.scale(&scale);
                                den.push((Factor::lin(*j, c.recip()), *e));
                            }
                        }
                        Factor::Diff { a, b } => {
                            // (1/z_j - z_o) = -(z_j z_o - 1)/z_j  (when a == v)
                            // (z_o - 1/z_j) = (z_j z_o - 1)/z_j   (when b == v)
                            let other = if *a == v { *b } else { *a };
                            assert_ne!(other, *j, "conjugate substitution meets its own diagonal");
                            if *a == v && *e % 2 == 1 {
                                num = -&num;
                            }
                            net_inv_pow -= *e as i64;
                            den.push((Factor::conj(*j, other), *e));
                        }
                        Factor::Conj { a, b } => {
                            // (z_o/z_j - 1) = (z_o - z_j)/z_j
                            let other = if *a == v { *b } else { *a };
                            assert_ne!(other, *j, "conjugate factor degenerates under substitution");
                            net_inv_pow -= *e as i64;
                            let (nf, flipped) = Factor::diff(other, *j);
                            if flipped && *e % 2 == 1 {
                                num = -&num;
                            }
                            den.push((nf, *e));
                        }
                    }
                }
                // net_inv_pow counts powers of z_j dividing the result:
                // positive -> denominator, negative -> numerator.
                if net_inv_pow > 0 {
                    den.push((Factor::lin(*j, Scalar::zero()), net_inv_pow as u32));
                } else if net_inv_pow < 0 {
                    num = num.mul_var_pow(*j, (-net_inv_pow) as u32);
                }
            }
        }
        MultiRat::new(num, den)
    }

    pub fn mul(&self, rhs: &MultiRat) -> MultiRat {
        assert_eq!(self.nvars, rhs.nvars);
        let mut den = self.den.clone();
        den.extend(rhs.den.iter().cloned());
        MultiRat::new(&self.num * &rhs.num, den)
    }

    pub fn add(&self, rhs: &MultiRat) -> MultiRat {
        assert_eq!(self.nvars, rhs.nvars);
        let mut factors: Vec<(Factor, u32)> = self.den.clone();
        for (f, e) in &rhs.den {
            match factors.iter_mut().find(|(g, _)| g == f) {
                Some((_, fe)) => *fe = (*fe).max(*e),
                None => factors.push((f.clone(), *e)),
            }
        }
        let mult_for = |own: &[(Factor, u32)]| {
            let mut m = MPoly::one(self.nvars);
            for (f, e) in &factors {
                let have = own.iter().find(|(g, _)| g == f).map_or(0, |(_, x)| *x);
                if *e > have {
                    let fp = f.to_mpoly(self.nvars);
                    for _ in 0..(*e - have) {
                        m = &m * &fp;
                    }
                }
            }
            m
        };
        let num = &(&self.num * &mult_for(&self.den)) + &(&rhs.num * &mult_for(&rhs.den));
        MultiRat::new(num, factors)
    }

    pub fn sub(&self, rhs: &MultiRat) -> MultiRat {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> MultiRat {
        MultiRat { nvars: self.nvars, num: -&self.num, den: self.den.clone() }
    }

    /// Restrict to a univariate rational function in variable `v`; all other
    /// variables must be absent.
    pub fn to_ratfunc(&self, v: usize, var: Var) -> crate::ratfunc::RatFunc {
        let num = self.num.to_poly(v, var);
        let den = self
            .den
            .iter()
            .map(|(f, e)| {
                let p = match f {
                    Factor::Lin { v: w, root } => {
                        assert_eq!(*w, v, "foreign variable in univariate restriction");
                        Poly::linear_root(var, &root.0)
                    }
                    _ => panic!("multivariate factor in univariate restriction"),
                };
                (p, *e)
            })
            .collect();
        crate::ratfunc::RatFunc::new(num, den)
    }

    /// Promote a univariate rational function to variable `v` of a
    /// `MultiRat`; denominator factors must be linear.
    pub fn from_ratfunc(f: &crate::ratfunc::RatFunc, v: usize, nvars: usize) -> MultiRat {
        let num = MPoly::from_poly(&f.num, v, nvars);
        let den = f
            .den
            .iter()
            .map(|(p, e)| {
                assert_eq!(p.degree(), Some(1), "only linear factors embed into the catalog");
                (Factor::lin(v, -p.coeff(0)), *e)
            })
            .collect();
        MultiRat::new(num, den)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Lin { v, root } => {
                if root.0.is_zero() {
                    write!(f, "z{}", v)
                } else {
                    write!(f, "(z{} - {})", v, root.0)
                }
            }
            Factor::Diff { a, b } => write!(f, "(z{} - z{})", a, b),
            Factor::Conj { a, b } => write!(f, "(z{}*z{} - 1)", a, b),
        }
    }
}

impl fmt::Display for MultiRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .num
            .terms
            .iter()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .map(|(i, &x)| if x == 1 { format!("z{}", i) } else { format!("z{}^{}", i, x) })
                    .collect();
                if vars.is_empty() {
                    format!("({})", c)
                } else {
                    format!("({})*{}", c, vars.join("*"))
                }
            })
            .collect();
        let num = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        if self.den.is_empty() {
            write!(f, "{}", num)
        } else {
            let den: Vec<String> = self
                .den
                .iter()
                .map(|(p, e)| if *e == 1 { format!("{}", p) } else { format!("{}^{}", p, e) })
                .collect();
            write!(f, "[{}] / {}", num, den.join(""))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_i64(n)
    }

    #[test]
    fn mpoly_mul_and_eval() {
        let p = &MPoly::var(2, 0) + &MPoly::var(2, 1);
        let sq = &p * &p;
        assert_eq!(sq.eval(&[s(2), s(3)]), s(25));
    }

    #[test]
    fn div_lin_roundtrip() {
        let p = &MPoly::var(2, 0) + &MPoly::var(2, 1);
        let f = Factor::lin(0, s(2));
        let prod = &p * &f.to_mpoly(2);
        assert_eq!(f.div_into(&prod).unwrap(), p);
        assert!(f.div_into(&p).is_none());
    }

    #[test]
    fn div_diff_roundtrip() {
        let p = &MPoly::var(3, 2) + &MPoly::one(3);
        let (f, _) = Factor::diff(0, 1);
        let prod = &p * &f.to_mpoly(3);
        assert_eq!(f.div_into(&prod).unwrap(), p);
    }

    #[test]
    fn div_conj_roundtrip() {
        let p = &(&MPoly::var(2, 0) * &MPoly::var(2, 1)) + &MPoly::constant(2, s(7));
        let f = Factor::conj(0, 1);
        let prod = &p * &f.to_mpoly(2);
        assert_eq!(f.div_into(&prod).unwrap(), p);
        assert!(f.div_into(&MPoly::var(2, 0)).is_none());
    }

    #[test]
    fn canonicalize_cancels() {
        // (z0^2 - 1)/(z0 - 1) = z0 + 1
        let num = &(&MPoly::var(1, 0) * &MPoly::var(1, 0)) - &MPoly::one(1);
        let f = MultiRat::new(num, vec![(Factor::lin(0, s(1)), 1)]);
        assert!(f.den.is_empty());
        assert_eq!(f.num, &MPoly::var(1, 0) + &MPoly::one(1));
    }

    #[test]
    fn subst_scalar_handles_factors() {
        // 1/((z0 - z1)(z0 z1 - 1)) at z0 = 3
        let den = vec![(Factor::diff(0, 1).0, 1), (Factor::conj(0, 1), 1)];
        let f = MultiRat::new(MPoly::one(2), den);
        let g = f.subst_var(0, &Subst::Scalar(s(3)));
        for z1 in [s(5), Scalar::rat(1, 7)] {
            let direct = (&(&s(3) - &z1) * &(&(&s(3) * &z1) - &Scalar::one())).recip();
            assert_eq!(g.eval(&[s(99), z1]), direct);
        }
    }

    #[test]
    fn subst_inv_var() {
        // 1/(z0 - 2) at z0 = 1/z1
        let f = MultiRat::new(MPoly::one(2), vec![(Factor::lin(0, s(2)), 1)]);
        let g = f.subst_var(0, &Subst::InvVar(1));
        let z1 = Scalar::rat(3, 5);
        let expect = (&z1.recip() - &s(2)).recip();
        assert_eq!(g.eval(&[s(99), z1]), expect);
    }

    #[test]
    fn subst_inv_var_numerator_and_zero_root() {
        // f = z0^2 / z0 = z0; at z0 = 1/z1 should give 1/z1
        let num = MPoly::monomial(2, vec![2, 0], Scalar::one());
        let f = MultiRat::new(num, vec![(Factor::lin(0, Scalar::zero()), 1)]);
        let g = f.subst_var(0, &Subst::InvVar(1));
        let z1 = Scalar::rat(7, 3);
        assert_eq!(g.eval(&[s(0), z1.clone()]), z1.recip());
    }

    #[test]
    fn subst_inv_var_on_conj_gives_diff() {
        // 1/(z0 z1 - 1) at z0 = 1/z2 -> z2/(z1 - z2)
        let f = MultiRat::new(MPoly::one(3), vec![(Factor::conj(0, 1), 1)]);
        let g = f.subst_var(0, &Subst::InvVar(2));
        let (z1, z2) = (s(4), s(9));
        let expect = (&(&z1 / &z2) - &Scalar::one()).recip();
        assert_eq!(g.eval(&[s(0), z1, z2]), expect);
    }

    #[test]
    fn subst_var_merges_onto_marked_point() {
        // 1/(z0 z1 - 1) at z0 = z2 -> 1/(z2 z1 - 1)
        let f = MultiRat::new(MPoly::one(3), vec![(Factor::conj(0, 1), 1)]);
        let g = f.subst_var(0, &Subst::Var(2));
        let (z1, z2) = (s(4), s(9));
        let expect = (&(&z1 * &z2) - &Scalar::one()).recip();
        assert_eq!(g.eval(&[s(0), z1, z2]), expect);
    }

    #[test]
    fn derivative_quotient_rule() {
        // d/dz0 [z1/(z0 - z1)] = -z1/(z0 - z1)^2
        let f = MultiRat::new(MPoly::var(2, 1), vec![(Factor::diff(0, 1).0, 1)]);
        let d = f.derivative(0);
        let expect = MultiRat::new(-&MPoly::var(2, 1), vec![(Factor::diff(0, 1).0, 2)]);
        assert!(d.equals(&expect));
    }

    #[test]
    fn map_vars_flips_diff_sign() {
        // 1/(z0 - z1) with variables swapped equals -1/(z0 - z1)
        let f = MultiRat::new(MPoly::one(2), vec![(Factor::diff(0, 1).0, 1)]);
        let g = f.map_vars(&[1, 0], 2);
        assert!(g.equals(&f.neg()));
    }
}
