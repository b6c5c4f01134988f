//! The planar one-cut spectral curve in the Zhukovsky coordinate.
//!
//! Everything is rational in `z`: the double cover `x(z) = a + c(z + 1/z)`
//! maps `|z| > 1` to the physical sheet, branch points sit at `z = ±1`, and
//! the sheet involution is `z -> 1/z`. The curve data is
//! `y(x(z)) = Mt(x(z)) * c(z - 1/z) / prod_k (x(z) - alpha_k)`, where the
//! polynomial `Mt` (one half of the conventional extra polynomial, sign
//! included) and the Zhukovsky parameters `(a, c)` are fixed by the
//! asymptotic and regularity conditions:
//!
//! - `y + V'/2 - t0/x = O(1/x^2)` at infinity on the physical sheet
//!   (`m + 2` conditions),
//! - `y + V'/2` regular at every `alpha_k` image (`t` conditions).
//!
//! All conditions are affine in the coefficients of `Mt`, so the solver
//! eliminates `Mt` by a linear solve and runs a two-variable Newton
//! iteration on `(a, c)`; first derivatives are propagated through the
//! whole pipeline with two-component jets. In series mode the same Newton
//! iteration converges in the t-adic metric and the result is exact at the
//! truncation order.

use crate::cfloat;
use crate::poly::{Poly, Var};
use crate::potential::Potential;
use crate::ratfunc::RatFunc;
use crate::scalar::Scalar;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The active curve variable `z`.
pub const ZVAR: Var = Var(0);
/// Variable tag used for polynomials in the eigenvalue coordinate `x`.
pub const XVAR: Var = Var(900);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveMode {
    /// Exact closed form; quadratic potential without logarithmic terms.
    ClosedForm,
    /// Newton iteration on big floats with the given binary precision.
    Newton(u32),
    /// Perturbative series around the quadratic part.
    Series,
}

#[derive(Debug)]
pub enum CurveError {
    InvalidPotential(String),
    NeedsNumericMode(String),
    NewtonDiverged(String),
    BranchPointCollision(String),
    RegularityUnsatisfiable(String),
}

impl fmt::Display for CurveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveError::InvalidPotential(s) => write!(f, "invalid potential: {}", s),
            CurveError::NeedsNumericMode(s) => write!(f, "exact mode insufficient: {}", s),
            CurveError::NewtonDiverged(s) => write!(f, "newton iteration failed: {}", s),
            CurveError::BranchPointCollision(s) => write!(f, "branch points collide: {}", s),
            CurveError::RegularityUnsatisfiable(s) => write!(f, "regularity conditions failed: {}", s),
        }
    }
}

impl std::error::Error for CurveError {}

/// A point on the curve, identified by its Zhukovsky coordinate. The sheet
/// is implied by `|z|`: physical for `|z| > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint(pub Scalar);

impl CurvePoint {
    pub fn conjugate(&self) -> CurvePoint {
        CurvePoint(self.0.recip())
    }

    pub fn on_physical_sheet(&self) -> bool {
        self.0.abs_cmp_one() == std::cmp::Ordering::Greater
    }
}

// ---- Two-component jets ----
//
// Value plus partial derivatives with respect to the two Newton unknowns.

#[derive(Clone, Debug)]
struct Jet {
    v: Scalar,
    da: Scalar,
    dc: Scalar,
}

impl Jet {
    fn konst(v: Scalar) -> Jet {
        Jet { v, da: Scalar::zero(), dc: Scalar::zero() }
    }

    fn zero() -> Jet {
        Jet::konst(Scalar::zero())
    }

    fn add(&self, o: &Jet) -> Jet {
        Jet { v: &self.v + &o.v, da: &self.da + &o.da, dc: &self.dc + &o.dc }
    }

    fn sub(&self, o: &Jet) -> Jet {
        Jet { v: &self.v - &o.v, da: &self.da - &o.da, dc: &self.dc - &o.dc }
    }

    fn mul(&self, o: &Jet) -> Jet {
        Jet {
            v: &self.v * &o.v,
            da: &(&self.da * &o.v) + &(&self.v * &o.da),
            dc: &(&self.dc * &o.v) + &(&self.v * &o.dc),
        }
    }

    fn neg(&self) -> Jet {
        Jet { v: -&self.v, da: -&self.da, dc: -&self.dc }
    }

    fn recip(&self) -> Jet {
        let inv = self.v.recip();
        let inv2 = &inv * &inv;
        Jet { v: inv, da: -&(&self.da * &inv2), dc: -&(&self.dc * &inv2) }
    }

    fn scale(&self, s: &Scalar) -> Jet {
        Jet { v: &self.v * s, da: &self.da * s, dc: &self.dc * s }
    }

    fn is_unit(&self) -> bool {
        match &self.v {
            Scalar::Series(s) => !s.coeffs[0].is_zero(),
            v => !v.is_negligible(),
        }
    }

    /// Square root following the branch that makes the value's magnitude
    /// larger than one when `outside` is requested (used for sheet images).
    fn sqrt(&self) -> Option<Jet> {
        let r = self.v.sqrt()?;
        if r.is_zero() {
            return None;
        }
        let half_inv = &Scalar::rat(1, 2) * &r.recip();
        Some(Jet { v: r, da: &self.da * &half_inv, dc: &self.dc * &half_inv })
    }
}

// ---- Windowed Laurent series at infinity with jet coefficients ----
//
// f = z^h * (p[0] + p[1]/z + p[2]/z^2 + ...), truncated at a fixed length.
// Truncation only ever drops powers below everything we read, because
// multiplication and reciprocation are lower-triangular in 1/z.

#[derive(Clone)]
struct ZSeries {
    h: i64,
    p: Vec<Jet>,
}

impl ZSeries {
    fn konst(j: Jet, len: usize) -> ZSeries {
        let mut p = vec![Jet::zero(); len];
        p[0] = j;
        ZSeries { h: 0, p }
    }

    fn mul(&self, o: &ZSeries) -> ZSeries {
        let len = self.p.len().min(o.p.len());
        let mut p = vec![Jet::zero(); len];
        for i in 0..len {
            if !(self.p[i].v.is_zero() && self.p[i].da.is_zero() && self.p[i].dc.is_zero()) {
                for j in 0..len - i {
                    p[i + j] = p[i + j].add(&self.p[i].mul(&o.p[j]));
                }
            }
        }
        ZSeries { h: self.h + o.h, p }
    }

    fn recip(&self) -> ZSeries {
        // locate the true leading term
        let lead = self.p.iter().position(|j| j.is_unit()).expect("series has no unit leading term");
        let len = self.p.len() - lead;
        let tail = &self.p[lead..];
        let mut inv = vec![Jet::zero(); len];
        inv[0] = tail[0].recip();
        for k in 1..len {
            let mut acc = Jet::zero();
            for i in 1..=k {
                acc = acc.add(&tail[i].mul(&inv[k - i]));
            }
            inv[k] = acc.mul(&inv[0]).neg();
        }
        ZSeries { h: -(self.h - lead as i64), p: inv }
    }

    fn add(&self, o: &ZSeries) -> ZSeries {
        let (hi, lo) = if self.h >= o.h { (self, o) } else { (o, self) };
        let shift = (hi.h - lo.h) as usize;
        let mut p = hi.p.clone();
        for (i, j) in lo.p.iter().enumerate() {
            if i + shift < p.len() {
                p[i + shift] = p[i + shift].add(j);
            }
        }
        ZSeries { h: hi.h, p }
    }

    fn scale(&self, s: &Scalar) -> ZSeries {
        ZSeries { h: self.h, p: self.p.iter().map(|j| j.scale(s)).collect() }
    }

    fn scale_jet(&self, s: &Jet) -> ZSeries {
        ZSeries { h: self.h, p: self.p.iter().map(|j| j.mul(s)).collect() }
    }

    /// Coefficient of `z^pow`.
    fn coeff(&self, pow: i64) -> Jet {
        let idx = self.h - pow;
        if idx < 0 || idx as usize >= self.p.len() {
            Jet::zero()
        } else {
            self.p[idx as usize].clone()
        }
    }
}

/// Everything the condition pipeline produces at a given `(a, c)`.
struct ConditionEval {
    /// The two residual conditions (coefficients of `z^0` and `z^-1`).
    f: [Jet; 2],
    /// Solved coefficients of `Mt` (values only meaningful at a root).
    m_tilde: Vec<Jet>,
    /// Physical-sheet images of the `alpha_k`.
    alpha_images: Vec<Jet>,
}

fn eval_conditions(pot: &Potential, a: &Jet, c: &Jet) -> Result<ConditionEval, CurveError> {
    let m = pot.m();
    let t = pot.n_logs();
    let n_unknowns = m + t;
    let len = 3 * m + t + 10;

    // x(z) = c z + a + c/z
    let mut xp = vec![Jet::zero(); len];
    xp[0] = c.clone();
    xp[1] = a.clone();
    xp[2] = c.clone();
    let x = ZSeries { h: 1, p: xp };

    // Powers of x.
    let max_pow = m.max(n_unknowns.saturating_sub(1));
    let mut xpow: Vec<ZSeries> = Vec::with_capacity(max_pow + 1);
    xpow.push(ZSeries::konst(Jet::konst(Scalar::one()), len));
    for j in 1..=max_pow {
        let next = xpow[j - 1].mul(&x);
        xpow.push(next);
    }

    // Vhat'(x) = sum_s s t_s x^(s-1)
    let mut vhp = ZSeries::konst(Jet::zero(), len);
    for (i, ts) in pot.couplings.iter().enumerate() {
        let s = i + 1;
        if !ts.is_zero() {
            let coef = &Scalar::from_i64(s as i64) * ts;
            vhp = vhp.add(&xpow[s - 1].scale(&coef));
        }
    }

    // alpha images and 1/(x - alpha_k)
    let mut alpha_images = Vec::with_capacity(t);
    let mut inv_x_alpha: Vec<ZSeries> = Vec::with_capacity(t);
    let mut prod_inv_alpha = ZSeries::konst(Jet::konst(Scalar::one()), len);
    for (alpha, _) in &pot.log_terms {
        let w = Jet::konst(alpha.clone()).sub(a).mul(&c.recip());
        let disc = w.mul(&w).sub(&Jet::konst(Scalar::from_i64(4)));
        let r = disc.sqrt().ok_or_else(|| {
            CurveError::NeedsNumericMode(format!(
                "square root of {} is not available in this scalar mode; use newton-numeric",
                disc.v
            ))
        })?;
        let half = Scalar::rat(1, 2);
        let cand1 = w.add(&r).scale(&half);
        let cand2 = w.sub(&r).scale(&half);
        let za = if cand1.v.abs_cmp_one() == std::cmp::Ordering::Greater { cand1 } else { cand2 };
        if za.v.abs_cmp_one() != std::cmp::Ordering::Greater {
            return Err(CurveError::RegularityUnsatisfiable(format!(
                "log point alpha = {} has no physical-sheet image (it sits on the cut)",
                alpha
            )));
        }
        alpha_images.push(za);
        let shifted = x.add(&ZSeries::konst(Jet::konst(-alpha), len));
        let inv = shifted.recip();
        prod_inv_alpha = prod_inv_alpha.mul(&inv);
        inv_x_alpha.push(inv);
    }

    // V'(x)/2 = (Vhat' - sum gamma/(x - alpha))/2
    let mut vp_half = vhp;
    for (k, (_, gamma)) in pot.log_terms.iter().enumerate() {
        vp_half = vp_half.add(&inv_x_alpha[k].scale(&-gamma.clone()));
    }
    vp_half = vp_half.scale(&Scalar::rat(1, 2));

    // c(z - 1/z)
    let mut cz = vec![Jet::zero(); len];
    cz[0] = c.clone();
    cz[2] = c.neg();
    let czmz = ZSeries { h: 1, p: cz };

    // basis_j = x^j * c(z - 1/z) * prod 1/(x - alpha)
    let basis: Vec<ZSeries> = (0..n_unknowns)
        .map(|j| xpow[j].mul(&czmz).mul(&prod_inv_alpha))
        .collect();

    // target series entering G besides the Mt part
    let inv_x = x.recip();
    let rest = vp_half.add(&inv_x.scale(&-pot.t0.clone()));

    // Linear system rows: asymptotic coefficients z^m .. z^1, then the t
    // regularity rows. Unknowns: m_tilde_0 .. m_tilde_{m+t-1}.
    let mut mat: Vec<Vec<Jet>> = Vec::with_capacity(n_unknowns);
    let mut rhs: Vec<Jet> = Vec::with_capacity(n_unknowns);
    for pow in (1..=m as i64).rev() {
        let row: Vec<Jet> = basis.iter().map(|b| b.coeff(pow)).collect();
        mat.push(row);
        rhs.push(rest.coeff(pow).neg());
    }
    for (k, (alpha, gamma)) in pot.log_terms.iter().enumerate() {
        // sum_j m_j alpha^j / prod_{l != k}(alpha_k - alpha_l)
        //   = gamma_k / (2 c (za - 1/za))
        let mut denom = Scalar::one();
        for (l, (alpha_l, _)) in pot.log_terms.iter().enumerate() {
            if l != k {
                denom = &denom * &(alpha - alpha_l);
            }
        }
        let mut row = Vec::with_capacity(n_unknowns);
        let mut apow = Scalar::one();
        for _ in 0..n_unknowns {
            row.push(Jet::konst(&apow / &denom));
            apow = &apow * alpha;
        }
        let za = &alpha_images[k];
        let diff = za.sub(&za.recip());
        let rhs_k = c.mul(&diff).scale(&Scalar::from_i64(2)).recip().scale(gamma);
        mat.push(row);
        rhs.push(rhs_k);
    }

    let m_tilde = solve_linear_jets(mat, rhs)?;

    // G = sum_j m_j basis_j + rest; residuals are its z^0 and z^-1 coefficients.
    let mut g0 = rest.coeff(0);
    let mut g1 = rest.coeff(-1);
    for (j, mj) in m_tilde.iter().enumerate() {
        g0 = g0.add(&basis[j].coeff(0).mul(mj));
        g1 = g1.add(&basis[j].coeff(-1).mul(mj));
    }

    Ok(ConditionEval { f: [g0, g1], m_tilde, alpha_images })
}

fn solve_linear_jets(mut mat: Vec<Vec<Jet>>, mut rhs: Vec<Jet>) -> Result<Vec<Jet>, CurveError> {
    let n = mat.len();
    for i in 0..n {
        // pivot: first row with a unit entry in column i
        let piv = (i..n).find(|&r| mat[r][i].is_unit()).ok_or_else(|| {
            CurveError::RegularityUnsatisfiable(
                "degenerate condition system (wrong cut count for this potential?)".into(),
            )
        })?;
        mat.swap(i, piv);
        rhs.swap(i, piv);
        let inv = mat[i][i].recip();
        for r in 0..n {
            if r == i {
                continue;
            }
            let factor = mat[r][i].mul(&inv);
            if factor.v.is_zero() && factor.da.is_zero() && factor.dc.is_zero() {
                continue;
            }
            for col in 0..n {
                let d = factor.mul(&mat[i][col]);
                mat[r][col] = mat[r][col].sub(&d);
            }
            let d = factor.mul(&rhs[i]);
            rhs[r] = rhs[r].sub(&d);
        }
    }
    Ok((0..n).map(|i| rhs[i].mul(&mat[i][i].recip())).collect())
}

/// The planar one-cut curve with all derived geometry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OneCutCurve {
    pub potential: Potential,
    pub mode: CurveMode,
    /// Zhukovsky center and radius; branch points are `a -+ 2c`.
    pub a: Scalar,
    pub c: Scalar,
    /// The numerator polynomial of `Q` (in the `x` coordinate), sign included.
    pub m_tilde: Poly,
    /// Physical-sheet images of the `alpha_k`.
    pub alpha_images: Vec<Scalar>,
    /// Images of the zeros of `Mt` in the closed unit disk, with multiplicity.
    pub m_zero_images: Vec<(Scalar, u32)>,
    /// `y(x(z))` as a rational function of `z`.
    pub y: RatFunc,
    /// `1/(2 y(x(z)))` with fully factored denominator.
    pub inv_two_y: RatFunc,
    /// `x(z)`.
    pub x: RatFunc,
    /// `dx/dz`.
    pub x_prime: RatFunc,
}

impl OneCutCurve {
    pub fn mu(&self) -> (Scalar, Scalar) {
        let two_c = &Scalar::from_i64(2) * &self.c;
        (&self.a - &two_c, &self.a + &two_c)
    }

    pub fn x_of(&self, z: &Scalar) -> Scalar {
        self.x.eval(z)
    }

    pub fn y_of(&self, z: &Scalar) -> Scalar {
        self.y.eval(z)
    }

    /// Bergman kernel density `1/(z1 - z2)^2` with respect to `dz1 dz2`.
    pub fn bergman(&self, z1: &Scalar, z2: &Scalar) -> Scalar {
        let d = z1 - z2;
        assert!(!d.is_zero(), "Bergman kernel at coincident points; use the conjugate-point value");
        (&d * &d).recip()
    }

    /// Bergman kernel density with respect to `dx1 dx2`.
    pub fn bergman_x(&self, z1: &Scalar, z2: &Scalar) -> Scalar {
        &self.bergman(z1, z2) / &(&self.x_prime.eval(z1) * &self.x_prime.eval(z2))
    }

    /// Density of `dE_{q,qbar}(p)` with respect to `dz_p`:
    /// `1/(z_p - z_q) - 1/(z_p - 1/z_q)`.
    pub fn de_density(&self, zq: &Scalar, zp: &Scalar) -> Scalar {
        let d1 = zp - zq;
        let qinv = zq.recip();
        let d2 = zp - &qinv;
        assert!(!d1.is_zero() && !d2.is_zero(), "dE evaluated at a pole");
        &d1.recip() - &d2.recip()
    }

    /// Recursion kernel density `dE_{q,qbar}(p) / (2 y(q))`.
    pub fn recursion_kernel(&self, zq: &Scalar, zp: &Scalar) -> Scalar {
        let y = self.y_of(zq);
        assert!(!y.is_negligible(), "recursion kernel at a zero of y");
        &self.de_density(zq, zp) / &(&Scalar::from_i64(2) * &y)
    }

    /// Stable content hash of the curve (used for memo/cache keys).
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(&self.export()).expect("curve serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        hex_string(&h.finalize())
    }

    /// The JSON document of the external interface.
    pub fn export(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "a": self.a,
            "c": self.c,
            "Q_num": self.m_tilde.coeffs(),
            "Q_den_roots": self.potential.log_terms.iter().map(|(a, _)| a.clone()).collect::<Vec<_>>(),
            "potential": self.potential,
            "mode": format!("{:?}", self.mode),
        })
    }

    /// Residual report for every determining condition plus structural
    /// identities; `pass` is true when everything is negligible in the
    /// working mode.
    pub fn validate(&self) -> CurveReport {
        let mut rows = Vec::new();
        let m = self.potential.m();

        // W0 = y + V'/2 must be t0/x + O(1/x^2).
        let vp = self.potential.v_prime_rational(ZVAR);
        let vp_z = compose_with_ratfunc(&vp, &self.x);
        let w0 = &self.y + &vp_z.mul_scalar_half();
        let inv_x = self.x.recip().expect("x is nonzero");
        let g = &w0 - &inv_x.scale_by(&self.potential.t0);
        let exp = g.laurent_at_infinity(1);
        for pow in (-1..=m as i64).rev() {
            let c = exp.coeff_of_inv_power(-pow);
            rows.push((format!("asymptotic z^{}", pow), c.clone(), c.is_negligible()));
        }
        // Regularity at each alpha image.
        for (k, za) in self.alpha_images.iter().enumerate() {
            let (_, coeffs) = w0.laurent_at(za, -1);
            let res = coeffs.last().cloned().unwrap_or_else(Scalar::zero);
            rows.push((format!("regularity alpha_{}", k), res.clone(), res.is_negligible()));
        }
        // Sheet parity: y(1/z) + y(z) = 0.
        let parity = &self.y.subst_recip() + &self.y;
        let parity_res = if parity.is_zero() {
            Scalar::zero()
        } else {
            parity.eval(&Scalar::rat(7, 3))
        };
        rows.push(("involution parity of y".into(), parity_res.clone(), parity_res.is_negligible()));

        CurveReport { rows }
    }
}

#[derive(Debug)]
pub struct CurveReport {
    /// `(condition, residual, pass)` rows.
    pub rows: Vec<(String, Scalar, bool)>,
}

impl CurveReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|(_, _, p)| *p)
    }
}

impl fmt::Display for CurveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, res, pass) in &self.rows {
            writeln!(f, "{} {:30} residual = {}", if *pass { "PASS" } else { "FAIL" }, name, res)?;
        }
        Ok(())
    }
}

impl RatFunc {
    fn mul_scalar_half(&self) -> RatFunc {
        self.scale_by(&Scalar::rat(1, 2))
    }

    pub fn scale_by(&self, s: &Scalar) -> RatFunc {
        RatFunc { num: self.num.scale(s), den: self.den.clone() }
    }
}

/// Compose a rational function of `x` with the rational map `x(z)`,
/// producing a rational function of `z`. Denominator factors of the input
/// must be linear `(x - alpha)`; their `z`-factorization uses the curve
/// images, so callers pass the already-built factors instead. This helper
/// is for polynomials and for `V'` whose poles are at the `alpha_k`.
fn compose_with_ratfunc(f: &RatFunc, x: &RatFunc) -> RatFunc {
    // numerator: Horner
    let mut num = RatFunc::constant(ZVAR, Scalar::zero());
    for c in f.num.coeffs().iter().rev() {
        num = &(&num * x) + &RatFunc::constant(ZVAR, c.clone());
    }
    let mut acc = num;
    for (fac, e) in &f.den {
        assert_eq!(fac.degree(), Some(1), "only linear x-factors compose");
        let alpha = -fac.coeff(0);
        let shifted = x - &RatFunc::constant(ZVAR, alpha);
        for _ in 0..*e {
            acc = acc.div(&shifted).expect("x - alpha is nonzero");
        }
    }
    acc
}

/// Solve the one-cut conditions for a validated potential.
pub fn solve_one_cut(pot: &Potential, mode: CurveMode) -> Result<OneCutCurve, CurveError> {
    pot.validate().map_err(CurveError::InvalidPotential)?;
    match mode {
        CurveMode::ClosedForm => solve_closed_form(pot),
        CurveMode::Newton(prec) => solve_newton(pot, prec),
        CurveMode::Series => solve_series(pot),
    }
}

fn quadratic_seed(pot: &Potential) -> Result<(Scalar, Scalar), CurveError> {
    // For V = t1 x + t2 x^2: a = -t1/(2 t2), c = sqrt(t0/(2 t2)).
    let t1 = pot.couplings.first().cloned().unwrap_or_else(Scalar::zero);
    let t2 = pot.couplings.get(1).cloned().unwrap_or_else(Scalar::zero);
    if t2.is_zero() {
        return Err(CurveError::InvalidPotential(
            "quadratic coupling t2 must be nonzero for the closed-form/seed construction".into(),
        ));
    }
    let two_t2 = &Scalar::from_i64(2) * &t2;
    let a = -&(&t1 / &two_t2);
    let c2 = &pot.t0 / &two_t2;
    let c = c2.sqrt().ok_or_else(|| {
        CurveError::NeedsNumericMode(format!(
            "c^2 = {} has no square root in this scalar mode; use newton-numeric or series",
            c2
        ))
    })?;
    Ok((a, c))
}

fn solve_closed_form(pot: &Potential) -> Result<OneCutCurve, CurveError> {
    if pot.m() != 1 || pot.n_logs() != 0 {
        return Err(CurveError::NeedsNumericMode(
            "closed form covers the quadratic family without logarithmic terms".into(),
        ));
    }
    let (a, c) = quadratic_seed(pot)?;
    let ev = eval_conditions(pot, &Jet::konst(a.clone()), &Jet::konst(c.clone()))?;
    debug_assert!(ev.f[0].v.is_zero() && ev.f[1].v.is_zero());
    build_curve(pot, CurveMode::ClosedForm, a, c, &ev)
}

fn solve_newton(pot: &Potential, prec: u32) -> Result<OneCutCurve, CurveError> {
    let t1 = pot.couplings.first().cloned().unwrap_or_else(Scalar::zero);
    let t2 = pot.couplings.get(1).cloned().unwrap_or_else(Scalar::zero);
    let (a0, c0) = if t2.is_zero() {
        (Scalar::float(prec, 0.0), Scalar::float(prec, 1.0))
    } else {
        let two_t2 = &Scalar::from_i64(2) * &t2;
        let a = (-&(&t1 / &two_t2)).to_float(prec);
        let c2 = (&pot.t0 / &two_t2).to_float(prec);
        (Scalar::Float(a), Scalar::Float(c2).sqrt().unwrap())
    };
    let (a, c, ev) = newton_iterate(pot, a0, c0, 80, |f| f.is_negligible())?;
    guard_radius(&c, prec)?;
    build_curve(pot, CurveMode::Newton(prec), a, c, &ev)
}

fn solve_series(pot: &Potential) -> Result<OneCutCurve, CurveError> {
    // The constant part of the couplings must be a solvable quadratic;
    // higher couplings enter at positive order in the deformation parameter.
    let order = pot
        .couplings
        .iter()
        .chain(std::iter::once(&pot.t0))
        .find_map(|s| match s {
            Scalar::Series(ser) => Some(ser.order),
            _ => None,
        })
        .ok_or_else(|| {
            CurveError::InvalidPotential("series mode needs at least one series coupling".into())
        })?;
    for (i, ts) in pot.couplings.iter().enumerate() {
        if i >= 2 {
            if let Some(c0) = ts.constant_part() {
                if !c0.is_zero() {
                    return Err(CurveError::NeedsNumericMode(
                        "series mode perturbs a quadratic background; higher couplings must vanish at order zero"
                            .into(),
                    ));
                }
            }
        }
    }
    let base_pot = Potential {
        couplings: pot
            .couplings
            .iter()
            .take(2)
            .map(|s| Scalar::Rat(s.constant_part().expect("exact constant part").clone()))
            .collect(),
        log_terms: Vec::new(),
        t0: Scalar::Rat(pot.t0.constant_part().expect("exact t0").clone()),
    };
    if !pot.log_terms.is_empty() {
        return Err(CurveError::NeedsNumericMode(
            "series mode does not support logarithmic terms; use newton-numeric".into(),
        ));
    }
    let (a0, c0) = quadratic_seed(&base_pot)?;
    let promote = |s: Scalar| match s {
        Scalar::Rat(r) => Scalar::Series(crate::scalar::Series::constant(r, order)),
        other => other,
    };
    let a0 = promote(a0);
    let c0 = promote(c0);
    // Newton doubles the correct t-adic order each step.
    let steps = (usize::BITS - order.leading_zeros()) as usize + 2;
    let (a, c, ev) = newton_iterate(pot, a0, c0, steps, |f| f.is_zero())?;
    build_curve(pot, CurveMode::Series, a, c, &ev)
}

fn newton_iterate(
    pot: &Potential,
    mut a: Scalar,
    mut c: Scalar,
    max_steps: usize,
    converged: impl Fn(&Scalar) -> bool,
) -> Result<(Scalar, Scalar, ConditionEval), CurveError> {
    for _ in 0..max_steps {
        let ja = Jet { v: a.clone(), da: Scalar::one(), dc: Scalar::zero() };
        let jc = Jet { v: c.clone(), da: Scalar::zero(), dc: Scalar::one() };
        let ev = eval_conditions(pot, &ja, &jc)?;
        let [f1, f2] = &ev.f;
        if converged(&f1.v) && converged(&f2.v) {
            return Ok((a, c, ev));
        }
        // 2x2 Newton step
        let det = &(&f1.da * &f2.dc) - &(&f1.dc * &f2.da);
        if det.is_negligible() {
            return Err(CurveError::NewtonDiverged("singular Jacobian".into()));
        }
        let det_inv = det.recip();
        let da = &(&(&f1.v * &f2.dc) - &(&f2.v * &f1.dc)) * &det_inv;
        let dc = &(&(&f2.v * &f1.da) - &(&f1.v * &f2.da)) * &det_inv;
        a = &a - &da;
        c = &c - &dc;
    }
    // final check
    let ja = Jet { v: a.clone(), da: Scalar::one(), dc: Scalar::zero() };
    let jc = Jet { v: c.clone(), da: Scalar::zero(), dc: Scalar::one() };
    let ev = eval_conditions(pot, &ja, &jc)?;
    if converged(&ev.f[0].v) && converged(&ev.f[1].v) {
        return Ok((a, c, ev));
    }
    Err(CurveError::NewtonDiverged(format!(
        "residuals {} and {} after iteration budget",
        ev.f[0].v, ev.f[1].v
    )))
}

fn guard_radius(c: &Scalar, prec: u32) -> Result<(), CurveError> {
    if let Scalar::Float(f) = c {
        let quarter = rug::Float::with_val(prec, rug::Float::i_exp(1, -(prec as i32) / 4));
        if *f.0.clone().abs().real() < quarter {
            return Err(CurveError::BranchPointCollision(format!(
                "|c| = {} below 2^-P/4; the cut degenerates (fold double points into the extra polynomial)",
                c
            )));
        }
    }
    Ok(())
}

fn build_curve(
    pot: &Potential,
    mode: CurveMode,
    a: Scalar,
    c: Scalar,
    ev: &ConditionEval,
) -> Result<OneCutCurve, CurveError> {
    if c.is_negligible() {
        return Err(CurveError::BranchPointCollision("c = 0".into()));
    }
    let m_tilde = Poly::from_coeffs(XVAR, ev.m_tilde.iter().map(|j| j.v.clone()).collect());
    let alpha_images: Vec<Scalar> = ev.alpha_images.iter().map(|j| j.v.clone()).collect();

    // x(z) = (c z^2 + a z + c)/z
    let x = RatFunc::new(
        Poly::from_coeffs(ZVAR, vec![c.clone(), a.clone(), c.clone()]),
        vec![(Poly::ident(ZVAR), 1)],
    );
    // x'(z) = c (1 - 1/z^2) = c (z^2 - 1)/z^2
    let x_prime = RatFunc::new(
        Poly::from_coeffs(ZVAR, vec![-c.clone(), Scalar::zero(), c.clone()]),
        vec![(Poly::ident(ZVAR), 2)],
    );
    // c (z - 1/z)
    let czmz = RatFunc::new(
        Poly::from_coeffs(ZVAR, vec![-c.clone(), Scalar::zero(), c.clone()]),
        vec![(Poly::ident(ZVAR), 1)],
    );

    // Mt(x(z)) by Horner.
    let mut m_on_curve = RatFunc::constant(ZVAR, Scalar::zero());
    for coeff in m_tilde.coeffs().iter().rev() {
        m_on_curve = &(&m_on_curve * &x) + &RatFunc::constant(ZVAR, coeff.clone());
    }
    if m_tilde.is_zero() {
        return Err(CurveError::InvalidPotential("extra polynomial vanished".into()));
    }

    // prod_k (x(z) - alpha_k) = prod_k c (z - za_k)(z - 1/za_k)/z
    let mut prod_x_alpha = RatFunc::one(ZVAR);
    for za in &alpha_images {
        let num = Poly::from_coeffs(
            ZVAR,
            vec![c.clone(), -(&c * &(za + &za.recip())), c.clone()],
        );
        let f = RatFunc::new(num, vec![(Poly::ident(ZVAR), 1)]);
        prod_x_alpha = &prod_x_alpha * &f;
    }

    // y = Mt(x) c(z - 1/z) / prod(x - alpha)
    let y = (&m_on_curve * &czmz)
        .div(&prod_x_alpha)
        .expect("alpha product nonzero");

    // 1/(2y) = prod(x - alpha) / (2 c(z - 1/z) Mt(x)); the first factor is
    // z/(2c (z-1)(z+1)).
    let inv_m = invert_m_on_curve(&m_on_curve, mode)?;
    let half_c_inv = (&Scalar::from_i64(2) * &c).recip();
    let inv_czmz = RatFunc::new(
        Poly::from_coeffs(ZVAR, vec![Scalar::zero(), half_c_inv]),
        vec![
            (Poly::linear_root(ZVAR, &Scalar::one()), 1),
            (Poly::linear_root(ZVAR, &(-Scalar::one())), 1),
        ],
    );
    let inv_two_y = &(&inv_czmz * &inv_m) * &prod_x_alpha;

    // images of Mt zeros inside the closed unit disk, read from inv_two_y
    let mut m_zero_images = Vec::new();
    for (f, e) in &inv_two_y.den {
        if f.degree() == Some(1) {
            let root = -f.coeff(0);
            if !root.is_zero()
                && !(&root - &Scalar::one()).is_zero()
                && !(&root + &Scalar::one()).is_zero()
                && root.abs_cmp_one() != std::cmp::Ordering::Greater
            {
                m_zero_images.push((root, *e));
            }
        }
    }

    let curve = OneCutCurve {
        potential: pot.clone(),
        mode,
        a,
        c,
        m_tilde,
        alpha_images,
        m_zero_images,
        y,
        inv_two_y,
        x,
        x_prime,
    };
    Ok(curve)
}

/// Invert `Mt(x(z))` into a rational function with factored denominator.
fn invert_m_on_curve(m_on_curve: &RatFunc, mode: CurveMode) -> Result<RatFunc, CurveError> {
    let num = &m_on_curve.num;
    let var = ZVAR;
    if num.degree() == Some(0) || num.degree().is_none() {
        return m_on_curve
            .recip()
            .map_err(|_| CurveError::InvalidPotential("extra polynomial vanished".into()));
    }
    match mode {
        CurveMode::ClosedForm => {
            // rational roots or bust
            let roots = rational_roots(num).ok_or_else(|| {
                CurveError::NeedsNumericMode(format!(
                    "the extra polynomial {} does not factor over the rationals; use newton-numeric or series",
                    num
                ))
            })?;
            let den: Vec<(Poly, u32)> = roots
                .iter()
                .map(|(r, e)| (Poly::linear_root(var, r), *e))
                .collect();
            let lead = num.leading().unwrap().clone();
            // denominator z-powers of Mt(x(z)) become numerator powers
            let mut out_num = Poly::constant(var, lead.recip());
            for (f, e) in &m_on_curve.den {
                out_num = &out_num * &f.pow(*e);
            }
            Ok(RatFunc::new(out_num, den))
        }
        CurveMode::Series => {
            // split off the unit coefficient at the center power
            let order = num
                .coeffs()
                .iter()
                .find_map(|s| match s {
                    Scalar::Series(ser) => Some(ser.order),
                    _ => None,
                })
                .unwrap_or(0);
            let d_m: u32 = m_on_curve.den.iter().map(|(f, e)| {
                assert_eq!(f.degree(), Some(1));
                *e
            }).sum();
            let center = d_m as usize;
            let l0 = num.coeff(center);
            let unit_ok = match &l0 {
                Scalar::Series(s) => !s.coeffs[0].is_zero(),
                s => !s.is_zero(),
            };
            if !unit_ok {
                return Err(CurveError::NeedsNumericMode(
                    "series inversion needs a unit center coefficient (Gaussian background)".into(),
                ));
            }
            for (i, co) in num.coeffs().iter().enumerate() {
                if i != center {
                    let c0_nonzero = co.constant_part().map_or(false, |r| !r.is_zero());
                    if c0_nonzero {
                        return Err(CurveError::NeedsNumericMode(
                            "series inversion needs off-center coefficients of positive order".into(),
                        ));
                    }
                }
            }
            // kappa = Mt(x(z))/l0 - 1, nilpotent to the truncation order
            let l0_inv = l0.recip();
            let scaled = m_on_curve.scale_by(&l0_inv);
            let kappa = &scaled - &RatFunc::one(var);
            let mut acc = RatFunc::one(var);
            let mut pw = RatFunc::one(var);
            for _ in 0..order {
                pw = &pw * &kappa;
                if pw.is_zero() {
                    break;
                }
                acc = &acc + &(-&pw);
                // alternating signs: (1+kappa)^-1 = sum (-kappa)^n
                pw = -&pw;
            }
            Ok(acc.scale_by(&l0_inv))
        }
        CurveMode::Newton(prec) => {
            let roots = cfloat::poly_roots(num, prec);
            let den: Vec<(Poly, u32)> = roots
                .iter()
                .map(|r| (Poly::linear_root(var, r), 1u32))
                .collect();
            let lead = num.leading().unwrap().clone();
            let mut out_num = Poly::constant(var, lead.recip());
            for (f, e) in &m_on_curve.den {
                out_num = &out_num * &f.pow(*e);
            }
            Ok(RatFunc::new(out_num, den))
        }
    }
}

/// All rational roots with multiplicities; `None` unless the polynomial
/// splits completely over the rationals.
fn rational_roots(p: &Poly) -> Option<Vec<(Scalar, u32)>> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, Zero};
    let mut work = p.clone();
    let mut out: Vec<(Scalar, u32)> = Vec::new();
    while let Some(d) = work.degree() {
        if d == 0 {
            break;
        }
        // integer-normalize
        let mut lcm = BigInt::one();
        for c in work.coeffs() {
            let r = c.as_rat()?;
            lcm = num_integer::lcm(lcm, r.denom().clone());
        }
        let ints: Vec<BigInt> = work
            .coeffs()
            .iter()
            .map(|c| {
                let r = c.as_rat().unwrap();
                r.numer() * (&lcm / r.denom())
            })
            .collect();
        // candidate roots p/q: p | a0, q | lead (after stripping zero roots)
        let mut root: Option<BigRational> = None;
        if ints[0].is_zero() {
            root = Some(BigRational::zero());
        } else {
            let a0 = ints[0].abs();
            let an = ints.last().unwrap().abs();
            let dp = divisors(&a0);
            let dq = divisors(&an);
            'outer: for pd in &dp {
                for qd in &dq {
                    for sign in [1i64, -1] {
                        let cand = BigRational::new(pd * BigInt::from(sign), qd.clone());
                        let v = work.eval(&Scalar::Rat(cand.clone()));
                        if v.is_zero() {
                            root = Some(cand);
                            break 'outer;
                        }
                    }
                }
            }
        }
        let r = Scalar::Rat(root?);
        let mut mult = 0u32;
        while work.eval(&r).is_zero() {
            work = work.exact_div_or_deflate(&r)?;
            mult += 1;
            if work.degree().is_none() {
                break;
            }
        }
        match out.iter_mut().find(|(s, _)| *s == r) {
            Some((_, e)) => *e += mult,
            None => out.push((r, mult)),
        }
    }
    Some(out)
}

fn divisors(n: &num_bigint::BigInt) -> Vec<num_bigint::BigInt> {
    use num_bigint::BigInt;
    use num_traits::{One, Zero};
    // small-polynomial context; trial division is plenty
    let mut out = Vec::new();
    let mut d = BigInt::one();
    let limit = BigInt::from(100000u32);
    while &d * &d <= *n && d <= limit {
        if (n % &d).is_zero() {
            out.push(d.clone());
            out.push(n / &d);
        }
        d += 1;
    }
    out.sort();
    out.dedup();
    out
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{:02x}", b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Series;
    use num_rational::BigRational;
    use num_traits::One;

    #[test]
    fn gaussian_closed_form() {
        let pot = Potential::gaussian(Scalar::one());
        let curve = solve_one_cut(&pot, CurveMode::ClosedForm).unwrap();
        assert_eq!(curve.a, Scalar::zero());
        assert_eq!(curve.c, Scalar::one());
        let (mu1, mu2) = curve.mu();
        assert_eq!(mu1, Scalar::from_i64(-2));
        assert_eq!(mu2, Scalar::from_i64(2));
        // y(z) = -(1/2)(z - 1/z)
        let z = Scalar::from_i64(3);
        assert_eq!(curve.y_of(&z), Scalar::rat(-4, 3)); // -(1/2)(3 - 1/3)
        assert!(curve.validate().pass());
    }

    #[test]
    fn gaussian_w0_is_inverse_z() {
        let pot = Potential::gaussian(Scalar::one());
        let curve = solve_one_cut(&pot, CurveMode::ClosedForm).unwrap();
        let vp = curve.potential.v_prime_rational(ZVAR);
        let vp_z = compose_with_ratfunc(&vp, &curve.x);
        let w0 = &curve.y + &vp_z.mul_scalar_half();
        let expect = RatFunc::new(Poly::one(ZVAR), vec![(Poly::ident(ZVAR), 1)]);
        assert!(w0.equals(&expect));
    }

    #[test]
    fn gaussian_dE_and_kernel_examples() {
        let pot = Potential::gaussian(Scalar::one());
        let curve = solve_one_cut(&pot, CurveMode::ClosedForm).unwrap();
        // dE density at zq = 2, zp = 3: 1/(3-2) - 1/(3-1/2) = 3/5
        let de = curve.de_density(&Scalar::from_i64(2), &Scalar::from_i64(3));
        assert_eq!(de, Scalar::rat(3, 5));
        // kernel: (3/5)/(2 * (-(1/2))(2 - 1/2)) = -2/5
        let k = curve.recursion_kernel(&Scalar::from_i64(2), &Scalar::from_i64(3));
        assert_eq!(k, Scalar::rat(-2, 5));
        // Bergman: z1=3, z2=2 -> 1
        assert_eq!(curve.bergman(&Scalar::from_i64(3), &Scalar::from_i64(2)), Scalar::one());
    }

    #[test]
    fn de_antisymmetric_under_conjugation() {
        let pot = Potential::gaussian(Scalar::one());
        let curve = solve_one_cut(&pot, CurveMode::ClosedForm).unwrap();
        let zq = Scalar::rat(7, 3);
        let zp = Scalar::from_i64(5);
        let lhs = curve.de_density(&zq.recip(), &zp);
        let rhs = -curve.de_density(&zq, &zp);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn de_matches_x_space_formula() {
        // dE in x-space: sqrt((q-mu1)(q-mu2)) / ((p-q) sqrt((p-mu1)(p-mu2))) per dp.
        // In z: equals de_density / x'(z_p).
        let pot = Potential::gaussian(Scalar::rat(9, 4)); // c = 3/2, rational
        let curve = solve_one_cut(&pot, CurveMode::ClosedForm).unwrap();
        for (zq, zp) in [
            (Scalar::from_i64(2), Scalar::from_i64(3)),
            (Scalar::rat(5, 2), Scalar::from_i64(7)),
            (Scalar::rat(-7, 2), Scalar::rat(13, 3)),
        ] {
            let q = curve.x_of(&zq);
            let p = curve.x_of(&zp);
            // sqrt((x-mu1)(x-mu2)) = c(z - 1/z) on the physical sheet
            let sq = |z: &Scalar| &curve.c * &(z - &z.recip());
            let xspace = &sq(&zq) / &(&(&p - &q) * &sq(&zp));
            let zspace = &curve.de_density(&zq, &zp) / &curve.x_prime.eval(&zp);
            assert_eq!(xspace, zspace);
        }
    }

    #[test]
    fn quartic_series_curve() {
        // V = x^2/2 + t x^4 at K = 2: c^2 = 1 - 12t + 288 t^2 (t0 = 1),
        // c = 1 - 6t + 126 t^2.
        let order = 2;
        let t = Scalar::Series(Series::param(order));
        let pot = Potential::quartic(
            Scalar::Series(Series::constant(BigRational::one(), order)),
            t,
        );
        let curve = solve_one_cut(&pot, CurveMode::Series).unwrap();
        match &curve.c {
            Scalar::Series(s) => {
                assert_eq!(s.coeffs[0], BigRational::one());
                assert_eq!(s.coeffs[1], BigRational::from_integer((-6).into()));
                assert_eq!(s.coeffs[2], BigRational::from_integer(126.into()));
            }
            other => panic!("expected series c, got {}", other),
        }
        assert!(curve.a.is_zero());
        assert!(curve.validate().pass());
    }

    #[test]
    fn log_term_curve_numeric() {
        let mut pot = Potential::gaussian(Scalar::one());
        pot.log_terms.push((Scalar::from_i64(3), Scalar::rat(1, 2)));
        let curve = solve_one_cut(&pot, CurveMode::Newton(192)).unwrap();
        let report = curve.validate();
        assert!(report.pass(), "{}", report);
    }

    #[test]
    fn perturbed_curve_fails_validation() {
        // Solve a curve with the wrong t0, then validate against t0 = 1:
        // the 1/z asymptotic condition must flag the radius mismatch.
        let mut curve =
            solve_one_cut(&Potential::gaussian(Scalar::rat(121, 100)), CurveMode::ClosedForm)
                .unwrap();
        curve.potential.t0 = Scalar::one();
        let report = curve.validate();
        assert!(!report.pass());
    }
}
