//! Numeric helpers on big floats: polynomial root finding and the two
//! quadratures used by the free-energy terms (periodic trapezoid on contour
//! circles, tanh-sinh on segments with endpoint singularities).

use crate::poly::Poly;
use crate::scalar::Scalar;
use rug::ops::CompleteRound;
use rug::{Complex, Float};

pub fn to_complex(s: &Scalar, prec: u32) -> Complex {
    match s {
        Scalar::Float(f) => Complex::with_val(prec, &f.0),
        Scalar::Rat(_) => Complex::with_val(prec, &s.to_float(prec).0),
        Scalar::Series(_) => panic!("series scalar has no complex value"),
    }
}

/// All complex roots of a polynomial by the Aberth–Ehrlich iteration.
/// The polynomial degree is small here (twice the potential degree), so a
/// plain simultaneous iteration from perturbed circle points converges fast.
pub fn poly_roots(p: &Poly, prec: u32) -> Vec<Scalar> {
    let d = match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(d) => d,
    };
    let coeffs: Vec<Complex> = p.coeffs().iter().map(|c| to_complex(c, prec)).collect();
    let eval = |z: &Complex| -> (Complex, Complex) {
        // value and derivative by Horner
        let mut v = Complex::with_val(prec, 0);
        let mut dv = Complex::with_val(prec, 0);
        for c in coeffs.iter().rev() {
            dv = (&dv * z).complete((prec, prec)) + &v;
            v = (&v * z).complete((prec, prec)) + c;
        }
        (v, dv)
    };
    // initial guesses: non-symmetric ring to break degeneracies
    let mut roots: Vec<Complex> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.3754) / d as f64;
            let r = 0.6 + 0.4 * ((k % 5) as f64) / 5.0 + 0.5;
            Complex::with_val(prec, (r * theta.cos(), r * theta.sin()))
        })
        .collect();
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 16));
    for _ in 0..200 {
        let mut moved = Float::with_val(prec, 0);
        let snapshot = roots.clone();
        for i in 0..d {
            let (v, dv) = eval(&roots[i]);
            if v.is_zero() {
                continue;
            }
            let newton = if dv.is_zero() {
                Complex::with_val(prec, (1e-3, 1e-3))
            } else {
                (&v / &dv).complete((prec, prec))
            };
            // Aberth correction
            let mut s = Complex::with_val(prec, 0);
            for (j, r) in snapshot.iter().enumerate() {
                if j != i {
                    let diff = (&roots[i] - r).complete((prec, prec));
                    if !diff.is_zero() {
                        s += diff.recip();
                    }
                }
            }
            let denom = Complex::with_val(prec, 1) - (&newton * &s).complete((prec, prec));
            let step = if denom.is_zero() { newton } else { (&newton / &denom).complete((prec, prec)) };
            let st = step.clone().abs().real().clone();
            if st > moved {
                moved = st;
            }
            roots[i] -= step;
        }
        if moved < tol {
            break;
        }
    }
    roots
        .into_iter()
        .map(|r| Scalar::Float(crate::scalar::BigFloat(r)))
        .collect()
}

/// Trapezoid rule on the circle `|z| = radius` for a smooth periodic
/// integrand; spectrally accurate for integrands analytic in an annulus.
/// Computes `(1/(2 pi i)) * contour integral of f(z) dz` as the average of
/// `f(z) * z` over uniform angles.
pub fn circle_average(
    prec: u32,
    radius: &Float,
    nodes: usize,
    mut f: impl FnMut(&Complex) -> Complex,
) -> Complex {
    let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
    let mut acc = Complex::with_val(prec, 0);
    for k in 0..nodes {
        let theta = two_pi.clone() * (k as u32) / (nodes as u32);
        let (s, c) = theta.sin_cos(Float::new(prec));
        let z = Complex::with_val(prec, (c, s)) * radius;
        let fz = f(&z);
        acc += fz * &z;
    }
    acc / (nodes as u32)
}

/// Tanh-sinh quadrature of `f` on `[-1, 1]`, robust to integrable endpoint
/// singularities. Node spacing is `h = 2^-level`; the node count grows
/// linearly with `2^level` and the error decays roughly like
/// `exp(-c 2^level)`.
pub fn tanh_sinh(prec: u32, level: u32, mut f: impl FnMut(&Float) -> Complex) -> Complex {
    let pi_half = Float::with_val(prec, rug::float::Constant::Pi) / 2u32;
    let h = Float::with_val(prec, 1) >> level;
    // Past this point the transformed nodes are indistinguishable from the
    // endpoints at the working precision; the reachable error floor is
    // about 2^(-prec/2).
    let t_max = (prec as f64 * std::f64::consts::LN_2 / std::f64::consts::PI).asinh() * 0.98;
    let k_max = (t_max / h.to_f64()).ceil() as i64;
    let mut total = Complex::with_val(prec, 0);
    for k in -k_max..=k_max {
        let t = h.clone() * Float::with_val(prec, k);
        let sinh_t = t.clone().sinh();
        let cosh_t = t.cosh();
        let u = pi_half.clone() * sinh_t;
        let x = u.clone().tanh();
        let cosh_u = u.cosh();
        let w = pi_half.clone() * cosh_t / (cosh_u.clone() * cosh_u);
        if w.is_zero() {
            continue;
        }
        total += f(&x) * w;
    }
    total * h
}

/// Integrate `f` on the segment `[a, b]` by tanh-sinh.
pub fn segment_integral(
    prec: u32,
    levels: u32,
    a: &Float,
    b: &Float,
    mut f: impl FnMut(&Float) -> Complex,
) -> Complex {
    let mid = Float::with_val(prec, a + b) / 2u32;
    let half = Float::with_val(prec, b - a) / 2u32;
    let g = |x: &Float| {
        let u = mid.clone() + (half.clone() * x);
        f(&u)
    };
    let mut g = g;
    tanh_sinh(prec, levels, |x| g(x)) * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Var;

    #[test]
    fn roots_of_simple_quadratic() {
        // z^2 - 5z + 6 = (z-2)(z-3)
        let p = Poly::from_coeffs(
            Var(0),
            vec![Scalar::from_i64(6), Scalar::from_i64(-5), Scalar::one()],
        );
        let mut roots: Vec<f64> = poly_roots(&p, 128).iter().map(|r| r.to_f64()).collect();
        roots.sort_by(f64::total_cmp);
        assert!((roots[0] - 2.0).abs() < 1e-25);
        assert!((roots[1] - 3.0).abs() < 1e-25);
    }

    #[test]
    fn roots_complex_pair() {
        // z^2 + 1
        let p = Poly::from_coeffs(Var(0), vec![Scalar::one(), Scalar::zero(), Scalar::one()]);
        let roots = poly_roots(&p, 128);
        for r in roots {
            if let Scalar::Float(f) = r {
                assert!(f.0.clone().abs().real().to_f64() - 1.0 < 1e-25);
                assert!(f.0.real().to_f64().abs() < 1e-25);
            }
        }
    }

    #[test]
    fn circle_average_picks_residue() {
        // f = 1/z: (1/2pi i) \oint dz/z = 1
        let prec = 128;
        let r = Float::with_val(prec, 1.0);
        let v = circle_average(prec, &r, 64, |z| z.clone().recip());
        assert!((v.real().to_f64() - 1.0).abs() < 1e-14);
        assert!(v.imag().to_f64().abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_integrates_sqrt_singularity() {
        // int_{-1}^{1} 1/sqrt(1-x^2) dx = pi
        let prec = 320;
        let v = tanh_sinh(prec, 8, |x| {
            let one = Float::with_val(prec, 1);
            let s = (one - x.clone() * x).sqrt();
            Complex::with_val(prec, s.recip())
        });
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        assert!((v.real().clone() - pi).abs().to_f64() < 1e-30);
    }
}
