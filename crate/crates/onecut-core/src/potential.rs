//! Model definition: polynomial couplings, logarithmic terms, and the
//! normalized eigenvalue number `t0`.

use crate::poly::{Poly, Var};
use crate::ratfunc::RatFunc;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// The potential `V(x) = sum_{s>=1} t_s x^s + sum_k gamma_k log|x - alpha_k|`.
///
/// The rational derivative entering the curve construction is
/// `V'(x) = Vhat'(x) - sum_k gamma_k / (x - alpha_k)`; the log terms carry a
/// positive weight in the integrand, which flips their sign in `V'`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Potential {
    /// `couplings[i]` is `t_{i+1}`; the last entry must be nonzero.
    pub couplings: Vec<Scalar>,
    /// `(alpha_k, gamma_k)` pairs.
    pub log_terms: Vec<(Scalar, Scalar)>,
    /// Normalized eigenvalue number, positive.
    pub t0: Scalar,
}

impl Potential {
    /// `V = x^2/2` with the given `t0`.
    pub fn gaussian(t0: Scalar) -> Self {
        Potential {
            couplings: vec![Scalar::zero(), Scalar::rat(1, 2)],
            log_terms: Vec::new(),
            t0,
        }
    }

    /// `V = x^2/2 + t x^4`.
    pub fn quartic(t0: Scalar, t: Scalar) -> Self {
        Potential {
            couplings: vec![Scalar::zero(), Scalar::rat(1, 2), Scalar::zero(), t],
            log_terms: Vec::new(),
            t0,
        }
    }

    /// Degree bookkeeping: `Vhat` has degree `m + 1`.
    pub fn m(&self) -> usize {
        self.couplings.len() - 1
    }

    pub fn n_logs(&self) -> usize {
        self.log_terms.len()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.couplings.len() < 2 {
            return Err("potential must have degree at least 2".into());
        }
        if self.couplings.last().unwrap().is_zero() {
            return Err("leading coupling t_{m+1} must be nonzero".into());
        }
        if self.t0.is_zero() {
            return Err("t0 must be nonzero".into());
        }
        for (i, (ai, _)) in self.log_terms.iter().enumerate() {
            for (aj, _) in self.log_terms.iter().skip(i + 1) {
                if (ai - aj).is_zero() {
                    return Err(format!(
                        "log-term positions must be pairwise distinct (alpha = {})",
                        ai
                    ));
                }
            }
        }
        Ok(())
    }

    /// `Vhat(x)` as a polynomial (no constant term).
    pub fn v_hat(&self, var: Var) -> Poly {
        let mut coeffs = vec![Scalar::zero()];
        coeffs.extend(self.couplings.iter().cloned());
        Poly::from_coeffs(var, coeffs)
    }

    /// `Vhat'(x)`.
    pub fn v_hat_prime(&self, var: Var) -> Poly {
        self.v_hat(var).derivative()
    }

    /// The rational derivative `Vhat'(x) - sum_k gamma_k/(x - alpha_k)`.
    pub fn v_prime_rational(&self, var: Var) -> RatFunc {
        let mut acc = RatFunc::from_poly(self.v_hat_prime(var));
        for (alpha, gamma) in &self.log_terms {
            let term = RatFunc::new(
                Poly::constant(var, -gamma.clone()),
                vec![(Poly::linear_root(var, alpha), 1)],
            );
            acc = &acc + &term;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_derivative_is_x() {
        let p = Potential::gaussian(Scalar::one());
        let vp = p.v_hat_prime(Var(0));
        assert_eq!(vp, Poly::ident(Var(0)));
        assert!(p.validate().is_ok());
    }

    #[test]
    fn log_terms_enter_with_negative_sign() {
        let mut p = Potential::gaussian(Scalar::one());
        p.log_terms.push((Scalar::from_i64(3), Scalar::rat(1, 2)));
        let vp = p.v_prime_rational(Var(0));
        // V'(4) = 4 - (1/2)/(4-3) = 7/2
        assert_eq!(vp.eval(&Scalar::from_i64(4)), Scalar::rat(7, 2));
    }

    #[test]
    fn duplicate_alphas_rejected() {
        let mut p = Potential::gaussian(Scalar::one());
        p.log_terms.push((Scalar::from_i64(3), Scalar::one()));
        p.log_terms.push((Scalar::from_i64(3), Scalar::rat(1, 4)));
        assert!(p.validate().is_err());
    }
}
