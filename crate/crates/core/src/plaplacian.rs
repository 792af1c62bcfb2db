//! The scalar p-Laplace map `phi(t) = t |t|^(p-2)`, its derivative and inverse.

use crate::error::{Error, Result};

/// The p-Laplacian exponent, `p > 1`, together with `q = p / (p - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    p: f64,
    q: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidExponent(p));
        }
        let q = if p == 2.0 { 2.0 } else { p / (p - 1.0) };
        Ok(Self { p, q })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `p / (p - 1)`, the growth exponent of `alpha - u` near the maximum.
    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// `phi(t) = t |t|^(p-2)`. Odd, strictly increasing, `phi(0) = 0`.
    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let mag = t.abs().powf(self.p - 1.0);
        if t < 0.0 {
            -mag
        } else {
            mag
        }
    }

    /// `phi'(t) = (p - 1) |t|^(p-2)`.
    ///
    /// At `t = 0` this is the pointwise limit: 0 for `p > 2`, 1 for `p = 2`;
    /// for `p < 2` the limit is infinite and an error is returned.
    pub fn phi_prime(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return if self.p > 2.0 {
                Ok(0.0)
            } else if self.p == 2.0 {
                Ok(1.0)
            } else {
                Err(Error::PhiPrimeDomain(self.p))
            };
        }
        Ok(self.phi_prime_nonzero(t))
    }

    /// `phi'(t)` for `t != 0`; no domain check.
    #[inline]
    pub fn phi_prime_nonzero(&self, t: f64) -> f64 {
        if self.p == 2.0 {
            1.0
        } else {
            (self.p - 1.0) * t.abs().powf(self.p - 2.0)
        }
    }

    /// `phi^{-1}(s) = sign(s) |s|^(1/(p-1))`.
    #[inline]
    pub fn phi_inv(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let mag = s.abs().powf(1.0 / (self.p - 1.0));
        if s < 0.0 {
            -mag
        } else {
            mag
        }
    }

    /// `phi'(phi^{-1}(m)) = (p - 1) |m|^((p-2)/(p-1))`, written in terms of the flux.
    #[inline]
    pub fn phi_prime_of_flux(&self, m: f64) -> f64 {
        if self.p == 2.0 {
            1.0
        } else {
            (self.p - 1.0) * m.abs().powf((self.p - 2.0) / (self.p - 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn rejects_p_at_most_one() {
        assert!(Exponent::new(1.0).is_err());
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert_eq!(e(2.0).q(), 2.0);
        assert!((e(3.0).q() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(e(3.0).phi(1.0), 1.0);
        assert_eq!(e(3.0).phi(-2.0), -4.0);
        assert_eq!(e(2.0).phi(0.5), 0.5);
        assert_eq!(e(1.5).phi(0.0), 0.0);
    }

    #[test]
    fn phi_prime_examples() {
        assert_eq!(e(3.0).phi_prime(2.0).unwrap(), 4.0);
        assert_eq!(e(2.0).phi_prime(-3.0).unwrap(), 1.0);
        assert_eq!(e(3.0).phi_prime(0.0).unwrap(), 0.0);
        assert_eq!(e(2.0).phi_prime(0.0).unwrap(), 1.0);
        assert_eq!(e(1.5).phi_prime(0.0), Err(Error::PhiPrimeDomain(1.5)));
    }

    #[test]
    fn phi_inv_examples() {
        assert_eq!(e(3.0).phi_inv(-4.0), -2.0);
        assert_eq!(e(1.5).phi_inv(0.0), 0.0);
        assert!((e(3.0).phi_inv(8.0) - 8f64.sqrt()).abs() < 1e-15);
        assert!((e(3.0).phi_inv(8.0) - 2.828_427_124_746_19).abs() < 1e-12);
    }

    #[test]
    fn flux_form_of_phi_prime() {
        let ex = e(3.7);
        for &t in &[-2.5, -0.1, 0.3, 4.0] {
            let lhs = ex.phi_prime_of_flux(ex.phi(t));
            let rhs = ex.phi_prime_nonzero(t);
            assert!((lhs - rhs).abs() <= 1e-13 * rhs);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn round_trip(mag in 1e-6f64..1e3, neg: bool, p in 1.001f64..=6.0) {
            let ex = e(p);
            let t = if neg { -mag } else { mag };
            let back = ex.phi_inv(ex.phi(t));
            prop_assert!((back - t).abs() <= 1e-12 * t.abs().max(1.0));
        }

        #[test]
        fn odd_and_scaled_derivative(t in -1e3f64..1e3, p in 1.01f64..=6.0) {
            let ex = e(p);
            prop_assert_eq!(ex.phi(-t).to_bits(), (-ex.phi(t)).to_bits());
            if t != 0.0 {
                let lhs = (p - 1.0) * ex.phi(t);
                let rhs = t * ex.phi_prime(t).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
            }
        }

        #[test]
        fn monotone(a in -50f64..50.0, d in 1e-6f64..10.0, p in 1.01f64..=6.0) {
            let ex = e(p);
            prop_assert!(ex.phi(a) < ex.phi(a + d));
        }
    }
}
