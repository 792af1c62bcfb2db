//! Polynomial nonlinearities `f`, their exact `F` and `f'`, and the
//! sufficient conditions for non-singularity of positive solutions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::plaplacian::Exponent;
use crate::poly::{bisect, Polynomial};

/// Uniform samples per scanned interval.
pub const SCAN_SAMPLES: usize = 10_000;

/// A polynomial `f` with a designated positive zero `gamma`.
///
/// `gamma` is not required to be a root at construction time so that
/// [`PolyNonlinearity::check_hypotheses`] can report the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyNonlinearity {
    f: Polynomial,
    fprime: Polynomial,
    big_f: Polynomial,
    gamma: f64,
}

impl PolyNonlinearity {
    /// `coeffs` are in ascending degree.
    pub fn new(coeffs: Vec<f64>, gamma: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidNonlinearity("no coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidNonlinearity("non-finite coefficient".into()));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let f = Polynomial::new(coeffs);
        Ok(Self {
            fprime: f.derivative(),
            big_f: f.antiderivative(),
            f,
            gamma,
        })
    }

    /// The quartic `u (u - 1)(u - 2)(u - 4)` with `gamma = 4`.
    pub fn quartic_example() -> Self {
        Self::new(vec![0.0, -8.0, 14.0, -7.0, 1.0], 4.0).expect("valid")
    }

    /// `c * f`, same `gamma`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.f.coeffs().iter().map(|a| c * a).collect(), self.gamma)
    }

    pub fn coeffs(&self) -> &[f64] {
        self.f.coeffs()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn fprime(&self) -> &Polynomial {
        &self.fprime
    }

    pub fn big_f(&self) -> &Polynomial {
        &self.big_f
    }

    #[inline]
    pub fn eval_f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    #[inline]
    pub fn eval_fprime(&self, u: f64) -> f64 {
        self.fprime.eval(u)
    }

    #[inline]
    pub fn eval_big_f(&self, u: f64) -> f64 {
        self.big_f.eval(u)
    }

    /// Absolute tolerance for accepting a value of `f` as zero.
    pub fn tol_root(&self) -> f64 {
        1e-9 * (1.0 + self.f.max_abs_coeff())
    }

    pub fn gamma_is_root(&self) -> bool {
        self.eval_f(self.gamma).abs() <= self.tol_root()
    }

    /// `sum |c_k| |u|^k` over the coefficients of `F`: the rounding scale of `F(u)`.
    pub fn big_f_scale(&self, u: f64) -> f64 {
        self.big_f
            .coeffs()
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * u.abs() + c.abs())
    }

    /// Scan the three hypotheses on `(gamma, u_max]` and `(0, gamma)`.
    pub fn check_hypotheses(&self, e: &Exponent, u_max: f64) -> Result<HypothesisReport> {
        let gamma = self.gamma;
        if !(u_max > gamma) {
            return Err(Error::ScanWindow { gamma, u_max });
        }
        let mut witnesses = Vec::new();

        // f(gamma) = 0 and f > 0 above gamma.
        let mut sign_ok = true;
        let f_gamma = self.eval_f(gamma);
        if f_gamma.abs() > self.tol_root() {
            sign_ok = false;
            witnesses.push(Witness {
                condition: Condition::PositiveAboveGamma,
                u: gamma,
                margin: -f_gamma.abs(),
            });
        }
        let mut extra = self.fprime.real_roots_in(gamma, u_max);
        extra.extend(self.f.real_roots_in(gamma, u_max));
        let (u, margin) = min_over_scan(|u| self.eval_f(u), gamma, u_max, &extra, true);
        if !(margin > 0.0) {
            sign_ok = false;
            witnesses.push(Witness {
                condition: Condition::PositiveAboveGamma,
                u,
                margin,
            });
        }

        // u f'(u) - (p - 1) f(u) > 0 above gamma; a polynomial in u.
        let growth = Polynomial::new(
            self.f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, &c)| (k as f64 - (e.p() - 1.0)) * c)
                .collect(),
        );
        let mut extra = growth.derivative().real_roots_in(gamma, u_max);
        extra.extend(growth.real_roots_in(gamma, u_max));
        let (u, margin) = min_over_scan(|u| growth.eval(u), gamma, u_max, &extra, true);
        let growth_ok = margin > 0.0;
        if !growth_ok {
            witnesses.push(Witness {
                condition: Condition::SuperlinearGrowth,
                u,
                margin,
            });
        }

        // F(u) - F(gamma) > 0 on (0, gamma).
        let f_at_gamma = self.eval_big_f(gamma);
        let shifted = Polynomial::new({
            let mut c = self.big_f.coeffs().to_vec();
            c[0] -= f_at_gamma;
            c
        });
        let mut extra = self.f.real_roots_in(0.0, gamma);
        extra.extend(shifted.real_roots_in(0.0, gamma));
        let (u, margin) = min_over_scan(|u| shifted.eval(u), 0.0, gamma, &extra, false);
        let energy_ok = margin > 0.0;
        if !energy_ok {
            witnesses.push(Witness {
                condition: Condition::EnergyBelowGamma,
                u,
                margin,
            });
        }

        Ok(HypothesisReport {
            sign_ok,
            growth_ok,
            energy_ok,
            witnesses,
            u_max,
        })
    }

    /// The amplitude `alpha*` with `F(alpha*) = 0`, located by bisection in
    /// a bracket above `gamma`.
    pub fn find_alpha_star(&self, bracket: (f64, f64)) -> Result<f64> {
        let (lo, hi) = bracket;
        if !(lo >= self.gamma && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidBracket { lo, hi });
        }
        self.root_of_big_f(lo, hi)
    }

    /// Root of `F` in `[lo, hi]`, no restriction on the bracket position.
    pub(crate) fn root_of_big_f(&self, lo: f64, hi: f64) -> Result<f64> {
        let (flo, fhi) = (self.eval_big_f(lo), self.eval_big_f(hi));
        if flo == 0.0 {
            return Ok(lo);
        }
        if fhi == 0.0 {
            return Ok(hi);
        }
        if (flo < 0.0) == (fhi < 0.0) {
            return Err(Error::NoSignChange { lo, hi });
        }
        Ok(bisect(|u| self.eval_big_f(u), lo, hi, flo))
    }
}

/// Minimum of `g` over `SCAN_SAMPLES` uniform points of `(a, b]` (or
/// `(a, b)` when `include_b` is false) plus the `extra` points inside.
fn min_over_scan(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    extra: &[f64],
    include_b: bool,
) -> (f64, f64) {
    let step = (b - a) / SCAN_SAMPLES as f64;
    let last = if include_b {
        SCAN_SAMPLES
    } else {
        SCAN_SAMPLES - 1
    };
    let uniform = (1..=last).map(|k| {
        if k == SCAN_SAMPLES {
            b
        } else {
            a + k as f64 * step
        }
    });
    let inside = extra
        .iter()
        .copied()
        .filter(|&u| u > a && (u < b || (include_b && u == b)));
    uniform
        .chain(inside)
        .map(|u| (u, g(u)))
        .fold((f64::NAN, f64::INFINITY), |best, cur| {
            if cur.1 < best.1 {
                cur
            } else {
                best
            }
        })
}

/// What the solvers need from `f`.
///
/// [`PolyNonlinearity`] is the general model; [`PowerNonlinearity`] covers
/// the homogeneous case `f(u) = c u^r` with non-integer `r`.
pub trait Nonlinearity: Sync {
    fn eval_f(&self, u: f64) -> f64;
    fn eval_fprime(&self, u: f64) -> f64;
    fn eval_big_f(&self, u: f64) -> f64;
    /// The designated sign-change point `gamma`, if there is one.
    fn crossing_level(&self) -> Option<f64>;
    /// Absolute tolerance for treating a value of `f` as zero.
    fn tol_root(&self) -> f64;
    /// Rounding scale of `F(u)`.
    fn big_f_scale(&self, u: f64) -> f64;
    /// Largest `F(u)` over interior critical points of `F` in `(0, alpha)`,
    /// plus a dense sample between them; `-inf` when `F` has none.
    fn interior_sup_big_f(&self, alpha: f64) -> f64;
    /// `(k, c)` with `F(u) ~ c u^k` as `u -> 0+`.
    fn big_f_leading_at_zero(&self) -> Option<(f64, f64)>;
    /// `h -> (F(alpha) - F(alpha - h)) / h`, accurate for small `h`.
    fn level_gap(&self, alpha: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_>;
}

impl Nonlinearity for PolyNonlinearity {
    fn eval_f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    fn eval_fprime(&self, u: f64) -> f64 {
        self.fprime.eval(u)
    }

    fn eval_big_f(&self, u: f64) -> f64 {
        self.big_f.eval(u)
    }

    fn crossing_level(&self) -> Option<f64> {
        Some(self.gamma)
    }

    fn tol_root(&self) -> f64 {
        PolyNonlinearity::tol_root(self)
    }

    fn big_f_scale(&self, u: f64) -> f64 {
        PolyNonlinearity::big_f_scale(self, u)
    }

    fn interior_sup_big_f(&self, alpha: f64) -> f64 {
        // Past the last root of f below alpha, F only increases.
        let crit: Vec<f64> = self
            .f
            .real_roots_in(0.0, alpha)
            .into_iter()
            .filter(|&c| c > 0.0 && c < alpha)
            .collect();
        let last = crit.last().copied().unwrap_or(0.0);
        let step = last / SCAN_SAMPLES as f64;
        crit.iter()
            .copied()
            .chain((1..SCAN_SAMPLES).map(|k| k as f64 * step))
            .filter(|&u| u > 0.0)
            .map(|u| self.big_f.eval(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn big_f_leading_at_zero(&self) -> Option<(f64, f64)> {
        self.big_f
            .order_at_zero()
            .map(|k| (k as f64, self.big_f.coeffs()[k]))
    }

    fn level_gap(&self, alpha: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_> {
        // F(alpha - h) = sum t_k (-h)^k
        let taylor = self.big_f.taylor_at(alpha);
        let d = Polynomial::new(
            taylor
                .coeffs()
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &t)| if k % 2 == 1 { t } else { -t })
                .collect(),
        );
        Box::new(move |h| d.eval(h))
    }
}

/// `f(u) = c |u|^r sign(u)`, `c > 0`, `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNonlinearity {
    coeff: f64,
    power: f64,
}

impl PowerNonlinearity {
    pub fn new(coeff: f64, power: f64) -> Result<Self> {
        if !(coeff.is_finite() && coeff > 0.0 && power.is_finite() && power > 0.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "power law needs c > 0 and r > 0, got c = {coeff}, r = {power}"
            )));
        }
        Ok(Self { coeff, power })
    }

    /// `f(u) = u^(p-1)`, homogeneous of the same degree as `phi`.
    pub fn matching(e: &Exponent) -> Self {
        Self {
            coeff: 1.0,
            power: e.p() - 1.0,
        }
    }
}

impl Nonlinearity for PowerNonlinearity {
    fn eval_f(&self, u: f64) -> f64 {
        let v = self.coeff * u.abs().powf(self.power);
        if u < 0.0 {
            -v
        } else {
            v
        }
    }

    fn eval_fprime(&self, u: f64) -> f64 {
        self.coeff * self.power * u.abs().powf(self.power - 1.0)
    }

    fn eval_big_f(&self, u: f64) -> f64 {
        self.coeff * u.abs().powf(self.power + 1.0) / (self.power + 1.0)
    }

    fn crossing_level(&self) -> Option<f64> {
        None
    }

    fn tol_root(&self) -> f64 {
        1e-9 * (1.0 + self.coeff)
    }

    fn big_f_scale(&self, u: f64) -> f64 {
        self.eval_big_f(u)
    }

    fn interior_sup_big_f(&self, _alpha: f64) -> f64 {
        f64::NEG_INFINITY
    }

    fn big_f_leading_at_zero(&self) -> Option<(f64, f64)> {
        Some((self.power + 1.0, self.coeff / (self.power + 1.0)))
    }

    fn level_gap(&self, alpha: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_> {
        let k = self.power + 1.0;
        let top = self.coeff * alpha.powf(k) / k;
        let f_alpha = self.coeff * alpha.powf(self.power);
        Box::new(move |h| {
            if h == 0.0 {
                f_alpha
            } else {
                -top * (k * (-h / alpha).ln_1p()).exp_m1() / h
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `f(gamma) = 0` and `f > 0` on `(gamma, u_max]`.
    PositiveAboveGamma,
    /// `f'(u) > (p - 1) f(u) / u` on `(gamma, u_max]`.
    SuperlinearGrowth,
    /// `F(gamma) - F(u) < 0` on `(0, gamma)`.
    EnergyBelowGamma,
}

/// Where a condition failed and by how much (`margin <= 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub condition: Condition,
    pub u: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    #[serde(rename = "h41_ok")]
    pub sign_ok: bool,
    #[serde(rename = "h4a_ok")]
    pub growth_ok: bool,
    #[serde(rename = "h42_ok")]
    pub energy_ok: bool,
    pub witnesses: Vec<Witness>,
    pub u_max: f64,
}

impl HypothesisReport {
    pub fn all_ok(&self) -> bool {
        self.sign_ok && self.growth_ok && self.energy_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn quartic_values() {
        let nl = PolyNonlinearity::quartic_example();
        assert_eq!(nl.eval_f(4.0), 0.0);
        assert!((nl.eval_big_f(4.0) + 128.0 / 15.0).abs() < 1e-12);
        assert_eq!(nl.eval_fprime(0.0), -8.0);
        assert_eq!(nl.eval_big_f(0.0), 0.0);
        assert_eq!(nl.big_f().coeffs()[0], 0.0);
        assert_eq!(nl.eval_f(6.0), 240.0);
        // no solutions with amplitude in (1, 2): F(2) < 0
        assert!((nl.eval_big_f(2.0) + 4.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn derived_coefficients_are_exact_images() {
        let nl = PolyNonlinearity::quartic_example();
        for (k, (&c, &d)) in nl
            .coeffs()
            .iter()
            .skip(1)
            .zip(nl.fprime().coeffs())
            .enumerate()
        {
            assert_eq!(d, (k + 1) as f64 * c);
        }
        for (k, (&c, &a)) in nl
            .coeffs()
            .iter()
            .zip(nl.big_f().coeffs().iter().skip(1))
            .enumerate()
        {
            assert_eq!(a * (k + 1) as f64, c);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PolyNonlinearity::new(vec![], 1.0).is_err());
        assert!(PolyNonlinearity::new(vec![1.0, f64::NAN], 1.0).is_err());
        assert!(PolyNonlinearity::new(vec![1.0], 0.0).is_err());
        let nl = PolyNonlinearity::quartic_example();
        assert!(matches!(
            nl.check_hypotheses(&ex(3.0), 4.0),
            Err(Error::ScanWindow { .. })
        ));
    }

    #[test]
    fn quartic_passes_all() {
        let nl = PolyNonlinearity::quartic_example();
        let r = nl.check_hypotheses(&ex(3.0), 16.0).unwrap();
        assert!(r.all_ok(), "{r:?}");
        assert!(r.witnesses.is_empty());
    }

    #[test]
    fn linear_without_root_fails_sign_condition() {
        let nl = PolyNonlinearity::new(vec![0.0, 1.0], 1.0).unwrap();
        let r = nl.check_hypotheses(&ex(2.0), 4.0).unwrap();
        assert!(!r.sign_ok);
        let w = r
            .witnesses
            .iter()
            .find(|w| w.condition == Condition::PositiveAboveGamma)
            .unwrap();
        assert_eq!(w.u, 1.0);
        assert!(w.margin < 0.0);
    }

    #[test]
    fn affine_passes_all() {
        let nl = PolyNonlinearity::new(vec![-1.0, 1.0], 1.0).unwrap();
        let r = nl.check_hypotheses(&ex(2.0), 8.0).unwrap();
        assert!(r.all_ok(), "{r:?}");
    }

    #[test]
    fn quartic_with_gamma_two_fails_energy_condition() {
        let nl = PolyNonlinearity::new(vec![0.0, -8.0, 14.0, -7.0, 1.0], 2.0).unwrap();
        let r = nl.check_hypotheses(&ex(3.0), 8.0).unwrap();
        assert!(!r.energy_ok);
        for w in &r.witnesses {
            match w.condition {
                Condition::EnergyBelowGamma => assert!(w.u > 0.0 && w.u < 2.0),
                _ => assert!(w.u >= 2.0 && w.u <= 8.0),
            }
        }
    }

    #[test]
    fn growth_condition_means_increasing_ratio() {
        let nl = PolyNonlinearity::quartic_example();
        let e = ex(3.0);
        let r = nl.check_hypotheses(&e, 16.0).unwrap();
        assert!(r.growth_ok);
        let n = 2000;
        let ratio = |u: f64| nl.eval_f(u) / u.powf(e.p() - 1.0);
        let mut prev = ratio(4.0 + 12.0 / n as f64);
        for k in 2..=n {
            let cur = ratio(4.0 + 12.0 * k as f64 / n as f64);
            assert!(cur > prev);
            prev = cur;
        }
    }

    #[test]
    fn alpha_star_examples() {
        let nl = PolyNonlinearity::quartic_example();
        let a = nl.find_alpha_star((4.0, 8.0)).unwrap();
        assert!(a > 4.6 && a < 4.7, "{a}");
        assert!(nl.eval_big_f(a).abs() <= 1e-12 * nl.big_f_scale(a));
        assert!(nl.eval_big_f(4.5) < 0.0 && nl.eval_big_f(4.7) > 0.0);

        let affine = PolyNonlinearity::new(vec![-1.0, 1.0], 1.0).unwrap();
        assert_eq!(affine.find_alpha_star((1.0, 4.0)).unwrap(), 2.0);

        assert!((nl.eval_big_f(5.0) - 14.583_333_333_333_3).abs() < 1e-9);
        assert!(matches!(
            nl.find_alpha_star((5.0, 8.0)),
            Err(Error::NoSignChange { .. })
        ));
        assert!(matches!(
            nl.find_alpha_star((3.0, 8.0)),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn finite_difference_consistency() {
        use rand::{Rng, SeedableRng};
        let nl = PolyNonlinearity::quartic_example();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let u: f64 = rng.gen_range(-3.0..10.0);
            let h = 1e-5 * (1.0 + u.abs());
            let d_big = (nl.eval_big_f(u + h) - nl.eval_big_f(u - h)) / (2.0 * h);
            let d_f = (nl.eval_f(u + h) - nl.eval_f(u - h)) / (2.0 * h);
            let scale_f = 1.0 + nl.eval_f(u).abs();
            let scale_fp = 1.0 + nl.eval_fprime(u).abs();
            assert!((d_big - nl.eval_f(u)).abs() <= 1e-6 * scale_f);
            assert!((d_f - nl.eval_fprime(u)).abs() <= 1e-6 * scale_fp);
        }
    }
}
