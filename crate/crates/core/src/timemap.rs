//! Time-map reduction of the Dirichlet problem on `(-1, 1)`.
//!
//! A positive solution is even with its maximum `alpha = u(0)`. The first
//! integral `((p-1)/p)|u'|^p + lambda F(u) = lambda F(alpha)` gives
//! `|u'| = [q lambda (F(alpha) - F(u))]^(1/p)` with `q = p/(p-1)`, so the
//! half-length condition `x(0) = 1` fixes `lambda = I(alpha)^p` where
//!
//! ```text
//! I(alpha) = integral_0^alpha [q (F(alpha) - F(u))]^(-1/p) du.
//! ```
//!
//! All integrals are taken in the variable `s = (alpha - u)^(1/q)`, in which
//! the integrand `q [q P(s^q)]^(-1/p)`, `P(h) = (F(alpha) - F(alpha - h)) / h`,
//! is bounded at the maximum. `P` is evaluated from the Taylor expansion of
//! `F` at `alpha` for `u >= alpha/2` and directly otherwise, so neither end
//! loses digits to cancellation.

use rayon::prelude::*;

use crate::error::{Error, InadmissibleReason, Result};
use crate::nonlinearity::Nonlinearity;
use crate::plaplacian::Exponent;
use crate::poly::bisect;
use crate::quadrature::{integrate_singular, DEFAULT_REL_TOL};

/// Relative finite-difference step for `dlambda/dalpha`.
pub const FD_STEP: f64 = 1e-4;
/// Relative width of the `F(alpha) = F(0)` boundary band.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// `F(alpha) - sup F` over the root-augmented sample of `[0, alpha)`.
    pub margin: f64,
    /// `F(alpha) = F(0)` within tolerance with `u = 0` the binding point.
    pub boundary: bool,
    pub reason: Option<InadmissibleReason>,
}

impl Admissibility {
    fn reject(reason: InadmissibleReason, margin: f64) -> Self {
        Self {
            admissible: false,
            margin,
            boundary: false,
            reason: Some(reason),
        }
    }
}

/// One admissible amplitude on the solution curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub alpha: f64,
    pub lambda: f64,
    pub dlambda_dalpha: f64,
    pub uprime_at_1: f64,
    /// Even-mode linearized value at `x = 1`; NaN until diagnosed.
    pub w_at_1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectedAmplitude {
    pub alpha: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
    pub rejected: Vec<RejectedAmplitude>,
    pub alpha_star: Option<f64>,
    pub lambda0: Option<f64>,
}

/// A positive solution sampled on a uniform grid of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub uprime: Vec<f64>,
    /// Flux `phi(u')`.
    pub m: Vec<f64>,
    /// Point with `u(x0) = gamma`, when `alpha > gamma`.
    pub x0: Option<f64>,
    /// `u'(x0)`, evaluated from the first integral at `u = gamma`.
    pub uprime_x0: Option<f64>,
    pub lambda: f64,
    pub alpha: f64,
}

impl Profile {
    /// `((p-1)/p) |u'|^p + lambda F(u)` on the grid.
    pub fn energy<N: Nonlinearity + ?Sized>(&self, nl: &N, e: &Exponent) -> Vec<f64> {
        let c = (e.p() - 1.0) / e.p();
        self.uprime
            .iter()
            .zip(&self.u)
            .map(|(&du, &u)| c * du.abs().powf(e.p()) + self.lambda * nl.eval_big_f(u))
            .collect()
    }

    /// `max |E(x) - E(0)| / (1 + |E(0)|)`.
    pub fn energy_drift<N: Nonlinearity + ?Sized>(&self, nl: &N, e: &Exponent) -> f64 {
        let en = self.energy(nl, e);
        let e0 = en[0];
        en.iter().fold(0.0f64, |m, v| m.max((v - e0).abs())) / (1.0 + e0.abs())
    }

    /// `(u, m)` at an arbitrary `x` in `[0, 1]`.
    ///
    /// Cubic Hermite interpolation with the exact slopes `u'` and
    /// `m' = -lambda f(u)`; on the first grid cell the two-term expansion at
    /// the maximum is used instead, since `u` is not smooth in `x` there.
    pub fn sample_at<N: Nonlinearity + ?Sized>(&self, x: f64, nl: &N, e: &Exponent) -> (f64, f64) {
        let n = self.x.len();
        let h = self.x[1] - self.x[0];
        if x <= self.x[1] {
            let (u, m) = origin_series(nl, e, self.alpha, self.lambda, x);
            return (u, m);
        }
        let k = (((x - self.x[0]) / h).floor() as usize).min(n - 2);
        let (xa, xb) = (self.x[k], self.x[k + 1]);
        let t = (x - xa) / (xb - xa);
        let dx = xb - xa;
        let u = hermite(
            t,
            dx,
            self.u[k],
            self.uprime[k],
            self.u[k + 1],
            self.uprime[k + 1],
        );
        let dma = -self.lambda * nl.eval_f(self.u[k]);
        let dmb = -self.lambda * nl.eval_f(self.u[k + 1]);
        let m = hermite(t, dx, self.m[k], dma, self.m[k + 1], dmb);
        (u, m)
    }
}

/// Cubic Hermite on a cell of width `dx`, local coordinate `t` in `[0, 1]`.
#[inline]
pub(crate) fn hermite(t: f64, dx: f64, ya: f64, da: f64, yb: f64, db: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * ya + h10 * dx * da + h01 * yb + h11 * dx * db
}

/// Two-term expansion of `(u, phi(u'))` at the maximum for the equation
/// `phi(u')' + lambda f(u) = 0`, `u(0) = alpha`, `u'(0) = 0`.
///
/// With `a = lambda f(alpha)`, `a' = lambda f'(alpha)`, `c = a^(1/(p-1)) / q`:
/// `m = -a x + a' c x^(q+1) / (q+1)` and
/// `u = alpha - c x^q + a' c^2 x^(2q) / (2 a (q+1)(p-1))`.
pub(crate) fn origin_series<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    alpha: f64,
    lambda: f64,
    x: f64,
) -> (f64, f64) {
    if x == 0.0 {
        return (alpha, 0.0);
    }
    let (p, q) = (e.p(), e.q());
    let a = lambda * nl.eval_f(alpha);
    let ap = lambda * nl.eval_fprime(alpha);
    let c = a.powf(1.0 / (p - 1.0)) / q;
    let xq = x.powf(q);
    let m = -a * x + ap * c * xq * x / (q + 1.0);
    let u = alpha - c * xq + ap * c * c * xq * xq / (2.0 * a * (q + 1.0) * (p - 1.0));
    (u, m)
}

/// Integrand machinery for one amplitude.
pub(crate) struct Kernel<'a, N: Nonlinearity + ?Sized> {
    nl: &'a N,
    p: f64,
    q: f64,
    alpha: f64,
    /// `F(alpha)`, pinned to `F(0) = 0` in the boundary case.
    big_f_alpha: f64,
    /// `(F(alpha) - F(alpha - h)) / h` without cancellation.
    gap_quotient: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
    /// `alpha^(1/q)`, the end of the `s` range (`u = 0`).
    s_max: f64,
}

impl<'a, N: Nonlinearity + ?Sized> Kernel<'a, N> {
    pub(crate) fn new(nl: &'a N, e: &Exponent, alpha: f64, boundary: bool) -> Self {
        Self {
            nl,
            p: e.p(),
            q: e.q(),
            alpha,
            big_f_alpha: if boundary { 0.0 } else { nl.eval_big_f(alpha) },
            gap_quotient: nl.level_gap(alpha),
            s_max: alpha.powf(1.0 / e.q()),
        }
    }

    pub(crate) fn s_max(&self) -> f64 {
        self.s_max
    }

    /// `(u, h = alpha - u)` at `s`, given `dist = s_max - s` exactly.
    #[inline]
    fn point(&self, s: f64, dist: f64) -> (f64, f64) {
        let r = dist / self.s_max;
        let h = self.alpha * (s / self.s_max).powf(self.q);
        let u = if r < 0.5 {
            -self.alpha * (self.q * (-r).ln_1p()).exp_m1()
        } else {
            self.alpha - h
        };
        (u, h)
    }

    /// `(F(alpha) - F(u)) / h`.
    #[inline]
    fn quotient(&self, u: f64, h: f64) -> f64 {
        if h == 0.0 || u >= 0.5 * self.alpha {
            (self.gap_quotient)(h)
        } else {
            (self.big_f_alpha - self.nl.eval_big_f(u)) / h
        }
    }

    /// `dx/ds` up to the factor `1 / I`: `q [q P(s^q)]^(-1/p)`.
    #[inline]
    fn integrand(&self, s: f64, dist: f64) -> f64 {
        let (u, h) = self.point(s, dist);
        self.q * (self.q * self.quotient(u, h)).powf(-1.0 / self.p)
    }

    /// `integral_{sa}^{sb}` of the integrand, `0 <= sa <= sb <= s_max`.
    pub(crate) fn integral(&self, sa: f64, sb: f64, rel_tol: f64) -> Result<f64> {
        let w = sb - sa;
        if w <= 0.0 {
            return Ok(0.0);
        }
        let tail = self.s_max - sb;
        let r = integrate_singular(|t, tc| self.integrand(sa + w * t, tail + w * tc), rel_tol)?;
        Ok(w * r.value)
    }

    /// `(u, u')` at `s`, with `u'` from the first integral at parameter `lambda`.
    fn state(&self, s: f64, dist: f64, lambda: f64) -> (f64, f64) {
        let (u, h) = self.point(s, dist);
        let gap = h * self.quotient(u, h);
        let du = -(self.q * lambda * gap.max(0.0)).powf(1.0 / self.p);
        (u, du)
    }
}

/// Solver for a fixed nonlinearity and exponent.
pub struct TimeMap<'a, N: Nonlinearity + ?Sized> {
    nl: &'a N,
    e: Exponent,
    rel_tol: f64,
}

impl<N: Nonlinearity + ?Sized> Clone for TimeMap<'_, N> {
    fn clone(&self) -> Self {
        Self {
            nl: self.nl,
            e: self.e,
            rel_tol: self.rel_tol,
        }
    }
}

impl<'a, N: Nonlinearity + ?Sized> TimeMap<'a, N> {
    pub fn new(nl: &'a N, e: Exponent) -> Self {
        Self {
            nl,
            e,
            rel_tol: DEFAULT_REL_TOL,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn nonlinearity(&self) -> &'a N {
        self.nl
    }

    pub fn exponent(&self) -> &Exponent {
        &self.e
    }

    /// Does a positive solution with maximum `alpha` exist?
    ///
    /// Requires `f(alpha) > 0` and `F(alpha) > F(u)` on `(0, alpha)`. The sup
    /// of `F` is taken over `u = 0`, the roots of `f` below `alpha` and a
    /// uniform sample up to the last such root; past it `F` increases to
    /// `F(alpha)`.
    pub fn is_admissible(&self, alpha: f64) -> Admissibility {
        let nl = self.nl;
        if !(alpha > 0.0) {
            return Admissibility::reject(InadmissibleReason::NonPositiveAmplitude, f64::NAN);
        }
        let f_alpha = nl.eval_f(alpha);
        if f_alpha.abs() <= nl.tol_root() {
            return Admissibility::reject(InadmissibleReason::RestPoint, f64::NAN);
        }
        if f_alpha < 0.0 {
            return Admissibility::reject(InadmissibleReason::NegativeSource, f64::NAN);
        }

        let interior_sup = nl.interior_sup_big_f(alpha);
        let big_f_alpha = nl.eval_big_f(alpha);
        let sup = interior_sup.max(0.0);
        let margin = big_f_alpha - sup;
        let tol = BOUNDARY_TOL * nl.big_f_scale(alpha);

        if margin > tol {
            return Admissibility {
                admissible: true,
                margin,
                boundary: false,
                reason: None,
            };
        }
        let zero_binds = big_f_alpha - interior_sup > tol;
        if margin.abs() <= tol && zero_binds {
            // F(alpha) = F(0): near u = 0 the gap is -F(u) ~ -c_k u^k,
            // integrable against the power -1/p only when k < p.
            let integrable = match nl.big_f_leading_at_zero() {
                Some((k, c)) => c < 0.0 && k < self.e.p(),
                None => false,
            };
            return if integrable {
                Admissibility {
                    admissible: true,
                    margin,
                    boundary: true,
                    reason: None,
                }
            } else {
                Admissibility::reject(InadmissibleReason::NonIntegrableBoundary, margin)
            };
        }
        Admissibility::reject(InadmissibleReason::EnergyBarrier, margin)
    }

    pub(crate) fn kernel(&self, alpha: f64) -> Result<Kernel<'a, N>> {
        let adm = self.is_admissible(alpha);
        match adm.reason {
            Some(reason) => Err(Error::Inadmissible { alpha, reason }),
            None => Ok(Kernel::new(self.nl, &self.e, alpha, adm.boundary)),
        }
    }

    /// `I(alpha)`; the half-length of the solution at `lambda = 1`.
    pub fn time_integral(&self, alpha: f64) -> Result<f64> {
        let k = self.kernel(alpha)?;
        k.integral(0.0, k.s_max(), self.rel_tol)
    }

    pub fn lambda_of_alpha(&self, alpha: f64) -> Result<f64> {
        Ok(self.time_integral(alpha)?.powf(self.e.p()))
    }

    /// Central difference with step `1e-4 alpha` and one Richardson step.
    pub fn dlambda_dalpha(&self, alpha: f64) -> Result<f64> {
        let h = FD_STEP * alpha;
        for a in [alpha - h, alpha + h] {
            if !self.is_admissible(a).admissible {
                return Err(Error::StencilInadmissible { alpha });
            }
        }
        let fine = self.clone().with_rel_tol(self.rel_tol.min(1e-13));
        let lam = |a: f64| fine.lambda_of_alpha(a);
        let d1 = (lam(alpha + h)? - lam(alpha - h)?) / (2.0 * h);
        let d2 = (lam(alpha + 0.5 * h)? - lam(alpha - 0.5 * h)?) / h;
        Ok((4.0 * d2 - d1) / 3.0)
    }

    /// `u'(1) = -[q lambda F(alpha)]^(1/p)`.
    pub fn uprime_at_1(&self, alpha: f64, lambda: f64) -> f64 {
        let big_f = self.nl.eval_big_f(alpha).max(0.0);
        -(self.e.q() * lambda * big_f).powf(1.0 / self.e.p())
    }

    pub fn curve_point(&self, alpha: f64) -> Result<CurvePoint> {
        let lambda = self.lambda_of_alpha(alpha)?;
        Ok(CurvePoint {
            alpha,
            lambda,
            dlambda_dalpha: self.dlambda_dalpha(alpha)?,
            uprime_at_1: self.uprime_at_1(alpha, lambda),
            w_at_1: f64::NAN,
        })
    }

    /// Solution profile on `n_grid` uniform points of `[0, 1]`.
    ///
    /// Each `x_i` is inverted from `x(s) = (1/I) integral_0^s` by safeguarded
    /// Newton on cell-wise integrals, so `u(0) = alpha` and `u(1) = 0` hold
    /// exactly.
    pub fn reconstruct_profile(&self, alpha: f64, n_grid: usize) -> Result<Profile> {
        if n_grid < 16 {
            return Err(Error::GridTooSmall(n_grid));
        }
        let k = self.kernel(alpha)?;
        let tol = self.rel_tol;
        let s_max = k.s_max();
        let total = k.integral(0.0, s_max, tol)?;
        let lambda = total.powf(self.e.p());

        let mut x = Vec::with_capacity(n_grid);
        let mut u = Vec::with_capacity(n_grid);
        let mut uprime = Vec::with_capacity(n_grid);
        x.push(0.0);
        u.push(alpha);
        uprime.push(0.0);

        let (mut s_prev, mut acc) = (0.0f64, 0.0f64);
        let last = (n_grid - 1) as f64;
        for i in 1..n_grid - 1 {
            let xi = i as f64 / last;
            let target = xi * total;
            let (s, val) = invert_cell(&k, s_prev, acc, target, tol)?;
            let (ui, dui) = k.state(s, s_max - s, lambda);
            x.push(xi);
            u.push(ui);
            uprime.push(dui);
            s_prev = s;
            acc = val;
        }
        x.push(1.0);
        u.push(0.0);
        uprime.push(k.state(s_max, 0.0, lambda).1);

        let m = uprime.iter().map(|&d| self.e.phi(d)).collect();
        let (x0, uprime_x0) = match self.nl.crossing_level().filter(|&g| alpha > g) {
            Some(gamma) => {
                let sg = (alpha - gamma).powf(1.0 / self.e.q());
                let xg = k.integral(0.0, sg, tol)? / total;
                (Some(xg), Some(k.state(sg, s_max - sg, lambda).1))
            }
            None => (None, None),
        };
        Ok(Profile {
            x,
            u,
            uprime,
            m,
            x0,
            uprime_x0,
            lambda,
            alpha,
        })
    }

    /// Sweep `n_points` amplitudes in `[alpha_min, alpha_max]` and locate the
    /// lower end `alpha_star` of the admissible branch met first.
    pub fn trace_curve(&self, alpha_min: f64, alpha_max: f64, n_points: usize) -> Curve {
        if n_points == 0 || !(alpha_max >= alpha_min) {
            return Curve::default();
        }
        let alphas: Vec<f64> = (0..n_points)
            .map(|i| {
                if n_points == 1 {
                    alpha_min
                } else if i == n_points - 1 {
                    alpha_max
                } else {
                    alpha_min + (alpha_max - alpha_min) * i as f64 / (n_points - 1) as f64
                }
            })
            .collect();
        let outcomes: Vec<std::result::Result<CurvePoint, String>> = alphas
            .par_iter()
            .map(|&a| {
                let adm = self.is_admissible(a);
                if let Some(reason) = adm.reason {
                    return Err(reason.to_string());
                }
                self.curve_point(a).map_err(|e| e.to_string())
            })
            .collect();

        let mut curve = Curve::default();
        let mut first_ok = None;
        for (i, (&alpha, out)) in alphas.iter().zip(outcomes).enumerate() {
            match out {
                Ok(pt) => {
                    first_ok.get_or_insert(i);
                    curve.points.push(pt);
                }
                Err(reason) => curve.rejected.push(RejectedAmplitude { alpha, reason }),
            }
        }
        if let Some(i) = first_ok {
            let hi = alphas[i];
            let lo = if i > 0 { Some(alphas[i - 1]) } else { None };
            if let Some((a_star, lam0)) = self.locate_branch_end(lo, hi) {
                curve.alpha_star = Some(a_star);
                curve.lambda0 = lam0;
                curve.points.retain(|p| p.alpha > a_star);
            }
        }
        curve
    }

    /// Lower end of the admissible interval containing `hi`. `lo`, if given,
    /// is a known inadmissible amplitude below it.
    fn locate_branch_end(&self, lo: Option<f64>, hi: f64) -> Option<(f64, Option<f64>)> {
        let strict = |a: f64| {
            let adm = self.is_admissible(a);
            adm.admissible && !adm.boundary
        };
        let mut hi = hi;
        let mut lo = match lo {
            Some(l) => l,
            None => {
                let step = hi / 256.0;
                let mut a = hi;
                loop {
                    let next = a - step;
                    if next <= 0.5 * step {
                        return None;
                    }
                    if !strict(next) {
                        break next;
                    }
                    a = next;
                    hi = a;
                }
            }
        };
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if strict(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }

        // u = 0 binding: the end is a root of F.
        let nl = self.nl;
        let root_of_big_f = |lo: f64, hi: f64| -> Option<f64> {
            let flo = nl.eval_big_f(lo);
            if flo == 0.0 {
                return Some(lo);
            }
            if (flo < 0.0) == (nl.eval_big_f(hi) < 0.0) {
                return None;
            }
            Some(bisect(|u| nl.eval_big_f(u), lo, hi, flo))
        };
        if nl.eval_big_f(hi) > 0.0 && nl.eval_f(hi) > 0.0 {
            let mut width = 1e-12 * hi;
            let mut below = hi - width;
            while nl.eval_big_f(below) >= 0.0 && width < hi {
                width *= 2.0;
                below = hi - width;
            }
            if let Some(root) = root_of_big_f(below.max(0.0), hi) {
                let adm = self.is_admissible(root);
                if adm.admissible && adm.boundary {
                    let lam0 = self.lambda_of_alpha(root).ok();
                    return Some((root, lam0));
                }
                if adm.reason == Some(InadmissibleReason::NonIntegrableBoundary) {
                    return Some((root, None));
                }
            }
        }
        Some((hi, None))
    }
}

/// Solve `acc + integral_{sa}^{s} = target` for `s` in `(sa, s_max]`.
fn invert_cell<N: Nonlinearity + ?Sized>(
    k: &Kernel<'_, N>,
    sa: f64,
    acc: f64,
    target: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let s_max = k.s_max();
    let (mut lo, mut hi) = (sa, s_max);
    let slope0 = k.integrand(sa, s_max - sa);
    let mut s = (sa + (target - acc) / slope0)
        .min(0.5 * (sa + s_max))
        .max(sa);
    let mut val = acc;
    for _ in 0..100 {
        val = acc + k.integral(sa, s, tol)?;
        let r = val - target;
        if r.abs() <= 4.0 * f64::EPSILON * target.abs() {
            break;
        }
        if r > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        if hi - lo <= 2.0 * f64::EPSILON * s_max {
            break;
        }
        let newton = s - r / k.integrand(s, s_max - s);
        s = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok((s, val))
}
