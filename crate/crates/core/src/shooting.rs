//! Shoot-and-scale: integrate the initial value problem at `lambda = 1`
//! from the maximum, find the first zero `b` of `u`, and rescale
//! `x -> x / b`, which turns it into the Dirichlet solution on `(-1, 1)`
//! with `lambda = b^p`.
//!
//! The state is `(u, m)` with `m = phi(u')`, so the equation reads exactly
//! `u' = phi^{-1}(m)`, `m' = -f(u)`. The vector field is not Lipschitz at the
//! origin when `p != 2`, so integration starts at `x = h0` from the local
//! expansion at the maximum.

use crate::diagnostics::LinearizedProfile;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::plaplacian::Exponent;
use crate::rk;
use crate::timemap::{hermite, origin_series, Profile};

pub const DEFAULT_H0: f64 = 1e-4;
pub const DEFAULT_RK_TOL: f64 = 1e-10;
/// Event localisation accuracy in `x`.
const EVENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub rk_tol: f64,
    pub h0: f64,
    /// Points of the resampled profile on `[0, 1]`.
    pub grid: usize,
    /// Co-integrate the even linearized mode with the solution.
    pub linearized: bool,
    /// Give up when `x` passes this without a zero; default `1e3 alpha^(1/q)`.
    pub x_cap: Option<f64>,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            rk_tol: DEFAULT_RK_TOL,
            h0: DEFAULT_H0,
            grid: 1001,
            linearized: false,
            x_cap: None,
        }
    }
}

/// Accepted steps of the unscaled shot, from `h0` to `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<f64>,
    /// `[u, m]`, extended by `[w, n]` for a joint shot.
    pub state: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    /// First zero of `u` at `lambda = 1`.
    pub b: f64,
    pub lambda: f64,
    pub profile: Profile,
    pub linearized: Option<LinearizedProfile>,
    pub trajectory: Trajectory,
}

/// Two-term expansion of `(u, m)` at `x = h0` for `lambda = 1`.
pub fn startup_series<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    alpha: f64,
    h0: f64,
) -> Result<(f64, f64)> {
    let f_alpha = nl.eval_f(alpha);
    if !(f_alpha > nl.tol_root()) {
        return Err(Error::NonPositiveSource(f_alpha));
    }
    if !(h0 > 0.0 && h0 <= DEFAULT_H0) {
        return Err(Error::InvalidStartupStep(h0));
    }
    Ok(origin_series(nl, e, alpha, 1.0, h0))
}

/// Expansion of the even linearized mode `(w, n)` at `x`, for the solution
/// of `phi(u')' + lambda f(u) = 0` with maximum `alpha`.
pub(crate) fn linearized_series<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    alpha: f64,
    lambda: f64,
    x: f64,
) -> (f64, f64) {
    let p = e.p();
    let a = lambda * nl.eval_f(alpha);
    let ap = lambda * nl.eval_fprime(alpha);
    let c_w = ((p - 1.0) / p) * ap * a.powf(-(p - 2.0) / (p - 1.0)) / (p - 1.0);
    (1.0 - c_w * x.powf(e.q()), -ap * x)
}

struct Shot<'a, N: ?Sized> {
    nl: &'a N,
    e: Exponent,
}

impl<N: Nonlinearity + ?Sized> Shot<'_, N> {
    fn rhs(&self, joint: bool) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
        move |_x, y| {
            let [u, m, w, n] = *y;
            let du = self.e.phi_inv(m);
            let dm = -self.nl.eval_f(u);
            if joint {
                let dw = n / self.e.phi_prime_of_flux(m);
                let dn = -self.nl.eval_fprime(u) * w;
                [du, dm, dw, dn]
            } else {
                [du, dm, 0.0, 0.0]
            }
        }
    }
}

/// Shoot from `u(0) = alpha`, `u'(0) = 0` and rescale to `[0, 1]`.
pub fn shoot_and_scale<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    alpha: f64,
    opts: &ShootOptions,
) -> Result<ShootResult> {
    let h0 = opts.h0;
    let (u0, m0) = startup_series(nl, e, alpha, h0)?;
    let (w0, n0) = linearized_series(nl, e, alpha, 1.0, h0);
    let joint = opts.linearized;
    let shot = Shot { nl, e: *e };
    let rhs = shot.rhs(joint);
    let tol = opts.rk_tol;
    let cap = opts.x_cap.unwrap_or(1e3 * alpha.powf(1.0 / e.q()));

    let mut traj = Trajectory {
        x: vec![h0],
        state: vec![[u0, m0, w0, n0]],
    };
    let mut x = h0;
    let mut y = [u0, m0, w0, n0];
    let mut h = h0;
    let b = loop {
        let (yn, norm) = rk::step(&rhs, x, &y, h, tol);
        if !(norm <= 1.0) || yn.iter().any(|v| !v.is_finite()) {
            h = rk::next_step(h, if norm.is_finite() { norm } else { 1e10 });
            if h < 1e-14 * (1.0 + x) {
                return Err(Error::StepFailure { x });
            }
            continue;
        }
        if yn[0] <= 0.0 {
            // zero of u inside this step: bisect on the partial-step value
            let (mut lo, mut hi) = (0.0f64, h);
            while hi - lo > EVENT_TOL {
                let mid = 0.5 * (lo + hi);
                if rk::step(&rhs, x, &y, mid, tol).0[0] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            let end = rk::step(&rhs, x, &y, root, tol).0;
            traj.x.push(x + root);
            traj.state.push(end);
            break x + root;
        }
        if yn[1] >= 0.0 {
            // u turned back up before reaching zero
            return Err(Error::NoCrossing { cap: x + h });
        }
        x += h;
        y = yn;
        traj.x.push(x);
        traj.state.push(y);
        h = rk::next_step(h, norm);
        if x > cap {
            return Err(Error::NoCrossing { cap });
        }
    };

    let p = e.p();
    let lambda = b.powf(p);
    let flux_scale = b.powf(p - 1.0);
    let grid = opts.grid.max(2);
    let dense = |xi: f64| -> [f64; 4] {
        if xi <= h0 {
            let (u, m) = origin_series(nl, e, alpha, 1.0, xi);
            let (w, n) = linearized_series(nl, e, alpha, 1.0, xi);
            return [u, m, w, n];
        }
        let k = traj.x.partition_point(|&t| t <= xi).saturating_sub(1);
        let k = k.min(traj.x.len() - 2);
        rk::step(&rhs, traj.x[k], &traj.state[k], xi - traj.x[k], tol).0
    };

    let mut xs = Vec::with_capacity(grid);
    let mut us = Vec::with_capacity(grid);
    let mut ups = Vec::with_capacity(grid);
    let mut ms = Vec::with_capacity(grid);
    let mut ws = Vec::with_capacity(grid);
    let mut ns = Vec::with_capacity(grid);
    for i in 0..grid {
        let xi = i as f64 / (grid - 1) as f64;
        let st = if i == grid - 1 {
            *traj.state.last().unwrap()
        } else {
            dense(b * xi)
        };
        let du = b * e.phi_inv(st[1]);
        xs.push(xi);
        us.push(if i == grid - 1 { 0.0 } else { st[0] });
        ups.push(du);
        ms.push(flux_scale * st[1]);
        ws.push(st[2]);
        ns.push(flux_scale * st[3]);
    }
    us[0] = alpha;

    let (x0, uprime_x0) = match nl.crossing_level().filter(|&g| alpha > g && g > 0.0) {
        Some(gamma) => {
            let (mut lo, mut hi) = (0.0f64, b);
            while hi - lo > EVENT_TOL {
                let mid = 0.5 * (lo + hi);
                if dense(mid)[0] > gamma {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let xg = 0.5 * (lo + hi);
            (Some(xg / b), Some(b * e.phi_inv(dense(xg)[1])))
        }
        None => (None, None),
    };

    let linearized = joint.then(|| {
        let upto = x0.unwrap_or(1.0);
        LinearizedProfile {
            positive_up_to_x0: xs
                .iter()
                .zip(&ws)
                .filter(|(&x, _)| x > 0.0 && x <= upto)
                .all(|(_, &w)| w > 0.0),
            w_at_1: *ws.last().unwrap(),
            x: xs.clone(),
            w: ws,
            n: ns,
        }
    });

    Ok(ShootResult {
        b,
        lambda,
        profile: Profile {
            x: xs,
            u: us,
            uprime: ups,
            m: ms,
            x0,
            uprime_x0,
            lambda,
            alpha,
        },
        linearized,
        trajectory: traj,
    })
}

/// Flux-form residuals of an unscaled shot: per step
/// `|m_{k+1} - m_k + integral f(u) dx| / (1 + |m|)`, in the same mixed norm
/// the step controller uses, and the largest absolute cumulative
/// `|m(x_k) - m(h0) + integral_{h0}^{x_k} f(u) dx|`.
///
/// The integrals use 5-point Gauss–Legendre on dense values of `u`.
pub fn flux_residuals<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    traj: &Trajectory,
    rk_tol: f64,
) -> (f64, f64) {
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let shot = Shot { nl, e: *e };
    let rhs = shot.rhs(false);
    let (mut worst_step, mut worst_cum, mut cum) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..traj.x.len() - 1 {
        let (xa, xb) = (traj.x[k], traj.x[k + 1]);
        let half = 0.5 * (xb - xa);
        let integral: f64 = NODES
            .iter()
            .zip(WEIGHTS)
            .map(|(t, wgt)| {
                let dx = half * (1.0 + t);
                let u = rk::step(&rhs, xa, &traj.state[k], dx, rk_tol).0[0];
                wgt * nl.eval_f(u)
            })
            .sum::<f64>()
            * half;
        let (ma, mb) = (traj.state[k][1], traj.state[k + 1][1]);
        let r = mb - ma + integral;
        worst_step = worst_step.max(r.abs() / (1.0 + ma.abs().max(mb.abs())));
        cum += r;
        worst_cum = worst_cum.max(cum.abs());
    }
    (worst_step, worst_cum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedOptions {
    pub rk_tol: f64,
    pub h0: f64,
    /// Largest accepted relative mismatch between the interpolated slope and
    /// `phi^{-1}` of the interpolated flux at cell midpoints.
    pub interp_tol: f64,
}

impl Default for LinearizedOptions {
    fn default() -> Self {
        Self {
            rk_tol: DEFAULT_RK_TOL,
            h0: DEFAULT_H0,
            interp_tol: 1e-6,
        }
    }
}

/// Even linearized mode along a stored profile.
pub fn integrate_linearized_along<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    profile: &Profile,
    opts: &LinearizedOptions,
) -> Result<LinearizedProfile> {
    Ok(integrate_linearized_with_stations(nl, e, profile, opts, &[])?.0)
}

/// As [`integrate_linearized_along`], also returning `(w, n)` at each of
/// the sorted `stations`.
pub(crate) fn integrate_linearized_with_stations<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    profile: &Profile,
    opts: &LinearizedOptions,
    stations: &[f64],
) -> Result<(LinearizedProfile, Vec<[f64; 2]>)> {
    check_interpolation(nl, e, profile, opts.interp_tol)?;
    let lambda = profile.lambda;
    let alpha = profile.alpha;
    let h0 = opts.h0;
    if let Some(k) = profile
        .m
        .iter()
        .skip(1)
        .take(profile.m.len() - 2)
        .position(|&m| m >= 0.0)
    {
        return Err(Error::DegenerateProfile(profile.x[k + 1]));
    }

    let rhs = |x: f64, y: &[f64; 2]| -> [f64; 2] {
        let (u, m) = profile.sample_at(x, nl, e);
        [
            y[1] / e.phi_prime_of_flux(m),
            -lambda * nl.eval_fprime(u) * y[0],
        ]
    };

    // knots: grid points and stations, merged
    let mut knots: Vec<(f64, Option<usize>, Option<usize>)> = profile
        .x
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, Some(i), None))
        .collect();
    knots.extend(
        stations
            .iter()
            .enumerate()
            .map(|(j, &x)| (x, None, Some(j))),
    );
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n_grid = profile.x.len();
    let mut w = vec![0.0; n_grid];
    let mut n = vec![0.0; n_grid];
    let mut at_stations = vec![[f64::NAN; 2]; stations.len()];

    let (ws, ns) = linearized_series(nl, e, alpha, lambda, h0);
    let (mut x, mut y) = (h0, [ws, ns]);
    let mut h = h0;
    for &(xk, gi, sj) in &knots {
        let val = if xk <= h0 {
            let (a, b) = linearized_series(nl, e, alpha, lambda, xk);
            if xk == 0.0 {
                [1.0, 0.0]
            } else {
                [a, b]
            }
        } else {
            let (yn, hn) =
                rk::integrate_to(&rhs, x, y, xk, h, opts.rk_tol).ok_or(Error::StepFailure { x })?;
            x = xk;
            y = yn;
            h = hn;
            yn
        };
        if let Some(i) = gi {
            w[i] = val[0];
            n[i] = val[1];
        }
        if let Some(j) = sj {
            at_stations[j] = val;
        }
    }

    let upto = profile.x0.unwrap_or(1.0);
    let positive_up_to_x0 = profile
        .x
        .iter()
        .zip(&w)
        .filter(|(&x, _)| x > 0.0 && x <= upto)
        .all(|(_, &v)| v > 0.0);
    Ok((
        LinearizedProfile {
            x: profile.x.clone(),
            w_at_1: *w.last().unwrap(),
            w,
            n,
            positive_up_to_x0,
        },
        at_stations,
    ))
}

/// Cells starting below this are skipped: `u'` behaves like `x^(1/(p-1))`
/// at the maximum, which no cubic resolves, and the expansion covers it.
const MISMATCH_FROM: f64 = 0.05;

/// Largest relative mismatch at cell midpoints between the derivative of the
/// interpolated `u` and `phi^{-1}` of the interpolated flux.
pub fn interpolation_mismatch<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    profile: &Profile,
) -> f64 {
    let scale = profile.uprime.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut worst = 0.0f64;
    for k in 1..profile.x.len() - 1 {
        let (xa, xb) = (profile.x[k], profile.x[k + 1]);
        if xa < MISMATCH_FROM {
            continue;
        }
        let dx = xb - xa;
        // derivative of the Hermite cubic at t = 1/2
        let slope = 1.5 * (profile.u[k + 1] - profile.u[k]) / dx
            - 0.25 * (profile.uprime[k] + profile.uprime[k + 1]);
        let dma = -profile.lambda * nl.eval_f(profile.u[k]);
        let dmb = -profile.lambda * nl.eval_f(profile.u[k + 1]);
        let m = hermite(0.5, dx, profile.m[k], dma, profile.m[k + 1], dmb);
        worst = worst.max((slope - e.phi_inv(m)).abs() / scale);
    }
    worst
}

fn check_interpolation<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    profile: &Profile,
    limit: f64,
) -> Result<()> {
    let mismatch = interpolation_mismatch(nl, e, profile);
    if mismatch > limit {
        return Err(Error::GridTooCoarse { mismatch, limit });
    }
    Ok(())
}
