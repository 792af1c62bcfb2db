//! Non-singularity verdicts and the numerical invariant report.

use serde::Serialize;

/// Even mode `w(0) = 1`, `w'(0) = 0` of the linearized equation along a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizedProfile {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    /// `phi'(u') w'`.
    pub n: Vec<f64>,
    pub w_at_1: f64,
    pub positive_up_to_x0: bool,
}

impl LinearizedProfile {
    pub fn max_abs_w(&self) -> f64 {
        self.w.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }
}

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::plaplacian::Exponent;
use crate::shooting::{
    integrate_linearized_with_stations, LinearizedOptions, DEFAULT_H0, DEFAULT_RK_TOL,
};
use crate::timemap::{Curve, CurvePoint, TimeMap};

/// `|w(1)|` at or below this fraction of `max |w|` counts as a zero.
pub const SINGULAR_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnoseOptions {
    pub n_grid: usize,
    pub rk_tol: f64,
    pub quad_rel_tol: f64,
    pub h0: f64,
    pub interp_tol: f64,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            n_grid: 2001,
            rk_tol: DEFAULT_RK_TOL,
            quad_rel_tol: 1e-12,
            h0: DEFAULT_H0,
            interp_tol: LinearizedOptions::default().interp_tol,
        }
    }
}

impl DiagnoseOptions {
    fn linearized(&self) -> LinearizedOptions {
        LinearizedOptions {
            rk_tol: self.rk_tol,
            h0: self.h0,
            interp_tol: self.interp_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnosis {
    pub alpha: f64,
    pub lambda: f64,
    pub dlambda_dalpha: f64,
    pub uprime_at_1: f64,
    pub w_at_1: f64,
    pub max_abs_w: f64,
    pub positive_up_to_x0: bool,
    pub verdict_nonsingular: bool,
}

impl Diagnosis {
    pub fn curve_point(&self) -> CurvePoint {
        CurvePoint {
            alpha: self.alpha,
            lambda: self.lambda,
            dlambda_dalpha: self.dlambda_dalpha,
            uprime_at_1: self.uprime_at_1,
            w_at_1: self.w_at_1,
        }
    }
}

pub fn is_nonsingular(w_at_1: f64, max_abs_w: f64) -> bool {
    w_at_1.abs() > SINGULAR_THRESHOLD * max_abs_w
}

/// Solve at amplitude `alpha` and test the even linearized mode at `x = 1`.
///
/// The odd mode needs no test: `u'` is an odd solution of the linearized
/// equation with `u'(1) != 0`.
pub fn diagnose<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    alpha: f64,
    opts: &DiagnoseOptions,
) -> Result<Diagnosis> {
    let tm = TimeMap::new(nl, *e).with_rel_tol(opts.quad_rel_tol);
    let profile = tm.reconstruct_profile(alpha, opts.n_grid)?;
    let (lin, _) = integrate_linearized_with_stations(nl, e, &profile, &opts.linearized(), &[])?;
    let dlambda = tm.dlambda_dalpha(alpha).unwrap_or(f64::NAN);
    let max_abs_w = lin.max_abs_w();
    Ok(Diagnosis {
        alpha,
        lambda: profile.lambda,
        dlambda_dalpha: dlambda,
        uprime_at_1: *profile.uprime.last().unwrap(),
        w_at_1: lin.w_at_1,
        max_abs_w,
        positive_up_to_x0: lin.positive_up_to_x0,
        verdict_nonsingular: is_nonsingular(lin.w_at_1, max_abs_w),
    })
}

/// Fill `w_at_1` for every point of a traced curve, in parallel.
pub fn annotate_curve<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    curve: &mut Curve,
    opts: &DiagnoseOptions,
) {
    let ws: Vec<f64> = curve
        .points
        .par_iter()
        .map(|pt| {
            diagnose(nl, e, pt.alpha, opts)
                .map(|d| d.w_at_1)
                .unwrap_or(f64::NAN)
        })
        .collect();
    for (pt, w) in curve.points.iter_mut().zip(ws) {
        pt.w_at_1 = w;
    }
}

/// The quantities of the non-singularity argument, evaluated on a computed
/// solution (with `lambda f` in place of `f`) and its even linearized mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub alpha: f64,
    pub lambda: f64,
    pub x0: f64,
    pub n_grid: usize,
    /// `max |E(x) - E(0)| / (1 + |E(0)|)`.
    pub energy_drift: f64,
    /// `(p-1)(1-x) phi(u') + phi'(u') u` at `x0`.
    pub q_at_x0: f64,
    /// `(1-x) u' + u` at `x0`.
    pub z_at_x0: f64,
    /// `u'(x0) - u'(x) < 0` at every grid point of `(x0, 1)`.
    #[serde(rename = "ineq_3_7_ok")]
    pub slope_gap_ok: bool,
    /// `G = (p-1) w phi(u') - u w' phi'(u')` at `x0`.
    #[serde(rename = "G_at_x0")]
    pub g_at_x0: f64,
    /// `|G(x0) - G(delta) - integral_delta^x0 lambda [f'(u) u - (p-1) f(u)] w dx|`.
    #[serde(rename = "G_identity_residual")]
    pub g_identity_residual: f64,
    /// `|T(1) - T(x0) - p integral_x0^1 lambda f(u) w dx|`.
    #[serde(rename = "T_identity_residual")]
    pub t_identity_residual: f64,
    /// Relative spread of `K = phi'(u')(u' w' - u'' w)` on `[delta, 1]`.
    pub wronskian_spread: f64,
    /// `|K(1) - (p-1) phi(u'(x0)) w'(x0)| / |K(1)|`.
    pub endpoint_relation_residual: f64,
    /// `|u''(x0)| = |lambda f(u(x0))| / phi'(u'(x0))`.
    pub u_dprime_at_x0: f64,
    pub w_at_1: f64,
    pub positive_up_to_x0: bool,
    /// `G(x0) > 0`; implied whenever `positive_up_to_x0` holds.
    pub g_positive: bool,
    /// `delta = 10 h0`; quantities with `phi'(u')` are not sampled below it.
    pub excluded_sliver: f64,
    pub verdict_nonsingular: bool,
}

pub fn invariant_report<N: Nonlinearity + ?Sized>(
    nl: &N,
    e: &Exponent,
    alpha: f64,
    opts: &DiagnoseOptions,
) -> Result<InvariantReport> {
    let gamma = nl.crossing_level().unwrap_or(f64::INFINITY);
    if !(alpha > gamma) {
        return Err(Error::AlphaNotAboveGamma { alpha, gamma });
    }
    let p = e.p();
    let tm = TimeMap::new(nl, *e).with_rel_tol(opts.quad_rel_tol);
    let pr = tm.reconstruct_profile(alpha, opts.n_grid)?;
    let lambda = pr.lambda;
    let x0 = pr.x0.expect("alpha > gamma");
    let du0 = pr.uprime_x0.expect("alpha > gamma");
    let m0 = e.phi(du0);
    let delta = 10.0 * opts.h0;

    let (lin, st) =
        integrate_linearized_with_stations(nl, e, &pr, &opts.linearized(), &[delta, x0])?;
    let [w_d, n_d] = st[0];
    let [w_x0, n_x0] = st[1];
    let (u_d, m_d) = pr.sample_at(delta, nl, e);

    let big_g = |u: f64, m: f64, w: f64, n: f64| (p - 1.0) * w * m - u * n;
    let big_t = |x: f64, u: f64, m: f64, w: f64, n: f64| {
        let dw = n / e.phi_prime_of_flux(m);
        x * ((p - 1.0) * m * dw + lambda * nl.eval_f(u) * w) - (p - 1.0) * m * w
    };
    let growth = |u: f64, w: f64| lambda * (nl.eval_fprime(u) * u - (p - 1.0) * nl.eval_f(u)) * w;
    let source = |u: f64, w: f64| lambda * nl.eval_f(u) * w;

    // integrals over [delta, x0] and [x0, 1] on the grid plus the end points
    let inner: Vec<usize> = (0..pr.x.len())
        .filter(|&i| pr.x[i] > delta && pr.x[i] < x0)
        .collect();
    let mut nodes = vec![(delta, growth(u_d, w_d))];
    nodes.extend(inner.iter().map(|&i| (pr.x[i], growth(pr.u[i], lin.w[i]))));
    nodes.push((x0, growth(gamma, w_x0)));
    let int_growth = cell_cubic(&nodes);

    let outer: Vec<usize> = (0..pr.x.len()).filter(|&i| pr.x[i] > x0).collect();
    let mut nodes = vec![(x0, source(gamma, w_x0))];
    nodes.extend(outer.iter().map(|&i| (pr.x[i], source(pr.u[i], lin.w[i]))));
    let int_source = cell_cubic(&nodes);

    let g_x0 = big_g(gamma, m0, w_x0, n_x0);
    let g_d = big_g(u_d, m_d, w_d, n_d);
    let last = pr.x.len() - 1;
    let t_1 = big_t(1.0, 0.0, pr.m[last], lin.w[last], lin.n[last]);
    let t_x0 = big_t(x0, gamma, m0, w_x0, n_x0);

    let wronskian = |du: f64, u: f64, w: f64, n: f64| du * n + lambda * nl.eval_f(u) * w;
    let ks: Vec<f64> = (0..pr.x.len())
        .filter(|&i| pr.x[i] >= delta)
        .map(|i| wronskian(pr.uprime[i], pr.u[i], lin.w[i], lin.n[i]))
        .collect();
    let (kmin, kmax) = ks
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| {
            (a.min(k), b.max(k))
        });
    let kscale = ks.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let k_1 = *ks.last().unwrap();
    let dw_x0 = n_x0 / e.phi_prime_nonzero(du0);

    let phi_p0 = e.phi_prime_nonzero(du0);
    let max_abs_w = lin.max_abs_w();
    Ok(InvariantReport {
        alpha,
        lambda,
        x0,
        n_grid: pr.x.len(),
        energy_drift: pr.energy_drift(nl, e),
        q_at_x0: (p - 1.0) * (1.0 - x0) * m0 + phi_p0 * gamma,
        z_at_x0: (1.0 - x0) * du0 + gamma,
        slope_gap_ok: pr
            .x
            .iter()
            .zip(&pr.uprime)
            .filter(|(&x, _)| x > x0 && x < 1.0)
            .all(|(_, &du)| du0 - du < 0.0),
        g_at_x0: g_x0,
        g_identity_residual: (g_x0 - g_d - int_growth).abs(),
        t_identity_residual: (t_1 - t_x0 - p * int_source).abs(),
        wronskian_spread: (kmax - kmin) / kscale,
        endpoint_relation_residual: (k_1 - (p - 1.0) * m0 * dw_x0).abs() / k_1.abs(),
        u_dprime_at_x0: (lambda * nl.eval_f(gamma)).abs() / phi_p0,
        w_at_1: lin.w_at_1,
        positive_up_to_x0: lin.positive_up_to_x0,
        g_positive: g_x0 > 0.0,
        excluded_sliver: delta,
        verdict_nonsingular: is_nonsingular(lin.w_at_1, max_abs_w),
    })
}

/// Composite rule on arbitrary nodes: each cell is integrated exactly against
/// the cubic through the four nearest nodes, giving fourth-order accuracy.
fn cell_cubic(nodes: &[(f64, f64)]) -> f64 {
    let n = nodes.len();
    if n < 4 {
        return nodes
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum();
    }
    // 3-point Gauss-Legendre is exact for cubics
    const G: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        (0.774_596_669_241_483_4, 5.0 / 9.0),
    ];
    (0..n - 1)
        .map(|i| {
            let s = i.saturating_sub(1).min(n - 4);
            let st = &nodes[s..s + 4];
            let (a, b) = (nodes[i].0, nodes[i + 1].0);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            G.iter()
                .map(|&(t, wt)| wt * lagrange(st, mid + half * t))
                .sum::<f64>()
                * half
        })
        .sum()
}

fn lagrange(st: &[(f64, f64)], x: f64) -> f64 {
    st.iter()
        .enumerate()
        .map(|(j, &(xj, yj))| {
            st.iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .fold(yj, |acc, (_, &(xk, _))| acc * (x - xk) / (xj - xk))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::nonlinearity::PolyNonlinearity;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn with_grid(n_grid: usize) -> DiagnoseOptions {
        DiagnoseOptions {
            n_grid,
            ..Default::default()
        }
    }

    #[test]
    fn eigenvalue_case_is_flagged_singular() {
        let lin = PolyNonlinearity::new(vec![0.0, 1.0], 1.0).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let d = diagnose(&lin, &p(2.0), alpha, &DiagnoseOptions::default()).unwrap();
            assert!(d.w_at_1.abs() <= 1e-6, "{}", d.w_at_1);
            assert!(!d.verdict_nonsingular);
        }
    }

    #[test]
    fn affine_case_is_nonsingular() {
        let aff = PolyNonlinearity::new(vec![-1.0, 1.0], 1.0).unwrap();
        for alpha in [3.0, 5.0] {
            let d = diagnose(&aff, &p(2.0), alpha, &DiagnoseOptions::default()).unwrap();
            assert!((d.w_at_1 - 1.0 / (1.0 - alpha)).abs() < 1e-5);
            assert!(d.verdict_nonsingular);
        }
    }

    #[test]
    fn quartic_samples_are_nonsingular() {
        let q = PolyNonlinearity::quartic_example();
        for alpha in [5.0, 6.0, 8.0] {
            let d = diagnose(&q, &p(3.0), alpha, &DiagnoseOptions::default()).unwrap();
            assert!(d.verdict_nonsingular, "alpha={alpha}");
            assert!(d.dlambda_dalpha < 0.0);
            assert_eq!(d.curve_point().w_at_1, d.w_at_1);
        }
    }

    #[test]
    fn annotate_fills_every_point() {
        let q = PolyNonlinearity::quartic_example();
        let e = p(3.0);
        let mut curve = TimeMap::new(&q, e).trace_curve(5.0, 8.0, 4);
        annotate_curve(&q, &e, &mut curve, &with_grid(501));
        assert_eq!(curve.points.len(), 4);
        for pt in &curve.points {
            let d = diagnose(&q, &e, pt.alpha, &with_grid(501)).unwrap();
            assert_eq!(pt.w_at_1, d.w_at_1);
        }
    }

    #[test]
    fn quartic_invariants_at_six() {
        let q = PolyNonlinearity::quartic_example();
        let r = invariant_report(&q, &p(3.0), 6.0, &DiagnoseOptions::default()).unwrap();
        assert!(r.energy_drift <= 1e-8);
        assert!(r.q_at_x0 < 0.0);
        assert!(r.z_at_x0 < 0.0);
        assert!(r.slope_gap_ok);
        assert!(r.u_dprime_at_x0 <= 1e-6);
        assert!(r.wronskian_spread <= 1e-6);
        assert!(r.endpoint_relation_residual <= 1e-6);
        assert!(r.g_identity_residual <= 1e-6);
        assert!(r.t_identity_residual <= 1e-6);
        assert!(r.g_positive);
        assert!(r.verdict_nonsingular);
    }

    #[test]
    fn identity_residuals_shrink_with_grid() {
        let q = PolyNonlinearity::quartic_example();
        let e = p(3.0);
        let reports: Vec<_> = [1001, 2001, 4001]
            .iter()
            .map(|&n| invariant_report(&q, &e, 6.0, &with_grid(n)).unwrap())
            .collect();
        for pair in reports.windows(2) {
            assert!(pair[1].g_identity_residual <= 0.5 * pair[0].g_identity_residual);
            assert!(pair[1].t_identity_residual <= 0.5 * pair[0].t_identity_residual);
        }
    }

    #[test]
    fn affine_invariants_match_closed_form() {
        // u = 1 + 2 cos(2 pi x / 3) at lambda = 4 pi^2 / 9, so x0 = 3/4
        let aff = PolyNonlinearity::new(vec![-1.0, 1.0], 1.0).unwrap();
        let r = invariant_report(&aff, &p(2.0), 3.0, &DiagnoseOptions::default()).unwrap();
        assert!(r.u_dprime_at_x0 <= 1e-8);
        assert!((r.x0 - 0.75).abs() < 1e-8);
        assert!((r.lambda - 4.0 * PI * PI / 9.0).abs() < 1e-8);
        // u'(3/4) = -2 (2 pi / 3) sin(pi / 2)
        let z = 0.25 * (-4.0 * PI / 3.0) + 1.0;
        assert!((r.z_at_x0 - z).abs() < 1e-7);
        assert!(r.g_identity_residual <= 1e-6 && r.t_identity_residual <= 1e-6);
    }

    #[test]
    fn report_requires_amplitude_above_gamma() {
        let q = PolyNonlinearity::quartic_example();
        assert!(matches!(
            invariant_report(&q, &p(3.0), 4.0, &DiagnoseOptions::default()),
            Err(Error::AlphaNotAboveGamma { .. })
        ));
    }

    #[test]
    fn report_serializes_with_wire_names() {
        let q = PolyNonlinearity::quartic_example();
        let r = invariant_report(&q, &p(3.0), 6.0, &with_grid(501)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "energy_drift",
            "q_at_x0",
            "z_at_x0",
            "ineq_3_7_ok",
            "G_at_x0",
            "G_identity_residual",
            "T_identity_residual",
            "wronskian_spread",
            "u_dprime_at_x0",
            "verdict_nonsingular",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
