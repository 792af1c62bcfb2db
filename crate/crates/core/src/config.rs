//! Problem description read by the command-line tool.

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnoseOptions;
use crate::error::Result;
use crate::nonlinearity::PolyNonlinearity;
use crate::plaplacian::Exponent;
use crate::quadrature::DEFAULT_REL_TOL;
use crate::shooting::{LinearizedOptions, ShootOptions, DEFAULT_H0, DEFAULT_RK_TOL};

/// `f(u) = sum coeffs[k] u^k` with exponent `p` and crossing level `gamma`.
///
/// ```toml
/// p = 3.0
/// coeffs = [0.0, -8.0, 14.0, -7.0, 1.0]
/// gamma = 4.0
///
/// [tolerances]
/// rk_tol = 1e-10
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: f64,
    /// Ascending degree: `coeffs[k]` multiplies `u^k`.
    pub coeffs: Vec<f64>,
    pub gamma: f64,
    /// Upper end of the hypothesis scan; `4 gamma` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Time-map quadrature, relative.
    pub quad_rel_tol: f64,
    /// Quadrature behind profiles used by the diagnostics.
    pub profile_rel_tol: f64,
    /// Runge–Kutta local tolerance, mixed absolute and relative.
    pub rk_tol: f64,
    /// Startup step off the origin.
    pub h0: f64,
    /// Accepted slope/flux interpolation mismatch on a stored profile.
    pub interp_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let diag = DiagnoseOptions::default();
        Self {
            quad_rel_tol: DEFAULT_REL_TOL,
            profile_rel_tol: diag.quad_rel_tol,
            rk_tol: DEFAULT_RK_TOL,
            h0: DEFAULT_H0,
            interp_tol: LinearizedOptions::default().interp_tol,
        }
    }
}

impl ProblemConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are plain numbers")
    }

    pub fn exponent(&self) -> Result<Exponent> {
        Exponent::new(self.p)
    }

    pub fn nonlinearity(&self) -> Result<PolyNonlinearity> {
        PolyNonlinearity::new(self.coeffs.clone(), self.gamma)
    }

    pub fn u_max(&self) -> f64 {
        self.u_max.unwrap_or(4.0 * self.gamma)
    }

    pub fn shoot_options(&self) -> ShootOptions {
        ShootOptions {
            rk_tol: self.tolerances.rk_tol,
            h0: self.tolerances.h0,
            ..ShootOptions::default()
        }
    }

    pub fn diagnose_options(&self, n_grid: usize) -> DiagnoseOptions {
        DiagnoseOptions {
            n_grid,
            rk_tol: self.tolerances.rk_tol,
            quad_rel_tol: self.tolerances.profile_rel_tol,
            h0: self.tolerances.h0,
            interp_tol: self.tolerances.interp_tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "p = 3.0\ncoeffs = [0.0, -8.0, 14.0, -7.0, 1.0]\ngamma = 4.0\n";

    #[test]
    fn defaults_fill_in() {
        let c = ProblemConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(c.u_max(), 16.0);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.nonlinearity().unwrap().eval_f(6.0), 240.0);
    }

    #[test]
    fn round_trips() {
        let mut c = ProblemConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(ProblemConfig::from_toml(&c.to_toml()).unwrap(), c);
        c.u_max = Some(0.1 + 0.2);
        c.tolerances.rk_tol = 1.0 / 3.0 * 1e-9;
        assert_eq!(ProblemConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ProblemConfig::from_toml(&format!("{EXAMPLE}lambda = 1.0\n")).is_err());
        let nested = format!("{EXAMPLE}[tolerances]\nrk = 1e-9\n");
        assert!(ProblemConfig::from_toml(&nested).is_err());
        assert!(ProblemConfig::from_toml("p = 3.0\n").is_err());
    }
}
