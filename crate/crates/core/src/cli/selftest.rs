//! Built-in checks run by `qbound selftest`.
//!
//! Only properties that are expected to hold are checked here. The
//! comparison of all bounds along the radius sweep is reported by
//! `bounds sweep` and the acceptance suite, not asserted.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

use serde::Serialize;

use crate::bounds::{audit_derivation, bound_cmax, truncated_gaussian_variance};
use crate::derivatives::{h3r, Method};
use crate::error::Result;
use crate::measurement::{estimator_moments, gaussian_sharp_family, validate_povm, EstimationContext};
use crate::metrics::{measurement_fisher, new_metric, rld_metric, sld_metric};
use crate::phasespace::{husimi, inverse_weyl, weyl_map};
use crate::quadrature::{sphere_integrate, QuadSpec};
use crate::qubit::QubitState;

/// Reference values for the Gaussian sharp family with `σ = 3` at
/// `r = 0.5, θ = π/2, φ = 3π/4, ε = 0`, from 30-digit evaluation.
pub mod reference {
    pub const B: f64 = 1.401_480_357_103_66;
    pub const H3R: f64 = 0.014_061_175_248_376_6;
    pub const I2: f64 = 0.716_534_588_854_365;
    pub const G_PHI_PHI: f64 = 0.278_913_217_094_215;
    pub const C: f64 = 2.078_734_270_927_53;
    pub const B_MAX: f64 = 7.452_978_717_123_11;
    pub const VARIANCE: f64 = 2.835_488_085_756_356;
    /// Moving-window boundary term `(hi − φ)q(hi) − (lo − φ)q(lo)`.
    pub const BOUNDARY: f64 = 0.684_945_768_249_294;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Worst observed deviation (or slack, for one-sided checks).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn within(name: &str, value: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        value,
        tolerance,
        passed: value <= tolerance,
    }
}

fn at_least(name: &str, value: f64, floor: f64) -> Check {
    Check {
        name: name.into(),
        value,
        tolerance: floor,
        passed: value >= floor,
    }
}

/// The 12 state points used for grid checks.
pub fn standard_grid() -> Vec<QubitState<f64>> {
    let mut out = Vec::new();
    for r in [0.1, 0.5, 0.9] {
        for theta in [FRAC_PI_6, FRAC_PI_2] {
            for phi in [0.3, 3.0 * FRAC_PI_4] {
                out.push(QubitState::new(r, theta, phi).expect("grid point in domain"));
            }
        }
    }
    out
}

fn max_abs_diff(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

pub fn run_checks() -> Result<Vec<Check>> {
    let sphere = QuadSpec::sphere_default();
    let spec = QuadSpec::default();
    let grid = standard_grid();
    let mut checks = Vec::new();

    let (mut roundtrip, mut husimi_mass, mut closed_vs_quad) = (0.0f64, 0.0f64, 0.0f64);
    let (mut sld_form, mut rld_form, mut hierarchy) = (0.0f64, 0.0f64, f64::INFINITY);
    for s in &grid {
        let rho = s.density_matrix();
        let back = inverse_weyl(weyl_map(rho, -1.0), -1.0, &sphere)?;
        roundtrip = roundtrip.max((back - rho).max_abs());
        husimi_mass = husimi_mass.max((sphere_integrate(husimi(*s), &sphere)? - 1.0).abs());
        let closed = new_metric(s, &Method::Closed)?;
        let quad = new_metric(s, &Method::Quadrature(sphere.clone()))?;
        closed_vs_quad = closed_vs_quad.max(max_abs_diff(&closed, &quad));

        let exact = (s.r * s.theta.sin()).powi(2);
        let g_sld = sld_metric(s)?[2][2];
        let g_rld = rld_metric(s)?[2][2];
        sld_form = sld_form.max((g_sld - exact).abs());
        rld_form = rld_form.max((g_rld - exact / (1.0 - s.r * s.r)).abs());
        let ctx = EstimationContext::new(*s, 0.0)?;
        let p = gaussian_sharp_family(3.0, &ctx)?;
        let g_fisher = measurement_fisher(s, &p, &spec)?;
        hierarchy = hierarchy.min(g_sld - g_fisher).min(g_rld - g_sld);
    }
    checks.push(within("weyl_roundtrip", roundtrip, 1e-10));
    checks.push(within("husimi_normalised", husimi_mass, 1e-10));
    checks.push(within("metric_closed_vs_quadrature", closed_vs_quad, 1e-8));
    checks.push(within("sld_closed_form", sld_form, 1e-9));
    checks.push(within("rld_closed_form", rld_form, 1e-9));
    checks.push(at_least("fisher_sld_rld_ordering", hierarchy, -1e-9));

    let state = QubitState::new(0.5, FRAC_PI_2, 3.0 * FRAC_PI_4)?;
    let ctx = EstimationContext::new(state, 0.0)?;
    let p = gaussian_sharp_family(3.0, &ctx)?;
    let cm = bound_cmax(&ctx, &p, &spec)?;
    let g = new_metric(&state, &Method::Closed)?[2][2];
    let moments = estimator_moments(&ctx, &p, &spec)?;
    checks.push(within("reference_b", (cm.b - reference::B).abs(), 1e-9));
    checks.push(within("reference_h3r", (h3r(0.5) - reference::H3R).abs(), 1e-12));
    checks.push(within("reference_i2", (cm.i2 - reference::I2).abs(), 1e-9));
    checks.push(within("reference_g_phi_phi", (g - reference::G_PHI_PHI).abs(), 1e-12));
    checks.push(within("reference_c", (cm.c_bound - reference::C).abs(), 1e-9));
    checks.push(within("reference_c_max", (cm.c_max - reference::C).abs(), 1e-9));
    checks.push(within("reference_b_max", (cm.c_max / g - reference::B_MAX).abs(), 1e-8));
    checks.push(within(
        "reference_b_sld",
        (1.0 / sld_metric(&state)?[2][2] - 4.0).abs(),
        1e-9,
    ));
    checks.push(within(
        "reference_b_rld",
        (1.0 / rld_metric(&state)?[2][2] - 3.0).abs(),
        1e-9,
    ));
    checks.push(within(
        "reference_variance",
        (moments.variance - reference::VARIANCE).abs(),
        1e-9,
    ));
    checks.push(within(
        "variance_closed_form",
        (truncated_gaussian_variance(3.0) - reference::VARIANCE).abs(),
        1e-12,
    ));

    let v = validate_povm(&p, &ctx, &spec)?;
    checks.push(within("povm_completeness", v.completeness_residual, 1e-9));
    checks.push(within("povm_lambda1", v.max_abs_lambda1, 1e-12));
    checks.push(within("povm_unbiased", v.unbiasedness_residual, 1e-8));

    let a = audit_derivation(&ctx, &p, &spec)?;
    checks.push(at_least("audit_schwarz_slack", a.schwarz_slack, -1e-10));
    checks.push(within("audit_bracket_imaginary", a.imag_residual, 1e-10));
    checks.push(within(
        "audit_boundary_term",
        (a.identity_residual - reference::BOUNDARY).abs(),
        1e-4,
    ));
    let mut grid_slack = f64::INFINITY;
    for s in &grid {
        let c = EstimationContext::new(*s, 0.0)?;
        let q = gaussian_sharp_family(3.0, &c)?;
        grid_slack = grid_slack.min(audit_derivation(&c, &q, &spec)?.schwarz_slack);
    }
    checks.push(at_least("audit_schwarz_slack_grid", grid_slack, -1e-10));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_checks().unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(checks.len() > 20);
    }
}
