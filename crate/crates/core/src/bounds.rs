//! Variance bounds for estimating `φ` with a POVM family, and a numerical
//! audit of the steps that lead to them.
//!
//! With `q(φ̂) = tr[ρ Π(φ̂)]` and `∂` the derivative in the estimated `φ`:
//!
//! * `a = φ ∫ tr(ρ ∂Π)`, `b = 1 − ∫ φ̂ tr(ρ ∂Π)` over the window as written;
//! * `C = (a + b − 2 h3r sinθ ∫ (φ̂ − φ)(sinφ x12 + cosφ y12))²`;
//! * `C_max = (a + b − 2 h3r sinθ (I₁ − I₂))²`, reached when `λ₁ ≡ 0`.
//!
//! `a` and `b` are computed with the window held fixed. Because the window
//! moves with `φ`, differentiating the unbiasedness condition also produces
//! an edge term `(hi − φ) q(hi) − (lo − φ) q(lo)`; [`audit_derivation`]
//! reports it separately and never folds it into `a` or `b`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::derivatives::{check_working_domain, deviations_h, h3r, new_log_derivative_closed, Method};
use crate::error::{Error, Result};
use crate::measurement::{
    estimator_moments, gaussian_sharp_family, integrate_povm, integrate_window, validate_povm, EstimationContext,
    PovmFamily,
};
use crate::metrics::{husimi_classical_metric, measurement_fisher, new_metric, rld_metric, sld_metric};
use crate::quadrature::QuadSpec;
use crate::qubit::{ParamIndex, QubitState};
use crate::real::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbCoefficients<T> {
    pub a: T,
    pub b: T,
}

/// `a` and `b` by quadrature, using the family's `φ`-derivative.
pub fn ab_coefficients<T: Real>(
    ctx: &EstimationContext<T>,
    p: &dyn PovmFamily<T>,
    spec: &QuadSpec<T>,
) -> Result<AbCoefficients<T>> {
    let (lo, _) = p.window();
    if p.d_element(lo).is_none() {
        return Err(Error::Construction(format!("{} has no derivative in phi", p.name())));
    }
    let state = &ctx.state;
    let m: [T; 2] = integrate_window(
        p,
        |x| {
            let d = p.d_element(x).map(|e| e.expectation(state)).unwrap_or_else(T::zero);
            [d, x * d]
        },
        spec,
    )?;
    Ok(AbCoefficients {
        a: state.phi * m[0],
        b: T::one() - m[1],
    })
}

/// `E[u²]` of a Gaussian of width `σ` truncated to `[−π, π]`:
/// `σ²(1 − 2π e^{−π²/2σ²} / (σ√(2π) erf(π/σ√2)))`.
pub fn truncated_gaussian_variance<T: Real>(sigma: T) -> T {
    let two = lit::<T>(2.0);
    let pi = T::PI();
    let e = (pi / (sigma * two.sqrt())).erf();
    let tail = (-(pi * pi) / (two * sigma * sigma)).exp();
    sigma * sigma * (T::one() - two * pi * tail / (sigma * (two * pi).sqrt() * e))
}

/// `∫₀^π u g(u) du` for the same truncated Gaussian:
/// `σ (1 − e^{−π²/2σ²}) / (√(2π) erf(π/σ√2))`.
pub fn truncated_gaussian_half_moment<T: Real>(sigma: T) -> T {
    let two = lit::<T>(2.0);
    let pi = T::PI();
    let e = (pi / (sigma * two.sqrt())).erf();
    let tail = (-(pi * pi) / (two * sigma * sigma)).exp();
    sigma * (T::one() - tail) / ((two * pi).sqrt() * e)
}

/// Closed form of `b` for the Gaussian sharp family at `ε = 0`:
/// `1 − v/σ² + 2 r sinθ I₂`.
pub fn sharp_gaussian_b<T: Real>(sigma: T, r: T, theta: T) -> T {
    T::one() - truncated_gaussian_variance(sigma) / (sigma * sigma)
        + lit::<T>(2.0) * r * theta.sin() * truncated_gaussian_half_moment(sigma)
}

/// `∫ (φ̂ − φ)(sinφ x12 + cosφ y12) dφ̂` at the state's `φ`.
fn off_diagonal_moment<T: Real>(ctx: &EstimationContext<T>, p: &dyn PovmFamily<T>, spec: &QuadSpec<T>) -> Result<T> {
    let phi = ctx.state.phi;
    let (sp, cp) = phi.sin_cos();
    integrate_window(
        p,
        |x| {
            let e = p.element(x);
            (x - phi) * (sp * e.x12 + cp * e.y12)
        },
        spec,
    )
}

/// The bound `C`.
pub fn bound_c<T: Real>(ctx: &EstimationContext<T>, p: &dyn PovmFamily<T>, spec: &QuadSpec<T>) -> Result<T> {
    check_working_domain(ctx.state.r)?;
    let ab = ab_coefficients(ctx, p, spec)?;
    let j = off_diagonal_moment(ctx, p, spec)?;
    let inner = ab.a + ab.b - lit::<T>(2.0) * h3r(ctx.state.r) * ctx.state.theta.sin() * j;
    Ok(inner * inner)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmaxBreakdown<T> {
    pub a: T,
    pub b: T,
    /// `a + b`
    pub c: T,
    pub i1: T,
    pub i2: T,
    pub h3r: T,
    /// The bound `C` itself.
    pub c_bound: T,
    pub c_max: T,
    pub sign_conditions_ok: bool,
    pub c_nonnegative: bool,
    /// Whether `C ≤ C_max` is guaranteed (sign conditions hold and `c ≥ 0`).
    pub c_max_is_bound: bool,
}

/// `C_max` with its ingredients.
///
/// `I₁ = ∫_{lo}^{μ} ((φ̂ − μ) x11 + ε y12 / cos φ_c)`, `I₂ = ∫_{μ}^{hi} (φ̂ − φ) x11`.
pub fn bound_cmax<T: Real>(
    ctx: &EstimationContext<T>,
    p: &dyn PovmFamily<T>,
    spec: &QuadSpec<T>,
) -> Result<CmaxBreakdown<T>> {
    check_working_domain(ctx.state.r)?;
    let ab = ab_coefficients(ctx, p, spec)?;
    let (lo, hi) = p.window();
    let mu = p.center();
    let cphi = ctx.construct_phi.cos();
    let i1 = integrate_povm(
        p,
        |x| {
            let e = p.element(x);
            (x - mu) * e.x11 + ctx.eps * e.y12 / cphi
        },
        lo,
        mu,
        spec,
    )?;
    let phi = ctx.state.phi;
    let i2 = integrate_povm(p, |x| (x - phi) * p.element(x).x11, mu, hi, spec)?;
    let h = h3r(ctx.state.r);
    let two = lit::<T>(2.0);
    let st = ctx.state.theta.sin();
    let c = ab.a + ab.b;
    let j = off_diagonal_moment(ctx, p, spec)?;
    let inner_c = c - two * h * st * j;
    let inner_max = c - two * h * st * (i1 - i2);
    let signs = validate_povm(p, ctx, spec)?.sign_conditions_ok;
    let nonneg = c >= T::zero();
    Ok(CmaxBreakdown {
        a: ab.a,
        b: ab.b,
        c,
        i1,
        i2,
        h3r: h,
        c_bound: inner_c * inner_c,
        c_max: inner_max * inner_max,
        sign_conditions_ok: signs,
        c_nonnegative: nonneg,
        c_max_is_bound: signs && nonneg,
    })
}

/// Inputs of the general bilinear bound: directions `Y` (estimator) and `Z`
/// (derivatives).
pub struct BoundProblem<'a, T: Real> {
    pub ctx: EstimationContext<T>,
    pub povm: &'a dyn PovmFamily<T>,
    pub y: [T; 3],
    pub z: [T; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremReport<T> {
    /// `(YᵗVY)(ZᵗGZ)`
    pub lhs: T,
    /// `|Yᵗ(A+B)Z − tr∫T_ξ T_h Π|²`
    pub rhs: T,
    pub bracket_re: T,
    pub bracket_im: T,
    pub variance: T,
    pub metric_zz: T,
    /// `lhs − rhs`; not guaranteed non-negative for moving windows.
    pub slack: T,
}

/// Both sides of the general bound.
///
/// The estimator only reports `φ̂`, so `Y` must lie along the `φ` axis. The
/// family depends on the state only through `φ`, so `A` and `B` vanish in
/// the other columns except for `B`'s Kronecker term.
pub fn theorem_general<T: Real>(problem: &BoundProblem<'_, T>, spec: &QuadSpec<T>) -> Result<TheoremReport<T>> {
    let BoundProblem { ctx, povm, y, z } = problem;
    let povm = *povm;
    if !(y.iter().chain(z.iter()).all(|v| v.is_finite())) {
        return Err(Error::Domain("direction vectors must be finite".into()));
    }
    if y.iter().chain(z.iter()).all(|v| *v == T::zero()) {
        return Err(Error::Domain("direction vectors are both zero".into()));
    }
    if y[0] != T::zero() || y[1] != T::zero() {
        return Err(Error::UnsupportedDirection(
            "the estimator reports phi only; Y must be a multiple of e_phi".into(),
        ));
    }
    check_working_domain(ctx.state.r)?;
    let report = validate_povm(povm, ctx, spec)?;
    if !report.unbiased {
        return Err(Error::Domain(format!(
            "estimator is biased (residual {:e})",
            report.unbiasedness_residual
        )));
    }
    let state = &ctx.state;
    let g = new_metric(state, &Method::Closed)?;
    let mut metric_zz = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            metric_zz = metric_zz + z[i] * g[i][j] * z[j];
        }
    }
    let moments = estimator_moments(ctx, povm, spec)?;
    let ab = ab_coefficients(ctx, povm, spec)?;
    let hs = deviations_h(state, &Method::Closed)?;
    let t_h = hs[0].scale(z[0]) + hs[1].scale(z[1]) + hs[2].scale(z[2]);
    let phi = state.phi;
    let th: Complex<T> = integrate_window(povm, |x| (t_h * povm.element(x).matrix()).trace() * (x - phi), spec)?;
    let y3 = y[2];
    let bracket = Complex::new(y3 * z[2] * (ab.a + ab.b), T::zero()) - th * y3;
    let lhs = y3 * y3 * moments.variance * metric_zz;
    let rhs = bracket.norm_sqr();
    Ok(TheoremReport {
        lhs,
        rhs,
        bracket_re: bracket.re,
        bracket_im: bracket.im,
        variance: moments.variance,
        metric_zz,
        slack: lhs - rhs,
    })
}

/// Numerical audit of the one-parameter derivation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditReport<T> {
    /// `tr∫(φ̂ − φ) ∂ρ Π`
    pub identity_lhs: T,
    pub a_plus_b: T,
    /// `(a + b) − tr∫(φ̂ − φ) ∂ρ Π`; zero for a window that does not move.
    pub identity_residual: T,
    /// `(hi − φ) q(hi) − (lo − φ) q(lo)`.
    pub boundary_term: T,
    /// `identity_residual − boundary_term`; zero when the edge term is the
    /// whole discrepancy.
    pub identity_gap: T,
    /// `a + b − tr∫(φ̂ − φ) h Π`.
    pub bracket: T,
    pub imag_residual: T,
    /// `Re tr∫(φ̂ − φ) ρ L Π`.
    pub cross_term_re: T,
    pub cross_term_im: T,
    /// `cross_term_re − bracket`.
    pub cross_term_residual: T,
    /// `cross_term_re − (bracket − boundary_term)`.
    pub cross_term_corrected: T,
    /// `(tr∫ρ T_ξ Π T_ξ)(tr∫ρ T_L Π T_L)`
    pub schwarz_lhs: T,
    /// `|tr∫ρ T_L Π T_ξ|²`
    pub schwarz_mid: T,
    /// `bracket²`
    pub schwarz_rhs: T,
    /// `schwarz_lhs − schwarz_mid` (Cauchy–Schwarz, always ≥ 0).
    pub schwarz_slack: T,
    /// `schwarz_lhs − schwarz_rhs` (the claimed bound).
    pub bound_slack: T,
    /// `tr∫ρ L Π L − g_φφ`.
    pub metric_identity_residual: T,
}

/// Evaluates each step of the derivation for the `φ` direction.
pub fn audit_derivation<T: Real>(
    ctx: &EstimationContext<T>,
    p: &dyn PovmFamily<T>,
    spec: &QuadSpec<T>,
) -> Result<AuditReport<T>> {
    check_working_domain(ctx.state.r)?;
    let state = &ctx.state;
    let phi = state.phi;
    let rho = state.density_matrix();
    let d_rho = state.d_rho(ParamIndex::Phi);
    let l = new_log_derivative_closed(state, ParamIndex::Phi)?;
    let h = deviations_h(state, &Method::Closed)?[2];
    let ab = ab_coefficients(ctx, p, spec)?;
    let moments = estimator_moments(ctx, p, spec)?;

    // [∫(φ̂−φ)tr(∂ρΠ), ∫(φ̂−φ)tr(hΠ), ∫(φ̂−φ)tr(ρLΠ), ∫tr(ρLΠL)]
    let m: [Complex<T>; 4] = integrate_window(
        p,
        |x| {
            let pi_m = p.element(x).matrix();
            let u = x - phi;
            [
                (d_rho * pi_m).trace() * u,
                (h * pi_m).trace() * u,
                (rho * l * pi_m).trace() * u,
                (rho * l * pi_m * l).trace(),
            ]
        },
        spec,
    )?;

    let (lo, hi) = p.window();
    let q = |x: T| p.element(x).expectation(state);
    let boundary = (hi - phi) * q(hi) - (lo - phi) * q(lo);

    let a_plus_b = ab.a + ab.b;
    let identity_lhs = m[0].re;
    let identity_residual = a_plus_b - identity_lhs;
    let bracket = Complex::new(a_plus_b, T::zero()) - m[1];
    let cross = m[2];
    let schwarz_lhs = moments.variance * m[3].re;
    let schwarz_mid = cross.norm_sqr();
    let schwarz_rhs = bracket.re * bracket.re;
    let g = new_metric(state, &Method::Closed)?[2][2];
    Ok(AuditReport {
        identity_lhs,
        a_plus_b,
        identity_residual,
        boundary_term: boundary,
        identity_gap: identity_residual - boundary,
        bracket: bracket.re,
        imag_residual: bracket.im.abs(),
        cross_term_re: cross.re,
        cross_term_im: cross.im,
        cross_term_residual: cross.re - bracket.re,
        cross_term_corrected: cross.re - (bracket.re - boundary),
        schwarz_lhs,
        schwarz_mid,
        schwarz_rhs,
        schwarz_slack: schwarz_lhs - schwarz_mid,
        bound_slack: schwarz_lhs - schwarz_rhs,
        metric_identity_residual: m[3].re - g,
    })
}

/// Parameters of a bound sweep over `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig<T> {
    pub r_values: Vec<T>,
    pub theta: T,
    pub phi: T,
    pub eps: T,
    pub sigma: T,
    pub spec: QuadSpec<T>,
}

impl<T: Real> SweepConfig<T> {
    /// `steps` equally spaced radii from `r_min` to `r_max` inclusive.
    pub fn grid(r_min: T, r_max: T, steps: usize) -> Vec<T> {
        match steps {
            0 => Vec::new(),
            1 => vec![r_min],
            n => (0..n)
                .map(|i| r_min + (r_max - r_min) * lit::<T>(i as f64) / lit::<T>((n - 1) as f64))
                .collect(),
        }
    }
}

impl Default for SweepConfig<f64> {
    fn default() -> Self {
        Self {
            r_values: Self::grid(0.1, 0.9, 9),
            theta: std::f64::consts::FRAC_PI_2,
            phi: 3.0 * std::f64::consts::FRAC_PI_4,
            eps: 0.0,
            sigma: 3.0,
            spec: QuadSpec::default(),
        }
    }
}

/// One row of a sweep. Failed rows keep `r`, carry NaN elsewhere and the
/// error message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub r: T,
    pub b_max: T,
    pub b_sld: T,
    pub b_rld: T,
    pub b_fisher: T,
    pub b_husimi: T,
    pub v: T,
    /// `v·g − C`
    pub vg_minus_c: T,
    pub error: Option<String>,
}

fn sweep_row<T: Real>(cfg: &SweepConfig<T>, r: T) -> Result<SweepRow<T>> {
    let state = QubitState::new(r, cfg.theta, cfg.phi)?;
    check_working_domain(r)?;
    let ctx = EstimationContext::new(state, cfg.eps)?;
    let p = gaussian_sharp_family(cfg.sigma, &ctx)?;
    let cm = bound_cmax(&ctx, &p, &cfg.spec)?;
    let g = new_metric(&state, &Method::Closed)?[2][2];
    let v = estimator_moments(&ctx, &p, &cfg.spec)?.variance;
    let one = T::one();
    Ok(SweepRow {
        r,
        b_max: cm.c_max / g,
        b_sld: one / sld_metric(&state)?[2][2],
        b_rld: one / rld_metric(&state)?[2][2],
        b_fisher: one / measurement_fisher(&state, &p, &cfg.spec)?,
        b_husimi: one / husimi_classical_metric(&state, &Method::Closed)?[2][2],
        v,
        vg_minus_c: v * g - cm.c_bound,
        error: None,
    })
}

/// Bounds for the Gaussian sharp family along `cfg.r_values`, rows in input
/// order. A failing row is marked and the sweep continues.
pub fn bounds_sweep<T: Real>(cfg: &SweepConfig<T>) -> Vec<SweepRow<T>> {
    cfg.r_values
        .par_iter()
        .map(|&r| {
            sweep_row(cfg, r).unwrap_or_else(|e| {
                let nan = T::nan();
                SweepRow {
                    r,
                    b_max: nan,
                    b_sld: nan,
                    b_rld: nan,
                    b_fisher: nan,
                    b_husimi: nan,
                    v: nan,
                    vg_minus_c: nan,
                    error: Some(e.to_string()),
                }
            })
        })
        .collect()
}
