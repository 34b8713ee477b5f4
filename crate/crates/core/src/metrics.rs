//! Metric tensors at a state point, in the coordinates `(r, θ, φ)`.
//!
//! Closed forms use `dn² = r²(dθ² + sin²θ dφ²)` for the angular part, so an
//! angular coefficient `c(r)` becomes `g_θθ = r²c` and `g_φφ = r² sin²θ c`.
//! This is the reading under which the closed phase-space metric agrees with
//! `tr(ρ L_i ∘ L_j)` evaluated from the quadrature derivatives.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::derivatives::{
    check_working_domain, k_coeff, k_tilde_coeff, log_husimi_gradient, new_log_derivatives_quadrature, sld, Method,
};
use crate::error::{Error, Result};
use crate::measurement::{integrate_window, PovmFamily, POSITIVITY_TOL};
use crate::phasespace::{husimi_value, sphere_point};
use crate::quadrature::{sphere_integrate, QuadSpec};
use crate::qubit::{Complex2x2, ParamIndex, QubitState};
use crate::real::{lit, Real};

/// Symmetric 3×3 tensor in `(r, θ, φ)` order.
pub type Metric3<T> = [[T; 3]; 3];

fn diag3<T: Real>(a: T, b: T, c: T) -> Metric3<T> {
    let z = T::zero();
    [[a, z, z], [z, b, z], [z, z, c]]
}

/// `g_ij = Re tr(ρ · ½(A_i A_j + A_j A_i))`.
fn jordan_gram<T: Real>(rho: &Complex2x2<T>, ops: &[Complex2x2<T>; 3]) -> Metric3<T> {
    let mut g = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = (*rho * ops[i].jordan(&ops[j])).trace().re;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

/// Phase-space metric built from the Husimi-based logarithmic derivatives.
///
/// `Method::Closed`: `g_rr = (9 − 5r²) K̃² / 4r⁶`, angular coefficient
/// `9K² / 16r⁶`. `Method::Quadrature`: `tr(ρ L_i ∘ L_j)` with the `L_k`
/// from sphere quadrature.
pub fn new_metric<T: Real>(state: &QubitState<T>, method: &Method<T>) -> Result<Metric3<T>> {
    check_working_domain(state.r)?;
    match method {
        Method::Closed => {
            let r = state.r;
            let (k, kt) = (k_coeff(r), k_tilde_coeff(r));
            let r2 = r * r;
            let r4 = r2 * r2;
            let grr = (lit::<T>(9.0) - lit::<T>(5.0) * r2) * kt * kt / (lit::<T>(4.0) * r4 * r2);
            let ang = lit::<T>(9.0) * k * k / (lit::<T>(16.0) * r4);
            let s2 = state.theta.sin().powi(2);
            Ok(diag3(grr, ang, ang * s2))
        }
        Method::Quadrature(spec) => {
            let ls = new_log_derivatives_quadrature(state, spec)?;
            Ok(jordan_gram(&state.density_matrix(), &ls))
        }
    }
}

/// `φφ` entry of the phase-space metric, `9K² sin²θ / 16r⁴`.
pub fn new_metric_phi<T: Real>(state: &QubitState<T>) -> Result<T> {
    Ok(new_metric(state, &Method::Closed)?[2][2])
}

/// Metric of the symmetric logarithmic derivative, `Re tr(ρ L_i L_j)`.
pub fn sld_metric<T: Real>(state: &QubitState<T>) -> Result<Metric3<T>> {
    let ls = [
        sld(state, ParamIndex::R)?,
        sld(state, ParamIndex::Theta)?,
        sld(state, ParamIndex::Phi)?,
    ];
    Ok(jordan_gram(&state.density_matrix(), &ls))
}

/// Metric of the right logarithmic derivative, `Re tr(∂_iρ ρ⁻¹ ∂_jρ)`.
pub fn rld_metric<T: Real>(state: &QubitState<T>) -> Result<Metric3<T>> {
    let inv = state
        .density_matrix()
        .inverse()
        .map_err(|_| Error::Domain(format!("density matrix singular at r = {}", state.r)))?;
    let d = ParamIndex::ALL.map(|k| state.d_rho(k));
    let mut g = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let a = (d[i] * inv * d[j]).trace().re;
            let b = (d[j] * inv * d[i]).trace().re;
            let v = lit::<T>(0.5) * (a + b);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// Operator-monotone functions labelling the monotone metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MonotoneSpec {
    /// `f(t) = (1 + t)/2`
    Sld,
    /// `f(t) = 2t/(1 + t)`
    Rld,
    /// `f(t) = (t − 1)/ln t`
    KuboMori,
}

impl MonotoneSpec {
    pub const ALL: [MonotoneSpec; 3] = [MonotoneSpec::Sld, MonotoneSpec::Rld, MonotoneSpec::KuboMori];

    pub fn name(self) -> &'static str {
        match self {
            MonotoneSpec::Sld => "SLD",
            MonotoneSpec::Rld => "RLD",
            MonotoneSpec::KuboMori => "KuboMori",
        }
    }

    pub fn f<T: Real>(self, t: T) -> T {
        let one = T::one();
        match self {
            MonotoneSpec::Sld => (one + t) * lit(0.5),
            MonotoneSpec::Rld => lit::<T>(2.0) * t / (one + t),
            MonotoneSpec::KuboMori => {
                // (t − 1)/ln t = x / ln(1 + x), exact at x = 0 by continuity
                let x = t - one;
                if x == T::zero() {
                    one
                } else {
                    x / x.ln_1p()
                }
            }
        }
    }

    pub fn g<T: Real>(self, t: T) -> T {
        T::one() / self.f(t)
    }
}

/// `(radial, angular)` coefficients `(1/(1 − r²), g((1 − r)/(1 + r))/(1 + r))`.
pub fn monotone_metric<T: Real>(spec: MonotoneSpec, r: T) -> Result<(T, T)> {
    if !(r > T::zero() && r < T::one()) {
        return Err(Error::Domain(format!("monotone metric needs 0 < r < 1, got {r}")));
    }
    let one = T::one();
    let t = (one - r) / (one + r);
    Ok((one / (one - r * r), spec.g(t) / (one + r)))
}

/// Monotone metric as a tensor at `state`.
pub fn monotone_tensor<T: Real>(spec: MonotoneSpec, state: &QubitState<T>) -> Result<Metric3<T>> {
    let (radial, ang) = monotone_metric(spec, state.r)?;
    let r2 = state.r * state.r;
    Ok(diag3(radial, r2 * ang, r2 * state.theta.sin().powi(2) * ang))
}

/// Classical Fisher metric of the Husimi function on the sphere,
/// `E_Q[∂_i log Q ∂_j log Q]`.
///
/// Closed form: radial `−K̃/2r³`, angular coefficient `K/4r³`.
pub fn husimi_classical_metric<T: Real>(state: &QubitState<T>, method: &Method<T>) -> Result<Metric3<T>> {
    check_working_domain(state.r)?;
    match method {
        Method::Closed => {
            let r = state.r;
            let r3 = r * r * r;
            let radial = -k_tilde_coeff(r) / (lit::<T>(2.0) * r3);
            let ang = k_coeff(r) / (lit::<T>(4.0) * r);
            Ok(diag3(radial, ang, ang * state.theta.sin().powi(2)))
        }
        Method::Quadrature(spec) => sphere_integrate(
            |t, p| {
                let q = husimi_value(state, t, p);
                let d = log_husimi_gradient(state, sphere_point(t, p));
                let mut out = [[T::zero(); 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        out[i][j] = q * d[i] * d[j];
                    }
                }
                out
            },
            spec,
        ),
    }
}

/// Classical Fisher information of the measurement for `φ`,
/// `∫ (∂_φ p)² / p dφ̂` with `p = tr[ρ(φ) Π(φ̂)]`.
///
/// The POVM is held fixed; only the state moves.
pub fn measurement_fisher<T: Real>(state: &QubitState<T>, povm: &dyn PovmFamily<T>, spec: &QuadSpec<T>) -> Result<T> {
    let d_rho = state.d_rho(ParamIndex::Phi);
    let floor = lit::<T>(POSITIVITY_TOL);
    let bad: std::cell::Cell<Option<(T, T)>> = std::cell::Cell::new(None);
    let value = integrate_window(
        povm,
        |x| {
            let e = povm.element(x);
            let p = e.expectation(state);
            let dp = (d_rho * e.matrix()).trace().re;
            if p > floor {
                dp * dp / p
            } else {
                if dp != T::zero() && bad.get().is_none() {
                    bad.set(Some((x, p)));
                }
                T::zero()
            }
        },
        spec,
    );
    if let Some((x, p)) = bad.get() {
        return Err(Error::NegativeDensity {
            phi_hat: x.to_f64_lossy(),
            value: p.to_f64_lossy(),
        });
    }
    value
}

/// All metrics at one state point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport<T> {
    pub r: T,
    pub theta: T,
    pub phi: T,
    pub new_metric: Metric3<T>,
    pub sld_metric: Metric3<T>,
    pub rld_metric: Metric3<T>,
    pub husimi_classical: Metric3<T>,
    pub monotone: BTreeMap<String, Metric3<T>>,
}

/// Closed-form report at `state`.
pub fn metric_report<T: Real>(state: &QubitState<T>) -> Result<MetricReport<T>> {
    let mut monotone = BTreeMap::new();
    for spec in MonotoneSpec::ALL {
        monotone.insert(spec.name().to_string(), monotone_tensor(spec, state)?);
    }
    Ok(MetricReport {
        r: state.r,
        theta: state.theta,
        phi: state.phi,
        new_metric: new_metric(state, &Method::Closed)?,
        sld_metric: sld_metric(state)?,
        rld_metric: rld_metric(state)?,
        husimi_classical: husimi_classical_metric(state, &Method::Closed)?,
        monotone,
    })
}

/// Smallest eigenvalue of a real symmetric 3×3 matrix (trigonometric method).
pub fn min_eigenvalue<T: Real>(g: &Metric3<T>) -> T {
    let three = lit::<T>(3.0);
    let p1 = g[0][1].powi(2) + g[0][2].powi(2) + g[1][2].powi(2);
    let q = (g[0][0] + g[1][1] + g[2][2]) / three;
    if p1 == T::zero() {
        return g[0][0].min(g[1][1]).min(g[2][2]);
    }
    let p2 = (g[0][0] - q).powi(2) + (g[1][1] - q).powi(2) + (g[2][2] - q).powi(2) + lit::<T>(2.0) * p1;
    let p = (p2 / lit(6.0)).sqrt();
    let mut b = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { q } else { T::zero() };
            b[i][j] = (g[i][j] - id) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det * lit(0.5)).max(-T::one()).min(T::one());
    let phi = r.acos() / three;
    q + lit::<T>(2.0) * p * (phi + lit::<T>(2.0) * T::PI() / three).cos()
}
