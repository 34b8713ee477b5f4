//! Operator logarithmic derivatives of the qubit state.
//!
//! Three kinds are provided:
//!
//! * the phase-space derivative `L_k = ∫ ∂_k log Q · Δ(·; +1) dμ`, built from
//!   the Husimi function and mapped back with the upper-symbol kernel;
//! * the symmetric derivative solving `∂_kρ = ½(ρL + Lρ)`;
//! * the right derivative `L = ρ⁻¹ ∂_kρ`.
//!
//! The deviation operators `h_k = ∂_kρ − ½(ρL_k + L_kρ)` measure how far the
//! phase-space derivative is from being a symmetric one.
//!
//! The closed forms involve `ln((1 − r)/(1 + r))` combined with odd powers of
//! `r`; these cancel catastrophically near `r = 0`, so below
//! [`SERIES_THRESHOLD`] they are evaluated from their Maclaurin series.

use crate::error::{Error, Result};
use crate::phasespace::{sphere_point, sw_kernel};
use crate::quadrature::{sphere_integrate, QuadSpec};
use crate::qubit::{eig2, Complex2x2, ParamIndex, QubitState};
use crate::real::{lit, Real};

/// Lower edge of the working domain in `r`.
pub const R_MIN: f64 = 1e-6;
/// Upper edge of the working domain in `r`.
pub const R_MAX: f64 = 1.0 - 1e-6;
/// Below this radius the log combinations switch to series. At 0.25 the
/// direct form of `h3r` still loses ~3 digits; the series does not.
pub const SERIES_THRESHOLD: f64 = 0.25;

// 0.25^48 < 1e-28: truncation is far below rounding
const SERIES_TERMS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogDerivKind {
    NewPhaseSpace,
    Sld,
    Rld,
}

/// How a quantity with both a closed form and an integral definition is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum Method<T> {
    Closed,
    /// Sphere quadrature of the defining integral. For the deviation
    /// operators this means the definitional route with quadrature `L_k`.
    Quadrature(QuadSpec<T>),
}

impl<T: Real> Method<T> {
    pub fn quadrature() -> Self {
        Method::Quadrature(QuadSpec::sphere_default())
    }
}

/// Rejects radii outside `[R_MIN, R_MAX]`.
pub fn check_working_domain<T: Real>(r: T) -> Result<()> {
    if r >= lit(R_MIN) && r <= lit(R_MAX) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "r = {r} outside working domain [{R_MIN:e}, 1 - {:e}]",
            1.0 - R_MAX
        )))
    }
}

/// `ln((1 − r)/(1 + r))`.
pub fn log_ratio<T: Real>(r: T) -> T {
    -(r.atanh() + r.atanh())
}

/// `a1·r + a3·r³ + (c0 + c2·r²)·ln((1 − r)/(1 + r))`, switching to the
/// odd-power series below [`SERIES_THRESHOLD`].
fn log_combo<T: Real>(r: T, a1: f64, a3: f64, c0: f64, c2: f64) -> T {
    if r.abs() >= lit(SERIES_THRESHOLD) {
        let r2 = r * r;
        return lit::<T>(a1) * r + lit::<T>(a3) * r2 * r + (lit::<T>(c0) + lit::<T>(c2) * r2) * log_ratio(r);
    }
    // ln((1 − r)/(1 + r)) = −2 Σ r^{2k+1}/(2k+1)
    let r2 = r * r;
    let mut power = r;
    let mut sum = T::zero();
    for k in 0..SERIES_TERMS {
        let mut coeff = -2.0 * c0 / (2 * k + 1) as f64;
        if k == 0 {
            coeff += a1;
        } else {
            coeff -= 2.0 * c2 / (2 * k - 1) as f64;
        }
        if k == 1 {
            coeff += a3;
        }
        sum = sum + lit::<T>(coeff) * power;
        power = power * r2;
    }
    sum
}

/// The two recurring log combinations of the closed forms:
/// `K(r) = 2r + (1 − r²) ln((1−r)/(1+r))` and `K̃(r) = 2r + ln((1−r)/(1+r))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientK<T> {
    pub k: T,
    pub k_tilde: T,
}

impl<T: Real> CoefficientK<T> {
    pub fn at(r: T) -> Self {
        Self {
            k: k_coeff(r),
            k_tilde: k_tilde_coeff(r),
        }
    }
}

/// `K(r) = 2r + (1 − r²) ln((1−r)/(1+r))`; positive on (0, 1), `≈ 4r³/3` near 0.
pub fn k_coeff<T: Real>(r: T) -> T {
    log_combo(r, 2.0, 0.0, 1.0, -1.0)
}

/// `K̃(r) = 2r + ln((1−r)/(1+r))`; negative on (0, 1), `≈ −2r³/3` near 0.
pub fn k_tilde_coeff<T: Real>(r: T) -> T {
    log_combo(r, 2.0, 0.0, 1.0, 0.0)
}

/// Scalar factor of `h₂` and `h₃`:
/// `(6r − 4r³ + 3(1 − r²) ln((1−r)/(1+r))) / 8r²`, `≈ r³/10` near 0.
pub fn h3r<T: Real>(r: T) -> T {
    log_combo(r, 6.0, -4.0, 3.0, -3.0) / (lit::<T>(8.0) * r * r)
}

/// `(identity part, n̂·σ part)` of `h₁`.
pub fn h1_coefficients<T: Real>(r: T) -> (T, T) {
    let r2 = r * r;
    let ident = k_tilde_coeff(r) / (lit::<T>(2.0) * r2);
    let along = log_combo(r, 6.0, 0.0, 3.0, -1.0) / (lit::<T>(4.0) * r2 * r);
    (ident, along)
}

pub(crate) fn frame<T: Real>(state: &QubitState<T>) -> ([T; 3], [T; 3], [T; 3]) {
    let (st, ct) = state.theta.sin_cos();
    let (sp, cp) = state.phi.sin_cos();
    ([st * cp, st * sp, ct], [ct * cp, ct * sp, -st], [-sp, cp, T::zero()])
}

fn sigma_dot<T: Real>(v: [T; 3]) -> Complex2x2<T> {
    Complex2x2::from_pauli(T::zero(), v)
}

fn scaled<T: Real>(v: [T; 3], s: T) -> [T; 3] {
    v.map(|x| x * s)
}

pub(crate) fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Closed forms of the phase-space logarithmic derivatives.
pub fn new_log_derivative_closed<T: Real>(state: &QubitState<T>, k: ParamIndex) -> Result<Complex2x2<T>> {
    check_working_domain(state.r)?;
    let r = state.r;
    let (n, e_theta, e_phi) = frame(state);
    let three = lit::<T>(3.0);
    Ok(match k {
        ParamIndex::R => {
            let c = k_tilde_coeff(r) / (lit::<T>(2.0) * r * r * r);
            (Complex2x2::identity().scale(r) - sigma_dot(scaled(n, three))).scale(c)
        }
        ParamIndex::Theta => {
            let c = three * k_coeff(r) / (lit::<T>(4.0) * r * r);
            sigma_dot(scaled(e_theta, c))
        }
        ParamIndex::Phi => {
            let c = three * k_coeff(r) / (lit::<T>(4.0) * r * r);
            sigma_dot(scaled(e_phi, c * state.theta.sin()))
        }
    })
}

/// `∂_k Q / Q` at a sphere point, with `∂_k Q` taken analytically.
pub(crate) fn log_husimi_gradient<T: Real>(state: &QubitState<T>, m: [T; 3]) -> [T; 3] {
    let half = lit::<T>(0.5);
    let (n, e_theta, e_phi) = frame(state);
    let q = half * (T::one() + state.r * dot(n, m));
    [
        half * dot(n, m) / q,
        half * state.r * dot(e_theta, m) / q,
        half * state.r * state.theta.sin() * dot(e_phi, m) / q,
    ]
}

/// All three phase-space derivatives by quadrature of the defining integral.
pub fn new_log_derivatives_quadrature<T: Real>(
    state: &QubitState<T>,
    spec: &QuadSpec<T>,
) -> Result<[Complex2x2<T>; 3]> {
    check_working_domain(state.r)?;
    sphere_integrate(
        |t, p| {
            let grad = log_husimi_gradient(state, sphere_point(t, p));
            let kernel = sw_kernel(t, p, T::one());
            grad.map(|g| kernel.scale(g))
        },
        spec,
    )
}

/// Phase-space logarithmic derivative `L_k`.
pub fn new_log_derivative<T: Real>(state: &QubitState<T>, k: ParamIndex, method: &Method<T>) -> Result<Complex2x2<T>> {
    match method {
        Method::Closed => new_log_derivative_closed(state, k),
        Method::Quadrature(spec) => Ok(new_log_derivatives_quadrature(state, spec)?[k.slot()]),
    }
}

/// All three `L_k` in parameter order.
pub fn new_log_derivatives<T: Real>(state: &QubitState<T>, method: &Method<T>) -> Result<[Complex2x2<T>; 3]> {
    match method {
        Method::Closed => Ok([
            new_log_derivative_closed(state, ParamIndex::R)?,
            new_log_derivative_closed(state, ParamIndex::Theta)?,
            new_log_derivative_closed(state, ParamIndex::Phi)?,
        ]),
        Method::Quadrature(spec) => new_log_derivatives_quadrature(state, spec),
    }
}

/// Symmetric logarithmic derivative via the eigenbasis formula
/// `L_ab = 2(∂_kρ)_ab / (λ_a + λ_b)`.
pub fn sld<T: Real>(state: &QubitState<T>, k: ParamIndex) -> Result<Complex2x2<T>> {
    let rho = state.density_matrix();
    let eig = eig2(&rho)?;
    let lam = eig.values;
    let tiny = lit::<T>(16.0) * T::epsilon();
    if lam[0] + lam[0] <= tiny {
        return Err(Error::Domain(format!(
            "symmetric derivative undefined for a pure state (r = {})",
            state.r
        )));
    }
    // columns of u are the eigenvectors
    let v = eig.vectors;
    let u = Complex2x2::new(v[0][0], v[1][0], v[0][1], v[1][1]);
    let d = u.adjoint() * state.d_rho(k) * u;
    let mut l = Complex2x2::zero();
    for a in 0..2 {
        for b in 0..2 {
            l.m[a][b] = d.m[a][b] * (lit::<T>(2.0) / (lam[a] + lam[b]));
        }
    }
    Ok(u * l * u.adjoint())
}

/// Right logarithmic derivative `ρ⁻¹ ∂_kρ` (not Hermitian in general).
pub fn rld<T: Real>(state: &QubitState<T>, k: ParamIndex) -> Result<Complex2x2<T>> {
    let inv = state
        .density_matrix()
        .inverse()
        .map_err(|_| Error::Domain(format!("density matrix singular at r = {}", state.r)))?;
    Ok(inv * state.d_rho(k))
}

/// Closed forms of the deviation operators.
pub fn deviation_h_closed<T: Real>(state: &QubitState<T>, k: ParamIndex) -> Result<Complex2x2<T>> {
    check_working_domain(state.r)?;
    let r = state.r;
    let (n, e_theta, e_phi) = frame(state);
    Ok(match k {
        ParamIndex::R => {
            let (ident, along) = h1_coefficients(r);
            Complex2x2::from_pauli(ident, scaled(n, along))
        }
        ParamIndex::Theta => sigma_dot(scaled(e_theta, -h3r(r))),
        ParamIndex::Phi => sigma_dot(scaled(e_phi, -h3r(r) * state.theta.sin())),
    })
}

/// `h_k = ∂_kρ − ½(ρL_k + L_kρ)`.
///
/// `Method::Closed` uses the closed forms; `Method::Quadrature` evaluates the
/// definition with `L_k` from sphere quadrature.
pub fn deviation_h<T: Real>(state: &QubitState<T>, k: ParamIndex, method: &Method<T>) -> Result<Complex2x2<T>> {
    match method {
        Method::Closed => deviation_h_closed(state, k),
        Method::Quadrature(_) => {
            let l = new_log_derivative(state, k, method)?;
            Ok(deviation_from(state, k, &l))
        }
    }
}

/// All three `h_k` in parameter order.
pub fn deviations_h<T: Real>(state: &QubitState<T>, method: &Method<T>) -> Result<[Complex2x2<T>; 3]> {
    match method {
        Method::Closed => Ok([
            deviation_h_closed(state, ParamIndex::R)?,
            deviation_h_closed(state, ParamIndex::Theta)?,
            deviation_h_closed(state, ParamIndex::Phi)?,
        ]),
        Method::Quadrature(_) => {
            let ls = new_log_derivatives(state, method)?;
            Ok([
                deviation_from(state, ParamIndex::R, &ls[0]),
                deviation_from(state, ParamIndex::Theta, &ls[1]),
                deviation_from(state, ParamIndex::Phi, &ls[2]),
            ])
        }
    }
}

fn deviation_from<T: Real>(state: &QubitState<T>, k: ParamIndex, l: &Complex2x2<T>) -> Complex2x2<T> {
    state.d_rho(k) - state.density_matrix().jordan(l)
}
