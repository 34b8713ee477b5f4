//! Complex 2×2 algebra and the Bloch-parameterised qubit state.
//!
//! Parameters are always ordered `ξ = (r, θ, φ)`; every 3-vector and 3×3
//! matrix in the crate uses this order.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{lit, Real};

/// Dense complex 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2x2<T> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Real> Complex2x2<T> {
    pub fn new(a00: Complex<T>, a01: Complex<T>, a10: Complex<T>, a11: Complex<T>) -> Self {
        Self {
            m: [[a00, a01], [a10, a11]],
        }
    }

    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one())
    }

    pub fn diag(a: T, d: T) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(Complex::new(a, T::zero()), z, z, Complex::new(d, T::zero()))
    }

    /// Hermitian matrix `[[a, c], [c*, d]]` for real `a`, `d`.
    pub fn hermitian(a: T, c: Complex<T>, d: T) -> Self {
        Self::new(Complex::new(a, T::zero()), c, c.conj(), Complex::new(d, T::zero()))
    }

    pub fn pauli_x() -> Self {
        Self::hermitian(T::zero(), Complex::new(T::one(), T::zero()), T::zero())
    }

    pub fn pauli_y() -> Self {
        Self::hermitian(T::zero(), Complex::new(T::zero(), -T::one()), T::zero())
    }

    pub fn pauli_z() -> Self {
        Self::diag(T::one(), -T::one())
    }

    /// `a0·I + a·σ`.
    pub fn from_pauli(a0: T, a: [T; 3]) -> Self {
        Self::hermitian(a0 + a[2], Complex::new(a[0], -a[1]), a0 - a[2])
    }

    /// Coefficients `(a0, a)` with `self = a0·I + a·σ` (real parts; exact for Hermitian input).
    pub fn pauli_decomposition(&self) -> (T, [T; 3]) {
        let half = lit::<T>(0.5);
        let a0 = (self.m[0][0].re + self.m[1][1].re) * half;
        let az = (self.m[0][0].re - self.m[1][1].re) * half;
        let ax = (self.m[0][1].re + self.m[1][0].re) * half;
        let ay = (self.m[1][0].im - self.m[0][1].im) * half;
        (a0, [ax, ay, az])
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.m[i][j]
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self::new(f(self.m[0][0]), f(self.m[0][1]), f(self.m[1][0]), f(self.m[1][1]))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.m.iter().flatten().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max-norm of `self − self†`.
    pub fn hermiticity_defect(&self) -> T {
        (*self - self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `½(AB + BA)`.
    pub fn jordan(&self, other: &Self) -> Self {
        (*self * *other + *other * *self).scale(lit(0.5))
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        let scale = self.max_abs();
        if d.norm() <= T::epsilon() * scale * scale {
            return Err(Error::Domain("matrix is singular".into()));
        }
        let inv = d.inv();
        Ok(Self::new(
            self.m[1][1] * inv,
            -self.m[0][1] * inv,
            -self.m[1][0] * inv,
            self.m[0][0] * inv,
        ))
    }
}

impl<T: Real> Add for Complex2x2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl<T: Real> Sub for Complex2x2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Complex2x2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|z| -z)
    }
}

impl<T: Real> Mul for Complex2x2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Eigen-decomposition of a Hermitian 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2<T> {
    /// Ascending.
    pub values: [T; 2],
    /// `vectors[i]` belongs to `values[i]`; first non-negligible component real positive.
    pub vectors: [[Complex<T>; 2]; 2],
}

impl<T: Real> Eigen2<T> {
    /// `Σ λᵢ vᵢ vᵢ†`.
    pub fn reconstruct(&self) -> Complex2x2<T> {
        let mut out = Complex2x2::zero();
        for (lambda, v) in self.values.iter().zip(self.vectors.iter()) {
            for i in 0..2 {
                for j in 0..2 {
                    out.m[i][j] = out.m[i][j] + v[i] * v[j].conj() * *lambda;
                }
            }
        }
        out
    }
}

fn fix_phase<T: Real>(v: [Complex<T>; 2]) -> [Complex<T>; 2] {
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = [v[0] / norm, v[1] / norm];
    let pivot = if v[0].norm() > lit::<T>(64.0) * T::epsilon() {
        v[0]
    } else {
        v[1]
    };
    let phase = pivot.conj() / pivot.norm();
    let mut out = [v[0] * phase, v[1] * phase];
    // pin the pivot exactly onto the real axis
    if v[0].norm() > lit::<T>(64.0) * T::epsilon() {
        out[0] = Complex::new(out[0].norm(), T::zero());
    } else {
        out[1] = Complex::new(out[1].norm(), T::zero());
    }
    out
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian 2×2 matrix.
pub fn eig2<T: Real>(h: &Complex2x2<T>) -> Result<Eigen2<T>> {
    let tol = lit::<T>(64.0) * T::epsilon() * T::one().max(h.max_abs());
    let defect = h.hermiticity_defect();
    if !(defect <= tol) {
        return Err(Error::NotHermitian {
            deviation: defect.to_f64_lossy(),
        });
    }
    let half = lit::<T>(0.5);
    let a = h.m[0][0].re;
    let d = h.m[1][1].re;
    let c = (h.m[0][1] + h.m[1][0].conj()).scale(half);
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());

    if c.norm() == T::zero() {
        return Ok(if a <= d {
            Eigen2 {
                values: [a, d],
                vectors: [[one, zero], [zero, one]],
            }
        } else {
            Eigen2 {
                values: [d, a],
                vectors: [[zero, one], [one, zero]],
            }
        });
    }

    let mean = (a + d) * half;
    let delta = (a - d) * half;
    let radius = delta.hypot(c.norm());
    let (l1, l2) = (mean - radius, mean + radius);
    let re = |x: T| Complex::new(x, T::zero());
    let (v1, v2) = if delta >= T::zero() {
        ([c, re(-(delta + radius))], [re(radius + delta), c.conj()])
    } else {
        ([re(delta - radius), c.conj()], [c, re(radius - delta)])
    };
    Ok(Eigen2 {
        values: [l1, l2],
        vectors: [fix_phase(v1), fix_phase(v2)],
    })
}

/// Index into `ξ = (r, θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ParamIndex {
    R = 1,
    Theta = 2,
    Phi = 3,
}

impl ParamIndex {
    pub const ALL: [ParamIndex; 3] = [ParamIndex::R, ParamIndex::Theta, ParamIndex::Phi];

    /// Zero-based position in a parameter 3-vector.
    pub fn slot(self) -> usize {
        self as usize - 1
    }
}

/// One-qubit state `ρ = ½(1 + r n̂·σ)` with `n̂ = (sinθ cosφ, sinθ sinφ, cosθ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitState<T> {
    pub r: T,
    pub theta: T,
    pub phi: T,
}

impl<T: Real> QubitState<T> {
    /// Requires `r ∈ [0, 1]`, `θ ∈ [0, π]` and a finite `φ`.
    pub fn new(r: T, theta: T, phi: T) -> Result<Self> {
        if !(r >= T::zero() && r <= T::one()) {
            return Err(Error::Domain(format!("purity radius r = {r} outside [0, 1]")));
        }
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(Error::Domain(format!("polar angle theta = {theta} outside [0, pi]")));
        }
        if !phi.is_finite() {
            return Err(Error::Domain("azimuth phi is not finite".into()));
        }
        Ok(Self { r, theta, phi })
    }

    pub fn params(&self) -> [T; 3] {
        [self.r, self.theta, self.phi]
    }

    pub fn with_param(&self, k: ParamIndex, value: T) -> Self {
        let mut s = *self;
        match k {
            ParamIndex::R => s.r = value,
            ParamIndex::Theta => s.theta = value,
            ParamIndex::Phi => s.phi = value,
        }
        s
    }

    pub fn direction(&self) -> [T; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn bloch_vector(&self) -> [T; 3] {
        self.direction().map(|x| x * self.r)
    }

    pub fn density_matrix(&self) -> Complex2x2<T> {
        let half = lit::<T>(0.5);
        Complex2x2::from_pauli(half, self.bloch_vector().map(|x| x * half))
    }

    /// Analytic `∂ρ/∂ξᵏ`; traceless for every k.
    pub fn d_rho(&self, k: ParamIndex) -> Complex2x2<T> {
        let half = lit::<T>(0.5);
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        let r = self.r;
        let dv = match k {
            ParamIndex::R => [st * cp, st * sp, ct],
            ParamIndex::Theta => [r * ct * cp, r * ct * sp, -r * st],
            ParamIndex::Phi => [-r * st * sp, r * st * cp, T::zero()],
        };
        Complex2x2::from_pauli(T::zero(), dv.map(|x| x * half))
    }

    /// `((1 − r)/2, (1 + r)/2)`.
    pub fn eigenvalues(&self) -> [T; 2] {
        let half = lit::<T>(0.5);
        [(T::one() - self.r) * half, (T::one() + self.r) * half]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn maximally_mixed_at_zero_radius() {
        let rho = QubitState::new(0.0, 1.1, 2.2).unwrap().density_matrix();
        assert!((rho - Complex2x2::identity().scale(0.5)).max_abs() < 1e-16);
    }

    #[test]
    fn pure_state_on_pole() {
        let rho = QubitState::new(1.0, 0.0, 0.3).unwrap().density_matrix();
        assert!((rho - Complex2x2::diag(1.0, 0.0)).max_abs() < 1e-16);
    }

    #[test]
    fn equatorial_half_radius() {
        let rho = QubitState::new(0.5, FRAC_PI_2, 0.0).unwrap().density_matrix();
        let want = Complex2x2::new(c(0.5, 0.0), c(0.25, 0.0), c(0.25, 0.0), c(0.5, 0.0));
        assert!((rho - want).max_abs() < 1e-16);
    }

    #[test]
    fn d_rho_phi_example() {
        let d = QubitState::new(0.5, FRAC_PI_2, 0.0).unwrap().d_rho(ParamIndex::Phi);
        let want = Complex2x2::new(c(0.0, 0.0), c(0.0, -0.25), c(0.0, 0.25), c(0.0, 0.0));
        assert!((d - want).max_abs() < 1e-16);
    }

    #[test]
    fn d_rho_matches_central_differences_on_grid() {
        let h = 1e-6;
        for &r in &[0.1, 0.5, 0.9] {
            for &theta in &[0.4, FRAC_PI_2, 2.7] {
                for &phi in &[0.3, 2.0, 5.5] {
                    let s = QubitState::new(r, theta, phi).unwrap();
                    for k in ParamIndex::ALL {
                        let x = s.params()[k.slot()];
                        let plus = s.with_param(k, x + h).density_matrix();
                        let minus = s.with_param(k, x - h).density_matrix();
                        let fd = (plus - minus).scale(0.5 / h);
                        let an = s.d_rho(k);
                        assert!((fd - an).max_abs() < 1e-9, "k={k:?} r={r} θ={theta} φ={phi}");
                        assert!(an.trace().norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn eig2_examples() {
        let e = eig2(&Complex2x2::<f64>::identity()).unwrap();
        assert_eq!(e.values, [1.0, 1.0]);
        let e = eig2(&Complex2x2::<f64>::pauli_z()).unwrap();
        assert_eq!(e.values, [-1.0, 1.0]);
        let rho = QubitState::new(0.5, FRAC_PI_2, 0.0).unwrap().density_matrix();
        let e = eig2(&rho).unwrap();
        assert_abs_diff_eq!(e.values[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(e.values[1], 0.75, epsilon = 1e-15);
        assert!((e.reconstruct() - rho).max_abs() < 1e-12);
    }

    #[test]
    fn eig2_rejects_non_hermitian() {
        let m = Complex2x2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(eig2(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig2_phase_convention() {
        let m = Complex2x2::hermitian(0.3, c(0.2, -0.7), -0.4);
        let e = eig2(&m).unwrap();
        for v in e.vectors {
            assert_eq!(v[0].im, 0.0);
            assert!(v[0].re > 0.0);
        }
    }

    #[test]
    fn trace_and_spectrum_of_states() {
        for i in 0..=10 {
            let r = i as f64 / 10.0;
            let s = QubitState::new(r, 1.3, 4.0).unwrap();
            let rho = s.density_matrix();
            assert!((rho.trace() - c(1.0, 0.0)).norm() <= 1e-15);
            let e = eig2(&rho).unwrap();
            assert_abs_diff_eq!(e.values[0], (1.0 - r) / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(e.values[1], (1.0 + r) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn state_validation() {
        assert!(QubitState::new(1.2, 0.0, 0.0).is_err());
        assert!(QubitState::new(0.5, PI + 0.1, 0.0).is_err());
        assert!(QubitState::new(0.5, 0.1, f64::NAN).is_err());
        assert!(QubitState::new(0.5_f64, PI, 0.0).is_ok());
    }

    #[test]
    fn works_in_single_precision() {
        let s = QubitState::new(0.5_f32, std::f32::consts::FRAC_PI_2, 0.0).unwrap();
        let e = eig2(&s.density_matrix()).unwrap();
        assert!((e.values[0] - 0.25).abs() < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn eig2_reconstructs(a in -3.0..3.0f64, d in -3.0..3.0f64, cr in -3.0..3.0f64, ci in -3.0..3.0f64) {
                let m = Complex2x2::hermitian(a, c(cr, ci), d);
                let e = eig2(&m).unwrap();
                prop_assert!(e.values[0] <= e.values[1]);
                prop_assert!((e.reconstruct() - m).max_abs() <= 1e-12);
                let [v1, v2] = e.vectors;
                let overlap = v1[0].conj() * v2[0] + v1[1].conj() * v2[1];
                prop_assert!(overlap.norm() < 1e-12);
            }

            #[test]
            fn density_is_hermitian_unit_trace(r in 0.0..=1.0f64, th in 0.0..=PI, ph in 0.0..(2.0 * PI)) {
                let rho = QubitState::new(r, th, ph).unwrap().density_matrix();
                prop_assert!(rho.is_hermitian(0.0));
                prop_assert!((rho.trace().re - 1.0).abs() <= 1e-15);
            }
        }
    }
}
