//! Stratonovich–Weyl correspondence for a spin-½ system.
//!
//! The kernel used throughout is the closed 2×2 form
//! `Δ(Ω; s) = ½(1 + 3^{(1+s)/2} m̂·σ)` with `m̂ = (sinθ₁cosφ₁, sinθ₁sinφ₁, cosθ₁)`.
//! Symbols are paired with the dual kernel `Δ(Ω; −s)` on the way back.

use num_complex::Complex;

use crate::error::Result;
use crate::quadrature::{sphere_integrate, QuadSpec};
use crate::qubit::{Complex2x2, QubitState};
use crate::real::{lit, Real};

/// Kernel indices that the rest of the crate exercises.
pub const TESTED_KERNEL_INDICES: [f64; 2] = [-1.0, 1.0];

/// Stratonovich–Weyl kernel family at a fixed index `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwKernel<T> {
    pub s: T,
}

impl<T: Real> SwKernel<T> {
    pub fn new(s: T) -> Self {
        Self { s }
    }

    /// `3^{(1+s)/2}`.
    pub fn strength(&self) -> T {
        lit::<T>(3.0).powf((T::one() + self.s) * lit(0.5))
    }

    pub fn at(&self, theta1: T, phi1: T) -> Complex2x2<T> {
        sw_kernel(theta1, phi1, self.s)
    }

    /// `false` for indices other than ±1; those are accepted but unverified.
    pub fn is_tested(&self) -> bool {
        TESTED_KERNEL_INDICES
            .iter()
            .any(|&t| (self.s.to_f64_lossy() - t).abs() == 0.0)
    }
}

/// Unit vector of the sphere point `(θ₁, φ₁)`.
pub fn sphere_point<T: Real>(theta1: T, phi1: T) -> [T; 3] {
    let (st, ct) = theta1.sin_cos();
    let (sp, cp) = phi1.sin_cos();
    [st * cp, st * sp, ct]
}

/// `Δ(θ₁, φ₁; s)`.
pub fn sw_kernel<T: Real>(theta1: T, phi1: T, s: T) -> Complex2x2<T> {
    let half = lit::<T>(0.5);
    let k = SwKernel::new(s).strength() * half;
    Complex2x2::from_pauli(half, sphere_point(theta1, phi1).map(|x| x * k))
}

/// Symbol `F_A(Ω; s) = tr[A Δ(Ω; s)]` at one point (real part; exact for Hermitian `A`).
pub fn weyl_symbol<T: Real>(a: &Complex2x2<T>, s: T, theta1: T, phi1: T) -> T {
    (*a * sw_kernel(theta1, phi1, s)).trace().re
}

/// Complex symbol, for non-Hermitian operators.
pub fn weyl_symbol_complex<T: Real>(a: &Complex2x2<T>, s: T, theta1: T, phi1: T) -> Complex<T> {
    (*a * sw_kernel(theta1, phi1, s)).trace()
}

/// Weyl map `A ↦ F_A(·; s)`.
pub fn weyl_map<T: Real>(a: Complex2x2<T>, s: T) -> impl Fn(T, T) -> T + Sync + Copy {
    move |theta1, phi1| weyl_symbol(&a, s, theta1, phi1)
}

/// Inverse map `F ↦ ∫ F(Ω) Δ(Ω; −s) dμ(Ω)`.
pub fn inverse_weyl<T: Real>(f: impl Fn(T, T) -> T + Sync, s: T, spec: &QuadSpec<T>) -> Result<Complex2x2<T>> {
    sphere_integrate(|t, p| sw_kernel(t, p, -s).scale(f(t, p)), spec)
}

/// Husimi function `Q = ½(1 + r m̂·n̂)` evaluated directly.
pub fn husimi_value<T: Real>(state: &QubitState<T>, theta1: T, phi1: T) -> T {
    let (st1, ct1) = theta1.sin_cos();
    let (st, ct) = state.theta.sin_cos();
    lit::<T>(0.5) * (T::one() + state.r * ct1 * ct + state.r * (phi1 - state.phi).cos() * st1 * st)
}

/// Husimi function of `state` as a closure on the sphere.
pub fn husimi<T: Real>(state: QubitState<T>) -> impl Fn(T, T) -> T + Sync + Copy {
    move |theta1, phi1| husimi_value(&state, theta1, phi1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid() -> Vec<QubitState<f64>> {
        let mut out = Vec::new();
        for &r in &[0.0, 0.3, 0.9, 1.0] {
            for &t in &[0.0, 1.0, FRAC_PI_2, PI] {
                for &p in &[0.0, 2.0, 5.0] {
                    out.push(QubitState::new(r, t, p).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn kernel_at_north_pole() {
        assert!((sw_kernel(0.0, 0.7, -1.0) - Complex2x2::diag(1.0, 0.0)).max_abs() < 1e-15);
        assert!((sw_kernel(0.0, 0.7, 1.0) - Complex2x2::diag(2.0, -1.0)).max_abs() < 1e-15);
    }

    #[test]
    fn kernel_has_unit_trace_and_is_hermitian() {
        for &s in &[-1.0, 0.0, 1.0, 0.37] {
            for i in 0..7 {
                let k = sw_kernel(0.4 * i as f64, 0.9 * i as f64, s);
                assert!((k.trace().re - 1.0).abs() < 1e-15 && k.trace().im == 0.0);
                assert!(k.is_hermitian(0.0));
            }
        }
    }

    #[test]
    fn symbol_of_identity_is_one() {
        let f = weyl_map(Complex2x2::<f64>::identity(), 1.0);
        assert!((f(0.3, 1.2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_z_lower_symbol_is_cos() {
        let f = weyl_map(Complex2x2::<f64>::pauli_z(), -1.0);
        for i in 0..10 {
            let t = 0.3 * i as f64;
            assert!((f(t, 0.5) - t.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn husimi_is_lower_symbol_of_density() {
        for s in grid() {
            let rho = s.density_matrix();
            for i in 0..12 {
                let (t1, p1) = (0.27 * i as f64, 0.55 * i as f64);
                let a = weyl_symbol(&rho, -1.0, t1, p1);
                let b = husimi_value(&s, t1, p1);
                assert!((a - b).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn husimi_extremes() {
        let s = QubitState::new(0.6, 1.1, 2.3).unwrap();
        assert!((husimi_value(&s, 1.1, 2.3) - 0.8_f64).abs() < 1e-15);
        assert!((husimi_value(&s, PI - 1.1, 2.3 + PI) - 0.2).abs() < 1e-15);
        let mixed = QubitState::new(0.0, 1.1, 2.3).unwrap();
        assert!((husimi_value(&mixed, 0.2, 0.1) - 0.5_f64).abs() < 1e-15);
    }

    #[test]
    fn husimi_bounds_on_sphere_grid() {
        for s in grid() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..=60 {
                for j in 0..120 {
                    let q = husimi_value(&s, PI * i as f64 / 60.0, 2.0 * PI * j as f64 / 120.0);
                    lo = lo.min(q);
                    hi = hi.max(q);
                }
            }
            assert!(lo >= (1.0 - s.r) / 2.0 - 1e-12 && lo >= -1e-12);
            assert!(hi <= (1.0 + s.r) / 2.0 + 1e-12 && hi <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn husimi_is_normalised() {
        let spec = QuadSpec::sphere_default();
        for s in grid() {
            let v = sphere_integrate(husimi(s), &spec).unwrap();
            assert!((v - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn kernel_sphere_average_is_identity() {
        let spec = QuadSpec::sphere_default();
        for s in [-1.0, 1.0] {
            let avg = sphere_integrate(|t, p| sw_kernel(t, p, s), &spec).unwrap();
            assert!((avg - Complex2x2::identity()).max_abs() <= 1e-10);
            let one = inverse_weyl(|_, _| 1.0, s, &spec).unwrap();
            assert!((one - Complex2x2::identity()).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn roundtrip_on_pauli_basis() {
        let spec = QuadSpec::sphere_default();
        let basis = [
            Complex2x2::<f64>::identity(),
            Complex2x2::pauli_x(),
            Complex2x2::pauli_y(),
            Complex2x2::pauli_z(),
        ];
        for s in [-1.0, 1.0] {
            for a in basis {
                let back = inverse_weyl(weyl_map(a, s), s, &spec).unwrap();
                assert!((back - a).max_abs() <= 1e-10, "s={s}");
            }
        }
    }

    #[test]
    fn density_roundtrip_through_husimi() {
        let spec = QuadSpec::sphere_default();
        let s = QubitState::new(0.7, 0.8, 2.5).unwrap();
        let back = inverse_weyl(husimi(s), -1.0, &spec).unwrap();
        assert!((back - s.density_matrix()).max_abs() <= 1e-10);
    }

    #[test]
    fn upper_symbol_cos_theta() {
        let spec = QuadSpec::sphere_default();
        let op = inverse_weyl(|t: f64, _| t.cos(), 1.0, &spec).unwrap();
        assert!((op - Complex2x2::pauli_z().scale(1.0 / 3.0)).max_abs() < 1e-12);
        let f = weyl_map(op, 1.0);
        for i in 0..8 {
            let t = 0.4 * i as f64;
            assert!((f(t, 1.0) - t.cos()).abs() < 1e-12);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn weyl_roundtrip(r in 0.0f64..=1.0, t in 0.0f64..=PI, p in 0.0f64..6.0, upper in proptest::bool::ANY) {
            let s = if upper { 1.0 } else { -1.0 };
            let rho = QubitState::new(r, t, p).unwrap().density_matrix();
            let back = inverse_weyl(weyl_map(rho, s), s, &QuadSpec::sphere_default()).unwrap();
            proptest::prop_assert!((back - rho).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn untested_indices_are_flagged() {
        assert!(SwKernel::new(-1.0_f64).is_tested());
        assert!(SwKernel::new(1.0_f64).is_tested());
        assert!(!SwKernel::new(0.0_f64).is_tested());
    }
}
