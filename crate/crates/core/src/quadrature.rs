//! Fixed-order composite Gauss–Legendre quadrature on intervals and on the
//! unit sphere.
//!
//! Every rule here is deterministic: node placement depends only on the
//! [`QuadSpec`], and partial sums are always combined in the same order, so
//! repeated runs give bit-identical results.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubit::Complex2x2;
use crate::real::{lit, Real};

/// Values that can be integrated: reals, complex numbers, 2×2 matrices and
/// fixed-size arrays of those.
///
/// Method names avoid `zero`/`add`/`is_finite` so they never shadow the
/// numeric traits on scalars.
pub trait QuadValue<T>: Copy + Send + Sync {
    fn zero_value() -> Self;
    fn sum_with(self, other: Self) -> Self;
    fn scaled_by(self, w: T) -> Self;
    fn all_finite(&self) -> bool;
}

macro_rules! impl_quad_value_float {
    ($t:ty) => {
        impl QuadValue<$t> for $t {
            fn zero_value() -> Self {
                0.0
            }
            fn sum_with(self, other: Self) -> Self {
                self + other
            }
            fn scaled_by(self, w: $t) -> Self {
                self * w
            }
            fn all_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
        }
    };
}

impl_quad_value_float!(f32);
impl_quad_value_float!(f64);

impl<T: Real> QuadValue<T> for Complex<T> {
    fn zero_value() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn sum_with(self, other: Self) -> Self {
        self + other
    }
    fn scaled_by(self, w: T) -> Self {
        self * w
    }
    fn all_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<T: Real> QuadValue<T> for Complex2x2<T> {
    fn zero_value() -> Self {
        Complex2x2::zero()
    }
    fn sum_with(self, other: Self) -> Self {
        self + other
    }
    fn scaled_by(self, w: T) -> Self {
        self.scale(w)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl<T: Copy, V: QuadValue<T>, const N: usize> QuadValue<T> for [V; N] {
    fn zero_value() -> Self {
        [V::zero_value(); N]
    }
    fn sum_with(self, other: Self) -> Self {
        let mut out = self;
        for (o, x) in out.iter_mut().zip(other) {
            *o = o.sum_with(x);
        }
        out
    }
    fn scaled_by(self, w: T) -> Self {
        self.map(|v| v.scaled_by(w))
    }
    fn all_finite(&self) -> bool {
        self.iter().all(QuadValue::all_finite)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Roots of `P_n` by Newton iteration from the Chebyshev-like initial guess.
    pub fn new(order: usize) -> Self {
        let n = order;
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = lit::<T>(guess);
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kt = lit::<T>(k as f64);
        let p2 = ((kt + kt - T::one()) * x * p1 - (kt - T::one()) * p0) / kt;
        p0 = p1;
        p1 = p2;
    }
    let nt = lit::<T>(n as f64);
    let d = nt * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Composite Gauss–Legendre specification.
///
/// `split_points` are interior abscissae where the integrand may jump; each
/// sub-interval between them is integrated on its own, with panels shared
/// out in proportion to its length (at least one each).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadSpec<T> {
    pub panels: usize,
    pub order: usize,
    pub split_points: Vec<T>,
    rule: GaussLegendre<T>,
}

impl<T: Real> QuadSpec<T> {
    pub const DEFAULT_PANELS: usize = 64;
    pub const DEFAULT_ORDER: usize = 16;
    pub const SPHERE_PANELS: usize = 16;

    pub fn new(panels: usize, order: usize) -> Result<Self> {
        if panels < 1 {
            return Err(Error::InvalidQuadrature("panels must be >= 1".into()));
        }
        if order < 2 {
            return Err(Error::InvalidQuadrature("order must be >= 2".into()));
        }
        Ok(Self {
            panels,
            order,
            split_points: Vec::new(),
            rule: GaussLegendre::new(order),
        })
    }

    /// Per-axis rule for sphere integrals (16 panels × 16 nodes).
    pub fn sphere_default() -> Self {
        Self::new(Self::SPHERE_PANELS, Self::DEFAULT_ORDER).expect("valid constants")
    }

    pub fn with_splits(&self, points: impl IntoIterator<Item = T>) -> Self {
        let mut out = self.clone();
        out.split_points = points.into_iter().collect();
        out
    }

    /// Same rule with twice the panels; used for convergence checks.
    pub fn refined(&self) -> Self {
        let mut out = self.clone();
        out.panels *= 2;
        out
    }

    pub fn rule(&self) -> &GaussLegendre<T> {
        &self.rule
    }

    /// Absolute nodes and weights for `panels` equal panels on `[a, b]`.
    fn nodes_on(&self, a: T, b: T, panels: usize) -> Vec<(T, T)> {
        let width = (b - a) / lit(panels as f64);
        let half = width * lit(0.5);
        let mut out = Vec::with_capacity(panels * self.order);
        for p in 0..panels {
            let left = a + width * lit(p as f64);
            let mid = left + half;
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                out.push((mid + half * *x, half * *w));
            }
        }
        out
    }

    /// Nodes and weights over `[a, b]` honouring the split points.
    pub fn nodes(&self, a: T, b: T) -> Result<Vec<(T, T)>> {
        if !(a < b) {
            return Err(Error::InvalidQuadrature(format!("empty interval [{a}, {b}]")));
        }
        let mut cuts: Vec<T> = Vec::with_capacity(self.split_points.len() + 2);
        for &s in &self.split_points {
            if !(s > a && s < b) {
                return Err(Error::InvalidQuadrature(format!(
                    "split point {s} not strictly inside [{a}, {b}]"
                )));
            }
            cuts.push(s);
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite split points"));
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(a);
        edges.extend(cuts);
        edges.push(b);

        let total = b - a;
        let mut out = Vec::new();
        for pair in edges.windows(2) {
            let share = ((pair[1] - pair[0]) / total * lit(self.panels as f64))
                .round()
                .to_usize()
                .unwrap_or(1)
                .max(1);
            out.extend(self.nodes_on(pair[0], pair[1], share));
        }
        Ok(out)
    }
}

impl<T: Real> Default for QuadSpec<T> {
    fn default() -> Self {
        Self::new(Self::DEFAULT_PANELS, Self::DEFAULT_ORDER).expect("valid constants")
    }
}

/// `∫_a^b f(x) dx`.
pub fn integrate_1d<T: Real, V: QuadValue<T>>(f: impl Fn(T) -> V, a: T, b: T, spec: &QuadSpec<T>) -> Result<V> {
    let mut acc = V::zero_value();
    for (x, w) in spec.nodes(a, b)? {
        let v = f(x);
        if !v.all_finite() {
            return Err(Error::NonFinite {
                abscissa: x.to_f64_lossy(),
            });
        }
        acc = acc.sum_with(v.scaled_by(w));
    }
    Ok(acc)
}

/// `∫ F dμ` over the unit sphere with `dμ = sinθ dθ dφ / 2π` (total mass 2).
///
/// `spec` gives the per-axis rule; split points are ignored. Rows of constant
/// θ are evaluated in parallel and summed in index order.
pub fn sphere_integrate<T: Real, V: QuadValue<T>>(f: impl Fn(T, T) -> V + Sync, spec: &QuadSpec<T>) -> Result<V> {
    let plain = spec.with_splits(std::iter::empty());
    let thetas = plain.nodes(T::zero(), T::PI())?;
    let phis = plain.nodes(T::zero(), T::TAU())?;
    let norm = T::one() / T::TAU();
    let rows: Vec<Result<V>> = thetas
        .par_iter()
        .map(|&(theta, wt)| {
            let mut acc = V::zero_value();
            for &(phi, wp) in &phis {
                let v = f(theta, phi);
                if !v.all_finite() {
                    return Err(Error::NonFiniteOnSphere {
                        theta: theta.to_f64_lossy(),
                        phi: phi.to_f64_lossy(),
                    });
                }
                acc = acc.sum_with(v.scaled_by(wp));
            }
            Ok(acc.scaled_by(wt * theta.sin() * norm))
        })
        .collect();
    rows.into_iter()
        .try_fold(V::zero_value(), |acc, row| Ok(acc.sum_with(row?)))
}
