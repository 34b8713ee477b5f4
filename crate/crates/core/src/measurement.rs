//! POVM families on a moving outcome window, outcome densities, estimator
//! moments and Monte Carlo sampling of the outcome `φ̂`.
//!
//! Elements have the form
//!
//! ```text
//! Π(φ̂) = [ x11          x12 + i·y12 ]
//!        [ x12 − i·y12  x22         ]
//! ```
//!
//! on the window `[μ − π, μ + π]`, `μ = φ_c + ε`, where `φ_c` is the angle the
//! family was constructed at and `ε` the offset of the prior guess.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_1d, GaussLegendre, QuadSpec, QuadValue};
use crate::qubit::{Complex2x2, QubitState};
use crate::real::{lit, sgn, Real};

/// Completeness tolerance used by [`validate_povm`].
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Lowest admissible `λ₁`.
pub const POSITIVITY_TOL: f64 = 1e-12;
/// Unbiasedness tolerance.
pub const UNBIASED_TOL: f64 = 1e-8;
/// Tolerance for symmetry and zero-mean residuals.
pub const SHAPE_TOL: f64 = 1e-9;
/// Minimum number of cells in the sampling table.
pub const MIN_SAMPLER_CELLS: usize = 4096;

/// Matrix elements of one POVM element (or of its derivative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PovmElement<T> {
    pub x11: T,
    pub x22: T,
    pub x12: T,
    pub y12: T,
}

impl<T: Real> PovmElement<T> {
    pub fn zero() -> Self {
        Self {
            x11: T::zero(),
            x22: T::zero(),
            x12: T::zero(),
            y12: T::zero(),
        }
    }

    pub fn matrix(&self) -> Complex2x2<T> {
        use num_complex::Complex;
        Complex2x2::new(
            Complex::new(self.x11, T::zero()),
            Complex::new(self.x12, self.y12),
            Complex::new(self.x12, -self.y12),
            Complex::new(self.x22, T::zero()),
        )
    }

    /// `(λ₁, λ₂)`, smaller first.
    pub fn eigenvalues(&self) -> (T, T) {
        let half = lit::<T>(0.5);
        let two = lit::<T>(2.0);
        let d = self.x11 - self.x22;
        let root = (d * d + (two * self.x12).powi(2) + (two * self.y12).powi(2)).sqrt();
        (half * (self.x11 + self.x22 - root), half * (self.x11 + self.x22 + root))
    }

    /// `tr(ρΠ)` for a density written as `½(1 + b·σ)`.
    pub fn expectation(&self, state: &QubitState<T>) -> T {
        let b = state.bloch_vector();
        let half = lit::<T>(0.5);
        half * (self.x11 + self.x22) + half * b[2] * (self.x11 - self.x22) + b[0] * self.x12 - b[1] * self.y12
    }
}

impl<T: Real> QuadValue<T> for PovmElement<T> {
    fn zero_value() -> Self {
        PovmElement::zero()
    }
    fn sum_with(self, o: Self) -> Self {
        Self {
            x11: self.x11 + o.x11,
            x22: self.x22 + o.x22,
            x12: self.x12 + o.x12,
            y12: self.y12 + o.y12,
        }
    }
    fn scaled_by(self, w: T) -> Self {
        Self {
            x11: self.x11 * w,
            x22: self.x22 * w,
            x12: self.x12 * w,
            y12: self.y12 * w,
        }
    }
    fn all_finite(&self) -> bool {
        self.x11.is_finite() && self.x22.is_finite() && self.x12.is_finite() && self.y12.is_finite()
    }
}

/// A one-parameter POVM family for estimating `φ`.
pub trait PovmFamily<T: Real>: Send + Sync {
    fn name(&self) -> String;

    /// Window centre `μ`.
    fn center(&self) -> T;

    /// Outcome window `[lo, hi]`.
    fn window(&self) -> (T, T);

    fn element(&self, phi_hat: T) -> PovmElement<T>;

    /// Derivative of the element with respect to the estimated `φ`, with the
    /// window centre and construction angle moving together. `None` when the
    /// family carries no derivative.
    fn d_element(&self, phi_hat: T) -> Option<PovmElement<T>>;

    /// Abscissae where the elements jump or kink.
    fn discontinuities(&self) -> Vec<T>;
}

/// `spec` with every discontinuity of `p` strictly inside `(a, b)` as a split.
pub fn spec_on<T: Real>(p: &dyn PovmFamily<T>, a: T, b: T, spec: &QuadSpec<T>) -> QuadSpec<T> {
    spec.with_splits(p.discontinuities().into_iter().filter(|&s| s > a && s < b))
}

/// `∫ f` over `[a, b]`, split at the family's discontinuities.
pub fn integrate_povm<T: Real, V: QuadValue<T>>(
    p: &dyn PovmFamily<T>,
    f: impl Fn(T) -> V,
    a: T,
    b: T,
    spec: &QuadSpec<T>,
) -> Result<V> {
    integrate_1d(f, a, b, &spec_on(p, a, b, spec))
}

/// `∫ f` over the whole window.
pub fn integrate_window<T: Real, V: QuadValue<T>>(
    p: &dyn PovmFamily<T>,
    f: impl Fn(T) -> V,
    spec: &QuadSpec<T>,
) -> Result<V> {
    let (lo, hi) = p.window();
    integrate_povm(p, f, lo, hi, spec)
}

/// Even, normalised profile `g(u)` on `[−π, π]` used as the diagonal `x11`.
pub trait SymmetricProfile<T: Real>: Send + Sync {
    fn name(&self) -> String;
    fn value(&self, u: T) -> T;
    fn derivative(&self, u: T) -> T;
}

/// Gaussian of width `σ` truncated to `[−π, π]` and renormalised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile<T> {
    pub sigma: T,
    norm: T,
}

impl<T: Real> GaussianProfile<T> {
    pub fn new(sigma: T) -> Result<Self> {
        if !(sigma.is_finite() && sigma > T::zero()) {
            return Err(Error::Construction(format!("sigma must be positive, got {sigma}")));
        }
        let two = lit::<T>(2.0);
        let e = (T::PI() / (sigma * two.sqrt())).erf();
        let norm = T::one() / (sigma * (two * T::PI()).sqrt() * e);
        Ok(Self { sigma, norm })
    }

    /// `1 / (σ√(2π) erf(π/(σ√2)))`.
    pub fn normalisation(&self) -> T {
        self.norm
    }
}

impl<T: Real> SymmetricProfile<T> for GaussianProfile<T> {
    fn name(&self) -> String {
        format!("gaussian(sigma={})", self.sigma)
    }

    fn value(&self, u: T) -> T {
        self.norm * (-(u * u) / (lit::<T>(2.0) * self.sigma * self.sigma)).exp()
    }

    fn derivative(&self, u: T) -> T {
        -u / (self.sigma * self.sigma) * self.value(u)
    }
}

/// Gaussian profile plus `Σ_k c_k (cos(k u) + cos((k+1) u))`, k = 1, 2, ….
///
/// Each added term is even, integrates to zero over `[−π, π]` and vanishes
/// at `u = ±π`, so normalisation, symmetry and the edge value are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedProfile<T> {
    pub base: GaussianProfile<T>,
    pub coeffs: Vec<T>,
}

impl<T: Real> PerturbedProfile<T> {
    /// Rejects coefficients large enough to make the profile touch zero.
    pub fn new(base: GaussianProfile<T>, coeffs: Vec<T>) -> Result<Self> {
        let floor = base.value(T::PI());
        let budget = coeffs.iter().fold(T::zero(), |acc, c| acc + c.abs()) * lit(2.0);
        if !(budget < floor) {
            return Err(Error::Construction(format!(
                "perturbation amplitude {budget} reaches the profile minimum {floor}"
            )));
        }
        Ok(Self { base, coeffs })
    }

    /// `terms` coefficients drawn uniformly, using up to 90% of the budget.
    pub fn random<R: Rng + ?Sized>(base: GaussianProfile<T>, terms: usize, rng: &mut R) -> Result<Self> {
        let floor = base.value(T::PI()).to_f64_lossy();
        let cap = 0.9 * floor / (2.0 * terms.max(1) as f64);
        let coeffs = (0..terms).map(|_| lit::<T>(rng.random_range(-cap..=cap))).collect();
        Self::new(base, coeffs)
    }
}

impl<T: Real> SymmetricProfile<T> for PerturbedProfile<T> {
    fn name(&self) -> String {
        format!("{}+{} cosine terms", self.base.name(), self.coeffs.len())
    }

    fn value(&self, u: T) -> T {
        let mut v = self.base.value(u);
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = lit::<T>((i + 1) as f64);
            v = v + c * ((k * u).cos() + ((k + T::one()) * u).cos());
        }
        v
    }

    fn derivative(&self, u: T) -> T {
        let mut d = self.base.derivative(u);
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = lit::<T>((i + 1) as f64);
            let k1 = k + T::one();
            d = d - c * (k * (k * u).sin() + k1 * (k1 * u).sin());
        }
        d
    }
}

/// Where the family is built: the state, the offset `ε` and the angle `φ_c`
/// entering the off-diagonal construction `x12 = tan(φ_c)·y12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimationContext<T> {
    pub state: QubitState<T>,
    pub eps: T,
    pub construct_phi: T,
}

impl<T: Real> EstimationContext<T> {
    /// Construction angle taken from the state.
    pub fn new(state: QubitState<T>, eps: T) -> Result<Self> {
        Self::with_construct_phi(state, eps, state.phi)
    }

    pub fn with_construct_phi(state: QubitState<T>, eps: T, construct_phi: T) -> Result<Self> {
        if !eps.is_finite() || !construct_phi.is_finite() {
            return Err(Error::Domain("eps and construction angle must be finite".into()));
        }
        if construct_phi.cos().abs() <= lit::<T>(64.0) * T::epsilon() {
            return Err(Error::Construction(format!(
                "cos(phi) vanishes at construction angle {construct_phi}"
            )));
        }
        Ok(Self {
            state,
            eps,
            construct_phi,
        })
    }

    /// Window centre `φ_c + ε`.
    pub fn center(&self) -> T {
        self.construct_phi + self.eps
    }

    /// Same context at another state, moving the construction angle along.
    pub fn at_state(&self, state: QubitState<T>) -> Result<Self> {
        Self::with_construct_phi(state, self.eps, state.phi)
    }
}

/// Family with `x11 = x22 = g(φ̂ − μ)`, `y12 = cos(φ_c)·g·sgn(μ − φ̂)` and
/// `x12 = sin(φ_c)·g·sgn(μ − φ̂)`.
///
/// The off-diagonal modulus equals `x11`, so `λ₁ ≡ 0`: every element is rank
/// one up to the diagonal, i.e. a sharp measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpFamily<T, P> {
    pub profile: P,
    pub construct_phi: T,
    pub eps: T,
}

impl<T: Real, P: SymmetricProfile<T>> SharpFamily<T, P> {
    pub fn new(profile: P, ctx: &EstimationContext<T>) -> Self {
        Self {
            profile,
            construct_phi: ctx.construct_phi,
            eps: ctx.eps,
        }
    }
}

impl<T: Real, P: SymmetricProfile<T>> PovmFamily<T> for SharpFamily<T, P> {
    fn name(&self) -> String {
        format!("sharp[{}]", self.profile.name())
    }

    fn center(&self) -> T {
        self.construct_phi + self.eps
    }

    fn window(&self) -> (T, T) {
        let mu = self.center();
        (mu - T::PI(), mu + T::PI())
    }

    fn element(&self, phi_hat: T) -> PovmElement<T> {
        let mu = self.center();
        let g = self.profile.value(phi_hat - mu);
        let s = sgn(mu - phi_hat);
        let (sa, ca) = self.construct_phi.sin_cos();
        PovmElement {
            x11: g,
            x22: g,
            x12: sa * g * s,
            y12: ca * g * s,
        }
    }

    // The jump of sgn(μ − φ̂) at φ̂ = μ is left out: it only adds a point
    // mass weighted by sin(φ_c − φ), which is zero for the angle the family is
    // evaluated at.
    fn d_element(&self, phi_hat: T) -> Option<PovmElement<T>> {
        let mu = self.center();
        let u = phi_hat - mu;
        let g = self.profile.value(u);
        let dg = -self.profile.derivative(u);
        let s = sgn(mu - phi_hat);
        let (sa, ca) = self.construct_phi.sin_cos();
        Some(PovmElement {
            x11: dg,
            x22: dg,
            x12: (ca * g + sa * dg) * s,
            y12: (-sa * g + ca * dg) * s,
        })
    }

    fn discontinuities(&self) -> Vec<T> {
        vec![self.center()]
    }
}

/// The saturating family with a truncated Gaussian profile of width `sigma`.
pub fn gaussian_sharp_family<T: Real>(
    sigma: T,
    ctx: &EstimationContext<T>,
) -> Result<SharpFamily<T, GaussianProfile<T>>> {
    Ok(SharpFamily::new(GaussianProfile::new(sigma)?, ctx))
}

/// Piecewise-linear family read from a table; independent of `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPovm<T> {
    pub phi_hat: Vec<T>,
    pub rows: Vec<PovmElement<T>>,
}

impl<T: Real> TabulatedPovm<T> {
    /// `x22` is set equal to `x11`.
    pub fn from_rows(rows: Vec<(T, T, T, T)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Construction("table needs at least two rows".into()));
        }
        let mut phi_hat = Vec::with_capacity(rows.len());
        let mut elems = Vec::with_capacity(rows.len());
        for (i, &(p, x11, x12, y12)) in rows.iter().enumerate() {
            if !(p.is_finite() && x11.is_finite() && x12.is_finite() && y12.is_finite()) {
                return Err(Error::Construction(format!("non-finite value in row {}", i + 1)));
            }
            if let Some(&prev) = phi_hat.last() {
                if !(p > prev) {
                    return Err(Error::Construction(format!(
                        "phi_hat not strictly increasing at row {}",
                        i + 1
                    )));
                }
            }
            phi_hat.push(p);
            elems.push(PovmElement {
                x11,
                x22: x11,
                x12,
                y12,
            });
        }
        Ok(Self { phi_hat, rows: elems })
    }

    /// Reads columns `phi_hat, x11, x12, y12` (by header name, any order).
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("missing column '{name}'")))
        };
        let idx = [col("phi_hat")?, col("x11")?, col("x12")?, col("y12")?];
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let mut v = [T::zero(); 4];
            for (slot, &i) in v.iter_mut().zip(&idx) {
                let cell = rec.get(i).unwrap_or("");
                let x: f64 = cell
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: cannot parse '{cell}'", line + 2)))?;
                *slot = lit(x);
            }
            rows.push((v[0], v[1], v[2], v[3]));
        }
        Self::from_rows(rows)
    }
}

impl<T: Real> PovmFamily<T> for TabulatedPovm<T> {
    fn name(&self) -> String {
        format!("tabulated({} rows)", self.rows.len())
    }

    fn center(&self) -> T {
        let (lo, hi) = self.window();
        lit::<T>(0.5) * (lo + hi)
    }

    fn window(&self) -> (T, T) {
        (self.phi_hat[0], self.phi_hat[self.phi_hat.len() - 1])
    }

    fn element(&self, phi_hat: T) -> PovmElement<T> {
        let (lo, hi) = self.window();
        if phi_hat < lo || phi_hat > hi {
            return PovmElement::zero();
        }
        let j = self
            .phi_hat
            .partition_point(|&p| p <= phi_hat)
            .clamp(1, self.phi_hat.len() - 1);
        let (p0, p1) = (self.phi_hat[j - 1], self.phi_hat[j]);
        let t = (phi_hat - p0) / (p1 - p0);
        let (a, b) = (self.rows[j - 1], self.rows[j]);
        a.scaled_by(T::one() - t).sum_with(b.scaled_by(t))
    }

    fn d_element(&self, _phi_hat: T) -> Option<PovmElement<T>> {
        Some(PovmElement::zero())
    }

    fn discontinuities(&self) -> Vec<T> {
        self.phi_hat[1..self.phi_hat.len() - 1].to_vec()
    }
}

/// Diagnostics of a POVM family at an estimation context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub family: String,
    /// `max |∫Π − I|`.
    pub completeness_residual: f64,
    pub min_lambda1: f64,
    /// Largest `|λ₁|` on the quadrature nodes.
    pub max_abs_lambda1: f64,
    /// `max |x11(μ + u) − x11(μ − u)|` on the quadrature nodes.
    pub symmetry_residual: f64,
    pub x12_mean: f64,
    pub y12_mean: f64,
    /// `|∫(φ̂ − (φ + ε)) q dφ̂|`.
    pub unbiasedness_residual: f64,
    /// `y12/cos φ_c` positive left of `μ`, zero at `μ`, negative right of it.
    pub sign_conditions_ok: bool,
    /// Symmetry and zero-mean residuals all within [`SHAPE_TOL`].
    pub shape_ok: bool,
    pub complete: bool,
    pub positive: bool,
    pub unbiased: bool,
    pub passed: bool,
}

/// Checks completeness, positivity, shape and unbiasedness of `p`.
pub fn validate_povm<T: Real>(
    p: &dyn PovmFamily<T>,
    ctx: &EstimationContext<T>,
    spec: &QuadSpec<T>,
) -> Result<ValidationReport> {
    let (lo, hi) = p.window();
    let mu = p.center();
    let total = integrate_window(p, |x| p.element(x), spec)?;
    let completeness = [
        (total.x11 - T::one()).abs(),
        (total.x22 - T::one()).abs(),
        total.x12.abs(),
        total.y12.abs(),
    ]
    .into_iter()
    .fold(T::zero(), T::max);

    let nodes: Vec<T> = spec_on(p, lo, hi, spec)
        .nodes(lo, hi)?
        .into_iter()
        .map(|(x, _)| x)
        .collect();
    let n_nodes = nodes.len();
    let mut points = nodes;
    points.extend(p.discontinuities());
    points.push(mu);

    let cphi = ctx.construct_phi.cos();
    let mut min_l1 = T::infinity();
    let mut max_abs_l1 = T::zero();
    let mut symmetry = T::zero();
    let mut signs_ok = true;
    for (i, &x) in points.iter().enumerate() {
        let e = p.element(x);
        let (l1, _) = e.eigenvalues();
        min_l1 = min_l1.min(l1);
        // at a jump sgn(0) = 0 leaves x11·I; that single point is not counted
        if i < n_nodes {
            max_abs_l1 = max_abs_l1.max(l1.abs());
        }
        let mirror = mu + mu - x;
        if mirror >= lo && mirror <= hi {
            symmetry = symmetry.max((e.x11 - p.element(mirror).x11).abs());
        }
        let ratio = e.y12 / cphi;
        let expected = sgn(mu - x);
        let ok = if expected > T::zero() {
            ratio > T::zero()
        } else if expected < T::zero() {
            ratio < T::zero()
        } else {
            ratio == T::zero()
        };
        signs_ok &= ok;
    }

    let target = ctx.state.phi + ctx.eps;
    let bias = integrate_window(p, |x| (x - target) * p.element(x).expectation(&ctx.state), spec)?;

    let f = |v: T| v.to_f64_lossy();
    let complete = completeness.to_f64_lossy() <= COMPLETENESS_TOL;
    let positive = min_l1.to_f64_lossy() >= -POSITIVITY_TOL;
    let unbiased = bias.abs().to_f64_lossy() <= UNBIASED_TOL;
    Ok(ValidationReport {
        family: p.name(),
        completeness_residual: f(completeness),
        min_lambda1: f(min_l1),
        max_abs_lambda1: f(max_abs_l1),
        symmetry_residual: f(symmetry),
        x12_mean: f(total.x12),
        y12_mean: f(total.y12),
        unbiasedness_residual: f(bias.abs()),
        sign_conditions_ok: signs_ok,
        shape_ok: [symmetry, total.x12.abs(), total.y12.abs()]
            .iter()
            .all(|v| v.to_f64_lossy() <= SHAPE_TOL),
        complete,
        positive,
        unbiased,
        passed: complete && positive && unbiased,
    })
}

/// Outcome density `q(φ̂) = tr[ρ Π(φ̂)]` of a family at a state.
pub struct OutcomeDensity<'a, T: Real> {
    pub state: QubitState<T>,
    pub povm: &'a dyn PovmFamily<T>,
}

impl<'a, T: Real> OutcomeDensity<'a, T> {
    pub fn value(&self, phi_hat: T) -> T {
        self.povm.element(phi_hat).expectation(&self.state)
    }

    pub fn window(&self) -> (T, T) {
        self.povm.window()
    }

    pub fn splits(&self) -> Vec<T> {
        let (lo, hi) = self.window();
        self.povm
            .discontinuities()
            .into_iter()
            .filter(|&s| s > lo && s < hi)
            .collect()
    }

    pub fn mass(&self, spec: &QuadSpec<T>) -> Result<T> {
        integrate_window(self.povm, |x| self.value(x), spec)
    }
}

/// Builds the outcome density, rejecting values below `−1e−12` at the
/// quadrature nodes.
pub fn outcome_distribution<'a, T: Real>(
    ctx: &EstimationContext<T>,
    p: &'a dyn PovmFamily<T>,
    spec: &QuadSpec<T>,
) -> Result<OutcomeDensity<'a, T>> {
    let q = OutcomeDensity {
        state: ctx.state,
        povm: p,
    };
    let (lo, hi) = p.window();
    for (x, _) in spec_on(p, lo, hi, spec).nodes(lo, hi)? {
        let v = q.value(x);
        if !(v.to_f64_lossy() >= -POSITIVITY_TOL) {
            return Err(Error::NegativeDensity {
                phi_hat: x.to_f64_lossy(),
                value: v.to_f64_lossy(),
            });
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments<T> {
    pub mean: T,
    /// `E[(φ̂ − φ)²]`, the error variance about the true angle.
    pub variance: T,
    /// `E[(φ̂ − E φ̂)²]`.
    pub central_variance: T,
}

/// Mean and variance of the estimator `φ̂` under the outcome density.
pub fn estimator_moments<T: Real>(
    ctx: &EstimationContext<T>,
    p: &dyn PovmFamily<T>,
    spec: &QuadSpec<T>,
) -> Result<Moments<T>> {
    let q = outcome_distribution(ctx, p, spec)?;
    let phi = ctx.state.phi;
    let m: [T; 3] = integrate_window(
        p,
        |x| {
            let v = q.value(x);
            let d = x - phi;
            [v, d * v, d * d * v]
        },
        spec,
    )?;
    let shift = m[1] / m[0];
    Ok(Moments {
        mean: phi + shift,
        variance: m[2],
        central_variance: m[2] / m[0] - shift * shift,
    })
}

/// Inverse-CDF table over the outcome window.
///
/// The density is integrated cell by cell (4-point Gauss–Legendre) and the
/// cumulative distribution is linear inside each cell. Split points are
/// cell edges.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCdfSampler {
    edges: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdfSampler {
    pub fn new<T: Real>(q: &OutcomeDensity<'_, T>, cells: usize) -> Result<Self> {
        let cells = cells.max(MIN_SAMPLER_CELLS);
        let (lo, hi) = q.window();
        let (lo, hi) = (lo.to_f64_lossy(), hi.to_f64_lossy());
        let mut cuts = vec![lo];
        cuts.extend(q.splits().iter().map(|s| s.to_f64_lossy()));
        cuts.push(hi);

        let mut edges = vec![lo];
        for pair in cuts.windows(2) {
            let share = (((pair[1] - pair[0]) / (hi - lo)) * cells as f64).ceil().max(1.0) as usize;
            let w = (pair[1] - pair[0]) / share as f64;
            for i in 1..share {
                edges.push(pair[0] + w * i as f64);
            }
            edges.push(pair[1]);
        }

        let rule = GaussLegendre::<f64>::new(4);
        let mut cdf = Vec::with_capacity(edges.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut mass = 0.0;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let at = mid + half * x;
                let v = q.value(lit::<T>(at)).to_f64_lossy();
                if !v.is_finite() || v < -POSITIVITY_TOL {
                    return Err(Error::InvalidDensity(format!("density {v} at phi_hat = {at}")));
                }
                mass += w * half * v.max(0.0);
            }
            acc += mass;
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::InvalidDensity("density has no mass".into()));
        }
        if (acc - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidDensity(format!("density integrates to {acc}, not 1")));
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(Self { edges, cdf })
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    /// Inverse of the piecewise-linear cumulative distribution.
    pub fn quantile(&self, u: f64) -> f64 {
        let j = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let (x0, x1) = (self.edges[j - 1], self.edges[j]);
        if c1 > c0 {
            x0 + (x1 - x0) * ((u - c0) / (c1 - c0))
        } else {
            x0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.quantile(rng.random::<f64>())).collect()
    }
}

/// `n` draws from `q` with the caller's generator.
pub fn sample_outcomes<T: Real, R: Rng + ?Sized>(q: &OutcomeDensity<'_, T>, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    Ok(InverseCdfSampler::new(q, MIN_SAMPLER_CELLS)?.sample(n, rng))
}

/// `n` draws from a ChaCha8 stream seeded with `seed`.
pub fn sample_outcomes_seeded<T: Real>(q: &OutcomeDensity<'_, T>, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_outcomes(q, n, &mut rng)
}

/// Empirical moments of a sample with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub mean_se: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `√((m₄ − s⁴)/n)`.
    pub variance_se: f64,
}

impl SampleSummary {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::Domain(format!("need at least two samples, got {n}")));
        }
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &x in xs {
            let d2 = (x - mean) * (x - mean);
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = m2 / (nf - 1.0);
        let m4 = m4 / nf;
        let pop = m2 / nf;
        Ok(Self {
            n,
            mean,
            mean_se: (variance / nf).sqrt(),
            variance,
            variance_se: ((m4 - pop * pop).max(0.0) / nf).sqrt(),
        })
    }
}
