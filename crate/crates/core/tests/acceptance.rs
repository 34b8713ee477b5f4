//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};
use std::time::{Duration, Instant};

use qbound::bounds::{audit_derivation, bound_c, bound_cmax, bounds_sweep, theorem_general, BoundProblem, SweepConfig};
use qbound::derivatives::{deviation_h, h3r, new_log_derivative, Method};
use qbound::measurement::{
    estimator_moments, gaussian_sharp_family, outcome_distribution, sample_outcomes_seeded, validate_povm,
    EstimationContext, GaussianProfile, PerturbedProfile, PovmFamily, SampleSummary, SharpFamily,
};
use qbound::metrics::{husimi_classical_metric, measurement_fisher, new_metric, rld_metric, sld_metric};
use qbound::phasespace::{husimi, inverse_weyl, sw_kernel, weyl_map};
use qbound::quadrature::{sphere_integrate, QuadSpec};
use qbound::qubit::{Complex2x2, ParamIndex, QubitState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIGMA: f64 = 3.0;
const MC_SEED: u64 = 42;
const MC_SAMPLES: usize = 100_000;

// 30-digit values for σ = 3 at r = 0.5, θ = π/2, φ = 3π/4, ε = 0
mod oracle {
    pub const B: f64 = 1.401_480_357_103_66;
    pub const H3R: f64 = 0.014_061_175_248_376_6;
    pub const I2: f64 = 0.716_534_588_854_365;
    pub const G_PHI_PHI: f64 = 0.278_913_217_094_215;
    pub const C: f64 = 2.078_734_270_927_53;
    pub const B_MAX: f64 = 7.452_978_717_123_11;
    pub const VARIANCE: f64 = 2.835_488_085_756_356;
    pub const BOUNDARY: f64 = 0.684_945_768_249_294;
    pub const ERF_ARG: f64 = 0.704_991_525_516_231;
}

// Published figures with their tolerances.
mod pinned {
    pub const B: (f64, f64) = (1.40172, 1e-4);
    pub const H3R: (f64, f64) = (0.0140612, 1e-6);
    pub const I2: (f64, f64) = (0.71668, 1e-4);
    pub const G_PHI_PHI: (f64, f64) = (0.278913, 1e-5);
    pub const C: (f64, f64) = (2.0794, 1e-3);
    pub const B_MAX: (f64, f64) = (7.456, 0.01);
    pub const B_SLD: (f64, f64) = (4.0, 1e-9);
    pub const B_RLD: (f64, f64) = (3.0, 1e-9);
    pub const VARIANCE: (f64, f64) = (2.8347, 1e-3);
    pub const BOUNDARY: (f64, f64) = (0.68504, 1e-4);
}

struct Outcome {
    passed: bool,
    detail: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            detail: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.detail
            .push(format!("    [{}] {line}", if ok { "ok" } else { "FAIL" }));
    }

    fn within(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let d = (got - want).abs();
        self.check(
            d <= tol,
            format!("{what}: {got:.12} vs {want:.12} |d|={d:.3e} tol={tol:.0e}"),
        );
    }

    fn max_within(&mut self, what: &str, worst: f64, tol: f64) {
        self.check(worst <= tol, format!("{what}: max {worst:.3e} tol={tol:.0e}"));
    }

    fn runtime(&mut self, took: Duration, limit: Duration) {
        self.check(
            took < limit,
            format!("runtime {:.2}s limit {}s", took.as_secs_f64(), limit.as_secs()),
        );
    }
}

fn grid() -> Vec<QubitState<f64>> {
    let mut out = Vec::new();
    for r in [0.1, 0.5, 0.9] {
        for theta in [FRAC_PI_6, FRAC_PI_2] {
            for phi in [0.3, 3.0 * FRAC_PI_4] {
                out.push(QubitState::new(r, theta, phi).unwrap());
            }
        }
    }
    out
}

fn closed_grid() -> Vec<QubitState<f64>> {
    let mut out = Vec::new();
    for i in 1..=9 {
        for theta in [FRAC_PI_6, FRAC_PI_2] {
            for phi in [0.3, 3.0 * FRAC_PI_4] {
                out.push(QubitState::new(i as f64 / 10.0, theta, phi).unwrap());
            }
        }
    }
    out
}

fn max_mat_diff(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    (0..9)
        .map(|k| (a[k / 3][k % 3] - b[k / 3][k % 3]).abs())
        .fold(0.0, f64::max)
}

fn fig_ctx(r: f64) -> EstimationContext<f64> {
    EstimationContext::new(QubitState::new(r, FRAC_PI_2, 3.0 * FRAC_PI_4).unwrap(), 0.0).unwrap()
}

fn phase_space() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let sphere = QuadSpec::sphere_default();
    let (mut roundtrip, mut mass, mut kernel) = (0.0f64, 0.0f64, 0.0f64);
    for s in grid() {
        let rho = s.density_matrix();
        let back = inverse_weyl(weyl_map(rho, -1.0), -1.0, &sphere).unwrap();
        roundtrip = roundtrip.max((back - rho).max_abs());
        mass = mass.max((sphere_integrate(husimi(s), &sphere).unwrap() - 1.0).abs());
    }
    for s in [-1.0, 0.0, 1.0] {
        let avg = sphere_integrate(|t, p| sw_kernel(t, p, s), &sphere).unwrap();
        kernel = kernel.max((avg - Complex2x2::identity()).max_abs());
    }
    o.max_within("Weyl roundtrip s=-1", roundtrip, 1e-10);
    o.max_within("Husimi normalisation", mass, 1e-10);
    o.max_within("kernel average = I", kernel, 1e-10);
    o.runtime(t0.elapsed(), Duration::from_secs(5));
    o
}

fn closed_forms() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let quad = Method::Quadrature(QuadSpec::sphere_default());
    let (mut l_err, mut h_err, mut g_err, mut hus_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let ks = [ParamIndex::R, ParamIndex::Theta, ParamIndex::Phi];
    for s in closed_grid() {
        for k in ks {
            let lc = new_log_derivative(&s, k, &Method::Closed).unwrap();
            let lq = new_log_derivative(&s, k, &quad).unwrap();
            l_err = l_err.max((lc - lq).max_abs());
            let hc = deviation_h(&s, k, &Method::Closed).unwrap();
            // definitional h = ∂ρ − ½{ρ, L}
            let rho = s.density_matrix();
            let hd = s.d_rho(k) - (rho * lc + lc * rho).scale(0.5);
            h_err = h_err.max((hc - hd).max_abs());
        }
        // trace formula g_ij = Re tr(ρ L_i ∘ L_j)
        let ls = ks.map(|k| new_log_derivative(&s, k, &Method::Closed).unwrap());
        let rho = s.density_matrix();
        let mut trace = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                trace[i][j] = (rho * ls[i].jordan(&ls[j])).trace().re;
            }
        }
        g_err = g_err.max(max_mat_diff(&new_metric(&s, &Method::Closed).unwrap(), &trace));
        hus_err = hus_err.max(max_mat_diff(
            &husimi_classical_metric(&s, &Method::Closed).unwrap(),
            &husimi_classical_metric(&s, &quad).unwrap(),
        ));
    }
    o.max_within("log-derivative closed vs quadrature", l_err, 1e-8);
    o.max_within("deviation closed vs definition", h_err, 1e-8);
    o.max_within("metric closed vs trace formula", g_err, 1e-8);
    o.max_within("Husimi Fisher closed vs quadrature", hus_err, 1e-8);
    o.runtime(t0.elapsed(), Duration::from_secs(60));
    o
}

fn hierarchy() -> Outcome {
    let mut o = Outcome::new();
    let spec = QuadSpec::default();
    let (mut slack, mut sld_err, mut rld_err) = (f64::INFINITY, 0.0f64, 0.0f64);
    for s in grid() {
        let ctx = EstimationContext::new(s, 0.0).unwrap();
        let p = gaussian_sharp_family(SIGMA, &ctx).unwrap();
        let fisher = measurement_fisher(&s, &p, &spec).unwrap();
        let sld = sld_metric(&s).unwrap()[2][2];
        let rld = rld_metric(&s).unwrap()[2][2];
        slack = slack.min(sld - fisher).min(rld - sld);
        let exact = (s.r * s.theta.sin()).powi(2);
        sld_err = sld_err.max((sld - exact).abs());
        rld_err = rld_err.max((rld - exact / (1.0 - s.r * s.r)).abs());
    }
    o.check(
        slack >= -1e-9,
        format!("min slack of Fisher <= SLD <= RLD: {slack:.3e} floor=-1e-9"),
    );
    o.max_within("SLD = r^2 sin^2", sld_err, 1e-9);
    o.max_within("RLD = r^2 sin^2/(1-r^2)", rld_err, 1e-9);
    o
}

fn written_b(r: f64, theta: f64) -> f64 {
    let x = (PI * PI / 18.0).exp();
    let e = libm::erf(PI / (3.0 * 2f64.sqrt()));
    1.0 - (-(2.0 * PI).sqrt() + 3.0 * x * e - 9.0 * (x - 1.0) * (2.0 / PI).sqrt() * r * theta.sin()) / (3.0 * e * x)
}

fn reference_point() -> Outcome {
    let mut o = Outcome::new();
    let spec = QuadSpec::default();
    let ctx = fig_ctx(0.5);
    let state = ctx.state;
    let p = gaussian_sharp_family(SIGMA, &ctx).unwrap();
    let cm = bound_cmax(&ctx, &p, &spec).unwrap();
    let c = bound_c(&ctx, &p, &spec).unwrap();
    let g = new_metric(&state, &Method::Closed).unwrap()[2][2];
    let var = estimator_moments(&ctx, &p, &spec).unwrap().variance;
    let b_sld = 1.0 / sld_metric(&state).unwrap()[2][2];
    let b_rld = 1.0 / rld_metric(&state).unwrap()[2][2];

    o.within(
        "erf(pi/(3 sqrt 2))",
        libm::erf(PI / (3.0 * 2f64.sqrt())),
        oracle::ERF_ARG,
        1e-15,
    );
    let rows: [(&str, f64, f64, (f64, f64)); 10] = [
        ("b", cm.b, oracle::B, pinned::B),
        ("h3r", h3r(0.5), oracle::H3R, pinned::H3R),
        ("I2", cm.i2, oracle::I2, pinned::I2),
        ("g_new phi-phi", g, oracle::G_PHI_PHI, pinned::G_PHI_PHI),
        ("C", c, oracle::C, pinned::C),
        ("C_max", cm.c_max, oracle::C, pinned::C),
        ("B_max", cm.c_max / g, oracle::B_MAX, pinned::B_MAX),
        ("B_SLD", b_sld, 4.0, pinned::B_SLD),
        ("B_RLD", b_rld, 3.0, pinned::B_RLD),
        ("variance", var, oracle::VARIANCE, pinned::VARIANCE),
    ];
    for (name, got, want, (fig, tol)) in rows {
        o.within(name, got, want, tol);
        let off = (want - fig).abs();
        if off > tol {
            o.detail.push(format!(
                "    [note] {name}: published {fig} differs from the oracle by {off:.3e} (> {tol:.0e})"
            ));
        }
    }
    o.within(
        "b quadrature vs written closed form",
        cm.b,
        written_b(0.5, FRAC_PI_2),
        1e-7,
    );
    o
}

fn figure_rows() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let rows = bounds_sweep(&SweepConfig::default());
    o.check(
        rows.len() == 9 && rows.iter().all(|r| r.error.is_none()),
        "9 rows without errors".into(),
    );
    for row in &rows {
        let rivals = [("Fisher", row.b_fisher), ("SLD", row.b_sld), ("RLD", row.b_rld)];
        let (name, top) = rivals
            .iter()
            .copied()
            .fold(("", f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        o.check(
            row.b_max > top,
            format!(
                "r={:.1}: B_max={:.6} > max(B_Fisher,B_SLD,B_RLD)={:.6} ({name}); B_Husimi={:.6}",
                row.r, row.b_max, top, row.b_husimi
            ),
        );
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.b_max / r.b_sld).collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    o.check(
        increasing,
        format!(
            "B_max/B_SLD strictly increasing: {}",
            ratios.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
        ),
    );
    o.runtime(t0.elapsed(), Duration::from_secs(120));
    o
}

fn theorem_audit() -> Outcome {
    let mut o = Outcome::new();
    let spec = QuadSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let base = GaussianProfile::new(SIGMA).unwrap();
    let perturbed: Vec<PerturbedProfile<f64>> = (0..3)
        .map(|_| PerturbedProfile::random(base, 3, &mut rng).unwrap())
        .collect();
    let (mut slack, mut imag, mut invalid) = (f64::INFINITY, 0.0f64, 0usize);
    for s in grid() {
        let ctx = EstimationContext::new(s, 0.0).unwrap();
        let mut families: Vec<Box<dyn PovmFamily<f64>>> = vec![Box::new(gaussian_sharp_family(SIGMA, &ctx).unwrap())];
        for prof in &perturbed {
            families.push(Box::new(SharpFamily::new(prof.clone(), &ctx)));
        }
        for p in &families {
            if !validate_povm(p.as_ref(), &ctx, &spec).unwrap().passed {
                invalid += 1;
                continue;
            }
            let a = audit_derivation(&ctx, p.as_ref(), &spec).unwrap();
            slack = slack.min(a.schwarz_slack);
            let t = theorem_general(
                &BoundProblem {
                    ctx,
                    povm: p.as_ref(),
                    y: [0.0, 0.0, 1.0],
                    z: [0.3, -0.7, 1.0],
                },
                &spec,
            )
            .unwrap();
            imag = imag.max(a.imag_residual).max(t.bracket_im.abs());
        }
    }
    o.check(invalid == 0, format!("all 48 families validate ({invalid} rejected)"));
    o.check(slack >= -1e-10, format!("min Schwarz slack {slack:.3e} floor=-1e-10"));
    o.max_within("imaginary part of the bracket", imag, 1e-10);

    let ctx = fig_ctx(0.5);
    let p = gaussian_sharp_family(SIGMA, &ctx).unwrap();
    let a = audit_derivation(&ctx, &p, &spec).unwrap();
    o.within(
        "identity residual vs boundary term",
        a.identity_residual,
        oracle::BOUNDARY,
        pinned::BOUNDARY.1,
    );
    o.within(
        "identity residual vs published figure",
        a.identity_residual,
        pinned::BOUNDARY.0,
        pinned::BOUNDARY.1,
    );
    o
}

fn monte_carlo() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let spec = QuadSpec::default();
    let ctx = fig_ctx(0.5);
    let p = gaussian_sharp_family(SIGMA, &ctx).unwrap();
    let q = outcome_distribution(&ctx, &p, &spec).unwrap();
    let xs = sample_outcomes_seeded(&q, MC_SAMPLES, MC_SEED).unwrap();
    let s = SampleSummary::from_samples(&xs).unwrap();
    let m = estimator_moments(&ctx, &p, &spec).unwrap();
    let phi = ctx.state.phi;
    let zm = (s.mean - phi) / s.mean_se;
    let zv = (s.variance - m.central_variance) / s.variance_se;
    o.check(
        zm.abs() <= 3.0,
        format!("mean {:.6} vs phi {:.6}: z={zm:.3}", s.mean, phi),
    );
    o.check(
        zv.abs() <= 3.0,
        format!(
            "variance {:.6} vs quadrature {:.6}: z={zv:.3}",
            s.variance, m.central_variance
        ),
    );
    o.runtime(t0.elapsed(), Duration::from_secs(30));
    o
}

fn povm_validation() -> Outcome {
    let mut o = Outcome::new();
    let spec = QuadSpec::default();
    let (mut comp, mut lam, mut unb) = (0.0f64, 0.0f64, 0.0f64);
    for s in grid() {
        let ctx = EstimationContext::new(s, 0.0).unwrap();
        let p = gaussian_sharp_family(SIGMA, &ctx).unwrap();
        let v = validate_povm(&p, &ctx, &spec).unwrap();
        comp = comp.max(v.completeness_residual);
        lam = lam.max(v.max_abs_lambda1);
        unb = unb.max(v.unbiasedness_residual);
    }
    o.max_within("completeness", comp, 1e-9);
    o.max_within("lambda1", lam, 1e-12);
    o.max_within("unbiasedness", unb, 1e-8);
    o
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("phase-space correctness", phase_space),
        ("closed-form fidelity", closed_forms),
        ("metric hierarchy", hierarchy),
        ("reference point values", reference_point),
        ("bound comparison over r", figure_rows),
        ("derivation audit", theorem_audit),
        ("Monte Carlo moments", monte_carlo),
        ("POVM validation", povm_validation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        println!(
            "{} criterion {}: {name}",
            if out.passed { "PASS" } else { "FAIL" },
            i + 1
        );
        for line in &out.detail {
            println!("{line}");
        }
        if !out.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
