//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Tests take a shared lock so that the runtime limits are measured without
//! competing for the CPU.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use aggregation::dynamics::{
    integrate, radial_velocity, write_events_csv, write_trajectory_csv, FlowState, SimConfig, Trajectory,
};
use aggregation::kernels::{
    asymptotic_constant, phi, phi_closed_form_d3, phi_derivative, psi, sine_power_integral, DerivativeOrder,
    KernelParams, QuadratureConfig,
};
use aggregation::lab::{
    collapse_scaling, critical_ratio_curve, nbody_oracle_velocity, search_two_ring_similarity,
    two_ring_inequality_witness, RatioCurve, ScalingConfig, TwoRingSearch,
};
use aggregation::measure::{discretize, make_initial_data, GridSpec, InitialDataSpec, RadialMeasure, Ring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    start: Instant,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: u32, name: &'static str, limit_secs: u64) -> Self {
        Self {
            id,
            name,
            limit: Duration::from_secs(limit_secs),
            start: Instant::now(),
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        let limit = self.limit;
        self.check(elapsed < limit, format!("runtime {elapsed:.2?} exceeds {limit:?}"));
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {:>2} [{status}] {} ({elapsed:.2?})", self.id, self.name);
        if !self.notes.is_empty() {
            line.push_str(&format!(" | {}", self.notes.join("; ")));
        }
        if !self.failures.is_empty() {
            line.push_str(&format!(" | failed: {}", self.failures.join("; ")));
        }
        // bypass the harness's output capture so every line shows up
        let mut out = std::io::stdout().lock();
        writeln!(out, "{line}").unwrap();
        out.flush().unwrap();
        assert!(self.failures.is_empty(), "{line}");
    }
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

const DIMENSIONS: [usize; 4] = [2, 3, 4, 5];
const EXPONENTS: [f64; 4] = [0.25, 0.5, 1.0, 1.5];

#[test]
fn criterion_01_kernel_golden_values() {
    let _g = lock();
    let mut c = Criterion::new(1, "kernel golden values", 5);
    let q = QuadratureConfig::default();
    for d in DIMENSIONS {
        for alpha in EXPONENTS {
            let p = KernelParams::new(d, alpha).unwrap();
            let v = psi(0.0, &p, &q).unwrap();
            c.check((v - 1.0).abs() <= 1e-10, format!("psi(0) = {v} for d={d} α={alpha}"));
        }
    }
    for (r, want) in [(1.0, 2.0 / 3.0), (0.5, 1.0 / 3.0), (2.0, 11.0 / 12.0), (3.0, 26.0 / 27.0)] {
        let got = phi(r, 3, &q).unwrap();
        c.check((got - want).abs() <= 1e-8, format!("phi({r}) = {got}, want {want}"));
    }
    c.finish();
}

#[test]
fn criterion_02_asymptote() {
    let _g = lock();
    let mut c = Criterion::new(2, "far-field asymptote", 10);
    let q = QuadratureConfig::default();
    let sampled = [(2, 0.25), (2, 1.5), (3, 0.5), (3, 1.0), (4, 0.25), (4, 1.5), (5, 1.0), (6, 0.75)];
    let mut worst: f64 = 0.0;
    for (d, alpha) in sampled {
        let p = KernelParams::new(d, alpha).unwrap();
        let limit = asymptotic_constant(&p);
        let rel = |rho: f64| (psi(rho, &p, &q).unwrap() * rho.powf(2.0 - alpha) / limit - 1.0).abs();
        let (near, far) = (rel(1e2), rel(1e6));
        worst = worst.max(far);
        c.check(far <= 1e-2, format!("d={d} α={alpha}: {far:e} off at 1e6 (1% bound)"));
        c.check(far <= 1e-4, format!("d={d} α={alpha}: {far:e} off at 1e6 (0.01% bound)"));
        // d=3, α=1 is exact beyond ρ=1, so both errors may already sit at roundoff
        c.check(far < near || near < 1e-12, format!("d={d} α={alpha}: error does not shrink from 1e2 ({near:e}) to 1e6 ({far:e})"));
    }
    c.note(format!("worst relative error at 1e6: {worst:.1e}"));
    c.finish();
}

#[test]
fn criterion_03_closed_forms_and_identities() {
    let _g = lock();
    let mut c = Criterion::new(3, "closed-form and identity suite", 60);
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let r = 10.0 * i as f64 / 99.0;
        worst = worst.max((phi(r, 3, &q).unwrap() - phi_closed_form_d3(r)).abs());
    }
    c.check(worst <= 1e-8, format!("phi vs closed form off by {worst:e}"));
    c.note(format!("closed form {worst:.1e}"));

    let mut dual: f64 = 0.0;
    for d in DIMENSIONS {
        let p = KernelParams::new(d, 1.0).unwrap();
        for i in 0..50 {
            let r = 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0);
            dual = dual.max((phi(r, d, &q).unwrap() - psi(1.0 / r, &p, &q).unwrap()).abs());
        }
    }
    c.check(dual <= 1e-8, format!("phi(r) vs psi(1/r) off by {dual:e}"));
    c.note(format!("phi/psi {dual:.1e}"));

    let tight = QuadratureConfig::tight();
    let mut ident: f64 = 0.0;
    for d in 2..=8 {
        let lhs = sine_power_integral(d, &tight).unwrap();
        let rhs = (d as f64 - 1.0) / d as f64 * sine_power_integral(d - 2, &tight).unwrap();
        ident = ident.max((lhs - rhs).abs());
    }
    c.check(ident <= 1e-12, format!("sine-power identity off by {ident:e}"));
    c.note(format!("identity {ident:.1e}"));
    c.finish();
}

fn psi_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..49).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 48.0)))
        .collect()
}

#[test]
fn criterion_04_monotonicity_and_concavity() {
    let _g = lock();
    let mut c = Criterion::new(4, "monotonicity and concavity", 30);
    let q = QuadratureConfig::default();
    let grid = psi_grid();
    for d in DIMENSIONS {
        for alpha in EXPONENTS {
            let p = KernelParams::new(d, alpha).unwrap();
            let v: Vec<f64> = grid.iter().map(|&r| psi(r, &p, &q).unwrap()).collect();
            let ok = v.windows(2).all(|w| w[1] < w[0]);
            c.check(ok, format!("psi not strictly decreasing for d={d} α={alpha}"));
        }
    }
    let radii: Vec<f64> = grid.iter().copied().filter(|&r| r > 0.0 && r != 1.0).collect();
    let second = |d: usize, r: f64| phi_derivative(r, d, DerivativeOrder::Second, &q).unwrap();
    for d in [4, 5] {
        let worst = radii.iter().map(|&r| second(d, r)).fold(f64::NEG_INFINITY, f64::max);
        c.check(worst < 0.0, format!("phi'' reaches {worst:e} in d={d}"));
    }
    let flat = radii.iter().filter(|&&r| r < 1.0).map(|&r| second(3, r).abs()).fold(0.0, f64::max);
    c.check(flat <= 1e-8, format!("d=3 |phi''| on (0,1) reaches {flat:e}"));
    let outer = radii.iter().filter(|&&r| r > 1.0).map(|&r| second(3, r)).fold(f64::NEG_INFINITY, f64::max);
    c.check(outer < 0.0, format!("d=3 phi'' on (1,∞) reaches {outer:e}"));
    let signs: Vec<bool> = radii.iter().map(|&r| second(2, r) > 0.0).collect();
    let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let flip_at = signs.windows(2).position(|w| w[0] != w[1]).map(|i| (radii[i], radii[i + 1]));
    let across_one = flip_at.is_some_and(|(a, b)| a < 1.0 && b > 1.0);
    c.check(flips == 1 && signs[0] && across_one, format!("d=2 phi'' changes sign {flips} times ({flip_at:?})"));
    c.finish();
}

fn random_configuration(rng: &mut ChaCha8Rng) -> (RadialMeasure, f64) {
    let n_rings = rng.random_range(1..=3);
    let origin = rng.random_range(0.0..0.3);
    let mut radii: Vec<f64> = Vec::new();
    while radii.len() < n_rings {
        let r = rng.random_range(0.2..2.0);
        if radii.iter().all(|&s: &f64| (s - r).abs() > 0.05) {
            radii.push(r);
        }
    }
    radii.sort_by(f64::total_cmp);
    let weights: Vec<f64> = (0..n_rings).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let rings = radii
        .iter()
        .zip(&weights)
        .map(|(&radius, &w)| Ring { mass: (1.0 - origin) * w / total, radius })
        .collect();
    // keep the evaluation point off the rings, where the sampled force is heavy-tailed
    let r = loop {
        let r = rng.random_range(0.3..2.5);
        if radii.iter().all(|&s| (s - r).abs() > 0.15 * s) {
            break r;
        }
    };
    (RadialMeasure::new(origin, rings).unwrap(), r)
}

#[test]
fn criterion_05_oracle_equivalence() {
    let _g = lock();
    let mut c = Criterion::new(5, "Monte Carlo oracle equivalence", 120);
    let q = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..20u64 {
        let d = [2, 3, 4][case as usize % 3];
        let alpha = [0.5, 1.0, 1.5][(case as usize / 3) % 3];
        let p = KernelParams::new(d, alpha).unwrap();
        let (m, r) = random_configuration(&mut rng);
        let exact = radial_velocity(&m, r, &p, &q).unwrap();
        let mc = nbody_oracle_velocity(&m, r, &p, 1_000_000, 100 + case).unwrap();
        let z = (mc.estimate - exact).abs() / mc.std_error;
        worst = worst.max(z);
        c.check(z <= 3.0, format!("case {case} (d={d}, α={alpha}): {z:.2} standard errors"));
    }
    c.note(format!("largest deviation {worst:.2} standard errors"));
    c.finish();
}

#[test]
fn criterion_06_single_ring_collapse() {
    let _g = lock();
    let mut c = Criterion::new(6, "single ring collapse", 5);
    let p = KernelParams::new(3, 1.0).unwrap();
    let init = FlowState::initial(RadialMeasure::single_ring(1.0, 1.0).unwrap());
    let traj = integrate(&init, &p, &SimConfig::default(), 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for s in traj.snapshots.iter().filter(|s| s.time <= 1.4) {
        let r = s.measure.rings()[0].radius;
        worst = worst.max((r - (1.0 - 2.0 * s.time / 3.0)).abs());
    }
    c.check(worst <= 1e-6, format!("radius off the line by {worst:e}"));
    match traj.absorb_time(1.0) {
        Some(t) => {
            c.check((t - 1.5).abs() <= 1e-4, format!("absorbed at {t}"));
            c.note(format!("absorb time {t:.12}"));
        }
        None => c.check(false, "never absorbed"),
    }
    c.finish();
}

fn power_law_run() -> (InitialDataSpec, Trajectory) {
    let spec = InitialDataSpec::power_law(3, 1.0, 0.5).unwrap();
    let profile = make_initial_data(&spec).unwrap();
    let grid = ScalingConfig::default().grid;
    let m = discretize(&profile, &grid).unwrap();
    let traj = integrate(&FlowState::initial(m), &spec.params().unwrap(), &SimConfig::default(), 0.2).unwrap();
    (spec, traj)
}

#[test]
fn criterion_07_instantaneous_concentration() {
    let _g = lock();
    let mut c = Criterion::new(7, "instantaneous concentration and collapse scaling", 300);
    let (spec, traj) = power_law_run();
    assert_eq!(traj.snapshots[0].measure.rings().len(), 2000);
    let at = traj.snapshot_at(0.1).unwrap();
    c.check(at.measure.origin_mass() > 0.0, "no mass at the origin by t = 0.1");
    c.note(format!("origin mass {:.4} at t = {}", at.measure.origin_mass(), at.time));
    let drift = traj
        .snapshots
        .iter()
        .map(|s| (s.measure.total_mass() - 1.0).abs())
        .fold(0.0, f64::max);
    c.check(drift <= 1e-12, format!("mass drifts by {drift:e}"));

    let r0 = [1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5)];
    let rep = collapse_scaling(&spec, &r0, &ScalingConfig::default()).unwrap();
    let eps = 0.5;
    c.check(
        (rep.slope - eps).abs() <= 0.15 * eps,
        format!("slope {} outside ε ± 15%", rep.slope),
    );
    c.check(rep.times.iter().all(|t| t.absorb_time.is_some()), "censored collapse times");
    c.note(format!("slope {:.4} ± {:.4}", rep.slope, rep.slope_std_error));
    c.finish();
}

struct RatioProbe {
    label: String,
    coarse: (RatioCurve, RatioCurve),
    fine: (RatioCurve, RatioCurve),
}

fn ratio_probe(spec: &InitialDataSpec, label: &str, n: usize) -> RatioProbe {
    let p = spec.params().unwrap();
    let profile = make_initial_data(spec).unwrap();
    let curves = |n_rings: usize| {
        let m = discretize(&profile, &GridSpec::geometric(n_rings, 1e-9, 0.5).unwrap()).unwrap();
        let traj = integrate(&FlowState::initial(m), &p, &SimConfig::default(), 0.05).unwrap();
        (
            critical_ratio_curve(&traj, 0.0, &p, Some(spec)).unwrap(),
            critical_ratio_curve(&traj, 0.05, &p, Some(spec)).unwrap(),
        )
    };
    RatioProbe {
        label: label.to_string(),
        coarse: curves(n),
        fine: curves(2 * n),
    }
}

#[test]
fn criterion_08_critical_ratio_growth() {
    let _g = lock();
    let mut c = Criterion::new(8, "critical ratio growth", 600);
    let probes = [
        ratio_probe(&InitialDataSpec::log_critical_general(3, 1.0, 0.8).unwrap(), "d=3 k=0.8", 1000),
        ratio_probe(&InitialDataSpec::log_critical_alpha1(2, 0.75).unwrap(), "d=2 k=0.75", 1000),
    ];
    for probe in &probes {
        let curve = &probe.fine.1;
        let innermost = curve.points.last().unwrap().r;
        let decade: Vec<f64> = curve
            .points
            .iter()
            .filter(|pt| pt.r <= 10.0 * innermost)
            .map(|pt| pt.ratio)
            .collect();
        let rising = decade.windows(2).filter(|w| w[1] > w[0]).count();
        c.check(
            rising + 1 == decade.len(),
            format!(
                "{}: ratio rises on {rising} of {} steps of the innermost decade",
                probe.label,
                decade.len() - 1
            ),
        );
        let growth = probe.fine.1.max_ratio().unwrap() / probe.coarse.1.max_ratio().unwrap() - 1.0;
        c.check(growth >= 0.25, format!("{}: max grows {:.2}% on refinement", probe.label, 100.0 * growth));
        let initial = probe.fine.0.max_ratio().unwrap() / probe.coarse.0.max_ratio().unwrap() - 1.0;
        c.check(initial.abs() <= 0.05, format!("{}: t=0 max changes {:.2}%", probe.label, 100.0 * initial));
        c.note(format!(
            "{}: t=0 max {:.4}->{:.4}, t=0.05 max {:.4}->{:.4}",
            probe.label,
            probe.coarse.0.max_ratio().unwrap(),
            probe.fine.0.max_ratio().unwrap(),
            probe.coarse.1.max_ratio().unwrap(),
            probe.fine.1.max_ratio().unwrap()
        ));
    }
    c.finish();
}

#[test]
fn criterion_09_two_ring_witness() {
    let _g = lock();
    let mut c = Criterion::new(9, "two-ring inequality witness", 60);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut smallest = f64::INFINITY;
    for d in [3, 4] {
        for _ in 0..100 {
            let rho1 = rng.random_range(0.05..2.0);
            let rho2 = rho1 * rng.random_range(1.01..10.0);
            let m1 = rng.random_range(0.01..0.99);
            let m2 = rng.random_range(0.005..(1.0 - m1));
            let w = two_ring_inequality_witness(d, rho1, rho2, m1, m2).unwrap();
            smallest = smallest.min(w);
            c.check(w > 0.0, format!("d={d} ρ=({rho1}, {rho2}) m=({m1}, {m2}): margin {w:e}"));
        }
    }
    let w = two_ring_inequality_witness(3, 1.0, 2.0, 0.5, 0.5).unwrap();
    c.check((w - 5.0 / 48.0).abs() <= 1e-6, format!("reference margin {w}"));
    c.note(format!("smallest random margin {smallest:.3e}"));
    c.finish();
}

#[test]
fn criterion_10_two_ring_similarity_search() {
    let _g = lock();
    let mut c = Criterion::new(10, "two-ring similarity search", 60);
    let q = QuadratureConfig::default();
    match search_two_ring_similarity(2, 1.0, 2.0, &q).unwrap() {
        TwoRingSearch::Feasible { m1, m2, residual, .. } => {
            c.check(m1 > 0.0 && m2 > 0.0, format!("masses {m1}, {m2}"));
            c.check(residual <= 1e-6, format!("residual {residual:e}"));
            c.note(format!("d=2 masses ({m1:.6}, {m2:.6}), residual {residual:.1e}"));
        }
        other => c.check(false, format!("d=2 search gave {other:?}")),
    }
    for i in 0..20 {
        let ratio = 10f64.powf(0.02 + i as f64 * 0.05);
        let found = search_two_ring_similarity(3, 1.0, ratio, &q).unwrap();
        c.check(
            matches!(found, TwoRingSearch::Infeasible { .. }),
            format!("d=3 ratio {ratio}: {found:?}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_11_reproducibility() {
    let _g = lock();
    let mut c = Criterion::new(11, "bit-identical reruns", 300);
    let render = || {
        let (_, traj) = power_law_run();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trajectory_csv(&traj, &mut a).unwrap();
        write_events_csv(&traj, &mut b).unwrap();
        (a, b)
    };
    let first = render();
    let second = render();
    c.check(first.0 == second.0, "trajectory CSVs differ");
    c.check(first.1 == second.1, "event CSVs differ");
    c.note(format!("{} + {} bytes", first.0.len(), first.1.len()));
    c.finish();
}
