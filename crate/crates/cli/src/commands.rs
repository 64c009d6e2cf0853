//! Resolved run plans and their execution.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aggregation::dynamics::{format_number, integrate, write_events_csv, write_trajectory_csv, FlowState, SimConfig, Trajectory};
use aggregation::kernels::{psi, KernelParams, QuadratureConfig};
use aggregation::lab::{
    collapse_scaling, critical_ratio_curve, default_bound_grid, default_kernel_grid, fit_lower_bound_with,
    nbody_oracle_velocity, search_two_ring_similarity, two_ring_inequality_witness, verify_kernel_properties,
    write_ratio_csv, BoundFitConfig, RatioCurve, ScalingConfig, TwoRingSearch,
};
use aggregation::measure::{
    discretize, make_initial_data, GridSpec, InitialDataSpec, InitialKind, RadialMeasure, Spacing, SUPPORT_RADIUS,
};
use anyhow::{bail, ensure, Context};
use serde::Serialize;

use crate::settings::Settings;

#[derive(Debug, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Plan {
    Kernel {
        d: usize,
        alpha: f64,
        rho: Vec<f64>,
        samples: Option<usize>,
        seed: u64,
    },
    Simulate {
        data: InitialDataSpec,
        grid: GridSpec,
        sim: SimConfig,
        t_end: f64,
    },
    Verify {
        d: usize,
        alpha: f64,
        kernel_grid_points: usize,
        bound: Option<BoundPlan>,
    },
    Similarity {
        d: usize,
        rho1: f64,
        rho2: f64,
        m1: f64,
        m2: f64,
    },
    Scaling {
        data: InitialDataSpec,
        r0: Vec<f64>,
        scaling: ScalingConfig,
    },
    Ratio {
        data: InitialDataSpec,
        grid: GridSpec,
        sim: SimConfig,
        time: f64,
    },
}

#[derive(Debug, Serialize)]
pub struct BoundPlan {
    data: InitialDataSpec,
    n_rings: usize,
    grid: Vec<f64>,
}

/// Files written so far, relative to the output directory.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), written: Vec::new() }
    }

    fn create(&mut self, name: &str) -> anyhow::Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        self.written.push(name.to_owned());
        Ok(BufWriter::new(file))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn data_spec(s: &Settings, d: usize, alpha: f64) -> anyhow::Result<InitialDataSpec> {
    let kind = s.data.context("data is required: power_law, log_critical_alpha1 or log_critical_general")?;
    let spec = InitialDataSpec { kind, d, alpha, k: s.k, epsilon: s.epsilon };
    spec.validate()?;
    Ok(spec)
}

fn grid(s: &Settings, default_rings: usize, default_r_min: f64) -> anyhow::Result<GridSpec> {
    let grid = GridSpec {
        n_rings: s.rings.unwrap_or(default_rings),
        r_min: s.r_min.unwrap_or(default_r_min),
        r_max: SUPPORT_RADIUS,
        spacing: s.spacing.unwrap_or(Spacing::Geometric),
    };
    grid.validate()?;
    Ok(grid)
}

fn sim(s: &Settings) -> anyhow::Result<SimConfig> {
    let base = SimConfig::default();
    let cfg = SimConfig {
        rel_tol: s.rel_tol.unwrap_or(base.rel_tol),
        abs_tol: s.abs_tol.unwrap_or(base.abs_tol),
        absorb_radius: s.absorb_radius.unwrap_or(base.absorb_radius),
        merge_gap: s.merge_gap.unwrap_or(base.merge_gap),
        max_step: s.max_step.unwrap_or(base.max_step),
        record_every: s.record_every.unwrap_or(base.record_every),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn nonnegative_time(name: &str, t: f64) -> anyhow::Result<f64> {
    ensure!(t >= 0.0 && t.is_finite(), "{name} must be finite and nonnegative, got {t}");
    Ok(t)
}

impl Plan {
    /// Check every parameter range; nothing is computed here.
    pub fn resolve(command: &str, s: &Settings) -> anyhow::Result<Self> {
        let d = s.d.unwrap_or(3);
        let alpha = s.alpha.unwrap_or(1.0);
        let plan = match command {
            "kernel" => {
                let params = KernelParams::new(d, alpha)?;
                let rho = s.rho.clone().unwrap_or_else(|| vec![1.0]);
                ensure!(!rho.is_empty(), "rho must list at least one ratio");
                if let Some(bad) = rho.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
                    bail!("rho must be finite and nonnegative, got {bad}");
                }
                if let Some(n) = s.samples {
                    ensure!(n >= 1000, "samples must be at least 1000, got {n}");
                    params.require_attractive()?;
                }
                Plan::Kernel { d, alpha, rho, samples: s.samples, seed: s.seed.unwrap_or(0) }
            }
            "simulate" => Plan::Simulate {
                data: data_spec(s, d, alpha)?,
                grid: grid(s, 2000, 1e-6)?,
                sim: sim(s)?,
                t_end: nonnegative_time("t_end", s.t_end.unwrap_or(0.2))?,
            },
            "verify" => {
                KernelParams::new(d, alpha)?.require_sub_quadratic()?;
                let bound = match s.data {
                    Some(_) => Some(BoundPlan {
                        data: data_spec(s, d, alpha)?,
                        n_rings: s.rings.unwrap_or(BoundFitConfig::default().n_rings),
                        grid: default_bound_grid(),
                    }),
                    None => None,
                };
                Plan::Verify { d, alpha, kernel_grid_points: default_kernel_grid().len(), bound }
            }
            "similarity" => {
                let d = s.d.unwrap_or(2);
                KernelParams::new(d, 1.0)?;
                let (rho1, rho2) = (s.rho1.unwrap_or(1.0), s.rho2.unwrap_or(2.0));
                ensure!(rho1 > 0.0 && rho1 < rho2 && rho2.is_finite(), "rho1, rho2 must satisfy 0 < rho1 < rho2, got {rho1}, {rho2}");
                let (m1, m2) = (s.m1.unwrap_or(0.5), s.m2.unwrap_or(0.5));
                ensure!(m1 > 0.0 && m2 > 0.0 && m1 + m2 <= 1.0, "m1, m2 must be positive with m1 + m2 ≤ 1, got {m1}, {m2}");
                Plan::Similarity { d, rho1, rho2, m1, m2 }
            }
            "scaling" => {
                let data = data_spec(s, d, alpha)?;
                ensure!(data.kind == InitialKind::PowerLaw, "data must be power_law for scaling");
                let base = ScalingConfig::default();
                let r0 = s.r0.clone().unwrap_or_else(|| [-1.0, -1.5, -2.0, -2.5].iter().map(|e| 10f64.powf(*e)).collect());
                if let Some(bad) = r0.iter().find(|r| !(**r > 0.0 && **r < 0.25)) {
                    bail!("r0 values must lie in (0, 1/4), got {bad}");
                }
                let cap_factor = s.cap_factor.unwrap_or(base.cap_factor);
                ensure!(cap_factor > 0.0 && cap_factor.is_finite(), "cap_factor must be positive, got {cap_factor}");
                Plan::Scaling {
                    data,
                    r0,
                    scaling: ScalingConfig { grid: grid(s, base.grid.n_rings, base.grid.r_min)?, sim: sim(s)?, cap_factor },
                }
            }
            "ratio" => {
                let data = data_spec(s, d, alpha)?;
                ensure!(
                    data.kind != InitialKind::PowerLaw,
                    "data must be log_critical_alpha1 or log_critical_general for ratio, got power_law"
                );
                Plan::Ratio {
                    data,
                    grid: grid(s, 2000, 1e-9)?,
                    sim: sim(s)?,
                    time: nonnegative_time("time", s.time.unwrap_or(0.05))?,
                }
            }
            other => bail!("unknown command {other}"),
        };
        Ok(plan)
    }

    pub fn run(&self, out: &mut Artifacts) -> anyhow::Result<()> {
        match self {
            Plan::Kernel { d, alpha, rho, samples, seed } => kernel(*d, *alpha, rho, *samples, *seed, out),
            Plan::Simulate { data, grid, sim, t_end } => {
                let traj = flow(data, grid, sim, *t_end, out)?;
                let last = traj.final_state().expect("trajectory has a snapshot");
                println!(
                    "t = {}: {} rings left, origin mass {}, {} events",
                    last.time,
                    last.measure.rings().len(),
                    last.measure.origin_mass(),
                    traj.events.len()
                );
                Ok(())
            }
            Plan::Verify { d, alpha, bound, .. } => verify(*d, *alpha, bound.as_ref(), out),
            Plan::Similarity { d, rho1, rho2, m1, m2 } => similarity(*d, *rho1, *rho2, *m1, *m2, out),
            Plan::Scaling { data, r0, scaling } => {
                let report = collapse_scaling(data, r0, scaling)?;
                out.json("scaling.json", &report)?;
                println!("slope {} ± {}", report.slope, report.slope_std_error);
                Ok(())
            }
            Plan::Ratio { data, grid, sim, time } => ratio(data, grid, sim, *time, out),
        }
    }
}

fn kernel(d: usize, alpha: f64, rho: &[f64], samples: Option<usize>, seed: u64, out: &mut Artifacts) -> anyhow::Result<()> {
    let params = KernelParams::new(d, alpha)?;
    let q = QuadratureConfig::default();
    let mut w = out.create("kernel.csv")?;
    match samples {
        Some(_) => writeln!(w, "rho,psi,oracle,oracle_std_error")?,
        None => writeln!(w, "rho,psi")?,
    }
    for (i, &r) in rho.iter().enumerate() {
        let value = psi(r, &params, &q)?;
        println!("{value}");
        write!(w, "{},{}", format_number(r), format_number(value))?;
        if let Some(n) = samples {
            // a unit ring at radius ρ moves the point r = 1 with speed α ψ(ρ)
            let m = if r == 0.0 { RadialMeasure::origin_atom(1.0)? } else { RadialMeasure::single_ring(1.0, r)? };
            let est = nbody_oracle_velocity(&m, 1.0, &params, n, seed.wrapping_add(i as u64))?;
            write!(w, ",{},{}", format_number(-est.estimate / alpha), format_number(est.std_error / alpha))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Discretize, integrate and write both CSVs, keeping whatever was recorded
/// if the integration stops early.
fn flow(data: &InitialDataSpec, grid: &GridSpec, sim: &SimConfig, t_end: f64, out: &mut Artifacts) -> anyhow::Result<Trajectory> {
    let profile = make_initial_data(data)?;
    let measure = discretize(&profile, grid)?;
    let (traj, failure) = match integrate(&FlowState::initial(measure), &data.params()?, sim, t_end) {
        Ok(t) => (t, None),
        Err(e) => (*e.partial, Some(e.source)),
    };
    let mut w = out.create("trajectory.csv")?;
    write_trajectory_csv(&traj, &mut w)?;
    w.flush()?;
    let mut w = out.create("events.csv")?;
    write_events_csv(&traj, &mut w)?;
    w.flush()?;
    match failure {
        None => Ok(traj),
        Some(e) => {
            let reached = traj.final_state().map_or(0.0, |s| s.time);
            Err(anyhow::Error::new(e).context(format!("integration stopped after t = {reached}")))
        }
    }
}

fn verify(d: usize, alpha: f64, bound: Option<&BoundPlan>, out: &mut Artifacts) -> anyhow::Result<()> {
    let params = KernelParams::new(d, alpha)?;
    let report = verify_kernel_properties(&params, &default_kernel_grid())?;
    out.json("kernel_report.json", &report)?;
    for c in &report.checks {
        println!("{:<20} {} margin {:e}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.margin);
    }
    if let Some(b) = bound {
        let cfg = BoundFitConfig { n_rings: b.n_rings, ..BoundFitConfig::default() };
        let fit = fit_lower_bound_with(&b.data, &b.grid, &cfg)?;
        out.json("bounds.json", &fit)?;
        println!("delta1 {:e} at r = {:e}", fit.empirical_delta1, fit.min_ratio_location);
    }
    Ok(())
}

#[derive(Serialize)]
struct SimilarityOutput<'a> {
    d: usize,
    rho1: f64,
    rho2: f64,
    search: &'a TwoRingSearch,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<f64>,
}

fn similarity(d: usize, rho1: f64, rho2: f64, m1: f64, m2: f64, out: &mut Artifacts) -> anyhow::Result<()> {
    let search = search_two_ring_similarity(d, rho1, rho2, &QuadratureConfig::default())?;
    match &search {
        TwoRingSearch::Feasible { m1, m2, residual, .. } => println!("feasible: m1 = {m1}, m2 = {m2}, residual {residual:e}"),
        TwoRingSearch::Infeasible { m1, m2 } => println!("infeasible: solved masses {m1}, {m2}"),
    }
    let witness = if d >= 3 { Some(two_ring_inequality_witness(d, rho1, rho2, m1, m2)?) } else { None };
    if let Some(w) = witness {
        println!("witness margin {w}");
    }
    out.json("similarity.json", &SimilarityOutput { d, rho1, rho2, search: &search, witness })
}

fn ratio(data: &InitialDataSpec, grid: &GridSpec, sim: &SimConfig, time: f64, out: &mut Artifacts) -> anyhow::Result<()> {
    let traj = flow(data, grid, sim, time, out)?;
    let params = data.params()?;
    let write = |curve: &RatioCurve, name: &str, out: &mut Artifacts| -> anyhow::Result<()> {
        let mut w = out.create(name)?;
        write_ratio_csv(curve, &mut w)?;
        w.flush()?;
        Ok(())
    };
    let initial = critical_ratio_curve(&traj, 0.0, &params, Some(data))?;
    write(&initial, "ratio_initial.csv", out)?;
    let curve = critical_ratio_curve(&traj, time, &params, Some(data))?;
    write(&curve, "ratio.csv", out)?;
    println!(
        "max ratio {} at t = 0, {} at t = {time}",
        initial.max_ratio().unwrap_or(f64::NAN),
        curve.max_ratio().unwrap_or(f64::NAN)
    );
    Ok(())
}
