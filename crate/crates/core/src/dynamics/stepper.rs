//! Dormand–Prince 5(4) with dense output, absorption events and merges.
//!
//! The unknowns are `s = r^{2-α}` rather than the radii: `ds/dt = -(2-α) α S`
//! with `S` the bounded ψ-weighted mass, so a ring runs into the origin at a
//! finite rate instead of through the `r^{α-1}` singularity.

use thiserror::Error;

use super::{Event, EventKind, FlowState, SimConfig, Trajectory, VelocityEvaluator};
use crate::error::{Error, Result};
use crate::kernels::KernelParams;
use crate::measure::{RadialMeasure, Ring};

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const A7: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integration stopped early; `partial` holds everything recorded so far.
#[derive(Debug, Clone, Error)]
#[error("{source}")]
pub struct IntegrationError {
    pub source: Error,
    pub partial: Box<Trajectory>,
}

impl From<IntegrationError> for Error {
    fn from(e: IntegrationError) -> Self {
        e.source
    }
}

/// Integrate the ring system from `initial.time` to `t_end`.
pub fn integrate(
    initial: &FlowState,
    params: &KernelParams,
    cfg: &SimConfig,
    t_end: f64,
) -> std::result::Result<Trajectory, IntegrationError> {
    integrate_until(initial, params, cfg, t_end, |_, _| false)
}

/// Like [`integrate`], but `stop(t, events)` is consulted after every
/// accepted step and ends the run (with a final snapshot) when it returns
/// true.
pub fn integrate_until<F>(
    initial: &FlowState,
    params: &KernelParams,
    cfg: &SimConfig,
    t_end: f64,
    stop: F,
) -> std::result::Result<Trajectory, IntegrationError>
where
    F: FnMut(f64, &[Event]) -> bool,
{
    let fail = |source: Error| IntegrationError {
        source,
        partial: Box::new(Trajectory {
            snapshots: vec![initial.clone()],
            events: vec![],
        }),
    };
    cfg.validate().map_err(fail)?;
    if !(t_end.is_finite()) {
        return Err(fail(Error::domain("t_end", "must be finite")));
    }
    let evaluator = VelocityEvaluator::new(params).map_err(fail)?;
    let mut run = Run::new(initial, evaluator, *cfg);
    match run.drive(t_end, stop) {
        Ok(()) => Ok(run.traj),
        Err(source) => Err(IntegrationError {
            source,
            partial: Box::new(run.traj),
        }),
    }
}

struct Rhs {
    evaluator: VelocityEvaluator,
    gamma: f64,
    floor: f64,
    order: Vec<usize>,
    radii: Vec<f64>,
    masses: Vec<f64>,
    out: Vec<f64>,
}

impl Rhs {
    fn radius(&self, s: f64) -> f64 {
        to_radius(s.max(self.floor), self.gamma)
    }

    fn eval(&mut self, origin: f64, y: &[f64], masses: &[f64], dy: &mut [f64]) {
        let n = y.len();
        let rate = -self.gamma * self.evaluator.alpha();
        if y.windows(2).all(|w| w[0] <= w[1]) {
            self.radii.clear();
            for &s in y {
                let r = self.radius(s);
                self.radii.push(r);
            }
            self.evaluator.speeds(origin, &self.radii, masses, dy);
            dy.iter_mut().for_each(|v| *v *= rate);
            return;
        }
        // A trial stage overtook a neighbour; evaluate in sorted order.
        self.order.clear();
        self.order.extend(0..n);
        self.order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
        self.radii.clear();
        self.masses.clear();
        for k in 0..n {
            let i = self.order[k];
            let r = self.radius(y[i]);
            self.radii.push(r);
            self.masses.push(masses[i]);
        }
        self.out.resize(n, 0.0);
        self.evaluator.speeds(origin, &self.radii, &self.masses, &mut self.out);
        for (k, &i) in self.order.iter().enumerate() {
            dy[i] = rate * self.out[k];
        }
    }
}

struct Run {
    cfg: SimConfig,
    rhs: Rhs,
    t: f64,
    origin: f64,
    y: Vec<f64>,
    mass: Vec<f64>,
    label: Vec<f64>,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    y_new: Vec<f64>,
    traj: Trajectory,
}

impl Run {
    fn new(initial: &FlowState, evaluator: VelocityEvaluator, cfg: SimConfig) -> Self {
        let rings = initial.measure.rings();
        let n = rings.len();
        let gamma = 2.0 - evaluator.alpha();
        Self {
            cfg,
            rhs: Rhs {
                evaluator,
                gamma,
                floor: to_coordinate(cfg.absorb_radius, gamma),
                order: Vec::new(),
                radii: Vec::with_capacity(n),
                masses: Vec::new(),
                out: Vec::new(),
            },
            t: initial.time,
            origin: initial.measure.origin_mass(),
            y: rings.iter().map(|r| to_coordinate(r.radius, gamma)).collect(),
            mass: rings.iter().map(|r| r.mass).collect(),
            label: initial.initial_radii.clone(),
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
            y_new: vec![0.0; n],
            traj: Trajectory {
                snapshots: vec![initial.clone()],
                events: Vec::new(),
            },
        }
    }

    fn snapshot(&mut self) -> Result<()> {
        if self.traj.snapshots.last().is_some_and(|s| s.time >= self.t) {
            return Ok(());
        }
        let rings = self
            .y
            .iter()
            .zip(&self.mass)
            .map(|(&s, &mass)| Ring {
                mass,
                radius: to_radius(s, self.rhs.gamma),
            })
            .collect();
        let measure = RadialMeasure::new(self.origin, rings)?;
        self.traj.snapshots.push(FlowState {
            time: self.t,
            measure,
            initial_radii: self.label.clone(),
        });
        Ok(())
    }

    fn scale(&self, i: usize) -> f64 {
        self.cfg.abs_tol + self.cfg.rel_tol * self.y[i].abs().max(self.y_new[i].abs())
    }

    fn derivative(&mut self, slot: usize) {
        let (origin, n) = (self.origin, self.y.len());
        let mut dy = std::mem::take(&mut self.k[slot]);
        dy.resize(n, 0.0);
        self.rhs.eval(origin, &self.y, &self.mass, &mut dy);
        self.k[slot] = dy;
    }

    fn initial_step(&self, room: f64) -> f64 {
        let n = self.y.len() as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for (&y, &f) in self.y.iter().zip(&self.k[0]) {
            let sc = self.cfg.abs_tol + self.cfg.rel_tol * y.abs();
            d0 += (y / sc).powi(2);
            d1 += (f / sc).powi(2);
        }
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(room).min(self.cfg.max_step)
    }

    /// One trial step of size `h`; returns the scaled error norm.
    fn attempt(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        let rows: [&[f64]; 6] = [&A2, &A3, &A4, &A5, &A6, &A7];
        for (s, row) in rows.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in row.iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                self.stage[i] = self.y[i] + h * acc;
            }
            let origin = self.origin;
            let mut dy = std::mem::take(&mut self.k[s + 1]);
            self.rhs.eval(origin, &self.stage, &self.mass, &mut dy);
            self.k[s + 1] = dy;
            if s == 5 {
                self.y_new.copy_from_slice(&self.stage);
            }
        }
        let mut sum = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * self.k[j][i];
            }
            let r = h * e / self.scale(i);
            sum += r * r;
        }
        (sum / n as f64).sqrt()
    }

    /// Dense output for component `i` at fraction `theta` of the step.
    fn dense(&self, i: usize, h: f64, theta: f64) -> f64 {
        let y0 = self.y[i];
        let diff = self.y_new[i] - y0;
        let bspl = h * self.k[0][i] - diff;
        let r4 = diff - h * self.k[6][i] - bspl;
        let mut r5 = 0.0;
        for j in 0..7 {
            r5 += D[j] * self.k[j][i];
        }
        r5 *= h;
        let eta = 1.0 - theta;
        y0 + theta * (diff + eta * (bspl + theta * (r4 + eta * r5)))
    }

    fn crossing_time(&self, i: usize, h: f64) -> f64 {
        let target = self.rhs.floor;
        let (mut lo, mut hi) = (0.0, 1.0);
        let resolution = (self.cfg.abs_tol / self.k[0][i].abs().max(1e-300) / h).max(1e-15);
        while hi - lo > resolution {
            let mid = 0.5 * (lo + hi);
            if self.dense(i, h, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.t + hi * h
    }

    /// Absorb rings that ended the step inside the absorb radius, then merge
    /// any pair that is no longer ordered. Returns whether the state changed.
    fn resolve(&mut self, h: f64) -> bool {
        let t_new = self.t + h;
        let mut absorbed: Vec<(f64, usize)> = (0..self.y.len())
            .filter(|&i| self.y_new[i] <= self.rhs.floor)
            .map(|i| (self.crossing_time(i, h).min(t_new), i))
            .collect();
        let mut changed = !absorbed.is_empty();
        absorbed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(time, i) in &absorbed {
            self.origin += self.mass[i];
            self.traj.events.push(Event {
                time,
                kind: EventKind::Absorb,
                label: self.label[i],
                into: None,
            });
        }
        if changed {
            let mut keep = vec![true; self.y.len()];
            for &(_, i) in &absorbed {
                keep[i] = false;
            }
            retain(&mut self.y_new, &keep);
            retain(&mut self.mass, &keep);
            retain(&mut self.label, &keep);
        }

        let gamma = self.rhs.gamma;
        let mut i = 0;
        while i + 1 < self.y_new.len() {
            let (r1, r2) = (to_radius(self.y_new[i], gamma), to_radius(self.y_new[i + 1], gamma));
            if r2 - r1 <= self.cfg.merge_gap {
                let (m1, m2) = (self.mass[i], self.mass[i + 1]);
                let m = m1 + m2;
                self.y_new[i] = to_coordinate((m1 * r1 + m2 * r2) / m, gamma);
                self.mass[i] = m;
                self.traj.events.push(Event {
                    time: t_new,
                    kind: EventKind::Merge,
                    label: self.label[i + 1],
                    into: Some(self.label[i]),
                });
                self.y_new.remove(i + 1);
                self.mass.remove(i + 1);
                self.label.remove(i + 1);
                changed = true;
                // the merged ring may now touch its inner neighbour
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
        changed
    }

    fn drive<F: FnMut(f64, &[Event]) -> bool>(&mut self, t_end: f64, mut stop: F) -> Result<()> {
        let t0 = self.t;
        if t_end <= t0 {
            return Ok(());
        }
        let every = self.cfg.record_every;
        let mut record_index = 1u64;
        let next_record = |j: u64| t0 + j as f64 * every;
        let tiny = 1e-12 * every.min(t_end - t0);

        if !self.y.is_empty() {
            self.derivative(0);
        }
        let mut h = self.initial_step(t_end - t0);

        while self.t < t_end {
            let mut target = next_record(record_index).min(t_end);
            if t_end - target < tiny {
                target = t_end;
            }
            if self.y.is_empty() {
                // nothing moves any more
                self.t = target;
                self.snapshot()?;
                record_index += 1;
                continue;
            }
            let room = target - self.t;
            let mut step = h.min(self.cfg.max_step);
            let lands = step >= room - tiny;
            if lands {
                step = room;
            }
            let err = self.attempt(step);
            if !err.is_finite() || err > 1.0 {
                let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
                h = step * factor;
                if h < 1e-14 * self.t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { time: self.t, step: h });
                }
                continue;
            }

            let changed = self.resolve(step);
            self.t = if lands { target } else { self.t + step };
            std::mem::swap(&mut self.y, &mut self.y_new);
            self.y_new.resize(self.y.len(), 0.0);
            self.stage.resize(self.y.len(), 0.0);
            if changed {
                for k in self.k.iter_mut() {
                    k.resize(self.y.len(), 0.0);
                }
                if !self.y.is_empty() {
                    self.derivative(0);
                }
            } else {
                self.k.swap(0, 6);
            }

            if lands {
                self.snapshot()?;
                if target >= t_end {
                    break;
                }
                record_index += 1;
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // a clipped step says nothing about the size the controller wanted
            h = if lands { h.max(step * grow) } else { step * grow };
            if stop(self.t, &self.traj.events) {
                self.snapshot()?;
                break;
            }
        }
        Ok(())
    }
}

fn to_radius(s: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        s
    } else {
        s.powf(1.0 / gamma)
    }
}

fn to_coordinate(r: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        r
    } else {
        r.powf(gamma)
    }
}

fn retain(v: &mut Vec<f64>, keep: &[bool]) {
    let mut it = keep.iter();
    v.retain(|_| *it.next().unwrap());
}
