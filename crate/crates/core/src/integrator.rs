//! Exponential time stepping of `U' = A U + (0, N(U))` and the Picard
//! construction of the mild solution.

use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};
use crate::field::{inverse_transform, SpectralField, SpectralState};
use crate::linear::Propagator;
use crate::lp::{DyadicPartition, Index};
use crate::nonlinear::{Nonlinearity, DEFAULT_VACUUM_MARGIN};
use crate::params::FluidParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Etd1,
    Etd2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub t_end: f64,
    /// Steps between logged samples.
    #[serde(default = "default_cadence")]
    pub snapshot_cadence: usize,
    #[serde(default = "default_margin")]
    pub vacuum_margin: f64,
    /// Drop the nonlinearity entirely.
    #[serde(default)]
    pub linear_only: bool,
}

fn default_scheme() -> Scheme {
    Scheme::Etd2
}
fn default_cadence() -> usize {
    10
}
fn default_margin() -> f64 {
    DEFAULT_VACUUM_MARGIN
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            scheme: Scheme::Etd2,
            t_end,
            snapshot_cadence: default_cadence(),
            vacuum_margin: DEFAULT_VACUUM_MARGIN,
            linear_only: false,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(format!("integrator.dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) {
            out.push(format!("integrator.t_end must be >= dt, got {}", self.t_end));
        }
        if self.snapshot_cadence == 0 {
            out.push("integrator.snapshot_cadence must be >= 1".into());
        }
        if !(self.vacuum_margin > 0.0 && self.vacuum_margin < 1.0) {
            out.push(format!("integrator.vacuum_margin must lie in (0, 1), got {}", self.vacuum_margin));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(NskError::Integrator(v.join("; ")))
        }
    }

    /// Number of uniform steps; `t_end` is rounded to a multiple of `dt`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

fn add_forcing(u: &SpectralState, alpha: f64, n: &[SpectralField]) -> Result<SpectralState> {
    let mut out = u.clone();
    for (m, f) in out.m.iter_mut().zip(n) {
        m.axpy(alpha, f)?;
    }
    Ok(out)
}

/// One-step map for a fixed `dt`.
#[derive(Clone, Debug)]
pub struct Stepper {
    prop: Propagator,
    nl: Option<Nonlinearity>,
    scheme: Scheme,
    dt: f64,
}

impl Stepper {
    pub fn new(grid: &crate::field::Grid, params: &FluidParams, cfg: &IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let prop = Propagator::new(grid, params, cfg.dt)?;
        let nl = if cfg.linear_only { None } else { Some(Nonlinearity::new(params, cfg.vacuum_margin)?) };
        Ok(Self { prop, nl, scheme: cfg.scheme, dt: cfg.dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn propagator(&self) -> &Propagator {
        &self.prop
    }

    fn nonlinear(&self, u: &SpectralState) -> Result<Option<Vec<SpectralField>>> {
        match &self.nl {
            None => Ok(None),
            Some(nl) => Ok(Some(nl.eval(u)?.0)),
        }
    }

    pub fn step(&self, u: &SpectralState) -> Result<SpectralState> {
        let dt = self.dt;
        let out = match self.nonlinear(u)? {
            None => self.prop.apply(u)?,
            Some(n0) => match self.scheme {
                Scheme::Etd1 => self.prop.apply(&add_forcing(u, dt, &n0)?)?,
                Scheme::Etd2 => {
                    let pred = self.prop.apply(&add_forcing(u, dt, &n0)?)?;
                    let n1 = self.nonlinear(&pred)?.expect("nonlinear stepper");
                    let mut base = self.prop.apply(&add_forcing(u, 0.5 * dt, &n0)?)?;
                    for (m, f) in base.m.iter_mut().zip(&n1) {
                        m.axpy(0.5 * dt, f)?;
                    }
                    base
                }
            },
        };
        if !out.is_finite() {
            return Err(NskError::BlowUp { time: u.time + dt });
        }
        Ok(out)
    }
}

/// Single exponential step of size `dt`.
pub fn duhamel_step(
    state: &SpectralState,
    dt: f64,
    params: &FluidParams,
    scheme: Scheme,
) -> Result<SpectralState> {
    let mut cfg = IntegratorConfig::new(dt, dt);
    cfg.scheme = scheme;
    Stepper::new(state.grid(), params, &cfg)?.step(state)
}

/// Running value of `X_p(t)`: the Chemin-Lerner `L~^inf_t B^{-1+d/p}_{p,1}`
/// norm of `(<grad> a, m)` plus its `L^1_t B^{1+d/p}_{p,1}` norm (trapezoid).
#[derive(Clone, Debug)]
pub struct XTracker {
    partition: DyadicPartition,
    p: Index,
    shell_max: Vec<f64>,
    integral: f64,
    last: Option<(f64, f64)>,
}

impl XTracker {
    pub fn new(partition: DyadicPartition, p: f64) -> Result<Self> {
        let p = Index(p);
        p.validate("p")?;
        let shells = partition.shell_count();
        Ok(Self { partition, p, shell_max: vec![0.0; shells], integral: 0.0, last: None })
    }

    /// Per-shell norms of `(<xi> a^, m^)`.
    pub fn shell_norms(&self, u: &SpectralState) -> Vec<f64> {
        let g = *u.grid();
        let a = u.a.coeffs();
        let m: Vec<&[num_complex::Complex64]> = u.m.iter().map(|c| c.coeffs()).collect();
        self.partition.shell_norms_with(self.p.conjugate(), |i| {
            let w = (1.0 + g.xi_norm2(i)) * a[i].norm_sqr() + m.iter().map(|c| c[i].norm_sqr()).sum::<f64>();
            w.sqrt()
        })
    }

    pub fn update(&mut self, u: &SpectralState) -> f64 {
        let shells = self.shell_norms(u);
        let d = u.grid().dim() as f64;
        let s = -1.0 + d * self.p.recip();
        for (mx, v) in self.shell_max.iter_mut().zip(&shells) {
            *mx = mx.max(*v);
        }
        let diss = self.partition.combine(shells, s + 2.0, Index(1.0));
        if let Some((t0, v0)) = self.last {
            self.integral += 0.5 * (u.time - t0) * (v0 + diss);
        }
        self.last = Some((u.time, diss));
        self.value_with(s)
    }

    fn value_with(&self, s: f64) -> f64 {
        self.partition.combine(self.shell_max.clone(), s, Index(1.0)) + self.integral
    }

    pub fn value(&self) -> f64 {
        let d = self.partition.grid().dim() as f64;
        self.value_with(-1.0 + d * self.p.recip())
    }

    pub fn sup_part(&self) -> f64 {
        let d = self.partition.grid().dim() as f64;
        self.partition.combine(self.shell_max.clone(), -1.0 + d * self.p.recip(), Index(1.0))
    }

    pub fn integral_part(&self) -> f64 {
        self.integral
    }
}

/// `X_{p,0} = ||a0||_{B^{-1+d/p}_{p,1} cap B^{d/p}_{p,1}} + ||m0||_{B^{-1+d/p}_{p,1}}`.
pub fn initial_norm(partition: &DyadicPartition, u0: &SpectralState, p: f64) -> Result<f64> {
    let d = u0.grid().dim() as f64;
    let s = -1.0 + d / p;
    let spec = |s| crate::lp::BesovSpec::fourier(s, p, 1.0);
    let m: Vec<&SpectralField> = u0.m.iter().collect();
    Ok(partition.fourier_besov_norm(&u0.a, &spec(s))?
        + partition.fourier_besov_norm(&u0.a, &spec(s + 1.0))?
        + partition.fourier_besov_norm_vector(&m, &spec(s))?)
}

/// Frozen default of the smallness gate on `X_{2,0}`.
///
/// Smallest value returned by [`calibrate_smallness`] (contraction ratio 0.5,
/// horizon 2, 40 steps) over d = 2 Gaussian data of width 1 and 2 on
/// `n = 64, L = 32` and `n = 128, L = 64`, for `(mu, kappa, gamma) = (1, 1, 1)`
/// and `(0.5, 0.1, 2)`: 0.0245, rounded down.
pub const DEFAULT_SMALLNESS_THRESHOLD: f64 = 0.02;

/// What an observer sees at every logged step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    pub time: f64,
    /// `min(rho / rho*)` over the grid.
    pub min_density: f64,
    /// Running `X_p(t)`.
    pub x_value: f64,
}

pub trait Observer {
    fn observe(&mut self, state: &SpectralState, info: &StepInfo) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&SpectralState, &StepInfo) -> Result<()>,
{
    fn observe(&mut self, state: &SpectralState, info: &StepInfo) -> Result<()> {
        self(state, info)
    }
}

/// Result of [`run_simulation`]; numerical failures end the run early but
/// keep the last valid state.
#[derive(Debug)]
pub struct RunOutcome {
    pub last: SpectralState,
    pub steps_done: usize,
    pub steps_planned: usize,
    pub x_max_ratio: f64,
    pub x_initial: f64,
    pub failure: Option<NskError>,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.failure.is_none() && self.steps_done == self.steps_planned
    }
}

/// `min(1 + a / rho*)` of a state.
pub fn min_density(u: &SpectralState, rho_star: f64) -> f64 {
    inverse_transform(&u.a).into_iter().fold(f64::INFINITY, |m, x| m.min(1.0 + x / rho_star))
}

/// Advances `u0` from `u0.time` to `t_end`, calling every observer at the
/// start, every `snapshot_cadence` steps and at the final step.
pub fn run_simulation(
    u0: &SpectralState,
    params: &FluidParams,
    cfg: &IntegratorConfig,
    p: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutcome> {
    params.validate()?;
    let stepper = Stepper::new(u0.grid(), params, cfg)?;
    let partition = DyadicPartition::new(u0.grid())?;
    let mut tracker = XTracker::new(partition, p)?;
    let steps = ((cfg.t_end - u0.time) / cfg.dt).round().max(0.0) as usize;
    let mut u = u0.clone();
    let x0 = tracker.update(&u);
    let mut x_max_ratio: f64 = if x0 > 0.0 { 1.0 } else { 0.0 };

    let notify = |u: &SpectralState, step: usize, x: f64, obs: &mut [&mut dyn Observer]| -> Result<()> {
        let min = min_density(u, params.rho_star);
        let info = StepInfo { step, time: u.time, min_density: min, x_value: x };
        for o in obs.iter_mut() {
            o.observe(u, &info)?;
        }
        Ok(())
    };
    notify(&u, 0, x0, observers)?;
    for step in 1..=steps {
        let next = match stepper.step(&u) {
            Ok(v) => v,
            Err(e @ (NskError::Vacuum { .. } | NskError::BlowUp { .. })) => {
                return Ok(RunOutcome {
                    last: u,
                    steps_done: step - 1,
                    steps_planned: steps,
                    x_max_ratio,
                    x_initial: x0,
                    failure: Some(e),
                });
            }
            Err(e) => return Err(e),
        };
        u = next;
        // keep the clock exact rather than accumulating round-off
        u.time = u0.time + step as f64 * cfg.dt;
        let x = tracker.update(&u);
        if x0 > 0.0 {
            x_max_ratio = x_max_ratio.max(x / x0);
        }
        if step % cfg.snapshot_cadence == 0 || step == steps {
            notify(&u, step, x, observers)?;
        }
    }
    Ok(RunOutcome { last: u, steps_done: steps, steps_planned: steps, x_max_ratio, x_initial: x0, failure: None })
}

/// Exact linear flow `G(t) U0` at the given elapsed times, fed to the observers
/// in order. `X_p` is tracked over the sampled times only.
pub fn run_linear(
    u0: &SpectralState,
    params: &FluidParams,
    times: &[f64],
    p: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<SpectralState> {
    params.validate()?;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NskError::Series("sample times must be strictly increasing".into()));
    }
    let mut tracker = XTracker::new(DyadicPartition::new(u0.grid())?, p)?;
    let mut last = u0.clone();
    for (step, &t) in times.iter().enumerate() {
        let mut u = Propagator::new(u0.grid(), params, t)?.apply(u0)?;
        u.time = u0.time + t;
        let x = tracker.update(&u);
        let info = StepInfo { step, time: u.time, min_density: min_density(&u, params.rho_star), x_value: x };
        for o in observers.iter_mut() {
            o.observe(&u, &info)?;
        }
        last = u;
    }
    Ok(last)
}

/// Outcome of [`picard_iterate`].
#[derive(Clone, Debug)]
pub struct PicardReport {
    /// Relative distance `||U^{k+1} - U^k|| / X_{p,0}` per iteration.
    pub differences: Vec<f64>,
    /// Ratios of successive differences.
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub contraction: bool,
    pub iterations: usize,
    /// Final iterate at every grid time.
    pub trajectory: Vec<SpectralState>,
}

impl PicardReport {
    pub fn final_state(&self) -> &SpectralState {
        self.trajectory.last().expect("nonempty trajectory")
    }
}

/// Picard iteration of the Duhamel map on a uniform grid of `steps` intervals
/// on `[0, horizon]`, starting from `U^{(0)} = 0`:
///
/// `U_{i+1} = G(h) U_i + h/2 [G(h) (0, N(U^old_i)) + (0, N(U^old_{i+1}))]`.
///
/// Distances are `L~^inf_t B^{-1+d/p}_{p,1}` of `(<grad> a, m)` on the grid,
/// relative to `X_{p,0}`.
#[allow(clippy::too_many_arguments)]
pub fn picard_iterate(
    u0: &SpectralState,
    params: &FluidParams,
    horizon: f64,
    steps: usize,
    tol: f64,
    max_iter: usize,
    smallness: f64,
    p: f64,
) -> Result<PicardReport> {
    if steps == 0 || !(horizon > 0.0) {
        return Err(NskError::Integrator("Picard grid needs steps >= 1 and horizon > 0".into()));
    }
    let partition = DyadicPartition::new(u0.grid())?;
    let x0 = initial_norm(&partition, u0, p)?;
    if x0 > smallness {
        return Err(NskError::Smallness { value: x0, threshold: smallness });
    }
    let h = horizon / steps as f64;
    let prop = Propagator::new(u0.grid(), params, h)?;
    let nl = Nonlinearity::new(params, DEFAULT_VACUUM_MARGIN)?;
    let tracker = XTracker::new(partition, p)?;
    let times: Vec<f64> = (0..=steps).map(|i| u0.time + i as f64 * h).collect();

    let mut zero = SpectralState::zeros(*u0.grid());
    zero.time = u0.time;
    let mut current: Vec<SpectralState> = times
        .iter()
        .map(|&t| {
            let mut z = zero.clone();
            z.time = t;
            z
        })
        .collect();
    let mut report = PicardReport {
        differences: Vec::new(),
        ratios: Vec::new(),
        converged: false,
        contraction: false,
        iterations: 0,
        trajectory: Vec::new(),
    };
    if x0 == 0.0 {
        report.converged = true;
        report.contraction = true;
        current[0] = u0.clone();
        report.trajectory = current;
        return Ok(report);
    }
    let d = u0.grid().dim() as f64;
    let s = -1.0 + d / p;
    for _ in 0..max_iter {
        let forcing = current.iter().map(|u| Ok(nl.eval(u)?.0)).collect::<Result<Vec<_>>>()?;
        let mut next = Vec::with_capacity(current.len());
        next.push(u0.clone());
        for i in 0..steps {
            let mut lhs = add_forcing(&next[i], 0.5 * h, &forcing[i])?;
            prop.apply_in_place(&mut lhs)?;
            for (m, f) in lhs.m.iter_mut().zip(&forcing[i + 1]) {
                m.axpy(0.5 * h, f)?;
            }
            lhs.time = times[i + 1];
            if !lhs.is_finite() {
                return Err(NskError::BlowUp { time: times[i + 1] });
            }
            next.push(lhs);
        }
        let mut shell_max = vec![0.0; tracker.partition.shell_count()];
        for (a, b) in next.iter().zip(&current) {
            let diff = a.sub(b)?;
            for (mx, v) in shell_max.iter_mut().zip(tracker.shell_norms(&diff)) {
                *mx = f64::max(*mx, v);
            }
        }
        let dist = tracker.partition.combine(shell_max, s, Index(1.0)) / x0;
        if let Some(prev) = report.differences.last() {
            report.ratios.push(dist / prev);
        }
        report.differences.push(dist);
        report.iterations += 1;
        current = next;
        if dist < tol {
            report.converged = true;
            break;
        }
    }
    report.contraction = !report.ratios.is_empty() && report.ratios.iter().all(|&r| r < 1.0);
    report.trajectory = current;
    Ok(report)
}

/// Largest amplitude multiplier of `reference` (up to `hi`) whose Picard
/// iteration on `[0, horizon]` still contracts with ratios below `target`,
/// found by bisection; returns the corresponding `X_{p,0}`.
pub fn calibrate_smallness(
    reference: &SpectralState,
    params: &FluidParams,
    horizon: f64,
    steps: usize,
    target: f64,
    hi: f64,
    bisections: usize,
) -> Result<f64> {
    let partition = DyadicPartition::new(reference.grid())?;
    let contracts = |scale: f64| -> bool {
        let mut u = reference.clone();
        u.scale(scale);
        match picard_iterate(&u, params, horizon, steps, 1e-10, 4, f64::INFINITY, 2.0) {
            Ok(r) => r.ratios.iter().all(|&x| x < target),
            Err(_) => false,
        }
    };
    let (mut lo, mut up) = (0.0, hi);
    if contracts(up) {
        lo = up;
    } else {
        for _ in 0..bisections {
            let mid = 0.5 * (lo + up);
            if contracts(mid) {
                lo = mid;
            } else {
                up = mid;
            }
        }
    }
    let mut u = reference.clone();
    u.scale(lo);
    initial_norm(&partition, &u, 2.0)
}
