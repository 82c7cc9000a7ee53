//! TOML experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::decay::{exponent_range_violations, FitMode, NormRequest, MIN_FIT_SAMPLES};
use crate::error::{NskError, Result};
use crate::field::Grid;
use crate::initial::InitialData;
use crate::integrator::{IntegratorConfig, DEFAULT_SMALLNESS_THRESHOLD};
use crate::lp::Index;
use crate::params::FluidParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Simulate,
    LinearProbe,
    KernelProbe,
    DecayFit,
    Verify,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::LinearProbe => "linear-probe",
            Kind::KernelProbe => "kernel-probe",
            Kind::DecayFit => "decay-fit",
            Kind::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub box_len: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.d, self.n, self.box_len)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Geometric,
}

/// Sample times for the exact-propagator and kernel probes: either an explicit
/// list or `count` points from `start` to `end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub start: f64,
    #[serde(default)]
    pub end: f64,
    #[serde(default)]
    pub count: usize,
    #[serde(default = "geometric")]
    pub spacing: Spacing,
}

fn geometric() -> Spacing {
    Spacing::Geometric
}

impl Sampling {
    pub fn resolve(&self) -> Vec<f64> {
        if let Some(t) = &self.times {
            return t.clone();
        }
        let n = self.count;
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + f * (self.end - self.start),
                    Spacing::Geometric => self.start * (self.end / self.start).powf(f),
                }
            })
            .collect()
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.times.is_none() {
            if self.count < 2 {
                out.push("sampling.count must be >= 2 (or give sampling.times)".into());
            }
            if !(self.end > self.start) {
                out.push("sampling.end must exceed sampling.start".into());
            }
            if self.spacing == Spacing::Geometric && !(self.start > 0.0) {
                out.push("sampling.start must be positive for geometric spacing".into());
            }
        }
        let t = self.resolve();
        if t.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            out.push("sampling times must be finite and nonnegative".into());
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            out.push("sampling times must be strictly increasing".into());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Defaults to `[5, min(50, 0.1 / ((2 pi / L)^2 nu))]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Allowed distance to the target exponent.
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// Overrides the per-norm default (envelope for sup norms).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<FitMode>,
}

fn default_tol() -> f64 {
    0.1
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { window: None, tolerance: default_tol(), mode: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelOrder {
    #[serde(default)]
    pub k: u32,
    #[serde(default)]
    pub alpha: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Probes {
    /// Norm in which `U(t) - G(t) U0` is logged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_residual: Option<NormRequest>,
    #[serde(default)]
    pub diffusion_wave: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Write a snapshot every this many logged samples; 0 keeps only the final one.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub snapshots: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    /// Overrides the seed of band-limited initial data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub grid: GridConfig,
    pub params: FluidParams,
    #[serde(default = "zero_data")]
    pub initial: InitialData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub norms: Vec<NormRequest>,
    /// Integrability index of the tracked functional `X_p`.
    #[serde(default = "two")]
    pub x_p: f64,
    #[serde(default = "default_threshold")]
    pub smallness_threshold: f64,
    #[serde(default = "yes")]
    pub enforce_smallness: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(default)]
    pub kernel: Vec<KernelOrder>,
    #[serde(default)]
    pub probes: Probes,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume_from: Option<PathBuf>,
}

fn zero_data() -> InitialData {
    InitialData::Zero
}
fn two() -> f64 {
    2.0
}
fn default_threshold() -> f64 {
    DEFAULT_SMALLNESS_THRESHOLD
}
fn yes() -> bool {
    true
}

/// Parses and validates; every unknown key and every violated constraint is reported.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut unknown = Vec::new();
    let de = toml::Deserializer::parse(text).map_err(|e| NskError::Config(vec![e.to_string()]))?;
    let parsed: std::result::Result<ExperimentConfig, _> =
        serde_ignored::deserialize(de, |path| unknown.push(format!("unknown key `{path}`")));
    let cfg = match parsed {
        Ok(c) => c,
        Err(e) => {
            unknown.push(e.to_string().trim().to_string());
            return Err(NskError::Config(unknown));
        }
    };
    let mut all = unknown;
    all.extend(cfg.violations(cfg.kind));
    if all.is_empty() {
        Ok(cfg)
    } else {
        Err(NskError::Config(all))
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| NskError::Config(vec![e.to_string()]))
    }

    /// Every violated constraint for running as `kind` (falls back to the stored kind).
    pub fn violations(&self, kind: Option<Kind>) -> Vec<String> {
        let mut out = Vec::new();
        let kind = kind.or(self.kind);
        let d = self.grid.d;
        if let Err(e) = self.grid.build() {
            out.push(format!("grid: {e}"));
        }
        out.extend(self.params.violations().into_iter().map(|v| format!("params: {v}")));
        out.extend(self.initial.violations(d));
        for (i, n) in self.norms.iter().enumerate() {
            if let Err(e) = n.validate() {
                out.push(format!("norms[{i}]: {e}"));
            }
        }
        if let Some(r) = &self.probes.linear_residual {
            if let Err(e) = r.validate() {
                out.push(format!("probes.linear_residual: {e}"));
            }
        }
        if !(self.x_p >= 1.0 && self.x_p.is_finite()) {
            out.push(format!("x_p must satisfy 1 <= p < inf, got {}", self.x_p));
        }
        if !(self.smallness_threshold > 0.0) {
            out.push("smallness_threshold must be positive".into());
        }
        if let Some(f) = &self.fit {
            if let Some([a, b]) = f.window {
                if !(a > 0.0 && b > a) {
                    out.push(format!("fit.window must satisfy 0 < t0 < t1, got [{a}, {b}]"));
                }
            }
            if !(f.tolerance > 0.0) {
                out.push("fit.tolerance must be positive".into());
            }
        }
        if let Some(s) = &self.sampling {
            out.extend(s.violations());
        }
        let needs_integrator = matches!(kind, Some(Kind::Simulate) | Some(Kind::DecayFit));
        match &self.integrator {
            Some(ic) => out.extend(ic.violations()),
            None if needs_integrator => out.push("[integrator] section is required".into()),
            None => {}
        }
        match kind {
            Some(Kind::LinearProbe) | Some(Kind::KernelProbe) if self.sampling.is_none() => {
                out.push("[sampling] section is required".into());
            }
            _ => {}
        }
        if kind == Some(Kind::KernelProbe) {
            if self.kernel.is_empty() {
                out.push("at least one [[kernel]] order is required".into());
            }
            if let Some(s) = &self.sampling {
                let n = s.resolve().len();
                if n < MIN_FIT_SAMPLES {
                    out.push(format!("kernel-probe needs at least {MIN_FIT_SAMPLES} sample times, got {n}"));
                }
            }
            for (i, k) in self.kernel.iter().enumerate() {
                if k.k > 3 {
                    out.push(format!("kernel[{i}].k must be <= 3"));
                }
                if !k.alpha.is_empty() && k.alpha.len() != d {
                    out.push(format!("kernel[{i}].alpha needs {d} entries"));
                }
            }
        }
        if kind == Some(Kind::DecayFit) {
            // decay targets exist only on the range of the decay theorem
            for (i, n) in self.norms.iter().enumerate() {
                if let NormRequest::FourierBesov { s, p, .. } | NormRequest::Besov { s, p, .. } = n {
                    for v in exponent_range_violations(d, index_value(*p), *s) {
                        out.push(format!("norms[{i}]: {v}"));
                    }
                }
            }
            if self.norms.is_empty() && self.probes.linear_residual.is_none() && !self.probes.diffusion_wave {
                out.push("decay-fit needs at least one norm or probe".into());
            }
        }
        if let Some(f) = self.fit.as_ref().and_then(|f| f.window) {
            if let Some(ic) = &self.integrator {
                if f[0] > ic.t_end && needs_integrator {
                    out.push("fit.window starts after integrator.t_end".into());
                }
            }
        }
        out
    }
}

fn index_value(i: Index) -> f64 {
    i.0
}
