//! Experiment runs: norm logs, fits, manifest and snapshots on disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, FitConfig, Kind};
use crate::decay::{
    data_diagnostics, default_j0, default_window, fit_rate, kernel_decay_probe,
    kernel_exponent, linear_approx_exponent, theoretical_exponent, DataDiagnostics, DiffusionWaveProbe, FieldSel,
    FitMode, LinearResidualProbe, NormRequest, NormSeries, RateFit,
};
use crate::error::{NskError, Result};
use crate::field::{Grid, SpectralState};
use crate::integrator::{run_linear, run_simulation, Observer, StepInfo};
use crate::lp::DyadicPartition;
use crate::params::FluidParams;
use crate::snapshot;
use crate::verify;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `output.dir`.
    pub out_dir: Option<PathBuf>,
    /// Overrides the configured seed.
    pub seed: Option<u64>,
    pub emit_plot_data: bool,
    /// Worker threads in use, recorded in the manifest.
    pub threads: usize,
}

/// How a fitted exponent is judged against its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Target {
    /// `|exponent - value| <= tolerance`
    Near { value: f64, tolerance: f64 },
    /// `exponent <= bound`
    AtMost { bound: f64 },
    /// `exponent >= bound`
    AtLeast { bound: f64 },
    /// `lo <= exponent <= hi`
    Within { lo: f64, hi: f64 },
}

impl Target {
    pub fn check(&self, x: f64) -> bool {
        match *self {
            Target::Near { value, tolerance } => (x - value).abs() <= tolerance,
            Target::AtMost { bound } => x <= bound,
            Target::AtLeast { bound } => x >= bound,
            Target::Within { lo, hi } => lo <= x && x <= hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub series: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    /// `None` when there is no target or the fit failed.
    pub pass: Option<bool>,
    /// Whether the initial data meet the smallness hypotheses behind the target.
    pub theorem_comparable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Exponent differences between two fitted series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub name: String,
    /// `upper - lower` exponent.
    pub value: Option<f64>,
    pub target: Target,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub fits: Vec<FitRecord>,
    pub gaps: Vec<GapRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Complete,
    Incomplete,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub status: Status,
    pub kind: Kind,
    pub version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_time_s: f64,
    pub params_hash: String,
    pub config: ExperimentConfig,
    pub diagnostics: Option<DataDiagnostics>,
    pub steps_done: Option<usize>,
    pub steps_planned: Option<usize>,
    /// `sup_t X_p(t) / X_{p,0}`
    pub x_max_ratio: Option<f64>,
    pub failure: Option<String>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
pub struct Outcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub report: FitReport,
    pub checks: Vec<verify::Check>,
    /// 0 ok, 3 numerical failure, 4 failed verification.
    pub exit_code: i32,
}

/// Column-per-series log; rows are the union of sample times.
#[derive(Clone, Debug, Default)]
struct Table {
    series: Vec<NormSeries>,
}

impl Table {
    fn write_csv(&self, path: &Path) -> Result<()> {
        let mut times: Vec<f64> = self.series.iter().flat_map(|s| s.times.iter().copied()).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let maps: Vec<BTreeMap<u64, f64>> = self
            .series
            .iter()
            .map(|s| s.times.iter().zip(&s.values).map(|(t, v)| (t.to_bits(), *v)).collect())
            .collect();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string()];
        header.extend(self.series.iter().map(|s| s.label.clone()));
        w.write_record(&header)?;
        for t in times {
            let mut row = vec![format!("{t}")];
            for m in &maps {
                row.push(m.get(&t.to_bits()).map(|v| format!("{v:e}")).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_long(&self, path: &Path, report: &FitReport) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["series", "kind", "t", "value"])?;
        for s in &self.series {
            for (t, v) in s.times.iter().zip(&s.values) {
                w.write_record([s.label.as_str(), "data", &format!("{t}"), &format!("{v:e}")])?;
            }
        }
        for r in &report.fits {
            if let Some(f) = &r.fit {
                for t in f.window {
                    let v = f.amplitude * t.powf(f.exponent);
                    w.write_record([r.series.as_str(), "fit", &format!("{t}"), &format!("{v:e}")])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    fn get(&self, label: &str) -> Option<&NormSeries> {
        self.series.iter().find(|s| s.label == label)
    }
}

/// Observer logging the requested norms, diagnostics, probes and snapshots.
struct Recorder<'a> {
    norms: Vec<(NormRequest, NormSeries)>,
    partition: DyadicPartition,
    min_density: NormSeries,
    x_value: NormSeries,
    lin: Option<LinearResidualProbe>,
    dw: Option<DiffusionWaveProbe>,
    snapshots: Option<(&'a Path, usize, &'a FluidParams)>,
    samples: usize,
    written: Vec<String>,
}

impl Observer for Recorder<'_> {
    fn observe(&mut self, u: &SpectralState, info: &StepInfo) -> Result<()> {
        for (req, series) in self.norms.iter_mut() {
            series.push(u.time, req.evaluate(u, &self.partition)?)?;
        }
        self.min_density.push(u.time, info.min_density)?;
        self.x_value.push(u.time, info.x_value)?;
        if let Some(p) = self.lin.as_mut() {
            p.record(u)?;
        }
        if let Some(p) = self.dw.as_mut() {
            p.record(u)?;
        }
        if let Some((dir, every, params)) = self.snapshots {
            if every > 0 && self.samples.is_multiple_of(every) {
                let name = format!("snapshot_{:06}.bin", info.step);
                snapshot::write(&dir.join(&name), u, params)?;
                self.written.push(name);
            }
        }
        self.samples += 1;
        Ok(())
    }
}

impl Recorder<'_> {
    fn into_table(self) -> (Table, Vec<String>) {
        let mut series: Vec<NormSeries> = self.norms.into_iter().map(|(_, s)| s).collect();
        series.push(self.min_density);
        series.push(self.x_value);
        if let Some(p) = self.lin {
            series.push(p.residual);
        }
        if let Some(p) = self.dw {
            series.extend([p.residual, p.heat, p.compressible, p.wave_error]);
        }
        (Table { series }, self.written)
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn fit_one(
    series: Option<&NormSeries>,
    label: &str,
    window: [f64; 2],
    mode: FitMode,
    target: Option<Target>,
    comparable: bool,
) -> FitRecord {
    let Some(series) = series else {
        return FitRecord {
            series: label.into(),
            fit: None,
            target,
            pass: None,
            theorem_comparable: comparable,
            error: Some("series missing".into()),
        };
    };
    match fit_rate(series, window, mode) {
        Ok(f) => FitRecord {
            series: label.into(),
            pass: target.as_ref().map(|t| t.check(f.exponent)),
            fit: Some(f),
            target,
            theorem_comparable: comparable,
            error: None,
        },
        Err(e) => FitRecord {
            series: label.into(),
            fit: None,
            target,
            pass: None,
            theorem_comparable: comparable,
            error: Some(e.to_string()),
        },
    }
}

fn gap(report: &FitReport, name: &str, upper: &str, lower: &str, target: Target) -> GapRecord {
    let exp = |l: &str| report.fits.iter().find(|r| r.series == l).and_then(|r| r.fit.as_ref()).map(|f| f.exponent);
    let value = match (exp(upper), exp(lower)) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    GapRecord { name: name.into(), value, pass: value.map(|v| target.check(v)), target }
}

/// Fits every logged norm that has a decay target.
fn fit_table(
    cfg: &ExperimentConfig,
    grid: &Grid,
    table: &Table,
    fit: &FitConfig,
    diag: Option<&DataDiagnostics>,
) -> FitReport {
    let d = grid.dim();
    let df = d as f64;
    let window = fit.window.unwrap_or_else(|| default_window(grid, &cfg.params));
    let tol = fit.tolerance;
    let low_small = diag.is_none_or(|g| g.low_frequency_small);
    let l1_small = diag.is_none_or(|g| g.l1_small);
    let mut report = FitReport::default();
    for req in &cfg.norms {
        let label = req.label();
        let (target, mode) = match req {
            NormRequest::FourierBesov { s, p, .. } | NormRequest::Besov { s, p, .. } => (
                theoretical_exponent(d, p.0, *s).ok().map(|e| Target::Near { value: -e, tolerance: tol }),
                FitMode::Pointwise,
            ),
            NormRequest::Linf { field: FieldSel::Solenoidal } => {
                (Some(Target::Near { value: -0.5 * df, tolerance: tol }), FitMode::Envelope)
            }
            NormRequest::Linf { field: FieldSel::Compressible } => {
                (Some(Target::AtMost { bound: -0.5 * df - tol }), FitMode::Envelope)
            }
            NormRequest::Linf { .. } => (None, FitMode::Envelope),
            NormRequest::L2 { field } => {
                let t = match field {
                    FieldSel::Compressible => None,
                    _ => Some(Target::Near { value: -0.25 * df, tolerance: tol }),
                };
                (t, FitMode::Pointwise)
            }
            NormRequest::L1 { .. } => (None, FitMode::Pointwise),
        };
        let mode = fit.mode.unwrap_or(mode);
        report.fits.push(fit_one(table.get(&label), &label, window, mode, target, low_small));
    }
    if let Some(req) = &cfg.probes.linear_residual {
        let sol = req.label();
        let res = format!("linres_{sol}");
        let target = match req {
            NormRequest::FourierBesov { s, p, .. } | NormRequest::Besov { s, p, .. } => {
                linear_approx_exponent(d, p.0, *s).ok().map(|e| Target::Near { value: -e, tolerance: tol })
            }
            _ => None,
        };
        if !cfg.norms.contains(req) {
            report.fits.push(fit_one(table.get(&sol), &sol, window, FitMode::Pointwise, None, low_small));
        }
        report.fits.push(fit_one(table.get(&res), &res, window, FitMode::Pointwise, target, low_small));
        // d = 2 carries a log t factor
        let gap_target = if d == 2 { Target::Within { lo: 0.35, hi: 0.6 } } else { Target::Near { value: 0.5, tolerance: 0.15 } };
        report.gaps.push(gap(&report, "linear_residual_gap", &sol, &res, gap_target));
    }
    if cfg.probes.diffusion_wave {
        let specs = [
            ("dw_heat_linf", Some(Target::Near { value: -0.5 * df, tolerance: tol })),
            ("dw_compressible_linf", Some(Target::AtMost { bound: -0.5 * df - tol })),
            ("dw_residual_linf", Some(Target::AtMost { bound: -0.5 * df - tol })),
            ("dw_wave_error_linf", None),
        ];
        for (label, target) in specs {
            report.fits.push(fit_one(table.get(label), label, window, FitMode::Envelope, target, l1_small));
        }
        // compressible part decays at least as fast as the heat part, up to 0.05
        let ordering = Target::AtLeast { bound: -0.05 };
        report.gaps.push(gap(&report, "heat_minus_compressible", "dw_heat_linf", "dw_compressible_linf", ordering));
        let faster = Target::AtLeast { bound: 0.0 };
        report.gaps.push(gap(&report, "compressible_minus_wave_error", "dw_compressible_linf", "dw_wave_error_linf", faster));
    }
    report
}

fn build_state(cfg: &ExperimentConfig, grid: &Grid, seed: Option<u64>, warnings: &mut Vec<String>) -> Result<SpectralState> {
    match &cfg.resume_from {
        Some(path) => {
            let snap = snapshot::read(path)?;
            if snap.state.grid() != grid {
                return Err(NskError::Snapshot("snapshot grid differs from the configured grid".into()));
            }
            if let Some(w) = snap.hash_warning(&cfg.params) {
                eprintln!("warning: {w}");
                warnings.push(w);
            }
            Ok(snap.state)
        }
        None => cfg.initial.build(grid, seed),
    }
}

/// Runs `cfg` as `kind`, writing every artifact under the output directory.
pub fn run_experiment(cfg: &ExperimentConfig, kind: Kind, opts: &RunOptions) -> Result<Outcome> {
    let v = cfg.violations(Some(kind));
    if !v.is_empty() {
        return Err(NskError::Config(v));
    }
    let start = Instant::now();
    let dir = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("nsk-{}", kind.name())));
    std::fs::create_dir_all(&dir)?;
    let seed = opts.seed.or(cfg.seed);
    let mut cfg = cfg.clone();
    cfg.kind = Some(kind);
    let mut manifest = Manifest {
        status: Status::Incomplete,
        kind,
        version: VERSION.into(),
        seed,
        threads: opts.threads,
        wall_time_s: 0.0,
        params_hash: snapshot::hex(&snapshot::params_hash(&cfg.params)),
        config: cfg.clone(),
        diagnostics: None,
        steps_done: None,
        steps_planned: None,
        x_max_ratio: None,
        failure: None,
        warnings: Vec::new(),
        outputs: Vec::new(),
    };
    let manifest_path = dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;

    let grid = cfg.grid.build()?;
    let mut report = FitReport::default();
    let mut checks = Vec::new();
    let mut exit_code = 0;
    let mut table = Table::default();

    let result: Result<()> = (|| {
        match kind {
            Kind::Verify => {
                checks = verify::run_suite(&cfg)?;
                let vdir = dir.join("verify");
                std::fs::create_dir_all(&vdir)?;
                for c in &checks {
                    write_json(&vdir.join(format!("{}.json", c.name)), c)?;
                    manifest.outputs.push(format!("verify/{}.json", c.name));
                }
                write_json(&dir.join("verify_summary.json"), &checks)?;
                manifest.outputs.push("verify_summary.json".into());
                if checks.iter().any(|c| !c.passed) {
                    exit_code = 4;
                }
            }
            Kind::KernelProbe => {
                let times = cfg.sampling.as_ref().expect("validated").resolve();
                let fit = cfg.fit.clone().unwrap_or_default();
                for order in &cfg.kernel {
                    let alpha = if order.alpha.is_empty() { vec![0; grid.dim()] } else { order.alpha.clone() };
                    let (mut series, rf) = kernel_decay_probe(&grid, &cfg.params, &times, order.k, &alpha)?;
                    let label = format!("kernel_k{}_a{}", order.k, alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(""));
                    series.label = label.clone();
                    let target = Target::Near { value: -kernel_exponent(grid.dim(), order.k, &alpha), tolerance: fit.tolerance };
                    let rec = match fit.window {
                        Some(w) => fit_one(Some(&series), &label, w, FitMode::Pointwise, Some(target), true),
                        None => FitRecord {
                            series: label,
                            pass: Some(target.check(rf.exponent)),
                            fit: Some(RateFit { label: series.label.clone(), ..rf }),
                            target: Some(target),
                            theorem_comparable: true,
                            error: None,
                        },
                    };
                    report.fits.push(rec);
                    table.series.push(series);
                }
            }
            Kind::Simulate | Kind::LinearProbe | Kind::DecayFit => {
                let u0 = build_state(&cfg, &grid, seed, &mut manifest.warnings)?;
                let partition = DyadicPartition::new(&grid)?;
                let j0 = default_j0(&partition, &cfg.params);
                let diag = data_diagnostics(&partition, &u0, cfg.x_p, j0, cfg.smallness_threshold)?;
                manifest.diagnostics = Some(diag.clone());
                let linear = kind == Kind::LinearProbe || cfg.integrator.as_ref().is_some_and(|i| i.linear_only);
                if kind == Kind::Simulate && cfg.enforce_smallness && !linear && !diag.small {
                    return Err(NskError::Smallness { value: diag.x_p0, threshold: cfg.smallness_threshold });
                }
                let snapshots = cfg.output.snapshots.then_some((dir.as_path(), cfg.output.snapshot_every, &cfg.params));
                let mut rec = Recorder {
                    norms: cfg.norms.iter().map(|n| (n.clone(), NormSeries::empty(n.label()))).collect(),
                    partition: partition.clone(),
                    min_density: NormSeries::empty("min_density"),
                    x_value: NormSeries::empty(format!("x_{}", cfg.x_p)),
                    lin: cfg.probes.linear_residual.clone().map(|n| LinearResidualProbe::new(&u0, &cfg.params, n)).transpose()?,
                    dw: cfg.probes.diffusion_wave.then(|| DiffusionWaveProbe::new(&u0, &cfg.params)).transpose()?,
                    snapshots,
                    samples: 0,
                    written: Vec::new(),
                };
                let last = if kind == Kind::LinearProbe {
                    let times = cfg.sampling.as_ref().expect("validated").resolve();
                    let last = run_linear(&u0, &cfg.params, &times, cfg.x_p, &mut [&mut rec])?;
                    manifest.steps_done = Some(times.len());
                    manifest.steps_planned = Some(times.len());
                    last
                } else {
                    let ic = cfg.integrator.as_ref().expect("validated");
                    let out = run_simulation(&u0, &cfg.params, ic, cfg.x_p, &mut [&mut rec])?;
                    manifest.steps_done = Some(out.steps_done);
                    manifest.steps_planned = Some(out.steps_planned);
                    manifest.x_max_ratio = Some(out.x_max_ratio);
                    if let Some(e) = out.failure {
                        manifest.failure = Some(e.to_string());
                        exit_code = e.exit_code();
                    }
                    out.last
                };
                if cfg.output.snapshots || manifest.failure.is_some() {
                    snapshot::write(&dir.join("snapshot_final.bin"), &last, &cfg.params)?;
                    manifest.outputs.push("snapshot_final.bin".into());
                }
                let (t, written) = rec.into_table();
                table = t;
                manifest.outputs.extend(written);
                if kind == Kind::DecayFit || cfg.fit.is_some() {
                    report = fit_table(&cfg, &grid, &table, &cfg.fit.clone().unwrap_or_default(), Some(&diag));
                }
            }
        }
        Ok(())
    })();

    if kind != Kind::Verify {
        table.write_csv(&dir.join("norms.csv"))?;
        manifest.outputs.push("norms.csv".into());
        write_json(&dir.join("fits.json"), &report)?;
        manifest.outputs.push("fits.json".into());
        if opts.emit_plot_data {
            table.write_long(&dir.join("plot_data.csv"), &report)?;
            manifest.outputs.push("plot_data.csv".into());
        }
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    if let Err(e) = &result {
        manifest.failure = Some(e.to_string());
    }
    if result.is_ok() && manifest.failure.is_none() {
        manifest.status = Status::Complete;
    }
    write_json(&manifest_path, &manifest)?;
    result?;
    Ok(Outcome { dir, manifest, report, checks, exit_code })
}
