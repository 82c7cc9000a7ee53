//! Norm time series, power-law fits and the residual probes used to compare
//! trajectories with the asymptotic decay rates.

use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};
use crate::field::{Grid, SpectralField, SpectralState};
use crate::integrator::{Observer, StepInfo};
use crate::linear::{heat_semigroup, helmholtz_project, k_psi_kernel, wave_diffusion_approx, LowPass, Propagator};
use crate::lp::{BesovFlavor, BesovSpec, DyadicPartition, Index};
use crate::nonlinear::to_physical;
use crate::params::FluidParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl NormSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Self { label: label.into(), times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn empty(label: impl Into<String>) -> Self {
        Self { label: label.into(), times: Vec::new(), values: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(NskError::Series(format!(
                "{}: {} times but {} values",
                self.label,
                self.times.len(),
                self.values.len()
            )));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NskError::Series(format!("{}: times must be strictly increasing", self.label)));
        }
        if self.values.iter().any(|v| !(*v >= 0.0)) {
            return Err(NskError::Series(format!("{}: values must be nonnegative", self.label)));
        }
        Ok(())
    }

    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(NskError::Series(format!("{}: time {t} does not advance past {last}", self.label)));
            }
        }
        if !(v >= 0.0) {
            return Err(NskError::Series(format!("{}: value {v} at t = {t} is not a nonnegative number", self.label)));
        }
        self.times.push(t);
        self.values.push(v);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Running maximum over the forward window `[t, 2t]`, truncated at the
    /// end of the series.
    pub fn envelope(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        let mut hi = 0;
        for (i, o) in out.iter_mut().enumerate() {
            hi = hi.max(i);
            while hi + 1 < n && self.times[hi + 1] <= 2.0 * self.times[i] {
                hi += 1;
            }
            *o = self.values[i..=hi].iter().copied().fold(0.0, f64::max);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    Pointwise,
    Envelope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub label: String,
    pub exponent: f64,
    pub amplitude: f64,
    pub window: [f64; 2],
    /// RMS of the log-space residual.
    pub residual: f64,
    pub mode: FitMode,
    pub samples: usize,
}

/// Fewest samples a rate fit accepts inside its window.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares slope of `log v` against `log t` over `window`.
pub fn fit_rate(series: &NormSeries, window: [f64; 2], mode: FitMode) -> Result<RateFit> {
    series.validate()?;
    let values = match mode {
        FitMode::Pointwise => series.values.clone(),
        FitMode::Envelope => series.envelope(),
    };
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&values)
        .filter(|(t, _)| **t >= window[0] && **t <= window[1])
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(NskError::Fit(format!(
            "{}: {} samples in [{}, {}], need at least {MIN_FIT_SAMPLES}",
            series.label,
            pts.len(),
            window[0],
            window[1]
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(t, v)| !(*v > 0.0) || !(*t > 0.0)) {
        return Err(NskError::Fit(format!("{}: nonpositive sample {v} at t = {t}", series.label)));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(NskError::Fit(format!("{}: degenerate time window", series.label)));
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let residual = (rss / n).sqrt();
    if !residual.is_finite() {
        return Err(NskError::Fit(format!("{}: non-finite residual", series.label)));
    }
    Ok(RateFit {
        label: series.label.clone(),
        exponent: slope,
        amplitude: icpt.exp(),
        window,
        residual,
        mode,
        samples: pts.len(),
    })
}

/// Decay rate `d/2 (1 - 1/p) + s/2` of `|| |grad|^s U(t) ||_{B^0_{p,1}}`.
pub fn theoretical_exponent(d: usize, p: f64, s: f64) -> Result<f64> {
    let v = exponent_range_violations(d, p, s);
    if !v.is_empty() {
        return Err(NskError::ExponentRange(v.join("; ")));
    }
    Ok(0.5 * d as f64 * (1.0 - 1.0 / p) + 0.5 * s)
}

/// Violated bounds of `1 <= p <= 2d/(d-1)` and `-d/p' < s <= 1 + d/p`.
pub fn exponent_range_violations(d: usize, p: f64, s: f64) -> Vec<String> {
    let mut out = Vec::new();
    let df = d as f64;
    let p_max = 2.0 * df / (df - 1.0);
    if !(p >= 1.0 && p <= p_max) {
        out.push(format!("p = {p} violates 1 <= p <= 2d/(d-1) = {p_max}"));
        return out;
    }
    let lo = -df * (1.0 - 1.0 / p);
    let hi = 1.0 + df / p;
    // at p = 1 the lower bound is 0 and the L^1-type norm itself is admitted
    let above = if p == 1.0 { s >= lo } else { s > lo };
    if !(above && s <= hi) {
        out.push(format!("s = {s} violates -d/p' < s <= 1 + d/p, i.e. {lo} < s <= {hi}"));
    }
    out
}

/// Rate `d/(2p') + (s+1)/2` of the distance to the linear flow (up to `log t` when `d = 2`).
pub fn linear_approx_exponent(d: usize, p: f64, s: f64) -> Result<f64> {
    Ok(theoretical_exponent(d, p, s)? + 0.5)
}

/// `min((3d - 1)/4, d/2 + 1/2)`.
pub fn diffusion_wave_exponent(d: usize) -> f64 {
    let df = d as f64;
    f64::min((3.0 * df - 1.0) / 4.0, 0.5 * df + 0.5)
}

/// `(3d - 3)/4 + (k + |alpha|)/2`.
pub fn kernel_exponent(d: usize, k: u32, alpha: &[u32]) -> f64 {
    (3.0 * d as f64 - 3.0) / 4.0 + 0.5 * (k + alpha.iter().sum::<u32>()) as f64
}

/// Default fit window `[5, min(50, 0.1 / ((2 pi / L)^2 nu))]`.
pub fn default_window(grid: &Grid, params: &FluidParams) -> [f64; 2] {
    let floor = 0.1 / (grid.dk().powi(2) * params.linear().nu);
    [5.0, f64::min(50.0, floor)]
}

/// Sup-norm series of `d_t^k d_x^alpha K_{psi,L}` with `psi = 1`, and its fit over the sampled times.
pub fn kernel_decay_probe(
    grid: &Grid,
    params: &FluidParams,
    times: &[f64],
    k: u32,
    alpha: &[u32],
) -> Result<(NormSeries, RateFit)> {
    params.validate()?;
    let chi = LowPass::for_params(params);
    let mut series = NormSeries::empty(format!("kernel_k{k}_a{}", alpha.iter().sum::<u32>()));
    for &t in times {
        let samples = k_psi_kernel(grid, params, t, &|_| 1.0, &chi, k, alpha)?;
        series.push(t, samples.iter().map(|z| z.norm()).fold(0.0, f64::max))?;
    }
    let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else {
        return Err(NskError::Fit("kernel probe needs sample times".into()));
    };
    let fit = fit_rate(&series, [t0, t1], FitMode::Pointwise)?;
    Ok((series, fit))
}

/// Part of the state a norm is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSel {
    A,
    M,
    /// `(a, m)`
    State,
    /// `P_sigma m`
    Solenoidal,
    /// `m - P_sigma m`
    Compressible,
}

impl FieldSel {
    fn tag(self) -> &'static str {
        match self {
            FieldSel::A => "a",
            FieldSel::M => "m",
            FieldSel::State => "u",
            FieldSel::Solenoidal => "msol",
            FieldSel::Compressible => "mcomp",
        }
    }

    /// The selected components.
    pub fn select(self, u: &SpectralState) -> Result<Vec<SpectralField>> {
        Ok(match self {
            FieldSel::A => vec![u.a.clone()],
            FieldSel::M => u.m.clone(),
            FieldSel::State => u.components().cloned().collect(),
            FieldSel::Solenoidal => helmholtz_project(&u.m)?.0,
            FieldSel::Compressible => helmholtz_project(&u.m)?.1,
        })
    }
}

/// One column of the norm log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormRequest {
    FourierBesov { field: FieldSel, s: f64, p: Index, sigma: Index },
    Besov { field: FieldSel, s: f64, p: Index, sigma: Index },
    Linf { field: FieldSel },
    L1 { field: FieldSel },
    L2 { field: FieldSel },
}

fn fmt_index(i: Index) -> String {
    if i.is_inf() {
        "inf".into()
    } else {
        format!("{}", i.0)
    }
}

impl NormRequest {
    pub fn label(&self) -> String {
        match self {
            NormRequest::FourierBesov { field, s, p, sigma } => {
                format!("fb_{}_s{}_p{}_q{}", field.tag(), s, fmt_index(*p), fmt_index(*sigma))
            }
            NormRequest::Besov { field, s, p, sigma } => {
                format!("b_{}_s{}_p{}_q{}", field.tag(), s, fmt_index(*p), fmt_index(*sigma))
            }
            NormRequest::Linf { field } => format!("linf_{}", field.tag()),
            NormRequest::L1 { field } => format!("l1_{}", field.tag()),
            NormRequest::L2 { field } => format!("l2_{}", field.tag()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NormRequest::FourierBesov { s, p, sigma, .. } | NormRequest::Besov { s, p, sigma, .. } => {
                BesovSpec { s: *s, p: *p, sigma: *sigma, flavor: BesovFlavor::FourierBesov }.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, u: &SpectralState, partition: &DyadicPartition) -> Result<f64> {
        match self {
            NormRequest::FourierBesov { field, s, p, sigma } => {
                let comps = field.select(u)?;
                let refs: Vec<&SpectralField> = comps.iter().collect();
                let spec = BesovSpec { s: *s, p: *p, sigma: *sigma, flavor: BesovFlavor::FourierBesov };
                spec.validate()?;
                partition.fourier_besov_norm_vector(&refs, &spec)
            }
            NormRequest::Besov { field, s, p, sigma } => {
                let comps = field.select(u)?;
                besov_norm_vector(partition, &comps, &BesovSpec { s: *s, p: *p, sigma: *sigma, flavor: BesovFlavor::Besov })
            }
            NormRequest::Linf { field } => Ok(sup_norm(&field.select(u)?)?),
            NormRequest::L1 { field } => lebesgue_norm(&field.select(u)?, 1.0),
            NormRequest::L2 { field } => lebesgue_norm(&field.select(u)?, 2.0),
        }
    }
}

/// Besov norm of a vector field with the pointwise Euclidean modulus of the blocks.
fn besov_norm_vector(partition: &DyadicPartition, comps: &[SpectralField], spec: &BesovSpec) -> Result<f64> {
    spec.validate()?;
    if comps.len() == 1 {
        return partition.besov_norm(&comps[0], spec);
    }
    let g = *partition.grid();
    let weight = g.lattice_measure() / g.len() as f64;
    let mut shells = Vec::new();
    for j in partition.shells() {
        let blocks = comps.iter().map(|c| partition.block(c, j)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&SpectralField> = blocks.iter().collect();
        let phys = to_physical(&refs)?;
        let modulus = (0..g.len()).map(|x| phys.iter().map(|c| c[x] * c[x]).sum::<f64>().sqrt());
        shells.push(if spec.p.is_inf() {
            modulus.fold(0.0, f64::max)
        } else {
            (modulus.map(|v| v.powf(spec.p.0)).sum::<f64>() * weight).powf(1.0 / spec.p.0)
        });
    }
    Ok(partition.combine(shells, spec.s, spec.sigma))
}

/// `sup_x |U(x)|` with the Euclidean modulus over components.
pub fn sup_norm(comps: &[SpectralField]) -> Result<f64> {
    let refs: Vec<&SpectralField> = comps.iter().collect();
    let phys = to_physical(&refs)?;
    let n = phys[0].len();
    Ok((0..n).map(|x| phys.iter().map(|c| c[x] * c[x]).sum::<f64>()).fold(0.0, f64::max).sqrt())
}

/// `(int_torus |U|^p dx)^{1/p}`.
pub fn lebesgue_norm(comps: &[SpectralField], p: f64) -> Result<f64> {
    let g = *comps[0].grid();
    let refs: Vec<&SpectralField> = comps.iter().collect();
    let phys = to_physical(&refs)?;
    let cell = g.dx().powi(g.dim() as i32);
    let sum: f64 = (0..g.len())
        .map(|x| phys.iter().map(|c| c[x] * c[x]).sum::<f64>().sqrt().powf(p))
        .sum();
    Ok((sum * cell).powf(1.0 / p))
}

/// Smallness diagnostics of initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataDiagnostics {
    /// `X_{p,0}`
    pub x_p0: f64,
    /// `||(a0, m0)||_{L^1}` over the torus.
    pub l1: f64,
    /// `D_{p,0} = sup_{j <= j0} 2^{-(d/p') j} ||phi_j (a0, m0)||_{L^p^}`.
    pub d_p0: f64,
    pub j0: i32,
    pub threshold: f64,
    /// `X_{p,0} <= threshold`.
    pub small: bool,
    /// `||U0||_{L^1} <= threshold`.
    pub l1_small: bool,
    /// `D_{p,0} <= threshold`.
    pub low_frequency_small: bool,
}

/// Shell nearest the regime-transition frequency, clamped to the interior of the partition.
pub fn default_j0(partition: &DyadicPartition, params: &FluidParams) -> i32 {
    let j = crate::linear::transition_frequency(params).log2().round() as i32;
    j.clamp(partition.j_min() + 1, partition.j_max())
}

pub fn data_diagnostics(
    partition: &DyadicPartition,
    u0: &SpectralState,
    p: f64,
    j0: i32,
    threshold: f64,
) -> Result<DataDiagnostics> {
    let x_p0 = crate::integrator::initial_norm(partition, u0, p)?;
    let comps: Vec<SpectralField> = u0.components().cloned().collect();
    let l1 = lebesgue_norm(&comps, 1.0)?;
    let refs: Vec<&SpectralField> = comps.iter().collect();
    let shells = partition.shell_norms_vector(&refs, Index(p))?;
    let d = u0.grid().dim() as f64;
    let dp = d * (1.0 - 1.0 / p);
    let d_p0 = partition
        .shells()
        .zip(shells)
        .filter(|(j, _)| *j <= j0)
        .map(|(j, v)| 2f64.powf(-dp * j as f64) * v)
        .fold(0.0, f64::max);
    Ok(DataDiagnostics {
        x_p0,
        l1,
        d_p0,
        j0,
        threshold,
        small: x_p0 <= threshold,
        l1_small: l1 <= threshold,
        low_frequency_small: d_p0 <= threshold,
    })
}

/// Streams `||U(t) - G(t) U0||` and `||U(t)||` in one norm.
pub struct LinearResidualProbe {
    u0: SpectralState,
    params: FluidParams,
    norm: NormRequest,
    partition: DyadicPartition,
    pub residual: NormSeries,
    pub solution: NormSeries,
}

impl LinearResidualProbe {
    pub fn new(u0: &SpectralState, params: &FluidParams, norm: NormRequest) -> Result<Self> {
        norm.validate()?;
        let label = norm.label();
        Ok(Self {
            u0: u0.clone(),
            params: params.clone(),
            partition: DyadicPartition::new(u0.grid())?,
            residual: NormSeries::empty(format!("linres_{label}")),
            solution: NormSeries::empty(label),
            norm,
        })
    }

    pub fn record(&mut self, u: &SpectralState) -> Result<()> {
        let dt = u.time - self.u0.time;
        let lin = Propagator::new(u.grid(), &self.params, dt)?.apply(&self.u0)?;
        let diff = u.sub(&lin)?;
        let r = self.norm.evaluate(&diff, &self.partition)?;
        let s = self.norm.evaluate(u, &self.partition)?;
        if u.time > 0.0 {
            self.residual.push(u.time, r)?;
            self.solution.push(u.time, s)?;
        }
        Ok(())
    }
}

impl Observer for LinearResidualProbe {
    fn observe(&mut self, state: &SpectralState, _: &StepInfo) -> Result<()> {
        self.record(state)
    }
}

/// `||(a, m)(t) - (0, e^{t mu lap} P_sigma m0)||_inf` together with the heat
/// part, the compressible part and the distance of the compressible part to
/// the diffusion-wave approximant.
pub struct DiffusionWaveProbe {
    u0: SpectralState,
    params: FluidParams,
    sol0: Vec<SpectralField>,
    pub residual: NormSeries,
    pub heat: NormSeries,
    pub compressible: NormSeries,
    pub wave_error: NormSeries,
}

impl DiffusionWaveProbe {
    pub fn new(u0: &SpectralState, params: &FluidParams) -> Result<Self> {
        Ok(Self {
            u0: u0.clone(),
            params: params.clone(),
            sol0: helmholtz_project(&u0.m)?.0,
            residual: NormSeries::empty("dw_residual_linf"),
            heat: NormSeries::empty("dw_heat_linf"),
            compressible: NormSeries::empty("dw_compressible_linf"),
            wave_error: NormSeries::empty("dw_wave_error_linf"),
        })
    }

    pub fn record(&mut self, u: &SpectralState) -> Result<()> {
        let t = u.time - self.u0.time;
        if !(t > 0.0) {
            return Ok(());
        }
        let mu = self.params.linear().mu;
        let heat = self.sol0.iter().map(|f| heat_semigroup(f, t, mu)).collect::<Result<Vec<_>>>()?;
        let mut resid: Vec<SpectralField> = vec![u.a.clone()];
        for (m, h) in u.m.iter().zip(&heat) {
            resid.push(m.sub(h)?);
        }
        let (_, comp) = helmholtz_project(&u.m)?;
        let mut compressible = vec![u.a.clone()];
        compressible.extend(comp);
        let wave = wave_diffusion_approx(&self.u0, t, &self.params)?;
        let werr = compressible.iter().zip(&wave).map(|(x, y)| x.sub(y)).collect::<Result<Vec<_>>>()?;
        self.residual.push(u.time, sup_norm(&resid)?)?;
        self.heat.push(u.time, sup_norm(&heat)?)?;
        self.compressible.push(u.time, sup_norm(&compressible)?)?;
        self.wave_error.push(u.time, sup_norm(&werr)?)?;
        Ok(())
    }
}

impl Observer for DiffusionWaveProbe {
    fn observe(&mut self, state: &SpectralState, _: &StepInfo) -> Result<()> {
        self.record(state)
    }
}

/// Residual series `||U(t) - G(t) U0||` (and the solution norm) of a stored trajectory.
pub fn linear_approx_residual(
    trajectory: &[SpectralState],
    u0: &SpectralState,
    params: &FluidParams,
    norm: &NormRequest,
) -> Result<(NormSeries, NormSeries)> {
    let mut probe = LinearResidualProbe::new(u0, params, norm.clone())?;
    for u in trajectory {
        if u.grid() != u0.grid() || u.time < u0.time {
            return Err(NskError::Series("trajectory does not start from the given initial data".into()));
        }
        probe.record(u)?;
    }
    Ok((probe.residual, probe.solution))
}

/// Sup-norm diffusion-wave series of a stored trajectory: `(residual, heat, compressible, wave_error)`.
pub fn diffusion_wave_residual(
    trajectory: &[SpectralState],
    u0: &SpectralState,
    params: &FluidParams,
) -> Result<[NormSeries; 4]> {
    let mut probe = DiffusionWaveProbe::new(u0, params)?;
    for u in trajectory {
        probe.record(u)?;
    }
    Ok([probe.residual, probe.heat, probe.compressible, probe.wave_error])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> NormSeries {
        let times: Vec<f64> = (1..=400).map(|i| 0.25 * i as f64).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        NormSeries::new("s", times, values).unwrap()
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_rate(&series(|t| 3.0 * t.powf(-0.75)), [5.0, 50.0], FitMode::Pointwise).unwrap();
        assert!((fit.exponent + 0.75).abs() < 1e-10);
        assert!((fit.amplitude - 3.0).abs() < 1e-9);
        let c = fit_rate(&series(|_| 2.0), [5.0, 50.0], FitMode::Pointwise).unwrap();
        assert!(c.exponent.abs() < 1e-12);
    }

    #[test]
    fn envelope_of_oscillation() {
        let s = series(|t| (2.0 + (5.0 * t).sin()) / t);
        let fit = fit_rate(&s, [5.0, 50.0], FitMode::Envelope).unwrap();
        assert!((fit.exponent + 1.0).abs() < 0.05, "{}", fit.exponent);
    }

    #[test]
    fn fit_errors() {
        let s = series(|t| 1.0 / t);
        assert!(fit_rate(&s, [5.0, 6.0], FitMode::Pointwise).is_err());
        let z = series(|t| if t > 10.0 { 0.0 } else { 1.0 });
        assert!(fit_rate(&z, [5.0, 50.0], FitMode::Pointwise).is_err());
        assert!(NormSeries::new("x", vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn exponents() {
        assert_eq!(theoretical_exponent(2, 2.0, 0.0).unwrap(), 0.5);
        assert_eq!(theoretical_exponent(3, 2.0, 1.0).unwrap(), 1.25);
        assert_eq!(theoretical_exponent(2, 1.0, 0.0).unwrap(), 0.0);
        assert!(theoretical_exponent(2, 4.0, 0.0).is_ok());
        let e = theoretical_exponent(2, 5.0, 0.0).unwrap_err().to_string();
        assert!(e.contains("2d/(d-1)"));
        assert!(theoretical_exponent(2, 2.0, 2.5).is_err());
        assert_eq!(diffusion_wave_exponent(2), 1.25);
        assert_eq!(diffusion_wave_exponent(3), 2.0);
        assert_eq!(kernel_exponent(2, 0, &[1, 0]), 1.25);
    }

    #[test]
    fn envelope_is_forward_max() {
        let s = NormSeries::new("e", vec![1.0, 1.5, 2.0, 3.0, 5.0], vec![1.0, 4.0, 2.0, 3.0, 0.5]).unwrap();
        assert_eq!(s.envelope(), vec![4.0, 4.0, 3.0, 3.0, 0.5]);
    }
}
