//! Acceptance criteria 1-11, one PASS/FAIL line each.
//!
//! Run alone with `cargo test -p nsk-core --test acceptance`; a criterion
//! number as argument runs just that one.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nsk::decay::{
    fit_rate, kernel_decay_probe, DiffusionWaveProbe, FieldSel, FitMode, LinearResidualProbe, NormRequest,
    NormSeries,
};
use nsk::field::{Grid, SpectralField, SpectralState};
use nsk::initial::{Bump, InitialData, MomentumPart};
use nsk::integrator::{
    initial_norm, picard_iterate, run_linear, run_simulation, IntegratorConfig, Observer, StepInfo,
    DEFAULT_SMALLNESS_THRESHOLD,
};
use nsk::linear::{eigenvalues, green_matrix, GreenMatrixEval};
use nsk::lp::{BesovSpec, DyadicPartition, Index};
use nsk::verify::{confluent_xi, random_params, shell_field};
use nsk::{FluidParams, Result};

// pinned tolerances
const EIGEN_TOL: f64 = 1e-10;
const EIGEN_BUDGET_S: f64 = 1.0;
const SEMIGROUP_TOL: f64 = 1e-10;
const EXPM_TOL: f64 = 1e-8;
const GREEN_BUDGET_S: f64 = 10.0;
const PLANCHEREL_TOL: f64 = 1e-10;
const BERNSTEIN_RANGE: (f64, f64) = (0.5, 2.0);
const KERNEL_TOL: [f64; 2] = [0.10, 0.12];
const LINEAR_DECAY_TOL: f64 = 0.1;
const HEAT_TOL: f64 = 0.1;
const COMPRESSIBLE_MAX: f64 = -1.1;
const ORDERING_SLACK: f64 = 0.05;
const MEAN_DRIFT_TOL: f64 = 1e-11;
const MIN_DENSITY: f64 = 0.5;
const X_GROWTH_MAX: f64 = 2.0;
const ORDER_RANGE: (f64, f64) = (1.8, 2.2);
const PICARD_RATIO_MAX: f64 = 0.5;
const PICARD_TOL: f64 = 1e-9;
const GAP_D3: (f64, f64) = (0.5, 0.15);
const GAP_D2: (f64, f64) = (0.35, 0.6);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

/// Gaussian bumps given as offsets from the box center.
fn bumps(grid: &Grid, amplitude: f64, width: f64, spec: &[(&[f64], f64, &[f64])]) -> Result<SpectralState> {
    let l = grid.box_len();
    let data = InitialData::Gaussian {
        bumps: spec
            .iter()
            .map(|(off, density, momentum)| Bump {
                center: off.iter().map(|o| 0.5 + o / l).collect(),
                width,
                density: *density,
                momentum: momentum.to_vec(),
            })
            .collect(),
        amplitude,
        momentum_part: MomentumPart::Full,
    };
    data.build(grid, None)
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

fn c1_eigen_identity() -> Result<Verdict> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..10_000 {
        let mu = rng.random_range(0.05..3.0);
        let lam = rng.random_range(-0.9 * mu..2.0);
        let kappa = rng.random_range(0.01..3.0);
        let gamma: f64 = rng.random_range(0.2..3.0);
        let params = FluidParams::new(mu, lam, kappa, gamma);
        let d = 2 + i % 2;
        let xi: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let r: f64 = xi.iter().map(|x| x * x).sum();
        let nu = lam + 2.0 * mu;
        let pair = eigenvalues(&params, &xi)?;
        for l in [pair.lambda_plus, pair.lambda_minus] {
            let terms = [l * l, l * (nu * r), Complex64::new(r * (gamma * gamma + kappa * r), 0.0)];
            let scale: f64 = terms.iter().map(|t| t.norm()).sum();
            worst = worst.max((terms[0] + terms[1] + terms[2]).norm() / scale);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst < EIGEN_TOL && secs < EIGEN_BUDGET_S,
        format!("max relative residual {worst:.2e} (< {EIGEN_TOL:.0e}), {secs:.3} s"),
    )
}

fn to_nalgebra(g: &GreenMatrixEval) -> DMatrix<Complex64> {
    let n = g.size();
    DMatrix::from_fn(n, n, |i, j| g.get(i, j))
}

/// Generator written out from the linearized equations, independent of the library.
fn generator(params: &FluidParams, xi: &[f64]) -> DMatrix<Complex64> {
    let d = xi.len();
    let r: f64 = xi.iter().map(|x| x * x).sum();
    let i = Complex64::new(0.0, 1.0);
    let gamma2 = params.pressure.derivative(1.0);
    let mut a = DMatrix::zeros(d + 1, d + 1);
    for j in 0..d {
        a[(0, 1 + j)] = -i * xi[j];
        a[(1 + j, 0)] = -i * xi[j] * (gamma2 + params.kappa * r);
        for k in 0..d {
            let visc = if j == k { params.mu * r } else { 0.0 } + (params.lam + params.mu) * xi[j] * xi[k];
            a[(1 + j, 1 + k)] = Complex64::new(-visc, 0.0);
        }
    }
    a
}

fn c2_green_matrix() -> Result<Verdict> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut id, mut semi, mut expm): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..1000 {
        let params = random_params(&mut rng);
        let d = 2 + i % 2;
        let mut xi: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        if i % 4 == 0 {
            if let Some(r0) = confluent_xi(&params) {
                let r = r0 * (1.0 + rng.random_range(-1e-7..1e-7));
                let n = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                xi.iter_mut().for_each(|x| *x *= r / n);
            }
        }
        let g0 = green_matrix(&params, 0.0, &xi)?;
        id = id.max(g0.max_diff(&GreenMatrixEval::identity(d + 1)));
        let t = rng.random_range(0.0..2.0);
        let s = rng.random_range(0.0..2.0);
        let whole = green_matrix(&params, t + s, &xi)?;
        let prod = green_matrix(&params, t, &xi)?.mul(&green_matrix(&params, s, &xi)?);
        semi = semi.max(whole.max_diff(&prod) / whole.max_abs());
        let oracle = (generator(&params, &xi) * Complex64::new(t, 0.0)).exp();
        let ours = to_nalgebra(&green_matrix(&params, t, &xi)?);
        let scale = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        expm = expm.max((ours - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        id == 0.0 && semi < SEMIGROUP_TOL && expm < EXPM_TOL && secs < GREEN_BUDGET_S,
        format!("|G(0)-I| = {id:.1e}, semigroup {semi:.2e}, vs expm {expm:.2e}, {secs:.2} s"),
    )
}

fn random_field(grid: &Grid, seed: u64) -> Result<SpectralField> {
    let data = InitialData::BandLimited { seed, amplitude: 1.0, k0: 3.0, density: true, momentum_part: MomentumPart::Full };
    Ok(data.build(grid, None)?.a)
}

fn c3_plancherel() -> Result<Verdict> {
    let grid = Grid::new(2, 64, 2.0 * std::f64::consts::PI * 4.0)?;
    let part = DyadicPartition::new(&grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let f = random_field(&grid, 100 + i)?;
        let s = rng.random_range(-1.0..2.0);
        let sigma = [1.0, 2.0, f64::INFINITY][i as usize % 3];
        let fb = part.norm(&f, &BesovSpec::fourier(s, 2.0, sigma))?;
        let b = part.norm(&f, &BesovSpec::besov(s, 2.0, sigma))?;
        worst = worst.max((fb - b).abs() / fb);
    }
    verdict(worst < PLANCHEREL_TOL, format!("max relative gap {worst:.2e} over 50 fields"))
}

fn c4_bernstein() -> Result<Verdict> {
    let grid = Grid::new(2, 64, 16.0)?;
    let part = DyadicPartition::new(&grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut cases = 0;
    while cases < 100 {
        let j = rng.random_range(part.j_min() + 1..part.j_max());
        let f = shell_field(&grid, j, &mut rng);
        if f.max_abs() == 0.0 {
            continue;
        }
        cases += 1;
        // direct: l^inf (p = 1) and l^1 (p = inf) of the coefficients
        let c = f.coeffs();
        let w = |i: usize| grid.xi_norm2(i).sqrt();
        let sup = |g: &dyn Fn(usize) -> f64| (0..grid.len()).map(|i| g(i) * c[i].norm()).fold(0.0, f64::max);
        let sum = |g: &dyn Fn(usize) -> f64| (0..grid.len()).map(|i| g(i) * c[i].norm()).sum::<f64>();
        let s = 2f64.powi(j);
        let direct = [sup(&w) / (s * sup(&|_| 1.0)), sum(&w) / (s * sum(&|_| 1.0))];
        let audit = part.bernstein_audit(&f, j, 1.0)?;
        assert!((audit.p_one - direct[0]).abs() < 1e-12 && (audit.p_inf - direct[1]).abs() < 1e-12);
        for r in direct {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    verdict(
        lo >= BERNSTEIN_RANGE.0 && hi <= BERNSTEIN_RANGE.1,
        format!("ratios in [{lo:.3}, {hi:.3}] over 100 shell-supported fields"),
    )
}

fn c5_kernel_decay() -> Result<Verdict> {
    let grid = Grid::new(2, 1024, 400.0)?;
    let params = FluidParams::new(0.5, 0.0, 0.1, 2.0);
    let times = geomspace(5.0, 80.0, 16);
    let (_, f0) = kernel_decay_probe(&grid, &params, &times, 0, &[0, 0])?;
    let (_, f1) = kernel_decay_probe(&grid, &params, &times, 0, &[1, 0])?;
    let ok0 = (f0.exponent + 0.75).abs() <= KERNEL_TOL[0];
    let ok1 = (f1.exponent + 1.25).abs() <= KERNEL_TOL[1];
    verdict(
        ok0 && ok1,
        format!(
            "exponents {:.3} (target -0.75 +- {}) and {:.3} (target -1.25 +- {})",
            f0.exponent, KERNEL_TOL[0], f1.exponent, KERNEL_TOL[1]
        ),
    )
}

/// Shared linear run behind criteria 6 and 7.
fn linear_gaussian_run() -> Result<(NormSeries, DiffusionWaveProbe)> {
    let grid = Grid::new(2, 1024, 400.0)?;
    let params = FluidParams::new(1.0, -1.0, 0.1, 2.0);
    let u0 = bumps(
        &grid,
        0.01,
        0.8,
        &[(&[1.0, 0.0], 1.0, &[]), (&[0.0, 1.0], 0.0, &[1.0, 0.0]), (&[-1.0, 0.5], 0.0, &[0.0, -0.7])],
    )?;
    let part = DyadicPartition::new(&grid)?;
    let norm = NormRequest::FourierBesov { field: FieldSel::M, s: 0.0, p: Index(2.0), sigma: Index(1.0) };
    let mut series = NormSeries::empty("m_b0_2_1");
    let mut dw = DiffusionWaveProbe::new(&u0, &params)?;
    let mut log = |u: &SpectralState, _: &StepInfo| -> Result<()> { series.push(u.time, norm.evaluate(u, &part)?) };
    run_linear(&u0, &params, &geomspace(2.0, 100.0, 60), 2.0, &mut [&mut log, &mut dw])?;
    Ok((series, dw))
}

fn c6_linear_besov_decay(series: &NormSeries) -> Result<Verdict> {
    let fit = fit_rate(series, [5.0, 50.0], FitMode::Pointwise)?;
    verdict(
        (fit.exponent + 0.5).abs() <= LINEAR_DECAY_TOL,
        format!("exponent {:.3} (target -0.5 +- {LINEAR_DECAY_TOL})", fit.exponent),
    )
}

fn c7_diffusion_wave(dw: &DiffusionWaveProbe) -> Result<Verdict> {
    let heat = fit_rate(&dw.heat, [5.0, 50.0], FitMode::Envelope)?.exponent;
    let comp = fit_rate(&dw.compressible, [5.0, 50.0], FitMode::Envelope)?.exponent;
    let ok = (heat + 1.0).abs() <= HEAT_TOL && comp <= COMPRESSIBLE_MAX && comp < heat + ORDERING_SLACK;
    verdict(ok, format!("solenoidal {heat:.3} (target -1 +- {HEAT_TOL}), compressible {comp:.3} (<= {COMPRESSIBLE_MAX})"))
}

fn c8_nonlinear_small_data() -> Result<Verdict> {
    let grid = Grid::new(2, 256, 64.0)?;
    let params = FluidParams::new(2.0, 0.0, 4.0, 2.0);
    let u0 = bumps(&grid, 0.05, 2.0, &[(&[0.0, 0.0], 0.0, &[1.0, 0.0]), (&[3.0, -2.0], 0.0, &[-0.4, 0.8])])?;
    let part = DyadicPartition::new(&grid)?;
    let x0 = initial_norm(&part, &u0, 2.0)?;
    let mut cfg = IntegratorConfig::new(0.05, 100.0);
    cfg.snapshot_cadence = 50;
    let means0 = u0.means();
    let mut drift: f64 = 0.0;
    let mut min_rho = f64::INFINITY;
    let mut watch = |u: &SpectralState, info: &StepInfo| -> Result<()> {
        for (a, b) in u.means().iter().zip(&means0) {
            drift = drift.max((a - b).norm());
        }
        min_rho = min_rho.min(info.min_density);
        Ok(())
    };
    let out = run_simulation(&u0, &params, &cfg, 2.0, &mut [&mut watch])?;
    let ok = out.completed()
        && out.steps_done == 2000
        && x0 <= DEFAULT_SMALLNESS_THRESHOLD
        && drift < MEAN_DRIFT_TOL
        && min_rho > MIN_DENSITY
        && out.x_max_ratio <= X_GROWTH_MAX;
    verdict(
        ok,
        format!(
            "X_2,0 = {x0:.3e} (gate {DEFAULT_SMALLNESS_THRESHOLD}), {} steps, mean drift {drift:.1e}, min rho/rho* {min_rho:.4}, sup X_2(t)/X_2(0) = {:.3}",
            out.steps_done, out.x_max_ratio
        ),
    )
}

fn smooth_small_state(grid: &Grid, amplitude: f64) -> Result<SpectralState> {
    bumps(grid, amplitude, 1.5, &[(&[0.0, 0.0], 0.5, &[1.0, 0.0]), (&[1.0, -0.5], 0.0, &[0.0, -0.6])])
}

fn state_distance(a: &SpectralState, b: &SpectralState) -> f64 {
    a.components()
        .zip(b.components())
        .map(|(x, y)| x.coeffs().iter().zip(y.coeffs()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

fn c9_integrator_order() -> Result<Verdict> {
    let grid = Grid::new(2, 64, 16.0)?;
    let params = FluidParams::new(1.0, 0.0, 1.0, 1.0);
    let u0 = smooth_small_state(&grid, 0.2)?;
    let dt = 0.1;
    let finals = (0..4)
        .map(|k| {
            let cfg = IntegratorConfig::new(dt / 2f64.powi(k), 2.0);
            Ok(run_simulation(&u0, &params, &cfg, 2.0, &mut [])?.last)
        })
        .collect::<Result<Vec<_>>>()?;
    // Richardson: successive differences shrink by 2^order
    let diffs: Vec<f64> = finals.windows(2).map(|w| state_distance(&w[0], &w[1])).collect();
    let orders: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = orders.iter().all(|o| *o >= ORDER_RANGE.0 && *o <= ORDER_RANGE.1);
    verdict(ok, format!("observed orders {:.3} and {:.3} (dt = {dt} .. {})", orders[0], orders[1], dt / 8.0))
}

fn c10_picard() -> Result<Verdict> {
    let grid = Grid::new(2, 64, 32.0)?;
    let params = FluidParams::new(1.0, 0.0, 1.0, 1.0);
    let u0 = smooth_small_state(&grid, 0.05)?;
    let (horizon, steps) = (2.0, 40);
    let rep = picard_iterate(&u0, &params, horizon, steps, PICARD_TOL, 30, DEFAULT_SMALLNESS_THRESHOLD, 2.0)?;
    let ratio3 = rep.ratios.get(1).copied().unwrap_or(f64::INFINITY);
    let etd = run_simulation(&u0, &params, &IntegratorConfig::new(horizon / steps as f64, horizon), 2.0, &mut [])?.last;
    let picard = rep.final_state();
    let rel = state_distance(picard, &etd) / state_distance(picard, &SpectralState::zeros(grid));
    let ok = rep.converged && ratio3 < PICARD_RATIO_MAX && rel < 10.0 * PICARD_TOL.max(scheme_gap_floor());
    verdict(
        ok,
        format!(
            "ratios {:?}, converged in {} iterations, |Picard - ETD2| / |U| = {rel:.2e}",
            rep.ratios.iter().take(4).map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            rep.iterations
        ),
    )
}

/// Picard and ETD2 discretize the Duhamel integral differently; their gap is a
/// second-order discretization error, not an iteration error.
fn scheme_gap_floor() -> f64 {
    1e-6
}

/// Residual and solution norm series of a nonlinear run.
struct GapRun {
    sol: NormSeries,
    res: NormSeries,
    min_a: f64,
}

fn gap_run(d: usize, n: usize, l: f64, width: f64, dt: f64) -> Result<GapRun> {
    let grid = Grid::new(d, n, l)?;
    let params = FluidParams::new(1.0, 0.0, 1.0, 1.0);
    let mut spec: Vec<(&[f64], f64, &[f64])> = Vec::new();
    let (z, x1, y1): (&[f64], &[f64], &[f64]) =
        if d == 2 { (&[0.0, 0.0], &[0.5, 0.0], &[0.0, -0.7]) } else { (&[0.0, 0.0, 0.0], &[0.5, 0.0, 0.0], &[0.0, -0.7, 0.0]) };
    let (e1, e2, e3): (&[f64], &[f64], &[f64]) =
        if d == 2 { (&[1.0, 0.0], &[0.0, -0.6], &[]) } else { (&[1.0, 0.0, 0.0], &[0.0, -0.6, 0.0], &[0.0, 0.0, 0.3]) };
    spec.push((z, 0.5, e3));
    spec.push((x1, 0.0, e1));
    spec.push((y1, 0.0, e2));
    let u0 = bumps(&grid, 0.05, width, &spec)?;
    let norm = NormRequest::FourierBesov { field: FieldSel::State, s: 0.0, p: Index(2.0), sigma: Index(1.0) };
    let mut probe = LinearResidualProbe::new(&u0, &params, norm)?;
    let mut min_a = f64::INFINITY;
    let mut gate = |u: &SpectralState, info: &StepInfo| -> Result<()> {
        min_a = min_a.min(info.min_density - 1.0);
        if u.time >= 2.0 - 1e-9 {
            probe.observe(u, info)?;
        }
        Ok(())
    };
    let mut cfg = IntegratorConfig::new(dt, 50.0);
    cfg.snapshot_cadence = (1.0 / dt).round() as usize;
    let out = run_simulation(&u0, &params, &cfg, 2.0, &mut [&mut gate])?;
    if let Some(e) = out.failure {
        return Err(e);
    }
    Ok(GapRun { sol: probe.solution, res: probe.residual, min_a })
}

fn gap_of(run: &GapRun) -> Result<(f64, f64, f64)> {
    let s = fit_rate(&run.sol, [5.0, 50.0], FitMode::Pointwise)?.exponent;
    let r = fit_rate(&run.res, [5.0, 50.0], FitMode::Pointwise)?.exponent;
    Ok((s, r, s - r))
}

fn c11_linear_approximation() -> Result<Verdict> {
    let d2 = gap_run(2, 512, 200.0, 0.8, 0.1)?;
    let (s2, r2, g2) = gap_of(&d2)?;
    let d3 = gap_run(3, 128, 96.0, 1.2, 0.25)?;
    let (s3, r3, g3) = gap_of(&d3)?;
    let ok3 = (g3 - GAP_D3.0).abs() <= GAP_D3.1;
    let ok2 = g2 >= GAP_D2.0 && g2 <= GAP_D2.1;
    verdict(
        ok2 && ok3,
        format!(
            "d=3 gap {g3:.3} (sol {s3:.3}, res {r3:.3}; target {} +- {}), d=2 gap {g2:.3} (sol {s2:.3}, res {r2:.3}; target [{}, {}]), min a {:.1e} / {:.1e}",
            GAP_D3.0, GAP_D3.1, GAP_D2.0, GAP_D2.1, d3.min_a, d2.min_a
        ),
    )
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| only.is_empty() || only.contains(&k);
    let mut results: Vec<(usize, Result<Verdict>, f64)> = Vec::new();
    let mut run = |k: usize, f: &mut dyn FnMut() -> Result<Verdict>| {
        if wanted(k) {
            let t = Instant::now();
            let v = f();
            let secs = t.elapsed().as_secs_f64();
            match &v {
                Ok(v) => println!("{} criterion {k}: {} [{secs:.1} s]", if v.pass { "PASS" } else { "FAIL" }, v.detail),
                Err(e) => println!("FAIL criterion {k}: error {e} [{secs:.1} s]"),
            }
            results.push((k, v, secs));
        }
    };
    run(1, &mut c1_eigen_identity);
    run(2, &mut c2_green_matrix);
    run(3, &mut c3_plancherel);
    run(4, &mut c4_bernstein);
    run(5, &mut c5_kernel_decay);
    if wanted(6) || wanted(7) {
        match linear_gaussian_run() {
            Ok((series, dw)) => {
                run(6, &mut || c6_linear_besov_decay(&series));
                run(7, &mut || c7_diffusion_wave(&dw));
            }
            Err(e) => {
                let msg = e.to_string();
                run(6, &mut || Err(nsk::NskError::Series(msg.clone())));
                run(7, &mut || Err(nsk::NskError::Series(msg.clone())));
            }
        }
    }
    run(8, &mut c8_nonlinear_small_data);
    run(9, &mut c9_integrator_order);
    run(10, &mut c10_picard);
    run(11, &mut c11_linear_approximation);
    let failed: Vec<usize> =
        results.iter().filter(|(_, v, _)| !matches!(v, Ok(Verdict { pass: true, .. }))).map(|(k, _, _)| *k).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failing: {failed:?}");
        std::process::exit(1);
    }
}
