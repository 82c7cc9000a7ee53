//! Invariant suite behind `nsk verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::decay::{fit_rate, FitMode, NormRequest, NormSeries, FieldSel, LinearResidualProbe, DiffusionWaveProbe};
use crate::error::Result;
use crate::field::{Grid, SpectralField, SpectralState};
use crate::initial::{InitialData, MomentumPart};
use crate::integrator::{run_simulation, IntegratorConfig, Stepper};
use crate::linear::{eigenvalues, generator_matrix, green_matrix, helmholtz_project, GreenMatrixEval};
use crate::lp::{BesovSpec, DyadicPartition};
use crate::params::FluidParams;
use crate::snapshot;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

fn check(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed: value.is_finite() && value <= tolerance, value, tolerance, detail: detail.into() }
}

/// Random admissible parameters with `rho* = 1`.
pub fn random_params(rng: &mut ChaCha8Rng) -> FluidParams {
    let mu = rng.random_range(0.05..3.0);
    let lam = rng.random_range(-0.9 * mu..2.0);
    let kappa = rng.random_range(0.01..3.0);
    let gamma = rng.random_range(0.2..3.0);
    FluidParams::new(mu, lam, kappa, gamma)
}

fn random_xi(rng: &mut ChaCha8Rng, d: usize, rmax: f64) -> Vec<f64> {
    let r = rmax * rng.random::<f64>().max(1e-3);
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    v.iter_mut().for_each(|x| *x *= r / n);
    v
}

/// Largest relative characteristic-polynomial residual of both roots over `draws` samples.
pub fn eigen_residual(draws: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..draws {
        let p = random_params(&mut rng);
        let xi = random_xi(&mut rng, 2 + i % 2, 20.0);
        let c = p.linear();
        let r: f64 = xi.iter().map(|x| x * x).sum();
        let pair = eigenvalues(&p, &xi)?;
        for l in [pair.lambda_plus, pair.lambda_minus] {
            let terms = [l * l, l * (c.nu * r), Complex64::new(r * (c.gamma2 + c.kappa * r), 0.0)];
            let scale: f64 = terms.iter().map(|t| t.norm()).sum();
            worst = worst.max((terms[0] + terms[1] + terms[2]).norm() / scale);
        }
    }
    Ok(worst)
}

/// Frequency of `params` at which the two roots coincide, if any.
pub fn confluent_xi(params: &FluidParams) -> Option<f64> {
    let c = params.linear();
    let gap = c.nu * c.nu - 4.0 * c.kappa;
    (gap > 0.0).then(|| (4.0 * c.gamma2 / gap).sqrt())
}

/// Worst relative semigroup defect `|G(t+s) - G(t)G(s)| / max|G(t+s)|`, with
/// about a quarter of the draws placed within `1e-7` of a confluent frequency.
pub fn semigroup_defect(draws: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..draws {
        let p = random_params(&mut rng);
        let d = 2 + i % 2;
        let mut xi = random_xi(&mut rng, d, 6.0);
        if i % 4 == 0 {
            if let Some(r0) = confluent_xi(&p) {
                let r = r0 * (1.0 + rng.random_range(-1e-7..1e-7));
                let n = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                xi.iter_mut().for_each(|x| *x *= r / n);
            }
        }
        let t = rng.random_range(0.0..3.0);
        let s = rng.random_range(0.0..3.0);
        let whole = green_matrix(&p, t + s, &xi)?;
        let prod = green_matrix(&p, t, &xi)?.mul(&green_matrix(&p, s, &xi)?);
        worst = worst.max(whole.max_diff(&prod) / whole.max_abs().max(1e-300));
    }
    Ok(worst)
}

/// `exp(t A)` by classical RK4 on `Y' = A Y` with `h |A| <= 0.01`.
pub fn rk4_exponential(a: &GreenMatrixEval, t: f64) -> GreenMatrixEval {
    let n = a.size();
    let norm: f64 = (0..n).map(|i| (0..n).map(|j| a.get(i, j).norm()).sum::<f64>()).fold(0.0, f64::max);
    let steps = ((t * norm / 0.01).ceil() as usize).max(1);
    let h = t / steps as f64;
    let mut y = GreenMatrixEval::identity(n);
    let scale = |m: &GreenMatrixEval, s: f64| GreenMatrixEval::from_entries(n, m.entries().iter().map(|z| z * s).collect());
    let add = |x: &GreenMatrixEval, y: &GreenMatrixEval| {
        GreenMatrixEval::from_entries(n, x.entries().iter().zip(y.entries()).map(|(p, q)| p + q).collect())
    };
    for _ in 0..steps {
        let k1 = a.mul(&y);
        let k2 = a.mul(&add(&y, &scale(&k1, 0.5 * h)));
        let k3 = a.mul(&add(&y, &scale(&k2, 0.5 * h)));
        let k4 = a.mul(&add(&y, &scale(&k3, h)));
        let incr = add(&add(&k1, &scale(&k2, 2.0)), &add(&scale(&k3, 2.0), &k4));
        y = add(&y, &scale(&incr, h / 6.0));
    }
    y
}

fn green_vs_ode(draws: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..draws {
        let p = random_params(&mut rng);
        let xi = random_xi(&mut rng, 2 + i % 2, 1.5);
        let t = rng.random_range(0.1..2.0);
        let g = green_matrix(&p, t, &xi)?;
        let o = rk4_exponential(&generator_matrix(&p, &xi), t);
        worst = worst.max(g.max_diff(&o) / g.max_abs());
    }
    Ok(worst)
}

/// Random Hermitian field with coefficients in `2^{j-1} <= |xi| <= 2^{j+1}`.
pub fn shell_field(grid: &Grid, j: i32, rng: &mut ChaCha8Rng) -> SpectralField {
    let (lo, hi) = (2f64.powi(j - 1), 2f64.powi(j + 1));
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in 0..grid.len() {
        let r = grid.xi_norm2(idx).sqrt();
        let neg = grid.negated_index(idx);
        if neg < idx || grid.is_nyquist(idx) || r < lo || r > hi {
            continue;
        }
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if neg == idx {
            c[idx] = Complex64::new(z.re, 0.0);
        } else {
            c[idx] = z;
            c[neg] = z.conj();
        }
    }
    SpectralField::from_coeffs(*grid, c, true).expect("grid-sized")
}

fn random_state(grid: &Grid, seed: u64, amplitude: f64, part: MomentumPart) -> Result<SpectralState> {
    InitialData::BandLimited { seed, amplitude, k0: 4.0 * grid.dk(), density: true, momentum_part: part }.build(grid, None)
}

/// Runs the suite on small grids in the dimension and parameters of `cfg`.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let seed = cfg.seed.unwrap_or(0);
    let params = &cfg.params;
    let d = cfg.grid.d;
    let grid = Grid::new(d, if d == 2 { 32 } else { 16 }, 4.0 * std::f64::consts::PI)?;
    let partition = DyadicPartition::new(&grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    out.push(check("eigen_residual", eigen_residual(10_000, seed)?, 1e-10, "relative characteristic residual of both roots"));

    let mut id: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let xi = random_xi(&mut rng, d, 10.0);
        id = id.max(green_matrix(&p, 0.0, &xi)?.max_diff(&GreenMatrixEval::identity(d + 1)));
    }
    out.push(check("green_identity", id, 0.0, "G(0, xi) = Id exactly"));
    out.push(check("green_semigroup", semigroup_defect(1000, seed)?, 1e-10, "G(t+s) = G(t)G(s), near-confluent draws included"));
    out.push(check("green_vs_ode", green_vs_ode(50, seed)?, 1e-8, "G(t) against RK4 integration of the generator"));

    let mut pu: f64 = 0.0;
    for idx in 1..grid.len() {
        let s: f64 = partition.shells().map(|j| partition.weight(j, idx)).sum();
        pu = pu.max((s - 1.0).abs());
    }
    out.push(check("partition_of_unity", pu, 1e-12, "sum of shell weights off the zero mode"));

    let mut pl: f64 = 0.0;
    for i in 0..20 {
        let f = random_state(&grid, seed + i, 1.0, MomentumPart::Full)?.a;
        let s = rng.random_range(-1.0..2.0);
        let fb = partition.norm(&f, &BesovSpec::fourier(s, 2.0, 1.0))?;
        let b = partition.norm(&f, &BesovSpec::besov(s, 2.0, 1.0))?;
        pl = pl.max((fb - b).abs() / fb);
    }
    out.push(check("plancherel", pl, 1e-10, "Fourier-Besov and Besov norms at p = 2"));

    let mut bern: f64 = 0.0;
    for _ in 0..50 {
        let j = rng.random_range(partition.j_min() + 1..partition.j_max());
        let f = shell_field(&grid, j, &mut rng);
        if f.max_abs() == 0.0 {
            continue;
        }
        let r = partition.bernstein_audit(&f, j, 1.0)?;
        for v in [r.p_one, r.p_inf] {
            bern = bern.max(v.max(1.0 / v));
        }
    }
    out.push(check("bernstein", bern, 2.0, "max of ratio and its inverse, both endpoint exponents"));

    let u = random_state(&grid, seed, 1.0, MomentumPart::Full)?;
    let (sol, comp) = helmholtz_project(&u.m)?;
    let mut orth: f64 = 0.0;
    for idx in 0..grid.len() {
        let dot: Complex64 = (0..d).map(|k| sol[k].coeffs()[idx].conj() * comp[k].coeffs()[idx]).sum();
        let sum: f64 = (0..d).map(|k| (sol[k].coeffs()[idx] + comp[k].coeffs()[idx] - u.m[k].coeffs()[idx]).norm()).sum();
        orth = orth.max(dot.norm()).max(sum);
    }
    out.push(check("helmholtz", orth, 1e-14, "orthogonality and reassembly per mode"));

    let u0 = random_state(&grid, seed + 1, 0.02, MomentumPart::Full)?;
    let stepper = Stepper::new(&grid, params, &IntegratorConfig::new(0.05, 1.0))?;
    let mut u = u0.clone();
    let mut herm: f64 = 0.0;
    for _ in 0..20 {
        u = stepper.step(&u)?;
        herm = herm.max(u.components().map(|c| c.hermitian_defect()).fold(0.0, f64::max));
    }
    let drift = u.means().iter().zip(u0.means()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    out.push(check("hermitian_symmetry", herm, 1e-12, "coefficient mirror defect after 20 nonlinear steps"));
    out.push(check("mean_conservation", drift, 1e-12, "drift of the means after 20 nonlinear steps"));

    let mut lin_cfg = IntegratorConfig::new(0.25, 5.0);
    lin_cfg.linear_only = true;
    lin_cfg.snapshot_cadence = 2;
    let req = NormRequest::FourierBesov { field: FieldSel::State, s: 0.0, p: crate::lp::Index(2.0), sigma: crate::lp::Index(1.0) };
    let mut probe = LinearResidualProbe::new(&u0, params, req)?;
    run_simulation(&u0, params, &lin_cfg, 2.0, &mut [&mut probe])?;
    let res = probe.residual.values.iter().zip(&probe.solution.values).map(|(r, s)| r / s).fold(0.0, f64::max);
    out.push(check("linear_residual_zero", res, 1e-11, "linear-only run against G(t) U0, relative"));

    let mut sol0 = random_state(&grid, seed + 2, 0.05, MomentumPart::Solenoidal)?;
    sol0.a = SpectralField::zeros(grid);
    let mut dw = DiffusionWaveProbe::new(&sol0, params)?;
    run_simulation(&sol0, params, &lin_cfg, 2.0, &mut [&mut dw])?;
    let scale = crate::decay::sup_norm(&sol0.m)?;
    let dwmax = dw.residual.values.iter().chain(&dw.compressible.values).fold(0.0f64, |m, v| m.max(*v)) / scale;
    out.push(check("solenoidal_heat_flow", dwmax, 1e-12, "solenoidal data follow the heat flow, compressible part stays zero"));

    let snap = snapshot::decode(&snapshot::encode(&u, params))?;
    out.push(check("snapshot_round_trip", if snap.state == u { 0.0 } else { 1.0 }, 0.0, "encode then decode is exact"));

    let times: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let values: Vec<f64> = times.iter().map(|t| 3.0 * t.powf(-0.75)).collect();
    let fit = fit_rate(&NormSeries::new("power", times, values)?, [1.0, 20.0], FitMode::Pointwise)?;
    out.push(check("fit_exact_power_law", (fit.exponent + 0.75).abs(), 1e-8, "slope of 3 t^-3/4"));

    Ok(out)
}
