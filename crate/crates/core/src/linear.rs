//! Exact Fourier-side solution of the linearized system
//!
//! ```text
//! a_t + div m = 0
//! m_t - L m + gamma^2 grad a - kappa grad lap a = 0,   L m = mu lap m + (lam + mu) grad div m
//! ```
//!
//! Per mode the compressible pair `(a^, xi . m^)` obeys a 2x2 system with
//! eigenvalues `lambda_+-`, and the solenoidal part of `m^` is damped by
//! `e^{-mu |xi|^2 t}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};
use crate::field::{par_modes, Grid, SpectralField, SpectralState};
use crate::lp::smooth_step;
use crate::params::{FluidParams, LinearCoeffs};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Roots are treated as repeated when `|l+ - l-| <= CONFLUENT_TOL (|l+| + |l-|)`.
pub const CONFLUENT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

impl EigenPair {
    pub fn is_confluent(&self) -> bool {
        let (s, q) = (self.lambda_plus, self.lambda_minus);
        (s - q).norm() <= CONFLUENT_TOL * (s.norm() + q.norm())
    }
}

/// Roots of `l^2 + nu r l + r (gamma^2 + kappa r) = 0` for `r = |xi|^2`.
pub(crate) fn roots(c: &LinearCoeffs, r: f64) -> EigenPair {
    let b = c.nu * r;
    let prod = r * (c.gamma2 + c.kappa * r);
    let disc = r * (r * (c.nu * c.nu - 4.0 * c.kappa) - 4.0 * c.gamma2);
    if disc >= 0.0 {
        let big = -0.5 * (b + disc.sqrt());
        EigenPair { lambda_plus: Complex64::new(big, 0.0), lambda_minus: Complex64::new(prod / big, 0.0) }
    } else {
        let im = 0.5 * (-disc).sqrt();
        EigenPair {
            lambda_plus: Complex64::new(-0.5 * b, -im),
            lambda_minus: Complex64::new(-0.5 * b, im),
        }
    }
}

pub fn eigenvalues(params: &FluidParams, xi: &[f64]) -> Result<EigenPair> {
    let r: f64 = xi.iter().map(|x| x * x).sum();
    if r == 0.0 {
        return Err(NskError::ZeroFrequency);
    }
    Ok(roots(&params.linear(), r))
}

/// Squared modulus `|xi_c|^2` where the discriminant changes sign, or
/// `gamma^2 / kappa` when the roots are complex at every frequency.
pub fn transition_frequency2(params: &FluidParams) -> f64 {
    let c = params.linear();
    let gap = c.nu * c.nu - 4.0 * c.kappa;
    if gap > 0.0 {
        4.0 * c.gamma2 / gap
    } else {
        c.gamma2 / c.kappa
    }
}

pub fn transition_frequency(params: &FluidParams) -> f64 {
    transition_frequency2(params).sqrt()
}

/// `(e^z - 1) / z` without cancellation near 0.
fn phi1(z: Complex64) -> Complex64 {
    if z == ZERO {
        return Complex64::new(1.0, 0.0);
    }
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    let num = Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin());
    num / z
}

/// `E(t) = (e^{l+ t} - e^{l- t}) / (l+ - l-)`.
fn divided_exp(ep: &EigenPair, t: f64) -> Complex64 {
    let (s, q) = (ep.lambda_plus, ep.lambda_minus);
    if ep.is_confluent() {
        let z = 0.5 * (s - q) * t;
        (0.5 * (s + q) * t).exp() * t * (1.0 + z * z / 6.0)
    } else {
        (q * t).exp() * t * phi1((s - q) * t)
    }
}

/// The real scalar factors of `G(t, xi)` at one `|xi|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeFactors {
    /// `G^{11}`
    pub g11: f64,
    /// `E(t)`; `G^{12} = -i xi^T E`, `G^{21} = -i xi (gamma^2 + kappa |xi|^2) E`
    pub e: f64,
    /// compressible block of `G^{22}`
    pub gc: f64,
    /// solenoidal block `e^{-mu |xi|^2 t}`
    pub h: f64,
}

impl ModeFactors {
    pub const IDENTITY: ModeFactors = ModeFactors { g11: 1.0, e: 0.0, gc: 1.0, h: 1.0 };
}

pub(crate) fn mode_factors_coeffs(c: &LinearCoeffs, r: f64, t: f64) -> ModeFactors {
    if r == 0.0 {
        return ModeFactors::IDENTITY;
    }
    let ep = roots(c, r);
    let (s, q) = (ep.lambda_plus, ep.lambda_minus);
    let e = divided_exp(&ep, t);
    let g11 = (q * t).exp() - q * e;
    let gc = (s * t).exp() + q * e;
    ModeFactors { g11: g11.re, e: e.re, gc: gc.re, h: (-c.mu * r * t).exp() }
}

pub fn mode_factors(params: &FluidParams, xi_norm2: f64, t: f64) -> ModeFactors {
    mode_factors_coeffs(&params.linear(), xi_norm2, t)
}

/// `d^k/dt^k E(t)` for `k <= 3`.
pub(crate) fn divided_exp_derivative(ep: &EigenPair, t: f64, k: u32) -> f64 {
    let (s, q) = (ep.lambda_plus, ep.lambda_minus);
    let e = divided_exp(ep, t);
    if k == 0 {
        return e.re;
    }
    let mut head = ZERO;
    for i in 0..k {
        head += s.powu(i) * q.powu(k - 1 - i);
    }
    (head * (s * t).exp() + q.powu(k) * e).re
}

/// Dense per-mode matrix in `(a, m_1, .., m_d)` order, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenMatrixEval {
    size: usize,
    entries: Vec<Complex64>,
}

impl GreenMatrixEval {
    pub fn identity(size: usize) -> Self {
        let mut entries = vec![ZERO; size * size];
        for i in 0..size {
            entries[i * size + i] = Complex64::new(1.0, 0.0);
        }
        Self { size, entries }
    }

    pub fn from_entries(size: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), size * size);
        Self { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn mul(&self, other: &GreenMatrixEval) -> GreenMatrixEval {
        let n = self.size;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        GreenMatrixEval { size: n, entries: out }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.size).map(|i| (0..self.size).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    /// Largest entrywise difference.
    pub fn max_diff(&self, other: &GreenMatrixEval) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

fn assemble(c: &LinearCoeffs, xi: &[f64], f: &ModeFactors) -> GreenMatrixEval {
    let d = xi.len();
    let n = d + 1;
    let r: f64 = xi.iter().map(|x| x * x).sum();
    if r == 0.0 {
        return GreenMatrixEval::identity(n);
    }
    let mut g = vec![ZERO; n * n];
    g[0] = Complex64::new(f.g11, 0.0);
    let coupling = (c.gamma2 + c.kappa * r) * f.e;
    for j in 0..d {
        g[1 + j] = -I * xi[j] * f.e;
        g[(1 + j) * n] = -I * xi[j] * coupling;
        for k in 0..d {
            let proj = xi[j] * xi[k] / r;
            let delta = if j == k { 1.0 } else { 0.0 };
            g[(1 + j) * n + 1 + k] = Complex64::new(f.gc * proj + f.h * (delta - proj), 0.0);
        }
    }
    GreenMatrixEval { size: n, entries: g }
}

/// `G(t, xi)`; the identity at `xi = 0`.
pub fn green_matrix(params: &FluidParams, t: f64, xi: &[f64]) -> Result<GreenMatrixEval> {
    if !(t >= 0.0) {
        return Err(NskError::NegativeTime(t));
    }
    let c = params.linear();
    let r: f64 = xi.iter().map(|x| x * x).sum();
    Ok(assemble(&c, xi, &mode_factors_coeffs(&c, r, t)))
}

/// Per-mode generator of the linear flow: `U^' = A(xi) U^`.
pub fn generator_matrix(params: &FluidParams, xi: &[f64]) -> GreenMatrixEval {
    let c = params.linear();
    let d = xi.len();
    let n = d + 1;
    let r: f64 = xi.iter().map(|x| x * x).sum();
    let mut g = vec![ZERO; n * n];
    for j in 0..d {
        g[1 + j] = -I * xi[j];
        g[(1 + j) * n] = -I * xi[j] * (c.gamma2 + c.kappa * r);
        for k in 0..d {
            let diag = if j == k { c.mu * r } else { 0.0 };
            g[(1 + j) * n + 1 + k] = Complex64::new(-diag - c.lam_mu * xi[j] * xi[k], 0.0);
        }
    }
    GreenMatrixEval { size: n, entries: g }
}

/// `G(t, .)` tabulated on a grid for repeated application.
#[derive(Clone, Debug)]
pub struct Propagator {
    grid: Grid,
    coeffs: LinearCoeffs,
    t: f64,
    table: Vec<ModeFactors>,
}

impl Propagator {
    pub fn new(grid: &Grid, params: &FluidParams, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(NskError::NegativeTime(t));
        }
        params.validate()?;
        let c = params.linear();
        let table = (0..grid.len()).map(|idx| mode_factors_coeffs(&c, grid.xi_norm2(idx), t)).collect();
        Ok(Self { grid: *grid, coeffs: c, t, table })
    }

    pub fn duration(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply_in_place(&self, state: &mut SpectralState) -> Result<()> {
        if *state.grid() != self.grid {
            return Err(NskError::GridMismatch);
        }
        let g = self.grid;
        let d = g.dim();
        let c = self.coeffs;
        let table = &self.table;
        par_modes(state.coeff_slices_mut(), |start, parts| {
            let len = parts[0].len();
            #[allow(clippy::needless_range_loop)]
            for i in 0..len {
                let idx = start + i;
                let f = &table[idx];
                let xi = g.xi(idx);
                let r = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                if r == 0.0 {
                    continue;
                }
                let a = parts[0][i];
                let mut xm = ZERO;
                for (j, &x) in xi[..d].iter().enumerate() {
                    xm += x * parts[1 + j][i];
                }
                parts[0][i] = f.g11 * a - I * f.e * xm;
                let coupling = -I * (c.gamma2 + c.kappa * r) * f.e * a;
                let comp = (f.gc - f.h) * xm / r;
                for (j, &x) in xi[..d].iter().enumerate() {
                    let m = parts[1 + j][i];
                    parts[1 + j][i] = x * (coupling + comp) + f.h * m;
                }
            }
        });
        state.time += self.t;
        Ok(())
    }

    pub fn apply(&self, state: &SpectralState) -> Result<SpectralState> {
        let mut out = state.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }
}

/// Applies `G(t, xi)` to every mode; the clock of the result advances by `t`.
pub fn propagate(state: &SpectralState, t: f64, params: &FluidParams) -> Result<SpectralState> {
    Propagator::new(state.grid(), params, t)?.apply(state)
}

/// `e^{t D lap} f`.
pub fn heat_semigroup(f: &SpectralField, t: f64, diffusivity: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(NskError::NegativeTime(t));
    }
    let g = *f.grid();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= (-t * diffusivity * g.xi_norm2(idx)).exp();
    }
    Ok(out)
}

/// `(P_sigma m, m - P_sigma m)`; the zero mode stays in the solenoidal part.
pub fn helmholtz_project(m: &[SpectralField]) -> Result<(Vec<SpectralField>, Vec<SpectralField>)> {
    let Some(first) = m.first() else {
        return Err(NskError::InvalidGrid("empty vector field".into()));
    };
    let g = *first.grid();
    if m.len() != g.dim() {
        return Err(NskError::InvalidGrid(format!("expected {} components, got {}", g.dim(), m.len())));
    }
    for c in m {
        first.check_grid(c)?;
    }
    let d = g.dim();
    let mut sol: Vec<SpectralField> = m.to_vec();
    let mut comp: Vec<SpectralField> = m.iter().map(|c| {
        let mut z = SpectralField::zeros(g);
        z.set_hermitian(c.is_hermitian());
        z
    }).collect();
    for idx in 1..g.len() {
        let xi = g.xi(idx);
        let r = g.xi_norm2(idx);
        let xm: Complex64 = (0..d).map(|j| xi[j] * m[j].coeffs()[idx]).sum();
        for j in 0..d {
            let c = xi[j] * xm / r;
            comp[j].coeffs_mut()[idx] = c;
            sol[j].coeffs_mut()[idx] -= c;
        }
    }
    Ok((sol, comp))
}

/// Compressible diffusion-wave approximant at time `t`, returned as `(a, m_1, .., m_d)`.
///
/// Splits the compressible data into the characteristics
/// `z_+- = (gamma a^ +- xi . m^ / |xi|) / 2`, transports them with
/// `e^{-+ i t gamma |xi|}` and damps both with `e^{-t (nu/2) |xi|^2}`.
pub fn wave_diffusion_approx(u0: &SpectralState, t: f64, params: &FluidParams) -> Result<Vec<SpectralField>> {
    if !(t >= 0.0) {
        return Err(NskError::NegativeTime(t));
    }
    let g = *u0.grid();
    let d = g.dim();
    let c = params.linear();
    let gamma = c.gamma2.sqrt();
    let mut out: Vec<SpectralField> = (0..=d).map(|_| SpectralField::zeros(g)).collect();
    for idx in 1..g.len() {
        let xi = g.xi(idx);
        let r = g.xi_norm2(idx);
        let k = r.sqrt();
        let w: Complex64 = (0..d).map(|j| xi[j] * u0.m[j].coeffs()[idx]).sum::<Complex64>() / k;
        let a = u0.a.coeffs()[idx];
        let damp = (-0.5 * t * c.nu * r).exp();
        let zp = 0.5 * (gamma * a + w) * (-I * gamma * k * t).exp() * damp;
        let zm = 0.5 * (gamma * a - w) * (I * gamma * k * t).exp() * damp;
        out[0].coeffs_mut()[idx] = (zp + zm) / gamma;
        let wt = zp - zm;
        for j in 0..d {
            out[1 + j].coeffs_mut()[idx] = xi[j] / k * wt;
        }
    }
    Ok(out)
}

/// Smooth low-pass cutoff `chi_L`: 1 below `xi_c / 2`, 0 above `xi_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowPass {
    pub xi_c: f64,
}

impl LowPass {
    pub fn for_params(params: &FluidParams) -> Self {
        Self { xi_c: transition_frequency(params) }
    }

    pub fn eval(&self, r: f64) -> f64 {
        smooth_step(2.0 * r / self.xi_c)
    }
}

/// Physical samples of `d_t^k d_x^alpha K_{psi,L}(t, .)`, with
/// `K_{psi,L}^ = E(t, xi) psi(xi / |xi|) chi_L(|xi|)` and coefficients scaled
/// by `L^{-d}` so the sum approximates the continuum inverse transform.
pub fn k_psi_kernel(
    grid: &Grid,
    params: &FluidParams,
    t: f64,
    psi: &(dyn Fn(&[f64]) -> f64 + Sync),
    chi: &LowPass,
    k: u32,
    alpha: &[u32],
) -> Result<Vec<Complex64>> {
    if !(t >= 0.0) {
        return Err(NskError::NegativeTime(t));
    }
    if k > 3 {
        return Err(NskError::ExponentRange(format!("time derivative order {k} > 3")));
    }
    let d = grid.dim();
    let c = params.linear();
    let scale = grid.box_len().powi(-(d as i32));
    let mut coeffs = vec![ZERO; grid.len()];
    for (idx, slot) in coeffs.iter_mut().enumerate() {
        let r = grid.xi_norm2(idx);
        if grid.is_nyquist(idx) {
            continue;
        }
        let norm = r.sqrt();
        let cut = chi.eval(norm);
        if cut == 0.0 {
            continue;
        }
        let xi = grid.xi(idx);
        // the zero mode keeps the limit E(t, 0) = t; psi is averaged over the axes there
        let angular = if r == 0.0 {
            (0..d)
                .flat_map(|a| [1.0, -1.0].map(|sgn| psi(&(0..d).map(|b| if a == b { sgn } else { 0.0 }).collect::<Vec<_>>())))
                .sum::<f64>()
                / (2 * d) as f64
        } else {
            psi(&xi[..d].iter().map(|x| x / norm).collect::<Vec<_>>())
        };
        let e = if r == 0.0 {
            [t, 1.0, 0.0, 0.0][k as usize]
        } else {
            divided_exp_derivative(&roots(&c, r), t, k)
        };
        let mut sym = Complex64::new(e * angular * cut * scale, 0.0);
        for (axis, &order) in alpha.iter().enumerate().take(d) {
            sym *= (I * xi[axis]).powu(order);
        }
        *slot = sym;
    }
    let f = SpectralField::from_coeffs(*grid, coeffs, false)?;
    Ok(crate::field::inverse_transform_complex(&f))
}
