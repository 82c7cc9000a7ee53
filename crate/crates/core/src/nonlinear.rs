//! Pseudo-spectral nonlinearity of the momentum equation in `(a, m)` form.
//!
//! With `rho = rho* + a` the exact residual of the primitive momentum equation
//! after removing its linear part is
//!
//! ```text
//! N = -div(m (x) m / rho) - grad Q(a) + L((1/rho - 1/rho*) m) + kappa a grad lap a
//! ```
//!
//! where `Q(a) = P(rho* + a) - P(rho*) - P'(rho*) a`. Every term is a
//! divergence, so it is assembled as `div T + L V` with a symmetric tensor `T`
//! and vector `V` formed pointwise in physical space.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{NskError, Result};
use crate::field::{forward_transform_pair, inverse_transform_pair, Grid, SpectralField, SpectralState};
use crate::params::FluidParams;

pub use crate::params::PressureLaw;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default lower bound on `rho / rho*`.
pub const DEFAULT_VACUUM_MARGIN: f64 = 0.1;

/// Fails with the offending minimum when `min(1 + a / rho*) <= margin`.
pub fn check_vacuum(a: &[f64], rho_star: f64, margin: f64) -> Result<f64> {
    let min = a.iter().fold(f64::INFINITY, |m, &x| m.min(1.0 + x / rho_star));
    if !(min > margin) {
        return Err(NskError::Vacuum { min, margin });
    }
    Ok(min)
}

/// `I(a) = a / (1 + a)`.
pub fn i_fn(a: &[f64], margin: f64) -> Result<Vec<f64>> {
    check_vacuum(a, 1.0, margin)?;
    Ok(a.iter().map(|&x| x / (1.0 + x)).collect())
}

/// `I_P(a) = P'(rho* + a) - P'(rho*)`.
pub fn pressure_remainder(a: &[f64], params: &FluidParams, margin: f64) -> Result<Vec<f64>> {
    check_vacuum(a, params.rho_star, margin)?;
    Ok(a.iter().map(|&x| params.pressure_remainder_at(x)).collect())
}

/// Inverse transforms, two real fields per complex FFT.
pub(crate) fn to_physical(fields: &[&SpectralField]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        match pair {
            [x, y] => {
                let (u, v) = inverse_transform_pair(x, y)?;
                out.push(u);
                out.push(v);
            }
            [x] => out.push(crate::field::inverse_transform(x)),
            _ => unreachable!(),
        }
    }
    Ok(out)
}

/// Forward transforms, two real sample sets per complex FFT, dealiased.
pub(crate) fn to_spectral(grid: &Grid, samples: &[Vec<f64>]) -> Result<Vec<SpectralField>> {
    let mut out = Vec::with_capacity(samples.len());
    for pair in samples.chunks(2) {
        match pair {
            [x, y] => {
                let (u, v) = forward_transform_pair(grid, x, y)?;
                out.push(u.dealias());
                out.push(v.dealias());
            }
            [x] => out.push(crate::field::forward_transform(grid, x)?.dealias()),
            _ => unreachable!(),
        }
    }
    Ok(out)
}

fn gradient(f: &SpectralField) -> Vec<SpectralField> {
    let g = *f.grid();
    (0..g.dim())
        .map(|axis| {
            let mut out = f.clone();
            for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
                *c *= I * g.xi(idx)[axis];
            }
            out
        })
        .collect()
}

fn laplacian_of(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        *c *= -g.xi_norm2(idx);
    }
    out
}

/// Index of `(i, j)`, `i <= j`, in the packed upper triangle.
fn packed(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * (i + 1) / 2 + j
}

/// `i xi_j T_ij^` for a packed symmetric tensor.
fn tensor_divergence(t: &[SpectralField], d: usize) -> Vec<SpectralField> {
    let g = *t[0].grid();
    (0..d)
        .map(|i| {
            let coeffs = (0..g.len())
                .into_par_iter()
                .map(|idx| {
                    let xi = g.xi(idx);
                    (0..d).map(|j| I * xi[j] * t[packed(d, i, j)].coeffs()[idx]).sum()
                })
                .collect();
            SpectralField::from_coeffs(g, coeffs, true).expect("grid-sized")
        })
        .collect()
}

/// Quadratic Korteweg term `div K(a) = kappa a grad lap a`, assembled as
/// `kappa/2 grad lap(a^2) - kappa/2 grad |grad a|^2 - kappa div(grad a (x) grad a)`.
pub fn korteweg_divergence(a: &SpectralField, kappa: f64) -> Result<Vec<SpectralField>> {
    let g = *a.grid();
    let d = g.dim();
    let grad = gradient(a);
    let mut inputs: Vec<&SpectralField> = vec![a];
    inputs.extend(grad.iter());
    let phys = to_physical(&inputs)?;
    let (ap, gp) = (&phys[0], &phys[1..]);
    let n = g.len();
    let mut samples: Vec<Vec<f64>> = Vec::new();
    samples.push((0..n).map(|x| ap[x] * ap[x]).collect());
    samples.push((0..n).map(|x| gp.iter().map(|v| v[x] * v[x]).sum()).collect());
    for i in 0..d {
        for j in i..d {
            samples.push((0..n).map(|x| gp[i][x] * gp[j][x]).collect());
        }
    }
    let spec = to_spectral(&g, &samples)?;
    let (sq, grad_sq, outer) = (&spec[0], &spec[1], &spec[2..]);
    let div_outer = tensor_divergence(outer, d);
    let mut out = Vec::with_capacity(d);
    for (i, dout) in div_outer.into_iter().enumerate() {
        let coeffs = (0..n)
            .map(|idx| {
                let xi = g.xi(idx);
                let r = g.xi_norm2(idx);
                let grad_i = I * xi[i];
                kappa * (0.5 * grad_i * (-r) * sq.coeffs()[idx] - 0.5 * grad_i * grad_sq.coeffs()[idx]
                    - dout.coeffs()[idx])
            })
            .collect();
        out.push(SpectralField::from_coeffs(g, coeffs, true)?);
    }
    Ok(out)
}

/// Which pieces of the nonlinearity to include; all by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Terms {
    pub convection: bool,
    pub pressure: bool,
    pub viscous: bool,
    pub korteweg: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Self { convection: true, pressure: true, viscous: true, korteweg: true }
    }
}

/// Reusable evaluator of `N(a, m)`.
#[derive(Clone, Debug)]
pub struct Nonlinearity {
    params: FluidParams,
    margin: f64,
    terms: Terms,
}

impl Nonlinearity {
    pub fn new(params: &FluidParams, margin: f64) -> Result<Self> {
        params.validate()?;
        Ok(Self { params: params.clone(), margin, terms: Terms::default() })
    }

    pub fn with_terms(mut self, terms: Terms) -> Self {
        self.terms = terms;
        self
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// `N(a, m)` and the minimum of `rho / rho*`.
    pub fn eval(&self, state: &SpectralState) -> Result<(Vec<SpectralField>, f64)> {
        let g = *state.grid();
        let d = g.dim();
        let n = g.len();
        let p = &self.params;
        let rs = p.rho_star;
        let t = self.terms;

        let grad = gradient(&state.a);
        let lap = laplacian_of(&state.a);
        let mut inputs: Vec<&SpectralField> = vec![&state.a];
        inputs.extend(state.m.iter());
        inputs.extend(grad.iter());
        inputs.push(&lap);
        let phys = to_physical(&inputs)?;
        let a = &phys[0];
        let m = &phys[1..1 + d];
        let ga = &phys[1 + d..1 + 2 * d];
        let la = &phys[1 + 2 * d];
        let min_rho = check_vacuum(a, rs, self.margin)?;

        let gamma2 = p.gamma2();
        let kappa = p.kappa;
        // diagonal part shared by all T_ii
        let diag: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut v = 0.0;
                if t.pressure {
                    let ax = a[x];
                    v -= p.pressure.pressure(rs + ax) - p.pressure.pressure(rs) - gamma2 * ax;
                }
                if t.korteweg {
                    let g2: f64 = ga.iter().map(|c| c[x] * c[x]).sum();
                    v += kappa * (a[x] * la[x] + 0.5 * g2);
                }
                v
            })
            .collect();
        let mut samples: Vec<Vec<f64>> = Vec::with_capacity(d * (d + 1) / 2 + d);
        for i in 0..d {
            for j in i..d {
                let s: Vec<f64> = (0..n)
                    .into_par_iter()
                    .map(|x| {
                        let mut v = if i == j { diag[x] } else { 0.0 };
                        if t.convection {
                            v -= m[i][x] * m[j][x] / (rs + a[x]);
                        }
                        if t.korteweg {
                            v -= kappa * ga[i][x] * ga[j][x];
                        }
                        v
                    })
                    .collect();
                samples.push(s);
            }
        }
        if t.viscous {
            for mi in m {
                samples.push(
                    (0..n).into_par_iter().map(|x| (1.0 / (rs + a[x]) - 1.0 / rs) * mi[x]).collect(),
                );
            }
        }
        let spec = to_spectral(&g, &samples)?;
        let tensor = &spec[..d * (d + 1) / 2];
        let mut out = tensor_divergence(tensor, d);
        if t.viscous {
            let v = &spec[d * (d + 1) / 2..];
            let (mu, lam_mu) = (p.mu, p.lam + p.mu);
            let coeffs: Vec<Vec<Complex64>> = (0..d)
                .map(|i| {
                    (0..n)
                        .into_par_iter()
                        .map(|idx| {
                            let xi = g.xi(idx);
                            let r = g.xi_norm2(idx);
                            let xv: Complex64 = (0..d).map(|j| xi[j] * v[j].coeffs()[idx]).sum();
                            -mu * r * v[i].coeffs()[idx] - lam_mu * xi[i] * xv
                        })
                        .collect()
                })
                .collect();
            for (o, c) in out.iter_mut().zip(coeffs) {
                for (x, y) in o.coeffs_mut().iter_mut().zip(c) {
                    *x += y;
                }
            }
        }
        for o in &mut out {
            o.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
            o.dealias_in_place();
        }
        Ok((out, min_rho))
    }
}

/// `N(a, m)` with the default vacuum margin.
pub fn assemble_n(state: &SpectralState, params: &FluidParams) -> Result<Vec<SpectralField>> {
    Ok(Nonlinearity::new(params, DEFAULT_VACUUM_MARGIN)?.eval(state)?.0)
}
