//! Periodic-box fields: grids, spectral coefficients, transforms and Fourier multipliers.

mod fft;
mod grid;
mod multiplier;

use num_complex::Complex64;
use rayon::prelude::*;

pub use grid::Grid;
pub use multiplier::{apply_multiplier, bessel, laplacian, partial, riesz, Multiplier};

use crate::error::{NskError, Result};

/// Fourier coefficients of a field on a [`Grid`].
///
/// Normalized so that `e^{i xi . x}` has coefficient 1 at `xi`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    hermitian: bool,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()], hermitian: true }
    }

    /// Builds a field from raw coefficients. The unpaired Nyquist row is zeroed.
    pub fn from_coeffs(grid: Grid, mut coeffs: Vec<Complex64>, hermitian: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(NskError::SizeMismatch { expected: grid.len(), got: coeffs.len() });
        }
        for (idx, c) in coeffs.iter_mut().enumerate() {
            if grid.is_nyquist(idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { grid, coeffs, hermitian })
    }

    /// Wraps coefficients without touching the Nyquist row.
    pub(crate) fn from_raw(grid: Grid, coeffs: Vec<Complex64>, hermitian: bool) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs, hermitian }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn set_hermitian(&mut self, flag: bool) {
        self.hermitian = flag;
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Largest `|c(-k) - conj c(k)|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let g = &self.grid;
        let worst = (0..g.len())
            .filter(|&i| !g.is_nyquist(i))
            .map(|i| (self.coeffs[g.negated_index(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max);
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `sum_k |c_k|^2` in lattice order.
    pub fn coefficient_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Physical `L^2(torus)` norm via Parseval: `L^d sum |c_k|^2`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.box_len().powi(self.grid.dim() as i32) * self.coefficient_energy()).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.par_iter_mut().for_each(|c| *c *= s);
    }

    pub fn scale_complex(&mut self, s: Complex64) {
        self.coeffs.par_iter_mut().for_each(|c| *c *= s);
        if s.im != 0.0 {
            self.hermitian = false;
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) -> Result<()> {
        self.check_grid(other)?;
        self.coeffs.par_iter_mut().zip(other.coeffs.par_iter()).for_each(|(a, b)| *a += b * alpha);
        self.hermitian &= other.hermitian;
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub(crate) fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(NskError::GridMismatch);
        }
        Ok(())
    }

    /// Zeroes all coefficients outside `|k_i| <= n/3`.
    pub fn dealias(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let g = self.grid;
        self.coeffs.par_iter_mut().enumerate().for_each(|(i, c)| {
            if !g.in_dealias_band(i) {
                *c = Complex64::new(0.0, 0.0);
            }
        });
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Free-function form of [`SpectralField::dealias`].
pub fn dealias(f: &SpectralField) -> SpectralField {
    f.dealias()
}

/// Forward transform of real samples.
pub fn forward_transform(grid: &Grid, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(NskError::SizeMismatch { expected: grid.len(), got: samples.len() });
    }
    let mut data: Vec<Complex64> = samples.par_iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft::forward(grid, &mut data);
    Ok(SpectralField::from_raw(*grid, data, true))
}

/// Forward transform of complex samples; the result is not flagged hermitian.
pub fn forward_transform_complex(grid: &Grid, samples: &[Complex64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(NskError::SizeMismatch { expected: grid.len(), got: samples.len() });
    }
    let mut data = samples.to_vec();
    fft::forward(grid, &mut data);
    Ok(SpectralField::from_raw(*grid, data, false))
}

/// Inverse transform keeping the full complex samples.
pub fn inverse_transform_complex(f: &SpectralField) -> Vec<Complex64> {
    let mut data = f.coeffs.clone();
    fft::inverse(&f.grid, &mut data);
    data
}

/// Inverse transform returning the real part of the samples.
pub fn inverse_transform(f: &SpectralField) -> Vec<f64> {
    inverse_transform_complex(f).into_iter().map(|z| z.re).collect()
}

/// Inverse transform of two real fields with one complex FFT.
pub fn inverse_transform_pair(a: &SpectralField, b: &SpectralField) -> Result<(Vec<f64>, Vec<f64>)> {
    a.check_grid(b)?;
    let i = Complex64::new(0.0, 1.0);
    let mut data: Vec<Complex64> =
        a.coeffs.par_iter().zip(b.coeffs.par_iter()).map(|(x, y)| x + i * y).collect();
    fft::inverse(&a.grid, &mut data);
    Ok(data.into_iter().map(|z| (z.re, z.im)).unzip())
}

/// Forward transform of two real sample sets with one complex FFT.
pub fn forward_transform_pair(
    grid: &Grid,
    a: &[f64],
    b: &[f64],
) -> Result<(SpectralField, SpectralField)> {
    for s in [a, b] {
        if s.len() != grid.len() {
            return Err(NskError::SizeMismatch { expected: grid.len(), got: s.len() });
        }
    }
    let mut z: Vec<Complex64> =
        a.par_iter().zip(b.par_iter()).map(|(&x, &y)| Complex64::new(x, y)).collect();
    fft::forward(grid, &mut z);
    let g = *grid;
    let (ca, cb): (Vec<Complex64>, Vec<Complex64>) = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let zk = z[k];
            let zm = z[g.negated_index(k)].conj();
            ((zk + zm) * 0.5, Complex64::new(0.0, -0.5) * (zk - zm))
        })
        .unzip();
    Ok((SpectralField::from_raw(g, ca, true), SpectralField::from_raw(g, cb, true)))
}

const MODE_CHUNK: usize = 4096;

/// Runs `f(start, parts)` over aligned chunks of several coefficient arrays
/// in parallel; `parts[c]` is the chunk of component `c` starting at flat index `start`.
pub(crate) fn par_modes<F>(comps: Vec<&mut [Complex64]>, f: F)
where
    F: Fn(usize, &mut [&mut [Complex64]]) + Sync,
{
    let len = comps.first().map_or(0, |c| c.len());
    let mut chunks: Vec<(usize, Vec<&mut [Complex64]>)> =
        (0..len.div_ceil(MODE_CHUNK)).map(|c| (c * MODE_CHUNK, Vec::with_capacity(comps.len()))).collect();
    for comp in comps {
        debug_assert_eq!(comp.len(), len);
        for (slot, piece) in chunks.iter_mut().zip(comp.chunks_mut(MODE_CHUNK)) {
            slot.1.push(piece);
        }
    }
    chunks.into_par_iter().for_each(|(start, mut parts)| f(start, &mut parts));
}

/// Perturbation state `(a, m)` at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    pub a: SpectralField,
    pub m: Vec<SpectralField>,
    pub time: f64,
}

impl SpectralState {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            a: SpectralField::zeros(grid),
            m: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
            time: 0.0,
        }
    }

    pub fn new(a: SpectralField, m: Vec<SpectralField>, time: f64) -> Result<Self> {
        let grid = *a.grid();
        if m.len() != grid.dim() {
            return Err(NskError::InvalidGrid(format!(
                "momentum needs {} components, got {}",
                grid.dim(),
                m.len()
            )));
        }
        for c in &m {
            a.check_grid(c)?;
        }
        if !(time >= 0.0) {
            return Err(NskError::NegativeTime(time));
        }
        Ok(Self { a, m, time })
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    /// Components in `(a, m_1, .., m_d)` order.
    pub fn components(&self) -> impl Iterator<Item = &SpectralField> {
        std::iter::once(&self.a).chain(self.m.iter())
    }

    pub fn components_mut(&mut self) -> impl Iterator<Item = &mut SpectralField> {
        std::iter::once(&mut self.a).chain(self.m.iter_mut())
    }

    pub fn is_hermitian(&self) -> bool {
        self.components().all(|c| c.is_hermitian())
    }

    pub fn is_finite(&self) -> bool {
        self.components().all(|c| c.is_finite())
    }

    pub fn dealias(&self) -> SpectralState {
        let mut out = self.clone();
        out.components_mut().for_each(|c| c.dealias_in_place());
        out
    }

    /// Component-wise difference; time taken from `self`.
    pub fn sub(&self, other: &SpectralState) -> Result<SpectralState> {
        let a = self.a.sub(&other.a)?;
        let m = self.m.iter().zip(&other.m).map(|(x, y)| x.sub(y)).collect::<Result<Vec<_>>>()?;
        Ok(SpectralState { a, m, time: self.time })
    }

    pub fn axpy(&mut self, alpha: f64, other: &SpectralState) -> Result<()> {
        self.a.axpy(alpha, &other.a)?;
        for (x, y) in self.m.iter_mut().zip(&other.m) {
            x.axpy(alpha, y)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        self.components_mut().for_each(|c| c.scale(s));
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.components().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Mutable coefficient slices in `(a, m_1, .., m_d)` order.
    pub(crate) fn coeff_slices_mut(&mut self) -> Vec<&mut [Complex64]> {
        self.components_mut().map(|c| c.coeffs_mut()).collect()
    }

    /// Zero modes `(mean a, mean m_1, ..)`.
    pub fn means(&self) -> Vec<Complex64> {
        self.components().map(|c| c.zero_mode()).collect()
    }
}
