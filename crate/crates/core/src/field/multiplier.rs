use num_complex::Complex64;
use rayon::prelude::*;

use super::SpectralField;
use crate::error::{NskError, Result};

/// A Fourier symbol `m(xi)` together with its value at `xi = 0`.
///
/// `hermitian` asserts `m(-xi) = conj m(xi)`; only then is the reality flag of
/// the input carried over to the output.
pub struct Multiplier<F> {
    symbol: F,
    at_zero: Complex64,
    hermitian: bool,
}

impl<F> Multiplier<F>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    pub fn new(symbol: F, at_zero: Complex64, hermitian: bool) -> Self {
        Self { symbol, at_zero, hermitian }
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        if xi.iter().all(|&x| x == 0.0) {
            self.at_zero
        } else {
            (self.symbol)(xi)
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Pointwise product of two symbols.
    pub fn then<G>(self, other: Multiplier<G>) -> Multiplier<impl Fn(&[f64]) -> Complex64 + Sync>
    where
        G: Fn(&[f64]) -> Complex64 + Sync,
    {
        let at_zero = self.at_zero * other.at_zero;
        let hermitian = self.hermitian && other.hermitian;
        let (f, g) = (self.symbol, other.symbol);
        Multiplier::new(move |xi: &[f64]| f(xi) * g(xi), at_zero, hermitian)
    }
}

/// Riesz potential `|xi|^s`; the zero mode maps to 0 unless `s == 0`.
pub fn riesz(s: f64) -> Multiplier<impl Fn(&[f64]) -> Complex64 + Sync> {
    let at_zero = if s == 0.0 { 1.0 } else { 0.0 };
    Multiplier::new(
        move |xi: &[f64]| Complex64::new(norm2(xi).powf(0.5 * s), 0.0),
        Complex64::new(at_zero, 0.0),
        true,
    )
}

/// Bessel potential `<xi>^s = (1 + |xi|^2)^{s/2}`.
pub fn bessel(s: f64) -> Multiplier<impl Fn(&[f64]) -> Complex64 + Sync> {
    Multiplier::new(
        move |xi: &[f64]| Complex64::new((1.0 + norm2(xi)).powf(0.5 * s), 0.0),
        Complex64::new(1.0, 0.0),
        true,
    )
}

/// `d/dx_axis`, symbol `i xi_axis`.
pub fn partial(axis: usize) -> Multiplier<impl Fn(&[f64]) -> Complex64 + Sync> {
    Multiplier::new(move |xi: &[f64]| Complex64::new(0.0, xi[axis]), Complex64::new(0.0, 0.0), true)
}

/// Laplacian, symbol `-|xi|^2`.
pub fn laplacian() -> Multiplier<impl Fn(&[f64]) -> Complex64 + Sync> {
    Multiplier::new(|xi: &[f64]| Complex64::new(-norm2(xi), 0.0), Complex64::new(0.0, 0.0), true)
}

#[inline]
pub(crate) fn norm2(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum()
}

/// Multiplies every coefficient by the symbol at its lattice frequency.
pub fn apply_multiplier<F>(f: &SpectralField, m: &Multiplier<F>) -> Result<SpectralField>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let g = *f.grid();
    let d = g.dim();
    let coeffs: Vec<Complex64> = f
        .coeffs()
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let xi = g.xi(i);
            let v = m.eval(&xi[..d]);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(NskError::NonFiniteSymbol { xi: xi[..d].to_vec() });
            }
            Ok(c * v)
        })
        .collect::<Result<_>>()?;
    Ok(SpectralField::from_raw(g, coeffs, f.is_hermitian() && m.is_hermitian()))
}
