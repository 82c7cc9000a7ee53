//! Initial data generators.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};
use crate::field::{forward_transform, Grid, SpectralField, SpectralState};
use crate::linear::helmholtz_project;

/// One periodized Gaussian `exp(-|x - c|^2 / (2 w^2))` carrying a density
/// amplitude and a momentum vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    /// Center, in units of the box length (each entry in `[0, 1)`).
    pub center: Vec<f64>,
    pub width: f64,
    #[serde(default)]
    pub density: f64,
    #[serde(default)]
    pub momentum: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumPart {
    #[default]
    Full,
    Solenoidal,
    Compressible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    Gaussian {
        bumps: Vec<Bump>,
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default)]
        momentum_part: MomentumPart,
    },
    /// Random phases under the envelope `exp(-|xi|^2 / (2 k0^2))`, each
    /// component rescaled to physical sup norm `amplitude`.
    BandLimited {
        seed: u64,
        amplitude: f64,
        k0: f64,
        #[serde(default = "yes")]
        density: bool,
        #[serde(default)]
        momentum_part: MomentumPart,
    },
}

fn unit() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

impl InitialData {
    pub fn violations(&self, dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            InitialData::Zero => {}
            InitialData::Gaussian { bumps, amplitude, .. } => {
                if bumps.is_empty() {
                    out.push("initial.bumps must not be empty".into());
                }
                if !amplitude.is_finite() {
                    out.push("initial.amplitude must be finite".into());
                }
                for (i, b) in bumps.iter().enumerate() {
                    if b.center.len() != dim {
                        out.push(format!("initial.bumps[{i}].center needs {dim} entries"));
                    }
                    if !b.momentum.is_empty() && b.momentum.len() != dim {
                        out.push(format!("initial.bumps[{i}].momentum needs {dim} entries"));
                    }
                    if !(b.width > 0.0) {
                        out.push(format!("initial.bumps[{i}].width must be positive"));
                    }
                }
            }
            InitialData::BandLimited { amplitude, k0, .. } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    out.push("initial.amplitude must be nonnegative".into());
                }
                if !(*k0 > 0.0) {
                    out.push("initial.k0 must be positive".into());
                }
            }
        }
        out
    }

    /// Builds the dealiased state at `t = 0`; `seed` overrides the stored seed when given.
    pub fn build(&self, grid: &Grid, seed: Option<u64>) -> Result<SpectralState> {
        let v = self.violations(grid.dim());
        if !v.is_empty() {
            return Err(NskError::Config(v));
        }
        let d = grid.dim();
        let (state, part) = match self {
            InitialData::Zero => return Ok(SpectralState::zeros(*grid)),
            InitialData::Gaussian { bumps, amplitude, momentum_part } => {
                let mut a = vec![0.0; grid.len()];
                let mut m = vec![vec![0.0; grid.len()]; d];
                let l = grid.box_len();
                for b in bumps {
                    for (idx, slot) in a.iter_mut().enumerate() {
                        let x = grid.position(idx);
                        let r2: f64 = (0..d)
                            .map(|k| {
                                let dx = (x[k] - b.center[k] * l).rem_euclid(l);
                                let dx = dx.min(l - dx);
                                dx * dx
                            })
                            .sum();
                        let g = amplitude * (-r2 / (2.0 * b.width * b.width)).exp();
                        *slot += b.density * g;
                        for (k, mk) in b.momentum.iter().enumerate() {
                            m[k][idx] += mk * g;
                        }
                    }
                }
                let af = forward_transform(grid, &a)?.dealias();
                let mf = m.iter().map(|s| Ok(forward_transform(grid, s)?.dealias())).collect::<Result<Vec<_>>>()?;
                (SpectralState::new(af, mf, 0.0)?, *momentum_part)
            }
            InitialData::BandLimited { seed: own, amplitude, k0, density, momentum_part } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(*own));
                let mut comps = Vec::with_capacity(d + 1);
                for c in 0..=d {
                    let f = random_band(grid, &mut rng, *k0);
                    if c == 0 && !density {
                        comps.push(SpectralField::zeros(*grid));
                    } else {
                        comps.push(normalize_sup(f, *amplitude));
                    }
                }
                let a = comps.remove(0);
                (SpectralState::new(a, comps, 0.0)?, *momentum_part)
            }
        };
        let mut state = state;
        match part {
            MomentumPart::Full => {}
            MomentumPart::Solenoidal => state.m = helmholtz_project(&state.m)?.0,
            MomentumPart::Compressible => state.m = helmholtz_project(&state.m)?.1,
        }
        Ok(state)
    }
}

fn random_band(grid: &Grid, rng: &mut ChaCha8Rng, k0: f64) -> SpectralField {
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    // draw in index order, then impose c(-k) = conj c(k)
    for (idx, slot) in c.iter_mut().enumerate() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let env = (-grid.xi_norm2(idx) / (2.0 * k0 * k0)).exp();
        *slot = Complex64::new(re, im) * env;
    }
    c[0] = Complex64::new(0.0, 0.0);
    for idx in 0..grid.len() {
        let j = grid.negated_index(idx);
        if j > idx {
            c[j] = c[idx].conj();
        } else if j == idx {
            c[idx] = Complex64::new(c[idx].re, 0.0);
        }
    }
    SpectralField::from_coeffs(*grid, c, true).expect("grid-sized").dealias()
}

fn normalize_sup(f: SpectralField, amplitude: f64) -> SpectralField {
    let sup = crate::field::inverse_transform(&f).into_iter().map(f64::abs).fold(0.0, f64::max);
    if sup == 0.0 {
        f
    } else {
        f.scaled(amplitude / sup)
    }
}
