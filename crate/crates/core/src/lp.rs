//! Littlewood-Paley decomposition on the frequency lattice and the Besov-type
//! norms built from it.
//!
//! Shell `j` carries the weight `phi_j(xi) = phi(2^{-j} xi)` with
//! `phi(xi) = chi(|xi|) - chi(2|xi|)`, where `chi` is a smooth step equal to 1
//! on `[0, 1]` and 0 on `[2, inf)`. A lattice point with
//! `2^j <= |xi| < 2^{j+1}` therefore belongs to exactly two shells, `j` with
//! weight `chi(2^{-j}|xi|)` and `j + 1` with the complement. The edge shells
//! `j_min` and `j_max` absorb everything below and above the dyadic range so the
//! weights sum to one on every nonzero lattice point.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NskError, Result};
use crate::field::{inverse_transform, Grid, SpectralField};

/// `exp(-1/x)` for `x > 0`, else 0.
fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth nonincreasing step: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub fn smooth_step(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = bump(2.0 - r);
        let b = bump(r - 1.0);
        a / (a + b)
    }
}

/// Mother profile `phi(r) = chi(r) - chi(2r)`, supported in `[1/2, 2]`.
pub fn mother_profile(r: f64) -> f64 {
    smooth_step(r) - smooth_step(2.0 * r)
}

/// Integrability or summation index in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Index(pub f64);

impl Index {
    pub const INF: Index = Index(f64::INFINITY);

    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }

    /// Hoelder conjugate `p' = p / (p - 1)`.
    pub fn conjugate(self) -> Index {
        if self.0 == 1.0 {
            Index::INF
        } else if self.is_inf() {
            Index(1.0)
        } else {
            Index(self.0 / (self.0 - 1.0))
        }
    }

    pub fn validate(self, name: &str) -> Result<()> {
        if self.0.is_nan() || self.0 < 1.0 {
            return Err(NskError::ExponentRange(format!("{name} must lie in [1, inf], got {}", self.0)));
        }
        Ok(())
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn recip(self) -> f64 {
        if self.is_inf() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_inf() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Index(x)),
            Raw::Int(x) => Ok(Index(x as f64)),
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(Index::INF),
                other => other.parse::<f64>().map(Index).map_err(serde::de::Error::custom),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesovFlavor {
    /// `2^{sj} || phi_j f^ ||_{L^{p'}}` summed in `l^sigma`.
    FourierBesov,
    /// `2^{sj} || phi_j * f ||_{L^p}` summed in `l^sigma`.
    Besov,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Index,
    pub sigma: Index,
    pub flavor: BesovFlavor,
}

impl BesovSpec {
    pub fn fourier(s: f64, p: f64, sigma: f64) -> Self {
        Self { s, p: Index(p), sigma: Index(sigma), flavor: BesovFlavor::FourierBesov }
    }

    pub fn besov(s: f64, p: f64, sigma: f64) -> Self {
        Self { s, p: Index(p), sigma: Index(sigma), flavor: BesovFlavor::Besov }
    }

    pub fn validate(&self) -> Result<()> {
        self.p.validate("p")?;
        self.sigma.validate("sigma")?;
        if !self.s.is_finite() {
            return Err(NskError::ExponentRange(format!("s must be finite, got {}", self.s)));
        }
        Ok(())
    }
}

/// `l^sigma` combination of per-shell values weighted by `2^{sj}`.
pub fn combine_shells(shells: impl IntoIterator<Item = (i32, f64)>, s: f64, sigma: Index) -> f64 {
    let weighted = shells.into_iter().map(|(j, v)| 2f64.powf(s * j as f64) * v);
    if sigma.is_inf() {
        weighted.fold(0.0, f64::max)
    } else if sigma.0 == 1.0 {
        weighted.sum()
    } else {
        weighted.map(|v| v.powf(sigma.0)).sum::<f64>().powf(1.0 / sigma.0)
    }
}

/// Littlewood-Paley profiles on the lattice of one grid.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    /// Lower of the two shells a point belongs to; `i32::MIN` at `xi = 0`.
    lower: Vec<i32>,
    /// Weight of `lower`; shell `lower + 1` receives `1 - weight`.
    weight: Vec<f64>,
}

impl DyadicPartition {
    pub fn new(grid: &Grid) -> Result<Self> {
        let j_min = grid.dk().log2().floor() as i32;
        let j_max = grid.dealiased_max_frequency().log2().ceil() as i32;
        if j_max - j_min + 1 < 4 {
            return Err(NskError::Partition(format!(
                "grid hosts only shells {j_min}..={j_max}; at least 4 are needed"
            )));
        }
        let mut lower = vec![i32::MIN; grid.len()];
        let mut weight = vec![0.0; grid.len()];
        for idx in 1..grid.len() {
            let r = grid.xi_norm2(idx).sqrt();
            let mut j = r.log2().floor() as i32;
            // guard log2 rounding at exact powers of two
            if 2f64.powi(j) > r {
                j -= 1;
            } else if 2f64.powi(j + 1) <= r {
                j += 1;
            }
            debug_assert!(j >= j_min);
            if j >= j_max {
                lower[idx] = j_max;
                weight[idx] = 1.0;
            } else {
                lower[idx] = j;
                weight[idx] = smooth_step(r / 2f64.powi(j));
            }
        }
        Ok(Self { grid: *grid, j_min, j_max, lower, weight })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn shells(&self) -> RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn shell_count(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    /// Edge shells carry leftover mass and are excluded from rate fits.
    pub fn is_edge(&self, j: i32) -> bool {
        j == self.j_min || j == self.j_max
    }

    /// `phi_j` at one lattice point.
    #[inline]
    pub fn weight(&self, j: i32, idx: usize) -> f64 {
        let lo = self.lower[idx];
        if lo == i32::MIN {
            0.0
        } else if j == lo {
            self.weight[idx]
        } else if j == lo + 1 && lo < self.j_max {
            1.0 - self.weight[idx]
        } else {
            0.0
        }
    }

    /// The two `(shell, weight)` pairs of a lattice point.
    #[inline]
    pub(crate) fn memberships(&self, idx: usize) -> Option<[(i32, f64); 2]> {
        let lo = self.lower[idx];
        if lo == i32::MIN {
            None
        } else {
            Some([(lo, self.weight[idx]), (lo + 1, 1.0 - self.weight[idx])])
        }
    }

    pub fn profile(&self, j: i32) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.weight(j, i)).collect()
    }

    /// `phi_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check(f)?;
        let coeffs = f.coeffs().iter().enumerate().map(|(i, c)| c * self.weight(j, i)).collect();
        let mut out = SpectralField::from_coeffs(self.grid, coeffs, f.is_hermitian())?;
        out.set_hermitian(f.is_hermitian());
        Ok(out)
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(NskError::GridMismatch);
        }
        Ok(())
    }

    /// Per-shell `|| phi_j g ||_{L^q}` (lattice measure) of a nonnegative
    /// lattice function `g`, in shell order `j_min..=j_max`.
    pub fn shell_norms_with(&self, q: Index, modulus: impl Fn(usize) -> f64) -> Vec<f64> {
        let count = self.shell_count();
        let mut acc = vec![0.0; count];
        for idx in 0..self.grid.len() {
            let Some(members) = self.memberships(idx) else { continue };
            let g = modulus(idx);
            if g == 0.0 {
                continue;
            }
            for (j, w) in members {
                if w == 0.0 || j > self.j_max {
                    continue;
                }
                let slot = &mut acc[(j - self.j_min) as usize];
                let v = w * g;
                if q.is_inf() {
                    *slot = f64::max(*slot, v);
                } else if q.0 == 2.0 {
                    *slot += v * v;
                } else if q.0 == 1.0 {
                    *slot += v;
                } else {
                    *slot += v.powf(q.0);
                }
            }
        }
        if !q.is_inf() {
            let meas = self.grid.lattice_measure();
            for slot in &mut acc {
                *slot = (*slot * meas).powf(1.0 / q.0);
            }
        }
        acc
    }

    /// Per-shell Fourier-Lebesgue norms `|| phi_j f^ ||_{L^{p'}}`.
    pub fn shell_norms(&self, f: &SpectralField, p: Index) -> Result<Vec<f64>> {
        self.check(f)?;
        let c = f.coeffs();
        Ok(self.shell_norms_with(p.conjugate(), |i| c[i].norm()))
    }

    /// Per-shell norms of a vector field measured by the pointwise Euclidean
    /// modulus of its components.
    pub fn shell_norms_vector(&self, comps: &[&SpectralField], p: Index) -> Result<Vec<f64>> {
        for c in comps {
            self.check(c)?;
        }
        Ok(self.shell_norms_with(p.conjugate(), |i| {
            comps.iter().map(|c| c.coeffs()[i].norm_sqr()).sum::<f64>().sqrt()
        }))
    }

    fn with_shells(&self, values: Vec<f64>) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.shells().zip(values)
    }

    pub fn combine(&self, values: Vec<f64>, s: f64, sigma: Index) -> f64 {
        combine_shells(self.with_shells(values), s, sigma)
    }

    /// Combination restricted to a shell range.
    pub fn combine_in(&self, values: &[f64], s: f64, sigma: Index, range: RangeInclusive<i32>) -> f64 {
        combine_shells(
            self.shells().zip(values.iter().copied()).filter(|(j, _)| range.contains(j)),
            s,
            sigma,
        )
    }

    pub fn fourier_besov_norm(&self, f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
        spec.validate()?;
        if spec.flavor != BesovFlavor::FourierBesov {
            return Err(NskError::ExponentRange("fourier_besov_norm needs the FourierBesov flavor".into()));
        }
        let shells = self.shell_norms(f, spec.p)?;
        Ok(self.combine(shells, spec.s, spec.sigma))
    }

    /// Fourier-Besov norm of a vector field (pointwise Euclidean modulus).
    pub fn fourier_besov_norm_vector(&self, comps: &[&SpectralField], spec: &BesovSpec) -> Result<f64> {
        spec.validate()?;
        let shells = self.shell_norms_vector(comps, spec.p)?;
        Ok(self.combine(shells, spec.s, spec.sigma))
    }

    /// Low part sums `j <= j0`, high part `j >= j0 - 1` (overlapping as in the
    /// usual low/high notation).
    pub fn fourier_besov_norm_split(&self, f: &SpectralField, spec: &BesovSpec, j0: i32) -> Result<(f64, f64)> {
        spec.validate()?;
        let shells = self.shell_norms(f, spec.p)?;
        Ok((
            self.combine_in(&shells, spec.s, spec.sigma, i32::MIN..=j0),
            self.combine_in(&shells, spec.s, spec.sigma, (j0 - 1)..=i32::MAX),
        ))
    }

    /// Physical-side Besov norm: every block is transformed back and measured
    /// in `L^p` with the per-sample measure `(2 pi / L)^d / n^d`, which makes
    /// the `p = 2` case coincide with the Fourier-Besov norm.
    pub fn besov_norm(&self, f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
        spec.validate()?;
        if spec.flavor != BesovFlavor::Besov {
            return Err(NskError::ExponentRange("besov_norm needs the Besov flavor".into()));
        }
        self.check(f)?;
        let weight = self.grid.lattice_measure() / self.grid.len() as f64;
        let mut shells = Vec::with_capacity(self.shell_count());
        for j in self.shells() {
            let block = self.block(f, j)?;
            let samples = inverse_transform(&block);
            let v = if spec.p.is_inf() {
                samples.iter().map(|x| x.abs()).fold(0.0, f64::max)
            } else {
                let p = spec.p.0;
                (samples.iter().map(|x| x.abs().powf(p)).sum::<f64>() * weight).powf(1.0 / p)
            };
            shells.push(v);
        }
        Ok(self.combine(shells, spec.s, spec.sigma))
    }

    /// Dispatches on the flavor of `spec`.
    pub fn norm(&self, f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
        match spec.flavor {
            BesovFlavor::FourierBesov => self.fourier_besov_norm(f, spec),
            BesovFlavor::Besov => self.besov_norm(f, spec),
        }
    }

    /// `f = f_low + f_high` with `f_low = sum_{j <= j0 - 1} phi_j f` plus the zero mode.
    pub fn low_high_split(&self, f: &SpectralField, j0: i32) -> Result<(SpectralField, SpectralField)> {
        self.check(f)?;
        if !(self.j_min < j0 && j0 <= self.j_max) {
            return Err(NskError::Partition(format!(
                "threshold j0 = {j0} outside ({}, {}]",
                self.j_min, self.j_max
            )));
        }
        let n = self.grid.len();
        let mut low = Vec::with_capacity(n);
        let mut high = Vec::with_capacity(n);
        for (idx, &c) in f.coeffs().iter().enumerate() {
            let w_low: f64 = match self.memberships(idx) {
                None => 1.0,
                Some(m) => m.iter().filter(|(j, _)| *j < j0).map(|(_, w)| w).sum(),
            };
            let l = c * w_low;
            low.push(l);
            high.push(c - l);
        }
        let h = f.is_hermitian();
        Ok((
            SpectralField::from_coeffs(self.grid, low, h)?,
            SpectralField::from_coeffs(self.grid, high, h)?,
        ))
    }

    /// Chemin-Lerner norm `l^sigma_j 2^{sj} || phi_j f^ ||_{L^r_t L^{p'}}` of a
    /// sampled time series (trapezoid rule in time, sup for `r = inf`).
    pub fn chemin_lerner_norm(
        &self,
        times: &[f64],
        series: &[SpectralField],
        r: Index,
        spec: &BesovSpec,
    ) -> Result<f64> {
        spec.validate()?;
        r.validate("r")?;
        if series.is_empty() || times.len() != series.len() {
            return Err(NskError::Series("Chemin-Lerner norm needs a nonempty, time-stamped series".into()));
        }
        let shell_series =
            series.iter().map(|f| self.shell_norms(f, spec.p)).collect::<Result<Vec<_>>>()?;
        let per_shell = time_norms(times, &shell_series, r)?;
        Ok(self.combine(per_shell, spec.s, spec.sigma))
    }

    /// Checks Bernstein's two-sided estimate for a field supported in shell `j`.
    pub fn bernstein_audit(&self, f: &SpectralField, j: i32, s: f64) -> Result<BernsteinRatios> {
        self.check(f)?;
        let (lo, hi) = (2f64.powi(j - 1), 2f64.powi(j + 1));
        let scale = f.max_abs();
        let supported = f.coeffs().iter().enumerate().all(|(i, c)| {
            if c.norm() <= 1e-14 * scale {
                return true;
            }
            let r = self.grid.xi_norm2(i).sqrt();
            r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12)
        });
        if scale == 0.0 || !supported {
            return Err(NskError::NotShellSupported { shell: j });
        }
        let c = f.coeffs();
        let g = &self.grid;
        let lattice_norm = |q: Index, weight: &dyn Fn(usize) -> f64| -> f64 {
            let vals = (0..g.len()).map(|i| weight(i) * c[i].norm());
            if q.is_inf() {
                vals.fold(0.0, f64::max)
            } else {
                vals.map(|v| v.powf(q.0)).sum::<f64>().powf(1.0 / q.0)
            }
        };
        let riesz = |i: usize| if i == 0 { 0.0 } else { g.xi_norm2(i).powf(0.5 * s) };
        let one = |_: usize| 1.0;
        let scale_j = 2f64.powf(j as f64 * s);
        let ratio = |p: Index| {
            let q = p.conjugate();
            lattice_norm(q, &riesz) / (scale_j * lattice_norm(q, &one))
        };
        Ok(BernsteinRatios { p_one: ratio(Index(1.0)), p_inf: ratio(Index::INF) })
    }
}

/// `|| |grad|^s f ||_{L^p^} / (2^{js} || f ||_{L^p^})` at the two endpoint
/// Fourier-Lebesgue exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernsteinRatios {
    /// `p = 1`: sup of the coefficients.
    pub p_one: f64,
    /// `p = inf`: sum of the coefficients.
    pub p_inf: f64,
}

impl BernsteinRatios {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        [self.p_one, self.p_inf].iter().all(|&r| r >= lo && r <= hi)
    }
}

/// `L^r(t_0, t_N)` norm of each shell's time series (trapezoid rule).
pub fn time_norms(times: &[f64], shell_series: &[Vec<f64>], r: Index) -> Result<Vec<f64>> {
    if times.is_empty() || times.len() != shell_series.len() {
        return Err(NskError::Series("empty or mismatched time series".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(NskError::Series("times must be strictly increasing".into()));
    }
    let shells = shell_series[0].len();
    let mut out = vec![0.0; shells];
    for (j, slot) in out.iter_mut().enumerate() {
        if r.is_inf() {
            *slot = shell_series.iter().map(|v| v[j]).fold(0.0, f64::max);
        } else {
            let q = r.0;
            let integral: f64 = times
                .windows(2)
                .zip(shell_series.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0][j].powf(q) + v[1][j].powf(q)))
                .sum();
            *slot = integral.powf(1.0 / q);
        }
    }
    Ok(out)
}

/// Convenience for tests and probes: a field holding `amplitude` at one lattice mode and its mirror.
pub fn real_mode(grid: &Grid, k: &[i64], amplitude: f64) -> Result<SpectralField> {
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    let idx = grid.index_of(k);
    let neg = grid.negated_index(idx);
    c[idx] += amplitude;
    if neg != idx {
        c[neg] += amplitude;
    }
    SpectralField::from_coeffs(*grid, c, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::forward_transform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid2() -> Grid {
        Grid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn random_field(g: &Grid, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        forward_transform(g, &s).unwrap().dealias()
    }

    #[test]
    fn step_is_smooth_and_monotone() {
        let mut prev = 1.0;
        for i in 0..=300 {
            let r = i as f64 / 100.0;
            let v = smooth_step(r);
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
        assert_eq!(mother_profile(0.49), 0.0);
        assert_eq!(mother_profile(2.01), 0.0);
        assert_eq!(mother_profile(1.0), 1.0);
    }

    #[test]
    fn partition_of_unity_everywhere() {
        for g in [grid2(), Grid::new(3, 32, 40.0).unwrap(), Grid::new(2, 256, 300.0).unwrap()] {
            let part = DyadicPartition::new(&g).unwrap();
            for idx in 1..g.len() {
                let sum: f64 = part.shells().map(|j| part.weight(j, idx)).sum();
                assert!((sum - 1.0).abs() < 1e-12, "idx {idx}: {sum}");
            }
            assert!(part.shells().all(|j| part.weight(j, 0) == 0.0));
        }
    }

    #[test]
    fn interior_shells_respect_annulus_and_scaling() {
        let g = Grid::new(2, 128, 50.0).unwrap();
        let part = DyadicPartition::new(&g).unwrap();
        for j in part.j_min() + 1..part.j_max() {
            for idx in 1..g.len() {
                let r = g.xi_norm2(idx).sqrt();
                let w = part.weight(j, idx);
                if w > 0.0 {
                    assert!(r >= 2f64.powi(j - 1) && r <= 2f64.powi(j + 1));
                }
                assert!((w - mother_profile(r / 2f64.powi(j))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn range_matches_formula() {
        let g = Grid::new(2, 256, 100.0).unwrap();
        let part = DyadicPartition::new(&g).unwrap();
        assert_eq!(part.j_min(), (2.0 * std::f64::consts::PI / 100.0f64).log2().floor() as i32);
        assert_eq!(part.j_max(), (std::f64::consts::PI * 256.0 / 150.0f64).log2().ceil() as i32);
    }

    #[test]
    fn smallest_grids_host_four_shells() {
        for l in [0.01, 1.0, 7.0, 1e3] {
            let g = Grid::new(2, 16, l).unwrap();
            assert!(DyadicPartition::new(&g).unwrap().shell_count() >= 4);
        }
    }

    #[test]
    fn single_mode_norm() {
        // L = 2 pi => integer wavenumbers; |xi| = 4 = 2^2
        let g = grid2();
        let part = DyadicPartition::new(&g).unwrap();
        let amp = 0.7;
        let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
        c[g.index_of(&[4, 0])] = Complex64::new(amp, 0.0);
        let f = SpectralField::from_coeffs(g, c, false).unwrap();
        for p in [1.0, 2.0, 4.0 / 3.0, f64::INFINITY] {
            let spec = BesovSpec::fourier(0.0, p, 1.0);
            let pc = Index(p).conjugate();
            // direct summation over the three overlapping shells
            let w: f64 = (1..=3).map(|j| part.weight(j, g.index_of(&[4, 0]))).sum();
            let want = amp * g.lattice_measure().powf(pc.recip()) * w;
            let got = part.fourier_besov_norm(&f, &spec).unwrap();
            assert!((got - want).abs() < 1e-14, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn zero_field_and_homogeneity() {
        let g = grid2();
        let part = DyadicPartition::new(&g).unwrap();
        let z = SpectralField::zeros(g);
        let spec = BesovSpec::fourier(0.5, 2.0, 1.0);
        assert_eq!(part.fourier_besov_norm(&z, &spec).unwrap(), 0.0);
        assert_eq!(part.besov_norm(&z, &BesovSpec::besov(0.5, 3.0, 2.0)).unwrap(), 0.0);
        let f = random_field(&g, 5);
        let base = part.fourier_besov_norm(&f, &spec).unwrap();
        let scaled = part.fourier_besov_norm(&f.scaled(-3.5), &spec).unwrap();
        assert!((scaled - 3.5 * base).abs() < 1e-12 * scaled);
    }

    #[test]
    fn block_disjoint_support() {
        let g = grid2();
        let part = DyadicPartition::new(&g).unwrap();
        let f = real_mode(&g, &[16, 0], 1.0).unwrap(); // |xi| = 2^4
        assert_eq!(part.block(&f, 1).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn plancherel_equivalence() {
        let g = grid2();
        let part = DyadicPartition::new(&g).unwrap();
        let f = random_field(&g, 11);
        for sigma in [1.0, 2.0, f64::INFINITY] {
            let a = part.fourier_besov_norm(&f, &BesovSpec::fourier(0.3, 2.0, sigma)).unwrap();
            let b = part.besov_norm(&f, &BesovSpec::besov(0.3, 2.0, sigma)).unwrap();
            assert!((a - b).abs() < 1e-10 * a);
        }
    }

    #[test]
    fn besov_sup_norm_of_one_shell() {
        let g = grid2();
        let part = DyadicPartition::new(&g).unwrap();
        let f = part.block(&random_field(&g, 3), 3).unwrap();
        // direct max oracle over physical samples of each block
        let want: f64 = part
            .shells()
            .map(|j| {
                let b = inverse_transform(&part.block(&f, j).unwrap());
                b.iter().map(|x| x.abs()).fold(0.0, f64::max)
            })
            .sum();
        let got = part.besov_norm(&f, &BesovSpec::besov(0.0, f64::INFINITY, 1.0)).unwrap();
        assert!((got - want).abs() < 1e-14 * want);
    }

    #[test]
    fn split_reassembles() {
        let g = grid2();
        let part = DyadicPartition::new(&g).unwrap();
        let f = random_field(&g, 8);
        let (lo, hi) = part.low_high_split(&f, 3).unwrap();
        let back = lo.add(&hi).unwrap();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
        let j0 = 5;
        let low_mode = real_mode(&g, &[2, 0], 1.0).unwrap(); // 2^{j0-4}
        assert_eq!(part.low_high_split(&low_mode, j0).unwrap().1.max_abs(), 0.0);
        let g_big = Grid::new(2, 1024, 2.0 * std::f64::consts::PI).unwrap();
        let pb = DyadicPartition::new(&g_big).unwrap();
        let high_mode = real_mode(&g_big, &[2i64.pow(5 + 4), 0], 1.0).unwrap();
        assert_eq!(pb.low_high_split(&high_mode, j0).unwrap().0.max_abs(), 0.0);
        assert!(part.low_high_split(&f, part.j_min()).is_err());
        assert!(part.low_high_split(&f, part.j_max() + 1).is_err());
    }

    #[test]
    fn chemin_lerner_reductions() {
        let g = grid2();
        let part = DyadicPartition::new(&g).unwrap();
        let f = random_field(&g, 2);
        let spec = BesovSpec::fourier(0.5, 2.0, 1.0);
        let times = [0.0, 0.5, 1.0];
        let constant = vec![f.clone(), f.clone(), f.clone()];
        let cl = part.chemin_lerner_norm(&times, &constant, Index::INF, &spec).unwrap();
        assert!((cl - part.fourier_besov_norm(&f, &spec).unwrap()).abs() < 1e-14);

        // r = sigma = 1: Chemin-Lerner equals the Bochner L^1 norm
        let series: Vec<_> = [1.0, 0.4, 0.1].iter().map(|&c| f.scaled(c)).collect();
        let cl1 = part.chemin_lerner_norm(&times, &series, Index(1.0), &spec).unwrap();
        let norms: Vec<f64> = series.iter().map(|s| part.fourier_besov_norm(s, &spec).unwrap()).collect();
        let bochner = 0.25 * (norms[0] + norms[1]) + 0.25 * (norms[1] + norms[2]);
        assert!((cl1 - bochner).abs() < 1e-13 * bochner);

        // single block: scalar quadrature of that block's norm
        let one = part.block(&f, 2).unwrap();
        let q = Index(2.0);
        let s2: Vec<_> = [1.0, 2.0, 0.5].iter().map(|&c| one.scaled(c)).collect();
        let got = part.chemin_lerner_norm(&times, &s2, q, &BesovSpec::fourier(0.0, 2.0, 1.0)).unwrap();
        let per_shell: Vec<Vec<f64>> = s2.iter().map(|x| part.shell_norms(x, Index(2.0)).unwrap()).collect();
        let mut want = 0.0;
        for j in 0..part.shell_count() {
            let v: Vec<f64> = per_shell.iter().map(|s| s[j] * s[j]).collect();
            want += (0.25 * (v[0] + v[1]) + 0.25 * (v[1] + v[2])).sqrt();
        }
        assert!((got - want).abs() < 1e-13 * want);

        assert!(part.chemin_lerner_norm(&[], &[], Index::INF, &spec).is_err());
        assert!(part.chemin_lerner_norm(&[1.0, 1.0], &series[..2], Index::INF, &spec).is_err());
    }

    #[test]
    fn bernstein_single_mode_and_zero_order() {
        let g = grid2();
        let part = DyadicPartition::new(&g).unwrap();
        let f = real_mode(&g, &[0, 8], 1.0).unwrap(); // |xi| = 2^3
        for s in [-1.5, 0.0, 1.0, 2.5] {
            let r = part.bernstein_audit(&f, 3, s).unwrap();
            assert!((r.p_one - 1.0).abs() < 1e-12 && (r.p_inf - 1.0).abs() < 1e-12);
        }
        let rnd = part.block(&random_field(&g, 4), 3).unwrap();
        let r0 = part.bernstein_audit(&rnd, 3, 0.0).unwrap();
        assert_eq!((r0.p_one, r0.p_inf), (1.0, 1.0));
        assert!(matches!(part.bernstein_audit(&rnd, 1, 1.0), Err(NskError::NotShellSupported { shell: 1 })));
    }

    #[test]
    fn index_serde() {
        let spec: BesovSpec =
            serde_json::from_str(r#"{"s":0.5,"p":"inf","sigma":2,"flavor":"fourier_besov"}"#).unwrap();
        assert!(spec.p.is_inf());
        assert_eq!(spec.sigma.0, 2.0);
        let back = serde_json::to_string(&spec).unwrap();
        assert!(back.contains("\"inf\""));
        assert_eq!(Index(1.0).conjugate(), Index::INF);
        assert_eq!(Index(2.0).conjugate(), Index(2.0));
    }
}
