use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};

/// Periodic box `[0, L)^d` sampled with `n` points per axis.
///
/// Frequencies live on the lattice `xi_k = (2 pi / L) k` with
/// `k_i in [-n/2, n/2)`. Flat indices are row-major, axis 0 slowest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    box_len: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, box_len: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(NskError::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(NskError::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {n}"
            )));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(NskError::InvalidGrid(format!("box length must be positive, got {box_len}")));
        }
        Ok(Self { dim, n, box_len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    /// Total number of lattice points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing in frequency, `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_len
    }

    pub fn dx(&self) -> f64 {
        self.box_len / self.n as f64
    }

    /// Frequency-lattice cell volume `(2 pi / L)^d`.
    pub fn lattice_measure(&self) -> f64 {
        self.dk().powi(self.dim as i32)
    }

    /// Integer wavenumber for a per-axis index.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn axis_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Per-axis indices of a flat index (unused trailing entries are 0).
    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [idx / n, idx % n, 0],
            _ => [idx / (n * n), (idx / n) % n, idx % n],
        }
    }

    #[inline]
    pub fn flat_index(&self, c: [usize; 3]) -> usize {
        match self.dim {
            2 => c[0] * self.n + c[1],
            _ => (c[0] * self.n + c[1]) * self.n + c[2],
        }
    }

    /// Integer wavevector of a flat index.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let c = self.coords(idx);
        let mut k = [0i64; 3];
        for a in 0..self.dim {
            k[a] = self.wavenumber(c[a]);
        }
        k
    }

    /// Physical frequency of a flat index.
    #[inline]
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let k = self.wavevector(idx);
        let dk = self.dk();
        [k[0] as f64 * dk, k[1] as f64 * dk, k[2] as f64 * dk]
    }

    #[inline]
    pub fn xi_norm2(&self, idx: usize) -> f64 {
        let x = self.xi(idx);
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    }

    /// Flat index of the mode `-k` (the Nyquist index maps to itself).
    #[inline]
    pub fn negated_index(&self, idx: usize) -> usize {
        let c = self.coords(idx);
        let n = self.n;
        let mut m = [0usize; 3];
        for a in 0..self.dim {
            m[a] = (n - c[a]) % n;
        }
        self.flat_index(m)
    }

    pub fn index_of(&self, k: &[i64]) -> usize {
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            c[a] = self.axis_index(k[a]);
        }
        self.flat_index(c)
    }

    /// True when some component sits on the unpaired row `k_i = -n/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        c[..self.dim].contains(&(self.n / 2))
    }

    /// True when every `|k_i| <= n/3` (kept by the 2/3 rule).
    #[inline]
    pub fn in_dealias_band(&self, idx: usize) -> bool {
        let k = self.wavevector(idx);
        k[..self.dim].iter().all(|&ki| 3 * ki.unsigned_abs() as usize <= self.n)
    }

    /// Physical coordinate of a grid point.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let h = self.dx();
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Largest per-axis frequency kept by the dealiasing rule.
    pub fn dealiased_max_frequency(&self) -> f64 {
        PI * self.n as f64 / (1.5 * self.box_len)
    }
}
