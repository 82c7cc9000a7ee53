//! Binary state snapshots.
//!
//! Layout (little-endian): magic `NSKSNAP\0`, `u32` version, `u32` d, `u32` n,
//! `f64` L, `f64` time, 32-byte params hash, then `d + 1` components of `n^d`
//! complex coefficients, each as `(re: f64, im: f64)`.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{NskError, Result};
use crate::field::{Grid, SpectralField, SpectralState};
use crate::params::FluidParams;

pub const MAGIC: [u8; 8] = *b"NSKSNAP\0";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 * 3 + 8 * 2 + 32;

/// SHA-256 of the canonical JSON form of `params`.
pub fn params_hash(params: &FluidParams) -> [u8; 32] {
    let json = serde_json::to_vec(params).expect("params serialize");
    Sha256::digest(json).into()
}

pub fn hex(hash: &[u8; 32]) -> String {
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub state: SpectralState,
    pub params_hash: [u8; 32],
}

pub fn encode(state: &SpectralState, params: &FluidParams) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + (g.dim() + 1) * g.len() * 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.box_len().to_le_bytes());
    out.extend_from_slice(&state.time.to_le_bytes());
    out.extend_from_slice(&params_hash(params));
    for c in state.components() {
        for z in c.coeffs() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn take<'a>(buf: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if buf.len() < n {
        return Err(NskError::Snapshot("truncated file".into()));
    }
    let (head, rest) = buf.split_at(n);
    *buf = rest;
    Ok(head)
}

fn u32_at(buf: &mut &[u8]) -> Result<u32> {
    Ok(u32::from_le_bytes(take(buf, 4)?.try_into().unwrap()))
}

fn f64_at(buf: &mut &[u8]) -> Result<f64> {
    Ok(f64::from_le_bytes(take(buf, 8)?.try_into().unwrap()))
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    let mut buf = bytes;
    if take(&mut buf, 8)? != MAGIC {
        return Err(NskError::Snapshot("bad magic".into()));
    }
    let version = u32_at(&mut buf)?;
    if version != VERSION {
        return Err(NskError::Snapshot(format!("unsupported version {version}, expected {VERSION}")));
    }
    let d = u32_at(&mut buf)? as usize;
    let n = u32_at(&mut buf)? as usize;
    let l = f64_at(&mut buf)?;
    let time = f64_at(&mut buf)?;
    let hash: [u8; 32] = take(&mut buf, 32)?.try_into().unwrap();
    let grid = Grid::new(d, n, l).map_err(|e| NskError::Snapshot(format!("header: {e}")))?;
    if !(time.is_finite() && time >= 0.0) {
        return Err(NskError::Snapshot(format!("header: bad time {time}")));
    }
    let expected = (d + 1) * grid.len() * 16;
    if buf.len() != expected {
        return Err(NskError::Snapshot(if buf.len() < expected {
            "truncated file".into()
        } else {
            format!("{} trailing bytes", buf.len() - expected)
        }));
    }
    let mut comps = Vec::with_capacity(d + 1);
    for _ in 0..=d {
        let mut c = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = f64_at(&mut buf)?;
            let im = f64_at(&mut buf)?;
            c.push(Complex64::new(re, im));
        }
        comps.push(SpectralField::from_raw(grid, c, true));
    }
    let a = comps.remove(0);
    Ok(Snapshot { state: SpectralState::new(a, comps, time)?, params_hash: hash })
}

pub fn write(path: &Path, state: &SpectralState, params: &FluidParams) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(state, params))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

impl Snapshot {
    /// Warning text when the snapshot was written under different parameters.
    pub fn hash_warning(&self, params: &FluidParams) -> Option<String> {
        let now = params_hash(params);
        (now != self.params_hash).then(|| {
            format!(
                "snapshot params hash {} differs from current {}; resuming anyway",
                hex(&self.params_hash),
                hex(&now)
            )
        })
    }
}
