//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `TCMD`                              |
//! | 4     | version (`u32`, currently 1)              |
//! | 4     | `n` (`u32`)                               |
//! | 8     | time (`f64`)                              |
//! | …     | `u`, `v`, `θ` coefficients as `(re, im)` `f64` pairs, in `(component, kx, ky, kz)` order |

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{SpectralField, State};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"TCMD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;
/// Largest Hermitian defect accepted on load, relative to the largest
/// coefficient.
pub const HERMITIAN_TOL: f64 = 1e-10;

fn payload_len(n: usize) -> usize {
    7 * n * n * n * 16
}

pub fn encode_checkpoint(state: &State) -> Vec<u8> {
    let n = state.grid().n();
    let mut out = Vec::with_capacity(HEADER_LEN + payload_len(n));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&state.time.to_le_bytes());
    for f in [&state.u, &state.v, &state.theta] {
        for z in f.coeffs() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

/// Writes through a temporary sibling file, so an interrupted write never
/// leaves a truncated checkpoint at `path`.
pub fn write_checkpoint(path: &Path, state: &State) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, encode_checkpoint(state))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads a checkpoint onto the default `[0, 2π)³` grid of its size.
pub fn read_checkpoint(path: &Path) -> Result<State> {
    let bytes = fs::read(path)?;
    decode_checkpoint(&bytes, None).map_err(|reason| Error::Checkpoint {
        path: path.to_path_buf(),
        reason,
    })
}

/// Loads a checkpoint onto `grid`, which must have the stored size.
pub fn read_checkpoint_on(path: &Path, grid: &Grid) -> Result<State> {
    let bytes = fs::read(path)?;
    decode_checkpoint(&bytes, Some(grid)).map_err(|reason| Error::Checkpoint {
        path: path.to_path_buf(),
        reason,
    })
}

fn word(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn real(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode_checkpoint(bytes: &[u8], grid: Option<&Grid>) -> std::result::Result<State, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return Err(format!("bad magic {:?}", &bytes[..4]));
    }
    let version = word(bytes, 4);
    if version != VERSION {
        return Err(format!("unsupported version {version} (expected {VERSION})"));
    }
    let n = word(bytes, 8) as usize;
    let time = real(bytes, 12);
    let expected = HEADER_LEN + payload_len(n);
    if bytes.len() != expected {
        return Err(format!(
            "size mismatch for n = {n}: expected {expected} bytes, got {}",
            bytes.len()
        ));
    }
    let grid = match grid {
        Some(g) if g.n() != n => return Err(format!("stored n = {n} but grid has n = {}", g.n())),
        Some(g) => g.clone(),
        None => Grid::new(n).map_err(|e| e.to_string())?,
    };
    let len = grid.len();
    let mut at = HEADER_LEN;
    let mut take = |components: usize| {
        let coeffs: Vec<Complex64> = (0..components * len)
            .map(|_| {
                let z = Complex64::new(real(bytes, at), real(bytes, at + 8));
                at += 16;
                z
            })
            .collect();
        SpectralField::from_coeffs(&grid, components, coeffs).map_err(|e| e.to_string())
    };
    let u = take(3)?;
    let v = take(3)?;
    let theta = take(1)?;
    let state = State::new(u, v, theta, time).map_err(|e| e.to_string())?;
    let defect = state.hermitian_defect();
    if !(defect <= HERMITIAN_TOL) {
        return Err(format!("Hermitian symmetry violated (relative defect {defect:.3e})"));
    }
    Ok(state)
}
