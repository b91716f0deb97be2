//! Sharp-annulus Littlewood–Paley decomposition and the homogeneous Besov
//! norms `Ḃ⁰_{∞,∞}` and `Ḃ⁰_{∞,2}`.
//!
//! Block `j` holds the modes with `2^j <= |k| < 2^{j+1}`. The blocks
//! partition every nonzero wavenumber, so the mean mode plus the sum of
//! all blocks reproduces the field exactly.

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::{magnitude, SpectralField};
use crate::grid::Grid;
use crate::operators::physical;

#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    /// Block index of every flat mode; `None` for the mean mode.
    block_of: Vec<Option<i32>>,
}

/// Output of [`DyadicDecomposition::dyadic_block`].
#[derive(Clone, Debug)]
pub struct Block {
    pub field: SpectralField,
    /// Set when the requested index lies outside `[j_min, j_max]`; the
    /// field is then zero.
    pub out_of_range: bool,
}

/// `floor(log2 |k|)` from `|k|^2`, exact at powers of two.
fn block_index(k2: f64) -> i32 {
    let mut j = (0.5 * k2.log2()).floor() as i32;
    while 4f64.powi(j) > k2 {
        j -= 1;
    }
    while 4f64.powi(j + 1) <= k2 {
        j += 1;
    }
    j
}

impl DyadicDecomposition {
    pub fn new(grid: &Grid) -> Self {
        let block_of: Vec<Option<i32>> = (0..grid.len())
            .map(|idx| {
                let k2 = grid.k_squared(idx);
                (k2 > 0.0).then(|| block_index(k2))
            })
            .collect();
        let j_min = block_of.iter().flatten().copied().min().unwrap_or(0);
        let j_max = block_of.iter().flatten().copied().max().unwrap_or(0);
        Self {
            grid: grid.clone(),
            j_min,
            j_max,
            block_of,
        }
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Block index of the mode at flat index `idx`.
    pub fn block_of(&self, idx: usize) -> Option<i32> {
        self.block_of[idx]
    }

    /// `Δ_j f`: `f` restricted to `2^j <= |k| < 2^{j+1}`.
    pub fn dyadic_block(&self, f: &SpectralField, j: i32) -> Block {
        assert!(f.grid() == &self.grid, "field and decomposition grids differ");
        if j < self.j_min || j > self.j_max {
            warn!(
                "dyadic block {j} outside [{}, {}]; returning zero",
                self.j_min, self.j_max
            );
            return Block {
                field: SpectralField::zeros(&self.grid, f.components()),
                out_of_range: true,
            };
        }
        Block {
            field: self.restrict(f, j),
            out_of_range: false,
        }
    }

    fn restrict(&self, f: &SpectralField, j: i32) -> SpectralField {
        let len = self.grid.len();
        let mut out = f.clone();
        out.coeffs_mut().par_chunks_mut(len).for_each(|comp| {
            for (idx, c) in comp.iter_mut().enumerate() {
                if self.block_of[idx] != Some(j) {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        });
        out
    }

    /// `‖Δ_j f‖_∞` for every block index, in increasing `j`.
    pub fn block_sup_norms(&self, f: &SpectralField) -> Vec<(i32, f64)> {
        let len = self.grid.len();
        let comps = f.components();
        (self.j_min..=self.j_max)
            .map(|j| {
                let block = self.restrict(f, j);
                if block.max_abs() == 0.0 {
                    return (j, 0.0);
                }
                let samples = physical(&block);
                let sup = (0..len)
                    .into_par_iter()
                    .map(|p| magnitude(&samples, comps, len, p))
                    .reduce(|| 0.0, f64::max);
                (j, sup)
            })
            .collect()
    }

    /// `‖f‖_{Ḃ⁰_{∞,∞}} = sup_j ‖Δ_j f‖_∞`.
    pub fn besov_b0_inf_inf(&self, f: &SpectralField) -> f64 {
        self.block_sup_norms(f)
            .into_iter()
            .map(|(_, s)| s)
            .fold(0.0, f64::max)
    }

    /// `‖f‖_{Ḃ⁰_{∞,2}} = (Σ_j ‖Δ_j f‖_∞²)^{1/2}`, the majorant used in
    /// place of the BMO norm.
    pub fn bmo_proxy(&self, f: &SpectralField) -> f64 {
        self.block_sup_norms(f)
            .into_iter()
            .map(|(_, s)| s * s)
            .sum::<f64>()
            .sqrt()
    }
}

/// `‖f‖_{Ḃ⁰_{∞,∞}}` on the field's own grid.
pub fn besov_b0_inf_inf(f: &SpectralField) -> f64 {
    DyadicDecomposition::new(f.grid()).besov_b0_inf_inf(f)
}

/// `‖f‖_{Ḃ⁰_{∞,2}}` on the field's own grid.
pub fn bmo_proxy(f: &SpectralField) -> f64 {
    DyadicDecomposition::new(f.grid()).bmo_proxy(f)
}
