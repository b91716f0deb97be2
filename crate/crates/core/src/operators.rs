//! Differential operators and the pseudo-spectral nonlinear terms of the
//! damped tropical climate system.
//!
//! Products are formed pointwise on the grid and transformed back, after
//! which the 2/3-rule mask is applied. When the inputs themselves live
//! inside the mask, every triple product integrates exactly on the grid,
//! so the transport and coupling identities cancel to round-off.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{magnitude, SpectralField};
use crate::grid::Grid;

/// Which groups of terms the right-hand side includes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    /// `(u·∇)u`, `div(v⊗v)`, `(u·∇)v`, `(v·∇)u`, `(u·∇)θ`.
    pub transport: bool,
    /// The linear `∇θ` and `div v` exchange between `v` and `θ`.
    pub coupling: bool,
    /// `σ₁|u|^{α-1}u` and `σ₂|v|^{β-1}v`.
    pub damping: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Self {
            transport: true,
            coupling: true,
            damping: true,
        }
    }
}

impl Terms {
    /// Diffusion only.
    pub fn none() -> Self {
        Self {
            transport: false,
            coupling: false,
            damping: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub nu: f64,
    pub eta: f64,
    pub mu: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub terms: Terms,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            nu: 1.0,
            eta: 1.0,
            mu: 1.0,
            sigma1: 1.0,
            sigma2: 1.0,
            alpha: 3.0,
            beta: 3.0,
            terms: Terms::default(),
        }
    }
}

impl ModelParams {
    /// Checks the admissible ranges; the message names the violated bound.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("nu", self.nu), ("eta", self.eta), ("mu", self.mu)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        for (name, value) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            let ok = if self.terms.damping {
                value > 0.0
            } else {
                value >= 0.0
            };
            if !(value.is_finite() && ok) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(3.0..4.0).contains(&value) {
                return Err(Error::InvalidParams(format!(
                    "{name} must satisfy 3 <= {name} < 4 (admissible damping exponent range), got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Fractional Laplacian `Λ^s`: multiplies each mode by `|k|^s`. For
/// `s > 0` the mean mode is annihilated; `s = 0` is the identity.
pub fn lambda_s(f: &SpectralField, s: f64) -> Result<SpectralField> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Λ^s needs s >= 0, got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    let grid = f.grid().clone();
    Ok(f.apply_multiplier(|idx| grid.k_squared(idx).powf(0.5 * s)))
}

/// `Δf` (multiplier `-|k|^2`).
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let grid = f.grid().clone();
    f.apply_multiplier(|idx| -grid.k_squared(idx))
}

/// `∇f` of a scalar field.
pub fn gradient(f: &SpectralField) -> Result<SpectralField> {
    f.expect_components(1)?;
    let grid = f.grid().clone();
    let len = grid.len();
    let src = f.coeffs();
    let mut out = SpectralField::zeros(&grid, 3);
    out.coeffs_mut()
        .par_chunks_mut(len)
        .enumerate()
        .for_each(|(axis, comp)| {
            for (idx, c) in comp.iter_mut().enumerate() {
                let k = grid.deriv_vector(idx)[axis];
                *c = Complex64::new(0.0, k) * src[idx];
            }
        });
    Ok(out)
}

/// `div w` of a vector field.
pub fn divergence(w: &SpectralField) -> Result<SpectralField> {
    w.expect_components(3)?;
    let grid = w.grid().clone();
    let len = grid.len();
    let mut out = SpectralField::zeros(&grid, 1);
    let (a, b, c) = (w.component(0), w.component(1), w.component(2));
    out.coeffs_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(idx, d)| {
            let k = grid.deriv_vector(idx);
            *d = Complex64::new(0.0, 1.0) * (a[idx] * k[0] + b[idx] * k[1] + c[idx] * k[2]);
        });
    debug_assert_eq!(out.coeffs().len(), len);
    Ok(out)
}

/// Flat physical samples `(component, x, y, z)`.
pub(crate) fn physical(f: &SpectralField) -> Vec<f64> {
    f.to_physical().into_raw_vec_and_offset().0
}

/// Physical samples of `∂_j f_c`, laid out as `(c * 3 + j, x, y, z)`.
pub(crate) fn physical_gradient(f: &SpectralField) -> Vec<f64> {
    let grid = f.grid();
    let len = grid.len();
    let derivs: Vec<Vec<Complex64>> = (0..f.components())
        .flat_map(|c| (0..3).map(move |j| (c, j)))
        .map(|(c, j)| {
            f.component(c)
                .iter()
                .enumerate()
                .map(|(idx, z)| Complex64::new(0.0, grid.deriv_vector(idx)[j]) * z)
                .collect()
        })
        .collect();
    let spectra: Vec<&[Complex64]> = derivs.iter().map(Vec::as_slice).collect();
    let mut out = vec![0.0; 3 * f.components() * len];
    grid.inverse_real(&spectra, &mut out);
    out
}

/// Transforms flat samples and applies the dealiasing mask.
pub(crate) fn dealiased_spectral(grid: &Grid, components: usize, flat: &[f64]) -> SpectralField {
    let mut f = SpectralField::zeros(grid, components);
    f.load_physical(flat);
    f.dealiased()
}

/// Pointwise `(a·∇)w` from physical `a` and physical `∇w`.
pub(crate) fn advect_samples(len: usize, a: &[f64], grad_w: &[f64], wcomps: usize) -> Vec<f64> {
    let mut out = vec![0.0; wcomps * len];
    out.par_chunks_mut(len).enumerate().for_each(|(c, dst)| {
        for (p, d) in dst.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..3 {
                s += a[j * len + p] * grad_w[(c * 3 + j) * len + p];
            }
            *d = s;
        }
    });
    out
}

/// Pointwise `σ |w|^{γ-1} w`.
pub(crate) fn damping_samples(w: &[f64], comps: usize, len: usize, sigma: f64, exponent: f64) -> Vec<f64> {
    let factor: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|p| sigma * magnitude(w, comps, len, p).powf(exponent - 1.0))
        .collect();
    let mut out = w.to_vec();
    out.par_chunks_mut(len).for_each(|comp| {
        for (x, f) in comp.iter_mut().zip(&factor) {
            *x *= f;
        }
    });
    out
}

/// Dealiased `(a·∇)w` for a vector field `a` and a scalar or vector `w`.
pub fn advect(a: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    a.expect_components(3)?;
    if a.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = a.grid();
    let samples = advect_samples(grid.len(), &physical(a), &physical_gradient(w), w.components());
    Ok(dealiased_spectral(grid, w.components(), &samples))
}

/// Spectral `∂_j` applied to products formed on the grid: component `i`
/// is `Σ_j ∂_j (v_j v_i)`, dealiased.
pub(crate) fn div_tensor_samples(grid: &Grid, v: &[f64]) -> SpectralField {
    let len = grid.len();
    let mut out = SpectralField::zeros(grid, 3);
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let products: Vec<SpectralField> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let prod: Vec<f64> = (0..len).map(|p| v[i * len + p] * v[j * len + p]).collect();
            let mut f = SpectralField::zeros(grid, 1);
            f.load_physical(&prod);
            f
        })
        .collect();
    let slot = |i: usize, j: usize| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        pairs.iter().position(|&p| p == (a, b)).expect("pair listed")
    };
    for i in 0..3 {
        let comp = out.component_mut(i);
        for (idx, c) in comp.iter_mut().enumerate() {
            let k = grid.deriv_vector(idx);
            let mut s = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                s += products[slot(i, j)].coeffs()[idx] * *kj;
            }
            *c = Complex64::new(0.0, 1.0) * s;
        }
    }
    out.dealiased()
}

/// Dealiased `div(v⊗v)`.
pub fn div_tensor(v: &SpectralField) -> Result<SpectralField> {
    v.expect_components(3)?;
    Ok(div_tensor_samples(v.grid(), &physical(v)))
}

/// Dealiased `σ |w|^{γ-1} w`, with `|·|` the Euclidean magnitude over
/// components. The power is taken pointwise for any real `γ >= 1`.
pub fn damping(w: &SpectralField, sigma: f64, exponent: f64) -> Result<SpectralField> {
    if !(exponent >= 1.0 && exponent.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "damping exponent must be >= 1, got {exponent}"
        )));
    }
    let grid = w.grid();
    let samples = damping_samples(&physical(w), w.components(), grid.len(), sigma, exponent);
    Ok(dealiased_spectral(grid, w.components(), &samples))
}

/// The five transport terms of the system, each dealiased:
/// `(u·∇)u`, `div(v⊗v)`, `(u·∇)v`, `(v·∇)u`, `(u·∇)θ`.
#[derive(Clone, Debug)]
pub struct TransportTerms {
    pub u_adv_u: SpectralField,
    pub div_vv: SpectralField,
    pub u_adv_v: SpectralField,
    pub v_adv_u: SpectralField,
    pub u_adv_theta: SpectralField,
}

impl TransportTerms {
    pub fn compute(u: &SpectralField, v: &SpectralField, theta: &SpectralField) -> Result<Self> {
        u.expect_components(3)?;
        v.expect_components(3)?;
        theta.expect_components(1)?;
        if u.grid() != v.grid() || u.grid() != theta.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_samples(u, v, theta, &physical(u), &physical(v)))
    }

    /// Same as [`TransportTerms::compute`] with `u`, `v` already sampled.
    pub(crate) fn from_samples(
        u: &SpectralField,
        v: &SpectralField,
        theta: &SpectralField,
        u_phys: &[f64],
        v_phys: &[f64],
    ) -> Self {
        let grid = u.grid();
        let len = grid.len();
        let grad_u = physical_gradient(u);
        let grad_v = physical_gradient(v);
        let grad_t = physical_gradient(theta);
        let spectral = |a: &[f64], grad: &[f64], comps: usize| {
            dealiased_spectral(grid, comps, &advect_samples(len, a, grad, comps))
        };
        Self {
            u_adv_u: spectral(u_phys, &grad_u, 3),
            div_vv: div_tensor_samples(grid, v_phys),
            u_adv_v: spectral(u_phys, &grad_v, 3),
            v_adv_u: spectral(v_phys, &grad_u, 3),
            u_adv_theta: spectral(u_phys, &grad_t, 1),
        }
    }
}
