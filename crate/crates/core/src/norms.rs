//! Lebesgue and Sobolev norms on the torus.
//!
//! `L^p` norms are uniform-grid quadratures `(Σ_x |f(x)|^p h^3)^{1/p}`;
//! Sobolev norms are spectral sums normalized so that the homogeneous
//! order-zero norm equals the `L^2` quadrature.

use crate::error::{Error, Result};
use crate::field::{magnitude, SpectralField};
use crate::operators::physical;

/// `‖f‖_p` for `p ∈ [1, ∞]`; vector fields use the pointwise Euclidean
/// magnitude.
pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(lp_norm_samples(&physical(f), f.components(), f.grid().len(), f.grid().cell_volume(), p))
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "L^p norm needs p >= 1, got {p}"
        )));
    }
    Ok(())
}

/// `L^p` quadrature over flat samples.
pub(crate) fn lp_norm_samples(samples: &[f64], comps: usize, len: usize, cell: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return (0..len)
            .map(|i| magnitude(samples, comps, len, i))
            .fold(0.0, f64::max);
    }
    let sum: f64 = if p == 2.0 {
        samples.iter().map(|x| x * x).sum()
    } else {
        (0..len).map(|i| magnitude(samples, comps, len, i).powf(p)).sum()
    };
    (sum * cell).powf(1.0 / p)
}

/// `‖f‖_p^p`, used by the damping entries of the energy budget.
pub(crate) fn lp_power_samples(samples: &[f64], comps: usize, len: usize, cell: f64, p: f64) -> f64 {
    let sum: f64 = (0..len).map(|i| magnitude(samples, comps, len, i).powf(p)).sum();
    sum * cell
}

/// Homogeneous `‖Λ^s f‖` or inhomogeneous `(‖f‖² + ‖Λ^s f‖²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64, homogeneous: bool) -> Result<f64> {
    Ok(sobolev_norm_sq(f, s, homogeneous)?.sqrt())
}

pub fn sobolev_norm_sq(f: &SpectralField, s: f64, homogeneous: bool) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Sobolev order must be >= 0, got {s}"
        )));
    }
    let grid = f.grid();
    let len = grid.len();
    let mut sum = 0.0;
    for c in 0..f.components() {
        for (idx, z) in f.component(c).iter().enumerate() {
            let k2 = grid.k_squared(idx);
            // Λ^0 is the identity, including on the mean mode
            let lam = if s == 0.0 { 1.0 } else { k2.powf(s) };
            let w = if homogeneous { lam } else { 1.0 + lam };
            sum += w * z.norm_sqr();
        }
    }
    debug_assert!(len > 0);
    Ok(sum * grid.parseval_factor())
}

/// `‖∇f‖²` summed over components.
pub fn gradient_norm_sq(f: &SpectralField) -> f64 {
    sobolev_norm_sq(f, 1.0, true).expect("order 1 is valid")
}
