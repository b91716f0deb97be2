//! Spectral fields, the model state, and the Leray projector.

use ndarray::{Array4, ArrayView1};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Physical-space samples, shape `(components, n, n, n)`.
pub type PhysicalField = Array4<f64>;

/// Which real trigonometric function a single mode represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Cos,
    Sin,
}

/// Fourier coefficients of a real scalar (1 component) or vector
/// (3 components) field, stored row-major as `(component, kx, ky, kz)`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    components: usize,
    coeffs: Vec<Complex64>,
    zero_mean: bool,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.components == other.components && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(grid: &Grid, components: usize) -> Self {
        assert!(
            components == 1 || components == 3,
            "fields have 1 or 3 components"
        );
        Self {
            grid: grid.clone(),
            components,
            coeffs: vec![ZERO; components * grid.len()],
            zero_mean: false,
        }
    }

    pub fn from_coeffs(grid: &Grid, components: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if components != 1 && components != 3 {
            return Err(Error::ComponentMismatch {
                expected: 3,
                got: components,
            });
        }
        if coeffs.len() != components * grid.len() {
            return Err(Error::ShapeMismatch {
                expected: vec![components * grid.len()],
                got: vec![coeffs.len()],
            });
        }
        Ok(Self {
            grid: grid.clone(),
            components,
            coeffs,
            zero_mean: false,
        })
    }

    /// Field whose component `component` is `amplitude · cos(k·x)` (or
    /// `sin`), all other components zero. `k` is an integer lattice vector.
    pub fn single_mode(
        grid: &Grid,
        components: usize,
        component: usize,
        k: [i64; 3],
        amplitude: f64,
        phase: Phase,
    ) -> Result<Self> {
        let mut f = Self::zeros(grid, components);
        f.add_mode(component, k, amplitude, phase)?;
        Ok(f)
    }

    /// Adds `amplitude · cos(k·x)` (or `sin`) to one component.
    pub fn add_mode(&mut self, component: usize, k: [i64; 3], amplitude: f64, phase: Phase) -> Result<()> {
        if component >= self.components {
            return Err(Error::InvalidArgument(format!(
                "component {component} out of range for a {}-component field",
                self.components
            )));
        }
        let pos = |k: i64| {
            self.grid.position_of(k).ok_or_else(|| {
                Error::InvalidArgument(format!("wavenumber {k} not representable on n={}", self.grid.n()))
            })
        };
        let (i, j, l) = (pos(k[0])?, pos(k[1])?, pos(k[2])?);
        let idx = self.grid.flat(i, j, l);
        let mirror = self.grid.mirror(idx);
        let half = 0.5 * self.grid.len() as f64 * amplitude;
        let base = component * self.grid.len();
        if idx == mirror {
            // self-conjugate mode (zero or Nyquist): only cos survives sampling
            if phase == Phase::Cos {
                self.coeffs[base + idx] += Complex64::new(2.0 * half, 0.0);
            }
            return Ok(());
        }
        let c = match phase {
            Phase::Cos => Complex64::new(half, 0.0),
            Phase::Sin => Complex64::new(0.0, -half),
        };
        self.coeffs[base + idx] += c;
        self.coeffs[base + mirror] += c.conj();
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        self.zero_mean = false;
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        self.zero_mean = false;
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Scalar field holding component `c`.
    pub fn extract(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            components: 1,
            coeffs: self.component(c).to_vec(),
            zero_mean: self.zero_mean,
        }
    }

    /// Vector field from three scalar fields.
    pub fn stack(parts: [&SpectralField; 3]) -> Result<SpectralField> {
        let grid = parts[0].grid.clone();
        let mut coeffs = Vec::with_capacity(3 * grid.len());
        for p in parts {
            if p.grid != grid {
                return Err(Error::GridMismatch);
            }
            if p.components != 1 {
                return Err(Error::ComponentMismatch {
                    expected: 1,
                    got: p.components,
                });
            }
            coeffs.extend_from_slice(&p.coeffs);
        }
        SpectralField::from_coeffs(&grid, 3, coeffs)
    }

    pub fn is_zero_mean(&self) -> bool {
        self.zero_mean
    }

    /// Zeroes the `k = 0` mode of every component and sets the zero-mean flag.
    pub fn remove_mean(&mut self) {
        let len = self.grid.len();
        for c in 0..self.components {
            self.coeffs[c * len] = ZERO;
        }
        self.zero_mean = true;
    }

    pub fn same_layout(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.components != other.components {
            return Err(Error::ComponentMismatch {
                expected: self.components,
                got: other.components,
            });
        }
        Ok(())
    }

    pub fn expect_components(&self, expected: usize) -> Result<()> {
        if self.components != expected {
            return Err(Error::ComponentMismatch {
                expected,
                got: self.components,
            });
        }
        Ok(())
    }

    /// Samples the field on the grid. The coefficients are assumed
    /// Hermitian; any anti-Hermitian part is not meaningful.
    pub fn to_physical(&self) -> PhysicalField {
        let n = self.grid.n();
        let len = self.grid.len();
        let spectra: Vec<&[Complex64]> = (0..self.components).map(|c| self.component(c)).collect();
        let mut out = vec![0.0; self.components * len];
        self.grid.inverse_real(&spectra, &mut out);
        Array4::from_shape_vec((self.components, n, n, n), out).expect("shape matches buffer")
    }

    /// Transforms physical samples of shape `(1|3, n, n, n)`. The result is
    /// symmetrized so that `f̂(-k) = conj(f̂(k))` holds exactly.
    pub fn to_spectral(grid: &Grid, samples: &PhysicalField) -> Result<SpectralField> {
        let n = grid.n();
        let shape = samples.shape();
        let comps = shape[0];
        if (comps != 1 && comps != 3) || shape[1..] != [n, n, n] {
            return Err(Error::ShapeMismatch {
                expected: vec![3, n, n, n],
                got: shape.to_vec(),
            });
        }
        let mut field = SpectralField::zeros(grid, comps);
        match samples.as_slice() {
            Some(flat) => field.load_physical(flat),
            None => {
                let owned: Vec<f64> = samples.iter().copied().collect();
                field.load_physical(&owned)
            }
        }
        Ok(field)
    }

    /// Overwrites the coefficients from flat `(component, x, y, z)` samples.
    pub(crate) fn load_physical(&mut self, flat: &[f64]) {
        debug_assert_eq!(flat.len(), self.coeffs.len());
        let grid = self.grid.clone();
        grid.forward_real(flat, &mut self.coeffs);
    }

    /// Replaces `f̂(k)` by `(f̂(k) + conj(f̂(-k)))/2`.
    pub fn symmetrize(&mut self) {
        let grid = self.grid.clone();
        let len = grid.len();
        for c in 0..self.components {
            let comp = &mut self.coeffs[c * len..(c + 1) * len];
            for idx in 0..len {
                let m = grid.mirror(idx);
                if m < idx {
                    continue;
                }
                let avg = 0.5 * (comp[idx] + comp[m].conj());
                comp[idx] = avg;
                comp[m] = avg.conj();
            }
        }
    }

    /// Largest `|f̂(k) - conj(f̂(-k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let len = self.grid.len();
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for c in 0..self.components {
            let comp = self.component(c);
            for idx in 0..len {
                let m = self.grid.mirror(idx);
                worst = worst.max((comp[idx] - comp[m].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.par_iter_mut().for_each(|c| *c *= a);
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.same_layout(other)?;
        self.zero_mean = self.zero_mean && other.zero_mean;
        self.coeffs
            .par_iter_mut()
            .zip(other.coeffs.par_iter())
            .for_each(|(s, o)| *s += o * a);
        Ok(())
    }

    pub fn sum(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn difference(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Applies the 2/3-rule dealiasing mask in place.
    pub fn dealias(&mut self) {
        let grid = self.grid.clone();
        let len = grid.len();
        self.coeffs.par_chunks_mut(len).for_each(|comp| {
            for (idx, c) in comp.iter_mut().enumerate() {
                if !grid.keeps(idx) {
                    *c = ZERO;
                }
            }
        });
    }

    pub fn dealiased(mut self) -> SpectralField {
        self.dealias();
        self
    }

    /// Whether every coefficient outside the dealiasing mask is zero.
    pub fn is_dealiased(&self) -> bool {
        let len = self.grid.len();
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| self.grid.keeps(i % len) || *c == ZERO)
    }

    /// Multiplies every mode by a real multiplier depending on its flat index.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> f64 + Sync) -> SpectralField {
        let len = self.grid.len();
        let mut out = self.clone();
        out.coeffs.par_chunks_mut(len).for_each(|comp| {
            for (idx, c) in comp.iter_mut().enumerate() {
                *c *= m(idx);
            }
        });
        out.zero_mean = false;
        out
    }

    /// `∫ f · g dx` over the torus, summed over components.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.same_layout(other)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        Ok(s * self.grid.parseval_factor())
    }

    /// `‖f‖_2^2` computed spectrally.
    pub fn l2_norm_sq(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        s * self.grid.parseval_factor()
    }
}

/// Euclidean magnitude of a vector sample at flat point `p`.
pub(crate) fn magnitude(phys: &[f64], comps: usize, len: usize, p: usize) -> f64 {
    if comps == 1 {
        phys[p].abs()
    } else {
        let mut s = 0.0;
        for c in 0..comps {
            s += phys[c * len + p] * phys[c * len + p];
        }
        s.sqrt()
    }
}

/// Convenience accessor for one component of a physical field.
pub fn physical_component(f: &PhysicalField, c: usize) -> ArrayView1<'_, f64> {
    let len = f.shape()[1] * f.shape()[2] * f.shape()[3];
    let flat = f.as_slice().expect("standard layout");
    ArrayView1::from(&flat[c * len..(c + 1) * len])
}

/// Leray projection onto divergence-free fields:
/// `ŵ(k) - k (k·ŵ(k)) / |k|^2` for `k ≠ 0`; the mean mode is untouched.
pub fn project_leray(w: &SpectralField) -> Result<SpectralField> {
    w.expect_components(3)?;
    let grid = w.grid().clone();
    let len = grid.len();
    let mut out = w.clone();
    let coeffs = out.coeffs_mut();
    let (c0, rest) = coeffs.split_at_mut(len);
    let (c1, c2) = rest.split_at_mut(len);
    c0.par_iter_mut()
        .zip(c1.par_iter_mut())
        .zip(c2.par_iter_mut())
        .enumerate()
        .for_each(|(idx, ((a, b), c))| {
            let k = grid.deriv_vector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                return;
            }
            let dot = (*a * k[0] + *b * k[1] + *c * k[2]) / k2;
            *a -= dot * k[0];
            *b -= dot * k[1];
            *c -= dot * k[2];
        });
    out.zero_mean = w.zero_mean;
    Ok(out)
}

/// Model state: barotropic velocity `u`, first baroclinic velocity `v`,
/// temperature `theta`, at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: SpectralField,
    pub v: SpectralField,
    pub theta: SpectralField,
    pub time: f64,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            u: SpectralField::zeros(grid, 3),
            v: SpectralField::zeros(grid, 3),
            theta: SpectralField::zeros(grid, 1),
            time: 0.0,
        }
    }

    pub fn new(u: SpectralField, v: SpectralField, theta: SpectralField, time: f64) -> Result<Self> {
        u.expect_components(3)?;
        v.expect_components(3)?;
        theta.expect_components(1)?;
        if u.grid() != v.grid() || u.grid() != theta.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u, v, theta, time })
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite() && self.u.is_finite() && self.v.is_finite() && self.theta.is_finite()
    }

    /// `‖u‖² + ‖v‖² + ‖θ‖²`.
    pub fn energy(&self) -> f64 {
        self.u.l2_norm_sq() + self.v.l2_norm_sq() + self.theta.l2_norm_sq()
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.u
            .hermitian_defect()
            .max(self.v.hermitian_defect())
            .max(self.theta.hermitian_defect())
    }
}
