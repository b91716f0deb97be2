//! Seeded generators for synthetic band-limited fields.
//!
//! Random coefficients are drawn in a fixed lattice order that does not
//! depend on the grid size, so the same seed yields the same continuous
//! field at every resolution able to hold the band.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{project_leray, Phase, SpectralField};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    TaylorGreen,
    RandomBand,
    SingleMode,
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor-green" => Ok(Self::TaylorGreen),
            "random-band" => Ok(Self::RandomBand),
            "single-mode" => Ok(Self::SingleMode),
            other => Err(Error::UnknownGenerator(other.to_string())),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TaylorGreen => "taylor-green",
            Self::RandomBand => "random-band",
            Self::SingleMode => "single-mode",
        })
    }
}

/// Recipe for one synthetic field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    pub generator: Generator,
    pub components: usize,
    /// Inclusive band `kmin <= |k| <= kmax` in integer lattice units.
    pub kmin: u32,
    pub kmax: u32,
    pub amplitude: f64,
    pub seed: u64,
    /// Leray-project vector fields after sampling.
    pub solenoidal: bool,
}

impl FieldSpec {
    pub fn random_band(components: usize, kmin: u32, kmax: u32, seed: u64) -> Self {
        Self {
            generator: Generator::RandomBand,
            components,
            kmin,
            kmax,
            amplitude: 1.0,
            seed,
            solenoidal: false,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn solenoidal(mut self) -> Self {
        self.solenoidal = true;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Builds the field described by `spec` on `grid`.
///
/// * `random-band`: Gaussian coefficients on every lattice mode in the
///   band, scaled so each component has RMS `amplitude`.
/// * `single-mode`: `amplitude · cos(kmin x)` in every component.
/// * `taylor-green`: `amplitude · (sin x cos y cos z, -cos x sin y cos z, 0)`
///   for vectors, `amplitude · sin x sin y sin z` for scalars.
pub fn sample_field(spec: &FieldSpec, grid: &Grid) -> Result<SpectralField> {
    if spec.components != 1 && spec.components != 3 {
        return Err(Error::ComponentMismatch {
            expected: 3,
            got: spec.components,
        });
    }
    let mut f = match spec.generator {
        Generator::RandomBand => random_band(spec, grid)?,
        Generator::SingleMode => {
            let mut f = SpectralField::zeros(grid, spec.components);
            for c in 0..spec.components {
                f.add_mode(c, [spec.kmin as i64, 0, 0], spec.amplitude, Phase::Cos)?;
            }
            f
        }
        Generator::TaylorGreen => taylor_green(grid, spec.components, spec.amplitude)?,
    };
    if spec.solenoidal && spec.components == 3 {
        f = project_leray(&f)?;
    }
    Ok(f)
}

fn random_band(spec: &FieldSpec, grid: &Grid) -> Result<SpectralField> {
    let (kmin, kmax) = (spec.kmin as i64, spec.kmax as i64);
    if kmin > kmax {
        return Err(Error::InvalidArgument(format!(
            "empty band [{kmin}, {kmax}]"
        )));
    }
    if kmax >= (grid.n() / 2) as i64 {
        return Err(Error::InvalidArgument(format!(
            "band edge {kmax} needs n > {}, got n = {}",
            2 * kmax,
            grid.n()
        )));
    }
    let in_band = |k: [i64; 3]| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        k2 >= kmin * kmin && k2 <= kmax * kmax && k2 > 0
    };
    // canonical half of the lattice: the first nonzero entry is positive
    let canonical = |k: [i64; 3]| k[0] > 0 || (k[0] == 0 && (k[1] > 0 || (k[1] == 0 && k[2] > 0)));
    let mut modes = Vec::new();
    for kx in -kmax..=kmax {
        for ky in -kmax..=kmax {
            for kz in -kmax..=kmax {
                let k = [kx, ky, kz];
                if in_band(k) && canonical(k) {
                    modes.push(k);
                }
            }
        }
    }
    let mut f = SpectralField::zeros(grid, spec.components);
    if modes.is_empty() {
        return Ok(f);
    }
    let len = grid.len();
    let scale = spec.amplitude / (2.0 * (modes.len() as f64).sqrt()) * len as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for &k in &modes {
        let pos = |k: i64| grid.position_of(k).expect("band fits the grid");
        let idx = grid.flat(pos(k[0]), pos(k[1]), pos(k[2]));
        let mirror = grid.mirror(idx);
        for c in 0..spec.components {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let z = Complex64::new(re, im) * scale;
            let comp = f.component_mut(c);
            comp[idx] = z;
            comp[mirror] = z.conj();
        }
    }
    Ok(f)
}

fn taylor_green(grid: &Grid, components: usize, amplitude: f64) -> Result<SpectralField> {
    // products of sines and cosines expanded into exponentials by sampling
    let n = grid.n();
    let len = grid.len();
    let mut samples = vec![0.0; components * len];
    for i in 0..n {
        let x = grid.coordinate(i);
        for j in 0..n {
            let y = grid.coordinate(j);
            for l in 0..n {
                let z = grid.coordinate(l);
                let p = grid.flat(i, j, l);
                if components == 3 {
                    samples[p] = amplitude * x.sin() * y.cos() * z.cos();
                    samples[len + p] = -amplitude * x.cos() * y.sin() * z.cos();
                } else {
                    samples[p] = amplitude * x.sin() * y.sin() * z.sin();
                }
            }
        }
    }
    let mut f = SpectralField::zeros(grid, components);
    f.load_physical(&samples);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::lp_norm;
    use crate::operators::divergence;

    #[test]
    fn generator_names() {
        assert_eq!("random-band".parse::<Generator>().unwrap(), Generator::RandomBand);
        assert_eq!(Generator::TaylorGreen.to_string(), "taylor-green");
        assert!(matches!(
            "gaussian-blob".parse::<Generator>(),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let grid = Grid::new(16).unwrap();
        let spec = FieldSpec::random_band(3, 1, 4, 42);
        assert_eq!(sample_field(&spec, &grid).unwrap(), sample_field(&spec, &grid).unwrap());
        let other = sample_field(&spec.clone().with_seed(43), &grid).unwrap();
        assert_ne!(sample_field(&spec, &grid).unwrap(), other);
    }

    #[test]
    fn band_is_respected() {
        let grid = Grid::new(16).unwrap();
        let f = sample_field(&FieldSpec::random_band(1, 2, 4, 1), &grid).unwrap();
        for (idx, c) in f.coeffs().iter().enumerate() {
            let k2 = grid.k_squared(idx);
            if !(4.0..=16.0).contains(&k2) {
                assert_eq!(c.norm(), 0.0);
            }
        }
        assert!(f.max_abs() > 0.0);
        assert!(f.hermitian_defect() == 0.0);
    }

    #[test]
    fn same_function_on_every_resolution() {
        let spec = FieldSpec::random_band(1, 1, 3, 9);
        let coarse = sample_field(&spec, &Grid::new(8).unwrap()).unwrap();
        let fine = sample_field(&spec, &Grid::new(16).unwrap()).unwrap();
        let pc = coarse.to_physical();
        let pf = fine.to_physical();
        for i in 0..8 {
            for j in 0..8 {
                for l in 0..8 {
                    assert!((pc[[0, i, j, l]] - pf[[0, 2 * i, 2 * j, 2 * l]]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn amplitude_scales_norms() {
        let grid = Grid::new(16).unwrap();
        let spec = FieldSpec::random_band(3, 1, 4, 5);
        let a = sample_field(&spec, &grid).unwrap();
        let b = sample_field(&spec.clone().with_amplitude(3.0), &grid).unwrap();
        for p in [2.0, 3.0, f64::INFINITY] {
            let (na, nb) = (lp_norm(&a, p).unwrap(), lp_norm(&b, p).unwrap());
            assert!((nb - 3.0 * na).abs() < 1e-12 * nb);
        }
    }

    #[test]
    fn solenoidal_option_projects() {
        let grid = Grid::new(16).unwrap();
        let f = sample_field(&FieldSpec::random_band(3, 1, 4, 5).solenoidal(), &grid).unwrap();
        assert!(divergence(&f).unwrap().max_abs() < 1e-10 * f.max_abs());
    }

    #[test]
    fn band_must_fit_grid() {
        let grid = Grid::new(8).unwrap();
        assert!(sample_field(&FieldSpec::random_band(1, 1, 4, 0), &grid).is_err());
        assert!(sample_field(&FieldSpec::random_band(1, 3, 2, 0), &grid).is_err());
    }

    #[test]
    fn taylor_green_is_solenoidal() {
        let grid = Grid::new(8).unwrap();
        let spec = FieldSpec {
            generator: Generator::TaylorGreen,
            components: 3,
            kmin: 1,
            kmax: 1,
            amplitude: 1.0,
            seed: 0,
            solenoidal: false,
        };
        let f = sample_field(&spec, &grid).unwrap();
        assert!(divergence(&f).unwrap().max_abs() < 1e-12 * f.max_abs());
    }
}
