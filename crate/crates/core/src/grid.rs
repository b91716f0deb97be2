//! Periodic cube `[0, L)^3` sampled on `n^3` points, with the FFT plans
//! and wavenumber tables every spectral operation shares.
//!
//! Transform convention: the forward transform is unnormalized,
//! `f̂(k) = Σ_x f(x) e^{-i k·x}`, and the inverse divides by `n^3`. Under
//! this convention the continuous inner product on the torus is
//! `∫ f g dx = (L^3 / n^6) Σ_k conj(f̂(k)) ĝ(k)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default 2/3-rule dealiasing fraction.
pub const TWO_THIRDS: f64 = 2.0 / 3.0;

#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    n: usize,
    length: f64,
    dealias_fraction: f64,
    /// Integer lattice index per axis position, in `{-n/2+1, ..., n/2}`.
    lattice: Vec<i64>,
    /// Scaled wavenumber `2π/L · k` per axis position.
    wavenumbers: Vec<f64>,
    /// Wavenumbers used for odd derivatives; the Nyquist entry is zero.
    deriv_wavenumbers: Vec<f64>,
    /// Flat-index tables: `|k|^2`, derivative vector, mask, mirror index.
    k_squared: Vec<f64>,
    deriv_vectors: Vec<[f64; 3]>,
    keep_flat: Vec<bool>,
    mirrors: Vec<u32>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n())
            .field("length", &self.length())
            .field("dealias_fraction", &self.dealias_fraction())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.n() == other.n()
                && self.length() == other.length()
                && self.dealias_fraction() == other.dealias_fraction())
    }
}

impl Grid {
    /// `n^3` grid on `[0, 2π)^3` with 2/3-rule dealiasing.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_params(n, 2.0 * PI, TWO_THIRDS)
    }

    pub fn with_params(n: usize, length: f64, dealias_fraction: f64) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n must be a positive even integer, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive, got {length}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        let half = (n / 2) as i64;
        let lattice: Vec<i64> = (0..n)
            .map(|i| {
                let i = i as i64;
                if i <= half {
                    i
                } else {
                    i - n as i64
                }
            })
            .collect();
        let scale = 2.0 * PI / length;
        let wavenumbers: Vec<f64> = lattice.iter().map(|&k| scale * k as f64).collect();
        let deriv_wavenumbers: Vec<f64> = lattice
            .iter()
            .map(|&k| if k == half { 0.0 } else { scale * k as f64 })
            .collect();
        let cutoff = dealias_fraction * half as f64;
        let keep: Vec<bool> = lattice
            .iter()
            .map(|&k| (k.abs() as f64) <= cutoff + 1e-12)
            .collect();
        let len = n * n * n;
        let mut k_squared = Vec::with_capacity(len);
        let mut deriv_vectors = Vec::with_capacity(len);
        let mut keep_flat = Vec::with_capacity(len);
        let mut mirrors = Vec::with_capacity(len);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let w = |a: usize| wavenumbers[a] * wavenumbers[a];
                    k_squared.push(w(i) + w(j) + w(l));
                    deriv_vectors.push([deriv_wavenumbers[i], deriv_wavenumbers[j], deriv_wavenumbers[l]]);
                    keep_flat.push(keep[i] && keep[j] && keep[l]);
                    mirrors.push((((n - i) % n * n + (n - j) % n) * n + (n - l) % n) as u32);
                }
            }
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                length,
                dealias_fraction,
                lattice,
                wavenumbers,
                deriv_wavenumbers,
                k_squared,
                deriv_vectors,
                keep_flat,
                mirrors,
                forward,
                inverse,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.inner.dealias_fraction
    }

    /// Number of grid points, `n^3`.
    pub fn len(&self) -> usize {
        self.inner.n.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(3)
    }

    /// Factor turning `Σ_k conj(f̂) ĝ` into `∫ f g dx`.
    pub fn parseval_factor(&self) -> f64 {
        self.volume() / (self.len() as f64).powi(2)
    }

    /// Physical coordinate of grid index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Integer lattice wavenumber at axis position `i`.
    pub fn lattice(&self, i: usize) -> i64 {
        self.inner.lattice[i]
    }

    /// Axis position holding integer wavenumber `k`, if representable.
    pub fn position_of(&self, k: i64) -> Option<usize> {
        let n = self.inner.n as i64;
        if k > n / 2 || k <= -n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        self.inner.wavenumbers[i]
    }

    pub fn deriv_wavenumber(&self, i: usize) -> f64 {
        self.inner.deriv_wavenumbers[i]
    }

    /// Flat index of spectral/physical position `(i, j, l)`.
    #[inline]
    pub fn flat(&self, i: usize, j: usize, l: usize) -> usize {
        let n = self.inner.n;
        (i * n + j) * n + l
    }

    /// Inverse of [`Grid::flat`].
    #[inline]
    pub fn unflat(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.inner.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Flat index of the mode `-k` for the mode stored at `idx`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        self.inner.mirrors[idx] as usize
    }

    /// `|k|^2` of the mode at flat index `idx`.
    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        self.inner.k_squared[idx]
    }

    /// Derivative wavenumber vector of the mode at `idx`.
    #[inline]
    pub fn deriv_vector(&self, idx: usize) -> [f64; 3] {
        self.inner.deriv_vectors[idx]
    }

    /// Whether the 2/3-rule mask keeps the mode at `idx`.
    #[inline]
    pub fn keeps(&self, idx: usize) -> bool {
        self.inner.keep_flat[idx]
    }

    /// Largest integer wavenumber retained by the dealiasing mask.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.inner.dealias_fraction * (self.inner.n / 2) as f64 + 1e-12).floor() as i64
    }

    /// In-place unnormalized forward transform of one `n^3` block.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.fft3(data, &self.inner.forward);
    }

    /// In-place unnormalized inverse transform of one `n^3` block.
    /// Callers divide by `n^3`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.fft3(data, &self.inner.inverse);
    }

    /// Normalized samples of real fields from Hermitian spectra, written
    /// one after another into `out`. Spectra are transformed two at a time
    /// as the real and imaginary parts of one complex signal.
    pub(crate) fn inverse_real(&self, spectra: &[&[Complex64]], out: &mut [f64]) {
        let len = self.len();
        assert_eq!(out.len(), spectra.len() * len, "output must hold every field");
        let norm = 1.0 / len as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (pair, dst) in spectra.chunks(2).zip(out.chunks_mut(2 * len)) {
            match pair {
                [a, b] => {
                    for ((z, x), y) in buf.iter_mut().zip(a.iter()).zip(b.iter()) {
                        *z = Complex64::new(x.re - y.im, x.im + y.re);
                    }
                    self.inverse(&mut buf);
                    let (da, db) = dst.split_at_mut(len);
                    for ((z, a), b) in buf.iter().zip(da).zip(db) {
                        *a = z.re * norm;
                        *b = z.im * norm;
                    }
                }
                [a] => {
                    buf.copy_from_slice(a);
                    self.inverse(&mut buf);
                    for (z, a) in buf.iter().zip(dst) {
                        *a = z.re * norm;
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    /// Exactly Hermitian spectra of real fields stored one after another in
    /// `samples`; two fields share one complex transform.
    pub(crate) fn forward_real(&self, samples: &[f64], out: &mut [Complex64]) {
        let len = self.len();
        assert_eq!(samples.len(), out.len(), "one coefficient per sample");
        assert_eq!(samples.len() % len, 0, "samples must hold whole fields");
        let mirrors = &self.inner.mirrors;
        for (src, dst) in samples.chunks(2 * len).zip(out.chunks_mut(2 * len)) {
            if src.len() == 2 * len {
                let (fa, fb) = src.split_at(len);
                let mut buf: Vec<Complex64> = fa.iter().zip(fb).map(|(a, b)| Complex64::new(*a, *b)).collect();
                self.forward(&mut buf);
                let (da, db) = dst.split_at_mut(len);
                for idx in 0..len {
                    let h = buf[idx];
                    let hm = buf[mirrors[idx] as usize].conj();
                    da[idx] = 0.5 * (h + hm);
                    let d = 0.5 * (h - hm);
                    db[idx] = Complex64::new(d.im, -d.re);
                }
            } else {
                for (z, a) in dst.iter_mut().zip(src) {
                    *z = Complex64::new(*a, 0.0);
                }
                self.forward(dst);
                for idx in 0..len {
                    let m = mirrors[idx] as usize;
                    if m < idx {
                        continue;
                    }
                    let avg = 0.5 * (dst[idx] + dst[m].conj());
                    dst[idx] = avg;
                    dst[m] = avg.conj();
                }
            }
        }
    }

    fn fft3(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.inner.n;
        let plane = n * n;
        assert_eq!(data.len(), plane * n, "transform buffer must hold n^3 values");

        // z lines are contiguous
        data.par_chunks_mut(plane).for_each(|p| plan.process(p));

        // y lines: transpose each x-plane
        data.par_chunks_mut(plane).for_each(|p| {
            let mut t = vec![Complex64::new(0.0, 0.0); plane];
            transpose(p, &mut t, n);
            plan.process(&mut t);
            transpose(&t, p, n);
        });

        // x lines: swap the x and z axes through a scratch cube
        let mut t = vec![Complex64::new(0.0, 0.0); plane * n];
        t.par_chunks_mut(plane).enumerate().for_each(|(z, out)| {
            for y in 0..n {
                for x in 0..n {
                    out[y * n + x] = data[(x * n + y) * n + z];
                }
            }
        });
        t.par_chunks_mut(plane).for_each(|p| plan.process(p));
        data.par_chunks_mut(plane).enumerate().for_each(|(x, out)| {
            for y in 0..n {
                for z in 0..n {
                    out[y * n + z] = t[(z * n + y) * n + x];
                }
            }
        });
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_degenerate_sizes() {
        assert!(Grid::new(0).is_err());
        assert!(Grid::new(7).is_err());
        assert!(Grid::with_params(8, -1.0, TWO_THIRDS).is_err());
        assert!(Grid::with_params(8, 1.0, 0.0).is_err());
        assert!(Grid::with_params(8, 1.0, 1.5).is_err());
    }

    #[test]
    fn lattice_matches_convention() {
        let g = Grid::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.lattice(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.deriv_wavenumber(4), 0.0);
        assert_eq!(g.wavenumber(4), 4.0);
        assert_eq!(g.position_of(-3), Some(5));
        assert_eq!(g.position_of(-4), None);
    }

    #[test]
    fn mask_follows_two_thirds_rule() {
        let g = Grid::new(32).unwrap();
        // cutoff 2/3 * 16 = 10.67
        assert_eq!(g.dealias_cutoff(), 10);
        assert!(g.keeps(g.flat(10, 0, g.position_of(-10).unwrap())));
        assert!(!g.keeps(g.flat(11, 0, 0)));
        assert!(!g.keeps(g.flat(0, 0, g.position_of(-11).unwrap())));
    }

    #[test]
    fn mirror_is_involution() {
        let g = Grid::new(6).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.mirror(g.mirror(idx)), idx);
        }
    }

    #[test]
    fn fft_of_delta_is_flat() {
        let g = Grid::new(8).unwrap();
        let mut buf = vec![Complex64::new(0.0, 0.0); g.len()];
        buf[0] = Complex64::new(1.0, 0.0);
        g.forward(&mut buf);
        assert!(buf.iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-14));
        g.inverse(&mut buf);
        assert!((buf[0].re - g.len() as f64).abs() < 1e-10);
    }
}
