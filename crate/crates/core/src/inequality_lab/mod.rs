//! Empirical ratio tests for the interpolation and product inequalities
//! behind the regularity estimates.
//!
//! Each case evaluates `LHS / RHS` with the unknown constant dropped on an
//! ensemble of band-limited random fields, at several resolutions. Since the
//! constants are not known, the only falsifiable outcome is a ratio that
//! keeps growing as the grid is refined.

mod sampling;

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

pub use sampling::{sample_field, FieldSpec, Generator};

use crate::error::{Error, Result};
use crate::field::{Phase, SpectralField};
use crate::grid::Grid;
use crate::littlewood_paley::DyadicDecomposition;
use crate::norms::{lp_norm, sobolev_norm};
use crate::operators::{lambda_s, physical};

/// Space dimension entering the scaling relations.
const DIM: f64 = 3.0;
const EXPONENT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inequality {
    /// `‖Λ^r f‖_q ≤ C ‖f‖_{p₁}^{1−κ} ‖Λ^s f‖_{p₂}^κ`
    GagliardoNirenberg {
        r: f64,
        s: f64,
        kappa: f64,
        p1: f64,
        p2: f64,
        q: f64,
    },
    /// `‖f‖_∞ ≤ C ‖f‖_{p₁}^{1−κ} ‖Λ^s f‖_{p₂}^κ`
    GnExtremal { s: f64, kappa: f64, p1: f64, p2: f64 },
    /// `‖Λ^s(fg)‖_p ≤ C (‖f‖_{p₁} ‖Λ^s g‖_{q₁} + ‖g‖_{p₂} ‖Λ^s f‖_{q₂})`
    KatoPonce {
        s: f64,
        p: f64,
        p1: f64,
        q1: f64,
        p2: f64,
        q2: f64,
    },
    /// `‖fg‖_p ≤ C (‖f‖_p ‖g‖_* + ‖f‖_* ‖g‖_p)` with `‖·‖_*` the
    /// `Ḃ⁰_{∞,2}` majorant of the BMO norm.
    BmoProduct { p: f64 },
    /// `‖f‖_{Ḃ⁰_{∞,2}} ≤ C (1 + ‖f‖_{Ḃ⁰_{∞,∞}} ln^{1/2}(1 + ‖f‖_{H^s}))`
    LogBesov { s: f64 },
    /// `‖u‖_3 ≤ C ‖u‖_2^a ‖u‖_{α+1}^b`, `a = 2(α−2)/(3(α−1))`,
    /// `b = (α+1)/(3(α−1))`.
    InterpL3 { alpha: f64 },
}

impl Inequality {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GagliardoNirenberg { .. } => "GN",
            Self::GnExtremal { .. } => "GN-extremal",
            Self::KatoPonce { .. } => "KatoPonce",
            Self::BmoProduct { .. } => "BMOProduct",
            Self::LogBesov { .. } => "LogBesov",
            Self::InterpL3 { .. } => "Interp-L3",
        }
    }

    /// `name=value` pairs separated by spaces.
    pub fn exponent_tuple(&self) -> String {
        let pairs: Vec<(&str, f64)> = match *self {
            Self::GagliardoNirenberg { r, s, kappa, p1, p2, q } => {
                vec![("r", r), ("s", s), ("kappa", kappa), ("p1", p1), ("p2", p2), ("q", q)]
            }
            Self::GnExtremal { s, kappa, p1, p2 } => {
                vec![("s", s), ("kappa", kappa), ("p1", p1), ("p2", p2), ("q", f64::INFINITY)]
            }
            Self::KatoPonce { s, p, p1, q1, p2, q2 } => {
                vec![("s", s), ("p", p), ("p1", p1), ("q1", q1), ("p2", p2), ("q2", q2)]
            }
            Self::BmoProduct { p } => vec![("p", p)],
            Self::LogBesov { s } => vec![("s", s)],
            Self::InterpL3 { alpha } => {
                let (a, b) = interp_l3_exponents(alpha);
                vec![("alpha", alpha), ("a", a), ("b", b)]
            }
        };
        pairs
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Number of independent fields one ratio consumes.
    pub fn arity(&self) -> usize {
        match self {
            Self::KatoPonce { .. } | Self::BmoProduct { .. } => 2,
            _ => 1,
        }
    }

    /// Components of the sampled fields.
    pub fn components(&self) -> usize {
        match self {
            Self::InterpL3 { .. } => 3,
            _ => 1,
        }
    }

    /// Checks every exponent condition attached to the inequality.
    pub fn validate(&self) -> Result<()> {
        self.validate_scaling()?;
        if let Self::GagliardoNirenberg { r, s, kappa, .. } = *self {
            if r > kappa * s + EXPONENT_TOL {
                return Err(self.reject(format!("needs r <= kappa*s, got r = {r} > {}", kappa * s)));
            }
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate) but without the `r ≤ κs` condition,
    /// so the scaling-consistent negative control can still be evaluated.
    pub fn validate_scaling(&self) -> Result<()> {
        let open = |name: &str, x: f64| -> Result<()> {
            if x > 1.0 && x.is_finite() {
                Ok(())
            } else {
                Err(self.reject(format!("needs 1 < {name} < inf, got {x}")))
            }
        };
        let nonneg = |name: &str, x: f64| -> Result<()> {
            if x >= 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(self.reject(format!("needs {name} >= 0, got {x}")))
            }
        };
        let unit = |kappa: f64| -> Result<()> {
            if (0.0..=1.0).contains(&kappa) {
                Ok(())
            } else {
                Err(self.reject(format!("needs 0 <= kappa <= 1, got {kappa}")))
            }
        };
        let balance = |lhs: f64, rhs: f64, what: &str| -> Result<()> {
            if (lhs - rhs).abs() <= EXPONENT_TOL {
                Ok(())
            } else {
                Err(self.reject(format!("{what}: {lhs} != {rhs}")))
            }
        };
        match *self {
            Self::GagliardoNirenberg { r, s, kappa, p1, p2, q } => {
                nonneg("r", r)?;
                nonneg("s", s)?;
                unit(kappa)?;
                open("q", q)?;
                open("p1", p1)?;
                open("p2", p2)?;
                let rhs = (1.0 - kappa) / p1 + kappa / p2 - (kappa * s - r) / DIM;
                balance(1.0 / q, rhs, "scaling 1/q = (1-kappa)/p1 + kappa/p2 - (kappa*s - r)/3")
            }
            Self::GnExtremal { s, kappa, p1, p2 } => {
                nonneg("s", s)?;
                unit(kappa)?;
                open("p1", p1)?;
                open("p2", p2)?;
                let rhs = (1.0 - kappa) / p1 + kappa / p2 - kappa * s / DIM;
                balance(0.0, rhs, "scaling 0 = (1-kappa)/p1 + kappa/p2 - kappa*s/3")
            }
            Self::KatoPonce { s, p, p1, q1, p2, q2 } => {
                if !(s > 0.0) {
                    return Err(self.reject(format!("needs s > 0, got {s}")));
                }
                open("p", p)?;
                open("q1", q1)?;
                open("q2", q2)?;
                for (name, x) in [("p1", p1), ("p2", p2)] {
                    if !(x > 1.0) {
                        return Err(self.reject(format!("needs 1 < {name} <= inf, got {x}")));
                    }
                }
                balance(1.0 / p, 1.0 / p1 + 1.0 / q1, "1/p = 1/p1 + 1/q1")?;
                balance(1.0 / p, 1.0 / p2 + 1.0 / q2, "1/p = 1/p2 + 1/q2")
            }
            Self::BmoProduct { p } => open("p", p),
            Self::LogBesov { s } => {
                if s > DIM / 2.0 && s.is_finite() {
                    Ok(())
                } else {
                    Err(self.reject(format!("needs s > 3/2, got {s}")))
                }
            }
            Self::InterpL3 { alpha } => {
                if (3.0..4.0).contains(&alpha) {
                    Ok(())
                } else {
                    Err(self.reject(format!("needs 3 <= alpha < 4, got {alpha}")))
                }
            }
        }
    }

    fn reject(&self, reason: String) -> Error {
        Error::InvalidCase {
            case: self.name().to_string(),
            reason,
        }
    }

    /// `LHS / RHS` without the constant. `fields` must hold
    /// [`arity`](Self::arity) fields on one grid. A vanishing right-hand
    /// side yields 0 when the left-hand side vanishes too.
    pub fn ratio(&self, fields: &[SpectralField]) -> Result<f64> {
        if fields.len() != self.arity() {
            return Err(Error::InvalidArgument(format!(
                "{} takes {} fields, got {}",
                self.name(),
                self.arity(),
                fields.len()
            )));
        }
        let f = &fields[0];
        let (lhs, rhs) = match *self {
            Self::GagliardoNirenberg { r, s, kappa, p1, p2, q } => (
                lp_norm(&lambda_s(f, r)?, q)?,
                lp_norm(f, p1)?.powf(1.0 - kappa) * lp_norm(&lambda_s(f, s)?, p2)?.powf(kappa),
            ),
            Self::GnExtremal { s, kappa, p1, p2 } => (
                lp_norm(f, f64::INFINITY)?,
                lp_norm(f, p1)?.powf(1.0 - kappa) * lp_norm(&lambda_s(f, s)?, p2)?.powf(kappa),
            ),
            Self::KatoPonce { s, p, p1, q1, p2, q2 } => {
                let g = &fields[1];
                (
                    lp_norm(&lambda_s(&product(f, g)?, s)?, p)?,
                    lp_norm(f, p1)? * lp_norm(&lambda_s(g, s)?, q1)?
                        + lp_norm(g, p2)? * lp_norm(&lambda_s(f, s)?, q2)?,
                )
            }
            Self::BmoProduct { p } => {
                let g = &fields[1];
                let d = DyadicDecomposition::new(f.grid());
                (
                    lp_norm(&product(f, g)?, p)?,
                    lp_norm(f, p)? * d.bmo_proxy(g) + d.bmo_proxy(f) * lp_norm(g, p)?,
                )
            }
            Self::LogBesov { s } => {
                let d = DyadicDecomposition::new(f.grid());
                let hs = sobolev_norm(f, s, false)?;
                (
                    d.bmo_proxy(f),
                    1.0 + d.besov_b0_inf_inf(f) * hs.ln_1p().sqrt(),
                )
            }
            Self::InterpL3 { alpha } => {
                let (a, b) = interp_l3_exponents(alpha);
                (
                    lp_norm(f, 3.0)?,
                    lp_norm(f, 2.0)?.powf(a) * lp_norm(f, alpha + 1.0)?.powf(b),
                )
            }
        };
        Ok(if lhs == 0.0 { 0.0 } else { lhs / rhs })
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name(), self.exponent_tuple())
    }
}

/// `(2(α−2)/(3(α−1)), (α+1)/(3(α−1)))`; the pair sums to one.
pub fn interp_l3_exponents(alpha: f64) -> (f64, f64) {
    let d = 3.0 * (alpha - 1.0);
    (2.0 * (alpha - 2.0) / d, (alpha + 1.0) / d)
}

/// Pointwise product of two scalar fields, without dealiasing. Exact when
/// the sum of the two bands fits the grid.
fn product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.same_layout(g)?;
    f.expect_components(1)?;
    let a = physical(f);
    let b = physical(g);
    let samples: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    let mut out = SpectralField::zeros(f.grid(), 1);
    out.load_physical(&samples);
    Ok(out)
}

/// One inequality evaluated on `count` seeded fields drawn from `fields`.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityCase {
    pub inequality: Inequality,
    /// Template for every ensemble member; the seed is the ensemble base
    /// seed and the component count is overridden by the inequality.
    pub fields: FieldSpec,
    pub count: usize,
}

impl InequalityCase {
    pub fn new(inequality: Inequality, fields: FieldSpec, count: usize) -> Self {
        Self {
            inequality,
            fields,
            count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(self.inequality.reject("empty ensemble".into()));
        }
        self.inequality.validate()
    }

    /// Field specs of ensemble member `i`.
    fn member(&self, i: usize) -> Vec<FieldSpec> {
        let arity = self.inequality.arity();
        let mut spec = self.fields.clone();
        spec.components = self.inequality.components();
        spec.solenoidal = spec.components == 3;
        (0..arity)
            .map(|a| {
                spec.clone()
                    .with_seed(self.fields.seed.wrapping_add((i * arity + a) as u64))
            })
            .collect()
    }

    /// Ratios of every ensemble member on one grid.
    pub fn ratios(&self, grid: &Grid) -> Result<Vec<f64>> {
        (0..self.count)
            .into_par_iter()
            .map(|i| {
                let fields = self
                    .member(i)
                    .iter()
                    .map(|spec| sample_field(spec, grid))
                    .collect::<Result<Vec<_>>>()?;
                self.inequality.ratio(&fields)
            })
            .collect()
    }
}

/// Summary of one ensemble at one resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolutionStats {
    pub n: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    pub ratios: Vec<f64>,
}

impl ResolutionStats {
    fn new(n: usize, ratios: Vec<f64>) -> Self {
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len();
        let median = if m == 0 {
            f64::NAN
        } else if m % 2 == 1 {
            sorted[m / 2]
        } else {
            0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
        };
        Self {
            n,
            max: sorted.last().copied().unwrap_or(f64::NAN),
            min: sorted.first().copied().unwrap_or(f64::NAN),
            mean: sorted.iter().sum::<f64>() / m as f64,
            median,
            ratios,
        }
    }
}

/// Relative change of the max ratio allowed per resolution doubling.
pub const STABILITY_TOL: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct CaseReport {
    pub case: InequalityCase,
    pub per_resolution: Vec<ResolutionStats>,
    /// Largest ratio over all members and resolutions.
    pub max_ratio: f64,
    /// Largest `|max_{n'} − max_n| / max_n` between consecutive resolutions.
    pub max_variation: f64,
    /// Non-finite ratios and unstable refinements, in words.
    pub violations: Vec<String>,
}

impl CaseReport {
    pub fn is_stable(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates `case` on each resolution in increasing order.
pub fn check_case(case: &InequalityCase, resolutions: &[usize]) -> Result<CaseReport> {
    case.validate()?;
    if resolutions.is_empty() {
        return Err(Error::InvalidArgument("no resolutions given".into()));
    }
    let mut per_resolution = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let grid = Grid::new(n)?;
        per_resolution.push(ResolutionStats::new(n, case.ratios(&grid)?));
    }
    let mut violations = Vec::new();
    for stats in &per_resolution {
        if let Some(bad) = stats.ratios.iter().position(|r| !r.is_finite()) {
            violations.push(format!("non-finite ratio for member {bad} at n = {}", stats.n));
        }
    }
    let mut max_variation: f64 = 0.0;
    for pair in per_resolution.windows(2) {
        let change = (pair[1].max - pair[0].max).abs() / pair[0].max;
        max_variation = max_variation.max(change);
        if !(change < STABILITY_TOL) {
            violations.push(format!(
                "max ratio moved by {:.1}% from n = {} to n = {}",
                100.0 * change,
                pair[0].n,
                pair[1].n
            ));
        }
    }
    let max_ratio = per_resolution.iter().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max);
    Ok(CaseReport {
        case: case.clone(),
        per_resolution,
        max_ratio,
        max_variation,
        violations,
    })
}

/// The six inequalities at the exponents used by the test suite, each on
/// `count` random-band fields with `1 <= |k| <= 3`.
pub fn default_suite(seed: u64, count: usize) -> Vec<InequalityCase> {
    let fields = FieldSpec::random_band(1, 1, 3, seed);
    [
        Inequality::GagliardoNirenberg {
            r: 1.0,
            s: 2.0,
            kappa: 0.75,
            p1: 2.0,
            p2: 2.0,
            q: 3.0,
        },
        Inequality::GnExtremal {
            s: 2.0,
            kappa: 0.75,
            p1: 2.0,
            p2: 2.0,
        },
        Inequality::KatoPonce {
            s: 1.5,
            p: 2.0,
            p1: 6.0,
            q1: 3.0,
            p2: f64::INFINITY,
            q2: 2.0,
        },
        Inequality::BmoProduct { p: 2.0 },
        Inequality::LogBesov { s: 2.0 },
        Inequality::InterpL3 { alpha: 3.0 },
    ]
    .into_iter()
    .map(|inequality| InequalityCase::new(inequality, fields.clone(), count))
    .collect()
}

/// Single-mode ratios of a Gagliardo–Nirenberg case, `f = sin(k x)`.
///
/// Only the scaling relation is required, so cases with `r > κs` can be
/// scanned as a negative control.
pub fn gn_mode_scan(inequality: &Inequality, grid: &Grid, wavenumbers: &[i64]) -> Result<Vec<(i64, f64)>> {
    if !matches!(inequality, Inequality::GagliardoNirenberg { .. }) {
        return Err(inequality.reject("mode scan needs a GN case".into()));
    }
    inequality.validate_scaling()?;
    wavenumbers
        .iter()
        .map(|&k| {
            let f = SpectralField::single_mode(grid, 1, 0, [k, 0, 0], 1.0, Phase::Sin)?;
            Ok((k, inequality.ratio(&[f])?))
        })
        .collect()
}

/// Least-squares slope of `ln ratio` against `ln k`.
pub fn log_log_slope(points: &[(i64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|&(k, _)| (k as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, r)| r.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Writes one row per case. The header carries a note that the BMO norm
/// is replaced by its `Ḃ⁰_{∞,2}` majorant.
pub fn write_report(path: &Path, reports: &[CaseReport]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(
        file,
        "# BMO norms are replaced by the B^0_{{inf,2}} majorant; BMOProduct and LogBesov ratios bound that proxy inequality"
    )?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["case", "exponents", "ensemble", "max_ratio", "per_resolution", "stable"])?;
    for r in reports {
        let per: Vec<String> = r
            .per_resolution
            .iter()
            .map(|s| format!("{}:{}", s.n, s.max))
            .collect();
        w.write_record([
            r.case.inequality.name().to_string(),
            r.case.inequality.exponent_tuple(),
            r.case.count.to_string(),
            r.max_ratio.to_string(),
            per.join(";"),
            r.is_stable().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gn(r: f64, s: f64, kappa: f64, q: f64) -> Inequality {
        Inequality::GagliardoNirenberg {
            r,
            s,
            kappa,
            p1: 2.0,
            p2: 2.0,
            q,
        }
    }

    #[test]
    fn suite_cases_are_admissible() {
        for case in default_suite(0, 4) {
            case.validate().unwrap();
        }
    }

    #[test]
    fn exponent_conditions_are_enforced() {
        assert!(gn(1.0, 2.0, 0.75, 4.0).validate().is_err());
        // r > kappa s: scaling-consistent but outside the admissible range
        let control = gn(2.0, 2.0, 0.5, 1.2);
        assert!(control.validate().is_err());
        control.validate_scaling().unwrap();
        let kp = Inequality::KatoPonce {
            s: 1.0,
            p: 2.0,
            p1: 4.0,
            q1: 3.0,
            p2: f64::INFINITY,
            q2: 2.0,
        };
        assert!(matches!(kp.validate(), Err(Error::InvalidCase { .. })));
        assert!(Inequality::LogBesov { s: 1.0 }.validate().is_err());
        assert!(Inequality::InterpL3 { alpha: 4.5 }.validate().is_err());
        assert!(Inequality::GnExtremal { s: 2.0, kappa: 0.5, p1: 2.0, p2: 2.0 }.validate().is_err());
    }

    #[test]
    fn interp_exponents_sum_to_one() {
        for i in 0..10 {
            let alpha = 3.0 + 0.1 * i as f64;
            let (a, b) = interp_l3_exponents(alpha);
            assert!((a + b - 1.0).abs() < 1e-15);
        }
        assert_eq!(interp_l3_exponents(3.0), (1.0 / 3.0, 2.0 / 3.0));
    }

    #[test]
    fn kato_ponce_with_constant_factor_is_one() {
        let grid = Grid::new(16).unwrap();
        let f = sample_field(&FieldSpec::random_band(1, 1, 3, 4), &grid).unwrap();
        let mut one = SpectralField::zeros(&grid, 1);
        one.add_mode(0, [0, 0, 0], 1.0, Phase::Cos).unwrap();
        let kp = default_suite(0, 1)[2].inequality;
        let r = kp.ratio(&[f, one]).unwrap();
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn zero_field_gives_zero_ratio() {
        let grid = Grid::new(16).unwrap();
        let zero = SpectralField::zeros(&grid, 1);
        for case in default_suite(0, 1) {
            let fields = vec![zero.clone(); case.inequality.arity()];
            let fields: Vec<_> = if case.inequality.components() == 3 {
                vec![SpectralField::zeros(&grid, 3)]
            } else {
                fields
            };
            assert_eq!(case.inequality.ratio(&fields).unwrap(), 0.0, "{}", case.inequality);
        }
    }

    #[test]
    fn interp_l3_obeys_holder() {
        let grid = Grid::new(16).unwrap();
        let case = &default_suite(3, 20)[5];
        for r in case.ratios(&grid).unwrap() {
            assert!(r > 0.0 && r <= 1.0 + 1e-12, "{r}");
        }
    }

    #[test]
    fn single_mode_slopes_follow_scaling() {
        let grid = Grid::new(64).unwrap();
        let ks = [1, 2, 3, 4, 5, 6];
        let good = log_log_slope(&gn_mode_scan(&gn(1.0, 2.0, 0.75, 3.0), &grid, &ks).unwrap());
        assert!((good + 0.5).abs() < 0.02, "{good}");
        let bad = log_log_slope(&gn_mode_scan(&gn(2.0, 2.0, 0.5, 1.2), &grid, &ks).unwrap());
        assert!((bad - 1.0).abs() < 0.02, "{bad}");
    }

    #[test]
    fn ensemble_is_reproducible() {
        let grid = Grid::new(16).unwrap();
        let case = &default_suite(11, 5)[3];
        assert_eq!(case.ratios(&grid).unwrap(), case.ratios(&grid).unwrap());
    }

    #[test]
    fn report_has_header_note_and_rows() {
        let case = default_suite(1, 3).remove(0);
        let report = check_case(&case, &[16]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lab.csv");
        write_report(&path, &[report]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# BMO"));
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("GN,"));
    }
}
