//! Regularity-criterion monitor: the exponents `δ(α)`, `γ(β)`, the running
//! integral of `‖u‖^δ_{Ḃ⁰∞,∞} + ‖v‖^γ_{Ḃ⁰∞,∞}`, and a user-parameterized
//! Gronwall envelope for the gradient energy.
//!
//! The monitor reports numbers and growth flags only. The constants in the
//! underlying estimates are unknown, so nothing here declares a run
//! regular or singular.

use std::f64::consts::E;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::State;
use crate::ledger::LedgerRecord;
use crate::littlewood_paley::DyadicDecomposition;
use crate::norms::sobolev_norm;

/// `6(a − 1)/(3a − 5)`; defined for `a > 5/3`.
pub fn exponent(a: f64) -> Result<f64> {
    let denom = 3.0 * a - 5.0;
    if !(denom > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "criterion exponent needs 3a - 5 > 0, got a = {a}"
        )));
    }
    if !(3.0..4.0).contains(&a) {
        warn!("damping exponent {a} outside [3, 4); criterion exponent computed anyway");
    }
    Ok(6.0 * (a - 1.0) / denom)
}

/// `(δ, γ)` for damping exponents `(α, β)`.
pub fn exponents(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    Ok((exponent(alpha)?, exponent(beta)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionRecord {
    pub time: f64,
    pub besov_u: f64,
    pub besov_v: f64,
    pub delta: f64,
    pub gamma: f64,
    pub integrand: f64,
    pub integral_to_date: f64,
    /// Running sup of `‖u‖_{H^s} + ‖v‖_{H^s} + ‖θ‖_{H^s}`.
    pub hs_norm_sup: f64,
}

/// Anything carrying a time and a criterion integrand value.
pub trait CriterionSample {
    fn time(&self) -> f64;
    fn integrand(&self) -> f64;
}

impl CriterionSample for CriterionRecord {
    fn time(&self) -> f64 {
        self.time
    }

    fn integrand(&self) -> f64 {
        self.integrand
    }
}

impl CriterionSample for (f64, f64) {
    fn time(&self) -> f64 {
        self.0
    }

    fn integrand(&self) -> f64 {
        self.1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CriterionFlag {
    /// Integral finite and the integrand not accelerating at the end.
    Finite,
    /// Integrand growing super-linearly over the final records, or the
    /// integral is no longer finite.
    Growth,
}

impl std::fmt::Display for CriterionFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Finite => "FINITE",
            Self::Growth => "GROWTH",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub integral: f64,
    pub flag: CriterionFlag,
    pub samples: usize,
    pub final_time: f64,
}

/// Records inspected by the growth test.
const GROWTH_WINDOW: usize = 5;

/// Trapezoidal integral of the criterion integrand over time-ordered
/// samples. Equal consecutive times are allowed; decreasing times are not.
pub fn accumulate<S: CriterionSample>(records: &[S]) -> Result<CriterionReport> {
    let mut integral = 0.0;
    for (i, w) in records.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        if b.time() < a.time() || b.time().is_nan() {
            return Err(Error::UnorderedRecords {
                index: i + 1,
                prev: a.time(),
                next: b.time(),
            });
        }
        integral += 0.5 * (b.time() - a.time()) * (a.integrand() + b.integrand());
    }
    let flag = if !integral.is_finite() || accelerating(records) {
        CriterionFlag::Growth
    } else {
        CriterionFlag::Finite
    };
    Ok(CriterionReport {
        integral,
        flag,
        samples: records.len(),
        final_time: records.last().map(|r| r.time()).unwrap_or(0.0),
    })
}

/// Strictly increasing integrand with strictly increasing slopes over the
/// last [`GROWTH_WINDOW`] samples.
fn accelerating<S: CriterionSample>(records: &[S]) -> bool {
    let tail = &records[records.len().saturating_sub(GROWTH_WINDOW)..];
    if tail.len() < 3 {
        return false;
    }
    let slopes: Vec<f64> = tail
        .windows(2)
        .map(|w| {
            let dt = w[1].time() - w[0].time();
            (w[1].integrand() - w[0].integrand()) / dt
        })
        .collect();
    slopes.iter().all(|s| *s > 0.0) && slopes.windows(2).all(|s| s[1] > s[0])
}

/// Evaluates criterion records along a trajectory, accumulating the
/// integral with the trapezoidal rule at every observed state.
#[derive(Clone, Debug)]
pub struct CriterionMonitor {
    decomposition: DyadicDecomposition,
    delta: f64,
    gamma: f64,
    hs_order: f64,
    integral: f64,
    hs_sup: f64,
    last: Option<(f64, f64)>,
}

impl CriterionMonitor {
    pub fn new(decomposition: DyadicDecomposition, alpha: f64, beta: f64, hs_order: f64) -> Result<Self> {
        let (delta, gamma) = exponents(alpha, beta)?;
        if !(hs_order >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "H^s order must be >= 0, got {hs_order}"
            )));
        }
        Ok(Self {
            decomposition,
            delta,
            gamma,
            hs_order,
            integral: 0.0,
            hs_sup: 0.0,
            last: None,
        })
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn observe(&mut self, state: &State) -> Result<CriterionRecord> {
        let besov_u = self.decomposition.besov_b0_inf_inf(&state.u);
        let besov_v = self.decomposition.besov_b0_inf_inf(&state.v);
        let integrand = besov_u.powf(self.delta) + besov_v.powf(self.gamma);
        if let Some((t0, f0)) = self.last {
            if state.time < t0 {
                return Err(Error::UnorderedRecords {
                    index: 0,
                    prev: t0,
                    next: state.time,
                });
            }
            self.integral += 0.5 * (state.time - t0) * (f0 + integrand);
        }
        self.last = Some((state.time, integrand));
        let hs = sobolev_norm(&state.u, self.hs_order, false)?
            + sobolev_norm(&state.v, self.hs_order, false)?
            + sobolev_norm(&state.theta, self.hs_order, false)?;
        self.hs_sup = self.hs_sup.max(hs);
        Ok(CriterionRecord {
            time: state.time,
            besov_u,
            besov_v,
            delta: self.delta,
            gamma: self.gamma,
            integrand,
            integral_to_date: self.integral,
            hs_norm_sup: self.hs_sup,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub time: f64,
    pub gradient_energy: f64,
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub points: Vec<EnvelopePoint>,
    /// Times at which the gradient energy moves above the envelope.
    pub crossings: Vec<f64>,
}

/// Compares `‖∇(u,v,θ)(t)‖²` against
/// `‖∇(u,v,θ)(t*)‖² · exp(c_fit ∫_{t*}^t (1 + ‖u‖^δ + ‖v‖^γ) ln(e + y) dℓ)`
/// with `y` the running `H^s` sup. The anchor is the first record at or
/// after `t_star`.
pub fn gronwall_envelope(
    criterion: &[CriterionRecord],
    ledger: &[LedgerRecord],
    c_fit: f64,
    t_star: f64,
) -> Result<Envelope> {
    if criterion.len() != ledger.len() {
        return Err(Error::InvalidArgument(format!(
            "criterion and ledger series differ in length ({} vs {})",
            criterion.len(),
            ledger.len()
        )));
    }
    let (first, last) = match (criterion.first(), criterion.last()) {
        (Some(a), Some(b)) => (a.time, b.time),
        _ => {
            return Ok(Envelope {
                points: Vec::new(),
                crossings: Vec::new(),
            })
        }
    };
    if !(t_star >= first && t_star <= last) {
        return Err(Error::InvalidArgument(format!(
            "t_star = {t_star} outside the record range [{first}, {last}]"
        )));
    }
    let anchor = criterion
        .iter()
        .position(|r| r.time >= t_star)
        .expect("t_star within range");
    let h_star = ledger[anchor].h1_energy;
    let weight = |r: &CriterionRecord| (1.0 + r.integrand) * (E + r.hs_norm_sup).ln();

    let mut points = Vec::with_capacity(criterion.len() - anchor);
    let mut crossings = Vec::new();
    let mut exponent_integral = 0.0;
    let mut above = false;
    for i in anchor..criterion.len() {
        if i > anchor {
            let (a, b) = (&criterion[i - 1], &criterion[i]);
            exponent_integral += 0.5 * (b.time - a.time) * (weight(a) + weight(b));
        }
        let envelope = h_star * (c_fit * exponent_integral).exp();
        let gradient_energy = ledger[i].h1_energy;
        let now_above = gradient_energy > envelope;
        if now_above && !above {
            crossings.push(criterion[i].time);
        }
        above = now_above;
        points.push(EnvelopePoint {
            time: criterion[i].time,
            gradient_energy,
            envelope,
        });
    }
    Ok(Envelope { points, crossings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_values() {
        assert!((exponent(3.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((exponent(3.5).unwrap() - 30.0 / 11.0).abs() < 1e-15);
        let (d, g) = exponents(3.0, 3.0).unwrap();
        assert_eq!((d, g), (3.0, 3.0));
    }

    #[test]
    fn exponent_pole_rejected() {
        assert!(exponent(5.0 / 3.0).is_err());
        assert!(exponent(1.0).is_err());
        assert!(exponent(f64::NAN).is_err());
        // outside [3, 4) still computes
        assert!((exponent(5.0).unwrap() - 2.4).abs() < 1e-15);
    }

    #[test]
    fn constant_integrand_is_exact() {
        let recs: Vec<(f64, f64)> = (0..=10).map(|i| (0.1 * i as f64, 2.5)).collect();
        let r = accumulate(&recs).unwrap();
        assert!((r.integral - 2.5).abs() < 1e-14);
        assert_eq!(r.flag, CriterionFlag::Finite);
    }

    #[test]
    fn empty_sequence_is_zero() {
        let r = accumulate::<(f64, f64)>(&[]).unwrap();
        assert_eq!(r.integral, 0.0);
        assert_eq!(r.samples, 0);
    }

    #[test]
    fn unordered_times_rejected() {
        let recs = [(0.0, 1.0), (0.2, 1.0), (0.1, 1.0)];
        assert!(matches!(
            accumulate(&recs),
            Err(Error::UnorderedRecords { index: 2, .. })
        ));
    }

    #[test]
    fn accelerating_tail_flags_growth() {
        let recs: Vec<(f64, f64)> = (0..8).map(|i| (i as f64, (i as f64).powi(3))).collect();
        assert_eq!(accumulate(&recs).unwrap().flag, CriterionFlag::Growth);
        let linear: Vec<(f64, f64)> = (0..8).map(|i| (i as f64, i as f64)).collect();
        assert_eq!(accumulate(&linear).unwrap().flag, CriterionFlag::Finite);
        let decaying: Vec<(f64, f64)> = (0..8).map(|i| (i as f64, (-(i as f64)).exp())).collect();
        assert_eq!(accumulate(&decaying).unwrap().flag, CriterionFlag::Finite);
    }

    fn crit(time: f64, integrand: f64, hs: f64) -> CriterionRecord {
        CriterionRecord {
            time,
            besov_u: 0.0,
            besov_v: 0.0,
            delta: 3.0,
            gamma: 3.0,
            integrand,
            integral_to_date: 0.0,
            hs_norm_sup: hs,
        }
    }

    fn ledger(time: f64, h1: f64) -> LedgerRecord {
        LedgerRecord {
            time,
            h1_energy: h1,
            ..LedgerRecord::default()
        }
    }

    #[test]
    fn zero_trajectory_has_flat_zero_envelope() {
        let c: Vec<_> = (0..5).map(|i| crit(i as f64, 0.0, 0.0)).collect();
        let l: Vec<_> = (0..5).map(|i| ledger(i as f64, 0.0)).collect();
        let env = gronwall_envelope(&c, &l, 1.0, 0.0).unwrap();
        assert!(env.points.iter().all(|p| p.envelope == 0.0 && p.gradient_energy == 0.0));
        assert!(env.crossings.is_empty());
    }

    #[test]
    fn zero_constant_reports_excursions() {
        let h = [1.0, 0.5, 1.5, 2.0, 0.8, 1.2];
        let c: Vec<_> = (0..6).map(|i| crit(i as f64, 1.0, 1.0)).collect();
        let l: Vec<_> = h.iter().enumerate().map(|(i, &x)| ledger(i as f64, x)).collect();
        let env = gronwall_envelope(&c, &l, 0.0, 0.0).unwrap();
        assert!(env.points.iter().all(|p| p.envelope == 1.0));
        assert_eq!(env.crossings, vec![2.0, 5.0]);
    }

    #[test]
    fn t_star_must_be_in_range() {
        let c = vec![crit(0.0, 0.0, 0.0), crit(1.0, 0.0, 0.0)];
        let l = vec![ledger(0.0, 1.0), ledger(1.0, 1.0)];
        assert!(gronwall_envelope(&c, &l, 1.0, 2.0).is_err());
        let env = gronwall_envelope(&c, &l, 1.0, 0.5).unwrap();
        assert_eq!(env.points.len(), 1);
    }
}
