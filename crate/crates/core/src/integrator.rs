//! Time stepping for the damped tropical climate system
//!
//! ```text
//! ∂t u + (u·∇)u + div(v⊗v) − νΔu + ∇π + σ₁|u|^{α−1}u = 0,   div u = 0
//! ∂t v + (u·∇)v + (v·∇)u − ηΔv + ∇θ + σ₂|v|^{β−1}v = 0
//! ∂t θ + (u·∇)θ + div v − μΔθ = 0
//! ```
//!
//! Diffusion is integrated exactly with the factor `E = e^{−κ|k|²Δt}`; the
//! remaining terms are explicit. `IF-Euler` is `ŵ⁺ = E(ŵ + Δt N(ŵ))`,
//! `IF-Heun` its two-stage second-order variant. The pressure is removed
//! by Leray projection of the `u` tendency.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criterion::{CriterionMonitor, CriterionRecord};
use crate::error::{Error, Result};
use crate::field::{magnitude, project_leray, SpectralField, State};
use crate::grid::Grid;
use crate::inequality_lab::{sample_field, FieldSpec, Generator};
use crate::ledger::{l2_residual, H1Start, L2Start, LedgerRecord};
use crate::littlewood_paley::DyadicDecomposition;
use crate::operators::{
    dealiased_spectral, damping_samples, divergence, gradient, physical, ModelParams, TransportTerms,
};

/// Order of the `H^s` norm tracked by the criterion monitor.
pub const HS_ORDER: f64 = 2.0;

/// A CFL-limited step shorter than this fraction of `dt` counts as blow-up.
pub const MIN_DT_FRACTION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    IfEuler,
    IfHeun,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "if-euler" => Ok(Self::IfEuler),
            "if-heun" => Ok(Self::IfHeun),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme '{other}' (expected if-euler or if-heun)"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IfEuler => "if-euler",
            Self::IfHeun => "if-heun",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialCondition {
    pub generator: Generator,
    pub amplitude: f64,
    pub seed: u64,
    /// Band of the random generator.
    pub kmin: u32,
    pub kmax: u32,
    /// Wavenumber of the single-mode generator.
    pub mode: i64,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self {
            generator: Generator::TaylorGreen,
            amplitude: 1.0,
            seed: 0,
            kmin: 1,
            kmax: 4,
            mode: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub n: usize,
    pub length: f64,
    pub dealias: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Courant number bound `Δt max(|u| + |v|) / Δx`.
    pub cfl_limit: f64,
    pub scheme: Scheme,
    pub initial: InitialCondition,
    /// Record every `stride` steps; the first and last states are always
    /// recorded.
    pub stride: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            n: 32,
            length: 2.0 * std::f64::consts::PI,
            dealias: crate::grid::TWO_THIRDS,
            dt: 1e-3,
            t_end: 0.0,
            cfl_limit: 0.5,
            scheme: Scheme::IfEuler,
            initial: InitialCondition::default(),
            stride: 1,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if !(self.cfl_limit > 0.0) {
            return bad(format!("cfl_limit must be positive, got {}", self.cfl_limit));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        // TOML integers are signed 64-bit
        if self.initial.seed > i64::MAX as u64 {
            return bad(format!("seed must be at most {}, got {}", i64::MAX, self.initial.seed));
        }
        let grid = self.grid()?;
        if self.initial.generator == Generator::RandomBand && self.initial.kmax as i64 > grid.dealias_cutoff() {
            return bad(format!(
                "initial band edge {} exceeds the dealiasing cutoff {} of n = {}",
                self.initial.kmax,
                grid.dealias_cutoff(),
                self.n
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::with_params(self.n, self.length, self.dealias)
    }
}

/// Builds the initial state. All fields are dealiased and `u` is
/// projected onto divergence-free fields.
///
/// * `taylor-green`: `u = A(sin x cos y cos z, −cos x sin y cos z, 0)`,
///   `v = A(sin x cos y, sin y cos z, sin z cos x)`, `θ = A sin x sin y sin z`.
/// * `single-mode`: `u = A(sin(m y), 0, 0)`, `v = θ = 0`.
/// * `random-band`: independent band-limited fields seeded `seed`,
///   `seed + 1`, `seed + 2`.
pub fn initial_state(cfg: &RunConfig) -> Result<State> {
    let grid = cfg.grid()?;
    let ic = &cfg.initial;
    let a = ic.amplitude;
    let (u, v, theta) = match ic.generator {
        Generator::TaylorGreen => {
            let tg = |components| {
                sample_field(
                    &FieldSpec {
                        generator: Generator::TaylorGreen,
                        components,
                        kmin: 1,
                        kmax: 1,
                        amplitude: a,
                        seed: 0,
                        solenoidal: false,
                    },
                    &grid,
                )
            };
            (tg(3)?, sample_v_taylor_green(&grid, a), tg(1)?)
        }
        Generator::SingleMode => {
            let u = SpectralField::single_mode(&grid, 3, 0, [0, ic.mode, 0], a, crate::field::Phase::Sin)?;
            (u, SpectralField::zeros(&grid, 3), SpectralField::zeros(&grid, 1))
        }
        Generator::RandomBand => {
            let spec = |components, seed| {
                FieldSpec::random_band(components, ic.kmin, ic.kmax, seed).with_amplitude(a)
            };
            (
                sample_field(&spec(3, ic.seed).solenoidal(), &grid)?,
                sample_field(&spec(3, ic.seed.wrapping_add(1)), &grid)?,
                sample_field(&spec(1, ic.seed.wrapping_add(2)), &grid)?,
            )
        }
    };
    State::new(project_leray(&u.dealiased())?, v.dealiased(), theta.dealiased(), 0.0)
}

fn sample_v_taylor_green(grid: &Grid, a: f64) -> SpectralField {
    let n = grid.n();
    let len = grid.len();
    let mut samples = vec![0.0; 3 * len];
    for i in 0..n {
        let x = grid.coordinate(i);
        for j in 0..n {
            let y = grid.coordinate(j);
            for l in 0..n {
                let z = grid.coordinate(l);
                let p = grid.flat(i, j, l);
                samples[p] = a * x.sin() * y.cos();
                samples[len + p] = a * y.sin() * z.cos();
                samples[2 * len + p] = a * z.sin() * x.cos();
            }
        }
    }
    let mut f = SpectralField::zeros(grid, 3);
    f.load_physical(&samples);
    f
}

/// Explicit tendencies `N(u, v, θ)`; the `u` part is divergence-free.
#[derive(Clone, Debug)]
pub struct Tendencies {
    pub u: SpectralField,
    pub v: SpectralField,
    pub theta: SpectralField,
}

/// Right-hand side without diffusion, honoring `params.terms`.
pub fn rhs_explicit(state: &State, params: &ModelParams) -> Result<Tendencies> {
    rhs_with_samples(state, params, &physical(&state.u), &physical(&state.v))
}

fn rhs_with_samples(state: &State, params: &ModelParams, u_phys: &[f64], v_phys: &[f64]) -> Result<Tendencies> {
    let grid = state.grid();
    let len = grid.len();
    let mut nu = SpectralField::zeros(grid, 3);
    let mut nv = SpectralField::zeros(grid, 3);
    let mut nt = SpectralField::zeros(grid, 1);
    if params.terms.transport {
        let t = TransportTerms::from_samples(&state.u, &state.v, &state.theta, u_phys, v_phys);
        nu.axpy(-1.0, &t.u_adv_u)?;
        nu.axpy(-1.0, &t.div_vv)?;
        nv.axpy(-1.0, &t.u_adv_v)?;
        nv.axpy(-1.0, &t.v_adv_u)?;
        nt.axpy(-1.0, &t.u_adv_theta)?;
    }
    if params.terms.coupling {
        nv.axpy(-1.0, &gradient(&state.theta)?)?;
        nt.axpy(-1.0, &divergence(&state.v)?)?;
    }
    if params.terms.damping {
        let du = damping_samples(u_phys, 3, len, params.sigma1, params.alpha);
        let dv = damping_samples(v_phys, 3, len, params.sigma2, params.beta);
        nu.axpy(-1.0, &dealiased_spectral(grid, 3, &du))?;
        nv.axpy(-1.0, &dealiased_spectral(grid, 3, &dv))?;
    }
    Ok(Tendencies {
        u: project_leray(&nu)?,
        v: nv,
        theta: nt,
    })
}

fn decay(field: &mut SpectralField, kappa: f64, dt: f64) {
    let grid = field.grid().clone();
    let len = grid.len();
    field.coeffs_mut().par_chunks_mut(len).for_each(|comp| {
        for (idx, c) in comp.iter_mut().enumerate() {
            *c *= (-kappa * grid.k_squared(idx) * dt).exp();
        }
    });
}

/// `E(w + dt n)`.
fn if_update(w: &SpectralField, n: &SpectralField, kappa: f64, dt: f64) -> Result<SpectralField> {
    let mut out = w.clone();
    out.axpy(dt, n)?;
    decay(&mut out, kappa, dt);
    Ok(out)
}

/// `E w + dt/2 (E n0 + n1)`.
fn heun_update(w: &SpectralField, n0: &SpectralField, n1: &SpectralField, kappa: f64, dt: f64) -> Result<SpectralField> {
    let mut out = w.clone();
    out.axpy(0.5 * dt, n0)?;
    decay(&mut out, kappa, dt);
    out.axpy(0.5 * dt, n1)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Advanced(State),
    /// The updated state contains NaN or infinite coefficients.
    BlowUp,
}

/// One step of length `dt`; no CFL control.
pub fn step(state: &State, params: &ModelParams, dt: f64, scheme: Scheme) -> Result<StepOutcome> {
    let u_phys = physical(&state.u);
    let v_phys = physical(&state.v);
    let n0 = rhs_with_samples(state, params, &u_phys, &v_phys)?;
    step_from(state, params, dt, scheme, &n0)
}

fn step_from(state: &State, params: &ModelParams, dt: f64, scheme: Scheme, n0: &Tendencies) -> Result<StepOutcome> {
    let euler = State {
        u: if_update(&state.u, &n0.u, params.nu, dt)?,
        v: if_update(&state.v, &n0.v, params.eta, dt)?,
        theta: if_update(&state.theta, &n0.theta, params.mu, dt)?,
        time: state.time + dt,
    };
    let next = match scheme {
        Scheme::IfEuler => euler,
        Scheme::IfHeun => {
            if !euler.is_finite() {
                return Ok(StepOutcome::BlowUp);
            }
            let n1 = rhs_explicit(&euler, params)?;
            State {
                u: heun_update(&state.u, &n0.u, &n1.u, params.nu, dt)?,
                v: heun_update(&state.v, &n0.v, &n1.v, params.eta, dt)?,
                theta: heun_update(&state.theta, &n0.theta, &n1.theta, params.mu, dt)?,
                time: state.time + dt,
            }
        }
    };
    if !next.is_finite() {
        return Ok(StepOutcome::BlowUp);
    }
    let u = project_leray(&next.u)?;
    Ok(StepOutcome::Advanced(State { u, ..next }))
}

/// `max_x (|u| + |v|)` over grid points.
fn max_speed(u_phys: &[f64], v_phys: &[f64], len: usize) -> f64 {
    (0..len)
        .into_par_iter()
        .map(|p| magnitude(u_phys, 3, len, p) + magnitude(v_phys, 3, len, p))
        .reduce(|| 0.0, f64::max)
}

/// Cumulative `L²` budget over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BudgetSummary {
    pub e0: f64,
    pub e_final: f64,
    /// `Σ 2 Δt (dissipation + damping)` charged by the scheme.
    pub dissipated: f64,
    /// `|E_final − E_0 + dissipated| / E_0`.
    pub relative_residual: f64,
    /// Largest per-step `|residual_l2|`.
    pub max_step_residual: f64,
    /// Largest per-step `|residual_l2| Δt / E`, the energy mismatch of one
    /// step relative to the energy at its start.
    pub max_step_mismatch: f64,
}

impl BudgetSummary {
    fn close(&mut self) {
        let gap = (self.e_final - self.e0 + self.dissipated).abs();
        self.relative_residual = if self.e0 > 0.0 { gap / self.e0 } else { gap };
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Completed,
    /// Non-finite coefficients appeared in the step starting at `time`, or
    /// the CFL bound shrank the step below [`MIN_DT_FRACTION`]` · dt`.
    BlowUp { time: f64, step: usize },
}

/// Recorded diagnostics of a run. Intermediate states are not stored; use
/// [`run_observed`] to see them.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub ledger: Vec<LedgerRecord>,
    pub criterion: Vec<CriterionRecord>,
    /// Last finite state.
    pub final_state: State,
    pub outcome: RunOutcome,
    pub budget: BudgetSummary,
    pub steps: usize,
    /// Steps shortened by the CFL bound.
    pub dt_reductions: usize,
}

impl Trajectory {
    pub fn blew_up(&self) -> bool {
        matches!(self.outcome, RunOutcome::BlowUp { .. })
    }
}

/// Runs from the configured initial condition.
pub fn run(cfg: &RunConfig) -> Result<Trajectory> {
    run_from(cfg, initial_state(cfg)?)
}

/// Runs from `state` up to `cfg.t_end`.
pub fn run_from(cfg: &RunConfig, state: State) -> Result<Trajectory> {
    run_observed(cfg, state, |_, _, _| {})
}

/// Like [`run_from`], calling `observer` at every recorded state.
pub fn run_observed<F>(cfg: &RunConfig, state: State, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(&State, &LedgerRecord, &CriterionRecord),
{
    cfg.validate()?;
    let grid = cfg.grid()?;
    if state.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    if !state.is_finite() {
        return Err(Error::InvalidArgument("initial state is not finite".into()));
    }
    let params = &cfg.params;
    let len = grid.len();
    let dx = grid.spacing();
    let mut monitor = CriterionMonitor::new(DyadicDecomposition::new(&grid), params.alpha, params.beta, HS_ORDER)?;

    let mut ledger = Vec::new();
    let mut criterion = Vec::new();
    let first = LedgerRecord::at(&state, params)?;
    let first_crit = monitor.observe(&state)?;
    observer(&state, &first, &first_crit);
    let mut budget = BudgetSummary {
        e0: first.energy_l2,
        e_final: first.energy_l2,
        ..Default::default()
    };
    ledger.push(first);
    criterion.push(first_crit);

    let mut current = state;
    let mut steps = 0;
    let mut dt_reductions = 0;
    let mut outcome = RunOutcome::Completed;
    let finish_tol = 1e-9 * cfg.dt;
    while cfg.t_end - current.time > finish_tol {
        let u_phys = physical(&current.u);
        let v_phys = physical(&current.v);
        let mut dt = cfg.dt.min(cfg.t_end - current.time);
        let speed = max_speed(&u_phys, &v_phys, len);
        if speed * dt > cfg.cfl_limit * dx {
            let limited = cfg.cfl_limit * dx / speed;
            warn!(
                "t = {:.6}: CFL bound reduces dt from {dt:.3e} to {limited:.3e}",
                current.time
            );
            dt = limited;
            dt_reductions += 1;
        }
        if !(dt > MIN_DT_FRACTION * cfg.dt) || current.time + dt == current.time {
            warn!("t = {}: time step collapsed to {dt:.3e}", current.time);
            outcome = RunOutcome::BlowUp {
                time: current.time,
                step: steps + 1,
            };
            break;
        }
        let record = (steps + 1) % cfg.stride == 0 || cfg.t_end - (current.time + dt) <= finish_tol;
        let l2_start = L2Start::new(&current, params, &u_phys, &v_phys);
        let h1_start = if record {
            Some(H1Start::new(&current, params, &crate::ledger::j_terms(&current)?, dt)?)
        } else {
            None
        };
        let n0 = rhs_with_samples(&current, params, &u_phys, &v_phys)?;
        let next = match step_from(&current, params, dt, cfg.scheme, &n0)? {
            StepOutcome::Advanced(next) => next,
            StepOutcome::BlowUp => {
                warn!("non-finite state after step {} at t = {}", steps + 1, current.time);
                outcome = RunOutcome::BlowUp {
                    time: current.time,
                    step: steps + 1,
                };
                break;
            }
        };
        steps += 1;
        budget.dissipated += 2.0 * dt * l2_start.dissipation_rate(&current, params, dt);
        let residual_l2 = l2_residual(&l2_start, &current, &next, params, dt);
        budget.max_step_residual = budget.max_step_residual.max(residual_l2.abs());
        if l2_start.energy > 0.0 {
            budget.max_step_mismatch = budget.max_step_mismatch.max(residual_l2.abs() * dt / l2_start.energy);
        }
        let crit = monitor.observe(&next)?;
        if let Some(h1) = h1_start {
            let mut rec = LedgerRecord::at(&next, params)?;
            rec.residual_l2 = residual_l2;
            rec.residual_h1 = h1.residual(&next, dt);
            observer(&next, &rec, &crit);
            ledger.push(rec);
            criterion.push(crit);
        }
        current = next;
    }
    budget.e_final = current.energy();
    budget.close();
    info!(
        "{steps} steps to t = {:.6}, relative L2 budget residual {:.3e}",
        current.time, budget.relative_residual
    );
    Ok(Trajectory {
        ledger,
        criterion,
        final_state: current,
        outcome,
        budget,
        steps,
        dt_reductions,
    })
}
