//! Energy bookkeeping along trajectories.
//!
//! The `L²` budget
//! `d/dt ‖(u,v,θ)‖² + 2(ν‖∇u‖² + η‖∇v‖² + μ‖∇θ‖² + σ₁‖u‖_{α+1}^{α+1} + σ₂‖v‖_{β+1}^{β+1}) = 0`
//! and the gradient balance
//! `½ d/dt ‖∇(u,v,θ)‖² + ν‖Δu‖² + η‖Δv‖² + μ‖Δθ‖² + D_u + D_v = Σ J_i`
//! are evaluated with the integrator's own discrete derivative: viscous
//! terms use the integrating-factor rate `(1 − e^{−2κ|k|²Δt}) / (2Δt)`
//! in place of `κ|k|²`, so pure diffusion closes to round-off and the
//! remaining residual is the first-order splitting error.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{magnitude, SpectralField, State};
use crate::norms::{gradient_norm_sq, lp_power_samples};
use crate::operators::{
    damping, divergence, gradient, laplacian, physical, physical_gradient, ModelParams,
    TransportTerms,
};

/// `J₁ … J₇`: `∫(u·∇)u·Δu`, `∫div(v⊗v)·Δu`, `∫(u·∇)v·Δv`, `∫(v·∇)u·Δv`,
/// `∫∇θ·Δv`, `∫(u·∇)θ·Δθ`, `∫div v Δθ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct JTerms(pub [f64; 7]);

impl JTerms {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Sum of the terms present in the dynamics selected by `params.terms`.
    pub fn active_sum(&self, params: &ModelParams) -> f64 {
        let j = &self.0;
        let mut s = 0.0;
        if params.terms.transport {
            s += j[0] + j[1] + j[2] + j[3] + j[5];
        }
        if params.terms.coupling {
            s += j[4] + j[6];
        }
        s
    }

    /// `|J₅ + J₇| / (|J₅| + |J₇|)`, zero when both vanish.
    pub fn j5_j7_residual(&self) -> f64 {
        relative(self.0[4] + self.0[6], self.0[4].abs() + self.0[6].abs())
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        value.abs()
    } else {
        value.abs() / scale
    }
}

pub fn j_terms(state: &State) -> Result<JTerms> {
    let t = TransportTerms::compute(&state.u, &state.v, &state.theta)?;
    j_terms_from(state, &t)
}

fn j_terms_from(state: &State, t: &TransportTerms) -> Result<JTerms> {
    let lap_u = laplacian(&state.u);
    let lap_v = laplacian(&state.v);
    let lap_t = laplacian(&state.theta);
    Ok(JTerms([
        t.u_adv_u.inner(&lap_u)?,
        t.div_vv.inner(&lap_u)?,
        t.u_adv_v.inner(&lap_v)?,
        t.v_adv_u.inner(&lap_v)?,
        gradient(&state.theta)?.inner(&lap_v)?,
        t.u_adv_theta.inner(&lap_t)?,
        divergence(&state.v)?.inner(&lap_t)?,
    ]))
}

/// Relative residuals of the vanishing integrals behind the `L²` identity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `∫div(v⊗v)·u + ∫(v·∇)u·v`
    pub baroclinic: f64,
    /// `∫∇θ·v + ∫(div v)θ`
    pub duality: f64,
    /// `∫(u·∇)u·u`
    pub advect_u: f64,
    /// `∫(u·∇)v·v`
    pub advect_v: f64,
    /// `∫(u·∇)θ·θ`
    pub advect_theta: f64,
}

impl IdentityResiduals {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.baroclinic,
            self.duality,
            self.advect_u,
            self.advect_v,
            self.advect_theta,
        ]
    }

    pub fn names() -> [&'static str; 5] {
        ["baroclinic", "duality", "advect_u", "advect_v", "advect_theta"]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

/// Evaluates the five vanishing integrals, each normalized by a bound that
/// does not rely on cancellation: `‖a‖_∞ ‖∇w‖ ‖w‖` for `∫(a·∇)w·w`,
/// `‖∇θ‖ ‖v‖ + ‖div v‖ ‖θ‖` for the duality pair. Symmetric data whose
/// integrands vanish pointwise therefore still give round-off residuals.
/// The three transport identities need `div u = 0`; the pairs hold for any
/// state.
pub fn identity_suite(state: &State) -> Result<IdentityResiduals> {
    let t = TransportTerms::compute(&state.u, &state.v, &state.theta)?;
    identity_suite_from(state, &t)
}

fn sup(f: &SpectralField) -> f64 {
    let samples = physical(f);
    let len = f.grid().len();
    (0..len).map(|p| magnitude(&samples, f.components(), len, p)).fold(0.0, f64::max)
}

fn identity_suite_from(state: &State, t: &TransportTerms) -> Result<IdentityResiduals> {
    let norm = |f: &SpectralField| f.l2_norm_sq().sqrt();
    let grad = |f: &SpectralField| gradient_norm_sq(f).sqrt();
    let (sup_u, sup_v) = (sup(&state.u), sup(&state.v));
    let transport = |term: &SpectralField, w: &SpectralField| -> Result<f64> {
        Ok(relative(term.inner(w)?, sup_u * grad(w) * norm(w)))
    };
    let baroclinic = t.div_vv.inner(&state.u)? + t.v_adv_u.inner(&state.v)?;
    let duality = gradient(&state.theta)?.inner(&state.v)? + divergence(&state.v)?.inner(&state.theta)?;
    let duality_scale = grad(&state.theta) * norm(&state.v) + norm(&divergence(&state.v)?) * norm(&state.theta);
    Ok(IdentityResiduals {
        baroclinic: relative(baroclinic, 2.0 * sup_v * norm(&state.v) * grad(&state.u)),
        duality: relative(duality, duality_scale),
        advect_u: transport(&t.u_adv_u, &state.u)?,
        advect_v: transport(&t.u_adv_v, &state.v)?,
        advect_theta: transport(&t.u_adv_theta, &state.theta)?,
    })
}

/// Both forms of the damping contribution to the gradient balance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DampingGradient {
    /// `−σ ∫ |w|^{γ−1} w · Δw`, as a spectral inner product.
    pub direct: f64,
    /// `σ ‖|w|^{(γ−1)/2} ∇w‖² + 4σ(γ−1)/(γ+1)² ‖∇|w|^{(γ+1)/2}‖²`,
    /// evaluated pointwise on the grid.
    pub pointwise: f64,
}

pub fn damping_gradient(w: &SpectralField, sigma: f64, exponent: f64) -> Result<DampingGradient> {
    let direct = -damping(w, sigma, exponent)?.inner(&laplacian(w))?;
    let grid = w.grid();
    let len = grid.len();
    let comps = w.components();
    let samples = physical(w);
    let grads = physical_gradient(w);
    let mut sum = 0.0;
    for p in 0..len {
        let m = magnitude(&samples, comps, len, p);
        if m == 0.0 {
            continue;
        }
        let mut grad_sq = 0.0;
        let mut radial_sq = 0.0;
        for j in 0..3 {
            let mut radial = 0.0;
            for c in 0..comps {
                let d = grads[(c * 3 + j) * len + p];
                grad_sq += d * d;
                radial += samples[c * len + p] * d;
            }
            radial_sq += radial * radial;
        }
        // |∇|w|^{(γ+1)/2}|² = ((γ+1)/2)² |w|^{γ−3} |Σ_i w_i ∇w_i|²
        sum += m.powf(exponent - 1.0) * grad_sq + (exponent - 1.0) * m.powf(exponent - 3.0) * radial_sq;
    }
    Ok(DampingGradient {
        direct,
        pointwise: sigma * sum * grid.cell_volume(),
    })
}

/// `Σ_k (1 − e^{−2κ|k|²Δt})/(2Δt) |k|^{2m} |ŵ|²`: the discrete counterpart
/// of `κ‖∇^{m+1} w‖²` for the integrating-factor step.
fn scheme_dissipation(w: &SpectralField, kappa: f64, dt: f64, order: i32) -> f64 {
    let grid = w.grid();
    let mut s = 0.0;
    for c in 0..w.components() {
        for (idx, z) in w.component(c).iter().enumerate() {
            let k2 = grid.k_squared(idx);
            let rate = -(-2.0 * kappa * k2 * dt).exp_m1() / (2.0 * dt);
            s += rate * k2.powi(order) * z.norm_sqr();
        }
    }
    s * grid.parseval_factor()
}

/// `(σ₁‖u‖_{α+1}^{α+1}, σ₂‖v‖_{β+1}^{β+1})`, zero when damping is off.
pub(crate) fn damping_powers(
    params: &ModelParams,
    grid_len: usize,
    cell: f64,
    u_phys: &[f64],
    v_phys: &[f64],
) -> (f64, f64) {
    if !params.terms.damping {
        return (0.0, 0.0);
    }
    (
        params.sigma1 * lp_power_samples(u_phys, 3, grid_len, cell, params.alpha + 1.0),
        params.sigma2 * lp_power_samples(v_phys, 3, grid_len, cell, params.beta + 1.0),
    )
}

/// Per-step quantities of the `L²` budget evaluated at the start state.
#[derive(Clone, Copy, Debug)]
pub(crate) struct L2Start {
    pub energy: f64,
    pub damp_u: f64,
    pub damp_v: f64,
}

impl L2Start {
    pub fn new(state: &State, params: &ModelParams, u_phys: &[f64], v_phys: &[f64]) -> Self {
        let grid = state.grid();
        let (damp_u, damp_v) = damping_powers(params, grid.len(), grid.cell_volume(), u_phys, v_phys);
        Self {
            energy: state.energy(),
            damp_u,
            damp_v,
        }
    }

    /// Dissipation rate (viscous plus damping) charged over a step of `dt`.
    pub fn dissipation_rate(&self, state: &State, params: &ModelParams, dt: f64) -> f64 {
        scheme_dissipation(&state.u, params.nu, dt, 0)
            + scheme_dissipation(&state.v, params.eta, dt, 0)
            + scheme_dissipation(&state.theta, params.mu, dt, 0)
            + self.damp_u
            + self.damp_v
    }
}

fn step_size(prev: &State, next: &State) -> Result<f64> {
    let dt = next.time - prev.time;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "budget needs next.time > prev.time, got {} -> {}",
            prev.time, next.time
        )));
    }
    Ok(dt)
}

/// `[E(next) − E(prev)]/Δt + 2(dissipation + damping at prev)`.
pub fn l2_budget(prev: &State, next: &State, params: &ModelParams) -> Result<f64> {
    let dt = step_size(prev, next)?;
    let start = L2Start::new(prev, params, &physical(&prev.u), &physical(&prev.v));
    Ok(l2_residual(&start, prev, next, params, dt))
}

pub(crate) fn l2_residual(start: &L2Start, prev: &State, next: &State, params: &ModelParams, dt: f64) -> f64 {
    (next.energy() - start.energy) / dt + 2.0 * start.dissipation_rate(prev, params, dt)
}

/// Gradient-balance quantities at the start of a step.
#[derive(Clone, Copy, Debug)]
pub(crate) struct H1Start {
    pub h1: f64,
    pub viscous: f64,
    pub damping: f64,
    pub j_active: f64,
}

impl H1Start {
    pub fn new(state: &State, params: &ModelParams, j: &JTerms, dt: f64) -> Result<Self> {
        let damping = if params.terms.damping {
            damping_gradient(&state.u, params.sigma1, params.alpha)?.direct
                + damping_gradient(&state.v, params.sigma2, params.beta)?.direct
        } else {
            0.0
        };
        Ok(Self {
            h1: h1_energy(state),
            viscous: scheme_dissipation(&state.u, params.nu, dt, 1)
                + scheme_dissipation(&state.v, params.eta, dt, 1)
                + scheme_dissipation(&state.theta, params.mu, dt, 1),
            damping,
            j_active: j.active_sum(params),
        })
    }

    pub fn residual(&self, next: &State, dt: f64) -> f64 {
        (h1_energy(next) - self.h1) / (2.0 * dt) + self.viscous + self.damping - self.j_active
    }
}

/// `[‖∇(u,v,θ)(next)‖² − ‖∇(u,v,θ)(prev)‖²]/(2Δt) + viscous + damping − Σ J`.
pub fn h1_budget(prev: &State, next: &State, params: &ModelParams) -> Result<f64> {
    let dt = step_size(prev, next)?;
    let start = H1Start::new(prev, params, &j_terms(prev)?, dt)?;
    Ok(start.residual(next, dt))
}

pub fn h1_energy(state: &State) -> f64 {
    gradient_norm_sq(&state.u) + gradient_norm_sq(&state.v) + gradient_norm_sq(&state.theta)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LedgerRecord {
    pub time: f64,
    pub energy_l2: f64,
    pub diss_u: f64,
    pub diss_v: f64,
    pub diss_theta: f64,
    pub damp_u: f64,
    pub damp_v: f64,
    pub h1_energy: f64,
    pub j_terms: JTerms,
    pub damping_gradient_u: DampingGradient,
    pub damping_gradient_v: DampingGradient,
    /// Residual of the step that ended at `time`; zero for the first record.
    pub residual_l2: f64,
    /// Gradient-balance residual of the step that ended at `time`; NaN when
    /// not evaluated.
    pub residual_h1: f64,
}

impl LedgerRecord {
    /// Budget entries at one state; residuals are left at zero.
    pub fn at(state: &State, params: &ModelParams) -> Result<Self> {
        let u_phys = physical(&state.u);
        let v_phys = physical(&state.v);
        let grid = state.grid();
        let (damp_u, damp_v) = damping_powers(params, grid.len(), grid.cell_volume(), &u_phys, &v_phys);
        let transport = TransportTerms::from_samples(&state.u, &state.v, &state.theta, &u_phys, &v_phys);
        let (gu, gv) = if params.terms.damping {
            (
                damping_gradient(&state.u, params.sigma1, params.alpha)?,
                damping_gradient(&state.v, params.sigma2, params.beta)?,
            )
        } else {
            Default::default()
        };
        let (grad_u, grad_v, grad_t) = (
            gradient_norm_sq(&state.u),
            gradient_norm_sq(&state.v),
            gradient_norm_sq(&state.theta),
        );
        Ok(Self {
            time: state.time,
            energy_l2: state.energy(),
            diss_u: params.nu * grad_u,
            diss_v: params.eta * grad_v,
            diss_theta: params.mu * grad_t,
            damp_u,
            damp_v,
            h1_energy: grad_u + grad_v + grad_t,
            j_terms: j_terms_from(state, &transport)?,
            damping_gradient_u: gu,
            damping_gradient_v: gv,
            residual_l2: 0.0,
            residual_h1: 0.0,
        })
    }
}
