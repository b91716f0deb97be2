//! Time stepping, energy bookkeeping and the criterion monitor on short runs.

use std::f64::consts::PI;

use tcm::criterion::gronwall_envelope;
use tcm::inequality_lab::Generator;
use tcm::integrator::{
    initial_state, rhs_explicit, run, run_observed, step, InitialCondition, RunConfig, Scheme, StepOutcome,
};
use tcm::io::checkpoint::encode_checkpoint;
use tcm::ledger::{identity_suite, j_terms, LedgerRecord};
use tcm::operators::{damping, divergence};
use tcm::{Grid, ModelParams, Phase, SpectralField, State, Terms};

fn only(terms: Terms) -> ModelParams {
    ModelParams {
        terms,
        ..Default::default()
    }
}

fn single_mode_cfg(n: usize, params: ModelParams, t_end: f64) -> RunConfig {
    RunConfig {
        params,
        n,
        t_end,
        initial: InitialCondition {
            generator: Generator::SingleMode,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn random_cfg(n: usize, seed: u64, t_end: f64) -> RunConfig {
    RunConfig {
        n,
        t_end,
        initial: InitialCondition {
            generator: Generator::RandomBand,
            kmin: 1,
            kmax: 3,
            seed,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn gap(a: &SpectralField, b: &SpectralField) -> f64 {
    a.difference(b).unwrap().max_abs()
}

#[test]
fn zero_state_has_zero_tendencies_and_stays_zero() {
    let grid = Grid::new(8).unwrap();
    let zero = State::zeros(&grid);
    let n = rhs_explicit(&zero, &ModelParams::default()).unwrap();
    assert_eq!(n.u.max_abs() + n.v.max_abs() + n.theta.max_abs(), 0.0);
    for scheme in [Scheme::IfEuler, Scheme::IfHeun] {
        match step(&zero, &ModelParams::default(), 1e-3, scheme).unwrap() {
            StepOutcome::Advanced(next) => {
                assert_eq!(next.energy(), 0.0);
                assert_eq!(next.time, 1e-3);
            }
            StepOutcome::BlowUp => panic!("zero state blew up"),
        }
    }
}

#[test]
fn temperature_gradient_drives_v_only() {
    let grid = Grid::new(16).unwrap();
    let mut s = State::zeros(&grid);
    s.theta = SpectralField::single_mode(&grid, 1, 0, [1, 0, 0], 1.0, Phase::Sin).unwrap();
    let n = rhs_explicit(&s, &ModelParams::default()).unwrap();
    // dv = −∇ sin x = −(cos x, 0, 0)
    let expected = SpectralField::single_mode(&grid, 3, 0, [1, 0, 0], -1.0, Phase::Cos).unwrap();
    let scale = expected.max_abs();
    assert!(gap(&n.v, &expected) <= 1e-14 * scale);
    assert!(n.u.max_abs() <= 1e-14 * scale);
    assert!(n.theta.max_abs() <= 1e-14 * scale);
}

#[test]
fn shear_in_v_leaves_u_and_theta_at_rest() {
    let grid = Grid::new(16).unwrap();
    let mut s = State::zeros(&grid);
    s.v = SpectralField::single_mode(&grid, 3, 0, [0, 1, 0], 1.0, Phase::Sin).unwrap();
    let params = ModelParams::default();
    let n = rhs_explicit(&s, &params).unwrap();
    let scale = s.v.max_abs();
    // div v = 0 and div(v⊗v) = ∂x sin² y e_x = 0
    assert!(n.theta.max_abs() <= 1e-14 * scale);
    assert!(n.u.max_abs() <= 1e-14 * scale);
    // only damping acts on v: −σ₂ sin³ y = −σ₂ (3 sin y − sin 3y)/4
    let mut expected = SpectralField::single_mode(&grid, 3, 0, [0, 1, 0], -0.75 * params.sigma2, Phase::Sin).unwrap();
    expected.add_mode(0, [0, 3, 0], 0.25 * params.sigma2, Phase::Sin).unwrap();
    assert!(gap(&n.v, &expected) <= 1e-13 * scale);
}

#[test]
fn pure_diffusion_follows_the_heat_kernel() {
    let cfg = single_mode_cfg(16, only(Terms::none()), 0.1);
    let traj = run(&cfg).unwrap();
    // u₀ = (sin y, 0, 0): ‖u(t)‖ = ‖u₀‖ e^{−t}
    let norm0 = ((2.0 * PI).powi(3) / 2.0).sqrt();
    let t = traj.final_state.time;
    let norm = traj.final_state.u.l2_norm_sq().sqrt();
    assert!(((norm - norm0 * (-t).exp()) / norm).abs() <= 1e-8);
}

#[test]
fn strong_damping_decreases_the_norm_monotonically() {
    let params = ModelParams {
        sigma1: 50.0,
        alpha: 3.0,
        terms: Terms {
            transport: false,
            coupling: false,
            damping: true,
        },
        ..Default::default()
    };
    let mut cfg = single_mode_cfg(16, params, 0.05);
    cfg.initial.amplitude = 2.0;
    let traj = run(&cfg).unwrap();
    assert_eq!(traj.ledger.len(), traj.steps + 1);
    for w in traj.ledger.windows(2) {
        assert!(w[1].energy_l2 < w[0].energy_l2, "energy rose at t = {}", w[1].time);
    }
    // faster than diffusion alone
    let e0 = traj.ledger[0].energy_l2;
    assert!(traj.budget.e_final < e0 * (-2.0 * traj.final_state.time).exp());
}

#[test]
fn zero_horizon_records_only_the_initial_state() {
    let cfg = RunConfig {
        n: 8,
        t_end: 0.0,
        ..Default::default()
    };
    let traj = run(&cfg).unwrap();
    assert_eq!(traj.steps, 0);
    assert_eq!(traj.ledger.len(), 1);
    assert_eq!(traj.criterion.len(), 1);
    assert_eq!(traj.ledger[0].time, 0.0);
    assert_eq!(traj.final_state, initial_state(&cfg).unwrap());
}

#[test]
fn u_stays_divergence_free_after_every_step() {
    for cfg in [
        RunConfig {
            n: 16,
            t_end: 0.05,
            ..Default::default()
        },
        RunConfig {
            scheme: Scheme::IfHeun,
            ..random_cfg(16, 11, 0.05)
        },
    ] {
        let mut worst = 0.0f64;
        let mut seen = 0;
        let traj = run_observed(&cfg, initial_state(&cfg).unwrap(), |s, _, _| {
            worst = worst.max(divergence(&s.u).unwrap().to_physical().iter().fold(0.0, |m, x| m.max(x.abs())));
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, traj.steps + 1);
        assert!(worst <= 1e-10, "div u reached {worst:e}");
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = random_cfg(16, 5, 0.02);
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(encode_checkpoint(&a.final_state), encode_checkpoint(&b.final_state));
    assert_eq!(a.ledger, b.ledger);
    assert_eq!(a.criterion, b.criterion);
    let other = run(&random_cfg(16, 6, 0.02)).unwrap();
    assert_ne!(other.final_state, a.final_state);
}

#[test]
fn taylor_green_run_closes_its_ledger() {
    let cfg = RunConfig {
        n: 32,
        t_end: 0.2,
        stride: 20,
        ..Default::default()
    };
    let mut identities = 0.0f64;
    let mut j57 = 0.0f64;
    let traj = run_observed(&cfg, initial_state(&cfg).unwrap(), |s, rec, _| {
        identities = identities.max(identity_suite(s).unwrap().max());
        j57 = j57.max(rec.j_terms.j5_j7_residual());
    })
    .unwrap();
    assert_eq!(traj.steps, 200);
    assert!(!traj.blew_up());
    assert!(identities <= 1e-11, "{identities:e}");
    assert!(j57 <= 1e-11, "{j57:e}");
    assert!(traj.budget.relative_residual <= 5e-3);
    // one step changes the energy by |residual_l2| dt, compared with E
    assert!(traj.budget.max_step_mismatch <= 1e-4, "{:e}", traj.budget.max_step_mismatch);
    for rec in &traj.ledger {
        for x in [rec.diss_u, rec.diss_v, rec.diss_theta, rec.damp_u, rec.damp_v] {
            assert!(x >= 0.0);
        }
    }
}

#[test]
fn gradient_balance_residual_is_first_order() {
    let residual = |dt: f64| {
        let cfg = RunConfig {
            dt,
            stride: 1_000_000,
            ..random_cfg(16, 3, 0.01)
        };
        let traj = run(&cfg).unwrap();
        let last = traj.ledger.last().unwrap();
        (last.residual_h1 / last.h1_energy).abs()
    };
    let (r1, r2, r3) = (residual(1e-3), residual(5e-4), residual(2.5e-4));
    assert!(r1 < 0.05, "{r1}");
    for ratio in [r1 / r2, r2 / r3] {
        assert!((1.7..=2.3).contains(&ratio), "{r1:e} {r2:e} {r3:e}");
    }
}

#[test]
fn heun_is_second_order() {
    let final_u = |scheme, dt| {
        let cfg = RunConfig {
            scheme,
            dt,
            stride: 1_000_000,
            ..random_cfg(16, 8, 0.04)
        };
        run(&cfg).unwrap().final_state
    };
    let reference = final_u(Scheme::IfHeun, 1.25e-4);
    let error = |scheme, dt| {
        let s: State = final_u(scheme, dt);
        gap(&s.u, &reference.u) + gap(&s.v, &reference.v) + gap(&s.theta, &reference.theta)
    };
    let euler = error(Scheme::IfEuler, 2e-3) / error(Scheme::IfEuler, 1e-3);
    let heun = error(Scheme::IfHeun, 2e-3) / error(Scheme::IfHeun, 1e-3);
    assert!((1.7..=2.3).contains(&euler), "Euler ratio {euler}");
    assert!((3.4..=4.6).contains(&heun), "Heun ratio {heun}");
}

#[test]
fn ledger_damping_matches_the_operator() {
    let cfg = random_cfg(16, 21, 0.0);
    let s = initial_state(&cfg).unwrap();
    let p = cfg.params;
    let rec = LedgerRecord::at(&s, &p).unwrap();
    let u_work = damping(&s.u, p.sigma1, p.alpha).unwrap().inner(&s.u).unwrap();
    let v_work = damping(&s.v, p.sigma2, p.beta).unwrap().inner(&s.v).unwrap();
    assert!((rec.damp_u - u_work).abs() <= 1e-12 * u_work);
    assert!((rec.damp_v - v_work).abs() <= 1e-12 * v_work);
}

#[test]
fn coupling_terms_cancel_for_a_single_mode() {
    let grid = Grid::new(16).unwrap();
    let mut s = State::zeros(&grid);
    s.theta = SpectralField::single_mode(&grid, 1, 0, [1, 0, 0], 1.0, Phase::Sin).unwrap();
    s.v = SpectralField::single_mode(&grid, 3, 0, [1, 0, 0], 0.5, Phase::Cos).unwrap();
    let j = j_terms(&s).unwrap();
    assert!(j.0[4].abs() > 1.0);
    assert!((j.0[4] + j.0[6]).abs() <= 1e-12 * j.0[4].abs());
}

#[test]
fn pure_diffusion_stays_below_the_envelope() {
    let cfg = RunConfig {
        stride: 5,
        ..single_mode_cfg(16, only(Terms::none()), 0.1)
    };
    let traj = run(&cfg).unwrap();
    let env = gronwall_envelope(&traj.criterion, &traj.ledger, 1.0, 0.0).unwrap();
    assert!(env.crossings.is_empty());
    assert!(env.points.windows(2).all(|w| w[1].envelope >= w[0].envelope));
    let flat = gronwall_envelope(&traj.criterion, &traj.ledger, 0.0, 0.0).unwrap();
    assert!(flat.points.iter().all(|p| p.envelope == flat.points[0].envelope));
}
