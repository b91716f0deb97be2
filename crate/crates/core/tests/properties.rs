//! Property tests over randomly generated fields, records and configs.

use proptest::prelude::*;

use tcm::criterion::{accumulate, exponent, CriterionSample};
use tcm::inequality_lab::{sample_field, FieldSpec, Generator};
use tcm::integrator::{InitialCondition, RunConfig, Scheme};
use tcm::io::checkpoint::{decode_checkpoint, encode_checkpoint};
use tcm::io::{parse_config, to_canonical_toml};
use tcm::littlewood_paley::DyadicDecomposition;
use tcm::norms::{lp_norm, sobolev_norm};
use tcm::operators::{advect, damping, div_tensor, divergence, gradient, lambda_s, laplacian};
use tcm::{project_leray, Grid, ModelParams, SpectralField, State, Terms};

const N: usize = 16;

fn grid() -> Grid {
    Grid::new(N).unwrap()
}

fn field(components: usize, kmax: u32, seed: u64, amplitude: f64) -> SpectralField {
    let spec = FieldSpec::random_band(components, 1, kmax, seed).with_amplitude(amplitude);
    sample_field(&spec, &grid()).unwrap()
}

fn with_mean(mut f: SpectralField, mean: f64) -> SpectralField {
    for c in 0..f.components() {
        f.add_mode(c, [0, 0, 0], mean * (c + 1) as f64, tcm::Phase::Cos).unwrap();
    }
    f
}

fn rel_gap(a: &SpectralField, b: &SpectralField) -> f64 {
    let scale = a.max_abs().max(b.max_abs());
    let d = a.difference(b).unwrap().max_abs();
    if scale == 0.0 {
        d
    } else {
        d / scale
    }
}

fn sup(samples: impl IntoIterator<Item = f64>) -> f64 {
    samples.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Sample {
    t: f64,
    f: f64,
}

impl CriterionSample for Sample {
    fn time(&self) -> f64 {
        self.t
    }
    fn integrand(&self) -> f64 {
        self.f
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leray_projection_is_idempotent(seed in any::<u64>(), kmax in 1u32..=7, mean in -2.0f64..2.0) {
        let w = with_mean(field(3, kmax, seed, 1.0), mean);
        let p = project_leray(&w).unwrap();
        prop_assert!(rel_gap(&project_leray(&p).unwrap(), &p) <= 1e-14);
        prop_assert!(divergence(&p).unwrap().max_abs() <= 1e-12 * w.max_abs());
        // the mean mode is left alone
        for c in 0..3 {
            prop_assert_eq!(p.component(c)[0], w.component(c)[0]);
        }
    }

    #[test]
    fn operators_keep_hermitian_symmetry(seed in any::<u64>(), kmax in 1u32..=5, s in 0.0f64..3.0) {
        let u = project_leray(&field(3, kmax, seed, 1.0)).unwrap();
        let v = field(3, kmax, seed ^ 1, 1.3);
        let theta = with_mean(field(1, kmax, seed ^ 2, 0.7), 0.4);
        let outputs = [
            gradient(&theta).unwrap(),
            divergence(&v).unwrap(),
            advect(&u, &v).unwrap(),
            advect(&u, &theta).unwrap(),
            div_tensor(&v).unwrap(),
            damping(&v, 1.0, 3.5).unwrap(),
            lambda_s(&theta, s).unwrap(),
            laplacian(&v),
            project_leray(&v).unwrap(),
        ];
        for out in &outputs {
            prop_assert!(out.hermitian_defect() <= 1e-14, "defect {}", out.hermitian_defect());
        }
    }

    #[test]
    fn physical_round_trip(samples in prop::collection::vec(-10.0f64..10.0, 8 * 8 * 8)) {
        let g = Grid::new(8).unwrap();
        let phys = ndarray::Array4::from_shape_vec((1, 8, 8, 8), samples.clone()).unwrap();
        let f = SpectralField::to_spectral(&g, &phys).unwrap();
        prop_assert!(f.hermitian_defect() == 0.0);
        let back = f.to_physical();
        let scale = sup(samples.iter().copied());
        let err = sup(back.iter().zip(&samples).map(|(a, b)| a - b));
        prop_assert!(err <= 1e-12 * scale.max(1.0), "round trip error {err}");
    }

    #[test]
    fn parseval(seed in any::<u64>(), kmax in 1u32..=7, mean in -1.0f64..1.0) {
        let f = with_mean(field(3, kmax, seed, 2.0), mean);
        let g = grid();
        let quadrature: f64 = f.to_physical().iter().map(|x| x * x).sum::<f64>() * g.cell_volume();
        let spectral = f.l2_norm_sq();
        prop_assert!((spectral - quadrature).abs() <= 1e-12 * quadrature);
    }

    #[test]
    fn gradient_and_divergence_are_adjoint(seed in any::<u64>(), kmax in 1u32..=5) {
        let theta = with_mean(field(1, kmax, seed, 1.0), 0.3);
        let v = field(3, kmax, seed.wrapping_add(9), 1.0);
        let a = gradient(&theta).unwrap().inner(&v).unwrap();
        let b = divergence(&v).unwrap().inner(&theta).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300));
    }

    #[test]
    fn damping_work_is_the_lp_norm(seed in any::<u64>(), kmax in 1u32..=5, sigma in 0.1f64..5.0, gamma in 3.0f64..4.0) {
        let w = field(3, kmax, seed, 1.5);
        let work = damping(&w, sigma, gamma).unwrap().inner(&w).unwrap();
        let expected = sigma * lp_norm(&w, gamma + 1.0).unwrap().powf(gamma + 1.0);
        prop_assert!(work >= 0.0);
        prop_assert!((work - expected).abs() <= 1e-10 * expected, "{} vs {}", work, expected);
    }

    #[test]
    fn product_rule_for_tensor_divergence(seed in any::<u64>(), kmax in 1u32..=3) {
        // 2 kmax < n/2: every product is resolved, so the identity is exact
        let v = field(3, kmax, seed, 1.0);
        let lhs = div_tensor(&v).unwrap();
        let div = divergence(&v).unwrap();
        let mut rhs = advect(&v, &v).unwrap();
        let div_phys = div.to_physical();
        let v_phys = v.to_physical();
        let mut prod = v_phys.clone();
        for c in 0..3 {
            let mut comp = prod.index_axis_mut(ndarray::Axis(0), c);
            comp *= &div_phys.index_axis(ndarray::Axis(0), 0);
        }
        rhs.axpy(1.0, &SpectralField::to_spectral(&grid(), &prod).unwrap().dealiased()).unwrap();
        prop_assert!(rel_gap(&lhs, &rhs) <= 1e-12, "gap {}", rel_gap(&lhs, &rhs));
    }

    #[test]
    fn lambda_powers_compose(seed in any::<u64>(), a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let f = field(1, 6, seed, 1.0);
        let two_steps = lambda_s(&lambda_s(&f, a).unwrap(), b).unwrap();
        let one_step = lambda_s(&f, a + b).unwrap();
        prop_assert!(rel_gap(&two_steps, &one_step) <= 1e-13);
    }

    #[test]
    fn besov_norm_is_absolutely_homogeneous(seed in any::<u64>(), c in -50.0f64..50.0) {
        let f = field(1, 7, seed, 1.0);
        let lp = DyadicDecomposition::new(&grid());
        let base = lp.besov_b0_inf_inf(&f);
        let scaled = lp.besov_b0_inf_inf(&f.scaled(c));
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-14 * c.abs() * base + 1e-300);
    }

    #[test]
    fn besov_norms_are_ordered(seed in any::<u64>(), kmax in 1u32..=7, components in prop::sample::select(vec![1usize, 3])) {
        let f = field(components, kmax, seed, 1.0);
        let lp = DyadicDecomposition::new(&grid());
        prop_assert!(lp.besov_b0_inf_inf(&f) <= lp.bmo_proxy(&f));
    }

    #[test]
    fn blocks_reconstruct_the_field(seed in any::<u64>(), kmax in 1u32..=7, mean in -3.0f64..3.0) {
        let f = with_mean(field(1, kmax, seed, 1.0), mean);
        let lp = DyadicDecomposition::new(&grid());
        let mut sum = SpectralField::zeros(&grid(), 1);
        sum.component_mut(0)[0] = f.component(0)[0];
        for j in lp.j_min()..=lp.j_max() {
            sum.axpy(1.0, &lp.dyadic_block(&f, j).field).unwrap();
        }
        let err = sup(f.difference(&sum).unwrap().to_physical().iter().copied());
        prop_assert!(err <= 1e-12, "reconstruction error {err}");
    }

    #[test]
    fn sobolev_norm_grows_with_order(seed in any::<u64>(), mean in -1.0f64..1.0, s1 in 0.0f64..3.0, ds in 0.0f64..1.0) {
        // zero-mean fields from s = 0; with a mean mode from any s > 0
        let f = field(3, 5, seed, 1.0);
        prop_assert!(sobolev_norm(&f, s1, false).unwrap() <= sobolev_norm(&f, s1 + ds, false).unwrap());
        let g = with_mean(f, mean);
        let lo = s1.max(1e-3);
        prop_assert!(sobolev_norm(&g, lo, false).unwrap() <= sobolev_norm(&g, lo + ds, false).unwrap());
    }

    #[test]
    fn criterion_integral_is_additive(values in prop::collection::vec((0.0f64..0.1, 0.0f64..100.0), 2..40), cut in any::<prop::sample::Index>()) {
        let mut t = 0.0;
        let records: Vec<Sample> = values
            .iter()
            .map(|&(dt, f)| {
                t += dt;
                Sample { t, f }
            })
            .collect();
        let m = cut.index(records.len());
        let whole = accumulate(&records).unwrap().integral;
        let parts = accumulate(&records[..=m]).unwrap().integral + accumulate(&records[m..]).unwrap().integral;
        prop_assert!((whole - parts).abs() <= 1e-14 * whole.max(1.0));
        let mut running = 0.0;
        for i in 1..=records.len() {
            let next = accumulate(&records[..i]).unwrap().integral;
            prop_assert!(next >= running);
            running = next;
        }
    }

    #[test]
    fn exponent_decreases_and_stays_above_two(a in 1.6667f64..50.0, h in 1e-3f64..5.0) {
        let (d1, d2) = (exponent(a).unwrap(), exponent(a + h).unwrap());
        prop_assert!(d1 > d2);
        prop_assert!(d1 > 2.0);
    }

    #[test]
    fn config_round_trip(
        nu in 1e-3f64..10.0, eta in 1e-3f64..10.0, mu in 1e-3f64..10.0,
        sigma1 in 1e-3f64..10.0, sigma2 in 1e-3f64..10.0,
        alpha in 3.0f64..4.0, beta in 3.0f64..4.0,
        transport in any::<bool>(), coupling in any::<bool>(), damp in any::<bool>(),
        n in prop::sample::select(vec![8usize, 16, 32, 64]),
        dt in 1e-5f64..1e-2, t_end in 0.0f64..10.0, cfl in 0.05f64..1.0,
        heun in any::<bool>(), seed in 0..=i64::MAX as u64, amplitude in -5.0f64..5.0,
        generator in prop::sample::select(vec![Generator::TaylorGreen, Generator::SingleMode, Generator::RandomBand]),
        stride in 1usize..100, with_dir in any::<bool>(),
    ) {
        let cfg = RunConfig {
            params: ModelParams {
                nu, eta, mu, sigma1, sigma2, alpha, beta,
                terms: Terms { transport, coupling, damping: damp },
            },
            n,
            dt,
            t_end,
            cfl_limit: cfl,
            scheme: if heun { Scheme::IfHeun } else { Scheme::IfEuler },
            initial: InitialCondition {
                generator,
                amplitude,
                seed,
                kmin: 1,
                kmax: 2,
                mode: 3,
            },
            stride,
            out_dir: with_dir.then(|| "runs/a \"quoted\" dir".into()),
            ..Default::default()
        };
        let text = to_canonical_toml(&cfg);
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }

    #[test]
    fn checkpoint_round_trip(seed in any::<u64>(), kmax in 1u32..=3, time in 0.0f64..1e3) {
        let g = Grid::new(8).unwrap();
        let spec = |c, s| FieldSpec::random_band(c, 1, kmax, s);
        let state = State::new(
            sample_field(&spec(3, seed).solenoidal(), &g).unwrap(),
            sample_field(&spec(3, seed ^ 5), &g).unwrap(),
            sample_field(&spec(1, seed ^ 6), &g).unwrap(),
            time,
        ).unwrap();
        let bytes = encode_checkpoint(&state);
        let back = decode_checkpoint(&bytes, None).unwrap();
        prop_assert_eq!(encode_checkpoint(&back), bytes);
        prop_assert_eq!(back, state);
    }
}

#[test]
fn exponent_exceeds_two_past_seven() {
    // δ − 2 = 4/(3α − 5) > 0 for every α > 5/3, so δ > 2 does not single out α < 7
    for a in [7.0, 10.0, 100.0, 1e6] {
        let d = exponent(a).unwrap();
        assert!(d > 2.0);
        assert!((d - 2.0 - 4.0 / (3.0 * a - 5.0)).abs() <= 1e-12);
    }
}
