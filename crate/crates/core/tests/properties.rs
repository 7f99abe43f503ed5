use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spapt::channels;
use spapt::detection::{self, Method};
use spapt::harness;
use spapt::qmath::{self, ComplexMatrix};
use spapt::states::{self, BellKind, DensityMatrix, PureState};
use spapt::tomography::{self, ShotConfig};

fn state(seed: u64) -> DensityMatrix {
    DensityMatrix::random(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn pure(seed: u64) -> PureState {
    PureState::random(4, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn angle() -> impl Strategy<Value = f64> {
    -std::f64::consts::PI..std::f64::consts::PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tangle_is_local_unitary_invariant(
        seed in any::<u64>(),
        a in (angle(), angle(), angle()),
        b in (angle(), angle(), angle()),
    ) {
        let rho = state(seed);
        let u = qmath::euler_unitary(a.0, a.1, a.2).kron(&qmath::euler_unitary(b.0, b.1, b.2));
        let t0 = states::tangle(&rho).unwrap();
        let t1 = states::tangle(&rho.conjugate_by(&u).unwrap()).unwrap();
        prop_assert!((t0 - t1).abs() < 1e-9, "{t0} vs {t1}");
    }

    #[test]
    fn pure_state_tangle_matches_determinant(seed in any::<u64>()) {
        let psi = pure(seed);
        let v = psi.amplitudes();
        let oracle = 4.0 * (v[0] * v[3] - v[1] * v[2]).norm_sqr();
        let t = states::tangle(&DensityMatrix::from_pure(&psi)).unwrap();
        prop_assert!((t - oracle).abs() < 1e-9, "{t} vs {oracle}");
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (state(s1), state(s2));
        let f = states::fidelity(&a, &b).unwrap();
        let g = states::fidelity(&b, &a).unwrap();
        prop_assert!((f - g).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((states::fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partial_transpose_keeps_trace_and_hermiticity(seed in any::<u64>()) {
        let rho = state(seed);
        let pt = qmath::partial_transpose(rho.matrix()).unwrap();
        prop_assert!((pt.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(pt.hermiticity_error() < 1e-12);
        let back = qmath::partial_transpose(&pt).unwrap();
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn psd_sqrt_squares_back(seed in any::<u64>()) {
        let rho = state(seed);
        let r = qmath::psd_sqrt(rho.matrix()).unwrap();
        prop_assert!((&r * &r).max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn eigendecomposition_recomposes(seed in any::<u64>()) {
        let rho = state(seed);
        let spec = qmath::herm_eig(rho.matrix()).unwrap();
        prop_assert!(spec.recompose(|x| x).max_abs_diff(rho.matrix()) < 1e-12);
        let sorted = spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]);
        prop_assert!(sorted);
    }

    #[test]
    fn spa_spectrum_is_affine_in_pt_spectrum(seed in any::<u64>()) {
        let rho = state(seed);
        let pt = qmath::eigvalsh(&channels::ideal_pt(&rho).unwrap()).unwrap();
        let out = channels::spa_pt().apply(&rho).unwrap().spectrum();
        for (x, y) in pt.iter().zip(&out) {
            prop_assert!((x / 9.0 + 2.0 / 9.0 - y).abs() < 1e-10);
        }
        prop_assert!(out[0] >= 1.0 / 6.0 - 1e-10);
    }

    #[test]
    fn ppt_and_spa_verdicts_agree(seed in any::<u64>()) {
        let rho = state(seed);
        let a = detection::detect_state(&rho, Method::Ppt).unwrap();
        let b = detection::detect_state(&rho, Method::SpaSpectrum).unwrap();
        let c = detection::detect_state(&rho, Method::FHat).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(b.verdict, c.verdict);
    }

    #[test]
    fn multinomial_counts_sum_to_n(seed in any::<u64>(), n in 0u64..100_000, w in prop::collection::vec(0.0f64..1.0, 1..8)) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 0.0);
        let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
        let counts = tomography::multinomial(&mut ChaCha8Rng::seed_from_u64(seed), n, &probs);
        prop_assert_eq!(counts.iter().sum::<u64>(), n);
        for (c, p) in counts.iter().zip(&probs) {
            if *p == 0.0 {
                prop_assert_eq!(*c, 0);
            }
        }
    }

    #[test]
    fn projection_returns_valid_state(seed in any::<u64>(), noise in 0.0f64..0.3) {
        let rho = state(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let h = DensityMatrix::random(&mut rng);
        let raw = &rho.matrix().scale_real(1.0 + noise) - &h.matrix().scale_real(noise);
        let out = tomography::project_to_physical(&raw).unwrap();
        prop_assert!(out.min_eigenvalue() >= -1e-12);
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sampled_f_hat_is_unbiased_over_seeds() {
    let rho = states::bell(BellKind::PsiMinus);
    let xs: Vec<f64> = (0..50)
        .map(|s| harness::lambda_d_sampled(&rho, &ShotConfig::new(10_000, s).unwrap()).unwrap())
        .collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = sd / n.sqrt();
    assert!((mean - 1.0 / 6.0).abs() < 4.0 * se, "mean {mean}, se {se}");
    assert!(sd < 0.01, "sd {sd}");
}

#[test]
fn product_states_sit_on_threshold() {
    let zero = PureState::basis(2, 0).unwrap();
    let plus = PureState::normalized(vec![qmath::re(1.0), qmath::re(1.0)]).unwrap();
    let rho = DensityMatrix::from_pure(&zero.tensor(&plus).unwrap());
    let out = channels::spa_pt().apply(&rho).unwrap();
    assert!((out.min_eigenvalue() - 2.0 / 9.0).abs() < 1e-12);
    let v = detection::detect_state(&rho, Method::SpaSpectrum).unwrap();
    assert!(!v.is_entangled());
    let m = ComplexMatrix::identity(4).scale_real(0.25);
    assert!(channels::spa_pt().apply_raw(&m).unwrap().max_abs_diff(&m) < 1e-15);
}
