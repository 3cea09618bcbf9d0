use proptest::prelude::*;

use robust_horseshoe::distributions::{
    sample_exponential, sample_gamma, sample_inverse_gamma, sample_inverse_gaussian, ErrorKind, ErrorLaw, RngStream,
};
use robust_horseshoe::inference::{coverage, credible_interval, psrf, select_by_interval, Confusion};
use robust_horseshoe::model::init_state;
use robust_horseshoe::shrinkage::{kappa, kappa_density_hs};
use robust_horseshoe::simulate::{gen_dataset, CoeffScheme, Placement, SimDesign};
use robust_horseshoe::{ChainState, Method, Sampler, SamplerSpec};

proptest! {
    #[test]
    fn scores_stay_in_range(tp in 0usize..40, fp in 0usize..40, fn_ in 0usize..40, tn in 0usize..600) {
        let c = Confusion::from_counts(tp, fp, fn_, tn);
        prop_assert!((0.0..=1.0).contains(&c.f1));
        prop_assert!((-1.0..=1.0 + 1e-12).contains(&c.mcc));
        let perfect = fp == 0 && fn_ == 0 && tp > 0;
        prop_assert_eq!(c.f1 == 1.0, perfect);
        if perfect && tn > 0 {
            prop_assert!((c.mcc - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psrf_is_affine_invariant(
        seed in any::<u64>(),
        shift in -50.0f64..50.0,
        scale in prop_oneof![-20.0f64..-0.05, 0.05f64..20.0],
    ) {
        let mut rng = RngStream::new(seed, 0);
        let chains: Vec<Vec<f64>> = (0..3)
            .map(|c| (0..60).map(|_| c as f64 * 0.3 + sample_gamma(2.0, 1.0, &mut rng).unwrap()).collect())
            .collect();
        let mapped: Vec<Vec<f64>> = chains.iter().map(|c| c.iter().map(|x| shift + scale * x).collect()).collect();
        let (a, b) = (psrf(&chains).unwrap(), psrf(&mapped).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a, "{} vs {}", a, b);
    }

    #[test]
    fn wider_level_nests_narrower(seed in any::<u64>(), m in 5usize..300) {
        let mut rng = RngStream::new(seed, 0);
        let draws: Vec<f64> = (0..m).map(|_| sample_exponential(1.0, &mut rng).unwrap() - 1.0).collect();
        let narrow = credible_interval(&draws, 0.95).unwrap();
        let wide = credible_interval(&draws, 0.99).unwrap();
        prop_assert!(wide.lo <= narrow.lo && narrow.hi <= wide.hi);
    }

    #[test]
    fn covered_zero_is_never_selected(bounds in prop::collection::vec((-3.0f64..3.0, 0.0f64..3.0), 1..30)) {
        let intervals: Vec<_> = bounds
            .iter()
            .map(|&(lo, w)| robust_horseshoe::inference::CredibleInterval { lo, hi: lo + w, level: 0.95 })
            .collect();
        let selected = select_by_interval(&intervals);
        let covered = coverage(&intervals, &vec![0.0; intervals.len()]).unwrap();
        for (s, c) in selected.iter().zip(&covered) {
            prop_assert_ne!(s, c);
        }
    }

    #[test]
    fn kappa_decreases_in_each_argument(
        l in 1e-3f64..1e3, s in 1e-3f64..1e3, a in 1e-3f64..1e3, factor in 1.01f64..10.0,
    ) {
        let k = kappa(l, s, a);
        prop_assert!(k > 0.0 && k < 1.0);
        prop_assert!(kappa(l * factor, s, a) < k);
        prop_assert!(kappa(l, s * factor, a) < k);
        prop_assert!(kappa(l, s, a * factor) < k);
    }

    #[test]
    fn hs_density_at_unit_k_is_arcsine(x in 1e-6f64..(1.0 - 1e-6)) {
        let arcsine = 1.0 / (std::f64::consts::PI * (x * (1.0 - x)).sqrt());
        let d = kappa_density_hs(x, 1.0).unwrap();
        prop_assert!((d - arcsine).abs() <= 1e-12 * arcsine);
    }

    #[test]
    fn positive_samplers_return_positive_finite(
        seed in any::<u64>(), a in 1e-3f64..1e3, b in 1e-3f64..1e3,
    ) {
        let mut rng = RngStream::new(seed, 0);
        for x in [
            sample_gamma(a, b, &mut rng).unwrap(),
            sample_inverse_gamma(a, b, &mut rng).unwrap(),
            sample_exponential(a, &mut rng).unwrap(),
            sample_inverse_gaussian(a, b, &mut rng).unwrap(),
        ] {
            prop_assert!(x > 0.0 && x.is_finite(), "{}", x);
        }
    }
}

fn positive_components(s: &ChainState) -> Vec<f64> {
    let mut out = vec![s.lambda2, s.xi1];
    out.extend(&s.s2);
    out.extend(&s.nu);
    for v in [&s.v_tilde, &s.phi2, &s.zeta].into_iter().flatten() {
        out.extend(v);
    }
    out.extend([s.tau, s.sigma2, s.b2].into_iter().flatten());
    out
}

#[test]
fn long_chains_stay_positive_under_every_error_law() {
    let kinds =
        [ErrorKind::Normal, ErrorKind::StudentT2, ErrorKind::Laplace, ErrorKind::Contaminated, ErrorKind::LogNormal];
    for (k, kind) in kinds.into_iter().enumerate() {
        let scheme = CoeffScheme::Selection { count: 3, placement: Placement::Even };
        let (data, _) = gen_dataset(&SimDesign::new(30, 12, ErrorLaw::new(kind), scheme), 40 + k as u64, 0).unwrap();
        for m in Method::ALL {
            let spec = SamplerSpec::new(m).with_iterations(10_000, 0).with_seed(k as u64);
            let mut sampler = Sampler::new(&spec, &data).unwrap();
            let mut state = init_state(&spec, &data).unwrap();
            let mut rng = RngStream::new(k as u64, 1);
            for t in 0..10_000 {
                sampler.sweep(&mut state, &mut rng, t).unwrap();
                for x in positive_components(&state) {
                    assert!(x > 0.0 && x.is_finite(), "{m} under {kind:?}, sweep {t}: {x}");
                }
            }
        }
    }
}
