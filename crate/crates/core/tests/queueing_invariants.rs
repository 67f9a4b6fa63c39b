use boundcop::{min_law, pk_waiting, DependenceParam, MinServiceSampler, ServiceModel, Variant};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn theta(t: f64) -> DependenceParam {
    DependenceParam::new(t).unwrap()
}

#[test]
fn exact_moments_agree_with_monte_carlo() {
    let models = [
        ServiceModel::shifted_exponential(0.5, 1.0).unwrap(),
        ServiceModel::hypo_exponential(0.5).unwrap(),
    ];
    for model in models {
        for t in [0.0, 0.3, 0.7, 1.0, -1.0] {
            let law = min_law(model, theta(t), Variant::ExactPiecewise);
            let sampler = MinServiceSampler::new(law).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let n = 20_000;
            let xs: Vec<f64> = (0..n).map(|_| sampler.sample(rng.random_range(1e-12..1.0))).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!(
                (mean - law.m1).abs() < 3.0 * se,
                "{model:?} theta {t}: {mean} vs {}",
                law.m1
            );
        }
    }
}

#[test]
fn exact_law_is_a_distribution_function_for_nonnegative_theta() {
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let law = min_law(
            ServiceModel::hypo_exponential(0.5).unwrap(),
            theta(t),
            Variant::ExactPiecewise,
        );
        assert_eq!(law.cdf(0.0), 0.0);
        assert!(law.m2 >= law.m1 * law.m1);
        assert!(MinServiceSampler::new(law).is_ok(), "theta {t}");
    }
}

proptest! {
    #[test]
    fn pk_waiting_grows_with_load_and_second_moment(
        lambda in 0.01..0.3f64, m1 in 0.1..3.0f64, extra in 0.0..5.0f64, bump in 0.0..0.5f64
    ) {
        let m2 = m1 * m1 + extra;
        prop_assume!(lambda * m1 < 0.95 && (lambda + bump) * m1 < 0.95);
        let w = pk_waiting(lambda, m1, m2).unwrap();
        prop_assert!(pk_waiting(lambda, m1, m2 + bump).unwrap() >= w);
        prop_assert!(pk_waiting(lambda + bump, m1, m2).unwrap() >= w);
    }

    #[test]
    fn independent_case_agrees_across_variants(mu in 0.2..3.0f64, delta in 0.0..2.0f64) {
        let model = ServiceModel::shifted_exponential(mu, delta).unwrap();
        let a = min_law(model, theta(0.0), Variant::PaperFormula);
        let b = min_law(model, theta(0.0), Variant::ExactPiecewise);
        prop_assert!((a.m1 - b.m1).abs() < 1e-8 * a.m1.max(1.0));
        prop_assert!((a.m2 - b.m2).abs() < 1e-8 * a.m2.max(1.0));
    }
}
