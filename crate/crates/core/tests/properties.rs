use popsize::counts::emit_counts;
use popsize::posterior::{hpd_interval, rmae, ur_rate};
use popsize::rng::stream;
use popsize::thbm::{cell_probabilities, sample_latent, sample_multinomial, AlphaVector, RandomEffects};
use popsize::{parse_counts, TrsCounts};
use proptest::prelude::*;

fn alpha_strategy() -> impl Strategy<Value = AlphaVector> {
    prop::array::uniform5(0.001f64..1.0).prop_map(|w| {
        let t: f64 = w.iter().sum();
        AlphaVector([w[1] / t, w[2] / t, w[3] / t, w[4] / t])
    })
}

fn counts_strategy() -> impl Strategy<Value = TrsCounts> {
    prop::array::uniform7(0u64..400).prop_filter_map("nobody observed", |c| TrsCounts::new(c).ok())
}

proptest! {
    #[test]
    fn cells_form_a_simplex(alpha in alpha_strategy(), p in prop::array::uniform3(1e-6f64..1.0 - 1e-6)) {
        let cp = cell_probabilities(&alpha, &p).unwrap();
        prop_assert!((cp.sum() - 1.0).abs() < 1e-12);
        prop_assert!(cp.0.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn hpd_is_inside_the_range_and_grows_with_level(mut draws in prop::collection::vec(-1e3f64..1e3, 100..600)) {
        let (lo, hi) = hpd_interval(&draws, 0.95).unwrap();
        let (lo99, hi99) = hpd_interval(&draws, 0.99).unwrap();
        draws.sort_by(f64::total_cmp);
        prop_assert!(draws[0] <= lo && lo <= hi && hi <= draws[draws.len() - 1]);
        prop_assert!(hi99 - lo99 >= hi - lo);
    }

    #[test]
    fn rmae_is_scale_free(est in prop::collection::vec(1.0f64..5e3, 1..50), n in 10.0f64..5e3, c in 0.1f64..100.0) {
        let scaled: Vec<f64> = est.iter().map(|e| e * c).collect();
        let a = rmae(&est, n).unwrap();
        let b = rmae(&scaled, n * c).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn margins_add_up(c in counts_strategy()) {
        let m = c.margins();
        prop_assert_eq!(m.n1, c.dot("1..").unwrap());
        prop_assert_eq!(m.n1 + c.dot("0..").unwrap(), c.x0());
        prop_assert_eq!(m.x11_, c.x111() + c.x110());
        prop_assert_eq!(c.dot("...").unwrap(), c.x0());
    }

    #[test]
    fn under_reporting_is_a_percentage(c in counts_strategy(), extra in 0.0f64..1e4) {
        let ur = ur_rate(c.x0() as f64 + extra, c.x0()).unwrap();
        prop_assert!((0.0..100.0).contains(&ur));
        prop_assert!(ur_rate(c.x0() as f64 - 1.0, c.x0()).is_err());
    }

    #[test]
    fn counts_roundtrip_through_text(c in counts_strategy()) {
        prop_assert_eq!(parse_counts(&emit_counts(&c)).unwrap(), c);
    }

    #[test]
    fn multinomial_conserves_total(n in 0u64..10_000, w in prop::array::uniform4(0.0f64..1.0), seed in 0u64..1000) {
        let t: f64 = w.iter().sum::<f64>().max(1e-9);
        let probs: Vec<f64> = w.iter().map(|v| v / t).collect();
        let draw = sample_multinomial(&mut stream(seed, 0), n, &probs).unwrap();
        prop_assert_eq!(draw.iter().sum::<u64>(), n);
        for (d, p) in draw.iter().zip(&probs) {
            if *p == 0.0 {
                prop_assert_eq!(*d, 0);
            }
        }
    }

    #[test]
    fn latent_splits_respect_the_data(
        c in counts_strategy(),
        alpha in alpha_strategy(),
        p in prop::array::uniform3(0.01f64..0.99),
        missed in 0u64..500,
        seed in 0u64..1000,
    ) {
        let effects = RandomEffects::from_probabilities(p).unwrap();
        let t = sample_latent(&mut stream(seed, 1), &c, missed, &alpha, &effects).unwrap();
        prop_assert!(t.matches(&c));
        prop_assert_eq!(t.population_size(), c.x0() + missed);
    }
}
