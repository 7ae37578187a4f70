//! Property-based checks: the separation lemma against its brute-force
//! verifier, planner monotonicity, and serialization round trips.

use proptest::prelude::*;

use gef_core::separation::{select_separated, verify_selection, SeparationInstance};
use gef_core::series::{truncation_order, SeriesSample};
use gef_core::VarianceProfile;
use num_complex::Complex64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn separation_certificate_always_verifies(
        masses in prop::collection::vec(0u64..=32, 1..=64),
        q_step in 0u8..3,
    ) {
        let q = 1.0 + q_step as f64;
        let instance = SeparationInstance::new(masses, q).unwrap();
        let result = select_separated(&instance);
        prop_assert!(verify_selection(&instance, &result.j_prime));
        prop_assert!(result.certificate.separation_ok);
        prop_assert!(result.certificate.mass_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn planner_is_monotone_in_radius(r1 in 1.0f64..10.0, dr in 0.0f64..6.0) {
        let k1 = truncation_order(r1, 1e-9, 1e-12).unwrap();
        let k2 = truncation_order(r1 + dr, 1e-9, 1e-12).unwrap();
        prop_assert!(k2 >= k1);
        prop_assert!(k1 >= (r1 * r1).ceil() as usize);
    }

    #[test]
    fn profile_serde_round_trip(kind in 0u8..3, r in 2.0f64..16.0, alpha in 0.55f64..0.95,
                                table in prop::collection::vec(0.0f64..4.0, 1..20)) {
        let profile = match kind {
            0 => VarianceProfile::constant_one(),
            1 => VarianceProfile::jlm_banded(r, alpha).unwrap(),
            _ => VarianceProfile::explicit_table(table).unwrap(),
        };
        let text = serde_json::to_string(&profile).unwrap();
        let back: VarianceProfile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(profile, back);
    }

    #[test]
    fn series_sample_serde_round_trip(
        coeffs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..24),
        r in 0.5f64..4.0,
    ) {
        let sample = SeriesSample::from_coefficients(
            coeffs.iter().map(|(a, b)| Complex64::new(*a, *b)).collect(),
            r,
        ).unwrap();
        let text = serde_json::to_string(&sample).unwrap();
        let mut back: SeriesSample = serde_json::from_str(&text).unwrap();
        back.rehydrate();
        let z = Complex64::new(0.3 * r, -0.2 * r);
        let a = sample.evaluate(z).unwrap();
        let b = back.evaluate(z).unwrap();
        prop_assert!((a - b).norm() <= 1e-14 * (1.0 + a.norm()));
    }
}
