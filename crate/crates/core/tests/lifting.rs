use equilift::divisors::{generate, GenKind};
use equilift::lifting::{verify_divisor_recovery, verify_equivariance, weierstrass_pipeline, PipelineConfig};
use equilift::plane::Window;
use equilift::c64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, rng_seed: RngSeed::Fixed(20261017), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lifted_divisor_and_equivariance(seed in 0u64..1000, wr in -2.0..2.0f64, wi in -2.0..2.0f64) {
        let d = generate(GenKind::JitteredLattice { spacing: 1.5, jitter: 0.3 }, Window::square(14.0), seed).unwrap();
        let cfg = PipelineConfig::lacunary(3);
        let trace = weierstrass_pipeline(&d, &cfg).unwrap();
        prop_assert!(trace.rates_hold());
        let rec = verify_divisor_recovery(&trace);
        prop_assert!(rec.passed, "{rec:?}");
        let eq = verify_equivariance(&d, c64(wr, wi), &cfg);
        prop_assert!(eq.passed, "{eq:?}");
    }
}
