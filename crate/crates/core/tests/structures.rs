use equilift::divisors::{generate, GenKind};
use equilift::periodic::{green_periodicity_check, LatticeGreen, PeriodicEntire, YosidaProduct, yosida_cauchy_defect};
use equilift::plane::Window;
use equilift::toast::{build_covariant_toast, region_contains};
use equilift::{c64, C64};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, rng_seed: RngSeed::Fixed(20261017), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn toast_shift_covariance(seed in 0u64..200, wr in -5.0..5.0f64, wi in -5.0..5.0f64) {
        let d = generate(GenKind::Poisson { intensity: 0.5 }, Window::square(12.0), seed).unwrap();
        let w = c64(wr, wi);
        let a = build_covariant_toast(&d, 3, 1.0, 4.0).unwrap();
        let b = build_covariant_toast(&d.translate(-w), 3, 1.0, 4.0).unwrap();
        let dev = b.structural_distance(&a.translate(-w)).expect("same structure");
        prop_assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn toast_regions_nest_and_cover(seed in 0u64..200) {
        let d = generate(GenKind::Poisson { intensity: 0.5 }, Window::square(12.0), seed).unwrap();
        let t = build_covariant_toast(&d, 3, 1.0, 4.0).unwrap();
        let inner = t.inner_window();
        let top = t.levels.len() - 1;
        for z in inner.grid(15, 15) {
            prop_assert!(t.locate_index(z, top).is_some(), "{z} uncovered");
            for n in 0..top {
                if let (Some(i), Some(j)) = (t.locate_index(z, n), t.locate_index(z, n + 1)) {
                    let (ri, rj) = (&t.levels[n].regions[i].region, &t.levels[n + 1].regions[j].region);
                    prop_assert!(region_contains(rj, ri), "level {n} region {i} escapes");
                }
            }
        }
        for n in 1..t.levels.len() {
            for r in &t.levels[n].regions {
                let ratio = r.region.area_estimate() / (std::f64::consts::PI * 0.25);
                prop_assert!(r.children.len() as f64 <= ratio.ceil());
            }
        }
    }

    #[test]
    fn green_defect_decreases_in_radius(x in 0.1..0.45f64, y in 0.1..0.45f64) {
        let mut prev = f64::INFINITY;
        for r in [20.0, 40.0, 80.0] {
            let g = LatticeGreen::z_e1(r).unwrap();
            let dev = green_periodicity_check(&g, &[x, y, 0.2], &[1.0, 0.0, 0.0]).unwrap().deviation;
            prop_assert!(dev < prev, "{dev} >= {prev}");
            prev = dev;
        }
        let g = LatticeGreen::z_e1(80.0).unwrap();
        let off = green_periodicity_check(&g, &[x, y, 0.2], &[0.0, 1.0, 0.0]).unwrap().deviation;
        prop_assert!(off > 1e-2);
    }

    #[test]
    fn nonconstant_periodic_functions_grow(
        terms in prop::collection::vec((-2i32..=2, -2.0..2.0f64, -2.0..2.0f64), 1..4),
    ) {
        let f = PeriodicEntire::new(terms.iter().map(|(k, a, b)| (*k, c64(*a, *b))).collect());
        prop_assume!(!f.is_constant());
        let at = |s: f64| f.max_modulus(s);
        let lo = at(-4.0).max(at(4.0));
        let anchor = equilift::periodic::canonical_anchor(&f, Default::default()).unwrap();
        prop_assert!(lo > 10.0 * at(anchor.s0), "{lo} vs {}", at(anchor.s0));
    }

    #[test]
    fn yosida_partial_products_are_cauchy(seed in 0u64..100) {
        let f = YosidaProduct::seeded(6, 0.2, seed).unwrap();
        for n in 2..6 {
            let v = yosida_cauchy_defect(&f, n);
            prop_assert!(v < 10.0 * (-2.0 * std::f64::consts::PI * n as f64).exp(), "n={n}: {v}");
        }
        let z = c64(0.21, 0.37);
        let per: C64 = f.eval(z + 1.0) - f.eval(z);
        prop_assert!(per.norm() <= 1e-10 * f.eval(z).norm());
    }
}
