use equilift::builders::{cauchy_transform, weierstrass, Atom, GridFunction, Potential};
use equilift::divisors::{generate, DivPoint, Divisor, GenKind};
use equilift::plane::{count_zeros, CompactRegion, Contour, SampledFunction, Window};
use equilift::runge::{additive_error_profile, recheck, solve_additive, Mode, RungeConfig, RungeProblem, Target};
use equilift::{c64, C64};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn two_disk_problem(a: C64, sep: f64, k: f64, shift: C64) -> RungeProblem {
    let f = move |z: C64| (k * (z - shift)).exp();
    RungeProblem {
        targets: vec![
            Target { k: CompactRegion::disk(a + shift, 1.0), h: SampledFunction::new(f) },
            Target {
                k: CompactRegion::disk(a + c64(sep, 0.5) + shift, 0.7),
                h: SampledFunction::constant(c64(1.0, -0.5)),
            },
        ],
        eps: 1e-6,
        mode: Mode::Additive,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, rng_seed: RngSeed::Fixed(20261017), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn certificates_survive_denser_resampling(a in -2.0..2.0f64, sep in 5.0..7.0f64, k in 0.2..1.0f64) {
        let cfg = RungeConfig::default();
        let p = two_disk_problem(c64(a, 0.0), sep, k, c64(0.0, 0.0));
        let c = solve_additive(&p, &cfg).unwrap();
        prop_assert!(c.max_error() < p.eps);
        for e in recheck(&p, &c, &cfg, 4.0) {
            prop_assert!(e < 2.0 * p.eps, "{e}");
        }
    }

    #[test]
    fn solver_is_shift_equivariant(sep in 5.0..7.0f64, wr in -20.0..20.0f64, wi in -20.0..20.0f64) {
        let cfg = RungeConfig::default();
        let w = c64(wr, wi);
        let p = two_disk_problem(c64(0.0, 0.0), sep, 0.5, c64(0.0, 0.0));
        let q = two_disk_problem(c64(0.0, 0.0), sep, 0.5, w);
        let a = solve_additive(&p, &cfg).unwrap();
        let b = solve_additive(&q, &cfg).unwrap();
        prop_assert_eq!(a.degree, b.degree);
        for (x, y) in a.errors.iter().zip(&b.errors) {
            prop_assert!((x - y).abs() < 1e-9, "{x} {y}");
        }
        let z = c64(0.3, 0.2);
        prop_assert!((a.approximant.poly().eval(z) - b.approximant.poly().eval(z + w)).norm() < 1e-6);
    }

    #[test]
    fn error_profile_is_monotone(sep in 5.0..7.0f64, k in 0.2..1.5f64) {
        let p = two_disk_problem(c64(0.0, 0.0), sep, k, c64(0.0, 0.0));
        let prof = additive_error_profile(&p, &RungeConfig::default(), &[0, 4, 8, 16, 24, 32]).unwrap();
        prop_assert!(prof.windows(2).all(|w| w[1] <= w[0]), "{prof:?}");
    }

    #[test]
    fn weierstrass_zero_sets_follow_shifts(seed in 0u64..500, wr in -1.0..1.0f64, wi in -1.0..1.0f64) {
        let d = generate(GenKind::Poisson { intensity: 0.4 }, Window::square(3.0), seed).unwrap();
        let w = c64(wr, wi);
        let f = weierstrass(&d).unwrap().to_sampled();
        let g = weierstrass(&d.translate(-w)).unwrap().to_sampled();
        for p in d.points() {
            let c = Contour::Circle { center: p.z(), radius: 1e-3 };
            let cs = Contour::Circle { center: p.z() - w, radius: 1e-3 };
            prop_assert_eq!(count_zeros(&f, &c, 64).unwrap().count, p.mult as i64);
            prop_assert_eq!(count_zeros(&g, &cs, 64).unwrap().count, p.mult as i64);
        }
    }

    #[test]
    fn cauchy_transform_is_linear(al in -2.0..2.0f64, be in -2.0..2.0f64) {
        let w = Window::square(1.2);
        let h = 1.0 / 16.0;
        let f = |z: C64| if z.norm() < 1.0 { c64(1.0 - z.norm_sqr(), 0.0) } else { c64(0.0, 0.0) };
        let g = |z: C64| if z.norm() < 1.0 { z * (1.0 - z.norm_sqr()).powi(2) } else { c64(0.0, 0.0) };
        let zs = [c64(0.1, 0.2), c64(-0.5, 0.3), c64(2.0, -1.0)];
        let tf = cauchy_transform(&GridFunction::from_fn(w, h, f).unwrap(), &zs).unwrap();
        let tg = cauchy_transform(&GridFunction::from_fn(w, h, g).unwrap(), &zs).unwrap();
        let tfg = cauchy_transform(&GridFunction::from_fn(w, h, |z| al * f(z) + be * g(z)).unwrap(), &zs).unwrap();
        for i in 0..zs.len() {
            prop_assert!((tfg[i] - (al * tf[i] + be * tg[i])).norm() < 1e-10);
        }
    }

    #[test]
    fn potential_harmonic_away_from_atoms(x in 1.5..3.0f64, y in -3.0..-1.5f64, m in 0.5..3.0f64) {
        let mu = Potential::new(2, vec![Atom { pos: vec![0.0, 0.0], mass: 1.0 }, Atom { pos: vec![0.5, 0.5], mass: m }]).unwrap();
        let lap = |h: f64| {
            let v = equilift::builders::newtonian_potential(
                &mu,
                &[vec![x + h, y], vec![x - h, y], vec![x, y + h], vec![x, y - h], vec![x, y]],
            )
            .unwrap();
            ((v[0] + v[1] + v[2] + v[3] - 4.0 * v[4]) / (h * h)).abs()
        };
        let (a, b) = (lap(0.04), lap(0.02));
        prop_assert!(a / b > 3.0 || a < 1e-9, "{a} {b}");
    }
}

#[test]
fn divisor_membership_with_multiplicity() {
    let d = Divisor::new(
        Window::square(3.0),
        vec![DivPoint::new(c64(0.5, 0.5), 2), DivPoint::new(c64(-1.0, 0.2), 1), DivPoint::new(c64(1.0, -1.5), 3)],
    )
    .unwrap();
    let f = weierstrass(&d).unwrap().to_sampled();
    let total = count_zeros(&f, &Contour::Rectangle(Window::square(2.9)), 2048).unwrap().count;
    assert_eq!(total, 6);
}
