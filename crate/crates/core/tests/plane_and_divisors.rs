use equilift::divisors::{detect_stabilizer, generate, split_signed, transport_distance, DivPoint, Divisor, GenKind};
use equilift::plane::{count_zeros, sup_seminorm, ComplexPoly, CompactRegion, Contour, Disk, SampledFunction, Window};
use equilift::{c64, C64};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| c64(a, b))
}

#[test]
fn flood_fill_fixtures() {
    let one = CompactRegion::disk(c64(0.0, 0.0), 1.0);
    assert!(one.complement_connected(0.125));
    let two = CompactRegion::new(vec![Disk::new(c64(-3.0, 0.0), 1.0), Disk::new(c64(3.0, 0.0), 1.0)]);
    if let Ok(two) = two {
        assert!(two.complement_connected(0.125));
    }
    let ring: Vec<Disk> = (0..12).map(|k| Disk::new(C64::from_polar(3.0, k as f64 * std::f64::consts::PI / 6.0), 1.0)).collect();
    let ring = CompactRegion::unchecked(ring).unwrap();
    assert!(!ring.complement_connected(0.125));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, rng_seed: RngSeed::Fixed(20261017), failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn zero_counts_add_under_products(
        a in prop::collection::vec(complex(0.9), 0..4),
        b in prop::collection::vec(complex(0.9), 0..4),
    ) {
        let c = Contour::Circle { center: c64(0.0, 0.0), radius: 1.5 };
        let pa = ComplexPoly::from_roots(&a);
        let pb = ComplexPoly::from_roots(&b);
        let n = |p: ComplexPoly| count_zeros(&SampledFunction::polynomial(p), &c, 256).unwrap().count;
        prop_assert_eq!(n(pa.mul(&pb)), n(pa.clone()) + n(pb.clone()));
        prop_assert_eq!(n(pa.mul(&pb)), (a.len() + b.len()) as i64);
    }

    #[test]
    fn sup_seminorm_monotone_in_k(
        coeffs in prop::collection::vec(complex(2.0), 1..6),
        c in complex(1.0),
        r in 0.2..1.0f64,
        grow in 0.0..1.0f64,
    ) {
        let f = SampledFunction::polynomial(ComplexPoly::new(coeffs));
        let small = CompactRegion::disk(c, r);
        let large = CompactRegion::disk(c, r + grow);
        let vs = sup_seminorm(&f, &small, 16.0).unwrap();
        let vl = sup_seminorm(&f, &large, 16.0).unwrap();
        prop_assert!(vs.value <= vl.value + vl.slack + 1e-9, "{} > {}", vs.value, vl.value);
    }

    #[test]
    fn sup_seminorm_shift_covariant(
        coeffs in prop::collection::vec(complex(2.0), 1..6),
        w in complex(5.0),
    ) {
        let f = SampledFunction::polynomial(ComplexPoly::new(coeffs));
        let k = CompactRegion::disk(c64(0.3, -0.2), 0.8);
        let a = sup_seminorm(&f.shifted(w), &k, 16.0).unwrap();
        let b = sup_seminorm(&f, &k.translate(w), 16.0).unwrap();
        prop_assert_eq!(a.samples, b.samples);
        prop_assert!((a.value - b.value).abs() <= 1e-9 * (1.0 + a.value));
    }

    #[test]
    fn transport_is_a_pseudometric(seed in 0u64..1000, j1 in 0.05..0.3f64, j2 in 0.05..0.3f64) {
        let w = Window::square(4.0);
        let base = generate(GenKind::JitteredLattice { spacing: 1.0, jitter: 0.0 }, w, 0).unwrap();
        let a = generate(GenKind::JitteredLattice { spacing: 1.0, jitter: j1 }, w, seed).unwrap();
        let b = generate(GenKind::JitteredLattice { spacing: 1.0, jitter: j2 }, w, seed + 1).unwrap();
        let inner = w.inner(0.15);
        let d = |x: &Divisor, y: &Divisor| transport_distance(x, y, &inner);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &a), 0.0);
        let (ab, bc, ac) = (d(&a, &b), d(&b, &base), d(&a, &base));
        if ab.is_finite() && bc.is_finite() && ac.is_finite() {
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn stabilizer_is_shift_invariant(spacing in 0.8..2.0f64, w in complex(3.0)) {
        let d = generate(GenKind::PeriodicLattice { spacing }, Window::square(8.0), 0).unwrap();
        let a = detect_stabilizer(&d, 1e-6).unwrap();
        let b = detect_stabilizer(&d.translate(w), 1e-6).unwrap();
        prop_assert_eq!(a.kind, b.kind);
        prop_assert_eq!(a.generators.len(), b.generators.len());
        for (x, y) in a.generators.iter().zip(&b.generators) {
            prop_assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn signed_split_recomposes(pts in prop::collection::vec((complex(5.0), -3i32..=3), 0..20)) {
        let mut seen: Vec<C64> = Vec::new();
        let mut points = Vec::new();
        for (z, m) in pts {
            if m != 0 && seen.iter().all(|s| (s - z).norm() > 1e-6) {
                seen.push(z);
                points.push(DivPoint::new(z, m));
            }
        }
        let d = Divisor::new(Window::square(6.0), points).unwrap();
        let (pos, neg) = split_signed(&d);
        prop_assert!(pos.is_nonnegative() && neg.is_nonnegative());
        prop_assert_eq!(pos.degree() - neg.degree(), d.degree());
        let mut back: Vec<(u64, u64, i32)> = pos
            .points()
            .iter()
            .map(|p| (p.z().re.to_bits(), p.z().im.to_bits(), p.mult))
            .chain(neg.points().iter().map(|p| (p.z().re.to_bits(), p.z().im.to_bits(), -p.mult)))
            .collect();
        let mut orig: Vec<(u64, u64, i32)> = d.points().iter().map(|p| (p.z().re.to_bits(), p.z().im.to_bits(), p.mult)).collect();
        back.sort();
        orig.sort();
        prop_assert_eq!(back, orig);
    }
}
