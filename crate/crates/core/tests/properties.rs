use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use polydisc::gram::{gram_matrix, h2_norm_closed_form, interpolation_constant_h2, KernelCombination};
use polydisc::hardy::{
    chi_weight, conjugate_exponent, convention_norm, eval_kernel, gleason_distance, KernelSpec, Point, PointSequence,
};
use polydisc::torus::{self, make_grid, Refinement};
use polydisc::Exponent;
use proptest::prelude::*;

fn coord(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn point(n: usize, max: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(coord(max), n).prop_map(|c| Point::new(c).unwrap())
}

fn any_point() -> impl Strategy<Value = Point> {
    (1usize..=3).prop_flat_map(|n| point(n, 0.99))
}

fn point_pair() -> impl Strategy<Value = (Point, Point)> {
    (1usize..=3).prop_flat_map(|n| (point(n, 0.99), point(n, 0.99)))
}

/// Sequences whose points are pairwise at Gleason distance at least 0.2.
fn sequence(max_len: usize) -> impl Strategy<Value = Arc<PointSequence>> {
    (1usize..=2, 1..=max_len)
        .prop_flat_map(|(n, len)| prop::collection::vec(point(n, 0.9), len))
        .prop_filter_map("points too close", |pts| {
            let seq = PointSequence::new(pts).ok()?;
            (seq.min_separation() >= 0.2).then(|| Arc::new(seq))
        })
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::ONE),
        Just(Exponent::INFINITY),
        (1.0f64..50.0).prop_map(|p| Exponent::new(p).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernel_reproduces_at_its_base(a in any_point()) {
        let v = eval_kernel(&KernelSpec::raw(a.clone()), a.coords()).unwrap();
        prop_assert!((v.re * chi_weight(&a) - 1.0).abs() < 1e-9);
        prop_assert!(v.im.abs() < 1e-9 * v.re);
        let k2 = eval_kernel(&KernelSpec::normalized(a.clone(), Exponent::TWO), a.coords()).unwrap();
        let norm = convention_norm(&a, Exponent::TWO);
        prop_assert!((k2.re / norm - 1.0).abs() < 1e-10);
        prop_assert!((norm * norm * chi_weight(&a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conjugation_is_an_involution(p in exponent()) {
        let back = conjugate_exponent(conjugate_exponent(p));
        if p.is_infinite() {
            prop_assert!(back.is_infinite());
        } else {
            prop_assert!((back.value() - p.value()).abs() < 1e-12 * p.value());
        }
    }

    #[test]
    fn gleason_distance_is_symmetric_and_bounded((a, b) in point_pair()) {
        let ab = gleason_distance(&a, &b).unwrap();
        let ba = gleason_distance(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-14);
        prop_assert!((0.0..1.0).contains(&ab));
        prop_assert_eq!(gleason_distance(&a, &a).unwrap(), 0.0);
        if a != b {
            prop_assert!(ab > 0.0);
        }
    }

    #[test]
    fn gleason_distance_is_rotation_invariant((a, b) in point_pair(), angle in 0.0..TAU) {
        let angles = vec![angle; a.dim()];
        let d = gleason_distance(&a, &b).unwrap();
        let dr = gleason_distance(&a.rotated(&angles).unwrap(), &b.rotated(&angles).unwrap()).unwrap();
        prop_assert!((d - dr).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_norms_increase_with_exponent(seq in sequence(5), coeffs in prop::collection::vec(coord(2.0), 5)) {
        let f = KernelCombination::new(seq.clone(), coeffs[..seq.len()].to_vec()).unwrap();
        let g = make_grid(seq.dim(), 64).unwrap();
        let samples = f.sample_on(&g).unwrap();
        let mut last = 0.0;
        for p in [1.0, 1.5, 2.0, 3.0, 8.0, f64::INFINITY] {
            let v = samples.lp_norm(Exponent::new(p).unwrap());
            prop_assert!(v >= last * (1.0 - 1e-12));
            last = v;
        }
    }

    #[test]
    fn quadrature_matches_gram_norm(seq in sequence(4), coeffs in prop::collection::vec(coord(2.0), 4)) {
        let f = KernelCombination::new(seq.clone(), coeffs[..seq.len()].to_vec()).unwrap();
        let closed = h2_norm_closed_form(&f);
        prop_assume!(closed > 1e-6);
        let plan = Refinement::new(seq.dim()).with_cap(1 << 20);
        let quad = torus::refine_with(1e-11, plan, |g| Ok(f.sample_on(g)?.lp_norm(Exponent::TWO)), |a, b| torus::relative_change(*a, *b)).unwrap();
        prop_assert!(torus::relative_change(quad.value, closed) < 1e-8);
    }

    #[test]
    fn duals_are_biorthogonal_and_long(seq in sequence(6)) {
        let factor = match gram_matrix(&seq).factor() {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        let duals = factor.dual_sequence();
        prop_assert!(duals.residual < 1e-8);
        for n in &duals.norms {
            prop_assert!(*n >= 1.0 - 1e-12);
        }
        // the same pairing by quadrature
        let g = make_grid(seq.dim(), 256).unwrap();
        let kernels: Vec<_> = seq
            .points()
            .iter()
            .map(|b| KernelCombination::unit(seq.clone(), seq.position(b).unwrap()).unwrap().sample_on(&g).unwrap())
            .collect();
        for (a, rho) in duals.elements.iter().enumerate() {
            let s = rho.sample_on(&g).unwrap();
            for (b, k) in kernels.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                prop_assert!((s.pairing(k).unwrap() - target).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn expansion_in_duals_reproduces_the_span(seq in sequence(6), coeffs in prop::collection::vec(coord(1.0), 6)) {
        let factor = match gram_matrix(&seq).factor() {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        let f = KernelCombination::new(seq.clone(), coeffs[..seq.len()].to_vec()).unwrap();
        let duals = factor.dual_sequence();
        let mut rebuilt = KernelCombination::zero(seq.clone());
        for (w, rho) in f.restriction().into_iter().zip(&duals.elements) {
            rebuilt = rebuilt.try_add(&rho.scaled(w)).unwrap();
        }
        let scale = coeffs.iter().map(|c| c.norm()).sum::<f64>().max(1.0) * factor.dual_bound().powi(2);
        for (x, y) in rebuilt.coefficients().iter().zip(f.coefficients()) {
            prop_assert!((x - y).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn interpolation_constant_is_rotation_invariant(seq in sequence(6), angles in prop::collection::vec(0.0..TAU, 2)) {
        let Ok(c) = interpolation_constant_h2(&seq) else { return Ok(()) };
        prop_assert!(c >= 1.0 - 1e-12);
        let rotated: Vec<Point> = seq.points().iter().map(|p| p.rotated(&angles[..p.dim()]).unwrap()).collect();
        let rc = interpolation_constant_h2(&Arc::new(PointSequence::new(rotated).unwrap())).unwrap();
        prop_assert!((c - rc).abs() < 1e-8 * c);
    }
}

#[test]
fn dyadic_radial_sequence_stays_interpolating() {
    let constants: Vec<f64> = (1..=32)
        .map(|k| {
            let pts = (1..=k).map(|j| Point::from_real(&[1.0 - 0.5f64.powi(j)]).unwrap()).collect();
            interpolation_constant_h2(&Arc::new(PointSequence::new(pts).unwrap())).unwrap()
        })
        .collect();
    let steps: Vec<f64> = constants.windows(2).map(|w| w[1] - w[0]).collect();
    // adding a point can only shrink λ_min
    assert!(steps.iter().all(|&d| d >= -1e-9), "{constants:?}");
    // growth is concave from the seventh section on and has slowed by an order of magnitude
    for w in steps[6..].windows(2) {
        assert!(w[1] < w[0], "{constants:?}");
    }
    assert!(steps[30] < 0.1 * steps[6], "{constants:?}");
    assert!(constants[31] < 250.0, "{constants:?}");
}
