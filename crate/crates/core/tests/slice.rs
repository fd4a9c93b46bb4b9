use imm_orbits::slice::{
    chart_phi, inner_product, normal_frame, pullback_halfdensity, pullback_plain, tau_push, tube_profile,
    wall_membership, wall_orthogonal_witness, NormalBundleFrame, NormalSection, SliceError, TubeProfile, Wall,
};
use imm_orbits::{
    build_arc_cover, cover_tolerance, isotropy_group, Arc, CurveGeneratorSpec, LoopImmersion, ReparamMap,
    ToleranceProfile,
};
use proptest::prelude::*;

fn setup(base: &LoopImmersion) -> (NormalBundleFrame, TubeProfile, ToleranceProfile) {
    let tol = ToleranceProfile::for_curve(base);
    let cover = build_arc_cover(base, cover_tolerance(base, tol.eps_image)).unwrap();
    let tube = tube_profile(base, &cover).unwrap();
    (normal_frame(base), tube, tol)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[test]
fn frames_are_orthonormal_and_normal() {
    for base in [
        CurveGeneratorSpec::fourier(2, 300).generate().unwrap(),
        CurveGeneratorSpec::torus_coil(3, 400).generate().unwrap(),
    ] {
        let frame = normal_frame(&base);
        for k in 0..base.len() {
            let t = frame.unit_tangent(k);
            for a in 0..frame.rank() {
                let va = frame.vector(k, a);
                assert!(va.iter().zip(t).map(|(x, y)| x * y).sum::<f64>().abs() < 1e-12);
                for b in 0..frame.rank() {
                    let dot: f64 = va.iter().zip(frame.vector(k, b)).map(|(x, y)| x * y).sum();
                    assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn tube_radius_bounds_the_distance_between_branches() {
    let base = CurveGeneratorSpec::figure_eight(1, 1, 400).generate().unwrap();
    let (_, tube, _) = setup(&base);
    // near the node the two passes are about t^2 apart, far less than 1
    assert!(tube.rho[1] < 0.05);
    assert!(tube.rho[100] > 0.4);
    for (k, &r) in tube.rho.iter().enumerate() {
        assert!(r > 0.0, "sample {k}");
    }
}

#[test]
fn flat_oval_has_a_degenerate_tube() {
    let base = CurveGeneratorSpec::ellipse(1.0, 1e-4, 400).generate().unwrap();
    let cover = build_arc_cover(&base, 1e-10).unwrap();
    assert!(matches!(tube_profile(&base, &cover), Err(SliceError::DegenerateTube { .. })));
}

#[test]
fn push_adds_the_section_vertexwise() {
    let base = CurveGeneratorSpec::figure_eight(3, 2, 600).generate().unwrap();
    let (frame, tube, _) = setup(&base);
    let s = NormalSection::rough_random(base.len(), 1, 8, 0.3 * tube.min());
    let pushed = tau_push(&frame, &tube, &s).unwrap();
    assert!(pushed.validate().is_valid());
    for k in 0..base.len() {
        let nu = frame.vector(k, 0);
        let expected: Vec<f64> = base.point(k).iter().zip(nu).map(|(p, n)| p + s.coeff(k)[0] * n).collect();
        assert_eq!(pushed.point(k), expected.as_slice());
    }
    let mut big = s.clone();
    big.scale(tube.min() / s.sup_norm());
    assert!(matches!(tau_push(&frame, &tube, &big), Err(SliceError::TubeOverflow { .. })));
}

#[test]
fn fixed_sections_push_to_symmetric_loops() {
    let base = CurveGeneratorSpec::k_fold_circle(3, 300).generate().unwrap();
    let (frame, tube, tol) = setup(&base);
    let group = isotropy_group(&base, &tol).unwrap();
    let wall = Wall::new(group.generator.clone().unwrap(), 3, &frame, &tol).unwrap();
    let mut s = wall.project(&NormalSection::smooth_random(300, 1, 3, 4, 1.0), &frame);
    s.scale(0.3 * tube.min() / s.sup_norm());
    assert!(wall_membership(&s, &wall, &frame, &tol));
    let pushed = tau_push(&frame, &tube, &s).unwrap();
    let ptol = ToleranceProfile::for_curve(&pushed);
    assert_eq!(isotropy_group(&pushed, &ptol).unwrap().order, 3);
}

#[test]
fn orbits_meet_the_slice_once_per_isotropy_element() {
    for k in [2usize, 3, 4] {
        let base = CurveGeneratorSpec::k_fold_circle(k, 100 * k).generate().unwrap();
        let (frame, tube, tol) = setup(&base);
        let group = isotropy_group(&base, &tol).unwrap();
        let s = NormalSection::rough_random(base.len(), 1, 77, 0.3 * tube.min());
        let images: Vec<LoopImmersion> = group
            .elements()
            .iter()
            .map(|f| tau_push(&frame, &tube, &pullback_plain(f, &s, &frame, &tol).unwrap()).unwrap())
            .collect();
        assert_eq!(images.len(), k);
        for a in 0..k {
            for b in a + 1..k {
                let gap = (0..base.len()).map(|v| dist(images[a].point(v), images[b].point(v))).fold(0.0, f64::max);
                assert!(gap > 1e-3, "elements {a} and {b} give the same slice point");
            }
        }
    }
}

#[test]
fn witness_is_antisymmetric_and_outside_the_wall() {
    let base = CurveGeneratorSpec::k_fold_circle(2, 400).generate().unwrap();
    let (frame, _, tol) = setup(&base);
    let wall = Wall::new(ReparamMap::rotation(0.5), 2, &frame, &tol).unwrap();
    let arc = Arc { start: 20, len: 120, m: 400, embedded: true };
    let w = wall_orthogonal_witness(&wall, &frame, &arc).unwrap();
    let moved = pullback_plain(&wall.f, &w, &frame, &tol).unwrap();
    let mut sum = moved.clone();
    sum.axpy(1.0, &w);
    assert!(sum.sup_norm() < 1e-12);
    assert!(!wall_membership(&w, &wall, &frame, &tol));
    // an arc longer than half the loop overlaps its own image
    let long = Arc { start: 0, len: 250, m: 400, embedded: true };
    assert!(matches!(wall_orthogonal_witness(&wall, &frame, &long), Err(SliceError::ArcOverlap { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn chart_inverts_push(seed in 0u64..5000, sseed in 0u64..5000, frac in 0.05f64..0.3) {
        let base = CurveGeneratorSpec::fourier(seed, 500).generate().unwrap();
        let (frame, tube, _) = setup(&base);
        let s = NormalSection::smooth_random(500, 1, sseed, 5, frac * tube.min());
        let j = tau_push(&frame, &tube, &s).unwrap();
        let chart = chart_phi(&frame, &tube, &j).unwrap();
        prop_assert!(chart.section.max_abs_diff(&s) <= 1e-8);
        prop_assert!(chart.f0.sup_distance(&ReparamMap::identity()) <= 1e-8);
    }

    #[test]
    fn chart_inverts_push_in_three_dimensions(sseed in 0u64..5000) {
        let base = CurveGeneratorSpec::torus_coil(2, 600).generate().unwrap();
        let (frame, tube, _) = setup(&base);
        let s = NormalSection::smooth_random(600, 2, sseed, 4, 0.3 * tube.min());
        let j = tau_push(&frame, &tube, &s).unwrap();
        let chart = chart_phi(&frame, &tube, &j).unwrap();
        prop_assert!(chart.section.max_abs_diff(&s) <= 1e-8);
    }

    #[test]
    fn halfdensity_pullback_is_isometric_and_projector_is_orthogonal(k in 2usize..=5, seed in 0u64..5000) {
        let base = CurveGeneratorSpec::k_fold_circle(k, 120 * k).generate().unwrap();
        let (frame, _, tol) = setup(&base);
        let m = base.len();
        let group = isotropy_group(&base, &tol).unwrap();
        let s1 = NormalSection::rough_random(m, 1, seed, 1.0);
        let s2 = NormalSection::smooth_random(m, 1, seed + 1, 7, 1.0);
        let n = inner_product(&s1, &s1, &frame).sqrt() * inner_product(&s2, &s2, &frame).sqrt();
        let before = inner_product(&s1, &s2, &frame);
        for f in group.elements() {
            let a = pullback_halfdensity(&f, &s1, &frame, &tol).unwrap();
            let b = pullback_halfdensity(&f, &s2, &frame, &tol).unwrap();
            prop_assert!((inner_product(&a, &b, &frame) - before).abs() <= 1e-8 * n);
        }
        let wall = Wall::new(group.generator.clone().unwrap(), k, &frame, &tol).unwrap();
        let p1 = wall.project(&s1, &frame);
        prop_assert!(wall.project(&p1, &frame).max_abs_diff(&p1) <= 1e-9);
        let lhs = inner_product(&p1, &s2, &frame);
        let rhs = inner_product(&s1, &wall.project(&s2, &frame), &frame);
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }
}
