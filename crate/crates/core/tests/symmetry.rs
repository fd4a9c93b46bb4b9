use imm_orbits::symmetry::{covering, FreenessWitness};
use imm_orbits::{
    is_free, isotropy_group, primitive_factorization, verify_reparam, CurveGeneratorSpec, LoopImmersion, ReparamMap,
    ToleranceProfile,
};
use proptest::prelude::*;

/// The Fourier loop `seed` traversed `k` times, sampled at parameters `(j + phase) / m`.
fn fourier_cover(seed: u64, k: usize, m: usize, phase: f64) -> LoopImmersion {
    let spec = CurveGeneratorSpec::fourier(seed, m);
    let pts: Vec<Vec<f64>> = (0..m).map(|j| spec.eval((k as f64 * (j as f64 + phase) / m as f64).fract())).collect();
    LoopImmersion::try_new(2, &pts).unwrap()
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[test]
fn eight_word_with_three_upper_passes_is_free_without_simple_points() {
    let c = CurveGeneratorSpec::figure_eight(3, 2, 600).generate().unwrap();
    let tol = ToleranceProfile::for_curve(&c);
    let report = is_free(&c, &tol).unwrap();
    assert!(report.free);
    assert!(matches!(report.witness, FreenessWitness::ExhaustiveSearch { order: 1, .. }));
}

#[test]
fn periodic_words_are_not_free() {
    // ABAB is the plain eight traversed twice
    let c = CurveGeneratorSpec::figure_eight_word("ABAB", 800).generate().unwrap();
    let tol = ToleranceProfile::for_curve(&c);
    assert_eq!(isotropy_group(&c, &tol).unwrap().order, 2);
    let c = CurveGeneratorSpec::figure_eight_word("AABAAB", 900).generate().unwrap();
    assert_eq!(isotropy_group(&c, &tol).unwrap().order, 2);
}

#[test]
fn covering_by_the_primitive_reproduces_the_loop() {
    let c = CurveGeneratorSpec::k_fold_circle(4, 480).generate().unwrap();
    let tol = ToleranceProfile::for_curve(&c);
    let fac = primitive_factorization(&c, &tol).unwrap();
    assert_eq!(fac.degree, 4);
    let rebuilt = covering(&fac.primitive, 4);
    assert!(verify_reparam(&c, &rebuilt, &fac.parametrization) <= tol.eps_match);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn covers_of_free_loops_have_cyclic_isotropy(seed in 0u64..5000, k in 1usize..=6, phase in 0.0f64..1.0) {
        let m = 600;
        let c = fourier_cover(seed, k, m, phase);
        let tol = ToleranceProfile::for_curve(&c);
        let group = isotropy_group(&c, &tol).unwrap();
        prop_assert_eq!(group.order, k);
        let elements = group.elements();
        prop_assert_eq!(elements.len(), k);
        for (j, f) in elements.iter().enumerate() {
            prop_assert_eq!(f.degree(), 1);
            prop_assert!(verify_reparam(&c, &c, f) <= tol.eps_match);
            if j > 0 {
                // no fixed points: every parameter moves by roughly j/k of a turn or more
                let moved = (0..m).map(|s| {
                    let t = s as f64 / m as f64;
                    circular_gap(f.eval(t), t)
                }).fold(f64::INFINITY, f64::min);
                prop_assert!(moved > 0.25 / k as f64, "element {} moves a point by only {}", j, moved);
            }
        }
        if let Some(g) = &group.generator {
            prop_assert!(verify_reparam(&c, &c, &g.power(k)) <= tol.eps_match);
            prop_assert!(g.power(k).sup_distance(&ReparamMap::identity()) < 1e-2);
        }
    }

    #[test]
    fn primitives_are_free(seed in 0u64..5000, k in 1usize..=6) {
        let c = fourier_cover(seed, k, 600, 0.0);
        let tol = ToleranceProfile::for_curve(&c);
        let fac = primitive_factorization(&c, &tol).unwrap();
        prop_assert_eq!(fac.degree, k);
        prop_assert!(fac.residual <= tol.eps_match);
        let ptol = ToleranceProfile::for_curve(&fac.primitive);
        prop_assert!(is_free(&fac.primitive, &ptol).unwrap().free);
    }
}
