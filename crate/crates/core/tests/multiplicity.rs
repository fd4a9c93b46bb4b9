use imm_orbits::multiplicity::{check_semicontinuity, delta, image_graph, level_partition, total_branch_measure};
use imm_orbits::{CurveGeneratorSpec, LoopImmersion, ReparamMap, ToleranceProfile};
use proptest::prelude::*;

/// Branch count at sample `k` from scratch: runs of samples within `eps` of it.
fn oracle_delta(c: &LoopImmersion, k: usize, eps: f64) -> usize {
    let m = c.len();
    let p = c.point(k);
    let near: Vec<bool> =
        (0..m).map(|j| c.point(j).iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= eps * eps).collect();
    if near.iter().all(|&b| b) {
        return 1;
    }
    (0..m).filter(|&j| near[j] && !near[(j + m - 1) % m]).count()
}

fn assert_matches_oracle(c: &LoopImmersion, eps: f64) -> Vec<usize> {
    let graph = image_graph(c, eps).unwrap();
    let d = delta(&graph);
    (0..c.len())
        .map(|k| {
            let v = d.values[graph.cluster_of[k]];
            assert_eq!(v, oracle_delta(c, k, eps), "sample {k}");
            v
        })
        .collect()
}

fn named_corpus() -> Vec<(LoopImmersion, f64)> {
    let mut out = Vec::new();
    for spec in [
        CurveGeneratorSpec::circle(400),
        CurveGeneratorSpec::ellipse(3.0, 1.0, 400),
        CurveGeneratorSpec::rose(3, 600),
        CurveGeneratorSpec::rose(5, 600),
        CurveGeneratorSpec::figure_eight(3, 2, 600),
        CurveGeneratorSpec::figure_eight(2, 1, 600),
        CurveGeneratorSpec::torus_coil(2, 500),
    ] {
        let c = spec.generate().unwrap();
        let eps = ToleranceProfile::for_curve(&c).eps_image;
        out.push((c, eps));
    }
    for k in 2..=5 {
        let c = CurveGeneratorSpec::k_fold_circle(k, 120 * k).generate().unwrap();
        let eps = ToleranceProfile::for_curve(&c).eps_image;
        out.push((c, eps));
    }
    out.push((CurveGeneratorSpec::figure_eight(1, 1, 600).generate().unwrap(), 1e-4));
    out.push((CurveGeneratorSpec::rose(4, 600).generate().unwrap(), 1e-4));
    out
}

#[test]
fn named_families_match_the_oracle() {
    for (c, eps) in named_corpus() {
        let d = assert_matches_oracle(&c, eps);
        assert!(d.iter().all(|&v| v >= 1));
    }
}

#[test]
fn k_fold_circle_has_constant_multiplicity() {
    for k in 1..=6 {
        let c = CurveGeneratorSpec::k_fold_circle(k, 100 * k).generate().unwrap();
        let graph = image_graph(&c, 1e-3).unwrap();
        let d = delta(&graph);
        assert_eq!((d.min(), d.max()), (k, k));
        assert_eq!(graph.clusters.len(), 100);
    }
}

#[test]
fn three_petal_rose_center_is_triple() {
    let c = CurveGeneratorSpec::rose(3, 600).generate().unwrap();
    let graph = image_graph(&c, 1e-3).unwrap();
    let d = delta(&graph);
    let (origin, _) = graph.nearest_cluster(&[0.0, 0.0]);
    assert_eq!(d.values[origin], 3);
    assert_eq!(d.max(), 3);
}

#[test]
fn structure_holds_on_the_corpus() {
    let mut corpus = named_corpus();
    for seed in 0..20 {
        let c = CurveGeneratorSpec::fourier(seed, 500).generate().unwrap();
        let eps = ToleranceProfile::for_curve(&c).eps_image;
        corpus.push((c, eps));
    }
    for (c, eps) in corpus {
        let graph = image_graph(&c, eps).unwrap();
        let d = delta(&graph);
        assert!(check_semicontinuity(&graph, &d).is_empty());
        assert!((total_branch_measure(&graph) - 1.0).abs() < 1e-12);
        let partition = level_partition(&graph, &d);
        assert!(partition.dense);
        // closures of the interior components cover every cluster
        let mut covered = vec![false; graph.clusters.len()];
        for ci in partition.interior() {
            for &cl in &partition.components[ci].clusters {
                covered[cl] = true;
                for n in graph.neighbors(cl) {
                    covered[n] = true;
                }
            }
        }
        assert!(covered.iter().all(|&b| b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fourier_loops_match_the_oracle(seed in 0u64..10_000) {
        let c = CurveGeneratorSpec::fourier(seed, 300).generate().unwrap();
        let eps = ToleranceProfile::for_curve(&c).eps_image;
        assert_matches_oracle(&c, eps);
    }

    #[test]
    fn index_permutations_preserve_multiplicity(shift in 0usize..600, reverse: bool, which in 0usize..4) {
        let spec = [
            CurveGeneratorSpec::figure_eight(3, 2, 600),
            CurveGeneratorSpec::rose(3, 600),
            CurveGeneratorSpec::k_fold_circle(3, 600),
            CurveGeneratorSpec::fourier(9, 600),
        ][which].clone();
        let c = spec.generate().unwrap();
        let m = c.len();
        let mut f = ReparamMap::rotation(shift as f64 / m as f64);
        if reverse {
            f = f.compose(&ReparamMap::reflection(0.0));
        }
        let moved = c.precompose(&f, m);
        let eps = ToleranceProfile::for_curve(&c).eps_image;
        let (g1, g2) = (image_graph(&c, eps).unwrap(), image_graph(&moved, eps).unwrap());
        prop_assert_eq!(g1.clusters.len(), g2.clusters.len());
        prop_assert_eq!(delta(&g1).sorted(), delta(&g2).sorted());
        prop_assert_eq!(g1.adjacency.len(), g2.adjacency.len());
    }
}
