//! Symmetries of a loop: reparametrizations `f` with `i ∘ f = i`.
//!
//! An isotropy element preserves the pulled-back length element, so after
//! resampling by arclength every isotropy element is a rigid rotation `t ↦ t + j/k`.
//! The search therefore runs over cyclic shifts of the resampled samples. A nontrivial
//! element has no fixed point, so orientation-reversing candidates (which always
//! have two) must fail; they are still tested as a runtime check.

use serde::Serialize;

use crate::curve::{CurveError, LoopImmersion, MIN_SAMPLES};
use crate::linalg::dist;
use crate::matching::verify_reparam;
use crate::multiplicity::{delta, image_graph};
use crate::reparam::ReparamMap;
use crate::tolerance::ToleranceProfile;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SymmetryError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("orientation-reversing symmetry t -> {center} - t passed with residual {residual}; this contradicts fixed-point freeness and indicates a bug or a degenerate tolerance")]
    ReversingSymmetry { center: f64, residual: f64 },
    #[error("primitive reconstruction residual {residual} exceeds eps_match {eps_match}; tolerances are inconsistent")]
    Reconstruction { residual: f64, eps_match: f64 },
    #[error("primitive loop of order {order} is not free")]
    PrimitiveNotFree { order: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsotropyGroup {
    pub order: usize,
    /// Generator in the loop's own parameter; absent for the trivial group.
    pub generator: Option<ReparamMap>,
    /// `verify_reparam(curve, curve, generator)`, zero for the trivial group.
    pub residual: f64,
    /// Sample count of the arclength resampling the search ran on.
    pub arclength_samples: usize,
    /// Number of shifts and reflections examined.
    pub candidates_tested: usize,
}

impl IsotropyGroup {
    /// `generator^0, ..., generator^(order-1)`.
    pub fn elements(&self) -> Vec<ReparamMap> {
        match &self.generator {
            None => vec![ReparamMap::identity()],
            Some(g) => (0..self.order).map(|j| g.power(j)).collect(),
        }
    }
}

/// A sample whose image cluster has a single branch.
pub fn find_simple_point(curve: &LoopImmersion, eps_image: f64) -> Option<usize> {
    let graph = image_graph(curve, eps_image).ok()?;
    let d = delta(&graph);
    graph.clusters.iter().zip(&d.values).find(|(_, &v)| v == 1).map(|(c, _)| c.members[0])
}

/// `max_k |q_{k+j} − q_k|`, abandoning once it exceeds `limit`.
fn shift_residual(q: &LoopImmersion, j: usize, limit: f64) -> f64 {
    let m = q.len();
    let mut worst: f64 = 0.0;
    for k in 0..m {
        worst = worst.max(dist(q.point((k + j) % m), q.point(k)));
        if worst > limit {
            break;
        }
    }
    worst
}

/// `max_k |q_{j−k} − q_k|`, abandoning once it exceeds `limit`.
fn reflection_residual(q: &LoopImmersion, j: usize, limit: f64) -> f64 {
    let m = q.len();
    let mut worst: f64 = 0.0;
    for k in 0..m {
        worst = worst.max(dist(q.point((j + m - k) % m), q.point(k)));
        if worst > limit {
            break;
        }
    }
    worst
}

/// Rotation by `1/k` in arclength parameter, tested at a sample count divisible by `k`.
fn test_order(curve: &LoopImmersion, k: usize, m_base: usize, eps: f64) -> Result<Option<(LoopImmersion, ReparamMap)>, CurveError> {
    let m2 = k * m_base.div_ceil(k);
    let (q, sigma) = curve.resample_arclength_with_map(m2)?;
    Ok((shift_residual(&q, m2 / k, eps) <= eps).then_some((q, sigma)))
}

pub fn isotropy_group(curve: &LoopImmersion, tol: &ToleranceProfile) -> Result<IsotropyGroup, SymmetryError> {
    curve.ensure_valid()?;
    let m = curve.len();
    let eps = tol.eps_match;
    let q = curve.resample_arclength(m)?;
    let edge = q.edge_lengths().into_iter().fold(0.0, f64::max);
    // a true period off the sample grid still matches within one edge
    let loose = eps + edge;
    let max_order = m / MIN_SAMPLES;
    let mut tested = 0;
    for j in 0..m {
        tested += 1;
        let r = reflection_residual(&q, j, eps);
        if r <= eps {
            return Err(SymmetryError::ReversingSymmetry { center: j as f64 / m as f64, residual: r });
        }
    }
    let residuals: Vec<f64> = (1..m).map(|j| shift_residual(&q, j, loose)).collect();
    tested += residuals.len();
    let mut tried = Vec::new();
    for j in 1..m {
        let r = residuals[j - 1];
        let left = if j > 1 { residuals[j - 2] } else { f64::INFINITY };
        let right = if j + 1 < m { residuals[j] } else { f64::INFINITY };
        if r > loose || r > left || r > right {
            continue;
        }
        let k = (m as f64 / j as f64).round() as usize;
        if k < 2 || k > max_order || tried.contains(&k) {
            continue;
        }
        tried.push(k);
        tested += 1;
        if let Some((q2, sigma)) = test_order(curve, k, m, eps)? {
            let rot = ReparamMap::rotation(1.0 / k as f64);
            let generator = sigma.compose(&rot).compose(&sigma.inverse());
            let residual = verify_reparam(curve, curve, &generator);
            return Ok(IsotropyGroup {
                order: k,
                generator: Some(generator),
                residual,
                arclength_samples: q2.len(),
                candidates_tested: tested,
            });
        }
    }
    Ok(IsotropyGroup { order: 1, generator: None, residual: 0.0, arclength_samples: m, candidates_tested: tested })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FreenessWitness {
    SimplePoint { sample: usize },
    ExhaustiveSearch { order: usize, candidates_tested: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreenessReport {
    pub free: bool,
    pub witness: FreenessWitness,
}

/// A simple point proves freeness at once; otherwise the isotropy search decides.
pub fn is_free(curve: &LoopImmersion, tol: &ToleranceProfile) -> Result<FreenessReport, SymmetryError> {
    if let Some(sample) = find_simple_point(curve, tol.eps_image) {
        return Ok(FreenessReport { free: true, witness: FreenessWitness::SimplePoint { sample } });
    }
    let g = isotropy_group(curve, tol)?;
    Ok(FreenessReport {
        free: g.order == 1,
        witness: FreenessWitness::ExhaustiveSearch { order: g.order, candidates_tested: g.candidates_tested },
    })
}

/// `curve ≈ primitive ∘ (t ↦ degree·t) ∘ parametrization`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimitiveFactorization {
    pub primitive: LoopImmersion,
    pub degree: usize,
    /// Map from the loop's parameter to the arclength parameter of the covering.
    pub parametrization: ReparamMap,
    pub residual: f64,
}

/// The loop `t ↦ primitive(k t)` sampled at the vertices of `primitive` repeated `k` times.
pub fn covering(primitive: &LoopImmersion, k: usize) -> LoopImmersion {
    let mut coords = Vec::with_capacity(primitive.coords().len() * k);
    for _ in 0..k {
        coords.extend_from_slice(primitive.coords());
    }
    LoopImmersion::from_flat(primitive.dim(), coords).expect("repeating valid samples keeps them valid")
}

pub fn primitive_factorization(curve: &LoopImmersion, tol: &ToleranceProfile) -> Result<PrimitiveFactorization, SymmetryError> {
    let g = isotropy_group(curve, tol)?;
    let k = g.order;
    let (q, sigma) = curve.resample_arclength_with_map(g.arclength_samples)?;
    let n = q.len() / k;
    let primitive = LoopImmersion::from_flat(curve.dim(), q.coords()[..n * curve.dim()].to_vec())?;
    primitive.ensure_valid()?;
    let parametrization = sigma.inverse();
    let residual = verify_reparam(curve, &covering(&primitive, k), &parametrization);
    if residual > tol.eps_match {
        return Err(SymmetryError::Reconstruction { residual, eps_match: tol.eps_match });
    }
    if k > 1 && isotropy_group(&primitive, tol)?.order != 1 {
        return Err(SymmetryError::PrimitiveNotFree { order: k });
    }
    Ok(PrimitiveFactorization { primitive, degree: k, parametrization, residual })
}
