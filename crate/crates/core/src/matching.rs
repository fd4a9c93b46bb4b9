//! Deciding whether two sampled loops differ only by a reparametrization.
//!
//! The pipeline compares images first, then branch counts, and finally marches
//! along both loops from every admissible seed. It either returns an explicit
//! piecewise-linear `f` with `c2 ∘ f ≈ c1`, or a certificate explaining why no such
//! `f` exists at the working tolerance.

use serde::Serialize;

use crate::curve::LoopImmersion;
use crate::linalg::{dist, lerp, project_to_segment};
use crate::reparam::ReparamMap;
use crate::spatial::{cyclic_runs, SegmentGrid};
use crate::tolerance::ToleranceProfile;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MatchError {
    #[error("curves live in different ambient dimensions ({0} and {1})")]
    Dimension(usize, usize),
    #[error(
        "tolerance inconsistency: images agree but branch counts are unresolved at {unresolved} of {total} samples; \
         adjust eps_match or sampling"
    )]
    Unresolved { unresolved: usize, total: usize },
    #[error(transparent)]
    Tolerance(#[from] crate::tolerance::ToleranceError),
    #[error(transparent)]
    Curve(#[from] crate::curve::CurveError),
}

/// Which input a witness was taken from (1 or 2).
pub type CurveIndex = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionCase {
    /// The continuing branch of the second loop leaves the `eps_match` neighbourhood.
    BranchMismatch,
    /// The march closes after a number of turns of the second loop other than one.
    DegreeMismatch,
    /// The march closes at a different point of the second loop than it started.
    ClosureFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchSeed {
    /// Run of samples of the first loop with minimal branch count.
    pub lambda0: (usize, usize),
    /// Sample of the first loop the march starts from (middle of `lambda0`).
    pub anchor: usize,
    /// Run of edges of the second loop passing within `eps_match` of the anchor.
    pub mu0: (usize, usize),
    /// Real sample index on the second loop matched to the anchor.
    pub anchor_u: f64,
    pub orientation: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionRecord {
    pub seed: MatchSeed,
    pub case: ObstructionCase,
    /// Sample of the first loop where the obstruction was detected.
    pub at_sample: usize,
    /// Distance, turn count or gap that exceeded its threshold.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum SeparationCertificate {
    /// `witness` on loop `curve` is `distance` away from the other trace.
    ImageMismatch { curve: CurveIndex, sample: usize, witness: Vec<f64>, distance: f64 },
    /// Near `witness`, loop 1 has `delta1` branches and loop 2 has `delta2`.
    MultiplicityMismatch { curve: CurveIndex, sample: usize, witness: Vec<f64>, delta1: usize, delta2: usize },
    /// Every seed failed; one record per seed in enumeration order.
    CombinatorialObstruction { records: Vec<ObstructionRecord> },
}

impl SeparationCertificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ImageMismatch { .. } => "ImageMismatch",
            Self::MultiplicityMismatch { .. } => "MultiplicityMismatch",
            Self::CombinatorialObstruction { .. } => "CombinatorialObstruction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EquivalenceVerdict {
    Equivalent { reparam: ReparamMap, residual: f64 },
    Distinct { certificate: SeparationCertificate },
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Self::Equivalent { .. })
    }
}

/// Farthest sample of `from` from the trace of `to`, with its distance.
fn farthest_sample(from: &LoopImmersion, to: &LoopImmersion, hint: f64) -> (usize, f64) {
    let grid = SegmentGrid::for_radius(to, hint);
    let mut best = (0, -1.0);
    for (k, p) in from.points().enumerate() {
        let d = grid.distance_to_trace(p, hint);
        if d > best.1 {
            best = (k, d);
        }
    }
    best
}

/// Image mismatch certificate when the one-sided Hausdorff distance (samples to
/// trace) exceeds `eps_match` in either direction.
pub fn image_separation(c1: &LoopImmersion, c2: &LoopImmersion, eps_match: f64) -> Option<SeparationCertificate> {
    let (k1, d1) = farthest_sample(c1, c2, eps_match);
    let (k2, d2) = farthest_sample(c2, c1, eps_match);
    let (curve, sample, distance, witness) =
        if d1 >= d2 { (1, k1, d1, c1.point(k1)) } else { (2, k2, d2, c2.point(k2)) };
    (distance > eps_match).then(|| SeparationCertificate::ImageMismatch {
        curve,
        sample,
        witness: witness.to_vec(),
        distance,
    })
}

/// Number of branches of a loop passing through the ball of radius `r` around `p`.
///
/// Edges within `2r` are grouped into cyclic runs; a run counts when it comes within
/// `r/2`. `None` when some run has its closest approach in `(r/2, 2r]`, where the
/// count would depend on sampling.
pub fn branch_count(grid: &SegmentGrid, p: &[f64], r: f64) -> Option<usize> {
    let m = grid.curve().len();
    let near = grid.segments_within(p, 2.0 * r);
    let idx: Vec<usize> = near.iter().map(|s| s.0).collect();
    let mut count = 0;
    for (a, b) in cyclic_runs(&idx, m) {
        let len = (b + m - a) % m + 1;
        let closest = near
            .iter()
            .filter(|s| (s.0 + m - a) % m < len)
            .map(|s| s.2)
            .fold(f64::INFINITY, f64::min);
        if closest > 0.5 * r {
            return None;
        }
        count += 1;
    }
    Some(count)
}

/// Resolved branch counts of `curve` at each of its samples.
pub fn self_branch_counts(curve: &LoopImmersion, r: f64) -> Vec<Option<usize>> {
    let grid = SegmentGrid::for_radius(curve, 2.0 * r);
    curve.points().map(|p| branch_count(&grid, p, r)).collect()
}

/// Compares branch counts of both loops at the samples of each, at tube radius `r`.
/// Samples where either count is unresolved are skipped.
pub fn multiplicity_separation(
    c1: &LoopImmersion,
    c2: &LoopImmersion,
    r: f64,
) -> Result<Option<SeparationCertificate>, MatchError> {
    let g1 = SegmentGrid::for_radius(c1, 2.0 * r);
    let g2 = SegmentGrid::for_radius(c2, 2.0 * r);
    let mut unresolved = 0;
    let total = c1.len() + c2.len();
    for (curve, c) in [(1u8, c1), (2u8, c2)] {
        for (k, p) in c.points().enumerate() {
            match (branch_count(&g1, p, r), branch_count(&g2, p, r)) {
                (Some(d1), Some(d2)) if d1 != d2 => {
                    return Ok(Some(SeparationCertificate::MultiplicityMismatch {
                        curve,
                        sample: k,
                        witness: p.to_vec(),
                        delta1: d1,
                        delta2: d2,
                    }));
                }
                (Some(_), Some(_)) => {}
                _ => unresolved += 1,
            }
        }
    }
    if 2 * unresolved > total {
        return Err(MatchError::Unresolved { unresolved, total });
    }
    Ok(None)
}

/// Seeds in deterministic order: `λ₀` is the first run (by start index) of at least
/// three samples of `c1` whose resolved branch count is minimal; every run of edges
/// of `c2` through the anchor yields two seeds, orientation `+1` first.
pub fn enumerate_seeds(c1: &LoopImmersion, c2: &LoopImmersion, eps_match: f64) -> Vec<MatchSeed> {
    let m1 = c1.len();
    let counts = self_branch_counts(c1, eps_match);
    let Some(min) = counts.iter().flatten().copied().min() else {
        return Vec::new();
    };
    let at_min: Vec<usize> = (0..m1).filter(|&k| counts[k] == Some(min)).collect();
    let runs = cyclic_runs(&at_min, m1);
    let Some(&lambda0) = runs.iter().find(|&&(a, b)| (b + m1 - a) % m1 + 1 >= 3) else {
        return Vec::new();
    };
    let run_len = (lambda0.1 + m1 - lambda0.0) % m1 + 1;
    let anchor = (lambda0.0 + run_len / 2) % m1;
    let p = c1.point(anchor);
    let m2 = c2.len();
    let grid = SegmentGrid::for_radius(c2, eps_match);
    let near = grid.segments_within(p, eps_match);
    let idx: Vec<usize> = near.iter().map(|s| s.0).collect();
    let mut seeds = Vec::new();
    for (a, b) in cyclic_runs(&idx, m2) {
        let len = (b + m2 - a) % m2 + 1;
        let (k, lambda, _) = near
            .iter()
            .filter(|s| (s.0 + m2 - a) % m2 < len)
            .min_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)))
            .copied()
            .expect("runs are built from nonempty candidate sets");
        let anchor_u = k as f64 + lambda;
        for orientation in [1, -1] {
            seeds.push(MatchSeed { lambda0, anchor, mu0: (a, b), anchor_u, orientation });
        }
    }
    seeds
}

/// Closest point to `p` on `c2` among positions reached from `u` by moving in
/// direction `dir` for at most `budget` arclength. Returns position and distance.
fn closest_ahead(c2: &LoopImmersion, u: f64, dir: i8, p: &[f64], budget: f64) -> (f64, f64) {
    let m = c2.len() as i64;
    let point = |i: i64| c2.point(i.rem_euclid(m) as usize);
    let mut best = (u, dist(&c2.eval_index(u.rem_euclid(m as f64)), p));
    let mut travelled = 0.0;
    let (mut seg, mut lo, mut hi) = if dir > 0 {
        let s = u.floor();
        (s as i64, u - s, 1.0)
    } else {
        let s = u.ceil() - 1.0;
        (s as i64, 0.0, u - s)
    };
    // bounded by one full turn
    for _ in 0..=m {
        let a = point(seg);
        let b = point(seg + 1);
        let lambda = project_to_segment(p, a, b).0.clamp(lo, hi);
        let d = dist(&lerp(a, b, lambda), p);
        if d < best.1 {
            best = (seg as f64 + lambda, d);
        }
        travelled += dist(a, b) * (hi - lo);
        if travelled >= budget {
            break;
        }
        seg += dir as i64;
        lo = 0.0;
        hi = 1.0;
    }
    best
}

/// Marches from the seed once around `c1`, tracking the continuing branch of `c2`.
pub fn extend_match(
    seed: &MatchSeed,
    c1: &LoopImmersion,
    c2: &LoopImmersion,
    tol: &ToleranceProfile,
) -> Result<ReparamMap, ObstructionRecord> {
    let m1 = c1.len();
    let m2 = c2.len();
    let eps = tol.eps_match;
    let dir = seed.orientation;
    let obstruction = |case, at_sample, value| ObstructionRecord { seed: seed.clone(), case, at_sample, value };
    let mut us = Vec::with_capacity(m1 + 1);
    us.push(seed.anchor_u);
    let mut u = seed.anchor_u;
    for step in 1..=m1 {
        let prev = c1.point((seed.anchor + step - 1) % m1);
        let k = (seed.anchor + step) % m1;
        let p = c1.point(k);
        let budget = 3.0 * dist(prev, p) + 2.0 * eps;
        let (next, d) = closest_ahead(c2, u, dir, p, budget);
        if d > eps {
            return Err(obstruction(ObstructionCase::BranchMismatch, k, d));
        }
        // keep the lift strictly monotone when the match stalls on a vertex
        u = if (next - u) * dir as f64 > 1e-9 { next } else { u + dir as f64 * 1e-9 };
        us.push(u);
    }
    let advance = (u - seed.anchor_u) * dir as f64 / m2 as f64;
    let turns = advance.round();
    if turns != 1.0 {
        return Err(obstruction(ObstructionCase::DegreeMismatch, seed.anchor, advance));
    }
    let gap = (advance - 1.0).abs() * c2.length();
    if gap > eps {
        return Err(obstruction(ObstructionCase::ClosureFailure, seed.anchor, gap));
    }
    let knots = refine_knots(c1, c2, seed.anchor, &us, dir);
    let f = ReparamMap::new(knots, dir as i32).map_err(|_| obstruction(ObstructionCase::ClosureFailure, seed.anchor, gap))?;
    let residual = verify_reparam(c1, c2, &f);
    if residual > eps {
        return Err(obstruction(ObstructionCase::BranchMismatch, seed.anchor, residual));
    }
    Ok(f)
}

/// Knots at every sample of `c1` plus, between them, one knot per vertex of `c2`
/// crossed, placed at the foot of that vertex on the matching edge of `c1`. Between
/// consecutive knots both `c1` and `c2 ∘ f` are then affine.
fn refine_knots(c1: &LoopImmersion, c2: &LoopImmersion, anchor: usize, us: &[f64], dir: i8) -> Vec<(f64, f64)> {
    let m1 = c1.len();
    let m2 = c2.len() as f64;
    let d = dir as f64;
    let mut knots = Vec::with_capacity(us.len() * 2);
    for i in 0..m1 {
        let t = (anchor + i) as f64 / m1 as f64;
        let (ua, ub) = (us[i], us[i + 1]);
        knots.push((t, ua / m2));
        let a = c1.point((anchor + i) % m1);
        let b = c1.point((anchor + i + 1) % m1);
        let mut v = if d > 0.0 { ua.floor() + 1.0 } else { ua.ceil() - 1.0 };
        let mut last_lambda = 0.0;
        while (ub - v) * d > 1e-12 && (v - ua) * d > 1e-12 {
            let vertex = c2.point((v as i64).rem_euclid(m2 as i64) as usize);
            let (lambda, _) = project_to_segment(vertex, a, b);
            let lambda = lambda.clamp(last_lambda + 1e-9, 1.0 - 1e-9);
            if lambda > last_lambda {
                knots.push((t + lambda / m1 as f64, v / m2));
                last_lambda = lambda;
            }
            v += d;
        }
    }
    knots
}

/// Exact sup of `|c2(f(t)) − c1(t)|`: the difference is affine between samples of
/// `c1`, knots of `f` and preimages of vertices of `c2`, so its maximum sits there.
pub fn verify_reparam(c1: &LoopImmersion, c2: &LoopImmersion, f: &ReparamMap) -> f64 {
    let m1 = c1.len();
    let m2 = c2.len();
    let inv = f.inverse();
    let mut ts: Vec<f64> = (0..m1).map(|k| k as f64 / m1 as f64).collect();
    ts.extend(f.knots().iter().map(|k| k.0));
    ts.extend((0..m2).map(|v| inv.eval(v as f64 / m2 as f64)));
    let mut a = vec![0.0; c1.dim()];
    let mut b = vec![0.0; c1.dim()];
    let mut best: f64 = 0.0;
    for t in ts {
        c1.eval_into(t, &mut a);
        c2.eval_into(f.eval(t), &mut b);
        best = best.max(dist(&a, &b));
    }
    best
}

/// Full decision: image comparison, branch-count comparison, then every seed in order.
pub fn decide_orbit_equivalence(
    c1: &LoopImmersion,
    c2: &LoopImmersion,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict, MatchError> {
    tol.check()?;
    c1.ensure_valid()?;
    c2.ensure_valid()?;
    if c1.dim() != c2.dim() {
        return Err(MatchError::Dimension(c1.dim(), c2.dim()));
    }
    if let Some(certificate) = image_separation(c1, c2, tol.eps_match) {
        return Ok(EquivalenceVerdict::Distinct { certificate });
    }
    if let Some(certificate) = multiplicity_separation(c1, c2, tol.eps_match)? {
        return Ok(EquivalenceVerdict::Distinct { certificate });
    }
    // comparable density: refining keeps the parametrization, so maps carry over
    let (m1, m2) = (c1.len(), c2.len());
    let r1 = if m2 > 5 * m1 { m2.div_ceil(m1 * 4) } else { 1 };
    let r2 = if m1 > 5 * m2 { m1.div_ceil(m2 * 4) } else { 1 };
    let (d1, d2) = (c1.refine(r1), c2.refine(r2));
    let seeds = enumerate_seeds(&d1, &d2, tol.eps_match);
    let mut records = Vec::with_capacity(seeds.len());
    for seed in &seeds {
        match extend_match(seed, &d1, &d2, tol) {
            Ok(reparam) => {
                let residual = verify_reparam(c1, c2, &reparam);
                return Ok(EquivalenceVerdict::Equivalent { reparam, residual });
            }
            Err(record) => records.push(record),
        }
    }
    Ok(EquivalenceVerdict::Distinct { certificate: SeparationCertificate::CombinatorialObstruction { records } })
}
