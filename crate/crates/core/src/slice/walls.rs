use serde::Serialize;

use super::action::pullback_unchecked;
use super::frame::{NormalBundleFrame, NormalSection};
use super::{inner_product, SliceError};
use crate::cover::{build_arc_cover, Arc};
use crate::linalg::gram_rank;
use crate::reparam::ReparamMap;
use crate::symmetry::isotropy_group;
use crate::tolerance::ToleranceProfile;

/// Fixed sections of one symmetry `f` of order `order`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wall {
    pub f: ReparamMap,
    pub order: usize,
}

impl Wall {
    /// Checks that `f` is a symmetry of the frame's base.
    pub fn new(f: ReparamMap, order: usize, frame: &NormalBundleFrame, tol: &ToleranceProfile) -> Result<Self, SliceError> {
        let residual = crate::matching::verify_reparam(frame.base(), frame.base(), &f);
        if residual > tol.eps_match {
            return Err(SliceError::NotIsotropy { residual, eps: tol.eps_match });
        }
        Ok(Self { f, order: order.max(1) })
    }

    /// Group average `(1/k) Σ_j (f^j)* s`, the orthogonal projection onto the wall.
    pub fn project(&self, s: &NormalSection, frame: &NormalBundleFrame) -> NormalSection {
        let mut acc = s.clone();
        let mut term = s.clone();
        for _ in 1..self.order {
            term = pullback_unchecked(&self.f, &term, frame);
            acc.axpy(1.0, &term);
        }
        acc.scale(1.0 / self.order as f64);
        acc
    }
}

/// `‖f*s − s‖∞ ≤ eps_section`.
pub fn wall_membership(s: &NormalSection, wall: &Wall, frame: &NormalBundleFrame, tol: &ToleranceProfile) -> bool {
    let moved = pullback_unchecked(&wall.f, s, frame);
    let mut diff = moved;
    diff.axpy(-1.0, s);
    diff.sup_norm() <= tol.eps_section
}

/// Bump `sin²` profile along the first frame direction, supported on `arc`.
fn bump(arc: &Arc, frame: &NormalBundleFrame) -> NormalSection {
    let mut s = NormalSection::zeros(frame.len(), frame.rank());
    for (off, k) in arc.indices().enumerate() {
        let x = std::f64::consts::PI * (off + 1) as f64 / (arc.len + 1) as f64;
        s.coeff_mut(k)[0] = x.sin().powi(2);
    }
    s
}

/// `s_α − f* s_α` for a bump `s_α` on `arc`, orthogonal to every section fixed by `f`.
/// The arc must be disjoint from its preimage under `f`.
pub fn wall_orthogonal_witness(wall: &Wall, frame: &NormalBundleFrame, arc: &Arc) -> Result<NormalSection, SliceError> {
    let s = bump(arc, frame);
    let pulled = pullback_unchecked(&wall.f, &s, frame);
    for k in arc.indices() {
        if pulled.coeff(k).iter().any(|&x| x != 0.0) {
            return Err(SliceError::ArcOverlap { start: arc.start });
        }
    }
    let mut w = s;
    w.axpy(-1.0, &pulled);
    Ok(w)
}

/// `d` witnesses on consecutive disjoint pieces of cover arc `alpha`.
pub fn witness_family(
    wall: &Wall,
    frame: &NormalBundleFrame,
    arc: &Arc,
    d: usize,
) -> Result<Vec<NormalSection>, SliceError> {
    arc.subdivide(d).iter().map(|a| wall_orthogonal_witness(wall, frame, a)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WallSummary {
    /// The wall belongs to `generator^power`.
    pub power: usize,
    pub order: usize,
    /// Trace of the averaging projector on the full coefficient basis.
    pub projector_rank: usize,
    /// Rank of the Gram matrix of the witnesses built for this wall.
    pub witness_dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChamberProbe {
    pub segments: usize,
    pub points_per_segment: usize,
    /// Sampled points lying in some wall.
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramReport {
    pub isotropy_order: usize,
    pub walls: Vec<WallSummary>,
    /// Pairs of walls (by position in `walls`) with equal projectors.
    pub coincident: Vec<(usize, usize)>,
    pub probe: ChamberProbe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramOptions {
    /// Witnesses requested per wall.
    pub witnesses: usize,
    pub probe_segments: usize,
    pub probe_points: usize,
    pub seed: u64,
}

impl Default for DiagramOptions {
    fn default() -> Self {
        Self { witnesses: 8, probe_segments: 16, probe_points: 33, seed: 0 }
    }
}

/// Walls of every nontrivial symmetry, their projector ranks, witness dimensions,
/// coincidences, and a segment probe of the complement.
pub fn diagram_summary(
    frame: &NormalBundleFrame,
    tol: &ToleranceProfile,
    opts: &DiagramOptions,
) -> Result<DiagramReport, SliceError> {
    let base = frame.base();
    let m = frame.len();
    let rank = frame.rank();
    let group = isotropy_group(base, tol)?;
    let k = group.order;
    let mut walls = Vec::new();
    if let Some(g) = &group.generator {
        for power in 1..k {
            let order = k / gcd(power, k);
            walls.push((power, Wall { f: g.power(power), order }));
        }
    }
    let cover = build_arc_cover(base, crate::cover::cover_tolerance(base, tol.eps_image)).ok();
    let mut summaries = Vec::with_capacity(walls.len());
    for (power, wall) in &walls {
        let mut trace = 0.0;
        for j in 0..m {
            for c in 0..rank {
                let mut e = NormalSection::zeros(m, rank);
                e.coeff_mut(j)[c] = 1.0;
                trace += wall.project(&e, frame).coeff(j)[c];
            }
        }
        let witness_dimension = match &cover {
            Some(cover) => {
                let arc = cover.arcs.iter().max_by_key(|a| a.len).expect("covers are nonempty");
                // pieces must avoid their images, so stay inside one fundamental domain
                let piece = Arc { len: arc.len.min(m / wall.order), ..*arc };
                match witness_family(wall, frame, &piece, opts.witnesses) {
                    Ok(ws) => {
                        let d = ws.len();
                        let gram: Vec<f64> =
                            (0..d * d).map(|x| inner_product(&ws[x / d], &ws[x % d], frame)).collect();
                        gram_rank(&gram, d, 1e-10)
                    }
                    Err(_) => 0,
                }
            }
            None => 0,
        };
        summaries.push(WallSummary { power: *power, order: wall.order, projector_rank: trace.round() as usize, witness_dimension });
    }
    let probes: Vec<NormalSection> =
        (0..3).map(|i| NormalSection::rough_random(m, rank, opts.seed.wrapping_add(1000 + i), 1.0)).collect();
    let mut coincident = Vec::new();
    for a in 0..walls.len() {
        for b in a + 1..walls.len() {
            let same = probes.iter().all(|s| {
                walls[a].1.project(s, frame).max_abs_diff(&walls[b].1.project(s, frame)) <= 1e-9
            });
            if same {
                coincident.push((a, b));
            }
        }
    }
    let mut hits = 0;
    if !walls.is_empty() {
        for seg in 0..opts.probe_segments {
            let a = NormalSection::rough_random(m, rank, opts.seed.wrapping_add(2 * seg as u64), 1.0);
            let b = NormalSection::rough_random(m, rank, opts.seed.wrapping_add(2 * seg as u64 + 1), 1.0);
            for p in 0..opts.probe_points {
                let x = a.lerp(&b, p as f64 / (opts.probe_points - 1).max(1) as f64);
                if walls.iter().any(|(_, w)| wall_membership(&x, w, frame, tol)) {
                    hits += 1;
                }
            }
        }
    }
    Ok(DiagramReport {
        isotropy_order: k,
        walls: summaries,
        coincident,
        probe: ChamberProbe {
            segments: if walls.is_empty() { 0 } else { opts.probe_segments },
            points_per_segment: opts.probe_points,
            hits,
        },
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
