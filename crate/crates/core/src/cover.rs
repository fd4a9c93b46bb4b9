//! Covers of the parameter circle by arcs on which the sampled loop is embedded.

use serde::Serialize;

use crate::curve::LoopImmersion;
use crate::linalg::dist2;
use crate::spatial::PointGrid;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CoverError {
    #[error("cover construction failed: no embedded arc of at least 4 samples starts at index {start} (eps_image = {eps_image})")]
    Failed { start: usize, eps_image: f64 },
    #[error("eps_image must be positive")]
    BadTolerance,
}

/// A cyclic run of `len` consecutive samples starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub start: usize,
    pub len: usize,
    /// Loop sample count, for cyclic index arithmetic.
    pub m: usize,
    /// Set when pairwise distances of non-adjacent samples exceed the cover tolerance.
    pub embedded: bool,
}

impl Arc {
    /// First and last sample index of the arc.
    pub fn outer(&self) -> (usize, usize) {
        (self.start, (self.start + self.len - 1) % self.m)
    }

    /// The arc with one sample trimmed from each end.
    pub fn inner(&self) -> (usize, usize) {
        ((self.start + 1) % self.m, (self.start + self.len - 2) % self.m)
    }

    /// Sample indices in order along the arc.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |i| (self.start + i) % self.m)
    }

    /// Position of `k` along the arc.
    pub fn offset_of(&self, k: usize) -> Option<usize> {
        let off = (k + self.m - self.start) % self.m;
        (off < self.len).then_some(off)
    }

    pub fn contains(&self, k: usize) -> bool {
        self.offset_of(k).is_some()
    }

    pub fn inner_contains(&self, k: usize) -> bool {
        matches!(self.offset_of(k), Some(o) if o >= 1 && o + 1 < self.len)
    }

    /// Splits the arc into `pieces` consecutive sub-arcs separated by one-sample gaps.
    pub fn subdivide(&self, pieces: usize) -> Vec<Arc> {
        if pieces == 0 || self.len < 2 * pieces {
            return Vec::new();
        }
        let usable = self.len + 1 - pieces;
        let base = usable / pieces;
        let extra = usable % pieces;
        let mut out = Vec::with_capacity(pieces);
        let mut offset = 0;
        for p in 0..pieces {
            let len = base + usize::from(p < extra);
            out.push(Arc { start: (self.start + offset) % self.m, len, m: self.m, embedded: self.embedded });
            offset += len + 1;
        }
        out
    }
}

/// Arcs `U_α` whose inner arcs `W_α` cover the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcCover {
    pub arcs: Vec<Arc>,
    pub eps_image: f64,
}

impl ArcCover {
    /// Indices of arcs whose inner part contains `k`.
    pub fn arcs_covering(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.arcs.iter().enumerate().filter(move |(_, a)| a.inner_contains(k)).map(|(i, _)| i)
    }
}

/// Greedy cover: each arc grows from its start while the new sample stays more than
/// `eps_image` from every earlier non-adjacent sample of the arc, up to `m/2 + 2` samples.
/// Consecutive arcs overlap in two samples, so inner arcs cover the circle.
/// `eps_image` capped at half the shortest edge. Sampling finer than `eps_image`
/// puts non-adjacent neighbours inside the clash radius; the cap restores a cover
/// that resolves the loop at its own sample spacing.
pub fn cover_tolerance(curve: &LoopImmersion, eps_image: f64) -> f64 {
    let shortest = curve.edge_lengths().into_iter().fold(f64::INFINITY, f64::min);
    eps_image.min(0.5 * shortest)
}

pub fn build_arc_cover(curve: &LoopImmersion, eps_image: f64) -> Result<ArcCover, CoverError> {
    if !(eps_image > 0.0 && eps_image.is_finite()) {
        return Err(CoverError::BadTolerance);
    }
    let m = curve.len();
    let grid = PointGrid::new(curve, eps_image.max(curve.length() / m as f64));
    let cap = m / 2 + 2;
    let e2 = eps_image * eps_image;
    let mut arcs = Vec::new();
    let mut start = 0usize;
    loop {
        let mut len = 1;
        while len < cap {
            let next = start + len;
            let p = curve.point(next % m);
            // every sample of the arc except the newest one is non-adjacent to `next`
            let clash = grid.within(p, eps_image).into_iter().any(|k| {
                let off = (k + m - start % m) % m;
                off + 1 < len && dist2(curve.point(k), p) <= e2
            });
            if clash {
                break;
            }
            len += 1;
        }
        // consecutive arcs share two samples, so progress needs four
        if len < 4 {
            return Err(CoverError::Failed { start: start % m, eps_image });
        }
        arcs.push(Arc { start: start % m, len, m, embedded: true });
        let end = start + len - 1;
        // the inner arc of the last one must reach index 1 of the next turn
        if end >= m + 2 {
            break;
        }
        start = end - 2;
    }
    Ok(ArcCover { arcs, eps_image })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::CurveGeneratorSpec;

    fn assert_cover_correct(c: &LoopImmersion, cover: &ArcCover) {
        let m = c.len();
        for k in 0..m {
            assert!(cover.arcs_covering(k).next().is_some(), "sample {k} not covered");
        }
        for arc in &cover.arcs {
            let idx: Vec<usize> = arc.indices().collect();
            for a in 0..idx.len() {
                for b in a + 2..idx.len() {
                    assert!(dist2(c.point(idx[a]), c.point(idx[b])).sqrt() > cover.eps_image);
                }
            }
        }
    }

    #[test]
    fn circle_gets_several_arcs() {
        let c = CurveGeneratorSpec::circle(100).generate().unwrap();
        let cover = build_arc_cover(&c, 0.01).unwrap();
        assert!(cover.arcs.len() >= 2);
        assert_cover_correct(&c, &cover);
    }

    #[test]
    fn eight_arcs_avoid_double_passes() {
        let c = CurveGeneratorSpec::figure_eight(1, 1, 200).generate().unwrap();
        let cover = build_arc_cover(&c, 0.01).unwrap();
        assert_cover_correct(&c, &cover);
        let node: Vec<usize> = (0..200).filter(|&k| crate::linalg::norm(c.point(k)) < 1e-12).collect();
        assert_eq!(node.len(), 2);
        for arc in &cover.arcs {
            assert!(!(arc.contains(node[0]) && arc.contains(node[1])));
        }
    }

    #[test]
    fn coarse_tolerance_fails() {
        let c = CurveGeneratorSpec::circle(100).generate().unwrap();
        assert!(matches!(build_arc_cover(&c, 3.0), Err(CoverError::Failed { .. })));
    }

    #[test]
    fn hairpin_fails() {
        // the spike doubles back: samples 1 and 3 are far closer than the arclength between them
        let mut pts: Vec<Vec<f64>> = (0..12)
            .map(|k| {
                let t = k as f64 / 12.0 * std::f64::consts::TAU;
                vec![t.cos(), t.sin()]
            })
            .collect();
        pts.insert(2, vec![2.0, 0.5]);
        let c = LoopImmersion::from_points(2, &pts).unwrap();
        let d13 = crate::linalg::dist(c.point(1), c.point(3));
        assert!(matches!(build_arc_cover(&c, d13 * 1.01), Err(CoverError::Failed { .. })));
        assert!(build_arc_cover(&c, d13 * 0.99).is_ok());
    }

    #[test]
    fn subdivide_leaves_gaps() {
        let arc = Arc { start: 95, len: 20, m: 100, embedded: true };
        let parts = arc.subdivide(3);
        assert_eq!(parts.len(), 3);
        assert_eq!(parts.iter().map(|a| a.len).sum::<usize>(), 18);
        for w in parts.windows(2) {
            assert!(!w[0].contains(w[1].start));
            assert!(!w[1].contains(w[0].outer().1));
        }
    }
}
