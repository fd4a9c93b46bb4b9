//! Uniform-grid spatial hashing over the samples and edges of a loop.
//!
//! Cells are keyed on the first (at most three) coordinates; higher coordinates are
//! ignored by the hash, which only makes candidate sets larger, never incomplete.

use std::collections::HashMap;

use crate::curve::LoopImmersion;
use crate::linalg::{dist2, project_to_segment};

type Cell = [i64; 3];

fn cell_of(p: &[f64], size: f64) -> Cell {
    let mut c = [0i64; 3];
    for (i, x) in p.iter().take(3).enumerate() {
        c[i] = (x / size).floor() as i64;
    }
    c
}

fn cells_in_box(lo: &[f64], hi: &[f64], size: f64, dims: usize) -> Vec<Cell> {
    let a = cell_of(lo, size);
    let b = cell_of(hi, size);
    let mut out = Vec::new();
    let z_range = if dims >= 3 { a[2]..=b[2] } else { 0..=0 };
    for x in a[0]..=b[0] {
        for y in a[1]..=b[1] {
            for z in z_range.clone() {
                out.push([x, y, z]);
            }
        }
    }
    out
}

fn box_cell_count(lo: &[f64], hi: &[f64], size: f64, dims: usize) -> f64 {
    let a = cell_of(lo, size);
    let b = cell_of(hi, size);
    (0..dims.min(3)).map(|i| (b[i] - a[i] + 1) as f64).product()
}

/// Hash of the edges `[p_k, p_{k+1}]` of a loop.
pub struct SegmentGrid<'a> {
    curve: &'a LoopImmersion,
    size: f64,
    cells: HashMap<Cell, Vec<usize>>,
}

impl<'a> SegmentGrid<'a> {
    pub fn new(curve: &'a LoopImmersion, cell_size: f64) -> Self {
        let m = curve.len();
        let dims = curve.dim();
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for k in 0..m {
            let a = curve.point(k);
            let b = curve.point((k + 1) % m);
            let lo: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.min(*y)).collect();
            let hi: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.max(*y)).collect();
            for c in cells_in_box(&lo, &hi, cell_size, dims) {
                cells.entry(c).or_default().push(k);
            }
        }
        Self { curve, size: cell_size, cells }
    }

    /// Cell size matched to a loop: at least the mean edge length and `radius`.
    pub fn for_radius(curve: &'a LoopImmersion, radius: f64) -> Self {
        let mean = curve.length() / curve.len() as f64;
        Self::new(curve, radius.max(mean))
    }

    pub fn curve(&self) -> &LoopImmersion {
        self.curve
    }

    /// Edges whose distance to `p` is at most `radius`, sorted by index, with the
    /// projection parameter and distance of the closest point.
    pub fn segments_within(&self, p: &[f64], radius: f64) -> Vec<(usize, f64, f64)> {
        let m = self.curve.len();
        let dims = self.curve.dim();
        let lo: Vec<f64> = p.iter().map(|x| x - radius).collect();
        let hi: Vec<f64> = p.iter().map(|x| x + radius).collect();
        let r2 = radius * radius;
        let candidates: Vec<usize> = if box_cell_count(&lo, &hi, self.size, dims) > m as f64 {
            (0..m).collect()
        } else {
            let mut v: Vec<usize> = cells_in_box(&lo, &hi, self.size, dims)
                .iter()
                .filter_map(|c| self.cells.get(c))
                .flatten()
                .copied()
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        candidates
            .into_iter()
            .filter_map(|k| {
                let (lambda, d2) = project_to_segment(p, self.curve.point(k), self.curve.point((k + 1) % m));
                (d2 <= r2).then(|| (k, lambda, d2.sqrt()))
            })
            .collect()
    }

    /// Exact distance from `p` to the trace (brute force fallback when nothing is near).
    pub fn distance_to_trace(&self, p: &[f64], hint_radius: f64) -> f64 {
        let near = self.segments_within(p, hint_radius);
        if let Some(d) = near.iter().map(|s| s.2).min_by(|a, b| a.total_cmp(b)) {
            return d;
        }
        let m = self.curve.len();
        (0..m)
            .map(|k| project_to_segment(p, self.curve.point(k), self.curve.point((k + 1) % m)).1)
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

/// Hash of the samples of a loop.
pub struct PointGrid<'a> {
    curve: &'a LoopImmersion,
    size: f64,
    cells: HashMap<Cell, Vec<usize>>,
}

impl<'a> PointGrid<'a> {
    pub fn new(curve: &'a LoopImmersion, cell_size: f64) -> Self {
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (k, p) in curve.points().enumerate() {
            cells.entry(cell_of(p, cell_size)).or_default().push(k);
        }
        Self { curve, size: cell_size, cells }
    }

    /// Sample indices within `radius` of `p`, sorted.
    pub fn within(&self, p: &[f64], radius: f64) -> Vec<usize> {
        let dims = self.curve.dim();
        let lo: Vec<f64> = p.iter().map(|x| x - radius).collect();
        let hi: Vec<f64> = p.iter().map(|x| x + radius).collect();
        let r2 = radius * radius;
        let mut out: Vec<usize> = if box_cell_count(&lo, &hi, self.size, dims) > self.curve.len() as f64 {
            (0..self.curve.len()).collect()
        } else {
            cells_in_box(&lo, &hi, self.size, dims)
                .iter()
                .filter_map(|c| self.cells.get(c))
                .flatten()
                .copied()
                .collect()
        };
        out.retain(|&k| dist2(self.curve.point(k), p) <= r2);
        out.sort_unstable();
        out
    }
}

/// Maximal cyclic runs of consecutive indices in a sorted index set over `0..m`.
pub(crate) fn cyclic_runs(sorted: &[usize], m: usize) -> Vec<(usize, usize)> {
    if sorted.is_empty() {
        return Vec::new();
    }
    if sorted.len() == m {
        return vec![(0, m - 1)];
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &k in sorted {
        match runs.last_mut() {
            Some(r) if r.1 + 1 == k => r.1 = k,
            _ => runs.push((k, k)),
        }
    }
    if runs.len() > 1 && runs[0].0 == 0 && runs[runs.len() - 1].1 == m - 1 {
        let last = runs.pop().unwrap();
        runs[0].0 = last.0;
    }
    runs.sort_by_key(|r| r.0);
    runs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_wrap_around() {
        assert_eq!(cyclic_runs(&[0, 1, 4, 5, 9], 10), vec![(4, 5), (9, 1)]);
        assert_eq!(cyclic_runs(&[2, 3, 4], 10), vec![(2, 4)]);
        assert_eq!(cyclic_runs(&[0, 1, 2], 3), vec![(0, 2)]);
        assert!(cyclic_runs(&[], 3).is_empty());
    }

    #[test]
    fn grid_matches_brute_force() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|k| {
                let t = k as f64 / 40.0 * std::f64::consts::TAU;
                vec![t.cos(), (2.0 * t).sin()]
            })
            .collect();
        let c = LoopImmersion::from_points(2, &pts).unwrap();
        let grid = PointGrid::new(&c, 0.1);
        let sgrid = SegmentGrid::new(&c, 0.1);
        for q in [[0.0, 0.0], [0.5, 0.3], [1.0, 0.0]] {
            let brute: Vec<usize> = (0..40).filter(|&k| dist2(c.point(k), &q) <= 0.09).collect();
            assert_eq!(grid.within(&q, 0.3), brute);
            let seg_brute: Vec<usize> = (0..40)
                .filter(|&k| project_to_segment(&q, c.point(k), c.point((k + 1) % 40)).1 <= 0.09)
                .collect();
            let got: Vec<usize> = sgrid.segments_within(&q, 0.3).iter().map(|s| s.0).collect();
            assert_eq!(got, seg_brute);
        }
    }
}
