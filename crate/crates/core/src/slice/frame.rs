use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SliceError;
use crate::cover::ArcCover;
use crate::curve::LoopImmersion;
use crate::linalg::{dist, dist2, dot, norm, sub};

/// Orthonormal frames of the normal spaces along a loop.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalBundleFrame {
    base: LoopImmersion,
    unit_tangents: Vec<f64>,
    /// `m × (n−1) × n`.
    frames: Vec<f64>,
    /// Trapezoidal arclength weight of each sample.
    weights: Vec<f64>,
    seam: Option<usize>,
}

impl NormalBundleFrame {
    pub fn base(&self) -> &LoopImmersion {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Fibre dimension `n − 1`.
    pub fn rank(&self) -> usize {
        self.base.dim() - 1
    }

    /// Sample before which consecutive frames may fail to align (holonomy of the
    /// transport around the loop). Planar loops have no seam.
    pub fn seam(&self) -> Option<usize> {
        self.seam
    }

    pub fn unit_tangent(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.unit_tangents[k * n..(k + 1) * n]
    }

    /// Frame vector `c` at sample `k`.
    pub fn vector(&self, k: usize, c: usize) -> &[f64] {
        let n = self.dim();
        let r = self.rank();
        let off = (k * r + c) * n;
        &self.frames[off..off + n]
    }

    /// `(e_{k−1} + e_k) / 2`.
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Ambient vector with frame coefficients `coeffs` at sample `k`.
    pub fn to_ambient(&self, k: usize, coeffs: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for (c, &a) in coeffs.iter().enumerate() {
            for (x, e) in v.iter_mut().zip(self.vector(k, c)) {
                *x += a * e;
            }
        }
        v
    }

    /// Frame coefficients at sample `k` of the normal part of `v`.
    pub fn to_coeffs(&self, k: usize, v: &[f64]) -> Vec<f64> {
        (0..self.rank()).map(|c| dot(self.vector(k, c), v)).collect()
    }

    pub(crate) fn check_section(&self, s: &NormalSection) -> Result<(), SliceError> {
        if s.len() != self.len() || s.rank() != self.rank() {
            return Err(SliceError::Shape {
                found: s.len(),
                found_rank: s.rank(),
                expected: self.len(),
                expected_rank: self.rank(),
            });
        }
        Ok(())
    }
}

fn orthonormalize_against(v: &mut [f64], basis: &[&[f64]]) -> f64 {
    for b in basis {
        let p = dot(v, b);
        for (x, y) in v.iter_mut().zip(b.iter()) {
            *x -= p * y;
        }
    }
    let len = norm(v);
    if len > 0.0 {
        v.iter_mut().for_each(|x| *x /= len);
    }
    len
}

/// Planar loops use the tangent rotated by `+π/2`. In higher dimension the first
/// frame is completed from coordinate axes and carried along by projection onto the
/// next normal space followed by Gram–Schmidt.
pub fn normal_frame(base: &LoopImmersion) -> NormalBundleFrame {
    let m = base.len();
    let n = base.dim();
    let r = n - 1;
    let tf = base.tangent_frame();
    let unit_tangents: Vec<f64> = tf.unit_tangents.iter().flatten().copied().collect();
    let mut frames = vec![0.0; m * r * n];
    let mut seam = None;
    if n == 2 {
        for k in 0..m {
            let t = &tf.unit_tangents[k];
            frames[2 * k] = -t[1];
            frames[2 * k + 1] = t[0];
        }
    } else {
        let t0 = &tf.unit_tangents[0];
        let mut axes: Vec<usize> = (0..n).collect();
        axes.sort_by(|&a, &b| t0[a].abs().total_cmp(&t0[b].abs()).then(a.cmp(&b)));
        let mut first: Vec<Vec<f64>> = Vec::with_capacity(r);
        for &a in &axes {
            if first.len() == r {
                break;
            }
            let mut v = vec![0.0; n];
            v[a] = 1.0;
            let mut basis: Vec<&[f64]> = vec![t0.as_slice()];
            basis.extend(first.iter().map(|x| x.as_slice()));
            if orthonormalize_against(&mut v, &basis) > 1e-6 {
                first.push(v);
            }
        }
        let transport = |prev: &[Vec<f64>], t: &[f64]| -> Vec<Vec<f64>> {
            let mut out: Vec<Vec<f64>> = Vec::with_capacity(r);
            for v in prev {
                let mut w = v.clone();
                let mut basis: Vec<&[f64]> = vec![t];
                basis.extend(out.iter().map(|x| x.as_slice()));
                orthonormalize_against(&mut w, &basis);
                out.push(w);
            }
            out
        };
        let mut current = first;
        for k in 0..m {
            if k > 0 {
                current = transport(&current, &tf.unit_tangents[k]);
            }
            for (c, v) in current.iter().enumerate() {
                frames[(k * r + c) * n..(k * r + c + 1) * n].copy_from_slice(v);
            }
        }
        let closing = transport(&current, &tf.unit_tangents[0]);
        let aligned = closing.iter().enumerate().all(|(c, v)| dot(v, &frames[c * n..(c + 1) * n]) > 0.0);
        if !aligned {
            seam = Some(0);
        }
    }
    let e = &tf.edge_lengths;
    let weights = (0..m).map(|k| 0.5 * (e[(k + m - 1) % m] + e[k])).collect();
    NormalBundleFrame { base: base.clone(), unit_tangents, frames, weights, seam }
}

/// Coefficients of a normal field in a [`NormalBundleFrame`], `rank` per sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalSection {
    rank: usize,
    coeffs: Vec<f64>,
}

impl NormalSection {
    pub fn zeros(m: usize, rank: usize) -> Self {
        Self { rank, coeffs: vec![0.0; m * rank] }
    }

    /// `coeffs` is flat, `rank` entries per sample.
    pub fn from_flat(rank: usize, coeffs: Vec<f64>) -> Option<Self> {
        (rank > 0 && coeffs.len().is_multiple_of(rank) && coeffs.iter().all(|x| x.is_finite())).then_some(Self { rank, coeffs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let rank = rows.first()?.len();
        if rows.iter().any(|r| r.len() != rank) {
            return None;
        }
        Self::from_flat(rank, rows.iter().flatten().copied().collect())
    }

    pub fn from_fn(m: usize, rank: usize, mut f: impl FnMut(usize, &mut [f64])) -> Self {
        let mut s = Self::zeros(m, rank);
        for k in 0..m {
            f(k, s.coeff_mut(k));
        }
        s
    }

    /// Smooth field: every component is a sum of `modes` seeded Fourier modes,
    /// scaled so that the sup norm equals `amplitude`.
    pub fn smooth_random(m: usize, rank: usize, seed: u64, modes: usize, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<(usize, usize, f64, f64)> = (0..rank)
            .flat_map(|c| (1..=modes).map(move |j| (c, j)))
            .map(|(c, j)| (c, j, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let mut s = Self::from_fn(m, rank, |k, out| {
            let t = std::f64::consts::TAU * k as f64 / m as f64;
            for &(c, j, a, phi) in &terms {
                out[c] += a * (j as f64 * t + phi).cos();
            }
        });
        let sup = s.sup_norm();
        if sup > 0.0 {
            s.scale(amplitude / sup);
        }
        s
    }

    /// Independent uniform coefficients in `[-amplitude, amplitude]`.
    pub fn rough_random(m: usize, rank: usize, seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { rank, coeffs: (0..m * rank).map(|_| rng.gen_range(-amplitude..amplitude)).collect() }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len() / self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn coeff(&self, k: usize) -> &[f64] {
        &self.coeffs[k * self.rank..(k + 1) * self.rank]
    }

    pub fn coeff_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.coeffs[k * self.rank..(k + 1) * self.rank]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.coeffs.chunks_exact(self.rank).map(|c| c.to_vec()).collect()
    }

    /// `max_k |s(t_k)|`; frames are orthonormal, so this is the ambient sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.chunks_exact(self.rank).map(norm).fold(0.0, f64::max)
    }

    /// Largest coefficient difference.
    pub fn max_abs_diff(&self, other: &NormalSection) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|x| *x *= a);
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &NormalSection) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    /// `(1 − λ) self + λ other`.
    pub fn lerp(&self, other: &NormalSection, lambda: f64) -> NormalSection {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + lambda * (b - a)).collect();
        NormalSection { rank: self.rank, coeffs }
    }
}

/// Per-sample radius below which the tube map is injective on the cover arcs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubeProfile {
    pub rho: Vec<f64>,
}

impl TubeProfile {
    pub fn min(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn circumradius(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u = sub(a, b);
    let v = sub(c, b);
    let uu = dot(&u, &u);
    let proj = dot(&u, &v) / uu;
    // component of v orthogonal to u; twice the triangle area is |u|·|w|
    let w: Vec<f64> = v.iter().zip(&u).map(|(x, y)| x - proj * y).collect();
    let h = norm(&w);
    if h == 0.0 {
        f64::INFINITY
    } else {
        norm(&v) * dist(a, c) / (2.0 * h)
    }
}

/// `rho(k)` is the smaller of the circumradius of `p_{k−1}, p_k, p_{k+1}` and half the
/// distance from `p_k` to the non-local samples of the arcs containing `k`. Walking
/// away from `k` inside those arcs, a sample is local when it comes before the first
/// local maximum of the distance to `p_k` in either walking direction.
pub fn tube_profile(base: &LoopImmersion, cover: &ArcCover) -> Result<TubeProfile, SliceError> {
    let m = base.len();
    let floor = 1e-6 * base.diameter();
    let mut rho = Vec::with_capacity(m);
    for k in 0..m {
        let p = base.point(k);
        let (mut ahead, mut behind) = (0usize, 0usize);
        for arc in &cover.arcs {
            if let Some(off) = arc.offset_of(k) {
                ahead = ahead.max(arc.len - 1 - off);
                behind = behind.max(off);
            }
        }
        let (ahead, behind) = (ahead.min(m - 1), behind.min(m - 1));
        let d2_at = |s: isize| dist2(p, base.point_cyclic(k as isize + s));
        // first step at which the distance decreases, or one past the reach
        let first_drop = |dir: isize, reach: usize| {
            let mut prev = 0.0;
            for s in 1..=reach {
                let d2 = d2_at(dir * s as isize);
                if d2 < prev {
                    return s;
                }
                prev = d2;
            }
            reach + 1
        };
        let fwd = first_drop(1, ahead);
        let bwd = first_drop(-1, behind);
        let mut nearest2 = f64::INFINITY;
        for s in fwd..=ahead {
            if m - s >= bwd {
                nearest2 = nearest2.min(d2_at(s as isize));
            }
        }
        for s in bwd..=behind {
            if m - s >= fwd {
                nearest2 = nearest2.min(d2_at(-(s as isize)));
            }
        }
        let r = (0.5 * nearest2.sqrt()).min(circumradius(base.point_cyclic(k as isize - 1), p, base.point((k + 1) % m)));
        if r < floor {
            return Err(SliceError::DegenerateTube { sample: k, rho: r, floor });
        }
        rho.push(r);
    }
    Ok(TubeProfile { rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::build_arc_cover;
    use crate::generate::CurveGeneratorSpec;

    #[test]
    fn planar_circle_normals_point_inward() {
        let c = CurveGeneratorSpec::circle(64).generate().unwrap();
        let f = normal_frame(&c);
        assert_eq!(f.seam(), None);
        for k in 0..64 {
            let v = f.vector(k, 0);
            let p = c.point(k);
            assert!((dot(v, p) + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_tube_radius_is_one() {
        let m = 100;
        let c = CurveGeneratorSpec::circle(m).generate().unwrap();
        let cover = build_arc_cover(&c, 0.01).unwrap();
        let t = tube_profile(&c, &cover).unwrap();
        for r in &t.rho {
            assert!((r - 1.0).abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn smooth_random_has_requested_norm() {
        let s = NormalSection::smooth_random(100, 2, 3, 4, 0.25);
        assert!((s.sup_norm() - 0.25).abs() < 1e-15);
    }
}
