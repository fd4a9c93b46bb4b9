//! Discrete immersed loops: sampled closed curves `S¹ = R/Z → Rⁿ`.
//!
//! Sample `k` of an `m`-sample loop is the value at parameter `k / m`. The loop
//! closes by index arithmetic; there is no duplicated closing point. Between
//! samples the curve is the straight chord, so every loop is also a
//! piecewise-linear map of the circle.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{dist, dist2, norm};
use crate::reparam::ReparamMap;

/// Minimum number of samples for a loop to count as a discrete immersion.
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CurveError {
    #[error("ambient dimension must be at least 2, got {0}")]
    AmbientDimension(usize),
    #[error("sample {index} has {found} coordinates, expected {expected}")]
    Shape { index: usize, found: usize, expected: usize },
    #[error("sample {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("invalid curve: {0}")]
    Invalid(ValidationReport),
    #[error("sample count {0} is below the floor of {MIN_SAMPLES}")]
    TooFewSamples(usize),
    #[error("ambient dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("resampling did not converge")]
    ResampleFailed,
}

/// Flat Euclidean `Rⁿ`. The exponential map is vector addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientSpace {
    dim: usize,
}

impl AmbientSpace {
    pub fn new(dim: usize) -> Result<Self, CurveError> {
        if dim < 2 {
            return Err(CurveError::AmbientDimension(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `exp_x(v) = x + v`.
    pub fn exp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        x.iter().zip(v).map(|(a, b)| a + b).collect()
    }
}

/// One violated invariant of a discrete immersion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TooFewSamples { count: usize },
    ZeroLengthEdge { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewSamples { count } => write!(f, "m < {MIN_SAMPLES} (m = {count})"),
            Violation::ZeroLengthEdge { index } => write!(f, "zero-length edge at index {index}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Per-sample velocity data of a loop.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    /// Central-difference velocities with respect to the loop parameter.
    pub tangents: Vec<Vec<f64>>,
    pub unit_tangents: Vec<Vec<f64>>,
    /// `edge_lengths[k] = |p_{k+1} - p_k|`.
    pub edge_lengths: Vec<f64>,
}

/// A sampled closed curve in `Rⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CurveFile", try_from = "CurveFile")]
pub struct LoopImmersion {
    ambient: AmbientSpace,
    coords: Vec<f64>,
}

impl LoopImmersion {
    /// Builds a loop from its samples. Only shape and finiteness are checked here;
    /// use [`LoopImmersion::validate`] or [`LoopImmersion::try_new`] for the immersion conditions.
    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self, CurveError> {
        let ambient = AmbientSpace::new(dim)?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(CurveError::Shape { index, found: p.len(), expected: dim });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(CurveError::NonFinite(index));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { ambient, coords })
    }

    /// Flat coordinate buffer of length `m * dim`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self, CurveError> {
        let ambient = AmbientSpace::new(dim)?;
        if !coords.len().is_multiple_of(dim) {
            return Err(CurveError::Shape { index: coords.len() / dim, found: coords.len() % dim, expected: dim });
        }
        if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
            return Err(CurveError::NonFinite(i / dim));
        }
        Ok(Self { ambient, coords })
    }

    /// Builds and validates.
    pub fn try_new(dim: usize, points: &[Vec<f64>]) -> Result<Self, CurveError> {
        let c = Self::from_points(dim, points)?;
        c.ensure_valid()?;
        Ok(c)
    }

    pub fn ambient(&self) -> AmbientSpace {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim
    }

    /// Sample count `m`.
    pub fn len(&self) -> usize {
        self.coords.len() / self.ambient.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, k: usize) -> &[f64] {
        let n = self.ambient.dim;
        &self.coords[k * n..(k + 1) * n]
    }

    /// Sample at a cyclic (possibly negative) index.
    #[inline]
    pub fn point_cyclic(&self, k: isize) -> &[f64] {
        self.point(k.rem_euclid(self.len() as isize) as usize)
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.ambient.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn validate(&self) -> ValidationReport {
        let m = self.len();
        let mut violations = Vec::new();
        if m < MIN_SAMPLES {
            violations.push(Violation::TooFewSamples { count: m });
        }
        for k in 0..m {
            if dist2(self.point(k), self.point((k + 1) % m)) == 0.0 {
                violations.push(Violation::ZeroLengthEdge { index: k });
            }
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<(), CurveError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(CurveError::Invalid(report))
        }
    }

    /// Piecewise-linear evaluation at parameter `t` (taken mod 1).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let m = self.len();
        let x = t.rem_euclid(1.0) * m as f64;
        let mut k = x.floor() as usize;
        let mut lambda = x - k as f64;
        if k >= m {
            k = 0;
            lambda = 0.0;
        }
        let a = self.point(k);
        let b = self.point((k + 1) % m);
        for i in 0..out.len() {
            out[i] = a[i] + lambda * (b[i] - a[i]);
        }
    }

    /// Evaluation at a real sample index (index `x` means parameter `x / m`).
    pub fn eval_index(&self, x: f64) -> Vec<f64> {
        self.eval(x / self.len() as f64)
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        let m = self.len();
        (0..m).map(|k| dist(self.point(k), self.point((k + 1) % m))).collect()
    }

    pub fn length(&self) -> f64 {
        self.edge_lengths().iter().sum()
    }

    /// Largest distance between two samples.
    pub fn diameter(&self) -> f64 {
        let m = self.len();
        let mut best: f64 = 0.0;
        for a in 0..m {
            let pa = self.point(a);
            for b in a + 1..m {
                best = best.max(dist2(pa, self.point(b)));
            }
        }
        best.sqrt()
    }

    pub fn tangent_frame(&self) -> TangentFrame {
        let m = self.len();
        let half_m = m as f64 / 2.0;
        let mut tangents = Vec::with_capacity(m);
        let mut unit_tangents = Vec::with_capacity(m);
        for k in 0..m {
            let next = self.point((k + 1) % m);
            let prev = self.point((k + m - 1) % m);
            let v: Vec<f64> = next.iter().zip(prev).map(|(a, b)| (a - b) * half_m).collect();
            let len = norm(&v);
            unit_tangents.push(v.iter().map(|x| x / len).collect());
            tangents.push(v);
        }
        TangentFrame { tangents, unit_tangents, edge_lengths: self.edge_lengths() }
    }

    /// Inserts `factor - 1` evenly spaced points on every edge. The result traces the
    /// same piecewise-linear map of the circle.
    pub fn refine(&self, factor: usize) -> LoopImmersion {
        let factor = factor.max(1);
        let m = self.len();
        let mut coords = Vec::with_capacity(self.coords.len() * factor);
        for k in 0..m {
            let a = self.point(k);
            let b = self.point((k + 1) % m);
            for j in 0..factor {
                let lambda = j as f64 / factor as f64;
                coords.extend(a.iter().zip(b).map(|(x, y)| x + lambda * (y - x)));
            }
        }
        LoopImmersion { ambient: self.ambient, coords }
    }

    /// The loop `t ↦ self(f(t))` sampled at `m_out` uniform parameters.
    pub fn precompose(&self, f: &ReparamMap, m_out: usize) -> LoopImmersion {
        let mut coords = vec![0.0; m_out * self.dim()];
        for (l, chunk) in coords.chunks_exact_mut(self.dim()).enumerate() {
            self.eval_into(f.eval(l as f64 / m_out as f64), chunk);
        }
        LoopImmersion { ambient: self.ambient, coords }
    }

    /// The loop traversed backwards, starting at the same sample.
    pub fn reversed(&self) -> LoopImmersion {
        let m = self.len();
        let mut coords = Vec::with_capacity(self.coords.len());
        for k in 0..m {
            coords.extend_from_slice(self.point((m - k) % m));
        }
        LoopImmersion { ambient: self.ambient, coords }
    }

    /// The loop with its start moved forward by `shift` samples.
    pub fn shifted(&self, shift: usize) -> LoopImmersion {
        let m = self.len();
        let mut coords = Vec::with_capacity(self.coords.len());
        for k in 0..m {
            coords.extend_from_slice(self.point((k + shift) % m));
        }
        LoopImmersion { ambient: self.ambient, coords }
    }

    /// Resamples to `m_out` points that are equally spaced along the trace.
    ///
    /// The output is the equilateral polygon inscribed in the trace that starts at
    /// sample 0: each vertex is the first point further along the trace at chord
    /// distance `c` from its predecessor, and `c` is solved so that the polygon closes.
    /// Resampling an equilateral polygon returns it unchanged.
    pub fn resample_arclength(&self, m_out: usize) -> Result<LoopImmersion, CurveError> {
        Ok(self.resample_arclength_with_map(m_out)?.0)
    }

    /// As [`resample_arclength`](Self::resample_arclength), also returning the map
    /// `σ` from the new parameter to the old one, so that `new ≈ self ∘ σ`.
    pub fn resample_arclength_with_map(&self, m_out: usize) -> Result<(LoopImmersion, ReparamMap), CurveError> {
        self.ensure_valid()?;
        if m_out < MIN_SAMPLES {
            return Err(CurveError::TooFewSamples(m_out));
        }
        let total = self.length();
        let march = ChordMarch::new(self);
        let target = self.len() as f64;
        let mut lo = 0.0;
        // chords are never longer than the arcs they span; the margin absorbs rounding
        let mut hi = total / m_out as f64 * (1.0 + 1e-9);
        // closure(c) = trace index reached after m_out chord steps, nondecreasing in c
        if march.run(hi, m_out, None) < target {
            return Err(CurveError::ResampleFailed);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if march.run(mid, m_out, None) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut positions = Vec::with_capacity(m_out);
        march.run(hi, m_out, Some(&mut positions));
        let mut coords = Vec::with_capacity(m_out * self.dim());
        for &x in &positions {
            coords.extend(self.eval_index(x));
        }
        let m_in = self.len() as f64;
        let knots: Vec<(f64, f64)> = positions
            .iter()
            .enumerate()
            .map(|(j, &x)| (j as f64 / m_out as f64, x / m_in))
            .collect();
        let sigma = ReparamMap::new(knots, 1).map_err(|_| CurveError::ResampleFailed)?;
        Ok((LoopImmersion { ambient: self.ambient, coords }, sigma))
    }
}

/// Marches along the trace of a loop in steps of fixed chord length.
struct ChordMarch<'a> {
    curve: &'a LoopImmersion,
}

impl<'a> ChordMarch<'a> {
    fn new(curve: &'a LoopImmersion) -> Self {
        Self { curve }
    }

    /// Returns the trace position (real sample index, unwrapped) after `steps` steps.
    fn run(&self, chord: f64, steps: usize, mut record: Option<&mut Vec<f64>>) -> f64 {
        let m = self.curve.len();
        let mut pos = 0.0_f64;
        for _ in 0..steps {
            if let Some(r) = record.as_deref_mut() {
                r.push(pos);
            }
            pos = self.next_position(pos, chord, m);
        }
        pos
    }

    /// First trace position after `pos` at chord distance `chord` from the point at `pos`.
    fn next_position(&self, pos: f64, chord: f64, m: usize) -> f64 {
        let c = self.curve;
        let q = c.eval_index(pos);
        let c2 = chord * chord;
        let first = pos.floor() as usize;
        let mut start = pos - first as f64;
        // Bounded by one full turn plus one edge.
        for k in first..first + m + 2 {
            let a = c.point(k % m);
            let b = c.point((k + 1) % m);
            // |a + mu (b - a) - q|^2 = c^2
            let mut aa = 0.0;
            let mut bb = 0.0;
            let mut cc = -c2;
            for i in 0..q.len() {
                let d = b[i] - a[i];
                let e = a[i] - q[i];
                aa += d * d;
                bb += 2.0 * d * e;
                cc += e * e;
            }
            let disc = bb * bb - 4.0 * aa * cc;
            if disc >= 0.0 {
                let root = (-bb + disc.sqrt()) / (2.0 * aa);
                if root >= start && root <= 1.0 {
                    return k as f64 + root;
                }
            }
            start = 0.0;
        }
        // chord longer than any reachable distance: park at the end of the turn
        pos + m as f64
    }
}

/// JSON representation of a loop: `{"ambient_dim": n, "samples": [[x, y, ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub ambient_dim: usize,
    pub samples: Vec<Vec<f64>>,
}

impl From<&LoopImmersion> for CurveFile {
    fn from(c: &LoopImmersion) -> Self {
        CurveFile { ambient_dim: c.dim(), samples: c.points().map(|p| p.to_vec()).collect() }
    }
}

impl From<LoopImmersion> for CurveFile {
    fn from(c: LoopImmersion) -> Self {
        CurveFile::from(&c)
    }
}

impl TryFrom<CurveFile> for LoopImmersion {
    type Error = CurveError;

    fn try_from(f: CurveFile) -> Result<Self, Self::Error> {
        LoopImmersion::from_points(f.ambient_dim, &f.samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn polygon(m: usize, f: impl Fn(f64) -> [f64; 2]) -> LoopImmersion {
        let pts: Vec<Vec<f64>> = (0..m).map(|k| f(k as f64 / m as f64).to_vec()).collect();
        LoopImmersion::from_points(2, &pts).unwrap()
    }

    fn circle(m: usize) -> LoopImmersion {
        polygon(m, |t| [(2.0 * PI * t).cos(), (2.0 * PI * t).sin()])
    }

    #[test]
    fn regular_polygon_is_valid() {
        assert!(circle(100).validate().is_valid());
    }

    #[test]
    fn repeated_point_is_reported() {
        let mut pts: Vec<Vec<f64>> = circle(20).points().map(|p| p.to_vec()).collect();
        pts[4] = pts[3].clone();
        let c = LoopImmersion::from_points(2, &pts).unwrap();
        let report = c.validate();
        assert_eq!(report.violations, vec![Violation::ZeroLengthEdge { index: 3 }]);
        assert_eq!(report.to_string(), "zero-length edge at index 3");
    }

    #[test]
    fn seven_samples_is_too_few() {
        let report = circle(7).validate();
        assert_eq!(report.violations, vec![Violation::TooFewSamples { count: 7 }]);
        assert_eq!(report.to_string(), "m < 8 (m = 7)");
    }

    #[test]
    fn non_finite_rejected() {
        let err = LoopImmersion::from_points(2, &[vec![0.0, f64::NAN]]).unwrap_err();
        assert_eq!(err, CurveError::NonFinite(0));
        assert_eq!(LoopImmersion::from_points(1, &[]).unwrap_err(), CurveError::AmbientDimension(1));
    }

    #[test]
    fn resampling_equispaced_polygon_is_identity() {
        let c = circle(100);
        let r = c.resample_arclength(100).unwrap();
        for k in 0..100 {
            assert!(dist(c.point(k), r.point(k)) < 1e-9);
        }
    }

    #[test]
    fn resample_rejects_small_counts() {
        assert_eq!(circle(100).resample_arclength(7).unwrap_err(), CurveError::TooFewSamples(7));
    }

    #[test]
    fn eval_interpolates_chords() {
        let c = circle(8);
        let mid = c.eval(1.0 / 16.0);
        let expect = lerp_mid(c.point(0), c.point(1));
        assert!(dist(&mid, &expect) < 1e-15);
        assert!(dist(&c.eval(1.0), c.point(0)) < 1e-15);
        assert!(dist(&c.eval(-0.125), c.point(7)) < 1e-15);
    }

    fn lerp_mid(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
    }

    #[test]
    fn refine_keeps_the_map() {
        let c = circle(16);
        let r = c.refine(3);
        assert_eq!(r.len(), 48);
        for j in 0..200 {
            let t = j as f64 / 200.0;
            assert!(dist(&c.eval(t), &r.eval(t)) < 1e-12);
        }
    }

    #[test]
    fn unit_tangents_are_normalized() {
        let tf = polygon(50, |t| [2.0 * (2.0 * PI * t).cos(), (2.0 * PI * t).sin()]).tangent_frame();
        for u in &tf.unit_tangents {
            assert!((norm(u) - 1.0).abs() < 1e-12);
        }
        assert!(tf.edge_lengths.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn resample_map_tracks_positions() {
        let c = polygon(60, |t| [2.0 * (2.0 * PI * t).cos(), (2.0 * PI * t).sin()]);
        let (r, sigma) = c.resample_arclength_with_map(45).unwrap();
        for j in 0..45 {
            let back = c.eval(sigma.eval(j as f64 / 45.0));
            assert!(dist(&back, r.point(j)) < 1e-12);
        }
    }
}
