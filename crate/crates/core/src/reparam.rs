//! Piecewise-linear circle diffeomorphisms.
//!
//! A [`ReparamMap`] stores the lift `F: R → R` of a map `f: S¹ → S¹` through one
//! period of knots `(t_i, F(t_i))`, with `t_0 ≤ t_i < t_0 + 1` and
//! `F(t + 1) = F(t) + degree`. Orientation-reversing maps (`degree = -1`) have
//! decreasing lifts.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReparamError {
    #[error("degree must be +1 or -1, got {0}")]
    Degree(i32),
    #[error("a reparametrization needs at least one knot")]
    Empty,
    #[error("knot parameters must be strictly increasing within one period (knot {0})")]
    KnotOrder(usize),
    #[error("lift is not strictly monotone at knot {0}")]
    NotMonotone(usize),
    #[error("non-finite knot {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReparamMap {
    knots: Vec<(f64, f64)>,
    degree: i32,
}

impl ReparamMap {
    pub fn new(knots: Vec<(f64, f64)>, degree: i32) -> Result<Self, ReparamError> {
        if degree != 1 && degree != -1 {
            return Err(ReparamError::Degree(degree));
        }
        if knots.is_empty() {
            return Err(ReparamError::Empty);
        }
        for (i, &(t, v)) in knots.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(ReparamError::NonFinite(i));
            }
        }
        let t0 = knots[0].0;
        let d = degree as f64;
        for i in 1..knots.len() {
            if knots[i].0 <= knots[i - 1].0 || knots[i].0 >= t0 + 1.0 {
                return Err(ReparamError::KnotOrder(i));
            }
            if (knots[i].1 - knots[i - 1].1) * d <= 0.0 {
                return Err(ReparamError::NotMonotone(i));
            }
        }
        let last = knots[knots.len() - 1].1;
        if (knots[0].1 + d - last) * d <= 0.0 {
            return Err(ReparamError::NotMonotone(0));
        }
        Ok(Self { knots, degree })
    }

    pub fn identity() -> Self {
        Self { knots: vec![(0.0, 0.0)], degree: 1 }
    }

    /// `t ↦ t + shift`.
    pub fn rotation(shift: f64) -> Self {
        Self { knots: vec![(0.0, shift)], degree: 1 }
    }

    /// `t ↦ center - t`.
    pub fn reflection(center: f64) -> Self {
        Self { knots: vec![(0.0, center)], degree: -1 }
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Segment index and lift shift for `t`.
    fn locate(&self, t: f64) -> (usize, f64) {
        let t0 = self.knots[0].0;
        let n = (t - t0).floor();
        let mut tt = t - n;
        if tt >= t0 + 1.0 {
            tt -= 1.0;
        }
        let idx = match self.knots.binary_search_by(|k| k.0.total_cmp(&tt)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        (idx, tt)
    }

    /// Knot `i` of the lift, with `i == len` the closing knot one period on.
    fn knot_ext(&self, i: usize) -> (f64, f64) {
        if i < self.knots.len() {
            self.knots[i]
        } else {
            let (t, v) = self.knots[0];
            (t + 1.0, v + self.degree as f64)
        }
    }

    /// The lift `F(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let (i, tt) = self.locate(t);
        let shift = (t - tt).round();
        let (ta, va) = self.knot_ext(i);
        let (tb, vb) = self.knot_ext(i + 1);
        let lambda = (tt - ta) / (tb - ta);
        va + lambda * (vb - va) + shift * self.degree as f64
    }

    /// `f(t)` reduced to `[0, 1)`.
    pub fn eval_mod(&self, t: f64) -> f64 {
        self.eval(t).rem_euclid(1.0)
    }

    /// Slope of the lift on the segment containing `t` (right derivative).
    pub fn slope(&self, t: f64) -> f64 {
        let (i, _) = self.locate(t);
        let (ta, va) = self.knot_ext(i);
        let (tb, vb) = self.knot_ext(i + 1);
        (vb - va) / (tb - ta)
    }

    pub fn inverse(&self) -> Self {
        let mut knots: Vec<(f64, f64)> = self.knots.iter().map(|&(t, v)| (v, t)).collect();
        if self.degree < 0 {
            knots.reverse();
        }
        Self::normalized(knots, self.degree)
    }

    /// Rotates a knot list so the first knot has the smallest parameter and all
    /// parameters lie in one period.
    fn normalized(mut knots: Vec<(f64, f64)>, degree: i32) -> Self {
        let t0 = knots[0].0;
        let d = degree as f64;
        for k in knots.iter_mut() {
            let n = (k.0 - t0).floor();
            k.0 -= n;
            k.1 -= n * d;
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        knots.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);
        Self { knots, degree }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ReparamMap) -> ReparamMap {
        let inv = other.inverse();
        let mut ts: Vec<f64> = other.knots.iter().map(|k| k.0).collect();
        for &(u, _) in &self.knots {
            ts.push(inv.eval(u));
        }
        let t0 = ts[0];
        let mut ts: Vec<f64> = ts.into_iter().map(|t| t0 + (t - t0).rem_euclid(1.0)).collect();
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        if ts.len() > 1 && ts[ts.len() - 1] - ts[0] > 1.0 - 1e-14 {
            ts.pop();
        }
        let knots = ts.into_iter().map(|t| (t, self.eval(other.eval(t)))).collect();
        ReparamMap { knots, degree: self.degree * other.degree }
    }

    /// The `n`-fold composite `self ∘ ... ∘ self`, identity for `n = 0`.
    pub fn power(&self, n: usize) -> ReparamMap {
        let mut acc = ReparamMap::identity();
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Sup over the circle of the circular distance between `self(t)` and `other(t)`.
    /// Both lifts are linear between the union of their knots, so the sup is attained there
    /// (up to the kink of the circular distance, checked at segment midpoints as well).
    pub fn sup_distance(&self, other: &ReparamMap) -> f64 {
        let mut ts: Vec<f64> = self.knots.iter().chain(other.knots.iter()).map(|k| k.0.rem_euclid(1.0)).collect();
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup();
        let n = ts.len();
        let mut best: f64 = 0.0;
        for i in 0..n {
            let a = ts[i];
            let b = if i + 1 < n { ts[i + 1] } else { ts[0] + 1.0 };
            for t in [a, 0.5 * (a + b)] {
                let d = self.eval(t) - other.eval(t);
                best = best.max((d - d.round()).abs());
            }
        }
        best
    }
}
