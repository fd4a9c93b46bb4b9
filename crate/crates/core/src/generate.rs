//! Seeded generators for the named curve families and for synthetic reparametrizations.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveError, LoopImmersion};
use crate::reparam::ReparamMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveKind {
    Circle,
    Ellipse { a: f64, b: f64 },
    /// The unit circle traversed `k` times.
    KFoldCircle { k: usize },
    /// Two circles tangent at the origin, above and below the x-axis. Each letter of
    /// `word` is one pass: `A` around the upper circle, `B` around the lower one.
    FigureEight { word: String, radius_upper: f64, radius_lower: f64 },
    /// Polar rose `r = cos(nθ)`; odd `petals` use `n = petals` on `[0, π)`, even ones
    /// `n = petals / 2` on `[0, 2π)`.
    Rose { petals: usize },
    /// Unit circle plus a seeded trigonometric perturbation with frequencies `-4..=4`.
    Fourier { seed: u64 },
    /// Loop winding `q` times around a torus core of radius 2.
    TorusCoil { q: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGeneratorSpec {
    pub kind: CurveKind,
    pub m: usize,
    /// Sample `k` sits at parameter `(k + phase) / m`.
    #[serde(default)]
    pub phase: f64,
}

impl CurveGeneratorSpec {
    pub fn new(kind: CurveKind, m: usize) -> Self {
        Self { kind, m, phase: 0.0 }
    }

    pub fn circle(m: usize) -> Self {
        Self::new(CurveKind::Circle, m)
    }

    pub fn ellipse(a: f64, b: f64, m: usize) -> Self {
        Self::new(CurveKind::Ellipse { a, b }, m)
    }

    pub fn k_fold_circle(k: usize, m: usize) -> Self {
        Self::new(CurveKind::KFoldCircle { k }, m)
    }

    /// `p` passes around the upper unit circle followed by `q` around the lower one.
    pub fn figure_eight(p: usize, q: usize, m: usize) -> Self {
        Self::figure_eight_word(&format!("{}{}", "A".repeat(p), "B".repeat(q)), m)
    }

    pub fn figure_eight_word(word: &str, m: usize) -> Self {
        Self::new(CurveKind::FigureEight { word: word.to_string(), radius_upper: 1.0, radius_lower: 1.0 }, m)
    }

    pub fn rose(petals: usize, m: usize) -> Self {
        Self::new(CurveKind::Rose { petals }, m)
    }

    pub fn fourier(seed: u64, m: usize) -> Self {
        Self::new(CurveKind::Fourier { seed }, m)
    }

    pub fn torus_coil(q: usize, m: usize) -> Self {
        Self::new(CurveKind::TorusCoil { q }, m)
    }

    pub fn with_radii(mut self, upper: f64, lower: f64) -> Self {
        if let CurveKind::FigureEight { radius_upper, radius_lower, .. } = &mut self.kind {
            *radius_upper = upper;
            *radius_lower = lower;
        }
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            CurveKind::TorusCoil { .. } => 3,
            _ => 2,
        }
    }

    /// The continuous loop this spec samples.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let t = t.rem_euclid(1.0);
        match &self.kind {
            CurveKind::Circle => vec![(TAU * t).cos(), (TAU * t).sin()],
            CurveKind::Ellipse { a, b } => vec![a * (TAU * t).cos(), b * (TAU * t).sin()],
            CurveKind::KFoldCircle { k } => {
                let th = TAU * *k as f64 * t;
                vec![th.cos(), th.sin()]
            }
            CurveKind::FigureEight { word, radius_upper, radius_lower } => {
                let counts = eight_pass_counts(word, *radius_upper, *radius_lower, self.m);
                let x = t * self.m as f64;
                let mut acc = 0.0;
                for (letter, n) in word.chars().zip(&counts) {
                    let n = *n as f64;
                    if x < acc + n {
                        return eight_point(letter, TAU * (x - acc) / n, *radius_upper, *radius_lower);
                    }
                    acc += n;
                }
                vec![0.0, 0.0]
            }
            CurveKind::Rose { petals } => {
                let (n, span) = if petals % 2 == 1 { (*petals as f64, 0.5) } else { (*petals as f64 / 2.0, 1.0) };
                let th = TAU * span * t;
                let r = (n * th).cos();
                vec![r * th.cos(), r * th.sin()]
            }
            CurveKind::Fourier { seed } => {
                let coeffs = fourier_coefficients(*seed);
                let (mut x, mut y) = ((TAU * t).cos(), (TAU * t).sin());
                for (j, (re, im)) in coeffs {
                    let th = TAU * j as f64 * t;
                    x += re * th.cos() - im * th.sin();
                    y += re * th.sin() + im * th.cos();
                }
                vec![x, y]
            }
            CurveKind::TorusCoil { q } => {
                let th = TAU * t;
                let ph = TAU * *q as f64 * t;
                let r = 2.0 + 0.5 * ph.cos();
                vec![r * th.cos(), r * th.sin(), 0.5 * ph.sin()]
            }
        }
    }

    pub fn generate(&self) -> Result<LoopImmersion, CurveError> {
        let m = self.m;
        let pts: Vec<Vec<f64>> = match &self.kind {
            // per-pass integer indexing keeps repeated passes bitwise identical
            CurveKind::FigureEight { word, radius_upper, radius_lower } => {
                let counts = eight_pass_counts(word, *radius_upper, *radius_lower, m);
                word.chars()
                    .zip(&counts)
                    .flat_map(|(letter, &n)| {
                        (0..n).map(move |j| {
                            let theta = TAU * (j as f64 + self.phase) / n as f64;
                            eight_point(letter, theta, *radius_upper, *radius_lower)
                        })
                    })
                    .collect()
            }
            _ => (0..m).map(|k| self.eval((k as f64 + self.phase) / m as f64)).collect(),
        };
        LoopImmersion::try_new(self.ambient_dim(), &pts)
    }
}

fn eight_point(letter: char, theta: f64, ru: f64, rl: f64) -> Vec<f64> {
    if letter == 'B' || letter == 'b' {
        vec![rl * theta.sin(), -rl * (1.0 - theta.cos())]
    } else {
        vec![ru * theta.sin(), ru * (1.0 - theta.cos())]
    }
}

/// Samples per pass, roughly proportional to the pass radius. Passes around the same
/// circle get equal counts whenever the total allows it, so repeated passes sample
/// identical points.
fn eight_pass_counts(word: &str, ru: f64, rl: f64, m: usize) -> Vec<usize> {
    let is_b = |c: char| c == 'B' || c == 'b';
    let p = word.chars().filter(|c| !is_b(*c)).count();
    let q = word.len() - p;
    let uniform = |n_a: usize, n_b: usize| word.chars().map(|c| if is_b(c) { n_b } else { n_a }).collect();
    if q == 0 || p == 0 {
        let n = word.len().max(1);
        if m.is_multiple_of(n) {
            return uniform(m / n, m / n);
        }
    } else {
        let ideal = m as f64 * ru / (p as f64 * ru + q as f64 * rl);
        let base = ideal.round() as i64;
        let mut best: Option<(i64, usize, usize)> = None;
        for d in -(q as i64)..=(q as i64) {
            let n_a = base + d;
            if n_a < 1 {
                continue;
            }
            let rest = m as i64 - p as i64 * n_a;
            if rest > 0 && rest % q as i64 == 0 {
                let cand = (d.abs(), n_a as usize, (rest / q as i64) as usize);
                if best.is_none_or(|b| cand.0 < b.0) {
                    best = Some(cand);
                }
            }
        }
        if let Some((_, n_a, n_b)) = best {
            return uniform(n_a, n_b);
        }
    }
    // largest-remainder apportionment
    let weights: Vec<f64> = word.chars().map(|c| if is_b(c) { rl } else { ru }).collect();
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| m as f64 * w / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let missing = m - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Coefficients `c_j` for `j ∈ {-4, ..., 4} \ {0, 1}` with `Σ |j| |c_j| ≤ 0.8`, which keeps the
/// velocity bounded away from zero.
fn fourier_coefficients(seed: u64) -> Vec<(i32, (f64, f64))> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = rng.gen_range(0.2..0.8);
    let raw: Vec<(i32, f64, f64)> = [-4, -3, -2, -1, 2, 3, 4]
        .into_iter()
        .map(|j| (j, rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU)))
        .collect();
    let weight: f64 = raw.iter().map(|(j, r, _)| j.abs() as f64 * r).sum();
    raw.into_iter()
        .map(|(j, r, phi)| {
            let r = r * budget / weight;
            (j, (r * phi.cos(), r * phi.sin()))
        })
        .collect()
}

/// A smooth orientation-preserving circle diffeomorphism
/// `t ↦ t + offset + Σ a_j sin(2π j t + φ_j) / (2π j)` with `Σ |a_j| ≤ 3/4`, so its
/// slope stays in `[1/4, 7/4]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothReparam {
    pub offset: f64,
    /// `(j, a_j, φ_j)`.
    pub terms: Vec<(u32, f64, f64)>,
}

impl SmoothReparam {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offset = rng.gen_range(0.0..1.0);
        let raw: Vec<(u32, f64, f64)> =
            (1..=3).map(|j| (j, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU))).collect();
        let total: f64 = raw.iter().map(|t| t.1.abs()).sum();
        let budget = rng.gen_range(0.3..0.75);
        let terms = raw.into_iter().map(|(j, a, phi)| (j, a * budget / total, phi)).collect();
        Self { offset, terms }
    }

    /// The lift.
    pub fn eval(&self, t: f64) -> f64 {
        t + self.offset + self.terms.iter().map(|&(j, a, phi)| a * (TAU * j as f64 * t + phi).sin() / (TAU * j as f64)).sum::<f64>()
    }

    pub fn slope(&self, t: f64) -> f64 {
        1.0 + self.terms.iter().map(|&(j, a, phi)| a * (TAU * j as f64 * t + phi).cos()).sum::<f64>()
    }

    /// Inverse lift by bisection.
    pub fn inverse_eval(&self, u: f64) -> f64 {
        let budget: f64 = self.terms.iter().map(|t| t.1.abs()).sum::<f64>() + 1e-12;
        let mut lo = u - self.offset - budget;
        let mut hi = u - self.offset + budget;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Piecewise-linear interpolant with `knots` uniform knots.
    pub fn to_map(&self, knots: usize) -> ReparamMap {
        let ks = (0..knots).map(|i| {
            let t = i as f64 / knots as f64;
            (t, self.eval(t))
        });
        ReparamMap::new(ks.collect(), 1).expect("slope bounded below keeps the lift monotone")
    }

    /// Piecewise-linear interpolant of the inverse with `knots` uniform knots.
    pub fn inverse_map(&self, knots: usize) -> ReparamMap {
        let ks = (0..knots).map(|i| {
            let u = i as f64 / knots as f64;
            (u, self.inverse_eval(u))
        });
        ReparamMap::new(ks.collect(), 1).expect("inverse of a monotone lift is monotone")
    }
}
