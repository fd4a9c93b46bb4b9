use serde::Serialize;

use super::frame::{NormalBundleFrame, NormalSection, TubeProfile};
use super::SliceError;
use crate::curve::LoopImmersion;
use crate::linalg::{dist, dot, lerp, sub};
use crate::reparam::ReparamMap;

/// `k ↦ i(t_k) + s(t_k)`.
pub fn tau_push(frame: &NormalBundleFrame, tube: &TubeProfile, s: &NormalSection) -> Result<LoopImmersion, SliceError> {
    frame.check_section(s)?;
    let norm = s.sup_norm();
    let min_rho = tube.min();
    if norm >= min_rho {
        return Err(SliceError::TubeOverflow { norm, min_rho });
    }
    let base = frame.base();
    let n = base.dim();
    let mut coords = Vec::with_capacity(base.coords().len());
    for k in 0..base.len() {
        let v = frame.to_ambient(k, s.coeff(k));
        coords.extend(base.point(k).iter().zip(&v).map(|(p, x)| p + x));
    }
    let out = LoopImmersion::from_flat(n, coords)?;
    out.ensure_valid()?;
    Ok(out)
}

/// Slice coordinate and base map of a loop near the base.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartResult {
    /// `s` with `tau_push(i, s) ≈ j ∘ f0⁻¹`.
    pub section: NormalSection,
    /// Base map `f0`, from the parameter of `j` to the parameter of `i`.
    pub f0: ReparamMap,
}

/// Walks along `j` from real index `u` in direction `dir` to the first point on the
/// positive side of the normal hyperplane at base sample `k`. Gives up after
/// `max_len` arclength.
fn next_crossing(j: &LoopImmersion, frame: &NormalBundleFrame, k: usize, u: f64, dir: i8, max_len: f64) -> Option<f64> {
    let mj = j.len() as i64;
    let base_p = frame.base().point(k);
    let t = frame.unit_tangent(k);
    let side = |x: &[f64]| dot(t, x) - dot(t, base_p);
    let point = |i: i64| j.point(i.rem_euclid(mj) as usize);
    let d = dir as f64;
    let start = j.eval_index(u.rem_euclid(mj as f64));
    let mut g_prev = side(&start) * d;
    let mut pos = u;
    let mut prev = start;
    let mut travelled = 0.0;
    // at most one turn
    for _ in 0..=mj {
        let vertex = if dir > 0 { pos.floor() + 1.0 } else { pos.ceil() - 1.0 };
        let q = point(vertex as i64);
        let g = side(q) * d;
        if g_prev < 0.0 && g >= 0.0 {
            let lambda = g_prev / (g_prev - g);
            return Some(pos + lambda * (vertex - pos));
        }
        travelled += dist(&prev, q);
        if travelled > max_len {
            return None;
        }
        g_prev = g;
        prev = q.to_vec();
        pos = vertex;
    }
    None
}

/// Intersects `j` with the normal hyperplane of the base at every base sample.
///
/// The crossing for base sample `k` is the first one after the crossing for `k − 1`,
/// travelling along `j` in the direction fixed at sample 0. Each crossing must lie
/// within the tube radius. The section coefficient is the crossing point minus the
/// base sample, expressed in the normal frame; the base map sends the crossing
/// parameter of `j` to `t_k`.
pub fn chart_phi(frame: &NormalBundleFrame, tube: &TubeProfile, j: &LoopImmersion) -> Result<ChartResult, SliceError> {
    let base = frame.base();
    let m = base.len();
    let mj = j.len();
    if j.dim() != base.dim() {
        return Err(SliceError::Shape { found: mj, found_rank: j.dim() - 1, expected: m, expected_rank: frame.rank() });
    }
    j.ensure_valid()?;
    // first crossing: the point of j on the hyperplane at sample 0 nearest to the base sample
    let p0 = base.point(0);
    let t0 = frame.unit_tangent(0);
    let side = |x: &[f64]| dot(t0, x) - dot(t0, p0);
    let mut start: Option<(f64, f64, i8)> = None;
    for l in 0..mj {
        let (a, b) = (j.point(l), j.point((l + 1) % mj));
        let (ga, gb) = (side(a), side(b));
        if (ga < 0.0 && gb >= 0.0) || (ga >= 0.0 && gb < 0.0) {
            let lambda = ga / (ga - gb);
            let x = lerp(a, b, lambda);
            let d = dist(&x, p0);
            if d < tube.rho[0] && start.is_none_or(|s| d < s.1) {
                start = Some((l as f64 + lambda, d, if gb >= ga { 1 } else { -1 }));
            }
        }
    }
    let (u0, _, dir) = start.ok_or(SliceError::OutsideTube { sample: 0 })?;
    let mut us = Vec::with_capacity(m + 1);
    us.push(u0);
    let max_rho = tube.rho.iter().copied().fold(0.0, f64::max);
    let reach = 4.0 * (base.length() / m as f64 + 2.0 * max_rho).max(j.length() / mj as f64);
    for k in 1..=m {
        let kk = k % m;
        let budget = reach + 4.0 * dist(base.point(k - 1), base.point(kk));
        let u = next_crossing(j, frame, kk, us[k - 1], dir, budget).ok_or(SliceError::OutsideTube { sample: kk })?;
        if (u - us[k - 1]) * dir as f64 <= 0.0 {
            return Err(SliceError::NonMonotone { sample: kk });
        }
        us.push(u);
    }
    let advance = (us[m] - u0) * dir as f64 / mj as f64;
    if (advance - 1.0).abs() > 0.5 / mj as f64 + 1e-9 {
        return Err(SliceError::NotClosed { advance });
    }
    let mut rows = Vec::with_capacity(m);
    for (k, u) in us.iter().take(m).enumerate() {
        let x = j.eval_index(u.rem_euclid(mj as f64));
        if dist(&x, base.point(k)) >= tube.rho[k] {
            return Err(SliceError::OutsideTube { sample: k });
        }
        rows.push(frame.to_coeffs(k, &sub(&x, base.point(k))));
    }
    let section = NormalSection::from_rows(&rows).expect("rows share the frame rank");
    let mut knots: Vec<(f64, f64)> = (0..m).map(|k| (us[k] / mj as f64, k as f64 / m as f64)).collect();
    if dir < 0 {
        knots.reverse();
    }
    let f0 = ReparamMap::new(knots, dir as i32).map_err(|_| SliceError::NonMonotone { sample: 0 })?;
    Ok(ChartResult { section, f0 })
}
