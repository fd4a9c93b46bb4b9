//! Small dense-vector helpers over `&[f64]`.

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub(crate) fn lerp(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + lambda * (y - x)).collect()
}

/// Closest point of segment `[a, b]` to `p`, as `(lambda, squared distance)`.
pub(crate) fn project_to_segment(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for i in 0..p.len() {
        let ab = b[i] - a[i];
        ab2 += ab * ab;
        ap_ab += (p[i] - a[i]) * ab;
    }
    let lambda = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
    let mut d2 = 0.0;
    for i in 0..p.len() {
        let q = a[i] + lambda * (b[i] - a[i]);
        d2 += (p[i] - q) * (p[i] - q);
    }
    (lambda, d2)
}

/// Distance from `p` to segment `[a, b]`.
/// Numerical rank of a symmetric positive semidefinite matrix (row-major, `n x n`)
/// via Gaussian elimination with full pivoting.
pub fn gram_rank(gram: &[f64], n: usize, rel_tol: f64) -> usize {
    let mut a = gram.to_vec();
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    let mut used_row = vec![false; n];
    let mut used_col = vec![false; n];
    for _ in 0..n {
        let mut best = (0.0, 0, 0);
        for r in (0..n).filter(|&r| !used_row[r]) {
            for c in (0..n).filter(|&c| !used_col[c]) {
                if a[r * n + c].abs() > best.0 {
                    best = (a[r * n + c].abs(), r, c);
                }
            }
        }
        if best.0 <= rel_tol * scale {
            break;
        }
        let (_, pr, pc) = best;
        used_row[pr] = true;
        used_col[pc] = true;
        rank += 1;
        let pivot = a[pr * n + pc];
        for r in (0..n).filter(|&r| !used_row[r]) {
            let factor = a[r * n + pc] / pivot;
            if factor != 0.0 {
                for c in 0..n {
                    a[r * n + c] -= factor * a[pr * n + c];
                }
            }
        }
    }
    rank
}
