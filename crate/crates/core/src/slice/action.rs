use super::frame::{NormalBundleFrame, NormalSection};
use super::SliceError;
use crate::linalg::dot;
use crate::matching::verify_reparam;
use crate::reparam::ReparamMap;
use crate::tolerance::ToleranceProfile;

/// Real sample indices closer than this to an integer are treated as samples.
const SNAP: f64 = 1e-6;

/// Where `f` sends sample `k`: an exact sample index when it lands on one.
enum Target {
    Sample(usize),
    Between(usize, f64),
}

fn target(f: &ReparamMap, k: usize, m: usize) -> Target {
    let x = f.eval_mod(k as f64 / m as f64) * m as f64;
    let r = x.round();
    if (x - r).abs() < SNAP {
        Target::Sample(r as usize % m)
    } else {
        let lo = x.floor();
        Target::Between(lo as usize % m, x - lo)
    }
}

fn check_isotropy(f: &ReparamMap, frame: &NormalBundleFrame, tol: &ToleranceProfile) -> Result<(), SliceError> {
    let residual = verify_reparam(frame.base(), frame.base(), f);
    if residual > tol.eps_match {
        return Err(SliceError::NotIsotropy { residual, eps: tol.eps_match });
    }
    Ok(())
}

/// The normal vector `s(f(t_k))` in ambient coordinates.
fn vector_at(frame: &NormalBundleFrame, s: &NormalSection, tgt: &Target) -> Vec<f64> {
    let m = frame.len();
    match *tgt {
        Target::Sample(j) => frame.to_ambient(j, s.coeff(j)),
        Target::Between(j, lambda) => {
            let a = frame.to_ambient(j, s.coeff(j));
            let b = frame.to_ambient((j + 1) % m, s.coeff((j + 1) % m));
            a.iter().zip(&b).map(|(x, y)| x + lambda * (y - x)).collect()
        }
    }
}

/// `(f*s)(t) = s(f(t))`, read in the frame at `t`. Since `i ∘ f = i`, the normal
/// spaces at `t` and `f(t)` coincide as subspaces, so no transport is needed.
pub fn pullback_plain(
    f: &ReparamMap,
    s: &NormalSection,
    frame: &NormalBundleFrame,
    tol: &ToleranceProfile,
) -> Result<NormalSection, SliceError> {
    frame.check_section(s)?;
    check_isotropy(f, frame, tol)?;
    Ok(pullback_unchecked(f, s, frame))
}

pub(crate) fn pullback_unchecked(f: &ReparamMap, s: &NormalSection, frame: &NormalBundleFrame) -> NormalSection {
    let m = frame.len();
    NormalSection::from_fn(m, frame.rank(), |k, out| {
        let v = vector_at(frame, s, &target(f, k, m));
        for (c, o) in out.iter_mut().enumerate() {
            *o = dot(frame.vector(k, c), &v);
        }
    })
}

/// Plain pullback weighted by the square root of the Jacobian of `f` with respect to
/// the arclength measure of the base. On samples mapped to samples the Jacobian is
/// the ratio of trapezoid weights times the index stretch of `f`, which makes the
/// discrete pullback an exact isometry of [`inner_product`].
pub fn pullback_halfdensity(
    f: &ReparamMap,
    s: &NormalSection,
    frame: &NormalBundleFrame,
    tol: &ToleranceProfile,
) -> Result<NormalSection, SliceError> {
    let mut out = pullback_plain(f, s, frame, tol)?;
    let m = frame.len();
    let w = frame.weights();
    for k in 0..m {
        let jac = match target(f, k, m) {
            Target::Sample(j) => {
                let next = match target(f, (k + 1) % m, m) {
                    Target::Sample(x) => x,
                    Target::Between(x, _) => x,
                };
                let prev = match target(f, (k + m - 1) % m, m) {
                    Target::Sample(x) => x,
                    Target::Between(x, _) => x,
                };
                let stretch = ((next + m - prev) % m) as f64 / 2.0;
                stretch * w[j] / w[k]
            }
            Target::Between(j, lambda) => {
                let rho_f = (1.0 - lambda) * w[j] + lambda * w[(j + 1) % m];
                f.slope(k as f64 / m as f64).abs() * rho_f / w[k]
            }
        };
        out.coeff_mut(k).iter_mut().for_each(|x| *x *= jac.sqrt());
    }
    Ok(out)
}

/// `Σ_k g(s1(t_k), s2(t_k)) Δℓ_k` with `Δℓ_k` the mean of the two edges at sample `k`.
pub fn inner_product(s1: &NormalSection, s2: &NormalSection, frame: &NormalBundleFrame) -> f64 {
    (0..frame.len()).map(|k| dot(s1.coeff(k), s2.coeff(k)) * frame.weight(k)).sum()
}
