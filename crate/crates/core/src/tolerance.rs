use serde::{Deserialize, Serialize};

use crate::curve::LoopImmersion;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ToleranceError {
    #[error("tolerances must be positive and finite")]
    NotPositive,
    #[error("eps_image ({eps_image}) must not exceed eps_match ({eps_match})")]
    Ordering { eps_image: f64, eps_match: f64 },
}

/// Every tolerance used by the library, carried explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Radius under which two image points are identified.
    pub eps_image: f64,
    /// Sup-distance budget for matching two loops up to reparametrization.
    pub eps_match: f64,
    /// Coefficient tolerance for normal sections.
    pub eps_section: f64,
}

impl ToleranceProfile {
    pub fn new(eps_image: f64, eps_match: f64, eps_section: f64) -> Result<Self, ToleranceError> {
        let t = Self { eps_image, eps_match, eps_section };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<(), ToleranceError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.eps_image) && ok(self.eps_match) && ok(self.eps_section)) {
            return Err(ToleranceError::NotPositive);
        }
        if self.eps_image > self.eps_match {
            return Err(ToleranceError::Ordering { eps_image: self.eps_image, eps_match: self.eps_match });
        }
        Ok(())
    }

    /// `10⁻³·diam`, `10⁻²·diam`, `10⁻⁶`.
    pub fn from_diameter(diameter: f64) -> Self {
        Self { eps_image: 1e-3 * diameter, eps_match: 1e-2 * diameter, eps_section: 1e-6 }
    }

    pub fn for_curve(curve: &LoopImmersion) -> Self {
        Self::from_diameter(curve.diameter())
    }

    pub fn for_pair(a: &LoopImmersion, b: &LoopImmersion) -> Self {
        Self::from_diameter(a.diameter().max(b.diameter()))
    }

    pub fn with_eps_image(mut self, eps: f64) -> Self {
        self.eps_image = eps;
        self
    }

    pub fn with_eps_match(mut self, eps: f64) -> Self {
        self.eps_match = eps;
        self
    }

    pub fn with_eps_section(mut self, eps: f64) -> Self {
        self.eps_section = eps;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_scale_with_diameter() {
        let t = ToleranceProfile::from_diameter(4.0);
        assert_eq!(t.eps_image, 4e-3);
        assert_eq!(t.eps_match, 4e-2);
        assert!(t.check().is_ok());
    }

    #[test]
    fn ordering_enforced() {
        assert!(matches!(ToleranceProfile::new(0.1, 0.01, 1e-6), Err(ToleranceError::Ordering { .. })));
        assert_eq!(ToleranceProfile::new(0.0, 0.01, 1e-6), Err(ToleranceError::NotPositive));
    }
}
