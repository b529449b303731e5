//! Shared numeric tolerances and the visibility scalar.

use crate::error::StateError;

/// Tolerances used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Normalized cross-term `|a₁b₂ − a₂b₁| / (‖u₁‖‖u₂‖)` below which two
    /// coins are the same point of the Riemann sphere.
    pub projective_eq: f64,
    /// Allowed deviation of a density matrix trace from one.
    pub trace: f64,
    /// Most negative eigenvalue still accepted as positive semidefinite.
    pub psd: f64,
    /// Unnormalized traces below this are treated as a vanishing
    /// post-selection probability.
    pub vanishing_trace: f64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        projective_eq: 1e-9,
        trace: 1e-12,
        psd: 1e-12,
        vanishing_trace: 1e-15,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Pairwise photon indistinguishability `V ∈ [0, 1]` (HOM visibility).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Visibility(f64);

impl Visibility {
    pub const ONE: Visibility = Visibility(1.0);
    pub const ZERO: Visibility = Visibility(0.0);

    pub fn new(v: f64) -> Result<Self, StateError> {
        if v.is_finite() && (0.0..=1.0).contains(&v) {
            Ok(Visibility(v))
        } else {
            Err(StateError::InvalidVisibility(v))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Visibility {
    fn default() -> Self {
        Visibility::ONE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visibility_range() {
        assert!(Visibility::new(0.84).is_ok());
        assert!(Visibility::new(0.0).is_ok());
        assert!(Visibility::new(1.0).is_ok());
        assert!(Visibility::new(1.0 + 1e-9).is_err());
        assert!(Visibility::new(-0.1).is_err());
        assert!(Visibility::new(f64::NAN).is_err());
    }
}
