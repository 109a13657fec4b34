use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::Lattice;

/// Finite-range bound on the uniform mixing coefficient:
/// `phi(r) <= bound` for `r < effective_range` and `phi(r) = 0` beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    /// Nominal correlation radius of the construction.
    pub support_radius: f64,
    /// Measured range beyond which the field decorrelates exactly.
    pub effective_range: f64,
    pub bound: f64,
}

impl MixingProfile {
    pub fn finite_range(support_radius: f64, effective_range: f64, bound: f64) -> Result<Self> {
        if !(support_radius >= 0.0) || !(effective_range >= 0.0) {
            return Err(invalid("effective_range", "ranges must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&bound) {
            return Err(invalid("bound", format!("mixing bound must lie in [0, 1], got {bound}")));
        }
        Ok(MixingProfile {
            support_radius,
            effective_range,
            bound,
        })
    }

    /// A profile with `phi = 0` everywhere.
    pub fn independent() -> Self {
        MixingProfile {
            support_radius: 0.0,
            effective_range: 0.0,
            bound: 0.0,
        }
    }

    pub fn check_window(&self, lattice: &Lattice) -> Result<()> {
        if self.effective_range < lattice.half_length() {
            Ok(())
        } else {
            Err(invalid(
                "effective_range",
                format!(
                    "{} must be below L/2 = {}",
                    self.effective_range,
                    lattice.half_length()
                ),
            ))
        }
    }

    /// `int_0^inf r^(n-1) phi^(1/2)(r) dr = sqrt(bound) * range^n / n`.
    pub fn mixing_condition_check(&self, dim: usize) -> f64 {
        let n = dim as f64;
        self.bound.sqrt() * self.effective_range.powf(n) / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(MixingProfile::independent().mixing_condition_check(2), 0.0);
        let p = MixingProfile::finite_range(2.0, 2.0, 1.0).unwrap();
        assert!((p.mixing_condition_check(3) - 8.0 / 3.0).abs() < 1e-15);
        let p = MixingProfile::finite_range(1.0, 1.5, 0.25).unwrap();
        assert!(p.mixing_condition_check(2) <= 1.5f64.powi(2) / 2.0);
    }

    #[test]
    fn rejects_bad_bounds_and_oversized_range() {
        assert!(MixingProfile::finite_range(1.0, 1.0, 1.5).is_err());
        let l = Lattice::new(1, 16, 4.0).unwrap();
        let p = MixingProfile::finite_range(1.0, 2.0, 1.0).unwrap();
        assert!(p.check_window(&l).is_err());
    }
}
