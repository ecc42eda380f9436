use crate::lattice::FieldState;

/// Diffusion positivity requires `|alpha0| < 2` everywhere; the boundary
/// itself counts as a violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuardStatus {
    Pass,
    Reject { max_modulus: f64 },
}

pub const PUMP_MODULUS_LIMIT: f64 = 2.0;

pub fn guard_diffusion(state: &FieldState) -> GuardStatus {
    let max_sq = max_norm_sqr(&state.alpha0);
    if max_sq < PUMP_MODULUS_LIMIT * PUMP_MODULUS_LIMIT {
        GuardStatus::Pass
    } else {
        GuardStatus::Reject {
            max_modulus: max_sq.sqrt(),
        }
    }
}

/// NaN propagates as NaN so callers can tell it apart from a guard trip.
pub(crate) fn max_norm_sqr(field: &[num_complex::Complex64]) -> f64 {
    let mut max = 0.0f64;
    for z in field {
        let n = z.norm_sqr();
        if n.is_nan() {
            return f64::NAN;
        }
        max = max.max(n);
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn uniform_below_limit_passes() {
        let s = FieldState::uniform(64, Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(guard_diffusion(&s), GuardStatus::Pass);
    }

    #[test]
    fn single_cell_over_limit_rejects() {
        let mut s = FieldState::zeros(64);
        s.alpha0[17] = Complex64::new(0.0, 2.1);
        assert!(
            matches!(guard_diffusion(&s), GuardStatus::Reject { max_modulus } if (max_modulus - 2.1).abs() < 1e-12)
        );
    }

    #[test]
    fn boundary_counts_as_violation() {
        let mut s = FieldState::zeros(8);
        s.alpha0[3] = Complex64::new(2.0, 0.0);
        assert!(matches!(guard_diffusion(&s), GuardStatus::Reject { .. }));
        let mut s = FieldState::zeros(8);
        s.alpha0[0] = Complex64::new(-2.0, 0.0);
        assert!(matches!(guard_diffusion(&s), GuardStatus::Reject { .. }));
    }
}
