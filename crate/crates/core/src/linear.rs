//! Closed-form classical results for the noiseless equations: threshold,
//! dispersion relation, homogeneous steady states, squeezing directions and
//! the linearized below-threshold variances.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Growth rates of a `(k, -k)` signal perturbation pair on a homogeneous pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionResult {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousSolution {
    pub a0_st: Complex64,
    pub a1_st: Complex64,
    pub branch: Branch,
}

impl HomogeneousSolution {
    /// Max-norm residual of the noiseless stationary equations.
    pub fn residual(&self, pump_e: f64, delta0: f64, delta1: f64) -> f64 {
        let (r0, r1) = stationary_residual(self.a0_st, self.a1_st, pump_e, delta0, delta1);
        r0.norm().max(r1.norm())
    }
}

/// Right-hand sides of the homogeneous noiseless field equations.
pub fn stationary_residual(
    a0: Complex64,
    a1: Complex64,
    pump_e: f64,
    delta0: f64,
    delta1: f64,
) -> (Complex64, Complex64) {
    let r0 = -Complex64::new(1.0, delta0) * a0 + pump_e - a1 * a1 / 2.0;
    let r1 = -Complex64::new(1.0, delta1) * a1 + a0 * a1.conj();
    (r0, r1)
}

/// Phases `Phi_+` and `Phi_-` of the amplified and damped combinations
/// `V_pm = e^{i Phi_pm} dA(k) pm dA*(-k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingDirection {
    pub phi_plus: f64,
    pub phi_minus: f64,
}

impl SqueezingDirection {
    pub fn unit_plus(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi_plus)
    }

    pub fn unit_minus(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi_minus)
    }
}

/// Linearized shot-noise-normalized variances below threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BelowThreshold {
    pub xminus_var: f64,
    pub xplus_var: f64,
    pub v_twin: f64,
}

/// Wavenumber of maximal linear gain, `sqrt(-delta1 / 2)`.
pub fn critical_wavenumber(delta1: f64) -> Result<f64> {
    if delta1 < 0.0 {
        Ok((-delta1 / 2.0).sqrt())
    } else {
        Err(Error::NoFiniteKInstability(delta1))
    }
}

/// Pump amplitude at which the trivial solution loses stability.
pub fn threshold(delta0: f64, delta1: f64) -> f64 {
    if delta1 < 0.0 {
        (1.0 + delta0 * delta0).sqrt()
    } else {
        ((1.0 + delta0 * delta0) * (1.0 + delta1 * delta1)).sqrt()
    }
}

/// `lambda_pm = -1 pm sqrt(|A0|^2 - (delta1 + 2k^2)^2)`.
pub fn dispersion(k: f64, pump_mod: f64, delta1: f64) -> DispersionResult {
    let theta = delta1 + 2.0 * k * k;
    let root = Complex64::new(pump_mod * pump_mod - theta * theta, 0.0).sqrt();
    DispersionResult {
        lambda_plus: -1.0 + root,
        lambda_minus: -1.0 - root,
    }
}

/// `A1 = 0`, `A0 = E / (1 + i delta0)`.
pub fn trivial_homogeneous(pump_e: f64, delta0: f64) -> HomogeneousSolution {
    HomogeneousSolution {
        a0_st: pump_e / Complex64::new(1.0, delta0),
        a1_st: Complex64::new(0.0, 0.0),
        branch: Branch::Plus,
    }
}

/// Nonzero homogeneous steady state. With `rho` defined by the gain clamp
/// `(rho + 1 - d0 d1)^2 + (d0 + d1)^2 = E^2` (so that `|A0|^2 = 1 + d1^2`),
/// `A0 = E (1 + i d1) / ((1 + i d0)(1 + i d1) + rho)` and
/// `A1 = pm sqrt(2 (E - (1 + i d0) A0))`. Note `rho = |A1|^2 / 2`.
pub fn nonzero_homogeneous(
    pump_e: f64,
    delta0: f64,
    delta1: f64,
    branch: Branch,
) -> Result<HomogeneousSolution> {
    let detuning_sum = delta0 + delta1;
    let radicand = pump_e * pump_e - detuning_sum * detuning_sum;
    if radicand < 0.0 {
        return Err(Error::BranchAbsent { pump: pump_e });
    }
    let rho = -(1.0 - delta0 * delta1) + radicand.sqrt();
    if rho <= 0.0 {
        return Err(Error::BranchAbsent { pump: pump_e });
    }
    let cav0 = Complex64::new(1.0, delta0);
    let cav1 = Complex64::new(1.0, delta1);
    let a0 = pump_e * cav1 / (cav0 * cav1 + rho);
    let a1 = (2.0 * (pump_e - cav0 * a0)).sqrt() * branch.sign();
    Ok(HomogeneousSolution {
        a0_st: a0,
        a1_st: a1,
        branch,
    })
}

/// `e^{i Phi_pm} = mp (i theta mp sqrt(|A0|^2 - theta^2)) / A0`, `theta = delta1 + 2k^2`.
pub fn squeezing_direction(k: f64, a0_st: Complex64, delta1: f64) -> Result<SqueezingDirection> {
    let theta = delta1 + 2.0 * k * k;
    let radicand = a0_st.norm_sqr() - theta * theta;
    if radicand < 0.0 || a0_st.norm() == 0.0 {
        return Err(Error::ComplexBranch { k });
    }
    let root = radicand.sqrt();
    let plus = -(Complex64::new(-root, theta)) / a0_st;
    let minus = Complex64::new(root, theta) / a0_st;
    Ok(SqueezingDirection {
        phi_plus: plus.arg(),
        phi_minus: minus.arg(),
    })
}

/// Linearized shot-noise-normalized variances at `k_c` below threshold.
pub fn analytic_below_threshold(pump_e: f64) -> Result<BelowThreshold> {
    if !(0.0..1.0).contains(&pump_e) {
        return Err(Error::AboveThreshold(pump_e));
    }
    Ok(BelowThreshold {
        xminus_var: -pump_e / (1.0 + pump_e),
        xplus_var: pump_e / (1.0 - pump_e),
        v_twin: -0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Coupling matrix of `(dA(k), dA*(-k))` about a homogeneous pump with zero signal.
    fn pair_matrix(k: f64, a0: Complex64, delta1: f64) -> [[Complex64; 2]; 2] {
        let theta = delta1 + 2.0 * k * k;
        [
            [Complex64::new(-1.0, -theta), a0],
            [a0.conj(), Complex64::new(-1.0, theta)],
        ]
    }

    /// Eigenvalues from trace and determinant.
    fn eig2(m: [[Complex64; 2]; 2]) -> (Complex64, Complex64) {
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        (tr / 2.0 + disc, tr / 2.0 - disc)
    }

    #[test]
    fn critical_wavenumber_values() {
        assert_relative_eq!(critical_wavenumber(-0.18).unwrap(), 0.3, epsilon = 1e-15);
        assert_relative_eq!(critical_wavenumber(-2.0).unwrap(), 1.0);
        assert!(matches!(
            critical_wavenumber(0.18),
            Err(Error::NoFiniteKInstability(_))
        ));
    }

    #[test]
    fn threshold_values() {
        assert_relative_eq!(threshold(0.0, -0.18), 1.0);
        assert_relative_eq!(threshold(1.0, -0.18), 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(threshold(0.0, 0.18), 1.0324f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(threshold(0.0, 0.18), 1.01607, epsilon = 1e-5);
    }

    #[test]
    fn dispersion_values() {
        let d = dispersion(0.3, 1.0, -0.18);
        assert!(d.lambda_plus.norm() < 1e-15);
        assert_relative_eq!(d.lambda_minus.re, -2.0, epsilon = 1e-15);
        assert_relative_eq!(
            dispersion(0.3, 0.5, -0.18).lambda_plus.re,
            -0.5,
            epsilon = 1e-15
        );
        let d0 = dispersion(0.0, 1.0, -0.18);
        assert_relative_eq!(d0.lambda_plus.re, -1.0 + 0.9676f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(d0.lambda_plus.re, -0.016337, epsilon = 1e-5);
    }

    #[test]
    fn dispersion_complex_branch() {
        let d = dispersion(2.0, 0.1, -0.18);
        assert!(d.lambda_plus.im.abs() > 0.0);
        assert_relative_eq!(d.lambda_plus.re, -1.0);
    }

    #[test]
    fn dispersion_matches_pair_matrix_eigenvalues() {
        for &k in &[0.0, 0.1, 0.3, 0.45, 1.2] {
            for &a in &[0.3, 0.9, 1.0, 1.4] {
                let (l1, l2) = eig2(pair_matrix(k, Complex64::new(a, 0.0), -0.18));
                let d = dispersion(k, a, -0.18);
                let same = (d.lambda_plus - l1).norm() + (d.lambda_minus - l2).norm();
                let swapped = (d.lambda_plus - l2).norm() + (d.lambda_minus - l1).norm();
                assert!(same.min(swapped) < 1e-12, "k={k} a={a}");
                assert!(d.lambda_plus.re >= d.lambda_minus.re);
            }
        }
    }

    #[test]
    fn growth_maximal_at_critical_wavenumber() {
        let kc = critical_wavenumber(-0.18).unwrap();
        let at_kc = dispersion(kc, 1.0, -0.18).lambda_plus.re;
        assert!(at_kc.abs() < 1e-15);
        for i in 0..200 {
            let k = i as f64 * 0.01;
            assert!(dispersion(k, 1.0, -0.18).lambda_plus.re <= at_kc + 1e-15);
        }
    }

    #[test]
    fn trivial_solutions() {
        let s = trivial_homogeneous(1.0, 0.0);
        assert_eq!(s.a0_st, Complex64::new(1.0, 0.0));
        assert_eq!(s.a1_st, Complex64::new(0.0, 0.0));
        let s = trivial_homogeneous(2f64.sqrt(), 1.0);
        assert_relative_eq!(s.a0_st.re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.a0_st.im, -(0.5f64.sqrt()), epsilon = 1e-15);
        assert!(s.residual(2f64.sqrt(), 1.0, -0.18) < 1e-15);
        let s = trivial_homogeneous(0.0, 0.0);
        assert_eq!(s.a0_st.norm(), 0.0);
    }

    #[test]
    fn nonzero_homogeneous_values() {
        let s = nonzero_homogeneous(1.1, 0.0, -0.18, Branch::Plus).unwrap();
        let rho = -1.0 + 1.1776f64.sqrt();
        assert_relative_eq!(rho, 0.085166, epsilon = 1e-5);
        assert_relative_eq!(s.a1_st.norm_sqr() / 2.0, rho, epsilon = 1e-14);
        assert_relative_eq!(s.a0_st.norm(), 1.016071, epsilon = 1e-6);
        assert!(s.residual(1.1, 0.0, -0.18) < 1e-10);

        assert!(matches!(
            nonzero_homogeneous(1.0, 0.0, -0.18, Branch::Plus),
            Err(Error::BranchAbsent { .. })
        ));

        let s = nonzero_homogeneous(1.5, 0.0, 0.0, Branch::Minus).unwrap();
        assert_relative_eq!(s.a0_st.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.a1_st.re, -1.0, epsilon = 1e-15);
        assert!(s.a1_st.im.abs() < 1e-15);
    }

    #[test]
    fn squeezing_direction_at_critical_wavenumber() {
        let dir = squeezing_direction(0.3, Complex64::new(1.0, 0.0), -0.18).unwrap();
        assert!(dir.phi_plus.abs() < 1e-12);
        assert!(dir.phi_minus.abs() < 1e-12);
    }

    #[test]
    fn squeezing_direction_at_zero_wavenumber() {
        let dir = squeezing_direction(0.0, Complex64::new(1.0, 0.0), -0.18).unwrap();
        let e = dir.unit_plus();
        assert_relative_eq!(e.re, 0.9676f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(e.im, 0.18, epsilon = 1e-12);
        assert!(matches!(
            squeezing_direction(1.0, Complex64::new(0.1, 0.0), -0.18),
            Err(Error::ComplexBranch { .. })
        ));
    }

    /// `V_pm = e^{i Phi_pm} u pm w` must be a left eigenvector of the pair matrix
    /// with eigenvalue `lambda_pm`.
    #[test]
    fn squeezing_direction_diagonalizes_pair_matrix() {
        for &(k, a0) in &[
            (0.3, Complex64::new(1.0, 0.0)),
            (0.0, Complex64::new(1.0, 0.0)),
            (0.2, Complex64::new(0.8, 0.5)),
            (0.35, Complex64::new(-0.4, 0.9)),
        ] {
            let m = pair_matrix(k, a0, -0.18);
            let dir = squeezing_direction(k, a0, -0.18).unwrap();
            let d = dispersion(k, a0.norm(), -0.18);
            for (unit, sign, lambda) in [
                (dir.unit_plus(), 1.0, d.lambda_plus),
                (dir.unit_minus(), -1.0, d.lambda_minus),
            ] {
                let row = [unit, Complex64::new(sign, 0.0)];
                for col in 0..2 {
                    let lhs = row[0] * m[0][col] + row[1] * m[1][col];
                    assert!((lhs - lambda * row[col]).norm() < 1e-12, "k={k} col={col}");
                }
            }
        }
    }

    #[test]
    fn below_threshold_values() {
        let b = analytic_below_threshold(0.999).unwrap();
        assert_relative_eq!(b.xminus_var, -0.999 / 1.999, epsilon = 1e-15);
        assert_relative_eq!(b.xminus_var, -0.49975, epsilon = 1e-5);
        assert_relative_eq!(b.xplus_var, 999.0, epsilon = 1e-9);
        assert_eq!(b.v_twin, -0.5);
        let b = analytic_below_threshold(0.0).unwrap();
        assert_eq!((b.xminus_var, b.xplus_var), (0.0, 0.0));
        let b = analytic_below_threshold(0.5).unwrap();
        assert_relative_eq!(b.xminus_var, -1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(b.xplus_var, 1.0, epsilon = 1e-15);
        assert!(analytic_below_threshold(1.0).is_err());
    }

    proptest! {
        #[test]
        fn threshold_consistency(delta1 in -3.0f64..-0.01, delta0 in -2.0f64..2.0) {
            let kc = critical_wavenumber(delta1).unwrap();
            let ec = threshold(delta0, delta1);
            // trivial pump modulus at threshold is 1 for any delta0
            let a0 = trivial_homogeneous(ec, delta0).a0_st.norm();
            prop_assert!(dispersion(kc, a0, delta1).lambda_plus.norm() < 1e-12);
        }

        #[test]
        fn homogeneous_branches(e in 0.0f64..3.0, delta0 in -1.0f64..1.0, delta1 in -1.0f64..1.0) {
            match (nonzero_homogeneous(e, delta0, delta1, Branch::Plus),
                   nonzero_homogeneous(e, delta0, delta1, Branch::Minus)) {
                (Ok(p), Ok(m)) => {
                    prop_assert!(p.residual(e, delta0, delta1) < 1e-10);
                    prop_assert!(m.residual(e, delta0, delta1) < 1e-10);
                    prop_assert_eq!(p.a1_st, -m.a1_st);
                    prop_assert_eq!(p.a0_st, m.a0_st);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "branches disagree on existence"),
            }
        }

        #[test]
        fn unit_modulus_phases(k in 0.0f64..0.5, re in -1.5f64..1.5, im in -1.5f64..1.5) {
            let a0 = Complex64::new(re, im);
            if let Ok(dir) = squeezing_direction(k, a0, -0.18) {
                let theta = -0.18 + 2.0 * k * k;
                let root = (a0.norm_sqr() - theta * theta).sqrt();
                let plus = -(Complex64::new(-root, theta)) / a0;
                prop_assert!((plus.norm() - 1.0).abs() < 1e-12);
                prop_assert!((dir.unit_plus() - plus).norm() < 1e-12);
            }
        }

        #[test]
        fn squeezed_variance_monotone(e1 in 0.0f64..0.999, e2 in 0.0f64..0.999) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let a = analytic_below_threshold(lo).unwrap().xminus_var;
            let b = analytic_below_threshold(hi).unwrap().xminus_var;
            prop_assert!(b <= a);
            prop_assert!(a <= 0.0 && b > -0.5);
        }
    }
}
