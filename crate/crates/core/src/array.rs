//! Linear superarray signal model: element patterns, manifold vector,
//! beampattern, white noise gain, directivity factor and the diffuse-noise
//! coherence matrix.
//!
//! Element `m` sits at `x_m` on the x-axis and has the first-order pattern
//! `a_m + (1 − a_m) sin θ`; `a_m = 1` is omnidirectional, `a_m = 0` is a
//! dipole aimed at +y.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::specfun;

/// Absolute slack (meters, and dimensionless for `a`) used when checking
/// constraints so that values produced by arithmetic on the boundary pass.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-12;

/// Filters with `hᴴ Γ h` below this fraction of `‖h‖²` have no meaningful DF.
pub const DF_DENOMINATOR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// m/s
    pub speed_of_sound: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            speed_of_sound: 343.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(speed_of_sound: f64) -> Result<Self> {
        if speed_of_sound.is_finite() && speed_of_sound > 0.0 {
            Ok(PhysicalConstants { speed_of_sound })
        } else {
            Err(Error::InvalidArgument(format!(
                "speed of sound must be positive, got {speed_of_sound}"
            )))
        }
    }

    /// `ω / c`.
    pub fn wavenumber(&self, omega: f64) -> f64 {
        omega / self.speed_of_sound
    }
}

/// Angular frequency for a frequency in Hz.
pub fn angular_frequency(hz: f64) -> f64 {
    TAU * hz
}

/// Microphone positions and directivity parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    positions: Vec<f64>,
    directivity: Vec<f64>,
}

impl ArrayConfig {
    /// Checks shape, finiteness and `a_m ∈ [0, 1]`. Aperture and spacing are
    /// checked against [`ArrayLimits`].
    pub fn new(positions: Vec<f64>, directivity: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidConfig("array has no elements".into()));
        }
        if positions.len() != directivity.len() {
            return Err(Error::InvalidConfig(format!(
                "{} positions but {} directivity parameters",
                positions.len(),
                directivity.len()
            )));
        }
        for (m, (&x, &a)) in positions.iter().zip(&directivity).enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidConfig(format!("position {m} is not finite")));
            }
            if !(a >= -FEASIBILITY_TOLERANCE && a <= 1.0 + FEASIBILITY_TOLERANCE) {
                return Err(Error::Infeasible(format!(
                    "directivity {m} = {a} outside [0, 1]"
                )));
            }
        }
        Ok(ArrayConfig {
            positions,
            directivity,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn directivity(&self) -> &[f64] {
        &self.directivity
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.positions, self.directivity)
    }
}

/// Aperture `[0, L]` and minimum spacing `d_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayLimits {
    pub min_spacing: f64,
    pub aperture: f64,
}

impl ArrayLimits {
    pub fn new(min_spacing: f64, aperture: f64) -> Result<Self> {
        if !(min_spacing.is_finite() && min_spacing >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "minimum spacing must be non-negative, got {min_spacing}"
            )));
        }
        if !(aperture.is_finite() && aperture > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "aperture must be positive, got {aperture}"
            )));
        }
        Ok(ArrayLimits {
            min_spacing,
            aperture,
        })
    }

    /// Whether `elements` microphones fit: `(M − 1)·d_c ≤ L`.
    pub fn check_capacity(&self, elements: usize) -> Result<()> {
        if elements == 0 {
            return Err(Error::InvalidConfig(
                "array needs at least one element".into(),
            ));
        }
        let needed = (elements - 1) as f64 * self.min_spacing;
        if needed > self.aperture + FEASIBILITY_TOLERANCE {
            return Err(Error::Infeasible(format!(
                "{elements} elements at spacing {} m need {needed} m, aperture is {} m",
                self.min_spacing, self.aperture
            )));
        }
        Ok(())
    }

    /// Verifies the aperture and pairwise spacing constraints.
    pub fn check(&self, cfg: &ArrayConfig) -> Result<()> {
        let tol = FEASIBILITY_TOLERANCE;
        for (m, &x) in cfg.positions().iter().enumerate() {
            if x < -tol || x > self.aperture + tol {
                return Err(Error::Infeasible(format!(
                    "position {m} = {x} m outside [0, {}] m",
                    self.aperture
                )));
            }
        }
        let mut order: Vec<usize> = (0..cfg.len()).collect();
        order.sort_by(|&i, &j| cfg.positions[i].total_cmp(&cfg.positions[j]));
        for w in order.windows(2) {
            let gap = cfg.positions[w[1]] - cfg.positions[w[0]];
            if gap < self.min_spacing - tol {
                return Err(Error::Infeasible(format!(
                    "elements {} and {} are {gap} m apart, minimum spacing is {} m",
                    w[0], w[1], self.min_spacing
                )));
            }
        }
        Ok(())
    }
}

/// Desired-signal direction and angular frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringContext {
    pub theta_s: f64,
    pub omega: f64,
}

impl SteeringContext {
    pub fn new(theta_s: f64, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "angular frequency must be positive, got {omega}"
            )));
        }
        if !(0.0..TAU).contains(&theta_s) {
            return Err(Error::InvalidArgument(format!(
                "steering angle must lie in [0, 2π), got {theta_s}"
            )));
        }
        Ok(SteeringContext { theta_s, omega })
    }
}

/// `a + (1 − a) sin θ`.
pub fn element_pattern(a: f64, theta: f64) -> f64 {
    a + (1.0 - a) * libm::sin(theta)
}

/// Manifold vector `d(x, θ, ω)`.
pub fn manifold(
    cfg: &ArrayConfig,
    theta: f64,
    omega: f64,
    consts: &PhysicalConstants,
) -> Vec<Complex64> {
    let k = consts.wavenumber(omega);
    let (sin_t, cos_t) = (libm::sin(theta), libm::cos(theta));
    cfg.positions
        .iter()
        .zip(&cfg.directivity)
        .map(|(&x, &a)| {
            let gain = a + (1.0 - a) * sin_t;
            let phase = k * x * cos_t;
            Complex64::new(gain * libm::cos(phase), gain * libm::sin(phase))
        })
        .collect()
}

fn check_filter(h: &[Complex64], cfg: &ArrayConfig) -> Result<()> {
    if h.len() != cfg.len() {
        return Err(Error::InvalidArgument(format!(
            "filter has {} taps, array has {} elements",
            h.len(),
            cfg.len()
        )));
    }
    Ok(())
}

fn check_nonzero(h: &[Complex64]) -> Result<f64> {
    let energy = linalg::norm_sqr(h);
    if energy > 0.0 {
        Ok(energy)
    } else {
        Err(Error::InvalidArgument("filter is identically zero".into()))
    }
}

/// `B[h, x, θ] = hᴴ d(x, θ, ω)`.
pub fn beampattern(
    h: &[Complex64],
    cfg: &ArrayConfig,
    theta: f64,
    omega: f64,
    consts: &PhysicalConstants,
) -> Result<Complex64> {
    check_filter(h, cfg)?;
    Ok(linalg::dot_conj(h, &manifold(cfg, theta, omega, consts)))
}

/// White noise gain `|hᴴ d(θ_s)|² / hᴴh`.
pub fn wng(
    h: &[Complex64],
    cfg: &ArrayConfig,
    ctx: &SteeringContext,
    consts: &PhysicalConstants,
) -> Result<f64> {
    check_filter(h, cfg)?;
    let energy = check_nonzero(h)?;
    let response = beampattern(h, cfg, ctx.theta_s, ctx.omega, consts)?;
    Ok(response.norm_sqr() / energy)
}

/// Diffuse-noise coherence matrix of the array in 2D:
///
/// `Γ_ij = (a_i a_j + b_i b_j / 2) J₀(ϖΔx_ij) + (b_i b_j / 2) J₂(ϖΔx_ij)`
/// with `b = 1 − a`, the angular average of `Re{d dᴴ}`.
pub fn coherence_matrix(
    cfg: &ArrayConfig,
    omega: f64,
    consts: &PhysicalConstants,
) -> Result<Matrix<f64>> {
    let k = consts.wavenumber(omega);
    let m = cfg.len();
    let mut gamma = Matrix::zeros(m, m);
    let mut orders = [0.0; 3];
    for i in 0..m {
        for j in 0..=i {
            let dx = libm::fabs(cfg.positions[i] - cfg.positions[j]);
            specfun::bessel_j_orders(k * dx, &mut orders)?;
            let (ai, aj) = (cfg.directivity[i], cfg.directivity[j]);
            let bb = 0.5 * (1.0 - ai) * (1.0 - aj);
            let v = (ai * aj + bb) * orders[0] + bb * orders[2];
            gamma[(i, j)] = v;
            gamma[(j, i)] = v;
        }
    }
    Ok(gamma)
}

/// Directivity factor `|hᴴ d(θ_s)|² / (hᴴ Γ h)`.
pub fn df(
    h: &[Complex64],
    cfg: &ArrayConfig,
    ctx: &SteeringContext,
    consts: &PhysicalConstants,
) -> Result<f64> {
    check_filter(h, cfg)?;
    let gamma = coherence_matrix(cfg, ctx.omega, consts)?;
    df_with(h, cfg, ctx, consts, &gamma)
}

/// [`df`] with a precomputed coherence matrix.
pub fn df_with(
    h: &[Complex64],
    cfg: &ArrayConfig,
    ctx: &SteeringContext,
    consts: &PhysicalConstants,
    gamma: &Matrix<f64>,
) -> Result<f64> {
    check_filter(h, cfg)?;
    let energy = check_nonzero(h)?;
    let denominator = linalg::quadratic_form(gamma, h);
    if !(denominator >= DF_DENOMINATOR_FLOOR * energy) {
        return Err(Error::DegenerateQuotient { denominator });
    }
    let response = beampattern(h, cfg, ctx.theta_s, ctx.omega, consts)?;
    Ok(response.norm_sqr() / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lsa_ii() -> ArrayConfig {
        ArrayConfig::new(
            (0..7).map(|m| 0.02 * m as f64).collect(),
            (0..7).map(|m| if m % 2 == 0 { 1.0 } else { 0.0 }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn element_pattern_cases() {
        assert_eq!(element_pattern(1.0, 0.7), 1.0);
        assert_eq!(element_pattern(0.0, FRAC_PI_2), 1.0);
        assert_eq!(element_pattern(0.5, 0.0), 0.5);
    }

    #[test]
    fn omni_manifold_at_broadside_is_ones() {
        let cfg = ArrayConfig::new(vec![0.0, 0.03, 0.1], vec![1.0; 3]).unwrap();
        let d = manifold(
            &cfg,
            FRAC_PI_2,
            angular_frequency(3000.0),
            &Default::default(),
        );
        for v in d {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_element_at_origin() {
        let cfg = ArrayConfig::new(vec![0.0], vec![0.3]).unwrap();
        let d = manifold(&cfg, 1.1, 5000.0, &Default::default());
        assert_eq!(d[0], c(element_pattern(0.3, 1.1), 0.0));
    }

    #[test]
    fn lsa_ii_manifold_at_endfire() {
        let cfg = lsa_ii();
        let d = manifold(&cfg, 0.0, angular_frequency(1000.0), &Default::default());
        for (m, v) in d.iter().enumerate() {
            if m % 2 == 1 {
                assert_eq!(v.norm(), 0.0);
            } else {
                assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn beampattern_of_basis_vector() {
        let cfg = ArrayConfig::new(vec![0.0, 0.05], vec![1.0, 0.2]).unwrap();
        let h = [c(1.0, 0.0), c(0.0, 0.0)];
        for k in 0..8 {
            let b = beampattern(&h, &cfg, k as f64, 9000.0, &Default::default()).unwrap();
            assert_abs_diff_eq!(b.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(b.im, 0.0, epsilon = 1e-15);
        }
        let zero = [c(0.0, 0.0); 2];
        assert_eq!(
            beampattern(&zero, &cfg, 0.3, 9000.0, &Default::default()).unwrap(),
            c(0.0, 0.0)
        );
        assert!(matches!(
            beampattern(&h[..1], &cfg, 0.3, 9000.0, &Default::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn wng_cases() {
        let consts = PhysicalConstants::default();
        let single = ArrayConfig::new(vec![0.0], vec![1.0]).unwrap();
        let ctx = SteeringContext::new(0.4, 2000.0).unwrap();
        assert_abs_diff_eq!(wng(&[c(1.0, 0.0)], &single, &ctx, &consts).unwrap(), 1.0);

        // delay-and-sum on M omnis steered at θ_s reaches M
        let m = 5;
        let cfg =
            ArrayConfig::new((0..m).map(|i| 0.013 * i as f64).collect(), vec![1.0; m]).unwrap();
        let ctx = SteeringContext::new(1.0, angular_frequency(2500.0)).unwrap();
        let h: Vec<_> = manifold(&cfg, ctx.theta_s, ctx.omega, &consts)
            .into_iter()
            .map(|d| d / m as f64)
            .collect();
        assert_abs_diff_eq!(
            wng(&h, &cfg, &ctx, &consts).unwrap(),
            m as f64,
            epsilon = 1e-12
        );

        let scaled: Vec<_> = h.iter().map(|v| v * c(-2.5, 0.7)).collect();
        assert_abs_diff_eq!(
            wng(&scaled, &cfg, &ctx, &consts).unwrap(),
            m as f64,
            epsilon = 1e-12
        );
        assert!(wng(&[c(0.0, 0.0); 5], &cfg, &ctx, &consts).is_err());
    }

    #[test]
    fn coherence_special_cases() {
        let consts = PhysicalConstants::default();
        let omega = angular_frequency(1500.0);
        let omni = ArrayConfig::new(vec![0.0, 0.04, 0.11], vec![1.0; 3]).unwrap();
        let g = coherence_matrix(&omni, omega, &consts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let dx = (omni.positions()[i] - omni.positions()[j]).abs();
                let expected = specfun::bessel_j(0, consts.wavenumber(omega) * dx).unwrap();
                assert_abs_diff_eq!(g[(i, j)], expected, epsilon = 1e-15);
            }
        }
        let mixed = ArrayConfig::new(vec![0.0, 0.05], vec![0.3, 0.0]).unwrap();
        let g = coherence_matrix(&mixed, omega, &consts).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], 0.09 + 0.49 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[(1, 1)], 0.5, epsilon = 1e-15);
        assert_eq!(g[(0, 1)], g[(1, 0)]);
    }

    #[test]
    fn single_omni_df_is_one() {
        let consts = PhysicalConstants::default();
        let cfg = ArrayConfig::new(vec![0.0], vec![1.0]).unwrap();
        let ctx = SteeringContext::new(PI / 3.0, 1000.0).unwrap();
        assert_abs_diff_eq!(
            df(&[c(0.3, 0.4)], &cfg, &ctx, &consts).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn df_rejects_null_space_filter() {
        // a dipole's pattern averages sin²θ = 1/2; a filter on a zero-gain
        // element is impossible, so use two coincident omni elements instead
        let consts = PhysicalConstants::default();
        let cfg = ArrayConfig::new(vec![0.05, 0.05], vec![1.0, 1.0]).unwrap();
        let ctx = SteeringContext::new(0.0, 1000.0).unwrap();
        let h = [c(1.0, 0.0), c(-1.0, 0.0)];
        assert!(matches!(
            df(&h, &cfg, &ctx, &consts),
            Err(Error::DegenerateQuotient { .. })
        ));
    }

    #[test]
    fn limits() {
        let limits = ArrayLimits::new(0.02, 0.15).unwrap();
        limits.check(&lsa_ii()).unwrap();
        assert!(limits.check_capacity(7).is_ok());
        assert!(limits.check_capacity(9).is_err());
        let tight = ArrayConfig::new(vec![0.0, 0.01], vec![1.0, 1.0]).unwrap();
        assert!(matches!(limits.check(&tight), Err(Error::Infeasible(_))));
        let outside = ArrayConfig::new(vec![0.0, 0.16], vec![1.0, 1.0]).unwrap();
        assert!(limits.check(&outside).is_err());
        assert!(ArrayLimits::new(0.3, 0.15)
            .unwrap()
            .check_capacity(2)
            .is_err());
        assert!(ArrayConfig::new(vec![0.0], vec![1.2]).is_err());
        assert!(ArrayConfig::new(vec![0.0, 0.1], vec![1.0]).is_err());
    }

    #[test]
    fn steering_context_validation() {
        assert!(SteeringContext::new(0.0, 0.0).is_err());
        assert!(SteeringContext::new(TAU, 1.0).is_err());
        assert!(SteeringContext::new(PI, 1.0).is_ok());
    }
}
