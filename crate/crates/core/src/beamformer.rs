//! Truncated Jacobi–Anger design of the steerable beamformer.
//!
//! Expanding `e^{ȷϖx cos θ} = Σ_n β_n(ϖx) e^{ȷnθ}` with `β_n = ȷⁿJ_n` turns the
//! beampattern into
//!
//! `B(θ) ≈ Σ_n e^{ȷnθ} hᴴΛ₀β_n + sin θ Σ_n e^{ȷnθ} hᴴΛ₁β_n`,
//!
//! with `Λ₀ = diag(a)` and `Λ₁ = I − Λ₀`. Matching these coefficients to the
//! ideal pattern's for `n = 0..𝒩` gives a `(2𝒩+2) × M` system solved in the
//! minimum-norm sense.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{angular_frequency, ArrayConfig, PhysicalConstants};
use crate::error::{Error, Result};
use crate::idp::{expand_idp, IdpCoefficients, IdpSpec};
use crate::linalg::{Matrix, MinNormSolver};
use crate::metrics::DesignGrid;
use crate::{par, specfun};

/// Relative Gram diagonal loading used unless overridden.
pub const DEFAULT_REGULARIZATION: f64 = 1e-10;

/// Solver knobs shared by every design routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSettings {
    /// Jacobi–Anger truncation order `𝒩`.
    pub truncation: usize,
    /// Relative diagonal loading; see [`MinNormSolver::new`].
    pub regularization: f64,
    pub consts: PhysicalConstants,
}

impl DesignSettings {
    /// Truncation equal to the pattern order, default loading, c = 343 m/s.
    pub fn for_spec(spec: &IdpSpec) -> Self {
        DesignSettings {
            truncation: spec.order(),
            regularization: DEFAULT_REGULARIZATION,
            consts: PhysicalConstants::default(),
        }
    }
}

/// `Θ̲_𝒩(ω) h = η̲_{𝒩,N}(θ_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSystem {
    pub theta_matrix: Matrix<Complex64>,
    pub rhs: Vec<Complex64>,
    pub truncation: usize,
    pub omega: f64,
}

/// `[β_n(ϖx_1) … β_n(ϖx_M)]`.
pub fn beta_vector(
    cfg: &ArrayConfig,
    n: i32,
    omega: f64,
    consts: &PhysicalConstants,
) -> Result<Vec<Complex64>> {
    let k = consts.wavenumber(omega);
    cfg.positions()
        .iter()
        .map(|&x| specfun::beta(n, k * x))
        .collect()
}

/// Evaluates the truncated series form of the beampattern.
pub fn approx_beampattern(
    h: &[Complex64],
    cfg: &ArrayConfig,
    theta: f64,
    omega: f64,
    truncation: usize,
    consts: &PhysicalConstants,
) -> Result<Complex64> {
    if h.len() != cfg.len() {
        return Err(Error::InvalidArgument(format!(
            "filter has {} taps, array has {} elements",
            h.len(),
            cfg.len()
        )));
    }
    let k = consts.wavenumber(omega);
    let t = truncation as i32;
    let mut direct = Complex64::new(0.0, 0.0);
    let mut weighted = Complex64::new(0.0, 0.0);
    for (m, (&x, &a)) in cfg.positions().iter().zip(cfg.directivity()).enumerate() {
        let bessel = specfun::orders_upto(truncation, k * x)?;
        let mut series = Complex64::new(0.0, 0.0);
        for n in -t..=t {
            let beta = specfun::j_power(n.unsigned_abs()) * bessel[n.unsigned_abs() as usize];
            let p = n as f64 * theta;
            series += Complex64::new(libm::cos(p), libm::sin(p)) * beta;
        }
        let hc = h[m].conj();
        direct += hc * a * series;
        weighted += hc * (1.0 - a) * series;
    }
    Ok(direct + weighted * libm::sin(theta))
}

fn check_dimensions(elements: usize, truncation: usize) -> Result<()> {
    let required = 2 * truncation + 2;
    if elements < required {
        return Err(Error::UnderDetermined {
            elements,
            truncation,
            required,
        });
    }
    Ok(())
}

/// `Θ̲_𝒩(ω) = [Θ_𝒩Λ₀; Θ_𝒩Λ₁]` with rows of `Θ_𝒩` equal to `β_nᴴ`.
pub fn system_matrix(
    cfg: &ArrayConfig,
    omega: f64,
    truncation: usize,
    consts: &PhysicalConstants,
) -> Result<Matrix<Complex64>> {
    check_dimensions(cfg.len(), truncation)?;
    let rows = truncation + 1;
    let k = consts.wavenumber(omega);
    let mut theta = Matrix::zeros(2 * rows, cfg.len());
    for (m, (&x, &a)) in cfg.positions().iter().zip(cfg.directivity()).enumerate() {
        let bessel = specfun::orders_upto(truncation, k * x)?;
        for n in 0..rows {
            let beta_conj = (specfun::j_power(n as u32) * bessel[n]).conj();
            theta[(n, m)] = beta_conj * a;
            theta[(rows + n, m)] = beta_conj * (1.0 - a);
        }
    }
    Ok(theta)
}

/// `η̲ = [η_0 … η_N 0 … 0, η̃_0 … η̃_{N−1} 0 … 0]`, each block of length `𝒩+1`.
pub fn design_rhs(coeffs: &IdpCoefficients, truncation: usize) -> Result<Vec<Complex64>> {
    let order = coeffs.order();
    if truncation < order {
        return Err(Error::TruncationTooSmall { truncation, order });
    }
    let rows = truncation + 1;
    let mut rhs = vec![Complex64::new(0.0, 0.0); 2 * rows];
    for n in 0..=order {
        rhs[n] = Complex64::new(coeffs.eta(n as i32), 0.0);
    }
    for n in 0..order {
        rhs[rows + n] = Complex64::new(coeffs.eta_tilde(n as i32), 0.0);
    }
    Ok(rhs)
}

pub fn assemble_system(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    theta_s: f64,
    omega: f64,
    truncation: usize,
    consts: &PhysicalConstants,
) -> Result<DesignSystem> {
    check_dimensions(cfg.len(), truncation)?;
    let rhs = design_rhs(&expand_idp(spec, theta_s), truncation)?;
    let theta_matrix = system_matrix(cfg, omega, truncation, consts)?;
    Ok(DesignSystem {
        theta_matrix,
        rhs,
        truncation,
        omega,
    })
}

/// Minimum-norm filter `Θ̲ᴴ(Θ̲Θ̲ᴴ + λI)⁻¹η̲`.
pub fn solve_filter(sys: &DesignSystem, regularization: f64) -> Result<Vec<Complex64>> {
    let solver = MinNormSolver::new(sys.theta_matrix.clone(), regularization)?;
    Ok(solver.solve(&sys.rhs))
}

/// Design state at one frequency: the factored system, reused for every
/// steering direction.
#[derive(Debug, Clone)]
pub struct FrequencyDesign {
    pub frequency_hz: f64,
    pub omega: f64,
    truncation: usize,
    solver: MinNormSolver,
}

impl FrequencyDesign {
    pub fn new(cfg: &ArrayConfig, frequency_hz: f64, settings: &DesignSettings) -> Result<Self> {
        let omega = angular_frequency(frequency_hz);
        let theta = system_matrix(cfg, omega, settings.truncation, &settings.consts)?;
        let solver = MinNormSolver::new(theta, settings.regularization)?;
        Ok(FrequencyDesign {
            frequency_hz,
            omega,
            truncation: settings.truncation,
            solver,
        })
    }

    pub fn filter(&self, coeffs: &IdpCoefficients) -> Result<Vec<Complex64>> {
        Ok(self.solver.solve(&design_rhs(coeffs, self.truncation)?))
    }
}

/// Filters over a frequency × steering grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    pub frequencies_hz: Vec<f64>,
    pub steerings_rad: Vec<f64>,
    /// Row-major: `filters[f * steerings + s]`.
    pub filters: Vec<Vec<Complex64>>,
}

impl FilterBank {
    pub fn get(&self, frequency_index: usize, steering_index: usize) -> Option<&[Complex64]> {
        if steering_index >= self.steerings_rad.len() {
            return None;
        }
        self.filters
            .get(frequency_index * self.steerings_rad.len() + steering_index)
            .map(Vec::as_slice)
    }
}

/// One minimum-norm filter per grid point.
pub fn design_bank(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    grid: &DesignGrid,
    settings: &DesignSettings,
) -> Result<FilterBank> {
    if grid.frequencies_hz().is_empty() || grid.steerings_rad().is_empty() {
        return Err(Error::EmptyGrid);
    }
    let coeffs: Vec<IdpCoefficients> = grid
        .steerings_rad()
        .iter()
        .map(|&ts| expand_idp(spec, ts))
        .collect();
    let per_frequency = par::map(grid.frequencies_hz(), |&f| -> Result<Vec<Vec<Complex64>>> {
        let design = FrequencyDesign::new(cfg, f, settings).map_err(|e| e.at(f, f64::NAN))?;
        coeffs
            .iter()
            .map(|c| design.filter(c).map_err(|e| e.at(f, c.theta_s)))
            .collect()
    });
    let mut filters = Vec::with_capacity(grid.frequencies_hz().len() * coeffs.len());
    for row in per_frequency {
        filters.extend(row?);
    }
    Ok(FilterBank {
        frequencies_hz: grid.frequencies_hz().to_vec(),
        steerings_rad: grid.steerings_rad().to_vec(),
        filters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::beampattern;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    fn lsa_ii() -> ArrayConfig {
        ArrayConfig::new(
            (0..7).map(|m| 0.02 * m as f64).collect(),
            (0..7).map(|m| if m % 2 == 0 { 1.0 } else { 0.0 }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn beta_vector_cases() {
        let consts = PhysicalConstants::default();
        let cfg = ArrayConfig::new(vec![0.0, 0.05], vec![1.0, 0.0]).unwrap();
        let low = beta_vector(&cfg, 0, 1e-9, &consts).unwrap();
        assert!(low
            .iter()
            .all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        assert_eq!(
            beta_vector(&cfg, 3, 5000.0, &consts).unwrap()[0].norm(),
            0.0
        );
        let omega = angular_frequency(1000.0);
        let v = beta_vector(&cfg, 1, omega, &consts).unwrap()[1];
        let z = 2.0 * PI * 1000.0 * 0.05 / 343.0;
        assert_eq!(v.re, 0.0);
        assert_abs_diff_eq!(v.im, specfun::bessel_j(1, z).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn approx_beampattern_edge_cases() {
        let consts = PhysicalConstants::default();
        let cfg = lsa_ii();
        let zero = vec![Complex64::new(0.0, 0.0); 7];
        assert_eq!(
            approx_beampattern(&zero, &cfg, 0.3, 5000.0, 4, &consts).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        // Λ₁ = 0: sin θ term vanishes, so θ and −θ agree
        let omni = ArrayConfig::new(vec![0.0, 0.03, 0.07], vec![1.0; 3]).unwrap();
        let h = vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(1.0, 0.0),
        ];
        let a = approx_beampattern(&h, &omni, 0.8, 8000.0, 3, &consts).unwrap();
        let b = approx_beampattern(&h, &omni, -0.8, 8000.0, 3, &consts).unwrap();
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn assemble_shape_and_blocks() {
        let consts = PhysicalConstants::default();
        let spec = IdpSpec::supercardioid();
        let sys = assemble_system(&lsa_ii(), &spec, 0.0, 6000.0, 2, &consts).unwrap();
        assert_eq!(sys.theta_matrix.rows(), 6);
        assert_eq!(sys.theta_matrix.cols(), 7);
        assert!(sys.rhs[3..].iter().all(|v| v.norm() == 0.0));

        let omni =
            ArrayConfig::new((0..6).map(|m| 0.02 * m as f64).collect(), vec![1.0; 6]).unwrap();
        let sys = assemble_system(&omni, &spec, 1.0, 6000.0, 2, &consts).unwrap();
        for i in 3..6 {
            assert!(sys.theta_matrix.row(i).iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn rhs_padding() {
        let spec = IdpSpec::supercardioid();
        let coeffs = expand_idp(&spec, PI / 3.0);
        let rhs = design_rhs(&coeffs, 4).unwrap();
        assert_eq!(rhs.len(), 10);
        assert!(rhs[3..5].iter().all(|v| v.norm() == 0.0));
        assert!(rhs[7..].iter().all(|v| v.norm() == 0.0));
        assert_eq!(rhs[5].re, coeffs.eta_tilde(0));
        assert_eq!(rhs[6].re, coeffs.eta_tilde(1));
    }

    #[test]
    fn dimension_errors() {
        let consts = PhysicalConstants::default();
        let spec = IdpSpec::supercardioid();
        let five =
            ArrayConfig::new((0..5).map(|m| 0.02 * m as f64).collect(), vec![0.5; 5]).unwrap();
        assert!(matches!(
            assemble_system(&five, &spec, 0.0, 1000.0, 2, &consts),
            Err(Error::UnderDetermined { required: 6, .. })
        ));
        assert!(matches!(
            assemble_system(&lsa_ii(), &spec, 0.0, 1000.0, 1, &consts),
            Err(Error::TruncationTooSmall {
                truncation: 1,
                order: 2
            })
        ));
    }

    #[test]
    fn lsa_ii_at_one_kilohertz_is_consistent_and_distortionless() {
        let consts = PhysicalConstants::default();
        let spec = IdpSpec::supercardioid();
        let omega = angular_frequency(1000.0);
        let ts = PI / 3.0;
        let sys = assemble_system(&lsa_ii(), &spec, ts, omega, 2, &consts).unwrap();
        let h = solve_filter(&sys, 0.0).unwrap();
        let rhs_norm: f64 = sys.rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let residual: f64 = (0..sys.theta_matrix.rows())
            .map(|i| (dot_conj_rows(sys.theta_matrix.row(i), &h) - sys.rhs[i]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(residual <= 1e-10 * rhs_norm, "residual {residual}");
        // the truncated series is exactly distortionless; the true response
        // differs by the truncation residual
        let approx = approx_beampattern(&h, &lsa_ii(), ts, omega, 2, &consts).unwrap();
        assert!(
            (approx - Complex64::new(1.0, 0.0)).norm() < 1e-10,
            "{approx}"
        );
        let b = beampattern(&h, &lsa_ii(), ts, omega, &consts).unwrap();
        assert!((b.norm() - 1.0).abs() < 0.1, "|B(θ_s)| = {}", b.norm());
    }

    fn dot_conj_rows(row: &[Complex64], h: &[Complex64]) -> Complex64 {
        row.iter().zip(h).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn bank_on_single_point_matches_solve() {
        let spec = IdpSpec::supercardioid();
        let settings = DesignSettings::for_spec(&spec);
        let grid = DesignGrid::new(vec![1500.0], vec![0.7], 64).unwrap();
        let bank = design_bank(&lsa_ii(), &spec, &grid, &settings).unwrap();
        let sys = assemble_system(
            &lsa_ii(),
            &spec,
            0.7,
            angular_frequency(1500.0),
            2,
            &settings.consts,
        )
        .unwrap();
        let h = solve_filter(&sys, settings.regularization).unwrap();
        assert_eq!(bank.filters.len(), 1);
        assert_eq!(bank.get(0, 0).unwrap(), h.as_slice());
        assert!(bank.get(0, 1).is_none());
    }

    #[test]
    fn bank_errors_carry_grid_point() {
        let spec = IdpSpec::supercardioid();
        let mut settings = DesignSettings::for_spec(&spec);
        settings.regularization = 0.0;
        let omni =
            ArrayConfig::new((0..6).map(|m| 0.02 * m as f64).collect(), vec![1.0; 6]).unwrap();
        let grid = DesignGrid::new(vec![1500.0], vec![0.7], 64).unwrap();
        let err = design_bank(&omni, &spec, &grid, &settings).unwrap_err();
        assert!(matches!(err, Error::AtGridPoint { frequency_hz, .. } if frequency_hz == 1500.0));
        assert!(matches!(err.root(), Error::RankDeficient { .. }));
    }
}
