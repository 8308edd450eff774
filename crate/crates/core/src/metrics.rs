//! Beampattern approximation error against the ideal pattern, per steering
//! direction and averaged over a frequency × steering grid.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{manifold, ArrayConfig, PhysicalConstants};
use crate::beamformer::{DesignSettings, FrequencyDesign};
use crate::error::{Error, Result};
use crate::idp::{expand_idp, idp_value, IdpSpec};
use crate::linalg;
use crate::par;

/// Discretization of the band, the steering range and the angle integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignGrid {
    frequencies_hz: Vec<f64>,
    steerings_rad: Vec<f64>,
    eval_angle_count: usize,
}

fn inclusive_steps(lo: f64, hi: f64, step: f64, what: &str) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || hi < lo {
        return Err(Error::InvalidConfig(format!(
            "{what}: need finite lo ≤ hi, got [{lo}, {hi}]"
        )));
    }
    if hi == lo {
        return Ok(alloc::vec![lo]);
    }
    if !(step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "{what}: step must be positive, got {step}"
        )));
    }
    let count = libm::floor((hi - lo) / step + 1e-9) as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

impl DesignGrid {
    pub fn new(
        frequencies_hz: Vec<f64>,
        steerings_rad: Vec<f64>,
        eval_angle_count: usize,
    ) -> Result<Self> {
        if frequencies_hz.is_empty() || steerings_rad.is_empty() || eval_angle_count == 0 {
            return Err(Error::EmptyGrid);
        }
        if let Some(f) = frequencies_hz
            .iter()
            .find(|f| !(f.is_finite() && **f > 0.0))
        {
            return Err(Error::InvalidConfig(format!(
                "frequency {f} Hz is not positive"
            )));
        }
        if let Some(t) = steerings_rad.iter().find(|t| !(0.0..TAU).contains(*t)) {
            return Err(Error::InvalidConfig(format!(
                "steering angle {t} rad outside [0, 2π)"
            )));
        }
        if frequencies_hz.windows(2).any(|w| w[1] <= w[0])
            || steerings_rad.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidConfig(
                "grid axes must be strictly increasing".into(),
            ));
        }
        Ok(DesignGrid {
            frequencies_hz,
            steerings_rad,
            eval_angle_count,
        })
    }

    /// Evenly stepped axes, endpoints included when they fall on a step.
    /// Steering bounds are in radians.
    pub fn uniform(
        (f_lo, f_hi, f_step): (f64, f64, f64),
        (theta_lo, theta_hi, theta_step): (f64, f64, f64),
        eval_angle_count: usize,
    ) -> Result<Self> {
        DesignGrid::new(
            inclusive_steps(f_lo, f_hi, f_step, "frequency axis")?,
            inclusive_steps(theta_lo, theta_hi, theta_step, "steering axis")?,
            eval_angle_count,
        )
    }

    /// 200 Hz – 8 kHz every 100 Hz, steering 0° – 180° every 5°, 720 angles.
    pub fn standard() -> Self {
        DesignGrid::uniform((200.0, 8000.0, 100.0), (0.0, PI, PI / 36.0), 720)
            .expect("standard grid is valid")
    }

    /// 200 Hz – 8 kHz every 400 Hz, steering 0° – 180° every 15°, 720 angles.
    pub fn coarse() -> Self {
        DesignGrid::uniform((200.0, 8000.0, 400.0), (0.0, PI, PI / 12.0), 720)
            .expect("coarse grid is valid")
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn steerings_rad(&self) -> &[f64] {
        &self.steerings_rad
    }

    pub fn eval_angle_count(&self) -> usize {
        self.eval_angle_count
    }

    pub fn eval_angles(&self) -> impl Iterator<Item = f64> + '_ {
        let k = self.eval_angle_count as f64;
        (0..self.eval_angle_count).map(move |i| TAU * i as f64 / k)
    }

    pub fn with_frequencies(&self, frequencies_hz: Vec<f64>) -> Result<Self> {
        DesignGrid::new(
            frequencies_hz,
            self.steerings_rad.clone(),
            self.eval_angle_count,
        )
    }

    pub fn with_steerings(&self, steerings_rad: Vec<f64>) -> Result<Self> {
        DesignGrid::new(
            self.frequencies_hz.clone(),
            steerings_rad,
            self.eval_angle_count,
        )
    }

    /// The angle integrand is a trigonometric polynomial; require
    /// `K_θ ≥ 8(N + 𝒩)` samples.
    pub fn check_resolution(&self, order: usize, truncation: usize) -> Result<()> {
        let needed = 8 * (order + truncation);
        if self.eval_angle_count < needed {
            return Err(Error::InvalidConfig(format!(
                "{} evaluation angles is too coarse for order {order} and truncation \
                 {truncation}; need at least {needed}",
                self.eval_angle_count
            )));
        }
        Ok(())
    }
}

/// Manifold vectors at every evaluation angle for one frequency.
pub(crate) struct AngleTable {
    angles: Vec<f64>,
    manifolds: Vec<Vec<Complex64>>,
}

impl AngleTable {
    pub(crate) fn new(
        cfg: &ArrayConfig,
        grid: &DesignGrid,
        omega: f64,
        consts: &PhysicalConstants,
    ) -> Self {
        let angles: Vec<f64> = grid.eval_angles().collect();
        let manifolds = angles
            .iter()
            .map(|&t| manifold(cfg, t, omega, consts))
            .collect();
        AngleTable { angles, manifolds }
    }

    /// Mean of `|B(θ) − B_N(θ_s, θ)|²` over the table's angles.
    pub(crate) fn error(&self, h: &[Complex64], spec: &IdpSpec, theta_s: f64) -> f64 {
        let total: f64 = self
            .angles
            .iter()
            .zip(&self.manifolds)
            .map(|(&t, d)| {
                let b = linalg::dot_conj(h, d);
                (b - idp_value(spec, theta_s, t)).norm_sqr()
            })
            .sum();
        total / self.angles.len() as f64
    }
}

/// `(1/2π)∫|B[h, x, θ] − B_N(θ_s, θ)|² dθ` by the periodic trapezoid rule on
/// the grid's evaluation angles.
pub fn direction_error(
    h: &[Complex64],
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    theta_s: f64,
    omega: f64,
    grid: &DesignGrid,
    consts: &PhysicalConstants,
) -> Result<f64> {
    if h.len() != cfg.len() {
        return Err(Error::InvalidArgument(format!(
            "filter has {} taps, array has {} elements",
            h.len(),
            cfg.len()
        )));
    }
    Ok(AngleTable::new(cfg, grid, omega, consts).error(h, spec, theta_s))
}

/// Mean of [`direction_error`] over the frequency × steering grid, using the
/// minimum-norm filter at each point.
pub fn overall_error(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    grid: &DesignGrid,
    settings: &DesignSettings,
) -> Result<f64> {
    grid.check_resolution(spec.order(), settings.truncation)?;
    let coeffs: Vec<_> = grid
        .steerings_rad()
        .iter()
        .map(|&ts| expand_idp(spec, ts))
        .collect();
    let per_frequency = par::map(grid.frequencies_hz(), |&f| -> Result<f64> {
        let design = FrequencyDesign::new(cfg, f, settings).map_err(|e| e.at(f, f64::NAN))?;
        let table = AngleTable::new(cfg, grid, design.omega, &settings.consts);
        let mut sum = 0.0;
        for c in &coeffs {
            let h = design.filter(c).map_err(|e| e.at(f, c.theta_s))?;
            sum += table.error(&h, spec, c.theta_s);
        }
        Ok(sum)
    });
    let mut total = 0.0;
    for s in per_frequency {
        total += s?;
    }
    Ok(total / (grid.frequencies_hz().len() * coeffs.len()) as f64)
}
