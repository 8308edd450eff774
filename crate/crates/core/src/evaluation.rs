//! Metric sweeps over frequency and steering, polar cuts, baselines and
//! side-by-side comparisons.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{self, ArrayConfig, PhysicalConstants, SteeringContext};
use crate::beamformer::{DesignSettings, FrequencyDesign};
use crate::error::{Error, Result};
use crate::idp::{expand_idp, idp_value, IdpSpec};
use crate::metrics::{overall_error, AngleTable, DesignGrid};
use crate::par;

/// Minimum number of angles in a polar cut.
pub const MIN_CUT_ANGLES: usize = 72;

/// Four omnidirectional and three dipole elements alternating `O-B-O-B-O-B-O`
/// at 0.02 m spacing starting at the origin.
pub fn lsa_ii() -> ArrayConfig {
    ArrayConfig::new(
        (0..7).map(|m| 0.02 * m as f64).collect(),
        (0..7).map(|m| if m % 2 == 0 { 1.0 } else { 0.0 }).collect(),
    )
    .expect("LSA-II is a valid configuration")
}

/// `elements` omnidirectional microphones at a constant spacing from the origin.
pub fn uniform_omni(elements: usize, spacing: f64) -> Result<ArrayConfig> {
    ArrayConfig::new(
        (0..elements).map(|m| spacing * m as f64).collect(),
        alloc::vec![1.0; elements],
    )
}

/// Named reference configurations.
#[derive(Debug, Clone, Default)]
pub struct BaselineCatalog {
    entries: BTreeMap<String, ArrayConfig>,
}

impl BaselineCatalog {
    /// `lsa-ii` and `uniform-omni` (7 elements, 0.02 m).
    pub fn standard() -> Self {
        let mut catalog = BaselineCatalog::default();
        catalog.insert("lsa-ii", lsa_ii());
        catalog.insert(
            "uniform-omni",
            uniform_omni(7, 0.02).expect("uniform array is valid"),
        );
        catalog
    }

    pub fn insert(&mut self, name: impl Into<String>, cfg: ArrayConfig) {
        self.entries.insert(name.into(), cfg);
    }

    pub fn get(&self, name: &str) -> Option<&ArrayConfig> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Hz
    Frequency,
    /// radians
    Steering,
    /// radians
    Angle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub df_db: f64,
    pub wng_db: f64,
    pub approx_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub label: String,
    pub rows: Vec<SweepRow>,
    /// Parameters held fixed during the sweep, as `(name, value)`.
    pub fixed: Vec<(String, String)>,
}

impl SweepResult {
    pub fn mean(&self) -> SweepRow {
        let n = self.rows.len() as f64;
        let sum = |f: fn(&SweepRow) -> f64| self.rows.iter().map(f).sum::<f64>() / n;
        SweepRow {
            axis_value: f64::NAN,
            df_db: sum(|r| r.df_db),
            wng_db: sum(|r| r.wng_db),
            approx_error: sum(|r| r.approx_error),
        }
    }
}

pub fn to_db(power_ratio: f64) -> f64 {
    10.0 * libm::log10(power_ratio)
}

/// DF, WNG, approximation error and the filter at one design point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMetrics {
    pub frequency_hz: f64,
    pub theta_s: f64,
    pub df: f64,
    pub wng: f64,
    pub approx_error: f64,
    pub filter: Vec<Complex64>,
}

fn frequency_metrics(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    frequency_hz: f64,
    steerings: &[f64],
    grid: &DesignGrid,
    settings: &DesignSettings,
) -> Result<Vec<PointMetrics>> {
    let at = |e: Error| e.at(frequency_hz, f64::NAN);
    let design = FrequencyDesign::new(cfg, frequency_hz, settings).map_err(at)?;
    let table = AngleTable::new(cfg, grid, design.omega, &settings.consts);
    let gamma = array::coherence_matrix(cfg, design.omega, &settings.consts).map_err(at)?;
    steerings
        .iter()
        .map(|&ts| {
            let at = |e: Error| e.at(frequency_hz, ts);
            let coeffs = expand_idp(spec, ts);
            let h = design.filter(&coeffs).map_err(at)?;
            let ctx = SteeringContext::new(ts, design.omega).map_err(at)?;
            let df = array::df_with(&h, cfg, &ctx, &settings.consts, &gamma).map_err(at)?;
            let wng = array::wng(&h, cfg, &ctx, &settings.consts).map_err(at)?;
            Ok(PointMetrics {
                frequency_hz,
                theta_s: ts,
                df,
                wng,
                approx_error: table.error(&h, spec, ts),
                filter: h,
            })
        })
        .collect()
}

/// Metrics at a single frequency and steering direction.
pub fn design_point(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    theta_s: f64,
    frequency_hz: f64,
    eval_angle_count: usize,
    settings: &DesignSettings,
) -> Result<PointMetrics> {
    let grid = DesignGrid::new(
        alloc::vec![frequency_hz],
        alloc::vec![theta_s],
        eval_angle_count,
    )?;
    grid.check_resolution(spec.order(), settings.truncation)?;
    let mut rows = frequency_metrics(cfg, spec, frequency_hz, &[theta_s], &grid, settings)?;
    Ok(rows.remove(0))
}

/// DF, WNG and approximation error against frequency at fixed steering.
pub fn sweep_frequency(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    theta_s: f64,
    grid: &DesignGrid,
    settings: &DesignSettings,
) -> Result<SweepResult> {
    grid.check_resolution(spec.order(), settings.truncation)?;
    let rows = par::map(grid.frequencies_hz(), |&f| {
        frequency_metrics(cfg, spec, f, &[theta_s], grid, settings)
    });
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let p = &r?[0];
        out.push(SweepRow {
            axis_value: p.frequency_hz,
            df_db: to_db(p.df),
            wng_db: to_db(p.wng),
            approx_error: p.approx_error,
        });
    }
    Ok(SweepResult {
        axis: SweepAxis::Frequency,
        label: String::new(),
        rows: out,
        fixed: alloc::vec![("theta_s_rad".to_string(), format!("{theta_s}"))],
    })
}

/// Band-averaged DF and WNG (arithmetic mean of dB values over the grid's
/// frequencies) and mean approximation error, against steering direction.
pub fn sweep_steering(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    grid: &DesignGrid,
    settings: &DesignSettings,
) -> Result<SweepResult> {
    grid.check_resolution(spec.order(), settings.truncation)?;
    let steerings = grid.steerings_rad();
    let per_frequency = par::map(grid.frequencies_hz(), |&f| {
        frequency_metrics(cfg, spec, f, steerings, grid, settings)
    });
    let mut acc = alloc::vec![(0.0, 0.0, 0.0); steerings.len()];
    for points in per_frequency {
        for (slot, p) in acc.iter_mut().zip(points?) {
            slot.0 += to_db(p.df);
            slot.1 += to_db(p.wng);
            slot.2 += p.approx_error;
        }
    }
    let nf = grid.frequencies_hz().len() as f64;
    let rows = steerings
        .iter()
        .zip(acc)
        .map(|(&ts, (df, wng, err))| SweepRow {
            axis_value: ts,
            df_db: df / nf,
            wng_db: wng / nf,
            approx_error: err / nf,
        })
        .collect();
    Ok(SweepResult {
        axis: SweepAxis::Steering,
        label: String::new(),
        rows,
        fixed: alloc::vec![(
            "band_average".to_string(),
            "arithmetic mean of dB values over frequency grid".to_string()
        )],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutRow {
    pub theta: f64,
    pub magnitude: f64,
    pub idp: f64,
}

/// Polar cut of `|B|` for a given filter with the ideal pattern alongside.
pub fn beampattern_cut_for_filter(
    h: &[Complex64],
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    theta_s: f64,
    omega: f64,
    n_angles: usize,
    consts: &PhysicalConstants,
) -> Result<Vec<CutRow>> {
    if n_angles < MIN_CUT_ANGLES {
        return Err(Error::InvalidArgument(format!(
            "polar cut needs at least {MIN_CUT_ANGLES} angles, got {n_angles}"
        )));
    }
    (0..n_angles)
        .map(|i| {
            let theta = TAU * i as f64 / n_angles as f64;
            let b = array::beampattern(h, cfg, theta, omega, consts)?;
            Ok(CutRow {
                theta,
                magnitude: b.norm(),
                idp: idp_value(spec, theta_s, theta),
            })
        })
        .collect()
}

/// Designs the filter for `(θ_s, ω)` and returns its polar cut.
pub fn beampattern_cut(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    theta_s: f64,
    omega: f64,
    n_angles: usize,
    settings: &DesignSettings,
) -> Result<Vec<CutRow>> {
    let design = FrequencyDesign::new(cfg, omega / TAU, settings)?;
    let h = design.filter(&expand_idp(spec, theta_s))?;
    beampattern_cut_for_filter(&h, cfg, spec, theta_s, omega, n_angles, &settings.consts)
}

/// Angle of the largest `|B|` in a cut.
pub fn mainlobe_direction(cut: &[CutRow]) -> Option<f64> {
    cut.iter()
        .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
        .map(|r| r.theta)
}

/// Band means of DF (dB), WNG (dB) and approximation error at one steering.
pub fn band_mean(
    cfg: &ArrayConfig,
    spec: &IdpSpec,
    theta_s: f64,
    grid: &DesignGrid,
    settings: &DesignSettings,
) -> Result<SweepRow> {
    let mut mean = sweep_frequency(cfg, spec, theta_s, grid, settings)?.mean();
    mean.axis_value = theta_s;
    Ok(mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub overall_error: f64,
    pub mean_df_db: f64,
    pub mean_wng_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    /// Strictly lowest overall error.
    Best(String),
    /// Labels sharing the lowest overall error.
    Tie(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub verdict: Verdict,
}

/// Overall error plus grid-mean DF/WNG (dB) for each configuration, and the
/// configuration with the lowest error.
pub fn compare(
    entries: &[(String, ArrayConfig)],
    spec: &IdpSpec,
    grid: &DesignGrid,
    settings: &DesignSettings,
) -> Result<Comparison> {
    if entries.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "comparison needs at least two configurations, got {}",
            entries.len()
        )));
    }
    let mut rows = Vec::with_capacity(entries.len());
    for (label, cfg) in entries {
        let err = overall_error(cfg, spec, grid, settings)?;
        let sweep = sweep_steering(cfg, spec, grid, settings)?.mean();
        rows.push(ComparisonRow {
            label: label.clone(),
            overall_error: err,
            mean_df_db: sweep.df_db,
            mean_wng_db: sweep.wng_db,
        });
    }
    let lowest = rows
        .iter()
        .map(|r| r.overall_error)
        .fold(f64::INFINITY, f64::min);
    let winners: Vec<String> = rows
        .iter()
        .filter(|r| r.overall_error <= lowest * (1.0 + 1e-12))
        .map(|r| r.label.clone())
        .collect();
    let verdict = if winners.len() == 1 {
        Verdict::Best(winners.into_iter().next().unwrap())
    } else {
        Verdict::Tie(winners)
    };
    Ok(Comparison { rows, verdict })
}
