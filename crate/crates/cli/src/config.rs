//! Run configuration file. Angles are degrees here and radians everywhere
//! past [`RunConfig::resolve`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use superarray_core::ga::GaParams;
use superarray_core::{
    ArrayLimits, DesignGrid, DesignSettings, IdpSpec, OptimizationProblem, PhysicalConstants,
};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Overrides `problem.speed_of_sound_m_s`.
pub const SPEED_OF_SOUND_ENV: &str = "SUPERARRAY_SPEED_OF_SOUND";

/// Accepted deviation of `sum(alpha)` from 1 before renormalization.
pub const ALPHA_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub problem: ProblemBlock,
    pub idp: IdpBlock,
    pub grid: GridBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub ga: GaBlock,
    #[serde(default)]
    pub io: IoBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub elements: usize,
    pub min_spacing_m: f64,
    pub aperture_m: f64,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound_m_s: f64,
}

fn default_speed_of_sound() -> f64 {
    PhysicalConstants::default().speed_of_sound
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdpBlock {
    pub order: usize,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub f_step_hz: f64,
    pub theta_s_lo_deg: f64,
    pub theta_s_hi_deg: f64,
    pub theta_s_step_deg: f64,
    pub eval_angle_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    /// Defaults to the pattern order.
    pub truncation: Option<usize>,
    pub regularization: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaBlock {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaBlock {
    fn default() -> Self {
        let p = GaParams::default();
        GaBlock {
            population_size: p.population_size,
            generations: p.generations,
            crossover_prob: p.crossover_prob,
            mutation_prob: p.mutation_prob,
            tournament_size: p.tournament_size,
            elite_count: p.elite_count,
            seed: p.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoBlock {
    pub output_dir: PathBuf,
    /// Generations between checkpoints; 0 disables them.
    pub checkpoint_interval: usize,
}

impl Default for IoBlock {
    fn default() -> Self {
        IoBlock {
            output_dir: PathBuf::from("."),
            checkpoint_interval: 10,
        }
    }
}

/// Validated configuration in library types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub problem: OptimizationProblem,
    pub ga: GaParams,
    pub output_dir: PathBuf,
    pub checkpoint_interval: usize,
}

impl Resolved {
    pub fn spec(&self) -> &IdpSpec {
        &self.problem.spec
    }

    pub fn grid(&self) -> &DesignGrid {
        &self.problem.grid
    }

    pub fn settings(&self) -> &DesignSettings {
        &self.problem.settings
    }
}

fn field(name: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {msg}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(field(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", cfg.schema_version),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Applies the speed-of-sound environment override, if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SPEED_OF_SOUND_ENV) {
            self.problem.speed_of_sound_m_s = raw
                .trim()
                .parse()
                .map_err(|e| field(SPEED_OF_SOUND_ENV, format!("{raw:?}: {e}")))?;
        }
        Ok(())
    }

    /// Sums `alpha` to one and checks every block against the library's
    /// invariants.
    pub fn normalize(&mut self) -> Result<()> {
        let alpha = &mut self.idp.alpha;
        if alpha.len() != self.idp.order + 1 {
            return Err(field(
                "idp.alpha",
                format!(
                    "order {} needs {} coefficients, found {}",
                    self.idp.order,
                    self.idp.order + 1,
                    alpha.len()
                ),
            ));
        }
        if let Some(i) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(field(&format!("idp.alpha[{i}]"), "not a finite number"));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOLERANCE {
            return Err(field(
                "idp.alpha",
                format!("coefficients sum to {sum}, not 1"),
            ));
        }
        for a in alpha.iter_mut() {
            *a /= sum;
        }
        Ok(())
    }

    pub fn resolve(mut self) -> Result<Resolved> {
        self.apply_env()?;
        self.normalize()?;
        let p = &self.problem;
        let consts = PhysicalConstants::new(p.speed_of_sound_m_s)
            .map_err(|e| field("problem.speed_of_sound_m_s", e))?;
        let limits = ArrayLimits::new(p.min_spacing_m, p.aperture_m)
            .map_err(|e| field("problem.min_spacing_m/aperture_m", e))?;
        limits
            .check_capacity(p.elements)
            .map_err(|e| field("problem.elements", e))?;
        let spec = IdpSpec::new(self.idp.alpha.clone()).map_err(|e| field("idp.alpha", e))?;

        let g = &self.grid;
        for (name, v) in [
            ("grid.theta_s_lo_deg", g.theta_s_lo_deg),
            ("grid.theta_s_hi_deg", g.theta_s_hi_deg),
        ] {
            if !(0.0..360.0).contains(&v) {
                return Err(field(name, format!("{v} is outside [0, 360)")));
            }
        }
        let grid = DesignGrid::uniform(
            (g.f_lo_hz, g.f_hi_hz, g.f_step_hz),
            (
                g.theta_s_lo_deg.to_radians(),
                g.theta_s_hi_deg.to_radians(),
                g.theta_s_step_deg.to_radians(),
            ),
            g.eval_angle_count,
        )
        .map_err(|e| field("grid", e))?;

        let mut settings = DesignSettings::for_spec(&spec);
        settings.consts = consts;
        if let Some(t) = self.solver.truncation {
            settings.truncation = t;
        }
        if let Some(r) = self.solver.regularization {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(field(
                    "solver.regularization",
                    format!("{r} must be finite and ≥ 0"),
                ));
            }
            settings.regularization = r;
        }
        if settings.truncation < spec.order() {
            return Err(field(
                "solver.truncation",
                format!(
                    "{} is below the pattern order {}",
                    settings.truncation,
                    spec.order()
                ),
            ));
        }
        grid.check_resolution(spec.order(), settings.truncation)
            .map_err(|e| field("grid.eval_angle_count", e))?;

        let b = &self.ga;
        let ga = GaParams {
            population_size: b.population_size,
            generations: b.generations,
            crossover_prob: b.crossover_prob,
            mutation_prob: b.mutation_prob,
            tournament_size: b.tournament_size,
            elite_count: b.elite_count,
            seed: b.seed,
        };
        ga.validate().map_err(|e| field("ga", e))?;

        Ok(Resolved {
            problem: OptimizationProblem {
                elements: p.elements,
                limits,
                spec,
                grid,
                settings,
            },
            ga,
            output_dir: self.io.output_dir,
            checkpoint_interval: self.io.checkpoint_interval,
        })
    }
}
