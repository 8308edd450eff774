use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use superarray_core::beamformer::design_bank;
use superarray_core::evaluation::{
    compare, design_point, sweep_frequency, sweep_steering, to_db, BaselineCatalog, Verdict,
};
use superarray_core::ga::Optimizer;
use superarray_core::{ArrayConfig, Complex64};

use crate::checkpoint::{history_csv, Checkpoint, CHECKPOINT_VERSION};
use crate::config::{Resolved, RunConfig};
use crate::error::{CliError, Result};
use crate::geometry;
use crate::output::{self, fingerprint, sig9};

/// Parsed, normalized and validated configuration plus the canonical form
/// that feeds fingerprints.
pub struct Loaded {
    pub raw: RunConfig,
    pub resolved: Resolved,
}

pub fn load_config(path: &Path, regularization: Option<f64>) -> Result<Loaded> {
    let mut raw = RunConfig::load(path)?;
    if regularization.is_some() {
        raw.solver.regularization = regularization;
    }
    raw.apply_env()?;
    raw.normalize()?;
    let resolved = raw.clone().resolve()?;
    Ok(Loaded { raw, resolved })
}

#[derive(Serialize)]
struct Inputs<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    args: T,
}

/// Output locations do not shape results, so they stay out of fingerprints.
fn canonical(raw: &RunConfig) -> RunConfig {
    let mut c = raw.clone();
    c.io = Default::default();
    c
}

fn steering_rad(deg: f64, flag: &str) -> Result<f64> {
    if !(0.0..360.0).contains(&deg) {
        return Err(CliError::Config(format!(
            "{flag}: {deg} is outside [0, 360)"
        )));
    }
    Ok(deg.to_radians())
}

fn pairs(h: &[Complex64]) -> Vec<[f64; 2]> {
    h.iter().map(|c| [c.re, c.im]).collect()
}

pub struct DesignArgs {
    pub geometry: PathBuf,
    pub theta_s_deg: f64,
    pub frequency_hz: f64,
    pub out: Option<PathBuf>,
    pub bank: Option<PathBuf>,
}

pub fn design(loaded: &Loaded, args: &DesignArgs) -> Result<String> {
    let r = &loaded.resolved;
    let cfg = geometry::load(&args.geometry)?;
    let theta_s = steering_rad(args.theta_s_deg, "--theta-s")?;
    if !(args.frequency_hz.is_finite() && args.frequency_hz > 0.0) {
        return Err(CliError::Config(format!(
            "--freq: {} must be a positive frequency",
            args.frequency_hz
        )));
    }
    let fp = fingerprint(&Inputs {
        command: "design",
        config: &canonical(&loaded.raw),
        args: json!({
            "geometry": geometry::to_elements(&cfg),
            "theta_s_deg": args.theta_s_deg,
            "frequency_hz": args.frequency_hz,
        }),
    });
    let m = design_point(
        &cfg,
        r.spec(),
        theta_s,
        args.frequency_hz,
        r.grid().eval_angle_count(),
        r.settings(),
    )?;
    let (df_db, wng_db) = (to_db(m.df), to_db(m.wng));
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| r.output_dir.join("filter.json"));
    output::write_json(
        &out,
        &json!({
            "fingerprint": fp,
            "frequency_hz": args.frequency_hz,
            "theta_s_deg": args.theta_s_deg,
            "df_db": df_db,
            "wng_db": wng_db,
            "approx_error": m.approx_error,
            "filter": pairs(&m.filter),
        }),
    )?;
    if let Some(bank_path) = &args.bank {
        let bank = design_bank(&cfg, r.spec(), r.grid(), r.settings())?;
        let steerings_deg: Vec<f64> = bank.steerings_rad.iter().map(|t| t.to_degrees()).collect();
        let filters: Vec<Vec<[f64; 2]>> = bank.filters.iter().map(|h| pairs(h)).collect();
        output::write_json(
            bank_path,
            &json!({
                "fingerprint": fp,
                "frequencies_hz": bank.frequencies_hz,
                "steerings_deg": steerings_deg,
                "layout": "filters[frequency_index * steering_count + steering_index]",
                "filters": filters,
            }),
        )?;
    }
    output::log_run(&r.output_dir, "design", &fp);
    Ok(format!(
        "df_db={} wng_db={} approx_error={}",
        sig9(df_db),
        sig9(wng_db),
        sig9(m.approx_error)
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Freq,
    Steering,
}

pub struct SweepArgs {
    pub geometry: PathBuf,
    pub axis: Axis,
    pub theta_s_deg: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn sweep(loaded: &Loaded, args: &SweepArgs) -> Result<PathBuf> {
    let r = &loaded.resolved;
    let cfg = geometry::load(&args.geometry)?;
    let fp = fingerprint(&Inputs {
        command: "sweep",
        config: &canonical(&loaded.raw),
        args: json!({
            "geometry": geometry::to_elements(&cfg),
            "axis": args.axis,
            "theta_s_deg": args.theta_s_deg,
        }),
    });
    let (rows, meta) = match args.axis {
        Axis::Freq => {
            let deg = args.theta_s_deg.ok_or_else(|| {
                CliError::Config("--theta-s is required for a frequency sweep".into())
            })?;
            let result = sweep_frequency(
                &cfg,
                r.spec(),
                steering_rad(deg, "--theta-s")?,
                r.grid(),
                r.settings(),
            )?;
            let meta = vec![
                ("axis".to_string(), "frequency_hz".to_string()),
                ("theta_s_deg".to_string(), sig9(deg)),
            ];
            (result.rows, meta)
        }
        Axis::Steering => {
            let mut result = sweep_steering(&cfg, r.spec(), r.grid(), r.settings())?;
            for row in &mut result.rows {
                row.axis_value = row.axis_value.to_degrees();
            }
            let meta = vec![
                ("axis".to_string(), "theta_s_deg".to_string()),
                (
                    "band_average".to_string(),
                    "arithmetic mean of dB values over the frequency grid".to_string(),
                ),
            ];
            (result.rows, meta)
        }
    };
    let name = match args.axis {
        Axis::Freq => "sweep_freq.csv",
        Axis::Steering => "sweep_steering.csv",
    };
    let out = args.out.clone().unwrap_or_else(|| r.output_dir.join(name));
    output::write(&out, &output::sweep_csv(&fp, &meta, &rows))?;
    output::log_run(&r.output_dir, "sweep", &fp);
    Ok(out)
}

pub struct OptimizeArgs {
    pub seed: Option<u64>,
    pub resume: Option<PathBuf>,
    pub inject: Vec<PathBuf>,
    pub baseline: Vec<String>,
    /// Stop once this many generations have been evaluated.
    pub stop_after: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct OptimizeSummary {
    pub generations_done: usize,
    pub finished: bool,
    pub fitness: f64,
    pub best: PathBuf,
    pub history: PathBuf,
}

fn baseline(name: &str) -> Result<ArrayConfig> {
    let catalog = BaselineCatalog::standard();
    catalog.get(name).cloned().ok_or_else(|| {
        let known: Vec<&str> = catalog.names().collect();
        CliError::Config(format!(
            "--baseline: unknown {name:?}, expected one of {known:?}"
        ))
    })
}

pub fn optimize(loaded: &Loaded, args: &OptimizeArgs) -> Result<OptimizeSummary> {
    let r = &loaded.resolved;
    let mut params = r.ga.clone();
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    let mut injected = Vec::new();
    for path in &args.inject {
        injected.push(geometry::load(path)?);
    }
    for name in &args.baseline {
        injected.push(baseline(name)?);
    }
    let mut config = canonical(&loaded.raw);
    config.ga.seed = params.seed;
    let injected_json: Vec<_> = injected.iter().map(geometry::to_elements).collect();
    let fp = fingerprint(&Inputs {
        command: "optimize",
        config: &config,
        args: json!({ "injected": injected_json }),
    });

    let mut opt = match &args.resume {
        Some(path) => {
            let state = Checkpoint::load(path, &fp)?;
            Optimizer::resume(params.clone(), &r.problem, state).map_err(|e| {
                CliError::Checkpoint {
                    path: path.clone(),
                    reason: e.to_string(),
                }
            })?
        }
        None => Optimizer::new(params.clone(), &r.problem, &injected)?,
    };

    let dir = &r.output_dir;
    let checkpoint_path = dir.join("checkpoint.json");
    let save = |opt: &Optimizer| {
        Checkpoint {
            schema_version: CHECKPOINT_VERSION,
            fingerprint: fp.clone(),
            state: opt.state().clone(),
        }
        .save(&checkpoint_path)
    };
    let limit = args.stop_after.unwrap_or(usize::MAX);
    while !opt.is_done() && opt.state().history.len() < limit {
        opt.advance();
        let stats = opt.state().history.last().expect("generation recorded");
        log::info!(
            "generation {}: best {:.6e} mean {:.6e}",
            stats.generation,
            stats.best,
            stats.mean
        );
        let done = opt.state().history.len();
        if r.checkpoint_interval > 0 && done % r.checkpoint_interval == 0 {
            save(&opt)?;
        }
    }
    let stopped_early = !opt.is_done();
    if stopped_early {
        save(&opt)?;
    }

    let outcome = opt.outcome();
    let best_path = dir.join("best_geometry.json");
    let history_path = dir.join("history.csv");
    output::write(&best_path, &geometry::to_json(&outcome.best))?;
    output::write(&history_path, &history_csv(&fp, &outcome.history))?;
    output::write_json(
        &dir.join("result.json"),
        &json!({
            "fingerprint": fp,
            "seed": params.seed,
            "fitness": outcome.fitness,
            "generations_done": outcome.history.len(),
            "finished": !stopped_early,
            "best": geometry::to_elements(&outcome.best),
        }),
    )?;
    output::log_run(dir, "optimize", &fp);
    Ok(OptimizeSummary {
        generations_done: outcome.history.len(),
        finished: !stopped_early,
        fitness: outcome.fitness,
        best: best_path,
        history: history_path,
    })
}

pub struct CompareArgs {
    pub geometry: Vec<PathBuf>,
    pub baseline: Vec<String>,
    pub out: Option<PathBuf>,
}

pub fn compare_cmd(loaded: &Loaded, args: &CompareArgs) -> Result<String> {
    let r = &loaded.resolved;
    let mut entries: Vec<(String, ArrayConfig)> = Vec::new();
    for path in &args.geometry {
        let cfg = geometry::load(path)?;
        r.problem
            .limits
            .check(&cfg)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        entries.push((stem, cfg));
    }
    for name in &args.baseline {
        entries.push((name.clone(), baseline(name)?));
    }
    if entries.len() < 2 {
        return Err(CliError::Config(format!(
            "compare needs at least two geometries, got {}",
            entries.len()
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for (label, _) in &mut entries {
        let base = label.clone();
        let mut k = 2;
        while !seen.insert(label.clone()) {
            *label = format!("{base}#{k}");
            k += 1;
        }
    }
    let fp = fingerprint(&Inputs {
        command: "compare",
        config: &canonical(&loaded.raw),
        args: entries
            .iter()
            .map(|(l, c)| json!({ "label": l, "geometry": geometry::to_elements(c) }))
            .collect::<Vec<_>>(),
    });
    let result = compare(&entries, r.spec(), r.grid(), r.settings())?;
    let mut csv = format!(
        "# fingerprint={fp}\n# band_average=arithmetic mean of dB values over the frequency and steering grid\n\
         label,overall_error,mean_df_db,mean_wng_db\n"
    );
    for row in &result.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.label,
            sig9(row.overall_error),
            sig9(row.mean_df_db),
            sig9(row.mean_wng_db)
        ));
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| r.output_dir.join("comparison.csv"));
    output::write(&out, &csv)?;
    output::log_run(&r.output_dir, "compare", &fp);
    Ok(match result.verdict {
        Verdict::Best(label) => format!("verdict: {label} has the lowest overall error"),
        Verdict::Tie(labels) => format!("verdict: tie between {}", labels.join(", ")),
    })
}
