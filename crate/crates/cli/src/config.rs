use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Deserialize;

use lj_homographic::{Family, LambdaDomain, PotentialParams, Tolerances};

use crate::exit::Exit;

/// Flags shared by every verb. Each one overrides the matching key of
/// `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Attractive exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Repulsive exponent, larger than alpha.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Number of ring bodies.
    #[arg(long = "n", value_name = "N")]
    pub n_ring: Option<usize>,
    /// Configuration family: 2N or 3N.
    #[arg(long)]
    pub family: Option<Family>,
    /// Shape parameter (pole-to-ring distance over pole half-distance).
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_max: Option<f64>,
    /// Sweep increment in lambda.
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// Radial energy.
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Output sample spacing.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Write the data (CSV, or the report for report-only verbs) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the settings above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
    /// Accept 1 < lambda < 2 and skip the existence thresholds.
    #[arg(long)]
    pub exploratory: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    beta: Option<f64>,
    n_ring: Option<usize>,
    family: Option<Family>,
    lambda: Option<f64>,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    step: Option<f64>,
    h: Option<f64>,
    t_end: Option<f64>,
    dt: Option<f64>,
    output_path: Option<PathBuf>,
    tolerance_overrides: Option<BTreeMap<String, f64>>,
    exploratory: Option<bool>,
}

/// Validated settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: PotentialParams,
    pub n_ring: usize,
    pub family: Family,
    pub lambda: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub step: Option<f64>,
    pub h: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub domain: LambdaDomain,
}

fn finite(field: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !x.is_finite() => Err(Exit::invalid(format!("{field}: must be finite, got {x}")).into()),
        _ => Ok(v),
    }
}

fn positive(field: &str, v: Option<f64>) -> Result<Option<f64>> {
    match finite(field, v)? {
        Some(x) if x <= 0.0 => Err(Exit::invalid(format!("{field}: must be positive, got {x}")).into()),
        v => Ok(v),
    }
}

impl RunConfig {
    pub fn resolve(args: RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Exit::invalid(format!("config: cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| Exit::invalid(format!("config: {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };

        let alpha = finite("alpha", args.alpha.or(file.alpha))?.unwrap_or(6.0);
        let beta = finite("beta", args.beta.or(file.beta))?.unwrap_or(12.0);
        let params =
            PotentialParams::new(alpha, beta).map_err(|e| Exit::invalid(format!("alpha/beta: {e}")))?;
        let n_ring = args.n_ring.or(file.n_ring).unwrap_or(2);
        if n_ring < 2 {
            return Err(Exit::invalid(format!("n: ring needs at least 2 bodies, got {n_ring}")).into());
        }

        let mut tolerances = Tolerances::default();
        let mut overrides = file.tolerance_overrides.unwrap_or_default();
        for item in &args.tol {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Exit::invalid(format!("tol: expected KEY=VALUE, got {item:?}")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Exit::invalid(format!("tol: {key}: not a number: {value:?}")))?;
            overrides.insert(key.trim().to_string(), value);
        }
        for (key, value) in &overrides {
            tolerances
                .set(key, *value)
                .map_err(|e| Exit::invalid(format!("tol: {e}")))?;
        }

        let cfg = Self {
            params,
            n_ring,
            family: args.family.or(file.family).unwrap_or(Family::TwoPlusN),
            lambda: finite("lambda", args.lambda.or(file.lambda))?,
            lambda_min: finite("lambda_min", args.lambda_min.or(file.lambda_min))?,
            lambda_max: finite("lambda_max", args.lambda_max.or(file.lambda_max))?,
            step: positive("step", args.step.or(file.step))?,
            h: finite("h", args.h.or(file.h))?,
            t_end: positive("t_end", args.t_end.or(file.t_end))?,
            dt: positive("dt", args.dt.or(file.dt))?,
            output_path: args.out.or(file.output_path),
            tolerances,
            domain: if args.exploratory || file.exploratory.unwrap_or(false) {
                LambdaDomain::Exploratory
            } else {
                LambdaDomain::Proven
            },
        };
        if let (Some(t), Some(dt)) = (cfg.t_end, cfg.dt) {
            if dt > t {
                return Err(Exit::invalid(format!("dt: {dt} exceeds t_end = {t}")).into());
            }
        }
        Ok(cfg)
    }

    /// `lambda`, checked against the active domain.
    pub fn lambda(&self) -> Result<f64> {
        let l = self
            .lambda
            .ok_or_else(|| Exit::invalid("lambda: required for this command".to_string()))?;
        self.domain
            .check(l)
            .map_err(|e| Exit::invalid(format!("lambda: {e}")))?;
        Ok(l)
    }

    /// The sweep grid `lambda_min + i step`, endpoints included.
    pub fn lambda_grid(&self) -> Result<Vec<f64>> {
        let missing = |f: &str| Exit::invalid(format!("{f}: required for sweep"));
        let lo = self.lambda_min.ok_or_else(|| missing("lambda_min"))?;
        let hi = self.lambda_max.ok_or_else(|| missing("lambda_max"))?;
        let step = self.step.ok_or_else(|| missing("step"))?;
        if hi < lo {
            return Err(Exit::invalid(format!("lambda_max: {hi} is below lambda_min = {lo}")).into());
        }
        self.domain
            .check(lo)
            .map_err(|e| Exit::invalid(format!("lambda_min: {e}")))?;
        let count = ((hi - lo) / step).round();
        if count > 1e7 {
            return Err(Exit::invalid(format!("step: {step} gives more than 1e7 rows")).into());
        }
        Ok((0..=count as usize).map(|i| lo + i as f64 * step).collect())
    }
}
