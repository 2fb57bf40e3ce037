//! Run configuration: defaults, a flat `key = value` file, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use lieorbit::algebra::{Family, HPreset};
use lieorbit::numerics::{Tolerance, DEFAULT_ABS_EPS, DEFAULT_REL_EPS};
use lieorbit::orbit::RParam;

use crate::error::CliError;

pub const DEFAULT_ALGEBRA: &str = "sl2c";
pub const DEFAULT_R: &str = "0.1,0.5,1,2,10,100";

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` file; keys are the long flag names without dashes.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Algebra descriptor, e.g. sl2r, sl3c, so3.
    #[arg(long)]
    pub algebra: Option<String>,
    /// Chamber coefficients "a,b,..." or a preset: "regular", "wall:k".
    #[arg(long = "H")]
    pub h: Option<String>,
    /// Comma-separated deformation parameters; "inf" is allowed.
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_base: Option<usize>,
    #[arg(long)]
    pub n_fiber: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub abs_eps: Option<f64>,
    #[arg(long)]
    pub rel_eps: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algebra: Family,
    pub h_spec: HPreset,
    pub r_list: Vec<RParam>,
    pub seed: u64,
    pub n_base: usize,
    pub n_fiber: usize,
    pub tol: Tolerance,
    pub output_dir: PathBuf,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value '{v}' for {key}")))
}

/// Fills every unset field of `args` from the file.
fn merge_file(args: &mut ConfigArgs, path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key = value", path.display(), lineno + 1))
        })?;
        let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
        let key = key.replace('_', "-");
        match key.as_str() {
            "algebra" => {
                args.algebra.get_or_insert_with(|| value.to_string());
            }
            "H" | "h" => {
                args.h.get_or_insert_with(|| value.to_string());
            }
            "r" => {
                args.r.get_or_insert_with(|| value.to_string());
            }
            "seed" => {
                if args.seed.is_none() {
                    args.seed = Some(parse(&key, value)?);
                }
            }
            "n-base" => {
                if args.n_base.is_none() {
                    args.n_base = Some(parse(&key, value)?);
                }
            }
            "n-fiber" => {
                if args.n_fiber.is_none() {
                    args.n_fiber = Some(parse(&key, value)?);
                }
            }
            "out" => {
                args.out.get_or_insert_with(|| PathBuf::from(value));
            }
            "abs-eps" => {
                if args.abs_eps.is_none() {
                    args.abs_eps = Some(parse(&key, value)?);
                }
            }
            "rel-eps" => {
                if args.rel_eps.is_none() {
                    args.rel_eps = Some(parse(&key, value)?);
                }
            }
            other => {
                return Err(CliError::Usage(format!(
                    "{}:{}: unknown key '{other}'",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(())
}

/// Parses a comma-separated r list, keeping the given order.
pub fn parse_r_list(s: &str) -> Result<Vec<RParam>, CliError> {
    let list: Vec<RParam> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<RParam>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(CliError::Usage("r list is empty".into()));
    }
    Ok(list)
}

impl RunConfig {
    pub fn resolve(args: &ConfigArgs) -> Result<Self, CliError> {
        let mut args = args.clone();
        if let Some(path) = args.config.clone() {
            merge_file(&mut args, &path)?;
        }
        let algebra: Family = args
            .algebra
            .as_deref()
            .unwrap_or(DEFAULT_ALGEBRA)
            .parse()
            .map_err(|e: lieorbit::Error| CliError::Usage(e.to_string()))?;
        let h_spec: HPreset = args
            .h
            .as_deref()
            .unwrap_or("regular")
            .parse()
            .map_err(|e: lieorbit::Error| CliError::Usage(e.to_string()))?;
        let r_list = parse_r_list(args.r.as_deref().unwrap_or(DEFAULT_R))?;
        let n_base = args.n_base.unwrap_or(10);
        let n_fiber = args.n_fiber.unwrap_or(2);
        if n_base == 0 || n_fiber == 0 {
            return Err(CliError::Usage("--n-base and --n-fiber must be at least 1".into()));
        }
        let tol = Tolerance::new(
            args.abs_eps.unwrap_or(DEFAULT_ABS_EPS),
            args.rel_eps.unwrap_or(DEFAULT_REL_EPS),
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            algebra,
            h_spec,
            r_list,
            seed: args.seed.unwrap_or(1),
            n_base,
            n_fiber,
            tol,
            output_dir: args.out.unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}
