//! The `simulate` subcommand: flag/config merging and Monte Carlo runs.

use std::path::PathBuf;

use blocknorm::blocks::exponents_to_sizes;
use blocknorm::mc::{default_x_grid, estimate_tail_with, linear_grid, ratio_grid};
use blocknorm::{BlockScheme, Normalization, ProcessSpec, RefDist, Seed, SimConfig, StatKind};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::output::{json_document, write_target, write_with_manifest, Manifest};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Iid,
    Ar1,
    Arch1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every option is optional here so that a flag can be told apart from a
/// default; values resolve as flag, then config file, then default.
/// The config file is flat TOML whose keys are the long flag names.
#[derive(Debug, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateArgs {
    /// Flat TOML file of defaults keyed by flag name (e.g. `rho-grid = "0:0.9:0.1"`).
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,

    /// Data-generating process [default: iid].
    #[arg(long, value_enum)]
    process: Option<ProcessKind>,
    /// AR(1) coefficient, |rho| < 1.
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// AR(1) coefficients as start:stop:step or a comma list; emits one column per value.
    #[arg(long)]
    rho_grid: Option<String>,
    /// ARCH(1) intercept scale a > 0 [default: 1].
    #[arg(long)]
    a: Option<f64>,
    /// ARCH(1) coefficient, 0 <= b < 1.
    #[arg(long)]
    b: Option<f64>,
    /// ARCH(1) coefficients as start:stop:step or a comma list.
    #[arg(long)]
    b_grid: Option<String>,
    /// Path length [default: 1000].
    #[arg(long)]
    n: Option<usize>,
    /// Statistic: w, w-star, i, i-star or t-star.
    #[arg(long)]
    stat: Option<String>,
    /// Block length for i, i-star and t-star [default: 50].
    #[arg(long)]
    m: Option<usize>,
    /// Big-block length for w and w-star [default: 43].
    #[arg(long)]
    m1: Option<usize>,
    /// Small-block length for w and w-star [default: 7].
    #[arg(long)]
    m2: Option<usize>,
    /// Big-block exponent: m1 = floor(n^alpha1). Use with --alpha2 instead of --m1/--m2.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Small-block exponent: m2 = floor(n^alpha2).
    #[arg(long)]
    alpha2: Option<f64>,
    /// Centering of w-star and i-star [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    mu0: Option<f64>,
    /// Scaling of starred statistics: student or plain [default: student].
    #[arg(long)]
    normalization: Option<String>,
    /// Monte Carlo replications [default: 100000].
    #[arg(long)]
    reps: Option<u64>,
    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Thresholds as start:stop:step or a comma list [default: 1.6:4.0:0.1].
    #[arg(long)]
    x: Option<String>,
    /// Reference law for the ratios, "normal" or "t<df>" [default: the statistic's own].
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    reference: Option<String>,
    /// Output path; "-" writes to standard output [default: -].
    #[arg(long, short)]
    output: Option<String>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "BLOCKNORM_WORKERS")]
    workers: Option<usize>,
}

macro_rules! prefer_flags {
    ($flags:expr, $file:expr, $($field:ident),+) => {
        SimulateArgs { config: None, $($field: $flags.$field.or($file.$field)),+ }
    };
}

impl SimulateArgs {
    fn resolve(self) -> CliResult<SimulateArgs> {
        let Some(path) = &self.config else { return Ok(self) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config '{}': {e}", path.display())))?;
        let file: SimulateArgs = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config '{}': {e}", path.display())))?;
        Ok(self.prefer(file))
    }

    fn prefer(self, file: SimulateArgs) -> SimulateArgs {
        prefer_flags!(
            self, file, process, rho, rho_grid, a, b, b_grid, n, stat, m, m1, m2, alpha1, alpha2, mu0,
            normalization, reps, seed, x, reference, output, format, workers
        )
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| usage(format!("--{flag}: '{t}' is not a number")));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => Ok(linear_grid(num(start)?, num(stop)?, num(step)?)
            .map_err(|e| usage(format!("--{flag}: {e}")))?),
        [_] => s.split(',').map(num).collect(),
        _ => Err(usage(format!("--{flag}: expected start:stop:step or a comma list"))),
    }
}

/// The resolved run: one config, plus the process column list for grids.
struct Plan {
    config: SimConfig,
    grid: Option<Vec<ProcessSpec>>,
    format: Format,
    output: String,
    workers: Option<usize>,
}

fn forbid(set: bool, what: &str, why: &str) -> CliResult<()> {
    if set {
        Err(usage(format!("{what} cannot be used {why}")))
    } else {
        Ok(())
    }
}

fn processes(args: &SimulateArgs) -> CliResult<(ProcessSpec, Option<Vec<ProcessSpec>>)> {
    let kind = args.process.unwrap_or(ProcessKind::Iid);
    let ar_set = args.rho.is_some() || args.rho_grid.is_some();
    let arch_set = args.a.is_some() || args.b.is_some() || args.b_grid.is_some();
    match kind {
        ProcessKind::Iid => {
            forbid(ar_set || arch_set, "--rho/--a/--b and their grids", "with --process iid")?;
            Ok((ProcessSpec::IidNormal, None))
        }
        ProcessKind::Ar1 => {
            forbid(arch_set, "--a/--b/--b-grid", "with --process ar1")?;
            match (args.rho, &args.rho_grid) {
                (Some(rho), None) => Ok((ProcessSpec::Ar1 { rho }, None)),
                (None, Some(g)) => {
                    let specs: Vec<ProcessSpec> =
                        parse_grid("rho-grid", g)?.into_iter().map(|rho| ProcessSpec::Ar1 { rho }).collect();
                    Ok((specs[0], Some(specs)))
                }
                (Some(_), Some(_)) => Err(usage("give either --rho or --rho-grid, not both")),
                (None, None) => Err(usage("--process ar1 needs --rho or --rho-grid")),
            }
        }
        ProcessKind::Arch1 => {
            forbid(ar_set, "--rho/--rho-grid", "with --process arch1")?;
            let a = args.a.unwrap_or(1.0);
            match (args.b, &args.b_grid) {
                (Some(b), None) => Ok((ProcessSpec::Arch1 { a, b }, None)),
                (None, Some(g)) => {
                    let specs: Vec<ProcessSpec> =
                        parse_grid("b-grid", g)?.into_iter().map(|b| ProcessSpec::Arch1 { a, b }).collect();
                    Ok((specs[0], Some(specs)))
                }
                (Some(_), Some(_)) => Err(usage("give either --b or --b-grid, not both")),
                (None, None) => Err(usage("--process arch1 needs --b or --b-grid")),
            }
        }
    }
}

fn scheme(args: &SimulateArgs, stat: StatKind, n: usize) -> CliResult<BlockScheme> {
    let big_small_set = args.m1.is_some() || args.m2.is_some() || args.alpha1.is_some() || args.alpha2.is_some();
    match stat {
        StatKind::Wn | StatKind::WnStar => {
            forbid(args.m.is_some(), "--m", &format!("with --stat {stat}; use --m1/--m2"))?;
            let exponents = args.alpha1.is_some() || args.alpha2.is_some();
            let sizes = args.m1.is_some() || args.m2.is_some();
            let (m1, m2) = match (sizes, exponents) {
                (true, true) => return Err(usage("give either --m1/--m2 or --alpha1/--alpha2, not both")),
                (false, true) => match (args.alpha1, args.alpha2) {
                    (Some(a1), Some(a2)) => exponents_to_sizes(n, a1, a2)?,
                    _ => return Err(usage("--alpha1 and --alpha2 must be given together")),
                },
                _ => (args.m1.unwrap_or(43), args.m2.unwrap_or(7)),
            };
            Ok(BlockScheme::BigSmall { m1, m2 })
        }
        StatKind::In | StatKind::InStar | StatKind::TnStar => {
            forbid(big_small_set, "--m1/--m2/--alpha1/--alpha2", &format!("with --stat {stat}; use --m"))?;
            let m = args.m.unwrap_or(50);
            Ok(if stat == StatKind::TnStar { BlockScheme::Batch { m } } else { BlockScheme::Interlace { m } })
        }
        StatKind::TwoSampleW => Err(usage("two-sample-w needs two samples and cannot be simulated")),
    }
}

fn plan(args: SimulateArgs) -> CliResult<Plan> {
    let args = args.resolve()?;
    let stat: StatKind = args
        .stat
        .as_deref()
        .ok_or_else(|| usage("--stat is required (w, w-star, i, i-star or t-star)"))?
        .parse()
        .map_err(|e: blocknorm::Error| usage(e.to_string()))?;
    let n = args.n.unwrap_or(1000);
    let (process, grid) = processes(&args)?;
    let scheme = scheme(&args, stat, n)?;
    if args.mu0.is_some() && !matches!(stat, StatKind::WnStar | StatKind::InStar) {
        return Err(usage(format!("--mu0 applies to w-star and i-star, not {stat}")));
    }
    let normalization: Normalization = match &args.normalization {
        Some(s) => s.parse().map_err(|e: blocknorm::Error| usage(e.to_string()))?,
        None => Normalization::default(),
    };
    let reference: Option<RefDist> = match &args.reference {
        Some(s) => Some(s.parse().map_err(|e: blocknorm::Error| usage(e.to_string()))?),
        None => None,
    };
    let x_grid = match &args.x {
        Some(s) => parse_grid("x", s)?,
        None => default_x_grid(),
    };
    let config = SimConfig {
        process,
        n,
        scheme,
        stat,
        mu0: args.mu0.unwrap_or(0.0),
        normalization,
        reps: args.reps.unwrap_or(100_000),
        master_seed: Seed(args.seed.unwrap_or(0)),
        x_grid,
        reference,
    };
    let mut check = config.clone();
    for p in grid.iter().flatten() {
        check.process = *p;
        check.validate()?;
    }
    config.validate()?;
    if args.workers == Some(0) {
        return Err(usage("--workers must be >= 1"));
    }
    Ok(Plan {
        config,
        grid,
        format: args.format.unwrap_or(Format::Csv),
        output: args.output.unwrap_or_else(|| "-".into()),
        workers: args.workers,
    })
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let plan = plan(args)?;
    let echo = serde_json::json!({ "simulation": &plan.config, "grid": &plan.grid });
    let manifest = Manifest::start(echo, Some(plan.config.master_seed.0));
    let (csv, json) = match &plan.grid {
        None => {
            let table = estimate_tail_with(&plan.config, plan.workers)?;
            let mut csv = Vec::new();
            table.write_csv(&mut csv)?;
            (csv, serde_json::to_value(&table).expect("serializable table"))
        }
        Some(params) => {
            let grid = ratio_grid(&plan.config, params, plan.workers)?;
            let mut csv = Vec::new();
            grid.write_csv(&mut csv)?;
            (csv, serde_json::to_value(&grid).expect("serializable grid"))
        }
    };
    let manifest = manifest.finish();
    match plan.format {
        Format::Csv => write_with_manifest(&plan.output, &csv, &manifest),
        Format::Json => write_target(&plan.output, &json_document(&manifest, &json)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("x", "0:0.9:0.1").unwrap().len(), 10);
        assert_eq!(parse_grid("x", "1.5, 2,4").unwrap(), vec![1.5, 2.0, 4.0]);
        assert_eq!(parse_grid("x", "2").unwrap(), vec![2.0]);
        assert!(parse_grid("x", "1:2").is_err());
        assert!(parse_grid("x", "a,b").is_err());
    }

    #[test]
    fn flags_override_config() {
        let flags = SimulateArgs { reps: Some(10), stat: Some("i-star".into()), ..Default::default() };
        let file: SimulateArgs = toml::from_str("reps = 500\nseed = 9\nstat = \"t-star\"\n").unwrap();
        let merged = flags.prefer(file);
        assert_eq!(merged.reps, Some(10));
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.stat.as_deref(), Some("i-star"));
        assert_eq!(merged.n, None);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<SimulateArgs>("reps = 5\nbogus = 1\n").is_err());
        assert!(toml::from_str::<SimulateArgs>("config = \"x.toml\"\n").is_err());
    }

    #[test]
    fn scheme_conflicts_are_usage_errors() {
        let bad = SimulateArgs { stat: Some("i-star".into()), m1: Some(43), ..Default::default() };
        assert!(matches!(plan(bad), Err(CliError::Usage(_))));
        let bad = SimulateArgs { stat: Some("w-star".into()), m: Some(50), ..Default::default() };
        assert!(matches!(plan(bad), Err(CliError::Usage(_))));
        let ok = SimulateArgs {
            stat: Some("w".into()),
            alpha1: Some(0.5),
            alpha2: Some(0.25),
            ..Default::default()
        };
        assert_eq!(plan(ok).unwrap().config.scheme, BlockScheme::BigSmall { m1: 31, m2: 5 });
    }
}
