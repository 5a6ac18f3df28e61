//! The `ci` and `test` subcommands.

use std::fs::File;
use std::path::{Path, PathBuf};

use blocknorm::infer::{mean_test, simultaneous_ci, CiOptions};
use blocknorm::io::{read_panel_csv, read_vector_csv};
use blocknorm::{CiSet, Normalization, PanelSeries};
use clap::Args;

use crate::output::{json_document, write_target, Manifest};
use crate::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct InferenceArgs {
    /// Panel CSV: one row per time point, one column per coordinate, optional header.
    #[arg(long, short)]
    input: PathBuf,
    /// Family-wise level in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Block length, or "auto" for round(n^(1/4)).
    #[arg(long, default_value = "auto")]
    m: String,
    /// Use Student-t rather than normal quantiles.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    use_t: bool,
    /// Interval scaling: student (exact t intervals) or plain.
    #[arg(long, default_value = "student")]
    normalization: String,
    /// Output path for the JSON result; "-" writes to standard output.
    #[arg(long, short, default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    common: InferenceArgs,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    common: InferenceArgs,
    /// Hypothesized mean vector as CSV, one row or one column of length p.
    #[arg(long)]
    mu0: PathBuf,
}

impl InferenceArgs {
    fn options(&self) -> CliResult<CiOptions> {
        let m = match self.m.as_str() {
            "auto" => None,
            s => match s.parse::<usize>() {
                Ok(m) if m >= 1 => Some(m),
                _ => return Err(CliError::Usage(format!("--m must be 'auto' or a positive integer, got '{s}'"))),
            },
        };
        let normalization: Normalization =
            self.normalization.parse().map_err(|e: blocknorm::Error| CliError::Usage(e.to_string()))?;
        Ok(CiOptions { alpha: self.alpha, m, use_t: self.use_t, normalization })
    }

    fn manifest(&self, opts: &CiOptions, mu0: Option<&Path>) -> Manifest {
        let echo = serde_json::json!({ "input": self.input, "mu0": mu0, "options": opts });
        Manifest::start(echo, None)
    }
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| blocknorm::Error::Io(format!("cannot read '{}': {e}", path.display())).into())
}

fn load_panel(path: &Path) -> CliResult<PanelSeries> {
    Ok(read_panel_csv(open(path)?)?)
}

fn print_table(cis: &CiSet) {
    eprintln!(
        "{} intervals at level {}, m = {}, k = {}, quantile {:.6} ({})",
        cis.intervals.len(),
        1.0 - cis.alpha,
        cis.m,
        cis.k,
        cis.quantile,
        cis.quantile_source
    );
    eprintln!("{:>6} {:>14} {:>14} {:>14} {:>14}", "coord", "center", "lower", "upper", "halfwidth");
    for (l, iv) in cis.intervals.iter().enumerate() {
        eprintln!(
            "{l:>6} {:>14.6} {:>14.6} {:>14.6} {:>14.6}",
            iv.center,
            iv.lower(),
            iv.upper(),
            iv.halfwidth
        );
    }
    for w in &cis.warnings {
        eprintln!("warning: {w}");
    }
}

pub fn run_ci(args: CiArgs) -> CliResult<()> {
    let args = args.common;
    let opts = args.options()?;
    let manifest = args.manifest(&opts, None);
    let panel = load_panel(&args.input)?;
    let cis = simultaneous_ci(&panel, &opts)?;
    print_table(&cis);
    write_target(&args.output, &json_document(&manifest.finish(), &cis))
}

pub fn run_test(args: TestArgs) -> CliResult<()> {
    let opts = args.common.options()?;
    let manifest = args.common.manifest(&opts, Some(&args.mu0));
    let panel = load_panel(&args.common.input)?;
    let mu0 = read_vector_csv(open(&args.mu0)?)?;
    let result = mean_test(&panel, &mu0, &opts)?;
    eprintln!(
        "reject = {}; violating coordinates: {:?}",
        result.reject, result.violating_coordinates
    );
    write_target(&args.common.output, &json_document(&manifest.finish(), &result))
}
