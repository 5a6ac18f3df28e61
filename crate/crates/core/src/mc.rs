//! Monte Carlo estimation of tail probabilities of the block statistics.
//!
//! Replication `r` draws its path from `derive_rep_seed(master, r)` and
//! contributes integer exceedance counts, so a run depends only on its
//! configuration: the number of worker threads and the order in which
//! replications finish cannot change any output bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::blocks::BlockScheme;
use crate::dist::{normal_upper, t_upper, RefDist};
use crate::error::{Error, Result};
use crate::procgen::{derive_rep_seed, rng_for, ProcessSpec, Seed};
use crate::stats::{Normalization, StatKind, Statistic};

/// Replications allowed to be degenerate: one per thousand.
const DEGENERATE_PER_MILLE: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub process: ProcessSpec,
    pub n: usize,
    pub scheme: BlockScheme,
    pub stat: StatKind,
    /// Center of the starred statistics under the null.
    #[serde(default)]
    pub mu0: f64,
    #[serde(default)]
    pub normalization: Normalization,
    pub reps: u64,
    pub master_seed: Seed,
    pub x_grid: Vec<f64>,
    /// Overrides the statistic's recommended reference law.
    #[serde(default)]
    pub reference: Option<RefDist>,
}

impl SimConfig {
    /// The simulation design used for the published ratio tables:
    /// `n = 1000`, `x = 1.6, 1.7, ..., 4.0`, 10^5 replications.
    pub fn paper_design(process: ProcessSpec, stat: StatKind, master_seed: Seed) -> Result<Self> {
        let scheme = match stat {
            StatKind::Wn | StatKind::WnStar => BlockScheme::BigSmall { m1: 43, m2: 7 },
            StatKind::In | StatKind::InStar => BlockScheme::Interlace { m: 50 },
            StatKind::TnStar => BlockScheme::Batch { m: 50 },
            StatKind::TwoSampleW => {
                return Err(Error::Config("two-sample statistic cannot be simulated".into()))
            }
        };
        Ok(SimConfig {
            process,
            n: 1000,
            scheme,
            stat,
            mu0: 0.0,
            normalization: Normalization::Student,
            reps: 100_000,
            master_seed,
            x_grid: default_x_grid(),
            reference: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        if !self.process.is_univariate() {
            return Err(Error::Config("simulation needs a univariate process".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.x_grid.is_empty() {
            return Err(Error::Config("x grid is empty".into()));
        }
        if self.x_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("x grid must be finite".into()));
        }
        if self.x_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("x grid must be strictly increasing".into()));
        }
        self.statistic().map(|_| ())
    }

    pub fn statistic(&self) -> Result<Statistic> {
        Statistic::new(self.stat, self.scheme, self.n, self.mu0, self.normalization)
    }

    pub fn reference_dist(&self) -> Result<RefDist> {
        match self.reference {
            Some(r) => r.validate(),
            None => Ok(self.statistic()?.reference()),
        }
    }
}

/// `start, start + step, ...` up to `stop` inclusive (within 1e-9).
/// Points are rounded to 10 decimals so `1.6:4.0:0.1` yields the
/// shortest decimal representations.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err(Error::Config(format!(
            "invalid grid {start}:{stop}:{step} (step must be positive)"
        )));
    }
    if stop < start - 1e-9 {
        return Err(Error::Config(format!("grid stop {stop} is below start {start}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let v = start + i as f64 * step;
            (v * 1e10).round() / 1e10
        })
        .collect())
}

pub fn default_x_grid() -> Vec<f64> {
    (16..=40).map(|i| f64::from(i) / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub x: f64,
    pub exceedances: u64,
    pub mc_tail: f64,
    pub ref_tail: f64,
    /// `mc_tail / ref_tail`; absent when the reference tail underflows to 0.
    pub ratio: Option<f64>,
    pub mc_se: f64,
    pub degenerate_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub stat: StatKind,
    pub reference: RefDist,
    pub reps: u64,
    /// Replications whose statistic was defined.
    pub effective_reps: u64,
    pub degenerate_count: u64,
    pub rows: Vec<TailRow>,
}

impl TailTable {
    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.ratio).collect()
    }

    pub fn ratio_at(&self, x: f64) -> Option<f64> {
        self.rows.iter().find(|r| (r.x - x).abs() < 1e-9).and_then(|r| r.ratio)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "x", "exceedances", "mc_tail", "ref_tail", "ratio", "ratio_2dp", "mc_se", "degenerate_count",
        ])
        .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.x.to_string(),
                r.exceedances.to_string(),
                r.mc_tail.to_string(),
                r.ref_tail.to_string(),
                r.ratio.map(|v| v.to_string()).unwrap_or_default(),
                r.ratio.map(|v| format!("{v:.2}")).unwrap_or_default(),
                r.mc_se.to_string(),
                r.degenerate_count.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Default)]
struct Tally {
    /// `hist[i]` counts values with exactly `i` grid points at or below them.
    hist: Vec<u64>,
    degenerate: u64,
    failure: Option<Error>,
    path: Vec<f64>,
    sums: Vec<f64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        if self.hist.len() < other.hist.len() {
            self.hist.resize(other.hist.len(), 0);
        }
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        self.degenerate += other.degenerate;
        self.failure = self.failure.or(other.failure);
        self
    }
}

/// Statistic value of replication `rep`, or `None` if degenerate.
fn replicate(
    config: &SimConfig,
    stat: &Statistic,
    rep: u64,
    path: &mut Vec<f64>,
    sums: &mut Vec<f64>,
) -> Result<Option<f64>> {
    path.resize(config.n, 0.0);
    let mut rng = rng_for(derive_rep_seed(config.master_seed, rep));
    config.process.fill_univariate(&mut rng, path)?;
    match stat.evaluate_with(path, sums) {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateDenominator(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn check_degenerate(degenerate: u64, reps: u64) -> Result<()> {
    let limit = reps * DEGENERATE_PER_MILLE / 1000;
    if degenerate > limit {
        return Err(Error::TooManyDegenerate { degenerate, reps, limit });
    }
    Ok(())
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Tail probabilities on the global thread pool.
pub fn estimate_tail(config: &SimConfig) -> Result<TailTable> {
    estimate_tail_with(config, None)
}

/// Tail probabilities using exactly `workers` threads when given.
pub fn estimate_tail_with(config: &SimConfig, workers: Option<usize>) -> Result<TailTable> {
    config.validate()?;
    let stat = config.statistic()?;
    let reference = config.reference_dist()?;
    let grid = &config.x_grid;

    let tally = with_workers(workers, || {
        (0..config.reps)
            .into_par_iter()
            .fold(
                || Tally { hist: vec![0; grid.len() + 1], ..Tally::default() },
                |mut t, rep| {
                    if t.failure.is_some() {
                        return t;
                    }
                    match replicate(config, &stat, rep, &mut t.path, &mut t.sums) {
                        Ok(Some(v)) => t.hist[grid.partition_point(|&x| x <= v)] += 1,
                        Ok(None) => t.degenerate += 1,
                        Err(e) => t.failure = Some(e),
                    }
                    t
                },
            )
            .reduce(Tally::default, Tally::merge)
    })?;
    if let Some(e) = tally.failure {
        return Err(e);
    }
    check_degenerate(tally.degenerate, config.reps)?;

    let effective = config.reps - tally.degenerate;
    let mut rows = Vec::with_capacity(grid.len());
    // exceedances at grid[i] = values with more than i grid points <= them
    let mut above: u64 = tally.hist.iter().sum();
    for (i, &x) in grid.iter().enumerate() {
        above -= tally.hist[i];
        let mc_tail = if effective > 0 { above as f64 / effective as f64 } else { 0.0 };
        let ref_tail = reference.upper(x)?;
        rows.push(TailRow {
            x,
            exceedances: above,
            mc_tail,
            ref_tail,
            ratio: (ref_tail > 0.0).then(|| mc_tail / ref_tail),
            mc_se: (mc_tail * (1.0 - mc_tail) / effective.max(1) as f64).sqrt(),
            degenerate_count: tally.degenerate,
        });
    }
    Ok(TailTable {
        stat: config.stat,
        reference,
        reps: config.reps,
        effective_reps: effective,
        degenerate_count: tally.degenerate,
        rows,
    })
}

/// Statistic values of all non-degenerate replications, in replication order.
pub fn simulate_values(config: &SimConfig, workers: Option<usize>) -> Result<Vec<f64>> {
    config.validate()?;
    let stat = config.statistic()?;
    let draws: Vec<Option<f64>> = with_workers(workers, || {
        (0..config.reps)
            .into_par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(path, sums), rep| replicate(config, &stat, rep, path, sums),
            )
            .collect::<Result<Vec<_>>>()
    })??;
    let values: Vec<f64> = draws.iter().flatten().copied().collect();
    check_degenerate(config.reps - values.len() as u64, config.reps)?;
    Ok(values)
}

/// One tail table per process in `params`, all sharing the template's
/// seed (common random numbers across columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioGrid {
    pub labels: Vec<String>,
    pub params: Vec<ProcessSpec>,
    pub x_grid: Vec<f64>,
    pub tables: Vec<TailTable>,
}

impl RatioGrid {
    /// Rows indexed by x, columns by parameter.
    pub fn ratio_matrix(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.x_grid.len())
            .map(|i| self.tables.iter().map(|t| t.rows[i].ratio).collect())
            .collect()
    }

    /// `x`, one 2-decimal ratio column per parameter, then the same columns
    /// at full precision with a `_full` suffix.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x".to_string()];
        header.extend(self.labels.iter().cloned());
        header.extend(self.labels.iter().map(|l| format!("{l}_full")));
        w.write_record(&header).map_err(csv_err)?;
        for (i, row) in self.ratio_matrix().into_iter().enumerate() {
            let mut rec = vec![self.x_grid[i].to_string()];
            rec.extend(row.iter().map(|r| r.map(|v| format!("{v:.2}")).unwrap_or_default()));
            rec.extend(row.iter().map(|r| r.map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn process_label(p: &ProcessSpec) -> String {
    match p {
        ProcessSpec::IidNormal => "iid".into(),
        ProcessSpec::Ar1 { rho } => format!("rho={rho}"),
        ProcessSpec::Arch1 { b, .. } => format!("b={b}"),
        ProcessSpec::HdLinear { decay, .. } => format!("decay={decay}"),
    }
}

pub fn ratio_grid(template: &SimConfig, params: &[ProcessSpec], workers: Option<usize>) -> Result<RatioGrid> {
    if params.is_empty() {
        return Err(Error::Config("parameter grid is empty".into()));
    }
    let tables = params
        .iter()
        .map(|&process| estimate_tail_with(&SimConfig { process, ..template.clone() }, workers))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioGrid {
        labels: params.iter().map(process_label).collect(),
        params: params.to_vec(),
        x_grid: template.x_grid.clone(),
        tables,
    })
}

/// Normal and Student-t upper tails on the x = 1.6..4.0 grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub x: f64,
    pub normal: f64,
    pub t19: f64,
    pub t9: f64,
    /// `t9 / normal`, from unrounded tails.
    pub ratio: f64,
}

pub fn table1() -> Vec<Table1Row> {
    default_x_grid()
        .into_iter()
        .map(|x| {
            let normal = normal_upper(x).expect("finite grid");
            let t19 = t_upper(x, 19).expect("finite grid");
            let t9 = t_upper(x, 9).expect("finite grid");
            Table1Row { x, normal, t19, t9, ratio: t9 / normal }
        })
        .collect()
}

/// Table 1 as CSV with every probability and ratio rounded to 5 decimals.
pub fn write_table1_csv<W: Write>(out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "1-Phi", "1-t19", "1-t9", "(1-t9)/(1-Phi)"]).map_err(csv_err)?;
    for r in table1() {
        w.write_record([
            format!("{:.1}", r.x),
            format!("{:.5}", r.normal),
            format!("{:.5}", r.t19),
            format!("{:.5}", r.t9),
            format!("{:.5}", r.ratio),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Kolmogorov-Smirnov distance `sup |F_N - F|` between the empirical CDF of
/// `sample` and the reference CDF.
pub fn ks_distance(sample: &[f64], reference: RefDist) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Shape("KS distance needs a nonempty sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = reference.cdf(x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}
