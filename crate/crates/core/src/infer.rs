//! Simultaneous confidence intervals and a max-type test for the mean
//! vector of a stationary panel, built from interlaced block sums with a
//! Bonferroni correction.
//!
//! For coordinate `l` with odd-block sums `Y_{1l}, ..., Y_{kl}` of length
//! `m` and their mean `Ybar_l`, the interval is
//!
//! ```text
//! Ybar_l / m  +/-  q * sqrt(sum_j (Y_jl - Ybar_l)^2) / (k m) * s
//! ```
//!
//! where `q` is the upper `alpha/(2p)` quantile of the normal law, or of
//! `t_{k-1}` when `use_t` is set, and `s = sqrt(k/(k-1))` under
//! [`Normalization::Student`] or `1` under [`Normalization::Plain`].

use serde::{Deserialize, Serialize};

use crate::dist::RefDist;
use crate::error::{Error, Result};
use crate::procgen::PanelSeries;
use crate::stats::{interlaced_sums, Normalization};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiOptions {
    pub alpha: f64,
    /// Block length; `None` picks `round(n^(1/4))`.
    pub m: Option<usize>,
    pub use_t: bool,
    pub normalization: Normalization,
}

impl Default for CiOptions {
    fn default() -> Self {
        CiOptions { alpha: 0.05, m: None, use_t: true, normalization: Normalization::Student }
    }
}

/// `round(n^(1/4))`, at least 1.
pub fn auto_block_length(n: usize) -> usize {
    ((n as f64).powf(0.25).round() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub halfwidth: f64,
}

impl Interval {
    pub fn lower(&self) -> f64 {
        self.center - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.center + self.halfwidth
    }

    pub fn contains(&self, v: f64) -> bool {
        (v - self.center).abs() <= self.halfwidth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiSet {
    pub intervals: Vec<Interval>,
    pub alpha: f64,
    pub m: usize,
    pub k: usize,
    pub quantile_source: RefDist,
    pub quantile: f64,
    pub normalization: Normalization,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub reject: bool,
    /// Zero-based coordinates whose hypothesized mean lies outside its interval.
    pub violating_coordinates: Vec<usize>,
    pub alpha: f64,
    pub mu0: Vec<f64>,
}

pub fn simultaneous_ci(panel: &PanelSeries, opts: &CiOptions) -> Result<CiSet> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", opts.alpha)));
    }
    let (n, p) = (panel.n(), panel.p());
    let m = opts.m.unwrap_or_else(|| auto_block_length(n));
    if m == 0 {
        return Err(Error::Config("block length must be >= 1".into()));
    }
    let k = n / (2 * m);
    if k < 2 {
        return Err(Error::Config(format!(
            "n={n} with m={m} gives k={k} interlaced blocks; at least 2 are needed"
        )));
    }
    let source = if opts.use_t { RefDist::StudentT(k as u32 - 1) } else { RefDist::Normal };
    let quantile = source.upper_quantile(opts.alpha / (2.0 * p as f64))?;
    let scale = match opts.normalization {
        Normalization::Student => (k as f64 / (k as f64 - 1.0)).sqrt(),
        Normalization::Plain => 1.0,
    };

    let mut warnings = Vec::new();
    if (p as f64).ln() > (n as f64).powf(0.25) {
        warnings.push(format!(
            "log p = {:.2} exceeds n^(1/4) = {:.2}; Bonferroni intervals may be unreliable",
            (p as f64).ln(),
            (n as f64).powf(0.25)
        ));
    }

    let intervals = (0..p)
        .map(|l| {
            let (sums, _) = interlaced_sums(&panel.column(l), m)?;
            let mean = sums.iter().sum::<f64>() / k as f64;
            let (ss, mag) = sums.iter().fold((0.0_f64, 0.0_f64), |(q, s), &y| {
                ((q + (y - mean) * (y - mean)), s.max(y.abs()))
            });
            let spread = ss.sqrt();
            // equal block sums leave only rounding noise in the spread
            let spread = if spread <= 64.0 * f64::EPSILON * mag * (k as f64).sqrt() { 0.0 } else { spread };
            Ok(Interval {
                center: mean / m as f64,
                halfwidth: quantile * spread * scale / (k * m) as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CiSet {
        intervals,
        alpha: opts.alpha,
        m,
        k,
        quantile_source: source,
        quantile,
        normalization: opts.normalization,
        warnings,
    })
}

/// Rejects `mu = mu0` when some `mu0[l]` falls outside interval `l`.
pub fn mean_test(panel: &PanelSeries, mu0: &[f64], opts: &CiOptions) -> Result<TestResult> {
    if mu0.len() != panel.p() {
        return Err(Error::Shape(format!(
            "mu0 has {} entries but the panel has {} columns",
            mu0.len(),
            panel.p()
        )));
    }
    let cis = simultaneous_ci(panel, opts)?;
    Ok(test_against(&cis, mu0))
}

pub fn test_against(cis: &CiSet, mu0: &[f64]) -> TestResult {
    let violating: Vec<usize> = cis
        .intervals
        .iter()
        .zip(mu0)
        .enumerate()
        .filter(|(_, (iv, &m))| !iv.contains(m))
        .map(|(l, _)| l)
        .collect();
    TestResult {
        reject: !violating.is_empty(),
        violating_coordinates: violating,
        alpha: cis.alpha,
        mu0: mu0.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procgen::{gen_iid_panel, Seed};
    use crate::stats::{i_n_star, Series};

    #[test]
    fn auto_m() {
        assert_eq!(auto_block_length(2000), 7);
        assert_eq!(auto_block_length(16), 2);
        assert_eq!(auto_block_length(1), 1);
    }

    #[test]
    fn equal_block_sums_give_point_interval() {
        // column 0 constant, column 1 varying
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![0.3, (i % 7) as f64]).collect();
        let panel = PanelSeries::from_rows(&rows).unwrap();
        let ci = simultaneous_ci(&panel, &CiOptions { m: Some(4), ..Default::default() }).unwrap();
        assert_eq!(ci.intervals[0].halfwidth, 0.0);
        assert!((ci.intervals[0].center - 0.3).abs() < 1e-15);
        assert!(ci.intervals[1].halfwidth > 0.0);
    }

    #[test]
    fn normal_quantile_single_coordinate() {
        let panel = gen_iid_panel(400, 1, Seed(4)).unwrap();
        let opts = CiOptions { m: Some(5), use_t: false, normalization: Normalization::Plain, ..Default::default() };
        let ci = simultaneous_ci(&panel, &opts).unwrap();
        assert!((ci.quantile - 1.959_963_984_540_054).abs() < 1e-9);
        assert_eq!(ci.quantile_source, RefDist::Normal);

        let (sums, k) = interlaced_sums(&panel.column(0), 5).unwrap();
        let mean = sums.iter().sum::<f64>() / k as f64;
        let sd = sums.iter().map(|y| (y - mean).powi(2)).sum::<f64>().sqrt();
        assert!((ci.intervals[0].halfwidth - ci.quantile * sd / (k * 5) as f64).abs() < 1e-12);
    }

    #[test]
    fn k_below_two_is_config_error() {
        let panel = gen_iid_panel(10, 2, Seed(1)).unwrap();
        let e = simultaneous_ci(&panel, &CiOptions { m: Some(3), ..Default::default() });
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn test_at_centers_and_displaced() {
        let panel = gen_iid_panel(500, 4, Seed(2)).unwrap();
        let opts = CiOptions::default();
        let ci = simultaneous_ci(&panel, &opts).unwrap();
        let centers: Vec<f64> = ci.intervals.iter().map(|i| i.center).collect();
        let r = mean_test(&panel, &centers, &opts).unwrap();
        assert!(!r.reject && r.violating_coordinates.is_empty());

        let mut moved = centers.clone();
        moved[2] += 1.5 * ci.intervals[2].halfwidth;
        let r = mean_test(&panel, &moved, &opts).unwrap();
        assert!(r.reject);
        assert_eq!(r.violating_coordinates, vec![2]);

        assert!(matches!(mean_test(&panel, &centers[..3], &opts), Err(Error::Shape(_))));
    }

    #[test]
    fn agrees_with_interlaced_t_statistic() {
        for seed in 0..50 {
            let panel = gen_iid_panel(300, 1, Seed(seed)).unwrap();
            let opts = CiOptions { m: Some(6), ..Default::default() };
            let series = Series::new(panel.column(0)).unwrap();
            for mu in [-0.3, -0.1, 0.0, 0.12, 0.25] {
                let stat = i_n_star(&series, 6, mu, Normalization::Student).unwrap();
                let k = stat.k as u32;
                let q = RefDist::StudentT(k - 1).quantile(1.0 - opts.alpha / 2.0).unwrap();
                let r = mean_test(&panel, &[mu], &opts).unwrap();
                // skip knife-edge cases decided by rounding
                if (stat.value.abs() - q).abs() > 1e-9 {
                    assert_eq!(r.reject, stat.value.abs() > q, "seed {seed} mu {mu}");
                }
            }
        }
    }

    #[test]
    fn bonferroni_widens_with_p() {
        let panel = gen_iid_panel(600, 30, Seed(9)).unwrap();
        let opts = CiOptions::default();
        let full = simultaneous_ci(&panel, &opts).unwrap();
        let narrow_cols: Vec<Vec<f64>> = (0..600).map(|i| panel.row(i)[..5].to_vec()).collect();
        let narrow = simultaneous_ci(&PanelSeries::from_rows(&narrow_cols).unwrap(), &opts).unwrap();
        for l in 0..5 {
            assert!(full.intervals[l].halfwidth >= narrow.intervals[l].halfwidth);
            assert_eq!(full.intervals[l].center, narrow.intervals[l].center);
        }
    }
}
