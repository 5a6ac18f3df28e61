//! Seeded generators for the dependent processes used in simulations.
//!
//! Random stream: each seed initializes a ChaCha8 generator through
//! `rand_chacha::ChaCha8Rng::seed_from_u64`, and standard normal variates
//! come from the ziggurat sampler `rand_distr::StandardNormal`. Both are
//! portable and value-stable within their major versions, so output is
//! bit-identical across machines for a fixed build ([`RNG_ALGORITHM`]).
//!
//! Replication seeds are derived with [`derive_rep_seed`]:
//!
//! ```text
//! mix(z):  z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//!          z ^= z >> 27; z *= 0x94d049bb133111eb;
//!          z ^= z >> 31
//! derive_rep_seed(master, r) = mix(mix(master + 0x9e3779b97f4a7c15) ^ r)
//! (all arithmetic wrapping on u64)
//! ```
//!
//! `mix` is the SplitMix64 finalizer, a bijection on `u64`, so distinct
//! replication indices always receive distinct seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Series;

pub const RNG_ALGORITHM: &str =
    "chacha8 (rand_chacha 0.9 seed_from_u64) + ziggurat standard normal (rand_distr 0.5)";

/// Steps discarded before an ARCH(1) path is emitted.
pub const ARCH_BURN_IN: usize = 1000;

/// Default truncation lag of the high-dimensional linear process.
pub const DEFAULT_LAG_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_rep_seed(master: Seed, rep_index: u64) -> Seed {
    Seed(mix64(mix64(master.0.wrapping_add(GOLDEN_GAMMA)) ^ rep_index))
}

pub(crate) fn rng_for(seed: Seed) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum ProcessSpec {
    IidNormal,
    Ar1 { rho: f64 },
    Arch1 { a: f64, b: f64 },
    HdLinear { p: usize, decay: f64, lag_cap: usize },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessSpec::IidNormal => Ok(()),
            ProcessSpec::Ar1 { rho } => {
                if rho.is_finite() && rho.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("AR(1) needs |rho| < 1, got {rho}")))
                }
            }
            ProcessSpec::Arch1 { a, b } => {
                if !(a.is_finite() && a > 0.0) {
                    Err(Error::Config(format!("ARCH(1) needs a > 0, got {a}")))
                } else if !(0.0..1.0).contains(&b) {
                    Err(Error::Config(format!("ARCH(1) needs 0 <= b < 1, got {b}")))
                } else {
                    Ok(())
                }
            }
            ProcessSpec::HdLinear { p, decay, lag_cap } => {
                if p == 0 {
                    Err(Error::Config("dimension p must be >= 1".into()))
                } else if !(0.0..1.0).contains(&decay) {
                    Err(Error::Config(format!("decay must lie in [0, 1), got {decay}")))
                } else if lag_cap == 0 {
                    Err(Error::Config("lag cap must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_univariate(&self) -> bool {
        !matches!(self, ProcessSpec::HdLinear { .. })
    }

    /// Fills `out` with one path of a univariate process.
    pub(crate) fn fill_univariate<R: Rng>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match *self {
            ProcessSpec::IidNormal => {
                for x in out.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
            }
            ProcessSpec::Ar1 { rho } => {
                let mut prev: f64 = rng.sample::<f64, _>(StandardNormal) / (1.0 - rho * rho).sqrt();
                for x in out.iter_mut() {
                    let eps: f64 = rng.sample(StandardNormal);
                    prev = rho * prev + eps;
                    *x = prev;
                }
            }
            ProcessSpec::Arch1 { a, b } => {
                let (a2, b2) = (a * a, b * b);
                let mut u: f64 = rng.sample::<f64, _>(StandardNormal) * (a2 / (1.0 - b2)).sqrt();
                for _ in 0..ARCH_BURN_IN {
                    let eps: f64 = rng.sample(StandardNormal);
                    u = (a2 + b2 * u * u).sqrt() * eps;
                }
                for x in out.iter_mut() {
                    let eps: f64 = rng.sample(StandardNormal);
                    u = (a2 + b2 * u * u).sqrt() * eps;
                    *x = u;
                }
            }
            ProcessSpec::HdLinear { .. } => {
                return Err(Error::Config(
                    "the high-dimensional linear process is multivariate".into(),
                ))
            }
        }
        Ok(())
    }

    /// One univariate path of length `n`.
    pub fn generate(&self, n: usize, seed: Seed) -> Result<Series> {
        self.validate()?;
        if n == 0 {
            return Err(Error::Config("path length must be >= 1".into()));
        }
        let mut out = vec![0.0; n];
        self.fill_univariate(&mut rng_for(seed), &mut out)?;
        Series::new(out)
    }
}

pub fn gen_iid_normal(n: usize, seed: Seed) -> Result<Series> {
    ProcessSpec::IidNormal.generate(n, seed)
}

/// Stationary AR(1): `X_0 ~ N(0, 1/(1-rho^2))`, `X_i = rho X_{i-1} + e_i`.
pub fn gen_ar1(n: usize, rho: f64, seed: Seed) -> Result<Series> {
    ProcessSpec::Ar1 { rho }.generate(n, seed)
}

/// ARCH(1): `U_i = sqrt(a^2 + b^2 U_{i-1}^2) e_i`, started at
/// `N(0, a^2/(1-b^2))` and run [`ARCH_BURN_IN`] steps before output.
pub fn gen_arch1(n: usize, a: f64, b: f64, seed: Seed) -> Result<Series> {
    ProcessSpec::Arch1 { a, b }.generate(n, seed)
}

/// `n x p` matrix of observations, row `i` holding time `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSeries {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl PanelSeries {
    /// Builds a panel from row-major data.
    pub fn from_row_major(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Shape(format!("panel must be nonempty, got {n} x {p}")));
        }
        if data.len() != n * p {
            return Err(Error::Shape(format!(
                "{} values do not fill a {n} x {p} panel",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "entry at row {}, column {} is not finite",
                i / p + 1,
                i % p + 1
            )));
        }
        Ok(PanelSeries { n, p, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Shape(format!(
                "row {} has {} columns, expected {p}",
                i + 1,
                rows[i].len()
            )));
        }
        PanelSeries::from_row_major(rows.len(), p, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.p + col]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn column(&self, l: usize) -> Vec<f64> {
        self.data.iter().skip(l).step_by(self.p).copied().collect()
    }

    pub fn column_mut(&mut self, l: usize) -> impl Iterator<Item = &mut f64> {
        self.data.iter_mut().skip(l).step_by(self.p)
    }
}

/// Panel of i.i.d. standard normal entries.
pub fn gen_iid_panel(n: usize, p: usize, seed: Seed) -> Result<PanelSeries> {
    let mut rng = rng_for(seed);
    let data = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    PanelSeries::from_row_major(n, p, data)
}

/// Banded loading matrix: 1 on the diagonal, 1/2 on the first
/// off-diagonals, each row scaled to unit Euclidean norm. Returned as the
/// (left, diagonal, right) coefficient of every row.
fn banded_rows(p: usize) -> Vec<(f64, f64, f64)> {
    (0..p)
        .map(|r| {
            let left: f64 = if r > 0 { 0.5 } else { 0.0 };
            let right: f64 = if r + 1 < p { 0.5 } else { 0.0 };
            let norm = (1.0 + left * left + right * right).sqrt();
            (left / norm, 1.0 / norm, right / norm)
        })
        .collect()
}

/// `Z_i = sum_{j=0}^{lag_cap} decay^j A_0 eta_{i-j}` with the banded `A_0`
/// of unit row norm and i.i.d. standard normal innovations.
pub fn gen_hd_linear(n: usize, spec: ProcessSpec, seed: Seed) -> Result<PanelSeries> {
    let ProcessSpec::HdLinear { p, decay, lag_cap } = spec else {
        return Err(Error::Config("gen_hd_linear needs an HdLinear spec".into()));
    };
    spec.validate()?;
    if n == 0 {
        return Err(Error::Config("path length must be >= 1".into()));
    }
    let mut rng = rng_for(seed);
    // innovations for times 1-lag_cap ..= n, row-major
    let total = n + lag_cap;
    let eta: Vec<f64> = (0..total * p).map(|_| rng.sample(StandardNormal)).collect();
    let weights: Vec<f64> = (0..=lag_cap).map(|j| decay.powi(j as i32)).collect();

    let mut filtered = vec![0.0; p];
    let rows = banded_rows(p);
    let mut data = Vec::with_capacity(n * p);
    for i in 0..n {
        let now = i + lag_cap;
        filtered.iter_mut().for_each(|v| *v = 0.0);
        for (j, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = &eta[(now - j) * p..(now - j + 1) * p];
            for (f, &e) in filtered.iter_mut().zip(row) {
                *f += w * e;
            }
        }
        for (r, &(l, d, rt)) in rows.iter().enumerate() {
            let mut z = d * filtered[r];
            if r > 0 {
                z += l * filtered[r - 1];
            }
            if r + 1 < p {
                z += rt * filtered[r + 1];
            }
            data.push(z);
        }
    }
    PanelSeries::from_row_major(n, p, data)
}
