//! Self-normalized block statistics.
//!
//! Every statistic is a ratio of a sum of block sums to a root sum of
//! squares of the same block sums, so the unknown scale (and, for the
//! starred versions, the long-run variance) cancels:
//!
//! | kind         | blocks              | denominator                      | reference        |
//! |--------------|---------------------|----------------------------------|------------------|
//! | `Wn`         | big blocks          | `sqrt(sum Y^2)`                  | `t_k`            |
//! | `WnStar`     | big blocks          | `sqrt(sum (Y - mean)^2)`         | `t_{k-1}`        |
//! | `In`         | odd blocks          | `sqrt(sum Y^2)`                  | `t_k`            |
//! | `InStar`     | odd blocks          | `sqrt(sum (Y - mean)^2)`         | `t_{k-1}`        |
//! | `TnStar`     | `2k` batches        | `sqrt(sum (B - mean)^2)`         | `t_{2k-1}`       |
//! | `TwoSampleW` | big blocks, 2 series| see [`two_sample_w`]             | `t_{min k - 1}`  |
//!
//! The centered (starred) statistics come in two normalizations, see
//! [`Normalization`].

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::blocks::{
    bbsb_partition, interlace_partition, BlockPartition, BlockScheme,
};
use crate::dist::RefDist;
use crate::error::{Error, Result};

/// A finite, nonempty sample path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("series must contain at least one observation".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "observation {} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        Ok(Series(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Series {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Series::new(v)
    }
}

impl From<Series> for Vec<f64> {
    fn from(s: Series) -> Self {
        s.0
    }
}

impl AsRef<[f64]> for Series {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatKind {
    Wn,
    WnStar,
    In,
    InStar,
    TnStar,
    TwoSampleW,
}

impl StatKind {
    pub fn is_centered(self) -> bool {
        matches!(self, StatKind::WnStar | StatKind::InStar | StatKind::TnStar)
    }

    pub fn name(self) -> &'static str {
        match self {
            StatKind::Wn => "w",
            StatKind::WnStar => "w-star",
            StatKind::In => "i",
            StatKind::InStar => "i-star",
            StatKind::TnStar => "t-star",
            StatKind::TwoSampleW => "two-sample-w",
        }
    }

    /// Whether `scheme` is the block layout this statistic is defined on.
    pub fn accepts(self, scheme: &BlockScheme) -> bool {
        matches!(
            (self, scheme),
            (StatKind::Wn | StatKind::WnStar | StatKind::TwoSampleW, BlockScheme::BigSmall { .. })
                | (StatKind::In | StatKind::InStar, BlockScheme::Interlace { .. })
                | (StatKind::TnStar, BlockScheme::Batch { .. })
        )
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "w" => StatKind::Wn,
            "w-star" => StatKind::WnStar,
            "i" => StatKind::In,
            "i-star" => StatKind::InStar,
            "t-star" => StatKind::TnStar,
            "two-sample-w" => StatKind::TwoSampleW,
            other => return Err(Error::Config(format!("unknown statistic '{other}'"))),
        })
    }
}

/// Scaling of the centered (starred) statistics.
///
/// With `K` block sums, `Plain` divides by `sqrt(sum (Y_j - mean)^2)`.
/// `Student` divides by `sqrt(K/(K-1) * sum (Y_j - mean)^2)`, which is the
/// ordinary one-sample t statistic of the block sums: exactly `t_{K-1}`
/// distributed when the block sums are i.i.d. normal. `Plain` equals
/// `sqrt(K/(K-1))` times `Student`. Unstarred statistics ignore this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Student,
    Plain,
}

impl Normalization {
    /// Factor applied to the plain ratio of a centered statistic on `blocks` sums.
    fn factor(self, blocks: usize) -> f64 {
        match self {
            Normalization::Plain => 1.0,
            Normalization::Student => ((blocks as f64 - 1.0) / blocks as f64).sqrt(),
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "student" => Ok(Normalization::Student),
            "plain" => Ok(Normalization::Plain),
            other => Err(Error::Config(format!("unknown normalization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatValue {
    pub kind: StatKind,
    pub value: f64,
    /// Number of big blocks, odd blocks or batch pairs.
    pub k: usize,
    pub reference: RefDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleData {
    pub x1: Series,
    pub x2: Series,
}

/// A one-sample statistic bound to a block partition, reusable across
/// many series of the same length.
#[derive(Debug, Clone)]
pub struct Statistic {
    kind: StatKind,
    partition: BlockPartition,
    mu: f64,
    normalization: Normalization,
    block_len: f64,
}

impl Statistic {
    pub fn new(
        kind: StatKind,
        scheme: BlockScheme,
        n: usize,
        mu: f64,
        normalization: Normalization,
    ) -> Result<Self> {
        if kind == StatKind::TwoSampleW {
            return Err(Error::Config("two-sample statistic needs two series".into()));
        }
        if !kind.accepts(&scheme) {
            return Err(Error::Config(format!(
                "statistic {kind} is not defined on scheme {scheme:?}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {mu}")));
        }
        let partition = scheme.partition(n)?;
        let blocks = partition.with_tag(partition.primary_tag()).count();
        if kind.is_centered() && blocks < 2 {
            return Err(Error::Config(format!(
                "{kind} needs at least 2 blocks, n={n} gives {blocks}"
            )));
        }
        let block_len = match scheme {
            BlockScheme::BigSmall { m1, .. } => m1,
            BlockScheme::Interlace { m } | BlockScheme::Batch { m } => m,
        } as f64;
        Ok(Statistic { kind, partition, mu, normalization, block_len })
    }

    pub fn kind(&self) -> StatKind {
        self.kind
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.partition.n
    }

    /// Recommended reference law.
    pub fn reference(&self) -> RefDist {
        let k = self.partition.k as u32;
        match self.kind {
            StatKind::Wn | StatKind::In => RefDist::StudentT(k),
            StatKind::WnStar | StatKind::InStar => RefDist::StudentT(k - 1),
            StatKind::TnStar => RefDist::StudentT(2 * k - 1),
            StatKind::TwoSampleW => unreachable!("rejected in Statistic::new"),
        }
    }

    /// Evaluates on `xs`, using `scratch` for the block sums.
    pub fn evaluate_with(&self, xs: &[f64], scratch: &mut Vec<f64>) -> Result<f64> {
        if xs.len() != self.partition.n {
            return Err(Error::Shape(format!(
                "series has {} observations, statistic expects {}",
                xs.len(),
                self.partition.n
            )));
        }
        self.partition.sums_into(xs, self.partition.primary_tag(), scratch);
        let center = self.block_len * self.mu;
        if self.kind.is_centered() {
            centered_ratio(scratch, center, self.normalization, self.kind)
        } else {
            plain_ratio(scratch, center, self.kind)
        }
    }

    pub fn evaluate(&self, series: &Series) -> Result<StatValue> {
        let value = self.evaluate_with(series.values(), &mut Vec::new())?;
        Ok(StatValue { kind: self.kind, value, k: self.partition.k, reference: self.reference() })
    }
}

/// `sum (Y - c) / sqrt(sum (Y - c)^2)`.
fn plain_ratio(sums: &[f64], center: f64, kind: StatKind) -> Result<f64> {
    let (num, sq) = sums.iter().fold((0.0, 0.0), |(s, q), &y| {
        let d = y - center;
        (s + d, q + d * d)
    });
    let den = sq.sqrt();
    if den.is_nan() || den <= 0.0 {
        return Err(Error::DegenerateDenominator(kind.name()));
    }
    Ok(num / den)
}

/// `sum (Y - c) / sqrt(sum (Y - mean)^2)`, scaled per `norm`.
///
/// A spread below 64 ulps of the block-sum magnitude counts as degenerate:
/// equal block sums rarely produce an exactly zero centered sum of squares.
fn centered_ratio(sums: &[f64], center: f64, norm: Normalization, kind: StatKind) -> Result<f64> {
    let blocks = sums.len();
    let total: f64 = sums.iter().sum();
    let mean = total / blocks as f64;
    let (ss, scale) = sums.iter().fold((0.0_f64, 0.0_f64), |(q, s), &y| {
        let d = y - mean;
        (q + d * d, s.max(y.abs()))
    });
    let den = ss.sqrt();
    if den.is_nan() || den <= 64.0 * f64::EPSILON * scale * (blocks as f64).sqrt() {
        return Err(Error::DegenerateDenominator(kind.name()));
    }
    let num = total - blocks as f64 * center;
    Ok(norm.factor(blocks) * num / den)
}

/// Big-block self-normalized sum `S / V`.
pub fn w_n(series: &Series, m1: usize, m2: usize) -> Result<StatValue> {
    Statistic::new(StatKind::Wn, BlockScheme::BigSmall { m1, m2 }, series.len(), 0.0, Normalization::Student)?
        .evaluate(series)
}

/// Big-block t statistic centered at `mu`.
pub fn w_n_star(series: &Series, m1: usize, m2: usize, mu: f64, norm: Normalization) -> Result<StatValue> {
    Statistic::new(StatKind::WnStar, BlockScheme::BigSmall { m1, m2 }, series.len(), mu, norm)?
        .evaluate(series)
}

/// Interlaced self-normalized sum over odd blocks.
pub fn i_n(series: &Series, m: usize) -> Result<StatValue> {
    Statistic::new(StatKind::In, BlockScheme::Interlace { m }, series.len(), 0.0, Normalization::Student)?
        .evaluate(series)
}

/// Interlaced t statistic centered at `mu`.
pub fn i_n_star(series: &Series, m: usize, mu: f64, norm: Normalization) -> Result<StatValue> {
    Statistic::new(StatKind::InStar, BlockScheme::Interlace { m }, series.len(), mu, norm)?
        .evaluate(series)
}

/// Batch-means t statistic over `2k` consecutive blocks (mean zero).
pub fn t_n_star(series: &Series, m: usize, norm: Normalization) -> Result<StatValue> {
    Statistic::new(StatKind::TnStar, BlockScheme::Batch { m }, series.len(), 0.0, norm)?
        .evaluate(series)
}

/// Two-sample big-block statistic
/// `(S1/k1 - S2/k2) / sqrt(V1^2/k1^2 + V2^2/k2^2)`.
///
/// Sample `l` uses its first `k_l = floor(n_l/(m1+m2))` big blocks; these
/// never run past `n_l`, so truncating blocks at `n_l` changes nothing.
/// When the block sizes come from exponents, derive them from `n1 + n2`
/// with [`two_sample_block_sizes`]. The reference is `t_{min(k1,k2)-1}`,
/// or the normal law when a sample holds a single block.
pub fn two_sample_w(data: &TwoSampleData, m1: usize, m2: usize) -> Result<StatValue> {
    let p1 = bbsb_partition(data.x1.len(), m1, m2)?;
    let p2 = bbsb_partition(data.x2.len(), m1, m2)?;
    let moments = |xs: &Series, p: &BlockPartition| {
        let mut sums = Vec::with_capacity(p.k);
        p.sums_into(xs.values(), crate::blocks::BlockTag::Big, &mut sums);
        let s: f64 = sums.iter().sum();
        let v2: f64 = sums.iter().map(|y| y * y).sum();
        (s, v2, p.k as f64)
    };
    let (s1, v1, k1) = moments(&data.x1, &p1);
    let (s2, v2, k2) = moments(&data.x2, &p2);
    let den = (v1 / (k1 * k1) + v2 / (k2 * k2)).sqrt();
    if den.is_nan() || den <= 0.0 {
        return Err(Error::DegenerateDenominator(StatKind::TwoSampleW.name()));
    }
    let k_min = p1.k.min(p2.k);
    let reference = if k_min >= 2 { RefDist::StudentT(k_min as u32 - 1) } else { RefDist::Normal };
    Ok(StatValue {
        kind: StatKind::TwoSampleW,
        value: (s1 / k1 - s2 / k2) / den,
        k: k_min,
        reference,
    })
}

/// Block sizes for the two-sample statistic, from the pooled length.
pub fn two_sample_block_sizes(n1: usize, n2: usize, alpha1: f64, alpha2: f64) -> Result<(usize, usize)> {
    let (m1, m2) = crate::blocks::exponents_to_sizes(n1 + n2, alpha1, alpha2)?;
    if m1 + m2 > n1.min(n2) {
        return Err(Error::Config(format!(
            "block period {} exceeds the shorter sample ({})",
            m1 + m2,
            n1.min(n2)
        )));
    }
    Ok((m1, m2))
}

/// Odd-block sums used by the interlaced statistics, exposed for the
/// inference module.
pub(crate) fn interlaced_sums(xs: &[f64], m: usize) -> Result<(Vec<f64>, usize)> {
    let p = interlace_partition(xs.len(), m)?;
    let mut sums = Vec::with_capacity(p.k);
    p.sums_into(xs, crate::blocks::BlockTag::Odd, &mut sums);
    Ok((sums, p.k))
}
