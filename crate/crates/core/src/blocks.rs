//! Block-index schemes: big-block/small-block, interlaced (odd blocks only)
//! and consecutive batches.
//!
//! Block bounds are reported 1-based and inclusive. Observations past the
//! last complete block (or block pair) are not assigned to any block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum BlockScheme {
    /// Alternating big blocks of length `m1` and small blocks of length `m2`.
    BigSmall { m1: usize, m2: usize },
    /// Blocks of length `m`, every other one kept.
    Interlace { m: usize },
    /// Consecutive non-overlapping blocks of length `m`, an even number of them.
    Batch { m: usize },
}

impl BlockScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BlockScheme::BigSmall { m1, m2 } => {
                if m2 == 0 {
                    return Err(Error::Config("block sizes must be >= 1".into()));
                }
                if m1 < m2 {
                    return Err(Error::Config(format!(
                        "big block size m1={m1} must be >= small block size m2={m2}"
                    )));
                }
            }
            BlockScheme::Interlace { m } | BlockScheme::Batch { m } => {
                if m == 0 {
                    return Err(Error::Config("block size must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Builds the partition of `1..=n` for this scheme.
    pub fn partition(&self, n: usize) -> Result<BlockPartition> {
        match *self {
            BlockScheme::BigSmall { m1, m2 } => bbsb_partition(n, m1, m2),
            BlockScheme::Interlace { m } => interlace_partition(n, m),
            BlockScheme::Batch { m } => batch_partition(n, m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockTag {
    Big,
    Small,
    Odd,
    Batch,
}

/// Inclusive 1-based index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    pub tag: BlockTag,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    /// Zero-based half-open range, for slicing.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start - 1..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub blocks: Vec<Block>,
    /// Number of big blocks, odd blocks, or batch *pairs*.
    pub k: usize,
    pub scheme: BlockScheme,
    pub n: usize,
}

impl BlockPartition {
    pub fn with_tag(&self, tag: BlockTag) -> impl Iterator<Item = &Block> + '_ {
        self.blocks.iter().filter(move |b| b.tag == tag)
    }

    /// The tag whose blocks enter the statistic for this scheme.
    pub fn primary_tag(&self) -> BlockTag {
        match self.scheme {
            BlockScheme::BigSmall { .. } => BlockTag::Big,
            BlockScheme::Interlace { .. } => BlockTag::Odd,
            BlockScheme::Batch { .. } => BlockTag::Batch,
        }
    }

    /// Sums of `series` over blocks carrying `tag`, written into `out`.
    /// The caller guarantees `series.len() == self.n`.
    pub(crate) fn sums_into(&self, series: &[f64], tag: BlockTag, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.with_tag(tag).map(|b| series[b.range()].iter().sum::<f64>()));
    }
}

/// Per-block sums for one block tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSums {
    pub values: Vec<f64>,
    pub block_length: usize,
    /// Number of blocks summed; equals `values.len()`.
    pub k: usize,
}

/// `(floor(n^alpha1), floor(n^alpha2))`.
///
/// A relative slack of 1e-12 is added before flooring so that exact powers
/// such as `1000^(1/3)` are not truncated by rounding.
pub fn exponents_to_sizes(n: usize, alpha1: f64, alpha2: f64) -> Result<(usize, usize)> {
    let valid = |a: f64| a > 0.0 && a < 1.0;
    if !valid(alpha1) || !valid(alpha2) {
        return Err(Error::Config(format!(
            "block exponents must lie in (0, 1), got {alpha1} and {alpha2}"
        )));
    }
    if alpha1 < alpha2 {
        return Err(Error::Config(format!(
            "alpha1={alpha1} must be >= alpha2={alpha2}"
        )));
    }
    let size = |a: f64| {
        let v = (n as f64).powf(a);
        (v * (1.0 + 1e-12)).floor() as usize
    };
    let (m1, m2) = (size(alpha1), size(alpha2));
    if m2 < 1 || m1 + m2 > n {
        return Err(Error::Config(format!(
            "n={n} is too small for exponents ({alpha1}, {alpha2})"
        )));
    }
    Ok((m1, m2))
}

pub fn bbsb_partition(n: usize, m1: usize, m2: usize) -> Result<BlockPartition> {
    let scheme = BlockScheme::BigSmall { m1, m2 };
    scheme.validate()?;
    let period = m1 + m2;
    if period > n {
        return Err(Error::Config(format!(
            "m1 + m2 = {period} exceeds series length {n}"
        )));
    }
    let k = n / period;
    let mut blocks = Vec::with_capacity(2 * k);
    for j in 0..k {
        let base = j * period;
        blocks.push(Block { start: base + 1, end: base + m1, tag: BlockTag::Big });
        blocks.push(Block { start: base + m1 + 1, end: base + period, tag: BlockTag::Small });
    }
    Ok(BlockPartition { blocks, k, scheme, n })
}

pub fn interlace_partition(n: usize, m: usize) -> Result<BlockPartition> {
    let scheme = BlockScheme::Interlace { m };
    scheme.validate()?;
    if 2 * m > n {
        return Err(Error::Config(format!("2m = {} exceeds series length {n}", 2 * m)));
    }
    let k = n / (2 * m);
    let blocks = (0..k)
        .map(|j| Block { start: 2 * m * j + 1, end: 2 * m * j + m, tag: BlockTag::Odd })
        .collect();
    Ok(BlockPartition { blocks, k, scheme, n })
}

pub fn batch_partition(n: usize, m: usize) -> Result<BlockPartition> {
    let scheme = BlockScheme::Batch { m };
    scheme.validate()?;
    if 2 * m > n {
        return Err(Error::Config(format!("2m = {} exceeds series length {n}", 2 * m)));
    }
    let k = n / (2 * m);
    let blocks = (0..2 * k)
        .map(|j| Block { start: j * m + 1, end: (j + 1) * m, tag: BlockTag::Batch })
        .collect();
    Ok(BlockPartition { blocks, k, scheme, n })
}

pub fn block_sums(series: &[f64], partition: &BlockPartition, tag: BlockTag) -> Result<BlockSums> {
    if series.len() != partition.n {
        return Err(Error::Shape(format!(
            "series has {} observations, partition expects {}",
            series.len(),
            partition.n
        )));
    }
    let mut values = Vec::new();
    partition.sums_into(series, tag, &mut values);
    let block_length = partition.with_tag(tag).next().map_or(0, Block::len);
    Ok(BlockSums { k: values.len(), values, block_length })
}
