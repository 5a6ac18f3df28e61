//! Self-normalized block statistics for weakly dependent time series.
//!
//! * [`dist`]: normal and Student-t tails and quantiles.
//! * [`blocks`]: big-block/small-block, interlaced and batch partitions.
//! * [`stats`]: the normalized statistics built on those partitions.
//! * [`procgen`]: seeded AR(1), ARCH(1) and high-dimensional linear paths.
//! * [`mc`]: reproducible Monte Carlo tail-ratio tables.
//! * [`infer`]: Bonferroni simultaneous intervals for a mean vector.

pub mod blocks;
pub mod dist;
pub mod error;
pub mod infer;
pub mod io;
pub mod mc;
pub mod procgen;
pub mod stats;

pub use blocks::{BlockPartition, BlockScheme, BlockSums, BlockTag};
pub use dist::RefDist;
pub use error::{Error, Result};
pub use infer::{CiOptions, CiSet, TestResult};
pub use mc::{RatioGrid, SimConfig, TailTable};
pub use procgen::{PanelSeries, ProcessSpec, Seed};
pub use stats::{Normalization, Series, StatKind, StatValue, Statistic, TwoSampleData};
