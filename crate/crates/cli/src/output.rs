//! Output targets and run manifests.

use std::fs;
use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::CliResult;

/// Provenance attached to every output: how it was produced and by what.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub master_seed: Option<u64>,
    pub rng_algorithm: &'static str,
    pub version: &'static str,
    pub duration_secs: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Manifest {
    pub fn start(config: serde_json::Value, master_seed: Option<u64>) -> Self {
        Manifest {
            command: std::env::args().collect(),
            config,
            master_seed,
            rng_algorithm: blocknorm::procgen::RNG_ALGORITHM,
            version: env!("CARGO_PKG_VERSION"),
            duration_secs: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn finish(mut self) -> Self {
        if let Some(t) = self.started.take() {
            self.duration_secs = t.elapsed().as_secs_f64();
        }
        self
    }
}

/// JSON document holding the manifest next to the result.
pub fn json_document<T: Serialize>(manifest: &Manifest, result: &T) -> Vec<u8> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        manifest: &'a Manifest,
        result: &'a T,
    }
    let mut out = serde_json::to_vec_pretty(&Doc { manifest, result }).expect("serializable output");
    out.push(b'\n');
    out
}

/// Writes `bytes` to `path`, or to standard output for "-".
pub fn write_target(path: &str, bytes: &[u8]) -> CliResult<()> {
    let written = if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes).and_then(|_| out.flush())
    } else {
        fs::write(path, bytes)
    };
    written.map_err(|e| blocknorm::Error::Io(format!("cannot write '{path}': {e}")).into())
}

/// Writes a non-JSON artifact with its manifest in `<path>.manifest.json`;
/// on standard output the manifest goes to standard error instead.
pub fn write_with_manifest(path: &str, bytes: &[u8], manifest: &Manifest) -> CliResult<()> {
    write_target(path, bytes)?;
    let json = serde_json::to_string_pretty(manifest).expect("serializable manifest");
    if path == "-" {
        eprintln!("{json}");
        Ok(())
    } else {
        write_target(&format!("{path}.manifest.json"), format!("{json}\n").as_bytes())
    }
}
