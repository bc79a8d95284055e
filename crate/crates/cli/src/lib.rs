//! Shared plumbing for the `ted`, `party` and `harness` binaries.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use dbc::Backend;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// `mock`, `prod`, or a full backend header such as `mock p=101`.
pub fn parse_backend(s: &str) -> Result<Backend, String> {
    match s {
        "mock" => Ok(Backend::default_mock()),
        "prod" | "production" => Ok(Backend::Production),
        other => other.parse().map_err(|e: dbc::Error| e.to_string()),
    }
}

/// Seeded when asked, otherwise from OS entropy.
pub fn rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn finish(result: Result<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
