//! Front end for the `ctqw` binary: argument parsing, command dispatch and
//! report emission.

mod commands;
pub mod config;
mod svg;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use serde_json::json;

pub use config::{parse_args, RunConfig, UsageError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_TOLERANCE: u8 = 3;
pub const EXIT_DECOMPOSITION: u8 = 4;
pub const EXIT_IO: u8 = 5;
pub const EXIT_CAP: u8 = 6;
pub const EXIT_NUMERIC: u8 = 7;

/// Result of a completed run. `status` is non-zero only for a tolerance
/// failure whose report was still written.
#[derive(Debug, Clone)]
pub struct Report {
    pub status: u8,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Output file that could not be written.
#[derive(Debug, thiserror::Error)]
#[error("cannot write {}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// Maps an error chain to the process exit status.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<clap::Error>() {
            return e.exit_code().clamp(0, 255) as u8;
        }
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<OutputError>() || cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<ctqw::Error>() {
            return match e {
                ctqw::Error::NoConvergence { .. } => EXIT_DECOMPOSITION,
                ctqw::Error::CapExceeded { .. } | ctqw::Error::VertexCountOverflow { .. } => EXIT_CAP,
                ctqw::Error::InvalidTree { .. } => EXIT_USAGE,
                _ => EXIT_NUMERIC,
            };
        }
    }
    EXIT_NUMERIC
}

/// Worker pool sized by `CTQW_THREADS` when set.
fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("CTQW_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| UsageError(format!("CTQW_THREADS must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().context("cannot start worker pool")
}

// Writes every artifact or none: on the first failure the files already
// written in this run are removed.
fn write_all(items: Vec<(PathBuf, String)>) -> anyhow::Result<Vec<PathBuf>> {
    let mut written: Vec<PathBuf> = Vec::with_capacity(items.len());
    for (path, contents) in items {
        if let Err(source) = fs::write(&path, contents) {
            let _ = fs::remove_file(&path);
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(OutputError { path, source }.into());
        }
        written.push(path);
    }
    Ok(written)
}

/// Executes a validated configuration and writes the requested outputs.
pub fn run(config: &RunConfig) -> anyhow::Result<Report> {
    let start = Instant::now();
    let outputs = config.outputs();
    let want_plot = outputs.plot.is_some();
    let pool = thread_pool()?;
    let products = pool.install(|| match config {
        RunConfig::Simulate { p, m, t_grid, methods, indexing, hamiltonian, shift, order, .. } => {
            commands::simulate(*p, *m, t_grid, methods, indexing, *hamiltonian, *shift, *order, want_plot)
        }
        RunConfig::Measure { p, m, samples, .. } => commands::measure(*p, *m, *samples, want_plot),
        RunConfig::Compare { p, m, t_grid, methods, tol, .. } => {
            commands::compare(*p, *m, t_grid, methods, *tol, want_plot)
        }
        RunConfig::Qclt { ks, p_ladder, t_grid, order, .. } => {
            commands::qclt(ks, p_ladder, t_grid, *order, want_plot)
        }
        RunConfig::Ylimit { t_grid, grid_points, .. } => commands::ylimit(t_grid, *grid_points, want_plot),
    })?;

    let mut items = Vec::new();
    if let (Some(path), Some(csv)) = (&outputs.csv, products.csv) {
        items.push((path.clone(), csv));
    }
    if let Some(path) = &outputs.json {
        let elapsed = (!outputs.omit_timing).then(|| start.elapsed().as_secs_f64());
        let report = json!({
            "config": config,
            "results": products.results,
            "max_errors": products.max_errors,
            "wall_time_seconds": elapsed,
        });
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        items.push((path.clone(), text));
    }
    if let (Some(path), Some(svg)) = (&outputs.plot, products.plot) {
        items.push((path.clone(), svg));
    }
    let files = write_all(items)?;
    Ok(Report {
        status: products.status,
        summary: products.summary,
        files,
    })
}

/// Parse, run and report; returns the process exit status.
pub fn main_with_args<I, S>(argv: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
            } else {
                eprintln!("error: {err:#}");
            }
            return exit_code(&err);
        }
    };
    match run(&config) {
        Ok(report) => {
            println!("{}", report.summary);
            if report.status == EXIT_TOLERANCE {
                eprintln!("error: tolerance exceeded");
            }
            report.status
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}
