pub mod bench;
pub mod decompose;
pub mod synth;
pub mod tcca;

use std::time::Duration;

use gptcca_core::SolveOptions;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::SolverArgs;

/// Parses `5x4x3` into `[5, 4, 3]`.
pub fn parse_shape(s: &str) -> CliResult<Vec<usize>> {
    let dims: Option<Vec<usize>> = s
        .split(['x', 'X', ','])
        .map(|d| d.trim().parse().ok().filter(|&n: &usize| n > 0))
        .collect();
    match dims {
        Some(d) if !d.is_empty() => Ok(d),
        _ => Err(CliError::input(format!(
            "shape: {s:?} is not a list of positive integers such as 5x4x3"
        ))),
    }
}

pub fn check_rank(rank: usize) -> CliResult<()> {
    if rank == 0 {
        return Err(gptcca_core::Error::Rank {
            rank,
            reason: "rank must be at least 1".into(),
        }
        .into());
    }
    Ok(())
}

pub fn check_noise(sigma: f64) -> CliResult<()> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(CliError::input(format!(
            "noise-sigma: {sigma} must be finite and non-negative"
        )));
    }
    Ok(())
}

pub fn solve_options(args: &SolverArgs, seed: u64) -> CliResult<SolveOptions> {
    if args.max_sweeps == 0 {
        return Err(CliError::input("max-sweeps: must be at least 1"));
    }
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(CliError::input(format!("tol: {} must be positive", args.tol)));
    }
    Ok(SolveOptions {
        max_sweeps: args.max_sweeps,
        rel_change_tol: args.tol,
        seed,
    })
}

#[derive(Debug, Serialize)]
pub struct SolverEcho {
    pub max_sweeps: usize,
    pub rel_change_tol: f64,
}

impl From<&SolveOptions> for SolverEcho {
    fn from(o: &SolveOptions) -> Self {
        SolverEcho {
            max_sweeps: o.max_sweeps,
            rel_change_tol: o.rel_change_tol,
        }
    }
}

/// Named wall-clock durations in seconds.
#[derive(Debug, Default, Serialize)]
pub struct Timings(pub Vec<(String, f64)>);

impl Timings {
    pub fn record(&mut self, name: &str, d: Duration) {
        self.0.push((name.to_string(), d.as_secs_f64()));
    }

    /// Returns the timings for the report when requested, otherwise prints
    /// them to stderr and returns `None`.
    pub fn finish(self, in_report: bool) -> Option<Timings> {
        if in_report {
            return Some(self);
        }
        for (name, secs) in &self.0 {
            eprintln!("time {name}: {secs:.6} s");
        }
        None
    }
}
