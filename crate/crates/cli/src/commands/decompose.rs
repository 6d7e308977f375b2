use std::time::Instant;

use gptcca_core::{
    als_decompose, gp_decompose, normalize_cp, refine_from_init, relative_residual, GpOptions,
    SolveReport,
};
use serde::Serialize;

use super::{check_rank, solve_options, SolverEcho, Timings};
use crate::error::CliResult;
use crate::files::{emit_report, paths_display, read_tensor_file, report_path, write_cp};
use crate::{DecomposeArgs, Method};

#[derive(Debug, Serialize)]
struct Report {
    command: &'static str,
    input: String,
    shape: Vec<usize>,
    rank: usize,
    method: &'static str,
    seed: u64,
    solver: SolverEcho,
    /// GP residual, present for `gp` and `gp+refine`.
    gp_residual: Option<f64>,
    /// Residual after ALS sweeps, present for `als` and `gp+refine`.
    refined_residual: Option<f64>,
    residual: f64,
    sweeps: Option<SweepSummary>,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Timings>,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    sweeps_used: usize,
    converged: bool,
    residual_history: Vec<f64>,
}

impl From<&SolveReport> for SweepSummary {
    fn from(r: &SolveReport) -> Self {
        SweepSummary {
            sweeps_used: r.sweeps_used,
            converged: r.converged,
            residual_history: r.residual_history.clone(),
        }
    }
}

pub fn run(args: &DecomposeArgs, with_timings: bool) -> CliResult<()> {
    check_rank(args.rank)?;
    let opts = solve_options(&args.solver, args.seed)?;
    let f = read_tensor_file(&args.input)?;
    let mut timings = Timings::default();

    let mut gp_residual = None;
    let mut refined_residual = None;
    let mut sweeps = None;
    let cp = match args.method {
        Method::Gp | Method::GpRefine => {
            let t0 = Instant::now();
            let gp = gp_decompose(&f, args.rank, &GpOptions::with_seed(args.seed))?;
            timings.record("gp", t0.elapsed());
            gp_residual = Some(relative_residual(&f, &gp)?);
            if args.method == Method::GpRefine {
                let (refined, report) = refine_from_init(&f, &gp, &opts)?;
                timings.record("refine", report.wall_time);
                refined_residual = Some(relative_residual(&f, &refined)?);
                sweeps = Some(SweepSummary::from(&report));
                refined
            } else {
                gp
            }
        }
        Method::Als => {
            let (cp, report) = als_decompose(&f, args.rank, None, &opts)?;
            timings.record("als", report.wall_time);
            refined_residual = Some(relative_residual(&f, &cp)?);
            sweeps = Some(SweepSummary::from(&report));
            cp
        }
    };
    let normalized = normalize_cp(&cp)?;
    let residual = relative_residual(&f, &normalized)?;
    let outputs = write_cp(&args.out, &normalized)?;

    let report = Report {
        command: "decompose",
        input: args.input.display().to_string(),
        shape: f.shape().to_vec(),
        rank: args.rank,
        method: args.method.name(),
        seed: args.seed,
        solver: SolverEcho::from(&opts),
        gp_residual,
        refined_residual,
        residual,
        sweeps,
        outputs: paths_display(&outputs),
        timings: timings.finish(with_timings),
    };
    emit_report(&report_path(&args.out), &report)
}
