//! GP initialization versus random-restart ALS on planted tensors.
//!
//! Trial `t` draws its seeds from a `ChaCha8Rng` seeded with the master
//! seed: tensor seed, GP seed, then one seed per ALS restart, trial after
//! trial. Every seed is echoed in the report.

use std::time::{Duration, Instant};

use gptcca_core::synth::planted_tensor;
use gptcca_core::{
    als_decompose, gp_decompose, refine_from_init, relative_residual, GpOptions, SolveOptions,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{check_noise, check_rank, parse_shape, solve_options, SolverEcho, Timings};
use crate::error::{CliError, CliResult};
use crate::files::{emit_report, fmt_f64, report_path, with_suffix, write_text};
use crate::BenchArgs;

/// Residual at or below which a noiseless trial counts as exact recovery.
pub const EXACT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct TrialSeeds {
    pub tensor: u64,
    pub gp: u64,
    pub als: Vec<u64>,
}

impl TrialSeeds {
    pub fn derive(master: u64, trials: usize, restarts: usize) -> Vec<TrialSeeds> {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        (0..trials)
            .map(|_| TrialSeeds {
                tensor: rng.next_u64(),
                gp: rng.next_u64(),
                als: (0..restarts).map(|_| rng.next_u64()).collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub trial: usize,
    pub seeds: TrialSeeds,
    pub gp_residual: f64,
    pub refined_residual: f64,
    pub refine_sweeps: usize,
    pub als_residuals: Vec<f64>,
    pub als_best_residual: f64,
    pub als_best_restart: usize,
    pub als_sweeps: Vec<usize>,
    /// Every residual history of this trial was non-increasing.
    pub monotone: bool,
    /// GP+refine final residual ≤ best ALS final residual.
    pub gp_refine_wins: bool,
    #[serde(skip)]
    pub times: [Duration; 3],
}

pub fn run_trial(
    trial: usize,
    shape: &[usize],
    rank: usize,
    noise: f64,
    seeds: TrialSeeds,
    solve: &SolveOptions,
) -> CliResult<Trial> {
    let planted = planted_tensor(shape, rank, noise, seeds.tensor)?;
    let f = &planted.tensor;

    let t0 = Instant::now();
    let gp = gp_decompose(f, rank, &GpOptions::with_seed(seeds.gp))?;
    let gp_time = t0.elapsed();
    let gp_residual = relative_residual(f, &gp)?;
    let (refined, refine_report) = refine_from_init(f, &gp, solve)?;
    let refined_residual = relative_residual(f, &refined)?;
    let mut monotone = is_monotone(&refine_report.residual_history);

    let mut als_residuals = Vec::with_capacity(seeds.als.len());
    let mut als_sweeps = Vec::with_capacity(seeds.als.len());
    let mut als_time = Duration::ZERO;
    for &seed in &seeds.als {
        let opts = SolveOptions { seed, ..solve.clone() };
        let (cp, report) = als_decompose(f, rank, None, &opts)?;
        als_time += report.wall_time;
        monotone &= is_monotone(&report.residual_history);
        als_residuals.push(relative_residual(f, &cp)?);
        als_sweeps.push(report.sweeps_used);
    }
    let (als_best_restart, &als_best_residual) = als_residuals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| CliError::input("restarts: must be at least 1"))?;

    Ok(Trial {
        trial,
        seeds,
        gp_residual,
        refined_residual,
        refine_sweeps: refine_report.sweeps_used,
        als_residuals,
        als_best_residual,
        als_best_restart,
        als_sweeps,
        monotone,
        gp_refine_wins: refined_residual <= als_best_residual,
        times: [gp_time, refine_report.wall_time, als_time],
    })
}

fn is_monotone(history: &[f64]) -> bool {
    history.windows(2).all(|w| w[1] <= w[0])
}

#[derive(Debug, Serialize)]
struct Stats {
    mean: f64,
    std: f64,
}

fn stats(xs: impl Iterator<Item = f64>) -> Stats {
    let xs: Vec<f64> = xs.collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Stats { mean, std: var.sqrt() }
}

#[derive(Debug, Serialize)]
struct Summary {
    trials: usize,
    gp_residual: Stats,
    refined_residual: Stats,
    als_best_residual: Stats,
    refine_sweeps: Stats,
    als_sweeps_per_restart: Stats,
    gp_refine_win_rate: f64,
    gp_exact_rate: f64,
    all_monotone: bool,
}

#[derive(Debug, Serialize)]
struct Report {
    command: &'static str,
    shape: Vec<usize>,
    rank: usize,
    noise_sigma: f64,
    trials: usize,
    restarts: usize,
    master_seed: u64,
    solver: SolverEcho,
    exact_tol: f64,
    summary: Summary,
    per_trial: Vec<Trial>,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Timings>,
}

pub fn run(args: &BenchArgs, with_timings: bool) -> CliResult<()> {
    let shape = parse_shape(&args.shape)?;
    check_rank(args.rank)?;
    check_noise(args.noise_sigma)?;
    if args.trials == 0 {
        return Err(CliError::input("trials: must be at least 1"));
    }
    if args.restarts == 0 {
        return Err(CliError::input("restarts: must be at least 1"));
    }
    let solve = solve_options(&args.solver, args.seed)?;
    let seeds = TrialSeeds::derive(args.seed, args.trials, args.restarts);

    let mut trials = Vec::with_capacity(args.trials);
    for (t, s) in seeds.into_iter().enumerate() {
        trials.push(run_trial(t, &shape, args.rank, args.noise_sigma, s, &solve)?);
    }

    let n = trials.len() as f64;
    let summary = Summary {
        trials: trials.len(),
        gp_residual: stats(trials.iter().map(|t| t.gp_residual)),
        refined_residual: stats(trials.iter().map(|t| t.refined_residual)),
        als_best_residual: stats(trials.iter().map(|t| t.als_best_residual)),
        refine_sweeps: stats(trials.iter().map(|t| t.refine_sweeps as f64)),
        als_sweeps_per_restart: stats(
            trials.iter().flat_map(|t| t.als_sweeps.iter().map(|&s| s as f64)),
        ),
        gp_refine_win_rate: trials.iter().filter(|t| t.gp_refine_wins).count() as f64 / n,
        gp_exact_rate: trials.iter().filter(|t| t.gp_residual <= EXACT_TOL).count() as f64 / n,
        all_monotone: trials.iter().all(|t| t.monotone),
    };

    let csv_path = with_suffix(&args.out, ".trials.csv");
    write_text(&csv_path, &trials_csv(&trials, with_timings))?;

    let mut timings = Timings::default();
    for (name, k) in [("gp", 0), ("refine", 1), ("als", 2)] {
        timings.record(name, trials.iter().map(|t| t.times[k]).sum());
    }
    let report = Report {
        command: "bench",
        shape,
        rank: args.rank,
        noise_sigma: args.noise_sigma,
        trials: args.trials,
        restarts: args.restarts,
        master_seed: args.seed,
        solver: SolverEcho::from(&solve),
        exact_tol: EXACT_TOL,
        summary,
        per_trial: trials,
        outputs: vec![csv_path.display().to_string()],
        timings: timings.finish(with_timings),
    };
    emit_report(&report_path(&args.out), &report)
}

fn trials_csv(trials: &[Trial], with_timings: bool) -> String {
    let mut out = String::from(
        "trial,tensor_seed,gp_seed,gp_residual,refined_residual,refine_sweeps,\
         als_best_residual,als_best_seed,gp_refine_wins,monotone",
    );
    if with_timings {
        out.push_str(",gp_seconds,refine_seconds,als_seconds");
    }
    out.push('\n');
    for t in trials {
        let fields = [
            t.trial.to_string(),
            t.seeds.tensor.to_string(),
            t.seeds.gp.to_string(),
            fmt_f64(t.gp_residual),
            fmt_f64(t.refined_residual),
            t.refine_sweeps.to_string(),
            fmt_f64(t.als_best_residual),
            t.seeds.als[t.als_best_restart].to_string(),
            t.gp_refine_wins.to_string(),
            t.monotone.to_string(),
        ];
        out.push_str(&fields.join(","));
        if with_timings {
            for d in t.times {
                out.push(',');
                out.push_str(&fmt_f64(d.as_secs_f64()));
            }
        }
        out.push('\n');
    }
    out
}
