use gptcca_core::synth::planted_tensor;
use gptcca_core::tcca::synth_multiview;
use serde::Serialize;

use super::{check_noise, check_rank, parse_shape};
use crate::error::{CliError, CliResult};
use crate::files::{
    emit_report, paths_display, report_path, with_suffix, write_cp, write_matrix,
    write_tensor_file,
};
use crate::{SynthMultiviewArgs, SynthTensorArgs};

#[derive(Debug, Serialize)]
struct TensorReport {
    command: &'static str,
    kind: &'static str,
    shape: Vec<usize>,
    rank: usize,
    noise_sigma: f64,
    seed: u64,
    norm: f64,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize)]
struct MultiviewReport {
    command: &'static str,
    kind: &'static str,
    dims: Vec<usize>,
    samples: usize,
    rank: usize,
    noise_sigma: f64,
    seed: u64,
    outputs: Vec<String>,
}

/// Writes `<out>.tnsr` plus the planted factors as
/// `<out>.truth.mode<j>.csv` and `<out>.truth.weights.csv`.
pub fn tensor(args: &SynthTensorArgs) -> CliResult<()> {
    let shape = parse_shape(&args.shape)?;
    check_rank(args.rank)?;
    check_noise(args.noise_sigma)?;
    let planted = planted_tensor(&shape, args.rank, args.noise_sigma, args.seed)?;

    let tensor_path = with_suffix(&args.out, ".tnsr");
    write_tensor_file(&tensor_path, &planted.tensor)?;
    let mut outputs = vec![tensor_path];
    outputs.extend(write_cp(&with_suffix(&args.out, ".truth"), &planted.truth)?);

    let report = TensorReport {
        command: "synth",
        kind: "tensor",
        shape,
        rank: args.rank,
        noise_sigma: args.noise_sigma,
        seed: args.seed,
        norm: planted.tensor.hs_norm(),
        outputs: paths_display(&outputs),
    };
    emit_report(&report_path(&args.out), &report)
}

/// Writes `<out>.view<j>.csv`, the loadings as `<out>.loadings<j>.csv` and
/// the latent component of each sample as `<out>.labels.csv`.
pub fn multiview(args: &SynthMultiviewArgs) -> CliResult<()> {
    let dims = parse_shape(&args.shape)?;
    if dims.len() < 2 {
        return Err(CliError::input("shape: a multi-view dataset needs at least 2 views"));
    }
    if args.samples == 0 {
        return Err(CliError::input("samples: must be at least 1"));
    }
    check_rank(args.rank)?;
    check_noise(args.noise_sigma)?;
    let planted = synth_multiview(args.samples, &dims, args.rank, args.noise_sigma, args.seed)?;

    let mut outputs = Vec::new();
    for (j, y) in planted.dataset.views().iter().enumerate() {
        let path = with_suffix(&args.out, &format!(".view{j}.csv"));
        write_matrix(&path, y)?;
        outputs.push(path);
    }
    for (j, l) in planted.loadings.iter().enumerate() {
        let path = with_suffix(&args.out, &format!(".loadings{j}.csv"));
        write_matrix(&path, l)?;
        outputs.push(path);
    }
    let labels_path = with_suffix(&args.out, ".labels.csv");
    let labels: String = planted.labels.iter().map(|c| format!("{c}\n")).collect();
    crate::files::write_text(&labels_path, &labels)?;
    outputs.push(labels_path);

    let report = MultiviewReport {
        command: "synth",
        kind: "multiview",
        dims,
        samples: args.samples,
        rank: args.rank,
        noise_sigma: args.noise_sigma,
        seed: args.seed,
        outputs: paths_display(&outputs),
    };
    emit_report(&report_path(&args.out), &report)
}
