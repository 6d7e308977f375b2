//! `tcca-fit` and `tcca-transform`.
//!
//! The model file is JSON with matrices as row-major nested arrays. Floats
//! are written in shortest round-trip form, so a reloaded model reproduces
//! the fitted projections bit for bit.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gptcca_core::numerics::pca_basis;
use gptcca_core::tcca::{
    higher_order_correlation, project_views, random_projections, tcca_fit, EpsFloor,
};
use gptcca_core::{MultiViewDataset, TccaOptions};
use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};

use super::{check_rank, solve_options, SolverEcho, Timings};
use crate::error::{CliError, CliResult};
use crate::files::{
    emit_report, from_rows, paths_display, read_matrix, report_path, rows, to_json, write_matrix,
    write_text,
};
use crate::{TccaFitArgs, TccaTransformArgs};

const MODEL_FORMAT: &str = "gptcca-tcca-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub rank: usize,
    pub center: bool,
    pub eps: EpsSpec,
    pub seed: u64,
    pub max_sweeps: usize,
    pub rel_change_tol: f64,
    pub views: Vec<ViewModel>,
    pub cp: CpFile,
    pub fit: FitSummary,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EpsSpec {
    RelativeToMeanEigenvalue(f64),
    Absolute(f64),
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ViewModel {
    pub source: String,
    /// Feature count of the raw view.
    pub input_dim: usize,
    pub pca: Option<PcaFile>,
    /// Eigenvalue floor applied to this view's covariance.
    pub eps_used: f64,
    pub whitener: Vec<Vec<f64>>,
    pub projection: Vec<Vec<f64>>,
    /// Training mean of the (reduced) features, present when centered.
    pub mean: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PcaFile {
    pub mean: Vec<f64>,
    /// `input_dim × pca_dim`.
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CpFile {
    pub weights: Vec<f64>,
    pub factors: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitSummary {
    pub samples: usize,
    pub gp_residual: f64,
    pub refined_residual: f64,
    pub sweeps_used: usize,
    pub converged: bool,
    pub training_rho: f64,
}

#[derive(Debug, Serialize)]
struct FitReport {
    command: &'static str,
    views: Vec<String>,
    samples: usize,
    input_dims: Vec<usize>,
    fitted_dims: Vec<usize>,
    rank: usize,
    pca_dim: Option<usize>,
    center: bool,
    eps: EpsSpec,
    eps_used: Vec<f64>,
    seed: u64,
    solver: SolverEcho,
    gp_residual: f64,
    refined_residual: f64,
    sweeps_used: usize,
    converged: bool,
    weights: Vec<f64>,
    training_rho: f64,
    baseline_seed: u64,
    baseline_rho: f64,
    model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Timings>,
}

#[derive(Debug, Serialize)]
struct TransformReport {
    command: &'static str,
    model: String,
    views: Vec<String>,
    samples: usize,
    rank: usize,
    output_columns: usize,
    rho: f64,
    outputs: Vec<String>,
}

fn read_views(paths: &[PathBuf]) -> CliResult<Vec<DMatrix<f64>>> {
    let views: Vec<DMatrix<f64>> = paths.iter().map(|p| read_matrix(p)).collect::<CliResult<_>>()?;
    let n = views[0].nrows();
    if let Some((j, v)) = views.iter().enumerate().find(|(_, v)| v.nrows() != n) {
        return Err(CliError::input(format!(
            "views: {} has {} rows but {} has {n}",
            paths[j].display(),
            v.nrows(),
            paths[0].display()
        )));
    }
    Ok(views)
}

fn column_mean(y: &DMatrix<f64>) -> RowDVector<f64> {
    y.row_mean()
}

fn subtract_row(y: &DMatrix<f64>, mean: &RowDVector<f64>) -> DMatrix<f64> {
    let mut out = y.clone();
    for mut row in out.row_iter_mut() {
        row -= mean;
    }
    out
}

fn apply_pca(y: &DMatrix<f64>, pca: &PcaFile, what: &str) -> CliResult<DMatrix<f64>> {
    let basis = from_rows(&pca.basis, what)?;
    let mean = RowDVector::from_row_slice(&pca.mean);
    if basis.nrows() != y.ncols() || mean.len() != y.ncols() {
        return Err(CliError::input(format!(
            "{what}: PCA basis expects {} features, view has {}",
            basis.nrows(),
            y.ncols()
        )));
    }
    Ok(subtract_row(y, &mean) * basis)
}

fn concat_columns(z: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = z[0].nrows();
    let total: usize = z.iter().map(|m| m.ncols()).sum();
    let mut out = DMatrix::zeros(n, total);
    let mut at = 0;
    for m in z {
        out.columns_mut(at, m.ncols()).copy_from(m);
        at += m.ncols();
    }
    out
}

pub fn fit(args: &TccaFitArgs, with_timings: bool) -> CliResult<()> {
    check_rank(args.rank)?;
    let solve = solve_options(&args.solver, args.seed)?;
    let eps = match args.eps {
        None => EpsFloor::default(),
        Some(e) if e.is_finite() && e >= 0.0 => EpsFloor::Absolute(e),
        Some(e) => {
            return Err(CliError::input(format!("eps: {e} must be finite and non-negative")))
        }
    };
    let raw = read_views(&args.views)?;
    let n = raw[0].nrows();
    let mut timings = Timings::default();

    let mut pcas = Vec::with_capacity(raw.len());
    let mut features = Vec::with_capacity(raw.len());
    for (path, y) in args.views.iter().zip(&raw) {
        match args.pca_dim {
            Some(d) => {
                if d == 0 || d > y.ncols() || d > n {
                    return Err(CliError::input(format!(
                        "pca_dim: {d} must be between 1 and min(rows, columns) = {} for {}",
                        y.ncols().min(n),
                        path.display()
                    )));
                }
                let pca = PcaFile {
                    mean: column_mean(y).iter().copied().collect(),
                    basis: rows(&pca_basis(y, d)?),
                };
                features.push(apply_pca(y, &pca, "pca")?);
                pcas.push(Some(pca));
            }
            None => {
                features.push(y.clone());
                pcas.push(None);
            }
        }
    }
    let dataset = MultiViewDataset::new(features)?;
    let opts = TccaOptions {
        eps,
        center: args.center,
        seed: args.seed,
        solve: solve.clone(),
    };
    let t0 = Instant::now();
    let model = tcca_fit(&dataset, args.rank, &opts)?;
    timings.record("fit", t0.elapsed());

    let z = project_views(&model.projections, &dataset, model.view_means.as_deref())?;
    let training_rho = higher_order_correlation(&z)?;
    let baseline_seed = args.seed.wrapping_add(1);
    let baseline = random_projections(&dataset, args.rank, args.center, baseline_seed);
    let baseline_means: Option<Vec<Vec<f64>>> = args.center.then(|| {
        dataset
            .views()
            .iter()
            .map(|y| column_mean(y).iter().copied().collect())
            .collect()
    });
    let zb = project_views(&baseline, &dataset, baseline_means.as_deref())?;
    let baseline_rho = higher_order_correlation(&zb)?;

    let refined_residual = model.refine_report.final_residual();
    let eps_spec = || match eps {
        EpsFloor::RelativeToMeanEigenvalue(f) => EpsSpec::RelativeToMeanEigenvalue(f),
        EpsFloor::Absolute(e) => EpsSpec::Absolute(e),
    };
    let views = args
        .views
        .iter()
        .zip(&raw)
        .zip(pcas)
        .enumerate()
        .map(|(j, ((path, y), pca))| ViewModel {
            source: path.display().to_string(),
            input_dim: y.ncols(),
            pca,
            eps_used: model.eps_used[j],
            whitener: rows(&model.whiteners[j]),
            projection: rows(&model.projections[j]),
            mean: model.view_means.as_ref().map(|m| m[j].clone()),
        })
        .collect();
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        rank: args.rank,
        center: args.center,
        eps: eps_spec(),
        seed: args.seed,
        max_sweeps: solve.max_sweeps,
        rel_change_tol: solve.rel_change_tol,
        views,
        cp: CpFile {
            weights: model.cp.weights().to_vec(),
            factors: model.cp.factors().iter().map(rows).collect(),
        },
        fit: FitSummary {
            samples: n,
            gp_residual: model.gp_residual,
            refined_residual,
            sweeps_used: model.refine_report.sweeps_used,
            converged: model.refine_report.converged,
            training_rho,
        },
    };
    write_text(&args.out, &to_json(&file))?;

    let report = FitReport {
        command: "tcca-fit",
        views: paths_display(&args.views),
        samples: n,
        input_dims: raw.iter().map(|y| y.ncols()).collect(),
        fitted_dims: dataset.dims(),
        rank: args.rank,
        pca_dim: args.pca_dim,
        center: args.center,
        eps: eps_spec(),
        eps_used: model.eps_used.clone(),
        seed: args.seed,
        solver: SolverEcho::from(&solve),
        gp_residual: model.gp_residual,
        refined_residual,
        sweeps_used: model.refine_report.sweeps_used,
        converged: model.refine_report.converged,
        weights: model.cp.weights().to_vec(),
        training_rho,
        baseline_seed,
        baseline_rho,
        model: args.out.display().to_string(),
        timings: timings.finish(with_timings),
    };
    emit_report(&report_path(&args.out), &report)
}

pub fn load_model(path: &Path) -> CliResult<ModelFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let model: ModelFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
        return Err(CliError::input(format!(
            "{}: format: expected {MODEL_FORMAT} version {MODEL_VERSION}",
            path.display()
        )));
    }
    Ok(model)
}

pub fn transform(args: &TccaTransformArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let raw = read_views(&args.views)?;
    if raw.len() != model.views.len() {
        return Err(CliError::input(format!(
            "views: model has {} views, {} files given",
            model.views.len(),
            raw.len()
        )));
    }
    let mut features = Vec::with_capacity(raw.len());
    let mut projections = Vec::with_capacity(raw.len());
    let mut means = Vec::with_capacity(raw.len());
    for (j, (y, view)) in raw.iter().zip(&model.views).enumerate() {
        if y.ncols() != view.input_dim {
            return Err(CliError::input(format!(
                "views: {} has {} columns, model view {j} expects {}",
                args.views[j].display(),
                y.ncols(),
                view.input_dim
            )));
        }
        features.push(match &view.pca {
            Some(pca) => apply_pca(y, pca, &format!("views[{j}].pca"))?,
            None => y.clone(),
        });
        projections.push(from_rows(&view.projection, &format!("views[{j}].projection"))?);
        if let Some(m) = &view.mean {
            means.push(m.clone());
        }
    }
    let dataset = MultiViewDataset::new(features)?;
    let means = model.center.then_some(means);
    let z = project_views(&projections, &dataset, means.as_deref())?;
    let rho = higher_order_correlation(&z)?;
    let out = concat_columns(&z);
    write_matrix(&args.out, &out)?;

    let report = TransformReport {
        command: "tcca-transform",
        model: args.model.display().to_string(),
        views: paths_display(&args.views),
        samples: dataset.num_samples(),
        rank: model.rank,
        output_columns: out.ncols(),
        rho,
        outputs: vec![args.out.display().to_string()],
    };
    emit_report(&report_path(&args.out), &report)
}
