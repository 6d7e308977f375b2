//! Tensor canonical correlation analysis.
//!
//! Given `m` aligned views `Y_j` (`N × n_j`), the data tensor is
//! `C = Σ_i y_{i,0} ⊗ … ⊗ y_{i,m−1}` and the view covariances are
//! `C_j = (1/N) Σ_i y_{i,j} y_{i,j}ᵀ`. Whitening every mode gives
//! `M = C_0^{-1/2} ×_0 … C_{m−1}^{-1/2} ×_{m−1} C`. A rank-`r` CP
//! approximation of `M` with unit factor columns `u^{s,j}` yields the
//! projections `p^{s,j} = C_j^{-1/2} u^{s,j}`.
//!
//! `C` carries no `1/N` factor while `C_j` does. Rescaling `M` only rescales
//! the CP weights, never the projection directions.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gp::{gp_decompose, GpOptions};
use crate::numerics::sym_inv_sqrt;
use crate::solvers::{normalize_cp, refine_from_init, SolveOptions, SolveReport};
use crate::tensor::{cp_to_tensor, mode_product, relative_residual, CpDecomposition, DenseTensor};

/// `N` samples observed in `m ≥ 2` views; view `j` is `N × n_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<DMatrix<f64>>,
}

impl MultiViewDataset {
    pub fn new(views: Vec<DMatrix<f64>>) -> Result<Self> {
        if views.len() < 2 {
            return Err(Error::contract(format!(
                "a multi-view dataset needs at least 2 views, got {}",
                views.len()
            )));
        }
        let n = views[0].nrows();
        if n == 0 {
            return Err(Error::contract("views have no samples"));
        }
        for (j, v) in views.iter().enumerate() {
            if v.nrows() != n {
                return Err(Error::contract(format!(
                    "view {j} has {} samples, view 0 has {n}",
                    v.nrows()
                )));
            }
            if v.ncols() == 0 {
                return Err(Error::contract(format!("view {j} has no features")));
            }
        }
        Ok(MultiViewDataset { views })
    }

    pub fn views(&self) -> &[DMatrix<f64>] {
        &self.views
    }

    pub fn num_views(&self) -> usize {
        self.views.len()
    }

    pub fn num_samples(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.ncols()).collect()
    }

    /// Same dataset with samples reordered: row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn reorder_samples(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.num_samples() {
            return Err(Error::contract("sample order has the wrong length"));
        }
        let views = self
            .views
            .iter()
            .map(|v| DMatrix::from_fn(v.nrows(), v.ncols(), |i, c| v[(order[i], c)]))
            .collect();
        MultiViewDataset::new(views)
    }
}

/// Covariance eigenvalue floor used when forming `C_j^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsFloor {
    /// `factor · trace(C_j) / n_j`, per view.
    RelativeToMeanEigenvalue(f64),
    Absolute(f64),
}

impl Default for EpsFloor {
    fn default() -> Self {
        EpsFloor::RelativeToMeanEigenvalue(1e-8)
    }
}

impl EpsFloor {
    pub fn resolve(&self, cov: &DMatrix<f64>) -> f64 {
        match *self {
            EpsFloor::RelativeToMeanEigenvalue(f) => f * cov.trace() / cov.nrows() as f64,
            EpsFloor::Absolute(e) => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TccaOptions {
    pub eps: EpsFloor,
    /// Subtract per-view means before forming covariances and the data tensor.
    pub center: bool,
    /// Seed of the generating-polynomial step.
    pub seed: u64,
    /// Options of the refinement sweeps.
    pub solve: SolveOptions,
}

#[derive(Debug, Clone)]
pub struct TccaModel {
    pub rank: usize,
    /// `W_j = C_j^{-1/2}`, `n_j × n_j`.
    pub whiteners: Vec<DMatrix<f64>>,
    /// `P_j = W_j U_j`, `n_j × r`.
    pub projections: Vec<DMatrix<f64>>,
    /// Normalized CP approximation of the whitened tensor; unit factor
    /// columns and non-negative weights.
    pub cp: CpDecomposition,
    /// Per-view training means when fitted with centering.
    pub view_means: Option<Vec<Vec<f64>>>,
    /// Eigenvalue floor actually applied to each view.
    pub eps_used: Vec<f64>,
    pub gp_residual: f64,
    pub refine_report: SolveReport,
    pub options: TccaOptions,
}

/// `(1/N) Σ_i y_i y_iᵀ` over the rows of `y`, mean-subtracted when `center`.
pub fn view_covariance(y: &DMatrix<f64>, center: bool) -> DMatrix<f64> {
    let n = y.nrows().max(1) as f64;
    let y = if center { centered(y).0 } else { y.clone() };
    let cov = y.transpose() * &y / n;
    (&cov + cov.transpose()) * 0.5
}

fn centered(y: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let mean = y.row_mean();
    let mut out = y.clone();
    for mut row in out.row_iter_mut() {
        row -= &mean;
    }
    (out, mean.iter().copied().collect())
}

fn subtract_mean(y: &DMatrix<f64>, mean: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(y.nrows(), y.ncols(), |i, c| y[(i, c)] - mean[c])
}

/// `Σ_i y_{i,0} ⊗ … ⊗ y_{i,m−1}`, per-view centered first when `center`.
pub fn data_tensor(d: &MultiViewDataset, center: bool) -> DenseTensor {
    let factors: Vec<DMatrix<f64>> = d
        .views
        .iter()
        .map(|v| if center { centered(v).0 } else { v.clone() }.transpose())
        .collect();
    let cp = CpDecomposition::unweighted(factors).expect("views share the sample count");
    cp_to_tensor(&cp)
}

/// Whitened data tensor and the per-view quantities used to build it.
#[derive(Debug, Clone)]
pub struct Correlation {
    pub tensor: DenseTensor,
    pub whiteners: Vec<DMatrix<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub eps_used: Vec<f64>,
}

pub fn correlation_tensor(d: &MultiViewDataset, opts: &TccaOptions) -> Result<Correlation> {
    let covariances: Vec<DMatrix<f64>> = d
        .views
        .iter()
        .map(|v| view_covariance(v, opts.center))
        .collect();
    let eps_used: Vec<f64> = covariances.iter().map(|c| opts.eps.resolve(c)).collect();
    let whiteners = covariances
        .iter()
        .zip(&eps_used)
        .map(|(c, &eps)| sym_inv_sqrt(c, eps))
        .collect::<Result<Vec<_>>>()?;
    let mut tensor = data_tensor(d, opts.center);
    for (mode, w) in whiteners.iter().enumerate() {
        tensor = mode_product(&tensor, w, mode)?;
    }
    Ok(Correlation {
        tensor,
        whiteners,
        covariances,
        eps_used,
    })
}

/// Fits rank-`r` TCCA projections: whitened tensor, GP initialization,
/// ALS refinement, normalization.
///
/// Components with a negative weight after normalization have their mode-0
/// factor column negated so every weight is non-negative; this leaves the
/// reconstruction unchanged and orients each component toward positive
/// correlation.
pub fn tcca_fit(d: &MultiViewDataset, r: usize, opts: &TccaOptions) -> Result<TccaModel> {
    let dims = d.dims();
    let max_dim = *dims.iter().max().expect("at least two views");
    if r == 0 || r > max_dim {
        return Err(Error::rank(
            r,
            format!("must be between 1 and the largest view dimension {max_dim}"),
        ));
    }
    let corr = correlation_tensor(d, opts)?;
    let gp = gp_decompose(&corr.tensor, r, &GpOptions::with_seed(opts.seed))?;
    let gp_residual = relative_residual(&corr.tensor, &gp)?;
    let (refined, refine_report) = refine_from_init(&corr.tensor, &gp, &opts.solve)?;
    let normalized = normalize_cp(&refined)?;

    let (mut factors, mut weights) = normalized.into_parts();
    for (s, w) in weights.iter_mut().enumerate() {
        if *w < 0.0 {
            *w = -*w;
            factors[0].column_mut(s).neg_mut();
        }
    }
    let cp = CpDecomposition::new(factors, weights)?;
    let projections = corr
        .whiteners
        .iter()
        .zip(cp.factors())
        .map(|(w, u)| w * u)
        .collect();
    let view_means = opts
        .center
        .then(|| d.views.iter().map(|v| centered(v).1).collect());

    Ok(TccaModel {
        rank: r,
        whiteners: corr.whiteners,
        projections,
        cp,
        view_means,
        eps_used: corr.eps_used,
        gp_residual,
        refine_report,
        options: opts.clone(),
    })
}

/// `Z_j = Y_j P_j` per view, after subtracting `means` when given.
pub fn project_views(
    projections: &[DMatrix<f64>],
    d: &MultiViewDataset,
    means: Option<&[Vec<f64>]>,
) -> Result<Vec<DMatrix<f64>>> {
    if projections.len() != d.num_views() {
        return Err(Error::contract(format!(
            "model has {} views, dataset has {}",
            projections.len(),
            d.num_views()
        )));
    }
    let mut out = Vec::with_capacity(projections.len());
    for (j, (p, y)) in projections.iter().zip(&d.views).enumerate() {
        if p.nrows() != y.ncols() {
            return Err(Error::contract(format!(
                "view {j} has {} features, model expects {}",
                y.ncols(),
                p.nrows()
            )));
        }
        let z = match means {
            Some(means) => {
                if means[j].len() != y.ncols() {
                    return Err(Error::contract(format!("mean of view {j} has wrong length")));
                }
                subtract_mean(y, &means[j]) * p
            }
            None => y * p,
        };
        out.push(z);
    }
    Ok(out)
}

/// Projects every view with the fitted model; row `i` of output `j` is
/// `P_jᵀ y_{i,j}`. Centered models subtract their training means.
pub fn tcca_project(model: &TccaModel, d: &MultiViewDataset) -> Result<Vec<DMatrix<f64>>> {
    project_views(&model.projections, d, model.view_means.as_deref())
}

/// `ρ = Σ_i Σ_s Π_j (Z_j)_{i,s}`.
pub fn higher_order_correlation(z: &[DMatrix<f64>]) -> Result<f64> {
    let first = z
        .first()
        .ok_or_else(|| Error::contract("no projected views"))?;
    let shape = first.shape();
    if let Some((j, other)) = z.iter().enumerate().find(|(_, m)| m.shape() != shape) {
        return Err(Error::contract(format!(
            "projected view {j} is {}x{}, view 0 is {}x{}",
            other.nrows(),
            other.ncols(),
            shape.0,
            shape.1
        )));
    }
    let mut rho = 0.0;
    for i in 0..shape.0 {
        for s in 0..shape.1 {
            rho += z.iter().map(|m| m[(i, s)]).product::<f64>();
        }
    }
    Ok(rho)
}

/// Random Gaussian projections with each column scaled to
/// `pᵀ C_j p = 1`, a shape-matched baseline for fitted models.
pub fn random_projections(
    d: &MultiViewDataset,
    r: usize,
    center: bool,
    seed: u64,
) -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    d.views
        .iter()
        .map(|y| {
            let cov = view_covariance(y, center);
            let n = y.ncols();
            let mut p = DMatrix::from_fn(n, r, |_, _| StandardNormal.sample(&mut rng));
            for s in 0..r {
                let col = p.column(s).into_owned();
                let q = (col.transpose() * &cov * &col)[(0, 0)];
                if q > 0.0 {
                    p.column_mut(s).unscale_mut(q.sqrt());
                }
            }
            p
        })
        .collect()
}

/// A planted multi-view dataset together with its generating parameters.
#[derive(Debug, Clone)]
pub struct PlantedMultiView {
    pub dataset: MultiViewDataset,
    /// `L_j`, `n_j × r_true`.
    pub loadings: Vec<DMatrix<f64>>,
    /// Latent component of each sample.
    pub labels: Vec<usize>,
}

/// Synthetic views `y_{i,j} = L_j h_i + σ ε_{i,j}` with a shared latent code
/// `h_i = a_i e_{c_i}`: sample `i` belongs to component `c_i` (uniform) with
/// amplitude `a_i = 1 + |g|`, `g` standard normal. Because every `h_i` is a
/// multiple of a basis vector, the noiseless data tensor has CP rank at most
/// `r_true`.
///
/// Draw order from a `ChaCha8Rng` seeded with `seed`: loadings view by view
/// (row-major), then per sample the component, the amplitude and the noise
/// for each view.
pub fn synth_multiview(
    n_samples: usize,
    dims: &[usize],
    r_true: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<PlantedMultiView> {
    if dims.len() < 2 {
        return Err(Error::contract("need at least 2 views"));
    }
    if n_samples == 0 {
        return Err(Error::contract("need at least one sample"));
    }
    let min_dim = *dims.iter().min().expect("non-empty");
    if r_true == 0 || r_true > min_dim {
        return Err(Error::rank(
            r_true,
            format!("planted rank must be between 1 and the smallest view dimension {min_dim}"),
        ));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(Error::contract("noise sigma must be finite and non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let loadings: Vec<DMatrix<f64>> = dims
        .iter()
        .map(|&n| {
            let mut l = DMatrix::zeros(n, r_true);
            for i in 0..n {
                for s in 0..r_true {
                    l[(i, s)] = normal(&mut rng);
                }
            }
            l
        })
        .collect();
    let mut views: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n_samples, n)).collect();
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let c = rng.random_range(0..r_true);
        let a = 1.0 + normal(&mut rng).abs();
        labels.push(c);
        for (view, l) in views.iter_mut().zip(&loadings) {
            for f in 0..view.ncols() {
                view[(i, f)] = a * l[(f, c)] + noise_sigma * normal(&mut rng);
            }
        }
    }
    Ok(PlantedMultiView {
        dataset: MultiViewDataset::new(views)?,
        loadings,
        labels,
    })
}
