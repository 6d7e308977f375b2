//! Alternating least squares for CP fitting, refinement from a given start,
//! and normalization of CP factors.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::least_squares_solve;
use crate::tensor::{khatri_rao_chain, relative_residual, unfold, CpDecomposition, DenseTensor};

/// Relative residuals at or below this are treated as an exact fit.
pub const RESIDUAL_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub max_sweeps: usize,
    /// Stop when the relative change of the relative residual between two
    /// sweeps is at most this.
    pub rel_change_tol: f64,
    /// Seed for random initialization.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_sweeps: 500,
            rel_change_tol: 1e-10,
            seed: 0,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::contract("max_sweeps must be at least 1"));
        }
        if self.rel_change_tol.is_nan() || self.rel_change_tol <= 0.0 {
            return Err(Error::contract("rel_change_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub sweeps_used: usize,
    /// Relative residual of the starting point followed by one entry per
    /// accepted sweep. Never increases.
    pub residual_history: Vec<f64>,
    /// Either the relative change dropped to `rel_change_tol` or the residual
    /// reached [`RESIDUAL_FLOOR`].
    pub converged: bool,
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history holds the initial residual")
    }
}

/// Factor entries i.i.d. standard normal, drawn mode by mode, row-major
/// within each factor.
pub fn random_init(shape: &[usize], r: usize, seed: u64) -> Result<CpDecomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = shape
        .iter()
        .map(|&n| {
            let mut f = DMatrix::zeros(n, r);
            for i in 0..n {
                for s in 0..r {
                    f[(i, s)] = StandardNormal.sample(&mut rng);
                }
            }
            f
        })
        .collect();
    CpDecomposition::unweighted(factors)
}

/// Rank-`r` CP fit by cyclic ALS sweeps. Starts from `init` when given,
/// otherwise from [`random_init`] with `opts.seed`.
pub fn als_decompose(
    f: &DenseTensor,
    r: usize,
    init: Option<&CpDecomposition>,
    opts: &SolveOptions,
) -> Result<(CpDecomposition, SolveReport)> {
    if r == 0 {
        return Err(Error::rank(0, "rank must be at least 1"));
    }
    let start = match init {
        Some(cp) => {
            if cp.rank() != r {
                return Err(Error::contract(format!(
                    "initial decomposition has rank {}, requested {r}",
                    cp.rank()
                )));
            }
            cp.clone()
        }
        None => random_init(f.shape(), r, opts.seed)?,
    };
    run_sweeps(f, &start, opts)
}

/// Improves `init` by ALS sweeps on the unweighted objective
/// `‖Σ_s u^{s,0} ⊗ … ⊗ u^{s,m−1} − F‖²`. The final residual never exceeds
/// the initial one.
pub fn refine_from_init(
    f: &DenseTensor,
    init: &CpDecomposition,
    opts: &SolveOptions,
) -> Result<(CpDecomposition, SolveReport)> {
    run_sweeps(f, init, opts)
}

fn run_sweeps(
    f: &DenseTensor,
    init: &CpDecomposition,
    opts: &SolveOptions,
) -> Result<(CpDecomposition, SolveReport)> {
    opts.validate()?;
    if init.shape() != f.shape() {
        return Err(Error::contract(format!(
            "initial factors have shape {:?}, tensor has {:?}",
            init.shape(),
            f.shape()
        )));
    }
    let clock = Instant::now();
    let m = f.order();
    let unfoldings: Vec<DMatrix<f64>> = (0..m)
        .map(|t| unfold(f, t).map(|u| u.transpose()))
        .collect::<Result<_>>()?;

    let (mut factors, _) = init.absorb_weights().into_parts();
    let mut current = relative_residual(f, &CpDecomposition::unweighted(factors.clone())?)?;
    let mut history = vec![current];
    let mut converged = current <= RESIDUAL_FLOOR;
    let mut sweeps = 0;

    while !converged && sweeps < opts.max_sweeps {
        let previous_factors = factors.clone();
        for t in 0..m {
            let others: Vec<&DMatrix<f64>> = (0..m)
                .filter(|&j| j != t)
                .map(|j| &factors[j])
                .collect();
            let design = if others.is_empty() {
                DMatrix::from_element(1, factors[t].ncols(), 1.0)
            } else {
                khatri_rao_chain(&others)?
            };
            factors[t] = least_squares_solve(&design, &unfoldings[t])?.transpose();
        }
        push_scale_to_lead(&mut factors);
        sweeps += 1;

        let next = relative_residual(f, &CpDecomposition::unweighted(factors.clone())?)?;
        if !next.is_finite() {
            return Err(Error::NumericalFailure {
                routine: "ALS sweep",
                iterations: sweeps,
            });
        }
        let change = (current - next).abs() / current;
        if next > current {
            // exact updates cannot increase the objective; this is rounding
            factors = previous_factors;
            converged = change <= opts.rel_change_tol;
            break;
        }
        history.push(next);
        current = next;
        converged = change <= opts.rel_change_tol || next <= RESIDUAL_FLOOR;
    }

    let cp = CpDecomposition::unweighted(factors)?;
    Ok((
        cp,
        SolveReport {
            sweeps_used: sweeps,
            residual_history: history,
            converged,
            wall_time: clock.elapsed(),
        },
    ))
}

/// Scales the columns of factors `1..m` to unit norm, moving the scale into
/// factor 0. Zero columns are left alone.
fn push_scale_to_lead(factors: &mut [DMatrix<f64>]) {
    let (lead, rest) = factors.split_first_mut().expect("at least one factor");
    for fac in rest {
        for s in 0..fac.ncols() {
            let norm = fac.column(s).norm();
            if norm > 0.0 {
                fac.column_mut(s).unscale_mut(norm);
                lead.column_mut(s).scale_mut(norm);
            }
        }
    }
}

/// Rescales every factor column to unit Euclidean norm with the scale moved
/// into the weights. Each column's largest-magnitude entry is made positive
/// and the sign goes into the weight as well.
pub fn normalize_cp(cp: &CpDecomposition) -> Result<CpDecomposition> {
    let (mut factors, mut weights) = cp.clone().into_parts();
    for (mode, fac) in factors.iter_mut().enumerate() {
        for (s, w) in weights.iter_mut().enumerate() {
            let norm = fac.column(s).norm();
            if norm == 0.0 {
                return Err(Error::DegenerateComponent { component: s, mode });
            }
            fac.column_mut(s).unscale_mut(norm);
            *w *= norm;
        }
        let signs = crate::numerics::fix_column_signs(fac);
        for (w, sign) in weights.iter_mut().zip(signs) {
            *w *= sign;
        }
    }
    CpDecomposition::new(factors, weights)
}
