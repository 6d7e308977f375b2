//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use gptcca_core::CpDecomposition;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * m.norm() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)] == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Entry of a CP tensor straight from the defining sum.
pub fn cp_entry(cp: &CpDecomposition, idx: &[usize]) -> f64 {
    (0..cp.rank())
        .map(|s| {
            cp.weights()[s]
                * idx
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| cp.factor(j)[(i, s)])
                    .product::<f64>()
        })
        .sum()
}

/// All permutations of 0..n (n small).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest max-abs column difference between `a` and a column permutation of `b`.
pub fn best_column_match(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    permutations(a.ncols())
        .into_iter()
        .map(|perm| {
            (0..a.ncols())
                .map(|s| (a.column(s) - b.column(perm[s])).amax())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Factors suited to the generating-polynomial method under noise: the
/// leading `r × r` block of factor 0 is close to the identity and every
/// other factor has leading entry 1 with moderate remaining entries.
pub fn well_conditioned_factors(shape: &[usize], r: usize, seed: u64) -> CpDecomposition {
    let mut g = rng(seed);
    let factors = shape
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let mut f = gaussian(n, r, &mut g) * 0.5;
            if j == 0 {
                for s in 0..r {
                    f[(s, s)] += 2.0;
                }
            } else {
                f.row_mut(0).fill(1.0);
            }
            f
        })
        .collect();
    CpDecomposition::unweighted(factors).unwrap()
}
