//! Generating-polynomial (GP) method for low-rank CP approximation.
//!
//! For a tensor `F` of shape `n_0 × … × n_{m-1}` and a rank `r ≤ n_0`, each
//! pair `(j, k)` with `1 ≤ j < m` and `1 ≤ k < n_j` gets an `r × r` matrix
//! `M^{j,k}` solving the linear system
//!
//! ```text
//! A[F, j] · (M^{j,k})ᵀ ≈ B[F, j, k]
//! ```
//!
//! where `A` collects the entries with mode-`j` index 0 and `B` those with
//! mode-`j` index `k` (first `r` slices of mode 0 in both). When `F` has an
//! exact rank-`r` decomposition with generic factors, the `M^{j,k}` are
//! simultaneously diagonalizable and their eigenvalues are the ratios
//! `u^{s,j}_k / u^{s,j}_0`. A random combination of the matrices is
//! triangularized by a Schur decomposition, Rayleigh quotients on the Schur
//! vectors give the mode `1..m` factors, and a final linear least-squares fit
//! gives mode 0.
//!
//! All indices here are 0-based.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{least_squares_solve_with_cutoff, schur_decompose_real, DEFAULT_RCOND};
use crate::tensor::{increment, khatri_rao_chain, unfold, CpDecomposition, DenseTensor};

/// How `gp_decompose` orders the modes before running the method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModePermutation {
    /// Sort modes by non-increasing dimension (stable), then undo the
    /// permutation on the output factors.
    #[default]
    Automatic,
    /// Use the modes as given; requires `r ≤ n_0`.
    Fixed,
}

/// Options for [`gp_decompose`].
///
/// The combination weights `ξ_{j,k}` are standard normal draws from a
/// `ChaCha8Rng` seeded with `seed`, taken in `(j ascending, k ascending)`
/// order, so `seed` fully determines them.
#[derive(Debug, Clone, PartialEq)]
pub struct GpOptions {
    pub seed: u64,
    pub mode_permutation: ModePermutation,
    /// Relative singular-value cutoff for the internal least-squares solves.
    pub rcond: f64,
}

impl Default for GpOptions {
    fn default() -> Self {
        GpOptions {
            seed: 0,
            mode_permutation: ModePermutation::Automatic,
            rcond: DEFAULT_RCOND,
        }
    }
}

impl GpOptions {
    pub fn with_seed(seed: u64) -> Self {
        GpOptions {
            seed,
            ..Default::default()
        }
    }
}

/// The matrices `M^{j,k}` keyed by `(j, k)` with `1 ≤ j < m`, `1 ≤ k < n_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingMatrixSet {
    rank: usize,
    matrices: BTreeMap<(usize, usize), DMatrix<f64>>,
    residuals: BTreeMap<(usize, usize), f64>,
}

impl GeneratingMatrixSet {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn get(&self, mode: usize, index: usize) -> Option<&DMatrix<f64>> {
        self.matrices.get(&(mode, index))
    }

    /// Least-squares residual `‖A (M^{j,k})ᵀ − B‖_F` of one pair.
    pub fn residual(&self, mode: usize, index: usize) -> Option<f64> {
        self.residuals.get(&(mode, index)).copied()
    }

    /// Matrices in `(j ascending, k ascending)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &DMatrix<f64>)> {
        self.matrices.iter()
    }

    pub fn residuals(&self) -> impl Iterator<Item = (&(usize, usize), f64)> + '_ {
        self.residuals.iter().map(|(k, &v)| (k, v))
    }

    /// Builds a set from explicit matrices. Residuals are recorded as zero.
    pub fn from_matrices(
        rank: usize,
        matrices: BTreeMap<(usize, usize), DMatrix<f64>>,
    ) -> Result<Self> {
        for (key, m) in &matrices {
            if m.shape() != (rank, rank) {
                return Err(Error::shape(format!(
                    "generating matrix {key:?} is {}x{}, expected {rank}x{rank}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        let residuals = matrices.keys().map(|&k| (k, 0.0)).collect();
        Ok(GeneratingMatrixSet {
            rank,
            matrices,
            residuals,
        })
    }

    /// `Σ ξ_{j,k} M^{j,k}` with the weights supplied in iteration order.
    pub fn combine(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        if xi.len() != self.matrices.len() {
            return Err(Error::contract(format!(
                "{} combination weights for {} matrices",
                xi.len(),
                self.matrices.len()
            )));
        }
        let mut acc = DMatrix::zeros(self.rank, self.rank);
        for (w, m) in xi.iter().zip(self.matrices.values()) {
            acc += m * *w;
        }
        Ok(acc)
    }
}

fn check_rank_vs_leading(f: &DenseTensor, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::rank(0, "rank must be at least 1"));
    }
    if r > f.shape()[0] {
        return Err(Error::rank(
            r,
            format!("exceeds the leading dimension {}", f.shape()[0]),
        ));
    }
    Ok(())
}

/// `A[F, j]` and `B[F, j, k]`.
///
/// Rows run over the multi-indices `μ` of all modes except 0 and `j`
/// (lexicographic, last fastest); column `ℓ < r` is the mode-0 index.
/// `A[μ, ℓ] = F[ℓ, …, i_j = 0, …]` and `B[μ, ℓ] = F[ℓ, …, i_j = k, …]` with the
/// remaining indices given by `μ`.
pub fn build_coefficient_matrices(
    f: &DenseTensor,
    mode: usize,
    index: usize,
    r: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let shape = f.shape();
    let m = shape.len();
    if mode == 0 || mode >= m {
        return Err(Error::contract(format!(
            "mode {mode} must be in 1..{m}"
        )));
    }
    if index == 0 || index >= shape[mode] {
        return Err(Error::contract(format!(
            "index {index} must be in 1..{} for mode {mode}",
            shape[mode]
        )));
    }
    check_rank_vs_leading(f, r)?;
    Ok((
        slice_matrix(f, mode, 0, r),
        slice_matrix(f, mode, index, r),
    ))
}

fn slice_matrix(f: &DenseTensor, mode: usize, index: usize, r: usize) -> DMatrix<f64> {
    let shape = f.shape();
    let rest: Vec<usize> = (1..shape.len()).filter(|&t| t != mode).collect();
    let rest_shape: Vec<usize> = rest.iter().map(|&t| shape[t]).collect();
    let rows: usize = rest_shape.iter().product();
    let mut out = DMatrix::zeros(rows, r);
    let mut mu = vec![0usize; rest.len()];
    let mut full = vec![0usize; shape.len()];
    full[mode] = index;
    for row in 0..rows {
        for (&t, &i) in rest.iter().zip(&mu) {
            full[t] = i;
        }
        for l in 0..r {
            full[0] = l;
            out[(row, l)] = f.get(&full);
        }
        increment(&mut mu, &rest_shape);
    }
    out
}

/// Solves every `(j, k)` system in the least-squares sense.
///
/// The summed objective over all pairs decouples, so solving each pair
/// separately gives its minimizer.
pub fn solve_generating_matrices(f: &DenseTensor, r: usize) -> Result<GeneratingMatrixSet> {
    solve_generating_matrices_with_cutoff(f, r, DEFAULT_RCOND)
}

fn solve_generating_matrices_with_cutoff(
    f: &DenseTensor,
    r: usize,
    rcond: f64,
) -> Result<GeneratingMatrixSet> {
    check_rank_vs_leading(f, r)?;
    let shape = f.shape();
    let mut matrices = BTreeMap::new();
    let mut residuals = BTreeMap::new();
    for (mode, &n) in shape.iter().enumerate().skip(1) {
        let a = slice_matrix(f, mode, 0, r);
        for index in 1..n {
            let b = slice_matrix(f, mode, index, r);
            let x = least_squares_solve_with_cutoff(&a, &b, rcond)?;
            residuals.insert((mode, index), (&a * &x - &b).norm());
            matrices.insert((mode, index), x.transpose());
        }
    }
    Ok(GeneratingMatrixSet {
        rank: r,
        matrices,
        residuals,
    })
}

/// Standard normal weights for every matrix of `set`, in iteration order.
pub fn combination_weights(set: &GeneratingMatrixSet, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..set.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect()
}

/// `Σ ξ_{j,k} M^{j,k}` with seeded standard normal `ξ`.
pub fn random_combination(set: &GeneratingMatrixSet, seed: u64) -> DMatrix<f64> {
    set.combine(&combination_weights(set, seed))
        .expect("one weight per matrix")
}

/// `v^{s,j} = Re(1, q_s* M^{j,1} q_s, …, q_s* M^{j,n_j−1} q_s)`.
///
/// Returns one `n_j × r` matrix per mode `j = 1..m`, column `s` holding
/// `v^{s,j}`. `dims` is the full tensor shape.
pub fn extract_factor_candidates(
    set: &GeneratingMatrixSet,
    q: &DMatrix<Complex<f64>>,
    dims: &[usize],
) -> Result<Vec<DMatrix<f64>>> {
    let r = set.rank;
    if q.shape() != (r, r) {
        return Err(Error::shape(format!(
            "Schur basis is {}x{}, expected {r}x{r}",
            q.nrows(),
            q.ncols()
        )));
    }
    let mut out = Vec::with_capacity(dims.len().saturating_sub(1));
    for (mode, &n) in dims.iter().enumerate().skip(1) {
        let mut v = DMatrix::zeros(n, r);
        for s in 0..r {
            v[(0, s)] = 1.0;
        }
        for index in 1..n {
            let m = set.get(mode, index).ok_or_else(|| {
                Error::contract(format!("no generating matrix for ({mode}, {index})"))
            })?;
            let mc = m.map(|x| Complex::new(x, 0.0));
            for s in 0..r {
                let qs = q.column(s);
                let rq = qs.dotc(&(&mc * qs));
                v[(index, s)] = rq.re;
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Mode-0 vectors `z_s` minimizing `‖Σ_s z_s ⊗ v^{s,1} ⊗ … ⊗ v^{s,m−1} − F‖`
/// over the full tensor. Returns the `n_0 × r` matrix `[z_1 … z_r]`.
pub fn solve_mode1_factors(f: &DenseTensor, others: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    solve_mode1_factors_with_cutoff(f, others, DEFAULT_RCOND)
}

fn solve_mode1_factors_with_cutoff(
    f: &DenseTensor,
    others: &[DMatrix<f64>],
    rcond: f64,
) -> Result<DMatrix<f64>> {
    let shape = f.shape();
    if others.len() + 1 != shape.len() {
        return Err(Error::shape(format!(
            "{} factor matrices supplied for a tensor of order {}",
            others.len(),
            shape.len()
        )));
    }
    for (t, v) in others.iter().enumerate() {
        if v.nrows() != shape[t + 1] {
            return Err(Error::shape(format!(
                "factor for mode {} has {} rows, dimension is {}",
                t + 1,
                v.nrows(),
                shape[t + 1]
            )));
        }
    }
    let refs: Vec<&DMatrix<f64>> = others.iter().collect();
    let design = khatri_rao_chain(&refs)?;
    let target = unfold(f, 0)?.transpose();
    Ok(least_squares_solve_with_cutoff(&design, &target, rcond)?.transpose())
}

/// Output of [`gp_decompose_detailed`].
#[derive(Debug, Clone)]
pub struct GpOutput {
    pub cp: CpDecomposition,
    /// Generating matrices of the mode-permuted tensor.
    pub generating: GeneratingMatrixSet,
    /// Mode `i` of the permuted tensor is mode `permutation[i]` of the input.
    pub permutation: Vec<usize>,
    /// Eigenvalues of the random combination (diagonal of the Schur form).
    pub combination_eigenvalues: Vec<Complex<f64>>,
}

/// Rank-`r` CP approximation by the generating-polynomial method.
pub fn gp_decompose(f: &DenseTensor, r: usize, opts: &GpOptions) -> Result<CpDecomposition> {
    Ok(gp_decompose_detailed(f, r, opts)?.cp)
}

pub fn gp_decompose_detailed(f: &DenseTensor, r: usize, opts: &GpOptions) -> Result<GpOutput> {
    let shape = f.shape();
    if shape.len() < 2 {
        return Err(Error::contract(
            "the generating-polynomial method needs a tensor of order at least 2",
        ));
    }
    let max_dim = *shape.iter().max().expect("order >= 2");
    if r == 0 {
        return Err(Error::rank(0, "rank must be at least 1"));
    }
    let permutation = match opts.mode_permutation {
        ModePermutation::Automatic => {
            let mut p: Vec<usize> = (0..shape.len()).collect();
            p.sort_by(|&a, &b| shape[b].cmp(&shape[a]));
            p
        }
        ModePermutation::Fixed => (0..shape.len()).collect(),
    };
    if r > shape[permutation[0]] {
        return Err(Error::rank(
            r,
            format!(
                "exceeds the leading dimension {} (largest dimension {max_dim})",
                shape[permutation[0]]
            ),
        ));
    }
    let permuted = f.permute_modes(&permutation)?;
    let pshape = permuted.shape().to_vec();

    let generating = solve_generating_matrices_with_cutoff(&permuted, r, opts.rcond)?;
    let combo = random_combination(&generating, opts.seed);
    let schur = schur_decompose_real(&combo)?;
    let others = extract_factor_candidates(&generating, &schur.q, &pshape)?;
    let lead = solve_mode1_factors_with_cutoff(&permuted, &others, opts.rcond)?;

    let mut permuted_factors = Vec::with_capacity(pshape.len());
    permuted_factors.push(lead);
    permuted_factors.extend(others);
    let mut factors = vec![DMatrix::zeros(0, 0); pshape.len()];
    for (i, fac) in permuted_factors.into_iter().enumerate() {
        factors[permutation[i]] = fac;
    }
    Ok(GpOutput {
        cp: CpDecomposition::unweighted(factors)?,
        generating,
        permutation,
        combination_eigenvalues: schur.eigenvalues(),
    })
}

/// Outcome of [`is_generating_polynomial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratingCheck {
    pub holds: bool,
    /// `max_q |⟨p·q, F⟩|` over complementary monomials `q`.
    pub max_violation: f64,
}

/// Tests whether the multilinear polynomial `p` with coefficient tensor
/// `coeffs` over the modes `modes` satisfies `⟨p·q, F⟩ = 0` for every
/// monomial `q` in the complementary modes.
///
/// `modes` must be strictly increasing and `coeffs` must have shape
/// `[n_j for j in modes]`; `coeffs[i_{j_1}, …]` multiplies the monomial
/// `x_{j_1, i_{j_1}} ⋯`. Holds when the largest violation is at most
/// `1e-10 · ‖F‖`.
pub fn is_generating_polynomial(
    coeffs: &DenseTensor,
    f: &DenseTensor,
    modes: &[usize],
) -> Result<GeneratingCheck> {
    let shape = f.shape();
    if modes.is_empty() || modes.windows(2).any(|w| w[0] >= w[1]) || modes[modes.len() - 1] >= shape.len()
    {
        return Err(Error::contract(format!(
            "mode subset {modes:?} must be non-empty, strictly increasing and below {}",
            shape.len()
        )));
    }
    let expected: Vec<usize> = modes.iter().map(|&j| shape[j]).collect();
    if coeffs.shape() != expected.as_slice() {
        return Err(Error::shape(format!(
            "coefficient tensor has shape {:?}, expected {expected:?}",
            coeffs.shape()
        )));
    }
    let complement: Vec<usize> = (0..shape.len()).filter(|t| !modes.contains(t)).collect();
    let comp_shape: Vec<usize> = complement.iter().map(|&t| shape[t]).collect();
    let n_q: usize = comp_shape.iter().product();

    let mut max_violation = 0.0f64;
    let mut q = vec![0usize; complement.len()];
    let mut mu = vec![0usize; modes.len()];
    let mut full = vec![0usize; shape.len()];
    for _ in 0..n_q {
        for (&t, &i) in complement.iter().zip(&q) {
            full[t] = i;
        }
        let mut acc = 0.0;
        mu.iter_mut().for_each(|x| *x = 0);
        for &c in coeffs.data() {
            if c != 0.0 {
                for (&t, &i) in modes.iter().zip(&mu) {
                    full[t] = i;
                }
                acc += c * f.get(&full);
            }
            increment(&mut mu, &expected);
        }
        max_violation = max_violation.max(acc.abs());
        increment(&mut q, &comp_shape);
    }
    Ok(GeneratingCheck {
        holds: max_violation <= 1e-10 * f.hs_norm(),
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The 3×3×3 worked example; `slices[i3]` is the matrix `F[:, :, i3]`.
    fn worked_example() -> DenseTensor {
        let slices = [
            [[-10.0, 48.0, 70.0], [-10.0, -64.0, -50.0], [-5.0, 10.0, 20.0]],
            [[22.0, -16.0, -58.0], [-42.0, 0.0, 78.0], [3.0, -6.0, -12.0]],
            [[-1.0, 44.0, 49.0], [-29.0, -68.0, -19.0], [-4.0, 8.0, 16.0]],
        ];
        DenseTensor::from_fn(&[3, 3, 3], |i| slices[i[2]][i[0]][i[1]]).unwrap()
    }

    #[test]
    fn coefficient_matrices_of_worked_example() {
        let f = worked_example();
        let (a, b) = build_coefficient_matrices(&f, 1, 1, 2).unwrap();
        assert_eq!(
            a,
            DMatrix::from_row_slice(3, 2, &[-10.0, -10.0, 22.0, -42.0, -1.0, -29.0])
        );
        assert_eq!(
            b,
            DMatrix::from_row_slice(3, 2, &[48.0, -64.0, -16.0, 0.0, 44.0, -68.0])
        );
    }

    #[test]
    fn coefficient_matrices_constant_tensor() {
        let f = DenseTensor::new(vec![2, 2, 2], vec![1.0; 8]).unwrap();
        let (a, b) = build_coefficient_matrices(&f, 1, 1, 1).unwrap();
        assert_eq!(a, DMatrix::from_element(2, 1, 1.0));
        assert_eq!(a, b);
    }

    #[test]
    fn coefficient_matrices_errors() {
        let f = worked_example();
        assert!(matches!(
            build_coefficient_matrices(&f, 1, 1, 4),
            Err(Error::Rank { rank: 4, .. })
        ));
        assert!(build_coefficient_matrices(&f, 0, 1, 2).is_err());
        assert!(build_coefficient_matrices(&f, 1, 0, 2).is_err());
        assert!(build_coefficient_matrices(&f, 3, 1, 2).is_err());
    }

    #[test]
    fn worked_example_generating_polynomial() {
        let f = worked_example();
        let mut coeffs = DenseTensor::zeros(&[3, 3]).unwrap();
        coeffs.set(&[0, 0], 6.0);
        coeffs.set(&[0, 1], 3.0);
        coeffs.set(&[1, 0], 2.0);
        coeffs.set(&[1, 1], 1.0);
        let check = is_generating_polynomial(&coeffs, &f, &[0, 1]).unwrap();
        assert!(check.holds);
        assert_eq!(check.max_violation, 0.0);

        let zero = DenseTensor::zeros(&[3, 3]).unwrap();
        assert!(is_generating_polynomial(&zero, &f, &[0, 1]).unwrap().holds);

        let mut single = DenseTensor::zeros(&[3, 3]).unwrap();
        single.set(&[0, 0], 1.0);
        let check = is_generating_polynomial(&single, &f, &[0, 1]).unwrap();
        assert!(!check.holds);
        // violations are |F[0,0,i3]| = 10, 22, 1
        assert_eq!(check.max_violation, 22.0);
    }

    #[test]
    fn generating_polynomial_contract() {
        let f = worked_example();
        let c = DenseTensor::zeros(&[3, 3]).unwrap();
        assert!(is_generating_polynomial(&c, &f, &[1, 0]).is_err());
        assert!(is_generating_polynomial(&c, &f, &[0, 3]).is_err());
        let wrong = DenseTensor::zeros(&[3]).unwrap();
        assert!(is_generating_polynomial(&wrong, &f, &[0, 1]).is_err());
    }

    #[test]
    fn rank_one_generating_matrices_are_ratios() {
        let u = [1.5, -0.5, 2.0];
        let v = [2.0, 1.0, -3.0, 0.5];
        let w = [-1.0, 4.0];
        let f = DenseTensor::outer(&[&u, &v, &w]).unwrap();
        let set = solve_generating_matrices(&f, 1).unwrap();
        assert_eq!(set.len(), 3 + 1);
        for k in 1..4 {
            let m = set.get(1, k).unwrap();
            assert!((m[(0, 0)] - v[k] / v[0]).abs() < 1e-13);
        }
        assert!((set.get(2, 1).unwrap()[(0, 0)] - w[1] / w[0]).abs() < 1e-13);
    }

    #[test]
    fn zero_tensor_gives_zero_matrices() {
        let f = DenseTensor::zeros(&[3, 3, 2]).unwrap();
        let set = solve_generating_matrices(&f, 2).unwrap();
        assert!(set.iter().all(|(_, m)| m.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn combination_hooks() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let set = GeneratingMatrixSet::from_matrices(2, BTreeMap::from([((1, 1), m.clone())]))
            .unwrap();
        assert_eq!(set.combine(&[1.0]).unwrap(), m);
        assert!(set.combine(&[1.0, 2.0]).is_err());

        let a = random_combination(&set, 42);
        let b = random_combination(&set, 42);
        assert_eq!(a, b);
        let doubled = GeneratingMatrixSet::from_matrices(
            2,
            BTreeMap::from([((1, 1), &m * 2.0)]),
        )
        .unwrap();
        assert_eq!(random_combination(&doubled, 42), a * 2.0);
    }

    #[test]
    fn diagonal_rayleigh_quotients() {
        let mut mats = BTreeMap::new();
        mats.insert((1, 1), DMatrix::from_diagonal(&nalgebra::dvector![2.0, -1.0]));
        mats.insert((1, 2), DMatrix::from_diagonal(&nalgebra::dvector![0.5, 3.0]));
        mats.insert((2, 1), DMatrix::from_diagonal(&nalgebra::dvector![7.0, 8.0]));
        let set = GeneratingMatrixSet::from_matrices(2, mats).unwrap();
        let q = DMatrix::<Complex<f64>>::identity(2, 2);
        let v = extract_factor_candidates(&set, &q, &[4, 3, 2]).unwrap();
        assert_eq!(v[0], DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, -1.0, 0.5, 3.0]));
        assert_eq!(v[1], DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 7.0, 8.0]));
    }

    #[test]
    fn complex_schur_vectors_still_give_real_factors() {
        // rotation-like combination has a complex conjugate eigenpair
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let set = GeneratingMatrixSet::from_matrices(2, BTreeMap::from([((1, 1), m.clone())]))
            .unwrap();
        let schur = schur_decompose_real(&m).unwrap();
        assert!(schur.eigenvalues().iter().any(|z| z.im.abs() > 0.5));
        let v = extract_factor_candidates(&set, &schur.q, &[2, 2]).unwrap();
        assert!(v[0].iter().all(|x| x.is_finite()));
        assert_eq!(v[0].row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0]);
    }

    #[test]
    fn mode1_fit_rank_one_and_collinear() {
        let z = [1.0, -2.0, 0.5];
        let v = [1.0, 3.0];
        let w = [1.0, -1.0, 2.0];
        let f = DenseTensor::outer(&[&z, &v, &w]).unwrap();
        let vm = DMatrix::from_column_slice(2, 1, &v);
        let wm = DMatrix::from_column_slice(3, 1, &w);
        let got = solve_mode1_factors(&f, &[vm.clone(), wm.clone()]).unwrap();
        for i in 0..3 {
            assert!((got[(i, 0)] - z[i]).abs() < 1e-10);
        }
        let v2 = DMatrix::from_fn(2, 2, |i, _| v[i]);
        let w2 = DMatrix::from_fn(3, 2, |i, _| w[i]);
        let got = solve_mode1_factors(&f, &[v2, w2]).unwrap();
        assert!(got.iter().all(|x| x.is_finite()));
        for i in 0..3 {
            assert!((got[(i, 0)] - z[i] / 2.0).abs() < 1e-10);
            assert!((got[(i, 1)] - z[i] / 2.0).abs() < 1e-10);
        }
        assert!(solve_mode1_factors(&f, &[vm]).is_err());
    }

    #[test]
    fn gp_rank_checks() {
        let f = DenseTensor::zeros(&[3, 4, 2]).unwrap();
        assert!(matches!(
            gp_decompose(&f, 5, &GpOptions::default()),
            Err(Error::Rank { rank: 5, .. })
        ));
        assert!(matches!(
            gp_decompose(&f, 0, &GpOptions::default()),
            Err(Error::Rank { rank: 0, .. })
        ));
        let fixed = GpOptions {
            mode_permutation: ModePermutation::Fixed,
            ..Default::default()
        };
        assert!(matches!(gp_decompose(&f, 4, &fixed), Err(Error::Rank { .. })));
        assert!(gp_decompose(&f, 4, &GpOptions::default()).is_ok());
    }
}
