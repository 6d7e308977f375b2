//! Complex Schur decomposition `A = Q T Q*` by Householder reduction to
//! upper Hessenberg form followed by Wilkinson-shifted QR iterations.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// `A = Q T Q*` with `Q` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct SchurResult {
    pub q: DMatrix<C64>,
    pub t: DMatrix<C64>,
}

impl SchurResult {
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.t.diagonal().iter().copied().collect()
    }

    /// `Q T Q*`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        &self.q * &self.t * self.q.adjoint()
    }
}

pub fn schur_decompose_real(m: &DMatrix<f64>) -> Result<SchurResult> {
    schur_decompose(&m.map(|x| C64::new(x, 0.0)))
}

/// Iterations allowed per unit of matrix dimension.
const SWEEPS_PER_DIM: usize = 100;

pub fn schur_decompose(m: &DMatrix<C64>) -> Result<SchurResult> {
    if !m.is_square() {
        return Err(Error::shape(format!(
            "Schur decomposition of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::contract("Schur input has non-finite entries"));
    }
    let n = m.nrows();
    let mut h = m.clone();
    let mut q = DMatrix::<C64>::identity(n, n);
    if n <= 1 {
        return Ok(SchurResult { q, t: h });
    }
    hessenberg(&mut h, &mut q);
    qr_iterations(&mut h, &mut q)?;
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok(SchurResult { q, t: h })
}

fn hessenberg(h: &mut DMatrix<C64>, q: &mut DMatrix<C64>) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha_norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        // v = x + phase·‖x‖·e1 avoids cancellation
        let mut v = x;
        v[0] += phase * alpha_norm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I − 2vv*) H on rows k+1..n
        for col in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (a, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + a, col)];
            }
            dot *= 2.0;
            for (a, vi) in v.iter().enumerate() {
                h[(k + 1 + a, col)] -= vi * dot;
            }
        }
        // H ← H (I − 2vv*), Q ← Q (I − 2vv*) on columns k+1..n
        for target in [&mut *h, &mut *q] {
            for row in 0..n {
                let mut dot = C64::new(0.0, 0.0);
                for (a, vi) in v.iter().enumerate() {
                    dot += target[(row, k + 1 + a)] * vi;
                }
                dot *= 2.0;
                for (a, vi) in v.iter().enumerate() {
                    target[(row, k + 1 + a)] -= dot * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Rotation `G = [[c, s], [-s̄, c]]` with `G·(a, b)ᵀ = (r, 0)ᵀ`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let nu = na.hypot(nb);
    let c = na / nu;
    let s = (a / na) * b.conj() / nu;
    (c, s)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_iterations(h: &mut DMatrix<C64>, q: &mut DMatrix<C64>) -> Result<()> {
    let n = h.nrows();
    let cap = SWEEPS_PER_DIM * n;
    let eps = f64::EPSILON;
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut hi = n - 1;
    let mut iterations = 0usize;
    let mut since_deflation = 0usize;
    let mut rotations: Vec<(f64, C64)> = Vec::with_capacity(n);

    while hi > 0 {
        // find the active window [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= eps * diag {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if iterations >= cap {
            return Err(Error::NumericalFailure {
                routine: "Schur QR iteration",
                iterations,
            });
        }
        iterations += 1;
        since_deflation += 1;

        let mut mu = wilkinson_shift(
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        );
        if since_deflation.is_multiple_of(11) {
            // exceptional shift to break cycles
            mu = h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0);
        }

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        rotations.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotations.push((c, s));
            for col in k..n {
                let x = h[(k, col)];
                let y = h[(k + 1, col)];
                h[(k, col)] = x * c + s * y;
                h[(k + 1, col)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = C64::new(0.0, 0.0);
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + offset;
            let last_row = (k + 1).min(hi);
            for row in 0..=last_row {
                let x = h[(row, k)];
                let y = h[(row, k + 1)];
                h[(row, k)] = x * c + y * s.conj();
                h[(row, k + 1)] = -x * s + y * c;
            }
            for row in 0..n {
                let x = q[(row, k)];
                let y = q[(row, k + 1)];
                q[(row, k)] = x * c + y * s.conj();
                q[(row, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}
