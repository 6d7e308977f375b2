//! Planted low-rank tensors for tests and benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::solvers::random_init;
use crate::tensor::{CpDecomposition, DenseTensor};

#[derive(Debug, Clone)]
pub struct PlantedTensor {
    pub tensor: DenseTensor,
    pub truth: CpDecomposition,
}

/// `X + E` where `X` has i.i.d. standard normal rank-`r` factors and `E` is
/// Gaussian noise rescaled so that `‖E‖ = noise_rel · ‖X‖`.
///
/// The factors come from `random_init(shape, r, seed)`; the noise from a
/// separate stream seeded with `seed` xor a fixed constant.
pub fn planted_tensor(
    shape: &[usize],
    r: usize,
    noise_rel: f64,
    seed: u64,
) -> Result<PlantedTensor> {
    if r == 0 {
        return Err(Error::rank(0, "rank must be at least 1"));
    }
    if !noise_rel.is_finite() || noise_rel < 0.0 {
        return Err(Error::contract(format!(
            "noise level {noise_rel} must be finite and non-negative"
        )));
    }
    let truth = random_init(shape, r, seed)?;
    let clean = truth.to_tensor();
    let tensor = if noise_rel == 0.0 {
        clean
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let noise = DenseTensor::from_fn(shape, |_| StandardNormal.sample(&mut rng))?;
        let scale = noise_rel * clean.hs_norm() / noise.hs_norm().max(f64::MIN_POSITIVE);
        clean.add(&noise.scaled(scale))?
    };
    Ok(PlantedTensor { tensor, truth })
}
