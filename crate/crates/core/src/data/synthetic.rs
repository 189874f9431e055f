//! Seeded synthetic pools used as fixtures and in acceptance runs.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::pool::Pool;
use crate::rng::{derive_seed, EpisodeRng};
use crate::scalar::Scalar;
use rand::SeedableRng;

fn rng_for(seed: u64, tag: u64) -> EpisodeRng {
    EpisodeRng::seed_from_u64(derive_seed(seed, tag))
}

fn gaussian_vec(rng: &mut EpisodeRng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Linearly separable two-class pool with its hidden unit normal.
#[derive(Clone, Debug)]
pub struct MarginDataset<T> {
    pub pool: Pool<T>,
    pub normal: Vec<f64>,
    pub radius: f64,
    pub gamma: f64,
}

/// `n` points uniform in the radius-`radius` ball of `R^dim`, rejected unless they
/// sit at least `gamma` from the hyperplane through the origin with a random unit
/// normal `u`. Label 1 when `u·x > 0`, else 0.
pub fn generate_margin_dataset<T: Scalar>(
    n: usize,
    dim: usize,
    radius: f64,
    gamma: f64,
    seed: u64,
) -> Result<MarginDataset<T>> {
    if !(gamma > 0.0 && gamma < radius && radius.is_finite()) {
        return Err(Error::invalid(format!(
            "margin dataset needs 0 < gamma < R, got gamma={gamma}, R={radius}"
        )));
    }
    if dim == 0 {
        return Err(Error::invalid("margin dataset needs dim >= 1"));
    }
    let mut rng = rng_for(seed, 0x4D41_5247);
    let mut normal = gaussian_vec(&mut rng, dim);
    let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    normal.iter_mut().for_each(|v| *v /= norm);

    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    while labels.len() < n {
        let mut x = gaussian_vec(&mut rng, dim);
        let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len == 0.0 {
            continue;
        }
        let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
        x.iter_mut().for_each(|v| *v *= r / len);
        let side: f64 = x.iter().zip(&normal).map(|(a, b)| a * b).sum();
        // Checked after conversion so the guarantee holds in the target precision.
        let xt: Vec<T> = x.iter().map(|&v| T::from_f64_lossy(v)).collect();
        let side_t: f64 = xt.iter().zip(&normal).map(|(a, b)| a.to_f64_lossy() * b).sum();
        let len_t = xt.iter().map(|a| a.to_f64_lossy().powi(2)).sum::<f64>().sqrt();
        if side.abs() < gamma || side_t.abs() < gamma || len_t > radius {
            continue;
        }
        labels.push(usize::from(side > 0.0));
        data.extend(xt);
    }
    Ok(MarginDataset {
        pool: Pool::from_dense(dim, data, labels, 2)?,
        normal,
        radius,
        gamma,
    })
}

/// Balanced Gaussian blobs: class centers drawn from `N(0, separation² I)`,
/// members from `N(center, I)`. Labels cycle `0, 1, .., C-1`.
pub fn generate_blobs<T: Scalar>(
    n: usize,
    dim: usize,
    num_classes: usize,
    separation: f64,
    seed: u64,
) -> Result<Pool<T>> {
    if dim == 0 || num_classes == 0 {
        return Err(Error::invalid("blobs need dim >= 1 and C >= 1"));
    }
    let mut rng = rng_for(seed, 0x424C_4F42);
    let centers: Vec<Vec<f64>> = (0..num_classes)
        .map(|_| {
            gaussian_vec(&mut rng, dim)
                .into_iter()
                .map(|v| v * separation)
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(n * dim);
    let labels: Vec<usize> = (0..n).map(|i| i % num_classes).collect();
    for &y in &labels {
        for c in &centers[y] {
            let noise: f64 = StandardNormal.sample(&mut rng);
            data.push(T::from_f64_lossy(c + noise));
        }
    }
    Pool::from_dense(dim, data, labels, num_classes)
}

/// Balanced labels over uninformative standard-normal features.
pub fn generate_uniform_labels<T: Scalar>(n: usize, dim: usize, num_classes: usize, seed: u64) -> Result<Pool<T>> {
    if dim == 0 || num_classes == 0 {
        return Err(Error::invalid("pool needs dim >= 1 and C >= 1"));
    }
    let mut rng = rng_for(seed, 0x554E_4946);
    let data = (0..n * dim)
        .map(|_| T::from_f64_lossy(StandardNormal.sample(&mut rng)))
        .collect();
    Pool::from_dense(dim, data, (0..n).map(|i| i % num_classes).collect(), num_classes)
}
