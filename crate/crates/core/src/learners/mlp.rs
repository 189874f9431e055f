use rand::Rng;

use crate::error::{Error, Result};
use crate::pool::Row;
use crate::prob::{cross_entropy, softmax_in_place, ProbVector};
use crate::rng::EpisodeRng;
use crate::scalar::Scalar;

use super::{check_dim, Differentiable, Learner};

/// One-hidden-layer rectifier network `[d, h, C]` with softmax output, trained by
/// per-example SGD on cross-entropy. The scratch neural learner.
///
/// Hidden weights start from a uniform `±sqrt(6 / d)` draw; the output layer starts
/// at zero, which makes the cold output exactly uniform.
#[derive(Clone, Debug)]
pub struct Mlp<T> {
    dim: usize,
    hidden: usize,
    num_classes: usize,
    learning_rate: T,
    /// Flattened `[W1 (h x d), b1 (h), W2 (C x h), b2 (C)]`.
    params: Vec<T>,
    initial: Vec<T>,
}

struct Activations<T> {
    pre: Vec<T>,
    hidden: Vec<T>,
    probs: Vec<T>,
}

impl<T: Scalar> Mlp<T> {
    pub fn new(dim: usize, hidden: usize, num_classes: usize, learning_rate: T, rng: &mut EpisodeRng) -> Self {
        let len = hidden * dim + hidden + num_classes * hidden + num_classes;
        let mut params = vec![T::zero(); len];
        let bound = (6.0 / dim as f64).sqrt();
        for w in params[..hidden * dim].iter_mut() {
            *w = T::from_f64_lossy(rng.random_range(-bound..=bound));
        }
        Self {
            dim,
            hidden,
            num_classes,
            learning_rate,
            initial: params.clone(),
            params,
        }
    }

    pub fn layer_sizes(&self) -> [usize; 3] {
        [self.dim, self.hidden, self.num_classes]
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.dim;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.num_classes * self.hidden;
        (b1, w2, b2)
    }

    fn activations(&self, x: Row<'_, T>) -> Activations<T> {
        let (b1, w2, b2) = self.offsets();
        let (h, d) = (self.hidden, self.dim);
        let pre: Vec<T> = (0..h)
            .map(|j| x.dot(&self.params[j * d..(j + 1) * d]) + self.params[b1 + j])
            .collect();
        let hidden: Vec<T> = pre.iter().map(|&z| z.max(T::zero())).collect();
        let mut probs: Vec<T> = (0..self.num_classes)
            .map(|c| {
                let row = &self.params[w2 + c * h..w2 + (c + 1) * h];
                row.iter()
                    .zip(&hidden)
                    .fold(self.params[b2 + c], |acc, (&w, &a)| acc + w * a)
            })
            .collect();
        softmax_in_place(&mut probs);
        Activations { pre, hidden, probs }
    }

    /// Forward pass; fails if any activation is non-finite.
    pub fn forward(&self, x: Row<'_, T>) -> Result<ProbVector<T>> {
        check_dim(self.dim, x.dim())?;
        let act = self.activations(x);
        if act.pre.iter().chain(&act.probs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mlp activations".into()));
        }
        ProbVector::new(act.probs)
    }

    /// Backprop of `-ln p_y`, written into `grad` (same layout as the parameters).
    fn backprop(&self, x: Row<'_, T>, y: usize, act: &Activations<T>, grad: &mut [T]) {
        let (b1, w2, b2) = self.offsets();
        let (h, d) = (self.hidden, self.dim);
        let mut dhidden = vec![T::zero(); h];
        for c in 0..self.num_classes {
            let target = if c == y { T::one() } else { T::zero() };
            let dl = act.probs[c] - target;
            grad[b2 + c] = dl;
            for j in 0..h {
                grad[w2 + c * h + j] = dl * act.hidden[j];
                dhidden[j] += dl * self.params[w2 + c * h + j];
            }
        }
        for j in 0..h {
            let dz = if act.pre[j] > T::zero() { dhidden[j] } else { T::zero() };
            grad[b1 + j] = dz;
            let row = &mut grad[j * d..(j + 1) * d];
            row.iter_mut().for_each(|g| *g = T::zero());
            if dz != T::zero() {
                x.add_scaled_to(dz, row);
            }
        }
    }

    fn sgd_step(&mut self, x: Row<'_, T>, y: usize) {
        let act = self.activations(x);
        let (b1, w2, b2) = self.offsets();
        let (h, d) = (self.hidden, self.dim);
        let lr = self.learning_rate;
        // Hidden-layer deltas use the pre-update output weights.
        let mut dhidden = vec![T::zero(); h];
        for c in 0..self.num_classes {
            let target = if c == y { T::one() } else { T::zero() };
            let dl = act.probs[c] - target;
            for (dh, &w) in dhidden.iter_mut().zip(&self.params[w2 + c * h..w2 + (c + 1) * h]) {
                *dh += dl * w;
            }
        }
        for c in 0..self.num_classes {
            let target = if c == y { T::one() } else { T::zero() };
            let dl = act.probs[c] - target;
            self.params[b2 + c] -= lr * dl;
            for j in 0..h {
                self.params[w2 + c * h + j] -= lr * dl * act.hidden[j];
            }
        }
        for (j, &dz) in dhidden.iter().enumerate() {
            if act.pre[j] <= T::zero() || dz == T::zero() {
                continue;
            }
            self.params[b1 + j] -= lr * dz;
            x.add_scaled_to(-lr * dz, &mut self.params[j * d..(j + 1) * d]);
        }
    }
}

impl<T: Scalar> Learner<T> for Mlp<T> {
    fn name(&self) -> &'static str {
        "mlp"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Falls back to uniform if training has diverged to non-finite activations.
    fn predict_proba(&self, x: Row<'_, T>) -> ProbVector<T> {
        self.forward(x)
            .unwrap_or_else(|_| ProbVector::uniform(self.num_classes))
    }

    fn observe(&mut self, x: Row<'_, T>, y: usize) {
        self.sgd_step(x, y);
    }

    fn reset(&mut self) {
        self.params.clone_from(&self.initial);
    }

    fn parameters(&self) -> Vec<T> {
        self.params.clone()
    }
}

impl<T: Scalar> Differentiable<T> for Mlp<T> {
    fn set_parameters(&mut self, params: &[T]) -> Result<()> {
        check_dim(self.params.len(), params.len())?;
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn loss(&self, x: Row<'_, T>, y: usize) -> T {
        cross_entropy(&self.predict_proba(x), y)
    }

    fn gradient(&self, x: Row<'_, T>, y: usize) -> Vec<T> {
        let act = self.activations(x);
        let mut grad = vec![T::zero(); self.params.len()];
        self.backprop(x, y, &act, &mut grad);
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedStreams, Stream};

    fn random_mlp(seed: u64) -> Mlp<f64> {
        let mut rng = SeedStreams::new(seed).rng(Stream::LearnerInit);
        let mut m = Mlp::new(5, 6, 3, 0.01, &mut rng);
        let p: Vec<f64> = (0..m.params.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        m.set_parameters(&p).unwrap();
        m
    }

    #[test]
    fn zero_parameters_give_uniform_output() {
        let mut m = random_mlp(1);
        let zeros = vec![0.0; m.params.len()];
        m.set_parameters(&zeros).unwrap();
        let p = m.forward(Row::Dense(&[1.0, 2.0, 3.0, 4.0, 5.0])).unwrap();
        assert_eq!(p, ProbVector::uniform(3));
    }

    #[test]
    fn forward_is_a_deterministic_distribution() {
        let m = random_mlp(2);
        let x = [0.3, -0.2, 0.9, 0.0, 1.5];
        let a = m.forward(Row::Dense(&x)).unwrap();
        let b = m.forward(Row::Dense(&x)).unwrap();
        assert_eq!(a, b);
        assert!((a.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sgd_step_matches_gradient_descent() {
        let mut m = random_mlp(3);
        let x = [0.5, -0.25, 0.75, 0.1, -0.9];
        let g = m.gradient(Row::Dense(&x), 1);
        let want: Vec<f64> = m.params.iter().zip(&g).map(|(p, g)| p - 0.01 * g).collect();
        m.observe(Row::Dense(&x), 1);
        for (a, b) in m.params.iter().zip(&want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn forward_flags_non_finite_activations() {
        let mut m = random_mlp(4);
        let mut p = m.parameters();
        p[0] = f64::INFINITY;
        m.set_parameters(&p).unwrap();
        assert!(m.forward(Row::Dense(&[1.0, 0.0, 0.0, 0.0, 0.0])).is_err());
        assert_eq!(
            m.predict_proba(Row::Dense(&[1.0, 0.0, 0.0, 0.0, 0.0])),
            ProbVector::uniform(3)
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = random_mlp(5);
        assert!(matches!(
            m.forward(Row::Dense(&[1.0])),
            Err(Error::DimensionMismatch { expected: 5, found: 1 })
        ));
    }
}
