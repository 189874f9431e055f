use std::cmp::Ordering;

use crate::error::Result;
use crate::pool::{OwnedRow, Pool, Row};
use crate::prob::ProbVector;
use crate::rng::EpisodeRng;
use crate::scalar::Scalar;

use super::Learner;

/// Memory-based k-NN. Learning appends the revealed example to the reference set;
/// prediction normalizes inverse-distance votes `1 / (d + epsilon)` of the
/// `min(k, |store|)` nearest stored examples.
#[derive(Clone, Debug)]
pub struct Knn<T> {
    dim: usize,
    num_classes: usize,
    k: usize,
    epsilon: T,
    store: Vec<(OwnedRow<T>, usize)>,
}

impl<T: Scalar> Knn<T> {
    pub fn new(dim: usize, num_classes: usize, k: usize, epsilon: T) -> Self {
        assert!(k > 0, "k must be positive");
        Self {
            dim,
            num_classes,
            k,
            epsilon,
            store: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(store index, distance)` of the nearest neighbors, closest first; equal
    /// distances keep insertion order.
    pub fn neighbors(&self, x: Row<'_, T>) -> Vec<(usize, T)> {
        let mut dists: Vec<(usize, T)> = self
            .store
            .iter()
            .enumerate()
            .map(|(i, (row, _))| (i, x.sq_distance(&row.view()).max(T::zero()).sqrt()))
            .collect();
        let m = self.k.min(dists.len());
        let cmp = |a: &(usize, T), b: &(usize, T)| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0));
        if m < dists.len() {
            dists.select_nth_unstable_by(m, cmp);
            dists.truncate(m);
        }
        dists.sort_by(cmp);
        dists
    }
}

impl<T: Scalar> Learner<T> for Knn<T> {
    fn name(&self) -> &'static str {
        "knn"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn predict_proba(&self, x: Row<'_, T>) -> ProbVector<T> {
        if self.store.is_empty() {
            return ProbVector::uniform(self.num_classes);
        }
        let mut mass = vec![T::zero(); self.num_classes];
        for (i, d) in self.neighbors(x) {
            mass[self.store[i].1] += T::one() / (d + self.epsilon);
        }
        ProbVector::from_masses(mass)
    }

    fn observe(&mut self, x: Row<'_, T>, y: usize) {
        self.store.push((x.to_owned_row(), y));
    }

    fn reset(&mut self) {
        self.store.clear();
    }

    fn parameters(&self) -> Vec<T> {
        Vec::new()
    }

    /// The reference set becomes exactly `examples`, in order; epochs do not apply.
    fn fit_batch(
        &mut self,
        pool: &Pool<T>,
        examples: &[usize],
        _epochs: usize,
        _reset: bool,
        _rng: &mut EpisodeRng,
    ) -> Result<()> {
        if examples.is_empty() {
            return Err(crate::error::Error::EmptyBatch);
        }
        self.store.clear();
        for &id in examples {
            self.observe(pool.row(id), pool.label(id));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedStreams, Stream};
    use rand::Rng;

    /// Independent oracle: full sort of all distances, then weight the first k.
    fn brute_force(store: &[(Vec<f64>, usize)], x: &[f64], k: usize, c: usize, eps: f64) -> Vec<f64> {
        let mut d: Vec<(f64, usize)> = store
            .iter()
            .map(|(r, y)| {
                let s: f64 = r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (s.sqrt(), *y)
            })
            .collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut mass = vec![0.0; c];
        for &(dist, y) in d.iter().take(k) {
            mass[y] += 1.0 / (dist + eps);
        }
        let total: f64 = mass.iter().sum();
        mass.iter().map(|m| m / total).collect()
    }

    #[test]
    fn empty_store_is_uniform() {
        let knn = Knn::<f64>::new(2, 4, 7, 1e-8);
        assert_eq!(knn.predict_proba(Row::Dense(&[1.0, 1.0])), ProbVector::uniform(4));
    }

    #[test]
    fn single_neighbor_puts_all_mass_on_its_label() {
        let mut knn = Knn::<f64>::new(2, 3, 7, 1e-8);
        knn.observe(Row::Dense(&[0.0, 1.0]), 2);
        let p = knn.predict_proba(Row::Dense(&[5.0, -3.0]));
        assert_eq!(p.as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn matches_brute_force_on_random_store() {
        let mut rng = SeedStreams::new(5).rng(Stream::LearnerInit);
        for _ in 0..25 {
            let mut knn = Knn::<f64>::new(3, 4, 7, 1e-8);
            let mut store = Vec::new();
            for _ in 0..20 {
                let r: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let y = rng.random_range(0..4);
                knn.observe(Row::Dense(&r), y);
                store.push((r, y));
            }
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let want = brute_force(&store, &x, 7, 4, 1e-8);
            let got = knn.predict_proba(Row::Dense(&x));
            for (a, b) in got.as_slice().iter().zip(&want) {
                assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn duplicates_are_kept() {
        let mut knn = Knn::<f32>::new(1, 2, 3, 1e-8);
        knn.observe(Row::Dense(&[1.0]), 0);
        knn.observe(Row::Dense(&[1.0]), 0);
        assert_eq!(knn.len(), 2);
    }

    #[test]
    fn stored_points_recover_their_own_label() {
        let mut knn = Knn::<f64>::new(2, 3, 7, 1e-8);
        let pts = [[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]];
        for (y, p) in pts.iter().enumerate() {
            knn.observe(Row::Dense(p), y);
        }
        for (y, p) in pts.iter().enumerate() {
            assert_eq!(knn.predict_proba(Row::Dense(p)).argmax_set(), vec![y]);
        }
    }

    #[test]
    fn batch_fit_replaces_reference_set() {
        let pool = Pool::from_dense(1, vec![0.0f64, 1.0, 2.0], vec![0, 1, 0], 2).unwrap();
        let mut knn = Knn::<f64>::new(1, 2, 7, 1e-8);
        let mut rng = SeedStreams::new(0).rng(Stream::LearnerShuffle);
        knn.fit_batch(&pool, &[0, 1], 3, false, &mut rng).unwrap();
        assert_eq!(knn.len(), 2);
        knn.fit_batch(&pool, &[0, 1, 2], 3, true, &mut rng).unwrap();
        assert_eq!(knn.len(), 3);
    }
}
