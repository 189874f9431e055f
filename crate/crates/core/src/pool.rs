//! The unlabeled pool: feature rows, hidden labels and row-level vector algebra.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::{SeedStreams, Stream};
use crate::scalar::Scalar;

/// Borrowed feature row, dense or sparse (sorted, unique indices).
#[derive(Clone, Copy, Debug)]
pub enum Row<'a, T> {
    Dense(&'a [T]),
    Sparse {
        dim: usize,
        indices: &'a [u32],
        values: &'a [T],
    },
}

impl<'a, T: Scalar> Row<'a, T> {
    pub fn dim(&self) -> usize {
        match self {
            Row::Dense(v) => v.len(),
            Row::Sparse { dim, .. } => *dim,
        }
    }

    /// `self · w[..dim]`.
    #[inline]
    pub fn dot(&self, w: &[T]) -> T {
        match self {
            Row::Dense(v) => dense_dot(v, w),
            Row::Sparse { indices, values, .. } => indices
                .iter()
                .zip(values.iter())
                .fold(T::zero(), |acc, (&i, &v)| acc + v * w[i as usize]),
        }
    }

    /// `out[..dim] += alpha * self`.
    #[inline]
    pub fn add_scaled_to(&self, alpha: T, out: &mut [T]) {
        match self {
            Row::Dense(v) => {
                for (o, &x) in out.iter_mut().zip(v.iter()) {
                    *o += alpha * x;
                }
            }
            Row::Sparse { indices, values, .. } => {
                for (&i, &v) in indices.iter().zip(values.iter()) {
                    out[i as usize] += alpha * v;
                }
            }
        }
    }

    pub fn sq_norm(&self) -> T {
        match self {
            Row::Dense(v) => dense_dot(v, v),
            Row::Sparse { values, .. } => dense_dot(values, values),
        }
    }

    /// Squared Euclidean distance.
    pub fn sq_distance(&self, other: &Row<'_, T>) -> T {
        match (self, other) {
            (Row::Dense(a), Row::Dense(b)) => a.iter().zip(b.iter()).fold(T::zero(), |acc, (&x, &y)| {
                let d = x - y;
                acc + d * d
            }),
            (
                Row::Sparse {
                    indices: ia,
                    values: va,
                    ..
                },
                Row::Sparse {
                    indices: ib,
                    values: vb,
                    ..
                },
            ) => sparse_sq_distance(ia, va, ib, vb),
            (Row::Dense(a), Row::Sparse { indices, values, .. })
            | (Row::Sparse { indices, values, .. }, Row::Dense(a)) => {
                let mut acc = dense_dot(a, a);
                for (&i, &v) in indices.iter().zip(values.iter()) {
                    let x = a[i as usize];
                    let d = x - v;
                    acc += d * d - x * x;
                }
                acc.max(T::zero())
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Row::Dense(v) => v.iter().all(|x| x.is_finite()),
            Row::Sparse { values, .. } => values.iter().all(|x| x.is_finite()),
        }
    }

    pub fn to_dense(&self) -> Vec<T> {
        match self {
            Row::Dense(v) => v.to_vec(),
            Row::Sparse { dim, indices, values } => {
                let mut out = vec![T::zero(); *dim];
                for (&i, &v) in indices.iter().zip(values.iter()) {
                    out[i as usize] = v;
                }
                out
            }
        }
    }

    pub fn to_owned_row(&self) -> OwnedRow<T> {
        match self {
            Row::Dense(v) => OwnedRow::Dense(v.to_vec()),
            Row::Sparse { dim, indices, values } => OwnedRow::Sparse {
                dim: *dim,
                indices: indices.to_vec(),
                values: values.to_vec(),
            },
        }
    }
}

#[inline]
fn dense_dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    // Four accumulators let the optimizer vectorize the reduction.
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = c * 4;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = T::zero();
    for k in chunks * 4..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn sparse_sq_distance<T: Scalar>(ia: &[u32], va: &[T], ib: &[u32], vb: &[T]) -> T {
    let (mut p, mut q) = (0, 0);
    let mut acc = T::zero();
    while p < ia.len() && q < ib.len() {
        if ia[p] == ib[q] {
            let d = va[p] - vb[q];
            acc += d * d;
            p += 1;
            q += 1;
        } else if ia[p] < ib[q] {
            acc += va[p] * va[p];
            p += 1;
        } else {
            acc += vb[q] * vb[q];
            q += 1;
        }
    }
    acc + va[p..].iter().map(|&v| v * v).sum::<T>() + vb[q..].iter().map(|&v| v * v).sum::<T>()
}

/// Owned copy of a feature row.
#[derive(Clone, Debug, PartialEq)]
pub enum OwnedRow<T> {
    Dense(Vec<T>),
    Sparse {
        dim: usize,
        indices: Vec<u32>,
        values: Vec<T>,
    },
}

impl<T: Scalar> OwnedRow<T> {
    pub fn view(&self) -> Row<'_, T> {
        match self {
            OwnedRow::Dense(v) => Row::Dense(v),
            OwnedRow::Sparse { dim, indices, values } => Row::Sparse {
                dim: *dim,
                indices,
                values,
            },
        }
    }
}

/// A sparse vector with sorted unique indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector<T> {
    pub dim: usize,
    pub indices: Vec<u32>,
    pub values: Vec<T>,
}

impl<T: Scalar> SparseVector<T> {
    pub fn view(&self) -> Row<'_, T> {
        Row::Sparse {
            dim: self.dim,
            indices: &self.indices,
            values: &self.values,
        }
    }
}

#[derive(Clone, Debug)]
enum FeatureMatrix<T> {
    Dense {
        dim: usize,
        data: Vec<T>,
    },
    Sparse {
        dim: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<T>,
    },
}

/// One pool member as seen by the protocol. Learners only ever receive `features`.
#[derive(Clone, Copy, Debug)]
pub struct Instance<'a, T> {
    pub id: usize,
    pub features: Row<'a, T>,
    pub label: usize,
}

/// Fixed set of instances with ids `0..N` and hidden labels in `[0, C)`.
#[derive(Clone, Debug)]
pub struct Pool<T> {
    features: FeatureMatrix<T>,
    labels: Vec<usize>,
    num_classes: usize,
    source_ids: Option<Vec<usize>>,
}

impl<T: Scalar> Pool<T> {
    /// Row-major dense features, `labels.len()` rows of `dim` values each.
    pub fn from_dense(dim: usize, data: Vec<T>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        if data.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * labels.len(),
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("features of instance {}", pos / dim)));
        }
        check_labels(&labels, num_classes)?;
        Ok(Self {
            features: FeatureMatrix::Dense { dim, data },
            labels,
            num_classes,
            source_ids: None,
        })
    }

    pub fn from_dense_rows(rows: Vec<Vec<T>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::from_dense(dim, rows.concat(), labels, num_classes)
    }

    pub fn from_sparse(dim: usize, rows: Vec<SparseVector<T>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        check_labels(&labels, num_classes)?;
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let (mut indices, mut values) = (Vec::new(), Vec::new());
        for (id, row) in rows.into_iter().enumerate() {
            if row.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.dim,
                });
            }
            if row.indices.len() != row.values.len()
                || row.indices.windows(2).any(|w| w[0] >= w[1])
                || row.indices.last().is_some_and(|&i| i as usize >= dim)
            {
                return Err(Error::invalid(format!("malformed sparse row {id}")));
            }
            if row.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("features of instance {id}")));
            }
            indices.extend(row.indices);
            values.extend(row.values);
            indptr.push(indices.len());
        }
        Ok(Self {
            features: FeatureMatrix::Sparse {
                dim,
                indptr,
                indices,
                values,
            },
            labels,
            num_classes,
            source_ids: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        match &self.features {
            FeatureMatrix::Dense { dim, .. } | FeatureMatrix::Sparse { dim, .. } => *dim,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.features, FeatureMatrix::Sparse { .. })
    }

    #[inline]
    pub fn row(&self, id: usize) -> Row<'_, T> {
        match &self.features {
            FeatureMatrix::Dense { dim, data } => Row::Dense(&data[id * dim..(id + 1) * dim]),
            FeatureMatrix::Sparse {
                dim,
                indptr,
                indices,
                values,
            } => {
                let (a, b) = (indptr[id], indptr[id + 1]);
                Row::Sparse {
                    dim: *dim,
                    indices: &indices[a..b],
                    values: &values[a..b],
                }
            }
        }
    }

    #[inline]
    pub fn label(&self, id: usize) -> usize {
        self.labels[id]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn instance(&self, id: usize) -> Instance<'_, T> {
        Instance {
            id,
            features: self.row(id),
            label: self.labels[id],
        }
    }

    pub fn instances(&self) -> impl Iterator<Item = Instance<'_, T>> {
        (0..self.len()).map(move |id| self.instance(id))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Id of instance `id` in the pool this one was drawn from (itself if not a subset).
    pub fn source_id(&self, id: usize) -> usize {
        self.source_ids.as_ref().map_or(id, |s| s[id])
    }

    /// New pool holding `ids` in the given order, renumbered `0..ids.len()`.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        if let Some(&bad) = ids.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid(format!(
                "subset id {bad} outside pool of {}",
                self.len()
            )));
        }
        let labels = ids.iter().map(|&i| self.labels[i]).collect();
        let features = match &self.features {
            FeatureMatrix::Dense { dim, data } => {
                let mut out = Vec::with_capacity(ids.len() * dim);
                for &i in ids {
                    out.extend_from_slice(&data[i * dim..(i + 1) * dim]);
                }
                FeatureMatrix::Dense { dim: *dim, data: out }
            }
            FeatureMatrix::Sparse {
                dim,
                indptr,
                indices,
                values,
            } => {
                let mut new_ptr = vec![0];
                let (mut ni, mut nv) = (Vec::new(), Vec::new());
                for &i in ids {
                    ni.extend_from_slice(&indices[indptr[i]..indptr[i + 1]]);
                    nv.extend_from_slice(&values[indptr[i]..indptr[i + 1]]);
                    new_ptr.push(ni.len());
                }
                FeatureMatrix::Sparse {
                    dim: *dim,
                    indptr: new_ptr,
                    indices: ni,
                    values: nv,
                }
            }
        };
        Ok(Self {
            features,
            labels,
            num_classes: self.num_classes,
            source_ids: Some(ids.iter().map(|&i| self.source_id(i)).collect()),
        })
    }

    /// Uniform random subset of `n` instances drawn from the seed's subset stream,
    /// kept in source order.
    pub fn sample_subset(&self, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::invalid(format!(
                "cannot draw {n} instances from a pool of {}",
                self.len()
            )));
        }
        let mut rng = SeedStreams::new(seed).rng(Stream::PoolSubset);
        let mut ids = index::sample(&mut rng, self.len(), n).into_vec();
        ids.sort_unstable();
        self.subset(&ids)
    }

    /// Converts every feature to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Pool<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::from_f64_lossy(x.to_f64_lossy())).collect();
        let features = match &self.features {
            FeatureMatrix::Dense { dim, data } => FeatureMatrix::Dense {
                dim: *dim,
                data: conv(data),
            },
            FeatureMatrix::Sparse {
                dim,
                indptr,
                indices,
                values,
            } => FeatureMatrix::Sparse {
                dim: *dim,
                indptr: indptr.clone(),
                indices: indices.clone(),
                values: conv(values),
            },
        };
        Pool {
            features,
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            source_ids: self.source_ids.clone(),
        }
    }

    /// Largest row norm, the `R` of mistake-bound arguments.
    pub fn radius(&self) -> T {
        (0..self.len())
            .map(|i| self.row(i).sq_norm())
            .fold(T::zero(), |a, b| a.max(b))
            .sqrt()
    }
}

fn check_labels(labels: &[usize], num_classes: usize) -> Result<()> {
    if num_classes == 0 {
        return Err(Error::invalid("class count must be positive"));
    }
    if let Some((id, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= num_classes) {
        return Err(Error::invalid(format!(
            "label {y} of instance {id} outside [0, {num_classes})"
        )));
    }
    Ok(())
}
