use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::seed;

use super::standard_normal_vec;

/// Labeled feature rows, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<usize>, dim: usize, classes: usize) -> Result<Self> {
        if dim == 0 || classes == 0 {
            return Err(invalid(
                "dataset",
                "feature dimension and class count must be positive",
            ));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                found: features.len(),
            });
        }
        if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
            return Err(invalid(
                "label",
                format!("row {row} has label {label}, expected < {classes}"),
            ));
        }
        Ok(Dataset {
            features,
            labels,
            dim,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Splits row indices into `n` contiguous near-equal shards after one
    /// seeded Fisher–Yates shuffle. Shard sizes differ by at most one.
    pub fn shard(&self, n: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
        if n == 0 {
            return Err(invalid("n", "need at least one shard"));
        }
        if self.len() < n {
            return Err(invalid(
                "dataset",
                format!("{} rows cannot fill {n} nonempty shards", self.len()),
            ));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        let mut rng = seed::rng(seed, &[seed::tag::SHUFFLE]);
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let base = self.len() / n;
        let extra = self.len() % n;
        let mut shards = Vec::with_capacity(n);
        let mut start = 0;
        for s in 0..n {
            let size = base + usize::from(s < extra);
            shards.push(order[start..start + size].to_vec());
            start += size;
        }
        Ok(shards)
    }
}

/// Isotropic Gaussian clusters: class centers drawn `N(0, 4 I)`, samples
/// `center + spread · N(0, I)`, labels assigned round-robin so classes are
/// balanced.
pub fn gaussian_blobs(
    samples: usize,
    dim: usize,
    classes: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if classes == 0 || dim == 0 {
        return Err(invalid(
            "blobs",
            "dimension and class count must be positive",
        ));
    }
    let mut rng = seed::rng(seed, &[seed::tag::DATA]);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            standard_normal_vec(&mut rng, dim)
                .into_iter()
                .map(|v| 2.0 * v)
                .collect()
        })
        .collect();
    let mut features = Vec::with_capacity(samples * dim);
    let mut labels = Vec::with_capacity(samples);
    for s in 0..samples {
        let label = s % classes;
        let noise = standard_normal_vec(&mut rng, dim);
        features.extend(
            centers[label]
                .iter()
                .zip(noise)
                .map(|(c, z)| c + spread * z),
        );
        labels.push(label);
    }
    Dataset::new(features, labels, dim, classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_out_of_range_label() {
        assert!(Dataset::new(vec![0.0; 4], vec![0, 3], 2, 3).is_err());
        assert!(Dataset::new(vec![0.0; 3], vec![0, 1], 2, 3).is_err());
    }

    #[test]
    fn shards_partition_rows() {
        let data = gaussian_blobs(23, 3, 4, 0.5, 1).unwrap();
        let shards = data.shard(5, 7).unwrap();
        let sizes: Vec<usize> = shards.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        let mut all: Vec<usize> = shards.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert_eq!(shards, data.shard(5, 7).unwrap());
    }

    #[test]
    fn too_few_rows_for_shards() {
        let data = gaussian_blobs(3, 2, 2, 1.0, 1).unwrap();
        assert!(data.shard(4, 0).is_err());
    }
}
