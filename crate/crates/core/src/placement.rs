//! Best position for a single node given the coordinates of its neighbors.
//!
//! The node is always put on top of one of its neighbors. The exact rule
//! picks the neighbor whose remaining log-distance energy is smallest, which
//! costs `O(k^2)`. For larger neighborhoods the neighbor at the peak of a
//! weighted kernel density estimate is used instead; the estimate at every
//! sample is computed in `O(k)` with two exponentially decaying prefix sums.

use crate::error::{validation, Result};
use crate::scalar::{Scalar, LOG_CLAMP};

/// Neighbor positions with the weights of the edges to them, sorted by
/// position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeighborSample<T> {
    positions: Vec<T>,
    weights: Vec<T>,
    source: Vec<usize>,
}

impl<T: Scalar> NeighborSample<T> {
    pub fn new() -> Self {
        NeighborSample {
            positions: Vec::new(),
            weights: Vec::new(),
            source: Vec::new(),
        }
    }

    /// Builds a sorted sample from unsorted `(position, weight)` pairs.
    pub fn from_pairs<I: IntoIterator<Item = (T, T)>>(pairs: I) -> Self {
        let mut s = Self::new();
        s.refill(pairs);
        s
    }

    /// Replaces the contents, reusing the allocations.
    pub fn refill<I: IntoIterator<Item = (T, T)>>(&mut self, pairs: I) {
        self.positions.clear();
        self.weights.clear();
        self.source.clear();
        for (k, (x, w)) in pairs.into_iter().enumerate() {
            self.positions.push(x);
            self.weights.push(w);
            self.source.push(k);
        }
        let sorted = self.positions.windows(2).all(|p| p[0] <= p[1]);
        if !sorted {
            let mut idx: Vec<usize> = (0..self.positions.len()).collect();
            idx.sort_by(|&a, &b| self.positions[a].partial_cmp(&self.positions[b]).unwrap());
            self.positions = idx.iter().map(|&k| self.positions[k]).collect();
            self.weights = idx.iter().map(|&k| self.weights[k]).collect();
            self.source = idx;
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Position in the input sequence of the `k`-th sorted sample.
    #[inline]
    pub fn source(&self, k: usize) -> usize {
        self.source[k]
    }

    /// `sum_{j != k} w_j lg|x_k - x_j|`, the energy of sitting on sample `k`.
    /// Coincident samples contribute `lg(1e-12)`.
    pub fn energy_at(&self, k: usize) -> T {
        let eps = T::lit(LOG_CLAMP);
        let xk = self.positions[k];
        let mut e = T::zero();
        for (j, (&x, &w)) in self.positions.iter().zip(&self.weights).enumerate() {
            if j != k {
                e += w * (xk - x).abs().max(eps).lg();
            }
        }
        e
    }
}

/// Index of the sample with minimal [`NeighborSample::energy_at`]; ties go
/// to the smaller position.
pub fn place_exact_index<T: Scalar>(sample: &NeighborSample<T>) -> usize {
    assert!(!sample.is_empty(), "placement needs at least one neighbor");
    let mut best = 0;
    let mut best_e = T::infinity();
    for k in 0..sample.len() {
        let e = sample.energy_at(k);
        if e < best_e {
            best = k;
            best_e = e;
        }
    }
    best
}

pub fn place_exact<T: Scalar>(sample: &NeighborSample<T>) -> T {
    sample.positions[place_exact_index(sample)]
}

/// Density at every sample under the kernel `2^(-|x - x_j| / h)` with sample
/// weights as masses, without the constant normalization.
pub fn estimate_density<T: Scalar>(sample: &NeighborSample<T>, h: T) -> Result<Vec<T>> {
    if !(h > T::zero()) {
        return Err(validation(format!("bandwidth must be positive, got {h}")));
    }
    Ok(density_unchecked(sample.positions(), sample.weights(), h))
}

fn density_unchecked<T: Scalar>(x: &[T], p: &[T], h: T) -> Vec<T> {
    let k = x.len();
    if k == 0 {
        return Vec::new();
    }
    let two = T::lit(2.0);
    let mut left = vec![T::zero(); k];
    left[0] = p[0];
    for t in 1..k {
        left[t] = p[t] + left[t - 1] * two.powf((x[t - 1] - x[t]) / h);
    }
    let mut right = vec![T::zero(); k];
    right[k - 1] = p[k - 1];
    for t in (0..k - 1).rev() {
        right[t] = p[t] + right[t + 1] * two.powf((x[t] - x[t + 1]) / h);
    }
    (0..k).map(|t| left[t] + right[t] - p[t]).collect()
}

/// `h = N / (2 lg N)` with `N` the spread of the sample; `1` when `N <= 1`.
pub fn bandwidth<T: Scalar>(sample: &NeighborSample<T>) -> T {
    let (Some(&lo), Some(&hi)) = (sample.positions.first(), sample.positions.last()) else {
        return T::one();
    };
    let spread = hi - lo;
    if spread <= T::one() {
        T::one()
    } else {
        spread / (T::lit(2.0) * spread.lg())
    }
}

/// Index of the sample at the density peak; ties go to the smaller position.
pub fn place_density_index<T: Scalar>(sample: &NeighborSample<T>) -> usize {
    assert!(!sample.is_empty(), "placement needs at least one neighbor");
    let d = density_unchecked(sample.positions(), sample.weights(), bandwidth(sample));
    let mut best = 0;
    for t in 1..d.len() {
        if d[t] > d[best] {
            best = t;
        }
    }
    best
}

pub fn place_density<T: Scalar>(sample: &NeighborSample<T>) -> T {
    sample.positions[place_density_index(sample)]
}

/// Neighborhoods up to this size are placed exactly.
pub const DEFAULT_EXACT_THRESHOLD: usize = 32;

/// Exact rule for at most `exact_threshold` samples, density peak otherwise.
pub fn place_index<T: Scalar>(sample: &NeighborSample<T>, exact_threshold: usize) -> usize {
    if sample.len() <= exact_threshold {
        place_exact_index(sample)
    } else {
        place_density_index(sample)
    }
}

pub fn place<T: Scalar>(sample: &NeighborSample<T>, exact_threshold: usize) -> T {
    sample.positions[place_index(sample, exact_threshold)]
}
