//! Algebraic distance couplings.
//!
//! A handful of random vectors are smoothed by Jacobi over-relaxation on the
//! graph Laplacian. Endpoints of a strongly connected edge end up with
//! nearly equal values on every vector; the coupling strength of an edge is
//! `-sum_r lg(max(|chi_i - chi_j|, eps))`, so it is positive and larger for
//! stronger connections.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{validation, Result};
use crate::graph::{Graph, LaplacianView};
use crate::scalar::{Scalar, LOG_CLAMP};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams<T> {
    /// Number of random test vectors.
    pub vectors: usize,
    /// JOR sweeps applied to each vector.
    pub iterations: usize,
    pub omega: T,
    pub seed: u64,
}

impl<T: Scalar> Default for CouplingParams<T> {
    fn default() -> Self {
        CouplingParams {
            vectors: 5,
            iterations: 20,
            omega: T::lit(0.5),
            seed: 0,
        }
    }
}

/// `count` vectors of length `n`, stored node-major so that one pass over the
/// adjacency relaxes all of them.
#[derive(Clone, Debug, PartialEq)]
pub struct TestVectors<T> {
    n: usize,
    count: usize,
    data: Vec<T>,
}

impl<T: Scalar> TestVectors<T> {
    /// Entries drawn uniformly from `[-1/2, 1/2)`.
    pub fn random<R: Rng>(n: usize, count: usize, rng: &mut R) -> Self {
        let data = (0..n * count).map(|_| T::lit(rng.gen::<f64>() - 0.5)).collect();
        TestVectors { n, count, data }
    }

    /// Builds a set from explicit vectors, each of length `n`.
    pub fn from_vectors(vectors: &[Vec<T>]) -> Self {
        let count = vectors.len();
        let n = vectors.first().map_or(0, Vec::len);
        let mut data = vec![T::zero(); n * count];
        for (r, v) in vectors.iter().enumerate() {
            assert_eq!(v.len(), n, "test vectors must have equal length");
            for (i, &x) in v.iter().enumerate() {
                data[i * count + r] = x;
            }
        }
        TestVectors { n, count, data }
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn values(&self, i: usize) -> &[T] {
        &self.data[i * self.count..(i + 1) * self.count]
    }

    pub fn vector(&self, r: usize) -> Vec<T> {
        (0..self.n).map(|i| self.data[i * self.count + r]).collect()
    }

    /// One simultaneous JOR sweep on every vector.
    pub fn relax(&mut self, lap: &LaplacianView<'_, T>, omega: T) {
        let g = lap.graph();
        let keep = T::one() - omega;
        let mut next = vec![T::zero(); self.data.len()];
        let mut acc = vec![T::zero(); self.count];
        for i in 0..self.n {
            let row = i * self.count..(i + 1) * self.count;
            let d = lap.diag(i);
            if d <= T::zero() {
                next[row.clone()].copy_from_slice(&self.data[row]);
                continue;
            }
            acc.iter_mut().for_each(|a| *a = T::zero());
            for (j, w) in g.neighbors(i) {
                let other = &self.data[j * self.count..(j + 1) * self.count];
                for (a, &x) in acc.iter_mut().zip(other) {
                    *a += w * x;
                }
            }
            for ((out, &own), &a) in next[row.clone()].iter_mut().zip(&self.data[row]).zip(&acc) {
                *out = keep * own + omega * a / d;
            }
        }
        self.data = next;
    }
}

fn check_omega<T: Scalar>(omega: T) -> Result<()> {
    if !(omega >= T::zero() && omega <= T::one()) {
        return Err(validation(format!("omega must lie in [0, 1], got {omega}")));
    }
    Ok(())
}

/// One JOR sweep `H chi` with `H = (D/omega)^-1 ((1/omega - 1) D + W)`,
/// i.e. `chi'_i = (1 - omega) chi_i + omega * sum_j w_ij chi_j / d_ii`.
/// Rows with zero degree pass through unchanged.
pub fn jor_sweep<T: Scalar>(lap: &LaplacianView<'_, T>, chi: &[T], omega: T) -> Result<Vec<T>> {
    check_omega(omega)?;
    if chi.len() != lap.n() {
        return Err(validation("vector length does not match graph size"));
    }
    let mut tv = TestVectors {
        n: chi.len(),
        count: 1,
        data: chi.to_vec(),
    };
    tv.relax(lap, omega);
    Ok(tv.data)
}

/// Coupling strength from the endpoint differences of one edge.
pub fn strength_from_differences<T: Scalar, I: IntoIterator<Item = T>>(diffs: I) -> T {
    let eps = T::lit(LOG_CLAMP);
    -diffs.into_iter().map(|d| d.abs().max(eps).lg()).sum::<T>()
}

/// Per-edge coupling strengths, indexed like [`Graph::edges`].
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMap<T> {
    strengths: Vec<T>,
}

impl<T: Scalar> CouplingMap<T> {
    pub fn from_strengths(strengths: Vec<T>) -> Self {
        CouplingMap { strengths }
    }

    /// A map assigning the same strength to every edge.
    pub fn uniform(g: &Graph<T>, value: T) -> Self {
        CouplingMap {
            strengths: vec![value; g.edge_count()],
        }
    }

    #[inline]
    pub fn get(&self, edge: usize) -> T {
        self.strengths[edge]
    }

    #[inline]
    pub fn strengths(&self) -> &[T] {
        &self.strengths
    }

    /// Largest attainable strength for `vectors` test vectors.
    pub fn max_strength(vectors: usize) -> T {
        T::from_usize_lossy(vectors) * -T::lit(LOG_CLAMP).lg()
    }
}

pub fn couplings_from_vectors<T: Scalar>(g: &Graph<T>, tv: &TestVectors<T>) -> CouplingMap<T> {
    let strengths = g
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (tv.values(e.u), tv.values(e.v));
            strength_from_differences(a.iter().zip(b).map(|(&x, &y)| x - y))
        })
        .collect();
    CouplingMap { strengths }
}

/// Relaxes `params.vectors` seeded random vectors for `params.iterations`
/// sweeps and converts the result into edge strengths.
pub fn compute_couplings<T: Scalar>(
    g: &Graph<T>,
    params: &CouplingParams<T>,
) -> Result<CouplingMap<T>> {
    check_omega(params.omega)?;
    if params.vectors == 0 || params.iterations == 0 {
        return Err(validation("at least one test vector and one iteration are required"));
    }
    let lap = g.laplacian()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut tv = TestVectors::random(g.n(), params.vectors, &mut rng);
    for _ in 0..params.iterations {
        tv.relax(&lap, params.omega);
    }
    Ok(couplings_from_vectors(g, &tv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], false).unwrap()
    }

    /// Dense `H` assembled entry by entry from its definition.
    fn dense_h(g: &Graph, omega: f64) -> Vec<Vec<f64>> {
        let n = g.n();
        let mut w = vec![vec![0.0; n]; n];
        for e in g.edges() {
            w[e.u][e.v] += e.w;
            w[e.v][e.u] += e.w;
        }
        let d: Vec<f64> = w.iter().map(|r| r.iter().sum()).collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let inner = if i == j { (1.0 / omega - 1.0) * d[i] } else { w[i][j] };
                        inner * omega / d[i]
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn jor_single_edge_averages() {
        let g: Graph = Graph::new(2, [(0, 1, 1.0)], false).unwrap();
        let lap = g.laplacian().unwrap();
        let out = jor_sweep(&lap, &[0.4, -0.2], 0.5).unwrap();
        assert!((out[0] - 0.1).abs() < 1e-15 && (out[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn jor_constant_is_fixed_point() {
        let g = triangle();
        let lap = g.laplacian().unwrap();
        assert_eq!(jor_sweep(&lap, &[0.3; 3], 0.7).unwrap(), vec![0.3; 3]);
    }

    #[test]
    fn jor_triangle_matches_dense_matrix() {
        let g = triangle();
        let h = dense_h(&g, 0.5);
        let chi = [1.0, 0.0, 0.0];
        let expect: Vec<f64> = h.iter().map(|row| row.iter().zip(&chi).map(|(a, b)| a * b).sum()).collect();
        assert_eq!(expect, vec![0.5, 0.25, 0.25]);
        let got = jor_sweep(&g.laplacian().unwrap(), &chi, 0.5).unwrap();
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn jor_rejects_bad_omega() {
        let g = triangle();
        let lap = g.laplacian().unwrap();
        assert!(jor_sweep(&lap, &[0.0; 3], 1.5).is_err());
        assert!(jor_sweep(&lap, &[0.0; 3], -0.1).is_err());
    }

    #[test]
    fn isolated_rows_pass_through() {
        let g = Graph::new(3, [(0, 1, 1.0)], false).unwrap();
        let out = jor_sweep(&g.laplacian().unwrap(), &[0.1, 0.3, -0.4], 0.5).unwrap();
        assert_eq!(out[2], -0.4);
    }

    #[test]
    fn coincident_endpoints_give_max_strength() {
        let g = Graph::new(2, [(0, 1, 1.0)], false).unwrap();
        let params = CouplingParams {
            vectors: 1,
            iterations: 1,
            omega: 0.5,
            seed: 3,
        };
        let c = compute_couplings(&g, &params).unwrap();
        assert_eq!(c.get(0), CouplingMap::<f64>::max_strength(1));
        assert!((c.get(0) - 39.863137).abs() < 1e-5);
    }

    #[test]
    fn half_differences_give_unit_strength_each() {
        assert_eq!(strength_from_differences([0.5f64; 5]), 5.0);
    }

    #[test]
    fn couplings_deterministic_and_bounded() {
        let g = Graph::new(
            6,
            [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 0.5), (4, 5, 1.0), (5, 0, 1.0)],
            false,
        )
        .unwrap();
        let params = CouplingParams { seed: 11, ..Default::default() };
        let a = compute_couplings(&g, &params).unwrap();
        let b = compute_couplings(&g, &params).unwrap();
        assert_eq!(a, b);
        let cap = CouplingMap::<f64>::max_strength(5);
        for &s in a.strengths() {
            assert!(s > 0.0 && s <= cap && s.is_finite());
        }
        let other = compute_couplings(&g, &CouplingParams { seed: 12, ..params }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn test_vector_layout() {
        let tv = TestVectors::from_vectors(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(tv.values(1), &[2.0, 4.0]);
        assert_eq!(tv.vector(1), vec![3.0, 4.0]);
    }
}
