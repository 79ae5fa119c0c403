//! Reference orderings and cost ratios against them.
//!
//! The random ordering is a Fisher-Yates shuffle driven by ChaCha8 seeded
//! through `seed_from_u64`, with indices drawn by multiply-shift rejection
//! sampling. Both pieces are fully specified, so a seed yields the same
//! permutation on every platform and library version.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrangement::{beta, cost, Arrangement};
use crate::error::{validation, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    /// Input order.
    Natural,
    Reverse,
    Random(u64),
}

impl BaselineKind {
    pub fn name(&self) -> String {
        match self {
            BaselineKind::Natural => "natural".into(),
            BaselineKind::Reverse => "reverse".into(),
            BaselineKind::Random(seed) => format!("random({seed})"),
        }
    }
}

pub fn baseline<T: Scalar>(g: &Graph<T>, kind: BaselineKind) -> Arrangement<T> {
    let n = g.n();
    let order: Vec<usize> = match kind {
        BaselineKind::Natural => (0..n).collect(),
        BaselineKind::Reverse => (0..n).rev().collect(),
        BaselineKind::Random(seed) => random_permutation(n, seed),
    };
    Arrangement::from_order(order, g.volumes()).expect("baseline orders are bijections")
}

pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        p.swap(i, j);
    }
    p
}

/// Uniform integer in `[0, bound)`.
fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let m = rng.next_u64() as u128 * bound as u128;
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonEntry {
    pub name: String,
    pub cost: f64,
    /// `None` when the graph has no edge weight.
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    /// The first entry is the candidate, the rest are references.
    pub entries: Vec<ComparisonEntry>,
    /// Candidate cost divided by the smallest reference cost; `None` when
    /// that cost is zero.
    pub ratio: Option<f64>,
}

impl Comparison {
    pub fn candidate(&self) -> &ComparisonEntry {
        &self.entries[0]
    }

    pub fn best_reference(&self) -> &ComparisonEntry {
        self.entries[1..]
            .iter()
            .min_by(|a, b| a.cost.total_cmp(&b.cost))
            .expect("at least one reference")
    }
}

/// Scores `arrangements[0]` against the remaining ones.
pub fn compare<T: Scalar>(g: &Graph<T>, arrangements: &[(&str, &Arrangement<T>)]) -> Result<Comparison> {
    if arrangements.len() < 2 {
        return Err(validation("comparison needs a candidate and at least one reference"));
    }
    let weighted = g.total_weight() > T::zero();
    let mut entries = Vec::with_capacity(arrangements.len());
    for (name, a) in arrangements {
        if a.n() != g.n() {
            return Err(validation(format!(
                "arrangement {name:?} covers {} nodes, graph has {}",
                a.n(),
                g.n()
            )));
        }
        entries.push(ComparisonEntry {
            name: name.to_string(),
            cost: cost(g, a)?.as_f64(),
            beta: if weighted { Some(beta(g, a)?.as_f64()) } else { None },
        });
    }
    let best = entries[1..]
        .iter()
        .map(|e| e.cost)
        .fold(f64::INFINITY, f64::min);
    let ratio = (best != 0.0).then(|| entries[0].cost / best);
    Ok(Comparison { entries, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0)), false).unwrap()
    }

    #[test]
    fn natural_and_reverse() {
        let g = path(3);
        assert_eq!(baseline(&g, BaselineKind::Natural).ranks(), &[0, 1, 2]);
        assert_eq!(baseline(&g, BaselineKind::Reverse).ranks(), &[2, 1, 0]);
    }

    #[test]
    fn random_golden() {
        assert_eq!(random_permutation(10, 42), random_permutation(10, 42));
        assert_ne!(random_permutation(10, 42), random_permutation(10, 43));
        assert_eq!(random_permutation(10, 7), GOLDEN_SEED_7);
        assert!(random_permutation(0, 1).is_empty());
        assert_eq!(random_permutation(1, 1), vec![0]);
    }

    const GOLDEN_SEED_7: [usize; 10] = [4, 6, 2, 0, 8, 3, 7, 5, 9, 1];

    #[test]
    fn uniform_below_is_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hits = [0usize; 3];
        for _ in 0..3000 {
            hits[uniform_below(&mut rng, 3) as usize] += 1;
        }
        assert!(hits.iter().all(|&h| h > 900), "{hits:?}");
    }

    #[test]
    fn compare_examples() {
        let g = path(50);
        let nat = baseline(&g, BaselineKind::Natural);
        let c = compare(&g, &[("a", &nat), ("b", &nat)]).unwrap();
        assert_eq!(c.ratio, None);
        assert_eq!(c.candidate().cost, 0.0);

        let rnd = baseline(&g, BaselineKind::Random(1));
        let c = compare(&g, &[("solver", &nat), ("random", &rnd)]).unwrap();
        assert_eq!(c.ratio, Some(0.0));

        let c = compare(&g, &[("random", &rnd), ("random", &rnd)]).unwrap();
        assert_eq!(c.ratio, Some(1.0));
        assert_eq!(c.best_reference().name, "random");

        let small = baseline(&path(3), BaselineKind::Natural);
        assert!(compare(&g, &[("a", &nat), ("b", &small)]).is_err());
        assert!(compare(&g, &[("a", &nat)]).is_err());
    }
}
