//! Seeded synthetic graphs for tests and benchmarks.
//!
//! A generator can be named by a spec string, used wherever a graph path is
//! accepted:
//!
//! ```text
//! gen:path:N
//! gen:grid:RxC
//! gen:star:LEAVES
//! gen:regular:N:D:SEED
//! gen:pa:N:M:SEED
//! ```
//!
//! Appending `:shuffle=SEED` relabels the nodes by a seeded random
//! permutation so that the input order carries no locality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::random_permutation;
use crate::error::{validation, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

pub const SPEC_PREFIX: &str = "gen:";

fn unit<T: Scalar>(edges: impl IntoIterator<Item = (usize, usize)>) -> impl Iterator<Item = (usize, usize, T)> {
    edges.into_iter().map(|(u, v)| (u, v, T::one()))
}

pub fn path<T: Scalar>(n: usize) -> Graph<T> {
    Graph::new(n, unit((1..n).map(|i| (i - 1, i))), false).expect("valid path")
}

/// `rows x cols` lattice in row-major node order.
pub fn grid<T: Scalar>(rows: usize, cols: usize) -> Graph<T> {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::new(rows * cols, unit(edges), false).expect("valid grid")
}

/// Center 0 joined to `leaves` leaves.
pub fn star<T: Scalar>(leaves: usize) -> Graph<T> {
    Graph::new(leaves + 1, unit((1..=leaves).map(|i| (0, i))), false).expect("valid star")
}

/// Configuration model with `d` stubs per node; self-loops are dropped and
/// repeated pairs merged, so a few nodes end up with degree below `d`.
pub fn random_regular<T: Scalar>(n: usize, d: usize, seed: u64) -> Graph<T> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, d)).collect();
    let perm = random_permutation(stubs.len(), seed);
    stubs = perm.iter().map(|&k| stubs[k]).collect();
    let pairs = stubs
        .chunks_exact(2)
        .filter(|p| p[0] != p[1])
        .map(|p| (p[0].min(p[1]), p[0].max(p[1])));
    let mut edges: Vec<(usize, usize)> = pairs.collect();
    edges.sort_unstable();
    edges.dedup();
    Graph::new(n, unit(edges), false).expect("valid regular graph")
}

/// Preferential attachment: every new node links to `m` distinct earlier
/// nodes chosen with probability proportional to degree.
pub fn preferential_attachment<T: Scalar>(n: usize, m: usize, seed: u64) -> Graph<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = m.max(1);
    let mut edges = Vec::with_capacity(n * m);
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * n * m);
    let mut chosen = Vec::with_capacity(m);
    for v in 1..n {
        chosen.clear();
        let want = m.min(v);
        while chosen.len() < want {
            let u = if endpoints.is_empty() || rng.gen_bool(0.1) {
                rng.gen_range(0..v)
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            if !chosen.contains(&u) {
                chosen.push(u);
            }
        }
        for &u in &chosen {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    Graph::new(n, unit(edges), false).expect("valid attachment graph")
}

/// Renames node `i` to `perm[i]`.
pub fn relabel<T: Scalar>(g: &Graph<T>, perm: &[usize]) -> Result<Graph<T>> {
    if perm.len() != g.n() {
        return Err(validation("relabeling must cover every node"));
    }
    let edges = g.edges().iter().map(|e| (perm[e.u], perm[e.v], e.w));
    let mut volumes = vec![T::one(); g.n()];
    for (i, &p) in perm.iter().enumerate() {
        volumes[p] = g.volume(i);
    }
    Graph::new(g.n(), edges, g.is_directed())?.with_volumes(volumes)
}

pub fn is_spec(s: &str) -> bool {
    s.starts_with(SPEC_PREFIX)
}

/// Builds the graph named by a `gen:` spec.
pub fn from_spec<T: Scalar>(spec: &str) -> Result<Graph<T>> {
    let bad = || validation(format!("malformed generator spec {spec:?}"));
    let body = spec.strip_prefix(SPEC_PREFIX).ok_or_else(bad)?;
    let mut parts: Vec<&str> = body.split(':').collect();
    let mut shuffle = None;
    if let Some(last) = parts.last() {
        if let Some(seed) = last.strip_prefix("shuffle=") {
            shuffle = Some(seed.parse::<u64>().map_err(|_| bad())?);
            parts.pop();
        }
    }
    let num = |i: usize| -> Result<usize> {
        parts.get(i).and_then(|s| s.parse().ok()).ok_or_else(bad)
    };
    let g = match (parts.first().copied(), parts.len()) {
        (Some("path"), 2) => path(num(1)?),
        (Some("star"), 2) => star(num(1)?),
        (Some("grid"), 2) => {
            let (r, c) = parts[1].split_once('x').ok_or_else(bad)?;
            grid(r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?)
        }
        (Some("regular"), 4) => random_regular(num(1)?, num(2)?, num(3)? as u64),
        (Some("pa"), 4) => preferential_attachment(num(1)?, num(2)?, num(3)? as u64),
        _ => return Err(bad()),
    };
    if g.n() == 0 {
        return Err(validation(format!("generator spec {spec:?} yields an empty graph")));
    }
    match shuffle {
        Some(seed) => relabel(&g, &random_permutation(g.n(), seed)),
        None => Ok(g),
    }
}
