//! Node arrangements on the real line, the logarithmic arrangement cost and
//! bits per link.
//!
//! A node of volume `v` occupies a segment of length `v`; its coordinate is
//! the center of that segment. An [`Arrangement`] is always legal: segments
//! are laid out back to back in rank order starting at zero.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{contract, validation, Result};
use crate::graph::{Edge, Graph};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Arrangement<T = f64> {
    order: Vec<usize>,
    rank: Vec<usize>,
    coords: Vec<T>,
}

impl<T: Scalar> Arrangement<T> {
    /// Lays nodes out in the given rank order (`order[r]` is the node at
    /// rank `r`).
    pub fn from_order(order: Vec<usize>, volumes: &[T]) -> Result<Self> {
        let n = volumes.len();
        if order.len() != n {
            return Err(validation(format!(
                "order has {} entries for {} nodes",
                order.len(),
                n
            )));
        }
        let mut rank = vec![usize::MAX; n];
        for (r, &i) in order.iter().enumerate() {
            if i >= n {
                return Err(validation(format!("node {i} out of range")));
            }
            if rank[i] != usize::MAX {
                return Err(validation(format!("node {i} appears twice")));
            }
            rank[i] = r;
        }
        let mut a = Arrangement {
            order,
            rank,
            coords: vec![T::zero(); n],
        };
        a.recompute_coords(volumes);
        Ok(a)
    }

    pub fn identity(volumes: &[T]) -> Self {
        Self::from_order((0..volumes.len()).collect(), volumes).expect("identity is a bijection")
    }

    /// Ranks nodes by `(raw coordinate, node id)` and places each at its
    /// center of mass. Infinite coordinates are allowed and sort to the ends.
    pub fn legalize(raw: &[T], volumes: &[T]) -> Result<Self> {
        if raw.len() != volumes.len() {
            return Err(validation("one raw coordinate per node is required"));
        }
        if let Some(i) = raw.iter().position(|x| x.is_nan()) {
            return Err(validation(format!("coordinate of node {i} is NaN")));
        }
        let mut order: Vec<usize> = (0..raw.len()).collect();
        // sort_by is stable, so equal coordinates keep node-id order
        order.sort_by(|&a, &b| raw[a].partial_cmp(&raw[b]).expect("NaN rejected above"));
        Self::from_order(order, volumes)
    }

    fn recompute_coords(&mut self, volumes: &[T]) {
        let two = T::lit(2.0);
        let mut acc = T::zero();
        for (r, &i) in self.order.iter().enumerate() {
            self.rank[i] = r;
            self.coords[i] = acc + volumes[i] / two;
            acc += volumes[i];
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Nodes in rank order.
    #[inline]
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Zero-based rank of every node.
    #[inline]
    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }

    #[inline]
    pub fn rank(&self, i: usize) -> usize {
        self.rank[i]
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        self.coords[i]
    }

    pub fn reversed(&self, volumes: &[T]) -> Self {
        let order = self.order.iter().rev().copied().collect();
        Self::from_order(order, volumes).expect("reversal of a bijection")
    }

    /// Checks the center-of-mass layout against `volumes` within `tol`.
    pub fn is_legal(&self, volumes: &[T], tol: T) -> bool {
        if volumes.len() != self.n() {
            return false;
        }
        let two = T::lit(2.0);
        let mut acc = T::zero();
        for (r, &i) in self.order.iter().enumerate() {
            if self.rank[i] != r || (self.coords[i] - (acc + volumes[i] / two)).abs() > tol {
                return false;
            }
            acc += volumes[i];
        }
        true
    }

    /// Removes `node` and reinserts it at rank `target`; every node in
    /// between shifts by the node's volume.
    pub fn move_node(&mut self, node: usize, target: usize, volumes: &[T]) {
        let from = self.rank[node];
        if from == target {
            return;
        }
        let (lo, hi) = (from.min(target), from.max(target));
        let two = T::lit(2.0);
        let first = self.order[lo];
        let mut acc = self.coords[first] - volumes[first] / two;
        if from < target {
            self.order[lo..=hi].rotate_left(1);
        } else {
            self.order[lo..=hi].rotate_right(1);
        }
        for r in lo..=hi {
            let i = self.order[r];
            self.rank[i] = r;
            self.coords[i] = acc + volumes[i] / two;
            acc += volumes[i];
        }
    }

    /// Writes the original id of the node at each rank, one per line.
    pub fn write_permutation<W: Write>(&self, labels: &[u64], mut out: W) -> Result<()> {
        for &i in &self.order {
            writeln!(out, "{}", labels[i])?;
        }
        Ok(())
    }

    /// Reads a permutation file (one original node id per rank) against the
    /// graph's labels.
    pub fn read_permutation<R: BufRead>(reader: R, labels: &[u64], volumes: &[T]) -> Result<Self> {
        let index: HashMap<u64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut seen = vec![false; labels.len()];
        let mut order = Vec::with_capacity(labels.len());
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let label: u64 = body.parse().map_err(|_| crate::Error::Parse {
                line: lineno + 1,
                msg: format!("invalid node id {body:?}"),
            })?;
            let &i = index
                .get(&label)
                .ok_or_else(|| validation(format!("permutation names unknown node {label}")))?;
            if seen[i] {
                return Err(validation(format!("node {label} appears twice in permutation")));
            }
            seen[i] = true;
            order.push(i);
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(validation(format!("node {} missing from permutation", labels[i])));
        }
        Self::from_order(order, volumes)
    }
}

/// `sum w * lg|x_u - x_v|` in edge order.
#[inline]
pub(crate) fn edge_cost<T: Scalar>(edges: &[Edge<T>], coords: &[T]) -> T {
    let mut total = T::zero();
    for e in edges {
        total += e.w * (coords[e.u] - coords[e.v]).abs().lg();
    }
    total
}

/// Logarithmic arrangement cost of `a` on `g`.
pub fn cost<T: Scalar>(g: &Graph<T>, a: &Arrangement<T>) -> Result<T> {
    if a.n() != g.n() {
        return Err(contract(format!(
            "arrangement over {} nodes used with graph of {} nodes",
            a.n(),
            g.n()
        )));
    }
    Ok(edge_cost(g.edges(), a.coords()))
}

/// Bits per link: cost divided by total edge weight.
pub fn beta<T: Scalar>(g: &Graph<T>, a: &Arrangement<T>) -> Result<T> {
    let total = g.total_weight();
    if total <= T::zero() {
        return Err(validation("bits per link undefined for zero total weight"));
    }
    Ok(cost(g, a)? / total)
}

/// Exact change of [`cost`] if `node` were moved to rank `target` with
/// [`Arrangement::move_node`]. Only edges touching the moved node or the
/// shifted segment are visited.
///
/// Panics if `target >= a.n()`.
pub fn cost_delta_move<T: Scalar>(
    g: &Graph<T>,
    a: &Arrangement<T>,
    node: usize,
    target: usize,
) -> T {
    assert!(target < a.n(), "target rank {target} out of range");
    let from = a.rank(node);
    if from == target {
        return T::zero();
    }
    let vols = g.volumes();
    let two = T::lit(2.0);
    let vi = vols[node];
    let (lo, hi, shift, new_x) = if from < target {
        let last = a.order()[target];
        (from + 1, target, -vi, a.coord(last) + vols[last] / two - vi / two)
    } else {
        let first = a.order()[target];
        (target, from - 1, vi, a.coord(first) - vols[first] / two + vi / two)
    };
    let in_segment = |j: usize| {
        let r = a.rank(j);
        r >= lo && r <= hi
    };
    let moved = |j: usize| {
        if in_segment(j) {
            a.coord(j) + shift
        } else {
            a.coord(j)
        }
    };

    let mut delta = T::zero();
    let xi = a.coord(node);
    for (j, w) in g.neighbors(node) {
        delta += w * ((new_x - moved(j)).abs().lg() - (xi - a.coord(j)).abs().lg());
    }
    for &s in &a.order()[lo..=hi] {
        let xs = a.coord(s);
        for (j, w) in g.neighbors(s) {
            if j == node || in_segment(j) {
                continue;
            }
            let xj = a.coord(j);
            delta += w * ((xs + shift - xj).abs().lg() - (xs - xj).abs().lg());
        }
    }
    delta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> Graph {
        Graph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], false).unwrap()
    }

    #[test]
    fn legalize_examples() {
        let a = Arrangement::legalize(&[0.9, 0.1, 0.5], &[1.0; 3]).unwrap();
        assert_eq!(a.ranks(), &[2, 0, 1]);
        assert_eq!(a.coords(), &[2.5, 0.5, 1.5]);

        let a = Arrangement::legalize(&[0.5, 0.5], &[1.0; 2]).unwrap();
        assert_eq!(a.ranks(), &[0, 1]);
        assert_eq!(a.coords(), &[0.5, 1.5]);

        let a = Arrangement::from_order(vec![0, 1, 2], &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(a.coords(), &[0.5, 2.0, 3.5]);

        assert!(Arrangement::legalize(&[f64::NAN, 0.0], &[1.0; 2]).is_err());
        let a = Arrangement::legalize(&[f64::INFINITY, 0.0], &[1.0; 2]).unwrap();
        assert_eq!(a.order(), &[1, 0]);
    }

    #[test]
    fn from_order_rejects_non_bijection() {
        assert!(Arrangement::from_order(vec![0, 0], &[1.0; 2]).is_err());
        assert!(Arrangement::from_order(vec![0], &[1.0; 2]).is_err());
        assert!(Arrangement::from_order(vec![0, 2], &[1.0; 2]).is_err());
    }

    #[test]
    fn cost_examples() {
        let p2 = Graph::new(2, [(0, 1, 1.0)], false).unwrap();
        assert_eq!(cost(&p2, &Arrangement::identity(p2.volumes())).unwrap(), 0.0);
        assert_eq!(beta(&p2, &Arrangement::identity(p2.volumes())).unwrap(), 0.0);

        let k3 = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], false).unwrap();
        for order in [[0, 1, 2], [2, 0, 1], [1, 2, 0]] {
            let a = Arrangement::from_order(order.to_vec(), k3.volumes()).unwrap();
            assert_eq!(cost(&k3, &a).unwrap(), 1.0);
            assert_eq!(beta(&k3, &a).unwrap(), 1.0 / 3.0);
        }

        let s = star();
        let first = Arrangement::from_order(vec![0, 1, 2, 3], s.volumes()).unwrap();
        assert!((cost(&s, &first).unwrap() - 3f64.log2() - 1.0).abs() < 1e-12);
        let second = Arrangement::from_order(vec![1, 0, 2, 3], s.volumes()).unwrap();
        assert_eq!(cost(&s, &second).unwrap(), 1.0);
    }

    #[test]
    fn beta_rejects_zero_weight() {
        let g = Graph::new(2, [(0, 1, 0.0)], false).unwrap();
        assert!(beta(&g, &Arrangement::identity(g.volumes())).is_err());
    }

    #[test]
    fn cost_rejects_size_mismatch() {
        let g = star();
        let a = Arrangement::identity(&[1.0; 3]);
        assert!(matches!(cost(&g, &a), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn delta_examples() {
        let s = star();
        let a = Arrangement::identity(s.volumes());
        assert_eq!(cost_delta_move(&s, &a, 0, 0), 0.0);
        let d = cost_delta_move(&s, &a, 0, 1);
        assert!((d - (1.0 - (1.0 + 3f64.log2()))).abs() < 1e-12);
        assert!((d + 1.585).abs() < 1e-3);

        let empty: Graph = Graph::new(5, std::iter::empty(), false).unwrap();
        let a = Arrangement::identity(empty.volumes());
        for r in 0..5 {
            assert_eq!(cost_delta_move(&empty, &a, 2, r), 0.0);
        }
    }

    #[test]
    fn move_node_keeps_layout_legal() {
        let vols = [1.0, 2.0, 0.5, 3.0, 1.5];
        let mut a = Arrangement::identity(&vols);
        a.move_node(0, 3, &vols);
        assert_eq!(a.order(), &[1, 2, 3, 0, 4]);
        assert!(a.is_legal(&vols, 1e-12));
        a.move_node(4, 0, &vols);
        assert_eq!(a.order(), &[4, 1, 2, 3, 0]);
        assert!(a.is_legal(&vols, 1e-12));
    }

    #[test]
    fn permutation_file_round_trip_and_errors() {
        let labels = [10u64, 20, 30];
        let vols = [1.0; 3];
        let a = Arrangement::from_order(vec![2, 0, 1], &vols).unwrap();
        let mut buf = Vec::new();
        a.write_permutation(&labels, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "30\n10\n20\n");
        let b = Arrangement::read_permutation(&buf[..], &labels, &vols).unwrap();
        assert_eq!(a, b);

        let err = Arrangement::<f64>::read_permutation("10\n20\n".as_bytes(), &labels, &vols)
            .unwrap_err()
            .to_string();
        assert!(err.contains("30"), "{err}");
        let err = Arrangement::<f64>::read_permutation("10\n10\n20\n".as_bytes(), &labels, &vols)
            .unwrap_err()
            .to_string();
        assert!(err.contains("10") && err.contains("twice"), "{err}");
    }
}
