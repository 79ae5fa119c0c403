//! Uncoarsening: projecting a coarse arrangement to the fine level and
//! improving it with relaxation sweeps and node-by-node strict minimization.

use crate::arrangement::{cost, cost_delta_move, Arrangement};
use crate::coarsening::Partition;
use crate::error::{validation, Result};
use crate::graph::Graph;
use crate::placement::{place, place_index, NeighborSample, DEFAULT_EXACT_THRESHOLD};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineParams<T> {
    /// Maximum compatible relaxation sweeps per level.
    pub compat_sweeps: usize,
    /// Maximum Gauss-Seidel sweeps per level; zero disables the stage.
    pub gs_sweeps: usize,
    /// Half-width of the candidate window in node-by-node minimization.
    pub nn_k: usize,
    pub nn_passes: usize,
    /// A relaxation stops once a sweep improves the cost by less than this
    /// fraction.
    pub min_improvement: T,
    /// Neighborhood size up to which one-node placement is exact.
    pub exact_threshold: usize,
}

impl<T: Scalar> Default for RefineParams<T> {
    fn default() -> Self {
        RefineParams {
            compat_sweeps: 20,
            gs_sweeps: 20,
            nn_k: 5,
            nn_passes: 1,
            min_improvement: T::lit(1e-4),
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
        }
    }
}

impl<T: Scalar> RefineParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_improvement >= T::zero()) {
            return Err(validation("relaxation stop threshold must be non-negative"));
        }
        Ok(())
    }
}

/// Moves that change the cost by less than this are rejected.
const ACCEPT_EPS: f64 = 1e-12;

/// Seeds inherit the coordinate of their aggregate; each fine node is then
/// placed over its seed neighbors only, and the result is legalized. Nodes
/// with no seed neighbor go last.
pub fn initialize_fine<T: Scalar>(
    g: &Graph<T>,
    part: &Partition,
    coarse: &Arrangement<T>,
    exact_threshold: usize,
) -> Result<Arrangement<T>> {
    if part.n() != g.n() || coarse.n() != part.n_coarse() {
        return Err(validation("partition does not match the fine or coarse level"));
    }
    let mut raw = vec![T::infinity(); g.n()];
    for i in 0..g.n() {
        if let Some(c) = part.coarse_index(i) {
            raw[i] = coarse.coord(c);
        }
    }
    let mut sample = NeighborSample::new();
    for &i in part.visit_order() {
        if part.is_seed(i) {
            continue;
        }
        sample.refill(
            g.neighbors(i)
                .filter(|&(j, _)| part.is_seed(j))
                .map(|(j, w)| (raw[j], w)),
        );
        if !sample.is_empty() {
            raw[i] = place(&sample, exact_threshold);
        }
    }
    Arrangement::legalize(&raw, g.volumes())
}

/// Rank order as a doubly linked list; index `n` is the sentinel.
struct OrderList {
    prev: Vec<usize>,
    next: Vec<usize>,
}

impl OrderList {
    fn new(order: &[usize]) -> Self {
        let n = order.len();
        let mut prev = vec![n; n + 1];
        let mut next = vec![n; n + 1];
        let mut last = n;
        for &i in order {
            next[last] = i;
            prev[i] = last;
            last = i;
        }
        next[last] = n;
        prev[n] = last;
        OrderList { prev, next }
    }

    fn unlink(&mut self, i: usize) {
        let (p, q) = (self.prev[i], self.next[i]);
        self.next[p] = q;
        self.prev[q] = p;
    }

    fn link_after(&mut self, anchor: usize, i: usize) {
        let q = self.next[anchor];
        self.next[anchor] = i;
        self.prev[i] = anchor;
        self.next[i] = q;
        self.prev[q] = i;
    }

    fn order(&self) -> Vec<usize> {
        let n = self.next.len() - 1;
        let mut out = Vec::with_capacity(n);
        let mut i = self.next[n];
        while i != n {
            out.push(i);
            i = self.next[i];
        }
        out
    }
}

/// Repositions every node of `nodes` (in that order) over all of its
/// neighbors, updating coordinates in place. A moved node takes the
/// coordinate of the chosen neighbor `t` and is ranked right next to it, on
/// the side of `t` holding more of its remaining neighbor weight (the side
/// it came from on a tie); the sweep ends with the legalized order.
fn placement_sweep<T: Scalar>(
    g: &Graph<T>,
    a: &Arrangement<T>,
    nodes: impl Iterator<Item = usize>,
    exact_threshold: usize,
    sample: &mut NeighborSample<T>,
) -> Result<Arrangement<T>> {
    let mut raw = a.coords().to_vec();
    let mut list = OrderList::new(a.order());
    for i in nodes {
        if g.degree(i) == 0 {
            continue;
        }
        sample.refill(g.neighbors(i).map(|(j, w)| (raw[j], w)));
        let k = sample.source(place_index(sample, exact_threshold));
        let t = g.neighbors(i).nth(k).expect("sampled neighbor").0;
        if raw[t] == raw[i] {
            continue;
        }
        let xt = raw[t];
        let (mut left, mut right) = (T::zero(), T::zero());
        for (j, w) in g.neighbors(i) {
            if raw[j] < xt {
                left += w;
            } else if raw[j] > xt {
                right += w;
            }
        }
        let before = if left == right { raw[i] < xt } else { left > right };
        list.unlink(i);
        if before {
            list.link_after(list.prev[t], i);
        } else {
            list.link_after(t, i);
        }
        raw[i] = raw[t];
    }
    Arrangement::from_order(list.order(), g.volumes())
}

/// Runs up to `sweeps` sweeps, keeping the best arrangement seen and
/// stopping when a sweep gains less than `min_improvement` (relative).
fn relax<T: Scalar, F>(
    g: &Graph<T>,
    a: Arrangement<T>,
    sweeps: usize,
    min_improvement: T,
    mut sweep: F,
) -> Result<Arrangement<T>>
where
    F: FnMut(&Arrangement<T>) -> Result<Arrangement<T>>,
{
    let mut best = a;
    let mut best_cost = cost(g, &best)?;
    for _ in 0..sweeps {
        let next = sweep(&best)?;
        let c = cost(g, &next)?;
        let gain = best_cost - c;
        let scale = best_cost.abs().max(T::min_positive_value());
        if gain > T::zero() {
            best = next;
            best_cost = c;
        }
        if gain / scale < min_improvement {
            break;
        }
    }
    Ok(best)
}

/// Repositions fine nodes over all their neighbors while seed coordinates
/// stay fixed, so seeds keep their relative order.
pub fn compatible_relaxation<T: Scalar>(
    g: &Graph<T>,
    a: Arrangement<T>,
    part: &Partition,
    params: &RefineParams<T>,
) -> Result<Arrangement<T>> {
    let mut sample = NeighborSample::new();
    let fine: Vec<usize> = part
        .visit_order()
        .iter()
        .copied()
        .filter(|&i| !part.is_seed(i))
        .collect();
    if fine.is_empty() {
        return Ok(a);
    }
    relax(g, a, params.compat_sweeps, params.min_improvement, |cur| {
        placement_sweep(g, cur, fine.iter().copied(), params.exact_threshold, &mut sample)
    })
}

/// Visits every node in rank order and moves it to its best one-node
/// position.
pub fn gs_relaxation<T: Scalar>(
    g: &Graph<T>,
    a: Arrangement<T>,
    params: &RefineParams<T>,
) -> Result<Arrangement<T>> {
    if g.edge_count() == 0 {
        return Ok(a);
    }
    let mut sample = NeighborSample::new();
    relax(g, a, params.gs_sweeps, params.min_improvement, |cur| {
        let order = cur.order().to_vec();
        placement_sweep(g, cur, order.into_iter(), params.exact_threshold, &mut sample)
    })
}

/// Node-by-node strict minimization. Each pass visits nodes in the rank
/// order at the start of the pass and tries reinserting each at the `k`
/// ranks on either side; the best move is applied only if it lowers the
/// total cost.
pub fn nn_refinement<T: Scalar>(
    g: &Graph<T>,
    mut a: Arrangement<T>,
    k: usize,
    passes: usize,
) -> Arrangement<T> {
    let n = a.n();
    if k == 0 || n < 2 {
        return a;
    }
    let accept = -T::lit(ACCEPT_EPS);
    for _ in 0..passes {
        let mut moved = false;
        let visit = a.order().to_vec();
        for i in visit {
            let p = a.rank(i);
            let lo = p.saturating_sub(k);
            let hi = (p + k).min(n - 1);
            let mut best = (accept, p);
            for r in lo..=hi {
                if r == p {
                    continue;
                }
                let d = cost_delta_move(g, &a, i, r);
                if d < best.0 {
                    best = (d, r);
                }
            }
            if best.1 != p {
                a.move_node(i, best.1, g.volumes());
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    a
}
