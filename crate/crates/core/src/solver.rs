//! The multiscale V-cycle.
//!
//! The working graph is coarsened level by level until it is small enough
//! to be solved by exhaustive search. The coarsest arrangement is then
//! carried back up, each level being initialized from the coarser one and
//! improved by compatible relaxation, Gauss-Seidel relaxation and
//! node-by-node minimization.
//!
//! Nodes without incident weight are set aside at every level and appended
//! after the others in id order; they never affect the cost.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::algebraic_distance::{compute_couplings, CouplingParams};
use crate::arrangement::{beta, cost, edge_cost, Arrangement};
use crate::coarsening::{coarsen, CoarseningParams, Coarsening};
use crate::error::{contract, validation, Result};
use crate::graph::Graph;
use crate::refine::{
    compatible_relaxation, gs_relaxation, initialize_fine, nn_refinement, RefineParams,
};
use crate::scalar::Scalar;

/// Largest graph [`solve_exhaustive`] accepts.
pub const EXHAUSTIVE_MAX_NODES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Preset {
    #[default]
    Default,
    /// One test vector, five relaxation sweeps, no node-by-node pass.
    Fast,
    /// Window of 25 and 40 sweeps.
    Slow,
}

impl std::str::FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Preset::Default),
            "fast" => Ok(Preset::Fast),
            "slow" => Ok(Preset::Slow),
            other => Err(validation(format!("unknown preset {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams<T> {
    pub coarsening: CoarseningParams<T>,
    /// Coupling parameters; the seed is derived per level from `seed`.
    pub couplings: CouplingParams<T>,
    pub refine: RefineParams<T>,
    /// Graphs with at most this many nodes are solved exhaustively.
    pub coarsest_size: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for SolverParams<T> {
    fn default() -> Self {
        Self::preset(Preset::Default)
    }
}

impl<T: Scalar> SolverParams<T> {
    pub fn preset(preset: Preset) -> Self {
        let mut p = SolverParams {
            coarsening: CoarseningParams::default(),
            couplings: CouplingParams::default(),
            refine: RefineParams::default(),
            coarsest_size: 9,
            seed: 0,
        };
        match preset {
            Preset::Default => {}
            Preset::Fast => {
                p.couplings.vectors = 1;
                p.refine.compat_sweeps = 5;
                p.refine.gs_sweeps = 5;
                p.refine.nn_k = 0;
            }
            Preset::Slow => {
                p.refine.compat_sweeps = 40;
                p.refine.gs_sweeps = 40;
                p.refine.nn_k = 25;
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        self.coarsening.validate()?;
        self.refine.validate()?;
        let omega = self.couplings.omega;
        if !(omega >= T::zero() && omega <= T::one()) {
            return Err(validation("omega must lie in [0, 1]"));
        }
        if self.couplings.vectors == 0 || self.couplings.iterations == 0 {
            return Err(validation("at least one test vector and one JOR iteration are required"));
        }
        if self.coarsest_size < 2 || self.coarsest_size > EXHAUSTIVE_MAX_NODES {
            return Err(validation(format!(
                "coarsest size must lie in [2, {EXHAUSTIVE_MAX_NODES}]"
            )));
        }
        Ok(())
    }

    /// Coupling parameters for hierarchy level `level`.
    pub fn coupling_params(&self, level: usize) -> CouplingParams<T> {
        CouplingParams {
            seed: self
                .seed
                .wrapping_add((level as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..self.couplings
        }
    }
}

/// Exact minimum over all orderings of a small graph.
///
/// Among orderings of equal cost the lexicographically smallest one is
/// returned. Only orderings with node 0 ahead of node 1 are enumerated;
/// reversal preserves cost, so the mirrored half is recovered from the
/// candidates. When every volume is at least 1 all log terms are
/// non-negative and partial costs, seeded by a local-search bound, prune
/// the search.
pub fn solve_exhaustive<T: Scalar>(g: &Graph<T>) -> Result<Arrangement<T>> {
    let n = g.n();
    if n > EXHAUSTIVE_MAX_NODES {
        return Err(contract(format!(
            "exhaustive search limited to {EXHAUSTIVE_MAX_NODES} nodes, got {n}"
        )));
    }
    if n <= 1 || g.edge_count() == 0 {
        return Ok(Arrangement::identity(g.volumes()));
    }
    let prune = g.volumes().iter().all(|&v| v >= T::one());
    let mut search = Search {
        g,
        prune,
        order: vec![0; n],
        coords: vec![T::zero(); n],
        used: vec![false; n],
        min_volume: g.volumes().iter().copied().fold(T::infinity(), T::min),
        scratch: Vec::new(),
        best: T::infinity(),
        candidates: Vec::new(),
    };
    if prune {
        let start = nn_refinement(g, Arrangement::identity(g.volumes()), n, n);
        search.best = edge_cost(g.edges(), start.coords());
    }
    search.dfs(0, T::zero(), T::zero());

    // Partial sums accumulate in a different order than `cost`; re-score the
    // near-optimal orderings exactly.
    let mut orders: Vec<Vec<usize>> = Vec::with_capacity(2 * search.candidates.len());
    for &(_, packed) in &search.candidates {
        let order = unpack(packed, n);
        orders.push(order.iter().rev().copied().collect());
        orders.push(order);
    }
    orders.sort_unstable();
    let mut best: Option<(T, Arrangement<T>)> = None;
    for order in orders {
        let a = Arrangement::from_order(order, g.volumes())?;
        let c = edge_cost(g.edges(), a.coords());
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, a));
        }
    }
    Ok(best.expect("at least one ordering").1)
}

/// The placed-to-unplaced bound is skipped for subtrees this small.
const BOUND_MIN_REMAINING: usize = 3;

struct Search<'g, T> {
    g: &'g Graph<T>,
    prune: bool,
    order: Vec<usize>,
    coords: Vec<T>,
    used: Vec<bool>,
    min_volume: T,
    scratch: Vec<T>,
    best: T,
    candidates: Vec<(T, u64)>,
}

impl<T: Scalar> Search<'_, T> {
    fn slack(&self) -> T {
        T::lit(1e-9) * (T::one() + self.best.abs())
    }

    /// Lower bound on the edges between placed and unplaced nodes once the
    /// prefix ends at `end`. The unplaced neighbors of a placed node sit in
    /// distinct slots, so the heaviest can be charged the nearest. Valid
    /// only when every volume is at least 1.
    fn pending(&self, end: T, weights: &mut Vec<T>) -> T {
        let half = self.min_volume / T::lit(2.0);
        let mut bound = T::zero();
        for p in (0..self.g.n()).filter(|&p| self.used[p]) {
            weights.clear();
            weights.extend(self.g.neighbors(p).filter(|&(u, _)| !self.used[u]).map(|e| e.1));
            weights.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite weights"));
            let mut reach = end - self.coords[p] + half;
            for &w in weights.iter() {
                bound += w * reach.lg();
                reach += self.min_volume;
            }
        }
        bound
    }

    fn dfs(&mut self, depth: usize, offset: T, partial: T) {
        let n = self.g.n();
        if depth == n {
            if partial < self.best {
                self.best = partial;
                let limit = self.best + self.slack();
                self.candidates.retain(|c| c.0 <= limit);
            }
            if partial <= self.best + self.slack() {
                self.candidates.push((partial, pack(&self.order)));
            }
            return;
        }
        let two = T::lit(2.0);
        for i in 0..n {
            if self.used[i] || (i == 1 && !self.used[0]) {
                continue;
            }
            let x = offset + self.g.volume(i) / two;
            let mut add = T::zero();
            for (j, w) in self.g.neighbors(i) {
                if self.used[j] {
                    add += w * (x - self.coords[j]).abs().lg();
                }
            }
            let next = partial + add;
            if self.prune && self.best.is_finite() {
                if next > self.best + self.slack() {
                    continue;
                }
            }
            if self.prune && self.best.is_finite() && n - depth > BOUND_MIN_REMAINING {
                self.used[i] = true;
                self.coords[i] = x;
                let mut scratch = std::mem::take(&mut self.scratch);
                let bound = next + self.pending(offset + self.g.volume(i), &mut scratch);
                self.scratch = scratch;
                self.used[i] = false;
                if bound > self.best + self.slack() {
                    continue;
                }
            }
            self.used[i] = true;
            self.coords[i] = x;
            self.order[depth] = i;
            self.dfs(depth + 1, offset + self.g.volume(i), next);
            self.used[i] = false;
        }
    }
}

fn pack(order: &[usize]) -> u64 {
    order.iter().rev().fold(0u64, |acc, &i| (acc << 4) | i as u64)
}

fn unpack(mut packed: u64, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let i = (packed & 0xF) as usize;
            packed >>= 4;
            i
        })
        .collect()
}

/// A graph with its zero-degree nodes set aside.
#[derive(Clone, Debug)]
pub struct Stripped<T> {
    pub graph: Graph<T>,
    /// Indices of the kept nodes in the original graph, ascending; `None`
    /// when nothing was removed.
    active: Option<Vec<usize>>,
    original_volumes: Vec<T>,
}

impl<T: Scalar> Stripped<T> {
    fn whole(graph: Graph<T>) -> Self {
        Stripped {
            graph,
            active: None,
            original_volumes: Vec::new(),
        }
    }

    fn strip(graph: Graph<T>) -> Result<Self> {
        let active: Vec<usize> = (0..graph.n()).filter(|&i| graph.degree(i) > 0).collect();
        if active.len() == graph.n() {
            return Ok(Self::whole(graph));
        }
        Ok(Stripped {
            graph: graph.induced(&active)?,
            original_volumes: graph.volumes().to_vec(),
            active: Some(active),
        })
    }

    /// Total volume before removal.
    pub fn input_volume(&self) -> T {
        if self.active.is_none() {
            return self.graph.total_volume();
        }
        self.original_volumes.iter().copied().sum()
    }

    pub fn removed(&self) -> usize {
        self.active
            .as_ref()
            .map_or(0, |a| self.original_volumes.len() - a.len())
    }

    /// Maps an arrangement of the kept nodes back to the original graph,
    /// appending the removed nodes in id order.
    fn lift(&self, a: Arrangement<T>) -> Result<Arrangement<T>> {
        let Some(active) = &self.active else {
            return Ok(a);
        };
        let n = self.original_volumes.len();
        let mut kept = vec![false; n];
        let mut order: Vec<usize> = a.order().iter().map(|&k| active[k]).collect();
        for &i in &order {
            kept[i] = true;
        }
        order.extend((0..n).filter(|&i| !kept[i]));
        Arrangement::from_order(order, &self.original_volumes)
    }
}

/// One coarsening step of the hierarchy.
#[derive(Clone, Debug)]
pub struct Level<T> {
    pub fine: Stripped<T>,
    pub step: Coarsening<T>,
}

#[derive(Clone, Debug)]
pub struct Hierarchy<T> {
    pub levels: Vec<Level<T>>,
    pub coarsest: Stripped<T>,
}

impl<T: Scalar> Hierarchy<T> {
    /// Coarsens an undirected graph until at most `coarsest_size` nodes
    /// remain.
    pub fn build(g: Graph<T>, params: &SolverParams<T>) -> Result<Self> {
        if g.is_directed() {
            return Err(contract("hierarchy requires an undirected graph"));
        }
        let mut levels = Vec::new();
        let mut input = g;
        let coarsest = loop {
            if input.n() <= params.coarsest_size {
                break Stripped::whole(input);
            }
            let fine = Stripped::strip(input)?;
            if fine.graph.n() <= params.coarsest_size {
                break fine;
            }
            let rho = compute_couplings(&fine.graph, &params.coupling_params(levels.len()))?;
            let (step, coarse) = coarsen(&fine.graph, &rho, &params.coarsening)?;
            log::debug!(
                "level {}: {} nodes, {} edges -> {} nodes, {} edges",
                levels.len(),
                fine.graph.n(),
                fine.graph.edge_count(),
                coarse.n(),
                coarse.edge_count()
            );
            levels.push(Level { fine, step });
            input = coarse;
        };
        Ok(Hierarchy { levels, coarsest })
    }

    /// Node counts from the finest level to the coarsest.
    pub fn sizes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| l.fine.graph.n())
            .chain(std::iter::once(self.coarsest.graph.n()))
            .collect()
    }
}

/// Cost after each uncoarsening stage on one level.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LevelTrace {
    pub level: usize,
    pub nodes: usize,
    pub edges: usize,
    pub total_volume: f64,
    pub total_weight: f64,
    pub cost_initial: f64,
    pub cost_compatible: f64,
    pub cost_gauss_seidel: f64,
    pub cost_refined: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageTimes {
    pub coarsen: Duration,
    pub coarsest: Duration,
    pub initialize: Duration,
    pub relax: Duration,
    pub refine: Duration,
}

impl StageTimes {
    pub fn total(&self) -> Duration {
        self.coarsen + self.coarsest + self.initialize + self.relax + self.refine
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveTrace {
    /// Node counts per level, finest first.
    pub level_sizes: Vec<usize>,
    /// Finest level first.
    pub levels: Vec<LevelTrace>,
    pub times: StageTimes,
}

/// One V-cycle on an undirected graph.
pub fn vcycle<T: Scalar>(g: &Graph<T>, params: &SolverParams<T>) -> Result<Arrangement<T>> {
    vcycle_traced(g, params).map(|(a, _)| a)
}

pub fn vcycle_traced<T: Scalar>(
    g: &Graph<T>,
    params: &SolverParams<T>,
) -> Result<(Arrangement<T>, SolveTrace)> {
    vcycle_owned(g.clone(), params)
}

fn vcycle_owned<T: Scalar>(
    g: Graph<T>,
    params: &SolverParams<T>,
) -> Result<(Arrangement<T>, SolveTrace)> {
    params.validate()?;
    if g.is_directed() {
        return Err(contract("vcycle requires an undirected graph"));
    }
    let mut trace = SolveTrace::default();
    let clock = Instant::now();
    let hierarchy = Hierarchy::build(g, params)?;
    trace.times.coarsen = clock.elapsed();
    trace.level_sizes = hierarchy.sizes();

    let clock = Instant::now();
    let coarsest = &hierarchy.coarsest;
    let mut a = coarsest.lift(solve_exhaustive(&coarsest.graph)?)?;
    trace.times.coarsest = clock.elapsed();

    let rp = &params.refine;
    for (depth, level) in hierarchy.levels.iter().enumerate().rev() {
        let fg = &level.fine.graph;
        let part = &level.step.partition;
        let mut lt = LevelTrace {
            level: depth,
            nodes: fg.n(),
            edges: fg.edge_count(),
            total_volume: fg.total_volume().as_f64(),
            total_weight: fg.total_weight().as_f64(),
            ..LevelTrace::default()
        };

        let clock = Instant::now();
        let init = initialize_fine(fg, part, &a, rp.exact_threshold)?;
        trace.times.initialize += clock.elapsed();
        lt.cost_initial = cost(fg, &init)?.as_f64();

        let clock = Instant::now();
        let relaxed = compatible_relaxation(fg, init, part, rp)?;
        lt.cost_compatible = cost(fg, &relaxed)?.as_f64();
        let relaxed = gs_relaxation(fg, relaxed, rp)?;
        trace.times.relax += clock.elapsed();
        lt.cost_gauss_seidel = cost(fg, &relaxed)?.as_f64();

        let clock = Instant::now();
        let refined = nn_refinement(fg, relaxed, rp.nn_k, rp.nn_passes);
        trace.times.refine += clock.elapsed();
        lt.cost_refined = cost(fg, &refined)?.as_f64();

        log::debug!(
            "level {depth}: init {:.6} compat {:.6} gs {:.6} nn {:.6}",
            lt.cost_initial,
            lt.cost_compatible,
            lt.cost_gauss_seidel,
            lt.cost_refined
        );
        trace.levels.push(lt);
        a = level.fine.lift(refined)?;
    }
    trace.levels.reverse();
    Ok((a, trace))
}

/// Result of [`solve`]: the arrangement indexes the input graph's nodes and
/// the cost is measured on the input graph.
#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub arrangement: Arrangement<T>,
    pub cost: T,
    /// `None` when the graph has no edge weight.
    pub beta: Option<T>,
    pub trace: SolveTrace,
}

/// Solves any parsed graph: directed input is first accumulated into its
/// undirected form.
pub fn solve<T: Scalar>(g: &Graph<T>, params: &SolverParams<T>) -> Result<Solution<T>> {
    let work = g.un().without_zero_weights();
    let (arrangement, trace) = vcycle_owned(work, params)?;
    let c = cost(g, &arrangement)?;
    let b = if g.total_weight() > T::zero() {
        Some(beta(g, &arrangement)?)
    } else {
        None
    };
    Ok(Solution {
        arrangement,
        cost: c,
        beta: b,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0)), false).unwrap()
    }

    #[test]
    fn exhaustive_examples() {
        let p4 = path(4);
        let a = solve_exhaustive(&p4).unwrap();
        assert_eq!(cost(&p4, &a).unwrap(), 0.0);
        assert_eq!(a.order(), &[0, 1, 2, 3]);

        let star = Graph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], false).unwrap();
        let a = solve_exhaustive(&star).unwrap();
        assert_eq!(cost(&star, &a).unwrap(), 1.0);
        assert_eq!(a.order(), &[1, 0, 2, 3]);

        let k3 = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], false).unwrap();
        assert_eq!(cost(&k3, &solve_exhaustive(&k3).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn exhaustive_without_pruning() {
        let g = path(5).with_volumes(vec![0.5, 0.25, 2.0, 0.5, 0.1]).unwrap();
        let a = solve_exhaustive(&g).unwrap();
        let best = cost(&g, &a).unwrap();
        let mut order: Vec<usize> = (0..5).collect();
        let mut min = f64::INFINITY;
        permute(&mut order, 0, &mut |o| {
            let c = cost(&g, &Arrangement::from_order(o.to_vec(), g.volumes()).unwrap()).unwrap();
            min = min.min(c);
        });
        assert_eq!(best, min);
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn exhaustive_rejects_large_graphs() {
        assert!(matches!(
            solve_exhaustive(&path(11)),
            Err(crate::Error::Contract(_))
        ));
    }

    #[test]
    fn pack_round_trip() {
        let o = vec![9, 0, 3, 7, 1, 2, 8, 4, 6, 5];
        assert_eq!(unpack(pack(&o), 10), o);
    }

    #[test]
    fn small_graph_is_base_case() {
        let star = Graph::new(5, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], false).unwrap();
        let params = SolverParams::default();
        assert_eq!(
            vcycle(&star, &params).unwrap(),
            solve_exhaustive(&star).unwrap()
        );
    }

    #[test]
    fn presets() {
        let fast = SolverParams::<f64>::preset(Preset::Fast);
        assert_eq!((fast.couplings.vectors, fast.refine.nn_k, fast.refine.compat_sweeps), (1, 0, 5));
        let slow = SolverParams::<f64>::preset(Preset::Slow);
        assert_eq!((slow.refine.nn_k, slow.refine.gs_sweeps), (25, 40));
        let d = SolverParams::<f64>::default();
        assert_eq!(d.coarsening.theta_coupling, 0.5);
        assert_eq!(d.couplings.omega, 0.5);
        assert_eq!((d.couplings.vectors, d.couplings.iterations), (5, 20));
        assert_eq!((d.refine.nn_k, d.coarsening.order, d.coarsest_size), (5, 1, 9));
        assert!("slow".parse::<Preset>().is_ok());
        assert!("turbo".parse::<Preset>().is_err());
    }

    #[test]
    fn isolated_nodes_go_last() {
        let mut edges: Vec<(usize, usize, f64)> = (1..30).map(|i| (i, i + 1, 1.0)).collect();
        edges.push((31, 32, 1.0));
        let g = Graph::new(34, edges, false).unwrap();
        let sol = solve(&g, &SolverParams::default()).unwrap();
        let order = sol.arrangement.order();
        assert_eq!(&order[32..], &[0, 33]);
    }

    #[test]
    fn path_beats_random() {
        let g = path(100);
        let sol = solve(&g, &SolverParams::default()).unwrap();
        let random = crate::baselines::baseline(&g, crate::baselines::BaselineKind::Random(0));
        assert!(sol.cost <= cost(&g, &random).unwrap());
        assert!(sol.arrangement.is_legal(g.volumes(), 1e-9));
    }
}
