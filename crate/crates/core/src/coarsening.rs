//! Seed selection, interpolation and coarse graph construction.
//!
//! Nodes are visited in (roughly) descending future volume. A visited node
//! stays a fine node only if it is already strongly attached to the current
//! seed set, both in coupling strength and in edge weight; otherwise it
//! becomes a seed. Every fine node is then interpolated from its strongest
//! seed neighbors and the coarse graph is the Galerkin projection of the
//! fine Laplacian.

use crate::algebraic_distance::CouplingMap;
use crate::error::{validation, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarseningParams<T> {
    /// Minimum share of coupling strength a fine node must have towards
    /// seeds.
    pub theta_coupling: T,
    /// Minimum share of edge weight a fine node must have towards seeds.
    pub theta_weight: T,
    /// Maximum number of seeds a fine node is interpolated from.
    pub order: usize,
}

impl<T: Scalar> Default for CoarseningParams<T> {
    fn default() -> Self {
        CoarseningParams {
            theta_coupling: T::lit(0.5),
            theta_weight: T::lit(0.5),
            order: 1,
        }
    }
}

impl<T: Scalar> CoarseningParams<T> {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |t: T| t > T::zero() && t < T::one();
        if !open_unit(self.theta_coupling) || !open_unit(self.theta_weight) {
            return Err(validation("coupling thresholds theta1 and theta2 must lie in (0, 1)"));
        }
        if self.order == 0 {
            return Err(validation("interpolation order must be at least 1"));
        }
        Ok(())
    }
}

/// `FV(i) = v_i + sum_j v_j * rho_ij / sum_k rho_jk`: each neighbor donates
/// its volume in proportion to `i`'s share of the neighbor's total coupling.
pub fn future_volumes<T: Scalar>(g: &Graph<T>, rho: &CouplingMap<T>) -> Vec<T> {
    let totals = coupling_totals(g, rho);
    (0..g.n())
        .map(|i| {
            let mut fv = g.volume(i);
            for inc in g.incident(i) {
                let j = inc.node;
                if totals[j] > T::zero() {
                    fv += g.volume(j) * rho.get(inc.edge) / totals[j];
                }
            }
            fv
        })
        .collect()
}

fn coupling_totals<T: Scalar>(g: &Graph<T>, rho: &CouplingMap<T>) -> Vec<T> {
    (0..g.n())
        .map(|i| g.incident(i).iter().map(|inc| rho.get(inc.edge)).sum())
        .collect()
}

/// Nodes sorted by descending future volume, bucketed on a logarithmic
/// scale (four buckets per doubling). Within a bucket nodes keep id order.
pub fn traversal_order<T: Scalar>(fv: &[T]) -> Vec<usize> {
    if fv.is_empty() {
        return Vec::new();
    }
    let min = fv.iter().copied().fold(T::infinity(), T::min);
    let bucket_of = |x: T| -> usize {
        let b = (T::lit(4.0) * (x / min).lg()).floor();
        b.to_usize().unwrap_or(0)
    };
    let buckets = fv.iter().map(|&x| bucket_of(x)).max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; buckets + 1];
    for &x in fv {
        counts[buckets - 1 - bucket_of(x) + 1] += 1;
    }
    for b in 0..buckets {
        counts[b + 1] += counts[b];
    }
    let mut order = vec![0usize; fv.len()];
    for (i, &x) in fv.iter().enumerate() {
        let slot = &mut counts[buckets - 1 - bucket_of(x)];
        order[*slot] = i;
        *slot += 1;
    }
    order
}

/// Seed/fine split of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    is_seed: Vec<bool>,
    coarse_index: Vec<usize>,
    n_coarse: usize,
    nc_offsets: Vec<usize>,
    nc_nodes: Vec<usize>,
    visit_order: Vec<usize>,
}

impl Partition {
    #[inline]
    pub fn n(&self) -> usize {
        self.is_seed.len()
    }

    #[inline]
    pub fn is_seed(&self, i: usize) -> bool {
        self.is_seed[i]
    }

    #[inline]
    pub fn n_coarse(&self) -> usize {
        self.n_coarse
    }

    /// Coarse ordinal of a seed, `None` for fine nodes.
    #[inline]
    pub fn coarse_index(&self, i: usize) -> Option<usize> {
        self.is_seed[i].then(|| self.coarse_index[i])
    }

    /// Seeds a fine node is interpolated from, strongest first.
    #[inline]
    pub fn coarse_neighbors(&self, i: usize) -> &[usize] {
        &self.nc_nodes[self.nc_offsets[i]..self.nc_offsets[i + 1]]
    }

    /// Traversal order used during selection; later stages visit fine nodes
    /// in the same order.
    #[inline]
    pub fn visit_order(&self) -> &[usize] {
        &self.visit_order
    }

    pub fn seeds(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&i| self.is_seed[i])
    }

    fn number_seeds(&mut self) {
        let mut next = 0;
        for i in 0..self.is_seed.len() {
            if self.is_seed[i] {
                self.coarse_index[i] = next;
                next += 1;
            } else {
                self.coarse_index[i] = usize::MAX;
            }
        }
        self.n_coarse = next;
    }
}

fn threshold_pass<T: Scalar>(
    g: &Graph<T>,
    rho: &CouplingMap<T>,
    order: &[usize],
    theta_coupling: T,
    theta_weight: T,
) -> Vec<bool> {
    let rho_total = coupling_totals(g, rho);
    let w_total: Vec<T> = (0..g.n()).map(|i| g.weighted_degree(i)).collect();
    let mut rho_seed = vec![T::zero(); g.n()];
    let mut w_seed = vec![T::zero(); g.n()];
    let mut is_seed = vec![false; g.n()];
    let share = |part: T, total: T| if total > T::zero() { part / total } else { T::zero() };
    for &i in order {
        let stays_fine = share(rho_seed[i], rho_total[i]) >= theta_coupling
            && share(w_seed[i], w_total[i]) >= theta_weight;
        if stays_fine {
            continue;
        }
        is_seed[i] = true;
        for inc in g.incident(i) {
            rho_seed[inc.node] += rho.get(inc.edge);
            w_seed[inc.node] += g.edges()[inc.edge].w;
        }
    }
    is_seed
}

/// Greedy maximal independent set in traversal order. Used only when the
/// threshold rule fails to coarsen.
fn independent_pass<T: Scalar>(g: &Graph<T>, order: &[usize]) -> Vec<bool> {
    let mut is_seed = vec![false; g.n()];
    let mut covered = vec![false; g.n()];
    for &i in order {
        if covered[i] {
            continue;
        }
        is_seed[i] = true;
        covered[i] = true;
        for (j, _) in g.neighbors(i) {
            covered[j] = true;
        }
    }
    is_seed
}

/// Chooses seeds with the two threshold tests and assigns each fine node its
/// strongest seed neighbors (by coupling, then weight, then id), at most
/// `params.order` of them.
///
/// If every node ends up a seed on a graph with edges, the thresholds are
/// halved once; if that still fails a maximal independent set is used.
pub fn select_seeds<T: Scalar>(
    g: &Graph<T>,
    rho: &CouplingMap<T>,
    order: &[usize],
    params: &CoarseningParams<T>,
) -> Partition {
    let two = T::lit(2.0);
    let stalled = |s: &[bool]| g.n() > 1 && g.edge_count() > 0 && s.iter().all(|&x| x);
    let mut is_seed = threshold_pass(g, rho, order, params.theta_coupling, params.theta_weight);
    if stalled(&is_seed) {
        log::debug!("seed selection stalled, halving thresholds");
        is_seed = threshold_pass(
            g,
            rho,
            order,
            params.theta_coupling / two,
            params.theta_weight / two,
        );
    }
    if stalled(&is_seed) {
        log::debug!("seed selection stalled again, using independent set");
        is_seed = independent_pass(g, order);
    }

    let mut nc_offsets = vec![0usize; g.n() + 1];
    let mut nc_nodes = Vec::new();
    let mut cands: Vec<(T, T, usize)> = Vec::new();
    for i in 0..g.n() {
        if !is_seed[i] {
            cands.clear();
            for inc in g.incident(i) {
                if is_seed[inc.node] {
                    cands.push((rho.get(inc.edge), g.edges()[inc.edge].w, inc.node));
                }
            }
            cands.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap()
                    .then(b.1.partial_cmp(&a.1).unwrap())
                    .then(a.2.cmp(&b.2))
            });
            nc_nodes.extend(cands.iter().take(params.order).map(|c| c.2));
        }
        nc_offsets[i + 1] = nc_nodes.len();
    }

    let mut p = Partition {
        coarse_index: vec![usize::MAX; g.n()],
        is_seed,
        n_coarse: 0,
        nc_offsets,
        nc_nodes,
        visit_order: order.to_vec(),
    };
    p.number_seeds();
    p
}

/// Row-stochastic fine-to-coarse interpolation matrix in CSR form.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpolation<T> {
    n_coarse: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> Interpolation<T> {
    #[inline]
    pub fn n_fine(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn n_coarse(&self) -> usize {
        self.n_coarse
    }

    /// `(aggregate, membership)` pairs of fine node `i`.
    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Column-major copy: for each aggregate, its `(fine node, membership)`
    /// pairs in ascending node order.
    fn transpose(&self) -> (Vec<usize>, Vec<(usize, T)>) {
        let mut offsets = vec![0usize; self.n_coarse + 1];
        for &c in &self.cols {
            offsets[c + 1] += 1;
        }
        for p in 0..self.n_coarse {
            offsets[p + 1] += offsets[p];
        }
        let mut fill = offsets.clone();
        let mut entries = vec![(0usize, T::zero()); self.cols.len()];
        for i in 0..self.n_fine() {
            for (p, x) in self.row(i) {
                entries[fill[p]] = (i, x);
                fill[p] += 1;
            }
        }
        (offsets, entries)
    }
}

/// Builds `P`: seeds map to their own aggregate with weight 1; a fine node
/// maps to each seed in its coarse neighborhood with weight proportional to
/// the connecting edge. Fine nodes without any seed neighbor are promoted to
/// seeds first, which renumbers the aggregates.
pub fn build_interpolation<T: Scalar>(g: &Graph<T>, part: &mut Partition) -> Interpolation<T> {
    let mut promoted = 0;
    for i in 0..part.n() {
        if !part.is_seed[i] && part.coarse_neighbors(i).is_empty() {
            part.is_seed[i] = true;
            promoted += 1;
        }
    }
    if promoted > 0 {
        log::debug!("promoted {promoted} unattached fine node(s) to seeds");
        part.number_seeds();
    }

    let mut offsets = Vec::with_capacity(g.n() + 1);
    offsets.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut weight_to = std::collections::HashMap::new();
    for i in 0..g.n() {
        if part.is_seed[i] {
            cols.push(part.coarse_index[i]);
            vals.push(T::one());
        } else {
            let seeds = part.coarse_neighbors(i);
            weight_to.clear();
            for (j, w) in g.neighbors(i) {
                if seeds.contains(&j) {
                    *weight_to.entry(j).or_insert(T::zero()) += w;
                }
            }
            let total: T = seeds.iter().map(|j| weight_to[j]).sum();
            let uniform = T::one() / T::from_usize_lossy(seeds.len());
            for j in seeds {
                cols.push(part.coarse_index[*j]);
                vals.push(if total > T::zero() { weight_to[j] / total } else { uniform });
            }
        }
        offsets.push(cols.len());
    }
    Interpolation {
        n_coarse: part.n_coarse,
        offsets,
        cols,
        vals,
    }
}

/// Galerkin coarse graph: `w_pq = sum_{k != l} P_kp w_kl P_lq` for `p != q`
/// and `v_p = sum_j v_j P_jp`.
pub fn coarsen_graph<T: Scalar>(g: &Graph<T>, p: &Interpolation<T>) -> Result<Graph<T>> {
    if p.n_fine() != g.n() {
        return Err(validation("interpolation does not match graph size"));
    }
    let nc = p.n_coarse();
    let (offsets, members) = p.transpose();
    let mut acc = vec![T::zero(); nc];
    let mut touched: Vec<usize> = Vec::new();
    let mut edges = Vec::new();
    let mut volumes = vec![T::zero(); nc];
    for a in 0..nc {
        for &(k, pk) in &members[offsets[a]..offsets[a + 1]] {
            volumes[a] += g.volume(k) * pk;
            for (l, w) in g.neighbors(k) {
                for (b, pl) in p.row(l) {
                    if b <= a {
                        continue;
                    }
                    if acc[b] == T::zero() {
                        touched.push(b);
                    }
                    acc[b] += pk * w * pl;
                }
            }
        }
        touched.sort_unstable();
        for &b in &touched {
            edges.push((a, b, acc[b]));
            acc[b] = T::zero();
        }
        touched.clear();
    }
    Graph::new(nc, edges, false)?.with_volumes(volumes)
}

/// Seeds and interpolation of one level.
#[derive(Clone, Debug)]
pub struct Coarsening<T> {
    pub future_volumes: Vec<T>,
    pub partition: Partition,
    pub interpolation: Interpolation<T>,
}

/// One coarsening step: future volumes, seed selection, interpolation and
/// the coarse graph.
pub fn coarsen<T: Scalar>(
    g: &Graph<T>,
    rho: &CouplingMap<T>,
    params: &CoarseningParams<T>,
) -> Result<(Coarsening<T>, Graph<T>)> {
    params.validate()?;
    let fv = future_volumes(g, rho);
    let order = traversal_order(&fv);
    let mut partition = select_seeds(g, rho, &order, params);
    let interpolation = build_interpolation(g, &mut partition);
    let coarse = coarsen_graph(g, &interpolation)?;
    let step = Coarsening {
        future_volumes: fv,
        partition,
        interpolation,
    };
    Ok((step, coarse))
}
