//! Multiscale solver for the generalized minimum logarithmic arrangement
//! problem.
//!
//! Given a weighted graph whose nodes have positive volumes, find an ordering
//! of the nodes on a line, each occupying a segment as long as its volume,
//! that minimizes `sum w_ij lg|x_i - x_j|` over the edges, where `x` is the
//! center of a node's segment. Orderings with a small cost keep strongly
//! connected nodes close together, which is what graph compressors and cache
//! friendly layouts want.
//!
//! The solver coarsens the graph with algebraic-multigrid style aggregation
//! driven by algebraic distances, solves the coarsest graph exactly and then
//! projects the arrangement back through the levels, relaxing and refining
//! on the way.
//!
//! ```
//! use logarrange::{solve, Graph, SolverParams};
//!
//! let star = Graph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], false)?;
//! let sol = solve(&star, &SolverParams::default())?;
//! assert_eq!(sol.cost, 1.0);
//! # Ok::<(), logarrange::Error>(())
//! ```
//!
//! Every numeric type is generic over [`Scalar`] (`f64` or `f32`). The
//! aliases at the crate root fix the scalar for callers that do not care.

pub mod algebraic_distance;
pub mod arrangement;
pub mod baselines;
pub mod bench;
pub mod coarsening;
mod error;
pub mod generators;
pub mod graph;
pub mod placement;
pub mod refine;
pub mod report;
pub mod scalar;
pub mod solver;

pub use algebraic_distance::{compute_couplings, CouplingMap, CouplingParams};
pub use arrangement::{beta, cost, cost_delta_move, Arrangement};
pub use baselines::{baseline, compare, BaselineKind};
pub use coarsening::{coarsen, CoarseningParams, Interpolation, Partition};
pub use error::{Error, Result};
pub use graph::{Edge, Graph, LaplacianView, ParseOptions};
pub use placement::NeighborSample;
pub use refine::RefineParams;
pub use report::RunReport;
pub use scalar::Scalar;
pub use solver::{solve, solve_exhaustive, vcycle, Hierarchy, Preset, Solution, SolverParams};

pub type GraphF64 = Graph<f64>;
pub type GraphF32 = Graph<f32>;
pub type ArrangementF64 = Arrangement<f64>;
pub type ArrangementF32 = Arrangement<f32>;
pub type SolverParamsF64 = SolverParams<f64>;
pub type SolverParamsF32 = SolverParams<f32>;
pub type SolutionF64 = Solution<f64>;
pub type SolutionF32 = Solution<f32>;
pub type CouplingMapF64 = CouplingMap<f64>;
pub type CouplingMapF32 = CouplingMap<f32>;
