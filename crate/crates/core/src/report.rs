//! Run reports: flat `key=value` lines with an optional JSON rendering.
//!
//! Keys appear in a fixed order. Timing keys all start with `time_` so that
//! golden comparisons can skip them.

use std::fmt::Write as _;

use serde::Serialize;

use crate::graph::Graph;
use crate::scalar::Scalar;
use crate::solver::{Solution, SolverParams};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamsEcho {
    pub theta1: f64,
    pub theta2: f64,
    pub omega: f64,
    pub test_vectors: usize,
    pub jor_iterations: usize,
    pub order: usize,
    pub nn_k: usize,
    pub nn_passes: usize,
    pub compat_sweeps: usize,
    pub gs_sweeps: usize,
    pub exact_threshold: usize,
    pub coarsest: usize,
}

impl ParamsEcho {
    pub fn new<T: Scalar>(p: &SolverParams<T>) -> Self {
        ParamsEcho {
            theta1: p.coarsening.theta_coupling.as_f64(),
            theta2: p.coarsening.theta_weight.as_f64(),
            omega: p.couplings.omega.as_f64(),
            test_vectors: p.couplings.vectors,
            jor_iterations: p.couplings.iterations,
            order: p.coarsening.order,
            nn_k: p.refine.nn_k,
            nn_passes: p.refine.nn_passes,
            compat_sweeps: p.refine.compat_sweeps,
            gs_sweeps: p.refine.gs_sweeps,
            exact_threshold: p.refine.exact_threshold,
            coarsest: p.coarsest_size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timings {
    pub coarsen: f64,
    pub coarsest: f64,
    pub initialize: f64,
    pub relax: f64,
    pub refine: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub name: String,
    pub nodes: usize,
    pub edges: usize,
    pub total_weight: f64,
    pub directed: bool,
    pub seed: u64,
    pub params: ParamsEcho,
    pub cost: f64,
    pub beta: Option<f64>,
    pub level_sizes: Vec<usize>,
    /// Seconds per stage.
    pub time: Timings,
}

impl RunReport {
    pub fn new<T: Scalar>(
        name: &str,
        g: &Graph<T>,
        params: &SolverParams<T>,
        sol: &Solution<T>,
    ) -> Self {
        let t = &sol.trace.times;
        RunReport {
            name: name.to_string(),
            nodes: g.n(),
            edges: g.edge_count(),
            total_weight: g.total_weight().as_f64(),
            directed: g.is_directed(),
            seed: params.seed,
            params: ParamsEcho::new(params),
            cost: sol.cost.as_f64(),
            beta: sol.beta.map(Scalar::as_f64),
            level_sizes: sol.trace.level_sizes.clone(),
            time: Timings {
                coarsen: t.coarsen.as_secs_f64(),
                coarsest: t.coarsest.as_secs_f64(),
                initialize: t.initialize.as_secs_f64(),
                relax: t.relax.as_secs_f64(),
                refine: t.refine.as_secs_f64(),
                total: t.total().as_secs_f64(),
            },
        }
    }

    pub fn to_key_values(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            writeln!(s, "{k}={v}").expect("write to string");
        };
        kv("name", &self.name);
        kv("nodes", &self.nodes);
        kv("edges", &self.edges);
        kv("total_weight", &self.total_weight);
        kv("directed", &self.directed);
        kv("seed", &self.seed);
        kv("theta1", &p.theta1);
        kv("theta2", &p.theta2);
        kv("omega", &p.omega);
        kv("test_vectors", &p.test_vectors);
        kv("jor_iterations", &p.jor_iterations);
        kv("order", &p.order);
        kv("nn_k", &p.nn_k);
        kv("nn_passes", &p.nn_passes);
        kv("compat_sweeps", &p.compat_sweeps);
        kv("gs_sweeps", &p.gs_sweeps);
        kv("exact_threshold", &p.exact_threshold);
        kv("coarsest", &p.coarsest);
        kv("cost", &self.cost);
        match self.beta {
            Some(b) => kv("beta", &b),
            None => kv("beta", &"undefined"),
        }
        let sizes: Vec<String> = self.level_sizes.iter().map(|n| n.to_string()).collect();
        kv("level_sizes", &sizes.join(","));
        kv("time_coarsen", &self.time.coarsen);
        kv("time_coarsest", &self.time.coarsest);
        kv("time_initialize", &self.time.initialize);
        kv("time_relax", &self.time.relax);
        kv("time_refine", &self.time.refine);
        kv("time_total", &self.time.total);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Parses `key=value` lines, ignoring blank lines.
pub fn parse_key_values(text: &str) -> Vec<(&str, &str)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve;

    #[test]
    fn star_report() {
        let g = Graph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], false).unwrap();
        let params = SolverParams::default();
        let sol = solve(&g, &params).unwrap();
        let r = RunReport::new("star", &g, &params, &sol);
        let text = r.to_key_values();
        let kv = parse_key_values(&text);
        let get = |k: &str| kv.iter().find(|(key, _)| *key == k).unwrap().1;
        assert_eq!(get("cost"), "1");
        assert_eq!(get("beta").parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(get("level_sizes"), "4");
        assert_eq!(kv.first().unwrap(), &("name", "star"));
        assert!(kv.iter().skip_while(|(k, _)| !k.starts_with("time_")).all(|(k, _)| k.starts_with("time_")));
        assert!(r.time.total >= 0.0);

        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["cost"], 1.0);
        assert_eq!(json["params"]["nn_k"], 5);
    }
}
