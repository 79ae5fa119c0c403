//! Benchmark suites: manifest parsing, per-graph runs against the baselines,
//! the time-versus-size regression and the one-node placement error
//! experiment.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrangement::Arrangement;
use crate::baselines::{baseline, compare, BaselineKind};
use crate::error::{validation, Error, Result};
use crate::generators;
use crate::graph::{Graph, ParseOptions};
use crate::placement::{place_density_index, place_exact_index, NeighborSample};
use crate::scalar::Scalar;
use crate::solver::{solve, SolverParams};

/// One manifest line: `name path directed beta-lo beta-hi`. The bounds may
/// be `-` for entries without an expectation.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub name: String,
    /// File path or generator spec.
    pub source: String,
    pub directed: bool,
    pub expected_beta: Option<(f64, f64)>,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s {
        "directed" | "true" | "1" | "yes" => Some(true),
        "undirected" | "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

pub fn parse_manifest<R: BufRead>(reader: R) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = text.split_whitespace().collect();
        if f.len() != 3 && f.len() != 5 {
            return Err(err("expected `name path directed [beta-lo beta-hi]`"));
        }
        let directed = parse_flag(f[2]).ok_or_else(|| err("directed flag must be true/false"))?;
        let expected_beta = match f.get(3..5) {
            Some(["-", "-"]) | None => None,
            Some([lo, hi]) => {
                let lo: f64 = lo.parse().map_err(|_| err("bad beta lower bound"))?;
                let hi: f64 = hi.parse().map_err(|_| err("bad beta upper bound"))?;
                if !(lo <= hi) {
                    return Err(err("beta bounds out of order"));
                }
                Some((lo, hi))
            }
            Some(_) => unreachable!(),
        };
        entries.push(ManifestEntry {
            name: f[0].to_string(),
            source: f[1].to_string(),
            directed,
            expected_beta,
        });
    }
    Ok(entries)
}

/// Relative file paths are resolved against `base`.
pub fn resolve_source(source: &str, base: Option<&Path>) -> PathBuf {
    let p = PathBuf::from(source);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    }
}

/// Loads an unweighted edge list or builds a generated graph.
pub fn load_graph<T: Scalar>(source: &str, directed: bool, base: Option<&Path>) -> Result<Graph<T>> {
    if generators::is_spec(source) {
        return generators::from_spec(source);
    }
    let file = File::open(resolve_source(source, base))?;
    Graph::parse_edge_list(
        BufReader::new(file),
        ParseOptions {
            weighted: false,
            directed,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchEntry {
    pub name: String,
    /// `None` when the graph ran; otherwise why it was skipped.
    pub skipped: Option<String>,
    pub nodes: usize,
    pub edges: usize,
    pub beta: Option<f64>,
    pub beta_natural: Option<f64>,
    pub beta_random: Option<f64>,
    /// Solver cost over the smaller baseline cost.
    pub ratio: Option<f64>,
    /// Fastest wall time over the repeats, in seconds.
    pub seconds: f64,
    pub expected_beta: Option<(f64, f64)>,
    /// One-node placement comparisons on the solver's arrangement.
    #[serde(skip)]
    pub placement: Vec<PlacementError>,
}

impl BenchEntry {
    fn skipped(e: &ManifestEntry, why: String) -> Self {
        BenchEntry {
            name: e.name.clone(),
            skipped: Some(why),
            nodes: 0,
            edges: 0,
            beta: None,
            beta_natural: None,
            beta_random: None,
            ratio: None,
            seconds: 0.0,
            expected_beta: e.expected_beta,
            placement: Vec::new(),
        }
    }

    /// Whether the entry ran and satisfies its expected range, if any.
    pub fn passed(&self) -> bool {
        match (self.expected_beta, self.beta) {
            (None, _) => self.skipped.is_none(),
            (Some((lo, hi)), Some(b)) => lo <= b && b <= hi,
            (Some(_), None) => false,
        }
    }

    pub fn dominates_baselines(&self) -> bool {
        matches!(
            (self.beta, self.beta_natural, self.beta_random),
            (Some(b), Some(n), Some(r)) if b <= n.min(r)
        )
    }

    /// `|V| + |E|`.
    pub fn size(&self) -> usize {
        self.nodes + self.edges
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions<T> {
    pub params: SolverParams<T>,
    pub repeat: usize,
    /// Worker threads; 1 runs entries one after another.
    pub jobs: usize,
    pub base_dir: Option<PathBuf>,
    /// Nodes per graph for the placement error experiment; zero skips it.
    pub error_samples: usize,
}

impl<T: Scalar> Default for BenchOptions<T> {
    fn default() -> Self {
        BenchOptions {
            params: SolverParams::default(),
            repeat: 1,
            jobs: 1,
            base_dir: None,
            error_samples: 0,
        }
    }
}

pub fn run_entry<T: Scalar>(e: &ManifestEntry, opts: &BenchOptions<T>) -> BenchEntry {
    let g = match load_graph::<T>(&e.source, e.directed, opts.base_dir.as_deref()) {
        Ok(g) => g,
        Err(err) => return BenchEntry::skipped(e, err.to_string()),
    };
    match measure(e, &g, opts) {
        Ok(b) => b,
        Err(err) => BenchEntry::skipped(e, err.to_string()),
    }
}

fn measure<T: Scalar>(e: &ManifestEntry, g: &Graph<T>, opts: &BenchOptions<T>) -> Result<BenchEntry> {
    let mut best = f64::INFINITY;
    let mut sol = None;
    for _ in 0..opts.repeat.max(1) {
        let clock = Instant::now();
        let s = solve(g, &opts.params)?;
        best = best.min(clock.elapsed().as_secs_f64());
        sol = Some(s);
    }
    let sol = sol.expect("at least one repeat");
    let natural = baseline(g, BaselineKind::Natural);
    let random = baseline(g, BaselineKind::Random(opts.params.seed));
    let cmp = compare(
        g,
        &[
            ("solver", &sol.arrangement),
            ("natural", &natural),
            ("random", &random),
        ],
    )?;
    let placement = if opts.error_samples > 0 {
        let work = g.un().without_zero_weights();
        placement_errors(&work, &sol.arrangement, opts.error_samples, opts.params.seed)
    } else {
        Vec::new()
    };
    log::info!("{}: beta {:?} in {best:.3}s", e.name, cmp.entries[0].beta);
    Ok(BenchEntry {
        name: e.name.clone(),
        skipped: None,
        nodes: g.n(),
        edges: g.edge_count(),
        beta: cmp.entries[0].beta,
        beta_natural: cmp.entries[1].beta,
        beta_random: cmp.entries[2].beta,
        ratio: cmp.ratio,
        seconds: best,
        expected_beta: e.expected_beta,
        placement,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    /// Sorted by name.
    pub entries: Vec<BenchEntry>,
    /// Slope of `log(seconds)` against `log(|V| + |E|)`.
    pub slope: Option<f64>,
    /// Placement errors pooled over all entries.
    pub placement: Option<ErrorSummary>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(BenchEntry::passed)
    }

    pub fn to_text(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| v.to_string());
        let mut s = String::new();
        for e in &self.entries {
            let expected = e
                .expected_beta
                .map_or("-".to_string(), |(lo, hi)| format!("{lo},{hi}"));
            match &e.skipped {
                Some(why) => s.push_str(&format!(
                    "entry name={} status=skipped expected={} pass={} reason={:?}\n",
                    e.name,
                    expected,
                    e.passed(),
                    why
                )),
                None => s.push_str(&format!(
                    "entry name={} status=ok nodes={} edges={} beta={} beta_natural={} beta_random={} ratio={} expected={} pass={} time_seconds={}\n",
                    e.name,
                    e.nodes,
                    e.edges,
                    opt(e.beta),
                    opt(e.beta_natural),
                    opt(e.beta_random),
                    opt(e.ratio),
                    expected,
                    e.passed(),
                    e.seconds
                )),
            }
        }
        s.push_str(&format!("slope={}\n", opt(self.slope)));
        if let Some(p) = &self.placement {
            for line in p.to_text().lines() {
                s.push_str(&format!("placement_{line}\n"));
            }
        }
        s
    }
}

pub fn run_suite<T: Scalar>(entries: &[ManifestEntry], opts: &BenchOptions<T>) -> Result<SuiteReport> {
    let mut results: Vec<BenchEntry> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| validation(format!("cannot start workers: {e}")))?;
        pool.install(|| entries.par_iter().map(|e| run_entry(e, opts)).collect())
    } else {
        entries.iter().map(|e| run_entry(e, opts)).collect()
    };
    results.sort_by(|a, b| a.name.cmp(&b.name));
    let points: Vec<(f64, f64)> = results
        .iter()
        .filter(|e| e.skipped.is_none() && e.seconds > 0.0)
        .map(|e| (e.size() as f64, e.seconds))
        .collect();
    let pooled: Vec<PlacementError> = results.iter().flat_map(|e| e.placement.iter().copied()).collect();
    Ok(SuiteReport {
        slope: loglog_slope(&points),
        placement: (opts.error_samples > 0).then(|| ErrorSummary::new(&pooled, ERROR_TOLERANCE)),
        entries: results,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct sizes.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One node's neighborhood scored by both placement rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlacementError {
    pub node: usize,
    pub degree: usize,
    /// Energy at the exact minimizer.
    pub exact: f64,
    /// Energy at the density peak.
    pub approx: f64,
}

impl PlacementError {
    pub fn error(&self) -> f64 {
        self.approx - self.exact
    }
}

/// Compares density placement with the exact rule on the neighborhoods of up
/// to `samples` random nodes of degree at least two, using the coordinates
/// of `a`. Results are in node order.
pub fn placement_errors<T: Scalar>(
    g: &Graph<T>,
    a: &Arrangement<T>,
    samples: usize,
    seed: u64,
) -> Vec<PlacementError> {
    let mut nodes: Vec<usize> = (0..g.n()).filter(|&i| g.degree(i) >= 2).collect();
    if nodes.len() > samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..samples {
            let j = rng.gen_range(k..nodes.len());
            nodes.swap(k, j);
        }
        nodes.truncate(samples);
        nodes.sort_unstable();
    }
    let mut sample = NeighborSample::new();
    nodes
        .into_iter()
        .map(|i| {
            sample.refill(g.neighbors(i).map(|(j, w)| (a.coord(j), w)));
            let exact = sample.energy_at(place_exact_index(&sample));
            let approx = sample.energy_at(place_density_index(&sample));
            PlacementError {
                node: i,
                degree: sample.len(),
                exact: exact.as_f64(),
                approx: approx.as_f64(),
            }
        })
        .collect()
}

/// Relative error bound used when summarizing placement errors.
pub const ERROR_TOLERANCE: f64 = 0.05;

/// Summary of a placement error experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub samples: usize,
    pub negative: usize,
    pub zero: usize,
    /// Count with error at most `tolerance * (|exact| + 1)`.
    pub within: usize,
    pub tolerance: f64,
    /// Errors in ascending order.
    pub curve: Vec<f64>,
}

impl ErrorSummary {
    pub fn new(errors: &[PlacementError], tolerance: f64) -> Self {
        let mut curve: Vec<f64> = errors.iter().map(PlacementError::error).collect();
        curve.sort_by(f64::total_cmp);
        ErrorSummary {
            samples: errors.len(),
            negative: curve.iter().filter(|&&e| e < 0.0).count(),
            zero: curve.iter().filter(|&&e| e == 0.0).count(),
            within: errors
                .iter()
                .filter(|p| p.error() <= tolerance * (p.exact.abs() + 1.0))
                .count(),
            tolerance,
            curve,
        }
    }

    pub fn within_fraction(&self) -> f64 {
        if self.samples == 0 {
            return 1.0;
        }
        self.within as f64 / self.samples as f64
    }

    pub fn to_text(&self) -> String {
        format!(
            "samples={}\nnegative={}\nzero={}\ntolerance={}\nwithin={}\nwithin_fraction={}\n",
            self.samples,
            self.negative,
            self.zero,
            self.tolerance,
            self.within,
            self.within_fraction()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lines() {
        let text = "# comment\nsmall gen:path:100 false 0 0.5\nweb data/web.txt true - -\ng3 gen:grid:4x4 0\n";
        let m = parse_manifest(text.as_bytes()).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].expected_beta, Some((0.0, 0.5)));
        assert!(m[1].directed && m[1].expected_beta.is_none());
        assert!(!m[2].directed);
        for bad in ["a b", "a b maybe", "a b true 1", "a b true x 1", "a b true 2 1"] {
            assert!(parse_manifest(bad.as_bytes()).is_err(), "{bad}");
        }
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1e3, 1e4, 1e5].iter().map(|&x: &f64| (x, 3.0 * x.powf(1.1))).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.1).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(10.0, 1.0)]), None);
        assert_eq!(loglog_slope(&[(10.0, 1.0), (10.0, 2.0)]), None);
    }

    #[test]
    fn missing_file_is_skipped() {
        let m = parse_manifest("gone /nonexistent/graph.txt true 1 2\n".as_bytes()).unwrap();
        let opts = BenchOptions::<f64>::default();
        let r = run_suite(&m, &opts).unwrap();
        assert!(r.entries[0].skipped.is_some());
        assert!(!r.all_passed());
        assert!(r.to_text().contains("status=skipped"));
    }

    #[test]
    fn suite_runs_and_sorts() {
        let text = "b gen:grid:20x20:shuffle=1 false\na gen:path:300:shuffle=2 false 0 1\n";
        let m = parse_manifest(text.as_bytes()).unwrap();
        let opts = BenchOptions::<f64> {
            jobs: 2,
            error_samples: 50,
            ..BenchOptions::default()
        };
        let r = run_suite(&m, &opts).unwrap();
        assert_eq!(r.entries[0].name, "a");
        let p = r.placement.as_ref().unwrap();
        assert_eq!((p.samples, p.negative), (100, 0));
        assert!(r.to_text().contains("placement_within_fraction="));
        assert!(r.entries.iter().all(|e| e.skipped.is_none()));
        assert!(r.entries.iter().all(BenchEntry::dominates_baselines));
    }

    #[test]
    fn placement_errors_are_non_negative() {
        let g: Graph = generators::preferential_attachment(400, 3, 5);
        let a = baseline(&g, BaselineKind::Random(1));
        let errs = placement_errors(&g, &a, 100, 0);
        assert_eq!(errs.len(), 100);
        assert!(errs.iter().all(|e| e.error() >= 0.0 && e.degree >= 2));
        let s = ErrorSummary::new(&errs, 0.05);
        assert_eq!(s.negative, 0);
        assert!(s.curve.windows(2).all(|w| w[0] <= w[1]));
    }
}
