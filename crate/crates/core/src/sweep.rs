//! Grid sweeps over network configurations and run parameters.
//!
//! Cells are the cross product of e_mm, s_m, recommender, behavior, alpha,
//! and k axes, every network having a neutral majority. Each cell runs the
//! configured replicate seeds; cells are independent and execute in
//! parallel, with all output derived only from the cell parameters and
//! seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::behavior::BehaviorKind;
use crate::config::{BuildError, ExperimentSpec, NetworkSource};
use crate::engine::{run_simulation, EngineError, IterationRecord};
use crate::io::{self, IoError};
use crate::recommend::RecommenderKind;

/// Iterations reported in the summary table.
pub const TRACKED_ITERATIONS: [usize; 3] = [2, 10, 20];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Axes of the sweep; the cross product defines the cells.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub e_mm: Vec<f64>,
    pub s_m: Vec<f64>,
    pub recommenders: Vec<RecommenderKind>,
    pub behaviors: Vec<BehaviorKind>,
    pub alphas: Vec<f64>,
    pub ks: Vec<usize>,
    pub base: ExperimentSpec,
}

impl SweepGrid {
    pub fn from_spec(spec: ExperimentSpec) -> SweepGrid {
        SweepGrid {
            e_mm: vec![0.05, 0.5, 0.95],
            s_m: vec![0.1, 0.3, 0.45],
            recommenders: vec![spec.sim.recommender],
            behaviors: vec![spec.sim.behavior],
            alphas: vec![spec.sim.alpha],
            ks: vec![spec.sim.k],
            base: spec,
        }
    }

    /// Every `(e_mm, s_m)` cell must be admissible under the homophily
    /// interval: `h = e_mm - s_m` in `(-s_m, 1 - s_m]`, i.e. e_mm in (0, 1].
    pub fn validate(&self) -> Result<(), SweepError> {
        for axis in [&self.e_mm, &self.s_m, &self.alphas] {
            if axis.is_empty() {
                return Err(SweepError::InvalidGrid("an axis is empty".into()));
            }
        }
        if self.recommenders.is_empty() || self.behaviors.is_empty() || self.ks.is_empty() {
            return Err(SweepError::InvalidGrid("an axis is empty".into()));
        }
        for &e in &self.e_mm {
            if !(e > 0.0 && e <= 1.0) {
                return Err(SweepError::InvalidGrid(format!(
                    "e_mm = {e} outside (0, 1]"
                )));
            }
        }
        for &s in &self.s_m {
            if !(s > 0.0 && s <= 0.5) {
                return Err(SweepError::InvalidGrid(format!(
                    "s_m = {s} outside (0, 0.5]"
                )));
            }
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a <= 1.0) {
                return Err(SweepError::InvalidGrid(format!(
                    "alpha = {a} outside (0, 1]"
                )));
            }
        }
        if self.ks.iter().any(|&k| k < 1) {
            return Err(SweepError::InvalidGrid("k must be >= 1".into()));
        }
        Ok(())
    }

    /// Deterministic cell enumeration order.
    pub fn cells(&self) -> Vec<CellParams> {
        let mut cells = Vec::new();
        for &e_mm in &self.e_mm {
            for &s_m in &self.s_m {
                for &recommender in &self.recommenders {
                    for &behavior in &self.behaviors {
                        for &alpha in &self.alphas {
                            for &k in &self.ks {
                                cells.push(CellParams {
                                    e_mm,
                                    s_m,
                                    recommender,
                                    behavior,
                                    alpha,
                                    k,
                                });
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

/// One point of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub e_mm: f64,
    pub s_m: f64,
    pub recommender: RecommenderKind,
    pub behavior: BehaviorKind,
    pub alpha: f64,
    pub k: usize,
}

impl CellParams {
    pub fn dir_name(&self) -> String {
        format!(
            "emm{}_sm{}_{}_{}_a{}_k{}",
            self.e_mm,
            self.s_m,
            self.recommender.name(),
            self.behavior.name(),
            self.alpha,
            self.k
        )
    }

    /// The minority homophily implied by the cell's e_mm target.
    pub fn h_m(&self) -> f64 {
        self.e_mm - self.s_m
    }
}

#[derive(Debug)]
pub struct CellOutcome {
    pub params: CellParams,
    pub result: Result<Vec<(u64, Vec<IterationRecord>)>, String>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub outcomes: Vec<CellOutcome>,
}

impl SweepReport {
    pub fn failed_cells(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_err()).count()
    }
}

fn run_cell(
    grid: &SweepGrid,
    params: &CellParams,
    out_dir: &Path,
) -> Result<Vec<(u64, Vec<IterationRecord>)>, SweepError> {
    let source = NetworkSource::Targets {
        n: grid.base.n,
        avg_out_degree: grid.base.avg_out_degree,
        s_m: params.s_m,
        h_m: params.h_m(),
        h_maj: 0.0,
        tolerance: grid.base.tolerance,
    };
    let cell_dir = out_dir.join(params.dir_name());
    fs::create_dir_all(&cell_dir).map_err(IoError::from)?;

    let seeds = grid.base.replicate_seeds();
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let graph = source.materialize(seed)?;
        let mut sim = grid.base.sim.clone();
        sim.seed = seed;
        sim.recommender = params.recommender;
        sim.behavior = params.behavior;
        sim.alpha = params.alpha;
        sim.k = params.k;
        let output = run_simulation(graph, &sim)?;
        io::write_metrics_csv(
            &cell_dir.join(format!("metrics_seed{seed}.csv")),
            &output.records,
            &sim.percentiles,
        )?;
        runs.push((seed, output.records));
    }
    let refs: Vec<(u64, &[IterationRecord])> =
        runs.iter().map(|(s, r)| (*s, r.as_slice())).collect();
    io::write_combined_csv(
        &cell_dir.join("combined.csv"),
        &refs,
        &grid.base.sim.percentiles,
    )?;
    Ok(runs)
}

/// Runs every cell (in parallel) and writes per-cell outputs plus the
/// summary table. Failed cells are recorded and skipped.
pub fn run_sweep(grid: &SweepGrid, out_dir: &Path) -> Result<SweepReport, SweepError> {
    grid.validate()?;
    if grid.base.replicate_seeds().is_empty() {
        return Err(SweepError::InvalidGrid("need at least one seed".into()));
    }
    let cells_dir = out_dir.join("cells");
    fs::create_dir_all(&cells_dir).map_err(IoError::from)?;

    let cells = grid.cells();
    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|params| CellOutcome {
            params: *params,
            result: run_cell(grid, params, &cells_dir).map_err(|e| e.to_string()),
        })
        .collect();

    let report = SweepReport { outcomes };
    fs::write(out_dir.join("summary.csv"), summary_csv(&report)).map_err(IoError::from)?;
    Ok(report)
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Seed-mean exposure at iteration `t` (1-based).
fn mean_exposure_at(runs: &[(u64, Vec<IterationRecord>)], t: usize) -> Option<f64> {
    let values: Vec<f64> = runs
        .iter()
        .filter_map(|(_, records)| records.get(t - 1))
        .filter_map(|r| r.exposure.as_ref().map(|e| e.e_min))
        .collect();
    mean(&values)
}

/// Seed-mean of per-seed exposure ratios E_t / E_1.
fn mean_ratio_at(runs: &[(u64, Vec<IterationRecord>)], t: usize) -> Option<f64> {
    let mut ratios = Vec::new();
    for (_, records) in runs {
        let series: Vec<Option<f64>> = records
            .iter()
            .map(|r| r.exposure.as_ref().map(|e| e.e_min))
            .collect();
        if let Ok(ratio) = crate::metrics::exposure_ratio(&series, t) {
            ratios.push(ratio);
        }
    }
    mean(&ratios)
}

/// One row per cell: exposure level at t=1 and ratios at the tracked
/// iterations (clipped to T), plus a status column for failed cells.
pub fn summary_csv(report: &SweepReport) -> String {
    let mut out = String::from("# schema=linkloop-sweep-v1\n");
    let mut header = String::from("e_mm,s_m,recommender,behavior,alpha,k,n_seeds,e_m_t1");
    for t in TRACKED_ITERATIONS {
        write!(header, ",ratio_t{t}").unwrap();
    }
    writeln!(out, "{header},status").unwrap();
    for outcome in &report.outcomes {
        let p = &outcome.params;
        write!(
            out,
            "{},{},{},{},{},{}",
            p.e_mm,
            p.s_m,
            p.recommender.name(),
            p.behavior.name(),
            p.alpha,
            p.k
        )
        .unwrap();
        let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        match &outcome.result {
            Ok(runs) => {
                write!(out, ",{},{}", runs.len(), fmt(mean_exposure_at(runs, 1))).unwrap();
                for t in TRACKED_ITERATIONS {
                    write!(out, ",{}", fmt(mean_ratio_at(runs, t))).unwrap();
                }
                writeln!(out, ",ok").unwrap();
            }
            Err(msg) => {
                let empties = vec![String::new(); 1 + TRACKED_ITERATIONS.len()];
                write!(out, ",0,{}", empties.join(",")).unwrap();
                writeln!(out, ",failed: {}", msg.replace(',', ";")).unwrap();
            }
        }
    }
    out
}

/// Convenience for callers needing one cell's outcome back.
pub fn find_outcome<'r>(report: &'r SweepReport, params: &CellParams) -> Option<&'r CellOutcome> {
    report.outcomes.iter().find(|o| o.params == *params)
}

/// Output directory layout helper used by the CLI.
pub fn cell_dir(out_dir: &Path, params: &CellParams) -> PathBuf {
    out_dir.join("cells").join(params.dir_name())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_grid() -> SweepGrid {
        let mut base = ExperimentSpec {
            n: 120,
            avg_out_degree: 4.0,
            seeds: Some(vec![1, 2]),
            ..ExperimentSpec::default()
        };
        base.sim.iterations = 3;
        SweepGrid {
            e_mm: vec![0.5],
            s_m: vec![0.3],
            recommenders: vec![RecommenderKind::Random],
            behaviors: vec![BehaviorKind::Lazy],
            alphas: vec![0.2],
            ks: vec![3],
            base,
        }
    }

    #[test]
    fn cross_product_counts() {
        let mut grid = tiny_grid();
        grid.e_mm = vec![0.05, 0.5, 0.95];
        grid.s_m = vec![0.1, 0.3, 0.45];
        grid.recommenders = vec![RecommenderKind::Random, RecommenderKind::Ada];
        assert_eq!(grid.cells().len(), 18);
    }

    #[test]
    fn grid_validation_rejects_inadmissible_cells() {
        let mut grid = tiny_grid();
        grid.e_mm = vec![0.0];
        assert!(grid.validate().is_err());
        let mut grid = tiny_grid();
        grid.s_m = vec![0.7];
        assert!(grid.validate().is_err());
    }

    #[test]
    fn sweep_writes_cells_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let grid = tiny_grid();
        let report = run_sweep(&grid, dir.path()).unwrap();
        assert_eq!(report.outcomes.len(), 1);
        assert_eq!(report.failed_cells(), 0);

        let cell = cell_dir(dir.path(), &grid.cells()[0]);
        assert!(cell.join("metrics_seed1.csv").exists());
        assert!(cell.join("metrics_seed2.csv").exists());
        assert!(cell.join("combined.csv").exists());

        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(summary.lines().count() >= 3);
        assert!(summary.contains("0.5,0.3,rnd,lzy"), "summary: {summary}");
    }

    #[test]
    fn sweep_results_do_not_depend_on_execution_order() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut grid = tiny_grid();
        grid.e_mm = vec![0.3, 0.6];
        run_sweep(&grid, dir_a.path()).unwrap();
        // second run with the cell order reversed
        grid.e_mm = vec![0.6, 0.3];
        run_sweep(&grid, dir_b.path()).unwrap();
        for cell in [
            "emm0.3_sm0.3_rnd_lzy_a0.2_k3",
            "emm0.6_sm0.3_rnd_lzy_a0.2_k3",
        ] {
            let a = fs::read(dir_a.path().join("cells").join(cell).join("combined.csv")).unwrap();
            let b = fs::read(dir_b.path().join("cells").join(cell).join("combined.csv")).unwrap();
            assert_eq!(a, b, "cell {cell}");
        }
    }
}
