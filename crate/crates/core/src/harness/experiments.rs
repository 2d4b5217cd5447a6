//! Experiment drivers: single runs with tracking, and the grid convergence study.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::mpsc;

use super::config::{Experiment, RunConfig};
use super::init::init_condition;
use super::io::{write_snapshot, SnapshotRecord};
use crate::diagnostics::{
    centroid_y, perimeter_proxy, rate_table, write_rate_csv, CauchyAccumulator, EnergyLedger, Quantity, RateRow,
};
use crate::error::{ChnsError, Result};
use crate::grid::{CellField, StaggeredGrid};
use crate::model::{energy_total, ChnsState};
use crate::norms;
use crate::stepper::{Observer, Simulation, StepReport};

/// Scalar observables of one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub perimeter: f64,
    /// Vertical centroid of the bubble phase (`NaN` without a bubble).
    pub centroid_y: f64,
    pub mass: f64,
}

/// Everything a single run produces.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub ledger: EnergyLedger,
    pub track: Vec<TrackPoint>,
    pub snapshots: Vec<SnapshotRecord>,
    pub final_state: ChnsState,
}

/// Indicator of the bubble phase, `(1 + s Z)/2` for bubble phase `s`.
pub fn bubble_indicator(z: &CellField, inside: f64) -> CellField {
    z.map(|v| 0.5 * (1.0 + inside * v))
}

fn wants_snapshot(cfg: &RunConfig, s: &ChnsState) -> bool {
    let by_step = cfg.snapshot_every > 0 && s.step.is_multiple_of(cfg.snapshot_every);
    by_step || cfg.snapshot_times.iter().any(|&t| (t - s.t).abs() <= 0.5 * cfg.params.dt)
}

/// Run one configuration to its final time, tracking energy, interface
/// length and bubble centroid. With `out`, writes `ledger.csv`, `track.csv`
/// and the snapshots there.
pub fn run_config(cfg: &RunConfig, out: Option<&Path>) -> Result<RunSummary> {
    cfg.validate()?;
    let g = cfg.grid;
    let state = init_condition(&cfg.init, &g, &cfg.params, cfg.project_initial_velocity)?;
    let mut sim = Simulation::new(&g, &cfg.params, state)?;
    let mut ledger = EnergyLedger::new(&g, &cfg.params);
    let mut track = Vec::new();
    let mut snapshots = Vec::new();
    let inside = cfg.init.bubble_phase();
    let params = cfg.params.clone();
    let mut obs = |s: &ChnsState, rep: Option<&StepReport>| -> Result<()> {
        ledger.observe(s, rep)?;
        track.push(TrackPoint {
            step: s.step,
            t: s.t,
            energy: energy_total(s, &g, &params),
            perimeter: perimeter_proxy(&s.z, &g),
            centroid_y: inside.map_or(f64::NAN, |b| centroid_y(&bubble_indicator(&s.z, b), &g)),
            mass: norms::integral(&s.z, &g),
        });
        if let Some(dir) = out {
            if wants_snapshot(cfg, s) {
                snapshots.push(write_snapshot(&dir.join("snapshots"), s, &g, cfg.vtk)?);
            }
        }
        Ok(())
    };
    sim.run(&mut obs)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("ledger.csv"))?);
        ledger.write_csv(&mut w)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("track.csv"))?);
        writeln!(w, "step,t,E,perimeter,centroid_y,mass")?;
        for p in &track {
            writeln!(w, "{},{:e},{:e},{:e},{:e},{:e}", p.step, p.t, p.energy, p.perimeter, p.centroid_y, p.mass)?;
        }
        w.flush()?;
    }
    Ok(RunSummary { ledger, track, snapshots, final_state: sim.state })
}

fn expect_experiment(cfg: &RunConfig, e: Experiment) -> Result<()> {
    if cfg.experiment == e {
        Ok(())
    } else {
        Err(ChnsError::Validation {
            key: "experiment".into(),
            reason: format!("expected {}, got {}", e.name(), cfg.experiment.name()),
        })
    }
}

/// Square bubble relaxing toward a disc.
pub fn square_bubble(cfg: &RunConfig, out: Option<&Path>) -> Result<RunSummary> {
    expect_experiment(cfg, Experiment::SquareBubble)?;
    run_config(cfg, out)
}

/// Light bubble rising under buoyancy.
pub fn buoyant_bubble(cfg: &RunConfig, out: Option<&Path>) -> Result<RunSummary> {
    expect_experiment(cfg, Experiment::BuoyantBubble)?;
    run_config(cfg, out)
}

/// Column groups of the three error tables.
pub const TABLES: [[Quantity; 3]; 3] = [
    [Quantity::Z, Quantity::DZ, Quantity::R],
    [Quantity::W, Quantity::DW, Quantity::U],
    [Quantity::DxU1, Quantity::DyU1, Quantity::P],
];

/// Result of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    /// Coarse spacing of each level.
    pub hs: Vec<f64>,
    /// Cauchy errors between each level and its 2x refinement.
    pub errors: Vec<BTreeMap<&'static str, f64>>,
    pub tables: Vec<Vec<RateRow>>,
}

impl ConvergenceStudy {
    pub fn error(&self, level: usize, q: Quantity) -> f64 {
        self.errors[level][q.name()]
    }

    /// Rate of `q` between level `level - 1` and `level`.
    pub fn rate(&self, level: usize, q: Quantity) -> f64 {
        crate::diagnostics::rate(self.error(level - 1, q), self.error(level, q))
    }
}

fn level_grid(cfg: &RunConfig, n: usize) -> Result<StaggeredGrid> {
    let g = cfg.grid;
    StaggeredGrid::new(n, n, g.x_lo, g.x_hi, g.y_lo, g.y_hi)
}

/// Cauchy errors for every configured level against its 2x refinement.
///
/// All grids advance in lockstep on worker threads; each error is
/// accumulated as the states stream in, so no trajectory is stored.
/// With `out`, writes `table1.csv`, `table2.csv` and `table3.csv`.
pub fn converge(cfg: &RunConfig, out: Option<&Path>) -> Result<ConvergenceStudy> {
    cfg.validate()?;
    if cfg.levels.is_empty() {
        return Err(ChnsError::Validation { key: "levels".into(), reason: "at least one level".into() });
    }
    let mut ns: Vec<usize> = cfg.levels.iter().flat_map(|&n| [n, 2 * n]).collect();
    ns.sort_unstable();
    ns.dedup();
    let grids: Vec<StaggeredGrid> = ns.iter().map(|&n| level_grid(cfg, n)).collect::<Result<_>>()?;
    let slot = |n: usize| ns.iter().position(|&m| m == n).unwrap();
    let mut accs: Vec<CauchyAccumulator> = cfg
        .levels
        .iter()
        .map(|&n| CauchyAccumulator::new(&grids[slot(n)], &grids[slot(2 * n)], cfg.params.dt))
        .collect::<Result<_>>()?;
    let steps = cfg.params.step_count()?;

    std::thread::scope(|scope| -> Result<()> {
        let mut rxs = Vec::with_capacity(grids.len());
        for g in &grids {
            let (tx, rx) = mpsc::sync_channel::<Result<ChnsState>>(4);
            rxs.push(rx);
            scope.spawn(move || {
                let run = || -> Result<()> {
                    let s0 = init_condition(&cfg.init, g, &cfg.params, cfg.project_initial_velocity)?;
                    let mut sim = Simulation::new(g, &cfg.params, s0)?;
                    let mut send = |s: &ChnsState, _: Option<&StepReport>| -> Result<()> {
                        // a closed receiver means the collector already failed
                        tx.send(Ok(s.clone())).map_err(|_| ChnsError::TrajectoryMismatch("collector gone".into()))
                    };
                    sim.run_steps(steps, &mut send)
                };
                if let Err(e) = run() {
                    let _ = tx.send(Err(e));
                }
            });
        }
        for _ in 0..=steps {
            let mut level: Vec<ChnsState> = Vec::with_capacity(rxs.len());
            for rx in &rxs {
                let s = rx
                    .recv()
                    .map_err(|_| ChnsError::TrajectoryMismatch("a level stopped early".into()))??;
                level.push(s);
            }
            for (acc, &n) in accs.iter_mut().zip(&cfg.levels) {
                acc.push(&level[slot(n)], &level[slot(2 * n)])?;
            }
        }
        Ok(())
    })?;

    let hs: Vec<f64> = cfg.levels.iter().map(|&n| grids[slot(n)].h).collect();
    let errors: Vec<BTreeMap<&'static str, f64>> =
        accs.iter().map(|a| a.errors().into_iter().map(|(q, e)| (q.name(), e)).collect()).collect();
    let tables: Vec<Vec<RateRow>> = TABLES
        .iter()
        .map(|cols| {
            let errs: Vec<Vec<f64>> = accs.iter().map(|a| cols.iter().map(|&q| a.error(q)).collect()).collect();
            rate_table(&hs, &errs)
        })
        .collect();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for (i, (cols, rows)) in TABLES.iter().zip(&tables).enumerate() {
            let names: Vec<&str> = cols.iter().map(|q| q.name()).collect();
            let mut w = BufWriter::new(File::create(dir.join(format!("table{}.csv", i + 1)))?);
            write_rate_csv(&mut w, &names, rows)?;
            w.flush()?;
        }
    }
    Ok(ConvergenceStudy { hs, errors, tables })
}
