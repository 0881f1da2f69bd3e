//! Tables for each experiment and the top-level `run` that writes them.

use std::path::PathBuf;

use crate::checks::{run_oracles, run_selfcheck, OracleRow, PmfRow, SelfCheck};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::experiments::{
    run_area_volume, run_cutoff, run_entanglement_trace, run_purity_convergence, AreaVolume, CutoffSweep,
    PurityConvergence, Trace,
};
use crate::output::{write_gate_log, Cell, Table};
use crate::tripartite::{run_tripartite, Start, Tripartite, ATTRACTOR_RADIUS};

fn opt_step(s: Option<usize>) -> Cell {
    s.map_or(Cell::Empty, Cell::from)
}

pub fn purity_table(p: &PurityConvergence) -> Table {
    let mut t = Table::new(vec!["n", "exact_chain_purity", "mc_purity", "mc_stderr", "lemma1_bound", "asymptote"]);
    for r in &p.rows {
        t.push(vec![
            r.step.into(),
            r.exact.into(),
            r.mc.map(|m| m.0).into(),
            r.mc.map(|m| m.1).into(),
            r.bound.into(),
            r.asymptote.into(),
        ]);
    }
    t
}

pub fn trace_table(tr: &Trace) -> Table {
    let mut t = Table::new(vec!["realization", "n", "ebits"]);
    for (r, row) in tr.ebits.iter().enumerate() {
        for (&step, &v) in tr.grid.iter().zip(row) {
            t.push(vec![r.into(), step.into(), v.into()]);
        }
    }
    t
}

pub fn trace_mean_table(tr: &Trace) -> Table {
    let mut t = Table::new(vec!["n", "mean_ebits", "stderr"]);
    for (step, m, se) in tr.mean() {
        t.push(vec![step.into(), m.into(), se.into()]);
    }
    t
}

pub fn cutoff_table(c: &CutoffSweep) -> Table {
    let mut t = Table::new(vec!["N", "n", "tv", "tv_rescaled_axis"]);
    for curve in &c.curves {
        let shift = curve.series.crossing(0.5);
        for &(step, tv) in curve.series.points() {
            t.push(vec![curve.n.into(), step.into(), tv.into(), shift.map(|s| step as f64 - s).into()]);
        }
    }
    t
}

pub fn cutoff_summary_table(c: &CutoffSweep) -> Table {
    let mut t = Table::new(vec!["N", "N_A", "n_half", "window_width", "relative_width"]);
    for curve in &c.curves {
        t.push(vec![
            curve.n.into(),
            curve.n_a.into(),
            curve.series.crossing(0.5).into(),
            curve.series.window_width(0.9, 0.1).into(),
            curve.series.relative_width().into(),
        ]);
    }
    t
}

pub fn area_volume_table(a: &AreaVolume) -> Table {
    let mut t = Table::new(vec!["n", "N_A", "mean_ebits", "stderr", "asymptotic_mean"]);
    for (g, &step) in a.grid.iter().enumerate() {
        for (b, &k) in a.blocks.iter().enumerate() {
            t.push(vec![step.into(), k.into(), a.mean[g][b].into(), a.stderr[g][b].into(), a.asymptotic[b].into()]);
        }
    }
    t
}

fn summary(rows: Vec<(&str, Cell)>) -> Table {
    let mut t = Table::new(vec!["key", "value"]);
    for (k, v) in rows {
        t.push(vec![k.into(), v]);
    }
    t
}

pub fn tripartite_table(tp: &Tripartite) -> Table {
    let mut t = Table::new(vec![
        "start",
        "n",
        "log_negativity",
        "log_negativity_stderr",
        "mutual_info",
        "mutual_info_stderr",
        "entropy_c",
        "entropy_c_stderr",
    ]);
    for (start, traj) in &tp.trajectories {
        for p in traj {
            t.push(vec![
                start.name().into(),
                p.step.into(),
                p.negativity.0.into(),
                p.negativity.1.into(),
                p.mutual_info.0.into(),
                p.mutual_info.1.into(),
                p.entropy_c.0.into(),
                p.entropy_c.1.into(),
            ]);
        }
    }
    t
}

pub fn flow_table(tp: &Tripartite) -> Table {
    let mut t = Table::new(vec!["entropy_c_lo", "log_negativity_lo", "count", "mean_dx", "mean_dy"]);
    for b in &tp.flow {
        t.push(vec![
            b.x.into(),
            b.y.into(),
            b.count.into(),
            b.displacement.map(|d| d.0).into(),
            b.displacement.map(|d| d.1).into(),
        ]);
    }
    t
}

pub fn tripartite_summary_table(tp: &Tripartite) -> Result<Table> {
    let mut t = Table::new(vec!["start", "settle_step", "attractor_x", "attractor_y", "radius"]);
    for start in Start::ALL {
        t.push(vec![
            start.name().into(),
            opt_step(tp.settle_step(start, ATTRACTOR_RADIUS)),
            tp.attractor_x.into(),
            tp.attractor_y.into(),
            ATTRACTOR_RADIUS.into(),
        ]);
    }
    t.push(vec![
        "pearson_transient".into(),
        Cell::Empty,
        Cell::Empty,
        tp.transient_pearson(ATTRACTOR_RADIUS)?.into(),
        Cell::Empty,
    ]);
    Ok(t)
}

pub fn selfcheck_table(s: &SelfCheck) -> Table {
    let mut t = Table::new(vec!["measure", "a", "b", "u", "v", "estimate", "stderr", "predicted"]);
    for i in 0..3 {
        for j in 0..3 {
            let letter = |k: usize| ["x", "y", "z"][k];
            t.push(vec![
                "haar_bloch".into(),
                "z".into(),
                "z".into(),
                letter(i).into(),
                letter(j).into(),
                s.bloch_mean[i][j].into(),
                Cell::Empty,
                (if i == j { 1.0 / 3.0 } else { 0.0 }).into(),
            ]);
        }
    }
    for (name, reports) in [("haar", &s.haar), ("clifford24", &s.clifford)] {
        for r in reports {
            for (ui, row) in r.entries.iter().enumerate() {
                for (vi, e) in row.iter().enumerate() {
                    let l = |k: usize| ["0", "x", "y", "z"][k];
                    t.push(vec![
                        name.into(),
                        r.a.letter().to_string().as_str().into(),
                        r.b.letter().to_string().as_str().into(),
                        l(ui).into(),
                        l(vi).into(),
                        e.estimate.into(),
                        e.stderr.into(),
                        e.predicted.into(),
                    ]);
                }
            }
        }
    }
    t
}

pub fn oracle_tables(rows: &[OracleRow], pmfs: &[PmfRow]) -> (Table, Table) {
    let mut t =
        Table::new(vec!["N", "N_A", "page_average", "asymptotic_purity", "stabilizer_mean", "chain_long_run_purity"]);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.n_a.into(),
            r.page.into(),
            r.purity.into(),
            r.stabilizer_mean.into(),
            r.chain_purity.into(),
        ]);
    }
    let mut p = Table::new(vec!["N", "N_A", "E", "probability"]);
    for &(n, n_a, e, prob) in pmfs {
        p.push(vec![n.into(), n_a.into(), e.into(), prob.into()]);
    }
    (t, p)
}

/// What a run produced: files written plus one-line notes for stdout.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
    /// Set when a self-check fails; the binary exits nonzero.
    pub failure: Option<String>,
}

fn emit(summary: &mut RunSummary, path: PathBuf, table: &Table) -> Result<()> {
    table.write_path(&path)?;
    summary.files.push(path);
    Ok(())
}

/// Runs the configured experiment and writes its CSV files.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let mut s = RunSummary::default();
    match cfg.experiment {
        Experiment::PurityConvergence => {
            let p = run_purity_convergence(cfg)?;
            let bad = p.bound_violations();
            if !bad.is_empty() {
                s.failure = Some(format!("bound violated at steps {bad:?}"));
            }
            emit(&mut s, cfg.out.clone(), &purity_table(&p))?;
        }
        Experiment::Trace => {
            let tr = run_entanglement_trace(cfg)?;
            emit(&mut s, cfg.out.clone(), &trace_table(&tr))?;
            emit(&mut s, cfg.companion_path("mean"), &trace_mean_table(&tr))?;
            if let (Some(path), Some(log)) = (&cfg.gate_log, &tr.gate_log) {
                write_gate_log(path, log)?;
                s.files.push(path.clone());
            }
            match tr.tau_sat(cfg.epsilon)? {
                Some(t) => s.notes.push(format!("tau_sat(eps = {}) = {t}", cfg.epsilon)),
                None => s.notes.push(format!("tau_sat(eps = {}) not reached", cfg.epsilon)),
            }
        }
        Experiment::Cutoff => {
            let c = run_cutoff(cfg)?;
            emit(&mut s, cfg.out.clone(), &cutoff_table(&c))?;
            emit(&mut s, cfg.companion_path("summary"), &cutoff_summary_table(&c))?;
        }
        Experiment::AreaVolume => {
            let a = run_area_volume(cfg)?;
            emit(&mut s, cfg.out.clone(), &area_volume_table(&a))?;
            let tau = a.tau_vol(cfg.epsilon)?;
            emit(
                &mut s,
                cfg.companion_path("summary"),
                &summary(vec![("epsilon", cfg.epsilon.into()), ("tau_vol", opt_step(tau))]),
            )?;
        }
        Experiment::Tripartite => {
            let tp = run_tripartite(cfg)?;
            emit(&mut s, cfg.out.clone(), &tripartite_table(&tp))?;
            emit(&mut s, cfg.companion_path("flow"), &flow_table(&tp))?;
            emit(&mut s, cfg.companion_path("summary"), &tripartite_summary_table(&tp)?)?;
        }
        Experiment::Oracles => {
            let (rows, pmfs) = run_oracles(cfg)?;
            let (t, p) = oracle_tables(&rows, &pmfs);
            emit(&mut s, cfg.out.clone(), &t)?;
            emit(&mut s, cfg.companion_path("pmf"), &p)?;
        }
        Experiment::Selfcheck => {
            let c = run_selfcheck(cfg)?;
            emit(&mut s, cfg.out.clone(), &selfcheck_table(&c))?;
            s.notes.push(format!("bloch max error {:.4e} (limit 1e-2)", c.bloch_max_error));
            s.notes.push(format!("haar moment max z {:.2}", c.haar_max_z()));
            s.notes.push(format!("clifford exhaustive max error {:.2e}", c.clifford_max_error()));
            if !c.passed() {
                s.failure = Some("moment checks failed".into());
            }
        }
    }
    Ok(s)
}

/// Runs inside a pool of `workers` threads, or the global pool when `None`.
pub fn run_with_workers(cfg: &ExperimentConfig) -> Result<RunSummary> {
    match cfg.workers {
        None => run(cfg),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| run(cfg)),
    }
}
