//! Executing planned runs and writing their results.

use std::fs;
use std::path::Path;

use micromaser_core::approx::{dominance_margin, weak_coupling_check, WeakCouplingReport};
use micromaser_core::engine::{run_pumping_tracked, target_z};
use micromaser_core::states::build_state;
use micromaser_core::{fidelity, observables, ObservableSet, PureState, RunRecord, StateFamily, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunPlan;
use crate::{CliError, CliResult};

pub const RECORD_COLUMNS: [&str; 9] =
    ["k", "trace", "leakage", "purity", "mean_n", "var_n", "mandel_q", "max_offdiag", "fidelity_target"];

#[derive(Debug, Clone, Serialize)]
pub struct TargetSummary {
    pub family: String,
    pub f: String,
    pub z: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakCouplingSummary {
    pub g_tau: f64,
    pub nbar: f64,
    pub margin1: f64,
    pub margin2: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl From<WeakCouplingReport> for WeakCouplingSummary {
    fn from(r: WeakCouplingReport) -> Self {
        Self { g_tau: r.g_tau, nbar: r.nbar, margin1: r.margin1, margin2: r.margin2, threshold: r.threshold, pass: r.pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ObservableSummary {
    pub mean_n: f64,
    pub var_n: f64,
    pub mandel_q: f64,
    pub purity: f64,
    pub parity_even_weight: f64,
    pub max_offdiag: f64,
}

impl From<ObservableSet> for ObservableSummary {
    fn from(o: ObservableSet) -> Self {
        Self {
            mean_n: o.mean_n,
            var_n: o.var_n,
            mandel_q: o.mandel_q,
            purity: o.purity,
            parity_even_weight: o.parity_even_weight,
            max_offdiag: o.max_offdiag,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub index: usize,
    pub records: String,
    pub kind: String,
    pub f: String,
    pub g_tau: f64,
    pub atoms: usize,
    pub cutoff: usize,
    pub target_z: [f64; 2],
    pub target: Option<TargetSummary>,
    pub final_fidelity: Option<f64>,
    pub weak_coupling: WeakCouplingSummary,
    /// At `n = n' = round(mean_n)`; absent when `ρ_bb = 0` or `K = 0`.
    pub dominance_margin: Option<f64>,
    pub trace: f64,
    pub leakage: f64,
    pub observables: ObservableSummary,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub records: Vec<RunRecord>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn records_file(index: usize) -> String {
    format!("run_{index:04}.csv")
}

pub fn execute(plan: &RunPlan) -> CliResult<RunOutput> {
    let cfg = &plan.pump;
    let z_weak = target_z(cfg);
    let target: Option<(PureState, TargetSummary)> = match &plan.target {
        None => None,
        Some(t) => {
            let z = t.z.unwrap_or(z_weak);
            let state = build_state(&StateFamily::new(t.tag, t.f.clone(), z), cfg.cutoff)?;
            Some((state, TargetSummary { family: t.tag.name().into(), f: t.f.to_string(), z: pair(z) }))
        }
    };
    let run = run_pumping_tracked(cfg, target.as_ref().map(|t| &t.0))
        .map_err(|e| CliError::Run { index: plan.index, source: e })?;
    let obs = observables(&run.state);
    let nbar = obs.mean_n;
    let summary = RunSummary {
        index: plan.index,
        records: records_file(plan.index),
        kind: cfg.kind.name().into(),
        f: cfg.f.to_string(),
        g_tau: cfg.g_tau,
        atoms: cfg.atoms,
        cutoff: cfg.cutoff,
        target_z: pair(z_weak),
        final_fidelity: target.as_ref().map(|t| fidelity(&run.state, &t.0)),
        target: target.map(|t| t.1),
        weak_coupling: weak_coupling_check(cfg, nbar).into(),
        dominance_margin: {
            let n = nbar.round() as usize;
            dominance_margin(n, n, cfg.atom.rho_bb(), cfg.atoms).ok()
        },
        trace: run.state.trace(),
        leakage: run.state.leakage(),
        observables: obs.into(),
    };
    Ok(RunOutput { summary, records: run.records })
}

/// Runs every plan, in parallel, returning outputs in plan order.
pub fn execute_all(plans: &[RunPlan]) -> CliResult<Vec<RunOutput>> {
    plans.par_iter().map(execute).collect::<Vec<_>>().into_iter().collect()
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Csv(path.display().to_string(), e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(RECORD_COLUMNS).map_err(io)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            fmt(r.trace),
            fmt(r.leakage),
            fmt(r.purity),
            fmt(r.mean_n),
            fmt(r.var_n),
            fmt(r.mandel_q),
            fmt(r.max_offdiag),
            r.fidelity_target.map(fmt).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(path.display().to_string(), e))
}

#[derive(Serialize)]
struct Summary<'a> {
    runs: Vec<&'a RunSummary>,
}

/// Writes one CSV per run plus `summary.json` into `dir`.
pub fn write_outputs(dir: &Path, outputs: &[RunOutput]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    for out in outputs {
        write_records(&dir.join(&out.summary.records), &out.records)?;
    }
    let summary = Summary { runs: outputs.iter().map(|o| &o.summary).collect() };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    let path = dir.join("summary.json");
    fs::write(&path, text + "\n").map_err(|e| CliError::Io(path.display().to_string(), e))
}

/// CSV of the support of a state: `n,re,im,probability`.
pub fn write_state(path: &Path, state: &PureState, support: impl Iterator<Item = usize>) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Csv(path.display().to_string(), e);
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["n", "re", "im", "probability"]).map_err(io)?;
    for n in support {
        let a = state.amp(n);
        w.write_record([n.to_string(), fmt(a.re), fmt(a.im), fmt(a.norm_sqr())]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(path.display().to_string(), e))
}
