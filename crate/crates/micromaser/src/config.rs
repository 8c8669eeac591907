//! JSON experiment description and its translation into engine configs.

use std::path::Path;

use micromaser_core::states::build_state;
use micromaser_core::{
    AtomPreparation, InitialField, LadderKind, Method, NonlinearityFn, PumpConfig, PureState, StateFamily, StateTag,
    C64,
};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

/// Default cap on the size of a sweep.
pub const MAX_RUNS: usize = 10_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pump: PumpSpec,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default = "default_max_runs")]
    pub max_runs: usize,
}

fn default_max_runs() -> usize {
    MAX_RUNS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    pub kind: String,
    #[serde(default = "identity")]
    pub f: String,
    pub g_tau: f64,
    pub atoms: usize,
    pub atom: AtomSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    pub cutoff: usize,
    #[serde(default)]
    pub free_phase: f64,
    #[serde(default)]
    pub method: MethodSpec,
    #[serde(default)]
    pub leak_budget: Option<f64>,
}

fn identity() -> String {
    "identity".into()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub rho_aa: f64,
    pub rho_bb: f64,
    #[serde(default)]
    pub coh_mag: f64,
    #[serde(default)]
    pub phi: f64,
}

/// `{"fock": n}` or a state family; vacuum when absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Fock { fock: usize },
    State(StateSpec),
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self::Fock { fock: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub family: String,
    #[serde(default)]
    pub f: Option<String>,
    pub z: ComplexSpec,
}

/// Target state; `f` defaults to the pump's and `z` to the weak-coupling label.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub family: String,
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default)]
    pub z: Option<ComplexSpec>,
}

/// `[re, im]`, a bare real, or a string such as `"0.1-0.5i"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Pair([f64; 2]),
    Real(f64),
    Text(String),
}

impl ComplexSpec {
    pub fn value(&self) -> CliResult<C64> {
        match self {
            Self::Pair([re, im]) => Ok(C64::new(*re, *im)),
            Self::Real(re) => Ok(C64::new(*re, 0.0)),
            Self::Text(s) => parse_complex(s),
        }
    }
}

pub fn parse_complex(s: &str) -> CliResult<C64> {
    s.trim().parse::<C64>().map_err(|_| CliError::Config(format!("cannot parse complex number `{s}`")))
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MethodSpec {
    #[default]
    Recursion,
    Unitary,
    Both,
}

impl From<MethodSpec> for Method {
    fn from(m: MethodSpec) -> Self {
        match m {
            MethodSpec::Recursion => Method::Recursion,
            MethodSpec::Unitary => Method::Unitary,
            MethodSpec::Both => Method::Both,
        }
    }
}

/// Axes of a cross-product sweep; an empty axis keeps the pump's value.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub g_tau: Vec<f64>,
    #[serde(default)]
    pub atoms: Vec<usize>,
    #[serde(default)]
    pub f: Vec<String>,
    #[serde(default)]
    pub kind: Vec<String>,
}

/// One fully resolved sweep point.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub index: usize,
    pub pump: PumpConfig,
    pub target: Option<TargetPlan>,
}

#[derive(Debug, Clone)]
pub struct TargetPlan {
    pub tag: StateTag,
    pub f: NonlinearityFn,
    /// `None` means the weak-coupling label of the run.
    pub z: Option<C64>,
}

fn parse_f(s: &str) -> CliResult<NonlinearityFn> {
    Ok(s.parse::<NonlinearityFn>()?)
}

fn parse_kind(s: &str) -> CliResult<LadderKind> {
    Ok(s.parse::<LadderKind>()?)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Validates the whole sweep and expands it in a fixed order
    /// (kind, f, g_tau, atoms, slowest to fastest).
    pub fn plan(&self) -> CliResult<Vec<RunPlan>> {
        let p = &self.pump;
        let kinds = axis(&self.sweep.kind, &p.kind).iter().map(|k| parse_kind(k)).collect::<CliResult<Vec<_>>>()?;
        let fs = axis(&self.sweep.f, &p.f).iter().map(|f| parse_f(f)).collect::<CliResult<Vec<_>>>()?;
        let g_taus = axis(&self.sweep.g_tau, &p.g_tau);
        let atoms = axis(&self.sweep.atoms, &p.atoms);
        let total = kinds.len() * fs.len() * g_taus.len() * atoms.len();
        if total > self.max_runs {
            return Err(CliError::Config(format!("sweep has {total} runs, limit is {}", self.max_runs)));
        }
        let atom = AtomPreparation::new(p.atom.rho_aa, p.atom.rho_bb, p.atom.coh_mag, p.atom.phi)?;

        let mut plans = Vec::with_capacity(total);
        for &kind in &kinds {
            for f in &fs {
                let initial = self.initial(f, p.cutoff)?;
                let target = self.target_plan(kind, f)?;
                for &g_tau in &g_taus {
                    for &k in &atoms {
                        let mut pump = PumpConfig::new(kind, f.clone(), g_tau, k, atom, p.cutoff)
                            .with_initial(InitialField::Pure(initial.clone()))
                            .with_method(p.method.into())
                            .with_free_phase(p.free_phase);
                        if let Some(budget) = p.leak_budget {
                            pump = pump.with_leak_budget(budget);
                        }
                        pump.validate()?;
                        plans.push(RunPlan { index: plans.len(), pump, target: target.clone() });
                    }
                }
            }
        }
        Ok(plans)
    }

    fn initial(&self, pump_f: &NonlinearityFn, cutoff: usize) -> CliResult<PureState> {
        match &self.pump.initial {
            InitialSpec::Fock { fock } => Ok(PureState::fock(*fock, cutoff)?),
            InitialSpec::State(s) => {
                let f = match &s.f {
                    Some(f) => parse_f(f)?,
                    None => pump_f.clone(),
                };
                let family = StateFamily::new(s.family.parse()?, f, s.z.value()?);
                Ok(build_state(&family, cutoff)?)
            }
        }
    }

    fn target_plan(&self, kind: LadderKind, pump_f: &NonlinearityFn) -> CliResult<Option<TargetPlan>> {
        let Some(t) = &self.target else { return Ok(None) };
        let tag: StateTag = t.family.parse()?;
        if tag.stride() != kind.step() {
            return Err(CliError::Config(format!(
                "target family {tag} moves in steps of {}, coupling {kind} in steps of {}",
                tag.stride(),
                kind.step()
            )));
        }
        let f = match &t.f {
            Some(f) => parse_f(f)?,
            None => pump_f.clone(),
        };
        let z = t.z.as_ref().map(ComplexSpec::value).transpose()?;
        Ok(Some(TargetPlan { tag, f, z }))
    }
}

fn axis<T: Clone>(values: &[T], fallback: &T) -> Vec<T> {
    if values.is_empty() {
        vec![fallback.clone()]
    } else {
        values.to_vec()
    }
}
