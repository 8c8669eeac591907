//! Self-check suite run by the `verify` command.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;


#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::algebra::{DeformedLadder, LadderKind, NonlinearityFn, Sector};
use crate::engine::{AtomPreparation, FieldState, Propagator};
use crate::states::{
    build_state, build_state_with, convergence_bound, displacement_apply_with, eigenrelation_residual,
    DisplacementPair, PureState, StateFamily, StateTag,
};
use crate::{Result, C64};

/// Strength shift applied to the lowering ladder under fault injection.
pub const FAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_CUTOFF: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: String, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, passed: value <= threshold }
    }

    fn from_result(name: String, value: Result<f64>, threshold: f64) -> Self {
        match value {
            Ok(v) => Self::new(name, v, threshold),
            Err(_) => Self { name, value: f64::NAN, threshold, passed: false },
        }
    }
}

const DUALS: [(LadderKind, LadderKind, Sector); 3] = [
    (LadderKind::A, LadderKind::B, Sector::All),
    (LadderKind::C, LadderKind::B0, Sector::Even),
    (LadderKind::C, LadderKind::B1, Sector::Odd),
];

fn families() -> [NonlinearityFn; 2] {
    [NonlinearityFn::Identity, NonlinearityFn::InverseSqrt]
}

pub fn run_suite(fault_inject: bool) -> Vec<Check> {
    run_suite_at(DEFAULT_CUTOFF, fault_inject)
}

/// All checks at `cutoff`; boundary rows within one step of the cutoff are
/// excluded wherever truncation makes them meaningless.
pub fn run_suite_at(cutoff: usize, fault_inject: bool) -> Vec<Check> {
    let mut out = Vec::new();
    algebra_checks(cutoff, &mut out);
    duality_checks(cutoff, fault_inject, &mut out);
    engine_checks(cutoff, &mut out);
    state_checks(cutoff, &mut out);
    out
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn scale(ladder: &DeformedLadder) -> f64 {
    ladder.strengths().iter().fold(1.0f64, |a, &b| a.max(b))
}

fn algebra_checks(cutoff: usize, out: &mut Vec<Check>) {
    for f in families() {
        for kind in LadderKind::ALL {
            let ladder = match DeformedLadder::new(kind, &f, cutoff) {
                Ok(l) => l,
                Err(_) => {
                    out.push(Check::new(format!("algebra {kind} {f}"), f64::NAN, 0.0));
                    continue;
                }
            };
            let s = scale(&ladder);
            out.push(Check::from_result(
                format!("[L,L†] diagonal {kind} {f}"),
                ladder.heisenberg_deviation(cutoff).map(|d| d / s),
                1e-13,
            ));
            out.push(Check::from_result(
                format!("[N,L] = -sL {kind} {f}"),
                ladder.number_commutator_deviation(cutoff).map(|d| d / s.sqrt()),
                1e-13,
            ));
        }
    }
}

fn duality_checks(cutoff: usize, fault_inject: bool, out: &mut Vec<Check>) {
    for f in families() {
        for (lower, dual, sector) in DUALS {
            let value = DeformedLadder::new(lower, &f, cutoff).and_then(|l| {
                let l = if fault_inject { l.perturbed(FAULT_EPSILON) } else { l };
                let d = DeformedLadder::new(dual, &f, cutoff)?;
                l.dual_deviation(&d, cutoff, sector)
            });
            out.push(Check::from_result(format!("[{lower},{dual}†] = 1 ({sector:?}) {f}"), value, 1e-12));
        }
    }
}

fn engine_checks(cutoff: usize, out: &mut Vec<Check>) {
    let atom = AtomPreparation::new(0.6, 0.4, 0.3, 0.7).expect("valid preparation");
    let g_tau = 0.3;
    for f in families() {
        for kind in LadderKind::ALL {
            let name = format!("recursion vs unitary {kind} {f}");
            let prop = match Propagator::new(kind, &f, g_tau, cutoff) {
                Ok(p) => p,
                Err(_) => {
                    out.push(Check::new(name, f64::NAN, 0.0));
                    continue;
                }
            };
            out.push(Check::new(
                format!("unitarity {kind} {f}"),
                crate::engine::unitarity_deviation(&prop.joint_unitary(), kind),
                1e-12,
            ));
            let seed = seed_state(cutoff);
            let (mut a, mut b) = (FieldState::from_pure(&seed, cutoff), FieldState::from_pure(&seed, cutoff));
            let mut dev = 0.0f64;
            for _ in 0..3 {
                a = prop.step_recursion(&a, &atom, 0.2);
                b = prop.step_unitary(&b, &atom, 0.2);
                dev = dev.max(a.max_abs_diff(&b)).max((a.leakage() - b.leakage()).abs());
            }
            out.push(Check::new(name, dev, 1e-12));
        }
    }
}

/// Equal-weight superposition over all levels with a position-dependent phase.
fn seed_state(cutoff: usize) -> PureState {
    let amps = crate::CVector::from_fn(cutoff + 1, |n, _| C64::from_polar(1.0, 0.37 * n as f64));
    PureState::from_amplitudes(amps, 0.0).expect("nonzero amplitudes")
}

fn state_checks(cutoff: usize, out: &mut Vec<Check>) {
    let z = C64::new(0.15, -0.2);
    for f in families() {
        for pair in DisplacementPair::ALL {
            let family = StateFamily::new(pair.family(), f.clone(), z);
            let seed = match PureState::fock(pair.natural_seed(), cutoff) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let value = displacement_apply_with(pair, &f, z, &seed, cutoff, f64::INFINITY).and_then(|d| {
                let series = build_state_with(&family, cutoff, f64::INFINITY)?;
                Ok((d.amps() - series.amps()).norm())
            });
            out.push(Check::from_result(format!("displacement {} vs series {f}", pair.name()), value, 1e-12));
        }
        for tag in StateTag::ALL {
            let family = StateFamily::new(tag, f.clone(), z);
            let value = build_state_with(&family, cutoff, f64::INFINITY)
                .and_then(|s| eigenrelation_residual(tag.eigen_operator(), &s, z, &f));
            out.push(Check::from_result(format!("eigenrelation {tag} {f}"), value, 1e-12));
        }
    }

    let exact = [
        (StateTag::Nlcs, NonlinearityFn::InverseSqrt, 1.0),
        (StateTag::SqVac, NonlinearityFn::Identity, 0.25),
        (StateTag::SqFirst, NonlinearityFn::Identity, 0.25),
    ];
    for (tag, f, limit) in exact {
        let value = convergence_bound(tag, &f).map(|b| (b - limit).abs() / limit);
        out.push(Check::from_result(format!("convergence bound {tag} {f}"), value, 1e-6));
    }
    let unbounded = [(StateTag::Nlcs, NonlinearityFn::Identity), (StateTag::EvenNlcs, NonlinearityFn::Identity)];
    for (tag, f) in unbounded {
        let value = convergence_bound(tag, &f).map(|b| if b == f64::INFINITY { 0.0 } else { 1.0 });
        out.push(Check::from_result(format!("convergence bound {tag} {f} unbounded"), value, 0.0));
    }
    // a family beyond its bound must be refused
    let refused = build_state(&StateFamily::new(StateTag::Nlcs, NonlinearityFn::InverseSqrt, C64::new(2.0, 0.0)), cutoff);
    out.push(Check::new("divergent family refused".into(), if refused.is_err() { 0.0 } else { 1.0 }, 0.0));
}
