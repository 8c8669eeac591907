//! Exact atom-by-atom evolution of the cavity field.
//!
//! Each injected atom couples to the field through
//! `H = g (L |a⟩⟨b| + L† |b⟩⟨a|)` for one of the five ladder kinds, and the
//! field after the atom leaves is the partial trace over the atom. Two
//! independent routes compute that map: the closed seven-term recursion on
//! matrix elements, and an explicit joint unitary conjugation followed by a
//! partial trace. Transitions that would push the field past the cutoff are
//! dropped and the lost probability is accumulated as leakage.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;


#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::algebra::{DeformedLadder, LadderKind, NonlinearityFn};
use crate::analysis::{fidelity, observables};
use crate::states::PureState;
use crate::{CMatrix, Error, Result, C64};

const PREP_TOLERANCE: f64 = 1e-14;

/// Default bound on accumulated leakage for [`run_pumping`].
pub const LEAK_BUDGET: f64 = 1e-8;
/// Elementwise agreement required between the two paths under [`Method::Both`].
pub const PATH_TOLERANCE: f64 = 1e-10;

/// Density matrix of an injected two-level atom, parametrized by its
/// populations and the coherence `ρ_ab = |ρ_ab| e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomPreparation {
    rho_aa: f64,
    rho_bb: f64,
    coh_mag: f64,
    phi: f64,
}

impl AtomPreparation {
    pub fn new(rho_aa: f64, rho_bb: f64, coh_mag: f64, phi: f64) -> Result<Self> {
        if !(rho_aa.is_finite() && rho_bb.is_finite() && coh_mag.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidAtom("parameters must be finite".to_string()));
        }
        if rho_aa < 0.0 || rho_bb < 0.0 {
            return Err(Error::InvalidAtom(format!("negative population ({rho_aa}, {rho_bb})")));
        }
        if (rho_aa + rho_bb - 1.0).abs() > PREP_TOLERANCE {
            return Err(Error::InvalidAtom(format!("populations sum to {}", rho_aa + rho_bb)));
        }
        if coh_mag < 0.0 || coh_mag > (rho_aa * rho_bb).sqrt() + PREP_TOLERANCE {
            return Err(Error::InvalidAtom(format!(
                "|rho_ab| = {coh_mag} exceeds sqrt(rho_aa rho_bb) = {}",
                (rho_aa * rho_bb).sqrt()
            )));
        }
        Ok(Self { rho_aa, rho_bb, coh_mag, phi })
    }

    /// Pure superposition `√ρ_aa |a⟩ + √ρ_bb e^{−iφ} |b⟩`.
    pub fn coherent(rho_aa: f64, phi: f64) -> Result<Self> {
        let rho_bb = 1.0 - rho_aa;
        Self::new(rho_aa, rho_bb, (rho_aa * rho_bb.max(0.0)).sqrt(), phi)
    }

    /// Mixture with no atomic coherence.
    pub fn unpolarized(rho_aa: f64) -> Result<Self> {
        Self::new(rho_aa, 1.0 - rho_aa, 0.0, 0.0)
    }

    pub fn rho_aa(&self) -> f64 {
        self.rho_aa
    }

    pub fn rho_bb(&self) -> f64 {
        self.rho_bb
    }

    pub fn coh_mag(&self) -> f64 {
        self.coh_mag
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `ρ_ab = ⟨a|ρ|b⟩`.
    pub fn rho_ab(&self) -> C64 {
        C64::from_polar(self.coh_mag, self.phi)
    }

    /// 2×2 density matrix in the order `(a, b)`.
    pub fn density_matrix(&self) -> CMatrix {
        let ab = self.rho_ab();
        CMatrix::from_row_slice(2, 2, &[C64::new(self.rho_aa, 0.0), ab, ab.conj(), C64::new(self.rho_bb, 0.0)])
    }
}

/// Truncated cavity-field density matrix with the probability already lost
/// past the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    rho: CMatrix,
    leakage: f64,
}

impl FieldState {
    pub fn from_density(rho: CMatrix, leakage: f64) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::InvalidArgument("density matrix must be square and non-empty".to_string()));
        }
        Ok(Self { rho, leakage })
    }

    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        Ok(Self::from_pure(&PureState::fock(n, cutoff)?, cutoff))
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::from_pure(&PureState::vacuum(cutoff), cutoff)
    }

    /// `|ψ⟩⟨ψ|` on `0..=cutoff`; probability of components past the cutoff
    /// is booked as leakage.
    pub fn from_pure(psi: &PureState, cutoff: usize) -> Self {
        let v = psi.resized(cutoff);
        let kept: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        let total: f64 = psi.amps().iter().map(|a| a.norm_sqr()).sum();
        let rho = &v * v.adjoint();
        Self { rho, leakage: (total - kept).max(0.0) }
    }

    pub fn cutoff(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> CMatrix {
        self.rho
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn element(&self, n: usize, m: usize) -> C64 {
        self.rho[(n, m)]
    }

    pub fn population(&self, n: usize) -> f64 {
        self.rho[(n, n)].re
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `max |ρ(n,m) − ρ(m,n)*|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.rho.nrows();
        let mut dev = 0.0f64;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `max_{n≠m} |ρ(n,m)|`.
    pub fn max_offdiag(&self) -> f64 {
        let d = self.rho.nrows();
        let mut m = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    m = m.max(self.rho[(i, j)].norm());
                }
            }
        }
        m
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest elementwise difference to another state of the same size.
    pub fn max_abs_diff(&self, other: &FieldState) -> f64 {
        self.rho.iter().zip(other.rho.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn apply_free_phase(&mut self, free_phase: f64) {
        if free_phase == 0.0 {
            return;
        }
        let d = self.rho.nrows();
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    self.rho[(i, j)] *= C64::from_polar(1.0, (i as f64 - j as f64) * free_phase);
                }
            }
        }
    }
}

/// Starting field of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialField {
    Pure(PureState),
    Mixed(FieldState),
}

impl InitialField {
    pub fn to_field(&self, cutoff: usize) -> Result<FieldState> {
        match self {
            Self::Pure(psi) => Ok(FieldState::from_pure(psi, cutoff)),
            Self::Mixed(state) => {
                if state.cutoff() != cutoff {
                    return Err(Error::InvalidArgument(format!(
                        "initial density matrix has cutoff {}, run uses {cutoff}",
                        state.cutoff()
                    )));
                }
                Ok(state.clone())
            }
        }
    }
}

/// Which route evolves the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Recursion,
    Unitary,
    /// Run both and fail on disagreement above [`PATH_TOLERANCE`].
    Both,
}

/// Parameters of one pumping run.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpConfig {
    pub kind: LadderKind,
    pub f: NonlinearityFn,
    /// Rabi angle `gτ`.
    pub g_tau: f64,
    /// Number of injected atoms `K`.
    pub atoms: usize,
    pub atom: AtomPreparation,
    pub initial: InitialField,
    pub cutoff: usize,
    /// `ω δt` accumulated by the field between atoms.
    pub free_phase: f64,
    pub method: Method,
    pub leak_budget: f64,
}

impl PumpConfig {
    /// Vacuum start, no free phase, recursion path, default leak budget.
    pub fn new(
        kind: LadderKind,
        f: NonlinearityFn,
        g_tau: f64,
        atoms: usize,
        atom: AtomPreparation,
        cutoff: usize,
    ) -> Self {
        Self {
            kind,
            f,
            g_tau,
            atoms,
            atom,
            initial: InitialField::Pure(PureState::vacuum(cutoff)),
            cutoff,
            free_phase: 0.0,
            method: Method::Recursion,
            leak_budget: LEAK_BUDGET,
        }
    }

    pub fn with_initial(mut self, initial: InitialField) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_free_phase(mut self, free_phase: f64) -> Self {
        self.free_phase = free_phase;
        self
    }

    pub fn with_leak_budget(mut self, leak_budget: f64) -> Self {
        self.leak_budget = leak_budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_tau.is_finite() && self.g_tau >= 0.0) {
            return Err(Error::InvalidArgument(format!("g_tau must be finite and non-negative, got {}", self.g_tau)));
        }
        if !self.free_phase.is_finite() {
            return Err(Error::InvalidArgument("free_phase must be finite".to_string()));
        }
        let required = 2 * self.kind.step() + 4;
        if self.cutoff < required {
            return Err(Error::CutoffTooSmall { cutoff: self.cutoff, required });
        }
        if let Some(max) = self.f.max_index() {
            if max < self.cutoff + self.kind.step() {
                return Err(Error::OutOfTableRange { n: self.cutoff + self.kind.step(), len: max + 1 });
            }
        }
        Ok(())
    }
}

/// Per-atom summary of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub k: usize,
    pub trace: f64,
    pub leakage: f64,
    pub purity: f64,
    pub mean_n: f64,
    pub var_n: f64,
    pub mandel_q: f64,
    pub max_offdiag: f64,
    pub fidelity_target: Option<f64>,
}

impl RunRecord {
    pub fn of(k: usize, state: &FieldState, target: Option<&PureState>) -> Self {
        let obs = observables(state);
        Self {
            k,
            trace: state.trace(),
            leakage: state.leakage(),
            purity: obs.purity,
            mean_n: obs.mean_n,
            var_n: obs.var_n,
            mandel_q: obs.mandel_q,
            max_offdiag: obs.max_offdiag,
            fidelity_target: target.map(|t| fidelity(state, t)),
        }
    }
}

/// Final field and the records `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpRun {
    pub state: FieldState,
    pub records: Vec<RunRecord>,
}

/// One atom's worth of evolution for a fixed kind, coupling and cutoff, with
/// `cos`/`sin(gτ√λ(m))` tabulated for `m = 0..=cutoff + s`.
#[derive(Debug, Clone)]
pub struct Propagator {
    kind: LadderKind,
    cutoff: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Propagator {
    pub fn new(kind: LadderKind, f: &NonlinearityFn, g_tau: f64, cutoff: usize) -> Result<Self> {
        let ladder = DeformedLadder::new(kind, f, cutoff + kind.step())?;
        Ok(Self::from_ladder(&ladder, g_tau, cutoff))
    }

    /// Uses the strengths of an existing ladder, which must be tabulated up
    /// to `cutoff + step`.
    pub fn from_ladder(ladder: &DeformedLadder, g_tau: f64, cutoff: usize) -> Self {
        let top = cutoff + ladder.step();
        let angles: Vec<f64> = (0..=top).map(|m| g_tau * ladder.amplitude(m)).collect();
        Self {
            kind: ladder.kind(),
            cutoff,
            cos: angles.iter().map(|t| t.cos()).collect(),
            sin: angles.iter().map(|t| t.sin()).collect(),
        }
    }

    pub fn kind(&self) -> LadderKind {
        self.kind
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Joint evolution operator on `atom ⊗ field`, atom-major: index
    /// `n` is `|a, n⟩` and `cutoff + 1 + n` is `|b, n⟩`.
    pub fn joint_unitary(&self) -> CMatrix {
        let s = self.kind.step();
        let d = self.cutoff + 1;
        let mut u = CMatrix::zeros(2 * d, 2 * d);
        for n in 0..d {
            u[(n, n)] = C64::new(self.cos[n + s], 0.0);
            u[(d + n, d + n)] = C64::new(self.cos[n], 0.0);
            if n + s < d {
                let st = C64::new(0.0, -self.sin[n + s]);
                u[(n, d + n + s)] = st;
                u[(d + n + s, n)] = st;
            }
        }
        u
    }

    /// Closed recursion on matrix elements.
    pub fn step_recursion(&self, state: &FieldState, atom: &AtomPreparation, free_phase: f64) -> FieldState {
        let s = self.kind.step();
        let n_max = self.cutoff;
        let d = n_max + 1;
        let rho = &state.rho;
        let (c, sn) = (&self.cos, &self.sin);
        let (aa, bb) = (atom.rho_aa, atom.rho_bb);
        let i = C64::new(0.0, 1.0);
        // i ρ_ab and i ρ_ba
        let up = i * atom.rho_ab();
        let down = i * atom.rho_ab().conj();

        let mut out = CMatrix::zeros(d, d);
        for n in 0..d {
            for m in 0..d {
                let mut acc = rho[(n, m)] * (aa * c[n + s] * c[m + s] + bb * c[n] * c[m]);
                if n + s < d && m + s < d {
                    acc += rho[(n + s, m + s)] * (bb * sn[n + s] * sn[m + s]);
                }
                if n >= s && m >= s {
                    acc += rho[(n - s, m - s)] * (aa * sn[n] * sn[m]);
                }
                if m + s < d {
                    acc += up * rho[(n, m + s)] * (c[n + s] * sn[m + s]);
                }
                if m >= s {
                    acc += down * rho[(n, m - s)] * (c[n] * sn[m]);
                }
                if n + s < d {
                    acc -= down * rho[(n + s, m)] * (sn[n + s] * c[m + s]);
                }
                if n >= s {
                    acc -= up * rho[(n - s, m)] * (sn[n] * c[m]);
                }
                out[(n, m)] = acc;
            }
        }
        // |a, n⟩ → |b, n + s⟩ with n + s past the cutoff
        let lost: f64 = (d..d + s).map(|top| aa * sn[top] * sn[top] * rho[(top - s, top - s)].re).sum();
        let mut next = FieldState { rho: out, leakage: state.leakage + lost };
        next.apply_free_phase(free_phase);
        next
    }

    /// `Tr_atom[U (ρ_atom ⊗ ρ_field) U†]`.
    pub fn step_unitary(&self, state: &FieldState, atom: &AtomPreparation, free_phase: f64) -> FieldState {
        let d = self.cutoff + 1;
        let u = self.joint_unitary();
        let joint = atom.density_matrix().kronecker(&state.rho);
        let evolved = &u * joint * u.adjoint();
        let field = CMatrix::from_fn(d, d, |n, m| evolved[(n, m)] + evolved[(d + n, d + m)]);
        let lost = (state.rho.trace() - field.trace()).re;
        let mut next = FieldState { rho: field, leakage: state.leakage + lost };
        next.apply_free_phase(free_phase);
        next
    }
}

/// Joint evolution operator for one atom transit.
pub fn build_joint_unitary(kind: LadderKind, f: &NonlinearityFn, g_tau: f64, cutoff: usize) -> Result<CMatrix> {
    Ok(Propagator::new(kind, f, g_tau, cutoff)?.joint_unitary())
}

/// `max |(U†U − 1)_{ij}|` over basis states with field index `≤ cutoff − s`.
pub fn unitarity_deviation(u: &CMatrix, kind: LadderKind) -> f64 {
    let d = u.nrows() / 2;
    let s = kind.step();
    let interior = d.saturating_sub(s);
    let keep: Vec<usize> = (0..interior).chain(d..d + interior).collect();
    let prod = u.adjoint() * u;
    let mut dev = 0.0f64;
    for &i in &keep {
        for &j in &keep {
            let expected = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - C64::new(expected, 0.0)).norm());
        }
    }
    dev
}

pub fn step_atom_recursion(
    state: &FieldState,
    atom: &AtomPreparation,
    kind: LadderKind,
    f: &NonlinearityFn,
    g_tau: f64,
    free_phase: f64,
) -> Result<FieldState> {
    Ok(Propagator::new(kind, f, g_tau, state.cutoff())?.step_recursion(state, atom, free_phase))
}

pub fn step_atom_unitary(
    state: &FieldState,
    atom: &AtomPreparation,
    kind: LadderKind,
    f: &NonlinearityFn,
    g_tau: f64,
    free_phase: f64,
) -> Result<FieldState> {
    Ok(Propagator::new(kind, f, g_tau, state.cutoff())?.step_unitary(state, atom, free_phase))
}

pub fn run_pumping(config: &PumpConfig) -> Result<PumpRun> {
    run_pumping_tracked(config, None)
}

/// Like [`run_pumping`], also recording the fidelity with `target` per atom.
pub fn run_pumping_tracked(config: &PumpConfig, target: Option<&PureState>) -> Result<PumpRun> {
    config.validate()?;
    let prop = Propagator::new(config.kind, &config.f, config.g_tau, config.cutoff)?;
    let mut state = config.initial.to_field(config.cutoff)?;
    let mut records = Vec::with_capacity(config.atoms + 1);
    records.push(RunRecord::of(0, &state, target));
    for k in 1..=config.atoms {
        state = match config.method {
            Method::Recursion => prop.step_recursion(&state, &config.atom, config.free_phase),
            Method::Unitary => prop.step_unitary(&state, &config.atom, config.free_phase),
            Method::Both => {
                let a = prop.step_recursion(&state, &config.atom, config.free_phase);
                let b = prop.step_unitary(&state, &config.atom, config.free_phase);
                let deviation = a.max_abs_diff(&b).max((a.leakage - b.leakage).abs());
                if !(deviation <= PATH_TOLERANCE) {
                    return Err(Error::PathMismatch { step: k, deviation });
                }
                a
            }
        };
        if state.leakage > config.leak_budget {
            return Err(Error::LeakBudgetExceeded { step: k, leakage: state.leakage, budget: config.leak_budget });
        }
        records.push(RunRecord::of(k, &state, target));
    }
    Ok(PumpRun { state, records })
}

/// Label `z = −i e^{iφ} K gτ √(ρ_aa ρ_bb)` of the state the field approaches
/// at weak coupling, for atoms in a pure superposition.
pub fn target_z(config: &PumpConfig) -> C64 {
    target_z_for(config.atoms, config.g_tau, &config.atom)
}

pub fn target_z_for(atoms: usize, g_tau: f64, atom: &AtomPreparation) -> C64 {
    let mag = atoms as f64 * g_tau * (atom.rho_aa * atom.rho_bb).sqrt();
    C64::new(0.0, -1.0) * C64::from_polar(mag, atom.phi)
}
