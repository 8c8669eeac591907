//! Analytic nonlinear coherent states on a truncated Fock space.
//!
//! Amplitudes are accumulated as `ln|cₘ|` plus a phase `m·arg z`, so the
//! factorials in the squeezed families never overflow. The squared norm
//! dropped past the cutoff is bounded with a ratio test and recorded on the
//! state as `tail_bound`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;


#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::algebra::{DeformedLadder, LadderKind, NonlinearityFn};
use crate::special::geometric_tail;
use crate::{CVector, Error, Result, C64};

/// Default relative tolerance on the truncated tail.
pub const TAIL_TOLERANCE: f64 = 1e-14;

/// A normalized truncated pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
    tail_bound: f64,
}

impl PureState {
    /// Normalizes `amps`; fails on a zero vector.
    pub fn from_amplitudes(amps: CVector, tail_bound: f64) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument(format!("cannot normalize amplitudes with norm {norm}")));
        }
        Ok(Self { amps: amps / C64::new(norm, 0.0), tail_bound: tail_bound.max(0.0) })
    }

    /// The Fock state `|n⟩` on `0..=cutoff`.
    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::CutoffTooSmall { cutoff, required: n });
        }
        let mut amps = CVector::zeros(cutoff + 1);
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self { amps, tail_bound: 0.0 })
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::fock(0, cutoff).expect("vacuum fits any cutoff")
    }

    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn amp(&self, n: usize) -> C64 {
        self.amps.get(n).copied().unwrap_or_default()
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn probability(&self, n: usize) -> f64 {
        self.amp(n).norm_sqr()
    }

    /// Amplitudes zero-padded or cut to `0..=cutoff`.
    pub fn resized(&self, cutoff: usize) -> CVector {
        CVector::from_fn(cutoff + 1, |n, _| self.amp(n))
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        let len = self.amps.len().min(other.amps.len());
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..len {
            acc += self.amps[n].conj() * other.amps[n];
        }
        acc.norm_sqr()
    }
}

/// The six state families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateTag {
    /// Eigenstate of `Â`, coefficients `zⁿ / (√n! f(n)!)`.
    Nlcs,
    /// Eigenstate of `B̂`, coefficients `zⁿ f(n)! / √n!`.
    NlcsDual,
    /// Nonlinear squeezed vacuum, `zᵐ √(2m)! f(2m)!! / m!` on `|2m⟩`.
    SqVac,
    /// Nonlinear squeezed first excited state, `zᵐ √(2m+1)! f(2m+1)!! / m!` on `|2m+1⟩`.
    SqFirst,
    /// Even nonlinear coherent state, `zᵐ / (√(2m)! f(2m)!!)` on `|2m⟩`.
    EvenNlcs,
    /// Odd nonlinear coherent state, `zᵐ / (√(2m+1)! f(2m+1)!!)` on `|2m+1⟩`.
    OddNlcs,
}

impl StateTag {
    pub const ALL: [StateTag; 6] =
        [Self::Nlcs, Self::NlcsDual, Self::SqVac, Self::SqFirst, Self::EvenNlcs, Self::OddNlcs];

    pub fn name(self) -> &'static str {
        match self {
            Self::Nlcs => "nlcs",
            Self::NlcsDual => "nlcs_dual",
            Self::SqVac => "sq_vac",
            Self::SqFirst => "sq_first",
            Self::EvenNlcs => "even_nlcs",
            Self::OddNlcs => "odd_nlcs",
        }
    }

    /// Spacing of the populated Fock states.
    pub fn stride(self) -> usize {
        match self {
            Self::Nlcs | Self::NlcsDual => 1,
            _ => 2,
        }
    }

    /// Lowest populated Fock state.
    pub fn offset(self) -> usize {
        match self {
            Self::SqFirst | Self::OddNlcs => 1,
            _ => 0,
        }
    }

    /// Fock index of the m-th term.
    pub fn index(self, m: usize) -> usize {
        self.offset() + self.stride() * m
    }

    /// `ln|cₘ/cₘ₋₁|` without the power of `z`, for `m ≥ 1`.
    fn log_increment(self, f: &NonlinearityFn, m: usize) -> Result<f64> {
        let mf = m as f64;
        let n = self.index(m);
        let nf = n as f64;
        let lf = f.eval(n)?.abs().ln();
        Ok(match self {
            Self::Nlcs => -0.5 * mf.ln() - lf,
            Self::NlcsDual => -0.5 * mf.ln() + lf,
            Self::SqVac | Self::SqFirst => 0.5 * (nf * (nf - 1.0)).ln() + lf - mf.ln(),
            Self::EvenNlcs | Self::OddNlcs => -0.5 * (nf * (nf - 1.0)).ln() - lf,
        })
    }

    /// `|cₘ|²/|cₘ₊₁|² · |z|²`: the sequence whose limit bounds `|z|²`.
    pub fn bound_sequence(self, f: &NonlinearityFn, m: usize) -> Result<f64> {
        Ok((-2.0 * self.log_increment(f, m + 1)?).exp())
    }

    /// The ladder kind this family is an eigenstate of, with its eigenvalue `z`.
    pub fn eigen_operator(self) -> LadderKind {
        match self {
            Self::Nlcs => LadderKind::A,
            Self::NlcsDual => LadderKind::B,
            Self::SqVac => LadderKind::B0,
            Self::SqFirst => LadderKind::B1,
            Self::EvenNlcs | Self::OddNlcs => LadderKind::C,
        }
    }
}

impl fmt::Display for StateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown state family `{s}`")))
    }
}

/// A state family with its nonlinearity and complex label.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFamily {
    pub tag: StateTag,
    pub f: NonlinearityFn,
    pub z: C64,
}

impl StateFamily {
    pub fn new(tag: StateTag, f: NonlinearityFn, z: C64) -> Self {
        Self { tag, f, z }
    }

    pub fn build(&self, cutoff: usize) -> Result<PureState> {
        build_state(self, cutoff)
    }
}

/// Largest admissible `|z|²` for `tag` under `f`, or `+∞`.
///
/// The bound sequence is evaluated at `m = 10³, 10⁴, 10⁵`; geometric
/// shrinking of successive differences is extrapolated to the limit, while
/// differences that do not shrink (or values past `10¹²`) mean unbounded.
pub fn convergence_bound(tag: StateTag, f: &NonlinearityFn) -> Result<f64> {
    if f.is_tabulated() {
        return Err(Error::NoAsymptotics);
    }
    let b1 = tag.bound_sequence(f, 1_000)?;
    let b2 = tag.bound_sequence(f, 10_000)?;
    let b3 = tag.bound_sequence(f, 100_000)?;
    if !b3.is_finite() || b3 > 1e12 {
        return Ok(f64::INFINITY);
    }
    let d1 = b2 - b1;
    let d2 = b3 - b2;
    let noise = 1e-12 * b3.abs().max(1e-300);
    if d1.abs() <= noise && d2.abs() <= noise {
        return Ok(b3);
    }
    let r = d2 / d1;
    if d1 > 0.0 && d2 > 0.0 && r >= 1.0 {
        return Ok(f64::INFINITY);
    }
    if r.is_finite() && r.abs() < 1.0 {
        return Ok((b3 + d2 * r / (1.0 - r)).max(0.0));
    }
    Ok(b3.max(0.0))
}

fn check_convergence(tag: StateTag, f: &NonlinearityFn, z: C64) -> Result<()> {
    if f.is_tabulated() {
        return Ok(());
    }
    let bound = convergence_bound(tag, f)?;
    let z_sq = z.norm_sqr();
    if bound.is_finite() && z_sq >= bound && z_sq > 0.0 {
        return Err(Error::Divergent { family: tag.name(), z_sq, bound });
    }
    Ok(())
}

/// Builds the normalized state of `family` on `0..=cutoff` with the default
/// tail tolerance.
pub fn build_state(family: &StateFamily, cutoff: usize) -> Result<PureState> {
    build_state_with(family, cutoff, TAIL_TOLERANCE)
}

pub fn build_state_with(family: &StateFamily, cutoff: usize, tail_tolerance: f64) -> Result<PureState> {
    let StateFamily { tag, f, z } = family;
    let tag = *tag;
    if tag.offset() > cutoff {
        return Err(Error::CutoffTooSmall { cutoff, required: tag.offset() });
    }
    check_convergence(tag, f, *z)?;

    let terms = (cutoff - tag.offset()) / tag.stride() + 1;
    let ln_z = z.norm().ln();
    let arg = z.arg();
    let log_amp = |m: usize, log_coeff: f64| if m == 0 { log_coeff } else { m as f64 * ln_z + log_coeff };

    let mut logs = Vec::with_capacity(terms);
    let mut acc = 0.0;
    for m in 0..terms {
        if m > 0 {
            acc += tag.log_increment(f, m)?;
        }
        logs.push(log_amp(m, acc));
    }
    let next_log = match tag.log_increment(f, terms) {
        Ok(inc) => Some(log_amp(terms, acc + inc)),
        Err(Error::OutOfTableRange { .. }) => None,
        Err(e) => return Err(e),
    };

    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (2.0 * (l - peak)).exp()).collect();
    let next = match next_log {
        Some(l) => (2.0 * (l - peak)).exp(),
        None => match weights.as_slice() {
            [.., before, last] if *before > 0.0 => last * last / before,
            _ => f64::INFINITY,
        },
    };
    let tail = match geometric_tail(&weights, next) {
        Some(t) => t,
        None => return Err(Error::InsufficientCutoff { cutoff, tail: f64::INFINITY, tolerance: tail_tolerance }),
    };
    if tail > tail_tolerance {
        return Err(Error::InsufficientCutoff { cutoff, tail, tolerance: tail_tolerance });
    }

    let mut amps = CVector::zeros(cutoff + 1);
    for (m, l) in logs.iter().enumerate() {
        let mag = (l - peak).exp();
        amps[tag.index(m)] = C64::from_polar(mag, m as f64 * arg);
    }
    PureState::from_amplitudes(amps, tail)
}

/// Relative squared norm past `cutoff` estimated from an amplitude vector
/// computed on a larger space, per residue class modulo `step`.
pub(crate) fn truncation_tail(extended: &CVector, cutoff: usize, step: usize) -> Option<f64> {
    let total: f64 = extended.iter().take(cutoff + 1).map(|a| a.norm_sqr()).sum();
    if total <= 0.0 {
        return Some(0.0);
    }
    let mut tail = 0.0;
    for r in 0..step {
        let kept: Vec<f64> = (r..=cutoff).step_by(step).map(|n| extended[n].norm_sqr()).collect();
        let first_out = (r..extended.len()).step_by(step).find(|&n| n > cutoff);
        let Some(next_n) = first_out else { continue };
        let next = extended[next_n].norm_sqr();
        let class_total: f64 = kept.iter().sum();
        let class_tail = geometric_tail(&kept, next)?;
        tail += class_tail * class_total / total;
    }
    Some(tail)
}

/// The four displacement operators with a factorizable exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplacementPair {
    /// `exp(z B̂† − z* Â)`
    Df,
    /// `exp(z Â† − z* B̂)`
    DfPrime,
    /// `exp(z Ĉ† − z* B̂₀)`
    D0,
    /// `exp(z Ĉ† − z* B̂₁)`
    D1,
}

impl DisplacementPair {
    pub const ALL: [DisplacementPair; 4] = [Self::Df, Self::DfPrime, Self::D0, Self::D1];

    /// `(raising kind, lowering kind)`.
    pub fn kinds(self) -> (LadderKind, LadderKind) {
        match self {
            Self::Df => (LadderKind::B, LadderKind::A),
            Self::DfPrime => (LadderKind::A, LadderKind::B),
            Self::D0 => (LadderKind::C, LadderKind::B0),
            Self::D1 => (LadderKind::C, LadderKind::B1),
        }
    }

    /// The family the operator produces from its natural seed.
    pub fn family(self) -> StateTag {
        match self {
            Self::Df => StateTag::Nlcs,
            Self::DfPrime => StateTag::NlcsDual,
            Self::D0 => StateTag::SqVac,
            Self::D1 => StateTag::SqFirst,
        }
    }

    /// `|0⟩` except for `D1`, which acts on `|1⟩`.
    pub fn natural_seed(self) -> usize {
        match self {
            Self::D1 => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Df => "D_f",
            Self::DfPrime => "D'_f",
            Self::D0 => "D0",
            Self::D1 => "D1",
        }
    }
}

/// `Σₖ (c X)ᵏ/k! v` for a nilpotent step operator `X` on a finite space.
fn nilpotent_exp(v: &CVector, c: C64, apply: impl Fn(&CVector) -> CVector, max_terms: usize) -> CVector {
    let mut sum = v.clone();
    let mut term = v.clone();
    for k in 1..=max_terms {
        term = apply(&term) * (c / k as f64);
        if term.iter().all(|a| *a == C64::new(0.0, 0.0)) {
            break;
        }
        sum += &term;
    }
    sum
}

/// Applies the displacement `pair` to `seed` through the disentangled form
/// `e^{−|z|²/2} e^{z R} e^{−z* L}` and normalizes.
pub fn displacement_apply(
    pair: DisplacementPair,
    f: &NonlinearityFn,
    z: C64,
    seed: &PureState,
    cutoff: usize,
) -> Result<PureState> {
    displacement_apply_with(pair, f, z, seed, cutoff, TAIL_TOLERANCE)
}

pub fn displacement_apply_with(
    pair: DisplacementPair,
    f: &NonlinearityFn,
    z: C64,
    seed: &PureState,
    cutoff: usize,
    tail_tolerance: f64,
) -> Result<PureState> {
    check_convergence(pair.family(), f, z)?;
    let (raise_kind, lower_kind) = pair.kinds();
    let step = raise_kind.step();
    let work = cutoff + 2 * step;
    let raise = DeformedLadder::new(raise_kind, f, work)?;
    let lower = DeformedLadder::new(lower_kind, f, work)?;
    let max_terms = work / step + 1;

    let v = seed.resized(work);
    let v = nilpotent_exp(&v, -z.conj(), |x| lower.lower(x), max_terms);
    let u = nilpotent_exp(&v, z, |x| raise.raise(x), max_terms) * C64::new((-z.norm_sqr() / 2.0).exp(), 0.0);

    let tail = truncation_tail(&u, cutoff, step)
        .ok_or(Error::InsufficientCutoff { cutoff, tail: f64::INFINITY, tolerance: tail_tolerance })?;
    if tail > tail_tolerance {
        return Err(Error::InsufficientCutoff { cutoff, tail, tolerance: tail_tolerance });
    }
    PureState::from_amplitudes(u.rows(0, cutoff + 1).into_owned(), tail)
}

/// `‖L ψ − z ψ‖` over the components `n ≤ cutoff − step`.
pub fn eigenrelation_residual(kind: LadderKind, state: &PureState, z: C64, f: &NonlinearityFn) -> Result<f64> {
    let cutoff = state.cutoff();
    let step = kind.step();
    if cutoff < step {
        return Err(Error::CutoffTooSmall { cutoff, required: step });
    }
    let ladder = DeformedLadder::new(kind, f, cutoff)?;
    let lowered = ladder.lower(state.amps());
    let mut acc = 0.0;
    for n in 0..=cutoff - step {
        acc += (lowered[n] - z * state.amps()[n]).norm_sqr();
    }
    Ok(acc.sqrt())
}
