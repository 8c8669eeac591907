//! Weak-coupling analysis of the pumping map.
//!
//! Rescaling the density matrix by the sine products of successive atoms
//! removes the phase and coupling dependence from the recursion; to first
//! order in `gτ` the rescaled elements then obey a constant-coefficient
//! recursion whose K-fold iterate is a multinomial sum. Keeping the leading
//! term of that sum gives the closed-form pure states the field approaches.

use alloc::vec::Vec;


#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::algebra::{DeformedLadder, LadderKind, NonlinearityFn};
use crate::engine::{AtomPreparation, PumpConfig};
use crate::special::ln_factorial;
use crate::states::{truncation_tail, PureState, TAIL_TOLERANCE};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Default threshold for "much smaller than one".
pub const SMALLNESS_THRESHOLD: f64 = 0.05;

/// Below this a sine factor counts as vanishing.
const SINGULAR_SINE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakCouplingReport {
    pub g_tau: f64,
    pub nbar: f64,
    /// `gτ`.
    pub margin1: f64,
    /// `gτ √λ(n̄ + s)` with `λ` continued to real arguments.
    pub margin2: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn weak_coupling_check(config: &PumpConfig, nbar: f64) -> WeakCouplingReport {
    weak_coupling_check_with(config.kind, &config.f, config.g_tau, nbar, SMALLNESS_THRESHOLD)
}

pub fn weak_coupling_check_with(
    kind: LadderKind,
    f: &NonlinearityFn,
    g_tau: f64,
    nbar: f64,
    threshold: f64,
) -> WeakCouplingReport {
    let nbar = nbar.max(0.0);
    let margin1 = g_tau;
    let margin2 = g_tau * kind.strength_real(f, nbar + kind.step() as f64).sqrt();
    WeakCouplingReport { g_tau, nbar, margin1, margin2, threshold, pass: margin1 < threshold && margin2 < threshold }
}

/// `(n + n' + n n'/ρ_bb) / K`; small values mean the `p = 0` term of the
/// multinomial sum dominates.
pub fn dominance_margin(n: usize, m: usize, rho_bb: f64, atoms: usize) -> Result<f64> {
    if !(rho_bb > 0.0) {
        return Err(Error::InvalidArgument("dominance margin needs rho_bb > 0".into()));
    }
    if atoms == 0 {
        return Err(Error::InvalidArgument("dominance margin needs K >= 1".into()));
    }
    let (n, m) = (n as f64, m as f64);
    Ok((n + m + n * m / rho_bb) / atoms as f64)
}

fn tilde_sum(rho0: &CMatrix, atoms: usize, rho_bb: f64, step: usize, n: usize, m: usize, max_p: usize) -> C64 {
    let get = |i: usize, j: usize| {
        if i < rho0.nrows() && j < rho0.ncols() {
            rho0[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let ln_k = ln_factorial(atoms);
    let ln_bb = rho_bb.ln();
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..=n / step {
        for kp in 0..=m / step {
            let seed = get(n - step * k, m - step * kp);
            if seed == C64::new(0.0, 0.0) {
                continue;
            }
            for p in 0..=k.min(kp).min(max_p) {
                let Some(rest) = (atoms + p).checked_sub(k + kp) else { continue };
                let power = k + kp - 2 * p;
                let ln_bb_term = if power == 0 {
                    0.0
                } else if rho_bb == 0.0 {
                    continue;
                } else {
                    0.5 * power as f64 * ln_bb
                };
                let ln_coeff = ln_k
                    - ln_factorial(p)
                    - ln_factorial(k - p)
                    - ln_factorial(kp - p)
                    - ln_factorial(rest)
                    + ln_bb_term;
                acc += seed * ln_coeff.exp();
            }
        }
    }
    acc
}

/// K-fold iterate of the first-order rescaled recursion at `(n, n')`, as the
/// truncated multinomial sum over `k ≤ n/s`, `k' ≤ n'/s`, `p ≤ min(k, k')`.
/// `rho0` is the rescaled initial table; indices outside it read as zero.
pub fn tilde_solution(rho0: &CMatrix, atoms: usize, rho_bb: f64, step: usize, n: usize, m: usize) -> C64 {
    tilde_sum(rho0, atoms, rho_bb, step, n, m, usize::MAX)
}

/// Only the `p = 0` terms of [`tilde_solution`].
pub fn tilde_solution_leading(rho0: &CMatrix, atoms: usize, rho_bb: f64, step: usize, n: usize, m: usize) -> C64 {
    tilde_sum(rho0, atoms, rho_bb, step, n, m, 0)
}

/// Weak-coupling pure state grown from `psi0` by the ladder `kind`:
/// `⟨n|ψ⟩ = Σₖ zᵏ/k! √(Λ(n)/Λ(n − ks)) ⟨n − ks|ψ₀⟩` with
/// `Λ(n) = λ(n) Λ(n − s)` and `Λ(n) = 1` for `n < s`.
pub fn closed_form_state(
    psi0: &PureState,
    z: C64,
    kind: LadderKind,
    f: &NonlinearityFn,
    cutoff: usize,
) -> Result<PureState> {
    let s = kind.step();
    let work = cutoff + 2 * s;
    let ladder = DeformedLadder::new(kind, f, work)?;
    let mut ln_lambda_fact = Vec::with_capacity(work + 1);
    for n in 0..=work {
        let v = if n < s { 0.0 } else { ladder.lambda(n).ln() + ln_lambda_fact[n - s] };
        ln_lambda_fact.push(v);
    }
    let seed = psi0.resized(work);
    let (ln_z, arg) = (z.norm().ln(), z.arg());
    let zero = C64::new(0.0, 0.0);
    let amps = CVector::from_fn(work + 1, |n, _| {
        let mut acc = zero;
        for k in 0..=n / s {
            let src = seed[n - k * s];
            if src == zero {
                continue;
            }
            if k > 0 && z == zero {
                break;
            }
            let ln_zk = if k == 0 { 0.0 } else { k as f64 * ln_z };
            let ln_mag = ln_zk - ln_factorial(k) + 0.5 * (ln_lambda_fact[n] - ln_lambda_fact[n - k * s]);
            acc += src * C64::from_polar(ln_mag.exp(), k as f64 * arg);
        }
        acc
    });
    let tail = truncation_tail(&amps, cutoff, s)
        .ok_or(Error::InsufficientCutoff { cutoff, tail: f64::INFINITY, tolerance: TAIL_TOLERANCE })?;
    if tail > TAIL_TOLERANCE {
        return Err(Error::InsufficientCutoff { cutoff, tail, tolerance: TAIL_TOLERANCE });
    }
    PureState::from_amplitudes(amps.rows(0, cutoff + 1).into_owned(), tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Physical elements to phase-independent ones.
    Forward,
    /// Phase-independent elements back to physical ones.
    Inverse,
}

/// Elementwise rescaling between physical and phase-independent elements:
/// `ρ(n,n') = (i e^{−iφ})^{(n'−n)/s} G(n) G(n') ρ̃(n,n')` with
/// `G(n) = ρ_aa^{n/2s} Π sin(gτ√λ(j))` over `j ≡ n (mod s)`, `s ≤ j ≤ n`.
/// For `s = 2` this splits into the four parity sectors, with the half-integer
/// power of the phase taken on the principal branch.
pub fn tilde_transform(
    rho: &CMatrix,
    atom: &AtomPreparation,
    kind: LadderKind,
    f: &NonlinearityFn,
    g_tau: f64,
    direction: Direction,
) -> Result<CMatrix> {
    if !rho.is_square() || rho.nrows() == 0 {
        return Err(Error::InvalidArgument("table must be square and non-empty".into()));
    }
    let d = rho.nrows();
    let s = kind.step();
    if direction == Direction::Forward && !(atom.rho_aa() > 0.0) {
        return Err(Error::InvalidAtom("transform needs rho_aa > 0".into()));
    }
    let ladder = DeformedLadder::new(kind, f, d - 1)?;
    let ln_aa = atom.rho_aa().ln();

    // ln|G(n)| and the sign of G(n)
    let mut ln_g = Vec::with_capacity(d);
    let mut sign_g = Vec::with_capacity(d);
    for n in 0..d {
        let (mut ln_sin, mut sign) = (0.0, 1.0);
        if n >= s {
            let sine = (g_tau * ladder.amplitude(n)).sin();
            if direction == Direction::Forward && sine.abs() < SINGULAR_SINE {
                return Err(Error::SingularTransform { index: n });
            }
            ln_sin = ln_g[n - s] + sine.abs().ln();
            sign = sign_g[n - s] * if sine < 0.0 { -1.0 } else { 1.0 };
        }
        ln_g.push(ln_sin);
        sign_g.push(sign);
    }
    let ln_pop = |n: usize| if n == 0 { 0.0 } else { n as f64 / (2 * s) as f64 * ln_aa };
    let phase_step = core::f64::consts::FRAC_PI_2 - atom.phi();

    Ok(CMatrix::from_fn(d, d, |n, m| {
        let ln_mag = ln_g[n] + ln_g[m] + ln_pop(n) + ln_pop(m);
        let angle = (m as f64 - n as f64) / s as f64 * phase_step;
        let sign = sign_g[n] * sign_g[m];
        let x = rho[(n, m)];
        if x == C64::new(0.0, 0.0) {
            return x;
        }
        match direction {
            Direction::Forward => x * C64::from_polar(sign * (-ln_mag).exp(), -angle),
            Direction::Inverse => x * C64::from_polar(sign * ln_mag.exp(), angle),
        }
    }))
}
