//! Photon statistics and overlaps of simulated fields with target states.

use crate::engine::FieldState;
use crate::states::PureState;
use crate::C64;

/// Mean-photon-number threshold below which the Mandel parameter is reported as 0.
pub const MANDEL_MEAN_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSet {
    pub mean_n: f64,
    pub var_n: f64,
    pub mandel_q: f64,
    pub purity: f64,
    /// Share of the retained probability on even Fock states.
    pub parity_even_weight: f64,
    pub max_offdiag: f64,
}

/// `⟨ψ|ρ|ψ⟩`; the target is zero-padded or cut to the field's cutoff.
pub fn fidelity(rho: &FieldState, target: &PureState) -> f64 {
    let psi = target.resized(rho.cutoff());
    let m = rho.rho();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..psi.len() {
        if psi[i] == C64::new(0.0, 0.0) {
            continue;
        }
        let mut row = C64::new(0.0, 0.0);
        for j in 0..psi.len() {
            row += m[(i, j)] * psi[j];
        }
        acc += psi[i].conj() * row;
    }
    acc.re
}

pub fn observables(rho: &FieldState) -> ObservableSet {
    let d = rho.cutoff() + 1;
    let m = rho.rho();
    let (mut mean, mut second, mut even, mut total) = (0.0, 0.0, 0.0, 0.0);
    for n in 0..d {
        let p = m[(n, n)].re;
        let nf = n as f64;
        mean += nf * p;
        second += nf * nf * p;
        total += p;
        if n % 2 == 0 {
            even += p;
        }
    }
    let var = second - mean * mean;
    let mandel_q = if mean < MANDEL_MEAN_FLOOR { 0.0 } else { var / mean - 1.0 };
    // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
    let purity = m.iter().map(|x| x.norm_sqr()).sum();
    ObservableSet {
        mean_n: mean,
        var_n: var,
        mandel_q,
        purity,
        parity_even_weight: if total > 0.0 { even / total } else { 0.0 },
        max_offdiag: rho.max_offdiag(),
    }
}
