//! Small numeric helpers shared by the state builders and the approximations.

/// `ln(n!)`.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Relative geometric bound on the squared norm left out past the last kept
/// term of a series, given the last kept weights and the first dropped one.
///
/// `kept` holds the squared magnitudes inside the cutoff in support order,
/// `next` the first weight beyond it. Returns `None` when the ratios have not
/// fallen below one yet.
pub(crate) fn geometric_tail(kept: &[f64], next: f64) -> Option<f64> {
    let total: f64 = kept.iter().sum();
    if total <= 0.0 {
        return Some(0.0);
    }
    let last = *kept.last()?;
    if next == 0.0 {
        return Some(0.0);
    }
    if last == 0.0 {
        // Series re-emerges past a zero term; nothing to extrapolate from.
        return None;
    }
    let mut ratio = next / last;
    if kept.len() >= 2 {
        let before = kept[kept.len() - 2];
        if before > 0.0 {
            ratio = ratio.max(last / before);
        }
    }
    if !(ratio < 1.0) {
        return None;
    }
    Some(next / (1.0 - ratio) / total)
}
