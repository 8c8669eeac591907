//! Nonlinearity functions and the deformed ladder operators built from them.
//!
//! Every ladder operator here lowers the photon number by a fixed step `s`
//! and is fully described by its strength table `λ(n)`:
//! `L|n⟩ = √λ(n) |n − s⟩`, `L†|n⟩ = √λ(n + s) |n + s⟩`.
//!
//! | kind | step | λ(n)                      |
//! |------|------|---------------------------|
//! | A    | 1    | n f²(n)                   |
//! | B    | 1    | n / f²(n)                 |
//! | C    | 2    | n (n − 1) f²(n)           |
//! | B0   | 2    | ¼ · n/(n − 1) · 1/f²(n)   |
//! | B1   | 2    | ¼ · (n − 1)/n · 1/f²(n)   |
//!
//! with `λ(n) = 0` for `n < s`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::{CVector, Error, Result, C64};

/// A checked table of nonlinearity values `f(0), f(1), …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table(Vec<f64>);

impl Table {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteInTable { index });
            }
            if *v == 0.0 {
                return Err(Error::ZeroInTable { index });
            }
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty nonlinearity table".to_string()));
        }
        Ok(Table(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// The intensity dependence `f(n)` of the atom–field coupling.
///
/// Families singular at the origin take `f(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityFn {
    /// `f ≡ 1`, the ordinary Jaynes–Cummings coupling.
    Identity,
    /// `f(n) = nᵖ`.
    Power(f64),
    /// `f(n) = 1/√n`.
    InverseSqrt,
    /// Tabulated `f(0..len)`.
    Table(Table),
}

impl NonlinearityFn {
    pub fn power(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidArgument("power exponent must be finite".to_string()));
        }
        Ok(Self::Power(p))
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        Table::new(values).map(Self::Table)
    }

    /// The four families every identity is exercised against.
    pub fn test_families() -> [NonlinearityFn; 4] {
        [Self::Identity, Self::InverseSqrt, Self::Power(1.0), Self::Power(-1.0)]
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, Self::Table(_))
    }

    /// `f(n)`.
    pub fn eval(&self, n: usize) -> Result<f64> {
        match self {
            Self::Table(t) => t.0.get(n).copied().ok_or(Error::OutOfTableRange { n, len: t.0.len() }),
            _ => Ok(self.eval_real(n as f64)),
        }
    }

    /// `f(x)` at a real argument, for the named families. Tables are read at
    /// the nearest index, clamped to the table.
    pub fn eval_real(&self, x: f64) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Power(p) => {
                if x <= 0.0 {
                    1.0
                } else {
                    x.powf(*p)
                }
            }
            Self::InverseSqrt => {
                if x <= 0.0 {
                    1.0
                } else {
                    1.0 / x.sqrt()
                }
            }
            Self::Table(t) => {
                let i = x.max(0.0).round() as usize;
                t.0[i.min(t.0.len() - 1)]
            }
        }
    }

    /// Largest `n` at which `f` can be evaluated.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            Self::Table(t) => Some(t.0.len() - 1),
            _ => None,
        }
    }
}

impl fmt::Display for NonlinearityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("identity"),
            Self::InverseSqrt => f.write_str("inverse_sqrt"),
            Self::Power(p) => write!(f, "power:{p}"),
            Self::Table(t) => {
                f.write_str("table:")?;
                for (i, v) in t.0.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for NonlinearityFn {
    type Err = Error;

    /// Parses `identity`, `inverse_sqrt`, `power:<p>` or `table:<v0>,<v1>,…`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::ParseNonlinearity(String::from(s));
        match s {
            "identity" => return Ok(Self::Identity),
            "inverse_sqrt" => return Ok(Self::InverseSqrt),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("power:") {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            return Self::power(p);
        }
        if let Some(list) = s.strip_prefix("table:") {
            let values = list
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<core::result::Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            return Self::table(values);
        }
        Err(bad())
    }
}

/// The five ladder-operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderKind {
    /// `Â = â f(N̂)`.
    A,
    /// `B̂ = â / f(N̂)`, the dual of `Â`.
    B,
    /// `Ĉ = â² f(N̂)`.
    C,
    /// Even-sector dual of `Ĉ`.
    B0,
    /// Odd-sector dual of `Ĉ`.
    B1,
}

impl LadderKind {
    pub const ALL: [LadderKind; 5] = [Self::A, Self::B, Self::C, Self::B0, Self::B1];

    /// Photon-number change of one application.
    pub fn step(self) -> usize {
        match self {
            Self::A | Self::B => 1,
            Self::C | Self::B0 | Self::B1 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::B0 => "B0",
            Self::B1 => "B1",
        }
    }

    /// `λ(x)` at a real argument; used for weak-coupling margins at a mean
    /// photon number.
    pub fn strength_real(self, f: &NonlinearityFn, x: f64) -> f64 {
        if x < self.step() as f64 {
            return 0.0;
        }
        let fx = f.eval_real(x);
        strength_formula(self, x, fx)
    }
}

impl fmt::Display for LadderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LadderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            "C" | "c" => Ok(Self::C),
            "B0" | "b0" => Ok(Self::B0),
            "B1" | "b1" => Ok(Self::B1),
            other => Err(Error::InvalidArgument(alloc::format!("unknown ladder kind `{other}`"))),
        }
    }
}

fn strength_formula(kind: LadderKind, x: f64, fx: f64) -> f64 {
    let f2 = fx * fx;
    match kind {
        LadderKind::A => x * f2,
        LadderKind::B => x / f2,
        LadderKind::C => x * (x - 1.0) * f2,
        LadderKind::B0 => 0.25 * x / (x - 1.0) / f2,
        LadderKind::B1 => 0.25 * (x - 1.0) / x / f2,
    }
}

/// `λ(n)` for the given kind.
pub fn ladder_strength(kind: LadderKind, f: &NonlinearityFn, n: usize) -> Result<f64> {
    if n < kind.step() {
        return Ok(0.0);
    }
    let fx = f.eval(n)?;
    Ok(strength_formula(kind, n as f64, fx))
}

/// Parity sector of the Fock basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    All,
    Even,
    Odd,
}

impl Sector {
    pub fn contains(self, n: usize) -> bool {
        match self {
            Self::All => true,
            Self::Even => n % 2 == 0,
            Self::Odd => n % 2 == 1,
        }
    }
}

/// A step-`s` lowering operator given by its strength table.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedLadder {
    kind: LadderKind,
    lambda: Vec<f64>,
}

impl DeformedLadder {
    /// Tabulates `λ(0..=max_n)`.
    pub fn new(kind: LadderKind, f: &NonlinearityFn, max_n: usize) -> Result<Self> {
        let lambda = (0..=max_n)
            .map(|n| ladder_strength(kind, f, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, lambda })
    }

    /// Builds a ladder from an explicit strength table. Entries below the
    /// step must be zero and all entries non-negative.
    pub fn from_strengths(kind: LadderKind, lambda: Vec<f64>) -> Result<Self> {
        for (n, l) in lambda.iter().enumerate() {
            if !(l.is_finite() && *l >= 0.0) || (n < kind.step() && *l != 0.0) {
                return Err(Error::InvalidArgument(alloc::format!("invalid strength λ({n}) = {l}")));
            }
        }
        Ok(Self { kind, lambda })
    }

    /// Copy with every nonzero-by-definition strength shifted by `eps`.
    pub fn perturbed(&self, eps: f64) -> Self {
        let step = self.step();
        let lambda = self
            .lambda
            .iter()
            .enumerate()
            .map(|(n, l)| if n >= step { l + eps } else { *l })
            .collect();
        Self { kind: self.kind, lambda }
    }

    pub fn kind(&self) -> LadderKind {
        self.kind
    }

    pub fn step(&self) -> usize {
        self.kind.step()
    }

    pub fn max_n(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn strengths(&self) -> &[f64] {
        &self.lambda
    }

    /// `λ(n)`; panics past the tabulated range.
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    /// `⟨n − s|L|n⟩ = √λ(n)`.
    pub fn amplitude(&self, n: usize) -> f64 {
        self.lambda[n].sqrt()
    }

    /// Lowering matrix on `0..=cutoff`; the raising matrix is its transpose.
    pub fn matrix(&self, cutoff: usize) -> Result<DMatrix<f64>> {
        let s = self.step();
        if cutoff < s {
            return Err(Error::CutoffTooSmall { cutoff, required: s });
        }
        if cutoff > self.max_n() {
            return Err(Error::CutoffTooSmall { cutoff: self.max_n(), required: cutoff });
        }
        let mut m = DMatrix::zeros(cutoff + 1, cutoff + 1);
        for n in s..=cutoff {
            m[(n - s, n)] = self.amplitude(n);
        }
        Ok(m)
    }

    /// `L v` on a truncated amplitude vector.
    pub fn lower(&self, v: &CVector) -> CVector {
        let s = self.step();
        let len = v.len();
        CVector::from_fn(len, |n, _| {
            if n + s < len {
                v[n + s] * self.amplitude(n + s)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `L† v` on a truncated amplitude vector; components pushed past the end
    /// are dropped.
    pub fn raise(&self, v: &CVector) -> CVector {
        let s = self.step();
        CVector::from_fn(v.len(), |n, _| {
            if n >= s {
                v[n - s] * self.amplitude(n)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `max |⟨n|[L, D†]|n'⟩ − δ_{nn'}|` over the interior block of `sector`,
    /// where `self` is `L` and `dual` is `D`.
    pub fn dual_deviation(&self, dual: &DeformedLadder, cutoff: usize, sector: Sector) -> Result<f64> {
        if self.step() != dual.step() {
            return Err(Error::IncompatibleKinds { lower: self.kind.name(), dual: dual.kind.name() });
        }
        let s = self.step();
        if cutoff < 2 * s {
            return Err(Error::CutoffTooSmall { cutoff, required: 2 * s });
        }
        let l = self.matrix(cutoff)?;
        let d = dual.matrix(cutoff)?;
        let comm = &l * d.transpose() - d.transpose() * &l;
        let interior = cutoff - s;
        Ok(max_block_deviation(&comm, interior, sector, |_| 1.0))
    }

    /// Deviation of `[L, L†]` from `diag(λ(n + s) − λ(n))` on the interior block.
    pub fn heisenberg_deviation(&self, cutoff: usize) -> Result<f64> {
        let s = self.step();
        if cutoff < 2 * s {
            return Err(Error::CutoffTooSmall { cutoff, required: 2 * s });
        }
        let l = self.matrix(cutoff)?;
        let comm = &l * l.transpose() - l.transpose() * &l;
        Ok(max_block_deviation(&comm, cutoff - s, Sector::All, |n| self.lambda(n + s) - self.lambda(n)))
    }

    /// `max(‖[N, L] + sL‖, ‖[N, L†] − sL†‖)` on the interior block, entrywise.
    pub fn number_commutator_deviation(&self, cutoff: usize) -> Result<f64> {
        let s = self.step() as f64;
        let l = self.matrix(cutoff)?;
        let number = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(cutoff + 1, |n, _| n as f64));
        let lt = l.transpose();
        let low = &number * &l - &l * &number + &l * s;
        let up = &number * &lt - &lt * &number - &lt * s;
        let interior = cutoff - self.step();
        let mut dev = 0.0f64;
        for i in 0..=interior {
            for j in 0..=interior {
                dev = dev.max(low[(i, j)].abs()).max(up[(i, j)].abs());
            }
        }
        Ok(dev)
    }
}

fn max_block_deviation(
    comm: &DMatrix<f64>,
    interior: usize,
    sector: Sector,
    diag: impl Fn(usize) -> f64,
) -> f64 {
    let mut dev = 0.0f64;
    for i in (0..=interior).filter(|&i| sector.contains(i)) {
        for j in (0..=interior).filter(|&j| sector.contains(j)) {
            let expected = if i == j { diag(i) } else { 0.0 };
            dev = dev.max((comm[(i, j)] - expected).abs());
        }
    }
    dev
}

/// Matrix of the lowering operator of `kind` on `0..=cutoff`.
pub fn ladder_matrix(kind: LadderKind, f: &NonlinearityFn, cutoff: usize) -> Result<DMatrix<f64>> {
    if cutoff < kind.step() {
        return Err(Error::CutoffTooSmall { cutoff, required: kind.step() });
    }
    DeformedLadder::new(kind, f, cutoff)?.matrix(cutoff)
}

/// Interior deviation of `[L, D†]` from the identity for the ladders of
/// `lower` and `dual` built from the same `f`.
pub fn commutator_deviation(
    lower: LadderKind,
    dual: LadderKind,
    f: &NonlinearityFn,
    cutoff: usize,
    sector: Sector,
) -> Result<f64> {
    if lower.step() != dual.step() {
        return Err(Error::IncompatibleKinds { lower: lower.name(), dual: dual.name() });
    }
    let l = DeformedLadder::new(lower, f, cutoff)?;
    let d = DeformedLadder::new(dual, f, cutoff)?;
    l.dual_deviation(&d, cutoff, sector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn eval_named_families() {
        assert_eq!(NonlinearityFn::Identity.eval(5).unwrap(), 1.0);
        assert_eq!(NonlinearityFn::InverseSqrt.eval(4).unwrap(), 0.5);
        assert_eq!(NonlinearityFn::Power(1.0).eval(3).unwrap(), 3.0);
        assert_eq!(NonlinearityFn::InverseSqrt.eval(0).unwrap(), 1.0);
        assert_eq!(NonlinearityFn::Power(-1.0).eval(0).unwrap(), 1.0);
    }

    #[test]
    fn table_errors() {
        assert_eq!(NonlinearityFn::table(vec![1.0, 0.0, 1.0]), Err(Error::ZeroInTable { index: 1 }));
        let t = NonlinearityFn::table(vec![1.0, 2.0]).unwrap();
        assert_eq!(t.eval(1).unwrap(), 2.0);
        assert_eq!(t.eval(2), Err(Error::OutOfTableRange { n: 2, len: 2 }));
        assert_eq!("table:1,0,1".parse::<NonlinearityFn>(), Err(Error::ZeroInTable { index: 1 }));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["identity", "inverse_sqrt", "power:1", "power:-0.5", "table:1,0.5,2"] {
            let f: NonlinearityFn = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("power:x".parse::<NonlinearityFn>().is_err());
        assert!("cosh".parse::<NonlinearityFn>().is_err());
    }

    #[test]
    fn strength_examples() {
        let id = NonlinearityFn::Identity;
        assert_eq!(ladder_strength(LadderKind::A, &id, 5).unwrap(), 5.0);
        assert_eq!(ladder_strength(LadderKind::C, &id, 1).unwrap(), 0.0);
        assert!(close(ladder_strength(LadderKind::B0, &id, 4).unwrap(), 1.0 / 3.0));
        assert!(close(ladder_strength(LadderKind::B1, &id, 4).unwrap(), 3.0 / 16.0));
        assert!(close(ladder_strength(LadderKind::B, &NonlinearityFn::InverseSqrt, 3).unwrap(), 9.0));
    }

    #[test]
    fn below_step_is_zero() {
        for f in NonlinearityFn::test_families() {
            for kind in LadderKind::ALL {
                for n in 0..kind.step() {
                    assert_eq!(ladder_strength(kind, &f, n).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn matrix_examples() {
        let id = NonlinearityFn::Identity;
        let a = ladder_matrix(LadderKind::A, &id, 3).unwrap();
        for n in 1..=3 {
            assert!(close(a[(n - 1, n)], (n as f64).sqrt()));
        }
        assert_eq!(a.iter().filter(|x| **x != 0.0).count(), 3);

        let c = ladder_matrix(LadderKind::C, &id, 4).unwrap();
        assert!(close(c[(0, 2)], 2f64.sqrt()));
        assert!(close(c[(1, 3)], 6f64.sqrt()));
        assert!(close(c[(2, 4)], 12f64.sqrt()));

        let b = ladder_matrix(LadderKind::B, &NonlinearityFn::InverseSqrt, 2).unwrap();
        assert!(close(b[(0, 1)], 1.0));
        assert!(close(b[(1, 2)], 2.0));

        assert_eq!(
            ladder_matrix(LadderKind::C, &id, 1),
            Err(Error::CutoffTooSmall { cutoff: 1, required: 2 })
        );
    }

    #[test]
    fn duality_examples() {
        let id = NonlinearityFn::Identity;
        assert!(commutator_deviation(LadderKind::A, LadderKind::B, &id, 16, Sector::All).unwrap() < 1e-12);
        let inv = NonlinearityFn::InverseSqrt;
        assert!(commutator_deviation(LadderKind::A, LadderKind::B, &inv, 16, Sector::All).unwrap() < 1e-12);
        let lin = NonlinearityFn::Power(1.0);
        assert!(commutator_deviation(LadderKind::C, LadderKind::B0, &lin, 16, Sector::Even).unwrap() < 1e-12);
        // the pairing only holds in its own sector
        assert!(commutator_deviation(LadderKind::C, LadderKind::B0, &lin, 16, Sector::Odd).unwrap() > 0.1);
        assert!(commutator_deviation(LadderKind::C, LadderKind::B1, &lin, 16, Sector::Even).unwrap() > 0.1);
        assert_eq!(
            commutator_deviation(LadderKind::A, LadderKind::C, &id, 16, Sector::All),
            Err(Error::IncompatibleKinds { lower: "A", dual: "C" })
        );
    }

    #[test]
    fn undeformed_a_and_b_are_standard() {
        let id = NonlinearityFn::Identity;
        let a = ladder_matrix(LadderKind::A, &id, 10).unwrap();
        let b = ladder_matrix(LadderKind::B, &id, 10).unwrap();
        assert_eq!(a, b);
        assert!(DeformedLadder::new(LadderKind::A, &id, 10).unwrap().heisenberg_deviation(10).unwrap() < 1e-12);
    }

    #[test]
    fn perturbation_breaks_duality() {
        let f = NonlinearityFn::InverseSqrt;
        let a = DeformedLadder::new(LadderKind::A, &f, 16).unwrap().perturbed(1e-6);
        let b = DeformedLadder::new(LadderKind::B, &f, 16).unwrap();
        assert!(a.dual_deviation(&b, 16, Sector::All).unwrap() > 1e-8);
    }

    #[test]
    fn lower_and_raise_match_matrix() {
        let f = NonlinearityFn::Power(1.0);
        let l = DeformedLadder::new(LadderKind::C, &f, 8).unwrap();
        let m = l.matrix(8).unwrap().map(|x| C64::new(x, 0.0));
        let v = CVector::from_fn(9, |i, _| C64::new(i as f64 * 0.3 - 1.0, 0.1 * i as f64));
        assert!((l.lower(&v) - &m * &v).norm() < 1e-12);
        assert!((l.raise(&v) - m.transpose() * &v).norm() < 1e-12);
    }

    #[test]
    fn real_argument_strength() {
        let id = NonlinearityFn::Identity;
        assert!(close(LadderKind::A.strength_real(&id, 1.25), 1.25));
        assert!(close(LadderKind::C.strength_real(&id, 6.0), 30.0));
        assert_eq!(LadderKind::C.strength_real(&id, 1.5), 0.0);
    }
}
