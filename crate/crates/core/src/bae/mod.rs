//! Logarithmic Bethe-ansatz equations for the three reference-state choices.
//!
//! Every state is described by three sets of rapidities: `k` (N charge
//! rapidities), `λ` (M first-level spin rapidities) and `μ` (M' second-level
//! spin rapidities), each pinned by a set of half-integer quantum numbers.
//!
//! With `Θ_n(x) = −2 arctan(x / (n c))` the equations read, as residuals
//! that vanish on a solution:
//!
//! | case | k-equation                       | λ-equation                                   | μ-equation               |
//! |------|----------------------------------|----------------------------------------------|--------------------------|
//! | BFF  | `kL − 2πI − ΣΘ₁(k−k) − ΣΘ₋½(k−λ)` | `2πJ − ΣΘ₋½(λ−k) − ΣΘ½(λ−μ)`                 | `2πJ' − ΣΘ₋½(μ−λ) − ΣΘ₁(μ−μ)` |
//! | FBF  | `kL − 2πI − ΣΘ½(k−λ)`            | `2πJ − ΣΘ₋½(λ−k) − ΣΘ½(λ−μ)`                 | `2πJ' − ΣΘ₋½(μ−λ)`       |
//! | FFB  | `kL − 2πI − ΣΘ½(k−λ)`            | `2πJ − ΣΘ₋½(λ−k) − ΣΘ₁(λ−λ) − ΣΘ₋½(λ−μ)`     | `2πJ' − ΣΘ₋½(μ−λ)`       |
//!
//! Self-interaction sums run over all indices including the diagonal one;
//! `Θ(0) = 0` and the diagonal term is constant in the roots, so it drops out
//! of both the residual and the Jacobian.

mod solver;

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::CaseKind;
use crate::error::{Error, Result};

pub use solver::{solve, solve_with, SolveReport, SolverOptions, Strategy};

/// An integer or half-odd integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_doubled(doubled: i64) -> Self {
        HalfInt(doubled)
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub const fn doubled(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn neg(self) -> Self {
        HalfInt(-self.0)
    }

    pub const fn offset(self, doubled: i64) -> Self {
        HalfInt(self.0 + doubled)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `3`, `-3/2`, or a decimal such as `1.5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("'{s}' is not an integer or half-integer"));
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "2" => Ok(HalfInt(num)),
                "1" => Ok(HalfInt(2 * num)),
                _ => Err(bad()),
            };
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        let doubled = 2.0 * x;
        if !doubled.is_finite() || doubled.fract() != 0.0 {
            return Err(bad());
        }
        Ok(HalfInt(doubled as i64))
    }
}

/// Particle numbers by species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Populations {
    pub bosons: usize,
    pub up: usize,
    pub down: usize,
}

impl Populations {
    pub fn total(&self) -> usize {
        self.bosons + self.up + self.down
    }

    pub fn fermions(&self) -> usize {
        self.up + self.down
    }
}

/// Problem definition: reference-state case, particle and magnon counts,
/// box length and coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub case: CaseKind,
    pub n: usize,
    pub m: usize,
    pub mp: usize,
    pub length: f64,
    pub c: f64,
}

impl MixtureSpec {
    pub fn new(case: CaseKind, n: usize, m: usize, mp: usize, length: f64, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        if m > n || mp > m {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= M' <= M <= N, got N={n}, M={m}, M'={mp}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive, got {length}"
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("coupling must be positive, got {c}")));
        }
        Ok(MixtureSpec {
            case,
            n,
            m,
            mp,
            length,
            c,
        })
    }

    /// The all-boson ground-state population for the given case.
    pub fn ground(case: CaseKind, n: usize, length: f64, c: f64) -> Result<Self> {
        let (m, mp) = match case {
            CaseKind::Bff => (0, 0),
            CaseKind::Fbf => (n, 0),
            CaseKind::Ffb => (n, n),
        };
        Self::new(case, n, m, mp, length, c)
    }

    pub fn with_coupling(&self, c: f64) -> Self {
        MixtureSpec { c, ..*self }
    }

    pub fn unknowns(&self) -> usize {
        self.n + self.m + self.mp
    }

    pub fn populations(&self) -> Populations {
        let (n, m, mp) = (self.n, self.m, self.mp);
        match self.case {
            CaseKind::Bff => Populations {
                bosons: n - m,
                up: m - mp,
                down: mp,
            },
            CaseKind::Fbf => Populations {
                bosons: m - mp,
                up: n - m,
                down: mp,
            },
            CaseKind::Ffb => Populations {
                bosons: mp,
                up: n - m,
                down: m - mp,
            },
        }
    }

    /// Whether the quantum numbers of the (I, J, J') lists are integers
    /// (`true`) or half-odd integers (`false`).
    ///
    /// These conventions represent the all-boson state with finite roots in
    /// all three formulations. The price is a twisted sector: whenever
    /// `M` is odd (BFF), `N + M + M'` is odd (FBF) or `N + M'` is odd (FFB),
    /// `L·P/2π` is a half-odd integer.
    pub fn integer_parity(&self) -> [bool; 3] {
        let (n, m, mp) = (self.n as i64, self.m as i64, self.mp as i64);
        let even = |x: i64| x.rem_euclid(2) == 0;
        match self.case {
            CaseKind::Bff => [even(n - m - 1), even(n - mp - 1), even(m - mp - 1)],
            CaseKind::Fbf => [even(m - 1), even(n - mp - 1), even(m - 1)],
            CaseKind::Ffb => [even(m - 1), even(n - m - mp - 1), even(m - 1)],
        }
    }
}

/// Quantum numbers (I, J, J') selecting an eigenstate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub i: Vec<HalfInt>,
    pub j: Vec<HalfInt>,
    pub jp: Vec<HalfInt>,
}

impl QuantumNumbers {
    pub fn new(i: Vec<HalfInt>, j: Vec<HalfInt>, jp: Vec<HalfInt>) -> Self {
        QuantumNumbers { i, j, jp }
    }

    pub fn lists(&self) -> [&[HalfInt]; 3] {
        [&self.i, &self.j, &self.jp]
    }

    /// Negates and reverses every list.
    pub fn reflected(&self) -> Self {
        let flip = |v: &[HalfInt]| v.iter().rev().map(|q| q.neg()).collect::<Vec<_>>();
        QuantumNumbers {
            i: flip(&self.i),
            j: flip(&self.j),
            jp: flip(&self.jp),
        }
    }

    /// Checks list sizes, strict ordering and parity against `spec`.
    pub fn validate(&self, spec: &MixtureSpec) -> Result<()> {
        let sizes = [spec.n, spec.m, spec.mp];
        let names = ["I", "J", "J'"];
        let parity = spec.integer_parity();
        for (k, list) in self.lists().into_iter().enumerate() {
            if list.len() != sizes[k] {
                return Err(Error::SizeMismatch(format!(
                    "{} has {} entries, expected {}",
                    names[k],
                    list.len(),
                    sizes[k]
                )));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig(format!(
                    "{} must be strictly increasing",
                    names[k]
                )));
            }
            if let Some(q) = list.iter().find(|q| q.is_integer() != parity[k]) {
                let want = if parity[k] { "integers" } else { "half-odd integers" };
                return Err(Error::ParityViolation(format!(
                    "{} entry {q} is not allowed: {} must be {want} for {} N={} M={} M'={}",
                    names[k], names[k], spec.case, spec.n, spec.m, spec.mp
                )));
            }
        }
        Ok(())
    }
}

/// Rapidities `k`, `λ`, `μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub k: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl RootSet {
    pub fn new(k: Vec<f64>, lambda: Vec<f64>, mu: Vec<f64>) -> Self {
        RootSet { k, lambda, mu }
    }

    pub(crate) fn from_flat(x: &[f64], spec: &MixtureSpec) -> Self {
        let (n, m) = (spec.n, spec.m);
        RootSet {
            k: x[..n].to_vec(),
            lambda: x[n..n + m].to_vec(),
            mu: x[n + m..].to_vec(),
        }
    }

    pub(crate) fn flatten(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.k.len() + self.lambda.len() + self.mu.len());
        x.extend_from_slice(&self.k);
        x.extend_from_slice(&self.lambda);
        x.extend_from_slice(&self.mu);
        x
    }

    pub(crate) fn check_sizes(&self, spec: &MixtureSpec) -> Result<()> {
        if self.k.len() != spec.n || self.lambda.len() != spec.m || self.mu.len() != spec.mp {
            return Err(Error::SizeMismatch(format!(
                "roots have sizes ({}, {}, {}), expected ({}, {}, {})",
                self.k.len(),
                self.lambda.len(),
                self.mu.len(),
                spec.n,
                spec.m,
                spec.mp
            )));
        }
        if self.flatten().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("roots must be finite".into()));
        }
        Ok(())
    }

    /// Sorts each list ascending; ties keep their original order.
    pub fn sorted(mut self) -> Self {
        let by = |a: &f64, b: &f64| a.partial_cmp(b).unwrap_or(Ordering::Equal);
        self.k.sort_by(by);
        self.lambda.sort_by(by);
        self.mu.sort_by(by);
        self
    }

    pub fn total_momentum(&self) -> f64 {
        self.k.iter().sum()
    }
}

/// Energy and momentum of a Bethe state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub energy: f64,
    pub momentum: f64,
}

/// `Θ_n(x) = −2 arctan(x / (n c))`.
pub fn theta(n: f64, x: f64, c: f64) -> f64 {
    -2.0 * (x / (n * c)).atan()
}

/// `dΘ_n/dx`.
pub fn theta_prime(n: f64, x: f64, c: f64) -> f64 {
    let a = n * c;
    -2.0 * a / (a * a + x * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    K,
    Lambda,
    Mu,
}

/// `Σ Θ_n(x_target − x_source)` terms entering one block's equation.
#[derive(Debug, Clone, Copy)]
struct Coupling {
    source: Block,
    n: f64,
}

const fn cp(source: Block, n: f64) -> Coupling {
    Coupling { source, n }
}

fn couplings(case: CaseKind, target: Block) -> &'static [Coupling] {
    use Block::*;
    const BFF_K: [Coupling; 2] = [cp(K, 1.0), cp(Lambda, -0.5)];
    const BFF_L: [Coupling; 2] = [cp(K, -0.5), cp(Mu, 0.5)];
    const BFF_M: [Coupling; 2] = [cp(Lambda, -0.5), cp(Mu, 1.0)];
    const FBF_K: [Coupling; 1] = [cp(Lambda, 0.5)];
    const FBF_L: [Coupling; 2] = [cp(K, -0.5), cp(Mu, 0.5)];
    const FBF_M: [Coupling; 1] = [cp(Lambda, -0.5)];
    const FFB_K: [Coupling; 1] = [cp(Lambda, 0.5)];
    const FFB_L: [Coupling; 3] = [cp(K, -0.5), cp(Lambda, 1.0), cp(Mu, -0.5)];
    const FFB_M: [Coupling; 1] = [cp(Lambda, -0.5)];
    match (case, target) {
        (CaseKind::Bff, K) => &BFF_K,
        (CaseKind::Bff, Lambda) => &BFF_L,
        (CaseKind::Bff, Mu) => &BFF_M,
        (CaseKind::Fbf, K) => &FBF_K,
        (CaseKind::Fbf, Lambda) => &FBF_L,
        (CaseKind::Fbf, Mu) => &FBF_M,
        (CaseKind::Ffb, K) => &FFB_K,
        (CaseKind::Ffb, Lambda) => &FFB_L,
        (CaseKind::Ffb, Mu) => &FFB_M,
    }
}

/// Flattened equation system for fixed (spec, quantum numbers).
#[derive(Debug, Clone)]
pub(crate) struct System {
    spec: MixtureSpec,
    /// `2π q` for every equation, in flattened order.
    phases: Vec<f64>,
}

impl System {
    pub(crate) fn new(spec: &MixtureSpec, qn: &QuantumNumbers) -> Result<Self> {
        qn.validate(spec)?;
        Ok(Self::new_unchecked(spec, qn))
    }

    pub(crate) fn new_unchecked(spec: &MixtureSpec, qn: &QuantumNumbers) -> Self {
        let phases = qn
            .lists()
            .into_iter()
            .flat_map(|l| l.iter().map(|q| 2.0 * PI * q.value()))
            .collect();
        System { spec: *spec, phases }
    }

    pub(crate) fn spec(&self) -> &MixtureSpec {
        &self.spec
    }

    pub(crate) fn phase(&self, index: usize) -> f64 {
        self.phases[index]
    }

    pub(crate) fn with_coupling(&self, c: f64) -> Self {
        System {
            spec: self.spec.with_coupling(c),
            phases: self.phases.clone(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.phases.len()
    }

    fn range(&self, block: Block) -> std::ops::Range<usize> {
        let (n, m, mp) = (self.spec.n, self.spec.m, self.spec.mp);
        match block {
            Block::K => 0..n,
            Block::Lambda => n..n + m,
            Block::Mu => n + m..n + m + mp,
        }
    }

    pub(crate) fn residual(&self, x: &[f64], out: &mut [f64]) {
        let c = self.spec.c;
        for block in [Block::K, Block::Lambda, Block::Mu] {
            for t in self.range(block) {
                let mut r = match block {
                    Block::K => x[t] * self.spec.length - self.phases[t],
                    _ => self.phases[t],
                };
                for cpl in couplings(self.spec.case, block) {
                    for s in self.range(cpl.source) {
                        r -= theta(cpl.n, x[t] - x[s], c);
                    }
                }
                out[t] = r;
            }
        }
    }

    pub(crate) fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) {
        let c = self.spec.c;
        jac.fill(0.0);
        for block in [Block::K, Block::Lambda, Block::Mu] {
            for t in self.range(block) {
                if block == Block::K {
                    jac[(t, t)] += self.spec.length;
                }
                for cpl in couplings(self.spec.case, block) {
                    for s in self.range(cpl.source) {
                        let d = theta_prime(cpl.n, x[t] - x[s], c);
                        jac[(t, t)] -= d;
                        jac[(t, s)] += d;
                    }
                }
            }
        }
    }
}

/// Residuals of the logarithmic equations, ordered (k, λ, μ).
pub fn residual(spec: &MixtureSpec, qn: &QuantumNumbers, roots: &RootSet) -> Result<Vec<f64>> {
    let system = System::new(spec, qn)?;
    roots.check_sizes(spec)?;
    let x = roots.flatten();
    let mut out = vec![0.0; x.len()];
    system.residual(&x, &mut out);
    Ok(out)
}

/// Analytic Jacobian of [`residual`] with respect to the flattened roots.
pub fn jacobian(spec: &MixtureSpec, qn: &QuantumNumbers, roots: &RootSet) -> Result<DMatrix<f64>> {
    let system = System::new(spec, qn)?;
    roots.check_sizes(spec)?;
    let x = roots.flatten();
    let mut jac = DMatrix::zeros(x.len(), x.len());
    system.jacobian(&x, &mut jac);
    Ok(jac)
}

/// Signs with which Σ J and Σ J' enter the total momentum, obtained by
/// summing each block of equations and using the oddness of Θ.
fn momentum_signs(case: CaseKind) -> (f64, f64) {
    match case {
        CaseKind::Bff => (-1.0, 1.0),
        CaseKind::Fbf => (1.0, -1.0),
        CaseKind::Ffb => (1.0, 1.0),
    }
}

/// `E = Σ k²`, `P = (2π/L)(Σ I ± Σ J ± Σ J')`; `P` equals `Σ k` on any solution.
pub fn energy_momentum(spec: &MixtureSpec, qn: &QuantumNumbers, roots: &RootSet) -> Observables {
    let energy = roots.k.iter().map(|k| k * k).sum();
    Observables {
        energy,
        momentum: momentum_of(spec, qn),
    }
}

/// Total momentum fixed by the quantum numbers alone.
pub fn momentum_of(spec: &MixtureSpec, qn: &QuantumNumbers) -> f64 {
    let sum = |l: &[HalfInt]| l.iter().map(|q| q.doubled()).sum::<i64>() as f64 / 2.0;
    let (sj, sjp) = momentum_signs(spec.case);
    2.0 * PI / spec.length * (sum(&qn.i) + sj * sum(&qn.j) + sjp * sum(&qn.jp))
}

/// Max-norm of a vector.
pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}
