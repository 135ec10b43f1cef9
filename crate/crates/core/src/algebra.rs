//! Graded permutation operators, R-matrices and a numerical Yang–Baxter check.
//!
//! Two-particle states `|a b>` (a, b ∈ {0, 1, 2}) are indexed as `3a + b`;
//! three-particle states `|a b c>` as `9a + 3b + c`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Choice of reference state and ordering of the three components.
///
/// The name lists the statistics of components 1, 2, 3 in order, e.g. `Bff`
/// has the boson as component 1 (the pseudo-vacuum).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    Bff,
    Fbf,
    Ffb,
}

impl CaseKind {
    pub const ALL: [CaseKind; 3] = [CaseKind::Bff, CaseKind::Fbf, CaseKind::Ffb];

    /// Index (0-based) of the bosonic component.
    pub fn boson_component(self) -> usize {
        match self {
            CaseKind::Bff => 0,
            CaseKind::Fbf => 1,
            CaseKind::Ffb => 2,
        }
    }

    pub fn is_fermionic(self, component: usize) -> bool {
        component != self.boson_component()
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Bff => "bff",
            CaseKind::Fbf => "fbf",
            CaseKind::Ffb => "ffb",
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bff" => Ok(CaseKind::Bff),
            "fbf" => Ok(CaseKind::Fbf),
            "ffb" => Ok(CaseKind::Ffb),
            other => Err(Error::InvalidParameter(format!(
                "unknown case '{other}' (expected bff, fbf or ffb)"
            ))),
        }
    }
}

/// A real 9×9 matrix on the two-particle space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix9(pub [[f64; 9]; 9]);

impl Matrix9 {
    pub fn zeros() -> Self {
        Matrix9([[0.0; 9]; 9])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..9 {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }
}

impl Mul for Matrix9 {
    type Output = Matrix9;

    fn mul(self, rhs: Matrix9) -> Matrix9 {
        let mut out = Matrix9::zeros();
        for i in 0..9 {
            for k in 0..9 {
                let a = self.0[i][k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..9 {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

/// Nonzero entries `(row, col, sign)` (1-based) of the printed permutation
/// matrices for the three reference-state choices.
const P_BFF: [(usize, usize, f64); 9] = [
    (1, 1, 1.0),
    (2, 4, 1.0),
    (3, 7, 1.0),
    (4, 2, 1.0),
    (5, 5, -1.0),
    (6, 8, -1.0),
    (7, 3, 1.0),
    (8, 6, -1.0),
    (9, 9, -1.0),
];

const P_FBF: [(usize, usize, f64); 9] = [
    (1, 1, -1.0),
    (2, 4, 1.0),
    (3, 7, -1.0),
    (4, 2, 1.0),
    (5, 5, 1.0),
    (6, 8, 1.0),
    (7, 3, -1.0),
    (8, 6, 1.0),
    (9, 9, -1.0),
];

const P_FFB: [(usize, usize, f64); 9] = [
    (1, 1, -1.0),
    (2, 4, -1.0),
    (3, 7, 1.0),
    (4, 2, -1.0),
    (5, 5, -1.0),
    (6, 8, 1.0),
    (7, 3, 1.0),
    (8, 6, 1.0),
    (9, 9, 1.0),
];

/// Signed permutation matrix exchanging two particles for the given case.
pub fn permutation_matrix(case: CaseKind) -> Matrix9 {
    let table = match case {
        CaseKind::Bff => &P_BFF,
        CaseKind::Fbf => &P_FBF,
        CaseKind::Ffb => &P_FFB,
    };
    let mut m = Matrix9::zeros();
    for &(r, c, s) in table {
        m.0[r - 1][c - 1] = s;
    }
    m
}

/// Exchange sign of components `a` and `b`: −1 when both are fermionic.
fn exchange_sign(case: CaseKind, a: usize, b: usize) -> f64 {
    if case.is_fermionic(a) && case.is_fermionic(b) {
        -1.0
    } else {
        1.0
    }
}

/// A complex 9×9 matrix, entries stored as (re, im) pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix9(pub [[Complex64; 9]; 9]);

impl ComplexMatrix9 {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix9) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..9 {
            for j in 0..9 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }
}

impl Mul for ComplexMatrix9 {
    type Output = ComplexMatrix9;

    fn mul(self, rhs: ComplexMatrix9) -> ComplexMatrix9 {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = [[zero; 9]; 9];
        for (i, row) in out.iter_mut().enumerate() {
            for k in 0..9 {
                let a = self.0[i][k];
                for (x, b) in row.iter_mut().zip(&rhs.0[k]) {
                    *x += a * b;
                }
            }
        }
        ComplexMatrix9(out)
    }
}

fn check_coupling(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "coupling c must be positive and finite, got {c}"
        )))
    }
}

/// Two-particle R-matrix `R(α) = (α·I − i c·P) / (α + i c)`.
///
/// At α = 0 this is exactly `−P`; as α → ∞ it tends to the identity.
pub fn r_matrix(case: CaseKind, alpha: f64, c: f64) -> Result<ComplexMatrix9> {
    check_coupling(c)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "spectral parameter must be finite, got {alpha}"
        )));
    }
    let p = permutation_matrix(case);
    let denom = Complex64::new(alpha, c);
    let mut out = [[Complex64::new(0.0, 0.0); 9]; 9];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let diag = if i == j { alpha } else { 0.0 };
            *entry = Complex64::new(diag, -c * p.0[i][j]) / denom;
        }
    }
    Ok(ComplexMatrix9(out))
}

/// How a two-site operator is placed on the non-adjacent factors (1, 3) of
/// the three-particle space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// Plain tensor embedding, ignoring the statistics of the middle factor.
    Ordinary,
    /// Conjugation by the graded swap of factors 2 and 3, which carries the
    /// Koszul sign of moving past the middle particle.
    Graded,
}

/// Dense operator on the 27-dimensional three-particle space.
#[derive(Debug, Clone, PartialEq)]
struct Op27(Vec<Complex64>);

impl Op27 {
    fn zeros() -> Self {
        Op27(vec![Complex64::new(0.0, 0.0); 27 * 27])
    }

    fn at(&self, row: usize, col: usize) -> Complex64 {
        self.0[row * 27 + col]
    }

    fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.0[row * 27 + col] = v;
    }

    fn matmul(&self, rhs: &Op27) -> Op27 {
        let mut out = Op27::zeros();
        for i in 0..27 {
            for k in 0..27 {
                let a = self.at(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..27 {
                    out.0[i * 27 + j] += a * rhs.at(k, j);
                }
            }
        }
        out
    }

    fn max_abs_diff(&self, other: &Op27) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn triple(a: usize, b: usize, c: usize) -> usize {
    9 * a + 3 * b + c
}

fn pair(a: usize, b: usize) -> usize {
    3 * a + b
}

/// Factor pair an operator acts on.
#[derive(Debug, Clone, Copy)]
enum Sites {
    S12,
    S13,
    S23,
}

fn embed(x: &ComplexMatrix9, sites: Sites, case: CaseKind, embedding: Embedding) -> Op27 {
    let mut out = Op27::zeros();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let row = triple(a, b, c);
                for a2 in 0..3 {
                    for b2 in 0..3 {
                        for c2 in 0..3 {
                            let v = match sites {
                                Sites::S12 if c == c2 => x.0[pair(a, b)][pair(a2, b2)],
                                Sites::S23 if a == a2 => x.0[pair(b, c)][pair(b2, c2)],
                                Sites::S13 if b == b2 => {
                                    let v = x.0[pair(a, c)][pair(a2, c2)];
                                    match embedding {
                                        Embedding::Ordinary => v,
                                        Embedding::Graded => v * exchange_sign(case, b, c) * exchange_sign(case, b, c2),
                                    }
                                }
                                _ => continue,
                            };
                            out.set(row, triple(a2, b2, c2), v);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Max-norm of `R12(α−β) R13(α) R23(β) − R23(β) R13(α) R12(α−β)` using the
/// given placement of the (1, 3) factor.
pub fn ybe_residual_with(case: CaseKind, alpha: f64, beta: f64, c: f64, embedding: Embedding) -> Result<f64> {
    let r_diff = r_matrix(case, alpha - beta, c)?;
    let r_alpha = r_matrix(case, alpha, c)?;
    let r_beta = r_matrix(case, beta, c)?;

    let r12 = embed(&r_diff, Sites::S12, case, embedding);
    let r13 = embed(&r_alpha, Sites::S13, case, embedding);
    let r23 = embed(&r_beta, Sites::S23, case, embedding);

    let lhs = r12.matmul(&r13).matmul(&r23);
    let rhs = r23.matmul(&r13).matmul(&r12);
    Ok(lhs.max_abs_diff(&rhs))
}

/// Yang–Baxter residual with the graded placement of the (1, 3) factor.
///
/// The ordinary placement does not satisfy the relation for these signed
/// permutations (see the tests); the graded one does to rounding error.
pub fn ybe_residual(case: CaseKind, alpha: f64, beta: f64, c: f64) -> Result<f64> {
    ybe_residual_with(case, alpha, beta, c, Embedding::Graded)
}
