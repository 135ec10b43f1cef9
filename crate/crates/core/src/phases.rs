//! Ground-state phase diagrams in a Zeeman field.
//!
//! The grand energy of a state with populations `(N_B, N↑, N↓)` is
//! `H = E − μ_B N_B − μ_f (N↑ + N↓) − (h/2)(N↑ − N↓)`.
//! Three regimes are supported:
//!
//! * weak coupling: free particles, bosons condensed at `k = 0` and each
//!   fermion species filling the periodic levels `k = 2πn/L`;
//! * strong coupling: hard-core particles sharing one Fermi sea, so `E`
//!   does not depend on the composition;
//! * general coupling: the lowest Bethe state of every boson-reference
//!   sector `(M, M')` obeying `N − M ≥ M − M' ≥ M'`.
//!
//! Ties are broken towards more bosons, then towards the majority spin
//! along the field. Negative fields are mapped onto positive ones by the
//! Zeeman symmetry `h → −h`, `N↑ ↔ N↓`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::CaseKind;
use crate::bae::{MixtureSpec, Populations};
use crate::error::{Error, Result};
use crate::excitations::lowest_state;

/// Magnetic field and chemical potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub h: f64,
    pub mu_b: f64,
    pub mu_f: f64,
}

impl FieldPoint {
    pub fn new(h: f64, mu_b: f64, mu_f: f64) -> Self {
        FieldPoint { h, mu_b, mu_f }
    }

    /// Point on a `(μ_f/μ_B, h)` plane at fixed `μ_B > 0`.
    pub fn from_ratio(ratio: f64, h: f64, mu_b: f64) -> Result<Self> {
        if !(mu_b > 0.0 && mu_b.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu_B must be positive, got {mu_b}")));
        }
        Ok(FieldPoint {
            h,
            mu_b,
            mu_f: ratio * mu_b,
        })
    }

    pub fn ratio(&self) -> f64 {
        self.mu_f / self.mu_b
    }

    /// `Δ = μ_f − μ_B`.
    pub fn delta(&self) -> f64 {
        self.mu_f - self.mu_b
    }

    pub fn mirrored(&self) -> Self {
        FieldPoint { h: -self.h, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    /// Bosons only.
    B,
    /// Bosons and spin-up fermions.
    BF1,
    /// Bosons and spin-down fermions.
    BF2,
    /// Bosons and a spin singlet, `N↑ = N↓ > 0`.
    S,
    /// Bosons and both spins, `N↑ ≠ N↓`.
    BF1F2,
    /// Spin-up fermions only.
    F1,
    /// Spin-down fermions only.
    F2,
    /// Fermion singlet without bosons.
    F,
    /// Both spins, `N↑ ≠ N↓`, without bosons.
    F1F2,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 9] = [
        PhaseLabel::B,
        PhaseLabel::BF1,
        PhaseLabel::BF2,
        PhaseLabel::S,
        PhaseLabel::BF1F2,
        PhaseLabel::F1,
        PhaseLabel::F2,
        PhaseLabel::F,
        PhaseLabel::F1F2,
    ];

    pub fn classify(p: &Populations) -> Self {
        let (b, u, d) = (p.bosons > 0, p.up > 0, p.down > 0);
        match (b, u, d) {
            (_, false, false) => PhaseLabel::B,
            (true, true, false) => PhaseLabel::BF1,
            (true, false, true) => PhaseLabel::BF2,
            (true, true, true) if p.up == p.down => PhaseLabel::S,
            (true, true, true) => PhaseLabel::BF1F2,
            (false, true, false) => PhaseLabel::F1,
            (false, false, true) => PhaseLabel::F2,
            (false, true, true) if p.up == p.down => PhaseLabel::F,
            (false, true, true) => PhaseLabel::F1F2,
        }
    }

    /// Label after exchanging the two spin species.
    pub fn mirrored(self) -> Self {
        match self {
            PhaseLabel::BF1 => PhaseLabel::BF2,
            PhaseLabel::BF2 => PhaseLabel::BF1,
            PhaseLabel::F1 => PhaseLabel::F2,
            PhaseLabel::F2 => PhaseLabel::F1,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::B => "B",
            PhaseLabel::BF1 => "BF1",
            PhaseLabel::BF2 => "BF2",
            PhaseLabel::S => "S",
            PhaseLabel::BF1F2 => "BF1F2",
            PhaseLabel::F1 => "F1",
            PhaseLabel::F2 => "F2",
            PhaseLabel::F => "F",
            PhaseLabel::F1F2 => "F1F2",
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which populations take part in a closed-form minimisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    #[default]
    All,
    /// `N_B ≥ max(N↑, N↓) ≥ min(N↑, N↓)`, the sectors reachable from the
    /// boson reference state up to a spin flip.
    YoungTableau,
}

impl Admissibility {
    pub fn admits(self, p: &Populations) -> bool {
        match self {
            Admissibility::All => true,
            Admissibility::YoungTableau => p.bosons >= p.up.max(p.down),
        }
    }
}

impl FromStr for Admissibility {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Admissibility::All),
            "young" | "young_tableau" | "tableau" => Ok(Admissibility::YoungTableau),
            _ => Err(Error::InvalidParameter(format!("unknown admissibility '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Weak,
    Strong,
    General,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Regime::Weak),
            "strong" => Ok(Regime::Strong),
            "general" => Ok(Regime::General),
            _ => Err(Error::InvalidParameter(format!("unknown regime '{s}'"))),
        }
    }
}

/// Optimal populations at one field point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub fields: FieldPoint,
    pub populations: Populations,
    pub label: PhaseLabel,
    pub energy: f64,
    pub grand_energy: f64,
    /// Candidate sectors left out because their energy is unknown.
    pub excluded: usize,
}

impl PhasePoint {
    /// Number of singlet pairs when `N↑ = N↓ > 0`.
    pub fn singlet_pairs(&self) -> Option<usize> {
        let p = &self.populations;
        (p.up == p.down && p.up > 0).then_some(p.up)
    }

    fn mirrored(&self) -> Self {
        let p = self.populations;
        PhasePoint {
            fields: self.fields.mirrored(),
            populations: Populations {
                bosons: p.bosons,
                up: p.down,
                down: p.up,
            },
            label: self.label.mirrored(),
            ..*self
        }
    }
}

/// `H = E − μ_B N_B − μ_f (N↑ + N↓) − (h/2)(N↑ − N↓)`.
pub fn grand_energy(p: &Populations, energy: f64, fields: &FieldPoint) -> f64 {
    energy
        - fields.mu_b * p.bosons as f64
        - fields.mu_f * p.fermions() as f64
        - 0.5 * fields.h * (p.up as f64 - p.down as f64)
}

/// `Σ n²` over the lowest `count` periodic levels `0, ±1, ±2, …`.
pub fn filled_levels(count: usize) -> u64 {
    (0..count as u64).map(|i| i.div_ceil(2).pow(2)).sum()
}

/// Free-fermion energy of both species, in natural units.
pub fn free_energy(p: &Populations, length: f64) -> f64 {
    let unit = (2.0 * PI / length).powi(2);
    unit * (filled_levels(p.up) + filled_levels(p.down)) as f64
}

fn check_size(n: usize, length: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "box length must be positive, got {length}"
        )));
    }
    Ok(())
}

fn check_fields(fields: &FieldPoint) -> Result<()> {
    if !(fields.h.is_finite() && fields.mu_b.is_finite() && fields.mu_f.is_finite()) {
        return Err(Error::InvalidParameter("fields must be finite".into()));
    }
    Ok(())
}

/// Populations in tie-break order: more bosons first, then more spin-up.
fn candidates(n: usize) -> impl Iterator<Item = Populations> {
    (0..=n).rev().flat_map(move |bosons| {
        let f = n - bosons;
        (0..=f).rev().map(move |up| Populations {
            bosons,
            up,
            down: f - up,
        })
    })
}

/// Minimises `H` over populations with a known energy. Evaluated at
/// `h ≥ 0`; the caller mirrors.
fn minimise(n: usize, fields: &FieldPoint, energy: impl Fn(&Populations) -> Option<f64>) -> Option<PhasePoint> {
    let mut best: Option<PhasePoint> = None;
    let mut excluded = 0;
    for p in candidates(n) {
        let Some(e) = energy(&p) else {
            excluded += 1;
            continue;
        };
        let g = grand_energy(&p, e, fields);
        let better = match &best {
            None => true,
            Some(b) => g < b.grand_energy - 1e-12 * (1.0 + b.grand_energy.abs()),
        };
        if better {
            best = Some(PhasePoint {
                fields: *fields,
                populations: p,
                label: PhaseLabel::classify(&p),
                energy: e,
                grand_energy: g,
                excluded: 0,
            });
        }
    }
    best.map(|b| PhasePoint { excluded, ..b })
}

fn with_symmetry(fields: &FieldPoint, solve: impl Fn(&FieldPoint) -> Option<PhasePoint>) -> Option<PhasePoint> {
    if fields.h < 0.0 {
        solve(&fields.mirrored()).map(|p| p.mirrored())
    } else {
        solve(fields)
    }
}

/// Free-particle phase: bosons at zero momentum, fermions on filled
/// periodic levels.
pub fn weak_coupling_phase(fields: &FieldPoint, n: usize, length: f64, adm: Admissibility) -> Result<PhasePoint> {
    check_size(n, length)?;
    check_fields(fields)?;
    with_symmetry(fields, |f| {
        minimise(n, f, |p| adm.admits(p).then(|| free_energy(p, length)))
    })
    .ok_or_else(|| Error::InvalidParameter("no admissible population".into()))
}

/// Hard-core energy of `n` particles in one Fermi sea.
pub fn hard_core_energy(n: usize, length: f64) -> f64 {
    let unit = (2.0 * PI / length).powi(2);
    // Levels (n−1)/2, (n−1)/2 − 1, …, symmetric about zero.
    let half = (n as f64 - 1.0) / 2.0;
    unit * (0..n).map(|i| (i as f64 - half).powi(2)).sum::<f64>()
}

/// Hard-core phase: the energy is the same for every composition.
pub fn strong_coupling_phase(fields: &FieldPoint, n: usize, length: f64, adm: Admissibility) -> Result<PhasePoint> {
    check_size(n, length)?;
    check_fields(fields)?;
    let e = hard_core_energy(n, length);
    with_symmetry(fields, |f| minimise(n, f, |p| adm.admits(p).then_some(e)))
        .ok_or_else(|| Error::InvalidParameter("no admissible population".into()))
}

/// Lowest Bethe-state energy of every boson-reference sector obeying the
/// Young-tableau constraint. Sectors whose search failed hold `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorTable {
    pub n: usize,
    pub length: f64,
    pub c: f64,
    /// `((M, M'), E)` in ascending `(M, M')` order.
    pub energies: Vec<((usize, usize), Option<f64>)>,
}

/// Greedy-move budget per sector search.
pub const SECTOR_SEARCH_MOVES: usize = 200;

impl SectorTable {
    pub fn build(n: usize, length: f64, c: f64) -> Result<Self> {
        check_size(n, length)?;
        MixtureSpec::new(CaseKind::Bff, n, 0, 0, length, c)?;
        let sectors: Vec<(usize, usize)> = (0..=n)
            .flat_map(|m| (0..=m).map(move |mp| (m, mp)))
            .filter(|&(m, mp)| n - m >= m - mp && m - mp >= mp)
            .collect();
        let energies = sectors
            .par_iter()
            .map(|&(m, mp)| {
                let e = MixtureSpec::new(CaseKind::Bff, n, m, mp, length, c)
                    .and_then(|spec| lowest_state(&spec, SECTOR_SEARCH_MOVES))
                    .map(|s| s.energy)
                    .ok();
                ((m, mp), e)
            })
            .collect();
        Ok(SectorTable { n, length, c, energies })
    }

    /// Energy for populations with `N↑ ≥ N↓`; `None` outside the tableau
    /// or for failed sectors.
    pub fn energy(&self, p: &Populations) -> Option<f64> {
        if p.total() != self.n || p.up < p.down {
            return None;
        }
        let key = (p.up + p.down, p.down);
        self.energies
            .binary_search_by_key(&key, |e| e.0)
            .ok()
            .and_then(|i| self.energies[i].1)
    }

    pub fn failures(&self) -> Vec<(usize, usize)> {
        self.energies.iter().filter(|e| e.1.is_none()).map(|e| e.0).collect()
    }

    pub fn phase(&self, fields: &FieldPoint) -> Result<PhasePoint> {
        check_fields(fields)?;
        with_symmetry(fields, |f| minimise(self.n, f, |p| self.energy(p))).ok_or(Error::NonConvergence {
            iterations: 0,
            best_residual: f64::NAN,
        })
    }
}

/// Minimises `H` over the lowest Bethe states of all tableau sectors at
/// coupling `c`. Scans should build a [`SectorTable`] once instead.
pub fn general_phase(c: f64, fields: &FieldPoint, n: usize, length: f64) -> Result<PhasePoint> {
    SectorTable::build(n, length, c)?.phase(fields)
}

/// Inclusive arithmetic range `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidParameter("axis bounds must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "axis step must be positive, got {step}"
            )));
        }
        if stop < start {
            return Err(Error::InvalidParameter(format!("axis stop {stop} below start {start}")));
        }
        Ok(Axis { start, stop, step })
    }

    /// Axis with `count` points spanning `[start, stop]`.
    pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Axis::new(start, start.max(stop), 1.0);
        }
        Axis::new(start, stop, (stop - start) / (count - 1) as f64)
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `start:stop:step`, or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number '{t}' in range '{s}'")))
        };
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Axis::new(v, v, 1.0)
            }
            [a, b, st] => Axis::new(num(a)?, num(b)?, num(st)?),
            _ => Err(Error::InvalidParameter(format!("range '{s}' is not start:stop:step"))),
        }
    }
}

/// Grid over the `(μ_f/μ_B, h/μ_B)` plane at fixed `μ_B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub ratio: Axis,
    /// Field in units of `μ_B`.
    pub h: Axis,
    pub mu_b: f64,
}

/// Classifies every grid point, ratio-major. Points whose minimisation
/// fails carry the error in place of a phase.
pub fn phase_scan(
    regime: Regime,
    grid: &ScanGrid,
    c: f64,
    n: usize,
    length: f64,
    adm: Admissibility,
) -> Result<Vec<Result<PhasePoint>>> {
    check_size(n, length)?;
    let ratios = grid.ratio.values();
    let hs = grid.h.values();
    let mut fields = Vec::with_capacity(ratios.len() * hs.len());
    for &r in &ratios {
        for &h in &hs {
            fields.push(FieldPoint::from_ratio(r, h * grid.mu_b, grid.mu_b)?);
        }
    }
    let out = match regime {
        Regime::Weak => fields.iter().map(|f| weak_coupling_phase(f, n, length, adm)).collect(),
        Regime::Strong => fields
            .iter()
            .map(|f| strong_coupling_phase(f, n, length, adm))
            .collect(),
        Regime::General => {
            let table = SectorTable::build(n, length, c)?;
            fields.iter().map(|f| table.phase(f)).collect()
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pop(bosons: usize, up: usize, down: usize) -> Populations {
        Populations { bosons, up, down }
    }

    #[test]
    fn grand_energy_of_bosons() {
        let f = FieldPoint::new(0.3, 1.0, 2.0);
        assert_eq!(grand_energy(&pop(42, 0, 0), 0.0, &f), -42.0);
        let a = grand_energy(&pop(30, 7, 5), 1.5, &f);
        let b = grand_energy(&pop(30, 5, 7), 1.5, &f.mirrored());
        assert_eq!(a, b);
    }

    #[test]
    fn labels() {
        assert_eq!(PhaseLabel::classify(&pop(5, 0, 0)), PhaseLabel::B);
        assert_eq!(PhaseLabel::classify(&pop(5, 2, 0)), PhaseLabel::BF1);
        assert_eq!(PhaseLabel::classify(&pop(5, 0, 2)), PhaseLabel::BF2);
        assert_eq!(PhaseLabel::classify(&pop(5, 2, 2)), PhaseLabel::S);
        assert_eq!(PhaseLabel::classify(&pop(5, 3, 2)), PhaseLabel::BF1F2);
        assert_eq!(PhaseLabel::classify(&pop(0, 4, 0)), PhaseLabel::F1);
        assert_eq!(PhaseLabel::classify(&pop(0, 0, 4)), PhaseLabel::F2);
        assert_eq!(PhaseLabel::classify(&pop(0, 2, 2)), PhaseLabel::F);
        assert_eq!(PhaseLabel::classify(&pop(0, 3, 1)), PhaseLabel::F1F2);
        for l in PhaseLabel::ALL {
            assert_eq!(l.mirrored().mirrored(), l);
        }
    }

    #[test]
    fn filled_level_sums() {
        let expect = [0, 0, 1, 2, 6, 10, 19, 28];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(filled_levels(n), *e);
        }
    }

    #[test]
    fn bosons_win_without_incentive() {
        let f = FieldPoint::new(0.0, 1.0, 0.5);
        let p = weak_coupling_phase(&f, 10, 10.0, Admissibility::All).unwrap();
        assert_eq!(p.label, PhaseLabel::B);
        let p = strong_coupling_phase(&f, 10, 10.0, Admissibility::All).unwrap();
        assert_eq!(p.label, PhaseLabel::B);
    }

    #[test]
    fn strong_field_excludes_minority_spin() {
        for ratio in [0.5, 1.0, 1.5, 3.0] {
            let f = FieldPoint::from_ratio(ratio, 0.4, 1.0).unwrap();
            let p = strong_coupling_phase(&f, 12, 12.0, Admissibility::All).unwrap();
            assert_eq!(p.populations.down, 0);
        }
    }

    #[test]
    fn zeeman_symmetry() {
        for (ratio, h) in [(1.3, 0.7), (2.0, 1.9), (0.4, 2.5), (3.0, 0.1)] {
            let f = FieldPoint::from_ratio(ratio, h, 0.05).unwrap();
            for adm in [Admissibility::All, Admissibility::YoungTableau] {
                let a = weak_coupling_phase(&f, 20, 20.0, adm).unwrap();
                let b = weak_coupling_phase(&f.mirrored(), 20, 20.0, adm).unwrap();
                assert_eq!(a.label.mirrored(), b.label);
                assert_eq!(a.populations.up, b.populations.down);
                assert_eq!(a.grand_energy, b.grand_energy);
            }
        }
    }

    #[test]
    fn tableau_restricts_candidates() {
        let f = FieldPoint::from_ratio(5.0, 0.0, 1.0).unwrap();
        let p = strong_coupling_phase(&f, 12, 12.0, Admissibility::YoungTableau).unwrap();
        assert!(Admissibility::YoungTableau.admits(&p.populations));
        assert!(p.populations.bosons >= 4);
    }

    #[test]
    fn axis_parsing() {
        let a: Axis = "0:8:0.05".parse().unwrap();
        assert_eq!(a.len(), 161);
        assert_eq!(a.values()[160], 8.0);
        let a: Axis = "1.5".parse().unwrap();
        assert_eq!(a.values(), vec![1.5]);
        assert!("0:1:0".parse::<Axis>().is_err());
        assert!("2:1:0.1".parse::<Axis>().is_err());
        assert!("a:b".parse::<Axis>().is_err());
        assert_eq!(Axis::linspace(-6.0, 6.0, 50).unwrap().len(), 50);
    }

    #[test]
    fn sector_table_small() {
        let t = SectorTable::build(4, 4.0, 1.0).unwrap();
        assert!(t.failures().is_empty());
        assert!(t.energy(&pop(4, 0, 0)).is_some());
        assert!(t.energy(&pop(2, 1, 1)).is_some());
        assert!(t.energy(&pop(1, 3, 0)).is_none());
        assert!(t.energy(&pop(2, 0, 2)).is_none());
        let f = FieldPoint::from_ratio(1.0, -0.5, 1.0).unwrap();
        let p = t.phase(&f).unwrap();
        assert!(p.populations.up <= p.populations.down);
    }
}
