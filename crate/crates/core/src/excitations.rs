//! Quantum-number configurations for ground states and the low-lying
//! excitation families, and dispersion sweeps over them.
//!
//! Families, relative to the ground state of each formulation:
//!
//! * particle-hole: one `I` removed from the Fermi sequence and placed
//!   above it;
//! * one fermion: a boson replaced by a spin-up fermion; the re-paritied
//!   sequence has `N + 1` slots with one hole, and `J1` is the spin
//!   quantum number (BFF) or the vacant slot of the spin sequence (FBF,
//!   FFB);
//! * two fermions: two bosons replaced by fermions, either both spin up or
//!   (BFF only) one up and one down.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::CaseKind;
use crate::bae::{self, HalfInt, MixtureSpec, QuantumNumbers, RootSet};
use crate::error::{Error, Result};

/// `count` consecutive values centred on zero with the requested parity.
///
/// If the centred run has the other parity it is moved by one half,
/// to the right when `shift_right` is set.
pub fn centered_run(count: usize, integer: bool, shift_right: bool) -> Vec<HalfInt> {
    let count = count as i64;
    let mut start = 1 - count;
    if (count % 2 == 1) != integer {
        start += if shift_right { 1 } else { -1 };
    }
    (0..count).map(|j| HalfInt::from_doubled(start + 2 * j)).collect()
}

/// (M, M') of the all-boson ground state in each formulation.
pub fn ground_sector(case: CaseKind, n: usize) -> (usize, usize) {
    match case {
        CaseKind::Bff => (0, 0),
        CaseKind::Fbf => (n, 0),
        CaseKind::Ffb => (n, n),
    }
}

fn require_sector(spec: &MixtureSpec, want: (usize, usize), what: &str) -> Result<()> {
    if (spec.m, spec.mp) != want {
        return Err(Error::InvalidConfig(format!(
            "{what} needs M={} M'={} for {} N={}, got M={} M'={}",
            want.0, want.1, spec.case, spec.n, spec.m, spec.mp
        )));
    }
    Ok(())
}

fn without(run: &[HalfInt], removed: &[HalfInt], what: &str) -> Result<Vec<HalfInt>> {
    for r in removed {
        if !run.contains(r) {
            let lo = run.first().map(|q| q.to_string()).unwrap_or_default();
            let hi = run.last().map(|q| q.to_string()).unwrap_or_default();
            return Err(Error::InvalidConfig(format!(
                "{what} {r} is not one of the slots {lo}..{hi}"
            )));
        }
    }
    Ok(run.iter().copied().filter(|q| !removed.contains(q)).collect())
}

fn remove_hole(run: Vec<HalfInt>, hole: usize) -> Result<Vec<HalfInt>> {
    if hole == 0 || hole > run.len() {
        return Err(Error::InvalidConfig(format!(
            "hole position {hole} outside 1..={}",
            run.len()
        )));
    }
    let mut run = run;
    run.remove(hole - 1);
    Ok(run)
}

/// Symmetric consecutive sequences of the all-boson ground state.
pub fn ground_state_numbers(spec: &MixtureSpec) -> Result<QuantumNumbers> {
    require_sector(spec, ground_sector(spec.case, spec.n), "ground state")?;
    let p = spec.integer_parity();
    let qn = QuantumNumbers::new(
        centered_run(spec.n, p[0], false),
        centered_run(spec.m, p[1], false),
        centered_run(spec.mp, p[2], false),
    );
    qn.validate(spec)?;
    Ok(qn)
}

/// Ground sequence with its `hole_position`-th entry (1-based, ascending)
/// replaced by `particle_number`, which must lie above the sequence.
pub fn particle_hole_numbers(
    spec: &MixtureSpec,
    hole_position: usize,
    particle_number: HalfInt,
) -> Result<QuantumNumbers> {
    let ground = ground_state_numbers(spec)?;
    let mut i = remove_hole(ground.i, hole_position)?;
    if i.contains(&particle_number) {
        return Err(Error::InvalidConfig(format!(
            "particle number {particle_number} collides with an occupied I"
        )));
    }
    if particle_number.doubled() < spec.n as i64 {
        return Err(Error::InvalidConfig(format!(
            "particle number {particle_number} must exceed (N-1)/2 = {}",
            HalfInt::from_doubled(spec.n as i64 - 1)
        )));
    }
    i.push(particle_number);
    i.sort();
    let qn = QuantumNumbers::new(i, ground.j, ground.jp);
    qn.validate(spec)?;
    Ok(qn)
}

/// (M, M') of the one-fermion excitation.
pub fn add_fermion_sector(case: CaseKind, n: usize) -> (usize, usize) {
    match case {
        CaseKind::Bff => (1, 0),
        CaseKind::Fbf => (n - 1, 0),
        CaseKind::Ffb => (n, n - 1),
    }
}

/// One boson replaced by a fermion.
///
/// `hole` (1-based) selects the vacancy in the `N + 1` re-paritied slots
/// (the `I` sequence for BFF and FBF, the `J` sequence for FFB). `j1` is
/// the single `J` for BFF, restricted to `−(N−1)/2 < J1 < (N−1)/2`, and the
/// vacant slot of the `J` (FBF) or `J'` (FFB) ground sequence otherwise.
pub fn add_fermion_numbers(spec: &MixtureSpec, j1: HalfInt, hole: usize) -> Result<QuantumNumbers> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::InvalidParameter("one-fermion excitation needs N >= 2".into()));
    }
    require_sector(spec, add_fermion_sector(spec.case, n), "one-fermion excitation")?;
    let p = spec.integer_parity();
    let qn = match spec.case {
        CaseKind::Bff => {
            if j1.doubled().abs() >= n as i64 - 1 {
                return Err(Error::InvalidConfig(format!(
                    "J1 = {j1} outside -(N-1)/2 < J1 < (N-1)/2"
                )));
            }
            let i = remove_hole(centered_run(n + 1, p[0], false), hole)?;
            QuantumNumbers::new(i, vec![j1], vec![])
        }
        CaseKind::Fbf => {
            let i = remove_hole(centered_run(n + 1, p[0], false), hole)?;
            let j = without(&centered_run(n, p[1], false), &[j1], "J1")?;
            QuantumNumbers::new(i, j, vec![])
        }
        CaseKind::Ffb => {
            let j = remove_hole(centered_run(n + 1, p[1], false), hole)?;
            let jp = without(&centered_run(n, p[2], false), &[j1], "J1")?;
            QuantumNumbers::new(centered_run(n, p[0], false), j, jp)
        }
    };
    qn.validate(spec)?;
    Ok(qn)
}

/// (M, M') of the two-fermion excitation.
pub fn two_fermion_sector(case: CaseKind, n: usize, opposite_spins: bool) -> Result<(usize, usize)> {
    match (case, opposite_spins) {
        (CaseKind::Bff, false) => Ok((2, 0)),
        (CaseKind::Bff, true) => Ok((2, 1)),
        (CaseKind::Fbf, false) => Ok((n - 2, 0)),
        (CaseKind::Ffb, false) => Ok((n, n - 2)),
        _ => Err(Error::InvalidConfig(
            "the up/down pair excitation is formulated for BFF only".into(),
        )),
    }
}

/// Two bosons replaced by fermions, `J1 < J2` with
/// `−(N−1)/2 ≤ J1, J2 ≤ (N−1)/2`.
///
/// For BFF the pair is both spin up (M'=0) or up and down (M'=1, `J' = {0}`);
/// for FBF/FFB `J1`, `J2` are the vacant slots of the spin ground sequence.
pub fn two_fermion_numbers(spec: &MixtureSpec, j1: HalfInt, j2: HalfInt) -> Result<QuantumNumbers> {
    let n = spec.n;
    if n < 3 {
        return Err(Error::InvalidParameter("two-fermion excitation needs N >= 3".into()));
    }
    if j1 == j2 {
        return Err(Error::InvalidConfig(format!("J1 = J2 = {j1} is excluded")));
    }
    if j1 > j2 {
        return Err(Error::InvalidConfig(format!("J1 = {j1} must be below J2 = {j2}")));
    }
    let bound = n as i64 - 1;
    if j1.doubled() < -bound || j2.doubled() > bound {
        return Err(Error::InvalidConfig(format!(
            "J1 = {j1}, J2 = {j2} outside [-(N-1)/2, (N-1)/2]"
        )));
    }
    let opposite = spec.case == CaseKind::Bff && spec.mp == 1;
    require_sector(
        spec,
        two_fermion_sector(spec.case, n, opposite)?,
        "two-fermion excitation",
    )?;
    let p = spec.integer_parity();
    let i = centered_run(n, p[0], false);
    let qn = match spec.case {
        CaseKind::Bff => {
            let jp = if opposite { vec![HalfInt::ZERO] } else { vec![] };
            QuantumNumbers::new(i, vec![j1, j2], jp)
        }
        CaseKind::Fbf => {
            let j = without(&centered_run(n, p[1], false), &[j1, j2], "J")?;
            QuantumNumbers::new(i, j, vec![])
        }
        CaseKind::Ffb => {
            let jp = without(&centered_run(n, p[2], false), &[j1, j2], "J")?;
            QuantumNumbers::new(i, centered_run(n, p[1], false), jp)
        }
    };
    qn.validate(spec)?;
    Ok(qn)
}

/// One point of an excitation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ExcitationFamily {
    GroundState,
    ParticleHole {
        hole_position: usize,
        particle_number: HalfInt,
    },
    AddOneFermion {
        j1: HalfInt,
        hole: usize,
    },
    TwoFermions {
        j1: HalfInt,
        j2: HalfInt,
        opposite_spins: bool,
    },
}

impl ExcitationFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ExcitationFamily::GroundState => "ground",
            ExcitationFamily::ParticleHole { .. } => "particle_hole",
            ExcitationFamily::AddOneFermion { .. } => "one_fermion",
            ExcitationFamily::TwoFermions { .. } => "two_fermion",
        }
    }

    /// Spec and quantum numbers of this configuration, starting from the
    /// ground-state spec.
    pub fn configure(&self, ground: &MixtureSpec) -> Result<(MixtureSpec, QuantumNumbers)> {
        let (case, n) = (ground.case, ground.n);
        require_sector(ground, ground_sector(case, n), "excitation sweep")?;
        let with = |(m, mp): (usize, usize)| MixtureSpec::new(case, n, m, mp, ground.length, ground.c);
        match *self {
            ExcitationFamily::GroundState => Ok((*ground, ground_state_numbers(ground)?)),
            ExcitationFamily::ParticleHole {
                hole_position,
                particle_number,
            } => Ok((*ground, particle_hole_numbers(ground, hole_position, particle_number)?)),
            ExcitationFamily::AddOneFermion { j1, hole } => {
                if n < 2 {
                    return Err(Error::InvalidParameter("one-fermion excitation needs N >= 2".into()));
                }
                let spec = with(add_fermion_sector(case, n))?;
                Ok((spec, add_fermion_numbers(&spec, j1, hole)?))
            }
            ExcitationFamily::TwoFermions { j1, j2, opposite_spins } => {
                if n < 3 {
                    return Err(Error::InvalidParameter("two-fermion excitation needs N >= 3".into()));
                }
                let spec = with(two_fermion_sector(case, n, opposite_spins)?)?;
                Ok((spec, two_fermion_numbers(&spec, j1, j2)?))
            }
        }
    }
}

/// Hole positions `1..=N` crossed with particle numbers
/// `(N−1)/2 + 1, …, (N−1)/2 + max_offset`.
pub fn particle_hole_sweep(n: usize, max_offset: usize) -> Vec<ExcitationFamily> {
    let mut out = Vec::with_capacity(n * max_offset);
    for hole_position in 1..=n {
        for d in 1..=max_offset as i64 {
            let particle_number = HalfInt::from_doubled(n as i64 - 1 + 2 * d);
            out.push(ExcitationFamily::ParticleHole {
                hole_position,
                particle_number,
            });
        }
    }
    out
}

/// Every admissible `(J1, hole)` of the one-fermion family.
pub fn add_fermion_sweep(ground: &MixtureSpec) -> Result<Vec<ExcitationFamily>> {
    let n = ground.n;
    let spec = {
        let (m, mp) = add_fermion_sector(ground.case, n);
        MixtureSpec::new(ground.case, n, m, mp, ground.length, ground.c)?
    };
    let p = spec.integer_parity();
    let j1s: Vec<HalfInt> = match spec.case {
        CaseKind::Bff => centered_run(n, p[1], false)
            .into_iter()
            .chain(centered_run(n, p[1], true))
            .filter(|q| q.doubled().abs() < n as i64 - 1)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect(),
        CaseKind::Fbf => centered_run(n, p[1], false),
        CaseKind::Ffb => centered_run(n, p[2], false),
    };
    let mut out = Vec::with_capacity(j1s.len() * (n + 1));
    for &j1 in &j1s {
        for hole in 1..=n + 1 {
            out.push(ExcitationFamily::AddOneFermion { j1, hole });
        }
    }
    Ok(out)
}

/// Every admissible `J1 < J2` of the two-fermion family.
pub fn two_fermion_sweep(ground: &MixtureSpec, opposite_spins: bool) -> Result<Vec<ExcitationFamily>> {
    let n = ground.n;
    let (m, mp) = two_fermion_sector(ground.case, n, opposite_spins)?;
    let spec = MixtureSpec::new(ground.case, n, m, mp, ground.length, ground.c)?;
    let p = spec.integer_parity();
    let integer = match spec.case {
        CaseKind::Bff | CaseKind::Fbf => p[1],
        CaseKind::Ffb => p[2],
    };
    let bound = n as i64 - 1;
    let slots: Vec<HalfInt> = (-bound..=bound)
        .filter(|d| (d.rem_euclid(2) == 0) == integer)
        .map(HalfInt::from_doubled)
        .collect();
    let mut out = Vec::new();
    for (a, &j1) in slots.iter().enumerate() {
        for &j2 in &slots[a + 1..] {
            out.push(ExcitationFamily::TwoFermions { j1, j2, opposite_spins });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Converged,
    Failed,
}

/// Momentum and excitation energy of one sweep configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub index: usize,
    pub family: ExcitationFamily,
    pub momentum: f64,
    /// `E − E_ground`; NaN for failed points.
    pub delta_e: f64,
    pub status: PointStatus,
}

/// Solves every configuration of `sweep` and subtracts the ground-state
/// energy of `ground`.
///
/// Points are processed in contiguous blocks in parallel; inside a block
/// each solve starts from the previous point's roots. A point whose
/// configuration is invalid makes the whole call fail; a point that does
/// not converge is returned with [`PointStatus::Failed`].
pub fn dispersion(ground: &MixtureSpec, sweep: &[ExcitationFamily]) -> Result<Vec<DispersionPoint>> {
    let configs = sweep.iter().map(|f| f.configure(ground)).collect::<Result<Vec<_>>>()?;
    let gqn = ground_state_numbers(ground)?;
    let groots = bae::solve(ground, &gqn, None)?;
    let e0 = bae::energy_momentum(ground, &gqn, &groots).energy;

    const BLOCK: usize = 16;
    let points = configs
        .par_chunks(BLOCK)
        .enumerate()
        .flat_map_iter(|(b, chunk)| {
            let mut warm: Option<(MixtureSpec, RootSet)> = None;
            let mut out = Vec::with_capacity(chunk.len());
            for (o, (spec, qn)) in chunk.iter().enumerate() {
                let index = b * BLOCK + o;
                let init = match &warm {
                    Some((s, r)) if (s.m, s.mp) == (spec.m, spec.mp) => Some(r),
                    _ if (spec.m, spec.mp) == (ground.m, ground.mp) => Some(&groots),
                    _ => None,
                };
                let momentum = bae::momentum_of(spec, qn);
                let point = match bae::solve(spec, qn, init) {
                    Ok(roots) => {
                        let e = bae::energy_momentum(spec, qn, &roots).energy;
                        warm = Some((*spec, roots));
                        DispersionPoint {
                            index,
                            family: sweep[index],
                            momentum,
                            delta_e: e - e0,
                            status: PointStatus::Converged,
                        }
                    }
                    Err(_) => DispersionPoint {
                        index,
                        family: sweep[index],
                        momentum,
                        delta_e: f64::NAN,
                        status: PointStatus::Failed,
                    },
                };
                out.push(point);
            }
            out
        })
        .collect();
    Ok(points)
}

/// Lowest Bethe state found for a BFF sector.
#[derive(Debug, Clone, PartialEq)]
pub struct LowestState {
    pub numbers: QuantumNumbers,
    pub roots: RootSet,
    pub energy: f64,
}

/// Values of the given parity with `|q| ≤ half_width_doubled / 2`.
fn window(integer: bool, half_width_doubled: i64) -> Vec<HalfInt> {
    (-half_width_doubled..=half_width_doubled)
        .filter(|d| (d.rem_euclid(2) == 0) == integer)
        .map(HalfInt::from_doubled)
        .collect()
}

/// `count` slots taken from the outer ends of `slots`, `left` of them on
/// the left.
fn edge_packed(slots: &[HalfInt], count: usize, left: usize) -> Option<Vec<HalfInt>> {
    let right = count.checked_sub(left)?;
    if count > slots.len() {
        return None;
    }
    let mut v: Vec<HalfInt> = slots[..left].to_vec();
    v.extend_from_slice(&slots[slots.len() - right..]);
    Some(v)
}

fn list_candidates(count: usize, integer: bool, slots: &[HalfInt]) -> Vec<Vec<HalfInt>> {
    let mut out = Vec::new();
    for shift_right in [false, true] {
        let run = centered_run(count, integer, shift_right);
        if run.iter().all(|q| slots.contains(q)) {
            out.push(run);
        }
    }
    for left in [count / 2, count - count / 2] {
        if let Some(v) = edge_packed(slots, count, left) {
            out.push(v);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Below this coupling the search reaches each configuration by
/// continuation from `c = 1` instead of trying cold guesses first.
const WEAK_SEARCH_COUPLING: f64 = 0.5;

fn solve_in_search(spec: &MixtureSpec, qn: &QuantumNumbers, init: Option<&RootSet>) -> Result<RootSet> {
    if spec.c >= WEAK_SEARCH_COUPLING {
        return bae::solve(spec, qn, init);
    }
    let opts = bae::SolverOptions {
        max_newton_steps: 50,
        continuation_start: 1.0,
        continuation_factor: 0.7,
        direct_guesses: false,
        ..Default::default()
    };
    bae::solve_with(spec, qn, init, &opts).map(|r| r.roots)
}

/// Searches the lowest-energy Bethe state of a BFF sector.
///
/// The search starts from centred and edge-packed arrangements of `J`
/// (within `|J| ≤ (N−M')/2`) and `J'` (within `|J'| ≤ (M−M')/2`), with the
/// `I` run centred or shifted by one half, and then moves single quantum
/// numbers to vacant neighbouring slots while the energy decreases.
/// `max_moves` bounds the number of accepted moves.
pub fn lowest_state(spec: &MixtureSpec, max_moves: usize) -> Result<LowestState> {
    if spec.case != CaseKind::Bff {
        return Err(Error::InvalidParameter("lowest_state searches BFF sectors".into()));
    }
    let (n, m, mp) = (spec.n as i64, spec.m as i64, spec.mp as i64);
    let p = spec.integer_parity();
    let i_slots = window(p[0], n + 3);
    let j_slots = window(p[1], n - mp);
    let jp_slots = window(p[2], m - mp);
    let slots = [i_slots, j_slots, jp_slots];

    let is = list_candidates(spec.n, p[0], &slots[0]);
    let js = list_candidates(spec.m, p[1], &slots[1]);
    let jps = list_candidates(spec.mp, p[2], &slots[2]);

    let mut seen: HashSet<QuantumNumbers> = HashSet::new();
    let mut best: Option<LowestState> = None;
    let mut last_error = None;
    let mut evaluate = |qn: QuantumNumbers, init: Option<&RootSet>, best: &Option<LowestState>| {
        if !seen.insert(qn.clone()) {
            return None;
        }
        match solve_in_search(spec, &qn, init) {
            Ok(roots) => {
                let energy = bae::energy_momentum(spec, &qn, &roots).energy;
                let better = best
                    .as_ref()
                    .is_none_or(|b| energy < b.energy - 1e-12 * b.energy.abs().max(1.0));
                better.then_some(LowestState {
                    numbers: qn,
                    roots,
                    energy,
                })
            }
            Err(e) => {
                last_error = Some(e);
                None
            }
        }
    };

    for i in &is {
        for j in &js {
            for jp in &jps {
                let qn = QuantumNumbers::new(i.clone(), j.clone(), jp.clone());
                let init = best.as_ref().map(|b| b.roots.clone());
                if let Some(s) = evaluate(qn, init.as_ref(), &best) {
                    best = Some(s);
                }
            }
        }
    }

    for _ in 0..max_moves {
        let Some(current) = best.clone() else { break };
        let mut improved = false;
        'search: for list in 0..3 {
            let entries = current.numbers.lists()[list].to_vec();
            for (a, q) in entries.iter().enumerate() {
                for step in [-2, 2] {
                    let moved = q.offset(step);
                    if !slots[list].contains(&moved) || entries.contains(&moved) {
                        continue;
                    }
                    let mut lists = [
                        current.numbers.i.clone(),
                        current.numbers.j.clone(),
                        current.numbers.jp.clone(),
                    ];
                    lists[list][a] = moved;
                    lists[list].sort();
                    let [i, j, jp] = lists;
                    let qn = QuantumNumbers::new(i, j, jp);
                    if let Some(s) = evaluate(qn, Some(&current.roots), &best) {
                        best = Some(s);
                        improved = true;
                        break 'search;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }

    best.ok_or_else(|| last_error.unwrap_or_else(|| Error::InvalidConfig("no admissible configuration".into())))
}
