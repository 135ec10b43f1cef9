//! End-to-end checks of the solver against limits, oracles and the
//! qualitative structure of spectra and phase diagrams.
//!
//! Runs without the libtest harness so that every check prints its
//! `PASS`/`FAIL` line; the process fails if any check fails. Arguments that
//! do not start with `-` select checks by substring.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bfmix::algebra::ybe_residual;
use bfmix::bae::{self, HalfInt, MixtureSpec, Populations, QuantumNumbers, RootSet};
use bfmix::cli::root_histogram;
use bfmix::excitations::{
    add_fermion_sweep, dispersion, ground_state_numbers, particle_hole_sweep, two_fermion_sweep, PointStatus,
};
use bfmix::phases::{
    free_energy, strong_coupling_phase, weak_coupling_phase, Admissibility, Axis, FieldPoint, PhaseLabel, SectorTable,
};
use bfmix::thermo::{solve_ground_density, solve_ground_density_with, ThermoOptions};
use bfmix::CaseKind;

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn report(name: &'static str, ok: bool, detail: String) -> Check {
    Check { name, ok, detail }
}

fn ground(case: CaseKind, n: usize, length: f64, c: f64) -> (MixtureSpec, QuantumNumbers, RootSet, f64) {
    let spec = MixtureSpec::ground(case, n, length, c).unwrap();
    let qn = ground_state_numbers(&spec).unwrap();
    let roots = bae::solve(&spec, &qn, None).unwrap();
    let e = bae::energy_momentum(&spec, &qn, &roots).energy;
    (spec, qn, roots, e)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn yang_baxter_random_points() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in CaseKind::ALL {
        for c in [0.1, 1.0, 100.0] {
            for _ in 0..1000 {
                let (a, b) = (rng.gen_range(-10.0..=10.0), rng.gen_range(-10.0..=10.0));
                worst = worst.max(ybe_residual(case, a, b, c).unwrap());
            }
        }
    }
    report(
        "yang-baxter",
        worst < 1e-10,
        format!("max residual {worst:.2e} over 9000 points"),
    )
}

/// Bulk spacing against `Δk L (1 + 2N/(cL)) = 2π`.
fn spacing_error(c: f64) -> f64 {
    let (n, l) = (42, 42.0);
    let (_, _, roots, _) = ground(CaseKind::Bff, n, l, c);
    let scale = l * (1.0 + 2.0 * n as f64 / (c * l)) / (2.0 * PI);
    roots.k[n / 4..3 * n / 4]
        .windows(2)
        .map(|w| ((w[1] - w[0]) * scale - 1.0).abs())
        .fold(0.0, f64::max)
}

fn strong_coupling_spacing_law() -> Check {
    let e100 = spacing_error(100.0);
    let e4 = spacing_error(1e4);
    report(
        "strong-coupling spacing",
        e100 < 0.02 && e4 < 5e-4,
        format!("max bulk deviation {e100:.2e} at c=100 (tol 2e-2), {e4:.2e} at c=1e4 (tol 5e-4)"),
    )
}

fn cross_case_boson_energies() -> Check {
    let mut worst: f64 = 0.0;
    for c in [0.1, 1.0, 10.0, 100.0] {
        for n in 2..=10 {
            let e: Vec<f64> = CaseKind::ALL
                .iter()
                .map(|&case| ground(case, n, n as f64, c).3)
                .collect();
            worst = worst.max(rel(e[1], e[0])).max(rel(e[2], e[0]));
        }
    }
    report(
        "cross-case energies",
        worst < 1e-8,
        format!("max relative spread {worst:.2e}"),
    )
}

fn lieb_liniger_reduction() -> Check {
    let mut worst: f64 = 0.0;
    let mut doubling: f64 = 0.0;
    for c in [1.0, 10.0] {
        let (_, _, _, e) = ground(CaseKind::Bff, 42, 42.0, c);
        let profile = solve_ground_density(c, 1.0).unwrap();
        worst = worst.max(rel(e / 42.0, profile.energy_per_length));
        let opts = ThermoOptions {
            nodes: 2 * profile.nodes(),
            max_nodes: 2 * profile.nodes(),
            ..Default::default()
        };
        let fine = solve_ground_density_with(c, 1.0, &opts).unwrap();
        doubling = doubling.max(rel(fine.energy_per_length, profile.energy_per_length));
    }
    report(
        "lieb-liniger reduction",
        worst < 0.05 && doubling < 1e-8,
        format!("finite-N vs thermodynamic {worst:.2e} (tol 5e-2), grid doubling {doubling:.2e} (tol 1e-8)"),
    )
}

fn free_fermion_limit() -> Check {
    let n = 1.0;
    let p = solve_ground_density(1e6, n).unwrap();
    let de = rel(p.energy_per_length, n * n * n * PI * PI / 3.0);
    let dk = rel(p.k_f, PI * n);
    report(
        "free-fermion limit",
        de < 1e-4 && dk < 1e-5,
        format!("E/L off by {de:.2e} (tol 1e-4), k_F off by {dk:.2e} (tol 1e-5)"),
    )
}

fn excitations_positive_and_histograms_narrow() -> Check {
    let mut min_de = f64::INFINITY;
    let mut converged = 0;
    let mut missing = Vec::new();
    for c in [1.0, 10.0] {
        for case in CaseKind::ALL {
            let spec = MixtureSpec::ground(case, 42, 42.0, c).unwrap();
            let mut sweeps = vec![
                ("particle-hole", particle_hole_sweep(42, 8)),
                ("one-fermion", add_fermion_sweep(&spec).unwrap()),
                ("two-fermion", two_fermion_sweep(&spec, false).unwrap()),
            ];
            if case == CaseKind::Bff {
                sweeps.push(("two-fermion-opposite", two_fermion_sweep(&spec, true).unwrap()));
            }
            for (name, sweep) in sweeps {
                let points = dispersion(&spec, &sweep).unwrap();
                let mut failed = 0;
                for p in &points {
                    match p.status {
                        PointStatus::Converged => {
                            converged += 1;
                            min_de = min_de.min(p.delta_e);
                        }
                        PointStatus::Failed => failed += 1,
                    }
                }
                if failed > 0 {
                    missing.push(format!("{case} {name} c={c}: {failed}/{}", points.len()));
                }
            }
        }
    }
    println!("points without a finite-root solution: {missing:?}");

    // Peak height grows and support shrinks as c decreases.
    let mut shape = Vec::new();
    for c in [100.0, 10.0, 1.0, 0.1] {
        let (spec, _, roots, _) = ground(CaseKind::Bff, 42, 42.0, c);
        let peak = root_histogram(&roots.k, spec.length)
            .iter()
            .map(|h| h.1)
            .fold(0.0, f64::max);
        let support = roots.k.iter().fold(0.0f64, |a, k| a.max(k.abs()));
        shape.push((peak, support));
    }
    let narrowing = shape.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1);
    report(
        "excitation positivity and histograms",
        min_de >= -1e-9 && narrowing,
        format!("{converged} converged points, min dE {min_de:.3e}; (peak, support) at c=100,10,1,0.1: {shape:.3?}"),
    )
}

/// All `count`-subsets of `slots`, ascending.
fn subsets(slots: &[HalfInt], count: usize) -> Vec<Vec<HalfInt>> {
    if count == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (a, &q) in slots.iter().enumerate() {
        for mut rest in subsets(&slots[a + 1..], count - 1) {
            rest.insert(0, q);
            out.push(rest);
        }
    }
    out
}

/// Values of the given parity with `|q| ≤ (count + 1)/2`: the centred run
/// plus one extra slot on each side.
fn window(count: usize, integer: bool) -> Vec<HalfInt> {
    let w = count as i64 + 1;
    (-w..=w)
        .filter(|d| (d.rem_euclid(2) == 0) == integer)
        .map(HalfInt::from_doubled)
        .collect()
}

fn ground_state_is_minimal() -> Check {
    let mut checked = 0;
    let mut skipped = 0;
    let mut violations = Vec::new();
    for c in [1.0, 10.0] {
        for case in CaseKind::ALL {
            for n in 2..=8 {
                let (spec, gqn, _, e0) = ground(case, n, n as f64, c);
                let p = spec.integer_parity();
                let is = subsets(&window(n, p[0]), n);
                // The spin lists of FBF (J) and FFB (J') fill every slot of
                // their bounds; FFB J gets the same window as I.
                let js = match case {
                    CaseKind::Ffb => subsets(&window(n, p[1]), n),
                    _ => vec![gqn.j.clone()],
                };
                for i in &is {
                    for j in &js {
                        let qn = QuantumNumbers::new(i.clone(), j.clone(), gqn.jp.clone());
                        if qn.validate(&spec).is_err() {
                            continue;
                        }
                        match bae::solve(&spec, &qn, None) {
                            Ok(r) => {
                                checked += 1;
                                let e = bae::energy_momentum(&spec, &qn, &r).energy;
                                if e < e0 - 1e-9 * e0.abs().max(1.0) {
                                    violations.push(format!("{case} N={n} c={c} E={e} < {e0}"));
                                }
                            }
                            Err(_) => skipped += 1,
                        }
                    }
                }
            }
        }
    }
    report(
        "ground-state optimality",
        violations.is_empty(),
        format!("{checked} configurations solved, {skipped} without solution, violations {violations:?}"),
    )
}

fn jacobian_matches_finite_differences() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let case = CaseKind::ALL[rng.gen_range(0..3)];
        let (n, m, mp) = loop {
            let n = rng.gen_range(1..=10usize);
            let m = rng.gen_range(0..=n);
            let mp = rng.gen_range(0..=m);
            if n + m + mp <= 12 {
                break (n, m, mp);
            }
        };
        let c = rng.gen_range(0.1..10.0);
        let spec = MixtureSpec::new(case, n, m, mp, n as f64, c).unwrap();
        let p = spec.integer_parity();
        let run = |count: usize, integer: bool| bfmix::excitations::centered_run(count, integer, false);
        let qn = QuantumNumbers::new(run(n, p[0]), run(m, p[1]), run(mp, p[2]));
        let mut draw = |len: usize| (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<f64>>();
        let roots = RootSet::new(draw(n), draw(m), draw(mp));
        let analytic = bae::jacobian(&spec, &qn, &roots).unwrap();
        let fd = finite_difference(&spec, &qn, &roots);
        let scale = analytic.amax().max(1.0);
        worst = worst.max((&analytic - &fd).amax() / scale);
    }
    report(
        "jacobian",
        worst < 1e-6,
        format!("max relative deviation {worst:.2e} over 100 instances"),
    )
}

fn finite_difference(spec: &MixtureSpec, qn: &QuantumNumbers, roots: &RootSet) -> DMatrix<f64> {
    let x: Vec<f64> = [roots.k.clone(), roots.lambda.clone(), roots.mu.clone()].concat();
    let dim = x.len();
    let split = |v: &[f64]| {
        RootSet::new(
            v[..spec.n].to_vec(),
            v[spec.n..spec.n + spec.m].to_vec(),
            v[spec.n + spec.m..].to_vec(),
        )
    };
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let h = 1e-6 * x[col].abs().max(1.0);
        let (mut plus, mut minus) = (x.clone(), x.clone());
        plus[col] += h;
        minus[col] -= h;
        let fp = bae::residual(spec, qn, &split(&plus)).unwrap();
        let fm = bae::residual(spec, qn, &split(&minus)).unwrap();
        for row in 0..dim {
            out[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    out
}

fn phase_diagram_structure() -> Check {
    let (n, l) = (42, 42.0);
    let unit = (2.0 * PI / l).powi(2);
    let mu_b = 2.0 * unit;
    let phase = |ratio: f64, h: f64| {
        weak_coupling_phase(
            &FieldPoint::from_ratio(ratio, h, mu_b).unwrap(),
            n,
            l,
            Admissibility::All,
        )
        .unwrap()
    };

    // B region meets the h-axis at h = 2 mu_B.
    let below = phase(0.0, 2.0 * mu_b * (1.0 - 1e-9)).label;
    let above = phase(0.0, 2.0 * mu_b * (1.0 + 1e-9)).label;
    let boundary = below == PhaseLabel::B && above != PhaseLabel::B;

    // Singlet pairs along the ratio axis at zero field.
    let mut pairs: Vec<usize> = Vec::new();
    for r in Axis::new(0.0, 8.0, 0.01).unwrap().values() {
        if let Some(s) = phase(r, 0.0).singlet_pairs() {
            if pairs.last() != Some(&s) {
                pairs.push(s);
            }
        }
    }
    let odd = pairs.len() >= 4 && pairs.iter().enumerate().all(|(i, &s)| s == 2 * i + 1);

    // Maximal pair count in the general c = 1 scan.
    let table = SectorTable::build(n, l, 1.0).unwrap();
    let mut max_pairs = 0;
    for r in Axis::linspace(0.0, 8.0, 100).unwrap().values() {
        for h in Axis::linspace(-12.0, 12.0, 101).unwrap().values() {
            let p = table.phase(&FieldPoint::from_ratio(r, h, 2.0).unwrap()).unwrap();
            max_pairs = max_pairs.max(p.singlet_pairs().unwrap_or(0));
        }
    }

    // Rhombus boundary constants from the filled-sea energies, in units
    // of (2π/L)²: (3↑,3↓) → (5↑,3↓) gives 2Δ + h, (5↑,3↓) → (5↑,5↓) gives 2Δ − h.
    let sea = |up, down| {
        free_energy(
            &Populations {
                bosons: n - up - down,
                up,
                down,
            },
            l,
        ) / unit
    };
    let plus = sea(5, 3) - sea(3, 3);
    let minus = sea(5, 5) - sea(5, 3);
    println!("rhombus boundary constants: 2Δ+h = {plus}, 2Δ−h = {minus} (units of (2π/L)²)");

    report(
        "phase-diagram structure",
        boundary && odd && max_pairs == 14 && table.failures().is_empty(),
        format!(
            "B boundary at h=2mu_B: {boundary} ({below} / {above}); pair sequence {pairs:?}; general c=1 max pairs {max_pairs}"
        ),
    )
}

/// Fraction of a 50×50 grid on which the general phase agrees with the
/// closed-form limit (Young-tableau admissible populations only).
fn agreement(c: f64, strong: bool) -> f64 {
    let (n, l, mu_b) = (42, 42.0, 1.0);
    let table = SectorTable::build(n, l, c).unwrap();
    let mut agree = 0;
    let mut total = 0;
    for r in Axis::linspace(0.0, 8.0, 50).unwrap().values() {
        for h in Axis::linspace(-6.0 * mu_b, 6.0 * mu_b, 50).unwrap().values() {
            let f = FieldPoint::from_ratio(r, h, mu_b).unwrap();
            let g = table.phase(&f).unwrap();
            let limit = if strong {
                strong_coupling_phase(&f, n, l, Admissibility::YoungTableau)
            } else {
                weak_coupling_phase(&f, n, l, Admissibility::YoungTableau)
            }
            .unwrap();
            total += 1;
            agree += usize::from(g.label == limit.label);
        }
    }
    agree as f64 / total as f64
}

fn general_phase_matches_limits() -> Check {
    let strong = agreement(1e3, true);
    let weak = agreement(1e-3, false);
    report(
        "general phase vs closed forms",
        strong >= 0.95 && weak >= 0.95,
        format!(
            "label agreement {:.1}% at c=1e3, {:.1}% at c=1e-3 (need 95%)",
            100.0 * strong,
            100.0 * weak
        ),
    )
}

type CheckFn = fn() -> Check;

fn main() {
    let checks: [(&str, CheckFn); 10] = [
        ("yang_baxter_random_points", yang_baxter_random_points),
        ("strong_coupling_spacing_law", strong_coupling_spacing_law),
        ("cross_case_boson_energies", cross_case_boson_energies),
        ("lieb_liniger_reduction", lieb_liniger_reduction),
        ("free_fermion_limit", free_fermion_limit),
        (
            "excitations_positive_and_histograms_narrow",
            excitations_positive_and_histograms_narrow,
        ),
        ("ground_state_is_minimal", ground_state_is_minimal),
        (
            "jacobian_matches_finite_differences",
            jacobian_matches_finite_differences,
        ),
        ("phase_diagram_structure", phase_diagram_structure),
        ("general_phase_matches_limits", general_phase_matches_limits),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected: Vec<_> = checks
        .iter()
        .filter(|(name, _)| filters.is_empty() || filters.iter().any(|f| name.contains(f.as_str())))
        .collect();
    let results: Vec<Check> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&&(name, check)| (name, scope.spawn(check)))
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| {
                h.join().unwrap_or_else(|e| {
                    let msg = e
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default();
                    Check {
                        name: "",
                        ok: false,
                        detail: format!("{name} panicked: {msg}"),
                    }
                })
            })
            .collect()
    });
    let mut failed = 0;
    for r in &results {
        println!("{} {}: {}", if r.ok { "PASS" } else { "FAIL" }, r.name, r.detail);
        failed += usize::from(!r.ok);
    }
    println!(
        "{} checks, {} passed, {failed} failed",
        results.len(),
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
