//! Command-line front end.
//!
//! Every subcommand writes one or more CSV tables and a JSON manifest with
//! all inputs and tolerances into `--out`. Floats are printed with 17
//! significant digits, so identical inputs give byte-identical files.
//!
//! Exit status: 0 success, 2 usage error, 3 invalid parameters,
//! 4 numerical failure (non-convergence or a failed check), 5 I/O error.
//! `BFMIX_THREADS` sets the worker count.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

// Summary lines on stdout; a closed pipe is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

use crate::algebra::{ybe_residual_with, CaseKind, Embedding};
use crate::bae::{self, solve_with, MixtureSpec, QuantumNumbers, RootSet, SolverOptions};
use crate::error::Error;
use crate::excitations::{self, ExcitationFamily, PointStatus};
use crate::phases::{self, Admissibility, Axis, Regime, ScanGrid};
use crate::thermo::{self, ThermoOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug)]
enum Failure {
    Model(Error),
    Check(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Model(Error::NonConvergence { .. }) | Failure::Check(_) => EXIT_NUMERICAL,
            Failure::Model(_) => EXIT_INVALID,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Model(e) => write!(f, "{e}"),
            Failure::Check(s) => write!(f, "check failed: {s}"),
            Failure::Io(s) => write!(f, "output error: {s}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

#[derive(Debug, Parser)]
#[command(name = "bfmix", version, about = "Bethe-ansatz solver for the 1D Bose-Fermi mixture")]
struct Cli {
    /// Directory for CSV tables and manifests.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseArg {
    Bff,
    Fbf,
    Ffb,
}

impl From<CaseArg> for CaseKind {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Bff => CaseKind::Bff,
            CaseArg::Fbf => CaseKind::Fbf,
            CaseArg::Ffb => CaseKind::Ffb,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EmbeddingArg {
    Graded,
    Ordinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    ParticleHole,
    OneFermion,
    TwoFermion,
    TwoFermionOpposite,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    Weak,
    Strong,
    General,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AdmissibilityArg {
    All,
    Tableau,
}

#[derive(Debug, clap::Args)]
struct SystemArgs {
    #[arg(long, value_enum, default_value = "bff")]
    case: CaseArg,
    #[arg(long)]
    n: usize,
    /// Box length; defaults to N.
    #[arg(long)]
    l: Option<f64>,
}

impl SystemArgs {
    fn length(&self) -> f64 {
        self.l.unwrap_or(self.n as f64)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Yang–Baxter residuals at random spectral parameters.
    #[command(allow_negative_numbers = true)]
    YbeCheck {
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,100")]
        c: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Spectral parameters are drawn from [-range, range].
        #[arg(long, default_value_t = 10.0)]
        range: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value = "graded")]
        embedding: EmbeddingArg,
    },
    /// Solve one eigenstate and print roots, energy and momentum.
    #[command(allow_negative_numbers = true)]
    Ground {
        #[command(flatten)]
        system: SystemArgs,
        /// Defaults to the all-boson sector of the chosen case.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        mp: Option<usize>,
        #[arg(long)]
        c: f64,
    },
    /// Excitation dispersions above the all-boson ground state.
    #[command(allow_negative_numbers = true)]
    Excite {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        c: f64,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "particle-hole,one-fermion,two-fermion"
        )]
        family: Vec<FamilyArg>,
        /// Particle numbers above the sea reached by the particle-hole sweep.
        #[arg(long, default_value_t = 8)]
        max_offset: usize,
    },
    /// Finite-N root-density histogram of the ground state.
    #[command(allow_negative_numbers = true)]
    Density {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        mp: Option<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
    },
    /// Thermodynamic-limit density and dressed excitation energies.
    #[command(allow_negative_numbers = true)]
    Thermo {
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
        /// Linear density N/L.
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        /// Hole momenta sampled uniformly across the Fermi sea.
        #[arg(long, default_value_t = 41)]
        holes: usize,
        /// Fermion rapidities, start:stop:step.
        #[arg(long, default_value = "-5:5:0.25", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 200)]
        nodes: usize,
    },
    /// Phase-diagram scan over (mu_f/mu_B, h/mu_B).
    #[command(allow_negative_numbers = true)]
    Phase {
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: Option<f64>,
        /// Coupling, used by the general regime.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value = "0:8:0.05")]
        ratio: String,
        /// Field in units of mu_B.
        #[arg(long, default_value = "-6:6:0.05", allow_hyphen_values = true)]
        h: String,
        /// Boson chemical potential; defaults to 2(2π/L)² for the weak
        /// regime and 2 otherwise.
        #[arg(long)]
        mu_b: Option<f64>,
        #[arg(long, value_enum, default_value = "all")]
        admissibility: AdmissibilityArg,
    },
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("bfmix: {f}");
            f.code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("BFMIX_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        // A pool that is already up (repeated calls in one process) is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    fs::create_dir_all(&cli.out).map_err(|e| Failure::Io(format!("{}: {e}", cli.out.display())))?;
    match &cli.command {
        Command::YbeCheck {
            c,
            samples,
            seed,
            range,
            tol,
            embedding,
        } => ybe_check(&cli.out, c, *samples, *seed, *range, *tol, *embedding),
        Command::Ground { system, m, mp, c } => ground(&cli.out, system, *m, *mp, *c),
        Command::Excite {
            system,
            c,
            family,
            max_offset,
        } => excite(&cli.out, system, *c, family, *max_offset),
        Command::Density { system, m, mp, c } => density(&cli.out, system, *m, *mp, c),
        Command::Thermo {
            c,
            density,
            holes,
            lambda,
            nodes,
        } => thermo_tables(&cli.out, c, *density, *holes, &lambda.parse()?, *nodes),
        Command::Phase {
            regime,
            n,
            l,
            c,
            ratio,
            h,
            mu_b,
            admissibility,
        } => phase(
            &cli.out,
            *regime,
            *n,
            *l,
            *c,
            &ratio.parse()?,
            &h.parse()?,
            *mu_b,
            *admissibility,
        ),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> std::result::Result<String, Failure> {
    let path = dir.join(name);
    let io = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(name.to_string())
}

fn write_manifest(dir: &Path, command: &str, manifest: Value) -> Outcome {
    let mut m = manifest;
    m["command"] = json!(command);
    m["version"] = json!(env!("CARGO_PKG_VERSION"));
    let path = dir.join(format!("{command}.manifest.json"));
    let text = serde_json::to_string_pretty(&m).map_err(|e| Failure::Io(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn solver_json() -> Value {
    serde_json::to_value(SolverOptions::default()).unwrap_or(Value::Null)
}

fn check_positive(name: &str, x: f64) -> Outcome {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")).into())
    }
}

fn ybe_check(
    out: &Path,
    cs: &[f64],
    samples: usize,
    seed: u64,
    range: f64,
    tol: f64,
    embedding: EmbeddingArg,
) -> Outcome {
    check_positive("range", range)?;
    check_positive("tol", tol)?;
    for &c in cs {
        check_positive("c", c)?;
    }
    let emb = match embedding {
        EmbeddingArg::Graded => Embedding::Graded,
        EmbeddingArg::Ordinary => Embedding::Ordinary,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-range, range);
    let mut rows = Vec::new();
    let mut worst: Vec<Value> = Vec::new();
    let mut max_all = 0.0f64;
    for case in [CaseKind::Bff, CaseKind::Fbf, CaseKind::Ffb] {
        for &c in cs {
            let mut max = 0.0f64;
            for _ in 0..samples {
                let (a, b) = (dist.sample(&mut rng), dist.sample(&mut rng));
                let r = ybe_residual_with(case, a, b, c, emb)?;
                max = max.max(r);
                rows.push(vec![case.to_string(), num(c), num(a), num(b), num(r)]);
            }
            max_all = max_all.max(max);
            worst.push(json!({"case": case.to_string(), "c": c, "max_residual": max}));
            say!("{case} c={c}: max residual {max:.3e}");
        }
    }
    let file = write_csv(out, "ybe.csv", &["case", "c", "alpha", "beta", "residual"], &rows)?;
    write_manifest(
        out,
        "ybe-check",
        json!({
            "equation_sets": ["bff", "fbf", "ffb"],
            "parameters": {"c": cs, "samples": samples, "seed": seed, "range": range,
                           "embedding": format!("{embedding:?}").to_lowercase()},
            "tolerances": {"residual": tol},
            "results": worst,
            "outputs": [file],
        }),
    )?;
    if max_all >= tol {
        return Err(Failure::Check(format!("max residual {max_all:.3e} >= {tol:.1e}")));
    }
    Ok(())
}

/// Spec, quantum numbers and roots of the requested state: the symmetric
/// ground configuration for the all-boson sector, the lowest state found
/// by search for other BFF sectors.
fn solve_state(
    system: &SystemArgs,
    m: Option<usize>,
    mp: Option<usize>,
    c: f64,
) -> std::result::Result<(MixtureSpec, QuantumNumbers, RootSet, usize), Failure> {
    let case: CaseKind = system.case.into();
    let ground = MixtureSpec::ground(case, system.n, system.length(), c)?;
    let spec = MixtureSpec::new(
        case,
        system.n,
        m.unwrap_or(ground.m),
        mp.unwrap_or(ground.mp),
        system.length(),
        c,
    )?;
    if (spec.m, spec.mp) == (ground.m, ground.mp) {
        let qn = excitations::ground_state_numbers(&spec)?;
        let report = solve_with(&spec, &qn, None, &SolverOptions::default())?;
        return Ok((spec, qn, report.roots, report.newton_steps));
    }
    if case != CaseKind::Bff {
        return Err(Error::InvalidParameter(
            "sectors other than the all-boson one are searched in the bff case only".into(),
        )
        .into());
    }
    let low = excitations::lowest_state(&spec, phases::SECTOR_SEARCH_MOVES)?;
    Ok((spec, low.numbers, low.roots, 0))
}

fn spec_json(spec: &MixtureSpec) -> Value {
    json!({"case": spec.case.to_string(), "n": spec.n, "m": spec.m, "mp": spec.mp,
           "length": spec.length, "c": spec.c})
}

fn ground(out: &Path, system: &SystemArgs, m: Option<usize>, mp: Option<usize>, c: f64) -> Outcome {
    let (spec, qn, roots, steps) = solve_state(system, m, mp, c)?;
    let obs = bae::energy_momentum(&spec, &qn, &roots);
    let residual = bae::residual(&spec, &qn, &roots)?
        .iter()
        .fold(0.0f64, |a, r| a.max(r.abs()));
    let mut rows = Vec::new();
    for (set, values, numbers) in [
        ("k", &roots.k, &qn.i),
        ("lambda", &roots.lambda, &qn.j),
        ("mu", &roots.mu, &qn.jp),
    ] {
        for (i, (v, q)) in values.iter().zip(numbers).enumerate() {
            rows.push(vec![set.to_string(), i.to_string(), q.to_string(), num(*v)]);
        }
    }
    say!("E = {}", num(obs.energy));
    say!("P = {}", num(obs.momentum));
    for set in ["k", "lambda", "mu"] {
        let vals: Vec<String> = rows.iter().filter(|r| r[0] == set).map(|r| r[3].clone()).collect();
        if !vals.is_empty() {
            say!("{set} = [{}]", vals.join(", "));
        }
    }
    let file = write_csv(out, "ground.csv", &["set", "index", "quantum_number", "root"], &rows)?;
    write_manifest(
        out,
        "ground",
        json!({
            "equation_set": spec.case.to_string(),
            "parameters": spec_json(&spec),
            "tolerances": {"solver": solver_json()},
            "results": {"energy": obs.energy, "momentum": obs.momentum, "residual": residual,
                        "newton_steps": steps},
            "outputs": [file],
        }),
    )
}

fn family_config(f: &ExcitationFamily) -> String {
    match f {
        ExcitationFamily::GroundState => String::new(),
        ExcitationFamily::ParticleHole {
            hole_position,
            particle_number,
        } => {
            format!("hole={hole_position};particle={particle_number}")
        }
        ExcitationFamily::AddOneFermion { j1, hole } => format!("j1={j1};hole={hole}"),
        ExcitationFamily::TwoFermions { j1, j2, .. } => format!("j1={j1};j2={j2}"),
    }
}

fn excite(out: &Path, system: &SystemArgs, c: f64, families: &[FamilyArg], max_offset: usize) -> Outcome {
    let ground = MixtureSpec::ground(system.case.into(), system.n, system.length(), c)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut failed = 0;
    let mut seen = Vec::new();
    for &fam in families {
        if seen.contains(&fam) {
            continue;
        }
        seen.push(fam);
        let sweep = match fam {
            FamilyArg::ParticleHole => excitations::particle_hole_sweep(ground.n, max_offset),
            FamilyArg::OneFermion => excitations::add_fermion_sweep(&ground)?,
            FamilyArg::TwoFermion => excitations::two_fermion_sweep(&ground, false)?,
            FamilyArg::TwoFermionOpposite => excitations::two_fermion_sweep(&ground, true)?,
        };
        let points = excitations::dispersion(&ground, &sweep)?;
        let name = format!("{fam:?}");
        let mut min_de = f64::INFINITY;
        let mut fails = 0;
        for p in &points {
            if p.status == PointStatus::Failed {
                fails += 1;
            } else {
                min_de = min_de.min(p.delta_e);
            }
            let status = match p.status {
                PointStatus::Converged => "converged",
                PointStatus::Failed => "failed",
            };
            rows.push(vec![
                p.family.name().to_string(),
                p.index.to_string(),
                family_config(&p.family),
                num(p.momentum),
                num(p.delta_e),
                status.to_string(),
            ]);
        }
        failed += fails;
        say!("{name}: {} points, {fails} failed, min dE {min_de:.6e}", points.len());
        summary.push(json!({"family": name, "points": points.len(), "failed": fails, "min_delta_e": min_de}));
    }
    let file = write_csv(
        out,
        "excite.csv",
        &["family", "index", "config", "momentum", "delta_e", "status"],
        &rows,
    )?;
    write_manifest(
        out,
        "excite",
        json!({
            "equation_set": ground.case.to_string(),
            "parameters": {"ground": spec_json(&ground), "max_offset": max_offset},
            "tolerances": {"solver": solver_json()},
            "results": summary,
            "outputs": [file],
        }),
    )?;
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} sweep points did not converge")));
    }
    Ok(())
}

/// `ρ(k) = 1/(L (k_{j+1} − k_j))` at the midpoints of consecutive roots.
pub fn root_histogram(k: &[f64], length: f64) -> Vec<(f64, f64)> {
    let mut k = k.to_vec();
    k.sort_by(f64::total_cmp);
    k.windows(2)
        .map(|w| (0.5 * (w[0] + w[1]), 1.0 / (length * (w[1] - w[0]))))
        .collect()
}

fn density(out: &Path, system: &SystemArgs, m: Option<usize>, mp: Option<usize>, cs: &[f64]) -> Outcome {
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut case = String::new();
    for &c in cs {
        let (spec, _, roots, _) = solve_state(system, m, mp, c)?;
        case = spec.case.to_string();
        let hist = root_histogram(&roots.k, spec.length);
        let peak = hist.iter().map(|h| h.1).fold(0.0, f64::max);
        for (k, rho) in &hist {
            rows.push(vec![num(c), num(*k), num(*rho)]);
        }
        say!("c={c}: peak density {peak:.6e}");
        results.push(json!({"c": c, "peak": peak, "span": roots.k.iter().fold(0.0f64, |a, x| a.max(x.abs()))}));
    }
    let file = write_csv(out, "density.csv", &["c", "k", "rho"], &rows)?;
    write_manifest(
        out,
        "density",
        json!({
            "equation_set": case,
            "parameters": {"n": system.n, "length": system.length(), "m": m, "mp": mp, "c": cs},
            "tolerances": {"solver": solver_json()},
            "results": results,
            "outputs": [file],
        }),
    )
}

fn thermo_tables(out: &Path, cs: &[f64], n_density: f64, holes: usize, lambda: &Axis, nodes: usize) -> Outcome {
    check_positive("density", n_density)?;
    if holes < 2 {
        return Err(Error::InvalidParameter("need at least two hole momenta".into()).into());
    }
    let opts = ThermoOptions {
        nodes,
        ..ThermoOptions::default()
    };
    let mut rho_rows = Vec::new();
    let mut xi_rows = Vec::new();
    let mut results = Vec::new();
    for &c in cs {
        let p = thermo::solve_ground_density_with(c, n_density, &opts)?;
        for (k, r) in p.grid.iter().zip(&p.values) {
            rho_rows.push(vec![num(c), num(*k), num(*r)]);
        }
        for i in 0..holes {
            let kbar = -p.k_f + 2.0 * p.k_f * i as f64 / (holes - 1) as f64;
            xi_rows.push(vec![
                num(c),
                "hole".into(),
                num(kbar),
                num(thermo::hole_energy(&p, kbar)?),
            ]);
        }
        for lam in lambda.values() {
            xi_rows.push(vec![
                num(c),
                "fermion".into(),
                num(lam),
                num(thermo::fermion_dressed_energy(&p, lam)?),
            ]);
        }
        say!(
            "c={c}: k_F {:.12e}, E/L {:.12e}, nodes {}",
            p.k_f,
            p.energy_per_length,
            p.nodes()
        );
        results.push(json!({"c": c, "k_f": p.k_f, "energy_per_length": p.energy_per_length,
                            "nodes": p.nodes(), "residual": p.residual()}));
    }
    let f1 = write_csv(out, "thermo_rho.csv", &["c", "k", "rho"], &rho_rows)?;
    let f2 = write_csv(out, "thermo_xi.csv", &["c", "kind", "parameter", "xi"], &xi_rows)?;
    write_manifest(
        out,
        "thermo",
        json!({
            "equation_set": "bff",
            "parameters": {"c": cs, "density": n_density, "holes": holes, "lambda": lambda},
            "tolerances": opts,
            "results": results,
            "outputs": [f1, f2],
        }),
    )
}

#[allow(clippy::too_many_arguments)]
fn phase(
    out: &Path,
    regime: RegimeArg,
    n: usize,
    l: Option<f64>,
    c: f64,
    ratio: &Axis,
    h: &Axis,
    mu_b: Option<f64>,
    adm: AdmissibilityArg,
) -> Outcome {
    let length = l.unwrap_or(n as f64);
    check_positive("l", length)?;
    check_positive("c", c)?;
    let regime = match regime {
        RegimeArg::Weak => Regime::Weak,
        RegimeArg::Strong => Regime::Strong,
        RegimeArg::General => Regime::General,
    };
    let adm = match adm {
        AdmissibilityArg::All => Admissibility::All,
        AdmissibilityArg::Tableau => Admissibility::YoungTableau,
    };
    let mu_b = mu_b.unwrap_or(match regime {
        Regime::Weak => 2.0 * (2.0 * PI / length).powi(2),
        _ => 2.0,
    });
    check_positive("mu_b", mu_b)?;
    let grid = ScanGrid {
        ratio: *ratio,
        h: *h,
        mu_b,
    };
    let points = phases::phase_scan(regime, &grid, c, n, length, adm)?;
    let (rs, hs) = (ratio.values(), h.values());
    let mut rows = Vec::with_capacity(points.len());
    let mut failed = 0;
    let mut max_pairs = 0;
    for (idx, p) in points.iter().enumerate() {
        let (r, hv) = (rs[idx / hs.len()], hs[idx % hs.len()]);
        match p {
            Ok(p) => {
                max_pairs = max_pairs.max(p.singlet_pairs().unwrap_or(0));
                let q = p.populations;
                rows.push(vec![
                    num(r),
                    num(hv),
                    q.bosons.to_string(),
                    q.up.to_string(),
                    q.down.to_string(),
                    p.label.to_string(),
                ]);
            }
            Err(_) => {
                failed += 1;
                rows.push(vec![
                    num(r),
                    num(hv),
                    String::new(),
                    String::new(),
                    String::new(),
                    "FAILED".into(),
                ]);
            }
        }
    }
    say!(
        "{} points, {failed} failed, max singlet pairs {max_pairs}",
        points.len()
    );
    let file = write_csv(
        out,
        "phase.csv",
        &["ratio", "h", "N_B", "N_up", "N_down", "label"],
        &rows,
    )?;
    write_manifest(
        out,
        "phase",
        json!({
            "equation_set": "bff",
            "parameters": {"regime": regime, "n": n, "length": length, "c": c, "grid": grid,
                           "h_units": "mu_b", "admissibility": adm},
            "tie_break": "more bosons, then majority spin along the field",
            "tolerances": {"solver": solver_json(), "sector_search_moves": phases::SECTOR_SEARCH_MOVES},
            "results": {"points": points.len(), "failed": failed, "max_singlet_pairs": max_pairs},
            "outputs": [file],
        }),
    )?;
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} grid points could not be classified")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("bfmix")
            .chain(s.split_whitespace())
            .map(String::from)
            .collect()
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(&args("frobnicate")), EXIT_USAGE);
        assert_eq!(run(&args("ground --n 2 --c 1 --bogus 3")), EXIT_USAGE);
        assert_eq!(run(&args("--help")), EXIT_OK);
    }

    #[test]
    fn histogram_of_uniform_roots() {
        let h = root_histogram(&[0.5, -0.5, 1.5], 2.0);
        assert_eq!(h, vec![(0.0, 0.5), (1.0, 0.5)]);
    }
}
