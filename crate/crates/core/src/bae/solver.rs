//! Damped Newton iteration with coupling continuation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{max_norm, theta, MixtureSpec, QuantumNumbers, RootSet, System};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Max-norm of the residual accepted as converged.
    pub tolerance: f64,
    pub max_newton_steps: usize,
    pub max_halvings: usize,
    /// Coupling at which continuation starts when the direct solve fails.
    pub continuation_start: f64,
    /// Geometric factor between successive continuation couplings.
    pub continuation_factor: f64,
    /// Try the strong-coupling and counting guesses at the target coupling
    /// before falling back to continuation.
    pub direct_guesses: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_newton_steps: 200,
            max_halvings: 30,
            continuation_start: 100.0,
            continuation_factor: 0.8,
            direct_guesses: true,
        }
    }
}

/// Which route produced the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Newton from the caller's roots.
    Provided,
    /// Newton from the strong-coupling guess.
    StrongCoupling,
    /// Newton from the strong-coupling guess with λ, μ placed by their own
    /// counting functions.
    Counting,
    /// Continuation downward in `c`.
    Continuation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub roots: RootSet,
    pub residual: f64,
    /// Newton steps of the final (successful) run.
    pub newton_steps: usize,
    pub strategy: Strategy,
}

/// Solves the Bethe equations for `qn`; see [`solve_with`].
pub fn solve(spec: &MixtureSpec, qn: &QuantumNumbers, init: Option<&RootSet>) -> Result<RootSet> {
    solve_with(spec, qn, init, &SolverOptions::default()).map(|r| r.roots)
}

/// Solves the Bethe equations, trying in turn the provided roots, the
/// strong-coupling guess, the counting-function guess and finally a
/// continuation from strong coupling.
pub fn solve_with(
    spec: &MixtureSpec,
    qn: &QuantumNumbers,
    init: Option<&RootSet>,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let system = System::new(spec, qn)?;
    let mut best = f64::INFINITY;
    let mut total_steps = 0;

    let mut attempt = |x0: Vec<f64>, strategy: Strategy, best: &mut f64| -> Option<SolveReport> {
        match newton(&system, x0, opts) {
            Ok((x, steps, res)) => Some(SolveReport {
                roots: RootSet::from_flat(&x, spec).sorted(),
                residual: res,
                newton_steps: steps,
                strategy,
            }),
            Err(fail) => {
                *best = best.min(fail.best_residual);
                total_steps += fail.steps;
                None
            }
        }
    };

    if let Some(init) = init {
        init.check_sizes(spec)?;
        if let Some(rep) = attempt(init.flatten(), Strategy::Provided, &mut best) {
            return Ok(rep);
        }
    }
    if opts.direct_guesses {
        if let Some(rep) = attempt(strong_coupling_guess(&system), Strategy::StrongCoupling, &mut best) {
            return Ok(rep);
        }
        if let Some(rep) = attempt(counting_guess(&system), Strategy::Counting, &mut best) {
            return Ok(rep);
        }
    }
    match continuation(&system, opts) {
        Ok((x, steps, res)) => Ok(SolveReport {
            roots: RootSet::from_flat(&x, spec).sorted(),
            residual: res,
            newton_steps: steps,
            strategy: Strategy::Continuation,
        }),
        Err(fail) => Err(Error::NonConvergence {
            iterations: total_steps + fail.steps,
            best_residual: best.min(fail.best_residual),
        }),
    }
}

#[derive(Debug, Clone, Copy)]
struct Failure {
    steps: usize,
    best_residual: f64,
}

/// Damped Newton: full step, halved until the residual 2-norm decreases.
fn newton(
    system: &System,
    mut x: Vec<f64>,
    opts: &SolverOptions,
) -> std::result::Result<(Vec<f64>, usize, f64), Failure> {
    let dim = system.dim();
    if dim == 0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = vec![0.0; dim];
    let mut trial_r = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut jac = DMatrix::zeros(dim, dim);

    system.residual(&x, &mut r);
    let mut best = max_norm(&r);
    for step in 0..opts.max_newton_steps {
        let res = max_norm(&r);
        best = best.min(res);
        if res < opts.tolerance {
            return Ok((x, step, res));
        }
        if !res.is_finite() {
            return Err(Failure {
                steps: step,
                best_residual: best,
            });
        }
        system.jacobian(&x, &mut jac);
        let rhs = DVector::from_iterator(dim, r.iter().map(|v| -v));
        let Some(delta) = jac.clone().lu().solve(&rhs) else {
            return Err(Failure {
                steps: step,
                best_residual: best,
            });
        };
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Failure {
                steps: step,
                best_residual: best,
            });
        }

        let norm0 = l2(&r);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            for i in 0..dim {
                trial[i] = x[i] + t * delta[i];
            }
            system.residual(&trial, &mut trial_r);
            let norm1 = l2(&trial_r);
            if norm1.is_finite() && (norm1 <= (1.0 - 1e-4 * t) * norm0 || max_norm(&trial_r) < opts.tolerance) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Failure {
                steps: step + 1,
                best_residual: best,
            });
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut r, &mut trial_r);
    }
    let res = max_norm(&r);
    if res < opts.tolerance {
        return Ok((x, opts.max_newton_steps, res));
    }
    Err(Failure {
        steps: opts.max_newton_steps,
        best_residual: best.min(res),
    })
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `k_j = 2π I_j / (L (1 + 2N/(cL)))`, with λ and μ spread evenly over the
/// k interval.
fn strong_coupling_guess(system: &System) -> Vec<f64> {
    let spec = system.spec();
    let (n, m, mp) = (spec.n, spec.m, spec.mp);
    let scale = 1.0 / (spec.length * (1.0 + 2.0 * n as f64 / (spec.c * spec.length)));
    let mut x: Vec<f64> = (0..n).map(|j| system.phase(j) * scale).collect();
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = |count: usize| -> Vec<f64> {
        (0..count)
            .map(|i| {
                if count == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                }
            })
            .collect()
    };
    x.extend(spread(m));
    x.extend(spread(mp));
    x
}

/// Strong-coupling k, then each λ from `2πJ = Σ_l Θ₋½(λ − k_l)` and each μ
/// from `2πJ' = Σ_α Θ₋½(μ − λ_α)`, ignoring the remaining couplings.
fn counting_guess(system: &System) -> Vec<f64> {
    let spec = system.spec();
    let (n, m) = (spec.n, spec.m);
    let mut x = strong_coupling_guess(system);
    let ks = x[..n].to_vec();
    for g in 0..m {
        x[n + g] = invert_counting(&ks, system.phase(n + g), spec.c);
    }
    let lambdas = x[n..n + m].to_vec();
    for b in 0..spec.mp {
        x[n + m + b] = invert_counting(&lambdas, system.phase(n + m + b), spec.c);
    }
    x
}

/// Solves `Σ_y Θ₋½(x − y) = target` for x by bisection (the left side
/// increases monotonically from −|y|π to |y|π).
fn invert_counting(ys: &[f64], target: f64, c: f64) -> f64 {
    if ys.is_empty() {
        return 0.0;
    }
    let bound = ys.len() as f64 * PI;
    let target = target.clamp(-bound * 0.999, bound * 0.999);
    let f = |x: f64| ys.iter().map(|y| theta(-0.5, x - y, c)).sum::<f64>() - target;
    let lo_y = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_y = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut width = c.max(1.0);
    let (mut lo, mut hi) = (lo_y - width, hi_y + width);
    while f(lo) > 0.0 && width < 1e15 {
        width *= 2.0;
        lo = lo_y - width;
    }
    while f(hi) < 0.0 && width < 1e15 {
        width *= 2.0;
        hi = hi_y + width;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

const CONTINUATION_STEP_BUDGET: usize = 25;

/// Solves at `max(c, continuation_start)` and walks `c` down geometrically,
/// shrinking the step whenever Newton fails to follow.
fn continuation(system: &System, opts: &SolverOptions) -> std::result::Result<(Vec<f64>, usize, f64), Failure> {
    let target = system.spec().c;
    let mut c = target.max(opts.continuation_start);
    let start = system.with_coupling(c);
    let (mut x, mut steps, mut res) = newton(&start, counting_guess(&start), opts)
        .or_else(|_| newton(&start, strong_coupling_guess(&start), opts))?;

    // Each step starts next to the solution; a short budget fails fast and
    // lets the step shrink instead.
    let step_opts = SolverOptions {
        max_newton_steps: opts.max_newton_steps.min(CONTINUATION_STEP_BUDGET),
        ..*opts
    };
    let mut factor = opts.continuation_factor;
    while c > target {
        let next = (c * factor).max(target);
        match newton(&system.with_coupling(next), x.clone(), &step_opts) {
            Ok((x1, s, r)) => {
                x = x1;
                steps = s;
                res = r;
                c = next;
                factor = (factor * factor.sqrt()).max(opts.continuation_factor);
            }
            Err(fail) => {
                factor = factor.sqrt();
                if factor > 0.999 {
                    return Err(fail);
                }
            }
        }
    }
    Ok((x, steps, res))
}
