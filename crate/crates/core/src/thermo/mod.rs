//! Thermodynamic limit of the bosonic ground state.
//!
//! The root density solves
//! `ρ0(k) = 1/2π + ∫_{−k_F}^{k_F} K₂(k − k′) ρ0(k′) dk′` with
//! `K_n(x) = (1/π)(nc/2)/((nc/2)² + x²)`, the Fermi point being fixed by
//! `∫ρ0 = N/L`. Excitations are described by the backflow densities
//!
//! * hole at `k̄`: `ρ₁ʰ(k) = ∫K₂(k − k′)ρ₁ʰ(k′)dk′ − K₂(k − k̄)`, energy
//!   `ξ_h(k̄) = −k̄² + ∫k²ρ₁ʰ`;
//! * boson replaced by a fermion with rapidity λ:
//!   `ρ₁ᶜ(k) = ∫K₂(k − k′)ρ₁ᶜ(k′)dk′ − K₁(k − λ)`, energy `ξ_c(λ) = ∫k²ρ₁ᶜ`.
//!
//! All Fredholm equations are discretised by Gauss–Legendre Nyström.

pub mod quadrature;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quadrature::gauss_legendre_on;

/// Lorentzian kernel `K_n`, `n ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub n: u8,
    pub c: f64,
}

impl Kernel {
    pub fn new(n: u8, c: f64) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidParameter(format!("kernel index must be 1 or 2, got {n}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling must be positive, got {c}")));
        }
        Ok(Kernel { n, c })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = 0.5 * self.n as f64 * self.c;
        a / (PI * (a * a + x * x))
    }
}

/// `K_n(x)`.
pub fn kernel_eval(n: u8, c: f64, x: f64) -> Result<f64> {
    Ok(Kernel::new(n, c)?.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoOptions {
    /// Nodes of the first Nyström grid.
    pub nodes: usize,
    /// Relative change of E/L under node doubling accepted as converged.
    pub refine_tolerance: f64,
    pub max_nodes: usize,
    /// Absolute tolerance on `∫ρ0 − N/L` for the Fermi-point bisection.
    pub density_tolerance: f64,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        ThermoOptions {
            nodes: 200,
            refine_tolerance: 1e-8,
            max_nodes: 3200,
            density_tolerance: 1e-12,
        }
    }
}

/// Ground-state root density on a Gauss–Legendre grid over `[−k_F, k_F]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub c: f64,
    pub k_f: f64,
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    /// `∫ρ0 = N/L`.
    pub density: f64,
    /// `E/L = ∫k²ρ0`.
    pub energy_per_length: f64,
}

impl DensityProfile {
    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    /// Nyström interpolation of ρ0 at any `k`.
    pub fn value_at(&self, k: f64) -> f64 {
        let kern = Kernel { n: 2, c: self.c };
        1.0 / (2.0 * PI)
            + self
                .grid
                .iter()
                .zip(&self.weights)
                .zip(&self.values)
                .map(|((x, w), r)| kern.eval(k - x) * w * r)
                .sum::<f64>()
    }

    /// Max-norm residual of the discretised integral equation at the nodes.
    pub fn residual(&self) -> f64 {
        let kern = Kernel { n: 2, c: self.c };
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&k, &r)| {
                let s: f64 = self
                    .grid
                    .iter()
                    .zip(&self.weights)
                    .zip(&self.values)
                    .map(|((x, w), v)| kern.eval(k - x) * w * v)
                    .sum();
                (r - 1.0 / (2.0 * PI) - s).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Nyström grid on `[−k_F, k_F]` with the LU factors of `I − K₂W`.
struct Grid {
    c: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl Grid {
    fn new(c: f64, k_f: f64, n: usize) -> Self {
        let (nodes, weights) = gauss_legendre_on(n, -k_f, k_f);
        let kern = Kernel { n: 2, c };
        let a = DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            d - kern.eval(nodes[i] - nodes[j]) * weights[j]
        });
        Grid {
            c,
            nodes,
            weights,
            lu: a.lu(),
        }
    }

    fn solve(&self, rhs: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let b = DVector::from_iterator(self.nodes.len(), self.nodes.iter().map(|&k| rhs(k)));
        let x = self
            .lu
            .solve(&b)
            .ok_or_else(|| Error::InvalidParameter("singular Nyström matrix".into()))?;
        Ok(x.iter().copied().collect())
    }

    fn integrate(&self, values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(values)
            .map(|((&k, w), v)| w * v * f(k))
            .sum()
    }
}

fn density_on(c: f64, k_f: f64, n: usize) -> Result<(Grid, Vec<f64>, f64)> {
    let grid = Grid::new(c, k_f, n);
    let rho = grid.solve(|_| 1.0 / (2.0 * PI))?;
    let total = grid.integrate(&rho, |_| 1.0);
    Ok((grid, rho, total))
}

/// Fermi point for `n_density` on an `n`-node grid, by bisection on
/// `[lo, hi]`.
fn fermi_point(c: f64, n_density: f64, nodes: usize, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let f = |k_f: f64| density_on(c, k_f, nodes).map(|r| r.2 - n_density);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::NonConvergence {
            iterations: 0,
            best_residual: flo.abs().min(fhi.abs()),
        });
    }
    let mut best = f64::INFINITY;
    for it in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        best = best.min(v.abs());
        if v.abs() <= tol || hi - lo <= f64::EPSILON * mid {
            return if v.abs() <= tol.max(64.0 * f64::EPSILON * n_density) {
                Ok(mid)
            } else {
                Err(Error::NonConvergence {
                    iterations: it + 1,
                    best_residual: best,
                })
            };
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        iterations: 200,
        best_residual: best,
    })
}

fn profile_at(c: f64, k_f: f64, nodes: usize) -> Result<DensityProfile> {
    let (grid, rho, total) = density_on(c, k_f, nodes)?;
    let energy = grid.integrate(&rho, |k| k * k);
    Ok(DensityProfile {
        c,
        k_f,
        grid: grid.nodes,
        weights: grid.weights,
        values: rho,
        density: total,
        energy_per_length: energy,
    })
}

/// Ground-state density for coupling `c` and linear density `n_density`;
/// see [`solve_ground_density_with`].
pub fn solve_ground_density(c: f64, n_density: f64) -> Result<DensityProfile> {
    solve_ground_density_with(c, n_density, &ThermoOptions::default())
}

/// Bisects the Fermi point over `[1e−6, min(πn, 1e3·n)]` on the initial grid, then
/// doubles the grid (re-bisecting in a narrow bracket) until E/L changes by
/// less than `refine_tolerance` relative.
pub fn solve_ground_density_with(c: f64, n_density: f64, opts: &ThermoOptions) -> Result<DensityProfile> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("coupling must be positive, got {c}")));
    }
    if !(n_density > 0.0 && n_density.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "density must be positive, got {n_density}"
        )));
    }
    if opts.nodes < 2 {
        return Err(Error::InvalidParameter(
            "at least two quadrature nodes are needed".into(),
        ));
    }
    let mut nodes = opts.nodes;
    // ρ0 ≥ 1/2π gives N/L ≥ k_F/π, so k_F never exceeds πN/L.
    let upper = (PI * n_density * (1.0 + 1e-9)).min(1e3 * n_density);
    let mut k_f = fermi_point(c, n_density, nodes, 1e-6, upper, opts.density_tolerance)?;
    let mut profile = profile_at(c, k_f, nodes)?;
    while nodes * 2 <= opts.max_nodes {
        nodes *= 2;
        let (lo, hi) = bracket(c, n_density, nodes, k_f)?;
        k_f = fermi_point(c, n_density, nodes, lo, hi, opts.density_tolerance)?;
        let finer = profile_at(c, k_f, nodes)?;
        let change = (finer.energy_per_length - profile.energy_per_length).abs() / finer.energy_per_length.abs();
        profile = finer;
        if change < opts.refine_tolerance {
            return Ok(profile);
        }
    }
    Ok(profile)
}

/// Bracket around a previous Fermi point, widened until it straddles the
/// target density.
fn bracket(c: f64, n_density: f64, nodes: usize, k_f: f64) -> Result<(f64, f64)> {
    let f = |k: f64| density_on(c, k, nodes).map(|r| r.2 - n_density);
    let mut width = 1e-6 * k_f;
    loop {
        let (lo, hi) = (
            (k_f - width).max(1e-6),
            (k_f + width).min(PI * n_density * (1.0 + 1e-9)),
        );
        if f(lo)? <= 0.0 && f(hi)? >= 0.0 {
            return Ok((lo, hi));
        }
        if lo <= 1e-6 && hi >= PI * n_density {
            return Ok((lo, hi));
        }
        width *= 16.0;
    }
}

fn check_profile(profile: &DensityProfile) -> Result<Grid> {
    if profile.grid.len() < 2 {
        return Err(Error::InvalidParameter("profile has no grid".into()));
    }
    Ok(Grid::new(profile.c, profile.k_f, profile.grid.len()))
}

/// Backflow density `ρ₁ʰ(·, k̄)` at the profile nodes.
pub fn hole_backflow(profile: &DensityProfile, kbar: f64) -> Result<Vec<f64>> {
    if kbar.is_nan() || kbar.abs() > profile.k_f {
        return Err(Error::InvalidParameter(format!(
            "hole momentum {kbar} outside the Fermi sea [-{k}, {k}]",
            k = profile.k_f
        )));
    }
    let grid = check_profile(profile)?;
    let kern = Kernel { n: 2, c: grid.c };
    grid.solve(|k| -kern.eval(k - kbar))
}

/// `ξ_h(k̄) = −k̄² + ∫k² ρ₁ʰ(k, k̄) dk`.
pub fn hole_energy(profile: &DensityProfile, kbar: f64) -> Result<f64> {
    let rho = hole_backflow(profile, kbar)?;
    let grid = check_profile(profile)?;
    Ok(-kbar * kbar + grid.integrate(&rho, |k| k * k))
}

/// Backflow density `ρ₁ᶜ(·, λ)` at the profile nodes.
pub fn fermion_backflow(profile: &DensityProfile, lambda: f64) -> Result<Vec<f64>> {
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter("rapidity must be finite".into()));
    }
    let grid = check_profile(profile)?;
    let kern = Kernel { n: 1, c: grid.c };
    grid.solve(|k| -kern.eval(k - lambda))
}

/// `ξ_c(λ) = ∫k² ρ₁ᶜ(k, λ) dk`.
pub fn fermion_dressed_energy(profile: &DensityProfile, lambda: f64) -> Result<f64> {
    let rho = fermion_backflow(profile, lambda)?;
    let grid = check_profile(profile)?;
    Ok(grid.integrate(&rho, |k| k * k))
}

/// Particle-hole excitation energy `ξ_h(k̄) + k_p²`.
pub fn particle_hole_energy(profile: &DensityProfile, kbar: f64, kp: f64) -> Result<f64> {
    Ok(hole_energy(profile, kbar)? + kp * kp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert!((kernel_eval(2, 1.0, 0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((kernel_eval(1, 2.0, 0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((kernel_eval(2, 3.0, 0.0).unwrap() - 1.0 / (3.0 * PI)).abs() < 1e-15);
        assert_eq!(kernel_eval(1, 1.0, 0.7).unwrap(), kernel_eval(1, 1.0, -0.7).unwrap());
        assert!(kernel_eval(3, 1.0, 0.0).is_err());
        assert!(kernel_eval(1, 0.0, 0.0).is_err());
    }

    #[test]
    fn kernel_normalisation() {
        // ∫_{−R}^{R} K_n = (2/π) arctan(2R/(nc))
        for (n, c, r) in [(1u8, 1.3, 2.0), (2, 0.7, 5.0), (2, 4.0, 1.0)] {
            let k = Kernel::new(n, c).unwrap();
            let (x, w) = gauss_legendre_on(400, -r, r);
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * k.eval(*x)).sum();
            let exact = 2.0 / PI * (2.0 * r / (n as f64 * c)).atan();
            assert!((q - exact).abs() < 1e-13, "n={n} c={c}");
        }
    }

    #[test]
    fn density_is_even_and_above_free_value() {
        let p = solve_ground_density(2.0, 1.0).unwrap();
        let n = p.nodes();
        for i in 0..n {
            assert!((p.values[i] - p.values[n - 1 - i]).abs() < 1e-12);
            assert!(p.values[i] >= 1.0 / (2.0 * PI));
        }
        assert!((p.density - 1.0).abs() < 1e-11);
        assert!(p.residual() < 1e-10);
    }

    #[test]
    fn strong_coupling_limit() {
        let p = solve_ground_density(1e8, 0.5).unwrap();
        assert!((p.k_f - PI * 0.5).abs() < 1e-6);
        assert!((p.energy_per_length - 0.125 * PI * PI / 3.0).abs() < 1e-6);
    }

    #[test]
    fn hole_energy_is_even_and_free_at_large_c() {
        let p = solve_ground_density(1.0, 1.0).unwrap();
        let a = hole_energy(&p, 0.4).unwrap();
        let b = hole_energy(&p, -0.4).unwrap();
        assert!((a - b).abs() < 1e-12);
        let p = solve_ground_density(1e7, 1.0).unwrap();
        assert!((hole_energy(&p, 1.0).unwrap() + 1.0).abs() < 1e-5);
        assert!(hole_energy(&p, 1.1 * p.k_f).is_err());
    }

    #[test]
    fn fermion_energy_is_even() {
        let p = solve_ground_density(1.0, 1.0).unwrap();
        let a = fermion_dressed_energy(&p, 0.9).unwrap();
        let b = fermion_dressed_energy(&p, -0.9).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_ground_density(-1.0, 1.0).is_err());
        assert!(solve_ground_density(1.0, 0.0).is_err());
    }
}
