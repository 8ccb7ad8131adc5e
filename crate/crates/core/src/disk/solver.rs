//! The model problem `Δu = f` in the unit disk, `∂_ν^m u = g` on its
//! boundary, with `∂_ν = -∂_ρ` the inner normal derivative.
//!
//! Modes decouple. On mode `k` every regular solution is a particular one
//! plus `c ρ^{|k|}`, and the boundary operator sends `ρ^{|k|}` to the
//! falling factorial `d(|k|, m)` (up to sign). Modes with `|k| < m` carry
//! the kernel and the cokernel.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cheb::{self, Series};
use super::field::{boundary_derivative, mode_inner, DiskField};
use crate::error::{Error, Result};
use crate::quadrature::unit_rule;
use crate::ro::RoWeight;
use crate::spectra::{hnorm, CircleSpectrum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `d(n, m) = n (n-1) ⋯ (n-m+1)`.
pub fn falling_factorial(n: u64, m: u32) -> f64 {
    (0..m as u64).map(|i| n as f64 - i as f64).product()
}

fn check_order(m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::Precondition(format!("boundary order m must be at least 2, got {m}")));
    }
    Ok(())
}

fn sign(m: u32) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Regular solution of `Δ(ρ^n G(ρ²) e^{ikφ}) = ρ^n F(ρ²) e^{ikφ}` with
/// `G(0) = 0`.
///
/// Writing `H = G'` the equation reads `(x^{n+1} H)' = x^n F / 4`, hence
/// `H(x) = ¼ ∫₀¹ s^n F(xs) ds`, evaluated by Gauss–Legendre (exact for
/// polynomial `F`) at Radau points and interpolated.
pub fn particular_solution(k: i64, f: &[Complex64]) -> Result<Series> {
    if f.is_empty() {
        return Ok(Vec::new());
    }
    let n = k.unsigned_abs() as usize;
    let r = f.len();
    let rule = unit_rule((n + r) / 2 + 2);
    let values: Vec<Complex64> = cheb::radau_nodes(r)
        .iter()
        .map(|&y| {
            let x = (1.0 + y) / 2.0;
            let acc: Complex64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&s, &w)| w * s.powi(n as i32) * cheb::eval(f, 2.0 * x * s - 1.0))
                .sum();
            0.25 * acc
        })
        .collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numeric(format!("radial quadrature failed on mode {k}")));
    }
    let h = cheb::fit_radau(&values);
    // ∫₀^x H dx' = ½ ∫_{-1}^{y} H dy'
    Ok(cheb::scale(&cheb::integral(&h), Complex64::new(0.5, 0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    /// Chebyshev coefficients of `G` in `u_k = ρ^{|k|} G(ρ²)`.
    pub u_k: Series,
    pub solvable: bool,
    /// `g_k - (-1)^m ∂_ρ^m u_particular(1)`; meaningful when `d(|k|, m) = 0`.
    pub constraint_value: Complex64,
}

/// Relative size below which a constraint value counts as zero.
pub const SOLVABILITY_TOL: f64 = 1e-10;

/// Solve one angular mode. On degenerate modes the free constant is 0.
pub fn solve_mode(k: i64, f_k: &[Complex64], g_k: Complex64, m: u32) -> Result<ModeSolution> {
    check_order(m)?;
    let gp = particular_solution(k, f_k)?;
    let bval = sign(m) * boundary_derivative(k, &gp, m);
    let d = falling_factorial(k.unsigned_abs(), m);
    if d == 0.0 {
        let cv = g_k - bval;
        let scale = 1.0 + g_k.norm() + bval.norm();
        return Ok(ModeSolution {
            u_k: gp,
            solvable: cv.norm() <= SOLVABILITY_TOL * scale,
            constraint_value: cv,
        });
    }
    let c = (g_k - bval) / (sign(m) * d);
    let mut u = gp;
    if u.is_empty() {
        u.push(ZERO);
    }
    u[0] += c;
    Ok(ModeSolution {
        u_k: cheb::trim(u),
        solvable: true,
        constraint_value: ZERO,
    })
}

/// `u ↦ (Δu, ∂_ν^m u|_Γ)` with `∂_ν^m = (-1)^m ∂_ρ^m`.
pub fn apply_operator(u: &DiskField, m: u32) -> (DiskField, CircleSpectrum) {
    (u.laplacian(), u.normal_derivative_trace(m))
}

/// `{ρ^{|k|} e^{ikφ} : |k| ≤ m-1}`, ordered by `k`.
pub fn kernel_basis(m: u32, k_max: usize) -> Result<Vec<DiskField>> {
    check_order(m)?;
    let top = (m - 1) as usize;
    if k_max < top {
        return Err(Error::Truncation {
            needed: top,
            got: k_max,
        });
    }
    Ok((-(top as i64)..=top as i64)
        .map(|k| DiskField::harmonic(k_max, 1, k))
        .collect())
}

/// Solution `(v, w, h)` of the homogeneous adjoint system for `m = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointTriple {
    pub v: DiskField,
    pub w: CircleSpectrum,
    pub h: CircleSpectrum,
}

/// `(ρ^{|k|} e^{ikφ}, -e^{ikφ}, e^{ikφ})` for `k = -1, 0, 1`.
pub fn adjoint_kernel_basis(k_max: usize) -> Result<Vec<AdjointTriple>> {
    if k_max < 1 {
        return Err(Error::Truncation { needed: 1, got: k_max });
    }
    Ok((-1..=1)
        .map(|k| AdjointTriple {
            v: DiskField::harmonic(k_max, 1, k),
            w: CircleSpectrum::single_mode(k_max, k, Complex64::new(-1.0, 0.0)),
            h: CircleSpectrum::single_mode(k_max, k, Complex64::new(1.0, 0.0)),
        })
        .collect())
}

/// `(f, v)_Ω + (f|_Γ, w)_Γ + (g, h)_Γ`.
pub fn adjoint_pairing(f: &DiskField, g: &CircleSpectrum, t: &AdjointTriple) -> Complex64 {
    f.inner(&t.v) + f.trace().inner(&t.w) + g.inner(&t.h)
}

/// Values of the cokernel functionals on the data `(f, g)`.
///
/// For `m = 2` these are the pairings with [`adjoint_kernel_basis`]
/// (`k = -1, 0, 1`); for larger `m` the mode constraint values for
/// `|k| ≤ m-1`, in increasing `k`.
pub fn solvability_residuals(f: &DiskField, g: &CircleSpectrum, m: u32) -> Result<Vec<Complex64>> {
    check_order(m)?;
    let k_max = f.k_max().max(g.k_max()).max((m - 1) as usize);
    if m == 2 {
        return Ok(adjoint_kernel_basis(k_max)?
            .iter()
            .map(|t| adjoint_pairing(f, g, t))
            .collect());
    }
    let top = (m - 1) as i64;
    (-top..=top)
        .map(|k| Ok(solve_mode(k, f.mode(k), g.get(k), m)?.constraint_value))
        .collect()
}

/// Remove the `L²(Ω)` projection onto the kernel: the projector `P`.
pub fn project_out_kernel(u: &DiskField, m: u32) -> DiskField {
    let top = m.saturating_sub(1) as i64;
    u.map_modes(|k, g| {
        if k.abs() > top || g.is_empty() {
            return g.to_vec();
        }
        let n = k.unsigned_abs() as usize;
        let one = [Complex64::new(1.0, 0.0)];
        // ⟨ρ^n, ρ^n⟩ = π/(n+1)
        let c = mode_inner(n, g, &one) * ((n + 1) as f64 / std::f64::consts::PI);
        let mut out = g.to_vec();
        out[0] -= c;
        out
    })
}

/// A norm to evaluate on the solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormRequest {
    /// `‖u‖_{H^s(Ω)}`, integer `s` only.
    Interior { s: f64 },
    /// `‖∂_ν^j u|_Γ‖_{H^α(Γ)}`.
    Trace {
        alpha: RoWeight,
        #[serde(default)]
        normal_order: u32,
    },
}

impl NormRequest {
    pub fn label(&self) -> String {
        match self {
            NormRequest::Interior { s } => format!("interior:H^{s}"),
            NormRequest::Trace { alpha, normal_order } => format!("trace:d{normal_order}:{}", alpha.label()),
        }
    }

    pub fn evaluate(&self, u: &DiskField) -> Result<f64> {
        match self {
            NormRequest::Interior { s } => u.sobolev_norm_real(*s),
            NormRequest::Trace { alpha, normal_order } => {
                alpha.validate()?;
                Ok(hnorm(&u.normal_derivative_trace(*normal_order), alpha))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskBvpProblem {
    pub m: u32,
    pub f: DiskField,
    pub g: CircleSpectrum,
}

/// Raw problem input with top-level truncations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInput {
    pub m: u32,
    #[serde(default)]
    pub f: Option<super::field::DiskFieldRepr>,
    #[serde(default)]
    pub g: Option<crate::spectra::SpectrumRepr>,
    #[serde(rename = "K", default)]
    pub k_max: Option<usize>,
    #[serde(rename = "R", default)]
    pub radial_points: Option<usize>,
}

impl ProblemInput {
    pub fn into_problem(self) -> Result<DiskBvpProblem> {
        check_order(self.m)?;
        let g = match self.g {
            Some(mut r) => {
                r.k_max = r.k_max.or(self.k_max);
                CircleSpectrum::try_from(r)?
            }
            None => CircleSpectrum::zeros(self.k_max.unwrap_or(0)),
        };
        let f = match self.f {
            Some(r) => r.into_field(self.k_max, self.radial_points)?,
            None => DiskField::zeros(self.k_max.unwrap_or(g.k_max()), self.radial_points.unwrap_or(1)),
        };
        DiskBvpProblem::new(self.m, f, g)
    }
}

impl DiskBvpProblem {
    /// Truncations are aligned to the larger of the two.
    pub fn new(m: u32, f: DiskField, g: CircleSpectrum) -> Result<Self> {
        check_order(m)?;
        let k = f.k_max().max(g.k_max());
        Ok(DiskBvpProblem {
            m,
            f: f.resized(k),
            g: g.resized(k),
        })
    }

    pub fn k_max(&self) -> usize {
        self.f.k_max()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub m: u32,
    #[serde(rename = "K")]
    pub k_max: usize,
    #[serde(rename = "R")]
    pub radial_points: usize,
    pub solution: DiskField,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    pub index: i64,
    pub solvability_residuals: Vec<Complex64>,
    /// Boundary data actually solved after projecting onto the range.
    pub projected_g: CircleSpectrum,
    /// Component `Σ c_k e^{ikφ}` removed from `g`, listed by mode.
    pub removed_component: Vec<(i64, Complex64)>,
    /// `(‖Δu - f‖²_Ω + ‖∂_ν^m u - g‖²_Γ)^{1/2}` against the projected data.
    pub operator_residual: f64,
    pub norms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Worker threads for mode solves; results do not depend on it.
    pub threads: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { threads: 1 }
    }
}

fn solve_modes(problem: &DiskBvpProblem, threads: usize) -> Result<Vec<ModeSolution>> {
    let k = problem.k_max() as i64;
    let ks: Vec<i64> = (-k..=k).collect();
    let run = |k: i64| solve_mode(k, problem.f.mode(k), problem.g.get(k), problem.m);
    let threads = threads.clamp(1, ks.len());
    if threads == 1 {
        return ks.into_iter().map(run).collect();
    }
    let chunk = ks.len().div_ceil(threads);
    let parts: Vec<Result<Vec<ModeSolution>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ks
            .chunks(chunk)
            .map(|c| scope.spawn(move || c.iter().map(|&k| run(k)).collect::<Result<Vec<_>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("mode solver thread panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(ks.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Solve after projecting the data onto the range, returning the solution
/// orthogonal to the kernel together with the Fredholm diagnostics.
///
/// The range has the complement spanned by `(0, e^{ikφ})`, `|k| ≤ m-1`:
/// unsolvable data lose exactly their mode constraint values there.
pub fn solve(problem: &DiskBvpProblem, requested: &[NormRequest], opts: SolveOptions) -> Result<SolveReport> {
    let m = problem.m;
    let k_max = problem.k_max();
    let residuals = solvability_residuals(&problem.f, &problem.g, m)?;
    let sols = solve_modes(problem, opts.threads)?;
    let mut solution = DiskField::zeros(k_max, problem.f.radial_points());
    let mut projected_g = problem.g.clone();
    let mut removed = Vec::new();
    for (k, s) in (-(k_max as i64)..=k_max as i64).zip(sols) {
        if falling_factorial(k.unsigned_abs(), m) == 0.0 {
            projected_g.set(k, problem.g.get(k) - s.constraint_value);
            removed.push((k, s.constraint_value));
        }
        solution.set_mode(k, s.u_k);
    }
    let solution = project_out_kernel(&solution, m);
    let (af, ag) = apply_operator(&solution, m);
    let operator_residual =
        (af.sub(&problem.f).l2_norm().powi(2) + ag.sub(&projected_g).l2_norm().powi(2)).sqrt();
    let mut norms = BTreeMap::new();
    for r in requested {
        norms.insert(r.label(), r.evaluate(&solution)?);
    }
    let fr = fredholm_report(m, k_max.max((m - 1) as usize))?;
    Ok(SolveReport {
        m,
        k_max,
        radial_points: solution.radial_points().max(solution.radial_degree_bound()),
        solution,
        kernel_dim: fr.kernel_dim,
        cokernel_dim: fr.cokernel_dim,
        index: fr.index,
        solvability_residuals: residuals,
        projected_g,
        removed_component: removed,
        operator_residual,
        norms,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FredholmReport {
    pub m: u32,
    #[serde(rename = "K")]
    pub k_max: usize,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    pub index: i64,
}

/// Kernel from [`kernel_basis`]; cokernel as the number of modes on which
/// the boundary operator annihilates `ρ^{|k|}`.
pub fn fredholm_report(m: u32, k_max: usize) -> Result<FredholmReport> {
    let kernel_dim = kernel_basis(m, k_max)?.len();
    let k = k_max as i64;
    let cokernel_dim = (-k..=k)
        .filter(|&k| falling_factorial(k.unsigned_abs(), m) == 0.0)
        .count();
    if m == 2 {
        let adjoint = adjoint_kernel_basis(k_max)?.len();
        if adjoint != cokernel_dim {
            return Err(Error::Numeric(format!(
                "adjoint kernel has {adjoint} elements but {cokernel_dim} modes are degenerate"
            )));
        }
    }
    Ok(FredholmReport {
        m,
        k_max,
        kernel_dim,
        cokernel_dim,
        index: kernel_dim as i64 - cokernel_dim as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    /// Second-order finite-difference solve of
    /// `u'' + u'/ρ - k²u/ρ² = 0` on `[0, 1]` with `u(0) = 0` (k ≠ 0) and
    /// `u''(1) = g`, as an independent oracle for the harmonic modes.
    fn fd_harmonic_mode(k: f64, g: f64, n: usize) -> Vec<f64> {
        use nalgebra::{DMatrix, DVector};
        let h = 1.0 / n as f64;
        let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
        let mut b = DVector::<f64>::zeros(n + 1);
        a[(0, 0)] = 1.0;
        for i in 1..n {
            let r = i as f64 * h;
            a[(i, i - 1)] = 1.0 / (h * h) - 1.0 / (2.0 * h * r);
            a[(i, i)] = -2.0 / (h * h) - k * k / (r * r);
            a[(i, i + 1)] = 1.0 / (h * h) + 1.0 / (2.0 * h * r);
        }
        // one-sided second derivative at ρ = 1
        a[(n, n)] = 2.0 / (h * h);
        a[(n, n - 1)] = -5.0 / (h * h);
        a[(n, n - 2)] = 4.0 / (h * h);
        a[(n, n - 3)] = -1.0 / (h * h);
        b[n] = g;
        a.lu().solve(&b).expect("nonsingular").iter().copied().collect()
    }

    #[test]
    fn mode_examples() {
        // k = 2, f = 0, g = 1: u = ρ²/2
        let s = solve_mode(2, &[], re(1.0), 2).unwrap();
        assert!(s.solvable);
        assert!((s.u_k[0] - re(0.5)).norm() < 1e-15 && s.u_k.len() == 1);
        let fd = fd_harmonic_mode(2.0, 1.0, 400);
        assert!((fd[200] - 0.5 * 0.25).abs() < 1e-4);
        // k = 0, f = 0, g = 1: not solvable
        let s = solve_mode(0, &[], re(1.0), 2).unwrap();
        assert!(!s.solvable);
        assert_eq!(s.constraint_value, re(1.0));
        // k = 0, f = 4, g = 2: u = ρ²
        let s = solve_mode(0, &[re(4.0)], re(2.0), 2).unwrap();
        assert!(s.solvable);
        assert!((cheb::eval(&s.u_k, 2.0 * 0.36 - 1.0) - re(0.36)).norm() < 1e-14);
    }

    #[test]
    fn operator_examples() {
        let u = DiskField::harmonic(2, 4, 2).scale(re(0.5));
        let (lap, bc) = apply_operator(&u, 2);
        assert_eq!(lap.l2_norm(), 0.0);
        assert!((bc.get(2) - re(1.0)).norm() < 1e-15);
        let (lap, bc) = apply_operator(&DiskField::harmonic(0, 1, 0), 2);
        assert_eq!((lap.l2_norm(), bc.l2_norm()), (0.0, 0.0));
        let rho2 = DiskField::single_mode(0, 2, 0, vec![re(0.5), re(0.5)]);
        let (lap, bc) = apply_operator(&rho2, 2);
        assert!((lap.eval(0.4, 0.0) - re(4.0)).norm() < 1e-14);
        assert!((bc.get(0) - re(2.0)).norm() < 1e-14);
    }

    #[test]
    fn kernel_elements_are_annihilated() {
        for m in 2..=6 {
            let basis = kernel_basis(m, 8).unwrap();
            assert_eq!(basis.len(), 2 * m as usize - 1);
            for u in &basis {
                let (lap, bc) = apply_operator(u, m);
                assert!(lap.l2_norm() + bc.l2_norm() <= 1e-10);
            }
        }
        assert!(matches!(kernel_basis(4, 2), Err(Error::Truncation { needed: 3, got: 2 })));
    }

    #[test]
    fn residual_examples() {
        let f = DiskField::zeros(6, 1);
        let g = CircleSpectrum::single_mode(6, 1, re(1.0));
        let r = solvability_residuals(&f, &g, 2).unwrap();
        assert!((r[2] - re(2.0 * PI)).norm() < 1e-13);
        assert!(r[0].norm() < 1e-15 && r[1].norm() < 1e-15);
        let g5 = CircleSpectrum::single_mode(6, 5, re(1.0));
        assert!(solvability_residuals(&f, &g5, 2).unwrap().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn residuals_are_scaled_constraint_values() {
        let f = DiskField::random(3, 5, 1.0, 4, 0);
        let g = CircleSpectrum::from_fn(3, |k| Complex64::new(k as f64, 1.0));
        let r = solvability_residuals(&f, &g, 2).unwrap();
        for (i, k) in (-1..=1).enumerate() {
            let cv = solve_mode(k, f.mode(k), g.get(k), 2).unwrap().constraint_value;
            assert!((r[i] - 2.0 * PI * cv).norm() < 1e-12 * (1.0 + r[i].norm()));
        }
    }

    #[test]
    fn solve_examples() {
        let p = DiskBvpProblem::new(2, DiskField::zeros(4, 4), CircleSpectrum::single_mode(4, 2, re(1.0))).unwrap();
        let rep = solve(&p, &[], SolveOptions::default()).unwrap();
        let want = DiskField::harmonic(4, 4, 2).scale(re(0.5));
        assert!(rep.solution.sub(&want).l2_norm() < 1e-15);
        assert!(rep.operator_residual <= 1e-10);
        assert_eq!((rep.kernel_dim, rep.cokernel_dim, rep.index), (3, 3, 0));
        let zero = DiskBvpProblem::new(2, DiskField::zeros(4, 4), CircleSpectrum::zeros(4)).unwrap();
        assert_eq!(solve(&zero, &[], SolveOptions::default()).unwrap().solution.l2_norm(), 0.0);
    }

    #[test]
    fn unsolvable_data_are_projected() {
        let g = CircleSpectrum::from_fn(3, |k| re(1.0 + k as f64));
        let p = DiskBvpProblem::new(2, DiskField::zeros(3, 2), g).unwrap();
        let rep = solve(&p, &[], SolveOptions::default()).unwrap();
        for k in -1..=1 {
            assert_eq!(rep.projected_g.get(k), re(0.0));
        }
        assert_eq!(rep.removed_component.len(), 3);
        assert!(rep.operator_residual < 1e-13);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let u = project_out_kernel(&DiskField::random(9, 5, 1.5, 2, 0), 3);
        let (f, g) = apply_operator(&u, 3);
        let p = DiskBvpProblem::new(3, f, g).unwrap();
        let a = solve(&p, &[], SolveOptions { threads: 1 }).unwrap();
        let b = solve(&p, &[], SolveOptions { threads: 4 }).unwrap();
        assert_eq!(a, b);
        assert!(a.solution.sub(&u).l2_norm() < 1e-10 * u.l2_norm());
    }

    #[test]
    fn fredholm_examples() {
        let r = fredholm_report(2, 5).unwrap();
        assert_eq!((r.kernel_dim, r.cokernel_dim, r.index), (3, 3, 0));
        let r = fredholm_report(3, 2).unwrap();
        assert_eq!((r.kernel_dim, r.cokernel_dim, r.index), (5, 5, 0));
        let r = fredholm_report(5, 10).unwrap();
        assert_eq!((r.kernel_dim, r.cokernel_dim, r.index), (9, 9, 0));
    }

    #[test]
    fn requested_norms() {
        let u = DiskField::harmonic(2, 2, 2).scale(re(0.5));
        let p = DiskBvpProblem::new(2, DiskField::zeros(2, 2), CircleSpectrum::single_mode(2, 2, re(1.0))).unwrap();
        let req = [
            NormRequest::Trace {
                alpha: RoWeight::power(0.0),
                normal_order: 0,
            },
            NormRequest::Interior { s: 0.0 },
        ];
        let rep = solve(&p, &req, SolveOptions::default()).unwrap();
        assert!((rep.norms["trace:d0:power(s=0)"] - (2.0 * PI).sqrt() * 0.5).abs() < 1e-14);
        assert!((rep.norms["interior:H^0"] - u.l2_norm()).abs() < 1e-14);
        assert!(solve(&p, &[NormRequest::Interior { s: 0.5 }], SolveOptions::default()).is_err());
    }
}
