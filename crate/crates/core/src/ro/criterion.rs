//! Integral criteria `∫₁^∞ t^{2p+n-1} φ^{-2}(t) dt < ∞` for embeddings into
//! `C^p` and for classical solutions.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::indices::{analytic_indices, best_indices, IndexPair};
use super::weight::RoWeight;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converges,
    Diverges,
    Inconclusive,
}

impl fmt::Display for ConvergenceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvergenceStatus::Converges => "converges",
            ConvergenceStatus::Diverges => "diverges",
            ConvergenceStatus::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub status: ConvergenceStatus,
    /// `∫₁^{t_cut} t^{2p+n-1} φ^{-2}(t) dt`.
    pub partial_integral: f64,
    /// Which bound settled the tail.
    pub tail_bound_used: String,
}

/// Options shared by the integral criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralOptions {
    pub t_cut: f64,
    pub quadrature_points: usize,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        IntegralOptions {
            t_cut: 1e4,
            quadrature_points: 10,
        }
    }
}

/// Decide convergence of `∫₁^∞ t^{2p+n-1} φ^{-2}(t) dt`.
///
/// The tail is settled by index bounds first (`2σ0 > 2p+n` converges,
/// `2σ1 < 2p+n` diverges), then by the closed form of power-log tails, and
/// is otherwise reported inconclusive. The truncated integral is never used
/// to guess the answer.
pub fn embed_criterion(phi: &RoWeight, p: u32, n: u32, opts: &IntegralOptions) -> Result<ConvergenceVerdict> {
    if !(opts.t_cut >= 10.0) {
        return Err(Error::Precondition(format!("t_cut must be >= 10, got {}", opts.t_cut)));
    }
    if n == 0 || opts.quadrature_points == 0 {
        return Err(Error::Precondition("n and quadrature_points must be positive".into()));
    }
    let order = (2 * p + n) as f64;
    let partial = partial_integral(phi, order, opts)?;

    let verdict = |status, note: String| ConvergenceVerdict {
        status,
        partial_integral: partial,
        tail_bound_used: note,
    };

    if let Ok(idx) = analytic_indices(phi) {
        if 2.0 * idx.sigma0 > order {
            return Ok(verdict(
                ConvergenceStatus::Converges,
                format!("lower index: 2*sigma0 - (2p+n) = {} > 0", 2.0 * idx.sigma0 - order),
            ));
        }
        if 2.0 * idx.sigma1 < order {
            return Ok(verdict(
                ConvergenceStatus::Diverges,
                format!("upper index: 2*sigma1 - (2p+n) = {} < 0", 2.0 * idx.sigma1 - order),
            ));
        }
    }

    if let Some((s, r)) = phi.power_log_signature() {
        let (status, note) = power_log_tail(s, &r, order);
        return Ok(verdict(status, note));
    }
    Ok(verdict(
        ConvergenceStatus::Inconclusive,
        "no index bound or closed form settles the tail".into(),
    ))
}

/// Integrate in `u = ln t`: `∫₀^{ln t_cut} exp((2p+n) u - 2 ln φ(e^u)) du`,
/// split at the breakpoints of `φ`.
fn partial_integral(phi: &RoWeight, order: f64, opts: &IntegralOptions) -> Result<f64> {
    let u_cut = opts.t_cut.ln();
    let mut cuts = vec![0.0];
    cuts.extend(
        phi.breakpoints()
            .into_iter()
            .map(f64::ln)
            .filter(|&u| u > 0.0 && u < u_cut),
    );
    cuts.push(u_cut);
    cuts.sort_by(f64::total_cmp);
    let integrand = |u: f64| (order * u - 2.0 * phi.ln_eval(u)).exp();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total += adaptive_integrate(integrand, w[0], w[1], opts.quadrature_points, 1e-12)
                .ok_or_else(|| Error::Numeric("integrand is not finite".into()))?;
        }
    }
    Ok(total)
}

/// Tail of `∫ t^{order-1-2s} Π (ln^{(i)} t)^{-2 r_i} dt`.
fn power_log_tail(s: f64, r: &[f64], order: f64) -> (ConvergenceStatus, String) {
    let excess = 2.0 * s - order;
    if excess > 0.0 {
        return (
            ConvergenceStatus::Converges,
            format!("power tail: exponent {} < -1", -1.0 - excess),
        );
    }
    if excess < 0.0 {
        return (
            ConvergenceStatus::Diverges,
            format!("power tail: exponent {} > -1", -1.0 - excess),
        );
    }
    // ∫ dt / (t L₁^{a₁} L₂^{a₂} ⋯): the first a_i different from 1 decides
    for (i, &ri) in r.iter().enumerate() {
        let a = 2.0 * ri;
        if a > 1.0 {
            return (
                ConvergenceStatus::Converges,
                format!("log tail: level {} exponent {a} > 1", i + 1),
            );
        }
        if a < 1.0 {
            return (
                ConvergenceStatus::Diverges,
                format!("log tail: level {} exponent {a} < 1", i + 1),
            );
        }
    }
    (
        ConvergenceStatus::Diverges,
        "log tail: all log exponents equal 1 (or none), antiderivative grows".into(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalVerdict {
    /// Interior criterion `∫ t^{2q+n-1} φ₁^{-2} dt < ∞`.
    pub interior_ok: ConvergenceVerdict,
    /// Boundary criterion `∫ t^{2m+n-1} φ₂^{-2} dt < ∞`.
    pub boundary_ok: ConvergenceVerdict,
    /// Whether `σ0(φ₁) > m + 1/2` and `σ0(φ₂) > m + 1/2` hold.
    pub precondition_ok: bool,
    pub indices: (IndexPair, IndexPair),
}

/// Sufficient conditions for a generalized solution to be classical.
///
/// Violated index preconditions are reported, not raised.
pub fn classical_solution_criterion(
    phi1: &RoWeight,
    phi2: &RoWeight,
    n: u32,
    q: u32,
    m: u32,
    opts: &IntegralOptions,
) -> Result<ClassicalVerdict> {
    if q == 0 || m < 2 * q {
        return Err(Error::Precondition(format!("need q >= 1 and m >= 2q, got q = {q}, m = {m}")));
    }
    let (i1, i2) = (best_indices(phi1)?, best_indices(phi2)?);
    let threshold = m as f64 + 0.5;
    Ok(ClassicalVerdict {
        interior_ok: embed_criterion(phi1, q, n, opts)?,
        boundary_ok: embed_criterion(phi2, m, n, opts)?,
        precondition_ok: i1.sigma0 > threshold && i2.sigma0 > threshold,
        indices: (i1, i2),
    })
}
