//! The special Green formula for `Δu = f`, `∂_ν²u = g` on the unit disk and
//! its homogeneous adjoint system.
//!
//! With `D_ν = i∂_ν` and the inner normal `∂_ν = -∂_ρ`, for smooth `u, v`
//! on the disk and `w, h` on the circle
//!
//! ```text
//! (Δu,v)_Ω + (Δu,w)_Γ + (∂_ν²u,h)_Γ
//!   = (u,Δv)_Ω + (u, ∂_ν v + ∂_φ²w)_Γ + (D_ν u, -iv - iw)_Γ + (D_ν²u, -w - h)_Γ.
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::disk::{apply_operator, AdjointTriple, DiskField};
use crate::error::{Error, Result};
use crate::quadrature::unit_rule;
use crate::spectra::CircleSpectrum;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points in `ρ ∈ (0, 1)`.
    pub radial_points: usize,
    /// Trapezoid points in `φ`.
    pub angular_points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_points: 128,
            angular_points: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenCheckInput {
    pub u: DiskField,
    pub v: DiskField,
    pub w: CircleSpectrum,
    pub h: CircleSpectrum,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

impl GreenCheckInput {
    /// Common angular truncation of the four participants.
    pub fn k_max(&self) -> usize {
        self.u.k_max().max(self.v.k_max()).max(self.w.k_max()).max(self.h.k_max())
    }

    /// Seeded random band-limited quadruple with coefficients decaying like
    /// `⟨k⟩^{-decay}`.
    pub fn random(k_max: usize, radial_terms: usize, decay: f64, seed: u64, trial: u64) -> Self {
        let u = DiskField::random(k_max, radial_terms, decay, seed, 4 * trial);
        let v = DiskField::random(k_max, radial_terms, decay, seed, 4 * trial + 1);
        let mut rw = crate::disk::mode_rng(seed, 4 * trial + 2, 0);
        let mut rh = crate::disk::mode_rng(seed, 4 * trial + 3, 0);
        GreenCheckInput {
            u,
            v,
            w: CircleSpectrum::random(k_max, decay, &mut rw),
            h: CircleSpectrum::random(k_max, decay, &mut rh),
            quadrature: QuadratureSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenResidual {
    /// `|LHS − RHS| / (1 + |LHS|)`.
    pub residual: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub quadrature: QuadratureSpec,
    /// Set when the grid is coarser than twice the truncation.
    pub warning: Option<String>,
}

/// Values at `φ_j = 2πj/M`; modes above the Nyquist limit alias exactly as
/// direct evaluation on that grid would.
fn circle_values(coeffs: impl Iterator<Item = (i64, Complex64)>, m: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (k, c) in coeffs {
        buf[k.rem_euclid(m as i64) as usize] += c;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// Trapezoid rule for `(a, b)_Γ`.
fn boundary_inner(a: &CircleSpectrum, b: &CircleSpectrum, m: usize) -> Complex64 {
    let va = circle_values(a.iter(), m);
    let vb = circle_values(b.iter(), m);
    let s: Complex64 = va.iter().zip(&vb).map(|(x, y)| x * y.conj()).sum();
    s * (2.0 * PI / m as f64)
}

/// Tensor rule for `(a, b)_Ω = ∫∫ a conj(b) ρ dρ dφ`.
fn interior_inner(a: &DiskField, b: &DiskField, q: QuadratureSpec) -> Complex64 {
    let rule = unit_rule(q.radial_points);
    let m = q.angular_points;
    let mut total = Complex64::new(0.0, 0.0);
    for (&rho, &wr) in rule.nodes.iter().zip(&rule.weights) {
        let va = circle_values(a.modes().map(|(k, _)| (k, a.profile(k, rho))), m);
        let vb = circle_values(b.modes().map(|(k, _)| (k, b.profile(k, rho))), m);
        let ring: Complex64 = va.iter().zip(&vb).map(|(x, y)| x * y.conj()).sum();
        total += ring * (wr * rho);
    }
    total * (2.0 * PI / m as f64)
}

/// Both sides of the Green formula by quadrature.
pub fn green_residual(input: &GreenCheckInput) -> Result<GreenResidual> {
    let q = input.quadrature;
    if q.radial_points < 2 || q.angular_points < 1 {
        return Err(Error::Precondition(format!("quadrature {q:?} is too small")));
    }
    let k = input.k_max();
    let warning = (q.radial_points.min(q.angular_points) < 2 * k).then(|| {
        format!(
            "quadrature {}x{} is below twice the truncation K = {k}; expect aliasing",
            q.radial_points, q.angular_points
        )
    });
    let (u, v, w, h) = (&input.u, &input.v, &input.w, &input.h);
    let m = q.angular_points;
    let lap_u = u.laplacian();
    let lap_v = v.laplacian();
    let dnu = u.normal_derivative_trace(1);
    let dnu2 = u.normal_derivative_trace(2);
    let v_t = v.trace();
    let lhs = interior_inner(&lap_u, v, q) + boundary_inner(&lap_u.trace(), w, m) + boundary_inner(&dnu2, h, m);
    let rhs = interior_inner(u, &lap_v, q)
        + boundary_inner(&u.trace(), &v.normal_derivative_trace(1).add(&w.derivative(2)), m)
        + boundary_inner(&dnu.scale(I), &v_t.add(w).scale(-I), m)
        + boundary_inner(&dnu2.scale(Complex64::new(-1.0, 0.0)), &w.add(h).scale(Complex64::new(-1.0, 0.0)), m);
    Ok(GreenResidual {
        residual: (lhs - rhs).norm() / (1.0 + lhs.norm()),
        lhs,
        rhs,
        quadrature: q,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointResidual {
    /// `‖Δv‖_{L²(Ω)}`.
    pub interior: f64,
    /// `‖∂_ν v + ∂_φ²w‖_Γ`, `‖-iv - iw‖_Γ`, `‖-w - h‖_Γ`.
    pub boundary: [f64; 3],
}

/// Residual norms of the homogeneous adjoint system, computed spectrally.
pub fn adjoint_system_residual(t: &AdjointTriple) -> AdjointResidual {
    let v_t = t.v.trace();
    AdjointResidual {
        interior: t.v.laplacian().l2_norm(),
        boundary: [
            t.v.normal_derivative_trace(1).add(&t.w.derivative(2)).l2_norm(),
            v_t.add(&t.w).scale(-I).l2_norm(),
            t.w.add(&t.h).l2_norm(),
        ],
    }
}

/// `|(Δu, v)_Ω + (Δu|_Γ, w)_Γ + (∂_ν²u, h)_Γ|`, computed spectrally.
pub fn green_pairing_check(u: &DiskField, t: &AdjointTriple) -> f64 {
    let (f, g) = apply_operator(u, 2);
    crate::disk::adjoint_pairing(&f, &g, t).norm()
}
