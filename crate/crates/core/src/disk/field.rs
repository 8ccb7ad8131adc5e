//! Functions on the closed unit disk as sums of angular modes.
//!
//! Mode `k` is stored as `ρ^{|k|} G_k(ρ²)` with `G_k` a Chebyshev series in
//! `y = 2ρ² - 1`. This is the form every smooth function takes, so profiles
//! are automatically regular at the origin, and the operators below act on
//! `G_k` exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::cheb::{self, Series};
use crate::error::{Error, Result};
use crate::quadrature::unit_rule;
use crate::spectra::{smoothed_modulus, CircleSpectrum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `f(ρ, φ) = Σ_{|k| ≤ K} ρ^{|k|} G_k(ρ²) e^{ikφ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskField {
    k_max: usize,
    /// Nominal number of radial grid points used for value I/O.
    radial_points: usize,
    modes: Vec<Series>,
}

/// Radial grid `ρ_j = ((1 + y_j)/2)^{1/2}` with `y_j` the Chebyshev–Radau
/// points: `ρ_0 = 1`, clustered at the boundary, never `0`.
pub fn radial_grid(r: usize) -> Vec<f64> {
    cheb::radau_nodes(r).iter().map(|&y| ((1.0 + y) / 2.0).sqrt()).collect()
}

fn abs(k: i64) -> i32 {
    k.unsigned_abs() as i32
}

impl DiskField {
    pub fn zeros(k_max: usize, radial_points: usize) -> Self {
        DiskField {
            k_max,
            radial_points: radial_points.max(1),
            modes: vec![Vec::new(); 2 * k_max + 1],
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn radial_points(&self) -> usize {
        self.radial_points
    }

    /// Largest number of Chebyshev coefficients in any mode.
    pub fn radial_degree_bound(&self) -> usize {
        self.modes.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn with_radial_points(mut self, r: usize) -> Self {
        self.radial_points = r.max(1);
        self
    }

    fn idx(&self, k: i64) -> Option<usize> {
        (k.unsigned_abs() as usize <= self.k_max).then(|| (k + self.k_max as i64) as usize)
    }

    /// Chebyshev coefficients of `G_k`; empty when the mode vanishes.
    pub fn mode(&self, k: i64) -> &[Complex64] {
        match self.idx(k) {
            Some(i) => &self.modes[i],
            None => &[],
        }
    }

    /// Replace `G_k`, growing the angular truncation if needed.
    pub fn set_mode(&mut self, k: i64, g: Series) {
        let need = k.unsigned_abs() as usize;
        if need > self.k_max {
            *self = self.resized(need);
        }
        let i = self.idx(k).expect("in range after resize");
        self.modes[i] = cheb::trim(g);
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &[Complex64])> + '_ {
        let k = self.k_max as i64;
        (-k..=k).zip(self.modes.iter().map(Vec::as_slice))
    }

    pub fn resized(&self, k_max: usize) -> Self {
        let mut out = DiskField::zeros(k_max, self.radial_points);
        for (k, g) in self.modes() {
            if let Some(i) = out.idx(k) {
                out.modes[i] = g.to_vec();
            }
        }
        out
    }

    /// The single mode `ρ^{|k|} G(ρ²) e^{ikφ}`.
    pub fn single_mode(k_max: usize, radial_points: usize, k: i64, g: Series) -> Self {
        let mut f = DiskField::zeros(k_max, radial_points);
        f.set_mode(k, g);
        f
    }

    /// `ρ^{|k|} e^{ikφ}`.
    pub fn harmonic(k_max: usize, radial_points: usize, k: i64) -> Self {
        DiskField::single_mode(k_max, radial_points, k, vec![Complex64::new(1.0, 0.0)])
    }

    /// Build from profile values on [`radial_grid`] (`values[j]` at `ρ_j`).
    ///
    /// Values are divided by `ρ_j^{|k|}` before fitting, so data that is not
    /// of the form `ρ^{|k|}·smooth(ρ²)` is represented only approximately.
    pub fn from_grid(k_max: usize, modes: &[(i64, Vec<Complex64>)]) -> Result<Self> {
        let r = modes.first().map(|m| m.1.len()).unwrap_or(1).max(1);
        let mut f = DiskField::zeros(k_max, r);
        let rho = radial_grid(r);
        for (k, vals) in modes {
            if k.unsigned_abs() as usize > k_max {
                return Err(Error::Truncation {
                    needed: k.unsigned_abs() as usize,
                    got: k_max,
                });
            }
            if vals.len() != r {
                return Err(Error::Precondition(format!(
                    "mode {k} has {} radial values, expected {r}",
                    vals.len()
                )));
            }
            let scaled: Vec<Complex64> = vals
                .iter()
                .zip(&rho)
                .map(|(v, &p)| v / p.powi(abs(*k)))
                .collect();
            if scaled.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Numeric(format!("mode {k}: profile overflows near the origin")));
            }
            f.set_mode(*k, cheb::fit_radau(&scaled));
        }
        Ok(f)
    }

    /// Profile values on the `radial_points` grid, one vector per mode.
    pub fn to_grid(&self) -> Vec<(i64, Vec<Complex64>)> {
        let rho = radial_grid(self.radial_points);
        self.modes()
            .map(|(k, g)| (k, rho.iter().map(|&p| profile_value(k, g, p)).collect()))
            .collect()
    }

    /// Radial profile `u_k(ρ)`.
    pub fn profile(&self, k: i64, rho: f64) -> Complex64 {
        profile_value(k, self.mode(k), rho)
    }

    pub fn eval(&self, rho: f64, phi: f64) -> Complex64 {
        self.modes()
            .filter(|(_, g)| !g.is_empty())
            .map(|(k, g)| profile_value(k, g, rho) * Complex64::from_polar(1.0, k as f64 * phi))
            .sum()
    }

    pub fn map_modes(&self, f: impl Fn(i64, &[Complex64]) -> Series) -> Self {
        let mut out = DiskField::zeros(self.k_max, self.radial_points);
        for (i, (k, g)) in self.modes().enumerate() {
            out.modes[i] = cheb::trim(f(k, g));
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_modes(|_, g| cheb::scale(g, s))
    }

    pub fn add(&self, other: &DiskField) -> Self {
        let k_max = self.k_max.max(other.k_max);
        let mut out = DiskField::zeros(k_max, self.radial_points.max(other.radial_points));
        let k = k_max as i64;
        for (i, k) in (-k..=k).enumerate() {
            out.modes[i] = cheb::trim(cheb::add(self.mode(k), other.mode(k)));
        }
        out
    }

    pub fn sub(&self, other: &DiskField) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `Δf`, using `Δ(ρ^n G(ρ²)) = 4 ρ^n (x G'' + (n+1) G')` per mode.
    pub fn laplacian(&self) -> Self {
        self.map_modes(|k, g| {
            let n = abs(k) as f64;
            // d/dx = 2 d/dy
            let g1 = cheb::scale(&cheb::derivative(g), Complex64::new(2.0, 0.0));
            let g2 = cheb::scale(&cheb::derivative(&g1), Complex64::new(2.0, 0.0));
            let t = cheb::add(&cheb::mul_x(&g2), &cheb::scale(&g1, Complex64::new(n + 1.0, 0.0)));
            cheb::scale(&t, Complex64::new(4.0, 0.0))
        })
    }

    /// `∂_ρ^j f` on `ρ = 1` as a circle spectrum.
    pub fn radial_derivative_trace(&self, j: u32) -> CircleSpectrum {
        CircleSpectrum::from_fn(self.k_max, |k| boundary_derivative(k, self.mode(k), j))
    }

    /// `∂_ν^j f|_Γ` with the inner normal `∂_ν = -∂_ρ`.
    pub fn normal_derivative_trace(&self, j: u32) -> CircleSpectrum {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        self.radial_derivative_trace(j).scale(Complex64::new(sign, 0.0))
    }

    pub fn trace(&self) -> CircleSpectrum {
        self.radial_derivative_trace(0)
    }

    /// `W_+ = ∂_x + i∂_y`, which raises the angular index by one.
    pub fn w_plus(&self) -> Self {
        let mut out = DiskField::zeros(self.k_max + 1, self.radial_points);
        for (k, g) in self.modes() {
            if g.is_empty() {
                continue;
            }
            let d = cheb::scale(&cheb::derivative(g), Complex64::new(4.0, 0.0));
            let new = if k >= 0 { d } else { raise_lower(k, g, &d) };
            out.set_mode(k + 1, new);
        }
        out
    }

    /// `W_- = ∂_x - i∂_y`, which lowers the angular index by one.
    pub fn w_minus(&self) -> Self {
        let mut out = DiskField::zeros(self.k_max + 1, self.radial_points);
        for (k, g) in self.modes() {
            if g.is_empty() {
                continue;
            }
            let d = cheb::scale(&cheb::derivative(g), Complex64::new(4.0, 0.0));
            let new = if k <= 0 { d } else { raise_lower(k, g, &d) };
            out.set_mode(k - 1, new);
        }
        out
    }

    /// `∂_x = (W_+ + W_-)/2`.
    pub fn dx(&self) -> Self {
        self.w_plus().add(&self.w_minus()).scale(Complex64::new(0.5, 0.0))
    }

    /// `∂_y = (W_+ - W_-)/(2i)`.
    pub fn dy(&self) -> Self {
        self.w_plus().sub(&self.w_minus()).scale(Complex64::new(0.0, -0.5))
    }

    /// `(f, g)_Ω = ∫∫ f conj(g) ρ dρ dφ`, exact for the stored polynomials.
    pub fn inner(&self, other: &DiskField) -> Complex64 {
        let k = self.k_max.min(other.k_max) as i64;
        (-k..=k)
            .map(|k| mode_inner(abs(k) as usize, self.mode(k), other.mode(k)))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// `‖f‖_{H^s(Ω)} = (Σ_{|μ| ≤ s} ‖D^μ f‖²)^{1/2}` for integer `s ≥ 0`.
    pub fn sobolev_norm(&self, s: u32) -> f64 {
        let mut total = 0.0;
        let mut layer = vec![self.clone()];
        for order in 0..=s {
            total += layer.iter().map(|f| f.inner(f).re).sum::<f64>();
            if order == s {
                break;
            }
            // all ∂_x^a ∂_y^b of the next order, each multi-index once
            let mut next: Vec<DiskField> = layer.iter().map(DiskField::dx).collect();
            next.push(layer.last().expect("nonempty").dy());
            layer = next;
        }
        total.max(0.0).sqrt()
    }

    /// Sobolev norm of a real order, which must be a nonnegative integer.
    pub fn sobolev_norm_real(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.fract() != 0.0 {
            return Err(Error::Unsupported(format!(
                "interior Sobolev norms are implemented for nonnegative integer orders only, got {s}"
            )));
        }
        Ok(self.sobolev_norm(s as u32))
    }

    /// Random band-limited field: `G_k = Σ_{j < J} c_{k,j} T_j` with
    /// `c_{k,j}` i.i.d. standard complex Gaussians times `⟨k⟩^{-decay}`.
    ///
    /// Each mode draws from its own stream keyed by `(seed, trial, k)`, so a
    /// field with larger `K` extends the one with smaller `K`.
    pub fn random(k_max: usize, radial_terms: usize, decay: f64, seed: u64, trial: u64) -> Self {
        let mut f = DiskField::zeros(k_max, radial_terms.max(1));
        let k = k_max as i64;
        for k in -k..=k {
            let mut rng = mode_rng(seed, trial, k);
            let s = smoothed_modulus(&[k]).powf(-decay);
            let g = (0..radial_terms)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) * s
                })
                .collect();
            f.set_mode(k, g);
        }
        f
    }
}

/// Generator for mode `k` of trial `trial`: one ChaCha stream per pair.
pub fn mode_rng(seed: u64, trial: u64, k: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(1 << 20).wrapping_add(k.rem_euclid(1 << 20) as u64));
    rng
}

/// `2(nG + x G')` in the `d = 4 dG/dy = 2 dG/dx` scaling used by `W_±`.
fn raise_lower(k: i64, g: &[Complex64], d: &[Complex64]) -> Series {
    let n = abs(k) as f64;
    let xd = cheb::mul_x(d);
    cheb::add(&cheb::scale(g, Complex64::new(2.0 * n, 0.0)), &xd)
}

fn profile_value(k: i64, g: &[Complex64], rho: f64) -> Complex64 {
    if g.is_empty() {
        return ZERO;
    }
    cheb::eval(g, 2.0 * rho * rho - 1.0) * rho.powi(abs(k))
}

/// `∂_ρ^j (ρ^n G(ρ²))` at `ρ = 1`, from the Taylor expansion in `ε = ρ - 1`:
/// `ρ^n = (1+ε)^n` and `ρ² - 1 = 2ε + ε²`.
pub(crate) fn boundary_derivative(k: i64, g: &[Complex64], j: u32) -> Complex64 {
    if g.is_empty() {
        return ZERO;
    }
    let j = j as usize;
    let n = abs(k) as f64;
    // G^{(l)}(x=1)/l! for l ≤ j
    let mut taylor_g = Vec::with_capacity(j + 1);
    let mut d: Series = g.to_vec();
    let mut fact = 1.0;
    for l in 0..=j {
        if l > 0 {
            fact *= l as f64;
            d = cheb::scale(&cheb::derivative(&d), Complex64::new(2.0, 0.0));
        }
        taylor_g.push(cheb::at_one(&d) / fact);
    }
    // series of G(1 + 2ε + ε²) in ε, truncated at order j
    let delta = {
        let mut v = vec![0.0; j + 1];
        if j >= 1 {
            v[1] = 2.0;
        }
        if j >= 2 {
            v[2] = 1.0;
        }
        v
    };
    let mut comp = vec![ZERO; j + 1];
    let mut power = vec![0.0; j + 1];
    power[0] = 1.0;
    for tg in &taylor_g {
        for (c, &p) in comp.iter_mut().zip(&power) {
            *c += tg * p;
        }
        power = mul_trunc(&power, &delta);
    }
    // (1+ε)^n
    let mut binom = vec![0.0; j + 1];
    binom[0] = 1.0;
    for i in 1..=j {
        binom[i] = binom[i - 1] * (n - (i - 1) as f64) / i as f64;
    }
    let coeff: Complex64 = (0..=j).map(|i| comp[i] * binom[j - i]).sum();
    let jfact: f64 = (1..=j).map(|i| i as f64).product();
    coeff * jfact
}

fn mul_trunc(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `2π ∫₀¹ ρ^{2n} G₁ conj(G₂) ρ dρ = π ∫₀¹ x^n G₁ conj(G₂) dx`.
pub(crate) fn mode_inner(n: usize, g1: &[Complex64], g2: &[Complex64]) -> Complex64 {
    if g1.is_empty() || g2.is_empty() {
        return ZERO;
    }
    let degree = n + g1.len() + g2.len();
    let rule = unit_rule(degree / 2 + 2);
    let mut acc = ZERO;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let y = 2.0 * x - 1.0;
        acc += w * x.powi(n as i32) * cheb::eval(g1, y) * cheb::eval(g2, y).conj();
    }
    PI * acc
}

/// Wire form: `{"K", "R", "modes": [{"k", "radial": [..]}]}` with profile
/// values on [`radial_grid`]; entries are numbers or `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiskFieldRepr {
    #[serde(rename = "K", default)]
    pub k_max: Option<usize>,
    #[serde(rename = "R", default)]
    pub radial_points: Option<usize>,
    pub modes: Vec<ModeRepr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeRepr {
    pub k: i64,
    pub radial: Vec<ComplexValue>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl DiskFieldRepr {
    pub fn into_field(self, default_k: Option<usize>, default_r: Option<usize>) -> Result<DiskField> {
        let needed = self.modes.iter().map(|m| m.k.unsigned_abs() as usize).max().unwrap_or(0);
        let k_max = self.k_max.or(default_k).unwrap_or(needed);
        let r = self
            .radial_points
            .or(default_r)
            .or_else(|| self.modes.first().map(|m| m.radial.len()))
            .unwrap_or(1);
        if self.modes.is_empty() {
            return Ok(DiskField::zeros(k_max, r));
        }
        let modes: Vec<(i64, Vec<Complex64>)> = self
            .modes
            .into_iter()
            .map(|m| (m.k, m.radial.into_iter().map(Complex64::from).collect()))
            .collect();
        if let Some((k, v)) = modes.iter().find(|(_, v)| v.len() != r) {
            return Err(Error::Precondition(format!(
                "mode {k} has {} radial values, expected R = {r}",
                v.len()
            )));
        }
        DiskField::from_grid(k_max, &modes)
    }

    /// Nonzero modes sampled on a grid fine enough to determine them exactly.
    pub fn from_field(f: &DiskField) -> Self {
        let r = f.radial_points.max(f.radial_degree_bound());
        let grid = f.clone().with_radial_points(r).to_grid();
        DiskFieldRepr {
            k_max: Some(f.k_max),
            radial_points: Some(r),
            modes: grid
                .into_iter()
                .filter(|(k, _)| !f.mode(*k).is_empty())
                .map(|(k, v)| ModeRepr {
                    k,
                    radial: v.into_iter().map(|c| ComplexValue::Pair([c.re, c.im])).collect(),
                })
                .collect(),
        }
    }
}

impl Serialize for DiskField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiskFieldRepr::from_field(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiskField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        DiskFieldRepr::deserialize(d)?
            .into_field(None, None)
            .map_err(serde::de::Error::custom)
    }
}
