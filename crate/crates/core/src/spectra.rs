//! Fourier analysis on the unit circle and on small periodic lattices, and
//! Hörmander norms as weighted spectral sums.
//!
//! Convention: `ĥ_k = (1/2π) ∫₀^{2π} h(φ) e^{-ikφ} dφ`, so that
//! `‖h‖²_{L²(Γ)} = 2π Σ_k |ĥ_k|²`. On an `n`-dimensional lattice the factor
//! is `(2π)^n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ro::RoWeight;

/// A positive function of `t ≥ 1` usable as a spectral weight.
pub trait Weight {
    fn value(&self, t: f64) -> f64;
}

impl Weight for RoWeight {
    fn value(&self, t: f64) -> f64 {
        self.ln_eval(t.ln()).exp()
    }
}

impl<F: Fn(f64) -> f64> Weight for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
pub fn smoothed_modulus(xi: &[i64]) -> f64 {
    (1.0 + xi.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>()).sqrt()
}

/// Anything that exposes `(⟨ξ⟩, ŵ(ξ))` pairs over a finite support.
pub trait Spectrum {
    /// Dimension `n` of the frequency lattice.
    fn dim(&self) -> usize;
    fn modes(&self) -> Vec<(f64, Complex64)>;
}

/// Finite two-sided Fourier series `Σ_{|k|≤K} ĥ_k e^{ikφ}` on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SpectrumRepr", try_from = "SpectrumRepr")]
pub struct CircleSpectrum {
    k_max: usize,
    coeffs: Vec<Complex64>,
}

/// Wire form: `{"coeffs": [[k, re, im], ...]}`; absent modes are zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    pub coeffs: Vec<(i64, f64, f64)>,
}

impl From<CircleSpectrum> for SpectrumRepr {
    fn from(s: CircleSpectrum) -> Self {
        SpectrumRepr {
            k_max: Some(s.k_max),
            coeffs: s.iter().map(|(k, c)| (k, c.re, c.im)).collect(),
        }
    }
}

impl TryFrom<SpectrumRepr> for CircleSpectrum {
    type Error = Error;

    fn try_from(r: SpectrumRepr) -> Result<Self> {
        let needed = r.coeffs.iter().map(|c| c.0.unsigned_abs() as usize).max().unwrap_or(0);
        let k_max = r.k_max.unwrap_or(needed);
        if needed > k_max {
            return Err(Error::Truncation { needed, got: k_max });
        }
        let mut s = CircleSpectrum::zeros(k_max);
        for (k, re, im) in r.coeffs {
            s.set(k, Complex64::new(re, im));
        }
        Ok(s)
    }
}

impl CircleSpectrum {
    pub fn zeros(k_max: usize) -> Self {
        CircleSpectrum {
            k_max,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * k_max + 1],
        }
    }

    /// Coefficients ordered `k = -K..=K`.
    pub fn from_coeffs(k_max: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * k_max + 1 {
            return Err(Error::Precondition(format!(
                "expected {} coefficients for K = {k_max}, got {}",
                2 * k_max + 1,
                coeffs.len()
            )));
        }
        Ok(CircleSpectrum { k_max, coeffs })
    }

    pub fn single_mode(k_max: usize, k: i64, c: Complex64) -> Self {
        let mut s = CircleSpectrum::zeros(k_max.max(k.unsigned_abs() as usize));
        s.set(k, c);
        s
    }

    /// Coefficients `ĥ_k = f(k)` for `|k| ≤ K`.
    pub fn from_fn(k_max: usize, f: impl Fn(i64) -> Complex64) -> Self {
        let k = k_max as i64;
        CircleSpectrum {
            k_max,
            coeffs: (-k..=k).map(f).collect(),
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `ĥ_k`, zero outside the truncation.
    pub fn get(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.k_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.k_max as i64) as usize]
        }
    }

    /// Set `ĥ_k`, growing the truncation if needed.
    pub fn set(&mut self, k: i64, c: Complex64) {
        let need = k.unsigned_abs() as usize;
        if need > self.k_max {
            *self = self.resized(need);
        }
        let idx = (k + self.k_max as i64) as usize;
        self.coeffs[idx] = c;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k = self.k_max as i64;
        (-k..=k).zip(self.coeffs.iter().copied())
    }

    /// Same series with truncation `K'`; modes above `K'` are dropped.
    pub fn resized(&self, k_max: usize) -> Self {
        CircleSpectrum::from_fn(k_max, |k| self.get(k))
    }

    pub fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        CircleSpectrum::from_fn(self.k_max, |k| f(k, self.get(k)))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map(|_, c| a * c)
    }

    pub fn add(&self, other: &CircleSpectrum) -> Self {
        CircleSpectrum::from_fn(self.k_max.max(other.k_max), |k| self.get(k) + other.get(k))
    }

    pub fn sub(&self, other: &CircleSpectrum) -> Self {
        CircleSpectrum::from_fn(self.k_max.max(other.k_max), |k| self.get(k) - other.get(k))
    }

    /// `∂_φ^l h`.
    pub fn derivative(&self, l: u32) -> Self {
        self.map(|k, c| Complex64::new(0.0, k as f64).powu(l) * c)
    }

    /// `(a, b)_Γ = ∫ a conj(b) dφ = 2π Σ â_k conj(b̂_k)`.
    pub fn inner(&self, other: &CircleSpectrum) -> Complex64 {
        let k = self.k_max.min(other.k_max) as i64;
        2.0 * PI * (-k..=k).map(|k| self.get(k) * other.get(k).conj()).sum::<Complex64>()
    }

    pub fn l2_norm(&self) -> f64 {
        (2.0 * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `h(φ)`.
    pub fn eval(&self, phi: f64) -> Complex64 {
        self.iter()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * phi))
            .sum()
    }

    /// Values at the `n` uniform angles `2πj/n`.
    pub fn synthesize(&self, n: usize) -> Result<Vec<Complex64>> {
        let needed = 2 * self.k_max + 1;
        if n < needed {
            return Err(Error::Aliasing {
                samples: n,
                k_max: self.k_max,
                needed,
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in self.iter() {
            buf[k.rem_euclid(n as i64) as usize] = c;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        Ok(buf)
    }

    /// CSV with header `k,re,im`, one row per mode.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,re,im\n");
        for (k, c) in self.iter() {
            out.push_str(&format!("{k},{:e},{:e}\n", c.re, c.im));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('k')) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Domain(format!("malformed CSV row {}: {line}", i + 1));
            if parts.len() != 3 {
                return Err(bad());
            }
            let k: i64 = parts[0].parse().map_err(|_| bad())?;
            let re: f64 = parts[1].parse().map_err(|_| bad())?;
            let im: f64 = parts[2].parse().map_err(|_| bad())?;
            rows.push((k, re, im));
        }
        CircleSpectrum::try_from(SpectrumRepr {
            k_max: None,
            coeffs: rows,
        })
    }

    /// Random spectrum with i.i.d. complex Gaussian coefficients scaled by
    /// `⟨k⟩^{-decay}`.
    pub fn random<R: Rng>(k_max: usize, decay: f64, rng: &mut R) -> Self {
        let k = k_max as i64;
        let coeffs = (-k..=k)
            .map(|k| {
                let s = smoothed_modulus(&[k]).powf(-decay);
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * s
            })
            .collect();
        CircleSpectrum { k_max, coeffs }
    }
}

impl Spectrum for CircleSpectrum {
    fn dim(&self) -> usize {
        1
    }

    fn modes(&self) -> Vec<(f64, Complex64)> {
        self.iter().map(|(k, c)| (smoothed_modulus(&[k]), c)).collect()
    }
}

/// Fourier coefficients on the lattice `{ξ ∈ ℤ^n : |ξ_i| ≤ K}`, `n ∈ {1, 2}`,
/// stored row-major with `ξ_1` outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpectrum {
    n: usize,
    k_max: usize,
    coeffs: Vec<Complex64>,
}

impl LatticeSpectrum {
    pub fn new(n: usize, k_max: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::Unsupported(format!("lattice dimension {n} (only 1 or 2)")));
        }
        let side = 2 * k_max + 1;
        if coeffs.len() != side.pow(n as u32) {
            return Err(Error::Precondition(format!(
                "expected {} coefficients, got {}",
                side.pow(n as u32),
                coeffs.len()
            )));
        }
        Ok(LatticeSpectrum { n, k_max, coeffs })
    }

    pub fn from_fn(n: usize, k_max: usize, f: impl Fn(&[i64]) -> Complex64) -> Result<Self> {
        let k = k_max as i64;
        let coeffs = match n {
            1 => (-k..=k).map(|a| f(&[a])).collect(),
            2 => (-k..=k)
                .flat_map(|a| (-k..=k).map(move |b| [a, b]))
                .map(|xi| f(&xi))
                .collect(),
            _ => return Err(Error::Unsupported(format!("lattice dimension {n} (only 1 or 2)"))),
        };
        LatticeSpectrum::new(n, k_max, coeffs)
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn frequencies(&self) -> Vec<Vec<i64>> {
        let k = self.k_max as i64;
        match self.n {
            1 => (-k..=k).map(|a| vec![a]).collect(),
            _ => (-k..=k)
                .flat_map(|a| (-k..=k).map(move |b| vec![a, b]))
                .collect(),
        }
    }
}

impl Spectrum for LatticeSpectrum {
    fn dim(&self) -> usize {
        self.n
    }

    fn modes(&self) -> Vec<(f64, Complex64)> {
        self.frequencies()
            .iter()
            .zip(&self.coeffs)
            .map(|(xi, &c)| (smoothed_modulus(xi), c))
            .collect()
    }
}

/// `(2π)^{n/2} (Σ_ξ α²(⟨ξ⟩) |ŵ(ξ)|²)^{1/2}`, summed in storage order.
pub fn hnorm<S: Spectrum + ?Sized, W: Weight + ?Sized>(w: &S, alpha: &W) -> f64 {
    hnorm_squared(w, alpha).sqrt()
}

pub(crate) fn hnorm_squared<S: Spectrum + ?Sized, W: Weight + ?Sized>(w: &S, alpha: &W) -> f64 {
    let factor = (2.0 * PI).powi(w.dim() as i32);
    factor
        * w.modes()
            .iter()
            .map(|&(t, c)| {
                let a = alpha.value(t);
                a * a * c.norm_sqr()
            })
            .sum::<f64>()
}

/// Fourier coefficients `|k| ≤ K` from `N ≥ 2K+1` samples at angles `2πj/N`.
pub fn analyze_circle(samples: &[Complex64], k_max: usize) -> Result<CircleSpectrum> {
    let n = samples.len();
    let needed = 2 * k_max + 1;
    if n < needed {
        return Err(Error::Aliasing {
            samples: n,
            k_max,
            needed,
        });
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(CircleSpectrum::from_fn(k_max, |k| buf[k.rem_euclid(n as i64) as usize] * scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRatio {
    /// `max α(t)/η(t)` over `1 ≤ t ≤ ⟨K⟩`.
    pub sup_ratio: f64,
    /// Where the maximum is attained.
    pub argsup: f64,
    /// Ratio at `⟨K⟩` is below half its value at `⟨K⟩/10`.
    pub vanishing_trend: bool,
}

/// Evidence for `H^η ↪ H^α` (bounded ratio) and compactness (ratio → 0).
pub fn embedding_ratio(alpha: &RoWeight, eta: &RoWeight, k_max: usize) -> EmbeddingRatio {
    let top = smoothed_modulus(&[k_max as i64]);
    let ratio = |t: f64| (alpha.ln_eval(t.ln()) - eta.ln_eval(t.ln())).exp();
    const GRID: usize = 2048;
    let mut ts: Vec<f64> = (0..GRID)
        .map(|i| (top.ln() * i as f64 / (GRID - 1) as f64).exp())
        .collect();
    ts.extend((0..=k_max.min(100_000) as i64).map(|k| smoothed_modulus(&[k])));
    ts.extend(
        alpha
            .breakpoints()
            .into_iter()
            .chain(eta.breakpoints())
            .filter(|&b| b <= top),
    );
    let (mut sup, mut arg) = (f64::NEG_INFINITY, 1.0);
    for t in ts {
        let r = ratio(t);
        if r > sup {
            sup = r;
            arg = t;
        }
    }
    let vanishing_trend = top >= 10.0 && ratio(top) < 0.5 * ratio(top / 10.0);
    EmbeddingRatio {
        sup_ratio: sup,
        argsup: arg,
        vanishing_trend,
    }
}

/// Largest ratio `lower(⟨k⟩)/upper(⟨k⟩)` over `|k| ≤ K`: the norm of the
/// identity `H^upper → H^lower` on truncated circle spectra.
pub fn sup_weight_ratio<A: Weight + ?Sized, B: Weight + ?Sized>(lower: &A, upper: &B, k_max: usize) -> f64 {
    (0..=k_max as i64)
        .map(|k| {
            let t = smoothed_modulus(&[k]);
            lower.value(t) / upper.value(t)
        })
        .fold(0.0, f64::max)
}

/// Exact norm of `∂_φ^l : H^α(Γ) → H^{αρ^{-l}}(Γ)` on modes `|k| ≤ K`,
/// i.e. `max_k |k|^l ⟨k⟩^{-l}`.
pub fn derivative_multiplier_bound(l: u32, alpha: &RoWeight, k_max: usize) -> f64 {
    (-(k_max as i64)..=k_max as i64)
        .map(|k| {
            let t = smoothed_modulus(&[k]);
            let source = alpha.value(t);
            let target = source * t.powi(-(l as i32));
            let symbol = (k.unsigned_abs() as f64).powi(l as i32);
            target * symbol / source
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn smoothed_modulus_examples() {
        assert_eq!(smoothed_modulus(&[0]), 1.0);
        assert_eq!(smoothed_modulus(&[3, 4]), 26f64.sqrt());
        assert_eq!(smoothed_modulus(&[1]), 2f64.sqrt());
    }

    #[test]
    fn single_mode_norm() {
        let w = RoWeight::power(1.5);
        let s = CircleSpectrum::single_mode(5, 3, c(0.3, -0.4));
        let expected = (2.0 * PI).sqrt() * 10f64.powf(0.75) * 0.5;
        assert!((hnorm(&s, &w) - expected).abs() < 1e-13);
    }

    #[test]
    fn unit_weight_is_l2() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = CircleSpectrum::random(20, 1.0, &mut rng);
        assert!((hnorm(&s, &RoWeight::power(0.0)) - s.l2_norm()).abs() < 1e-13);
    }

    #[test]
    fn analyze_examples() {
        let n = 16;
        let angles: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let e1: Vec<Complex64> = angles.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        let s = analyze_circle(&e1, 5).unwrap();
        for (k, v) in s.iter() {
            let want = if k == 1 { 1.0 } else { 0.0 };
            assert!((v - c(want, 0.0)).norm() < 1e-14);
        }
        let cosine: Vec<Complex64> = angles.iter().map(|&p| c(p.cos(), 0.0)).collect();
        let s = analyze_circle(&cosine, 3).unwrap();
        assert!((s.get(1) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((s.get(-1) - c(0.5, 0.0)).norm() < 1e-14);
        let ones = vec![c(1.0, 0.0); 7];
        assert!((analyze_circle(&ones, 3).unwrap().get(0) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn too_few_samples_alias() {
        let err = analyze_circle(&[c(1.0, 0.0); 6], 3).unwrap_err();
        assert!(matches!(err, Error::Aliasing { needed: 7, .. }));
    }

    #[test]
    fn synthesize_then_analyze_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = CircleSpectrum::random(12, 0.0, &mut rng);
        let samples = s.synthesize(25).unwrap();
        let back = analyze_circle(&samples, 12).unwrap();
        let err = back.sub(&s).l2_norm() / s.l2_norm();
        assert!(err < 1e-12);
        // pointwise evaluation agrees with the FFT synthesis
        let phi = 2.0 * PI * 3.0 / 25.0;
        assert!((s.eval(phi) - samples[3]).norm() < 1e-12);
    }

    #[test]
    fn real_function_has_conjugate_symmetric_spectrum() {
        let n = 33;
        let samples: Vec<Complex64> = (0..n)
            .map(|j| {
                let p = 2.0 * PI * j as f64 / n as f64;
                c((3.0 * p).sin() + 0.2 * (5.0 * p).cos() + 1.0, 0.0)
            })
            .collect();
        let s = analyze_circle(&samples, 16).unwrap();
        for k in 0..=16 {
            assert!((s.get(-k) - s.get(k).conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn lattice_norm_matches_direct_sum() {
        let w = RoWeight::power(1.0);
        let l = LatticeSpectrum::from_fn(2, 3, |xi| c(xi[0] as f64, 1.0 / (1.0 + xi[1].abs() as f64))).unwrap();
        let mut direct = 0.0;
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                let t2 = 1.0 + (a * a + b * b) as f64;
                direct += t2 * ((a * a) as f64 + 1.0 / (1.0 + b.abs() as f64).powi(2));
            }
        }
        let expected = 2.0 * PI * direct.sqrt();
        assert!((hnorm(&l, &w) - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn embedding_ratio_examples() {
        let r = embedding_ratio(&RoWeight::power(1.0), &RoWeight::power(2.0), 10_000);
        assert!((r.sup_ratio - 1.0).abs() < 1e-15);
        assert_eq!(r.argsup, 1.0);
        assert!(r.vanishing_trend);
        let same = embedding_ratio(&RoWeight::power(1.0), &RoWeight::power(1.0), 100);
        assert!((same.sup_ratio - 1.0).abs() < 1e-12 && !same.vanishing_trend);
        let log = embedding_ratio(&RoWeight::power_log(1.0, vec![1.0]), &RoWeight::power(1.0), 10_000);
        assert!(!log.vanishing_trend);
        let top = smoothed_modulus(&[10_000]);
        assert!((log.argsup - top).abs() < 1e-9);
        assert!((log.sup_ratio - top.ln()).abs() < 1e-9);
    }

    #[test]
    fn derivative_bound_examples() {
        let a = RoWeight::power(0.7);
        assert_eq!(derivative_multiplier_bound(0, &a, 10), 1.0);
        assert!((derivative_multiplier_bound(1, &a, 1) - 0.5f64.sqrt()).abs() < 1e-15);
        let k = 128.0f64;
        let expected = (k / (1.0 + k * k).sqrt()).powi(3);
        assert!((derivative_multiplier_bound(3, &a, 128) - expected).abs() < 1e-14);
        assert!((expected - 0.99991).abs() < 1e-5);
    }

    #[test]
    fn json_and_csv_wire_forms() {
        let s = CircleSpectrum::single_mode(2, -1, c(1.5, -2.0));
        let json = serde_json::to_string(&s).unwrap();
        let back: CircleSpectrum = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let parsed: CircleSpectrum = serde_json::from_str(r#"{"coeffs": [[3, 1.0, 0.0]]}"#).unwrap();
        assert_eq!(parsed.k_max(), 3);
        assert_eq!(CircleSpectrum::from_csv(&s.to_csv()).unwrap().get(-1), c(1.5, -2.0));
        assert!(CircleSpectrum::from_csv("k,re,im\n1,2\n").is_err());
    }
}
