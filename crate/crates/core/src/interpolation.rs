//! Interpolation with a function parameter between Sobolev spaces
//! `H^{(s0)}` and `H^{(s1)}`, realized on spectra.
//!
//! The generating operator of the pair is the Fourier multiplier
//! `⟨ξ⟩^{s1-s0}`, so the interpolation norm of a spectrum is its Hörmander
//! norm with weight `⟨ξ⟩^{s0} ψ(⟨ξ⟩^{s1-s0})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ro::{best_indices, IndexPair, RoWeight};
use crate::spectra::{hnorm, Spectrum, Weight};

/// Endpoints `s0 < s1` and a weight `α` whose indices lie strictly inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetupRepr")]
pub struct InterpolationSetup {
    s0: f64,
    s1: f64,
    alpha: RoWeight,
    #[serde(skip)]
    indices: Option<IndexPair>,
}

#[derive(Deserialize)]
struct SetupRepr {
    s0: f64,
    s1: f64,
    alpha: RoWeight,
}

impl TryFrom<SetupRepr> for InterpolationSetup {
    type Error = Error;

    fn try_from(r: SetupRepr) -> Result<Self> {
        build_psi(r.alpha, r.s0, r.s1)
    }
}

/// Validate `s0 < σ0(α) ≤ σ1(α) < s1` and fix the parameter `ψ`.
pub fn build_psi(alpha: RoWeight, s0: f64, s1: f64) -> Result<InterpolationSetup> {
    alpha.validate()?;
    if !(s0.is_finite() && s1.is_finite() && s0 < s1) {
        return Err(Error::Precondition(format!("need s0 < s1, got s0 = {s0}, s1 = {s1}")));
    }
    let idx = best_indices(&alpha)?;
    if idx.sigma0 <= s0 {
        return Err(Error::Precondition(format!(
            "lower index σ0(alpha) = {} does not exceed s0 = {s0}",
            idx.sigma0
        )));
    }
    if idx.sigma1 >= s1 {
        return Err(Error::Precondition(format!(
            "upper index σ1(alpha) = {} is not below s1 = {s1}",
            idx.sigma1
        )));
    }
    Ok(InterpolationSetup {
        s0,
        s1,
        alpha,
        indices: Some(idx),
    })
}

impl InterpolationSetup {
    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn s1(&self) -> f64 {
        self.s1
    }

    pub fn alpha(&self) -> &RoWeight {
        &self.alpha
    }

    /// Indices used when the setup was validated.
    pub fn indices(&self) -> Option<IndexPair> {
        self.indices
    }

    /// `ψ(t) = t^{-s0/(s1-s0)} α(t^{1/(s1-s0)})` for `t ≥ 1`, `α(1)` below.
    pub fn psi(&self, t: f64) -> f64 {
        if t < 1.0 {
            return self.alpha.value(1.0);
        }
        let d = self.s1 - self.s0;
        t.powf(-self.s0 / d) * self.alpha.value(t.powf(1.0 / d))
    }

    /// `⟨ξ⟩^{s0} ψ(⟨ξ⟩^{s1-s0})`, equal to `α(⟨ξ⟩)` up to rounding.
    pub fn composite_weight(&self, t: f64) -> f64 {
        t.powf(self.s0) * self.psi(t.powf(self.s1 - self.s0))
    }

    fn same_parameter(&self, other: &InterpolationSetup) -> bool {
        self.s0 == other.s0 && self.s1 == other.s1 && self.alpha == other.alpha
    }
}

/// Norm of `w` in the interpolation space `[H^{(s0)}, H^{(s1)}]_ψ`.
pub fn interp_norm<S: Spectrum + ?Sized>(w: &S, setup: &InterpolationSetup) -> f64 {
    hnorm(w, &|t: f64| setup.composite_weight(t))
}

struct Concatenated<'a> {
    dim: usize,
    parts: &'a [&'a dyn Spectrum],
}

impl Spectrum for Concatenated<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn modes(&self) -> Vec<(f64, num_complex::Complex64)> {
        self.parts.iter().flat_map(|p| p.modes()).collect()
    }
}

/// `|(Σ_j ‖w_j‖²)^{1/2} − ‖w_1 ⊕ … ⊕ w_J‖|` in the interpolation norm.
///
/// The direct sum is normed over the concatenated spectrum; all components
/// must share one parameter and one lattice dimension.
pub fn check_direct_sum(setups: &[InterpolationSetup], spectra: &[&dyn Spectrum]) -> Result<f64> {
    if setups.len() != spectra.len() {
        return Err(Error::Precondition(format!(
            "{} setups for {} spectra",
            setups.len(),
            spectra.len()
        )));
    }
    let Some(first) = setups.first() else {
        return Ok(0.0);
    };
    if let Some(j) = setups.iter().position(|s| !s.same_parameter(first)) {
        return Err(Error::Precondition(format!("component {j} uses a different interpolation parameter")));
    }
    let dim = spectra[0].dim();
    if spectra.iter().any(|s| s.dim() != dim) {
        return Err(Error::Precondition("components live on lattices of different dimension".into()));
    }
    let separate = spectra
        .iter()
        .map(|w| interp_norm(*w, first).powi(2))
        .sum::<f64>()
        .sqrt();
    let joint = interp_norm(&Concatenated { dim, parts: spectra }, first);
    Ok((separate - joint).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoconcavityReport {
    pub ok_on_sample: bool,
    /// Largest decrease of `ln ψ` or increase of `ln(ψ(t)/t)` along the grid.
    pub worst_violation: f64,
}

/// Allowed log-deviation from quasi-concavity.
pub const PSEUDOCONCAVITY_SLACK: f64 = std::f64::consts::LN_2;

/// Sampled evidence that `ψ` is equivalent to a concave function.
///
/// A positive function is equivalent to a concave one exactly when it is
/// equivalent to a function that is nondecreasing while `ψ(t)/t` is
/// nonincreasing. With `g(u) = ln ψ(e^u)` on a uniform grid of
/// `[0, ln t_max]`, the report gives the largest drop of `g` and the largest
/// rise of `g(u) − u` between any two grid points, and accepts when it stays
/// within [`PSEUDOCONCAVITY_SLACK`].
pub fn check_pseudoconcavity(setup: &InterpolationSetup, t_max: f64, grid: usize) -> PseudoconcavityReport {
    let grid = grid.max(2);
    let top = t_max.max(1.0).ln();
    let mut worst = 0.0f64;
    let mut max_g = f64::NEG_INFINITY;
    let mut min_h = f64::INFINITY;
    for i in 0..grid {
        let u = top * i as f64 / (grid - 1) as f64;
        let g = setup.psi(u.exp()).ln();
        let h = g - u;
        max_g = max_g.max(g);
        min_h = min_h.min(h);
        worst = worst.max(max_g - g).max(h - min_h);
    }
    PseudoconcavityReport {
        ok_on_sample: worst <= PSEUDOCONCAVITY_SLACK,
        worst_violation: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{CircleSpectrum, LatticeSpectrum};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, PI};

    #[test]
    fn power_weight_gives_power_parameter() {
        let s = build_psi(RoWeight::power(0.7), -0.3, 2.0).unwrap();
        for t in [1.0, 2.0, 17.0, 1e6] {
            let want = f64::powf(t, (0.7 + 0.3) / 2.3);
            assert!((s.psi(t) - want).abs() <= 1e-12 * want);
        }
        let half = build_psi(RoWeight::power(0.0), -1.0, 1.0).unwrap();
        assert!((half.psi(9.0) - 3.0).abs() < 1e-14);
        assert_eq!(half.psi(0.25), 1.0);
    }

    #[test]
    fn power_log_psi_value() {
        let s = build_psi(RoWeight::power_log(1.0, vec![1.0]), 0.0, 2.0).unwrap();
        // t^{1/2} = e² lies past the switch point e, so α(e²) = e² ln e²
        let want = 2.0 * E * E;
        assert!((s.psi(E.powi(4)) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn index_violations_name_the_index() {
        let e = build_psi(RoWeight::power(1.0), 1.0, 2.0).unwrap_err();
        assert!(matches!(&e, Error::Precondition(m) if m.contains("σ0")));
        let e = build_psi(RoWeight::power(1.0), 0.0, 1.0).unwrap_err();
        assert!(matches!(&e, Error::Precondition(m) if m.contains("σ1")));
        assert!(build_psi(RoWeight::power(1.0), 2.0, 0.0).is_err());
    }

    #[test]
    fn single_mode_norm_identity() {
        let s = build_psi(RoWeight::oscillating(3.0, 0.1, 1.0).unwrap(), 2.5, 3.5).unwrap();
        let c = Complex64::new(0.6, 0.8);
        let w = CircleSpectrum::single_mode(40, 17, c);
        let t = 290f64.sqrt();
        let want = (2.0 * PI).sqrt() * s.alpha().value(t);
        assert!((interp_norm(&w, &s) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn direct_sum_examples() {
        let s = build_psi(RoWeight::power_log(1.0, vec![2.0]), 0.0, 2.0).unwrap();
        let a = CircleSpectrum::single_mode(3, 2, Complex64::new(1.0, 0.0));
        let r = check_direct_sum(&[s.clone(), s.clone()], &[&a, &a]).unwrap();
        assert!(r <= 1e-14 * interp_norm(&a, &s));
        let empty = CircleSpectrum::zeros(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = CircleSpectrum::random(30, 1.0, &mut rng);
        let r = check_direct_sum(&[s.clone(), s.clone()], &[&empty, &b]).unwrap();
        assert!(r <= 1e-14 * interp_norm(&b, &s));
        let other = build_psi(RoWeight::power_log(1.0, vec![2.0]), -1.0, 2.0).unwrap();
        assert!(check_direct_sum(&[s.clone(), other], &[&a, &b]).is_err());
        let l = LatticeSpectrum::from_fn(2, 1, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(check_direct_sum(&[s.clone(), s], &[&a, &l]).is_err());
    }

    #[test]
    fn pseudoconcavity_examples() {
        let half = build_psi(RoWeight::power(0.0), -1.0, 1.0).unwrap();
        let r = check_pseudoconcavity(&half, 1e12, 2000);
        assert!(r.ok_on_sample);
        assert_eq!(r.worst_violation, 0.0);
        let osc = build_psi(RoWeight::oscillating(3.0, 0.1, 1.0).unwrap(), 2.5, 3.5).unwrap();
        let r = check_pseudoconcavity(&osc, 1e12, 2000);
        assert!(r.ok_on_sample);
        // ψ(t) = t^{0.5 + 0.1 sin ln ln t} for t ≥ e; the local exponent stays in (0, 1)
        assert!(r.worst_violation < 1e-12, "{}", r.worst_violation);
    }

    #[test]
    fn serde_validates_and_skips_psi() {
        let s = build_psi(RoWeight::power(1.0), 0.0, 2.0).unwrap();
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["s0"], 0.0);
        assert!(json.get("psi").is_none());
        let back: InterpolationSetup = serde_json::from_value(json).unwrap();
        assert!(back.same_parameter(&s));
        let bad = serde_json::json!({"s0": 1.5, "s1": 2.0, "alpha": {"kind": "power", "s": 1.0}});
        assert!(serde_json::from_value::<InterpolationSetup>(bad).is_err());
    }
}
