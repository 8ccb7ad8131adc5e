//! Numerical probes of the global a priori estimate and of boundary
//! regularity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::DiskField;
use super::solver::{apply_operator, solve, DiskBvpProblem, SolveOptions};
use crate::error::{Error, Result};
use crate::ro::RoWeight;
use crate::spectra::{hnorm, smoothed_modulus, CircleSpectrum, Weight};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriOptions {
    pub trials: usize,
    pub s: f64,
    pub lambda: f64,
    pub seed: u64,
    pub m: u32,
    #[serde(rename = "K")]
    pub k_max: usize,
    /// Chebyshev terms per radial profile of the random fields.
    pub radial_terms: usize,
    /// Coefficients are scaled by `⟨k⟩^{-decay}`.
    pub decay: f64,
}

impl Default for AprioriOptions {
    fn default() -> Self {
        AprioriOptions {
            trials: 100,
            s: 3.0,
            lambda: 1.0,
            seed: 0,
            m: 2,
            k_max: 32,
            radial_terms: 6,
            decay: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub max_ratio: f64,
    pub per_trial: Vec<f64>,
    pub options: AprioriOptions,
}

fn interior_order(s: f64, what: &str) -> Result<u32> {
    if s < 0.0 || s.fract() != 0.0 {
        return Err(Error::Unsupported(format!(
            "{what} = {s}: interior norms need a nonnegative integer order"
        )));
    }
    Ok(s as u32)
}

/// `‖u‖_{H^s(Ω)} / (‖Δu‖_{H^{s-2}(Ω)} + ‖∂_ν^m u‖_{H^{s-m-1/2}(Γ)} + ‖u‖_{H^{s-λ}(Ω)})`.
pub fn apriori_ratio(u: &DiskField, s: f64, lambda: f64, m: u32) -> Result<f64> {
    if s <= m as f64 + 0.5 {
        return Err(Error::Precondition(format!("need s > m + 1/2, got s = {s}, m = {m}")));
    }
    if lambda <= 0.0 {
        return Err(Error::Precondition(format!("need λ > 0, got {lambda}")));
    }
    let top = interior_order(s, "s")?;
    let low = interior_order(s - lambda, "s - λ")?;
    let lap_order = interior_order(s - 2.0, "s - 2")?;
    let (lap, bc) = apply_operator(u, m);
    let denom = lap.sobolev_norm(lap_order)
        + hnorm(&bc, &RoWeight::power(s - m as f64 - 0.5))
        + u.sobolev_norm(low);
    Ok(u.sobolev_norm(top) / denom)
}

/// Largest a priori ratio over seeded random band-limited fields.
pub fn apriori_probe(opts: &AprioriOptions) -> Result<AprioriReport> {
    if opts.trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let per_trial = (0..opts.trials as u64)
        .map(|t| {
            let u = DiskField::random(opts.k_max, opts.radial_terms, opts.decay, opts.seed, t);
            apriori_ratio(&u, opts.s, opts.lambda, opts.m)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_ratio = per_trial.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max_ratio.is_finite() {
        return Err(Error::Numeric("a priori ratio is not finite".into()));
    }
    Ok(AprioriReport {
        max_ratio,
        per_trial,
        options: opts.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceNormRow {
    #[serde(rename = "K")]
    pub k_max: usize,
    pub weight: String,
    pub normal_order: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub m: u32,
    /// Boundary data `ĝ_k = 1/β(⟨k⟩)`.
    pub data_weight: String,
    pub rows: Vec<TraceNormRow>,
}

impl RegularityReport {
    /// Values of one `(weight, normal order)` series in increasing `K`.
    pub fn series(&self, weight: &str, normal_order: u32) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.weight == weight && r.normal_order == normal_order)
            .map(|r| (r.k_max, r.value))
            .collect()
    }

    /// CSV with header `K,weight,normal_order,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,weight,normal_order,value\n");
        for r in &self.rows {
            out.push_str(&format!("{},\"{}\",{},{:e}\n", r.k_max, r.weight, r.normal_order, r.value));
        }
        out
    }
}

/// Boundary data `ĝ_k = 1/β(⟨k⟩)` for `|k| ≤ K`.
pub fn decaying_boundary_data(beta: &RoWeight, k_max: usize) -> CircleSpectrum {
    CircleSpectrum::from_fn(k_max, |k| Complex64::new(1.0 / beta.value(smoothed_modulus(&[k])), 0.0))
}

/// Solve with `f = 0` and `ĝ_k = 1/β(⟨k⟩)` at each truncation and tabulate
/// `‖∂_ν^j u|_Γ‖_{H^α(Γ)}` over the weight ladder.
pub fn regularity_probe(
    beta: &RoWeight,
    m: u32,
    truncations: &[usize],
    ladder: &[RoWeight],
    normal_orders: &[u32],
) -> Result<RegularityReport> {
    beta.validate()?;
    for a in ladder {
        a.validate()?;
    }
    let mut rows = Vec::new();
    for &k_max in truncations {
        let g = decaying_boundary_data(beta, k_max);
        let problem = DiskBvpProblem::new(m, DiskField::zeros(k_max, 1), g)?;
        let u = solve(&problem, &[], SolveOptions::default())?.solution;
        for &j in normal_orders {
            let trace = u.normal_derivative_trace(j);
            for a in ladder {
                rows.push(TraceNormRow {
                    k_max,
                    weight: a.label(),
                    normal_order: j,
                    value: hnorm(&trace, a),
                });
            }
        }
    }
    Ok(RegularityReport {
        m,
        data_weight: beta.label(),
        rows,
    })
}
