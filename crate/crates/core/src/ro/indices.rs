//! Matuszewska indices: closed forms and finite-range estimates.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::weight::RoWeight;
use crate::error::{Error, Result};

/// Lower and upper Matuszewska indices `σ0 ≤ σ1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub sigma0: f64,
    pub sigma1: f64,
    /// `true` for closed-form values, `false` for estimates and bounds.
    pub certified: bool,
    /// Half-width of the estimate; zero for closed forms.
    pub uncertainty: f64,
}

impl IndexPair {
    fn exact(sigma0: f64, sigma1: f64) -> Self {
        IndexPair {
            sigma0,
            sigma1,
            certified: true,
            uncertainty: 0.0,
        }
    }

    /// Indices of `1/α`.
    pub fn reciprocal(&self) -> Self {
        IndexPair {
            sigma0: -self.sigma1,
            sigma1: -self.sigma0,
            ..*self
        }
    }
}

/// Closed-form indices.
///
/// For a product the returned interval `[σ0(α)+σ0(β), σ1(α)+σ1(β)]` only
/// bounds the true pair, so it comes back uncertified.
pub fn analytic_indices(alpha: &RoWeight) -> Result<IndexPair> {
    match alpha {
        RoWeight::Power { s } | RoWeight::PowerLog { s, .. } => Ok(IndexPair::exact(*s, *s)),
        RoWeight::Oscillating { theta, delta, r } => {
            // The local exponent d ln α / d ln t equals
            // θ + δ sin(L^r) + δ r L^{r-1} cos(L^r) with L = ln ln t. The last
            // term dies out for r < 1 but keeps amplitude δ when r = 1.
            let amp = if *r < 1.0 { *delta } else { delta * SQRT_2 };
            Ok(IndexPair::exact(theta - amp, theta + amp))
        }
        RoWeight::PiecewiseTable { tail_exponent, .. } => match tail_exponent {
            Some(tau) => Ok(IndexPair::exact(*tau, *tau)),
            None => Err(Error::Unsupported(
                "table without a declared tail exponent has no closed-form indices".into(),
            )),
        },
        RoWeight::Product { left, right } => {
            let a = analytic_indices(left)?;
            let b = analytic_indices(right)?;
            Ok(IndexPair {
                sigma0: a.sigma0 + b.sigma0,
                sigma1: a.sigma1 + b.sigma1,
                certified: false,
                uncertainty: 0.0,
            })
        }
    }
}

/// Closed-form indices when available, otherwise the default estimate.
pub fn best_indices(alpha: &RoWeight) -> Result<IndexPair> {
    match analytic_indices(alpha) {
        Ok(p) => Ok(p),
        Err(_) => Ok(estimate_indices(alpha, &IndexEstimateOptions::default())?.pair),
    }
}

/// Sampling parameters for [`estimate_indices`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimateOptions {
    pub t_max: f64,
    pub lambda_grid: Vec<f64>,
    pub t_grid_size: usize,
}

impl Default for IndexEstimateOptions {
    fn default() -> Self {
        IndexEstimateOptions {
            t_max: 1e8,
            lambda_grid: vec![2.0, 4.0, 8.0, 16.0],
            t_grid_size: 400,
        }
    }
}

/// Per-λ detail of an index estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub lambda: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    /// Raw extremes of `ln(α(λt)/α(t)) / ln λ` over the window.
    pub raw_min: f64,
    pub raw_max: f64,
    /// Fitted coefficient of `1/ln t` removed from the samples.
    pub drift: f64,
    /// `|a_quadratic - a_linear|` for the extrapolated constant.
    pub model_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub pair: IndexPair,
    /// Sampling window `[t_lo, t_max]`.
    pub window: (f64, f64),
    pub per_lambda: Vec<LambdaEstimate>,
}

/// Estimate Matuszewska indices from samples of `α(λt)/α(t)`.
///
/// For each `λ` the exponents `e(t) = ln(α(λt)/α(t)) / ln λ` are sampled on a
/// geometric grid over the upper half (in `ln t`) of `[1, t_max/λ]`, above
/// every breakpoint of the weight. A least-squares fit
/// `e ≈ a + b/ln t + c/ln² t` extrapolates the slowly varying drift away;
/// the fit residuals keep any oscillation. The per-λ pair is
/// `a + min(residual)`, `a + max(residual)`. The overall pair takes the
/// extreme values over λ. The uncertainty is half the spread of the per-λ
/// values plus the largest change of `a` when the `1/ln² t` term is dropped.
pub fn estimate_indices(alpha: &RoWeight, opts: &IndexEstimateOptions) -> Result<IndexEstimate> {
    if !(opts.t_max >= 1e3) {
        return Err(Error::Precondition(format!(
            "t_max must be at least 1e3, got {}",
            opts.t_max
        )));
    }
    if opts.lambda_grid.is_empty() {
        return Err(Error::Precondition("lambda grid is empty".into()));
    }
    if let Some(bad) = opts.lambda_grid.iter().find(|l| !(**l > 1.0)) {
        return Err(Error::Precondition(format!("lambda values must exceed 1, got {bad}")));
    }
    if opts.t_grid_size < 3 {
        return Err(Error::Precondition("t grid needs at least 3 points".into()));
    }

    let u_max = opts.t_max.ln();
    let u_bp = alpha
        .breakpoints()
        .into_iter()
        .fold(0.0f64, |acc, b| acc.max(b.ln()));
    let u_lo = (0.5 * u_max).max(u_bp).max(1e-3);

    let mut per_lambda = Vec::with_capacity(opts.lambda_grid.len());
    for &lambda in &opts.lambda_grid {
        let ll = lambda.ln();
        let u_hi = u_max - ll;
        if u_hi <= u_lo {
            return Err(Error::Precondition(format!(
                "t_max = {} leaves no sampling window for lambda = {lambda}",
                opts.t_max
            )));
        }
        let n = opts.t_grid_size;
        let mut xs = Vec::with_capacity(n);
        let mut es = Vec::with_capacity(n);
        for i in 0..n {
            let u = u_lo + (u_hi - u_lo) * i as f64 / (n - 1) as f64;
            let e = (alpha.ln_eval(u + ll) - alpha.ln_eval(u)) / ll;
            if !e.is_finite() {
                return Err(Error::Numeric(format!(
                    "ratio at t = exp({u}), lambda = {lambda} is not finite"
                )));
            }
            xs.push(1.0 / u);
            es.push(e);
        }
        let lin = poly_fit(&xs, &es, 1);
        let quad = poly_fit(&xs, &es, 2);
        let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, e) in xs.iter().zip(&es) {
            let r = e - quad[0] - quad[1] * x - quad[2] * x * x;
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        let a = quad[0];
        per_lambda.push(LambdaEstimate {
            lambda,
            sigma0: a + rmin,
            sigma1: a + rmax,
            raw_min: es.iter().copied().fold(f64::INFINITY, f64::min),
            raw_max: es.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            drift: quad[1],
            model_gap: (quad[0] - lin[0]).abs(),
        });
    }

    let spread = |f: fn(&LambdaEstimate) -> f64| {
        let lo = per_lambda.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = per_lambda.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (s0_lo, s0_hi) = spread(|e| e.sigma0);
    let (s1_lo, s1_hi) = spread(|e| e.sigma1);
    let pair = IndexPair {
        sigma0: s0_lo,
        sigma1: s1_hi,
        certified: false,
        uncertainty: 0.5 * (s0_hi - s0_lo).max(s1_hi - s1_lo)
            + per_lambda.iter().map(|e| e.model_gap).fold(0.0, f64::max),
    };
    Ok(IndexEstimate {
        pair,
        window: (u_lo.exp(), opts.t_max),
        per_lambda,
    })
}

/// Least-squares polynomial coefficients (constant first), fitted in the
/// centred and scaled variable for conditioning.
fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sx = xs.iter().map(|x| (x - mx).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, j| ((xs[i] - mx) / sx).powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let c = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .expect("both factors requested");
    // expand p((x - mx)/sx) back to powers of x
    let mut out = vec![0.0; degree + 1];
    for (j, &cj) in c.iter().enumerate() {
        for i in 0..=j {
            let binom = (0..i).fold(1.0, |acc, t| acc * (j - t) as f64 / (t + 1) as f64);
            out[i] += cj * binom * (-mx).powi((j - i) as i32) / sx.powi(j as i32);
        }
    }
    out
}

/// Sampled evidence for membership in RO on `[1, t_max] × [1, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoMembership {
    pub ok: bool,
    /// Smallest `c` with `c⁻¹ ≤ α(λt)/α(t) ≤ c` on the sampled grid.
    pub c_witness: f64,
    /// `(t, λ)` where the ratio is furthest from one.
    pub worst_point: (f64, f64),
}

/// Check the two-sided RO bound on a sampled `(t, λ)` grid. A positive answer
/// is evidence, not a proof.
///
/// Breakpoints of the weight, and their preimages `t_i/λ`, are added to the
/// geometric `t` grid so that jumps are always straddled.
pub fn check_ro_membership(alpha: &RoWeight, b: f64, t_max: f64, grid: usize) -> Result<RoMembership> {
    if !(b > 1.0) {
        return Err(Error::Precondition(format!("b must exceed 1, got {b}")));
    }
    if !(t_max >= 1.0) || grid < 2 {
        return Err(Error::Precondition("need t_max >= 1 and grid >= 2".into()));
    }
    let lambdas: Vec<f64> = (0..grid)
        .map(|j| 1.0 + (b - 1.0) * j as f64 / (grid - 1) as f64)
        .collect();
    let u_max = t_max.ln();
    let mut ts: Vec<f64> = (0..grid)
        .map(|i| (u_max * i as f64 / (grid - 1) as f64).exp())
        .collect();
    for bp in alpha.breakpoints() {
        for &l in &lambdas {
            for cand in [bp / l, bp / l * (1.0 - 1e-12), bp] {
                if (1.0..=t_max).contains(&cand) {
                    ts.push(cand);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let mut worst = (0.0f64, (1.0, 1.0));
    for &t in &ts {
        for &l in &lambdas {
            let lr = alpha.ln_ratio(t, l);
            if !lr.is_finite() {
                return Err(Error::Numeric(format!("ratio at t = {t}, lambda = {l} is not finite")));
            }
            if lr.abs() > worst.0 {
                worst = (lr.abs(), (t, l));
            }
        }
    }
    let c = worst.0.exp();
    Ok(RoMembership {
        ok: c.is_finite(),
        c_witness: c,
        worst_point: worst.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let p = analytic_indices(&RoWeight::power(2.0)).unwrap();
        assert_eq!((p.sigma0, p.sigma1, p.certified), (2.0, 2.0, true));
        let pl = analytic_indices(&RoWeight::power_log(-1.0, vec![3.0])).unwrap();
        assert_eq!((pl.sigma0, pl.sigma1), (-1.0, -1.0));
        let osc = analytic_indices(&RoWeight::oscillating(1.0, 0.5, 0.5).unwrap()).unwrap();
        assert_eq!((osc.sigma0, osc.sigma1), (0.5, 1.5));
    }

    #[test]
    fn oscillating_r_one_has_widened_indices() {
        let osc = analytic_indices(&RoWeight::oscillating(1.0, 0.5, 1.0).unwrap()).unwrap();
        assert!((osc.sigma0 - (1.0 - 0.5 * SQRT_2)).abs() < 1e-15);
        assert!((osc.sigma1 - (1.0 + 0.5 * SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn table_without_tail_is_unsupported() {
        let w = RoWeight::table(vec![(1.0, 1.0), (2.0, 3.0)], None).unwrap();
        assert!(matches!(analytic_indices(&w), Err(Error::Unsupported(_))));
    }

    #[test]
    fn product_is_an_uncertified_bound() {
        let w = RoWeight::product(RoWeight::power(1.0), RoWeight::oscillating(0.0, 0.2, 0.5).unwrap());
        let p = analytic_indices(&w).unwrap();
        assert!(!p.certified);
        assert!((p.sigma0 - 0.8).abs() < 1e-15 && (p.sigma1 - 1.2).abs() < 1e-15);
    }

    #[test]
    fn power_estimate_is_exact() {
        let opts = IndexEstimateOptions {
            t_max: 1e6,
            ..Default::default()
        };
        let est = estimate_indices(&RoWeight::power(2.0), &opts).unwrap();
        assert!((est.pair.sigma0 - 2.0).abs() < 1e-6);
        assert!((est.pair.sigma1 - 2.0).abs() < 1e-6);
        assert!(est.pair.uncertainty <= 1e-6);
        assert!(!est.pair.certified);
    }

    #[test]
    fn estimate_rejects_bad_options() {
        let w = RoWeight::power(1.0);
        let mut opts = IndexEstimateOptions {
            t_max: 10.0,
            ..Default::default()
        };
        assert!(matches!(estimate_indices(&w, &opts), Err(Error::Precondition(_))));
        opts.t_max = 1e6;
        opts.lambda_grid.clear();
        assert!(estimate_indices(&w, &opts).is_err());
    }

    #[test]
    fn constant_weight_membership() {
        let m = check_ro_membership(&RoWeight::power(0.0), 2.0, 1e6, 50).unwrap();
        assert!(m.ok);
        assert_eq!(m.c_witness, 1.0);
    }

    #[test]
    fn jump_is_reported_not_rejected() {
        let w = RoWeight::table(
            vec![(1.0, 1.0), (1000.0, 1.0), (1000.0, 1e6), (1e5, 1e6)],
            Some(0.0),
        )
        .unwrap();
        let m = check_ro_membership(&w, 2.0, 1e6, 60).unwrap();
        assert!(m.ok);
        assert!(m.c_witness >= 1e6 * (1.0 - 1e-9));
        let (t, l) = m.worst_point;
        assert!(t < 1000.0 && t * l >= 1000.0);
    }

    #[test]
    fn oscillating_membership_has_finite_witness() {
        let w = RoWeight::oscillating(0.0, 1.0, 1.0).unwrap();
        let m = check_ro_membership(&w, 2.0, 1e6, 200).unwrap();
        assert!(m.ok && m.c_witness.is_finite() && m.c_witness > 1.0);
    }
}
