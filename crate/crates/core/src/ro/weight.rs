//! RO-varying weight functions on `[1, ∞)`.
//!
//! Every weight is evaluated in log space: [`RoWeight::ln_eval`] takes
//! `u = ln t` and returns `ln α(t)`, so ratios like `α(λt)/α(t)` stay finite
//! far beyond the range of `f64` powers.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of iterated logarithms in a [`RoWeight::PowerLog`].
///
/// The default switch point for four logs, `e^e^e^e`, is not representable.
pub const MAX_LOG_DEPTH: usize = 3;

/// An RO-varying weight `α : [1, ∞) → (0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoWeight {
    /// `t^s`.
    Power { s: f64 },
    /// `t^s (ln t)^{r₁} (ln ln t)^{r₂} ⋯` for `t ≥ t_switch`, continued by the
    /// constant `α(t_switch)` below the switch point.
    PowerLog {
        s: f64,
        r: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_switch: Option<f64>,
    },
    /// `t^{θ + δ sin((ln ln t)^r)}` for `t > e` and `t^θ` on `[1, e]`.
    Oscillating { theta: f64, delta: f64, r: f64 },
    /// Log-log linear interpolation through `(t, α)` samples. Constant before
    /// the first sample, `α_last (t / t_last)^τ` after the last one (τ = 0
    /// when no tail exponent is declared). Repeated abscissae encode jumps;
    /// the function is right-continuous there.
    PiecewiseTable {
        samples: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_exponent: Option<f64>,
    },
    /// Pointwise product of two weights.
    Product {
        left: Box<RoWeight>,
        right: Box<RoWeight>,
    },
}

/// Smallest `t` at which all `depth` iterated logarithms are at least one.
fn log_tower(depth: usize) -> f64 {
    (0..depth).fold(1.0f64, |acc, _| acc.exp()).max(E)
}

impl RoWeight {
    pub fn power(s: f64) -> Self {
        RoWeight::Power { s }
    }

    /// Power-log weight with the default switch point.
    pub fn power_log(s: f64, r: Vec<f64>) -> Self {
        RoWeight::PowerLog {
            s,
            r,
            t_switch: None,
        }
    }

    pub fn power_log_with_switch(s: f64, r: Vec<f64>, t_switch: f64) -> Result<Self> {
        let w = RoWeight::PowerLog {
            s,
            r,
            t_switch: Some(t_switch),
        };
        w.validate()?;
        Ok(w)
    }

    pub fn oscillating(theta: f64, delta: f64, r: f64) -> Result<Self> {
        let w = RoWeight::Oscillating { theta, delta, r };
        w.validate()?;
        Ok(w)
    }

    pub fn table(samples: Vec<(f64, f64)>, tail_exponent: Option<f64>) -> Result<Self> {
        let w = RoWeight::PiecewiseTable {
            samples,
            tail_exponent,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn product(left: RoWeight, right: RoWeight) -> Self {
        RoWeight::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Check parameter constraints. Deserialized weights should be validated
    /// before use.
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be finite, got {v}")))
            }
        };
        match self {
            RoWeight::Power { s } => finite("s", *s),
            RoWeight::PowerLog { s, r, t_switch } => {
                finite("s", *s)?;
                for &ri in r {
                    finite("r", ri)?;
                }
                if r.len() > MAX_LOG_DEPTH {
                    return Err(Error::Unsupported(format!(
                        "at most {MAX_LOG_DEPTH} iterated logarithms, got {}",
                        r.len()
                    )));
                }
                if let Some(ts) = t_switch {
                    if !(ts.is_finite() && *ts >= E) {
                        return Err(Error::Domain(format!("t_switch must be >= e, got {ts}")));
                    }
                    // every iterated log must be positive at the switch point
                    let mut l = ts.ln();
                    for _ in 1..r.len() {
                        if l <= 1.0 {
                            return Err(Error::Domain(format!(
                                "t_switch = {ts} is too small for {} iterated logarithms",
                                r.len()
                            )));
                        }
                        l = l.ln();
                    }
                }
                Ok(())
            }
            RoWeight::Oscillating { theta, delta, r } => {
                finite("theta", *theta)?;
                if !(delta.is_finite() && *delta > 0.0) {
                    return Err(Error::Domain(format!("delta must be positive, got {delta}")));
                }
                if !(*r > 0.0 && *r <= 1.0) {
                    return Err(Error::Domain(format!("r must lie in (0, 1], got {r}")));
                }
                Ok(())
            }
            RoWeight::PiecewiseTable {
                samples,
                tail_exponent,
            } => {
                if samples.is_empty() {
                    return Err(Error::Domain("table needs at least one sample".into()));
                }
                for (i, &(t, a)) in samples.iter().enumerate() {
                    if !(t.is_finite() && t >= 1.0) {
                        return Err(Error::Domain(format!("sample {i}: t = {t} must be >= 1")));
                    }
                    if !(a.is_finite() && a > 0.0) {
                        return Err(Error::Domain(format!("sample {i}: value {a} must be > 0")));
                    }
                    if i > 0 && t < samples[i - 1].0 {
                        return Err(Error::Domain("table abscissae must be sorted".into()));
                    }
                }
                if let Some(tau) = tail_exponent {
                    finite("tail_exponent", *tau)?;
                }
                Ok(())
            }
            RoWeight::Product { left, right } => {
                left.validate()?;
                right.validate()
            }
        }
    }

    /// Effective switch point of a power-log weight.
    pub fn switch_point(&self) -> Option<f64> {
        match self {
            RoWeight::PowerLog { r, t_switch, .. } => Some(t_switch.unwrap_or(log_tower(r.len()))),
            _ => None,
        }
    }

    /// Points where the closed form changes branch or the table has a knot.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RoWeight::Power { .. } => vec![],
            RoWeight::PowerLog { .. } => vec![self.switch_point().unwrap_or(E)],
            RoWeight::Oscillating { .. } => vec![E],
            RoWeight::PiecewiseTable { samples, .. } => samples.iter().map(|p| p.0).collect(),
            RoWeight::Product { left, right } => {
                let mut v = left.breakpoints();
                v.extend(right.breakpoints());
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
        }
    }

    /// `ln α(e^u)` for `u ≥ 0`.
    pub fn ln_eval(&self, u: f64) -> f64 {
        match self {
            RoWeight::Power { s } => s * u,
            RoWeight::PowerLog { s, r, .. } => {
                let u = u.max(self.switch_point().unwrap_or(E).ln());
                let mut acc = s * u;
                let mut l = u;
                for &ri in r {
                    acc += ri * l.ln();
                    l = l.ln();
                }
                acc
            }
            RoWeight::Oscillating { theta, delta, r } => {
                if u <= 1.0 {
                    theta * u
                } else {
                    (theta + delta * u.ln().powf(*r).sin()) * u
                }
            }
            RoWeight::PiecewiseTable {
                samples,
                tail_exponent,
            } => table_ln_eval(samples, tail_exponent.unwrap_or(0.0), u),
            RoWeight::Product { left, right } => left.ln_eval(u) + right.ln_eval(u),
        }
    }

    /// `α(t)`; `t` must be at least one.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(Error::Domain(format!("weights are defined on [1, ∞), got t = {t}")));
        }
        let v = self.ln_eval(t.ln()).exp();
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Numeric(format!("weight value at t = {t} is not representable")))
        }
    }

    /// `ln(α(λt)/α(t))` for `t, λ ≥ 1`.
    pub fn ln_ratio(&self, t: f64, lambda: f64) -> f64 {
        let u = t.ln();
        self.ln_eval(u + lambda.ln()) - self.ln_eval(u)
    }

    /// The weight `1/α`, when it belongs to one of the supported kinds.
    ///
    /// Oscillating weights have no reciprocal of the same kind since `δ` is
    /// required to be positive.
    pub fn reciprocal(&self) -> Option<RoWeight> {
        Some(match self {
            RoWeight::Power { s } => RoWeight::Power { s: -s },
            RoWeight::PowerLog { s, r, t_switch } => RoWeight::PowerLog {
                s: -s,
                r: r.iter().map(|x| -x).collect(),
                t_switch: Some(t_switch.unwrap_or(log_tower(r.len()))),
            },
            RoWeight::Oscillating { .. } => return None,
            RoWeight::PiecewiseTable {
                samples,
                tail_exponent,
            } => RoWeight::PiecewiseTable {
                samples: samples.iter().map(|&(t, a)| (t, 1.0 / a)).collect(),
                tail_exponent: tail_exponent.map(|x| -x),
            },
            RoWeight::Product { left, right } => {
                RoWeight::product(left.reciprocal()?, right.reciprocal()?)
            }
        })
    }

    /// Exponents `(s, [r₁, r₂, …])` when the weight coincides near infinity
    /// with `t^s (ln t)^{r₁} (ln ln t)^{r₂} ⋯`.
    pub fn power_log_signature(&self) -> Option<(f64, Vec<f64>)> {
        match self {
            RoWeight::Power { s } => Some((*s, vec![])),
            RoWeight::PowerLog { s, r, .. } => Some((*s, r.clone())),
            RoWeight::PiecewiseTable { tail_exponent, .. } => {
                tail_exponent.map(|tau| (tau, vec![]))
            }
            RoWeight::Oscillating { .. } => None,
            RoWeight::Product { left, right } => {
                let (s1, r1) = left.power_log_signature()?;
                let (s2, r2) = right.power_log_signature()?;
                let n = r1.len().max(r2.len());
                let r = (0..n)
                    .map(|i| r1.get(i).copied().unwrap_or(0.0) + r2.get(i).copied().unwrap_or(0.0))
                    .collect();
                Some((s1 + s2, r))
            }
        }
    }

    /// Short human-readable label, used as a key in reports.
    pub fn label(&self) -> String {
        match self {
            RoWeight::Power { s } => format!("power(s={s})"),
            RoWeight::PowerLog { s, r, .. } => {
                let r: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                format!("power_log(s={s};r={})", r.join(","))
            }
            RoWeight::Oscillating { theta, delta, r } => {
                format!("oscillating(theta={theta};delta={delta};r={r})")
            }
            RoWeight::PiecewiseTable { samples, .. } => format!("table(n={})", samples.len()),
            RoWeight::Product { left, right } => format!("{}*{}", left.label(), right.label()),
        }
    }
}

fn table_ln_eval(samples: &[(f64, f64)], tail: f64, u: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if u < first.0.ln() {
        return first.1.ln();
    }
    if u >= last.0.ln() {
        return last.1.ln() + tail * (u - last.0.ln());
    }
    // last index i with ln t_i <= u; right-continuous at repeated abscissae
    let i = samples.partition_point(|p| p.0.ln() <= u) - 1;
    let (t0, a0) = samples[i];
    let (t1, a1) = samples[i + 1];
    let (u0, u1) = (t0.ln(), t1.ln());
    let w = (u - u0) / (u1 - u0);
    a0.ln() * (1.0 - w) + a1.ln() * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_evaluates_exactly() {
        assert!((RoWeight::power(2.0).eval(3.0).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn oscillating_uses_power_branch_below_e() {
        let w = RoWeight::oscillating(1.0, 0.5, 1.0).unwrap();
        assert!((w.eval(2.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn power_log_closed_form() {
        let e2 = E * E;
        let w = RoWeight::power_log_with_switch(1.0, vec![-2.0], e2).unwrap();
        let t = E.powi(4);
        let expected = t / 16.0;
        assert!((w.eval(t).unwrap() - expected).abs() / expected < 1e-13);
        // constant continuation below the switch point
        let below = w.eval(3.0).unwrap();
        assert!((below - w.eval(e2).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn default_switch_points() {
        assert_eq!(RoWeight::power_log(1.0, vec![1.0]).switch_point(), Some(E));
        let two = RoWeight::power_log(1.0, vec![1.0, 1.0]).switch_point().unwrap();
        assert!((two - E.exp()).abs() < 1e-12);
    }

    #[test]
    fn below_one_is_a_domain_error() {
        assert!(matches!(RoWeight::power(1.0).eval(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(RoWeight::oscillating(0.0, -1.0, 1.0).is_err());
        assert!(RoWeight::oscillating(0.0, 1.0, 1.5).is_err());
        assert!(RoWeight::table(vec![(2.0, 1.0), (1.5, 1.0)], None).is_err());
        assert!(RoWeight::table(vec![(2.0, 0.0)], None).is_err());
        assert!(RoWeight::power_log_with_switch(0.0, vec![1.0, 1.0, 1.0], 3.0).is_err());
    }

    #[test]
    fn table_jump_is_right_continuous() {
        let w = RoWeight::table(vec![(1.0, 1.0), (10.0, 1.0), (10.0, 1e6), (100.0, 1e6)], None)
            .unwrap();
        assert!((w.eval(9.999).unwrap() - 1.0).abs() < 1e-9);
        assert!((w.eval(10.0).unwrap() - 1e6).abs() < 1e-3);
        assert!((w.eval(1000.0).unwrap() - 1e6).abs() < 1e-3);
    }

    #[test]
    fn table_interpolates_log_log() {
        let w = RoWeight::table(vec![(1.0, 1.0), (100.0, 1e4)], Some(2.0)).unwrap();
        assert!((w.eval(10.0).unwrap() - 100.0).abs() < 1e-9);
        assert!((w.eval(1000.0).unwrap() - 1e6).abs() < 1e-6);
    }

    #[test]
    fn serde_uses_kind_tag() {
        let w = RoWeight::oscillating(1.0, 0.5, 1.0).unwrap();
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"{"kind":"oscillating","theta":1.0,"delta":0.5,"r":1.0}"#);
        let back: RoWeight = serde_json::from_str(r#"{"kind":"power_log","s":1,"r":[1]}"#).unwrap();
        assert_eq!(back, RoWeight::power_log(1.0, vec![1.0]));
    }
}
