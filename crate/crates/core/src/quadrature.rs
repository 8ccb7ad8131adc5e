//! Gauss-Legendre rules on `[0, 1]` and a panel-adaptive integrator.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

/// Nodes and weights of an `n`-point Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnitRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Cached `n`-point rule on `[0, 1]`; exact for polynomials of degree `2n - 1`.
pub fn unit_rule(n: usize) -> Arc<UnitRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<UnitRule>>>> = OnceLock::new();
    let n = n.max(2);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(n).expect("n >= 2");
            let mut pairs: Vec<(f64, f64)> = rule
                .as_node_weight_pairs()
                .iter()
                .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(UnitRule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            })
        })
        .clone()
}

/// Integrate `f` over `[a, b]` using `points`-point Gauss-Legendre panels,
/// bisecting a panel until its value agrees with the sum over its halves.
///
/// Returns `None` if the integrand produced a non-finite value.
pub fn adaptive_integrate<F>(f: F, a: f64, b: f64, points: usize, rel_tol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let rule = unit_rule(points);
    let panel = |lo: f64, hi: f64| -> f64 {
        let h = hi - lo;
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * f(lo + h * x))
            .sum::<f64>()
            * h
    };

    const MAX_DEPTH: u32 = 40;
    let mut total = 0.0;
    let mut stack = vec![(a, b, panel(a, b), 0u32)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        let refined = left + right;
        if !refined.is_finite() {
            return None;
        }
        let err = (refined - whole).abs();
        if depth >= MAX_DEPTH || err <= rel_tol * refined.abs().max(f64::MIN_POSITIVE) {
            total += refined;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Some(total)
}
