//! Complex Chebyshev series `Σ c_j T_j(y)` on `[-1, 1]`.
//!
//! Radial profiles use `y = 2x - 1` with `x = ρ²`; the helpers here are
//! agnostic of that map except for [`mul_x`].

use std::f64::consts::PI;

use num_complex::Complex64;

pub type Series = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Chebyshev–Radau points `y_j = cos(2πj/(2r-1))`, `j = 0..r`: they include
/// `y = 1` and exclude `y = -1`.
pub fn radau_nodes(r: usize) -> Vec<f64> {
    let n = (2 * r - 1) as f64;
    (0..r).map(|j| (2.0 * PI * j as f64 / n).cos()).collect()
}

/// Interpolating series of degree `< r` through values at [`radau_nodes`].
///
/// The nodes are the distinct values of `cos θ` on `2r-1` equispaced
/// angles, so the coefficients are an exact cosine transform.
pub fn fit_radau(values: &[Complex64]) -> Series {
    let r = values.len();
    if r == 0 {
        return Vec::new();
    }
    let n = (2 * r - 1) as f64;
    (0..r)
        .map(|l| {
            let mut acc = values[0];
            for (j, v) in values.iter().enumerate().skip(1) {
                acc += 2.0 * v * (2.0 * PI * (l * j) as f64 / n).cos();
            }
            acc * if l == 0 { 1.0 / n } else { 2.0 / n }
        })
        .collect()
}

/// Clenshaw evaluation at `y`.
pub fn eval(c: &[Complex64], y: f64) -> Complex64 {
    let (mut b1, mut b2) = (ZERO, ZERO);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * y * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match c.first() {
        Some(&c0) => c0 + y * b1 - b2,
        None => ZERO,
    }
}

/// `d/dy`.
pub fn derivative(c: &[Complex64]) -> Series {
    let n = c.len();
    if n <= 1 {
        return Vec::new();
    }
    let mut d = vec![ZERO; n - 1];
    for k in (0..n - 1).rev() {
        let next = if k + 2 < n - 1 { d[k + 2] } else { ZERO };
        d[k] = next + 2.0 * (k + 1) as f64 * c[k + 1];
    }
    d[0] *= 0.5;
    d
}

/// Antiderivative in `y` vanishing at `y = -1`.
pub fn integral(c: &[Complex64]) -> Series {
    let n = c.len();
    if n == 0 {
        return Vec::new();
    }
    let get = |k: usize| if k < n { c[k] } else { ZERO };
    let mut b = vec![ZERO; n + 1];
    for (k, bk) in b.iter_mut().enumerate().skip(1) {
        let prev = if k == 1 { 2.0 * get(0) } else { get(k - 1) };
        *bk = (prev - get(k + 1)) / (2.0 * k as f64);
    }
    // T_k(-1) = (-1)^k
    let at_minus_one: Complex64 = b
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &bk)| if k % 2 == 0 { bk } else { -bk })
        .sum();
    b[0] = -at_minus_one;
    b
}

/// Multiply by `x = (1 + y)/2`.
pub fn mul_x(c: &[Complex64]) -> Series {
    let n = c.len();
    if n == 0 {
        return Vec::new();
    }
    let mut out = vec![ZERO; n + 1];
    for (k, &ck) in c.iter().enumerate() {
        out[k] += 0.5 * ck;
        // y T_k = (T_{k+1} + T_{|k-1|}) / 2
        out[k + 1] += 0.25 * ck;
        out[k.abs_diff(1)] += 0.25 * ck;
    }
    out
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Series {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Series {
    a.iter().map(|&v| v * s).collect()
}

/// Value at `y = 1`.
pub fn at_one(c: &[Complex64]) -> Complex64 {
    c.iter().sum()
}

/// Drop trailing coefficients that are exactly zero.
pub fn trim(mut c: Series) -> Series {
    while c.last().is_some_and(|v| *v == ZERO) {
        c.pop();
    }
    c
}
