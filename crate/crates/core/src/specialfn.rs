//! Principal branch of the Lambert W function and its derivatives.

use crate::error::{Error, Result};
use serde::Serialize;

/// Highest derivative order supported by [`lambert_w0_derivative`].
pub const MAX_DERIVATIVE_ORDER: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WBranchValue {
    pub x: f64,
    pub w: f64,
    /// `|w e^w - x|`
    pub residual: f64,
}

fn seed(x: f64) -> f64 {
    if x < 0.25 {
        x * (1.0 - x * (1.0 - x * (1.5 - x * 8.0 / 3.0)))
    } else if x <= std::f64::consts::E {
        let l = x.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Principal branch `W0(x)` for `x > 0`.
pub fn lambert_w0(x: f64) -> Result<WBranchValue> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w0 requires finite x > 0, got {x}")));
    }
    let mut w = seed(x);
    for _ in 0..64 {
        // Halley step on g(w) = w - x e^{-w}, which avoids overflow of e^w.
        let xe = x * (-w).exp();
        let g = w - xe;
        let wp1 = w + 1.0;
        let step = g / (wp1 - (w + 2.0) * g / (2.0 * wp1));
        let next = w - step;
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs();
        w = next;
        if done {
            break;
        }
    }
    // A final Newton polish on the scaled residual.
    let g = w - x * (-w).exp();
    w -= g / (1.0 + x * (-w).exp());
    let residual = (w * w.exp() - x).abs();
    if !w.is_finite() {
        return Err(Error::NoConvergence(format!("lambert_w0({x})")));
    }
    Ok(WBranchValue { x, w, residual })
}

/// Coefficients (ascending in `W`) of `p_n` in `W^(n)(x) = e^{-nW} p_n(W) / (1+W)^{2n-1}`.
fn derivative_numerator(order: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for n in 1..order {
        let nf = n as f64;
        // p_{n+1} = -(n w + 3n - 1) p_n + (1 + w) p_n'
        let mut next = vec![0.0; p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k] -= (3.0 * nf - 1.0) * c;
            next[k + 1] -= nf * c;
            if k > 0 {
                let d = k as f64 * c;
                next[k - 1] += d;
                next[k] += d;
            }
        }
        p = next;
    }
    p
}

/// The `order`-th derivative of `W0` at `x > 0`, for `1 <= order <= 6`.
pub fn lambert_w0_derivative(x: f64, order: usize) -> Result<f64> {
    if order == 0 || order > MAX_DERIVATIVE_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    let w = lambert_w0(x)?.w;
    let p = derivative_numerator(order);
    let pw = p.iter().rev().fold(0.0, |acc, c| acc * w + c);
    // e^{-W} = W / x, and W / x -> 1 as x -> 0.
    let emw = if x < 1e-300 { 1.0 } else { w / x };
    let n = order as i32;
    Ok(emw.powi(n) * pw / (1.0 + w).powi(2 * n - 1))
}

/// Large-`x` leading behavior `(-1)^{n-1} (n-1)! / x^n` of the derivatives.
pub fn lambert_w0_derivative_asymptote(x: f64, order: usize) -> f64 {
    let fact: f64 = (1..order).map(|k| k as f64).product();
    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
    sign * fact / x.powi(order as i32)
}
