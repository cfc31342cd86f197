//! Average scalar curvatures of the class `[omega_X] - eps^2 [E]` on the blow-up of a
//! point, in exact rational arithmetic.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub struct KahlerClassData {
    pub n: usize,
    /// `c_1(X) . [omega_X]^{n-1}`.
    pub c1_dot: BigRational,
    /// `[omega_X]^n`.
    pub vol: BigRational,
    pub epsilon: BigRational,
}

impl KahlerClassData {
    pub fn new(n: usize, c1_dot: BigRational, vol: BigRational, epsilon: BigRational) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("n must be at least 2, got {n}")));
        }
        if !vol.is_positive() {
            return Err(Error::Domain(format!("volume must be positive, got {vol}")));
        }
        if epsilon.is_negative() {
            return Err(Error::Domain(format!("epsilon must be non-negative, got {epsilon}")));
        }
        Ok(KahlerClassData {
            n,
            c1_dot,
            vol,
            epsilon,
        })
    }

    pub fn with_epsilon(&self, epsilon: BigRational) -> Result<Self> {
        KahlerClassData::new(self.n, self.c1_dot.clone(), self.vol.clone(), epsilon)
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

/// `n (c1_dot - n eps^{2n-2}) / (vol - eps^{2n})`.
pub fn avg_scalar_solution(d: &KahlerClassData) -> Result<BigRational> {
    let n = d.n;
    let den = &d.vol - pow(&d.epsilon, 2 * n);
    if !den.is_positive() {
        return Err(Error::Inadmissible(format!(
            "vol - eps^(2n) = {den} is not positive for eps = {}",
            d.epsilon
        )));
    }
    let num = &d.c1_dot - int(n as i64) * pow(&d.epsilon, 2 * n - 2);
    Ok(int(n as i64) * num / den)
}

/// `n (n - 1) / eps^2`.
pub fn avg_scalar_divisor(n: usize, epsilon: &BigRational) -> Result<BigRational> {
    if epsilon.is_zero() {
        return Err(Error::DivisionByZero("avg_scalar_divisor at eps = 0".into()));
    }
    let nn = n as i64;
    Ok(int(nn * (nn - 1)) / (epsilon * epsilon))
}

/// `1 / (s_divisor - s_total)`.
pub fn cusp_coefficient_a(s_bar_divisor: &BigRational, s_bar_total: &BigRational) -> Result<BigRational> {
    let gap = s_bar_divisor - s_bar_total;
    if gap.is_zero() {
        return Err(Error::Pole(format!("equal average scalar curvatures {s_bar_divisor}")));
    }
    Ok(BigRational::one() / gap)
}

/// The `lambda_eps` for which `1 / (eps^2 (1/(n(n-1)) - lambda/2)) = 1/a`.
pub fn implied_lambda(n: usize, epsilon: &BigRational, a: &BigRational) -> Result<BigRational> {
    if epsilon.is_zero() {
        return Err(Error::DivisionByZero("implied_lambda at eps = 0".into()));
    }
    let nn = n as i64;
    Ok(int(2) * (BigRational::one() / int(nn * (nn - 1)) - a / (epsilon * epsilon)))
}

#[derive(Clone, Debug, Serialize)]
pub struct TopologyReport {
    pub n: usize,
    pub epsilon: String,
    pub s_sol: String,
    pub s_divisor: String,
    pub a: String,
    pub lambda_eps: String,
}

pub fn topology_report(d: &KahlerClassData) -> Result<TopologyReport> {
    let s_sol = avg_scalar_solution(d)?;
    let s_div = avg_scalar_divisor(d.n, &d.epsilon)?;
    let a = cusp_coefficient_a(&s_div, &s_sol)?;
    let lambda = implied_lambda(d.n, &d.epsilon, &a)?;
    Ok(TopologyReport {
        n: d.n,
        epsilon: d.epsilon.to_string(),
        s_sol: s_sol.to_string(),
        s_divisor: s_div.to_string(),
        a: a.to_string(),
        lambda_eps: lambda.to_string(),
    })
}

/// `avg_scalar_solution` falls strictly along `grid` (sorted increasingly).
pub fn strictly_decreasing_on_grid(d: &KahlerClassData, grid: &[BigRational]) -> Result<bool> {
    let mut eps = grid.to_vec();
    eps.sort();
    let values: Result<Vec<BigRational>> = eps
        .iter()
        .map(|e| avg_scalar_solution(&d.with_epsilon(e.clone())?))
        .collect();
    Ok(values?.windows(2).all(|w| w[1] < w[0]))
}

/// Parses `p/q`, an integer or a decimal like `0.125` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Domain(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::DivisionByZero(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let mut num: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), fp.len());
        return Ok(BigRational::new(num, den));
    }
    Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?))
}
