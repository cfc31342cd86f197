//! Dense univariate polynomials over `f64` and over exact rationals.

use crate::jet::Jet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::ops::{Add, Mul, Sub};

/// Real polynomial, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![0.0])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_jet<const N: usize>(&self, x: &Jet<N>) -> Jet<N> {
        self.coeffs
            .iter()
            .rev()
            .fold(Jet::constant(0.0), |acc, &c| acc * *x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + o.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut c = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

/// Exact rational polynomial, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct RatPoly {
    pub coeffs: Vec<BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        RatPoly { coeffs }
    }

    pub fn constant(c: BigRational) -> Self {
        RatPoly::new(vec![c])
    }

    pub fn zero() -> Self {
        RatPoly::constant(BigRational::zero())
    }

    pub fn one() -> Self {
        RatPoly::constant(BigRational::one())
    }

    /// `a + b x`
    pub fn linear(a: BigRational, b: BigRational) -> Self {
        RatPoly::new(vec![a, b])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigRational {
        self.coeffs.last().unwrap()
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn pow(&self, e: u32) -> RatPoly {
        let mut acc = RatPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn scale(&self, s: &BigRational) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> RatPoly {
        if self.coeffs.len() <= 1 {
            return RatPoly::zero();
        }
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Euclidean division: `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        if self.degree() < dd || self.is_zero() {
            return (RatPoly::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); self.degree() - dd + 1];
        let lead = d.leading().clone();
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lead;
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] = &r[k + j] - &c * dc;
            }
            q[k] = c;
        }
        r.truncate(dd.max(1));
        (RatPoly::new(q), RatPoly::new(r))
    }

    pub fn to_f64(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Human-readable form in the variable `var`.
    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            let coef = if a.is_one() && k > 0 {
                String::new()
            } else {
                format!("{a}")
            };
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let sep = if !coef.is_empty() && !mono.is_empty() { "*" } else { "" };
            parts.push((sign, format!("{coef}{sep}{mono}")));
        }
        let mut out = String::new();
        for (i, (sign, body)) in parts.iter().enumerate() {
            if i == 0 {
                if *sign == "-" {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            out.push_str(body);
        }
        out
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RatPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RatPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, o: &RatPoly) -> RatPoly {
        let mut c = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = &c[i + j] + a * b;
            }
        }
        RatPoly::new(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_jet_agree() {
        let p = Poly::new(vec![1.0, -2.0, 0.5, 3.0]);
        let j = p.eval_jet(&Jet::<4>::variable(1.5));
        assert!((j.value() - p.eval(1.5)).abs() < 1e-14);
        assert!((j.derivative(1) - p.derivative().eval(1.5)).abs() < 1e-13);
        assert!((j.derivative(3) - 18.0).abs() < 1e-13);
    }

    #[test]
    fn exact_division() {
        // (x^2 + 2x) / (1 + x/2) = 2x
        let num = RatPoly::new(vec![rat(0, 1), rat(2, 1), rat(1, 1)]);
        let den = RatPoly::linear(rat(1, 1), rat(1, 2));
        let (q, r) = num.div_rem(&den);
        assert_eq!(q, RatPoly::new(vec![rat(0, 1), rat(2, 1)]));
        assert!(r.is_zero());
    }

    #[test]
    fn division_identity_with_remainder() {
        let num = RatPoly::new(vec![rat(3, 1), rat(-1, 2), rat(0, 1), rat(5, 3)]);
        let den = RatPoly::new(vec![rat(1, 1), rat(2, 1)]);
        let (q, r) = num.div_rem(&den);
        assert_eq!(&(&q * &den) + &r, num);
        assert_eq!(r.degree(), 0);
    }

    #[test]
    fn display_is_readable() {
        let p = RatPoly::new(vec![rat(0, 1), rat(2, 1)]);
        assert_eq!(p.display("t"), "2*t");
        let p = RatPoly::new(vec![rat(-1, 2), rat(0, 1), rat(1, 1)]);
        assert_eq!(p.display("t"), "t^2 - 1/2");
    }
}
