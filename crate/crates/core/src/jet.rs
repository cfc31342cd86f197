//! Truncated Taylor series ("jets") for higher-order forward-mode differentiation.
//!
//! A `Jet<N>` stores the normalized Taylor coefficients `c[k] = f^(k)(x0) / k!`
//! for `k < N`. Arithmetic and the elementary functions use the standard
//! coefficient recurrences, so derivatives are exact up to rounding.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub c: [f64; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        if N > 0 {
            c[0] = v;
        }
        Jet { c }
    }

    /// The independent variable expanded at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        if N > 0 {
            c[0] = x0;
        }
        if N > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn from_coeffs(c: [f64; N]) -> Self {
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k < N, "derivative order {k} exceeds jet length {N}");
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    /// d/dx of the series; the top coefficient becomes unknown and is set to zero.
    pub fn differentiate(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N.saturating_sub(1) {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    /// Antiderivative with constant term `c0`; the top coefficient is dropped.
    pub fn integrate(&self, c0: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = c0;
        for k in 1..N {
            c[k] = self.c[k - 1] / k as f64;
        }
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x *= s;
        }
        Jet { c }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn exp(&self) -> Self {
        let mut e = [0.0; N];
        e[0] = self.c[0].exp();
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    /// `exp(x) - 1` with an accurate constant term.
    pub fn exp_m1(&self) -> Self {
        let mut e = self.exp();
        e.c[0] = self.c[0].exp_m1();
        e
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut l = [0.0; N];
        l[0] = a0.ln();
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * l[j] * self.c[k - j];
            }
            l[k] = (self.c[k] - s / k as f64) / a0;
        }
        Jet { c: l }
    }

    /// `ln(1 + x)` with an accurate constant term.
    pub fn ln_1p(&self) -> Self {
        let mut shifted = *self;
        shifted.c[0] += 1.0;
        let mut l = shifted.ln();
        l.c[0] = self.c[0].ln_1p();
        l
    }

    pub fn powf(&self, r: f64) -> Self {
        let a0 = self.c[0];
        let mut p = [0.0; N];
        p[0] = a0.powf(r);
        for k in 1..N {
            let mut s = 0.0;
            for j in 1..=k {
                s += ((r + 1.0) * j as f64 - k as f64) * self.c[j] * p[k - j];
            }
            p[k] = s / (k as f64 * a0);
        }
        Jet { c: p }
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Jet::constant(1.0);
        }
        let mut base = if n < 0 { self.recip() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Jet::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn sqrt(&self) -> Self {
        let mut r = self.powf(0.5);
        r.c[0] = self.c[0].sqrt();
        r
    }

    /// Composition `g(self)` where `g` is given by its derivatives at `self.value()`.
    pub fn compose(&self, g_derivs: &[f64; N]) -> Self {
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Jet::constant(0.0);
        let mut hp = Jet::constant(1.0);
        let mut fact = 1.0;
        for (k, d) in g_derivs.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
                hp = hp * h;
            }
            out += hp.scale(d / fact);
        }
        out
    }
}

/// Solves the autonomous ODE `y' = f(y)` in Taylor mode around `t0` with `y(t0) = y0`,
/// returning the jet of `y` in `t`.
pub fn taylor_ode<const N: usize, F>(y0: f64, f: F) -> Jet<N>
where
    F: Fn(&Jet<N>) -> Jet<N>,
{
    let mut y = Jet::constant(y0);
    for k in 0..N.saturating_sub(1) {
        let fy = f(&y);
        y.c[k + 1] = fy.c[k] / (k + 1) as f64;
    }
    y
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for k in 0..N {
            self.c[k] += o.c[k];
        }
        self
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for k in 0..N {
            self.c[k] -= o.c[k];
        }
        self
    }
}

impl<const N: usize> SubAssign for Jet<N> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for (i, ci) in c.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..=i {
                s += self.c[j] * o.c[i - j];
            }
            *ci = s;
        }
        Jet { c }
    }
}

impl<const N: usize> MulAssign for Jet<N> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * q[k - j];
            }
            q[k] = s / o.c[0];
        }
        Jet { c: q }
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.c[0] += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.c[0] -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        self.scale(o)
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        self.scale(1.0 / o)
    }
}

impl<const N: usize> Add<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn add(self, o: Jet<N>) -> Jet<N> {
        o + self
    }
}

impl<const N: usize> Sub<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn sub(self, o: Jet<N>) -> Jet<N> {
        -o + self
    }
}

impl<const N: usize> Mul<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn mul(self, o: Jet<N>) -> Jet<N> {
        o.scale(self)
    }
}

impl<const N: usize> Div<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn div(self, o: Jet<N>) -> Jet<N> {
        Jet::constant(self) / o
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_derivatives() {
        let x = Jet::<5>::variable(0.3);
        let e = x.exp();
        for k in 0..5 {
            assert_relative_eq!(e.derivative(k), 0.3f64.exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn ln_inverts_exp() {
        let x = Jet::<6>::from_coeffs([0.7, 1.3, -0.2, 0.5, 0.1, -0.4]);
        let y = x.exp().ln();
        for k in 0..6 {
            assert!((y.c[k] - x.c[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn powf_matches_closed_form() {
        let x = Jet::<4>::variable(2.0);
        let p = x.powf(-1.5);
        assert_relative_eq!(p.derivative(1), -1.5 * 2f64.powf(-2.5), max_relative = 1e-14);
        assert_relative_eq!(p.derivative(2), 3.75 * 2f64.powf(-3.5), max_relative = 1e-14);
        assert_relative_eq!(p.derivative(3), -13.125 * 2f64.powf(-4.5), max_relative = 1e-14);
    }

    #[test]
    fn powi_and_division_agree() {
        let x = Jet::<5>::variable(1.7);
        let a = x.powi(-3);
        let b = 1.0 / (x * x * x);
        for k in 0..5 {
            assert_relative_eq!(a.c[k], b.c[k], max_relative = 1e-13);
        }
    }

    #[test]
    fn ode_reproduces_exponential() {
        let y: Jet<6> = taylor_ode(2.0, |y| *y);
        let mut fact = 1.0;
        for k in 0..6 {
            if k > 0 {
                fact *= k as f64;
            }
            assert_relative_eq!(y.c[k], 2.0 / fact, max_relative = 1e-15);
        }
    }

    #[test]
    fn compose_matches_direct() {
        let x = Jet::<5>::from_coeffs([0.4, 1.0, 0.3, -0.2, 0.05]);
        let v = x.value();
        let direct = x.exp();
        let via = x.compose(&[v.exp(); 5]);
        for k in 0..5 {
            assert_relative_eq!(direct.c[k], via.c[k], max_relative = 1e-14);
        }
    }

    #[test]
    fn expm1_and_ln1p_constant_terms() {
        let x = Jet::<3>::variable(1e-12);
        assert_relative_eq!(x.exp_m1().value(), 1e-12, max_relative = 1e-12);
        assert_relative_eq!(x.ln_1p().value(), 1e-12, max_relative = 1e-12);
    }
}
