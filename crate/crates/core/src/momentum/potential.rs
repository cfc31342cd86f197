//! The metric of a momentum profile written as `i ddbar F(|z|^2)` on `C^n \ {0}`.
//!
//! With `s = log rho` the profile gives `dF/ds = 1 + kappa tau` (after dividing the
//! metric by the base scale) and `dtau/ds = ell phi(tau)`. The additive constant in
//! `s` and the scale of `rho` are fixed so that `F = rho + c log rho + phi2` with
//! `phi2 -> 0` at infinity.

use super::{coords::radial_log_coordinate, MomentumProfile};
use crate::curvature::RadialKahlerPotential;
use crate::error::{Error, Result};
use crate::jet::{taylor_ode, Jet};
use crate::poly::{Poly, RatPoly};
use crate::quad::{integrate, QuadOptions};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::cell::RefCell;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AeConstants {
    /// `phi(tau) ~ (tau + b) / ell` at infinity.
    pub ell: f64,
    pub b: f64,
    pub kappa: f64,
    /// Coefficient `c` of `log rho` at the Euclidean end.
    pub log_coefficient: f64,
    /// Base scale the metric was divided by.
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct MomentumPotential {
    profile: MomentumProfile,
    consts: AeConstants,
    /// `D = Q (sigma + b) - ell P`, so that `1/phi - ell/(sigma + b) = D / (P (sigma + b))`.
    d_poly: Poly,
    /// `t^deg X(1/t)` for `P`, `Q` and `D`, with `deg D` padded to `deg Q - 1`.
    p_rev: Poly,
    q_rev: Poly,
    d_rev: Poly,
    tau_split: f64,
    log_rho_split: f64,
    f_split: f64,
}

fn reversed(p: &RatPoly, degree: usize) -> Poly {
    let mut c: Vec<f64> = (0..=degree).map(|k| p.coeff(k).to_f64().unwrap()).collect();
    c.reverse();
    Poly::new(c)
}

fn ratio(a: &BigRational, b: &BigRational) -> BigRational {
    a / b
}

impl MomentumPotential {
    pub fn new(profile: &MomentumProfile) -> Result<Self> {
        let p = profile.numerator().clone();
        let one = BigRational::one();
        let q = RatPoly::linear(one.clone(), profile.kappa_exact().clone()).pow(profile.base_dim() as u32);
        if p.degree() != q.degree() + 1 || !p.leading().is_positive() {
            return Err(Error::Precondition(
                "profile must grow linearly at infinity for a Euclidean end".into(),
            ));
        }
        let d = q.degree();
        let ell = ratio(q.leading(), p.leading());
        let b = -(ratio(&q.coeff(d - 1), q.leading()) - ratio(&p.coeff(d), p.leading()));
        let shifted = &q * &RatPoly::linear(b.clone(), one.clone());
        let d_exact = &shifted - &p.scale(&ell);
        debug_assert!(d_exact.coeff(d + 1).is_zero() && d_exact.coeff(d).is_zero());
        let kappa = profile.kappa_exact().clone();
        let c_log = &one - &kappa * &b;
        let consts = AeConstants {
            ell: ell.to_f64().unwrap(),
            b: b.to_f64().unwrap(),
            kappa: kappa.to_f64().unwrap(),
            log_coefficient: c_log.to_f64().unwrap(),
            scale: profile.base_scale(),
        };
        let tau_split = 1.0 + 2.0 * consts.b.abs();
        let mut pot = MomentumPotential {
            profile: profile.clone(),
            consts,
            d_poly: d_exact.to_f64(),
            p_rev: reversed(&p, d + 1),
            q_rev: reversed(&q, d),
            d_rev: reversed(&d_exact, d.saturating_sub(1)),
            tau_split,
            log_rho_split: 0.0,
            f_split: 0.0,
        };
        pot.log_rho_split = pot.log_rho_far(tau_split)?;
        let rho = pot.log_rho_split.exp();
        pot.f_split = rho + pot.consts.log_coefficient * pot.log_rho_split + pot.phi2_far(tau_split)?;
        Ok(pot)
    }

    pub fn profile(&self) -> &MomentumProfile {
        &self.profile
    }

    pub fn constants(&self) -> AeConstants {
        self.consts
    }

    pub fn tau_split(&self) -> f64 {
        self.tau_split
    }

    fn g_jet<const N: usize>(&self, sigma: &Jet<N>) -> Jet<N> {
        let p = self.profile.numerator_f64().eval_jet(sigma);
        self.d_poly.eval_jet(sigma) / (p * (*sigma + self.consts.b))
    }

    /// `g(1/t) / t^2` in the inverted variable `t = 1/sigma`, as a rational function of `t`.
    fn g_inverted(&self, t: f64) -> f64 {
        t * self.d_rev.eval(t) / (self.p_rev.eval(t) * (1.0 + self.consts.b * t))
    }

    fn delta_inverted(&self, t: f64) -> Result<f64> {
        // Only a relative tolerance: the tail is single-signed and tiny far out.
        let opts = QuadOptions {
            abs_tol: 0.0,
            ..Default::default()
        };
        Ok(-integrate(|u| self.g_inverted(u), 0.0, t, opts)?.value / self.consts.ell)
    }

    /// `delta(tau) = log rho - log(kappa (tau + b))` for `tau >= tau_split`.
    pub fn delta(&self, tau: f64) -> Result<f64> {
        self.delta_inverted(1.0 / tau)
    }

    fn log_rho_far(&self, tau: f64) -> Result<f64> {
        Ok(self.consts.kappa.ln() + (tau + self.consts.b).ln() + self.delta(tau)?)
    }

    /// `phi2` at the Euclidean end, from `dphi2/ds = -kappa (tau + b) expm1(delta)`.
    fn phi2_far(&self, tau: f64) -> Result<f64> {
        let c = &self.consts;
        let err = RefCell::new(None);
        let h = |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            match self.delta_inverted(t) {
                Ok(d) => {
                    c.kappa * (1.0 + c.b * t) * self.q_rev.eval(t) * d.exp_m1() / (c.ell * self.p_rev.eval(t) * t * t)
                }
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    0.0
                }
            }
        };
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            ..Default::default()
        };
        let v = integrate(h, 0.0, 1.0 / tau, opts)?.value;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(v)
    }

    /// `s = log rho` at momentum `tau`.
    pub fn log_rho(&self, tau: f64) -> Result<f64> {
        super::check_tau(tau)?;
        if tau >= self.tau_split {
            self.log_rho_far(tau)
        } else {
            Ok(self.log_rho_split + radial_log_coordinate(&self.profile, tau, self.tau_split)? / self.consts.ell)
        }
    }

    /// `F` at momentum `tau`.
    pub fn potential_at_tau(&self, tau: f64) -> Result<f64> {
        super::check_tau(tau)?;
        if tau >= self.tau_split {
            let s = self.log_rho_far(tau)?;
            return Ok(s.exp() + self.consts.log_coefficient * s + self.phi2_far(tau)?);
        }
        let c = &self.consts;
        let h = |u: f64| {
            let x = u.exp();
            x * (1.0 + c.kappa * x) / (c.ell * self.profile.phi(x))
        };
        let tail = integrate(h, tau.ln(), self.tau_split.ln(), QuadOptions::default())?.value;
        Ok(self.f_split - tail)
    }

    /// Remainder `phi2 = F - rho - c log rho` at momentum `tau`.
    pub fn phi2_at_tau(&self, tau: f64) -> Result<f64> {
        super::check_tau(tau)?;
        if tau >= self.tau_split {
            self.phi2_far(tau)
        } else {
            let s = self.log_rho(tau)?;
            Ok(self.potential_at_tau(tau)? - s.exp() - self.consts.log_coefficient * s)
        }
    }

    /// `dphi2/ds = -kappa (tau + b) expm1(delta)` at momentum `tau`.
    pub fn phi2_s_at_tau(&self, tau: f64) -> Result<f64> {
        super::check_tau(tau)?;
        if tau >= self.tau_split {
            let c = &self.consts;
            Ok(-c.kappa * (tau + c.b) * self.delta(tau)?.exp_m1())
        } else {
            let s = self.log_rho(tau)?;
            Ok(1.0 + self.consts.kappa * tau - s.exp() - self.consts.log_coefficient)
        }
    }

    /// Jet of `tau` in `s` around the point with momentum `tau`.
    pub fn tau_jet<const N: usize>(&self, tau: f64) -> Jet<N> {
        let ell = self.consts.ell;
        taylor_ode(tau, |t: &Jet<N>| self.profile.phi_jet(t).scale(ell))
    }

    /// `(s, jet of dF/ds in s)` at momentum `tau`.
    pub fn jet_at_tau(&self, tau: f64) -> Result<(f64, Jet<4>)> {
        let s = self.log_rho(tau)?;
        let t = self.tau_jet::<4>(tau);
        Ok((s, t.scale(self.consts.kappa) + 1.0))
    }

    /// `(s, jet of phi2 in s)` at momentum `tau`.
    pub fn phi2_jet_at_tau(&self, tau: f64) -> Result<(f64, Jet<6>)> {
        let s = self.log_rho(tau)?;
        let c = self.consts;
        let t = self.tau_jet::<6>(tau);
        if tau >= self.tau_split {
            let dsdt = self.g_jet(&t) * self.profile.phi_jet(&t);
            let delta = dsdt.integrate(self.delta(tau)?);
            let d_phi2 = -((t + c.b).scale(c.kappa) * delta.exp_m1());
            Ok((s, d_phi2.integrate(self.phi2_far(tau)?)))
        } else {
            let rho = Jet::<6>::variable(s).exp();
            let fs = t.scale(c.kappa) + 1.0;
            let d_phi2 = fs - rho - c.log_coefficient;
            Ok((s, d_phi2.integrate(self.phi2_at_tau(tau)?)))
        }
    }

    /// Momentum `tau` at `s = log rho`.
    pub fn tau_at_log_rho(&self, s: f64) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::Range(format!("log rho = {s} is not finite")));
        }
        let f = |u: f64| self.log_rho(u.exp()).map(|v| v - s);
        let ell = self.consts.ell;
        let slope = |u: f64| {
            let t = u.exp();
            t / (ell * self.profile.phi(t))
        };
        // Initial guess from the two ends.
        let mut u = if s > 2.0 {
            ((s.exp() / self.consts.kappa).max(self.tau_split)).ln()
        } else if s < -2.0 {
            (1.0 / (ell * self.profile.sigma() * (-s)))
                .max(1e-300)
                .ln()
                .min(self.tau_split.ln())
        } else {
            0.0
        };
        let (mut lo, mut hi) = (u, u);
        let mut f_lo = f(lo)?;
        let mut f_hi = f_lo;
        let mut step = 1.0;
        while f_lo > 0.0 {
            lo -= step;
            step *= 2.0;
            if lo < -700.0 {
                return Err(Error::Range(format!("log rho = {s} is beyond the cusp range")));
            }
            f_lo = f(lo)?;
        }
        step = 1.0;
        while f_hi < 0.0 {
            hi += step;
            step *= 2.0;
            if hi > 700.0 {
                return Err(Error::Range(format!("log rho = {s} is beyond the Euclidean range")));
            }
            f_hi = f(hi)?;
        }
        if f_lo == 0.0 {
            return Ok(lo.exp());
        }
        if f_hi == 0.0 {
            return Ok(hi.exp());
        }
        u = u.clamp(lo, hi);
        for _ in 0..200 {
            let fu = f(u)?;
            if fu == 0.0 {
                return Ok(u.exp());
            }
            if fu < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let mut next = u - fu / slope(u);
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let done = (next - u).abs() <= 2e-16 * u.abs().max(1.0) || hi - lo <= 2e-16 * u.abs().max(1.0);
            u = next;
            if done {
                return Ok(u.exp());
            }
        }
        Err(Error::NoConvergence(format!("tau_at_log_rho({s})")))
    }
}

impl RadialKahlerPotential for MomentumPotential {
    fn dim(&self) -> usize {
        self.profile.dim()
    }

    fn momentum_jet(&self, s: f64) -> Result<Jet<4>> {
        let tau = self.tau_at_log_rho(s)?;
        Ok(self.tau_jet::<4>(tau).scale(self.consts.kappa) + 1.0)
    }

    fn potential(&self, s: f64) -> Result<f64> {
        self.potential_at_tau(self.tau_at_log_rho(s)?)
    }

    fn log_coefficient(&self) -> f64 {
        self.consts.log_coefficient
    }
}

/// `b` for the conical `CP^1` family: `-2 (1 - k beta) / k`.
#[cfg(test)]
fn cp1_shift(k: u32, beta: f64) -> f64 {
    -2.0 * (1.0 - k as f64 * beta) / k as f64
}

#[cfg(test)]
mod tests {
    use super::super::{profile_cp1, profile_cpn};
    use super::*;
    use num_bigint::BigInt;

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn constants_cp1() {
        for k in 1..=3u32 {
            for &beta in &[0.0, 0.5, 1.0] {
                let pot = MomentumPotential::new(&profile_cp1(k, beta).unwrap()).unwrap();
                let c = pot.constants();
                assert!((c.ell - k as f64 / 2.0).abs() < 1e-15);
                assert!((c.b - cp1_shift(k, beta)).abs() < 1e-15);
                assert!((c.log_coefficient - (2.0 - k as f64 * beta)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_cpn() {
        for n in 3..=5 {
            for k in 1..=3i64 {
                let pot = MomentumPotential::new(&profile_cpn(n, -k).unwrap()).unwrap();
                let c = pot.constants();
                assert!((c.b - 1.0 / k as f64).abs() < 1e-15);
                assert!(c.log_coefficient.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn log_rho_is_continuous_across_split() {
        let pot = MomentumPotential::new(&profile_cp1(1, 0.0).unwrap()).unwrap();
        let t = pot.tau_split();
        let a = pot.log_rho(t * (1.0 - 1e-9)).unwrap();
        let b = pot.log_rho(t * (1.0 + 1e-9)).unwrap();
        assert!((a - b).abs() < 1e-8);
        let fa = pot.potential_at_tau(t * (1.0 - 1e-9)).unwrap();
        let fb = pot.potential_at_tau(t * (1.0 + 1e-9)).unwrap();
        assert!((fa - fb).abs() < 1e-7);
    }

    #[test]
    fn potential_derivative_matches_momentum() {
        // dF/ds = 1 + kappa tau, checked by differencing F against s.
        let pot = MomentumPotential::new(&profile_cpn(3, -1).unwrap()).unwrap();
        for &tau in &[0.2, 2.0, 20.0] {
            let h = 1e-5 * tau;
            let (f1, f2) = (
                pot.potential_at_tau(tau - h).unwrap(),
                pot.potential_at_tau(tau + h).unwrap(),
            );
            let (s1, s2) = (pot.log_rho(tau - h).unwrap(), pot.log_rho(tau + h).unwrap());
            let fs = (f2 - f1) / (s2 - s1);
            let expect = 1.0 + pot.constants().kappa * tau;
            assert!((fs - expect).abs() < 1e-6 * expect, "tau={tau}: {fs} vs {expect}");
        }
    }

    #[test]
    fn inversion_round_trip() {
        let pot = MomentumPotential::new(&profile_cp1(2, 0.5).unwrap()).unwrap();
        for &tau in &[1e-3, 0.5, 7.0, 1e4] {
            let s = pot.log_rho(tau).unwrap();
            let back = pot.tau_at_log_rho(s).unwrap();
            assert!((back - tau).abs() < 1e-10 * tau, "{tau} -> {s} -> {back}");
        }
    }

    #[test]
    fn phi2_jet_consistent_with_values() {
        let pot = MomentumPotential::new(&profile_cp1(1, 0.0).unwrap()).unwrap();
        let tau = 40.0;
        let (s, j) = pot.phi2_jet_at_tau(tau).unwrap();
        assert!((j.value() - pot.phi2_at_tau(tau).unwrap()).abs() < 1e-14);
        assert!((j.derivative(1) - pot.phi2_s_at_tau(tau).unwrap()).abs() < 1e-14);
        let h = 1e-3;
        let ta = pot.tau_at_log_rho(s + h).unwrap();
        let tb = pot.tau_at_log_rho(s - h).unwrap();
        let fd = (pot.phi2_at_tau(ta).unwrap() - pot.phi2_at_tau(tb).unwrap()) / (2.0 * h);
        assert!(
            (fd - j.derivative(1)).abs() < 1e-6 * j.derivative(1).abs(),
            "{fd} vs {}",
            j.derivative(1)
        );
    }

    #[test]
    fn rejects_profile_without_euclidean_end() {
        let base = profile_cp1(1, 0.0).unwrap();
        let extra = RatPoly::new(vec![int(0), int(0), int(0), int(1)]);
        let p = base.perturbed(&extra).unwrap();
        assert!(matches!(MomentumPotential::new(&p), Err(Error::Precondition(_))));
    }
}
