//! Momentum profiles on `O(-k) -> CP^m` and the quantities derived from them.
//!
//! A profile is stored as `phi = P / Q` with `P` an exact rational polynomial and
//! `Q(tau) = (1 + kappa tau)^m`, where `kappa` and the base scalar curvature depend
//! on the normalization of the base metric.

mod check;
mod completeness;
mod coords;
mod potential;
mod toda;

pub use check::{check_scalar_flat, log_grid, SfkReport, SfkRow};
pub use completeness::{completeness_report, CompletenessReport, EndDiagnostics};
pub use coords::{invert_radius, kahler_potential_f, radial_log_coordinate};
pub use potential::MomentumPotential;
pub use toda::{resolve_toda_scale, toda_residuals, LeBrunFrame, TodaScaleResolution};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::poly::{rat, rat_from_f64, Poly, RatPoly};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Normalization of the base Kähler metric on `CP^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `omega_M = 2 omega_FS` with `Ric omega_FS = 2 omega_FS` on `CP^1`; `Q = 1 + k tau / 2`.
    Cp1DoubledFs,
    /// `omega_M = omega_FS` with `Ric omega_FS = (m+1) omega_FS`; `Q = (1 + k tau)^m`.
    FubiniStudy,
}

impl Normalization {
    /// Scale `a` of the base metric relative to `omega_FS`.
    pub fn base_scale(self) -> i64 {
        match self {
            Normalization::Cp1DoubledFs => 2,
            Normalization::FubiniStudy => 1,
        }
    }

    /// `kappa` in `omega_M(tau) = (1 + kappa tau) omega_M`, exact.
    pub fn kappa(self, k: u32) -> BigRational {
        rat(k as i64, self.base_scale())
    }
}

/// JSON record of a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub m: usize,
    pub k: u32,
    pub beta: f64,
    pub normalization: Normalization,
}

#[derive(Clone, Debug)]
pub struct MomentumProfile {
    base_dim: usize,
    bundle_k: u32,
    cone_beta: f64,
    normalization: Normalization,
    numerator: RatPoly,
    kappa_exact: BigRational,
    p: Poly,
    q: Poly,
    p2: Poly,
    kappa: f64,
    sigma: f64,
    closed_form_f: bool,
}

fn check_beta(beta: f64) -> Result<BigRational> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "cone parameter beta must lie in [0, 1], got {beta}"
        )));
    }
    rat_from_f64(beta).ok_or_else(|| Error::Domain(format!("beta {beta} is not finite")))
}

/// Scalar-flat numerator `P` with `P(0) = 0`, `P'(0) = 2 beta`, `P'' = 2 sigma (1 + kappa tau)^{m-1}`.
fn scalar_flat_numerator(m: usize, kappa: &BigRational, sigma: &BigRational, beta: &BigRational) -> RatPoly {
    let one = BigRational::from_integer(BigInt::from(1));
    let lin = RatPoly::linear(one.clone(), kappa.clone());
    let mp1 = BigRational::from_integer(BigInt::from(m as i64 + 1));
    // (1 + kappa tau)^{m+1} - 1 - (m+1) kappa tau
    let mut core = lin.pow(m as u32 + 1);
    core = &core - &RatPoly::linear(one, &mp1 * kappa);
    let scale = (BigRational::from_integer(BigInt::from(2)) * sigma)
        / (kappa * kappa * BigRational::from_integer(BigInt::from(m as i64)) * &mp1);
    let cone = RatPoly::linear(BigRational::zero(), beta * BigRational::from_integer(BigInt::from(2)));
    &core.scale(&scale) + &cone
}

impl MomentumProfile {
    /// Builds a profile from its numerator `P = Q phi`.
    pub fn from_numerator(
        base_dim: usize,
        bundle_k: u32,
        normalization: Normalization,
        numerator: RatPoly,
    ) -> Result<Self> {
        if base_dim == 0 {
            return Err(Error::Dimension("base dimension m must be at least 1".into()));
        }
        if bundle_k == 0 {
            return Err(Error::Domain("bundle twist k must be at least 1".into()));
        }
        let kappa_exact = normalization.kappa(bundle_k);
        let sigma = (base_dim * (base_dim + 1)) as f64 / normalization.base_scale() as f64;
        let p = numerator.to_f64();
        let q = RatPoly::linear(BigRational::from_integer(BigInt::from(1)), kappa_exact.clone())
            .pow(base_dim as u32)
            .to_f64();
        let p2 = numerator.derivative().derivative().to_f64();
        let cone_beta = numerator.coeff(1).to_f64().unwrap_or(f64::NAN) / 2.0;
        Ok(MomentumProfile {
            base_dim,
            bundle_k,
            cone_beta,
            normalization,
            kappa: kappa_exact.to_f64().unwrap(),
            kappa_exact,
            numerator,
            p,
            q,
            p2,
            sigma,
            closed_form_f: false,
        })
    }

    /// The scalar-flat profile for base `CP^m` in the given normalization.
    pub fn scalar_flat(base_dim: usize, bundle_k: u32, cone_beta: f64, normalization: Normalization) -> Result<Self> {
        let beta = check_beta(cone_beta)?;
        if bundle_k == 0 {
            return Err(Error::Domain("bundle twist k must be at least 1".into()));
        }
        if base_dim == 0 {
            return Err(Error::Dimension("base dimension m must be at least 1".into()));
        }
        let kappa = normalization.kappa(bundle_k);
        let sigma = rat((base_dim * (base_dim + 1)) as i64, normalization.base_scale());
        let numerator = scalar_flat_numerator(base_dim, &kappa, &sigma, &beta);
        let mut p = MomentumProfile::from_numerator(base_dim, bundle_k, normalization, numerator)?;
        p.closed_form_f = base_dim == 1;
        Ok(p)
    }

    /// Adds `extra(tau)` to `phi`, i.e. `extra * Q` to the numerator.
    pub fn perturbed(&self, extra: &RatPoly) -> Result<Self> {
        let q = RatPoly::linear(BigRational::from_integer(BigInt::from(1)), self.kappa_exact.clone())
            .pow(self.base_dim as u32);
        let numerator = &self.numerator + &(extra * &q);
        MomentumProfile::from_numerator(self.base_dim, self.bundle_k, self.normalization, numerator)
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Complex dimension of the total space.
    pub fn dim(&self) -> usize {
        self.base_dim + 1
    }

    pub fn bundle_k(&self) -> u32 {
        self.bundle_k
    }

    pub fn cone_beta(&self) -> f64 {
        self.cone_beta
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_exact(&self) -> &BigRational {
        &self.kappa_exact
    }

    /// Scale `a` of the base metric.
    pub fn base_scale(&self) -> f64 {
        self.normalization.base_scale() as f64
    }

    pub fn numerator(&self) -> &RatPoly {
        &self.numerator
    }

    pub fn numerator_f64(&self) -> &Poly {
        &self.p
    }

    pub fn q_f64(&self) -> &Poly {
        &self.q
    }

    pub fn has_closed_form_f(&self) -> bool {
        self.closed_form_f
    }

    pub fn record(&self) -> ProfileRecord {
        ProfileRecord {
            m: self.base_dim,
            k: self.bundle_k,
            beta: self.cone_beta,
            normalization: self.normalization,
        }
    }

    pub fn from_record(r: &ProfileRecord) -> Result<Self> {
        MomentumProfile::scalar_flat(r.m, r.k, r.beta, r.normalization)
    }

    pub fn phi(&self, tau: f64) -> f64 {
        self.p.eval(tau) / self.q.eval(tau)
    }

    pub fn phi_jet<const N: usize>(&self, tau: &Jet<N>) -> Jet<N> {
        self.p.eval_jet(tau) / self.q.eval_jet(tau)
    }

    pub fn q(&self, tau: f64) -> f64 {
        self.q.eval(tau)
    }

    /// Scalar curvature of the base metric `omega_M(tau)`.
    pub fn scal_base(&self, tau: f64) -> f64 {
        self.sigma / (1.0 + self.kappa * tau)
    }

    /// Scalar curvature of `omega_M` at `tau = 0`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Scalar curvature of `g_phi` at `tau`, with `d^2/dtau^2 (Q phi)` taken by jets.
    pub fn scalar_curvature_momentum(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let t = Jet::<3>::variable(tau);
        let q = self.q.eval_jet(&t);
        let qphi = q * self.phi_jet(&t);
        Ok(self.scal_base(tau) - qphi.derivative(2) / (2.0 * q.value()))
    }

    /// Same quantity through the symbolic second derivative of the numerator.
    pub fn scalar_curvature_symbolic(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.scal_base(tau) - self.p2.eval(tau) / (2.0 * self.q.eval(tau)))
    }

    /// Exact `2 Q Scal = 2 sigma (1 + kappa tau)^{m-1} - P''`; zero iff scalar-flat.
    pub fn symbolic_defect(&self) -> RatPoly {
        let one = BigRational::from_integer(BigInt::from(1));
        let sigma = rat(
            (self.base_dim * (self.base_dim + 1)) as i64,
            self.normalization.base_scale(),
        );
        let base = RatPoly::linear(one, self.kappa_exact.clone())
            .pow(self.base_dim as u32 - 1)
            .scale(&(sigma * BigRational::from_integer(BigInt::from(2))));
        &base - &self.numerator.derivative().derivative()
    }

    /// `phi = P / Q` as quotient and remainder of exact polynomial division.
    pub fn simplify_phi(&self) -> (RatPoly, RatPoly) {
        let q = RatPoly::linear(BigRational::from_integer(BigInt::from(1)), self.kappa_exact.clone())
            .pow(self.base_dim as u32);
        self.numerator.div_rem(&q)
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!(
            "tau must be a finite positive number, got {tau}"
        )));
    }
    Ok(())
}

/// Conical/cuspidal scalar-flat profile on `O(-k) -> CP^1`, `phi = tau(tau + 2 beta)/(1 + k tau/2)`.
pub fn profile_cp1(k: u32, beta: f64) -> Result<MomentumProfile> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    MomentumProfile::scalar_flat(1, k, beta, Normalization::Cp1DoubledFs)
}

/// Cuspidal scalar-flat profile on `O(bundle_beta) -> CP^{n-1}` with `Ric omega_FS = n omega_FS`.
pub fn profile_cpn(n: usize, bundle_beta: i64) -> Result<MomentumProfile> {
    if n < 3 {
        return Err(Error::Dimension(format!(
            "profile_cpn needs n >= 3 (got {n}); use profile_cp1 for surfaces"
        )));
    }
    if bundle_beta > -1 {
        return Err(Error::Domain(format!(
            "bundle parameter must be a negative integer, got {bundle_beta}"
        )));
    }
    MomentumProfile::scalar_flat(n - 1, (-bundle_beta) as u32, 0.0, Normalization::FubiniStudy)
}

/// Conical member of the higher-dimensional family: `phi(0) = 0`, `phi'(0) = 2 beta`.
pub fn profile_cpn_conical(n: usize, k: u32, beta: f64) -> Result<MomentumProfile> {
    if n < 3 {
        return Err(Error::Dimension(format!("profile_cpn_conical needs n >= 3, got {n}")));
    }
    MomentumProfile::scalar_flat(n - 1, k, beta, Normalization::FubiniStudy)
}

/// `profile_cp1` for `n = 2` and the conical higher-dimensional family for `n >= 3`.
pub fn profile_family(n: usize, k: u32, beta: f64) -> Result<MomentumProfile> {
    match n {
        0 | 1 => Err(Error::Dimension(format!("n must be at least 2, got {n}"))),
        2 => profile_cp1(k, beta),
        _ => profile_cpn_conical(n, k, beta),
    }
}

/// Closed form of the higher-dimensional cusp profile in terms of the bundle parameter.
pub fn cpn_closed_form(n: usize, bundle_beta: f64, tau: f64) -> f64 {
    let u = 1.0 - bundle_beta * tau;
    let nf = n as f64;
    2.0 / (bundle_beta * bundle_beta) * (u + (nf - 1.0) * u.powf(1.0 - nf) - nf * u.powf(2.0 - nf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp1_cusp_value() {
        let p = profile_cp1(1, 0.0).unwrap();
        assert!((p.phi(2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn burns_simanca_is_linear() {
        let p = profile_cp1(1, 1.0).unwrap();
        let (q, r) = p.simplify_phi();
        assert_eq!(q, RatPoly::new(vec![rat(0, 1), rat(2, 1)]));
        assert!(r.is_zero());
    }

    #[test]
    fn cusp_boundary_conditions() {
        let p = profile_cp1(3, 0.0).unwrap();
        let j = p.phi_jet(&Jet::<2>::variable(0.0));
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.derivative(1), 0.0);
        let p = profile_cpn(3, -1).unwrap();
        let j = p.phi_jet(&Jet::<2>::variable(0.0));
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.derivative(1), 0.0);
    }

    #[test]
    fn cone_slope() {
        let p = profile_cpn_conical(4, 2, 0.5).unwrap();
        let j = p.phi_jet(&Jet::<2>::variable(0.0));
        assert!((j.derivative(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cpn_matches_closed_form() {
        for n in 3..=5 {
            for b in [-1i64, -2, -3] {
                let p = profile_cpn(n, b).unwrap();
                for &tau in &[0.1, 1.0, 7.5] {
                    let c = cpn_closed_form(n, b as f64, tau);
                    assert!((p.phi(tau) - c).abs() <= 1e-12 * c.abs(), "n={n} b={b} tau={tau}");
                }
            }
        }
        // n = 4, beta = -1, tau = 1: 2 (2 + 3/8 - 4/4)
        let p = profile_cpn(4, -1).unwrap();
        assert!((p.phi(1.0) - 2.75).abs() < 1e-14);
    }

    #[test]
    fn profiles_are_scalar_flat() {
        for k in 1..=3 {
            for &beta in &[0.0, 0.5, 1.0] {
                for n in 2..=4 {
                    let p = profile_family(n, k, beta).unwrap();
                    assert!(p.symbolic_defect().is_zero());
                    for &tau in &[0.01, 1.0, 100.0] {
                        assert!(p.scalar_curvature_momentum(tau).unwrap().abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn burns_simanca_scalar_curvature_at_five() {
        let p = profile_cp1(1, 1.0).unwrap();
        assert!(p.scalar_curvature_momentum(5.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn perturbation_is_detected() {
        let p = profile_cp1(1, 0.0).unwrap();
        let cubic = RatPoly::new(vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)]);
        let pert = p.perturbed(&cubic).unwrap();
        // Scal = 1/(1+t/2) - (1/(2Q)) (t^2 + t^3 (1 + t/2))'' ; at t = 1: 2/3 - (2 + 6 + 6)/3
        let s = pert.scalar_curvature_momentum(1.0).unwrap();
        assert!((s - (2.0 / 3.0 - 14.0 / 3.0)).abs() < 1e-13);
        assert!(!pert.symbolic_defect().is_zero());
    }

    #[test]
    fn domain_checks() {
        assert!(profile_cp1(0, 0.0).is_err());
        assert!(profile_cp1(1, 1.5).is_err());
        assert!(matches!(profile_cpn(2, -1), Err(Error::Dimension(_))));
        assert!(profile_cpn(3, 0).is_err());
        let p = profile_cp1(1, 0.0).unwrap();
        assert!(matches!(p.scalar_curvature_momentum(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn record_round_trip() {
        let p = profile_cpn_conical(3, 2, 0.5).unwrap();
        let json = serde_json::to_string(&p.record()).unwrap();
        let back: ProfileRecord = serde_json::from_str(&json).unwrap();
        let q = MomentumProfile::from_record(&back).unwrap();
        assert_eq!(q.numerator(), p.numerator());
    }
}
