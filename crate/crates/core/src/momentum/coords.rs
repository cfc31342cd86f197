use super::{check_tau, MomentumProfile};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// `r(tau) = int_{tau0}^{tau} dx / phi(x)`, integrated in `log x`.
pub fn radial_log_coordinate(p: &MomentumProfile, tau: f64, tau0: f64) -> Result<f64> {
    check_tau(tau)?;
    check_tau(tau0)?;
    if tau == tau0 {
        return Ok(0.0);
    }
    let g = |u: f64| {
        let x = u.exp();
        x / p.phi(x)
    };
    Ok(integrate(g, tau0.ln(), tau.ln(), QuadOptions::default())?.value)
}

/// Potential `f` with `df/dtau = tau / phi`.
///
/// For `m = 1` the antiderivative `k tau/2 + (1 - k beta) log(tau + 2 beta)` is used
/// as is; otherwise `f(1) = 0` fixes the constant.
pub fn kahler_potential_f(p: &MomentumProfile, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if p.has_closed_form_f() {
        let k = p.bundle_k() as f64;
        let b = p.cone_beta();
        return Ok(k * tau / 2.0 + (1.0 - k * b) * (tau + 2.0 * b).ln());
    }
    let g = |u: f64| {
        let x = u.exp();
        x * x / p.phi(x)
    };
    Ok(integrate(g, 0.0, tau.ln(), QuadOptions::default())?.value)
}

/// Solves `radial_log_coordinate(p, tau, 1) = r` for `tau`.
pub fn invert_radius(p: &MomentumProfile, r: f64) -> Result<f64> {
    if !r.is_finite() {
        return Err(Error::Range(format!("radius {r} is not finite")));
    }
    let big = |u: f64| radial_log_coordinate(p, u.exp(), 1.0);
    // Bracket in u = log tau.
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut f_lo = 0.0;
    let mut f_hi = 0.0;
    while f_lo > r {
        lo -= 2.0;
        if lo < -690.0 {
            return Err(Error::Range(format!(
                "r = {r} lies below the range of the radial coordinate"
            )));
        }
        f_lo = big(lo)?;
    }
    while f_hi < r {
        hi += 2.0;
        if hi > 690.0 {
            return Err(Error::Range(format!(
                "r = {r} lies above the range of the radial coordinate"
            )));
        }
        f_hi = big(hi)?;
    }
    if f_lo == r {
        return Ok(lo.exp());
    }
    if f_hi == r {
        return Ok(hi.exp());
    }
    if lo == hi {
        return Ok(lo.exp());
    }
    // Safeguarded Newton: dr/du = tau / phi(tau).
    let mut u = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fu = big(u)? - r;
        if fu == 0.0 {
            return Ok(u.exp());
        }
        if fu < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let t = u.exp();
        let d = t / p.phi(t);
        let mut next = u - fu / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let converged = (next - u).abs() <= 1e-15 * u.abs().max(1.0);
        u = next;
        if converged || hi - lo <= 1e-15 * u.abs().max(1.0) {
            return Ok(u.exp());
        }
    }
    Err(Error::NoConvergence(format!(
        "invert_radius did not converge for r = {r}"
    )))
}

#[cfg(test)]
mod tests {
    use super::super::{profile_cp1, profile_cpn};
    use super::*;
    use crate::specialfn::lambert_w0;

    fn cp1_closed_r(k: f64, beta: f64, tau: f64) -> f64 {
        if beta == 0.0 {
            k / 2.0 * tau.ln() - 1.0 / tau
        } else {
            tau.ln() / (2.0 * beta) + (k / 2.0 - 1.0 / (2.0 * beta)) * (tau + 2.0 * beta).ln()
        }
    }

    #[test]
    fn empty_integral() {
        let p = profile_cp1(1, 0.0).unwrap();
        assert_eq!(radial_log_coordinate(&p, 3.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn cusp_difference() {
        let p = profile_cp1(1, 0.0).unwrap();
        let r = radial_log_coordinate(&p, 2.0, 1.0).unwrap();
        assert!((r - (0.5 * 2f64.ln() + 0.5)).abs() < 1e-13);
    }

    #[test]
    fn matches_cp1_closed_forms() {
        for k in 1..=3 {
            for &beta in &[0.0, 0.25, 1.0] {
                let p = profile_cp1(k, beta).unwrap();
                for &tau in &[1e-3, 0.3, 4.0, 1e3] {
                    let r = radial_log_coordinate(&p, tau, 1.0).unwrap();
                    let c = cp1_closed_r(k as f64, beta, tau) - cp1_closed_r(k as f64, beta, 1.0);
                    assert!((r - c).abs() < 1e-12 * c.abs().max(1.0), "k={k} beta={beta} tau={tau}");
                }
            }
        }
    }

    #[test]
    fn cpn_radius_approaches_log() {
        // r - (1/2) log(1 + tau) converges with an O(tau^{-2}) tail for n = 3.
        let p = profile_cpn(3, -1).unwrap();
        let d = |t: f64| radial_log_coordinate(&p, t, 1.0).unwrap() - 0.5 * (1.0 + t).ln();
        let (a, b, c) = (d(1e2), d(1e3), d(1e4));
        assert!((b - c).abs() < (a - b).abs() / 50.0);
        assert!((b - c).abs() < 1e-6);
    }

    #[test]
    fn potential_closed_forms() {
        let p = profile_cp1(1, 0.0).unwrap();
        assert!((kahler_potential_f(&p, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let p = profile_cp1(2, 0.0).unwrap();
        let e = std::f64::consts::E;
        assert!((kahler_potential_f(&p, e).unwrap() - (1.0 + e)).abs() < 1e-14);
    }

    #[test]
    fn cpn_potential_expansion() {
        let p = profile_cpn(3, -1).unwrap();
        let d = |t: f64| kahler_potential_f(&p, t).unwrap() - (0.5 * t - 0.5 * (1.0 + t).ln());
        let (a, b, c) = (d(1e1), d(1e2), d(1e3));
        // tail decays like tau^{-1} or faster
        assert!((b - c).abs() < (a - b).abs() / 5.0);
    }

    #[test]
    fn round_trip() {
        let p = profile_cp1(1, 0.0).unwrap();
        let r = radial_log_coordinate(&p, 3.0, 1.0).unwrap();
        assert!((invert_radius(&p, r).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn deep_cusp_matches_lambert() {
        let p = profile_cp1(1, 0.0).unwrap();
        // closed form r = log(tau)/2 - 1/tau equals log|z|^2 / 2; shift by R(1) = -1
        let z_sq: f64 = 1e-8;
        let r = 0.5 * z_sq.ln() + 1.0;
        let tau = invert_radius(&p, r).unwrap();
        let expect = 2.0 / lambert_w0(2.0 / z_sq).unwrap().w;
        assert!((tau - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn monotone_towards_cusp() {
        let p = profile_cp1(2, 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for r in [-1.0, -10.0, -100.0, -1000.0] {
            let t = invert_radius(&p, r).unwrap();
            assert!(t < prev && t > 0.0);
            prev = t;
        }
    }

    #[test]
    fn bounded_range_is_reported() {
        // phi = tau^2 has r bounded above at infinity.
        let p = profile_cp1(1, 0.0).unwrap();
        let sq = MomentumProfile::from_numerator(
            1,
            1,
            p.normalization(),
            &p.numerator().clone()
                + &crate::poly::RatPoly::new(vec![
                    crate::poly::rat(0, 1),
                    crate::poly::rat(0, 1),
                    crate::poly::rat(0, 1),
                    crate::poly::rat(1, 2),
                ]),
        )
        .unwrap();
        assert!(matches!(invert_radius(&sq, 10.0), Err(Error::Range(_))));
    }
}
