//! Fits of the expansion of momentum metrics at the Euclidean end and at the cusp.

use crate::curvature::RadialKahlerPotential;
use crate::error::{Error, Result};
use crate::momentum::{MomentumPotential, MomentumProfile};
use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// Minimum accepted coefficient of determination.
pub const MIN_R_SQUARED: f64 = 0.999;
/// Allowed exponent drift when the window moves by one dyadic step.
pub const WINDOW_STABILITY: f64 = 0.02;

/// `y ~ coefficient * x^exponent` over `window` (radii in `|z|`).
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// `1 / (dF/ds - 1) = (a + L) / c + gamma log L` with `L = -log |z|^2`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct CuspFit {
    /// Coefficient `c` of `-log(a - log |z|^2)`.
    pub coefficient: f64,
    pub a: f64,
    pub gamma: f64,
    pub r_squared: f64,
    /// Depth window in `L = -log |z|^2`.
    pub window: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub n: usize,
    pub k: u32,
    pub end: String,
    pub exponent: f64,
    pub coefficient: f64,
    pub r2: f64,
    pub window: (f64, f64),
}

impl FitReport {
    pub fn ae(n: usize, k: u32, fit: &PowerFit) -> Self {
        FitReport {
            n,
            k,
            end: "ae".into(),
            exponent: fit.exponent,
            coefficient: fit.coefficient,
            r2: fit.r_squared,
            window: fit.window,
        }
    }

    /// The cusp fit reported as the coefficient of `-log(a - log |z|^2)`; the exponent slot is unused.
    pub fn cusp(n: usize, k: u32, fit: &CuspFit) -> Self {
        FitReport {
            n,
            k,
            end: "cusp".into(),
            exponent: 0.0,
            coefficient: fit.coefficient,
            r2: fit.r_squared,
            window: fit.window,
        }
    }
}

/// Default window in `rho = |z|^2` for the Euclidean end.
pub const DEFAULT_AE_WINDOW: (f64, f64) = (1e3, 1e5);
/// Default window in `L = -log |z|^2` for the cusp.
pub const DEFAULT_CUSP_WINDOW: (f64, f64) = (1e2, 1e5);

/// Decay exponent of `phi2` in `|z|`: `-2` on surfaces and `4 - 2n` above.
pub fn expected_ae_exponent(n: usize) -> f64 {
    if n == 2 {
        -2.0
    } else {
        4.0 - 2.0 * n as f64
    }
}

/// Cusp coefficient `2 kappa / (ell P''(0))` read off a cusp profile (`P(0) = P'(0) = 0`).
pub fn cusp_coefficient_from_profile(p: &MomentumProfile) -> Result<f64> {
    let num = p.numerator();
    if !(num.coeff(0).is_zero() && num.coeff(1).is_zero()) {
        return Err(Error::Precondition("profile has no cusp at tau = 0".into()));
    }
    let p2 = 2.0 * num.coeff(2).to_f64().unwrap();
    let pot = MomentumPotential::new(p)?;
    let c = pot.constants();
    Ok(2.0 * c.kappa / (c.ell * p2))
}

fn r_squared(y: &[f64], fitted: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(fitted).map(|(a, b)| (a - b).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    let k = rows[0].len();
    if m < k + 1 {
        return Err(Error::Precondition(format!("need more than {k} samples, got {m}")));
    }
    let a = DMatrix::from_fn(m, k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Precondition(format!("least squares failed: {e}")))?;
    let fitted = &a * &x;
    let r2 = r_squared(y, fitted.as_slice());
    Ok((x.iter().copied().collect(), r2))
}

/// Log-log least squares of `|y|` against `x`; the coefficient carries the sign of `y`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Precondition(
            "power-law fit needs at least 3 paired samples".into(),
        ));
    }
    let sign = if y.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![1.0, v.ln()]).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("power-law fit needs non-zero samples".into()));
    }
    let (c, r2) = least_squares(&rows, &ly)?;
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PowerFit {
        exponent: c[1],
        coefficient: sign * c[0].exp(),
        r_squared: r2,
        window: (lo, hi),
    })
}

fn accept(fit: PowerFit, what: &str) -> Result<PowerFit> {
    if fit.r_squared < MIN_R_SQUARED || !fit.exponent.is_finite() {
        return Err(Error::FitQuality {
            r_squared: fit.r_squared,
            lo: fit.window.0,
            hi: fit.window.1,
            detail: format!("{what}: exponent {:.4}", fit.exponent),
        });
    }
    Ok(fit)
}

/// Dyadic sample radii `rho_min * 2^j <= rho_max`.
pub fn dyadic_grid(lo: f64, hi: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut r = lo;
    while r <= hi * (1.0 + 1e-12) {
        v.push(r);
        r *= 2.0;
    }
    v
}

fn check_ae_window(w: (f64, f64)) -> Result<()> {
    if !(w.0 >= 1e2 && w.1 > 4.0 * w.0 && w.1.is_finite()) {
        return Err(Error::Precondition(format!(
            "AE window must satisfy 1e2 <= rho_min and rho_max >= 4 rho_min, got {w:?}"
        )));
    }
    Ok(())
}

fn ae_samples(pot: &MomentumPotential, rho_window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let rhos = dyadic_grid(rho_window.0, rho_window.1);
    let vals: Result<Vec<(f64, f64)>> = rhos
        .par_iter()
        .map(|&rho| {
            let tau = pot.tau_at_log_rho(rho.ln())?;
            Ok((rho.sqrt(), pot.phi2_at_tau(tau)?))
        })
        .collect();
    Ok(vals?.into_iter().unzip())
}

/// Decay of `phi2 = F - |z|^2 - c log |z|^2` at the Euclidean end, in powers of `|z|`.
///
/// `radius_window` is a window in `rho = |z|^2`.
pub fn fit_ae_remainder(p: &MomentumProfile, radius_window: (f64, f64)) -> Result<PowerFit> {
    check_ae_window(radius_window)?;
    let pot = MomentumPotential::new(p)?;
    let (z, y) = ae_samples(&pot, radius_window)?;
    accept(fit_power_law(&z, &y)?, "AE remainder")
}

/// Same fit for an arbitrary potential with leading part `rho + c log rho`.
pub fn fit_ae_remainder_potential<P: RadialKahlerPotential + ?Sized>(
    p: &P,
    log_coefficient: f64,
    radius_window: (f64, f64),
) -> Result<PowerFit> {
    check_ae_window(radius_window)?;
    let rhos = dyadic_grid(radius_window.0, radius_window.1);
    let mut z = Vec::new();
    let mut y = Vec::new();
    for rho in rhos {
        let s = rho.ln();
        z.push(rho.sqrt());
        y.push(p.potential(s)? - rho - log_coefficient * s);
    }
    accept(fit_power_law(&z, &y)?, "AE remainder")
}

/// Largest exponent change when the window is shifted one dyadic step either way.
pub fn ae_window_drift(p: &MomentumProfile, radius_window: (f64, f64)) -> Result<f64> {
    let base = fit_ae_remainder(p, radius_window)?;
    let up = fit_ae_remainder(p, (radius_window.0 * 2.0, radius_window.1 * 2.0))?;
    let down = fit_ae_remainder(p, (radius_window.0 / 2.0, radius_window.1 / 2.0))?;
    Ok((up.exponent - base.exponent)
        .abs()
        .max((down.exponent - base.exponent).abs()))
}

/// Fits the remainder left after removing the leading AE term.
///
/// The leading exponent is snapped to the nearest even integer, its coefficient is
/// taken as the extrapolated limit of `phi2 |z|^{-p}` at `far_rho`, and the
/// difference is fitted on `radius_window`.
pub fn fit_ae_next_order(p: &MomentumProfile, radius_window: (f64, f64), far_rho: f64) -> Result<(PowerFit, PowerFit)> {
    check_ae_window(radius_window)?;
    let pot = MomentumPotential::new(p)?;
    let lead = fit_ae_remainder(p, radius_window)?;
    let q = 2.0 * (lead.exponent / 2.0).round();
    let scaled = |rho: f64| -> Result<f64> {
        let tau = pot.tau_at_log_rho(rho.ln())?;
        Ok(pot.phi2_at_tau(tau)? * rho.powf(-q / 2.0))
    };
    // Richardson on a 1/rho correction.
    let d = 2.0 * scaled(2.0 * far_rho)? - scaled(far_rho)?;
    let (z, y) = ae_samples(&pot, radius_window)?;
    let rest: Vec<f64> = z.iter().zip(&y).map(|(zz, yy)| yy - d * zz.powf(q)).collect();
    let next = accept(fit_power_law(&z, &rest)?, "AE next order")?;
    Ok((
        PowerFit {
            exponent: q,
            coefficient: d,
            r_squared: lead.r_squared,
            window: lead.window,
        },
        next,
    ))
}

fn cusp_fit_from_samples(l: &[f64], y: &[f64], window: (f64, f64)) -> Result<CuspFit> {
    let rows: Vec<Vec<f64>> = l.iter().map(|v| vec![1.0, *v, v.ln()]).collect();
    let (c, r2) = least_squares(&rows, y)?;
    let coefficient = 1.0 / c[1];
    let fit = CuspFit {
        coefficient,
        a: c[0] * coefficient,
        gamma: c[2],
        r_squared: r2,
        window,
    };
    if r2 < MIN_R_SQUARED || !coefficient.is_finite() {
        return Err(Error::FitQuality {
            r_squared: r2,
            lo: window.0,
            hi: window.1,
            detail: format!("cusp coefficient {coefficient:.5}"),
        });
    }
    Ok(fit)
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn check_depth(w: (f64, f64)) -> Result<()> {
    // |z|^2 <= 1e-6 means L >= 6 log 10.
    if !(w.0 >= 6.0 * std::f64::consts::LN_10 && w.1 > w.0 && w.1.is_finite()) {
        return Err(Error::Precondition(format!(
            "depth window must lie in L = -log|z|^2 >= 13.8 with L_max > L_min, got {w:?}"
        )));
    }
    Ok(())
}

/// Coefficient of `-log(a - log |z|^2)` in the potential near the cusp.
///
/// `depth_window` is a window in `L = -log |z|^2`.
pub fn fit_cusp_coefficient(p: &MomentumProfile, depth_window: (f64, f64)) -> Result<CuspFit> {
    check_depth(depth_window)?;
    let pot = MomentumPotential::new(p)?;
    let kappa = pot.constants().kappa;
    let ls = log_grid(depth_window.0, depth_window.1, 24);
    let ys: Result<Vec<f64>> = ls
        .par_iter()
        .map(|&l| Ok(1.0 / (kappa * pot.tau_at_log_rho(-l)?)))
        .collect();
    cusp_fit_from_samples(&ls, &ys?, depth_window)
}

/// Cusp fit for an arbitrary potential whose leading cusp term is `leading * log rho`.
pub fn fit_cusp_coefficient_potential<P: RadialKahlerPotential + ?Sized>(
    p: &P,
    leading: f64,
    depth_window: (f64, f64),
) -> Result<CuspFit> {
    check_depth(depth_window)?;
    let ls = log_grid(depth_window.0, depth_window.1, 24);
    let mut ys = Vec::with_capacity(ls.len());
    for &l in &ls {
        let x = p.momentum_jet(-l)?.value();
        ys.push(1.0 / (x / leading - 1.0));
    }
    cusp_fit_from_samples(&ls, &ys, depth_window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::AnalyticPotential;
    use crate::momentum::{profile_cp1, profile_cpn};

    #[test]
    fn planted_power_law() {
        let p = AnalyticPotential::new(2, 0.0, |r| *r + r.powi(-2));
        let fit = fit_ae_remainder_potential(&p, 0.0, (1e2, 1e4)).unwrap();
        // F - rho cancels about 12 digits at rho = 1e4.
        assert!((fit.exponent + 4.0).abs() < 1e-4, "{fit:?}");
        assert!((fit.coefficient - 1.0).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn planted_cusp() {
        let p = AnalyticPotential::new(2, 1.0, |r| (1.0 - r.ln()).ln().scale(-5.0));
        let fit = fit_cusp_coefficient_potential(&p, 1.0, (20.0, 600.0)).unwrap();
        assert!((fit.coefficient - 5.0).abs() < 1e-9);
        assert!((fit.a - 1.0).abs() < 1e-8);
    }

    #[test]
    fn noise_fails_quality() {
        let x: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, _)| if i % 2 == 0 { 1.0 } else { 100.0 })
            .collect();
        let fit = fit_power_law(&x, &y).unwrap();
        assert!(accept(fit, "noise").is_err());
    }

    #[test]
    fn hwang_singer_surface() {
        let fit = fit_ae_remainder(&profile_cp1(1, 0.0).unwrap(), (1e3, 1e5)).unwrap();
        assert!((fit.exponent + 2.0).abs() < 0.05, "{fit:?}");
        let c = fit_cusp_coefficient(&profile_cp1(1, 0.0).unwrap(), (1e2, 1e5)).unwrap();
        assert!((c.coefficient - 1.0).abs() < 0.01, "{c:?}");
    }

    #[test]
    fn higher_dimension_cusp() {
        let c = fit_cusp_coefficient(&profile_cpn(3, -1).unwrap(), (1e2, 1e5)).unwrap();
        assert!((c.coefficient - 1.0 / 3.0).abs() < 0.01 / 3.0, "{c:?}");
    }

    #[test]
    fn window_validation() {
        let p = profile_cp1(1, 0.0).unwrap();
        assert!(fit_ae_remainder(&p, (1.0, 1e4)).is_err());
        assert!(fit_cusp_coefficient(&p, (1.0, 10.0)).is_err());
    }
}
