//! The model fourth-order operator on the cusp cylinder `(t, theta, E)` acting on
//! circle-invariant functions, its indicial roots per eigenmode of `E = CP^{n-1}`, and
//! the index count for the doubly weighted problem.
//!
//! On a mode with base eigenvalue `lambda` and `D*D` eigenvalue `mu` the symbol is
//! `1/2 sigma^2 + (lambda - 1/2) sigma + mu` with `sigma = s^2 - s`.

use crate::asymptotics::{cusp_coefficient_from_profile, fit_power_law};
use crate::error::{Error, Result};
use crate::momentum::{MomentumPotential, MomentumProfile};
use crate::spectral_e::{self, cp_spectrum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

/// Imaginary parts below this count as real roots.
const REAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IndicialProblem {
    pub lambda_e: f64,
    pub mu_e: f64,
}

impl IndicialProblem {
    /// `mu = 1/2 lambda^2 - lambda`.
    pub fn from_eigenvalue(lambda_e: f64) -> Self {
        IndicialProblem {
            lambda_e,
            mu_e: 0.5 * lambda_e * lambda_e - lambda_e,
        }
    }

    /// Monic quartic coefficients `[c0, c1, c2, c3]` of `s^4 + c3 s^3 + ... + c0`.
    pub fn monic_quartic(&self) -> [f64; 4] {
        let l = self.lambda_e;
        [2.0 * self.mu_e, 1.0 - 2.0 * l, 2.0 * l, -2.0]
    }
}

pub fn model_operator_symbol(problem: &IndicialProblem, s: Complex64) -> Complex64 {
    let sigma = s * s - s;
    sigma * sigma * 0.5 + sigma * (problem.lambda_e - 0.5) + problem.mu_e
}

#[derive(Clone, Debug, Serialize)]
pub struct IndicialSpectrum {
    pub problem: IndicialProblem,
    /// Companion-matrix roots, polished and sorted by real then imaginary part.
    pub roots: Vec<Complex64>,
    /// Roots of the quadratic in `sigma`.
    pub sigma_roots: [Complex64; 2],
    /// Largest distance between the companion roots and the `sigma`-factorization roots.
    pub pairing_error: f64,
    /// Smallest strictly positive real root.
    pub kappa: Option<f64>,
    /// Smallest strictly positive real part over all roots.
    pub min_positive_real_part: Option<f64>,
}

fn eval_quartic(c: &[f64; 4], s: Complex64) -> (Complex64, Complex64) {
    let p = (((s + c[3]) * s + c[2]) * s + c[1]) * s + c[0];
    let dp = ((s * 4.0 + 3.0 * c[3]) * s + 2.0 * c[2]) * s + c[1];
    (p, dp)
}

fn sort_roots(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn factorized_roots(p: &IndicialProblem) -> ([Complex64; 2], Vec<Complex64>) {
    // 1/2 sigma^2 + (lambda - 1/2) sigma + mu = 0
    let b = p.lambda_e - 0.5;
    let disc = Complex64::new(b * b - 2.0 * p.mu_e, 0.0).sqrt();
    let sig = [Complex64::new(-b, 0.0) - disc, Complex64::new(-b, 0.0) + disc];
    let mut s = Vec::with_capacity(4);
    for &sg in &sig {
        let r = (sg + 0.25).sqrt();
        s.push(Complex64::new(0.5, 0.0) + r);
        s.push(Complex64::new(0.5, 0.0) - r);
    }
    sort_roots(&mut s);
    (sig, s)
}

fn matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn indicial_roots(problem: &IndicialProblem) -> IndicialSpectrum {
    let c = problem.monic_quartic();
    let mut comp = DMatrix::<f64>::zeros(4, 4);
    for i in 1..4 {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..4 {
        comp[(i, 3)] = -c[i];
    }
    let mut roots: Vec<Complex64> = comp.complex_eigenvalues().iter().copied().collect();
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_quartic(&c, *r);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            *r -= p / dp;
        }
        if r.im.abs() <= REAL_TOL * r.re.abs().max(1.0) {
            r.im = 0.0;
        }
    }
    sort_roots(&mut roots);
    let (sigma_roots, fact) = factorized_roots(problem);
    let pairing_error = matching_distance(&roots, &fact);
    let kappa = roots
        .iter()
        .filter(|r| r.im == 0.0 && r.re > REAL_TOL)
        .map(|r| r.re)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let min_positive_real_part = roots
        .iter()
        .filter(|r| r.re > REAL_TOL)
        .map(|r| r.re)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    IndicialSpectrum {
        problem: *problem,
        roots,
        sigma_roots,
        pairing_error,
        kappa,
        min_positive_real_part,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeRow {
    pub j: u32,
    pub lambda_e: f64,
    pub mu_e: f64,
    pub multiplicity: u64,
    pub roots: Vec<Complex64>,
    pub kappa_running_min: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaReport {
    pub n: usize,
    pub j_max: u32,
    pub kappa: f64,
    /// Smallest positive real part among all roots, real or not.
    pub min_positive_real_part: f64,
    pub rows: Vec<ModeRow>,
    /// The running minimum never increased.
    pub monotone: bool,
}

/// Minimum over the modes `j <= j_max` of `CP^{n-1}` of the smallest positive real indicial root.
pub fn smallest_positive_root(n: usize, j_max: u32) -> Result<KappaReport> {
    if j_max < 2 {
        return Err(Error::Precondition(format!("j_max must be at least 2, got {j_max}")));
    }
    let spec = cp_spectrum(n, j_max)?;
    let spectra: Vec<IndicialSpectrum> = spec
        .entries
        .par_iter()
        .map(|e| indicial_roots(&IndicialProblem::from_eigenvalue(e.eigenvalue_f64)))
        .collect();
    let mut running: Option<f64> = None;
    let mut monotone = true;
    let mut min_re = f64::INFINITY;
    let mut rows = Vec::with_capacity(spectra.len());
    for (e, sp) in spec.entries.iter().zip(&spectra) {
        if let Some(k) = sp.kappa {
            let next = running.map_or(k, |r| r.min(k));
            if running.is_some_and(|r| next > r) {
                monotone = false;
            }
            running = Some(next);
        }
        if let Some(m) = sp.min_positive_real_part {
            min_re = min_re.min(m);
        }
        rows.push(ModeRow {
            j: e.j,
            lambda_e: sp.problem.lambda_e,
            mu_e: sp.problem.mu_e,
            multiplicity: e.multiplicity,
            roots: sp.roots.clone(),
            kappa_running_min: running,
        });
    }
    let kappa = running.ok_or_else(|| Error::Degenerate("no positive real indicial root".into()))?;
    Ok(KappaReport {
        n,
        j_max,
        kappa,
        min_positive_real_part: min_re,
        rows,
        monotone,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexBreakdown {
    pub n: usize,
    pub eta: f64,
    pub delta: f64,
    /// `+1` from the Euclidean end for `delta` in `(0, 1)`.
    pub ae_local: i64,
    /// `-dim ker D*D` on `CP^{n-1}` from the cusp.
    pub cusp_local: i64,
    pub index: i64,
}

/// Modes examined when locating cusp walls; higher levels only have larger real parts.
const WALL_LEVELS: u32 = 8;

/// Index of the weighted operator as the sum of the two local contributions.
pub fn fredholm_index(n: usize, eta: f64, delta: f64) -> Result<IndexBreakdown> {
    if n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {n}")));
    }
    if delta.fract() == 0.0 {
        return Err(Error::WeightOnWall {
            weight: delta,
            detail: "integer AE weights are indicial".into(),
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    let kr = smallest_positive_root(n, WALL_LEVELS)?;
    if !(eta > 0.0 && eta < kr.kappa) {
        return Err(Error::Precondition(format!(
            "eta must lie in (0, {}), got {eta}",
            kr.kappa
        )));
    }
    for row in &kr.rows {
        if let Some(r) = row.roots.iter().find(|r| (r.re - eta).abs() <= 1e-12) {
            return Err(Error::WeightOnWall {
                weight: eta,
                detail: format!("root {r} of mode j = {}", row.j),
            });
        }
    }
    let ker = kernel_dimension(n)?;
    let ae_local = 1;
    let cusp_local = -(ker as i64);
    Ok(IndexBreakdown {
        n,
        eta,
        delta,
        ae_local,
        cusp_local,
        index: ae_local + cusp_local,
    })
}

/// Non-constant kernel of `D*D` on `CP^{n-1}`: the levels `j >= 1` with `mu = 0`, counted exactly.
pub fn kernel_dimension(n: usize) -> Result<u64> {
    let spec = cp_spectrum(n, 2)?;
    Ok(spec
        .entries
        .iter()
        .filter(|e| {
            let lam = spectral_e::eigenvalue(n, e.j);
            e.j >= 1 && spectral_e::lich_eigenvalue(&lam).is_zero()
        })
        .map(|e| e.multiplicity)
        .sum())
}

/// Default constant in `t = log(lambda - log |z|^2)`.
pub const DEFAULT_LAMBDA: f64 = 2.0;

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub n: usize,
    pub k: u32,
    pub lambda: f64,
    /// Limit of `g_tt` in the model cusp metric.
    pub model_g_tt: f64,
    pub max_abs_difference: f64,
    /// Fitted `r` in `|g_tt - model| ~ C e^{-r t}`; `None` when the difference vanishes identically.
    pub rate: Option<f64>,
    pub coefficient: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Minimum `r^2` of the exponential fit.
pub const DECAY_MIN_R_SQUARED: f64 = 0.99;

/// Fits the exponential decay in `t` of `g_tt(t) - model_g_tt`.
pub fn decay_fit<F>(g_tt: F, model_g_tt: f64, t_grid: &[f64]) -> Result<(f64, Option<(f64, f64, f64)>)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if t_grid.len() < 3 {
        return Err(Error::Precondition("decay fit needs at least three t values".into()));
    }
    let diffs: Result<Vec<f64>> = t_grid.par_iter().map(|&t| Ok(g_tt(t)? - model_g_tt)).collect();
    let diffs = diffs?;
    let max_abs = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if max_abs == 0.0 {
        return Ok((0.0, None));
    }
    let x: Vec<f64> = t_grid.iter().map(|t| t.exp()).collect();
    let fit = fit_power_law(&x, &diffs)?;
    if fit.r_squared < DECAY_MIN_R_SQUARED {
        return Err(Error::FitQuality {
            r_squared: fit.r_squared,
            lo: t_grid[0],
            hi: t_grid[t_grid.len() - 1],
            detail: format!("exponential decay rate {:.4}", -fit.exponent),
        });
    }
    Ok((max_abs, Some((-fit.exponent, fit.coefficient, fit.r_squared))))
}

/// Compares `g_tt` of the metric built from `profile` with the model cusp metric.
///
/// With `s = log rho = lambda - e^t`, the radial part of the metric is
/// `F_ss (ds^2 / 4 + dtheta^2)`, so `g_tt = F_ss e^{2t} / 4` and `g_thetatheta = e^{-2t} g_tt`.
/// The model value is `c / 4` with `c` the cusp coefficient read off the profile.
pub fn model_vs_full_decay(profile: &MomentumProfile, t_grid: &[f64], lambda: f64) -> Result<DecayReport> {
    if profile.cone_beta() != 0.0 {
        return Err(Error::Precondition(
            "the model cusp needs a cusp profile (beta = 0)".into(),
        ));
    }
    if t_grid.is_empty() {
        return Err(Error::Precondition("empty t grid".into()));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t.is_finite() && t.exp() > lambda + 1.0)) {
        return Err(Error::Precondition(format!(
            "t = {t} is outside the cusp regime (need e^t > lambda + 1)"
        )));
    }
    let pot = MomentumPotential::new(profile)?;
    let c = pot.constants();
    let model = cusp_coefficient_from_profile(profile)? / 4.0;
    let g_tt = |t: f64| -> Result<f64> {
        let s = lambda - t.exp();
        let tau = pot.tau_at_log_rho(s)?;
        let f_ss = c.kappa * c.ell * profile.phi(tau);
        Ok(f_ss * (2.0 * t).exp() / 4.0)
    };
    let (max_abs, fit) = decay_fit(g_tt, model, t_grid)?;
    let lo = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayReport {
        n: profile.dim(),
        k: profile.bundle_k(),
        lambda,
        model_g_tt: model,
        max_abs_difference: max_abs,
        rate: fit.map(|f| f.0),
        coefficient: fit.map_or(0.0, |f| f.1),
        r_squared: fit.map_or(1.0, |f| f.2),
        window: (lo, hi),
    })
}

/// `points` equally spaced values of `t` in `[lo, hi]`.
pub fn t_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}
