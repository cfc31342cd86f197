//! Potential-level gluing of a base metric `i ddbar (rho + phi1)` near a point with an
//! `eps^2`-rescaled model metric on the blow-up, and the biharmonic extensions of
//! boundary data in and out of the unit ball.

use crate::curvature::{positivity_scan, scalar_curvature_radial, RadialKahlerPotential};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::momentum::{MomentumPotential, MomentumProfile};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Radii of the gluing annulus `r_eps <= |z| <= 2 r_eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct GluingSchedule {
    pub epsilon: f64,
    pub n: usize,
    pub r_eps: f64,
    pub R_eps: f64,
}

pub fn make_schedule(epsilon: f64, n: usize) -> Result<GluingSchedule> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("gluing needs n >= 2, got {n}")));
    }
    let exponent = (2 * n - 1) as f64 / (2 * n + 1) as f64;
    let r_eps = epsilon.powf(exponent);
    Ok(GluingSchedule {
        epsilon,
        n,
        r_eps,
        R_eps: r_eps / epsilon,
    })
}

/// Quintic smoothstep: 0 for `x <= 1`, 1 for `x >= 2`, `C^2` across both ends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CutoffSpec;

impl CutoffSpec {
    /// Sup norms of `gamma^(j)` on `[1, 2]` for `j = 0..=4`.
    pub const DERIVATIVE_BOUNDS: [f64; 5] = [1.0, 1.875, 5.773_502_691_896_258, 60.0, 360.0];

    pub fn gamma(&self, x: f64) -> f64 {
        self.gamma_jet(&Jet::<1>::constant(x)).value()
    }

    pub fn gamma_jet<const N: usize>(&self, x: &Jet<N>) -> Jet<N> {
        let u = x.value() - 1.0;
        if u <= 0.0 {
            return Jet::constant(0.0);
        }
        if u >= 1.0 {
            return Jet::constant(1.0);
        }
        let t = *x - 1.0;
        let t3 = t * t * t;
        t3 * (t * (t * 6.0 - 15.0) + 10.0)
    }
}

type RadialFn = dyn Fn(&Jet<5>) -> Jet<5> + Send + Sync;

/// `phi1(rho)`, the correction of the base potential `rho + phi1` near the glued point.
#[derive(Clone)]
pub struct BaseCorrection {
    f: Arc<RadialFn>,
}

impl BaseCorrection {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&Jet<5>) -> Jet<5> + Send + Sync + 'static,
    {
        BaseCorrection { f: Arc::new(f) }
    }

    pub fn zero() -> Self {
        BaseCorrection::new(|_| Jet::constant(0.0))
    }

    /// `c rho^2`.
    pub fn quadratic(c: f64) -> Self {
        BaseCorrection::new(move |r| (*r * *r).scale(c))
    }

    pub fn eval_jet(&self, rho: &Jet<5>) -> Jet<5> {
        (self.f)(rho)
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.eval_jet(&Jet::constant(rho)).value()
    }
}

impl std::fmt::Debug for BaseCorrection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("BaseCorrection")
    }
}

/// The model glued in at scale `eps`.
#[derive(Clone, Debug)]
pub enum ModelEnd {
    /// Flat `C^n`: `phi2 = 0` and no log term.
    Flat,
    Momentum(Box<MomentumPotential>),
}

impl ModelEnd {
    fn log_coefficient(&self) -> f64 {
        match self {
            ModelEnd::Flat => 0.0,
            ModelEnd::Momentum(p) => p.constants().log_coefficient,
        }
    }

    /// Jet in `s` of `c s + phi2` at model coordinate `s = log rho`.
    fn remainder_jet(&self, s: f64) -> Result<Jet<5>> {
        let c = self.log_coefficient();
        let lin = Jet::<5>::variable(s).scale(c);
        match self {
            ModelEnd::Flat => Ok(lin),
            ModelEnd::Momentum(p) => {
                let tau = p.tau_at_log_rho(s)?;
                let (_, j) = p.phi2_jet_at_tau(tau)?;
                let mut c5 = [0.0; 5];
                c5.copy_from_slice(&j.c[..5]);
                Ok(lin + Jet::from_coeffs(c5))
            }
        }
    }

    fn potential(&self, s: f64) -> Result<f64> {
        match self {
            ModelEnd::Flat => Ok(s.exp()),
            ModelEnd::Momentum(p) => p.potential(s),
        }
    }

    fn momentum_jet(&self, s: f64) -> Result<Jet<4>> {
        match self {
            ModelEnd::Flat => Ok(truncate(&Jet::<5>::variable(s).exp().differentiate())),
            ModelEnd::Momentum(p) => p.momentum_jet(s),
        }
    }
}

/// Which piece of the glued potential is in force at a radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Inner,
    Annulus,
    Outer,
}

/// `F_eps` on `C^n \ {0}`: the rescaled model for `|z| <= r_eps`, the base for
/// `|z| >= 2 r_eps`, and `rho + g1 phi1 + eps^2 g2 (c log(rho/eps^2) + phi2(rho/eps^2))`
/// in between, with `g1 = gamma(|z|/r_eps)` and `g2 = 1 - g1`.
#[derive(Clone, Debug)]
pub struct GluedPotential {
    pub schedule: GluingSchedule,
    pub cutoff: CutoffSpec,
    phi1: BaseCorrection,
    model: ModelEnd,
    log_eps2: f64,
}

pub fn assemble_glued_potential(
    schedule: GluingSchedule,
    base_phi1: BaseCorrection,
    model: Option<&MomentumProfile>,
) -> Result<GluedPotential> {
    let model = match model {
        None => ModelEnd::Flat,
        Some(p) => {
            if p.dim() != schedule.n {
                return Err(Error::Dimension(format!(
                    "model has n = {}, schedule has n = {}",
                    p.dim(),
                    schedule.n
                )));
            }
            ModelEnd::Momentum(Box::new(MomentumPotential::new(p)?))
        }
    };
    let g = GluedPotential {
        schedule,
        cutoff: CutoffSpec,
        phi1: base_phi1,
        model,
        log_eps2: 2.0 * schedule.epsilon.ln(),
    };
    // The model remainder must be available across the whole annulus.
    let (lo, hi) = g.annulus_log_rho();
    for s in [lo, hi] {
        g.model
            .remainder_jet(s - g.log_eps2)
            .map_err(|e| Error::Range(format!("model remainder unavailable at log rho = {s}: {e}")))?;
    }
    Ok(g)
}

impl GluedPotential {
    pub fn region(&self, s: f64) -> Region {
        let (lo, hi) = self.annulus_log_rho();
        if s <= lo {
            Region::Inner
        } else if s >= hi {
            Region::Outer
        } else {
            Region::Annulus
        }
    }

    /// `log rho` at `|z| = r_eps` and `|z| = 2 r_eps`.
    pub fn annulus_log_rho(&self) -> (f64, f64) {
        let r = self.schedule.r_eps;
        (2.0 * r.ln(), 2.0 * (2.0 * r).ln())
    }

    pub fn model(&self) -> &ModelEnd {
        &self.model
    }

    /// Pure base piece `rho + phi1`.
    pub fn outer_momentum_jet(&self, s: f64) -> Jet<4> {
        let rho = Jet::<5>::variable(s).exp();
        truncate(&(rho + self.phi1.eval_jet(&rho)).differentiate())
    }

    pub fn outer_potential(&self, s: f64) -> f64 {
        let rho = s.exp();
        rho + self.phi1.eval(rho)
    }

    /// Pure rescaled model piece `eps^2 F(rho / eps^2)`.
    pub fn inner_momentum_jet(&self, s: f64) -> Result<Jet<4>> {
        let e2 = self.schedule.epsilon * self.schedule.epsilon;
        Ok(self.model.momentum_jet(s - self.log_eps2)?.scale(e2))
    }

    pub fn inner_potential(&self, s: f64) -> Result<f64> {
        let e2 = self.schedule.epsilon * self.schedule.epsilon;
        Ok(e2 * self.model.potential(s - self.log_eps2)?)
    }

    /// The blended correction `g1 phi1 + eps^2 g2 (c log(rho/eps^2) + phi2(rho/eps^2))` as a jet in `s`.
    pub fn correction_jet(&self, s: f64) -> Result<Jet<5>> {
        let e2 = self.schedule.epsilon * self.schedule.epsilon;
        let x = (Jet::<5>::variable(s).scale(0.5)).exp() / self.schedule.r_eps;
        let g1 = self.cutoff.gamma_jet(&x);
        let g2 = 1.0 - g1;
        let rho = Jet::<5>::variable(s).exp();
        let rem = self.model.remainder_jet(s - self.log_eps2)?;
        Ok(g1 * self.phi1.eval_jet(&rho) + (g2 * rem).scale(e2))
    }

    /// Ratio `|correction| / |z|^4` at `log rho = s`.
    pub fn correction_ratio(&self, s: f64) -> Result<f64> {
        Ok(self.correction_jet(s)?.value().abs() / (2.0 * s).exp())
    }
}

fn truncate(j: &Jet<5>) -> Jet<4> {
    let mut c = [0.0; 4];
    c.copy_from_slice(&j.c[..4]);
    Jet::from_coeffs(c)
}

impl RadialKahlerPotential for GluedPotential {
    fn dim(&self) -> usize {
        self.schedule.n
    }

    fn momentum_jet(&self, s: f64) -> Result<Jet<4>> {
        match self.region(s) {
            Region::Outer => Ok(self.outer_momentum_jet(s)),
            Region::Inner => self.inner_momentum_jet(s),
            Region::Annulus => {
                let rho = Jet::<5>::variable(s).exp();
                Ok(truncate(&(rho + self.correction_jet(s)?).differentiate()))
            }
        }
    }

    fn potential(&self, s: f64) -> Result<f64> {
        match self.region(s) {
            Region::Outer => Ok(self.outer_potential(s)),
            Region::Inner => self.inner_potential(s),
            Region::Annulus => Ok(s.exp() + self.correction_jet(s)?.value()),
        }
    }

    fn log_coefficient(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PurityReport {
    /// `(|z| / r_eps, region, identical)` per probe.
    pub probes: Vec<(f64, Region, bool)>,
    pub pass: bool,
}

/// Radii, in units of `r_eps`, probed for region purity.
pub const PURITY_PROBES: [f64; 10] = [0.01, 0.25, 0.5, 0.9, 1.0, 2.0, 2.0001, 3.0, 10.0, 100.0];

/// Compares the glued potential bit for bit with independently built pure pieces
/// (`outer` for `|z| >= 2 r_eps`, `inner` for `|z| <= r_eps`): values of `F` and the jet of `F_s`.
pub fn region_purity<A, B>(g: &GluedPotential, outer: &A, inner: &B) -> Result<PurityReport>
where
    A: RadialKahlerPotential + ?Sized,
    B: RadialKahlerPotential + ?Sized,
{
    let r = g.schedule.r_eps;
    let mut probes = Vec::new();
    for &f in &PURITY_PROBES {
        let s = 2.0 * (f * r).ln();
        let region = g.region(s);
        let same = |p: &dyn Fn(f64) -> Result<(f64, Jet<4>)>| -> Result<bool> {
            let (v, j) = p(s)?;
            let jg = g.momentum_jet(s)?;
            let vg = g.potential(s)?;
            Ok(v.to_bits() == vg.to_bits() && j.c.iter().zip(jg.c.iter()).all(|(a, b)| a.to_bits() == b.to_bits()))
        };
        let identical = match region {
            Region::Outer => same(&|s| Ok((outer.potential(s)?, outer.momentum_jet(s)?)))?,
            Region::Inner => same(&|s| Ok((inner.potential(s)?, inner.momentum_jet(s)?)))?,
            Region::Annulus => continue,
        };
        probes.push((f, region, identical));
    }
    let pass = probes.iter().all(|p| p.2);
    Ok(PurityReport { probes, pass })
}

/// `points` values of `rho` spread log-uniformly over the closed annulus.
pub fn annulus_grid(g: &GluedPotential, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Precondition("annulus grid needs at least two points".into()));
    }
    let (lo, hi) = g.annulus_log_rho();
    Ok((0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Default number of annulus sample points.
pub const ANNULUS_POINTS: usize = 97;

#[derive(Clone, Debug, Serialize)]
pub struct DeviationReport {
    pub epsilon: f64,
    pub min_margin: f64,
    pub sup_deviation: f64,
    /// `r_eps^2 * sup_deviation`, the deviation in units of the annulus scale.
    pub scaled_deviation: f64,
    pub rho_at_sup: f64,
}

/// Sup over the annulus grid of `|S(omega_eps) - s_base|`.
pub fn glued_scalar_deviation(g: &GluedPotential, s_base: f64) -> Result<DeviationReport> {
    let grid = annulus_grid(g, ANNULUS_POINTS)?;
    let min_margin = positivity_scan(g, &grid)?;
    if !(min_margin > 0.0) {
        return Err(Error::Degenerate(format!(
            "glued metric not positive on the annulus: margin {min_margin:e}"
        )));
    }
    let devs: Result<Vec<(f64, f64)>> = grid
        .par_iter()
        .map(|&rho| Ok(((scalar_curvature_radial(g, rho)?.scalar - s_base).abs(), rho)))
        .collect();
    let (sup, at) = devs?
        .into_iter()
        .fold((f64::NEG_INFINITY, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
    let r = g.schedule.r_eps;
    Ok(DeviationReport {
        epsilon: g.schedule.epsilon,
        min_margin,
        sup_deviation: sup,
        scaled_deviation: r * r * sup,
        rho_at_sup: at,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationSweep {
    pub n: usize,
    pub s_base: f64,
    pub rows: Vec<DeviationReport>,
    /// Slope of `log sup_deviation` against `log eps`.
    pub fitted_exponent: f64,
    /// Deviations decrease strictly along the sweep (which runs towards smaller `eps`).
    pub strictly_decreasing: bool,
}

/// Glues at every `eps` (sorted into decreasing order) and records the deviations.
pub fn deviation_sweep(
    epsilons: &[f64],
    n: usize,
    base_phi1: &BaseCorrection,
    model: Option<&MomentumProfile>,
    s_base: f64,
) -> Result<DeviationSweep> {
    if epsilons.len() < 2 {
        return Err(Error::Precondition(
            "a sweep needs at least two values of epsilon".into(),
        ));
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(eps.len());
    for &e in &eps {
        let g = assemble_glued_potential(make_schedule(e, n)?, base_phi1.clone(), model)?;
        rows.push(glued_scalar_deviation(&g, s_base)?);
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].sup_deviation < w[0].sup_deviation);
    let xs: Vec<f64> = rows.iter().map(|r| r.epsilon.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.sup_deviation.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(DeviationSweep {
        n,
        s_base,
        rows,
        fitted_exponent: sxy / sxx,
        strictly_decreasing,
    })
}

/// A real spherical harmonic of degree `degree` on `S^{2n-1}`; `index` tells apart
/// harmonics of the same degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct HarmonicMode {
    pub degree: u32,
    pub index: u32,
    pub coeff: f64,
}

/// `sum_p c_p r^p` multiplying one harmonic of degree `degree` in `R^dim`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialMode {
    pub degree: u32,
    pub index: u32,
    /// `(power, coefficient)`.
    pub terms: Vec<(i64, f64)>,
}

impl RadialMode {
    /// `Delta (r^p Y_d) = (p (p + N - 2) - d (d + N - 2)) r^(p-2) Y_d`.
    pub fn laplacian(&self, real_dim: i64) -> RadialMode {
        let d = self.degree as i64;
        let terms = self
            .terms
            .iter()
            .filter_map(|&(p, c)| {
                let factor = p * (p + real_dim - 2) - d * (d + real_dim - 2);
                (factor != 0 && c != 0.0).then_some((p - 2, c * factor as f64))
            })
            .collect();
        RadialMode {
            degree: self.degree,
            index: self.index,
            terms,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|&(p, c)| c * r.powi(p as i32)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    pub fn coefficient(&self, power: i64) -> f64 {
        self.terms.iter().filter(|t| t.0 == power).map(|t| t.1).sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BiharmonicSolution {
    pub n: usize,
    pub modes: Vec<RadialMode>,
    /// Modes above the truncation degree that were dropped.
    pub truncated: usize,
}

impl BiharmonicSolution {
    /// Largest `|H - h|` and `|Delta H - k|` over the modes at `r = 1`.
    pub fn boundary_mismatch(&self, h_modes: &[HarmonicMode], k_modes: &[HarmonicMode]) -> f64 {
        let dim = 2 * self.n as i64;
        self.modes
            .iter()
            .map(|m| {
                let (h, k) = boundary_data(m.degree, m.index, h_modes, k_modes);
                (m.eval(1.0) - h).abs().max((m.laplacian(dim).eval(1.0) - k).abs())
            })
            .fold(0.0, f64::max)
    }

    /// `Delta^2 H` vanishes identically in every mode.
    pub fn is_biharmonic(&self) -> bool {
        let dim = 2 * self.n as i64;
        self.modes.iter().all(|m| m.laplacian(dim).laplacian(dim).is_zero())
    }

    /// `max_r r^{-rate} |H_d(r)|` over `radii` for the degree-0 modes.
    pub fn degree_zero_weighted_sup(&self, radii: &[f64], rate: f64) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.degree == 0)
            .flat_map(|m| radii.iter().map(move |&r| m.eval(r).abs() * r.powf(-rate)))
            .fold(0.0, f64::max)
    }
}

/// Default spherical-harmonic truncation degree.
pub const DEFAULT_MAX_DEGREE: u32 = 8;

fn boundary_data(degree: u32, index: u32, h: &[HarmonicMode], k: &[HarmonicMode]) -> (f64, f64) {
    let pick = |v: &[HarmonicMode]| {
        v.iter()
            .filter(|m| m.degree == degree && m.index == index)
            .map(|m| m.coeff)
            .sum::<f64>()
    };
    (pick(h), pick(k))
}

fn mode_keys(h: &[HarmonicMode], k: &[HarmonicMode], max_degree: u32) -> (Vec<(u32, u32)>, usize) {
    let mut keys: Vec<(u32, u32)> = h.iter().chain(k).map(|m| (m.degree, m.index)).collect();
    keys.sort_unstable();
    keys.dedup();
    let before = keys.len();
    keys.retain(|&(d, _)| d <= max_degree);
    let dropped = before - keys.len();
    (keys, dropped)
}

/// Per-mode `a r^d + b r^(d+2)` with `H = h` and `Delta H = k` on the unit sphere of `C^n`.
pub fn biharmonic_interior(
    n: usize,
    h_modes: &[HarmonicMode],
    k_modes: &[HarmonicMode],
    max_degree: u32,
) -> Result<BiharmonicSolution> {
    if n < 1 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let big_n = 2 * n as i64;
    let (keys, truncated) = mode_keys(h_modes, k_modes, max_degree);
    let modes = keys
        .into_iter()
        .map(|(d, idx)| {
            let (h, k) = boundary_data(d, idx, h_modes, k_modes);
            let di = d as i64;
            let b = k / (4 * di + 2 * big_n) as f64;
            RadialMode {
                degree: d,
                index: idx,
                terms: vec![(di, h - b), (di + 2, b)],
            }
        })
        .collect();
    Ok(BiharmonicSolution { n, modes, truncated })
}

/// Per-mode decaying solution in `span{r^(2-2n-d), r^(4-2n-d)}` outside the unit ball.
/// The degree-0 part of `k` must vanish.
pub fn biharmonic_exterior(
    n: usize,
    h_modes: &[HarmonicMode],
    k_modes: &[HarmonicMode],
    max_degree: u32,
) -> Result<BiharmonicSolution> {
    if n < 2 {
        return Err(Error::Domain(format!("exterior problem needs n >= 2, got {n}")));
    }
    let mean: f64 = k_modes.iter().filter(|m| m.degree == 0).map(|m| m.coeff).sum();
    if mean != 0.0 {
        return Err(Error::Precondition(format!(
            "k must have zero mean on the sphere, got {mean}"
        )));
    }
    let big_n = 2 * n as i64;
    let (keys, truncated) = mode_keys(h_modes, k_modes, max_degree);
    let modes = keys
        .into_iter()
        .map(|(d, idx)| {
            let (h, k) = boundary_data(d, idx, h_modes, k_modes);
            let di = d as i64;
            let e = 8 - 4 * di - 2 * big_n;
            // e = 0 only for n = 2, d = 0, where k vanishes and r^0 is dropped.
            let b = if e == 0 { 0.0 } else { k / e as f64 };
            RadialMode {
                degree: d,
                index: idx,
                terms: vec![(2 - big_n - di, h - b), (4 - big_n - di, b)],
            }
        })
        .collect();
    Ok(BiharmonicSolution { n, modes, truncated })
}
