//! Curvature of `U(n)`-invariant Kähler metrics `i ddbar F(|z|^2)` on `C^n \ {0}`.
//!
//! Everything is expressed in `s = log rho`. Writing `m(s) = rho F'(rho) = dF/ds`,
//! the metric at `z = sqrt(rho) u` is `rho g = m I + (m' - m) conj(u) u^T` and
//! `log det g = log m' + (n - 1) log m - n s`. The scalar curvature is the trace
//! `g^{i jbar} R_{i jbar}`, so the Fubini–Study metric on `CP^n` has `n (n + 1)`.

use crate::error::{Error, Result};
use crate::jet::Jet;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// A radial Kähler potential `F(rho)` on `C^n \ {0}`.
pub trait RadialKahlerPotential: Sync {
    /// Complex dimension `n`.
    fn dim(&self) -> usize;
    /// Jet in `s = log rho` of `dF/ds`, i.e. `F_s, F_ss, F_sss, F_ssss` up to factorials.
    fn momentum_jet(&self, s: f64) -> Result<Jet<4>>;
    /// `F` at `s = log rho`.
    fn potential(&self, s: f64) -> Result<f64>;
    /// Coefficient of the `log rho` term carried by the potential.
    fn log_coefficient(&self) -> f64 {
        0.0
    }
}

type AnalyticFn = dyn Fn(&Jet<5>) -> Jet<5> + Send + Sync;

/// `F(rho) = G(rho) + c log rho` with `G` evaluated on jets.
pub struct AnalyticPotential {
    n: usize,
    g: Box<AnalyticFn>,
    log_coeff: f64,
}

impl AnalyticPotential {
    pub fn new<G>(n: usize, log_coeff: f64, g: G) -> Self
    where
        G: Fn(&Jet<5>) -> Jet<5> + Send + Sync + 'static,
    {
        AnalyticPotential {
            n,
            g: Box::new(g),
            log_coeff,
        }
    }

    /// Flat metric, `F = rho`.
    pub fn euclidean(n: usize) -> Self {
        AnalyticPotential::new(n, 0.0, |r| *r)
    }

    /// `F = log(1 + rho)`: Fubini–Study restricted to the affine chart.
    pub fn fubini_study(n: usize) -> Self {
        AnalyticPotential::new(n, 0.0, |r| r.ln_1p())
    }
}

impl RadialKahlerPotential for AnalyticPotential {
    fn dim(&self) -> usize {
        self.n
    }

    fn momentum_jet(&self, s: f64) -> Result<Jet<4>> {
        let rho = Jet::<5>::variable(s).exp();
        let d = (self.g)(&rho).differentiate();
        let mut c = [0.0; 4];
        c.copy_from_slice(&d.c[..4]);
        c[0] += self.log_coeff;
        Ok(Jet::from_coeffs(c))
    }

    fn potential(&self, s: f64) -> Result<f64> {
        Ok((self.g)(&Jet::<5>::constant(s.exp())).value() + self.log_coeff * s)
    }

    fn log_coefficient(&self) -> f64 {
        self.log_coeff
    }
}

/// `eps^2 F(rho / eps^2)`.
pub struct ScaledPotential<'a, P: RadialKahlerPotential + ?Sized> {
    pub inner: &'a P,
    pub eps: f64,
}

impl<P: RadialKahlerPotential + ?Sized> RadialKahlerPotential for ScaledPotential<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn momentum_jet(&self, s: f64) -> Result<Jet<4>> {
        let shift = 2.0 * self.eps.ln();
        Ok(self.inner.momentum_jet(s - shift)?.scale(self.eps * self.eps))
    }

    fn potential(&self, s: f64) -> Result<f64> {
        let shift = 2.0 * self.eps.ln();
        Ok(self.eps * self.eps * self.inner.potential(s - shift)?)
    }

    fn log_coefficient(&self) -> f64 {
        self.eps * self.eps * self.inner.log_coefficient()
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct CurvatureReport {
    pub rho: f64,
    pub scalar: f64,
    /// Eigenvalues of `g^{-1} Ric` along the radial (fiber) direction and the base directions.
    pub ricci_eigenvalues: (f64, f64),
    pub det_g: f64,
    /// `F'(rho)`.
    pub margin_tangential: f64,
    /// `F'(rho) + rho F''(rho)`.
    pub margin_radial: f64,
}

/// Derived radial quantities at one point: `(F_s, F_ss, L_s, L_ss)`.
fn radial_data(n: usize, m: &Jet<4>, s: f64) -> Result<(f64, f64, f64, f64)> {
    let fs = m.value();
    let fss = m.derivative(1);
    if !(fs > 0.0 && fss > 0.0) || !fs.is_finite() || !fss.is_finite() {
        return Err(Error::Degenerate(format!(
            "metric not positive at log rho = {s}: F_s = {fs:e}, F_ss = {fss:e}"
        )));
    }
    let dm = m.differentiate();
    let l: Jet<4> = dm.ln() + m.ln().scale((n - 1) as f64);
    // `- n s` has zero second derivative and shifts L_s by -n.
    let ls = l.derivative(1) - n as f64;
    let lss = l.derivative(2);
    Ok((fs, fss, ls, lss))
}

/// Closed-form scalar curvature from the jet of `F_s`.
pub fn scalar_from_jet(n: usize, m: &Jet<4>) -> Result<f64> {
    let (fs, fss, ls, lss) = radial_data(n, m, f64::NAN)?;
    Ok(-(lss / fss + (n - 1) as f64 * ls / fs))
}

fn default_direction(n: usize) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(1.0 + 0.37 * j as f64, 0.61 - 0.23 * (j * j) as f64))
        .collect();
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|c| c / norm).collect()
}

fn hermitian_radial(n: usize, a: f64, b: f64, u: &[Complex64]) -> DMatrix<Complex64> {
    // a I + (b - a) conj(u) u^T
    DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { a } else { 0.0 };
        Complex64::new(diag, 0.0) + u[i].conj() * u[j] * (b - a)
    })
}

/// Brute-force curvature at the point `z`: builds `g` and `Ric` as `n x n` complex
/// matrices and takes `tr(g^{-1} Ric)`.
pub fn curvature_at_point<P: RadialKahlerPotential + ?Sized>(p: &P, z: &[Complex64]) -> Result<CurvatureReport> {
    let n = p.dim();
    if z.len() != n {
        return Err(Error::Dimension(format!(
            "point has {} coordinates, potential has n = {n}",
            z.len()
        )));
    }
    let rho: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    if !(rho > 0.0) {
        return Err(Error::Domain("curvature needs z != 0".into()));
    }
    let s = rho.ln();
    let m = p.momentum_jet(s)?;
    let (fs, fss, ls, lss) = radial_data(n, &m, s)?;
    let sq = rho.sqrt();
    let u: Vec<Complex64> = z.iter().map(|c| c / sq).collect();
    let g = hermitian_radial(n, fs, fss, &u).scale(1.0 / rho);
    let ric = hermitian_radial(n, -ls, -lss, &u).scale(1.0 / rho);
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate(format!("singular metric at rho = {rho:e}")))?;
    let scalar = (ginv * ric).trace().re;
    let det_g = g.determinant().re;
    Ok(CurvatureReport {
        rho,
        scalar,
        ricci_eigenvalues: (-lss / fss, -ls / fs),
        det_g,
        margin_tangential: fs / rho,
        margin_radial: fss / rho,
    })
}

/// Curvature report at radius `rho` along a fixed generic direction.
pub fn scalar_curvature_radial<P: RadialKahlerPotential + ?Sized>(p: &P, rho: f64) -> Result<CurvatureReport> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let u = default_direction(p.dim());
    let sq = rho.sqrt();
    let z: Vec<Complex64> = u.iter().map(|c| c * sq).collect();
    curvature_at_point(p, &z)
}

/// `det g = (F')^{n-1} (F' + rho F'')` from the radial data.
pub fn det_g_formula<P: RadialKahlerPotential + ?Sized>(p: &P, rho: f64) -> Result<f64> {
    let m = p.momentum_jet(rho.ln())?;
    let n = p.dim() as i32;
    Ok((m.value() / rho).powi(n - 1) * m.derivative(1) / rho)
}

/// Scalar curvature from central differences of `F_s` in `s` with step `h`.
pub fn scalar_curvature_fd<P: RadialKahlerPotential + ?Sized>(p: &P, rho: f64, h: f64) -> Result<f64> {
    let s = rho.ln();
    let m = |k: i32| p.momentum_jet(s + k as f64 * h).map(|j| j.value());
    let (m_2, m_1, m0, m1, m2) = (m(-2)?, m(-1)?, m(0)?, m(1)?, m(2)?);
    let (m_3, m3) = (m(-3)?, m(3)?);
    let d1 = (m_2 - 8.0 * m_1 + 8.0 * m1 - m2) / (12.0 * h);
    let d2 = (-m_2 + 16.0 * m_1 - 30.0 * m0 + 16.0 * m1 - m2) / (12.0 * h * h);
    let d3 = (-m3 + 8.0 * m2 - 13.0 * m1 + 13.0 * m_1 - 8.0 * m_2 + m_3) / (8.0 * h * h * h);
    let n = p.dim() as f64;
    let ls = d2 / d1 + (n - 1.0) * d1 / m0 - n;
    let lss = d3 / d1 - (d2 / d1).powi(2) + (n - 1.0) * (d2 / m0 - (d1 / m0).powi(2));
    Ok(-(lss / d1 + (n - 1.0) * ls / m0))
}

/// Minimum over the grid of `min(F', F' + rho F'')`; negative when the form is not positive.
pub fn positivity_scan<P: RadialKahlerPotential + ?Sized>(p: &P, rho_grid: &[f64]) -> Result<f64> {
    if rho_grid.is_empty() {
        return Err(Error::Precondition("positivity_scan needs a non-empty grid".into()));
    }
    let margins: Result<Vec<f64>> = rho_grid
        .par_iter()
        .map(|&rho| {
            let m = p.momentum_jet(rho.ln())?;
            Ok((m.value() / rho).min(m.derivative(1) / rho))
        })
        .collect();
    Ok(margins?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Curvature reports over a grid, evaluated in parallel.
pub fn curvature_sweep<P: RadialKahlerPotential + ?Sized>(p: &P, rho_grid: &[f64]) -> Result<Vec<CurvatureReport>> {
    rho_grid.par_iter().map(|&r| scalar_curvature_radial(p, r)).collect()
}
