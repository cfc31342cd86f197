use super::check_tau;
use crate::error::{Error, Result};
use crate::jet::Jet;
use serde::Serialize;

/// Local LeBrun data `g = e^u w (dx^2 + dy^2) + w dtau^2 + w^{-1} theta^2` for the
/// conical family over `CP^1`. The connection form `theta` is not needed for the
/// residuals and is not modelled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeBrunFrame {
    pub k: u32,
    pub beta: f64,
    /// `c` in `u = log(tau (tau + 2 beta) / (1 + (x^2 + y^2)/c)^2)`.
    pub denominator_scale: f64,
    /// Constant added to `w`; zero for the genuine frame.
    pub w_offset: f64,
}

impl LeBrunFrame {
    pub fn new(k: u32, beta: f64, denominator_scale: f64) -> Self {
        LeBrunFrame {
            k,
            beta,
            denominator_scale,
            w_offset: 0.0,
        }
    }

    fn u<const N: usize>(&self, x: Jet<N>, y: Jet<N>, tau: Jet<N>) -> Jet<N> {
        let c = self.denominator_scale;
        let den = (x * x + y * y) / c + 1.0;
        (tau * (tau + 2.0 * self.beta)).ln() - den.ln() * 2.0
    }

    fn w<const N: usize>(&self, tau: Jet<N>) -> Jet<N> {
        (tau * (self.k as f64 / 2.0) + 1.0) / (tau * (tau + 2.0 * self.beta)) + self.w_offset
    }

    pub fn u_value(&self, x: f64, y: f64, tau: f64) -> f64 {
        self.u(Jet::<1>::constant(x), Jet::constant(y), Jet::constant(tau))
            .value()
    }

    pub fn w_value(&self, tau: f64) -> f64 {
        self.w(Jet::<1>::constant(tau)).value()
    }
}

/// Residuals of `u_xx + u_yy + (e^u)_tautau = 0` and `w_xx + w_yy + (w e^u)_tautau = 0`.
pub fn toda_residuals(frame: &LeBrunFrame, point: (f64, f64, f64)) -> Result<(f64, f64)> {
    let (x, y, tau) = point;
    check_tau(tau)?;
    let cx = Jet::<1>::constant(x);
    let cy = Jet::<1>::constant(y);
    let ct = Jet::<1>::constant(tau);
    let (vx, vy, vt) = (Jet::<3>::variable(x), Jet::<3>::variable(y), Jet::<3>::variable(tau));
    let lift = |j: Jet<1>| Jet::<3>::constant(j.value());
    let u_xx = frame.u(vx, lift(cy), lift(ct)).derivative(2);
    let u_yy = frame.u(lift(cx), vy, lift(ct)).derivative(2);
    let eu_tt = frame.u(lift(cx), lift(cy), vt).exp().derivative(2);
    // w depends on tau only.
    let weu_tt = (frame.w(vt) * frame.u(lift(cx), lift(cy), vt).exp()).derivative(2);
    Ok((u_xx + u_yy + eu_tt, weu_tt))
}

#[derive(Clone, Debug, Serialize)]
pub struct TodaScaleResolution {
    pub k: u32,
    pub beta: f64,
    /// `(scale, max |res_u|, max |res_w|)` per candidate.
    pub candidates: Vec<(f64, f64, f64)>,
    pub best_scale: f64,
}

/// Picks the denominator scale with the smallest maximal residual over `grid`.
pub fn resolve_toda_scale(
    k: u32,
    beta: f64,
    candidates: &[f64],
    grid: &[(f64, f64, f64)],
) -> Result<TodaScaleResolution> {
    if candidates.is_empty() || grid.is_empty() {
        return Err(Error::Precondition("candidates and grid must be non-empty".into()));
    }
    let mut rows = Vec::new();
    for &c in candidates {
        let frame = LeBrunFrame::new(k, beta, c);
        let (mut mu, mut mw) = (0.0f64, 0.0f64);
        for &pt in grid {
            let (ru, rw) = toda_residuals(&frame, pt)?;
            mu = mu.max(ru.abs());
            mw = mw.max(rw.abs());
        }
        rows.push((c, mu, mw));
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.1.max(a.2).total_cmp(&b.1.max(b.2)))
        .map(|r| r.0)
        .unwrap();
    Ok(TodaScaleResolution {
        k,
        beta,
        candidates: rows,
        best_scale: best,
    })
}
