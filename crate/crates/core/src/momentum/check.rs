use super::{MomentumPotential, MomentumProfile};
use crate::curvature::scalar_curvature_radial;
use crate::error::Result;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SfkRow {
    pub tau: f64,
    pub rho: f64,
    /// Scalar curvature from the momentum formula.
    pub momentum: f64,
    /// Scalar curvature of `i ddbar F(|z|^2)` computed from the potential.
    pub oracle: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SfkReport {
    pub n: usize,
    pub k: u32,
    pub beta: f64,
    pub rows: Vec<SfkRow>,
    pub max_residual: f64,
    pub max_oracle_difference: f64,
}

/// Evaluates both scalar curvature paths on `taus`.
pub fn check_scalar_flat(profile: &MomentumProfile, taus: &[f64]) -> Result<SfkReport> {
    let pot = MomentumPotential::new(profile)?;
    let scale = pot.constants().scale;
    let rows: Result<Vec<SfkRow>> = taus
        .par_iter()
        .map(|&tau| {
            let momentum = profile.scalar_curvature_momentum(tau)?;
            let rho = pot.log_rho(tau)?.exp();
            // The potential carries the metric divided by the base scale.
            let oracle = scalar_curvature_radial(&pot, rho)?.scalar / scale;
            Ok(SfkRow {
                tau,
                rho,
                momentum,
                oracle,
            })
        })
        .collect();
    let rows = rows?;
    let max_residual = rows.iter().fold(0.0f64, |m, r| m.max(r.momentum.abs()));
    let max_oracle_difference = rows.iter().fold(0.0f64, |m, r| m.max((r.momentum - r.oracle).abs()));
    Ok(SfkReport {
        n: profile.dim(),
        k: profile.bundle_k(),
        beta: profile.cone_beta(),
        rows,
        max_residual,
        max_oracle_difference,
    })
}

/// `points` log-uniform values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1) as f64).exp())
            .collect(),
    }
}
