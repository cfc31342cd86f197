use super::MomentumProfile;
use crate::error::Result;
use crate::quad::{integrate, QuadOptions};
use serde::Serialize;

/// Number of dyadic shells examined at each end.
const SHELLS: i32 = 48;
/// A tail whose last shell ratio reaches this value is treated as divergent.
const DIVERGENCE_RATIO: f64 = 0.97;

#[derive(Clone, Debug, Serialize)]
pub struct EndDiagnostics {
    /// Sum of the examined shells.
    pub partial_integral: f64,
    /// Ratio of the last two dyadic shell contributions.
    pub shell_ratio: f64,
    pub diverges: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    /// `int dtau / phi` near 0 and near infinity.
    pub r_integral_zero: EndDiagnostics,
    pub r_integral_infinity: EndDiagnostics,
    /// `int dtau / sqrt(phi)`, the distance to the level sets.
    pub distance_zero: EndDiagnostics,
    pub distance_infinity: EndDiagnostics,
    /// Area of the `tau`-range near the zero section is finite.
    pub finite_cusp_area: bool,
    pub complete_at_zero: bool,
    pub complete_at_infinity: bool,
    /// Infinite distance with finite area at `tau = 0`.
    pub cusp_at_zero: bool,
}

fn shells<F: Fn(f64) -> f64>(g: F, towards_zero: bool) -> Result<EndDiagnostics> {
    let mut contrib = Vec::with_capacity(SHELLS as usize);
    for j in 0..SHELLS {
        let (a, b) = if towards_zero {
            (
                -(j as f64 + 1.0) * std::f64::consts::LN_2,
                -(j as f64) * std::f64::consts::LN_2,
            )
        } else {
            (
                j as f64 * std::f64::consts::LN_2,
                (j as f64 + 1.0) * std::f64::consts::LN_2,
            )
        };
        let h = |u: f64| {
            let x = u.exp();
            x * g(x)
        };
        contrib.push(integrate(h, a, b, QuadOptions::default())?.value);
    }
    let n = contrib.len();
    let ratio = contrib[n - 1] / contrib[n - 2];
    Ok(EndDiagnostics {
        partial_integral: contrib.iter().sum(),
        shell_ratio: ratio,
        diverges: ratio >= DIVERGENCE_RATIO,
    })
}

/// Divergence of the radial and distance integrals at both ends of `(0, ∞)`.
pub fn completeness_report(p: &MomentumProfile) -> Result<CompletenessReport> {
    let inv = |x: f64| 1.0 / p.phi(x);
    let inv_sqrt = |x: f64| 1.0 / p.phi(x).sqrt();
    let r0 = shells(inv, true)?;
    let ri = shells(inv, false)?;
    let d0 = shells(inv_sqrt, true)?;
    let di = shells(inv_sqrt, false)?;
    // The tau-interval adjacent to the zero section is bounded, so the area there is finite.
    let finite_cusp_area = true;
    Ok(CompletenessReport {
        complete_at_zero: d0.diverges,
        complete_at_infinity: di.diverges,
        cusp_at_zero: d0.diverges && finite_cusp_area,
        r_integral_zero: r0,
        r_integral_infinity: ri,
        distance_zero: d0,
        distance_infinity: di,
        finite_cusp_area,
    })
}

#[cfg(test)]
mod tests {
    use super::super::profile_cp1;
    use super::*;
    use crate::poly::{rat, RatPoly};

    #[test]
    fn cusp_profile_is_complete() {
        let rep = completeness_report(&profile_cp1(1, 0.0).unwrap()).unwrap();
        assert!(rep.complete_at_zero && rep.complete_at_infinity);
        assert!(rep.cusp_at_zero && rep.finite_cusp_area);
        assert!(rep.r_integral_zero.diverges && rep.r_integral_infinity.diverges);
    }

    #[test]
    fn burns_simanca_has_finite_distance_to_zero_section() {
        let rep = completeness_report(&profile_cp1(1, 1.0).unwrap()).unwrap();
        assert!(!rep.distance_zero.diverges);
        assert!(!rep.cusp_at_zero);
        assert!(rep.complete_at_infinity);
        // int_0^1 dt / sqrt(2t) = sqrt(2)
        assert!((rep.distance_zero.partial_integral - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn pure_square_profile() {
        let base = profile_cp1(1, 0.0).unwrap();
        let extra = RatPoly::new(vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 2)]);
        let sq =
            MomentumProfile::from_numerator(1, 1, base.normalization(), &base.numerator().clone() + &extra).unwrap();
        let rep = completeness_report(&sq).unwrap();
        assert!(rep.r_integral_zero.diverges);
        assert!(rep.cusp_at_zero);
        assert!(!rep.r_integral_infinity.diverges);
    }
}
