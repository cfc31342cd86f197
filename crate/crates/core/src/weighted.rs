//! Doubly weighted sup norms on sampled functions: `e^{eta t}` at the cusp, with
//! `t = log(lambda - log |z|^2)`, and `r^{-delta}` rescaled dyadic windows at the
//! Euclidean end.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Read;

/// `t = log(lambda - log z_sq)`.
pub fn t_coordinate(z_sq: f64, lambda: f64) -> Result<f64> {
    if !(z_sq > 0.0) {
        return Err(Error::Domain(format!("|z|^2 must be positive, got {z_sq}")));
    }
    let arg = lambda - z_sq.ln();
    if !(arg > 0.0) {
        return Err(Error::Domain(format!(
            "lambda - log |z|^2 = {arg} is not positive (z_sq = {z_sq}, lambda = {lambda})"
        )));
    }
    Ok(arg.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleRegion {
    Cusp,
    Annulus,
    Ae,
}

impl std::str::FromStr for SampleRegion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cusp" => Ok(SampleRegion::Cusp),
            "annulus" => Ok(SampleRegion::Annulus),
            "ae" => Ok(SampleRegion::Ae),
            other => Err(Error::Domain(format!("unknown region {other:?}"))),
        }
    }
}

/// One sample: `t` on the cusp, `r` at the Euclidean end (unused on the annulus), and
/// the value followed by derivatives in that coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub region: SampleRegion,
    pub coordinate: f64,
    pub derivatives: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSampleSet {
    pub samples: Vec<Sample>,
    pub eta: f64,
    pub delta: f64,
}

impl WeightedSampleSet {
    pub fn new(samples: Vec<Sample>, eta: f64, delta: f64) -> Result<Self> {
        for s in &samples {
            if !s.coordinate.is_finite() {
                return Err(Error::Domain(format!("non-finite coordinate in {s:?}")));
            }
            if s.region == SampleRegion::Ae && s.coordinate < 1.0 {
                return Err(Error::Domain(format!("AE samples need r >= 1, got {}", s.coordinate)));
            }
        }
        Ok(WeightedSampleSet { samples, eta, delta })
    }

    /// Reads rows `region, coordinate, value, d1, ..., dk`; a header row starting with `region` is skipped.
    pub fn from_csv<R: Read>(reader: R, eta: f64, delta: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut samples = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::IncompleteData(format!("csv: {e}")))?;
            if line == 0 && rec.get(0).is_some_and(|f| f.eq_ignore_ascii_case("region")) {
                continue;
            }
            if rec.len() < 3 {
                return Err(Error::IncompleteData(format!(
                    "row {} has {} fields",
                    line + 1,
                    rec.len()
                )));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .parse()
                    .map_err(|_| Error::IncompleteData(format!("row {}: bad number {:?}", line + 1, &rec[i])))
            };
            let region = rec[0].parse()?;
            let coordinate = num(1)?;
            let derivatives = (2..rec.len()).map(num).collect::<Result<Vec<f64>>>()?;
            samples.push(Sample {
                region,
                coordinate,
                derivatives,
            });
        }
        WeightedSampleSet::new(samples, eta, delta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedNorm {
    pub cusp: f64,
    pub annulus: f64,
    pub ae: f64,
    /// Largest of the three parts.
    pub total: f64,
    /// `(2^m, window norm)` for each dyadic window `[2^m, 2^{m+1})` holding AE samples.
    pub ae_windows: Vec<(f64, f64)>,
    /// Weighted cusp values sorted by `t`.
    pub cusp_profile: Vec<(f64, f64)>,
}

impl WeightedNorm {
    /// Finite-range proxy for finiteness: the weighted cusp values do not grow along `t`
    /// and the AE window norms do not grow along `r`.
    pub fn bounded_trend(&self, rel_tol: f64) -> bool {
        let nonincreasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel_tol) + f64::MIN_POSITIVE);
        let cusp: Vec<f64> = self.cusp_profile.iter().map(|p| p.1).collect();
        let ae: Vec<f64> = self.ae_windows.iter().map(|p| p.1).collect();
        nonincreasing(&cusp) && nonincreasing(&ae)
    }
}

fn max_abs(d: &[f64]) -> f64 {
    d.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn weighted_norm(set: &WeightedSampleSet, order: usize) -> Result<WeightedNorm> {
    if let Some(s) = set.samples.iter().find(|s| s.derivatives.len() <= order) {
        return Err(Error::IncompleteData(format!(
            "sample at {:?} {} has {} entries, order {order} needs {}",
            s.region,
            s.coordinate,
            s.derivatives.len(),
            order + 1
        )));
    }
    let mut cusp_profile = Vec::new();
    let mut annulus = 0.0f64;
    let mut windows: BTreeMap<i32, f64> = BTreeMap::new();
    for s in &set.samples {
        let d = &s.derivatives[..=order];
        match s.region {
            SampleRegion::Cusp => cusp_profile.push((s.coordinate, (set.eta * s.coordinate).exp() * max_abs(d))),
            SampleRegion::Annulus => annulus = annulus.max(max_abs(d)),
            SampleRegion::Ae => {
                // The j-th derivative of f_r(z) = r^{-delta} f(r z) at |z| ~ 1.
                let r = s.coordinate;
                let v = d
                    .iter()
                    .enumerate()
                    .map(|(j, x)| r.powf(j as f64 - set.delta) * x.abs())
                    .fold(0.0f64, f64::max);
                let m = r.log2().floor() as i32;
                let e = windows.entry(m).or_insert(0.0);
                *e = e.max(v);
            }
        }
    }
    cusp_profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cusp = cusp_profile.iter().fold(0.0f64, |m, p| m.max(p.1));
    let ae_windows: Vec<(f64, f64)> = windows.into_iter().map(|(m, v)| (2f64.powi(m), v)).collect();
    let ae = ae_windows.iter().fold(0.0f64, |m, p| m.max(p.1));
    Ok(WeightedNorm {
        cusp,
        annulus,
        ae,
        total: cusp.max(annulus).max(ae),
        ae_windows,
        cusp_profile,
    })
}

/// The weighted sup norm up to derivative order `order`.
pub fn weighted_sup(set: &WeightedSampleSet, order: usize) -> Result<f64> {
    Ok(weighted_norm(set, order)?.total)
}

/// Samples of `f(t) = e^{-a t}` and its `t`-derivatives on the cusp.
pub fn cusp_exponential_samples(a: f64, ts: &[f64], order: usize) -> Vec<Sample> {
    ts.iter()
        .map(|&t| Sample {
            region: SampleRegion::Cusp,
            coordinate: t,
            derivatives: (0..=order).map(|j| (-a).powi(j as i32) * (-a * t).exp()).collect(),
        })
        .collect()
}

/// Samples of `f(r) = r^p` and its `r`-derivatives at the Euclidean end.
pub fn ae_power_samples(p: f64, rs: &[f64], order: usize) -> Vec<Sample> {
    rs.iter()
        .map(|&r| {
            let mut coef = 1.0;
            let derivatives = (0..=order)
                .map(|j| {
                    let v = coef * r.powf(p - j as f64);
                    coef *= p - j as f64;
                    v
                })
                .collect();
            Sample {
                region: SampleRegion::Ae,
                coordinate: r,
                derivatives,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn t_examples() {
        let lam = 2.0;
        assert!((t_coordinate((lam - E).exp(), lam).unwrap() - 1.0).abs() < 1e-15);
        assert!(t_coordinate((lam - 1.0).exp(), lam).unwrap().abs() < 1e-15);
        assert!(t_coordinate(1e-300, lam).unwrap() > 6.0);
        assert!(t_coordinate(0.0, lam).is_err());
        assert!(t_coordinate(100.0, 2.0).is_err());
    }

    #[test]
    fn t_is_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 1..50 {
            let t = t_coordinate(10f64.powi(-k), 2.0).unwrap();
            assert!(t > prev || prev == f64::INFINITY);
            prev = t;
        }
        let a = t_coordinate(0.1, 2.0).unwrap();
        let b = t_coordinate(0.2, 2.0).unwrap();
        assert!(b < a);
    }

    #[test]
    fn constant_function() {
        let mut samples = vec![
            Sample {
                region: SampleRegion::Cusp,
                coordinate: 3.0,
                derivatives: vec![1.0, 0.0],
            },
            Sample {
                region: SampleRegion::Annulus,
                coordinate: 0.5,
                derivatives: vec![1.0, 0.0],
            },
        ];
        samples.extend(ae_power_samples(0.0, &[1.0, 4.0, 64.0], 1));
        let set = WeightedSampleSet::new(samples, 0.0, 0.0).unwrap();
        assert_eq!(weighted_sup(&set, 1).unwrap(), 1.0);
    }

    #[test]
    fn exact_cusp_cancellation() {
        let ts: Vec<f64> = (1..40).map(|i| i as f64).collect();
        let set = WeightedSampleSet::new(cusp_exponential_samples(1.0, &ts, 0), 1.0, 0.0).unwrap();
        let v = weighted_sup(&set, 0).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ae_homogeneity() {
        let rs: Vec<f64> = (0..20).map(|m| 2f64.powi(m) * 1.5).collect();
        for &p in &[-2.0, 0.5, 1.0] {
            let set = WeightedSampleSet::new(ae_power_samples(p, &rs, 2), 0.0, p).unwrap();
            let norm = weighted_norm(&set, 2).unwrap();
            let first = norm.ae_windows[0].1;
            for w in &norm.ae_windows {
                assert!((w.1 - first).abs() < 1e-12 * first);
            }
        }
    }

    #[test]
    fn missing_derivatives() {
        let set = WeightedSampleSet::new(cusp_exponential_samples(1.0, &[1.0], 1), 0.0, 0.0).unwrap();
        assert!(matches!(weighted_sup(&set, 2), Err(Error::IncompleteData(_))));
    }

    #[test]
    fn csv_round_trip() {
        let text = "region,coordinate,value,d1\ncusp,2.0,0.5,-0.5\nae, 4.0, 16.0, 8.0\nannulus,0.3,1.0,0.0\n";
        let set = WeightedSampleSet::from_csv(text.as_bytes(), 0.0, 2.0).unwrap();
        assert_eq!(set.samples.len(), 3);
        assert_eq!(set.samples[1].region, SampleRegion::Ae);
        let norm = weighted_norm(&set, 1).unwrap();
        // r^2 at r = 4: r^{-2} f = 1 and r^{-1} f' = 2.
        assert_eq!(norm.ae, 2.0);
        assert!(WeightedSampleSet::from_csv("ae,0.5,1.0\n".as_bytes(), 0.0, 0.0).is_err());
        assert!(WeightedSampleSet::from_csv("moon,1.0,1.0\n".as_bytes(), 0.0, 0.0).is_err());
        assert!(WeightedSampleSet::from_csv("cusp,1.0\n".as_bytes(), 0.0, 0.0).is_err());
    }

    #[test]
    fn larger_eta_needs_more_decay() {
        let ts: Vec<f64> = (1..60).map(|i| i as f64 * 0.5).collect();
        for &a in &[0.5, 1.0, 2.0] {
            for &eta in &[a - 0.25, a, a + 0.25] {
                let set = WeightedSampleSet::new(cusp_exponential_samples(a, &ts, 1), eta, 0.0).unwrap();
                let norm = weighted_norm(&set, 1).unwrap();
                assert_eq!(norm.bounded_trend(1e-12), eta <= a, "a={a} eta={eta}");
            }
        }
    }
}
