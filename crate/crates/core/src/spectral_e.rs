//! Laplace spectrum of `CP^{n-1}` and the kernel of `D*D = 1/2 Delta^2 + Delta` on it.
//!
//! Eigenvalues are normalized so that the first nonzero level is `2`; level `j` has
//! `lambda_j = 2 j (j + m) / (m + 1)` with `m = n - 1`, and multiplicity
//! `(2j + m) / m * C(j + m - 1, m - 1)^2`.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumLevel {
    pub j: u32,
    /// Exact eigenvalue as `p/q`.
    pub eigenvalue: String,
    pub eigenvalue_f64: f64,
    pub multiplicity: u64,
    /// `1/2 lambda^2 - lambda`, the eigenvalue of `D*D` on the level.
    pub lich_eigenvalue: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseSpectrum {
    pub n: usize,
    pub entries: Vec<SpectrumLevel>,
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Exact `lambda_j`.
pub fn eigenvalue(n: usize, j: u32) -> BigRational {
    let m = (n - 1) as i64;
    let j = j as i64;
    BigRational::new(BigInt::from(2 * j * (j + m)), BigInt::from(m + 1))
}

/// `D*D` eigenvalue `1/2 lambda^2 - lambda` on a Laplace eigenspace.
pub fn lich_eigenvalue(lambda: &BigRational) -> BigRational {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    &half * lambda * lambda - lambda
}

/// Dimension of level `j`.
pub fn multiplicity(n: usize, j: u32) -> u64 {
    let m = (n - 1) as u64;
    let j = j as u64;
    if j == 0 {
        return 1;
    }
    let c = binomial(j + m - 1, m - 1);
    let v = BigInt::from(2 * j + m) * &c * &c / BigInt::from(m);
    v.to_u64().expect("multiplicity fits in u64")
}

pub fn cp_spectrum(n: usize, j_max: u32) -> Result<BaseSpectrum> {
    if n < 2 {
        return Err(Error::Domain(format!("the base CP^(n-1) needs n >= 2, got {n}")));
    }
    if j_max < 1 {
        return Err(Error::Domain("j_max must be at least 1".into()));
    }
    let entries = (0..=j_max)
        .map(|j| {
            let lam = eigenvalue(n, j);
            SpectrumLevel {
                j,
                eigenvalue: lam.to_string(),
                eigenvalue_f64: lam.to_f64().unwrap(),
                multiplicity: multiplicity(n, j),
                lich_eigenvalue: lich_eigenvalue(&lam).to_string(),
            }
        })
        .collect();
    Ok(BaseSpectrum { n, entries })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub n: usize,
    /// Dimension of the first eigenspace, the non-constant part of the kernel.
    pub nonconstant_dim: u64,
    /// Including the constants.
    pub dim_with_constants: u64,
    /// Levels whose `D*D` eigenvalue vanishes.
    pub levels: Vec<u32>,
    pub basis: String,
}

/// Kernel of `D*D` on `CP^{n-1}`, counted exactly over the levels where `1/2 lambda^2 - lambda = 0`.
pub fn ker_lichnerowicz_e(n: usize) -> Result<KernelReport> {
    if n < 2 {
        return Err(Error::Domain(format!("the base CP^(n-1) needs n >= 2, got {n}")));
    }
    // lambda_j >= 2 j grows past 2 at j = 2, so two levels suffice.
    let levels: Vec<u32> = (0..=2u32)
        .filter(|&j| lich_eigenvalue(&eigenvalue(n, j)).is_zero())
        .collect();
    let nonconstant_dim: u64 = levels.iter().filter(|&&j| j > 0).map(|&j| multiplicity(n, j)).sum();
    let dim_with_constants: u64 = levels.iter().map(|&j| multiplicity(n, j)).sum();
    Ok(KernelReport {
        n,
        nonconstant_dim,
        dim_with_constants,
        levels,
        basis: "constants + first eigenspace (restrictions of hermitian forms with zero trace)".into(),
    })
}
