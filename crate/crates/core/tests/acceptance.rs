//! Acceptance suite: one PASS/FAIL line per criterion. Exits 1 if any criterion fails.

use cuspkahler::asymptotics::{
    expected_ae_exponent, fit_ae_remainder, fit_cusp_coefficient, DEFAULT_AE_WINDOW, DEFAULT_CUSP_WINDOW, MIN_R_SQUARED,
};
use cuspkahler::curvature::{AnalyticPotential, ScaledPotential};
use cuspkahler::cylinder::{fredholm_index, indicial_roots, IndicialProblem};
use cuspkahler::gluing::{
    assemble_glued_potential, biharmonic_exterior, biharmonic_interior, deviation_sweep, make_schedule, region_purity,
    BaseCorrection, HarmonicMode,
};
use cuspkahler::momentum::{
    check_scalar_flat, invert_radius, log_grid, profile_cp1, profile_cpn, profile_family, radial_log_coordinate,
    resolve_toda_scale, toda_residuals, LeBrunFrame, MomentumPotential, MomentumProfile,
};
use cuspkahler::poly::RatPoly;
use cuspkahler::specialfn::lambert_w0;
use cuspkahler::spectral_e::{cp_spectrum, eigenvalue, ker_lichnerowicz_e, lich_eigenvalue};
use cuspkahler::topo::{avg_scalar_solution, strictly_decreasing_on_grid, KahlerClassData};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Outcome = Result<String, String>;

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1_scalar_flat() -> Outcome {
    let start = Instant::now();
    let grid = log_grid(1e-2, 1e2, 200);
    let (mut worst_res, mut worst_oracle) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for n in 2..=4 {
        for k in 1..=3 {
            for beta in [0.0, 0.5, 1.0] {
                let rep = check_scalar_flat(&profile_family(n, k, beta).map_err(err)?, &grid).map_err(err)?;
                worst_res = worst_res.max(rep.max_residual);
                worst_oracle = worst_oracle.max(rep.max_oracle_difference);
                if rep.max_residual > 1e-12 || rep.max_oracle_difference > 1e-6 {
                    failures.push(format!("(n={n},k={k},beta={beta})"));
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "27 profiles, max residual {worst_res:.2e}, max oracle diff {worst_oracle:.2e}, {elapsed:.2}s{}",
        if failures.is_empty() {
            String::new()
        } else {
            format!(", failing {}", failures.join(" "))
        }
    );
    ensure(failures.is_empty() && elapsed < 30.0, detail)
}

fn c2_burns_simanca() -> Outcome {
    let p = profile_cp1(1, 1.0).map_err(err)?;
    let (quot, rem) = p.simplify_phi();
    let target = RatPoly::new(vec![rat(0, 1), rat(2, 1)]);
    let exact = quot == target && rem.is_zero();
    let samples = log_grid(1e-3, 1e3, 61);
    let float_err = samples
        .iter()
        .map(|&t| (p.phi(t) - 2.0 * t).abs() / t)
        .fold(0.0, f64::max);
    ensure(
        exact,
        format!(
            "phi = {} + ({})/Q exactly, float evaluation within {float_err:.1e} relative",
            quot.display("tau"),
            rem.display("tau")
        ),
    )
}

fn c3_lambert() -> Outcome {
    let xs = log_grid(1e-6, 1e12, 2000);
    let mut worst = 0.0f64;
    let mut sandwich = true;
    for &x in &xs {
        let v = lambert_w0(x).map_err(err)?;
        worst = worst.max((v.w * v.w.exp() - x).abs() / x);
        if x >= 1e6 {
            let l = x.ln();
            sandwich &= l - l.ln() <= v.w && v.w <= l;
        }
    }
    ensure(
        worst <= 1e-14 && sandwich,
        format!(
            "max relative residual {worst:.2e} over {} points, sandwich {sandwich}",
            xs.len()
        ),
    )
}

fn c4_round_trip() -> Outcome {
    let taus = log_grid(1e-3, 1e3, 61);
    let mut worst = 0.0f64;
    for (k, beta) in [(1, 0.0), (2, 0.5), (3, 1.0)] {
        let p = profile_cp1(k, beta).map_err(err)?;
        for &t in &taus {
            let r = radial_log_coordinate(&p, t, 1.0).map_err(err)?;
            let back = invert_radius(&p, r).map_err(err)?;
            worst = worst.max((back - t).abs() / t);
        }
    }
    ensure(worst <= 1e-10, format!("max relative error {worst:.2e}"))
}

fn c5_toda() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid: Vec<(f64, f64, f64)> = (0..1000)
        .map(|_| {
            (
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                10f64.powf(rng.random_range(-2.0..2.0)),
            )
        })
        .collect();
    let mut worst = 0.0f64;
    let mut scales = Vec::new();
    for k in 1..=2 {
        for beta in [0.0, 0.5, 1.0] {
            let res = resolve_toda_scale(k, beta, &[2.0, 4.0], &grid).map_err(err)?;
            scales.push(res.best_scale);
            let frame = LeBrunFrame::new(k, beta, res.best_scale);
            for &pt in &grid {
                let (ru, rw) = toda_residuals(&frame, pt).map_err(err)?;
                worst = worst.max(ru.abs()).max(rw.abs());
            }
        }
    }
    ensure(
        worst <= 1e-8,
        format!("max residual {worst:.2e} on 1000 points, selected scales {scales:?}"),
    )
}

fn c6_ae() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in 2..=4 {
        for k in 1..=3 {
            let fit = fit_ae_remainder(&profile_family(n, k, 0.0).map_err(err)?, DEFAULT_AE_WINDOW).map_err(err)?;
            let want = expected_ae_exponent(n);
            let good = (fit.exponent - want).abs() <= 0.05 && fit.r_squared >= MIN_R_SQUARED;
            ok &= good;
            if k == 1 || !good {
                parts.push(format!(
                    "n={n} k={k}: {:.4} (want {want}, r2 {:.6})",
                    fit.exponent, fit.r_squared
                ));
            }
        }
    }
    ensure(ok, parts.join("; "))
}

fn c7_cusp() -> Outcome {
    let cases: [(usize, MomentumProfile, f64); 2] = [
        (2, profile_cp1(1, 0.0).map_err(err)?, 1.0),
        (3, profile_cpn(3, -1).map_err(err)?, 1.0 / 3.0),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, p, want) in &cases {
        let fit = fit_cusp_coefficient(p, DEFAULT_CUSP_WINDOW).map_err(err)?;
        let rel = (fit.coefficient - want).abs() / want;
        ok &= rel <= 0.01;
        parts.push(format!(
            "n={n}: {:.6} (want {want:.6}, rel err {rel:.1e})",
            fit.coefficient
        ));
    }
    ensure(ok, parts.join("; "))
}

fn c8_gluing() -> Outcome {
    let eps = [0.05, 0.02, 0.01];
    let a = 0.1;
    let phi1 = BaseCorrection::quadratic(a);
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [2usize, 3] {
        let profile = if n == 2 {
            profile_cp1(1, 0.0)
        } else {
            profile_cpn(n, -1)
        }
        .map_err(err)?;
        let model = MomentumPotential::new(&profile).map_err(err)?;
        let outer = AnalyticPotential::new(n, 0.0, move |r| *r + (*r * *r).scale(a));
        let mut pure = true;
        for &e in &eps {
            let g = assemble_glued_potential(make_schedule(e, n).map_err(err)?, phi1.clone(), Some(&profile))
                .map_err(err)?;
            pure &= region_purity(&g, &outer, &ScaledPotential { inner: &model, eps: e })
                .map_err(err)?
                .pass;
        }
        let s_base = -2.0 * a * (n * (n + 1)) as f64;
        let sweep = deviation_sweep(&eps, n, &phi1, Some(&profile), s_base).map_err(err)?;
        let margin = sweep.rows.iter().map(|r| r.min_margin).fold(f64::INFINITY, f64::min);
        let devs: Vec<String> = sweep.rows.iter().map(|r| format!("{:.3e}", r.sup_deviation)).collect();
        ok &= margin > 0.0 && pure && sweep.strictly_decreasing;
        parts.push(format!(
            "n={n}: min margin {margin:.3e}, purity {pure}, sup dev [{}] decreasing {}",
            devs.join(", "),
            sweep.strictly_decreasing
        ));
    }
    ensure(ok, parts.join("; "))
}

fn c9_indicial() -> Outcome {
    let sp = indicial_roots(&IndicialProblem::from_eigenvalue(0.0));
    let r5 = 5f64.sqrt();
    let want = [(1.0 - r5) / 2.0, 0.0, 1.0, (1.0 + r5) / 2.0];
    let mut got: Vec<f64> = sp.roots.iter().map(|z| z.re).collect();
    got.sort_by(f64::total_cmp);
    let imag = sp.roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let root_err = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(imag, f64::max);
    let i2 = fredholm_index(2, 0.25, 0.5).map_err(err)?;
    let i3 = fredholm_index(3, 0.25, 0.5).map_err(err)?;
    ensure(
        root_err <= 1e-10 && i2.index == -2 && i3.index == -7,
        format!(
            "root error {root_err:.1e}; index n=2: {}+({})={}, n=3: {}+({})={}",
            i2.ae_local, i2.cusp_local, i2.index, i3.ae_local, i3.cusp_local, i3.index
        ),
    )
}

fn c10_spectrum() -> Outcome {
    let mut ok = true;
    let mut mult = Vec::new();
    for n in 2..=6usize {
        let s = cp_spectrum(n, 2).map_err(err)?;
        let m1 = s.entries[1].multiplicity;
        let ker = ker_lichnerowicz_e(n).map_err(err)?;
        ok &= m1 == (n * n - 1) as u64 && ker.nonconstant_dim == m1;
        ok &= lich_eigenvalue(&eigenvalue(n, 1)).is_zero() && !lich_eigenvalue(&eigenvalue(n, 2)).is_zero();
        mult.push(m1.to_string());
    }
    ensure(
        ok,
        format!(
            "m_1 for n=2..6: {}; 1/2 lambda_1^2 - lambda_1 = 0 exactly",
            mult.join(", ")
        ),
    )
}

fn c11_topology() -> Outcome {
    let d = KahlerClassData::new(2, rat(0, 1), rat(1, 1), rat(1, 10)).map_err(err)?;
    let s = avg_scalar_solution(&d).map_err(err)?;
    let mut ok = s == rat(-400, 9999);
    let mut limits = true;
    let mut decreasing = true;
    for n in 2..=4usize {
        for (c1, vol) in [(0, 1), (3, 2), (7, 5), (-2, 3)] {
            let base = KahlerClassData::new(n, rat(c1, 1), rat(vol, 1), rat(0, 1)).map_err(err)?;
            limits &= avg_scalar_solution(&base).map_err(err)? == rat(n as i64 * c1, vol);
            if c1 >= 0 {
                let grid: Vec<BigRational> = (1..=40).map(|j| rat(j, 100)).collect();
                decreasing &= strictly_decreasing_on_grid(&base, &grid).map_err(err)?;
            }
        }
    }
    ok &= limits && decreasing;
    ensure(
        ok,
        format!("s_sol = {s}, eps -> 0 limits exact {limits}, decreasing on 1/100..40/100 {decreasing}"),
    )
}

fn c12_biharmonic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    let mut biharmonic = true;
    let mut confined = true;
    for n in 2..=5usize {
        for trial in 0..20 {
            let mut h = Vec::new();
            let mut k = Vec::new();
            for d in 0..=8u32 {
                for index in 0..2 {
                    h.push(HarmonicMode {
                        degree: d,
                        index,
                        coeff: rng.random_range(-1.0..1.0),
                    });
                    let kc = if d == 0 && trial % 2 == 0 {
                        0.0
                    } else {
                        rng.random_range(-1.0..1.0)
                    };
                    k.push(HarmonicMode {
                        degree: d,
                        index,
                        coeff: kc,
                    });
                }
            }
            let int = biharmonic_interior(n, &h, &k, 8).map_err(err)?;
            worst = worst.max(int.boundary_mismatch(&h, &k));
            biharmonic &= int.is_biharmonic();
            let k_ext: Vec<HarmonicMode> = k
                .iter()
                .map(|m| HarmonicMode {
                    coeff: if m.degree == 0 { 0.0 } else { m.coeff },
                    ..*m
                })
                .collect();
            let ext = biharmonic_exterior(n, &h, &k_ext, 8).map_err(err)?;
            worst = worst.max(ext.boundary_mismatch(&h, &k_ext));
            biharmonic &= ext.is_biharmonic();
            let big_n = 2 * n as i64;
            confined &= ext.modes.iter().filter(|m| m.degree == 0).all(|m| {
                m.terms
                    .iter()
                    .all(|&(p, c)| c == 0.0 || p == 2 - big_n || p == 4 - big_n)
            });
        }
    }
    ensure(
        biharmonic && worst <= 1e-10 && confined,
        format!("Delta^2 H = 0 in every mode {biharmonic}, max mismatch {worst:.1e}, degree-0 span {confined}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("scalar flatness", c1_scalar_flat),
        ("Burns-Simanca profile", c2_burns_simanca),
        ("Lambert W", c3_lambert),
        ("radius round trip", c4_round_trip),
        ("Toda residuals", c5_toda),
        ("AE exponent", c6_ae),
        ("cusp coefficient", c7_cusp),
        ("gluing", c8_gluing),
        ("indicial roots and index", c9_indicial),
        ("spectrum", c10_spectrum),
        ("topology", c11_topology),
        ("biharmonic extensions", c12_biharmonic),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
