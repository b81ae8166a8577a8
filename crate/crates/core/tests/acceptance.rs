//! Acceptance criteria 1-9. Each test writes one PASS/FAIL line to stderr
//! (bypassing libtest capture) and then asserts.

use muskat_core::besov::{besov_norm, NormParams};
use muskat_core::gamma::{
    gamma_closed_form, gamma_oracle, gamma_property_check, gamma_scale, gamma_special_value_check, GammaKernel, Property,
    QuadratureSpec,
};
use muskat_core::harness::{run_ledger, to_csv, to_json, ExperimentConfig};
use muskat_core::iterate::IterateConfig;
use muskat_core::oracle::{compare_with_oracle, sample_points, OracleSpec};
use muskat_core::sequences::{
    enumerate_tuples, generate_family, norm_upper_bound_check, size_sums, sum_lemma_check, SequenceFamily, TupleMode,
    Verdict,
};
use muskat_core::spline::{bspline_bounds_check, convolve_indicators, semigroup_apply, symmetric_bumps};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

fn report(n: u32, pass: bool, detail: &str) {
    let line = format!("acceptance criterion {n}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn entry(rng: &mut ChaCha8Rng, lo: f64) -> f64 {
    loop {
        let x: f64 = rng.gen_range(-50.0..=50.0);
        if x.abs() >= lo {
            return x;
        }
    }
}

fn tuples(k: usize, count: usize, lo: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..2 * k + 1).map(|_| entry(&mut rng, lo)).collect()).collect()
}

#[test]
fn criterion_1_closed_form_vs_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for k in [1, 2] {
        let kernel = GammaKernel::new(k).unwrap();
        let errs: Vec<f64> = tuples(k, 1000, 0.1, 100 + k as u64)
            .par_iter()
            .map(|a| {
                let c = gamma_closed_form(&kernel, a).unwrap();
                let o = gamma_oracle(&kernel, a).unwrap();
                (c - o).abs() / o.abs().max(gamma_scale(k, a))
            })
            .collect();
        failures += errs.iter().filter(|e| **e > 1e-5).count();
        worst = errs.iter().fold(worst, |m, e| m.max(*e));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures == 0 && secs < 120.0;
    report(1, pass, &format!("2000 tuples (1000 per k), max rel err {worst:.2e}, {failures} over 1e-5, {secs:.1} s"));
    assert!(pass);
}

#[test]
fn criterion_2_property_suite() {
    let mut failures = Vec::new();
    let mut worst_c = [0.0f64; 2];
    for k in [1usize, 2] {
        let kernel = GammaKernel::new(k).unwrap();
        let seed = 200 + k as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, a) in tuples(k, 1000, 1e-9, seed).iter().enumerate() {
            let c = rng.gen_range(-5.0..5.0);
            let props = [
                Property::Scaling(c),
                Property::Permutation { samples: 200, seed: i as u64 },
                Property::ProductBound,
                Property::RootBound,
            ];
            for p in props {
                let r = gamma_property_check(&kernel, a, p).unwrap();
                if !r.pass {
                    failures.push(format!("k={k} {p:?} at {a:?}: residual {:e}", r.residual));
                }
            }
            let same: Vec<f64> = a.iter().map(|x| x.abs()).collect();
            for s in [same.clone(), same.iter().map(|x| -x).collect()] {
                let r = gamma_property_check(&kernel, &s, Property::SameSign).unwrap();
                if !r.pass {
                    failures.push(format!("k={k} same-sign at {s:?}: residual {:e}", r.residual));
                }
            }
        }
        // perturbation on 200 base tuples with |A_i| in (2, 50]
        for i in 0..200 {
            let a: Vec<f64> = (0..2 * k + 1)
                .map(|_| {
                    let m: f64 = rng.gen_range(2.0 + 1e-9..=50.0);
                    if rng.gen_bool(0.5) { m } else { -m }
                })
                .collect();
            let r = gamma_property_check(&kernel, &a, Property::Perturbation { samples: 20, seed: i }).unwrap();
            if !r.pass {
                failures.push(format!("k={k} perturbation at {a:?}"));
            }
            worst_c[k - 1] = worst_c[k - 1].max(r.residual);
        }
    }
    let pass = failures.is_empty();
    report(
        2,
        pass,
        &format!(
            "scaling, permutation, bounds, same-sign on 1000 tuples per k, perturbation on 200; {} failures; measured perturbation constant C(1) = {:.3e}, C(2) = {:.3e}",
            failures.len(),
            worst_c[0],
            worst_c[1]
        ),
    );
    assert!(pass, "{:?}", &failures[..failures.len().min(5)]);
}

#[test]
fn criterion_3_special_value() {
    let mut worst = 0.0f64;
    let mut ok = true;
    for ell in [1usize, 2] {
        let bound_unit = (2.0 * PI).powi(2 * ell as i32 + 1);
        for m in [2 * ell + 3, 2 * ell + 5] {
            for kv in [1e2, 1e3, 1e4] {
                let r = gamma_special_value_check(ell, kv, m as f64).unwrap();
                let ratio = r / (bound_unit * m as f64);
                worst = worst.max(ratio);
                ok &= ratio <= 1.0;
            }
        }
    }
    report(3, ok, &format!("12 sweep points, worst residual / bound = {worst:.4}"));
    assert!(ok);
}

/// Local B-spline by repeated numerical convolution with the unit bump:
/// cumulative trapezoid sums, window shifted by whole grid cells. The first
/// product χ∗χ is sampled as the triangle max(2 - |y|, 0).
fn numeric_bspline(n: usize, h: f64) -> (f64, Vec<f64>) {
    let lo = -(n as f64) - 1.0;
    let len = ((2.0 * (n as f64 + 1.0)) / h).round() as usize + 1;
    let x = |i: usize| lo + i as f64 * h;
    if n == 1 {
        return (lo, (0..len).map(|i| if x(i).abs() <= 1.0 + 1e-12 { 1.0 } else { 0.0 }).collect());
    }
    let w = (1.0 / h).round() as i64;
    let mut f: Vec<f64> = (0..len).map(|i| (2.0 - x(i).abs()).max(0.0)).collect();
    for _ in 2..n {
        let mut cum = vec![0.0; len];
        for i in 1..len {
            cum[i] = cum[i - 1] + 0.5 * h * (f[i] + f[i - 1]);
        }
        let at = |i: i64| cum[i.clamp(0, len as i64 - 1) as usize];
        f = (0..len as i64).map(|i| at(i + w) - at(i - w)).collect();
    }
    (lo, f)
}

#[test]
fn criterion_4_bspline_exactness() {
    let h = 1e-3;
    let mut worst = 0.0f64;
    let mut bounds_ok = true;
    let mut mass_ok = true;
    let sets: [&[f64]; 5] = [&[0.5], &[0.0, 1.25], &[5.0, -2.0, 4.0], &[0.3, -0.7, 1.1, 2.0], &[1.0, -1.0, 0.5, 0.25, -3.0]];
    for c in sets {
        let b = convolve_indicators(c).unwrap();
        let (lo, f) = numeric_bspline(c.len(), h);
        for (i, v) in f.iter().enumerate() {
            let y = lo + i as f64 * h;
            worst = worst.max((b.eval_local(y) - v).abs());
        }
        bounds_ok &= bspline_bounds_check(&b).pass;
        mass_ok &= b.integral() == 2f64.powi(c.len() as i32);
    }
    let pass = worst <= 1e-6 && bounds_ok && mass_ok;
    report(4, pass, &format!("n = 1..5, max |exact - numeric| = {worst:.2e}, bounds {bounds_ok}, integral = 2^n exactly {mass_ok}"));
    assert!(pass);
}

struct LemmaTally {
    tuples: u64,
    failures: Vec<String>,
    first_failure: Option<String>,
}

fn sweep(f: &SequenceFamily, k: usize, tally: &mut LemmaTally, label: &str) -> Vec<usize> {
    // per-index counts of Σc = ±M among diagonal tuples, and the total
    let span = f.indices().count();
    let mut per_index = vec![0usize; span + 1];
    for t in enumerate_tuples(f, k, TupleMode::All).unwrap() {
        tally.tuples += 1;
        let r = sum_lemma_check(f, &t);
        if r.exceptional {
            if t.diagonal {
                per_index[t.indices[0] - f.n] += 1;
            } else {
                per_index[span] += 1;
            }
        }
        for (name, v) in r.verdicts() {
            if v == Verdict::Fail {
                let key = format!("{label} k={k} {name}");
                if tally.first_failure.is_none() {
                    tally.first_failure = Some(format!("{key}: c = {:?}, sum = {}", t.entries.iter().map(|c| c.to_string()).collect::<Vec<_>>(), t.sum));
                }
                if !tally.failures.contains(&key) {
                    tally.failures.push(key);
                }
            }
        }
    }
    per_index
}

#[test]
fn criterion_5_combinatorial_lemmas() {
    let mut tally = LemmaTally { tuples: 0, failures: Vec::new(), first_failure: None };
    let mut classification_ok = true;
    // (ell, q, M) with single-index (delta = 0) and three-index (N = 4, delta = 0.5) families
    for (ell, q, m) in [(1usize, 4.0, 5i64), (2, 8.0, 7)] {
        for delta in [0.0, 0.5] {
            let f = generate_family(ell, 1.0, q, 0.1, delta, m, 4).unwrap();
            let label = format!("ell={ell} indices={}", f.indices().count());
            for k in 1..=ell {
                let counts = sweep(&f, k, &mut tally, &label);
                let want = if k == ell { 2 * (2 * ell + 1) } else { 0 };
                let span = counts.len() - 1;
                classification_ok &= counts[..span].iter().all(|c| *c == want) && counts[span] == 0;
            }
        }
    }
    let pass = tally.failures.is_empty() && classification_ok;
    let detail = format!(
        "{} ordered tuples; Σ=±M classification {}; failing inequalities: [{}]{}",
        tally.tuples,
        if classification_ok { "exact (6 per index at l=1, 10 at l=2, none below l)" } else { "MISMATCH" },
        tally.failures.join(", "),
        tally.first_failure.as_ref().map(|s| format!("; counterexample {s}")).unwrap_or_default()
    );
    report(5, pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_6_oracle_equivalence() {
    let start = Instant::now();
    let xs = sample_points(16, 0.25);
    let c = compare_with_oracle(&[(BigInt::from(5), 1.0)], 1, 0.1, &xs, &IterateConfig::default(), &OracleSpec::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = c.rel_diff <= 1e-4 && secs < 600.0;
    report(6, pass, &format!("16 samples, relative difference {:.2e}, {secs:.1} s", c.rel_diff));
    assert!(pass);
}

#[test]
fn criterion_7_norm_engine() {
    let mut identity = 0.0f64;
    let mut ratios = Vec::new();
    for n in [4, 8, 16, 32] {
        let f = generate_family(1, 1.0, 4.0, 0.1, 1.0, 5, n).unwrap();
        let (a, b) = size_sums(&f);
        identity = identity.max((a / b - 1.0).abs());
        ratios.push(norm_upper_bound_check(&f).unwrap());
    }
    let top = ratios.iter().cloned().fold(0.0, f64::max);
    let bottom = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let bounded = top.is_finite() && top <= 2.0 * bottom;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = NormParams::new(1.0 / 3.0, 1.0, 4.0).unwrap();
    let quad = QuadratureSpec::default();
    let mut contractions = 0;
    let mut worst_gain = 0.0f64;
    for _ in 0..20 {
        let bumps: Vec<(BigInt, f64)> = (0..rng.gen_range(1..5))
            .map(|_| (BigInt::from(rng.gen_range(2..400i64)), rng.gen_range(0.01..2.0)))
            .collect();
        let p = symmetric_bumps(&bumps);
        let t = rng.gen_range(0.0..0.05);
        let before = besov_norm(&p, &params, &quad).unwrap();
        let after = besov_norm(&semigroup_apply(&p, t).unwrap(), &params, &quad).unwrap();
        worst_gain = worst_gain.max(after / before);
        if after <= before * (1.0 + 1e-12) {
            contractions += 1;
        }
    }
    let pass = identity <= 1e-14 && bounded && contractions == 20;
    report(
        7,
        pass,
        &format!(
            "identity rel err {identity:.1e}; upper-bound ratio over N=4..32 in [{bottom:.4}, {top:.4}]; contraction {contractions}/20 (max gain {worst_gain:.6})"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_ledger_trends() {
    let rep = run_ledger(&ExperimentConfig::default()).unwrap();
    let get = |name: &str| rep.trends.iter().find(|t| t.name == name).unwrap().verdict;
    let required_pass = ["I1 increasing", "I6 decreasing", "I3 margin positive", "J ratio stable"];
    let ok = !rep.failed && required_pass.iter().all(|n| get(n) == Verdict::Pass);
    let lines: Vec<String> = rep.trends.iter().map(|t| format!("{} {:?}", t.name, t.verdict)).collect();
    let ratios: Vec<String> = rep.rows.iter().map(|r| format!("{:.1}", r.ratio_j)).collect();
    report(8, ok, &format!("{}; J ratios [{}]", lines.join(", "), ratios.join(" ")));
    assert!(ok);
}

#[test]
fn criterion_9_determinism() {
    let cfg = ExperimentConfig { sweep: vec![4, 8, 16], ..Default::default() };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let rep = pool.install(|| run_ledger(&cfg)).unwrap();
        (to_csv(&rep), to_json(&rep))
    };
    let a = run(1);
    let b = run(4);
    let c = run(4);
    let pass = a == b && b == c;
    report(9, pass, &format!("CSV {} bytes, JSON {} bytes identical across 1/4/4 threads: {pass}", a.0.len(), a.1.len()));
    assert!(pass);
}
