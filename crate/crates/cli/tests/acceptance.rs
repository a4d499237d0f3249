//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any FAIL.

use std::process::Command;
use std::time::{Duration, Instant};

use elo_core::exact::concentration_bound;
use elo_core::fourier::{check_localization, prob_identity, q_asymptotic, q_integral, AsymConstants};
use elo_core::lstar::{even_denominator_ratio, periodicity_probe, scan};
use elo_core::oracle::{grid_vectors, verify_bound_multi, SampleDistribution, Strategy};
use elo_core::pure::{decompose_with, max_over_pure, SubsetProfile};
use elo_core::{FourierParams, NRange, PValue, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde_json::Value;

type Check = Result<String, String>;

/// Number, name, time limit, check.
type Criterion = (u32, &'static str, Duration, fn() -> Check);

fn q(r: i64, s: i64) -> Rational {
    Rational::from((r, s))
}

fn elo(args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_elo"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("elo {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `Pr(Bin(ell, p) - Bin(m, p) = x)` as a double binomial sum.
fn oracle_pmf(ell: u32, m: u32, p: &Rational, x: i64) -> Rational {
    let qq: Rational = 1 - p.clone();
    let mut total = Rational::new();
    for k in 0..=i64::from(m) {
        let j = k + x;
        if j < 0 || j > i64::from(ell) {
            continue;
        }
        let (k, j) = (k as u32, j as u32);
        let c = Integer::from(Integer::binomial_u(m, k)) * Integer::from(Integer::binomial_u(ell, j));
        total += p.clone().pow(k + j) * qq.clone().pow(m - k + ell - j) * c;
    }
    total
}

fn criterion_1() -> Check {
    let v = elo(&["bound", "--n", "4", "--p", "1/2"])?;
    ensure(v["payload"]["prob"] == "3/8", || format!("bound --n 4 gave {}", v["payload"]["prob"]))?;
    for n in (2u32..=12).step_by(2) {
        let expected = Rational::from((Integer::from(Integer::binomial_u(n, n / 2)), Integer::from(1) << n));
        let got = concentration_bound(n, &q(1, 2)).map_err(|e| e.to_string())?.prob;
        ensure(got == expected, || format!("n={n}: {got} != {expected}"))?;
    }
    Ok("prob(4, 1/2) = 3/8; C(n, n/2)/2^n exact for even n in 2..=12".into())
}

fn criterion_2() -> Check {
    let ps = [q(1, 10), q(1, 4), q(1, 3), q(2, 5), q(49, 100), q(2, 3), q(9, 10)];
    for n in (2u32..=16).step_by(2) {
        for p in &ps {
            let r = concentration_bound(n, p).map_err(|e| e.to_string())?;
            ensure((r.ell_star, r.x_star) == (n / 2, 0), || {
                format!("n={n} p={p}: ell*={} x*={}", r.ell_star, r.x_star)
            })?;
        }
    }
    Ok("ell* = n/2, x* = 0 for all even n <= 16 and 7 values of p".into())
}

fn criterion_3() -> Check {
    let ps = [q(1, 10), q(1, 4), q(1, 3), q(1, 2), q(2, 3), q(9, 10)];
    let values = vec![-3, -2, -1, 1, 2, 3];
    let mut grid_vectors_total = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for n in 1..=10usize {
        grid_vectors_total += grid_vectors(n, &values).map_err(|e| e.to_string())?.len();
        let strategies = [
            Strategy::Grid { values: values.clone() },
            Strategy::RandomSample {
                count: 10_000,
                distribution: SampleDistribution::default(),
                seed: 2024,
            },
        ];
        for strategy in &strategies {
            for rep in verify_bound_multi(n, &ps, strategy).map_err(|e| e.to_string())? {
                ensure(rep.pass && rep.violations == 0, || {
                    format!("n={n} p={} {}: {} violations, worst {:?}", rep.p, rep.strategy, rep.violations, rep.worst)
                })?;
                max_excess = max_excess.max(rep.max_observed.to_f64() - rep.bound.to_f64());
            }
        }
    }
    Ok(format!(
        "0 violations over {grid_vectors_total} grid classes and 6e5 random vectors; max observed - bound = {max_excess:.1e} (float tolerance 1e-9)"
    ))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_terms = 0;
    for case in 0..1000 {
        let size = rng.gen_range(1..=8);
        let a: Vec<Rational> = (0..size).map(|_| Rational::from(rng.gen_range(1..=20))).collect();
        let gamma = SubsetProfile::from_multiset(&a).map_err(|e| e.to_string())?;
        let mut bad_intermediate = false;
        let d = decompose_with(&gamma, |g| bad_intermediate |= !g.check_properties().all())
            .map_err(|e| format!("case {case}: {e}"))?;
        let recombined = d.recombine().map_err(|e| e.to_string())?;
        ensure(recombined == gamma, || format!("case {case}: recombination differs"))?;
        ensure(d.total_weight() == 1, || format!("case {case}: weights sum to {}", d.total_weight()))?;
        ensure(!bad_intermediate, || format!("case {case}: intermediate left the class"))?;
        let bound = gamma.support_size() - gamma.index();
        ensure(d.terms.len() <= bound, || format!("case {case}: {} terms > {bound}", d.terms.len()))?;
        max_terms = max_terms.max(d.terms.len());
    }
    Ok(format!("1000 profiles decomposed exactly; at most {max_terms} terms"))
}

fn criterion_5() -> Check {
    let mut cases = 0;
    for total in 0..=6u32 {
        for ell in 0..=total {
            let m = total - ell;
            for p in [q(1, 4), q(1, 3), q(1, 2)] {
                for x in [0i64, 1] {
                    let rep = max_over_pure(ell, m, &p, &Rational::from(x), 8).map_err(|e| e.to_string())?;
                    let best = (-i64::from(m)..=i64::from(ell))
                        .map(|d| oracle_pmf(ell, m, &p, d))
                        .max()
                        .unwrap();
                    ensure(rep.value == best, || format!("ell={ell} m={m} p={p} x={x}: {} != {best}", rep.value))?;
                    ensure(rep.offset.is_some(), || format!("ell={ell} m={m} p={p} x={x}: no offset maximizer"))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} cases: pure maximum equals the binomial-difference maximum, offset attained"))
}

/// `(n, t, p)` grid shared by criteria 6 and 10. `t` has the parity of `n`.
fn fourier_grid() -> Vec<(u32, i64, Rational)> {
    let mut out = Vec::new();
    for n in [5u32, 11, 51, 101, 200] {
        let top = i64::from(n.min(9));
        let ts: Vec<i64> = (0..=top).filter(|t| t % 2 == i64::from(n % 2)).collect();
        for t in ts {
            for p in [q(1, 4), q(1, 3)] {
                out.push((n, t, p));
            }
        }
    }
    out
}

fn floor_tp(t: i64, p: &Rational) -> i64 {
    Rational::from(p * Integer::from(t)).floor().numer().to_i64().unwrap()
}

fn criterion_6() -> Check {
    let mut worst = 0f64;
    let mut count = 0;
    for (n, t, p) in fourier_grid() {
        let ell = ((i64::from(n) + t) / 2) as u32;
        let base = floor_tp(t, &p);
        for x in [base - 1, base, base + 1] {
            let params = FourierParams::new(u64::from(n), t, x, Float::with_val(128, &p)).map_err(|e| e.to_string())?;
            let id = prob_identity(&params, Tolerance::absolute(1e-14)).map_err(|e| e.to_string())?;
            let exact = oracle_pmf(ell, n - ell, &p, x);
            let diff = Float::with_val(128, &id.prob - &exact).abs().to_f64();
            ensure(diff <= 1e-10, || format!("n={n} t={t} x={x} p={p}: diff {diff:e}"))?;
            worst = worst.max(diff);
            count += 1;
        }
    }
    Ok(format!("{count} points, max |identity - exact| = {worst:.2e}"))
}

fn criterion_7() -> Check {
    let tol = Tolerance::relative(1e-8);
    let p3 = Float::with_val(128, &q(1, 3));
    let mut ratios = Vec::new();
    for n in [10_001u64, 100_001] {
        let params = FourierParams::new(n, 3, 1, p3.clone()).map_err(|e| e.to_string())?;
        let qi = q_integral(&params, tol).map_err(|e| e.to_string())?;
        let c = AsymConstants::new(n, &p3).c;
        let model = Float::with_val(128, &c * 135u32); // c * 15 t^2 at t = 3
        let ratio = Float::with_val(128, &qi.value / &model).to_f64();
        ensure((0.9..=1.1).contains(&ratio), || format!("p=1/3 n={n}: ratio {ratio}"))?;
        ratios.push(ratio);
    }
    ensure((ratios[1] - 1.0).abs() < (ratios[0] - 1.0).abs(), || format!("no improvement: {ratios:?}"))?;

    // p = 1/4: a/b > 0, so x - tp = -1/4 gives u < 0 and the form is
    // minimized near t = -2u/5 = 0.6 n.
    let n = 100_001u64;
    let (t, x) = (60_001i64, 15_000i64);
    let p4 = Float::with_val(128, &q(1, 4));
    let params = FourierParams::new(n, t, x, p4).map_err(|e| e.to_string())?;
    let qi = q_integral(&params, tol).map_err(|e| e.to_string())?;
    let qa = q_asymptotic(&params).map_err(|e| e.to_string())?;
    let ratio4 = Float::with_val(128, &qi.value / &qa).to_f64();
    ensure((0.85..=1.15).contains(&ratio4), || format!("p=1/4: ratio {ratio4}"))?;
    Ok(format!(
        "p=1/3 ratios {:.6} (n=10001), {:.7} (n=100001); p=1/4 ratio {ratio4:.7} at t={t}, x={x}",
        ratios[0], ratios[1]
    ))
}

fn criterion_8() -> Check {
    let v = elo(&["scan", "--p", "1/3", "--range", "9:301:2"])?;
    let payload = &v["payload"];
    ensure(v["backend"] == "rational", || "scan did not run the exact backend".into())?;
    let n0 = payload["agreement_threshold"]
        .as_u64()
        .ok_or_else(|| "no agreement threshold reported".to_string())?;
    ensure(n0 <= 301, || format!("N0 = {n0}"))?;
    let rows = payload["rows"].as_array().ok_or("no rows")?;
    ensure(rows.len() == 147, || format!("{} rows", rows.len()))?;
    for row in rows {
        let n = row["n"].as_u64().unwrap();
        if n >= n0 {
            ensure(row["ell_star"] == (n + 3) / 2 && row["x_star"] == 1, || format!("n={n}: {row}"))?;
        }
    }
    Ok(format!("N0 = {n0}; ell* = (n+3)/2, x* = 1 for all odd n in [{n0}, 301]"))
}

fn criterion_9() -> Check {
    let pv = PValue::float(q(1, 4), 128).map_err(|e| e.to_string())?;
    let rows = scan(&pv, NRange::new(101, 2001, 2).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let target = even_denominator_ratio(&Integer::from(1), &Integer::from(4));
    ensure(target == q(4, 5), || format!("limit {target}"))?;
    let gap = |n: u32| {
        let row = rows.iter().find(|r| r.n == n).expect("checkpoint scanned");
        (row.ratio().to_f64() - 0.8).abs()
    };
    let gaps: Vec<f64> = [101, 1001, 2001].into_iter().map(gap).collect();
    ensure(gaps[2] <= 0.02, || format!("n=2001 gap {}", gaps[2]))?;
    ensure(gaps.windows(2).all(|w| w[1] <= w[0]), || format!("gaps {gaps:?}"))?;
    Ok(format!(
        "{} odd n scanned at 128 bits; |ell*/n - 0.8| = {:.5}, {:.5}, {:.5} at n = 101, 1001, 2001",
        rows.len(),
        gaps[0],
        gaps[1],
        gaps[2]
    ))
}

fn criterion_10() -> Check {
    let mut worst = 0f64;
    for (n, t, p) in fourier_grid() {
        let ell = ((i64::from(n) + t) / 2) as u32;
        let m = n - ell;
        let pmf: Vec<(i64, Rational)> = (-i64::from(m)..=i64::from(ell)).map(|x| (x, oracle_pmf(ell, m, &p, x))).collect();
        let best = pmf.iter().map(|(_, v)| v.clone()).max().unwrap();
        let allowed = f64::from(n).powf(0.01).max(1.0);
        let tp = Rational::from(&p * Integer::from(t));
        for (x, _) in pmf.iter().filter(|(_, v)| *v == best) {
            let dist = (Rational::from(*x) - &tp).abs().to_f64();
            ensure(dist <= allowed, || format!("n={n} t={t} p={p}: argmax {x} at distance {dist}"))?;
            worst = worst.max(dist);
        }
        let rep = check_localization(n, t, &p).map_err(|e| e.to_string())?;
        ensure(rep.within_literal || rep.within_practical, || format!("library disagrees at n={n} t={t}"))?;
    }
    Ok(format!("every argmax within max(n^0.01, 1) of tp; max distance {worst:.4}"))
}

fn criterion_11() -> Check {
    for n in [3u32, 5, 7, 9] {
        let pf = (1.0 - 0.5f64.powf(1.0 / f64::from(n))) * 0.9;
        let p = Rational::from_f64(pf).ok_or("p not finite")?;
        let qn = Rational::from(1 - &p).pow(n);
        ensure(qn * 2u32 >= 1, || format!("n={n}: p above the small-p threshold"))?;
        let r = concentration_bound(n, &p).map_err(|e| e.to_string())?;
        ensure((r.ell_star, r.x_star) == (n.div_ceil(2), 0), || {
            format!("n={n}: ell*={} x*={}", r.ell_star, r.x_star)
        })?;
    }
    Ok("ell* = ceil(n/2), x* = 0 for n = 3, 5, 7, 9".into())
}

fn criterion_12() -> Check {
    let pv = PValue::float(q(1, 4), 128).map_err(|e| e.to_string())?;
    let rep = periodicity_probe(&pv, NRange::new(201, 1201, 2).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(rep.max_abs_residue <= 5, || format!("max |residue| = {}", rep.max_abs_residue))?;
    let period = rep.period.map_or("no period found in window".to_string(), |p| format!("candidate period {p}"));
    Ok(format!(
        "{} residues, max |ell* - 0.8n| = {} (bound 5); {period}",
        rep.residues.len(),
        rep.max_abs_residue
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "classical value", Duration::from_secs(1), criterion_1),
        (2, "even n balanced split", Duration::from_secs(10), criterion_2),
        (3, "+-1 vectors maximize", Duration::from_secs(600), criterion_3),
        (4, "profile decomposition", Duration::from_secs(60), criterion_4),
        (5, "pure maximization", Duration::from_secs(300), criterion_5),
        (6, "Fourier inversion", Duration::from_secs(120), criterion_6),
        (7, "asymptotic ratio", Duration::from_secs(300), criterion_7),
        (8, "odd denominator scan", Duration::from_secs(300), criterion_8),
        (9, "even denominator trend", Duration::from_secs(600), criterion_9),
        (10, "mode localization", Duration::from_secs(5), criterion_10),
        (11, "small p", Duration::from_secs(1), criterion_11),
        (12, "periodicity probe", Duration::from_secs(600), criterion_12),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit:?} limit")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {id:>2} ({name}): {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
