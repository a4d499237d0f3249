use std::io::Read;

use elo_core::exact::build_dist;
use elo_core::fourier::{check_localization, prob_identity_budget, q_asymptotic, u_of, AsymConstants};
use elo_core::lstar::{
    agreement_threshold, exact_lstar, periodicity_probe, predict, scan, scan_row, Deviation, DECIMAL_DIGITS,
};
use elo_core::oracle::{verify_bound, Observed, SampleDistribution, Strategy};
use elo_core::prob::{float_to_decimal, rational_to_decimal};
use elo_core::pure::decompose_with;
use elo_core::{precision_bits, FourierParams, NRange, PValue, Predicted, ProbInput, SubsetProfile, Tolerance};
use rug::{Float, Integer, Rational};
use serde_json::{json, Value};

use crate::args::{DecomposeArgs, FourierArgs, PArgs, PointArgs, RangeArgs, StrategyName, VerifyArgs};
use crate::envelope::{Kinds, Output, Table};
use crate::Failure;

const SCAN_COLUMNS: [&str; 8] = ["n", "p", "ell_star", "x_star", "prob", "prediction", "deviation", "tie_count"];

fn parse_input(text: &str) -> Result<ProbInput, Failure> {
    ProbInput::parse(text, precision_bits()).map_err(|e| Failure::flag("p", e))
}

fn parse_p(args: &PArgs) -> Result<(ProbInput, PValue), Failure> {
    let input = parse_input(&args.p)?;
    let pv = PValue::from_input(&input, args.irrational).map_err(|e| Failure::flag("p", e))?;
    Ok((input, pv))
}

fn p_field(kinds: &mut Kinds, path: &str, input: &ProbInput) -> Value {
    kinds.mark(path, input.backend());
    Value::String(input.to_string())
}

fn parse_range(text: &str) -> Result<NRange, Failure> {
    let bad = || Failure::usage("range", format!("expected from:to[:step], got `{text}`"));
    let parts: Vec<u32> = text
        .split(':')
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let (from, to, step) = match parts[..] {
        [from, to] => (from, to, 1),
        [from, to, step] => (from, to, step),
        _ => return Err(bad()),
    };
    NRange::new(from, to, step).map_err(|e| Failure::flag("range", e))
}

fn parse_list<T: std::str::FromStr>(flag: &'static str, text: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(flag, format!("cannot parse `{text}` as a comma-separated list")))
}

fn ties_json(ties: &[(u32, i64)]) -> Value {
    json!(ties.iter().map(|(l, x)| json!([l, x])).collect::<Vec<_>>())
}

fn precision_field(pv: &PValue) -> Value {
    match pv {
        PValue::Rational(_) => Value::Null,
        PValue::Decimal { value, .. } | PValue::Irrational(value) => json!(value.prec()),
    }
}

pub fn bound(args: &PointArgs) -> Result<Output, Failure> {
    let (input, pv) = parse_p(&args.p)?;
    let out = exact_lstar(args.n, &pv)?;
    let mut kinds = Kinds::default();
    let payload = json!({
        "n": args.n,
        "p": p_field(&mut kinds, "p", &input),
        "precision_bits": precision_field(&pv),
        "ell_star": out.ell_star,
        "x_star": out.x_star,
        "prob": kinds.prob("prob", &out.prob),
        "tie_count": out.ties.len(),
        "ties": ties_json(&out.ties),
        "all_splits_tied": out.all_splits_tied(),
        "degenerate": out.degenerate,
    });
    let table = Table {
        header: vec!["n", "p", "ell_star", "x_star", "prob", "tie_count"],
        rows: vec![vec![
            args.n.to_string(),
            input.to_string(),
            out.ell_star.to_string(),
            out.x_star.to_string(),
            out.prob.to_decimal(DECIMAL_DIGITS),
            out.ties.len().to_string(),
        ]],
    };
    Ok(Output {
        backend: pv.backend(),
        payload,
        kinds,
        table: Some(table),
    })
}

pub fn verify(args: &VerifyArgs) -> Result<Output, Failure> {
    let input = parse_input(&args.p)?;
    let p = input.as_rational();
    let strategy = match args.strategy {
        StrategyName::Grid => Strategy::Grid {
            values: parse_list("values", &args.values)?,
        },
        StrategyName::Random => {
            let distribution = match args.step {
                None => SampleDistribution::Uniform {
                    low: args.low,
                    high: args.high,
                    min_abs: args.min_abs,
                },
                Some(step) => SampleDistribution::Quantized {
                    low: args.low,
                    high: args.high,
                    min_abs: args.min_abs,
                    step,
                },
            };
            Strategy::RandomSample {
                count: args.count,
                distribution,
                seed: args.seed,
            }
        }
        StrategyName::HillClimb => Strategy::HillClimb {
            radius: args.radius,
            steps: args.steps,
        },
    };
    let report = verify_bound(args.n, &p, &strategy)?;
    let mut kinds = Kinds::default();
    let (backend, max_observed) = match &report.max_observed {
        Observed::Exact(r) => ("rational", kinds.rational("max_observed", r)),
        Observed::Float(v) => ("decimal", kinds.decimal("max_observed", format!("{v:.17e}"))),
    };
    let worst_kind = if backend == "rational" { "rational" } else { "decimal" };
    kinds.mark("worst[]", worst_kind);
    let payload = json!({
        "n": report.n,
        "p": p_field(&mut kinds, "p", &input),
        "p_exact": kinds.rational("p_exact", &p),
        "strategy": report.strategy,
        "samples": report.samples,
        "max_observed": max_observed,
        "bound": kinds.rational("bound", &report.bound),
        "bound_decimal": kinds.decimal("bound_decimal", rational_to_decimal(&report.bound, DECIMAL_DIGITS)),
        "worst": report.worst,
        "violations": report.violations,
        "local_increases": report.local_increases,
        "pass": report.pass,
    });
    Ok(Output {
        backend,
        payload,
        kinds,
        table: None,
    })
}

fn read_profile(path: &str) -> Result<Value, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::usage("profile", e))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::usage("profile", format!("{path}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::usage("profile", format!("{path}: {e}")))
}

pub fn decompose(args: &DecomposeArgs) -> Result<Output, Failure> {
    let gamma = match (&args.source.profile, &args.source.multiset) {
        (Some(path), _) => SubsetProfile::from_json(&read_profile(path)?).map_err(|e| Failure::flag("profile", e))?,
        (None, Some(list)) => {
            let values: Vec<Rational> = parse_list("multiset", list)?;
            SubsetProfile::from_multiset(&values).map_err(|e| Failure::flag("multiset", e))?
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let properties = gamma.check_properties();
    let mut intermediates = 0usize;
    let mut all_intermediates_valid = true;
    let decomposition = decompose_with(&gamma, |g| {
        intermediates += 1;
        all_intermediates_valid &= g.check_properties().all();
    })
    .map_err(|e| match e {
        elo_core::Error::PropertyViolation { .. } => Failure::flag("profile", e),
        other => Failure::from(other),
    })?;
    let recombined = decomposition.recombine()?;
    let mut kinds = Kinds::default();
    kinds.mark("terms[].weight", "rational");
    kinds.mark("terms[].points[]", "rational");
    let terms: Vec<Value> = decomposition
        .terms
        .iter()
        .map(|(w, pure)| {
            json!({
                "weight": w.to_string(),
                "points": pure.points().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    kinds.mark("profile.entries[][]", "rational");
    let support = gamma.support_size();
    let payload = json!({
        "profile": gamma.to_json(),
        "index": gamma.index(),
        "support_size": support,
        "properties": {
            "nonnegative": properties.nonnegative,
            "rows_sum_to_one": properties.rows_sum_to_one,
            "monotone": properties.monotone,
        },
        "terms": terms,
        "term_count": decomposition.terms.len(),
        "term_bound": support - gamma.index(),
        "total_weight": kinds.rational("total_weight", &decomposition.total_weight()),
        "recombines_exactly": recombined == gamma,
        "intermediates_checked": intermediates,
        "all_intermediates_valid": all_intermediates_valid,
    });
    Ok(Output {
        backend: "rational",
        payload,
        kinds,
        table: None,
    })
}

pub fn fourier_check(args: &FourierArgs) -> Result<Output, Failure> {
    let (input, pv) = parse_p(&args.p)?;
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Failure::usage("tol", "must be a positive number"));
    }
    let prec = precision_bits();
    let p_float = input.to_float(prec);
    let params = FourierParams::new(args.n, args.t, args.x, p_float.clone())?;
    let identity = prob_identity_budget(&params, Tolerance::absolute(args.tol), args.max_evaluations)?;
    let exact = pv.exact().cloned();
    let mut kinds = Kinds::default();
    let digits = DECIMAL_DIGITS;

    let (prob_exact, abs_diff, within) = match &exact {
        Some(p) => {
            let ell = u32::try_from(params.ell()).map_err(|_| Failure::usage("n", "too large for the exact pmf"))?;
            let m = u32::try_from(params.m()).map_err(|_| Failure::usage("n", "too large for the exact pmf"))?;
            let pmf = build_dist(ell, m, p)?.pmf(args.x);
            let diff = Float::with_val(prec, &identity.prob - &pmf).abs();
            let within = diff.to_f64() <= args.tol;
            (
                kinds.rational("prob_exact", &pmf),
                kinds.decimal("abs_diff", float_to_decimal(&diff, 6)),
                json!(within),
            )
        }
        None => (Value::Null, Value::Null, Value::Null),
    };

    let asym = AsymConstants::new(args.n, &p_float);
    let (u, q_asym, ratio) = match (u_of(&params), q_asymptotic(&params)) {
        (Ok(u), Ok(qa)) => {
            let ratio = Float::with_val(prec, &identity.q.value / &qa);
            (
                kinds.decimal("u", float_to_decimal(&u, digits)),
                kinds.decimal("q_asymptotic", float_to_decimal(&qa, digits)),
                kinds.decimal("q_ratio", float_to_decimal(&ratio, 12)),
            )
        }
        (Ok(u), Err(_)) => (kinds.decimal("u", float_to_decimal(&u, digits)), Value::Null, Value::Null),
        _ => (Value::Null, Value::Null, Value::Null),
    };

    let localization = match (&exact, u32::try_from(args.n)) {
        (Some(p), Ok(n)) if *p > 0 && *p < 1 => {
            let rep = check_localization(n, args.t, p)?;
            json!({
                "argmax": rep.argmax,
                "distance": kinds.rational("localization.distance", &rep.distance),
                "literal_bound": kinds.decimal("localization.literal_bound", format!("{:.12}", rep.literal_bound)),
                "within": rep.within_literal || rep.within_practical,
            })
        }
        _ => Value::Null,
    };

    let payload = json!({
        "n": args.n,
        "t": args.t,
        "x": args.x,
        "p": p_field(&mut kinds, "p", &input),
        "precision_bits": prec,
        "tol": kinds.decimal("tol", format!("{:e}", args.tol)),
        "prob_fourier": kinds.decimal("prob_fourier", float_to_decimal(&identity.prob, digits)),
        "prob_exact": prob_exact,
        "abs_diff": abs_diff,
        "within_tol": within,
        "base_integral": kinds.decimal("base_integral", float_to_decimal(&identity.base.value, digits)),
        "base_error_estimate": kinds.decimal("base_error_estimate", float_to_decimal(&identity.base.abs_error_estimate, 6)),
        "q_integral": kinds.decimal("q_integral", float_to_decimal(&identity.q.value, digits)),
        "q_error_estimate": kinds.decimal("q_error_estimate", float_to_decimal(&identity.q.abs_error_estimate, 6)),
        "evaluations": identity.base.evaluations + identity.q.evaluations,
        "a": kinds.decimal("a", float_to_decimal(&asym.a, digits)),
        "b": kinds.decimal("b", float_to_decimal(&asym.b, digits)),
        "c": kinds.decimal("c", float_to_decimal(&asym.c, digits)),
        "u": u,
        "q_asymptotic": q_asym,
        "q_ratio": ratio,
        "localization": localization,
    });
    Ok(Output {
        backend: "decimal",
        payload,
        kinds,
        table: None,
    })
}

fn deviation_field(kinds: &mut Kinds, path: &str, d: &Deviation) -> Value {
    match d {
        Deviation::Exact(v) => json!(v),
        Deviation::Ratio(r) => kinds.decimal(path, rational_to_decimal(r, 12)),
    }
}

fn prediction_x(predicted: &Predicted) -> Value {
    match predicted {
        Predicted::Exact { x: Some(x), .. } => json!(x),
        _ => Value::Null,
    }
}

fn prediction_field(kinds: &mut Kinds, path: &str, predicted: &Predicted) -> Value {
    match predicted {
        Predicted::Exact { ell, .. } => json!(ell),
        Predicted::Ratio(r) => kinds.rational(path, r),
    }
}

pub fn lstar(args: &PointArgs) -> Result<Output, Failure> {
    let (input, pv) = parse_p(&args.p)?;
    let row = scan_row(args.n, &pv).map_err(|e| match e {
        // p in {0, 1} has no prediction but still a bound.
        elo_core::Error::InvalidArgument { name: "p", .. } => Failure::flag("p", e),
        other => Failure::from(other),
    })?;
    let mut kinds = Kinds::default();
    let out = &row.outcome;
    let payload = json!({
        "n": args.n,
        "p": p_field(&mut kinds, "p", &input),
        "precision_bits": precision_field(&pv),
        "ell_star": out.ell_star,
        "x_star": out.x_star,
        "prob": kinds.prob("prob", &out.prob),
        "prob_decimal": kinds.decimal("prob_decimal", out.prob.to_decimal(DECIMAL_DIGITS)),
        "tie_count": out.ties.len(),
        "ties": ties_json(&out.ties),
        "all_splits_tied": out.all_splits_tied(),
        "case": row.prediction.case.label(),
        "prediction_kind": row.prediction.kind(),
        "prediction": prediction_field(&mut kinds, "prediction", &row.prediction.predicted),
        "prediction_x": prediction_x(&row.prediction.predicted),
        "deviation": deviation_field(&mut kinds, "deviation", &row.deviation),
        "agrees": row.agrees(),
    });
    let table = Table {
        header: SCAN_COLUMNS.to_vec(),
        rows: vec![scan_csv_row(&input, &row)],
    };
    Ok(Output {
        backend: pv.backend(),
        payload,
        kinds,
        table: Some(table),
    })
}

fn scan_csv_row(input: &ProbInput, row: &elo_core::ScanRow) -> Vec<String> {
    vec![
        row.n.to_string(),
        input.to_string(),
        row.outcome.ell_star.to_string(),
        row.outcome.x_star.to_string(),
        row.outcome.prob.to_decimal(DECIMAL_DIGITS),
        row.prediction.value_text(),
        row.deviation.to_text(),
        row.tie_count().to_string(),
    ]
}

pub fn scan_cmd(args: &RangeArgs) -> Result<Output, Failure> {
    let (input, pv) = parse_p(&args.p)?;
    let range = parse_range(&args.range)?;
    // Validates p before the scan starts.
    predict(range.from.max(1), &pv).map_err(|e| Failure::flag("p", e))?;
    let rows = scan(&pv, range)?;
    let mut kinds = Kinds::default();
    let threshold = agreement_threshold(&rows);
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|row| {
            json!({
                "n": row.n,
                "ell_star": row.outcome.ell_star,
                "x_star": row.outcome.x_star,
                "prob": kinds.prob("rows[].prob", &row.outcome.prob),
                "prob_decimal": kinds.decimal("rows[].prob_decimal", row.outcome.prob.to_decimal(DECIMAL_DIGITS)),
                "case": row.prediction.case.label(),
                "prediction_kind": row.prediction.kind(),
                "prediction": prediction_field(&mut kinds, "rows[].prediction", &row.prediction.predicted),
                "deviation": deviation_field(&mut kinds, "rows[].deviation", &row.deviation),
                "ratio": kinds.rational("rows[].ratio", &row.ratio()),
                "tie_count": row.tie_count(),
                "agrees": row.agrees(),
            })
        })
        .collect();
    let payload = json!({
        "p": p_field(&mut kinds, "p", &input),
        "precision_bits": precision_field(&pv),
        "range": { "from": range.from, "to": range.to, "step": range.stride },
        "agreement_threshold": threshold,
        "rows": json_rows,
    });
    let table = Table {
        header: SCAN_COLUMNS.to_vec(),
        rows: rows.iter().map(|row| scan_csv_row(&input, row)).collect(),
    };
    Ok(Output {
        backend: pv.backend(),
        payload,
        kinds,
        table: Some(table),
    })
}

pub fn probe(args: &RangeArgs) -> Result<Output, Failure> {
    let (input, pv) = parse_p(&args.p)?;
    let range = parse_range(&args.range)?;
    let report = periodicity_probe(&pv, range).map_err(|e| match e {
        elo_core::Error::InvalidArgument { .. } | elo_core::Error::ProbabilityOutOfRange(_) => {
            Failure::flag("p", e)
        }
        other => Failure::from(other),
    })?;
    let mut kinds = Kinds::default();
    kinds.mark("residues[].residue", "rational");
    let residues: Vec<Value> = report
        .residues
        .iter()
        .map(|(n, r)| json!({ "n": n, "residue": r.to_string() }))
        .collect();
    let bounded_by = Integer::from(report.max_abs_residue.ceil_ref());
    let payload = json!({
        "p": p_field(&mut kinds, "p", &input),
        "precision_bits": precision_field(&pv),
        "ratio": kinds.rational("ratio", &report.ratio),
        "residues": residues,
        "max_abs_residue": kinds.rational("max_abs_residue", &report.max_abs_residue),
        "residue_bound": bounded_by.to_string(),
        "period": report.period,
        "period_status": if report.period.is_some() { "candidate period found" } else { "no period found in window" },
    });
    kinds.mark("residue_bound", "rational");
    let table = Table {
        header: vec!["n", "residue"],
        rows: report
            .residues
            .iter()
            .map(|(n, r)| vec![n.to_string(), r.to_string()])
            .collect(),
    };
    Ok(Output {
        backend: pv.backend(),
        payload,
        kinds,
        table: Some(table),
    })
}
