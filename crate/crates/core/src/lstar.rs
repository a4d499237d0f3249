//! The maximizing split `ell*`: closed-form predictions by case, exhaustive
//! computation, scans over `n`, and a probe for periodic residues.

use std::fmt;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};

use crate::error::{invalid, Result};
use crate::exact::{canonical_choice, concentration_bound, LStarResult};
use crate::prob::{check_float_probability, check_probability, float_to_decimal, rational_to_decimal, ProbInput};

/// Significant digits used when rendering probabilities as decimals.
pub const DECIMAL_DIGITS: usize = 30;

/// A probability as the lstar routines see it. The variant fixes the backend.
#[derive(Debug, Clone, PartialEq)]
pub enum PValue {
    /// `r/s`, computed with exact integers.
    Rational(Rational),
    /// A decimal literal: computed in floating point, classified by its exact
    /// (terminating) value.
    Decimal { exact: Rational, value: Float },
    /// A decimal declared by the caller to stand for an irrational number.
    Irrational(Float),
}

impl PValue {
    /// `irrational` declares intent; it is only accepted for decimal input.
    pub fn from_input(input: &ProbInput, irrational: bool) -> Result<Self> {
        match (input, irrational) {
            (ProbInput::Exact(r), false) => Ok(PValue::Rational(r.clone())),
            (ProbInput::Exact(_), true) => Err(invalid(
                "p",
                "an irrational surrogate must be given as a decimal literal",
            )),
            (ProbInput::Decimal { value, .. }, false) => Ok(PValue::Decimal {
                exact: input.as_rational(),
                value: value.clone(),
            }),
            (ProbInput::Decimal { value, .. }, true) => Ok(PValue::Irrational(value.clone())),
        }
    }

    pub fn rational(r: Rational) -> Result<Self> {
        check_probability(&r)?;
        Ok(PValue::Rational(r))
    }

    /// A rational `p` evaluated on the float backend at `bits` precision.
    pub fn float(r: Rational, bits: u32) -> Result<Self> {
        check_probability(&r)?;
        let value = Float::with_val(bits, &r);
        Ok(PValue::Decimal { exact: r, value })
    }

    pub fn backend(&self) -> &'static str {
        match self {
            PValue::Rational(_) => "rational",
            PValue::Decimal { .. } | PValue::Irrational(_) => "decimal",
        }
    }

    /// The exact value, unless declared irrational.
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            PValue::Rational(r) | PValue::Decimal { exact: r, .. } => Some(r),
            PValue::Irrational(_) => None,
        }
    }

    fn check_open(&self) -> Result<()> {
        let inside = match self {
            PValue::Rational(r) | PValue::Decimal { exact: r, .. } => *r > 0 && *r < 1,
            PValue::Irrational(v) => *v > 0 && *v < 1,
        };
        if inside {
            Ok(())
        } else {
            Err(invalid("p", "predictions need 0 < p < 1"))
        }
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PValue::Rational(r) => write!(f, "{r}"),
            PValue::Decimal { value, .. } | PValue::Irrational(value) => {
                f.write_str(&float_to_decimal(value, DECIMAL_DIGITS))
            }
        }
    }
}

/// Which closed-form case applies to `(n, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PCase {
    /// `p <= 1 - 2^(-1/n)`: `ell* = ceil(n/2)`, `x* = 0`.
    SmallP,
    /// `n` even: `ell* = n/2`, `x* = 0`.
    EvenN,
    /// Odd `n`, `p = 1/2`: every split gives the same maximum.
    Symmetric,
    /// Odd `n`, `p = r/s` with `s` odd: `ell* = (n + s)/2`, `x* = r`.
    OddDenominator { r: Integer, s: Integer },
    /// Odd `n`, `p = r/s` with `s` even: `ell*/n -> 1/2 + 3/(5 |s - 2r|)`.
    EvenDenominator { r: Integer, s: Integer },
    /// Odd `n`, `p` declared irrational: `ell*/n -> 1/2`.
    IrrationalSurrogate { precision: u32 },
}

impl PCase {
    pub fn label(&self) -> &'static str {
        match self {
            PCase::SmallP => "small-p",
            PCase::EvenN => "even-n",
            PCase::Symmetric => "symmetric",
            PCase::OddDenominator { .. } => "odd-denominator",
            PCase::EvenDenominator { .. } => "even-denominator",
            PCase::IrrationalSurrogate { .. } => "irrational-surrogate",
        }
    }
}

/// Predicted `ell*`: an exact split or a limiting ratio `ell*/n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicted {
    Exact { ell: u32, x: Option<i64> },
    Ratio(Rational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LStarPrediction {
    pub case: PCase,
    pub predicted: Predicted,
    /// `p = 1/2`: no split is preferred.
    pub all_tied: bool,
}

impl LStarPrediction {
    pub fn kind(&self) -> &'static str {
        match self.predicted {
            Predicted::Exact { .. } => "exact-value",
            Predicted::Ratio(_) => "asymptotic-ratio",
        }
    }

    /// The predicted value as text: an integer split or a decimal ratio.
    pub fn value_text(&self) -> String {
        match &self.predicted {
            Predicted::Exact { ell, .. } => ell.to_string(),
            Predicted::Ratio(r) => rational_to_decimal(r, 12),
        }
    }
}

fn is_half(r: &Rational) -> bool {
    *r.numer() == 1 && *r.denom() == 2
}

/// `(1 - p)^n >= 1/2`, i.e. `p <= 1 - 2^(-1/n)`.
pub fn is_small_p(n: u32, p: &PValue) -> bool {
    match p {
        PValue::Rational(r) | PValue::Decimal { exact: r, .. } => {
            let q = Integer::from(r.denom() - r.numer());
            Integer::from((&q).pow(n)) * 2u32 >= Integer::from(r.denom().pow(n))
        }
        PValue::Irrational(v) => {
            let q = Float::with_val(v.prec(), 1u32 - v);
            q.pow(n) * 2u32 >= 1u32
        }
    }
}

/// Classifies `(n, p)`. Precedence: small `p`, then even `n`, then the
/// denominator of `p` (or irrationality) for odd `n`.
pub fn classify(n: u32, p: &PValue) -> Result<PCase> {
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    p.check_open()?;
    if is_small_p(n, p) {
        return Ok(PCase::SmallP);
    }
    if n % 2 == 0 {
        return Ok(PCase::EvenN);
    }
    Ok(match p {
        PValue::Rational(r) | PValue::Decimal { exact: r, .. } => {
            let (r_num, s) = (r.numer().clone(), r.denom().clone());
            if s.is_odd() {
                PCase::OddDenominator { r: r_num, s }
            } else if is_half(r) {
                PCase::Symmetric
            } else {
                PCase::EvenDenominator { r: r_num, s }
            }
        }
        PValue::Irrational(v) => PCase::IrrationalSurrogate { precision: v.prec() },
    })
}

/// `1/2 + 3/(5 |s - 2r|)`, the limiting `ell*/n` for even `s`.
pub fn even_denominator_ratio(r: &Integer, s: &Integer) -> Rational {
    let gap = (s - Integer::from(r * 2u32)).abs();
    Rational::from((1, 2)) + Rational::from((Integer::from(3), gap * 5u32))
}

/// Closed-form prediction for `ell*`.
pub fn predict(n: u32, p: &PValue) -> Result<LStarPrediction> {
    let case = classify(n, p)?;
    let half_up = n.div_ceil(2);
    let predicted = match &case {
        PCase::SmallP => Predicted::Exact { ell: half_up, x: Some(0) },
        PCase::EvenN => Predicted::Exact { ell: n / 2, x: Some(0) },
        PCase::Symmetric => Predicted::Exact { ell: half_up, x: None },
        PCase::OddDenominator { r, s } => {
            // (n + s)/2 exceeds n when s > n; clamp to the largest split.
            let ell = s
                .to_u32()
                .and_then(|s| n.checked_add(s))
                .map_or(n, |sum| (sum / 2).min(n));
            Predicted::Exact { ell, x: r.to_i64() }
        }
        PCase::EvenDenominator { r, s } => Predicted::Ratio(even_denominator_ratio(r, s)),
        PCase::IrrationalSurrogate { .. } => Predicted::Ratio(Rational::from((1, 2))),
    };
    Ok(LStarPrediction {
        all_tied: matches!(case, PCase::Symmetric),
        case,
        predicted,
    })
}

/// An exact or floating-point probability.
#[derive(Debug, Clone, PartialEq)]
pub enum Prob {
    Exact(Rational),
    Float(Float),
}

impl Prob {
    pub fn kind(&self) -> &'static str {
        match self {
            Prob::Exact(_) => "rational",
            Prob::Float(_) => "decimal",
        }
    }

    pub fn to_decimal(&self, digits: usize) -> String {
        match self {
            Prob::Exact(r) => rational_to_decimal(r, digits),
            Prob::Float(v) => float_to_decimal(v, digits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => r.to_f64(),
            Prob::Float(v) => v.to_f64(),
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(r) => write!(f, "{r}"),
            Prob::Float(v) => f.write_str(&float_to_decimal(v, DECIMAL_DIGITS)),
        }
    }
}

/// Computed `ell*` with the concentration it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct LStarOutcome {
    pub n: u32,
    pub ell_star: u32,
    pub x_star: i64,
    pub prob: Prob,
    /// Every maximizing `(ell, x)`, sorted.
    pub ties: Vec<(u32, i64)>,
    /// `p` is 0 or 1.
    pub degenerate: bool,
}

impl LStarOutcome {
    pub fn all_splits_tied(&self) -> bool {
        let mut seen = vec![false; self.n as usize + 1];
        for &(ell, _) in &self.ties {
            seen[ell as usize] = true;
        }
        seen.into_iter().all(|s| s)
    }
}

impl From<LStarResult> for LStarOutcome {
    fn from(r: LStarResult) -> Self {
        Self {
            n: r.n,
            ell_star: r.ell_star,
            x_star: r.x_star,
            prob: Prob::Exact(r.prob),
            ties: r.ties,
            degenerate: r.degenerate,
        }
    }
}

/// `ell*` by exhaustive search on the backend `p` selects.
pub fn exact_lstar(n: u32, p: &PValue) -> Result<LStarOutcome> {
    match p {
        PValue::Rational(r) => concentration_bound(n, r).map(Into::into),
        PValue::Decimal { value, .. } | PValue::Irrational(value) => float_concentration(n, value),
    }
}

/// Relative tolerance under which float maxima count as tied.
pub fn float_tie_tolerance(prec: u32) -> f64 {
    (2f64).powi(-(prec.saturating_sub(32) as i32))
}

/// Floating-point counterpart of [`concentration_bound`].
///
/// Walks `ell` from `ceil(n/2)` to `n`; the split `(n - ell, -x)` mirrors
/// `(ell, x)` exactly, so the lower half only contributes mirrored ties.
/// Maxima within [`float_tie_tolerance`] of each other count as tied.
///
/// An `f64` ladder screens the candidates; only those are evaluated at the
/// precision of `p`. Falls back to [`float_concentration_full`] when the
/// screen cannot be trusted.
pub fn float_concentration(n: u32, p: &Float) -> Result<LStarOutcome> {
    check_float_probability(p)?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let pf = p.to_f64();
    if !(pf > 0.0 && pf < 1.0) || n > SCREEN_MAX_N {
        return float_concentration_full(n, p);
    }
    let (screen_max, screened) = screen_f64(n, pf);
    let prec = p.prec();
    let tol = float_tie_tolerance(prec);
    let mut evaluated: Vec<(u32, i64, Float)> = Vec::with_capacity(screened.len());
    let mut i = 0;
    while i < screened.len() {
        let ell = screened[i].0;
        let j = i + screened[i..].iter().take_while(|c| c.0 == ell).count();
        let xs: Vec<i64> = screened[i..j].iter().map(|c| c.1).collect();
        for (x, v) in xs.iter().zip(split_pmf_at(n, ell, &xs, p)) {
            evaluated.push((ell, *x, v));
        }
        i = j;
    }
    let best = evaluated
        .iter()
        .map(|c| &c.2)
        .max_by(|a, b| a.partial_cmp(b).expect("finite"))
        .expect("screen keeps the maximum")
        .clone();
    // The screen is only trusted while its maximum matches the precise one.
    if ((best.to_f64() - screen_max) / screen_max).abs() > SCREEN_REL / 16.0 {
        return float_concentration_full(n, p);
    }
    let floor = Float::with_val(prec, &best * (1.0 - tol));
    let mut ties: Vec<(u32, i64)> = Vec::new();
    for (ell, x, v) in &evaluated {
        if *v >= floor {
            ties.push((*ell, *x));
            ties.push((n - ell, -x));
        }
    }
    ties.sort_unstable();
    ties.dedup();
    let (ell_star, x_star) = canonical_choice(n, &ties).expect("at least one candidate");
    Ok(LStarOutcome {
        n,
        ell_star,
        x_star,
        prob: Prob::Float(best),
        ties,
        degenerate: false,
    })
}

/// Largest `n` screened in `f64`; beyond it the full-precision ladder runs.
const SCREEN_MAX_N: u32 = 1 << 20;
/// Relative margin below the `f64` maximum kept by the screen.
const SCREEN_REL: f64 = 1e-9;

/// `f64` ladder over `ell >= ceil(n/2)`: the screened maximum and every
/// `(ell, x)` within `SCREEN_REL` of it, sorted.
fn screen_f64(n: u32, p: f64) -> (f64, Vec<(u32, i64)>) {
    let q = 1.0 - p;
    let nu = n as usize;
    let ell0 = n.div_ceil(2);
    let mut coeffs = Vec::with_capacity(nu + 1);
    coeffs.push(1.0f64);
    for step in 0..n {
        let (c0, c1) = if step < ell0 { (q, p) } else { (p, q) };
        coeffs.push(0.0);
        for e in (1..coeffs.len()).rev() {
            coeffs[e] = coeffs[e] * c0 + coeffs[e - 1] * c1;
        }
        coeffs[0] *= c0;
    }
    let mut quotient = vec![0.0f64; nu];
    let mut best = 0.0f64;
    let mut kept: Vec<(u32, i64, f64)> = Vec::new();
    let mut ell = ell0;
    loop {
        let m = i64::from(n - ell);
        let floor = best * (1.0 - SCREEN_REL);
        for (e, &v) in coeffs.iter().enumerate() {
            if v >= floor {
                kept.push((ell, e as i64 - m, v));
                if v > best {
                    best = v;
                }
            }
        }
        let floor = best * (1.0 - SCREEN_REL);
        kept.retain(|c| c.2 >= floor);
        if ell == n {
            break;
        }
        if p <= q {
            quotient[nu - 1] = coeffs[nu] / q;
            for e in (1..nu).rev() {
                quotient[e - 1] = (coeffs[e] - quotient[e] * p) / q;
            }
        } else {
            quotient[0] = coeffs[0] / p;
            for e in 1..nu {
                quotient[e] = (coeffs[e] - quotient[e - 1] * q) / p;
            }
        }
        coeffs[0] = q * quotient[0];
        for e in 1..nu {
            coeffs[e] = q * quotient[e] + p * quotient[e - 1];
        }
        coeffs[nu] = p * quotient[nu - 1];
        ell += 1;
    }
    let mut out: Vec<(u32, i64)> = kept.into_iter().map(|c| (c.0, c.1)).collect();
    out.sort_unstable();
    (best, out)
}

/// `Pr[Bin(ell, p) - Bin(n - ell, p) = x]` for each `x` in `xs`, at the
/// precision of `p`.
fn split_pmf_at(n: u32, ell: u32, xs: &[i64], p: &Float) -> Vec<Float> {
    let f = binomial_pmf_float(ell, p);
    let g = binomial_pmf_float(n - ell, p);
    let prec = p.prec();
    xs.iter()
        .map(|&x| {
            // sum over k of f[k] g[k - x]
            let lo = x.max(0);
            let hi = i64::from(ell).min(i64::from(n - ell) + x);
            let mut acc = Float::new(prec + 16);
            for k in lo..=hi {
                acc += &f[k as usize] * &g[(k - x) as usize];
            }
            Float::with_val(prec, acc)
        })
        .collect()
}

/// `Bin(k, p)` pmf by the ratio recurrence from `q^k`.
fn binomial_pmf_float(k: u32, p: &Float) -> Vec<Float> {
    let prec = p.prec() + 16;
    let q = Float::with_val(prec, 1u32 - p);
    let ratio = Float::with_val(prec, p / &q);
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut cur = Float::with_val(prec, (&q).pow(k));
    for j in 0..k {
        let next = Float::with_val(prec, &cur * &ratio) * (k - j) / (j + 1);
        out.push(std::mem::replace(&mut cur, next));
    }
    out.push(cur);
    out
}

/// Exhaustive maximum over `ell`, `x` with every coefficient carried at the
/// precision of `p`.
pub fn float_concentration_full(n: u32, p: &Float) -> Result<LStarOutcome> {
    check_float_probability(p)?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let prec = p.prec();
    if *p == 0 || *p == 1 {
        let exact = if *p == 0 { Rational::new() } else { Rational::from(1) };
        let r = concentration_bound(n, &exact)?;
        return Ok(LStarOutcome {
            prob: Prob::Float(Float::with_val(prec, 1u32)),
            ..r.into()
        });
    }

    let tol = float_tie_tolerance(prec);
    let mut ladder = FloatLadder::new(n, n.div_ceil(2), p);
    let mut best = Float::new(prec);
    let mut candidates: Vec<(u32, i64, Float)> = Vec::new();
    let mut floor = Float::new(prec);
    loop {
        let ell = ladder.ell;
        let m = i64::from(n - ell);
        for (e, v) in ladder.coeffs.iter().enumerate() {
            if *v < floor {
                continue;
            }
            if *v > best {
                best.assign(v);
                floor.assign(&best * (1.0 - tol));
                candidates.retain(|c| c.2 >= floor);
            }
            candidates.push((ell, e as i64 - m, v.clone()));
        }
        if ell == n {
            break;
        }
        ladder.advance();
    }

    let mut ties: Vec<(u32, i64)> = Vec::with_capacity(2 * candidates.len());
    for (ell, x, _) in &candidates {
        ties.push((*ell, *x));
        ties.push((n - ell, -x));
    }
    ties.sort_unstable();
    ties.dedup();
    let (ell_star, x_star) = canonical_choice(n, &ties).expect("at least one candidate");
    Ok(LStarOutcome {
        n,
        ell_star,
        x_star,
        prob: Prob::Float(best),
        ties,
        degenerate: false,
    })
}

/// Float version of the exact split ladder over the pmf of
/// `Bin(ell, p) - Bin(n - ell, p)`, stored as coefficients of
/// `(q + p z)^ell (p + q z)^(n - ell)`.
pub(crate) struct FloatLadder {
    n: u32,
    ell: u32,
    p: Float,
    q: Float,
    inv_p: Float,
    inv_q: Float,
    /// `p/q`.
    ratio: Float,
    /// `q/p`.
    inv_ratio: Float,
    coeffs: Vec<Float>,
    quotient: Vec<Float>,
    scratch: Float,
}

impl FloatLadder {
    /// Starts at `ell`; requires `0 < p < 1`.
    pub fn new(n: u32, ell: u32, p: &Float) -> Self {
        let prec = p.prec();
        let q = Float::with_val(prec, 1u32 - p);
        let mut coeffs = Vec::with_capacity(n as usize + 1);
        coeffs.push(Float::with_val(prec, 1u32));
        let mut scratch = Float::new(prec);
        for step in 0..n {
            // Multiply by (c0 + c1 z), top coefficient first.
            let (c0, c1) = if step < ell { (&q, p) } else { (p, &q) };
            coeffs.push(Float::new(prec));
            for e in (1..coeffs.len()).rev() {
                scratch.assign(coeffs[e].mul_add_mul_ref(c0, &coeffs[e - 1], c1));
                std::mem::swap(&mut coeffs[e], &mut scratch);
            }
            coeffs[0] *= c0;
        }
        Self {
            n,
            ell,
            inv_p: Float::with_val(prec, 1u32 / p),
            inv_q: Float::with_val(prec, 1u32 / &q),
            ratio: Float::with_val(prec, p / &q),
            inv_ratio: Float::with_val(prec, &q / p),
            p: p.clone(),
            q,
            coeffs,
            quotient: vec![Float::new(prec); n as usize],
            scratch,
        }
    }

    /// `ell -> ell + 1`: divide by `p + q z`, multiply by `q + p z`.
    pub fn advance(&mut self) {
        assert!(self.ell < self.n, "ladder already at ell = n");
        let n = self.n as usize;
        // The recursion multiplies earlier errors by p/q from the top and by
        // q/p from the bottom; run it in the direction where that is <= 1.
        if self.p <= self.q {
            self.quotient[n - 1].assign(&self.coeffs[n] * &self.inv_q);
            for e in (1..n).rev() {
                // Q[e-1] = c[e]/q - Q[e] p/q
                let (lo, hi) = self.quotient.split_at_mut(e);
                lo[e - 1].assign(self.coeffs[e].mul_sub_mul_ref(&self.inv_q, &hi[0], &self.ratio));
            }
        } else {
            self.quotient[0].assign(&self.coeffs[0] * &self.inv_p);
            for e in 1..n {
                // Q[e] = c[e]/p - Q[e-1] q/p
                let (lo, hi) = self.quotient.split_at_mut(e);
                hi[0].assign(self.coeffs[e].mul_sub_mul_ref(&self.inv_p, &lo[e - 1], &self.inv_ratio));
            }
        }
        self.coeffs[0].assign(&self.q * &self.quotient[0]);
        for e in 1..n {
            self.scratch
                .assign(self.q.mul_add_mul_ref(&self.quotient[e], &self.p, &self.quotient[e - 1]));
            std::mem::swap(&mut self.coeffs[e], &mut self.scratch);
        }
        self.coeffs[n].assign(&self.p * &self.quotient[n - 1]);
        self.ell += 1;
    }
}

/// How far an exact `ell*` is from the prediction.
#[derive(Debug, Clone, PartialEq)]
pub enum Deviation {
    /// `ell* - predicted`.
    Exact(i64),
    /// `ell*/n - ratio`.
    Ratio(Rational),
}

impl Deviation {
    pub fn to_text(&self) -> String {
        match self {
            Deviation::Exact(d) => d.to_string(),
            Deviation::Ratio(r) => rational_to_decimal(r, 12),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Deviation::Exact(d) => *d as f64,
            Deviation::Ratio(r) => r.to_f64(),
        }
    }
}

/// One `n` of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n: u32,
    pub outcome: LStarOutcome,
    pub prediction: LStarPrediction,
    pub deviation: Deviation,
}

impl ScanRow {
    pub fn tie_count(&self) -> usize {
        self.outcome.ties.len()
    }

    /// `ell*/n`.
    pub fn ratio(&self) -> Rational {
        Rational::from((self.outcome.ell_star, self.n))
    }

    /// Exact-value prediction met in both `ell*` and, where predicted, `x*`.
    pub fn agrees(&self) -> bool {
        match &self.prediction.predicted {
            Predicted::Exact { ell, x } => {
                self.outcome.ell_star == *ell && x.map_or(true, |x| self.outcome.x_star == x)
            }
            Predicted::Ratio(_) => false,
        }
    }
}

/// `ell*` and its prediction at one `n`.
pub fn scan_row(n: u32, p: &PValue) -> Result<ScanRow> {
    let outcome = exact_lstar(n, p)?;
    let prediction = predict(n, p)?;
    let deviation = match &prediction.predicted {
        Predicted::Exact { ell, .. } => Deviation::Exact(i64::from(outcome.ell_star) - i64::from(*ell)),
        Predicted::Ratio(ratio) => Deviation::Ratio(Rational::from((outcome.ell_star, n)) - ratio),
    };
    Ok(ScanRow {
        n,
        outcome,
        prediction,
        deviation,
    })
}

/// `from, from + stride, ..., <= to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub from: u32,
    pub to: u32,
    pub stride: u32,
}

impl NRange {
    pub fn new(from: u32, to: u32, stride: u32) -> Result<Self> {
        if from == 0 || stride == 0 || from > to {
            return Err(invalid("range", "need 1 <= from <= to and stride >= 1"));
        }
        Ok(Self { from, to, stride })
    }

    pub fn values(&self) -> Vec<u32> {
        (self.from..=self.to).step_by(self.stride as usize).collect()
    }
}

/// [`scan_row`] over a range of `n`, in parallel on the current rayon pool;
/// rows come back ordered by `n`.
pub fn scan(p: &PValue, range: NRange) -> Result<Vec<ScanRow>> {
    range.values().into_par_iter().map(|n| scan_row(n, p)).collect()
}

/// Smallest scanned `n` from which every row agrees with its exact-value
/// prediction; `None` if the last row disagrees.
pub fn agreement_threshold(rows: &[ScanRow]) -> Option<u32> {
    let mut start = None;
    for row in rows.iter().rev() {
        if row.agrees() {
            start = Some(row.n);
        } else {
            break;
        }
    }
    start
}

/// Residues `ell*(n) - ratio * n` over odd `n` for `p = r/s`, `s` even.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicityReport {
    pub ratio: Rational,
    pub residues: Vec<(u32, Rational)>,
    pub max_abs_residue: Rational,
    /// Smallest `P` such that the residue at `n + 2P` equals the one at `n`
    /// across the window, checked over at least `P` pairs.
    pub period: Option<u32>,
}

/// Computes the residue sequence over the odd values of `range`.
pub fn periodicity_probe(p: &PValue, range: NRange) -> Result<PeriodicityReport> {
    let exact = p
        .exact()
        .ok_or_else(|| invalid("p", "the periodicity probe needs a rational p"))?;
    p.check_open()?;
    if exact.denom().is_odd() {
        return Err(invalid("p", "the periodicity probe needs an even denominator"));
    }
    if is_half(exact) {
        return Err(invalid("p", "p = 1/2 makes the limiting ratio singular"));
    }
    let ratio = even_denominator_ratio(exact.numer(), exact.denom());
    let first_odd = range.from | 1;
    let odd = NRange::new(first_odd, range.to, 2.max(range.stride + range.stride % 2))
        .map_err(|_| invalid("range", "no odd n in range"))?;
    let rows = scan(p, odd)?;
    let residues: Vec<(u32, Rational)> = rows
        .iter()
        .map(|row| {
            let r = Rational::from(row.outcome.ell_star) - Rational::from(&ratio * row.n);
            (row.n, r)
        })
        .collect();
    let max_abs_residue = residues
        .iter()
        .map(|(_, r)| Rational::from(r.abs_ref()))
        .max()
        .unwrap_or_default();
    let step = odd.stride;
    let period = (1..=residues.len() / 2).find(|&shift| {
        residues
            .iter()
            .zip(&residues[shift..])
            .all(|(a, b)| a.1 == b.1)
    });
    let period = period.map(|shift| shift as u32 * step / 2);
    Ok(PeriodicityReport {
        ratio,
        residues,
        max_abs_residue,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn exact(n: i64, d: i64) -> PValue {
        PValue::rational(q(n, d)).unwrap()
    }

    #[test]
    fn prediction_examples() {
        let dec = PValue::from_input(&ProbInput::parse("0.37", 128).unwrap(), false).unwrap();
        let even = predict(100, &dec).unwrap();
        assert_eq!(even.case, PCase::EvenN);
        assert_eq!(even.predicted, Predicted::Exact { ell: 50, x: Some(0) });

        let third = predict(101, &exact(1, 3)).unwrap();
        assert_eq!(third.predicted, Predicted::Exact { ell: 52, x: Some(1) });

        let quarter = predict(1001, &exact(1, 4)).unwrap();
        assert_eq!(quarter.predicted, Predicted::Ratio(q(4, 5)));

        let half = predict(7, &exact(1, 2)).unwrap();
        assert_eq!(half.case, PCase::Symmetric);
        assert!(half.all_tied);

        let irr = PValue::from_input(&ProbInput::parse("0.41421356237309504880168872420969807856967187537694", 200).unwrap(), true).unwrap();
        assert_eq!(predict(11, &irr).unwrap().predicted, Predicted::Ratio(q(1, 2)));
    }

    #[test]
    fn small_p_takes_precedence() {
        // 1 - 2^(-1/3) ~ 0.2063
        assert_eq!(classify(3, &exact(1, 5)).unwrap(), PCase::SmallP);
        assert_eq!(
            classify(3, &exact(1, 4)).unwrap(),
            PCase::EvenDenominator { r: 1.into(), s: 4.into() }
        );
        assert_eq!(classify(4, &exact(1, 10)).unwrap(), PCase::SmallP);
        assert_eq!(classify(6, &exact(1, 5)).unwrap(), PCase::EvenN);
    }

    #[test]
    fn odd_denominator_clamps_large_s() {
        let p = predict(3, &exact(4, 7)).unwrap();
        assert_eq!(p.predicted, Predicted::Exact { ell: 3, x: Some(4) });
    }

    #[test]
    fn exact_examples() {
        let a = exact_lstar(6, &exact(1, 5)).unwrap();
        assert_eq!((a.ell_star, a.x_star), (3, 0));
        let small = PValue::from_input(&ProbInput::parse("0.01", 128).unwrap(), false).unwrap();
        let b = exact_lstar(3, &small).unwrap();
        assert_eq!((b.ell_star, b.x_star), (2, 0));
    }

    #[test]
    fn float_backend_matches_exact() {
        for (n, r, s) in [(9u32, 1i64, 3i64), (10, 2, 5), (15, 1, 4), (13, 3, 4), (12, 7, 9), (1, 1, 3)] {
            let ex = exact_lstar(n, &exact(r, s)).unwrap();
            let fl = exact_lstar(n, &PValue::float(q(r, s), 128).unwrap()).unwrap();
            assert_eq!((ex.ell_star, ex.x_star), (fl.ell_star, fl.x_star), "n={n} p={r}/{s}");
            assert_eq!(ex.ties, fl.ties, "n={n} p={r}/{s}");
            let Prob::Exact(pe) = &ex.prob else { unreachable!() };
            assert!((fl.prob.to_f64() - pe.to_f64()).abs() < 1e-15);
        }
    }

    #[test]
    fn screened_matches_full_ladder() {
        for (n, pv) in [(31u32, 0.25), (40, 0.3), (57, 0.5), (64, 0.9), (101, 0.123456789)] {
            let p = Float::with_val(128, pv);
            let a = float_concentration(n, &p).unwrap();
            let b = float_concentration_full(n, &p).unwrap();
            assert_eq!((a.ell_star, a.x_star, &a.ties), (b.ell_star, b.x_star, &b.ties), "n={n} p={pv}");
            let rel = ((a.prob.to_f64() - b.prob.to_f64()) / b.prob.to_f64()).abs();
            assert!(rel < 1e-25, "n={n} p={pv} rel={rel}");
        }
    }

    #[test]
    fn half_ties_every_split() {
        let ex = exact_lstar(7, &exact(1, 2)).unwrap();
        assert!(ex.all_splits_tied());
        let fl = exact_lstar(7, &PValue::float(q(1, 2), 128).unwrap()).unwrap();
        assert!(fl.all_splits_tied());
    }

    #[test]
    fn scan_and_threshold() {
        let rows = scan(&exact(1, 3), NRange::new(9, 61, 2).unwrap()).unwrap();
        assert_eq!(rows.first().unwrap().n, 9);
        assert!(rows.windows(2).all(|w| w[0].n < w[1].n));
        let n0 = agreement_threshold(&rows).expect("prediction holds at the top of the window");
        assert!(rows.iter().filter(|r| r.n >= n0).all(ScanRow::agrees));
    }

    #[test]
    fn probe_rejects_bad_p() {
        let range = NRange::new(21, 41, 2).unwrap();
        assert!(periodicity_probe(&exact(1, 3), range).is_err());
        assert!(periodicity_probe(&exact(1, 2), range).is_err());
        let report = periodicity_probe(&exact(1, 4), range).unwrap();
        assert_eq!(report.ratio, q(4, 5));
        assert_eq!(report.residues.len(), 11);
    }

    #[test]
    fn irrational_requires_decimal() {
        let input = ProbInput::parse("1/3", 128).unwrap();
        assert!(PValue::from_input(&input, true).is_err());
    }
}
