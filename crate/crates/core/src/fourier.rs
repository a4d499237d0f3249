//! Fourier inversion for `X = Bin(ell, p) - Bin(m, p)`.
//!
//! With `w(y) = 1 - p + p e^{-iy}`, `t = ell - m` and `n = ell + m`,
//!
//! ```text
//! Pr(X = x) = (1/pi) int_0^pi |w|^n dy - (1/pi) q(t, x),
//! q(t, x)   = int_0^pi |w|^n (1 - cos(x y + t arg w)) dy.
//! ```
//!
//! `|w|^n` is evaluated as `exp(n/2 * ln1p(-4p(1-p) sin^2(y/2)))` and
//! `1 - cos(theta)` as `2 sin^2(theta/2)`, so neither underflows nor cancels
//! for large `n` or small `y`.
//!
//! For large `n` and `|x - tp|` small, `q(t, x) ~ c (4u^2 + 12ut + 15t^2)`
//! with
//!
//! ```text
//! a = p(1-p)/2,  b = (p - 3p^2 + 2p^3)/6,
//! c = sqrt(pi)/32 * (an)^(-7/2) * b^2,  u = (a/b) n (x - tp).
//! ```

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{invalid, Error, Result};
use crate::exact::build_dist;
use crate::prob::{check_float_probability, check_probability};
use crate::quad::{pi, Integrator, QuadResult, Tolerance, DEFAULT_MAX_EVALUATIONS};

/// `(n, t, x, p)` with `t = 2 ell - n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierParams {
    n: u64,
    t: i64,
    x: i64,
    p: Float,
}

impl FourierParams {
    /// Requires `n >= 1`, `|t| <= n`, `t = n (mod 2)` and `0 < p < 1`. The
    /// precision of `p` is the working precision.
    pub fn new(n: u64, t: i64, x: i64, p: Float) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "must be positive"));
        }
        if t.unsigned_abs() > n || (t.unsigned_abs() % 2) != n % 2 {
            return Err(invalid("t", format!("need |t| <= n and t = n (mod 2), got t = {t}, n = {n}")));
        }
        check_float_probability(&p)?;
        if p == 0 || p == 1 {
            return Err(Error::ProbabilityOutOfRange(p.to_string()));
        }
        Ok(Self { n, t, x, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn t(&self) -> i64 {
        self.t
    }

    pub fn x(&self) -> i64 {
        self.x
    }

    pub fn p(&self) -> &Float {
        &self.p
    }

    pub fn ell(&self) -> u64 {
        ((self.n as i64 + self.t) / 2) as u64
    }

    pub fn m(&self) -> u64 {
        self.n - self.ell()
    }

    fn prec(&self) -> u32 {
        self.p.prec()
    }
}

fn check_y(y: &Float) -> Result<()> {
    let prec = y.prec().max(64);
    if y.is_nan() || *y < 0 || *y > pi(prec) {
        return Err(invalid("y", format!("{y} outside [0, pi]")));
    }
    Ok(())
}

/// `ln |w(y)|`; `-inf` where `w` vanishes.
fn log_magnitude(y: &Float, p: &Float) -> Float {
    let prec = p.prec();
    let half = Float::with_val(prec, y / 2u32);
    let s = Float::with_val(prec, half.sin_ref());
    let pq = Float::with_val(prec, p * Float::with_val(prec, 1u32 - p));
    let arg = -(pq * 4u32 * Float::with_val(prec, s.square_ref()));
    arg.ln_1p() / 2u32
}

/// `|1 - p + p e^{-iy}|` for `y` in `[0, pi]`.
pub fn char_magnitude(y: &Float, p: &Float) -> Result<Float> {
    check_y(y)?;
    check_float_probability(p)?;
    Ok(log_magnitude(y, p).exp())
}

/// Principal argument of `1 - p + p e^{-iy}`, i.e.
/// `-atan2(p sin y, 1 - p + p cos y)`. Undefined only at `p = 1/2, y = pi`.
pub fn char_arg(y: &Float, p: &Float) -> Result<Float> {
    check_y(y)?;
    check_float_probability(p)?;
    let prec = p.prec();
    // w(y) = 0 only at p = 1/2, y = pi; rounded pi never gives an exact zero.
    if *p == 0.5 && *y == pi(y.prec()) {
        return Err(invalid("y", "1 - p + p e^{-iy} vanishes at p = 1/2, y = pi"));
    }
    let (sin, cos) = y.clone().sin_cos(Float::new(prec));
    let im = Float::with_val(prec, p * &sin);
    let re = Float::with_val(prec, 1u32 - p) + Float::with_val(prec, p * &cos);
    Ok(-im.atan2(&re))
}

/// `a`, `b` and `c` for a given `n` and `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymConstants {
    pub a: Float,
    pub b: Float,
    pub c: Float,
}

impl AsymConstants {
    pub fn new(n: u64, p: &Float) -> Self {
        let prec = p.prec();
        let q = Float::with_val(prec, 1u32 - p);
        let a = Float::with_val(prec, p * &q) / 2u32;
        // p - 3p^2 + 2p^3 = p (1 - p) (1 - 2p)
        let one_minus_2p = Float::with_val(prec, 1u32 - Float::with_val(prec, p * 2u32));
        let b = Float::with_val(prec, p * &q) * one_minus_2p / 6u32;
        let an = Float::with_val(prec, &a * n);
        let root_pi = Float::with_val(prec, Constant::Pi).sqrt();
        let c = root_pi / 32u32 * an.pow(Float::with_val(prec, -3.5)) * Float::with_val(prec, b.square_ref());
        Self { a, b, c }
    }
}

/// Initial panel boundaries on `[0, pi]`: `n^-0.4`, multiples `2^k` of the
/// width `(an)^-1/2` of the peak, and a uniform mesh when the phase
/// oscillates quickly.
fn mesh(n: u64, p: &Float, oscillation: u64) -> Vec<Float> {
    let prec = p.prec();
    let top = std::f64::consts::PI * (1.0 - 1e-9);
    let mut interior = Vec::new();
    let cut = (n as f64).powf(-0.4);
    if cut < top {
        interior.push(cut);
    }
    let pf = p.to_f64();
    let a = pf * (1.0 - pf) / 2.0;
    if a > 0.0 && n > 0 {
        let sigma = 1.0 / (a * n as f64).sqrt();
        let mut y = sigma / 4.0;
        while y < top {
            interior.push(y);
            y *= 2.0;
        }
    }
    let uniform = oscillation.div_ceil(4).min(4096);
    for k in 1..uniform {
        interior.push(std::f64::consts::PI * k as f64 / uniform as f64);
    }
    interior.retain(|y| *y > 0.0 && *y < top);
    interior.sort_by(f64::total_cmp);
    interior.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut points = vec![Float::new(prec)];
    points.extend(interior.into_iter().map(|y| Float::with_val(prec, y)));
    points.push(pi(prec));
    points
}

/// `int_0^pi |w|^n (1 - cos(x y + t arg w)) dy`.
pub fn q_integral(params: &FourierParams, tol: Tolerance) -> Result<QuadResult> {
    q_integral_budget(params, tol, DEFAULT_MAX_EVALUATIONS)
}

/// [`q_integral`] with a cap on integrand evaluations.
pub fn q_integral_budget(params: &FourierParams, tol: Tolerance, max_evaluations: usize) -> Result<QuadResult> {
    let prec = params.prec();
    if params.t == 0 && params.x == 0 {
        return Ok(QuadResult {
            value: Float::new(prec),
            abs_error_estimate: Float::new(prec),
            evaluations: 0,
        });
    }
    let p = &params.p;
    let n = params.n;
    let (t, x) = (params.t, params.x);
    let integrand = |y: &Float| -> Result<Float> {
        let weight = (log_magnitude(y, p) * n).exp();
        if weight.is_zero() {
            return Ok(weight);
        }
        let theta = Float::with_val(prec, y * x) + char_arg(y, p)? * t;
        let s = Float::with_val(prec, theta / 2u32).sin();
        Ok(weight * Float::with_val(prec, s.square_ref()) * 2u32)
    };
    let breakpoints = mesh(n, p, x.unsigned_abs() + t.unsigned_abs());
    Integrator::new(prec)
        .with_max_evaluations(max_evaluations)
        .integrate(integrand, &breakpoints, tol)
}

/// `int_0^pi |w|^n dy`; equals `pi` for `n = 0`.
pub fn base_integral(n: u64, p: &Float, tol: Tolerance) -> Result<QuadResult> {
    base_integral_budget(n, p, tol, DEFAULT_MAX_EVALUATIONS)
}

/// [`base_integral`] with a cap on integrand evaluations.
pub fn base_integral_budget(n: u64, p: &Float, tol: Tolerance, max_evaluations: usize) -> Result<QuadResult> {
    check_float_probability(p)?;
    let prec = p.prec();
    if n == 0 {
        return Ok(QuadResult {
            value: pi(prec),
            abs_error_estimate: Float::new(prec),
            evaluations: 0,
        });
    }
    let integrand = |y: &Float| -> Result<Float> { Ok((log_magnitude(y, p) * n).exp()) };
    Integrator::new(prec)
        .with_max_evaluations(max_evaluations)
        .integrate(integrand, &mesh(n, p, 0), tol)
}

/// `Pr(X = x)` recovered from the two integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    pub prob: Float,
    pub base: QuadResult,
    pub q: QuadResult,
}

/// `(base - q) / pi`.
pub fn prob_identity(params: &FourierParams, tol: Tolerance) -> Result<Identity> {
    prob_identity_budget(params, tol, DEFAULT_MAX_EVALUATIONS)
}

/// [`prob_identity`] with a cap on evaluations per integral.
pub fn prob_identity_budget(params: &FourierParams, tol: Tolerance, max_evaluations: usize) -> Result<Identity> {
    let base = base_integral_budget(params.n, &params.p, tol, max_evaluations)?;
    let q = q_integral_budget(params, tol, max_evaluations)?;
    let prec = params.prec();
    let prob = Float::with_val(prec, &base.value - &q.value) / pi(prec);
    Ok(Identity { prob, base, q })
}

fn require_asymmetric(constants: &AsymConstants) -> Result<()> {
    if constants.b.is_zero() {
        return Err(invalid("p", "b vanishes at p = 1/2; no asymptotic form"));
    }
    Ok(())
}

/// `u = (a/b) n (x - tp)`.
pub fn u_of(params: &FourierParams) -> Result<Float> {
    let k = AsymConstants::new(params.n, &params.p);
    require_asymmetric(&k)?;
    Ok(Float::with_val(params.prec(), &k.a / &k.b) * params.n * offset(params))
}

/// `x - tp`.
fn offset(params: &FourierParams) -> Float {
    Float::with_val(params.prec(), params.x) - Float::with_val(params.prec(), &params.p * params.t)
}

/// `c (4u^2 + 12ut + 15t^2)`; requires `|x - tp| <= n^0.01`.
pub fn q_asymptotic(params: &FourierParams) -> Result<Float> {
    let prec = params.prec();
    let k = AsymConstants::new(params.n, &params.p);
    require_asymmetric(&k)?;
    let limit = (params.n as f64).powf(0.01);
    if offset(params).abs().to_f64() > limit {
        return Err(invalid("x", format!("|x - tp| exceeds n^0.01 = {limit}")));
    }
    let u = u_of(params)?;
    let t = Float::with_val(prec, params.t);
    Ok(k.c * quadratic_form(&u, &t))
}

/// `4u^2 + 12ut + 15t^2`.
pub fn quadratic_form(u: &Float, t: &Float) -> Float {
    let prec = u.prec().max(t.prec());
    let uu = Float::with_val(prec, u.square_ref()) * 4u32;
    let ut = Float::with_val(prec, u * t) * 12u32;
    let tt = Float::with_val(prec, t.square_ref()) * 15u32;
    uu + ut + tt
}

/// Location of the exact mode of `Bin(ell, p) - Bin(m, p)` relative to `tp`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationReport {
    pub n: u32,
    pub t: i64,
    pub p: Rational,
    /// All maximizing `x`.
    pub argmax: Vec<i64>,
    /// `max |x - tp|` over `argmax`.
    pub distance: Rational,
    /// `n^0.01`.
    pub literal_bound: f64,
    pub within_literal: bool,
    /// `distance <= 1`.
    pub within_practical: bool,
}

/// Exact argmax of the pmf for `t = 2 ell - n` and its distance from `tp`.
pub fn check_localization(n: u32, t: i64, p: &Rational) -> Result<LocalizationReport> {
    check_probability(p)?;
    if t.unsigned_abs() > u64::from(n) || t.unsigned_abs() % 2 != u64::from(n % 2) {
        return Err(invalid("t", format!("need |t| <= n and t = n (mod 2), got t = {t}, n = {n}")));
    }
    let ell = ((i64::from(n) + t) / 2) as u32;
    let dist = build_dist(ell, n - ell, p)?;
    let argmax = dist.modes();
    let tp = Rational::from(p * Integer::from(t));
    let distance = argmax
        .iter()
        .map(|&x| (Rational::from(x) - &tp).abs())
        .max()
        .unwrap_or_default();
    let literal_bound = f64::from(n).powf(0.01);
    Ok(LocalizationReport {
        n,
        t,
        p: p.clone(),
        within_literal: distance.to_f64() <= literal_bound,
        within_practical: distance <= 1,
        argmax,
        distance,
        literal_bound,
    })
}
