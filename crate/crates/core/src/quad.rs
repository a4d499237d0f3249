//! Globally adaptive Gauss-Legendre quadrature in MPFR arithmetic.
//!
//! Each panel is integrated with a 10-point and a 20-point Gauss-Legendre
//! rule; `|G20 - G10|` is the panel's error estimate and `G20` its value. The
//! panel with the largest estimate is bisected until the summed estimate meets
//! the tolerance or the evaluation budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rug::float::Constant;
use rug::Float;

use crate::error::{invalid, Error, Result};
use crate::prob::float_to_decimal;

/// Default cap on integrand evaluations per integral.
pub const DEFAULT_MAX_EVALUATIONS: usize = 2_000_000;

/// Stop once the error estimate is at most `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.abs) || !ok(self.rel) || (self.abs == 0.0 && self.rel == 0.0) {
            return Err(invalid("tol", "need a positive absolute or relative tolerance"));
        }
        Ok(())
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: Float,
    pub abs_error_estimate: Float,
    pub evaluations: usize,
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
struct Rule {
    nodes: Vec<Float>,
    weights: Vec<Float>,
}

impl Rule {
    /// Roots of the degree-`n` Legendre polynomial by Newton iteration.
    fn gauss_legendre(n: usize, prec: u32) -> Self {
        let work = prec + 32;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let eps = Float::with_val(work, Float::i_exp(1, -(prec as i32) - 8));
        for i in 1..=n {
            let guess = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut x = Float::with_val(work, guess);
            for _ in 0..200 {
                let (p, dp) = legendre_with_derivative(n, &x);
                let step = Float::with_val(work, &p / &dp);
                x -= &step;
                if step.abs() < eps {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, &x);
            // w = 2 / ((1 - x^2) P_n'(x)^2)
            let one_minus = Float::with_val(work, 1u32 - Float::with_val(work, x.square_ref()));
            let w = Float::with_val(work, 2u32 / (one_minus * Float::with_val(work, dp.square_ref())));
            nodes.push(Float::with_val(prec, &x));
            weights.push(Float::with_val(prec, &w));
        }
        Self { nodes, weights }
    }

    fn apply<F>(&self, f: &mut F, mid: &Float, half: &Float) -> Result<Float>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        let prec = mid.prec();
        let mut sum = Float::new(prec);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let y = Float::with_val(prec, half * x) + mid;
            sum += f(&y)? * w;
        }
        Ok(sum * half)
    }
}

/// `(P_n(x), P_n'(x))`, using `P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)`.
fn legendre_with_derivative(n: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let (p, p_prev) = legendre(n, x);
    let x2m1 = Float::with_val(prec, x.square_ref()) - 1u32;
    let mut dp = Float::with_val(prec, x * &p) - p_prev;
    dp *= n as u32;
    dp /= &x2m1;
    (p, dp)
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre(n: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p_prev = Float::with_val(prec, 1u32);
    let mut p = Float::with_val(prec, x);
    for k in 2..=n as u32 {
        let next = (Float::with_val(prec, x * &p) * (2 * k - 1) - Float::with_val(prec, &p_prev * (k - 1))) / k;
        p_prev = std::mem::replace(&mut p, next);
    }
    (p, p_prev)
}

struct Panel {
    lo: Float,
    hi: Float,
    value: Float,
    error: Float,
}

/// Heap key: larger error first, then lower index for determinism.
#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Adaptive integrator at a fixed MPFR precision.
#[derive(Debug, Clone)]
pub struct Integrator {
    prec: u32,
    coarse: Rule,
    fine: Rule,
    max_evaluations: usize,
}

impl Integrator {
    pub fn new(prec: u32) -> Self {
        Self {
            prec,
            coarse: Rule::gauss_legendre(10, prec),
            fine: Rule::gauss_legendre(20, prec),
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }

    pub fn with_max_evaluations(mut self, max_evaluations: usize) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    fn panel<F>(&self, f: &mut F, lo: Float, hi: Float) -> Result<Panel>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        let mid = Float::with_val(self.prec, &lo + &hi) / 2u32;
        let half = Float::with_val(self.prec, &hi - &lo) / 2u32;
        let value = self.fine.apply(f, &mid, &half)?;
        let coarse = self.coarse.apply(f, &mid, &half)?;
        let error = Float::with_val(self.prec, &value - &coarse).abs();
        Ok(Panel { lo, hi, value, error })
    }

    fn evals_per_panel(&self) -> usize {
        self.coarse.nodes.len() + self.fine.nodes.len()
    }

    /// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, starting
    /// from the panels delimited by `breakpoints` (strictly increasing).
    pub fn integrate<F>(&self, mut f: F, breakpoints: &[Float], tol: Tolerance) -> Result<QuadResult>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        tol.validate()?;
        if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("breakpoints", "need at least two strictly increasing points"));
        }
        let mut panels: Vec<Option<Panel>> = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut evaluations = 0;
        for w in breakpoints.windows(2) {
            let panel = self.panel(&mut f, w[0].clone(), w[1].clone())?;
            evaluations += self.evals_per_panel();
            heap.push(Key(panel.error.to_f64(), panels.len()));
            panels.push(Some(panel));
        }
        loop {
            let mut value = Float::new(self.prec + 32);
            let mut error = Float::new(self.prec + 32);
            for panel in panels.iter().flatten() {
                value += &panel.value;
                error += &panel.error;
            }
            let target = tol.abs.max(tol.rel * value.to_f64().abs());
            if error.to_f64() <= target || error.is_zero() {
                return Ok(QuadResult {
                    value: Float::with_val(self.prec, value),
                    abs_error_estimate: Float::with_val(self.prec, error),
                    evaluations,
                });
            }
            if evaluations + 2 * self.evals_per_panel() > self.max_evaluations {
                return Err(Error::NoConvergence {
                    estimate: float_to_decimal(&value, 20),
                    error: float_to_decimal(&error, 6),
                    evaluations,
                });
            }
            let Key(_, idx) = heap.pop().expect("live panels are always queued");
            let worst = panels[idx].take().expect("queued panel is live");
            let mid = Float::with_val(self.prec, &worst.lo + &worst.hi) / 2u32;
            if mid <= worst.lo || mid >= worst.hi {
                // Panel narrower than the working precision can split.
                return Err(Error::NoConvergence {
                    estimate: float_to_decimal(&value, 20),
                    error: float_to_decimal(&error, 6),
                    evaluations,
                });
            }
            for (lo, hi) in [(worst.lo, mid.clone()), (mid, worst.hi)] {
                let panel = self.panel(&mut f, lo, hi)?;
                evaluations += self.evals_per_panel();
                heap.push(Key(panel.error.to_f64(), panels.len()));
                panels.push(Some(panel));
            }
        }
    }
}

/// `pi` at `prec` bits.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        let rule = Rule::gauss_legendre(10, 128);
        let weight_sum: Float = rule.weights.iter().fold(Float::new(128), |acc, w| acc + w);
        assert!((weight_sum - 2u32).abs() < 1e-35);
        // x^18 is integrated exactly by the 10-point rule.
        let mut f = |x: &Float| Ok(Float::with_val(128, x.pow(18u32)));
        let mid = Float::new(128);
        let half = Float::with_val(128, 1u32);
        let v = rule.apply(&mut f, &mid, &half).unwrap();
        assert!((v - Float::with_val(128, 2) / 19u32).abs() < 1e-35);
    }

    #[test]
    fn integrates_sine() {
        let integ = Integrator::new(128);
        let bp = [Float::new(128), pi(128)];
        let r = integ
            .integrate(|y| Ok(Float::with_val(128, y.sin_ref())), &bp, Tolerance::absolute(1e-30))
            .unwrap();
        assert!((r.value - 2u32).abs() < 1e-30);
    }

    #[test]
    fn resolves_narrow_peak() {
        let integ = Integrator::new(128);
        let bp = [Float::new(128), Float::with_val(128, 1u32)];
        // exp(-10^6 y^2) on [0, 1] ~ sqrt(pi)/2000
        let r = integ
            .integrate(
                |y| Ok(Float::with_val(128, -Float::with_val(128, y.square_ref()) * 1_000_000u32).exp()),
                &bp,
                Tolerance::relative(1e-20),
            )
            .unwrap();
        let exact = pi(128).sqrt() / 2000u32;
        assert!(((r.value - &exact) / exact).abs() < 1e-19);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let integ = Integrator::new(64).with_max_evaluations(100);
        let bp = [Float::new(64), Float::with_val(64, 1u32)];
        let err = integ
            .integrate(
                |y| Ok(Float::with_val(64, Float::with_val(64, y * 500u32).sin())),
                &bp,
                Tolerance::absolute(1e-30),
            )
            .unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let integ = Integrator::new(64);
        let bp = [Float::new(64), Float::with_val(64, 1u32)];
        assert!(integ
            .integrate(|y| Ok(y.clone()), &bp, Tolerance::absolute(0.0))
            .is_err());
    }
}
