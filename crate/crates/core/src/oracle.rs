//! Brute-force ground truth for `X = sum a_i xi_i` with arbitrary nonzero
//! coefficients.
//!
//! Every routine here enumerates all `2^n` subsets. Two backends exist:
//! exact (rational coefficients, scaled to integers and grouped exactly) and
//! float (`f64` coefficients, grouped after sorting with relative tolerance
//! [`MATCH_EPS`]).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{invalid, Error, Result};
use crate::exact::concentration_bound;
use crate::prob::check_probability;

/// Largest `n` accepted for point queries and atom enumeration.
pub const POINT_GUARD: usize = 24;

/// Largest `n` accepted by [`verify_bound`].
pub const VERIFY_GUARD: usize = 16;

/// Relative tolerance used to merge float subset sums.
pub const MATCH_EPS: f64 = 1e-9;

/// Slack allowed when comparing float concentrations against exact bounds.
pub const FLOAT_BOUND_TOL: f64 = 1e-9;

/// Nonzero coefficients `a_1, ..., a_n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<T> {
    coeffs: Vec<T>,
}

impl<T> CoefficientVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl CoefficientVector<Rational> {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("coeffs", "need at least one coefficient"));
        }
        if let Some(i) = coeffs.iter().position(|c| *c == 0) {
            return Err(Error::ZeroCoefficient(i));
        }
        Ok(Self { coeffs })
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Rational::from(v)).collect())
    }
}

impl CoefficientVector<f64> {
    pub fn from_f64s(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("coeffs", "need at least one coefficient"));
        }
        if let Some(i) = coeffs.iter().position(|c| *c == 0.0) {
            return Err(Error::ZeroCoefficient(i));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coeffs", "coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }
}

fn check_guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::GuardExceeded {
            what: "n",
            value: n,
            limit,
        });
    }
    Ok(())
}

/// Atoms of `X`: `(value, mass)` sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomDist<T> {
    atoms: Vec<(T, T)>,
}

impl<T> AtomDist<T> {
    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

impl AtomDist<Rational> {
    pub fn total(&self) -> Rational {
        self.atoms.iter().fold(Rational::new(), |acc, (_, w)| acc + w)
    }
}

impl AtomDist<f64> {
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }
}

/// Exact subset sums of a rational coefficient vector, grouped by value and
/// subset size. Independent of `p`, so one enumeration serves many `p`.
#[derive(Debug, Clone)]
pub struct ExactSubsetSums {
    n: usize,
    /// Common denominator of the coefficients.
    scale: Integer,
    /// `sum * 32 + |S|` for every subset `S`, sorted.
    keys: Vec<i64>,
}

const SIZE_BITS: u32 = 5;

impl ExactSubsetSums {
    pub fn new(coeffs: &CoefficientVector<Rational>) -> Result<Self> {
        let n = coeffs.len();
        check_guard(n, POINT_GUARD)?;
        let scale = coeffs
            .as_slice()
            .iter()
            .fold(Integer::from(1), |acc, c| acc.lcm(c.denom()));
        let scaled: Vec<i64> = coeffs
            .as_slice()
            .iter()
            .map(|c| {
                (c.numer() * Integer::from(&scale / c.denom()))
                    .to_i64()
                    .ok_or_else(|| invalid("coeffs", "scaled coefficients exceed 64 bits"))
            })
            .collect::<Result<_>>()?;
        let magnitude: i128 = scaled.iter().map(|z| i128::from(z.unsigned_abs())).sum();
        if magnitude >= 1 << (62 - SIZE_BITS) {
            return Err(invalid("coeffs", "subset sums too large to enumerate exactly"));
        }

        let mut keys = vec![0i64; 1 << n];
        for mask in 1usize..1 << n {
            let low = mask.trailing_zeros() as usize;
            let prev = keys[mask & (mask - 1)];
            // Shifting back recovers the sum: the size field is below 32.
            let sum = (prev >> SIZE_BITS) + scaled[low];
            keys[mask] = (sum << SIZE_BITS) | i64::from(mask.count_ones());
        }
        keys.sort_unstable();
        Ok(Self { n, scale, keys })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(value, counts)` per distinct sum, where `counts[k]` is the number of
    /// `k`-subsets hitting `value`.
    pub fn groups(&self) -> impl Iterator<Item = (Rational, Vec<u64>)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.keys.len() {
                return None;
            }
            let sum = self.keys[i] >> SIZE_BITS;
            let mut counts = vec![0u64; self.n + 1];
            while i < self.keys.len() && self.keys[i] >> SIZE_BITS == sum {
                counts[(self.keys[i] & ((1 << SIZE_BITS) - 1)) as usize] += 1;
                i += 1;
            }
            Some((Rational::from((Integer::from(sum), self.scale.clone())), counts))
        })
    }

    pub fn atoms(&self, p: &Rational) -> Result<AtomDist<Rational>> {
        let weights = MassWeights::new(p, self.n)?;
        let atoms = self
            .groups()
            .map(|(value, counts)| {
                let mass = Rational::from((weights.numerator(&counts), weights.denom.clone()));
                (value, mass)
            })
            .filter(|(_, w)| *w != 0)
            .collect();
        Ok(AtomDist { atoms })
    }

    /// Heaviest atom, ties toward smaller `|x|` then smaller `x`.
    pub fn concentration(&self, p: &Rational) -> Result<(Rational, Rational)> {
        let weights = MassWeights::new(p, self.n)?;
        let mut best: Option<(Rational, Integer)> = None;
        for (value, counts) in self.groups() {
            let mass = weights.numerator(&counts);
            let better = match &best {
                None => true,
                Some((bx, bm)) => {
                    mass > *bm
                        || (mass == *bm
                            && (Rational::from(value.abs_ref()), value.clone())
                                < (Rational::from(bx.abs_ref()), bx.clone()))
                }
            };
            if better {
                best = Some((value, mass));
            }
        }
        let (x, mass) = best.expect("at least the empty subset");
        Ok((x, Rational::from((mass, weights.denom))))
    }
}

/// `r^k (s-r)^(n-k)` numerators over `s^n`.
struct MassWeights {
    per_size: Vec<Integer>,
    denom: Integer,
}

impl MassWeights {
    fn new(p: &Rational, n: usize) -> Result<Self> {
        check_probability(p)?;
        let r = p.numer();
        let q = Integer::from(p.denom() - r);
        let per_size = (0..=n as u32)
            .map(|k| Integer::from(r.pow(k)) * Integer::from((&q).pow(n as u32 - k)))
            .collect();
        Ok(Self {
            per_size,
            denom: Integer::from(p.denom().pow(n as u32)),
        })
    }

    fn numerator(&self, counts: &[u64]) -> Integer {
        counts
            .iter()
            .zip(&self.per_size)
            .filter(|(c, _)| **c > 0)
            .fold(Integer::new(), |acc, (c, w)| acc + Integer::from(w * *c))
    }
}

/// Float subset sums, sorted and grouped with relative tolerance
/// [`MATCH_EPS`] (scaled by the largest coefficient magnitude).
#[derive(Debug, Clone)]
pub struct FloatSubsetSums {
    n: usize,
    /// `(sum, |S|)`, sorted by sum.
    entries: Vec<(f64, u8)>,
    /// Start index of each group in `entries`.
    group_starts: Vec<usize>,
}

impl FloatSubsetSums {
    pub fn new(coeffs: &CoefficientVector<f64>) -> Result<Self> {
        let n = coeffs.len();
        check_guard(n, POINT_GUARD)?;
        let a = coeffs.as_slice();
        let mut sums = vec![0f64; 1 << n];
        for mask in 1usize..1 << n {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + a[low];
        }
        let mut entries: Vec<(f64, u8)> = sums
            .into_iter()
            .enumerate()
            .map(|(mask, s)| (s, mask.count_ones() as u8))
            .collect();
        entries.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));

        let tol = MATCH_EPS * a.iter().fold(0f64, |m, c| m.max(c.abs()));
        let mut group_starts = Vec::new();
        let mut anchor = f64::NEG_INFINITY;
        for (i, (s, _)) in entries.iter().enumerate() {
            if i == 0 || s - anchor > tol {
                group_starts.push(i);
                anchor = *s;
            }
        }
        Ok(Self {
            n,
            entries,
            group_starts,
        })
    }

    fn groups(&self) -> impl Iterator<Item = &[(f64, u8)]> + '_ {
        let ends = self.group_starts.iter().skip(1).copied().chain([self.entries.len()]);
        self.group_starts
            .iter()
            .zip(ends)
            .map(|(&s, e)| &self.entries[s..e])
    }

    fn size_weights(&self, p: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p.to_string()));
        }
        Ok((0..=self.n as i32)
            .map(|k| p.powi(k) * (1.0 - p).powi(self.n as i32 - k))
            .collect())
    }

    /// Atoms located at the mean of each group.
    pub fn atoms(&self, p: f64) -> Result<AtomDist<f64>> {
        let w = self.size_weights(p)?;
        let atoms = self
            .groups()
            .map(|g| {
                let loc = g.iter().map(|e| e.0).sum::<f64>() / g.len() as f64;
                let mass = g.iter().map(|e| w[e.1 as usize]).sum();
                (loc, mass)
            })
            .collect();
        Ok(AtomDist { atoms })
    }

    /// Heaviest atom; masses within `1e-12` relative count as tied, then the
    /// smaller `|x|` wins.
    pub fn concentration(&self, p: f64) -> Result<(f64, f64)> {
        let atoms = self.atoms(p)?;
        let mut best = atoms.atoms[0];
        for &(x, w) in &atoms.atoms[1..] {
            let tied = (w - best.1).abs() <= 1e-12 * best.1.max(w);
            if (!tied && w > best.1) || (tied && (x.abs(), x) < (best.0.abs(), best.0)) {
                best = (x, w);
            }
        }
        Ok(best)
    }
}

/// `Pr(X = x)` by enumeration, exact.
pub fn point_prob(coeffs: &CoefficientVector<Rational>, p: &Rational, x: &Rational) -> Result<Rational> {
    check_probability(p)?;
    let sums = ExactSubsetSums::new(coeffs)?;
    let weights = MassWeights::new(p, sums.n)?;
    let hit = sums.groups().find(|(value, _)| value == x);
    Ok(match hit {
        Some((_, counts)) => Rational::from((weights.numerator(&counts), weights.denom)),
        None => Rational::new(),
    })
}

/// `Pr(X = x)` by enumeration, float; sums within the match tolerance of `x`
/// count as hitting it.
pub fn point_prob_float(coeffs: &CoefficientVector<f64>, p: f64, x: f64) -> Result<f64> {
    let sums = FloatSubsetSums::new(coeffs)?;
    let w = sums.size_weights(p)?;
    let tol = MATCH_EPS * coeffs.as_slice().iter().fold(0f64, |m, c| m.max(c.abs()));
    Ok(sums
        .entries
        .iter()
        .filter(|(s, _)| (s - x).abs() <= tol)
        .map(|(_, k)| w[*k as usize])
        .sum())
}

/// Heaviest atom `(x*, Pr(X = x*))`, exact.
pub fn concentration(coeffs: &CoefficientVector<Rational>, p: &Rational) -> Result<(Rational, Rational)> {
    ExactSubsetSums::new(coeffs)?.concentration(p)
}

/// Heaviest atom `(x*, Pr(X = x*))`, float.
pub fn concentration_float(coeffs: &CoefficientVector<f64>, p: f64) -> Result<(f64, f64)> {
    FloatSubsetSums::new(coeffs)?.concentration(p)
}

/// Probability that a uniformly random `k`-subset of the multiset `a` sums to
/// `r`.
pub fn alpha_from_multiset(a: &[Rational], k: usize, r: &Rational) -> Result<Rational> {
    if k > a.len() {
        return Err(invalid("k", format!("{k} exceeds multiset size {}", a.len())));
    }
    if a.is_empty() {
        return Ok(Rational::from(u32::from(*r == 0)));
    }
    if a.iter().any(|v| *v <= 0) {
        return Err(invalid("a", "multiset entries must be positive"));
    }
    let sums = ExactSubsetSums::new(&CoefficientVector::new(a.to_vec())?)?;
    let hits = sums
        .groups()
        .find(|(value, _)| value == r)
        .map(|(_, counts)| counts[k])
        .unwrap_or(0);
    let total = Integer::from(Integer::binomial_u(a.len() as u32, k as u32));
    Ok(Rational::from((Integer::from(hits), total)))
}

/// How [`verify_bound`] generates coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// `count` random float vectors.
    RandomSample {
        count: usize,
        distribution: SampleDistribution,
        seed: u64,
    },
    /// Every multiset of size `n` drawn from `values`, deduplicated up to
    /// permutation and scaling; evaluated exactly.
    Grid { values: Vec<i64> },
    /// Perturbs single coordinates of every `+-1` vector by
    /// `+-radius * j / steps`, `j = 1..=steps`; requires `0 < radius < 1`.
    HillClimb { radius: f64, steps: usize },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::RandomSample { .. } => "random-sample",
            Strategy::Grid { .. } => "grid",
            Strategy::HillClimb { .. } => "hill-climb",
        }
    }
}

/// Coefficient distribution for random sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleDistribution {
    /// Uniform on `[low, high]`, redrawing values with `|a| < min_abs`.
    Uniform { low: f64, high: f64, min_abs: f64 },
    /// As `Uniform`, then rounded to a multiple of `step`. Produces repeated
    /// subset sums, which plain uniform draws almost never do.
    Quantized {
        low: f64,
        high: f64,
        min_abs: f64,
        step: f64,
    },
}

impl Default for SampleDistribution {
    fn default() -> Self {
        SampleDistribution::Uniform {
            low: -2.0,
            high: 2.0,
            min_abs: 0.05,
        }
    }
}

impl SampleDistribution {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let (low, high, min_abs, step) = match *self {
            SampleDistribution::Uniform { low, high, min_abs } => (low, high, min_abs, None),
            SampleDistribution::Quantized {
                low,
                high,
                min_abs,
                step,
            } => (low, high, min_abs, Some(step)),
        };
        loop {
            let mut v = rng.gen_range(low..=high);
            if let Some(step) = step {
                v = (v / step).round() * step;
            }
            if v.abs() >= min_abs && v != 0.0 {
                return v;
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (low, high, min_abs) = match *self {
            SampleDistribution::Uniform { low, high, min_abs } => (low, high, min_abs),
            SampleDistribution::Quantized {
                low,
                high,
                min_abs,
                step,
            } => {
                if step.is_nan() || step <= 0.0 {
                    return Err(invalid("step", "must be positive"));
                }
                (low, high, min_abs)
            }
        };
        let ordered = low < high && min_abs >= 0.0;
        if !ordered || low.abs().max(high.abs()) <= min_abs {
            return Err(invalid("distribution", "empty sampling range"));
        }
        Ok(())
    }
}

/// Largest concentration seen by a verification run.
#[derive(Debug, Clone, PartialEq)]
pub enum Observed {
    Exact(Rational),
    Float(f64),
}

impl Observed {
    pub fn to_f64(&self) -> f64 {
        match self {
            Observed::Exact(r) => r.to_f64(),
            Observed::Float(v) => *v,
        }
    }
}

/// Outcome of checking the `+-1` bound on generated coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub n: usize,
    pub p: Rational,
    pub strategy: &'static str,
    pub samples: usize,
    pub max_observed: Observed,
    pub bound: Rational,
    /// Coefficients of the vector attaining `max_observed`, as text.
    pub worst: Vec<String>,
    /// Vectors whose concentration exceeded the bound.
    pub violations: usize,
    /// Hill-climb perturbations that strictly raised the concentration of the
    /// `+-1` vector they started from.
    pub local_increases: usize,
    pub pass: bool,
}

/// Checks `concentration(a, p) <= concentration_bound(n, p)` over vectors
/// produced by `strategy`.
pub fn verify_bound(n: usize, p: &Rational, strategy: &Strategy) -> Result<VerificationReport> {
    let mut reports = verify_bound_multi(n, std::slice::from_ref(p), strategy)?;
    Ok(reports.remove(0))
}

/// [`verify_bound`] for several `p` at once, sharing the subset-sum
/// enumeration of each generated vector.
pub fn verify_bound_multi(
    n: usize,
    ps: &[Rational],
    strategy: &Strategy,
) -> Result<Vec<VerificationReport>> {
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    check_guard(n, VERIFY_GUARD)?;
    let mut tallies = ps
        .iter()
        .map(|p| Tally::new(n, p))
        .collect::<Result<Vec<_>>>()?;

    match strategy {
        Strategy::Grid { values } => {
            for vector in grid_vectors(n, values)? {
                let coeffs = CoefficientVector::from_integers(&vector)?;
                let sums = ExactSubsetSums::new(&coeffs)?;
                for tally in &mut tallies {
                    let (_, prob) = sums.concentration(&tally.p)?;
                    tally.record_exact(prob, &vector);
                }
            }
        }
        Strategy::RandomSample {
            count,
            distribution,
            seed,
        } => {
            distribution.validate()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
            for _ in 0..*count {
                let vector: Vec<f64> = (0..n).map(|_| distribution.sample(&mut rng)).collect();
                let sums = FloatSubsetSums::new(&CoefficientVector::from_f64s(vector.clone())?)?;
                for tally in &mut tallies {
                    let (_, prob) = sums.concentration(tally.p_float)?;
                    tally.record_float(prob, &vector);
                }
            }
        }
        Strategy::HillClimb { radius, steps } => {
            if !(*radius > 0.0 && *radius < 1.0) || *steps == 0 {
                return Err(invalid(
                    "radius",
                    "hill-climb needs 0 < radius < 1 and at least one step",
                ));
            }
            for ell in 0..=n {
                let base: Vec<f64> = (0..n).map(|i| if i < ell { 1.0 } else { -1.0 }).collect();
                let base_sums = FloatSubsetSums::new(&CoefficientVector::from_f64s(base.clone())?)?;
                let base_conc: Vec<f64> = tallies
                    .iter()
                    .map(|t| base_sums.concentration(t.p_float).map(|c| c.1))
                    .collect::<Result<_>>()?;
                // Coordinates with equal sign are interchangeable, so one
                // representative of each sign covers every coordinate.
                let reps = [(ell > 0).then_some(0), (ell < n).then_some(ell)];
                for i in reps.into_iter().flatten() {
                    for j in 1..=*steps {
                        for sign in [-1.0, 1.0] {
                            let mut v = base.clone();
                            v[i] += sign * radius * j as f64 / *steps as f64;
                            let sums = FloatSubsetSums::new(&CoefficientVector::from_f64s(v.clone())?)?;
                            for (tally, base_c) in tallies.iter_mut().zip(&base_conc) {
                                let (_, prob) = sums.concentration(tally.p_float)?;
                                if prob > base_c + FLOAT_BOUND_TOL {
                                    tally.local_increases += 1;
                                }
                                tally.record_float(prob, &v);
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(tallies
        .into_iter()
        .map(|t| t.finish(n, strategy.name()))
        .collect())
}

struct Tally {
    p: Rational,
    p_float: f64,
    bound: Rational,
    bound_float: f64,
    samples: usize,
    max: Option<Observed>,
    worst: Vec<String>,
    violations: usize,
    local_increases: usize,
}

impl Tally {
    fn new(n: usize, p: &Rational) -> Result<Self> {
        let bound = concentration_bound(n as u32, p)?.prob;
        Ok(Self {
            p: p.clone(),
            p_float: p.to_f64(),
            bound_float: bound.to_f64(),
            bound,
            samples: 0,
            max: None,
            worst: Vec::new(),
            violations: 0,
            local_increases: 0,
        })
    }

    fn record_exact(&mut self, prob: Rational, vector: &[i64]) {
        self.samples += 1;
        if prob > self.bound {
            self.violations += 1;
        }
        let better = match &self.max {
            Some(Observed::Exact(m)) => prob > *m,
            Some(Observed::Float(m)) => prob.to_f64() > *m,
            None => true,
        };
        if better {
            self.worst = vector.iter().map(|v| v.to_string()).collect();
            self.max = Some(Observed::Exact(prob));
        }
    }

    fn record_float(&mut self, prob: f64, vector: &[f64]) {
        self.samples += 1;
        if prob > self.bound_float + FLOAT_BOUND_TOL {
            self.violations += 1;
        }
        if self.max.as_ref().map_or(true, |m| prob > m.to_f64()) {
            self.worst = vector.iter().map(|v| format!("{v:.17}")).collect();
            self.max = Some(Observed::Float(prob));
        }
    }

    fn finish(self, n: usize, strategy: &'static str) -> VerificationReport {
        VerificationReport {
            n,
            pass: self.violations == 0 && self.local_increases == 0,
            p: self.p,
            strategy,
            samples: self.samples,
            max_observed: self.max.unwrap_or(Observed::Exact(Rational::new())),
            bound: self.bound,
            worst: self.worst,
            violations: self.violations,
            local_increases: self.local_increases,
        }
    }
}

/// Multisets of size `n` over `values` (zero excluded), one representative
/// per class under permutation and nonzero scaling.
pub fn grid_vectors(n: usize, values: &[i64]) -> Result<Vec<Vec<i64>>> {
    let mut pool: Vec<i64> = values.iter().copied().filter(|v| *v != 0).collect();
    pool.sort_unstable();
    pool.dedup();
    if pool.is_empty() {
        return Err(invalid("values", "grid needs at least one nonzero value"));
    }
    let mut seen = BTreeSet::new();
    let mut idx = vec![0usize; n];
    loop {
        let vector: Vec<i64> = idx.iter().map(|&i| pool[i]).collect();
        seen.insert(canonical_form(&vector));
        // Next nondecreasing index tuple.
        let Some(pos) = (0..n).rev().find(|&i| idx[i] + 1 < pool.len()) else {
            break;
        };
        let next = idx[pos] + 1;
        for slot in &mut idx[pos..] {
            *slot = next;
        }
    }
    Ok(seen.into_iter().collect())
}

fn canonical_form(vector: &[i64]) -> Vec<i64> {
    let g = vector.iter().fold(0u64, |g, v| gcd(g, v.unsigned_abs())) as i64;
    let mut pos: Vec<i64> = vector.iter().map(|v| v / g).collect();
    let mut neg: Vec<i64> = pos.iter().map(|v| -v).collect();
    pos.sort_unstable();
    neg.sort_unstable();
    pos.min(neg)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
