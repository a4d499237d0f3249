//! Subset profiles, their decomposition into pure profiles, and the bilinear
//! form that turns a pair of profiles into a point probability.
//!
//! A profile `gamma` with index `i` assigns a weight to each pair `(k, r)`,
//! `0 <= k <= i`. The profile of a positive multiset `A` of size `i` is
//! `alpha(k, r)`: the chance that a uniform `k`-subset of `A` sums to `r`.
//! Every such profile is nonnegative, has rows summing to one, and satisfies
//! the monotonicity condition
//!
//! ```text
//! sum_{r' <= r} gamma(k+1, r') + sum_{r' >= r} gamma(k, r') <= 1.
//! ```
//!
//! All values are exact rationals.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Assign, Integer, Rational};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::exact::{bin_diff_pmf, binom_pmf};
use crate::oracle::{CoefficientVector, ExactSubsetSums};
use crate::prob::check_probability;

/// Largest `ell + m` accepted by [`max_over_pure`].
pub const PURE_SIZE_GUARD: u32 = 8;

/// Largest grid accepted by [`max_over_pure`].
pub const PURE_GRID_GUARD: u32 = 12;

/// Weights `gamma(k, r)` for `k = 0..=i`. Zero weights are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetProfile {
    i: usize,
    rows: Vec<BTreeMap<Rational, Rational>>,
}

impl SubsetProfile {
    /// Builds a profile from `(k, r, weight)` triples; repeated `(k, r)` add up.
    pub fn new<I>(i: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Rational, Rational)>,
    {
        let mut rows = vec![BTreeMap::new(); i + 1];
        for (k, r, w) in entries {
            if k > i {
                return Err(invalid("k", format!("row {k} exceeds index {i}")));
            }
            *rows[k].entry(r).or_insert_with(Rational::new) += w;
        }
        for row in &mut rows {
            row.retain(|_, w| *w != 0);
        }
        Ok(Self { i, rows })
    }

    /// `alpha(k, r)` for the multiset `a` (entries positive).
    pub fn from_multiset(a: &[Rational]) -> Result<Self> {
        if a.is_empty() {
            return Self::new(0, [(0, Rational::new(), Rational::from(1))]);
        }
        if a.iter().any(|v| *v <= 0) {
            return Err(invalid("a", "multiset entries must be positive"));
        }
        let n = a.len();
        let sums = ExactSubsetSums::new(&CoefficientVector::new(a.to_vec())?)?;
        let sizes: Vec<Integer> = (0..=n as u32)
            .map(|k| Integer::from(Integer::binomial_u(n as u32, k)))
            .collect();
        let mut entries = Vec::new();
        for (value, counts) in sums.groups() {
            for (k, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let w = Rational::from((Integer::from(c), sizes[k].clone()));
                    entries.push((k, value.clone(), w));
                }
            }
        }
        Self::new(n, entries)
    }

    pub fn index(&self) -> usize {
        self.i
    }

    /// Row `k` as `r -> weight`.
    pub fn row(&self, k: usize) -> &BTreeMap<Rational, Rational> {
        &self.rows[k]
    }

    pub fn weight(&self, k: usize, r: &Rational) -> Rational {
        self.rows
            .get(k)
            .and_then(|row| row.get(r))
            .cloned()
            .unwrap_or_default()
    }

    /// Number of `(k, r)` pairs with nonzero weight.
    pub fn support_size(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    /// `(k, r, weight)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &Rational, &Rational)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().map(move |(r, w)| (k, r, w)))
    }

    /// The points `r_0 < ... < r_i` if every row is a single unit mass at
    /// strictly increasing locations.
    pub fn as_pure(&self) -> Option<PureProfile> {
        let mut points = Vec::with_capacity(self.i + 1);
        for row in &self.rows {
            let mut it = row.iter();
            match (it.next(), it.next()) {
                (Some((r, w)), None) if *w == 1 => points.push(r.clone()),
                _ => return None,
            }
        }
        PureProfile::new(points).ok()
    }

    /// `sum_{r' <= r} gamma(k+1, r') + sum_{r' >= r} gamma(k, r')`; `None`
    /// stands for `r = -inf`.
    fn monotone_sum(&self, k: usize, r: Option<&Rational>) -> Rational {
        let upper: Rational = match r {
            Some(r) => self.rows[k + 1].range(..=r.clone()).map(|(_, w)| w).sum(),
            None => Rational::new(),
        };
        let lower: Rational = match r {
            Some(r) => self.rows[k].range(r.clone()..).map(|(_, w)| w).sum(),
            None => self.rows[k].values().sum(),
        };
        upper + lower
    }

    /// Evaluates the three defining properties exactly.
    pub fn check_properties(&self) -> PropertyReport {
        let nonnegative = self.entries().all(|(_, _, w)| *w >= 0);
        let rows_sum_to_one = self
            .rows
            .iter()
            .all(|row| row.values().sum::<Rational>() == 1);
        let mut monotone_violation = None;
        'rows: for k in 0..self.i {
            // Both partial sums are step functions of r, so the maximum is
            // attained at a support point of row k or k+1, or at -inf/+inf.
            let mut points: Vec<Option<&Rational>> = vec![None];
            points.extend(self.rows[k].keys().chain(self.rows[k + 1].keys()).map(Some));
            points.sort();
            points.dedup();
            for r in points {
                if self.monotone_sum(k, r) > 1 {
                    monotone_violation = Some((k, r.cloned()));
                    break 'rows;
                }
            }
            // r = +inf
            if self.rows[k + 1].values().sum::<Rational>() > 1 {
                monotone_violation = Some((k, None));
                break;
            }
        }
        PropertyReport {
            nonnegative,
            rows_sum_to_one,
            monotone: monotone_violation.is_none(),
            monotone_violation,
        }
    }

    /// JSON form `{i, entries: [[k, r_num, r_den, w_num, w_den], ...]}`.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries()
            .map(|(k, r, w)| {
                json!([
                    k,
                    int_json(r.numer()),
                    int_json(r.denom()),
                    int_json(w.numer()),
                    int_json(w.denom())
                ])
            })
            .collect();
        json!({ "i": self.i, "entries": entries })
    }

    /// Inverse of [`SubsetProfile::to_json`]; integers may also be strings.
    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |reason: &str| Error::Parse {
            input: value.to_string(),
            reason: reason.to_string(),
        };
        let i = value
            .get("i")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing integer field `i`"))? as usize;
        let raw = value
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array field `entries`"))?;
        let mut entries = Vec::with_capacity(raw.len());
        for e in raw {
            let parts = e
                .as_array()
                .filter(|a| a.len() == 5)
                .ok_or_else(|| bad("entry must be [k, r_num, r_den, w_num, w_den]"))?;
            let k = parts[0].as_u64().ok_or_else(|| bad("k must be a nonnegative integer"))? as usize;
            let ints: Vec<Integer> = parts[1..]
                .iter()
                .map(|v| json_int(v).ok_or_else(|| bad("expected an integer")))
                .collect::<Result<_>>()?;
            if ints[1] == 0 || ints[3] == 0 {
                return Err(bad("zero denominator"));
            }
            let r = Rational::from((ints[0].clone(), ints[1].clone()));
            let w = Rational::from((ints[2].clone(), ints[3].clone()));
            entries.push((k, r, w));
        }
        Self::new(i, entries)
    }
}

fn int_json(v: &Integer) -> Value {
    match v.to_i64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

fn json_int(v: &Value) -> Option<Integer> {
    match v {
        Value::Number(n) => n.as_i64().map(Integer::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// Result of [`SubsetProfile::check_properties`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub nonnegative: bool,
    pub rows_sum_to_one: bool,
    pub monotone: bool,
    /// First `(k, r)` where the monotone sum exceeds one; `r = None` is an
    /// infinite sentinel.
    pub monotone_violation: Option<(usize, Option<Rational>)>,
}

impl PropertyReport {
    pub fn all(&self) -> bool {
        self.nonnegative && self.rows_sum_to_one && self.monotone
    }

    fn first_failure(&self) -> Option<(u8, String)> {
        if !self.nonnegative {
            return Some((1, "negative weight".into()));
        }
        if !self.rows_sum_to_one {
            return Some((2, "a row does not sum to one".into()));
        }
        self.monotone_violation.as_ref().map(|(k, r)| {
            let at = r.as_ref().map_or("an infinite sentinel".to_string(), |r| format!("r = {r}"));
            (3, format!("monotone sum exceeds one between rows {k} and {} at {at}", k + 1))
        })
    }

    fn into_error(self) -> Option<Error> {
        let k = self.monotone_violation.as_ref().map_or(0, |v| v.0);
        self.first_failure()
            .map(|(property, detail)| Error::PropertyViolation { property, k, detail })
    }
}

/// Strictly increasing points `r_0 < ... < r_i`; the profile with unit mass
/// at `(k, r_k)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PureProfile {
    points: Vec<Rational>,
}

impl PureProfile {
    pub fn new(points: Vec<Rational>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("points", "need at least one point"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("points", "must be strictly increasing"));
        }
        Ok(Self { points })
    }

    pub fn from_integers(points: &[i64]) -> Result<Self> {
        Self::new(points.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn to_profile(&self) -> SubsetProfile {
        SubsetProfile::new(
            self.index(),
            self.points
                .iter()
                .enumerate()
                .map(|(k, r)| (k, r.clone(), Rational::from(1))),
        )
        .expect("rows match the index")
    }
}

/// `sum_t weight_t * profile_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexDecomposition {
    pub terms: Vec<(Rational, PureProfile)>,
}

impl ConvexDecomposition {
    pub fn total_weight(&self) -> Rational {
        self.terms.iter().map(|(w, _)| w).sum()
    }

    /// The weighted sum of the terms as a profile.
    pub fn recombine(&self) -> Result<SubsetProfile> {
        let Some((_, first)) = self.terms.first() else {
            return Err(invalid("terms", "empty decomposition"));
        };
        let i = first.index();
        let mut entries = Vec::new();
        for (w, pure) in &self.terms {
            if pure.index() != i {
                return Err(invalid("terms", "pure profiles of different index"));
            }
            for (k, r) in pure.points().iter().enumerate() {
                entries.push((k, r.clone(), w.clone()));
            }
        }
        SubsetProfile::new(i, entries)
    }
}

/// Convex decomposition of `gamma` into pure profiles by repeatedly
/// extracting the profile through the row minima.
pub fn decompose(gamma: &SubsetProfile) -> Result<ConvexDecomposition> {
    decompose_with(gamma, |_| {})
}

/// [`decompose`], calling `visit` on every intermediate remainder (the input
/// included).
pub fn decompose_with<F>(gamma: &SubsetProfile, mut visit: F) -> Result<ConvexDecomposition>
where
    F: FnMut(&SubsetProfile),
{
    if let Some(err) = gamma.check_properties().into_error() {
        return Err(err);
    }
    let mut rest = gamma.clone();
    // Share of the original mass still carried by `rest`.
    let mut scale = Rational::from(1);
    let mut terms = Vec::new();
    loop {
        visit(&rest);
        if let Some(pure) = rest.as_pure() {
            terms.push((scale, pure));
            return Ok(ConvexDecomposition { terms });
        }
        let minima: Vec<(Rational, Rational)> = rest
            .rows
            .iter()
            .map(|row| {
                let (r, w) = row.iter().next().expect("rows sum to one");
                (r.clone(), w.clone())
            })
            .collect();
        if let Some(k) = minima.windows(2).position(|w| w[0].0 >= w[1].0) {
            return Err(Error::Internal(format!(
                "row minima not increasing at rows {k} and {}",
                k + 1
            )));
        }
        let lambda = minima
            .iter()
            .map(|(_, w)| w)
            .min()
            .cloned()
            .expect("at least one row");
        let support_before = rest.support_size();
        let keep = Rational::from(1 - &lambda);
        for (row, (r0, _)) in rest.rows.iter_mut().zip(&minima) {
            *row.get_mut(r0).expect("minimum present") -= &lambda;
            row.retain(|_, w| *w != 0);
            for w in row.values_mut() {
                *w /= &keep;
            }
        }
        if rest.support_size() >= support_before {
            return Err(Error::Internal("extraction did not shrink the support".into()));
        }
        if let Some(err) = rest.check_properties().into_error() {
            return Err(Error::Internal(format!("remainder left the profile class: {err}")));
        }
        let points = minima.into_iter().map(|(r, _)| r).collect();
        terms.push((Rational::from(&scale * &lambda), PureProfile::new(points)?));
        scale *= keep;
    }
}

fn binom_weights(n: usize, p: &Rational) -> Result<Vec<Rational>> {
    (0..=n as i64).map(|k| binom_pmf(n as u32, k, p)).collect()
}

/// `sum_r Pr(Y = r) Pr(Z = r - x)` with `Pr(Y = r) = sum_k f(k) alpha(k, r)`,
/// `f = Bin(ell, p)` pmf, and likewise `Z` from `beta`.
pub fn bilinear_b(alpha: &SubsetProfile, beta: &SubsetProfile, p: &Rational, x: &Rational) -> Result<Rational> {
    check_probability(p)?;
    let marginal = |gamma: &SubsetProfile| -> Result<BTreeMap<Rational, Rational>> {
        let f = binom_weights(gamma.i, p)?;
        let mut out: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (k, r, w) in gamma.entries() {
            *out.entry(r.clone()).or_default() += Rational::from(&f[k] * w);
        }
        Ok(out)
    };
    let y = marginal(alpha)?;
    let z = marginal(beta)?;
    let mut total = Rational::new();
    for (r, py) in &y {
        if let Some(pz) = z.get(&Rational::from(r - x)) {
            total += Rational::from(py * pz);
        }
    }
    Ok(total)
}

/// `sum_{k, j : r_k = s_j + x} f(k) g(j)` for pure profiles `r` and `s`.
pub fn pure_value(alpha: &PureProfile, beta: &PureProfile, p: &Rational, x: &Rational) -> Result<Rational> {
    check_probability(p)?;
    let f = binom_weights(alpha.index(), p)?;
    let g = binom_weights(beta.index(), p)?;
    let shifted: Vec<Rational> = beta.points().iter().map(|s| Rational::from(s + x)).collect();
    let mut total = Rational::new();
    let (mut k, mut j) = (0, 0);
    while k < f.len() && j < g.len() {
        match alpha.points[k].cmp(&shifted[j]) {
            std::cmp::Ordering::Less => k += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                total += Rational::from(&f[k] * &g[j]);
                k += 1;
                j += 1;
            }
        }
    }
    Ok(total)
}

/// Outcome of [`max_over_pure`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureMaxReport {
    pub value: Rational,
    /// Lexicographically first maximizing `r` and `s`.
    pub r: Vec<Rational>,
    pub s: Vec<Rational>,
    /// `max_d Pr(Bin(ell, p) - Bin(m, p) = d)`.
    pub binomial_max: Rational,
    /// Offset `d` of the first maximizer that matches `r_{j+d} = s_j + x`
    /// for every valid `j`.
    pub offset: Option<i64>,
    /// Whether every maximizer is such an offset matching.
    pub all_maximizers_offset: bool,
    pub maximizers: usize,
    pub configurations: usize,
}

impl PureMaxReport {
    pub fn matches_binomial(&self) -> bool {
        self.value == self.binomial_max && self.offset.is_some()
    }
}

/// Maximizes [`pure_value`] over integer placements.
///
/// `pure_value` depends only on the differences `r_k - s_j - x`, so `r_0 = 0`
/// is fixed and `t_j = s_j + x` ranges over integers. The `r` lie in
/// `[0, grid)`; the `t` lie in `(-grid, grid)` with span below `grid`.
pub fn max_over_pure(ell: u32, m: u32, p: &Rational, x: &Rational, grid: u32) -> Result<PureMaxReport> {
    check_probability(p)?;
    if ell + m > PURE_SIZE_GUARD {
        return Err(Error::GuardExceeded {
            what: "ell + m",
            value: (ell + m) as usize,
            limit: PURE_SIZE_GUARD as usize,
        });
    }
    if grid > PURE_GRID_GUARD {
        return Err(Error::GuardExceeded {
            what: "grid",
            value: grid as usize,
            limit: PURE_GRID_GUARD as usize,
        });
    }
    if grid < ell.max(m) + 1 {
        return Err(invalid("grid", format!("needs at least {} points", ell.max(m) + 1)));
    }

    // Integer numerators over s^(ell + m).
    let r_num = p.numer().clone();
    let s_den = p.denom().clone();
    let q_num = Integer::from(&s_den - &r_num);
    let weights = |n: u32| -> Vec<Integer> {
        (0..=n)
            .map(|k| {
                Integer::from(Integer::binomial_u(n, k))
                    * Integer::from((&r_num).pow(k))
                    * Integer::from((&q_num).pow(n - k))
            })
            .collect()
    };
    let f = weights(ell);
    let g = weights(m);
    let products: Vec<Vec<Integer>> = f
        .iter()
        .map(|fk| g.iter().map(|gj| Integer::from(fk * gj)).collect())
        .collect();
    let denom = Integer::from((&s_den).pow(ell + m));

    let g_i = grid as i64;
    let mut r_sets = Vec::new();
    increasing_sequences(ell as usize + 1, 1, g_i - 1, &mut vec![0], &mut r_sets);
    let mut t_sets = Vec::new();
    for start in -(g_i - 1)..g_i {
        let top = (start + g_i - 1).min(g_i - 1);
        increasing_sequences(m as usize + 1, start + 1, top, &mut vec![start], &mut t_sets);
    }

    let mut best = Integer::from(-1);
    let mut best_cfg = (0usize, 0usize);
    let mut maximizers = Vec::new();
    let mut acc = Integer::new();
    for (ri, r) in r_sets.iter().enumerate() {
        for (ti, t) in t_sets.iter().enumerate() {
            acc.assign(0);
            let (mut k, mut j) = (0, 0);
            while k < r.len() && j < t.len() {
                match r[k].cmp(&t[j]) {
                    std::cmp::Ordering::Less => k += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        acc += &products[k][j];
                        k += 1;
                        j += 1;
                    }
                }
            }
            match acc.cmp(&best) {
                std::cmp::Ordering::Greater => {
                    best.assign(&acc);
                    best_cfg = (ri, ti);
                    maximizers.clear();
                    maximizers.push((ri, ti));
                }
                std::cmp::Ordering::Equal => maximizers.push((ri, ti)),
                std::cmp::Ordering::Less => {}
            }
        }
    }

    let offset_of = |(ri, ti): (usize, usize)| offset_matching(&r_sets[ri], &t_sets[ti]);
    let offset = maximizers.iter().find_map(|&c| offset_of(c));
    let all_maximizers_offset = maximizers.iter().all(|&c| offset_of(c).is_some());

    let binomial_max = (-(m as i64)..=ell as i64)
        .map(|d| bin_diff_pmf(ell, m, p, d))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .expect("nonempty range");

    let to_q = |v: &[i64]| v.iter().map(|&z| Rational::from(z)).collect::<Vec<_>>();
    Ok(PureMaxReport {
        value: Rational::from((best, denom)),
        r: to_q(&r_sets[best_cfg.0]),
        s: t_sets[best_cfg.1]
            .iter()
            .map(|&t| Rational::from(t) - x.clone())
            .collect(),
        binomial_max,
        offset,
        all_maximizers_offset,
        maximizers: maximizers.len(),
        configurations: r_sets.len() * t_sets.len(),
    })
}

/// Appends every strictly increasing extension of `prefix` to length `len`
/// with entries in `[lo, hi]`.
fn increasing_sequences(len: usize, lo: i64, hi: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if prefix.len() == len {
        out.push(prefix.clone());
        return;
    }
    let remaining = (len - prefix.len()) as i64;
    for v in lo..=hi - remaining + 1 {
        prefix.push(v);
        increasing_sequences(len, v + 1, hi, prefix, out);
        prefix.pop();
    }
}

/// `d` such that `r[j + d] == t[j]` for every `j` with `j + d` in range, and
/// at least one such `j` exists.
fn offset_matching(r: &[i64], t: &[i64]) -> Option<i64> {
    let (ell, m) = (r.len() as i64 - 1, t.len() as i64 - 1);
    (-m..=ell).find(|&d| {
        (0..=m)
            .filter(|j| (0..=ell).contains(&(j + d)))
            .all(|j| r[(j + d) as usize] == t[j as usize])
    })
}
