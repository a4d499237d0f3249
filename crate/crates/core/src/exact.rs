//! Exact binomial and binomial-difference probabilities.
//!
//! With `ell` coefficients equal to `+1` and `m` equal to `-1` the sum is
//! `X = Bin(ell, p) - Bin(m, p)`. Shifting by `m` turns it into
//! `Bin(ell, p) + Bin(m, 1 - p)`, whose probability generating function for
//! `p = r/s` is
//!
//! ```text
//! s^-(ell+m) * ((s - r) + r z)^ell * (r + (s - r) z)^m
//! ```
//!
//! so every point probability is an integer numerator over the common
//! denominator `s^(ell+m)`. All maximizations in this module compare those
//! integers directly.

use rug::ops::Pow;
use rug::{Assign, Integer, Rational};

use crate::error::{invalid, Result};
use crate::prob::check_probability;

/// `C(n, k) p^k (1-p)^(n-k)`; zero when `k` is outside `[0, n]`.
pub fn binom_pmf(n: u32, k: i64, p: &Rational) -> Result<Rational> {
    check_probability(p)?;
    if k < 0 || k > i64::from(n) {
        return Ok(Rational::new());
    }
    let k = k as u32;
    let q = Rational::from(1 - p);
    let coeff = Integer::from(Integer::binomial_u(n, k));
    Ok(Rational::from(p.pow(k)) * q.pow(n - k) * coeff)
}

/// `Pr(Bin(ell, p) - Bin(m, p) = d)`, summed term by term.
pub fn bin_diff_pmf(ell: u32, m: u32, p: &Rational, d: i64) -> Result<Rational> {
    check_probability(p)?;
    if d < -i64::from(m) || d > i64::from(ell) {
        return Ok(Rational::new());
    }
    let mut total = Rational::new();
    let lo = d.max(0);
    let hi = i64::from(ell).min(d + i64::from(m));
    for k in lo..=hi {
        total += binom_pmf(ell, k, p)? * binom_pmf(m, k - d, p)?;
    }
    Ok(total)
}

/// `sum_k p^(2k) (1-p)^(n-2k) C(ell, k) C(n-ell, k)`, the probability that
/// the split with `ell` plus-ones lands on zero.
pub fn pr_zero_convolution(n: u32, ell: u32, p: &Rational) -> Result<Rational> {
    check_probability(p)?;
    if ell > n {
        return Err(invalid("ell", format!("{ell} exceeds n = {n}")));
    }
    let m = n - ell;
    let q = Rational::from(1 - p);
    let mut total = Rational::new();
    for k in 0..=ell.min(m) {
        let coeff = Integer::from(Integer::binomial_u(ell, k)) * Integer::from(Integer::binomial_u(m, k));
        total += Rational::from(p.pow(2 * k)) * q.clone().pow(n - 2 * k) * coeff;
    }
    Ok(total)
}

/// Full pmf of `Bin(ell, p) - Bin(m, p)` on `[-m, ell]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinDiffDist {
    ell: u32,
    m: u32,
    p: Rational,
    /// `pmf[d + m]`.
    pmf: Vec<Rational>,
}

impl BinDiffDist {
    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    /// Point probability at `d`; zero outside the support.
    pub fn pmf(&self, d: i64) -> Rational {
        self.index(d)
            .map(|i| self.pmf[i].clone())
            .unwrap_or_default()
    }

    /// `(d, Pr(X = d))` for every `d` in `[-m, ell]`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        let m = i64::from(self.m);
        self.pmf.iter().enumerate().map(move |(i, w)| (i as i64 - m, w))
    }

    pub fn total(&self) -> Rational {
        self.pmf.iter().fold(Rational::new(), |acc, w| acc + w)
    }

    /// `pmf(d)^2 >= pmf(d-1) pmf(d+1)` everywhere on `[-m, ell]`.
    pub fn is_log_concave(&self) -> bool {
        self.pmf.windows(3).all(|w| {
            Rational::from(&w[1] * &w[1]) >= Rational::from(&w[0] * &w[2])
        })
    }

    /// Every `d` attaining the maximum, ascending.
    pub fn modes(&self) -> Vec<i64> {
        let Some(max) = self.pmf.iter().max() else {
            return Vec::new();
        };
        self.iter()
            .filter(|(_, w)| *w == max)
            .map(|(d, _)| d)
            .collect()
    }

    /// Nondecreasing up to the modes, nonincreasing after, modes contiguous.
    pub fn is_unimodal(&self) -> bool {
        let modes = self.modes();
        let (Some(&first), Some(&last)) = (modes.first(), modes.last()) else {
            return false;
        };
        if last - first + 1 != modes.len() as i64 {
            return false;
        }
        let m = i64::from(self.m);
        let peak = (first + m) as usize;
        let rising = self.pmf[..=peak].windows(2).all(|w| w[0] <= w[1]);
        let falling = self.pmf[peak..].windows(2).all(|w| w[0] >= w[1]);
        rising && falling
    }

    fn index(&self, d: i64) -> Option<usize> {
        let i = d + i64::from(self.m);
        (0..self.pmf.len() as i64).contains(&i).then_some(i as usize)
    }
}

/// Materializes `Bin(ell, p) - Bin(m, p)` by integer convolution.
pub fn build_dist(ell: u32, m: u32, p: &Rational) -> Result<BinDiffDist> {
    check_probability(p)?;
    let weights = SplitWeights::new(p, ell + m);
    let numerators = weights.split_polynomial(ell, m);
    let denom = weights.s.pow(ell + m);
    let pmf = numerators
        .into_iter()
        .map(|num| Rational::from((num, denom.clone())))
        .collect();
    Ok(BinDiffDist {
        ell,
        m,
        p: p.clone(),
        pmf,
    })
}

/// Maximizing split for `n` coefficients: `ell_star` plus-ones, concentration
/// point `x_star`, the exact maximum and every tied `(ell, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LStarResult {
    pub n: u32,
    pub p: Rational,
    pub ell_star: u32,
    pub x_star: i64,
    pub prob: Rational,
    /// Sorted by `(ell, x)`.
    pub ties: Vec<(u32, i64)>,
    /// `p` is 0 or 1: the sum is constant and every split is tied.
    pub degenerate: bool,
}

impl LStarResult {
    /// True when every `ell` in `0..=n` appears among the ties.
    pub fn all_splits_tied(&self) -> bool {
        let mut seen = vec![false; self.n as usize + 1];
        for &(ell, _) in &self.ties {
            seen[ell as usize] = true;
        }
        seen.into_iter().all(|s| s)
    }
}

/// Canonical representative of a tie set: smallest `ell >= ceil(n/2)`, then
/// smallest `|x|`, then smallest `x`.
pub fn canonical_choice(n: u32, ties: &[(u32, i64)]) -> Option<(u32, i64)> {
    let half = n.div_ceil(2);
    let key = |&(ell, x): &(u32, i64)| (ell, x.abs(), x);
    ties.iter()
        .filter(|(ell, _)| *ell >= half)
        .min_by_key(|t| key(t))
        .or_else(|| ties.iter().min_by_key(|t| key(t)))
        .copied()
}

/// Exhaustive maximum of `Pr(Bin(ell, p) - Bin(n - ell, p) = d)` over
/// `ell in [0, n]` and `d in [-(n - ell), ell]`.
pub fn concentration_bound(n: u32, p: &Rational) -> Result<LStarResult> {
    check_probability(p)?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    if *p == 0 || *p == 1 {
        return Ok(degenerate_bound(n, p));
    }

    let mut ladder = SplitLadder::new(n, p);
    let mut best = Integer::new();
    let mut ties: Vec<(u32, i64)> = Vec::new();
    loop {
        let ell = ladder.ell();
        let m = i64::from(n - ell);
        for (e, num) in ladder.numerators().iter().enumerate() {
            match num.cmp(&best) {
                std::cmp::Ordering::Greater => {
                    best.clone_from(num);
                    ties.clear();
                    ties.push((ell, e as i64 - m));
                }
                std::cmp::Ordering::Equal => ties.push((ell, e as i64 - m)),
                std::cmp::Ordering::Less => {}
            }
        }
        if ell == n {
            break;
        }
        ladder.advance();
    }

    let (ell_star, x_star) = canonical_choice(n, &ties).expect("scan visits at least one point");
    let prob = Rational::from((best, ladder.denominator()));
    Ok(LStarResult {
        n,
        p: p.clone(),
        ell_star,
        x_star,
        prob,
        ties,
        degenerate: false,
    })
}

fn degenerate_bound(n: u32, p: &Rational) -> LStarResult {
    let point = |ell: u32| {
        if *p == 0 {
            0
        } else {
            2 * i64::from(ell) - i64::from(n)
        }
    };
    let ties: Vec<(u32, i64)> = (0..=n).map(|ell| (ell, point(ell))).collect();
    let ell_star = n.div_ceil(2);
    LStarResult {
        n,
        p: p.clone(),
        ell_star,
        x_star: point(ell_star),
        prob: Rational::from(1),
        ties,
        degenerate: true,
    }
}

/// Integer weights for `p = r/s` in lowest terms.
#[derive(Debug, Clone)]
pub(crate) struct SplitWeights {
    pub r: Integer,
    pub s: Integer,
    /// `r^i` for `i` in `0..=n`.
    pow_r: Vec<Integer>,
    /// `(s - r)^i` for `i` in `0..=n`.
    pow_q: Vec<Integer>,
}

impl SplitWeights {
    pub fn new(p: &Rational, n: u32) -> Self {
        let r = p.numer().clone();
        let s = p.denom().clone();
        let q = Integer::from(&s - &r);
        let powers = |base: &Integer| {
            let mut out = Vec::with_capacity(n as usize + 1);
            out.push(Integer::from(1));
            for i in 0..n as usize {
                out.push(Integer::from(&out[i] * base));
            }
            out
        };
        let pow_r = powers(&r);
        let pow_q = powers(&q);
        Self { r, s, pow_r, pow_q }
    }

    /// Numerators of `Bin(ell, p)`: `C(ell, k) r^k (s-r)^(ell-k)`.
    fn plus_part(&self, ell: u32) -> Vec<Integer> {
        (0..=ell)
            .map(|k| {
                Integer::from(Integer::binomial_u(ell, k))
                    * &self.pow_r[k as usize]
                    * &self.pow_q[(ell - k) as usize]
            })
            .collect()
    }

    /// Numerators of `m - Bin(m, p)`, indexed by `m - j`.
    fn minus_part(&self, m: u32) -> Vec<Integer> {
        (0..=m)
            .map(|e| {
                Integer::from(Integer::binomial_u(m, e))
                    * &self.pow_q[e as usize]
                    * &self.pow_r[(m - e) as usize]
            })
            .collect()
    }

    /// Numerators of `X + m` over `s^(ell+m)` by direct convolution.
    pub fn split_polynomial(&self, ell: u32, m: u32) -> Vec<Integer> {
        let a = self.plus_part(ell);
        let b = self.minus_part(m);
        let mut out = vec![Integer::new(); (ell + m + 1) as usize];
        let mut term = Integer::new();
        for (i, ai) in a.iter().enumerate() {
            if *ai == 0 {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                term.assign(ai * bj);
                out[i + j] += &term;
            }
        }
        out
    }
}

/// Walks `ell = 0, 1, ..., n` keeping the integer numerators of
/// `X_ell + (n - ell)` over `s^n`. Each step divides the polynomial exactly by
/// `r + (s - r) z` and multiplies by `(s - r) + r z`, so a full sweep costs
/// `O(n^2)` integer operations instead of one convolution per split.
pub(crate) struct SplitLadder {
    n: u32,
    ell: u32,
    r: Integer,
    q: Integer,
    s: Integer,
    coeffs: Vec<Integer>,
    quotient: Vec<Integer>,
}

impl SplitLadder {
    /// Requires `0 < p < 1`.
    pub fn new(n: u32, p: &Rational) -> Self {
        let weights = SplitWeights::new(p, n);
        let coeffs = weights.split_polynomial(0, n);
        let q = Integer::from(&weights.s - &weights.r);
        Self {
            n,
            ell: 0,
            r: weights.r,
            q,
            s: weights.s,
            coeffs,
            quotient: vec![Integer::new(); n as usize],
        }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// `numerators()[e]` is the numerator of `Pr(X = e - (n - ell))`.
    pub fn numerators(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn denominator(&self) -> Integer {
        Integer::from((&self.s).pow(self.n))
    }

    pub fn advance(&mut self) {
        assert!(self.ell < self.n, "ladder already at ell = n");
        let n = self.n as usize;
        // Synthetic division by r + q z, from the leading coefficient down.
        let mut carry = Integer::new();
        for e in (1..=n).rev() {
            carry.assign(&self.coeffs[e]);
            if e < n {
                carry -= Integer::from(&self.r * &self.quotient[e]);
            }
            carry.div_exact_mut(&self.q);
            self.quotient[e - 1].assign(&carry);
        }
        debug_assert_eq!(
            Integer::from(&self.r * &self.quotient[0]),
            self.coeffs[0],
            "division by r + (s - r) z left a remainder"
        );
        // Multiply by q + r z.
        for e in 0..=n {
            let coeff = &mut self.coeffs[e];
            coeff.assign(0);
            if e < n {
                *coeff += Integer::from(&self.q * &self.quotient[e]);
            }
            if e > 0 {
                *coeff += Integer::from(&self.r * &self.quotient[e - 1]);
            }
        }
        self.ell += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    /// Brute force over all 2^(ell+m) outcomes: count outcomes by (X, #ones),
    /// then weight by p^ones (1-p)^zeros.
    fn brute_force(ell: u32, m: u32, p: &Rational, d: i64) -> Rational {
        let total = ell + m;
        let mut by_ones = vec![0u64; total as usize + 1];
        for mask in 0u32..(1 << total) {
            let plus = (mask & ((1 << ell) - 1)).count_ones() as i64;
            let minus = (mask >> ell).count_ones() as i64;
            if plus - minus == d {
                by_ones[mask.count_ones() as usize] += 1;
            }
        }
        let one_minus = Rational::from(1 - p);
        by_ones
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                Rational::from(p.pow(k as u32))
                    * one_minus.clone().pow(total - k as u32)
                    * c
            })
            .fold(Rational::new(), |a, b| a + b)
    }

    #[test]
    fn binom_pmf_examples() {
        assert_eq!(binom_pmf(4, 2, &q(1, 2)).unwrap(), q(3, 8));
        assert_eq!(binom_pmf(3, 5, &q(1, 3)).unwrap(), q(0, 1));
        assert_eq!(binom_pmf(3, -1, &q(1, 3)).unwrap(), q(0, 1));
        assert_eq!(binom_pmf(2, 1, &q(1, 3)).unwrap(), q(4, 9));
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(binom_pmf(3, 1, &q(4, 3)).is_err());
        assert!(bin_diff_pmf(3, 1, &q(-1, 3), 0).is_err());
        assert!(build_dist(1, 1, &q(2, 1)).is_err());
        assert!(concentration_bound(3, &q(5, 4)).is_err());
    }

    #[test]
    fn bin_diff_examples() {
        let p = q(2, 7);
        assert_eq!(bin_diff_pmf(5, 0, &p, 5).unwrap(), p.clone().pow(5));
        assert_eq!(bin_diff_pmf(2, 1, &q(1, 3), 0).unwrap(), q(4, 9));
        assert_eq!(bin_diff_pmf(2, 1, &q(1, 3), 0).unwrap(), brute_force(2, 1, &q(1, 3), 0));
        assert_eq!(bin_diff_pmf(2, 2, &q(1, 2), 0).unwrap(), q(6, 16));
        assert_eq!(bin_diff_pmf(2, 2, &q(1, 2), 3).unwrap(), q(0, 1));
        assert_eq!(bin_diff_pmf(2, 2, &q(1, 2), -3).unwrap(), q(0, 1));
    }

    #[test]
    fn build_dist_examples() {
        let d = build_dist(1, 1, &q(1, 2)).unwrap();
        let pairs: Vec<(i64, Rational)> = d.iter().map(|(x, w)| (x, w.clone())).collect();
        assert_eq!(pairs, vec![(-1, q(1, 4)), (0, q(1, 2)), (1, q(1, 4))]);

        let empty = build_dist(0, 0, &q(3, 5)).unwrap();
        assert_eq!(empty.pmf(0), q(1, 1));
        assert_eq!(empty.modes(), vec![0]);

        let d = build_dist(2, 1, &q(1, 3)).unwrap();
        assert_eq!(d.total(), q(1, 1));
        assert_eq!(d.pmf(0), q(4, 9));
        assert_eq!(d.pmf(7), q(0, 1));
    }

    #[test]
    fn brute_force_equivalence_up_to_twelve() {
        for p in [q(1, 2), q(1, 3), q(3, 10)] {
            for total in 0..=12u32 {
                for ell in 0..=total {
                    let m = total - ell;
                    let dist = build_dist(ell, m, &p).unwrap();
                    for d in -(m as i64) - 1..=ell as i64 + 1 {
                        assert_eq!(dist.pmf(d), brute_force(ell, m, &p, d), "ell={ell} m={m} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn pr_zero_examples() {
        assert_eq!(pr_zero_convolution(2, 1, &q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(pr_zero_convolution(3, 2, &q(1, 3)).unwrap(), q(4, 9));
        let p = q(2, 5);
        assert_eq!(
            pr_zero_convolution(2, 2, &p).unwrap(),
            Rational::from(1 - &p).pow(2)
        );
        assert!(pr_zero_convolution(2, 3, &p).is_err());
    }

    #[test]
    fn pr_zero_matches_bin_diff() {
        for p in [q(1, 4), q(1, 3), q(5, 7)] {
            for n in 0..=16 {
                for ell in 0..=n {
                    assert_eq!(
                        pr_zero_convolution(n, ell, &p).unwrap(),
                        bin_diff_pmf(ell, n - ell, &p, 0).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn ladder_matches_direct_convolution() {
        for p in [q(1, 3), q(3, 4), q(1, 2), q(2, 9)] {
            let n = 9;
            let weights = SplitWeights::new(&p, n);
            let mut ladder = SplitLadder::new(n, &p);
            for ell in 0..=n {
                assert_eq!(ladder.ell(), ell);
                assert_eq!(ladder.numerators(), &weights.split_polynomial(ell, n - ell)[..]);
                if ell < n {
                    ladder.advance();
                }
            }
        }
    }

    #[test]
    fn classical_fair_coin() {
        let res = concentration_bound(4, &q(1, 2)).unwrap();
        assert_eq!((res.ell_star, res.x_star), (2, 0));
        assert_eq!(res.prob, q(3, 8));
        assert!(res.all_splits_tied());
        assert!(res.ties.contains(&(0, -2)));
        assert!(!res.degenerate);
    }

    #[test]
    fn odd_n_small_case() {
        // n = 5 is below the large-n regime for p = 1/3; the exhaustive scan
        // is the reference. (n + s)/2 = 4 would need x* = 1.
        let res = concentration_bound(5, &q(1, 3)).unwrap();
        let direct = (0..=5u32)
            .flat_map(|ell| {
                let d = build_dist(ell, 5 - ell, &q(1, 3)).unwrap();
                d.iter().map(|(_, w)| w.clone()).collect::<Vec<_>>()
            })
            .max()
            .unwrap();
        assert_eq!(res.prob, direct);
        assert_eq!(
            res.prob,
            bin_diff_pmf(res.ell_star, 5 - res.ell_star, &q(1, 3), res.x_star).unwrap()
        );
        assert!(res.ties.contains(&(res.ell_star, res.x_star)));
    }

    #[test]
    fn degenerate_probabilities() {
        let zero = concentration_bound(5, &q(0, 1)).unwrap();
        assert!(zero.degenerate);
        assert_eq!(zero.prob, q(1, 1));
        assert_eq!((zero.ell_star, zero.x_star), (3, 0));
        assert!(zero.all_splits_tied());

        let one = concentration_bound(5, &q(1, 1)).unwrap();
        assert_eq!((one.ell_star, one.x_star), (3, 1));
        assert!(one.ties.contains(&(0, -5)));
    }

    #[test]
    fn rejects_zero_n() {
        assert!(concentration_bound(0, &q(1, 2)).is_err());
    }

    #[test]
    fn canonical_choice_order() {
        let ties = [(1, -1), (3, 1), (3, -1), (4, 0), (2, 0)];
        assert_eq!(canonical_choice(5, &ties), Some((3, -1)));
        assert_eq!(canonical_choice(4, &ties), Some((2, 0)));
        assert_eq!(canonical_choice(9, &ties), Some((1, -1)));
    }
}
