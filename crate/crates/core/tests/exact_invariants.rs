use elo_core::exact::{bin_diff_pmf, build_dist, concentration_bound, pr_zero_convolution};
use elo_core::oracle::{point_prob, CoefficientVector};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Rational;

fn p_strategy() -> impl Strategy<Value = Rational> {
    (1i64..=30, 2i64..=31)
        .prop_filter("p in (0, 1)", |(r, s)| r < s)
        .prop_map(|(r, s)| Rational::from((r, s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_log_concave_unimodal(ell in 0u32..=12, m in 0u32..=8, p in p_strategy()) {
        let dist = build_dist(ell, m, &p).unwrap();
        prop_assert_eq!(dist.total(), Rational::from(1));
        prop_assert!(dist.is_log_concave());
        prop_assert!(dist.is_unimodal());
        let modes = dist.modes();
        prop_assert!(modes.windows(2).all(|w| w[1] == w[0] + 1));
    }

    #[test]
    fn pmf_matches_enumeration(ell in 0u32..=6, m in 0u32..=5, p in p_strategy(), d in -6i64..=7) {
        let mut coeffs = vec![1i64; ell as usize];
        coeffs.extend(std::iter::repeat(-1).take(m as usize));
        let expected = if coeffs.is_empty() {
            Rational::from(u8::from(d == 0))
        } else {
            point_prob(&CoefficientVector::from_integers(&coeffs).unwrap(), &p, &Rational::from(d)).unwrap()
        };
        prop_assert_eq!(bin_diff_pmf(ell, m, &p, d).unwrap(), expected);
    }

    #[test]
    fn zero_convolution_is_pmf_at_zero(n in 1u32..=16, frac in 0.0f64..=1.0, p in p_strategy()) {
        let ell = (frac * f64::from(n)).round() as u32;
        prop_assert_eq!(
            pr_zero_convolution(n, ell, &p).unwrap(),
            bin_diff_pmf(ell, n - ell, &p, 0).unwrap()
        );
    }

    #[test]
    fn even_n_takes_balanced_split(half in 1u32..=8, p in p_strategy()) {
        let n = 2 * half;
        let r = concentration_bound(n, &p).unwrap();
        prop_assert_eq!((r.ell_star, r.x_star), (half, 0));
    }
}

#[test]
fn small_p_takes_ceiling_split() {
    for n in 1u32..=14 {
        // p = floor(1e6 (1 - 2^(-1/n))) / 1e6 stays below the threshold.
        let cut = 1.0 - 0.5f64.powf(1.0 / f64::from(n));
        let p = Rational::from(((cut * 1e6).floor() as i64, 1_000_000));
        let q: Rational = 1 - p.clone();
        assert!(q.pow(n) * 2u32 >= 1, "n={n}");
        let r = concentration_bound(n, &p).unwrap();
        assert_eq!((r.ell_star, r.x_star), (n.div_ceil(2), 0), "n={n}");
    }
}
