//! Binomial coefficients and probabilities.

/// Largest `n` for which coefficients are accumulated exactly in integers.
pub(crate) const EXACT_LIMIT: u64 = 30;

/// `C(n, k)` exactly, `None` on overflow. Zero when `k > n`.
pub(crate) fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let lg = |x: u64| libm::lgamma(x as f64 + 1.0);
    lg(n) - lg(k) - lg(n - k)
}

/// `C(n, k)` in floating point; exact integers up to [`EXACT_LIMIT`].
pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        0.0
    } else if n <= EXACT_LIMIT {
        binomial_exact(n, k).unwrap_or(0) as f64
    } else {
        libm::exp(ln_binomial(n, k))
    }
}

/// `C(n, k) p^k (1 − p)^(n − k)`.
pub(crate) fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n <= EXACT_LIMIT {
        binomial(n, k) * libm::pow(p, k as f64) * libm::pow(1.0 - p, (n - k) as f64)
    } else {
        libm::exp(
            ln_binomial(n, k) + k as f64 * libm::log(p) + (n - k) as f64 * libm::log1p(-p),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_coefficients() {
        assert_eq!(binomial_exact(4, 2), Some(6));
        assert_eq!(binomial_exact(4, 5), Some(0));
        assert_eq!(binomial_exact(30, 15), Some(155_117_520));
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn log_route_agrees_with_exact() {
        for n in [31u64, 40, 60] {
            for k in 0..=n {
                let exact = binomial_exact(n, k).unwrap() as f64;
                assert!((binomial(n, k) / exact - 1.0).abs() < 1e-11, "C({n},{k})");
            }
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        for n in [1u64, 7, 30, 31, 100] {
            for p in [0.0, 0.3, 0.5, 0.97, 1.0] {
                let s: f64 = (0..=n).map(|k| binomial_pmf(n, k, p)).sum();
                assert!((s - 1.0).abs() < 1e-12, "n={n} p={p}");
            }
        }
        assert_eq!(binomial_pmf(2, 1, 0.5), 0.5);
    }
}
