//! Hypergeometric enumeration and Fisher's exact test.
//!
//! With all marginals of a 2×2 table fixed, `n11` follows a hypergeometric
//! distribution. The distribution is built in log space starting at its
//! mode (anchored with log-factorials) and extended outward with the exact
//! ratio of neighbouring probabilities, so no factorial is ever formed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::special::ln_factorial;
use crate::tables::ContingencyTable2x2;

/// Relative slack when deciding whether a table is "as or less probable"
/// than the observed one.
pub const TWO_SIDED_TIE_TOLERANCE: f64 = 1e-7;

/// Distribution of `n11` over all tables sharing the given marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct HypergeomDist<T = f64> {
    n_total: u64,
    row1_total: u64,
    col1_total: u64,
    support_lo: u64,
    support_hi: u64,
    mode: u64,
    log_pmf: Vec<T>,
}

fn ln_choose<T: Real>(n: u64, k: u64) -> T {
    ln_factorial::<T>(n) - ln_factorial::<T>(k) - ln_factorial::<T>(n - k)
}

impl<T: Real> HypergeomDist<T> {
    pub fn new(n_total: u64, row1_total: u64, col1_total: u64) -> Result<Self> {
        if n_total == 0 || row1_total > n_total || col1_total > n_total {
            return Err(Error::InfeasibleMarginals {
                total: n_total,
                row1: row1_total,
                col1: col1_total,
            });
        }
        let (n, r, c) = (n_total, row1_total, col1_total);
        let lo = (r + c).saturating_sub(n);
        let hi = r.min(c);
        let mode_raw = ((u128::from(r) + 1) * (u128::from(c) + 1) / (u128::from(n) + 2)) as u64;
        let mode = mode_raw.clamp(lo, hi);
        let len = (hi - lo + 1) as usize;

        let mut log_pmf = vec![T::zero(); len];
        let m = (mode - lo) as usize;
        log_pmf[m] = ln_choose::<T>(r, mode) + ln_choose::<T>(n - r, c - mode) - ln_choose::<T>(n, c);

        // ln P(k+1) - ln P(k) = ln[(r-k)(c-k) / ((k+1)(n-r-c+k+1))]
        let step = |k: u64| -> T {
            let a = T::from_count(r - k) / T::from_count(k + 1);
            let b = T::from_count(c - k) / T::from_count(n + k + 1 - r - c);
            (a * b).ln()
        };
        for i in m..len - 1 {
            log_pmf[i + 1] = log_pmf[i] + step(lo + i as u64);
        }
        for i in (0..m).rev() {
            log_pmf[i] = log_pmf[i + 1] - step(lo + i as u64);
        }

        let mut dist = Self {
            n_total,
            row1_total,
            col1_total,
            support_lo: lo,
            support_hi: hi,
            mode,
            log_pmf,
        };
        dist.renormalize();
        Ok(dist)
    }

    /// Absorb the rounding in the log-factorial anchor so the enumerated
    /// mass sums to one.
    fn renormalize(&mut self) {
        let anchor = self.log_pmf[(self.mode - self.support_lo) as usize];
        let scaled = self.sum_indices_ascending(0, self.log_pmf.len() - 1, anchor);
        let log_norm = anchor + scaled.ln();
        for v in &mut self.log_pmf {
            *v = *v - log_norm;
        }
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }
    pub fn row1_total(&self) -> u64 {
        self.row1_total
    }
    pub fn col1_total(&self) -> u64 {
        self.col1_total
    }
    pub fn support_lo(&self) -> u64 {
        self.support_lo
    }
    pub fn support_hi(&self) -> u64 {
        self.support_hi
    }
    pub fn mode(&self) -> u64 {
        self.mode
    }
    pub fn support(&self) -> std::ops::RangeInclusive<u64> {
        self.support_lo..=self.support_hi
    }
    pub fn len(&self) -> usize {
        self.log_pmf.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Log-probabilities in support order.
    pub fn log_pmf_values(&self) -> &[T] {
        &self.log_pmf
    }

    /// `ln P(n11 = k)`; `-inf` outside the support.
    pub fn log_pmf(&self, k: u64) -> T {
        match self.index(k) {
            Some(i) => self.log_pmf[i],
            None => T::neg_infinity(),
        }
    }

    pub fn pmf(&self, k: u64) -> T {
        self.log_pmf(k).exp()
    }

    /// `(k, P(n11 = k))` over the support.
    pub fn iter(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        self.log_pmf.iter().enumerate().map(|(i, lp)| (self.support_lo + i as u64, lp.exp()))
    }

    fn index(&self, k: u64) -> Option<usize> {
        (self.support_lo..=self.support_hi)
            .contains(&k)
            .then(|| (k - self.support_lo) as usize)
    }

    /// `Σ exp(log_pmf[i] - shift)` for `i ∈ [a, b]`, smallest terms first.
    ///
    /// The distribution is unimodal, so on any contiguous index range the
    /// smallest remaining term is always at one of the two ends.
    fn sum_indices_ascending(&self, a: usize, b: usize, shift: T) -> T {
        let m = ((self.mode - self.support_lo) as usize).clamp(a, b);
        let left = (a..m).map(|i| self.log_pmf[i]);
        let right = (m..=b).rev().map(|i| self.log_pmf[i]);
        merge_sum(left, right, shift)
    }

    /// `P(n11 ≤ k)`
    pub fn cdf(&self, k: u64) -> T {
        if k < self.support_lo {
            return T::zero();
        }
        let b = (k.min(self.support_hi) - self.support_lo) as usize;
        self.sum_indices_ascending(0, b, T::zero()).min(T::one())
    }

    /// `P(n11 ≥ k)`
    pub fn sf(&self, k: u64) -> T {
        if k > self.support_hi {
            return T::zero();
        }
        let a = (k.max(self.support_lo) - self.support_lo) as usize;
        self.sum_indices_ascending(a, self.log_pmf.len() - 1, T::zero()).min(T::one())
    }

    /// Mass of every table no more probable than the one with `n11 = k`.
    pub fn two_sided(&self, k: u64) -> T {
        let Some(obs) = self.index(k) else {
            return T::zero();
        };
        let tol = T::lit(TWO_SIDED_TIE_TOLERANCE)
            .ln_1p()
            .max(T::lit(8.0) * T::epsilon() * (T::one() + self.log_pmf[obs].abs()));
        let threshold = self.log_pmf[obs] + tol;
        let len = self.log_pmf.len();
        let prefix = self.log_pmf.iter().take_while(|lp| **lp <= threshold).count();
        if prefix == len {
            return self.sum_indices_ascending(0, len - 1, T::zero()).min(T::one());
        }
        let suffix = self.log_pmf.iter().rev().take_while(|lp| **lp <= threshold).count();
        let left = self.log_pmf[..prefix].iter().copied();
        let right = self.log_pmf[len - suffix..].iter().rev().copied();
        merge_sum(left, right, T::zero()).min(T::one())
    }
}

/// Sum `exp(x - shift)` over two sequences that are each non-decreasing,
/// always consuming the smaller head.
fn merge_sum<T: Real>(
    left: impl Iterator<Item = T>,
    right: impl Iterator<Item = T>,
    shift: T,
) -> T {
    let mut left = left.peekable();
    let mut right = right.peekable();
    let mut sum = T::zero();
    loop {
        let next = match (left.peek(), right.peek()) {
            (Some(l), Some(r)) => {
                if l <= r {
                    left.next()
                } else {
                    right.next()
                }
            }
            (Some(_), None) => left.next(),
            (None, Some(_)) => right.next(),
            (None, None) => break,
        };
        sum = sum + (next.expect("peeked") - shift).exp();
    }
    sum
}

pub fn hypergeom_distribution<T: Real>(
    n_total: u64,
    row1_total: u64,
    col1_total: u64,
) -> Result<HypergeomDist<T>> {
    HypergeomDist::new(n_total, row1_total, col1_total)
}

/// Fisher's exact test p-values for one observed table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherResult<T = f64> {
    /// `P(n11 ≤ observed)`, evidence the pair occurs less than chance.
    pub left_p: T,
    /// `P(n11 ≥ observed)`, evidence the pair occurs more than chance.
    pub right_p: T,
    pub two_sided_p: T,
    /// Probability of the observed table itself.
    pub point_p: T,
}

impl<T: Real> FisherResult<T> {
    fn certain() -> Self {
        Self { left_p: T::one(), right_p: T::one(), two_sided_p: T::one(), point_p: T::one() }
    }

    pub fn from_distribution(dist: &HypergeomDist<T>, n11: u64) -> Self {
        if dist.len() == 1 {
            return Self::certain();
        }
        Self {
            left_p: dist.cdf(n11),
            right_p: dist.sf(n11),
            two_sided_p: dist.two_sided(n11),
            point_p: dist.pmf(n11),
        }
    }
}

pub fn fisher_exact<T: Real>(table: &ContingencyTable2x2) -> FisherResult<T> {
    let dist = HypergeomDist::<T>::new(table.total(), table.row1(), table.col1())
        .expect("marginals of a valid table are feasible");
    FisherResult::from_distribution(&dist, table.n11())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::make_table;
    use proptest::prelude::*;

    fn r3(x: f64) -> f64 {
        (x * 1000.0).round() / 1000.0
    }

    #[test]
    fn tea_distribution() {
        let d = hypergeom_distribution::<f64>(8, 4, 4).unwrap();
        assert_eq!(d.support(), 0..=4);
        let rounded: Vec<f64> = d.iter().map(|(_, p)| r3(p)).collect();
        assert_eq!(rounded, vec![0.014, 0.229, 0.514, 0.229, 0.014]);
        // 1/70, 16/70, 36/70
        assert!((d.pmf(0) - 1.0 / 70.0).abs() < 1e-15);
        assert!((d.pmf(1) - 16.0 / 70.0).abs() < 1e-15);
        assert!((d.pmf(2) - 36.0 / 70.0).abs() < 1e-15);
    }

    #[test]
    fn forced_single_table() {
        let d = hypergeom_distribution::<f64>(10, 10, 3).unwrap();
        assert_eq!(d.support(), 3..=3);
        assert_eq!(d.pmf(3), 1.0);
        assert_eq!(d.pmf(2), 0.0);
    }

    #[test]
    fn infeasible_marginals() {
        assert!(matches!(
            hypergeom_distribution::<f64>(10, 11, 3),
            Err(Error::InfeasibleMarginals { .. })
        ));
        assert!(hypergeom_distribution::<f64>(10, 3, 11).is_err());
        assert!(hypergeom_distribution::<f64>(0, 0, 0).is_err());
    }

    #[test]
    fn balanced_rows_symmetric() {
        let d = hypergeom_distribution::<f64>(10_000, 5000, 10).unwrap();
        for k in 0..=10 {
            let (a, b) = (d.pmf(k), d.pmf(10 - k));
            assert!((a - b).abs() <= 1e-12 * a.max(b), "k={k}");
        }
    }

    #[test]
    fn skewed_rows_decreasing() {
        let d = hypergeom_distribution::<f64>(10_000, 20, 10).unwrap();
        for k in 0..10 {
            assert!(d.pmf(k) > d.pmf(k + 1));
        }
    }

    #[test]
    fn tea_fisher_values() {
        let cases = [
            ((4, 0, 0, 4), (1.000, 0.014, 0.029, 0.014)),
            ((3, 1, 1, 3), (0.986, 0.243, 0.486, 0.229)),
            ((1, 3, 3, 1), (0.243, 0.986, 0.486, 0.229)),
            ((0, 4, 4, 0), (0.014, 1.000, 0.029, 0.014)),
        ];
        for ((a, b, c, d), (l, r, t, p)) in cases {
            let f = fisher_exact::<f64>(&make_table(a, b, c, d).unwrap());
            assert_eq!((r3(f.left_p), r3(f.right_p), r3(f.two_sided_p), r3(f.point_p)), (l, r, t, p));
        }
    }

    #[test]
    fn zero_marginal_is_certain() {
        let f = fisher_exact::<f64>(&make_table(0, 0, 5, 7).unwrap());
        assert_eq!(f, FisherResult { left_p: 1.0, right_p: 1.0, two_sided_p: 1.0, point_p: 1.0 });
    }

    #[test]
    fn huge_totals_stay_finite() {
        let d = hypergeom_distribution::<f64>(1_000_000_000, 300, 500).unwrap();
        let s: f64 = d.iter().map(|(_, p)| p).sum();
        assert!((s - 1.0).abs() < 1e-10);
        assert!(d.log_pmf_values().iter().all(|v| v.is_finite()));
        let f = fisher_exact::<f64>(&make_table(3, 297, 497, 1_000_000_000 - 797).unwrap());
        assert!(f.right_p > 0.0 && f.right_p < 1e-9);
    }

    #[test]
    fn single_precision_tea() {
        let f = fisher_exact::<f32>(&make_table(3, 1, 1, 3).unwrap());
        assert!((f.left_p - 0.98571).abs() < 1e-5);
        assert!((f.two_sided_p - 0.48571).abs() < 1e-5);
    }

    fn feasible() -> impl Strategy<Value = (u64, u64, u64)> {
        (1u64..1_000_000).prop_flat_map(|n| (Just(n), 0..=n.min(5000), 0..=n))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn normalized((n, r, c) in feasible()) {
            let d = hypergeom_distribution::<f64>(n, r, c).unwrap();
            let s: f64 = d.iter().map(|(_, p)| p).sum();
            prop_assert!((s - 1.0).abs() < 1e-10);
            prop_assert!(d.log_pmf_values().iter().all(|v| *v <= 1e-15));
            prop_assert_eq!(d.support_lo(), (r + c).saturating_sub(n));
            prop_assert_eq!(d.support_hi(), r.min(c));
        }

        #[test]
        fn tail_identity((n, r, c) in feasible(), pick in 0.0f64..1.0) {
            let d = hypergeom_distribution::<f64>(n, r, c).unwrap();
            let k = d.support_lo() + ((d.len() as f64 - 1.0) * pick).round() as u64;
            let f = FisherResult::from_distribution(&d, k);
            prop_assert!((f.left_p + f.right_p - f.point_p - 1.0).abs() < 1e-10);
            prop_assert!(f.two_sided_p >= f.point_p * (1.0 - 1e-12) && f.two_sided_p <= 1.0);
            prop_assert!(f.left_p >= f.point_p * (1.0 - 1e-12) && f.right_p >= f.point_p * (1.0 - 1e-12));
        }
    }
}
