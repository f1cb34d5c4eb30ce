//! Goodness-of-fit statistics with their large-sample significance, plus the
//! association coefficients reported alongside them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::special::{chi_square_sf, normal_sf};
use crate::tables::{small_expected_warning, ContingencyTable2x2, ExpectedTable, SmallExpectedWarning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pearson,
    G2,
    Yates,
    MantelHaenszel,
    TTest,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Pearson => "Chi-Square",
            Method::G2 => "Likelihood Ratio Chi-Square",
            Method::Yates => "Continuity Adj. Chi-Square",
            Method::MantelHaenszel => "Mantel-Haenszel Chi-Square",
            Method::TTest => "t-test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T = f64> {
    pub statistic: T,
    pub df: u32,
    pub p_value: T,
    pub method: Method,
    pub warning: Option<SmallExpectedWarning>,
}

/// Expected counts for a table every chi-square variant can use.
fn positive_expected<T: Real>(table: &ContingencyTable2x2) -> Result<ExpectedTable<T>> {
    if table.has_zero_marginal() {
        return Err(Error::DegenerateTable);
    }
    Ok(table.expected_counts())
}

fn chi_square_result<T: Real>(
    statistic: T,
    method: Method,
    expected: &ExpectedTable<T>,
) -> Result<TestResult<T>> {
    let statistic = statistic.max(T::zero());
    Ok(TestResult {
        statistic,
        df: 1,
        p_value: chi_square_sf(statistic, 1)?,
        method,
        warning: Some(small_expected_warning(expected)),
    })
}

fn observed<T: Real>(table: &ContingencyTable2x2) -> [T; 4] {
    table.cells().map(T::from_count)
}

fn pearson_statistic<T: Real>(table: &ContingencyTable2x2, expected: &ExpectedTable<T>) -> T {
    observed::<T>(table)
        .iter()
        .zip(expected.cells())
        .fold(T::zero(), |acc, (&n, m)| acc + (n - m) * (n - m) / m)
}

/// Pearson's `X² = Σ (n - m)² / m`.
pub fn pearson_x2<T: Real>(table: &ContingencyTable2x2) -> Result<TestResult<T>> {
    let expected = positive_expected::<T>(table)?;
    chi_square_result(pearson_statistic(table, &expected), Method::Pearson, &expected)
}

/// Likelihood ratio `G² = 2 Σ n ln(n / m)`, with empty cells contributing 0.
pub fn likelihood_g2<T: Real>(table: &ContingencyTable2x2) -> Result<TestResult<T>> {
    let expected = positive_expected::<T>(table)?;
    // Σ (n - m) = 0, so each summand can carry its own -(n - m) term:
    // n ln(n/m) - (n - m) ≥ 0, computed through ln_1p to survive n ≈ m.
    let sum = observed::<T>(table).iter().zip(expected.cells()).fold(T::zero(), |acc, (&n, m)| {
        let dev = n - m;
        let term = if n > T::zero() { n * (dev / m).ln_1p() - dev } else { m };
        acc + term.max(T::zero())
    });
    chi_square_result(T::lit(2.0) * sum, Method::G2, &expected)
}

/// Continuity-corrected X²; the half-unit adjustment never goes below zero.
pub fn yates_x2<T: Real>(table: &ContingencyTable2x2) -> Result<TestResult<T>> {
    let expected = positive_expected::<T>(table)?;
    let half = T::lit(0.5);
    let stat = observed::<T>(table).iter().zip(expected.cells()).fold(T::zero(), |acc, (&n, m)| {
        let dev = ((n - m).abs() - half).max(T::zero());
        acc + dev * dev / m
    });
    chi_square_result(stat, Method::Yates, &expected)
}

/// `(n - 1)/n · X²`
pub fn mantel_haenszel_x2<T: Real>(table: &ContingencyTable2x2) -> Result<TestResult<T>> {
    let expected = positive_expected::<T>(table)?;
    // a table with all four marginals positive already has n ≥ 2
    let n = T::from_count(table.total());
    let stat = (n - T::one()) / n * pearson_statistic(table, &expected);
    chi_square_result(stat, Method::MantelHaenszel, &expected)
}

/// One-sample bigram t-score `(n11 - m11) / √n11`, with its upper tail under
/// the standard normal.
pub fn t_test<T: Real>(table: &ContingencyTable2x2) -> Result<TestResult<T>> {
    if table.n11() == 0 {
        return Err(Error::TUndefined);
    }
    let n11 = T::from_count(table.n11());
    let m11 = table.expected_counts::<T>().m11;
    t_from_counts(n11, m11, Some(small_expected_warning(&table.expected_counts::<T>())))
}

/// The t-score from an observed and an expected count directly.
pub fn t_from_counts<T: Real>(
    n11: T,
    m11: T,
    warning: Option<SmallExpectedWarning>,
) -> Result<TestResult<T>> {
    if !(n11 > T::zero()) {
        return Err(Error::TUndefined);
    }
    let statistic = (n11 - m11) / n11.sqrt();
    Ok(TestResult { statistic, df: 1, p_value: normal_sf(statistic), method: Method::TTest, warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationMeasures<T = f64> {
    pub phi: T,
    pub contingency_coefficient: T,
    /// Signed; equal to phi for a 2×2 table.
    pub cramers_v: T,
}

pub fn association_measures<T: Real>(table: &ContingencyTable2x2) -> Result<AssociationMeasures<T>> {
    let expected = positive_expected::<T>(table)?;
    let [a, b, c, d] = observed::<T>(table);
    let marg = [table.row1(), table.row2(), table.col1(), table.col2()]
        .map(T::from_count)
        .iter()
        .fold(T::one(), |acc, &m| acc * m.sqrt());
    let phi = ((a * d - b * c) / marg).max(-T::one()).min(T::one());
    let x2 = pearson_statistic(table, &expected);
    let n = T::from_count(table.total());
    Ok(AssociationMeasures {
        phi,
        contingency_coefficient: (x2 / (x2 + n)).sqrt(),
        cramers_v: phi,
    })
}

/// All the asymptotic results for one table, each kept or its failure.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSuite<T = f64> {
    pub pearson: Result<TestResult<T>>,
    pub g2: Result<TestResult<T>>,
    pub yates: Result<TestResult<T>>,
    pub mantel_haenszel: Result<TestResult<T>>,
    pub t_test: Result<TestResult<T>>,
    pub measures: Result<AssociationMeasures<T>>,
}

impl<T: Real> AsymptoticSuite<T> {
    pub fn run(table: &ContingencyTable2x2) -> Self {
        Self {
            pearson: pearson_x2(table),
            g2: likelihood_g2(table),
            yates: yates_x2(table),
            mantel_haenszel: mantel_haenszel_x2(table),
            t_test: t_test(table),
            measures: association_measures(table),
        }
    }
}
