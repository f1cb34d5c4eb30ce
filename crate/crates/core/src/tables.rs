//! 2×2 contingency tables and the independence model fitted to them.
//!
//! Cell layout, with the row variable marking presence of the first word
//! and the column variable presence of the second:
//!
//! ```text
//!            col 1   col 2
//!   row 1    n11     n12    | n1+
//!   row 2    n21     n22    | n2+
//!            n+1     n+2    | n++
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Observed joint counts with eagerly computed marginals.
///
/// Construct through [`ContingencyTable2x2::new`]; the marginal fields are
/// private so they can never drift from the cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContingencyTable2x2 {
    n11: u64,
    n12: u64,
    n21: u64,
    n22: u64,
    row1: u64,
    row2: u64,
    col1: u64,
    col2: u64,
    total: u64,
}

/// Wire form: only the four cells, marginals are rebuilt on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct Cells {
    n11: u64,
    n12: u64,
    n21: u64,
    n22: u64,
}

impl Serialize for ContingencyTable2x2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Cells { n11: self.n11, n12: self.n12, n21: self.n21, n22: self.n22 }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ContingencyTable2x2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = Cells::deserialize(d)?;
        ContingencyTable2x2::new(c.n11, c.n12, c.n21, c.n22).map_err(serde::de::Error::custom)
    }
}

impl ContingencyTable2x2 {
    pub fn new(n11: u64, n12: u64, n21: u64, n22: u64) -> Result<Self> {
        let overflow = || Error::Domain("cell counts overflow u64".into());
        let row1 = n11.checked_add(n12).ok_or_else(overflow)?;
        let row2 = n21.checked_add(n22).ok_or_else(overflow)?;
        let total = row1.checked_add(row2).ok_or_else(overflow)?;
        if total == 0 {
            return Err(Error::EmptyTable);
        }
        Ok(Self { n11, n12, n21, n22, row1, row2, col1: n11 + n21, col2: n12 + n22, total })
    }

    pub fn n11(&self) -> u64 {
        self.n11
    }
    pub fn n12(&self) -> u64 {
        self.n12
    }
    pub fn n21(&self) -> u64 {
        self.n21
    }
    pub fn n22(&self) -> u64 {
        self.n22
    }
    /// n1+
    pub fn row1(&self) -> u64 {
        self.row1
    }
    /// n2+
    pub fn row2(&self) -> u64 {
        self.row2
    }
    /// n+1
    pub fn col1(&self) -> u64 {
        self.col1
    }
    /// n+2
    pub fn col2(&self) -> u64 {
        self.col2
    }
    /// n++
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> [u64; 4] {
        [self.n11, self.n12, self.n21, self.n22]
    }

    /// Exchange rows and columns.
    pub fn transpose(&self) -> Self {
        Self {
            n12: self.n21,
            n21: self.n12,
            row1: self.col1,
            row2: self.col2,
            col1: self.row1,
            col2: self.row2,
            ..*self
        }
    }

    /// True when some marginal is zero, which makes an expected count zero.
    pub fn has_zero_marginal(&self) -> bool {
        self.row1 == 0 || self.row2 == 0 || self.col1 == 0 || self.col2 == 0
    }

    pub fn expected_counts<T: Scalar>(&self) -> ExpectedTable<T> {
        expected_counts(self)
    }

    pub fn independence_model<T: Scalar>(&self) -> IndependenceModel<T> {
        IndependenceModel::fit(self)
    }
}

/// Build and validate a table; the only rejected input is all zeros.
pub fn make_table(n11: u64, n12: u64, n21: u64, n22: u64) -> Result<ContingencyTable2x2> {
    ContingencyTable2x2::new(n11, n12, n21, n22)
}

pub fn transpose(table: &ContingencyTable2x2) -> ContingencyTable2x2 {
    table.transpose()
}

/// Expected counts under independence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTable<T = f64> {
    pub m11: T,
    pub m12: T,
    pub m21: T,
    pub m22: T,
}

impl<T: Scalar> ExpectedTable<T> {
    pub fn cells(&self) -> [T; 4] {
        [self.m11.clone(), self.m12.clone(), self.m21.clone(), self.m22.clone()]
    }

    pub fn transpose(&self) -> Self {
        Self {
            m11: self.m11.clone(),
            m12: self.m21.clone(),
            m21: self.m12.clone(),
            m22: self.m22.clone(),
        }
    }

    pub fn total(&self) -> T {
        self.m11.clone() + self.m12.clone() + self.m21.clone() + self.m22.clone()
    }
}

/// `m_ij = n_i+ · n_+j / n_++`. Zero marginals give zero expectations.
pub fn expected_counts<T: Scalar>(table: &ContingencyTable2x2) -> ExpectedTable<T> {
    let n = T::from_count(table.total());
    let cell = |r: u64, c: u64| T::from_count(r) * T::from_count(c) / n.clone();
    ExpectedTable {
        m11: cell(table.row1(), table.col1()),
        m12: cell(table.row1(), table.col2()),
        m21: cell(table.row2(), table.col1()),
        m22: cell(table.row2(), table.col2()),
    }
}

/// The two parameters of the independence model, `p_ij = p_i · p_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceModel<T = f64> {
    pub p_row: T,
    pub p_col: T,
}

impl<T: Scalar> IndependenceModel<T> {
    /// Maximum likelihood fit from observed marginals.
    pub fn fit(table: &ContingencyTable2x2) -> Self {
        let n = T::from_count(table.total());
        Self {
            p_row: T::from_count(table.row1()) / n.clone(),
            p_col: T::from_count(table.col1()) / n,
        }
    }

    /// Joint cell probabilities in row-major order.
    pub fn cell_probabilities(&self) -> [T; 4] {
        let one = T::one();
        let q_row = one.clone() - self.p_row.clone();
        let q_col = one - self.p_col.clone();
        [
            self.p_row.clone() * self.p_col.clone(),
            self.p_row.clone() * q_col.clone(),
            q_row.clone() * self.p_col.clone(),
            q_row * q_col,
        ]
    }
}

/// Share of cells with an expected count below five.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallExpectedWarning {
    pub percent: f64,
    pub warn: bool,
}

/// Cells with `m_ij < 5`; the flag is raised above 20 percent.
pub fn small_expected_warning<T: Scalar>(expected: &ExpectedTable<T>) -> SmallExpectedWarning {
    let five = T::from_count(5);
    let small = expected.cells().iter().filter(|m| **m < five).count();
    let percent = small as f64 * 25.0;
    SmallExpectedWarning { percent, warn: percent > 20.0 }
}
