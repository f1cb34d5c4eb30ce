//! Text renderers: the frequency-table report and the association TSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assoc::AssociationRecord;
use crate::asymptotic::{
    association_measures, likelihood_g2, mantel_haenszel_x2, pearson_x2, t_test, yates_x2,
    AssociationMeasures, Method, TestResult,
};
use crate::error::Result;
use crate::exact::{fisher_exact, FisherResult};
use crate::tables::{small_expected_warning, ContingencyTable2x2, ExpectedTable, SmallExpectedWarning};

/// Fixed-point text with half-to-even rounding on the exact binary value.
/// Never prints a negative zero.
pub fn fixed(x: f64, decimals: usize) -> String {
    if x.is_nan() {
        return "NA".into();
    }
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn fixed_opt(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(|| "NA".into(), |v| fixed(v, decimals))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub stat_decimals: usize,
    pub p_decimals: usize,
}

impl RenderOptions {
    /// Three decimals everywhere.
    pub const REPORT: Self = Self { stat_decimals: 3, p_decimals: 3 };
    /// Four-decimal p-values for ranked scans.
    pub const TSV: Self = Self { stat_decimals: 3, p_decimals: 4 };
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self::REPORT
    }
}

/// Every statistic the report shows, computed once for a table.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqStatistics {
    pub table: ContingencyTable2x2,
    pub expected: ExpectedTable,
    pub pearson: Result<TestResult>,
    pub g2: Result<TestResult>,
    pub yates: Result<TestResult>,
    pub mantel_haenszel: Result<TestResult>,
    pub t_test: Result<TestResult>,
    pub fisher: FisherResult,
    pub measures: Result<AssociationMeasures>,
    pub warning: SmallExpectedWarning,
}

impl FreqStatistics {
    pub fn compute(table: &ContingencyTable2x2) -> Self {
        let expected = table.expected_counts::<f64>();
        Self {
            table: *table,
            warning: small_expected_warning(&expected),
            expected,
            pearson: pearson_x2(table),
            g2: likelihood_g2(table),
            yates: yates_x2(table),
            mantel_haenszel: mantel_haenszel_x2(table),
            t_test: t_test(table),
            fisher: fisher_exact(table),
            measures: association_measures(table),
        }
    }
}

/// Category names for the report grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub rows: [String; 2],
    pub cols: [String; 2],
}

impl Default for Labels {
    fn default() -> Self {
        Self { rows: ["1".into(), "2".into()], cols: ["1".into(), "2".into()] }
    }
}

const LABEL_W: usize = 12;
const CELL_W: usize = 10;

fn grid_line(out: &mut String, label: &str, cells: [String; 3]) {
    let _ = writeln!(
        out,
        "{label:<LABEL_W$}|{:>CELL_W$} |{:>CELL_W$} |{:>CELL_W$}",
        cells[0], cells[1], cells[2]
    );
}

fn render_grid(out: &mut String, s: &FreqStatistics, labels: &Labels) {
    let t = &s.table;
    let n = t.total() as f64;
    let cells = t.cells().map(|c| c as f64);
    let exp = s.expected.cells();
    let rows = [t.row1() as f64, t.row2() as f64];
    let cols = [t.col1() as f64, t.col2() as f64];
    let pct = |x: f64, d: f64| if d > 0.0 { fixed(100.0 * x / d, 2) } else { "NA".into() };

    out.push_str("TABLE OF X BY Y\n\n");
    for name in ["Frequency", "Expected", "Deviation", "Percent", "Row Pct"] {
        let _ = writeln!(out, "{name}");
    }
    grid_line(out, "Col Pct", [labels.cols[0].clone(), labels.cols[1].clone(), "Total".into()]);
    let rule = format!("{}+{}+{}+{}\n", "-".repeat(LABEL_W), "-".repeat(CELL_W + 1), "-".repeat(CELL_W + 1), "-".repeat(CELL_W));
    out.push_str(&rule);
    for r in 0..2 {
        let (c0, c1) = (cells[2 * r], cells[2 * r + 1]);
        let (e0, e1) = (exp[2 * r], exp[2 * r + 1]);
        grid_line(out, &labels.rows[r], [fixed(c0, 0), fixed(c1, 0), fixed(rows[r], 0)]);
        grid_line(out, "", [fixed(e0, 2), fixed(e1, 2), String::new()]);
        grid_line(out, "", [fixed(c0 - e0, 2), fixed(c1 - e1, 2), String::new()]);
        grid_line(out, "", [pct(c0, n), pct(c1, n), pct(rows[r], n)]);
        grid_line(out, "", [pct(c0, rows[r]), pct(c1, rows[r]), String::new()]);
        grid_line(out, "", [pct(c0, cols[0]), pct(c1, cols[1]), String::new()]);
        out.push_str(&rule);
    }
    grid_line(out, "Total", [fixed(cols[0], 0), fixed(cols[1], 0), fixed(n, 0)]);
    grid_line(out, "", [pct(cols[0], n), pct(cols[1], n), pct(n, n)]);
}

const STAT_W: usize = 30;

fn stat_line(out: &mut String, name: &str, df: &str, value: &str, prob: &str) {
    let _ = writeln!(out, "{name:<STAT_W$}{df:>4}{value:>10}{prob:>10}");
}

fn chi_line(out: &mut String, method: Method, r: &Result<TestResult>, o: &RenderOptions) {
    match r {
        Ok(r) => stat_line(
            out,
            method.label(),
            &r.df.to_string(),
            &fixed(r.statistic, o.stat_decimals),
            &fixed(r.p_value, o.p_decimals),
        ),
        Err(e) => {
            let _ = writeln!(out, "{:<STAT_W$}   ({e})", method.label());
        }
    }
}

/// The frequency-table report: cell grid, then the statistics in the order
/// chi-square, likelihood ratio, continuity adjusted, Mantel-Haenszel,
/// Fisher left/right/two-tailed, point probability, phi, contingency
/// coefficient, Cramér's V, plus the t-score, sample size and warning.
pub fn render_freq_report(s: &FreqStatistics, labels: &Labels, o: &RenderOptions) -> String {
    let mut out = String::new();
    render_grid(&mut out, s, labels);

    out.push_str("\nSTATISTICS FOR TABLE OF X BY Y\n\n");
    stat_line(&mut out, "Statistic", "DF", "Value", "Prob");
    out.push_str(&"-".repeat(STAT_W + 24));
    out.push('\n');
    chi_line(&mut out, Method::Pearson, &s.pearson, o);
    chi_line(&mut out, Method::G2, &s.g2, o);
    chi_line(&mut out, Method::Yates, &s.yates, o);
    chi_line(&mut out, Method::MantelHaenszel, &s.mantel_haenszel, o);
    let p = |x: f64| fixed(x, o.p_decimals);
    stat_line(&mut out, "Fisher's Exact Test (Left)", "", "", &p(s.fisher.left_p));
    stat_line(&mut out, "                    (Right)", "", "", &p(s.fisher.right_p));
    stat_line(&mut out, "                    (2-Tail)", "", "", &p(s.fisher.two_sided_p));
    stat_line(&mut out, &format!("P(n11 = {})", s.table.n11()), "", "", &p(s.fisher.point_p));
    let v = |x: f64| fixed(x, o.stat_decimals);
    match &s.measures {
        Ok(m) => {
            stat_line(&mut out, "Phi Coefficient", "", &v(m.phi), "");
            stat_line(&mut out, "Contingency Coefficient", "", &v(m.contingency_coefficient), "");
            stat_line(&mut out, "Cramer's V", "", &v(m.cramers_v), "");
        }
        Err(e) => {
            for name in ["Phi Coefficient", "Contingency Coefficient", "Cramer's V"] {
                let _ = writeln!(out, "{name:<STAT_W$}   ({e})");
            }
        }
    }
    match &s.t_test {
        Ok(t) => stat_line(&mut out, "t-score (upper normal tail)", "", &v(t.statistic), &p(t.p_value)),
        Err(e) => {
            let _ = writeln!(out, "{:<STAT_W$}   ({e})", "t-score (upper normal tail)");
        }
    }

    let _ = writeln!(out, "\nSample Size = {}", s.table.total());
    if s.warning.warn {
        let _ = writeln!(
            out,
            "\nWARNING: {}% of the cells have expected counts less than 5. Chi-Square may not be a valid test.",
            fixed(s.warning.percent, 0)
        );
    }
    out
}

pub const ASSOC_TSV_COLUMNS: [&str; 13] = [
    "word", "n11", "m11", "exact_left", "exact_right", "exact_two", "exact_rank", "g2_p", "g2_rank",
    "x2_p", "x2_rank", "t_p", "t_rank",
];

fn rank_cell(r: Option<usize>) -> String {
    r.map_or_else(|| "NA".into(), |r| r.to_string())
}

/// Ranked scan as TSV with a header row.
pub fn render_assoc_tsv(records: &[AssociationRecord], o: &RenderOptions) -> String {
    let mut out = ASSOC_TSV_COLUMNS.join("\t");
    out.push('\n');
    let p = o.p_decimals;
    for r in records {
        let row = [
            r.word.clone(),
            r.n11.to_string(),
            fixed(r.m11, 2),
            fixed(r.exact_left_p, p),
            fixed(r.exact_right_p, p),
            fixed(r.exact_two_p, p),
            rank_cell(r.exact_rank),
            fixed_opt(r.g2_p, p),
            rank_cell(r.g2_rank),
            fixed_opt(r.x2_p, p),
            rank_cell(r.x2_rank),
            fixed_opt(r.t_p, p),
            rank_cell(r.t_rank),
        ];
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// `type<TAB>count` lines.
pub fn render_counts_tsv(rows: &[(String, u64)]) -> String {
    let mut out = String::from("type\tcount\n");
    for (t, c) in rows {
        let _ = writeln!(out, "{t}\t{c}");
    }
    out
}
