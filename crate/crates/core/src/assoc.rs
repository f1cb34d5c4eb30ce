//! Per-bigram tables from corpus counts and the ranked association scan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::{likelihood_g2, pearson_x2, t_test};
use crate::corpus::BigramCounts;
use crate::error::{Error, Result};
use crate::exact::fisher_exact;
use crate::tables::ContingencyTable2x2;

/// 2×2 table for the ordered pair `(w1, w2)`: rows split on `w1` in first
/// position, columns on `w2` in second position.
///
/// Words missing from the corpus give zero marginals rather than an error.
pub fn bigram_table(counts: &BigramCounts, w1: &str, w2: &str) -> Result<ContingencyTable2x2> {
    table_from_counts(
        counts.pair_count(w1, w2),
        counts.first_count(w1),
        counts.second_count(w2),
        counts.total_bigrams(),
    )
}

/// Table from a joint count, the two positional marginals and the total.
pub fn table_from_counts(pair: u64, first: u64, second: u64, total: u64) -> Result<ContingencyTable2x2> {
    let n12 = first.checked_sub(pair);
    let n21 = second.checked_sub(pair);
    let n22 = total.checked_sub(first).and_then(|r| r.checked_sub(n21?));
    match (n12, n21, n22) {
        (Some(n12), Some(n21), Some(n22)) => ContingencyTable2x2::new(pair, n12, n21, n22),
        _ => Err(Error::Domain(format!(
            "inconsistent counts: pair={pair}, first={first}, second={second}, total={total}"
        ))),
    }
}

/// Which position of the bigram is held fixed during a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    /// `<word> fixed`
    Second,
    /// `fixed <word>`
    First,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRecord {
    /// The word filling the varying slot.
    pub word: String,
    pub n11: u64,
    pub m11: f64,
    pub table: ContingencyTable2x2,
    pub exact_left_p: f64,
    pub exact_right_p: f64,
    pub exact_two_p: f64,
    pub g2: Option<f64>,
    pub g2_p: Option<f64>,
    pub x2: Option<f64>,
    pub x2_p: Option<f64>,
    pub t: Option<f64>,
    pub t_p: Option<f64>,
    /// Why an asymptotic test is missing, when one is.
    pub note: Option<String>,
    pub exact_rank: Option<usize>,
    pub g2_rank: Option<usize>,
    pub x2_rank: Option<usize>,
    pub t_rank: Option<usize>,
}

impl AssociationRecord {
    pub fn from_table(word: impl Into<String>, table: ContingencyTable2x2) -> Self {
        let fisher = fisher_exact::<f64>(&table);
        let g2 = likelihood_g2::<f64>(&table);
        let x2 = pearson_x2::<f64>(&table);
        let t = t_test::<f64>(&table);
        let note = [&g2, &x2, &t]
            .iter()
            .find_map(|r| r.as_ref().err())
            .map(|e| e.to_string());
        Self {
            word: word.into(),
            n11: table.n11(),
            m11: table.expected_counts::<f64>().m11,
            table,
            exact_left_p: fisher.left_p,
            exact_right_p: fisher.right_p,
            exact_two_p: fisher.two_sided_p,
            g2: g2.as_ref().ok().map(|r| r.statistic),
            g2_p: g2.as_ref().ok().map(|r| r.p_value),
            x2: x2.as_ref().ok().map(|r| r.statistic),
            x2_p: x2.as_ref().ok().map(|r| r.p_value),
            t: t.as_ref().ok().map(|r| r.statistic),
            t_p: t.as_ref().ok().map(|r| r.p_value),
            note,
            exact_rank: None,
            g2_rank: None,
            x2_rank: None,
            t_rank: None,
        }
    }

    pub fn p_value(&self, key: RankKey) -> Option<f64> {
        match key {
            RankKey::Exact => Some(self.exact_two_p),
            RankKey::G2 => self.g2_p,
            RankKey::X2 => self.x2_p,
            RankKey::T => self.t_p,
        }
    }

    pub fn rank(&self, key: RankKey) -> Option<usize> {
        match key {
            RankKey::Exact => self.exact_rank,
            RankKey::G2 => self.g2_rank,
            RankKey::X2 => self.x2_rank,
            RankKey::T => self.t_rank,
        }
    }

    fn rank_mut(&mut self, key: RankKey) -> &mut Option<usize> {
        match key {
            RankKey::Exact => &mut self.exact_rank,
            RankKey::G2 => &mut self.g2_rank,
            RankKey::X2 => &mut self.x2_rank,
            RankKey::T => &mut self.t_rank,
        }
    }
}

/// The p-value a ranking is taken over. `Exact` uses the two-sided value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankKey {
    Exact,
    G2,
    X2,
    T,
}

impl RankKey {
    pub const ALL: [RankKey; 4] = [RankKey::Exact, RankKey::G2, RankKey::X2, RankKey::T];
}

/// Rank 1 is the largest p-value (most independent). Ties go to the
/// lexicographically smaller word. Records without a p-value for `key` get
/// no rank; their words are returned.
pub fn rank_records(records: &mut [AssociationRecord], key: RankKey) -> Vec<String> {
    let mut order: Vec<(usize, f64)> = Vec::with_capacity(records.len());
    let mut excluded = Vec::new();
    for (i, r) in records.iter_mut().enumerate() {
        *r.rank_mut(key) = None;
        match r.p_value(key) {
            Some(p) if p.is_finite() => order.push((i, p)),
            _ => excluded.push(r.word.clone()),
        }
    }
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| records[a.0].word.cmp(&records[b.0].word)));
    for (rank, (i, _)) in order.into_iter().enumerate() {
        *records[i].rank_mut(key) = Some(rank + 1);
    }
    excluded
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub slot: Slot,
    /// Smallest joint count a candidate needs. Values below 1 act as 1.
    pub min_count: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { slot: Slot::Second, min_count: 1 }
    }
}

/// Scan `<word> fixed_second` bigrams.
pub fn association_scan(counts: &BigramCounts, fixed_second: &str) -> Result<Vec<AssociationRecord>> {
    association_scan_with(counts, fixed_second, &ScanOptions::default())
}

/// One ranked record per word co-occurring with `fixed` in the other slot,
/// ordered by exact-test rank.
pub fn association_scan_with(
    counts: &BigramCounts,
    fixed: &str,
    options: &ScanOptions,
) -> Result<Vec<AssociationRecord>> {
    let no_obs = || Error::NoObservations(fixed.to_owned());
    let id = counts.vocab().id(fixed).ok_or_else(no_obs)?;
    let fixed_total = match options.slot {
        Slot::Second => counts.second_by_id(id),
        Slot::First => counts.first_by_id(id),
    };
    if fixed_total == 0 {
        return Err(no_obs());
    }
    let min = options.min_count.max(1);
    let mut candidates: Vec<(u32, u64)> = counts
        .pair_ids()
        .filter_map(|((a, b), c)| match options.slot {
            Slot::Second if b == id => Some((a, c)),
            Slot::First if a == id => Some((b, c)),
            _ => None,
        })
        .filter(|&(_, c)| c >= min)
        .collect();
    candidates.sort_by(|a, b| counts.vocab().word(a.0).cmp(counts.vocab().word(b.0)));

    let total = counts.total_bigrams();
    let mut records = candidates
        .par_iter()
        .map(|&(other, pair)| {
            let table = match options.slot {
                Slot::Second => table_from_counts(pair, counts.first_by_id(other), fixed_total, total),
                Slot::First => table_from_counts(pair, fixed_total, counts.second_by_id(other), total),
            }?;
            Ok(AssociationRecord::from_table(counts.vocab().word(other), table))
        })
        .collect::<Result<Vec<_>>>()?;

    for key in RankKey::ALL {
        rank_records(&mut records, key);
    }
    records.sort_by_key(|r| r.exact_rank);
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{count_bigrams, tokenize, TokenizerConfig};

    fn record(word: &str, p: f64) -> AssociationRecord {
        let mut r = AssociationRecord::from_table(word, ContingencyTable2x2::new(1, 1, 1, 1).unwrap());
        r.exact_two_p = p;
        r
    }

    #[test]
    fn oil_industry_table() {
        let mut c = BigramCounts::new();
        c.add_pair("oil", "industry", 17);
        c.add_pair("oil", "x", 229);
        c.add_pair("y", "industry", 935);
        c.add_pair("y", "x", 1381647);
        assert_eq!(c.first_count("oil"), 246);
        assert_eq!(c.second_count("industry"), 952);
        let t = bigram_table(&c, "oil", "industry").unwrap();
        assert_eq!(t.cells(), [17, 229, 935, 1381647]);
        assert_eq!((t.row1(), t.col1(), t.total()), (246, 952, 1382828));
    }

    #[test]
    fn collocated_and_absent_pairs() {
        let c = count_bigrams(&["a", "b", "c", "a", "b", "d"]);
        let t = bigram_table(&c, "a", "b").unwrap();
        assert_eq!((t.n11(), t.n12(), t.n21()), (2, 0, 0));
        let t = bigram_table(&c, "c", "d").unwrap();
        assert_eq!(t.n11(), 0);
        assert_eq!((t.row1(), t.col1()), (1, 1));
        assert_eq!(t.total(), 5);
        let t = bigram_table(&c, "zzz", "b").unwrap();
        assert_eq!((t.row1(), t.n11()), (0, 0));
    }

    #[test]
    fn small_scan() {
        let cfg = TokenizerConfig::default();
        let c = count_bigrams(&tokenize("big cat big cat big dog", &cfg));
        assert_eq!(c.total_bigrams(), 5);
        let recs = association_scan(&c, "cat").unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!((r.word.as_str(), r.n11), ("big", 2));
        // first(big)=3, second(cat)=2, total=5
        assert_eq!(r.table.cells(), [2, 1, 0, 2]);
        assert!((r.m11 - 1.2).abs() < 1e-12);
        assert_eq!(r.exact_rank, Some(1));
    }

    #[test]
    fn scan_first_slot() {
        let c = count_bigrams(&["big", "cat", "big", "dog", "big", "cat"]);
        let recs = association_scan_with(&c, "big", &ScanOptions { slot: Slot::First, min_count: 1 }).unwrap();
        let words: Vec<_> = recs.iter().map(|r| r.word.as_str()).collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["cat", "dog"]);
        let n: u64 = recs.iter().map(|r| r.n11).sum();
        assert_eq!(n, c.first_count("big"));
    }

    #[test]
    fn scan_missing_word() {
        let c = count_bigrams(&["a", "b"]);
        assert_eq!(association_scan(&c, "a").unwrap_err(), Error::NoObservations("a".into()));
        assert!(association_scan(&c, "q").is_err());
    }

    #[test]
    fn min_count_filters() {
        let c = count_bigrams(&["a", "x", "b", "x", "a", "x", "c"]);
        let recs = association_scan_with(&c, "x", &ScanOptions { slot: Slot::Second, min_count: 2 }).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].word, "a");
    }

    #[test]
    fn rank_semantics() {
        let mut recs = vec![record("a", 0.9), record("b", 0.1), record("c", 0.5)];
        assert!(rank_records(&mut recs, RankKey::Exact).is_empty());
        let ranks: Vec<_> = recs.iter().map(|r| r.exact_rank.unwrap()).collect();
        assert_eq!(ranks, vec![1, 3, 2]);

        let mut recs = vec![record("c", 0.5), record("a", 0.5), record("b", 0.5)];
        rank_records(&mut recs, RankKey::Exact);
        let ranks: Vec<_> = recs.iter().map(|r| r.exact_rank.unwrap()).collect();
        assert_eq!(ranks, vec![3, 1, 2]);
    }

    #[test]
    fn tiny_unrounded_values_rank_distinctly() {
        let mut recs = vec![record("futures", 3e-6), record("the", 2e-9)];
        rank_records(&mut recs, RankKey::Exact);
        assert_eq!((recs[0].exact_rank, recs[1].exact_rank), (Some(1), Some(2)));
    }

    #[test]
    fn undefined_values_excluded() {
        let mut recs = vec![record("a", 0.2), record("b", 0.3)];
        recs[0].t_p = None;
        let excluded = rank_records(&mut recs, RankKey::T);
        assert_eq!(excluded, vec!["a".to_string()]);
        assert_eq!((recs[0].t_rank, recs[1].t_rank), (None, Some(1)));
    }

    #[test]
    fn degenerate_rows_kept_with_note() {
        // "a" is first in every bigram position, so row 2 of its table is empty
        let mut c = BigramCounts::new();
        c.add_pair("a", "x", 3);
        c.add_pair("a", "y", 2);
        let recs = association_scan(&c, "x").unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].g2_p.is_none());
        assert!(recs[0].note.as_deref().unwrap().contains("degenerate"));
        assert_eq!(recs[0].exact_two_p, 1.0);
        assert_eq!(recs[0].g2_rank, None);
    }
}
