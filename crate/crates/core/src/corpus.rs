//! Tokenization, word and bigram counting, and frequency-of-frequency
//! summaries.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    /// Start a fresh bigram stream at every newline.
    pub sentence_reset: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self { lowercase: true, strip_punctuation: true, sentence_reset: false }
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c, '¡' | '§' | '«' | '¶' | '·' | '»' | '¿')
        || ('\u{2010}'..='\u{2027}').contains(&c)
        || ('\u{2030}'..='\u{205E}').contains(&c)
        || ('\u{2E00}'..='\u{2E7F}').contains(&c)
        || ('\u{3001}'..='\u{3003}').contains(&c)
        || ('\u{3008}'..='\u{3011}').contains(&c)
        || ('\u{FF01}'..='\u{FF0F}').contains(&c)
}

fn normalize_token(raw: &str, config: &TokenizerConfig) -> Option<String> {
    let trimmed = if config.strip_punctuation { raw.trim_matches(is_punctuation) } else { raw };
    if trimmed.is_empty() {
        return None;
    }
    Some(if config.lowercase { trimmed.to_lowercase() } else { trimmed.to_owned() })
}

/// Maximal non-whitespace runs, normalized per `config`. Empty tokens are
/// dropped.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    text.split_whitespace().filter_map(|raw| normalize_token(raw, config)).collect()
}

/// Token streams that bigrams may not cross: one per line with
/// `sentence_reset`, otherwise the whole text.
pub fn tokenize_segments(text: &str, config: &TokenizerConfig) -> Vec<Vec<String>> {
    if config.sentence_reset {
        text.lines().map(|line| tokenize(line, config)).filter(|s| !s.is_empty()).collect()
    } else {
        vec![tokenize(text, config)]
    }
}

/// Validate raw input, naming the first bad byte.
pub fn decode_utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Ingestion { offset: e.valid_up_to() })
}

pub fn tokenize_bytes(bytes: &[u8], config: &TokenizerConfig) -> Result<Vec<String>> {
    Ok(tokenize(decode_utf8(bytes)?, config))
}

/// String interner; ids are dense and assigned in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    ids: HashMap<Arc<str>, u32>,
    words: Vec<Arc<str>>,
}

impl Vocab {
    pub fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = u32::try_from(self.words.len()).expect("vocabulary exceeds u32 ids");
        let word: Arc<str> = Arc::from(word);
        self.words.push(word.clone());
        self.ids.insert(word, id);
        id
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Ordered word-pair counts with positional marginals.
#[derive(Debug, Clone, Default)]
pub struct BigramCounts {
    vocab: Vocab,
    pairs: HashMap<(u32, u32), u64>,
    first: Vec<u64>,
    second: Vec<u64>,
    total: u64,
}

impl BigramCounts {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, word: &str) -> u32 {
        let id = self.vocab.intern(word);
        if id as usize == self.first.len() {
            self.first.push(0);
            self.second.push(0);
        }
        id
    }

    fn add_ids(&mut self, a: u32, b: u32, count: u64) {
        if count == 0 {
            return;
        }
        *self.pairs.entry((a, b)).or_insert(0) += count;
        self.first[a as usize] += count;
        self.second[b as usize] += count;
        self.total += count;
    }

    pub fn add_pair(&mut self, first: &str, second: &str, count: u64) {
        let a = self.intern(first);
        let b = self.intern(second);
        self.add_ids(a, b, count);
    }

    /// Count every adjacent pair of one token stream.
    pub fn add_tokens<S: AsRef<str>>(&mut self, tokens: &[S]) {
        let mut prev: Option<u32> = None;
        for tok in tokens {
            let id = self.intern(tok.as_ref());
            if let Some(p) = prev {
                self.add_ids(p, id, 1);
            }
            prev = Some(id);
        }
    }

    /// Fold in counts from an adjacent shard. `boundary` is the pair that
    /// straddles the two shards (last token of this one, first of the
    /// other), which neither shard saw.
    pub fn merge(&mut self, other: &BigramCounts, boundary: Option<(&str, &str)>) {
        let remap: Vec<u32> = other.vocab.words.iter().map(|w| self.intern(w)).collect();
        for (&(a, b), &c) in &other.pairs {
            self.add_ids(remap[a as usize], remap[b as usize], c);
        }
        if let Some((a, b)) = boundary {
            self.add_pair(a, b, 1);
        }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn total_bigrams(&self) -> u64 {
        self.total
    }

    pub fn distinct_bigrams(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair_count(&self, first: &str, second: &str) -> u64 {
        match (self.vocab.id(first), self.vocab.id(second)) {
            (Some(a), Some(b)) => self.pairs.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Occurrences of `word` as the first element of a pair.
    pub fn first_count(&self, word: &str) -> u64 {
        self.vocab.id(word).map_or(0, |id| self.first[id as usize])
    }

    /// Occurrences of `word` as the second element of a pair.
    pub fn second_count(&self, word: &str) -> u64 {
        self.vocab.id(word).map_or(0, |id| self.second[id as usize])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.pairs.iter().map(|(&(a, b), &c)| (self.vocab.word(a), self.vocab.word(b), c))
    }

    pub(crate) fn pair_ids(&self) -> impl Iterator<Item = ((u32, u32), u64)> + '_ {
        self.pairs.iter().map(|(&k, &c)| (k, c))
    }

    pub(crate) fn first_by_id(&self, id: u32) -> u64 {
        self.first[id as usize]
    }

    pub(crate) fn second_by_id(&self, id: u32) -> u64 {
        self.second[id as usize]
    }

    /// Bigram types keyed `"w1 w2"`, by descending count then text.
    pub fn sorted_pairs(&self) -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> = self.pairs().map(|(a, b, c)| (format!("{a} {b}"), c)).collect();
        sort_desc(&mut v);
        v
    }

    fn canonical(&self) -> Canonical<'_> {
        let pairs = self.pairs().map(|(a, b, c)| ((a, b), c)).collect();
        let margins = (0..self.vocab.len() as u32)
            .filter(|&id| self.first[id as usize] + self.second[id as usize] > 0)
            .map(|id| (self.vocab.word(id), (self.first[id as usize], self.second[id as usize])))
            .collect();
        (pairs, margins)
    }
}

/// Pair counts and per-word marginals, keyed by text.
type Canonical<'a> = (BTreeMap<(&'a str, &'a str), u64>, BTreeMap<&'a str, (u64, u64)>);

/// Equality on the counted content, independent of interning order.
impl PartialEq for BigramCounts {
    fn eq(&self, other: &Self) -> bool {
        self.total == other.total && self.canonical() == other.canonical()
    }
}

fn sort_desc(v: &mut [(String, u64)]) {
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

pub fn count_bigrams<S: AsRef<str>>(tokens: &[S]) -> BigramCounts {
    let mut counts = BigramCounts::new();
    counts.add_tokens(tokens);
    counts
}

/// Count with `shards` independent workers, then merge left to right with
/// the straddling pairs restored.
pub fn count_bigrams_parallel<S: AsRef<str> + Sync>(tokens: &[S], shards: usize) -> BigramCounts {
    if tokens.is_empty() {
        return BigramCounts::new();
    }
    let chunk = tokens.len().div_ceil(shards.max(1));
    let parts: Vec<BigramCounts> = tokens.par_chunks(chunk).map(count_bigrams).collect();
    let edges: Vec<&[S]> = tokens.chunks(chunk).collect();
    let mut iter = parts.into_iter();
    let mut acc = iter.next().expect("at least one shard");
    for (i, part) in iter.enumerate() {
        let boundary = (edges[i].last().expect("nonempty").as_ref(), edges[i + 1][0].as_ref());
        acc.merge(&part, Some(boundary));
    }
    acc
}

/// Count a text honouring `sentence_reset`.
pub fn count_text(text: &str, config: &TokenizerConfig) -> (WordCounts, BigramCounts) {
    let mut words = WordCounts::default();
    let mut bigrams = BigramCounts::new();
    for segment in tokenize_segments(text, config) {
        words.add_tokens(&segment);
        bigrams.add_tokens(&segment);
    }
    (words, bigrams)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordCounts {
    counts: HashMap<String, u64>,
    total: u64,
}

impl WordCounts {
    pub fn add_tokens<S: AsRef<str>>(&mut self, tokens: &[S]) {
        for t in tokens {
            *self.counts.entry(t.as_ref().to_owned()).or_insert(0) += 1;
        }
        self.total += tokens.len() as u64;
    }

    pub fn merge(&mut self, other: &WordCounts) {
        for (w, c) in &other.counts {
            *self.counts.entry(w.clone()).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn token_count(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn sorted(&self) -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> = self.counts.iter().map(|(w, c)| (w.clone(), *c)).collect();
        sort_desc(&mut v);
        v
    }
}

pub fn count_words<S: AsRef<str>>(tokens: &[S]) -> WordCounts {
    let mut w = WordCounts::default();
    w.add_tokens(tokens);
    w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub token_count: u64,
    pub bigram_count: u64,
    pub distinct_words: u64,
    pub distinct_bigrams: u64,
    /// Frequency → number of word types seen that often.
    pub word_freq_of_freq: BTreeMap<u64, u64>,
    pub bigram_freq_of_freq: BTreeMap<u64, u64>,
    pub hapax_word_pct: f64,
    pub word_le5_pct: f64,
    pub hapax_bigram_pct: f64,
    pub bigram_le5_pct: f64,
}

fn freq_of_freq(counts: impl Iterator<Item = u64>) -> BTreeMap<u64, u64> {
    let mut fof = BTreeMap::new();
    for c in counts {
        *fof.entry(c).or_insert(0) += 1;
    }
    fof
}

fn pct(fof: &BTreeMap<u64, u64>, max_freq: u64) -> f64 {
    let types: u64 = fof.values().sum();
    if types == 0 {
        return 0.0;
    }
    let low: u64 = fof.range(..=max_freq).map(|(_, n)| n).sum();
    100.0 * low as f64 / types as f64
}

pub fn zipf_summary(counts: &BigramCounts, words: &WordCounts) -> CorpusSummary {
    let word_fof = freq_of_freq(words.counts.values().copied());
    let bigram_fof = freq_of_freq(counts.pairs.values().copied());
    CorpusSummary {
        token_count: words.token_count(),
        bigram_count: counts.total_bigrams(),
        distinct_words: words.distinct() as u64,
        distinct_bigrams: counts.distinct_bigrams() as u64,
        hapax_word_pct: pct(&word_fof, 1),
        word_le5_pct: pct(&word_fof, 5),
        hapax_bigram_pct: pct(&bigram_fof, 1),
        bigram_le5_pct: pct(&bigram_fof, 5),
        word_freq_of_freq: word_fof,
        bigram_freq_of_freq: bigram_fof,
    }
}
