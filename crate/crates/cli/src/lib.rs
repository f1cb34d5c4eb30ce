//! The `exactlex` command line.
//!
//! [`run`] takes the argument vector and output streams and returns the
//! process exit status: 0 on success, 1 on a data or domain error, 2 on a
//! usage error.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use exactlex::assoc::{association_scan_with, ScanOptions, Slot};
use exactlex::corpus::{decode_utf8, tokenize_segments, BigramCounts, WordCounts};
use exactlex::render::{
    render_assoc_tsv, render_counts_tsv, render_freq_report, FreqStatistics, Labels, RenderOptions,
};
use exactlex::{
    calibration, zipf_summary, AssociationMeasures, ContingencyTable2x2, ExpectedTable, FisherResult,
    MultinomialModel, TestResult, TokenizerConfig,
};

#[derive(Debug, Parser)]
#[command(name = "exactlex", version, about = "Exact and asymptotic tests of association for bigrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every test on one 2×2 table.
    Test(TestArgs),
    /// Rank the words that precede (or follow) a fixed word.
    Assoc(AssocArgs),
    /// Word or bigram frequencies.
    Count(CountArgs),
    /// Frequency-of-frequency summary.
    Zipf(ZipfArgs),
    /// Null calibration of the tests by multinomial simulation.
    Simulate(SimulateArgs),
    /// The four tea-tasting tables as a built-in demonstration.
    Tea(TeaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
    Report,
}

#[derive(Debug, Args)]
struct Rounding {
    /// Decimals for statistics.
    #[arg(long)]
    stat_decimals: Option<usize>,
    /// Decimals for probabilities.
    #[arg(long)]
    p_decimals: Option<usize>,
}

impl Rounding {
    fn options(&self, base: RenderOptions) -> RenderOptions {
        RenderOptions {
            stat_decimals: self.stat_decimals.unwrap_or(base.stat_decimals),
            p_decimals: self.p_decimals.unwrap_or(base.p_decimals),
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long, requires_all = ["n12", "n21", "n22"], conflicts_with = "input")]
    n11: Option<u64>,
    #[arg(long, requires = "n11")]
    n12: Option<u64>,
    #[arg(long, requires = "n11")]
    n21: Option<u64>,
    #[arg(long, requires = "n11")]
    n22: Option<u64>,
    /// JSON file holding a table object or an array of them.
    #[arg(long, required_unless_present = "n11")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Report)]
    format: Format,
    #[command(flatten)]
    rounding: Rounding,
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// UTF-8 text files; standard input when absent.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
    lowercase: bool,
    #[arg(long = "strip-punct", action = clap::ArgAction::Set, default_value_t = true)]
    strip_punct: bool,
    /// Do not let bigrams cross line breaks.
    #[arg(long, action = clap::ArgAction::Set, default_value_t = false)]
    sentence_reset: bool,
}

impl CorpusArgs {
    fn config(&self) -> TokenizerConfig {
        TokenizerConfig {
            lowercase: self.lowercase,
            strip_punctuation: self.strip_punct,
            sentence_reset: self.sentence_reset,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("fixed").required(true).args(["second", "first"])))]
struct AssocArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Scan `<word> WORD`.
    #[arg(long)]
    second: Option<String>,
    /// Scan `WORD <word>`.
    #[arg(long)]
    first: Option<String>,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    #[command(flatten)]
    rounding: Rounding,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Count bigram types instead of words.
    #[arg(long)]
    bigrams: bool,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Debug, Args)]
struct ZipfArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("model").required(true).args(["p_row", "cells"])))]
struct SimulateArgs {
    /// Row probability of an independence model.
    #[arg(long, requires = "p_col")]
    p_row: Option<f64>,
    #[arg(long, requires = "p_row")]
    p_col: Option<f64>,
    /// Explicit cell probabilities `p11,p12,p21,p22`.
    #[arg(long, value_delimiter = ',')]
    cells: Option<Vec<f64>>,
    /// Sample size of every simulated table.
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, num_args = 1.., default_values_t = [0.01, 0.05, 0.10])]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct TeaArgs {
    #[arg(long, value_enum, default_value_t = Format::Report)]
    format: Format,
    #[command(flatten)]
    rounding: Rounding,
}

/// Machine-readable form of every statistic for one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub table: ContingencyTable2x2,
    pub expected: ExpectedTable,
    pub fisher: FisherResult,
    pub pearson: Option<TestResult>,
    pub g2: Option<TestResult>,
    pub yates: Option<TestResult>,
    pub mantel_haenszel: Option<TestResult>,
    pub t_test: Option<TestResult>,
    pub measures: Option<AssociationMeasures>,
    pub small_expected_pct: f64,
    /// Reason each missing entry is missing.
    pub notes: BTreeMap<String, String>,
}

impl TestReport {
    pub fn new(s: &FreqStatistics) -> Self {
        let mut notes = BTreeMap::new();
        let mut keep = |name: &str, r: &exactlex::Result<TestResult>| match r {
            Ok(v) => Some(*v),
            Err(e) => {
                notes.insert(name.to_string(), e.to_string());
                None
            }
        };
        let pearson = keep("pearson", &s.pearson);
        let g2 = keep("g2", &s.g2);
        let yates = keep("yates", &s.yates);
        let mantel_haenszel = keep("mantel_haenszel", &s.mantel_haenszel);
        let t_test = keep("t_test", &s.t_test);
        let measures = match &s.measures {
            Ok(m) => Some(*m),
            Err(e) => {
                notes.insert("measures".into(), e.to_string());
                None
            }
        };
        Self {
            table: s.table,
            expected: s.expected.clone(),
            fisher: s.fisher,
            pearson,
            g2,
            yates,
            mantel_haenszel,
            t_test,
            measures,
            small_expected_pct: s.warning.percent,
            notes,
        }
    }
}

/// The four tables of the tea-tasting experiment, most to least correct.
pub const TEA_TABLES: [[u64; 4]; 4] = [[4, 0, 0, 4], [3, 1, 1, 3], [1, 3, 3, 1], [0, 4, 4, 0]];

enum Failure {
    Usage(String),
    Data(String),
}

impl<E: std::fmt::Display> From<E> for Failure
where
    E: Into<exactlex::Error>,
{
    fn from(e: E) -> Self {
        Failure::Data(e.into().to_string())
    }
}

fn data(msg: impl std::fmt::Display) -> Failure {
    Failure::Data(msg.to_string())
}

type Outcome = Result<(), Failure>;

fn json<T: Serialize + ?Sized>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(data)?;
    s.push('\n');
    Ok(s)
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(data)
}

fn load_tables(args: &TestArgs) -> Result<Vec<ContingencyTable2x2>, Failure> {
    if let Some(n11) = args.n11 {
        let cells = (n11, args.n12.unwrap_or(0), args.n21.unwrap_or(0), args.n22.unwrap_or(0));
        return Ok(vec![ContingencyTable2x2::new(cells.0, cells.1, cells.2, cells.3)?]);
    }
    let path = args.input.as_ref().ok_or_else(|| Failure::Usage("missing table".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let items = match value {
        serde_json::Value::Array(items) => items,
        other => vec![other],
    };
    items
        .into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| data(format!("{}: {e}", path.display()))))
        .collect()
}

fn render_tables(
    tables: &[ContingencyTable2x2],
    format: Format,
    options: RenderOptions,
    labels: &Labels,
    single_json_object: bool,
) -> Result<String, Failure> {
    let stats: Vec<FreqStatistics> = tables.iter().map(FreqStatistics::compute).collect();
    match format {
        Format::Json => {
            let reports: Vec<TestReport> = stats.iter().map(TestReport::new).collect();
            if single_json_object && reports.len() == 1 {
                json(&reports[0])
            } else {
                json(&reports)
            }
        }
        Format::Report => Ok(stats
            .iter()
            .map(|s| render_freq_report(s, labels, &options))
            .collect::<Vec<_>>()
            .join("\n")),
        Format::Tsv => {
            let mut out = String::from("n11\tn12\tn21\tn22\tfisher_left\tfisher_right\tfisher_two\tpoint\tx2\tx2_p\tg2\tg2_p\tyates\tyates_p\tmh\tmh_p\tt\tt_p\n");
            let f = |x: f64, d: usize| exactlex::render::fixed(x, d);
            let pair = |r: &exactlex::Result<TestResult>| match r {
                Ok(r) => format!("{}\t{}", f(r.statistic, options.stat_decimals), f(r.p_value, options.p_decimals)),
                Err(_) => "NA\tNA".into(),
            };
            for s in &stats {
                let [a, b, c, d] = s.table.cells();
                let p = options.p_decimals;
                out.push_str(&format!(
                    "{a}\t{b}\t{c}\t{d}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    f(s.fisher.left_p, p),
                    f(s.fisher.right_p, p),
                    f(s.fisher.two_sided_p, p),
                    f(s.fisher.point_p, p),
                    pair(&s.pearson),
                    pair(&s.g2),
                    pair(&s.yates),
                    pair(&s.mantel_haenszel),
                    pair(&s.t_test),
                ));
            }
            Ok(out)
        }
    }
}

fn read_inputs(corpus: &CorpusArgs, stdin: &mut dyn Read) -> Result<Vec<(String, Vec<u8>)>, Failure> {
    if corpus.input.is_empty() {
        let mut buf = Vec::new();
        stdin.read_to_end(&mut buf).map_err(data)?;
        return Ok(vec![("<stdin>".into(), buf)]);
    }
    corpus
        .input
        .iter()
        .map(|p| {
            std::fs::read(p)
                .map(|b| (p.display().to_string(), b))
                .map_err(|e| data(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Count every input as its own stream; bigrams never span files.
fn count_corpus(corpus: &CorpusArgs, stdin: &mut dyn Read) -> Result<(WordCounts, BigramCounts), Failure> {
    let config = corpus.config();
    let mut words = WordCounts::default();
    let mut bigrams = BigramCounts::new();
    for (name, bytes) in read_inputs(corpus, stdin)? {
        let text = decode_utf8(&bytes).map_err(|e| data(format!("{name}: {e}")))?;
        for segment in tokenize_segments(text, &config) {
            words.add_tokens(&segment);
            bigrams.add_tokens(&segment);
        }
    }
    Ok((words, bigrams))
}

fn cmd_assoc(args: &AssocArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> Outcome {
    let (_, counts) = count_corpus(&args.corpus, stdin)?;
    let (fixed, slot) = match (&args.second, &args.first) {
        (Some(w), _) => (w, Slot::Second),
        (None, Some(w)) => (w, Slot::First),
        (None, None) => return Err(Failure::Usage("need --second or --first".into())),
    };
    let fixed = if args.corpus.lowercase { fixed.to_lowercase() } else { fixed.clone() };
    let records = association_scan_with(&counts, &fixed, &ScanOptions { slot, min_count: args.min_count })?;
    let text = match args.format {
        Format::Json => json(&records)?,
        Format::Tsv | Format::Report => render_assoc_tsv(&records, &args.rounding.options(RenderOptions::TSV)),
    };
    emit(out, &text)
}

#[derive(Serialize)]
struct TypeCount<'a> {
    #[serde(rename = "type")]
    kind: &'a str,
    count: u64,
}

fn cmd_count(args: &CountArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> Outcome {
    let (words, bigrams) = count_corpus(&args.corpus, stdin)?;
    let rows = if args.bigrams { bigrams.sorted_pairs() } else { words.sorted() };
    let text = match args.format {
        Format::Json => {
            let items: Vec<TypeCount> = rows.iter().map(|(t, c)| TypeCount { kind: t, count: *c }).collect();
            json(&items)?
        }
        Format::Tsv | Format::Report => render_counts_tsv(&rows),
    };
    emit(out, &text)
}

fn cmd_zipf(args: &ZipfArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> Outcome {
    let (words, bigrams) = count_corpus(&args.corpus, stdin)?;
    let s = zipf_summary(&bigrams, &words);
    let text = match args.format {
        Format::Json => json(&s)?,
        Format::Report => format!(
            "tokens\t{}\nbigrams\t{}\ndistinct_words\t{}\ndistinct_bigrams\t{}\nhapax_word_pct\t{}\nword_le5_pct\t{}\nhapax_bigram_pct\t{}\nbigram_le5_pct\t{}\n",
            s.token_count,
            s.bigram_count,
            s.distinct_words,
            s.distinct_bigrams,
            exactlex::render::fixed(s.hapax_word_pct, 1),
            exactlex::render::fixed(s.word_le5_pct, 1),
            exactlex::render::fixed(s.hapax_bigram_pct, 1),
            exactlex::render::fixed(s.bigram_le5_pct, 1),
        ),
        Format::Tsv => {
            let mut t = String::from("kind\tfrequency\ttypes\n");
            for (f, n) in &s.word_freq_of_freq {
                t.push_str(&format!("word\t{f}\t{n}\n"));
            }
            for (f, n) in &s.bigram_freq_of_freq {
                t.push_str(&format!("bigram\t{f}\t{n}\n"));
            }
            t
        }
    };
    emit(out, &text)
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Outcome {
    let model = match (&args.cells, args.p_row, args.p_col) {
        (Some(c), _, _) => match c[..] {
            [p11, p12, p21, p22] => MultinomialModel::new(p11, p12, p21, p22)?,
            _ => return Err(Failure::Usage(format!("--cells takes 4 probabilities, got {}", c.len()))),
        },
        (None, Some(r), Some(c)) => MultinomialModel::independent(r, c)?,
        _ => return Err(Failure::Usage("need --p-row and --p-col, or --cells".into())),
    };
    let report = calibration(&model, args.n, args.trials, &args.alpha, args.seed)?;
    let text = match args.format {
        Format::Json => json(&report)?,
        Format::Tsv | Format::Report => {
            let mut t = String::from("test\talpha\trejection_rate\tevaluated\tskipped\tmean_p\n");
            for (name, cal) in &report.tests {
                for (a, r) in report.alphas.iter().zip(&cal.rejection_rates) {
                    t.push_str(&format!("{name}\t{a}\t{r}\t{}\t{}\t{}\n", cal.evaluated, cal.skipped, cal.mean_p));
                }
            }
            t
        }
    };
    emit(out, &text)
}

fn dispatch(cli: Cli, stdin: &mut dyn Read, out: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Test(args) => {
            let tables = load_tables(&args)?;
            let text = render_tables(
                &tables,
                args.format,
                args.rounding.options(RenderOptions::REPORT),
                &Labels::default(),
                args.input.is_none(),
            )?;
            emit(out, &text)
        }
        Command::Tea(args) => {
            let tables: Vec<ContingencyTable2x2> = TEA_TABLES
                .iter()
                .map(|[a, b, c, d]| ContingencyTable2x2::new(*a, *b, *c, *d))
                .collect::<exactlex::Result<_>>()?;
            let labels = Labels {
                rows: ["milk".into(), "tea".into()],
                cols: ["milk".into(), "tea".into()],
            };
            let text = render_tables(&tables, args.format, args.rounding.options(RenderOptions::REPORT), &labels, false)?;
            emit(out, &text)
        }
        Command::Assoc(args) => cmd_assoc(&args, stdin, out),
        Command::Count(args) => cmd_count(&args, stdin, out),
        Command::Zipf(args) => cmd_zipf(&args, stdin, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
    }
}

/// Parse `argv` (program name first) and execute it.
pub fn run<I, S>(argv: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(cli, stdin, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
