//! Exact and asymptotic tests of association for word pairs.
//!
//! The crate builds 2×2 contingency tables from bigram counts and scores
//! them with Fisher's exact test alongside Pearson's X², the likelihood
//! ratio G², the continuity-corrected and Mantel-Haenszel chi-squares and
//! the bigram t-score.
//!
//! Statistics are generic over the float type ([`num::Real`]); table
//! arithmetic such as expected counts also works over exact rationals
//! ([`num::Scalar`]). The aliases below fix the common instantiations.
//!
//! ```
//! use exactlex::{fisher_exact, make_table, FisherResultF64};
//!
//! let table = make_table(3, 1, 1, 3).unwrap();
//! let f: FisherResultF64 = fisher_exact(&table);
//! assert!((f.left_p - 0.9857).abs() < 1e-4);
//! ```

// `!(x > 0)` is deliberate: NaN must fail the domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assoc;
pub mod asymptotic;
pub mod corpus;
pub mod error;
pub mod exact;
pub mod num;
pub mod render;
pub mod simulate;
pub mod special;
pub mod tables;

pub use assoc::{association_scan, bigram_table, rank_records, AssociationRecord, RankKey, Slot};
pub use asymptotic::{
    association_measures, likelihood_g2, mantel_haenszel_x2, pearson_x2, t_test, yates_x2,
    AssociationMeasures, Method, TestResult,
};
pub use corpus::{count_bigrams, tokenize, zipf_summary, BigramCounts, CorpusSummary, TokenizerConfig};
pub use error::{Error, Result};
pub use exact::{fisher_exact, hypergeom_distribution, FisherResult, HypergeomDist};
pub use simulate::{calibration, sample_table, CalibrationReport, MultinomialModel};
pub use special::{chi_square_sf, normal_sf};
pub use tables::{
    expected_counts, make_table, small_expected_warning, transpose, ContingencyTable2x2,
    ExpectedTable, IndependenceModel,
};

pub type HypergeomDistF64 = HypergeomDist<f64>;
pub type HypergeomDistF32 = HypergeomDist<f32>;
pub type FisherResultF64 = FisherResult<f64>;
pub type FisherResultF32 = FisherResult<f32>;
pub type TestResultF64 = TestResult<f64>;
pub type TestResultF32 = TestResult<f32>;
pub type AssociationMeasuresF64 = AssociationMeasures<f64>;
pub type ExpectedTableF64 = ExpectedTable<f64>;
/// Expected counts held exactly.
pub type ExpectedTableExact = ExpectedTable<num_rational::BigRational>;
pub type IndependenceModelF64 = IndependenceModel<f64>;
pub type IndependenceModelExact = IndependenceModel<num_rational::BigRational>;
