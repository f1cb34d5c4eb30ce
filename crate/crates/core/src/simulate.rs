//! Multinomial table sampling and null calibration of the tests.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::{likelihood_g2, pearson_x2, t_test};
use crate::error::{Error, Result};
use crate::exact::fisher_exact;
use crate::tables::ContingencyTable2x2;

/// Independent RNG streams a calibration run is split into. Fixed so the
/// report does not depend on the number of worker threads.
pub const STREAMS: u64 = 64;

pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), one stream per chunk; binomial draws by rand_distr 0.5";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultinomialModel {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

impl MultinomialModel {
    pub fn new(p11: f64, p12: f64, p21: f64, p22: f64) -> Result<Self> {
        let ps = [p11, p12, p21, p22];
        if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidModel(format!("cell probabilities outside [0, 1]: {ps:?}")));
        }
        let sum: f64 = ps.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("cell probabilities sum to {sum}")));
        }
        Ok(Self { p11, p12, p21, p22 })
    }

    /// `p_ij = p_i+ · p_+j`
    pub fn independent(p_row: f64, p_col: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_row) || !(0.0..=1.0).contains(&p_col) {
            return Err(Error::InvalidModel(format!("marginal probabilities {p_row}, {p_col}")));
        }
        let (q_row, q_col) = (1.0 - p_row, 1.0 - p_col);
        Self::new(p_row * p_col, p_row * q_col, q_row * p_col, q_row * q_col)
    }

    pub fn is_independent(&self) -> bool {
        let p_row = self.p11 + self.p12;
        let p_col = self.p11 + self.p21;
        (self.p11 - p_row * p_col).abs() <= 1e-12
    }
}

fn conditional(p: f64, rest: f64) -> f64 {
    if rest <= 0.0 {
        0.0
    } else {
        (p / rest).clamp(0.0, 1.0)
    }
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
}

/// One table with `n_total` multinomial draws, as a chain of conditional
/// binomials.
pub fn sample_table<R: Rng + ?Sized>(
    model: &MultinomialModel,
    n_total: u64,
    rng: &mut R,
) -> Result<ContingencyTable2x2> {
    let n11 = binomial(n_total, model.p11, rng);
    let left = n_total - n11;
    let n12 = binomial(left, conditional(model.p12, 1.0 - model.p11), rng);
    let left = left - n12;
    let n21 = binomial(left, conditional(model.p21, model.p21 + model.p22), rng);
    ContingencyTable2x2::new(n11, n12, n21, left - n21)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCalibration {
    /// Trials where the test produced a p-value.
    pub evaluated: u64,
    pub skipped: u64,
    /// Count of `p ≤ α`, aligned with the report's `alphas`.
    pub rejections: Vec<u64>,
    pub rejection_rates: Vec<f64>,
    pub mean_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub rng: String,
    pub seed: u64,
    pub trials: u64,
    pub n_total: u64,
    pub model: MultinomialModel,
    pub alphas: Vec<f64>,
    /// Sampled tables with a zero marginal.
    pub degenerate_trials: u64,
    pub tests: BTreeMap<String, TestCalibration>,
}

pub const CALIBRATED_TESTS: [&str; 6] =
    ["fisher_left", "fisher_right", "fisher_two_sided", "pearson_x2", "g2", "t_test"];

#[derive(Clone)]
struct Tally {
    evaluated: u64,
    skipped: u64,
    rejections: Vec<u64>,
    p_sum: f64,
}

impl Tally {
    fn new(alphas: usize) -> Self {
        Self { evaluated: 0, skipped: 0, rejections: vec![0; alphas], p_sum: 0.0 }
    }

    fn record(&mut self, p: Option<f64>, alphas: &[f64]) {
        let Some(p) = p else {
            self.skipped += 1;
            return;
        };
        self.evaluated += 1;
        self.p_sum += p;
        for (hits, &a) in self.rejections.iter_mut().zip(alphas) {
            if p <= a {
                *hits += 1;
            }
        }
    }

    fn absorb(&mut self, other: &Tally) {
        self.evaluated += other.evaluated;
        self.skipped += other.skipped;
        self.p_sum += other.p_sum;
        for (a, b) in self.rejections.iter_mut().zip(&other.rejections) {
            *a += b;
        }
    }
}

fn run_chunk(
    model: &MultinomialModel,
    n_total: u64,
    trials: u64,
    alphas: &[f64],
    seed: u64,
    stream: u64,
) -> Result<(u64, Vec<Tally>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut tallies = vec![Tally::new(alphas.len()); CALIBRATED_TESTS.len()];
    let mut degenerate = 0;
    for _ in 0..trials {
        let table = sample_table(model, n_total, &mut rng)?;
        let fisher = fisher_exact::<f64>(&table);
        if table.has_zero_marginal() {
            degenerate += 1;
        }
        let ok = |r: Result<crate::asymptotic::TestResult>| r.ok().map(|r| r.p_value);
        let ps = [
            Some(fisher.left_p),
            Some(fisher.right_p),
            Some(fisher.two_sided_p),
            ok(pearson_x2(&table)),
            ok(likelihood_g2(&table)),
            if table.has_zero_marginal() { None } else { ok(t_test(&table)) },
        ];
        for (tally, p) in tallies.iter_mut().zip(ps) {
            tally.record(p, alphas);
        }
    }
    Ok((degenerate, tallies))
}

/// Sample `trials` tables from `model` and tabulate how often each test
/// rejects at each `alpha`.
pub fn calibration(
    model: &MultinomialModel,
    n_total: u64,
    trials: u64,
    alphas: &[f64],
    seed: u64,
) -> Result<CalibrationReport> {
    if trials == 0 {
        return Err(Error::Domain("calibration needs at least one trial".into()));
    }
    if n_total == 0 {
        return Err(Error::EmptyTable);
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::Domain(format!("alpha {a} outside [0, 1]")));
    }
    let per = trials / STREAMS;
    let extra = trials % STREAMS;
    let chunks: Vec<(u64, Vec<Tally>)> = (0..STREAMS)
        .into_par_iter()
        .map(|s| run_chunk(model, n_total, per + u64::from(s < extra), alphas, seed, s))
        .collect::<Result<_>>()?;

    let mut degenerate = 0;
    let mut totals = vec![Tally::new(alphas.len()); CALIBRATED_TESTS.len()];
    for (d, tallies) in &chunks {
        degenerate += d;
        for (t, c) in totals.iter_mut().zip(tallies) {
            t.absorb(c);
        }
    }
    let tests = CALIBRATED_TESTS
        .iter()
        .zip(totals)
        .map(|(name, t)| {
            let denom = t.evaluated.max(1) as f64;
            let cal = TestCalibration {
                evaluated: t.evaluated,
                skipped: t.skipped,
                rejection_rates: t.rejections.iter().map(|&r| r as f64 / denom).collect(),
                rejections: t.rejections,
                mean_p: if t.evaluated == 0 { 0.0 } else { t.p_sum / denom },
            };
            (name.to_string(), cal)
        })
        .collect();
    Ok(CalibrationReport {
        rng: RNG_ALGORITHM.to_string(),
        seed,
        trials,
        n_total,
        model: *model,
        alphas: alphas.to_vec(),
        degenerate_trials: degenerate,
        tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_validation() {
        assert!(MultinomialModel::new(0.5, 0.5, 0.0, 0.0).is_ok());
        assert!(MultinomialModel::new(0.5, 0.6, 0.0, 0.0).is_err());
        assert!(MultinomialModel::new(-0.1, 0.6, 0.5, 0.0).is_err());
        let m = MultinomialModel::independent(0.3, 0.6).unwrap();
        assert!((m.p11 - 0.18).abs() < 1e-15);
        assert!(m.is_independent());
        assert!(!MultinomialModel::new(0.5, 0.0, 0.0, 0.5).unwrap().is_independent());
    }

    #[test]
    fn point_mass() {
        let m = MultinomialModel::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            assert_eq!(sample_table(&m, 50, &mut rng).unwrap().cells(), [50, 0, 0, 0]);
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let m = MultinomialModel::independent(0.3, 0.4).unwrap();
        let a = sample_table(&m, 1000, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = sample_table(&m, 1000, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 1000);
    }

    #[test]
    fn mean_n11_balanced() {
        let m = MultinomialModel::independent(0.5, 0.5).unwrap();
        let mean: f64 = (0..1000u64)
            .map(|s| sample_table(&m, 10_000, &mut ChaCha8Rng::seed_from_u64(s)).unwrap().n11() as f64)
            .sum::<f64>()
            / 1000.0;
        assert!((mean - 2500.0).abs() <= 50.0, "mean {mean}");
    }

    #[test]
    fn cell_means_within_three_se() {
        let m = MultinomialModel::new(0.1, 0.2, 0.3, 0.4).unwrap();
        let n = 200u64;
        let trials = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sums = [0u64; 4];
        for _ in 0..trials {
            let t = sample_table(&m, n, &mut rng).unwrap();
            for (s, c) in sums.iter_mut().zip(t.cells()) {
                *s += c;
            }
        }
        for (s, p) in sums.iter().zip([m.p11, m.p12, m.p21, m.p22]) {
            let est = *s as f64 / (n * trials) as f64;
            let se = (p * (1.0 - p) / (n * trials) as f64).sqrt();
            assert!((est - p).abs() <= 3.0 * se, "{est} vs {p}");
        }
    }

    #[test]
    fn forced_degenerate_bookkeeping() {
        let m = MultinomialModel::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let r = calibration(&m, 10, 1, &[0.05], 1).unwrap();
        assert_eq!(r.degenerate_trials, 1);
        assert_eq!(r.tests["pearson_x2"].skipped, 1);
        assert_eq!(r.tests["fisher_left"].evaluated, 1);
        assert_eq!(r.tests["fisher_left"].rejections, vec![0]);
    }

    #[test]
    fn report_is_deterministic() {
        let m = MultinomialModel::independent(0.1, 0.2).unwrap();
        let a = calibration(&m, 300, 500, &[0.01, 0.05], 9).unwrap();
        let b = calibration(&m, 300, 500, &[0.01, 0.05], 9).unwrap();
        assert_eq!(a, b);
        let c = calibration(&m, 300, 500, &[0.01, 0.05], 10).unwrap();
        assert_ne!(a, c);
        for t in a.tests.values() {
            assert_eq!(t.evaluated + t.skipped, 500);
            assert!(t.rejection_rates.iter().all(|r| (0.0..=1.0).contains(r)));
        }
    }

    #[test]
    fn argument_checks() {
        let m = MultinomialModel::independent(0.1, 0.2).unwrap();
        assert!(calibration(&m, 10, 0, &[0.05], 1).is_err());
        assert!(calibration(&m, 0, 10, &[0.05], 1).is_err());
        assert!(calibration(&m, 10, 10, &[1.5], 1).is_err());
    }
}
