//! Manager-side estimates of the crowd parameters from observed responses.
//!
//! Everything here reads only the answer grid and the gold truth. Workers
//! who answered every question, or skipped every question, are excluded
//! from the skip-rate and correctness estimates because that is exactly how
//! the two spammer kinds present themselves.

use alloc::vec::Vec;

use crate::aggregation::WeightParams;
use crate::error::{Error, Result};
use crate::math::{xlogy, LnFactorials};
use crate::model::{Answer, ResponseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MuMethod {
    /// Accuracy on gold questions.
    TrainingBased,
    /// Agreement with per-bit simple-majority pseudo-labels.
    MajorityBased,
}

impl MuMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::TrainingBased => "training",
            Self::MajorityBased => "majority",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::TrainingBased, Self::MajorityBased].into_iter().find(|m| m.name() == name)
    }
}

/// Estimated crowd parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrowdEstimates {
    pub m_hat: f64,
    pub mu_hat: f64,
    pub answer_all_hat: usize,
    pub skip_all_hat: usize,
    pub mu_method: MuMethod,
}

impl CrowdEstimates {
    /// Parameters for a weight scheme over a crowd of `crowd_size` workers.
    pub fn weight_params(&self, crowd_size: usize, questions: usize) -> WeightParams {
        WeightParams {
            crowd_size,
            spammers: self.answer_all_hat + self.skip_all_hat,
            answer_all: self.answer_all_hat,
            mu: self.mu_hat,
            m: self.m_hat,
            questions,
        }
    }
}

/// Counts of workers who answered everything (`W_{N+G}`) and who skipped
/// everything (`W_0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservedCensus {
    pub all_definitive: usize,
    pub all_skip: usize,
    pub workers: usize,
}

pub fn census(responses: &ResponseMatrix) -> ObservedCensus {
    let q = responses.total_questions();
    let mut c = ObservedCensus { all_definitive: 0, all_skip: 0, workers: responses.workers() };
    for row in responses.rows() {
        match definitive(row) {
            0 => c.all_skip += 1,
            n if n == q => c.all_definitive += 1,
            _ => {}
        }
    }
    c
}

fn definitive(row: &[Answer]) -> usize {
    row.iter().filter(|a| a.is_definitive()).count()
}

fn retained(responses: &ResponseMatrix) -> impl Iterator<Item = &[Answer]> {
    let q = responses.total_questions();
    responses.rows().filter(move |row| {
        let n = definitive(row);
        n >= 1 && n < q
    })
}

/// Fraction of skipped questions among retained workers, over all `N + G`
/// questions.
pub fn estimate_m(responses: &ResponseMatrix) -> Result<f64> {
    let (mut workers, mut skips) = (0usize, 0usize);
    for row in retained(responses) {
        workers += 1;
        skips += row.len() - definitive(row);
    }
    if workers == 0 {
        return Err(Error::EstimationImpossible("no worker both answered and skipped"));
    }
    Ok(skips as f64 / (workers * responses.total_questions()) as f64)
}

fn clamp_mu(mu: f64) -> f64 {
    mu.clamp(0.5, 1.0)
}

/// Accuracy of retained workers' definitive gold answers, clamped to `[0.5, 1]`.
pub fn estimate_mu_training(responses: &ResponseMatrix, gold_truth: &[bool]) -> Result<f64> {
    if responses.gold_questions() == 0 {
        return Err(Error::EstimationImpossible("no gold questions"));
    }
    if gold_truth.len() != responses.gold_questions() {
        return Err(Error::ShapeMismatch("gold truth length differs from gold column count"));
    }
    let gold = responses.gold_positions();
    let (mut answered, mut correct) = (0usize, 0usize);
    for row in retained(responses) {
        for (answer, &truth) in row[gold.clone()].iter().zip(gold_truth) {
            if let Some(bit) = answer.bit() {
                answered += 1;
                correct += (bit == truth) as usize;
            }
        }
    }
    if answered == 0 {
        return Err(Error::EstimationImpossible("no definitive gold answers among retained workers"));
    }
    Ok(clamp_mu(correct as f64 / answered as f64))
}

/// Agreement of retained workers' task answers with per-bit majority
/// pseudo-labels, clamped to `[0.5, 1]`. Tied bits are ignored.
pub fn estimate_mu_majority(responses: &ResponseMatrix) -> Result<f64> {
    let rows: Vec<&[Answer]> = retained(responses).collect();
    if rows.len() < 2 {
        return Err(Error::EstimationImpossible("majority estimate needs two retained workers"));
    }
    let (mut answered, mut agree) = (0usize, 0usize);
    for i in 0..responses.task_questions() {
        let ones = rows.iter().filter(|r| r[i] == Answer::One).count();
        let zeros = rows.iter().filter(|r| r[i] == Answer::Zero).count();
        if ones == zeros {
            continue;
        }
        answered += ones + zeros;
        agree += ones.max(zeros);
    }
    if answered == 0 {
        return Err(Error::EstimationImpossible("every task bit is tied"));
    }
    Ok(clamp_mu(agree as f64 / answered as f64))
}

/// Likelihood of the census given spammer counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LikelihoodModel {
    /// Product of two binomial laws: honest skip-all workers among the
    /// honest crowd, then honest answer-all workers among the rest.
    #[default]
    AsPrinted,
    /// Single trinomial law over honest skip-all / answer-all / mixed rows.
    Trinomial,
}

impl LikelihoodModel {
    pub fn name(self) -> &'static str {
        match self {
            Self::AsPrinted => "as_printed",
            Self::Trinomial => "trinomial",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::AsPrinted, Self::Trinomial].into_iter().find(|m| m.name() == name)
    }
}

/// Log-likelihood of a census over the grid of spammer counts.
#[derive(Debug, Clone)]
pub struct SpammerLikelihood {
    census: ObservedCensus,
    questions: usize,
    model: LikelihoodModel,
    ln_all_skip: f64,
    ln_not_all_skip: f64,
    ln_all_answer: f64,
    ln_not_all_answer: f64,
    p_mixed: f64,
    factorials: LnFactorials,
}

impl SpammerLikelihood {
    pub fn new(census: ObservedCensus, m_hat: f64, questions: usize, model: LikelihoodModel) -> Result<Self> {
        if !(m_hat > 0.0 && m_hat < 1.0) {
            return Err(Error::InvalidParameter("m_hat must lie in (0, 1)"));
        }
        if census.all_definitive + census.all_skip > census.workers {
            return Err(Error::InvalidParameter("census counts exceed crowd size"));
        }
        if questions == 0 {
            return Err(Error::InvalidParameter("no questions"));
        }
        let q = questions as f64;
        let ln_all_skip = q * libm::log(m_hat);
        let ln_all_answer = q * libm::log1p(-m_hat);
        let p_skip = libm::exp(ln_all_skip);
        let p_answer = libm::exp(ln_all_answer);
        Ok(Self {
            census,
            questions,
            model,
            ln_all_skip,
            ln_not_all_skip: libm::log1p(-p_skip),
            ln_all_answer,
            ln_not_all_answer: libm::log1p(-p_answer),
            p_mixed: libm::fmax(0.0, 1.0 - p_skip - p_answer),
            factorials: LnFactorials::new(census.workers),
        })
    }

    pub fn questions(&self) -> usize {
        self.questions
    }

    pub fn is_feasible(&self, answer_all: usize, skip_all: usize) -> bool {
        let c = &self.census;
        answer_all <= c.all_definitive && skip_all <= c.all_skip && answer_all + skip_all <= c.workers
    }

    /// Log-likelihood; `-inf` off the feasible grid.
    pub fn log_likelihood(&self, answer_all: usize, skip_all: usize) -> f64 {
        if !self.is_feasible(answer_all, skip_all) {
            return f64::NEG_INFINITY;
        }
        let c = &self.census;
        let honest = c.workers - answer_all - skip_all;
        let honest_skip_all = c.all_skip - skip_all;
        let honest_answer_all = c.all_definitive - answer_all;
        let mixed = c.workers - c.all_skip - c.all_definitive;
        let f = &self.factorials;
        match self.model {
            LikelihoodModel::AsPrinted => {
                let not_skip_all = c.workers - c.all_skip - answer_all;
                f.ln_binomial(honest, honest_skip_all)
                    + honest_skip_all as f64 * self.ln_all_skip
                    + not_skip_all as f64 * self.ln_not_all_skip
                    + f.ln_binomial(not_skip_all, honest_answer_all)
                    + honest_answer_all as f64 * self.ln_all_answer
                    + mixed as f64 * self.ln_not_all_answer
            }
            LikelihoodModel::Trinomial => {
                f.get(honest) - f.get(honest_skip_all) - f.get(honest_answer_all) - f.get(mixed)
                    + honest_skip_all as f64 * self.ln_all_skip
                    + honest_answer_all as f64 * self.ln_all_answer
                    + xlogy(mixed as f64, self.p_mixed)
            }
        }
    }

    /// Grid-search maximizer. Near-ties (within `1e-12` relative) resolve
    /// toward fewer spammers, then fewer answer-all spammers.
    pub fn argmax(&self) -> (usize, usize) {
        let c = &self.census;
        let mut best = (0, 0);
        let mut best_ll = self.log_likelihood(0, 0);
        for total in 1..=(c.all_definitive + c.all_skip) {
            let lo = total.saturating_sub(c.all_skip);
            for answer_all in lo..=total.min(c.all_definitive) {
                let ll = self.log_likelihood(answer_all, total - answer_all);
                let margin = 1e-12 * libm::fmax(1.0, libm::fabs(best_ll));
                if ll > best_ll + margin || (best_ll == f64::NEG_INFINITY && ll > best_ll) {
                    best = (answer_all, total - answer_all);
                    best_ll = ll;
                }
            }
        }
        best
    }
}

/// Log-likelihood of the census for `(answer_all, skip_all)` spammers under
/// the product-of-binomials model, with `N + G = task + gold` questions.
pub fn mle_likelihood(
    census: &ObservedCensus,
    answer_all: usize,
    skip_all: usize,
    m_hat: f64,
    task: usize,
    gold: usize,
) -> Result<f64> {
    Ok(SpammerLikelihood::new(*census, m_hat, task + gold, LikelihoodModel::AsPrinted)?.log_likelihood(answer_all, skip_all))
}

/// Maximum-likelihood `(answer_all, skip_all)` spammer counts.
pub fn mle_spammer_counts(census: &ObservedCensus, m_hat: f64, task: usize, gold: usize) -> Result<(usize, usize)> {
    Ok(SpammerLikelihood::new(*census, m_hat, task + gold, LikelihoodModel::AsPrinted)?.argmax())
}

/// Full estimation pipeline: skip rate, correctness, then spammer counts.
pub fn estimate_crowd(
    responses: &ResponseMatrix,
    gold_truth: &[bool],
    mu_method: MuMethod,
    model: LikelihoodModel,
) -> Result<CrowdEstimates> {
    let m_hat = estimate_m(responses)?;
    let mu_hat = match mu_method {
        MuMethod::TrainingBased => estimate_mu_training(responses, gold_truth)?,
        MuMethod::MajorityBased => estimate_mu_majority(responses)?,
    };
    let (answer_all_hat, skip_all_hat) =
        SpammerLikelihood::new(census(responses), m_hat, responses.total_questions(), model)?.argmax();
    Ok(CrowdEstimates { m_hat, mu_hat, answer_all_hat, skip_all_hat, mu_method })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Answer::{One, Skip, Zero};
    use alloc::vec;

    fn matrix(rows: Vec<Vec<Answer>>, n: usize, g: usize) -> ResponseMatrix {
        ResponseMatrix::from_rows(&rows, n, g).unwrap()
    }

    #[test]
    fn census_counts() {
        let full = matrix(vec![vec![One, Zero]; 3], 1, 1);
        assert_eq!(census(&full), ObservedCensus { all_definitive: 3, all_skip: 0, workers: 3 });
        let empty = matrix(vec![vec![Skip, Skip]; 3], 1, 1);
        assert_eq!(census(&empty).all_skip, 3);
        let mixed = matrix(
            vec![vec![One, One], vec![Zero, One], vec![Skip, Skip], vec![One, Skip], vec![Skip, Zero]],
            1,
            1,
        );
        assert_eq!(census(&mixed), ObservedCensus { all_definitive: 2, all_skip: 1, workers: 5 });
    }

    #[test]
    fn skip_ratio() {
        let r = matrix(
            vec![vec![One, Skip, One, One], vec![Skip, Skip, One, Zero], vec![Skip, Skip, Skip, One], vec![One; 4]],
            2,
            2,
        );
        assert_eq!(estimate_m(&r).unwrap(), 0.5);
        let single = matrix(vec![vec![Skip, One, One, One]], 2, 2);
        assert_eq!(estimate_m(&single).unwrap(), 0.25);
        let degenerate = matrix(vec![vec![One; 4], vec![Skip; 4]], 2, 2);
        assert!(matches!(estimate_m(&degenerate), Err(Error::EstimationImpossible(_))));
    }

    fn gold_rows(correct: usize, total: usize) -> ResponseMatrix {
        // One task column (skipped so every row is retained), one gold column, truth = One.
        let rows = (0..total).map(|i| vec![Skip, if i < correct { One } else { Zero }]).collect();
        matrix(rows, 1, 1)
    }

    #[test]
    fn training_accuracy() {
        assert_eq!(estimate_mu_training(&gold_rows(10, 10), &[true]).unwrap(), 1.0);
        assert!((estimate_mu_training(&gold_rows(8, 10), &[true]).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(estimate_mu_training(&gold_rows(4, 10), &[true]).unwrap(), 0.5);
        let no_gold = matrix(vec![vec![One, Skip]], 2, 0);
        assert!(estimate_mu_training(&no_gold, &[]).is_err());
        let skipped_gold = matrix(vec![vec![One, Skip]], 1, 1);
        assert!(matches!(estimate_mu_training(&skipped_gold, &[true]), Err(Error::EstimationImpossible(_))));
    }

    #[test]
    fn majority_agreement() {
        let unanimous = matrix(vec![vec![One, Zero, Skip]; 3], 2, 1);
        assert_eq!(estimate_mu_majority(&unanimous).unwrap(), 1.0);
        let two_to_one = matrix(vec![vec![One, Skip], vec![One, Skip], vec![Zero, Skip]], 1, 1);
        assert!((estimate_mu_majority(&two_to_one).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let tied = matrix(vec![vec![One, Skip], vec![Zero, Skip]], 1, 1);
        assert!(matches!(estimate_mu_majority(&tied), Err(Error::EstimationImpossible(_))));
    }

    #[test]
    fn likelihood_boundary_and_support() {
        let c = ObservedCensus { all_definitive: 3, all_skip: 2, workers: 10 };
        let ll = mle_likelihood(&c, 3, 2, 0.4, 2, 1).unwrap();
        assert!(ll.is_finite());
        assert_eq!(mle_likelihood(&c, 0, 3, 0.4, 2, 1).unwrap(), f64::NEG_INFINITY);
        assert_eq!(mle_likelihood(&c, 4, 0, 0.4, 2, 1).unwrap(), f64::NEG_INFINITY);
        assert!(mle_likelihood(&c, 0, 0, 1.0, 2, 1).is_err());
    }

    #[test]
    fn empty_census_estimates_no_spammers() {
        let c = ObservedCensus { all_definitive: 0, all_skip: 0, workers: 20 };
        assert_eq!(mle_spammer_counts(&c, 0.5, 3, 3).unwrap(), (0, 0));
    }
}
