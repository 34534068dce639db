//! Generative model of the crowd: abilities, ground truth and the ternary
//! response matrix, including spammer behavior and gold questions.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{binomial, powu};

/// Shape of one classification task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskSpec {
    num_classes: u64,
    num_microtasks: usize,
    num_gold: usize,
}

impl TaskSpec {
    /// Task for `num_classes` classes, encoded with `ceil(log2 M)` microtasks.
    pub fn from_classes(num_classes: u64, num_gold: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidTask("need at least two classes"));
        }
        let num_microtasks = (u64::BITS - (num_classes - 1).leading_zeros()) as usize;
        Ok(Self { num_classes, num_microtasks, num_gold })
    }

    /// Task with `N` microtasks and `M = 2^N` classes.
    pub fn from_microtasks(num_microtasks: usize, num_gold: usize) -> Result<Self> {
        if num_microtasks == 0 || num_microtasks > 63 {
            return Err(Error::InvalidTask("microtask count must be in 1..=63"));
        }
        Ok(Self { num_classes: 1 << num_microtasks, num_microtasks, num_gold })
    }

    pub fn num_classes(&self) -> u64 {
        self.num_classes
    }

    pub fn num_microtasks(&self) -> usize {
        self.num_microtasks
    }

    pub fn num_gold(&self) -> usize {
        self.num_gold
    }

    /// Questions every worker sees: `N + G`.
    pub fn total_questions(&self) -> usize {
        self.num_microtasks + self.num_gold
    }
}

/// Distribution of a per-question probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform { low: f64, high: f64 },
    PointMass(f64),
}

impl Distribution {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        let d = Self::Uniform { low, high };
        d.validate()?;
        Ok(d)
    }

    pub fn point(value: f64) -> Result<Self> {
        let d = Self::PointMass(value);
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        match *self {
            Self::Uniform { low, high } => {
                if !in_unit(low) || !in_unit(high) {
                    Err(Error::InvalidDistribution("uniform bounds must lie in [0, 1]"))
                } else if low > high {
                    Err(Error::InvalidDistribution("uniform lower bound exceeds upper bound"))
                } else {
                    Ok(())
                }
            }
            Self::PointMass(v) if !in_unit(v) => Err(Error::InvalidDistribution("point mass must lie in [0, 1]")),
            Self::PointMass(_) => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { low, high } => 0.5 * (low + high),
            Self::PointMass(v) => v,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Self::PointMass(v) => v,
        }
    }
}

/// Skip-probability and correctness-probability distributions of honest workers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbilityDistributions {
    pub skip: Distribution,
    pub correctness: Distribution,
}

impl AbilityDistributions {
    pub fn new(skip: Distribution, correctness: Distribution) -> Result<Self> {
        skip.validate()?;
        correctness.validate()?;
        Ok(Self { skip, correctness })
    }

    /// Mean skip probability `m`.
    pub fn mean_skip(&self) -> f64 {
        self.skip.mean()
    }

    /// Mean correctness `mu`.
    pub fn mean_correctness(&self) -> f64 {
        self.correctness.mean()
    }
}

/// Whether abilities are drawn once per (worker, question) or once per worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    #[default]
    PerQuestion,
    PerWorker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorkerKind {
    Honest,
    SpammerSkipAll,
    SpammerAnswerAll,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerProfile {
    /// Skip probability for each of the `N + G` questions.
    pub skip_prob: Vec<f64>,
    /// Probability a definitive answer is correct, per question.
    pub correct_prob: Vec<f64>,
    pub kind: WorkerKind,
}

impl WorkerProfile {
    /// Honest worker with the same `p` and `rho` on every question.
    pub fn point_mass(questions: usize, skip: f64, correct: f64) -> Self {
        Self { skip_prob: vec![skip; questions], correct_prob: vec![correct; questions], kind: WorkerKind::Honest }
    }

    pub fn skip_all(questions: usize) -> Self {
        Self { skip_prob: vec![1.0; questions], correct_prob: vec![0.5; questions], kind: WorkerKind::SpammerSkipAll }
    }

    pub fn answer_all(questions: usize) -> Self {
        Self { skip_prob: vec![0.0; questions], correct_prob: vec![0.5; questions], kind: WorkerKind::SpammerAnswerAll }
    }

    pub fn questions(&self) -> usize {
        self.skip_prob.len()
    }
}

/// Number of workers of each kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CrowdCounts {
    pub honest: usize,
    pub skip_all: usize,
    pub answer_all: usize,
}

impl CrowdCounts {
    /// Crowd of `workers` with `skip_all` and `answer_all` spammers.
    pub fn with_spammers(workers: usize, skip_all: usize, answer_all: usize) -> Result<Self> {
        let spammers = skip_all.checked_add(answer_all).filter(|&s| s <= workers);
        match spammers {
            Some(s) => Ok(Self { honest: workers - s, skip_all, answer_all }),
            None => Err(Error::InvalidParameter("more spammers than workers")),
        }
    }

    /// Crowd size `W`.
    pub fn total(&self) -> usize {
        self.honest + self.skip_all + self.answer_all
    }

    /// Total spammers `M`.
    pub fn spammers(&self) -> usize {
        self.skip_all + self.answer_all
    }
}

/// Samples one profile per worker: honest workers first, then skip-all
/// spammers, then answer-all spammers.
pub fn sample_crowd<R: Rng + ?Sized>(
    spec: &TaskSpec,
    dists: &AbilityDistributions,
    counts: CrowdCounts,
    mode: SamplingMode,
    rng: &mut R,
) -> Result<Vec<WorkerProfile>> {
    if counts.total() == 0 {
        return Err(Error::EmptyCrowd);
    }
    dists.skip.validate()?;
    dists.correctness.validate()?;
    let q = spec.total_questions();
    let mut profiles = Vec::with_capacity(counts.total());
    for _ in 0..counts.honest {
        let (skip_prob, correct_prob) = match mode {
            SamplingMode::PerQuestion => {
                let skip = (0..q).map(|_| dists.skip.sample(rng)).collect();
                let correct = (0..q).map(|_| dists.correctness.sample(rng)).collect();
                (skip, correct)
            }
            SamplingMode::PerWorker => {
                let p = dists.skip.sample(rng);
                let rho = dists.correctness.sample(rng);
                (vec![p; q], vec![rho; q])
            }
        };
        profiles.push(WorkerProfile { skip_prob, correct_prob, kind: WorkerKind::Honest });
    }
    profiles.extend((0..counts.skip_all).map(|_| WorkerProfile::skip_all(q)));
    profiles.extend((0..counts.answer_all).map(|_| WorkerProfile::answer_all(q)));
    Ok(profiles)
}

/// Hidden true answers: `N` task bits followed by `G` gold bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthWord {
    pub bits: Vec<bool>,
    pub gold_bits: Vec<bool>,
}

impl TruthWord {
    /// Class index with the first task bit as the most significant.
    pub fn class_index(&self) -> u64 {
        bits_to_index(&self.bits)
    }

    fn question(&self, i: usize) -> bool {
        if i < self.bits.len() {
            self.bits[i]
        } else {
            self.gold_bits[i - self.bits.len()]
        }
    }
}

pub(crate) fn bits_to_index(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

pub fn sample_truth<R: Rng + ?Sized>(spec: &TaskSpec, rng: &mut R) -> TruthWord {
    let bits = (0..spec.num_microtasks()).map(|_| rng.random::<bool>()).collect();
    let gold_bits = (0..spec.num_gold()).map(|_| rng.random::<bool>()).collect();
    TruthWord { bits, gold_bits }
}

/// One worker's response to one question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Zero,
    One,
    Skip,
}

impl Answer {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Self::One
        } else {
            Self::Zero
        }
    }

    /// `Some(bit)` for a definitive answer.
    pub fn bit(self) -> Option<bool> {
        match self {
            Self::Zero => Some(false),
            Self::One => Some(true),
            Self::Skip => None,
        }
    }

    pub fn is_definitive(self) -> bool {
        self != Self::Skip
    }
}

/// `W x (N + G)` grid of answers. Columns `0..N` are the task microtasks and
/// `N..N+G` the gold questions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseMatrix {
    answers: Vec<Answer>,
    workers: usize,
    task_questions: usize,
    gold_questions: usize,
    worker_kinds: Vec<WorkerKind>,
}

impl ResponseMatrix {
    /// Builds a matrix from rows; every row needs `task + gold` entries.
    /// Workers built this way are labelled honest.
    pub fn from_rows(rows: &[Vec<Answer>], task_questions: usize, gold_questions: usize) -> Result<Self> {
        let width = task_questions + gold_questions;
        if task_questions == 0 {
            return Err(Error::ShapeMismatch("no task questions"));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::ShapeMismatch("row length differs from N + G"));
        }
        Ok(Self {
            answers: rows.iter().flatten().copied().collect(),
            workers: rows.len(),
            task_questions,
            gold_questions,
            worker_kinds: vec![WorkerKind::Honest; rows.len()],
        })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn task_questions(&self) -> usize {
        self.task_questions
    }

    pub fn gold_questions(&self) -> usize {
        self.gold_questions
    }

    pub fn total_questions(&self) -> usize {
        self.task_questions + self.gold_questions
    }

    /// Columns holding gold questions.
    pub fn gold_positions(&self) -> core::ops::Range<usize> {
        self.task_questions..self.total_questions()
    }

    pub fn row(&self, worker: usize) -> &[Answer] {
        let q = self.total_questions();
        &self.answers[worker * q..(worker + 1) * q]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Answer]> {
        self.answers.chunks_exact(self.total_questions().max(1)).take(self.workers)
    }

    pub fn get(&self, worker: usize, question: usize) -> Answer {
        self.row(worker)[question]
    }

    /// Hidden worker labels. For evaluation only; aggregation and
    /// estimation never read them.
    pub fn worker_kinds(&self) -> &[WorkerKind] {
        &self.worker_kinds
    }

    /// Order-sensitive FNV-1a digest of the answers, used to check that
    /// paired comparisons see the same matrix.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for a in &self.answers {
            h ^= *a as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Draws every worker's answers given the hidden truth.
///
/// Skip decisions are drawn before, and independently of, the true bit.
pub fn generate_responses<R: Rng + ?Sized>(
    profiles: &[WorkerProfile],
    truth: &TruthWord,
    spec: &TaskSpec,
    rng: &mut R,
) -> Result<ResponseMatrix> {
    if profiles.is_empty() {
        return Err(Error::EmptyCrowd);
    }
    let q = spec.total_questions();
    if truth.bits.len() != spec.num_microtasks() || truth.gold_bits.len() != spec.num_gold() {
        return Err(Error::ShapeMismatch("truth word does not match task"));
    }
    if profiles.iter().any(|p| p.skip_prob.len() != q || p.correct_prob.len() != q) {
        return Err(Error::ShapeMismatch("profile length differs from N + G"));
    }
    let mut answers = Vec::with_capacity(profiles.len() * q);
    for profile in profiles {
        for i in 0..q {
            let answer = match profile.kind {
                WorkerKind::SpammerSkipAll => Answer::Skip,
                WorkerKind::SpammerAnswerAll => Answer::from_bit(rng.random::<bool>()),
                WorkerKind::Honest => {
                    if rng.random::<f64>() < profile.skip_prob[i] {
                        Answer::Skip
                    } else {
                        let correct = rng.random::<f64>() < profile.correct_prob[i];
                        Answer::from_bit(truth.question(i) == correct)
                    }
                }
            };
            answers.push(answer);
        }
    }
    Ok(ResponseMatrix {
        answers,
        workers: profiles.len(),
        task_questions: spec.num_microtasks(),
        gold_questions: spec.num_gold(),
        worker_kinds: profiles.iter().map(|p| p.kind).collect(),
    })
}

/// Probability that a worker with mean skip rate `m` gives exactly `n`
/// definitive answers out of `total`: `C(total, n) (1-m)^n m^(total-n)`.
pub fn definitive_count_pmf(n: usize, total: usize, m: f64) -> Result<f64> {
    if n > total {
        return Err(Error::CountOutOfRange { n, max: total });
    }
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::InvalidParameter("skip probability outside [0, 1]"));
    }
    Ok(binomial(total as u64, n as u64) * powu(1.0 - m, n as u32) * powu(m, (total - n) as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn task_from_classes_rounds_up() {
        assert_eq!(TaskSpec::from_classes(8, 0).unwrap().num_microtasks(), 3);
        assert_eq!(TaskSpec::from_classes(5, 0).unwrap().num_microtasks(), 3);
        assert_eq!(TaskSpec::from_classes(2, 1).unwrap().num_microtasks(), 1);
        assert!(TaskSpec::from_classes(1, 0).is_err());
        let spec = TaskSpec::from_microtasks(3, 3).unwrap();
        assert_eq!((spec.num_classes(), spec.total_questions()), (8, 6));
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::uniform(0.6, 0.4).is_err());
        assert!(Distribution::uniform(-0.1, 0.4).is_err());
        assert!(Distribution::point(1.5).is_err());
        assert_eq!(Distribution::uniform(0.5, 1.0).unwrap().mean(), 0.75);
    }

    #[test]
    fn skip_all_spammers_are_forced() {
        let spec = TaskSpec::from_microtasks(3, 3).unwrap();
        let dists = AbilityDistributions::new(Distribution::uniform(0.0, 1.0).unwrap(), Distribution::uniform(0.5, 1.0).unwrap()).unwrap();
        let counts = CrowdCounts { honest: 0, skip_all: 3, answer_all: 0 };
        let crowd = sample_crowd(&spec, &dists, counts, SamplingMode::PerQuestion, &mut rng(1)).unwrap();
        assert_eq!(crowd.len(), 3);
        assert!(crowd.iter().all(|w| w.kind == WorkerKind::SpammerSkipAll && w.skip_prob.iter().all(|&p| p == 1.0)));
    }

    #[test]
    fn point_mass_profiles() {
        let spec = TaskSpec::from_microtasks(3, 3).unwrap();
        let dists = AbilityDistributions::new(Distribution::point(0.5).unwrap(), Distribution::point(0.75).unwrap()).unwrap();
        let counts = CrowdCounts { honest: 4, skip_all: 0, answer_all: 0 };
        for mode in [SamplingMode::PerQuestion, SamplingMode::PerWorker] {
            let crowd = sample_crowd(&spec, &dists, counts, mode, &mut rng(2)).unwrap();
            for w in &crowd {
                assert!(w.skip_prob.iter().all(|&p| p == 0.5));
                assert!(w.correct_prob.iter().all(|&r| r == 0.75));
            }
        }
    }

    #[test]
    fn empty_crowd_and_bad_distribution_rejected() {
        let spec = TaskSpec::from_microtasks(2, 0).unwrap();
        let dists = AbilityDistributions { skip: Distribution::PointMass(0.5), correctness: Distribution::PointMass(0.5) };
        assert_eq!(
            sample_crowd(&spec, &dists, CrowdCounts::default(), SamplingMode::PerQuestion, &mut rng(0)),
            Err(Error::EmptyCrowd)
        );
        let bad = AbilityDistributions { skip: Distribution::Uniform { low: 0.9, high: 0.1 }, ..dists };
        let counts = CrowdCounts { honest: 1, ..Default::default() };
        assert!(matches!(
            sample_crowd(&spec, &bad, counts, SamplingMode::PerQuestion, &mut rng(0)),
            Err(Error::InvalidDistribution(_))
        ));
    }

    #[test]
    fn uniform_skip_mean_law_of_large_numbers() {
        let spec = TaskSpec::from_microtasks(3, 3).unwrap();
        let dists = AbilityDistributions::new(Distribution::uniform(0.0, 1.0).unwrap(), Distribution::point(0.75).unwrap()).unwrap();
        let counts = CrowdCounts { honest: 100_000, skip_all: 0, answer_all: 0 };
        let crowd = sample_crowd(&spec, &dists, counts, SamplingMode::PerQuestion, &mut rng(3)).unwrap();
        let total: f64 = crowd.iter().flat_map(|w| w.skip_prob.iter()).sum();
        let mean = total / (100_000.0 * 6.0);
        assert!((mean - 0.5).abs() <= 0.01, "mean {mean}");
    }

    #[test]
    fn truth_shape_frequency_and_replay() {
        let spec = TaskSpec::from_microtasks(3, 3).unwrap();
        let t = sample_truth(&spec, &mut rng(9));
        assert_eq!((t.bits.len(), t.gold_bits.len()), (3, 3));
        assert_eq!(t, sample_truth(&spec, &mut rng(9)));

        let mut r = rng(10);
        let mut ones = [0usize; 6];
        for _ in 0..100_000 {
            let t = sample_truth(&spec, &mut r);
            for (i, b) in t.bits.iter().chain(t.gold_bits.iter()).enumerate() {
                ones[i] += *b as usize;
            }
        }
        for c in ones {
            let f = c as f64 / 100_000.0;
            assert!((0.49..=0.51).contains(&f), "frequency {f}");
        }
    }

    #[test]
    fn forced_rows() {
        let spec = TaskSpec::from_microtasks(3, 2).unwrap();
        let truth = TruthWord { bits: vec![true, false, true], gold_bits: vec![false, true] };
        let profiles = vec![WorkerProfile::skip_all(5), WorkerProfile::point_mass(5, 0.0, 1.0), WorkerProfile::answer_all(5)];
        let r = generate_responses(&profiles, &truth, &spec, &mut rng(4)).unwrap();
        assert!(r.row(0).iter().all(|&a| a == Answer::Skip));
        let expected: Vec<Answer> = truth.bits.iter().chain(&truth.gold_bits).map(|&b| Answer::from_bit(b)).collect();
        assert_eq!(r.row(1), &expected[..]);
        assert!(r.row(2).iter().all(|a| a.is_definitive()));
        assert_eq!(r.worker_kinds()[2], WorkerKind::SpammerAnswerAll);
        assert_eq!(r.gold_positions(), 3..5);
    }

    #[test]
    fn honest_skip_and_correctness_frequencies() {
        let spec = TaskSpec::from_microtasks(1, 0).unwrap();
        let truth = TruthWord { bits: vec![true], gold_bits: vec![] };
        let profiles = vec![WorkerProfile::point_mass(1, 0.5, 0.8); 100_000];
        let r = generate_responses(&profiles, &truth, &spec, &mut rng(5)).unwrap();
        let skips = r.rows().filter(|row| row[0] == Answer::Skip).count();
        let correct = r.rows().filter(|row| row[0] == Answer::One).count();
        let skip_frac = skips as f64 / 1e5;
        let acc = correct as f64 / (100_000 - skips) as f64;
        assert!((skip_frac - 0.5).abs() <= 0.01, "{skip_frac}");
        assert!((acc - 0.8).abs() <= 0.01, "{acc}");
    }

    #[test]
    fn pmf_values() {
        assert_eq!(definitive_count_pmf(0, 3, 1.0).unwrap(), 1.0);
        assert!((definitive_count_pmf(2, 3, 0.5).unwrap() - 0.375).abs() < 1e-15);
        for m in [0.0, 0.3, 0.5, 1.0] {
            let s: f64 = (0..=3).map(|n| definitive_count_pmf(n, 3, m).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(definitive_count_pmf(4, 3, 0.5), Err(Error::CountOutOfRange { n: 4, max: 3 }));
    }
}
