//! Weight schemes and per-bit weighted-majority fusion.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{powu, tolerant_cmp};
use crate::model::{bits_to_index, ResponseMatrix};

/// Lower and upper clamp applied to the mean skip probability.
pub const SKIP_CLAMP: (f64, f64) = (1e-6, 1.0 - 1e-6);
/// Lower and upper clamp applied to the mean correctness.
pub const CORRECTNESS_CLAMP: (f64, f64) = (0.5, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// Spammer-aware optimal weights.
    SpammerAware,
    /// Optimal weights for an honest crowd, `mu^-n`.
    HonestOptimal,
    /// Unit weights; skips are replaced by fair coin guesses.
    SimpleMajorityForced,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [Self::SpammerAware, Self::HonestOptimal, Self::SimpleMajorityForced];

    pub fn name(self) -> &'static str {
        match self {
            Self::SpammerAware => "spammer_aware",
            Self::HonestOptimal => "honest_optimal",
            Self::SimpleMajorityForced => "simple_majority_forced",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Which columns count toward a worker's definitive-answer count `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Counting {
    /// The `N` task microtasks only.
    TaskOnly,
    /// All `N + G` questions, gold included.
    TaskPlusGold,
}

impl Counting {
    pub fn name(self) -> &'static str {
        match self {
            Self::TaskOnly => "task_only",
            Self::TaskPlusGold => "task_plus_gold",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::TaskOnly, Self::TaskPlusGold].into_iter().find(|c| c.name() == name)
    }

    pub fn columns(self, responses: &ResponseMatrix) -> usize {
        match self {
            Self::TaskOnly => responses.task_questions(),
            Self::TaskPlusGold => responses.total_questions(),
        }
    }
}

/// Crowd parameters a weight scheme needs. They may be ground truth or
/// estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    /// Crowd size `W`.
    pub crowd_size: usize,
    /// Total spammers `M`.
    pub spammers: usize,
    /// Answer-all spammers `M_A`.
    pub answer_all: usize,
    /// Mean correctness `mu`.
    pub mu: f64,
    /// Mean skip probability `m`.
    pub m: f64,
    /// Number of questions `n` ranges over; the exponent in the spammer term.
    pub questions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightScheme {
    kind: SchemeKind,
    params: WeightParams,
    counting: Counting,
}

impl WeightScheme {
    /// Validates `params` and clamps `mu` to [`CORRECTNESS_CLAMP`] and `m`
    /// to [`SKIP_CLAMP`].
    pub fn new(kind: SchemeKind, params: WeightParams, counting: Counting) -> Result<Self> {
        if !params.mu.is_finite() || !(0.0..=1.0).contains(&params.mu) {
            return Err(Error::InvalidParameter("mu outside [0, 1]"));
        }
        if !params.m.is_finite() || !(0.0..=1.0).contains(&params.m) {
            return Err(Error::InvalidParameter("m outside [0, 1]"));
        }
        if params.spammers > params.crowd_size {
            return Err(Error::InvalidParameter("more spammers than workers"));
        }
        if params.answer_all > params.spammers {
            return Err(Error::InvalidParameter("answer-all spammers exceed total spammers"));
        }
        if params.questions == 0 || params.questions > i32::MAX as usize {
            return Err(Error::InvalidParameter("question count must be positive"));
        }
        let params = WeightParams {
            mu: params.mu.clamp(CORRECTNESS_CLAMP.0, CORRECTNESS_CLAMP.1),
            m: params.m.clamp(SKIP_CLAMP.0, SKIP_CLAMP.1),
            ..params
        };
        Ok(Self { kind, params, counting })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    /// Parameters after clamping.
    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn counting(&self) -> Counting {
        self.counting
    }
}

/// Weight of a worker who gave `n` definitive answers.
///
/// Zero-answer workers get weight zero under every scheme except
/// [`SchemeKind::SimpleMajorityForced`], where every weight is one.
pub fn compute_weight(scheme: &WeightScheme, n: usize) -> Result<f64> {
    let p = &scheme.params;
    if n > p.questions {
        return Err(Error::CountOutOfRange { n, max: p.questions });
    }
    match scheme.kind {
        SchemeKind::SimpleMajorityForced => Ok(1.0),
        _ if n == 0 => Ok(0.0),
        SchemeKind::HonestOptimal => Ok(1.0 / powu(p.mu, n as u32)),
        SchemeKind::SpammerAware => {
            let honest = (p.crowd_size - p.spammers) as f64;
            let mut denom = honest * powu(p.mu, n as u32);
            if n == p.questions && p.answer_all > 0 {
                let q = p.questions as i32;
                denom += p.answer_all as f64 / (libm::pow(2.0, q as f64) * libm::pow(1.0 - p.m, q as f64));
            }
            if denom > 0.0 {
                Ok(1.0 / denom)
            } else {
                Err(Error::UndefinedWeight { n })
            }
        }
    }
}

/// Accumulated weight behind each answer for one bit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BitTally {
    pub weight_for_one: f64,
    pub weight_for_zero: f64,
}

impl BitTally {
    pub fn add(&mut self, bit: bool, weight: f64) {
        if bit {
            self.weight_for_one += weight;
        } else {
            self.weight_for_zero += weight;
        }
    }
}

/// Weighted-majority decision for one bit. Ties (equal up to
/// [`crate::math::TIE_RELATIVE_TOLERANCE`]) go to a fair coin and set the
/// returned flag.
pub fn decide_bit<R: Rng + ?Sized>(tally: BitTally, rng: &mut R) -> (bool, bool) {
    match tolerant_cmp(tally.weight_for_one, tally.weight_for_zero) {
        Ordering::Greater => (true, false),
        Ordering::Less => (false, false),
        Ordering::Equal => (rng.random::<bool>(), true),
    }
}

/// Fused classification of the `N` task bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub bits: Vec<bool>,
    /// Base-2 value of `bits`, first bit most significant.
    pub class_index: u64,
    pub tie_flags: Vec<bool>,
}

/// Definitive answers of worker `w` over the columns selected by `counting`.
pub fn n_of(responses: &ResponseMatrix, w: usize, counting: Counting) -> usize {
    responses.row(w)[..counting.columns(responses)].iter().filter(|a| a.is_definitive()).count()
}

/// Per-worker weights under `scheme`.
pub fn worker_weights(responses: &ResponseMatrix, scheme: &WeightScheme) -> Result<Vec<f64>> {
    if scheme.kind != SchemeKind::SimpleMajorityForced {
        if scheme.counting.columns(responses) != scheme.params.questions {
            return Err(Error::ShapeMismatch("scheme question count differs from counted columns"));
        }
        if scheme.kind == SchemeKind::SpammerAware && scheme.params.crowd_size != responses.workers() {
            return Err(Error::ShapeMismatch("scheme crowd size differs from response matrix"));
        }
    }
    (0..responses.workers()).map(|w| compute_weight(scheme, n_of(responses, w, scheme.counting))).collect()
}

/// Weighted-majority fusion of every task bit.
///
/// Skipped answers contribute nothing, except under
/// [`SchemeKind::SimpleMajorityForced`] where each skip is first replaced by
/// a fair coin guess.
pub fn classify<R: Rng + ?Sized>(responses: &ResponseMatrix, scheme: &WeightScheme, rng: &mut R) -> Result<Decision> {
    if responses.workers() == 0 {
        return Err(Error::EmptyCrowd);
    }
    let weights = worker_weights(responses, scheme)?;
    let forced = scheme.kind == SchemeKind::SimpleMajorityForced;
    let n_bits = responses.task_questions();
    let mut bits = Vec::with_capacity(n_bits);
    let mut tie_flags = Vec::with_capacity(n_bits);
    for i in 0..n_bits {
        let mut tally = BitTally::default();
        for (w, &weight) in weights.iter().enumerate() {
            match responses.get(w, i).bit() {
                Some(bit) => tally.add(bit, weight),
                None if forced => tally.add(rng.random::<bool>(), weight),
                None => {}
            }
        }
        let (bit, tie) = decide_bit(tally, rng);
        bits.push(bit);
        tie_flags.push(tie);
    }
    Ok(Decision { class_index: bits_to_index(&bits), bits, tie_flags })
}
