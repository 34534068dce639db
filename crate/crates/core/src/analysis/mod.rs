//! Probability of correct classification `P_c`.
//!
//! Three independent routes are provided: an analytic enumeration over vote
//! configurations of a single reference bit ([`pc_analytic`]), an exhaustive
//! sum over every possible response grid of a small point-mass crowd
//! ([`pc_bruteforce`]) and Monte Carlo simulation ([`monte_carlo`]).

mod bruteforce;
pub mod monte_carlo;

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

pub use bruteforce::{pc_bruteforce, DEFAULT_BRUTEFORCE_CAP};
pub use monte_carlo::{pc_monte_carlo, simulate, ParamMode, SimulationSetup, SimulationSummary};

use crate::aggregation::{compute_weight, Counting, SchemeKind, WeightParams, WeightScheme};
use crate::error::{Error, Result};
use crate::math::{binomial, powu, tolerant_cmp, CompensatedSum, LnFactorials};

/// Default limit on the number of configurations [`pc_analytic`] visits.
pub const DEFAULT_ENUMERATION_CAP: u128 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PcMode {
    /// Analytic enumeration with the printed vote-difference expression.
    AsPrinted,
    /// Analytic enumeration with the exact classifier weights.
    ExactWeights,
    BruteForce,
    MonteCarlo,
}

impl PcMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::AsPrinted => "as_printed",
            Self::ExactWeights => "exact_weights",
            Self::BruteForce => "bruteforce",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcResult {
    /// Probability every task bit is classified correctly.
    pub value: f64,
    /// Probability a single bit is classified correctly.
    pub per_bit: f64,
    pub mode: PcMode,
    /// Standard error, Monte Carlo only.
    pub stderr: Option<f64>,
    /// Configurations or response grids visited, exact modes only.
    pub enumeration_size: Option<u128>,
    /// Exact all-bits-correct probability without assuming independence
    /// between bits, brute force only.
    pub joint: Option<f64>,
}

/// Crowd parameters for the analytic routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticParams {
    /// Crowd size `W`.
    pub workers: usize,
    /// Answer-all spammers `M_A`.
    pub answer_all: usize,
    /// Skip-all spammers `M_0`.
    pub skip_all: usize,
    /// Skip probability `m` of honest workers.
    pub m: f64,
    /// Correctness `mu` of honest workers.
    pub mu: f64,
    /// Task microtasks `N`.
    pub microtasks: usize,
}

impl AnalyticParams {
    pub fn validate(&self) -> Result<()> {
        if self.answer_all + self.skip_all > self.workers {
            return Err(Error::InvalidParameter("more spammers than workers"));
        }
        if !(0.0..=1.0).contains(&self.m) || !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidParameter("m and mu must lie in [0, 1]"));
        }
        if self.microtasks == 0 || self.microtasks > 63 {
            return Err(Error::InvalidParameter("microtask count must be in 1..=63"));
        }
        Ok(())
    }

    /// Honest workers `W - M`.
    pub fn honest(&self) -> usize {
        self.workers - self.answer_all - self.skip_all
    }

    /// Ground-truth spammer-aware scheme over the `N` task questions.
    pub fn spammer_aware_scheme(&self) -> Result<WeightScheme> {
        let params = WeightParams {
            crowd_size: self.workers,
            spammers: self.answer_all + self.skip_all,
            answer_all: self.answer_all,
            mu: self.mu,
            m: self.m,
            questions: self.microtasks,
        };
        WeightScheme::new(SchemeKind::SpammerAware, params, Counting::TaskOnly)
    }

    /// Probability an honest worker answers the reference bit and gives
    /// `n` definitive answers in total: `C(N-1, n-1) (1-m)^n m^(N-n)`.
    pub fn participation(&self, n: usize) -> f64 {
        let big_n = self.microtasks;
        binomial(big_n as u64 - 1, n as u64 - 1) * powu(1.0 - self.m, n as u32) * powu(self.m, (big_n - n) as u32)
    }
}

/// Vote profile for one reference bit.
///
/// `q[N + n]` for `n >= 1` counts honest workers with `n` definitive answers
/// who answered the bit correctly, `q[N - n]` those who answered it
/// incorrectly, and `q[N]` honest workers who skipped it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationQ {
    pub q: Vec<usize>,
    pub spammers_correct: usize,
    pub spammers_incorrect: usize,
}

impl ConfigurationQ {
    pub fn microtasks(&self) -> usize {
        self.q.len() / 2
    }

    /// `q_n` for `n` in `-N..=N`.
    pub fn at(&self, n: isize) -> usize {
        self.q[(self.microtasks() as isize + n) as usize]
    }

    pub fn validate(&self, params: &AnalyticParams) -> Result<()> {
        if self.q.len() != 2 * params.microtasks + 1 {
            return Err(Error::InvalidConfiguration("profile length must be 2N + 1"));
        }
        if self.q.iter().sum::<usize>() != params.honest() {
            return Err(Error::InvalidConfiguration("profile must sum to W - M"));
        }
        if self.spammers_correct + self.spammers_incorrect != params.answer_all {
            return Err(Error::InvalidConfiguration("spammer split must sum to M_A"));
        }
        Ok(())
    }

    /// Mirror image: correct and incorrect votes swapped.
    pub fn mirrored(&self) -> Self {
        let mut q = self.q.clone();
        q.reverse();
        Self { q, spammers_correct: self.spammers_incorrect, spammers_incorrect: self.spammers_correct }
    }
}

/// Probability factors of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigProbability {
    /// Honest-vote probability `F(Q)` for a fixed worker ordering.
    pub f: f64,
    /// `F'(Q)`: the same with correct and incorrect votes exchanged.
    pub f_prime: f64,
    /// `C(M_A, M_A') / 2^M_A`.
    pub spammer_prob: f64,
}

fn honest_vote_probability(q: &ConfigurationQ, params: &AnalyticParams, flip: bool) -> f64 {
    let big_n = params.microtasks as isize;
    let (right, wrong) = if flip { (1.0 - params.mu, params.mu) } else { (params.mu, 1.0 - params.mu) };
    let mut f = powu(params.m, q.at(0) as u32);
    for n in 1..=big_n {
        let (hit, miss) = (q.at(n) as u32, q.at(-n) as u32);
        f *= powu(wrong, miss) * powu(right, hit) * powu(params.participation(n as usize), hit + miss);
    }
    f
}

pub fn config_probability(q: &ConfigurationQ, params: &AnalyticParams) -> Result<ConfigProbability> {
    params.validate()?;
    q.validate(params)?;
    Ok(ConfigProbability {
        f: honest_vote_probability(q, params, false),
        f_prime: honest_vote_probability(q, params, true),
        spammer_prob: binomial(params.answer_all as u64, q.spammers_correct as u64)
            * libm::pow(0.5, params.answer_all as f64),
    })
}

/// Number of configurations: weak compositions of `W - M` into `2N + 1`
/// parts, times `M_A + 1` spammer splits.
pub fn enumeration_size(params: &AnalyticParams) -> u128 {
    let parts = 2 * params.microtasks as u128;
    let total = params.honest() as u128;
    let mut c: u128 = 1;
    for i in 1..=parts {
        c = c.saturating_mul(total + i) / i;
    }
    c.saturating_mul(params.answer_all as u128 + 1)
}

/// Calls `visit` on every weak composition of `total` into `parts.len()` parts.
fn for_each_composition(total: usize, parts: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    fn go(remaining: usize, idx: usize, parts: &mut [usize], visit: &mut impl FnMut(&[usize])) {
        if idx + 1 == parts.len() {
            parts[idx] = remaining;
            visit(parts);
            return;
        }
        for k in 0..=remaining {
            parts[idx] = k;
            go(remaining - k, idx + 1, parts, visit);
        }
    }
    go(total, 0, parts, visit);
}

/// Visits every configuration with its multinomial-weighted probabilities
/// `(P(Q), P(mirror Q))`.
fn enumerate(params: &AnalyticParams, cap: u128, mut visit: impl FnMut(&ConfigurationQ, f64, f64)) -> Result<u128> {
    params.validate()?;
    let size = enumeration_size(params);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let honest = params.honest();
    let ln_fact = LnFactorials::new(honest.max(params.answer_all));
    let mut config = ConfigurationQ { q: vec![0; 2 * params.microtasks + 1], spammers_correct: 0, spammers_incorrect: 0 };
    let mut parts = vec![0; config.q.len()];
    for_each_composition(honest, &mut parts, &mut |parts| {
        config.q.copy_from_slice(parts);
        let ln_coeff = ln_fact.get(honest) - parts.iter().map(|&k| ln_fact.get(k)).sum::<f64>();
        let coeff = libm::exp(ln_coeff);
        let f = honest_vote_probability(&config, params, false);
        let f_prime = honest_vote_probability(&config, params, true);
        for correct in 0..=params.answer_all {
            config.spammers_correct = correct;
            config.spammers_incorrect = params.answer_all - correct;
            let spam = libm::exp(ln_fact.ln_binomial(params.answer_all, correct)) * libm::pow(0.5, params.answer_all as f64);
            visit(&config, coeff * f * spam, coeff * f_prime * spam);
        }
    });
    Ok(size)
}

/// Sum of the probabilities of every configuration; one for a proper law.
pub fn total_configuration_mass(params: &AnalyticParams, cap: u128) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    enumerate(params, cap, |_, p, _| acc.add(p))?;
    Ok(acc.value())
}

/// Vote totals `(for the correct answer, for the wrong answer)` of a
/// configuration.
fn vote_totals(q: &ConfigurationQ, honest_weight: &[f64], spammer_weight: f64) -> (f64, f64) {
    let big_n = q.microtasks() as isize;
    let (mut plus, mut minus) = (0.0, 0.0);
    for n in 1..=big_n {
        let w = honest_weight[n as usize];
        if q.at(n) > 0 {
            plus += q.at(n) as f64 * w;
        }
        if q.at(-n) > 0 {
            minus += q.at(-n) as f64 * w;
        }
    }
    if q.spammers_correct > 0 {
        plus += q.spammers_correct as f64 * spammer_weight;
    }
    if q.spammers_incorrect > 0 {
        minus += q.spammers_incorrect as f64 * spammer_weight;
    }
    (plus, minus)
}

/// Analytic `P_c` by enumeration over configurations of one reference bit;
/// `value = per_bit^N`.
pub fn pc_analytic(params: &AnalyticParams, mode: PcMode, cap: u128) -> Result<PcResult> {
    params.validate()?;
    let scheme = params.spammer_aware_scheme()?;
    let big_n = params.microtasks;
    // Index 0 unused; honest weights only matter when some q_n is nonzero,
    // which needs W - M > 0 and keeps every weight finite.
    let mut honest_weight = vec![0.0; big_n + 1];
    let spammer_weight;
    match mode {
        PcMode::ExactWeights => {
            if params.honest() > 0 {
                for (n, w) in honest_weight.iter_mut().enumerate().skip(1) {
                    *w = compute_weight(&scheme, n)?;
                }
            }
            spammer_weight = if params.answer_all > 0 { compute_weight(&scheme, big_n)? } else { 0.0 };
        }
        PcMode::AsPrinted => {
            let p = scheme.params();
            let honest = params.honest() as f64;
            for (n, w) in honest_weight.iter_mut().enumerate().skip(1) {
                *w = 1.0 / (honest * powu(p.mu, n as u32));
            }
            spammer_weight = if params.answer_all > 0 {
                libm::pow(2.0, big_n as f64) * powu(1.0 - p.m, big_n as u32) / params.answer_all as f64
            } else {
                0.0
            };
        }
        PcMode::BruteForce | PcMode::MonteCarlo => {
            return Err(Error::InvalidParameter("pc_analytic supports the AsPrinted and ExactWeights modes"))
        }
    }

    let mut winning = CompensatedSum::new();
    let mut tied = CompensatedSum::new();
    let size = enumerate(params, cap, |q, p, p_mirror| {
        let (plus, minus) = vote_totals(q, &honest_weight, spammer_weight);
        match tolerant_cmp(plus, minus) {
            Ordering::Greater => winning.add(p - p_mirror),
            Ordering::Equal => tied.add(p - p_mirror),
            Ordering::Less => {}
        }
    })?;
    let per_bit = (0.5 + 0.5 * winning.value() + 0.25 * tied.value()).clamp(0.0, 1.0);
    Ok(PcResult {
        value: powu(per_bit, big_n as u32),
        per_bit,
        mode,
        stderr: None,
        enumeration_size: Some(size),
        joint: None,
    })
}
