//! Seeded Monte Carlo estimation of `P_c`.
//!
//! Trial `t` draws from its own ChaCha8 stream (`seed`, stream `t`), so the
//! result for a given seed and trial count does not depend on how trials
//! are scheduled. Every scheme classifies the same response matrix in a
//! trial, with an identical copy of the tie-breaking stream.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PcMode, PcResult};
use crate::aggregation::{classify, Counting, SchemeKind, WeightParams, WeightScheme};
use crate::error::{Error, Result};
use crate::estimation::{estimate_crowd, CrowdEstimates, LikelihoodModel, MuMethod};
use crate::model::{
    generate_responses, sample_crowd, sample_truth, AbilityDistributions, CrowdCounts, SamplingMode, TaskSpec,
};

/// Where the weight schemes get their crowd parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamMode {
    GroundTruth,
    /// Per-trial manager-side estimates. Trials where estimation fails fall
    /// back to the nominal distribution means with no spammers.
    Estimated { mu_method: MuMethod, likelihood: LikelihoodModel },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSetup {
    pub spec: TaskSpec,
    pub dists: AbilityDistributions,
    pub counts: CrowdCounts,
    pub sampling: SamplingMode,
    pub schemes: Vec<SchemeKind>,
    pub param_mode: ParamMode,
    pub counting: Counting,
}

impl SimulationSetup {
    fn questions(&self) -> usize {
        match self.counting {
            Counting::TaskOnly => self.spec.num_microtasks(),
            Counting::TaskPlusGold => self.spec.total_questions(),
        }
    }

    fn fallback_params(&self) -> WeightParams {
        WeightParams {
            crowd_size: self.counts.total(),
            spammers: 0,
            answer_all: 0,
            mu: self.dists.mean_correctness(),
            m: self.dists.mean_skip(),
            questions: self.questions(),
        }
    }

    fn truth_params(&self) -> WeightParams {
        WeightParams {
            spammers: self.counts.spammers(),
            answer_all: self.counts.answer_all,
            ..self.fallback_params()
        }
    }
}

/// One scheme's tallies over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeTally {
    pub kind: SchemeKind,
    pub correct: u64,
    pub bits_correct: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub trials: u64,
    pub schemes: Vec<SchemeTally>,
    /// Trials in which estimation failed.
    pub estimation_failures: u64,
    /// Means of the successful estimates, `None` without any.
    pub mean_estimates: Option<MeanEstimates>,
    /// Trials where some scheme saw a different response matrix; always 0.
    pub unpaired_trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimates {
    pub m_hat: f64,
    pub mu_hat: f64,
    pub answer_all_hat: f64,
    pub skip_all_hat: f64,
}

impl SimulationSummary {
    pub fn pc(&self, kind: SchemeKind) -> Option<PcResult> {
        let tally = self.schemes.iter().find(|s| s.kind == kind)?;
        let trials = self.trials as f64;
        let value = tally.correct as f64 / trials;
        let per_bit = tally.bits_correct.iter().sum::<u64>() as f64 / (trials * tally.bits_correct.len() as f64);
        Some(PcResult {
            value,
            per_bit,
            mode: PcMode::MonteCarlo,
            stderr: Some(libm::sqrt(value * (1.0 - value) / trials)),
            enumeration_size: None,
            joint: None,
        })
    }
}

/// Result of a single trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Per scheme: whether each task bit was right.
    pub bits_correct: Vec<Vec<bool>>,
    /// Per scheme: checksum of the response matrix it classified.
    pub checksums: Vec<u64>,
    /// `Some(Err)` when estimation failed, `None` in ground-truth mode.
    pub estimates: Option<Result<CrowdEstimates>>,
}

/// Random stream of trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn run_trial(setup: &SimulationSetup, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let profiles = sample_crowd(&setup.spec, &setup.dists, setup.counts, setup.sampling, rng)?;
    let truth = sample_truth(&setup.spec, rng);
    let responses = generate_responses(&profiles, &truth, &setup.spec, rng)?;

    let (params, estimates) = match setup.param_mode {
        ParamMode::GroundTruth => (setup.truth_params(), None),
        ParamMode::Estimated { mu_method, likelihood } => {
            let est = estimate_crowd(&responses, &truth.gold_bits, mu_method, likelihood);
            let params = match &est {
                Ok(e) => e.weight_params(setup.counts.total(), setup.questions()),
                Err(_) => setup.fallback_params(),
            };
            (params, Some(est))
        }
    };

    let mut bits_correct = Vec::with_capacity(setup.schemes.len());
    let mut checksums = Vec::with_capacity(setup.schemes.len());
    for &kind in &setup.schemes {
        let scheme = WeightScheme::new(kind, params, setup.counting)?;
        let mut tie_rng = rng.clone();
        checksums.push(responses.checksum());
        let decision = classify(&responses, &scheme, &mut tie_rng)?;
        bits_correct.push(decision.bits.iter().zip(&truth.bits).map(|(a, b)| a == b).collect());
    }
    Ok(TrialOutcome { bits_correct, checksums, estimates })
}

/// Runs `trials` independent trials of `setup`.
pub fn simulate(setup: &SimulationSetup, trials: u64, seed: u64) -> Result<SimulationSummary> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required"));
    }
    if setup.schemes.is_empty() {
        return Err(Error::InvalidParameter("no weight scheme selected"));
    }
    let n_bits = setup.spec.num_microtasks();
    let mut schemes: Vec<SchemeTally> = setup
        .schemes
        .iter()
        .map(|&kind| SchemeTally { kind, correct: 0, bits_correct: vec![0; n_bits] })
        .collect();
    let mut failures = 0u64;
    let mut unpaired = 0u64;
    let mut sums = [0.0f64; 4];
    let mut successes = 0u64;
    for t in 0..trials {
        let outcome = run_trial(setup, &mut trial_rng(seed, t))?;
        for (tally, bits) in schemes.iter_mut().zip(&outcome.bits_correct) {
            tally.correct += bits.iter().all(|&b| b) as u64;
            for (count, &b) in tally.bits_correct.iter_mut().zip(bits) {
                *count += b as u64;
            }
        }
        if outcome.checksums.windows(2).any(|w| w[0] != w[1]) {
            unpaired += 1;
        }
        match outcome.estimates {
            Some(Ok(e)) => {
                successes += 1;
                sums[0] += e.m_hat;
                sums[1] += e.mu_hat;
                sums[2] += e.answer_all_hat as f64;
                sums[3] += e.skip_all_hat as f64;
            }
            Some(Err(_)) => failures += 1,
            None => {}
        }
    }
    let mean_estimates = (successes > 0).then(|| {
        let k = successes as f64;
        MeanEstimates { m_hat: sums[0] / k, mu_hat: sums[1] / k, answer_all_hat: sums[2] / k, skip_all_hat: sums[3] / k }
    });
    Ok(SimulationSummary { trials, schemes, estimation_failures: failures, mean_estimates, unpaired_trials: unpaired })
}

/// Monte Carlo `P_c` of a single scheme.
pub fn pc_monte_carlo(setup: &SimulationSetup, kind: SchemeKind, trials: u64, seed: u64) -> Result<PcResult> {
    let single = SimulationSetup { schemes: vec![kind], ..setup.clone() };
    let summary = simulate(&single, trials, seed)?;
    summary.pc(kind).ok_or(Error::InvalidParameter("scheme missing from summary"))
}
