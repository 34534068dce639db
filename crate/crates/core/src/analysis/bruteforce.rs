//! Exact `P_c` by summing over every response grid of a small crowd.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{PcMode, PcResult};
use crate::aggregation::{compute_weight, SchemeKind, WeightScheme};
use crate::error::{Error, Result};
use crate::math::{powu, tolerant_cmp, CompensatedSum};
use crate::model::{WorkerKind, WorkerProfile};

/// Default limit on the number of response grids visited.
pub const DEFAULT_BRUTEFORCE_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Vote {
    Correct,
    Incorrect,
    Skip,
}

/// Outcome distribution of one worker on one question, zero-probability
/// outcomes dropped.
fn outcomes(profile: &WorkerProfile, forced: bool) -> Result<Vec<(Vote, f64)>> {
    let all: Vec<(Vote, f64)> = match profile.kind {
        WorkerKind::SpammerSkipAll if forced => vec![(Vote::Correct, 0.5), (Vote::Incorrect, 0.5)],
        WorkerKind::SpammerSkipAll => vec![(Vote::Skip, 1.0)],
        WorkerKind::SpammerAnswerAll => vec![(Vote::Correct, 0.5), (Vote::Incorrect, 0.5)],
        WorkerKind::Honest => {
            let p = profile.skip_prob.first().copied().unwrap_or(0.0);
            let rho = profile.correct_prob.first().copied().unwrap_or(0.0);
            let point_mass = profile.skip_prob.iter().all(|&x| x == p) && profile.correct_prob.iter().all(|&x| x == rho);
            if !point_mass {
                return Err(Error::InvalidParameter("brute force needs identical per-question probabilities"));
            }
            if forced {
                vec![(Vote::Correct, (1.0 - p) * rho + 0.5 * p), (Vote::Incorrect, (1.0 - p) * (1.0 - rho) + 0.5 * p)]
            } else {
                vec![(Vote::Correct, (1.0 - p) * rho), (Vote::Incorrect, (1.0 - p) * (1.0 - rho)), (Vote::Skip, p)]
            }
        }
    };
    Ok(all.into_iter().filter(|&(_, prob)| prob > 0.0).collect())
}

/// Exact `P_c` of point-mass `profiles` (each with `microtasks` questions)
/// under `scheme`. Tied bits count as one half. `value = per_bit^N`; the
/// exact all-bits-correct probability is reported as `joint`.
pub fn pc_bruteforce(profiles: &[WorkerProfile], scheme: &WeightScheme, microtasks: usize, cap: u128) -> Result<PcResult> {
    if profiles.is_empty() {
        return Err(Error::EmptyCrowd);
    }
    if microtasks == 0 || profiles.iter().any(|p| p.questions() != microtasks) {
        return Err(Error::ShapeMismatch("profiles must have exactly N questions"));
    }
    let forced = scheme.kind() == SchemeKind::SimpleMajorityForced;
    if !forced {
        if scheme.params().questions != microtasks {
            return Err(Error::ShapeMismatch("scheme question count differs from N"));
        }
        if scheme.kind() == SchemeKind::SpammerAware && scheme.params().crowd_size != profiles.len() {
            return Err(Error::ShapeMismatch("scheme crowd size differs from profile count"));
        }
    }
    let per_worker: Vec<Vec<(Vote, f64)>> = profiles.iter().map(|p| outcomes(p, forced)).collect::<Result<_>>()?;

    // Cells are laid out worker-major: cell w * N + i is worker w, bit i.
    let cells: Vec<&[(Vote, f64)]> =
        per_worker.iter().flat_map(|o| core::iter::repeat_n(o.as_slice(), microtasks)).collect();
    let size = cells.iter().try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128)).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }

    let weights: Vec<f64> = (0..=microtasks)
        .map(|n| compute_weight(scheme, n).map_err(|e| (n, e)))
        .map(|r| r.unwrap_or(f64::NAN))
        .collect();

    let mut per_bit = vec![CompensatedSum::new(); microtasks];
    let mut joint = CompensatedSum::new();
    let mut choice = vec![0usize; cells.len()];
    loop {
        let prob: f64 = choice.iter().zip(&cells).map(|(&k, c)| c[k].1).product();
        let vote = |w: usize, i: usize| cells[w * microtasks + i][choice[w * microtasks + i]].0;

        let mut credit = vec![0.0; microtasks];
        let mut undefined = false;
        let mut plus = vec![0.0; microtasks];
        let mut minus = vec![0.0; microtasks];
        for w in 0..profiles.len() {
            let n = (0..microtasks).filter(|&i| vote(w, i) != Vote::Skip).count();
            let weight = weights[n];
            for i in 0..microtasks {
                match vote(w, i) {
                    Vote::Skip => {}
                    _ if weight.is_nan() => undefined = true,
                    Vote::Correct => plus[i] += weight,
                    Vote::Incorrect => minus[i] += weight,
                }
            }
        }
        if undefined {
            let n = (0..=microtasks).find(|&n| weights[n].is_nan()).unwrap_or(0);
            return Err(Error::UndefinedWeight { n });
        }
        for i in 0..microtasks {
            credit[i] = match tolerant_cmp(plus[i], minus[i]) {
                Ordering::Greater => 1.0,
                Ordering::Equal => 0.5,
                Ordering::Less => 0.0,
            };
            per_bit[i].add(prob * credit[i]);
        }
        joint.add(prob * credit.iter().product::<f64>());

        // Odometer increment.
        let mut idx = 0;
        loop {
            if idx == choice.len() {
                let per_bit = per_bit.iter().map(|s| s.value()).sum::<f64>() / microtasks as f64;
                return Ok(PcResult {
                    value: powu(per_bit, microtasks as u32),
                    per_bit,
                    mode: PcMode::BruteForce,
                    stderr: None,
                    enumeration_size: Some(size),
                    joint: Some(joint.value()),
                });
            }
            choice[idx] += 1;
            if choice[idx] < cells[idx].len() {
                break;
            }
            choice[idx] = 0;
            idx += 1;
        }
    }
}
