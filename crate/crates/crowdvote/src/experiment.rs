//! The experiment subcommands, independent of argument parsing and IO.

use crowdvote_core::analysis::monte_carlo::{run_trial, trial_rng};
use crowdvote_core::analysis::{pc_analytic, pc_bruteforce, simulate, AnalyticParams, PcMode, SimulationSetup};
use crowdvote_core::estimation::{census, estimate_m, estimate_mu_majority, estimate_mu_training, SpammerLikelihood};
use crowdvote_core::model::{generate_responses, sample_crowd, sample_truth};
use crowdvote_core::{Counting, Distribution, MuMethod, SchemeKind, TaskSpec, WorkerProfile};

use crate::config::{ExperimentConfig, ParamModeName};
use crate::error::CliError;
use crate::report::{ResultRow, Table};

/// Rows for one configuration point plus the number of trials whose
/// estimation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub rows: Vec<ResultRow>,
    pub trials: u64,
    pub estimation_failures: u64,
}

impl PointReport {
    pub fn all_estimation_failed(&self) -> bool {
        self.trials > 0 && self.estimation_failures == self.trials
    }

    pub fn row(&self, scheme: SchemeKind) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.scheme == scheme.name())
    }
}

/// Simulates one configuration; every scheme classifies the same response
/// matrix in each trial.
pub fn run_point(config: &ExperimentConfig) -> Result<PointReport, CliError> {
    config.validate()?;
    let summary = simulate(&config.setup(), config.trials, config.seed)?;
    let estimated = config.param_mode == ParamModeName::Estimated;
    let means = summary.mean_estimates;
    let rows = config
        .schemes
        .iter()
        .map(|&kind| {
            let pc = summary.pc(kind).expect("scheme was simulated");
            ResultRow {
                seed: config.seed,
                scheme: kind.name().to_string(),
                param_mode: config.param_mode.name().to_string(),
                mu: config.mu(),
                m: config.m(),
                workers: config.workers,
                skip_all: config.skip_all,
                answer_all: config.answer_all,
                microtasks: config.spec.num_microtasks(),
                gold: config.spec.num_gold(),
                trials: config.trials,
                pc_mean: pc.value,
                pc_stderr: pc.stderr.unwrap_or(0.0),
                mhat: means.filter(|_| estimated).map(|e| e.m_hat),
                muhat: means.filter(|_| estimated).map(|e| e.mu_hat),
                ma_hat: means.filter(|_| estimated).map(|e| e.answer_all_hat),
                m0_hat: means.filter(|_| estimated).map(|e| e.skip_all_hat),
            }
        })
        .collect();
    Ok(PointReport { rows, trials: summary.trials, estimation_failures: summary.estimation_failures })
}

/// One [`run_point`] per sweep value.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<PointReport>, CliError> {
    config.validate()?;
    let sweep = config.sweep.as_ref().ok_or_else(|| CliError::Config("sweep needs sweep_variable and sweep_values".into()))?;
    sweep.values.iter().map(|&v| run_point(&config.at_sweep_value(sweep.variable, v)?)).collect()
}

pub fn sweep_table(points: &[PointReport]) -> Table {
    let rows: Vec<ResultRow> = points.iter().flat_map(|p| p.rows.iter().cloned()).collect();
    Table::from_results(&rows)
}

/// Per-trial estimation results against the generating parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub table: Table,
    pub trials: u64,
    pub failures: u64,
}

const ESTIMATE_HEADER: [&str; 12] = [
    "trial", "m", "mhat", "mu", "muhat", "M_A", "MA_hat", "M_0", "M0_hat", "W_all_definitive", "W_all_skip", "status",
];

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Runs the estimation pipeline on `trials` independent crowds.
///
/// A skip rate that cannot be estimated marks the trial as failed; a failed
/// correctness estimate leaves that column blank but the spammer counts are
/// still estimated.
pub fn run_estimate(config: &ExperimentConfig) -> Result<EstimateReport, CliError> {
    config.validate()?;
    if config.mu_method == MuMethod::TrainingBased && config.spec.num_gold() == 0 {
        return Err(CliError::Config("training-based mu estimation needs num_gold >= 1".into()));
    }
    let setup = config.setup();
    let truth_cols = [config.m(), config.mu(), config.answer_all as f64, config.skip_all as f64];
    let mut table = Table::new(&ESTIMATE_HEADER);
    let mut ok: Vec<[f64; 4]> = Vec::new();
    let mut failures = 0;
    for t in 0..config.trials {
        let mut rng = trial_rng(config.seed, t);
        let profiles = sample_crowd(&setup.spec, &setup.dists, setup.counts, setup.sampling, &mut rng)?;
        let truth = sample_truth(&setup.spec, &mut rng);
        let responses = generate_responses(&profiles, &truth, &setup.spec, &mut rng)?;
        let observed = census(&responses);
        let mu_hat = match config.mu_method {
            MuMethod::TrainingBased => estimate_mu_training(&responses, &truth.gold_bits),
            MuMethod::MajorityBased => estimate_mu_majority(&responses),
        };
        let mut row = vec![
            t.to_string(),
            config.m().to_string(),
            String::new(),
            config.mu().to_string(),
            mu_hat.as_ref().map(|v| v.to_string()).unwrap_or_default(),
            config.answer_all.to_string(),
            String::new(),
            config.skip_all.to_string(),
            String::new(),
            observed.all_definitive.to_string(),
            observed.all_skip.to_string(),
            String::new(),
        ];
        match estimate_m(&responses) {
            Ok(m_hat) => {
                let (ma, m0) =
                    SpammerLikelihood::new(observed, m_hat, responses.total_questions(), config.likelihood)?.argmax();
                row[2] = m_hat.to_string();
                row[6] = ma.to_string();
                row[8] = m0.to_string();
                row[11] = match &mu_hat {
                    Ok(mu) => {
                        ok.push([m_hat, *mu, ma as f64, m0 as f64]);
                        "ok".into()
                    }
                    Err(e) => e.to_string(),
                };
            }
            Err(e) => {
                failures += 1;
                row[11] = e.to_string();
            }
        }
        table.push(row);
    }
    if !ok.is_empty() {
        let k = ok.len() as f64;
        let stat = |f: &dyn Fn(usize) -> f64| -> [String; 4] { [0, 1, 2, 3].map(|i| f(i).to_string()) };
        let bias = stat(&|i| ok.iter().map(|e| e[i] - truth_cols[i]).sum::<f64>() / k);
        let mae = stat(&|i| ok.iter().map(|e| (e[i] - truth_cols[i]).abs()).sum::<f64>() / k);
        let med = stat(&|i| median(&mut ok.iter().map(|e| e[i]).collect::<Vec<_>>()));
        for (label, s) in [("bias", bias), ("mae", mae), ("median", med)] {
            let mut row = vec![String::new(); ESTIMATE_HEADER.len()];
            row[0] = label.into();
            row[2] = s[0].clone();
            row[4] = s[1].clone();
            row[6] = s[2].clone();
            row[8] = s[3].clone();
            row[11] = format!("summary over {} trials", ok.len());
            table.push(row);
        }
    }
    Ok(EstimateReport { table, trials: config.trials, failures })
}

pub fn analytic_params(config: &ExperimentConfig) -> AnalyticParams {
    AnalyticParams {
        workers: config.workers,
        answer_all: config.answer_all,
        skip_all: config.skip_all,
        m: config.m(),
        mu: config.mu(),
        microtasks: config.spec.num_microtasks(),
    }
}

/// Analytic `P_c` under both vote-difference readings.
pub fn run_analytic(config: &ExperimentConfig) -> Result<Table, CliError> {
    config.validate()?;
    let params = analytic_params(config);
    let mut table = Table::new(&["mode", "W", "M_0", "M_A", "N", "m", "mu", "per_bit", "pc", "enumeration_size"]);
    for mode in [PcMode::ExactWeights, PcMode::AsPrinted] {
        let r = pc_analytic(&params, mode, config.enumeration_cap)?;
        table.push(vec![
            mode.name().into(),
            params.workers.to_string(),
            params.skip_all.to_string(),
            params.answer_all.to_string(),
            params.microtasks.to_string(),
            params.m.to_string(),
            params.mu.to_string(),
            r.per_bit.to_string(),
            r.value.to_string(),
            r.enumeration_size.unwrap_or(0).to_string(),
        ]);
    }
    Ok(table)
}

/// All `P_c` routes on one small point-mass crowd.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub table: Table,
    pub bruteforce: f64,
    pub bruteforce_joint: f64,
    pub exact_weights: f64,
    pub as_printed: f64,
    pub monte_carlo: f64,
    pub monte_carlo_stderr: f64,
}

pub fn run_oracle_check(config: &ExperimentConfig) -> Result<OracleReport, CliError> {
    config.validate()?;
    let (Distribution::PointMass(m), Distribution::PointMass(mu)) = (config.skip_dist, config.correctness_dist) else {
        return Err(CliError::Config("oracle-check needs point(..) skip and correctness distributions".into()));
    };
    let params = analytic_params(config);
    let n = params.microtasks;
    let mut profiles = vec![WorkerProfile::point_mass(n, m, mu); params.honest()];
    profiles.extend((0..params.skip_all).map(|_| WorkerProfile::skip_all(n)));
    profiles.extend((0..params.answer_all).map(|_| WorkerProfile::answer_all(n)));
    let scheme = params.spammer_aware_scheme()?;

    let bf = pc_bruteforce(&profiles, &scheme, n, config.bruteforce_cap)?;
    let exact = pc_analytic(&params, PcMode::ExactWeights, config.enumeration_cap)?;
    let printed = pc_analytic(&params, PcMode::AsPrinted, config.enumeration_cap)?;
    let setup = SimulationSetup {
        spec: TaskSpec::from_microtasks(n, 0)?,
        schemes: vec![SchemeKind::SpammerAware],
        param_mode: crowdvote_core::analysis::ParamMode::GroundTruth,
        counting: Counting::TaskOnly,
        ..config.setup()
    };
    let mc = simulate(&setup, config.trials, config.seed)?.pc(SchemeKind::SpammerAware).expect("simulated");
    let joint = bf.joint.unwrap_or(bf.value);

    let mut table = Table::new(&["method", "pc", "per_bit", "stderr", "reference", "abs_diff"]);
    let mut push = |method: &str, pc: f64, per_bit: f64, stderr: Option<f64>, reference: Option<(&str, f64)>| {
        table.push(vec![
            method.into(),
            pc.to_string(),
            per_bit.to_string(),
            stderr.map(|s| s.to_string()).unwrap_or_default(),
            reference.map(|r| r.0.to_string()).unwrap_or_default(),
            reference.map(|r| (pc - r.1).abs().to_string()).unwrap_or_default(),
        ])
    };
    push("bruteforce", bf.value, bf.per_bit, None, None);
    push("bruteforce_joint", joint, bf.per_bit, None, None);
    push("analytic_exact_weights", exact.value, exact.per_bit, None, Some(("bruteforce", bf.value)));
    push("analytic_as_printed", printed.value, printed.per_bit, None, Some(("bruteforce", bf.value)));
    push("monte_carlo", mc.value, mc.per_bit, mc.stderr, Some(("bruteforce_joint", joint)));
    Ok(OracleReport {
        table,
        bruteforce: bf.value,
        bruteforce_joint: joint,
        exact_weights: exact.value,
        as_printed: printed.value,
        monte_carlo: mc.value,
        monte_carlo_stderr: mc.stderr.unwrap_or(0.0),
    })
}

/// Trial checksums seen by each scheme; used to verify pairing.
pub fn paired_checksums(config: &ExperimentConfig, trials: u64) -> Result<Vec<Vec<u64>>, CliError> {
    let setup = config.setup();
    (0..trials).map(|t| Ok(run_trial(&setup, &mut trial_rng(config.seed, t))?.checksums)).collect()
}
