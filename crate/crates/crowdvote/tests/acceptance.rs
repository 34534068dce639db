//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::Path;
use std::process::Command;
use std::thread;
use std::time::Instant;

use crowdvote::experiment::{run_point, PointReport};
use crowdvote::{ExperimentConfig, SweepVariable};
use crowdvote_core::analysis::monte_carlo::trial_rng;
use crowdvote_core::analysis::{
    pc_analytic, pc_bruteforce, simulate, total_configuration_mass, AnalyticParams, ParamMode, PcMode, SimulationSetup,
    DEFAULT_BRUTEFORCE_CAP, DEFAULT_ENUMERATION_CAP,
};
use crowdvote_core::estimation::{census, estimate_m, estimate_mu_training, SpammerLikelihood};
use crowdvote_core::model::Answer::{One, Skip, Zero};
use crowdvote_core::model::{generate_responses, sample_crowd, sample_truth};
use crowdvote_core::{
    AbilityDistributions, Counting, CrowdCounts, Distribution, LikelihoodModel, ResponseMatrix, SamplingMode,
    SchemeKind, TaskSpec, WorkerProfile,
};

const TRIALS: u64 = 100_000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pc(point: &PointReport, kind: SchemeKind) -> (f64, f64) {
    let row = point.row(kind).expect("scheme present");
    (row.pc_mean, row.pc_stderr)
}

fn combined(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1 * a.1 + b.1 * b.1).sqrt()
}

fn run_points(configs: Vec<ExperimentConfig>) -> Vec<PointReport> {
    thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_point(c).expect("simulation runs"))).collect();
        handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig::reference(101).at_sweep_value(SweepVariable::Mu, 0.5).unwrap();
    let point = run_point(&config).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut pass = elapsed < 120.0;
    let mut detail = format!("{elapsed:.1}s;");
    for kind in SchemeKind::ALL {
        let (p, se) = pc(&point, kind);
        let ok = (p - 0.125).abs() <= 3.0 * se;
        pass &= ok;
        detail += &format!(" {}={p:.4}±{se:.4}", kind.name());
    }
    outcome(pass, detail)
}

fn criterion_2() -> Outcome {
    let mus = [0.65, 0.75, 0.85, 0.95];
    let configs = mus.iter().map(|&mu| ExperimentConfig::reference(102).at_sweep_value(SweepVariable::Mu, mu).unwrap()).collect();
    let points = run_points(configs);
    let mut pass = true;
    let mut detail = String::new();
    for (mu, point) in mus.iter().zip(&points) {
        let sa = pc(point, SchemeKind::SpammerAware);
        let ho = pc(point, SchemeKind::HonestOptimal);
        let smf = pc(point, SchemeKind::SimpleMajorityForced);
        let mut ok = sa.0 >= ho.0 && ho.0 >= smf.0;
        if *mu == 0.75 || *mu == 0.85 {
            ok &= sa.0 - smf.0 > 2.0 * combined(sa, smf);
        }
        pass &= ok;
        detail += &format!(" mu={mu}: {:.4}/{:.4}/{:.4}{}", sa.0, ho.0, smf.0, if ok { "" } else { " (violated)" });
    }
    outcome(pass, format!("sa/ho/smf{detail}"))
}

fn criterion_3() -> Outcome {
    let ks: Vec<usize> = (0..=12).collect();
    let configs = ks
        .iter()
        .map(|&k| ExperimentConfig::reference(103).at_sweep_value(SweepVariable::Spammers, k as f64).unwrap())
        .collect();
    let points = run_points(configs);
    let mut sa_max = true;
    let mut low_ok = true;
    let mut smf_ahead = Vec::new();
    for (&k, point) in ks.iter().zip(&points) {
        let sa = pc(point, SchemeKind::SpammerAware);
        let ho = pc(point, SchemeKind::HonestOptimal);
        let smf = pc(point, SchemeKind::SimpleMajorityForced);
        sa_max &= sa.0 >= ho.0 && sa.0 >= smf.0;
        if k <= 2 {
            low_ok &= ho.0 > smf.0;
        }
        smf_ahead.push(smf.0 - ho.0 > 2.0 * combined(smf, ho));
    }
    // Smallest count from which SimpleMajorityForced stays ahead.
    let crossover = (0..ks.len()).find(|&i| smf_ahead[i..].iter().all(|&b| b));
    let pass = sa_max && low_ok && crossover.is_some();
    outcome(
        pass,
        format!(
            "spammer_aware maximal: {sa_max}; honest_optimal ahead at k<=2: {low_ok}; crossover from k={}",
            crossover.map(|i| ks[i].to_string()).unwrap_or_else(|| "none".into())
        ),
    )
}

fn criterion_4() -> Outcome {
    let sets = [
        (3, 1, 0, 0.5, 0.8, 2),
        (4, 2, 0, 0.3, 0.7, 2),
        (4, 1, 1, 0.6, 0.9, 2),
        (2, 0, 0, 0.4, 0.75, 1),
        (4, 0, 1, 0.2, 0.65, 2),
        (3, 2, 0, 0.5, 0.75, 1),
        (4, 2, 1, 0.5, 0.75, 2),
        (4, 1, 0, 0.5, 0.75, 2),
    ];
    let mut pass = true;
    let (mut worst_exact, mut worst_z, mut worst_product_z) = (0.0f64, 0.0f64, 0.0f64);
    for &(workers, answer_all, skip_all, m, mu, n) in &sets {
        let p = AnalyticParams { workers, answer_all, skip_all, m, mu, microtasks: n };
        let mut profiles = vec![WorkerProfile::point_mass(n, m, mu); p.honest()];
        profiles.extend((0..skip_all).map(|_| WorkerProfile::skip_all(n)));
        profiles.extend((0..answer_all).map(|_| WorkerProfile::answer_all(n)));
        let bf = pc_bruteforce(&profiles, &p.spammer_aware_scheme().unwrap(), n, DEFAULT_BRUTEFORCE_CAP).unwrap();
        let exact = pc_analytic(&p, PcMode::ExactWeights, DEFAULT_ENUMERATION_CAP).unwrap();
        let diff = (bf.value - exact.value).abs();
        worst_exact = worst_exact.max(diff);
        let setup = SimulationSetup {
            spec: TaskSpec::from_microtasks(n, 0).unwrap(),
            dists: AbilityDistributions::new(Distribution::point(m).unwrap(), Distribution::point(mu).unwrap()).unwrap(),
            counts: CrowdCounts::with_spammers(workers, skip_all, answer_all).unwrap(),
            sampling: SamplingMode::PerQuestion,
            schemes: vec![SchemeKind::SpammerAware],
            param_mode: ParamMode::GroundTruth,
            counting: Counting::TaskOnly,
        };
        let mc = simulate(&setup, TRIALS, 104).unwrap().pc(SchemeKind::SpammerAware).unwrap();
        let z = (mc.value - bf.joint.unwrap()).abs() / mc.stderr.unwrap();
        worst_z = worst_z.max(z);
        worst_product_z = worst_product_z.max((mc.value - bf.value).abs() / mc.stderr.unwrap());
        pass &= diff <= 1e-10 && z <= 3.0;
    }
    // Monte Carlo is judged against the exact joint probability; its
    // distance to the per-bit product is shown for reference only.
    outcome(
        pass,
        format!(
            "{} sets; max |bruteforce - exact| = {worst_exact:.2e}; max MC z vs joint = {worst_z:.2} (vs per-bit product {worst_product_z:.2})",
            sets.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let sets = [
        (4, 0, 0, 0.3, 0.8),
        (5, 3, 0, 0.5, 0.7),
        (6, 2, 1, 0.1, 0.95),
        (4, 1, 2, 0.9, 0.6),
        (7, 3, 0, 0.45, 0.55),
    ];
    let mut worst = 0.0f64;
    for (workers, answer_all, skip_all, m, mu) in sets {
        let p = AnalyticParams { workers, answer_all, skip_all, m, mu, microtasks: 2 };
        worst = worst.max((total_configuration_mass(&p, DEFAULT_ENUMERATION_CAP).unwrap() - 1.0).abs());
    }
    outcome(worst <= 1e-9, format!("5 sets; max |mass - 1| = {worst:.2e}"))
}

fn honest_estimates(m: f64, mu: f64, seed: u64) -> (f64, f64) {
    let spec = TaskSpec::from_microtasks(3, 3).unwrap();
    let d = AbilityDistributions::new(Distribution::point(m).unwrap(), Distribution::point(mu).unwrap()).unwrap();
    let mut rng = trial_rng(seed, 0);
    let counts = CrowdCounts::with_spammers(500, 0, 0).unwrap();
    let profiles = sample_crowd(&spec, &d, counts, SamplingMode::PerQuestion, &mut rng).unwrap();
    let truth = sample_truth(&spec, &mut rng);
    let r = generate_responses(&profiles, &truth, &spec, &mut rng).unwrap();
    (estimate_m(&r).unwrap(), estimate_mu_training(&r, &truth.gold_bits).unwrap())
}

fn criterion_6() -> Outcome {
    let (mut mae_m, mut mae_mu, mut worst) = (0.0f64, 0.0f64, 0.0f64);
    for (m, mu) in [(0.3, 0.6), (0.5, 0.9), (0.7, 0.75)] {
        let (mut em, mut emu) = (0.0, 0.0);
        for seed in 0..20 {
            let (m_hat, mu_hat) = honest_estimates(m, mu, 600 + seed);
            em += (m_hat - m).abs() / 20.0;
            emu += (mu_hat - mu).abs() / 20.0;
            worst = worst.max((m_hat - m).abs());
        }
        mae_m = mae_m.max(em);
        mae_mu = mae_mu.max(emu);
    }
    let rows = vec![
        vec![One, Skip, Zero, One, Skip, One],
        vec![Skip, Zero, Zero, Skip, One, One],
        vec![One, One, Skip, Zero, Zero, Skip],
    ];
    let gold = [true, false, true];
    let base = ResponseMatrix::from_rows(&rows, 3, 3).unwrap();
    let mut grown = rows.clone();
    grown.push(vec![Skip; 6]);
    grown.push(vec![One, Zero, One, Zero, One, Zero]);
    grown.push(vec![Skip; 6]);
    let grown = ResponseMatrix::from_rows(&grown, 3, 3).unwrap();
    let invariant = estimate_m(&base).unwrap().to_bits() == estimate_m(&grown).unwrap().to_bits()
        && estimate_mu_training(&base, &gold).unwrap().to_bits() == estimate_mu_training(&grown, &gold).unwrap().to_bits();
    outcome(
        mae_m <= 0.05 && mae_mu <= 0.05 && invariant,
        format!(
            "W=500, 20 seeds x 3 crowds; mean |m_hat-m| <= {mae_m:.4} (worst seed {worst:.4}); mean |mu_hat-mu| <= {mae_mu:.4}; exclusion invariant: {invariant}"
        ),
    )
}

fn spammer_errors(gold: usize) -> (f64, bool) {
    let spec = TaskSpec::from_microtasks(3, gold).unwrap();
    let d = AbilityDistributions::new(Distribution::uniform(0.0, 1.0).unwrap(), Distribution::uniform(0.5, 1.0).unwrap()).unwrap();
    let counts = CrowdCounts::with_spammers(50, 7, 7).unwrap();
    let (mut err, mut feasible) = (0.0, true);
    for seed in 0..100 {
        let mut rng = trial_rng(700, seed);
        let profiles = sample_crowd(&spec, &d, counts, SamplingMode::PerQuestion, &mut rng).unwrap();
        let truth = sample_truth(&spec, &mut rng);
        let r = generate_responses(&profiles, &truth, &spec, &mut rng).unwrap();
        let c = census(&r);
        let lik = SpammerLikelihood::new(c, estimate_m(&r).unwrap(), r.total_questions(), LikelihoodModel::AsPrinted).unwrap();
        let (ma, m0) = lik.argmax();
        feasible &= ma <= c.all_definitive && m0 <= c.all_skip;
        err += (ma as f64 - 7.0).abs() + (m0 as f64 - 7.0).abs();
    }
    (err / 200.0, feasible)
}

fn criterion_7() -> Outcome {
    let (g3, f3) = spammer_errors(3);
    let (g20, f20) = spammer_errors(20);
    outcome(
        g20 <= g3 && f3 && f20,
        format!("MAE G=3 {g3:.3}, G=20 {g20:.3}; feasibility held: {}", f3 && f20),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let runs = [
        ("simulate", "symmetry.conf", "2000"),
        ("sweep", "spammer_sweep.conf", "500"),
        ("estimate", "estimate.conf", "20"),
        ("analytic", "oracle.conf", "1"),
        ("oracle-check", "oracle.conf", "5000"),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (cmd, conf, trials) in runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{cmd}-{rep}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_crowdvote"))
                .args([cmd, "--config"])
                .arg(configs.join(conf))
                .args(["--trials", trials, "--out"])
                .arg(&out)
                .status()
                .unwrap();
            pass &= status.success();
            outputs.push(std::fs::read(&out).unwrap_or_default());
        }
        let same = !outputs[0].is_empty() && outputs[0] == outputs[1];
        pass &= same;
        detail += &format!(" {cmd}:{}", if same { "identical" } else { "DIFFERENT" });
    }
    outcome(pass, detail.trim_start().to_string())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("symmetry point merges at 2^-3", criterion_1),
        ("mu sweep ordering", criterion_2),
        ("spammer sweep crossover", criterion_3),
        ("oracle equivalence", criterion_4),
        ("configuration mass normalization", criterion_5),
        ("estimator consistency", criterion_6),
        ("spammer-count MLE sanity", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        println!("criterion {} {:<34} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
