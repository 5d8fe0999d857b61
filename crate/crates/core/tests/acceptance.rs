//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 1 2 3`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use infogain_bandit::agent::{Agent, AgentConfig};
use infogain_bandit::bandit::{self, BanditState, Strategy};
use infogain_bandit::dynamics::{self, DynamicsBatch, VariationalParams};
use infogain_bandit::env::EnvKind;
use infogain_bandit::gradcheck;
use infogain_bandit::harness::aggregate::{self, correlation_table};
use infogain_bandit::harness::{calibrate, logs, run_experiment, ArmChoice, ExperimentConfig};
use infogain_bandit::{rng, stats};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn kl_by_quadrature(mu_p: f64, sd_p: f64, mu_q: f64, sd_q: f64) -> f64 {
    let ln_pdf = |x: f64, m: f64, s: f64| -0.5 * ((x - m) / s).powi(2) - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
    let (lo, hi) = (mu_p - 40.0 * sd_p, mu_p + 40.0 * sd_p);
    let n = 200_000;
    let h = (hi - lo) / n as f64;
    let f = |x: f64| {
        let lp = ln_pdf(x, mu_p, sd_p);
        lp.exp() * (lp - ln_pdf(x, mu_q, sd_q))
    };
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn single_weight(mu: f64, sigma: f64) -> VariationalParams<f64> {
    let mut p = VariationalParams::<f64>::init(&[1, 1], 1.0, 0).unwrap();
    // [1, 1] with bias: one weight and one bias; pin both.
    p.mu_mut().copy_from_slice(&[mu, 0.0]);
    let rho = infogain_bandit::scalar::softplus_inv(sigma);
    p.rho_mut().copy_from_slice(&[rho, infogain_bandit::scalar::softplus_inv(1.0)]);
    p
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (sizes, seed) in [(vec![3, 8, 2], 1), (vec![6, 16, 4], 2), (vec![1, 1], 3)] {
        let a = VariationalParams::<f64>::init(&sizes, 0.5, seed).unwrap();
        ok &= dynamics::posterior_kl(&a, &a).unwrap() == 0.0;
    }
    let base = single_weight(0.0, 1.0);
    for (mu, sigma, closed) in [(1.0, 1.0, 0.5), (0.0, std::f64::consts::E, std::f64::consts::E.powi(2) / 2.0 - 1.5)] {
        let kl = dynamics::posterior_kl(&single_weight(mu, sigma), &base).unwrap();
        let oracle = kl_by_quadrature(mu, sigma, 0.0, 1.0);
        let err = (kl - oracle).abs().max((kl - closed).abs());
        ok &= err < 1e-9;
        notes.push(format!("{err:.1e}"));
    }
    let mut identity = 0;
    let mut seeds = rng::derive_stream(1, "acceptance-elbo", &[]);
    for _ in 0..100 {
        let seed: u64 = seeds.gen();
        let p = VariationalParams::<f64>::init(&[3, 4, 2], seeds.gen_range(0.1..2.0), seed).unwrap();
        let n = seeds.gen_range(1..6);
        let inputs: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| seeds.gen_range(-1.0..1.0)).collect()).collect();
        let targets: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| seeds.gen_range(-1.0..1.0)).collect()).collect();
        let batch = DynamicsBatch::new(inputs, targets).unwrap();
        let e = dynamics::elbo(&p, &batch, seeds.gen_range(1..4), seeds.gen()).unwrap();
        identity += usize::from(e.value == e.log_likelihood_term - e.kl_to_prior_term && e.kl_to_prior_term >= 0.0);
    }
    ok &= identity == 100;
    outcome(ok, format!("KL errors {}, ELBO identity {identity}/100", notes.join(", ")))
}

fn criterion_2() -> Outcome {
    let kinds = [EnvKind::CartPole, EnvKind::MountainCar, EnvKind::NoisyChain];
    let mut worst: f64 = 0.0;
    let mut shapes = 0;
    let hidden = ExperimentConfig::default().dynamics.hidden_layers;
    for kind in kinds {
        let spec = kind.spec();
        let transitions = gradcheck::random_transitions(kind, 16, 3);
        let batch = DynamicsBatch::from_transitions(transitions.iter(), spec.action_count).unwrap();
        let mut sizes = vec![spec.state_dim + spec.action_count];
        sizes.extend(&hidden);
        sizes.push(spec.state_dim);
        let model = VariationalParams::<f64>::init(&sizes, 0.5, 3).unwrap();
        let (mu, rho) = gradcheck::elbo_gradient_error(&model, &batch, 2, 11).unwrap();
        worst = worst.max(mu).max(rho);
        shapes += 1;
        for cfg in AgentConfig::default_pool() {
            let mut agent = Agent::<f64>::new(cfg, &spec, 5).unwrap();
            worst = worst.max(gradcheck::td_gradient_error(&mut agent, &transitions));
            shapes += 1;
        }
    }
    outcome(worst < 1e-4, format!("{shapes} shapes, worst relative error {worst:.2e}"))
}

fn bernoulli_ucb(run: u64, horizon: usize, checkpoints: &[usize]) -> (BanditState<f64>, Vec<f64>) {
    let means = [0.9, 0.5, 0.1];
    let mut b = BanditState::<f64>::new(Strategy::Ucb1 { c: 1.0 }, 3, rng::derive_seed(3, "ucb", &[run])).unwrap();
    let mut coin = rng::derive_stream(3, "coin", &[run]);
    let mut per_round = Vec::new();
    for t in 1..=horizon {
        let arm = b.select();
        let r = if coin.gen::<f64>() < means[arm] { 1.0 } else { 0.0 };
        b.update(arm, r).unwrap();
        if checkpoints.contains(&t) {
            per_round.push(bandit::regret(b.history(), &means) / t as f64);
        }
    }
    (b, per_round)
}

fn criterion_3() -> Outcome {
    let hits = (0..200).filter(|&r| bernoulli_ucb(r, 2000, &[]).0.recommend().unwrap() == 0).count();
    let (mut r1, mut r8) = (Vec::new(), Vec::new());
    for run in 1000..1100 {
        let (_, v) = bernoulli_ucb(run, 8000, &[1000, 8000]);
        r1.push(v[0]);
        r8.push(v[1]);
    }
    let (m1, m8) = (stats::mean(&r1), stats::mean(&r8));
    outcome(
        hits >= 190 && m8 < 0.5 * m1,
        format!("best arm most pulled {hits}/200, per-round regret T=1000 {m1:.4} T=8000 {m8:.4} (ratio {:.3})", m8 / m1),
    )
}

/// First index at which `xs` reaches 80% of its final value.
fn time_to_80(xs: &[f64]) -> usize {
    let target = 0.8 * xs[xs.len() - 1];
    xs.iter().position(|&v| v >= target).unwrap_or(xs.len())
}

fn criterion_4() -> Outcome {
    let good = AgentConfig::default_pool().into_iter().next().unwrap();
    let cfg = ExperimentConfig {
        env: EnvKind::NoisyChain,
        window_episodes: 10,
        total_windows: 30,
        n_runs: 50,
        arms: vec![good.clone()],
        ..ExperimentConfig::default()
    };
    let cal = calibrate(&cfg).unwrap();
    let table = correlation_table(&cal.windows, &[good.label], aggregate::SMOOTHING_WINDOW);
    let c = &table[0];
    let r = c.pearson_r.unwrap_or(f64::NAN);
    let (tr, tc) = (time_to_80(&c.smoothed_true_reward), time_to_80(&c.smoothed_certainty));
    outcome(r > 0.5 && tc < tr, format!("pearson r {r:.3}, windows to 80%: certainty {tc}, true reward {tr}"))
}

fn ranking(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

fn criterion_5() -> Outcome {
    let cfg = ExperimentConfig { n_runs: 50, ..ExperimentConfig::default() };
    let k = cfg.arms.len();
    let cal = calibrate(&cfg).unwrap();
    let mut true_sum = vec![0.0; k];
    let mut composite_sum = vec![0.0; k];
    for w in &cal.windows {
        true_sum[w.chosen_arm] += w.episode_returns.iter().sum::<f64>();
        composite_sum[w.chosen_arm] += w.composite_reward;
    }
    let n = cfg.n_runs as f64;
    let t: Vec<f64> = true_sum.iter().map(|v| v / n).collect();
    let c: Vec<f64> = composite_sum.iter().map(|v| v / n).collect();
    let (rt, rc) = (ranking(&t), ranking(&c));
    let fmt = |v: &[f64], p: usize| v.iter().map(|x| format!("{x:.p$}")).collect::<Vec<_>>().join("/");
    outcome(rt == rc, format!("true {} rank {rt:?}; composite {} rank {rc:?}", fmt(&t, 0), fmt(&c, 2)))
}

fn shipped_config(out: PathBuf) -> ExperimentConfig {
    ExperimentConfig { output_dir: out, ..ExperimentConfig::default() }
}

fn criterion_6(out: &Path) -> Outcome {
    let cfg = shipped_config(out.to_path_buf());
    let report = run_experiment(&cfg).unwrap();
    aggregate::aggregate(out).unwrap();
    let oracle = match report.config.oracle_arm {
        ArmChoice::Arm(i) => i,
        ArmChoice::Calibrate => unreachable!(),
    };
    let rewards = |s: &str| -> Vec<f64> {
        report.summary.iter().filter(|r| r.strategy == s).map(|r| r.cumulative_true_reward).collect()
    };
    let ucb_rows: Vec<_> = report.summary.iter().filter(|r| r.strategy == "ucb1").collect();
    let matches = ucb_rows.iter().filter(|r| r.recommended_arm == Some(oracle)).count();
    let (best, ucb, uni, worst) = (rewards("best"), rewards("ucb1"), rewards("uniform"), rewards("worst"));
    let (mb, mu, mn, mw) = (stats::mean(&best), stats::mean(&ucb), stats::mean(&uni), stats::mean(&worst));
    let p = stats::welch_t_test(&ucb, &uni);
    let order = mb >= mu && mu > mn && mn > mw;
    let passed = matches * 10 >= ucb_rows.len() * 8 && order && p < 0.05;
    outcome(
        passed,
        format!(
            "oracle arm {oracle}, UCB1 matches {matches}/{}; mean cumulative reward best {mb:.0} ucb1 {mu:.0} uniform {mn:.0} worst {mw:.0}; Welch p {p:.2e}",
            ucb_rows.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let out = scratch("criterion7");
    let mut cfg = shipped_config(out.clone());
    cfg.surrogate.eta = 0.0;
    cfg.total_windows = 20;
    cfg.n_runs = 2;
    cfg.oracle_arm = ArmChoice::Arm(0);
    cfg.worst_arm = ArmChoice::Arm(3);
    run_experiment(&cfg).unwrap();
    let mut rows = 0;
    let mut equal = 0;
    for f in logs::window_log_files(&out.join("runs")).unwrap() {
        for w in logs::read_windows(&f).unwrap() {
            rows += 1;
            equal += usize::from(w.composite_reward == w.normalized_return);
        }
    }
    outcome(rows > 0 && equal == rows, format!("{equal}/{rows} logged bandit inputs equal the normalized reward"))
}

fn csv_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_8(first: &Path) -> Outcome {
    if !first.join("summary.csv").is_file() {
        criterion_6(first);
    }
    let second = scratch("criterion8");
    run_experiment(&shipped_config(second.clone())).unwrap();
    aggregate::aggregate(&second).unwrap();
    let (a, b) = (csv_files(first), csv_files(&second));
    let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    outcome(!a.is_empty() && differing == 0, format!("{} CSV files compared, {differing} differ", a.len()))
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |n: u32| selected.is_empty() || selected.contains(&n);
    let c6_dir = scratch("criterion6");
    let limits = [1, 10, 30, 600, 1800, 7200, 0, 0].map(Duration::from_secs);
    let mut failed = 0;
    for n in 1..=8u32 {
        if !want(n) {
            continue;
        }
        let start = Instant::now();
        let o = match n {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(&c6_dir),
            7 => criterion_7(),
            _ => criterion_8(&c6_dir),
        };
        let elapsed = start.elapsed();
        let limit = limits[n as usize - 1];
        let in_time = limit.is_zero() || elapsed <= limit;
        let passed = o.passed && in_time;
        failed += usize::from(!passed);
        let time_note = if in_time { String::new() } else { format!(" (over the {}s limit)", limit.as_secs()) };
        println!(
            "criterion {n}: {} [{:.1}s{time_note}] {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
