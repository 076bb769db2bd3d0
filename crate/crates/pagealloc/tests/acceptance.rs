//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line making the gate auditable with
//! `cargo test -p pagealloc --test acceptance -- --nocapture`.
//!
//! The learning criteria (5, 7, 8) train real agents and take minutes; all
//! seeds are fixed, so outcomes are reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pagealloc::agents::{AgentKind, Policy, TrainConfig};
use pagealloc::env::{ActionMode, Env, EnvConfig};
use pagealloc::eval::{rollout_battery, train_agent, EpisodeStats};
use pagealloc::fit::{best_fit, first_fit, worst_fit, FitKind, FitPolicy};
use pagealloc::nn::{Activation, DenseNet};
use pagealloc::page::{BlockId, PageState};
use pagealloc::workload::{
    make_bf_good, make_wf_good, verify_adversarial, ScriptLabel, WorkloadMode,
};

fn pass(criterion: &str, detail: String) {
    println!("acceptance {criterion}: PASS — {detail}");
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn returns(stats: &[EpisodeStats]) -> Vec<f64> {
    stats.iter().map(|s| s.ret).collect()
}

/// Independent brute-force oracle: rebuild free runs by scanning the bitmap,
/// enumerate every legal start, and apply each policy's selection rule.
fn oracle_placement(page: &PageState, size: usize, kind: FitKind, rover: usize) -> Option<usize> {
    let n = page.page_size();
    if size == 0 || size > n {
        return None;
    }
    let bitmap = page.bitmap();
    let legal: Vec<usize> = (0..=n - size)
        .filter(|&s| bitmap[s..s + size].iter().all(|&c| !c))
        .collect();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if bitmap[i] {
            i += 1;
        } else {
            let start = i;
            while i < n && !bitmap[i] {
                i += 1;
            }
            runs.push((start, i - start));
        }
    }
    match kind {
        FitKind::First => legal.first().copied(),
        FitKind::Best => runs
            .iter()
            .filter(|&&(_, l)| l >= size)
            .min_by_key(|&&(s, l)| (l, s))
            .map(|&(s, _)| s),
        FitKind::Worst => {
            let max_len = runs.iter().map(|&(_, l)| l).max().unwrap_or(0);
            if max_len >= size {
                runs.iter().find(|&&(_, l)| l == max_len).map(|&(s, _)| s)
            } else {
                None
            }
        }
        FitKind::Next => legal
            .iter()
            .copied()
            .find(|&s| s >= rover)
            .or_else(|| legal.first().copied()),
    }
}

#[test]
fn criterion_01_baseline_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE01);
    let mut checked = 0usize;
    for _ in 0..1000 {
        let page_size = rng.random_range(1..=16usize);
        let mut page = PageState::new(page_size).unwrap();
        let mut next_id = 0u64;
        for _ in 0..page_size {
            let start = rng.random_range(0..page_size);
            let len = rng.random_range(1..=4usize);
            if page.allocate_at(start, len, BlockId(next_id)).is_ok() {
                next_id += 1;
            }
        }
        for size in 1..=page_size {
            assert_eq!(
                first_fit(&page, size),
                oracle_placement(&page, size, FitKind::First, 0),
                "first_fit size {size} on\n{}",
                page.dump()
            );
            assert_eq!(
                best_fit(&page, size),
                oracle_placement(&page, size, FitKind::Best, 0)
            );
            assert_eq!(
                worst_fit(&page, size),
                oracle_placement(&page, size, FitKind::Worst, 0)
            );
            for rover in 0..page_size {
                let mut policy = FitPolicy::new(FitKind::Next);
                policy.set_rover(rover);
                assert_eq!(
                    policy.place(&page, size),
                    oracle_placement(&page, size, FitKind::Next, rover),
                    "next_fit rover {rover} size {size}"
                );
            }
            checked += 4;
        }
    }
    pass(
        "01 baseline-oracle-equivalence",
        format!("{checked} placements matched"),
    );
}

#[test]
fn criterion_02_adversarial_generator_soundness() {
    let mut count = 0usize;
    for page_size in [10usize, 256] {
        for i in 0..100u64 {
            let bf = make_bf_good(page_size, 0x1000 + i).unwrap();
            let report = verify_adversarial(&bf).unwrap();
            assert!(
                report.matches_label(ScriptLabel::BfGood),
                "bf_good {i} at page {page_size} violates its label"
            );
            let wf = make_wf_good(page_size, 0x2000 + i).unwrap();
            let report = verify_adversarial(&wf).unwrap();
            assert!(
                report.matches_label(ScriptLabel::WfGood),
                "wf_good {i} at page {page_size} violates its label"
            );
            count += 2;
        }
    }
    pass(
        "02 adversarial-generator-soundness",
        format!("{count} scripts verified"),
    );
}

#[test]
fn criterion_03_reward_accounting() {
    // Random low-level policy: invalid actions happen constantly. Every
    // episode return must equal the in-order sum of +0.1 per valid step and
    // -10 per invalid step, bit for bit (the env accumulates rewards in the
    // same fixed step order).
    let mut cfg = EnvConfig::new(10);
    cfg.action_mode = ActionMode::LowLevel;
    cfg.workload.size_range = (1, 4);
    cfg.max_episode_steps = 200;
    let mut env = Env::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE03);
    let mut episodes = 0usize;
    let mut total_steps = 0usize;
    while episodes < 10_000 {
        env.reset(episodes as u64);
        let mut ret = 0.0f64;
        let mut replay = 0.0f64;
        loop {
            let action = rng.random_range(0..10usize);
            let result = env.step_low(action).unwrap();
            ret += result.reward;
            replay += if result.info.action_valid { 0.1 } else { -10.0 };
            total_steps += 1;
            if result.done() {
                break;
            }
        }
        assert_eq!(ret, replay, "episode {episodes} return drifted");
        episodes += 1;
    }
    pass(
        "03 reward-accounting",
        format!("{episodes} episodes, {total_steps} steps, exact equality"),
    );
}

#[test]
fn criterion_04_gradient_fidelity() {
    let shapes: [(&[usize], &[Activation]); 3] = [
        (&[5, 4, 3], &[Activation::Relu, Activation::Identity]),
        (
            &[267, 32, 32, 3],
            &[Activation::Relu, Activation::Relu, Activation::Identity],
        ),
        (
            &[11, 64, 64, 10],
            &[Activation::Tanh, Activation::Tanh, Activation::Identity],
        ),
    ];
    let mut total_params = 0usize;
    for (dims, acts) in shapes {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE04);
        let mut net = DenseNet::init(dims, acts, &mut rng);
        let input: Vec<f64> = (0..dims[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let out_grad: Vec<f64> = (0..*dims.last().unwrap())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let (_, cache) = net.forward(&input).unwrap();
        let grads = net.backward(&cache, &out_grad).unwrap();
        let loss = |net: &DenseNet| -> f64 {
            let (out, _) = net.forward(&input).unwrap();
            out.iter().zip(&out_grad).map(|(o, g)| o * g).sum()
        };
        let h = 1e-5;
        for layer in 0..net.layers().len() {
            for w in 0..net.layers()[layer].weights.len() {
                let orig = net.layers()[layer].weights[w];
                net.layers_mut()[layer].weights[w] = orig + h;
                let plus = loss(&net);
                net.layers_mut()[layer].weights[w] = orig - h;
                let minus = loss(&net);
                net.layers_mut()[layer].weights[w] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = grads.weights[layer][w];
                let denom = numeric.abs().max(analytic.abs()).max(1e-6);
                assert!(
                    (numeric - analytic).abs() / denom < 1e-4,
                    "shape {dims:?} layer {layer} weight {w}: {numeric} vs {analytic}"
                );
                total_params += 1;
            }
            for b in 0..net.layers()[layer].biases.len() {
                let orig = net.layers()[layer].biases[b];
                net.layers_mut()[layer].biases[b] = orig + h;
                let plus = loss(&net);
                net.layers_mut()[layer].biases[b] = orig - h;
                let minus = loss(&net);
                net.layers_mut()[layer].biases[b] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = grads.biases[layer][b];
                let denom = numeric.abs().max(analytic.abs()).max(1e-6);
                assert!(
                    (numeric - analytic).abs() / denom < 1e-4,
                    "shape {dims:?} layer {layer} bias {b}: {numeric} vs {analytic}"
                );
                total_params += 1;
            }
        }
    }
    pass(
        "04 gradient-fidelity",
        format!("{total_params} parameters within 1e-4 of central differences"),
    );
}

fn adversarial_env(mode: WorkloadMode) -> EnvConfig {
    let mut cfg = EnvConfig::new(256);
    cfg.history_len = 10;
    cfg.workload.mode = mode;
    cfg
}

/// Train DQN for `sessions` sessions and count how many reach
/// `threshold x baseline_mean` on the shared 100-rollout battery.
fn dqn_sessions_vs_baseline(
    mode: WorkloadMode,
    baseline: FitKind,
    sessions: usize,
    threshold: f64,
    eval_seed: u64,
) -> (usize, f64, Vec<f64>) {
    let env_cfg = adversarial_env(mode);
    let fixed = Policy::fixed_fit(baseline, ActionMode::HighLevel).unwrap();
    let baseline_stats = rollout_battery(&fixed, &env_cfg, 100, eval_seed).unwrap();
    let baseline_mean = mean(&returns(&baseline_stats));

    let mut passed = 0usize;
    let mut session_means = Vec::new();
    for session in 0..sessions {
        let mut train = TrainConfig::new(50_000);
        train.seed = pagealloc::seeding::derive(eval_seed, 100 + session as u64);
        let (policy, _) = train_agent(AgentKind::Dqn, &env_cfg, &train).unwrap();
        let stats = rollout_battery(&policy, &env_cfg, 100, eval_seed).unwrap();
        let m = mean(&returns(&stats));
        if m >= threshold * baseline_mean {
            passed += 1;
        }
        session_means.push(m);
    }
    (passed, baseline_mean, session_means)
}

#[test]
fn criterion_05_dqn_adversarial_reproduction() {
    // wf-good vs the worst-fit baseline.
    let (passed, base, means) =
        dqn_sessions_vs_baseline(WorkloadMode::WfGood, FitKind::Worst, 5, 0.95, 0xACCE05);
    assert!(
        passed >= 4,
        "wf_good: only {passed}/5 sessions reached 0.95 x {base:.3}; session means {means:?}"
    );
    let wf_detail = format!("wf_good {passed}/5 sessions vs worst-fit {base:.2}");

    // bf-good vs the best-fit baseline.
    let (passed, base, means) =
        dqn_sessions_vs_baseline(WorkloadMode::BfGood, FitKind::Best, 5, 0.95, 0xACCE55);
    assert!(
        passed >= 4,
        "bf_good: only {passed}/5 sessions reached 0.95 x {base:.3}; session means {means:?}"
    );
    pass(
        "05 dqn-adversarial-reproduction",
        format!("{wf_detail}; bf_good {passed}/5 sessions vs best-fit {base:.2}"),
    );
}

#[test]
fn criterion_06_linear_q_on_bf_good() {
    let env_cfg = adversarial_env(WorkloadMode::BfGood);
    let eval_seed = 0xACCE06;
    let fixed = Policy::fixed_fit(FitKind::Best, ActionMode::HighLevel).unwrap();
    let baseline_mean = mean(&returns(
        &rollout_battery(&fixed, &env_cfg, 100, eval_seed).unwrap(),
    ));

    let mut train = TrainConfig::for_agent(AgentKind::LinearQ, 50_000);
    train.seed = pagealloc::seeding::derive(eval_seed, 100);
    let (policy, _) = train_agent(AgentKind::LinearQ, &env_cfg, &train).unwrap();
    let linear_mean = mean(&returns(
        &rollout_battery(&policy, &env_cfg, 100, eval_seed).unwrap(),
    ));
    assert!(
        linear_mean >= 0.90 * baseline_mean,
        "linear {linear_mean:.3} below 0.90 x best-fit {baseline_mean:.3}"
    );
    pass(
        "06 linear-q-bf-good",
        format!("linear {linear_mean:.2} vs best-fit {baseline_mean:.2}"),
    );
}

#[test]
fn criterion_07_mixed_workload_dqn_beats_baselines() {
    let env_cfg = adversarial_env(WorkloadMode::Mixed);
    let eval_seed = 0xACCE07;
    let baseline_means: Vec<(FitKind, f64)> = FitKind::BASELINES
        .iter()
        .map(|&k| {
            let p = Policy::fixed_fit(k, ActionMode::HighLevel).unwrap();
            let m = mean(&returns(
                &rollout_battery(&p, &env_cfg, 100, eval_seed).unwrap(),
            ));
            (k, m)
        })
        .collect();

    let mut passed = 0usize;
    let mut session_means = Vec::new();
    for session in 0..5 {
        // The mixed-workload experiment has no pinned training budget; 100k
        // steps converges within this criterion's runtime.
        let mut train = TrainConfig::new(100_000);
        train.seed = pagealloc::seeding::derive(eval_seed, 100 + session as u64);
        let (policy, _) = train_agent(AgentKind::Dqn, &env_cfg, &train).unwrap();
        let m = mean(&returns(
            &rollout_battery(&policy, &env_cfg, 100, eval_seed).unwrap(),
        ));
        if baseline_means.iter().all(|&(_, b)| m > b) {
            passed += 1;
        }
        session_means.push(m);
    }
    assert!(
        passed >= 4,
        "only {passed}/5 sessions beat every baseline; dqn {session_means:?} vs {baseline_means:?}"
    );
    pass(
        "07 mixed-dqn-beats-baselines",
        format!("{passed}/5 sessions above all of {baseline_means:?}"),
    );
}

#[test]
fn criterion_08_ppo_low_level_desk_scale() {
    let mut env_cfg = EnvConfig::new(10);
    env_cfg.action_mode = ActionMode::LowLevel;
    env_cfg.workload.size_range = (1, 4);
    let eval_seed = 0xACCE08;

    let mut train = TrainConfig::new(200_000);
    train.seed = pagealloc::seeding::derive(eval_seed, 100);
    let (policy, _) = train_agent(AgentKind::Ppo, &env_cfg, &train).unwrap();

    let stats = rollout_battery(&policy, &env_cfg, 1000, eval_seed).unwrap();
    let bad_episodes = stats.iter().filter(|s| s.invalid_steps > 0).count();
    assert!(
        bad_episodes <= 20,
        "{bad_episodes}/1000 episodes contained an invalid action (budget 2%)"
    );
    let ppo_mean = mean(&returns(&stats));

    let best_baseline_mean = FitKind::BASELINES
        .iter()
        .map(|&k| {
            let p = Policy::fixed_fit(k, ActionMode::LowLevel).unwrap();
            mean(&returns(
                &rollout_battery(&p, &env_cfg, 1000, eval_seed).unwrap(),
            ))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        ppo_mean >= 0.8 * best_baseline_mean,
        "ppo {ppo_mean:.3} below 0.8 x best baseline {best_baseline_mean:.3}"
    );
    pass(
        "08 ppo-low-level",
        format!(
            "{bad_episodes}/1000 invalid episodes; ppo {ppo_mean:.2} vs best baseline {best_baseline_mean:.2}"
        ),
    );
}

#[test]
fn criterion_09_determinism() {
    use std::fs;
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.cfg");
    fs::write(
        &config_path,
        "agent = dqn\nenv.page_size = 10\nenv.history_len = 2\nworkload.size_max = 4\n\
         workload.mode = bf_good\ntrain.total_timesteps = 3000\ntrain.warmup_steps = 200\n\
         train.buffer_capacity = 3000\neval.rollouts = 20\nseed = 42\n",
    )
    .unwrap();

    let run = |tag: &str| {
        let out = dir.path().join(tag);
        let outcome = pagealloc::cli::cmd_train(&config_path, None, Some(out.clone())).unwrap();
        let (summary, episodes) = pagealloc::cli::cmd_eval(
            &config_path,
            std::slice::from_ref(&outcome.checkpoint),
            None,
            None,
            false,
            Some(out.clone()),
        )
        .unwrap();
        (
            fs::read(outcome.checkpoint).unwrap(),
            fs::read(outcome.log).unwrap(),
            fs::read(outcome.manifest).unwrap(),
            fs::read(summary).unwrap(),
            fs::read(episodes).unwrap(),
        )
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a.0, b.0, "checkpoints differ");
    assert_eq!(a.1, b.1, "training logs differ");
    assert_eq!(a.2, b.2, "manifests differ");
    assert_eq!(a.3, b.3, "eval summaries differ");
    assert_eq!(a.4, b.4, "eval episode CSVs differ");
    pass(
        "09 determinism",
        format!(
            "checkpoint {}B, log {}B and CSVs byte-identical across runs",
            a.0.len(),
            a.1.len()
        ),
    );
}

#[test]
fn criterion_10_history_ablation_sweep() {
    use std::fs;
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("sweep.cfg");
    fs::write(
        &config_path,
        "agent = linear_q\nenv.page_size = 10\nworkload.size_max = 4\nworkload.mode = mixed\n\
         env.max_episode_steps = 150\ntrain.total_timesteps = 2000\neval.rollouts = 10\nseed = 9\n",
    )
    .unwrap();
    let csv_path = pagealloc::cli::cmd_sweep(
        &config_path,
        &[0, 5, 10],
        None,
        Some(dir.path().join("out")),
    )
    .unwrap();
    let text = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines.len(),
        4,
        "header + one row per history length:\n{text}"
    );
    assert_eq!(
        lines[0],
        "history_len,n,mean,ci_low,ci_high,mean_episode_len,invalid_rate"
    );
    for (row, expected_len) in lines[1..].iter().zip([0usize, 5, 10]) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[0], expected_len.to_string());
        assert_eq!(fields[1], "10");
        for value in &fields[2..] {
            value
                .parse::<f64>()
                .unwrap_or_else(|_| panic!("bad numeric field {value}"));
        }
    }
    pass(
        "10 history-ablation-sweep",
        format!("3-row sweep CSV at {}", csv_path.display()),
    );
}
