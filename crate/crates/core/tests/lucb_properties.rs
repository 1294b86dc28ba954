mod common;

use rand::Rng;
use structured_bai::bounds::{hardness_general, hardness_minimax};
use structured_bai::confidence::{beta, ConfidenceTracker};
use structured_bai::envs::{Instance, NoiseModel, SeededStream};
use structured_bai::lucb::{run, LucbConfig, RunResult};
use structured_bai::RewardMap;

fn fixtures() -> Vec<(&'static str, Instance)> {
    ["two_armed.json", "two_layer.json", "depth_three.json"]
        .into_iter()
        .map(|n| (n, common::load(n)))
        .collect()
}

/// `(c, gap)` of the true payoffs.
fn midpoint(inst: &Instance) -> (f64, f64) {
    let mut f = inst.payoff();
    f.sort_by(|a, b| b.total_cmp(a));
    ((f[0] + f[1]) / 2.0, f[0] - f[1])
}

#[test]
fn coverage_over_fixed_schedules() {
    let (delta, l, reps) = (0.1, 3, 2000);
    let means = [0.3, -0.2, 0.9];
    let inst = Instance::new(RewardMap::Identity(l), means.to_vec(), NoiseModel::UNIT_GAUSSIAN).unwrap();
    let mut failures = 0;
    for r in 0..reps {
        let mut tracker = ConfidenceTracker::new(delta, l).unwrap().with_truth(&means).unwrap();
        let mut stream = SeededStream::new(5, r);
        for t in 0..600 {
            let i = t % l;
            tracker.observe(i, inst.sample(i, &mut stream).unwrap()).unwrap();
        }
        failures += usize::from(tracker.good_event() == Some(false));
    }
    let p = failures as f64 / reps as f64;
    let slack = 3.0 * (delta * (1.0 - delta) / reps as f64).sqrt();
    assert!(p <= delta + slack, "miscoverage {p}");
}

#[test]
fn noise_is_subgaussian() {
    let n = 100_000;
    for noise in [
        NoiseModel::UNIT_GAUSSIAN,
        NoiseModel::Uniform { half_width: 1.0 },
        NoiseModel::Deterministic,
    ] {
        let inst = Instance::new(RewardMap::Identity(1), vec![0.0], noise).unwrap();
        let mut s = SeededStream::new(21, 0);
        let xs: Vec<f64> = (0..n).map(|_| inst.sample(0, &mut s).unwrap()).collect();
        for lambda in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0f64] {
            let e: Vec<f64> = xs.iter().map(|x| (lambda * x).exp()).collect();
            let mean = e.iter().sum::<f64>() / n as f64;
            let var = e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            let bound = (lambda * lambda / 2.0).exp();
            assert!(mean <= bound + 4.0 * se + 1e-12, "{noise:?} lambda {lambda}: {mean} > {bound}");
        }
    }
}

#[test]
fn streams_are_uncorrelated() {
    let inst = Instance::new(RewardMap::Identity(1), vec![0.0], NoiseModel::UNIT_GAUSSIAN).unwrap();
    let (mut a, mut b) = (SeededStream::new(77, 0), SeededStream::new(77, 1));
    let n = 100_000;
    let pairs: Vec<(f64, f64)> =
        (0..n).map(|_| (inst.sample(0, &mut a).unwrap(), inst.sample(0, &mut b).unwrap())).collect();
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(x, y), p| (x + p.0, y + p.1));
    let (mx, my) = (mx / n as f64, my / n as f64);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    let rho = sxy / (sxx * syy).sqrt();
    assert!(rho.abs() < 0.01, "rho {rho}");
}

fn runs(inst: &Instance, reps: u64, seed: u64) -> Vec<RunResult> {
    (0..reps).map(|r| run(inst, &LucbConfig::new(0.1), seed, r).unwrap()).collect()
}

#[test]
fn correct_and_within_round_bound_on_good_event() {
    for (name, inst) in fixtures() {
        let best = inst.best_arm().unwrap();
        let generic = hardness_general(&inst.reward, &inst.means).unwrap().with_risk(0.1).unwrap();
        let minimax = hardness_minimax(&inst.reward, &inst.means).unwrap().with_risk(0.1).unwrap();
        for r in runs(&inst, 200, 13).iter().filter(|r| r.good_event) {
            assert_eq!(r.recommendation, Some(best), "{name}");
            assert!(r.rounds <= generic.t_star.unwrap(), "{name}");
            assert!(r.rounds <= minimax.t_star.unwrap(), "{name}");
        }
    }
}

/// On the good event, while the run continues, one of the two candidates
/// has a payoff interval of width at least gap / 2 that contains `c`.
#[test]
fn wide_candidate_while_running() {
    for (name, inst) in fixtures() {
        let (c, gap) = midpoint(&inst);
        for r in runs(&inst, 50, 17).iter().filter(|r| r.good_event) {
            for rec in &r.trace {
                let ok = [rec.best_interval, rec.contender_interval]
                    .iter()
                    .any(|&(lo, hi)| hi - lo >= gap / 2.0 && lo <= c && c <= hi);
                assert!(ok, "{name} round {}: {:?} {:?}", rec.round, rec.best_interval, rec.contender_interval);
            }
        }
    }
}

/// Textbook LUCB on plain arms: leader by lower bound, challenger by upper
/// bound among the rest, one pull each, stop on separation.
fn reference_lucb(inst: &Instance, delta: f64, seed: u64, stream: u64) -> (u64, Vec<(usize, usize)>) {
    let k = inst.num_arms();
    let risk = delta / (2.0 * k as f64);
    let mut stream = SeededStream::new(seed, stream);
    let (mut n, mut sum) = (vec![0u64; k], vec![0.0; k]);
    let (mut lo, mut hi) = (vec![f64::NEG_INFINITY; k], vec![f64::INFINITY; k]);
    let pick = |lo: &[f64], hi: &[f64]| {
        let b = (0..k).fold(0, |b, j| if lo[j] > lo[b] { j } else { b });
        let c = (0..k).filter(|&j| j != b).fold(None, |c: Option<usize>, j| match c {
            Some(c) if hi[c] >= hi[j] => Some(c),
            _ => Some(j),
        });
        (b, c.unwrap())
    };
    let mut probes = Vec::new();
    for t in 1.. {
        let (b, c) = pick(&lo, &hi);
        probes.push((b, c));
        for i in [b, c] {
            let y = inst.sample(i, &mut stream).unwrap();
            n[i] += 1;
            sum[i] += y;
            let m = sum[i] / n[i] as f64;
            let w = (2.0 * beta(n[i], risk).unwrap() / n[i] as f64).sqrt();
            lo[i] = lo[i].max(m - w);
            hi[i] = hi[i].min(m + w);
        }
        let (b, c) = pick(&lo, &hi);
        if lo[b] >= hi[c] {
            return (t, probes);
        }
    }
    unreachable!()
}

#[test]
fn identity_matches_textbook_lucb() {
    let mut rng = common::rng(3);
    for case in 0..40 {
        let k = rng.random_range(2..=4);
        let means: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0)).collect();
        let inst = Instance::new(RewardMap::Identity(k), means, NoiseModel::UNIT_GAUSSIAN).unwrap();
        if inst.best_arm().is_err() {
            continue;
        }
        let ours = run(&inst, &LucbConfig::new(0.05).with_cap(200_000), 9, case).unwrap();
        let (t, probes) = reference_lucb(&inst, 0.05, 9, case);
        assert_eq!(ours.rounds, t, "case {case}");
        let seq: Vec<(usize, usize)> = ours.trace.iter().map(|r| (r.probe1, r.probe2)).collect();
        assert_eq!(seq, probes, "case {case}");
    }
}

#[test]
fn two_layer_explores_the_best_arm_first() {
    let inst = common::load("two_layer.json");
    let k = 3;
    for seed in 0..10 {
        let r = run(&inst, &LucbConfig::new(0.1), seed, 0).unwrap();
        assert!(r.trace[..k].iter().all(|t| t.best == 0), "seed {seed}");
        let led = r.trace.iter().filter(|t| t.best == 0).count();
        assert!(led as f64 >= 0.9 * r.trace.len() as f64, "seed {seed}: led {led} rounds");
        let mut first: Vec<usize> = r.trace[..k].iter().map(|t| t.probe1).collect();
        first.sort_unstable();
        assert_eq!(first, vec![0, 1, 2], "seed {seed}");
    }
}
