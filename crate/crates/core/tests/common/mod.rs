//! Shared fixtures, oracles and property suites for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structured_bai::bounds::{
    departure_family, departure_patterns, departure_vector, enumerate_proof_sets,
    hardness_minimax, is_significant, lower_bound_minimax, path_values, span, verify_proof_set,
    Direction, LowerBoundOptions,
};
use structured_bai::envs::{unique_argmax, Instance};
use structured_bai::game::random::{random_game, random_valuation, RandomGameParams};
use structured_bai::{Error, GameStructure, RewardMap};

pub type Suite = fn() -> Result<usize, String>;

/// Property suites with their names, in a fixed order.
pub const SUITES: [(&str, Suite); 8] = [
    ("value monotonicity", monotonicity),
    ("interval nesting along descents", interval_nesting),
    ("descent terminal in cover set", cover_membership),
    ("proof sets are sufficient", proof_sets_sufficient),
    ("pattern departures are significant", departures_significant),
    ("clipping keeps payoffs above min(theta, f)", clipping_bound),
    ("span identity on two-layer trees", span_identity),
    ("pruning leaves the lower bound unchanged", pruning_invariance),
];

pub const MIN_CASES: usize = 1000;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> Instance {
    Instance::load(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small_params() -> RandomGameParams {
    RandomGameParams { max_depth: 3, max_branching: 3, ..Default::default() }
}

/// Every node of the game in preorder.
fn all_nodes(g: &GameStructure) -> Vec<structured_bai::NodeId> {
    g.subtree(g.root()).collect()
}

/// `u <= v` with a random nonnegative gap, some coordinates tied.
fn ordered_pair<R: Rng>(rng: &mut R, len: usize) -> (Vec<f64>, Vec<f64>) {
    let u = random_valuation(rng, len, 0.0, 1.0);
    let v = u
        .iter()
        .map(|&x| if rng.random_bool(0.2) { x } else { x + rng.random_range(0.0..0.5) })
        .collect();
    (u, v)
}

pub fn monotonicity() -> Result<usize, String> {
    let mut rng = rng(101);
    for case in 0..MIN_CASES {
        let g = random_game(&mut rng, &RandomGameParams::default());
        let (u, v) = ordered_pair(&mut rng, g.num_terminals());
        let (vu, vv) = (g.evaluate(&u).unwrap(), g.evaluate(&v).unwrap());
        for n in all_nodes(&g) {
            ensure(vu.get(n) <= vv.get(n), || format!("case {case}: node {n:?} decreases"))?;
        }
        let (fu, fv) = (g.payoff(&u).unwrap(), g.payoff(&v).unwrap());
        ensure(fu.iter().zip(&fv).all(|(a, b)| a <= b), || format!("case {case}: payoff decreases"))?;
    }
    Ok(MIN_CASES)
}

pub fn interval_nesting() -> Result<usize, String> {
    let mut rng = rng(102);
    let mut checked = 0;
    for case in 0..MIN_CASES {
        let g = random_game(&mut rng, &RandomGameParams::default());
        let (u, v) = ordered_pair(&mut rng, g.num_terminals());
        for j in 0..g.num_arms() {
            let start = g.history(g.arm_node(j).unwrap());
            let h = g.minmax_descent(&start, &u, &v).unwrap();
            for k in 1..h.len() {
                let outer = (g.value(&h[..k + 1], &u).unwrap(), g.value(&h[..k + 1], &v).unwrap());
                let inner = (g.value(&h[..k], &u).unwrap(), g.value(&h[..k], &v).unwrap());
                ensure(outer.0 <= inner.0 && inner.1 <= outer.1, || {
                    format!("case {case}, arm {j}, prefix {k}: {inner:?} not inside {outer:?}")
                })?;
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn cover_membership() -> Result<usize, String> {
    let mut rng = rng(103);
    let mut checked = 0;
    for case in 0..MIN_CASES {
        let g = random_game(&mut rng, &RandomGameParams::default());
        let (u, v) = ordered_pair(&mut rng, g.num_terminals());
        let reward = RewardMap::minimax(g.clone());
        for j in 0..g.num_arms() {
            let start = g.history(g.arm_node(j).unwrap());
            let h = g.minmax_descent(&start, &u, &v).unwrap();
            let i = g.terminal(g.node(&h).unwrap()).unwrap();
            let cover = reward.cover_set(j, &u, &v).unwrap();
            ensure(cover.contains(&i), || format!("case {case}, arm {j}: {i} not in {cover:?}"))?;
            ensure(reward.cover_pick(j, &u, &v).unwrap() == i, || format!("case {case}: pick differs"))?;
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn proof_sets_sufficient() -> Result<usize, String> {
    let mut rng = rng(104);
    let mut checked = 0;
    let mut game_no = 0;
    while checked < MIN_CASES {
        let g = random_game(&mut rng, &RandomGameParams::default());
        game_no += 1;
        for j in 0..g.num_arms() {
            for dir in [Direction::Upper, Direction::Lower] {
                let sets = match enumerate_proof_sets(&g, j, dir, 500) {
                    Ok(s) => s,
                    Err(Error::TooManyProofSets { .. }) => continue,
                    Err(e) => return Err(e.to_string()),
                };
                ensure(!sets.is_empty(), || format!("game {game_no}: no proof set"))?;
                for ps in &sets {
                    ensure(verify_proof_set(&g, ps, 1000, &mut rng), || {
                        format!("game {game_no}, arm {j}, {dir:?}: {:?} fails", ps.terminals)
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// Means with a top gap of at least `1e-3`. Some games force a tie (two
/// arms reaching the same terminal); `None` after a few attempts.
fn separated_means<R: Rng>(rng: &mut R, reward: &RewardMap) -> Option<Vec<f64>> {
    for _ in 0..50 {
        let mu = random_valuation(rng, reward.num_observables(), 0.0, 1.0);
        let mut f = reward.payoff(&mu).unwrap();
        if unique_argmax(&f).is_ok() {
            f.sort_by(|a, b| b.total_cmp(a));
            if f[0] - f[1] >= 1e-3 {
                return Some(mu);
            }
        }
    }
    None
}

pub fn departures_significant() -> Result<usize, String> {
    let mut rng = rng(105);
    let options = LowerBoundOptions { theta_grid: 4, proof_set_limit: 200, ..Default::default() };
    let mut checked = 0;
    let mut game_no = 0;
    while checked < MIN_CASES {
        let g = random_game(&mut rng, &small_params());
        game_no += 1;
        let reward = RewardMap::minimax(g);
        let Some(mu) = separated_means(&mut rng, &reward) else { continue };
        let patterns = match departure_patterns(&reward, &mu, &options) {
            Ok(p) => p,
            Err(Error::TooManyProofSets { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        for p in patterns.iter().step_by(patterns.len().div_ceil(60).max(1)) {
            let d = departure_vector(&reward, &mu, p).map_err(|e| e.to_string())?;
            ensure(is_significant(&reward, &mu, &d).unwrap(), || {
                format!("game {game_no}: pattern {p:?} gives insignificant {d:?} at {mu:?}")
            })?;
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn clipping_bound() -> Result<usize, String> {
    let mut rng = rng(106);
    for case in 0..MIN_CASES {
        let g = random_game(&mut rng, &RandomGameParams::default());
        let mu = random_valuation(&mut rng, g.num_terminals(), 0.0, 1.0);
        let theta = rng.random_range(0.0..1.0);
        let clipped: Vec<f64> = mu
            .iter()
            .map(|&m| if m >= theta && rng.random_bool(0.5) { theta } else { m })
            .collect();
        let (f, f2) = (g.payoff(&mu).unwrap(), g.payoff(&clipped).unwrap());
        for j in 0..f.len() {
            ensure(f2[j] >= theta.min(f[j]), || {
                format!("case {case}, arm {j}: {} < min({theta}, {})", f2[j], f[j])
            })?;
        }
    }
    Ok(MIN_CASES)
}

/// On a two-layer tree the path values of leaf `(a, b)` are just arm
/// `a`'s minimum `m`, and `Span{m, mu_ab, c} = max(|m - c|, mu_ab - m)`
/// whenever `m <= c`. For the best arm `m > c` and the span is
/// `mu_ab - c` instead.
pub fn span_identity() -> Result<usize, String> {
    let mut rng = rng(107);
    let mut checked = 0;
    while checked < MIN_CASES {
        let k = rng.random_range(2..=4);
        let g = GameStructure::two_layer(k);
        let reward = RewardMap::minimax(g.clone());
        let mu = separated_means(&mut rng, &reward).expect("two-layer arms are independent");
        let report = hardness_minimax(&reward, &mu).unwrap();
        let c = report.c;
        for a in 0..k {
            let m = mu[a * k..(a + 1) * k].iter().cloned().fold(f64::INFINITY, f64::min);
            for b in 0..k {
                let i = a * k + b;
                let pv = path_values(&g, i, &mu).unwrap();
                ensure(pv == vec![m], || format!("leaf {i}: path values {pv:?}, arm min {m}"))?;
                let s = span(&[m, mu[i], c]).unwrap();
                let closed = if m <= c { (m - c).abs().max(mu[i] - m) } else { mu[i] - c };
                ensure((s - closed).abs() <= 1e-12, || format!("leaf {i}: span {s} vs {closed}"))?;
                let term = (1.0 / (s * s)).min(4.0 / (report.gap * report.gap));
                ensure((report.terms[i] - term).abs() <= 1e-9 * term, || format!("leaf {i}: term"))?;
                checked += 1;
            }
        }
    }
    Ok(checked)
}

pub fn pruning_invariance() -> Result<usize, String> {
    let mut rng = rng(108);
    let pruned = LowerBoundOptions { theta_grid: 6, proof_set_limit: 100, prune: true };
    let full = LowerBoundOptions { prune: false, ..pruned };
    let mut checked = 0;
    while checked < MIN_CASES {
        let reward = if rng.random_bool(0.2) {
            RewardMap::Identity(rng.random_range(2..=4))
        } else {
            RewardMap::minimax(random_game(&mut rng, &small_params()))
        };
        let Some(mu) = separated_means(&mut rng, &reward) else { continue };
        match departure_family(&reward, &mu, &full) {
            Err(Error::TooManyProofSets { .. }) => continue,
            Ok((fam, _, _)) if fam.len() > 3000 => continue,
            _ => {}
        }
        let a = lower_bound_minimax(&reward, &mu, 0.05, &pruned).map_err(|e| e.to_string())?;
        let b = lower_bound_minimax(&reward, &mu, 0.05, &full).map_err(|e| e.to_string())?;
        let (ta, tb) = (a.tau_star(), b.tau_star());
        ensure((ta - tb).abs() <= 1e-6 * tb.max(1.0), || {
            format!("case {checked}: pruned {ta} vs full {tb} at {mu:?}")
        })?;
        checked += 1;
    }
    Ok(checked)
}

/// Independent solver for `min 1'n s.t. A n >= 1, n >= 0` in two or three
/// dimensions: scan directions `w` on the simplex, scale each to the
/// smallest feasible multiple and refine around the best direction.
pub fn grid_search_covering(rows: &[Vec<f64>], dim: usize) -> f64 {
    assert!(dim == 2 || dim == 3);
    let cost = |w: &[f64]| -> f64 {
        rows.iter()
            .map(|r| 1.0 / r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let scan = |center: &[f64], radius: f64, steps: usize| -> (f64, Vec<f64>) {
        let mut best = (f64::INFINITY, center.to_vec());
        let h = 2.0 * radius / steps as f64;
        let offsets: Vec<f64> = (0..=steps).map(|s| -radius + h * s as f64).collect();
        let mut try_point = |w: Vec<f64>| {
            if w.iter().all(|&x| x >= 0.0) {
                let c = cost(&w);
                if c < best.0 {
                    best = (c, w);
                }
            }
        };
        if dim == 2 {
            for &a in &offsets {
                let x = (center[0] + a).clamp(0.0, 1.0);
                try_point(vec![x, 1.0 - x]);
            }
        } else {
            for &a in &offsets {
                for &b in &offsets {
                    let (x, y) = (center[0] + a, center[1] + b);
                    if x >= 0.0 && y >= 0.0 && x + y <= 1.0 {
                        try_point(vec![x, y, 1.0 - x - y]);
                    }
                }
            }
        }
        best
    };
    let start = vec![1.0 / dim as f64; dim];
    let (mut val, mut w) = scan(&start, 1.0, 400);
    let mut radius = 2.0 / 400.0;
    for _ in 0..4 {
        let (v, nw) = scan(&w, radius, 40);
        if v <= val {
            val = v;
            w = nw;
        }
        radius /= 10.0;
    }
    val
}

/// Lower bound by the LP against [`grid_search_covering`] on the same
/// pruned departures, for random instances with at most three observables.
pub fn lp_matches_grid_search(cases: usize) -> Result<usize, String> {
    let mut rng = rng(109);
    let options = LowerBoundOptions { theta_grid: 16, ..Default::default() };
    let params = RandomGameParams { max_depth: 3, max_branching: 3, ..Default::default() };
    let mut checked = 0;
    while checked < cases {
        let reward = if rng.random_bool(0.5) {
            RewardMap::Identity(rng.random_range(2..=3))
        } else {
            let g = random_game(&mut rng, &params);
            if g.num_terminals() > 3 {
                continue;
            }
            RewardMap::minimax(g)
        };
        let Some(mu) = separated_means(&mut rng, &reward) else { continue };
        let dim = mu.len();
        let delta = [0.1, 0.05, 0.01][checked % 3];
        let r = 2.0 * (1.0f64 / (4.0 * delta)).ln();
        let (fam, _, _) = departure_family(&reward, &mu, &options).map_err(|e| e.to_string())?;
        let fam = structured_bai::bounds::prune_dominated(&fam);
        let lp = structured_bai::bounds::lower_bound_general(&fam, dim, delta)
            .map_err(|e| e.to_string())?
            .tau_star();
        let rows: Vec<Vec<f64>> = fam.iter().map(|d| d.iter().map(|x| x * x / r).collect()).collect();
        let grid = grid_search_covering(&rows, dim);
        ensure((lp - grid).abs() <= 0.01 * grid, || {
            format!("case {checked}: lp {lp} vs grid {grid} at {mu:?} ({reward:?})")
        })?;
        ensure(lp <= grid * (1.0 + 1e-9), || format!("case {checked}: lp {lp} above grid {grid}"))?;
        checked += 1;
    }
    Ok(checked)
}

/// Reference value of `beta(1, 0.1)`, evaluated in 50-digit arithmetic.
pub const BETA_1_0_1: f64 = 4.804682428737913;

/// Doubling-and-bisection against the linear scan on random triples.
pub fn round_bound_agreement(cases: usize) -> Result<usize, String> {
    use structured_bai::bounds::{sample_complexity, sample_complexity_scan};
    let mut rng = rng(110);
    for case in 0..cases {
        let h = if case % 10 == 0 { 0.0 } else { rng.random_range(0.0..60.0) };
        let delta = rng.random_range(0.001..0.2);
        let l = rng.random_range(1..=12);
        let a = sample_complexity(h, delta, l).map_err(|e| e.to_string())?;
        let b = sample_complexity_scan(h, delta, l).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("case {case}: H {h}, delta {delta}, L {l}: {a} vs {b}"))?;
    }
    Ok(cases)
}
