//! The acceptance suite: ten named checks, each returning a pass/fail report
//! with the measured quantities.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::baselines::{bn_fractional, bn_online, exact_opt, greedy_offline, naive_online, OptLimits};
use crate::cip::{feasibility_check, scale_solution, CipConfig, LearnOrCoverCip};
use crate::diagnostics::{
    indicator, kl_bound_check, supermartingale_probe, trace_cip_run, trace_run, ProbeState, Trace,
};
use crate::error::{Error, Result};
use crate::generators::{gen_planted, gen_product_batched, gen_upper_triangular};
use crate::harness::{batched_run, run_trials, trial_streams, Algorithm, BatchedAlgorithm, BetaMode};
use crate::instance::{CipInstance, SetSystem, DEFICIT_EPS};
use crate::io::AnyInstance;
use crate::kernel::{truncated_bernoulli_sum, BUDGET_RTOL, CRS_ALPHA, GAMMA};
use crate::learn_or_cover::{
    guess_and_double, loc_run, simple_loc_run, unit_loc_run, LearnOrCover, LocConfig, DEFAULT_PHASE_CONSTANT,
    DEFAULT_TUPLE_CAP,
};
use crate::rng::RngStream;

pub const CHECK_NAMES: [&str; 10] = [
    "budget-invariant",
    "kl-bound",
    "supermartingale",
    "separation",
    "log-growth",
    "simple-loc",
    "cip-feasibility",
    "batched-lower-bound",
    "crs",
    "oracle-sanity",
];

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Runs one named check, or every check for `"all"`.
pub fn run_named(name: &str, seed: u64) -> Result<Vec<CheckReport>> {
    if name == "all" {
        return CHECK_NAMES.iter().map(|n| run_check(n, seed)).collect();
    }
    Ok(vec![run_check(name, seed)?])
}

pub fn run_check(name: &str, seed: u64) -> Result<CheckReport> {
    let start = Instant::now();
    let (key, limit, outcome): (&'static str, Option<u64>, Result<(bool, String)>) = match name {
        "budget-invariant" => ("budget-invariant", Some(10), budget_invariant(seed)),
        "kl-bound" => ("kl-bound", None, kl_bound(seed)),
        "supermartingale" => ("supermartingale", Some(60), supermartingale(seed)),
        "separation" => ("separation", Some(300), separation(seed)),
        "log-growth" => ("log-growth", Some(600), log_growth(seed)),
        "simple-loc" => ("simple-loc", Some(120), simple_loc(seed)),
        "cip-feasibility" => ("cip-feasibility", None, cip_feasibility(seed)),
        "batched-lower-bound" => ("batched-lower-bound", None, batched_lower_bound(seed)),
        "crs" => ("crs", None, crs(seed)),
        "oracle-sanity" => ("oracle-sanity", None, oracle_sanity(seed)),
        _ => {
            return Err(Error::InvalidParams(format!(
                "unknown check '{name}'; expected one of {} or all",
                CHECK_NAMES.join(", ")
            )))
        }
    };
    let (mut passed, mut detail) = outcome?;
    let elapsed = start.elapsed();
    if let Some(secs) = limit {
        if elapsed > Duration::from_secs(secs) {
            passed = false;
            detail += &format!("; exceeded the {secs}s limit");
        }
    }
    Ok(CheckReport { name: key, passed, detail, elapsed })
}

fn sub_seed(seed: u64, tag: u64, i: usize) -> u64 {
    RngStream::new(seed).derive(tag).derive(i as u64).path_key()
}

/// LearnOrCover and CIP traces on planted instances with `n = m = 256` and
/// `k = 16`, against the planted cover. Each run gets its own instance.
pub fn invariant_traces(seed: u64, runs: usize) -> Result<Vec<Trace>> {
    let per_run = (0..runs)
        .into_par_iter()
        .map(|i| {
            let p = gen_planted(256, 256, 16, 1.0 / 16.0, 0.0, sub_seed(seed, 1, i))?;
            let xstar = indicator(p.sys.m(), &p.cover);
            let (order, rng) = trial_streams(seed, i, p.sys.n());
            let loc = trace_run(&p.sys, &order, p.cover_cost, &xstar, LocConfig::default(), &mut rng.derive(1))?;
            let cip =
                trace_cip_run(&p.sys.to_cip(), &order, p.cover_cost, &xstar, CipConfig::default(), &mut rng.derive(2))?;
            Ok(vec![loc, cip])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_run.into_iter().flatten().collect())
}

fn budget_invariant(seed: u64) -> Result<(bool, String)> {
    let traces = invariant_traces(seed, 100)?;
    let worst = traces.iter().map(Trace::max_budget_error).fold(0.0, f64::max);
    let updates: usize = traces.iter().map(|t| t.budget_errors.len()).sum();
    Ok((
        worst <= BUDGET_RTOL,
        format!("{} runs, {updates} updates, max |<c,x>-β|/β = {worst:.3e} (tol {BUDGET_RTOL:e})", traces.len()),
    ))
}

fn kl_bound(seed: u64) -> Result<(bool, String)> {
    let traces = invariant_traces(seed, 100)?;
    let violations: Vec<_> = traces.iter().flat_map(kl_bound_check).collect();
    let checked: usize = traces.iter().map(|t| t.rows.len()).sum();
    let mut detail = format!("{} traces, {checked} rounds, {} violations", traces.len(), violations.len());
    if let Some(v) = violations.first() {
        detail += &format!("; first at t={} ΔKL={} bound={}", v.t, v.delta_kl, v.bound);
    }
    Ok((violations.is_empty(), detail))
}

fn supermartingale(seed: u64) -> Result<(bool, String)> {
    const STATES: usize = 20;
    let estimates = (0..STATES)
        .into_par_iter()
        .map(|s| {
            let p = gen_planted(64, 64, 8, 1.0 / 8.0, 0.0, sub_seed(seed, 3, s))?;
            let xstar = indicator(p.sys.m(), &p.cover);
            let mut draw = RngStream::new(seed).derive(3).derive(s as u64);
            for attempt in 0..1000u64 {
                let (order, rng) = trial_streams(draw.path_key(), attempt as usize, p.sys.n());
                let steps = draw.uniform_index(p.sys.n())?;
                let mut run = LearnOrCover::new(&p.sys, p.cover_cost, LocConfig::default())?;
                let mut alg_rng = rng.derive(1);
                for v in order.iter().take(steps) {
                    run.arrive(v, &mut alg_rng)?;
                }
                let snapshot = ProbeState::of(&run);
                match supermartingale_probe(&p.sys, &snapshot, &xstar, 2000, LocConfig::default(), &mut rng.derive(2)) {
                    Ok(est) => return Ok((est, p.cover_cost)),
                    Err(Error::Precondition(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::Precondition("no probe state with an uncovered element and Φ >= 0 found".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = estimates.iter().map(|(e, beta)| (e.mean + 3.0 * e.se) / beta).fold(f64::NEG_INFINITY, f64::max);
    let mean_drift = estimates.iter().map(|(e, _)| e.mean).sum::<f64>() / STATES as f64;
    Ok((
        worst <= 0.05,
        format!("{STATES} states, max (mean+3SE)/β = {worst:.4} (tol 0.05), average drift {mean_drift:.3}"),
    ))
}

fn separation(seed: u64) -> Result<(bool, String)> {
    let mut ratios = Vec::new();
    let mut detail = Vec::new();
    for n in [256usize, 1024, 4096] {
        let ut = gen_upper_triangular(n, sub_seed(seed, 4, n))?;
        let (order, _) = trial_streams(seed, 0, n);
        let bn = bn_fractional(&ut.sys, &order)?.expected_size;
        let loc = run_trials(
            Algorithm::LearnOrCover,
            &AnyInstance::SetCover(ut.sys),
            "upper-triangular",
            200,
            seed,
            BetaMode::KnownOpt,
            Some(1.0),
        )?;
        ratios.push(bn / loc.mean);
        detail.push(format!("n={n}: bn={bn:.2} loc={:.2} ratio={:.3}", loc.mean, bn / loc.mean));
    }
    let big_enough = ratios[2] >= 2.0;
    let monotone = ratios.windows(2).all(|w| w[1] >= w[0]);
    Ok((
        big_enough && monotone,
        format!("{}; ratio@4096>=2: {big_enough}, nondecreasing: {monotone}", detail.join(", ")),
    ))
}

fn log_growth(seed: u64) -> Result<(bool, String)> {
    let mut ratios = Vec::new();
    let mut normalized = Vec::new();
    let mut detail = Vec::new();
    for e in [8u32, 10, 12] {
        let n = 1usize << e;
        let p = gen_planted(n, n, 16, 1.0 / 16.0, 0.0, sub_seed(seed, 5, n))?;
        let stats = run_trials(
            Algorithm::LearnOrCover,
            &AnyInstance::SetCover(p.sys),
            "planted",
            100,
            seed,
            BetaMode::KnownOpt,
            Some(p.cover_cost),
        )?;
        let norm = stats.mean / (p.cover_cost * ((n * n) as f64).ln());
        let ratio = stats.ratio.unwrap_or(f64::NAN);
        normalized.push(norm);
        ratios.push(ratio);
        detail.push(format!("n=2^{e}: cost/(β ln nm)={norm:.3} ratio={ratio:.3}"));
    }
    let growth = ratios[2] / ratios[0];
    let bounded = normalized.iter().all(|&v| v <= 4.0);
    Ok((bounded && growth <= 1.8, format!("{}; growth 2^12 vs 2^8 = {growth:.3} (tol 1.8)", detail.join(", "))))
}

fn simple_loc(seed: u64) -> Result<(bool, String)> {
    let (n, m, k) = (60usize, 20usize, 3usize);
    let p = gen_planted(n, m, k, 1.0 / k as f64, 0.0, sub_seed(seed, 6, 0))?;
    let cert = exact_opt(&p.sys, OptLimits::default())?;
    let watched = if cert.sets.len() == k { cert.sets.clone() } else { p.cover.clone() };
    let runs = (0..200usize)
        .into_par_iter()
        .map(|t| {
            let (order, mut rng) = trial_streams(seed, t, n);
            let run = simple_loc_run(&p.sys, &order, k, DEFAULT_TUPLE_CAP, Some(&watched), &mut rng)?;
            Ok((run.cover.total_cost(), run.watched_survived == Some(true)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = runs.iter().map(|r| r.0).sum::<f64>() / runs.len() as f64;
    let pruned = runs.iter().filter(|r| !r.1).count();
    let bound = 40.0 * k as f64 * ((m * n) as f64).ln();
    Ok((
        mean <= bound && pruned == 0,
        format!("OPT={} mean={mean:.2} bound={bound:.1}, optimal tuple pruned in {pruned}/200 trials", cert.cost),
    ))
}

/// Random CIP with coefficients drawn from `{0, 1/4, 1/2, 1}`; rows that come
/// out empty get one coefficient forced to 1.
pub fn random_cip(rng: &mut RngStream, max_dim: usize) -> Result<CipInstance> {
    const LEVELS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
    let n = 1 + rng.uniform_index(max_dim)?;
    let m = 1 + rng.uniform_index(max_dim)?;
    let density = 0.05 + 0.3 * rng.uniform();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::new();
        for j in 0..m {
            if rng.uniform() < density {
                let a = LEVELS[rng.uniform_index(4)?];
                if a > 0.0 {
                    row.push((j, a));
                }
            }
        }
        if row.is_empty() {
            row.push((rng.uniform_index(m)?, 1.0));
        }
        rows.push(row);
    }
    let costs = (0..m).map(|_| 0.5 + 1.5 * rng.uniform()).collect();
    CipInstance::new(m, rows, costs)
}

fn cip_feasibility(seed: u64) -> Result<(bool, String)> {
    let outcomes = (0..100usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed).derive(7).derive(i as u64);
            let inst = random_cip(&mut rng, 128)?;
            let beta = (0..inst.n()).map(|r| inst.kappa(r, 1.0).map(|k| k.1)).sum::<Result<f64>>()?.max(1.0) / 4.0;
            let beta = beta.max(inst.costs().iter().cloned().fold(f64::INFINITY, f64::min));
            let (order, _) = trial_streams(seed, i, inst.n());
            let mut alg_rng = rng.derive(1);
            let mut alg = LearnOrCoverCip::new(&inst, beta, CipConfig::default())?;
            let mut problems = Vec::new();
            let mut arrived = Vec::new();
            for i_row in order.iter() {
                let rec = alg.arrive(i_row, &mut alg_rng)?;
                arrived.push(i_row);
                if rec.acted && rec.deficit_after != 0.0 {
                    problems.push(format!("row {} ended its round at deficit {}", i_row + 1, rec.deficit_after));
                }
                for &r in &arrived {
                    let d = alg.solution().deficit(r);
                    if d > GAMMA + DEFICIT_EPS {
                        problems.push(format!("arrived row {} at deficit {d}", r + 1));
                    }
                }
            }
            let scaled = scale_solution(alg.solution().z());
            let report = feasibility_check(&inst, &scaled, 1.0);
            if !report.is_feasible() {
                problems.push(format!("3z leaves {} rows below 1", report.violations.len()));
            }
            Ok((inst.n(), inst.m(), problems))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<&String> = outcomes.iter().flat_map(|o| &o.2).collect();
    let rows: usize = outcomes.iter().map(|o| o.0).sum();
    let mut detail = format!("100 instances, {rows} rows, {} problems", failures.len());
    if let Some(f) = failures.first() {
        detail += &format!("; first: {f}");
    }
    Ok((failures.is_empty(), detail))
}

/// First seed at or after `start` whose planted `n=12, m=8, k=4, p=0.3`
/// instance has exact optimum 4.
pub fn batched_inner_instance(start: u64) -> Result<(SetSystem, u64)> {
    for s in start..start + 10_000 {
        let p = gen_planted(12, 8, 4, 0.3, 0.0, s)?;
        let cert = exact_opt(&p.sys, OptLimits::default())?;
        if cert.exact && (cert.cost - 4.0).abs() < 1e-9 {
            return Ok((p.sys, s));
        }
    }
    Err(Error::Precondition("no planted instance with exact optimum 4 in 10000 seeds".into()))
}

fn batched_lower_bound(seed: u64) -> Result<(bool, String)> {
    let (h, h_seed) = batched_inner_instance(seed)?;
    let inst = gen_product_batched(64, &h, seed)?;
    let mut passed = true;
    let mut detail = vec![format!("H seed {h_seed}")];
    for alg in [BatchedAlgorithm::LocPerElement, BatchedAlgorithm::GreedyPerBatch, BatchedAlgorithm::Naive] {
        let s = batched_run(alg, &inst, 1000, seed, BetaMode::KnownOpt, 4.0, 4)?;
        let ok = s.stats.mean >= s.lower_bound - 3.0 * s.stats.se();
        passed &= ok;
        detail.push(format!(
            "{}: mean={:.2} se={:.3} bound={:.3}",
            alg.name(),
            s.stats.mean,
            s.stats.se(),
            s.lower_bound
        ));
    }
    Ok((passed, detail.join(", ")))
}

fn crs(seed: u64) -> Result<(bool, String)> {
    let results = (0..200usize)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed).derive(9).derive(c as u64);
            let terms = 1 + rng.uniform_index(20)?;
            let p: Vec<f64> = (0..terms).map(|_| rng.uniform()).collect();
            let b: Vec<f64> = (0..terms).map(|_| rng.uniform()).collect();
            let delta = GAMMA + (1.0 - GAMMA) * rng.uniform();
            let ew: f64 = p.iter().zip(&b).map(|(p, b)| p * b).sum();
            let (mean, se) = truncated_bernoulli_sum(&p, &b, delta, 100_000, &mut rng.derive(1))?;
            Ok(mean - (CRS_ALPHA * ew.min(delta) - 3.0 * se))
        })
        .collect::<Result<Vec<f64>>>()?;
    let slack = results.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((slack >= 0.0, format!("200 configurations, min slack over α·min(E[W],Δ) - 3SE = {slack:.4}")))
}

/// Random set system with `m <= max_m` sets; every element is placed in at
/// least one set.
pub fn random_small_system(rng: &mut RngStream, max_n: usize, max_m: usize, unit: bool) -> Result<SetSystem> {
    let n = 1 + rng.uniform_index(max_n)?;
    let m = 1 + rng.uniform_index(max_m)?;
    let density = 0.1 + 0.4 * rng.uniform();
    let mut members = vec![Vec::new(); m];
    for v in 0..n {
        let mut placed = false;
        for set in members.iter_mut() {
            if rng.uniform() < density {
                set.push(v);
                placed = true;
            }
        }
        if !placed {
            members[rng.uniform_index(m)?].push(v);
        }
    }
    let costs = (0..m).map(|_| if unit { 1.0 } else { 1.0 + 2.0 * rng.uniform() }).collect();
    SetSystem::new(n, members, costs)
}

fn oracle_sanity(seed: u64) -> Result<(bool, String)> {
    let problems = (0..200usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed).derive(10).derive(i as u64);
            let unit = i % 2 == 0;
            let sys = random_small_system(&mut rng, 20, 15, unit)?;
            let opt = exact_opt(&sys, OptLimits::default())?;
            let (order, alg) = trial_streams(seed, i, sys.n());
            let mut problems = Vec::new();
            let greedy = greedy_offline(&sys)?.cost;
            if greedy > (1.0 + (sys.n() as f64).ln()) * opt.cost + 1e-9 {
                problems.push(format!("instance {i}: greedy {greedy} above (1+ln n)·OPT"));
            }
            let config = LocConfig::default();
            let mut online = vec![
                ("loc", loc_run(&sys, &order, opt.cost, config, &mut alg.derive(1))?.0.total_cost()),
                (
                    "guess-double",
                    guess_and_double(&sys, &order, config, DEFAULT_PHASE_CONSTANT, &mut alg.derive(2))?
                        .cover
                        .total_cost(),
                ),
                ("naive", naive_online(&sys, &order)?.total_cost()),
                (
                    "cip",
                    crate::cip::cip_run(&sys.to_cip(), &order, opt.cost, CipConfig::default(), &mut alg.derive(3))?
                        .0
                        .total_cost(),
                ),
            ];
            if unit {
                online.push(("unit-loc", unit_loc_run(&sys, &order, config, &mut alg.derive(4))?.0.total_cost()));
                online.push(("bn-online", bn_online(&sys, &order, &mut alg.derive(5))?.cover.total_cost()));
                let k = opt.sets.len();
                online.push((
                    "simple-loc",
                    simple_loc_run(&sys, &order, k, DEFAULT_TUPLE_CAP, None, &mut alg.derive(6))?.cover.total_cost(),
                ));
            }
            for (name, cost) in online {
                if cost < opt.cost - 1e-9 {
                    problems.push(format!("instance {i}: {name} cost {cost} below OPT {}", opt.cost));
                }
            }
            if !opt.exact {
                problems.push(format!("instance {i}: exact search hit its node budget"));
            }
            Ok(problems)
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<String> = problems.into_iter().flatten().collect();
    let mut detail = format!("200 instances, {} problems", all.len());
    if let Some(f) = all.first() {
        detail += &format!("; first: {f}");
    }
    Ok((all.is_empty(), detail))
}
