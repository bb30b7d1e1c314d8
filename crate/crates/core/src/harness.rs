//! Random-order trials, statistics, size sweeps and batched runs.
//!
//! Trial `t` of a run with seed `s` draws its arrival order from
//! `RngStream::new(s).derive(t).derive(ORDER)` and its algorithm randomness
//! from `.derive(ALGORITHM)`, so results never depend on thread count or
//! scheduling.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{bn_online, exact_opt, greedy_cover_targets, greedy_offline, naive_online, OptLimits};
use crate::cip::{cip_run, CipConfig};
use crate::diagnostics::sig12;
use crate::error::{Error, Result};
use crate::generators::{generate, GeneratorSpec, Meta};
use crate::instance::{ArrivalOrder, BatchedInstance, SetSystem};
use crate::io::AnyInstance;
use crate::learn_or_cover::{
    guess_and_double, loc_run, simple_loc_run, unit_loc_run, CoverState, LearnOrCover, LocConfig,
    DEFAULT_PHASE_CONSTANT, DEFAULT_TUPLE_CAP,
};
use crate::rng::{tags, RngStream};

/// How the budget `β` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    /// `β` equals the OPT reference (exact optimum or certified cover cost).
    KnownOpt,
    GuessDouble,
    Fixed(f64),
}

impl FromStr for BetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known-opt" => Ok(BetaMode::KnownOpt),
            "guess-double" => Ok(BetaMode::GuessDouble),
            _ => match s.strip_prefix("fixed:").map(str::parse::<f64>) {
                Some(Ok(v)) if v > 0.0 && v.is_finite() => Ok(BetaMode::Fixed(v)),
                _ => Err(Error::InvalidParams(format!(
                    "beta mode '{s}' is not one of known-opt, guess-double, fixed:<positive value>"
                ))),
            },
        }
    }
}

impl fmt::Display for BetaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaMode::KnownOpt => write!(f, "known-opt"),
            BetaMode::GuessDouble => write!(f, "guess-double"),
            BetaMode::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    LearnOrCover,
    UnitCost,
    Simple {
        k: usize,
    },
    Naive,
    /// Offline greedy; ignores the arrival order.
    Greedy,
    BnOnline,
    Cip,
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::LearnOrCover => "loc".into(),
            Algorithm::UnitCost => "unit-loc".into(),
            Algorithm::Simple { k } => format!("simple-loc:{k}"),
            Algorithm::Naive => "naive".into(),
            Algorithm::Greedy => "greedy".into(),
            Algorithm::BnOnline => "bn-online".into(),
            Algorithm::Cip => "cip".into(),
        }
    }

    fn uses_beta(&self) -> bool {
        matches!(self, Algorithm::LearnOrCover | Algorithm::Cip)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "loc" => Algorithm::LearnOrCover,
            "unit-loc" => Algorithm::UnitCost,
            "naive" => Algorithm::Naive,
            "greedy" => Algorithm::Greedy,
            "bn-online" => Algorithm::BnOnline,
            "cip" => Algorithm::Cip,
            _ => match s.strip_prefix("simple-loc:").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Algorithm::Simple { k },
                _ => {
                    return Err(Error::InvalidParams(format!(
                        "unknown algorithm '{s}' (loc, unit-loc, simple-loc:<k>, naive, greedy, bn-online, cip)"
                    )))
                }
            },
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub algorithm: String,
    pub instance: String,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    /// `1.96·std/√T`.
    pub ci: f64,
    pub costs: Vec<f64>,
}

impl TrialStats {
    pub fn from_costs(algorithm: &str, instance: &str, costs: Vec<f64>, opt: Option<f64>) -> Self {
        let t = costs.len();
        let n = t as f64;
        let mean = if t == 0 { 0.0 } else { costs.iter().sum::<f64>() / n };
        let std = if t < 2 { 0.0 } else { (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() };
        let ratio = opt.filter(|&o| o > 0.0 && t > 0).map(|o| costs.iter().map(|c| c / o).sum::<f64>() / n);
        Self {
            algorithm: algorithm.to_string(),
            instance: instance.to_string(),
            trials: t,
            mean,
            std,
            min: costs.iter().cloned().fold(f64::INFINITY, f64::min),
            max: costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            opt,
            ratio,
            ci: if t == 0 { 0.0 } else { 1.96 * std / n.sqrt() },
            costs,
        }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.std / (self.trials as f64).sqrt()
        }
    }
}

/// OPT reference: `provided` if given, otherwise an exact optimum when the
/// search finishes within its node budget.
pub fn resolve_opt(sys: &SetSystem, provided: Option<f64>) -> Result<f64> {
    if let Some(v) = provided {
        return Ok(v);
    }
    let cert = exact_opt(sys, OptLimits { node_budget: 2_000_000, ..OptLimits::default() })?;
    if cert.exact {
        Ok(cert.cost)
    } else {
        Err(Error::OracleUnavailable(format!(
            "exact search on m={} did not finish; supply the planted cover cost (the .meta planted_cost) as the reference",
            sys.m()
        )))
    }
}

fn beta_for(mode: BetaMode, opt: Option<f64>) -> Result<Option<f64>> {
    match mode {
        BetaMode::KnownOpt => {
            opt.map(Some).ok_or_else(|| Error::OracleUnavailable("known-opt mode needs an OPT reference".into()))
        }
        BetaMode::GuessDouble => Ok(None),
        BetaMode::Fixed(v) => Ok(Some(v)),
    }
}

/// Arrival order and algorithm stream for one trial.
pub fn trial_streams(seed: u64, trial: usize, n: usize) -> (ArrivalOrder, RngStream) {
    let root = RngStream::new(seed).derive(trial as u64);
    (root.derive(tags::ORDER).shuffle(n), root.derive(tags::ALGORITHM))
}

/// Cost of a single run of `algorithm` on `instance` for a given order.
pub fn run_once(
    algorithm: Algorithm,
    instance: &AnyInstance,
    order: &ArrivalOrder,
    beta: Option<f64>,
    rng: &mut RngStream,
) -> Result<f64> {
    let config = LocConfig::default();
    if algorithm == Algorithm::Cip {
        let beta = beta.ok_or_else(|| Error::InvalidParams("cip needs a known or fixed budget".into()))?;
        let (sol, _) = match instance {
            AnyInstance::Cip(c) => cip_run(c, order, beta, CipConfig::default(), rng)?,
            AnyInstance::SetCover(s) => cip_run(&s.to_cip(), order, beta, CipConfig::default(), rng)?,
            AnyInstance::Batched(b) => cip_run(&b.base().to_cip(), order, beta, CipConfig::default(), rng)?,
        };
        return Ok(sol.total_cost());
    }
    let sys = match instance {
        AnyInstance::SetCover(s) => s,
        AnyInstance::Batched(b) => b.base(),
        AnyInstance::Cip(_) => {
            return Err(Error::InvalidParams(format!("{algorithm} runs on set-cover instances only")));
        }
    };
    Ok(match algorithm {
        Algorithm::LearnOrCover => match beta {
            Some(b) => loc_run(sys, order, b, config, rng)?.0.total_cost(),
            None => guess_and_double(sys, order, config, DEFAULT_PHASE_CONSTANT, rng)?.cover.total_cost(),
        },
        Algorithm::UnitCost => unit_loc_run(sys, order, config, rng)?.0.total_cost(),
        Algorithm::Simple { k } => simple_loc_run(sys, order, k, DEFAULT_TUPLE_CAP, None, rng)?.cover.total_cost(),
        Algorithm::Naive => naive_online(sys, order)?.total_cost(),
        Algorithm::Greedy => greedy_offline(sys)?.cost,
        Algorithm::BnOnline => bn_online(sys, order, rng)?.cover.total_cost(),
        Algorithm::Cip => unreachable!(),
    })
}

/// `trials` independent random-order runs.
pub fn run_trials(
    algorithm: Algorithm,
    instance: &AnyInstance,
    instance_name: &str,
    trials: usize,
    seed: u64,
    beta_mode: BetaMode,
    opt: Option<f64>,
) -> Result<TrialStats> {
    let sys = match instance {
        AnyInstance::SetCover(s) => Some(s),
        AnyInstance::Batched(b) => Some(b.base()),
        AnyInstance::Cip(_) => None,
    };
    let opt = match (opt, sys) {
        (Some(v), _) => Some(v),
        (None, None) => None,
        (None, Some(s)) => match resolve_opt(s, None) {
            Ok(v) => Some(v),
            Err(e) if beta_mode == BetaMode::KnownOpt && algorithm.uses_beta() => return Err(e),
            Err(_) => None,
        },
    };
    let beta = if algorithm.uses_beta() { beta_for(beta_mode, opt)? } else { None };
    if algorithm == Algorithm::Cip && beta.is_none() {
        return Err(Error::InvalidParams("cip needs --beta known-opt or fixed:<v>".into()));
    }
    let n = match instance {
        AnyInstance::SetCover(s) => s.n(),
        AnyInstance::Batched(b) => b.base().n(),
        AnyInstance::Cip(c) => c.n(),
    };
    let costs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (order, mut rng) = trial_streams(seed, t, n);
            run_once(algorithm, instance, &order, beta, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(TrialStats::from_costs(&algorithm.name(), instance_name, costs, opt))
}

pub const CSV_HEADER: &str = "family,n,m,k,algorithm,trials,mean_cost,std,opt,ratio,ci";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub k: Option<usize>,
    pub algorithm: String,
    pub trials: usize,
    pub mean_cost: f64,
    pub std: f64,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub ci: f64,
}

impl SweepRow {
    pub fn from_stats(family: &str, n: usize, m: usize, k: Option<usize>, stats: &TrialStats) -> Self {
        Self {
            family: family.to_string(),
            n,
            m,
            k,
            algorithm: stats.algorithm.clone(),
            trials: stats.trials,
            mean_cost: stats.mean,
            std: stats.std,
            opt: stats.opt,
            ratio: stats.ratio,
            ci: stats.ci,
        }
    }

    pub fn to_csv(&self) -> String {
        let opt_str = |v: Option<f64>| v.map(sig12).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.n,
            self.m,
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            self.algorithm,
            self.trials,
            sig12(self.mean_cost),
            sig12(self.std),
            opt_str(self.opt),
            opt_str(self.ratio),
            sig12(self.ci)
        )
    }
}

pub fn write_csv(rows: &[SweepRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv())?;
    }
    Ok(())
}

pub fn parse_csv(input: impl BufRead) -> Result<Vec<SweepRow>> {
    let mut lines = input.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).transpose()?;
    if header.as_deref().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::parse(1, "missing results header"));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ln = idx + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(Error::parse(ln, format!("expected 11 fields, found {}", f.len())));
        }
        let bad = |i: usize| Error::parse(ln, format!("bad value '{}'", f[i]));
        let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad(i));
        let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(i));
        let opt_num = |i: usize| if f[i].is_empty() { Ok(None) } else { num(i).map(Some) };
        rows.push(SweepRow {
            family: f[0].to_string(),
            n: int(1)?,
            m: int(2)?,
            k: if f[3].is_empty() { None } else { Some(int(3)?) },
            algorithm: f[4].to_string(),
            trials: int(5)?,
            mean_cost: num(6)?,
            std: num(7)?,
            opt: opt_num(8)?,
            ratio: opt_num(9)?,
            ci: num(10)?,
        });
    }
    Ok(rows)
}

/// One line of a sweep grid: `family key=value ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub spec: GeneratorSpec,
    pub params: Vec<(String, String)>,
}

/// Parses a grid file. Blank lines and lines starting with `#` are skipped.
pub fn parse_grid(text: &str) -> Result<Vec<GridPoint>> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let family = tokens.next().unwrap_or_default();
        let params = tokens
            .map(|t| {
                t.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| Error::parse(idx + 1, format!("expected key=value, found '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = GeneratorSpec::from_params(family, &params).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        points.push(GridPoint { spec, params });
    }
    Ok(points)
}

fn opt_size(meta: &Meta) -> Option<usize> {
    meta.get("k")
        .or_else(|| meta.get("h_k"))
        .and_then(|v| v.parse().ok())
        .or_else(|| meta.get("opt_cover").map(|c| c.split_whitespace().count()))
}

/// Runs every algorithm on every grid point. Rows come out sorted by `n`
/// (stable, so grid order breaks ties), then in algorithm order.
pub fn sweep(
    grid: &[GridPoint],
    algorithms: &[Algorithm],
    trials: usize,
    seed: u64,
    beta_mode: BetaMode,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for point in grid {
        let generated = generate(&point.spec, seed)?;
        let sys = generated.set_system();
        let opt = generated.meta.opt_upper_bound();
        for &alg in algorithms {
            let stats = match &generated.instance {
                AnyInstance::Batched(b) => {
                    let opt_h =
                        opt.ok_or_else(|| Error::OracleUnavailable("batched point without a cover cost".into()))?;
                    let k_h = opt_size(&generated.meta).unwrap_or(0);
                    batched_run(BatchedAlgorithm::for_algorithm(alg)?, b, trials, seed, beta_mode, opt_h, k_h)?.stats
                }
                inst => run_trials(alg, inst, point.spec.family(), trials, seed, beta_mode, opt)?,
            };
            rows.push(SweepRow::from_stats(point.spec.family(), sys.n(), sys.m(), opt_size(&generated.meta), &stats));
        }
    }
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchedAlgorithm {
    /// LearnOrCover fed the batch one element at a time.
    LocPerElement,
    /// Greedy cover of the batch's uncovered elements.
    GreedyPerBatch,
    Naive,
}

impl BatchedAlgorithm {
    /// The batched counterpart of an element-wise algorithm.
    pub fn for_algorithm(alg: Algorithm) -> Result<Self> {
        match alg {
            Algorithm::LearnOrCover => Ok(BatchedAlgorithm::LocPerElement),
            Algorithm::Greedy => Ok(BatchedAlgorithm::GreedyPerBatch),
            Algorithm::Naive => Ok(BatchedAlgorithm::Naive),
            other => Err(Error::InvalidParams(format!("{other} has no batched form (use loc, greedy or naive)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BatchedAlgorithm::LocPerElement => "loc-per-element",
            BatchedAlgorithm::GreedyPerBatch => "greedy-per-batch",
            BatchedAlgorithm::Naive => "naive",
        }
    }
}

impl FromStr for BatchedAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loc" | "loc-per-element" => Ok(BatchedAlgorithm::LocPerElement),
            "greedy" | "greedy-per-batch" => Ok(BatchedAlgorithm::GreedyPerBatch),
            "naive" => Ok(BatchedAlgorithm::Naive),
            _ => Err(Error::InvalidParams(format!("unknown batched algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchedStats {
    pub stats: TrialStats,
    /// `½·k·H_N` for `k = |OPT(H)|` and `N` batches.
    pub lower_bound: f64,
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Batches arrive in uniformly random order; each batch is presented in
/// ascending element order and must be covered before the next arrives.
pub fn batched_once(
    algorithm: BatchedAlgorithm,
    inst: &BatchedInstance,
    batch_order: &ArrivalOrder,
    beta: Option<f64>,
    rng: &mut RngStream,
) -> Result<CoverState> {
    let sys = inst.base();
    let mut cover = CoverState::new(sys.n());
    match algorithm {
        BatchedAlgorithm::LocPerElement => {
            let elements: Vec<usize> = batch_order.iter().flat_map(|b| inst.batches()[b].iter().copied()).collect();
            let order = ArrivalOrder::new(elements)?;
            cover = match beta {
                Some(b) => {
                    let mut alg = LearnOrCover::new(sys, b, LocConfig::default())?;
                    for v in order.iter() {
                        alg.arrive(v, rng)?;
                    }
                    alg.into_cover()
                }
                None => guess_and_double(sys, &order, LocConfig::default(), DEFAULT_PHASE_CONSTANT, rng)?.cover,
            };
        }
        BatchedAlgorithm::GreedyPerBatch => {
            for (t, b) in batch_order.iter().enumerate() {
                greedy_cover_targets(sys, &inst.batches()[b], &mut cover, t + 1)?;
            }
        }
        BatchedAlgorithm::Naive => {
            let mut round = 0;
            for b in batch_order.iter() {
                for &v in &inst.batches()[b] {
                    round += 1;
                    crate::baselines::naive_step(sys, &mut cover, v, round)?;
                }
            }
        }
    }
    debug_assert_eq!(cover.uncovered_count(), 0);
    Ok(cover)
}

/// `trials` runs of a batched algorithm. `opt_h` is the cost of an optimal
/// cover of the inner instance and `k_h` its number of sets.
pub fn batched_run(
    algorithm: BatchedAlgorithm,
    inst: &BatchedInstance,
    trials: usize,
    seed: u64,
    beta_mode: BetaMode,
    opt_h: f64,
    k_h: usize,
) -> Result<BatchedStats> {
    let problems = crate::instance::Validate::validate(inst);
    if !problems.is_empty() {
        return Err(Error::Precondition(format!("invalid batched instance: {}", problems[0])));
    }
    let beta = beta_for(beta_mode, Some(opt_h))?;
    let b = inst.b();
    let costs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (order, mut rng) = trial_streams(seed, t, b);
            batched_once(algorithm, inst, &order, beta, &mut rng).map(|c| c.total_cost())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(BatchedStats {
        stats: TrialStats::from_costs(algorithm.name(), "product-batched", costs, Some(opt_h)),
        lower_bound: 0.5 * k_h as f64 * harmonic(b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_planted;
    use crate::instance::fixtures::t1;

    #[test]
    fn naive_on_t1_always_costs_two() {
        let inst = AnyInstance::SetCover(t1());
        let stats = run_trials(Algorithm::Naive, &inst, "t1", 10, 3, BetaMode::KnownOpt, None).unwrap();
        assert_eq!(stats.mean, 2.0);
        assert_eq!(stats.std, 0.0);
        assert_eq!(stats.opt, Some(2.0));
        assert_eq!(stats.ratio, Some(1.0));
    }

    #[test]
    fn single_trial_has_zero_spread() {
        let inst = AnyInstance::SetCover(t1());
        let stats = run_trials(Algorithm::LearnOrCover, &inst, "t1", 1, 3, BetaMode::KnownOpt, None).unwrap();
        assert_eq!((stats.std, stats.ci), (0.0, 0.0));
    }

    #[test]
    fn stats_are_deterministic_and_thread_independent() {
        let p = gen_planted(60, 40, 6, 0.1, 0.0, 2).unwrap();
        let inst = AnyInstance::SetCover(p.sys);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                run_trials(Algorithm::LearnOrCover, &inst, "p", 24, 11, BetaMode::KnownOpt, Some(p.cover_cost)).unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        assert_eq!(a.costs.len(), 24);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("known-opt".parse::<BetaMode>().unwrap(), BetaMode::KnownOpt);
        assert_eq!("fixed:2.5".parse::<BetaMode>().unwrap(), BetaMode::Fixed(2.5));
        assert!("fixed:-1".parse::<BetaMode>().is_err());
        assert_eq!("simple-loc:3".parse::<Algorithm>().unwrap(), Algorithm::Simple { k: 3 });
        assert!("simple-loc:0".parse::<Algorithm>().is_err());
        for a in ["loc", "unit-loc", "naive", "greedy", "bn-online", "cip"] {
            assert_eq!(a.parse::<Algorithm>().unwrap().name(), a);
        }
    }

    #[test]
    fn sweep_rows_sorted_and_round_trip() {
        let grid = parse_grid(
            "# two sizes, larger first\nupper-triangular n=32\n\nupper-triangular n=16\nplanted n=20 m=12 k=3\n",
        )
        .unwrap();
        let rows = sweep(&grid, &[Algorithm::Naive, Algorithm::LearnOrCover], 5, 1, BetaMode::KnownOpt).unwrap();
        assert_eq!(rows.len(), 6);
        let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![16, 16, 20, 20, 32, 32]);
        assert_eq!(rows[2].k, Some(3));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let parsed = parse_csv(buf.as_slice()).unwrap();
        let mut again = Vec::new();
        write_csv(&parsed, &mut again).unwrap();
        assert_eq!(buf, again);
        assert_eq!(parsed[0].family, "upper-triangular");
    }

    #[test]
    fn sweep_runs_batched_points_in_batches() {
        let grid = parse_grid("product-batched n=4\n").unwrap();
        let rows = sweep(&grid, &[Algorithm::Greedy, Algorithm::Naive], 6, 2, BetaMode::KnownOpt).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.algorithm.as_str()).collect();
        assert_eq!(names, ["greedy-per-batch", "naive"]);
        assert_eq!(rows[0].k, Some(4));
        assert!(sweep(&grid, &[Algorithm::BnOnline], 2, 2, BetaMode::KnownOpt).is_err());
    }

    #[test]
    fn grid_errors_carry_line_numbers() {
        assert!(matches!(parse_grid("planted n=4 k=2\nbogus n=3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_grid("planted n=4 k\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn batched_single_batch_pays_at_least_opt() {
        let h = gen_planted(6, 5, 2, 0.2, 0.0, 3).unwrap();
        let inst = crate::generators::gen_product_batched(1, &h.sys, 0).unwrap();
        let opt = resolve_opt(&h.sys, None).unwrap();
        for alg in [BatchedAlgorithm::LocPerElement, BatchedAlgorithm::GreedyPerBatch, BatchedAlgorithm::Naive] {
            let s = batched_run(alg, &inst, 20, 1, BetaMode::KnownOpt, opt, 2).unwrap();
            assert!(s.stats.min >= opt - 1e-9);
        }
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(64) - 4.743_890_903_705_767).abs() < 1e-12);
    }
}
