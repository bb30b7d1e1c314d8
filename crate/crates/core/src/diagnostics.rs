//! Potential-function traces and per-round checks.
//!
//! The potential is `Φ = C1·KL(x* ‖ x) + C2·β·ln(ρ/β)` where `ρ` sums the
//! covering cost `κ` of every element (or row) not yet covered, including
//! those that have not arrived.

use std::f64::consts::E;
use std::io::{BufRead, Write};

use crate::cip::{row_coverage, CipConfig, LearnOrCoverCip};
use crate::error::{Error, Result};
use crate::instance::{ArrivalOrder, CipInstance, SetSystem};
use crate::kernel::{phi_value, weighted_kl, FractionalState, CIP_C1, CIP_C2, GAMMA, SET_COVER_C1, SET_COVER_C2};
use crate::learn_or_cover::{coverage, multiplicative_update, sample_sets, LearnOrCover, LocConfig};
use crate::rng::RngStream;

pub const TRACE_HEADER: &str = "t,id,uncovered,kappa,Xv,sampled_cost,backup_cost,kl,rho,phi";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    /// 0-based element or row id.
    pub id: usize,
    /// Uncovered on arrival (for covering IPs: deficit above `γ`).
    pub uncovered: bool,
    pub kappa: f64,
    pub x_v: f64,
    /// Deficit on arrival: 1 or 0 for set cover, `Δ_i` for covering IPs.
    /// Not part of the CSV; parsed rows carry NaN.
    pub deficit: f64,
    pub sampled_cost: f64,
    pub backup_cost: f64,
    pub kl: f64,
    pub rho: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub initial_kl: f64,
    pub initial_rho: f64,
    pub initial_phi: f64,
    pub rows: Vec<TraceRow>,
    /// `|<c,x> - β| / β` after each multiplicative update.
    pub budget_errors: Vec<f64>,
    pub total_cost: f64,
}

impl Trace {
    pub fn max_budget_error(&self) -> f64 {
        self.budget_errors.iter().cloned().fold(0.0, f64::max)
    }
}

fn check_reference_cover(sys: &SetSystem, xstar: &[f64]) -> Result<()> {
    if xstar.len() != sys.m() {
        return Err(Error::Precondition(format!("reference has {} entries for {} sets", xstar.len(), sys.m())));
    }
    for v in 0..sys.n() {
        if coverage(sys, xstar, v) < 1.0 - 1e-9 {
            return Err(Error::Precondition(format!("reference does not cover element {}", v + 1)));
        }
    }
    Ok(())
}

/// Indicator vector of a list of set ids.
pub fn indicator(m: usize, sets: &[usize]) -> Vec<f64> {
    let mut x = vec![0.0; m];
    for &s in sets {
        x[s] = 1.0;
    }
    x
}

/// Runs LearnOrCover with budget `β` and records the potential after every
/// arrival, against the reference `xstar`.
pub fn trace_run(
    sys: &SetSystem,
    order: &ArrivalOrder,
    beta: f64,
    xstar: &[f64],
    config: LocConfig,
    rng: &mut RngStream,
) -> Result<Trace> {
    check_reference_cover(sys, xstar)?;
    let kappa = sys.kappas()?;
    let costs = sys.costs();
    let mut alg = LearnOrCover::new(sys, beta, config)?;
    let (c1, c2) = (SET_COVER_C1, SET_COVER_C2);
    let initial_kl = weighted_kl(xstar, alg.state().x(), costs)?;
    let initial_rho: f64 = kappa.iter().sum();
    let mut trace = Trace {
        beta,
        c1,
        c2,
        initial_kl,
        initial_rho,
        initial_phi: phi_value(initial_kl, initial_rho, beta, c1, c2),
        rows: Vec::with_capacity(sys.n()),
        budget_errors: Vec::new(),
        total_cost: 0.0,
    };
    let mut rho = initial_rho;
    for v in order.iter() {
        let r = alg.arrive(v, rng)?;
        if let Some(err) = r.budget_error {
            trace.budget_errors.push(err);
        }
        if r.uncovered_on_arrival {
            rho = alg.cover().uncovered().map(|u| kappa[u]).sum();
        }
        let kl = weighted_kl(xstar, alg.state().x(), costs)?;
        trace.rows.push(TraceRow {
            t: r.round,
            id: v,
            uncovered: r.uncovered_on_arrival,
            kappa: r.kappa,
            x_v: r.x_v,
            deficit: if r.uncovered_on_arrival { 1.0 } else { 0.0 },
            sampled_cost: r.sampled_cost,
            backup_cost: r.backup_cost,
            kl,
            rho,
            phi: phi_value(kl, rho, beta, c1, c2),
        });
    }
    trace.total_cost = alg.cover().total_cost();
    Ok(trace)
}

fn cip_rho(inst: &CipInstance, deficits: impl Fn(usize) -> f64) -> Result<f64> {
    let mut rho = 0.0;
    for i in 0..inst.n() {
        let d = deficits(i);
        if d > GAMMA {
            rho += inst.kappa(i, d)?.1;
        }
    }
    Ok(rho)
}

/// Covering-IP counterpart of [`trace_run`]. `xstar` must satisfy every row
/// fractionally.
pub fn trace_cip_run(
    inst: &CipInstance,
    order: &ArrivalOrder,
    beta: f64,
    xstar: &[f64],
    config: CipConfig,
    rng: &mut RngStream,
) -> Result<Trace> {
    if xstar.len() != inst.m() {
        return Err(Error::Precondition("reference length differs from the column count".into()));
    }
    for i in 0..inst.n() {
        if row_coverage(inst, xstar, i) < 1.0 - 1e-9 {
            return Err(Error::Precondition(format!("reference does not cover row {}", i + 1)));
        }
    }
    let costs = inst.costs();
    let (c1, c2) = (CIP_C1, CIP_C2);
    let mut alg = LearnOrCoverCip::new(inst, beta, config)?;
    let initial_kl = weighted_kl(xstar, alg.state().x(), costs)?;
    let initial_rho = cip_rho(inst, |_| 1.0)?;
    let mut trace = Trace {
        beta,
        c1,
        c2,
        initial_kl,
        initial_rho,
        initial_phi: phi_value(initial_kl, initial_rho, beta, c1, c2),
        rows: Vec::with_capacity(inst.n()),
        budget_errors: Vec::new(),
        total_cost: 0.0,
    };
    let mut rho = initial_rho;
    for i in order.iter() {
        let r = alg.arrive(i, rng)?;
        if let Some(err) = r.budget_error {
            trace.budget_errors.push(err);
        }
        if r.acted {
            let sol = alg.solution();
            rho = cip_rho(inst, |k| sol.deficit(k))?;
        }
        let kl = weighted_kl(xstar, alg.state().x(), costs)?;
        trace.rows.push(TraceRow {
            t: r.round,
            id: i,
            uncovered: r.acted,
            kappa: r.kappa,
            x_v: r.x_i,
            deficit: r.deficit_before,
            sampled_cost: r.sampled_cost,
            backup_cost: r.backup_cost,
            kl,
            rho,
            phi: phi_value(kl, rho, beta, c1, c2),
        });
    }
    trace.total_cost = alg.solution().total_cost();
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlViolation {
    pub t: usize,
    pub delta_kl: f64,
    pub bound: f64,
}

/// Rounds that acted with `X < Δ` must satisfy
/// `ΔKL <= (e-1)·κ·min(X, Δ) - κ + 1e-9`.
pub fn kl_bound_check(trace: &Trace) -> Vec<KlViolation> {
    let mut out = Vec::new();
    let mut prev = trace.initial_kl;
    for row in &trace.rows {
        let delta = if row.deficit.is_nan() { 1.0 } else { row.deficit };
        if row.uncovered && row.x_v < delta {
            let delta_kl = row.kl - prev;
            let bound = (E - 1.0) * row.kappa * row.x_v.min(delta) - row.kappa + 1e-9;
            if delta_kl > bound {
                out.push(KlViolation { t: row.t, delta_kl, bound });
            }
        }
        prev = row.kl;
    }
    out
}

/// Weights and coverage at some point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    pub state: FractionalState,
    pub covered: Vec<bool>,
}

impl ProbeState {
    pub fn of(run: &LearnOrCover<'_>) -> Self {
        Self { state: run.state().clone(), covered: run.cover().covered().to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeEstimate {
    /// Estimate of `E[ΔΦ + Δcost]` given that the next arrival is uncovered.
    pub mean: f64,
    pub se: f64,
    pub phi: f64,
    pub uncovered: usize,
}

/// Expected one-round change of `Φ + cost` from a snapshot. The arriving
/// element is averaged exactly over the uncovered elements; the sampled sets
/// are drawn `samples` times per element. The KL change is deterministic
/// given the element. When sampling covers everything the log term uses
/// `ln(ρ'/ρ) <= ρ'/ρ - 1 = -1` in place of `-inf`.
pub fn supermartingale_probe(
    sys: &SetSystem,
    snapshot: &ProbeState,
    xstar: &[f64],
    samples: usize,
    config: LocConfig,
    rng: &mut RngStream,
) -> Result<ProbeEstimate> {
    check_reference_cover(sys, xstar)?;
    if samples < 2 {
        return Err(Error::Precondition("probe needs at least 2 samples per element".into()));
    }
    let beta = snapshot.state.beta();
    let (c1, c2) = (SET_COVER_C1, SET_COVER_C2);
    let costs = sys.costs();
    let kappa = sys.kappas()?;
    let uncovered: Vec<usize> = (0..sys.n()).filter(|&v| !snapshot.covered[v]).collect();
    if uncovered.is_empty() {
        return Err(Error::Precondition("probe state has no uncovered element".into()));
    }
    let rho: f64 = uncovered.iter().map(|&u| kappa[u]).sum();
    let kl = weighted_kl(xstar, snapshot.state.x(), costs)?;
    let phi = phi_value(kl, rho, beta, c1, c2);
    if phi < 0.0 {
        return Err(Error::Precondition(format!("probe state has negative potential {phi}")));
    }
    let mut stamp = vec![0u32; sys.n()];
    let mut generation = 0u32;
    let (mut total, mut var_sum) = (0.0, 0.0);
    for &v in &uncovered {
        let kv = kappa[v];
        let delta_kl = if coverage(sys, snapshot.state.x(), v) < 1.0 {
            let mut next = snapshot.state.clone();
            multiplicative_update(sys, &mut next, v, kv)?;
            weighted_kl(xstar, next.x(), costs)? - kl
        } else {
            0.0
        };
        let (backup, _) = sys.cheapest_covering_set(v)?;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..samples {
            generation += 1;
            let picked = sample_sets(&snapshot.state, kv, rng);
            let mut cost: f64 = picked.iter().map(|&s| costs[s]).sum();
            let mut removed = 0.0;
            for &s in &picked {
                removed += newly_covered(sys, s, snapshot, &kappa, &mut stamp, generation);
            }
            let covered_v = stamp[v] == generation;
            if !(config.skip_covered_backup && covered_v) {
                cost += costs[backup];
                removed += newly_covered(sys, backup, snapshot, &kappa, &mut stamp, generation);
            }
            let rest = rho - removed;
            let log_ratio = if rest > 1e-12 * rho { (rest / rho).ln() } else { -1.0 };
            let value = c1 * delta_kl + c2 * beta * log_ratio + cost;
            sum += value;
            sq += value * value;
        }
        let s = samples as f64;
        let mean = sum / s;
        let var = ((sq - s * mean * mean) / (s - 1.0)).max(0.0);
        total += mean;
        var_sum += var / s;
    }
    let count = uncovered.len() as f64;
    Ok(ProbeEstimate { mean: total / count, se: var_sum.sqrt() / count, phi, uncovered: uncovered.len() })
}

/// Sum of `κ` over elements of set `s` that are uncovered in the snapshot and
/// not yet stamped with `generation`; stamps them.
fn newly_covered(
    sys: &SetSystem,
    s: usize,
    snapshot: &ProbeState,
    kappa: &[f64],
    stamp: &mut [u32],
    generation: u32,
) -> f64 {
    let mut removed = 0.0;
    for &e in sys.set(s) {
        if !snapshot.covered[e] && stamp[e] != generation {
            stamp[e] = generation;
            removed += kappa[e];
        }
    }
    removed
}

/// Up to 12 significant digits, shortest form.
pub fn sig12(v: f64) -> String {
    if v.is_finite() {
        let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
        format!("{rounded}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn write_trace_csv(rows: &[TraceRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.id + 1,
            u8::from(r.uncovered),
            sig12(r.kappa),
            sig12(r.x_v),
            sig12(r.sampled_cost),
            sig12(r.backup_cost),
            sig12(r.kl),
            sig12(r.rho),
            sig12(r.phi)
        )?;
    }
    Ok(())
}

pub fn parse_trace_csv(input: impl BufRead) -> Result<Vec<TraceRow>> {
    let mut lines = input.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).transpose()?;
    if header.as_deref().map(str::trim) != Some(TRACE_HEADER) {
        return Err(Error::parse(1, "missing trace header"));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let n = idx + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::parse(n, format!("expected 10 fields, found {}", f.len())));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].trim().parse().map_err(|_| Error::parse(n, format!("bad number '{}'", f[i])))
        };
        let int = |i: usize| -> Result<usize> {
            f[i].trim().parse().map_err(|_| Error::parse(n, format!("bad integer '{}'", f[i])))
        };
        let id = int(1)?;
        if id == 0 {
            return Err(Error::parse(n, "ids are 1-based"));
        }
        rows.push(TraceRow {
            t: int(0)?,
            id: id - 1,
            uncovered: int(2)? != 0,
            kappa: num(3)?,
            x_v: num(4)?,
            deficit: f64::NAN,
            sampled_cost: num(5)?,
            backup_cost: num(6)?,
            kl: num(7)?,
            rho: num(8)?,
            phi: num(9)?,
        });
    }
    Ok(rows)
}
