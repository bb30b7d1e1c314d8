//! Random-order online set cover: LearnOrCover for general costs, its
//! unit-cost specialization, the exponential-time k-tuple variant, and the
//! guess-and-double wrapper for an unknown budget.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::instance::{ArrivalOrder, SetSystem};
use crate::kernel::FractionalState;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PurchaseReason {
    Sampled,
    Backup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Purchase {
    pub round: usize,
    pub set: usize,
    pub reason: PurchaseReason,
}

/// Sets bought so far and the elements they cover.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverState {
    purchased: Vec<Purchase>,
    covered: Vec<bool>,
    total_cost: f64,
    uncovered_count: usize,
}

impl CoverState {
    pub fn new(n: usize) -> Self {
        Self { purchased: Vec::new(), covered: vec![false; n], total_cost: 0.0, uncovered_count: n }
    }

    /// Records the purchase and returns its cost. Buying the same set twice
    /// is charged twice.
    pub fn buy(&mut self, sys: &SetSystem, round: usize, set: usize, reason: PurchaseReason) -> f64 {
        for &e in sys.set(set) {
            if !self.covered[e] {
                self.covered[e] = true;
                self.uncovered_count -= 1;
            }
        }
        self.purchased.push(Purchase { round, set, reason });
        let c = sys.cost(set);
        self.total_cost += c;
        c
    }

    pub fn is_covered(&self, v: usize) -> bool {
        self.covered[v]
    }

    pub fn covered(&self) -> &[bool] {
        &self.covered
    }

    pub fn purchased(&self) -> &[Purchase] {
        &self.purchased
    }

    /// Distinct purchased set ids, ascending.
    pub fn purchased_sets(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.purchased.iter().map(|p| p.set).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn uncovered_count(&self) -> usize {
        self.uncovered_count
    }

    pub fn uncovered(&self) -> impl Iterator<Item = usize> + '_ {
        self.covered.iter().enumerate().filter(|(_, &c)| !c).map(|(v, _)| v)
    }
}

/// What happened when one element arrived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub element: usize,
    pub uncovered_on_arrival: bool,
    pub kappa: f64,
    /// `Σ_{S∋v} x_S` before the round.
    pub x_v: f64,
    pub updated: bool,
    pub sampled_cost: f64,
    pub backup_cost: f64,
    /// `|<c,x> - β| / β` right after a multiplicative update.
    pub budget_error: Option<f64>,
}

impl RoundRecord {
    pub fn cost(&self) -> f64 {
        self.sampled_cost + self.backup_cost
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LocConfig {
    /// Skip the backup purchase when the sampled sets already cover the
    /// arriving element.
    pub skip_covered_backup: bool,
}

/// Initial weights `x_S = β / (c_S m')` over the sets of cost at most `β`.
pub fn loc_init(costs: &[f64], beta: f64) -> Result<FractionalState> {
    FractionalState::initial(costs, beta)
}

/// `Σ_{S∋v} x_S`.
pub fn coverage(sys: &SetSystem, x: &[f64], v: usize) -> f64 {
    sys.sets_containing(v).iter().map(|&s| x[s]).sum()
}

/// Draws each set independently with probability `min(κ x_S / β, 1)`.
pub fn sample_sets(state: &FractionalState, kappa: f64, rng: &mut RngStream) -> Vec<usize> {
    let scale = kappa / state.beta();
    let mut picked = Vec::new();
    for (s, &w) in state.x().iter().enumerate() {
        if w > 0.0 && rng.coin((scale * w).min(1.0)) {
            picked.push(s);
        }
    }
    picked
}

/// Multiplies `x_S` by `exp(κ / c_S)` for every `S ∋ v`, then restores the
/// budget.
pub fn multiplicative_update(sys: &SetSystem, state: &mut FractionalState, v: usize, kappa: f64) -> Result<()> {
    let x = state.x_mut();
    for &s in sys.sets_containing(v) {
        let exponent = kappa / sys.cost(s);
        debug_assert!(exponent <= 1.0 + 1e-12);
        x[s] *= exponent.exp();
    }
    state.renormalize(sys.costs())
}

/// One round of LearnOrCover for an arriving element that is still uncovered.
pub fn loc_step(
    sys: &SetSystem,
    state: &mut FractionalState,
    cover: &mut CoverState,
    v: usize,
    round: usize,
    config: LocConfig,
    rng: &mut RngStream,
) -> Result<RoundRecord> {
    let (cheapest, kappa) = sys.cheapest_covering_set(v)?;
    let x_v = coverage(sys, state.x(), v);
    let mut record = RoundRecord {
        round,
        element: v,
        uncovered_on_arrival: !cover.is_covered(v),
        kappa,
        x_v,
        updated: false,
        sampled_cost: 0.0,
        backup_cost: 0.0,
        budget_error: None,
    };
    if cover.is_covered(v) {
        return Ok(record);
    }
    for s in sample_sets(state, kappa, rng) {
        record.sampled_cost += cover.buy(sys, round, s, PurchaseReason::Sampled);
    }
    if x_v < 1.0 {
        multiplicative_update(sys, state, v, kappa)?;
        record.updated = true;
        record.budget_error = Some(state.budget_error(sys.costs()));
    }
    if !(config.skip_covered_backup && cover.is_covered(v)) {
        record.backup_cost = cover.buy(sys, round, cheapest, PurchaseReason::Backup);
    }
    Ok(record)
}

/// LearnOrCover with a fixed budget, driven one arrival at a time.
#[derive(Debug, Clone)]
pub struct LearnOrCover<'a> {
    sys: &'a SetSystem,
    state: FractionalState,
    cover: CoverState,
    config: LocConfig,
    round: usize,
}

impl<'a> LearnOrCover<'a> {
    pub fn new(sys: &'a SetSystem, beta: f64, config: LocConfig) -> Result<Self> {
        Ok(Self { sys, state: loc_init(sys.costs(), beta)?, cover: CoverState::new(sys.n()), config, round: 0 })
    }

    pub fn arrive(&mut self, v: usize, rng: &mut RngStream) -> Result<RoundRecord> {
        self.round += 1;
        loc_step(self.sys, &mut self.state, &mut self.cover, v, self.round, self.config, rng)
    }

    /// Restarts the weights at a new budget and keeps everything bought.
    pub fn reset_budget(&mut self, beta: f64) -> Result<()> {
        self.state = loc_init(self.sys.costs(), beta)?;
        Ok(())
    }

    pub fn system(&self) -> &'a SetSystem {
        self.sys
    }

    pub fn state(&self) -> &FractionalState {
        &self.state
    }

    pub fn cover(&self) -> &CoverState {
        &self.cover
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn into_cover(self) -> CoverState {
        self.cover
    }

    /// Overwrites the weights; used to replay snapshots.
    pub fn set_state(&mut self, state: FractionalState) {
        self.state = state;
    }
}

pub fn loc_run(
    sys: &SetSystem,
    order: &ArrivalOrder,
    beta: f64,
    config: LocConfig,
    rng: &mut RngStream,
) -> Result<(CoverState, Vec<RoundRecord>)> {
    check_order(sys, order)?;
    if sys.n() == 0 {
        return Ok((CoverState::new(0), Vec::new()));
    }
    let mut alg = LearnOrCover::new(sys, beta, config)?;
    let records = order.iter().map(|v| alg.arrive(v, rng)).collect::<Result<Vec<_>>>()?;
    Ok((alg.into_cover(), records))
}

fn check_order(sys: &SetSystem, order: &ArrivalOrder) -> Result<()> {
    if order.len() != sys.n() {
        return Err(Error::Precondition(format!("arrival order has {} entries for {} elements", order.len(), sys.n())));
    }
    Ok(())
}

fn require_unit_cost(sys: &SetSystem) -> Result<()> {
    if !sys.is_unit_cost() {
        return Err(Error::Precondition("algorithm requires unit costs".into()));
    }
    Ok(())
}

/// Unit-cost LearnOrCover: one set sampled from `x` per uncovered arrival,
/// weights of sets containing the element multiplied by `e`.
#[derive(Debug, Clone)]
pub struct UnitCostLearnOrCover<'a> {
    sys: &'a SetSystem,
    state: FractionalState,
    cover: CoverState,
    config: LocConfig,
    round: usize,
}

impl<'a> UnitCostLearnOrCover<'a> {
    pub fn new(sys: &'a SetSystem, config: LocConfig) -> Result<Self> {
        require_unit_cost(sys)?;
        Ok(Self {
            sys,
            state: FractionalState::initial(sys.costs(), 1.0)?,
            cover: CoverState::new(sys.n()),
            config,
            round: 0,
        })
    }

    pub fn arrive(&mut self, v: usize, rng: &mut RngStream) -> Result<RoundRecord> {
        self.round += 1;
        let round = self.round;
        let (backup, kappa) = self.sys.cheapest_covering_set(v)?;
        let x_v = coverage(self.sys, self.state.x(), v);
        let mut record = RoundRecord {
            round,
            element: v,
            uncovered_on_arrival: !self.cover.is_covered(v),
            kappa,
            x_v,
            updated: false,
            sampled_cost: 0.0,
            backup_cost: 0.0,
            budget_error: None,
        };
        if self.cover.is_covered(v) {
            return Ok(record);
        }
        let pick = rng.weighted_choice(self.state.x())?;
        record.sampled_cost = self.cover.buy(self.sys, round, pick, PurchaseReason::Sampled);
        if x_v < 1.0 {
            let x = self.state.x_mut();
            for &s in self.sys.sets_containing(v) {
                x[s] *= E;
            }
            self.state.renormalize(self.sys.costs())?;
            record.updated = true;
            record.budget_error = Some(self.state.budget_error(self.sys.costs()));
        }
        if !(self.config.skip_covered_backup && self.cover.is_covered(v)) {
            record.backup_cost = self.cover.buy(self.sys, round, backup, PurchaseReason::Backup);
        }
        Ok(record)
    }

    pub fn state(&self) -> &FractionalState {
        &self.state
    }

    pub fn cover(&self) -> &CoverState {
        &self.cover
    }

    pub fn into_cover(self) -> CoverState {
        self.cover
    }
}

pub fn unit_loc_run(
    sys: &SetSystem,
    order: &ArrivalOrder,
    config: LocConfig,
    rng: &mut RngStream,
) -> Result<(CoverState, Vec<RoundRecord>)> {
    require_unit_cost(sys)?;
    check_order(sys, order)?;
    if sys.n() == 0 {
        return Ok((CoverState::new(0), Vec::new()));
    }
    let mut alg = UnitCostLearnOrCover::new(sys, config)?;
    let records = order.iter().map(|v| alg.arrive(v, rng)).collect::<Result<Vec<_>>>()?;
    Ok((alg.into_cover(), records))
}

pub const DEFAULT_TUPLE_CAP: u128 = 2_000_000;

/// `C(m, k)`, or `None` on overflow.
pub fn binomial(m: usize, k: usize) -> Option<u128> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((m - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Surviving candidate k-tuples of set ids, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleFamily {
    k: usize,
    data: Vec<u32>,
}

impl TupleFamily {
    /// All k-subsets of `0..m` in lexicographic order.
    pub fn all(m: usize, k: usize, cap: u128) -> Result<Self> {
        if k == 0 || k > m {
            return Err(Error::InvalidParams(format!("tuple size k={k} must lie in 1..={m}")));
        }
        let size = binomial(m, k).unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::CapExceeded { what: "tuple family", size, cap });
        }
        let mut data = Vec::with_capacity(size as usize * k);
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            data.extend(idx.iter().map(|&s| s as u32));
            let Some(i) = (0..k).rev().find(|&i| idx[i] < m - k + i) else { break };
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
        Ok(Self { k, data })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tuple(&self, i: usize) -> &[u32] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        let mut sorted: Vec<u32> = tuple.iter().map(|&s| s as u32).collect();
        sorted.sort_unstable();
        self.data.chunks_exact(self.k).any(|t| t == sorted.as_slice())
    }

    /// Keeps the tuples with at least one set flagged in `hits`.
    pub fn retain_hitting(&mut self, hits: &[bool]) {
        let k = self.k;
        let mut write = 0;
        for read in 0..self.len() {
            if self.data[read * k..(read + 1) * k].iter().any(|&s| hits[s as usize]) {
                self.data.copy_within(read * k..(read + 1) * k, write * k);
                write += 1;
            }
        }
        self.data.truncate(write * k);
    }
}

#[derive(Debug, Clone)]
pub struct SimpleRun {
    pub cover: CoverState,
    pub records: Vec<RoundRecord>,
    pub family_sizes: Vec<usize>,
    /// Whether the watched tuple was still in the family at the end.
    pub watched_survived: Option<bool>,
}

/// The exponential-time variant: sample a uniform tuple from the surviving
/// family, buy a uniform member of it plus the lowest-id set containing the
/// element, and drop every tuple that misses the element.
pub fn simple_loc_run(
    sys: &SetSystem,
    order: &ArrivalOrder,
    k: usize,
    cap: u128,
    watched: Option<&[usize]>,
    rng: &mut RngStream,
) -> Result<SimpleRun> {
    require_unit_cost(sys)?;
    check_order(sys, order)?;
    let mut family = TupleFamily::all(sys.m(), k, cap)?;
    let mut cover = CoverState::new(sys.n());
    let mut records = Vec::with_capacity(sys.n());
    let mut family_sizes = Vec::with_capacity(sys.n());
    let mut hits = vec![false; sys.m()];
    let mut watched_alive = watched.map(|_| true);
    for (t, v) in order.iter().enumerate() {
        let round = t + 1;
        let (backup, kappa) = sys.cheapest_covering_set(v)?;
        let mut record = RoundRecord {
            round,
            element: v,
            uncovered_on_arrival: !cover.is_covered(v),
            kappa,
            x_v: f64::NAN,
            updated: false,
            sampled_cost: 0.0,
            backup_cost: 0.0,
            budget_error: None,
        };
        if !cover.is_covered(v) {
            let tuple = family.tuple(rng.uniform_index(family.len())?);
            let pick = tuple[rng.uniform_index(k)?] as usize;
            record.sampled_cost = cover.buy(sys, round, pick, PurchaseReason::Sampled);
            record.backup_cost = cover.buy(sys, round, backup, PurchaseReason::Backup);
        }
        let containing = sys.sets_containing(v);
        for &s in containing {
            hits[s] = true;
        }
        let before = family.len();
        family.retain_hitting(&hits);
        record.updated = family.len() < before;
        for &s in containing {
            hits[s] = false;
        }
        if let (Some(alive), Some(w)) = (watched_alive.as_mut(), watched) {
            *alive = *alive && w.iter().any(|s| containing.binary_search(s).is_ok());
        }
        if family.is_empty() {
            return Err(Error::InfeasibleK { k });
        }
        family_sizes.push(family.len());
        records.push(record);
    }
    if let (Some(alive), Some(w)) = (watched_alive.as_mut(), watched) {
        *alive = *alive && family.contains(w);
    }
    Ok(SimpleRun { cover, records, family_sizes, watched_survived: watched_alive })
}

pub const DEFAULT_PHASE_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct DoublingRun {
    pub cover: CoverState,
    pub records: Vec<RoundRecord>,
    /// Budget of each phase, in order.
    pub betas: Vec<f64>,
}

/// LearnOrCover with an unknown budget. Starts at the cost of the cheapest
/// set covering the first arrival and doubles the budget whenever the spend
/// of the current phase exceeds `C_phase·β·(ln m + ln n)`.
pub fn guess_and_double(
    sys: &SetSystem,
    order: &ArrivalOrder,
    config: LocConfig,
    c_phase: f64,
    rng: &mut RngStream,
) -> Result<DoublingRun> {
    check_order(sys, order)?;
    let Some(first) = order.iter().next() else {
        return Ok(DoublingRun { cover: CoverState::new(0), records: Vec::new(), betas: Vec::new() });
    };
    let log_mn = (sys.m() as f64).ln() + (sys.n() as f64).ln();
    let mut beta = sys.cheapest_covering_set(first)?.1;
    let mut betas = vec![beta];
    let mut alg = LearnOrCover::new(sys, beta, config)?;
    let mut phase_cost = 0.0;
    let mut records = Vec::with_capacity(sys.n());
    for v in order.iter() {
        let record = alg.arrive(v, rng)?;
        phase_cost += record.cost();
        records.push(record);
        if phase_cost > c_phase * beta * log_mn && alg.cover().uncovered_count() > 0 {
            beta *= 2.0;
            betas.push(beta);
            alg.reset_budget(beta)?;
            phase_cost = 0.0;
        }
    }
    Ok(DoublingRun { cover: alg.into_cover(), records, betas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::t1;
    use proptest::prelude::*;

    #[test]
    fn init_examples() {
        assert_eq!(loc_init(&[1.0, 1.0], 1.0).unwrap().x(), &[0.5, 0.5]);
        assert_eq!(loc_init(&[1.0, 3.0], 2.0).unwrap().x(), &[2.0, 0.0]);
        assert!(matches!(loc_init(&[5.0], 1.0), Err(Error::InfeasibleBudget { .. })));
    }

    #[test]
    fn single_set_round_costs_two() {
        let sys = SetSystem::new(1, vec![vec![0]], vec![1.0]).unwrap();
        let mut alg = LearnOrCover::new(&sys, 1.0, LocConfig::default()).unwrap();
        let r = alg.arrive(0, &mut RngStream::new(0)).unwrap();
        assert_eq!(r.sampled_cost, 1.0);
        assert!(!r.updated);
        assert_eq!(r.backup_cost, 1.0);
        assert_eq!(alg.cover().total_cost(), 2.0);
        assert_eq!(alg.state().x(), &[1.0]);
    }

    #[test]
    fn skip_flag_drops_redundant_backup() {
        let sys = SetSystem::new(1, vec![vec![0]], vec![1.0]).unwrap();
        let config = LocConfig { skip_covered_backup: true };
        let (cover, _) = loc_run(&sys, &ArrivalOrder::identity(1), 1.0, config, &mut RngStream::new(0)).unwrap();
        assert_eq!(cover.total_cost(), 1.0);
    }

    #[test]
    fn unit_update_matches_hand_value() {
        // v only in S1, x = (0.5, 0.5): post-update (e/(e+1), 1/(e+1))
        let sys = SetSystem::new(2, vec![vec![0], vec![1]], vec![1.0, 1.0]).unwrap();
        let mut state = loc_init(sys.costs(), 1.0).unwrap();
        multiplicative_update(&sys, &mut state, 0, 1.0).unwrap();
        assert!((state.x()[0] - E / (E + 1.0)).abs() < 1e-15);
        assert!((state.x()[1] - 1.0 / (E + 1.0)).abs() < 1e-15);

        let mut alg = UnitCostLearnOrCover::new(&sys, LocConfig::default()).unwrap();
        alg.arrive(0, &mut RngStream::new(1)).unwrap();
        assert!((alg.state().x()[0] - 0.731_058_578_630_004_9).abs() < 1e-12);
    }

    #[test]
    fn t1_runs_are_feasible_and_bounded() {
        let sys = t1();
        for seed in 0..50 {
            let mut rng = RngStream::new(seed);
            let order = rng.derive(1).shuffle(3);
            let (cover, records) = loc_run(&sys, &order, 2.0, LocConfig::default(), &mut rng).unwrap();
            assert_eq!(cover.uncovered_count(), 0);
            assert!(cover.covered().iter().all(|&c| c));
            let sum: f64 = cover.purchased().iter().map(|p| sys.cost(p.set)).sum();
            assert_eq!(sum, cover.total_cost());
            assert_eq!(records.len(), 3);
        }
    }

    #[test]
    fn empty_instance_costs_nothing() {
        let sys = SetSystem::new(0, vec![vec![]], vec![1.0]).unwrap();
        let (cover, records) =
            loc_run(&sys, &ArrivalOrder::identity(0), 1.0, LocConfig::default(), &mut RngStream::new(0)).unwrap();
        assert_eq!(cover.total_cost(), 0.0);
        assert!(records.is_empty());
    }

    #[test]
    fn runs_are_reproducible() {
        let sys = t1();
        let run = |seed| {
            let mut rng = RngStream::new(seed);
            loc_run(&sys, &ArrivalOrder::identity(3), 1.0, LocConfig::default(), &mut rng).unwrap()
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn unit_cost_rejects_weighted_instances() {
        assert!(matches!(
            unit_loc_run(&t1(), &ArrivalOrder::identity(3), LocConfig::default(), &mut RngStream::new(0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unit_cost_single_set() {
        let sys = SetSystem::new(3, vec![vec![0, 1, 2]], vec![1.0]).unwrap();
        for seed in 0..10 {
            let (cover, records) =
                unit_loc_run(&sys, &ArrivalOrder::identity(3), LocConfig::default(), &mut RngStream::new(seed))
                    .unwrap();
            assert!(cover.total_cost() <= 2.0);
            // v lies in every set, so X_v = 1 and there is no update
            assert!(!records[0].updated);
        }
    }

    #[test]
    fn expected_sampled_cost_equals_kappa() {
        let sys = t1();
        let state = loc_init(sys.costs(), 2.0).unwrap();
        let mut rng = RngStream::new(17);
        let rounds = 10_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..rounds {
            let c: f64 = sample_sets(&state, 1.0, &mut rng).iter().map(|&s| sys.cost(s)).sum();
            sum += c;
            sq += c * c;
        }
        let mean = sum / rounds as f64;
        let se = ((sq / rounds as f64 - mean * mean) / rounds as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(20, 3), Some(1140));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(3, 4), Some(0));
        assert_eq!(binomial(40, 2), Some(780));
    }

    #[test]
    fn tuple_family_enumeration() {
        let fam = TupleFamily::all(4, 2, DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(fam.len(), 6);
        assert_eq!(fam.tuple(0), &[0, 1]);
        assert_eq!(fam.tuple(5), &[2, 3]);
        assert!(matches!(TupleFamily::all(40, 10, DEFAULT_TUPLE_CAP), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn simple_prunes_tuples_missing_the_element() {
        // k = 1 on T1: once element 3 arrives, {S1} is gone; {S3} survives
        let sys = SetSystem::unit_cost(3, vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]]).unwrap();
        let order = ArrivalOrder::new(vec![2, 0, 1]).unwrap();
        let run = simple_loc_run(&sys, &order, 1, DEFAULT_TUPLE_CAP, Some(&[2]), &mut RngStream::new(3)).unwrap();
        assert_eq!(run.family_sizes[0], 2);
        assert_eq!(run.watched_survived, Some(true));
        assert_eq!(run.cover.uncovered_count(), 0);
    }

    #[test]
    fn simple_with_full_tuple_never_prunes() {
        let sys = SetSystem::unit_cost(3, vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]]).unwrap();
        let run = simple_loc_run(&sys, &ArrivalOrder::identity(3), 3, DEFAULT_TUPLE_CAP, None, &mut RngStream::new(0))
            .unwrap();
        assert!(run.family_sizes.iter().all(|&s| s == 1));
    }

    #[test]
    fn simple_detects_small_k() {
        let sys = SetSystem::unit_cost(2, vec![vec![0], vec![1]]).unwrap();
        assert!(matches!(
            simple_loc_run(&sys, &ArrivalOrder::identity(2), 1, DEFAULT_TUPLE_CAP, None, &mut RngStream::new(0)),
            Err(Error::InfeasibleK { k: 1 })
        ));
    }

    #[test]
    fn doubling_single_phase_when_first_guess_suffices() {
        let sys = SetSystem::new(3, vec![vec![0, 1, 2]], vec![1.0]).unwrap();
        let run = guess_and_double(&sys, &ArrivalOrder::identity(3), LocConfig::default(), 4.0, &mut RngStream::new(0))
            .unwrap();
        assert_eq!(run.betas, vec![1.0]);
        assert_eq!(run.cover.uncovered_count(), 0);
    }

    #[test]
    fn doubling_phases_bounded_by_log_of_gap() {
        // cheap singletons make the first guess tiny; the cheap cover costs 1
        let n = 64;
        let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        members.push((0..n).collect());
        let mut costs = vec![1e-3; n];
        costs.push(1.0);
        let sys = SetSystem::new(n, members, costs).unwrap();
        for seed in 0..20 {
            let mut rng = RngStream::new(seed);
            let order = rng.derive(1).shuffle(n);
            let run = guess_and_double(&sys, &order, LocConfig::default(), 4.0, &mut rng).unwrap();
            let opt = 64e-3;
            let bound = (opt / run.betas[0]).log2().ceil() as usize + 1;
            assert!(run.betas.len() <= bound + 1, "{} phases", run.betas.len());
            assert_eq!(run.cover.uncovered_count(), 0);
        }
    }

    proptest! {
        #[test]
        fn budget_and_monotonicity(seed in 0u64..1000, n in 1usize..25, m in 1usize..12) {
            let mut rng = RngStream::new(seed);
            let mut members: Vec<Vec<usize>> = (0..m)
                .map(|_| (0..n).filter(|_| rng.coin(0.3)).collect())
                .collect();
            members[0] = (0..n).collect();
            let costs: Vec<f64> = (0..m).map(|_| 0.5 + 2.0 * rng.uniform()).collect();
            let sys = SetSystem::new(n, members, costs).unwrap();
            let beta = sys.cost(0);
            let order = rng.derive(1).shuffle(n);
            let mut alg = LearnOrCover::new(&sys, beta, LocConfig::default()).unwrap();
            let mut last_cost = 0.0;
            let mut last_covered = 0;
            for v in order.iter() {
                let before = alg.state().x().to_vec();
                let r = alg.arrive(v, &mut rng).unwrap();
                prop_assert!(alg.state().budget_error(sys.costs()) <= 1e-9);
                if !r.updated {
                    prop_assert_eq!(alg.state().x(), before.as_slice());
                }
                prop_assert!(alg.cover().is_covered(v));
                prop_assert!(alg.cover().total_cost() >= last_cost);
                let covered = n - alg.cover().uncovered_count();
                prop_assert!(covered >= last_covered);
                last_cost = alg.cover().total_cost();
                last_covered = covered;
            }
        }
    }
}
