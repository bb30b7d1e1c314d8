//! Comparison algorithms and exact oracles: offline greedy, an exact
//! minimum-cost cover, the monotone fractional scheme of the earlier online
//! algorithm with its online rounding, and the naive online baseline.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::instance::{ArrivalOrder, SetSystem};
use crate::learn_or_cover::{CoverState, PurchaseReason};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyCover {
    pub sets: Vec<usize>,
    pub cost: f64,
}

fn check_coverable(sys: &SetSystem) -> Result<()> {
    match (0..sys.n()).find(|&v| sys.sets_containing(v).is_empty()) {
        Some(element) => Err(Error::Uncoverable { element }),
        None => Ok(()),
    }
}

/// Repeatedly picks the set with the lowest cost per newly covered target,
/// ties to the lowest id, until every target is covered. Only elements with
/// `needed[v]` count as new coverage. Returns the chosen sets in pick order.
fn greedy_over(sys: &SetSystem, needed: &mut [bool]) -> Result<Vec<usize>> {
    let mut remaining = needed.iter().filter(|&&b| b).count();
    let mut picks = Vec::new();
    while remaining > 0 {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..sys.m() {
            let fresh = sys.set(j).iter().filter(|&&e| needed[e]).count();
            if fresh == 0 {
                continue;
            }
            let ratio = sys.cost(j) / fresh as f64;
            if best.is_none_or(|(_, r)| ratio < r) {
                best = Some((j, ratio));
            }
        }
        let Some((j, _)) = best else {
            let element = needed.iter().position(|&b| b).unwrap_or(0);
            return Err(Error::Uncoverable { element });
        };
        for &e in sys.set(j) {
            if needed[e] {
                needed[e] = false;
                remaining -= 1;
            }
        }
        picks.push(j);
    }
    Ok(picks)
}

pub fn greedy_offline(sys: &SetSystem) -> Result<GreedyCover> {
    check_coverable(sys)?;
    let mut needed = vec![true; sys.n()];
    let sets = greedy_over(sys, &mut needed)?;
    let cost = sys.cover_cost(&sets);
    Ok(GreedyCover { sets, cost })
}

/// Greedy cover of the still-uncovered elements among `targets`, bought into
/// `cover` with reason `Backup`. Returns the cost spent.
pub fn greedy_cover_targets(sys: &SetSystem, targets: &[usize], cover: &mut CoverState, round: usize) -> Result<f64> {
    let mut needed = vec![false; sys.n()];
    for &v in targets {
        needed[v] = !cover.is_covered(v);
    }
    let picks = greedy_over(sys, &mut needed)?;
    Ok(picks.into_iter().map(|j| cover.buy(sys, round, j, PurchaseReason::Backup)).sum())
}

/// Buys the cheapest set containing every arrival that is still uncovered.
pub fn naive_online(sys: &SetSystem, order: &ArrivalOrder) -> Result<CoverState> {
    let mut cover = CoverState::new(sys.n());
    for (t, v) in order.iter().enumerate() {
        naive_step(sys, &mut cover, v, t + 1)?;
    }
    Ok(cover)
}

pub(crate) fn naive_step(sys: &SetSystem, cover: &mut CoverState, v: usize, round: usize) -> Result<f64> {
    if cover.is_covered(v) {
        return Ok(0.0);
    }
    let (j, _) = sys.cheapest_covering_set(v)?;
    Ok(cover.buy(sys, round, j, PurchaseReason::Backup))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofMode {
    Exhaustive,
    BranchAndBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptLimits {
    /// Search nodes before giving up with an inexact answer.
    pub node_budget: u64,
    /// Largest candidate count solved by plain enumeration.
    pub exhaustive_max: usize,
}

impl Default for OptLimits {
    fn default() -> Self {
        Self { node_budget: 20_000_000, exhaustive_max: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptCertificate {
    /// Chosen set ids, ascending.
    pub sets: Vec<usize>,
    pub cost: f64,
    pub mode: ProofMode,
    /// False when the node budget ran out; `cost` is then only an upper bound.
    pub exact: bool,
    pub lower_bound: f64,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn from_members(n: usize, members: &[usize]) -> Self {
        let mut b = Self::empty(n);
        for &e in members {
            b.0[e / 64] |= 1 << (e % 64);
        }
        b
    }

    fn get(&self, e: usize) -> bool {
        self.0[e / 64] >> (e % 64) & 1 == 1
    }

    fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn count_outside(&self, covered: &Bits) -> usize {
        self.0.iter().zip(&covered.0).map(|(a, c)| (a & !c).count_ones() as usize).sum()
    }
}

fn tie_eps(cost: f64) -> f64 {
    1e-9 * cost.abs().max(1.0)
}

/// Strictly better by cost, or equal cost (within tolerance) and a
/// lexicographically smaller sorted id list.
fn improves(cost: f64, ids: &[usize], best_cost: f64, best_ids: &[usize]) -> bool {
    if cost < best_cost - tie_eps(best_cost) {
        return true;
    }
    (cost - best_cost).abs() <= tie_eps(best_cost) && ids.cmp(best_ids) == Ordering::Less
}

/// Nonempty sets not dominated by another set: `S` is dropped when some
/// `S' ⊇ S` is cheaper, or equally cheap with a lower id.
pub fn undominated_sets(sys: &SetSystem) -> Vec<usize> {
    let bits: Vec<Bits> = sys.members().iter().map(|s| Bits::from_members(sys.n(), s)).collect();
    (0..sys.m())
        .filter(|&j| !sys.set(j).is_empty())
        .filter(|&j| {
            !(0..sys.m()).any(|k| {
                k != j
                    && sys.set(k).len() >= sys.set(j).len()
                    && (sys.cost(k) < sys.cost(j) || (sys.cost(k) == sys.cost(j) && k < j))
                    && bits[j].is_subset(&bits[k])
            })
        })
        .collect()
}

/// Minimum-cost cover with ties broken toward the lexicographically
/// smallest sorted id list.
pub fn exact_opt(sys: &SetSystem, limits: OptLimits) -> Result<OptCertificate> {
    check_coverable(sys)?;
    if undominated_sets(sys).len() <= limits.exhaustive_max {
        exhaustive_opt(sys)
    } else {
        branch_and_bound_opt(sys, limits)
    }
}

/// Enumerates every subset of the undominated sets. Refuses more than 24.
pub fn exhaustive_opt(sys: &SetSystem) -> Result<OptCertificate> {
    check_coverable(sys)?;
    let cand = undominated_sets(sys);
    if cand.len() > 24 {
        return Err(Error::CapExceeded { what: "exhaustive search candidates", size: cand.len() as u128, cap: 24 });
    }
    let n = sys.n();
    let bits: Vec<Bits> = cand.iter().map(|&j| Bits::from_members(n, sys.set(j))).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1u32 << cand.len()) {
        let mut covered = Bits::empty(n);
        let mut cost = 0.0;
        for (i, b) in bits.iter().enumerate() {
            if mask >> i & 1 == 1 {
                covered.union_with(b);
                cost += sys.cost(cand[i]);
            }
        }
        if covered.count() != n {
            continue;
        }
        let ids: Vec<usize> = (0..cand.len()).filter(|&i| mask >> i & 1 == 1).map(|i| cand[i]).collect();
        if best.as_ref().is_none_or(|(bc, bi)| improves(cost, &ids, *bc, bi)) {
            best = Some((cost, ids));
        }
    }
    let (cost, sets) = best.ok_or(Error::Uncoverable { element: 0 })?;
    Ok(OptCertificate {
        sets,
        cost,
        mode: ProofMode::Exhaustive,
        exact: true,
        lower_bound: cost,
        nodes: 1u64 << cand.len(),
    })
}

struct Search<'a> {
    sys: &'a SetSystem,
    bits: Vec<Bits>,
    allowed: Vec<bool>,
    best_cost: f64,
    best_ids: Vec<usize>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Search<'_> {
    /// Sum of cheapest allowed costs over a greedily built set of uncovered
    /// elements no two of which share an allowed set. `None` when some
    /// uncovered element has no allowed set left.
    fn lower_bound(&self, covered: &Bits) -> Option<f64> {
        let n = self.sys.n();
        let mut info = Vec::new();
        for v in (0..n).filter(|&v| !covered.get(v)) {
            let sets = self.sys.sets_containing(v);
            let mut kappa = f64::INFINITY;
            let mut degree = 0;
            for &s in sets.iter().filter(|&&s| self.allowed[s]) {
                kappa = kappa.min(self.sys.cost(s));
                degree += 1;
            }
            if degree == 0 {
                return None;
            }
            info.push((v, kappa, degree));
        }
        info.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)).then(a.0.cmp(&b.0)));
        let mut blocked = vec![false; self.sys.m()];
        let mut bound = 0.0;
        for (v, kappa, _) in info {
            let sets = self.sys.sets_containing(v);
            if sets.iter().any(|&s| self.allowed[s] && blocked[s]) {
                continue;
            }
            for &s in sets {
                blocked[s] = true;
            }
            bound += kappa;
        }
        Some(bound)
    }

    fn run(&mut self, covered: &Bits, chosen: &mut Vec<usize>, cost: f64) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let n = self.sys.n();
        if covered.count() == n {
            let mut ids = chosen.clone();
            ids.sort_unstable();
            if improves(cost, &ids, self.best_cost, &self.best_ids) {
                self.best_cost = cost;
                self.best_ids = ids;
            }
            return;
        }
        let Some(lb) = self.lower_bound(covered) else { return };
        if cost + lb > self.best_cost + tie_eps(self.best_cost) {
            return;
        }
        let pivot = (0..n)
            .filter(|&v| !covered.get(v))
            .min_by_key(|&v| (self.sys.sets_containing(v).iter().filter(|&&s| self.allowed[s]).count(), v))
            .expect("some element is uncovered");
        let mut options: Vec<(usize, f64)> = self
            .sys
            .sets_containing(pivot)
            .iter()
            .filter(|&&s| self.allowed[s])
            .map(|&s| (s, self.sys.cost(s) / self.bits[s].count_outside(covered) as f64))
            .collect();
        options.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        for &(s, _) in &options {
            let mut next = covered.clone();
            next.union_with(&self.bits[s]);
            chosen.push(s);
            self.run(&next, chosen, cost + self.sys.cost(s));
            chosen.pop();
            // later siblings explore covers without this set
            self.allowed[s] = false;
            if self.aborted {
                break;
            }
        }
        for &(s, _) in &options {
            self.allowed[s] = true;
        }
    }
}

/// Depth-first branch-and-bound on the uncovered element with the fewest
/// remaining options, seeded with the greedy cover.
pub fn branch_and_bound_opt(sys: &SetSystem, limits: OptLimits) -> Result<OptCertificate> {
    let greedy = greedy_offline(sys)?;
    let mut allowed = vec![false; sys.m()];
    for j in undominated_sets(sys) {
        allowed[j] = true;
    }
    let mut best_ids = greedy.sets.clone();
    best_ids.sort_unstable();
    let mut search = Search {
        sys,
        bits: sys.members().iter().map(|s| Bits::from_members(sys.n(), s)).collect(),
        allowed,
        best_cost: greedy.cost,
        best_ids,
        nodes: 0,
        budget: limits.node_budget,
        aborted: false,
    };
    let root = Bits::empty(sys.n());
    let root_bound = search.lower_bound(&root).unwrap_or(0.0);
    search.run(&root, &mut Vec::new(), 0.0);
    let exact = !search.aborted;
    Ok(OptCertificate {
        sets: search.best_ids,
        cost: search.best_cost,
        mode: ProofMode::BranchAndBound,
        exact,
        lower_bound: if exact { search.best_cost } else { root_bound },
        nodes: search.nodes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnFractional {
    pub x: Vec<f64>,
    /// `Σ_S min(ln n · x_S, 1)`.
    pub expected_size: f64,
}

fn bn_raise(sys: &SetSystem, x: &mut [f64], v: usize) -> bool {
    let sets = sys.sets_containing(v);
    let total: f64 = sets.iter().map(|&s| x[s]).sum();
    if total >= 1.0 {
        return false;
    }
    let delta = (1.0 - total) / sets.len() as f64;
    for &s in sets {
        x[s] += delta;
    }
    true
}

/// Monotone fractional solution: on each arrival with `Σ_{S∋v} x_S < 1`,
/// raise every set containing `v` by the same amount until the sum is 1.
/// Rounding happens once at the end, each set kept with probability
/// `min(ln n · x_S, 1)`; the expected number kept is returned exactly.
pub fn bn_fractional(sys: &SetSystem, order: &ArrivalOrder) -> Result<BnFractional> {
    if !sys.is_unit_cost() {
        return Err(Error::Precondition("the fractional scheme is defined for unit costs".into()));
    }
    check_coverable(sys)?;
    let mut x = vec![0.0; sys.m()];
    for v in order.iter() {
        bn_raise(sys, &mut x, v);
    }
    let scale = (sys.n().max(1) as f64).ln();
    let expected_size = x.iter().map(|&w| (scale * w).min(1.0)).sum();
    Ok(BnFractional { x, expected_size })
}

#[derive(Debug, Clone)]
pub struct BnOnlineRun {
    pub cover: CoverState,
    pub rounded: usize,
    pub patches: usize,
}

/// Online rounding of [`bn_fractional`]: each set draws a threshold
/// `θ_S ∈ (0, 1]` and is bought as soon as `ln n · x_S >= θ_S`. When an
/// arrival is still uncovered after that, its cheapest set is bought.
pub fn bn_online(sys: &SetSystem, order: &ArrivalOrder, rng: &mut RngStream) -> Result<BnOnlineRun> {
    if !sys.is_unit_cost() {
        return Err(Error::Precondition("the fractional scheme is defined for unit costs".into()));
    }
    check_coverable(sys)?;
    let scale = (sys.n().max(1) as f64).ln();
    let theta: Vec<f64> = (0..sys.m()).map(|_| 1.0 - rng.uniform()).collect();
    let mut bought = vec![false; sys.m()];
    let mut x = vec![0.0; sys.m()];
    let mut run = BnOnlineRun { cover: CoverState::new(sys.n()), rounded: 0, patches: 0 };
    for (t, v) in order.iter().enumerate() {
        let round = t + 1;
        if bn_raise(sys, &mut x, v) {
            for &s in sys.sets_containing(v) {
                if !bought[s] && scale * x[s] >= theta[s] {
                    bought[s] = true;
                    run.cover.buy(sys, round, s, PurchaseReason::Sampled);
                    run.rounded += 1;
                }
            }
        }
        if !run.cover.is_covered(v) {
            naive_step(sys, &mut run.cover, v, round)?;
            run.patches += 1;
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::t1;
    use proptest::prelude::*;

    #[test]
    fn greedy_on_t1() {
        let g = greedy_offline(&t1()).unwrap();
        assert_eq!(g.sets, vec![0, 1]);
        assert_eq!(g.cost, 2.0);
    }

    #[test]
    fn greedy_edge_cases() {
        let one = SetSystem::unit_cost(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(greedy_offline(&one).unwrap().sets, vec![0]);
        let empty = SetSystem::unit_cost(0, vec![vec![]]).unwrap();
        assert_eq!(greedy_offline(&empty).unwrap().cost, 0.0);
        let bad = SetSystem::new_unchecked(2, vec![vec![0]], vec![1.0]);
        assert!(matches!(greedy_offline(&bad), Err(Error::Uncoverable { element: 1 })));
    }

    #[test]
    fn exact_on_t1_prefers_lowest_ids() {
        let cert = exact_opt(&t1(), OptLimits::default()).unwrap();
        assert_eq!(cert.cost, 2.0);
        assert_eq!(cert.sets, vec![0, 1]);
        assert!(cert.exact);
        let bb = branch_and_bound_opt(&t1(), OptLimits::default()).unwrap();
        assert_eq!(bb.sets, vec![0, 1]);
    }

    #[test]
    fn exact_on_disjoint_singletons() {
        let n = 30;
        let sys = SetSystem::unit_cost(n, (0..n).map(|v| vec![v]).collect()).unwrap();
        let cert = exact_opt(&sys, OptLimits::default()).unwrap();
        assert_eq!(cert.mode, ProofMode::BranchAndBound);
        assert_eq!(cert.cost, n as f64);
        assert_eq!(cert.sets, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn node_budget_yields_inexact_bounds() {
        let mut rng = RngStream::new(4);
        let n = 40;
        let members: Vec<Vec<usize>> =
            (0..40).map(|_| (0..n).filter(|_| rng.coin(0.15)).collect()).chain((0..n).map(|v| vec![v])).collect();
        let sys = SetSystem::unit_cost(n, members).unwrap();
        let cert = branch_and_bound_opt(&sys, OptLimits { node_budget: 5, exhaustive_max: 0 }).unwrap();
        assert!(!cert.exact);
        assert!(cert.lower_bound <= cert.cost);
        assert!(sys.covers_all(&cert.sets));
    }

    #[test]
    fn naive_examples() {
        let cover = naive_online(&t1(), &ArrivalOrder::identity(3)).unwrap();
        let ids: Vec<usize> = cover.purchased().iter().map(|p| p.set).collect();
        assert_eq!(ids, vec![0, 1]);
        assert_eq!(cover.total_cost(), 2.0);
        let one = SetSystem::unit_cost(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(naive_online(&one, &ArrivalOrder::identity(3)).unwrap().total_cost(), 1.0);
    }

    #[test]
    fn bn_single_element() {
        let sys = SetSystem::unit_cost(1, vec![vec![0]]).unwrap();
        let frac = bn_fractional(&sys, &ArrivalOrder::identity(1)).unwrap();
        assert_eq!(frac.x, vec![1.0]);
        assert_eq!(frac.expected_size, 0.0);
        let run = bn_online(&sys, &ArrivalOrder::identity(1), &mut RngStream::new(0)).unwrap();
        assert_eq!(run.cover.total_cost(), 1.0);
        assert_eq!(run.patches, 1);
    }

    #[test]
    fn bn_two_element_triangle() {
        // sets {2} and {1,2} (1-based); element 2 arrives first, then 1
        let sys = SetSystem::unit_cost(2, vec![vec![1], vec![0, 1]]).unwrap();
        let frac = bn_fractional(&sys, &ArrivalOrder::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(frac.x, vec![0.5, 1.0]);
        let frac = bn_fractional(&sys, &ArrivalOrder::new(vec![0, 1]).unwrap()).unwrap();
        assert_eq!(frac.x, vec![0.0, 1.0]);
    }

    #[test]
    fn bn_online_matches_closed_form() {
        let sys = SetSystem::unit_cost(3, vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]]).unwrap();
        let order = ArrivalOrder::new(vec![1, 0, 2]).unwrap();
        let closed = bn_fractional(&sys, &order).unwrap().expected_size;
        let trials = 20_000;
        let mut rng = RngStream::new(6);
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..trials {
            let r = bn_online(&sys, &order, &mut rng).unwrap().rounded as f64;
            sum += r;
            sq += r * r;
        }
        let mean = sum / trials as f64;
        let se = ((sq / trials as f64 - mean * mean) / trials as f64).sqrt();
        assert!((mean - closed).abs() <= 3.0 * se, "{mean} vs {closed}");
    }

    fn arb_instance() -> impl Strategy<Value = SetSystem> {
        (1usize..12, 1usize..14, any::<u64>()).prop_map(|(n, m, seed)| {
            let mut rng = RngStream::new(seed);
            let mut members: Vec<Vec<usize>> = (0..m).map(|_| (0..n).filter(|_| rng.coin(0.35)).collect()).collect();
            for v in 0..n {
                if !members.iter().any(|s| s.contains(&v)) {
                    let j = rng.uniform_index(m).unwrap();
                    members[j].push(v);
                    members[j].sort_unstable();
                }
            }
            let costs = (0..m).map(|_| [1.0, 1.5, 2.0, 3.0][rng.uniform_index(4).unwrap()]).collect();
            SetSystem::new(n, members, costs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn branch_and_bound_agrees_with_enumeration(sys in arb_instance()) {
            let ex = exhaustive_opt(&sys).unwrap();
            let bb = branch_and_bound_opt(&sys, OptLimits::default()).unwrap();
            prop_assert!(bb.exact);
            prop_assert!((ex.cost - bb.cost).abs() < 1e-9);
            prop_assert_eq!(&ex.sets, &bb.sets);
            prop_assert!(sys.covers_all(&ex.sets));
            let g = greedy_offline(&sys).unwrap();
            prop_assert!(g.cost <= (1.0 + (sys.n() as f64).ln()) * ex.cost + 1e-9);
            prop_assert!(naive_online(&sys, &ArrivalOrder::identity(sys.n())).unwrap().total_cost() >= ex.cost - 1e-9);
        }

        #[test]
        fn bn_is_monotone(seed in 0u64..200, n in 1usize..30) {
            let mut rng = RngStream::new(seed);
            let members: Vec<Vec<usize>> = (0..n).map(|i| (n - 1 - i..n).collect()).collect();
            let sys = SetSystem::unit_cost(n, members).unwrap();
            let order = rng.shuffle(n);
            let mut x = vec![0.0; n];
            for v in order.iter() {
                let before = x.clone();
                bn_raise(&sys, &mut x, v);
                prop_assert!(x.iter().zip(&before).all(|(a, b)| a >= b));
                prop_assert!(sys.sets_containing(v).iter().map(|&s| x[s]).sum::<f64>() >= 1.0 - 1e-12);
            }
        }
    }
}
