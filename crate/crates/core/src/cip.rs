//! LearnOrCover for covering integer programs `min <c,z>, Az >= 1, z >= 0`
//! with rows arriving in random order.

use crate::error::{Error, Result};
use crate::instance::{deficit_from_activity, ArrivalOrder, CipInstance};
use crate::kernel::{FractionalState, GAMMA};
use crate::rng::RngStream;

/// Upper clamp on the per-column sampling intensity `y_j`.
pub const Y_CLAMP: f64 = 1e9;

/// Integer solution with a per-row activity cache `<a_i, z>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CipSolution {
    z: Vec<u64>,
    activity: Vec<f64>,
    arrived: Vec<bool>,
    total_cost: f64,
}

impl CipSolution {
    pub fn new(inst: &CipInstance) -> Self {
        Self { z: vec![0; inst.m()], activity: vec![0.0; inst.n()], arrived: vec![false; inst.n()], total_cost: 0.0 }
    }

    /// Adds `copies` of column `j` and returns their cost.
    pub fn add(&mut self, inst: &CipInstance, j: usize, copies: u64) -> f64 {
        if copies == 0 {
            return 0.0;
        }
        self.z[j] += copies;
        for &(i, a) in inst.column(j) {
            self.activity[i] += a * copies as f64;
        }
        let cost = inst.cost(j) * copies as f64;
        self.total_cost += cost;
        cost
    }

    pub fn z(&self) -> &[u64] {
        &self.z
    }

    pub fn activity(&self, i: usize) -> f64 {
        self.activity[i]
    }

    pub fn deficit(&self, i: usize) -> f64 {
        deficit_from_activity(self.activity[i])
    }

    pub fn arrived(&self) -> &[bool] {
        &self.arrived
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    /// Rows whose deficit still exceeds `γ`.
    pub fn unsettled(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.activity.len()).filter(|&i| self.deficit(i) > GAMMA)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CipConfig {
    /// Size the backup by the deficit left after sampling instead of the
    /// deficit on arrival.
    pub tight_backup: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CipRoundRecord {
    pub round: usize,
    pub row: usize,
    pub acted: bool,
    pub deficit_before: f64,
    pub kappa: f64,
    /// `<a_i, x>` before the round.
    pub x_i: f64,
    pub updated: bool,
    pub sampled_cost: f64,
    pub backup_cost: f64,
    pub deficit_after: f64,
    pub budget_error: Option<f64>,
}

impl CipRoundRecord {
    pub fn cost(&self) -> f64 {
        self.sampled_cost + self.backup_cost
    }
}

pub fn cip_init(costs: &[f64], beta: f64) -> Result<FractionalState> {
    FractionalState::initial(costs, beta)
}

/// `<a_i, x>`.
pub fn row_coverage(inst: &CipInstance, x: &[f64], i: usize) -> f64 {
    inst.row(i).iter().map(|&(j, a)| a * x[j]).sum()
}

/// `⌈q⌉`, treating values within `1e-9` of an integer as that integer so
/// that rounding noise in `Δ/a` never buys an extra copy.
pub fn snapped_ceil(q: f64) -> u64 {
    let r = q.round();
    if (q - r).abs() <= 1e-9 * q.abs().max(1.0) {
        r.max(0.0) as u64
    } else {
        q.ceil().max(0.0) as u64
    }
}

/// Copies of every column drawn as `⌊y_j⌋ + Ber(y_j - ⌊y_j⌋)` with
/// `y = κ x / β`. Returned as `(column, copies)` for nonzero draws.
pub fn sample_columns(state: &FractionalState, kappa: f64, rng: &mut RngStream) -> Vec<(usize, u64)> {
    let scale = kappa / state.beta();
    let mut draws = Vec::new();
    for (j, &w) in state.x().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let y = (scale * w).clamp(0.0, Y_CLAMP);
        let base = y.floor();
        let copies = base as u64 + u64::from(rng.coin(y - base));
        if copies > 0 {
            draws.push((j, copies));
        }
    }
    draws
}

/// `x_j *= exp(κ a_ij / c_j)` on the row's columns, then renormalize.
pub fn cip_update(inst: &CipInstance, state: &mut FractionalState, i: usize, kappa: f64) -> Result<()> {
    let x = state.x_mut();
    for &(j, a) in inst.row(i) {
        let exponent = kappa * a / inst.cost(j);
        if exponent > 1.0 + 1e-9 {
            return Err(Error::Domain(format!("update exponent {exponent} exceeds 1 on row {i}, column {j}")));
        }
        x[j] *= exponent.exp();
    }
    state.renormalize(inst.costs())
}

pub fn cip_step(
    inst: &CipInstance,
    state: &mut FractionalState,
    sol: &mut CipSolution,
    i: usize,
    round: usize,
    config: CipConfig,
    rng: &mut RngStream,
) -> Result<CipRoundRecord> {
    sol.arrived[i] = true;
    let deficit = sol.deficit(i);
    let x_i = row_coverage(inst, state.x(), i);
    let mut record = CipRoundRecord {
        round,
        row: i,
        acted: false,
        deficit_before: deficit,
        kappa: 0.0,
        x_i,
        updated: false,
        sampled_cost: 0.0,
        backup_cost: 0.0,
        deficit_after: deficit,
        budget_error: None,
    };
    let (k_star, kappa) = inst.kappa(i, deficit).map_err(|_| Error::EmptyRow { row: i })?;
    record.kappa = kappa;
    if deficit <= GAMMA {
        return Ok(record);
    }
    record.acted = true;
    for (j, copies) in sample_columns(state, kappa, rng) {
        record.sampled_cost += sol.add(inst, j, copies);
    }
    if x_i < deficit {
        cip_update(inst, state, i, kappa)?;
        record.updated = true;
        record.budget_error = Some(state.budget_error(inst.costs()));
    }
    let backup_deficit = if config.tight_backup { sol.deficit(i) } else { deficit };
    if backup_deficit > 0.0 {
        let a = inst.row(i).iter().find(|&&(j, _)| j == k_star).map(|&(_, a)| a).unwrap_or(1.0);
        record.backup_cost = sol.add(inst, k_star, snapped_ceil(backup_deficit / a));
    }
    record.deficit_after = sol.deficit(i);
    Ok(record)
}

/// Algorithm state for one run, driven one row at a time.
#[derive(Debug, Clone)]
pub struct LearnOrCoverCip<'a> {
    inst: &'a CipInstance,
    state: FractionalState,
    sol: CipSolution,
    config: CipConfig,
    round: usize,
}

impl<'a> LearnOrCoverCip<'a> {
    pub fn new(inst: &'a CipInstance, beta: f64, config: CipConfig) -> Result<Self> {
        Ok(Self { inst, state: cip_init(inst.costs(), beta)?, sol: CipSolution::new(inst), config, round: 0 })
    }

    pub fn arrive(&mut self, i: usize, rng: &mut RngStream) -> Result<CipRoundRecord> {
        self.round += 1;
        cip_step(self.inst, &mut self.state, &mut self.sol, i, self.round, self.config, rng)
    }

    pub fn instance(&self) -> &'a CipInstance {
        self.inst
    }

    pub fn state(&self) -> &FractionalState {
        &self.state
    }

    pub fn solution(&self) -> &CipSolution {
        &self.sol
    }

    pub fn into_solution(self) -> CipSolution {
        self.sol
    }
}

pub fn cip_run(
    inst: &CipInstance,
    order: &ArrivalOrder,
    beta: f64,
    config: CipConfig,
    rng: &mut RngStream,
) -> Result<(CipSolution, Vec<CipRoundRecord>)> {
    if order.len() != inst.n() {
        return Err(Error::Precondition(format!("arrival order has {} entries for {} rows", order.len(), inst.n())));
    }
    if inst.n() == 0 {
        return Ok((CipSolution::new(inst), Vec::new()));
    }
    let mut alg = LearnOrCoverCip::new(inst, beta, config)?;
    let records = order.iter().map(|i| alg.arrive(i, rng)).collect::<Result<Vec<_>>>()?;
    Ok((alg.into_solution(), records))
}

/// Three copies of every column: covers each row with `<a_i, z> >= 1 - γ`.
pub fn scale_solution(z: &[u64]) -> Vec<u64> {
    z.iter().map(|&v| 3 * v).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// `min_i <a_i, z>`, or `+inf` for an instance without rows.
    pub min_activity: f64,
    /// Rows with `<a_i, z> < θ`, with their activity.
    pub violations: Vec<(usize, f64)>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates every row of `inst` from scratch against the threshold `θ`.
pub fn feasibility_check(inst: &CipInstance, z: &[u64], theta: f64) -> FeasibilityReport {
    let mut report = FeasibilityReport { min_activity: f64::INFINITY, violations: Vec::new() };
    for i in 0..inst.n() {
        let act = inst.activity(i, z);
        report.min_activity = report.min_activity.min(act);
        if act < theta {
            report.violations.push((i, act));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::t1;
    use crate::learn_or_cover::{loc_run, LocConfig};
    use proptest::prelude::*;

    #[test]
    fn init_examples() {
        assert_eq!(cip_init(&[1.0, 1.0], 1.0).unwrap().x(), &[0.5, 0.5]);
        assert_eq!(cip_init(&[1.0], 3.0).unwrap().x(), &[3.0]);
        assert!(cip_init(&[2.0], 1.0).is_err());
    }

    #[test]
    fn single_entry_round() {
        let inst = CipInstance::new(1, vec![vec![(0, 1.0)]], vec![1.0]).unwrap();
        let (sol, records) =
            cip_run(&inst, &ArrivalOrder::identity(1), 1.0, CipConfig::default(), &mut RngStream::new(0)).unwrap();
        assert_eq!(sol.z(), &[2]);
        assert_eq!(sol.total_cost(), 2.0);
        assert!(!records[0].updated);
        assert_eq!(records[0].deficit_after, 0.0);
    }

    #[test]
    fn settled_row_is_a_no_op() {
        let inst = CipInstance::new(1, vec![vec![(0, 1.0)], vec![(0, 0.5)]], vec![1.0]).unwrap();
        let mut alg = LearnOrCoverCip::new(&inst, 1.0, CipConfig::default()).unwrap();
        let mut rng = RngStream::new(0);
        alg.arrive(0, &mut rng).unwrap();
        let x = alg.state().x().to_vec();
        let r = alg.arrive(1, &mut rng).unwrap();
        assert!(!r.acted);
        assert_eq!(r.cost(), 0.0);
        assert_eq!(alg.state().x(), x.as_slice());
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scale_solution(&[1]), vec![3]);
        assert_eq!(scale_solution(&[]), Vec::<u64>::new());
        let inst = CipInstance::new(1, vec![vec![(0, 0.5)]], vec![1.0]).unwrap();
        assert!(feasibility_check(&inst, &scale_solution(&[1]), 1.0).is_feasible());
    }

    #[test]
    fn feasibility_report_lists_deficient_rows() {
        let inst = CipInstance::new(2, vec![vec![(0, 1.0)], vec![(1, 0.5)], vec![(0, 0.5), (1, 0.5)]], vec![1.0, 1.0])
            .unwrap();
        let all = feasibility_check(&inst, &[0, 0], 1.0);
        assert_eq!(all.violations.len(), 3);
        assert_eq!(all.min_activity, 0.0);
        let mixed = feasibility_check(&inst, &[1, 1], 1.0);
        assert_eq!(mixed.violations, vec![(1, 0.5)]);
        assert!(feasibility_check(&inst, &[1, 2], 1.0).is_feasible());
    }

    #[test]
    fn snapping() {
        assert_eq!(snapped_ceil(2.0 + 1e-13), 2);
        assert_eq!(snapped_ceil(1.2), 2);
        assert_eq!(snapped_ceil(0.5 / 0.25), 2);
    }

    #[test]
    fn empty_instance() {
        let inst = CipInstance::new(1, vec![], vec![1.0]).unwrap();
        let (sol, _) =
            cip_run(&inst, &ArrivalOrder::identity(0), 1.0, CipConfig::default(), &mut RngStream::new(0)).unwrap();
        assert_eq!(sol.total_cost(), 0.0);
    }

    #[test]
    fn converted_set_cover_is_fully_covered() {
        let sys = t1();
        let inst = sys.to_cip();
        for seed in 0..30 {
            let mut rng = RngStream::new(seed);
            let order = rng.derive(1).shuffle(3);
            let (sol, _) = cip_run(&inst, &order, 2.0, CipConfig::default(), &mut rng).unwrap();
            assert!(feasibility_check(&inst, sol.z(), 1.0).is_feasible());
        }
    }

    #[test]
    fn cost_agrees_with_set_cover_run_in_mean() {
        let sys = t1();
        let inst = sys.to_cip();
        let trials = 1000;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for t in 0..trials {
            let root = RngStream::new(5).derive(t);
            let order = root.derive(1).shuffle(3);
            a.push(loc_run(&sys, &order, 2.0, LocConfig::default(), &mut root.derive(2)).unwrap().0.total_cost());
            b.push(cip_run(&inst, &order, 2.0, CipConfig::default(), &mut root.derive(2)).unwrap().0.total_cost());
        }
        let stats = |v: &[f64]| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, var / n)
        };
        let ((ma, va), (mb, vb)) = (stats(&a), stats(&b));
        assert!((ma - mb).abs() <= 3.0 * (va + vb).sqrt(), "{ma} vs {mb}");
    }

    proptest! {
        #[test]
        fn deficits_and_monotone_z(seed in 0u64..500, n in 1usize..20, m in 1usize..10) {
            let mut rng = RngStream::new(seed);
            let levels = [0.0, 0.25, 0.5, 1.0];
            let rows: Vec<Vec<(usize, f64)>> = (0..n)
                .map(|_| {
                    let mut row: Vec<(usize, f64)> = (0..m)
                        .map(|j| (j, levels[rng.uniform_index(4).unwrap()]))
                        .filter(|&(_, a)| a > 0.0)
                        .collect();
                    if row.is_empty() {
                        row.push((rng.uniform_index(m).unwrap(), 1.0));
                    }
                    row
                })
                .collect();
            let costs: Vec<f64> = (0..m).map(|_| 0.5 + rng.uniform()).collect();
            let inst = CipInstance::new(m, rows, costs).unwrap();
            let beta = 2.0 * inst.costs().iter().cloned().fold(0.0, f64::max);
            let order = rng.derive(1).shuffle(n);
            let config = CipConfig { tight_backup: seed % 2 == 0 };
            let mut alg = LearnOrCoverCip::new(&inst, beta, config).unwrap();
            let mut prev = vec![0u64; m];
            for i in order.iter() {
                let r = alg.arrive(i, &mut rng).unwrap();
                let sol = alg.solution();
                prop_assert!(sol.z().iter().zip(&prev).all(|(a, b)| a >= b));
                prev = sol.z().to_vec();
                if r.acted {
                    prop_assert_eq!(r.deficit_after, 0.0);
                }
                for k in 0..n {
                    if sol.arrived()[k] {
                        prop_assert!(inst.row_deficit(k, sol.z()) <= GAMMA + 1e-12);
                        prop_assert!((sol.activity(k) - inst.activity(k, sol.z())).abs() < 1e-9);
                    }
                }
                prop_assert!(alg.state().budget_error(inst.costs()) <= 1e-9);
            }
            let scaled = scale_solution(alg.solution().z());
            prop_assert!(feasibility_check(&inst, &scaled, 1.0).is_feasible());
        }
    }
}
