//! Set-cover and covering-IP instances, arrival orders and batches.
//!
//! Identifiers are 0-based everywhere in memory. The text formats in
//! [`crate::io`] are 1-based and convert at the boundary.

use std::fmt;

use crate::error::{Error, Result};

/// Deficits at or below this are treated as zero so that dyadic and
/// near-dyadic coefficient sums do not leave `1e-16` residues behind.
pub const DEFICIT_EPS: f64 = 1e-12;

/// A violated instance invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UncoverableElement { element: usize },
    NonPositiveCost { index: usize, cost: f64 },
    UnsortedMembers { set: usize },
    DuplicateMember { set: usize, element: usize },
    ElementOutOfRange { set: usize, element: usize },
    CostCountMismatch { expected: usize, found: usize },
    CoefficientOutOfRange { row: usize, column: usize, value: f64 },
    ColumnOutOfRange { row: usize, column: usize },
    EmptyRow { row: usize },
    BatchOverlap { element: usize },
    BatchMissing { element: usize },
    BatchElementOutOfRange { batch: usize, element: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UncoverableElement { element } => {
                write!(f, "uncoverable element {element}")
            }
            Violation::NonPositiveCost { index, cost } => {
                write!(f, "cost of {index} is not positive and finite: {cost}")
            }
            Violation::UnsortedMembers { set } => write!(f, "members of set {set} are not sorted"),
            Violation::DuplicateMember { set, element } => {
                write!(f, "set {set} lists element {element} twice")
            }
            Violation::ElementOutOfRange { set, element } => {
                write!(f, "set {set} lists out-of-range element {element}")
            }
            Violation::CostCountMismatch { expected, found } => {
                write!(f, "expected {expected} costs, found {found}")
            }
            Violation::CoefficientOutOfRange { row, column, value } => {
                write!(f, "coefficient out of range at row {row}, column {column}: {value}")
            }
            Violation::ColumnOutOfRange { row, column } => {
                write!(f, "row {row} references out-of-range column {column}")
            }
            Violation::EmptyRow { row } => write!(f, "row {row} has no nonzero coefficient"),
            Violation::BatchOverlap { element } => {
                write!(f, "element {element} appears in more than one batch")
            }
            Violation::BatchMissing { element } => write!(f, "element {element} is in no batch"),
            Violation::BatchElementOutOfRange { batch, element } => {
                write!(f, "batch {batch} lists out-of-range element {element}")
            }
        }
    }
}

pub trait Validate {
    /// Every invariant violation; empty iff the instance is valid.
    fn validate(&self) -> Vec<Violation>;

    fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

fn check_costs(costs: &[f64], expected: usize, out: &mut Vec<Violation>) {
    if costs.len() != expected {
        out.push(Violation::CostCountMismatch { expected, found: costs.len() });
    }
    for (index, &cost) in costs.iter().enumerate() {
        if !(cost > 0.0 && cost.is_finite()) {
            out.push(Violation::NonPositiveCost { index, cost });
        }
    }
}

/// For each element, the sorted identifiers of the sets containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceIndex {
    sets_of: Vec<Vec<usize>>,
}

impl IncidenceIndex {
    pub fn sets_containing(&self, v: usize) -> &[usize] {
        &self.sets_of[v]
    }

    pub fn len(&self) -> usize {
        self.sets_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets_of.is_empty()
    }

    /// Transpose back to per-set member lists over `m` sets.
    pub fn transpose(&self, m: usize) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); m];
        for (v, sets) in self.sets_of.iter().enumerate() {
            for &s in sets {
                members[s].push(v);
            }
        }
        members
    }
}

/// Transpose of the membership lists. Out-of-range elements are ignored
/// (they are reported by [`Validate`]).
pub fn build_incidence(n: usize, members: &[Vec<usize>]) -> IncidenceIndex {
    let mut sets_of = vec![Vec::new(); n];
    for (j, set) in members.iter().enumerate() {
        for &v in set {
            if v < n {
                sets_of[v].push(j);
            }
        }
    }
    for list in &mut sets_of {
        list.dedup();
    }
    IncidenceIndex { sets_of }
}

/// Cheapest set containing `v` and its cost κ_v. Ties go to the lowest id.
pub fn cheapest_covering_set(index: &IncidenceIndex, costs: &[f64], v: usize) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &s in index.sets_containing(v) {
        match best {
            Some((_, c)) if costs[s] >= c => {}
            _ => best = Some((s, costs[s])),
        }
    }
    best.ok_or(Error::Uncoverable { element: v })
}

/// A weighted set system `(U, S, c)` over elements `0..n`.
#[derive(Debug, Clone)]
pub struct SetSystem {
    n: usize,
    members: Vec<Vec<usize>>,
    costs: Vec<f64>,
    incidence: IncidenceIndex,
}

impl PartialEq for SetSystem {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.members == other.members && self.costs == other.costs
    }
}

impl SetSystem {
    /// Builds and validates a set system.
    pub fn new(n: usize, members: Vec<Vec<usize>>, costs: Vec<f64>) -> Result<Self> {
        let sys = Self::new_unchecked(n, members, costs);
        let report = sys.validate();
        if let Some(first) = report.first() {
            return Err(Error::Precondition(format!(
                "invalid set system ({} violations, first: {first})",
                report.len()
            )));
        }
        Ok(sys)
    }

    /// Builds without validating; call [`Validate::validate`] before use.
    pub fn new_unchecked(n: usize, members: Vec<Vec<usize>>, costs: Vec<f64>) -> Self {
        let incidence = build_incidence(n, &members);
        Self { n, members, costs, incidence }
    }

    pub fn unit_cost(n: usize, members: Vec<Vec<usize>>) -> Result<Self> {
        let m = members.len();
        Self::new(n, members, vec![1.0; m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn set(&self, j: usize) -> &[usize] {
        &self.members[j]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, j: usize) -> f64 {
        self.costs[j]
    }

    pub fn incidence(&self) -> &IncidenceIndex {
        &self.incidence
    }

    pub fn sets_containing(&self, v: usize) -> &[usize] {
        self.incidence.sets_containing(v)
    }

    pub fn cheapest_covering_set(&self, v: usize) -> Result<(usize, f64)> {
        cheapest_covering_set(&self.incidence, &self.costs, v)
    }

    /// κ_v for every element.
    pub fn kappas(&self) -> Result<Vec<f64>> {
        (0..self.n).map(|v| self.cheapest_covering_set(v).map(|(_, k)| k)).collect()
    }

    pub fn is_unit_cost(&self) -> bool {
        self.costs.iter().all(|&c| c == 1.0)
    }

    pub fn cover_cost(&self, sets: &[usize]) -> f64 {
        sets.iter().map(|&j| self.costs[j]).sum()
    }

    pub fn covers_all(&self, sets: &[usize]) -> bool {
        let mut covered = vec![false; self.n];
        for &j in sets {
            for &v in &self.members[j] {
                covered[v] = true;
            }
        }
        covered.into_iter().all(|c| c)
    }

    /// The same instance as a covering IP with 0/1 coefficients.
    pub fn to_cip(&self) -> CipInstance {
        let rows = (0..self.n).map(|v| self.sets_containing(v).iter().map(|&j| (j, 1.0)).collect()).collect();
        CipInstance::new_unchecked(self.m(), rows, self.costs.clone())
    }
}

impl Validate for SetSystem {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_costs(&self.costs, self.members.len(), &mut out);
        for (set, list) in self.members.iter().enumerate() {
            let mut sorted = true;
            for w in list.windows(2) {
                if w[0] == w[1] {
                    out.push(Violation::DuplicateMember { set, element: w[0] });
                } else if w[0] > w[1] {
                    sorted = false;
                }
            }
            if !sorted {
                out.push(Violation::UnsortedMembers { set });
            }
            for &element in list {
                if element >= self.n {
                    out.push(Violation::ElementOutOfRange { set, element });
                }
            }
        }
        for element in 0..self.n {
            if self.incidence.sets_containing(element).is_empty() {
                out.push(Violation::UncoverableElement { element });
            }
        }
        out
    }
}

/// Amount by which a sparse row remains uncovered: `max(0, 1 - <a, z>)`.
pub fn row_deficit(row: &[(usize, f64)], z: &[u64]) -> f64 {
    let activity: f64 = row.iter().map(|&(j, a)| a * z[j] as f64).sum();
    deficit_from_activity(activity)
}

pub(crate) fn deficit_from_activity(activity: f64) -> f64 {
    let d = 1.0 - activity;
    if d <= DEFICIT_EPS {
        0.0
    } else {
        d
    }
}

/// Column minimizing `c_k / a_ik` (ties to the lowest id) and the row's
/// current covering cost `deficit * c_k / a_ik`.
pub fn kappa_cip(row: &[(usize, f64)], deficit: f64, costs: &[f64]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(k, a) in row {
        if a > 0.0 {
            let ratio = costs[k] / a;
            match best {
                Some((bk, br)) if ratio > br || (ratio == br && k > bk) => {}
                _ => best = Some((k, ratio)),
            }
        }
    }
    let (k, ratio) = best.ok_or(Error::EmptyRow { row: usize::MAX })?;
    Ok((k, deficit * ratio))
}

/// A pure covering IP `min <c,z> s.t. Az >= 1, z in Z_+^m` with `a_ij in [0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CipInstance {
    m: usize,
    rows: Vec<Vec<(usize, f64)>>,
    costs: Vec<f64>,
    columns: Vec<Vec<(usize, f64)>>,
}

impl CipInstance {
    pub fn new(m: usize, rows: Vec<Vec<(usize, f64)>>, costs: Vec<f64>) -> Result<Self> {
        let inst = Self::new_unchecked(m, rows, costs);
        let report = inst.validate();
        if let Some(first) = report.first() {
            return Err(Error::Precondition(format!(
                "invalid covering IP ({} violations, first: {first})",
                report.len()
            )));
        }
        Ok(inst)
    }

    /// Rows are sorted by column; zero coefficients are kept as given.
    pub fn new_unchecked(m: usize, mut rows: Vec<Vec<(usize, f64)>>, costs: Vec<f64>) -> Self {
        let mut columns = vec![Vec::new(); m];
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            for &(j, a) in row.iter() {
                if j < m && a != 0.0 {
                    columns[j].push((i, a));
                }
            }
        }
        Self { m, rows, costs, columns }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Nonzero entries of column `j` as `(row, a_ij)`.
    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, j: usize) -> f64 {
        self.costs[j]
    }

    pub fn activity(&self, i: usize, z: &[u64]) -> f64 {
        self.rows[i].iter().map(|&(j, a)| a * z[j] as f64).sum()
    }

    pub fn row_deficit(&self, i: usize, z: &[u64]) -> f64 {
        row_deficit(&self.rows[i], z)
    }

    pub fn kappa(&self, i: usize, deficit: f64) -> Result<(usize, f64)> {
        kappa_cip(&self.rows[i], deficit, &self.costs).map_err(|_| Error::EmptyRow { row: i })
    }

    pub fn solution_cost(&self, z: &[u64]) -> f64 {
        z.iter().zip(&self.costs).map(|(&zj, &c)| zj as f64 * c).sum()
    }
}

impl Validate for CipInstance {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_costs(&self.costs, self.m, &mut out);
        for (row, entries) in self.rows.iter().enumerate() {
            let mut nonzero = false;
            for &(column, value) in entries {
                if column >= self.m {
                    out.push(Violation::ColumnOutOfRange { row, column });
                }
                if !(0.0..=1.0).contains(&value) {
                    out.push(Violation::CoefficientOutOfRange { row, column, value });
                } else if value > 0.0 {
                    nonzero = true;
                }
            }
            if !nonzero {
                out.push(Violation::EmptyRow { row });
            }
        }
        out
    }
}

/// A permutation of `0..n` giving the arrival sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalOrder(Vec<usize>);

impl ArrivalOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &v in &perm {
            if v >= perm.len() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Precondition(format!("arrival order is not a permutation of 0..{}", perm.len())));
            }
        }
        Ok(Self(perm))
    }

    pub(crate) fn from_permutation_unchecked(perm: Vec<usize>) -> Self {
        Self(perm)
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

/// A set system whose elements arrive in whole batches.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchedInstance {
    base: SetSystem,
    batches: Vec<Vec<usize>>,
}

impl BatchedInstance {
    pub fn new(base: SetSystem, batches: Vec<Vec<usize>>) -> Result<Self> {
        let inst = Self::new_unchecked(base, batches);
        let report = inst.validate();
        if let Some(first) = report.first() {
            return Err(Error::Precondition(format!("invalid batched instance: {first}")));
        }
        Ok(inst)
    }

    pub fn new_unchecked(base: SetSystem, batches: Vec<Vec<usize>>) -> Self {
        Self { base, batches }
    }

    pub fn base(&self) -> &SetSystem {
        &self.base
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    /// Number of batches `b`.
    pub fn b(&self) -> usize {
        self.batches.len()
    }

    /// Common batch size `s`, when all batches have the same size.
    pub fn s(&self) -> Option<usize> {
        let first = self.batches.first()?.len();
        self.batches.iter().all(|b| b.len() == first).then_some(first)
    }
}

impl Validate for BatchedInstance {
    fn validate(&self) -> Vec<Violation> {
        let mut out = self.base.validate();
        let n = self.base.n();
        let mut seen = vec![false; n];
        for (batch, list) in self.batches.iter().enumerate() {
            for &element in list {
                if element >= n {
                    out.push(Violation::BatchElementOutOfRange { batch, element });
                } else if std::mem::replace(&mut seen[element], true) {
                    out.push(Violation::BatchOverlap { element });
                }
            }
        }
        for (element, s) in seen.into_iter().enumerate() {
            if !s {
                out.push(Violation::BatchMissing { element });
            }
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// n=3, m=3, S1={1,2} c=1, S2={2,3} c=1, S3={1,2,3} c=2 (0-based here).
    pub fn t1() -> SetSystem {
        SetSystem::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]], vec![1.0, 1.0, 2.0]).unwrap()
    }
}
