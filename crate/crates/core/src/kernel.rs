//! Numeric primitives shared by the algorithms and the diagnostics: the
//! cost-weighted KL divergence, budget normalization, the potential
//! `Φ = C1·KL + C2·β·ln(ρ/β)` and its ingredients.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Row-settling threshold `γ = 1/(e-1)` of the covering-IP algorithm.
pub const GAMMA: f64 = 1.0 / (E - 1.0);

/// Constant of the weighted-Bernoulli truncation bound.
pub const CRS_ALPHA: f64 = 1.0 / 168.0;

/// Potential constants for set cover.
pub const SET_COVER_C1: f64 = 2.0;
pub const SET_COVER_C2: f64 = 2.0 * E;

/// Potential constants for covering IPs.
pub const CIP_C1: f64 = 3.0;
pub const CIP_C2: f64 = 3.0 * (E - 1.0) / CRS_ALPHA;

/// Relative tolerance on `<c, x> = β`.
pub const BUDGET_RTOL: f64 = 1e-9;

/// `Σ_j c_j [x*_j ln(x*_j / x_j) - x*_j + x_j]`, with `0 ln 0 = 0`.
pub fn weighted_kl(xstar: &[f64], x: &[f64], costs: &[f64]) -> Result<f64> {
    if xstar.len() != x.len() || x.len() != costs.len() {
        return Err(Error::Precondition(format!(
            "weighted_kl length mismatch: {}, {}, {}",
            xstar.len(),
            x.len(),
            costs.len()
        )));
    }
    let mut total = 0.0;
    for (index, ((&p, &q), &c)) in xstar.iter().zip(x).zip(costs).enumerate() {
        let term = if p > 0.0 {
            if q <= 0.0 {
                return Err(Error::InfiniteDivergence { index });
            }
            p * (p / q).ln() - p + q
        } else {
            q
        };
        // each term is nonnegative in exact arithmetic
        total += c * term.max(0.0);
    }
    Ok(total)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The learner's weight vector with its budget.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalState {
    x: Vec<f64>,
    beta: f64,
    support: Vec<bool>,
}

impl FractionalState {
    /// `x_j = β / (c_j · m')` on `{j : c_j <= β}` where `m'` is the size of
    /// that set, and zero elsewhere. Then `<c, x> = β` exactly up to rounding.
    pub fn initial(costs: &[f64], beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("budget must be positive and finite, got {beta}")));
        }
        let support: Vec<bool> = costs.iter().map(|&c| c <= beta).collect();
        let m_prime = support.iter().filter(|&&s| s).count();
        if m_prime == 0 {
            return Err(Error::InfeasibleBudget { beta });
        }
        let x = costs.iter().zip(&support).map(|(&c, &s)| if s { beta / (c * m_prime as f64) } else { 0.0 }).collect();
        Ok(Self { x, beta, support })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.x[j]
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn support(&self) -> &[bool] {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.iter().filter(|&&s| s).count()
    }

    pub fn cost(&self, costs: &[f64]) -> f64 {
        dot(costs, &self.x)
    }

    /// `|<c, x> - β| / β`.
    pub fn budget_error(&self, costs: &[f64]) -> f64 {
        (self.cost(costs) - self.beta).abs() / self.beta
    }

    pub(crate) fn x_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }

    /// Rescales so that `<c, x> = β`.
    pub fn renormalize(&mut self, costs: &[f64]) -> Result<()> {
        let z = self.cost(costs) / self.beta;
        if z.is_nan() || z <= 0.0 || z.is_infinite() {
            return Err(Error::DegenerateState);
        }
        for w in &mut self.x {
            *w /= z;
        }
        debug_assert!(self.budget_error(costs) <= BUDGET_RTOL);
        Ok(())
    }
}

/// `x · β / <c, x>`, returned with the support mask `{j : c_j <= β}`.
pub fn normalize_budget(x: &[f64], costs: &[f64], beta: f64) -> Result<FractionalState> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("budget must be positive and finite, got {beta}")));
    }
    if x.len() != costs.len() {
        return Err(Error::Precondition("normalize_budget length mismatch".into()));
    }
    let mut state = FractionalState { x: x.to_vec(), beta, support: costs.iter().map(|&c| c <= beta).collect() };
    state.renormalize(costs)?;
    Ok(state)
}

/// `ρ = Σ_{u uncovered} κ_u`.
pub fn compute_rho(uncovered: impl IntoIterator<Item = usize>, kappa: &[f64]) -> f64 {
    uncovered.into_iter().map(|u| kappa[u]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSnapshot {
    pub kl_term: f64,
    pub rho: f64,
    pub phi: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `Φ = C1·kl + C2·β·ln(ρ/β)`.
pub fn compute_potential(kl: f64, rho: f64, beta: f64, c1: f64, c2: f64) -> Result<PotentialSnapshot> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    Ok(PotentialSnapshot { kl_term: kl, rho, phi: phi_value(kl, rho, beta, c1, c2), beta, c1, c2 })
}

/// Same formula without the domain check: `ρ = 0` yields `-inf`.
pub(crate) fn phi_value(kl: f64, rho: f64, beta: f64, c1: f64, c2: f64) -> f64 {
    let log_term = if c2 == 0.0 { 0.0 } else { c2 * beta * (rho / beta).ln() };
    c1 * kl + log_term
}

/// Monte Carlo estimate of `E[min(W, Δ)]` for `W = Σ b_j·Ber(p_j)`, with its
/// standard error.
pub fn truncated_bernoulli_sum(
    p: &[f64],
    b: &[f64],
    delta: f64,
    samples: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if p.len() != b.len() || samples < 2 {
        return Err(Error::Precondition("need matching p, b and at least 2 samples".into()));
    }
    for &pj in p {
        if !(0.0..=1.0).contains(&pj) {
            return Err(Error::InvalidProbability(pj));
        }
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let w: f64 = p.iter().zip(b).map(|(&pj, &bj)| if rng.coin(pj) { bj } else { 0.0 }).sum();
        let v = w.min(delta);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}
