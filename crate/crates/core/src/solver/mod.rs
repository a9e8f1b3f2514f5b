//! Optimal allocations.
//!
//! Without constraints the objective separates per user and the optimum is a
//! threshold on `p`. With any of the three equality constraints the problem is
//! solved as its fractional relaxation (a randomized show policy) by a small
//! bounded simplex; [`solve_binary_exact`] enumerates binary vectors with a
//! feasibility tolerance and serves as the oracle for both.

mod enumerate;
mod rounding;
mod simplex;

use serde::{Deserialize, Serialize};

pub use enumerate::DEFAULT_ENUMERATION_CAP;
pub use rounding::{round_allocation, RoundingStrategy};

use crate::error::{Error, Result};
use crate::model::{
    herm_aware_utility, show_gain, Allocation, AllocationMode, ConstraintSet, GapKind,
    ModelParams, Population,
};

/// Residual bound on the constraint rows of an LP solution.
pub const LP_RESIDUAL_LIMIT: f64 = 1e-8;

/// Default feasibility tolerance for the binary oracle. Binary gaps move in
/// steps of `1 / min(N_a, N_b)`, so exact equality is usually unreachable.
pub const DEFAULT_BINARY_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMode {
    Fractional,
    BinaryExact,
}

#[derive(Debug, Clone)]
pub struct SolveRequest<'a> {
    pub population: &'a Population,
    pub params: ModelParams,
    pub constraints: ConstraintSet,
    pub mode: SolveMode,
    /// Largest population [`SolveMode::BinaryExact`] will enumerate.
    pub enumeration_cap: usize,
}

impl<'a> SolveRequest<'a> {
    pub fn new(population: &'a Population, params: ModelParams) -> Self {
        Self {
            population,
            params,
            constraints: ConstraintSet::none(),
            mode: SolveMode::Fractional,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn with_constraints(mut self, constraints: ConstraintSet) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn with_mode(mut self, mode: SolveMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap;
        self
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.constraints.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Solved, but some active gap lies between the requested tolerance and
    /// [`LP_RESIDUAL_LIMIT`].
    ToleranceRelaxed,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::ToleranceRelaxed => "tolerance_relaxed",
        }
    }
}

/// Realized gap values. `eo`/`eho` are `None` when a group's weight mass is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    pub parity: f64,
    pub eo: Option<f64>,
    pub eho: Option<f64>,
}

impl Gaps {
    pub fn measure(pop: &Population, alloc: &Allocation) -> Result<Self> {
        let optional = |kind: GapKind| match kind.gap(pop, alloc) {
            Ok(g) => Ok(Some(g)),
            Err(Error::ZeroMass { .. }) => Ok(None),
            Err(e) => Err(e),
        };
        Ok(Self {
            parity: GapKind::Parity.gap(pop, alloc)?,
            eo: optional(GapKind::Opportunity)?,
            eho: optional(GapKind::HermOpportunity)?,
        })
    }

    pub fn get(&self, kind: GapKind) -> Option<f64> {
        match kind {
            GapKind::Parity => Some(self.parity),
            GapKind::Opportunity => self.eo,
            GapKind::HermOpportunity => self.eho,
        }
    }

    /// Largest absolute gap over the active constraints.
    pub fn max_active(&self, constraints: &ConstraintSet) -> f64 {
        constraints
            .active()
            .map(|k| self.get(k).map_or(f64::INFINITY, f64::abs))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub allocation: Allocation,
    /// Hermeneutically-aware utility at `allocation`.
    pub objective: f64,
    pub gaps: Gaps,
    pub status: SolveStatus,
}

impl SolveResult {
    fn evaluate(req: &SolveRequest<'_>, allocation: Allocation, status: SolveStatus) -> Result<Self> {
        let objective = herm_aware_utility(req.population, &allocation, &req.params)?;
        let gaps = Gaps::measure(req.population, &allocation)?;
        Ok(Self {
            allocation,
            objective,
            gaps,
            status,
        })
    }
}

/// The pointwise-optimal decision ignoring constraints: show user `x` iff
/// `p_x >= (beta_g - gamma xi + gamma omega_g (1 - rho_x) - gamma theta_g rho_x) / alpha`.
/// Equality shows the ad.
pub fn threshold_rule(pop: &Population, params: &ModelParams) -> Allocation {
    let bits: Vec<bool> = pop
        .users()
        .iter()
        .map(|u| u.p >= show_threshold(u.group, u.rho, params))
        .collect();
    Allocation::from_bits(&bits)
}

/// Minimum click probability at which the threshold rule shows the ad.
pub fn show_threshold(group: crate::model::Group, rho: f64, params: &ModelParams) -> f64 {
    let g = params.gamma;
    (params.beta(group) - g * params.xi + g * params.omega(group) * (1.0 - rho)
        - g * params.theta(group) * rho)
        / params.alpha
}

pub fn solve_unconstrained(req: &SolveRequest<'_>) -> Result<SolveResult> {
    req.validate()?;
    if req.constraints.active_count() > 0 {
        return Err(Error::InvalidConstraints(
            "solve_unconstrained called with active constraints".into(),
        ));
    }
    SolveResult::evaluate(req, threshold_rule(req.population, &req.params), SolveStatus::Optimal)
}

/// Fractional optimum under the active equality constraints.
///
/// The returned allocation is a basic solution, so at most as many
/// coordinates as there are (linearly independent) active constraints are
/// strictly fractional.
pub fn solve_constrained_lp(req: &SolveRequest<'_>) -> Result<SolveResult> {
    req.validate()?;
    if req.mode != SolveMode::Fractional {
        return Err(Error::InvalidInput("LP solving requires fractional mode".into()));
    }
    if req.constraints.active_count() == 0 {
        return Err(Error::InvalidConstraints("no active constraints".into()));
    }
    let pop = req.population;
    let raw_rows: Vec<Vec<f64>> = req
        .constraints
        .active()
        .map(|k| k.row(pop))
        .collect::<Result<_>>()?;
    // unit-norm rows keep pivot tolerances meaningful; the band scales with them
    let mut rows = Vec::with_capacity(raw_rows.len());
    let mut bands = Vec::with_capacity(raw_rows.len());
    for row in raw_rows {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        rows.push(row.iter().map(|v| v / norm).collect::<Vec<f64>>());
        bands.push(req.constraints.tolerance / norm);
    }
    let gains: Vec<f64> = pop.users().iter().map(|u| show_gain(u, &req.params)).collect();
    let decisions = simplex::maximize_on_box(&gains, &rows, &bands)?;
    let allocation = Allocation::new(decisions, AllocationMode::Fractional)?;

    let result = SolveResult::evaluate(req, allocation, SolveStatus::Optimal)?;
    let residual = result.gaps.max_active(&req.constraints);
    if residual.is_nan() || residual > req.constraints.tolerance + LP_RESIDUAL_LIMIT {
        return Err(Error::NumericalFailure {
            residual,
            limit: LP_RESIDUAL_LIMIT,
        });
    }
    let status = if residual <= req.constraints.tolerance {
        SolveStatus::Optimal
    } else {
        SolveStatus::ToleranceRelaxed
    };
    Ok(SolveResult { status, ..result })
}

pub fn solve_binary_exact(req: &SolveRequest<'_>) -> Result<SolveResult> {
    req.validate()?;
    let allocation = enumerate::best_binary(
        req.population,
        &req.params,
        &req.constraints,
        req.enumeration_cap,
    )?;
    SolveResult::evaluate(req, allocation, SolveStatus::Optimal)
}

/// Dispatch on mode and active constraints.
pub fn solve(req: &SolveRequest<'_>) -> Result<SolveResult> {
    match req.mode {
        SolveMode::BinaryExact => solve_binary_exact(req),
        SolveMode::Fractional if req.constraints.active_count() == 0 => solve_unconstrained(req),
        SolveMode::Fractional => solve_constrained_lp(req),
    }
}
