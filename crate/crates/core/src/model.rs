//! Domain types and pointwise/aggregate evaluation of the allocation model.
//!
//! Per-user economic utility is `alpha * p * d + beta_g * (1 - d)` and the
//! hermeneutical-injustice cost is `(-theta_g * rho + omega_g * (1 - rho)) * d + xi * (1 - d)`,
//! where `g` is the user's group. The platform objective is
//! `sum(utility) - gamma * sum(cost)`.
//!
//! All three fairness gaps share one form: the weighted show share of group A
//! minus that of group B, `sum_A(d w) / sum_A(w) - sum_B(d w) / sum_B(w)`, with
//! `w = 1` (parity of exposure), `w = p` (equality of opportunity) or
//! `w = rho` (equality of hermeneutical opportunity). A positive gap means
//! group B receives less than group A.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::A => "A",
            Group::B => "B",
        })
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Group::A),
            "B" | "b" => Ok(Group::B),
            other => Err(Error::Unknown {
                kind: "group",
                value: other.to_string(),
            }),
        }
    }
}

fn check_probability(field: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { field, value })
    }
}

/// One potential ad recipient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub group: Group,
    /// Probability of the advertiser's desired action (e.g. a click).
    pub p: f64,
    /// Probability the user makes sense of the ad's content.
    pub rho: f64,
}

impl UserRecord {
    pub fn new(group: Group, p: f64, rho: f64) -> Result<Self> {
        Ok(Self {
            group,
            p: check_probability("p", p)?,
            rho: check_probability("rho", rho)?,
        })
    }
}

/// Users partitioned into two non-empty groups. Order is preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    users: Vec<UserRecord>,
    n_a: usize,
    n_b: usize,
}

impl Population {
    pub fn new(users: Vec<UserRecord>) -> Result<Self> {
        for u in &users {
            check_probability("p", u.p)?;
            check_probability("rho", u.rho)?;
        }
        let n_a = users.iter().filter(|u| u.group == Group::A).count();
        let n_b = users.len() - n_a;
        if n_a == 0 {
            return Err(Error::EmptyGroup(Group::A));
        }
        if n_b == 0 {
            return Err(Error::EmptyGroup(Group::B));
        }
        Ok(Self { users, n_a, n_b })
    }

    pub fn users(&self) -> &[UserRecord] {
        &self.users
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn group_size(&self, group: Group) -> usize {
        match group {
            Group::A => self.n_a,
            Group::B => self.n_b,
        }
    }

    /// The same users with every group label swapped.
    pub fn with_swapped_groups(&self) -> Population {
        Population {
            users: self
                .users
                .iter()
                .map(|u| UserRecord {
                    group: u.group.other(),
                    ..*u
                })
                .collect(),
            n_a: self.n_b,
            n_b: self.n_a,
        }
    }

    pub fn into_users(self) -> Vec<UserRecord> {
        self.users
    }
}

/// Scalar model parameters with group-specific `beta`, `theta`, `omega` and
/// a shared exclusion penalty `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub xi: f64,
    pub gamma: f64,
}

impl Default for ModelParams {
    /// The fixed values shared by all four simulation scenarios.
    fn default() -> Self {
        Self {
            alpha: 0.2,
            beta_a: 0.03,
            beta_b: 0.05,
            theta_a: 0.05,
            theta_b: 0.1,
            omega_a: 0.01,
            omega_b: 0.01,
            xi: 0.2,
            gamma: 0.01,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("theta_a", self.theta_a),
            ("theta_b", self.theta_b),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("xi", self.xi),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        let non_negative = [
            ("beta_a", self.beta_a),
            ("beta_b", self.beta_b),
            ("gamma", self.gamma),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and >= 0",
                });
            }
        }
        Ok(())
    }

    pub fn beta(&self, group: Group) -> f64 {
        match group {
            Group::A => self.beta_a,
            Group::B => self.beta_b,
        }
    }

    pub fn theta(&self, group: Group) -> f64 {
        match group {
            Group::A => self.theta_a,
            Group::B => self.theta_b,
        }
    }

    pub fn omega(&self, group: Group) -> f64 {
        match group {
            Group::A => self.omega_a,
            Group::B => self.omega_b,
        }
    }

    /// Parameters with the A/B roles exchanged.
    pub fn with_swapped_groups(&self) -> ModelParams {
        ModelParams {
            beta_a: self.beta_b,
            beta_b: self.beta_a,
            theta_a: self.theta_b,
            theta_b: self.theta_a,
            omega_a: self.omega_b,
            omega_b: self.omega_a,
            ..*self
        }
    }

    /// Multiply every utility and cost parameter (not `gamma`) by `c`.
    pub fn scaled(&self, c: f64) -> ModelParams {
        ModelParams {
            alpha: self.alpha * c,
            beta_a: self.beta_a * c,
            beta_b: self.beta_b * c,
            theta_a: self.theta_a * c,
            theta_b: self.theta_b * c,
            omega_a: self.omega_a * c,
            omega_b: self.omega_b * c,
            xi: self.xi * c,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AllocationMode {
    Binary,
    /// Each entry is a show probability (randomized policy).
    Fractional,
}

/// Per-user decisions aligned index-by-index with a [`Population`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    decisions: Vec<f64>,
    mode: AllocationMode,
}

impl Allocation {
    pub fn new(decisions: Vec<f64>, mode: AllocationMode) -> Result<Self> {
        for (i, &d) in decisions.iter().enumerate() {
            let ok = match mode {
                AllocationMode::Binary => d == 0.0 || d == 1.0,
                AllocationMode::Fractional => (0.0..=1.0).contains(&d),
            };
            if !ok {
                return Err(Error::InvalidAllocation(format!(
                    "decision {i} = {d} is not valid in {mode:?} mode"
                )));
            }
        }
        Ok(Self { decisions, mode })
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self {
            decisions: bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            mode: AllocationMode::Binary,
        }
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        let mode = if value == 0.0 || value == 1.0 {
            AllocationMode::Binary
        } else {
            AllocationMode::Fractional
        };
        Self::new(vec![value; n], mode)
    }

    pub fn decisions(&self) -> &[f64] {
        &self.decisions
    }

    pub fn mode(&self) -> AllocationMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    /// Number of entries strictly between 0 and 1.
    pub fn fractional_count(&self) -> usize {
        self.decisions
            .iter()
            .filter(|&&d| d > 0.0 && d < 1.0)
            .count()
    }

    pub fn is_integral(&self) -> bool {
        self.fractional_count() == 0
    }

    pub fn into_decisions(self) -> Vec<f64> {
        self.decisions
    }
}

/// Which equality constraints are active, and the maximum absolute gap allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub parity_exposure: bool,
    pub equality_opportunity: bool,
    pub equality_herm_opportunity: bool,
    pub tolerance: f64,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self::none()
    }
}

impl ConstraintSet {
    pub const DEFAULT_TOLERANCE: f64 = 1e-6;

    pub fn none() -> Self {
        Self {
            parity_exposure: false,
            equality_opportunity: false,
            equality_herm_opportunity: false,
            tolerance: Self::DEFAULT_TOLERANCE,
        }
    }

    pub fn all() -> Self {
        Self {
            parity_exposure: true,
            equality_opportunity: true,
            equality_herm_opportunity: true,
            tolerance: Self::DEFAULT_TOLERANCE,
        }
    }

    pub fn only(kind: GapKind) -> Self {
        let mut c = Self::none();
        c.set(kind, true);
        c
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn set(&mut self, kind: GapKind, active: bool) {
        match kind {
            GapKind::Parity => self.parity_exposure = active,
            GapKind::Opportunity => self.equality_opportunity = active,
            GapKind::HermOpportunity => self.equality_herm_opportunity = active,
        }
    }

    pub fn is_active(&self, kind: GapKind) -> bool {
        match kind {
            GapKind::Parity => self.parity_exposure,
            GapKind::Opportunity => self.equality_opportunity,
            GapKind::HermOpportunity => self.equality_herm_opportunity,
        }
    }

    pub fn active(&self) -> impl Iterator<Item = GapKind> + '_ {
        GapKind::ALL.into_iter().filter(|k| self.is_active(*k))
    }

    pub fn active_count(&self) -> usize {
        self.active().count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_finite() && self.tolerance >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConstraints(format!(
                "tolerance must be finite and >= 0, got {}",
                self.tolerance
            )))
        }
    }
}

/// The three group-fairness functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GapKind {
    /// Equal average exposure.
    Parity,
    /// Equal click-weighted exposure share.
    Opportunity,
    /// Equal uptake-weighted exposure share.
    HermOpportunity,
}

impl GapKind {
    pub const ALL: [GapKind; 3] = [GapKind::Parity, GapKind::Opportunity, GapKind::HermOpportunity];

    pub fn weight(self, user: &UserRecord) -> f64 {
        match self {
            GapKind::Parity => 1.0,
            GapKind::Opportunity => user.p,
            GapKind::HermOpportunity => user.rho,
        }
    }

    fn weight_name(self) -> &'static str {
        match self {
            GapKind::Parity => "count",
            GapKind::Opportunity => "click probability",
            GapKind::HermOpportunity => "uptake probability",
        }
    }

    /// Per-group weight totals `(W_A, W_B)`, erroring when either is zero.
    pub fn group_masses(self, pop: &Population) -> Result<(f64, f64)> {
        let (mut mass_a, mut mass_b) = (0.0, 0.0);
        for u in pop.users() {
            match u.group {
                Group::A => mass_a += self.weight(u),
                Group::B => mass_b += self.weight(u),
            }
        }
        for (group, mass) in [(Group::A, mass_a), (Group::B, mass_b)] {
            if mass <= 0.0 {
                return Err(Error::ZeroMass {
                    group,
                    weight: self.weight_name(),
                });
            }
        }
        Ok((mass_a, mass_b))
    }

    /// Linear form `r` with `r · d == gap(d)`.
    pub fn row(self, pop: &Population) -> Result<Vec<f64>> {
        let (mass_a, mass_b) = self.group_masses(pop)?;
        Ok(pop
            .users()
            .iter()
            .map(|u| match u.group {
                Group::A => self.weight(u) / mass_a,
                Group::B => -self.weight(u) / mass_b,
            })
            .collect())
    }

    pub fn gap(self, pop: &Population, alloc: &Allocation) -> Result<f64> {
        check_aligned(pop, alloc)?;
        let (mass_a, mass_b) = self.group_masses(pop)?;
        let (mut shown_a, mut shown_b) = (0.0, 0.0);
        for (u, &d) in pop.users().iter().zip(alloc.decisions()) {
            match u.group {
                Group::A => shown_a += d * self.weight(u),
                Group::B => shown_b += d * self.weight(u),
            }
        }
        Ok(shown_a / mass_a - shown_b / mass_b)
    }
}

impl fmt::Display for GapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GapKind::Parity => "parity",
            GapKind::Opportunity => "eo",
            GapKind::HermOpportunity => "eho",
        })
    }
}

fn check_aligned(pop: &Population, alloc: &Allocation) -> Result<()> {
    if pop.len() == alloc.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: pop.len(),
            got: alloc.len(),
        })
    }
}

/// Economic utility of showing `d` to `user`.
pub fn user_utility(user: &UserRecord, d: f64, params: &ModelParams) -> f64 {
    params.alpha * user.p * d + params.beta(user.group) * (1.0 - d)
}

/// Hermeneutical-injustice cost of showing `d` to `user`.
pub fn user_hi_cost(user: &UserRecord, d: f64, params: &ModelParams) -> f64 {
    let g = user.group;
    (-params.theta(g) * user.rho + params.omega(g) * (1.0 - user.rho)) * d
        + params.xi * (1.0 - d)
}

pub fn economic_utility(pop: &Population, alloc: &Allocation, params: &ModelParams) -> Result<f64> {
    check_aligned(pop, alloc)?;
    Ok(pop
        .users()
        .iter()
        .zip(alloc.decisions())
        .map(|(u, &d)| user_utility(u, d, params))
        .sum())
}

pub fn hi_cost(pop: &Population, alloc: &Allocation, params: &ModelParams) -> Result<f64> {
    check_aligned(pop, alloc)?;
    Ok(pop
        .users()
        .iter()
        .zip(alloc.decisions())
        .map(|(u, &d)| user_hi_cost(u, d, params))
        .sum())
}

/// Aggregate utility minus `gamma` times aggregate hermeneutical cost.
pub fn herm_aware_utility(pop: &Population, alloc: &Allocation, params: &ModelParams) -> Result<f64> {
    let utility = economic_utility(pop, alloc, params)?;
    let cost = hi_cost(pop, alloc, params)?;
    Ok(utility - params.gamma * cost)
}

/// Marginal objective gain from moving user `x` from `d = 0` to `d = 1`.
pub fn show_gain(user: &UserRecord, params: &ModelParams) -> f64 {
    let g = user.group;
    let shown = params.alpha * user.p
        - params.gamma * (-params.theta(g) * user.rho + params.omega(g) * (1.0 - user.rho));
    let withheld = params.beta(g) - params.gamma * params.xi;
    shown - withheld
}

pub fn parity_gap(pop: &Population, alloc: &Allocation) -> Result<f64> {
    GapKind::Parity.gap(pop, alloc)
}

pub fn eo_gap(pop: &Population, alloc: &Allocation) -> Result<f64> {
    GapKind::Opportunity.gap(pop, alloc)
}

pub fn eho_gap(pop: &Population, alloc: &Allocation) -> Result<f64> {
    GapKind::HermOpportunity.gap(pop, alloc)
}

/// Parity of exposure and equality of hermeneutical opportunity both hold within `tol`.
pub fn is_hermeneutically_fair(pop: &Population, alloc: &Allocation, tol: f64) -> Result<bool> {
    Ok(parity_gap(pop, alloc)?.abs() <= tol && eho_gap(pop, alloc)?.abs() <= tol)
}
