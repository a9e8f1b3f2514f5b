//! Built-in simulation scenarios, replicated sweeps over one varying
//! parameter, and median/quartile aggregation.
//!
//! Every replication samples one population from its own sub-seed and solves
//! all five allocation rules on it for every grid value, so rules and grid
//! points are compared on common random numbers. `utility_pct` is taken
//! against the unconstrained optimum of the same population and parameters.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstraintSet, GapKind, ModelParams, Population};
use crate::population::{
    replication_seed, sample_population, ClickConfig, PopulationSpec, UptakeConfig,
    DEFAULT_GROUP_SIZE,
};
use crate::solver::{solve, SolveRequest, SolveResult, SolveStatus};

pub const DEFAULT_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    /// Competitive spillover: `beta_b` varies.
    A,
    /// Competitive uptake: `theta_b` varies.
    B,
    /// Competitive hermeneutical loss: `omega_b` varies.
    C,
    /// Hermeneutical spillover: `xi` varies.
    D,
    /// `gamma` varies with the other parameters fixed.
    GammaSweep,
    /// `gamma = 0`, `beta_b` varies.
    BaselineGamma0,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::A,
        ScenarioId::B,
        ScenarioId::C,
        ScenarioId::D,
        ScenarioId::GammaSweep,
        ScenarioId::BaselineGamma0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::A => "A",
            ScenarioId::B => "B",
            ScenarioId::C => "C",
            ScenarioId::D => "D",
            ScenarioId::GammaSweep => "gamma",
            ScenarioId::BaselineGamma0 => "baseline",
        }
    }

    pub fn varying(self) -> SweepParam {
        match self {
            ScenarioId::A | ScenarioId::BaselineGamma0 => SweepParam::BetaB,
            ScenarioId::B => SweepParam::ThetaB,
            ScenarioId::C => SweepParam::OmegaB,
            ScenarioId::D => SweepParam::Xi,
            ScenarioId::GammaSweep => SweepParam::Gamma,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(ScenarioId::A),
            "b" => Ok(ScenarioId::B),
            "c" => Ok(ScenarioId::C),
            "d" => Ok(ScenarioId::D),
            "gamma" | "gamma-sweep" => Ok(ScenarioId::GammaSweep),
            "baseline" | "baseline-gamma0" | "gamma0" => Ok(ScenarioId::BaselineGamma0),
            _ => Err(Error::Unknown {
                kind: "scenario",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UptakeVariant {
    /// Group B advantaged: Beta(4,6) / Beta(7,3).
    Main,
    /// Group A advantaged: Beta(8,2) / Beta(3,7).
    AAdvantaged,
    /// Both Beta(7,3).
    NeutralHigh,
    /// Both Beta(4,6).
    NeutralLow,
}

impl UptakeVariant {
    pub const ALL: [UptakeVariant; 4] = [
        UptakeVariant::Main,
        UptakeVariant::AAdvantaged,
        UptakeVariant::NeutralHigh,
        UptakeVariant::NeutralLow,
    ];

    pub fn config(self) -> UptakeConfig {
        let (beta_a, beta_b) = match self {
            UptakeVariant::Main => ((4.0, 6.0), (7.0, 3.0)),
            UptakeVariant::AAdvantaged => ((8.0, 2.0), (3.0, 7.0)),
            UptakeVariant::NeutralHigh => ((7.0, 3.0), (7.0, 3.0)),
            UptakeVariant::NeutralLow => ((4.0, 6.0), (4.0, 6.0)),
        };
        UptakeConfig { beta_a, beta_b }
    }

    pub fn name(self) -> &'static str {
        match self {
            UptakeVariant::Main => "main",
            UptakeVariant::AAdvantaged => "a-adv",
            UptakeVariant::NeutralHigh => "neutral-high",
            UptakeVariant::NeutralLow => "neutral-low",
        }
    }
}

impl fmt::Display for UptakeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UptakeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        UptakeVariant::ALL
            .into_iter()
            .find(|v| v.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Unknown {
                kind: "uptake variant",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    BetaB,
    ThetaB,
    OmegaB,
    Xi,
    Gamma,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::BetaB => "beta_b",
            SweepParam::ThetaB => "theta_b",
            SweepParam::OmegaB => "omega_b",
            SweepParam::Xi => "xi",
            SweepParam::Gamma => "gamma",
        }
    }

    pub fn apply(self, params: &ModelParams, value: f64) -> ModelParams {
        let mut p = *params;
        match self {
            SweepParam::BetaB => p.beta_b = value,
            SweepParam::ThetaB => p.theta_b = value,
            SweepParam::OmegaB => p.omega_b = value,
            SweepParam::Xi => p.xi = value,
            SweepParam::Gamma => p.gamma = value,
        }
        p
    }

    pub fn get(self, params: &ModelParams) -> f64 {
        match self {
            SweepParam::BetaB => params.beta_b,
            SweepParam::ThetaB => params.theta_b,
            SweepParam::OmegaB => params.omega_b,
            SweepParam::Xi => params.xi,
            SweepParam::Gamma => params.gamma,
        }
    }

    /// Default sweep grid.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepParam::BetaB => grid(0.01, 0.40, 0.03),
            SweepParam::ThetaB | SweepParam::OmegaB => grid(0.01, 0.30, 0.02),
            SweepParam::Xi => grid(0.02, 0.50, 0.04),
            SweepParam::Gamma => grid(0.0, 1.0, 0.05),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `start, start + step, ...` up to and including `end` (within rounding),
/// each value rounded to 9 decimals.
pub fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AllocationRule {
    Unconstrained,
    ParityOfExposure,
    EqualityOfOpportunity,
    EqualityOfHermOpportunity,
    AllConstraints,
}

impl AllocationRule {
    pub const ALL: [AllocationRule; 5] = [
        AllocationRule::Unconstrained,
        AllocationRule::ParityOfExposure,
        AllocationRule::EqualityOfOpportunity,
        AllocationRule::EqualityOfHermOpportunity,
        AllocationRule::AllConstraints,
    ];

    pub fn constraints(self, tolerance: f64) -> ConstraintSet {
        let set = match self {
            AllocationRule::Unconstrained => ConstraintSet::none(),
            AllocationRule::ParityOfExposure => ConstraintSet::only(GapKind::Parity),
            AllocationRule::EqualityOfOpportunity => ConstraintSet::only(GapKind::Opportunity),
            AllocationRule::EqualityOfHermOpportunity => {
                ConstraintSet::only(GapKind::HermOpportunity)
            }
            AllocationRule::AllConstraints => ConstraintSet::all(),
        };
        set.with_tolerance(tolerance)
    }

    pub fn name(self) -> &'static str {
        match self {
            AllocationRule::Unconstrained => "unconstrained",
            AllocationRule::ParityOfExposure => "parity",
            AllocationRule::EqualityOfOpportunity => "eo",
            AllocationRule::EqualityOfHermOpportunity => "eho",
            AllocationRule::AllConstraints => "all",
        }
    }

    pub fn is_constrained(self) -> bool {
        self != AllocationRule::Unconstrained
    }
}

impl fmt::Display for AllocationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AllocationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AllocationRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "allocation rule",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    /// Parameter template; the varying parameter is overwritten per grid value.
    pub fixed: ModelParams,
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub uptake: UptakeVariant,
    pub replications: usize,
    /// Population template; its seed is replaced by each replication's sub-seed.
    pub population: PopulationSpec,
    pub lp_tolerance: f64,
}

/// `beta_b` held fixed in the `gamma` sweep (upper end of the `beta_b` grid).
pub const GAMMA_SWEEP_BETA_B: f64 = 0.40;

/// A scenario with the fixed parameters of its row, default grid, 100
/// replications and two groups of 1000 users.
pub fn builtin_scenario(id: ScenarioId, uptake: UptakeVariant) -> ScenarioSpec {
    let base = ModelParams::default();
    let fixed = match id {
        ScenarioId::GammaSweep => ModelParams {
            beta_b: GAMMA_SWEEP_BETA_B,
            ..base
        },
        ScenarioId::BaselineGamma0 => ModelParams { gamma: 0.0, ..base },
        _ => base,
    };
    let param = id.varying();
    ScenarioSpec {
        id,
        fixed,
        param,
        grid: param.default_grid(),
        uptake,
        replications: DEFAULT_REPLICATIONS,
        population: PopulationSpec {
            n_a: DEFAULT_GROUP_SIZE,
            n_b: DEFAULT_GROUP_SIZE,
            uptake: uptake.config(),
            click: ClickConfig::default(),
            seed: 0,
        },
        lp_tolerance: ConstraintSet::DEFAULT_TOLERANCE,
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.param != self.id.varying() {
            return Err(Error::InvalidInput(format!(
                "scenario {} varies {}, not {}",
                self.id,
                self.id.varying(),
                self.param
            )));
        }
        if self.id == ScenarioId::BaselineGamma0 && self.fixed.gamma != 0.0 {
            return Err(Error::InvalidInput("baseline scenario requires gamma = 0".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidInput("sweep grid is empty".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidInput("replications must be >= 1".into()));
        }
        if !(self.lp_tolerance.is_finite() && self.lp_tolerance >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be >= 0, got {}",
                self.lp_tolerance
            )));
        }
        for &v in &self.grid {
            self.param.apply(&self.fixed, v).validate()?;
        }
        self.population.validate()
    }

    pub fn params_at(&self, value: f64) -> ModelParams {
        self.param.apply(&self.fixed, value)
    }

    pub fn population_for(&self, base_seed: u64, replication: usize) -> Result<(Population, u64)> {
        let seed = replication_seed(base_seed, replication as u64);
        let spec = PopulationSpec {
            seed,
            uptake: self.uptake.config(),
            ..self.population
        };
        Ok((sample_population(&spec)?, seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Optimal,
    ToleranceRelaxed,
    Infeasible,
    Failed,
}

impl RecordStatus {
    pub fn name(self) -> &'static str {
        match self {
            RecordStatus::Optimal => "optimal",
            RecordStatus::ToleranceRelaxed => "tolerance_relaxed",
            RecordStatus::Infeasible => "infeasible",
            RecordStatus::Failed => "failed",
        }
    }

    pub fn is_usable(self) -> bool {
        matches!(self, RecordStatus::Optimal | RecordStatus::ToleranceRelaxed)
    }
}

impl From<SolveStatus> for RecordStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => RecordStatus::Optimal,
            SolveStatus::ToleranceRelaxed => RecordStatus::ToleranceRelaxed,
            SolveStatus::Infeasible => RecordStatus::Infeasible,
        }
    }
}

/// One (rule, grid value, replication) outcome. Gap signs are group A minus group B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scenario: ScenarioId,
    pub rule: AllocationRule,
    pub param_name: SweepParam,
    pub param_value: f64,
    pub replication: usize,
    pub objective: f64,
    pub utility_pct: f64,
    pub parity_gap: f64,
    pub eo_gap: f64,
    pub eho_gap: f64,
    pub status: RecordStatus,
    pub seed: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenario: ScenarioId,
    pub uptake: UptakeVariant,
    pub param: SweepParam,
    pub base_seed: u64,
    /// Ordered by grid value, then rule, then replication.
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| !r.status.is_usable()).count()
    }

    pub fn failure_rate(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.failed() as f64 / self.records.len() as f64
        }
    }

    pub fn records_for(&self, rule: AllocationRule, value: f64) -> impl Iterator<Item = &SweepRecord> {
        self.records
            .iter()
            .filter(move |r| r.rule == rule && r.param_value == value)
    }
}

fn record_from(
    spec: &ScenarioSpec,
    rule: AllocationRule,
    value: f64,
    replication: usize,
    seed: u64,
    outcome: &Result<SolveResult>,
    reference: Option<f64>,
) -> SweepRecord {
    let mut rec = SweepRecord {
        scenario: spec.id,
        rule,
        param_name: spec.param,
        param_value: value,
        replication,
        objective: f64::NAN,
        utility_pct: f64::NAN,
        parity_gap: f64::NAN,
        eo_gap: f64::NAN,
        eho_gap: f64::NAN,
        status: RecordStatus::Failed,
        seed,
        error: None,
    };
    match outcome {
        Ok(res) => {
            rec.objective = res.objective;
            rec.parity_gap = res.gaps.parity;
            rec.eo_gap = res.gaps.eo.unwrap_or(f64::NAN);
            rec.eho_gap = res.gaps.eho.unwrap_or(f64::NAN);
            rec.status = res.status.into();
            rec.utility_pct = match (rule, reference) {
                (AllocationRule::Unconstrained, _) => 100.0,
                (_, Some(base)) => 100.0 * res.objective / base,
                (_, None) => f64::NAN,
            };
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// All records of one replication, indexed `[grid][rule]`.
fn run_replication(spec: &ScenarioSpec, base_seed: u64, replication: usize) -> Vec<Vec<SweepRecord>> {
    let sampled = spec.population_for(base_seed, replication);
    let seed = replication_seed(base_seed, replication as u64);
    spec.grid
        .iter()
        .map(|&value| {
            let params = spec.params_at(value);
            let mut reference = None;
            AllocationRule::ALL
                .iter()
                .map(|&rule| {
                    let outcome = match &sampled {
                        Ok((pop, _)) => solve(
                            &SolveRequest::new(pop, params)
                                .with_constraints(rule.constraints(spec.lp_tolerance)),
                        ),
                        Err(e) => Err(Error::InvalidInput(e.to_string())),
                    };
                    if rule == AllocationRule::Unconstrained {
                        reference = outcome.as_ref().ok().map(|r| r.objective);
                    }
                    record_from(spec, rule, value, replication, seed, &outcome, reference)
                })
                .collect()
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn map_replications(spec: &ScenarioSpec, base_seed: u64) -> Vec<Vec<Vec<SweepRecord>>> {
    use rayon::prelude::*;
    (0..spec.replications)
        .into_par_iter()
        .map(|i| run_replication(spec, base_seed, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn map_replications(spec: &ScenarioSpec, base_seed: u64) -> Vec<Vec<Vec<SweepRecord>>> {
    (0..spec.replications)
        .map(|i| run_replication(spec, base_seed, i))
        .collect()
}

/// Run every grid value × replication × rule. Solver errors become `failed`
/// records; only an invalid spec is an error.
pub fn run_sweep(spec: &ScenarioSpec, base_seed: u64) -> Result<SweepResult> {
    spec.validate()?;
    let per_replication = map_replications(spec, base_seed);
    let mut records = Vec::with_capacity(spec.grid.len() * AllocationRule::ALL.len() * spec.replications);
    for g in 0..spec.grid.len() {
        for r in 0..AllocationRule::ALL.len() {
            for rep in &per_replication {
                records.push(rep[g][r].clone());
            }
        }
    }
    Ok(SweepResult {
        scenario: spec.id,
        uptake: spec.uptake,
        param: spec.param,
        base_seed,
        records,
    })
}

/// [`run_sweep`] on a dedicated pool of `jobs` threads (0 = all cores).
/// Output does not depend on `jobs`.
pub fn run_sweep_with_jobs(spec: &ScenarioSpec, base_seed: u64, jobs: usize) -> Result<SweepResult> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        pool.install(|| run_sweep(spec, base_seed))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        run_sweep(spec, base_seed)
    }
}

/// Linear-interpolation quantile of sorted data (`h = (n - 1) q`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl Quartiles {
    /// `None` for empty input.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Self {
            q25: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q75: quantile_sorted(&v, 0.75),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario: ScenarioId,
    pub rule: AllocationRule,
    pub param_name: SweepParam,
    pub param_value: f64,
    /// Records aggregated.
    pub count: usize,
    /// Failed records left out.
    pub excluded: usize,
    pub utility_pct: Option<Quartiles>,
    pub parity_gap: Option<Quartiles>,
    pub abs_parity_gap: Option<Quartiles>,
}

/// Median and quartiles per (rule, grid value), in record order.
pub fn aggregate(sweep: &SweepResult) -> Vec<AggregateRow> {
    let mut keys: Vec<(AllocationRule, f64)> = Vec::new();
    for r in &sweep.records {
        if !keys.iter().any(|&(rule, v)| rule == r.rule && v == r.param_value) {
            keys.push((r.rule, r.param_value));
        }
    }
    keys.into_iter()
        .map(|(rule, value)| {
            let all: Vec<&SweepRecord> = sweep.records_for(rule, value).collect();
            let ok: Vec<&SweepRecord> = all.iter().copied().filter(|r| r.status.is_usable()).collect();
            AggregateRow {
                scenario: sweep.scenario,
                rule,
                param_name: sweep.param,
                param_value: value,
                count: ok.len(),
                excluded: all.len() - ok.len(),
                utility_pct: Quartiles::of(ok.iter().map(|r| r.utility_pct)),
                parity_gap: Quartiles::of(ok.iter().map(|r| r.parity_gap)),
                abs_parity_gap: Quartiles::of(ok.iter().map(|r| r.parity_gap.abs())),
            }
        })
        .collect()
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

pub const RECORD_COLUMNS: [&str; 12] = [
    "scenario",
    "rule",
    "param_name",
    "param_value",
    "replication",
    "objective",
    "utility_pct",
    "parity_gap",
    "eo_gap",
    "eho_gap",
    "status",
    "seed",
];

/// One CSV row per record. Missing values are empty fields.
pub fn write_records_csv<W: Write>(writer: W, sweep: &SweepResult) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(RECORD_COLUMNS)?;
    for r in &sweep.records {
        wtr.write_record([
            r.scenario.to_string(),
            r.rule.to_string(),
            r.param_name.to_string(),
            num(r.param_value),
            r.replication.to_string(),
            num(r.objective),
            num(r.utility_pct),
            num(r.parity_gap),
            num(r.eo_gap),
            num(r.eho_gap),
            r.status.name().to_string(),
            r.seed.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub const AGGREGATE_COLUMNS: [&str; 14] = [
    "scenario",
    "rule",
    "param_name",
    "param_value",
    "count",
    "excluded",
    "utility_pct_q25",
    "utility_pct_median",
    "utility_pct_q75",
    "parity_gap_q25",
    "parity_gap_median",
    "parity_gap_q75",
    "abs_parity_gap_median",
    "abs_parity_gap_q75",
];

pub fn write_aggregates_csv<W: Write>(writer: W, rows: &[AggregateRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(AGGREGATE_COLUMNS)?;
    let q = |q: &Option<Quartiles>, f: fn(&Quartiles) -> f64| q.as_ref().map_or(String::new(), |q| num(f(q)));
    for r in rows {
        wtr.write_record([
            r.scenario.to_string(),
            r.rule.to_string(),
            r.param_name.to_string(),
            num(r.param_value),
            r.count.to_string(),
            r.excluded.to_string(),
            q(&r.utility_pct, |q| q.q25),
            q(&r.utility_pct, |q| q.median),
            q(&r.utility_pct, |q| q.q75),
            q(&r.parity_gap, |q| q.q25),
            q(&r.parity_gap, |q| q.median),
            q(&r.parity_gap, |q| q.q75),
            q(&r.abs_parity_gap, |q| q.median),
            q(&r.abs_parity_gap, |q| q.q75),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
