//! Risk and Control Matrix: risks as rows, candidate controls as columns, a
//! marked cell when the control mitigates the risk. Control selection is a
//! weighted minimum set cover, see [`solve_cover`].

mod solve;

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{ErrorKind, Real};

pub use solve::{solve_cover, CoverMode, CoverResult, SolvedMode, AUTO_EXACT_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Risk {
    pub id: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Real")]
pub struct Control<T> {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy_id: Option<String>,
    #[serde(default)]
    pub description: String,
    pub cost: T,
    #[serde(default)]
    pub forced_in: bool,
    #[serde(default)]
    pub forced_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Real")]
struct RacmDocument<T> {
    risks: Vec<Risk>,
    controls: Vec<Control<T>>,
    #[serde(default)]
    coverage: BTreeSet<(String, String)>,
    #[serde(default)]
    budget: Option<T>,
}

/// A risk and control matrix. Deserialising validates; values built in code
/// are validated by the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(try_from = "RacmDocument<T>")]
pub struct Racm<T> {
    pub risks: Vec<Risk>,
    pub controls: Vec<Control<T>>,
    /// `(risk_id, control_id)` pairs.
    pub coverage: BTreeSet<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<T>,
}

impl<T: Real> TryFrom<RacmDocument<T>> for Racm<T> {
    type Error = RacmError;

    fn try_from(doc: RacmDocument<T>) -> Result<Self, RacmError> {
        let racm = Racm {
            risks: doc.risks,
            controls: doc.controls,
            coverage: doc.coverage,
            budget: doc.budget,
        };
        racm.validate()?;
        Ok(racm)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default)]
    pub force_in: BTreeSet<String>,
    #[serde(default)]
    pub force_out: BTreeSet<String>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.force_in.is_empty() && self.force_out.is_empty()
    }

    pub fn check_disjoint(&self) -> Result<(), RacmError> {
        match self.force_in.intersection(&self.force_out).next() {
            Some(id) => Err(RacmError::ConflictingOverride(id.clone())),
            None => Ok(()),
        }
    }

    /// Layers `newer` on top of `self`: an id forced either way by `newer`
    /// loses any opposite flag it had here.
    pub fn merged_with(&self, newer: &Overrides) -> Result<Overrides, RacmError> {
        newer.check_disjoint()?;
        let force_in = self
            .force_in
            .difference(&newer.force_out)
            .chain(&newer.force_in)
            .cloned()
            .collect();
        let force_out = self
            .force_out
            .difference(&newer.force_in)
            .chain(&newer.force_out)
            .cloned()
            .collect();
        let merged = Overrides { force_in, force_out };
        merged.check_disjoint()?;
        Ok(merged)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RacmError {
    #[error("RACM parse error: {0}")]
    Parse(String),
    #[error("duplicate risk id \"{0}\"")]
    DuplicateRisk(String),
    #[error("duplicate control id \"{0}\"")]
    DuplicateControl(String),
    #[error("coverage cell [{risk}, {control}] names unknown risk \"{risk}\"")]
    UnknownRisk { risk: String, control: String },
    #[error("coverage cell [{risk}, {control}] names unknown control \"{control}\"")]
    UnknownControl { risk: String, control: String },
    #[error("control \"{control}\" has non-positive cost {cost}")]
    NonPositiveCost { control: String, cost: f64 },
    #[error("budget must be positive, got {0}")]
    NonPositiveBudget(f64),
    #[error("control \"{0}\" is both forced in and forced out")]
    BothForced(String),
    #[error("override names unknown control \"{0}\"")]
    UnknownOverride(String),
    #[error("control \"{0}\" is in both force_in and force_out")]
    ConflictingOverride(String),
    #[error("no admissible control covers risk(s): {}", .0.join(", "))]
    UncoverableRisk(Vec<String>),
    #[error("cheapest cover costs {min_cost}, above budget {budget}")]
    BudgetInfeasible { min_cost: f64, budget: f64 },
    #[error("greedy cover stuck within budget with risk(s) {} uncovered; try exact mode", .0.join(", "))]
    GreedyStuck(Vec<String>),
}

impl RacmError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            RacmError::UncoverableRisk(_)
            | RacmError::BudgetInfeasible { .. }
            | RacmError::GreedyStuck(_) => ErrorKind::Infeasible,
            _ => ErrorKind::Validation,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            RacmError::Parse(_) => "parse",
            RacmError::DuplicateRisk(_) => "duplicate_risk",
            RacmError::DuplicateControl(_) => "duplicate_control",
            RacmError::UnknownRisk { .. } => "unknown_risk",
            RacmError::UnknownControl { .. } => "unknown_control",
            RacmError::NonPositiveCost { .. } => "non_positive_cost",
            RacmError::NonPositiveBudget(_) => "non_positive_budget",
            RacmError::BothForced(_) => "both_forced",
            RacmError::UnknownOverride(_) => "unknown_override",
            RacmError::ConflictingOverride(_) => "conflicting_override",
            RacmError::UncoverableRisk(_) => "uncoverable_risk",
            RacmError::BudgetInfeasible { .. } => "budget_infeasible",
            RacmError::GreedyStuck(_) => "greedy_stuck",
        }
    }
}

fn as_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

impl<T: Real> Racm<T> {
    pub fn from_json(source: &str) -> Result<Self, RacmError> {
        serde_json::from_str(source).map_err(|e| RacmError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), RacmError> {
        let mut risk_ids = HashSet::new();
        for r in &self.risks {
            if !risk_ids.insert(r.id.as_str()) {
                return Err(RacmError::DuplicateRisk(r.id.clone()));
            }
        }
        let mut control_ids = HashSet::new();
        for c in &self.controls {
            if !control_ids.insert(c.id.as_str()) {
                return Err(RacmError::DuplicateControl(c.id.clone()));
            }
            if !c.cost.is_finite() || c.cost <= T::zero() {
                return Err(RacmError::NonPositiveCost {
                    control: c.id.clone(),
                    cost: as_f64(c.cost),
                });
            }
            if c.forced_in && c.forced_out {
                return Err(RacmError::BothForced(c.id.clone()));
            }
        }
        for (risk, control) in &self.coverage {
            if !risk_ids.contains(risk.as_str()) {
                return Err(RacmError::UnknownRisk {
                    risk: risk.clone(),
                    control: control.clone(),
                });
            }
            if !control_ids.contains(control.as_str()) {
                return Err(RacmError::UnknownControl {
                    risk: risk.clone(),
                    control: control.clone(),
                });
            }
        }
        if let Some(b) = self.budget {
            if b.is_nan() || b <= T::zero() {
                return Err(RacmError::NonPositiveBudget(as_f64(b)));
            }
        }
        Ok(())
    }

    pub fn control(&self, id: &str) -> Option<&Control<T>> {
        self.controls.iter().find(|c| c.id == id)
    }

    /// Risk ids covered by a control, in row order.
    pub fn covered_by(&self, control_id: &str) -> Vec<&str> {
        self.risks
            .iter()
            .filter(|r| self.coverage.contains(&(r.id.clone(), control_id.to_string())))
            .map(|r| r.id.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("RACM serializes")
    }
}

/// Returns a copy of `racm` with override flags applied. Overrides replace
/// whatever flag a control carried before.
pub fn apply_overrides<T: Real>(racm: &Racm<T>, overrides: &Overrides) -> Result<Racm<T>, RacmError> {
    overrides.check_disjoint()?;
    if let Some(id) = overrides
        .force_in
        .iter()
        .chain(&overrides.force_out)
        .find(|id| racm.control(id).is_none())
    {
        return Err(RacmError::UnknownOverride(id.clone()));
    }
    let mut out = racm.clone();
    for c in &mut out.controls {
        if overrides.force_in.contains(&c.id) {
            c.forced_in = true;
            c.forced_out = false;
        } else if overrides.force_out.contains(&c.id) {
            c.forced_out = true;
            c.forced_in = false;
        }
    }
    out.validate()?;
    Ok(out)
}
