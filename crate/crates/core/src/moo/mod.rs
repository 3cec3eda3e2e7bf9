//! Multi-objective portfolio selection.
//!
//! Every metric is maximised. A portfolio is a binary choice over candidate
//! actions; its objective vector is each metric's baseline plus the summed
//! contributions of the chosen candidates. Feasibility is a budget on total
//! cost plus optional linear constraints. The solver enumerates all
//! portfolios, keeps the nondominated ones and marks a knee.

mod ahp;
mod knee;
mod pareto;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{ErrorKind, Real};

pub use ahp::{ahp_weights, random_index, AhpResult, PairwiseMatrix, ACCEPTABLE_CR, MAX_ITERATIONS};
pub use knee::{knee_select, normalize};
pub use pareto::{dominates, pareto_filter};

use pareto::StreamingFront;

/// Portfolio enumeration is exhaustive; this caps it at 2^24 evaluations.
pub const MAX_CANDIDATES: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MooError {
    #[error("MOO spec parse error: {0}")]
    Parse(String),
    #[error("spec declares no metrics")]
    NoMetrics,
    #[error("spec declares no candidates")]
    NoCandidates,
    #[error("duplicate metric id \"{0}\"")]
    DuplicateMetric(String),
    #[error("duplicate candidate id \"{0}\"")]
    DuplicateCandidate(String),
    #[error("candidate \"{candidate}\" contributes to unknown metric \"{metric}\"")]
    UnknownMetric { candidate: String, metric: String },
    #[error("constraint \"{constraint}\" references unknown candidate \"{candidate}\"")]
    UnknownCandidate { constraint: String, candidate: String },
    #[error("candidate \"{0}\" has a negative or non-finite cost")]
    BadCost(String),
    #[error("budget must be a non-negative number")]
    BadBudget,
    #[error("non-finite number in {0}")]
    NonFiniteValue(String),
    #[error("{count} candidates exceeds the enumeration guard of {limit}")]
    TooManyCandidates { count: usize, limit: usize },
    #[error("no portfolio satisfies the budget and constraints")]
    NoFeasiblePortfolio,
    #[error("objective vectors must have at least one component")]
    EmptyVector,
    #[error("point {index} has {found} components, expected {expected}")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        index: usize,
    },
    #[error("point {index} has a non-finite component")]
    NonFinite { index: usize },
    #[error("{found} weights given for {expected} objectives")]
    WeightCount { expected: usize, found: usize },
    #[error("weight {index} is negative")]
    NegativeWeight { index: usize },
    #[error("weights sum to {sum}, not 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("frontier is empty")]
    EmptyFrontier,
    #[error("pairwise matrix order {0} is outside 2..=10")]
    MatrixOrder(usize),
    #[error("pairwise matrix row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("pairwise entry ({row}, {col}) must be positive and finite")]
    NonPositiveEntry { row: usize, col: usize },
    #[error("pairwise entry ({row}, {col}) is not a number or fraction: \"{text}\"")]
    BadEntry { row: usize, col: usize, text: String },
    #[error("pairwise diagonal entry {index} is not 1")]
    Diagonal { index: usize },
    #[error("pairwise entries ({row}, {col}) and ({col}, {row}) are not reciprocal")]
    Reciprocity { row: usize, col: usize },
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
}

impl MooError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            MooError::NoFeasiblePortfolio => ErrorKind::Infeasible,
            MooError::NoConvergence(_) => ErrorKind::Internal,
            _ => ErrorKind::Validation,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            MooError::Parse(_) => "parse",
            MooError::NoMetrics => "no_metrics",
            MooError::NoCandidates => "no_candidates",
            MooError::DuplicateMetric(_) => "duplicate_metric",
            MooError::DuplicateCandidate(_) => "duplicate_candidate",
            MooError::UnknownMetric { .. } => "unknown_metric",
            MooError::UnknownCandidate { .. } => "unknown_candidate",
            MooError::BadCost(_) => "bad_cost",
            MooError::BadBudget => "bad_budget",
            MooError::NonFiniteValue(_) => "non_finite",
            MooError::TooManyCandidates { .. } => "too_many_candidates",
            MooError::NoFeasiblePortfolio => "no_feasible_portfolio",
            MooError::EmptyVector => "empty_vector",
            MooError::DimensionMismatch { .. } => "dimension_mismatch",
            MooError::NonFinite { .. } => "non_finite",
            MooError::WeightCount { .. } => "weight_count",
            MooError::NegativeWeight { .. } => "negative_weight",
            MooError::WeightsNotNormalized { .. } => "weights_not_normalized",
            MooError::EmptyFrontier => "empty_frontier",
            MooError::MatrixOrder(_) => "matrix_order",
            MooError::NotSquare { .. } => "not_square",
            MooError::NonPositiveEntry { .. } => "non_positive_entry",
            MooError::BadEntry { .. } => "bad_entry",
            MooError::Diagonal { .. } => "diagonal",
            MooError::Reciprocity { .. } => "reciprocity",
            MooError::NoConvergence(_) => "no_convergence",
        }
    }
}

/// Performance indicators are the quantities the project exists to
/// maximise; surrogates are measurable stand-ins for risk reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[serde(alias = "K", alias = "k")]
    Performance,
    #[serde(alias = "L", alias = "l")]
    Surrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct Metric<T> {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub kind: MetricKind,
    pub baseline: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct CandidateAction<T> {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy_id: Option<String>,
    pub cost: T,
    /// Additive change to each metric when the candidate is selected.
    #[serde(default)]
    pub contributions: BTreeMap<String, T>,
}

/// `sum(coeffs[c] * x_c) <= bound` over selected candidates `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct LinearConstraint<T> {
    pub name: String,
    pub coeffs: BTreeMap<String, T>,
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct ObjectiveSpec<T> {
    pub metrics: Vec<Metric<T>>,
    pub candidates: Vec<CandidateAction<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<T>,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint<T>>,
}

/// The on-disk MOO spec: an [`ObjectiveSpec`] plus optional scalarisation
/// weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct MooDocument<T> {
    pub metrics: Vec<Metric<T>>,
    pub candidates: Vec<CandidateAction<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<T>,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<T>>,
}

impl<T: Real> MooDocument<T> {
    pub fn from_json(source: &str) -> Result<Self, MooError> {
        serde_json::from_str(source).map_err(|e| MooError::Parse(e.to_string()))
    }

    pub fn into_parts(self) -> (ObjectiveSpec<T>, Option<Vec<T>>) {
        (
            ObjectiveSpec {
                metrics: self.metrics,
                candidates: self.candidates,
                budget: self.budget,
                constraints: self.constraints,
            },
            self.weights,
        )
    }
}

impl<T: Real> ObjectiveSpec<T> {
    pub fn validate(&self) -> Result<(), MooError> {
        if self.metrics.is_empty() {
            return Err(MooError::NoMetrics);
        }
        if self.candidates.is_empty() {
            return Err(MooError::NoCandidates);
        }
        let mut metric_ids = HashSet::new();
        for m in &self.metrics {
            if !metric_ids.insert(m.id.as_str()) {
                return Err(MooError::DuplicateMetric(m.id.clone()));
            }
            if !m.baseline.is_finite() {
                return Err(MooError::NonFiniteValue(format!("baseline of metric \"{}\"", m.id)));
            }
        }
        let mut candidate_ids = HashSet::new();
        for c in &self.candidates {
            if !candidate_ids.insert(c.id.as_str()) {
                return Err(MooError::DuplicateCandidate(c.id.clone()));
            }
            if !c.cost.is_finite() || c.cost < T::zero() {
                return Err(MooError::BadCost(c.id.clone()));
            }
            for (metric, delta) in &c.contributions {
                if !metric_ids.contains(metric.as_str()) {
                    return Err(MooError::UnknownMetric {
                        candidate: c.id.clone(),
                        metric: metric.clone(),
                    });
                }
                if !delta.is_finite() {
                    return Err(MooError::NonFiniteValue(format!("contribution of \"{}\"", c.id)));
                }
            }
        }
        if let Some(b) = self.budget {
            if !b.is_finite() || b < T::zero() {
                return Err(MooError::BadBudget);
            }
        }
        for k in &self.constraints {
            if let Some(c) = k.coeffs.keys().find(|c| !candidate_ids.contains(c.as_str())) {
                return Err(MooError::UnknownCandidate {
                    constraint: k.name.clone(),
                    candidate: c.clone(),
                });
            }
            if !k.bound.is_finite() || k.coeffs.values().any(|v| !v.is_finite()) {
                return Err(MooError::NonFiniteValue(format!("constraint \"{}\"", k.name)));
            }
        }
        Ok(())
    }

    pub fn metric_ids(&self) -> Vec<&str> {
        self.metrics.iter().map(|m| m.id.as_str()).collect()
    }
}

/// A binary selection over the spec's candidates, in candidate order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Portfolio(pub Vec<bool>);

impl Portfolio {
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Portfolio((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EvaluatedPortfolio<T> {
    pub portfolio: Portfolio,
    /// Ids of the selected candidates.
    pub selected: Vec<String>,
    pub cost: T,
    pub objectives: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RankedPoint<T> {
    pub frontier_index: usize,
    pub score: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MooSolution<T> {
    pub metrics: Vec<String>,
    /// Nondominated portfolios in enumeration order.
    pub frontier: Vec<EvaluatedPortfolio<T>>,
    pub knee_index: usize,
    /// Frontier by descending weighted sum, present when weights were given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<RankedPoint<T>>>,
    pub weights: Option<Vec<T>>,
    pub evaluated: usize,
    pub feasible: usize,
    /// Feasible portfolios left off the frontier, duplicates included.
    pub dominated_count: usize,
}

impl<T: Real> MooSolution<T> {
    pub fn knee(&self) -> &EvaluatedPortfolio<T> {
        &self.frontier[self.knee_index]
    }
}

/// Checks a weight vector for `dims` objectives.
pub fn validate_weights<T: Real>(weights: &[T], dims: usize) -> Result<(), MooError> {
    if weights.len() != dims {
        return Err(MooError::WeightCount {
            expected: dims,
            found: weights.len(),
        });
    }
    if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < T::zero()) {
        return Err(MooError::NegativeWeight { index: i });
    }
    let sum: T = weights.iter().copied().sum();
    if (sum - T::one()).abs() > T::tolerance() {
        return Err(MooError::WeightsNotNormalized {
            sum: sum.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Weighted sum of an objective vector.
pub fn scalarize<T: Real>(weights: &[T], point: &[T]) -> Result<T, MooError> {
    validate_weights(weights, point.len())?;
    Ok(weights.iter().zip(point).map(|(w, v)| *w * *v).sum())
}

struct Dense<T> {
    baselines: Vec<T>,
    costs: Vec<T>,
    /// `contrib[c][m]`
    contrib: Vec<Vec<T>>,
    constraints: Vec<(Vec<T>, T)>,
}

impl<T: Real> Dense<T> {
    fn new(spec: &ObjectiveSpec<T>) -> Self {
        let contrib = spec
            .candidates
            .iter()
            .map(|c| {
                spec.metrics
                    .iter()
                    .map(|m| c.contributions.get(&m.id).copied().unwrap_or_else(T::zero))
                    .collect()
            })
            .collect();
        let constraints = spec
            .constraints
            .iter()
            .map(|k| {
                let row = spec
                    .candidates
                    .iter()
                    .map(|c| k.coeffs.get(&c.id).copied().unwrap_or_else(T::zero))
                    .collect();
                (row, k.bound)
            })
            .collect();
        Dense {
            baselines: spec.metrics.iter().map(|m| m.baseline).collect(),
            costs: spec.candidates.iter().map(|c| c.cost).collect(),
            contrib,
            constraints,
        }
    }

    fn evaluate(&self, chosen: &[usize], budget: Option<T>) -> Option<(T, Vec<T>)> {
        let cost: T = chosen.iter().map(|&c| self.costs[c]).fold(T::zero(), |a, b| a + b);
        if budget.is_some_and(|b| !T::le_tol(cost, b)) {
            return None;
        }
        for (row, bound) in &self.constraints {
            let lhs: T = chosen.iter().map(|&c| row[c]).sum();
            if !T::le_tol(lhs, *bound) {
                return None;
            }
        }
        let objectives = (0..self.baselines.len())
            .map(|m| self.baselines[m] + chosen.iter().map(|&c| self.contrib[c][m]).sum::<T>())
            .collect();
        Some((cost, objectives))
    }
}

fn check_size(n: usize) -> Result<(), MooError> {
    if n > MAX_CANDIDATES {
        return Err(MooError::TooManyCandidates {
            count: n,
            limit: MAX_CANDIDATES,
        });
    }
    Ok(())
}

fn portfolios<T: Real>(
    spec: &ObjectiveSpec<T>,
) -> impl Iterator<Item = EvaluatedPortfolio<T>> + '_ {
    let n = spec.candidates.len();
    let dense = Dense::new(spec);
    (0u64..1u64 << n).filter_map(move |mask| {
        let chosen: Vec<usize> = (0..n).filter(|c| mask >> c & 1 == 1).collect();
        dense.evaluate(&chosen, spec.budget).map(|(cost, objectives)| EvaluatedPortfolio {
            selected: chosen.iter().map(|&c| spec.candidates[c].id.clone()).collect(),
            portfolio: Portfolio::from_mask(mask, n),
            cost,
            objectives,
        })
    })
}

/// Every feasible portfolio with its objective vector, in enumeration order
/// (candidate `i` is bit `i` of the counter).
pub fn evaluate_portfolios<T: Real>(spec: &ObjectiveSpec<T>) -> Result<Vec<EvaluatedPortfolio<T>>, MooError> {
    spec.validate()?;
    check_size(spec.candidates.len())?;
    Ok(portfolios(spec).collect())
}

/// Enumerates all portfolios, discards infeasible ones, keeps the
/// nondominated set and marks its knee. With weights, the frontier is also
/// ranked by weighted sum (ties keep frontier order).
pub fn solve_moo<T: Real>(spec: &ObjectiveSpec<T>, weights: Option<&[T]>) -> Result<MooSolution<T>, MooError> {
    spec.validate()?;
    let n = spec.candidates.len();
    check_size(n)?;
    if let Some(w) = weights {
        validate_weights(w, spec.metrics.len())?;
    }

    let mut front = StreamingFront::new();
    let mut feasible = 0usize;
    for p in portfolios(spec) {
        feasible += 1;
        let objectives = p.objectives.clone();
        front.offer(objectives, p);
    }
    if feasible == 0 {
        return Err(MooError::NoFeasiblePortfolio);
    }
    let mut frontier: Vec<EvaluatedPortfolio<T>> = front.members.into_iter().map(|(_, p)| p).collect();
    // back to enumeration order; the mask is the portfolio read as binary
    let mask = |p: &Portfolio| p.selected().fold(0u64, |acc, i| acc | 1 << i);
    frontier.sort_by_key(|p| mask(&p.portfolio));

    let vectors: Vec<Vec<T>> = frontier.iter().map(|p| p.objectives.clone()).collect();
    let knee_index = knee_select(&vectors)?;
    let ranking = match weights {
        Some(w) => {
            let mut ranked = vectors
                .iter()
                .enumerate()
                .map(|(i, v)| scalarize(w, v).map(|score| RankedPoint { frontier_index: i, score }))
                .collect::<Result<Vec<_>, _>>()?;
            ranked.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal));
            Some(ranked)
        }
        None => None,
    };
    Ok(MooSolution {
        metrics: spec.metrics.iter().map(|m| m.id.clone()).collect(),
        dominated_count: feasible - frontier.len(),
        frontier,
        knee_index,
        ranking,
        weights: weights.map(<[T]>::to_vec),
        evaluated: 1usize << n,
        feasible,
    })
}
