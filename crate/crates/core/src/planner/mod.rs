//! End-to-end analyst workflow: profile filter, optional AHP weighting, RACM
//! cover and portfolio optimisation, assembled into one report, plus the
//! override-and-resolve loop.

mod report;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{filter_by_profile, Catalog, CatalogError, Category, ProjectProfile, Subcategory};
use crate::moo::{ahp_weights, solve_moo, validate_weights, AhpResult, MooDocument, MooError, MooSolution, PairwiseMatrix};
use crate::racm::{apply_overrides, solve_cover, CoverMode, CoverResult, Overrides, Racm, RacmError};
use crate::{ErrorKind, Real};

pub use report::{render_report, ReportFormat};

/// Where scalarisation weights come from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "T: Real")]
pub enum WeightsSource<T> {
    #[default]
    None,
    Explicit(Vec<T>),
    Pairwise(PairwiseMatrix<T>),
}

impl<T> WeightsSource<T> {
    fn is_none(&self) -> bool {
        matches!(self, WeightsSource::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct PlanRequest<T> {
    pub profile: ProjectProfile,
    /// Defaults to the bundled seed catalog.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<Catalog>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub racm: Option<Racm<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moo_spec: Option<MooDocument<T>>,
    #[serde(default, skip_serializing_if = "WeightsSource::is_none")]
    pub weights: WeightsSource<T>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub mode: CoverMode,
}

impl<T: Real> PlanRequest<T> {
    pub fn from_json(source: &str) -> Result<Self, PlanError> {
        serde_json::from_str(source).map_err(|e| PlanError::request(e.to_string()))
    }

    fn validate(&self) -> Result<(), PlanError> {
        if self.racm.is_none() && self.moo_spec.is_none() {
            return Err(PlanError::request("request needs a racm, a moo_spec, or both"));
        }
        if self.racm.is_none() && !self.overrides.is_empty() {
            return Err(PlanError::request("overrides given without a racm"));
        }
        if let Some(doc) = &self.moo_spec {
            let metrics = doc.metrics.len();
            let n = match &self.weights {
                WeightsSource::None => None,
                WeightsSource::Explicit(w) => Some(w.len()),
                WeightsSource::Pairwise(m) => Some(m.order()),
            };
            if let Some(n) = n.filter(|&n| n != metrics) {
                return Err(PlanError::request(format!(
                    "weights source covers {n} criteria but the moo_spec has {metrics} metrics"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Request,
    Filter,
    Weights,
    Cover,
    Moo,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Request => "request",
            Stage::Filter => "filter",
            Stage::Weights => "weights",
            Stage::Cover => "cover",
            Stage::Moo => "moo",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StageError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Racm(#[from] RacmError),
    #[error(transparent)]
    Moo(#[from] MooError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("stage {stage}: {source}")]
pub struct PlanError {
    pub stage: Stage,
    pub source: StageError,
}

impl PlanError {
    pub fn new(stage: Stage, source: impl Into<StageError>) -> Self {
        PlanError {
            stage,
            source: source.into(),
        }
    }

    pub fn request(message: impl Into<String>) -> Self {
        PlanError::new(Stage::Request, StageError::Invalid(message.into()))
    }

    pub fn kind(&self) -> ErrorKind {
        match &self.source {
            StageError::Invalid(_) => ErrorKind::Validation,
            StageError::Catalog(e) => e.kind(),
            StageError::Racm(e) => e.kind(),
            StageError::Moo(e) => e.kind(),
        }
    }

    pub fn code(&self) -> &'static str {
        match &self.source {
            StageError::Invalid(_) => "invalid_request",
            StageError::Catalog(e) => e.code(),
            StageError::Racm(e) => e.code(),
            StageError::Moo(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortlistEntry {
    pub id: String,
    pub name: String,
    pub categories: BTreeSet<Category>,
    pub subcategories: BTreeSet<Subcategory>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsOrigin {
    Explicit,
    Ahp,
    /// Taken from the `weights` field of the MOO spec document.
    Spec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WeightsReport<T> {
    pub origin: WeightsOrigin,
    pub weights: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ahp: Option<AhpResult<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub code: String,
    pub message: String,
}

impl Warning {
    fn new(code: &str, message: String) -> Self {
        Warning {
            code: code.to_string(),
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideEvent {
    pub step: usize,
    /// Overrides submitted in this step.
    pub submitted: Overrides,
    /// Overrides in force after merging.
    pub effective: Overrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PlanReport<T> {
    pub profile: ProjectProfile,
    pub catalog: String,
    pub admitted: BTreeSet<Category>,
    pub shortlist: Vec<ShortlistEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsReport<T>>,
    pub overrides: Overrides,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverResult<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moo: Option<MooSolution<T>>,
    pub warnings: Vec<Warning>,
    pub override_history: Vec<OverrideEvent>,
    pub summary: Vec<String>,
}

fn link_warnings<'a>(
    what: &str,
    links: impl Iterator<Item = (&'a str, Option<&'a str>)>,
    catalog: &Catalog,
    shortlist: &BTreeSet<&str>,
) -> Vec<Warning> {
    links
        .filter_map(|(id, strategy)| {
            let strategy = strategy?;
            if !catalog.contains(strategy) {
                Some(Warning::new(
                    "unknown_strategy",
                    format!("{what} \"{id}\" links to strategy \"{strategy}\", which is not in the catalog"),
                ))
            } else if !shortlist.contains(strategy) {
                Some(Warning::new(
                    "outside_shortlist",
                    format!("{what} \"{id}\" uses strategy \"{strategy}\", outside the profile shortlist"),
                ))
            } else {
                None
            }
        })
        .collect()
}

fn summarize<T: Real>(report: &PlanReport<T>) -> Vec<String> {
    let mut lines = vec![format!(
        "{} of {} categories admitted ({}); {} strategies shortlisted",
        report.admitted.len(),
        Category::ALL.len(),
        report.admitted.iter().map(|c| c.label()).collect::<Vec<_>>().join(", "),
        report.shortlist.len()
    )];
    if let Some(w) = &report.weights {
        let mut line = format!(
            "weights ({:?}): {}",
            w.origin,
            w.weights.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
        )
        .to_lowercase();
        if let Some(a) = &w.ahp {
            line.push_str(&format!(
                "; consistency ratio {:.4} ({})",
                a.consistency_ratio,
                if a.acceptable { "acceptable" } else { "inconsistent" }
            ));
        }
        lines.push(line);
    }
    if let Some(c) = &report.cover {
        lines.push(format!(
            "cover: {} at total cost {} ({}{})",
            c.selected.join(", "),
            c.total_cost,
            if c.optimal { "exact, optimal" } else { "greedy" },
            c.approximation_bound
                .map(|h| format!(", within {h:.4}x of optimal"))
                .unwrap_or_default()
        ));
    }
    if let Some(m) = &report.moo {
        let knee = m.knee();
        lines.push(format!(
            "frontier: {} nondominated of {} feasible portfolios; knee {{{}}} at ({})",
            m.frontier.len(),
            m.feasible,
            knee.selected.join(", "),
            knee.objectives.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
        ));
    }
    if !report.warnings.is_empty() {
        lines.push(format!("{} warning(s)", report.warnings.len()));
    }
    lines
}

/// Runs the pipeline once.
///
/// Shortlist warnings are advisory: they never change what the solvers see.
/// When both a RACM and a MOO spec are present the two solves run on
/// separate threads; the report is assembled afterwards in a fixed order.
pub fn plan<T: Real>(request: &PlanRequest<T>) -> Result<PlanReport<T>, PlanError> {
    request.validate()?;
    let seed;
    let catalog = match &request.catalog {
        Some(c) => c,
        None => {
            seed = Catalog::seed();
            &seed
        }
    };

    let shortlist = filter_by_profile(catalog, &request.profile);
    let shortlisted: BTreeSet<&str> = shortlist.strategies.iter().map(|s| s.id.as_str()).collect();
    let mut warnings = Vec::new();

    let (spec, spec_weights) = match &request.moo_spec {
        Some(doc) => {
            let (spec, w) = doc.clone().into_parts();
            (Some(spec), w)
        }
        None => (None, None),
    };

    let weights = match &request.weights {
        WeightsSource::None => spec_weights.map(|w| WeightsReport {
            origin: WeightsOrigin::Spec,
            weights: w,
            ahp: None,
        }),
        WeightsSource::Explicit(w) => Some(WeightsReport {
            origin: WeightsOrigin::Explicit,
            weights: w.clone(),
            ahp: None,
        }),
        WeightsSource::Pairwise(m) => {
            let ahp = ahp_weights(m).map_err(|e| PlanError::new(Stage::Weights, e))?;
            if !ahp.acceptable {
                warnings.push(Warning::new(
                    "ahp_inconsistent",
                    format!(
                        "pairwise judgments have consistency ratio {:.4} > {}; weights used anyway",
                        ahp.consistency_ratio,
                        crate::moo::ACCEPTABLE_CR
                    ),
                ));
            }
            Some(WeightsReport {
                origin: WeightsOrigin::Ahp,
                weights: ahp.weights.clone(),
                ahp: Some(ahp),
            })
        }
    };
    if let Some(w) = &weights {
        match &spec {
            Some(s) => validate_weights(&w.weights, s.metrics.len()).map_err(|e| PlanError::new(Stage::Weights, e))?,
            None => warnings.push(Warning::new(
                "weights_unused",
                "weights were supplied but there is no moo_spec to rank".to_string(),
            )),
        }
    }

    let run_cover = |racm: &Racm<T>| -> Result<CoverResult<T>, PlanError> {
        let adjusted = apply_overrides(racm, &request.overrides).map_err(|e| PlanError::new(Stage::Cover, e))?;
        solve_cover(&adjusted, request.mode).map_err(|e| PlanError::new(Stage::Cover, e))
    };
    let weight_slice = weights.as_ref().map(|w| w.weights.as_slice());
    let run_moo = |s: &crate::moo::ObjectiveSpec<T>| -> Result<MooSolution<T>, PlanError> {
        solve_moo(s, weight_slice).map_err(|e| PlanError::new(Stage::Moo, e))
    };

    let (cover, moo) = match (&request.racm, &spec) {
        (Some(r), Some(s)) => std::thread::scope(|scope| {
            let cover = scope.spawn(|| run_cover(r));
            let moo = run_moo(s);
            (cover.join().expect("cover solver panicked").map(Some), moo.map(Some))
        }),
        (r, s) => (r.as_ref().map(run_cover).transpose(), s.as_ref().map(run_moo).transpose()),
    };
    // cover errors take precedence so the reported stage is schedule-independent
    let (cover, moo) = match (cover, moo) {
        (Ok(c), Ok(m)) => (c, m),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };

    if let Some(r) = &request.racm {
        warnings.extend(link_warnings(
            "control",
            r.controls.iter().map(|c| (c.id.as_str(), c.strategy_id.as_deref())),
            catalog,
            &shortlisted,
        ));
    }
    if let Some(s) = &spec {
        warnings.extend(link_warnings(
            "candidate",
            s.candidates.iter().map(|c| (c.id.as_str(), c.strategy_id.as_deref())),
            catalog,
            &shortlisted,
        ));
    }

    let mut report = PlanReport {
        profile: request.profile,
        catalog: catalog.summary(),
        admitted: shortlist.admitted.clone(),
        shortlist: shortlist
            .strategies
            .iter()
            .map(|s| ShortlistEntry {
                id: s.id.clone(),
                name: s.name.clone(),
                categories: s.categories.clone(),
                subcategories: s.subcategories.clone(),
            })
            .collect(),
        weights,
        overrides: request.overrides.clone(),
        cover,
        moo,
        warnings,
        override_history: Vec::new(),
        summary: Vec::new(),
    };
    report.summary = summarize(&report);
    Ok(report)
}

/// Re-runs `request` with `new_overrides` layered over its own overrides
/// (newer flags win) and appends the step to the previous report's history.
pub fn replan<T: Real>(
    previous: &PlanReport<T>,
    request: &PlanRequest<T>,
    new_overrides: &Overrides,
) -> Result<PlanReport<T>, PlanError> {
    if request.racm.is_none() && !new_overrides.is_empty() {
        return Err(PlanError::request("overrides given without a racm"));
    }
    let merged = request
        .overrides
        .merged_with(new_overrides)
        .map_err(|e| PlanError::new(Stage::Request, e))?;
    let next = PlanRequest {
        overrides: merged.clone(),
        ..request.clone()
    };
    let mut report = plan(&next)?;
    report.override_history = previous.override_history.clone();
    report.override_history.push(OverrideEvent {
        step: previous.override_history.len() + 1,
        submitted: new_overrides.clone(),
        effective: merged,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moo::fixtures::spacecraft;
    use crate::racm::fixtures::four_risks;

    fn cover_request() -> PlanRequest<f64> {
        PlanRequest {
            profile: ProjectProfile::minimal(),
            catalog: None,
            racm: Some(four_risks()),
            moo_spec: None,
            weights: WeightsSource::None,
            overrides: Overrides::default(),
            mode: CoverMode::Exact,
        }
    }

    fn moo_request() -> PlanRequest<f64> {
        let s = spacecraft();
        PlanRequest {
            profile: ProjectProfile::minimal(),
            catalog: None,
            racm: None,
            moo_spec: Some(MooDocument {
                metrics: s.metrics,
                candidates: s.candidates,
                budget: s.budget,
                constraints: s.constraints,
                weights: None,
            }),
            weights: WeightsSource::Pairwise(PairwiseMatrix::uniform(2).unwrap()),
            overrides: Overrides::default(),
            mode: CoverMode::Auto,
        }
    }

    #[test]
    fn cover_only_plan() {
        let r = plan(&cover_request()).unwrap();
        assert_eq!(r.admitted, BTreeSet::from([Category::Structural]));
        let c = r.cover.unwrap();
        assert_eq!(c.selected, vec!["c2", "c4"]);
        assert_eq!(c.total_cost, 4.0);
        assert!(r.moo.is_none());
    }

    #[test]
    fn moo_with_uniform_pairwise() {
        let r = plan(&moo_request()).unwrap();
        let w = r.weights.unwrap();
        assert_eq!(w.origin, WeightsOrigin::Ahp);
        assert!((w.weights[0] - 0.5).abs() < 1e-12 && (w.weights[1] - 0.5).abs() < 1e-12);
        assert_eq!(w.ahp.unwrap().consistency_ratio, 0.0);
        let m = r.moo.unwrap();
        assert_eq!(m.knee().selected, vec!["C"]);
        assert!(m.ranking.is_some());
        // all three candidates link to a structural strategy on the shortlist
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }

    #[test]
    fn empty_request_fails_at_request_stage() {
        let mut req = cover_request();
        req.racm = None;
        let err = plan(&req).unwrap_err();
        assert_eq!(err.stage, Stage::Request);
        assert_eq!(err.kind(), ErrorKind::Validation);
    }

    #[test]
    fn replan_force_out() {
        let req = cover_request();
        let first = plan(&req).unwrap();
        let ov = Overrides {
            force_in: Default::default(),
            force_out: ["c2".to_string()].into(),
        };
        let second = replan(&first, &req, &ov).unwrap();
        let c = second.cover.as_ref().unwrap();
        assert_eq!(c.selected, vec!["c5"]);
        assert_eq!(c.total_cost, 5.0);
        assert_eq!(second.override_history.len(), 1);
        assert_eq!(second.override_history[0].effective, ov);
        assert!(first.override_history.is_empty());
    }

    #[test]
    fn replan_with_nothing_matches_plan() {
        let req = cover_request();
        let first = plan(&req).unwrap();
        let mut again = replan(&first, &req, &Overrides::default()).unwrap();
        assert_eq!(again.override_history.len(), 1);
        again.override_history.clear();
        assert_eq!(again, first);
    }

    #[test]
    fn replan_conflict() {
        let req = cover_request();
        let first = plan(&req).unwrap();
        let ov = Overrides {
            force_in: ["c3".to_string()].into(),
            force_out: ["c3".to_string()].into(),
        };
        let err = replan(&first, &req, &ov).unwrap_err();
        assert_eq!(err.code(), "conflicting_override");
    }

    #[test]
    fn shortlist_warnings_never_change_solutions() {
        let mut req = cover_request();
        let mut linked = four_risks();
        linked.controls[0].strategy_id = Some("misdirection".into());
        linked.controls[1].strategy_id = Some("resilient-design".into());
        linked.controls[2].strategy_id = Some("no-such-thing".into());
        req.racm = Some(linked);
        let with_links = plan(&req).unwrap();
        let codes: Vec<&str> = with_links.warnings.iter().map(|w| w.code.as_str()).collect();
        assert_eq!(codes, vec!["outside_shortlist", "unknown_strategy"]);
        let plain = plan(&cover_request()).unwrap();
        assert_eq!(with_links.cover, plain.cover);
    }

    #[test]
    fn inconsistent_ahp_warns() {
        let mut req = moo_request();
        req.moo_spec.as_mut().unwrap().metrics.push(crate::moo::Metric {
            id: "mass".into(),
            name: String::new(),
            kind: crate::moo::MetricKind::Performance,
            baseline: 0.0,
        });
        req.weights = WeightsSource::Pairwise(
            PairwiseMatrix::new(vec![
                vec![1.0, 9.0, 1.0 / 9.0],
                vec![1.0 / 9.0, 1.0, 9.0],
                vec![9.0, 1.0 / 9.0, 1.0],
            ])
            .unwrap(),
        );
        let r = plan(&req).unwrap();
        assert!(r.warnings.iter().any(|w| w.code == "ahp_inconsistent"));
        assert!(r.moo.is_some());
    }

    #[test]
    fn weight_count_mismatch() {
        let mut req = moo_request();
        req.weights = WeightsSource::Explicit(vec![1.0]);
        assert_eq!(plan(&req).unwrap_err().stage, Stage::Request);
    }

    #[test]
    fn request_document_shape() {
        let doc = r#"{
            "profile": {"risk_magnitude":"low","resources":"low","complexity":"low",
                        "time_available":"short","adversarial":false,"opportunity_seeking":false},
            "racm": {"risks":[{"id":"r1"}],"controls":[{"id":"c1","cost":1}],"coverage":[["r1","c1"]]},
            "weights": {"explicit": [1.0]},
            "mode": "greedy"
        }"#;
        let req = PlanRequest::<f64>::from_json(doc).unwrap();
        assert_eq!(req.mode, CoverMode::Greedy);
        assert_eq!(req.weights, WeightsSource::Explicit(vec![1.0]));
        let r = plan(&req).unwrap();
        assert!(r.warnings.iter().any(|w| w.code == "weights_unused"));
    }
}
