//! Transport-independent operations. Each takes a parsed input document and
//! returns the exact bytes that both the CLI and the HTTP service emit.

use rdot::catalog::{filter_by_profile, SuggestError, DEFAULT_SUGGESTIONS};
use rdot::moo::{validate_weights, MooError};
use rdot::planner::PlanError;
use rdot::{
    ahp_weights, apply_overrides, plan, render_report, replan, solve_cover, solve_moo, suggest_for_components,
    Catalog, CatalogError, CoverMode, ErrorKind, MooDocument, Overrides, PairwiseMatrix, PlanReport, PlanRequest,
    ProjectProfile, Racm, RacmError, ReportFormat, SystemDescription,
};
use serde::{Deserialize, Serialize};

/// A failed operation: a coarse class, a specific snake_case code and a
/// human-readable detail.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{detail}")]
pub struct ApiError {
    pub kind: ErrorKind,
    pub code: String,
    pub detail: String,
}

impl ApiError {
    pub fn validation(code: &str, detail: impl Into<String>) -> Self {
        ApiError {
            kind: ErrorKind::Validation,
            code: code.to_string(),
            detail: detail.into(),
        }
    }

    pub fn internal(detail: impl Into<String>) -> Self {
        ApiError {
            kind: ErrorKind::Internal,
            code: "internal".to_string(),
            detail: detail.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Infeasible => 2,
            ErrorKind::Internal => 3,
        }
    }

    pub fn status(&self) -> u16 {
        match self.kind {
            ErrorKind::Validation => 400,
            ErrorKind::Infeasible => 422,
            ErrorKind::Internal => 500,
        }
    }

    /// `{"error_kind": ..., "code": ..., "detail": ...}`
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            error_kind: ErrorKind,
            code: &'a str,
            detail: &'a str,
        }
        output(&Body {
            error_kind: self.kind,
            code: &self.code,
            detail: &self.detail,
        })
    }
}

macro_rules! from_module_error {
    ($($t:ty),*) => {$(
        impl From<$t> for ApiError {
            fn from(e: $t) -> Self {
                ApiError { kind: e.kind(), code: e.code().to_string(), detail: e.to_string() }
            }
        }
    )*};
}

from_module_error!(CatalogError, RacmError, MooError, SuggestError, PlanError);

impl From<serde_json::Error> for ApiError {
    fn from(e: serde_json::Error) -> Self {
        ApiError::validation("parse", e.to_string())
    }
}

pub type ApiResult = Result<String, ApiError>;

/// Pretty JSON with a trailing newline: the one output encoding.
pub fn output<S: Serialize + ?Sized>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output values serialize");
    s.push('\n');
    s
}

/// Parses an input document, mapping failures to validation errors.
pub fn parse<T: serde::de::DeserializeOwned>(source: &str) -> Result<T, ApiError> {
    Ok(serde_json::from_str(source)?)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterInput {
    pub profile: ProjectProfile,
    #[serde(default)]
    pub catalog: Option<Catalog>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestInput {
    pub system: SystemDescription,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub catalog: Option<Catalog>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverInput {
    pub racm: Racm,
    #[serde(default)]
    pub mode: CoverMode,
    #[serde(default)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MooInput {
    pub spec: MooDocument,
    /// Replaces any weights in the spec document.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Derive weights from pairwise judgments instead.
    #[serde(default)]
    pub matrix: Option<PairwiseMatrix>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AhpInput {
    pub matrix: PairwiseMatrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanInput {
    pub request: PlanRequest,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplanInput {
    pub request: PlanRequest,
    #[serde(default)]
    pub overrides: Overrides,
    /// The report being revised; when absent the request is planned first.
    #[serde(default)]
    pub previous: Option<PlanReport>,
}

pub fn catalog(catalog: &Catalog) -> String {
    let mut s = catalog.to_json();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct ShortlistOut<'a> {
    admitted: &'a std::collections::BTreeSet<rdot::Category>,
    count: usize,
    strategies: Vec<&'a str>,
}

pub fn filter(input: &FilterInput) -> ApiResult {
    let seed;
    let catalog = match &input.catalog {
        Some(c) => c,
        None => {
            seed = Catalog::seed();
            &seed
        }
    };
    let shortlist = filter_by_profile(catalog, &input.profile);
    Ok(output(&ShortlistOut {
        admitted: &shortlist.admitted,
        count: shortlist.strategies.len(),
        strategies: shortlist.ids(),
    }))
}

pub fn suggest(input: &SuggestInput) -> ApiResult {
    let seed;
    let catalog = match &input.catalog {
        Some(c) => c,
        None => {
            seed = Catalog::seed();
            &seed
        }
    };
    let out = suggest_for_components(catalog, &input.system, input.k.unwrap_or(DEFAULT_SUGGESTIONS))?;
    #[derive(Serialize)]
    struct Out {
        components: Vec<rdot::catalog::ComponentSuggestions>,
    }
    Ok(output(&Out { components: out }))
}

pub fn cover(input: &CoverInput) -> ApiResult {
    let racm = if input.overrides.is_empty() {
        input.racm.clone()
    } else {
        apply_overrides(&input.racm, &input.overrides)?
    };
    Ok(output(&solve_cover(&racm, input.mode)?))
}

pub fn moo(input: &MooInput) -> ApiResult {
    let (spec, doc_weights) = input.spec.clone().into_parts();
    let weights = match (&input.weights, &input.matrix) {
        (Some(_), Some(_)) => {
            return Err(ApiError::validation("weights_conflict", "give weights or a matrix, not both"));
        }
        (Some(w), None) => Some(w.clone()),
        (None, Some(m)) => Some(ahp_weights(m)?.weights),
        (None, None) => doc_weights,
    };
    if let Some(w) = &weights {
        validate_weights(w, spec.metrics.len())?;
    }
    Ok(output(&solve_moo(&spec, weights.as_deref())?))
}

pub fn ahp(input: &AhpInput) -> ApiResult {
    Ok(output(&ahp_weights(&input.matrix)?))
}

pub fn plan_report(input: &PlanInput, format: ReportFormat) -> ApiResult {
    Ok(render_report(&plan(&input.request)?, format))
}

pub fn replan_report(input: &ReplanInput, format: ReportFormat) -> ApiResult {
    let previous = match &input.previous {
        Some(p) => p.clone(),
        None => plan(&input.request)?,
    };
    Ok(render_report(&replan(&previous, &input.request, &input.overrides)?, format))
}

/// One line of `validate` output.
#[derive(Debug, Clone, Serialize)]
pub struct Checked {
    pub document: &'static str,
    pub summary: String,
}

/// Documents handed to `validate`, as raw sources.
#[derive(Debug, Clone, Default)]
pub struct ValidateInput {
    pub catalog: Option<String>,
    pub profile: Option<String>,
    pub racm: Option<String>,
    pub spec: Option<String>,
    pub matrix: Option<String>,
    pub request: Option<String>,
    pub system: Option<String>,
}

/// Parses and checks each supplied document. Parsing is all that happens:
/// a RACM with an uncoverable risk is still well-formed.
pub fn validate(input: &ValidateInput) -> ApiResult {
    let mut checked = Vec::new();
    if let Some(src) = &input.catalog {
        let c = rdot::load_catalog(src)?;
        checked.push(Checked {
            document: "catalog",
            summary: c.summary(),
        });
    }
    if let Some(src) = &input.profile {
        let p: ProjectProfile = parse(src)?;
        let admitted: Vec<&str> = rdot::catalog::admitted_categories(&p).iter().map(|c| c.label()).collect();
        checked.push(Checked {
            document: "profile",
            summary: format!("admits {}", admitted.join(", ")),
        });
    }
    if let Some(src) = &input.racm {
        let r = Racm::from_json(src)?;
        checked.push(Checked {
            document: "racm",
            summary: format!(
                "{} risks, {} controls, {} coverage cells",
                r.risks.len(),
                r.controls.len(),
                r.coverage.len()
            ),
        });
    }
    if let Some(src) = &input.spec {
        let d = MooDocument::from_json(src)?;
        let (spec, _) = d.into_parts();
        spec.validate()?;
        checked.push(Checked {
            document: "spec",
            summary: format!("{} metrics, {} candidates", spec.metrics.len(), spec.candidates.len()),
        });
    }
    if let Some(src) = &input.matrix {
        let m: PairwiseMatrix = parse(src)?;
        checked.push(Checked {
            document: "matrix",
            summary: format!("{0}x{0} reciprocal matrix", m.order()),
        });
    }
    if let Some(src) = &input.request {
        let r = PlanRequest::from_json(src)?;
        let parts: Vec<&str> = [r.racm.as_ref().map(|_| "racm"), r.moo_spec.as_ref().map(|_| "moo_spec")]
            .into_iter()
            .flatten()
            .collect();
        if parts.is_empty() {
            return Err(PlanError::request("request needs a racm, a moo_spec, or both").into());
        }
        checked.push(Checked {
            document: "request",
            summary: format!("plan request with {}", parts.join(" and ")),
        });
    }
    if let Some(src) = &input.system {
        let s: SystemDescription = parse(src)?;
        checked.push(Checked {
            document: "system",
            summary: format!("{} components, {} hazards", s.components.len(), s.hazards.len()),
        });
    }
    if checked.is_empty() {
        return Err(ApiError::validation("nothing_to_validate", "no documents given"));
    }
    #[derive(Serialize)]
    struct Out {
        valid: bool,
        documents: Vec<Checked>,
    }
    Ok(output(&Out {
        valid: true,
        documents: checked,
    }))
}
