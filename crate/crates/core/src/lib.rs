//! Risk-mitigation portfolio planning.
//!
//! * [`catalog`]: the six-category strategy ontology, profile filtering and
//!   tag-based suggestions.
//! * [`racm`]: risk and control matrices solved as weighted minimum set cover.
//! * [`moo`]: exhaustive multi-objective portfolio search with Pareto
//!   filtering, weighted-sum ranking, AHP weights and knee selection.
//! * [`planner`]: the end-to-end workflow and its report.
//!
//! The numeric modules are generic over [`Real`] (`f64` and `f32`). The
//! aliases at the crate root fix the scalar to `f64`.

#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod moo;
pub mod planner;
pub mod racm;
mod scalar;

use serde::Serialize;

pub use scalar::{harmonic, Real};

pub use catalog::{
    filter_by_profile, load_catalog, suggest_for_components, Catalog, CatalogError, Category, ProjectProfile,
    Strategy, Subcategory, SystemDescription,
};
pub use moo::{ahp_weights, knee_select, pareto_filter, scalarize, solve_moo, MooError};
pub use planner::{plan, render_report, replan, PlanError, ReportFormat, Stage};
pub use racm::{apply_overrides, solve_cover, CoverMode, Overrides, RacmError};

/// Coarse error classes, shared by the CLI exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Malformed or inconsistent input.
    Validation,
    /// Well-formed input with no admissible solution.
    Infeasible,
    Internal,
}

pub type Racm = racm::Racm<f64>;
pub type Control = racm::Control<f64>;
pub type CoverResult = racm::CoverResult<f64>;
pub type ObjectiveSpec = moo::ObjectiveSpec<f64>;
pub type MooDocument = moo::MooDocument<f64>;
pub type MooSolution = moo::MooSolution<f64>;
pub type PairwiseMatrix = moo::PairwiseMatrix<f64>;
pub type AhpResult = moo::AhpResult<f64>;
pub type PlanRequest = planner::PlanRequest<f64>;
pub type PlanReport = planner::PlanReport<f64>;
pub type WeightsSource = planner::WeightsSource<f64>;
