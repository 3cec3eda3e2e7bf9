use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Catalog;
use crate::ErrorKind;

pub const DEFAULT_SUGGESTIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescription {
    pub components: Vec<Component>,
    #[serde(default)]
    pub hazards: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suggestion {
    pub strategy_id: String,
    pub name: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSuggestions {
    pub component: String,
    pub suggestions: Vec<Suggestion>,
    /// Set when no strategy scored above zero.
    pub no_match: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuggestError {
    #[error("system description has no components")]
    NoComponents,
    #[error("duplicate component name \"{0}\"")]
    DuplicateComponent(String),
    #[error("k = {k} is outside 1..={max}")]
    BadCount { k: usize, max: usize },
}

impl SuggestError {
    pub fn kind(&self) -> ErrorKind {
        ErrorKind::Validation
    }

    pub fn code(&self) -> &'static str {
        match self {
            SuggestError::NoComponents => "no_components",
            SuggestError::DuplicateComponent(_) => "duplicate_component",
            SuggestError::BadCount { .. } => "bad_count",
        }
    }
}

fn relevance(component_tags: &BTreeSet<String>, description: &str, strategy_tags: &BTreeSet<String>) -> f64 {
    let shared = strategy_tags.iter().filter(|t| component_tags.contains(*t)).count();
    let mentions: usize = strategy_tags.iter().map(|t| description.matches(t.as_str()).count()).sum();
    shared as f64 + 0.5 * mentions as f64
}

/// Ranks catalog strategies for every component by shared tags plus half a
/// point per tag mention in the component description. Zero scores are
/// dropped; equal scores keep catalog order.
pub fn suggest_for_components(
    catalog: &Catalog,
    system: &SystemDescription,
    k: usize,
) -> Result<Vec<ComponentSuggestions>, SuggestError> {
    if system.components.is_empty() {
        return Err(SuggestError::NoComponents);
    }
    if k == 0 || k > catalog.len() {
        return Err(SuggestError::BadCount { k, max: catalog.len() });
    }
    let mut names = HashSet::new();
    if let Some(dup) = system.components.iter().find(|c| !names.insert(c.name.as_str())) {
        return Err(SuggestError::DuplicateComponent(dup.name.clone()));
    }

    Ok(system
        .components
        .iter()
        .map(|component| {
            let tags: BTreeSet<String> = component.tags.iter().map(|t| t.to_lowercase()).collect();
            let description = component.description.to_lowercase();
            let mut scored: Vec<Suggestion> = catalog
                .strategies()
                .iter()
                .map(|s| Suggestion {
                    strategy_id: s.id.clone(),
                    name: s.name.clone(),
                    score: relevance(&tags, &description, &s.tags),
                })
                .filter(|s| s.score > 0.0)
                .collect();
            // stable: ties stay in catalog order
            scored.sort_by(|a, b| b.score.total_cmp(&a.score));
            scored.truncate(k);
            ComponentSuggestions {
                component: component.name.clone(),
                no_match: scored.is_empty(),
                suggestions: scored,
            }
        })
        .collect())
}
