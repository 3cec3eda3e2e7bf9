//! Strategy catalog: the six-category ontology, loading and validation,
//! profile-driven filtering and tag-based suggestions.

mod profile;
mod suggest;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ErrorKind;

pub use profile::{filter_by_profile, admitted_categories, Level, ProjectProfile, Shortlist, TimeAvailable};
pub use suggest::{
    suggest_for_components, Component, ComponentSuggestions, SuggestError, Suggestion, SystemDescription,
    DEFAULT_SUGGESTIONS,
};

const SEED_CATALOG: &str = include_str!("../../data/seed.catalog.json");

/// Maximum number of worked examples attached to a strategy.
pub const MAX_EXAMPLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Formal,
    Structural,
    Reactive,
    Adversarial,
    MultiStage,
    Positive,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Formal,
        Category::Structural,
        Category::Reactive,
        Category::Adversarial,
        Category::MultiStage,
        Category::Positive,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Formal => "formal",
            Category::Structural => "structural",
            Category::Reactive => "reactive",
            Category::Adversarial => "adversarial",
            Category::MultiStage => "multi_stage",
            Category::Positive => "positive",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcategory {
    Algorithmic,
    Analytical,
    Technical,
    Organizational,
    Detection,
    PostDetection,
}

impl Subcategory {
    /// The category a subcategory belongs to.
    pub fn category(self) -> Category {
        match self {
            Subcategory::Algorithmic | Subcategory::Analytical => Category::Formal,
            Subcategory::Technical | Subcategory::Organizational => Category::Structural,
            Subcategory::Detection | Subcategory::PostDetection => Category::Reactive,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Subcategory::Algorithmic => "algorithmic",
            Subcategory::Analytical => "analytical",
            Subcategory::Technical => "technical",
            Subcategory::Organizational => "organizational",
            Subcategory::Detection => "detection",
            Subcategory::PostDetection => "post_detection",
        }
    }
}

impl fmt::Display for Subcategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Strategy {
    pub id: String,
    pub name: String,
    pub definition: String,
    pub categories: BTreeSet<Category>,
    #[serde(default)]
    pub subcategories: BTreeSet<Subcategory>,
    #[serde(default)]
    pub examples: Vec<String>,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(default)]
    pub related_ids: BTreeSet<String>,
    #[serde(default)]
    pub tags: BTreeSet<String>,
}

impl Strategy {
    pub fn in_category(&self, category: Category) -> bool {
        self.categories.contains(&category)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogMetadata {
    pub source: String,
    pub version: String,
}

/// A validated strategy collection. Construct through [`load_catalog`] or
/// [`Catalog::new`]; both enforce the same invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Catalog {
    metadata: CatalogMetadata,
    strategies: Vec<Strategy>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDocument {
    metadata: CatalogMetadata,
    strategies: Vec<Strategy>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("catalog parse error: {0}")]
    Parse(String),
    #[error("duplicate strategy id \"{0}\"")]
    DuplicateId(String),
    #[error("strategy \"{strategy}\" has an empty id")]
    EmptyId { strategy: String },
    #[error("strategy \"{0}\" has an empty definition")]
    EmptyDefinition(String),
    #[error("strategy \"{0}\" has no category")]
    NoCategory(String),
    #[error("strategy \"{strategy}\" lists subcategory \"{subcategory}\" without its category \"{}\"", .subcategory.category())]
    InvalidSubcategory {
        strategy: String,
        subcategory: Subcategory,
    },
    #[error("strategy \"{strategy}\" has {count} examples (at most {MAX_EXAMPLES})")]
    TooManyExamples { strategy: String, count: usize },
    #[error("strategy \"{strategy}\" references unknown related id \"{related}\"")]
    DanglingRelated { strategy: String, related: String },
    #[error("strategy \"{strategy}\" has invalid tag \"{tag}\" (tags are lowercase without whitespace)")]
    InvalidTag { strategy: String, tag: String },
}

impl CatalogError {
    pub fn kind(&self) -> ErrorKind {
        ErrorKind::Validation
    }

    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::Parse(_) => "parse",
            CatalogError::DuplicateId(_) => "duplicate_id",
            CatalogError::EmptyId { .. } => "empty_id",
            CatalogError::EmptyDefinition(_) => "empty_definition",
            CatalogError::NoCategory(_) => "no_category",
            CatalogError::InvalidSubcategory { .. } => "invalid_subcategory",
            CatalogError::TooManyExamples { .. } => "too_many_examples",
            CatalogError::DanglingRelated { .. } => "dangling_related_id",
            CatalogError::InvalidTag { .. } => "invalid_tag",
        }
    }
}

fn valid_tag(tag: &str) -> bool {
    !tag.is_empty() && !tag.chars().any(|c| c.is_whitespace() || c.is_uppercase())
}

impl Catalog {
    pub fn new(metadata: CatalogMetadata, strategies: Vec<Strategy>) -> Result<Self, CatalogError> {
        let mut seen = HashSet::new();
        for s in &strategies {
            if s.id.trim().is_empty() {
                return Err(CatalogError::EmptyId { strategy: s.name.clone() });
            }
            if !seen.insert(s.id.as_str()) {
                return Err(CatalogError::DuplicateId(s.id.clone()));
            }
            if s.definition.trim().is_empty() {
                return Err(CatalogError::EmptyDefinition(s.id.clone()));
            }
            if s.categories.is_empty() {
                return Err(CatalogError::NoCategory(s.id.clone()));
            }
            if let Some(&sub) = s.subcategories.iter().find(|sub| !s.categories.contains(&sub.category())) {
                return Err(CatalogError::InvalidSubcategory {
                    strategy: s.id.clone(),
                    subcategory: sub,
                });
            }
            if s.examples.len() > MAX_EXAMPLES {
                return Err(CatalogError::TooManyExamples {
                    strategy: s.id.clone(),
                    count: s.examples.len(),
                });
            }
            if let Some(tag) = s.tags.iter().find(|t| !valid_tag(t)) {
                return Err(CatalogError::InvalidTag {
                    strategy: s.id.clone(),
                    tag: tag.clone(),
                });
            }
        }
        for s in &strategies {
            if let Some(r) = s.related_ids.iter().find(|r| !seen.contains(r.as_str())) {
                return Err(CatalogError::DanglingRelated {
                    strategy: s.id.clone(),
                    related: r.clone(),
                });
            }
        }
        Ok(Catalog { metadata, strategies })
    }

    /// The bundled seed catalog.
    pub fn seed() -> Self {
        load_catalog(SEED_CATALOG).expect("bundled seed catalog is valid")
    }

    pub fn metadata(&self) -> &CatalogMetadata {
        &self.metadata
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Strategy> {
        self.strategies.iter().find(|s| s.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some()
    }

    /// Categories with at least one member strategy.
    pub fn populated_categories(&self) -> BTreeSet<Category> {
        self.strategies.iter().flat_map(|s| s.categories.iter().copied()).collect()
    }

    pub fn in_category(&self, category: Category) -> impl Iterator<Item = &Strategy> {
        self.strategies.iter().filter(move |s| s.in_category(category))
    }

    pub fn in_subcategory(&self, sub: Subcategory) -> impl Iterator<Item = &Strategy> {
        self.strategies.iter().filter(move |s| s.subcategories.contains(&sub))
    }

    /// One-line description, e.g. `"28 strategies, 6 categories"`.
    pub fn summary(&self) -> String {
        format!(
            "{} strategies, {} categories",
            self.len(),
            self.populated_categories().len()
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }
}

impl<'de> Deserialize<'de> for Catalog {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = CatalogDocument::deserialize(d)?;
        Catalog::new(doc.metadata, doc.strategies).map_err(serde::de::Error::custom)
    }
}

/// Parses and validates a catalog document. Strategy order is preserved.
pub fn load_catalog(source: &str) -> Result<Catalog, CatalogError> {
    let doc: CatalogDocument =
        serde_json::from_str(source).map_err(|e| CatalogError::Parse(e.to_string()))?;
    Catalog::new(doc.metadata, doc.strategies)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strategy(id: &str) -> Strategy {
        Strategy {
            id: id.into(),
            name: id.into(),
            definition: "does something".into(),
            categories: [Category::Adversarial].into(),
            subcategories: BTreeSet::new(),
            examples: vec![],
            references: vec![],
            related_ids: BTreeSet::new(),
            tags: BTreeSet::new(),
        }
    }

    fn meta() -> CatalogMetadata {
        CatalogMetadata {
            source: "test".into(),
            version: "0".into(),
        }
    }

    #[test]
    fn empty_document_is_parse_error() {
        assert!(matches!(load_catalog(""), Err(CatalogError::Parse(_))));
    }

    #[test]
    fn duplicate_id_names_offender() {
        let err = Catalog::new(meta(), vec![strategy("misdirection"), strategy("misdirection")]).unwrap_err();
        assert_eq!(err, CatalogError::DuplicateId("misdirection".into()));
        assert!(err.to_string().contains("misdirection"));
    }

    #[test]
    fn dangling_related_id() {
        let mut s = strategy("a");
        s.related_ids.insert("ghost".into());
        let err = Catalog::new(meta(), vec![s]).unwrap_err();
        assert_eq!(
            err,
            CatalogError::DanglingRelated {
                strategy: "a".into(),
                related: "ghost".into()
            }
        );
    }

    #[test]
    fn subcategory_needs_owning_category() {
        let mut s = strategy("a");
        s.subcategories.insert(Subcategory::Detection);
        let err = Catalog::new(meta(), vec![s.clone()]).unwrap_err();
        assert!(matches!(err, CatalogError::InvalidSubcategory { subcategory: Subcategory::Detection, .. }));
        s.categories.insert(Category::Reactive);
        assert!(Catalog::new(meta(), vec![s]).is_ok());
    }

    #[test]
    fn empty_definition_and_missing_category() {
        let mut s = strategy("a");
        s.definition = "  ".into();
        assert_eq!(
            Catalog::new(meta(), vec![s]).unwrap_err(),
            CatalogError::EmptyDefinition("a".into())
        );
        let mut s = strategy("b");
        s.categories.clear();
        assert_eq!(Catalog::new(meta(), vec![s]).unwrap_err(), CatalogError::NoCategory("b".into()));
    }

    #[test]
    fn example_limit_and_tag_shape() {
        let mut s = strategy("a");
        s.examples = vec!["1".into(), "2".into(), "3".into(), "4".into()];
        assert!(matches!(
            Catalog::new(meta(), vec![s]),
            Err(CatalogError::TooManyExamples { count: 4, .. })
        ));
        let mut s = strategy("a");
        s.tags.insert("Bad Tag".into());
        assert!(matches!(Catalog::new(meta(), vec![s]), Err(CatalogError::InvalidTag { .. })));
    }

    #[test]
    fn labels_serialize_as_documented() {
        assert_eq!(serde_json::to_string(&Category::MultiStage).unwrap(), "\"multi_stage\"");
        assert_eq!(
            serde_json::to_string(&Subcategory::PostDetection).unwrap(),
            "\"post_detection\""
        );
        for c in Category::ALL {
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.label()));
        }
    }

    #[test]
    fn unknown_category_label_rejected() {
        let doc = r#"{"metadata":{"source":"x","version":"1"},"strategies":[
            {"id":"a","name":"A","definition":"d","categories":["heroic"]}]}"#;
        assert!(matches!(load_catalog(doc), Err(CatalogError::Parse(_))));
    }

    #[test]
    fn seed_round_trips() {
        let seed = Catalog::seed();
        assert_eq!(load_catalog(&seed.to_json()).unwrap(), seed);
    }
}
