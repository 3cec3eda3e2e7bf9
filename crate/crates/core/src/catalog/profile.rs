use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Catalog, Category, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeAvailable {
    Short,
    Long,
}

/// Project dimensions that decide which strategy categories are worth
/// considering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectProfile {
    pub risk_magnitude: Level,
    pub resources: Level,
    /// Stands in for system value and organisational embedding.
    pub complexity: Level,
    pub time_available: TimeAvailable,
    pub adversarial: bool,
    pub opportunity_seeking: bool,
}

impl ProjectProfile {
    /// The smallest project: everything low, short on time, no adversary.
    pub fn minimal() -> Self {
        ProjectProfile {
            risk_magnitude: Level::Low,
            resources: Level::Low,
            complexity: Level::Low,
            time_available: TimeAvailable::Short,
            adversarial: false,
            opportunity_seeking: false,
        }
    }

    /// Every combination of the six dimensions.
    pub fn all() -> impl Iterator<Item = ProjectProfile> {
        let times = [TimeAvailable::Short, TimeAvailable::Long];
        let bools = [false, true];
        Level::ALL.into_iter().flat_map(move |risk_magnitude| {
            Level::ALL.into_iter().flat_map(move |resources| {
                Level::ALL.into_iter().flat_map(move |complexity| {
                    times.into_iter().flat_map(move |time_available| {
                        bools.into_iter().flat_map(move |adversarial| {
                            bools.into_iter().map(move |opportunity_seeking| ProjectProfile {
                                risk_magnitude,
                                resources,
                                complexity,
                                time_available,
                                adversarial,
                                opportunity_seeking,
                            })
                        })
                    })
                })
            })
        })
    }
}

/// Categories admitted for a profile.
///
/// Structural is always in. Reactive needs complexity of at least medium or a
/// high-magnitude risk; formal needs at least medium resources; multi-stage
/// needs a long horizon; adversarial and positive follow their flags.
pub fn admitted_categories(profile: &ProjectProfile) -> BTreeSet<Category> {
    let mut admitted = BTreeSet::from([Category::Structural]);
    if profile.complexity >= Level::Medium || profile.risk_magnitude == Level::High {
        admitted.insert(Category::Reactive);
    }
    if profile.resources >= Level::Medium {
        admitted.insert(Category::Formal);
    }
    if profile.time_available == TimeAvailable::Long {
        admitted.insert(Category::MultiStage);
    }
    if profile.adversarial {
        admitted.insert(Category::Adversarial);
    }
    if profile.opportunity_seeking {
        admitted.insert(Category::Positive);
    }
    admitted
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Shortlist {
    pub admitted: BTreeSet<Category>,
    pub strategies: Vec<Strategy>,
}

impl Shortlist {
    pub fn contains(&self, id: &str) -> bool {
        self.strategies.iter().any(|s| s.id == id)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.strategies.iter().map(|s| s.id.as_str()).collect()
    }
}

/// Strategies belonging to at least one admitted category, in catalog order.
pub fn filter_by_profile(catalog: &Catalog, profile: &ProjectProfile) -> Shortlist {
    let admitted = admitted_categories(profile);
    let strategies = catalog
        .strategies()
        .iter()
        .filter(|s| s.categories.iter().any(|c| admitted.contains(c)))
        .cloned()
        .collect();
    Shortlist { admitted, strategies }
}
