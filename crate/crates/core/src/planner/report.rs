use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::PlanReport;
use crate::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    /// Pretty-printed JSON; the canonical machine output.
    #[default]
    Structured,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "structured" | "json" => Ok(ReportFormat::Structured),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown format \"{other}\" (structured|markdown)")),
        }
    }
}

fn cell<T: Real>(v: T) -> String {
    v.to_string()
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

fn markdown<T: Real>(r: &PlanReport<T>) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "# Risk mitigation plan\n");
    for line in &r.summary {
        let _ = writeln!(w, "- {line}");
    }

    let _ = writeln!(w, "\n## Profile\n");
    let _ = writeln!(w, "| Dimension | Value |");
    let _ = writeln!(w, "|---|---|");
    let profile = serde_json::to_value(r.profile).expect("profile serializes");
    if let Some(map) = profile.as_object() {
        for key in [
            "risk_magnitude",
            "resources",
            "complexity",
            "time_available",
            "adversarial",
            "opportunity_seeking",
        ] {
            let v = &map[key];
            let shown = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
            let _ = writeln!(w, "| {key} | {shown} |");
        }
    }

    let _ = writeln!(w, "\n## Shortlist\n");
    let _ = writeln!(w, "Catalog: {}", r.catalog);
    let admitted: Vec<String> = r.admitted.iter().map(|c| c.label().to_string()).collect();
    let _ = writeln!(w, "Admitted categories: {}\n", list(&admitted));
    if r.shortlist.is_empty() {
        let _ = writeln!(w, "No strategies shortlisted.");
    }
    for s in &r.shortlist {
        let cats: Vec<&str> = s.categories.iter().map(|c| c.label()).chain(s.subcategories.iter().map(|c| c.label())).collect();
        let _ = writeln!(w, "- `{}` {} ({})", s.id, s.name, cats.join(", "));
    }

    if let Some(weights) = &r.weights {
        let _ = writeln!(w, "\n## Weights\n");
        let origin = serde_json::to_value(weights.origin).expect("origin serializes");
        let _ = writeln!(w, "Source: {}\n", origin.as_str().unwrap_or_default());
        let names: Vec<String> = match &r.moo {
            Some(m) => m.metrics.clone(),
            None => (1..=weights.weights.len()).map(|i| format!("criterion {i}")).collect(),
        };
        let _ = writeln!(w, "| Metric | Weight |");
        let _ = writeln!(w, "|---|---|");
        for (name, v) in names.iter().zip(&weights.weights) {
            let _ = writeln!(w, "| {name} | {} |", cell(*v));
        }
        if let Some(a) = &weights.ahp {
            let _ = writeln!(
                w,
                "\nlambda_max {}, consistency index {}, consistency ratio {} ({})",
                cell(a.lambda_max),
                cell(a.consistency_index),
                cell(a.consistency_ratio),
                if a.acceptable { "acceptable" } else { "not acceptable" }
            );
        }
    }

    if let Some(c) = &r.cover {
        let _ = writeln!(w, "\n## Cover\n");
        let mode = if c.optimal { "exact (optimal)" } else { "greedy" };
        let _ = writeln!(w, "Mode: {mode}\n");
        let _ = writeln!(w, "| Selected controls | Total cost |");
        let _ = writeln!(w, "|---|---|");
        let _ = writeln!(w, "| {} | {} |", list(&c.selected), cell(c.total_cost));
        let _ = writeln!(w, "\nCovered: {}", list(&c.covered));
        let _ = writeln!(w, "Uncovered: {}", list(&c.uncovered));
        if let Some(h) = c.approximation_bound {
            let _ = writeln!(w, "Greedy guarantee: within {} of optimal", cell(h));
        }
    }

    if let Some(m) = &r.moo {
        let _ = writeln!(w, "\n## Frontier & Knee\n");
        let _ = writeln!(
            w,
            "{} nondominated of {} feasible ({} evaluated, {} dominated or duplicate)\n",
            m.frontier.len(),
            m.feasible,
            m.evaluated,
            m.dominated_count
        );
        let _ = writeln!(w, "| # | Portfolio | Cost | {} | Knee |", m.metrics.join(" | "));
        let _ = writeln!(w, "|---|---|---|{}---|", "---|".repeat(m.metrics.len()));
        for (i, p) in m.frontier.iter().enumerate() {
            let values: Vec<String> = p.objectives.iter().map(|v| cell(*v)).collect();
            let _ = writeln!(
                w,
                "| {i} | {{{}}} | {} | {} | {} |",
                p.selected.join(", "),
                cell(p.cost),
                values.join(" | "),
                if i == m.knee_index { "yes" } else { "" }
            );
        }
        let knee = m.knee();
        let _ = writeln!(w, "\nKnee: #{} {{{}}}", m.knee_index, knee.selected.join(", "));
        if let Some(ranking) = &m.ranking {
            let order: Vec<String> = ranking
                .iter()
                .map(|p| format!("#{} ({})", p.frontier_index, cell(p.score)))
                .collect();
            let _ = writeln!(w, "Weighted ranking: {}", order.join(", "));
        }
    }

    let _ = writeln!(w, "\n## Warnings\n");
    if r.warnings.is_empty() {
        let _ = writeln!(w, "None.");
    }
    for warn in &r.warnings {
        let _ = writeln!(w, "- [{}] {}", warn.code, warn.message);
    }

    let _ = writeln!(w, "\n## Override History\n");
    let _ = writeln!(
        w,
        "In force: force_in {{{}}}, force_out {{{}}}\n",
        r.overrides.force_in.iter().cloned().collect::<Vec<_>>().join(", "),
        r.overrides.force_out.iter().cloned().collect::<Vec<_>>().join(", ")
    );
    if r.override_history.is_empty() {
        let _ = writeln!(w, "No overrides applied.");
    }
    for e in &r.override_history {
        let _ = writeln!(
            w,
            "{}. force_in {{{}}}, force_out {{{}}}",
            e.step,
            e.submitted.force_in.iter().cloned().collect::<Vec<_>>().join(", "),
            e.submitted.force_out.iter().cloned().collect::<Vec<_>>().join(", ")
        );
    }
    out
}

/// Renders a report. Identical reports always render to identical bytes.
pub fn render_report<T: Real>(report: &PlanReport<T>, format: ReportFormat) -> String {
    match format {
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => markdown(report),
    }
}
