use std::cmp::Ordering;
use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::{Racm, RacmError};
use crate::scalar::harmonic;
use crate::Real;

/// Control count up to which `auto` runs the exact solver.
pub const AUTO_EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    Greedy,
    Exact,
    #[default]
    Auto,
}

impl std::str::FromStr for CoverMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "greedy" => Ok(CoverMode::Greedy),
            "exact" => Ok(CoverMode::Exact),
            "auto" => Ok(CoverMode::Auto),
            other => Err(format!("unknown cover mode \"{other}\" (greedy|exact|auto)")),
        }
    }
}

/// The algorithm that actually produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolvedMode {
    Greedy,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CoverResult<T> {
    /// Selected control ids in column order.
    pub selected: Vec<String>,
    pub total_cost: T,
    /// Covered risk ids in row order.
    pub covered: Vec<String>,
    pub uncovered: Vec<String>,
    pub mode: SolvedMode,
    pub optimal: bool,
    /// `H(d)` for the largest admissible coverage set; greedy only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approximation_bound: Option<T>,
}

/// Index form of a validated matrix.
struct Instance<T> {
    n_risks: usize,
    sets: Vec<FixedBitSet>,
    costs: Vec<T>,
    admissible: Vec<bool>,
    forced_in: Vec<usize>,
    budget: Option<T>,
}

impl<T: Real> Instance<T> {
    fn new(racm: &Racm<T>) -> Self {
        let row: HashMap<&str, usize> = racm.risks.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
        let col: HashMap<&str, usize> = racm.controls.iter().enumerate().map(|(j, c)| (c.id.as_str(), j)).collect();
        let mut sets = vec![FixedBitSet::with_capacity(racm.risks.len()); racm.controls.len()];
        for (r, c) in &racm.coverage {
            sets[col[c.as_str()]].insert(row[r.as_str()]);
        }
        Instance {
            n_risks: racm.risks.len(),
            sets,
            costs: racm.controls.iter().map(|c| c.cost).collect(),
            admissible: racm.controls.iter().map(|c| !c.forced_out).collect(),
            forced_in: (0..racm.controls.len()).filter(|&j| racm.controls[j].forced_in).collect(),
            budget: racm.budget,
        }
    }

    fn all_risks(&self) -> FixedBitSet {
        let mut all = FixedBitSet::with_capacity(self.n_risks);
        all.insert_range(..);
        all
    }

    fn union_of(&self, chosen: &[usize]) -> FixedBitSet {
        let mut covered = FixedBitSet::with_capacity(self.n_risks);
        for &j in chosen {
            covered.union_with(&self.sets[j]);
        }
        covered
    }

    /// Summed in ascending index order so equal selections always produce
    /// bit-identical totals.
    fn cost_of(&self, chosen: &[usize]) -> T {
        let mut sorted = chosen.to_vec();
        sorted.sort_unstable();
        sorted.iter().map(|&j| self.costs[j]).fold(T::zero(), |a, b| a + b)
    }

    fn uncoverable(&self) -> Vec<usize> {
        let mut reachable = FixedBitSet::with_capacity(self.n_risks);
        for (j, set) in self.sets.iter().enumerate() {
            if self.admissible[j] {
                reachable.union_with(set);
            }
        }
        reachable.toggle_range(..);
        reachable.ones().collect()
    }

    fn max_set_size(&self) -> usize {
        (0..self.sets.len())
            .filter(|&j| self.admissible[j])
            .map(|j| self.sets[j].count_ones(..))
            .max()
            .unwrap_or(0)
    }
}

fn gain(set: &FixedBitSet, covered: &FixedBitSet) -> usize {
    set.difference(covered).count()
}

/// Cost-per-new-risk greedy from a starting selection. Controls are skipped
/// when `blocked` or, given a cap, when they would push the total over it.
/// Returns the selection and whatever stayed uncovered.
fn greedy_from<T: Real>(
    inst: &Instance<T>,
    start: &[usize],
    blocked: &[bool],
    cap: Option<T>,
) -> (Vec<usize>, FixedBitSet) {
    let mut chosen = start.to_vec();
    let mut covered = inst.union_of(&chosen);
    let mut cost = inst.cost_of(&chosen);
    let full = inst.n_risks;
    while covered.count_ones(..) < full {
        let mut best: Option<(usize, usize)> = None;
        for j in 0..inst.sets.len() {
            if blocked[j] || !inst.admissible[j] || chosen.contains(&j) {
                continue;
            }
            let new = gain(&inst.sets[j], &covered);
            if new == 0 {
                continue;
            }
            if cap.is_some_and(|b| !T::le_tol(cost + inst.costs[j], b)) {
                continue;
            }
            // c_j / new_j < c_b / new_b, cross-multiplied
            let better = match best {
                None => true,
                Some((b, bn)) => inst.costs[j] * T::from_count(bn) < inst.costs[b] * T::from_count(new),
            };
            if better {
                best = Some((j, new));
            }
        }
        match best {
            Some((j, _)) => {
                chosen.push(j);
                covered.union_with(&inst.sets[j]);
                cost = cost + inst.costs[j];
            }
            None => break,
        }
    }
    covered.toggle_range(..);
    (chosen, covered)
}

/// Canonical ordering of equally feasible covers: cost, then size, then the
/// sorted id tuple.
fn compare_covers<T: Real>(
    a: (T, &[usize]),
    b: (T, &[usize]),
    ids: &[String],
) -> Ordering {
    if !T::approx_eq(a.0, b.0) {
        return a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal);
    }
    a.1.len().cmp(&b.1.len()).then_with(|| {
        let sorted = |s: &[usize]| {
            let mut v: Vec<&str> = s.iter().map(|&j| ids[j].as_str()).collect();
            v.sort_unstable();
            v
        };
        sorted(a.1).cmp(&sorted(b.1))
    })
}

struct BranchAndBound<'a, T> {
    inst: &'a Instance<T>,
    ids: &'a [String],
    best: Option<(T, Vec<usize>)>,
    /// Subtrees whose bound exceeds this are discarded.
    ceiling: Option<T>,
}

impl<T: Real> BranchAndBound<'_, T> {
    /// Admissible bound on the cost still needed to cover `uncovered` with
    /// `available` controls: the larger of the per-risk cheapest price and the
    /// greedy completion divided by its harmonic guarantee.
    fn completion_bound(&self, uncovered: &FixedBitSet, available: &[bool], chosen: &[usize]) -> T {
        let inst = self.inst;
        let mut price = T::zero();
        for r in uncovered.ones() {
            let mut cheapest: Option<T> = None;
            for j in 0..inst.sets.len() {
                if available[j] && inst.sets[j].contains(r) {
                    let p = inst.costs[j] / T::from_count(inst.sets[j].intersection(uncovered).count());
                    cheapest = Some(cheapest.map_or(p, |c: T| c.min(p)));
                }
            }
            match cheapest {
                Some(p) => price = price + p,
                None => return T::infinity(),
            }
        }

        let blocked: Vec<bool> = available.iter().map(|a| !a).collect();
        let (done, left) = greedy_from(inst, chosen, &blocked, None);
        if left.count_ones(..) > 0 {
            return T::infinity();
        }
        let d = (0..inst.sets.len())
            .filter(|&j| available[j])
            .map(|j| inst.sets[j].intersection(uncovered).count())
            .max()
            .unwrap_or(0);
        let greedy_extra: T = done[chosen.len()..].iter().map(|&j| inst.costs[j]).sum();
        price.max(greedy_extra / harmonic::<T>(d).max(T::one()))
    }

    fn prune_above(&self) -> Option<T> {
        match (&self.best, self.ceiling) {
            (Some((c, _)), Some(cap)) => Some(c.min(cap)),
            (Some((c, _)), None) => Some(*c),
            (None, cap) => cap,
        }
    }

    fn offer(&mut self, chosen: &[usize]) {
        let cost = self.inst.cost_of(chosen);
        if self.ceiling.is_some_and(|cap| !T::le_tol(cost, cap)) {
            return;
        }
        let better = match &self.best {
            None => true,
            Some((bc, bsel)) => compare_covers((cost, chosen), (*bc, bsel), self.ids) == Ordering::Less,
        };
        if better {
            let mut sel = chosen.to_vec();
            sel.sort_unstable();
            self.best = Some((cost, sel));
        }
    }

    fn search(&mut self, chosen: &mut Vec<usize>, covered: &FixedBitSet, cost: T, available: &mut Vec<bool>) {
        let inst = self.inst;
        let mut uncovered = covered.clone();
        uncovered.toggle_range(..);
        if uncovered.count_ones(..) == 0 {
            self.offer(chosen);
            return;
        }
        if let Some(limit) = self.prune_above() {
            let bound = cost + self.completion_bound(&uncovered, available, chosen);
            let slack = T::tolerance() * T::one().max(limit.abs());
            if bound > limit + slack {
                return;
            }
        }

        // Branch on the uncovered risk with the fewest candidate controls.
        let candidates_for = |r: usize| -> Vec<usize> {
            (0..inst.sets.len())
                .filter(|&j| available[j] && inst.sets[j].contains(r))
                .collect()
        };
        let Some(options) = uncovered.ones().map(candidates_for).min_by_key(|c| c.len()) else {
            return;
        };
        if options.is_empty() {
            return;
        }

        let saved = available.clone();
        for &j in &options {
            available[j] = false;
            chosen.push(j);
            let mut next = covered.clone();
            next.union_with(&inst.sets[j]);
            self.search(chosen, &next, cost + inst.costs[j], available);
            chosen.pop();
            // later siblings exclude j: every cover is reached exactly once
        }
        *available = saved;
    }
}

fn exact<T: Real>(inst: &Instance<T>, ids: &[String]) -> Option<(T, Vec<usize>)> {
    let start = inst.forced_in.clone();
    let covered = inst.union_of(&start);
    let mut available: Vec<bool> = (0..inst.sets.len())
        .map(|j| inst.admissible[j] && !start.contains(&j))
        .collect();

    let mut bb = BranchAndBound {
        inst,
        ids,
        best: None,
        ceiling: inst.budget,
    };
    let blocked = vec![false; inst.sets.len()];
    let (seed, left) = greedy_from(inst, &start, &blocked, None);
    if left.count_ones(..) == 0 {
        bb.offer(&seed);
    }
    let mut chosen = start;
    let cost = inst.cost_of(&chosen);
    bb.search(&mut chosen, &covered, cost, &mut available);
    bb.best
}

fn result_from<T: Real>(
    racm: &Racm<T>,
    inst: &Instance<T>,
    selection: &[usize],
    mode: SolvedMode,
) -> CoverResult<T> {
    let covered = inst.union_of(selection);
    let mut sel = selection.to_vec();
    sel.sort_unstable();
    CoverResult {
        selected: sel.iter().map(|&j| racm.controls[j].id.clone()).collect(),
        total_cost: inst.cost_of(&sel),
        covered: covered.ones().map(|r| racm.risks[r].id.clone()).collect(),
        uncovered: (0..inst.n_risks)
            .filter(|&r| !covered.contains(r))
            .map(|r| racm.risks[r].id.clone())
            .collect(),
        mode,
        optimal: mode == SolvedMode::Exact,
        approximation_bound: match mode {
            SolvedMode::Greedy => Some(harmonic(inst.max_set_size())),
            SolvedMode::Exact => None,
        },
    }
}

/// Picks a set of controls covering every risk.
///
/// Controls flagged `forced_in` are always selected and `forced_out` never.
/// Exact mode is a branch and bound seeded with the greedy cover and returns
/// the cheapest cover, ties broken by fewer controls and then the
/// lexicographically smallest sorted id list. Greedy mode repeatedly takes the
/// control with the lowest cost per newly covered risk (earlier column wins
/// ties) and never exceeds the budget. Auto uses exact up to
/// [`AUTO_EXACT_LIMIT`] controls.
pub fn solve_cover<T: Real>(racm: &Racm<T>, mode: CoverMode) -> Result<CoverResult<T>, RacmError> {
    racm.validate()?;
    let inst = Instance::new(racm);

    let unreachable = inst.uncoverable();
    if !unreachable.is_empty() {
        return Err(RacmError::UncoverableRisk(
            unreachable.into_iter().map(|r| racm.risks[r].id.clone()).collect(),
        ));
    }

    let mode = match mode {
        CoverMode::Auto if racm.controls.len() <= AUTO_EXACT_LIMIT => CoverMode::Exact,
        CoverMode::Auto => CoverMode::Greedy,
        m => m,
    };

    match mode {
        CoverMode::Greedy => {
            let blocked = vec![false; inst.sets.len()];
            let forced_cost = inst.cost_of(&inst.forced_in);
            let over = inst.budget.is_some_and(|b| !T::le_tol(forced_cost, b));
            let (chosen, left) = greedy_from(&inst, &inst.forced_in, &blocked, inst.budget);
            if over || left.count_ones(..) > 0 {
                let mut missing = left;
                if over {
                    missing = inst.all_risks();
                    missing.difference_with(&inst.union_of(&inst.forced_in));
                }
                return Err(RacmError::GreedyStuck(
                    missing.ones().map(|r| racm.risks[r].id.clone()).collect(),
                ));
            }
            Ok(result_from(racm, &inst, &chosen, SolvedMode::Greedy))
        }
        _ => match exact(&inst, &racm.controls.iter().map(|c| c.id.clone()).collect::<Vec<_>>()) {
            Some((_, sel)) => Ok(result_from(racm, &inst, &sel, SolvedMode::Exact)),
            None => {
                // Only a budget can make a coverable instance infeasible.
                let unconstrained = Instance { budget: None, ..Instance::new(racm) };
                let ids: Vec<String> = racm.controls.iter().map(|c| c.id.clone()).collect();
                let min_cost = exact(&unconstrained, &ids).map(|(c, _)| c).unwrap_or_else(T::infinity);
                Err(RacmError::BudgetInfeasible {
                    min_cost: min_cost.to_f64().unwrap_or(f64::NAN),
                    budget: inst.budget.and_then(|b| b.to_f64()).unwrap_or(f64::NAN),
                })
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{apply_overrides, Overrides};
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn four_risk_exact() {
        let r = solve_cover(&four_risks(), CoverMode::Exact).unwrap();
        assert_eq!(r.selected, ids(&["c2", "c4"]));
        assert_eq!(r.total_cost, 4.0);
        assert!(r.optimal);
        assert!(r.uncovered.is_empty());
        assert_eq!(r.covered, ids(&["r1", "r2", "r3", "r4"]));
        assert_eq!(r.approximation_bound, None);
    }

    #[test]
    fn greedy_trap_instance() {
        let g = solve_cover(&greedy_trap(), CoverMode::Greedy).unwrap();
        assert_eq!(g.selected, ids(&["cB", "cC"]));
        assert!((g.total_cost - 2.3).abs() < 1e-12);
        assert!(!g.optimal);
        assert_eq!(g.approximation_bound, Some(1.0 + 0.5 + 1.0 / 3.0 + 0.25));
        let e = solve_cover(&greedy_trap(), CoverMode::Exact).unwrap();
        assert_eq!(e.selected, ids(&["cA", "cB"]));
        assert_eq!(e.total_cost, 2.0);
    }

    #[test]
    fn force_out_tie_prefers_fewer_controls() {
        let ov = Overrides {
            force_in: Default::default(),
            force_out: ["c2".to_string()].into(),
        };
        let racm = apply_overrides(&four_risks(), &ov).unwrap();
        let r = solve_cover(&racm, CoverMode::Exact).unwrap();
        assert_eq!(r.selected, ids(&["c5"]));
        assert_eq!(r.total_cost, 5.0);
    }

    #[test]
    fn force_in_is_kept() {
        let ov = Overrides {
            force_in: ["c5".to_string()].into(),
            force_out: Default::default(),
        };
        let racm = apply_overrides(&four_risks(), &ov).unwrap();
        let r = solve_cover(&racm, CoverMode::Exact).unwrap();
        assert_eq!(r.selected, ids(&["c5"]));
        assert_eq!(r.total_cost, 5.0);
        let g = solve_cover(&racm, CoverMode::Greedy).unwrap();
        assert_eq!(g.selected, ids(&["c5"]));
    }

    #[test]
    fn vacuous_cover() {
        let mut r = racm(&[], &[("a", &[], 1.5), ("b", &[], 2.0)]);
        r.controls[0].forced_in = true;
        for mode in [CoverMode::Exact, CoverMode::Greedy] {
            let out = solve_cover(&r, mode).unwrap();
            assert_eq!(out.selected, ids(&["a"]));
            assert_eq!(out.total_cost, 1.5);
            assert!(out.uncovered.is_empty());
        }
    }

    #[test]
    fn uncoverable_lists_risks() {
        let mut r = four_risks();
        r.risks.push(super::super::Risk {
            id: "r9".into(),
            description: String::new(),
        });
        let err = solve_cover(&r, CoverMode::Auto).unwrap_err();
        assert_eq!(err, RacmError::UncoverableRisk(ids(&["r9"])));
        assert!(err.to_string().contains("r9"));

        let mut r = four_risks();
        for c in &mut r.controls {
            c.forced_out = c.id != "c2";
        }
        let err = solve_cover(&r, CoverMode::Exact).unwrap_err();
        assert_eq!(err, RacmError::UncoverableRisk(ids(&["r1", "r4"])));
    }

    #[test]
    fn budget_handling() {
        let mut r = four_risks();
        r.budget = Some(4.0);
        assert_eq!(solve_cover(&r, CoverMode::Exact).unwrap().total_cost, 4.0);
        r.budget = Some(3.5);
        assert_eq!(
            solve_cover(&r, CoverMode::Exact).unwrap_err(),
            RacmError::BudgetInfeasible {
                min_cost: 4.0,
                budget: 3.5
            }
        );
        assert!(matches!(solve_cover(&r, CoverMode::Greedy), Err(RacmError::GreedyStuck(_))));

        // greedy alone would overspend: cC then cB is 2.3
        let mut t = greedy_trap();
        t.budget = Some(2.1);
        assert!(matches!(solve_cover(&t, CoverMode::Greedy), Err(RacmError::GreedyStuck(_))));
        assert_eq!(solve_cover(&t, CoverMode::Exact).unwrap().total_cost, 2.0);
    }

    #[test]
    fn auto_switches_on_size() {
        assert_eq!(solve_cover(&four_risks(), CoverMode::Auto).unwrap().mode, SolvedMode::Exact);
        let names: Vec<String> = (0..21).map(|i| format!("k{i:02}")).collect();
        let controls: Vec<(&str, &[&str], f64)> = names.iter().map(|n| (n.as_str(), &["r"][..], 1.0)).collect();
        let big = racm(&["r"], &controls);
        let out = solve_cover(&big, CoverMode::Auto).unwrap();
        assert_eq!(out.mode, SolvedMode::Greedy);
        assert_eq!(out.selected, ids(&["k00"]));
    }

    #[test]
    fn lexicographic_tie_break() {
        let r = racm(
            &["r1", "r2"],
            &[("z", &["r1", "r2"], 2.0), ("b", &["r1", "r2"], 2.0), ("a", &["r1"], 1.0), ("y", &["r2"], 1.0)],
        );
        assert_eq!(solve_cover(&r, CoverMode::Exact).unwrap().selected, ids(&["b"]));
    }

    #[test]
    fn generic_over_f32() {
        let r: Racm<f32> = Racm::from_json(
            r#"{"risks":[{"id":"r1"},{"id":"r2"}],"controls":[{"id":"a","cost":1.25},{"id":"b","cost":0.5}],
                "coverage":[["r1","a"],["r2","a"],["r2","b"]]}"#,
        )
        .unwrap();
        let out = solve_cover(&r, CoverMode::Exact).unwrap();
        assert_eq!(out.selected, ids(&["a"]));
        assert_eq!(out.total_cost, 1.25f32);
    }
}
