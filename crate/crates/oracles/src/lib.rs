//! Slow, obviously-correct reference computations.
//!
//! Everything here works on plain vectors and shares no code with the `rdot`
//! solvers, so tests can compare the two routes without either one vouching
//! for the other.

#![allow(clippy::needless_range_loop)]

/// Relative tie tolerance shared by the cost comparisons below.
pub const TIE_TOL: f64 = 1e-9;

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

pub mod cover {
    use super::approx_eq;

    /// A set cover instance in index form.
    #[derive(Debug, Clone)]
    pub struct Instance {
        pub n_risks: usize,
        pub control_ids: Vec<String>,
        /// Risk indices covered by each control.
        pub sets: Vec<Vec<usize>>,
        pub costs: Vec<f64>,
        pub forced_in: Vec<bool>,
        pub forced_out: Vec<bool>,
        pub budget: Option<f64>,
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct Optimum {
        /// Selected control indices, ascending.
        pub selected: Vec<usize>,
        pub cost: f64,
    }

    /// Enumerates every subset of controls and returns the canonical optimum:
    /// minimum cost, then fewest controls, then the lexicographically smallest
    /// sorted id tuple. `None` when no admissible subset covers everything
    /// within budget.
    pub fn brute_force(inst: &Instance) -> Option<Optimum> {
        let m = inst.sets.len();
        assert!(m <= 24, "brute force is exponential");
        let mut best: Option<(f64, usize, Vec<String>, Vec<usize>)> = None;
        for mask in 0u64..(1u64 << m) {
            let chosen: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
            if (0..m).any(|j| inst.forced_in[j] && mask >> j & 1 == 0) {
                continue;
            }
            if chosen.iter().any(|&j| inst.forced_out[j]) {
                continue;
            }
            let mut covered = vec![false; inst.n_risks];
            for &j in &chosen {
                for &r in &inst.sets[j] {
                    covered[r] = true;
                }
            }
            if covered.iter().any(|c| !c) {
                continue;
            }
            let mut cost = 0.0;
            for &j in &chosen {
                cost += inst.costs[j];
            }
            if let Some(b) = inst.budget {
                if cost > b {
                    continue;
                }
            }
            let mut ids: Vec<String> = chosen.iter().map(|&j| inst.control_ids[j].clone()).collect();
            ids.sort();
            let better = match &best {
                None => true,
                Some((bc, bn, bids, _)) => {
                    if !approx_eq(cost, *bc) {
                        cost < *bc
                    } else if chosen.len() != *bn {
                        chosen.len() < *bn
                    } else {
                        ids < *bids
                    }
                }
            };
            if better {
                best = Some((cost, chosen.len(), ids, chosen));
            }
        }
        best.map(|(cost, _, _, selected)| Optimum { selected, cost })
    }

    /// `H(d) = 1 + 1/2 + ... + 1/d`.
    pub fn harmonic(d: usize) -> f64 {
        (1..=d).map(|i| 1.0 / i as f64).sum()
    }
}

pub mod pareto {
    /// `a` dominates `b` (maximisation).
    pub fn dominates(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
    }

    /// Quadratic nondominated filter: a point survives unless some input point
    /// dominates it or an earlier input point equals it. Returns indices in
    /// input order.
    pub fn filter(points: &[Vec<f64>]) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| {
                let dominated = points.iter().any(|q| dominates(q, &points[i]));
                let duplicate = points[..i].iter().any(|q| q == &points[i]);
                !dominated && !duplicate
            })
            .collect()
    }
}

pub mod eigen {
    fn det(mut a: Vec<Vec<f64>>) -> f64 {
        let n = a.len();
        let mut d = 1.0;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())
                .unwrap();
            if a[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap(p, c);
                d = -d;
            }
            d *= a[c][c];
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        d
    }

    fn shifted(a: &[Vec<f64>], lambda: f64) -> Vec<Vec<f64>> {
        let mut m = a.to_vec();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= lambda;
        }
        m
    }

    /// Largest real eigenvalue of a positive matrix, found as the largest root
    /// of `det(A - λI)` by a downward scan followed by bisection, and its
    /// eigenvector from the null space of `A - λI`, normalised to sum 1.
    pub fn perron(a: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let n = a.len();
        let upper = a.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max) + 1.0;
        let f = |l: f64| det(shifted(a, l));
        let step = 1e-3;
        let mut hi = upper;
        let sign_hi = f(hi).signum();
        let mut lo = hi - step;
        while f(lo).signum() == sign_hi {
            hi = lo;
            lo -= step;
            assert!(lo > 0.0, "no positive eigenvalue found");
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == sign_hi {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lambda = 0.5 * (lo + hi);

        // Fix the last component to 1 and solve the first n-1 equations.
        let m = shifted(a, lambda);
        let k = n - 1;
        let mut sys: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let mut row: Vec<f64> = m[i][..k].to_vec();
                row.push(-m[i][k]);
                row
            })
            .collect();
        for c in 0..k {
            let p = (c..k)
                .max_by(|&i, &j| sys[i][c].abs().partial_cmp(&sys[j][c].abs()).unwrap())
                .unwrap();
            sys.swap(p, c);
            for r in 0..k {
                if r != c {
                    let f = sys[r][c] / sys[c][c];
                    for q in c..=k {
                        sys[r][q] -= f * sys[c][q];
                    }
                }
            }
        }
        let mut v: Vec<f64> = (0..k).map(|i| sys[i][k] / sys[i][i]).collect();
        v.push(1.0);
        let s: f64 = v.iter().sum();
        (lambda, v.into_iter().map(|x| x / s).collect())
    }
}

pub mod knee {
    fn normalize(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let norm = |vals: Vec<f64>| -> Vec<f64> {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            vals.iter()
                .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
                .collect()
        };
        let xs = norm(points.iter().map(|p| p.0).collect());
        let ys = norm(points.iter().map(|p| p.1).collect());
        xs.into_iter().zip(ys).collect()
    }

    /// Two-objective knee by direct computation: normalise, draw the line
    /// through the two per-objective extremes, take the farthest point.
    /// Degenerate lines fall back to the best worst-coordinate point.
    pub fn knee_2d(points: &[(f64, f64)]) -> usize {
        let p = normalize(points);
        let first_max = |f: &dyn Fn(&(f64, f64)) -> f64| {
            let mut best = 0;
            for i in 1..p.len() {
                if f(&p[i]) > f(&p[best]) {
                    best = i;
                }
            }
            best
        };
        let ex = first_max(&|q| q.0);
        let ey = first_max(&|q| q.1);
        let (a, b) = (p[ex], p[ey]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let score: Vec<f64> = if ex != ey && len > 1e-12 {
            p.iter()
                .map(|q| ((b.0 - a.0) * (a.1 - q.1) - (a.0 - q.0) * (b.1 - a.1)).abs() / len)
                .collect()
        } else {
            p.iter().map(|q| q.0.min(q.1)).collect()
        };
        let mut best = 0;
        for i in 1..score.len() {
            if score[i] > score[best] + 1e-9 {
                best = i;
            }
        }
        best
    }
}

pub mod portfolio {
    /// Every feasible binary selection in mask order with its objective
    /// vector. `contrib[c][m]` is candidate `c`'s delta on metric `m`.
    pub fn enumerate(
        baselines: &[f64],
        costs: &[f64],
        contrib: &[Vec<f64>],
        budget: Option<f64>,
    ) -> Vec<(u64, Vec<f64>)> {
        let n = costs.len();
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << n) {
            let cost: f64 = (0..n).filter(|c| mask >> c & 1 == 1).map(|c| costs[c]).sum();
            if budget.is_some_and(|b| cost > b + 1e-9) {
                continue;
            }
            let v = baselines
                .iter()
                .enumerate()
                .map(|(m, b)| {
                    b + (0..n)
                        .filter(|c| mask >> c & 1 == 1)
                        .map(|c| contrib[c][m])
                        .sum::<f64>()
                })
                .collect();
            out.push((mask, v));
        }
        out
    }
}

/// Seeded random instances shared by the property tests and the acceptance
/// suite.
pub mod gen {
    use rand::seq::SliceRandom;
    use rand::Rng;

    use super::cover::Instance;

    /// Set cover with up to `max_controls` controls and `max_risks` risks.
    /// Every risk is covered by at least one control. Half the instances use
    /// integer costs so that ties are common; the rest draw costs from
    /// (0, 10]. Control ids are shuffled so id order differs from column
    /// order.
    pub fn cover_instance<R: Rng>(rng: &mut R, max_controls: usize, max_risks: usize) -> Instance {
        let m = rng.random_range(1..=max_controls);
        let n = rng.random_range(1..=max_risks);
        let density = rng.random_range(0.15..0.6);
        let mut sets: Vec<Vec<usize>> = (0..m)
            .map(|_| (0..n).filter(|_| rng.random_bool(density)).collect())
            .collect();
        for r in 0..n {
            if !sets.iter().any(|s| s.contains(&r)) {
                let j = rng.random_range(0..m);
                sets[j].push(r);
                sets[j].sort_unstable();
            }
        }
        let integer = rng.random_bool(0.5);
        let costs = (0..m)
            .map(|_| {
                if integer {
                    rng.random_range(1..=5) as f64
                } else {
                    10.0 - rng.random_range(0.0..10.0)
                }
            })
            .collect();
        let mut labels: Vec<usize> = (0..m).collect();
        labels.shuffle(rng);
        Instance {
            n_risks: n,
            control_ids: labels.iter().map(|l| format!("c{l:02}")).collect(),
            sets,
            costs,
            forced_in: vec![false; m],
            forced_out: vec![false; m],
            budget: None,
        }
    }

    /// Adds random forced flags (never both on one control) and, sometimes,
    /// a budget.
    pub fn with_constraints<R: Rng>(rng: &mut R, mut inst: Instance) -> Instance {
        for j in 0..inst.sets.len() {
            match rng.random_range(0..10) {
                0 => inst.forced_in[j] = true,
                1 => inst.forced_out[j] = true,
                _ => {}
            }
        }
        if rng.random_bool(0.4) {
            let total: f64 = inst.costs.iter().sum();
            inst.budget = Some(total * rng.random_range(0.2..1.0));
        }
        inst
    }

    /// `n` points in `d` dimensions. Coordinates come from a small integer
    /// grid half the time, which produces duplicates and weak dominance.
    pub fn points<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<Vec<f64>> {
        let grid = rng.random_bool(0.5);
        (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if grid {
                            rng.random_range(0..6) as f64
                        } else {
                            rng.random_range(-100.0..100.0)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// A mutually nondominated two-objective front of `n` points with
    /// strictly increasing first and strictly decreasing second coordinate,
    /// returned in shuffled order.
    pub fn front_2d<R: Rng>(rng: &mut R, n: usize) -> Vec<(f64, f64)> {
        let mut x = 0.0;
        let mut y = 0.0;
        let mut pts: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                x += rng.random_range(0.01..1.0);
                y -= rng.random_range(0.01..1.0);
                (x, y)
            })
            .collect();
        pts.shuffle(rng);
        pts
    }

    /// Positive weights summing to 1.
    pub fn weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / s).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perron_of_consistent_matrix() {
        let w = [0.5, 0.3, 0.2];
        let a: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| w[i] / w[j]).collect()).collect();
        let (l, v) = eigen::perron(&a);
        assert!((l - 3.0).abs() < 1e-9);
        for i in 0..3 {
            assert!((v[i] - w[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn knee_worked_example() {
        assert_eq!(knee::knee_2d(&[(0.0, 1.0), (0.5, 0.9), (1.0, 0.0)]), 1);
    }

    #[test]
    fn pareto_duplicates() {
        assert_eq!(pareto::filter(&[vec![1.0, 1.0], vec![1.0, 1.0]]), vec![0]);
    }
}
