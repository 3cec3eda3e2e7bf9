//! Criteria weights from a reciprocal pairwise-comparison matrix.

use serde::{Deserialize, Serialize, Serializer};

use super::MooError;
use crate::Real;

pub const MAX_ITERATIONS: usize = 10_000;
pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 10;
/// Consistency ratios at or below this are conventionally acceptable.
pub const ACCEPTABLE_CR: f64 = 0.1;

/// Saaty random consistency index, indexed by matrix order.
const RANDOM_INDEX: [f64; 11] = [0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

pub fn random_index(n: usize) -> Option<f64> {
    RANDOM_INDEX.get(n).copied()
}

/// A matrix entry as written in a file: a number or a `"p/q"` fraction.
#[derive(Deserialize)]
#[serde(untagged)]
enum Entry<T> {
    Value(T),
    Text(String),
}

fn parse_fraction(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => Some(p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

/// Square reciprocal matrix; entry `(i, j)` is how much more important
/// criterion `i` is than criterion `j`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(try_from = "Vec<Vec<Entry<T>>>")]
pub struct PairwiseMatrix<T> {
    entries: Vec<Vec<T>>,
}

impl<T: Real> TryFrom<Vec<Vec<Entry<T>>>> for PairwiseMatrix<T> {
    type Error = MooError;

    fn try_from(raw: Vec<Vec<Entry<T>>>) -> Result<Self, MooError> {
        let mut rows = Vec::with_capacity(raw.len());
        for (i, row) in raw.into_iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (j, e) in row.into_iter().enumerate() {
                out.push(match e {
                    Entry::Value(v) => v,
                    Entry::Text(s) => T::from_f64_lossy(
                        parse_fraction(&s).ok_or(MooError::BadEntry { row: i, col: j, text: s })?,
                    ),
                });
            }
            rows.push(out);
        }
        PairwiseMatrix::new(rows)
    }
}

impl<T: Real> Serialize for PairwiseMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl<T: Real> PairwiseMatrix<T> {
    pub fn new(entries: Vec<Vec<T>>) -> Result<Self, MooError> {
        let n = entries.len();
        if !(MIN_ORDER..=MAX_ORDER).contains(&n) {
            return Err(MooError::MatrixOrder(n));
        }
        if let Some(i) = entries.iter().position(|r| r.len() != n) {
            return Err(MooError::NotSquare { row: i, len: entries[i].len(), n });
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v <= T::zero() {
                    return Err(MooError::NonPositiveEntry { row: i, col: j });
                }
            }
        }
        let tol = T::tolerance();
        for i in 0..n {
            if (entries[i][i] - T::one()).abs() > tol {
                return Err(MooError::Diagonal { index: i });
            }
            for j in i + 1..n {
                if (entries[j][i] - T::one() / entries[i][j]).abs() > tol {
                    return Err(MooError::Reciprocity { row: i, col: j });
                }
            }
        }
        Ok(PairwiseMatrix { entries })
    }

    /// The perfectly consistent matrix `a_ij = w_i / w_j`.
    pub fn from_weights(weights: &[T]) -> Result<Self, MooError> {
        Self::new(
            weights
                .iter()
                .map(|&wi| weights.iter().map(|&wj| wi / wj).collect())
                .collect(),
        )
    }

    /// All-ones matrix: every criterion equally important.
    pub fn uniform(n: usize) -> Result<Self, MooError> {
        Self::new(vec![vec![T::one(); n]; n])
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<T>] {
        &self.entries
    }

    fn apply(&self, w: &[T]) -> Vec<T> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(w).map(|(&a, &x)| a * x).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AhpResult<T> {
    pub weights: Vec<T>,
    pub lambda_max: T,
    pub consistency_index: T,
    pub consistency_ratio: T,
    pub acceptable: bool,
    pub iterations: usize,
}

/// Principal eigenvector by power iteration, normalised to sum 1, with
/// Saaty's consistency ratio. The ratio is 0 for 2x2 matrices, which are
/// always consistent.
pub fn ahp_weights<T: Real>(m: &PairwiseMatrix<T>) -> Result<AhpResult<T>, MooError> {
    let n = m.order();
    let nn = T::from_count(n);
    let mut w = vec![T::one() / nn; n];
    let mut converged = None;
    for it in 1..=MAX_ITERATIONS {
        let mut next = m.apply(&w);
        let total: T = next.iter().copied().sum();
        for v in &mut next {
            *v = *v / total;
        }
        let delta = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        w = next;
        if delta < T::convergence_tolerance() {
            converged = Some(it);
            break;
        }
    }
    let iterations = converged.ok_or(MooError::NoConvergence(MAX_ITERATIONS))?;

    let aw = m.apply(&w);
    let lambda_max = aw.iter().zip(&w).map(|(a, x)| *a / *x).sum::<T>() / nn;
    let (consistency_index, consistency_ratio) = if n <= 2 {
        (T::zero(), T::zero())
    } else {
        let ci = ((lambda_max - nn) / (nn - T::one())).max(T::zero());
        let ri = T::from_f64_lossy(random_index(n).expect("order checked on construction"));
        (ci, ci / ri)
    };
    Ok(AhpResult {
        weights: w,
        lambda_max,
        consistency_index,
        consistency_ratio,
        acceptable: consistency_ratio <= T::from_f64_lossy(ACCEPTABLE_CR),
        iterations,
    })
}
