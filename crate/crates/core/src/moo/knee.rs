use super::pareto::check_points;
use super::MooError;
use crate::Real;

/// Min-max scales each objective to `[0, 1]`; constant objectives map to 0.
pub fn normalize<T: Real>(points: &[Vec<T>]) -> Vec<Vec<T>> {
    let dim = points.first().map_or(0, Vec::len);
    let mut out = points.to_vec();
    for k in 0..dim {
        let lo = points.iter().map(|p| p[k]).fold(T::infinity(), T::min);
        let hi = points.iter().map(|p| p[k]).fold(T::neg_infinity(), T::max);
        for p in &mut out {
            p[k] = if hi > lo { (p[k] - lo) / (hi - lo) } else { T::zero() };
        }
    }
    out
}

/// First index attaining the maximum of `score`, where a later value must
/// beat the incumbent by more than the tolerance.
fn first_max<T: Real>(scores: impl Iterator<Item = T>) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (i, s) in scores.enumerate() {
        match best {
            Some((_, b)) if s <= b + T::tolerance() => {}
            _ => best = Some((i, s)),
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Unit normal of the hyperplane through `pts` (`d` points in `d`
/// dimensions), or `None` when they are affinely dependent.
fn hyperplane_normal<T: Real>(pts: &[&Vec<T>]) -> Option<Vec<T>> {
    let d = pts.len();
    let mut rows: Vec<Vec<T>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(pts[0]).map(|(a, b)| *a - *b).collect())
        .collect();

    // Reduced row echelon form with partial pivoting.
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..d {
        if r == rows.len() {
            break;
        }
        let p = (r..rows.len())
            .max_by(|&a, &b| rows[a][c].abs().partial_cmp(&rows[b][c].abs()).unwrap())
            .expect("non-empty range");
        if rows[p][c].abs() <= T::tolerance() {
            continue;
        }
        rows.swap(r, p);
        let lead = rows[r][c];
        for v in &mut rows[r] {
            *v = *v / lead;
        }
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][c];
                for k in 0..d {
                    let delta = f * rows[r][k];
                    rows[i][k] = rows[i][k] - delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() != d - 1 {
        return None;
    }
    let free = (0..d).find(|c| !pivots.contains(c))?;
    let mut normal = vec![T::zero(); d];
    normal[free] = T::one();
    for (row, &c) in pivots.iter().enumerate() {
        normal[c] = -rows[row][free];
    }
    let len = normal.iter().map(|v| *v * *v).sum::<T>().sqrt();
    Some(normal.into_iter().map(|v| v / len).collect())
}

/// Index of the knee of a nondominated set.
///
/// After min-max normalisation, the knee is the point farthest from the
/// hyperplane through the per-objective best points. When those points do
/// not pin down a unique hyperplane, the point with the largest worst
/// normalised objective wins instead. Ties go to the lower index.
pub fn knee_select<T: Real>(frontier: &[Vec<T>]) -> Result<usize, MooError> {
    if frontier.is_empty() {
        return Err(MooError::EmptyFrontier);
    }
    check_points(frontier)?;
    if frontier.len() == 1 {
        return Ok(0);
    }
    let norm = normalize(frontier);
    let d = norm[0].len();
    let extremes: Vec<usize> = (0..d).map(|k| first_max(norm.iter().map(|p| p[k]))).collect();
    let anchors: Vec<&Vec<T>> = extremes.iter().map(|&i| &norm[i]).collect();

    Ok(match hyperplane_normal(&anchors) {
        Some(n) => {
            let offset: T = n.iter().zip(anchors[0]).map(|(a, b)| *a * *b).sum();
            first_max(
                norm.iter()
                    .map(|p| (n.iter().zip(p).map(|(a, b)| *a * *b).sum::<T>() - offset).abs()),
            )
        }
        None => first_max(norm.iter().map(|p| p.iter().copied().fold(T::infinity(), T::min))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn bulge_in_the_middle() {
        assert_eq!(knee_select(&pts(&[&[0., 1.], &[0.5, 0.9], &[1., 0.]])).unwrap(), 1);
        assert_eq!(knee_select(&pts(&[&[0., 10.], &[5., 9.], &[10., 0.]])).unwrap(), 1);
    }

    #[test]
    fn singleton_and_empty() {
        assert_eq!(knee_select(&pts(&[&[4., 4.]])).unwrap(), 0);
        assert!(matches!(knee_select::<f64>(&[]), Err(MooError::EmptyFrontier)));
    }

    #[test]
    fn collinear_front_ties_to_first() {
        assert_eq!(knee_select(&pts(&[&[0., 2.], &[1., 1.], &[2., 0.]])).unwrap(), 0);
    }

    #[test]
    fn degenerate_extremes_use_max_min() {
        // second objective constant: both extremes are index 0 after ties
        let f = pts(&[&[3., 1.], &[1., 1.], &[2., 1.]]);
        assert_eq!(knee_select(&f).unwrap(), 0);
    }

    #[test]
    fn three_objectives() {
        // simplex corners, one point on the simplex, one bulging toward the ideal
        let f = pts(&[&[1., 0., 0.], &[0., 1., 0.], &[0., 0., 1.], &[0.9, 0.05, 0.05], &[0.6, 0.6, 0.6]]);
        assert_eq!(knee_select(&f).unwrap(), 4);
    }

    #[test]
    fn normal_of_line() {
        let a: Vec<f64> = vec![1.0, 0.0];
        let b = vec![0.0, 1.0];
        let n = hyperplane_normal(&[&a, &b]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((n[0].abs() - s).abs() < 1e-12 && (n[1].abs() - s).abs() < 1e-12);
        assert!(hyperplane_normal(&[&a, &a]).is_none());
    }
}
