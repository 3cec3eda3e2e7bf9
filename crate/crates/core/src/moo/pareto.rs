use std::cmp::Ordering;

use super::MooError;
use crate::Real;

/// `a` dominates `b`: no worse anywhere, strictly better somewhere. All
/// objectives are maximised.
pub fn dominates<T: Real>(a: &[T], b: &[T]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strictly = true;
        }
    }
    strictly
}

pub(crate) fn check_points<T: Real>(points: &[Vec<T>]) -> Result<(), MooError> {
    let Some(first) = points.first() else {
        return Ok(());
    };
    let dim = first.len();
    if dim == 0 {
        return Err(MooError::EmptyVector);
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(MooError::DimensionMismatch {
                expected: dim,
                found: p.len(),
                index: i,
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(MooError::NonFinite { index: i });
        }
    }
    Ok(())
}

/// Indices of the nondominated points, ascending. Of several identical points
/// only the first survives.
///
/// Points are visited in descending lexicographic order. A dominator always
/// sorts before the point it dominates, so each point only has to be checked
/// against the front built so far.
pub fn pareto_filter<T: Real>(points: &[Vec<T>]) -> Result<Vec<usize>, MooError> {
    check_points(points)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .iter()
            .zip(&points[a])
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });

    let mut front: Vec<usize> = Vec::new();
    for i in order {
        let p = &points[i];
        if !front.iter().any(|&f| points[f] == *p || dominates(&points[f], p)) {
            front.push(i);
        }
    }
    front.sort_unstable();
    Ok(front)
}

/// Maintains a nondominated set while points arrive one at a time. The result
/// matches [`pareto_filter`] over the whole stream.
#[derive(Debug, Clone)]
pub(crate) struct StreamingFront<T, P> {
    pub members: Vec<(Vec<T>, P)>,
    pub rejected: usize,
}

impl<T: Real, P> StreamingFront<T, P> {
    pub fn new() -> Self {
        StreamingFront {
            members: Vec::new(),
            rejected: 0,
        }
    }

    pub fn offer(&mut self, point: Vec<T>, payload: P) {
        if self
            .members
            .iter()
            .any(|(m, _)| *m == point || dominates(m, &point))
        {
            self.rejected += 1;
            return;
        }
        let before = self.members.len();
        self.members.retain(|(m, _)| !dominates(&point, m));
        self.rejected += before - self.members.len();
        self.members.push((point, payload));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[f64]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn staircase() {
        let p = pts(&[&[1., 5.], &[2., 4.], &[3., 3.], &[2., 2.], &[4., 1.]]);
        assert_eq!(pareto_filter(&p).unwrap(), vec![0, 1, 2, 4]);
    }

    #[test]
    fn singleton_and_duplicates() {
        assert_eq!(pareto_filter(&pts(&[&[7., 7.]])).unwrap(), vec![0]);
        assert_eq!(pareto_filter(&pts(&[&[1., 1.], &[1., 1.]])).unwrap(), vec![0]);
        assert_eq!(pareto_filter(&pts(&[&[0., 0.], &[1., 1.], &[1., 1.]])).unwrap(), vec![1]);
        assert!(pareto_filter::<f64>(&[]).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            pareto_filter(&pts(&[&[1., 2.], &[1.]])),
            Err(MooError::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            pareto_filter(&pts(&[&[1., f64::NAN]])),
            Err(MooError::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn streaming_agrees() {
        let p = pts(&[&[2., 2.], &[1., 5.], &[2., 4.], &[3., 3.], &[2., 2.], &[4., 1.], &[3., 3.]]);
        let mut s = StreamingFront::new();
        for (i, v) in p.iter().enumerate() {
            s.offer(v.clone(), i);
        }
        let mut got: Vec<usize> = s.members.iter().map(|m| m.1).collect();
        got.sort_unstable();
        assert_eq!(got, pareto_filter(&p).unwrap());
        assert_eq!(s.rejected, p.len() - got.len());
    }
}
