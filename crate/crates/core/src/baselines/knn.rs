use super::{check_dim, BaselineError};
use crate::dataset::Example;
use crate::signal_io::Label;

pub const DEFAULT_K: usize = 5;

/// k-nearest neighbours under Euclidean distance.
///
/// Neighbours at equal distance are ordered by training index. A tied vote
/// goes to the label of the single nearest neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub examples: Vec<Example>,
    pub k: usize,
}

impl KnnModel {
    /// `k` is clamped to the number of stored examples.
    pub fn fit(rows: &[Example], k: usize) -> Result<KnnModel, BaselineError> {
        if rows.is_empty() {
            return Err(BaselineError::EmptyModel);
        }
        check_dim(rows)?;
        Ok(KnnModel {
            examples: rows.to_vec(),
            k: k.clamp(1, rows.len()),
        })
    }

    /// Indices of the `k` nearest stored examples, nearest first.
    pub fn neighbours(&self, x: &[f64]) -> Result<Vec<usize>, BaselineError> {
        let first = self.examples.first().ok_or(BaselineError::EmptyModel)?;
        if x.len() != first.x.len() {
            return Err(BaselineError::DimensionMismatch {
                expected: first.x.len(),
                got: x.len(),
            });
        }
        let mut dist: Vec<(f64, usize)> = self
            .examples
            .iter()
            .enumerate()
            .map(|(i, e)| (e.x.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(dist.into_iter().take(self.k).map(|(_, i)| i).collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label, BaselineError> {
        let nn = self.neighbours(x)?;
        let strokes = nn.iter().filter(|&&i| self.examples[i].label == Label::Stroke).count();
        let normals = nn.len() - strokes;
        Ok(match strokes.cmp(&normals) {
            std::cmp::Ordering::Greater => Label::Stroke,
            std::cmp::Ordering::Less => Label::Normal,
            std::cmp::Ordering::Equal => self.examples[nn[0]].label,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_copies_win() {
        let mut rows: Vec<Example> = (0..5).map(|_| Example::new(vec![1.0, 1.0], Label::Stroke)).collect();
        rows.extend((0..5).map(|i| Example::new(vec![3.0 + i as f64, 0.0], Label::Normal)));
        let m = KnnModel::fit(&rows, 5).unwrap();
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap(), Label::Stroke);
    }

    #[test]
    fn majority_beats_distance() {
        let rows = vec![
            Example::new(vec![1.0], Label::Normal),
            Example::new(vec![-1.0], Label::Normal),
            Example::new(vec![1.0], Label::Normal),
            Example::new(vec![2.0], Label::Stroke),
            Example::new(vec![-2.0], Label::Stroke),
            Example::new(vec![50.0], Label::Stroke),
        ];
        assert_eq!(KnnModel::fit(&rows, 5).unwrap().predict(&[0.0]).unwrap(), Label::Normal);
    }

    #[test]
    fn even_k_tie_goes_to_nearest() {
        let rows = vec![
            Example::new(vec![0.5], Label::Stroke),
            Example::new(vec![1.0], Label::Normal),
            Example::new(vec![1.5], Label::Normal),
            Example::new(vec![2.0], Label::Stroke),
        ];
        assert_eq!(KnnModel::fit(&rows, 4).unwrap().predict(&[0.0]).unwrap(), Label::Stroke);
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let rows = vec![
            Example::new(vec![1.0], Label::Stroke),
            Example::new(vec![-1.0], Label::Normal),
        ];
        let m = KnnModel::fit(&rows, 1).unwrap();
        assert_eq!(m.neighbours(&[0.0]).unwrap(), vec![0]);
        assert_eq!(m.predict(&[0.0]).unwrap(), Label::Stroke);
    }

    #[test]
    fn k_clamped_and_empty_rejected() {
        let rows = vec![Example::new(vec![0.0], Label::Normal)];
        assert_eq!(KnnModel::fit(&rows, 5).unwrap().k, 1);
        assert!(matches!(KnnModel::fit(&[], 5), Err(BaselineError::EmptyModel)));
    }
}
