use crate::error::{Error, Result};

/// Nearest-class-centroid classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct NccModel {
    centroids: Vec<Vec<f64>>,
    l2_normalize: bool,
}

impl NccModel {
    /// Fits one centroid per class as the coordinate-wise mean of its support
    /// vectors. With `l2_normalize`, vectors are scaled to unit norm first.
    pub fn fit(support: &[Vec<&[f64]>], l2_normalize: bool) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyInput("no support classes".into()));
        }
        let dim = support
            .iter()
            .find_map(|c| c.first().map(|x| x.len()))
            .ok_or_else(|| Error::EmptyInput("support set has no vectors".into()))?;
        let mut centroids = Vec::with_capacity(support.len());
        for (class, shots) in support.iter().enumerate() {
            if shots.is_empty() {
                return Err(Error::EmptyInput(format!("class {class} has no support vectors")));
            }
            let mut centroid = vec![0.0; dim];
            for x in shots {
                if x.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: x.len(),
                    });
                }
                let scale = if l2_normalize { inv_norm(x) } else { 1.0 };
                for (c, v) in centroid.iter_mut().zip(x.iter()) {
                    *c += v * scale;
                }
            }
            let n = shots.len() as f64;
            centroid.iter_mut().for_each(|c| *c /= n);
            centroids.push(centroid);
        }
        Ok(NccModel {
            centroids,
            l2_normalize,
        })
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    /// Index of the nearest centroid in squared Euclidean distance; ties go
    /// to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let dim = self.centroids[0].len();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        let scale = if self.l2_normalize { inv_norm(x) } else { 1.0 };
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.centroids.iter().enumerate() {
            let d: f64 = c.iter().zip(x).map(|(c, v)| (v * scale - c).powi(2)).sum();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(best)
    }
}

fn inv_norm(x: &[f64]) -> f64 {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        1.0 / n
    } else {
        1.0
    }
}
