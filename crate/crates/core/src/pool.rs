//! Class-indexed feature pools.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A finite, non-empty feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("feature vector has no coordinates".into()));
        }
        if let Some(coordinate) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sample: 0, coordinate });
        }
        Ok(FeatureVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FeatureVector::new(values)
    }
}

/// All samples of one class, stored contiguously (row-major, `dim` columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPool {
    class_id: usize,
    dim: usize,
    data: Vec<f64>,
}

impl ClassPool {
    pub fn class_id(&self) -> usize {
        self.class_id
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Feature row of sample `index`.
    ///
    /// Panics when `index` is out of bounds.
    pub fn sample(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }
}

/// An evaluation dataset: a set of classes and their examples.
///
/// Class ids are dense and assigned in order of first appearance; the
/// original labels are kept alongside. Pools are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPool {
    dim: usize,
    classes: Vec<ClassPool>,
    labels: Vec<String>,
}

impl LabeledPool {
    /// Builds a pool from `(label, features)` records.
    ///
    /// Sample order inside a class follows record order.
    pub fn from_records<L, I>(records: I) -> Result<Self>
    where
        L: AsRef<str>,
        I: IntoIterator<Item = (L, FeatureVector)>,
    {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut data: Vec<Vec<f64>> = Vec::new();
        let mut dim = None;

        for (label, features) in records {
            let expected = *dim.get_or_insert(features.dim());
            if features.dim() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: features.dim(),
                });
            }
            let label = label.as_ref();
            let id = match ids.get(label) {
                Some(&id) => id,
                None => {
                    let id = labels.len();
                    ids.insert(label.to_owned(), id);
                    labels.push(label.to_owned());
                    data.push(Vec::new());
                    id
                }
            };
            data[id].extend_from_slice(features.values());
        }

        let dim = dim.ok_or_else(|| Error::EmptyInput("no records".into()))?;
        Self::from_class_data(labels, dim, data)
    }

    /// Builds a pool directly from per-class row-major buffers.
    pub fn from_class_data(labels: Vec<String>, dim: usize, data: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("feature dimension must be at least 1".into()));
        }
        if data.is_empty() {
            return Err(Error::EmptyInput("pool has no classes".into()));
        }
        if labels.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: data.len(),
            });
        }
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.as_str(), i).is_some() {
                return Err(Error::Config(format!("duplicate class label `{l}`")));
            }
        }
        let mut offset = 0;
        let mut classes = Vec::with_capacity(data.len());
        for (class_id, buf) in data.into_iter().enumerate() {
            if buf.len() % dim != 0 {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: buf.len() % dim,
                });
            }
            if let Some(pos) = buf.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    sample: offset + pos / dim,
                    coordinate: pos % dim,
                });
            }
            offset += buf.len() / dim;
            classes.push(ClassPool {
                class_id,
                dim,
                data: buf,
            });
        }
        Ok(LabeledPool { dim, classes, labels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[ClassPool] {
        &self.classes
    }

    pub fn class(&self, class_id: usize) -> &ClassPool {
        &self.classes[class_id]
    }

    pub fn label(&self, class_id: usize) -> &str {
        &self.labels[class_id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(ClassPool::len).collect()
    }

    pub fn total_samples(&self) -> usize {
        self.classes.iter().map(ClassPool::len).sum()
    }

    /// Content hash (hex SHA-256) over labels, dimension and feature bits.
    pub fn pool_id(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for (label, class) in self.labels.iter().zip(&self.classes) {
            h.update((label.len() as u64).to_le_bytes());
            h.update(label.as_bytes());
            h.update((class.len() as u64).to_le_bytes());
            for v in &class.data {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}
