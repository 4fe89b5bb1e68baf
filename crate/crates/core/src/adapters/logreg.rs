use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyper-parameters of the multinomial logistic-regression adapter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    pub l2_penalty: f64,
    pub step_size: f64,
    pub max_iters: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2_penalty: 1e-3,
            step_size: 0.5,
            max_iters: 200,
        }
    }
}

impl LogRegConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(Error::Config("l2 penalty must be finite and >= 0".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::Config("step size must be finite and > 0".into()));
        }
        Ok(())
    }
}

/// Weights of a K-class linear softmax model, row-major `K × (dim + 1)` with
/// the bias in the last column.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    classes: usize,
    dim: usize,
    weights: Vec<f64>,
}

const MAX_HALVINGS: usize = 60;

impl LogRegModel {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        LogRegModel {
            classes,
            dim,
            weights: vec![0.0; classes * (dim + 1)],
        }
    }

    pub fn from_weights(classes: usize, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != classes * (dim + 1) {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: classes * (dim + 1),
            });
        }
        Ok(LogRegModel { classes, dim, weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Full-batch gradient descent on mean cross-entropy plus
    /// `l2_penalty · ‖W‖²` (bias excluded), starting from zero weights.
    ///
    /// A step that increases the loss is retried with half the step size; the
    /// reduced step is kept for later iterations.
    pub fn fit(support: &[Vec<&[f64]>], config: &LogRegConfig) -> Result<Self> {
        Ok(Self::fit_traced(support, config)?.0)
    }

    /// Like [`fit`](Self::fit) but also returns the loss after every accepted
    /// step (index 0 is the loss at zero weights).
    pub fn fit_traced(support: &[Vec<&[f64]>], config: &LogRegConfig) -> Result<(Self, Vec<f64>)> {
        config.validate()?;
        let data = TrainingSet::new(support)?;
        let mut model = LogRegModel::zeros(support.len(), data.dim);
        let (mut loss, mut grad) = data.loss_and_gradient(&model.weights, config.l2_penalty);
        let mut trace = vec![loss];
        let mut step = config.step_size;
        let mut candidate = vec![0.0; model.weights.len()];

        'outer: for iteration in 0..config.max_iters {
            let mut halvings = 0;
            loop {
                for ((c, w), g) in candidate.iter_mut().zip(&model.weights).zip(&grad) {
                    *c = w - step * g;
                }
                let (next_loss, next_grad) = data.loss_and_gradient(&candidate, config.l2_penalty);
                if !next_loss.is_finite() {
                    return Err(Error::Divergence { iteration });
                }
                if next_loss <= loss {
                    std::mem::swap(&mut model.weights, &mut candidate);
                    loss = next_loss;
                    grad = next_grad;
                    trace.push(loss);
                    break;
                }
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    break 'outer;
                }
                step *= 0.5;
            }
        }
        Ok((model, trace))
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self
            .weights
            .chunks_exact(self.dim + 1)
            .map(|row| row[self.dim] + row[..self.dim].iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect())
    }

    /// Argmax of the logits; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let logits = self.logits(x)?;
        let mut best = 0;
        for (i, &l) in logits.iter().enumerate().skip(1) {
            if l > logits[best] {
                best = i;
            }
        }
        Ok(best)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }
}

/// Objective value and gradient at `weights` for the given support set.
///
/// Exposed for gradient checks.
pub fn loss_and_gradient(support: &[Vec<&[f64]>], weights: &[f64], l2_penalty: f64) -> Result<(f64, Vec<f64>)> {
    let data = TrainingSet::new(support)?;
    if weights.len() != support.len() * (data.dim + 1) {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: support.len() * (data.dim + 1),
        });
    }
    Ok(data.loss_and_gradient(weights, l2_penalty))
}

struct TrainingSet<'a> {
    dim: usize,
    classes: usize,
    rows: Vec<(&'a [f64], usize)>,
}

impl<'a> TrainingSet<'a> {
    fn new(support: &[Vec<&'a [f64]>]) -> Result<Self> {
        if support.len() < 2 {
            return Err(Error::Config("logistic regression needs at least two classes".into()));
        }
        let dim = support
            .iter()
            .find_map(|c| c.first().map(|x| x.len()))
            .ok_or_else(|| Error::EmptyInput("support set has no vectors".into()))?;
        let mut rows = Vec::new();
        for (label, shots) in support.iter().enumerate() {
            if shots.is_empty() {
                return Err(Error::EmptyInput(format!("class {label} has no support vectors")));
            }
            for x in shots {
                if x.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: x.len(),
                    });
                }
                rows.push((*x, label));
            }
        }
        Ok(TrainingSet {
            dim,
            classes: support.len(),
            rows,
        })
    }

    fn loss_and_gradient(&self, weights: &[f64], l2: f64) -> (f64, Vec<f64>) {
        let stride = self.dim + 1;
        let mut grad = vec![0.0; weights.len()];
        let mut loss = 0.0;
        let mut logits = vec![0.0; self.classes];
        for &(x, label) in &self.rows {
            for (k, l) in logits.iter_mut().enumerate() {
                let row = &weights[k * stride..(k + 1) * stride];
                *l = row[self.dim] + row[..self.dim].iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            }
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = logits.iter().map(|l| (l - max).exp()).sum();
            let log_z = max + z.ln();
            loss += log_z - logits[label];
            for (k, l) in logits.iter().enumerate() {
                let p = (l - log_z).exp();
                let r = p - if k == label { 1.0 } else { 0.0 };
                let g = &mut grad[k * stride..(k + 1) * stride];
                for (gj, v) in g[..self.dim].iter_mut().zip(x) {
                    *gj += r * v;
                }
                g[self.dim] += r;
            }
        }
        let n = self.rows.len() as f64;
        loss /= n;
        grad.iter_mut().for_each(|g| *g /= n);
        for k in 0..self.classes {
            for j in 0..self.dim {
                let w = weights[k * stride + j];
                loss += l2 * w * w;
                grad[k * stride + j] += 2.0 * l2 * w;
            }
        }
        (loss, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Vec<[f64; 1]>, Vec<[f64; 1]>) {
        (
            vec![[-2.0], [-1.5], [-1.0], [-0.5], [-0.3]],
            vec![[0.4], [0.6], [1.0], [1.7], [2.5]],
        )
    }

    fn support<'a>(a: &'a [[f64; 1]], b: &'a [[f64; 1]]) -> Vec<Vec<&'a [f64]>> {
        vec![a.iter().map(|x| &x[..]).collect(), b.iter().map(|x| &x[..]).collect()]
    }

    #[test]
    fn separable_support_is_fit_perfectly() {
        let (a, b) = separable();
        let s = support(&a, &b);
        let model = LogRegModel::fit(&s, &LogRegConfig::default()).unwrap();
        for (label, shots) in s.iter().enumerate() {
            for x in shots {
                assert_eq!(model.predict(x).unwrap(), label);
            }
        }
    }

    #[test]
    fn zero_iterations_keep_zero_weights() {
        let (a, b) = separable();
        let cfg = LogRegConfig {
            max_iters: 0,
            ..Default::default()
        };
        let model = LogRegModel::fit(&support(&a, &b), &cfg).unwrap();
        assert!(model.weights().iter().all(|&w| w == 0.0));
        assert_eq!(model.predict(&[5.0]).unwrap(), 0);
    }

    #[test]
    fn argmax_prediction() {
        let model = LogRegModel::from_weights(2, 1, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(model.predict(&[1.0]).unwrap(), 1);
        assert_eq!(model.predict(&[-1.0]).unwrap(), 0);
        assert!(model.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn loss_never_increases() {
        let (a, b) = separable();
        let (_, trace) = LogRegModel::fit_traced(&support(&a, &b), &LogRegConfig::default()).unwrap();
        assert!(trace.len() > 1);
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        assert!((trace[0] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn huge_step_diverges_with_advice() {
        let (a, b) = separable();
        let cfg = LogRegConfig {
            step_size: 1e308,
            ..Default::default()
        };
        let err = LogRegModel::fit(&support(&a, &b), &cfg).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
        assert!(err.to_string().contains("smaller step"));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pts: Vec<[f64; 2]> = vec![
            [0.3, -1.2],
            [1.1, 0.4],
            [-0.7, 0.9],
            [2.0, 1.5],
            [-1.3, -0.2],
            [0.5, 0.5],
        ];
        let s: Vec<Vec<&[f64]>> = vec![
            vec![&pts[0][..], &pts[1][..]],
            vec![&pts[2][..], &pts[3][..]],
            vec![&pts[4][..], &pts[5][..]],
        ];
        let l2 = 0.05;
        // check at zero and at a generic point
        for w0 in [vec![0.0; 9], (0..9).map(|i| 0.1 * i as f64 - 0.35).collect::<Vec<_>>()] {
            let (_, grad) = loss_and_gradient(&s, &w0, l2).unwrap();
            let h = 1e-6;
            for j in 0..w0.len() {
                let mut wp = w0.clone();
                let mut wm = w0.clone();
                wp[j] += h;
                wm[j] -= h;
                let fd =
                    (loss_and_gradient(&s, &wp, l2).unwrap().0 - loss_and_gradient(&s, &wm, l2).unwrap().0) / (2.0 * h);
                let tol = 1e-5 * grad[j].abs().max(1e-3);
                assert!(
                    (fd - grad[j]).abs() <= tol,
                    "coordinate {j}: fd {fd} vs analytic {}",
                    grad[j]
                );
            }
        }
    }
}
