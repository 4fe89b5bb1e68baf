use serde::{Deserialize, Serialize};

use super::moments::MomentEstimates;
use super::sweep::SweepPoint;
use crate::error::{Error, Result};

/// `Var(Ā) ≈ scale · (α·Q + β/Q + γ)` with `scale = K / |D|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceModelFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub scale: f64,
    /// Root-mean-square residual on the `Var(Ā)` scale (zero for exact models).
    pub residual_rms: f64,
    /// Coefficient of determination on the `Var(Ā)` scale.
    pub r_squared: f64,
}

/// Location of the minimum of the fitted curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum QStar {
    /// `√(β/α)` for a U-shaped curve.
    Interior(f64),
    /// `α ≤ 0`: the variance keeps decreasing with `Q`.
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWeighting {
    #[default]
    Unweighted,
    /// Weight each point by its number of repetitions.
    Repetitions,
}

impl VarianceModelFit {
    /// Model coefficients implied by the moments of the conditional
    /// per-class accuracy:
    ///
    /// * `α = m2/K + m3 − m1²`
    /// * `β = (S/K)(m1 − m2)`
    /// * `γ = m1/K − m2/K + (S/K)·m2 + S(m3 − m1²)`
    pub fn from_moments(m: &MomentEstimates, ways: usize, shots: usize, total_samples: usize) -> Self {
        let k = ways as f64;
        let s = shots as f64;
        VarianceModelFit {
            alpha: m.m2 / k + m.m3 - m.m1 * m.m1,
            beta: s / k * (m.m1 - m.m2),
            gamma: m.m1 / k - m.m2 / k + s / k * m.m2 + s * (m.m3 - m.m1 * m.m1),
            scale: k / total_samples as f64,
            residual_rms: 0.0,
            r_squared: 1.0,
        }
    }

    /// Model value of `Var(Ā)` at `queries`.
    pub fn predict(&self, queries: f64) -> f64 {
        self.scale * (self.alpha * queries + self.beta / queries + self.gamma)
    }

    pub fn q_star(&self) -> Result<QStar> {
        q_star(self)
    }
}

/// Minimizer of the fitted curve over positive reals.
pub fn q_star(fit: &VarianceModelFit) -> Result<QStar> {
    if fit.beta.is_nan() || fit.beta <= 0.0 {
        return Err(Error::InvalidFit(format!("beta must be positive, got {}", fit.beta)));
    }
    if fit.alpha > 0.0 {
        Ok(QStar::Interior((fit.beta / fit.alpha).sqrt()))
    } else {
        Ok(QStar::Decreasing)
    }
}

/// Least-squares fit of `Var(Ā)·|D|/K` on the basis `{Q, 1/Q, 1}`.
pub fn fit_variance_model(
    points: &[SweepPoint],
    ways: usize,
    total_samples: usize,
    weighting: FitWeighting,
) -> Result<VarianceModelFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.queries).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 || distinct[0] == 0 {
        return Err(Error::RankDeficient(format!(
            "need at least three distinct positive Q values, got {distinct:?}"
        )));
    }
    if ways == 0 || total_samples == 0 {
        return Err(Error::Config("ways and pool size must be positive".into()));
    }
    let scale = ways as f64 / total_samples as f64;

    let mut design = Vec::with_capacity(points.len());
    let mut target = Vec::with_capacity(points.len());
    for p in points {
        let q = p.queries as f64;
        let w = match weighting {
            FitWeighting::Unweighted => 1.0,
            FitWeighting::Repetitions => p.repetitions as f64,
        }
        .sqrt();
        design.push([w * q, w / q, w]);
        target.push(w * p.var_abar / scale);
    }
    let [alpha, beta, gamma] = least_squares(&design, &target)?;

    let mut fit = VarianceModelFit {
        alpha,
        beta,
        gamma,
        scale,
        residual_rms: 0.0,
        r_squared: 1.0,
    };
    let n = points.len() as f64;
    let mean_y = points.iter().map(|p| p.var_abar).sum::<f64>() / n;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.var_abar - fit.predict(p.queries as f64)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.var_abar - mean_y).powi(2)).sum();
    fit.residual_rms = (ss_res / n).sqrt();
    fit.r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(fit)
}

/// Solves `min ‖A x − b‖` for three unknowns with Householder QR.
fn least_squares(a: &[[f64; 3]], b: &[f64]) -> Result<[f64; 3]> {
    let m = a.len();
    let mut r: Vec<[f64; 3]> = a.to_vec();
    let mut y = b.to_vec();
    let col_norm_max = (0..3)
        .map(|j| r.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    for j in 0..3 {
        let norm = r[j..].iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt();
        if norm <= 1e-12 * col_norm_max {
            return Err(Error::RankDeficient(format!("column {j} is dependent on the others")));
        }
        let alpha = if r[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = r[j..].iter().map(|row| row[j]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for k in j..3 {
            let dot: f64 = v.iter().zip(&r[j..]).map(|(vi, row)| vi * row[k]).sum();
            let f = 2.0 * dot / vnorm2;
            for (vi, row) in v.iter().zip(r[j..].iter_mut()) {
                row[k] -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&y[j..]).map(|(vi, yi)| vi * yi).sum();
        let f = 2.0 * dot / vnorm2;
        for (vi, yi) in v.iter().zip(y[j..].iter_mut()) {
            *yi -= f * vi;
        }
    }
    debug_assert!(m >= 3);
    let mut x = [0.0; 3];
    for j in (0..3).rev() {
        let s: f64 = (j + 1..3).map(|k| r[j][k] * x[k]).sum();
        x[j] = (y[j] - s) / r[j][j];
    }
    Ok(x)
}
