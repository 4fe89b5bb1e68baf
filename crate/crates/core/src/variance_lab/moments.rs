use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synth::{GaussianClassSpec, SynthConfig};
use crate::adapters::{Adapter, NccModel};
use crate::error::{Error, Result};
use crate::rng::{self, derive_seed};
use crate::stats::quantiles::normal_cdf;
use crate::ExecMode;

/// Query samples per class used when `μ` has no closed form.
pub const DEFAULT_INNER_SAMPLES: usize = 2048;
/// Smallest accepted number of support-set draws.
pub const MIN_MC_SAMPLES: usize = 100;

const MOMENT_DOMAIN: u64 = (1 << 63) | 1;

/// Moments of the conditional per-class accuracy `μ_{t,c}` (the probability
/// that a fresh query of class `c` is classified correctly given the support
/// set of task `t`):
///
/// * `m1 = E[μ]`
/// * `m2 = E[μ²]`
/// * `m3 = E[(1/K²) Σ_{c≠c'} μ_c μ_c']`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// Monte-Carlo standard errors of `(m1, m2, m3)`.
    pub std_errors: [f64; 3],
    /// Covariance matrix of the three estimates.
    pub covariance: [[f64; 3]; 3],
    /// Number of support-set draws (0 for exact values).
    pub mc_samples: usize,
}

impl MomentEstimates {
    /// Known moments with no sampling error.
    pub fn exact(m1: f64, m2: f64, m3: f64) -> Self {
        MomentEstimates {
            m1,
            m2,
            m3,
            std_errors: [0.0; 3],
            covariance: [[0.0; 3]; 3],
            mc_samples: 0,
        }
    }

    /// Moments of a classifier whose `μ` is the same constant for every
    /// class and support set, e.g. uniform guessing (`μ = 1/K`).
    pub fn constant(mu: f64, ways: usize) -> Self {
        let k = ways as f64;
        MomentEstimates::exact(mu, mu * mu, (k - 1.0) / k * mu * mu)
    }

    /// Aggregates per-draw vectors `μ_{t,·}`.
    pub fn from_conditional_accuracies(draws: &[Vec<f64>]) -> Result<Self> {
        let triples = draws
            .iter()
            .map(|mu| {
                if mu.is_empty() {
                    return Err(Error::EmptyInput("a draw has no classes".into()));
                }
                let sq: Vec<f64> = mu.iter().map(|m| m * m).collect();
                Ok(draw_triple(mu, &sq))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_triples(&triples)
    }

    fn from_triples(triples: &[[f64; 3]]) -> Result<Self> {
        let n = triples.len();
        if n < 2 {
            return Err(Error::InsufficientTasks {
                what: "moment estimation",
                tasks: n,
                needed: 2,
            });
        }
        let nf = n as f64;
        let mut mean = [0.0; 3];
        for t in triples {
            for j in 0..3 {
                mean[j] += t[j];
            }
        }
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut cov = [[0.0; 3]; 3];
        for t in triples {
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += (t[i] - mean[i]) * (t[j] - mean[j]);
                }
            }
        }
        // covariance of the means
        for row in cov.iter_mut() {
            for v in row.iter_mut() {
                *v /= (nf - 1.0) * nf;
            }
        }
        Ok(MomentEstimates {
            m1: mean[0],
            m2: mean[1],
            m3: mean[2],
            std_errors: [cov[0][0].sqrt(), cov[1][1].sqrt(), cov[2][2].sqrt()],
            covariance: cov,
            mc_samples: n,
        })
    }
}

/// `(mean_c μ, mean_c μ², Σ_{c≠c'} μ_c μ_c' / K²)` for one draw; `sq` holds
/// unbiased estimates of `μ_c²`.
fn draw_triple(mu: &[f64], sq: &[f64]) -> [f64; 3] {
    let k = mu.len() as f64;
    let sum: f64 = mu.iter().sum();
    let sum_sq_plain: f64 = mu.iter().map(|m| m * m).sum();
    [
        sum / k,
        sq.iter().sum::<f64>() / k,
        (sum * sum - sum_sq_plain) / (k * k),
    ]
}

/// Estimates the moments by drawing `mc_samples` support sets from the class
/// distributions of `config`.
///
/// Each draw picks `ways` classes uniformly (all of them when the config has
/// exactly `ways`), then `shots` samples per class. For the plain NCC adapter
/// `μ` is exact: the decision regions on the line are bounded by centroid
/// midpoints, and `μ_c` is the class's Gaussian mass over its region.
/// Other adapters use `inner_samples` fresh queries per class, with the
/// unbiased correction `(nμ̂² − μ̂)/(n − 1)` for `μ²`.
pub fn estimate_moments(
    config: &SynthConfig,
    ways: usize,
    shots: usize,
    adapter: &Adapter,
    mc_samples: usize,
    inner_samples: usize,
    exec: ExecMode,
) -> Result<MomentEstimates> {
    config.validate()?;
    adapter.validate()?;
    if mc_samples < MIN_MC_SAMPLES {
        return Err(Error::Config(format!(
            "moment estimation needs at least {MIN_MC_SAMPLES} support draws, got {mc_samples}"
        )));
    }
    if ways < 2 || ways > config.classes() {
        return Err(Error::Config(format!(
            "cannot draw {ways}-way tasks from {} classes",
            config.classes()
        )));
    }
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    if matches!(adapter, Adapter::Oracle(_)) {
        return Err(Error::Config("the oracle adapter has no conditional accuracy".into()));
    }
    let analytic = matches!(adapter, Adapter::Ncc { l2_normalize: false });
    estimate(config, ways, shots, adapter, mc_samples, inner_samples, exec, analytic)
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    config: &SynthConfig,
    ways: usize,
    shots: usize,
    adapter: &Adapter,
    mc_samples: usize,
    inner_samples: usize,
    exec: ExecMode,
    analytic: bool,
) -> Result<MomentEstimates> {
    if !analytic && inner_samples < 2 {
        return Err(Error::Config("at least two inner query samples are needed".into()));
    }
    let base = derive_seed(config.seed, MOMENT_DOMAIN);

    let draw = |d: usize| -> Result<[f64; 3]> {
        let mut rng = rng::substream(base, d as u64);
        let specs = pick_classes(&config.class_specs, ways, &mut rng);
        let support = draw_support(&specs, shots, &mut rng)?;
        if analytic {
            let refs: Vec<Vec<&[f64]>> = support.iter().map(|c| c.iter().map(|x| &x[..]).collect()).collect();
            let model = NccModel::fit(&refs, false)?;
            let centroids: Vec<f64> = model.centroids().iter().map(|c| c[0]).collect();
            let mu = ncc_line_accuracies(&centroids, &specs);
            let sq: Vec<f64> = mu.iter().map(|m| m * m).collect();
            Ok(draw_triple(&mu, &sq))
        } else {
            let refs: Vec<Vec<&[f64]>> = support.iter().map(|c| c.iter().map(|x| &x[..]).collect()).collect();
            let model = adapter.fit(&refs)?;
            let n = inner_samples as f64;
            let mut mu = Vec::with_capacity(ways);
            let mut sq = Vec::with_capacity(ways);
            for (local, spec) in specs.iter().enumerate() {
                let dist = normal(spec)?;
                let mut hits = 0usize;
                for _ in 0..inner_samples {
                    if model.predict(&[dist.sample(&mut rng)])? == local {
                        hits += 1;
                    }
                }
                let m = hits as f64 / n;
                mu.push(m);
                sq.push((n * m * m - m) / (n - 1.0));
            }
            Ok(draw_triple(&mu, &sq))
        }
    };

    let triples: Vec<[f64; 3]> = match exec {
        ExecMode::Sequential => (0..mc_samples).map(draw).collect::<Result<_>>()?,
        ExecMode::Parallel => (0..mc_samples).into_par_iter().map(draw).collect::<Result<_>>()?,
    };
    MomentEstimates::from_triples(&triples)
}

fn normal(spec: &GaussianClassSpec) -> Result<Normal<f64>> {
    Normal::new(spec.mu, spec.sigma).map_err(|e| Error::Config(e.to_string()))
}

fn pick_classes<R: Rng + ?Sized>(all: &[GaussianClassSpec], ways: usize, rng: &mut R) -> Vec<GaussianClassSpec> {
    if ways == all.len() {
        return all.to_vec();
    }
    let mut idx: Vec<usize> = (0..all.len()).collect();
    rng::partial_shuffle(&mut idx, ways, rng);
    let mut chosen = idx[..ways].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| all[i]).collect()
}

fn draw_support<R: Rng + ?Sized>(specs: &[GaussianClassSpec], shots: usize, rng: &mut R) -> Result<Vec<Vec<[f64; 1]>>> {
    specs
        .iter()
        .map(|spec| {
            let dist = normal(spec)?;
            Ok((0..shots).map(|_| [dist.sample(rng)]).collect())
        })
        .collect()
}

/// Exact per-class accuracy of nearest-centroid classification on the line.
///
/// Classes sharing a centroid resolve to the lowest index, as the classifier
/// does.
pub fn ncc_line_accuracies(centroids: &[f64], specs: &[GaussianClassSpec]) -> Vec<f64> {
    let k = centroids.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]).then(a.cmp(&b)));
    // distinct centroid values, each owned by its lowest local index
    let mut groups: Vec<(f64, usize)> = Vec::with_capacity(k);
    for &i in &order {
        match groups.last() {
            Some(&(v, _)) if v == centroids[i] => {}
            _ => groups.push((centroids[i], i)),
        }
    }
    let mut mu = vec![0.0; k];
    for (g, &(_, owner)) in groups.iter().enumerate() {
        let lo = if g == 0 {
            f64::NEG_INFINITY
        } else {
            0.5 * (groups[g - 1].0 + groups[g].0)
        };
        let hi = if g + 1 == groups.len() {
            f64::INFINITY
        } else {
            0.5 * (groups[g].0 + groups[g + 1].0)
        };
        let spec = specs[owner];
        mu[owner] = gaussian_mass((lo - spec.mu) / spec.sigma, (hi - spec.mu) / spec.sigma);
    }
    mu
}

/// `Φ(b) − Φ(a)` computed on the tail that keeps precision.
fn gaussian_mass(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}

/// Variance of a single task's accuracy:
/// `m1/(KQ) + (Q−1)·m2/(KQ) + m3 − m1²`.
pub fn predict_task_variance(m: &MomentEstimates, ways: usize, queries: usize) -> f64 {
    let kq = (ways * queries) as f64;
    m.m1 / kq + (queries as f64 - 1.0) * m.m2 / kq + m.m3 - m.m1 * m.m1
}

/// Delta-method standard error of [`predict_task_variance`].
pub fn predict_task_variance_standard_error(m: &MomentEstimates, ways: usize, queries: usize) -> f64 {
    let kq = (ways * queries) as f64;
    let g = [1.0 / kq - 2.0 * m.m1, (queries as f64 - 1.0) / kq, 1.0];
    let mut v = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            v += g[i] * m.covariance[i][j] * g[j];
        }
    }
    v.max(0.0).sqrt()
}

/// Unbiased sample variance and its standard error,
/// `√((m4 − s⁴(n−3)/(n−1)) / n)` with `m4` the fourth central moment.
pub fn sample_variance_standard_error(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InsufficientTasks {
            what: "a variance standard error",
            tasks: n,
            needed: 4,
        });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in values {
        let d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    let s2 = m2 / (nf - 1.0);
    m4 /= nf;
    let se = ((m4 - s2 * s2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0).sqrt();
    Ok((s2, se))
}
