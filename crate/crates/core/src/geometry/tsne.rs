//! Exact t-SNE: per-point Gaussian bandwidths matched to a target
//! perplexity, symmetrized affinities, Student-t kernel in the embedding,
//! and gradient descent with momentum, per-parameter gains and early
//! exaggeration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::squared_distances;
use super::{GeometryError, ProjectionDiagnostics, ProjectionMethod, ProjectionResult};
use crate::Matrix;

const ENTROPY_TOL: f64 = 1e-5;
const MAX_BISECTION_STEPS: usize = 100;
const AFFINITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TsneInit {
    /// Isotropic Gaussian with standard deviation `init_std`.
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub out_dims: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub momentum_initial: f64,
    pub momentum_final: f64,
    pub momentum_switch_iter: usize,
    pub min_gain: f64,
    pub init: TsneInit,
    pub init_std: f64,
    /// KL divergence is recorded every this many iterations.
    pub kl_every: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 100.0,
            out_dims: 2,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            momentum_initial: 0.5,
            momentum_final: 0.8,
            momentum_switch_iter: 250,
            min_gain: 0.01,
            init: TsneInit::Gaussian,
            init_std: 1e-4,
            kl_every: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneDiagnostics {
    pub final_kl: f64,
    pub iterations: usize,
    /// `(iteration, KL(P‖Q))` pairs; the exaggerated phase uses the plain P.
    pub kl_history: Vec<(usize, f64)>,
    /// Largest `|H_i - ln(perplexity)|` over all points.
    pub max_entropy_error: f64,
    /// Points whose bandwidth search stopped without reaching tolerance.
    pub uncalibrated_points: usize,
}

/// Outcome of the bandwidth search for one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Gaussian bandwidth, `beta = 1 / (2 sigma^2)`.
    pub sigma: f64,
    pub beta: f64,
    /// Entropy (nats) of the conditional distribution at `beta`.
    pub entropy: f64,
    /// Conditional probabilities over the neighbors, in input order.
    pub probabilities: Vec<f64>,
    pub converged: bool,
}

fn conditional(sq_dists: &[f64], beta: f64, d_min: f64, out: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    let mut weighted = 0.0;
    for (p, &d) in out.iter_mut().zip(sq_dists) {
        let shifted = d - d_min;
        *p = (-beta * shifted).exp();
        sum += *p;
        weighted += shifted * *p;
    }
    for p in out.iter_mut() {
        *p /= sum;
    }
    sum.ln() + beta * weighted / sum
}

/// Bisection on the Gaussian precision so the conditional distribution over
/// `sq_dists` (squared distances to every other point) has entropy
/// `ln(target_perplexity)`. Entropy decreases monotonically in precision.
/// If tolerance is not met within the step budget the closest bandwidth seen
/// is returned with `converged == false`.
pub fn perplexity_calibration(sq_dists: &[f64], target_perplexity: f64) -> Result<Calibration, GeometryError> {
    if sq_dists.len() < 2 {
        return Err(GeometryError::TooFewPoints { needed: 2, got: sq_dists.len() });
    }
    if !(target_perplexity > 1.0) || !target_perplexity.is_finite() {
        return Err(GeometryError::InvalidConfig(format!("perplexity {target_perplexity} must exceed 1")));
    }
    if sq_dists.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(GeometryError::NonFinite);
    }
    let target = target_perplexity.ln();
    let d_min = sq_dists.iter().copied().fold(f64::INFINITY, f64::min);
    let mut probs = vec![0.0; sq_dists.len()];
    let mut beta = 1.0;
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut best = (f64::INFINITY, beta, 0.0);
    let mut converged = false;
    for _ in 0..MAX_BISECTION_STEPS {
        let h = conditional(sq_dists, beta, d_min, &mut probs);
        let err = (h - target).abs();
        if err < best.0 {
            best = (err, beta, h);
        }
        if err < ENTROPY_TOL {
            converged = true;
            break;
        }
        if h > target {
            lo = beta;
            beta = if hi.is_infinite() { beta * 2.0 } else { 0.5 * (beta + hi) };
        } else {
            hi = beta;
            beta = 0.5 * (beta + lo);
        }
    }
    let (_, beta, entropy) = best;
    if !converged {
        log::warn!("perplexity calibration stopped {:.2e} nats from target", (entropy - target).abs());
    }
    conditional(sq_dists, beta, d_min, &mut probs);
    Ok(Calibration { sigma: (0.5 / beta).sqrt(), beta, entropy, probabilities: probs, converged })
}

/// Symmetrized joint affinities `(P_{j|i} + P_{i|j}) / 2N`, floored.
fn joint_probabilities(points: &Matrix, perplexity: f64) -> Result<(Matrix, f64, usize), GeometryError> {
    let n = points.rows();
    let sq = squared_distances(points);
    let rows: Vec<Calibration> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| sq[(i, j)]).collect();
            perplexity_calibration(&row, perplexity)
        })
        .collect::<Result<_, _>>()?;
    let target = perplexity.ln();
    let max_err = rows.iter().map(|c| (c.entropy - target).abs()).fold(0.0, f64::max);
    let failed = rows.iter().filter(|c| !c.converged).count();
    let mut cond = Matrix::zeros(n, n);
    for (i, c) in rows.iter().enumerate() {
        let mut k = 0;
        for j in 0..n {
            if j != i {
                cond[(i, j)] = c.probabilities[k];
                k += 1;
            }
        }
    }
    let mut p = Matrix::zeros(n, n);
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[(i, j)] = ((cond[(i, j)] + cond[(j, i)]) / denom).max(AFFINITY_FLOOR);
            }
        }
    }
    Ok((p, max_err, failed))
}

/// Fills `num` with the Student-t kernel `(1 + |y_i - y_j|²)^-1` (zero
/// diagonal) and returns its sum, reduced row by row in order.
fn fill_kernel(y: &Matrix, num: &mut Matrix) -> f64 {
    let n = y.rows();
    let sums: Vec<f64> = num
        .as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| {
            let yi = y.row(i);
            let mut sum = 0.0;
            for (j, v) in row.iter_mut().enumerate() {
                *v = if j == i {
                    0.0
                } else {
                    let d2: f64 = yi.iter().zip(y.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    1.0 / (1.0 + d2)
                };
                sum += *v;
            }
            sum
        })
        .collect();
    sums.iter().sum()
}

fn kl_divergence(p: &Matrix, num: &Matrix, z: f64) -> f64 {
    let n = p.rows();
    let partial: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let pij = p[(i, j)];
                    let qij = (num[(i, j)] / z).max(AFFINITY_FLOOR);
                    pij * (pij / qij).ln()
                })
                .sum()
        })
        .collect();
    partial.iter().sum()
}

fn gradient(p: &Matrix, num: &Matrix, z: f64, y: &Matrix, exaggeration: f64, out: &mut Matrix) {
    let (n, dims) = y.shape();
    out.as_mut_slice().par_chunks_mut(dims).enumerate().for_each(|(i, g)| {
        g.fill(0.0);
        let yi = y.row(i);
        let (p_row, num_row) = (p.row(i), num.row(i));
        for j in 0..n {
            if j == i {
                continue;
            }
            let coeff = 4.0 * (exaggeration * p_row[j] - num_row[j] / z) * num_row[j];
            for (gk, (a, b)) in g.iter_mut().zip(yi.iter().zip(y.row(j))) {
                *gk += coeff * (a - b);
            }
        }
    });
}

pub fn tsne(points: &Matrix, config: &TsneConfig) -> Result<ProjectionResult, GeometryError> {
    let n = points.rows();
    if n < 4 {
        return Err(GeometryError::TooFewPoints { needed: 4, got: n });
    }
    if !points.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if !(config.perplexity > 1.0 && config.perplexity < n as f64) {
        return Err(GeometryError::PerplexityTooHigh { perplexity: config.perplexity, n });
    }
    if config.iterations == 0 || config.out_dims == 0 || config.kl_every == 0 {
        return Err(GeometryError::InvalidConfig("iterations, out_dims and kl_every must be positive".into()));
    }
    let (p, max_entropy_error, uncalibrated_points) = joint_probabilities(points, config.perplexity)?;

    let dims = config.out_dims;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = match config.init {
        TsneInit::Gaussian => Normal::new(0.0, config.init_std)
            .map_err(|e| GeometryError::InvalidConfig(e.to_string()))?,
    };
    let mut y = Matrix::from_vec(n, dims, (0..n * dims).map(|_| init.sample(&mut rng)).collect());
    let mut velocity = Matrix::zeros(n, dims);
    let mut gains = Matrix::from_vec(n, dims, vec![1.0; n * dims]);
    let mut grad = Matrix::zeros(n, dims);
    let mut num = Matrix::zeros(n, n);
    let mut kl_history = Vec::new();

    for iter in 0..config.iterations {
        let exaggeration = if iter < config.exaggeration_iters { config.early_exaggeration } else { 1.0 };
        let momentum =
            if iter < config.momentum_switch_iter { config.momentum_initial } else { config.momentum_final };
        let z = fill_kernel(&y, &mut num);
        gradient(&p, &num, z, &y, exaggeration, &mut grad);
        if !grad.is_finite() {
            return Err(GeometryError::NonFiniteGradient { iteration: iter });
        }
        let g = grad.as_slice();
        let gain = gains.as_mut_slice();
        let vel = velocity.as_mut_slice();
        let pos = y.as_mut_slice();
        for k in 0..g.len() {
            gain[k] = if (g[k] > 0.0) != (vel[k] > 0.0) { gain[k] + 0.2 } else { gain[k] * 0.8 };
            gain[k] = gain[k].max(config.min_gain);
            vel[k] = momentum * vel[k] - config.learning_rate * gain[k] * g[k];
            pos[k] += vel[k];
        }
        for d in 0..dims {
            let mean = (0..n).map(|i| y[(i, d)]).sum::<f64>() / n as f64;
            for i in 0..n {
                y[(i, d)] -= mean;
            }
        }
        let done = iter + 1;
        if done % config.kl_every == 0 || done == config.iterations {
            let z = fill_kernel(&y, &mut num);
            kl_history.push((done, kl_divergence(&p, &num, z)));
        }
    }
    let final_kl = kl_history.last().map_or(f64::NAN, |&(_, kl)| kl);
    Ok(ProjectionResult {
        coords: y,
        method: ProjectionMethod::Tsne,
        diagnostics: ProjectionDiagnostics::Tsne(TsneDiagnostics {
            final_kl,
            iterations: config.iterations,
            kl_history,
            max_entropy_error,
            uncalibrated_points,
        }),
    })
}
