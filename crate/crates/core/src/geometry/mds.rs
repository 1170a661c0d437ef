use serde::{Deserialize, Serialize};

use super::eigen::leading_eigenpairs;
use super::{GeometryError, ProjectionDiagnostics, ProjectionMethod, ProjectionResult};
use crate::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsDiagnostics {
    /// Leading eigenvalues of the double-centered matrix, one per output axis.
    pub eigenvalues: Vec<f64>,
    /// `1 - captured / trace(B)`, clamped to `[0, 1]`. For Euclidean input
    /// the trace is the whole (nonnegative) spectrum.
    pub residual: f64,
    /// Output axes whose eigenvalue was not positive; their coordinates are 0.
    pub clipped_axes: Vec<usize>,
}

/// Torgerson scaling: `B = -1/2 · J D² J`, coordinates are the leading
/// eigenvectors scaled by `sqrt(eigenvalue)`. Each axis is oriented so its
/// first nonzero loading is positive.
pub fn classical_mds(dist: &Matrix, out_dims: usize) -> Result<ProjectionResult, GeometryError> {
    let (n, cols) = dist.shape();
    if n != cols {
        return Err(GeometryError::NotSquare { rows: n, cols });
    }
    if !dist.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if out_dims == 0 || out_dims > n {
        return Err(GeometryError::InvalidConfig(format!("cannot embed {n} points in {out_dims} dimensions")));
    }
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = dist[(i, j)];
            b[(i, j)] = d * d;
        }
    }
    let row_means: Vec<f64> = (0..n).map(|i| b.row(i).iter().sum::<f64>() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            // D² is symmetric, so column means equal row means.
            b[(i, j)] = -0.5 * (b[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }
    // Enforce exact symmetry before the symmetric solver.
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = avg;
            b[(j, i)] = avg;
        }
    }

    let eig = leading_eigenpairs(&b, out_dims)?;
    let trace: f64 = (0..n).map(|i| b[(i, i)]).sum();
    let scale = eig.values.first().map_or(0.0, |v| v.abs()).max(f64::MIN_POSITIVE);
    let mut coords = Matrix::zeros(n, out_dims);
    let mut eigenvalues = Vec::with_capacity(out_dims);
    let mut clipped_axes = Vec::new();
    let mut captured = 0.0;
    for axis in 0..out_dims {
        let lambda = eig.values[axis];
        eigenvalues.push(lambda);
        // Eigenvalues at round-off level are treated as zero.
        if lambda <= 1e-12 * scale {
            clipped_axes.push(axis);
            continue;
        }
        captured += lambda;
        let v = eig.vectors.row(axis);
        let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-8 * max_abs)
            .map_or(1.0, |&x| if x < 0.0 { -1.0 } else { 1.0 });
        let s = sign * lambda.sqrt();
        for i in 0..n {
            coords[(i, axis)] = s * v[i];
        }
    }
    let residual = if trace > 0.0 { (1.0 - captured / trace).clamp(0.0, 1.0) } else { 0.0 };
    Ok(ProjectionResult {
        coords,
        method: ProjectionMethod::Mds,
        diagnostics: ProjectionDiagnostics::Mds(MdsDiagnostics { eigenvalues, residual, clipped_axes }),
    })
}
