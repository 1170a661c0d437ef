use rayon::prelude::*;

use crate::Matrix;

/// Full `N × N` matrix of squared Euclidean distances between rows. Each
/// pair is computed once, so the result is exactly symmetric.
pub fn squared_distances(points: &Matrix) -> Matrix {
    let n = points.rows();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = points.row(i);
            (i + 1..n)
                .map(|j| a.iter().zip(points.row(j)).map(|(x, y)| (x - y) * (x - y)).sum())
                .collect()
        })
        .collect();
    let mut out = Matrix::zeros(n, n);
    for (i, row) in upper.into_iter().enumerate() {
        for (k, d) in row.into_iter().enumerate() {
            let j = i + 1 + k;
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}

/// Euclidean distance matrix: symmetric with a zero diagonal.
pub fn pairwise_distances(points: &Matrix) -> Matrix {
    let mut d = squared_distances(points);
    for v in d.as_mut_slice() {
        *v = v.sqrt();
    }
    d
}
