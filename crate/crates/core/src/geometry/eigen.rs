//! Dense symmetric eigendecomposition: Householder tridiagonalization
//! followed by the QL algorithm with implicit shifts.
//!
//! The working array holds the transpose of the usual eigenvector matrix so
//! that every inner loop walks contiguous memory; eigenvectors come out as
//! rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::GeometryError;
use crate::Matrix;

/// Eigenpairs sorted by descending eigenvalue. Row `k` of `vectors` is the
/// unit eigenvector for `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const MAX_SWEEPS_PER_VALUE: usize = 60;

pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen, GeometryError> {
    let (n, cols) = a.shape();
    if n != cols {
        return Err(GeometryError::NotSquare { rows: n, cols });
    }
    if !a.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if n == 0 {
        return Ok(SymmetricEigen { values: vec![], vectors: Matrix::zeros(0, 0) });
    }
    // z[c * n + r] holds V[r][c]; the input is symmetric so it starts as A.
    let mut z = a.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut z, &mut d, &mut e);
    ql_implicit(n, &mut z, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (row, &i) in order.iter().enumerate() {
        vectors.row_mut(row).copy_from_slice(&z[i * n..(i + 1) * n]);
    }
    Ok(SymmetricEigen { values, vectors })
}

/// The `k` algebraically largest eigenpairs via Lanczos with full
/// reorthogonalization. Small matrices go straight to the dense solver.
/// Iteration stops once every wanted Ritz pair has residual below
/// `1e-10 * max|theta|`.
pub fn leading_eigenpairs(a: &Matrix, k: usize) -> Result<SymmetricEigen, GeometryError> {
    let (n, cols) = a.shape();
    if n != cols {
        return Err(GeometryError::NotSquare { rows: n, cols });
    }
    if !a.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    if k > n {
        return Err(GeometryError::InvalidConfig(format!("asked for {k} eigenpairs of a {n}x{n} matrix")));
    }
    if n <= DENSE_CUTOFF {
        let full = symmetric_eigen(a)?;
        let vectors = Matrix::from_vec(k, n, full.vectors.as_slice()[..k * n].to_vec());
        return Ok(SymmetricEigen { values: full.values[..k].to_vec(), vectors });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q = fresh_direction(n, &basis, &mut rng).ok_or(GeometryError::EigenFailure)?;
    loop {
        let mut w: Vec<f64> = (0..n).into_par_iter().map(|i| dot(a.row(i), &q)).collect();
        let aj = dot(&q, &w);
        basis.push(q);
        alpha.push(aj);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let bj = dot(&w, &w).sqrt();
        let m = basis.len();
        if m >= k && (m % CHECK_EVERY == 0 || m == n || bj <= f64::EPSILON * norm_hint(&alpha, &beta)) {
            if let Some(found) = ritz_pairs(&basis, &alpha, &beta, bj, k, m == n)? {
                return Ok(found);
            }
        }
        if m == n {
            return Err(GeometryError::EigenFailure);
        }
        if bj <= f64::EPSILON * norm_hint(&alpha, &beta) {
            // Invariant subspace: restart with a direction orthogonal to it.
            beta.push(0.0);
            q = fresh_direction(n, &basis, &mut rng).ok_or(GeometryError::EigenFailure)?;
        } else {
            beta.push(bj);
            q = w.into_iter().map(|x| x / bj).collect();
        }
    }
}

const DENSE_CUTOFF: usize = 64;
const CHECK_EVERY: usize = 10;
const LANCZOS_SEED: u64 = 0x6c616e637a6f73;
const RITZ_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_hint(alpha: &[f64], beta: &[f64]) -> f64 {
    alpha.iter().chain(beta).fold(f64::MIN_POSITIVE, |m, x| m.max(x.abs()))
}

fn fresh_direction(n: usize, basis: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            return Some(v.into_iter().map(|x| x / norm).collect());
        }
    }
    None
}

fn ritz_pairs(
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    last_beta: f64,
    k: usize,
    exhausted: bool,
) -> Result<Option<SymmetricEigen>, GeometryError> {
    let m = alpha.len();
    let mut t = Matrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let small = symmetric_eigen(&t)?;
    let scale = small.values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let converged = (0..k).all(|r| (last_beta * small.vectors[(r, m - 1)]).abs() <= RITZ_TOL * scale);
    if !converged && !exhausted {
        return Ok(None);
    }
    let n = basis[0].len();
    let mut vectors = Matrix::zeros(k, n);
    for r in 0..k {
        let s = small.vectors.row(r);
        let out = vectors.row_mut(r);
        for (b, &c) in basis.iter().zip(s) {
            for (o, x) in out.iter_mut().zip(b) {
                *o += c * x;
            }
        }
        let norm = dot(out, out).sqrt();
        for o in out.iter_mut() {
            *o /= norm;
        }
    }
    Ok(Some(SymmetricEigen { values: small.values[..k].to_vec(), vectors }))
}

fn tridiagonalize(n: usize, z: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    macro_rules! v {
        ($r:expr, $c:expr) => {
            z[($c) * n + ($r)]
        };
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
                v!(j, i) = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v!(j, i) = f;
                g = e[j] + v!(j, j) * f;
                let col = &z[j * n..j * n + i];
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut z[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }
    // Accumulate the transformations.
    for i in 0..n - 1 {
        v!(n - 1, i) = v!(i, i);
        v!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v!(k, i + 1) / h;
            }
            let (head, tail) = z.split_at_mut((i + 1) * n);
            let u = &tail[..=i];
            for j in 0..=i {
                let col = &mut head[j * n..j * n + i + 1];
                let g: f64 = u.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
        v!(n - 1, j) = 0.0;
    }
    v!(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

fn ql_implicit(n: usize, z: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<(), GeometryError> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS_PER_VALUE {
                    return Err(GeometryError::EigenFailure);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for k in 0..n {
                        let hk = vi1[k];
                        vi1[k] = s * vi[k] + c * hk;
                        vi[k] = c * vi[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
