//! Generalized Discrimination Value.
//!
//! Every dimension is z-scored and halved, then
//!
//! ```text
//! GDV = 1/sqrt(D) * [ (1/L) Σ_l intra(l) - 2/(L(L-1)) Σ_{l<m} inter(l, m) ]
//! ```
//!
//! where `intra(l)` is the mean Euclidean distance over distinct pairs inside
//! class `l` and `inter(l, m)` the mean over all cross pairs. Zero means the
//! classes overlap completely; more negative means better separated.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GeometryError, LabeledPointSet};
use crate::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdvResult {
    pub gdv: f64,
    /// Mean intra-class distance per class label.
    pub intra: Vec<f64>,
    /// Symmetric matrix of mean inter-class distances (zero diagonal).
    pub inter: Vec<Vec<f64>>,
    /// Dimensions kept after dropping constant ones.
    pub d_eff: usize,
    pub dropped_dims: usize,
}

/// Per-dimension `0.5 * (x - mean) / std` with the population standard
/// deviation. Constant dimensions are dropped; the returned index list names
/// the kept input columns in their original order.
pub fn zscore_half(points: &Matrix) -> Result<(Matrix, Vec<usize>), GeometryError> {
    let (n, d) = points.shape();
    if n < 2 {
        return Err(GeometryError::TooFewPoints { needed: 2, got: n });
    }
    let mut kept = Vec::new();
    let mut stats = Vec::new();
    for j in 0..d {
        let col = points.column(j);
        let first = col[0];
        if col.iter().all(|&x| x == first) {
            continue;
        }
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if !(std > 0.0) {
            continue;
        }
        kept.push(j);
        stats.push((mean, std));
    }
    if kept.is_empty() {
        return Err(GeometryError::AllDimensionsConstant);
    }
    let mut out = Matrix::zeros(n, kept.len());
    for i in 0..n {
        let src = points.row(i);
        for (k, (&j, &(mean, std))) in kept.iter().zip(&stats).enumerate() {
            out[(i, k)] = 0.5 * (src[j] - mean) / std;
        }
    }
    Ok((out, kept))
}

/// Column order that depends only on column contents, so permuting input
/// dimensions cannot change the summation order downstream.
fn canonical_column_order(m: &Matrix) -> Vec<usize> {
    let cols: Vec<Vec<f64>> = (0..m.cols()).map(|j| m.column(j)).collect();
    let mut order: Vec<usize> = (0..m.cols()).collect();
    order.sort_by(|&a, &b| {
        cols[a]
            .iter()
            .zip(&cols[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    order
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn gdv(data: &LabeledPointSet) -> Result<GdvResult, GeometryError> {
    let num_classes = data.num_classes();
    if num_classes < 2 {
        return Err(GeometryError::TooFewClasses(num_classes));
    }
    let sizes = data.class_sizes();
    if let Some((class, &size)) = sizes.iter().enumerate().find(|(_, &s)| s < 2) {
        return Err(GeometryError::UndefinedIntraClass { class, size });
    }
    let (scaled, kept) = zscore_half(data.points())?;
    let d_eff = kept.len();
    let scaled = scaled.select_columns(&canonical_column_order(&scaled));

    // Classes are renumbered by first appearance so that relabeling the
    // input leaves every accumulation order unchanged.
    let mut canon_of = vec![usize::MAX; num_classes];
    let mut label_of = Vec::with_capacity(num_classes);
    for &l in data.labels() {
        if canon_of[l] == usize::MAX {
            canon_of[l] = label_of.len();
            label_of.push(l);
        }
    }
    let canon: Vec<usize> = data.labels().iter().map(|&l| canon_of[l]).collect();

    let n = data.len();
    let row_sums: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; num_classes * num_classes];
            let a = scaled.row(i);
            for j in i + 1..n {
                let (ci, cj) = (canon[i], canon[j]);
                let (lo, hi) = if ci <= cj { (ci, cj) } else { (cj, ci) };
                acc[lo * num_classes + hi] += euclidean(a, scaled.row(j));
            }
            acc
        })
        .collect();
    let mut sums = vec![0.0; num_classes * num_classes];
    for row in &row_sums {
        for (s, r) in sums.iter_mut().zip(row) {
            *s += r;
        }
    }

    let canon_size: Vec<f64> = label_of.iter().map(|&l| sizes[l] as f64).collect();
    let mut intra = vec![0.0; num_classes];
    let mut inter = vec![vec![0.0; num_classes]; num_classes];
    let mut intra_total = 0.0;
    let mut inter_total = 0.0;
    for a in 0..num_classes {
        let na = canon_size[a];
        let mean = sums[a * num_classes + a] * 2.0 / (na * (na - 1.0));
        intra[label_of[a]] = mean;
        intra_total += mean;
        for b in a + 1..num_classes {
            let mean = sums[a * num_classes + b] / (na * canon_size[b]);
            inter[label_of[a]][label_of[b]] = mean;
            inter[label_of[b]][label_of[a]] = mean;
            inter_total += mean;
        }
    }
    let l = num_classes as f64;
    let value = (intra_total / l - 2.0 * inter_total / (l * (l - 1.0))) / (d_eff as f64).sqrt();
    Ok(GdvResult { gdv: value, intra, inter, d_eff, dropped_dims: data.dims() - d_eff })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[&[f64]], labels: &[usize], classes: usize) -> LabeledPointSet {
        LabeledPointSet::new(Matrix::from_rows(rows), labels.to_vec(), classes).unwrap()
    }

    #[test]
    fn zscore_matches_direct_evaluation() {
        // mean 5.5, population std sqrt(25.25)
        let m = Matrix::from_rows(&[[0.0], [1.0], [10.0], [11.0]]);
        let (s, kept) = zscore_half(&m).unwrap();
        assert_eq!(kept, [0]);
        let sd = 25.25f64.sqrt();
        let expected = [-5.5 / sd / 2.0, -4.5 / sd / 2.0, 4.5 / sd / 2.0, 5.5 / sd / 2.0];
        for (got, want) in s.column(0).iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((s[(0, 0)] + 0.5473).abs() < 1e-4);
        assert!((s[(1, 0)] + 0.4478).abs() < 1e-4);
    }

    #[test]
    fn zscore_contract_on_random_columns() {
        let rows: Vec<[f64; 3]> =
            (0..37).map(|i| [(i as f64 * 0.7).sin() * 40.0, i as f64 * 1e-3 + 5.0, ((i * i) % 11) as f64]).collect();
        let (s, _) = zscore_half(&Matrix::from_rows(&rows)).unwrap();
        for j in 0..3 {
            let col = s.column(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let std = (col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / col.len() as f64).sqrt();
            assert!(mean.abs() < 1e-12);
            assert!((std - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn already_scaled_dimension_is_a_fixed_point() {
        let m = Matrix::from_rows(&[[-0.5], [0.5], [-0.5], [0.5]]);
        let (s, _) = zscore_half(&m).unwrap();
        assert_eq!(s.column(0), [-0.5, 0.5, -0.5, 0.5]);
    }

    #[test]
    fn constant_dimensions_are_dropped() {
        let base = set(&[&[0.0], &[1.0], &[10.0], &[11.0]], &[0, 0, 1, 1], 2);
        let with_const = set(&[&[0.0, 3.0], &[1.0, 3.0], &[10.0, 3.0], &[11.0, 3.0]], &[0, 0, 1, 1], 2);
        let a = gdv(&base).unwrap();
        let b = gdv(&with_const).unwrap();
        assert_eq!(b.d_eff, 1);
        assert_eq!(b.dropped_dims, 1);
        assert_eq!(a.gdv, b.gdv);
        assert!(matches!(
            zscore_half(&Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0]])),
            Err(GeometryError::AllDimensionsConstant)
        ));
    }

    #[test]
    fn two_point_classes_in_one_dimension() {
        let r = gdv(&set(&[&[0.0], &[1.0], &[10.0], &[11.0]], &[0, 0, 1, 1], 2)).unwrap();
        assert!((r.gdv + 0.8956).abs() < 1e-4, "{}", r.gdv);
        assert!((r.intra[0] - 0.0995).abs() < 1e-4);
        assert!((r.inter[0][1] - 0.9951).abs() < 1e-4);
        assert_eq!(r.inter[0][1], r.inter[1][0]);
    }

    #[test]
    fn singleton_class_is_an_error() {
        let s = set(&[&[0.0], &[1.0], &[5.0]], &[0, 0, 1], 2);
        assert_eq!(gdv(&s).unwrap_err(), GeometryError::UndefinedIntraClass { class: 1, size: 1 });
    }

    #[test]
    fn point_set_validation() {
        let m = Matrix::from_rows(&[[0.0], [1.0]]);
        assert!(matches!(LabeledPointSet::new(m.clone(), vec![0, 2], 2), Err(GeometryError::LabelOutOfRange { .. })));
        assert!(matches!(LabeledPointSet::new(m.clone(), vec![0, 0], 2), Err(GeometryError::EmptyClass(1))));
        assert!(matches!(LabeledPointSet::new(m, vec![0], 2), Err(GeometryError::LabelCount { .. })));
        let nan = Matrix::from_rows(&[[0.0], [f64::NAN]]);
        assert!(matches!(LabeledPointSet::new(nan, vec![0, 1], 2), Err(GeometryError::NonFinite)));
    }

    #[test]
    fn separation_sweep_is_monotone() {
        let mut last = f64::INFINITY;
        for step in 0..20 {
            let shift = step as f64 * 0.5;
            let rows: Vec<[f64; 2]> = (0..10)
                .map(|i| {
                    let a = i as f64 * 0.9;
                    let p = [a.cos(), a.sin()];
                    if i < 5 { p } else { [p[0] + shift, p[1]] }
                })
                .collect();
            let labels: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
            let r = gdv(&LabeledPointSet::new(Matrix::from_rows(&rows), labels, 2).unwrap()).unwrap();
            assert!(r.gdv < last, "step {step}: {} !< {last}", r.gdv);
            last = r.gdv;
        }
    }
}
