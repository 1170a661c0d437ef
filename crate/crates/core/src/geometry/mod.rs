//! Cluster geometry of labeled point clouds: the Generalized Discrimination
//! Value, Euclidean distance matrices, classical (Torgerson) MDS and exact
//! t-SNE.

mod distance;
mod eigen;
mod gdv;
mod mds;
mod tsne;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Matrix;

pub use distance::{pairwise_distances, squared_distances};
pub use eigen::{leading_eigenpairs, symmetric_eigen, SymmetricEigen};
pub use gdv::{gdv, zscore_half, GdvResult};
pub use mds::{classical_mds, MdsDiagnostics};
pub use tsne::{perplexity_calibration, tsne, Calibration, TsneConfig, TsneDiagnostics, TsneInit};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("class {0} has no points")]
    EmptyClass(usize),
    #[error("labels ({labels}) and points ({points}) disagree in count")]
    LabelCount { labels: usize, points: usize },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("every dimension is constant")]
    AllDimensionsConstant,
    #[error("class {class} has {size} point(s); mean intra-class distance needs at least 2")]
    UndefinedIntraClass { class: usize, size: usize },
    #[error("distance matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigensolver did not converge")]
    EigenFailure,
    #[error("perplexity {perplexity} must satisfy 1 < perplexity < N = {n}")]
    PerplexityTooHigh { perplexity: f64, n: usize },
    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// `N × D` points with one class label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointSet {
    points: Matrix,
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabeledPointSet {
    /// Validates shape, finiteness and that each of the `num_classes`
    /// classes has at least one point.
    pub fn new(points: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self, GeometryError> {
        if labels.len() != points.rows() {
            return Err(GeometryError::LabelCount { labels: labels.len(), points: points.rows() });
        }
        if points.rows() < 2 {
            return Err(GeometryError::TooFewPoints { needed: 2, got: points.rows() });
        }
        if !points.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(GeometryError::LabelOutOfRange { label, classes: num_classes });
        }
        let set = Self { points, labels, num_classes };
        if let Some(empty) = set.class_sizes().iter().position(|&n| n == 0) {
            return Err(GeometryError::EmptyClass(empty));
        }
        Ok(set)
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> usize {
        self.points.cols()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_classes];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    Mds,
    Tsne,
}

impl ProjectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionMethod::Mds => "mds",
            ProjectionMethod::Tsne => "tsne",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ProjectionDiagnostics {
    Mds(MdsDiagnostics),
    Tsne(TsneDiagnostics),
}

/// Low-dimensional coordinates (`N × k`, usually `k = 2`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub coords: Matrix,
    pub method: ProjectionMethod,
    pub diagnostics: ProjectionDiagnostics,
}
