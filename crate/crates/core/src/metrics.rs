//! Trace-statistic similarity metrics between activation matrices.
//!
//! For X (n x p) and Y (n x q) with Gram matrices XX' and YY', the metrics
//! are ratios of Gram inner products:
//!
//! ```text
//! rv(X, Y)  = tr(XX'YY') / sqrt(tr[(XX')^2] tr[(YY')^2])
//! rv2(X, Y) = rv with the Gram diagonals deleted from every inner product
//! linear_cka(X, Y) = rv(center_columns(X), center_columns(Y))
//! ```
//!
//! Two evaluation routes are provided. The feature-space route uses the
//! identities tr(XX'YY') = ||X'Y||_F^2, tr[(XX')^2] = ||X'X||_F^2 and
//! (XX')_ii = ||x_i||^2, costing O(n p q) without materializing the n x n
//! Grams. The Gram-space route streams row blocks of the Grams and costs
//! O(n^2 (p + q)). Both accumulate with pairwise summation.

use ndarray::{s, Array1, Array2};
use rayon::prelude::*;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{center_columns, DataMatrix};
use crate::sum::{pairwise_by, pairwise_dot, pairwise_sum_sq};

/// Evaluation route for [`cross_gram_stats`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsPath {
    /// Feature space iff n_obs > max(p, q), else Gram space.
    Auto,
    FeatureSpace,
    GramSpace,
}

/// The six trace statistics every metric is assembled from.
///
/// `t_cross` = tr(XX'YY'), `d_diag` = sum_i (XX')_ii (YY')_ii,
/// `sxx` = tr[(XX')^2], `dxx` = sum_i (XX')_ii^2, and likewise for Y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossStats {
    pub t_cross: f64,
    pub d_diag: f64,
    pub sxx: f64,
    pub dxx: f64,
    pub syy: f64,
    pub dyy: f64,
}

impl CrossStats {
    fn swapped(self) -> Self {
        Self {
            t_cross: self.t_cross,
            d_diag: self.d_diag,
            sxx: self.syy,
            dxx: self.dyy,
            syy: self.sxx,
            dyy: self.dxx,
        }
    }
}

/// Deterministic total order on matrix contents, used to canonicalize the
/// operand order so every metric is exactly symmetric in its arguments.
fn should_swap(x: &DataMatrix, y: &DataMatrix) -> bool {
    if x.n_feat() != y.n_feat() {
        return x.n_feat() > y.n_feat();
    }
    for (a, b) in x.values().iter().zip(y.values().iter()) {
        if a.to_bits() != b.to_bits() {
            return a.to_bits() > b.to_bits();
        }
    }
    false
}

fn check_rows(x: &DataMatrix, y: &DataMatrix) -> Result<()> {
    if x.n_obs() != y.n_obs() {
        return Err(Error::ShapeMismatch(format!(
            "x has {} observations, y has {} observations",
            x.n_obs(),
            y.n_obs()
        )));
    }
    Ok(())
}

/// Squared row norms, one per observation.
fn row_norms_sq(m: &Array2<f64>) -> Array1<f64> {
    let p = m.ncols();
    Array1::from_iter(
        m.rows()
            .into_iter()
            .map(|r| pairwise_by(0, p, |j| r[j] * r[j])),
    )
}

fn frob_sq(m: &Array2<f64>) -> f64 {
    // dot() may hand back a transposed-layout result; normalize first.
    let std = m.as_standard_layout();
    pairwise_sum_sq(std.as_slice().expect("standard layout"))
}

fn feature_space_stats(x: &Array2<f64>, y: &Array2<f64>) -> CrossStats {
    let ((xty, xtx), yty) = rayon::join(
        || rayon::join(|| x.t().dot(y), || x.t().dot(x)),
        || y.t().dot(y),
    );
    let rx = row_norms_sq(x);
    let ry = row_norms_sq(y);
    let n = rx.len();
    CrossStats {
        t_cross: frob_sq(&xty),
        d_diag: pairwise_by(0, n, |i| rx[i] * ry[i]),
        sxx: frob_sq(&xtx),
        dxx: pairwise_by(0, n, |i| rx[i] * rx[i]),
        syy: frob_sq(&yty),
        dyy: pairwise_by(0, n, |i| ry[i] * ry[i]),
    }
}

const GRAM_TILE: usize = 128;

#[derive(Debug, Default, Clone, Copy)]
struct TileStats {
    cross: f64,
    sxx: f64,
    syy: f64,
    d_diag: f64,
    dxx: f64,
    dyy: f64,
}

/// Stream row tiles of XX' and YY'; never materializes the full Grams.
fn gram_space_stats(x: &Array2<f64>, y: &Array2<f64>) -> CrossStats {
    let n = x.nrows();
    let n_tiles = n.div_ceil(GRAM_TILE);
    let partials: Vec<TileStats> = (0..n_tiles)
        .into_par_iter()
        .map(|t| {
            let r0 = t * GRAM_TILE;
            let r1 = (r0 + GRAM_TILE).min(n);
            let gx = x.slice(s![r0..r1, ..]).dot(&x.t());
            let gy = y.slice(s![r0..r1, ..]).dot(&y.t());
            let gx = gx.as_standard_layout();
            let gy = gy.as_standard_layout();
            let gxs = gx.as_slice().expect("standard layout");
            let gys = gy.as_slice().expect("standard layout");
            let rows = r1 - r0;
            TileStats {
                cross: pairwise_dot(gxs, gys),
                sxx: pairwise_sum_sq(gxs),
                syy: pairwise_sum_sq(gys),
                d_diag: pairwise_by(0, rows, |i| gx[[i, r0 + i]] * gy[[i, r0 + i]]),
                dxx: pairwise_by(0, rows, |i| gx[[i, r0 + i]] * gx[[i, r0 + i]]),
                dyy: pairwise_by(0, rows, |i| gy[[i, r0 + i]] * gy[[i, r0 + i]]),
            }
        })
        .collect();
    let k = partials.len();
    CrossStats {
        t_cross: pairwise_by(0, k, |i| partials[i].cross),
        d_diag: pairwise_by(0, k, |i| partials[i].d_diag),
        sxx: pairwise_by(0, k, |i| partials[i].sxx),
        dxx: pairwise_by(0, k, |i| partials[i].dxx),
        syy: pairwise_by(0, k, |i| partials[i].syy),
        dyy: pairwise_by(0, k, |i| partials[i].dyy),
    }
}

/// Compute all six trace statistics for a pair of activation matrices.
pub fn cross_gram_stats(x: &DataMatrix, y: &DataMatrix, path: StatsPath) -> Result<CrossStats> {
    check_rows(x, y)?;
    let swap = should_swap(x, y);
    let (a, b) = if swap { (y, x) } else { (x, y) };
    let use_feature = match path {
        StatsPath::FeatureSpace => true,
        StatsPath::GramSpace => false,
        StatsPath::Auto => a.n_obs() > a.n_feat().max(b.n_feat()),
    };
    let stats = if use_feature {
        feature_space_stats(a.values(), b.values())
    } else {
        gram_space_stats(a.values(), b.values())
    };
    Ok(if swap { stats.swapped() } else { stats })
}

/// RV coefficient: tr(XX'YY') / sqrt(tr[(XX')^2] tr[(YY')^2]), in [0, 1].
pub fn rv(x: &DataMatrix, y: &DataMatrix) -> Result<f64> {
    let s = cross_gram_stats(x, y, StatsPath::Auto)?;
    if s.sxx == 0.0 || s.syy == 0.0 {
        return Err(Error::DegenerateInput(
            "rv is undefined for an all-zero matrix".into(),
        ));
    }
    Ok(s.t_cross / (s.sxx * s.syy).sqrt())
}

/// Modified RV coefficient: the Gram diagonals are deleted from every inner
/// product, removing the small-sample bias that drives rv toward 1. In [-1, 1].
pub fn rv2(x: &DataMatrix, y: &DataMatrix) -> Result<f64> {
    let s = cross_gram_stats(x, y, StatsPath::Auto)?;
    let off_x = s.sxx - s.dxx;
    let off_y = s.syy - s.dyy;
    // Mathematically off_* >= 0; a non-positive value means the off-diagonal
    // Gram mass is zero (mutually orthogonal observations): undefined, not 0.
    if off_x <= 0.0 || off_y <= 0.0 {
        return Err(Error::DegenerateInput(
            "rv2 is undefined when a Gram matrix has an all-zero off-diagonal \
             (mutually orthogonal observations)"
                .into(),
        ));
    }
    Ok((s.t_cross - s.d_diag) / (off_x * off_y).sqrt())
}

/// Linear CKA, implemented as rv on column-centered inputs (the two coincide
/// for the linear kernel).
pub fn linear_cka(x: &DataMatrix, y: &DataMatrix) -> Result<f64> {
    check_rows(x, y)?;
    let cx = center_columns(x);
    let cy = center_columns(y);
    rv(&cx, &cy).map_err(|e| match e {
        Error::DegenerateInput(_) => Error::DegenerateInput(
            "linear_cka is undefined when column centering yields an all-zero matrix".into(),
        ),
        other => other,
    })
}

/// Metric identifier used across the similarity-matrix and CLI surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rv,
    Rv2,
    LinearCka,
}

impl Metric {
    pub fn id(self) -> &'static str {
        match self {
            Metric::Rv => "rv",
            Metric::Rv2 => "rv2",
            Metric::LinearCka => "linear_cka",
        }
    }

    pub fn compute(self, x: &DataMatrix, y: &DataMatrix) -> Result<f64> {
        match self {
            Metric::Rv => rv(x, y),
            Metric::Rv2 => rv2(x, y),
            Metric::LinearCka => linear_cka(x, y),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rv" => Ok(Metric::Rv),
            "rv2" => Ok(Metric::Rv2),
            "linear_cka" | "cka" => Ok(Metric::LinearCka),
            other => Err(Error::Config(format!(
                "unknown metric {other:?} (expected rv, rv2, or cka)"
            ))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}
