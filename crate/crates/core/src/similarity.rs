//! Pairwise layer-similarity matrices and their CSV form.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{validate_label, ActivationSet};
use crate::metrics::Metric;
use crate::numfmt::g9;

/// Labeled grid of metric scores between two ordered layer sets.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    metric: Metric,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    scores: Array2<f64>,
}

impl SimilarityMatrix {
    pub fn new(
        metric: Metric,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        scores: Array2<f64>,
    ) -> Result<Self> {
        if scores.nrows() != row_labels.len() || scores.ncols() != col_labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} scores with {} row labels and {} column labels",
                scores.nrows(),
                scores.ncols(),
                row_labels.len(),
                col_labels.len()
            )));
        }
        for l in row_labels.iter().chain(col_labels.iter()) {
            validate_label(l)?;
        }
        Ok(Self {
            metric,
            row_labels,
            col_labels,
            scores,
        })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }

    pub fn n_rows(&self) -> usize {
        self.scores.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.scores.ncols()
    }

    /// CSV form: header `metric=<id>` then column labels; one row per layer,
    /// scores with 9 significant digits, NaN spelled `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("metric=");
        out.push_str(self.metric.id());
        for c in &self.col_labels {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (i, r) in self.row_labels.iter().enumerate() {
            out.push_str(r);
            for j in 0..self.scores.ncols() {
                out.push(',');
                out.push_str(&g9(self.scores[[i, j]]));
            }
            out.push('\n');
        }
        out
    }

    /// Parse the CSV form back.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty similarity CSV".into()))?;
        let mut cells = header.split(',');
        let first = cells.next().unwrap_or_default();
        let metric_id = first
            .strip_prefix("metric=")
            .ok_or_else(|| Error::Format(format!("first header cell {first:?} is not metric=<id>")))?;
        let metric: Metric = metric_id.parse()?;
        let col_labels: Vec<String> = cells.map(str::to_string).collect();
        if col_labels.is_empty() {
            return Err(Error::Format("similarity CSV has no columns".into()));
        }
        let mut row_labels = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut cells = line.split(',');
            row_labels.push(cells.next().unwrap_or_default().to_string());
            let row: Vec<f64> = cells
                .map(|c| {
                    c.parse::<f64>().map_err(|_| {
                        Error::Format(format!("bad score {c:?} on data row {}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != col_labels.len() {
                return Err(Error::Format(format!(
                    "data row {} has {} scores, expected {}",
                    lineno + 1,
                    row.len(),
                    col_labels.len()
                )));
            }
            values.extend(row);
        }
        if row_labels.is_empty() {
            return Err(Error::Format("similarity CSV has no data rows".into()));
        }
        let scores = Array2::from_shape_vec((row_labels.len(), col_labels.len()), values)
            .expect("row lengths already checked");
        Self::new(metric, row_labels, col_labels, scores)
    }
}

/// A similarity matrix plus the number of cells where the metric was
/// undefined (recorded as NaN rather than aborting the whole grid).
#[derive(Debug, Clone)]
pub struct PairwiseOutcome {
    pub matrix: SimilarityMatrix,
    pub degenerate_cells: usize,
}

/// Score every layer of `a` against every layer of `b`. Cells are pure and
/// independent; evaluation may be parallel but the result is identical to
/// sequential evaluation.
pub fn pairwise_similarity(
    a: &ActivationSet,
    b: &ActivationSet,
    metric: Metric,
) -> Result<PairwiseOutcome> {
    if a.n_obs() != b.n_obs() {
        return Err(Error::ShapeMismatch(format!(
            "probe sizes differ: {} observations vs {}",
            a.n_obs(),
            b.n_obs()
        )));
    }
    let (la, lb) = (a.len(), b.len());
    let cells: Vec<f64> = (0..la * lb)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / lb, k % lb);
            match metric.compute(&a.layers()[i].1, &b.layers()[j].1) {
                Ok(v) => Ok(v),
                Err(Error::DegenerateInput(_)) => Ok(f64::NAN),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let degenerate_cells = cells.iter().filter(|v| v.is_nan()).count();
    let scores = Array2::from_shape_vec((la, lb), cells).expect("cell count matches grid");
    let matrix = SimilarityMatrix::new(metric, a.names(), b.names(), scores)?;
    Ok(PairwiseOutcome {
        matrix,
        degenerate_cells,
    })
}
