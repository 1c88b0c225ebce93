//! Activation data model: observation matrices, raw 4-D activation tensors,
//! and ordered per-layer collections, plus the preprocessing steps (column
//! centering, global average pooling, frame decimation).

use ndarray::{Array2, Array4, Axis};

use crate::error::{Error, Result};
use crate::sum::pairwise_by;

/// Dense n_obs x n_feat activation matrix. Rows are observations (frames),
/// columns are units. Entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
    label: Option<String>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() < 1 || values.ncols() < 1 {
            return Err(Error::InvalidData(format!(
                "matrix must have at least 1 row and 1 column, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some((idx, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite entry {v} at flat index {idx}"
            )));
        }
        Ok(Self { values, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_feat(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// Subtract the column mean from every column. Idempotent up to rounding;
/// used by linear CKA, which is defined on column-centered inputs.
pub fn center_columns(m: &DataMatrix) -> DataMatrix {
    let n = m.n_obs();
    let mut out = m.values().clone();
    for j in 0..m.n_feat() {
        let mean = pairwise_by(0, n, |i| m.values()[[i, j]]) / n as f64;
        out.column_mut(j).mapv_inplace(|v| v - mean);
    }
    DataMatrix {
        values: out,
        label: m.label.clone(),
    }
}

/// Raw per-layer activations, frames x channels x height x width. Dense
/// layers use height = width = 1. Stored as f64; file I/O may widen f32.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTensor {
    values: Array4<f64>,
}

impl ActivationTensor {
    pub fn new(values: Array4<f64>) -> Result<Self> {
        if values.shape().iter().any(|&e| e < 1) {
            return Err(Error::InvalidData(format!(
                "tensor extents must all be >= 1, got {:?}",
                values.shape()
            )));
        }
        if let Some((idx, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite entry {v} at flat index {idx}"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array4<f64> {
        &self.values
    }

    pub fn dims(&self) -> [usize; 4] {
        let s = self.values.shape();
        [s[0], s[1], s[2], s[3]]
    }
}

/// Reduce each feature map to its spatial mean: frames x channels out.
/// For height = width = 1 this is a reshape.
pub fn global_average_pool(t: &ActivationTensor) -> DataMatrix {
    let [frames, channels, h, w] = t.dims();
    let hw = (h * w) as f64;
    let mut out = Array2::<f64>::zeros((frames, channels));
    for f in 0..frames {
        for c in 0..channels {
            let map = t.values().index_axis(Axis(0), f);
            let map = map.index_axis(Axis(0), c);
            out[[f, c]] = pairwise_by(0, h * w, |k| map[[k / w, k % w]]) / hw;
        }
    }
    DataMatrix {
        values: out,
        label: None,
    }
}

/// Keep rows 0, factor, 2*factor, ... (stride sampling, not block averaging).
pub fn decimate(m: &DataMatrix, factor: usize) -> Result<DataMatrix> {
    if factor < 1 {
        return Err(Error::Config("decimation factor must be >= 1".into()));
    }
    let kept: Vec<usize> = (0..m.n_obs()).step_by(factor).collect();
    if kept.is_empty() {
        return Err(Error::EmptyResult("decimation kept no rows".into()));
    }
    let values = m.values().select(Axis(0), &kept);
    Ok(DataMatrix {
        values,
        label: m.label.clone(),
    })
}

/// Decimate the frame axis of a raw tensor; commutes with pooling.
pub fn decimate_frames(t: &ActivationTensor, factor: usize) -> Result<ActivationTensor> {
    if factor < 1 {
        return Err(Error::Config("decimation factor must be >= 1".into()));
    }
    let kept: Vec<usize> = (0..t.dims()[0]).step_by(factor).collect();
    if kept.is_empty() {
        return Err(Error::EmptyResult("decimation kept no frames".into()));
    }
    Ok(ActivationTensor {
        values: t.values().select(Axis(0), &kept),
    })
}

/// Ordered per-layer activations measured on one probe set. Layer names are
/// unique, depth-ordered, and safe for CSV/manifest emission; all matrices
/// share the same observation count.
#[derive(Debug, Clone)]
pub struct ActivationSet {
    probe_id: String,
    layers: Vec<(String, DataMatrix)>,
    n_obs: usize,
}

pub(crate) fn validate_label(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::Manifest("layer name must be non-empty".into()));
    }
    if name.contains([',', '"', '\n', '\r']) {
        return Err(Error::Manifest(format!(
            "layer name {name:?} contains characters not representable in CSV output"
        )));
    }
    Ok(())
}

impl ActivationSet {
    pub fn new(probe_id: impl Into<String>, layers: Vec<(String, DataMatrix)>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Manifest("activation set has no layers".into()));
        }
        let n_obs = layers[0].1.n_obs();
        for (name, m) in &layers {
            validate_label(name)?;
            if m.n_obs() != n_obs {
                return Err(Error::Manifest(format!(
                    "layer {name:?} has {} observations, expected {} (all layers must share one probe set)",
                    m.n_obs(),
                    n_obs
                )));
            }
        }
        for i in 1..layers.len() {
            if layers[..i].iter().any(|(n, _)| n == &layers[i].0) {
                return Err(Error::Manifest(format!(
                    "duplicate layer name {:?}",
                    layers[i].0
                )));
            }
        }
        Ok(Self {
            probe_id: probe_id.into(),
            layers,
            n_obs,
        })
    }

    pub fn probe_id(&self) -> &str {
        &self.probe_id
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layers(&self) -> &[(String, DataMatrix)] {
        &self.layers
    }

    pub fn names(&self) -> Vec<String> {
        self.layers.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&DataMatrix> {
        self.layers.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array4};

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            DataMatrix::new(array![[1.0, f64::NAN]]),
            Err(Error::InvalidData(_))
        ));
        assert!(matches!(
            DataMatrix::new(array![[1.0, f64::INFINITY]]),
            Err(Error::InvalidData(_))
        ));
        assert!(DataMatrix::new(Array2::<f64>::zeros((0, 3))).is_err());
        assert!(DataMatrix::new(Array2::<f64>::zeros((3, 0))).is_err());
    }

    #[test]
    fn center_columns_worked_example() {
        let m = DataMatrix::new(array![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let c = center_columns(&m);
        assert_eq!(c.values(), &array![[-1.0, -1.0], [1.0, 1.0]]);
    }

    #[test]
    fn center_columns_idempotent_and_zeroes_constant() {
        let m = DataMatrix::new(array![[5.0], [5.0], [5.0]]).unwrap();
        let c = center_columns(&m);
        assert_eq!(c.values(), &array![[0.0], [0.0], [0.0]]);

        // Exactly representable means center exactly; general means are
        // idempotent to within the centering tolerance.
        let m = DataMatrix::new(array![[1.0, -3.5], [2.0, 0.25], [3.0, 9.25], [6.0, 2.0]]).unwrap();
        let once = center_columns(&m);
        let twice = center_columns(&once);
        assert_eq!(once.values(), twice.values());

        let m = DataMatrix::new(array![[1.0, -3.5], [2.0, 0.25], [7.0, 9.0]]).unwrap();
        let once = center_columns(&m);
        let twice = center_columns(&once);
        let diff = (once.values() - twice.values())
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(diff <= 1e-12);
    }

    #[test]
    fn center_columns_sum_bound() {
        let m = DataMatrix::new(array![
            [1e9, -2e9],
            [3e9, 4e9],
            [-5e9, 6e9],
            [7e9, 8.5e9]
        ])
        .unwrap();
        let c = center_columns(&m);
        let max_abs = c.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for j in 0..2 {
            let s: f64 = c.values().column(j).sum();
            assert!(s.abs() <= 1e-9 * 4.0 * max_abs);
        }
    }

    #[test]
    fn pool_worked_example() {
        // frames=1, channels=2, 2x2 maps [[1,1],[1,1]] and [[0,2],[4,6]] -> [[1, 3]]
        let mut t = Array4::<f64>::zeros((1, 2, 2, 2));
        t.slice_mut(ndarray::s![0, 0, .., ..])
            .assign(&array![[1.0, 1.0], [1.0, 1.0]]);
        t.slice_mut(ndarray::s![0, 1, .., ..])
            .assign(&array![[0.0, 2.0], [4.0, 6.0]]);
        let t = ActivationTensor::new(t).unwrap();
        let m = global_average_pool(&t);
        assert_eq!(m.values(), &array![[1.0, 3.0]]);
    }

    #[test]
    fn pool_reshape_and_constant_cases() {
        let mut t = Array4::<f64>::zeros((3, 2, 1, 1));
        for f in 0..3 {
            for c in 0..2 {
                t[[f, c, 0, 0]] = (f * 2 + c) as f64;
            }
        }
        let m = global_average_pool(&ActivationTensor::new(t).unwrap());
        assert_eq!(m.values(), &array![[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]);

        let t = ActivationTensor::new(Array4::from_elem((2, 3, 4, 5), 7.0)).unwrap();
        let m = global_average_pool(&t);
        assert!(m.values().iter().all(|&v| v == 7.0));
        assert_eq!((m.n_obs(), m.n_feat()), (2, 3));
    }

    #[test]
    fn decimate_strides() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let m = DataMatrix::new(
            Array2::from_shape_vec((100, 1), rows.concat()).unwrap(),
        )
        .unwrap();
        let d = decimate(&m, 40).unwrap();
        assert_eq!(d.n_obs(), 3);
        assert_eq!(d.values(), &array![[0.0], [40.0], [80.0]]);

        let id = decimate(&m, 1).unwrap();
        assert_eq!(id.values(), m.values());

        assert!(matches!(decimate(&m, 0), Err(Error::Config(_))));
    }

    #[test]
    fn decimate_row_count_formula() {
        // ceil(943_280 / 40) = 23_582
        let n: usize = 943_280;
        let kept = (0..n).step_by(40).count();
        assert_eq!(kept, 23_582);
    }

    #[test]
    fn activation_set_invariants() {
        let a = DataMatrix::new(array![[1.0], [2.0]]).unwrap();
        let b = DataMatrix::new(array![[1.0], [2.0], [3.0]]).unwrap();
        assert!(matches!(
            ActivationSet::new("p", vec![("l1".into(), a.clone()), ("l2".into(), b)]),
            Err(Error::Manifest(_))
        ));
        assert!(matches!(
            ActivationSet::new("p", vec![("l1".into(), a.clone()), ("l1".into(), a.clone())]),
            Err(Error::Manifest(_))
        ));
        assert!(matches!(
            ActivationSet::new("p", vec![]),
            Err(Error::Manifest(_))
        ));
        assert!(matches!(
            ActivationSet::new("p", vec![("a,b".into(), a.clone())]),
            Err(Error::Manifest(_))
        ));
        let ok = ActivationSet::new("p", vec![("l1".into(), a.clone()), ("l2".into(), a)]).unwrap();
        assert_eq!(ok.n_obs(), 2);
        assert_eq!(ok.names(), vec!["l1", "l2"]);
    }
}
