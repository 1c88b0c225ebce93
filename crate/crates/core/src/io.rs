//! RSAM binary activation files and JSON layer manifests.
//!
//! RSAM layout (little-endian): magic `RSAM`, u16 version = 1, u8 dtype
//! (1 = f32, 2 = f64), u8 ndim (2 or 4), ndim x u64 extents, then the
//! payload row-major (frames-major). f32 payloads are widened to f64 on
//! read; writes default to f64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ActivationSet, ActivationTensor, DataMatrix};

const MAGIC: [u8; 4] = *b"RSAM";
const VERSION: u16 = 1;

/// On-disk element type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::F32 => 1,
            Dtype::F64 => 2,
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Dtype::F32),
            2 => Ok(Dtype::F64),
            other => Err(Error::Format(format!("unknown dtype code {other}"))),
        }
    }
}

fn write_payload<W: Write>(w: &mut W, values: &[f64], dtype: Dtype) -> Result<()> {
    match dtype {
        Dtype::F64 => {
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Dtype::F32 => {
            for v in values {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn write_rsam(path: &Path, extents: &[u64], values: &[f64], dtype: Dtype) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[dtype.code(), extents.len() as u8])?;
    for e in extents {
        w.write_all(&e.to_le_bytes())?;
    }
    write_payload(&mut w, values, dtype)?;
    w.flush()?;
    Ok(())
}

struct RsamHeader {
    dtype: Dtype,
    extents: Vec<u64>,
}

fn read_header<R: Read>(r: &mut R) -> Result<RsamHeader> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for RSAM magic".into()))?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:02x?}, expected {MAGIC:02x?} (\"RSAM\")"
        )));
    }
    let mut buf2 = [0u8; 2];
    r.read_exact(&mut buf2)
        .map_err(|_| Error::Format("truncated RSAM header".into()))?;
    let version = u16::from_le_bytes(buf2);
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported RSAM version {version}, expected {VERSION}"
        )));
    }
    let mut buf2 = [0u8; 2];
    r.read_exact(&mut buf2)
        .map_err(|_| Error::Format("truncated RSAM header".into()))?;
    let dtype = Dtype::from_code(buf2[0])?;
    let ndim = buf2[1];
    if ndim != 2 && ndim != 4 {
        return Err(Error::Format(format!("ndim must be 2 or 4, got {ndim}")));
    }
    let mut extents = Vec::with_capacity(ndim as usize);
    for _ in 0..ndim {
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)
            .map_err(|_| Error::Format("truncated RSAM extents".into()))?;
        extents.push(u64::from_le_bytes(buf8));
    }
    Ok(RsamHeader { dtype, extents })
}

fn read_values<R: Read>(r: &mut R, header: &RsamHeader) -> Result<Vec<f64>> {
    let count = header
        .extents
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e as usize))
        .ok_or_else(|| Error::Format("extent product overflows".into()))?;
    let expected = count
        .checked_mul(header.dtype.size())
        .ok_or_else(|| Error::Format("payload size overflows".into()))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let values: Vec<f64> = match header.dtype {
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
    };
    if let Some((idx, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Format(format!(
            "non-finite payload value {v} at flat index {idx}"
        )));
    }
    Ok(values)
}

/// Write a 2-D activation matrix as f64.
pub fn write_matrix(path: impl AsRef<Path>, m: &DataMatrix) -> Result<()> {
    write_matrix_with_dtype(path, m, Dtype::F64)
}

/// Write a 2-D activation matrix with an explicit element type (f32 narrows).
pub fn write_matrix_with_dtype(
    path: impl AsRef<Path>,
    m: &DataMatrix,
    dtype: Dtype,
) -> Result<()> {
    let extents = [m.n_obs() as u64, m.n_feat() as u64];
    let values = m.values().as_slice().expect("standard layout");
    write_rsam(path.as_ref(), &extents, values, dtype)
}

/// Read a 2-D RSAM file.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let file = File::open(path.as_ref())?;
    let mut r = BufReader::new(file);
    let header = read_header(&mut r)?;
    if header.extents.len() != 2 {
        return Err(Error::Format(format!(
            "expected a 2-D matrix, file holds {}-D data",
            header.extents.len()
        )));
    }
    let values = read_values(&mut r, &header)?;
    let (rows, cols) = (header.extents[0] as usize, header.extents[1] as usize);
    if rows < 1 || cols < 1 {
        return Err(Error::Format(format!("zero extent in {rows}x{cols} matrix")));
    }
    let arr = Array2::from_shape_vec((rows, cols), values).expect("length checked");
    DataMatrix::new(arr).map_err(|e| Error::Format(e.to_string()))
}

/// Write a 4-D activation tensor as f64.
pub fn write_tensor(path: impl AsRef<Path>, t: &ActivationTensor) -> Result<()> {
    let extents: Vec<u64> = t.dims().iter().map(|&e| e as u64).collect();
    let values = t.values().as_slice().expect("standard layout");
    write_rsam(path.as_ref(), &extents, values, Dtype::F64)
}

/// Read a 4-D RSAM file.
pub fn read_tensor(path: impl AsRef<Path>) -> Result<ActivationTensor> {
    let file = File::open(path.as_ref())?;
    let mut r = BufReader::new(file);
    let header = read_header(&mut r)?;
    if header.extents.len() != 4 {
        return Err(Error::Format(format!(
            "expected a 4-D tensor, file holds {}-D data",
            header.extents.len()
        )));
    }
    let values = read_values(&mut r, &header)?;
    let dims: Vec<usize> = header.extents.iter().map(|&e| e as usize).collect();
    if dims.iter().any(|&d| d < 1) {
        return Err(Error::Format(format!("zero extent in tensor {dims:?}")));
    }
    let arr = Array4::from_shape_vec((dims[0], dims[1], dims[2], dims[3]), values)
        .expect("length checked");
    ActivationTensor::new(arr).map_err(|e| Error::Format(e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestLayer {
    name: String,
    path: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    probe_id: String,
    layers: Vec<ManifestLayer>,
}

/// Write a manifest listing layers in depth order. Paths are stored as given
/// (typically relative to the manifest's directory).
pub fn write_manifest(
    path: impl AsRef<Path>,
    probe_id: &str,
    layers: &[(String, String)],
) -> Result<()> {
    let doc = ManifestFile {
        probe_id: probe_id.to_string(),
        layers: layers
            .iter()
            .map(|(name, p)| ManifestLayer {
                name: name.clone(),
                path: p.clone(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Manifest(format!("serialize: {e}")))?;
    let mut f = BufWriter::new(File::create(path.as_ref())?);
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Load every layer listed in a manifest, in order. Relative layer paths are
/// resolved against the manifest's directory.
pub fn load_activation_set(manifest_path: impl AsRef<Path>) -> Result<ActivationSet> {
    let manifest_path = manifest_path.as_ref();
    let file = File::open(manifest_path).map_err(|e| {
        Error::Manifest(format!("cannot open {}: {e}", manifest_path.display()))
    })?;
    let doc: ManifestFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Manifest(format!("{}: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut layers = Vec::with_capacity(doc.layers.len());
    for layer in &doc.layers {
        let p = PathBuf::from(&layer.path);
        let full = if p.is_absolute() { p } else { base.join(p) };
        if !full.exists() {
            return Err(Error::Manifest(format!(
                "layer {:?}: missing file {}",
                layer.name,
                full.display()
            )));
        }
        let m = read_matrix(&full)?.with_label(&layer.name);
        layers.push((layer.name.clone(), m));
    }
    ActivationSet::new(doc.probe_id, layers)
}
