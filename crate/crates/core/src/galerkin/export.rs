use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// JSON sidecar describing a raw dense matrix dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMetadata {
    pub rows: usize,
    pub cols: usize,
    pub kappa: f64,
    pub level: usize,
    pub dtype: String,
    pub order: String,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes row-major little-endian complex128 to `path` and metadata to
/// `path.json`.
pub fn write_dense(
    path: &Path,
    matrix: &CMatrix,
    kappa: f64,
    level: usize,
) -> Result<DenseMetadata> {
    let mut w = BufWriter::new(File::create(path)?);
    for z in matrix.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    let meta = DenseMetadata {
        rows: matrix.rows(),
        cols: matrix.cols(),
        kappa,
        level,
        dtype: "complex128".into(),
        order: "row-major little-endian".into(),
    };
    serde_json::to_writer_pretty(File::create(sidecar(path))?, &meta)?;
    Ok(meta)
}

pub fn read_dense(path: &Path) -> Result<(CMatrix, DenseMetadata)> {
    let meta: DenseMetadata = serde_json::from_reader(File::open(sidecar(path))?)?;
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() != meta.rows * meta.cols * 16 {
        return Err(Error::DimensionMismatch {
            expected: meta.rows * meta.cols * 16,
            got: bytes.len(),
        });
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    let data = bytes
        .chunks_exact(16)
        .map(|c| Complex64::new(f(&c[..8]), f(&c[8..])))
        .collect();
    Ok((CMatrix::from_vec(meta.rows, meta.cols, data)?, meta))
}
