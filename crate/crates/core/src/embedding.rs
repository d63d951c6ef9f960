//! Sentence-group embeddings and the `BOSE` binary matrix format.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                 |
//! |--------|------|-----------------------|
//! | 0      | 4    | magic `b"BOSE"`       |
//! | 4      | 4    | format version, u32=1 |
//! | 8      | 8    | row count, u64        |
//! | 16     | 4    | dimension, u32        |
//! | 20     | ...  | rows × dim f32, row-major |

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"BOSE";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

/// Dense row-major `f32` matrix as stored on disk. Only finiteness is
/// enforced; see [`EmbeddingMatrix`] for the stricter embedding contract.
#[derive(Debug, Clone, PartialEq)]
pub struct F32Matrix {
    n_rows: usize,
    dim: usize,
    data: Vec<f32>,
}

impl F32Matrix {
    pub fn new(data: Vec<f32>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Format("dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { left: data.len(), right: dim });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: pos / dim, col: pos % dim });
        }
        Ok(Self { n_rows: data.len() / dim, dim, data })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R], dim: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { left: row.len(), right: dim });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, dim)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * 4);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_rows as u64).to_le_bytes());
        out.extend_from_slice(&u32::try_from(self.dim).expect("dimension fits u32").to_le_bytes());
        for x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("file is {} bytes, shorter than the {HEADER_LEN}-byte header", bytes.len())));
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", &bytes[0..4])));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {version}")));
        }
        let n_rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let dim = u32::from_le_bytes(bytes[16..20].try_into().unwrap());
        if dim == 0 {
            return Err(Error::Format("dimension must be positive".into()));
        }
        let payload = (bytes.len() - HEADER_LEN) as u64;
        let expected = n_rows
            .checked_mul(u64::from(dim))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format(format!("{n_rows} × {dim} overflows")))?;
        if expected != payload {
            return Err(Error::Truncated { expected, actual: payload });
        }
        let data = bytes[HEADER_LEN..].chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
        Self::new(data, dim as usize)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// One embedding per sentence group: finite entries and no all-zero row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix(F32Matrix);

impl EmbeddingMatrix {
    pub fn new(data: Vec<f32>, dim: usize) -> Result<Self> {
        Self::try_from(F32Matrix::new(data, dim)?)
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R], dim: usize) -> Result<Self> {
        Self::try_from(F32Matrix::from_rows(rows, dim)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::try_from(F32Matrix::from_bytes(bytes)?)
    }

    pub fn matrix(&self) -> &F32Matrix {
        &self.0
    }

    pub fn n_rows(&self) -> usize {
        self.0.n_rows
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        self.0.row(i)
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.0.rows()
    }

    /// Scales every row to unit L2 norm.
    pub fn unit_normalize(&self) -> Self {
        let mut data = self.0.data.clone();
        for row in data.chunks_exact_mut(self.0.dim) {
            let norm = l2_norm(row);
            for x in row.iter_mut() {
                *x = (f64::from(*x) / norm) as f32;
            }
        }
        // Rows were nonzero before and stay so.
        Self(F32Matrix { data, ..self.0 })
    }
}

impl TryFrom<F32Matrix> for EmbeddingMatrix {
    type Error = Error;

    fn try_from(m: F32Matrix) -> Result<Self> {
        if let Some(i) = m.rows().position(|row| row.iter().all(|&x| x == 0.0)) {
            return Err(Error::ZeroRow(i));
        }
        Ok(Self(m))
    }
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    EmbeddingMatrix::try_from(F32Matrix::read(path)?)
}

pub fn write_embeddings(matrix: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    matrix.0.write(path)
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

pub(crate) fn l2_norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let (na, nb) = (l2_norm(a), l2_norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample() -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(&[[1.0f32, 2.0, 3.0, 4.0], [-0.5, 0.0, 1e-30, 7.25], [f32::MIN_POSITIVE, 0.0, 0.0, -3.0]], 4)
            .unwrap()
    }

    #[test]
    fn file_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bose");
        let m = sample();
        write_embeddings(&m, &path).unwrap();
        let back = read_embeddings(&path).unwrap();
        let bits = |m: &EmbeddingMatrix| m.matrix().as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&m), bits(&back));
        assert_eq!(back.n_rows(), 3);
        assert_eq!(std::fs::read(&path).unwrap().len(), HEADER_LEN + 48);
    }

    #[test]
    fn truncated_mid_row() {
        let bytes = sample().matrix().to_bytes();
        let cut = &bytes[..bytes.len() - 6];
        assert!(matches!(EmbeddingMatrix::from_bytes(cut), Err(Error::Truncated { expected: 48, actual: 42 })));
    }

    #[test]
    fn bad_magic() {
        let mut bytes = sample().matrix().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(EmbeddingMatrix::from_bytes(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn zero_row_rejected_on_read() {
        let raw = F32Matrix::from_rows(&[[1.0f32, 0.0], [0.0, 0.0]], 2).unwrap();
        assert!(matches!(EmbeddingMatrix::from_bytes(&raw.to_bytes()), Err(Error::ZeroRow(1))));
    }

    #[test]
    fn non_finite_rejected() {
        let mut bytes = sample().matrix().to_bytes();
        bytes[HEADER_LEN + 4..HEADER_LEN + 8].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(EmbeddingMatrix::from_bytes(&bytes), Err(Error::NonFinite { row: 0, col: 1 })));
    }

    #[test]
    fn cosine_examples() {
        let v = [0.3f32, -1.2, 5.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[2.0, 2.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(cosine(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 2.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn normalize_examples() {
        let m = EmbeddingMatrix::from_rows(&[[3.0f32, 4.0], [0.6, 0.8]], 2).unwrap();
        let n = m.unit_normalize();
        assert_eq!(n.row(0), &[0.6, 0.8]);
        for (a, b) in n.row(1).iter().zip(m.row(1)) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn normalized_dot_matches_raw_cosine() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data: Vec<f32> = (0..80).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        let raw = EmbeddingMatrix::new(data, 8).unwrap();
        let unit = raw.unit_normalize();
        for i in 0..10 {
            assert!((l2_norm(unit.row(i)) - 1.0).abs() < 1e-6);
            for j in 0..10 {
                let direct = cosine(raw.row(i), raw.row(j)).unwrap();
                let via_dot = dot(unit.row(i), unit.row(j));
                assert!((direct - via_dot).abs() < 1e-6, "{i},{j}: {direct} vs {via_dot}");
            }
        }
    }

    fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f32>> {
        prop::collection::vec(-10.0f32..10.0, dim).prop_filter("nonzero", |v| l2_norm(v) > 1e-3)
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric((a, b) in (1usize..16).prop_flat_map(|d| (nonzero_vec(d), nonzero_vec(d)))) {
            prop_assert_eq!(cosine(&a, &b).unwrap().to_bits(), cosine(&b, &a).unwrap().to_bits());
        }

        #[test]
        fn cosine_is_scale_invariant(
            (a, b) in (1usize..16).prop_flat_map(|d| (nonzero_vec(d), nonzero_vec(d))),
            c in 0.01f32..100.0,
        ) {
            let scaled: Vec<f32> = b.iter().map(|x| x * c).collect();
            prop_assert!((cosine(&a, &b).unwrap() - cosine(&a, &scaled).unwrap()).abs() < 1e-6);
        }

        #[test]
        fn bytes_round_trip(data in prop::collection::vec(any::<f32>().prop_filter("finite", |x| x.is_finite()), 0..64), dim in 1usize..8) {
            let len = data.len() / dim * dim;
            let m = F32Matrix::new(data[..len].to_vec(), dim).unwrap();
            let back = F32Matrix::from_bytes(&m.to_bytes()).unwrap();
            prop_assert_eq!(back.to_bytes(), m.to_bytes());
        }
    }
}
