//! `.emb` layout, all integers little-endian:
//!
//! ```text
//! "EMB1" | version u32 = 1 | dim u32 | count u64
//! count x (id_len u16 | id UTF-8 bytes)
//! count * dim x f32, row-major
//! ```

use std::path::Path;

use super::EmbeddingMatrix;
use crate::binio::{read_file, ByteReader, ByteWriter};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"EMB1";
const VERSION: u32 = 1;
const HEADER_LEN: u64 = 4 + 4 + 4 + 8;

pub fn save_matrix(m: &EmbeddingMatrix, path: &Path) -> Result<()> {
    encode(m)?.write_to(path)
}

pub fn load_matrix(path: &Path) -> Result<EmbeddingMatrix> {
    decode(&read_file(path)?)
}

/// Exact size in bytes of the `.emb` file for `ids` at `dim`.
pub fn matrix_file_size<S: AsRef<str>>(ids: &[S], dim: usize) -> u64 {
    let id_table: u64 = ids.iter().map(|id| 2 + id.as_ref().len() as u64).sum();
    HEADER_LEN + id_table + (ids.len() * dim * 4) as u64
}

fn encode(m: &EmbeddingMatrix) -> Result<ByteWriter> {
    let mut w = ByteWriter::new();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u32(u32::try_from(m.dim()).map_err(|_| Error::input("dim does not fit in u32"))?);
    w.u64(m.len() as u64);
    for id in m.ids() {
        w.short_str(id)?;
    }
    w.f32s(m.as_slice());
    Ok(w)
}

pub(crate) fn decode(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    let mut r = ByteReader::new(bytes, "embedding file");
    r.magic(MAGIC)?;
    r.version(VERSION)?;
    let dim = r.u32()? as usize;
    let count = usize::try_from(r.u64()?).map_err(|_| Error::format("count overflow"))?;
    // Every id costs at least two bytes; reject absurd counts before allocating.
    if count > bytes.len() / 2 {
        return Err(Error::format(
            "embedding file truncated: count exceeds file size",
        ));
    }
    let ids = (0..count)
        .map(|_| r.short_str())
        .collect::<Result<Vec<_>>>()?;
    let values = r.f32s(
        count
            .checked_mul(dim)
            .ok_or_else(|| Error::format("size overflow"))?,
    )?;
    r.finish()?;
    EmbeddingMatrix::new(ids, dim, values)
        .map_err(|e| Error::format(format!("embedding file content invalid: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, dim: usize) -> EmbeddingMatrix {
        let mut data = vec![0.0; n * dim];
        for i in 0..n {
            data[i * dim + i % dim] = 1.0;
        }
        EmbeddingMatrix::new((0..n).map(|i| format!("id{i}")).collect(), dim, data).unwrap()
    }

    #[test]
    fn round_trip_small() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.emb");
        let m = basis(3, 8);
        save_matrix(&m, &path).unwrap();
        assert_eq!(load_matrix(&path).unwrap(), m);
        assert_eq!(
            std::fs::metadata(&path).unwrap().len(),
            matrix_file_size(m.ids(), 8)
        );
    }

    #[test]
    fn wrong_magic() {
        let mut bytes = encode(&basis(3, 8)).unwrap().into_inner();
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn wrong_version() {
        let mut bytes = encode(&basis(3, 8)).unwrap().into_inner();
        bytes[4] = 2;
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn truncated() {
        let bytes = encode(&basis(3, 8)).unwrap().into_inner();
        for cut in [0, 3, 10, 21, bytes.len() - 1] {
            assert!(
                matches!(decode(&bytes[..cut]), Err(Error::Format(_))),
                "cut at {cut}"
            );
        }
    }
}
