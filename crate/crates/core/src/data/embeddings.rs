//! Precomputed embedding files for pretrained-feature tracks.
//!
//! Layout: the 7-byte magic `GLEMB1\n`, then little-endian `u32` N, `u32` dim,
//! `u32` C, then N rows of `dim` little-endian `f32`, then N label bytes.

use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::pool::Pool;
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 7] = b"GLEMB1\n";
const HEADER_LEN: usize = 7 + 12;

pub fn write_embeddings<T: Scalar, W: Write>(pool: &Pool<T>, mut out: W) -> Result<()> {
    if pool.num_classes() > 256 {
        return Err(Error::invalid("embedding files store labels in one byte (C <= 256)"));
    }
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(pool.len() as u32)?;
    out.write_u32::<LittleEndian>(pool.dim() as u32)?;
    out.write_u32::<LittleEndian>(pool.num_classes() as u32)?;
    for id in 0..pool.len() {
        for v in pool.row(id).to_dense() {
            out.write_f32::<LittleEndian>(v.to_f64_lossy() as f32)?;
        }
    }
    let labels: Vec<u8> = pool.labels().iter().map(|&y| y as u8).collect();
    out.write_all(&labels)?;
    Ok(())
}

pub fn read_embeddings<T: Scalar>(bytes: &[u8]) -> Result<Pool<T>> {
    if bytes.len() < HEADER_LEN || &bytes[..7] != MAGIC {
        return Err(Error::parse("embeddings", "missing GLEMB1 header"));
    }
    let mut cur = Cursor::new(&bytes[7..]);
    let n = cur.read_u32::<LittleEndian>()? as usize;
    let dim = cur.read_u32::<LittleEndian>()? as usize;
    let classes = cur.read_u32::<LittleEndian>()? as usize;
    if dim == 0 || classes == 0 {
        return Err(Error::parse("embeddings", "dim and C must be positive"));
    }
    let expected = HEADER_LEN + n * dim * 4 + n;
    if bytes.len() != expected {
        return Err(Error::parse(
            "embeddings",
            format!(
                "header declares N={n}, dim={dim} ({expected} bytes) but file has {} bytes",
                bytes.len()
            ),
        ));
    }
    let mut features = Vec::with_capacity(n * dim);
    for i in 0..n * dim {
        let v = cur.read_f32::<LittleEndian>()?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("embedding row {}", i / dim)));
        }
        features.push(T::from_f64_lossy(f64::from(v)));
    }
    let mut labels = vec![0u8; n];
    cur.read_exact(&mut labels)?;
    if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y as usize >= classes) {
        return Err(Error::parse(
            "embeddings",
            format!("label {y} of row {i} outside [0, {classes})"),
        ));
    }
    Pool::from_dense(dim, features, labels.into_iter().map(usize::from).collect(), classes)
}

pub fn save_embeddings<T: Scalar>(pool: &Pool<T>, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_embeddings(pool, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_embeddings<T: Scalar>(path: &Path) -> Result<Pool<T>> {
    read_embeddings(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode(pool: &Pool<f32>) -> Vec<u8> {
        let mut buf = Vec::new();
        write_embeddings(pool, &mut buf).unwrap();
        buf
    }

    #[test]
    fn small_file_round_trip() {
        let data: Vec<f32> = (0..12).map(|i| i as f32 * 0.5 - 2.0).collect();
        let pool = Pool::from_dense(4, data.clone(), vec![0, 1, 2], 3).unwrap();
        let bytes = encode(&pool);
        assert_eq!(&bytes[..7], b"GLEMB1\n");
        assert_eq!(bytes.len(), 19 + 48 + 3);
        let back = read_embeddings::<f32>(&bytes).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.dim(), 4);
        assert_eq!(back.labels(), &[0, 1, 2]);
        assert_eq!(back.row(2).to_dense(), data[8..].to_vec());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let pool = Pool::from_dense(2, vec![1.0f32; 20], vec![0; 10], 1).unwrap();
        let bytes = encode(&pool);
        // Drop one row: 8 feature bytes, plus the last label byte.
        let mut short = bytes[..19 + 9 * 8].to_vec();
        short.extend_from_slice(&[0; 9]);
        assert!(read_embeddings::<f32>(&short).is_err());
        assert!(read_embeddings::<f32>(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(read_embeddings::<f32>(&long).is_err());
    }

    #[test]
    fn bad_labels_and_values_are_rejected() {
        let pool = Pool::from_dense(1, vec![1.0f32, 2.0], vec![0, 1], 2).unwrap();
        let mut bytes = encode(&pool);
        let last = bytes.len() - 1;
        bytes[last] = 2;
        assert!(read_embeddings::<f32>(&bytes).is_err());
        let mut bytes = encode(&pool);
        bytes[19..23].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(read_embeddings::<f32>(&bytes).is_err());
        assert!(read_embeddings::<f32>(b"GLEMB2\n").is_err());
    }
}
