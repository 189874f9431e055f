use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::pool::Pool;
use crate::scalar::Scalar;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;
pub const NUM_CLASSES: usize = 10;
pub const TEST_IMAGES_FILE: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS_FILE: &str = "t10k-labels-idx1-ubyte";

fn header(cur: &mut Cursor<&[u8]>, what: &str) -> Result<u32> {
    cur.read_u32::<BigEndian>()
        .map_err(|_| Error::parse("idx", format!("{what}: truncated header")))
}

/// Parses an IDX image file and its label file into a pool of pixel/255 features.
pub fn parse_mnist_idx<T: Scalar>(image_bytes: &[u8], label_bytes: &[u8]) -> Result<Pool<T>> {
    let mut img = Cursor::new(image_bytes);
    let magic = header(&mut img, "images")?;
    if magic != IMAGES_MAGIC {
        return Err(Error::parse("idx", format!("images: bad magic {magic:#010x}")));
    }
    let count = header(&mut img, "images")? as usize;
    let rows = header(&mut img, "images")? as usize;
    let cols = header(&mut img, "images")? as usize;
    let dim = rows * cols;
    if dim == 0 {
        return Err(Error::parse("idx", "images: zero-sized image"));
    }
    let payload = &image_bytes[16..];
    if payload.len() != count * dim {
        return Err(Error::parse(
            "idx",
            format!(
                "images: header declares {count} x {rows} x {cols} = {} bytes, payload has {}",
                count * dim,
                payload.len()
            ),
        ));
    }

    let mut lab = Cursor::new(label_bytes);
    let magic = header(&mut lab, "labels")?;
    if magic != LABELS_MAGIC {
        return Err(Error::parse("idx", format!("labels: bad magic {magic:#010x}")));
    }
    let label_count = header(&mut lab, "labels")? as usize;
    if label_count != count {
        return Err(Error::parse(
            "idx",
            format!("count mismatch: {count} images but {label_count} labels"),
        ));
    }
    let mut raw_labels = Vec::with_capacity(count);
    lab.read_to_end(&mut raw_labels)?;
    if raw_labels.len() != count {
        return Err(Error::parse(
            "idx",
            format!("labels: header declares {count}, payload has {}", raw_labels.len()),
        ));
    }
    if let Some((i, &y)) = raw_labels.iter().enumerate().find(|(_, &y)| y as usize >= NUM_CLASSES) {
        return Err(Error::parse("idx", format!("labels: entry {i} = {y} outside [0, 9]")));
    }

    let scale = T::from_f64_lossy(255.0);
    let features = payload.iter().map(|&b| T::from_f64_lossy(b as f64) / scale).collect();
    let labels = raw_labels.into_iter().map(usize::from).collect();
    Pool::from_dense(dim, features, labels, NUM_CLASSES)
}

/// Loads the official test split from `dir`.
pub fn load_mnist_dir<T: Scalar>(dir: &Path) -> Result<Pool<T>> {
    let images = std::fs::read(dir.join(TEST_IMAGES_FILE))?;
    let labels = std::fs::read(dir.join(TEST_LABELS_FILE))?;
    parse_mnist_idx(&images, &labels)
}

/// Encodes `images` (each `rows * cols` bytes) as an IDX3 file.
pub fn encode_idx_images(images: &[Vec<u8>], rows: usize, cols: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    out.write_u32::<BigEndian>(IMAGES_MAGIC).unwrap();
    out.write_u32::<BigEndian>(images.len() as u32).unwrap();
    out.write_u32::<BigEndian>(rows as u32).unwrap();
    out.write_u32::<BigEndian>(cols as u32).unwrap();
    for img in images {
        assert_eq!(img.len(), rows * cols, "image size disagrees with header");
        out.extend_from_slice(img);
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.write_u32::<BigEndian>(LABELS_MAGIC).unwrap();
    out.write_u32::<BigEndian>(labels.len() as u32).unwrap();
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_white_images_normalize_to_one() {
        let imgs = encode_idx_images(&[vec![255; 4], vec![255; 4]], 2, 2);
        let labs = encode_idx_labels(&[3, 9]);
        let pool = parse_mnist_idx::<f32>(&imgs, &labs).unwrap();
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.dim(), 4);
        assert_eq!(pool.num_classes(), 10);
        assert!(pool.row(1).to_dense().iter().all(|&v| v == 1.0));
        assert_eq!(pool.labels(), &[3, 9]);
    }

    #[test]
    fn rejects_corrupt_inputs() {
        let imgs = encode_idx_images(&[vec![0; 4]], 2, 2);
        let labs = encode_idx_labels(&[1]);
        let mut bad_magic = imgs.clone();
        bad_magic[3] = 0x01;
        assert!(parse_mnist_idx::<f64>(&bad_magic, &labs).is_err());
        assert!(parse_mnist_idx::<f64>(&imgs[..imgs.len() - 1], &labs).is_err());
        assert!(parse_mnist_idx::<f64>(&imgs, &encode_idx_labels(&[1, 2])).is_err());
        assert!(parse_mnist_idx::<f64>(&imgs, &encode_idx_labels(&[10])).is_err());
        assert!(parse_mnist_idx::<f64>(&imgs[..10], &labs).is_err());
        assert!(parse_mnist_idx::<f64>(&imgs, &labs[..6]).is_err());
    }
}
