use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pool::Pool;
use crate::scalar::Scalar;

use super::text::featurize_text_hashing;

pub const NUM_CLASSES: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TextRecord {
    /// Class in `[0, 4)` (file classes 1..=4 shifted down).
    pub label: usize,
    pub title: String,
    pub description: String,
}

impl TextRecord {
    /// Title and description joined by a space; the text that gets featurized.
    pub fn text(&self) -> String {
        format!("{} {}", self.title, self.description)
    }
}

/// Parses headerless `class,title,description` rows with RFC 4180 quoting.
pub fn parse_agnews_csv<R: Read>(reader: R) -> Result<Vec<TextRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::parse("agnews csv", format!("row {row_no}: {e}")))?;
        if row.len() != 3 {
            return Err(Error::parse(
                "agnews csv",
                format!("row {row_no}: expected 3 fields, found {}", row.len()),
            ));
        }
        let class: usize = row[0].trim().parse().map_err(|_| {
            Error::parse(
                "agnews csv",
                format!("row {row_no}: class `{}` is not an integer", &row[0]),
            )
        })?;
        if !(1..=NUM_CLASSES).contains(&class) {
            return Err(Error::parse(
                "agnews csv",
                format!("row {row_no}: class {class} outside 1..=4"),
            ));
        }
        out.push(TextRecord {
            label: class - 1,
            title: row[1].to_string(),
            description: row[2].to_string(),
        });
    }
    Ok(out)
}

pub fn load_agnews_csv(path: &Path) -> Result<Vec<TextRecord>> {
    parse_agnews_csv(std::fs::File::open(path)?)
}

/// Hashed-feature pool over `records`.
pub fn agnews_pool<T: Scalar>(records: &[TextRecord], hash_dim: usize) -> Result<Pool<T>> {
    let rows = records
        .iter()
        .map(|r| featurize_text_hashing(&r.text(), hash_dim))
        .collect::<Result<Vec<_>>>()?;
    let labels = records.iter().map(|r| r.label).collect();
    Pool::from_sparse(hash_dim, rows, labels, NUM_CLASSES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_quoted_fields_with_commas() {
        let csv = "\"3\",\"Oil, gas prices\",\"Crude rose, again.\"\n\"1\",\"Vote\",\"Polls \"\"close\"\"\"\n";
        let recs = parse_agnews_csv(csv.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].label, 2);
        assert_eq!(recs[0].title, "Oil, gas prices");
        assert_eq!(recs[0].description, "Crude rose, again.");
        assert_eq!(recs[1].description, "Polls \"close\"");
    }

    #[test]
    fn out_of_range_class_names_the_row() {
        let csv = "1,a,b\n5,c,d\n";
        let err = parse_agnews_csv(csv.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
        assert!(err.contains("class 5"), "{err}");
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(parse_agnews_csv("1,only-two\n".as_bytes()).is_err());
        assert!(parse_agnews_csv("x,a,b\n".as_bytes()).is_err());
        assert!(parse_agnews_csv("0,a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn pool_features_are_unit_norm() {
        let recs = parse_agnews_csv("1,Stocks fall,Markets slide\n4,New chip,Faster cores\n".as_bytes()).unwrap();
        let pool = agnews_pool::<f64>(&recs, 1 << 12).unwrap();
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.num_classes(), 4);
        for id in 0..2 {
            assert!((pool.row(id).sq_norm() - 1.0).abs() < 1e-12);
        }
    }
}
