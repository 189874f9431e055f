use std::io::Cursor;
use std::path::PathBuf;

use gnl_core::data::{
    agnews_pool, encode_idx_images, encode_idx_labels, featurize_text_hashing, fnv1a64, load_mnist_dir,
    parse_agnews_csv, parse_mnist_idx, read_embeddings, write_embeddings, DEFAULT_HASH_DIM,
};
use gnl_core::pool::Pool;
use proptest::prelude::*;

fn mnist_dir() -> PathBuf {
    std::env::var_os("GNL_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

#[test]
fn mnist_test_split_has_expected_shape_and_class_counts() {
    let dir = mnist_dir();
    if !dir.join("t10k-images-idx3-ubyte").exists() {
        eprintln!("skipping: no MNIST files in {}", dir.display());
        return;
    }
    let pool: Pool<f32> = load_mnist_dir(&dir).unwrap();
    assert_eq!(pool.len(), 10_000);
    assert_eq!(pool.dim(), 784);
    assert_eq!(
        pool.class_counts(),
        vec![980, 1135, 1032, 1010, 982, 892, 958, 1028, 974, 1009]
    );
    let all: Vec<f32> = (0..pool.len()).flat_map(|i| pool.row(i).to_dense()).collect();
    assert!(all.iter().all(|&v| (0.0..=1.0).contains(&v)));
    assert_eq!(all.iter().copied().fold(0.0f32, f32::max), 1.0);
}

#[test]
fn fnv_matches_published_vectors() {
    assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
    assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
    assert_eq!(fnv1a64(b"foobar"), 0x8594_4171_f739_67e8);
}

#[test]
fn agnews_fixture_becomes_unit_norm_sparse_pool() {
    let csv = "\"3\",\"Wall St. Bears Claw Back\",\"Short-sellers, Wall Street's dwindling band\"\n\
               \"1\",\"Fears for T N pension\",\"Unions representing workers\"\n\
               \"2\",\"Phelps wins\",\"Gold, again\"\n\
               \"4\",\"New chip\",\"Faster, cheaper\"\n";
    let records = parse_agnews_csv(Cursor::new(csv)).unwrap();
    assert_eq!(records.iter().map(|r| r.label).collect::<Vec<_>>(), vec![2, 0, 1, 3]);
    let pool: Pool<f64> = agnews_pool(&records, DEFAULT_HASH_DIM).unwrap();
    assert!(pool.is_sparse());
    assert_eq!(pool.dim(), DEFAULT_HASH_DIM);
    for i in 0..pool.len() {
        assert!((pool.row(i).sq_norm() - 1.0).abs() < 1e-12);
    }
    assert!(parse_agnews_csv(Cursor::new("\"5\",\"x\",\"y\"\n")).is_err());
}

#[test]
#[ignore = "needs the official AG News test CSV in GNL_AGNEWS_CSV"]
fn agnews_official_test_split() {
    let path = std::env::var("GNL_AGNEWS_CSV").expect("GNL_AGNEWS_CSV");
    let records = gnl_core::data::load_agnews_csv(path.as_ref()).unwrap();
    assert_eq!(records.len(), 7600);
    let pool: Pool<f32> = agnews_pool(&records, DEFAULT_HASH_DIM).unwrap();
    assert_eq!(pool.class_counts(), vec![1900; 4]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embeddings_round_trip_bit_exactly(
        rows in prop::collection::vec(prop::collection::vec(-1e6f32..1e6, 7), 1..40),
        labels_seed in prop::collection::vec(0usize..5, 40),
    ) {
        let labels: Vec<usize> = labels_seed[..rows.len()].to_vec();
        let pool = Pool::from_dense_rows(rows.clone(), labels.clone(), 5).unwrap();
        let mut bytes = Vec::new();
        write_embeddings(&pool, &mut bytes).unwrap();
        prop_assert_eq!(bytes.len(), 7 + 12 + rows.len() * 7 * 4 + rows.len());
        let back: Pool<f32> = read_embeddings(&bytes).unwrap();
        prop_assert_eq!(back.labels(), &labels[..]);
        for (i, row) in rows.iter().enumerate() {
            let got = back.row(i).to_dense();
            prop_assert_eq!(got.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            row.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn idx_round_trip(
        images in prop::collection::vec(prop::collection::vec(any::<u8>(), 12), 1..20),
        labels in prop::collection::vec(0u8..10, 20),
    ) {
        let labels = &labels[..images.len()];
        let pool: Pool<f64> = parse_mnist_idx(&encode_idx_images(&images, 3, 4), &encode_idx_labels(labels)).unwrap();
        prop_assert_eq!(pool.dim(), 12);
        for (i, img) in images.iter().enumerate() {
            let want: Vec<f64> = img.iter().map(|&b| b as f64 / 255.0).collect();
            prop_assert_eq!(pool.row(i).to_dense(), want);
            prop_assert_eq!(pool.label(i), labels[i] as usize);
        }
    }

    #[test]
    fn hashed_features_are_deterministic_unit_vectors(text in "[a-zA-Z ,.!]{0,80}") {
        let a = featurize_text_hashing::<f64>(&text, 1 << 10).unwrap();
        let b = featurize_text_hashing::<f64>(&text, 1 << 10).unwrap();
        prop_assert_eq!(&a, &b);
        let norm: f64 = a.values.iter().map(|v| v * v).sum();
        prop_assert!(a.values.is_empty() || (norm - 1.0).abs() < 1e-12);
        prop_assert!(a.indices.windows(2).all(|w| w[0] < w[1]));
    }
}
