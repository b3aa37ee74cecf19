use std::path::PathBuf;

use imverde::graph::load_planetoid_format;
use imverde::Error;

fn tiny() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/tiny")
}

#[test]
fn tiny_dataset_shape() {
    let (g, _) = load_planetoid_format(&tiny(), "tiny").unwrap();
    assert_eq!(g.n(), 10);
    assert_eq!(g.num_classes(), 3);
    // path 0-1-...-9 with (0, 1) listed twice
    assert_eq!(g.num_edges(), 9);
    assert!(g.has_edge(6, 7) && g.has_edge(7, 8));
    let f = g.features().unwrap();
    assert_eq!(f.dim(), 4);
    assert_eq!(f.row(8).collect::<Vec<_>>(), vec![(1, 1.0)]);
    assert_eq!(f.row(6).collect::<Vec<_>>(), vec![(0, 2.0)]);
    assert_eq!(f.row(7).count(), 0);
    assert_eq!(f.row(5).collect::<Vec<_>>(), vec![(1, 1.0), (3, 0.5)]);
}

#[test]
fn tiny_dataset_labels_and_split() {
    let (g, split) = load_planetoid_format(&tiny(), "tiny").unwrap();
    let expected = [
        Some(0),
        Some(1),
        Some(2),
        Some(0),
        Some(1),
        Some(2),
        Some(0),
        None,
        Some(2),
        Some(1),
    ];
    assert_eq!(g.labels(), &expected);
    assert_eq!(split.labeled_train, vec![0, 1, 2]);
    assert_eq!(split.test, vec![6, 8, 9]);
    assert_eq!(split.unlabeled_train, vec![3, 4, 5, 7]);
    assert_eq!(split.minority_class, 0);
}

#[test]
fn missing_files_are_reported() {
    let err = load_planetoid_format(&tiny(), "cora").unwrap_err();
    assert!(matches!(err, Error::Missing { .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
}
