mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use divscope::formats::{self, FormatError};
use divscope_core::assign::{AssignmentResult, Status};
use divscope_core::density::{hexbin, parallel_coords};
use divscope_core::distmat::DistanceMatrix;
use divscope_core::linalg::Matrix;
use divscope_core::mds::{embed, gram_from_distances, Embedding};
use divscope_core::rsvd::{eigs_sym, SolverOptions};
use proptest::prelude::*;
use support::dense::euclidean_distances;
use support::synth::random_reads;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dvs_round_trip(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let mut rng = divscope_core::rng::SeededRng::new(seed);
        let values: Vec<f64> = (0..rows * cols).map(|_| (rng.uniform() * 1e6).floor() / 7.0).collect();
        let d = DistanceMatrix::new(rows, cols, values, false).unwrap();
        let bytes = formats::encode_matrix(&d);
        prop_assert_eq!(bytes.len(), 32 + 8 * rows * cols);
        let back = formats::decode_matrix(&bytes).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(formats::encode_matrix(&back), bytes);
    }
}

#[test]
fn matrix_files_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.dvs");
    let d = DistanceMatrix::new(3, 3, vec![0., 1., 2., 1., 0., 3., 2., 3., 0.], true).unwrap();
    formats::write_matrix(&p, &d).unwrap();
    assert!(!formats::partial_path(&p).exists());
    let back = formats::read_matrix(&p).unwrap();
    assert_eq!(back, d);
    assert!(back.is_symmetric());

    let bytes = fs::read(&p).unwrap();
    fs::write(&p, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(formats::read_matrix(&p), Err(FormatError::Truncated { .. })));
    let mut bad = bytes.clone();
    bad[..4].copy_from_slice(b"DVS2");
    fs::write(&p, &bad).unwrap();
    assert!(matches!(formats::read_matrix(&p), Err(FormatError::BadFormat(_))));
    assert!(matches!(formats::read_matrix(&dir.path().join("missing.dvs")), Err(FormatError::Io { .. })));
}

#[test]
fn matrix_tsv_layout() {
    let d = DistanceMatrix::new(2, 2, vec![0., 4., 4., 0.], true).unwrap();
    let ids = vec!["a".to_string(), "b".to_string()];
    assert_eq!(formats::matrix_tsv(&d, &ids, &ids), "id\ta\tb\na\t0\t4\nb\t4\t0\n");
}

#[test]
fn fasta_files_keep_their_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.fasta");
    let rs = random_reads(7, 130, 1);
    formats::save_fasta(&p, &rs).unwrap();
    let back = formats::read_fasta(&p).unwrap();
    assert_eq!(back.reads(), rs.reads());
    assert_eq!(back.source(), p.display().to_string());
    fs::write(&p, ">x\nACGZ\n").unwrap();
    assert!(matches!(formats::read_fasta(&p), Err(FormatError::Fasta { .. })));
}

fn sample_embedding() -> (Vec<String>, Embedding) {
    let mut rng = divscope_core::rng::SeededRng::new(5);
    let pts: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.normal()).collect()).collect();
    let d = DistanceMatrix::new(40, 40, euclidean_distances(&pts), true).unwrap();
    let g = gram_from_distances(&d, 1).unwrap();
    let e = embed(&g, 5, &SolverOptions::new(5)).unwrap();
    ((0..40).map(|i| format!("read{i}")).collect(), e)
}

#[test]
fn embedding_round_trip_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.tsv");
    let (ids, e) = sample_embedding();
    assert!(e.is_truncated());
    let written = formats::write_embedding(&p, &e, &ids).unwrap();
    assert_eq!(written[1], formats::meta_path(&p));
    let text = fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("id\tdim1\tdim2\tdim3\n"));
    let meta = fs::read_to_string(&written[1]).unwrap();
    assert!(meta.contains("requested_rank=5") && meta.contains("truncated=true"));

    let (back_ids, back) = formats::read_embedding(&p).unwrap();
    assert_eq!(back_ids, ids);
    assert_eq!(back, e);

    // without the sidecar the eigenvalues fall back to column norms
    fs::remove_file(&written[1]).unwrap();
    let (_, bare) = formats::read_embedding(&p).unwrap();
    assert_eq!(bare.coords, e.coords);
    for (a, b) in bare.eigenvalues.iter().zip(&e.eigenvalues) {
        assert!((a - b).abs() < 1e-9 * b);
    }
}

#[test]
fn spectrum_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.dvs");
    let g = Matrix::from_fn(12, 12, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
    let s = eigs_sym(&g, &SolverOptions::new(3).oversampling(4)).unwrap();
    formats::write_spectrum(&p, &s).unwrap();
    assert_eq!(formats::read_spectrum(&p).unwrap(), s);
}

#[test]
fn labels_and_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("labels.tsv");
    fs::write(&p, "ref_id\tspecies\nr1\tSpecies one\nr2\tS2\n\n").unwrap();
    let labels = formats::read_labels(&p).unwrap();
    assert_eq!(labels.len(), 2);
    assert_eq!(labels["r1"], "Species one");
    fs::write(&p, "r1 S1\n").unwrap();
    assert!(matches!(formats::read_labels(&p), Err(FormatError::Parse { line: 1, .. })));

    let mk = |id: &str, status: Status, species: &[&str]| AssignmentResult {
        read_id: id.into(),
        support: species.len(),
        status,
        matched_species: species.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
    };
    let asg = vec![
        mk("q1", Status::Assigned("S1".into()), &["S1"]),
        mk("q2", Status::Ambiguous, &["S1", "S2"]),
        mk("q3", Status::Unknown, &[]),
    ];
    let tsv = formats::assignments_tsv(&asg);
    assert_eq!(
        tsv,
        "read_id\tstatus\tspecies\tsupport\nq1\tassigned\tS1\t1\nq2\tambiguous\tS1;S2\t2\nq3\tunknown\t-\t0\n"
    );
    let ap = dir.path().join("asg.tsv");
    fs::write(&ap, &tsv).unwrap();
    let point_labels = formats::read_point_labels(&ap).unwrap();
    assert_eq!(
        point_labels,
        BTreeMap::from([
            ("q1".to_string(), "S1".to_string()),
            ("q2".to_string(), "ambiguous".to_string()),
            ("q3".to_string(), "unknown".to_string()),
        ])
    );
}

#[test]
fn density_tables() {
    let (ids, e) = sample_embedding();
    let g = hexbin(&e, (0, 1), 0.5, 1).unwrap();
    let tsv = formats::hexbin_tsv(&g);
    let mut lines = tsv.lines();
    assert_eq!(lines.next(), Some("q\tr\tcenter_x\tcenter_y\tcount\tlogcount"));
    let total: u64 = lines.map(|l| l.split('\t').nth(4).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 40);

    let t = parallel_coords(&e, &ids, 2, None, None).unwrap();
    let tsv = formats::pcoords_tsv(&t);
    assert!(tsv.starts_with("id\tdim1\tdim2\tlabel\nread0\t"));
    assert_eq!(tsv.lines().count(), 41);
    assert!(tsv.lines().nth(1).unwrap().ends_with('\t'));
}
