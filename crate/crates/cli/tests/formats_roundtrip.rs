//! File-format round trips and parse-error reporting.

use std::path::Path;

use nls_cli::error::CliError;
use nls_cli::formats::{
    load_meta, load_tracks, read_labels, read_matrix, write_labels, write_matrix, write_tracks,
};
use nls_core::datagen::{random_motion_scene, synth_affine_motion, MotionSceneSpec, TrajectorySet};
use nls_core::Matrix;

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn matrix_round_trip_is_exact() {
    let dir = tmp();
    let path = dir.path().join("m.csv");
    let m = Matrix::from_fn(7, 5, |i, j| {
        ((i * 31 + j * 17) as f64 / 13.0 - 5.0) * 1.234567890123456e-3
    });
    write_matrix(&path, &m).unwrap();
    let back = read_matrix(&path).unwrap();
    assert_eq!(m, back);
}

#[test]
fn matrix_header_is_human_readable() {
    let dir = tmp();
    let path = dir.path().join("m.csv");
    write_matrix(&path, &Matrix::identity(2)).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("2,2\n"));
}

#[test]
fn matrix_parse_errors_name_the_line() {
    let dir = tmp();
    let path = dir.path().join("m.csv");

    std::fs::write(&path, "2,2\n1.0,2.0\n3.0,oops\n").unwrap();
    let err = read_matrix(&path).unwrap_err();
    assert!(matches!(&err, CliError::Data(msg) if msg.contains(":3:")), "{err}");
    assert_eq!(err.exit_code(), 2);

    std::fs::write(&path, "2,2\n1.0,2.0,3.0\n4.0,5.0\n").unwrap();
    let err = read_matrix(&path).unwrap_err();
    assert!(matches!(&err, CliError::Data(msg) if msg.contains(":2:")), "{err}");

    std::fs::write(&path, "2,2\n1.0,2.0\n").unwrap();
    assert!(read_matrix(&path).is_err(), "missing rows must fail");

    std::fs::write(&path, "nonsense\n").unwrap();
    assert!(read_matrix(&path).is_err(), "bad header must fail");
}

#[test]
fn labels_round_trip() {
    let dir = tmp();
    let path = dir.path().join("l.labels");
    let labels = vec![0, 0, 2, 1, 1, 2];
    write_labels(&path, &labels).unwrap();
    assert_eq!(read_labels(&path).unwrap(), labels);

    std::fs::write(&path, "0\nx\n").unwrap();
    let err = read_labels(&path).unwrap_err();
    assert!(matches!(&err, CliError::Data(msg) if msg.contains(":2:")), "{err}");
}

#[test]
fn single_track_parses_as_documented() {
    let dir = tmp();
    let path = dir.path().join("one.tracks");
    std::fs::write(&path, "frames=2 points=1\n1,2,3,4\n").unwrap();
    let ts = load_tracks(&path).unwrap();
    assert_eq!(ts.num_frames, 2);
    assert_eq!(ts.tracks, vec![vec![(1.0, 2.0), (3.0, 4.0)]]);
    assert!(ts.labels.is_none(), "no companion file, labels stay absent");
}

#[test]
fn tracks_round_trip_with_labels() {
    let dir = tmp();
    let path = dir.path().join("seq.tracks");
    let spec = MotionSceneSpec { frames: 6, num_objects: 2, points_per_object: 5, seed: 9 };
    let (objects, camera) = random_motion_scene(&spec).unwrap();
    let tracks = synth_affine_motion(6, &objects, &camera, 0.01, 9).unwrap();
    write_tracks(&path, &tracks).unwrap();
    assert!(dir.path().join("seq.labels").exists());
    let back = load_tracks(&path).unwrap();
    assert_eq!(tracks, back);
}

#[test]
fn tracks_without_companion_still_load() {
    let dir = tmp();
    let path = dir.path().join("seq.tracks");
    let tracks = TrajectorySet {
        num_frames: 3,
        tracks: vec![vec![(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]; 4],
        labels: None,
    };
    write_tracks(&path, &tracks).unwrap();
    assert!(!dir.path().join("seq.labels").exists());
    let back = load_tracks(&path).unwrap();
    assert_eq!(back.labels, None);
    assert_eq!(back.tracks.len(), 4);
}

#[test]
fn track_parse_errors_name_the_line() {
    let dir = tmp();
    let path = dir.path().join("bad.tracks");

    std::fs::write(&path, "frames=2 points=2\n1,2,3,4\n5,6,7\n").unwrap();
    let err = load_tracks(&path).unwrap_err();
    assert!(matches!(&err, CliError::Data(msg) if msg.contains(":3:")), "{err}");

    std::fs::write(&path, "frames=2\n1,2,3,4\n").unwrap();
    assert!(load_tracks(&path).is_err(), "short header must fail");

    std::fs::write(&path, "frames=2 points=1\n1,2,3,4\n5,6,7,8\n").unwrap();
    assert!(load_tracks(&path).is_err(), "extra tracks must fail");
}

#[test]
fn mismatched_companion_labels_are_rejected() {
    let dir = tmp();
    let path = dir.path().join("seq.tracks");
    std::fs::write(&path, "frames=2 points=2\n1,2,3,4\n5,6,7,8\n").unwrap();
    std::fs::write(dir.path().join("seq.labels"), "0\n").unwrap();
    assert!(load_tracks(&path).is_err());
}

#[test]
fn meta_files_parse_and_default() {
    let dir = tmp();
    let path = dir.path().join("seq.meta");
    std::fs::write(&path, "# comment\ngroup=traffic\nmotions=3\n").unwrap();
    let meta = load_meta(&path).unwrap();
    assert_eq!(meta.group.as_deref(), Some("traffic"));
    assert_eq!(meta.motions, Some(3));

    let empty = load_meta(Path::new("/nonexistent/never.meta")).unwrap();
    assert!(empty.group.is_none() && empty.motions.is_none());

    std::fs::write(&path, "bogus_key=1\n").unwrap();
    assert!(load_meta(&path).is_err());
}
