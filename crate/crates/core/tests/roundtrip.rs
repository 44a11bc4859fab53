//! Parsers and writers agree with each other, on random inputs and on the
//! checked-in fuzz corpus.

mod common;

use std::path::PathBuf;

use dropmaze::field::{ScalarField, ScalarQuantity, VectorField, VectorQuantity};
use dropmaze::io::{read_field_csv, write_scalar_csv, write_vector_csv, FieldTable, Raster};
use dropmaze::maze::{emit_maze, parse_maze};
use dropmaze::scenario::{diff_reports, parse_config};
use proptest::prelude::*;

fn maze_roundtrips(text: &str) {
    if let Ok(m) = parse_maze(text) {
        assert_eq!(parse_maze(&emit_maze(&m)).as_ref(), Ok(&m));
    }
}

fn config_roundtrips(text: &str) {
    if let Ok(c) = parse_config(text) {
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }
}

fn csv_roundtrips(text: &str) {
    let Ok(table) = read_field_csv(text) else {
        return;
    };
    let mut buf = Vec::new();
    match &table {
        FieldTable::Scalar(f) => write_scalar_csv(f, &mut buf).unwrap(),
        FieldTable::Vector(f) => write_vector_csv(f, &mut buf).unwrap(),
    }
    assert_eq!(
        read_field_csv(std::str::from_utf8(&buf).unwrap()).unwrap(),
        table
    );
}

fn pgm_roundtrips(bytes: &[u8]) {
    if let Ok(img) = Raster::from_pgm(bytes) {
        assert_eq!(Raster::from_pgm(&img.to_pgm()).unwrap(), img);
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        any::<f64>().prop_filter("finite", |v| v.is_finite())
    ]
}

proptest! {
    #[test]
    fn generated_mazes_roundtrip(seed in any::<u64>(), nx in 1usize..20, ny in 1usize..20) {
        let text = common::random_maze_text(&mut common::rng(seed), nx.max(2), ny);
        let m = parse_maze(&text).unwrap();
        prop_assert_eq!(parse_maze(&emit_maze(&m)).unwrap(), m);
    }

    #[test]
    fn arbitrary_maze_text_never_panics(text in "[.#+STx\\n =0-9a-z]{0,80}") {
        maze_roundtrips(&text);
    }

    #[test]
    fn configs_roundtrip(
        generator in 0usize..3,
        seed in any::<u64>(),
        width in 2.0..6.0f64,
        coated in any::<bool>(),
        mobility in 0.001..0.1f64,
        fraction in 0.0..1.0f64,
        noise in 0.0..100.0f64,
    ) {
        let source = ["generator = ring", "generator = bifurcation", "generator = straight"][generator];
        let text = format!(
            "{source}\nseed = {seed}\nchannel_width_mm = {width}\ncoated_corners = {coated}\n\
             mobility = {mobility}\nthreshold_fraction = {fraction}\nnoise_amplitude = {noise}\n"
        );
        let c = parse_config(&text).unwrap();
        prop_assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn arbitrary_config_text_never_panics(text in "([a-z_]{1,12} ?= ?[a-z0-9.,_]{0,8}\\n|#[^\\n]{0,10}\\n){0,6}") {
        config_roundtrips(&text);
    }

    #[test]
    fn scalar_csv_roundtrips(nx in 1usize..8, ny in 1usize..8, h in 0.01..5.0f64, vals in prop::collection::vec(finite(), 64)) {
        let f = ScalarField::new(nx, ny, h, ScalarQuantity::JoulePower, vals[..nx * ny].to_vec()).unwrap();
        let mut buf = Vec::new();
        write_scalar_csv(&f, &mut buf).unwrap();
        match read_field_csv(std::str::from_utf8(&buf).unwrap()).unwrap() {
            FieldTable::Scalar(g) => {
                prop_assert_eq!(g.values, f.values);
                prop_assert_eq!(g.quantity, f.quantity);
                prop_assert!((g.cell_size_mm - h).abs() <= 1e-12 * h);
            }
            FieldTable::Vector(_) => prop_assert!(false, "read back as a vector field"),
        }
    }

    #[test]
    fn vector_csv_roundtrips(nx in 1usize..8, ny in 1usize..8, vals in prop::collection::vec(finite(), 128)) {
        let n = nx * ny;
        let f = VectorField::new(nx, ny, 0.5, VectorQuantity::CurrentDensity, vals[..n].to_vec(), vals[64..64 + n].to_vec()).unwrap();
        let mut buf = Vec::new();
        write_vector_csv(&f, &mut buf).unwrap();
        match read_field_csv(std::str::from_utf8(&buf).unwrap()).unwrap() {
            FieldTable::Vector(g) => {
                prop_assert_eq!(g.x, f.x);
                prop_assert_eq!(g.y, f.y);
            }
            FieldTable::Scalar(_) => prop_assert!(false, "read back as a scalar field"),
        }
    }

    #[test]
    fn pgm_roundtrips_any_raster(w in 1usize..16, h in 1usize..16, px in prop::collection::vec(any::<u8>(), 256)) {
        let img = Raster { width: w, height: h, pixels: px[..w * h].to_vec() };
        prop_assert_eq!(Raster::from_pgm(&img.to_pgm()).unwrap(), img);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        pgm_roundtrips(&bytes);
        if let Ok(text) = std::str::from_utf8(&bytes) {
            csv_roundtrips(text);
            let _ = diff_reports(text, text);
        }
    }
}

fn corpus(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus {}", dir.display());
    files
        .into_iter()
        .map(|p| (p.clone(), std::fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn fuzz_corpus_replays_cleanly() {
    for (_, b) in corpus("parse_maze") {
        maze_roundtrips(&String::from_utf8_lossy(&b));
    }
    for (_, b) in corpus("parse_config") {
        config_roundtrips(&String::from_utf8_lossy(&b));
    }
    for (_, b) in corpus("field_csv") {
        csv_roundtrips(&String::from_utf8_lossy(&b));
    }
    for (_, b) in corpus("pgm") {
        pgm_roundtrips(&b);
    }
    for (_, b) in corpus("report_diff") {
        let text = String::from_utf8_lossy(&b);
        let (a, b) = text.split_once('\0').unwrap_or((&text, &text));
        let _ = diff_reports(a, b);
    }
}

#[test]
fn corpus_seeds_cover_accept_and_reject_paths() {
    let accepted = |name: &str| {
        corpus("parse_maze")
            .iter()
            .any(|(p, b)| p.ends_with(name) && parse_maze(&String::from_utf8_lossy(b)).is_ok())
    };
    assert!(accepted("corridor.txt"));
    assert!(!accepted("bad_glyph.txt"));
    let csv_ok: Vec<bool> = corpus("field_csv")
        .iter()
        .map(|(_, b)| read_field_csv(&String::from_utf8_lossy(b)).is_ok())
        .collect();
    assert!(csv_ok.contains(&true) && csv_ok.contains(&false));
}
