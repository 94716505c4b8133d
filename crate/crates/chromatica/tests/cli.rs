//! End-to-end CLI behavior: exit codes, output forms, strict/lenient modes,
//! and the plot pipeline closure.

mod common;

use common::{exit_code, fixture, run_in, stderr_of, stdout_of};
use tempfile::TempDir;

fn tmp() -> TempDir {
    TempDir::new().expect("temp dir")
}

fn path(p: &std::path::Path) -> String {
    p.display().to_string()
}

#[test]
fn validate_empty_corpus_succeeds_with_zero_works() {
    let dir = tmp();
    let out = run_in(dir.path(), &["validate", "--corpus", &path(&fixture("empty.csv"))]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout_of(&out).starts_with("works: 0\n"));
}

#[test]
fn missing_corpus_is_a_user_error() {
    let dir = tmp();
    let out = run_in(dir.path(), &["diagram", "--corpus", "missing.csv"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("cannot read"));
}

#[test]
fn strict_mode_fails_with_file_and_line() {
    let dir = tmp();
    let corpus = path(&fixture("bad_key.csv"));
    let out = run_in(dir.path(), &["validate", "--corpus", &corpus]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("bad_key.csv:3"), "stderr: {err}");
}

#[test]
fn lenient_mode_skips_and_reports() {
    let dir = tmp();
    let corpus = path(&fixture("bad_key.csv"));
    let out = run_in(
        dir.path(),
        &["diagram", "--corpus", &corpus, "--lenient"],
    );
    assert_eq!(exit_code(&out), 0);
    assert!(stderr_of(&out).contains("skipped row"));
    // Only the well-formed composer remains.
    let table = stdout_of(&out);
    assert!(table.contains("good,"), "stdout: {table}");
    assert!(!table.contains("bad,"));
}

#[test]
fn year_spans_collapse_with_a_diagnostic() {
    let dir = tmp();
    let corpus = path(&fixture("year_span.csv"));
    let out = run_in(dir.path(), &["validate", "--corpus", &corpus]);
    assert_eq!(exit_code(&out), 0);
    let report = stdout_of(&out);
    assert!(report.contains("works: 8"));
    assert!(report.contains("year span \"1717-1723\" collapsed to 1717"));
}

#[test]
fn diagram_prints_the_anchor_row() {
    let dir = tmp();
    let corpus = path(&fixture("mozart_1761.csv"));
    let out = run_in(dir.path(), &["diagram", "--corpus", &corpus]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(
        stdout_of(&out),
        "composer,x,y,weighting,normalization\nmozart,-0.166667,0,unweighted,total\n"
    );
}

#[test]
fn unknown_composer_is_a_user_error() {
    let dir = tmp();
    let corpus = path(&fixture("mozart_1761.csv"));
    let out = run_in(
        dir.path(),
        &["career", "--corpus", &corpus, "--composer", "nobody"],
    );
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("unknown composer"));
}

#[test]
fn too_few_samples_is_a_data_error() {
    let dir = tmp();
    let corpus = path(&fixture("mozart_1761.csv"));
    let out = run_in(dir.path(), &["gof", "--corpus", &corpus]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_of(&out).contains("at least 8 samples"));
}

#[test]
fn invalid_cut_is_a_user_error() {
    let dir = tmp();
    let corpus = path(&fixture("ensemble.csv"));
    let out = run_in(
        dir.path(),
        &["cluster", "--corpus", &corpus, "--cut", "k=9"],
    );
    assert_eq!(exit_code(&out), 1);
    let bad_syntax = run_in(
        dir.path(),
        &["cluster", "--corpus", &corpus, "--cut", "nine"],
    );
    assert_eq!(exit_code(&bad_syntax), 1);
}

#[test]
fn weighted_permode_combination_is_rejected() {
    let dir = tmp();
    let corpus = path(&fixture("ensemble.csv"));
    let out = run_in(
        dir.path(),
        &[
            "diagram",
            "--corpus",
            &corpus,
            "--weighted",
            "--normalization",
            "permode",
        ],
    );
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tmp();
    assert_eq!(exit_code(&run_in(dir.path(), &["--help"])), 0);
    assert_eq!(exit_code(&run_in(dir.path(), &["--version"])), 0);
    // No subcommand is a usage error.
    assert_eq!(exit_code(&run_in(dir.path(), &[])), 1);
}

#[test]
fn out_extension_selects_json_mirror() {
    let dir = tmp();
    let corpus = path(&fixture("mozart_1761.csv"));
    let out_json = dir.path().join("points.json");
    let out = run_in(
        dir.path(),
        &["diagram", "--corpus", &corpus, "--out", &path(&out_json)],
    );
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&out_json).unwrap()).unwrap();
    assert_eq!(doc[0]["composer"], "mozart");
    assert_eq!(doc[0]["normalization"], "total");
    let x = doc[0]["x"].as_f64().unwrap();
    assert!((x - (-0.166667)).abs() < 1e-12);
}

#[test]
fn json_cache_reproduces_csv_analyses() {
    let dir = tmp();
    let corpus = path(&fixture("ensemble.csv"));
    let cache = dir.path().join("cache.json");
    let out = run_in(
        dir.path(),
        &["validate", "--corpus", &corpus, "--out", &path(&cache)],
    );
    assert_eq!(exit_code(&out), 0);

    let from_csv = dir.path().join("from_csv.csv");
    let from_cache = dir.path().join("from_cache.csv");
    run_in(
        dir.path(),
        &["diagram", "--corpus", &corpus, "--out", &path(&from_csv)],
    );
    run_in(
        dir.path(),
        &["diagram", "--corpus", &path(&cache), "--out", &path(&from_cache)],
    );
    assert_eq!(
        std::fs::read(&from_csv).unwrap(),
        std::fs::read(&from_cache).unwrap()
    );
}

/// A table re-plotted through `render` must match the fused command's SVG
/// byte for byte.
#[test]
fn render_closes_the_pipeline_for_every_plot_kind() {
    let dir = tmp();
    let ensemble = path(&fixture("ensemble.csv"));
    let mozart = path(&fixture("mozart.csv"));
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("diagram", vec!["diagram", "--corpus", &ensemble]),
        ("fractions", vec!["fractions", "--corpus", &ensemble]),
        ("histogram", vec!["histogram", "--corpus", &ensemble]),
        (
            "career",
            vec!["career", "--corpus", &mozart, "--composer", "mozart"],
        ),
    ];
    for (name, base) in cases {
        let table = dir.path().join(format!("{name}.csv"));
        let direct = dir.path().join(format!("{name}_direct.svg"));
        let replot = dir.path().join(format!("{name}_replot.svg"));
        let mut args = base.clone();
        let (table_s, direct_s, replot_s) = (path(&table), path(&direct), path(&replot));
        args.extend(["--out", &table_s, "--svg", &direct_s]);
        let out = run_in(dir.path(), &args);
        assert_eq!(exit_code(&out), 0, "{name}: {}", stderr_of(&out));
        let out = run_in(
            dir.path(),
            &["render", "--corpus", &table_s, "--svg", &replot_s],
        );
        assert_eq!(exit_code(&out), 0, "{name}: {}", stderr_of(&out));
        assert_eq!(
            std::fs::read(&direct).unwrap(),
            std::fs::read(&replot).unwrap(),
            "{name}: fused and re-plotted SVGs differ"
        );
    }
}

#[test]
fn render_rejects_unknown_table_layouts() {
    let dir = tmp();
    let corpus = path(&fixture("mozart_1761.csv"));
    let svg = path(&dir.path().join("out.svg"));
    let out = run_in(dir.path(), &["render", "--corpus", &corpus, "--svg", &svg]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("unrecognized table header"));
}

#[test]
fn seed_env_fallback_and_flag_priority() {
    let dir = tmp();
    let corpus = path(&fixture("ensemble.csv"));
    let via_env = std::process::Command::new(env!("CARGO_BIN_EXE_chromatica"))
        .args(["gof", "--corpus", &corpus, "--reps", "100"])
        .env("CHROMATICA_SEED", "31")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(stdout_of(&via_env).contains("\"seed\": 31"));
    let flag_wins = std::process::Command::new(env!("CARGO_BIN_EXE_chromatica"))
        .args(["gof", "--corpus", &corpus, "--reps", "100", "--seed", "8"])
        .env("CHROMATICA_SEED", "31")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(stdout_of(&flag_wins).contains("\"seed\": 8"));
}

#[test]
fn outputs_do_not_touch_the_input_file() {
    let dir = tmp();
    let src = fixture("mozart_1761.csv");
    let before = std::fs::read(&src).unwrap();
    let out_path = dir.path().join("t.csv");
    run_in(
        dir.path(),
        &["degrees", "--corpus", &path(&src), "--out", &path(&out_path)],
    );
    assert_eq!(std::fs::read(&src).unwrap(), before);
}
