//! Shared helpers for the integration suites.

// Each test binary compiles this module independently and uses a different
// subset of it.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chromatica::corpus::{Corpus, Work};
use chromatica::keycalc::parse_key;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Run the CLI binary with `args` in `dir`.
pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chromatica"))
        .args(args)
        .current_dir(dir)
        .env_remove("CHROMATICA_SEED")
        .output()
        .expect("binary should execute")
}

pub fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

pub fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

/// The 30 canonical in-range key spellings.
pub const ALL_KEYS: [&str; 30] = [
    "Cb", "Gb", "Db", "Ab", "Eb", "Bb", "F", "C", "G", "D", "A", "E", "B", "F#", "C#", "ab",
    "eb", "bb", "f", "c", "g", "d", "a", "e", "b", "f#", "c#", "g#", "d#", "a#",
];

pub fn work(composer: &str, catalog: &str, year: Option<i32>, key: &str) -> Work {
    Work {
        composer_id: composer.to_string(),
        catalog_id: catalog.to_string(),
        title: None,
        year,
        key: parse_key(key).expect("valid key"),
    }
}

/// Seeded random corpus: `composers` composers with 1..=max_works works
/// each, every work dated within 1700..1800.
pub fn random_dated_corpus(seed: u64, composers: usize, max_works: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut works = Vec::new();
    for c in 0..composers {
        let id = format!("composer{c:03}");
        let n = rng.gen_range(1..=max_works);
        for w in 0..n {
            let key = ALL_KEYS[rng.gen_range(0..ALL_KEYS.len())];
            let year = 1700 + rng.gen_range(0..100);
            works.push(work(&id, &format!("w{w}"), Some(year), key));
        }
    }
    Corpus::from_works(works)
}
