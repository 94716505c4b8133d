//! Key-notation parsing and degree calculus.
//!
//! A key is a diatonic letter, an accidental count, and a mode. Its *degree*
//! is the signed number of accidentals in the key signature: sharps count
//! positive, flats negative, so C major / a minor sit at 0, G major / e minor
//! at +1, F major / d minor at -1, and so on around the circle of fifths.
//! Degrees, not letter names, are what every analysis downstream consumes.

use std::fmt;

use thiserror::Error;

/// The seven diatonic letter names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Letter {
    pub const ALL: [Letter; 7] = [
        Letter::A,
        Letter::B,
        Letter::C,
        Letter::D,
        Letter::E,
        Letter::F,
        Letter::G,
    ];

    /// Position on the line of fifths with C at 0: F -1, C 0, G 1, D 2, A 3,
    /// E 4, B 5. A natural major key's degree is exactly this value.
    pub fn fifths(self) -> i8 {
        match self {
            Letter::F => -1,
            Letter::C => 0,
            Letter::G => 1,
            Letter::D => 2,
            Letter::A => 3,
            Letter::E => 4,
            Letter::B => 5,
        }
    }

    fn from_char(c: char) -> Option<Letter> {
        match c.to_ascii_uppercase() {
            'A' => Some(Letter::A),
            'B' => Some(Letter::B),
            'C' => Some(Letter::C),
            'D' => Some(Letter::D),
            'E' => Some(Letter::E),
            'F' => Some(Letter::F),
            'G' => Some(Letter::G),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::A => 'A',
            Letter::B => 'B',
            Letter::C => 'C',
            Letter::D => 'D',
            Letter::E => 'E',
            Letter::F => 'F',
            Letter::G => 'G',
        }
    }
}

/// Major or minor mode. Canonical notation writes major keys with capital
/// letters and minor keys in lower case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Major,
    Minor,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Major => write!(f, "major"),
            Mode::Minor => write!(f, "minor"),
        }
    }
}

/// Signed accidental count of a key signature: sharps positive, flats
/// negative. In the default configuration values stay within [-7, 7].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Degree(pub i8);

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Range policy for keys. The default rejects anything whose degree falls
/// outside [-7, 7] (equivalently, double accidentals); `extended_range`
/// admits double accidentals and degrees up to +/-14 for theoretical keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KeyConfig {
    pub extended_range: bool,
}

impl KeyConfig {
    pub const EXTENDED: KeyConfig = KeyConfig {
        extended_range: true,
    };

    fn max_accidental(self) -> i8 {
        if self.extended_range {
            2
        } else {
            1
        }
    }

    fn max_degree(self) -> i8 {
        if self.extended_range {
            14
        } else {
            7
        }
    }
}

/// A parsed tonal key: letter, accidental count, mode.
///
/// Keys are validated on construction, so every `Key` in existence has a
/// degree within its configured range. Values are immutable and freely
/// shareable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key {
    letter: Letter,
    accidental: i8,
    mode: Mode,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("malformed key {input:?}: {reason}")]
    MalformedKey { input: String, reason: String },
    /// The key is spelled correctly but its degree (or accidental count)
    /// falls outside the configured range.
    #[error("key {key:?} has degree {degree} outside the allowed range +/-{limit}")]
    ExtendedRangeKey {
        key: String,
        degree: i8,
        limit: i8,
    },
}

fn malformed(input: &str, reason: impl Into<String>) -> KeyError {
    KeyError::MalformedKey {
        input: input.to_string(),
        reason: reason.into(),
    }
}

impl Key {
    /// Construct a key under the default range policy.
    pub fn new(letter: Letter, accidental: i8, mode: Mode) -> Result<Key, KeyError> {
        Key::new_with(letter, accidental, mode, KeyConfig::default())
    }

    /// Construct a key, validating the accidental count and derived degree
    /// against `cfg`.
    pub fn new_with(
        letter: Letter,
        accidental: i8,
        mode: Mode,
        cfg: KeyConfig,
    ) -> Result<Key, KeyError> {
        let key = Key {
            letter,
            accidental,
            mode,
        };
        if accidental.abs() > 2 {
            return Err(malformed(
                &key.canonical(),
                "more than two accidentals is not a tonal key",
            ));
        }
        let degree = key.raw_degree();
        if accidental.abs() > cfg.max_accidental() || degree.abs() > cfg.max_degree() {
            return Err(KeyError::ExtendedRangeKey {
                key: key.canonical(),
                degree,
                limit: cfg.max_degree(),
            });
        }
        Ok(key)
    }

    pub fn letter(&self) -> Letter {
        self.letter
    }

    pub fn accidental(&self) -> i8 {
        self.accidental
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn raw_degree(&self) -> i8 {
        let relative_shift = match self.mode {
            Mode::Major => 0,
            // A minor key shares its signature with the major key three
            // fifths up, i.e. sits three steps flatward of its own letter.
            Mode::Minor => -3,
        };
        self.letter.fifths() + relative_shift + 7 * self.accidental
    }

    /// The signed accidental count of this key's signature.
    pub fn degree(&self) -> Degree {
        Degree(self.raw_degree())
    }

    /// Canonical notation: letter (upper case for major, lower for minor)
    /// followed by `#` or `b` repeated for each accidental.
    ///
    /// `parse_key` inverts this for every valid key.
    pub fn canonical(&self) -> String {
        let letter = match self.mode {
            Mode::Major => self.letter.as_char(),
            Mode::Minor => self.letter.as_char().to_ascii_lowercase(),
        };
        let mut out = String::new();
        out.push(letter);
        for _ in 0..self.accidental.abs() {
            out.push(if self.accidental > 0 { '#' } else { 'b' });
        }
        out
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical())
    }
}

/// Canonical textual form of a key (see [`Key::canonical`]).
pub fn format_key(key: &Key) -> String {
    key.canonical()
}

/// Parse key notation under the default range policy.
///
/// Accepted grammar: a diatonic letter, optional accidental tokens
/// (`#`, `♯`, `s` for sharp; `b`, `♭` for flat; or the separated words
/// `-sharp` / `-flat`), and an optional mode word `major`/`maj`/`minor`/`min`
/// separated by a space or hyphen. Without a mode word, an upper-case letter
/// means major and a lower-case letter minor; an explicit mode word always
/// wins over letter case. Parsing is pure and total: the same input yields
/// the same result every time.
pub fn parse_key(text: &str) -> Result<Key, KeyError> {
    parse_key_with(text, KeyConfig::default())
}

/// Parse key notation under an explicit range policy.
pub fn parse_key_with(text: &str, cfg: KeyConfig) -> Result<Key, KeyError> {
    let trimmed = text.trim();
    let mut chars = trimmed.chars();
    let first = chars
        .next()
        .ok_or_else(|| malformed(text, "empty input"))?;
    let letter = Letter::from_char(first)
        .ok_or_else(|| malformed(text, format!("{first:?} is not a diatonic letter A-G")))?;
    let case_mode = if first.is_lowercase() {
        Mode::Minor
    } else {
        Mode::Major
    };

    let mut sharps: i8 = 0;
    let mut flats: i8 = 0;
    let mut suffix_mode: Option<Mode> = None;
    let mut rest = chars.as_str();

    while !rest.is_empty() {
        if suffix_mode.is_some() {
            return Err(malformed(text, "trailing input after mode word"));
        }
        let c = rest.chars().next().unwrap();
        match c {
            '#' | '♯' => {
                sharps += 1;
                rest = &rest[c.len_utf8()..];
            }
            'b' | '♭' => {
                flats += 1;
                rest = &rest[c.len_utf8()..];
            }
            's' | 'S' => {
                sharps += 1;
                rest = &rest[1..];
            }
            '-' | ' ' | '\t' => {
                let after_sep = if c == '-' {
                    &rest[1..]
                } else {
                    rest.trim_start()
                };
                let word: String = after_sep
                    .chars()
                    .take_while(|ch| ch.is_alphabetic())
                    .collect();
                rest = &after_sep[word.len()..];
                match word.to_ascii_lowercase().as_str() {
                    "sharp" => sharps += 1,
                    "flat" => flats += 1,
                    "major" | "maj" => suffix_mode = Some(Mode::Major),
                    "minor" | "min" => suffix_mode = Some(Mode::Minor),
                    "" => return Err(malformed(text, "dangling separator")),
                    other => {
                        return Err(malformed(
                            text,
                            format!("unrecognized token {other:?}"),
                        ))
                    }
                }
            }
            other => {
                return Err(malformed(
                    text,
                    format!("unrecognized character {other:?}"),
                ))
            }
        }
    }

    if sharps > 0 && flats > 0 {
        return Err(malformed(text, "mixed sharp and flat accidentals"));
    }
    if sharps > 2 || flats > 2 {
        return Err(malformed(
            text,
            "more than two accidentals is not a tonal key",
        ));
    }
    Key::new_with(
        letter,
        sharps - flats,
        suffix_mode.unwrap_or(case_mode),
        cfg,
    )
}

/// Representative of a degree modulo 12 lying in [-5, 6], identifying
/// enharmonically equivalent spellings (degree 7, C#/a#, with degree -5,
/// Db/bb). Only the torus geometry uses this; everywhere else the raw
/// degree is kept because the two spellings are distinct compositional
/// choices.
pub fn enharmonic_class(d: Degree) -> i8 {
    let m = (d.0 as i32).rem_euclid(12);
    (if m > 6 { m - 12 } else { m }) as i8
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The full 30-key degree table, majors then minors, one entry per
    /// canonical spelling: (notation, degree).
    pub(crate) const DEGREE_TABLE: [(&str, i8); 30] = [
        ("Cb", -7),
        ("Gb", -6),
        ("Db", -5),
        ("Ab", -4),
        ("Eb", -3),
        ("Bb", -2),
        ("F", -1),
        ("C", 0),
        ("G", 1),
        ("D", 2),
        ("A", 3),
        ("E", 4),
        ("B", 5),
        ("F#", 6),
        ("C#", 7),
        ("ab", -7),
        ("eb", -6),
        ("bb", -5),
        ("f", -4),
        ("c", -3),
        ("g", -2),
        ("d", -1),
        ("a", 0),
        ("e", 1),
        ("b", 2),
        ("f#", 3),
        ("c#", 4),
        ("g#", 5),
        ("d#", 6),
        ("a#", 7),
    ];

    fn key(s: &str) -> Key {
        parse_key(s).unwrap_or_else(|e| panic!("{s:?} should parse: {e}"))
    }

    #[test]
    fn degree_table_conformance() {
        for (notation, expected) in DEGREE_TABLE {
            let k = key(notation);
            assert_eq!(
                k.degree(),
                Degree(expected),
                "degree of {notation} should be {expected}"
            );
        }
    }

    #[test]
    fn relative_major_minor_share_degree() {
        // Majors and minors pair up column-wise in the degree table.
        for i in 0..15 {
            let (major, d_major) = DEGREE_TABLE[i];
            let (minor, d_minor) = DEGREE_TABLE[i + 15];
            assert_eq!(d_major, d_minor);
            assert_eq!(key(major).degree(), key(minor).degree());
        }
    }

    #[test]
    fn parse_examples() {
        assert_eq!(key("C"), Key::new(Letter::C, 0, Mode::Major).unwrap());
        assert_eq!(key("f#"), Key::new(Letter::F, 1, Mode::Minor).unwrap());
        assert_eq!(
            key("Eb major"),
            Key::new(Letter::E, -1, Mode::Major).unwrap()
        );
        // Explicit mode word overrides letter case.
        assert_eq!(
            key("e♭ Major"),
            Key::new(Letter::E, -1, Mode::Major).unwrap()
        );
        assert_eq!(key("D min"), Key::new(Letter::D, 0, Mode::Minor).unwrap());
        assert_eq!(key("g-minor"), key("g"));
        assert_eq!(key("B-flat minor"), key("bb"));
        assert_eq!(key("Fs"), key("F#"));
        assert_eq!(key("  C  "), key("C"));
    }

    #[test]
    fn parse_rejects_non_diatonic_letter() {
        assert!(matches!(
            parse_key("H"),
            Err(KeyError::MalformedKey { .. })
        ));
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "   ", "C!", "C major tail", "Cx", "E-", "E flatt", "F#b"] {
            assert!(
                matches!(parse_key(bad), Err(KeyError::MalformedKey { .. })),
                "{bad:?} should be malformed"
            );
        }
    }

    #[test]
    fn out_of_range_keys_need_extended_config() {
        // B# major has degree 12: single accidental, out of default range.
        assert!(matches!(
            parse_key("B#"),
            Err(KeyError::ExtendedRangeKey { degree: 12, .. })
        ));
        assert_eq!(
            parse_key_with("B#", KeyConfig::EXTENDED).unwrap().degree(),
            Degree(12)
        );
        // Double accidentals are extended-range by definition.
        assert!(matches!(
            parse_key("C##"),
            Err(KeyError::ExtendedRangeKey { .. })
        ));
        assert_eq!(
            parse_key_with("C##", KeyConfig::EXTENDED).unwrap().degree(),
            Degree(14)
        );
        // Even extended range stops at +/-14.
        assert!(matches!(
            parse_key_with("B##", KeyConfig::EXTENDED),
            Err(KeyError::ExtendedRangeKey { degree: 19, .. })
        ));
        // Triple accidentals are malformed, not merely out of range.
        assert!(matches!(
            parse_key_with("C###", KeyConfig::EXTENDED),
            Err(KeyError::MalformedKey { .. })
        ));
    }

    /// Every letter/accidental/case/suffix combination, checked against a
    /// Key constructed directly from the same components. This is the
    /// independent truth table for the precedence rules.
    #[test]
    fn parse_truth_table() {
        let accidentals: [(&str, i8); 7] = [
            ("", 0),
            ("#", 1),
            ("♯", 1),
            ("s", 1),
            ("-sharp", 1),
            ("b", -1),
            ("♭", -1),
        ];
        let suffixes: [(&str, Option<Mode>); 7] = [
            ("", None),
            (" major", Some(Mode::Major)),
            (" MAJOR", Some(Mode::Major)),
            ("-maj", Some(Mode::Major)),
            (" minor", Some(Mode::Minor)),
            ("-min", Some(Mode::Minor)),
            (" Minor", Some(Mode::Minor)),
        ];
        for letter in Letter::ALL {
            for upper in [true, false] {
                for (acc_text, acc) in accidentals {
                    for (suffix, suffix_mode) in suffixes {
                        let c = if upper {
                            letter.as_char()
                        } else {
                            letter.as_char().to_ascii_lowercase()
                        };
                        let text = format!("{c}{acc_text}{suffix}");
                        let case_mode = if upper { Mode::Major } else { Mode::Minor };
                        let mode = suffix_mode.unwrap_or(case_mode);
                        let expected = Key::new(letter, acc, mode);
                        let got = parse_key(&text);
                        match expected {
                            Ok(k) => assert_eq!(
                                got.as_ref(),
                                Ok(&k),
                                "{text:?} should parse to {k:?}, got {got:?}"
                            ),
                            Err(KeyError::ExtendedRangeKey { .. }) => assert!(
                                matches!(got, Err(KeyError::ExtendedRangeKey { .. })),
                                "{text:?} should be out of range, got {got:?}"
                            ),
                            Err(e) => panic!("unexpected construction error {e}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn format_examples() {
        assert_eq!(format_key(&Key::new(Letter::F, 1, Mode::Major).unwrap()), "F#");
        assert_eq!(format_key(&Key::new(Letter::B, -1, Mode::Minor).unwrap()), "bb");
        assert_eq!(format_key(&Key::new(Letter::D, 0, Mode::Major).unwrap()), "D");
        // Display mirrors the canonical form.
        assert_eq!(Key::new(Letter::E, -1, Mode::Minor).unwrap().to_string(), "eb");
    }

    #[test]
    fn parse_inverts_format_on_all_in_range_keys() {
        let mut seen = 0;
        for letter in Letter::ALL {
            for accidental in -1..=1 {
                for mode in [Mode::Major, Mode::Minor] {
                    if let Ok(k) = Key::new(letter, accidental, mode) {
                        assert_eq!(parse_key(&k.canonical()), Ok(k));
                        seen += 1;
                    }
                }
            }
        }
        // Exactly the 30 tabulated keys are constructible by default.
        assert_eq!(seen, 30);
    }

    #[test]
    fn parse_inverts_format_on_extended_keys() {
        for letter in Letter::ALL {
            for accidental in -2..=2 {
                for mode in [Mode::Major, Mode::Minor] {
                    if let Ok(k) = Key::new_with(letter, accidental, mode, KeyConfig::EXTENDED) {
                        assert_eq!(parse_key_with(&k.canonical(), KeyConfig::EXTENDED), Ok(k));
                    }
                }
            }
        }
    }

    #[test]
    fn enharmonic_class_examples() {
        assert_eq!(enharmonic_class(Degree(7)), -5);
        assert_eq!(enharmonic_class(Degree(0)), 0);
        assert_eq!(enharmonic_class(Degree(-6)), 6);
        assert_eq!(enharmonic_class(Degree(6)), 6);
    }

    #[test]
    fn enharmonic_class_is_mod_12_representative() {
        for d in -20..=20i8 {
            let c = enharmonic_class(Degree(d));
            assert!((-5..=6).contains(&c), "class({d}) = {c} out of [-5, 6]");
            assert_eq!((c as i32 - d as i32).rem_euclid(12), 0);
            // Idempotence.
            assert_eq!(enharmonic_class(Degree(c)), c);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Parsing never panics and is deterministic on arbitrary input.
            #[test]
            fn parse_is_total_and_pure(s in "\\PC{0,12}") {
                let a = parse_key(&s);
                let b = parse_key(&s);
                prop_assert_eq!(a, b);
            }
        }
    }
}
