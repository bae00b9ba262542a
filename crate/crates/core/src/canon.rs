//! Answer and question canonicalization.
//!
//! Two strings that differ only in Unicode encoding, letter case or
//! whitespace runs must hash to the same value, so every text is run through
//! [`canonicalize`] before it reaches the KDF.

use std::fmt;
use std::str::FromStr;

use caseless::Caseless;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use unicode_normalization::UnicodeNormalization;

use crate::{Error, Result};

/// Identifier of a canonicalization rule set. Recorded in every document and
/// submission so rule changes never silently break verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CanonVersion {
    /// NFC, full case folding, trimmed, internal whitespace runs collapsed to
    /// one ASCII space.
    #[default]
    C1,
}

impl CanonVersion {
    pub const CURRENT: CanonVersion = CanonVersion::C1;

    pub fn tag(self) -> &'static str {
        match self {
            CanonVersion::C1 => "c1",
        }
    }
}

impl FromStr for CanonVersion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c1" => Ok(CanonVersion::C1),
            other => Err(Error::UnknownCanon(other.to_owned())),
        }
    }
}

impl fmt::Display for CanonVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl Serialize for CanonVersion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for CanonVersion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let tag = String::deserialize(deserializer)?;
        tag.parse().map_err(serde::de::Error::custom)
    }
}

pub fn canonicalize(raw: &str, version: CanonVersion) -> String {
    match version {
        CanonVersion::C1 => canonicalize_c1(raw),
    }
}

fn canonicalize_c1(raw: &str) -> String {
    // Case folding can emit decomposed sequences, so normalize again
    // afterwards; otherwise the rule would not be idempotent.
    let folded: String = raw.nfc().default_case_fold().nfc().collect();
    let mut out = String::with_capacity(folded.len());
    for word in folded.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// True when `raw` canonicalizes to the empty string. Such answers are
/// abstentions.
pub fn is_empty_answer(raw: &str, version: CanonVersion) -> bool {
    canonicalize(raw, version).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c1(s: &str) -> String {
        canonicalize(s, CanonVersion::C1)
    }

    #[test]
    fn collapses_case_and_spacing() {
        assert_eq!(c1("  The Quick   Brown Fox "), "the quick brown fox");
        assert_eq!(c1("Sarin"), c1("sarin"));
        assert_eq!(c1("a\t\n b"), "a b");
    }

    #[test]
    fn composes_combining_marks() {
        assert_eq!(c1("a\u{0301}"), c1("\u{00e1}"));
        assert_eq!(c1("A\u{0301}"), "\u{00e1}");
    }

    #[test]
    fn full_case_folding() {
        assert_eq!(c1("STRASSE"), c1("straße"));
        assert_eq!(c1("ΣΊΣΥΦΟΣ"), c1("σίσυφος"));
    }

    #[test]
    fn nfc_keeps_compatibility_forms_distinct() {
        // subscript two must not collapse into a plain digit
        assert_ne!(c1("H\u{2082}O"), c1("H2O"));
    }

    #[test]
    fn empty_answers() {
        assert!(is_empty_answer("", CanonVersion::C1));
        assert!(is_empty_answer("   \t ", CanonVersion::C1));
        assert!(is_empty_answer("\u{3000}\u{00a0}", CanonVersion::C1));
        assert!(!is_empty_answer("n/a", CanonVersion::C1));
    }

    #[test]
    fn tags() {
        assert_eq!("c1".parse::<CanonVersion>().unwrap(), CanonVersion::C1);
        assert!(matches!("c2".parse::<CanonVersion>(), Err(Error::UnknownCanon(t)) if t == "c2"));
        assert_eq!(serde_json::to_string(&CanonVersion::C1).unwrap(), "\"c1\"");
        assert!(serde_json::from_str::<CanonVersion>("\"C1\"").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn idempotent(s in any::<String>()) {
            let once = c1(&s);
            prop_assert_eq!(c1(&once), once);
        }

        #[test]
        fn idempotent_on_letters_and_marks(s in "[a-zA-Z\u{00c0}-\u{024f}\u{0300}-\u{036f}\u{1e00}-\u{1fff}ǰΐﬀ \t]{0,24}") {
            let once = c1(&s);
            prop_assert_eq!(c1(&once), once);
        }

        #[test]
        fn insensitive_to_case_and_spacing(words in proptest::collection::vec("[a-zA-Z0-9]{1,8}", 1..6), seps in proptest::collection::vec("[ \t\n]{1,4}", 6)) {
            let plain = words.join(" ").to_lowercase();
            let mut noisy = String::from(seps[0].as_str());
            for (i, w) in words.iter().enumerate() {
                if i > 0 {
                    noisy.push_str(&seps[i]);
                }
                noisy.push_str(&w.to_uppercase());
            }
            noisy.push_str(&seps[5]);
            prop_assert_eq!(c1(&noisy), c1(&plain));
        }
    }
}
