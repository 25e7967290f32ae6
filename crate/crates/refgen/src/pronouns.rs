//! The English pronoun inventory shared by the rule systems and the metrics.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Case slots of the four-case English pronoun paradigm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PronounCase {
    Nominative,
    Accusative,
    Genitive,
    Reflexive,
}

/// A complete pronoun paradigm for one entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paradigm {
    pub nominative: String,
    pub accusative: String,
    pub genitive: String,
    pub reflexive: String,
}

impl Paradigm {
    pub fn form(&self, case: PronounCase) -> &str {
        match case {
            PronounCase::Nominative => &self.nominative,
            PronounCase::Accusative => &self.accusative,
            PronounCase::Genitive => &self.genitive,
            PronounCase::Reflexive => &self.reflexive,
        }
    }
}

/// Third-person pronoun lemmas; each owns one standard paradigm.
///
/// The declaration order doubles as the tie-breaking precedence when several
/// lemmas are equally frequent for an entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma {
    He,
    She,
    It,
    They,
}

impl Lemma {
    pub const ALL: [Lemma; 4] = [Lemma::He, Lemma::She, Lemma::It, Lemma::They];

    pub fn paradigm(self) -> Paradigm {
        let (nom, acc, gen, refl) = match self {
            Lemma::He => ("he", "him", "his", "himself"),
            Lemma::She => ("she", "her", "her", "herself"),
            Lemma::It => ("it", "it", "its", "itself"),
            Lemma::They => ("they", "them", "their", "themselves"),
        };
        Paradigm {
            nominative: nom.to_owned(),
            accusative: acc.to_owned(),
            genitive: gen.to_owned(),
            reflexive: refl.to_owned(),
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lemma::He => "he",
            Lemma::She => "she",
            Lemma::It => "it",
            Lemma::They => "they",
        })
    }
}

/// Maps a token to its third-person lemma, if it is a third-person pronoun.
pub fn third_person_lemma(token: &str) -> Option<Lemma> {
    match token.to_ascii_lowercase().as_str() {
        "he" | "him" | "his" | "himself" => Some(Lemma::He),
        "she" | "her" | "hers" | "herself" => Some(Lemma::She),
        "it" | "its" | "itself" => Some(Lemma::It),
        "they" | "them" | "their" | "theirs" | "themselves" => Some(Lemma::They),
        _ => None,
    }
}

/// Closed inventory of English personal, possessive, and reflexive pronouns,
/// used to reduce free-text predictions to an is-pronoun label.
pub const INVENTORY: &[&str] = &[
    "i",
    "me",
    "my",
    "mine",
    "myself",
    "we",
    "us",
    "our",
    "ours",
    "ourselves",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
];

/// True when the token is in the closed pronoun inventory (case-insensitive).
pub fn is_closed_class_pronoun(token: &str) -> bool {
    INVENTORY.contains(&token.to_ascii_lowercase().as_str())
}
