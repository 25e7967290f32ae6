//! Categorical feature extraction for the ML generators.
//!
//! Two feature schemas exist. The corpus-only schema needs nothing beyond the
//! delexicalized text; the linguistically informed schema adds grammatical
//! roles and entity meta-information, with extra plurality and paragraph
//! features for newswire-style corpora.
//!
//! Numeric antecedent distances are converted to categorical values so that
//! feature vectors can double as back-off keys during content selection.
//! Word and sentence distances use quantile bins fitted on the training
//! split; the newswire sentence and paragraph distances use fixed bins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ContextPolicy, Corpus, EntityRegistry, Instance, Split};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("training split is empty; cannot fit bins")]
    EmptyTraining,
    #[error("feature vector does not match schema: expected {expected:?}, got {got:?}")]
    SchemaMismatch { expected: Vec<String>, got: Vec<String> },
}

/// Sentinel value for features that are undefined on first mentions.
pub const NONE_VALUE: &str = "none";

/// Which feature set a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSchema {
    /// Features extractable from the delexicalized corpus alone.
    MlS,
    /// Linguistically informed features: roles, meta-information, recency.
    MlL {
        /// Adds plurality and paragraph-distance features.
        wsj: bool,
    },
}

impl FeatureSchema {
    pub fn feature_names(&self) -> Vec<&'static str> {
        match self {
            FeatureSchema::MlS => vec![
                "first_mention",
                "antecedent_same_sentence",
                "recency_sentences",
                "recency_words",
                "competition",
                "position",
            ],
            FeatureSchema::MlL { wsj: false } => vec![
                "grammatical_role",
                "antecedent_grammatical_role",
                "entity_type",
                "gender",
                "recency_words",
                "recency_sentences",
            ],
            FeatureSchema::MlL { wsj: true } => vec![
                "grammatical_role",
                "antecedent_grammatical_role",
                "entity_type",
                "plurality",
                "gender",
                "recency_words",
                "recency_sentences",
                "recency_paragraphs",
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.feature_names().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::fmt::Display for FeatureSchema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureSchema::MlS => f.write_str("ml-s"),
            FeatureSchema::MlL { wsj: false } => f.write_str("ml-l"),
            FeatureSchema::MlL { wsj: true } => f.write_str("ml-l-wsj"),
        }
    }
}

/// An ordered map from feature name to categorical value, in schema order.
/// Serializes as a JSON object whose keys keep that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub values: Vec<(String, String)>,
}

impl Serialize for FeatureVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.values.len()))?;
        for (name, value) in &self.values {
            map.serialize_entry(name, value)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl<'de> serde::de::Visitor<'de> for Visitor {
            type Value = FeatureVector;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a map of feature names to categorical values")
            }

            fn visit_map<A: serde::de::MapAccess<'de>>(
                self,
                mut access: A,
            ) -> Result<Self::Value, A::Error> {
                let mut values = Vec::new();
                while let Some(entry) = access.next_entry::<String, String>()? {
                    values.push(entry);
                }
                Ok(FeatureVector { values })
            }
        }
        deserializer.deserialize_map(Visitor)
    }
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn names(&self) -> Vec<String> {
        self.values.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn matches_schema(&self, schema: &FeatureSchema) -> bool {
        self.values.len() == schema.len()
            && self
                .values
                .iter()
                .zip(schema.feature_names())
                .all(|((n, _), expected)| n == expected)
    }
}

/// Binning scheme for one numeric feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum BinScheme {
    /// Boundaries at training quantiles; a value equal to a boundary falls in
    /// the lower bin.
    Quantile { groups: usize },
    /// Same sentence, one sentence away, or further.
    SentenceFixed,
    /// Same paragraph, one away, two away, or further.
    ParagraphFixed,
}

/// A fitted binner for one feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binner {
    pub feature: String,
    #[serde(flatten)]
    pub scheme: BinScheme,
    /// Strictly increasing quantile boundaries; empty for fixed schemes.
    pub boundaries: Vec<u64>,
}

impl Binner {
    pub fn label(&self, distance: u64) -> String {
        match self.scheme {
            BinScheme::Quantile { .. } => {
                let idx = self.boundaries.partition_point(|b| *b < distance);
                format!("q{idx}")
            }
            BinScheme::SentenceFixed => match distance {
                0 => "same".to_owned(),
                1 => "one_away".to_owned(),
                _ => "more".to_owned(),
            },
            BinScheme::ParagraphFixed => match distance {
                0 => "same".to_owned(),
                1 => "one_away".to_owned(),
                2 => "two_away".to_owned(),
                _ => "more".to_owned(),
            },
        }
    }
}

/// The set of binners a model was fitted with, keyed by feature name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinnerSet {
    pub binners: BTreeMap<String, Binner>,
}

impl BinnerSet {
    fn label(&self, feature: &str, distance: u64) -> String {
        match self.binners.get(feature) {
            Some(binner) => binner.label(distance),
            None => distance.to_string(),
        }
    }
}

/// Nearest-rank quantile boundaries for `groups` bins, deduplicated to keep
/// them strictly increasing.
fn quantile_boundaries(values: &mut [u64], groups: usize) -> Vec<u64> {
    values.sort_unstable();
    let n = values.len();
    let mut boundaries = Vec::new();
    for i in 1..groups {
        let rank = (i * n).div_ceil(groups).max(1);
        let boundary = values[rank - 1];
        if boundaries.last() != Some(&boundary) {
            boundaries.push(boundary);
        }
    }
    boundaries
}

/// Fits quantile binners on antecedent distances over the training split.
/// Fixed-bin schemes take their literal definitions and need no fitting data.
pub fn fit_bins(
    corpus: &Corpus,
    schema: FeatureSchema,
    context: ContextPolicy,
) -> Result<BinnerSet, FeatureError> {
    let mut word_distances = Vec::new();
    let mut sentence_distances = Vec::new();
    let mut any_training = false;
    for doc in corpus.split_documents(Split::Train) {
        any_training = true;
        for instance in crate::corpus::extract_instances(doc, context.window_for(doc)) {
            if let Some(antecedent) = instance.antecedent() {
                word_distances
                    .push((instance.abs_token_index - antecedent.abs_token_index) as u64);
                sentence_distances
                    .push((instance.current_sentence_index - antecedent.sentence_index) as u64);
            }
        }
    }
    if !any_training {
        return Err(FeatureError::EmptyTraining);
    }

    let mut binners = BTreeMap::new();
    let mut add = |feature: &str, scheme: BinScheme, boundaries: Vec<u64>| {
        binners.insert(
            feature.to_owned(),
            Binner {
                feature: feature.to_owned(),
                scheme,
                boundaries,
            },
        );
    };

    if word_distances.is_empty() {
        // No subsequent mentions in training: degenerate single-bin binners.
        add("recency_words", BinScheme::Quantile { groups: 5 }, Vec::new());
    } else {
        let bounds = quantile_boundaries(&mut word_distances, 5);
        add("recency_words", BinScheme::Quantile { groups: 5 }, bounds);
    }
    match schema {
        FeatureSchema::MlS | FeatureSchema::MlL { wsj: false } => {
            let bounds = if sentence_distances.is_empty() {
                Vec::new()
            } else {
                quantile_boundaries(&mut sentence_distances, 2)
            };
            add("recency_sentences", BinScheme::Quantile { groups: 2 }, bounds);
        }
        FeatureSchema::MlL { wsj: true } => {
            add("recency_sentences", BinScheme::SentenceFixed, Vec::new());
            add("recency_paragraphs", BinScheme::ParagraphFixed, Vec::new());
        }
    }
    Ok(BinnerSet { binners })
}

fn count_tag(tokens: &[crate::corpus::Token], tag: &str) -> usize {
    tokens
        .iter()
        .filter(|t| t.is_entity_slot && t.surface == tag)
        .count()
}

fn yes_no(value: bool) -> String {
    if value { "yes" } else { "no" }.to_owned()
}

fn role_value(role: Option<crate::corpus::GrammaticalRole>) -> String {
    match role {
        Some(r) => r.to_string(),
        None => NONE_VALUE.to_owned(),
    }
}

/// Position of the target among its entity's mentions, judged within the
/// context window: first, second, middle, or last.
fn position_value(instance: &Instance) -> String {
    let before = count_tag(&instance.pre_context, &instance.entity_tag);
    let after = count_tag(&instance.post_context, &instance.entity_tag);
    if before == 0 {
        "first"
    } else if after == 0 {
        "last"
    } else if before == 1 {
        "second"
    } else {
        "middle"
    }
    .to_owned()
}

/// Whether any other entity's RE sits strictly between the target and its
/// antecedent.
fn competition_value(instance: &Instance) -> String {
    let antecedent = match instance.antecedent() {
        Some(a) => a,
        None => return NONE_VALUE.to_owned(),
    };
    let intervening = instance.preceding_slots.iter().any(|cs| {
        cs.abs_token_index > antecedent.abs_token_index && cs.entity_tag != instance.entity_tag
    });
    yes_no(intervening)
}

/// Extracts the corpus-only feature vector.
pub fn extract_ml_s(instance: &Instance, binners: &BinnerSet) -> FeatureVector {
    let antecedent = instance.antecedent();
    let mut values = Vec::with_capacity(6);
    values.push(("first_mention".to_owned(), yes_no(antecedent.is_none())));
    match antecedent {
        None => {
            for name in [
                "antecedent_same_sentence",
                "recency_sentences",
                "recency_words",
                "competition",
            ] {
                values.push((name.to_owned(), NONE_VALUE.to_owned()));
            }
        }
        Some(a) => {
            values.push((
                "antecedent_same_sentence".to_owned(),
                yes_no(a.sentence_index == instance.current_sentence_index),
            ));
            let sent_d = (instance.current_sentence_index - a.sentence_index) as u64;
            values.push((
                "recency_sentences".to_owned(),
                binners.label("recency_sentences", sent_d),
            ));
            let word_d = (instance.abs_token_index - a.abs_token_index) as u64;
            values.push((
                "recency_words".to_owned(),
                binners.label("recency_words", word_d),
            ));
            values.push(("competition".to_owned(), competition_value(instance)));
        }
    }
    values.push(("position".to_owned(), position_value(instance)));
    FeatureVector { values }
}

/// Extracts the linguistically informed feature vector.
pub fn extract_ml_l(
    instance: &Instance,
    binners: &BinnerSet,
    registry: &EntityRegistry,
    wsj: bool,
) -> FeatureVector {
    let meta = registry.meta(&instance.entity_tag);
    let antecedent = instance.antecedent();
    let mut values = Vec::with_capacity(8);
    values.push((
        "grammatical_role".to_owned(),
        role_value(instance.grammatical_role),
    ));
    values.push((
        "antecedent_grammatical_role".to_owned(),
        match antecedent {
            Some(a) => role_value(a.grammatical_role),
            None => NONE_VALUE.to_owned(),
        },
    ));
    values.push((
        "entity_type".to_owned(),
        meta.entity_type.to_ascii_lowercase(),
    ));
    if wsj {
        values.push((
            "plurality".to_owned(),
            serde_value_name(&meta.plurality),
        ));
    }
    values.push(("gender".to_owned(), serde_value_name(&meta.gender)));
    match antecedent {
        None => {
            values.push(("recency_words".to_owned(), NONE_VALUE.to_owned()));
            values.push(("recency_sentences".to_owned(), NONE_VALUE.to_owned()));
            if wsj {
                values.push(("recency_paragraphs".to_owned(), NONE_VALUE.to_owned()));
            }
        }
        Some(a) => {
            let word_d = (instance.abs_token_index - a.abs_token_index) as u64;
            values.push((
                "recency_words".to_owned(),
                binners.label("recency_words", word_d),
            ));
            let sent_d = (instance.current_sentence_index - a.sentence_index) as u64;
            values.push((
                "recency_sentences".to_owned(),
                binners.label("recency_sentences", sent_d),
            ));
            if wsj {
                let para_d = match (instance.paragraph_index, a.paragraph_index) {
                    (Some(p), Some(q)) => (p.saturating_sub(q)) as u64,
                    _ => 0,
                };
                values.push((
                    "recency_paragraphs".to_owned(),
                    binners.label("recency_paragraphs", para_d),
                ));
            }
        }
    }
    FeatureVector { values }
}

fn serde_value_name<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_else(|| "unknown".to_owned())
}

/// Extracts the feature vector for the given schema.
pub fn extract(
    instance: &Instance,
    schema: FeatureSchema,
    binners: &BinnerSet,
    registry: &EntityRegistry,
) -> FeatureVector {
    match schema {
        FeatureSchema::MlS => extract_ml_s(instance, binners),
        FeatureSchema::MlL { wsj } => extract_ml_l(instance, binners, registry, wsj),
    }
}
