//! Feature-based referential form classification and content selection.
//!
//! A categorical Naive Bayes classifier with add-one smoothing predicts one
//! of three referential forms per slot. Content selection then retrieves the
//! most frequent training variant matching the entity, the predicted form and
//! the full feature signature, dropping the least important feature at a time
//! until a match exists; if nothing matches, pronouns fall back to the
//! paradigm lookup and everything else to the tag's proper-name expansion.
//!
//! Feature importance is measured by permutation: the mean accuracy drop on
//! the development split when one feature's values are shuffled. Everything
//! is deterministic given the training seed.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ContextPolicy, Corpus, Instance, ReferentialForm, Split};
use crate::features::{extract, fit_bins, BinnerSet, FeatureSchema, FeatureVector};
use crate::realize::{realize_proper_name, realize_pronoun, RealizedRe};
use crate::rules::PronounTable;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("training split is empty")]
    EmptyTraining,
    #[error("document `{doc_id}` slot {slot_index}: training slot has no gold_form")]
    MissingGoldForm { doc_id: String, slot_index: usize },
    #[error("feature vector does not match the model schema")]
    SchemaMismatch,
    #[error("unsupported model format version {found} (expected {MODEL_FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("model file: {0}")]
    Persistence(String),
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Classifier hyperparameters. The defaults are used throughout; there is no
/// hyperparameter search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Additive smoothing mass for value likelihoods.
    pub smoothing: f64,
    /// Shuffle repetitions per feature for permutation importance.
    pub importance_shuffles: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            smoothing: 1.0,
            importance_shuffles: 5,
        }
    }
}

const CLASS_ORDER: [ReferentialForm; 3] = [
    ReferentialForm::Pronoun,
    ReferentialForm::ProperName,
    ReferentialForm::Description,
];

/// Categorical Naive Bayes over string-valued features.
///
/// Feature values unseen in training share one reserved smoothing slot per
/// feature, so prediction is total. Classes absent from training are never
/// predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    smoothing: f64,
    class_counts: [u64; 3],
    /// Per feature: value vocabulary observed in training.
    vocabularies: Vec<BTreeMap<String, usize>>,
    /// Per feature, per class: count per vocabulary value.
    value_counts: Vec<[Vec<u64>; 3]>,
}

impl NaiveBayes {
    pub fn fit(vectors: &[FeatureVector], labels: &[ReferentialForm], smoothing: f64) -> Self {
        let n_features = vectors.first().map_or(0, |v| v.values.len());
        let mut vocabularies: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); n_features];
        for vector in vectors {
            for (fi, (_, value)) in vector.values.iter().enumerate() {
                let next = vocabularies[fi].len();
                vocabularies[fi].entry(value.clone()).or_insert(next);
            }
        }
        let mut class_counts = [0u64; 3];
        let mut value_counts: Vec<[Vec<u64>; 3]> = vocabularies
            .iter()
            .map(|vocab| std::array::from_fn(|_| vec![0u64; vocab.len()]))
            .collect();
        for (vector, label) in vectors.iter().zip(labels) {
            let ci = class_index(*label);
            class_counts[ci] += 1;
            for (fi, (_, value)) in vector.values.iter().enumerate() {
                let vi = vocabularies[fi][value];
                value_counts[fi][ci][vi] += 1;
            }
        }
        NaiveBayes {
            smoothing,
            class_counts,
            vocabularies,
            value_counts,
        }
    }

    /// Log-probability score of a class for a vector, up to a shared constant.
    fn score(&self, class: usize, vector: &FeatureVector) -> f64 {
        let total: u64 = self.class_counts.iter().sum();
        let mut score = ((self.class_counts[class] as f64 + self.smoothing)
            / (total as f64 + self.smoothing * 3.0))
            .ln();
        for (fi, (_, value)) in vector.values.iter().enumerate() {
            let vocab_size = self.vocabularies[fi].len();
            // One extra slot absorbs values unseen in training.
            let denom = self.class_counts[class] as f64
                + self.smoothing * (vocab_size as f64 + 1.0);
            let count = self.vocabularies[fi]
                .get(value)
                .map_or(0, |&vi| self.value_counts[fi][class][vi]);
            score += ((count as f64 + self.smoothing) / denom).ln();
        }
        score
    }

    pub fn predict(&self, vector: &FeatureVector) -> ReferentialForm {
        let mut best: Option<(usize, f64)> = None;
        for ci in 0..CLASS_ORDER.len() {
            if self.class_counts[ci] == 0 {
                continue;
            }
            let score = self.score(ci, vector);
            // Strict comparison keeps the earlier class on ties.
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((ci, score));
            }
        }
        CLASS_ORDER[best.map_or(1, |(ci, _)| ci)]
    }
}

fn class_index(form: ReferentialForm) -> usize {
    CLASS_ORDER
        .iter()
        .position(|c| *c == form)
        .expect("form is one of the three classes")
}

/// Key of one variant-index entry: entity tag, referential form, and a
/// prefix of the importance-ordered feature signature.
type VariantKey = (String, ReferentialForm, Vec<String>);
/// Multiset of observed gold REs with their counts.
type VariantCounts = BTreeMap<Vec<String>, u64>;

/// Multiset index of training REs keyed by entity, form and a prefix of the
/// importance-ordered feature signature.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariantIndex {
    entries: BTreeMap<VariantKey, VariantCounts>,
}

impl VariantIndex {
    /// Adds one training observation under every signature prefix.
    fn add(&mut self, tag: &str, form: ReferentialForm, signature: &[String], re: &[String]) {
        for prefix_len in 0..=signature.len() {
            let key = (
                tag.to_owned(),
                form,
                signature[..prefix_len].to_vec(),
            );
            *self
                .entries
                .entry(key)
                .or_default()
                .entry(re.to_vec())
                .or_default() += 1;
        }
    }

    /// The most frequent variant under a key; ties break toward the
    /// lexicographically smallest token sequence.
    pub fn most_frequent(
        &self,
        tag: &str,
        form: ReferentialForm,
        signature_prefix: &[String],
    ) -> Option<&[String]> {
        let key = (tag.to_owned(), form, signature_prefix.to_vec());
        let variants = self.entries.get(&key)?;
        let mut best: Option<(&Vec<String>, u64)> = None;
        for (re, count) in variants {
            if best.is_none_or(|(_, c)| *count > c) {
                best = Some((re, *count));
            }
        }
        best.map(|(re, _)| re.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct VariantEntryRecord {
    tag: String,
    form: ReferentialForm,
    signature: Vec<String>,
    variants: Vec<(Vec<String>, u64)>,
}

impl Serialize for VariantIndex {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let records: Vec<VariantEntryRecord> = self
            .entries
            .iter()
            .map(|((tag, form, signature), variants)| VariantEntryRecord {
                tag: tag.clone(),
                form: *form,
                signature: signature.clone(),
                variants: variants.iter().map(|(re, c)| (re.clone(), *c)).collect(),
            })
            .collect();
        records.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VariantIndex {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<VariantEntryRecord>::deserialize(deserializer)?;
        let mut entries: BTreeMap<VariantKey, VariantCounts> = BTreeMap::new();
        for record in records {
            entries.insert(
                (record.tag, record.form, record.signature),
                record.variants.into_iter().collect(),
            );
        }
        Ok(VariantIndex { entries })
    }
}

/// A trained referential form model: binners, classifier, importance order
/// and the content-selection index, persisted as one self-describing file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormModel {
    pub version: u32,
    pub schema: FeatureSchema,
    pub context: ContextPolicy,
    pub seed: u64,
    pub config: ClassifierConfig,
    pub binners: BinnerSet,
    pub classifier: NaiveBayes,
    /// Feature names, most important first.
    pub feature_importance: Vec<String>,
    pub variant_index: VariantIndex,
}

impl FormModel {
    pub fn save(&self, mut writer: impl Write) -> Result<(), MlError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| MlError::Persistence(e.to_string()))?;
        writer.write_all(json.as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(mut reader: impl Read) -> Result<Self, MlError> {
        let mut buf = String::new();
        reader.read_to_string(&mut buf)?;
        let model: FormModel =
            serde_json::from_str(&buf).map_err(|e| MlError::Persistence(e.to_string()))?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(MlError::VersionMismatch {
                found: model.version,
            });
        }
        Ok(model)
    }

    /// Reorders a schema-ordered vector's values by descending importance.
    fn importance_signature(&self, features: &FeatureVector) -> Vec<String> {
        self.feature_importance
            .iter()
            .filter_map(|name| features.get(name).map(str::to_owned))
            .collect()
    }
}

/// Trains a form model on the corpus's training split. Importance is
/// computed on the development split, falling back to the training split
/// when no development documents exist.
pub fn train(
    corpus: &Corpus,
    schema: FeatureSchema,
    config: ClassifierConfig,
    context: ContextPolicy,
    seed: u64,
) -> Result<FormModel, MlError> {
    let binners = fit_bins(corpus, schema, context)?;

    let mut train_vectors = Vec::new();
    let mut train_labels = Vec::new();
    let mut train_instances = Vec::new();
    for doc in corpus.split_documents(Split::Train) {
        for instance in crate::corpus::extract_instances(doc, context.window_for(doc)) {
            let form = instance.gold_form.ok_or_else(|| MlError::MissingGoldForm {
                doc_id: instance.doc_id.clone(),
                slot_index: instance.slot_index,
            })?;
            train_vectors.push(extract(&instance, schema, &binners, &corpus.registry));
            train_labels.push(form);
            train_instances.push(instance);
        }
    }
    if train_vectors.is_empty() {
        return Err(MlError::EmptyTraining);
    }

    let classifier = NaiveBayes::fit(&train_vectors, &train_labels, config.smoothing);

    let mut dev_vectors = Vec::new();
    let mut dev_labels = Vec::new();
    for doc in corpus.split_documents(Split::Dev) {
        for instance in crate::corpus::extract_instances(doc, context.window_for(doc)) {
            if let Some(form) = instance.gold_form {
                dev_vectors.push(extract(&instance, schema, &binners, &corpus.registry));
                dev_labels.push(form);
            }
        }
    }
    let (eval_vectors, eval_labels) = if dev_vectors.is_empty() {
        (&train_vectors, &train_labels)
    } else {
        (&dev_vectors, &dev_labels)
    };
    let feature_importance = permutation_importance(
        &classifier,
        schema,
        eval_vectors,
        eval_labels,
        seed,
        config.importance_shuffles,
    );

    let mut variant_index = VariantIndex::default();
    for (instance, vector) in train_instances.iter().zip(&train_vectors) {
        let form = instance.gold_form.expect("checked above");
        let signature: Vec<String> = feature_importance
            .iter()
            .filter_map(|name| vector.get(name).map(str::to_owned))
            .collect();
        variant_index.add(
            &instance.entity_tag,
            form,
            &signature,
            &instance.gold_re_tokens,
        );
    }

    Ok(FormModel {
        version: MODEL_FORMAT_VERSION,
        schema,
        context,
        seed,
        config,
        binners,
        classifier,
        feature_importance,
        variant_index,
    })
}

/// Predicts the referential form for a schema-matching feature vector.
pub fn predict_form(model: &FormModel, features: &FeatureVector) -> Result<ReferentialForm, MlError> {
    if !features.matches_schema(&model.schema) {
        return Err(MlError::SchemaMismatch);
    }
    Ok(model.classifier.predict(features))
}

fn accuracy(
    classifier: &NaiveBayes,
    vectors: &[FeatureVector],
    labels: &[ReferentialForm],
) -> f64 {
    if vectors.is_empty() {
        return 0.0;
    }
    let correct = vectors
        .iter()
        .zip(labels)
        .filter(|(v, l)| classifier.predict(v) == **l)
        .count();
    correct as f64 / vectors.len() as f64
}

/// Orders features by the mean accuracy drop when shuffling one feature's
/// values across the evaluation set. Ties keep schema order.
pub fn permutation_importance(
    classifier: &NaiveBayes,
    schema: FeatureSchema,
    vectors: &[FeatureVector],
    labels: &[ReferentialForm],
    seed: u64,
    shuffles: usize,
) -> Vec<String> {
    let names = schema.feature_names();
    let baseline = accuracy(classifier, vectors, labels);
    let mut drops: Vec<(usize, f64)> = Vec::with_capacity(names.len());
    for (fi, _) in names.iter().enumerate() {
        let mut total_drop = 0.0;
        for rep in 0..shuffles {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ ((fi as u64) << 20) ^ (rep as u64 + 1));
            let mut column: Vec<String> = vectors
                .iter()
                .map(|v| v.values[fi].1.clone())
                .collect();
            column.shuffle(&mut rng);
            let shuffled: Vec<FeatureVector> = vectors
                .iter()
                .zip(&column)
                .map(|(v, value)| {
                    let mut v = v.clone();
                    v.values[fi].1 = value.clone();
                    v
                })
                .collect();
            total_drop += baseline - accuracy(classifier, &shuffled, labels);
        }
        let mean = if shuffles == 0 {
            0.0
        } else {
            total_drop / shuffles as f64
        };
        drops.push((fi, mean));
    }
    drops.sort_by(|(ai, ad), (bi, bd)| bd.partial_cmp(ad).unwrap().then(ai.cmp(bi)));
    drops
        .into_iter()
        .map(|(fi, _)| names[fi].to_owned())
        .collect()
}

/// Recomputes the importance ordering of a trained model's features on one
/// split of a corpus (typically dev), using the model's own seed and shuffle
/// count.
pub fn feature_importance(model: &FormModel, corpus: &Corpus, split: Split) -> Vec<String> {
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for doc in corpus.split_documents(split) {
        for instance in crate::corpus::extract_instances(doc, model.context.window_for(doc)) {
            if let Some(form) = instance.gold_form {
                vectors.push(extract(
                    &instance,
                    model.schema,
                    &model.binners,
                    &corpus.registry,
                ));
                labels.push(form);
            }
        }
    }
    permutation_importance(
        &model.classifier,
        model.schema,
        &vectors,
        &labels,
        model.seed,
        model.config.importance_shuffles,
    )
}

/// Where a selected RE came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionSource {
    /// Found in the variant index after dropping `dropped` features.
    IndexMatch { dropped: usize },
    /// Nothing in the index; pronoun realized from the paradigm.
    PronounFallback,
    /// Nothing in the index; proper-name expansion of the tag.
    ProperNameFallback,
}

/// A selected RE with back-off diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub re: RealizedRe,
    /// Index lookups performed (at most one per signature prefix).
    pub lookups: usize,
    pub source: SelectionSource,
}

/// Selects the content of an RE for a predicted form: the most frequent
/// training variant under the longest matching feature-signature prefix.
pub fn select_content(
    model: &FormModel,
    instance: &Instance,
    form: ReferentialForm,
    features: &FeatureVector,
    table: &PronounTable,
) -> Selection {
    let signature = model.importance_signature(features);
    let mut lookups = 0;
    for prefix_len in (0..=signature.len()).rev() {
        lookups += 1;
        if let Some(variant) =
            model
                .variant_index
                .most_frequent(&instance.entity_tag, form, &signature[..prefix_len])
        {
            return Selection {
                re: RealizedRe {
                    tokens: variant.to_vec(),
                    form_used: form,
                },
                lookups,
                source: SelectionSource::IndexMatch {
                    dropped: signature.len() - prefix_len,
                },
            };
        }
    }
    match form {
        ReferentialForm::Pronoun => Selection {
            re: realize_pronoun(
                &instance.entity_tag,
                instance.grammatical_role,
                None,
                instance.is_sentence_initial(),
                table,
            ),
            lookups,
            source: SelectionSource::PronounFallback,
        },
        ReferentialForm::ProperName | ReferentialForm::Description => Selection {
            re: realize_proper_name(&instance.entity_tag),
            lookups,
            source: SelectionSource::ProperNameFallback,
        },
    }
}
