//! Generation and evaluation drivers shared by the CLI and the C API.
//!
//! Predictions are exchanged as JSONL, one slot per line:
//!
//! ```json
//! {"doc_id": "d1", "slot_index": 0, "re": ["the", "school"], "form": "description"}
//! ```
//!
//! `form` is optional. Rule systems emit `pronominal`/`non_pronominal`, the
//! ML systems emit `pronoun`/`proper_name`/`description`, and external
//! prediction files may omit it, in which case pronominality is judged from
//! the RE string itself.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{extract_instances, ContextPolicy, Corpus, Document, Split};
use crate::features::extract;
use crate::metrics::{
    evaluate_documents, EvalOptions, EvalReport, MetricsError, ScoredPrediction,
};
use crate::ml::{predict_form, select_content, FormModel, MlError};
use crate::realize::realize;
use crate::rules::{build_pronoun_table, rreg_l, rreg_s, FormDecision, PronounTable};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("line {line}: {message}")]
    PredictionSchema { line: usize, message: String },
    #[error("predictions do not align with the corpus: {0}")]
    Alignment(String),
    #[error("system `{system}` requires a model file")]
    ModelRequired { system: SystemKind },
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The REG systems runnable from the pipeline, plus `external` for scoring
/// prediction files produced elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    RregS,
    RregL,
    MlS,
    MlL,
    External,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SystemKind::RregS => "rreg-s",
            SystemKind::RregL => "rreg-l",
            SystemKind::MlS => "ml-s",
            SystemKind::MlL => "ml-l",
            SystemKind::External => "external",
        })
    }
}

impl FromStr for SystemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rreg-s" => Ok(SystemKind::RregS),
            "rreg-l" => Ok(SystemKind::RregL),
            "ml-s" => Ok(SystemKind::MlS),
            "ml-l" => Ok(SystemKind::MlL),
            "external" => Ok(SystemKind::External),
            other => Err(format!(
                "unknown system `{other}` (expected rreg-s, rreg-l, ml-s, ml-l, external)"
            )),
        }
    }
}

/// One predicted RE for one slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    pub slot_index: usize,
    pub re: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
}

/// One rule decision for one slot, for inspection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub doc_id: String,
    pub slot_index: usize,
    pub form: crate::rules::RuleForm,
    pub rationale: crate::rules::Rationale,
}

pub fn read_predictions(reader: impl BufRead) -> Result<Vec<Prediction>, PipelineError> {
    let mut predictions = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let prediction: Prediction =
            serde_json::from_str(line.trim()).map_err(|e| PipelineError::PredictionSchema {
                line: idx + 1,
                message: e.to_string(),
            })?;
        predictions.push(prediction);
    }
    Ok(predictions)
}

pub fn write_predictions(
    mut writer: impl Write,
    predictions: &[Prediction],
) -> Result<(), PipelineError> {
    for prediction in predictions {
        let json = serde_json::to_string(prediction).map_err(|e| {
            PipelineError::PredictionSchema {
                line: 0,
                message: e.to_string(),
            }
        })?;
        writeln!(writer, "{json}")?;
    }
    Ok(())
}

/// Output of a generation run.
pub struct GenerationOutput {
    pub predictions: Vec<Prediction>,
    /// Rule decisions, present for the rule systems only.
    pub decisions: Vec<DecisionRecord>,
}

fn generate_rules_for_doc(
    doc: &Document,
    system: SystemKind,
    table: &PronounTable,
    context: ContextPolicy,
) -> (Vec<Prediction>, Vec<DecisionRecord>) {
    let instances = extract_instances(doc, context.window_for(doc));
    let mut predictions = Vec::with_capacity(instances.len());
    let mut decisions = Vec::with_capacity(instances.len());
    for instance in &instances {
        let decision: FormDecision = match system {
            SystemKind::RregS => rreg_s(instance, table),
            SystemKind::RregL => rreg_l(instance, table),
            _ => unreachable!("rule generator called with {system}"),
        };
        let realized = realize(&decision, instance, table);
        predictions.push(Prediction {
            doc_id: doc.doc_id.clone(),
            slot_index: instance.slot_index,
            re: realized.tokens,
            form: Some(decision.form.to_string()),
        });
        decisions.push(DecisionRecord {
            doc_id: doc.doc_id.clone(),
            slot_index: instance.slot_index,
            form: decision.form,
            rationale: decision.rationale,
        });
    }
    (predictions, decisions)
}

fn generate_ml_for_doc(
    doc: &Document,
    corpus: &Corpus,
    model: &FormModel,
    table: &PronounTable,
    context: ContextPolicy,
) -> Result<Vec<Prediction>, PipelineError> {
    let instances = extract_instances(doc, context.window_for(doc));
    let mut predictions = Vec::with_capacity(instances.len());
    for instance in &instances {
        let features = extract(instance, model.schema, &model.binners, &corpus.registry);
        let form = predict_form(model, &features)?;
        let selection = select_content(model, instance, form, &features, table);
        predictions.push(Prediction {
            doc_id: doc.doc_id.clone(),
            slot_index: instance.slot_index,
            re: selection.re.tokens,
            form: Some(form.to_string()),
        });
    }
    Ok(predictions)
}

/// Runs a generator over one split. Documents are processed in parallel and
/// merged in corpus order, so output is deterministic.
pub fn generate(
    corpus: &Corpus,
    split: Split,
    system: SystemKind,
    model: Option<&FormModel>,
    context_override: Option<ContextPolicy>,
) -> Result<GenerationOutput, PipelineError> {
    let documents: Vec<&Document> = corpus.split_documents(split).collect();
    match system {
        SystemKind::RregS | SystemKind::RregL => {
            let table = build_pronoun_table(corpus);
            let context = context_override.unwrap_or_default();
            let per_doc: Vec<(Vec<Prediction>, Vec<DecisionRecord>)> = documents
                .par_iter()
                .map(|doc| generate_rules_for_doc(doc, system, &table, context))
                .collect();
            let mut predictions = Vec::new();
            let mut decisions = Vec::new();
            for (p, d) in per_doc {
                predictions.extend(p);
                decisions.extend(d);
            }
            Ok(GenerationOutput {
                predictions,
                decisions,
            })
        }
        SystemKind::MlS | SystemKind::MlL => {
            let model = model.ok_or(PipelineError::ModelRequired { system })?;
            let table = build_pronoun_table(corpus);
            // The model's stored context applies unless explicitly overridden.
            let context = context_override.unwrap_or(model.context);
            let per_doc: Result<Vec<Vec<Prediction>>, PipelineError> = documents
                .par_iter()
                .map(|doc| generate_ml_for_doc(doc, corpus, model, &table, context))
                .collect();
            Ok(GenerationOutput {
                predictions: per_doc?.into_iter().flatten().collect(),
                decisions: Vec::new(),
            })
        }
        SystemKind::External => Err(PipelineError::Alignment(
            "external systems supply a predictions file; nothing to generate".to_owned(),
        )),
    }
}

fn is_pronoun_form_label(label: &str) -> Option<bool> {
    match label {
        "pronominal" | "pronoun" => Some(true),
        "non_pronominal" | "proper_name" | "description" => Some(false),
        _ => None,
    }
}

/// Aligns a flat prediction list to the documents of a split: exactly one
/// prediction per slot, addressed by `(doc_id, slot_index)`.
pub fn align_predictions(
    documents: &[&Document],
    predictions: &[Prediction],
) -> Result<Vec<Vec<ScoredPrediction>>, PipelineError> {
    let mut by_key: BTreeMap<(&str, usize), &Prediction> = BTreeMap::new();
    for prediction in predictions {
        let key = (prediction.doc_id.as_str(), prediction.slot_index);
        if by_key.insert(key, prediction).is_some() {
            return Err(PipelineError::Alignment(format!(
                "duplicate prediction for document `{}` slot {}",
                prediction.doc_id, prediction.slot_index
            )));
        }
    }
    let n_slots: usize = documents.iter().map(|d| d.slots.len()).sum();
    if predictions.len() != n_slots {
        return Err(PipelineError::Alignment(format!(
            "expected {n_slots} predictions (one per slot), got {}",
            predictions.len()
        )));
    }
    let mut aligned = Vec::with_capacity(documents.len());
    for doc in documents {
        let mut doc_preds = Vec::with_capacity(doc.slots.len());
        for slot_index in 0..doc.slots.len() {
            let prediction = by_key.get(&(doc.doc_id.as_str(), slot_index)).ok_or_else(
                || {
                    PipelineError::Alignment(format!(
                        "missing prediction for document `{}` slot {slot_index}",
                        doc.doc_id
                    ))
                },
            )?;
            doc_preds.push(ScoredPrediction {
                tokens: prediction.re.clone(),
                is_pronoun_label: prediction
                    .form
                    .as_deref()
                    .and_then(is_pronoun_form_label),
            });
        }
        aligned.push(doc_preds);
    }
    Ok(aligned)
}

/// Scores predictions against one split of the corpus.
pub fn evaluate(
    corpus: &Corpus,
    split: Split,
    predictions: &[Prediction],
    options: EvalOptions,
) -> Result<EvalReport, PipelineError> {
    let documents: Vec<&Document> = corpus.split_documents(split).collect();
    let aligned = align_predictions(&documents, predictions)?;
    Ok(evaluate_documents(&documents, &aligned, options)?)
}
