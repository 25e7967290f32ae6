//! Automatic evaluation of REG output.
//!
//! Slot-level: RE accuracy and string edit distance. Text-level: corpus BLEU
//! and text accuracy over relexicalized documents (plus sentence-level
//! accuracy for long documents, where text accuracy saturates at zero).
//! Pronominalization: precision, recall and F1 with "pronoun" as the
//! positive class. Reports break down by domain label when present, which is
//! how seen/unseen test subsets are tracked.
//!
//! RE comparisons are normalized: lowercase, tokens joined by single spaces.
//! Edit distance is character-level over the normalized strings by default
//! and token-level behind an option. The normalization in force is echoed in
//! every report.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{relexicalize, Document};
use crate::pronouns::is_closed_class_pronoun;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction/gold length mismatch: {predictions} vs {golds}")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

/// Lowercases and joins tokens with single spaces.
pub fn normalize_tokens(tokens: &[String]) -> String {
    tokens
        .iter()
        .map(|t| t.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Lowercases and collapses runs of whitespace to single spaces.
pub fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Fraction of slots whose normalized prediction equals the normalized gold.
pub fn re_accuracy(
    predictions: &[Vec<String>],
    golds: &[Vec<String>],
) -> Result<f64, MetricsError> {
    if predictions.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    if predictions.is_empty() {
        return Ok(0.0);
    }
    let correct = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| normalize_tokens(p) == normalize_tokens(g))
        .count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// Levenshtein distance with unit costs over arbitrary comparable items.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> u64 {
    if a.is_empty() {
        return b.len() as u64;
    }
    let mut row: Vec<u64> = (0..=b.len() as u64).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = i as u64 + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = diagonal + u64::from(ca != cb);
            diagonal = row[j + 1];
            row[j + 1] = substitution.min(diagonal + 1).min(row[j] + 1);
        }
    }
    row[b.len()]
}

/// Character-level string edit distance over normalized strings.
pub fn sed(pred: &str, gold: &str) -> u64 {
    let a: Vec<char> = normalize_text(pred).chars().collect();
    let b: Vec<char> = normalize_text(gold).chars().collect();
    levenshtein(&a, &b)
}

/// Token-level string edit distance over lowercased tokens.
pub fn sed_tokens(pred: &[String], gold: &[String]) -> u64 {
    let a: Vec<String> = pred.iter().map(|t| t.to_lowercase()).collect();
    let b: Vec<String> = gold.iter().map(|t| t.to_lowercase()).collect();
    levenshtein(&a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SedGranularity {
    Char,
    Token,
}

impl std::str::FromStr for SedGranularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" => Ok(SedGranularity::Char),
            "token" => Ok(SedGranularity::Token),
            other => Err(format!("unknown granularity `{other}` (expected char/token)")),
        }
    }
}

/// Corpus-level BLEU (n-grams up to 4, uniform weights, brevity penalty) on a
/// 0-100 scale. Candidate n-gram counts are clipped against the aligned
/// reference and aggregated corpus-wide.
///
/// Without smoothing any order with zero matches yields 0, except orders for
/// which the corpus has no candidate n-grams at all; those are neutral so
/// that a corpus of very short texts can still score 100 against itself.
/// Smoothing adds one to clipped and total counts of every order.
pub fn corpus_bleu(
    candidates: &[String],
    references: &[String],
    smoothing: bool,
) -> Result<f64, MetricsError> {
    if candidates.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: candidates.len(),
            golds: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }

    let mut clipped = [0u64; 4];
    let mut totals = [0u64; 4];
    let mut candidate_len = 0u64;
    let mut reference_len = 0u64;

    for (candidate, reference) in candidates.iter().zip(references) {
        let cand: Vec<&str> = candidate.split_whitespace().collect();
        let refr: Vec<&str> = reference.split_whitespace().collect();
        candidate_len += cand.len() as u64;
        reference_len += refr.len() as u64;
        for n in 1..=4usize {
            if cand.len() < n {
                continue;
            }
            let mut ref_counts: BTreeMap<&[&str], u64> = BTreeMap::new();
            if refr.len() >= n {
                for gram in refr.windows(n) {
                    *ref_counts.entry(gram).or_default() += 1;
                }
            }
            let mut cand_counts: BTreeMap<&[&str], u64> = BTreeMap::new();
            for gram in cand.windows(n) {
                *cand_counts.entry(gram).or_default() += 1;
            }
            for (gram, count) in cand_counts {
                totals[n - 1] += count;
                let allowed = ref_counts.get(gram).copied().unwrap_or(0);
                clipped[n - 1] += count.min(allowed);
            }
        }
    }

    let mut log_precision_sum = 0.0;
    for n in 0..4 {
        let (num, den) = if smoothing {
            (clipped[n] + 1, totals[n] + 1)
        } else {
            (clipped[n], totals[n])
        };
        if den == 0 {
            // No candidate n-grams of this order anywhere: neutral.
            continue;
        }
        if num == 0 {
            return Ok(0.0);
        }
        log_precision_sum += (num as f64 / den as f64).ln();
    }
    let geometric_mean = (log_precision_sum / 4.0).exp();

    let brevity_penalty = if candidate_len == 0 {
        return Ok(0.0);
    } else if candidate_len >= reference_len {
        1.0
    } else {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    };

    Ok(100.0 * brevity_penalty * geometric_mean)
}

/// Fraction of documents whose every slot is correct.
pub fn text_accuracy(docs_slot_correct: &[Vec<bool>]) -> f64 {
    if docs_slot_correct.is_empty() {
        return 0.0;
    }
    let correct = docs_slot_correct
        .iter()
        .filter(|doc| doc.iter().all(|&c| c))
        .count();
    correct as f64 / docs_slot_correct.len() as f64
}

/// Fraction of slot-bearing sentences whose every slot is correct.
pub fn sentence_accuracy(sentences_slot_correct: &[Vec<bool>]) -> f64 {
    let with_slots: Vec<&Vec<bool>> = sentences_slot_correct
        .iter()
        .filter(|s| !s.is_empty())
        .collect();
    if with_slots.is_empty() {
        return 0.0;
    }
    let correct = with_slots.iter().filter(|s| s.iter().all(|&c| c)).count();
    correct as f64 / with_slots.len() as f64
}

/// Precision, recall and F1 with "is a pronoun" as the positive class.
/// Undefined ratios are reported as 0.
pub fn pronominalization_prf(predicted: &[bool], gold: &[bool]) -> (f64, f64, f64) {
    let tp = predicted
        .iter()
        .zip(gold)
        .filter(|(p, g)| **p && **g)
        .count() as f64;
    let fp = predicted
        .iter()
        .zip(gold)
        .filter(|(p, g)| **p && !**g)
        .count() as f64;
    let fn_ = predicted
        .iter()
        .zip(gold)
        .filter(|(p, g)| !**p && **g)
        .count() as f64;
    let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
    let recall = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

/// Reduces a free-text RE to an is-pronoun label: a single token from the
/// closed pronoun inventory.
pub fn is_pronoun_re(tokens: &[String]) -> bool {
    matches!(tokens, [token] if is_closed_class_pronoun(token))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub sed_granularity: SedGranularity,
    pub bleu_smoothing: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            sed_granularity: SedGranularity::Char,
            bleu_smoothing: false,
        }
    }
}

/// One aligned prediction for a slot, already reduced to what the metrics
/// need.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredPrediction {
    pub tokens: Vec<String>,
    /// Explicit pronominality label when the producing system has one;
    /// otherwise the string reduction of `tokens` is used.
    pub is_pronoun_label: Option<bool>,
}

/// Counters and metric values for one slice of the data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricBlock {
    pub n_slots: u64,
    pub n_correct: u64,
    pub re_accuracy: f64,
    pub sed_total: u64,
    pub sed_mean: f64,
    pub bleu: f64,
    pub n_documents: u64,
    pub n_documents_correct: u64,
    pub text_accuracy: f64,
    pub n_sentences_with_slots: u64,
    pub n_sentences_correct: u64,
    pub sentence_accuracy: f64,
    pub pronoun_tp: u64,
    pub pronoun_fp: u64,
    pub pronoun_fn: u64,
    pub pronom_precision: f64,
    pub pronom_recall: f64,
    pub pronom_f1: f64,
}

/// Per-slot diagnostics carried in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDiagnostic {
    pub doc_id: String,
    pub slot_index: usize,
    pub correct: bool,
    pub sed: u64,
    pub predicted: String,
    pub gold: String,
    pub predicted_pronoun: bool,
    pub gold_pronoun: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_label: Option<String>,
}

/// The full evaluation report: overall metrics, per-domain breakdown, and
/// per-instance diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub options: EvalOptions,
    /// Free-form metadata recorded by the caller (system name, seed, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    pub normalization: String,
    pub overall: MetricBlock,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub by_domain: BTreeMap<String, MetricBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_instance: Vec<InstanceDiagnostic>,
}

struct SliceAccumulator {
    slot_correct: Vec<bool>,
    seds: Vec<u64>,
    pred_pronoun: Vec<bool>,
    gold_pronoun: Vec<bool>,
    docs_slot_correct: Vec<Vec<bool>>,
    sentences_slot_correct: Vec<Vec<bool>>,
    candidates: Vec<String>,
    references: Vec<String>,
}

impl SliceAccumulator {
    fn new() -> Self {
        SliceAccumulator {
            slot_correct: Vec::new(),
            seds: Vec::new(),
            pred_pronoun: Vec::new(),
            gold_pronoun: Vec::new(),
            docs_slot_correct: Vec::new(),
            sentences_slot_correct: Vec::new(),
            candidates: Vec::new(),
            references: Vec::new(),
        }
    }

    fn finish(self, bleu_smoothing: bool) -> Result<MetricBlock, MetricsError> {
        let n_slots = self.slot_correct.len() as u64;
        let n_correct = self.slot_correct.iter().filter(|&&c| c).count() as u64;
        let sed_total: u64 = self.seds.iter().sum();
        let (precision, recall, f1) =
            pronominalization_prf(&self.pred_pronoun, &self.gold_pronoun);
        let bleu = corpus_bleu(&self.candidates, &self.references, bleu_smoothing)?;
        let n_documents = self.docs_slot_correct.len() as u64;
        let n_documents_correct = self
            .docs_slot_correct
            .iter()
            .filter(|d| d.iter().all(|&c| c))
            .count() as u64;
        let sentences_with_slots: Vec<&Vec<bool>> = self
            .sentences_slot_correct
            .iter()
            .filter(|s| !s.is_empty())
            .collect();
        let n_sentences_with_slots = sentences_with_slots.len() as u64;
        let n_sentences_correct = sentences_with_slots
            .iter()
            .filter(|s| s.iter().all(|&c| c))
            .count() as u64;
        let tp = self
            .pred_pronoun
            .iter()
            .zip(&self.gold_pronoun)
            .filter(|(p, g)| **p && **g)
            .count() as u64;
        let fp = self
            .pred_pronoun
            .iter()
            .zip(&self.gold_pronoun)
            .filter(|(p, g)| **p && !**g)
            .count() as u64;
        let fn_ = self
            .pred_pronoun
            .iter()
            .zip(&self.gold_pronoun)
            .filter(|(p, g)| !**p && **g)
            .count() as u64;
        Ok(MetricBlock {
            n_slots,
            n_correct,
            re_accuracy: if n_slots == 0 {
                0.0
            } else {
                n_correct as f64 / n_slots as f64
            },
            sed_total,
            sed_mean: if n_slots == 0 {
                0.0
            } else {
                sed_total as f64 / n_slots as f64
            },
            bleu,
            n_documents,
            n_documents_correct,
            text_accuracy: text_accuracy(&self.docs_slot_correct),
            n_sentences_with_slots,
            n_sentences_correct,
            sentence_accuracy: sentence_accuracy(&self.sentences_slot_correct),
            pronoun_tp: tp,
            pronoun_fp: fp,
            pronoun_fn: fn_,
            pronom_precision: precision,
            pronom_recall: recall,
            pronom_f1: f1,
        })
    }
}

struct DocScore {
    domain_key: Option<String>,
    slot_infos: Vec<(bool, u64, bool, bool)>,
    doc_correct: Vec<bool>,
    sentence_correct: Vec<Vec<bool>>,
    candidate: String,
    reference: String,
    diagnostics: Vec<InstanceDiagnostic>,
}

fn score_document(
    doc: &Document,
    doc_preds: &[ScoredPrediction],
    options: EvalOptions,
    any_domain: bool,
) -> Result<DocScore, MetricsError> {
    if doc_preds.len() != doc.slots.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: doc_preds.len(),
            golds: doc.slots.len(),
        });
    }
    let domain_key = if any_domain {
        Some(
            doc.domain_label
                .clone()
                .unwrap_or_else(|| "(none)".to_owned()),
        )
    } else {
        None
    };

    let mut doc_correct = Vec::with_capacity(doc.slots.len());
    let mut sentence_correct: Vec<Vec<bool>> = vec![Vec::new(); doc.sentences.len()];
    let mut slot_infos = Vec::with_capacity(doc.slots.len());
    for (slot, pred) in doc.slots.iter().zip(doc_preds) {
        let correct = normalize_tokens(&pred.tokens) == normalize_tokens(&slot.gold_re_tokens);
        let sed_value = match options.sed_granularity {
            SedGranularity::Char => sed(&pred.tokens.join(" "), &slot.gold_re_tokens.join(" ")),
            SedGranularity::Token => sed_tokens(&pred.tokens, &slot.gold_re_tokens),
        };
        let gold_pron = match slot.gold_form {
            Some(form) => form == crate::corpus::ReferentialForm::Pronoun,
            None => is_pronoun_re(&slot.gold_re_tokens),
        };
        let pred_pron = pred
            .is_pronoun_label
            .unwrap_or_else(|| is_pronoun_re(&pred.tokens));
        doc_correct.push(correct);
        sentence_correct[slot.sentence_index].push(correct);
        slot_infos.push((correct, sed_value, pred_pron, gold_pron));
    }

    let realized: Vec<Vec<String>> = doc_preds.iter().map(|p| p.tokens.clone()).collect();
    let candidate = relexicalize(doc, &realized)?;
    let reference = doc.reference_text();

    let diagnostics = slot_infos
        .iter()
        .enumerate()
        .map(
            |(i, (correct, sed_value, pred_pron, gold_pron))| InstanceDiagnostic {
                doc_id: doc.doc_id.clone(),
                slot_index: i,
                correct: *correct,
                sed: *sed_value,
                predicted: doc_preds[i].tokens.join(" "),
                gold: doc.slots[i].gold_re_tokens.join(" "),
                predicted_pronoun: *pred_pron,
                gold_pronoun: *gold_pron,
                domain_label: doc.domain_label.clone(),
            },
        )
        .collect();

    Ok(DocScore {
        domain_key,
        slot_infos,
        doc_correct,
        sentence_correct,
        candidate,
        reference,
        diagnostics,
    })
}

/// Evaluates aligned predictions over documents. `predictions[i]` must hold
/// one entry per slot of `documents[i]`. Documents are scored in parallel
/// and folded in corpus order.
pub fn evaluate_documents(
    documents: &[&Document],
    predictions: &[Vec<ScoredPrediction>],
    options: EvalOptions,
) -> Result<EvalReport, MetricsError> {
    if documents.len() != predictions.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            golds: documents.len(),
        });
    }
    if documents.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let any_domain = documents.iter().any(|d| d.domain_label.is_some());

    let scores: Vec<DocScore> = documents
        .par_iter()
        .zip(predictions)
        .map(|(doc, doc_preds)| score_document(doc, doc_preds, options, any_domain))
        .collect::<Result<_, _>>()?;

    let mut overall = SliceAccumulator::new();
    let mut by_domain: BTreeMap<String, SliceAccumulator> = BTreeMap::new();
    let mut per_instance = Vec::new();
    for score in scores {
        per_instance.extend(score.diagnostics);
        let mut targets: Vec<&mut SliceAccumulator> = vec![&mut overall];
        if let Some(key) = &score.domain_key {
            targets.push(
                by_domain
                    .entry(key.clone())
                    .or_insert_with(SliceAccumulator::new),
            );
        }
        for acc in targets {
            for (correct, sed_value, pred_pron, gold_pron) in &score.slot_infos {
                acc.slot_correct.push(*correct);
                acc.seds.push(*sed_value);
                acc.pred_pronoun.push(*pred_pron);
                acc.gold_pronoun.push(*gold_pron);
            }
            acc.docs_slot_correct.push(score.doc_correct.clone());
            acc.sentences_slot_correct
                .extend(score.sentence_correct.iter().cloned());
            acc.candidates.push(score.candidate.clone());
            acc.references.push(score.reference.clone());
        }
    }

    let overall = overall.finish(options.bleu_smoothing)?;
    let mut domain_blocks = BTreeMap::new();
    for (key, acc) in by_domain {
        domain_blocks.insert(key, acc.finish(options.bleu_smoothing)?);
    }
    Ok(EvalReport {
        options,
        metadata: BTreeMap::new(),
        normalization: "lowercase, tokens joined by single spaces".to_owned(),
        overall,
        by_domain: domain_blocks,
        per_instance,
    })
}

/// Renders reports as an aligned text table, one row per system. Reports
/// with a domain breakdown render each cell as `a/b/...` over the sorted
/// domain labels; a header line lists the label order.
pub fn render_table(rows: &[(String, &EvalReport)]) -> String {
    const COLUMNS: [&str; 7] = [
        "RE Acc.",
        "SED",
        "BLEU",
        "Text Acc.",
        "Precision",
        "Recall",
        "F1",
    ];

    fn cells(report: &EvalReport) -> Vec<String> {
        let blocks: Vec<&MetricBlock> = if report.by_domain.is_empty() {
            vec![&report.overall]
        } else {
            report.by_domain.values().collect()
        };
        let join = |f: &dyn Fn(&MetricBlock) -> f64| {
            blocks
                .iter()
                .map(|b| format!("{:.2}", f(b)))
                .collect::<Vec<_>>()
                .join("/")
        };
        vec![
            join(&|b| b.re_accuracy * 100.0),
            join(&|b| b.sed_mean),
            join(&|b| b.bleu),
            join(&|b| b.text_accuracy * 100.0),
            join(&|b| b.pronom_precision * 100.0),
            join(&|b| b.pronom_recall * 100.0),
            join(&|b| b.pronom_f1 * 100.0),
        ]
    }

    let mut domain_note: Option<String> = None;
    for (_, report) in rows {
        if !report.by_domain.is_empty() {
            let labels: Vec<&str> = report.by_domain.keys().map(String::as_str).collect();
            domain_note = Some(format!("cells: {}", labels.join("/")));
            break;
        }
    }

    let name_width = rows
        .iter()
        .map(|(name, _)| name.len())
        .chain(std::iter::once("System".len()))
        .max()
        .unwrap_or(6);
    let all_cells: Vec<Vec<String>> = rows.iter().map(|(_, r)| cells(r)).collect();
    let widths: Vec<usize> = COLUMNS
        .iter()
        .enumerate()
        .map(|(i, header)| {
            all_cells
                .iter()
                .map(|row| row[i].len())
                .chain(std::iter::once(header.len()))
                .max()
                .unwrap_or(header.len())
        })
        .collect();

    let mut out = String::new();
    if let Some(note) = domain_note {
        out.push_str(&note);
        out.push('\n');
    }
    out.push_str(&format!("{:<name_width$}", "System"));
    for (header, width) in COLUMNS.iter().zip(&widths) {
        out.push_str(&format!("  {header:>width$}"));
    }
    out.push('\n');
    for ((name, _), row) in rows.iter().zip(&all_cells) {
        out.push_str(&format!("{name:<name_width$}"));
        for (cell, width) in row.iter().zip(&widths) {
            out.push_str(&format!("  {cell:>width$}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| (*w).to_owned()).collect()
    }

    #[test]
    fn re_accuracy_extremes() {
        let golds = vec![toks(&["the", "school"]), toks(&["Kerala"])];
        assert_eq!(re_accuracy(&golds, &golds).unwrap(), 1.0);
        let wrong = vec![toks(&["x"]), toks(&["y"])];
        assert_eq!(re_accuracy(&wrong, &golds).unwrap(), 0.0);
    }

    #[test]
    fn re_accuracy_normalizes_case() {
        let pred = vec![toks(&["the", "school"])];
        let gold = vec![toks(&["The", "school"])];
        assert_eq!(re_accuracy(&pred, &gold).unwrap(), 1.0);
    }

    #[test]
    fn re_accuracy_rejects_mismatch() {
        assert!(matches!(
            re_accuracy(&[], &[toks(&["x"])]),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn sed_basics() {
        assert_eq!(sed("same", "same"), 0);
        assert_eq!(sed("", "abc"), 3);
        assert_eq!(sed("kitten", "sitting"), 3);
        assert_eq!(sed("The School", "the school"), 0, "normalized");
    }

    #[test]
    fn sed_token_level() {
        assert_eq!(
            sed_tokens(&toks(&["the", "school"]), &toks(&["the", "college"])),
            1
        );
    }

    #[test]
    fn bleu_identity_is_100() {
        let docs = vec![
            "AWH Engineering College is in Kuttikkattoor .".to_owned(),
            "so".to_owned(), // shorter than any 2-gram
        ];
        let bleu = corpus_bleu(&docs, &docs, false).unwrap();
        assert_eq!(bleu, 100.0);
    }

    #[test]
    fn bleu_zero_without_overlap() {
        let cand = vec!["a b c d e".to_owned()];
        let refr = vec!["v w x y z".to_owned()];
        assert_eq!(corpus_bleu(&cand, &refr, false).unwrap(), 0.0);
    }

    #[test]
    fn bleu_empty_corpus_is_an_error() {
        assert!(matches!(
            corpus_bleu(&[], &[], false),
            Err(MetricsError::EmptyCorpus)
        ));
    }

    #[test]
    fn bleu_matches_hand_computed_precisions() {
        // Doc 1: candidate "a b c d e f" vs reference "a b c d x f"
        //   clipped/total: 1-grams 5/6, 2-grams 3/5, 3-grams 2/4, 4-grams 1/3
        // Doc 2: identical 4-token texts: 4/4, 3/3, 2/2, 1/1
        // Corpus: p1=9/10, p2=6/8, p3=4/6, p4=2/4; lengths equal, BP=1.
        let cands = vec!["a b c d e f".to_owned(), "g h i j".to_owned()];
        let refs = vec!["a b c d x f".to_owned(), "g h i j".to_owned()];
        let bleu = corpus_bleu(&cands, &refs, false).unwrap();
        let expected = 100.0
            * ((9.0f64 / 10.0).ln() * 0.25
                + (6.0f64 / 8.0).ln() * 0.25
                + (4.0f64 / 6.0).ln() * 0.25
                + (2.0f64 / 4.0).ln() * 0.25)
                .exp();
        assert!((bleu - expected).abs() < 1e-9);
    }

    #[test]
    fn brevity_penalty_applies_to_short_candidates() {
        let cands = vec!["a b".to_owned()];
        let refs = vec!["a b c d".to_owned()];
        let bleu = corpus_bleu(&cands, &refs, true).unwrap();
        assert!(bleu > 0.0 && bleu < 100.0);
    }

    #[test]
    fn text_accuracy_counts_all_or_nothing() {
        let one_wrong = vec![vec![true; 9]
            .into_iter()
            .chain(std::iter::once(false))
            .collect::<Vec<_>>()];
        assert_eq!(text_accuracy(&one_wrong), 0.0);
        assert_eq!(text_accuracy(&[vec![true, true]]), 1.0);
    }

    #[test]
    fn sentence_accuracy_ignores_slotless_sentences() {
        let sentences = vec![vec![], vec![true], vec![false], vec![]];
        assert_eq!(sentence_accuracy(&sentences), 0.5);
    }

    #[test]
    fn prf_hand_counts() {
        // gold P P N N, pred P N N P
        let gold = [true, true, false, false];
        let pred = [true, false, false, true];
        let (p, r, f1) = pronominalization_prf(&pred, &gold);
        assert_eq!((p, r, f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn prf_degenerate_cases() {
        let (p, r, f1) = pronominalization_prf(&[false, false], &[true, false]);
        assert_eq!((p, r, f1), (0.0, 0.0, 0.0));
        let (p, r, f1) = pronominalization_prf(&[true, true], &[true, true]);
        assert_eq!((p, r, f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn pronoun_reduction_uses_closed_list() {
        assert!(is_pronoun_re(&toks(&["He"])));
        assert!(is_pronoun_re(&toks(&["themselves"])));
        assert!(!is_pronoun_re(&toks(&["the", "school"])));
        assert!(!is_pronoun_re(&toks(&["Kerala"])));
    }
}
