//! Data model and JSONL persistence for delexicalized REG corpora.
//!
//! A corpus is a stream of tokenized documents in which every referring
//! expression has been replaced by an entity tag (multi-word tags use
//! underscores instead of spaces). Each replaced position is a *slot*
//! carrying the original (gold) expression and optional annotations.
//!
//! One document per line:
//!
//! ```json
//! {"doc_id": "d1", "split": "train", "domain_label": "seen",
//!  "sentences": [["Kerala", "is", "in", "India", "."]],
//!  "slots": [{"sent": 0, "tok": 0, "entity_tag": "Kerala",
//!             "gold_re": ["Kerala"], "chain_id": "c0"}]}
//! ```
//!
//! Optional document fields: `k` (default context window in sentences;
//! absent means the whole document) and `paragraphs` (paragraph index per
//! sentence). Optional slot fields: `gold_form` (`pronoun`, `proper_name`,
//! `description`) and `gram_role` (`subject`, `object`, `other`).
//!
//! The entity registry is a separate JSON file mapping tags to
//! meta-information:
//!
//! ```json
//! {"Kerala": {"type": "STATE", "gender": "neuter", "plurality": "singular"},
//!  "Amy_Adams": {"type": "PERSON", "gender": "female", "plurality": "singular",
//!                "pronouns": {"nom": "she", "acc": "her", "gen": "her", "refl": "herself"}}}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pronouns::Paradigm;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: duplicate doc_id `{doc_id}`")]
    DuplicateDocId { line: usize, doc_id: String },
    #[error("document `{doc_id}`: expected one realized RE per slot ({expected}), got {got}")]
    RealizedLengthMismatch {
        doc_id: String,
        expected: usize,
        got: usize,
    },
    #[error("registry: {0}")]
    Registry(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Corpus partition a document belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}` (expected train/dev/test)")),
        }
    }
}

/// Three-way referential form: pronoun, proper name, or description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferentialForm {
    Pronoun,
    ProperName,
    Description,
}

impl fmt::Display for ReferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferentialForm::Pronoun => "pronoun",
            ReferentialForm::ProperName => "proper_name",
            ReferentialForm::Description => "description",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrammaticalRole {
    Subject,
    Object,
    Other,
}

impl fmt::Display for GrammaticalRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrammaticalRole::Subject => "subject",
            GrammaticalRole::Object => "object",
            GrammaticalRole::Other => "other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Neuter,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plurality {
    Singular,
    Plural,
    Unknown,
}

/// A single token of a document. Entity slots hold the delexicalized tag as
/// their surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub is_entity_slot: bool,
}

impl Token {
    pub fn word(surface: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            is_entity_slot: false,
        }
    }

    pub fn slot(surface: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            is_entity_slot: true,
        }
    }
}

/// One mention slot of a document: where it sits, which entity it refers to,
/// and what the source text said there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotAnnotation {
    pub sentence_index: usize,
    pub token_index: usize,
    pub entity_tag: String,
    pub gold_re_tokens: Vec<String>,
    pub gold_form: Option<ReferentialForm>,
    pub grammatical_role: Option<GrammaticalRole>,
    pub chain_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub split: Split,
    pub domain_label: Option<String>,
    /// Default context window in sentences; `None` means the whole document.
    pub k_context: Option<usize>,
    /// Paragraph index per sentence; `None` means a single paragraph.
    pub paragraphs: Option<Vec<usize>>,
    pub sentences: Vec<Vec<Token>>,
    /// Ordered by document position.
    pub slots: Vec<SlotAnnotation>,
}

/// Per-entity meta-information used for pronoun assignment and ML features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMeta {
    #[serde(rename = "type")]
    pub entity_type: String,
    pub gender: Gender,
    pub plurality: Plurality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pronouns: Option<ParadigmRecord>,
}

impl EntityMeta {
    /// Fallback for tags without a registry entry: an unknown, singular,
    /// it-pronoun entity. Unseen entities must never crash generation.
    pub fn unknown() -> Self {
        EntityMeta {
            entity_type: "unknown".to_owned(),
            gender: Gender::Unknown,
            plurality: Plurality::Singular,
            pronouns: None,
        }
    }

    pub fn is_person(&self) -> bool {
        matches!(
            self.entity_type.to_ascii_lowercase().as_str(),
            "person" | "human" | "per"
        )
    }
}

/// Wire form of a pronoun paradigm; genitive and reflexive are optional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParadigmRecord {
    pub nom: String,
    pub acc: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refl: Option<String>,
}

impl ParadigmRecord {
    /// Completes a partial paradigm. Missing genitive/reflexive cells are
    /// taken from the standard paradigm when the nominative matches a known
    /// third-person lemma, otherwise from the accusative.
    pub fn complete(&self) -> Paradigm {
        let template = crate::pronouns::third_person_lemma(&self.nom).map(|l| l.paradigm());
        let gen = self
            .gen
            .clone()
            .or_else(|| template.as_ref().map(|p| p.genitive.clone()))
            .unwrap_or_else(|| self.acc.clone());
        let refl = self
            .refl
            .clone()
            .or_else(|| template.as_ref().map(|p| p.reflexive.clone()))
            .unwrap_or_else(|| self.acc.clone());
        Paradigm {
            nominative: self.nom.clone(),
            accusative: self.acc.clone(),
            genitive: gen,
            reflexive: refl,
        }
    }
}

/// Registry of entity meta-information, keyed by entity tag.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityRegistry {
    pub entries: BTreeMap<String, EntityMeta>,
}

impl EntityRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resolves a tag, falling back to [`EntityMeta::unknown`] for tags
    /// without an entry.
    pub fn meta(&self, entity_tag: &str) -> EntityMeta {
        self.entries
            .get(entity_tag)
            .cloned()
            .unwrap_or_else(EntityMeta::unknown)
    }

    pub fn from_json_reader(reader: impl std::io::Read) -> Result<Self, CorpusError> {
        serde_json::from_reader(reader).map_err(|e| CorpusError::Registry(e.to_string()))
    }

    pub fn to_json_writer(&self, writer: impl Write) -> Result<(), CorpusError> {
        serde_json::to_writer_pretty(writer, self).map_err(|e| CorpusError::Registry(e.to_string()))
    }
}

/// A delexicalized REG corpus: documents plus the entity registry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub registry: EntityRegistry,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, registry: EntityRegistry) -> Self {
        Corpus {
            documents,
            registry,
        }
    }

    pub fn split_documents(&self, split: Split) -> impl Iterator<Item = &Document> {
        self.documents.iter().filter(move |d| d.split == split)
    }

    /// All entity tags appearing in any slot, in sorted order.
    pub fn entity_tags(&self) -> BTreeSet<&str> {
        self.documents
            .iter()
            .flat_map(|d| d.slots.iter().map(|s| s.entity_tag.as_str()))
            .collect()
    }
}

/// How wide a context window instance extraction uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ContextPolicy {
    /// Use each document's own `k` field (absent means full document).
    #[default]
    DocDefault,
    /// A fixed number of sentences before and after the slot's sentence.
    Fixed(usize),
    /// The whole document.
    Full,
}

impl ContextPolicy {
    pub fn window_for(&self, doc: &Document) -> Option<usize> {
        match self {
            ContextPolicy::DocDefault => doc.k_context,
            ContextPolicy::Fixed(k) => Some(*k),
            ContextPolicy::Full => None,
        }
    }
}

impl fmt::Display for ContextPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextPolicy::DocDefault => f.write_str("doc"),
            ContextPolicy::Fixed(k) => write!(f, "{k}"),
            ContextPolicy::Full => f.write_str("full"),
        }
    }
}

impl FromStr for ContextPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "doc" => Ok(ContextPolicy::DocDefault),
            "full" => Ok(ContextPolicy::Full),
            n => n
                .parse::<usize>()
                .map(ContextPolicy::Fixed)
                .map_err(|_| format!("invalid context `{n}` (expected doc, full, or a number)")),
        }
    }
}

impl Serialize for ContextPolicy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ContextPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A slot other than the target that falls inside an instance's pre-context,
/// with enough bookkeeping for salience and recency computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextSlot {
    pub entity_tag: String,
    pub sentence_index: usize,
    /// Document-absolute token offset of the slot.
    pub abs_token_index: usize,
    /// Offset of the slot's tag token within the instance's `pre_context`.
    pub pre_index: usize,
    pub grammatical_role: Option<GrammaticalRole>,
    pub paragraph_index: Option<usize>,
}

/// One generation problem: a target entity at a slot, together with its
/// delexicalized context window.
///
/// `pre_context ++ [entity_tag] ++ post_context` is exactly the window of the
/// document covered by the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub doc_id: String,
    pub slot_index: usize,
    pub entity_tag: String,
    pub pre_context: Vec<Token>,
    pub post_context: Vec<Token>,
    pub current_sentence_index: usize,
    /// Token offset within the slot's sentence (0 means sentence-initial).
    pub sentence_token_index: usize,
    /// Document-absolute token offset of the slot.
    pub abs_token_index: usize,
    pub gold_re_tokens: Vec<String>,
    pub gold_form: Option<ReferentialForm>,
    pub grammatical_role: Option<GrammaticalRole>,
    /// Sentence index of each `pre_context` token.
    pub pre_sentence_indices: Vec<usize>,
    /// Sentence index of each `post_context` token.
    pub post_sentence_indices: Vec<usize>,
    /// Slots inside the pre-context window, in document order.
    pub preceding_slots: Vec<ContextSlot>,
    pub paragraph_index: Option<usize>,
}

impl Instance {
    pub fn is_sentence_initial(&self) -> bool {
        self.sentence_token_index == 0
    }

    /// Nearest slot before this one referring to the same entity, within the
    /// context window.
    pub fn antecedent(&self) -> Option<&ContextSlot> {
        self.preceding_slots
            .iter()
            .rev()
            .find(|cs| cs.entity_tag == self.entity_tag)
    }
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct DocRecord {
    doc_id: String,
    split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain_label: Option<String>,
    #[serde(rename = "k", default, skip_serializing_if = "Option::is_none")]
    k_context: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    paragraphs: Option<Vec<usize>>,
    sentences: Vec<Vec<String>>,
    slots: Vec<SlotRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SlotRecord {
    sent: usize,
    tok: usize,
    entity_tag: String,
    gold_re: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold_form: Option<ReferentialForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gram_role: Option<GrammaticalRole>,
    chain_id: String,
}

fn check_token(token: &str, line: usize, what: &str) -> Result<(), CorpusError> {
    if token.is_empty() {
        return Err(CorpusError::Schema {
            line,
            message: format!("{what}: empty token"),
        });
    }
    if token.chars().any(char::is_whitespace) {
        return Err(CorpusError::Schema {
            line,
            message: format!("{what}: token `{token}` contains whitespace"),
        });
    }
    Ok(())
}

impl Document {
    fn from_record(record: DocRecord, line: usize) -> Result<Self, CorpusError> {
        let DocRecord {
            doc_id,
            split,
            domain_label,
            k_context,
            paragraphs,
            sentences,
            slots,
        } = record;

        for (si, sentence) in sentences.iter().enumerate() {
            for tok in sentence {
                check_token(tok, line, &format!("sentence {si}"))?;
            }
        }
        if let Some(paras) = &paragraphs {
            if paras.len() != sentences.len() {
                return Err(CorpusError::Schema {
                    line,
                    message: format!(
                        "paragraphs: expected {} entries (one per sentence), got {}",
                        sentences.len(),
                        paras.len()
                    ),
                });
            }
        }

        let mut slots = slots;
        slots.sort_by_key(|s| (s.sent, s.tok));

        let mut chain_tags: BTreeMap<&str, &str> = BTreeMap::new();
        let mut seen_positions: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (i, slot) in slots.iter().enumerate() {
            let sentence = sentences.get(slot.sent).ok_or(CorpusError::Schema {
                line,
                message: format!(
                    "slot {i}: sentence index {} out of range (document has {} sentences)",
                    slot.sent,
                    sentences.len()
                ),
            })?;
            if slot.tok >= sentence.len() {
                return Err(CorpusError::Schema {
                    line,
                    message: format!(
                        "slot {i}: token index {} out of range (sentence {} has {} tokens)",
                        slot.tok,
                        slot.sent,
                        sentence.len()
                    ),
                });
            }
            if !seen_positions.insert((slot.sent, slot.tok)) {
                return Err(CorpusError::Schema {
                    line,
                    message: format!("slot {i}: duplicate position ({}, {})", slot.sent, slot.tok),
                });
            }
            check_token(&slot.entity_tag, line, &format!("slot {i} entity_tag"))?;
            if slot.gold_re.is_empty() {
                return Err(CorpusError::Schema {
                    line,
                    message: format!("slot {i}: gold_re must be non-empty"),
                });
            }
            for tok in &slot.gold_re {
                check_token(tok, line, &format!("slot {i} gold_re"))?;
            }
            match chain_tags.entry(slot.chain_id.as_str()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(slot.entity_tag.as_str());
                }
                std::collections::btree_map::Entry::Occupied(e) => {
                    if *e.get() != slot.entity_tag {
                        return Err(CorpusError::Schema {
                            line,
                            message: format!(
                                "slot {i}: chain `{}` maps to both `{}` and `{}`",
                                slot.chain_id,
                                e.get(),
                                slot.entity_tag
                            ),
                        });
                    }
                }
            }
        }

        let slot_positions: BTreeSet<(usize, usize)> =
            slots.iter().map(|s| (s.sent, s.tok)).collect();
        let sentences = sentences
            .into_iter()
            .enumerate()
            .map(|(si, sentence)| {
                sentence
                    .into_iter()
                    .enumerate()
                    .map(|(ti, surface)| Token {
                        surface,
                        is_entity_slot: slot_positions.contains(&(si, ti)),
                    })
                    .collect()
            })
            .collect();
        let slots = slots
            .into_iter()
            .map(|s| SlotAnnotation {
                sentence_index: s.sent,
                token_index: s.tok,
                entity_tag: s.entity_tag,
                gold_re_tokens: s.gold_re,
                gold_form: s.gold_form,
                grammatical_role: s.gram_role,
                chain_id: s.chain_id,
            })
            .collect();

        Ok(Document {
            doc_id,
            split,
            domain_label,
            k_context,
            paragraphs,
            sentences,
            slots,
        })
    }

    fn to_record(&self) -> DocRecord {
        DocRecord {
            doc_id: self.doc_id.clone(),
            split: self.split,
            domain_label: self.domain_label.clone(),
            k_context: self.k_context,
            paragraphs: self.paragraphs.clone(),
            sentences: self
                .sentences
                .iter()
                .map(|s| s.iter().map(|t| t.surface.clone()).collect())
                .collect(),
            slots: self
                .slots
                .iter()
                .map(|s| SlotRecord {
                    sent: s.sentence_index,
                    tok: s.token_index,
                    entity_tag: s.entity_tag.clone(),
                    gold_re: s.gold_re_tokens.clone(),
                    gold_form: s.gold_form,
                    gram_role: s.grammatical_role,
                    chain_id: s.chain_id.clone(),
                })
                .collect(),
        }
    }

    /// Reference text of the document: the gold REs substituted back in.
    pub fn reference_text(&self) -> String {
        let golds: Vec<Vec<String>> = self
            .slots
            .iter()
            .map(|s| s.gold_re_tokens.clone())
            .collect();
        relexicalize(self, &golds).expect("gold REs are one per slot")
    }

    /// Paragraph index of a sentence; documents without paragraph info are a
    /// single paragraph.
    pub fn paragraph_of(&self, sentence_index: usize) -> Option<usize> {
        self.paragraphs
            .as_ref()
            .and_then(|p| p.get(sentence_index).copied())
    }
}

/// Parses a corpus from JSONL, one document per line. Blank lines are
/// skipped. Malformed records are rejected with their line number.
pub fn parse_corpus(reader: impl BufRead) -> Result<Corpus, CorpusError> {
    let mut documents = Vec::new();
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocRecord =
            serde_json::from_str(line.trim()).map_err(|e| CorpusError::Schema {
                line: line_no,
                message: e.to_string(),
            })?;
        if !seen_ids.insert(record.doc_id.clone()) {
            return Err(CorpusError::DuplicateDocId {
                line: line_no,
                doc_id: record.doc_id,
            });
        }
        documents.push(Document::from_record(record, line_no)?);
    }
    Ok(Corpus::new(documents, EntityRegistry::new()))
}

/// Writes a corpus as JSONL, one document per line.
pub fn write_corpus(corpus: &Corpus, mut writer: impl Write) -> Result<(), CorpusError> {
    for doc in &corpus.documents {
        let record = doc.to_record();
        let json = serde_json::to_string(&record).map_err(|e| CorpusError::Schema {
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(writer, "{json}")?;
    }
    Ok(())
}

/// Extracts one instance per slot. The pre-context covers the slot's sentence
/// prefix plus up to `k` preceding full sentences; the post-context covers the
/// sentence suffix plus up to `k` following sentences. `k = None` yields the
/// whole document.
pub fn extract_instances(doc: &Document, k: Option<usize>) -> Vec<Instance> {
    let n_sentences = doc.sentences.len();
    let mut sentence_starts = Vec::with_capacity(n_sentences);
    let mut offset = 0usize;
    for sentence in &doc.sentences {
        sentence_starts.push(offset);
        offset += sentence.len();
    }
    let abs_of = |sent: usize, tok: usize| sentence_starts[sent] + tok;

    doc.slots
        .iter()
        .enumerate()
        .map(|(slot_index, slot)| {
            let cur = slot.sentence_index;
            let lo = k.map_or(0, |k| cur.saturating_sub(k));
            let hi = k.map_or(n_sentences - 1, |k| (cur + k).min(n_sentences - 1));

            let mut pre_context = Vec::new();
            let mut pre_sentence_indices = Vec::new();
            for si in lo..cur {
                for token in &doc.sentences[si] {
                    pre_context.push(token.clone());
                    pre_sentence_indices.push(si);
                }
            }
            for token in &doc.sentences[cur][..slot.token_index] {
                pre_context.push(token.clone());
                pre_sentence_indices.push(cur);
            }

            let mut post_context = Vec::new();
            let mut post_sentence_indices = Vec::new();
            for token in &doc.sentences[cur][slot.token_index + 1..] {
                post_context.push(token.clone());
                post_sentence_indices.push(cur);
            }
            for si in cur + 1..=hi {
                for token in &doc.sentences[si] {
                    post_context.push(token.clone());
                    post_sentence_indices.push(si);
                }
            }

            let window_start_abs = abs_of(lo, 0);
            let preceding_slots = doc.slots[..slot_index]
                .iter()
                .filter(|s| s.sentence_index >= lo)
                .map(|s| {
                    let abs = abs_of(s.sentence_index, s.token_index);
                    ContextSlot {
                        entity_tag: s.entity_tag.clone(),
                        sentence_index: s.sentence_index,
                        abs_token_index: abs,
                        pre_index: abs - window_start_abs,
                        grammatical_role: s.grammatical_role,
                        paragraph_index: doc.paragraph_of(s.sentence_index),
                    }
                })
                .collect();

            Instance {
                doc_id: doc.doc_id.clone(),
                slot_index,
                entity_tag: slot.entity_tag.clone(),
                pre_context,
                post_context,
                current_sentence_index: cur,
                sentence_token_index: slot.token_index,
                abs_token_index: abs_of(cur, slot.token_index),
                gold_re_tokens: slot.gold_re_tokens.clone(),
                gold_form: slot.gold_form,
                grammatical_role: slot.grammatical_role,
                pre_sentence_indices,
                post_sentence_indices,
                preceding_slots,
                paragraph_index: doc.paragraph_of(cur),
            }
        })
        .collect()
}

/// Substitutes one realized RE per slot back into the document and joins all
/// tokens with single spaces.
pub fn relexicalize(doc: &Document, realized: &[Vec<String>]) -> Result<String, CorpusError> {
    if realized.len() != doc.slots.len() {
        return Err(CorpusError::RealizedLengthMismatch {
            doc_id: doc.doc_id.clone(),
            expected: doc.slots.len(),
            got: realized.len(),
        });
    }
    let by_position: BTreeMap<(usize, usize), usize> = doc
        .slots
        .iter()
        .enumerate()
        .map(|(i, s)| ((s.sentence_index, s.token_index), i))
        .collect();

    let mut out: Vec<&str> = Vec::new();
    for (si, sentence) in doc.sentences.iter().enumerate() {
        for (ti, token) in sentence.iter().enumerate() {
            match by_position.get(&(si, ti)) {
                Some(&slot_idx) => out.extend(realized[slot_idx].iter().map(String::as_str)),
                None => out.push(&token.surface),
            }
        }
    }
    Ok(out.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::table1_document;

    fn doc_line() -> String {
        r#"{"doc_id":"d1","split":"train","sentences":[["Kerala","is","nice","."]],"slots":[{"sent":0,"tok":0,"entity_tag":"Kerala","gold_re":["Kerala"],"chain_id":"c0"}]}"#
            .to_owned()
    }

    #[test]
    fn parses_minimal_document() {
        let corpus = parse_corpus(doc_line().as_bytes()).unwrap();
        assert_eq!(corpus.documents.len(), 1);
        let doc = &corpus.documents[0];
        assert_eq!(doc.slots.len(), 1);
        assert!(doc.sentences[0][0].is_entity_slot);
        assert!(!doc.sentences[0][1].is_entity_slot);
    }

    #[test]
    fn rejects_slot_past_sentence_end() {
        let line = r#"{"doc_id":"d1","split":"train","sentences":[["a","b"]],"slots":[{"sent":0,"tok":5,"entity_tag":"X","gold_re":["x"],"chain_id":"c0"}]}"#;
        match parse_corpus(line.as_bytes()) {
            Err(CorpusError::Schema { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("out of range"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_doc_id() {
        let two = format!("{}\n{}\n", doc_line(), doc_line());
        match parse_corpus(two.as_bytes()) {
            Err(CorpusError::DuplicateDocId { line, doc_id }) => {
                assert_eq!(line, 2);
                assert_eq!(doc_id, "d1");
            }
            other => panic!("expected duplicate doc_id error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_inconsistent_chain_tags() {
        let line = r#"{"doc_id":"d1","split":"train","sentences":[["a","b"]],"slots":[{"sent":0,"tok":0,"entity_tag":"X","gold_re":["x"],"chain_id":"c0"},{"sent":0,"tok":1,"entity_tag":"Y","gold_re":["y"],"chain_id":"c0"}]}"#;
        assert!(matches!(
            parse_corpus(line.as_bytes()),
            Err(CorpusError::Schema { .. })
        ));
    }

    #[test]
    fn table1_contexts_match_published_example() {
        let doc = table1_document();
        let instances = extract_instances(&doc, None);
        // The published example targets the second mention of the college.
        let inst = &instances[4];
        assert_eq!(inst.entity_tag, "AWH_Engineering_College");
        let pre: Vec<&str> = inst.pre_context.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(
            pre.join(" "),
            "AWH_Engineering_College is in ``Kuttikkattoor'' , India in the state of Kerala ."
        );
        let post: Vec<&str> = inst
            .post_context
            .iter()
            .map(|t| t.surface.as_str())
            .collect();
        assert_eq!(
            post.join(" "),
            "has 250 employees and Kerala is ruled by Kochi . The Ganges River is also found in India ."
        );
    }

    #[test]
    fn single_sentence_document_confines_context() {
        let corpus = parse_corpus(doc_line().as_bytes()).unwrap();
        let instances = extract_instances(&corpus.documents[0], Some(2));
        assert!(instances[0].pre_context.is_empty());
        assert_eq!(instances[0].post_context.len(), 3);
    }

    #[test]
    fn window_spans_k_sentences_each_side() {
        let sentences: Vec<Vec<Token>> = (0..25)
            .map(|i| {
                vec![
                    if i == 5 {
                        Token::slot("E")
                    } else {
                        Token::word("w")
                    },
                    Token::word("."),
                ]
            })
            .collect();
        let doc = Document {
            doc_id: "d".into(),
            split: Split::Train,
            domain_label: None,
            k_context: None,
            paragraphs: None,
            sentences,
            slots: vec![SlotAnnotation {
                sentence_index: 5,
                token_index: 0,
                entity_tag: "E".into(),
                gold_re_tokens: vec!["e".into()],
                gold_form: None,
                grammatical_role: None,
                chain_id: "c".into(),
            }],
        };
        let inst = &extract_instances(&doc, Some(2))[0];
        assert_eq!(inst.pre_sentence_indices.first(), Some(&3));
        assert_eq!(inst.post_sentence_indices.last(), Some(&7));
    }

    #[test]
    fn relexicalize_with_gold_matches_reference() {
        let doc = table1_document();
        let text = doc.reference_text();
        assert!(text.starts_with(
            "AWH Engineering College is in Kuttikkattoor , India in the state of Kerala ."
        ));
        assert!(text.contains("The school has 250 employees"));
    }

    #[test]
    fn relexicalize_rejects_length_mismatch() {
        let doc = table1_document();
        assert!(matches!(
            relexicalize(&doc, &[]),
            Err(CorpusError::RealizedLengthMismatch { .. })
        ));
    }

    #[test]
    fn relexicalize_empty_on_slotless_document() {
        let line = r#"{"doc_id":"d1","split":"train","sentences":[["just","words","."]],"slots":[]}"#;
        let corpus = parse_corpus(line.as_bytes()).unwrap();
        let text = relexicalize(&corpus.documents[0], &[]).unwrap();
        assert_eq!(text, "just words .");
    }

    #[test]
    fn roundtrip_preserves_structure() {
        let doc = table1_document();
        let corpus = Corpus::new(vec![doc], EntityRegistry::new());
        let mut buf = Vec::new();
        write_corpus(&corpus, &mut buf).unwrap();
        let parsed = parse_corpus(buf.as_slice()).unwrap();
        assert_eq!(parsed.documents, corpus.documents);
    }
}
