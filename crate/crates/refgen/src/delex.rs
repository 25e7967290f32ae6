//! Building REG corpora from coreference-annotated documents.
//!
//! Input documents carry raw sentences plus coreference chains whose mentions
//! are token spans. The pipeline filters out first- and second-person and
//! union mentions, picks one delexicalized tag per chain, and replaces every
//! surviving mention span with that tag, yielding corpus-model documents
//! whose slots remember the original surface tokens as gold REs.
//!
//! Tag selection for human chains scans name patterns in a fixed priority
//! order: `firstname lastname`, `title firstname lastname`, modified
//! `firstname lastname`, `title lastname`, bare `lastname`, modified
//! `lastname`, bare `firstname`. Matching looks at the mention's head
//! segment (tokens before the first comma or bracket, minus trailing name
//! suffixes such as `Jr.`), using part-of-speech tags when present and
//! capitalization otherwise, plus a small title lexicon. Non-human chains
//! take the longest contiguous run of proper-noun tokens found in any
//! mention.
//!
//! Input is JSONL, one document per line:
//!
//! ```json
//! {"doc_id": "w1", "split": "train",
//!  "sentences": [["Barack", "Obama", "spoke", "."], ["He", "left", "."]],
//!  "chains": [{"chain_id": "c0", "mentions": [
//!     {"sent": 0, "start": 0, "end": 2, "entity_type": "PERSON",
//!      "pos_tags": ["NNP", "NNP"], "gram_role": "subject"},
//!     {"sent": 1, "start": 0, "end": 1, "gram_role": "subject",
//!      "form": "pronoun"}]}]}
//! ```

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    Document, EntityRegistry, GrammaticalRole, ReferentialForm, SlotAnnotation, Split, Token,
};

#[derive(Debug, Error)]
pub enum DelexError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("chain `{chain_id}` has no mentions")]
    EmptyChain { chain_id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Person {
    First,
    Second,
    #[default]
    Third,
}

/// One mention of a chain: a token span in a sentence plus annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
    /// Surface tokens, copied from the sentence at load time.
    pub tokens: Vec<String>,
    pub person: Person,
    pub is_union: bool,
    pub pos_tags: Option<Vec<String>>,
    pub form_annotation: Option<ReferentialForm>,
    pub grammatical_role: Option<GrammaticalRole>,
    pub entity_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreferenceChain {
    pub chain_id: String,
    /// Ordered by document position.
    pub mentions: Vec<Mention>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub split: Split,
    pub domain_label: Option<String>,
    pub paragraphs: Option<Vec<usize>>,
    pub sentences: Vec<Vec<String>>,
    pub chains: Vec<CoreferenceChain>,
}

/// Options for chain tag selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagOptions {
    /// Whether a name with a middle initial ("Ronald B. Koenig") counts as a
    /// modified firstname-lastname pattern. Off by default: such mentions
    /// match no multi-token name pattern, so tagging falls through to
    /// title-lastname and later patterns.
    pub middle_initial_as_modified: bool,
    /// Tokens treated as titles.
    pub titles: Vec<String>,
}

impl Default for TagOptions {
    fn default() -> Self {
        TagOptions {
            middle_initial_as_modified: false,
            titles: ["Mr.", "Ms.", "Mrs.", "Dr.", "President", "Chairman"]
                .iter()
                .map(|s| (*s).to_owned())
                .collect(),
        }
    }
}

const NAME_SUFFIXES: [&str; 5] = ["Jr.", "Sr.", "II", "III", "IV"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokenClass {
    Title,
    Initial,
    Suffix,
    Name,
    Other,
}

fn is_initial(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(
        (chars.next(), chars.next(), chars.next()),
        (Some(first), Some('.'), None) if first.is_ascii_uppercase()
    )
}

fn is_proper(token: &str, pos: Option<&str>) -> bool {
    match pos {
        Some(tag) => tag.starts_with("NNP"),
        None => token
            .chars()
            .next()
            .is_some_and(|c| c.is_alphabetic() && c.is_uppercase()),
    }
}

fn classify(token: &str, pos: Option<&str>, options: &TagOptions) -> TokenClass {
    if options.titles.iter().any(|t| t == token) {
        TokenClass::Title
    } else if is_initial(token) {
        TokenClass::Initial
    } else if NAME_SUFFIXES.contains(&token) {
        TokenClass::Suffix
    } else if is_proper(token, pos) {
        TokenClass::Name
    } else {
        TokenClass::Other
    }
}

/// The mention prefix used for name-pattern matching: tokens before the
/// first comma or bracket, minus trailing name suffixes.
fn head_segment<'a>(mention: &'a Mention, options: &TagOptions) -> (Vec<&'a str>, Vec<TokenClass>) {
    const BREAKS: [&str; 7] = [",", "(", ")", ";", ":", "--", "-LRB-"];
    let mut tokens = Vec::new();
    let mut classes = Vec::new();
    for (i, token) in mention.tokens.iter().enumerate() {
        if BREAKS.contains(&token.as_str()) {
            break;
        }
        let pos = mention
            .pos_tags
            .as_ref()
            .and_then(|tags| tags.get(i))
            .map(String::as_str);
        tokens.push(token.as_str());
        classes.push(classify(token, pos, options));
    }
    while classes.last() == Some(&TokenClass::Suffix) {
        classes.pop();
        tokens.pop();
    }
    (tokens, classes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NamePattern {
    FirstLast,
    TitleFirstLast,
    ModifiedFirstLast,
    TitleLast,
    Lastname,
    ModifiedLast,
    Firstname,
}

const PATTERN_ORDER: [NamePattern; 7] = [
    NamePattern::FirstLast,
    NamePattern::TitleFirstLast,
    NamePattern::ModifiedFirstLast,
    NamePattern::TitleLast,
    NamePattern::Lastname,
    NamePattern::ModifiedLast,
    NamePattern::Firstname,
];

#[derive(Debug, Default)]
struct NameInventory {
    firstnames: BTreeSet<String>,
    lastnames: BTreeSet<String>,
}

impl NameInventory {
    fn collect(chain: &CoreferenceChain, options: &TagOptions) -> Self {
        use TokenClass::*;
        let mut inventory = NameInventory::default();
        for mention in &chain.mentions {
            let (tokens, classes) = head_segment(mention, options);
            match classes.as_slice() {
                [Title, Name] => {
                    inventory.lastnames.insert(tokens[1].to_owned());
                }
                [Title, Name, Name] | [Name, Name] => {
                    let n = tokens.len();
                    inventory.firstnames.insert(tokens[n - 2].to_owned());
                    inventory.lastnames.insert(tokens[n - 1].to_owned());
                }
                [Name, middle @ .., Name]
                    if !middle.is_empty() && middle.iter().all(|c| *c == Initial) =>
                {
                    inventory.firstnames.insert(tokens[0].to_owned());
                    inventory
                        .lastnames
                        .insert(tokens[tokens.len() - 1].to_owned());
                }
                classes
                    if classes.len() >= 3
                        && classes.ends_with(&[Name, Name])
                        && !classes.contains(&Title)
                        && !classes.contains(&Initial) =>
                {
                    let n = tokens.len();
                    inventory.firstnames.insert(tokens[n - 2].to_owned());
                    inventory.lastnames.insert(tokens[n - 1].to_owned());
                }
                _ => {}
            }
        }
        inventory
    }
}

fn matches_pattern(
    pattern: NamePattern,
    tokens: &[&str],
    classes: &[TokenClass],
    inventory: &NameInventory,
    options: &TagOptions,
) -> bool {
    use TokenClass::*;
    match pattern {
        NamePattern::FirstLast => classes == [Name, Name],
        NamePattern::TitleFirstLast => classes == [Title, Name, Name],
        NamePattern::ModifiedFirstLast => {
            if classes.len() < 3 || classes.contains(&Title) {
                return false;
            }
            let plain = classes.ends_with(&[Name, Name]) && !classes.contains(&Initial);
            let with_initial = options.middle_initial_as_modified
                && classes.first() == Some(&Name)
                && classes.last() == Some(&Name);
            plain || with_initial
        }
        NamePattern::TitleLast => classes == [Title, Name],
        NamePattern::Lastname => {
            classes == [Name]
                && (inventory.lastnames.contains(tokens[0])
                    || (inventory.lastnames.is_empty() && inventory.firstnames.is_empty()))
        }
        NamePattern::ModifiedLast => {
            classes.len() >= 2
                && classes.last() == Some(&Name)
                && classes.iter().filter(|c| **c == Name).count() == 1
                && !classes.contains(&Title)
                && !classes.contains(&Initial)
        }
        NamePattern::Firstname => classes == [Name] && inventory.firstnames.contains(tokens[0]),
    }
}

fn join_underscores(tokens: &[&str]) -> String {
    tokens.join("_")
}

fn is_person_type(entity_type: &str) -> bool {
    matches!(
        entity_type.to_ascii_lowercase().as_str(),
        "person" | "human" | "per" | "people"
    )
}

fn chain_is_human(chain: &CoreferenceChain, registry: &EntityRegistry) -> bool {
    if chain
        .mentions
        .iter()
        .any(|m| m.entity_type.as_deref().is_some_and(is_person_type))
    {
        return true;
    }
    // Without type annotations, registry entries for underscore-joined
    // surfaces can still identify persons.
    chain.mentions.iter().any(|m| {
        let key = m.tokens.join("_");
        registry
            .entries
            .get(&key)
            .is_some_and(|meta| meta.is_person())
    })
}

/// Longest contiguous run of proper-noun-like tokens across all mentions;
/// ties keep the earliest.
fn longest_proper_run<'a>(chain: &'a CoreferenceChain, options: &TagOptions) -> Option<Vec<&'a str>> {
    let mut best: Option<Vec<&str>> = None;
    for mention in &chain.mentions {
        let mut run: Vec<&str> = Vec::new();
        let flush = |run: &mut Vec<&'a str>, best: &mut Option<Vec<&'a str>>| {
            if !run.is_empty() && best.as_ref().is_none_or(|b| run.len() > b.len()) {
                *best = Some(run.clone());
            }
            run.clear();
        };
        for (i, token) in mention.tokens.iter().enumerate() {
            let pos = mention
                .pos_tags
                .as_ref()
                .and_then(|tags| tags.get(i))
                .map(String::as_str);
            match classify(token, pos, options) {
                TokenClass::Name | TokenClass::Initial | TokenClass::Suffix => {
                    run.push(token.as_str())
                }
                _ => flush(&mut run, &mut best),
            }
        }
        flush(&mut run, &mut best);
    }
    best
}

/// Keeps only third-person, non-union mentions.
pub fn filter_mentions(chain: &CoreferenceChain) -> CoreferenceChain {
    CoreferenceChain {
        chain_id: chain.chain_id.clone(),
        mentions: chain
            .mentions
            .iter()
            .filter(|m| m.person == Person::Third && !m.is_union)
            .cloned()
            .collect(),
    }
}

/// Picks the delexicalized tag for a filtered, non-empty chain.
pub fn select_chain_tag(
    chain: &CoreferenceChain,
    registry: &EntityRegistry,
    options: &TagOptions,
) -> Result<String, DelexError> {
    if chain.mentions.is_empty() {
        return Err(DelexError::EmptyChain {
            chain_id: chain.chain_id.clone(),
        });
    }
    if chain_is_human(chain, registry) {
        let inventory = NameInventory::collect(chain, options);
        for pattern in PATTERN_ORDER {
            for mention in &chain.mentions {
                let (tokens, classes) = head_segment(mention, options);
                if !tokens.is_empty()
                    && matches_pattern(pattern, &tokens, &classes, &inventory, options)
                {
                    return Ok(join_underscores(&tokens));
                }
            }
        }
    } else if let Some(run) = longest_proper_run(chain, options) {
        return Ok(join_underscores(&run));
    }
    let first = &chain.mentions[0];
    Ok(join_underscores(
        &first.tokens.iter().map(String::as_str).collect::<Vec<_>>(),
    ))
}

/// A corpus-model document built by the pipeline, plus any overlap warnings.
#[derive(Debug)]
pub struct BuiltDocument {
    pub document: Document,
    pub warnings: Vec<String>,
}

/// Delexicalizes one annotated document: every surviving mention becomes a
/// slot carrying the chain's tag, with the original tokens as the gold RE.
/// Mentions overlapping an earlier chain's claim are dropped with a warning.
pub fn build_document(
    doc: &AnnotatedDocument,
    registry: &EntityRegistry,
    k: Option<usize>,
    options: &TagOptions,
) -> Result<BuiltDocument, DelexError> {
    let mut warnings = Vec::new();

    let mut filtered: Vec<CoreferenceChain> = doc
        .chains
        .iter()
        .map(filter_mentions)
        .filter(|c| !c.mentions.is_empty())
        .collect();
    // Earlier chains (by first mention) win token-claim conflicts.
    filtered.sort_by_key(|c| (c.mentions[0].sentence_index, c.mentions[0].start));

    let mut claimed: Vec<Vec<bool>> = doc.sentences.iter().map(|s| vec![false; s.len()]).collect();
    // (sentence, start, end, chain index into `filtered`, mention index)
    let mut placed: Vec<(usize, usize, usize, usize, usize)> = Vec::new();
    for (ci, chain) in filtered.iter().enumerate() {
        for (mi, mention) in chain.mentions.iter().enumerate() {
            let row = &mut claimed[mention.sentence_index];
            if row[mention.start..mention.end].iter().any(|&c| c) {
                warnings.push(format!(
                    "document `{}`: mention of chain `{}` at sentence {} tokens {}..{} overlaps an earlier chain; dropped",
                    doc.doc_id, chain.chain_id, mention.sentence_index, mention.start, mention.end
                ));
                continue;
            }
            row[mention.start..mention.end]
                .iter_mut()
                .for_each(|c| *c = true);
            placed.push((mention.sentence_index, mention.start, mention.end, ci, mi));
        }
    }
    placed.sort_unstable();

    let surviving: BTreeSet<usize> = placed.iter().map(|&(_, _, _, ci, _)| ci).collect();
    let mut tags: Vec<Option<String>> = vec![None; filtered.len()];
    for ci in surviving {
        tags[ci] = Some(select_chain_tag(&filtered[ci], registry, options)?);
    }

    let mut sentences: Vec<Vec<Token>> = Vec::with_capacity(doc.sentences.len());
    let mut slots: Vec<SlotAnnotation> = Vec::new();
    let mut placed_iter = placed.iter().peekable();
    for (si, sentence) in doc.sentences.iter().enumerate() {
        let mut out: Vec<Token> = Vec::with_capacity(sentence.len());
        let mut ti = 0usize;
        while ti < sentence.len() {
            match placed_iter.peek() {
                Some(&&(ps, pstart, pend, ci, mi)) if ps == si && pstart == ti => {
                    let chain = &filtered[ci];
                    let mention = &chain.mentions[mi];
                    let tag = tags[ci].as_ref().expect("tag selected for placed chain");
                    slots.push(SlotAnnotation {
                        sentence_index: si,
                        token_index: out.len(),
                        entity_tag: tag.clone(),
                        gold_re_tokens: mention.tokens.clone(),
                        gold_form: mention.form_annotation,
                        grammatical_role: mention.grammatical_role,
                        chain_id: chain.chain_id.clone(),
                    });
                    out.push(Token::slot(tag.clone()));
                    ti = pend;
                    placed_iter.next();
                }
                _ => {
                    out.push(Token::word(sentence[ti].clone()));
                    ti += 1;
                }
            }
        }
        sentences.push(out);
    }

    Ok(BuiltDocument {
        document: Document {
            doc_id: doc.doc_id.clone(),
            split: doc.split,
            domain_label: doc.domain_label.clone(),
            k_context: k,
            paragraphs: doc.paragraphs.clone(),
            sentences,
            slots,
        },
        warnings,
    })
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct AnnotatedRecord {
    doc_id: String,
    split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    paragraphs: Option<Vec<usize>>,
    sentences: Vec<Vec<String>>,
    chains: Vec<ChainRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChainRecord {
    chain_id: String,
    mentions: Vec<MentionRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MentionRecord {
    sent: usize,
    start: usize,
    end: usize,
    #[serde(default)]
    person: Person,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    is_union: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos_tags: Option<Vec<String>>,
    #[serde(rename = "form", default, skip_serializing_if = "Option::is_none")]
    form_annotation: Option<ReferentialForm>,
    #[serde(rename = "gram_role", default, skip_serializing_if = "Option::is_none")]
    grammatical_role: Option<GrammaticalRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entity_type: Option<String>,
}

/// Parses annotated documents from JSONL, validating spans and within-chain
/// ordering.
pub fn parse_annotated(reader: impl BufRead) -> Result<Vec<AnnotatedDocument>, DelexError> {
    let mut documents = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: AnnotatedRecord =
            serde_json::from_str(line.trim()).map_err(|e| DelexError::Schema {
                line: line_no,
                message: e.to_string(),
            })?;
        documents.push(annotated_from_record(record, line_no)?);
    }
    Ok(documents)
}

fn annotated_from_record(
    record: AnnotatedRecord,
    line: usize,
) -> Result<AnnotatedDocument, DelexError> {
    let mut chains = Vec::with_capacity(record.chains.len());
    for chain_record in record.chains {
        let mut mentions = Vec::with_capacity(chain_record.mentions.len());
        for (mi, m) in chain_record.mentions.into_iter().enumerate() {
            let sentence = record.sentences.get(m.sent).ok_or(DelexError::Schema {
                line,
                message: format!(
                    "chain `{}` mention {mi}: sentence index {} out of range",
                    chain_record.chain_id, m.sent
                ),
            })?;
            if m.start >= m.end || m.end > sentence.len() {
                return Err(DelexError::Schema {
                    line,
                    message: format!(
                        "chain `{}` mention {mi}: span {}..{} invalid for sentence of {} tokens",
                        chain_record.chain_id,
                        m.start,
                        m.end,
                        sentence.len()
                    ),
                });
            }
            if let Some(tags) = &m.pos_tags {
                if tags.len() != m.end - m.start {
                    return Err(DelexError::Schema {
                        line,
                        message: format!(
                            "chain `{}` mention {mi}: {} pos tags for a {}-token span",
                            chain_record.chain_id,
                            tags.len(),
                            m.end - m.start
                        ),
                    });
                }
            }
            mentions.push(Mention {
                sentence_index: m.sent,
                start: m.start,
                end: m.end,
                tokens: sentence[m.start..m.end].to_vec(),
                person: m.person,
                is_union: m.is_union,
                pos_tags: m.pos_tags,
                form_annotation: m.form_annotation,
                grammatical_role: m.grammatical_role,
                entity_type: m.entity_type,
            });
        }
        mentions.sort_by_key(|m| (m.sentence_index, m.start));
        for pair in mentions.windows(2) {
            if pair[0].sentence_index == pair[1].sentence_index && pair[1].start < pair[0].end {
                return Err(DelexError::Schema {
                    line,
                    message: format!(
                        "chain `{}`: overlapping mentions at sentence {} ({}..{} and {}..{})",
                        chain_record.chain_id,
                        pair[0].sentence_index,
                        pair[0].start,
                        pair[0].end,
                        pair[1].start,
                        pair[1].end
                    ),
                });
            }
        }
        chains.push(CoreferenceChain {
            chain_id: chain_record.chain_id,
            mentions,
        });
    }
    Ok(AnnotatedDocument {
        doc_id: record.doc_id,
        split: record.split,
        domain_label: record.domain_label,
        paragraphs: record.paragraphs,
        sentences: record.sentences,
        chains,
    })
}

/// Writes annotated documents as JSONL.
pub fn write_annotated(
    mut writer: impl Write,
    documents: &[AnnotatedDocument],
) -> Result<(), DelexError> {
    for doc in documents {
        let record = AnnotatedRecord {
            doc_id: doc.doc_id.clone(),
            split: doc.split,
            domain_label: doc.domain_label.clone(),
            paragraphs: doc.paragraphs.clone(),
            sentences: doc.sentences.clone(),
            chains: doc
                .chains
                .iter()
                .map(|c| ChainRecord {
                    chain_id: c.chain_id.clone(),
                    mentions: c
                        .mentions
                        .iter()
                        .map(|m| MentionRecord {
                            sent: m.sentence_index,
                            start: m.start,
                            end: m.end,
                            person: m.person,
                            is_union: m.is_union,
                            pos_tags: m.pos_tags.clone(),
                            form_annotation: m.form_annotation,
                            grammatical_role: m.grammatical_role,
                            entity_type: m.entity_type.clone(),
                        })
                        .collect(),
                })
                .collect(),
        };
        let json = serde_json::to_string(&record).map_err(|e| DelexError::Schema {
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(writer, "{json}")?;
    }
    Ok(())
}
