//! Rule-based referential form selection.
//!
//! Two systems share a pronoun dictionary and decide, per slot, between a
//! pronominal and a non-pronominal realization:
//!
//! * [`rreg_s`] pronominalizes a target that is discourse-old and has no
//!   same-pronoun competitor in the current or previous sentence.
//! * [`rreg_l`] additionally requires an antecedent in the previous sentence
//!   and applies grammatical-role parallelism and a local-focus check in the
//!   style of centering theory.
//!
//! Both are deterministic and look only at entity tags, grammatical roles and
//! the pronoun table, never at the gold expression being predicted.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, GrammaticalRole, Instance, Split};
use crate::pronouns::{third_person_lemma, Lemma, Paradigm};

/// Binary referential form decided by the rule systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleForm {
    Pronominal,
    NonPronominal,
}

impl fmt::Display for RuleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleForm::Pronominal => "pronominal",
            RuleForm::NonPronominal => "non_pronominal",
        })
    }
}

/// The single rule branch that produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rationale {
    /// RREG-S: the entity has not been mentioned in the pre-context.
    DiscourseNew,
    /// RREG-S: a same-pronoun entity occurs in the current or previous
    /// sentence.
    CompetitorInWindow,
    /// RREG-S: discourse-old and unambiguous.
    DiscourseOldNoCompetitor,
    /// RREG-L: no antecedent in the previous sentence.
    NoAntecedentInPrevious,
    /// RREG-L: target and previous-sentence antecedent share a subject or
    /// object role.
    ParallelRoles,
    /// RREG-L: antecedent is in the local focus set and no same-pronoun
    /// competitor is.
    FocusWithoutCompetitor,
    /// RREG-L: antecedent exists in the previous sentence but is not in the
    /// local focus set.
    AntecedentNotInFocus,
    /// RREG-L: a same-pronoun competitor is in the local focus set.
    CompetitorInFocus,
}

/// A referential form decision together with the rule branch that fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormDecision {
    pub form: RuleForm,
    pub rationale: Rationale,
}

/// Dictionary of pronoun paradigms per entity tag. Lookups never fail: tags
/// without an entry resolve to the it-paradigm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounTable {
    entries: BTreeMap<String, Paradigm>,
    default: Paradigm,
}

impl Default for PronounTable {
    fn default() -> Self {
        PronounTable {
            entries: BTreeMap::new(),
            default: Lemma::It.paradigm(),
        }
    }
}

impl PronounTable {
    pub fn insert(&mut self, entity_tag: impl Into<String>, paradigm: Paradigm) {
        self.entries.insert(entity_tag.into(), paradigm);
    }

    pub fn paradigm(&self, entity_tag: &str) -> &Paradigm {
        self.entries.get(entity_tag).unwrap_or(&self.default)
    }

    pub fn contains(&self, entity_tag: &str) -> bool {
        self.entries.contains_key(entity_tag)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Builds the pronoun table from the training split and the registry.
///
/// Entities with pronominal gold REs in training get the paradigm of their
/// most frequent pronoun lemma (ties broken he > she > it > they). Entities
/// known only to the registry get their stored paradigm when present, and
/// otherwise one derived from meta-information: female persons take the
/// she-paradigm, male persons the he-paradigm, plural entities the
/// they-paradigm, everything else the it-paradigm.
pub fn build_pronoun_table(corpus: &Corpus) -> PronounTable {
    let mut counts: BTreeMap<&str, BTreeMap<Lemma, usize>> = BTreeMap::new();
    for doc in corpus.split_documents(Split::Train) {
        for slot in &doc.slots {
            if let [token] = slot.gold_re_tokens.as_slice() {
                if let Some(lemma) = third_person_lemma(token) {
                    *counts
                        .entry(slot.entity_tag.as_str())
                        .or_default()
                        .entry(lemma)
                        .or_default() += 1;
                }
            }
        }
    }

    let mut table = PronounTable::default();
    for (tag, lemma_counts) in counts {
        let best = Lemma::ALL
            .iter()
            .copied()
            .max_by_key(|l| {
                (
                    lemma_counts.get(l).copied().unwrap_or(0),
                    // Reverse declaration order so that earlier lemmas win ties.
                    std::cmp::Reverse(*l),
                )
            })
            .expect("lemma inventory is non-empty");
        table.insert(tag.to_owned(), best.paradigm());
    }

    for (tag, meta) in &corpus.registry.entries {
        if table.contains(tag) {
            continue;
        }
        let paradigm = match &meta.pronouns {
            Some(stored) => stored.complete(),
            None => derive_lemma(meta).paradigm(),
        };
        table.insert(tag.clone(), paradigm);
    }
    table
}

fn derive_lemma(meta: &crate::corpus::EntityMeta) -> Lemma {
    use crate::corpus::{Gender, Plurality};
    if meta.is_person() && meta.gender == Gender::Female {
        Lemma::She
    } else if meta.is_person() && meta.gender == Gender::Male {
        Lemma::He
    } else if meta.plurality == Plurality::Plural {
        Lemma::They
    } else {
        Lemma::It
    }
}

/// True iff the entity tag occurs anywhere in the instance's pre-context.
pub fn is_discourse_old(instance: &Instance) -> bool {
    instance
        .pre_context
        .iter()
        .any(|t| t.is_entity_slot && t.surface == instance.entity_tag)
}

/// Entity tags within the last `prev_sentences` sentences plus the current
/// one that would be referred to with the same pronoun as the target.
pub fn competitors(
    instance: &Instance,
    table: &PronounTable,
    prev_sentences: usize,
) -> BTreeSet<String> {
    let target_nom = &table.paradigm(&instance.entity_tag).nominative;
    let cur = instance.current_sentence_index;
    let lo = cur.saturating_sub(prev_sentences);

    let mut out = BTreeSet::new();
    let pre = instance
        .pre_context
        .iter()
        .zip(&instance.pre_sentence_indices);
    let post = instance
        .post_context
        .iter()
        .zip(&instance.post_sentence_indices);
    for (token, &sent) in pre.chain(post) {
        if !token.is_entity_slot || sent < lo || sent > cur {
            continue;
        }
        if token.surface != instance.entity_tag
            && &table.paradigm(&token.surface).nominative == target_nom
        {
            out.insert(token.surface.clone());
        }
    }
    out
}

/// The two-rule system: pronominal iff discourse-old with no competitor in
/// the current or previous sentence.
pub fn rreg_s(instance: &Instance, table: &PronounTable) -> FormDecision {
    if !is_discourse_old(instance) {
        return FormDecision {
            form: RuleForm::NonPronominal,
            rationale: Rationale::DiscourseNew,
        };
    }
    if !competitors(instance, table, 1).is_empty() {
        return FormDecision {
            form: RuleForm::NonPronominal,
            rationale: Rationale::CompetitorInWindow,
        };
    }
    FormDecision {
        form: RuleForm::Pronominal,
        rationale: Rationale::DiscourseOldNoCompetitor,
    }
}

/// Local focus set of the previous sentence: entities mentioned there that
/// are discourse-old at their mention, plus entities in subject position.
pub fn local_focus_set(instance: &Instance) -> BTreeSet<String> {
    let cur = instance.current_sentence_index;
    if cur == 0 {
        return BTreeSet::new();
    }
    let prev = cur - 1;
    let mut focus = BTreeSet::new();
    for cs in &instance.preceding_slots {
        if cs.sentence_index != prev {
            continue;
        }
        let in_subject_position = cs.grammatical_role == Some(GrammaticalRole::Subject);
        let discourse_old_there = instance.pre_context[..cs.pre_index]
            .iter()
            .any(|t| t.is_entity_slot && t.surface == cs.entity_tag);
        if in_subject_position || discourse_old_there {
            focus.insert(cs.entity_tag.clone());
        }
    }
    focus
}

fn roles_parallel(a: Option<GrammaticalRole>, b: Option<GrammaticalRole>) -> bool {
    matches!(
        (a, b),
        (Some(GrammaticalRole::Subject), Some(GrammaticalRole::Subject))
            | (Some(GrammaticalRole::Object), Some(GrammaticalRole::Object))
    )
}

/// The linguistically informed system. The target is pronominalized when its
/// antecedent sits in the previous sentence and either the grammatical roles
/// are parallel, or the antecedent is in the local focus set with no
/// same-pronoun competitor there.
pub fn rreg_l(instance: &Instance, table: &PronounTable) -> FormDecision {
    let non_pronominal = |rationale| FormDecision {
        form: RuleForm::NonPronominal,
        rationale,
    };

    let antecedent = match instance.antecedent() {
        Some(a) => a,
        None => return non_pronominal(Rationale::NoAntecedentInPrevious),
    };
    let cur = instance.current_sentence_index;
    if cur == 0 || antecedent.sentence_index != cur - 1 {
        return non_pronominal(Rationale::NoAntecedentInPrevious);
    }

    if roles_parallel(antecedent.grammatical_role, instance.grammatical_role) {
        return FormDecision {
            form: RuleForm::Pronominal,
            rationale: Rationale::ParallelRoles,
        };
    }

    let focus = local_focus_set(instance);
    if !focus.contains(&instance.entity_tag) {
        return non_pronominal(Rationale::AntecedentNotInFocus);
    }
    let target_nom = &table.paradigm(&instance.entity_tag).nominative;
    let competitor_in_focus = focus
        .iter()
        .any(|tag| tag != &instance.entity_tag && &table.paradigm(tag).nominative == target_nom);
    if competitor_in_focus {
        non_pronominal(Rationale::CompetitorInFocus)
    } else {
        FormDecision {
            form: RuleForm::Pronominal,
            rationale: Rationale::FocusWithoutCompetitor,
        }
    }
}
