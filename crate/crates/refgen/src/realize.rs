//! Surface realization of referential form decisions.

use serde::{Deserialize, Serialize};

use crate::corpus::{GrammaticalRole, Instance, ReferentialForm};
use crate::pronouns::PronounCase;
use crate::rules::{FormDecision, PronounTable, RuleForm};

/// A realized referring expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedRe {
    pub tokens: Vec<String>,
    pub form_used: ReferentialForm,
}

impl RealizedRe {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Expands an entity tag into its proper-name form by replacing underscores
/// with whitespace.
pub fn realize_proper_name(entity_tag: &str) -> RealizedRe {
    let tokens = entity_tag
        .split('_')
        .filter(|part| !part.is_empty())
        .map(str::to_owned)
        .collect::<Vec<_>>();
    let tokens = if tokens.is_empty() {
        vec![entity_tag.to_owned()]
    } else {
        tokens
    };
    RealizedRe {
        tokens,
        form_used: ReferentialForm::ProperName,
    }
}

/// Picks a pronoun from the entity's paradigm: subjects take the nominative,
/// objects the accusative, anything else the nominative. An explicit case
/// overrides the role mapping. Sentence-initial pronouns are capitalized.
pub fn realize_pronoun(
    entity_tag: &str,
    role: Option<GrammaticalRole>,
    case_override: Option<PronounCase>,
    sentence_initial: bool,
    table: &PronounTable,
) -> RealizedRe {
    let case = case_override.unwrap_or(match role {
        Some(GrammaticalRole::Object) => PronounCase::Accusative,
        _ => PronounCase::Nominative,
    });
    let mut form = table.paradigm(entity_tag).form(case).to_owned();
    if sentence_initial {
        form = capitalize_first(&form);
    }
    RealizedRe {
        tokens: vec![form],
        form_used: ReferentialForm::Pronoun,
    }
}

/// Realizes a rule-system decision for an instance.
pub fn realize(decision: &FormDecision, instance: &Instance, table: &PronounTable) -> RealizedRe {
    match decision.form {
        RuleForm::Pronominal => realize_pronoun(
            &instance.entity_tag,
            instance.grammatical_role,
            None,
            instance.is_sentence_initial(),
            table,
        ),
        RuleForm::NonPronominal => realize_proper_name(&instance.entity_tag),
    }
}

pub fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}
