//! Shared fixtures for unit tests.

use crate::corpus::{
    Document, EntityMeta, EntityRegistry, Gender, GrammaticalRole, Plurality, ReferentialForm,
    SlotAnnotation, Split, Token,
};

pub fn sentence(spec: &str) -> Vec<Token> {
    // Tokens prefixed with '@' are entity slots.
    spec.split_whitespace()
        .map(|t| match t.strip_prefix('@') {
            Some(tag) => Token::slot(tag),
            None => Token::word(t),
        })
        .collect()
}

pub fn slot(
    sent: usize,
    tok: usize,
    tag: &str,
    gold: &[&str],
    role: Option<GrammaticalRole>,
    chain: &str,
) -> SlotAnnotation {
    SlotAnnotation {
        sentence_index: sent,
        token_index: tok,
        entity_tag: tag.to_owned(),
        gold_re_tokens: gold.iter().map(|s| (*s).to_owned()).collect(),
        gold_form: None,
        grammatical_role: role,
        chain_id: chain.to_owned(),
    }
}

/// The running example document: a short encyclopedic text about an
/// engineering college, with every mention delexicalized.
pub fn table1_document() -> Document {
    use GrammaticalRole::*;
    let sentences = vec![
        sentence(
            "@AWH_Engineering_College is in @``Kuttikkattoor'' , @India in the state of @Kerala .",
        ),
        sentence("@AWH_Engineering_College has 250 employees and @Kerala is ruled by @Kochi ."),
        sentence("The @Ganges River is also found in @India ."),
    ];
    let mut slots = vec![
        slot(
            0,
            0,
            "AWH_Engineering_College",
            &["AWH", "Engineering", "College"],
            Some(Subject),
            "cA",
        ),
        slot(0, 3, "``Kuttikkattoor''", &["Kuttikkattoor"], Some(Other), "cK"),
        slot(0, 5, "India", &["India"], Some(Other), "cI"),
        slot(0, 10, "Kerala", &["Kerala"], Some(Other), "cE"),
        slot(
            1,
            0,
            "AWH_Engineering_College",
            &["The", "school"],
            Some(Subject),
            "cA",
        ),
        slot(1, 5, "Kerala", &["Kerala"], Some(Subject), "cE"),
        slot(1, 9, "Kochi", &["Kochi"], Some(Object), "cO"),
        slot(2, 1, "Ganges", &["Ganges"], Some(Subject), "cG"),
        slot(2, 7, "India", &["India"], Some(Other), "cI"),
    ];
    slots[0].gold_form = Some(ReferentialForm::ProperName);
    slots[4].gold_form = Some(ReferentialForm::Description);
    Document {
        doc_id: "table1".to_owned(),
        split: Split::Test,
        domain_label: Some("seen".to_owned()),
        k_context: None,
        paragraphs: None,
        sentences,
        slots,
    }
}

pub fn table1_registry() -> EntityRegistry {
    let mut registry = EntityRegistry::new();
    let mut add = |tag: &str, ty: &str| {
        registry.entries.insert(
            tag.to_owned(),
            EntityMeta {
                entity_type: ty.to_owned(),
                gender: Gender::Neuter,
                plurality: Plurality::Singular,
                pronouns: None,
            },
        );
    };
    add("AWH_Engineering_College", "SCHOOL");
    add("``Kuttikkattoor''", "CITY");
    add("India", "COUNTRY");
    add("Kerala", "STATE");
    add("Kochi", "CITY");
    add("Ganges", "RIVER");
    registry
}
