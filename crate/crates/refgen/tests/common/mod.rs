//! Shared fixtures and generators for the integration tests.

#![allow(dead_code)]

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use refgen::corpus::{
    Corpus, Document, EntityMeta, EntityRegistry, Gender, GrammaticalRole, Plurality,
    ReferentialForm, SlotAnnotation, Split, Token,
};
use refgen::delex::{AnnotatedDocument, CoreferenceChain, Mention, Person};
use refgen::pronouns::Lemma;

pub struct EntitySpec {
    pub tag: &'static str,
    pub entity_type: &'static str,
    pub gender: Gender,
    pub plurality: Plurality,
    pub lemma: Lemma,
    pub description: &'static [&'static str],
}

pub fn entity_pool() -> Vec<EntitySpec> {
    vec![
        EntitySpec {
            tag: "Alice_Smith",
            entity_type: "PERSON",
            gender: Gender::Female,
            plurality: Plurality::Singular,
            lemma: Lemma::She,
            description: &["the", "director"],
        },
        EntitySpec {
            tag: "Bob_Jones",
            entity_type: "PERSON",
            gender: Gender::Male,
            plurality: Plurality::Singular,
            lemma: Lemma::He,
            description: &["the", "analyst"],
        },
        EntitySpec {
            tag: "Carol_Diaz",
            entity_type: "PERSON",
            gender: Gender::Female,
            plurality: Plurality::Singular,
            lemma: Lemma::She,
            description: &["the", "chairwoman"],
        },
        EntitySpec {
            tag: "Acme_Corp.",
            entity_type: "ORGANIZATION",
            gender: Gender::Neuter,
            plurality: Plurality::Singular,
            lemma: Lemma::It,
            description: &["the", "firm"],
        },
        EntitySpec {
            tag: "Globex_Partners",
            entity_type: "ORGANIZATION",
            gender: Gender::Neuter,
            plurality: Plurality::Plural,
            lemma: Lemma::They,
            description: &["the", "partners"],
        },
        EntitySpec {
            tag: "Kerala",
            entity_type: "STATE",
            gender: Gender::Neuter,
            plurality: Plurality::Singular,
            lemma: Lemma::It,
            description: &["the", "state"],
        },
        EntitySpec {
            tag: "Ganges",
            entity_type: "RIVER",
            gender: Gender::Neuter,
            plurality: Plurality::Singular,
            lemma: Lemma::It,
            description: &["the", "river"],
        },
        EntitySpec {
            tag: "Mumbai",
            entity_type: "CITY",
            gender: Gender::Neuter,
            plurality: Plurality::Singular,
            lemma: Lemma::It,
            description: &["the", "city"],
        },
    ]
}

pub fn pool_registry(pool: &[EntitySpec]) -> EntityRegistry {
    let mut registry = EntityRegistry::new();
    for spec in pool {
        registry.entries.insert(
            spec.tag.to_owned(),
            EntityMeta {
                entity_type: spec.entity_type.to_owned(),
                gender: spec.gender,
                plurality: spec.plurality,
                pronouns: None,
            },
        );
    }
    registry
}

const FILLERS: [&str; 12] = [
    "yesterday",
    "reported",
    "strong",
    "results",
    "while",
    "markets",
    "rose",
    "after",
    "the",
    "announcement",
    "again",
    "quietly",
];

fn gold_re_for(
    spec: &EntitySpec,
    role: Option<GrammaticalRole>,
    first_mention: bool,
    rng: &mut ChaCha8Rng,
) -> (Vec<String>, ReferentialForm) {
    let roll: f64 = rng.random();
    if first_mention {
        if roll < 0.8 {
            (
                spec.tag.split('_').map(str::to_owned).collect(),
                ReferentialForm::ProperName,
            )
        } else {
            (
                spec.description.iter().map(|s| (*s).to_owned()).collect(),
                ReferentialForm::Description,
            )
        }
    } else if roll < 0.5 {
        let paradigm = spec.lemma.paradigm();
        let form = match role {
            Some(GrammaticalRole::Object) => paradigm.accusative,
            _ => paradigm.nominative,
        };
        (vec![form], ReferentialForm::Pronoun)
    } else if roll < 0.8 {
        (
            spec.tag.split('_').map(str::to_owned).collect(),
            ReferentialForm::ProperName,
        )
    } else {
        (
            spec.description.iter().map(|s| (*s).to_owned()).collect(),
            ReferentialForm::Description,
        )
    }
}

fn random_role(rng: &mut ChaCha8Rng) -> Option<GrammaticalRole> {
    match rng.random_range(0..4) {
        0 => Some(GrammaticalRole::Subject),
        1 => Some(GrammaticalRole::Object),
        2 => Some(GrammaticalRole::Other),
        _ => None,
    }
}

/// Random delexicalized documents over the shared entity pool. Splits are
/// assigned 60/20/20 when `split_mix` is set (all test otherwise); test
/// documents alternate seen/unseen domain labels when `with_domains` is set.
pub fn synth_corpus(seed: u64, n_docs: usize, split_mix: bool, with_domains: bool) -> Corpus {
    let pool = entity_pool();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut documents = Vec::with_capacity(n_docs);
    for di in 0..n_docs {
        let split = if split_mix {
            match di % 5 {
                0..=2 => Split::Train,
                3 => Split::Dev,
                _ => Split::Test,
            }
        } else {
            Split::Test
        };
        let domain_label = if with_domains && split == Split::Test {
            Some(if di % 2 == 0 { "seen" } else { "unseen" }.to_owned())
        } else {
            None
        };
        let n_sentences = rng.random_range(1..=6);
        let mut sentences: Vec<Vec<Token>> = Vec::with_capacity(n_sentences);
        let mut slots: Vec<SlotAnnotation> = Vec::new();
        let mut mentioned: Vec<&str> = Vec::new();
        for si in 0..n_sentences {
            let mut tokens: Vec<Token> = Vec::new();
            let n_slots = rng.random_range(0..=2);
            for _ in 0..n_slots {
                for _ in 0..rng.random_range(0..=2) {
                    tokens.push(Token::word(*FILLERS.choose(&mut rng).unwrap()));
                }
                let spec = pool.choose(&mut rng).unwrap();
                let role = random_role(&mut rng);
                let first = !mentioned.contains(&spec.tag);
                let (gold, form) = gold_re_for(spec, role, first, &mut rng);
                slots.push(SlotAnnotation {
                    sentence_index: si,
                    token_index: tokens.len(),
                    entity_tag: spec.tag.to_owned(),
                    gold_re_tokens: gold,
                    gold_form: Some(form),
                    grammatical_role: role,
                    chain_id: format!("c-{}", spec.tag),
                });
                tokens.push(Token::slot(spec.tag));
                mentioned.push(spec.tag);
            }
            for _ in 0..rng.random_range(0..=2) {
                tokens.push(Token::word(*FILLERS.choose(&mut rng).unwrap()));
            }
            tokens.push(Token::word("."));
            sentences.push(tokens);
        }
        documents.push(Document {
            doc_id: format!("synth-{di}"),
            split,
            domain_label,
            k_context: None,
            paragraphs: None,
            sentences,
            slots,
        });
    }
    Corpus::new(documents, pool_registry(&pool))
}

struct AnnotatedEntity {
    name: &'static [&'static str],
    entity_type: &'static str,
    pronoun: &'static str,
    expected_tag: &'static str,
}

const ANNOTATED_ENTITIES: [AnnotatedEntity; 4] = [
    AnnotatedEntity {
        name: &["Alice", "Smith"],
        entity_type: "PERSON",
        pronoun: "she",
        expected_tag: "Alice_Smith",
    },
    AnnotatedEntity {
        name: &["Bob", "Jones"],
        entity_type: "PERSON",
        pronoun: "he",
        expected_tag: "Bob_Jones",
    },
    AnnotatedEntity {
        name: &["Acme", "Corp."],
        entity_type: "ORGANIZATION",
        pronoun: "it",
        expected_tag: "Acme_Corp.",
    },
    AnnotatedEntity {
        name: &["Globex", "Partners"],
        entity_type: "ORGANIZATION",
        pronoun: "they",
        expected_tag: "Globex_Partners",
    },
];

/// Random coreference-annotated documents whose chains delexicalize to the
/// `expected_tag`s above. Every mention carries a form annotation and a
/// grammatical role, so the built corpus is trainable.
pub fn synth_annotated(seed: u64, n_docs: usize) -> (Vec<AnnotatedDocument>, EntityRegistry) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut documents = Vec::with_capacity(n_docs);
    for di in 0..n_docs {
        let split = match di % 5 {
            0..=2 => Split::Train,
            3 => Split::Dev,
            _ => Split::Test,
        };
        let n_sentences = rng.random_range(2..=5);
        let mut sentences: Vec<Vec<String>> = Vec::with_capacity(n_sentences);
        let mut mentions_by_entity: Vec<Vec<Mention>> =
            (0..ANNOTATED_ENTITIES.len()).map(|_| Vec::new()).collect();
        for si in 0..n_sentences {
            let mut sentence: Vec<String> = Vec::new();
            let ei = rng.random_range(0..ANNOTATED_ENTITIES.len());
            let entity = &ANNOTATED_ENTITIES[ei];
            let first = mentions_by_entity[ei].is_empty();
            let start = sentence.len();
            let (form, role) = if first || rng.random_bool(0.4) {
                sentence.extend(entity.name.iter().map(|s| (*s).to_owned()));
                (ReferentialForm::ProperName, GrammaticalRole::Subject)
            } else {
                sentence.push(entity.pronoun.to_owned());
                (ReferentialForm::Pronoun, GrammaticalRole::Subject)
            };
            let end = sentence.len();
            mentions_by_entity[ei].push(Mention {
                sentence_index: si,
                start,
                end,
                tokens: sentence[start..end].to_vec(),
                person: Person::Third,
                is_union: false,
                pos_tags: None,
                form_annotation: Some(form),
                grammatical_role: Some(role),
                entity_type: Some(entity.entity_type.to_owned()),
            });
            sentence.push((*FILLERS.choose(&mut rng).unwrap()).to_owned());
            // Optionally a second mention in object position.
            if rng.random_bool(0.5) {
                let oj = rng.random_range(0..ANNOTATED_ENTITIES.len());
                let other = &ANNOTATED_ENTITIES[oj];
                let first = mentions_by_entity[oj].is_empty();
                let start = sentence.len();
                let (form, role) = if first || rng.random_bool(0.6) {
                    sentence.extend(other.name.iter().map(|s| (*s).to_owned()));
                    (ReferentialForm::ProperName, GrammaticalRole::Object)
                } else {
                    sentence.push(match other.pronoun {
                        "he" => "him".to_owned(),
                        "she" => "her".to_owned(),
                        "they" => "them".to_owned(),
                        other => other.to_owned(),
                    });
                    (ReferentialForm::Pronoun, GrammaticalRole::Object)
                };
                let end = sentence.len();
                mentions_by_entity[oj].push(Mention {
                    sentence_index: si,
                    start,
                    end,
                    tokens: sentence[start..end].to_vec(),
                    person: Person::Third,
                    is_union: false,
                    pos_tags: None,
                    form_annotation: Some(form),
                    grammatical_role: Some(role),
                    entity_type: Some(other.entity_type.to_owned()),
                });
            }
            sentence.push(".".to_owned());
            sentences.push(sentence);
        }
        let chains: Vec<CoreferenceChain> = mentions_by_entity
            .into_iter()
            .enumerate()
            .filter(|(_, mentions)| !mentions.is_empty())
            .map(|(ei, mentions)| CoreferenceChain {
                chain_id: format!("chain-{ei}"),
                mentions,
            })
            .collect();
        documents.push(AnnotatedDocument {
            doc_id: format!("annot-{di}"),
            split,
            domain_label: None,
            paragraphs: None,
            sentences,
            chains,
        });
    }
    let mut registry = EntityRegistry::new();
    for entity in &ANNOTATED_ENTITIES {
        registry.entries.insert(
            entity.expected_tag.to_owned(),
            EntityMeta {
                entity_type: entity.entity_type.to_owned(),
                gender: match entity.pronoun {
                    "she" => Gender::Female,
                    "he" => Gender::Male,
                    _ => Gender::Neuter,
                },
                plurality: if entity.pronoun == "they" {
                    Plurality::Plural
                } else {
                    Plurality::Singular
                },
                pronouns: None,
            },
        );
    }
    (documents, registry)
}

/// The running-example document as corpus JSONL, matching the unit fixture.
pub fn table1_corpus_jsonl() -> String {
    let line = serde_json::json!({
        "doc_id": "table1",
        "split": "test",
        "domain_label": "seen",
        "sentences": [
            ["AWH_Engineering_College", "is", "in", "``Kuttikkattoor''", ",", "India",
             "in", "the", "state", "of", "Kerala", "."],
            ["AWH_Engineering_College", "has", "250", "employees", "and", "Kerala",
             "is", "ruled", "by", "Kochi", "."],
            ["The", "Ganges", "River", "is", "also", "found", "in", "India", "."]
        ],
        "slots": [
            {"sent": 0, "tok": 0, "entity_tag": "AWH_Engineering_College",
             "gold_re": ["AWH", "Engineering", "College"], "gold_form": "proper_name",
             "gram_role": "subject", "chain_id": "cA"},
            {"sent": 0, "tok": 3, "entity_tag": "``Kuttikkattoor''",
             "gold_re": ["Kuttikkattoor"], "gram_role": "other", "chain_id": "cK"},
            {"sent": 0, "tok": 5, "entity_tag": "India", "gold_re": ["India"],
             "gram_role": "other", "chain_id": "cI"},
            {"sent": 0, "tok": 10, "entity_tag": "Kerala", "gold_re": ["Kerala"],
             "gram_role": "other", "chain_id": "cE"},
            {"sent": 1, "tok": 0, "entity_tag": "AWH_Engineering_College",
             "gold_re": ["The", "school"], "gold_form": "description",
             "gram_role": "subject", "chain_id": "cA"},
            {"sent": 1, "tok": 5, "entity_tag": "Kerala", "gold_re": ["Kerala"],
             "gram_role": "subject", "chain_id": "cE"},
            {"sent": 1, "tok": 9, "entity_tag": "Kochi", "gold_re": ["Kochi"],
             "gram_role": "object", "chain_id": "cO"},
            {"sent": 2, "tok": 1, "entity_tag": "Ganges", "gold_re": ["Ganges"],
             "gram_role": "subject", "chain_id": "cG"},
            {"sent": 2, "tok": 7, "entity_tag": "India", "gold_re": ["India"],
             "gram_role": "other", "chain_id": "cI"}
        ]
    });
    format!("{line}\n")
}

pub fn table1_registry_json() -> String {
    serde_json::json!({
        "AWH_Engineering_College": {"type": "SCHOOL", "gender": "neuter", "plurality": "singular"},
        "``Kuttikkattoor''": {"type": "CITY", "gender": "neuter", "plurality": "singular"},
        "India": {"type": "COUNTRY", "gender": "neuter", "plurality": "singular"},
        "Kerala": {"type": "STATE", "gender": "neuter", "plurality": "singular"},
        "Kochi": {"type": "CITY", "gender": "neuter", "plurality": "singular"},
        "Ganges": {"type": "RIVER", "gender": "neuter", "plurality": "singular"}
    })
    .to_string()
}

/// Runs the CLI binary with the given arguments.
pub fn run_cli(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_refgen"))
        .args(args)
        .output()
        .expect("failed to run refgen binary")
}
