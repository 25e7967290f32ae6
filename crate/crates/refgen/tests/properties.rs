//! Property tests for the structural invariants of the corpus model and the
//! metric suite.

mod common;

use proptest::prelude::*;

use refgen::corpus::{
    extract_instances, parse_corpus, relexicalize, write_corpus, Corpus, Document,
    EntityRegistry, SlotAnnotation, Split, Token,
};
use refgen::features::{BinScheme, Binner};
use refgen::metrics::{levenshtein, pronominalization_prf, re_accuracy, sed};

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,6}"
}

fn tag() -> impl Strategy<Value = String> {
    "[A-Z][a-z]{1,4}(_[A-Z][a-z]{1,4}){0,2}"
}

/// A small random document: sentences of filler words with slots spliced in.
fn document() -> impl Strategy<Value = Document> {
    let sentence = (prop::collection::vec(word(), 1..6), prop::bool::weighted(0.7));
    prop::collection::vec((sentence, prop::option::of(tag())), 1..6).prop_map(|rows| {
        let mut sentences = Vec::new();
        let mut slots = Vec::new();
        for (si, ((words, slot_at_front), slot_tag)) in rows.into_iter().enumerate() {
            let mut tokens: Vec<Token> = words.into_iter().map(Token::word).collect();
            if let Some(tag) = slot_tag {
                let at = if slot_at_front { 0 } else { tokens.len() };
                tokens.insert(at, Token::slot(tag.clone()));
                slots.push(SlotAnnotation {
                    sentence_index: si,
                    token_index: at,
                    entity_tag: tag.clone(),
                    gold_re_tokens: vec![tag.to_lowercase()],
                    gold_form: None,
                    grammatical_role: None,
                    chain_id: format!("c-{tag}"),
                });
            }
            sentences.push(tokens);
        }
        Document {
            doc_id: "prop".to_owned(),
            split: Split::Train,
            domain_label: None,
            k_context: None,
            paragraphs: None,
            sentences,
            slots,
        }
    })
}

fn oracle_levenshtein(a: &[char], b: &[char]) -> u64 {
    if a.is_empty() {
        return b.len() as u64;
    }
    if b.is_empty() {
        return a.len() as u64;
    }
    let sub = oracle_levenshtein(&a[1..], &b[1..]) + u64::from(a[0] != b[0]);
    let del = oracle_levenshtein(&a[1..], b) + 1;
    let ins = oracle_levenshtein(a, &b[1..]) + 1;
    sub.min(del).min(ins)
}

proptest! {
    #[test]
    fn corpus_roundtrips_through_jsonl(doc in document()) {
        let corpus = Corpus::new(vec![doc], EntityRegistry::new());
        let mut buf = Vec::new();
        write_corpus(&corpus, &mut buf).unwrap();
        let parsed = parse_corpus(buf.as_slice()).unwrap();
        prop_assert_eq!(parsed.documents, corpus.documents);
    }

    #[test]
    fn instances_match_slots_in_order(doc in document(), k in prop::option::of(0usize..4)) {
        let instances = extract_instances(&doc, k);
        prop_assert_eq!(instances.len(), doc.slots.len());
        for (i, (instance, slot)) in instances.iter().zip(&doc.slots).enumerate() {
            prop_assert_eq!(instance.slot_index, i);
            prop_assert_eq!(&instance.entity_tag, &slot.entity_tag);
            prop_assert_eq!(instance.current_sentence_index, slot.sentence_index);
        }
    }

    #[test]
    fn smaller_windows_are_contiguous_subspans(doc in document(), k1 in 0usize..3, extra in 0usize..3) {
        let k2 = k1 + extra;
        let narrow = extract_instances(&doc, Some(k1));
        let wide = extract_instances(&doc, Some(k2));
        for (n, w) in narrow.iter().zip(&wide) {
            let n_pre: Vec<&str> = n.pre_context.iter().map(|t| t.surface.as_str()).collect();
            let w_pre: Vec<&str> = w.pre_context.iter().map(|t| t.surface.as_str()).collect();
            prop_assert!(w_pre.ends_with(&n_pre), "pre-context must be a suffix of the wider window");
            let n_post: Vec<&str> = n.post_context.iter().map(|t| t.surface.as_str()).collect();
            let w_post: Vec<&str> = w.post_context.iter().map(|t| t.surface.as_str()).collect();
            prop_assert!(w_post.starts_with(&n_post), "post-context must be a prefix of the wider window");
        }
    }

    #[test]
    fn contexts_reassemble_into_the_window(doc in document(), k in prop::option::of(0usize..4)) {
        for instance in extract_instances(&doc, k) {
            let cur = instance.current_sentence_index;
            let lo = k.map_or(0, |k| cur.saturating_sub(k));
            let hi = k.map_or(doc.sentences.len() - 1, |k| (cur + k).min(doc.sentences.len() - 1));
            let window: Vec<&str> = doc.sentences[lo..=hi]
                .iter()
                .flatten()
                .map(|t| t.surface.as_str())
                .collect();
            let reassembled: Vec<&str> = instance
                .pre_context
                .iter()
                .map(|t| t.surface.as_str())
                .chain(std::iter::once(instance.entity_tag.as_str()))
                .chain(instance.post_context.iter().map(|t| t.surface.as_str()))
                .collect();
            prop_assert_eq!(reassembled, window);
        }
    }

    #[test]
    fn relexicalizing_tags_recovers_the_delexicalized_text(doc in document()) {
        let tags: Vec<Vec<String>> = doc.slots.iter().map(|s| vec![s.entity_tag.clone()]).collect();
        let text = relexicalize(&doc, &tags).unwrap();
        let original: Vec<&str> = doc
            .sentences
            .iter()
            .flatten()
            .map(|t| t.surface.as_str())
            .collect();
        prop_assert_eq!(text, original.join(" "));
    }

    #[test]
    fn sed_is_a_metric(a in "[abc]{0,8}", b in "[abc]{0,8}", c in "[abc]{0,8}") {
        prop_assert_eq!(sed(&a, &a), 0);
        prop_assert_eq!(sed(&a, &b), sed(&b, &a));
        prop_assert!(sed(&a, &c) <= sed(&a, &b) + sed(&b, &c));
        if a != b {
            prop_assert!(sed(&a, &b) > 0);
        }
    }

    #[test]
    fn levenshtein_matches_recursive_oracle(a in "[abc]{0,7}", b in "[abc]{0,7}") {
        let av: Vec<char> = a.chars().collect();
        let bv: Vec<char> = b.chars().collect();
        prop_assert_eq!(levenshtein(&av, &bv), oracle_levenshtein(&av, &bv));
    }

    #[test]
    fn re_accuracy_is_permutation_invariant(
        pairs in prop::collection::vec((prop::collection::vec(word(), 1..3), prop::collection::vec(word(), 1..3)), 1..12),
        seed in 0u64..1000,
    ) {
        let preds: Vec<Vec<String>> = pairs.iter().map(|(p, _)| p.clone()).collect();
        let golds: Vec<Vec<String>> = pairs.iter().map(|(_, g)| g.clone()).collect();
        let base = re_accuracy(&preds, &golds).unwrap();
        // Apply the same pseudo-random permutation to both sides.
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut state = seed.wrapping_add(1);
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let preds_p: Vec<Vec<String>> = order.iter().map(|&i| preds[i].clone()).collect();
        let golds_p: Vec<Vec<String>> = order.iter().map(|&i| golds[i].clone()).collect();
        prop_assert_eq!(base, re_accuracy(&preds_p, &golds_p).unwrap());
    }

    #[test]
    fn f1_is_the_harmonic_mean(labels in prop::collection::vec((any::<bool>(), any::<bool>()), 0..40)) {
        let pred: Vec<bool> = labels.iter().map(|(p, _)| *p).collect();
        let gold: Vec<bool> = labels.iter().map(|(_, g)| *g).collect();
        let (p, r, f1) = pronominalization_prf(&pred, &gold);
        let expected = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        prop_assert!((f1 - expected).abs() < 1e-12);
    }

    #[test]
    fn quantile_binning_is_monotone(
        mut boundaries in prop::collection::btree_set(1u64..200, 0..6),
        d1 in 0u64..300,
        extra in 0u64..100,
    ) {
        let binner = Binner {
            feature: "recency_words".to_owned(),
            scheme: BinScheme::Quantile { groups: boundaries.len() + 1 },
            boundaries: { let v: Vec<u64> = std::mem::take(&mut boundaries).into_iter().collect(); v },
        };
        let d2 = d1 + extra;
        let idx = |label: String| -> usize { label[1..].parse().unwrap() };
        prop_assert!(idx(binner.label(d1)) <= idx(binner.label(d2)));
    }
}
