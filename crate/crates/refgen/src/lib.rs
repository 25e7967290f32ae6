//! Referring expression generation (REG) in linguistic context.
//!
//! The crate covers the full pipeline:
//!
//! 1. [`delex`] builds delexicalized REG corpora from coreference-annotated
//!    documents: every mention of an entity is replaced by a canonical tag
//!    such as `Barack_Obama`, leaving a *slot* for generators to fill.
//! 2. [`corpus`] is the data model and JSONL persistence for those corpora,
//!    including instance extraction (one instance per slot, with a
//!    configurable sentence window of context) and relexicalization of
//!    generated expressions back into running text.
//! 3. [`rules`] holds two rule-based generators: a two-rule system built on
//!    discourse-oldness and pronoun competition, and a centering-style system
//!    built on local focus and grammatical-role parallelism.
//! 4. [`features`] and [`ml`] implement the feature-based route: categorical
//!    feature extraction with trained quantile binners, a three-way
//!    referential form classifier, and frequency-based content selection with
//!    feature back-off.
//! 5. [`metrics`] scores any system's predictions: RE accuracy, string edit
//!    distance, corpus BLEU over relexicalized text, text/sentence accuracy,
//!    and pronominalization precision/recall/F1, with seen/unseen breakdowns.
//!
//! The `refgen` binary exposes all of this as `build-corpus`, `train`,
//! `generate`, `evaluate` and `report` subcommands.

pub mod corpus;
pub mod delex;
#[cfg(test)]
pub(crate) mod testutil;
pub mod features;
pub mod metrics;
pub mod ml;
pub mod pipeline;
pub mod pronouns;
pub mod realize;
pub mod rules;
