//! Explain how multi-party dialogues end.
//!
//! The pipeline turns raw messages into attributed event traces
//! ([`featurize`]), discretizes event attributes into named predicates
//! ([`predicate`]), and mines timed-sequence rules of the form
//! `B_m ##[lo:hi] ... ##[lo:hi] B_0 |-> E` ([`rule`], [`miner`]) that
//! explain a chosen outcome.

pub mod cli;
pub mod featurize;
pub mod miner;
pub mod oracle;
pub mod predicate;
pub mod rule;
pub mod synth;
pub mod trace;

pub use featurize::{featurize_corpus, featurize_dialogue, LexiconSet, RawMessage};
pub use miner::{merge_empty_buckets, mine, refine_intervals, MinedRule, MinerConfig};
pub use predicate::{compile_predicates, default_table1_config, PredicateConfig, PredicateSet};
pub use rule::{evaluate_rule, match_cause, parse_rule, render_rule, RuleMetrics, TemporalRule, Witness};
pub use trace::{load_traces, validate_trace, write_traces, Dataset, DialogueTrace, Event, Outcome};
