#![allow(dead_code)]

use std::collections::BTreeSet;

use dialogue_rules::predicate::{Level, PredicateSet};
use dialogue_rules::rule::{Bucket, Interval, Literal};
use dialogue_rules::{compile_predicates, default_table1_config, synth, Dataset, TemporalRule};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn table1() -> PredicateSet {
    compile_predicates(&default_table1_config(), &synth::standard_schema()).unwrap()
}

pub fn event_names(predicates: &PredicateSet) -> Vec<String> {
    predicates
        .defs()
        .iter()
        .filter(|d| d.level() == Level::Event)
        .map(|d| d.name.clone())
        .collect()
}

/// A rule with 1..=max_buckets buckets of up to two literals each and
/// intervals whose bounds lie in `0..=max_bound`.
pub fn random_rule<R: Rng>(rng: &mut R, names: &[String], max_buckets: usize, max_bound: i64) -> TemporalRule {
    let count = rng.gen_range(1..=max_buckets);
    let buckets = (0..count)
        .map(|_| {
            let size = rng.gen_range(0..=2);
            let picked: Vec<&String> = names.choose_multiple(rng, size).collect();
            let literals = picked
                .into_iter()
                .map(|n| if rng.gen_bool(0.4) { Literal::neg(n.clone()) } else { Literal::pos(n.clone()) })
                .collect();
            Bucket::new(literals).unwrap()
        })
        .collect();
    let intervals = (1..count)
        .map(|_| {
            let lo = if rng.gen_bool(0.7) { 0 } else { rng.gen_range(0..=max_bound / 2) };
            Interval::new(lo, rng.gen_range(lo..=max_bound)).unwrap()
        })
        .collect();
    let effect = if rng.gen_bool(0.5) { "SENTIMENT_LOW" } else { "SENTIMENT_HIGH" };
    TemporalRule::new(buckets, intervals, effect).unwrap()
}

pub fn matched_set(matched: &[bool]) -> BTreeSet<usize> {
    matched.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
}

pub fn jaccard(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

pub fn matched_by(rule: &TemporalRule, dataset: &Dataset, predicates: &PredicateSet) -> Vec<bool> {
    dataset
        .traces()
        .iter()
        .map(|t| dialogue_rules::match_cause(rule, t, predicates).unwrap().is_some())
        .collect()
}

/// The six rule bodies printed in the published result tables, with their
/// effects: four explaining positive endings, two negative ones.
pub const PUBLISHED_RULES: [&str; 6] = [
    "!DOMESTIC_WORK_ABSENT && MEDICAL_EMERGENCY_ABSENT |-> SENTIMENT_HIGH",
    "!FAMILY_ABSENT && !SENTIMENT_POS ##[0:20000] !OFFICE_ABSENT ##[0:10000] DOMESTIC_WORK_ABSENT && MEDICAL_EMERGENCY_ABSENT |-> SENTIMENT_HIGH",
    "!FAMILY_ABSENT && !SENTIMENT_POS && OFFICE_ABSENT ##[0:20000] OFFICE_ABSENT && !FAMILY_HIGH && !AGGRESSION_ABSENT ##[0:10000] DOMESTIC_WORK_ABSENT && MEDICAL_EMERGENCY_ABSENT |-> SENTIMENT_HIGH",
    "!FAMILY_ABSENT && !SENTIMENT_POS && OFFICE_ABSENT ##[0:30000] !OFFICE_ABSENT ##[0:20000] OFFICE_ABSENT && !FAMILY_HIGH && AGGRESSION_ABSENT ##[0:10000] DOMESTIC_WORK_ABSENT && MEDICAL_EMERGENCY_ABSENT |-> SENTIMENT_HIGH",
    "!FAMILY_ABSENT && !SENTIMENT_POS ##[0:30000] FAMILY_HIGH && SENTIMENT_VERY_POS ##[0:10000] DOMESTIC_WORK_ABSENT |-> SENTIMENT_LOW",
    "!FAMILY_ABSENT && !SENTIMENT_POS && OFFICE_ABSENT ##[0:30000] DOMESTIC_WORK_ABSENT && SENTIMENT_VERY_POS ##[0:20000] !FAMILY_HIGH ##[0:10000] DOMESTIC_WORK_ABSENT |-> SENTIMENT_LOW",
];
