//! Brute-force reference implementations for small instances.
//!
//! Nothing here shares code with the dynamic-programming matcher or the
//! greedy miner beyond predicate evaluation and the rule types, so tests can
//! use these as ground truth.

use thiserror::Error;

use crate::miner::{MinedRule, MinerConfig};
use crate::predicate::{Level, PredicateError, PredicateSet};
use crate::rule::{Bucket, Interval, Literal, RuleError, RuleMetrics, TemporalRule, Witness};
use crate::trace::{Dataset, DialogueTrace};

pub const MAX_EVENTS: usize = 16;
pub const MAX_BUCKETS: usize = 4;
pub const MAX_PREDICATES: usize = 30;
pub const MAX_TRACES: usize = 50;
pub const MAX_LITERALS: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

fn bucket_holds(bucket: &Bucket, trace: &DialogueTrace, event: usize, predicates: &PredicateSet) -> Result<bool> {
    for lit in bucket.literals() {
        let def = predicates.lookup(&lit.predicate)?;
        if def.eval_event(&trace.events()[event])? == lit.negated {
            return Ok(false);
        }
    }
    Ok(true)
}

fn tuple_holds(rule: &TemporalRule, trace: &DialogueTrace, tuple: &[usize], predicates: &PredicateSet) -> Result<bool> {
    for (j, &i) in tuple.iter().enumerate() {
        if !bucket_holds(&rule.buckets()[j], trace, i, predicates)? {
            return Ok(false);
        }
    }
    let events = trace.events();
    Ok(rule
        .intervals()
        .iter()
        .zip(tuple.windows(2))
        .all(|(interval, w)| interval.contains(events[w[1]].timestamp - events[w[0]].timestamp)))
}

/// Advances `tuple` to the next strictly increasing tuple over `0..n` in
/// lexicographic order.
fn next_combination(tuple: &mut [usize], n: usize) -> bool {
    let r = tuple.len();
    for pos in (0..r).rev() {
        if tuple[pos] < n - r + pos {
            tuple[pos] += 1;
            for q in pos + 1..r {
                tuple[q] = tuple[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Tries every strictly increasing index tuple in lexicographic order and
/// returns the first that satisfies the rule's cause.
pub fn brute_force_match(
    rule: &TemporalRule,
    trace: &DialogueTrace,
    predicates: &PredicateSet,
) -> Result<Option<Witness>> {
    if trace.len() > MAX_EVENTS {
        return Err(OracleError::InstanceTooLarge(format!(
            "{} events (limit {MAX_EVENTS})",
            trace.len()
        )));
    }
    let depth = rule.buckets().len();
    if depth > MAX_BUCKETS {
        return Err(OracleError::InstanceTooLarge(format!("{depth} buckets (limit {MAX_BUCKETS})")));
    }
    for bucket in rule.buckets() {
        for lit in bucket.literals() {
            predicates.lookup(&lit.predicate)?;
        }
    }
    let n = trace.len();
    if depth > n {
        return Ok(None);
    }
    let mut tuple: Vec<usize> = (0..depth).collect();
    loop {
        if tuple_holds(rule, trace, &tuple, predicates)? {
            return Ok(Some(Witness { indices: tuple }));
        }
        if !next_combination(&mut tuple, n) {
            return Ok(None);
        }
    }
}

/// Number of tuples [`brute_force_match`] may inspect: C(events, buckets).
pub fn tuple_count(events: usize, buckets: usize) -> usize {
    if buckets > events {
        return 0;
    }
    (0..buckets).fold(1usize, |acc, i| acc * (events - i) / (i + 1))
}

fn rank(a: &MinedRule, b: &MinedRule) -> std::cmp::Ordering {
    let corr = |m: &MinedRule| m.metrics.correlation.unwrap_or(0.0);
    corr(b)
        .total_cmp(&corr(a))
        .then(
            b.metrics
                .confidence
                .unwrap_or(0.0)
                .total_cmp(&a.metrics.confidence.unwrap_or(0.0)),
        )
        .then(b.metrics.support.total_cmp(&a.metrics.support))
        .then_with(|| a.rule.render().cmp(&b.rule.render()))
}

/// Enumerates every rule with at most `max_literals` literals that fits the
/// `n`/`k` template (one bucket, or two buckets `[0:g*k]` apart for
/// g in 1..=n) and returns the best one meeting the config's support and
/// purity thresholds, ranked like the miner's output.
pub fn exhaustive_mine(
    dataset: &Dataset,
    predicates: &PredicateSet,
    max_literals: usize,
    config: &MinerConfig,
) -> Result<Option<MinedRule>> {
    if max_literals == 0 || max_literals > MAX_LITERALS {
        return Err(OracleError::InstanceTooLarge(format!(
            "max_literals = {max_literals} (allowed 1..={MAX_LITERALS})"
        )));
    }
    if predicates.len() > MAX_PREDICATES {
        return Err(OracleError::InstanceTooLarge(format!(
            "{} predicates (limit {MAX_PREDICATES})",
            predicates.len()
        )));
    }
    if dataset.len() > MAX_TRACES {
        return Err(OracleError::InstanceTooLarge(format!(
            "{} traces (limit {MAX_TRACES})",
            dataset.len()
        )));
    }
    let effect = predicates.lookup(&config.target_effect)?;
    let labels: Vec<bool> = dataset
        .traces()
        .iter()
        .map(|t| effect.eval_trace(t))
        .collect::<std::result::Result<_, _>>()?;

    let mut literals = Vec::new();
    for def in predicates.defs().iter().filter(|d| d.level() == Level::Event) {
        literals.push(Literal::pos(def.name.clone()));
        literals.push(Literal::neg(def.name.clone()));
    }
    literals.sort();

    let mut rules = Vec::new();
    let single = |lits: Vec<Literal>| Bucket::new(lits).expect("distinct predicates");
    for a in &literals {
        rules.push(TemporalRule::new(vec![single(vec![a.clone()])], vec![], &config.target_effect)?);
    }
    if max_literals >= 2 {
        for (i, a) in literals.iter().enumerate() {
            for b in &literals[i + 1..] {
                if a.predicate != b.predicate {
                    let bucket = single(vec![a.clone(), b.clone()]);
                    rules.push(TemporalRule::new(vec![bucket], vec![], &config.target_effect)?);
                }
            }
        }
        for a in &literals {
            for b in &literals {
                for g in 1..=config.n as i64 {
                    rules.push(TemporalRule::new(
                        vec![single(vec![a.clone()]), single(vec![b.clone()])],
                        vec![Interval::new(0, g * config.k)?],
                        &config.target_effect,
                    )?);
                }
            }
        }
    }

    let mut best: Option<MinedRule> = None;
    for rule in rules {
        let matched = dataset
            .traces()
            .iter()
            .map(|t| brute_force_match(&rule, t, predicates).map(|w| w.is_some()))
            .collect::<Result<Vec<bool>>>()?;
        let metrics = RuleMetrics::from_matches(&matched, &labels);
        let confidence = metrics.confidence.unwrap_or(0.0);
        if metrics.counts.matched == 0
            || confidence < config.purity_threshold
            || metrics.support < config.min_support
        {
            continue;
        }
        let candidate = MinedRule { rule, metrics };
        if best.as_ref().is_none_or(|b| rank(&candidate, b).is_lt()) {
            best = Some(candidate);
        }
    }
    Ok(best)
}
