//! Greedy decision-tree search for timed-sequence rules.
//!
//! The search works on a template of `n + 1` bucket slots separated by
//! `[0:k]` intervals. Each tree node holds a partial assignment of literals
//! to slots and the traces that reached it. A split adds one literal to one
//! slot and sends traces whose cause still matches to the "present" child,
//! the others to the "absent" child, choosing the split with the highest
//! information gain on the target outcome.
//!
//! Partial rules are always evaluated in merged form: empty slots between
//! literals widen the surrounding interval, and leading or trailing empty
//! slots vanish. Because only relative slot positions matter in that form,
//! a node stores just the occupied span, and candidates may extend the span
//! to either side as long as it stays within `n + 1` slots.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::predicate::{Level, PredicateSet};
use crate::rule::{
    Bucket, CompiledRule, Interval, Literal, PreparedDataset, RuleError, RuleMetrics, TemporalRule,
};
use crate::trace::Dataset;

const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MinerError {
    #[error("invalid miner config: {0}")]
    InvalidConfig(String),
    #[error("target effect `{0}` holds for no trace")]
    NoEffectObserved(String),
    #[error("rule matches no trace")]
    NoSupport,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

pub type Result<T> = std::result::Result<T, MinerError>;

/// Order in which equally good splits are preferred. Only one policy exists:
/// earlier slot first, then predicate name, then the plain literal before
/// its negation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    SlotNameSign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinerConfig {
    /// Number of intervals in the template; buckets = n + 1.
    pub n: usize,
    /// Interval quantum in seconds.
    pub k: i64,
    /// Maximum literals per rule.
    pub max_depth: usize,
    pub target_effect: String,
    pub min_support: f64,
    pub purity_threshold: f64,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl MinerConfig {
    pub fn new(target_effect: impl Into<String>) -> Self {
        MinerConfig {
            n: 3,
            k: 10_000,
            max_depth: 10,
            target_effect: target_effect.into(),
            min_support: 0.1,
            purity_threshold: 0.6,
            tie_break: TieBreak::SlotNameSign,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MinerError::InvalidConfig(m.to_string()));
        if self.k <= 0 {
            return bad("k must be positive");
        }
        if self.max_depth < 1 {
            return bad("max depth must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.min_support) {
            return bad("min support must lie in [0, 1]");
        }
        if !(self.purity_threshold > 0.5 && self.purity_threshold <= 1.0) {
            return bad("purity threshold must lie in (0.5, 1]");
        }
        if self.n > 64 {
            return bad("n larger than 64 is not supported");
        }
        Ok(())
    }
}

/// Binary entropy (bits) of `positive` out of `total`.
pub fn entropy(positive: usize, total: usize) -> f64 {
    if total == 0 || positive == 0 || positive == total {
        return 0.0;
    }
    let p = positive as f64 / total as f64;
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Gain of splitting `(positive, total)` into a matched part and the rest.
pub fn information_gain(parent: (usize, usize), matched: (usize, usize)) -> f64 {
    let (pp, pt) = parent;
    let (mp, mt) = matched;
    if pt == 0 {
        return 0.0;
    }
    let (rp, rt) = (pp - mp, pt - mt);
    let weighted = (mt as f64 * entropy(mp, mt) + rt as f64 * entropy(rp, rt)) / pt as f64;
    entropy(pp, pt) - weighted
}

type Slot = Vec<(usize, bool)>;

/// A node of the search tree.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    /// Occupied template span in time order; empty only at the root.
    pub slots: Vec<Slot>,
    /// Indices of the traces that reached this node.
    pub members: Vec<usize>,
    /// Literals assigned on the path from the root.
    pub depth: usize,
}

impl TreeNode {
    pub fn root(trace_count: usize) -> Self {
        TreeNode {
            slots: Vec::new(),
            members: (0..trace_count).collect(),
            depth: 0,
        }
    }
}

/// Adds `(predicate, negated)` at `offset` relative to the first occupied
/// slot. Negative offsets prepend slots, offsets past the end append.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub offset: isize,
    pub predicate: usize,
    pub negated: bool,
}

fn extend_slots(slots: &[Slot], c: Candidate) -> Vec<Slot> {
    let mut out = slots.to_vec();
    let mut at = c.offset;
    if at < 0 {
        let pad = (-at) as usize;
        out.splice(0..0, std::iter::repeat_n(Vec::new(), pad));
        at = 0;
    }
    let at = at as usize;
    if at >= out.len() {
        out.resize(at + 1, Vec::new());
    }
    out[at].push((c.predicate, c.negated));
    out
}

/// Merged-form compiled rule for a slot span.
fn compile_slots(slots: &[Slot], k: i64, effect: usize) -> CompiledRule {
    let mut buckets = Vec::new();
    let mut intervals = Vec::new();
    let mut last: Option<usize> = None;
    for (pos, slot) in slots.iter().enumerate() {
        if slot.is_empty() {
            continue;
        }
        if let Some(prev) = last {
            let hi = (pos - prev) as i64 * k;
            intervals.push(Interval::new(0, hi).expect("non-negative interval"));
        }
        buckets.push(slot.clone());
        last = Some(pos);
    }
    if buckets.is_empty() {
        buckets.push(Vec::new());
    }
    CompiledRule::from_parts(buckets, intervals, effect)
}

/// Template rule (uniform `[0:k]` intervals, empty slots kept) for a span.
fn template_rule(slots: &[Slot], k: i64, effect: &str, predicates: &PredicateSet) -> TemporalRule {
    if slots.is_empty() {
        return TemporalRule::tautology(effect);
    }
    let name = |i: usize| predicates.defs()[i].name.clone();
    let buckets = slots
        .iter()
        .map(|slot| {
            let literals = slot
                .iter()
                .map(|&(p, negated)| Literal {
                    predicate: name(p),
                    negated,
                })
                .collect();
            Bucket::new(literals).expect("miner never repeats a predicate in a slot")
        })
        .collect();
    let intervals = vec![Interval::new(0, k).expect("k > 0"); slots.len() - 1];
    TemporalRule::new(buckets, intervals, effect).expect("well-formed template")
}

/// Drops empty buckets. An interior empty bucket's two neighbouring
/// intervals are summed; leading and trailing empty buckets are removed
/// with their single adjacent interval. A rule with no literals becomes
/// `true |-> E`.
pub fn merge_empty_buckets(rule: &TemporalRule) -> TemporalRule {
    let mut buckets = Vec::new();
    let mut intervals = Vec::new();
    let (mut acc_lo, mut acc_hi) = (0i64, 0i64);
    for (j, bucket) in rule.buckets().iter().enumerate() {
        if j > 0 && !buckets.is_empty() {
            let gap = rule.intervals()[j - 1];
            acc_lo += gap.lo();
            acc_hi += gap.hi();
        }
        if !bucket.is_empty() {
            if !buckets.is_empty() {
                intervals.push(Interval::new(acc_lo, acc_hi).expect("sum of valid intervals"));
            }
            buckets.push(bucket.clone());
            (acc_lo, acc_hi) = (0, 0);
        }
    }
    if buckets.is_empty() {
        return TemporalRule::tautology(rule.effect());
    }
    TemporalRule::new(buckets, intervals, rule.effect()).expect("merged rule is well-formed")
}

/// Lowers each interval's upper bound, in order, to the smallest positive
/// multiple of `k` that keeps the set of matched traces unchanged. Lower
/// bounds are kept.
pub fn refine_intervals(
    rule: &TemporalRule,
    dataset: &Dataset,
    predicates: &PredicateSet,
    k: i64,
) -> Result<TemporalRule> {
    if k <= 0 {
        return Err(MinerError::InvalidConfig("k must be positive".into()));
    }
    let prepared = PreparedDataset::new(dataset, predicates)?;
    refine_prepared(rule, &prepared, k)
}

fn refine_prepared(rule: &TemporalRule, prepared: &PreparedDataset<'_>, k: i64) -> Result<TemporalRule> {
    let matched_by = |r: &TemporalRule| -> Result<Vec<bool>> {
        Ok(prepared.matched(&CompiledRule::new(r, prepared.predicates)?))
    };
    let baseline = matched_by(rule)?;
    if !baseline.iter().any(|&m| m) {
        return Err(MinerError::NoSupport);
    }
    let mut current = rule.clone();
    for j in 0..current.intervals().len() {
        let interval = current.intervals()[j];
        let mut m = 1i64;
        while m * k < interval.hi() {
            let hi = m * k;
            m += 1;
            if hi < interval.lo() {
                continue;
            }
            let mut intervals = current.intervals().to_vec();
            intervals[j] = Interval::new(interval.lo(), hi)?;
            let candidate = current.with_intervals(intervals)?;
            if matched_by(&candidate)? == baseline {
                current = candidate;
                break;
            }
        }
    }
    Ok(current)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinedRule {
    pub rule: TemporalRule,
    pub metrics: RuleMetrics,
}

/// Tree-growing state over one prepared dataset and target.
pub struct Miner<'a> {
    prepared: PreparedDataset<'a>,
    config: MinerConfig,
    effect: usize,
    labels: Vec<bool>,
    /// Fewest traces a leaf needs to be emitted.
    min_leaf: f64,
    /// Event-level predicate indices ordered by name.
    candidates: Vec<usize>,
}

impl<'a> Miner<'a> {
    pub fn new(dataset: &'a Dataset, config: MinerConfig, predicates: &'a PredicateSet) -> Result<Self> {
        config.validate()?;
        let effect = predicates
            .index_of(&config.target_effect)
            .ok_or_else(|| RuleError::from(crate::predicate::PredicateError::UnknownPredicate(
                config.target_effect.clone(),
            )))?;
        if predicates.defs()[effect].level() != Level::Trace {
            return Err(RuleError::EffectNotOutcome(config.target_effect.clone()).into());
        }
        if dataset.is_empty() {
            return Err(RuleError::EmptyDataset.into());
        }
        let prepared = PreparedDataset::new(dataset, predicates)?;
        let labels = prepared.effect_labels(effect)?;
        if !labels.iter().any(|&l| l) {
            return Err(MinerError::NoEffectObserved(config.target_effect.clone()));
        }
        let mut candidates: Vec<usize> = predicates.event_level().map(|(i, _)| i).collect();
        candidates.sort_by(|&a, &b| predicates.defs()[a].name.cmp(&predicates.defs()[b].name));
        let min_leaf = config.min_support * dataset.len() as f64;
        Ok(Miner {
            prepared,
            config,
            effect,
            labels,
            min_leaf,
            candidates,
        })
    }

    pub fn config(&self) -> &MinerConfig {
        &self.config
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    /// Split candidates at `node` in tie-break order.
    pub fn candidates(&self, node: &TreeNode) -> Vec<Candidate> {
        if node.depth >= self.config.max_depth {
            return Vec::new();
        }
        let span = node.slots.len() as isize;
        let slots_total = self.config.n as isize + 1;
        let offsets = if span == 0 { 0..=0 } else { (span - slots_total)..=(slots_total - 1) };
        let mut out = Vec::new();
        for offset in offsets {
            let occupied: &[(usize, bool)] = if (0..span).contains(&offset) {
                &node.slots[offset as usize]
            } else {
                &[]
            };
            for &predicate in &self.candidates {
                if occupied.iter().any(|&(p, _)| p == predicate) {
                    continue;
                }
                for negated in [false, true] {
                    out.push(Candidate {
                        offset,
                        predicate,
                        negated,
                    });
                }
            }
        }
        out
    }

    fn matched_members(&self, slots: &[Slot], members: &[usize]) -> Vec<bool> {
        let compiled = compile_slots(slots, self.config.k, self.effect);
        members
            .iter()
            .map(|&t| self.prepared.witness(&compiled, t).is_some())
            .collect()
    }

    fn counts(&self, members: &[usize]) -> (usize, usize) {
        (members.iter().filter(|&&t| self.labels[t]).count(), members.len())
    }

    /// Information gain on the target label from adding `candidate` to `node`.
    pub fn split_gain(&self, node: &TreeNode, candidate: Candidate) -> f64 {
        let slots = extend_slots(&node.slots, candidate);
        let matched = self.matched_members(&slots, &node.members);
        let hit: Vec<usize> = node
            .members
            .iter()
            .zip(&matched)
            .filter(|(_, &m)| m)
            .map(|(&t, _)| t)
            .collect();
        information_gain(self.counts(&node.members), self.counts(&hit))
    }

    fn best_split(&self, node: &TreeNode) -> Option<(Candidate, f64)> {
        let mut best: Option<(Candidate, f64)> = None;
        for c in self.candidates(node) {
            let gain = self.split_gain(node, c);
            if gain <= GAIN_EPSILON {
                continue;
            }
            if best.is_none_or(|(_, g)| gain > g + GAIN_EPSILON) {
                best = Some((c, gain));
            }
        }
        best
    }

    fn grow(&self, node: TreeNode, leaves: &mut Vec<Vec<Slot>>) {
        if node.members.is_empty() {
            return;
        }
        let (pos, total) = self.counts(&node.members);
        // No leaf below a node this small could be emitted.
        if (total as f64) < self.min_leaf {
            return;
        }
        let purity = pos as f64 / total as f64;
        // A rule needs at least one literal, so the root always tries a split.
        let split = if node.depth > 0 && purity >= self.config.purity_threshold {
            None
        } else {
            self.best_split(&node)
        };
        let Some((candidate, _)) = split else {
            if node.depth > 0 && purity >= self.config.purity_threshold {
                leaves.push(node.slots);
            }
            return;
        };
        let slots = extend_slots(&node.slots, candidate);
        let matched = self.matched_members(&slots, &node.members);
        let (mut present, mut absent) = (Vec::new(), Vec::new());
        for (&t, m) in node.members.iter().zip(matched) {
            if m {
                present.push(t);
            } else {
                absent.push(t);
            }
        }
        self.grow(
            TreeNode {
                slots,
                members: present,
                depth: node.depth + 1,
            },
            leaves,
        );
        self.grow(
            TreeNode {
                slots: node.slots,
                members: absent,
                depth: node.depth,
            },
            leaves,
        );
    }

    /// Grows the tree and returns the qualifying leaf rules, best first.
    pub fn mine(&self) -> Result<Vec<MinedRule>> {
        let mut leaves = Vec::new();
        self.grow(TreeNode::root(self.prepared.len()), &mut leaves);

        let predicates = self.prepared.predicates;
        let mut out: Vec<MinedRule> = Vec::new();
        for slots in leaves {
            let template = template_rule(&slots, self.config.k, &self.config.target_effect, predicates);
            let merged = merge_empty_buckets(&template);
            let compiled = CompiledRule::new(&merged, predicates)?;
            let metrics = self.prepared.metrics(&compiled)?;
            if metrics.counts.matched == 0 {
                continue;
            }
            let confidence = metrics.confidence.unwrap_or(0.0);
            if confidence < self.config.purity_threshold || metrics.support < self.config.min_support {
                continue;
            }
            let rule = refine_prepared(&merged, &self.prepared, self.config.k)?;
            if out.iter().any(|m| m.rule == rule) {
                continue;
            }
            out.push(MinedRule { rule, metrics });
        }
        out.sort_by(|a, b| {
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
        });
        Ok(out)
    }
}

pub fn mine(dataset: &Dataset, config: &MinerConfig, predicates: &PredicateSet) -> Result<Vec<MinedRule>> {
    Miner::new(dataset, config.clone(), predicates)?.mine()
}
