//! Timed-sequence rules: representation, text syntax, matching and metrics.
//!
//! A rule is a sequence of buckets separated by time intervals, followed by
//! an effect on the trace outcome:
//!
//! ```text
//! !FAMILY_ABSENT && !SENTIMENT_POS ##[0:30000] FAMILY_HIGH ##[0:10000] DOMESTIC_WORK_ABSENT |-> SENTIMENT_LOW
//! ```
//!
//! Grammar (whitespace between tokens is insignificant):
//!
//! ```text
//! rule     := cause "|->" IDENT
//! cause    := bucket { "##[" INT ":" INT "]" bucket }
//! bucket   := "true" | literal { "&&" literal }
//! literal  := ["!"] IDENT
//! ```
//!
//! The cause matches a trace when there are strictly increasing event
//! indices, one per bucket, such that each event satisfies its bucket and
//! each pair of consecutive witness events is separated by a time gap inside
//! the interval between their buckets.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::predicate::{Level, PredicateError, PredicateSet, TruthTable};
use crate::trace::{Dataset, DialogueTrace};

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("predicate `{0}` appears more than once in a bucket")]
    DuplicatePredicateInBucket(String),
    #[error("invalid interval [{lo}:{hi}]")]
    InvalidInterval { lo: i64, hi: i64 },
    #[error("a rule needs at least one bucket and exactly one interval between adjacent buckets")]
    Shape,
    #[error("effect `{0}` is not an outcome predicate")]
    EffectNotOutcome(String),
    #[error("`{0}` is an outcome predicate and cannot appear in a bucket")]
    OutcomeInBucket(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Predicate(#[from] PredicateError),
}

pub type Result<T> = std::result::Result<T, RuleError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub predicate: String,
    pub negated: bool,
}

impl Literal {
    pub fn pos(predicate: impl Into<String>) -> Self {
        Literal {
            predicate: predicate.into(),
            negated: false,
        }
    }

    pub fn neg(predicate: impl Into<String>) -> Self {
        Literal {
            predicate: predicate.into(),
            negated: true,
        }
    }
}

/// Ordered as rendered text: negated literals (`!X`) sort before plain ones,
/// then by predicate name.
impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .negated
            .cmp(&self.negated)
            .then_with(|| self.predicate.cmp(&other.predicate))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!{}", self.predicate)
        } else {
            f.write_str(&self.predicate)
        }
    }
}

/// A conjunction of literals, kept in canonical order. Empty means `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Bucket {
    literals: Vec<Literal>,
}

impl Bucket {
    pub fn new(mut literals: Vec<Literal>) -> Result<Self> {
        literals.sort();
        let mut names: Vec<&str> = literals.iter().map(|l| l.predicate.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(RuleError::DuplicatePredicateInBucket(w[0].to_string()));
        }
        Ok(Bucket { literals })
    }

    pub fn empty() -> Self {
        Bucket::default()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn mentions(&self, predicate: &str) -> bool {
        self.literals.iter().any(|l| l.predicate == predicate)
    }

    pub fn with(&self, literal: Literal) -> Result<Self> {
        let mut literals = self.literals.clone();
        literals.push(literal);
        Bucket::new(literals)
    }

    pub fn without(&self, literal: &Literal) -> Self {
        Bucket {
            literals: self.literals.iter().filter(|l| *l != literal).cloned().collect(),
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("true");
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Closed range of allowed time gaps in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    lo: i64,
    hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo < 0 || lo > hi {
            return Err(RuleError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn contains(&self, gap: i64) -> bool {
        self.lo <= gap && gap <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "##[{}:{}]", self.lo, self.hi)
    }
}

/// Buckets are stored in time order: `buckets[0]` is the earliest.
/// `intervals[j]` separates `buckets[j]` and `buckets[j + 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TemporalRule {
    buckets: Vec<Bucket>,
    intervals: Vec<Interval>,
    effect: String,
}

impl TemporalRule {
    pub fn new(buckets: Vec<Bucket>, intervals: Vec<Interval>, effect: impl Into<String>) -> Result<Self> {
        if buckets.is_empty() || intervals.len() + 1 != buckets.len() {
            return Err(RuleError::Shape);
        }
        Ok(TemporalRule {
            buckets,
            intervals,
            effect: effect.into(),
        })
    }

    /// The rule whose cause holds on every non-empty trace.
    pub fn tautology(effect: impl Into<String>) -> Self {
        TemporalRule {
            buckets: vec![Bucket::empty()],
            intervals: vec![],
            effect: effect.into(),
        }
    }

    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn effect(&self) -> &str {
        &self.effect
    }

    pub fn literal_count(&self) -> usize {
        self.buckets.iter().map(Bucket::len).sum()
    }

    pub fn with_intervals(&self, intervals: Vec<Interval>) -> Result<Self> {
        TemporalRule::new(self.buckets.clone(), intervals, self.effect.clone())
    }

    pub fn with_buckets(&self, buckets: Vec<Bucket>) -> Result<Self> {
        TemporalRule::new(buckets, self.intervals.clone(), self.effect.clone())
    }

    pub fn with_effect(&self, effect: impl Into<String>) -> Self {
        TemporalRule {
            effect: effect.into(),
            ..self.clone()
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TemporalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.buckets[0])?;
        for (interval, bucket) in self.intervals.iter().zip(&self.buckets[1..]) {
            write!(f, " {interval} {bucket}")?;
        }
        write!(f, " |-> {}", self.effect)
    }
}

impl std::str::FromStr for TemporalRule {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self> {
        parse_rule(s)
    }
}

impl Serialize for TemporalRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TemporalRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rule(&s).map_err(serde::de::Error::custom)
    }
}

pub fn render_rule(rule: &TemporalRule) -> String {
    rule.render()
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    True,
    Not,
    And,
    Delay,
    LBracket,
    RBracket,
    Colon,
    Int(i64),
    Implies,
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("`{s}`"),
            Token::True => "`true`".into(),
            Token::Not => "`!`".into(),
            Token::And => "`&&`".into(),
            Token::Delay => "`##`".into(),
            Token::LBracket => "`[`".into(),
            Token::RBracket => "`]`".into(),
            Token::Colon => "`:`".into(),
            Token::Int(i) => format!("`{i}`"),
            Token::Implies => "`|->`".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let token = if rest.starts_with("|->") {
            i += 3;
            Token::Implies
        } else if rest.starts_with("&&") {
            i += 2;
            Token::And
        } else if rest.starts_with("##") {
            i += 2;
            Token::Delay
        } else if c == b'!' {
            i += 1;
            Token::Not
        } else if c == b'[' {
            i += 1;
            Token::LBracket
        } else if c == b']' {
            i += 1;
            Token::RBracket
        } else if c == b':' {
            i += 1;
            Token::Colon
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let value = text[start..i].parse().map_err(|_| RuleError::Syntax {
                pos: start,
                message: "integer out of range".into(),
            })?;
            Token::Int(value)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            match &text[start..i] {
                "true" => Token::True,
                ident => Token::Ident(ident.to_string()),
            }
        } else {
            let ch = rest.chars().next().unwrap_or('?');
            return Err(RuleError::Syntax {
                pos: start,
                message: format!("unexpected character `{ch}`"),
            });
        };
        out.push((start, token));
    }
    out.push((text.len(), Token::Eof));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at].1
    }

    fn pos(&self) -> usize {
        self.tokens[self.at].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].1.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(RuleError::Syntax {
            pos: self.pos(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, token: Token, expected: &str) -> Result<()> {
        if *self.peek() == token {
            self.bump();
            Ok(())
        } else {
            self.fail(expected)
        }
    }

    fn int(&mut self) -> Result<i64> {
        match self.peek() {
            Token::Int(v) => {
                let v = *v;
                self.bump();
                Ok(v)
            }
            _ => self.fail("an integer"),
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String> {
        match self.peek() {
            Token::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.fail(expected),
        }
    }

    fn bucket(&mut self) -> Result<Bucket> {
        if *self.peek() == Token::True {
            self.bump();
            return Ok(Bucket::empty());
        }
        let mut literals = Vec::new();
        loop {
            let negated = if *self.peek() == Token::Not {
                self.bump();
                true
            } else {
                false
            };
            if !negated && !matches!(self.peek(), Token::Ident(_)) {
                return self.fail("`true` or a literal");
            }
            let predicate = self.ident("a predicate name")?;
            literals.push(Literal { predicate, negated });
            if *self.peek() != Token::And {
                break;
            }
            self.bump();
        }
        Bucket::new(literals)
    }

    fn interval(&mut self) -> Result<Interval> {
        self.expect(Token::Delay, "`##`")?;
        self.expect(Token::LBracket, "`[`")?;
        let start = self.pos();
        let lo = self.int()?;
        self.expect(Token::Colon, "`:`")?;
        let hi = self.int()?;
        self.expect(Token::RBracket, "`]`")?;
        Interval::new(lo, hi).map_err(|_| RuleError::Syntax {
            pos: start,
            message: format!("interval bounds must satisfy 0 <= lo <= hi, found [{lo}:{hi}]"),
        })
    }

    fn rule(&mut self) -> Result<TemporalRule> {
        let mut buckets = vec![self.bucket()?];
        let mut intervals = Vec::new();
        while *self.peek() == Token::Delay {
            intervals.push(self.interval()?);
            buckets.push(self.bucket()?);
        }
        self.expect(Token::Implies, "`##[` or `|->`")?;
        let effect = self.ident("an effect predicate")?;
        self.expect(Token::Eof, "end of rule")?;
        TemporalRule::new(buckets, intervals, effect)
    }
}

pub fn parse_rule(text: &str) -> Result<TemporalRule> {
    let mut parser = Parser {
        tokens: lex(text)?,
        at: 0,
    };
    parser.rule()
}

/// Strictly increasing event indices, one per bucket, in bucket order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub indices: Vec<usize>,
}

/// A rule resolved against a predicate set.
#[derive(Clone, Debug)]
pub struct CompiledRule {
    buckets: Vec<Vec<(usize, bool)>>,
    intervals: Vec<Interval>,
    effect: usize,
}

impl CompiledRule {
    pub fn new(rule: &TemporalRule, predicates: &PredicateSet) -> Result<Self> {
        let mut buckets = Vec::with_capacity(rule.buckets.len());
        for bucket in &rule.buckets {
            let mut resolved = Vec::with_capacity(bucket.len());
            for lit in bucket.literals() {
                let idx = predicates
                    .index_of(&lit.predicate)
                    .ok_or_else(|| PredicateError::UnknownPredicate(lit.predicate.clone()))?;
                if predicates.defs()[idx].level() != Level::Event {
                    return Err(RuleError::OutcomeInBucket(lit.predicate.clone()));
                }
                resolved.push((idx, lit.negated));
            }
            buckets.push(resolved);
        }
        let effect = predicates
            .index_of(&rule.effect)
            .ok_or_else(|| PredicateError::UnknownPredicate(rule.effect.clone()))?;
        if predicates.defs()[effect].level() != Level::Trace {
            return Err(RuleError::EffectNotOutcome(rule.effect.clone()));
        }
        Ok(CompiledRule {
            buckets,
            intervals: rule.intervals.clone(),
            effect,
        })
    }

    /// Buckets as `(predicate index, negated)` pairs; indices must refer to
    /// event-level predicates and `effect` to an outcome predicate.
    pub(crate) fn from_parts(buckets: Vec<Vec<(usize, bool)>>, intervals: Vec<Interval>, effect: usize) -> Self {
        debug_assert_eq!(buckets.len(), intervals.len() + 1);
        CompiledRule {
            buckets,
            intervals,
            effect,
        }
    }

    pub fn effect(&self) -> usize {
        self.effect
    }

    fn satisfies(&self, bucket: usize, table: &TruthTable, event: usize) -> bool {
        self.buckets[bucket]
            .iter()
            .all(|&(p, negated)| table.get(event, p) != negated)
    }

    /// Lexicographically earliest witness, or `None`.
    ///
    /// Backward pass: `feasible[j][i]` says event `i` can host bucket `j`
    /// with a valid completion for buckets `j+1..`. Candidate successors of
    /// `i` form a contiguous index window because timestamps are sorted, so
    /// a prefix count over `feasible[j+1]` and two monotone window pointers
    /// give O(events) work per bucket. The forward pass then picks the
    /// smallest feasible index at each step.
    pub fn find_witness(&self, table: &TruthTable, timestamps: &[i64]) -> Option<Witness> {
        let n = timestamps.len();
        let depth = self.buckets.len();
        if n < depth {
            return None;
        }
        let mut feasible = vec![vec![false; n]; depth];
        for i in 0..n {
            feasible[depth - 1][i] = self.satisfies(depth - 1, table, i);
        }
        let mut prefix = vec![0usize; n + 1];
        for j in (0..depth - 1).rev() {
            for i in 0..n {
                prefix[i + 1] = prefix[i] + feasible[j + 1][i] as usize;
            }
            let interval = self.intervals[j];
            let (mut lo_ptr, mut hi_ptr) = (0usize, 0usize);
            for i in 0..n {
                // first index with t >= t_i + lo, and first with t > t_i + hi
                while lo_ptr < n && timestamps[lo_ptr] - timestamps[i] < interval.lo {
                    lo_ptr += 1;
                }
                while hi_ptr < n && timestamps[hi_ptr] - timestamps[i] <= interval.hi {
                    hi_ptr += 1;
                }
                let start = lo_ptr.max(i + 1);
                let reachable = start < hi_ptr && prefix[hi_ptr] > prefix[start];
                feasible[j][i] = reachable && self.satisfies(j, table, i);
            }
        }

        let mut indices = Vec::with_capacity(depth);
        let mut current = (0..n).find(|&i| feasible[0][i])?;
        indices.push(current);
        for j in 1..depth {
            let interval = self.intervals[j - 1];
            let t0 = timestamps[current];
            current = (current + 1..n)
                .take_while(|&i| timestamps[i] - t0 <= interval.hi)
                .find(|&i| timestamps[i] - t0 >= interval.lo && feasible[j][i])
                .expect("feasible prefix always extends");
            indices.push(current);
        }
        Some(Witness { indices })
    }
}

/// Per-trace truth tables and timestamps, computed once per predicate set.
#[derive(Clone, Debug)]
pub struct PreparedDataset<'a> {
    pub dataset: &'a Dataset,
    pub predicates: &'a PredicateSet,
    tables: Vec<TruthTable>,
    timestamps: Vec<Vec<i64>>,
}

impl<'a> PreparedDataset<'a> {
    pub fn new(dataset: &'a Dataset, predicates: &'a PredicateSet) -> Result<Self> {
        let mut tables = Vec::with_capacity(dataset.len());
        let mut timestamps = Vec::with_capacity(dataset.len());
        for trace in dataset.traces() {
            tables.push(predicates.truth_table(trace)?);
            timestamps.push(trace.events().iter().map(|e| e.timestamp).collect());
        }
        Ok(PreparedDataset {
            dataset,
            predicates,
            tables,
            timestamps,
        })
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn table(&self, trace: usize) -> &TruthTable {
        &self.tables[trace]
    }

    pub fn timestamps(&self, trace: usize) -> &[i64] {
        &self.timestamps[trace]
    }

    pub fn witness(&self, rule: &CompiledRule, trace: usize) -> Option<Witness> {
        rule.find_witness(&self.tables[trace], &self.timestamps[trace])
    }

    /// Which traces the rule's cause matches.
    pub fn matched(&self, rule: &CompiledRule) -> Vec<bool> {
        (0..self.len()).map(|t| self.witness(rule, t).is_some()).collect()
    }

    /// Effect label of every trace for the given outcome predicate.
    pub fn effect_labels(&self, effect: usize) -> Result<Vec<bool>> {
        let def = &self.predicates.defs()[effect];
        self.dataset
            .traces()
            .iter()
            .map(|t| def.eval_trace(t).map_err(RuleError::from))
            .collect()
    }

    pub fn metrics(&self, rule: &CompiledRule) -> Result<RuleMetrics> {
        if self.is_empty() {
            return Err(RuleError::EmptyDataset);
        }
        let labels = self.effect_labels(rule.effect)?;
        Ok(RuleMetrics::from_matches(&self.matched(rule), &labels))
    }
}

pub fn match_cause(
    rule: &TemporalRule,
    trace: &DialogueTrace,
    predicates: &PredicateSet,
) -> Result<Option<Witness>> {
    let compiled = CompiledRule::new(rule, predicates)?;
    let table = predicates.truth_table(trace)?;
    let timestamps: Vec<i64> = trace.events().iter().map(|e| e.timestamp).collect();
    Ok(compiled.find_witness(&table, &timestamps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub matched: usize,
    pub matched_and_effect: usize,
    pub effect_total: usize,
    pub dataset_size: usize,
}

/// Ratios are derived once from integer counts. `correlation` is `None`
/// when the effect never occurs, `confidence` when nothing matches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleMetrics {
    pub support: f64,
    pub correlation: Option<f64>,
    pub confidence: Option<f64>,
    pub counts: MatchCounts,
}

impl RuleMetrics {
    pub fn from_counts(counts: MatchCounts) -> Self {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        RuleMetrics {
            support: ratio(counts.matched, counts.dataset_size).unwrap_or(0.0),
            correlation: ratio(counts.matched_and_effect, counts.effect_total),
            confidence: ratio(counts.matched_and_effect, counts.matched),
            counts,
        }
    }

    pub fn from_matches(matched: &[bool], effect: &[bool]) -> Self {
        debug_assert_eq!(matched.len(), effect.len());
        let counts = MatchCounts {
            matched: matched.iter().filter(|&&m| m).count(),
            matched_and_effect: matched.iter().zip(effect).filter(|(&m, &e)| m && e).count(),
            effect_total: effect.iter().filter(|&&e| e).count(),
            dataset_size: matched.len(),
        };
        RuleMetrics::from_counts(counts)
    }
}

pub fn evaluate_rule(rule: &TemporalRule, dataset: &Dataset, predicates: &PredicateSet) -> Result<RuleMetrics> {
    let compiled = CompiledRule::new(rule, predicates)?;
    PreparedDataset::new(dataset, predicates)?.metrics(&compiled)
}
