//! Named boolean predicates over event attributes and the trace outcome.
//!
//! A [`PredicateConfig`] lists value-domain bins per attribute. Compiling it
//! against a dataset schema yields a [`PredicateSet`] with one predicate per
//! (attribute, bin), named `<LABEL>_<BIN>`, plus any configured aliases.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Bound;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::trace::{DialogueTrace, Event, Outcome, CATEGORY_PREFIX, POLARITY};

#[derive(Debug, Error, PartialEq)]
pub enum PredicateError {
    #[error("bins `{first}` and `{second}` of `{attribute}` overlap")]
    OverlappingBins {
        attribute: String,
        first: String,
        second: String,
    },
    #[error("bins of `{attribute}` leave a gap: {detail}")]
    CoverageGap { attribute: String, detail: String },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{0}` is defined twice")]
    DuplicatePredicate(String),
    #[error("predicate `{0}` cannot be evaluated at this level")]
    WrongLevel(String),
    #[error("invalid domain `{0}`")]
    InvalidDomain(String),
    #[error("predicate config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, PredicateError>;

/// A real interval with independently open, closed or unbounded ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lo: Bound<f64>,
    pub hi: Bound<f64>,
}

impl Domain {
    pub fn exact(v: f64) -> Self {
        Domain {
            lo: Bound::Included(v),
            hi: Bound::Included(v),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = match self.lo {
            Bound::Unbounded => true,
            Bound::Included(lo) => v >= lo,
            Bound::Excluded(lo) => v > lo,
        };
        let below = match self.hi {
            Bound::Unbounded => true,
            Bound::Included(hi) => v <= hi,
            Bound::Excluded(hi) => v < hi,
        };
        above && below
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Bound::*;
        match (self.lo, self.hi) {
            (Included(a), Included(b)) if a == b => write!(f, "={a}"),
            (Unbounded, Unbounded) => write!(f, "any"),
            (Unbounded, Excluded(b)) => write!(f, "<{b}"),
            (Unbounded, Included(b)) => write!(f, "<={b}"),
            (Excluded(a), Unbounded) => write!(f, ">{a}"),
            (Included(a), Unbounded) => write!(f, ">={a}"),
            (lo, hi) => {
                let (open, a) = match lo {
                    Included(a) => ('[', a),
                    Excluded(a) => ('(', a),
                    Unbounded => unreachable!(),
                };
                let (close, b) = match hi {
                    Included(b) => (']', b),
                    Excluded(b) => (')', b),
                    Unbounded => unreachable!(),
                };
                write!(f, "{open}{a},{b}{close}")
            }
        }
    }
}

impl FromStr for Domain {
    type Err = PredicateError;

    /// Accepts `=v`, `==v`, `<v`, `<=v`, `>v`, `>=v`, `any`, and bracketed
    /// intervals such as `[a,b)` or `(a:b)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || PredicateError::InvalidDomain(s.to_string());
        let num = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
        let t = s.trim();
        if t == "any" {
            return Ok(Domain {
                lo: Bound::Unbounded,
                hi: Bound::Unbounded,
            });
        }
        if let Some(rest) = t.strip_prefix("==").or_else(|| t.strip_prefix('=')) {
            return Ok(Domain::exact(num(rest)?));
        }
        if let Some(rest) = t.strip_prefix("<=") {
            return Ok(Domain { lo: Bound::Unbounded, hi: Bound::Included(num(rest)?) });
        }
        if let Some(rest) = t.strip_prefix('<') {
            return Ok(Domain { lo: Bound::Unbounded, hi: Bound::Excluded(num(rest)?) });
        }
        if let Some(rest) = t.strip_prefix(">=") {
            return Ok(Domain { lo: Bound::Included(num(rest)?), hi: Bound::Unbounded });
        }
        if let Some(rest) = t.strip_prefix('>') {
            return Ok(Domain { lo: Bound::Excluded(num(rest)?), hi: Bound::Unbounded });
        }
        let mut chars = t.chars();
        let open = chars.next().ok_or_else(bad)?;
        let close = chars.next_back().ok_or_else(bad)?;
        let inner = chars.as_str();
        let (a, b) = inner
            .split_once(',')
            .or_else(|| inner.split_once(':'))
            .ok_or_else(bad)?;
        let (a, b) = (num(a)?, num(b)?);
        let lo = match open {
            '[' => Bound::Included(a),
            '(' => Bound::Excluded(a),
            _ => return Err(bad()),
        };
        let hi = match close {
            ']' => Bound::Included(b),
            ')' => Bound::Excluded(b),
            _ => return Err(bad()),
        };
        if a > b {
            return Err(bad());
        }
        Ok(Domain { lo, hi })
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub name: String,
    pub domain: Domain,
}

impl Bin {
    pub fn new(name: &str, domain: &str) -> Self {
        Bin {
            name: name.to_string(),
            domain: domain.parse().expect("valid domain literal"),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Bins over one named attribute. Values are divided by `divisor` before
/// the bins are applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeBins {
    pub attribute: String,
    pub label: String,
    #[serde(default = "one")]
    pub divisor: f64,
    pub range: [f64; 2],
    pub bins: Vec<Bin>,
}

/// One bin template applied to every `cat_*` column of the schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryBins {
    pub range: [f64; 2],
    pub bins: Vec<Bin>,
}

/// Outcome bins carry full predicate names and are checked against {0, 1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeBins {
    pub bins: Vec<Bin>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateConfig {
    #[serde(default, rename = "attribute")]
    pub attributes: Vec<AttributeBins>,
    pub categories: Option<CategoryBins>,
    pub outcome: OutcomeBins,
    /// Alias name to member predicate names; true when any member is true.
    #[serde(default)]
    pub aliases: BTreeMap<String, Vec<String>>,
}

pub const TABLE1_TOML: &str = include_str!("../data/predicates/table1.toml");

impl PredicateConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PredicateError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("predicate config serializes")
    }
}

/// Sentiment, category and outcome bins with the thresholds of the reference
/// predicate table. Sentiment bins apply to polarity / 5, so they read on a
/// [-1, 1] scale; the top sentiment bin is closed at 0.8 so the bins
/// partition.
pub fn default_table1_config() -> PredicateConfig {
    PredicateConfig {
        attributes: vec![AttributeBins {
            attribute: POLARITY.into(),
            label: "SENTIMENT".into(),
            divisor: 5.0,
            range: [-1.0, 1.0],
            bins: vec![
                Bin::new("VERY_NEG", "<-0.2"),
                Bin::new("NEG", "[-0.2,0)"),
                Bin::new("LOW_POS", "[0,0.5)"),
                Bin::new("MEDIUM_POS", "[0.5,0.8)"),
                Bin::new("HIGH_POS", ">=0.8"),
            ],
        }],
        categories: Some(CategoryBins {
            range: [0.0, 2.0],
            bins: vec![
                Bin::new("ABSENT", "=0"),
                Bin::new("LOW", "(0,1)"),
                Bin::new("MEDIUM", "[1,2)"),
                Bin::new("HIGH", ">=2"),
            ],
        }),
        outcome: OutcomeBins {
            bins: vec![Bin::new("SENTIMENT_LOW", "=0"), Bin::new("SENTIMENT_HIGH", "=1")],
        },
        aliases: BTreeMap::from([
            (
                "SENTIMENT_POS".to_string(),
                vec![
                    "SENTIMENT_LOW_POS".to_string(),
                    "SENTIMENT_MEDIUM_POS".to_string(),
                    "SENTIMENT_HIGH_POS".to_string(),
                ],
            ),
            ("SENTIMENT_VERY_POS".to_string(), vec!["SENTIMENT_HIGH_POS".to_string()]),
        ]),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributeTest {
    pub attribute: String,
    pub divisor: f64,
    pub domain: Domain,
}

impl AttributeTest {
    fn eval(&self, event: &Event) -> Option<bool> {
        event
            .get(&self.attribute)
            .map(|v| self.domain.contains(v / self.divisor))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Event,
    Trace,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    /// True when any of the tests holds. Plain bins have exactly one test.
    Event(Vec<AttributeTest>),
    Outcome(Domain),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateDef {
    pub name: String,
    pub condition: Condition,
}

impl PredicateDef {
    pub fn level(&self) -> Level {
        match self.condition {
            Condition::Event(_) => Level::Event,
            Condition::Outcome(_) => Level::Trace,
        }
    }

    pub fn eval_event(&self, event: &Event) -> Result<bool> {
        let Condition::Event(tests) = &self.condition else {
            return Err(PredicateError::WrongLevel(self.name.clone()));
        };
        let mut any = false;
        for test in tests {
            any |= test
                .eval(event)
                .ok_or_else(|| PredicateError::UnknownAttribute(test.attribute.clone()))?;
        }
        Ok(any)
    }

    pub fn eval_trace(&self, trace: &DialogueTrace) -> Result<bool> {
        match &self.condition {
            Condition::Outcome(domain) => Ok(domain.contains(trace.outcome().as_u8() as f64)),
            Condition::Event(_) => Err(PredicateError::WrongLevel(self.name.clone())),
        }
    }

    pub fn eval_outcome(&self, outcome: Outcome) -> Result<bool> {
        match &self.condition {
            Condition::Outcome(domain) => Ok(domain.contains(outcome.as_u8() as f64)),
            Condition::Event(_) => Err(PredicateError::WrongLevel(self.name.clone())),
        }
    }
}

/// Compiled, immutable predicates in definition order.
#[derive(Clone, Debug, PartialEq)]
pub struct PredicateSet {
    defs: Vec<PredicateDef>,
    index: HashMap<String, usize>,
}

impl PredicateSet {
    pub fn from_defs(defs: Vec<PredicateDef>) -> Result<Self> {
        let mut index = HashMap::with_capacity(defs.len());
        for (i, d) in defs.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(PredicateError::DuplicatePredicate(d.name.clone()));
            }
        }
        Ok(PredicateSet { defs, index })
    }

    pub fn defs(&self) -> &[PredicateDef] {
        &self.defs
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&PredicateDef> {
        self.index_of(name).map(|i| &self.defs[i])
    }

    pub fn lookup(&self, name: &str) -> Result<&PredicateDef> {
        self.get(name)
            .ok_or_else(|| PredicateError::UnknownPredicate(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.iter().map(|d| d.name.as_str())
    }

    pub fn event_level(&self) -> impl Iterator<Item = (usize, &PredicateDef)> {
        self.defs
            .iter()
            .enumerate()
            .filter(|(_, d)| d.level() == Level::Event)
    }

    pub fn trace_level(&self) -> impl Iterator<Item = (usize, &PredicateDef)> {
        self.defs
            .iter()
            .enumerate()
            .filter(|(_, d)| d.level() == Level::Trace)
    }

    /// Truth of every predicate on every event of `trace`. Trace-level
    /// predicates read as false on events.
    pub fn truth_table(&self, trace: &DialogueTrace) -> Result<TruthTable> {
        let width = self.defs.len();
        let mut cells = Vec::with_capacity(width * trace.len());
        for event in trace.events() {
            for def in &self.defs {
                cells.push(match def.level() {
                    Level::Event => def.eval_event(event)?,
                    Level::Trace => false,
                });
            }
        }
        Ok(TruthTable { width, cells })
    }
}

/// Row-major event × predicate truth values.
#[derive(Clone, Debug)]
pub struct TruthTable {
    width: usize,
    cells: Vec<bool>,
}

impl TruthTable {
    #[inline]
    pub fn get(&self, event: usize, predicate: usize) -> bool {
        self.cells[event * self.width + predicate]
    }

    pub fn events(&self) -> usize {
        self.cells.len().checked_div(self.width).unwrap_or(0)
    }
}

fn lower_key(b: Bound<f64>) -> (f64, u8) {
    match b {
        Bound::Unbounded => (f64::NEG_INFINITY, 0),
        Bound::Included(x) => (x, 0),
        Bound::Excluded(x) => (x, 1),
    }
}

/// Checks that `bins` are pairwise disjoint and cover `[lo, hi]`.
fn check_partition(attribute: &str, range: [f64; 2], bins: &[Bin]) -> Result<()> {
    let gap = |detail: String| PredicateError::CoverageGap {
        attribute: attribute.to_string(),
        detail,
    };
    if bins.is_empty() {
        return Err(gap("no bins".into()));
    }
    let mut sorted: Vec<&Bin> = bins.iter().collect();
    sorted.sort_by(|a, b| {
        let (ka, kb) = (lower_key(a.domain.lo), lower_key(b.domain.lo));
        ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1))
    });

    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let overlap = || PredicateError::OverlappingBins {
            attribute: attribute.to_string(),
            first: a.name.clone(),
            second: b.name.clone(),
        };
        let (x, a_closed) = match a.domain.hi {
            Bound::Unbounded => return Err(overlap()),
            Bound::Included(x) => (x, true),
            Bound::Excluded(x) => (x, false),
        };
        let (y, b_closed) = match b.domain.lo {
            Bound::Unbounded => return Err(overlap()),
            Bound::Included(y) => (y, true),
            Bound::Excluded(y) => (y, false),
        };
        if y < x || (y == x && a_closed && b_closed) {
            return Err(overlap());
        }
        if y > x || (!a_closed && !b_closed) {
            return Err(gap(format!("between `{}` and `{}`", a.name, b.name)));
        }
    }

    let first = sorted[0];
    let covers_lo = match first.domain.lo {
        Bound::Unbounded => true,
        Bound::Included(y) => y <= range[0],
        Bound::Excluded(y) => y < range[0],
    };
    if !covers_lo {
        return Err(gap(format!("below `{}`", first.name)));
    }
    let last = sorted[sorted.len() - 1];
    let covers_hi = match last.domain.hi {
        Bound::Unbounded => true,
        Bound::Included(y) => y >= range[1],
        Bound::Excluded(y) => y > range[1],
    };
    if !covers_hi {
        return Err(gap(format!("above `{}`", last.name)));
    }
    Ok(())
}

fn check_outcome_bins(bins: &[Bin]) -> Result<()> {
    for v in [0.0, 1.0] {
        let hits: Vec<&Bin> = bins.iter().filter(|b| b.domain.contains(v)).collect();
        match hits.as_slice() {
            [] => {
                return Err(PredicateError::CoverageGap {
                    attribute: "outcome".into(),
                    detail: format!("no bin holds {v}"),
                })
            }
            [_] => {}
            [a, b, ..] => {
                return Err(PredicateError::OverlappingBins {
                    attribute: "outcome".into(),
                    first: a.name.clone(),
                    second: b.name.clone(),
                })
            }
        }
    }
    Ok(())
}

/// Compiles `config` against a dataset schema.
pub fn compile_predicates(config: &PredicateConfig, schema: &[String]) -> Result<PredicateSet> {
    let mut defs = Vec::new();
    let event_pred = |name: String, attribute: &str, divisor: f64, domain: Domain| PredicateDef {
        name,
        condition: Condition::Event(vec![AttributeTest {
            attribute: attribute.to_string(),
            divisor,
            domain,
        }]),
    };

    for attr in &config.attributes {
        if !schema.iter().any(|c| *c == attr.attribute) {
            return Err(PredicateError::UnknownAttribute(attr.attribute.clone()));
        }
        if !(attr.divisor.is_finite() && attr.divisor > 0.0) {
            return Err(PredicateError::Config(format!(
                "divisor of `{}` must be positive",
                attr.attribute
            )));
        }
        check_partition(&attr.attribute, attr.range, &attr.bins)?;
        for bin in &attr.bins {
            let name = format!("{}_{}", attr.label, bin.name).to_uppercase();
            defs.push(event_pred(name, &attr.attribute, attr.divisor, bin.domain));
        }
    }

    if let Some(cats) = &config.categories {
        check_partition("categories", cats.range, &cats.bins)?;
        for column in schema.iter().filter(|c| c.starts_with(CATEGORY_PREFIX)) {
            let label = column[CATEGORY_PREFIX.len()..].to_uppercase();
            for bin in &cats.bins {
                let name = format!("{label}_{}", bin.name).to_uppercase();
                defs.push(event_pred(name, column, 1.0, bin.domain));
            }
        }
    }

    check_outcome_bins(&config.outcome.bins)?;
    for bin in &config.outcome.bins {
        defs.push(PredicateDef {
            name: bin.name.to_uppercase(),
            condition: Condition::Outcome(bin.domain),
        });
    }

    let base = PredicateSet::from_defs(defs)?;
    let mut defs = base.defs.clone();
    for (alias, members) in &config.aliases {
        if members.is_empty() {
            return Err(PredicateError::Config(format!("alias `{alias}` has no members")));
        }
        let mut tests = Vec::new();
        for member in members {
            match &base.lookup(member)?.condition {
                Condition::Event(t) => tests.extend(t.iter().cloned()),
                Condition::Outcome(_) => {
                    return Err(PredicateError::Config(format!(
                        "alias `{alias}` refers to outcome predicate `{member}`"
                    )))
                }
            }
        }
        defs.push(PredicateDef {
            name: alias.clone(),
            condition: Condition::Event(tests),
        });
    }
    PredicateSet::from_defs(defs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap as Map;

    fn schema() -> Vec<String> {
        [
            "polarity",
            "intensity",
            "cat_aggression",
            "cat_domestic_work",
            "cat_family",
            "cat_medical_emergency",
            "cat_office",
            "thank_count",
            "sorry_count",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    fn event(polarity: f64, family: f64) -> Event {
        let mut a = Map::new();
        a.insert("polarity".to_string(), polarity);
        a.insert("intensity".to_string(), 0.0);
        a.insert("cat_family".to_string(), family);
        Event::new(0, "a", a)
    }

    fn set() -> PredicateSet {
        compile_predicates(&default_table1_config(), &schema()).unwrap()
    }

    #[test]
    fn domain_parsing() {
        assert_eq!("=0".parse::<Domain>().unwrap(), Domain::exact(0.0));
        assert_eq!("==1".parse::<Domain>().unwrap(), Domain::exact(1.0));
        let d: Domain = "(0:1)".parse().unwrap();
        assert!(!d.contains(0.0) && d.contains(0.5) && !d.contains(1.0));
        let d: Domain = "[-0.2,0)".parse().unwrap();
        assert!(d.contains(-0.2) && !d.contains(0.0));
        assert!("[2,1]".parse::<Domain>().is_err());
        assert!("{0,1}".parse::<Domain>().is_err());
        for s in ["=0", "<-0.2", ">=2", "[0.5,0.8)", "(0,1)", ">0.8", "<=3", "any"] {
            assert_eq!(s.parse::<Domain>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn default_config_names() {
        let s = set();
        let d = s.get("MEDICAL_EMERGENCY_ABSENT").unwrap();
        assert_eq!(
            d.condition,
            Condition::Event(vec![AttributeTest {
                attribute: "cat_medical_emergency".into(),
                divisor: 1.0,
                domain: Domain::exact(0.0),
            }])
        );
        assert_eq!(s.get("SENTIMENT_HIGH").unwrap().level(), Level::Trace);
        assert_eq!(s.len(), 29);
    }

    #[test]
    fn shipped_file_matches_default() {
        assert_eq!(PredicateConfig::from_toml(TABLE1_TOML).unwrap(), default_table1_config());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = default_table1_config();
        assert_eq!(PredicateConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn sentiment_boundaries() {
        let s = set();
        let holds = |name: &str, polarity: f64| s.lookup(name).unwrap().eval_event(&event(polarity, 0.0)).unwrap();
        // polarity is on [-5, 5]; bins read polarity / 5
        assert!(holds("SENTIMENT_NEG", -1.0));
        assert!(!holds("SENTIMENT_VERY_NEG", -1.0));
        assert!(holds("SENTIMENT_HIGH_POS", 0.85 * 5.0));
        assert!(holds("SENTIMENT_MEDIUM_POS", 2.5));
        assert!(!holds("SENTIMENT_LOW_POS", 2.5));
        assert!(holds("SENTIMENT_HIGH_POS", 4.0));
        assert!(holds("SENTIMENT_POS", 0.0));
        assert!(!holds("SENTIMENT_POS", -0.01));
        assert!(holds("SENTIMENT_VERY_POS", 5.0));
    }

    #[test]
    fn category_boundaries() {
        let s = set();
        let holds = |name: &str, v: f64| s.lookup(name).unwrap().eval_event(&event(0.0, v)).unwrap();
        assert!(holds("FAMILY_ABSENT", 0.0));
        assert!(holds("FAMILY_LOW", 0.5));
        assert!(holds("FAMILY_MEDIUM", 1.0));
        assert!(holds("FAMILY_HIGH", 2.0));
    }

    #[test]
    fn missing_attribute_is_reported() {
        let s = set();
        let err = s.lookup("OFFICE_LOW").unwrap().eval_event(&event(0.0, 0.0)).unwrap_err();
        assert_eq!(err, PredicateError::UnknownAttribute("cat_office".into()));
        assert!(matches!(
            s.lookup("SENTIMENT_LOW").unwrap().eval_event(&event(0.0, 0.0)),
            Err(PredicateError::WrongLevel(_))
        ));
    }

    #[test]
    fn overlapping_bins() {
        let mut cfg = default_table1_config();
        cfg.categories = Some(CategoryBins {
            range: [0.0, 2.0],
            bins: vec![Bin::new("A", "[0,1)"), Bin::new("B", "[0.5,2]")],
        });
        assert!(matches!(
            compile_predicates(&cfg, &schema()),
            Err(PredicateError::OverlappingBins { .. })
        ));
    }

    #[test]
    fn coverage_gap() {
        let mut cfg = default_table1_config();
        cfg.categories.as_mut().unwrap().bins.remove(1);
        assert!(matches!(
            compile_predicates(&cfg, &schema()),
            Err(PredicateError::CoverageGap { .. })
        ));
        let mut cfg = default_table1_config();
        cfg.attributes[0].bins.pop();
        assert!(matches!(
            compile_predicates(&cfg, &schema()),
            Err(PredicateError::CoverageGap { .. })
        ));
        let mut cfg = default_table1_config();
        cfg.outcome.bins.pop();
        assert!(matches!(
            compile_predicates(&cfg, &schema()),
            Err(PredicateError::CoverageGap { .. })
        ));
    }

    #[test]
    fn unknown_attribute() {
        let mut cfg = default_table1_config();
        cfg.attributes[0].attribute = "likes".into();
        assert_eq!(
            compile_predicates(&cfg, &schema()),
            Err(PredicateError::UnknownAttribute("likes".into()))
        );
    }

    #[test]
    fn alias_to_unknown_predicate() {
        let mut cfg = default_table1_config();
        cfg.aliases.insert("X".into(), vec!["NOPE".into()]);
        assert_eq!(
            compile_predicates(&cfg, &schema()),
            Err(PredicateError::UnknownPredicate("NOPE".into()))
        );
    }
}
