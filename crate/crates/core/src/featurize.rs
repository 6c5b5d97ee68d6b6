//! Lexicon-based psycholinguistic featurization of raw dialogue messages.
//!
//! Each message becomes one [`Event`] carrying:
//! - `polarity` in [-5, 5] and `intensity` in [0, 1] from a weighted sentiment lexicon,
//! - one `cat_<name>` intensity in [0, 2] per topical category lexicon,
//! - one `<keyword>_count` per tracked keyword.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{
    quantize, validate_trace, Dataset, DialogueTrace, Event, Outcome, TraceError, CATEGORY_PREFIX,
    COUNT_SUFFIX, INTENSITY, POLARITY,
};

pub const DEFAULT_CATEGORY_SCALE: f64 = 20.0;
pub const SENTIMENT_FILE: &str = "sentiment.tsv";

const BUILTIN_SENTIMENT: &str = include_str!("../data/lexicons/sentiment.tsv");
const BUILTIN_CATEGORIES: [(&str, &str); 5] = [
    ("aggression", include_str!("../data/lexicons/aggression.txt")),
    ("domestic_work", include_str!("../data/lexicons/domestic_work.txt")),
    ("family", include_str!("../data/lexicons/family.txt")),
    ("medical_emergency", include_str!("../data/lexicons/medical_emergency.txt")),
    ("office", include_str!("../data/lexicons/office.txt")),
];

#[derive(Debug, Error)]
pub enum FeaturizeError {
    #[error("dialogue has no messages")]
    EmptyDialogue,
    #[error("messages belong to more than one dialogue (`{0}` and `{1}`)")]
    MixedDialogueIds(String, String),
    #[error("no messages")]
    NoMessages,
    #[error("line {line}: {detail}")]
    MalformedMessage { line: usize, detail: String },
    #[error("lexicon {}: {detail}", path.display())]
    Lexicon { path: PathBuf, detail: String },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FeaturizeError>;

/// One line of the raw JSON Lines input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMessage {
    pub dialogue_id: String,
    #[serde(deserialize_with = "whole_seconds")]
    pub timestamp: i64,
    pub author_id: String,
    #[serde(default)]
    pub text: String,
}

fn whole_seconds<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
    let n = serde_json::Number::deserialize(d)?;
    if let Some(i) = n.as_i64() {
        return Ok(i);
    }
    match n.as_f64() {
        Some(f) if f.is_finite() && f.abs() < 9.0e15 => Ok(f.floor() as i64),
        _ => Err(serde::de::Error::custom(format!("timestamp {n} is out of range"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexiconSet {
    pub sentiment: BTreeMap<String, f64>,
    pub categories: BTreeMap<String, BTreeSet<String>>,
    pub keywords: Vec<String>,
    /// Multiplier applied to a category's hit rate before clamping to [0, 2].
    pub category_scale: f64,
}

fn is_category_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && name.starts_with(|c: char| c.is_ascii_lowercase())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_sentiment(text: &str, path: &Path) -> Result<BTreeMap<String, f64>> {
    let err = |line: usize, detail: String| FeaturizeError::Lexicon {
        path: path.to_path_buf(),
        detail: format!("line {line}: {detail}"),
    };
    let mut out = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let (token, weight) = content
            .split_once('\t')
            .ok_or_else(|| err(line, "expected `token<TAB>weight`".into()))?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|_| err(line, format!("bad weight `{weight}`")))?;
        if !(-1.0..=1.0).contains(&weight) {
            return Err(err(line, format!("weight {weight} outside [-1, 1]")));
        }
        out.insert(token.trim().to_lowercase(), weight);
    }
    Ok(out)
}

fn parse_token_set(text: &str) -> BTreeSet<String> {
    content_lines(text).map(|(_, l)| l.to_lowercase()).collect()
}

impl LexiconSet {
    /// The lexicons bundled with the crate: five workplace/life categories and
    /// a ~200 word sentiment list, tracking `thank` and `sorry`.
    pub fn builtin() -> Self {
        let sentiment = parse_sentiment(BUILTIN_SENTIMENT, Path::new("<builtin>/sentiment.tsv"))
            .expect("builtin sentiment lexicon is valid");
        let categories = BUILTIN_CATEGORIES
            .iter()
            .map(|(name, text)| (name.to_string(), parse_token_set(text)))
            .collect();
        LexiconSet {
            sentiment,
            categories,
            keywords: vec!["thank".into(), "sorry".into()],
            category_scale: DEFAULT_CATEGORY_SCALE,
        }
    }

    /// Loads `sentiment.tsv` and every `<category>.txt` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let sentiment_path = dir.join(SENTIMENT_FILE);
        let sentiment = parse_sentiment(&std::fs::read_to_string(&sentiment_path)?, &sentiment_path)?;
        let mut categories = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let tokens = parse_token_set(&std::fs::read_to_string(&path)?);
            categories.insert(name, tokens);
        }
        let set = LexiconSet {
            sentiment,
            categories,
            keywords: vec!["thank".into(), "sorry".into()],
            category_scale: DEFAULT_CATEGORY_SCALE,
        };
        set.validate(dir)?;
        Ok(set)
    }

    pub fn validate(&self, origin: &Path) -> Result<()> {
        let err = |detail: String| FeaturizeError::Lexicon {
            path: origin.to_path_buf(),
            detail,
        };
        for (name, tokens) in &self.categories {
            if !is_category_name(name) {
                return Err(err(format!("category name `{name}` is not a lowercase identifier")));
            }
            if tokens.is_empty() {
                return Err(err(format!("category `{name}` has no tokens")));
            }
        }
        for kw in &self.keywords {
            if kw.is_empty() || kw.to_lowercase() != *kw {
                return Err(err(format!("keyword `{kw}` must be non-empty lowercase")));
            }
        }
        if !(self.category_scale.is_finite() && self.category_scale > 0.0) {
            return Err(err("category scale must be positive".into()));
        }
        Ok(())
    }

    /// Attribute columns produced by [`featurize_dialogue`], in CSV order.
    pub fn schema(&self) -> Vec<String> {
        let mut schema = vec![POLARITY.to_string(), INTENSITY.to_string()];
        schema.extend(self.categories.keys().map(|c| format!("{CATEGORY_PREFIX}{c}")));
        schema.extend(self.keywords.iter().map(|k| format!("{k}{COUNT_SUFFIX}")));
        schema
    }
}

/// Lowercases and splits on maximal runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Returns `(polarity, intensity)`.
///
/// Polarity is five times the mean weight of the sentiment-bearing tokens,
/// clamped to [-5, 5]. Intensity is the fraction of tokens that carry
/// sentiment. Both are 0 when nothing matches.
pub fn score_sentiment(tokens: &[String], lexicon: &LexiconSet) -> (f64, f64) {
    let weights: Vec<f64> = tokens
        .iter()
        .filter_map(|t| lexicon.sentiment.get(t).copied())
        .collect();
    if weights.is_empty() {
        return (0.0, 0.0);
    }
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    let polarity = (5.0 * mean).clamp(-5.0, 5.0);
    let intensity = weights.len() as f64 / tokens.len() as f64;
    (polarity, intensity)
}

pub fn score_categories(tokens: &[String], lexicon: &LexiconSet) -> BTreeMap<String, f64> {
    let total = tokens.len().max(1) as f64;
    lexicon
        .categories
        .iter()
        .map(|(name, set)| {
            let hits = tokens.iter().filter(|t| set.contains(*t)).count() as f64;
            let value = (lexicon.category_scale * hits / total).clamp(0.0, 2.0);
            (name.clone(), value)
        })
        .collect()
}

pub fn count_keyword(tokens: &[String], keyword: &str) -> usize {
    tokens.iter().filter(|t| *t == keyword).count()
}

fn featurize_message(message: &RawMessage, lexicon: &LexiconSet) -> Event {
    let tokens = tokenize(&message.text);
    let (polarity, intensity) = score_sentiment(&tokens, lexicon);
    let mut attributes = BTreeMap::new();
    attributes.insert(POLARITY.to_string(), quantize(polarity));
    attributes.insert(INTENSITY.to_string(), quantize(intensity));
    for (name, value) in score_categories(&tokens, lexicon) {
        attributes.insert(format!("{CATEGORY_PREFIX}{name}"), quantize(value));
    }
    for kw in &lexicon.keywords {
        attributes.insert(format!("{kw}{COUNT_SUFFIX}"), count_keyword(&tokens, kw) as f64);
    }
    Event::new(message.timestamp, message.author_id.clone(), attributes)
}

/// Outcome is positive iff the latest message has polarity >= 0. Among
/// messages sharing the latest timestamp the one listed last wins.
pub fn featurize_dialogue(messages: &[RawMessage], lexicon: &LexiconSet) -> Result<DialogueTrace> {
    let first = messages.first().ok_or(FeaturizeError::EmptyDialogue)?;
    if let Some(other) = messages.iter().find(|m| m.dialogue_id != first.dialogue_id) {
        return Err(FeaturizeError::MixedDialogueIds(
            first.dialogue_id.clone(),
            other.dialogue_id.clone(),
        ));
    }
    let events: Vec<Event> = messages.iter().map(|m| featurize_message(m, lexicon)).collect();
    let last = events
        .iter()
        .enumerate()
        .max_by_key(|(i, e)| (e.timestamp, *i))
        .map(|(_, e)| e)
        .expect("non-empty");
    let outcome = if last.attributes[POLARITY] >= 0.0 {
        Outcome::Positive
    } else {
        Outcome::Negative
    };
    Ok(validate_trace(events, first.dialogue_id.clone(), outcome)?)
}

/// Groups messages by dialogue id (in order of first appearance) and
/// featurizes each group.
pub fn featurize_corpus(messages: &[RawMessage], lexicon: &LexiconSet) -> Result<Dataset> {
    if messages.is_empty() {
        return Err(FeaturizeError::NoMessages);
    }
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<RawMessage>> = HashMap::new();
    for m in messages {
        groups
            .entry(m.dialogue_id.as_str())
            .or_insert_with(|| {
                order.push(m.dialogue_id.as_str());
                Vec::new()
            })
            .push(m.clone());
    }
    let traces = order
        .iter()
        .map(|id| featurize_dialogue(&groups[id], lexicon))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(lexicon.schema(), traces)?)
}

/// Parses JSON Lines, skipping blank lines. Line numbers in errors are 1-based.
pub fn read_messages<R: BufRead>(reader: R) -> Result<Vec<RawMessage>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msg: RawMessage = serde_json::from_str(&line).map_err(|e| FeaturizeError::MalformedMessage {
            line: i + 1,
            detail: e.to_string(),
        })?;
        out.push(msg);
    }
    Ok(out)
}
