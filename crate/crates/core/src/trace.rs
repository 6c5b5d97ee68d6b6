//! Attributed dialogue traces and the flat trace CSV format.
//!
//! A trace CSV has one row per event:
//!
//! ```text
//! dialogue_id,timestamp,author_id,polarity,intensity,cat_office,...,thank_count,sorry_count,outcome
//! ```
//!
//! The columns between `author_id` and `outcome` form the attribute schema,
//! kept in file order. The outcome is repeated on every row of a dialogue and
//! cross-checked on load.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use thiserror::Error;

pub const POLARITY: &str = "polarity";
pub const INTENSITY: &str = "intensity";
pub const CATEGORY_PREFIX: &str = "cat_";
pub const COUNT_SUFFIX: &str = "_count";

const FIXED_LEADING: [&str; 3] = ["dialogue_id", "timestamp", "author_id"];
const OUTCOME_COLUMN: &str = "outcome";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("dialogue `{0}` has no events")]
    EmptyTrace(String),
    #[error("dialogue `{dialogue_id}`: {detail}")]
    SchemaMismatch { dialogue_id: String, detail: String },
    #[error("attribute `{attribute}` = {value} is outside {expected}")]
    RangeViolation {
        attribute: String,
        value: f64,
        expected: &'static str,
    },
    #[error("line {line}: {detail}")]
    MalformedCsv { line: u64, detail: String },
    #[error("dialogue `{0}` has rows that disagree on outcome")]
    InconsistentOutcome(String),
    #[error("dialogue id `{0}` appears in more than one trace")]
    DuplicateDialogue(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TraceError>;

/// Binary trace-level label: positive or negative ending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Negative = 0,
    Positive = 1,
}

impl Outcome {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Outcome> {
        match v {
            0 => Some(Outcome::Negative),
            1 => Some(Outcome::Positive),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub timestamp: i64,
    pub author_id: String,
    pub attributes: BTreeMap<String, f64>,
}

impl Event {
    pub fn new(timestamp: i64, author_id: impl Into<String>, attributes: BTreeMap<String, f64>) -> Self {
        Event {
            timestamp,
            author_id: author_id.into(),
            attributes,
        }
    }

    pub fn get(&self, attribute: &str) -> Option<f64> {
        self.attributes.get(attribute).copied()
    }
}

/// A time-ordered dialogue with its outcome label. Construct through
/// [`validate_trace`]; the fields are read-only afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct DialogueTrace {
    dialogue_id: String,
    events: Vec<Event>,
    outcome: Outcome,
}

impl DialogueTrace {
    pub fn dialogue_id(&self) -> &str {
        &self.dialogue_id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Checks the domain of a single attribute value.
pub fn check_range(attribute: &str, value: f64) -> Result<()> {
    let violation = |expected| {
        Err(TraceError::RangeViolation {
            attribute: attribute.to_string(),
            value,
            expected,
        })
    };
    if !value.is_finite() {
        return violation("the finite reals");
    }
    if attribute == POLARITY {
        if !(-5.0..=5.0).contains(&value) {
            return violation("[-5, 5]");
        }
    } else if attribute == INTENSITY {
        if !(0.0..=1.0).contains(&value) {
            return violation("[0, 1]");
        }
    } else if attribute.starts_with(CATEGORY_PREFIX) {
        if !(0.0..=2.0).contains(&value) {
            return violation("[0, 2]");
        }
    } else if attribute.ends_with(COUNT_SUFFIX) && (value < 0.0 || value.fract() != 0.0) {
        return violation("the non-negative integers");
    }
    Ok(())
}

/// Builds a trace, stably sorting events by timestamp and checking every
/// attribute invariant.
pub fn validate_trace(
    events: Vec<Event>,
    dialogue_id: impl Into<String>,
    outcome: Outcome,
) -> Result<DialogueTrace> {
    let dialogue_id = dialogue_id.into();
    let Some(first) = events.first() else {
        return Err(TraceError::EmptyTrace(dialogue_id));
    };
    for required in [POLARITY, INTENSITY] {
        if !first.attributes.contains_key(required) {
            return Err(TraceError::SchemaMismatch {
                dialogue_id,
                detail: format!("missing required attribute `{required}`"),
            });
        }
    }
    let keys: Vec<&String> = first.attributes.keys().collect();
    for (i, event) in events.iter().enumerate() {
        if !event.attributes.keys().eq(keys.iter().copied()) {
            return Err(TraceError::SchemaMismatch {
                dialogue_id,
                detail: format!("event {i} has attribute keys that differ from event 0"),
            });
        }
        for (name, &value) in &event.attributes {
            check_range(name, value)?;
        }
    }
    let mut events = events;
    events.sort_by_key(|e| e.timestamp);
    Ok(DialogueTrace {
        dialogue_id,
        events,
        outcome,
    })
}

/// A collection of traces sharing one ordered attribute schema.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Vec<String>,
    traces: Vec<DialogueTrace>,
}

impl Dataset {
    pub fn new(schema: Vec<String>, traces: Vec<DialogueTrace>) -> Result<Self> {
        let mut sorted_schema: Vec<&String> = schema.iter().collect();
        sorted_schema.sort();
        if sorted_schema.windows(2).any(|w| w[0] == w[1]) {
            return Err(TraceError::SchemaMismatch {
                dialogue_id: String::new(),
                detail: "schema lists an attribute twice".into(),
            });
        }
        let mut seen = HashMap::new();
        for trace in &traces {
            if seen.insert(trace.dialogue_id.as_str(), ()).is_some() {
                return Err(TraceError::DuplicateDialogue(trace.dialogue_id.clone()));
            }
            // Traces are validated, so checking the first event covers all.
            let keys = trace.events[0].attributes.keys();
            if !keys.eq(sorted_schema.iter().copied()) {
                return Err(TraceError::SchemaMismatch {
                    dialogue_id: trace.dialogue_id.clone(),
                    detail: "attributes differ from the dataset schema".into(),
                });
            }
        }
        Ok(Dataset { schema, traces })
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn traces(&self) -> &[DialogueTrace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(DialogueTrace::len).sum()
    }
}

/// Rounds to the 6 decimal places the CSV format carries.
pub fn quantize(value: f64) -> f64 {
    let q = (value * 1e6).round() / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

/// Renders a real with at most 6 decimals and no exponent; integral values
/// are written bare.
pub fn format_real(value: f64) -> String {
    let q = quantize(value);
    let mut s = format!("{q:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn parse_timestamp(raw: &str) -> Option<i64> {
    if let Ok(t) = raw.parse::<i64>() {
        return Some(t);
    }
    let f: f64 = raw.parse().ok()?;
    if f.is_finite() && f.abs() < 9.0e15 {
        Some(f.floor() as i64)
    } else {
        None
    }
}

fn header_error(detail: impl Into<String>) -> TraceError {
    TraceError::MalformedCsv {
        line: 1,
        detail: detail.into(),
    }
}

/// Reads a trace CSV. Traces keep the order in which their dialogue id first
/// appears; rows of one dialogue need not be contiguous.
pub fn load_traces<R: Read>(source: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| header_error(e.to_string()))?,
        None => return Err(header_error("missing header row")),
    };
    let columns: Vec<&str> = header.iter().collect();
    if columns.len() < FIXED_LEADING.len() + 1
        || columns[..3] != FIXED_LEADING
        || columns[columns.len() - 1] != OUTCOME_COLUMN
    {
        return Err(header_error(
            "header must be dialogue_id,timestamp,author_id,<attributes...>,outcome",
        ));
    }
    let schema: Vec<String> = columns[3..columns.len() - 1]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for required in [POLARITY, INTENSITY] {
        if !schema.iter().any(|c| c == required) {
            return Err(header_error(format!("missing attribute column `{required}`")));
        }
    }

    struct Pending {
        events: Vec<Event>,
        outcome: Outcome,
    }
    let mut order: Vec<String> = Vec::new();
    let mut pending: HashMap<String, Pending> = HashMap::new();

    for record in records {
        let record = record.map_err(|e| TraceError::MalformedCsv {
            line: e.position().map_or(0, |p| p.line()),
            detail: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |detail: String| TraceError::MalformedCsv { line, detail };
        if record.len() != columns.len() {
            return Err(malformed(format!(
                "expected {} fields, found {}",
                columns.len(),
                record.len()
            )));
        }
        let dialogue_id = &record[0];
        let timestamp = parse_timestamp(&record[1])
            .ok_or_else(|| malformed(format!("unparsable timestamp `{}`", &record[1])))?;
        let mut attributes = BTreeMap::new();
        for (name, raw) in schema.iter().zip(record.iter().skip(3)) {
            let value: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| malformed(format!("unparsable number `{raw}` in column `{name}`")))?;
            attributes.insert(name.clone(), value);
        }
        let raw_outcome = &record[record.len() - 1];
        let outcome = raw_outcome
            .parse::<u8>()
            .ok()
            .and_then(Outcome::from_u8)
            .ok_or_else(|| malformed(format!("outcome must be 0 or 1, found `{raw_outcome}`")))?;
        let event = Event::new(timestamp, &record[2], attributes);

        match pending.get_mut(dialogue_id) {
            Some(p) => {
                if p.outcome != outcome {
                    return Err(TraceError::InconsistentOutcome(dialogue_id.to_string()));
                }
                p.events.push(event);
            }
            None => {
                order.push(dialogue_id.to_string());
                pending.insert(
                    dialogue_id.to_string(),
                    Pending {
                        events: vec![event],
                        outcome,
                    },
                );
            }
        }
    }

    let traces = order
        .into_iter()
        .map(|id| {
            let p = pending.remove(&id).expect("pending trace for recorded id");
            validate_trace(p.events, id, p.outcome)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(schema, traces)
}

/// Serializes a dataset in trace order, events in trace order.
pub fn write_traces<W: Write>(dataset: &Dataset, sink: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => TraceError::Io(io),
        other => TraceError::Io(std::io::Error::other(format!("{other:?}"))),
    };

    let mut header: Vec<&str> = FIXED_LEADING.to_vec();
    header.extend(dataset.schema.iter().map(String::as_str));
    header.push(OUTCOME_COLUMN);
    writer.write_record(&header).map_err(csv_err)?;

    for trace in &dataset.traces {
        let outcome = trace.outcome.as_u8().to_string();
        for event in &trace.events {
            let mut row = Vec::with_capacity(header.len());
            row.push(trace.dialogue_id.clone());
            row.push(event.timestamp.to_string());
            row.push(event.author_id.clone());
            for name in &dataset.schema {
                row.push(format_real(event.attributes[name]));
            }
            row.push(outcome.clone());
            writer.write_record(&row).map_err(csv_err)?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_traces_to_vec(dataset: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    write_traces(dataset, &mut out).expect("writing to a Vec cannot fail");
    out
}
