//! Seeded synthetic data: random attributed traces, datasets with a planted
//! rule, and a small raw-message corpus for end-to-end runs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::featurize::RawMessage;
use crate::rule::{parse_rule, TemporalRule};
use crate::trace::{validate_trace, Dataset, DialogueTrace, Event, Outcome};

pub const CATEGORIES: [&str; 5] = ["aggression", "domestic_work", "family", "medical_emergency", "office"];

/// The attribute schema the bundled lexicons produce.
pub fn standard_schema() -> Vec<String> {
    let mut s = vec!["polarity".to_string(), "intensity".to_string()];
    s.extend(CATEGORIES.iter().map(|c| format!("cat_{c}")));
    s.push("thank_count".into());
    s.push("sorry_count".into());
    s
}

// Values sit on and between the default bin boundaries.
const POLARITY_VALUES: [f64; 11] = [-5.0, -2.5, -1.5, -1.0, -0.5, 0.0, 1.0, 2.4, 2.5, 4.0, 5.0];
const CATEGORY_VALUES: [f64; 6] = [0.0, 0.0, 0.5, 1.0, 1.5, 2.0];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_attributes<R: Rng>(rng: &mut R, category_values: impl Fn(&str, &mut R) -> f64) -> BTreeMap<String, f64> {
    let mut a = BTreeMap::new();
    a.insert("polarity".to_string(), *POLARITY_VALUES.choose(rng).expect("non-empty"));
    a.insert("intensity".to_string(), rng.gen_range(0..=10) as f64 / 10.0);
    for c in CATEGORIES {
        let v = category_values(c, rng);
        a.insert(format!("cat_{c}"), v);
    }
    a.insert("thank_count".to_string(), rng.gen_range(0..=3) as f64);
    a.insert("sorry_count".to_string(), rng.gen_range(0..=2) as f64);
    a
}

/// A trace with `events` events, time steps drawn from `0..=max_step`
/// seconds (zero steps give equal timestamps) and random attributes.
pub fn random_trace<R: Rng>(rng: &mut R, id: &str, events: usize, max_step: i64, outcome: Outcome) -> DialogueTrace {
    let mut t = rng.gen_range(0..1_000);
    let events = (0..events)
        .map(|i| {
            if i > 0 {
                t += rng.gen_range(0..=max_step);
            }
            let attrs = random_attributes(rng, |_, r| *CATEGORY_VALUES.choose(r).expect("non-empty"));
            Event::new(t, format!("u{}", rng.gen_range(0..8)), attrs)
        })
        .collect();
    validate_trace(events, id, outcome).expect("generated attributes are in range")
}

/// Random traces with uniformly random outcomes.
pub fn random_dataset<R: Rng>(rng: &mut R, traces: usize, max_events: usize, max_step: i64) -> Dataset {
    let traces = (0..traces)
        .map(|i| {
            let len = rng.gen_range(1..=max_events);
            let outcome = if rng.gen_bool(0.5) {
                Outcome::Positive
            } else {
                Outcome::Negative
            };
            random_trace(rng, &format!("t{i:03}"), len, max_step, outcome)
        })
        .collect();
    Dataset::new(standard_schema(), traces).expect("generated traces share the schema")
}

pub const PLANTED_RULE: &str = "FAMILY_HIGH ##[0:10000] OFFICE_HIGH |-> SENTIMENT_LOW";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Planted,
    FirstOnly,
    SecondOnly,
    Reversed,
    TooFar,
}

/// Dataset in which negative endings are explained by a family-focused
/// message followed within 10000 s by an office-focused one.
///
/// Half of the traces carry the pattern. The rest are decoys: both events
/// in the wrong order (a third), both more than 30000 s apart (a third),
/// or only one of the two. Background events never reach the HIGH level
/// for family or office. Each label is flipped with probability `noise`.
///
/// Most decoys contain both events, so neither event alone nor either one
/// paired with background noise explains the negative endings.
pub fn planted_dataset(seed: u64, traces: usize, noise: f64) -> (Dataset, TemporalRule) {
    let mut rng = rng(seed);
    let background = |c: &str, r: &mut ChaCha8Rng| {
        if c == "family" || c == "office" {
            *[0.0, 0.0, 0.5, 1.0, 1.5].choose(r).expect("non-empty")
        } else {
            *CATEGORY_VALUES.choose(r).expect("non-empty")
        }
    };
    let decoys = [
        Shape::Reversed,
        Shape::TooFar,
        Shape::FirstOnly,
        Shape::Reversed,
        Shape::TooFar,
        Shape::SecondOnly,
    ];

    let mut out = Vec::with_capacity(traces);
    for i in 0..traces {
        let shape = if i % 2 == 0 {
            Shape::Planted
        } else {
            decoys[(i / 2) % decoys.len()]
        };
        let len = rng.gen_range(6..=14);
        let mut times = Vec::with_capacity(len + 2);
        let mut t: i64 = 1_000_000 + rng.gen_range(0..5_000);
        for _ in 0..len {
            times.push(t);
            t += rng.gen_range(300..=3_000);
        }
        let mut events: Vec<Event> = times
            .iter()
            .map(|&ts| Event::new(ts, format!("u{}", rng.gen_range(0..20)), random_attributes(&mut rng, background)))
            .collect();

        let family = |e: &mut Event| {
            e.attributes.insert("cat_family".into(), 2.0);
        };
        let office = |e: &mut Event| {
            e.attributes.insert("cat_office".into(), 2.0);
        };
        let fresh = |rng: &mut ChaCha8Rng, ts: i64| {
            Event::new(ts, format!("u{}", rng.gen_range(0..20)), random_attributes(rng, background))
        };
        let start = events[0].timestamp + rng.gen_range(0..=2_000);
        match shape {
            Shape::Planted | Shape::TooFar | Shape::Reversed => {
                let gap = match shape {
                    Shape::Planted => rng.gen_range(0..=9_500),
                    Shape::Reversed => rng.gen_range(1..=9_500),
                    _ => rng.gen_range(30_001..=60_000),
                };
                let mut first = fresh(&mut rng, start);
                let mut second = fresh(&mut rng, start + gap);
                if shape == Shape::Reversed {
                    office(&mut first);
                    family(&mut second);
                } else {
                    family(&mut first);
                    office(&mut second);
                }
                events.push(first);
                events.push(second);
            }
            Shape::FirstOnly => {
                let mut e = fresh(&mut rng, start);
                family(&mut e);
                events.push(e);
            }
            Shape::SecondOnly => {
                let mut e = fresh(&mut rng, start);
                office(&mut e);
                events.push(e);
            }
        }

        let mut negative = shape == Shape::Planted;
        if rng.gen_bool(noise) {
            negative = !negative;
        }
        let outcome = if negative { Outcome::Negative } else { Outcome::Positive };
        out.push(validate_trace(events, format!("p{i:03}"), outcome).expect("valid synthetic trace"));
    }
    let dataset = Dataset::new(standard_schema(), out).expect("shared schema");
    (dataset, parse_rule(PLANTED_RULE).expect("planted rule parses"))
}

const FILLER: &[&str] = &[
    "i", "we", "the", "and", "to", "about", "this", "that", "with", "for", "our", "is", "was", "it",
    "all", "my", "your", "really", "today", "week", "just", "so", "have", "been", "a", "of", "on",
    "in", "at", "what", "how", "everyone", "after", "again", "time", "balance", "life",
];
const HOME_TOPICS: &[&str] = &["family", "kids", "mother", "wife", "husband", "daughter", "son", "parents"];
const CHORE_TOPICS: &[&str] = &["chores", "laundry", "cooking", "groceries", "dishes", "cleaning", "home"];
const OFFICE_TOPICS: &[&str] = &["office", "meeting", "deadline", "project", "manager", "team", "client"];
const MEDICAL_TOPICS: &[&str] = &["hospital", "emergency", "doctor", "surgery", "ambulance", "accident", "icu"];
const ANGER_TOPICS: &[&str] = &["angry", "blame", "rude", "shouting", "ridiculous", "hostile", "nonsense"];
const POSITIVE_WORDS: &[&str] = &["great", "happy", "wonderful", "good", "helpful", "lovely", "glad", "excellent"];
const NEGATIVE_WORDS: &[&str] = &["terrible", "sad", "awful", "stressed", "unfair", "worried", "exhausted", "bad"];

/// Seed of the bundled `data/sample_corpus.jsonl`.
pub const CORPUS_SEED: u64 = 2021;

/// Messages per dialogue in the bundled corpus; 229 in total.
pub const CORPUS_SIZES: [usize; 10] = [20, 25, 22, 24, 23, 21, 26, 22, 23, 23];

fn sentence(rng: &mut ChaCha8Rng, topics: &[&[&str]], mood: &[&str], extra: Option<&str>) -> String {
    let len = rng.gen_range(8..=14);
    let mut words: Vec<&str> = (0..len).map(|_| *FILLER.choose(rng).expect("non-empty")).collect();
    for pool in topics {
        let at = rng.gen_range(0..words.len());
        words[at] = pool.choose(rng).expect("non-empty");
    }
    if !mood.is_empty() {
        let at = rng.gen_range(0..words.len());
        words[at] = mood.choose(rng).expect("non-empty");
    }
    if let Some(w) = extra {
        words.insert(0, w);
    }
    let mut s = words.join(" ");
    if let Some(first) = s.get(0..1) {
        s.replace_range(0..1, &first.to_uppercase());
    }
    s.push(if rng.gen_bool(0.3) { '!' } else { '.' });
    s
}

/// Ten dialogues with 229 messages from a pool of 127 authors. Dialogues `b0`-`b4`
/// discuss home and family and end on a positive message; `b5`-`b9` turn
/// to medical emergencies and conflict and end on a negative one. Three
/// dialogues contain a comment with "thank", three one with "sorry".
pub fn sample_corpus(seed: u64) -> Vec<RawMessage> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    let mut author = 0usize;
    for (d, &size) in CORPUS_SIZES.iter().enumerate() {
        let positive = d < 5;
        let id = format!("b{d}");
        let mut t: i64 = 1_350_000_000 + d as i64 * 500_000;
        for m in 0..size {
            if m > 0 {
                t += rng.gen_range(600..=9_000);
            }
            let last = m + 1 == size;
            let extra = match (d, m) {
                (0 | 2 | 4, 5) => Some("thank"),
                (5 | 7 | 9, 6) => Some("sorry"),
                _ => None,
            };
            let text = if last {
                let mood = if positive { POSITIVE_WORDS } else { NEGATIVE_WORDS };
                let topic = if positive { HOME_TOPICS } else { MEDICAL_TOPICS };
                sentence(&mut rng, &[topic], mood, None)
            } else {
                // Every topic shows up on both sides, with a lean per class.
                let pools: [(&[&str], u32, u32); 5] = [
                    (OFFICE_TOPICS, 3, 3),
                    (HOME_TOPICS, 3, 1),
                    (CHORE_TOPICS, 3, 1),
                    (MEDICAL_TOPICS, 1, 3),
                    (ANGER_TOPICS, 1, 3),
                ];
                let weight = |&(_, p, n): &(&[&str], u32, u32)| if positive { p } else { n };
                let total: u32 = pools.iter().map(weight).sum::<u32>() + 4;
                let mut roll = rng.gen_range(0..total);
                let mut topics: Vec<&[&str]> = Vec::new();
                for pool in &pools {
                    if roll < weight(pool) {
                        topics.push(pool.0);
                        break;
                    }
                    roll -= weight(pool);
                }
                let mood: &[&str] = match rng.gen_range(0..3) {
                    0 => &[],
                    1 => POSITIVE_WORDS,
                    _ => NEGATIVE_WORDS,
                };
                sentence(&mut rng, &topics, mood, extra)
            };
            author = (author + rng.gen_range(1..=3)) % 127;
            out.push(RawMessage {
                dialogue_id: id.clone(),
                timestamp: t,
                author_id: format!("user{:03}", author + 1),
                text,
            });
        }
    }
    out
}

/// Serializes messages as JSON Lines.
pub fn to_jsonl(messages: &[RawMessage]) -> String {
    let mut s = String::new();
    for m in messages {
        s.push_str(&serde_json::to_string(m).expect("message serializes"));
        s.push('\n');
    }
    s
}
