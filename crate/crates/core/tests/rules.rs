mod common;

use std::collections::BTreeMap;

use dialogue_rules::oracle::brute_force_match;
use dialogue_rules::rule::{Bucket, Interval, Literal, RuleError};
use dialogue_rules::{evaluate_rule, match_cause, parse_rule, render_rule, synth, validate_trace, Dataset, Event, Outcome, TemporalRule, Witness};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn ident() -> impl Strategy<Value = String> {
    "[A-Z][A-Z0-9_]{0,10}".prop_filter("keyword", |s| s != "TRUE")
}

fn arbitrary_rule() -> impl Strategy<Value = TemporalRule> {
    fn bucket() -> impl Strategy<Value = Bucket> {
        proptest::collection::btree_map(ident(), any::<bool>(), 0..4).prop_map(|m| {
            Bucket::new(m.into_iter().map(|(n, neg)| Literal { predicate: n, negated: neg }).collect()).unwrap()
        })
    }
    (1usize..5)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(bucket(), n),
                proptest::collection::vec((0i64..50_000, 0i64..50_000), n - 1),
                ident(),
            )
        })
        .prop_map(|(buckets, bounds, effect)| {
            let intervals = bounds.into_iter().map(|(a, b)| Interval::new(a.min(b), a.max(b)).unwrap()).collect();
            TemporalRule::new(buckets, intervals, effect).unwrap()
        })
}

fn event(t: i64, polarity: f64, family: f64) -> Event {
    let mut a = BTreeMap::new();
    for name in synth::standard_schema() {
        a.insert(name, 0.0);
    }
    a.insert("polarity".into(), polarity);
    a.insert("cat_family".into(), family);
    Event::new(t, "u", a)
}

#[test]
fn published_rule_shapes() {
    let r = parse_rule(PUBLISHED_RULES[0]).unwrap();
    assert_eq!((r.buckets().len(), r.literal_count()), (1, 2));
    let r = parse_rule(PUBLISHED_RULES[4]).unwrap();
    assert_eq!(r.buckets().len(), 3);
    assert_eq!(r.intervals(), [Interval::new(0, 30_000).unwrap(), Interval::new(0, 10_000).unwrap()]);
    assert_eq!(r.effect(), "SENTIMENT_LOW");
}

#[test]
fn canonical_rendering() {
    let b = Bucket::new(vec![Literal::pos("B"), Literal::neg("A")]).unwrap();
    let r = TemporalRule::new(vec![b], vec![], "E").unwrap();
    assert_eq!(render_rule(&r), "!A && B |-> E");
    assert_eq!(render_rule(&TemporalRule::tautology("E")), "true |-> E");
    assert_eq!(
        parse_rule("  A&&!B##[ 0 : 5 ]true|->E ").unwrap().render(),
        "!B && A ##[0:5] true |-> E"
    );
}

#[test]
fn syntax_errors_carry_positions() {
    match parse_rule("A ##[0:10000] |-> E") {
        Err(RuleError::Syntax { pos, .. }) => assert_eq!(pos, 14),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_rule("A && !A |-> E"), Err(RuleError::DuplicatePredicateInBucket(_))));
    assert!(matches!(parse_rule("A ##[5:1] B |-> E"), Err(RuleError::Syntax { pos: 5, .. })));
    assert!(matches!(Interval::new(5, 1), Err(RuleError::InvalidInterval { lo: 5, hi: 1 })));
    assert!(matches!(parse_rule("A |->"), Err(RuleError::Syntax { .. })));
    assert!(matches!(parse_rule("|-> E"), Err(RuleError::Syntax { .. })));
}

#[test]
fn matching_examples() {
    let set = table1();
    let trace = validate_trace(vec![event(0, 4.0, 2.0), event(20, 4.0, 2.0)], "d", Outcome::Positive).unwrap();
    let taut = TemporalRule::tautology("SENTIMENT_HIGH");
    assert_eq!(match_cause(&taut, &trace, &set).unwrap(), Some(Witness { indices: vec![0] }));
    let tight = parse_rule("FAMILY_HIGH ##[0:10] FAMILY_HIGH |-> SENTIMENT_HIGH").unwrap();
    assert_eq!(match_cause(&tight, &trace, &set).unwrap(), None);
    let wide = parse_rule("FAMILY_HIGH ##[0:20] FAMILY_HIGH |-> SENTIMENT_HIGH").unwrap();
    assert_eq!(match_cause(&wide, &trace, &set).unwrap(), Some(Witness { indices: vec![0, 1] }));
    // One event never fills two buckets, even at equal timestamps.
    let single = validate_trace(vec![event(5, 4.0, 2.0)], "s", Outcome::Positive).unwrap();
    assert_eq!(match_cause(&wide, &single, &set).unwrap(), None);
    let unknown = parse_rule("NOT_A_PREDICATE |-> SENTIMENT_HIGH").unwrap();
    assert!(matches!(match_cause(&unknown, &trace, &set), Err(RuleError::Predicate(_))));
}

fn toy_dataset() -> Dataset {
    // The cause FAMILY_HIGH matches t1 (positive) and t3 (negative).
    let traces = vec![
        validate_trace(vec![event(0, 1.0, 2.0)], "t1", Outcome::Positive).unwrap(),
        validate_trace(vec![event(0, 1.0, 0.5)], "t2", Outcome::Positive).unwrap(),
        validate_trace(vec![event(0, -1.0, 0.0), event(9, -1.0, 2.0)], "t3", Outcome::Negative).unwrap(),
        validate_trace(vec![event(0, -1.0, 1.0)], "t4", Outcome::Negative).unwrap(),
    ];
    Dataset::new(synth::standard_schema(), traces).unwrap()
}

#[test]
fn four_trace_toy_metrics() {
    let set = table1();
    let d = toy_dataset();
    let rule = parse_rule("FAMILY_HIGH |-> SENTIMENT_HIGH").unwrap();
    let m = evaluate_rule(&rule, &d, &set).unwrap();
    assert_eq!((m.support, m.correlation, m.confidence), (0.5, Some(0.5), Some(0.5)));
    let by_oracle: Vec<bool> = d
        .traces()
        .iter()
        .map(|t| brute_force_match(&rule, t, &set).unwrap().is_some())
        .collect();
    assert_eq!(by_oracle, [true, false, true, false]);
}

#[test]
fn metric_edge_cases() {
    let set = table1();
    let d = toy_dataset();
    let never = parse_rule("SENTIMENT_NEG && SENTIMENT_HIGH_POS |-> SENTIMENT_HIGH").unwrap();
    let m = evaluate_rule(&never, &d, &set).unwrap();
    assert_eq!((m.support, m.correlation, m.confidence), (0.0, Some(0.0), None));

    let positives = Dataset::new(synth::standard_schema(), d.traces()[..2].to_vec()).unwrap();
    let m = evaluate_rule(&TemporalRule::tautology("SENTIMENT_LOW"), &positives, &set).unwrap();
    assert_eq!(m.correlation, None);
    assert_eq!(m.counts.effect_total, 0);

    let empty = Dataset::new(synth::standard_schema(), vec![]).unwrap();
    assert!(matches!(evaluate_rule(&never, &empty, &set), Err(RuleError::EmptyDataset)));
    let bad_effect = parse_rule("true |-> FAMILY_HIGH").unwrap();
    assert!(matches!(evaluate_rule(&bad_effect, &d, &set), Err(RuleError::EffectNotOutcome(_))));
    let outcome_in_cause = parse_rule("SENTIMENT_HIGH |-> SENTIMENT_HIGH").unwrap();
    assert!(matches!(evaluate_rule(&outcome_in_cause, &d, &set), Err(RuleError::OutcomeInBucket(_))));
}

#[test]
fn differential_with_dense_timestamps() {
    let set = table1();
    let names = event_names(&set);
    let mut rng = synth::rng(41);
    for _ in 0..2000 {
        let len = rng.gen_range(1..=12);
        let step = rng.gen_range(0..=3);
        let trace = synth::random_trace(&mut rng, "t", len, step, Outcome::Negative);
        let rule = random_rule(&mut rng, &names, 4, 6);
        assert_eq!(
            match_cause(&rule, &trace, &set).unwrap(),
            brute_force_match(&rule, &trace, &set).unwrap(),
            "{rule}"
        );
    }
}

proptest! {
    #[test]
    fn parse_inverts_render(rule in arbitrary_rule()) {
        let text = rule.render();
        let parsed = parse_rule(&text).unwrap();
        prop_assert_eq!(&parsed, &rule);
        prop_assert_eq!(parsed.render(), text);
    }

    #[test]
    fn serde_uses_rule_text(rule in arbitrary_rule()) {
        let json = serde_json::to_string(&rule).unwrap();
        prop_assert_eq!(&json, &serde_json::to_string(&rule.render()).unwrap());
        prop_assert_eq!(serde_json::from_str::<TemporalRule>(&json).unwrap(), rule);
    }

    #[test]
    fn widening_an_interval_keeps_matches(seed in any::<u64>()) {
        let set = table1();
        let names = event_names(&set);
        let mut rng = synth::rng(seed);
        let d = synth::random_dataset(&mut rng, 8, 10, 6);
        let rule = random_rule(&mut rng, &names, 4, 12);
        if rule.intervals().is_empty() {
            return Ok(());
        }
        let j = rng.gen_range(0..rule.intervals().len());
        let i = rule.intervals()[j];
        let mut widened = rule.intervals().to_vec();
        widened[j] = Interval::new(rng.gen_range(0..=i.lo()), i.hi() + rng.gen_range(0..=10)).unwrap();
        let wider = rule.with_intervals(widened).unwrap();
        for (before, after) in matched_by(&rule, &d, &set).into_iter().zip(matched_by(&wider, &d, &set)) {
            prop_assert!(!before || after);
        }
    }

    #[test]
    fn literals_trade_support_monotonically(seed in any::<u64>()) {
        let set = table1();
        let names = event_names(&set);
        let mut rng = synth::rng(seed);
        let d = synth::random_dataset(&mut rng, 10, 10, 6);
        let rule = random_rule(&mut rng, &names, 3, 12);
        let base = evaluate_rule(&rule, &d, &set).unwrap().counts.matched;
        let j = rng.gen_range(0..rule.buckets().len());
        let bucket = &rule.buckets()[j];

        if let Some(lit) = bucket.literals().first() {
            let mut buckets = rule.buckets().to_vec();
            buckets[j] = bucket.without(lit);
            let fewer = rule.with_buckets(buckets).unwrap();
            prop_assert!(evaluate_rule(&fewer, &d, &set).unwrap().counts.matched >= base);
        }
        let free: Vec<&String> = names.iter().filter(|n| !bucket.mentions(n)).collect();
        let pick = free[rng.gen_range(0..free.len())].clone();
        let lit = if rng.gen_bool(0.5) { Literal::neg(pick) } else { Literal::pos(pick) };
        let mut buckets = rule.buckets().to_vec();
        buckets[j] = bucket.with(lit).unwrap();
        let more = rule.with_buckets(buckets).unwrap();
        prop_assert!(evaluate_rule(&more, &d, &set).unwrap().counts.matched <= base);
    }

    #[test]
    fn metrics_are_count_ratios(seed in any::<u64>()) {
        let set = table1();
        let names = event_names(&set);
        let mut rng = synth::rng(seed);
        let traces = rng.gen_range(1..15);
        let d = synth::random_dataset(&mut rng, traces, 8, 6);
        let rule = random_rule(&mut rng, &names, 3, 12);
        let m = evaluate_rule(&rule, &d, &set).unwrap();
        let c = m.counts;
        prop_assert_eq!(c.dataset_size, d.len());
        prop_assert_eq!(m.support, c.matched as f64 / c.dataset_size as f64);
        prop_assert!(c.matched_and_effect <= c.matched.min(c.effect_total));
        if let Some(corr) = m.correlation {
            prop_assert!(corr <= 1.0);
            prop_assert_eq!(corr, c.matched_and_effect as f64 / c.effect_total as f64);
        }
    }
}
