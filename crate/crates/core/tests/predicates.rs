use std::collections::BTreeMap;

use dialogue_rules::predicate::{Bin, CategoryBins, Level, PredicateError, TABLE1_TOML};
use dialogue_rules::{compile_predicates, default_table1_config, match_cause, parse_rule, synth, validate_trace, Event, Outcome, PredicateConfig};
use proptest::prelude::*;

fn event(polarity: f64, categories: [f64; 5]) -> Event {
    let mut a = BTreeMap::new();
    for name in synth::standard_schema() {
        a.insert(name, 0.0);
    }
    a.insert("polarity".into(), polarity);
    for (c, v) in synth::CATEGORIES.iter().zip(categories) {
        a.insert(format!("cat_{c}"), v);
    }
    Event::new(0, "u", a)
}

fn holds(name: &str, e: &Event) -> bool {
    let set = compile_predicates(&default_table1_config(), &synth::standard_schema()).unwrap();
    set.lookup(name).unwrap().eval_event(e).unwrap()
}

#[test]
fn predicate_count_matches_the_config() {
    let config = default_table1_config();
    let schema = synth::standard_schema();
    let categories = schema.iter().filter(|s| s.starts_with("cat_")).count();
    let expected_base = config.attributes.iter().map(|a| a.bins.len()).sum::<usize>()
        + categories * config.categories.as_ref().unwrap().bins.len()
        + config.outcome.bins.len();
    assert_eq!(expected_base, 27);
    let set = compile_predicates(&config, &schema).unwrap();
    assert_eq!(set.len(), expected_base + config.aliases.len());
    assert_eq!(set.trace_level().count(), 2);
    assert!(set.names().all(|n| n == n.to_uppercase()));
}

#[test]
fn shipped_file_is_the_default() {
    assert_eq!(PredicateConfig::from_toml(TABLE1_TOML).unwrap(), default_table1_config());
    let text = default_table1_config().to_toml();
    assert_eq!(PredicateConfig::from_toml(&text).unwrap(), default_table1_config());
}

#[test]
fn reference_memberships() {
    assert!(holds("MEDICAL_EMERGENCY_ABSENT", &event(0.0, [0.0; 5])));
    assert!(holds("SENTIMENT_HIGH_POS", &event(0.85 * 5.0, [0.0; 5])));
    assert!(holds("SENTIMENT_MEDIUM_POS", &event(2.5, [0.0; 5])));
    assert!(!holds("SENTIMENT_LOW_POS", &event(2.5, [0.0; 5])));
    assert!(holds("SENTIMENT_NEG", &event(-1.0, [0.0; 5])));
    assert!(!holds("SENTIMENT_VERY_NEG", &event(-1.0, [0.0; 5])));
    assert!(holds("FAMILY_HIGH", &event(0.0, [0.0, 0.0, 2.0, 0.0, 0.0])));
    assert!(holds("OFFICE_LOW", &event(0.0, [0.0, 0.0, 0.0, 0.0, 0.999999])));
}

#[test]
fn aliases_are_unions() {
    for p in [-5.0, -1.0, -0.000001, 0.0, 2.4, 2.5, 4.0, 5.0] {
        let e = event(p, [0.0; 5]);
        let any = ["SENTIMENT_LOW_POS", "SENTIMENT_MEDIUM_POS", "SENTIMENT_HIGH_POS"].iter().any(|n| holds(n, &e));
        assert_eq!(holds("SENTIMENT_POS", &e), any);
        assert_eq!(holds("SENTIMENT_VERY_POS", &e), holds("SENTIMENT_HIGH_POS", &e));
    }
}

#[test]
fn invalid_bins_are_rejected() {
    let schema = synth::standard_schema();
    let with_categories = |bins: Vec<Bin>| {
        let mut c = default_table1_config();
        c.categories = Some(CategoryBins { range: [0.0, 2.0], bins });
        compile_predicates(&c, &schema)
    };
    assert!(matches!(
        with_categories(vec![Bin::new("A", "[0,1)"), Bin::new("B", "[0.5,2]")]),
        Err(PredicateError::OverlappingBins { .. })
    ));
    assert!(matches!(
        with_categories(vec![Bin::new("ABSENT", "=0"), Bin::new("MEDIUM", "[1,2)"), Bin::new("HIGH", ">=2")]),
        Err(PredicateError::CoverageGap { .. })
    ));
    let mut c = default_table1_config();
    c.attributes[0].attribute = "valence".into();
    assert!(matches!(compile_predicates(&c, &schema), Err(PredicateError::UnknownAttribute(_))));
}

#[test]
fn extra_numeric_columns_can_be_binned() {
    let text = format!(
        "{TABLE1_TOML}\n[[attribute]]\nattribute = \"likes\"\nlabel = \"LIKES\"\nrange = [0.0, 1000000.0]\n\
         bins = [{{ name = \"NONE\", domain = \"=0\" }}, {{ name = \"SOME\", domain = \">0\" }}]\n"
    );
    let mut schema = synth::standard_schema();
    schema.push("likes".into());
    let set = compile_predicates(&PredicateConfig::from_toml(&text).unwrap(), &schema).unwrap();
    assert_eq!(set.get("LIKES_SOME").unwrap().level(), Level::Event);
}

proptest! {
    #[test]
    fn each_attribute_value_falls_in_exactly_one_bin(
        polarity in prop_oneof![-5.0f64..=5.0, Just(-1.0), Just(0.0), Just(2.5), Just(4.0), Just(-5.0), Just(5.0)],
        cats in proptest::array::uniform5(prop_oneof![0.0f64..=2.0, Just(0.0), Just(1.0), Just(2.0)]),
    ) {
        let set = compile_predicates(&default_table1_config(), &synth::standard_schema()).unwrap();
        let e = event(polarity, cats);
        let count = |prefix: &str, bins: &[&str]| bins.iter().filter(|b| set.lookup(&format!("{prefix}_{b}")).unwrap().eval_event(&e).unwrap()).count();
        prop_assert_eq!(count("SENTIMENT", &["VERY_NEG", "NEG", "LOW_POS", "MEDIUM_POS", "HIGH_POS"]), 1);
        for c in synth::CATEGORIES {
            prop_assert_eq!(count(&c.to_uppercase(), &["ABSENT", "LOW", "MEDIUM", "HIGH"]), 1);
        }
    }

    #[test]
    fn negated_literal_is_the_complement(
        polarity in -5.0f64..=5.0,
        cats in proptest::array::uniform5(prop_oneof![0.0f64..=2.0, Just(0.0), Just(1.0), Just(2.0)]),
    ) {
        let set = compile_predicates(&default_table1_config(), &synth::standard_schema()).unwrap();
        let e = event(polarity, cats);
        let trace = validate_trace(vec![e.clone()], "d", Outcome::Positive).unwrap();
        for (_, def) in set.event_level() {
            let positive = def.eval_event(&e).unwrap();
            let negated = parse_rule(&format!("!{} |-> SENTIMENT_HIGH", def.name)).unwrap();
            prop_assert_eq!(match_cause(&negated, &trace, &set).unwrap().is_some(), !positive);
        }
    }
}
