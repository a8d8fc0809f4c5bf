//! Property tests for the rule language: parse/serialize round trips
//! and normalization invariance.

use proptest::prelude::*;

use dir_core::logic::{Atom, Literal, Polarity, Rule, RuleId};
use dir_core::parse::{parse_literal, parse_rule, serialize_literal, serialize_rule};

fn token() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,7}".prop_filter("keep tokens article-free", |t| {
        !matches!(t.as_str(), "the" | "a" | "an")
    })
}

fn literal() -> impl Strategy<Value = Literal> {
    (token(), token(), any::<bool>()).prop_map(|(subject, predicate, negative)| {
        let atom = Atom::new(&subject, &predicate).unwrap();
        Literal::new(atom, if negative { Polarity::Negative } else { Polarity::Positive })
    })
}

fn rule() -> impl Strategy<Value = Rule> {
    (proptest::collection::vec(literal(), 1..=3), literal()).prop_filter_map(
        "well-formed rules only",
        |(antecedents, consequent)| {
            Rule::new(RuleId::new("r1"), antecedents, consequent).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn literal_round_trips(lit in literal()) {
        let text = serialize_literal(&lit);
        prop_assert_eq!(parse_literal(&text).unwrap(), lit);
    }

    #[test]
    fn rule_round_trips(r in rule()) {
        let text = serialize_rule(&r);
        prop_assert_eq!(parse_rule(&text).unwrap(), r);
    }

    #[test]
    fn negation_is_involutive(lit in literal()) {
        prop_assert_eq!(lit.negated().negated(), lit.clone());
        prop_assert_ne!(lit.negated(), lit);
    }

    #[test]
    fn parsing_ignores_case_and_spacing(lit in literal()) {
        let text = serialize_literal(&lit);
        let shouted = text.to_ascii_uppercase();
        prop_assert_eq!(parse_literal(&shouted).unwrap(), lit.clone());
        let padded = format!("  {text}   ");
        prop_assert_eq!(parse_literal(&padded).unwrap(), lit);
    }
}
