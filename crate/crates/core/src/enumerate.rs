//! Deterministic families of small knowledge bases.
//!
//! Used by the oracle-soundness sweeps and by `solve`-style commands
//! that want a corpus with known ground truth. Two tiers:
//!
//! - [`exhaustive_family`] enumerates *every* knowledge base over one
//!   or two atoms with up to two rules, plus every single-rule base
//!   over three atoms — a few thousand instances.
//! - [`sampled_family`] draws seeded random bases at the full bounds
//!   (up to four atoms, three rules of one or two antecedents, three
//!   facts), reproducible for a fixed seed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{FactualBody, ProblemInstance, RawText, TaskKind};
use crate::logic::{Atom, Literal, Rule, RuleId, RuleSet};
use crate::reasoner::{model_check, Entailment, KnowledgeBase};

const SUBJECT: &str = "x";
const PREDICATES: [&str; 4] = ["a", "b", "c", "d"];

fn literal_pool(n_atoms: usize) -> Vec<Literal> {
    let mut pool = Vec::with_capacity(n_atoms * 2);
    for p in &PREDICATES[..n_atoms] {
        let atom = Atom::new(SUBJECT, p).expect("static tokens are valid");
        pool.push(Literal::positive(atom.clone()));
        pool.push(Literal::negative(atom));
    }
    pool
}

/// Every well-formed rule with one or two antecedents over the pool.
/// Two-antecedent bodies are unordered (the dedup key ignores order).
fn rule_pool(literals: &[Literal]) -> Vec<Rule> {
    let mut rules = Vec::new();
    let id = RuleId::new("r");
    for (i, a) in literals.iter().enumerate() {
        for c in literals {
            if let Ok(r) = Rule::new(id.clone(), vec![a.clone()], c.clone()) {
                rules.push(r);
            }
        }
        for b in literals.iter().skip(i + 1) {
            for c in literals {
                if let Ok(r) = Rule::new(id.clone(), vec![a.clone(), b.clone()], c.clone()) {
                    rules.push(r);
                }
            }
        }
    }
    rules
}

/// Every fact set without a complementary pair: each atom is absent,
/// positive, or negative.
fn fact_sets(n_atoms: usize, max_facts: usize) -> Vec<Vec<Literal>> {
    let mut sets = Vec::new();
    let mut choices = vec![0u8; n_atoms];
    loop {
        let facts: Vec<Literal> = choices
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| {
                let atom = Atom::new(SUBJECT, PREDICATES[i]).unwrap();
                match c {
                    1 => Some(Literal::positive(atom)),
                    2 => Some(Literal::negative(atom)),
                    _ => None,
                }
            })
            .collect();
        if facts.len() <= max_facts {
            sets.push(facts);
        }
        // Odometer over {0,1,2}^n.
        let mut i = 0;
        loop {
            if i == n_atoms {
                return sets;
            }
            choices[i] += 1;
            if choices[i] < 3 {
                break;
            }
            choices[i] = 0;
            i += 1;
        }
    }
}

fn base(facts: Vec<Literal>, rules: Vec<Rule>) -> KnowledgeBase {
    let rules = RuleSet::from_rules(rules).expect("pool rules are distinct");
    KnowledgeBase::new(facts, rules).expect("fact sets have no complementary pair")
}

/// The exhaustive tier. Deterministic order, no randomness.
pub fn exhaustive_family() -> Vec<KnowledgeBase> {
    let mut out = Vec::new();

    // 1–2 atoms: all rule pairs.
    for n_atoms in 1..=2 {
        let pool = rule_pool(&literal_pool(n_atoms));
        let facts = fact_sets(n_atoms, 2);
        let mut rule_choices: Vec<Vec<Rule>> = vec![Vec::new()];
        for (i, r) in pool.iter().enumerate() {
            rule_choices.push(vec![r.clone()]);
            for s in pool.iter().skip(i + 1) {
                if r.key() != s.key() {
                    rule_choices.push(vec![r.clone(), s.clone()]);
                }
            }
        }
        for rules in &rule_choices {
            for f in &facts {
                out.push(base(f.clone(), rules.clone()));
            }
        }
    }

    // 3 atoms: all single-rule bases.
    let pool = rule_pool(&literal_pool(3));
    let facts = fact_sets(3, 3);
    for rule in &pool {
        for f in &facts {
            out.push(base(f.clone(), vec![rule.clone()]));
        }
    }
    out
}

/// The sampled tier: `count` seeded random bases at the full bounds
/// (≤ 4 atoms, ≤ 3 rules with 1–2 antecedents, ≤ 3 facts).
pub fn sampled_family(seed: u64, count: usize) -> Vec<KnowledgeBase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n_atoms = rng.gen_range(2..=4);
        let literals = literal_pool(n_atoms);

        let n_rules = rng.gen_range(0..=3);
        let mut rules: Vec<Rule> = Vec::new();
        let mut tries = 0;
        while rules.len() < n_rules && tries < 40 {
            tries += 1;
            let n_ants = rng.gen_range(1..=2);
            let mut ants: Vec<Literal> = Vec::new();
            while ants.len() < n_ants {
                let l = literals.choose(&mut rng).unwrap().clone();
                if !ants.contains(&l) {
                    ants.push(l);
                }
            }
            let cons = literals.choose(&mut rng).unwrap().clone();
            if let Ok(r) = Rule::new(RuleId::new("r"), ants, cons) {
                if !rules.iter().any(|e| e.key() == r.key()) {
                    rules.push(r);
                }
            }
        }

        let n_facts = rng.gen_range(0..=3);
        let mut facts: Vec<Literal> = Vec::new();
        let mut tries = 0;
        while facts.len() < n_facts && tries < 40 {
            tries += 1;
            let l = literals.choose(&mut rng).unwrap().clone();
            if !facts.contains(&l) && !facts.iter().any(|f| f.is_complement_of(&l)) {
                facts.push(l);
            }
        }

        out.push(base(facts, rules));
    }
    out
}

/// Convert bases into dataset instances, one per candidate question,
/// with gold answers from the truth-table oracle. Unsatisfiable bases
/// are skipped (every answer would be vacuously right).
pub fn to_instances(bases: &[KnowledgeBase], prefix: &str) -> Vec<ProblemInstance> {
    let mut out = Vec::new();
    for (i, kb) in bases.iter().enumerate() {
        let qs = questions(kb);
        let entailments: Vec<_> = qs
            .iter()
            .map(|q| model_check(kb, q).expect("enumerated bases stay under the atom cap"))
            .collect();
        if entailments.iter().any(|e| *e == Entailment::Inconsistent) {
            continue;
        }
        for (j, (q, entailment)) in qs.iter().zip(&entailments).enumerate() {
            let gold = entailment.as_answer().expect("inconsistent bases were skipped");
            out.push(ProblemInstance {
                id: format!("{prefix}-{i}-{j}"),
                task: TaskKind::Factual,
                factual: Some(FactualBody {
                    facts: kb.facts().to_vec(),
                    rules: kb.rules().clone(),
                    question: q.clone(),
                }),
                gold_answer: gold,
                gold_depth: None,
                raw: RawText {
                    facts: kb.facts().iter().map(|f| f.to_string()).collect(),
                    rules: kb.rules().iter().map(|r| r.to_string()).collect(),
                    question: q.to_string(),
                },
            });
        }
    }
    out
}

/// All candidate questions for a base: every literal over its atoms.
pub fn questions(kb: &KnowledgeBase) -> Vec<Literal> {
    fn push(atoms: &mut Vec<Atom>, a: &Atom) {
        if !atoms.contains(a) {
            atoms.push(a.clone());
        }
    }
    let mut atoms: Vec<Atom> = Vec::new();
    for f in kb.facts() {
        push(&mut atoms, f.atom());
    }
    for r in kb.rules() {
        for a in r.antecedents() {
            push(&mut atoms, a.atom());
        }
        push(&mut atoms, r.consequent().atom());
    }
    if atoms.is_empty() {
        push(&mut atoms, &Atom::new(SUBJECT, PREDICATES[0]).unwrap());
    }
    atoms
        .into_iter()
        .flat_map(|a| [Literal::positive(a.clone()), Literal::negative(a)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_family_is_several_thousand_and_deterministic() {
        let family = exhaustive_family();
        assert!(family.len() > 3000, "got {}", family.len());
        assert_eq!(family.len(), exhaustive_family().len());
        assert_eq!(family[100], exhaustive_family()[100]);
    }

    #[test]
    fn sampled_family_is_reproducible() {
        let a = sampled_family(7, 50);
        let b = sampled_family(7, 50);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
    }

    #[test]
    fn sampled_family_respects_bounds() {
        for kb in sampled_family(11, 200) {
            assert!(kb.facts().len() <= 3);
            assert!(kb.rules().len() <= 3);
            assert!(kb.rules().iter().all(|r| r.antecedents().len() <= 2));
        }
    }

    #[test]
    fn questions_cover_both_polarities() {
        let kb = sampled_family(3, 1).pop().unwrap();
        let qs = questions(&kb);
        assert!(qs.len() >= 2);
        assert!(qs.len() % 2 == 0);
    }

    #[test]
    fn instances_carry_oracle_golds() {
        let bases = sampled_family(5, 10);
        let instances = to_instances(&bases, "enum");
        assert!(!instances.is_empty());
        for instance in &instances {
            let kb = instance.kb().unwrap();
            let oracle = model_check(&kb, instance.question().unwrap()).unwrap();
            assert_eq!(oracle.as_answer(), Some(instance.gold_answer));
        }
    }
}
