#![allow(dead_code)]

use std::collections::BTreeMap;

use orfoil::datalog::{is_stable_model, GroundProgram, Interpretation};
use orfoil::model::{Atom, HybridKb, Literal, Predicate, Rule};
use orfoil::parser::{parse_bias, parse_examples, parse_kb, parse_rule};
use orfoil::refine::{HypothesisSpace, RefinementStep};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const EXAMPLE1: &str = include_str!("../../../../data/example1.okb");
pub const LONER_EX: &str = include_str!("../../../../data/loner.oex");
pub const LONER_BIAS: &str = include_str!("../../../../data/loner.obias");
pub const LIKES_EX: &str = include_str!("../../../../data/likes.oex");
pub const LIKES_BIAS: &str = include_str!("../../../../data/likes.obias");

pub const LONER: [&str; 3] =
    ["LONER(X) :- famous(X).", "LONER(X) :- famous(X), UNMARRIED(X).", "LONER(X) :- famous(X), not happy(X)."];

pub const LIKES: [&str; 5] = [
    "LIKES(X,Y) :- meets(X,Z,Y).",
    "LIKES(X,Y) :- meets(X,Z,Y), happy(X).",
    "LIKES(X,Y) :- meets(X,Z,Y), RICH(Z).",
    "LIKES(X,Y) :- meets(X,Z,Y), LOVES(X,Z).",
    "LIKES(X,Y) :- meets(X,Z,Y), WANTS-TO-MARRY(X,Z).",
];

pub fn kb() -> HybridKb {
    parse_kb(EXAMPLE1).unwrap()
}

pub fn rule(kb: &HybridKb, text: &str) -> Rule {
    parse_rule(text, &kb.signature).unwrap()
}

pub fn space(kb: &HybridKb, examples: &str, bias: &str) -> HypothesisSpace {
    let ex = parse_examples(examples, kb).unwrap();
    HypothesisSpace::new(ex.target, parse_bias(bias, kb).unwrap(), kb.tbox.clone()).unwrap()
}

pub fn loner_space(kb: &HybridKb) -> HypothesisSpace {
    space(kb, LONER_EX, LONER_BIAS)
}

pub fn likes_space(kb: &HybridKb) -> HypothesisSpace {
    space(kb, LIKES_EX, LIKES_BIAS)
}

/// Breadth-first expansion from the seed. `levels[d]` holds the distinct rules
/// first reached at depth `d + 1`; `pairs` holds every parent/child step.
pub struct Expansion {
    pub levels: Vec<Vec<Rule>>,
    pub pairs: Vec<RefinementStep>,
}

impl Expansion {
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.levels.iter().flatten()
    }
}

pub fn expand(s: &HypothesisSpace, depth: usize) -> Expansion {
    let mut levels = Vec::new();
    let mut pairs = Vec::new();
    let mut frontier = vec![s.seed_rule()];
    for _ in 0..depth {
        let mut next = BTreeMap::new();
        for h in &frontier {
            for (c, step) in s.refine(h) {
                next.entry(c.canonical_key()).or_insert(c);
                pairs.push(step);
            }
        }
        frontier = next.into_values().collect();
        levels.push(frontier.clone());
    }
    Expansion { levels, pairs }
}

pub fn prop(i: usize) -> Atom {
    Atom::new(Predicate::datalog(&format!("p{i}"), 0), vec![])
}

pub fn random_program(rng: &mut ChaCha8Rng, atoms: usize) -> GroundProgram {
    let n_rules = rng.gen_range(0..=2 * atoms);
    let rules = (0..n_rules)
        .map(|_| {
            let head = prop(rng.gen_range(0..atoms));
            let body = (0..rng.gen_range(0..=3))
                .map(|_| {
                    let a = prop(rng.gen_range(0..atoms));
                    if rng.gen_bool(0.4) {
                        Literal::naf(a)
                    } else {
                        Literal::pos(a)
                    }
                })
                .collect();
            Rule::new(head, body)
        })
        .collect();
    let facts: Vec<Atom> = (0..atoms).filter(|_| rng.gen_bool(0.15)).map(prop).collect();
    GroundProgram::new(rules, facts)
}

/// Every interpretation over the Herbrand base that passes the reduct check.
pub fn brute_force(p: &GroundProgram) -> Vec<Interpretation> {
    let base: Vec<Atom> = p.herbrand_base().into_iter().collect();
    let mut out: Vec<Interpretation> = (0u32..(1 << base.len()))
        .map(|mask| {
            Interpretation::new(base.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, a)| a.clone()))
        })
        .filter(|i| is_stable_model(p, i))
        .collect();
    out.sort();
    out
}

const PEOPLE: [&str; 5] = ["Mary", "Joe", "Paul", "Ann", "Bob"];
const PLACES: [&str; 2] = ["Italy", "Germany"];

/// A knowledge base with the schema of the running example and random facts
/// over up to five people. Every person is a `person` so examples may name them.
pub fn random_example_kb(rng: &mut ChaCha8Rng) -> (String, Vec<&'static str>) {
    let n = rng.gen_range(3..=PEOPLE.len());
    let people = PEOPLE[..n].to_vec();
    let mut text = String::from(
        "concept RICH, UNMARRIED.\nrole WANTS-TO-MARRY, LOVES.\npred famous/1, scientist/1, happy/1, meets/3, person/1.\n\
         #tbox\nRICH and UNMARRIED subclass some inv(WANTS-TO-MARRY) Top.\nWANTS-TO-MARRY subrole LOVES.\n#rules\n",
    );
    if rng.gen_bool(0.8) {
        text.push_str("RICH(X) :- famous(X), not scientist(X).\n");
    }
    text.push_str("happy(X) :- famous(X), WANTS-TO-MARRY(Y,X).\n#facts\n");
    for p in &people {
        text.push_str(&format!("person({p}).\n"));
        for (pred, prob) in [("famous", 0.7), ("scientist", 0.3), ("UNMARRIED", 0.5), ("RICH", 0.15)] {
            if rng.gen_bool(prob) {
                text.push_str(&format!("{pred}({p}).\n"));
            }
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        let a = people[rng.gen_range(0..n)];
        let b = people[rng.gen_range(0..n)];
        text.push_str(&format!("WANTS-TO-MARRY({a},{b}).\n"));
    }
    for _ in 0..rng.gen_range(0..=4) {
        let a = people[rng.gen_range(0..n)];
        let b = people[rng.gen_range(0..n)];
        let c = PLACES[rng.gen_range(0..PLACES.len())];
        text.push_str(&format!("meets({a},{b},{c}).\n"));
    }
    (text, people)
}
