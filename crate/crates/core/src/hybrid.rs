//! NM-models of a hybrid KB, cautious entailment, coverage and the
//! generality order between rules.
//!
//! The KB is compiled into one normal program: the TBox becomes definite rules
//! (see [`crate::dl::tbox_rules`]), and a positive role atom whose other
//! argument is a variable occurring nowhere else in its rule is read as the
//! witness concept `some(R)` / `some(inv(R))`, so an anonymous individual can
//! satisfy it. DL atoms are then minimised together with the datalog atoms.

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::datalog::{
    ground_program, is_stable_model, stable_models_with, DatalogError, GroundProgram, GroundingOptions, Interpretation,
    SolverOptions,
};
use crate::dl::{saturate, tbox_rules, witness_concept, DlError, DlGuess};
use crate::matcher::{for_each_match, has_match, unify_ground, AtomIndex};
use crate::model::{
    skolemize, Atom, GroundingError, HybridKb, Literal, PredKind, Predicate, Rule, Substitution, Symbol, Term,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HybridError {
    #[error("knowledge base has no NM-model")]
    Inconsistent,
    #[error(transparent)]
    Datalog(DatalogError),
    #[error(transparent)]
    Dl(#[from] DlError),
}

impl HybridError {
    /// Grounding or model-search limits were hit.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            HybridError::Datalog(DatalogError::ChoiceBudget { .. })
                | HybridError::Datalog(DatalogError::Grounding(GroundingError::BudgetExceeded { .. }))
        )
    }
}

impl From<DatalogError> for HybridError {
    fn from(e: DatalogError) -> Self {
        match e {
            DatalogError::Inconsistent => HybridError::Inconsistent,
            other => HybridError::Datalog(other),
        }
    }
}

impl From<GroundingError> for HybridError {
    fn from(e: GroundingError) -> Self {
        HybridError::Datalog(DatalogError::Grounding(e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NmModel {
    pub guess: DlGuess,
    pub datalog_model: Interpretation,
}

impl NmModel {
    pub fn holds(&self, atom: &Atom) -> bool {
        if atom.pred.is_dl() {
            self.guess.true_atoms.contains(atom)
        } else {
            self.datalog_model.holds(atom)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneralityVerdict {
    StrictlyMoreGeneral,
    StrictlyLessGeneral,
    Equivalent,
    Incomparable,
}

impl GeneralityVerdict {
    pub fn from_pair(forward: bool, backward: bool) -> Self {
        match (forward, backward) {
            (true, true) => GeneralityVerdict::Equivalent,
            (true, false) => GeneralityVerdict::StrictlyMoreGeneral,
            (false, true) => GeneralityVerdict::StrictlyLessGeneral,
            (false, false) => GeneralityVerdict::Incomparable,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GeneralityVerdict::StrictlyMoreGeneral => "strictly-more-general",
            GeneralityVerdict::StrictlyLessGeneral => "strictly-less-general",
            GeneralityVerdict::Equivalent => "equivalent",
            GeneralityVerdict::Incomparable => "incomparable",
        }
    }
}

impl std::fmt::Display for GeneralityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReasonerConfig {
    pub grounding: GroundingOptions,
    pub solver: SolverOptions,
}

/// Snapshot of the reasoner's work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReasonerStats {
    pub programs_solved: u64,
    pub ground_rules: u64,
    pub models_found: u64,
    pub entailment_checks: u64,
    pub coverage_checks: u64,
    pub generality_checks: u64,
    pub closure_cache_hits: u64,
}

#[derive(Default)]
struct Counters {
    programs_solved: AtomicU64,
    ground_rules: AtomicU64,
    models_found: AtomicU64,
    entailment_checks: AtomicU64,
    coverage_checks: AtomicU64,
    generality_checks: AtomicU64,
    closure_cache_hits: AtomicU64,
}

fn bump(c: &AtomicU64, by: u64) {
    c.fetch_add(by, Ordering::Relaxed);
}

/// What `K ∪ body(h)σ` tells about a skolemized body: the atoms true in every
/// NM-model, plus the NAF atoms of the body itself.
#[derive(Clone, Debug)]
pub struct SkolemClosure {
    pub head: Atom,
    pub subst: Substitution,
    /// `None` when `K ∪ body⁺(h)σ` has no NM-model.
    pub certain: Option<AtomIndex>,
    pub naf: BTreeSet<Atom>,
}

pub struct Reasoner {
    kb: HybridKb,
    config: ReasonerConfig,
    counters: Counters,
    base_models: OnceLock<Result<Arc<Vec<AtomIndex>>, HybridError>>,
    closures: Mutex<HashMap<String, Arc<SkolemClosure>>>,
}

impl Reasoner {
    pub fn new(kb: HybridKb) -> Self {
        Self::with_config(kb, ReasonerConfig::default())
    }

    pub fn with_config(kb: HybridKb, config: ReasonerConfig) -> Self {
        Reasoner {
            kb,
            config,
            counters: Counters::default(),
            base_models: OnceLock::new(),
            closures: Mutex::new(HashMap::new()),
        }
    }

    pub fn kb(&self) -> &HybridKb {
        &self.kb
    }

    pub fn config(&self) -> ReasonerConfig {
        self.config
    }

    pub fn stats(&self) -> ReasonerStats {
        let c = &self.counters;
        let get = |a: &AtomicU64| a.load(Ordering::Relaxed);
        ReasonerStats {
            programs_solved: get(&c.programs_solved),
            ground_rules: get(&c.ground_rules),
            models_found: get(&c.models_found),
            entailment_checks: get(&c.entailment_checks),
            coverage_checks: get(&c.coverage_checks),
            generality_checks: get(&c.generality_checks),
            closure_cache_hits: get(&c.closure_cache_hits),
        }
    }

    /// Ground program for `kb ∪ extra_rules ∪ extra_facts` after translation.
    pub fn compile(
        &self,
        kb: &HybridKb,
        extra_rules: &[Rule],
        extra_facts: &[Atom],
    ) -> Result<GroundProgram, HybridError> {
        let mut roles: BTreeSet<Predicate> = kb.signature.roles.clone();
        let mentioned = kb
            .idb
            .iter()
            .chain(extra_rules)
            .flat_map(|r| std::iter::once(&r.head).chain(r.body.iter().map(|l| &l.atom)));
        roles.extend(
            mentioned
                .chain(kb.facts())
                .chain(extra_facts)
                .map(|a| &a.pred)
                .filter(|p| p.kind == PredKind::Role)
                .cloned(),
        );
        let mut rules = tbox_rules(&kb.tbox, &roles)?;
        rules.extend(kb.idb.iter().chain(extra_rules).map(translate_rule));
        let facts = kb.facts().chain(extra_facts).cloned();
        let (program, stats) = ground_program(&rules, facts, &kb.constants(), self.config.grounding)?;
        bump(&self.counters.ground_rules, stats.emitted as u64);
        Ok(program)
    }

    fn solve(&self, program: &GroundProgram) -> Result<Vec<Interpretation>, HybridError> {
        let models = stable_models_with(program, self.config.solver)?;
        bump(&self.counters.programs_solved, 1);
        bump(&self.counters.models_found, models.len() as u64);
        Ok(models)
    }

    /// Every NM-model of `kb ∪ extra_rules ∪ extra_facts`, each checked
    /// against the stable-model and guess-consistency conditions.
    pub fn nm_models(&self, extra_rules: &[Rule], extra_facts: &[Atom]) -> Result<Vec<NmModel>, HybridError> {
        let program = self.compile(&self.kb, extra_rules, extra_facts)?;
        let base = program.herbrand_base();
        let mut out = Vec::new();
        for m in self.solve(&program)? {
            assert!(is_stable_model(&program, &m), "solver returned a non-stable interpretation");
            let (dl, dat): (Vec<Atom>, Vec<Atom>) = m.true_atoms.iter().cloned().partition(|a| a.pred.is_dl());
            let false_atoms = base.iter().filter(|a| a.pred.is_dl() && !m.holds(a)).cloned();
            let guess = DlGuess::new(dl, false_atoms)?;
            assert!(saturate(&guess, &self.kb.tbox, &self.kb.abox)?.is_consistent(), "guess not closed under the TBox");
            out.push(NmModel { guess, datalog_model: Interpretation::new(dat) });
        }
        Ok(out)
    }

    /// Cautious entailment of a ground atom.
    pub fn entails(&self, extra_rules: &[Rule], extra_facts: &[Atom], query: &Atom) -> Result<bool, HybridError> {
        bump(&self.counters.entailment_checks, 1);
        let program = self.compile(&self.kb, extra_rules, extra_facts)?;
        let models = self.solve(&program)?;
        if models.is_empty() {
            return Err(HybridError::Inconsistent);
        }
        Ok(models.iter().all(|m| m.holds(query)))
    }

    /// Whether `kb ∪ {rule}` entails `example`. Uses the cached models of the
    /// KB when the rule's head predicate does not occur in it.
    pub fn covers(&self, rule: &Rule, example: &Atom) -> Result<bool, HybridError> {
        if self.mentions(&rule.head.pred) || rule.body.iter().any(|l| l.atom.pred == rule.head.pred) {
            bump(&self.counters.coverage_checks, 1);
            return self.entails(std::slice::from_ref(rule), &[], example);
        }
        self.covers_fast(rule, example)
    }

    /// Coverage through a full re-solve of `kb ∪ {rule}`.
    pub fn covers_general(&self, rule: &Rule, example: &Atom) -> Result<bool, HybridError> {
        bump(&self.counters.coverage_checks, 1);
        self.entails(std::slice::from_ref(rule), &[], example)
    }

    fn covers_fast(&self, rule: &Rule, example: &Atom) -> Result<bool, HybridError> {
        bump(&self.counters.coverage_checks, 1);
        let models = self.base_models()?;
        let mut head = Substitution::new();
        if !unify_ground(&rule.head, example, &mut head) {
            return Ok(false);
        }
        let body = translate_rule(rule).body;
        Ok(models.iter().all(|m| has_match(&body, m, &head, &|a| !m.contains(a))))
    }

    fn base_models(&self) -> Result<Arc<Vec<AtomIndex>>, HybridError> {
        self.base_models
            .get_or_init(|| {
                let program = self.compile(&self.kb, &[], &[])?;
                let models = self.solve(&program)?;
                if models.is_empty() {
                    return Err(HybridError::Inconsistent);
                }
                Ok(Arc::new(models.into_iter().map(|m| m.true_atoms.into_iter().collect()).collect()))
            })
            .clone()
    }

    fn mentions(&self, pred: &Predicate) -> bool {
        self.kb.facts().any(|a| &a.pred == pred)
            || self.kb.idb.iter().any(|r| &r.head.pred == pred || r.body.iter().any(|l| &l.atom.pred == pred))
    }

    /// Skolemizes `h` and computes what the intensional part of the KB,
    /// together with the skolemized positive body, makes certain.
    pub fn skolem_closure(&self, h: &Rule, reserved: &BTreeSet<Symbol>) -> Result<Arc<SkolemClosure>, HybridError> {
        let key = format!("{h}|{}", reserved.iter().map(|s| &**s).collect::<Vec<_>>().join(","));
        if let Some(c) = self.closures.lock().expect("closure cache poisoned").get(&key) {
            bump(&self.counters.closure_cache_hits, 1);
            return Ok(c.clone());
        }
        let (hs, subst) = skolemize(h, reserved);
        let k = self.kb.intensional();
        let facts: Vec<Atom> = hs.positive_body().cloned().collect();
        let program = self.compile(&k, &[], &facts)?;
        let models = self.solve(&program)?;
        let certain = models.split_first().map(|(first, rest)| {
            first.true_atoms.iter().filter(|a| rest.iter().all(|m| m.holds(a))).cloned().collect::<AtomIndex>()
        });
        let closure = Arc::new(SkolemClosure {
            head: hs.head.clone(),
            subst,
            certain,
            naf: hs.negative_body().cloned().collect(),
        });
        self.closures.lock().expect("closure cache poisoned").insert(key, closure.clone());
        Ok(closure)
    }

    /// `h1 ≽ h2`: some θ maps `head(h1)` onto `head(h2)σ` such that every
    /// positive literal of `body(h1)θ` is certain given `K ∪ body(h2)σ` and
    /// every NAF literal of `body(h1)θ` occurs in `body(h2)σ`.
    pub fn more_general(&self, h1: &Rule, h2: &Rule) -> Result<bool, HybridError> {
        bump(&self.counters.generality_checks, 1);
        if h1.head.pred != h2.head.pred {
            return Ok(false);
        }
        let mut reserved = self.kb.constants();
        reserved.extend(h1.constants());
        reserved.extend(h2.constants());
        let closure = self.skolem_closure(h2, &reserved)?;
        let mut theta = Substitution::new();
        if !unify_ground(&h1.head, &closure.head, &mut theta) {
            return Ok(false);
        }
        let Some(certain) = &closure.certain else {
            return Ok(true);
        };
        // NAF atoms must be bound; an unsafe h1 cannot be checked this way
        let found =
            for_each_match(&h1.body, certain, &theta, &|a| closure.naf.contains(a), &mut |_| ControlFlow::Break(()));
        Ok(found.is_break())
    }

    pub fn compare(&self, h1: &Rule, h2: &Rule) -> Result<GeneralityVerdict, HybridError> {
        Ok(GeneralityVerdict::from_pair(self.more_general(h1, h2)?, self.more_general(h2, h1)?))
    }
}

/// Rewrites each positive role atom `R(V,t)` / `R(s,V)` whose variable `V`
/// occurs exactly once in the rule into `some(inv(R))(t)` / `some(R)(s)`.
pub fn translate_rule(rule: &Rule) -> Rule {
    let mut occurrences: HashMap<&Symbol, usize> = HashMap::new();
    for a in std::iter::once(&rule.head).chain(rule.body.iter().map(|l| &l.atom)) {
        for v in a.vars() {
            *occurrences.entry(v).or_default() += 1;
        }
    }
    let lone = |t: &Term| t.as_var().is_some_and(|v| occurrences[v] == 1);
    let body = rule
        .body
        .iter()
        .map(|l| {
            if !l.positive || l.atom.pred.kind != PredKind::Role {
                return l.clone();
            }
            let (s, t) = (&l.atom.args[0], &l.atom.args[1]);
            match (lone(s), lone(t)) {
                (true, false) => Literal::pos(Atom::new(witness_concept(&l.atom.pred, true), vec![t.clone()])),
                (false, true) => Literal::pos(Atom::new(witness_concept(&l.atom.pred, false), vec![s.clone()])),
                _ => l.clone(),
            }
        })
        .collect();
    Rule::new(rule.head.clone(), body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConceptExpr, DlAxiom};

    fn t(s: &str) -> Term {
        if crate::model::is_variable_name(s) {
            Term::var(s)
        } else {
            Term::constant(s)
        }
    }

    fn a(p: &Predicate, args: &[&str]) -> Atom {
        Atom::new(p.clone(), args.iter().map(|s| t(s)).collect())
    }

    struct Ex1 {
        rich: Predicate,
        unmarried: Predicate,
        wtm: Predicate,
        loves: Predicate,
        famous: Predicate,
        scientist: Predicate,
        happy: Predicate,
        meets: Predicate,
    }

    fn preds() -> Ex1 {
        Ex1 {
            rich: Predicate::concept("RICH"),
            unmarried: Predicate::concept("UNMARRIED"),
            wtm: Predicate::role("WANTS-TO-MARRY"),
            loves: Predicate::role("LOVES"),
            famous: Predicate::datalog("famous", 1),
            scientist: Predicate::datalog("scientist", 1),
            happy: Predicate::datalog("happy", 1),
            meets: Predicate::datalog("meets", 3),
        }
    }

    fn example1() -> HybridKb {
        let p = preds();
        let mut kb = HybridKb {
            tbox: vec![
                DlAxiom::ConceptInclusion {
                    sub: ConceptExpr::And(vec![
                        ConceptExpr::Atomic(p.rich.clone()),
                        ConceptExpr::Atomic(p.unmarried.clone()),
                    ]),
                    sup: ConceptExpr::Exists { role: p.wtm.clone(), inverse: true },
                },
                DlAxiom::RoleInclusion { sub: p.wtm.clone(), sup: p.loves.clone() },
            ],
            abox: vec![a(&p.unmarried, &["Mary"]), a(&p.unmarried, &["Joe"])],
            idb: vec![
                Rule::new(
                    a(&p.rich, &["X"]),
                    vec![Literal::pos(a(&p.famous, &["X"])), Literal::naf(a(&p.scientist, &["X"]))],
                ),
                Rule::new(
                    a(&p.happy, &["X"]),
                    vec![Literal::pos(a(&p.famous, &["X"])), Literal::pos(a(&p.wtm, &["Y", "X"]))],
                ),
            ],
            edb: vec![
                a(&p.famous, &["Mary"]),
                a(&p.famous, &["Paul"]),
                a(&p.famous, &["Joe"]),
                a(&p.scientist, &["Joe"]),
                a(&p.meets, &["Mary", "Paul", "Italy"]),
                a(&p.meets, &["Mary", "Joe", "Germany"]),
                a(&p.meets, &["Joe", "Mary", "Italy"]),
            ],
            signature: Default::default(),
        };
        for pr in [p.rich, p.unmarried, p.wtm, p.loves, p.famous, p.scientist, p.happy, p.meets] {
            kb.signature.declare(pr);
        }
        kb
    }

    #[test]
    fn translation_rewrites_lone_role_argument() {
        let kb = example1();
        assert_eq!(translate_rule(&kb.idb[1]).to_string(), "happy(X) :- famous(X), some(inv(WANTS-TO-MARRY))(X).");
        assert_eq!(translate_rule(&kb.idb[0]), kb.idb[0]);
    }

    #[test]
    fn rich_is_forced_for_mary_and_paul() {
        let r = Reasoner::new(example1());
        let p = preds();
        let models = r.nm_models(&[], &[]).unwrap();
        assert!(!models.is_empty());
        for m in &models {
            assert!(m.holds(&a(&p.rich, &["Mary"])));
            assert!(m.holds(&a(&p.rich, &["Paul"])));
            assert!(!m.holds(&a(&p.rich, &["Joe"])));
        }
    }

    #[test]
    fn degenerate_kbs() {
        let p0 = Predicate::datalog("p", 0);
        let odd = Atom::new(p0, vec![]);
        let mut kb = HybridKb::default();
        kb.idb.push(Rule::new(odd.clone(), vec![Literal::naf(odd.clone())]));
        let r = Reasoner::new(kb);
        assert!(r.nm_models(&[], &[]).unwrap().is_empty());
        assert_eq!(r.entails(&[], &[], &odd), Err(HybridError::Inconsistent));

        let empty = Reasoner::new(HybridKb::default());
        assert!(!empty.entails(&[], &[], &a(&preds().famous, &["Mary"])).unwrap());
    }

    #[test]
    fn entailment_examples() {
        let r = Reasoner::new(example1());
        let p = preds();
        assert!(r.entails(&[], &[], &a(&p.famous, &["Mary"])).unwrap());
        assert!(!r.entails(&[], &[], &a(&p.happy, &["Joe"])).unwrap());
        assert!(!r.entails(&[], &[], &a(&p.happy, &["Paul"])).unwrap());
        // Mary is RICH and UNMARRIED, so some (possibly anonymous) individual wants to marry her
        assert!(r.entails(&[], &[], &a(&p.happy, &["Mary"])).unwrap());
    }

    #[test]
    fn fast_and_general_coverage_agree() {
        let r = Reasoner::new(example1());
        let p = preds();
        let loner = Predicate::concept("LONER");
        let rules = [
            Rule::new(a(&loner, &["X"]), vec![]),
            Rule::new(a(&loner, &["X"]), vec![Literal::pos(a(&p.famous, &["X"]))]),
            Rule::new(
                a(&loner, &["X"]),
                vec![Literal::pos(a(&p.famous, &["X"])), Literal::pos(a(&p.unmarried, &["X"]))],
            ),
            Rule::new(a(&loner, &["X"]), vec![Literal::pos(a(&p.famous, &["X"])), Literal::naf(a(&p.happy, &["X"]))]),
            Rule::new(
                a(&loner, &["X"]),
                vec![Literal::pos(a(&p.famous, &["X"])), Literal::pos(a(&p.loves, &["Y", "X"]))],
            ),
        ];
        for h in &rules {
            for c in ["Mary", "Joe", "Paul", "Italy"] {
                let e = a(&loner, &[c]);
                assert_eq!(r.covers(h, &e).unwrap(), r.covers_general(h, &e).unwrap(), "{h} on {e}");
            }
        }
    }

    #[test]
    fn generality_reflexive_and_ordered() {
        let r = Reasoner::new(example1());
        let p = preds();
        let loner = Predicate::concept("LONER");
        let h1 = Rule::new(a(&loner, &["X"]), vec![Literal::pos(a(&p.famous, &["X"]))]);
        let h2 = Rule::new(
            a(&loner, &["X"]),
            vec![Literal::pos(a(&p.famous, &["X"])), Literal::pos(a(&p.unmarried, &["X"]))],
        );
        assert!(r.more_general(&h1, &h1).unwrap());
        assert!(r.more_general(&h1, &h2).unwrap());
        assert!(!r.more_general(&h2, &h1).unwrap());
        assert_eq!(r.compare(&h2, &h2).unwrap(), GeneralityVerdict::Equivalent);
        assert!(r.stats().closure_cache_hits > 0);
    }
}
