//! Sequential covering with information-gain specialization.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rayon::prelude::*;
use thiserror::Error;

use crate::hybrid::{HybridError, Reasoner};
use crate::model::{Atom, ExampleSet, Rule};
use crate::refine::HypothesisSpace;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error(transparent)]
    Reasoner(#[from] HybridError),
    #[error("examples are for `{examples}` but the hypothesis space targets `{space}`")]
    TargetMismatch { examples: String, space: String },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerParams {
    pub max_body_len: usize,
    pub beam_width: usize,
    pub laplace: bool,
    /// Largest tolerated fraction of covered examples that are negative.
    pub noise_tolerance: f64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams { max_body_len: 5, beam_width: 1, laplace: true, noise_tolerance: 0.0 }
    }
}

impl LearnerParams {
    fn validate(&self) -> Result<(), LearnError> {
        if self.max_body_len == 0 || self.beam_width == 0 {
            return Err(LearnError::InvalidParams("max_body_len and beam_width must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_tolerance) {
            return Err(LearnError::InvalidParams(format!("noise tolerance {} outside [0,1]", self.noise_tolerance)));
        }
        Ok(())
    }
}

pub fn confidence(pos: usize, neg: usize, laplace: bool) -> f64 {
    if laplace {
        (pos as f64 + 1.0) / ((pos + neg) as f64 + 2.0)
    } else if pos + neg == 0 {
        0.0
    } else {
        pos as f64 / (pos + neg) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverageStats {
    pub pos_covered: usize,
    pub neg_covered: usize,
    pub confidence: f64,
}

/// Which examples a rule covers, by position in the example lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub pos: Vec<bool>,
    pub neg: Vec<bool>,
}

impl Coverage {
    pub fn pos_count(&self) -> usize {
        self.pos.iter().filter(|c| **c).count()
    }

    pub fn neg_count(&self) -> usize {
        self.neg.iter().filter(|c| **c).count()
    }

    pub fn stats(&self, laplace: bool) -> CoverageStats {
        let (p, n) = (self.pos_count(), self.neg_count());
        CoverageStats { pos_covered: p, neg_covered: n, confidence: confidence(p, n, laplace) }
    }
}

/// `p · (log2 cf(new) − log2 cf(old))`, `p` counting positives covered by both.
/// A zero confidence gives `-∞`.
pub fn gain(new: &Coverage, old: &Coverage, laplace: bool) -> f64 {
    let p = new.pos.iter().zip(&old.pos).filter(|(a, b)| **a && **b).count();
    if p == 0 {
        return 0.0;
    }
    let g = p as f64 * (new.stats(laplace).confidence.log2() - old.stats(laplace).confidence.log2());
    if g.is_nan() {
        f64::NEG_INFINITY
    } else {
        g
    }
}

/// A scored candidate; sorts best first.
#[derive(Clone, Debug)]
pub struct Scored {
    pub rule: Rule,
    pub coverage: Coverage,
    pub gain: f64,
    text: String,
}

impl Scored {
    pub fn new(rule: Rule, coverage: Coverage, parent: &Coverage, laplace: bool) -> Self {
        let gain = gain(&coverage, parent, laplace);
        let text = rule.to_string();
        Scored { rule, coverage, gain, text }
    }
}

/// Gain descending, then positives covered descending, then fewer body
/// literals, then serialization.
pub fn rank(a: &Scored, b: &Scored) -> Ordering {
    b.gain
        .total_cmp(&a.gain)
        .then_with(|| b.coverage.pos_count().cmp(&a.coverage.pos_count()))
        .then_with(|| a.rule.body.len().cmp(&b.rule.body.len()))
        .then_with(|| a.text.cmp(&b.text))
}

/// Order for the first step out of the seed, which only makes the rule safe:
/// keep as many positives as possible, then as for [`rank`].
pub fn rank_from_seed(a: &Scored, b: &Scored) -> Ordering {
    b.coverage.pos_count().cmp(&a.coverage.pos_count()).then_with(|| rank(a, b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnedHypothesis {
    pub rules: Vec<Rule>,
    /// Coverage of each rule over the full example set.
    pub per_rule_stats: Vec<CoverageStats>,
    pub uncovered_positives: Vec<Atom>,
    pub candidates_evaluated: u64,
}

impl LearnedHypothesis {
    pub fn is_complete(&self) -> bool {
        self.uncovered_positives.is_empty()
    }
}

pub struct Learner<'a> {
    reasoner: &'a Reasoner,
    space: &'a HypothesisSpace,
    params: LearnerParams,
    evaluated: AtomicU64,
}

impl<'a> Learner<'a> {
    pub fn new(reasoner: &'a Reasoner, space: &'a HypothesisSpace, params: LearnerParams) -> Self {
        Learner { reasoner, space, params, evaluated: AtomicU64::new(0) }
    }

    pub fn coverage(&self, h: &Rule, pos: &[Atom], neg: &[Atom]) -> Result<Coverage, HybridError> {
        self.evaluated.fetch_add(1, AtomicOrdering::Relaxed);
        let check = |es: &[Atom]| es.iter().map(|e| self.reasoner.covers(h, e)).collect::<Result<Vec<_>, _>>();
        Ok(Coverage { pos: check(pos)?, neg: check(neg)? })
    }

    fn score_all(
        &self,
        children: Vec<Rule>,
        parent: &Coverage,
        pos: &[Atom],
        neg: &[Atom],
    ) -> Result<Vec<Scored>, HybridError> {
        let laplace = self.params.laplace;
        children
            .into_par_iter()
            .map(|c| self.coverage(&c, pos, neg).map(|cov| Scored::new(c, cov, parent, laplace)))
            .collect()
    }

    /// The gain-maximizing candidate.
    pub fn choose_best(
        &self,
        candidates: &[Rule],
        current: &Rule,
        examples: &ExampleSet,
    ) -> Result<Option<Rule>, HybridError> {
        let parent = self.coverage(current, &examples.positives, &examples.negatives)?;
        let mut scored = self.score_all(candidates.to_vec(), &parent, &examples.positives, &examples.negatives)?;
        let order = if self.space.in_language(current) { rank } else { rank_from_seed };
        scored.sort_by(order);
        Ok(scored.into_iter().next().map(|s| s.rule))
    }

    fn acceptable(&self, c: &Coverage) -> bool {
        let (p, n) = (c.pos_count(), c.neg_count());
        n as f64 <= self.params.noise_tolerance * (p + n) as f64
    }

    /// Inner loop: specialize from the seed until a rule in the language
    /// covers no more negatives than tolerated. `None` when the search stalls.
    fn learn_rule(&self, pos: &[Atom], neg: &[Atom]) -> Result<Option<Scored>, HybridError> {
        let seed = self.space.seed_rule();
        let seed_cov = self.coverage(&seed, pos, neg)?;
        let mut beam = vec![Scored::new(seed, seed_cov.clone(), &seed_cov, self.params.laplace)];
        loop {
            let done = beam.iter().find(|s| self.space.in_language(&s.rule) && self.acceptable(&s.coverage));
            if let Some(s) = done {
                return Ok(Some(s.clone()));
            }
            let mut seen = HashSet::new();
            let mut next: Vec<Scored> = Vec::new();
            for parent in &beam {
                if parent.rule.body.len() >= self.params.max_body_len {
                    continue;
                }
                let children: Vec<Rule> = self
                    .space
                    .refine(&parent.rule)
                    .into_iter()
                    .map(|(c, _)| c)
                    .filter(|c| seen.insert(c.canonical_key()))
                    .collect();
                let in_lang = self.space.in_language(&parent.rule);
                let parent_neg = parent.coverage.neg_count();
                let mut scored = self.score_all(children, &parent.coverage, pos, neg)?;
                // from outside the language any step is taken; inside it must shed negatives
                scored.sort_by(if in_lang { rank } else { rank_from_seed });
                next.extend(
                    scored
                        .into_iter()
                        .take(self.params.beam_width)
                        .filter(|s| !in_lang || s.coverage.neg_count() < parent_neg),
                );
            }
            if next.is_empty() {
                return Ok(None);
            }
            next.sort_by(if beam.iter().all(|s| self.space.in_language(&s.rule)) { rank } else { rank_from_seed });
            next.truncate(self.params.beam_width);
            beam = next;
        }
    }

    /// Learns rules one at a time, removing the positives each one covers.
    pub fn learn(&self, examples: &ExampleSet) -> Result<LearnedHypothesis, LearnError> {
        self.params.validate()?;
        if examples.target != self.space.target {
            return Err(LearnError::TargetMismatch {
                examples: examples.target.to_string(),
                space: self.space.target.to_string(),
            });
        }
        let mut rules = Vec::new();
        let mut remaining: Vec<Atom> = examples.positives.clone();
        while !remaining.is_empty() {
            let Some(best) = self.learn_rule(&remaining, &examples.negatives)? else { break };
            if best.coverage.pos_count() == 0 {
                break;
            }
            remaining = remaining.into_iter().zip(&best.coverage.pos).filter(|(_, c)| !**c).map(|(e, _)| e).collect();
            rules.push(best.rule);
        }
        let per_rule_stats = rules
            .iter()
            .map(|r| Ok(self.coverage(r, &examples.positives, &examples.negatives)?.stats(self.params.laplace)))
            .collect::<Result<Vec<_>, HybridError>>()?;
        Ok(LearnedHypothesis {
            rules,
            per_rule_stats,
            uncovered_positives: remaining,
            candidates_evaluated: self.evaluated.load(AtomicOrdering::Relaxed),
        })
    }
}

/// Convenience wrapper around [`Learner::learn`].
pub fn learn(
    reasoner: &Reasoner,
    space: &HypothesisSpace,
    examples: &ExampleSet,
    params: LearnerParams,
) -> Result<LearnedHypothesis, LearnError> {
    Learner::new(reasoner, space, params).learn(examples)
}
