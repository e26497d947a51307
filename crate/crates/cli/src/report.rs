use serde::Serialize;

use orfoil::hybrid::ReasonerStats;
use orfoil::learner::{LearnedHypothesis, LearnerParams};
use orfoil::parser::serialize_rule;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub target: String,
    pub complete: bool,
    pub rules: Vec<RuleReport>,
    pub uncovered_positives: Vec<String>,
    pub params: ParamsReport,
    pub counters: Counters,
    /// Wall-clock milliseconds per phase. The only fields that vary between runs.
    pub timing_ms: Timing,
}

#[derive(Debug, Serialize)]
pub struct RuleReport {
    pub rule: String,
    pub pos_covered: usize,
    pub neg_covered: usize,
    pub confidence: f64,
}

#[derive(Debug, Serialize)]
pub struct ParamsReport {
    pub max_body_len: usize,
    pub beam_width: usize,
    pub laplace: bool,
    pub noise_tolerance: f64,
    pub jobs: usize,
}

#[derive(Debug, Serialize)]
pub struct Counters {
    pub candidates_evaluated: u64,
    pub programs_solved: u64,
    pub ground_rules: u64,
    pub models_found: u64,
    pub coverage_checks: u64,
}

#[derive(Debug, Default, Serialize)]
pub struct Timing {
    pub parse: f64,
    pub learn: f64,
    pub total: f64,
}

impl RunReport {
    pub fn new(
        target: String,
        h: &LearnedHypothesis,
        params: &LearnerParams,
        jobs: usize,
        stats: ReasonerStats,
        timing_ms: Timing,
    ) -> Self {
        RunReport {
            target,
            complete: h.is_complete(),
            rules: h
                .rules
                .iter()
                .zip(&h.per_rule_stats)
                .map(|(r, s)| RuleReport {
                    rule: serialize_rule(r),
                    pos_covered: s.pos_covered,
                    neg_covered: s.neg_covered,
                    confidence: s.confidence,
                })
                .collect(),
            uncovered_positives: h.uncovered_positives.iter().map(|a| a.to_string()).collect(),
            params: ParamsReport {
                max_body_len: params.max_body_len,
                beam_width: params.beam_width,
                laplace: params.laplace,
                noise_tolerance: params.noise_tolerance,
                jobs,
            },
            counters: Counters {
                candidates_evaluated: h.candidates_evaluated,
                programs_solved: stats.programs_solved,
                ground_rules: stats.ground_rules,
                models_found: stats.models_found,
                coverage_checks: stats.coverage_checks,
            },
            timing_ms,
        }
    }

    /// A rule file; statistics go in comments so the output parses back.
    pub fn to_text(&self) -> String {
        let mut out = format!("% target {}\n", self.target);
        for r in &self.rules {
            out.push_str(&format!(
                "% pos {} neg {} confidence {:.4}\n{}\n",
                r.pos_covered, r.neg_covered, r.confidence, r.rule
            ));
        }
        for e in &self.uncovered_positives {
            out.push_str(&format!("% uncovered {e}\n"));
        }
        out
    }
}
