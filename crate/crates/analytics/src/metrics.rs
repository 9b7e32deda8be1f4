//! Per-condition summary metrics over included game records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use stratagem_harness::{GameOutcome, GameRecord};

use crate::error::AnalyticsError;
use crate::regression::fit_polynomial;

/// Which scores the score ratio compares.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreTiming {
    /// Each player's highest score over the game.
    #[default]
    Peak,
    /// Scores on the last turn.
    Final,
}

/// Player 0's score over the best score among all players.
pub fn score_ratio(r: &GameRecord, timing: ScoreTiming) -> f64 {
    let scores = match timing {
        ScoreTiming::Peak => &r.peak_scores,
        ScoreTiming::Final => &r.final_scores,
    };
    let best = scores.iter().copied().max().unwrap_or(0);
    if best <= 0 {
        return 0.0;
    }
    scores[0].max(0) as f64 / best as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    /// Normal-approximation 95% interval, clipped to [0, 1].
    pub fn new(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        let z = Normal::standard().inverse_cdf(0.975);
        let half = z * (p * (1.0 - p) / n as f64).sqrt();
        Self { value: p, lo: (p - half).max(0.0), hi: (p + half).min(1.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenCurve {
    /// Mean tokens per episode for each turn that had episodes.
    pub points: Vec<(u32, f64, f64)>,
    /// Input tokens against turn: [intercept, slope].
    pub linear: Option<Vec<f64>>,
    /// [intercept, x, x^2].
    pub quadratic: Option<Vec<f64>>,
    pub quadratic_significant: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionMetrics {
    pub games: usize,
    pub wins: usize,
    pub win_rate: Proportion,
    pub score_ratio: f64,
    /// Share of games player 0 was still alive at the end.
    pub survival_rate: f64,
    pub mean_length: f64,
    /// Share of games by victory kind; "None" for games nobody won.
    pub victories: BTreeMap<String, f64>,
    /// Share of player 0's survived turns each grand strategy was active.
    pub adoption: BTreeMap<String, f64>,
    /// Changes per 100 survived turns.
    pub strategy_change_rate: f64,
    pub persona_change_rate: f64,
    pub ideology: BTreeMap<String, f64>,
    pub tokens: TokenCurve,
    /// Player 0's policy sequence per seed.
    pub policies: Vec<(u64, Vec<String>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub score_timing: ScoreTiming,
    pub excluded: usize,
    pub conditions: BTreeMap<String, ConditionMetrics>,
}

fn shares(counts: BTreeMap<String, usize>, total: usize) -> BTreeMap<String, f64> {
    counts.into_iter().map(|(k, v)| (k, v as f64 / total as f64)).collect()
}

fn token_curve(records: &[&GameRecord]) -> TokenCurve {
    let mut by_turn: BTreeMap<u32, (f64, f64, usize)> = BTreeMap::new();
    for r in records {
        for e in &r.episodes {
            let s = by_turn.entry(e.turn).or_default();
            s.0 += e.input_tokens as f64;
            s.1 += e.output_tokens as f64;
            s.2 += 1;
        }
    }
    let points: Vec<(u32, f64, f64)> = by_turn.into_iter().map(|(t, (i, o, n))| (t, i / n as f64, o / n as f64)).collect();
    let x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let linear = fit_polynomial(&x, &y, 1).ok().map(|f| f.fit.coefficients);
    let quad = fit_polynomial(&x, &y, 2).ok();
    TokenCurve {
        points,
        linear,
        quadratic_significant: quad.as_ref().and_then(|q| q.quadratic_significant),
        quadratic: quad.map(|q| q.fit.coefficients),
    }
}

fn condition_metrics(rs: &[&GameRecord], timing: ScoreTiming) -> ConditionMetrics {
    let n = rs.len();
    let wins = rs.iter().filter(|r| r.outcome.player0_won()).count();
    let survived: u64 = rs.iter().map(|r| r.survived_turns[0] as u64).sum();
    let mut victories = BTreeMap::new();
    let mut adoption = BTreeMap::new();
    let mut ideology = BTreeMap::new();
    for r in rs {
        let v = r.outcome.victory().map_or("None".to_string(), |(k, _)| k.to_string());
        *victories.entry(v).or_insert(0) += 1;
        for g in &r.grand_by_turn {
            *adoption.entry(g.clone()).or_insert(0) += 1;
        }
        *ideology.entry(r.ideology.clone().unwrap_or("None".into())).or_insert(0) += 1;
    }
    let per100 = |c: usize| if survived == 0 { 0.0 } else { 100.0 * c as f64 / survived as f64 };
    ConditionMetrics {
        games: n,
        wins,
        win_rate: Proportion::new(wins, n),
        score_ratio: rs.iter().map(|r| score_ratio(r, timing)).sum::<f64>() / n as f64,
        survival_rate: rs.iter().filter(|r| !matches!(r.outcome, GameOutcome::Player0Eliminated { .. })).count() as f64 / n as f64,
        mean_length: rs.iter().map(|r| r.game_length as f64).sum::<f64>() / n as f64,
        victories: shares(victories, n),
        adoption: shares(adoption, survived as usize),
        strategy_change_rate: per100(rs.iter().map(|r| r.strategy_changes()).sum()),
        persona_change_rate: per100(rs.iter().map(|r| r.persona_changes()).sum()),
        ideology: shares(ideology, n),
        tokens: token_curve(rs),
        policies: rs.iter().map(|r| (r.seed, r.policies.clone())).collect(),
    }
}

/// Metrics per condition. Excluded records are dropped before anything
/// is computed.
pub fn compute_metrics(records: &[GameRecord], timing: ScoreTiming) -> Result<MetricsSummary, AnalyticsError> {
    let included: Vec<&GameRecord> = records.iter().filter(|r| !r.exclusion.is_excluded()).collect();
    if included.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let mut groups: BTreeMap<String, Vec<&GameRecord>> = BTreeMap::new();
    for r in &included {
        groups.entry(r.condition.clone()).or_default().push(r);
    }
    for g in groups.values_mut() {
        g.sort_by_key(|r| r.seed);
    }
    Ok(MetricsSummary {
        score_timing: timing,
        excluded: records.len() - included.len(),
        conditions: groups.into_iter().map(|(k, v)| (k, condition_metrics(&v, timing))).collect(),
    })
}
