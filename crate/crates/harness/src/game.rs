//! Plays one game: builtin AI for every seat except player 0, which
//! follows the condition's strategist.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde_json::{json, Value};

use stratagem_core::engine::{compute_score, Event, EventKind, EngineError};
use stratagem_core::strategy::{Persona, PersonaParam, StrategySet};
use stratagem_core::{GameConfig, Session};
use stratagem_strategist::{
    run_decision_episode, EpisodeConfig, LlmConfig, LlmStrategist, RandomStrategist, ScriptedStrategist, Strategist,
};

use crate::config::{Condition, FaultPlan, StrategistKind};
use crate::fault::FaultInjector;
use crate::record::{gap_exclusion, ChangeEvent, EpisodeSummary, Exclusion, GameOutcome, GameRecord, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("llm condition needs an endpoint: set url/model or {} and {}", stratagem_strategist::llm::URL_ENV, stratagem_strategist::llm::MODEL_ENV)]
    MissingEndpoint,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Record(#[from] crate::record::RecordError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

/// A finished game with everything needed to persist or replay it.
#[derive(Debug, Clone)]
pub struct GameRun {
    pub record: GameRecord,
    pub events: Vec<Event>,
    /// One entry per decision episode.
    pub transcript: Vec<Value>,
}

/// Builds player 0's strategist for a condition; `None` for builtin.
pub fn make_strategist(kind: &StrategistKind, seed: u64, config: &GameConfig) -> Result<Option<Box<dyn Strategist>>, HarnessError> {
    Ok(match kind {
        StrategistKind::Builtin => None,
        StrategistKind::Script { script } => Some(Box::new(ScriptedStrategist::new(script.clone()))),
        StrategistKind::Mock { seed: s } => Some(Box::new(RandomStrategist::new(s ^ seed.rotate_left(17)))),
        StrategistKind::Llm { url, model } => {
            let env = LlmConfig::from_env();
            let url = url.clone().or_else(|| env.as_ref().map(|e| e.url.clone())).ok_or(HarnessError::MissingEndpoint)?;
            let model = model.clone().or_else(|| env.as_ref().map(|e| e.model.clone())).ok_or(HarnessError::MissingEndpoint)?;
            let state = stratagem_core::engine::new_game(config.clone())?;
            let prompt = stratagem_strategist::system_prompt(&state, 0);
            Some(Box::new(LlmStrategist::new(LlmConfig::new(&url, &model), prompt)))
        }
    })
}

/// Plays `condition` on `config`, wrapping the strategist in a fault
/// injector when a plan is given.
pub fn run_game(
    condition: &Condition,
    config: &GameConfig,
    episode: &EpisodeConfig,
    fault: Option<FaultPlan>,
) -> Result<GameRun, HarnessError> {
    let strategist = make_strategist(&condition.kind, config.seed, config)?;
    let strategist = match (strategist, fault) {
        (Some(s), Some(plan)) => Some(Box::new(FaultInjector::new(s, plan, config.seed)) as Box<dyn Strategist>),
        (s, _) => s,
    };
    play(condition, config, episode, fault, strategist)
}

fn strategy_key(s: &StrategySet) -> (String, Vec<String>, Vec<String>) {
    (
        s.grand.name().to_string(),
        s.economic.iter().map(|e| e.name().to_string()).collect(),
        s.military.iter().map(|m| m.name().to_string()).collect(),
    )
}

fn persona_diff(a: &Persona, b: &Persona) -> BTreeMap<String, i64> {
    PersonaParam::ALL.iter().filter(|p| a.get(**p) != b.get(**p)).map(|p| (p.name().to_string(), b.get(*p) as i64)).collect()
}

/// Plays a game with an explicit strategist for player 0. `condition`
/// and `fault` are only recorded.
pub fn play(
    condition: &Condition,
    config: &GameConfig,
    episode: &EpisodeConfig,
    fault: Option<FaultPlan>,
    mut strategist: Option<Box<dyn Strategist>>,
) -> Result<GameRun, HarnessError> {
    let mut s = Session::new(config.clone())?;
    if strategist.is_some() {
        s.attach_external(0)?;
    }
    let n = s.state.players.len();
    let mut peak: Vec<i64> = (0..n).map(|p| compute_score(&s.state, p as u8)).collect::<Result<_, _>>()?;
    let mut survived = vec![0u32; n];
    let mut grand_by_turn = Vec::new();
    let mut changes = Vec::new();
    let mut episodes = Vec::new();
    let mut transcript = Vec::new();
    let mut prev_set = strategy_key(&s.state.players[0].strategy);
    let mut prev_persona = s.state.players[0].persona;
    let mut episode_no = 0u64;
    let mut played = 0u32;

    while !s.is_terminal() {
        let turn = s.state.turn;
        let alive: Vec<bool> = s.state.players.iter().map(|p| p.alive).collect();
        if alive[0] {
            if let Some(st) = strategist.as_mut() {
                let rec = run_decision_episode(&mut s, 0, st, episode, episode_no);
                episode_no += 1;
                episodes.push(EpisodeSummary {
                    turn,
                    outcome: rec.outcome,
                    rounds: rec.rounds,
                    tool_calls: rec.tool_calls.len() as u32,
                    input_tokens: rec.input_tokens,
                    output_tokens: rec.output_tokens,
                    latency_ms: rec.latency_ms,
                });
                transcript.push(json!({ "decision": rec, "messages": st.transcript() }));
            }
        }
        s.advance()?;
        played += 1;
        for (p, a) in alive.iter().enumerate() {
            if *a {
                survived[p] += 1;
            }
            peak[p] = peak[p].max(compute_score(&s.state, p as u8)?);
        }
        if alive[0] {
            let p0 = &s.state.players[0];
            grand_by_turn.push(p0.strategy.grand.name().to_string());
            let set = strategy_key(&p0.strategy);
            if set != prev_set {
                changes.push(ChangeEvent::Strategy { turn, grand: set.0.clone(), economic: set.1.clone(), military: set.2.clone() });
                prev_set = set;
            }
            let diff = persona_diff(&prev_persona, &p0.persona);
            if !diff.is_empty() {
                changes.push(ChangeEvent::Persona { turn, changed: diff });
                prev_persona = p0.persona;
            }
        }
    }

    let st = &s.state;
    let victory = st.victory.map(|v| (v.kind, v.winner));
    let outcome = match (&st.players[0], victory) {
        (p, v) if !p.alive => GameOutcome::Player0Eliminated { turn: p.eliminated_turn.unwrap_or(st.turn), victory: v },
        (_, Some((kind, winner))) => GameOutcome::Victory { kind, winner },
        (_, None) => GameOutcome::DrawByTime,
    };
    let policies = st
        .event_log
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::PolicyAdopted { player: 0, policy } => Some(policy.name().to_string()),
            _ => None,
        })
        .collect();
    let record = GameRecord {
        schema: SCHEMA_VERSION,
        condition: condition.name.clone(),
        strategist: condition.kind.clone(),
        fault,
        seed: config.seed,
        config: config.clone(),
        archetypes: (0..n).map(|p| st.archetype_name(p as u8).to_string()).collect(),
        outcome,
        game_length: played,
        survived_turns: survived,
        final_scores: (0..n).map(|p| compute_score(st, p as u8)).collect::<Result<_, _>>()?,
        peak_scores: peak,
        grand_by_turn,
        changes,
        policies,
        ideology: st.players[0].ideology.map(|i| i.name().to_string()),
        exclusion: gap_exclusion(&episodes),
        episodes,
    };
    Ok(GameRun { record, events: s.state.event_log, transcript })
}

/// A placeholder record for a game that could not finish.
pub fn crash_record(condition: &Condition, config: &GameConfig, fault: Option<FaultPlan>, reason: String) -> GameRecord {
    GameRecord {
        schema: SCHEMA_VERSION,
        condition: condition.name.clone(),
        strategist: condition.kind.clone(),
        fault,
        seed: config.seed,
        config: config.clone(),
        archetypes: Vec::new(),
        outcome: GameOutcome::DrawByTime,
        game_length: 0,
        survived_turns: Vec::new(),
        final_scores: Vec::new(),
        peak_scores: Vec::new(),
        grand_by_turn: Vec::new(),
        changes: Vec::new(),
        policies: Vec::new(),
        ideology: None,
        episodes: Vec::new(),
        exclusion: Exclusion::Crash { reason },
    }
}

/// Runs `f`, turning errors and panics into a crash record.
pub fn guarded(
    condition: &Condition,
    config: &GameConfig,
    fault: Option<FaultPlan>,
    f: impl FnOnce() -> Result<GameRun, HarnessError>,
) -> GameRun {
    let reason = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(run)) => return run,
        Ok(Err(e)) => e.to_string(),
        Err(panic) => panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .map_or("panic".to_string(), |m| format!("panic: {m}")),
    };
    GameRun { record: crash_record(condition, config, fault, reason), events: Vec::new(), transcript: Vec::new() }
}

/// Plays the game a record describes again.
pub fn replay(record: &GameRecord, episode: &EpisodeConfig) -> Result<GameRun, HarnessError> {
    let condition = Condition { name: record.condition.clone(), kind: record.strategist.clone() };
    run_game(&condition, &record.config, episode, record.fault)
}

/// The event log as text, one event per line.
pub fn event_log_text(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        let body = serde_json::to_value(&e.kind).expect("events serialize");
        out.push_str(&format!("T{} #{} {} {}\n", e.turn, e.index, e.kind.name(), body));
    }
    out
}
