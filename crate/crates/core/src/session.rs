//! A running game plus the per-player override queues and the record of
//! who wrote each decision category on each turn.

use serde::{Deserialize, Serialize};

use crate::codec::{encode_state, MarkdownDoc};
use crate::data::tables;
use crate::engine::{advance_turn, new_game, EngineError, Event, GameConfig, GameState, PlayerId};
use crate::strategy::{
    apply_strategy_set, option_catalog, queue_override, Category, ChoiceError, OptionCatalog, Override, OverrideState,
    StrategyDirectives, Writer,
};
use crate::tactical::builtin_macro_decide;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Choice(#[from] ChoiceError),
}

/// Which side produced one category's active value for one player-turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriterRecord {
    pub turn: u32,
    pub player: PlayerId,
    pub category: Category,
    pub writer: Writer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub state: GameState,
    pub overrides: Vec<OverrideState>,
    /// Players driven by an external strategist.
    pub external: Vec<bool>,
    /// First event index not yet shown to each player.
    pub seen: Vec<u64>,
    pub writers: Vec<WriterRecord>,
}

impl Session {
    pub fn new(config: GameConfig) -> Result<Self, EngineError> {
        Ok(Self::from_state(new_game(config)?))
    }

    pub fn from_state(state: GameState) -> Self {
        let overrides = state.players.iter().map(|p| OverrideState::new(p.strategy.clone(), p.persona)).collect();
        let n = state.players.len();
        Self { state, overrides, external: vec![false; n], seen: vec![0; n], writers: Vec::new() }
    }

    /// Hands a player's strategy and persona to an external strategist.
    /// Research and policy become external only while a queued choice waits.
    pub fn attach_external(&mut self, player: PlayerId) -> Result<(), EngineError> {
        self.state.player(player)?;
        let o = &mut self.overrides[player as usize];
        o.controlled.strategy = true;
        o.controlled.persona = true;
        self.external[player as usize] = true;
        Ok(())
    }

    pub fn catalog(&self, player: PlayerId) -> Result<OptionCatalog, EngineError> {
        option_catalog(&self.state, player)
    }

    /// Validates and queues a decision. On error nothing changes.
    pub fn apply_override(&mut self, player: PlayerId, choice: &Override, rationale: &str) -> Result<(), SessionError> {
        self.state.live_player(player)?;
        let catalog = option_catalog(&self.state, player)?;
        let next = queue_override(choice, rationale, &self.overrides[player as usize], &catalog)?;
        self.overrides[player as usize] = next;
        Ok(())
    }

    /// The state document for `player`, covering events since its last
    /// document. Does not advance the watermark; see [`Session::mark_seen`].
    pub fn document(&self, player: PlayerId) -> Result<MarkdownDoc, EngineError> {
        self.state.live_player(player)?;
        encode_state(&self.state, player, &self.overrides[player as usize], self.seen[player as usize])
    }

    pub fn mark_seen(&mut self, player: PlayerId) {
        let Some(seen) = self.seen.get_mut(player as usize) else { return };
        *seen = self.state.event_log.last().map_or(0, |e| e.index + 1);
    }

    /// Resolves every category for every player: the override when
    /// controlled, otherwise the builtin decision.
    pub fn directives(&self) -> Vec<StrategyDirectives> {
        self.state
            .players
            .iter()
            .map(|ps| {
                let p = ps.id;
                let o = &self.overrides[p as usize];
                let b = if ps.alive { Some(builtin_macro_decide(&self.state, p)) } else { None };
                let strategy = match (&b, o.controlled.strategy) {
                    (Some(b), false) => b.strategy.clone(),
                    (Some(b), true) => {
                        let mut s = o.strategy.clone();
                        if o.builtin_lists.economic {
                            s.economic = b.strategy.economic.clone();
                        }
                        if o.builtin_lists.military {
                            s.military = b.strategy.military.clone();
                        }
                        s
                    }
                    (None, _) => o.strategy.clone(),
                };
                let persona = if o.controlled.persona { o.persona } else { ps.persona };
                let next_research =
                    if o.controlled.research { o.next_research } else { b.as_ref().and_then(|b| b.research) };
                let next_policy = if o.controlled.policy { o.next_policy } else { b.as_ref().and_then(|b| b.policy) };
                let base = tables().archetypes[ps.archetype].flavors;
                StrategyDirectives {
                    flavors: apply_strategy_set(&strategy, &base),
                    strategy,
                    next_research,
                    next_policy,
                    persona,
                }
            })
            .collect()
    }

    /// Plays one turn and releases research/policy control once the
    /// queued choice has been consumed.
    pub fn advance(&mut self) -> Result<Vec<Event>, EngineError> {
        let directives = self.directives();
        let turn = self.state.turn;
        for ps in self.state.players.iter().filter(|p| p.alive) {
            let o = &self.overrides[ps.id as usize];
            for c in Category::ALL {
                self.writers.push(WriterRecord { turn, player: ps.id, category: *c, writer: o.writer(*c) });
            }
        }
        let events = advance_turn(&mut self.state, &directives)?;
        for (o, ps) in self.overrides.iter_mut().zip(&self.state.players) {
            if o.controlled.research && ps.next_research.is_none() {
                o.controlled.research = false;
                o.next_research = None;
            }
            if o.controlled.policy && ps.next_policy.is_none() {
                o.controlled.policy = false;
                o.next_policy = None;
            }
            if !o.controlled.strategy {
                o.strategy = ps.strategy.clone();
            } else {
                if o.builtin_lists.economic {
                    o.strategy.economic = ps.strategy.economic.clone();
                }
                if o.builtin_lists.military {
                    o.strategy.military = ps.strategy.military.clone();
                }
            }
            if !o.controlled.persona {
                o.persona = ps.persona;
            }
        }
        Ok(events)
    }

    pub fn is_terminal(&self) -> bool {
        self.state.is_terminal()
    }
}
