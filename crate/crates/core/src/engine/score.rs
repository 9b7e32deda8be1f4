use super::state::*;
use super::EngineError;
use crate::data::{tables, ScoreWeights};

/// Score inputs for one player.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScoreParts {
    pub population: i64,
    pub cities: i64,
    pub wonders: i64,
    pub military_strength: i64,
    pub policies: i64,
    pub techs: i64,
}

impl ScoreParts {
    pub fn of(state: &GameState, player: PlayerId) -> Self {
        let p = &state.players[player as usize];
        Self {
            population: state.total_population(player) as i64,
            cities: state.player_cities(player).count() as i64,
            wonders: state.wonders_owned(player) as i64,
            military_strength: state.military_strength(player),
            policies: p.policy_count() as i64,
            techs: p.techs_known.len() as i64,
        }
    }

    pub fn weighted(&self, w: &ScoreWeights) -> i64 {
        self.population * w.population
            + self.cities * w.cities
            + self.wonders * w.wonders
            + self.military_strength / w.military_divisor
            + self.policies * w.policies
            + self.techs * w.techs
    }
}

pub fn compute_score(state: &GameState, player: PlayerId) -> Result<i64, EngineError> {
    state.player(player)?;
    Ok(ScoreParts::of(state, player).weighted(&tables().rules.score))
}
