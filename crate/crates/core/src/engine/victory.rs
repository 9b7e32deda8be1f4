use super::hex::Owner;
use super::rules::SPACESHIP_PARTS_NEEDED;
use super::score::compute_score;
use super::state::*;

/// Original capitals a player must hold for a domination win.
pub fn capitals_needed(state: &GameState) -> usize {
    state.players.len()
}

pub fn capitals_held(state: &GameState, player: PlayerId) -> usize {
    state.original_capitals().filter(|c| c.owner == Owner::Player(player)).count()
}

/// True when cumulative tourism sent to every other live player exceeds
/// that player's cumulative culture.
pub fn is_culturally_dominant(state: &GameState, player: PlayerId) -> bool {
    let p = &state.players[player as usize];
    let mut rivals = state.players.iter().filter(|o| o.alive && o.id != player).peekable();
    rivals.peek().is_some() && rivals.all(|o| p.tourism_to[o.id as usize] > o.culture_total)
}

pub fn influential_over(state: &GameState, player: PlayerId) -> usize {
    let p = &state.players[player as usize];
    state
        .players
        .iter()
        .filter(|o| o.alive && o.id != player && p.tourism_to[o.id as usize] > o.culture_total)
        .count()
}

/// The first satisfied victory in precedence order
/// Domination > Science > Cultural > Diplomatic > Time, lowest player id first.
pub fn check_victory(state: &GameState) -> Option<VictoryResult> {
    if let Some(v) = state.victory {
        return Some(v);
    }
    let cfg = &state.config;
    let live = || state.players.iter().filter(|p| p.alive).map(|p| p.id);
    let win = |winner, kind| Some(VictoryResult { winner, kind, turn: state.turn });

    if cfg.enabled(VictoryKind::Domination) {
        let need = capitals_needed(state);
        if let Some(p) = live().find(|p| capitals_held(state, *p) >= need) {
            return win(p, VictoryKind::Domination);
        }
    }
    if cfg.enabled(VictoryKind::Science) {
        if let Some(p) = live().find(|p| state.players[*p as usize].spaceship_parts >= SPACESHIP_PARTS_NEEDED) {
            return win(p, VictoryKind::Science);
        }
    }
    if cfg.enabled(VictoryKind::Cultural) {
        if let Some(p) = live().find(|p| is_culturally_dominant(state, *p)) {
            return win(p, VictoryKind::Cultural);
        }
    }
    if cfg.enabled(VictoryKind::Diplomatic) {
        if let Some(p) = state.world_leader.filter(|p| state.players[*p as usize].alive) {
            return win(p, VictoryKind::Diplomatic);
        }
    }
    if cfg.enabled(VictoryKind::Time) && state.turn >= cfg.max_turns {
        let best = live().max_by_key(|p| (compute_score(state, *p).unwrap_or(0), std::cmp::Reverse(*p)))?;
        return win(best, VictoryKind::Time);
    }
    None
}
