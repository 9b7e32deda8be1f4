//! The deterministic mini-4X game core.
//!
//! All randomness flows through [`GameState::rng`], so a config plus the
//! per-turn directives fully determine a game.

pub mod combat;
pub mod economy;
pub mod events;
pub mod hex;
pub mod rules;
pub mod save;
pub mod score;
pub mod setup;
pub mod state;
pub mod turn;
pub mod victory;
mod world;

pub use events::{Event, EventKind, RemovalReason, Target};
pub use hex::{Coord, HexMap, Owner, Terrain, Tile};
pub use save::{from_save_text, to_save_text};
pub use score::{compute_score, ScoreParts};
pub use setup::new_game;
pub use state::*;
pub use turn::advance_turn;
pub use victory::check_victory;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid config field {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("the game is over")]
    Terminal,
    #[error("expected {expected} directives, got {got}")]
    DirectiveCount { expected: usize, got: usize },
    #[error("unknown player {0}")]
    UnknownPlayer(u8),
    #[error("player {0} has been eliminated")]
    DeadPlayer(u8),
    #[error("save file: {0}")]
    Save(String),
}
