//! Core of the stratagem mini-4X: a deterministic seeded engine, the
//! flavor-weighted tactical executor, the macro-strategy surface a strategist
//! controls, and the Markdown state codec strategists read.
//!
//! The crate is synchronous and allocation-light; one [`engine::GameState`]
//! belongs to one game task at a time.

#[macro_use]
mod macros;

pub mod codec;
pub mod data;
pub mod engine;
pub mod session;
pub mod strategy;
pub mod tactical;

pub use engine::{GameConfig, GameState, VictoryKind, VictoryResult};
pub use session::Session;
