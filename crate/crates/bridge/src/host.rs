//! One hosted game: the session plus the open decision episode of each
//! player. Both transports go through these calls.

use serde_json::{json, Value};

use stratagem_core::codec::ToolSchema;
use stratagem_core::engine::{EngineError, Event, PlayerId};
use stratagem_core::strategy::OptionCatalog;
use stratagem_core::Session;

use crate::tools::{call_tool, Episode, ErrorCode, ToolError, ToolRequest, ToolResponse};

#[derive(Clone, Debug, PartialEq)]
pub struct GameHost {
    pub session: Session,
    pub episodes: Vec<Episode>,
    /// Enables turn advancement from clients.
    pub test_mode: bool,
}

fn engine_error(e: EngineError) -> ToolError {
    match e {
        EngineError::Terminal => ToolError::new(ErrorCode::Terminal, e.to_string(), None),
        _ => ToolError::new(ErrorCode::UnknownPlayer, e.to_string(), Some("player")),
    }
}

impl GameHost {
    pub fn new(session: Session, test_mode: bool) -> Self {
        let episodes = (0..session.state.players.len() as PlayerId).map(Episode::new).collect();
        Self { session, episodes, test_mode }
    }

    pub fn turn(&self) -> u32 {
        self.session.state.turn
    }

    pub fn state_doc(&self, player: PlayerId) -> Result<String, ToolError> {
        self.session.document(player).map(|d| d.text).map_err(engine_error)
    }

    pub fn catalog(&self, player: PlayerId) -> Result<OptionCatalog, ToolError> {
        self.session.catalog(player).map_err(engine_error)
    }

    /// Events from index `since` on, limited to those `player` witnessed
    /// when one is given.
    pub fn events(&self, since: u64, player: Option<PlayerId>) -> Result<Vec<&Event>, ToolError> {
        if let Some(p) = player {
            self.session.state.player(p).map_err(engine_error)?;
        }
        Ok(self
            .session
            .state
            .event_log
            .iter()
            .filter(|e| e.index >= since && player.map_or(true, |p| e.witnessed_by(p)))
            .collect())
    }

    pub fn list_tools(&self, player: PlayerId) -> Result<Vec<ToolSchema>, ToolError> {
        let ep = self.episodes.get(player as usize).ok_or_else(|| engine_error(EngineError::UnknownPlayer(player)))?;
        Ok(ep.list_tools())
    }

    pub fn call_tool(&mut self, player: PlayerId, req: &ToolRequest) -> ToolResponse {
        if self.session.is_terminal() {
            return ToolResponse::failure(engine_error(EngineError::Terminal));
        }
        let Some(ep) = self.episodes.get_mut(player as usize) else {
            return ToolResponse::failure(engine_error(EngineError::UnknownPlayer(player)));
        };
        call_tool(&mut self.session, ep, req)
    }

    /// True once every live, externally controlled player has closed
    /// this turn's episode.
    pub fn decisions_closed(&self) -> bool {
        let s = &self.session;
        self.episodes.iter().all(|ep| {
            let p = ep.player as usize;
            ep.closed || !s.external[p] || !s.state.players[p].alive
        })
    }

    /// Plays one turn and opens a fresh episode for every player.
    pub fn advance(&mut self) -> Result<Value, ToolError> {
        let events = self.session.advance().map_err(engine_error)?;
        for ep in &mut self.episodes {
            *ep = Episode::new(ep.player);
        }
        Ok(json!({ "turn": self.turn(), "events": events.len(), "terminal": self.session.is_terminal() }))
    }
}
