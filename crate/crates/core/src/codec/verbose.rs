//! The uncompressed reference format: every viewer-visible entity dumped
//! field by field, one `path: value` line each, nothing elided.

use serde_json::{json, Value};

use super::{owner_name, visible_events};
use crate::engine::hex::Owner;
use crate::engine::{compute_score, EngineError, GameState, PlayerId};
use crate::strategy::{option_catalog, OverrideState};
use crate::tactical::compute_tactical_zones;

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::String(s) => {
            out.push_str(&format!("{prefix}: {s}\n"));
        }
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}

pub fn encode_verbose(
    state: &GameState,
    viewer: PlayerId,
    overrides: &OverrideState,
    since_event: u64,
) -> Result<String, EngineError> {
    let me = state.live_player(viewer)?;
    let mut out = String::new();
    flatten("game", &json!({ "turn": state.turn, "viewer": viewer, "config": state.config }), &mut out);
    flatten("overrides", &serde_json::to_value(overrides).expect("serializable"), &mut out);
    flatten("catalog", &serde_json::to_value(option_catalog(state, viewer)?).expect("serializable"), &mut out);

    let mine = serde_json::to_value(me).expect("serializable");
    flatten(&format!("player.{viewer}"), &mine, &mut out);
    for p in state.players.iter().filter(|p| p.id != viewer && me.has_met(p.id)) {
        let public = json!({
            "name": owner_name(state, Owner::Player(p.id)),
            "alive": p.alive,
            "score": compute_score(state, p.id).unwrap_or(0),
            "techs_known": p.techs_known,
            "policies_adopted": p.policies_adopted,
            "ideology": p.ideology,
            "culture_rate": p.culture_rate,
            "tourism_rate": p.tourism_rate,
            "relation_to_viewer": p.diplomacy[viewer as usize],
            "viewer_relation": me.diplomacy[p.id as usize],
        });
        flatten(&format!("player.{}", p.id), &public, &mut out);
    }
    for (i, t) in state.map.tiles.iter().enumerate() {
        if me.revealed.contains(i) {
            let c = state.map.coord(i);
            flatten(&format!("tile.{},{}", c.x, c.y), &serde_json::to_value(t).expect("serializable"), &mut out);
        }
    }
    for c in state.cities.values().filter(|c| c.owner == Owner::Player(viewer) || state.is_revealed(viewer, c.at)) {
        flatten(&format!("city.{}", c.id), &serde_json::to_value(c).expect("serializable"), &mut out);
    }
    for u in state.units.values().filter(|u| u.owner == viewer || state.is_visible(viewer, u.at)) {
        flatten(&format!("unit.{}", u.id), &serde_json::to_value(u).expect("serializable"), &mut out);
    }
    for z in compute_tactical_zones(state, viewer)? {
        flatten(&format!("zone.{}", z.id), &serde_json::to_value(&z).expect("serializable"), &mut out);
    }
    let (events, _) = visible_events(state, viewer, since_event);
    for e in events {
        flatten(&format!("event.{}", e.index), &serde_json::to_value(e).expect("serializable"), &mut out);
    }
    Ok(out)
}
