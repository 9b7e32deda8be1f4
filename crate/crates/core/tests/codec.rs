use std::collections::BTreeSet;

use proptest::prelude::*;

use stratagem_core::codec::{
    encode_events, encode_state, encode_verbose, estimate_tokens, player_name, tool_schemas, visible_events,
    MarkdownDoc, EVENT_TURNS, SECTIONS, TOOLS_JSON,
};
use stratagem_core::engine::rules::UnitKind;
use stratagem_core::engine::{new_game, Event, EventKind, GameConfig, GameState, Owner, PlayerId};
use stratagem_core::strategy::OverrideState;
use stratagem_core::Session;

fn fresh(seed: u64) -> GameState {
    new_game(GameConfig::with_seed(seed)).unwrap()
}

fn plain(state: &GameState, p: PlayerId) -> OverrideState {
    let ps = &state.players[p as usize];
    OverrideState::new(ps.strategy.clone(), ps.persona)
}

fn doc(state: &GameState, p: PlayerId) -> MarkdownDoc {
    encode_state(state, p, &plain(state, p), 0).unwrap()
}

fn played(seed: u64, turns: u32) -> Session {
    let mut s = Session::new(GameConfig::with_seed(seed)).unwrap();
    for _ in 0..turns {
        if s.is_terminal() {
            break;
        }
        s.advance().unwrap();
    }
    s
}

/// Checks that nothing outside the viewer's sight leaks into its document.
fn audit(state: &GameState, viewer: PlayerId, d: &MarkdownDoc) {
    let me = &state.players[viewer as usize];
    let seen_city = |c: &stratagem_core::engine::City| {
        c.owner == Owner::Player(viewer) || state.is_revealed(viewer, c.at)
    };
    let visible_names: BTreeSet<&str> = state.cities.values().filter(|c| seen_city(c)).map(|c| c.name.as_str()).collect();
    for c in state.cities.values().filter(|c| !seen_city(c)) {
        if !visible_names.contains(c.name.as_str()) {
            assert!(!d.text.contains(&c.name), "hidden city {} leaked to {viewer}", c.name);
        }
    }
    let cities = d.section("Cities").unwrap();
    for line in cities.lines().filter_map(|l| l.trim().strip_prefix("- ID: ")) {
        let id: u32 = line.parse().unwrap();
        assert!(seen_city(&state.cities[&id]), "city id {id}");
    }
    let (events, _) = visible_events(state, viewer, 0);
    assert!(events.iter().all(|e| e.witnessed_by(viewer)));
    // A player is only named once met or once something of theirs is in view.
    for p in state.players.iter().filter(|p| p.id != viewer && !me.has_met(p.id)) {
        let shows = state.cities.values().any(|c| c.owner == Owner::Player(p.id) && seen_city(c))
            || state.units.values().any(|u| u.owner == p.id && state.is_visible(viewer, u.at));
        let name = player_name(state, p.id);
        let shared = state.players.iter().any(|o| o.id != p.id && player_name(state, o.id) == name);
        if !shows && !shared {
            let others = d.section("Players").unwrap();
            assert!(!others.contains(&format!("Civilization: {name}")), "{name} leaked to {viewer}");
            assert!(!d.section("Military").unwrap().contains(&format!("{name}:")));
        }
    }
}

#[test]
fn sections_in_order_with_matching_offsets() {
    let s = fresh(11);
    let d = doc(&s, 0);
    assert!(d.text.starts_with("You, Player 0, are making strategic decisions after turn 0."));
    let titles: Vec<&str> = d.offsets.iter().map(|(t, _)| t.as_str()).collect();
    assert_eq!(titles, SECTIONS);
    let mut last = 0;
    for (title, off) in &d.offsets {
        assert!(*off > last);
        last = *off;
        assert!(d.text[*off..].starts_with(&format!("# {title}\n")), "{title}");
        assert!(d.section(title).unwrap().starts_with('#'));
    }
    assert!(d.section("Diplomacy").is_none());
}

#[test]
fn turn_zero_marks_locked_victories() {
    let d = doc(&fresh(12), 0);
    let v = d.section("Victory Progress").unwrap();
    assert!(v.contains("- ScienceVictory: Unlocked in later eras"));
    assert!(v.contains("- DiplomaticVictory: Unlocked in later eras"));
    assert!(v.contains("  - CapitalsNeeded: 4"));
    assert!(v.contains("  - TurnsLeft: "));
}

#[test]
fn no_new_events_leaves_an_empty_events_section() {
    let mut s = played(13, 3);
    s.mark_seen(0);
    let d = s.document(0).unwrap();
    let ev = d.section("Events").unwrap();
    assert!(ev.starts_with("# Events\n"));
    assert!(!ev.contains("## Turn"));
    assert_eq!(ev.lines().count(), 2);
}

#[test]
fn encoding_is_byte_identical_on_repeat() {
    let s = played(14, 20);
    for p in 0..4 {
        if s.state.players[p as usize].alive {
            assert_eq!(s.document(p).unwrap(), s.document(p).unwrap());
        }
    }
}

#[test]
fn dead_viewer_is_rejected() {
    let mut s = fresh(15);
    s.players[3].alive = false;
    assert!(encode_state(&s, 3, &plain(&s, 3), 0).is_err());
    assert!(encode_state(&s, 7, &plain(&s, 0), 0).is_err());
}

fn moved(index: u64, turn: u32) -> Event {
    let at = stratagem_core::engine::Coord { x: 1, y: 2 };
    Event {
        index,
        turn,
        witnesses: 1,
        kind: EventKind::UnitMoved {
            unit: 7,
            player: 0,
            kind: UnitKind::Warrior,
            from: at,
            to: stratagem_core::engine::Coord { x: 2, y: 2 },
        },
    }
}

#[test]
fn single_event_block() {
    let e = moved(0, 5);
    let text = encode_events(&[&e], false);
    assert_eq!(
        text,
        "## Turn 5\n\n### 0\n- Type: UnitMoved\n- Unit: 7\n- Player: 0\n- Kind: Warrior\n- From: 1,2\n- To: 2,2\n\n"
    );
    assert_eq!(encode_events(&[], false), "");
    assert_eq!(encode_events(&[], true), "(truncated)\n");
}

#[test]
fn events_group_by_ascending_turn() {
    let (a, b, c) = (moved(4, 9), moved(1, 8), moved(2, 8));
    let text = encode_events(&[&a, &b, &c], false);
    let heads: Vec<&str> = text.lines().filter(|l| l.starts_with("## ")).collect();
    assert_eq!(heads, ["## Turn 8", "## Turn 9"]);
    assert_eq!(text.matches("### 0").count(), 2);
    assert_eq!(text.matches("### 1").count(), 1);
}

#[test]
fn old_events_are_truncated() {
    let s = played(16, 8);
    let (events, truncated) = visible_events(&s.state, 0, 0);
    assert!(truncated);
    let floor = s.state.turn - EVENT_TURNS;
    assert!(events.iter().all(|e| e.turn >= floor));
    assert!(s.document(0).unwrap().section("Events").unwrap().contains("(truncated)\n"));
}

#[test]
fn city_revealed_to_one_player_only_stays_hidden_from_another() {
    let mut checked = 0;
    for seed in 0..20 {
        let s = fresh(seed);
        let cap = &s.cities[&s.players[1].original_capital];
        if s.is_revealed(0, cap.at) {
            continue;
        }
        assert!(!doc(&s, 0).text.contains(&cap.name));
        assert!(doc(&s, 1).section("Cities").unwrap().contains(&format!("- {}:", cap.name)));
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn hidden_unit_and_its_events_stay_hidden() {
    let mut s = fresh(17);
    let far = s
        .map
        .coords()
        .find(|c| s.map.is_passable(*c) && s.unit_at(*c).is_none() && !s.is_visible(0, *c) && s.is_visible(1, *c))
        .unwrap_or_else(|| {
            s.map.coords().find(|c| s.map.is_passable(*c) && s.unit_at(*c).is_none() && !s.is_visible(0, *c)).unwrap()
        });
    let since = s.event_log.len() as u64;
    s.spawn_unit(1, UnitKind::Horseman, far);
    let d = encode_state(&s, 0, &plain(&s, 0), since).unwrap();
    assert!(!d.section("Military").unwrap().contains("Horseman"));
    assert!(!d.section("Events").unwrap().contains("Horseman"));
    audit(&s, 0, &d);
}

#[test]
fn mid_game_documents_pass_the_fog_audit() {
    for seed in 0..12 {
        let s = played(100 + seed, 40);
        for p in 0..4 {
            if s.state.players[p as usize].alive {
                audit(&s.state, p, &s.document(p).unwrap());
            }
        }
    }
}

#[test]
fn token_estimates() {
    assert_eq!(estimate_tokens("").input_tokens, 0);
    assert_eq!(estimate_tokens(&"x".repeat(400)).input_tokens, 100);
    assert_eq!(estimate_tokens("x").input_tokens, 1);
}

proptest! {
    #[test]
    fn token_estimate_is_zero_only_for_empty(text in ".{0,200}") {
        let n = estimate_tokens(&text).input_tokens;
        prop_assert_eq!(n == 0, text.is_empty());
        prop_assert_eq!(n, (text.len() as u64).div_ceil(4));
    }
}

#[test]
fn tool_descriptor_shape() {
    let tools = tool_schemas();
    let names: Vec<&str> = tools.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(names, ["set-persona", "set-research", "set-policy", "set-strategy", "keep-status-quo"]);
    let finishing: Vec<&str> = tools.iter().filter(|t| t.finishing).map(|t| t.name.as_str()).collect();
    assert_eq!(finishing, ["set-strategy", "keep-status-quo"]);
    let keep = &tools[4].parameters;
    let props: Vec<&String> = keep["properties"].as_object().unwrap().keys().collect();
    assert_eq!(props, ["rationale"]);
    let persona = tools[0].parameters["properties"].as_object().unwrap();
    let bounded = persona
        .values()
        .filter(|v| v["type"] == "integer" && v["minimum"] == 1 && v["maximum"] == 10)
        .count();
    assert_eq!(bounded, 26);
    for t in &tools {
        let req = t.parameters["required"].as_array().unwrap();
        assert!(req.iter().any(|r| r == "rationale"), "{}", t.name);
    }
    let raw: serde_json::Value = serde_json::from_str(TOOLS_JSON).unwrap();
    assert_eq!(raw["version"], 1);
}

#[test]
fn compact_documents_are_under_sixty_percent_of_verbose() {
    let (mut compact, mut verbose) = (0u64, 0u64);
    for seed in 0..10 {
        let s = played(200 + seed, 50);
        let p = (0..4).find(|p| s.state.players[*p as usize].alive).unwrap();
        compact += estimate_tokens(&s.document(p).unwrap().text).input_tokens;
        let v = encode_verbose(&s.state, p, &s.overrides[p as usize], s.seen[p as usize]).unwrap();
        verbose += estimate_tokens(&v).input_tokens;
    }
    assert!((compact as f64) / (verbose as f64) <= 0.6, "{compact} / {verbose}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn more_own_units_never_shrink_the_document(seed in 0u64..500, extra in 1usize..6) {
        let mut s = fresh(seed);
        let home = s.cities[&s.players[0].original_capital].at;
        let mut last = estimate_tokens(&doc(&s, 0).text).input_tokens;
        for _ in 0..extra {
            let Some(at) = s.map.coords().filter(|c| s.is_revealed(0, *c)).find_map(|c| {
                s.free_spawn_tile(c).filter(|t| t.distance(home) <= 3)
            }) else { break };
            s.spawn_unit(0, UnitKind::Warrior, at);
            s.refresh_visibility(0);
            let now = estimate_tokens(&doc(&s, 0).text).input_tokens;
            prop_assert!(now >= last, "{now} < {last}");
            last = now;
        }
    }

    #[test]
    fn more_own_cities_never_shrink_the_document(seed in 0u64..500) {
        let mut s = fresh(seed);
        let before = estimate_tokens(&doc(&s, 0).text).input_tokens;
        let spot = s.map.coords().find(|c| s.is_revealed(0, *c) && s.can_found_city(0, *c));
        if let Some(at) = spot {
            s.found_city(Owner::Player(0), at, "Newtown".into());
            s.refresh_visibility(0);
            let after = doc(&s, 0);
            prop_assert!(estimate_tokens(&after.text).input_tokens >= before);
            prop_assert!(after.text.contains("- Newtown:"));
        }
    }
}

#[test]
fn golden_turn_zero_document() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/seed42_player0_turn0.md");
    let text = doc(&fresh(42), 0).text;
    if std::env::var_os("STRATAGEM_BLESS").is_some() {
        std::fs::write(path, &text).unwrap();
    }
    let want = std::fs::read_to_string(path).expect("golden file; rerun with STRATAGEM_BLESS=1");
    assert_eq!(text, want);
}
