use proptest::prelude::*;

use stratagem_core::data::tables;
use stratagem_core::engine::rules::{Producible, UnitKind};
use stratagem_core::engine::{new_game, GameConfig, GameState, Owner, Stance};
use stratagem_core::strategy::{apply_strategy_set, EconomicStrategy, GrandStrategy, MilitaryStrategy, StrategySet};
use stratagem_core::tactical::builtin::{grand_fitness, military_ratio, military_triggers, GRAND_STICKINESS};
use stratagem_core::tactical::production::situational_bonus;
use stratagem_core::tactical::units::{best_military_move, MoveKind};
use stratagem_core::tactical::{
    builtin_macro_decide, choose_city_production, compute_tactical_zones, dominance, legal_items, plan_unit_turn,
    score_production_item, tactical_map, Dominance, Flavor, FlavorVector, TacticalError, UnitAction,
};
use stratagem_core::Session;

fn play(seed: u64, turns: u32) -> GameState {
    let mut s = Session::new(GameConfig::with_seed(seed)).unwrap();
    for _ in 0..turns {
        if s.is_terminal() {
            break;
        }
        s.advance().unwrap();
    }
    s.state
}

fn set_war(s: &mut GameState, a: u8, b: u8) {
    for (x, y) in [(a, b), (b, a)] {
        let r = &mut s.players[x as usize].diplomacy[y as usize];
        r.met = true;
        r.stance = Stance::War;
        r.war_since = Some(s.turn);
    }
}

fn capital(s: &GameState, p: u8) -> stratagem_core::engine::City {
    s.cities[&s.players[p as usize].original_capital].clone()
}

// ---- zones ----

#[test]
fn dominance_threshold_examples() {
    assert_eq!(dominance(49, 0), Dominance::Friendly);
    assert_eq!(dominance(30, 30), Dominance::Contested);
    assert_eq!(dominance(0, 0), Dominance::Neutral);
    assert_eq!(dominance(0, 5), Dominance::Enemy);
    // 1.5x exactly dominates; just under does not.
    assert_eq!(dominance(45, 30), Dominance::Friendly);
    assert_eq!(dominance(44, 30), Dominance::Contested);
    assert_eq!(dominance(30, 45), Dominance::Enemy);
}

#[test]
fn lone_city_zone_is_friendly() {
    let mut s = new_game(GameConfig { player_count: 2, ..GameConfig::with_seed(6) }).unwrap();
    let cap = capital(&s, 0);
    s.cities.retain(|id, _| *id == cap.id);
    s.units.retain(|_, u| u.owner == 0 && u.kind.is_military());
    let zones = compute_tactical_zones(&s, 0).unwrap();
    let city_zones: Vec<_> = zones.iter().filter(|z| z.city.is_some()).collect();
    assert_eq!(city_zones.len(), 1);
    let z = city_zones[0];
    assert_eq!(z.city, Some(cap.id));
    assert_eq!(z.dominance, Dominance::Friendly);
    assert_eq!(z.enemy_strength, 0);
    assert!(z.friendly_strength > 0);
}

#[test]
fn dead_viewer_has_no_zones() {
    let mut s = new_game(GameConfig::with_seed(6)).unwrap();
    s.players[2].alive = false;
    assert!(compute_tactical_zones(&s, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn zones_partition_the_map(seed in any::<u64>(), turns in 0u32..60, viewer in 0u8..4) {
        let s = play(seed, turns);
        prop_assume!(s.players[viewer as usize].alive);
        let map = tactical_map(&s, viewer).unwrap();
        let total: usize = map.zones.iter().map(|z| z.plots).sum();
        prop_assert_eq!(total, s.map.len());
        prop_assert_eq!(map.tile_zone.len(), s.map.len());
        for (i, z) in map.zones.iter().enumerate() {
            prop_assert_eq!(z.id, i);
            prop_assert_eq!(map.tile_zone.iter().filter(|t| **t == i).count(), z.plots);
            prop_assert_eq!(z.dominance, dominance(z.friendly_strength, z.enemy_strength));
        }
        prop_assert_eq!(tactical_map(&s, viewer).unwrap(), map);
    }
}

// ---- production ----

fn garrisoned_capital_state(seed: u64) -> (GameState, stratagem_core::engine::City) {
    let mut s = new_game(GameConfig::with_seed(seed)).unwrap();
    let cap = capital(&s, 0);
    let warrior = s.player_units(0).find(|u| u.kind == UnitKind::Warrior).unwrap().id;
    let occupied = s.unit_at(cap.at).map(|u| u.id);
    if occupied != Some(warrior) {
        if let Some(other) = occupied {
            s.units.remove(&other);
        }
        s.units.get_mut(&warrior).unwrap().at = cap.at;
    }
    (s, cap)
}

#[test]
fn zero_flavors_score_only_the_bonus() {
    let s = play(3, 30);
    let zero = FlavorVector::uniform(0);
    for city in s.player_cities(1) {
        for item in legal_items(&s, city) {
            assert_eq!(score_production_item(&s, item, city, &zero).unwrap(), situational_bonus(&s, city, item));
        }
    }
}

#[test]
fn fixture_city_hand_scores() {
    let (s, cap) = garrisoned_capital_state(12);
    let f = FlavorVector::uniform(10);
    // Warrior: Offense 2 + Defense 2 at weight 10, minus 12 for the one military unit.
    assert_eq!(score_production_item(&s, Producible::Warrior, &cap, &f).unwrap(), 40 - 12);
    // Monument: Culture 3 + Happiness 2, no situational term.
    assert_eq!(score_production_item(&s, Producible::Monument, &cap, &f).unwrap(), 50);
    // Library: Science 4; needs Writing.
    assert_eq!(
        score_production_item(&s, Producible::Library, &cap, &f),
        Err(TacticalError::IllegalItem { item: Producible::Library, city: cap.id })
    );
    // A size-1 city cannot train settlers.
    assert!(score_production_item(&s, Producible::Settler, &cap, &f).is_err());
}

#[test]
fn offense_raises_melee_score() {
    let (s, cap) = garrisoned_capital_state(12);
    let base = FlavorVector::uniform(20);
    let mut more = base;
    more.set(Flavor::Offense, 40);
    let a = score_production_item(&s, Producible::Warrior, &cap, &base).unwrap();
    let b = score_production_item(&s, Producible::Warrior, &cap, &more).unwrap();
    assert!(b > a);
}

#[test]
fn expansion_flavors_pick_a_settler() {
    let (mut s, mut cap) = garrisoned_capital_state(12);
    cap.population = 3;
    s.cities.insert(cap.id, cap.clone());
    let arch = &tables().archetypes[s.players[0].archetype];
    let set = StrategySet::new(GrandStrategy::Culture).with_economic([EconomicStrategy::EarlyExpansion]);
    let flavors = apply_strategy_set(&set, &arch.flavors);
    assert_eq!(choose_city_production(&s, &cap, &flavors).unwrap(), Producible::Settler);
}

#[test]
fn city_state_city_cannot_produce() {
    let s = new_game(GameConfig::with_seed(1)).unwrap();
    let cs = s.cities.values().find(|c| matches!(c.owner, Owner::CityState(_))).unwrap();
    assert_eq!(
        choose_city_production(&s, cs, &FlavorVector::uniform(10)),
        Err(TacticalError::NotPlayerCity(cs.id))
    );
}

/// Argmax with lowest-id tie break, computed from the public scorer.
fn production_oracle(s: &GameState, city: &stratagem_core::engine::City, f: &FlavorVector) -> Producible {
    let scored: Vec<(i64, Producible)> =
        legal_items(s, city).into_iter().map(|i| (score_production_item(s, i, city, f).unwrap(), i)).collect();
    let best = scored.iter().map(|(v, _)| *v).max().unwrap();
    scored.into_iter().filter(|(v, _)| *v == best).map(|(_, i)| i).min_by_key(|i| i.id()).unwrap()
}

#[test]
fn ties_go_to_the_lowest_id() {
    let (s, cap) = garrisoned_capital_state(12);
    let zero = FlavorVector::uniform(0);
    // Monument and Wealth both score 0 here; Monument has the lower id.
    assert_eq!(score_production_item(&s, Producible::Monument, &cap, &zero).unwrap(), 0);
    assert_eq!(score_production_item(&s, Producible::Wealth, &cap, &zero).unwrap(), 0);
    let pick = choose_city_production(&s, &cap, &zero).unwrap();
    assert_eq!(pick, production_oracle(&s, &cap, &zero));
    assert!(pick.id() <= Producible::Monument.id());
}

fn flavor_vec() -> impl Strategy<Value = FlavorVector> {
    proptest::array::uniform14(0i32..=100).prop_map(FlavorVector::from_raw)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn production_matches_argmax_oracle(seed in 0u64..500, turns in 0u32..50, f in flavor_vec()) {
        let s = play(seed, turns);
        for city in s.cities.values().filter(|c| c.owner.player().is_some()) {
            prop_assert_eq!(choose_city_production(&s, city, &f).unwrap(), production_oracle(&s, city, &f));
        }
    }

    #[test]
    fn flavor_monotonicity(seed in 0u64..500, turns in 0u32..50, f in flavor_vec(), which in 0usize..14, bump in 1i32..50) {
        let s = play(seed, turns);
        let flavor = Flavor::ALL[which];
        let mut more = f;
        more.set(flavor, f.get(flavor) + bump);
        for city in s.cities.values().filter(|c| c.owner.player().is_some()) {
            for item in legal_items(&s, city) {
                if tables().affinity.get(item, flavor) > 0 {
                    let a = score_production_item(&s, item, city, &f).unwrap();
                    let b = score_production_item(&s, item, city, &more).unwrap();
                    prop_assert!(b >= a);
                }
            }
        }
    }
}

// ---- unit planning ----

#[test]
fn scout_explores_toward_most_unrevealed() {
    let s = new_game(GameConfig::with_seed(5)).unwrap();
    let scout = s.player_units(0).find(|u| u.kind == UnitKind::Scout).unwrap().clone();
    let map = tactical_map(&s, 0).unwrap();
    let action = plan_unit_turn(&scout, &s, &map, &FlavorVector::uniform(10));
    let UnitAction::Explore { to } = action else { panic!("expected explore, got {action:?}") };
    let sight = UnitKind::Scout.stats().sight;
    let unrevealed = |c| s.map.within(c, sight).into_iter().filter(|t| !s.is_revealed(0, *t)).count();
    let best = s
        .map
        .neighbors(scout.at)
        .filter(|c| s.map.is_passable(*c) && s.unit_at(*c).is_none())
        .map(unrevealed)
        .max()
        .unwrap();
    assert!(best > 0);
    assert_eq!(unrevealed(to), best);
}

#[test]
fn settler_without_expansion_holds() {
    let mut s = new_game(GameConfig::with_seed(5)).unwrap();
    let at = capital(&s, 0).at;
    let spot = s.free_spawn_tile(at).unwrap();
    let id = s.spawn_unit(0, UnitKind::Settler, spot);
    let settler = s.units[&id].clone();
    let map = tactical_map(&s, 0).unwrap();
    let mut f = FlavorVector::uniform(30);
    f.set(Flavor::Expansion, 0);
    assert_eq!(plan_unit_turn(&settler, &s, &map, &f), UnitAction::Fortify);
    f.set(Flavor::Expansion, 30);
    assert_ne!(plan_unit_turn(&settler, &s, &map, &f), UnitAction::Fortify);
}

#[test]
fn outnumbered_defender_falls_back_home() {
    let mut s = new_game(GameConfig::with_seed(5)).unwrap();
    set_war(&mut s, 0, 1);
    let home = capital(&s, 0).at;
    let warrior = s.player_units(0).find(|u| u.kind == UnitKind::Warrior).unwrap().id;
    // Park the warrior three tiles out with enemy swordsmen around it.
    let post = s
        .map
        .coords()
        .filter(|c| c.distance(home) == 3 && s.map.is_passable(*c) && s.unit_at(*c).is_none() && s.city_at(*c).is_none())
        .min()
        .unwrap();
    s.units.get_mut(&warrior).unwrap().at = post;
    let spots: Vec<_> = s
        .map
        .within(home, 2)
        .into_iter()
        .filter(|c| s.map.is_passable(*c) && s.unit_at(*c).is_none() && s.city_at(*c).is_none() && *c != post)
        .take(2)
        .collect();
    for c in spots {
        s.spawn_unit(1, UnitKind::Swordsman, c);
    }
    s.refresh_visibility(0);
    let map = tactical_map(&s, 0).unwrap();
    assert_eq!(map.zone_at(&s, home).dominance, Dominance::Enemy);
    let mut f = FlavorVector::uniform(10);
    f.set(Flavor::Offense, 5);
    f.set(Flavor::Defense, 90);
    let unit = s.units[&warrior].clone();
    let m = best_military_move(&unit, &s, &map, &f);
    assert_eq!(m.kind, MoveKind::Defend);
    match m.action {
        UnitAction::Move { to } => assert!(to.distance(home) < post.distance(home)),
        UnitAction::Fortify => {}
        other => panic!("expected a retreat, got {other:?}"),
    }
}

/// Mid-game states where someone is at war, for the strategy-to-action checks.
fn war_corpus() -> Vec<(GameState, u8)> {
    let mut out = Vec::new();
    'seeds: for seed in 0..200u64 {
        let mut s = Session::new(GameConfig::with_seed(seed)).unwrap();
        while !s.is_terminal() && s.state.turn < 150 {
            s.advance().unwrap();
            if s.state.turn % 10 != 0 {
                continue;
            }
            if let Some(p) = s.state.players.iter().find(|p| p.alive && p.wars().next().is_some()) {
                out.push((s.state.clone(), p.id));
                if out.len() == 50 {
                    break 'seeds;
                }
                continue 'seeds;
            }
        }
    }
    assert_eq!(out.len(), 50);
    out
}

fn count_kinds(corpus: &[(GameState, u8)], extra: Option<MilitaryStrategy>, kind: MoveKind) -> usize {
    let mut n = 0;
    for (s, p) in corpus {
        let ps = &s.players[*p as usize];
        let mut set = ps.strategy.clone();
        set.military.remove(&MilitaryStrategy::WinningWars);
        set.military.remove(&MilitaryStrategy::LosingWars);
        if let Some(m) = extra {
            set.military.insert(m);
        }
        let flavors = apply_strategy_set(&set, &tables().archetypes[ps.archetype].flavors);
        let map = tactical_map(s, *p).unwrap();
        for u in s.player_units(*p).filter(|u| u.kind.is_military()) {
            if best_military_move(u, s, &map, &flavors).kind == kind {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn war_strategies_shift_unit_actions() {
    let corpus = war_corpus();
    let base_attacks = count_kinds(&corpus, None, MoveKind::Attack);
    let winning_attacks = count_kinds(&corpus, Some(MilitaryStrategy::WinningWars), MoveKind::Attack);
    assert!(winning_attacks >= base_attacks, "{winning_attacks} < {base_attacks}");
    let base_push = base_attacks + count_kinds(&corpus, None, MoveKind::Advance);
    let winning_push = winning_attacks + count_kinds(&corpus, Some(MilitaryStrategy::WinningWars), MoveKind::Advance);
    assert!(winning_push > base_push, "{winning_push} <= {base_push}");
    let base_defend = count_kinds(&corpus, None, MoveKind::Defend);
    let losing_defend = count_kinds(&corpus, Some(MilitaryStrategy::LosingWars), MoveKind::Defend);
    assert!(losing_defend >= base_defend, "{losing_defend} < {base_defend}");
    assert!(losing_defend > base_defend, "{losing_defend} <= {base_defend}");
}

// ---- builtin macro strategist ----

#[test]
fn heavily_outgunned_war_is_losing() {
    let mut s = new_game(GameConfig::with_seed(8)).unwrap();
    set_war(&mut s, 0, 1);
    let at = capital(&s, 1).at;
    for _ in 0..3 {
        let spot = s.free_spawn_tile(at).unwrap();
        s.spawn_unit(1, UnitKind::Swordsman, spot);
    }
    let d = builtin_macro_decide(&s, 0);
    assert!(d.strategy.military.contains(&MilitaryStrategy::LosingWars));
    assert!(d.strategy.military.contains(&MilitaryStrategy::AtWar));
    assert!(!d.strategy.military.contains(&MilitaryStrategy::WinningWars));
    let d1 = builtin_macro_decide(&s, 1);
    assert!(d1.strategy.military.contains(&MilitaryStrategy::WinningWars));
}

#[test]
fn turn_zero_follows_the_rule_table() {
    let s = new_game(GameConfig::with_seed(8)).unwrap();
    for p in 0..4u8 {
        let d = builtin_macro_decide(&s, p);
        assert!(d.strategy.economic.contains(&EconomicStrategy::EarlyExpansion));
        let ps = &s.players[p as usize];
        let bias = tables().archetypes[ps.archetype].grand_bias;
        let w = &tables().rules.builtin.grand_fitness;
        // Only the bias and the military-ratio feature are non-zero at turn 0.
        let expected = GrandStrategy::ALL
            .iter()
            .copied()
            .map(|g| {
                let mut v = w.bias * bias[g.index()] as f64;
                if g == GrandStrategy::Conquest {
                    v += w.conquest_military_ratio * military_ratio(&s, p);
                }
                if g == ps.strategy.grand {
                    v += GRAND_STICKINESS;
                }
                assert!((v - grand_fitness(&s, p, g) - if g == ps.strategy.grand { GRAND_STICKINESS } else { 0.0 }).abs() < 1e-9);
                (v, g)
            })
            .fold(None::<(f64, GrandStrategy)>, |b, (v, g)| match b {
                Some((bv, _)) if bv >= v => b,
                _ => Some((v, g)),
            })
            .unwrap()
            .1;
        assert_eq!(d.strategy.grand, expected);
        assert_eq!(d.persona, ps.persona);
    }
}

#[test]
fn quiet_mid_game_has_no_military_strategies() {
    let mut s = new_game(GameConfig::with_seed(8)).unwrap();
    s.turn = 100;
    for g in [GrandStrategy::Culture, GrandStrategy::Spaceship, GrandStrategy::UnitedNations] {
        assert!(military_triggers(&s, 0, g).is_empty());
    }
}

#[test]
fn builtin_is_pure() {
    let s = play(14, 45);
    for p in 0..4u8 {
        if s.players[p as usize].alive {
            let copy = s.clone();
            assert_eq!(builtin_macro_decide(&s, p), builtin_macro_decide(&copy, p));
        }
    }
}

#[test]
fn builtin_sets_are_never_contradictory() {
    let catalog_check = |s: &GameState, p: u8| {
        let d = builtin_macro_decide(s, p);
        let catalog = stratagem_core::strategy::option_catalog(s, p).unwrap();
        stratagem_core::strategy::validate_strategy_set(&d.strategy, &catalog).unwrap();
    };
    for seed in 0..6 {
        let mut sess = Session::new(GameConfig::with_seed(seed)).unwrap();
        while !sess.is_terminal() && sess.state.turn < 120 {
            for p in 0..4u8 {
                if sess.state.players[p as usize].alive {
                    catalog_check(&sess.state, p);
                }
            }
            sess.advance().unwrap();
        }
    }
}
