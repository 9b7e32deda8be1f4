use std::collections::BTreeMap;

use proptest::prelude::*;

use stratagem_core::engine::rules::{Ideology, Policy, PolicyChoice, Tech};
use stratagem_core::engine::{new_game, GameConfig, GameState};
use stratagem_core::strategy::{
    apply_persona, apply_strategy_set, option_catalog, queue_override, validate_choice, validate_strategy_set,
    ChoiceError, ChoiceKind, EconomicStrategy, GrandStrategy, MilitaryStrategy, Override, OverrideState, Persona,
    PersonaParam, Relations, StrategySet,
};
use stratagem_core::tactical::{Flavor, FlavorVector};

fn game(seed: u64) -> GameState {
    new_game(GameConfig::with_seed(seed)).unwrap()
}

/// Deltas read straight from the shipped table, keyed by strategy name.
fn delta_table() -> BTreeMap<String, BTreeMap<String, i64>> {
    let raw: toml::Value = toml::from_str(include_str!("../data/strategies.toml")).unwrap();
    let mut out = BTreeMap::new();
    for group in ["grand", "economic", "military"] {
        for s in raw[group].as_array().unwrap() {
            let deltas = s["deltas"]
                .as_table()
                .unwrap()
                .iter()
                .map(|(k, v)| (k.clone(), v.as_integer().unwrap()))
                .collect();
            out.insert(s["name"].as_str().unwrap().to_string(), deltas);
        }
    }
    out
}

fn oracle_flavors(names: &[&str], base: &FlavorVector) -> FlavorVector {
    let table = delta_table();
    let mut raw: Vec<i64> = base.values().iter().map(|v| *v as i64).collect();
    for n in names {
        for (flavor, d) in &table[*n] {
            raw[Flavor::from_name(flavor).unwrap().index()] += d;
        }
    }
    let mut out = [0i32; Flavor::COUNT];
    for (o, r) in out.iter_mut().zip(raw) {
        *o = r.clamp(0, 100) as i32;
    }
    FlavorVector::from_raw(out)
}

#[test]
fn catalog_sizes_at_turn_zero() {
    let s = game(1);
    let c = option_catalog(&s, 0).unwrap();
    assert_eq!(c.grand.len(), 4);
    assert_eq!(c.economic.len(), 13);
    assert_eq!(c.military.len(), 5);
    assert!(c.grand.iter().all(|e| !e.description.is_empty()));
}

#[test]
fn research_options_exclude_known_and_locked_techs() {
    let mut s = game(2);
    s.players[0].techs_known.insert(Tech::Mining);
    let c = option_catalog(&s, 0).unwrap();
    let names: Vec<&str> = c.research.iter().map(|e| e.name.as_str()).collect();
    assert!(!names.contains(&"Mining"));
    for t in Tech::ALL {
        let known = s.players[0].techs_known.contains(t);
        let ready = t.prereqs().iter().all(|q| s.players[0].techs_known.contains(q));
        let researching = s.players[0].research == Some(*t);
        assert_eq!(names.contains(&t.name()), !known && ready && !researching, "{t}");
    }
}

#[test]
fn policy_options_empty_once_everything_is_adopted() {
    let mut s = game(3);
    s.players[0].policies_adopted = Policy::ALL.to_vec();
    s.players[0].ideology = Some(Ideology::Order);
    let c = option_catalog(&s, 0).unwrap();
    assert!(c.policy.is_empty());
    let st = OverrideState::new(StrategySet::new(GrandStrategy::Culture), Persona::default());
    assert!(queue_override(&Override::Policy("Liberty".into()), "", &st, &c).is_err());
}

#[test]
fn catalog_for_dead_player_is_an_error() {
    let mut s = game(4);
    s.players[2].alive = false;
    assert!(option_catalog(&s, 2).is_err());
    assert!(option_catalog(&s, 9).is_err());
}

#[test]
fn culture_alone_only_moves_culture() {
    let base = FlavorVector::uniform(40);
    let out = apply_strategy_set(&StrategySet::new(GrandStrategy::Culture), &base);
    for f in Flavor::ALL {
        let want = if *f == Flavor::Culture { 65 } else { 40 };
        assert_eq!(out.get(*f), want, "{f}");
    }
}

#[test]
fn winning_wars_raises_offense_and_lowers_defense() {
    let base = FlavorVector::uniform(40);
    let plain = apply_strategy_set(&StrategySet::new(GrandStrategy::Culture), &base);
    let war = apply_strategy_set(
        &StrategySet::new(GrandStrategy::Culture).with_military([MilitaryStrategy::WinningWars]),
        &base,
    );
    assert!(war.get(Flavor::Offense) > plain.get(Flavor::Offense));
    assert!(war.get(Flavor::Defense) < plain.get(Flavor::Defense));
}

#[test]
fn saturated_flavors_stay_in_range() {
    let set = StrategySet::new(GrandStrategy::Conquest)
        .with_military([MilitaryStrategy::AtWar, MilitaryStrategy::WarMobilization, MilitaryStrategy::WinningWars]);
    let hi = apply_strategy_set(&set, &FlavorVector::uniform(100));
    let lo = apply_strategy_set(&set, &FlavorVector::uniform(0));
    assert_eq!(hi.get(Flavor::Offense), 100);
    assert_eq!(lo.get(Flavor::Culture), 0);
}

fn arb_set() -> impl Strategy<Value = (GrandStrategy, Vec<EconomicStrategy>, Vec<MilitaryStrategy>)> {
    (
        prop::sample::select(GrandStrategy::ALL.to_vec()),
        prop::sample::subsequence(EconomicStrategy::ALL.to_vec(), 0..=EconomicStrategy::COUNT),
        prop::sample::subsequence(MilitaryStrategy::ALL.to_vec(), 0..=MilitaryStrategy::COUNT),
    )
}

fn arb_flavors() -> impl Strategy<Value = FlavorVector> {
    prop::array::uniform14(0i32..=100).prop_map(FlavorVector::from_raw)
}

proptest! {
    #[test]
    fn strategy_set_matches_summed_table((g, e, m) in arb_set(), base in arb_flavors(), seed in any::<u64>()) {
        let set = StrategySet::new(g).with_economic(e.clone()).with_military(m.clone());
        let mut names: Vec<&str> = std::iter::once(g.name())
            .chain(e.iter().map(|x| x.name()))
            .chain(m.iter().map(|x| x.name()))
            .collect();
        let out = apply_strategy_set(&set, &base);
        prop_assert_eq!(out, oracle_flavors(&names, &base));
        // Order of accumulation does not matter.
        let k = (seed as usize) % names.len();
        names.rotate_left(k);
        names.reverse();
        prop_assert_eq!(out, oracle_flavors(&names, &base));
        prop_assert!(out.values().iter().all(|v| (0..=100).contains(v)));
    }

    #[test]
    fn forgiveness_never_raises_hostility(vals in prop::array::uniform26(1i64..=10), f in 1i64..10) {
        let mut lo = Persona::new(vals).unwrap();
        lo.set(PersonaParam::Forgiveness, f).unwrap();
        let mut hi = lo;
        hi.set(PersonaParam::Forgiveness, f + 1).unwrap();
        let r = Relations::default();
        prop_assert!(apply_persona(&hi, &r).hostility <= apply_persona(&lo, &r).hostility);
        prop_assert!(apply_persona(&hi, &r).forgiveness_decay >= apply_persona(&lo, &r).forgiveness_decay);
    }

    #[test]
    fn more_wars_lower_war_and_raise_peace(vals in prop::array::uniform26(1i64..=10), wars in 0u32..5) {
        let p = Persona::new(vals).unwrap();
        let a = apply_persona(&p, &Relations { active_wars: wars });
        let b = apply_persona(&p, &Relations { active_wars: wars + 1 });
        prop_assert!(b.war_propensity <= a.war_propensity);
        prop_assert!(b.peace_propensity >= a.peace_propensity);
    }

    #[test]
    fn persona_rejects_out_of_range(param in prop::sample::select(PersonaParam::ALL.to_vec()),
                                    v in prop_oneof![-100i64..1, 11i64..100]) {
        let mut p = Persona::default();
        prop_assert!(p.set(param, v).is_err());
        prop_assert_eq!(p, Persona::default());
    }
}

#[test]
fn calmest_persona_has_the_lowest_war_propensity() {
    let mut p = Persona::default();
    p.set(PersonaParam::WarBias, 1).unwrap();
    p.set(PersonaParam::Boldness, 1).unwrap();
    let floor = apply_persona(&p, &Relations::default()).war_propensity;
    assert!((floor - 0.002).abs() < 1e-12);
    for (w, b) in [(1, 2), (2, 1), (10, 10), (5, 5)] {
        let mut q = Persona::default();
        q.set(PersonaParam::WarBias, w).unwrap();
        q.set(PersonaParam::Boldness, b).unwrap();
        assert!(apply_persona(&q, &Relations::default()).war_propensity > floor);
    }
}

#[test]
fn hand_computed_persona_weights() {
    // Coefficients from data/persona.toml, worked out by hand.
    let vals = [4, 8, 3, 5, 2, 8, 5, 7, 8, 10, 7, 10, 7, 5, 9, 8, 6, 5, 7, 7, 9, 1, 4, 10, 2, 4];
    let p = Persona::new(vals).unwrap();
    let w = apply_persona(&p, &Relations::default());
    let expect = [
        (w.war_propensity, 0.02),
        (w.hostility, 0.58),
        (w.friendship, 0.94),
        (w.denounce, 1.08),
        (w.forgiveness_decay, 0.1),
        (w.deception, 0.4),
        (w.minor_civ_investment, 0.23),
        (w.peace_propensity, 0.092),
        (w.wonder_drive, 0.8),
        (w.victory_drive, 0.43),
    ];
    for (i, (got, want)) in expect.iter().enumerate() {
        assert!((got - want).abs() < 1e-9, "weight {i}: {got} vs {want}");
    }
    let at_war = apply_persona(&p, &Relations { active_wars: 1 });
    assert!((at_war.war_propensity - 0.01).abs() < 1e-12);
    assert!((at_war.peace_propensity - 0.184).abs() < 1e-12);
}

#[test]
fn queued_research_and_branch_policy() {
    let s = game(5);
    let c = option_catalog(&s, 0).unwrap();
    let st = OverrideState::new(StrategySet::new(GrandStrategy::Culture), Persona::default());
    let r = queue_override(&Override::Research("Mining".into()), "ore nearby", &st, &c).unwrap();
    assert_eq!(r.next_research, Some(Tech::Mining));
    assert!(r.controlled.research && !r.controlled.policy);
    let p = queue_override(&Override::Policy("Tradition (New Branch)".into()), "tall", &r, &c).unwrap();
    assert_eq!(p.next_policy, Some(PolicyChoice::Policy(Policy::Tradition)));
    assert_eq!(p.next_research, Some(Tech::Mining));
    assert_eq!(p.rationale.policy.as_deref(), Some("tall"));
}

#[test]
fn rejected_choices_leave_state_untouched() {
    let s = game(6);
    let c = option_catalog(&s, 0).unwrap();
    let st = OverrideState::new(StrategySet::new(GrandStrategy::Culture), Persona::default());
    let bad = [
        Override::Research("Teleportation".into()),
        Override::Policy("Discipline".into()),
        Override::Persona(vec![("Boldness".into(), 11)]),
        Override::Persona(vec![("Boldness".into(), 3), ("Bravado".into(), 3)]),
        Override::Strategy { grand: "Conquest".into(), economic: None, military: Some(vec!["WinningWars".into(), "LosingWars".into()]) },
        Override::Strategy { grand: "Domination".into(), economic: None, military: None },
    ];
    for b in &bad {
        let before = st.clone();
        assert!(queue_override(b, "why", &st, &c).is_err(), "{b:?}");
        assert_eq!(st, before);
    }
}

#[test]
fn persona_update_is_partial() {
    let s = game(7);
    let c = option_catalog(&s, 0).unwrap();
    let st = OverrideState::new(StrategySet::new(GrandStrategy::Culture), Persona::default());
    let next = queue_override(&Override::Persona(vec![("WarBias".into(), 9)]), "arm", &st, &c).unwrap();
    for (param, v) in next.persona.iter() {
        assert_eq!(v, if param == PersonaParam::WarBias { 9 } else { 5 });
    }
}

#[test]
fn validate_choice_examples() {
    let s = game(8);
    let c = option_catalog(&s, 0).unwrap();
    let calm = StrategySet::new(GrandStrategy::Culture);
    assert!(validate_choice(ChoiceKind::Grand, "Conquest", &c, &calm).is_ok());
    let losing = calm.clone().with_military([MilitaryStrategy::LosingWars]);
    assert_eq!(
        validate_choice(ChoiceKind::Military, "WinningWars", &c, &losing),
        Err(ChoiceError::Exclusive {
            kind: ChoiceKind::Military,
            value: "WinningWars".into(),
            conflicts_with: "LosingWars".into()
        })
    );
    match validate_choice(ChoiceKind::Economic, "EarlyExpnasion", &c, &calm) {
        Err(ChoiceError::NotInCatalog { suggestion, .. }) => assert_eq!(suggestion.as_deref(), Some("EarlyExpansion")),
        other => panic!("{other:?}"),
    }
    assert!(validate_choice(ChoiceKind::Persona, "Meanness", &c, &calm).is_ok());
    assert!(validate_choice(ChoiceKind::Persona, "Kindness", &c, &calm).is_err());
}

#[test]
fn strategy_set_validation_catches_internal_conflicts() {
    let s = game(9);
    let c = option_catalog(&s, 0).unwrap();
    let ok = StrategySet::new(GrandStrategy::Spaceship).with_economic([EconomicStrategy::TechLeader]);
    assert!(validate_strategy_set(&ok, &c).is_ok());
    let bad = StrategySet::new(GrandStrategy::Spaceship)
        .with_economic([EconomicStrategy::EarlyExpansion, EconomicStrategy::EnoughExpansion]);
    assert!(matches!(validate_strategy_set(&bad, &c), Err(ChoiceError::Exclusive { .. })));
}

#[test]
fn omitted_lists_stay_with_builtin_triggers() {
    let s = game(10);
    let c = option_catalog(&s, 0).unwrap();
    let st = OverrideState::new(StrategySet::new(GrandStrategy::Culture), Persona::default());
    let o = Override::Strategy { grand: "Conquest".into(), economic: None, military: Some(vec!["WarMobilization".into()]) };
    let next = queue_override(&o, "strike first", &st, &c).unwrap();
    assert!(next.builtin_lists.economic);
    assert!(!next.builtin_lists.military);
    assert_eq!(next.strategy.grand, GrandStrategy::Conquest);
    assert_eq!(next.strategy.rationale, "strike first");
    let full = Override::Strategy { grand: "Culture".into(), economic: Some(vec![]), military: Some(vec![]) };
    let pinned = queue_override(&full, "", &next, &c).unwrap();
    assert!(!pinned.builtin_lists.economic && !pinned.builtin_lists.military);
    assert!(pinned.strategy.economic.is_empty());
}

#[test]
fn persona_serde_requires_all_parameters_in_range() {
    let p = Persona::default();
    let json = serde_json::to_string(&p).unwrap();
    assert_eq!(serde_json::from_str::<Persona>(&json).unwrap(), p);
    let short = json.replacen("\"Boldness\":5,", "", 1);
    assert!(serde_json::from_str::<Persona>(&short).is_err());
    let wide = json.replacen("\"Boldness\":5", "\"Boldness\":0", 1);
    assert!(serde_json::from_str::<Persona>(&wide).is_err());
}
