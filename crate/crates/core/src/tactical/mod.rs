//! The tactical executor: flavor-weighted production, per-unit moves,
//! tactical zones and the builtin macro strategist.

pub mod builtin;
mod flavor;
pub mod production;
pub mod units;
pub mod zones;

pub use builtin::{builtin_macro_decide, StrategyDecision};
pub use flavor::{Flavor, FlavorDelta, FlavorVector, FLAVOR_MAX, FLAVOR_MIN};
pub use production::{choose_city_production, legal_items, score_production_item, TacticalError};
pub use units::{plan_unit_turn, UnitAction};
pub use zones::{compute_tactical_zones, dominance, tactical_map, Dominance, TacticalMap, TacticalZone};
