use serde::{Deserialize, Serialize};

use super::hex::{Coord, Owner};
use super::rules::{PolicyChoice, Producible, Tech, UnitKind};
use super::state::{CityId, PlayerId, UnitId, VictoryKind};

named_enum! {
    pub enum RemovalReason {
        Killed,
        Captured,
        Disbanded,
        Settled,
        Eliminated,
    }
}

/// Who was hit in a combat exchange.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "target")]
pub enum Target {
    Unit { unit: UnitId, owner: PlayerId },
    City { city: CityId, owner: Owner },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum EventKind {
    UnitCreated { unit: UnitId, player: PlayerId, kind: UnitKind, at: Coord },
    UnitRemoved { unit: UnitId, player: PlayerId, kind: UnitKind, at: Coord, reason: RemovalReason },
    UnitMoved { unit: UnitId, player: PlayerId, kind: UnitKind, from: Coord, to: Coord },
    UnitPromoted { unit: UnitId, player: PlayerId, level: u8 },
    TileRevealed { player: PlayerId, at: Coord },
    TileImproved { player: PlayerId, at: Coord },
    CityFounded { city: CityId, owner: Owner, at: Coord, name: String },
    CityCaptured { city: CityId, from: PlayerId, to: PlayerId, at: Coord },
    SetPopulation { city: CityId, at: Coord, population: u32 },
    ProductionCompleted { city: CityId, player: PlayerId, item: Producible },
    CombatResolved {
        attacker: UnitId,
        attacker_owner: PlayerId,
        defender: Target,
        at: Coord,
        attacker_damage: i32,
        defender_damage: i32,
        attacker_hp: i32,
        defender_hp: i32,
    },
    CityBombarded { city: CityId, owner: PlayerId, unit: UnitId, unit_owner: PlayerId, damage: i32, unit_hp: i32 },
    WarDeclared { by: PlayerId, against: PlayerId },
    PeaceMade { a: PlayerId, b: PlayerId },
    TechFinished { player: PlayerId, tech: Tech },
    PolicyAdopted { player: PlayerId, policy: PolicyChoice },
    PatronChanged { city_state: u8, patron: Option<PlayerId> },
    CongressVote { delegates: Vec<u32>, leader: Option<PlayerId> },
    PlayerMet { a: PlayerId, b: PlayerId },
    PlayerEliminated { player: PlayerId },
    PlayerDoneTurn { player: PlayerId },
    VictoryAchieved { winner: PlayerId, kind: VictoryKind },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::UnitCreated { .. } => "UnitCreated",
            EventKind::UnitRemoved { .. } => "UnitRemoved",
            EventKind::UnitMoved { .. } => "UnitMoved",
            EventKind::UnitPromoted { .. } => "UnitPromoted",
            EventKind::TileRevealed { .. } => "TileRevealed",
            EventKind::TileImproved { .. } => "TileImproved",
            EventKind::CityFounded { .. } => "CityFounded",
            EventKind::CityCaptured { .. } => "CityCaptured",
            EventKind::SetPopulation { .. } => "SetPopulation",
            EventKind::ProductionCompleted { .. } => "ProductionCompleted",
            EventKind::CombatResolved { .. } => "CombatResolved",
            EventKind::CityBombarded { .. } => "CityBombarded",
            EventKind::WarDeclared { .. } => "WarDeclared",
            EventKind::PeaceMade { .. } => "PeaceMade",
            EventKind::TechFinished { .. } => "TechFinished",
            EventKind::PolicyAdopted { .. } => "PolicyAdopted",
            EventKind::PatronChanged { .. } => "PatronChanged",
            EventKind::CongressVote { .. } => "CongressVote",
            EventKind::PlayerMet { .. } => "PlayerMet",
            EventKind::PlayerEliminated { .. } => "PlayerEliminated",
            EventKind::PlayerDoneTurn { .. } => "PlayerDoneTurn",
            EventKind::VictoryAchieved { .. } => "VictoryAchieved",
        }
    }

    /// Payload fields as (key, value) pairs in a fixed order, for text rendering.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let c = |at: &Coord| format!("{},{}", at.x, at.y);
        match self {
            EventKind::UnitCreated { unit, player, kind, at } => vec![
                ("Unit", unit.to_string()),
                ("Player", player.to_string()),
                ("Kind", kind.to_string()),
                ("At", c(at)),
            ],
            EventKind::UnitRemoved { unit, player, kind, at, reason } => vec![
                ("Unit", unit.to_string()),
                ("Player", player.to_string()),
                ("Kind", kind.to_string()),
                ("At", c(at)),
                ("Reason", reason.to_string()),
            ],
            EventKind::UnitMoved { unit, player, kind, from, to } => vec![
                ("Unit", unit.to_string()),
                ("Player", player.to_string()),
                ("Kind", kind.to_string()),
                ("From", c(from)),
                ("To", c(to)),
            ],
            EventKind::UnitPromoted { unit, player, level } => {
                vec![("Unit", unit.to_string()), ("Player", player.to_string()), ("Level", level.to_string())]
            }
            EventKind::TileRevealed { player, at } | EventKind::TileImproved { player, at } => {
                vec![("Player", player.to_string()), ("At", c(at))]
            }
            EventKind::CityFounded { city, owner, at, name } => vec![
                ("City", city.to_string()),
                ("Name", name.clone()),
                ("Owner", owner_text(owner)),
                ("At", c(at)),
            ],
            EventKind::CityCaptured { city, from, to, at } => vec![
                ("City", city.to_string()),
                ("From", from.to_string()),
                ("To", to.to_string()),
                ("At", c(at)),
            ],
            EventKind::SetPopulation { city, at, population } => {
                vec![("City", city.to_string()), ("At", c(at)), ("Population", population.to_string())]
            }
            EventKind::ProductionCompleted { city, player, item } => {
                vec![("City", city.to_string()), ("Player", player.to_string()), ("Item", item.to_string())]
            }
            EventKind::CombatResolved {
                attacker,
                attacker_owner,
                defender,
                at,
                attacker_damage,
                defender_damage,
                attacker_hp,
                defender_hp,
            } => {
                let (dkey, did, downer) = match defender {
                    Target::Unit { unit, owner } => ("DefenderUnit", unit.to_string(), owner.to_string()),
                    Target::City { city, owner } => ("DefenderCity", city.to_string(), owner_text(owner)),
                };
                vec![
                    ("Attacker", attacker.to_string()),
                    ("AttackerOwner", attacker_owner.to_string()),
                    (dkey, did),
                    ("DefenderOwner", downer),
                    ("At", c(at)),
                    ("AttackerDamage", attacker_damage.to_string()),
                    ("DefenderDamage", defender_damage.to_string()),
                    ("AttackerHP", attacker_hp.to_string()),
                    ("DefenderHP", defender_hp.to_string()),
                ]
            }
            EventKind::CityBombarded { city, owner, unit, unit_owner, damage, unit_hp } => vec![
                ("City", city.to_string()),
                ("Owner", owner.to_string()),
                ("Unit", unit.to_string()),
                ("UnitOwner", unit_owner.to_string()),
                ("Damage", damage.to_string()),
                ("UnitHP", unit_hp.to_string()),
            ],
            EventKind::WarDeclared { by, against } => {
                vec![("By", by.to_string()), ("Against", against.to_string())]
            }
            EventKind::PeaceMade { a, b } | EventKind::PlayerMet { a, b } => {
                vec![("PlayerA", a.to_string()), ("PlayerB", b.to_string())]
            }
            EventKind::TechFinished { player, tech } => {
                vec![("Player", player.to_string()), ("Tech", tech.to_string())]
            }
            EventKind::PolicyAdopted { player, policy } => {
                vec![("Player", player.to_string()), ("Policy", policy.name().to_string())]
            }
            EventKind::PatronChanged { city_state, patron } => vec![
                ("CityState", city_state.to_string()),
                ("Patron", patron.map_or("None".to_string(), |p| p.to_string())),
            ],
            EventKind::CongressVote { delegates, leader } => vec![
                ("Delegates", delegates.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")),
                ("Leader", leader.map_or("None".to_string(), |p| p.to_string())),
            ],
            EventKind::PlayerEliminated { player } | EventKind::PlayerDoneTurn { player } => {
                vec![("Player", player.to_string())]
            }
            EventKind::VictoryAchieved { winner, kind } => {
                vec![("Winner", winner.to_string()), ("Kind", kind.to_string())]
            }
        }
    }

    /// Unit ids this event creates or removes: (+1, id) / (-1, id).
    pub fn unit_delta(&self) -> Option<(i8, UnitId)> {
        match self {
            EventKind::UnitCreated { unit, .. } => Some((1, *unit)),
            EventKind::UnitRemoved { unit, .. } => Some((-1, *unit)),
            _ => None,
        }
    }
}

fn owner_text(o: &Owner) -> String {
    match o {
        Owner::Player(p) => p.to_string(),
        Owner::CityState(c) => format!("CityState{c}"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    /// Global, strictly increasing log index.
    pub index: u64,
    pub turn: u32,
    /// Bit `p` is set when player `p` could observe the event as it happened.
    pub witnesses: u32,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl Event {
    pub fn witnessed_by(&self, player: PlayerId) -> bool {
        self.witnesses >> player & 1 == 1
    }
}
