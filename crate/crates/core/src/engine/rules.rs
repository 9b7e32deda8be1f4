//! The mini ruleset: an 11-tech three-tier tree, three policy branches of
//! three policies plus three ideologies, seven unit kinds, four buildings,
//! two wonders and the spaceship project.

use serde::{Deserialize, Serialize};

named_enum! {
    pub enum Tech {
        Agriculture,
        Mining,
        Archery,
        Writing,
        BronzeWorking,
        HorsebackRiding,
        Currency,
        Philosophy,
        IronWorking,
        Astronomy,
        CivilService,
    }
}

impl Tech {
    pub fn tier(self) -> u8 {
        use Tech::*;
        match self {
            Agriculture | Mining | Archery | Writing => 1,
            BronzeWorking | HorsebackRiding | Currency | Philosophy => 2,
            IronWorking | Astronomy | CivilService => 3,
        }
    }

    pub fn cost(self) -> i32 {
        match self.tier() {
            1 => 40,
            2 => 90,
            _ => 180,
        }
    }

    pub fn prereqs(self) -> &'static [Tech] {
        use Tech::*;
        match self {
            Agriculture | Mining | Archery | Writing => &[],
            BronzeWorking => &[Mining],
            HorsebackRiding => &[Agriculture],
            Currency => &[Agriculture, Writing],
            Philosophy => &[Writing],
            IronWorking => &[BronzeWorking],
            Astronomy => &[Philosophy, Currency],
            CivilService => &[Currency, BronzeWorking],
        }
    }

    /// Techs that list `self` as a prerequisite.
    pub fn leads_to(self) -> Vec<Tech> {
        Tech::ALL.iter().copied().filter(|t| t.prereqs().contains(&self)).collect()
    }
}

named_enum! {
    pub enum PolicyBranch {
        Tradition,
        Liberty,
        Honor,
    }
}

named_enum! {
    pub enum Policy {
        Tradition,
        Aristocracy,
        Monarchy,
        Liberty,
        Republic,
        CollectiveRule,
        Honor,
        Discipline,
        MilitaryCaste,
    }
}

impl Policy {
    pub fn branch(self) -> PolicyBranch {
        use Policy::*;
        match self {
            Tradition | Aristocracy | Monarchy => PolicyBranch::Tradition,
            Liberty | Republic | CollectiveRule => PolicyBranch::Liberty,
            Honor | Discipline | MilitaryCaste => PolicyBranch::Honor,
        }
    }

    pub fn is_opener(self) -> bool {
        matches!(self, Policy::Tradition | Policy::Liberty | Policy::Honor)
    }
}

impl PolicyBranch {
    pub fn policies(self) -> [Policy; 3] {
        match self {
            PolicyBranch::Tradition => [Policy::Tradition, Policy::Aristocracy, Policy::Monarchy],
            PolicyBranch::Liberty => [Policy::Liberty, Policy::Republic, Policy::CollectiveRule],
            PolicyBranch::Honor => [Policy::Honor, Policy::Discipline, Policy::MilitaryCaste],
        }
    }
}

named_enum! {
    pub enum Ideology {
        Freedom,
        Order,
        Autocracy,
    }
}

/// One adoptable entry in the policy list: a branch policy or an ideology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyChoice {
    Policy(Policy),
    Ideology(Ideology),
}

impl PolicyChoice {
    pub fn name(self) -> &'static str {
        match self {
            PolicyChoice::Policy(p) => p.name(),
            PolicyChoice::Ideology(i) => i.name(),
        }
    }

    /// Catalog label: branch openers carry "(New Branch)", ideologies "(Ideology)".
    pub fn label(self) -> String {
        match self {
            PolicyChoice::Policy(p) if p.is_opener() => format!("{} (New Branch)", p.name()),
            PolicyChoice::Policy(p) => p.name().to_string(),
            PolicyChoice::Ideology(i) => format!("{} (Ideology)", i.name()),
        }
    }

    /// Accepts a bare name or a catalog label.
    pub fn parse(s: &str) -> Option<Self> {
        let bare = s
            .trim()
            .trim_end_matches("(New Branch)")
            .trim_end_matches("(Ideology)")
            .trim();
        Policy::from_name(bare)
            .map(PolicyChoice::Policy)
            .or_else(|| Ideology::from_name(bare).map(PolicyChoice::Ideology))
    }

    /// Catalog order: branch policies first, then ideologies.
    pub fn all() -> impl Iterator<Item = PolicyChoice> {
        Policy::ALL
            .iter()
            .map(|p| PolicyChoice::Policy(*p))
            .chain(Ideology::ALL.iter().map(|i| PolicyChoice::Ideology(*i)))
    }
}

pub fn policy_cost(adopted: usize) -> i32 {
    25 + 15 * adopted as i32
}

named_enum! {
    pub enum UnitClass {
        Recon,
        Melee,
        Ranged,
        Mounted,
        Settler,
        Worker,
    }
}

named_enum! {
    pub enum UnitKind {
        Scout,
        Warrior,
        Archer,
        Horseman,
        Swordsman,
        Settler,
        Worker,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct UnitStats {
    pub class: UnitClass,
    pub strength: i32,
    pub ranged_strength: i32,
    pub range: u32,
    pub moves: u8,
    pub cost: i32,
    pub requires: Option<Tech>,
    pub sight: u32,
}

impl UnitKind {
    pub fn stats(self) -> UnitStats {
        use UnitKind::*;
        let (class, strength, ranged_strength, range, moves, cost, requires, sight) = match self {
            Scout => (UnitClass::Recon, 4, 0, 0, 2, 25, None, 3),
            Warrior => (UnitClass::Melee, 8, 0, 0, 1, 30, None, 2),
            Archer => (UnitClass::Ranged, 5, 8, 2, 1, 35, Some(Tech::Archery), 2),
            Horseman => (UnitClass::Mounted, 12, 0, 0, 2, 45, Some(Tech::HorsebackRiding), 2),
            Swordsman => (UnitClass::Melee, 16, 0, 0, 1, 55, Some(Tech::IronWorking), 2),
            Settler => (UnitClass::Settler, 0, 0, 0, 1, 60, None, 2),
            Worker => (UnitClass::Worker, 0, 0, 0, 1, 35, None, 2),
        };
        UnitStats { class, strength, ranged_strength, range, moves, cost, requires, sight }
    }

    pub fn class(self) -> UnitClass {
        self.stats().class
    }

    pub fn is_military(self) -> bool {
        matches!(self.class(), UnitClass::Melee | UnitClass::Ranged | UnitClass::Mounted)
    }

    pub fn is_civilian(self) -> bool {
        matches!(self.class(), UnitClass::Settler | UnitClass::Worker)
    }
}

named_enum! {
    pub enum Building {
        Monument,
        Library,
        Market,
        Walls,
        GreatArchive,
        Observatory,
    }
}

impl Building {
    pub fn is_wonder(self) -> bool {
        matches!(self, Building::GreatArchive | Building::Observatory)
    }

    pub fn cost(self) -> i32 {
        match self {
            Building::Monument => 40,
            Building::Library => 60,
            Building::Market => 65,
            Building::Walls => 50,
            Building::GreatArchive => 150,
            Building::Observatory => 180,
        }
    }

    pub fn requires(self) -> Option<Tech> {
        match self {
            Building::Monument => None,
            Building::Library => Some(Tech::Writing),
            Building::Market => Some(Tech::Currency),
            Building::Walls => Some(Tech::BronzeWorking),
            Building::GreatArchive => Some(Tech::Philosophy),
            Building::Observatory => Some(Tech::Astronomy),
        }
    }
}

named_enum! {
    /// Everything a city can put in its production queue. Declaration order
    /// is the item id used for deterministic tie-breaking.
    pub enum Producible {
        Scout,
        Warrior,
        Archer,
        Horseman,
        Swordsman,
        Settler,
        Worker,
        Monument,
        Library,
        Market,
        Walls,
        GreatArchive,
        Observatory,
        SpaceshipPart,
        Wealth,
    }
}

pub const SPACESHIP_PARTS_NEEDED: u32 = 4;

impl Producible {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn unit(self) -> Option<UnitKind> {
        use Producible as P;
        Some(match self {
            P::Scout => UnitKind::Scout,
            P::Warrior => UnitKind::Warrior,
            P::Archer => UnitKind::Archer,
            P::Horseman => UnitKind::Horseman,
            P::Swordsman => UnitKind::Swordsman,
            P::Settler => UnitKind::Settler,
            P::Worker => UnitKind::Worker,
            _ => return None,
        })
    }

    pub fn building(self) -> Option<Building> {
        use Producible as P;
        Some(match self {
            P::Monument => Building::Monument,
            P::Library => Building::Library,
            P::Market => Building::Market,
            P::Walls => Building::Walls,
            P::GreatArchive => Building::GreatArchive,
            P::Observatory => Building::Observatory,
            _ => return None,
        })
    }

    pub fn cost(self) -> i32 {
        if let Some(u) = self.unit() {
            return u.stats().cost;
        }
        if let Some(b) = self.building() {
            return b.cost();
        }
        match self {
            Producible::SpaceshipPart => 150,
            // Wealth never completes; production converts to gold.
            _ => i32::MAX,
        }
    }

    pub fn requires(self) -> Option<Tech> {
        if let Some(u) = self.unit() {
            return u.stats().requires;
        }
        if let Some(b) = self.building() {
            return b.requires();
        }
        match self {
            Producible::SpaceshipPart => Some(Tech::Astronomy),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tech_tree_is_a_three_tier_dag() {
        for t in Tech::ALL {
            for p in t.prereqs() {
                assert!(p.tier() < t.tier(), "{t} requires {p}");
            }
        }
        assert_eq!(Tech::COUNT, 11);
    }

    #[test]
    fn policy_labels_round_trip() {
        for c in PolicyChoice::all() {
            assert_eq!(PolicyChoice::parse(&c.label()), Some(c));
            assert_eq!(PolicyChoice::parse(c.name()), Some(c));
        }
        assert_eq!(PolicyChoice::Policy(Policy::Tradition).label(), "Tradition (New Branch)");
    }

    #[test]
    fn three_branches_of_three() {
        for b in PolicyBranch::ALL {
            let ps = b.policies();
            assert!(ps[0].is_opener());
            assert!(ps.iter().all(|p| p.branch() == *b));
        }
    }
}
