use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Offset coordinate on an "odd-r" hex grid (odd rows shoved right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    fn cube(self) -> (i32, i32, i32) {
        let q = self.x - (self.y - (self.y & 1)) / 2;
        let r = self.y;
        (q, r, -q - r)
    }

    pub fn distance(self, other: Coord) -> u32 {
        let (aq, ar, as_) = self.cube();
        let (bq, br, bs) = other.cube();
        (((aq - bq).abs() + (ar - br).abs() + (as_ - bs).abs()) / 2) as u32
    }

    /// The six neighbors, in a fixed order. May lie outside the map.
    pub fn neighbors(self) -> [Coord; 6] {
        const EVEN: [(i32, i32); 6] = [(1, 0), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1)];
        const ODD: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (0, 1), (1, 1)];
        let table = if self.y & 1 == 0 { &EVEN } else { &ODD };
        table.map(|(dx, dy)| Coord::new(self.x + dx, self.y + dy))
    }
}

impl std::fmt::Display for Coord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

named_enum! {
    pub enum Terrain {
        Grassland,
        Plains,
        Desert,
        Tundra,
        Hills,
        Forest,
        Mountain,
        Coast,
    }
}

/// Per-tile yields: (food, production, gold).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Yields {
    pub food: i32,
    pub production: i32,
    pub gold: i32,
}

impl Terrain {
    pub fn is_water(self) -> bool {
        matches!(self, Terrain::Coast)
    }

    pub fn is_passable(self) -> bool {
        !matches!(self, Terrain::Mountain | Terrain::Coast)
    }

    pub fn defense_bonus_pct(self) -> i32 {
        match self {
            Terrain::Hills | Terrain::Forest => 25,
            _ => 0,
        }
    }

    pub fn base_yields(self) -> Yields {
        let (food, production, gold) = match self {
            Terrain::Grassland => (2, 0, 0),
            Terrain::Plains => (1, 1, 0),
            Terrain::Desert => (0, 0, 1),
            Terrain::Tundra => (1, 0, 0),
            Terrain::Hills => (0, 2, 0),
            Terrain::Forest => (1, 1, 0),
            Terrain::Mountain => (0, 0, 0),
            Terrain::Coast => (1, 0, 1),
        };
        Yields { food, production, gold }
    }

    /// Yields added by a worker improvement, if the terrain accepts one.
    pub fn improvement_bonus(self) -> Option<Yields> {
        match self {
            Terrain::Grassland | Terrain::Plains | Terrain::Desert | Terrain::Tundra => {
                Some(Yields { food: 1, production: 0, gold: 0 })
            }
            Terrain::Hills => Some(Yields { food: 0, production: 2, gold: 0 }),
            Terrain::Forest => Some(Yields { food: 0, production: 1, gold: 0 }),
            Terrain::Mountain | Terrain::Coast => None,
        }
    }
}

/// Who owns a tile, city or unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Owner {
    Player(u8),
    CityState(u8),
}

impl Owner {
    pub fn player(self) -> Option<u8> {
        match self {
            Owner::Player(p) => Some(p),
            Owner::CityState(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub terrain: Terrain,
    pub owner: Option<Owner>,
    pub improved: bool,
    /// Connected-component id among tiles of the same land/water class.
    pub area: u16,
}

impl Tile {
    pub fn yields(&self) -> Yields {
        let mut y = self.terrain.base_yields();
        if self.improved {
            if let Some(b) = self.terrain.improvement_bonus() {
                y.food += b.food;
                y.production += b.production;
                y.gold += b.gold;
            }
        }
        y
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexMap {
    pub width: i32,
    pub height: i32,
    pub tiles: Vec<Tile>,
}

impl HexMap {
    pub fn filled(width: i32, height: i32, terrain: Terrain) -> Self {
        let tiles = (0..width * height)
            .map(|_| Tile { terrain, owner: None, improved: false, area: 0 })
            .collect();
        let mut map = Self { width, height, tiles };
        map.recompute_areas();
        map
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Coord) -> Option<usize> {
        self.contains(c).then(|| (c.y * self.width + c.x) as usize)
    }

    pub fn coord(&self, index: usize) -> Coord {
        let i = index as i32;
        Coord::new(i % self.width, i / self.width)
    }

    pub fn tile(&self, c: Coord) -> Option<&Tile> {
        self.index(c).map(|i| &self.tiles[i])
    }

    pub fn tile_mut(&mut self, c: Coord) -> Option<&mut Tile> {
        self.index(c).map(move |i| &mut self.tiles[i])
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.tiles.len()).map(|i| self.coord(i))
    }

    pub fn neighbors(&self, c: Coord) -> impl Iterator<Item = Coord> + '_ {
        c.neighbors().into_iter().filter(|n| self.contains(*n))
    }

    /// All in-map coordinates within `radius` of `center`, row-major order.
    pub fn within(&self, center: Coord, radius: u32) -> Vec<Coord> {
        let r = radius as i32;
        let mut out = Vec::new();
        for y in (center.y - r).max(0)..=(center.y + r).min(self.height - 1) {
            for x in (center.x - r - 1).max(0)..=(center.x + r + 1).min(self.width - 1) {
                let c = Coord::new(x, y);
                if c.distance(center) <= radius {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn is_passable(&self, c: Coord) -> bool {
        self.tile(c).is_some_and(|t| t.terrain.is_passable())
    }

    /// Labels connected components separately for land and water tiles.
    pub fn recompute_areas(&mut self) {
        let mut label = vec![u16::MAX; self.tiles.len()];
        let mut next = 0u16;
        for start in 0..self.tiles.len() {
            if label[start] != u16::MAX {
                continue;
            }
            let water = self.tiles[start].terrain.is_water();
            label[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for n in self.neighbors(self.coord(i)).collect::<Vec<_>>() {
                    let j = self.index(n).expect("in map");
                    if label[j] == u16::MAX && self.tiles[j].terrain.is_water() == water {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
            }
            next += 1;
        }
        for (tile, area) in self.tiles.iter_mut().zip(label) {
            tile.area = area;
        }
    }

    /// Breadth-first step distances to `target` over passable tiles.
    /// `u32::MAX` marks unreachable tiles. The target itself counts as
    /// reachable even if impassable (cities sit on land anyway).
    pub fn distance_field(&self, target: Coord) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.tiles.len()];
        let Some(t) = self.index(target) else {
            return dist;
        };
        dist[t] = 0;
        let mut queue = VecDeque::from([target]);
        while let Some(c) = queue.pop_front() {
            let d = dist[self.index(c).expect("in map")];
            for n in c.neighbors() {
                if let Some(j) = self.index(n) {
                    if dist[j] == u32::MAX && self.tiles[j].terrain.is_passable() {
                        dist[j] = d + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_is_symmetric_and_neighbors_are_one_apart() {
        for y in 0..6 {
            for x in 0..6 {
                let c = Coord::new(x, y);
                for n in c.neighbors() {
                    assert_eq!(c.distance(n), 1, "{c} -> {n}");
                    assert_eq!(n.distance(c), 1);
                }
            }
        }
    }

    #[test]
    fn within_radius_counts() {
        let map = HexMap::filled(16, 16, Terrain::Plains);
        assert_eq!(map.within(Coord::new(8, 8), 1).len(), 7);
        assert_eq!(map.within(Coord::new(8, 8), 2).len(), 19);
        assert_eq!(map.within(Coord::new(0, 0), 1).len(), 3);
    }

    #[test]
    fn areas_split_land_and_water() {
        let mut map = HexMap::filled(5, 5, Terrain::Plains);
        for y in 0..5 {
            map.tile_mut(Coord::new(2, y)).unwrap().terrain = Terrain::Coast;
        }
        map.recompute_areas();
        let left = map.tile(Coord::new(0, 0)).unwrap().area;
        let right = map.tile(Coord::new(4, 0)).unwrap().area;
        let water = map.tile(Coord::new(2, 0)).unwrap().area;
        assert_ne!(left, right);
        assert_ne!(left, water);
    }
}
