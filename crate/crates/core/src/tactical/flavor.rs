use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

named_enum! {
    /// Named tactical weights. Strategies steer tactics only through these.
    pub enum Flavor {
        Offense,
        Defense,
        Expansion,
        Growth,
        Gold,
        Science,
        Culture,
        Faith,
        Diplomacy,
        Wonder,
        NavalRecon,
        LandRecon,
        Happiness,
        Production,
    }
}

pub const FLAVOR_MIN: i32 = 0;
pub const FLAVOR_MAX: i32 = 100;

/// A full set of flavor weights, each clamped to `[0, 100]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FlavorVector([i32; Flavor::COUNT]);

impl Default for FlavorVector {
    fn default() -> Self {
        Self([0; Flavor::COUNT])
    }
}

impl FlavorVector {
    pub fn from_raw(values: [i32; Flavor::COUNT]) -> Self {
        Self(values.map(|v| v.clamp(FLAVOR_MIN, FLAVOR_MAX)))
    }

    pub fn uniform(value: i32) -> Self {
        Self::from_raw([value; Flavor::COUNT])
    }

    pub fn get(&self, f: Flavor) -> i32 {
        self.0[f.index()]
    }

    pub fn set(&mut self, f: Flavor, value: i32) {
        self.0[f.index()] = value.clamp(FLAVOR_MIN, FLAVOR_MAX);
    }

    /// Adds `delta` to every flavor in one step, then clamps.
    pub fn with_delta(&self, delta: &FlavorDelta) -> Self {
        let mut raw = self.0;
        for (v, d) in raw.iter_mut().zip(delta.0) {
            *v += d;
        }
        Self::from_raw(raw)
    }

    pub fn values(&self) -> &[i32; Flavor::COUNT] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = (Flavor, i32)> + '_ {
        Flavor::ALL.iter().map(|f| (*f, self.get(*f)))
    }
}

impl Serialize for FlavorVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(Flavor::COUNT))?;
        for (f, v) in self.iter() {
            m.serialize_entry(f.name(), &v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for FlavorVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, i32>::deserialize(d)?;
        let mut values = [0; Flavor::COUNT];
        let mut seen = 0;
        for (name, v) in raw {
            let f = Flavor::from_name(&name)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown flavor {name:?}")))?;
            values[f.index()] = v;
            seen += 1;
        }
        if seen != Flavor::COUNT {
            return Err(serde::de::Error::custom("every flavor must be present"));
        }
        Ok(Self::from_raw(values))
    }
}

/// Signed, unclamped flavor adjustments.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FlavorDelta(pub [i32; Flavor::COUNT]);

impl FlavorDelta {
    pub fn get(&self, f: Flavor) -> i32 {
        self.0[f.index()]
    }

    pub fn set(&mut self, f: Flavor, v: i32) {
        self.0[f.index()] = v;
    }

    pub fn add(&mut self, other: &FlavorDelta) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}
