use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use stratagem_strategist::{RoundInput, RoundReply, Strategist, StrategistError};

use crate::config::FaultPlan;

/// Wraps a strategist and makes whole episodes fail as if the transport
/// were down, in seeded bursts.
pub struct FaultInjector<S> {
    inner: S,
    plan: FaultPlan,
    rng: ChaCha8Rng,
    /// Failing episodes left in the current burst.
    remaining: u32,
    failing: bool,
}

impl<S: Strategist> FaultInjector<S> {
    pub fn new(inner: S, plan: FaultPlan, seed: u64) -> Self {
        Self { inner, plan, rng: ChaCha8Rng::seed_from_u64(seed), remaining: 0, failing: false }
    }
}

impl<S: Strategist> Strategist for FaultInjector<S> {
    fn round(&mut self, input: &RoundInput) -> Result<RoundReply, StrategistError> {
        if input.round == 1 {
            self.failing = if self.remaining > 0 {
                self.remaining -= 1;
                true
            } else if self.rng.random_bool(self.plan.probability) {
                self.remaining = self.plan.burst - 1;
                true
            } else {
                false
            };
        }
        if self.failing {
            return Err(StrategistError::Transport("injected fault".into()));
        }
        self.inner.round(input)
    }

    fn transcript(&self) -> Option<Value> {
        self.inner.transcript()
    }
}
