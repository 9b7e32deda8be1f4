use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenEstimate {
    pub input_tokens: u64,
    pub method: String,
}

/// Pluggable token counter; exact tokenizers can implement this.
pub trait TokenEstimator {
    fn id(&self) -> &str;
    fn count(&self, text: &str) -> u64;
}

/// One token per four bytes, rounded up.
#[derive(Clone, Copy, Debug, Default)]
pub struct ByteQuarterEstimator;

impl TokenEstimator for ByteQuarterEstimator {
    fn id(&self) -> &str {
        "bytes/4"
    }

    fn count(&self, text: &str) -> u64 {
        (text.len() as u64).div_ceil(4)
    }
}

pub fn estimate_tokens(text: &str) -> TokenEstimate {
    estimate_with(&ByteQuarterEstimator, text)
}

pub fn estimate_with(e: &dyn TokenEstimator, text: &str) -> TokenEstimate {
    TokenEstimate { input_tokens: e.count(text), method: e.id().to_string() }
}
