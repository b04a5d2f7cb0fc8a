//! Host-side companion to `rbftune-core`: CSV ingestion, the end-to-end
//! tuning pipelines (split, tune, refit, test), the benchmark matrix that
//! writes result tables, and the measured-data workflow used by the CLI.

pub mod bench;
pub mod dataio;
mod error;
pub mod pipeline;
pub mod real;

pub use error::{Error, Result};

/// Derives an independent seed for a named sub-stream (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Serde adapter for types that round-trip through their `Display`/`FromStr`
/// token (kernel families, test functions, methods).
pub(crate) mod token {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}
