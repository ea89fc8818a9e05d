use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN_PRESETS: &str = include_str!("../../presets.toml");

/// Link behaviour: delivered delay is `base ± U(jitter)`, floored at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConditions {
    #[serde(default)]
    pub profile: String,
    pub base_latency_ms: f64,
    #[serde(default)]
    pub jitter_ms: f64,
    #[serde(default)]
    pub loss_prob: f64,
}

impl NetConditions {
    pub fn new(
        profile: impl Into<String>,
        base_latency_ms: f64,
        jitter_ms: f64,
        loss_prob: f64,
    ) -> Result<Self> {
        let c = Self {
            profile: profile.into(),
            base_latency_ms,
            jitter_ms,
            loss_prob,
        };
        c.validate()?;
        Ok(c)
    }

    /// Zero-jitter, zero-loss link with a fixed delay.
    pub fn fixed(base_latency_ms: f64) -> Self {
        Self {
            profile: "fixed".into(),
            base_latency_ms,
            jitter_ms: 0.0,
            loss_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_latency_ms.is_finite() && self.base_latency_ms > 0.0) {
            return Err(Error::invalid("base_latency_ms", "must be > 0"));
        }
        if !(self.jitter_ms.is_finite() && self.jitter_ms >= 0.0) {
            return Err(Error::invalid("jitter_ms", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return Err(Error::invalid("loss_prob", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Bounds of the delivered delay.
    pub fn delay_range(&self) -> (f64, f64) {
        (
            (self.base_latency_ms - self.jitter_ms).max(0.0),
            self.base_latency_ms + self.jitter_ms,
        )
    }
}

/// Named transport profiles, loaded from a TOML table of tables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Presets(BTreeMap<String, NetConditions>);

impl Presets {
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN_PRESETS).expect("bundled presets parse")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, NetConditions> =
            toml::from_str(text).map_err(|e| Error::Config(format!("presets: {e}")))?;
        let mut out = BTreeMap::new();
        for (name, mut c) in raw {
            c.profile = name.clone();
            c.validate()
                .map_err(|e| Error::Config(format!("preset `{name}`: {e}")))?;
            out.insert(name, c);
        }
        Ok(Self(out))
    }

    pub fn get(&self, name: &str) -> Option<&NetConditions> {
        self.0.get(name)
    }

    /// Adds `other`'s profiles, replacing same-named ones.
    pub fn extend(&mut self, other: Presets) {
        self.0.extend(other.0);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}
