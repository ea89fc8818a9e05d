//! Scenario configuration files.
//!
//! Scenarios are TOML documents with five sections. Every key except `seed`,
//! `[topology].kind`, `[topology].link` and `[game].players` has a default:
//!
//! ```toml
//! seed = 7
//!
//! [topology]
//! kind = "client_server"        # p2p | client_server | network_server
//! clients = 2
//! link = "wifi-like"            # preset name or { base_latency_ms, jitter_ms, loss_prob }
//! server_link = "wifi-like"     # network_server only; defaults to `link`
//! presets = "extra.toml"        # optional presets file, relative to the config
//!
//! [grid]
//! theta = 100.0
//! game_level = 1
//! min_points = 10
//! screen_width = 10.0
//! latency_rate_ms = 400.0       # pins L; omit to use the measured RTT
//!
//! [game]
//! kind = "football"             # football | hockey | basketball
//! players = 4
//! mu = 2
//! y_max = 10.0
//! player_height = 4.0
//! tick_ms = 100.0
//! duration_ticks = 50
//! ball_start = [5.0, 5.0]
//! player_starts = [[1.0, 1.0], [2.0, 2.0]]
//! special = [{ player = 2, phi = 3 }]
//!
//! [bots]
//! kind = "chase"                # chase | linear | stationary | reverse
//! reverse_every = 5
//! kick_prob = 0.1
//!
//! [prediction]
//! mode = "grid"                 # grid | dr_baseline | none
//! ball_guard = "inclusive"      # strict | inclusive
//! drops = [5, 9]                # ticks whose input batches are lost
//! drop_clients = [1]            # whose batches; all clients when omitted
//! drop_prob = 0.0               # extra independent loss of whole batches
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameRules, GameSetup};
use crate::grid::{GridSpec, DEFAULT_THETA};
use crate::kinematics::{GameKind, HeightModel};
use crate::net::{NetConditions, PredictorMode, Presets, Topology, TopologyKind};
use crate::predictor::BallGuard;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LinkSpec {
    Preset(String),
    Inline(NetConditions),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub kind: TopologyKind,
    #[serde(default = "one")]
    pub clients: u32,
    pub link: LinkSpec,
    #[serde(default)]
    pub server_link: Option<LinkSpec>,
    #[serde(default)]
    pub presets: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "one")]
    pub game_level: u32,
    #[serde(default = "default_min_points")]
    pub min_points: u32,
    #[serde(default = "default_width")]
    pub screen_width: f64,
    #[serde(default)]
    pub latency_rate_ms: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            game_level: 1,
            min_points: default_min_points(),
            screen_width: default_width(),
            latency_rate_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialPlayer {
    pub player: u32,
    pub phi: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    #[serde(default = "default_kind")]
    pub kind: GameKind,
    pub players: u32,
    #[serde(default = "default_mu")]
    pub mu: u32,
    #[serde(default = "default_y_max")]
    pub y_max: f64,
    #[serde(default = "default_height")]
    pub player_height: f64,
    #[serde(default = "default_tick")]
    pub tick_ms: f64,
    #[serde(default = "default_duration")]
    pub duration_ticks: u64,
    #[serde(default)]
    pub ball_start: Option<(f64, f64)>,
    #[serde(default)]
    pub player_starts: Vec<(f64, f64)>,
    #[serde(default)]
    pub special: Vec<SpecialPlayer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotKind {
    #[default]
    Chase,
    Linear,
    Stationary,
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BotSection {
    #[serde(default)]
    pub kind: BotKind,
    #[serde(default = "default_reverse")]
    pub reverse_every: u64,
    #[serde(default = "default_kick_prob")]
    pub kick_prob: f64,
}

impl Default for BotSection {
    fn default() -> Self {
        Self {
            kind: BotKind::default(),
            reverse_every: default_reverse(),
            kick_prob: default_kick_prob(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionSection {
    #[serde(default)]
    pub mode: PredictorMode,
    #[serde(default)]
    pub ball_guard: BallGuard,
    #[serde(default)]
    pub drops: Vec<u64>,
    #[serde(default)]
    pub drop_clients: Option<Vec<u32>>,
    #[serde(default)]
    pub drop_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub topology: TopologySection,
    #[serde(default)]
    pub grid: GridSection,
    pub game: GameSection,
    #[serde(default)]
    pub bots: BotSection,
    #[serde(default)]
    pub prediction: PredictionSection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
    #[serde(skip)]
    source: Option<String>,
}

fn one() -> u32 {
    1
}
fn default_theta() -> f64 {
    DEFAULT_THETA
}
fn default_min_points() -> u32 {
    10
}
fn default_width() -> f64 {
    10.0
}
fn default_kind() -> GameKind {
    GameKind::Football
}
fn default_mu() -> u32 {
    2
}
fn default_y_max() -> f64 {
    10.0
}
fn default_height() -> f64 {
    4.0
}
fn default_tick() -> f64 {
    100.0
}
fn default_duration() -> u64 {
    50
}
fn default_reverse() -> u64 {
    5
}
fn default_kick_prob() -> f64 {
    0.1
}

/// Everything a run needs, resolved from a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: GridSpec,
    pub rules: GameRules,
    pub setup: GameSetup,
    pub topology: Topology,
    pub initial_latency: f64,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.source = Some(text.to_owned());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.source = Some(text);
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip(e))))?;
        Ok(cfg)
    }

    /// Error located at `section.key` of the source text, when there is one.
    fn at(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> Error {
        match self
            .source
            .as_deref()
            .and_then(|s| line_of(s, section, key))
        {
            Some(line) => Error::Config(format!("line {line}: {section}.{key}: {msg}")),
            None => Error::Config(format!("{section}.{key}: {msg}")),
        }
    }

    fn presets(&self) -> Result<Presets> {
        let mut presets = Presets::builtin();
        if let Some(file) = &self.topology.presets {
            let path = match &self.base_dir {
                Some(dir) if file.is_relative() => dir.join(file),
                _ => file.clone(),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| self.at("topology", "presets", format!("{}: {e}", path.display())))?;
            presets.extend(
                Presets::from_toml(&text).map_err(|e| self.at("topology", "presets", strip(e)))?,
            );
        }
        Ok(presets)
    }

    fn link(&self, presets: &Presets, spec: &LinkSpec, key: &str) -> Result<NetConditions> {
        match spec {
            LinkSpec::Preset(name) => presets.get(name).cloned().ok_or_else(|| {
                let known: Vec<&str> = presets.names().collect();
                self.at(
                    "topology",
                    key,
                    format!("unknown preset `{name}` (known: {})", known.join(", ")),
                )
            }),
            LinkSpec::Inline(c) => {
                c.validate()
                    .map_err(|e| self.at("topology", key, strip(e)))?;
                Ok(c.clone())
            }
        }
    }

    pub fn client_link(&self) -> Result<NetConditions> {
        self.link(&self.presets()?, &self.topology.link, "link")
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.topology;
        if t.clients == 0 {
            return Err(self.at("topology", "clients", "must be >= 1"));
        }
        let presets = self.presets()?;
        self.link(&presets, &t.link, "link")?;
        if let Some(s) = &t.server_link {
            self.link(&presets, s, "server_link")?;
        }

        let g = &self.grid;
        if !(g.theta > 0.0 && g.theta.is_finite()) {
            return Err(self.at("grid", "theta", "must be > 0"));
        }
        if g.game_level == 0 {
            return Err(self.at("grid", "game_level", "must be >= 1"));
        }
        if g.min_points < 2 {
            return Err(self.at("grid", "min_points", "must be >= 2"));
        }
        if !(g.screen_width > 0.0 && g.screen_width.is_finite()) {
            return Err(self.at("grid", "screen_width", "must be > 0"));
        }
        if let Some(l) = g.latency_rate_ms {
            if !(l > 0.0 && l.is_finite()) {
                return Err(self.at("grid", "latency_rate_ms", "must be > 0"));
            }
        }

        let gm = &self.game;
        if gm.players == 0 {
            return Err(self.at("game", "players", "must be >= 1"));
        }
        if gm.mu == 0 {
            return Err(self.at("game", "mu", "must be >= 1"));
        }
        HeightModel::new(gm.y_max, gm.player_height, gm.kind)
            .map_err(|e| self.at("game", "y_max", strip(e)))?;
        if !(gm.tick_ms > 0.0 && gm.tick_ms.is_finite()) {
            return Err(self.at("game", "tick_ms", "must be > 0"));
        }
        if gm.duration_ticks < 2 {
            return Err(self.at(
                "game",
                "duration_ticks",
                "must be >= 2 (prediction needs two earlier states)",
            ));
        }
        if gm.player_starts.len() > gm.players as usize {
            return Err(self.at("game", "player_starts", "more starts than players"));
        }
        let mut seen = BTreeSet::new();
        for s in &gm.special {
            if !(1..=gm.players).contains(&s.player) || !seen.insert(s.player) {
                return Err(self.at(
                    "game",
                    "special",
                    format!("bad or repeated player {}", s.player),
                ));
            }
            if !matches!(s.phi, 2 | 3) {
                return Err(self.at(
                    "game",
                    "special",
                    format!("phi must be 2 or 3, got {}", s.phi),
                ));
            }
        }

        if self.bots.reverse_every == 0 {
            return Err(self.at("bots", "reverse_every", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.bots.kick_prob) {
            return Err(self.at("bots", "kick_prob", "must lie in [0, 1]"));
        }

        let p = &self.prediction;
        if let Some(d) = p
            .drops
            .iter()
            .find(|d| !(1..=gm.duration_ticks).contains(d))
        {
            return Err(self.at(
                "prediction",
                "drops",
                format!("tick {d} outside 1..={}", gm.duration_ticks),
            ));
        }
        if let Some(cs) = &p.drop_clients {
            if let Some(c) = cs.iter().find(|c| !(1..=t.clients).contains(c)) {
                return Err(self.at("prediction", "drop_clients", format!("unknown client {c}")));
            }
        }
        if !(0.0..=1.0).contains(&p.drop_prob) {
            return Err(self.at("prediction", "drop_prob", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved> {
        self.validate()?;
        let presets = self.presets()?;
        let client_link = self.link(&presets, &self.topology.link, "link")?;
        let server_link = match &self.topology.server_link {
            Some(s) => self.link(&presets, s, "server_link")?,
            None => client_link.clone(),
        };
        let n = self.topology.clients;
        let topology = match self.topology.kind {
            TopologyKind::P2p => Topology::p2p(n, client_link.clone())?,
            TopologyKind::ClientServer => Topology::client_server(n, client_link.clone())?,
            TopologyKind::NetworkServer => {
                Topology::network_server(n, client_link.clone(), server_link)?
            }
        };
        let initial_latency = 2.0 * client_link.base_latency_ms;
        let g = &self.grid;
        let gm = &self.game;
        let spec = GridSpec::new(
            g.theta,
            g.game_level,
            g.latency_rate_ms.unwrap_or(initial_latency),
            g.screen_width,
            g.min_points,
            gm.y_max,
        )?;
        let rules = GameRules::new(
            gm.mu,
            HeightModel::new(gm.y_max, gm.player_height, gm.kind)?,
            gm.tick_ms,
        )?;
        let setup = GameSetup {
            players: gm.players,
            ball_start: gm.ball_start,
            player_starts: gm.player_starts.clone(),
            special: gm
                .special
                .iter()
                .map(|s| (s.player, s.phi))
                .collect::<BTreeMap<_, _>>(),
        };
        Ok(Resolved {
            spec,
            rules,
            setup,
            topology,
            initial_latency,
        })
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// 1-based line of `key = ...` inside `[section]`.
fn line_of(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (no, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_owned();
            continue;
        }
        if current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(no + 1);
                }
            }
        }
    }
    None
}
