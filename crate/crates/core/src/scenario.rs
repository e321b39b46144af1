//! Scenario documents and the built-in presets.
//!
//! Scenarios are JSON. Unknown fields are rejected and every validation
//! error names the offending field path. [`render_config`] writes the
//! canonical form: pretty-printed with keys sorted, so rendering a parsed
//! config is byte-stable.
//!
//! Defaults: `schema_version` 1, `marker_density` 6 markers/m², `seed` 0,
//! `dt` 1/30 s, `mode` extraversion with marker cap 70, `capture_radius`
//! 2 m, `max_speed` 1.3 m/s, `spawn_separation` 1 m, no obstacles, no
//! avatar, `n_ticks` 1500. Spawn groups default to extraversion 1.0 and
//! goal 0.

use serde::{Deserialize, Serialize};

use crate::behavior::{BehaviorMode, ModeVariant};
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect, Vec2};
use crate::markers::{DEFAULT_CAPTURE_RADIUS, DEFAULT_MARKER_DENSITY};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_DT: f64 = 1.0 / 30.0;
pub const DEFAULT_MAX_SPEED: f64 = 1.3;
pub const DEFAULT_SPAWN_SEPARATION: f64 = 1.0;
pub const DEFAULT_TICKS: u64 = 1500;

pub const PRESET_NAMES: [&str; 7] = [
    "fig2_hetero",
    "fig3_homo_e08",
    "fig4_normal_life",
    "fig5_biocrowds",
    "scenario1",
    "scenario2",
    "scenario3",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvatarMode {
    #[default]
    None,
    Spectator,
    CompetingAgent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    Rect { min: Vec2<f64>, max: Vec2<f64> },
    /// Disc, or annulus when `inner_radius > 0`.
    Circle {
        center: Vec2<f64>,
        radius: f64,
        #[serde(default)]
        inner_radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpawnGroup {
    pub count: u32,
    pub region: Region,
    #[serde(default = "one")]
    pub extraversion: f64,
    pub profile_label: String,
    #[serde(default)]
    pub goal_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvatarConfig {
    /// World center when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec2<f64>>,
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
    #[serde(default = "default_capture_radius")]
    pub capture_radius: f64,
    /// Only used when the avatar competes under extraversion weighting.
    #[serde(default = "one")]
    pub extraversion: f64,
}

impl Default for AvatarConfig {
    fn default() -> Self {
        AvatarConfig {
            start: None,
            max_speed: DEFAULT_MAX_SPEED,
            capture_radius: DEFAULT_CAPTURE_RADIUS,
            extraversion: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub world: Rect<f64>,
    #[serde(default)]
    pub obstacles: Vec<Polygon<f64>>,
    #[serde(default = "default_density")]
    pub marker_density: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_mode")]
    pub mode: BehaviorMode,
    #[serde(default = "default_capture_radius")]
    pub capture_radius: f64,
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
    #[serde(default = "default_separation")]
    pub spawn_separation: f64,
    pub spawn_groups: Vec<SpawnGroup>,
    pub goals: Vec<Vec2<f64>>,
    #[serde(default)]
    pub avatar_mode: AvatarMode,
    #[serde(default)]
    pub avatar: AvatarConfig,
    #[serde(default = "default_ticks")]
    pub n_ticks: u64,
}

fn one() -> f64 {
    1.0
}
fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_density() -> f64 {
    DEFAULT_MARKER_DENSITY
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_mode() -> BehaviorMode {
    BehaviorMode::new(ModeVariant::Extraversion)
}
fn default_capture_radius() -> f64 {
    DEFAULT_CAPTURE_RADIUS
}
fn default_max_speed() -> f64 {
    DEFAULT_MAX_SPEED
}
fn default_separation() -> f64 {
    DEFAULT_SPAWN_SEPARATION
}
fn default_ticks() -> u64 {
    DEFAULT_TICKS
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(path, format!("must be a positive finite number, got {v}")))
    }
}

fn unit_interval(path: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(path, format!("must lie in [0, 1], got {v}")))
    }
}

impl ScenarioConfig {
    pub fn avatar_start(&self) -> Vec2<f64> {
        self.avatar.start.unwrap_or_else(|| self.world.center())
    }

    /// Goal of the first spawn group carrying `label`.
    pub fn goal_for_label(&self, label: &str) -> Option<Vec2<f64>> {
        self.spawn_groups
            .iter()
            .find(|g| g.profile_label == label)
            .map(|g| self.goals[g.goal_index])
    }

    /// Distinct profile labels in spawn order.
    pub fn profile_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for g in &self.spawn_groups {
            if !labels.contains(&g.profile_label) {
                labels.push(g.profile_label.clone());
            }
        }
        labels
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.world.is_degenerate() {
            return Err(Error::invalid("world", "bounds must have positive width and height"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.vertices.len() < 3 {
                return Err(Error::invalid(
                    format!("obstacles[{i}].vertices"),
                    "a polygon needs at least 3 vertices",
                ));
            }
        }
        positive("marker_density", self.marker_density)?;
        positive("dt", self.dt)?;
        positive("capture_radius", self.capture_radius)?;
        positive("max_speed", self.max_speed)?;
        if !(self.spawn_separation >= 0.0 && self.spawn_separation.is_finite()) {
            return Err(Error::invalid("spawn_separation", "must be a non-negative finite number"));
        }
        if self.mode.marker_cap < 1 {
            return Err(Error::invalid("mode.marker_cap", "must be at least 1"));
        }
        if self.goals.is_empty() {
            return Err(Error::invalid("goals", "at least one goal is required"));
        }
        for (i, g) in self.goals.iter().enumerate() {
            if !self.world.contains(*g) {
                return Err(Error::invalid(format!("goals[{i}]"), "goal lies outside the world"));
            }
        }
        if self.spawn_groups.is_empty() {
            return Err(Error::invalid("spawn_groups", "at least one spawn group is required"));
        }
        for (i, g) in self.spawn_groups.iter().enumerate() {
            self.validate_group(i, g)?;
        }
        if self.avatar_mode != AvatarMode::None {
            positive("avatar.max_speed", self.avatar.max_speed)?;
            positive("avatar.capture_radius", self.avatar.capture_radius)?;
            unit_interval("avatar.extraversion", self.avatar.extraversion)?;
            if !self.world.contains(self.avatar_start()) {
                return Err(Error::invalid("avatar.start", "avatar starts outside the world"));
            }
        }
        Ok(())
    }

    fn validate_group(&self, i: usize, g: &SpawnGroup) -> Result<()> {
        let path = |field: &str| format!("spawn_groups[{i}].{field}");
        if g.count < 1 {
            return Err(Error::invalid(path("count"), "must be at least 1"));
        }
        unit_interval(&path("extraversion"), g.extraversion)?;
        if g.goal_index >= self.goals.len() {
            return Err(Error::invalid(
                path("goal_index"),
                format!("index {} out of range for {} goals", g.goal_index, self.goals.len()),
            ));
        }
        match g.region {
            Region::Rect { min, max } => {
                let rect = Rect::new(min, max);
                if rect.is_degenerate() {
                    return Err(Error::invalid(path("region"), "rectangle is degenerate"));
                }
                if !self.world.contains_rect(&rect) {
                    return Err(Error::invalid(path("region"), "region extends outside the world"));
                }
                if let Some(k) = self.obstacles.iter().position(|o| o.intersects_rect(&rect)) {
                    return Err(Error::invalid(path("region"), format!("region overlaps obstacles[{k}]")));
                }
            }
            Region::Circle { center, radius, inner_radius } => {
                if !(radius > 0.0 && radius.is_finite()) || !(0.0..radius).contains(&inner_radius) {
                    return Err(Error::invalid(
                        path("region"),
                        "circle needs 0 <= inner_radius < radius",
                    ));
                }
                let bbox = Rect::new(
                    Vec2::new(center.x - radius, center.y - radius),
                    Vec2::new(center.x + radius, center.y + radius),
                );
                if !self.world.contains_rect(&bbox) {
                    return Err(Error::invalid(path("region"), "region extends outside the world"));
                }
                // distances from the center to a connected polygon form an interval
                let overlaps = |o: &Polygon<f64>| {
                    o.distance_to(center) <= radius && o.max_distance_to(center) >= inner_radius
                };
                if let Some(k) = self.obstacles.iter().position(overlaps) {
                    return Err(Error::invalid(path("region"), format!("region overlaps obstacles[{k}]")));
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a scenario document, filling defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::ConfigParse { path, message: e.into_inner().to_string() }
    })?;
    config.validate()?;
    Ok(config)
}

/// Canonical text form: sorted keys, two-space indent, trailing newline.
pub fn render_config(config: &ScenarioConfig) -> String {
    // serde_json's Value map is ordered by key
    let value = serde_json::to_value(config).expect("config serializes");
    let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
    out.push('\n');
    out
}

const FIG_WORLD: f64 = 30.0;
const FIG_RING_INNER: f64 = 8.0;
const FIG_RING_OUTER: f64 = 13.0;

fn figure_base(name: &str, variant: ModeVariant, groups: &[(u32, f64, &str)]) -> ScenarioConfig {
    let goal = Vec2::new(FIG_WORLD / 2.0, FIG_WORLD / 2.0);
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        world: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(FIG_WORLD, FIG_WORLD)),
        obstacles: Vec::new(),
        marker_density: DEFAULT_MARKER_DENSITY,
        seed: 1,
        dt: DEFAULT_DT,
        mode: BehaviorMode::new(variant),
        capture_radius: DEFAULT_CAPTURE_RADIUS,
        max_speed: DEFAULT_MAX_SPEED,
        spawn_separation: DEFAULT_SPAWN_SEPARATION,
        spawn_groups: groups
            .iter()
            .map(|&(count, extraversion, label)| SpawnGroup {
                count,
                region: Region::Circle {
                    center: goal,
                    radius: FIG_RING_OUTER,
                    inner_radius: FIG_RING_INNER,
                },
                extraversion,
                profile_label: label.to_string(),
                goal_index: 0,
            })
            .collect(),
        goals: vec![goal],
        avatar_mode: AvatarMode::None,
        avatar: AvatarConfig::default(),
        n_ticks: DEFAULT_TICKS,
    }
}

/// Corridor approximation of the interactive scenes: agents enter on the
/// left and walk to a goal on the right, the avatar starts midway.
fn corridor_base(name: &str, variant: ModeVariant, avatar_mode: AvatarMode) -> ScenarioConfig {
    let spawn = Region::Rect { min: Vec2::new(2.0, 2.0), max: Vec2::new(10.0, 14.0) };
    let group = |extraversion: f64, label: &str| SpawnGroup {
        count: 15,
        region: spawn,
        extraversion,
        profile_label: label.to_string(),
        goal_index: 0,
    };
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        world: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(40.0, 16.0)),
        obstacles: Vec::new(),
        marker_density: DEFAULT_MARKER_DENSITY,
        seed: 1,
        dt: DEFAULT_DT,
        mode: BehaviorMode::new(variant),
        capture_radius: DEFAULT_CAPTURE_RADIUS,
        max_speed: DEFAULT_MAX_SPEED,
        spawn_separation: DEFAULT_SPAWN_SEPARATION,
        spawn_groups: vec![group(1.0, "E=1.0"), group(0.8, "E=0.8")],
        goals: vec![Vec2::new(36.0, 8.0)],
        avatar_mode,
        avatar: AvatarConfig { start: Some(Vec2::new(20.0, 8.0)), ..AvatarConfig::default() },
        n_ticks: DEFAULT_TICKS,
    }
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    use ModeVariant::*;
    let config = match name {
        "fig2_hetero" => figure_base(name, Extraversion, &[(25, 1.0, "E=1.0"), (25, 0.8, "E=0.8")]),
        "fig3_homo_e08" => figure_base(name, Extraversion, &[(50, 0.8, "E=0.8")]),
        "fig4_normal_life" => figure_base(name, NormalLife, &[(50, 1.0, "crowd")]),
        "fig5_biocrowds" => figure_base(name, BioCrowds, &[(50, 1.0, "crowd")]),
        "scenario1" => corridor_base(name, Extraversion, AvatarMode::Spectator),
        "scenario2" => corridor_base(name, BioCrowds, AvatarMode::CompetingAgent),
        "scenario3" => corridor_base(name, Extraversion, AvatarMode::CompetingAgent),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(config)
}
