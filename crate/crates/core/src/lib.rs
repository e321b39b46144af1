//! Deterministic 2D crowd simulation driven by marker competition.
//!
//! Walkable space is sampled into a fixed set of markers. Every tick each
//! marker goes to the nearest agent that can reach it, and each agent moves
//! along a weighted sum of the offsets to the markers it won. Three weighting
//! rules are provided: goal-seeking ([`ModeVariant::BioCrowds`]),
//! comfort-seeking ([`ModeVariant::NormalLife`]) and an extraversion-scaled
//! blend of the two ([`ModeVariant::Extraversion`]).
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The type
//! aliases at the crate root fix it to `f64`, which is what the scenario
//! loader, recorder and CLI use.

pub mod avatar;
pub mod behavior;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod markers;
pub mod metrics;
pub mod scenario;

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

pub use behavior::{
    biocrowds_weights, comfort, comfort_bias, extraversion_weights, kernel_f, motion_vector,
    normal_life_weights, BehaviorMode, MarkerInput, MarkerWeighting, ModeVariant,
    StandardWeighting, WeighingContext,
};
pub use avatar::{apply_avatar_input, InputEvent, InputTrace, Participation};
pub use engine::{auction_markers, run, run_with_trace, AuctionResult};
pub use error::Error;
pub use metrics::{
    compute_group_metrics, export_trajectories, read_trajectories, state_hash, write_metrics_csv,
    AgentRecord, AvatarRecord, FrameRecord, GroupMetrics, MetricsRow, TrajectoryHeader,
};
pub use scenario::{parse_config, preset, render_config, AvatarMode, ScenarioConfig, PRESET_NAMES};

/// Floating point type the simulation can run on.
pub trait Scalar: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Converts an `f64` constant. Every finite `f64` maps into `f32`/`f64`.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type Vec2 = geometry::Vec2<f64>;
pub type Rect = geometry::Rect<f64>;
pub type Polygon = geometry::Polygon<f64>;
pub type Marker = markers::Marker<f64>;
pub type MarkerField = markers::MarkerField<f64>;
pub type Agent = engine::Agent<f64>;
pub type Avatar = avatar::Avatar<f64>;
pub type SimState = engine::SimState<f64>;
pub type WeightedMarker = behavior::WeightedMarker<f64>;
