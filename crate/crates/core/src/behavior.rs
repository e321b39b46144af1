//! Marker weighting rules.
//!
//! Every rule maps an agent's captured markers (as offsets from the agent)
//! to weights, and the motion vector is the weighted sum of the offsets.
//!
//! * goal-seeking: `w_k = f(g - x, a_k - x) / Σ f`, with
//!   `f(u, v) = (1 + cos θ) / (1 + |v|)`
//! * comfort-seeking: `w'_k = δ w_k + (1 - δ)` where `δ = sin(c π/2)` and
//!   `c = min(N / M, 1)`
//! * extraversion: `w''_k = δ w_k E + (1 - δ)(1 - E)`
//!
//! The blended weights are not renormalized; the engine's speed clamp bounds
//! the resulting step.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::Scalar;

/// Marker count at which an agent is fully comfortable.
pub const DEFAULT_MARKER_CAP: u32 = 70;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeVariant {
    BioCrowds,
    NormalLife,
    Extraversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorMode {
    pub variant: ModeVariant,
    #[serde(default = "default_marker_cap")]
    pub marker_cap: u32,
}

fn default_marker_cap() -> u32 {
    DEFAULT_MARKER_CAP
}

impl BehaviorMode {
    pub fn new(variant: ModeVariant) -> Self {
        BehaviorMode { variant, marker_cap: DEFAULT_MARKER_CAP }
    }
}

/// A captured marker seen from the agent: `offset = marker - agent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerInput<T> {
    pub marker_id: u32,
    pub offset: Vec2<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedMarker<T> {
    pub marker_id: u32,
    pub offset: Vec2<T>,
    pub weight: T,
}

/// `(1 + cos θ) / (1 + |offset|)` with θ the unsigned angle between the
/// goal direction and the marker offset.
///
/// A marker on top of the agent counts as perfectly aligned. A zero goal
/// direction drops the angular term and leaves `1 / (1 + |offset|)`.
pub fn kernel_f<T: Scalar>(goal_dir: Vec2<T>, offset: Vec2<T>) -> T {
    let dist = offset.norm();
    let one = T::one();
    if goal_dir.is_zero() {
        return one / (one + dist);
    }
    let cos_theta = if dist == T::zero() {
        one
    } else {
        (goal_dir.dot(offset) / (goal_dir.norm() * dist)).max(-one).min(one)
    };
    (one + cos_theta) / (one + dist)
}

/// Normalized goal-seeking weights. Falls back to uniform `1/N` when every
/// kernel value is zero (all markers straight behind the agent).
pub fn biocrowds_weights<T: Scalar>(
    goal_dir: Vec2<T>,
    markers: &[MarkerInput<T>],
) -> Vec<WeightedMarker<T>> {
    if markers.is_empty() {
        return Vec::new();
    }
    let raw: Vec<T> = markers.iter().map(|m| kernel_f(goal_dir, m.offset)).collect();
    let total = raw.iter().fold(T::zero(), |acc, &f| acc + f);
    let uniform = T::one() / T::from_usize(markers.len()).expect("marker count");
    markers
        .iter()
        .zip(raw)
        .map(|(m, f)| WeightedMarker {
            marker_id: m.marker_id,
            offset: m.offset,
            weight: if total > T::zero() { f / total } else { uniform },
        })
        .collect()
}

/// `min(n / cap, 1)`.
pub fn comfort<T: Scalar>(n_markers: usize, cap: u32) -> T {
    let cap = cap.max(1);
    let ratio = T::from_usize(n_markers).expect("marker count") / T::from_u32(cap).expect("cap");
    ratio.min(T::one())
}

/// `sin(c π/2)`.
///
/// On `[0, 1]` this is evaluated in double-double precision and rounded
/// once, so landmark values come out exact (`c = 1/3` gives `0.5`, which a
/// plain `sin` misses by one ulp).
pub fn comfort_bias<T: Scalar>(comfort: T) -> T {
    let c = comfort.as_f64();
    if (0.0..=1.0).contains(&c) {
        T::lit(sin_quarter_turns(c))
    } else {
        (comfort * T::lit(std::f64::consts::FRAC_PI_2)).sin()
    }
}

/// Double-double value as `(hi, lo)` with `|lo| <= ulp(hi) / 2`.
type Dd = (f64, f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn dd_add(x: Dd, y: Dd) -> Dd {
    let (s, e) = two_sum(x.0, y.0);
    two_sum(s, e + x.1 + y.1)
}

fn dd_mul(x: Dd, y: Dd) -> Dd {
    let p = x.0 * y.0;
    let e = x.0.mul_add(y.0, -p) + (x.0 * y.1 + x.1 * y.0);
    two_sum(p, e)
}

fn dd_scale(x: Dd, k: f64) -> Dd {
    let p = x.0 * k;
    two_sum(p, x.0.mul_add(k, -p) + x.1 * k)
}

/// `sin(c π/2)` for `c` in `[0, 1]` via the Taylor series in double-double.
fn sin_quarter_turns(c: f64) -> f64 {
    const HALF_PI: Dd = (std::f64::consts::FRAC_PI_2, 6.123233995736766e-17);
    let t = dd_scale(HALF_PI, c);
    let t_sq = dd_mul(t, t);
    let mut term = t;
    let mut sum = t;
    let mut k = 1.0;
    while term.0.abs() > 1e-36 {
        // term *= -t² / ((k + 1)(k + 2))
        let denom = (k + 1.0) * (k + 2.0);
        term = dd_mul(term, t_sq);
        term = dd_scale(term, -1.0 / denom);
        sum = dd_add(sum, term);
        k += 2.0;
    }
    sum.0 + sum.1
}

pub fn normal_life_weights<T: Scalar>(
    base: &[WeightedMarker<T>],
    bias: T,
) -> Vec<WeightedMarker<T>> {
    let one = T::one();
    base.iter()
        .map(|w| WeightedMarker { weight: bias * w.weight + (one - bias), ..*w })
        .collect()
}

pub fn extraversion_weights<T: Scalar>(
    base: &[WeightedMarker<T>],
    bias: T,
    extraversion: T,
) -> Vec<WeightedMarker<T>> {
    let one = T::one();
    base.iter()
        .map(|w| WeightedMarker {
            weight: bias * w.weight * extraversion + (one - bias) * (one - extraversion),
            ..*w
        })
        .collect()
}

/// `Σ w_k offset_k`; zero for no markers.
pub fn motion_vector<T: Scalar>(weighted: &[WeightedMarker<T>]) -> Vec2<T> {
    weighted
        .iter()
        .fold(Vec2::zero(), |acc, w| acc + w.offset * w.weight)
}

/// Per-agent inputs a weighting rule sees besides the markers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeighingContext<T> {
    pub variant: ModeVariant,
    /// `goal - position`, or the requested direction for a steered avatar.
    pub goal_dir: Vec2<T>,
    pub comfort: T,
    pub extraversion: T,
}

/// Strategy turning captured markers into weights. The engine is generic
/// over it so alternative rules can be compared against the standard ones.
pub trait MarkerWeighting<T: Scalar> {
    fn weigh(&self, ctx: &WeighingContext<T>, markers: &[MarkerInput<T>]) -> Vec<WeightedMarker<T>>;
}

/// The three rules above, selected by [`ModeVariant`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardWeighting;

impl<T: Scalar> MarkerWeighting<T> for StandardWeighting {
    fn weigh(&self, ctx: &WeighingContext<T>, markers: &[MarkerInput<T>]) -> Vec<WeightedMarker<T>> {
        let base = biocrowds_weights(ctx.goal_dir, markers);
        match ctx.variant {
            ModeVariant::BioCrowds => base,
            ModeVariant::NormalLife => normal_life_weights(&base, comfort_bias(ctx.comfort)),
            ModeVariant::Extraversion => {
                extraversion_weights(&base, comfort_bias(ctx.comfort), ctx.extraversion)
            }
        }
    }
}
