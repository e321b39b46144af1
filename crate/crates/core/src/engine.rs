//! World state, the per-tick marker auction and the fixed-step update loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::avatar::{apply_avatar_input, Avatar, InputTrace, Participation};
use crate::behavior::{
    comfort, motion_vector, BehaviorMode, MarkerInput, MarkerWeighting, ModeVariant,
    StandardWeighting, WeighingContext,
};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::markers::{generate_markers_indexed, MarkerField};
use crate::metrics::FrameRecord;
use crate::scenario::{AvatarMode, Region, ScenarioConfig};
use crate::Scalar;

/// RNG stream for spawn placement (markers use stream 0 of the same seed).
const SPAWN_STREAM: u64 = 1;
const SPAWN_ATTEMPTS: usize = 10_000;

/// Distance below which an agent counts as arrived. Arrived agents keep
/// running the same dynamics; the flag only feeds reporting.
pub const ARRIVAL_RADIUS: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct Agent<T> {
    pub id: u32,
    pub position: Vec2<T>,
    pub goal: Vec2<T>,
    pub capture_radius: T,
    pub max_speed: T,
    pub extraversion: T,
    /// Comfort from the most recent auction.
    pub comfort: T,
    /// Marker ids won in the most recent auction, ascending.
    pub assigned_markers: Vec<u32>,
    pub profile_label: String,
}

impl<T: Scalar> Agent<T> {
    pub fn has_arrived(&self) -> bool {
        self.position.distance(self.goal) <= T::lit(ARRIVAL_RADIUS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState<T> {
    pub tick: u64,
    pub dt: T,
    pub agents: Vec<Agent<T>>,
    pub avatar: Option<Avatar<T>>,
    pub marker_field: MarkerField<T>,
    pub mode: BehaviorMode,
}

/// Auction outcome: marker ids per agent (same order as `SimState::agents`)
/// and for the avatar when it competes. Every list is ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuctionResult {
    pub by_agent: Vec<Vec<u32>>,
    pub avatar: Option<Vec<u32>>,
}

/// Competitor ordering for exact distance ties: agents by id, then the avatar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Bidder {
    Agent(u32),
    Avatar,
}

/// Assigns every marker to the nearest competitor whose capture radius
/// reaches it. Exact distance ties go to the lowest agent id, and the
/// avatar loses ties to agents. Spectator avatars do not bid.
pub fn auction_markers<T: Scalar>(state: &SimState<T>) -> AuctionResult {
    let field = &state.marker_field;
    let mut best: Vec<Option<(T, Bidder, usize)>> = vec![None; field.len()];

    let mut bid = |pos: Vec2<T>, radius: T, bidder: Bidder, slot: usize| {
        let r_sq = radius * radius;
        field.grid().for_each_near(pos, radius, |mid| {
            let d_sq = (field.marker(mid).position - pos).norm_sq();
            if d_sq > r_sq {
                return;
            }
            let entry = &mut best[mid as usize];
            let wins = match *entry {
                None => true,
                Some((bd, bb, _)) => d_sq < bd || (d_sq == bd && bidder < bb),
            };
            if wins {
                *entry = Some((d_sq, bidder, slot));
            }
        });
    };

    for (slot, agent) in state.agents.iter().enumerate() {
        bid(agent.position, agent.capture_radius, Bidder::Agent(agent.id), slot);
    }
    let avatar_bids = state.avatar.as_ref().filter(|a| a.competes());
    if let Some(avatar) = avatar_bids {
        bid(avatar.position, avatar.capture_radius, Bidder::Avatar, usize::MAX);
    }

    let mut result = AuctionResult {
        by_agent: vec![Vec::new(); state.agents.len()],
        avatar: avatar_bids.map(|_| Vec::new()),
    };
    for (mid, owner) in best.iter().enumerate() {
        match owner {
            Some((_, Bidder::Agent(_), slot)) => result.by_agent[*slot].push(mid as u32),
            Some((_, Bidder::Avatar, _)) => {
                if let Some(list) = result.avatar.as_mut() {
                    list.push(mid as u32);
                }
            }
            None => {}
        }
    }
    result
}

/// Clamped displacement for one competitor from its captured markers.
fn marker_displacement<T: Scalar, W: MarkerWeighting<T>>(
    field: &MarkerField<T>,
    position: Vec2<T>,
    assigned: &[u32],
    ctx: &WeighingContext<T>,
    max_speed: T,
    dt: T,
    weighting: &W,
) -> Vec2<T> {
    if assigned.is_empty() {
        return Vec2::zero();
    }
    let inputs: Vec<MarkerInput<T>> = assigned
        .iter()
        .map(|&id| MarkerInput { marker_id: id, offset: field.marker(id).position - position })
        .collect();
    let weighted = weighting.weigh(ctx, &inputs);
    (motion_vector(&weighted) * dt).clamp_length(max_speed * dt)
}

impl<T: Scalar> SimState<T> {
    /// Assembles a state and runs an initial auction so assignments and
    /// comfort are populated before the first step.
    pub fn new(
        marker_field: MarkerField<T>,
        agents: Vec<Agent<T>>,
        avatar: Option<Avatar<T>>,
        mode: BehaviorMode,
        dt: T,
    ) -> Self {
        let mut state = SimState { tick: 0, dt, agents, avatar, marker_field, mode };
        state.refresh_assignments();
        state
    }

    /// Builds the initial state for a validated scenario.
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let world = config.world.cast::<T>();
        let obstacles: Vec<_> = config.obstacles.iter().map(|o| o.cast::<T>()).collect();
        let max_radius = match config.avatar_mode {
            AvatarMode::None => config.capture_radius,
            _ => config.capture_radius.max(config.avatar.capture_radius),
        };
        let field = generate_markers_indexed(
            world,
            &obstacles,
            config.marker_density,
            config.seed,
            T::lit(max_radius),
        )?;

        let agents = spawn_agents(config)?;
        let avatar = match config.avatar_mode {
            AvatarMode::None => None,
            mode => Some(Avatar {
                position: config.avatar_start().cast(),
                input_dir: Vec2::zero(),
                max_speed: T::lit(config.avatar.max_speed),
                participation: match (mode, config.mode.variant) {
                    (AvatarMode::Spectator, _) => Participation::Spectator,
                    (_, ModeVariant::BioCrowds) => Participation::BioCrowdsAgent,
                    _ => Participation::NormalLifeAgent,
                },
                capture_radius: T::lit(config.avatar.capture_radius),
                extraversion: T::lit(config.avatar.extraversion),
                comfort: T::zero(),
                assigned_markers: Vec::new(),
            }),
        };
        Ok(SimState::new(field, agents, avatar, config.mode, T::lit(config.dt)))
    }

    /// Re-runs the auction at the current positions and stores the result.
    pub fn refresh_assignments(&mut self) {
        let auction = auction_markers(self);
        let cap = self.mode.marker_cap;
        for (agent, markers) in self.agents.iter_mut().zip(auction.by_agent) {
            agent.comfort = comfort(markers.len(), cap);
            agent.assigned_markers = markers;
        }
        if let Some(avatar) = self.avatar.as_mut() {
            let markers = auction.avatar.unwrap_or_default();
            avatar.comfort = comfort(markers.len(), cap);
            avatar.assigned_markers = markers;
        }
    }

    pub fn step(&mut self) {
        self.step_with(&StandardWeighting);
    }

    /// Advances one tick: motion for every competitor from its current
    /// markers, simultaneous position update, then a fresh auction so
    /// assignments match the new positions. Assignments are kept current by
    /// [`SimState::new`] and every step; call
    /// [`refresh_assignments`](Self::refresh_assignments) after moving
    /// anything by hand.
    pub fn step_with<W: MarkerWeighting<T>>(&mut self, weighting: &W) {
        let field = &self.marker_field;
        let dt = self.dt;

        let displacements: Vec<Vec2<T>> = self
            .agents
            .iter()
            .map(|agent| {
                let ctx = WeighingContext {
                    variant: self.mode.variant,
                    goal_dir: agent.goal - agent.position,
                    comfort: agent.comfort,
                    extraversion: agent.extraversion,
                };
                marker_displacement(
                    field,
                    agent.position,
                    &agent.assigned_markers,
                    &ctx,
                    agent.max_speed,
                    dt,
                    weighting,
                )
            })
            .collect();

        let avatar_displacement = self.avatar.as_ref().map(|avatar| match avatar.participation {
            Participation::Spectator => avatar.input_dir * (avatar.max_speed * dt),
            _ if avatar.input_dir.is_zero() => Vec2::zero(),
            participation => {
                let variant = if participation == Participation::BioCrowdsAgent {
                    ModeVariant::BioCrowds
                } else {
                    ModeVariant::Extraversion
                };
                let ctx = WeighingContext {
                    variant,
                    goal_dir: avatar.input_dir,
                    comfort: avatar.comfort,
                    extraversion: avatar.extraversion,
                };
                marker_displacement(
                    field,
                    avatar.position,
                    &avatar.assigned_markers,
                    &ctx,
                    avatar.max_speed,
                    dt,
                    weighting,
                )
            }
        });

        for (agent, d) in self.agents.iter_mut().zip(displacements) {
            agent.position += d;
        }
        if let (Some(avatar), Some(d)) = (self.avatar.as_mut(), avatar_displacement) {
            avatar.position += d;
        }
        self.tick += 1;
        self.refresh_assignments();
    }
}

fn sample_region(region: &Region, rng: &mut ChaCha8Rng) -> Vec2<f64> {
    match *region {
        Region::Rect { min, max } => Vec2::new(
            min.x + rng.gen::<f64>() * (max.x - min.x),
            min.y + rng.gen::<f64>() * (max.y - min.y),
        ),
        Region::Circle { center, radius, inner_radius } => {
            // area-uniform over the annulus
            let u = rng.gen::<f64>();
            let r = (inner_radius * inner_radius + u * (radius * radius - inner_radius * inner_radius)).sqrt();
            let phi = rng.gen::<f64>() * std::f64::consts::TAU;
            Vec2::new(center.x + r * phi.cos(), center.y + r * phi.sin())
        }
    }
}

/// Seeded placement: uniform in each group's region, rejecting points
/// outside the world, inside obstacles or closer than the configured
/// separation to an earlier agent.
fn spawn_agents<T: Scalar>(config: &ScenarioConfig) -> Result<Vec<Agent<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(SPAWN_STREAM);
    let sep_sq = config.spawn_separation * config.spawn_separation;

    let mut placed: Vec<Vec2<f64>> = Vec::new();
    let mut agents = Vec::new();
    for (g, group) in config.spawn_groups.iter().enumerate() {
        let goal = config.goals[group.goal_index];
        for k in 0..group.count as usize {
            let pos = (0..SPAWN_ATTEMPTS)
                .map(|_| sample_region(&group.region, &mut rng))
                .find(|&p| {
                    config.world.contains(p)
                        && !config.obstacles.iter().any(|o| o.contains(p))
                        && placed.iter().all(|&q| (p - q).norm_sq() >= sep_sq)
                })
                .ok_or(Error::SpawnFailed { group: g, agent: k })?;
            placed.push(pos);
            agents.push(Agent {
                id: agents.len() as u32,
                position: pos.cast(),
                goal: goal.cast(),
                capture_radius: T::lit(config.capture_radius),
                max_speed: T::lit(config.max_speed),
                extraversion: T::lit(group.extraversion),
                comfort: T::zero(),
                assigned_markers: Vec::new(),
                profile_label: group.profile_label.clone(),
            });
        }
    }
    Ok(agents)
}

/// Runs a scenario for `n_ticks` and returns `n_ticks + 1` frames (the
/// initial state first).
pub fn run(config: &ScenarioConfig, n_ticks: u64) -> Result<Vec<FrameRecord>> {
    run_with(config, n_ticks, &InputTrace::default(), &StandardWeighting)
}

/// Like [`run`], with avatar inputs applied at the start of their tick.
pub fn run_with_trace(
    config: &ScenarioConfig,
    n_ticks: u64,
    trace: &InputTrace,
) -> Result<Vec<FrameRecord>> {
    run_with(config, n_ticks, trace, &StandardWeighting)
}

pub fn run_with<W: MarkerWeighting<f64>>(
    config: &ScenarioConfig,
    n_ticks: u64,
    trace: &InputTrace,
    weighting: &W,
) -> Result<Vec<FrameRecord>> {
    let mut state = SimState::<f64>::from_config(config)?;
    let mut frames = Vec::with_capacity(n_ticks as usize + 1);
    frames.push(FrameRecord::capture(&state));
    for _ in 0..n_ticks {
        if let Some(input) = trace.input_at(state.tick) {
            apply_avatar_input(&mut state, input);
        }
        state.step_with(weighting);
        frames.push(FrameRecord::capture(&state));
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::markers::MarkerField;

    fn v(x: f64, y: f64) -> Vec2<f64> {
        Vec2::new(x, y)
    }

    fn agent(id: u32, pos: Vec2<f64>, goal: Vec2<f64>) -> Agent<f64> {
        Agent {
            id,
            position: pos,
            goal,
            capture_radius: 2.0,
            max_speed: 1.3,
            extraversion: 1.0,
            comfort: 0.0,
            assigned_markers: Vec::new(),
            profile_label: "a".into(),
        }
    }

    fn state(markers: Vec<Vec2<f64>>, agents: Vec<Agent<f64>>) -> SimState<f64> {
        let field = MarkerField::from_positions(Rect::new(v(0.0, 0.0), v(10.0, 10.0)), markers, 2.0);
        SimState::new(field, agents, None, BehaviorMode::new(ModeVariant::BioCrowds), 1.0 / 30.0)
    }

    #[test]
    fn sole_competitor_in_range_wins() {
        let s = state(vec![v(5.5, 5.0)], vec![agent(0, v(5.0, 5.0), v(9.0, 5.0))]);
        assert_eq!(auction_markers(&s).by_agent, vec![vec![0]]);
    }

    #[test]
    fn out_of_range_marker_stays_free() {
        let s = state(
            vec![v(5.0, 8.0)],
            vec![agent(0, v(5.0, 5.0), v(9.0, 5.0)), agent(1, v(2.0, 8.0), v(9.0, 5.0))],
        );
        assert_eq!(auction_markers(&s).by_agent, vec![Vec::<u32>::new(), vec![]]);
    }

    #[test]
    fn exact_tie_goes_to_lowest_id() {
        let s = state(
            vec![v(5.0, 5.0)],
            vec![agent(7, v(6.0, 5.0), v(9.0, 5.0)), agent(3, v(4.0, 5.0), v(9.0, 5.0))],
        );
        assert_eq!(auction_markers(&s).by_agent, vec![vec![], vec![0]]);
    }

    #[test]
    fn nearest_out_of_range_does_not_block_eligible_competitor() {
        let mut near = agent(0, v(5.0, 5.0), v(9.0, 5.0));
        near.capture_radius = 0.5;
        let far = agent(1, v(6.5, 5.0), v(9.0, 5.0));
        let s = state(vec![v(5.8, 5.0)], vec![near, far]);
        assert_eq!(auction_markers(&s).by_agent, vec![vec![], vec![0]]);
    }

    #[test]
    fn starved_agent_does_not_move() {
        let mut s = state(vec![v(1.0, 1.0)], vec![agent(0, v(8.0, 8.0), v(9.0, 9.0))]);
        let before = s.agents[0].position;
        s.step();
        assert_eq!(s.agents[0].position, before);
        assert_eq!(s.tick, 1);
    }

    #[test]
    fn symmetric_markers_move_straight_to_goal() {
        let markers = vec![v(5.5, 5.5), v(5.5, 4.5), v(6.0, 5.8), v(6.0, 4.2), v(4.5, 5.3), v(4.5, 4.7)];
        let mut s = state(markers, vec![agent(0, v(5.0, 5.0), v(9.0, 5.0))]);
        s.step();
        let d = s.agents[0].position - v(5.0, 5.0);
        assert!(d.x > 0.0);
        assert!(d.y.abs() < 1e-12);
    }

    #[test]
    fn displacement_respects_speed_clamp() {
        let markers: Vec<_> = (0..40).map(|i| v(5.0 + 1.9 * (i as f64 * 0.3).cos(), 5.0 + 1.9 * (i as f64 * 0.3).sin())).collect();
        let mut s = state(markers, vec![agent(0, v(5.0, 5.0), v(9.0, 5.0))]);
        s.mode = BehaviorMode::new(ModeVariant::NormalLife);
        let before = s.agents[0].position;
        s.step();
        assert!(s.agents[0].position.distance(before) <= 1.3 / 30.0 + 1e-9);
    }
}
