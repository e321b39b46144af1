//! Reference computations used by the verification battery. Nothing here
//! goes through the engine's grid index or the weighting code paths.

use marker_crowds::engine::{Agent, AuctionResult};
use marker_crowds::geometry::Rect;
use marker_crowds::markers::MarkerField;
use marker_crowds::{BehaviorMode, ModeVariant, SimState, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Up to 5 agents with random radii and up to 200 markers in an 8 m square.
/// The grid cell size is drawn independently of the radii.
pub fn random_auction_instance(seed: u64) -> SimState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(8.0, 8.0));
    let n_markers = rng.gen_range(1..=200);
    let markers = (0..n_markers)
        .map(|_| Vec2::new(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0)))
        .collect();
    let n_agents = rng.gen_range(1..=5);
    let agents = (0..n_agents)
        .map(|i| Agent {
            id: i,
            position: Vec2::new(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0)),
            goal: Vec2::new(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0)),
            capture_radius: rng.gen_range(0.5..3.0),
            max_speed: 1.3,
            extraversion: 1.0,
            comfort: 0.0,
            assigned_markers: Vec::new(),
            profile_label: "a".into(),
        })
        .collect();
    let field = MarkerField::from_positions(world, markers, rng.gen_range(0.7..2.5));
    SimState::new(field, agents, None, BehaviorMode::new(ModeVariant::BioCrowds), 1.0 / 30.0)
}

/// All-pairs nearest eligible competitor with lowest-id tie break.
pub fn brute_force_auction(state: &SimState) -> AuctionResult {
    let mut by_agent = vec![Vec::new(); state.agents.len()];
    for m in state.marker_field.markers() {
        let mut best: Option<(f64, u32, usize)> = None;
        for (slot, a) in state.agents.iter().enumerate() {
            let dx = m.position.x - a.position.x;
            let dy = m.position.y - a.position.y;
            let d = dx * dx + dy * dy;
            if d > a.capture_radius * a.capture_radius {
                continue;
            }
            if best.is_none_or(|(bd, bid, _)| d < bd || (d == bd && a.id < bid)) {
                best = Some((d, a.id, slot));
            }
        }
        if let Some((_, _, slot)) = best {
            by_agent[slot].push(m.id);
        }
    }
    AuctionResult { by_agent, avatar: None }
}

/// Goal-seeking kernel through polar angles rather than a dot product.
pub fn kernel_by_angles(goal: Vec2, offset: Vec2) -> f64 {
    let mut theta = (offset.y.atan2(offset.x) - goal.y.atan2(goal.x)).abs();
    if theta > std::f64::consts::PI {
        theta = std::f64::consts::TAU - theta;
    }
    (1.0 + theta.cos()) / (1.0 + offset.x.hypot(offset.y))
}
