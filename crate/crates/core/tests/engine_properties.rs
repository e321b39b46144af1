use marker_crowds::engine::{Agent, AuctionResult, SimState};
use marker_crowds::geometry::{Rect, Vec2};
use marker_crowds::markers::MarkerField;
use marker_crowds::{auction_markers, preset, run, BehaviorMode, ModeVariant};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(x: f64, y: f64) -> Vec2<f64> {
    Vec2::new(x, y)
}

fn random_instance(seed: u64) -> SimState<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = Rect::new(v(0.0, 0.0), v(8.0, 8.0));
    let n_markers = rng.gen_range(1..=200);
    let markers = (0..n_markers)
        .map(|_| v(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0)))
        .collect();
    let n_agents = rng.gen_range(1..=5);
    let agents = (0..n_agents)
        .map(|i| Agent {
            id: i as u32 * 3 + rng.gen_range(0..3),
            position: v(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0)),
            goal: v(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0)),
            capture_radius: rng.gen_range(0.5..3.0),
            max_speed: 1.3,
            extraversion: 1.0,
            comfort: 0.0,
            assigned_markers: Vec::new(),
            profile_label: "a".into(),
        })
        .collect();
    // cell size deliberately unrelated to the radii
    let field = MarkerField::from_positions(world, markers, rng.gen_range(0.7..2.5));
    SimState::new(field, agents, None, BehaviorMode::new(ModeVariant::BioCrowds), 1.0 / 30.0)
}

/// All-pairs nearest eligible competitor, no spatial index.
fn brute_force_auction(state: &SimState<f64>) -> AuctionResult {
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

#[test]
fn auction_matches_brute_force_on_100_instances() {
    for seed in 0..100 {
        let state = random_instance(seed);
        assert_eq!(auction_markers(&state), brute_force_auction(&state), "seed {seed}");
    }
}

#[test]
fn auction_exclusivity_and_range() {
    for seed in 100..150 {
        let state = random_instance(seed);
        let auction = auction_markers(&state);
        let mut all: Vec<u32> = auction.by_agent.iter().flatten().copied().collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n);
        for (agent, ids) in state.agents.iter().zip(&auction.by_agent) {
            for &id in ids {
                let d = state.marker_field.marker(id).position.distance(agent.position);
                assert!(d <= agent.capture_radius + 1e-9);
            }
        }
    }
}

#[test]
fn speed_bound_and_blocking_over_a_run() {
    for variant in [ModeVariant::BioCrowds, ModeVariant::NormalLife, ModeVariant::Extraversion] {
        let mut config = preset("fig2_hetero").unwrap();
        config.mode.variant = variant;
        let mut state = SimState::<f64>::from_config(&config).unwrap();
        let bound = config.max_speed * config.dt + 1e-9;
        for _ in 0..200 {
            let before: Vec<_> = state.agents.iter().map(|a| (a.position, a.assigned_markers.is_empty())).collect();
            state.step();
            for ((pos, starved), a) in before.iter().zip(&state.agents) {
                assert!(a.position.distance(*pos) <= bound);
                if *starved {
                    assert_eq!(a.position, *pos);
                }
            }
        }
    }
}

#[test]
fn zero_ticks_gives_single_frame() {
    let frames = run(&preset("fig2_hetero").unwrap(), 0).unwrap();
    assert_eq!(frames.len(), 1);
    assert_eq!(frames[0].tick, 0);
}

#[test]
fn fig2_full_run_shape() {
    let frames = run(&preset("fig2_hetero").unwrap(), 1500).unwrap();
    assert_eq!(frames.len(), 1501);
    assert!(frames.iter().all(|f| f.agents.len() == 50));
    assert!(frames.windows(2).all(|w| w[1].tick == w[0].tick + 1));
}

#[test]
fn run_equals_iterated_step() {
    let mut config = preset("fig3_homo_e08").unwrap();
    config.spawn_groups[0].count = 10;
    let frames = run(&config, 10).unwrap();
    let mut state = SimState::<f64>::from_config(&config).unwrap();
    for _ in 0..10 {
        state.step();
    }
    let last = frames.last().unwrap();
    for (rec, a) in last.agents.iter().zip(&state.agents) {
        assert_eq!((rec.x, rec.y), (a.position.x, a.position.y));
    }
}

#[test]
fn agent_order_does_not_change_trajectories() {
    let config = preset("fig2_hetero").unwrap();
    let mut forward = SimState::<f64>::from_config(&config).unwrap();
    let mut reversed = forward.clone();
    reversed.agents.reverse();
    reversed.refresh_assignments();
    for _ in 0..100 {
        forward.step();
        reversed.step();
    }
    for a in &forward.agents {
        let b = reversed.agents.iter().find(|b| b.id == a.id).unwrap();
        assert_eq!(a.position, b.position);
        assert_eq!(a.assigned_markers, b.assigned_markers);
    }
}

#[test]
fn f32_engine_tracks_f64_engine() {
    let mut config = preset("fig5_biocrowds").unwrap();
    config.spawn_groups[0].count = 8;
    let mut a = SimState::<f64>::from_config(&config).unwrap();
    let mut b = SimState::<f32>::from_config(&config).unwrap();
    for _ in 0..30 {
        a.step();
        b.step();
    }
    for (x, y) in a.agents.iter().zip(&b.agents) {
        assert!((x.position.x - y.position.x as f64).abs() < 1e-3);
        assert!((x.position.y - y.position.y as f64).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn exclusivity_holds_for_random_layouts(seed in any::<u64>()) {
        let state = random_instance(seed);
        let auction = auction_markers(&state);
        let total: usize = auction.by_agent.iter().map(Vec::len).sum();
        let mut owned: Vec<u32> = auction.by_agent.concat();
        owned.sort_unstable();
        owned.dedup();
        prop_assert_eq!(owned.len(), total);
    }
}
