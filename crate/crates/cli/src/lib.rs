//! Verification battery behind `marker-crowds verify`.
//!
//! Every check returns a [`CheckOutcome`]; seeded checks run their seeds in
//! parallel and merge results in seed order, so output is deterministic.

pub mod oracle;

use std::time::{Duration, Instant};

use marker_crowds::behavior::DEFAULT_MARKER_CAP;
use marker_crowds::engine::{run_with, Agent};
use marker_crowds::geometry::{Polygon, Rect};
use marker_crowds::{
    auction_markers, biocrowds_weights, comfort, comfort_bias, compute_group_metrics,
    extraversion_weights, motion_vector, preset, state_hash, BehaviorMode, FrameRecord, InputEvent,
    InputTrace, MarkerField, MarkerInput, MarkerWeighting, ModeVariant, ScenarioConfig, SimState,
    StandardWeighting, Vec2, WeighingContext, PRESET_NAMES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Wall-clock budget for the extraversion-ordering check.
pub const EXTRAVERSION_BUDGET: Duration = Duration::from_secs(60);
/// Ticks simulated by the figure checks.
pub const FIGURE_TICKS: u64 = 1500;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome { name, passed, detail: detail.into() }
    }

    fn failed(name: &'static str, err: impl std::fmt::Display) -> Self {
        CheckOutcome::new(name, false, format!("error: {err}"))
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

/// Seeds out of `k` that must satisfy an ordering (9 of 10).
pub fn required_passes(k: usize) -> usize {
    (9 * k).div_ceil(10)
}

fn with_seed(mut config: ScenarioConfig, seed: u64) -> ScenarioConfig {
    config.seed = seed;
    config
}

fn final_frame(config: &ScenarioConfig, weighting: &(impl MarkerWeighting<f64> + Sync)) -> marker_crowds::error::Result<FrameRecord> {
    let frames = run_with(config, FIGURE_TICKS, &InputTrace::default(), weighting)?;
    Ok(frames.into_iter().last().expect("initial frame"))
}

/// Runs `per_seed` for seeds `1..=k` in parallel; results come back in seed order.
fn per_seed<R: Send>(k: usize, f: impl Fn(u64) -> R + Sync + Send) -> Vec<(u64, R)> {
    (1..=k as u64).into_par_iter().map(|s| (s, f(s))).collect()
}

fn tally(name: &'static str, k: usize, rows: Vec<(u64, marker_crowds::error::Result<(bool, String)>)>, extra: &str) -> CheckOutcome {
    let mut passes = 0;
    let mut lines = Vec::new();
    for (seed, row) in rows {
        match row {
            Ok((ok, text)) => {
                passes += ok as usize;
                if !ok {
                    lines.push(format!("seed {seed}: {text}"));
                }
            }
            Err(e) => return CheckOutcome::failed(name, format!("seed {seed}: {e}")),
        }
    }
    let need = required_passes(k);
    let mut detail = format!("{passes}/{k} seeds (need {need}){extra}");
    if !lines.is_empty() {
        detail.push_str("; failing: ");
        detail.push_str(&lines.join("; "));
    }
    CheckOutcome::new(name, passes >= need, detail)
}

/// Heterogeneous crowd: the E=1.0 group ends closer to the goal and tighter
/// than the E=0.8 group.
pub fn extraversion_ordering<W: MarkerWeighting<f64> + Sync>(k: usize, weighting: &W) -> CheckOutcome {
    const NAME: &str = "extraversion ordering";
    let base = match preset("fig2_hetero") {
        Ok(c) => c,
        Err(e) => return CheckOutcome::failed(NAME, e),
    };
    let goal = base.goals[0];
    let started = Instant::now();
    let rows = per_seed(k, |seed| {
        let frame = final_frame(&with_seed(base.clone(), seed), weighting)?;
        let hi = compute_group_metrics(&frame, "E=1.0", goal)?;
        let lo = compute_group_metrics(&frame, "E=0.8", goal)?;
        let ok = hi.mean_dist_to_goal < lo.mean_dist_to_goal
            && hi.mean_intra_pairwise_dist < lo.mean_intra_pairwise_dist;
        Ok((
            ok,
            format!(
                "goal dist {:.3} vs {:.3}, pairwise {:.3} vs {:.3}",
                hi.mean_dist_to_goal, lo.mean_dist_to_goal, hi.mean_intra_pairwise_dist, lo.mean_intra_pairwise_dist
            ),
        ))
    });
    let elapsed = started.elapsed();
    let mut outcome = tally(NAME, k, rows, &format!(", {:.1}s", elapsed.as_secs_f64()));
    if elapsed > EXTRAVERSION_BUDGET {
        outcome.passed = false;
        outcome.detail.push_str(&format!("; over the {}s budget", EXTRAVERSION_BUDGET.as_secs()));
    }
    outcome
}

/// Comfort-seeking crowds spread wider than goal-seeking ones from the same spawns.
pub fn dispersal_ordering(k: usize) -> CheckOutcome {
    const NAME: &str = "dispersal ordering";
    let (normal, bio) = match (preset("fig4_normal_life"), preset("fig5_biocrowds")) {
        (Ok(n), Ok(b)) => (n, b),
        (Err(e), _) | (_, Err(e)) => return CheckOutcome::failed(NAME, e),
    };
    let rows = per_seed(k, |seed| {
        let hull = |config: &ScenarioConfig| -> marker_crowds::error::Result<f64> {
            let frame = final_frame(&with_seed(config.clone(), seed), &StandardWeighting)?;
            Ok(compute_group_metrics(&frame, "crowd", config.goals[0])?.convex_hull_area)
        };
        let (n, b) = (hull(&normal)?, hull(&bio)?);
        Ok((n > b, format!("hull {n:.2} vs {b:.2}")))
    });
    tally(NAME, k, rows, "")
}

/// All-E=0.8 crowd keeps more personal space than the same crowd at E=1.0.
pub fn homogeneous_extraversion(k: usize) -> CheckOutcome {
    const NAME: &str = "homogeneous extraversion";
    let low = match preset("fig3_homo_e08") {
        Ok(c) => c,
        Err(e) => return CheckOutcome::failed(NAME, e),
    };
    let mut high = low.clone();
    for group in &mut high.spawn_groups {
        group.extraversion = 1.0;
    }
    let label = low.spawn_groups[0].profile_label.clone();
    let rows = per_seed(k, |seed| {
        let nn = |config: &ScenarioConfig| -> marker_crowds::error::Result<f64> {
            let frame = final_frame(&with_seed(config.clone(), seed), &StandardWeighting)?;
            Ok(compute_group_metrics(&frame, &label, config.goals[0])?.mean_nearest_neighbor_dist)
        };
        let (l, h) = (nn(&low)?, nn(&high)?);
        Ok((l > h, format!("nearest neighbour {l:.3} vs {h:.3}")))
    });
    tally(NAME, k, rows, "")
}

fn random_markers(rng: &mut ChaCha8Rng) -> (Vec2, Vec<MarkerInput<f64>>) {
    let goal_dir = Vec2::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
    let n = rng.gen_range(1..=120);
    let markers = (0..n)
        .map(|i| MarkerInput {
            marker_id: i,
            offset: Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        })
        .collect();
    (goal_dir, markers)
}

/// Full extraversion is scaled goal seeking; half extraversion is half of
/// comfort seeking. Both through the engine's weighting entry point.
pub fn mode_collapse(instances: u64) -> CheckOutcome {
    const NAME: &str = "mode collapse";
    const TOL: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (goal_dir, markers) = random_markers(&mut rng);
        let c = comfort(markers.len(), DEFAULT_MARKER_CAP);
        let bias: f64 = comfort_bias(c);
        let motion = |variant, extraversion| {
            let ctx = WeighingContext { variant, goal_dir, comfort: c, extraversion };
            motion_vector(&StandardWeighting.weigh(&ctx, &markers))
        };
        let bio = motion(ModeVariant::BioCrowds, 1.0);
        let normal = motion(ModeVariant::NormalLife, 1.0);
        let full = motion(ModeVariant::Extraversion, 1.0);
        let half = motion(ModeVariant::Extraversion, 0.5);
        let e1 = (full - bio * bias).x.abs().max((full - bio * bias).y.abs());
        let e2 = (half - normal * 0.5).x.abs().max((half - normal * 0.5).y.abs());
        worst = worst.max(e1).max(e2);
    }
    CheckOutcome::new(NAME, worst <= TOL, format!("{instances} configurations, max deviation {worst:.3e} (tol {TOL:e})"))
}

/// Spot values of the weighting formulas.
pub fn equation_units() -> CheckOutcome {
    const NAME: &str = "equation units";
    let mut failures = Vec::new();

    let mut worst_sum: f64 = 0.0;
    for seed in 0..1000 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let (goal_dir, markers) = random_markers(&mut rng);
        let total: f64 = biocrowds_weights(goal_dir, &markers).iter().map(|w| w.weight).sum();
        worst_sum = worst_sum.max((total - 1.0).abs());
    }
    if worst_sum > 1e-9 {
        failures.push(format!("weight sum off by {worst_sum:e}"));
    }

    let c: f64 = comfort(70, 70);
    if c != 1.0 {
        failures.push(format!("comfort(70, 70) = {c}"));
    }
    let b: f64 = comfort_bias(1.0 / 3.0);
    if b != 0.5 {
        failures.push(format!("comfort_bias(1/3) = {b:.17}"));
    }

    let one = |bias: f64, w: f64, e: f64| {
        let base = [marker_crowds::WeightedMarker { marker_id: 0, offset: Vec2::new(1.0, 0.0), weight: w }];
        extraversion_weights(&base, bias, e)[0].weight
    };
    let spots = [
        ("bias=1 E=1 w=0.37", one(1.0, 0.37, 1.0), 0.37),
        ("bias=0.5 w=0.2 E=0.8", one(0.5, 0.2, 0.8), 0.18),
        ("E=0 bias=0.3 w=0.9", one(0.3, 0.9, 0.0), 0.7),
        ("E=0 bias=0.3 w=0.1", one(0.3, 0.1, 0.0), 0.7),
    ];
    for (label, got, want) in spots {
        if (got - want).abs() > 1e-12 {
            failures.push(format!("extraversion weight {label} = {got}, want {want}"));
        }
    }

    if failures.is_empty() {
        CheckOutcome::new(NAME, true, format!("weight sums within {worst_sum:.1e}, comfort 1, bias 0.5, {} spot values", spots.len()))
    } else {
        CheckOutcome::new(NAME, false, failures.join("; "))
    }
}

pub fn auction_oracle(instances: u64) -> CheckOutcome {
    const NAME: &str = "auction oracle";
    let mismatches: Vec<u64> = (0..instances)
        .filter(|&seed| {
            let state = oracle::random_auction_instance(seed);
            auction_markers(&state) != oracle::brute_force_auction(&state)
        })
        .collect();
    let detail = if mismatches.is_empty() {
        format!("{instances} instances match")
    } else {
        format!("{} of {instances} instances differ, seeds {:?}", mismatches.len(), mismatches)
    };
    CheckOutcome::new(NAME, mismatches.is_empty(), detail)
}

/// Every preset run twice gives the same hash.
pub fn determinism() -> CheckOutcome {
    const NAME: &str = "determinism";
    let rows: Vec<(&str, marker_crowds::error::Result<(String, String)>)> = PRESET_NAMES
        .par_iter()
        .map(|&name| {
            let hashes = preset(name).and_then(|config| {
                let a = marker_crowds::run(&config, FIGURE_TICKS)?;
                let b = marker_crowds::run(&config, FIGURE_TICKS)?;
                Ok((state_hash(&a), state_hash(&b)))
            });
            (name, hashes)
        })
        .collect();
    let mut differing = Vec::new();
    for (name, row) in rows {
        match row {
            Ok((a, b)) if a != b => differing.push(format!("{name}: {a} vs {b}")),
            Ok(_) => {}
            Err(e) => return CheckOutcome::failed(NAME, format!("{name}: {e}")),
        }
    }
    let detail = if differing.is_empty() {
        format!("{} presets x {FIGURE_TICKS} ticks reproduce", PRESET_NAMES.len())
    } else {
        differing.join("; ")
    };
    CheckOutcome::new(NAME, differing.is_empty(), detail)
}

/// An agent whose capture disc holds no markers stays where it is.
pub fn blocking() -> CheckOutcome {
    const NAME: &str = "blocking";
    const TICKS: u64 = 100;
    let world = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(20.0, 20.0));
    // markers everywhere except a 10 m square pocket around the agent
    let pocket = Polygon::new(vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(10.0, 0.0),
        Vec2::new(10.0, 10.0),
        Vec2::new(0.0, 10.0),
    ]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let markers: Vec<Vec2> = (0..2400)
        .map(|_| Vec2::new(rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0)))
        .filter(|p| !pocket.contains(*p))
        .collect();
    let field = MarkerField::from_positions(world, markers, 2.0);
    let start = Vec2::new(4.0, 4.0);
    let agent = Agent {
        id: 0,
        position: start,
        goal: Vec2::new(18.0, 18.0),
        capture_radius: 2.0,
        max_speed: 1.3,
        extraversion: 1.0,
        comfort: 0.0,
        assigned_markers: Vec::new(),
        profile_label: "starved".into(),
    };
    let mut state = SimState::new(field, vec![agent], None, BehaviorMode::new(ModeVariant::Extraversion), 1.0 / 30.0);
    let mut travelled = 0.0;
    let mut last = start;
    for _ in 0..TICKS {
        state.step();
        let now = state.agents[0].position;
        travelled += now.distance(last);
        last = now;
    }
    CheckOutcome::new(NAME, travelled == 0.0, format!("moved {travelled} m over {TICKS} ticks"))
}

/// Steering trace used by the replay check.
pub fn scripted_trace() -> InputTrace {
    InputTrace::new(vec![
        InputEvent { tick: 0, dx: 1.0, dy: 0.0 },
        InputEvent { tick: 60, dx: 0.6, dy: 0.8 },
        InputEvent { tick: 120, dx: -1.0, dy: 0.0 },
        InputEvent { tick: 121, dx: 0.0, dy: -1.0 },
        InputEvent { tick: 200, dx: 0.0, dy: 0.0 },
        InputEvent { tick: 240, dx: 1.0, dy: 1.0 },
    ])
}

/// A session served over TCP and driven by a trace hashes like a headless run.
pub fn replay_equivalence() -> CheckOutcome {
    const NAME: &str = "replay equivalence";
    const TICKS: u64 = 300;
    let trace = scripted_trace();
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["scenario1", "scenario2", "scenario3"] {
        let result = preset(name)
            .map_err(|e| e.to_string())
            .and_then(|c| marker_crowds_server::replay_hashes(&c, &trace, TICKS).map_err(|e| e.to_string()));
        match result {
            Ok((served, headless)) => {
                let same = served == headless;
                ok &= same;
                parts.push(if same {
                    format!("{name} {}", &served[..12])
                } else {
                    format!("{name} served {served} headless {headless}")
                });
            }
            Err(e) => return CheckOutcome::failed(NAME, format!("{name}: {e}")),
        }
    }
    CheckOutcome::new(NAME, ok, parts.join(", "))
}

/// Full battery in a fixed order; `k` is the seed count for the figure checks.
pub fn run_battery(k: usize) -> Vec<CheckOutcome> {
    vec![
        extraversion_ordering(k, &StandardWeighting),
        dispersal_ordering(k),
        homogeneous_extraversion(k),
        mode_collapse(1000),
        equation_units(),
        auction_oracle(100),
        determinism(),
        blocking(),
        replay_equivalence(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_of_ten() {
        assert_eq!(required_passes(10), 9);
        assert_eq!(required_passes(1), 1);
        assert_eq!(required_passes(20), 18);
        assert_eq!(required_passes(5), 5);
    }

    #[test]
    fn cheap_checks_pass() {
        for outcome in [mode_collapse(200), equation_units(), auction_oracle(100), blocking()] {
            assert!(outcome.passed, "{}", outcome.line());
        }
    }

    #[test]
    fn oracle_kernel_agrees_with_engine_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let g = Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let o = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let engine = marker_crowds::kernel_f(g, o);
            assert!((engine - oracle::kernel_by_angles(g, o)).abs() < 1e-12);
        }
    }
}
