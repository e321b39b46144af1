use marker_crowds::avatar::{Avatar, Participation};
use marker_crowds::engine::{Agent, SimState};
use marker_crowds::geometry::{Rect, Vec2};
use marker_crowds::markers::MarkerField;
use marker_crowds::{apply_avatar_input, auction_markers, preset, AvatarMode, BehaviorMode, ModeVariant};

fn v(x: f64, y: f64) -> Vec2<f64> {
    Vec2::new(x, y)
}

fn avatar(pos: Vec2<f64>, participation: Participation) -> Avatar<f64> {
    Avatar {
        position: pos,
        input_dir: Vec2::zero(),
        max_speed: 1.3,
        participation,
        capture_radius: 2.0,
        extraversion: 1.0,
        comfort: 0.0,
        assigned_markers: Vec::new(),
    }
}

#[test]
fn spectator_walking_through_crowd_changes_no_assignment() {
    let mut config = preset("scenario1").unwrap();
    config.avatar.start = Some(v(6.0, 8.0));
    let mut with = SimState::<f64>::from_config(&config).unwrap();
    config.avatar_mode = AvatarMode::None;
    let mut without = SimState::<f64>::from_config(&config).unwrap();

    apply_avatar_input(&mut with, v(1.0, 0.0));
    for _ in 0..120 {
        with.step();
        without.step();
        for (a, b) in with.agents.iter().zip(&without.agents) {
            assert_eq!(a.assigned_markers, b.assigned_markers);
        }
    }
    let av = with.avatar.as_ref().unwrap();
    assert!(av.assigned_markers.is_empty());
    assert!((av.position.x - (6.0 + 120.0 * 1.3 / 30.0)).abs() < 1e-9);
}

fn agent(id: u32, pos: Vec2<f64>) -> Agent<f64> {
    Agent {
        id,
        position: pos,
        goal: v(9.0, 5.0),
        capture_radius: 2.0,
        max_speed: 1.3,
        extraversion: 1.0,
        comfort: 0.0,
        assigned_markers: Vec::new(),
        profile_label: "a".into(),
    }
}

#[test]
fn competing_avatar_takes_markers_nearest_to_it() {
    let world = Rect::new(v(0.0, 0.0), v(10.0, 10.0));
    let markers: Vec<_> = (0..=40).map(|i| v(3.0 + i as f64 * 0.1, 5.0)).collect();
    let field = MarkerField::from_positions(world, markers, 2.0);
    let agents = vec![agent(0, v(3.0, 5.0)), agent(1, v(7.0, 5.0))];
    let mode = BehaviorMode::new(ModeVariant::BioCrowds);

    let alone = SimState::new(field.clone(), agents.clone(), None, mode, 1.0 / 30.0);
    let amid = SimState::new(field, agents, Some(avatar(v(5.0, 5.0), Participation::BioCrowdsAgent)), mode, 1.0 / 30.0);
    let before = auction_markers(&alone);
    let after = auction_markers(&amid);

    let won = after.avatar.clone().unwrap();
    assert!(!won.is_empty());
    for &id in &won {
        // marker left one of the agents, and the avatar is strictly nearest
        assert!(before.by_agent.iter().any(|l| l.contains(&id)));
        let p = amid.marker_field.marker(id).position;
        assert!(amid.agents.iter().all(|a| p.distance(v(5.0, 5.0)) < p.distance(a.position)));
    }
    for (b, a) in before.by_agent.iter().zip(&after.by_agent) {
        assert!(a.len() < b.len());
    }
}

#[test]
fn starved_competing_avatar_ignores_input() {
    let world = Rect::new(v(0.0, 0.0), v(10.0, 10.0));
    let field = MarkerField::from_positions(world, vec![v(1.0, 1.0)], 2.0);
    for p in [Participation::BioCrowdsAgent, Participation::NormalLifeAgent] {
        let mut s = SimState::new(field.clone(), vec![], Some(avatar(v(8.0, 8.0), p)), BehaviorMode::new(ModeVariant::NormalLife), 1.0 / 30.0);
        apply_avatar_input(&mut s, v(-1.0, 0.0));
        for _ in 0..10 {
            s.step();
        }
        assert_eq!(s.avatar.unwrap().position, v(8.0, 8.0));
    }
}

#[test]
fn competing_avatar_moves_along_input_where_markers_allow() {
    let mut s = SimState::<f64>::from_config(&preset("scenario2").unwrap()).unwrap();
    let start = s.avatar.as_ref().unwrap().position;
    apply_avatar_input(&mut s, v(0.0, 1.0));
    for _ in 0..30 {
        s.step();
    }
    let d = s.avatar.as_ref().unwrap().position - start;
    assert!(d.y > 0.3, "avatar moved {d:?}");
    assert!(d.norm() <= 1.3 + 1e-9);

    // zero input: stands still but keeps its markers
    apply_avatar_input(&mut s, Vec2::zero());
    let here = s.avatar.as_ref().unwrap().position;
    s.step();
    let av = s.avatar.as_ref().unwrap();
    assert_eq!(av.position, here);
    assert!(!av.assigned_markers.is_empty());
}

#[test]
fn oversized_input_is_normalized() {
    let mut s = SimState::<f64>::from_config(&preset("scenario1").unwrap()).unwrap();
    apply_avatar_input(&mut s, v(3.0, 4.0));
    let dir = s.avatar.as_ref().unwrap().input_dir;
    assert!((dir.norm() - 1.0).abs() < 1e-12);
}
