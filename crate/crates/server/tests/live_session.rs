use std::time::Duration;

use marker_crowds::{preset, InputEvent, InputTrace, Participation};
use marker_crowds_server::client::Client;
use marker_crowds_server::protocol::{codes, ClientMessage, ServerMessage};
use marker_crowds_server::{replay_hashes, Server, ServerHandle, ServerOptions};

fn live_server(scenario: &str, tick_ms: u64) -> ServerHandle {
    let mut options = ServerOptions::new(preset(scenario).unwrap());
    options.tick_interval = Some(Duration::from_millis(tick_ms));
    Server::bind("127.0.0.1:0", options).unwrap().spawn().unwrap()
}

fn next_frame(client: &mut Client) -> marker_crowds::FrameRecord {
    loop {
        match client.recv().unwrap().expect("stream open") {
            ServerMessage::Frame(f) => return f,
            ServerMessage::Error { code, msg } => panic!("{code}: {msg}"),
            _ => {}
        }
    }
}

#[test]
fn spectator_scenario_streams_monotone_frames() {
    let server = live_server("scenario1", 1);
    let mut client = Client::connect(server.addr).unwrap();
    assert!(matches!(client.hello().unwrap(), ServerMessage::Hello { version: 1, .. }));
    let info = client.start(&ClientMessage::start_preset("scenario1")).unwrap();
    assert_eq!(info.scenario, "scenario1");
    assert!(!info.markers.is_empty());

    let first = next_frame(&mut client);
    assert_eq!(first.tick, 0);
    assert_eq!(first.avatar.as_ref().unwrap().participation, Participation::Spectator);
    client.send(&ClientMessage::Input { dx: 1.0, dy: 0.0 }).unwrap();
    let mut last = first.clone();
    for _ in 0..40 {
        let f = next_frame(&mut client);
        assert_eq!(f.tick, last.tick + 1);
        last = f;
    }
    assert!(last.avatar.unwrap().x > first.avatar.unwrap().x);
    client.send(&ClientMessage::Stop).unwrap();
}

#[test]
fn second_client_is_turned_away() {
    let server = live_server("scenario2", 5);
    let mut first = Client::connect(server.addr).unwrap();
    first.hello().unwrap();
    first.start(&ClientMessage::start_preset("scenario2")).unwrap();

    let mut second = Client::connect(server.addr).unwrap();
    match second.recv().unwrap() {
        Some(ServerMessage::Error { code, msg }) => {
            assert_eq!(code, codes::SESSION_OCCUPIED);
            assert_eq!(msg, "session occupied");
        }
        other => panic!("expected error, got {other:?}"),
    }
    assert!(second.recv().unwrap().is_none());
}

#[test]
fn disconnect_pauses_and_resume_continues() {
    let server = live_server("scenario2", 2);
    let mut client = Client::connect(server.addr).unwrap();
    client.hello().unwrap();
    client.start(&ClientMessage::start_preset("scenario2")).unwrap();
    for _ in 0..10 {
        next_frame(&mut client);
    }
    client.send(&ClientMessage::Input { dx: 0.0, dy: 1.0 }).unwrap();
    client.shutdown();

    // the old connection must be released before a new one is accepted
    let mut resumed = None;
    for _ in 0..100 {
        std::thread::sleep(Duration::from_millis(20));
        let mut c = Client::connect(server.addr).unwrap();
        c.send(&ClientMessage::Hello { version: 1 }).unwrap();
        if let Some(ServerMessage::Hello { .. }) = c.recv().unwrap() {
            resumed = Some(c);
            break;
        }
    }
    let mut client = resumed.expect("server freed the session");
    let info = client.start(&ClientMessage::resume()).unwrap();
    assert!(info.tick >= 10);
    let f = next_frame(&mut client);
    assert_eq!(f.tick, info.tick);
    assert_eq!(next_frame(&mut client).tick, info.tick + 1);
}

#[test]
fn resume_without_paused_session_is_an_error() {
    let server = live_server("scenario2", 5);
    let mut client = Client::connect(server.addr).unwrap();
    client.hello().unwrap();
    client.send(&ClientMessage::resume()).unwrap();
    match client.recv().unwrap() {
        Some(ServerMessage::Error { code, .. }) => assert_eq!(code, codes::NOTHING_TO_RESUME),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn malformed_message_closes_session() {
    let server = live_server("scenario2", 5);
    let mut client = Client::connect(server.addr).unwrap();
    client.hello().unwrap();
    client.start(&ClientMessage::start_preset("scenario2")).unwrap();
    client.send_raw("{\"kind\":\"teleport\"}").unwrap();
    let mut saw_error = false;
    while let Some(msg) = client.recv().unwrap() {
        if let ServerMessage::Error { code, .. } = msg {
            assert_eq!(code, codes::MALFORMED);
            saw_error = true;
        }
    }
    assert!(saw_error);
}

#[test]
fn version_mismatch_is_reported() {
    let server = live_server("scenario1", 5);
    let mut client = Client::connect(server.addr).unwrap();
    client.send(&ClientMessage::Hello { version: 99 }).unwrap();
    match client.recv().unwrap() {
        Some(ServerMessage::Error { code, .. }) => assert_eq!(code, codes::VERSION_MISMATCH),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unknown_preset_in_start_is_reported() {
    let server = live_server("scenario1", 5);
    let mut client = Client::connect(server.addr).unwrap();
    client.hello().unwrap();
    client.send(&ClientMessage::start_preset("scenario9")).unwrap();
    match client.recv().unwrap() {
        Some(ServerMessage::Error { code, msg }) => {
            assert_eq!(code, codes::BAD_START);
            assert!(msg.contains("scenario1"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn served_replay_matches_headless_replay() {
    let trace = InputTrace::new(vec![
        InputEvent { tick: 0, dx: -1.0, dy: 0.0 },
        InputEvent { tick: 90, dx: 0.0, dy: 1.0 },
        InputEvent { tick: 150, dx: 0.0, dy: 0.0 },
    ]);
    for name in ["scenario1", "scenario2", "scenario3"] {
        let (served, headless) = replay_hashes(&preset(name).unwrap(), &trace, 240).unwrap();
        assert_eq!(served, headless, "{name}");
    }
}
