//! Network-free session core shared by the live server and the tests.

use std::sync::{Arc, Mutex};

use marker_crowds::{apply_avatar_input, FrameRecord, InputTrace, ScenarioConfig, SimState, Vec2};

use crate::protocol::StartInfo;

/// Single-slot, last-writer-wins input box. The network side posts, the
/// simulation loop takes once per tick.
#[derive(Debug, Clone, Default)]
pub struct InputMailbox {
    slot: Arc<Mutex<Option<Vec2>>>,
}

impl InputMailbox {
    pub fn post(&self, dir: Vec2) {
        *self.slot.lock().expect("mailbox lock") = Some(dir);
    }

    pub fn take(&self) -> Option<Vec2> {
        self.slot.lock().expect("mailbox lock").take()
    }
}

#[derive(Debug, Clone)]
pub enum InputSource {
    Live(InputMailbox),
    Replay(InputTrace),
}

#[derive(Debug)]
pub struct Session {
    config: ScenarioConfig,
    state: SimState,
    source: InputSource,
    max_ticks: Option<u64>,
}

impl Session {
    pub fn new(config: ScenarioConfig, source: InputSource, max_ticks: Option<u64>) -> marker_crowds::error::Result<Self> {
        let state = SimState::from_config(&config)?;
        Ok(Session { config, state, source, max_ticks })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn tick(&self) -> u64 {
        self.state.tick
    }

    /// Swaps the live mailbox, e.g. when a paused session is resumed by a
    /// new connection. Replay sessions keep their trace.
    pub fn attach_mailbox(&mut self, mailbox: InputMailbox) {
        if let InputSource::Live(_) = self.source {
            self.source = InputSource::Live(mailbox);
        }
    }

    pub fn is_finished(&self) -> bool {
        self.max_ticks.is_some_and(|max| self.state.tick >= max)
    }

    pub fn start_info(&self) -> StartInfo {
        let field = &self.state.marker_field;
        StartInfo {
            scenario: self.config.name.clone(),
            tick: self.state.tick,
            dt: self.config.dt,
            world: *field.bounds(),
            goals: self.config.goals.clone(),
            markers: field.markers().iter().map(|m| [m.position.x, m.position.y]).collect(),
            avatar_mode: self.config.avatar_mode,
        }
    }

    pub fn frame(&self) -> FrameRecord {
        FrameRecord::capture(&self.state)
    }

    /// Applies the input due this tick, if any, then steps once.
    pub fn advance(&mut self) -> FrameRecord {
        let input = match &self.source {
            InputSource::Live(mailbox) => mailbox.take(),
            InputSource::Replay(trace) => trace.input_at(self.state.tick),
        };
        if let Some(dir) = input {
            apply_avatar_input(&mut self.state, dir);
        }
        self.state.step();
        self.frame()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use marker_crowds::{preset, run_with_trace, state_hash, InputEvent};

    fn trace() -> InputTrace {
        InputTrace::new(vec![
            InputEvent { tick: 0, dx: 1.0, dy: 0.0 },
            InputEvent { tick: 20, dx: 0.0, dy: 1.0 },
            InputEvent { tick: 20, dx: -1.0, dy: 0.0 },
            InputEvent { tick: 45, dx: 0.0, dy: 0.0 },
        ])
    }

    #[test]
    fn replay_session_matches_headless_run() {
        let config = preset("scenario2").unwrap();
        let headless = run_with_trace(&config, 60, &trace()).unwrap();
        let mut session = Session::new(config, InputSource::Replay(trace()), Some(60)).unwrap();
        let mut frames = vec![session.frame()];
        while !session.is_finished() {
            frames.push(session.advance());
        }
        assert_eq!(state_hash(&frames), state_hash(&headless));
    }

    #[test]
    fn mailbox_fed_before_each_tick_matches_headless_run() {
        let config = preset("scenario3").unwrap();
        let t = trace();
        let headless = run_with_trace(&config, 60, &t).unwrap();
        let mailbox = InputMailbox::default();
        let mut session = Session::new(config, InputSource::Live(mailbox.clone()), None).unwrap();
        let mut frames = vec![session.frame()];
        for tick in 0..60 {
            for ev in t.events().iter().filter(|e| e.tick == tick) {
                mailbox.post(Vec2::new(ev.dx, ev.dy));
            }
            frames.push(session.advance());
        }
        assert_eq!(frames, headless);
    }

    #[test]
    fn mailbox_keeps_only_latest() {
        let m = InputMailbox::default();
        m.post(Vec2::new(1.0, 0.0));
        m.post(Vec2::new(0.0, 1.0));
        assert_eq!(m.take(), Some(Vec2::new(0.0, 1.0)));
        assert_eq!(m.take(), None);
    }
}
