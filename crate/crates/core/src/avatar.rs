//! The human-steered avatar and scripted input traces.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::engine::SimState;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::Scalar;

/// How the avatar takes part in the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Participation {
    /// Free camera. Never competes for markers.
    Spectator,
    /// Competes and moves with goal-seeking weights, the input acting as goal direction.
    BioCrowdsAgent,
    /// Competes and moves with extraversion weights using its own comfort.
    NormalLifeAgent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Avatar<T> {
    pub position: Vec2<T>,
    /// Unit vector or zero.
    pub input_dir: Vec2<T>,
    pub max_speed: T,
    pub participation: Participation,
    pub capture_radius: T,
    pub extraversion: T,
    pub comfort: T,
    pub assigned_markers: Vec<u32>,
}

impl<T: Scalar> Avatar<T> {
    pub fn competes(&self) -> bool {
        self.participation != Participation::Spectator
    }
}

/// Sets the avatar's steering input for the next step. Vectors longer than
/// one are normalized; shorter ones are kept, zero means standing still.
/// No-op without an avatar.
pub fn apply_avatar_input<T: Scalar>(state: &mut SimState<T>, input_dir: Vec2<T>) {
    if let Some(avatar) = state.avatar.as_mut() {
        avatar.input_dir = if input_dir.x.is_finite() && input_dir.y.is_finite() {
            input_dir.clamp_length(T::one())
        } else {
            Vec2::zero()
        };
    }
}

/// One scripted input: from `tick` on (until superseded) the avatar steers along `(dx, dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputEvent {
    pub tick: u64,
    pub dx: f64,
    pub dy: f64,
}

/// Input events ordered by tick. Several events on one tick resolve to the
/// last one (last writer wins).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InputTrace {
    events: Vec<InputEvent>,
}

impl InputTrace {
    pub fn new(mut events: Vec<InputEvent>) -> Self {
        events.sort_by_key(|e| e.tick);
        InputTrace { events }
    }

    pub fn events(&self) -> &[InputEvent] {
        &self.events
    }

    /// The input that becomes effective at `tick`, if any event lands on it.
    pub fn input_at(&self, tick: u64) -> Option<Vec2<f64>> {
        let start = self.events.partition_point(|e| e.tick < tick);
        self.events[start..]
            .iter()
            .take_while(|e| e.tick == tick)
            .last()
            .map(|e| Vec2::new(e.dx, e.dy))
    }

    /// Reads one JSON object per line; blank lines are skipped.
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut events = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::TraceFormat { line: i + 1, message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let ev: InputEvent = serde_json::from_str(&line)
                .map_err(|e| Error::TraceFormat { line: i + 1, message: e.to_string() })?;
            events.push(ev);
        }
        Ok(InputTrace::new(events))
    }

    pub fn to_jsonl(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("plain struct") + "\n")
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_event_on_a_tick_wins() {
        let trace = InputTrace::new(vec![
            InputEvent { tick: 5, dx: 1.0, dy: 0.0 },
            InputEvent { tick: 2, dx: 0.0, dy: 1.0 },
            InputEvent { tick: 5, dx: -1.0, dy: 0.0 },
        ]);
        assert_eq!(trace.input_at(2), Some(Vec2::new(0.0, 1.0)));
        assert_eq!(trace.input_at(3), None);
        assert_eq!(trace.input_at(5), Some(Vec2::new(-1.0, 0.0)));
    }

    #[test]
    fn trace_parses_jsonl() {
        let text = "{\"tick\":0,\"dx\":1.0,\"dy\":0.0}\n\n{\"tick\":3,\"dx\":0.0,\"dy\":0.0}\n";
        let trace = InputTrace::read(text.as_bytes()).unwrap();
        assert_eq!(trace.events().len(), 2);
        assert_eq!(InputTrace::read(trace.to_jsonl().as_bytes()).unwrap(), trace);

        let err = InputTrace::read("{\"tick\":0}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::TraceFormat { line: 1, .. }));
    }
}
