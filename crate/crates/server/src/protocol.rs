//! Wire protocol, version 1.
//!
//! One JSON object per line in each direction over a TCP stream. Every
//! object carries a `kind` tag.
//!
//! Client to server:
//!
//! | kind    | fields                                                        |
//! |---------|---------------------------------------------------------------|
//! | `hello` | `version`                                                     |
//! | `start` | optional `preset` (name) or `config` (scenario document), or `resume: true` |
//! | `input` | `dx`, `dy` (steering direction, length clamped to 1)          |
//! | `stop`  |                                                               |
//!
//! Server to client:
//!
//! | kind    | fields                                                        |
//! |---------|---------------------------------------------------------------|
//! | `hello` | `version`, `server`                                           |
//! | `start` | `scenario`, `tick`, `dt`, `world`, `goals`, `markers` (`[[x, y], ..]`, sent once), `avatar_mode` |
//! | `frame` | `tick`, `agents` (`id, x, y, comfort, n_markers, extraversion, profile`), `avatar` (`x, y, participation, n_markers` or null) |
//! | `stop`  | `tick`                                                        |
//! | `error` | `code`, `msg`                                                 |
//!
//! A session starts with `hello` from both sides, then `start`. Frames
//! follow with strictly increasing ticks until `stop`.

use marker_crowds::{AvatarMode, FrameRecord, Rect, ScenarioConfig, Vec2};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

pub mod codes {
    pub const MALFORMED: &str = "malformed";
    pub const VERSION_MISMATCH: &str = "version_mismatch";
    pub const SESSION_OCCUPIED: &str = "session_occupied";
    pub const BAD_START: &str = "bad_start";
    pub const NOTHING_TO_RESUME: &str = "nothing_to_resume";
    pub const UNEXPECTED: &str = "unexpected_message";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        version: u32,
    },
    Start {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        config: Option<Box<ScenarioConfig>>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        resume: bool,
    },
    Input {
        dx: f64,
        dy: f64,
    },
    Stop,
}

impl ClientMessage {
    pub fn start_preset(name: &str) -> Self {
        ClientMessage::Start { preset: Some(name.to_string()), config: None, resume: false }
    }

    pub fn resume() -> Self {
        ClientMessage::Start { preset: None, config: None, resume: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartInfo {
    pub scenario: String,
    pub tick: u64,
    pub dt: f64,
    pub world: Rect,
    pub goals: Vec<Vec2>,
    pub markers: Vec<[f64; 2]>,
    pub avatar_mode: AvatarMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello { version: u32, server: String },
    Start(StartInfo),
    Frame(FrameRecord),
    Stop { tick: u64 },
    Error { code: String, msg: String },
}

impl ServerMessage {
    pub fn error(code: &str, msg: impl Into<String>) -> Self {
        ServerMessage::Error { code: code.to_string(), msg: msg.into() }
    }
}

pub fn encode<M: Serialize>(msg: &M) -> String {
    let mut line = serde_json::to_string(msg).expect("protocol messages serialize");
    line.push('\n');
    line
}

pub fn decode_client(line: &str) -> Result<ClientMessage, serde_json::Error> {
    serde_json::from_str(line.trim_end())
}

pub fn decode_server(line: &str) -> Result<ServerMessage, serde_json::Error> {
    serde_json::from_str(line.trim_end())
}
