//! Live session server: one client steers the avatar while frames stream
//! back over a line-delimited JSON protocol (see [`protocol`]).

pub mod client;
pub mod protocol;
pub mod server;
pub mod session;

pub use marker_crowds::avatar::{apply_avatar_input, Avatar, Participation};
pub use server::{Server, ServerHandle, ServerOptions};
pub use session::{InputMailbox, InputSource, Session};

use marker_crowds::{run_with_trace, state_hash, InputTrace, ScenarioConfig};

/// Serves `config` in replay mode on an ephemeral local port, plays `trace`
/// through a client connection, and returns the state hash of the streamed
/// frames next to the hash of a headless run over the same trace.
pub fn replay_hashes(config: &ScenarioConfig, trace: &InputTrace, n_ticks: u64) -> std::io::Result<(String, String)> {
    let mut options = ServerOptions::new(config.clone());
    options.tick_interval = Some(std::time::Duration::ZERO);
    options.replay = Some(trace.clone());
    options.max_ticks = Some(n_ticks);
    let handle = Server::bind("127.0.0.1:0", options)?.spawn()?;

    let mut client = client::Client::connect(handle.addr)?;
    client.hello()?;
    client.start(&protocol::ClientMessage::Start { preset: None, config: None, resume: false })?;
    let served = client.collect_frames()?;
    client.shutdown();

    let headless = run_with_trace(config, n_ticks, trace).map_err(std::io::Error::other)?;
    Ok((state_hash(&served), state_hash(&headless)))
}
