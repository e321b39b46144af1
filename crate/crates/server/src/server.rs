use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, TryRecvError};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use marker_crowds::{preset, InputTrace, ScenarioConfig, Vec2};

use crate::protocol::{self, codes, ClientMessage, ServerMessage, PROTOCOL_VERSION};
use crate::session::{InputMailbox, InputSource, Session};

#[derive(Debug, Clone)]
pub struct ServerOptions {
    /// Scenario used when `start` names neither a preset nor a config.
    pub default_config: ScenarioConfig,
    /// Wall-clock time per tick. `None` uses the scenario's `dt`.
    pub tick_interval: Option<Duration>,
    /// Drive the avatar from this trace instead of client input.
    pub replay: Option<InputTrace>,
    /// Stop sessions after this many ticks. Replay sessions default to the
    /// scenario's `n_ticks`, live ones run until stopped.
    pub max_ticks: Option<u64>,
}

impl ServerOptions {
    pub fn new(default_config: ScenarioConfig) -> Self {
        ServerOptions { default_config, tick_interval: None, replay: None, max_ticks: None }
    }
}

struct Shared {
    options: ServerOptions,
    busy: AtomicBool,
    paused: Mutex<Option<Session>>,
}

pub struct Server {
    listener: TcpListener,
    shared: Arc<Shared>,
}

pub struct ServerHandle {
    pub addr: SocketAddr,
    pub thread: JoinHandle<io::Result<()>>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, options: ServerOptions) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let shared = Arc::new(Shared { options, busy: AtomicBool::new(false), paused: Mutex::new(None) });
        Ok(Server { listener, shared })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections forever. One client holds the session at a time;
    /// others get `session_occupied` and are disconnected.
    pub fn run(self) -> io::Result<()> {
        info!("listening on {}", self.listener.local_addr()?);
        for stream in self.listener.incoming() {
            let mut stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            if self.shared.busy.swap(true, Ordering::SeqCst) {
                let msg = ServerMessage::error(codes::SESSION_OCCUPIED, "session occupied");
                let _ = stream.write_all(protocol::encode(&msg).as_bytes());
                let _ = stream.shutdown(Shutdown::Both);
                continue;
            }
            let shared = Arc::clone(&self.shared);
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                info!("client connected: {peer:?}");
                if let Err(e) = Connection::new(stream, &shared).and_then(|c| c.serve()) {
                    debug!("connection ended with error: {e}");
                }
                info!("client gone: {peer:?}");
                shared.busy.store(false, Ordering::SeqCst);
            });
        }
        Ok(())
    }

    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let thread = thread::spawn(move || self.run());
        Ok(ServerHandle { addr, thread })
    }
}

enum Incoming {
    Message(ClientMessage),
    Malformed(String),
}

enum Next {
    Idle,
    Close,
}

struct Connection<'a> {
    writer: TcpStream,
    inbox: Receiver<Incoming>,
    mailbox: InputMailbox,
    shared: &'a Shared,
}

impl<'a> Connection<'a> {
    fn new(stream: TcpStream, shared: &'a Shared) -> io::Result<Self> {
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        let mailbox = InputMailbox::default();
        let (tx, inbox) = mpsc::channel();
        let posted = mailbox.clone();
        // reads run concurrently with stepping; inputs skip the queue
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let Ok(line) = line else { break };
                if line.trim().is_empty() {
                    continue;
                }
                let item = match protocol::decode_client(&line) {
                    Ok(ClientMessage::Input { dx, dy }) => {
                        posted.post(Vec2::new(dx, dy));
                        continue;
                    }
                    Ok(msg) => Incoming::Message(msg),
                    Err(e) => Incoming::Malformed(e.to_string()),
                };
                let stop = matches!(item, Incoming::Malformed(_));
                if tx.send(item).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Connection { writer: stream, inbox, mailbox, shared })
    }

    fn send(&mut self, msg: &ServerMessage) -> io::Result<()> {
        self.writer.write_all(protocol::encode(msg).as_bytes())
    }

    fn fail(&mut self, code: &str, msg: impl Into<String>) -> io::Result<()> {
        let _ = self.send(&ServerMessage::error(code, msg));
        let _ = self.writer.shutdown(Shutdown::Both);
        Ok(())
    }

    fn serve(mut self) -> io::Result<()> {
        match self.inbox.recv() {
            Ok(Incoming::Message(ClientMessage::Hello { version })) if version == PROTOCOL_VERSION => {
                self.send(&ServerMessage::Hello {
                    version: PROTOCOL_VERSION,
                    server: format!("marker-crowds {}", env!("CARGO_PKG_VERSION")),
                })?;
            }
            Ok(Incoming::Message(ClientMessage::Hello { version })) => {
                return self.fail(
                    codes::VERSION_MISMATCH,
                    format!("client speaks version {version}, server speaks {PROTOCOL_VERSION}"),
                );
            }
            Ok(Incoming::Malformed(e)) => return self.fail(codes::MALFORMED, e),
            Ok(Incoming::Message(_)) => return self.fail(codes::UNEXPECTED, "expected hello"),
            Err(_) => return Ok(()),
        }

        loop {
            let msg = match self.inbox.recv() {
                Ok(Incoming::Message(m)) => m,
                Ok(Incoming::Malformed(e)) => return self.fail(codes::MALFORMED, e),
                Err(_) => return Ok(()),
            };
            match msg {
                ClientMessage::Start { preset, config, resume } => {
                    let Some(session) = self.open_session(preset, config, resume)? else { continue };
                    if let Next::Close = self.run_session(session)? {
                        return Ok(());
                    }
                }
                ClientMessage::Stop => {
                    let tick = self.shared.paused.lock().expect("pause lock").as_ref().map_or(0, Session::tick);
                    self.send(&ServerMessage::Stop { tick })?;
                }
                ClientMessage::Hello { .. } => self.send(&ServerMessage::error(codes::UNEXPECTED, "already greeted"))?,
                ClientMessage::Input { .. } => unreachable!("inputs go to the mailbox"),
            }
        }
    }

    fn open_session(
        &mut self,
        preset_name: Option<String>,
        config: Option<Box<ScenarioConfig>>,
        resume: bool,
    ) -> io::Result<Option<Session>> {
        if resume {
            let paused = self.shared.paused.lock().expect("pause lock").take();
            return match paused {
                Some(mut session) => {
                    session.attach_mailbox(self.mailbox.clone());
                    Ok(Some(session))
                }
                None => {
                    self.send(&ServerMessage::error(codes::NOTHING_TO_RESUME, "no paused session"))?;
                    Ok(None)
                }
            };
        }

        let options = &self.shared.options;
        let config = match (preset_name, config) {
            (Some(name), _) => preset(&name).map_err(|e| e.to_string()),
            (None, Some(c)) => c.validate().map(|_| *c).map_err(|e| e.to_string()),
            (None, None) => Ok(options.default_config.clone()),
        };
        let config = match config {
            Ok(c) => c,
            Err(e) => {
                self.send(&ServerMessage::error(codes::BAD_START, e))?;
                return Ok(None);
            }
        };
        let (source, max_ticks) = match &options.replay {
            Some(trace) => (InputSource::Replay(trace.clone()), Some(options.max_ticks.unwrap_or(config.n_ticks))),
            None => (InputSource::Live(self.mailbox.clone()), options.max_ticks),
        };
        // a fresh start discards whatever was paused
        self.shared.paused.lock().expect("pause lock").take();
        match Session::new(config, source, max_ticks) {
            Ok(s) => Ok(Some(s)),
            Err(e) => {
                self.send(&ServerMessage::error(codes::BAD_START, e.to_string()))?;
                Ok(None)
            }
        }
    }

    fn pause(&self, session: Session) {
        info!("pausing session at tick {}", session.tick());
        *self.shared.paused.lock().expect("pause lock") = Some(session);
    }

    fn run_session(&mut self, mut session: Session) -> io::Result<Next> {
        let interval = self
            .shared
            .options
            .tick_interval
            .unwrap_or_else(|| Duration::from_secs_f64(session.config().dt));
        // drop inputs left over from before this session
        self.mailbox.take();

        let start = ServerMessage::Start(session.start_info());
        let first = ServerMessage::Frame(session.frame());
        if self.send(&start).and_then(|_| self.send(&first)).is_err() {
            self.pause(session);
            return Ok(Next::Close);
        }

        let mut deadline = Instant::now() + interval;
        loop {
            loop {
                match self.inbox.try_recv() {
                    Ok(Incoming::Message(ClientMessage::Stop)) => {
                        self.send(&ServerMessage::Stop { tick: session.tick() })?;
                        return Ok(Next::Idle);
                    }
                    Ok(Incoming::Message(ClientMessage::Start { preset, config, resume })) => {
                        if let Some(next) = self.open_session(preset, config, resume)? {
                            return self.run_session(next);
                        }
                    }
                    Ok(Incoming::Message(_)) => {
                        self.send(&ServerMessage::error(codes::UNEXPECTED, "unexpected message during session"))?;
                    }
                    Ok(Incoming::Malformed(e)) => {
                        self.fail(codes::MALFORMED, e)?;
                        return Ok(Next::Close);
                    }
                    Err(TryRecvError::Empty) => break,
                    Err(TryRecvError::Disconnected) => {
                        self.pause(session);
                        return Ok(Next::Close);
                    }
                }
            }

            if session.is_finished() {
                self.send(&ServerMessage::Stop { tick: session.tick() })?;
                return Ok(Next::Idle);
            }

            let now = Instant::now();
            if deadline > now {
                thread::sleep(deadline - now);
            }
            deadline += interval;

            let frame = session.advance();
            if self.send(&ServerMessage::Frame(frame)).is_err() {
                self.pause(session);
                return Ok(Next::Close);
            }
        }
    }
}
