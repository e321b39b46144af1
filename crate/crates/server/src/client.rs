//! Minimal blocking client, used by the replay checks and handy for scripting.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use marker_crowds::FrameRecord;

use crate::protocol::{self, ClientMessage, ServerMessage, StartInfo, PROTOCOL_VERSION};

pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(Duration::from_secs(30)))?;
        Ok(Client { reader: BufReader::new(stream.try_clone()?), writer: stream })
    }

    pub fn send(&mut self, msg: &ClientMessage) -> io::Result<()> {
        self.writer.write_all(protocol::encode(msg).as_bytes())
    }

    pub fn send_raw(&mut self, line: &str) -> io::Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")
    }

    /// Next server message; `Ok(None)` once the server closed the stream.
    pub fn recv(&mut self) -> io::Result<Option<ServerMessage>> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        protocol::decode_server(&line)
            .map(Some)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    fn expect(&mut self) -> io::Result<ServerMessage> {
        self.recv()?
            .ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the stream"))
    }

    pub fn hello(&mut self) -> io::Result<ServerMessage> {
        self.send(&ClientMessage::Hello { version: PROTOCOL_VERSION })?;
        self.expect()
    }

    /// Sends `start` and returns the scenario description.
    pub fn start(&mut self, msg: &ClientMessage) -> io::Result<StartInfo> {
        self.send(msg)?;
        match self.expect()? {
            ServerMessage::Start(info) => Ok(info),
            other => Err(io::Error::new(io::ErrorKind::InvalidData, format!("expected start, got {other:?}"))),
        }
    }

    /// Reads frames until the server sends `stop` or closes.
    pub fn collect_frames(&mut self) -> io::Result<Vec<FrameRecord>> {
        let mut frames = Vec::new();
        while let Some(msg) = self.recv()? {
            match msg {
                ServerMessage::Frame(f) => frames.push(f),
                ServerMessage::Stop { .. } => break,
                ServerMessage::Error { code, msg } => {
                    return Err(io::Error::other(format!("{code}: {msg}")));
                }
                _ => {}
            }
        }
        Ok(frames)
    }

    pub fn shutdown(self) {
        let _ = self.writer.shutdown(std::net::Shutdown::Both);
    }
}
