//! Client side of the wire protocol over TCP or a child process's stdio.

use std::io::{BufReader, BufWriter, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;

use super::wire::{
    check_handshake, decode_response, encode_request, handshake_message, read_frame, write_frame,
};
use super::{EvalError, Evaluator, Verdict};
use crate::env::GameState;

/// Most states sent in one request frame.
pub const MAX_REMOTE_BATCH: usize = u16::MAX as usize;

struct Connection {
    reader: Box<dyn Read + Send>,
    writer: Box<dyn Write + Send>,
}

pub struct RemoteEvaluator {
    conn: Mutex<Connection>,
    child: Option<Mutex<Child>>,
}

impl RemoteEvaluator {
    /// Connects to `host:port` and performs the handshake.
    pub fn connect_tcp(addr: &str) -> Result<Self, EvalError> {
        let stream = TcpStream::connect(addr).map_err(|e| EvalError::Unreachable(format!("{addr}: {e}")))?;
        stream.set_nodelay(true).ok();
        let reader = stream.try_clone().map_err(|e| EvalError::Unreachable(e.to_string()))?;
        Self::handshake(
            Connection {
                reader: Box::new(BufReader::new(reader)),
                writer: Box::new(BufWriter::new(stream)),
            },
            None,
        )
    }

    /// Spawns `program args…` and talks to it over stdin/stdout.
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, EvalError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| EvalError::Unreachable(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = child.stdout.take().expect("piped");
        Self::handshake(
            Connection {
                reader: Box::new(BufReader::new(stdout)),
                writer: Box::new(BufWriter::new(stdin)),
            },
            Some(child),
        )
    }

    /// Wraps an already-open byte stream pair.
    pub fn from_streams(
        reader: impl Read + Send + 'static,
        writer: impl Write + Send + 'static,
    ) -> Result<Self, EvalError> {
        Self::handshake(
            Connection {
                reader: Box::new(reader),
                writer: Box::new(writer),
            },
            None,
        )
    }

    /// Endpoint syntax: `tcp:host:port` or `exec:program arg…`.
    pub fn open(endpoint: &str) -> Result<Self, EvalError> {
        if let Some(addr) = endpoint.strip_prefix("tcp:") {
            Self::connect_tcp(addr)
        } else if let Some(cmd) = endpoint.strip_prefix("exec:") {
            let mut parts = cmd.split_whitespace().map(str::to_owned);
            let program = parts
                .next()
                .ok_or_else(|| EvalError::Config("empty exec endpoint".into()))?;
            Self::spawn(&program, &parts.collect::<Vec<_>>())
        } else {
            Err(EvalError::Config(format!("unknown endpoint {endpoint:?}")))
        }
    }

    fn handshake(mut conn: Connection, child: Option<Child>) -> Result<Self, EvalError> {
        write_frame(&mut conn.writer, &handshake_message())
            .map_err(|e| EvalError::Unreachable(e.to_string()))?;
        let reply = read_frame(&mut conn.reader)?
            .ok_or_else(|| EvalError::Unreachable("server closed during handshake".into()))?;
        check_handshake(&reply)?;
        Ok(Self {
            conn: Mutex::new(conn),
            child: child.map(Mutex::new),
        })
    }

    fn round_trip(&self, states: &[GameState]) -> Result<Vec<Verdict>, EvalError> {
        let positions = states[0].spec().positions();
        let request = encode_request(states)?;
        let mut conn = self.conn.lock().expect("connection lock poisoned");
        write_frame(&mut conn.writer, &request)?;
        let frame = read_frame(&mut conn.reader)?
            .ok_or_else(|| EvalError::Unreachable("server closed the stream".into()))?;
        drop(conn);
        let items = decode_response(&frame, positions)?;
        if items.len() != states.len() {
            return Err(EvalError::Malformed(format!(
                "{} replies for {} states",
                items.len(),
                states.len()
            )));
        }
        items
            .into_iter()
            .map(|(policy, value)| {
                let v = Verdict::new(policy.into_iter().map(f64::from).collect(), f64::from(value));
                check_remote_verdict(&v, positions)?;
                Ok(v)
            })
            .collect()
    }
}

/// Remote heads compute in `f32`, so the sum check is looser than
/// [`Verdict::validate`].
fn check_remote_verdict(v: &Verdict, positions: usize) -> Result<(), EvalError> {
    if v.policy.len() != positions || v.policy.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(EvalError::Malformed("policy entries must be finite and non-negative".into()));
    }
    let sum: f64 = v.policy.iter().sum();
    if (sum - 1.0).abs() > 1e-3 {
        return Err(EvalError::Malformed(format!("policy sums to {sum}")));
    }
    if !(0.0..=1.0).contains(&v.value) {
        return Err(EvalError::Malformed(format!("value {} outside [0, 1]", v.value)));
    }
    Ok(())
}

impl Evaluator for RemoteEvaluator {
    fn evaluate(&self, states: &[GameState]) -> Result<Vec<Verdict>, EvalError> {
        let mut out = Vec::with_capacity(states.len());
        for chunk in states.chunks(MAX_REMOTE_BATCH) {
            out.extend(self.round_trip(chunk)?);
        }
        Ok(out)
    }

    fn is_exclusive(&self) -> bool {
        true
    }
}

impl Drop for RemoteEvaluator {
    fn drop(&mut self) {
        if let Some(child) = &self.child {
            // Closing stdin is the server's shutdown signal.
            if let Ok(mut conn) = self.conn.lock() {
                conn.writer = Box::new(std::io::sink());
            }
            if let Ok(mut child) = child.lock() {
                let _ = child.wait();
            }
        }
    }
}
