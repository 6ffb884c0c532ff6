//! Serializes concurrent callers onto one exclusive evaluator, batching
//! whatever requests are queued when the evaluator becomes free.

use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use super::{EvalError, Evaluator, Verdict};
use crate::env::GameState;

struct Request {
    states: Vec<GameState>,
    reply: Sender<Result<Vec<Verdict>, EvalError>>,
}

pub struct DispatchQueue {
    tx: Mutex<Option<Sender<Request>>>,
    worker: Mutex<Option<JoinHandle<()>>>,
}

/// A cloneable evaluator handle feeding a [`DispatchQueue`].
#[derive(Clone)]
pub struct DispatchHandle {
    tx: Sender<Request>,
}

impl DispatchQueue {
    /// Starts the dispatch thread. At most `max_batch` states are sent to
    /// `evaluator` per call (a single larger request still goes through whole).
    pub fn start(evaluator: Arc<dyn Evaluator>, max_batch: usize) -> Self {
        let (tx, rx) = mpsc::channel::<Request>();
        let worker = thread::spawn(move || run(evaluator, rx, max_batch.max(1)));
        Self {
            tx: Mutex::new(Some(tx)),
            worker: Mutex::new(Some(worker)),
        }
    }

    pub fn handle(&self) -> DispatchHandle {
        DispatchHandle {
            tx: self
                .tx
                .lock()
                .unwrap()
                .as_ref()
                .expect("queue is running")
                .clone(),
        }
    }
}

impl Drop for DispatchQueue {
    fn drop(&mut self) {
        self.tx.lock().unwrap().take();
        // The worker exits once every handle is gone too.
        if let Some(w) = self.worker.lock().unwrap().take() {
            let _ = w.join();
        }
    }
}

fn run(evaluator: Arc<dyn Evaluator>, rx: Receiver<Request>, max_batch: usize) {
    while let Ok(first) = rx.recv() {
        let mut pending = vec![first];
        let mut total = pending[0].states.len();
        while total < max_batch {
            match rx.try_recv() {
                Ok(r) => {
                    total += r.states.len();
                    pending.push(r);
                }
                Err(_) => break,
            }
        }
        let states: Vec<GameState> = pending.iter().flat_map(|r| r.states.iter().cloned()).collect();
        match evaluator.evaluate(&states) {
            Ok(mut verdicts) if verdicts.len() == states.len() => {
                for r in pending.into_iter().rev() {
                    let tail = verdicts.split_off(verdicts.len() - r.states.len());
                    let _ = r.reply.send(Ok(tail));
                }
            }
            Ok(_) => {
                for r in pending {
                    let _ = r.reply.send(Err(EvalError::Malformed("verdict count mismatch".into())));
                }
            }
            Err(e) => {
                for r in pending {
                    let _ = r.reply.send(Err(e.clone()));
                }
            }
        }
    }
}

impl Evaluator for DispatchHandle {
    fn evaluate(&self, states: &[GameState]) -> Result<Vec<Verdict>, EvalError> {
        let (reply, rx) = mpsc::channel();
        self.tx
            .send(Request {
                states: states.to_vec(),
                reply,
            })
            .map_err(|_| EvalError::Unreachable("dispatch queue stopped".into()))?;
        rx.recv()
            .map_err(|_| EvalError::Unreachable("dispatch queue dropped the request".into()))?
    }
}
