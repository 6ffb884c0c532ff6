//! Boundary formats: the evaluator wire protocol over a real socket, the
//! instance record and the training-sample lines.

use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use jigsaw_mcts::env::{slice_image, synthetic_image, Action, GameState, PatchOrder, PuzzleInstance, PuzzleSpec};
use jigsaw_mcts::eval::wire::{self, WireState, WireVerdict};
use jigsaw_mcts::eval::{DispatchQueue, EvalError, Evaluator, RemoteEvaluator};
use jigsaw_mcts::harness::{export_samples, read_samples, ExperimentConfig, ExportMode};
use jigsaw_mcts::mcts::{run_search, SearchConfig};

fn instance() -> Arc<PuzzleInstance> {
    let spec = PuzzleSpec::new(4, 3, 1).unwrap();
    Arc::new(slice_image(&synthetic_image(20, 20, 5), spec, 5, "wire").unwrap())
}

/// Deterministic head computed from the wire fields alone.
fn head(s: &WireState) -> WireVerdict {
    let p = s.positions();
    let weights: Vec<f32> = s
        .assignment
        .iter()
        .enumerate()
        .map(|(i, &a)| if a < 0 { 1.0 + (i as f32 + s.turn as f32) * 0.25 } else { 0.5 })
        .collect();
    let total: f32 = weights.iter().sum();
    let canvas_mean = s.canvas.iter().sum::<f32>() / s.canvas.len() as f32;
    let value = (s.turn as f32 / p as f32 + canvas_mean.abs() * 1e-3).min(1.0);
    (weights.iter().map(|w| w / total).collect(), value)
}

fn serve_once<F>(handler: F) -> String
where
    F: FnMut(&[WireState]) -> Vec<WireVerdict> + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut writer = FlushingWriter(BufWriter::new(stream));
        let _ = wire::serve(&mut reader, &mut writer, handler);
    });
    addr
}

/// Flushes after every write so frames leave the buffer immediately.
struct FlushingWriter<W: Write>(W);

impl<W: Write> Write for FlushingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.0.write(buf)?;
        self.0.flush()?;
        Ok(n)
    }
    fn flush(&mut self) -> std::io::Result<()> {
        self.0.flush()
    }
}

fn states(inst: &PuzzleInstance) -> Vec<GameState> {
    let order = PatchOrder::shuffled(9, 2);
    let mut out = vec![GameState::initial(inst, &order).unwrap()];
    for pos in [4, 0, 8] {
        let next = out.last().unwrap().apply(Action::new(pos)).unwrap();
        out.push(next);
    }
    out
}

#[test]
fn tcp_verdicts_match_the_handler_bit_for_bit() {
    let inst = instance();
    let addr = serve_once(|states| states.iter().map(head).collect());
    let remote = RemoteEvaluator::connect_tcp(&addr).unwrap();
    let batch = states(&inst);
    let verdicts = remote.evaluate(&batch).unwrap();
    assert_eq!(verdicts.len(), batch.len());
    for (state, v) in batch.iter().zip(&verdicts) {
        let ws = wire::decode_state(&wire::encode_state(state)).unwrap();
        let (policy, value) = head(&ws);
        let want: Vec<u64> = policy.iter().map(|&p| f64::from(p).to_bits()).collect();
        let got: Vec<u64> = v.policy.iter().map(|p| p.to_bits()).collect();
        assert_eq!(got, want);
        assert_eq!(v.value.to_bits(), f64::from(value).to_bits());
    }
}

#[test]
fn search_runs_through_a_dispatch_queue_over_tcp() {
    let inst = instance();
    let addr = serve_once(|states| states.iter().map(head).collect());
    let remote: Arc<dyn Evaluator> = Arc::new(RemoteEvaluator::connect_tcp(&addr).unwrap());
    let queue = DispatchQueue::start(remote, 64);
    let handle = queue.handle();
    let root = states(&inst).remove(0);
    let cfg = SearchConfig {
        n_visits: 40,
        ..SearchConfig::default()
    };
    let result = run_search(&root, &inst, &handle, &cfg).unwrap();
    assert_eq!(result.visits.iter().sum::<u32>(), 39);
}

#[test]
fn wrong_protocol_version_is_rejected() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        let (mut stream, _) = listener.accept().unwrap();
        let _ = wire::read_frame(&mut stream);
        let mut reply = wire::HANDSHAKE_MAGIC.to_vec();
        reply.extend_from_slice(&(wire::PROTOCOL_VERSION + 1).to_le_bytes());
        wire::write_frame(&mut stream, &reply).unwrap();
    });
    assert!(matches!(
        RemoteEvaluator::connect_tcp(&addr),
        Err(EvalError::VersionMismatch(_))
    ));
}

#[test]
fn closed_port_is_unreachable() {
    let addr = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().to_string()
    };
    assert!(matches!(RemoteEvaluator::connect_tcp(&addr), Err(EvalError::Unreachable(_))));
    assert!(matches!(RemoteEvaluator::open("exec:/nonexistent/evaluator"), Err(EvalError::Unreachable(_))));
    assert!(matches!(RemoteEvaluator::open("udp:1"), Err(EvalError::Config(_))));
}

#[test]
fn bad_distributions_are_malformed() {
    let inst = instance();
    let addr = serve_once(|states| states.iter().map(|s| (vec![0.5; s.positions()], 0.5)).collect());
    let remote = RemoteEvaluator::connect_tcp(&addr).unwrap();
    assert!(matches!(remote.evaluate(&states(&inst)), Err(EvalError::Malformed(_))));

    let addr = serve_once(|states| states.iter().map(|s| (vec![1.0 / s.positions() as f32; s.positions()], 1.5)).collect());
    let remote = RemoteEvaluator::connect_tcp(&addr).unwrap();
    assert!(matches!(remote.evaluate(&states(&inst)), Err(EvalError::Malformed(_))));
}

#[test]
fn server_hangup_mid_session_is_unreachable() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        let (mut stream, _): (TcpStream, _) = listener.accept().unwrap();
        let _ = wire::read_frame(&mut stream);
        wire::write_frame(&mut stream, &wire::handshake_message()).unwrap();
    });
    let remote = RemoteEvaluator::connect_tcp(&addr).unwrap();
    assert!(matches!(remote.evaluate(&states(&instance())), Err(EvalError::Unreachable(_))));
}

#[test]
fn instance_record_layout() {
    let inst = instance();
    let bytes = inst.to_record_bytes();
    assert_eq!(&bytes[..4], b"AZPZ");
    assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
    let header: Vec<u32> = (0..5)
        .map(|i| u32::from_le_bytes(bytes[6 + 4 * i..10 + 4 * i].try_into().unwrap()))
        .collect();
    assert_eq!(header, vec![4, 3, 1, 3, 4]);
    assert_eq!(&bytes[26..30], b"wire");
    let patch_bytes = 9 * 4 * 4 * 3 * 4;
    assert_eq!(bytes.len(), 30 + patch_bytes + 9 * 8);
    let back = PuzzleInstance::read_record(&bytes[..]).unwrap();
    assert_eq!(back, *inst);
    assert!(PuzzleInstance::read_record(&bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn exported_lines_are_self_describing_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.jsonl");
    let mut cfg = ExperimentConfig::parse_str("puzzles = 2\n").unwrap();
    cfg.spec = PuzzleSpec::new(4, 2, 1).unwrap();
    let n = export_samples(&cfg, ExportMode::PretrainValue, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), n);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["puzzle", "turn", "source", "state", "target_position", "target_value"] {
            assert!(v.get(key).is_some(), "missing {key} in {line}");
        }
        assert_eq!(v["source"], "pretrain-sampler");
    }
    for s in read_samples(&path).unwrap() {
        let ws = s.decode_state().unwrap();
        assert_eq!(ws.turn as usize, s.turn);
        assert!(s.target_position < 4);
    }
}
