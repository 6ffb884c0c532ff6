//! Remote evaluator wire protocol.
//!
//! Every message travels in a frame: a `u32` little-endian byte count
//! followed by the message bytes. A session opens with a handshake frame in
//! each direction (`"AZEV"` + `u16` version), then alternates request and
//! response frames.
//!
//! ```text
//! request  := u8 tag (0 = policy+value)  u16 count  count × (u32 len, state)
//! state    := u32 n  u32 patch_size  u32 gap_size  u32 channels  u32 t
//!             u32 next_patch (u32::MAX when none)
//!             canvas: side² × channels f32, row-major
//!             assignment: p × i32 (−1 = empty)
//! response := u16 count  count × (p f32 policy, f32 value)
//! ```
//!
//! All numbers are little-endian.

use std::io::{self, Read, Write};

use super::EvalError;
use crate::env::{GameState, PuzzleSpec};

pub const HANDSHAKE_MAGIC: &[u8; 4] = b"AZEV";
pub const PROTOCOL_VERSION: u16 = 1;
pub const TAG_POLICY_VALUE: u8 = 0;
const NO_NEXT_PATCH: u32 = u32::MAX;
const STATE_HEADER_LEN: usize = 6 * 4;
/// Upper bound on a single frame, to reject garbage length prefixes.
pub const MAX_FRAME_LEN: usize = 1 << 30;

pub fn write_frame<W: Write>(w: &mut W, message: &[u8]) -> io::Result<()> {
    w.write_all(&(message.len() as u32).to_le_bytes())?;
    w.write_all(message)?;
    w.flush()
}

/// Reads one frame. `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, EvalError> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_le_bytes(len) as usize;
    if len > MAX_FRAME_LEN {
        return Err(EvalError::Protocol(format!("frame of {len} bytes exceeds limit")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn handshake_message() -> Vec<u8> {
    let mut m = HANDSHAKE_MAGIC.to_vec();
    m.extend_from_slice(&PROTOCOL_VERSION.to_le_bytes());
    m
}

pub fn check_handshake(message: &[u8]) -> Result<(), EvalError> {
    if message.len() != 6 || &message[..4] != HANDSHAKE_MAGIC {
        return Err(EvalError::VersionMismatch("bad handshake magic".into()));
    }
    let version = u16::from_le_bytes([message[4], message[5]]);
    if version != PROTOCOL_VERSION {
        return Err(EvalError::VersionMismatch(format!(
            "peer speaks version {version}, expected {PROTOCOL_VERSION}"
        )));
    }
    Ok(())
}

/// A state as seen on the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct WireState {
    pub patches_per_side: u32,
    pub patch_size: u32,
    pub gap_size: u32,
    pub channels: u32,
    pub turn: u32,
    pub next_patch: Option<u32>,
    pub canvas: Vec<f32>,
    pub assignment: Vec<i32>,
}

impl WireState {
    pub fn positions(&self) -> usize {
        (self.patches_per_side * self.patches_per_side) as usize
    }

    pub fn spec(&self) -> Result<PuzzleSpec, EvalError> {
        PuzzleSpec::with_channels(
            self.patch_size as usize,
            self.patches_per_side as usize,
            self.gap_size as usize,
            self.channels as usize,
        )
        .map_err(|e| EvalError::Protocol(e.to_string()))
    }
}

pub fn encode_state(state: &GameState) -> Vec<u8> {
    let spec = state.spec();
    let canvas = state.canvas();
    let mut out = Vec::with_capacity(STATE_HEADER_LEN + canvas.data().len() * 4 + spec.positions() * 4);
    for v in [
        spec.patches_per_side() as u32,
        spec.patch_size() as u32,
        spec.gap_size() as u32,
        spec.channels() as u32,
        state.turn() as u32,
        state.next_patch().map_or(NO_NEXT_PATCH, |p| p as u32),
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in canvas.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for a in state.assignment_i32() {
        out.extend_from_slice(&a.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, at: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], EvalError> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| EvalError::Protocol("truncated message".into()))?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, EvalError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, EvalError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, EvalError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, EvalError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<(), EvalError> {
        if self.at == self.buf.len() {
            Ok(())
        } else {
            Err(EvalError::Protocol(format!("{} trailing bytes", self.buf.len() - self.at)))
        }
    }
}

pub fn decode_state(payload: &[u8]) -> Result<WireState, EvalError> {
    let mut c = Cursor::new(payload);
    let patches_per_side = c.u32()?;
    let patch_size = c.u32()?;
    let gap_size = c.u32()?;
    let channels = c.u32()?;
    let turn = c.u32()?;
    let next = c.u32()?;
    let mut state = WireState {
        patches_per_side,
        patch_size,
        gap_size,
        channels,
        turn,
        next_patch: (next != NO_NEXT_PATCH).then_some(next),
        canvas: Vec::new(),
        assignment: Vec::new(),
    };
    let spec = state.spec()?;
    let side = spec.canvas_side();
    let floats = side
        .checked_mul(side)
        .and_then(|v| v.checked_mul(spec.channels()))
        .filter(|&v| v <= payload.len() / 4)
        .ok_or_else(|| EvalError::Protocol("canvas larger than payload".into()))?;
    state.canvas = (0..floats).map(|_| c.f32()).collect::<Result<_, _>>()?;
    state.assignment = (0..spec.positions())
        .map(|_| c.u32().map(|v| v as i32))
        .collect::<Result<_, _>>()?;
    c.finish()?;
    Ok(state)
}

pub fn encode_request(states: &[GameState]) -> Result<Vec<u8>, EvalError> {
    let count = u16::try_from(states.len())
        .map_err(|_| EvalError::Protocol(format!("batch of {} exceeds u16", states.len())))?;
    let mut out = vec![TAG_POLICY_VALUE];
    out.extend_from_slice(&count.to_le_bytes());
    for s in states {
        let payload = encode_state(s);
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&payload);
    }
    Ok(out)
}

pub fn decode_request(message: &[u8]) -> Result<Vec<WireState>, EvalError> {
    let mut c = Cursor::new(message);
    let tag = c.u8()?;
    if tag != TAG_POLICY_VALUE {
        return Err(EvalError::Protocol(format!("unknown request tag {tag}")));
    }
    let count = c.u16()?;
    let mut states = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let len = c.u32()? as usize;
        states.push(decode_state(c.take(len)?)?);
    }
    c.finish()?;
    Ok(states)
}

/// One reply item: `p` policy entries and a value.
pub type WireVerdict = (Vec<f32>, f32);

pub fn encode_response(items: &[WireVerdict]) -> Result<Vec<u8>, EvalError> {
    let count = u16::try_from(items.len())
        .map_err(|_| EvalError::Protocol("response batch exceeds u16".into()))?;
    let mut out = count.to_le_bytes().to_vec();
    for (policy, value) in items {
        for p in policy {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out.extend_from_slice(&value.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_response(message: &[u8], positions: usize) -> Result<Vec<WireVerdict>, EvalError> {
    let mut c = Cursor::new(message);
    let count = c.u16()? as usize;
    let mut items = Vec::with_capacity(count);
    for _ in 0..count {
        let policy = (0..positions).map(|_| c.f32()).collect::<Result<Vec<_>, _>>()?;
        let value = c.f32()?;
        items.push((policy, value));
    }
    c.finish()?;
    Ok(items)
}

/// Server side of one connection: answers the handshake, then every request
/// frame with `handler`'s verdicts until the client closes the stream.
/// Malformed requests end the session with an error.
pub fn serve<R: Read, W: Write, F>(reader: &mut R, writer: &mut W, mut handler: F) -> Result<(), EvalError>
where
    F: FnMut(&[WireState]) -> Vec<WireVerdict>,
{
    let hello = read_frame(reader)?.ok_or_else(|| EvalError::Protocol("closed before handshake".into()))?;
    check_handshake(&hello)?;
    write_frame(writer, &handshake_message())?;
    while let Some(frame) = read_frame(reader)? {
        let states = decode_request(&frame)?;
        let replies = handler(&states);
        if replies.len() != states.len() {
            return Err(EvalError::Protocol("handler reply count mismatch".into()));
        }
        write_frame(writer, &encode_response(&replies)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{slice_image, synthetic_image, PatchOrder};

    fn state(channels: usize) -> GameState {
        let spec = PuzzleSpec::with_channels(3, 3, 1, channels).unwrap();
        let inst = slice_image(&synthetic_image(20, 20, 4), spec, 0, "w").unwrap();
        GameState::from_moves(&inst, &PatchOrder::shuffled(9, 1), &[4, 0, 8]).unwrap()
    }

    #[test]
    fn state_round_trip_is_bit_exact() {
        for channels in [3, 4] {
            let s = state(channels);
            let w = decode_state(&encode_state(&s)).unwrap();
            assert_eq!(w.turn, 3);
            assert_eq!(w.next_patch, Some(s.next_patch().unwrap() as u32));
            assert_eq!(w.assignment, s.assignment_i32());
            let bits: Vec<u32> = w.canvas.iter().map(|v| v.to_bits()).collect();
            let want: Vec<u32> = s.canvas().data().iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits, want);
        }
    }

    #[test]
    fn handshake_checks() {
        check_handshake(&handshake_message()).unwrap();
        assert!(matches!(check_handshake(b"AZPZ\x01\x00"), Err(EvalError::VersionMismatch(_))));
        assert!(matches!(check_handshake(b"AZEV\x02\x00"), Err(EvalError::VersionMismatch(_))));
    }

    #[test]
    fn truncated_messages_are_rejected() {
        let msg = encode_request(&[state(3)]).unwrap();
        for cut in [0, 1, 3, 10, msg.len() - 1] {
            assert!(decode_request(&msg[..cut]).is_err());
        }
        let mut bad_tag = msg.clone();
        bad_tag[0] = 7;
        assert!(decode_request(&bad_tag).is_err());
    }

    #[test]
    fn response_round_trip() {
        let items = vec![(vec![0.25f32; 4], 0.5f32), (vec![1.0, 0.0, 0.0, 0.0], 1.0)];
        let back = decode_response(&encode_response(&items).unwrap(), 4).unwrap();
        assert_eq!(back, items);
        assert!(decode_response(&encode_response(&items).unwrap(), 3).is_err());
    }
}
