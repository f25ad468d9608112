//! ALDS frame stream: a one-way, little-endian co-simulation protocol.
//!
//! ```text
//! session header  u32 magic 0x414C4453 ("ALDS"), u16 version = 1, u16 reserved = 0
//! per frame       u64 frame_id, u32 point_count, then point_count records of 16 bytes:
//!                 u16 channel, u16 flags (bit 0 = dust), f32 azimuth_deg, f32 range_m,
//!                 u8 intensity, 3 x u8 padding = 0
//! ```
//!
//! The connection closes after the last frame.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use crate::error::StreamError;
use crate::sim::{Frame, LidarReturn};

pub const MAGIC: u32 = 0x414C_4453;
pub const VERSION: u16 = 1;
pub const SESSION_HEADER_LEN: usize = 8;
pub const FRAME_HEADER_LEN: usize = 12;
pub const RECORD_LEN: usize = 16;
pub const FLAG_DUST: u16 = 1;

/// One point as carried on the wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireRecord {
    pub channel: u16,
    pub flags: u16,
    pub azimuth_deg: f32,
    pub range_m: f32,
    pub intensity: u8,
}

impl WireRecord {
    pub fn is_dust(&self) -> bool {
        self.flags & FLAG_DUST != 0
    }

    pub fn to_bytes(&self) -> [u8; RECORD_LEN] {
        let mut b = [0u8; RECORD_LEN];
        b[0..2].copy_from_slice(&self.channel.to_le_bytes());
        b[2..4].copy_from_slice(&self.flags.to_le_bytes());
        b[4..8].copy_from_slice(&self.azimuth_deg.to_le_bytes());
        b[8..12].copy_from_slice(&self.range_m.to_le_bytes());
        b[12] = self.intensity;
        b
    }

    pub fn from_bytes(b: &[u8; RECORD_LEN]) -> Self {
        Self {
            channel: u16::from_le_bytes([b[0], b[1]]),
            flags: u16::from_le_bytes([b[2], b[3]]),
            azimuth_deg: f32::from_le_bytes([b[4], b[5], b[6], b[7]]),
            range_m: f32::from_le_bytes([b[8], b[9], b[10], b[11]]),
            intensity: b[12],
        }
    }
}

impl From<&LidarReturn> for WireRecord {
    fn from(r: &LidarReturn) -> Self {
        Self {
            channel: r.channel,
            flags: if r.kind.is_dust() { FLAG_DUST } else { 0 },
            azimuth_deg: r.azimuth_deg as f32,
            range_m: r.range as f32,
            intensity: r.intensity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireFrame {
    pub frame_id: u64,
    pub records: Vec<WireRecord>,
}

pub fn session_header() -> [u8; SESSION_HEADER_LEN] {
    let mut b = [0u8; SESSION_HEADER_LEN];
    b[0..4].copy_from_slice(&MAGIC.to_le_bytes());
    b[4..6].copy_from_slice(&VERSION.to_le_bytes());
    b
}

pub fn encode_frame(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + frame.returns.len() * RECORD_LEN);
    out.extend_from_slice(&frame.frame_id.to_le_bytes());
    out.extend_from_slice(&(frame.returns.len() as u32).to_le_bytes());
    for r in &frame.returns {
        out.extend_from_slice(&WireRecord::from(r).to_bytes());
    }
    out
}

/// Writes the session header, then frames, to any byte sink.
pub struct StreamWriter<W: Write> {
    inner: W,
    started: bool,
}

impl<W: Write> StreamWriter<W> {
    pub fn new(inner: W) -> Self {
        Self {
            inner,
            started: false,
        }
    }

    fn start(&mut self) -> io::Result<()> {
        if !self.started {
            self.inner.write_all(&session_header())?;
            self.started = true;
        }
        Ok(())
    }

    pub fn write_frame(&mut self, frame: &Frame) -> io::Result<()> {
        self.start()?;
        self.inner.write_all(&encode_frame(frame))
    }

    /// Emits the header even for a zero-frame session, then flushes.
    pub fn finish(&mut self) -> io::Result<()> {
        self.start()?;
        self.inner.flush()
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// Binds `address` and blocks until exactly one client connects.
pub fn accept_one(address: impl ToSocketAddrs) -> io::Result<TcpStream> {
    let listener = TcpListener::bind(address)?;
    accept_from(&listener)
}

pub fn accept_from(listener: &TcpListener) -> io::Result<TcpStream> {
    let (stream, _) = listener.accept()?;
    stream.set_nodelay(true)?;
    Ok(stream)
}

fn read_exact_or(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<(), StreamError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => StreamError::Truncated(what.to_string()),
        _ => StreamError::Io(e),
    })
}

/// Reads and checks the session header.
pub fn read_session_header(r: &mut impl Read) -> Result<u16, StreamError> {
    let mut b = [0u8; SESSION_HEADER_LEN];
    read_exact_or(r, &mut b, "session header")?;
    let magic = u32::from_le_bytes([b[0], b[1], b[2], b[3]]);
    if magic != MAGIC {
        return Err(StreamError::BadMagic(magic));
    }
    let version = u16::from_le_bytes([b[4], b[5]]);
    if version != VERSION {
        return Err(StreamError::UnsupportedVersion(version));
    }
    Ok(version)
}

/// Reads the next frame, or `None` on a clean end of stream.
pub fn read_frame(r: &mut impl Read) -> Result<Option<WireFrame>, StreamError> {
    let mut head = [0u8; FRAME_HEADER_LEN];
    let mut filled = 0;
    while filled < FRAME_HEADER_LEN {
        match r.read(&mut head[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(StreamError::Truncated("frame header".into())),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let frame_id = u64::from_le_bytes(head[0..8].try_into().expect("8 bytes"));
    let count = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    let mut records = Vec::with_capacity(count.min(1 << 20));
    let mut rec = [0u8; RECORD_LEN];
    for _ in 0..count {
        read_exact_or(r, &mut rec, &format!("record of frame {frame_id}"))?;
        records.push(WireRecord::from_bytes(&rec));
    }
    Ok(Some(WireFrame { frame_id, records }))
}

/// Reads a whole session until the peer closes.
pub fn read_stream(r: &mut impl Read) -> Result<Vec<WireFrame>, StreamError> {
    read_session_header(r)?;
    let mut frames = Vec::new();
    while let Some(f) = read_frame(r)? {
        frames.push(f);
    }
    Ok(frames)
}
