//! Frame consumers for [`crate::sim::run_scenario`].

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::csv::{frame_rows, CSV_HEADER};
use super::pcd::write_pcd;
use super::stream::StreamWriter;
use crate::sim::Frame;

pub trait FrameSink {
    fn write_frame(&mut self, frame: &Frame) -> io::Result<()>;

    fn finish(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Drops every frame; used for throughput measurement.
#[derive(Debug, Default)]
pub struct DiscardSink {
    pub frames: u64,
}

impl FrameSink for DiscardSink {
    fn write_frame(&mut self, _frame: &Frame) -> io::Result<()> {
        self.frames += 1;
        Ok(())
    }
}

/// Keeps frames in memory.
#[derive(Debug, Default)]
pub struct CollectSink {
    pub frames: Vec<Frame>,
}

impl FrameSink for CollectSink {
    fn write_frame(&mut self, frame: &Frame) -> io::Result<()> {
        self.frames.push(frame.clone());
        Ok(())
    }
}

/// One CSV document: a single header, then the rows of every frame in order.
pub struct CsvSink<W: Write> {
    out: W,
    header_written: bool,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            header_written: false,
        }
    }

    fn header(&mut self) -> io::Result<()> {
        if !self.header_written {
            writeln!(self.out, "{CSV_HEADER}")?;
            self.header_written = true;
        }
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> FrameSink for CsvSink<W> {
    fn write_frame(&mut self, frame: &Frame) -> io::Result<()> {
        self.header()?;
        self.out.write_all(frame_rows(frame).as_bytes())
    }

    fn finish(&mut self) -> io::Result<()> {
        self.header()?;
        self.out.flush()
    }
}

/// PCD output. A single-frame run writes `path` itself; longer runs write
/// `<stem>_<frame_id>.<ext>` next to it. With no path, documents are concatenated
/// onto the writer.
pub enum PcdSink<W: Write> {
    Files { path: PathBuf, multi: bool },
    Writer(W),
}

impl PcdSink<io::Stdout> {
    pub fn files(path: impl AsRef<Path>, frames: u64) -> Self {
        PcdSink::Files {
            path: path.as_ref().to_path_buf(),
            multi: frames > 1,
        }
    }
}

/// Per-frame path used by a multi-frame PCD run.
pub fn pcd_frame_path(path: &Path, frame_id: u64) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("frame");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("pcd");
    path.with_file_name(format!("{stem}_{frame_id}.{ext}"))
}

impl<W: Write> FrameSink for PcdSink<W> {
    fn write_frame(&mut self, frame: &Frame) -> io::Result<()> {
        let text = write_pcd(frame);
        match self {
            PcdSink::Files { path, multi } => {
                let target = if *multi {
                    pcd_frame_path(path, frame.frame_id)
                } else {
                    path.clone()
                };
                std::fs::write(target, text)
            }
            PcdSink::Writer(w) => w.write_all(text.as_bytes()),
        }
    }

    fn finish(&mut self) -> io::Result<()> {
        match self {
            PcdSink::Writer(w) => w.flush(),
            PcdSink::Files { .. } => Ok(()),
        }
    }
}

/// ALDS protocol over any byte sink (typically a connected TCP stream).
pub struct StreamSink<W: Write> {
    writer: StreamWriter<BufWriter<W>>,
}

impl<W: Write> StreamSink<W> {
    pub fn new(out: W) -> Self {
        Self {
            writer: StreamWriter::new(BufWriter::new(out)),
        }
    }
}

impl<W: Write> FrameSink for StreamSink<W> {
    fn write_frame(&mut self, frame: &Frame) -> io::Result<()> {
        self.writer.write_frame(frame)?;
        // Deliver each frame as soon as it is complete.
        self.writer.finish()
    }

    fn finish(&mut self) -> io::Result<()> {
        self.writer.finish()
    }
}

pub fn create_file(path: impl AsRef<Path>) -> io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}
