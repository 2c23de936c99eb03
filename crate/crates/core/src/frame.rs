//! Frames, rectangular crops and frame sources.
//!
//! Everything downstream works on the 8-bit luma plane. Chroma planes, when a
//! source provides them, ride along unchanged and are cropped with the luma.

use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("frame buffer holds {actual} bytes, expected {expected} for {width}x{height}")]
    BufferSize {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("frame dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("invalid crop: {0}")]
    InvalidCrop(String),
    #[error("crop of a {width}x{height} frame leaves an empty region")]
    EmptyCrop { width: u32, height: u32 },
    #[error("band fraction must lie in (0, 1], got {0}")]
    InvalidBand(f64),
    #[error("fps must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("cannot read source {path}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("no image frames found in {0}")]
    NoFrames(PathBuf),
    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("frame {index} is {got_w}x{got_h}, stream started at {want_w}x{want_h}")]
    InconsistentDimensions {
        index: u64,
        want_w: u32,
        want_h: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("raw stream ended inside frame {index} ({read} of {expected} bytes)")]
    TruncatedRaw { index: u64, read: usize, expected: usize },
    #[error("frame dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
}

#[derive(Debug, PartialEq, Eq)]
struct ChromaPlanes {
    cb: Vec<u8>,
    cr: Vec<u8>,
}

/// One decoded picture of the stream. Row 0 is the top of the image.
///
/// Pixel planes are reference counted, so cloning a frame is cheap and frames
/// can be handed across threads freely.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    index: u64,
    timestamp_ms: f64,
    width: u32,
    height: u32,
    luma: Arc<[u8]>,
    chroma: Option<Arc<ChromaPlanes>>,
}

impl Frame {
    pub fn new(index: u64, timestamp_ms: f64, width: u32, height: u32, luma: Vec<u8>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize;
        if luma.len() != expected {
            return Err(FrameError::BufferSize {
                width,
                height,
                expected,
                actual: luma.len(),
            });
        }
        Ok(Self {
            index,
            timestamp_ms,
            width,
            height,
            luma: luma.into(),
            chroma: None,
        })
    }

    /// A frame filled with one luma level.
    pub fn filled(index: u64, timestamp_ms: f64, width: u32, height: u32, level: u8) -> Self {
        Self::new(
            index,
            timestamp_ms,
            width,
            height,
            vec![level; width as usize * height as usize],
        )
        .expect("positive dimensions")
    }

    /// Attach full-resolution Cb/Cr planes.
    pub fn with_chroma(mut self, cb: Vec<u8>, cr: Vec<u8>) -> Result<Self, FrameError> {
        let expected = self.pixel_count();
        for plane in [&cb, &cr] {
            if plane.len() != expected {
                return Err(FrameError::BufferSize {
                    width: self.width,
                    height: self.height,
                    expected,
                    actual: plane.len(),
                });
            }
        }
        self.chroma = Some(Arc::new(ChromaPlanes { cb, cr }));
        Ok(self)
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn timestamp_ms(&self) -> f64 {
        self.timestamp_ms
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn luma(&self) -> &[u8] {
        &self.luma
    }

    pub fn chroma(&self) -> Option<(&[u8], &[u8])> {
        self.chroma.as_deref().map(|c| (c.cb.as_slice(), c.cr.as_slice()))
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let w = self.width as usize;
        let start = y as usize * w;
        &self.luma[start..start + w]
    }

    pub fn at(&self, x: u32, y: u32) -> u8 {
        self.luma[y as usize * self.width as usize + x as usize]
    }

    /// Copy out the rectangle `cols x rows` (half-open ranges).
    fn region(&self, cols: (u32, u32), rows: (u32, u32)) -> Frame {
        let copy = |plane: &[u8]| {
            let mut out = Vec::with_capacity(((cols.1 - cols.0) * (rows.1 - rows.0)) as usize);
            for y in rows.0..rows.1 {
                let start = y as usize * self.width as usize;
                out.extend_from_slice(&plane[start + cols.0 as usize..start + cols.1 as usize]);
            }
            out
        };
        Frame {
            index: self.index,
            timestamp_ms: self.timestamp_ms,
            width: cols.1 - cols.0,
            height: rows.1 - rows.0,
            luma: copy(&self.luma).into(),
            chroma: self.chroma.as_deref().map(|c| {
                Arc::new(ChromaPlanes {
                    cb: copy(&c.cb),
                    cr: copy(&c.cr),
                })
            }),
        }
    }
}

/// Fractions of the frame trimmed from each edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CropSpec {
    pub top: f64,
    pub bottom: f64,
    pub left: f64,
    pub right: f64,
}

impl CropSpec {
    pub const ZERO: CropSpec = CropSpec {
        top: 0.0,
        bottom: 0.0,
        left: 0.0,
        right: 0.0,
    };

    /// Trim used on frames handed to the ball detector.
    pub const BALL_DETECTION: CropSpec = CropSpec {
        top: 0.20,
        bottom: 0.25,
        left: 0.30,
        right: 0.30,
    };

    pub fn new(top: f64, bottom: f64, left: f64, right: f64) -> Result<Self, FrameError> {
        let spec = Self {
            top,
            bottom,
            left,
            right,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        for (name, v) in [
            ("top", self.top),
            ("bottom", self.bottom),
            ("left", self.left),
            ("right", self.right),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(FrameError::InvalidCrop(format!("{name} = {v} is outside [0, 1)")));
            }
        }
        if self.top + self.bottom >= 1.0 {
            return Err(FrameError::InvalidCrop(format!(
                "top + bottom = {} must be below 1",
                self.top + self.bottom
            )));
        }
        if self.left + self.right >= 1.0 {
            return Err(FrameError::InvalidCrop(format!(
                "left + right = {} must be below 1",
                self.left + self.right
            )));
        }
        Ok(())
    }

    /// Half-open column range `[⌊left·W⌋, W − ⌊right·W⌋)`.
    pub fn columns(&self, width: u32) -> (u32, u32) {
        (floor_part(self.left, width), width - floor_part(self.right, width))
    }

    /// Half-open row range `[⌊top·H⌋, H − ⌊bottom·H⌋)`.
    pub fn rows(&self, height: u32) -> (u32, u32) {
        (floor_part(self.top, height), height - floor_part(self.bottom, height))
    }
}

/// `⌊fraction · n⌋`, tolerant of binary representation error (0.29 · 100 is
/// 28.999999999999996 in f64 but should give 29).
fn floor_part(fraction: f64, n: u32) -> u32 {
    let exact = fraction * n as f64;
    let rounded = exact.round();
    let v = if (exact - rounded).abs() < 1e-9 {
        rounded
    } else {
        exact.floor()
    };
    (v as u32).min(n)
}

/// Bottom strip of the frame where broadcasters place the score overlay.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BandSpec {
    pub band_fraction: f64,
}

impl Default for BandSpec {
    fn default() -> Self {
        Self { band_fraction: 0.15 }
    }
}

impl BandSpec {
    pub fn new(band_fraction: f64) -> Result<Self, FrameError> {
        let spec = Self { band_fraction };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if self.band_fraction > 0.0 && self.band_fraction <= 1.0 {
            Ok(())
        } else {
            Err(FrameError::InvalidBand(self.band_fraction))
        }
    }

    /// Half-open row range covered by the band; never empty.
    pub fn rows(&self, height: u32) -> (u32, u32) {
        let rows = floor_part(self.band_fraction, height).max(1);
        (height - rows, height)
    }
}

pub fn crop(frame: &Frame, spec: &CropSpec) -> Result<Frame, FrameError> {
    spec.validate()?;
    let cols = spec.columns(frame.width);
    let rows = spec.rows(frame.height);
    if cols.0 >= cols.1 || rows.0 >= rows.1 {
        return Err(FrameError::EmptyCrop {
            width: frame.width,
            height: frame.height,
        });
    }
    Ok(frame.region(cols, rows))
}

pub fn bottom_band(frame: &Frame, band: &BandSpec) -> Result<Frame, FrameError> {
    band.validate()?;
    Ok(frame.region((0, frame.width), band.rows(frame.height)))
}

/// Where frames come from.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    /// Directory of numbered PNG/PGM images.
    ImageDir(PathBuf),
    /// Headerless 8-bit luma frames back to back; `-` reads stdin.
    Raw { path: PathBuf, width: u32, height: u32 },
}

/// Pull-based frame stream. Yields frames in index order, stops after the
/// first error.
pub struct FrameStream {
    inner: Inner,
    fps: f64,
    next_index: u64,
    dims: Option<(u32, u32)>,
    failed: bool,
}

enum Inner {
    Images(std::vec::IntoIter<PathBuf>),
    Raw {
        reader: Box<dyn Read + Send>,
        width: u32,
        height: u32,
    },
}

pub fn open_source(spec: &SourceSpec, fps: f64) -> Result<FrameStream, FrameError> {
    if !(fps.is_finite() && fps > 0.0) {
        return Err(FrameError::InvalidFps(fps));
    }
    let inner = match spec {
        SourceSpec::ImageDir(dir) => Inner::Images(list_images(dir)?.into_iter()),
        SourceSpec::Raw { path, width, height } => {
            if *width == 0 || *height == 0 {
                return Err(FrameError::ZeroDimension {
                    width: *width,
                    height: *height,
                });
            }
            let reader: Box<dyn Read + Send> = if path.as_os_str() == "-" {
                Box::new(BufReader::new(io::stdin()))
            } else {
                let file = File::open(path).map_err(|source| FrameError::Unreadable {
                    path: path.clone(),
                    source,
                })?;
                Box::new(BufReader::new(file))
            };
            Inner::Raw {
                reader,
                width: *width,
                height: *height,
            }
        }
    };
    Ok(FrameStream {
        inner,
        fps,
        next_index: 0,
        dims: None,
        failed: false,
    })
}

pub fn timestamp_ms(index: u64, fps: f64) -> f64 {
    index as f64 * 1000.0 / fps
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>, FrameError> {
    let unreadable = |source| FrameError::Unreadable {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<(u64, String, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(unreadable)? {
        let path = entry.map_err(unreadable)?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if !matches!(ext.as_deref(), Some("png" | "pgm" | "pnm" | "ppm")) {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let digits: String = stem.chars().filter(|c| c.is_ascii_digit()).collect();
        let number = digits.parse().unwrap_or(u64::MAX);
        files.push((number, stem, path));
    }
    if files.is_empty() {
        return Err(FrameError::NoFrames(dir.to_path_buf()));
    }
    files.sort();
    Ok(files.into_iter().map(|(_, _, p)| p).collect())
}

impl FrameStream {
    pub fn fps(&self) -> f64 {
        self.fps
    }

    fn read_next(&mut self) -> Option<Result<Frame, FrameError>> {
        let index = self.next_index;
        let ts = timestamp_ms(index, self.fps);
        match &mut self.inner {
            Inner::Images(paths) => {
                let path = paths.next()?;
                let img = match image::open(&path) {
                    Ok(img) => img.into_luma8(),
                    Err(e) => {
                        return Some(Err(FrameError::Decode {
                            path,
                            message: e.to_string(),
                        }))
                    }
                };
                let (w, h) = img.dimensions();
                Some(Frame::new(index, ts, w, h, img.into_raw()))
            }
            Inner::Raw { reader, width, height } => {
                let expected = *width as usize * *height as usize;
                let mut buf = vec![0u8; expected];
                let mut read = 0;
                while read < expected {
                    match reader.read(&mut buf[read..]) {
                        Ok(0) => break,
                        Ok(n) => read += n,
                        Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                        Err(source) => {
                            return Some(Err(FrameError::Unreadable {
                                path: PathBuf::from("<raw stream>"),
                                source,
                            }))
                        }
                    }
                }
                match read {
                    0 => None,
                    n if n < expected => Some(Err(FrameError::TruncatedRaw {
                        index,
                        read: n,
                        expected,
                    })),
                    _ => Some(Frame::new(index, ts, *width, *height, buf)),
                }
            }
        }
    }
}

impl Iterator for FrameStream {
    type Item = Result<Frame, FrameError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let item = self.read_next()?;
        let item = item.and_then(|frame| match self.dims {
            Some((w, h)) if (w, h) != (frame.width, frame.height) => Err(FrameError::InconsistentDimensions {
                index: frame.index,
                want_w: w,
                want_h: h,
                got_w: frame.width,
                got_h: frame.height,
            }),
            _ => {
                self.dims = Some((frame.width, frame.height));
                Ok(frame)
            }
        });
        match &item {
            Ok(_) => self.next_index += 1,
            Err(_) => self.failed = true,
        }
        Some(item)
    }
}
