use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "image dimensions {width}x{height} are not multiples of 8 (width {width}, height {height})"
    )]
    NotBlockAligned { width: usize, height: usize },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("grid shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("ragged block grid: row {row} has {found} blocks, expected {expected}")]
    RaggedGrid {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("pixel ({x}, {y}) with step {step} has neighbours outside a {width}x{height} image")]
    OutOfBounds {
        x: usize,
        y: usize,
        step: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("at least two source images are required, got {0}")]
    TooFewSources(usize),

    #[error("image too small for metric: {0}")]
    ImageTooSmall(String),

    #[error("not a PGM file (bad magic number)")]
    BadMagic,

    #[error("unsupported netpbm format {0}: only binary P5 is supported")]
    UnsupportedFormat(String),

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("unsupported maxval {0}: only 255 is supported")]
    UnsupportedMaxval(u32),

    #[error("truncated raster: expected {expected} bytes, found {found}")]
    TruncatedRaster { expected: usize, found: usize },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad arguments or parameters.
    Usage,
    /// Filesystem or file-format problems.
    Io,
    /// Image dimensions are incompatible with block processing or each other.
    Dimension,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotBlockAligned { .. }
            | Error::DimensionMismatch { .. }
            | Error::ShapeMismatch(..)
            | Error::RaggedGrid { .. }
            | Error::ImageTooSmall(_) => ErrorClass::Dimension,
            Error::BadMagic
            | Error::UnsupportedFormat(_)
            | Error::MalformedHeader(_)
            | Error::UnsupportedMaxval(_)
            | Error::TruncatedRaster { .. }
            | Error::Io(_) => ErrorClass::Io,
            Error::InvalidImage(_)
            | Error::OutOfBounds { .. }
            | Error::InvalidParameter(_)
            | Error::UnknownMethod(_)
            | Error::TooFewSources(_) => ErrorClass::Usage,
            Error::File { source, .. } | Error::Context { source, .. } => source.class(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
