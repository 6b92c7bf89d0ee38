use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: entry {entry}: {message}")]
    Parse { path: PathBuf, entry: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate pose: {0}")]
    DegeneratePose(&'static str),

    #[error("contract violation: {0}")]
    Contract(&'static str),

    #[error("{path}: mask is {mask_w}x{mask_h} but image is {image_w}x{image_h}")]
    DimensionMismatch {
        path: PathBuf,
        image_w: u32,
        image_h: u32,
        mask_w: u32,
        mask_h: u32,
    },

    #[error("affine transform is not invertible (det = {0})")]
    NonInvertible(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, entry: impl ToString, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            entry: entry.to_string(),
            message: message.into(),
        }
    }
}
