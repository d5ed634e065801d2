use std::io;

/// Errors produced by the saliency engine and the retargeting methods.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated (shape, size, range).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The input is well-formed but carries no usable signal for the method,
    /// e.g. an achromatic ROI for hue retargeting or a mask with no surround.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An iterative solver diverged or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::Degenerate(msg.into())
}
