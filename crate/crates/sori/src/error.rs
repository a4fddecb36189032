use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] sori_core::Error),

    #[error("XML parse error at line {line}: {message}")]
    Xml { line: u32, message: String },

    #[error("MusicXML structure error at line {line}: {message}")]
    Structure { line: u32, message: String },

    #[error("unsupported MusicXML structure at line {line}: <{element}> {reason}")]
    Unsupported {
        line: u32,
        element: String,
        reason: String,
    },

    #[error("{format} row {row}: {message}")]
    Row {
        format: &'static str,
        row: usize,
        message: String,
    },

    #[error("{format}: {message}")]
    Format {
        format: &'static str,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("incompatible histograms: {0}")]
    IncompatibleHistogram(String),

    #[error("incompatible contours: {0}")]
    IncompatibleContour(String),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("stage `{stage}`{}: {source}", daemok.as_ref().map(|d| format!(" (daemok `{d}`)")).unwrap_or_default())]
    Stage {
        stage: &'static str,
        daemok: Option<String>,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn row(format: &'static str, row: usize, message: impl Into<String>) -> Error {
        Error::Row {
            format,
            row,
            message: message.into(),
        }
    }

    /// Short machine-readable category used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(e) => match e {
                sori_core::Error::InvalidPitch(_) | sori_core::Error::InvalidToken(_) => "invalid_input",
                sori_core::Error::MeasureDuration { .. }
                | sori_core::Error::EventOrder { .. }
                | sori_core::Error::NonPositiveDuration { .. }
                | sori_core::Error::DanglingTie { .. }
                | sori_core::Error::InvalidTimeSignature { .. } => "score",
                sori_core::Error::BeatCount(_) | sori_core::Error::BeatOrder { .. } => "beat_grid",
                sori_core::Error::NotEnoughData { .. } => "not_enough_data",
                sori_core::Error::MissingDependency { .. } => "missing_dependency",
                sori_core::Error::Config(_) => "config",
                _ => "domain",
            },
            Error::Xml { .. } => "xml_parse",
            Error::Structure { .. } => "musicxml_structure",
            Error::Unsupported { .. } => "musicxml_unsupported",
            Error::Row { .. } | Error::Format { .. } => "format",
            Error::Io { .. } => "io",
            Error::IncompatibleHistogram(_) => "incompatible_histogram",
            Error::IncompatibleContour(_) => "incompatible_contour",
            Error::Manifest(_) => "manifest",
            Error::Stage { source, .. } => source.kind(),
        }
    }
}
