//! Exit codes and the one-line diagnostic printed first on standard error.

use std::fmt;

use curvop_core::geometry::GeometryError;
use curvop_core::operators::OpError;
use curvop_core::oracle::OracleError;
use curvop_core::spectral::SpectralError;
use curvop_core::spin::SpinError;
use curvop_core::surface::SurfaceError;
use curvop_core::verify::VerifyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Exit 1: output could not be written or an internal step failed.
    Io,
    /// Exit 2: bad flags, config file or surface source.
    Config,
    /// Exit 3: the surface is degenerate somewhere on the chart.
    Degenerate,
    /// Exit 4: verification found an unexcused mismatch.
    Verify,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Io => 1,
            Category::Config => 2,
            Category::Degenerate => 3,
            Category::Verify => 4,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Category::Io => "io",
            Category::Config => "config",
            Category::Degenerate => "degenerate",
            Category::Verify => "verify",
        }
    }
}

/// `message` is a single line; `detail` (caret diagnostics and the like)
/// follows it on later lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub category: Category,
    pub message: String,
    pub detail: Option<String>,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> CliError {
        let message: String = message.into();
        CliError { category, message: message.replace('\n', " "), detail: None }
    }

    pub fn config(message: impl Into<String>) -> CliError {
        CliError::new(Category::Config, message)
    }

    pub fn io(message: impl Into<String>) -> CliError {
        CliError::new(Category::Io, message)
    }

    /// Surface error with a caret diagnostic when it has a position.
    pub fn surface(err: &SurfaceError, source: &str, origin: &str) -> CliError {
        let rendered = err.render(source, origin);
        let mut lines = rendered.splitn(2, '\n');
        let first = lines.next().unwrap_or_default().to_string();
        let mut e = CliError::config(first);
        e.detail = lines.next().map(str::to_string);
        e
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "curvop: error[{}]: {}", self.category.tag(), self.message)?;
        if let Some(d) = &self.detail {
            write!(f, "\n{d}")?;
        }
        Ok(())
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> CliError {
        CliError::config(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> CliError {
        let category = match e {
            GeometryError::InvalidOrder(_) => Category::Config,
            _ => Category::Degenerate,
        };
        CliError::new(category, e.to_string())
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> CliError {
        CliError::new(Category::Degenerate, e.to_string())
    }
}

impl From<OpError> for CliError {
    fn from(e: OpError) -> CliError {
        let category = match &e {
            OpError::Geometry(_) | OpError::Jet(_) | OpError::Spin(_) => Category::Degenerate,
            OpError::InvalidArgument(_) | OpError::NonOrthogonalChart { .. } => Category::Config,
            _ => Category::Io,
        };
        CliError::new(category, e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> CliError {
        CliError::config(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> CliError {
        match e {
            SpectralError::Geometry(g) => g.into(),
            SpectralError::ConvergenceFailure(_) => CliError::io(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> CliError {
        match e {
            VerifyError::Oracle(x) => x.into(),
            VerifyError::Operator(x) => x.into(),
            VerifyError::Geometry(x) => x.into(),
            VerifyError::Spin(x) => x.into(),
            VerifyError::Surface(x) => x.into(),
            VerifyError::Config(m) => CliError::config(m),
        }
    }
}
