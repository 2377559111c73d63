//! Effective operators as normal-ordered differential operators with
//! evaluable coefficient fields.

mod assemble;
mod diffop;
mod expr;
mod fd;
mod local;
mod value;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::jets::JetError;
use crate::spin::SpinError;

pub use assemble::{assemble_dresselhaus, assemble_hamiltonian, assemble_momentum, assemble_oam, assemble_rashba};
pub use diffop::{probe_points, Builder, CoefficientField, DiffOp, Piece, TermInfo, PROBES_PER_AXIS, PRUNE_THRESHOLD};
pub use expr::{normal_order, LocalOp, MultiIndex, OpExpr, MAX_DEGREE};
pub use fd::{apply_to_wavefunction, central_stencil, fornberg_weights, ComplexField, DEFAULT_ACCURACY};
pub use local::{LocalField, LOCAL_ORDER};
pub use value::{Value, ValueKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("cannot combine a {} value with a {} value", left.name(), right.name())]
    KindMismatch { left: ValueKind, right: ValueKind },
    #[error("operator degree {0} exceeds the supported maximum of 3")]
    DegreeOverflow(u8),
    #[error("coefficient field needs {needed} valid derivative orders but only {available} are known")]
    InsufficientOrder { needed: u8, available: u8 },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error("chart is not orthogonal at (u, v) = ({u}, {v}): g12 = {g12:e}")]
    NonOrthogonalChart { u: f64, v: f64, g12: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
