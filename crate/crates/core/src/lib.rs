//! Generalized integral Menger curvature energies `E^{p,q}` on discrete
//! closed curves: evaluation, differentiation, constrained descent,
//! fractional seminorm diagnostics and the Fourier symbol of the
//! linearized operator.

pub mod check;
pub mod energy;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod quad;
pub mod sobolev;
pub mod symbol;
pub mod variation;

pub use energy::{classify, EnergyParams, EnergyReport, QuadratureSpec, RangeClass, RangeLabel};
pub use error::{MengerError, Result};
pub use geometry::{ClosedCurve, PeriodicOffset, Point, Preset, TriplePoint};
pub use variation::{GradientField, ProjectedGradient};
