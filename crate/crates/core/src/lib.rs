//! Equilibrium shapes of a double bubble of two cells in contact, with
//! surface tensions on the three caps and a line tension on the contact ring.
//!
//! A configuration is described by the apex positions `x1 < x3 < x2` of the
//! three spherical caps on the symmetry axis and the ring radius `h`. Cap 1
//! bounds cell 1 on the left, cap 2 bounds cell 2 on the right, and cap 3 is
//! the interface between the cells.
//!
//! * [`surface`]: volume-constrained minimizer without line tension.
//! * [`pressure`]: closed-form configuration for prescribed pressures.
//! * [`line`]: critical points and global minimum with line tension.
//! * [`scan`]: phase diagrams over `(t1, t2)` and threshold values.
//! * [`inference`]: recovering tensions from observed geometry.
//! * [`oracle`]: brute-force minimizer for cross-checking.

pub mod error;
pub mod geometry;
pub mod inference;
pub mod line;
pub mod oracle;
pub mod poly;
pub mod pressure;
pub mod scan;
pub mod surface;

pub use error::{DoubletError, Result};
pub use geometry::{
    BoundaryState, DoubletState, PressurePair, ReducedVolumes, Surface, Tensions,
};
pub use line::{Classification, CriticalPoint, CriticalSearch, GlobalResult, GlobalTag};
pub use surface::{RegimeLabel, SurfaceSolution, TensionRegime};
