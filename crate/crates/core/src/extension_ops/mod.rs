//! Inverse-trace extensions: the plateau cutoff, reflection coefficients,
//! the `T_X` kernel, quadrant and half-plane case analyses, and the polygon
//! assembly.
//!
//! Chart conventions: on the bottom edge `y = 0` the oblique operator is
//! `−∂_y + β∂_x`; on the left edge `x = 0` it is `−∂_x + α∂_y`. Dirichlet
//! data is the trace itself.

mod cutoff;
mod data;
mod field;
mod halfplane;
pub use halfplane::halfplane_extension;
mod kernel;
mod polygon;
pub use polygon::{polygon_inverse_trace, EdgeData};
mod quadrant;
pub use quadrant::{
    quadrant_dirichlet_dirichlet, quadrant_extension, quadrant_oblique_dirichlet, quadrant_oblique_oblique,
    EdgeCondition,
};

pub use cutoff::{build_cutoff, reflection_coeffs, PlateauCutoff, ReflectionCoeffs, REFLECTION};
pub use data::Data1d;
pub use field::{BBox, ExtensionField, Field2d};

pub use kernel::{t_x_extend, t_y_extend};
pub use crate::jet::Jet2;

/// Data below this magnitude counts as zero in corner compatibility checks.
pub const COMPAT_TOL: f64 = 1e-10;
