//! Numerics for elliptic problems on domains with corners and for
//! partially free boundary minimal half disks.
//!
//! The crate is `no_std` with `alloc`; the `std` feature only unlocks
//! parallel helpers.
//!
//! Modules:
//!
//! - [`domain`]: curvilinear polygons, edges, corners, boundary tags.
//! - [`corner_analysis`]: singular exponents, singular functions, resonance,
//!   compatibility and index prediction.
//! - [`extension_ops`]: plateau cutoff, reflection coefficients, the `T_X`
//!   kernel and the inverse-trace constructions.
//! - [`deformation`]: freezing matrices and corner diffeomorphisms.
//! - [`grid_solver`]: structured curvilinear finite differences for mixed
//!   Dirichlet/Robin problems.
//! - [`minimal_disk`]: mean curvature and contact angle residuals, the
//!   linearized operator and Newton's method.
//! - [`continuation`]: path following, fold bracketing and parity counts.
#![cfg_attr(not(feature = "std"), no_std)]
#![cfg_attr(test, allow(unused_imports))]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod continuation;
pub mod corner_analysis;
pub mod deformation;
pub mod domain;
mod error;
pub mod extension_ops;
pub mod grid_solver;
pub mod jet;
pub mod linalg;
pub mod minimal_disk;
pub mod quadrature;
pub mod smooth;

pub use error::{Error, Result};


/// The types and entry points most programs need.
pub mod prelude {
    pub use crate::continuation::{
        census, follow_path, follow_path_with, parity_count, CurvePath, FollowOptions, ParityReport, SolutionBranch,
        Termination,
    };
    pub use crate::corner_analysis::{
        check_compatibility, check_resonance, predict_index, singular_exponents, CornerSpectrum, IndexSetting,
    };
    pub use crate::deformation::{corner_deformation, freeze_matrix, CornerDiffeo, FreezeMatrix};
    pub use crate::domain::{make_half_disk, make_sector, DomainSpec, GAMMA1, GAMMA2};
    pub use crate::extension_ops::{halfplane_extension, polygon_inverse_trace, Data1d, ExtensionField, Field2d};
    pub use crate::grid_solver::{build_halfdisk_grid, solve_bvp, CurvGrid, GridField, MixedBVP};
    pub use crate::minimal_disk::{
        jacobi_kernel_dim, newton_solve, BoundaryCurve, Embedding, HalfDiskMesh, MetricField, NewtonOptions,
        TransversalField,
    };
    pub use crate::{Error, Result};
}
