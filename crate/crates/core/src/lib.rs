//! Computational laboratory for capacity dimension, asymptotic capacity
//! dimension and the self-similarity machinery that controls them.
//!
//! The crate is organised bottom-up:
//!
//! * [`metric`] finite metric spaces, coverings and Gromov products;
//! * [`coverings`] nets, colored covers, shrinking, merging, amalgamation and
//!   the self-similar refinement pipeline;
//! * [`estimators`] capacity profiles, box counting and doubling constants;
//! * [`spaces`] reference examples (Cantor sets, grids, trees, `Z^n`);
//! * [`complexes`] square complexes modelling Pontryagin surfaces;
//! * [`hyperbolic`] hyperbolic cones, annulus contraction and tree boundaries.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complexes;
pub mod coverings;
pub mod error;
pub mod estimators;
pub mod hyperbolic;
pub mod metric;
pub mod spaces;

pub(crate) mod serde_inf;

pub use error::{Error, Result};
pub use metric::{Covering, CoveringStats, FiniteMetricSpace, Member, Norm, PointId};

/// Version tag embedded in every serialized report.
pub const SCHEMA_VERSION: u32 = 1;
