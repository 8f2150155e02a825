// index-juggling over small tensors reads clearest with explicit loops, and
// the negated comparisons are deliberate NaN guards
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

//! Extrinsic geometry of hypersurfaces immersed in the product of a
//! constant-curvature space and a line, with pointwise residual checks for
//! the lambda-biharmonicity system, the identity chain it implies, and the
//! rotation-hypersurface machinery of the classification arguments.
//!
//! Layering: [`jet`] and [`linalg`] are arithmetic kernels; [`ambient`]
//! models the product space in a conformal chart; [`immersion`] assembles
//! exact pointwise frames; [`calculus`] differentiates fields over chart
//! lattices; [`residuals`] turns identities into swept reports; [`rotation`]
//! handles profile curves and their ODEs; [`catalog`] ships the solved
//! ground-truth examples.

pub mod ambient;
pub mod calculus;
pub mod catalog;
pub mod error;
pub mod immersion;
pub mod jet;
pub mod linalg;
pub mod residuals;
pub mod rotation;

pub use ambient::{AmbientPoint, AmbientSpace};
pub use calculus::{ChartGrid, ScalarField};
pub use catalog::{CatalogEntry, LambdaStar};
pub use error::{GeomError, Result};
pub use immersion::{GeometryFrame, Immersion};
pub use residuals::{LambdaResidual, ResidualReport, SurfaceData};
