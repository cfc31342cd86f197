//! Scalar-flat Kähler metrics from the momentum construction on line bundles over
//! projective space, their asymptotics at the cusp and at the asymptotically
//! Euclidean end, a potential-level gluing diagnostic, the indicial calculus of the
//! model operator on the cusp cylinder, and exact average-scalar-curvature formulas.

pub mod asymptotics;
pub mod curvature;
pub mod cylinder;
pub mod error;
pub mod gluing;
pub mod jet;
pub mod momentum;
pub mod poly;
pub mod quad;
pub mod specialfn;
pub mod spectral_e;
pub mod topo;
pub mod weighted;

pub mod cli;

pub use error::{Error, Result};
pub use jet::Jet;
