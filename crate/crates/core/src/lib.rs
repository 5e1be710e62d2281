pub mod error;
pub mod graph;
pub mod layout;
pub mod moments;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod response;
pub mod wavefunctions;
pub mod eigensolve;
pub mod ensemble;
pub mod roots;
pub mod secular;
pub mod validation;

pub use error::{Error, Result};
pub use graph::{DeltaPosition, DeltaSpec, EdgeSpec, GraphSpec, Topology};
