//! Numerical toolkit for certifying the multipartite entanglement structure
//! of continuous-variable quantum states: covariance-matrix criteria and SDP
//! witnesses on the Gaussian side, truncated Fock-space witnesses on the
//! non-Gaussian side.

pub mod bridge;
pub(crate) mod eigen;
pub mod entanglement_sdp;
pub mod error;
pub mod fock;
pub mod fs_analytics;
pub mod sdp;
pub mod symplectic;
pub mod threshold;
pub mod witnesses;

pub use error::{Error, Result};
