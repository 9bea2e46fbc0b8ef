//! Analytical and Monte Carlo performance of a Rician RF hop followed by
//! an optical hop redirected by an optical reconfigurable intelligent
//! surface, with decode-and-forward at the relay.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod alternate_forms;
pub mod fso;
pub mod mc;
pub mod params;
pub mod performance;
pub mod quadrature;
pub mod rf;
pub mod specfun;

pub use fso::FsoLink;
pub use params::{GeometryMode, SystemParams};
pub use performance::LinkPair;
pub use rf::RfLink;
