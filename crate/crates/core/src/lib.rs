//! Fixed-time cluster synchronization of coupled dynamical networks under
//! pinning control.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`matrices`]: cluster partitions, coupling matrices and the A1–A4
//!   structural classes.
//! * [`bounds`]: pinned matrices, their smallest eigenvalues and the
//!   settling-time guarantees for the cluster, complete and master-slave
//!   protocols.
//! * [`dynamics`]: the signed power map, intrinsic node dynamics and the
//!   right-hand sides of every protocol.
//! * [`sim`]: fixed-step integration, error index, settling detection,
//!   Lyapunov inequality checks and parameter sweeps.
//! * [`oracles`]: closed-form comparison ODEs and the scalar inequalities
//!   the bounds rest on.
//! * [`presets`]: the five-node, two-cluster chaotic network example.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bounds;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod matrices;
mod math;
pub mod oracles;
pub mod presets;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::Matrix;
