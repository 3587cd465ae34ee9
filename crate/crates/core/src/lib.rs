//! Planning, rehearsal and export toolkit for drone cinematography and
//! photogrammetry capture.
//!
//! - [`geometry`]: frames, camera footprints, visibility
//! - [`scan`]: layered grid capture missions
//! - [`shot`]: parametric cinematic shot trajectories
//! - [`sim`]: deterministic fixed-tick simulation
//! - [`flightplan`]: plan formats (QGroundControl, Litchi, capture manifest)
//! - [`project`]: versioned scene persistence

pub mod error;
pub mod flightplan;
pub mod geometry;
pub mod project;
pub mod scan;
pub mod shot;
pub mod sim;

pub use error::{Error, Result};
