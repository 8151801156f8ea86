//! Numerical experiments on norm inflation for 2D Euler in supercritical
//! Sobolev spaces, on polar grids with angular Fourier modes.

pub mod biot_savart;
pub mod config;
pub mod construction;
pub mod error;
pub mod evolve;
pub mod expcli;
pub mod field;
pub mod gluing;
pub mod io;
pub mod grid;
pub mod profiles;
pub mod pseudo;
pub mod sobolev;
pub mod stats;

pub use error::{Error, Result};
pub use field::PolarField;
pub use grid::{RadialGrid, Spacing};
