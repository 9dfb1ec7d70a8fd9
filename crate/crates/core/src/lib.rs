//! Stackelberg mean-field equilibria with multiple leaders, major followers
//! and a continuum of minor followers, for finite discrete-time games.
//!
//! The solver works through a fictitious common agent: at each period it maps
//! the public belief on leader/major private states and the minor mean field to
//! prescriptions (private state -> action distribution), computed by a
//! backward recursion over the points that are actually reachable.

pub mod belief;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod simulate;
pub mod solver;
pub mod stage;
pub mod verify;
pub mod welfare;

pub use error::{Error, Result};
