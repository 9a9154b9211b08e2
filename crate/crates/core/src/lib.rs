//! Profit-oriented hub line location with gravity demand.
//!
//! The pipeline is: load or generate an [`Instance`], close it into a
//! [`Problem`], enumerate candidate hub paths per commodity, then pick the
//! hub line either combinatorially ([`solver`]) or through one of the MILP
//! formulations exported by [`milp`].

pub mod auxgraph;
pub mod error;
pub mod geo;
pub mod gravity;
pub mod milp;
pub mod model;
pub mod paths;
pub mod rng;
pub mod solver;

pub use error::{GeoError, GravityError, MilpError, ModelError, PathError, SolverError};
pub use model::{Commodity, Instance, Params, Problem};
