//! Regression Monte Carlo for standard BSDEs in moderate dimension.

mod basket;
mod driver;
mod srmdp;
mod strat;

pub use basket::{basket_reference_mc, BasketReference};
pub use driver::{Driver, DriverKind};
pub use srmdp::{srmdp_solve, BsdeSolution};
pub use strat::{per_dim_counts, Basis, Stratification, ROOT_BATCHES};
