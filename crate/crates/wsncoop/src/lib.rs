//! Scenario files, metrics output and the `wsncoop` command line on top of
//! [`wsncoop_core`].

pub mod cli;
pub mod load;
pub mod output;
pub mod presets;
pub mod schema;

pub use load::{load_scenario, parse_scenario, resolve_scenario, LoadError};
