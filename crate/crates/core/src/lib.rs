//! Compiler and analyzer for a vertical-nanowire 3D CMOS fabric.
//!
//! The flow reads a gate netlist, places cells onto stacked gate levels of a
//! nanowire grid, routes signals through segments, bridges and coaxial shells,
//! checks the result against the source netlist, and reports thermal and
//! performance metrics.

pub mod cells;
pub mod config;
pub mod fabric;
pub mod flow;
pub mod metrics;
pub mod netlist;
pub mod placer;
pub mod router;
pub mod sim;
mod sparse;
pub mod thermal;

pub use cells::{get_template, CellKind, CellTemplate};
pub use config::{ConfigError, FabricConfig};
pub use fabric::{build_grid, resource_graph, GridCoord, NanowireGrid, Resource, ResourceGraph};
pub use netlist::{parse_netlist, Netlist, NetlistError};
