// SPDX-License-Identifier: Apache-2.0
//! Generation, verification and cost analysis of binary and quaternary
//! Wallace-tree multipliers built from multi-valued logic gates.

pub mod error;
pub mod gates;
pub mod logic;
pub mod metrics;
pub mod netgen;
pub mod netlist;
pub mod sim;
pub mod spice;

pub use error::{Error, Result};
pub use gates::{GateKind, GateTag};
pub use logic::{LogicLevel, UnaryTable};
pub use netgen::gen_multiplier;
pub use netlist::{GateInventory, Netlist, Violation};
