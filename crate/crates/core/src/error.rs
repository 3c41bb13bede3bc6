// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::gates::GateTag;
use crate::netlist::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range_max {0}, expected 1, 2 or 3")]
    InvalidRange(u8),
    #[error("value {value} exceeds range_max {range_max}")]
    ValueOutOfRange { value: u8, range_max: u8 },
    #[error("carry-in {0} is outside the ternary carry range")]
    CarryInRange(u8),
    #[error("{kind} expects {expected} inputs, got {got}")]
    Arity {
        kind: GateTag,
        expected: usize,
        got: usize,
    },
    #[error("unsupported radix {0}, expected 2 or 4")]
    InvalidRadix(u32),
    #[error("operand width must be at least 1")]
    ZeroWidth,
    #[error("matrix has {0} rows, the final adder accepts at most 2")]
    TooManyRows(usize),
    #[error("wire {wire} with range_max {range_max} cannot drive carry port of {kind}")]
    CarryPortRange {
        kind: GateTag,
        wire: u32,
        range_max: u8,
    },
    #[error("assignment: {0}")]
    Assignment(String),
    #[error("wire w{wire} carried {value}, above its range_max {range_max}")]
    RangeSoundness { wire: u32, value: u8, range_max: u8 },
    #[error("unconnected output port {port} of gate g{gate} evaluated to {value}")]
    DroppedNonzero { gate: u32, port: usize, value: u8 },
    #[error("input space of {vectors} vectors exceeds the exhaustive cap of {cap}; use random verification")]
    SpaceTooLarge { vectors: u128, cap: u128 },
    #[error("vector count must be at least 1")]
    ZeroCount,
    #[error("no library entry for {0}")]
    MissingEntry(String),
    #[error("timing calibration is underdetermined; free variables: {}", .0.join(", "))]
    Underdetermined(Vec<String>),
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("calibration needs at least one constraint")]
    NoConstraints,
    #[error("comparison needs at least two designs")]
    TooFewDesigns,
    #[error("invalid netlist: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    let mut s = v
        .iter()
        .take(5)
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ");
    if v.len() > 5 {
        s.push_str(&format!("; ... ({} total)", v.len()));
    }
    s
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
