// SPDX-License-Identifier: Apache-2.0
//! Logic values of the binary/ternary/quaternary domain and the small
//! single-input operators the quaternary gates are built from.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A digit together with the largest value it may take.
///
/// `range_max` is 1 for bits, 2 for ternary carries (trits) and 3 for quits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawLevel", into = "RawLevel")]
pub struct LogicLevel {
    value: u8,
    range_max: u8,
}

#[derive(Serialize, Deserialize)]
struct RawLevel {
    value: u8,
    range_max: u8,
}

impl TryFrom<RawLevel> for LogicLevel {
    type Error = Error;
    fn try_from(raw: RawLevel) -> Result<Self, Error> {
        LogicLevel::new(raw.value, raw.range_max)
    }
}

impl From<LogicLevel> for RawLevel {
    fn from(l: LogicLevel) -> Self {
        RawLevel {
            value: l.value,
            range_max: l.range_max,
        }
    }
}

impl LogicLevel {
    pub fn new(value: u8, range_max: u8) -> Result<Self, Error> {
        if !(1..=3).contains(&range_max) {
            return Err(Error::InvalidRange(range_max));
        }
        if value > range_max {
            return Err(Error::ValueOutOfRange { value, range_max });
        }
        Ok(LogicLevel { value, range_max })
    }

    pub fn binary(value: u8) -> Result<Self, Error> {
        Self::new(value, 1)
    }

    pub fn ternary(value: u8) -> Result<Self, Error> {
        Self::new(value, 2)
    }

    pub fn quaternary(value: u8) -> Result<Self, Error> {
        Self::new(value, 3)
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.value
    }

    #[inline]
    pub fn range_max(self) -> u8 {
        self.range_max
    }

    /// Re-reads the digit as a quit. Always legal since every range fits in {0..3}.
    pub fn widen(self) -> LogicLevel {
        LogicLevel {
            value: self.value,
            range_max: 3,
        }
    }
}

impl fmt::Display for LogicLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.value, self.range_max)
    }
}

/// A single-input quaternary operator, named by its outputs for inputs 0,1,2,3.
///
/// `0321` maps 0→0, 1→3, 2→2, 3→1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnaryTable {
    outputs: [u8; 4],
}

impl UnaryTable {
    pub const ZERO: UnaryTable = UnaryTable {
        outputs: [0, 0, 0, 0],
    };
    pub const IDENTITY: UnaryTable = UnaryTable {
        outputs: [0, 1, 2, 3],
    };
    pub const T0202: UnaryTable = UnaryTable {
        outputs: [0, 2, 0, 2],
    };
    pub const T0321: UnaryTable = UnaryTable {
        outputs: [0, 3, 2, 1],
    };
    pub const T0001: UnaryTable = UnaryTable {
        outputs: [0, 0, 0, 1],
    };
    pub const T0011: UnaryTable = UnaryTable {
        outputs: [0, 0, 1, 1],
    };
    pub const T0012: UnaryTable = UnaryTable {
        outputs: [0, 0, 1, 2],
    };

    pub fn new(outputs: [u8; 4]) -> Result<Self, Error> {
        if let Some(&bad) = outputs.iter().find(|&&o| o > 3) {
            return Err(Error::ValueOutOfRange {
                value: bad,
                range_max: 3,
            });
        }
        Ok(UnaryTable { outputs })
    }

    pub fn outputs(&self) -> [u8; 4] {
        self.outputs
    }

    /// Digit-string name, e.g. `"0321"`.
    pub fn name(&self) -> String {
        self.outputs.iter().map(|d| char::from(b'0' + d)).collect()
    }

    /// Largest value the table can produce.
    pub fn max_output(&self) -> u8 {
        self.outputs.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn lookup(&self, x: u8) -> u8 {
        self.outputs[usize::from(x & 3)]
    }
}

impl FromStr for UnaryTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bytes = s.as_bytes();
        if bytes.len() != 4 || !bytes.iter().all(|b| (b'0'..=b'3').contains(b)) {
            return Err(Error::Parse(format!("invalid unary table name `{s}`")));
        }
        let mut outputs = [0u8; 4];
        for (o, b) in outputs.iter_mut().zip(bytes) {
            *o = b - b'0';
        }
        Ok(UnaryTable { outputs })
    }
}

impl fmt::Display for UnaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn expect_quit(x: LogicLevel) -> u8 {
    debug_assert!(x.value <= 3);
    x.value
}

/// Applies a unary table to a quit. The result is always a quaternary level.
pub fn unary_apply(table: UnaryTable, x: LogicLevel) -> LogicLevel {
    LogicLevel {
        value: table.lookup(expect_quit(x)),
        range_max: 3,
    }
}

/// Outputs of the three threshold detectors, each a pseudo-binary level in {0,3}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    pub nqi: LogicLevel,
    pub iqi: LogicLevel,
    pub pqi: LogicLevel,
}

impl Thresholds {
    pub fn values(&self) -> [u8; 3] {
        [self.nqi.value, self.iqi.value, self.pqi.value]
    }
}

/// Threshold decoding of a quit. The detectors switch at 1, 2 and 3.
pub fn decode_thresholds(x: LogicLevel) -> Thresholds {
    let v = expect_quit(x);
    let level = |on: bool| LogicLevel {
        value: if on { 3 } else { 0 },
        range_max: 3,
    };
    Thresholds {
        nqi: level(v < 1),
        iqi: level(v < 2),
        pqi: level(v < 3),
    }
}

/// Four-way multiplexer with a quaternary select.
pub fn mux4(sel: LogicLevel, inputs: [LogicLevel; 4]) -> LogicLevel {
    inputs[usize::from(expect_quit(sel))]
}
