// SPDX-License-Identifier: Apache-2.0
//! Behavioral semantics and port signatures of every gate kind.
//!
//! Gates are blocks, not transistor networks. Each kind carries a port
//! signature (how many inputs and outputs, and the largest digit each port
//! accepts or produces) and an exact evaluation function.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::logic::{mux4, unary_apply, LogicLevel, UnaryTable};

/// Library key of a gate kind. Unary operators share one tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateTag {
    #[serde(rename = "AND")]
    And,
    #[serde(rename = "BIN_HA")]
    BinHa,
    #[serde(rename = "BIN_FA")]
    BinFa,
    #[serde(rename = "QM1")]
    Qm1,
    #[serde(rename = "QHA")]
    Qha,
    #[serde(rename = "QFAC2")]
    Qfac2,
    #[serde(rename = "QFAC2WC")]
    Qfac2Wc,
    #[serde(rename = "MUX4")]
    Mux4,
    #[serde(rename = "DECODER")]
    Decoder,
    #[serde(rename = "UNARY")]
    Unary,
}

impl GateTag {
    pub const ALL: [GateTag; 10] = [
        GateTag::And,
        GateTag::BinHa,
        GateTag::BinFa,
        GateTag::Qm1,
        GateTag::Qha,
        GateTag::Qfac2,
        GateTag::Qfac2Wc,
        GateTag::Mux4,
        GateTag::Decoder,
        GateTag::Unary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GateTag::And => "AND",
            GateTag::BinHa => "BIN_HA",
            GateTag::BinFa => "BIN_FA",
            GateTag::Qm1 => "QM1",
            GateTag::Qha => "QHA",
            GateTag::Qfac2 => "QFAC2",
            GateTag::Qfac2Wc => "QFAC2WC",
            GateTag::Mux4 => "MUX4",
            GateTag::Decoder => "DECODER",
            GateTag::Unary => "UNARY",
        }
    }

    /// Output port names, in port order.
    pub fn output_ports(self) -> &'static [&'static str] {
        match self {
            GateTag::And | GateTag::Mux4 | GateTag::Unary => &["out"],
            GateTag::BinHa | GateTag::BinFa | GateTag::Qha | GateTag::Qfac2 => &["sum", "carry"],
            GateTag::Qfac2Wc => &["sum"],
            GateTag::Qm1 => &["product", "carry"],
            GateTag::Decoder => &["nqi", "iqi", "pqi"],
        }
    }

    /// Adders, as opposed to partial-product generators and helpers.
    pub fn is_adder(self) -> bool {
        matches!(
            self,
            GateTag::BinHa | GateTag::BinFa | GateTag::Qha | GateTag::Qfac2 | GateTag::Qfac2Wc
        )
    }
}

impl fmt::Display for GateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GateTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown gate tag `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PortSpec {
    pub name: &'static str,
    pub range_max: u8,
    /// Carry-in ports are where the ternary-carry discipline applies.
    pub carry: bool,
}

const fn port(name: &'static str, range_max: u8) -> PortSpec {
    PortSpec {
        name,
        range_max,
        carry: false,
    }
}

const fn carry_port(name: &'static str, range_max: u8) -> PortSpec {
    PortSpec {
        name,
        range_max,
        carry: true,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Signature {
    pub inputs: &'static [PortSpec],
    pub outputs: &'static [PortSpec],
}

const SIG_AND: Signature = Signature {
    inputs: &[port("a", 1), port("b", 1)],
    outputs: &[port("out", 1)],
};
const SIG_BIN_HA: Signature = Signature {
    inputs: &[port("a", 1), port("b", 1)],
    outputs: &[port("sum", 1), port("carry", 1)],
};
const SIG_BIN_FA: Signature = Signature {
    inputs: &[port("a", 1), port("b", 1), carry_port("cin", 1)],
    outputs: &[port("sum", 1), port("carry", 1)],
};
const SIG_QM1: Signature = Signature {
    inputs: &[port("a", 3), port("b", 3)],
    outputs: &[port("product", 3), port("carry", 2)],
};
const SIG_QHA: Signature = Signature {
    inputs: &[port("a", 3), port("b", 3)],
    outputs: &[port("sum", 3), port("carry", 1)],
};
const SIG_QFAC2: Signature = Signature {
    inputs: &[port("a", 3), port("b", 3), carry_port("cin", 2)],
    outputs: &[port("sum", 3), port("carry", 2)],
};
const SIG_QFAC2WC: Signature = Signature {
    inputs: &[port("a", 3), port("b", 3), carry_port("cin", 2)],
    outputs: &[port("sum", 3)],
};
const SIG_MUX4: Signature = Signature {
    inputs: &[
        port("sel", 3),
        port("in0", 3),
        port("in1", 3),
        port("in2", 3),
        port("in3", 3),
    ],
    outputs: &[port("out", 3)],
};
const SIG_DECODER: Signature = Signature {
    inputs: &[port("in", 3)],
    outputs: &[port("nqi", 3), port("iqi", 3), port("pqi", 3)],
};
const SIG_UNARY: Signature = Signature {
    inputs: &[port("in", 3)],
    outputs: &[port("out", 3)],
};

/// A gate kind. Unary operators carry their table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    And,
    BinHa,
    BinFa,
    Qm1,
    Qha,
    Qfac2,
    Qfac2Wc,
    Mux4,
    Decoder,
    Unary(UnaryTable),
}

/// Up to three output digits of one gate evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Outputs {
    values: [u8; 3],
    len: u8,
}

impl Outputs {
    fn one(a: u8) -> Self {
        Outputs {
            values: [a, 0, 0],
            len: 1,
        }
    }
    fn two(a: u8, b: u8) -> Self {
        Outputs {
            values: [a, b, 0],
            len: 2,
        }
    }
    fn three(a: u8, b: u8, c: u8) -> Self {
        Outputs {
            values: [a, b, c],
            len: 3,
        }
    }
    pub fn as_slice(&self) -> &[u8] {
        &self.values[..usize::from(self.len)]
    }
}

impl GateKind {
    pub fn tag(self) -> GateTag {
        match self {
            GateKind::And => GateTag::And,
            GateKind::BinHa => GateTag::BinHa,
            GateKind::BinFa => GateTag::BinFa,
            GateKind::Qm1 => GateTag::Qm1,
            GateKind::Qha => GateTag::Qha,
            GateKind::Qfac2 => GateTag::Qfac2,
            GateKind::Qfac2Wc => GateTag::Qfac2Wc,
            GateKind::Mux4 => GateTag::Mux4,
            GateKind::Decoder => GateTag::Decoder,
            GateKind::Unary(_) => GateTag::Unary,
        }
    }

    pub fn signature(self) -> Signature {
        match self {
            GateKind::And => SIG_AND,
            GateKind::BinHa => SIG_BIN_HA,
            GateKind::BinFa => SIG_BIN_FA,
            GateKind::Qm1 => SIG_QM1,
            GateKind::Qha => SIG_QHA,
            GateKind::Qfac2 => SIG_QFAC2,
            GateKind::Qfac2Wc => SIG_QFAC2WC,
            GateKind::Mux4 => SIG_MUX4,
            GateKind::Decoder => SIG_DECODER,
            GateKind::Unary(_) => SIG_UNARY,
        }
    }

    /// Name used in serialized netlists and SPICE subcircuits.
    pub fn name(self) -> String {
        match self {
            GateKind::Unary(t) => format!("UNARY_{t}"),
            other => other.tag().as_str().to_owned(),
        }
    }

    /// Evaluates the gate on raw digits. Inputs must already be within the
    /// port ranges except for the carry-in of QFAC2, which is checked here.
    pub fn eval(self, ins: &[u8]) -> Result<Outputs> {
        let expected = self.signature().inputs.len();
        if ins.len() != expected {
            return Err(Error::Arity {
                kind: self.tag(),
                expected,
                got: ins.len(),
            });
        }
        Ok(match self {
            GateKind::And => Outputs::one(ins[0] & ins[1]),
            GateKind::BinHa => {
                let t = ins[0] + ins[1];
                Outputs::two(t & 1, t >> 1)
            }
            GateKind::BinFa => {
                let t = ins[0] + ins[1] + ins[2];
                Outputs::two(t & 1, t >> 1)
            }
            GateKind::Qm1 => {
                let (p, c) = qmul1_raw(ins[0], ins[1]);
                Outputs::two(p, c)
            }
            GateKind::Qha => {
                let t = ins[0] + ins[1];
                Outputs::two(t & 3, t >> 2)
            }
            GateKind::Qfac2 | GateKind::Qfac2Wc => {
                if ins[2] > 2 {
                    return Err(Error::CarryInRange(ins[2]));
                }
                let t = ins[0] + ins[1] + ins[2];
                if self == GateKind::Qfac2 {
                    Outputs::two(t & 3, t >> 2)
                } else {
                    Outputs::one(t & 3)
                }
            }
            GateKind::Mux4 => Outputs::one(ins[1 + usize::from(ins[0] & 3)]),
            GateKind::Decoder => {
                let v = ins[0];
                let lvl = |on: bool| if on { 3 } else { 0 };
                Outputs::three(lvl(v < 1), lvl(v < 2), lvl(v < 3))
            }
            GateKind::Unary(t) => Outputs::one(t.lookup(ins[0])),
        })
    }

    /// Largest value each output can take given the largest value on each
    /// input. `None` marks an output that is provably always zero.
    pub fn output_ranges(self, in_ranges: &[u8]) -> Vec<Option<u8>> {
        let nz = |r: u8| if r == 0 { None } else { Some(r) };
        match self {
            GateKind::And => vec![Some(1)],
            GateKind::BinHa | GateKind::BinFa => {
                let t: u8 = in_ranges.iter().sum();
                vec![Some(1), nz(t / 2)]
            }
            GateKind::Qm1 => vec![Some(3), Some(2)],
            GateKind::Qha | GateKind::Qfac2 => {
                let t: u8 = in_ranges.iter().sum();
                vec![Some(t.clamp(1, 3)), nz(t / 4)]
            }
            GateKind::Qfac2Wc => {
                let t: u8 = in_ranges.iter().sum();
                vec![Some(t.clamp(1, 3))]
            }
            GateKind::Mux4 => vec![Some(
                in_ranges[1..].iter().copied().max().unwrap_or(3).max(1),
            )],
            GateKind::Decoder => vec![Some(3); 3],
            GateKind::Unary(t) => vec![Some(t.max_output().max(1))],
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(t) = s.strip_prefix("UNARY_") {
            return Ok(GateKind::Unary(t.parse()?));
        }
        Ok(match s.parse::<GateTag>()? {
            GateTag::And => GateKind::And,
            GateTag::BinHa => GateKind::BinHa,
            GateTag::BinFa => GateKind::BinFa,
            GateTag::Qm1 => GateKind::Qm1,
            GateTag::Qha => GateKind::Qha,
            GateTag::Qfac2 => GateKind::Qfac2,
            GateTag::Qfac2Wc => GateKind::Qfac2Wc,
            GateTag::Mux4 => GateKind::Mux4,
            GateTag::Decoder => GateKind::Decoder,
            GateTag::Unary => {
                return Err(Error::Parse(
                    "UNARY needs a table suffix, e.g. UNARY_0321".into(),
                ))
            }
        })
    }
}

impl Serialize for GateKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for GateKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn and2(a: LogicLevel, b: LogicLevel) -> LogicLevel {
    LogicLevel::binary(a.value() & b.value()).expect("bit")
}

/// Binary half adder: `(sum, carry)`.
pub fn bin_ha(a: LogicLevel, b: LogicLevel) -> (LogicLevel, LogicLevel) {
    let t = a.value() + b.value();
    (bit(t & 1), bit(t >> 1))
}

/// Binary full adder: `(sum, carry)`.
pub fn bin_fa(a: LogicLevel, b: LogicLevel, cin: LogicLevel) -> (LogicLevel, LogicLevel) {
    let t = a.value() + b.value() + cin.value();
    (bit(t & 1), bit(t >> 1))
}

fn bit(v: u8) -> LogicLevel {
    LogicLevel::binary(v).expect("bit")
}

/// Quaternary half adder. The carry of two quits never exceeds 1.
pub fn qha(a: LogicLevel, b: LogicLevel) -> (LogicLevel, LogicLevel) {
    let t = a.value() + b.value();
    (
        LogicLevel::quaternary(t & 3).expect("quit"),
        LogicLevel::binary(t >> 2).expect("at most 6 / 4"),
    )
}

/// Quaternary full adder with a ternary carry-in. The largest total is
/// 3 + 3 + 2 = 8, so the carry-out is ternary as well.
pub fn qfac2(a: LogicLevel, b: LogicLevel, cin: LogicLevel) -> Result<(LogicLevel, LogicLevel)> {
    if cin.value() > 2 {
        return Err(Error::CarryInRange(cin.value()));
    }
    let t = a.value() + b.value() + cin.value();
    Ok((LogicLevel::quaternary(t & 3)?, LogicLevel::ternary(t >> 2)?))
}

/// One-digit quaternary multiplier, built as in hardware: the multiplicand
/// selects one of four unary operators applied to the multiplier, once for
/// the product digit and once for the carry digit.
pub fn qmul1(a: LogicLevel, b: LogicLevel) -> (LogicLevel, LogicLevel) {
    let product = mux4(
        a,
        [
            unary_apply(UnaryTable::ZERO, b),
            unary_apply(UnaryTable::IDENTITY, b),
            unary_apply(UnaryTable::T0202, b),
            unary_apply(UnaryTable::T0321, b),
        ],
    );
    let carry = mux4(
        a,
        [
            unary_apply(UnaryTable::ZERO, b),
            unary_apply(UnaryTable::ZERO, b),
            unary_apply(UnaryTable::T0011, b),
            unary_apply(UnaryTable::T0012, b),
        ],
    );
    (
        product,
        LogicLevel::ternary(carry.value()).expect("multiplier carry is at most 2"),
    )
}

fn qmul1_raw(a: u8, b: u8) -> (u8, u8) {
    let (p, c) = qmul1(
        LogicLevel::quaternary(a & 3).expect("quit"),
        LogicLevel::quaternary(b & 3).expect("quit"),
    );
    (p.value(), c.value())
}
