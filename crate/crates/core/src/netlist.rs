// SPDX-License-Identifier: Apache-2.0
//! Gate-level netlists: an immutable DAG of gate instances over typed wires.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{GateKind, GateTag};

pub const FORMAT_NAME: &str = "mvlmul-netlist";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WireId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateId(pub u32);

impl WireId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl GateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operand {
    X,
    Y,
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operand::X => "x",
            Operand::Y => "y",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    Input { operand: Operand, digit: usize },
    Gate { gate: GateId, port: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub id: WireId,
    pub range_max: u8,
    pub driver: Driver,
}

/// Where a gate sits in the multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateRole {
    PartialProduct,
    /// Reduction-tree stage, numbered from 1.
    Reduction(u32),
    FinalAdd,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    pub kind: GateKind,
    pub role: GateRole,
    pub inputs: Vec<WireId>,
    /// `None` marks an unconnected output port.
    pub outputs: Vec<Option<WireId>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPort {
    pub operand: Operand,
    pub digit: usize,
    pub wire: WireId,
}

/// A complete multiplier netlist. Product digits are least significant
/// first; a `None` output digit is constant zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Netlist {
    radix: u32,
    width: usize,
    wires: Vec<Wire>,
    gates: Vec<Gate>,
    inputs: Vec<InputPort>,
    outputs: Vec<Option<WireId>>,
}

#[derive(Serialize, Deserialize)]
struct NetlistDoc {
    format: String,
    version: u32,
    radix: u32,
    width: usize,
    wires: Vec<Wire>,
    gates: Vec<Gate>,
    inputs: Vec<InputPort>,
    outputs: Vec<Option<WireId>>,
}

impl Netlist {
    /// Assembles a netlist without checking it. Use [`Netlist::validate`].
    pub fn from_parts(
        radix: u32,
        width: usize,
        wires: Vec<Wire>,
        gates: Vec<Gate>,
        inputs: Vec<InputPort>,
        outputs: Vec<Option<WireId>>,
    ) -> Self {
        Netlist {
            radix,
            width,
            wires,
            gates,
            inputs,
            outputs,
        }
    }

    #[allow(clippy::type_complexity)]
    pub fn into_parts(
        self,
    ) -> (
        u32,
        usize,
        Vec<Wire>,
        Vec<Gate>,
        Vec<InputPort>,
        Vec<Option<WireId>>,
    ) {
        (
            self.radix,
            self.width,
            self.wires,
            self.gates,
            self.inputs,
            self.outputs,
        )
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn inputs(&self) -> &[InputPort] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Option<WireId>] {
        &self.outputs
    }

    pub fn wire(&self, id: WireId) -> &Wire {
        &self.wires[id.index()]
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.index()]
    }

    /// Input wire of one operand digit.
    pub fn input_wire(&self, operand: Operand, digit: usize) -> Option<WireId> {
        self.inputs
            .iter()
            .find(|p| p.operand == operand && p.digit == digit)
            .map(|p| p.wire)
    }

    /// Short design label such as `r4n2`.
    pub fn label(&self) -> String {
        format!("r{}n{}", self.radix, self.width)
    }

    pub fn inventory(&self) -> GateInventory {
        GateInventory::from_gates(self.gates.iter())
    }

    pub fn inventory_by_role(&self, role: impl Fn(GateRole) -> bool) -> GateInventory {
        GateInventory::from_gates(self.gates.iter().filter(|g| role(g.role)))
    }

    /// Number of reduction-tree stages.
    pub fn stages(&self) -> u32 {
        self.gates
            .iter()
            .filter_map(|g| match g.role {
                GateRole::Reduction(s) => Some(s),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Gates in an order where every gate follows the drivers of its inputs.
    pub fn topo_order(&self) -> Result<Vec<GateId>, Vec<Violation>> {
        let n = self.gates.len();
        let mut indeg = vec![0usize; n];
        let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); n];
        for g in &self.gates {
            for w in &g.inputs {
                if let Some(Wire {
                    driver: Driver::Gate { gate, .. },
                    ..
                }) = self.wires.get(w.index())
                {
                    if gate.index() < n {
                        indeg[g.id.index()] += 1;
                        fanout[gate.index()].push(g.id.index());
                    }
                }
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            order.push(GateId(i as u32));
            for &j in &fanout[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            let gates = (0..n)
                .filter(|&i| indeg[i] > 0)
                .map(|i| GateId(i as u32))
                .collect();
            Err(vec![Violation::Cycle { gates }])
        }
    }

    /// Checks ids, drivers, port arity and ranges, acyclicity and the
    /// primary interface. Returns every violation found.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.radix != 2 && self.radix != 4 {
            v.push(Violation::Radix(self.radix));
        }
        let digit_range = if self.radix == 2 { 1 } else { 3 };

        for (i, w) in self.wires.iter().enumerate() {
            if w.id.index() != i {
                v.push(Violation::WireId { index: i, id: w.id });
            }
            if !(1..=3).contains(&w.range_max) {
                v.push(Violation::WireRange {
                    wire: w.id,
                    range_max: w.range_max,
                });
            }
        }

        // Count how many ports claim each wire.
        let mut claims = vec![0usize; self.wires.len()];
        for p in &self.inputs {
            match self.wires.get(p.wire.index()) {
                Some(w) => {
                    claims[p.wire.index()] += 1;
                    let want = Driver::Input {
                        operand: p.operand,
                        digit: p.digit,
                    };
                    if w.driver != want {
                        v.push(Violation::DriverMismatch { wire: p.wire });
                    }
                    if w.range_max > digit_range {
                        v.push(Violation::InputRange {
                            wire: p.wire,
                            range_max: w.range_max,
                        });
                    }
                }
                None => v.push(Violation::UnknownWire { wire: p.wire }),
            }
        }

        for (i, g) in self.gates.iter().enumerate() {
            if g.id.index() != i {
                v.push(Violation::GateId { index: i, id: g.id });
            }
            let sig = g.kind.signature();
            if g.inputs.len() != sig.inputs.len() || g.outputs.len() != sig.outputs.len() {
                v.push(Violation::Arity {
                    gate: g.id,
                    kind: g.kind.tag(),
                    inputs: g.inputs.len(),
                    outputs: g.outputs.len(),
                });
                continue;
            }
            for (port, (w, spec)) in g.inputs.iter().zip(sig.inputs).enumerate() {
                match self.wires.get(w.index()) {
                    Some(wire) if wire.range_max > spec.range_max => v.push(Violation::PortRange {
                        gate: g.id,
                        port,
                        wire: *w,
                        wire_range: wire.range_max,
                        port_range: spec.range_max,
                        carry: spec.carry,
                    }),
                    Some(_) => {}
                    None => v.push(Violation::UnknownWire { wire: *w }),
                }
            }
            for (port, (w, spec)) in g.outputs.iter().zip(sig.outputs).enumerate() {
                let Some(w) = w else { continue };
                match self.wires.get(w.index()) {
                    Some(wire) => {
                        claims[w.index()] += 1;
                        if wire.driver != (Driver::Gate { gate: g.id, port }) {
                            v.push(Violation::DriverMismatch { wire: *w });
                        }
                        if wire.range_max > spec.range_max {
                            v.push(Violation::PortRange {
                                gate: g.id,
                                port,
                                wire: *w,
                                wire_range: wire.range_max,
                                port_range: spec.range_max,
                                carry: false,
                            });
                        }
                    }
                    None => v.push(Violation::UnknownWire { wire: *w }),
                }
            }
        }

        for (i, &n) in claims.iter().enumerate() {
            let wire = WireId(i as u32);
            match n {
                0 => v.push(Violation::Undriven { wire }),
                1 => {}
                drivers => v.push(Violation::MultipleDrivers { wire, drivers }),
            }
        }

        for operand in [Operand::X, Operand::Y] {
            for digit in 0..self.width {
                let n = self
                    .inputs
                    .iter()
                    .filter(|p| p.operand == operand && p.digit == digit)
                    .count();
                if n != 1 {
                    v.push(Violation::InputPort {
                        operand,
                        digit,
                        count: n,
                    });
                }
            }
        }
        if self.inputs.len() != 2 * self.width {
            v.push(Violation::InputCount {
                expected: 2 * self.width,
                got: self.inputs.len(),
            });
        }
        if self.outputs.len() != 2 * self.width {
            v.push(Violation::OutputCount {
                expected: 2 * self.width,
                got: self.outputs.len(),
            });
        }
        for w in self.outputs.iter().flatten() {
            match self.wires.get(w.index()) {
                Some(wire) if wire.range_max > digit_range => v.push(Violation::OutputRange {
                    wire: *w,
                    range_max: wire.range_max,
                }),
                Some(_) => {}
                None => v.push(Violation::UnknownWire { wire: *w }),
            }
        }

        if v.is_empty() {
            if let Err(mut cyc) = self.topo_order() {
                v.append(&mut cyc);
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = NetlistDoc {
            format: FORMAT_NAME.to_owned(),
            version: FORMAT_VERSION,
            radix: self.radix,
            width: self.width,
            wires: self.wires.clone(),
            gates: self.gates.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses a netlist document. Structural checks are left to [`Netlist::validate`].
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: NetlistDoc = serde_json::from_str(s)?;
        if doc.format != FORMAT_NAME {
            return Err(Error::Parse(format!("unexpected format `{}`", doc.format)));
        }
        if doc.version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported netlist version {} (expected {FORMAT_VERSION})",
                doc.version
            )));
        }
        Ok(Netlist {
            radix: doc.radix,
            width: doc.width,
            wires: doc.wires,
            gates: doc.gates,
            inputs: doc.inputs,
            outputs: doc.outputs,
        })
    }
}

/// A structural defect found by [`Netlist::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    Radix(u32),
    WireId {
        index: usize,
        id: WireId,
    },
    GateId {
        index: usize,
        id: GateId,
    },
    WireRange {
        wire: WireId,
        range_max: u8,
    },
    UnknownWire {
        wire: WireId,
    },
    Undriven {
        wire: WireId,
    },
    MultipleDrivers {
        wire: WireId,
        drivers: usize,
    },
    DriverMismatch {
        wire: WireId,
    },
    Arity {
        gate: GateId,
        kind: GateTag,
        inputs: usize,
        outputs: usize,
    },
    PortRange {
        gate: GateId,
        port: usize,
        wire: WireId,
        wire_range: u8,
        port_range: u8,
        carry: bool,
    },
    InputPort {
        operand: Operand,
        digit: usize,
        count: usize,
    },
    InputCount {
        expected: usize,
        got: usize,
    },
    InputRange {
        wire: WireId,
        range_max: u8,
    },
    OutputCount {
        expected: usize,
        got: usize,
    },
    OutputRange {
        wire: WireId,
        range_max: u8,
    },
    Cycle {
        gates: Vec<GateId>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Radix(r) => write!(f, "radix {r} is not 2 or 4"),
            Violation::WireId { index, id } => write!(f, "wire at index {index} has id {id}"),
            Violation::GateId { index, id } => write!(f, "gate at index {index} has id {id}"),
            Violation::WireRange { wire, range_max } => {
                write!(f, "{wire} has invalid range_max {range_max}")
            }
            Violation::UnknownWire { wire } => write!(f, "reference to unknown wire {wire}"),
            Violation::Undriven { wire } => write!(f, "{wire} has no driver"),
            Violation::MultipleDrivers { wire, drivers } => {
                write!(f, "{wire} has {drivers} drivers")
            }
            Violation::DriverMismatch { wire } => {
                write!(f, "{wire} driver record disagrees with its driving port")
            }
            Violation::Arity {
                gate,
                kind,
                inputs,
                outputs,
            } => write!(f, "{gate} ({kind}) has {inputs} inputs / {outputs} outputs"),
            Violation::PortRange {
                gate,
                port,
                wire,
                wire_range,
                port_range,
                carry,
            } => write!(
                f,
                "{wire} (range {wire_range}) on {}port {port} of {gate} (range {port_range})",
                if *carry { "carry " } else { "" }
            ),
            Violation::InputPort {
                operand,
                digit,
                count,
            } => write!(f, "operand digit {operand}{digit} declared {count} times"),
            Violation::InputCount { expected, got } => {
                write!(f, "expected {expected} input digits, got {got}")
            }
            Violation::InputRange { wire, range_max } => {
                write!(f, "input {wire} has range {range_max} above the radix")
            }
            Violation::OutputCount { expected, got } => {
                write!(f, "expected {expected} product digits, got {got}")
            }
            Violation::OutputRange { wire, range_max } => {
                write!(f, "output {wire} has range {range_max} above the radix")
            }
            Violation::Cycle { gates } => {
                write!(f, "combinational cycle through {} gates", gates.len())
            }
        }
    }
}

/// Gate counts per kind.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateInventory(BTreeMap<GateTag, usize>);

impl GateInventory {
    pub fn from_gates<'a>(gates: impl IntoIterator<Item = &'a Gate>) -> Self {
        let mut m = BTreeMap::new();
        for g in gates {
            *m.entry(g.kind.tag()).or_insert(0) += 1;
        }
        GateInventory(m)
    }

    pub fn count(&self, tag: GateTag) -> usize {
        self.0.get(&tag).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GateTag, usize)> + '_ {
        self.0.iter().map(|(t, n)| (*t, *n))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(GateTag, usize)> for GateInventory {
    fn from_iter<I: IntoIterator<Item = (GateTag, usize)>>(iter: I) -> Self {
        GateInventory(iter.into_iter().filter(|(_, n)| *n > 0).collect())
    }
}

impl fmt::Display for GateInventory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (t, n)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}:{n}")?;
        }
        f.write_str("}")
    }
}

/// Incremental construction with range propagation. Output wire ranges are
/// derived from the ranges of the connected inputs.
#[derive(Debug)]
pub struct NetlistBuilder {
    radix: u32,
    width: usize,
    wires: Vec<Wire>,
    gates: Vec<Gate>,
    inputs: Vec<InputPort>,
}

impl NetlistBuilder {
    pub fn new(radix: u32, width: usize) -> Self {
        NetlistBuilder {
            radix,
            width,
            wires: Vec::new(),
            gates: Vec::new(),
            inputs: Vec::new(),
        }
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    pub fn wire_range(&self, w: WireId) -> u8 {
        self.wires[w.index()].range_max
    }

    pub fn add_input(&mut self, operand: Operand, digit: usize) -> WireId {
        let id = WireId(self.wires.len() as u32);
        self.wires.push(Wire {
            id,
            range_max: if self.radix == 2 { 1 } else { 3 },
            driver: Driver::Input { operand, digit },
        });
        self.inputs.push(InputPort {
            operand,
            digit,
            wire: id,
        });
        id
    }

    /// Adds a gate, connecting every output that can be nonzero.
    pub fn add_gate(
        &mut self,
        kind: GateKind,
        inputs: &[WireId],
        role: GateRole,
    ) -> Result<Vec<Option<WireId>>> {
        self.add_gate_masked(kind, inputs, role, &[])
    }

    /// Adds a gate, leaving the output ports listed in `unconnected` open.
    pub fn add_gate_masked(
        &mut self,
        kind: GateKind,
        inputs: &[WireId],
        role: GateRole,
        unconnected: &[usize],
    ) -> Result<Vec<Option<WireId>>> {
        let sig = kind.signature();
        if inputs.len() != sig.inputs.len() {
            return Err(Error::Arity {
                kind: kind.tag(),
                expected: sig.inputs.len(),
                got: inputs.len(),
            });
        }
        let ranges: Vec<u8> = inputs.iter().map(|w| self.wire_range(*w)).collect();
        for ((w, r), spec) in inputs.iter().zip(&ranges).zip(sig.inputs) {
            if *r > spec.range_max {
                if spec.carry {
                    return Err(Error::CarryPortRange {
                        kind: kind.tag(),
                        wire: w.0,
                        range_max: *r,
                    });
                }
                return Err(Error::ValueOutOfRange {
                    value: *r,
                    range_max: spec.range_max,
                });
            }
        }
        let gate = GateId(self.gates.len() as u32);
        let outputs: Vec<Option<WireId>> = kind
            .output_ranges(&ranges)
            .into_iter()
            .enumerate()
            .map(|(port, r)| {
                let r = r.filter(|_| !unconnected.contains(&port))?;
                let id = WireId(self.wires.len() as u32);
                self.wires.push(Wire {
                    id,
                    range_max: r,
                    driver: Driver::Gate { gate, port },
                });
                Some(id)
            })
            .collect();
        self.gates.push(Gate {
            id: gate,
            kind,
            role,
            inputs: inputs.to_vec(),
            outputs: outputs.clone(),
        });
        Ok(outputs)
    }

    pub(crate) fn gates_mut(&mut self) -> &mut [Gate] {
        &mut self.gates
    }

    pub fn finish(self, outputs: Vec<Option<WireId>>) -> Netlist {
        Netlist {
            radix: self.radix,
            width: self.width,
            wires: self.wires,
            gates: self.gates,
            inputs: self.inputs,
            outputs,
        }
    }
}
