// SPDX-License-Identifier: Apache-2.0
//! Static longest-path analysis over a netlist.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::timing::TimingLibrary;
use crate::netlist::{GateId, GateInventory, GateRole, Netlist};

/// Delays closer than this are treated as equal when breaking ties.
const TIE_EPS_PS: f64 = 1e-6;

/// Which gates count towards the path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathScope {
    #[default]
    Full,
    /// Partial-product generators are treated as sources with zero delay.
    ReductionOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPath {
    pub delay_ps: f64,
    /// Gates from source to sink.
    pub gates: Vec<GateId>,
    /// Product digit where the path ends.
    pub output_digit: Option<usize>,
}

impl CriticalPath {
    /// Gate kinds along the path, counted.
    pub fn composition(&self, n: &Netlist) -> GateInventory {
        GateInventory::from_gates(self.gates.iter().map(|g| n.gate(*g)))
    }

    /// Kind names in path order.
    pub fn kinds(&self, n: &Netlist) -> Vec<String> {
        self.gates.iter().map(|g| n.gate(*g).kind.name()).collect()
    }
}

#[derive(Clone, Debug)]
struct Arrival {
    t: f64,
    path: Vec<GateId>,
}

/// Picks the later arrival; near-equal arrivals go to the lexicographically
/// smaller gate sequence.
fn later<'a>(a: &'a Arrival, b: &'a Arrival) -> &'a Arrival {
    if b.t > a.t + TIE_EPS_PS {
        b
    } else if a.t > b.t + TIE_EPS_PS {
        a
    } else if b.path < a.path {
        b
    } else {
        a
    }
}

/// Longest path from a primary input to a primary output, ties broken by
/// the smallest gate-id sequence.
pub fn critical_path(n: &Netlist, lib: &TimingLibrary) -> Result<CriticalPath> {
    critical_path_scoped(n, lib, PathScope::Full)
}

pub fn critical_path_scoped(
    n: &Netlist,
    lib: &TimingLibrary,
    scope: PathScope,
) -> Result<CriticalPath> {
    let order = n.topo_order().map_err(Error::Invalid)?;
    let source = Arrival {
        t: 0.0,
        path: Vec::new(),
    };
    let mut at: Vec<Arrival> = vec![source.clone(); n.wires().len()];
    for id in order {
        let g = n.gate(id);
        let skip = scope == PathScope::ReductionOnly && g.role == GateRole::PartialProduct;
        let latest = g
            .inputs
            .iter()
            .map(|w| &at[w.index()])
            .fold(&source, |acc, a| later(acc, a))
            .clone();
        for (port, w) in g.outputs.iter().enumerate() {
            let Some(w) = w else { continue };
            at[w.index()] = if skip {
                source.clone()
            } else {
                let mut path = latest.path.clone();
                path.push(id);
                Arrival {
                    t: latest.t + lib.delay(g.kind.tag(), port)?,
                    path,
                }
            };
        }
    }
    let mut best: Option<(usize, &Arrival)> = None;
    for (digit, w) in n.outputs().iter().enumerate() {
        let Some(w) = w else { continue };
        let a = &at[w.index()];
        best = match best {
            Some((d, b)) if std::ptr::eq(later(b, a), b) => Some((d, b)),
            _ => Some((digit, a)),
        };
    }
    Ok(match best {
        Some((digit, a)) => CriticalPath {
            delay_ps: a.t,
            gates: a.path.clone(),
            output_digit: Some(digit),
        },
        None => CriticalPath {
            delay_ps: 0.0,
            gates: Vec::new(),
            output_digit: None,
        },
    })
}

/// Longest path ending at one product digit.
pub fn path_to_output(
    n: &Netlist,
    lib: &TimingLibrary,
    scope: PathScope,
    digit: usize,
) -> Result<CriticalPath> {
    let (radix, width, wires, gates, inputs, outputs) = n.clone().into_parts();
    let only: Vec<_> = outputs
        .iter()
        .enumerate()
        .map(|(i, w)| if i == digit { *w } else { None })
        .collect();
    let single = Netlist::from_parts(radix, width, wires, gates, inputs, only);
    critical_path_scoped(&single, lib, scope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{GateKind, GateTag};
    use crate::metrics::timing::{timing_preset, PortRef, PRESET_QUATERNARY_09V};
    use crate::netgen::gen_multiplier;
    use crate::netlist::{NetlistBuilder, Operand};

    #[test]
    fn single_gate_netlist() {
        let mut b = NetlistBuilder::new(4, 1);
        let x = b.add_input(Operand::X, 0);
        let y = b.add_input(Operand::Y, 0);
        let o = b
            .add_gate(GateKind::Qm1, &[x, y], GateRole::PartialProduct)
            .unwrap();
        let n = b.finish(o);
        let lib = timing_preset(PRESET_QUATERNARY_09V).unwrap();
        let p = critical_path(&n, &lib).unwrap();
        assert_eq!(p.delay_ps, 118.0);
        assert_eq!(p.gates, vec![GateId(0)]);
        let p = critical_path_scoped(&n, &lib, PathScope::ReductionOnly).unwrap();
        assert_eq!(p.delay_ps, 0.0);
    }

    #[test]
    fn missing_entry_is_an_error() {
        let n = gen_multiplier(2, 2).unwrap();
        let lib = timing_preset(PRESET_QUATERNARY_09V).unwrap();
        assert!(matches!(
            critical_path(&n, &lib),
            Err(Error::MissingEntry(_))
        ));
    }

    /// Every source-to-output gate sequence with its delay, by brute force.
    fn all_paths(n: &Netlist, lib: &TimingLibrary) -> Vec<(f64, Vec<GateId>)> {
        fn back(
            n: &Netlist,
            lib: &TimingLibrary,
            w: crate::netlist::WireId,
        ) -> Vec<(f64, Vec<GateId>)> {
            match n.wire(w).driver {
                crate::netlist::Driver::Input { .. } => vec![(0.0, vec![])],
                crate::netlist::Driver::Gate { gate, port } => {
                    let g = n.gate(gate);
                    let d = lib.delay(g.kind.tag(), port).unwrap();
                    g.inputs
                        .iter()
                        .flat_map(|i| back(n, lib, *i))
                        .map(|(t, mut p)| {
                            p.push(gate);
                            (t + d, p)
                        })
                        .collect()
                }
            }
        }
        n.outputs()
            .iter()
            .flatten()
            .flat_map(|w| back(n, lib, *w))
            .collect()
    }

    #[test]
    fn ties_go_to_smallest_sequence() {
        let n = gen_multiplier(2, 3).unwrap();
        let mut lib = TimingLibrary::new("unit", "");
        for (tag, port) in [
            (GateTag::And, "out"),
            (GateTag::BinHa, "sum"),
            (GateTag::BinHa, "carry"),
            (GateTag::BinFa, "sum"),
            (GateTag::BinFa, "carry"),
        ] {
            lib.set(&PortRef::new(tag, port).unwrap(), 1.0).unwrap();
        }
        let p = critical_path(&n, &lib).unwrap();
        let paths = all_paths(&n, &lib);
        let max = paths.iter().map(|(t, _)| *t).fold(0.0, f64::max);
        let expect = paths
            .iter()
            .filter(|(t, _)| *t == max)
            .map(|(_, p)| p.clone())
            .min()
            .unwrap();
        assert_eq!(p.delay_ps, max);
        assert_eq!(p.gates, expect);
    }
}
