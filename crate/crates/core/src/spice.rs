// SPDX-License-Identifier: Apache-2.0
//! Structural SPICE-style deck. Gate kinds become black-box subcircuits.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gates::GateKind;
use crate::netlist::{Driver, Netlist, Operand, WireId};

fn net_name(n: &Netlist, w: WireId) -> String {
    if let Some(k) = n.outputs().iter().position(|o| *o == Some(w)) {
        return format!("p{k}");
    }
    match n.wire(w).driver {
        Driver::Input {
            operand: Operand::X,
            digit,
        } => format!("x{digit}"),
        Driver::Input {
            operand: Operand::Y,
            digit,
        } => format!("y{digit}"),
        Driver::Gate { .. } => format!("n{}", w.0),
    }
}

/// Renders the deck. Output is a pure function of the netlist.
pub fn export_spice(n: &Netlist) -> Result<String> {
    n.validate().map_err(Error::Invalid)?;
    let top = format!("MUL_{}", n.label().to_uppercase());
    let kinds: BTreeSet<GateKind> = n.gates().iter().map(|g| g.kind).collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "* {top}: radix {} {}x{} multiplier",
        n.radix(),
        n.width(),
        n.width()
    );
    let _ = writeln!(s, "* gates {}", n.inventory());
    for kind in &kinds {
        let sig = kind.signature();
        let ports: Vec<&str> = sig
            .inputs
            .iter()
            .chain(sig.outputs)
            .map(|p| p.name)
            .collect();
        let _ = writeln!(s, "\n.subckt {} {}", kind.name(), ports.join(" "));
        let _ = writeln!(s, "* black box");
        let _ = writeln!(s, ".ends {}", kind.name());
    }
    let mut ports = Vec::new();
    for op in ["x", "y"] {
        ports.extend((0..n.width()).map(|i| format!("{op}{i}")));
    }
    ports.extend((0..n.outputs().len()).map(|k| format!("p{k}")));
    let _ = writeln!(s, "\n.subckt {top} {}", ports.join(" "));
    for g in n.gates() {
        let mut nets: Vec<String> = g.inputs.iter().map(|w| net_name(n, *w)).collect();
        let names = g.kind.tag().output_ports();
        for (port, w) in g.outputs.iter().enumerate() {
            nets.push(match w {
                Some(w) => net_name(n, *w),
                None => format!("nc_g{}_{}", g.id.0, names[port]),
            });
        }
        let _ = writeln!(s, "Xg{} {} {}", g.id.0, nets.join(" "), g.kind.name());
    }
    for (k, o) in n.outputs().iter().enumerate() {
        if o.is_none() {
            let _ = writeln!(s, "Vp{k} p{k} 0 0");
        }
    }
    let _ = writeln!(s, ".ends {top}");
    let _ = writeln!(s, ".end");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::gen_multiplier;

    fn instances(deck: &str, kind: &str) -> usize {
        deck.lines()
            .filter(|l| l.starts_with('X') && l.ends_with(&format!(" {kind}")))
            .count()
    }

    #[test]
    fn two_by_two_binary_deck() {
        let deck = export_spice(&gen_multiplier(2, 2).unwrap()).unwrap();
        assert_eq!(instances(&deck, "AND"), 4);
        assert_eq!(instances(&deck, "BIN_HA"), 2);
        assert!(deck.contains(".subckt BIN_HA a b sum carry\n"));
        assert!(deck.contains(".subckt MUL_R2N2 x0 x1 y0 y1 p0 p1 p2 p3\n"));
    }

    #[test]
    fn deck_matches_inventory_and_is_stable() {
        let n = gen_multiplier(4, 4).unwrap();
        let deck = export_spice(&n).unwrap();
        for (tag, count) in n.inventory().iter() {
            assert_eq!(instances(&deck, tag.as_str()), count, "{tag}");
        }
        assert_eq!(deck, export_spice(&n).unwrap());
    }

    #[test]
    fn constant_outputs_are_grounded() {
        let deck = export_spice(&gen_multiplier(2, 1).unwrap()).unwrap();
        assert!(deck.contains("Vp1 p1 0 0\n"));
        assert!(deck.contains("Xg0 x0 y0 p0 AND\n"));
    }
}
