// SPDX-License-Identifier: Apache-2.0
//! Shared oracles and random-netlist strategies for the integration tests.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use mvlmul::gates::{GateKind, GateTag};
use mvlmul::logic::UnaryTable;
use mvlmul::metrics::cost::{area_estimate, default_cost_library};
use mvlmul::metrics::path::critical_path;
use mvlmul::metrics::timing::{PortRef, TimingLibrary};
use mvlmul::netlist::{
    Driver, Gate, GateId, GateRole, InputPort, Netlist, NetlistBuilder, Operand, Wire, WireId,
};

/// Input-space size, by repeated multiplication.
pub fn space(radix: u32, n: usize) -> u64 {
    (0..2 * n).fold(1u64, |acc, _| acc * u64::from(radix))
}

/// ΣDi by walking the gate list with a hard-coded cost table.
pub fn linear_area(n: &Netlist) -> f64 {
    n.gates()
        .iter()
        .map(|g| match g.kind.tag() {
            GateTag::And => 8.9,
            GateTag::BinHa => 18.0,
            GateTag::BinFa => 32.0,
            GateTag::Qm1 => 132.0,
            GateTag::Qha => 83.0,
            GateTag::Qfac2 | GateTag::Qfac2Wc => 227.0,
            GateTag::Mux4 | GateTag::Decoder | GateTag::Unary => 0.0,
        })
        .sum()
}

/// Carry-in ports driven by a wire that may carry 3.
pub fn carry_port_overflows(n: &Netlist) -> usize {
    n.gates()
        .iter()
        .flat_map(|g| {
            g.kind
                .signature()
                .inputs
                .iter()
                .zip(&g.inputs)
                .filter(|(spec, w)| spec.carry && n.wire(**w).range_max == 3)
                .collect::<Vec<_>>()
        })
        .count()
}

/// A random netlist as a list of (kind choice, input picks). The radix
/// selects the gate family; picks index into the wires that fit each port.
#[derive(Clone, Debug)]
pub struct Recipe {
    pub radix: u32,
    pub width: usize,
    pub steps: Vec<(u8, [u16; 5], [u8; 4])>,
}

pub fn recipe() -> impl Strategy<Value = Recipe> {
    (
        prop_oneof![Just(2u32), Just(4u32)],
        1usize..=3,
        prop::collection::vec((any::<u8>(), any::<[u16; 5]>(), any::<[u8; 4]>()), 1..40),
    )
        .prop_map(|(radix, width, steps)| Recipe {
            radix,
            width,
            steps,
        })
}

fn kind_for(radix: u32, choice: u8, table: [u8; 4]) -> GateKind {
    if radix == 2 {
        [GateKind::And, GateKind::BinHa, GateKind::BinFa][usize::from(choice % 3)]
    } else {
        match choice % 7 {
            0 => GateKind::Qm1,
            1 => GateKind::Qha,
            2 => GateKind::Qfac2,
            3 => GateKind::Qfac2Wc,
            4 => GateKind::Mux4,
            5 => GateKind::Decoder,
            _ => GateKind::Unary(UnaryTable::new(table.map(|v| v % 4)).unwrap()),
        }
    }
}

/// Builds the netlist a recipe describes. Outputs are the last gate-driven
/// wires; the result is acyclic but not a multiplier.
pub fn build(r: &Recipe) -> Netlist {
    let mut b = NetlistBuilder::new(r.radix, r.width);
    let mut wires: Vec<WireId> = Vec::new();
    for op in [Operand::X, Operand::Y] {
        for i in 0..r.width {
            wires.push(b.add_input(op, i));
        }
    }
    let mut driven = Vec::new();
    for (choice, picks, table) in &r.steps {
        let kind = kind_for(r.radix, *choice, *table);
        let mut ins = Vec::new();
        for (spec, pick) in kind.signature().inputs.iter().zip(picks) {
            let fits: Vec<WireId> = wires
                .iter()
                .copied()
                .filter(|w| b.wire_range(*w) <= spec.range_max)
                .collect();
            if fits.is_empty() {
                break;
            }
            ins.push(fits[usize::from(*pick) % fits.len()]);
        }
        if ins.len() != kind.signature().inputs.len() {
            continue;
        }
        let outs = b
            .add_gate(kind, &ins, GateRole::Other)
            .expect("ranges checked");
        for w in outs.into_iter().flatten() {
            wires.push(w);
            driven.push(w);
        }
    }
    let k = 2 * r.width;
    let mut outputs: Vec<Option<WireId>> = driven.iter().rev().take(k).map(|w| Some(*w)).collect();
    outputs.resize(k, None);
    b.finish(outputs)
}

/// Side-by-side copy of two netlists with no shared wires or gates.
pub fn disjoint_union(a: &Netlist, b: &Netlist) -> Netlist {
    let (radix, wa, mut wires, mut gates, mut inputs, mut outputs) = a.clone().into_parts();
    let (_, wb, bw, bg, bi, bo) = b.clone().into_parts();
    let wo = wires.len() as u32;
    let go = gates.len() as u32;
    let shift = |w: WireId| WireId(w.0 + wo);
    for w in bw {
        wires.push(Wire {
            id: shift(w.id),
            range_max: w.range_max,
            driver: match w.driver {
                Driver::Input { operand, digit } => Driver::Input {
                    operand,
                    digit: digit + wa,
                },
                Driver::Gate { gate, port } => Driver::Gate {
                    gate: GateId(gate.0 + go),
                    port,
                },
            },
        });
    }
    for g in bg {
        gates.push(Gate {
            id: GateId(g.id.0 + go),
            kind: g.kind,
            role: g.role,
            inputs: g.inputs.into_iter().map(shift).collect(),
            outputs: g.outputs.into_iter().map(|w| w.map(shift)).collect(),
        });
    }
    for p in bi {
        inputs.push(InputPort {
            operand: p.operand,
            digit: p.digit + wa,
            wire: shift(p.wire),
        });
    }
    outputs.extend(bo.into_iter().map(|w| w.map(shift)));
    Netlist::from_parts(radix, wa + wb, wires, gates, inputs, outputs)
}

/// Library with a delay for every port of every kind.
pub fn library_from(delays: &[f64]) -> TimingLibrary {
    let mut lib = TimingLibrary::new("random", "");
    let mut i = 0;
    for tag in GateTag::ALL {
        for port in tag.output_ports() {
            lib.set(&PortRef::new(tag, port).unwrap(), delays[i % delays.len()])
                .unwrap();
            i += 1;
        }
    }
    lib
}

pub fn delays() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..200.0, 20)
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

pub fn check_area_linearity(a: &Recipe, b: &Recipe) -> Result<(), TestCaseError> {
    let lib = default_cost_library();
    let (na, nb) = (build(a), build(b));
    let u = disjoint_union(&na, &nb);
    let lhs = area_estimate(&u, &lib).unwrap();
    let rhs = area_estimate(&na, &lib).unwrap() + area_estimate(&nb, &lib).unwrap();
    prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0), "{lhs} != {rhs}");
    prop_assert!((lhs - linear_area(&u)).abs() <= 1e-9 * lhs.max(1.0));
    Ok(())
}

pub fn check_path_scaling(r: &Recipe, d: &[f64], k: f64) -> Result<(), TestCaseError> {
    let n = build(r);
    let lib = library_from(d);
    let p = critical_path(&n, &lib).unwrap();
    let q = critical_path(&n, &lib.scaled(k)).unwrap();
    prop_assert!(
        (q.delay_ps - k * p.delay_ps).abs() <= 1e-9 * (k * p.delay_ps).max(1.0),
        "{} vs {} * {}",
        q.delay_ps,
        k,
        p.delay_ps
    );
    prop_assert_eq!(q.gates, p.gates);
    Ok(())
}

pub fn run_area_linearity(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(recipe(), recipe()), |(a, b)| check_area_linearity(&a, &b))
        .map_err(|e| e.to_string())
}

pub fn run_path_scaling(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(recipe(), delays(), 0.01f64..100.0), |(r, d, k)| {
            check_path_scaling(&r, &d, k)
        })
        .map_err(|e| e.to_string())
}
