// SPDX-License-Identifier: Apache-2.0

use mvlmul::gates::GateKind;
use mvlmul::metrics::compare::{compare, design};
use mvlmul::metrics::cost::{area_estimate, default_cost_library};
use mvlmul::metrics::timing::{timing_preset, PRESET_BINARY_09V, PRESET_QUATERNARY_09V};
use mvlmul::netgen::gen_multiplier;
use mvlmul::netlist::{Netlist, Operand};
use mvlmul::sim::{verify_exhaustive, verify_random, Execution, DEFAULT_EXHAUSTIVE_CAP};
use mvlmul::spice::export_spice;
use mvlmul::Error;

/// Rewires the first AND gate to read y1 instead of y0.
fn corrupt(n: &Netlist) -> Netlist {
    let y1 = n.input_wire(Operand::Y, 1).unwrap();
    let (radix, width, wires, mut gates, inputs, outputs) = n.clone().into_parts();
    let g = gates.iter_mut().find(|g| g.kind == GateKind::And).unwrap();
    g.inputs[1] = y1;
    Netlist::from_parts(radix, width, wires, gates, inputs, outputs)
}

#[test]
fn corrupted_netlist_is_caught() {
    let bad = corrupt(&gen_multiplier(2, 4).unwrap());
    assert_eq!(bad.validate(), Ok(()));
    let r = verify_exhaustive(&bad).unwrap();
    assert!(!r.passed());
    // x0 * y0 is wrong exactly when x0 = 1 and y0 != y1.
    assert_eq!(r.mismatches.len(), 64);
    let r = verify_random(&bad, 500, 3).unwrap();
    assert!(!r.passed());
}

#[test]
fn invalid_netlist_cannot_be_verified() {
    let n = gen_multiplier(4, 2).unwrap();
    let (radix, width, wires, gates, inputs, mut outputs) = n.into_parts();
    outputs.truncate(3);
    let bad = Netlist::from_parts(radix, width, wires, gates, inputs, outputs);
    assert!(matches!(verify_exhaustive(&bad), Err(Error::Invalid(_))));
}

#[test]
fn sequential_fallback_matches_default() {
    let n = gen_multiplier(2, 8).unwrap();
    let a = mvlmul::sim::verify_exhaustive_with(&n, DEFAULT_EXHAUSTIVE_CAP, Execution::Sequential)
        .unwrap();
    let b = verify_exhaustive(&n).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.vectors, 65_536);
}

#[test]
fn areas_are_linear_sums() {
    let lib = default_cost_library();
    for (radix, n) in [(2, 2), (2, 8), (4, 4), (4, 2)] {
        let net = gen_multiplier(radix, n).unwrap();
        let got = area_estimate(&net, &lib).unwrap();
        let want = common_area(&net);
        assert!((got - want).abs() < 1e-9, "r{radix}n{n}: {got} vs {want}");
    }
}

fn common_area(n: &Netlist) -> f64 {
    // Inventory-independent count straight from the gate list.
    let cost = |k: GateKind| match k {
        GateKind::And => 8.9,
        GateKind::BinHa => 18.0,
        GateKind::BinFa => 32.0,
        GateKind::Qm1 => 132.0,
        GateKind::Qha => 83.0,
        GateKind::Qfac2 | GateKind::Qfac2Wc => 227.0,
        _ => 0.0,
    };
    n.gates().iter().map(|g| cost(g.kind)).sum()
}

#[test]
fn head_to_head_area_ratio() {
    let cost = default_cost_library();
    let timing = [
        timing_preset(PRESET_BINARY_09V).unwrap(),
        timing_preset(PRESET_QUATERNARY_09V).unwrap(),
    ];
    let r = compare(&[
        design(4, 4, &cost, &timing).unwrap(),
        design(2, 8, &cost, &timing).unwrap(),
    ])
    .unwrap();
    let p = &r.pairs[0];
    let a44 = common_area(&gen_multiplier(4, 4).unwrap());
    let a28 = common_area(&gen_multiplier(2, 8).unwrap());
    assert!((p.area_ratio - a44 / a28).abs() < 1e-12);
    assert_eq!(p.smaller, "r2n8");
    assert_eq!(p.faster, "r2n8");
    let d = r.design("r4n4").unwrap();
    assert!((d.full_delay_ps - d.delay_ps - 118.0).abs() < 1e-9);
}

#[test]
fn spice_deck_is_deterministic_across_round_trip() {
    let n = gen_multiplier(4, 3).unwrap();
    let back = Netlist::from_json(&n.to_json().unwrap()).unwrap();
    assert_eq!(export_spice(&n).unwrap(), export_spice(&back).unwrap());
}
