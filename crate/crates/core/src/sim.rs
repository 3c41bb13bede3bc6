// SPDX-License-Identifier: Apache-2.0
//! Zero-delay functional simulation and verification against integer
//! multiplication.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::GateKind;
use crate::logic::LogicLevel;
use crate::netlist::{Netlist, Operand, WireId};

/// Default bound on the exhaustive input space.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 1 << 20;

/// Values for the primary-input wires of a netlist.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<WireId, LogicLevel>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, wire: WireId, level: LogicLevel) -> &mut Self {
        self.0.insert(wire, level);
        self
    }

    pub fn get(&self, wire: WireId) -> Option<LogicLevel> {
        self.0.get(&wire).copied()
    }

    /// Assigns operand digits, least significant first.
    pub fn from_operands(n: &Netlist, x: &[u8], y: &[u8]) -> Result<Self> {
        let mut a = Assignment::new();
        for (operand, digits) in [(Operand::X, x), (Operand::Y, y)] {
            if digits.len() != n.width() {
                return Err(Error::Assignment(format!(
                    "operand {operand} has {} digits, expected {}",
                    digits.len(),
                    n.width()
                )));
            }
            for (i, &d) in digits.iter().enumerate() {
                let w = n
                    .input_wire(operand, i)
                    .ok_or_else(|| Error::Assignment(format!("no input wire for {operand}{i}")))?;
                a.set(w, LogicLevel::new(d, n.wire(w).range_max)?);
            }
        }
        Ok(a)
    }
}

/// Evaluates the netlist on one assignment and returns the product digits,
/// least significant first.
pub fn evaluate(n: &Netlist, a: &Assignment) -> Result<Vec<u8>> {
    for &w in a.0.keys() {
        if !n.inputs().iter().any(|p| p.wire == w) {
            return Err(Error::Assignment(format!("{w} is not a primary input")));
        }
    }
    let mut x = vec![0; n.width()];
    let mut y = vec![0; n.width()];
    for p in n.inputs() {
        let level = a.get(p.wire).ok_or_else(|| {
            Error::Assignment(format!("no value for input {}{}", p.operand, p.digit))
        })?;
        if level.value() > n.wire(p.wire).range_max {
            return Err(Error::ValueOutOfRange {
                value: level.value(),
                range_max: n.wire(p.wire).range_max,
            });
        }
        match p.operand {
            Operand::X => x[p.digit] = level.value(),
            Operand::Y => y[p.digit] = level.value(),
        }
    }
    let sim = Simulator::new(n)?;
    let mut scratch = sim.scratch();
    sim.run(&x, &y, &mut scratch)
}

/// Expected product digits of `x * y`, `2 * width` digits least significant first.
pub fn oracle(radix: u32, width: usize, x: &[u8], y: &[u8]) -> Vec<u8> {
    let value = |d: &[u8]| {
        d.iter()
            .rev()
            .fold(0u128, |acc, &v| acc * u128::from(radix) + u128::from(v))
    };
    let mut p = value(x) * value(y);
    (0..2 * width)
        .map(|_| {
            let d = (p % u128::from(radix)) as u8;
            p /= u128::from(radix);
            d
        })
        .collect()
}

#[derive(Clone, Debug)]
struct CompiledGate {
    kind: GateKind,
    id: u32,
    inputs: Vec<usize>,
    outputs: Vec<Option<usize>>,
}

/// A netlist prepared for repeated evaluation. Every gate output is checked
/// against its wire's range and every unconnected output must be zero.
#[derive(Clone, Debug)]
pub struct Simulator<'a> {
    netlist: &'a Netlist,
    gates: Vec<CompiledGate>,
    ranges: Vec<u8>,
    x: Vec<usize>,
    y: Vec<usize>,
}

/// Widest product the integer oracle can hold.
pub const MAX_PRODUCT_BITS: u32 = 128;

impl<'a> Simulator<'a> {
    pub fn new(n: &'a Netlist) -> Result<Self> {
        n.validate().map_err(Error::Invalid)?;
        let bits = 2 * n.width() as u32 * n.radix().trailing_zeros();
        if bits > MAX_PRODUCT_BITS {
            return Err(Error::Assignment(format!(
                "{}-bit product exceeds the {MAX_PRODUCT_BITS}-bit oracle",
                bits
            )));
        }
        let order = n.topo_order().map_err(Error::Invalid)?;
        let gates = order
            .into_iter()
            .map(|id| {
                let g = n.gate(id);
                CompiledGate {
                    kind: g.kind,
                    id: id.0,
                    inputs: g.inputs.iter().map(|w| w.index()).collect(),
                    outputs: g.outputs.iter().map(|w| w.map(WireId::index)).collect(),
                }
            })
            .collect();
        let wire_of = |op| {
            (0..n.width())
                .map(|i| n.input_wire(op, i).expect("validated").index())
                .collect()
        };
        Ok(Simulator {
            netlist: n,
            gates,
            ranges: n.wires().iter().map(|w| w.range_max).collect(),
            x: wire_of(Operand::X),
            y: wire_of(Operand::Y),
        })
    }

    pub fn netlist(&self) -> &Netlist {
        self.netlist
    }

    /// Working storage for [`Simulator::run`], one value per wire.
    pub fn scratch(&self) -> Vec<u8> {
        vec![0; self.ranges.len()]
    }

    pub fn run(&self, x: &[u8], y: &[u8], values: &mut [u8]) -> Result<Vec<u8>> {
        for (w, &d) in self.x.iter().zip(x).chain(self.y.iter().zip(y)) {
            values[*w] = d;
        }
        let mut ins = [0u8; 5];
        for g in &self.gates {
            for (slot, &w) in ins.iter_mut().zip(&g.inputs) {
                *slot = values[w];
            }
            let out = g.kind.eval(&ins[..g.inputs.len()])?;
            for (port, (&v, w)) in out.as_slice().iter().zip(&g.outputs).enumerate() {
                match *w {
                    Some(w) if v > self.ranges[w] => {
                        return Err(Error::RangeSoundness {
                            wire: w as u32,
                            value: v,
                            range_max: self.ranges[w],
                        })
                    }
                    Some(w) => values[w] = v,
                    None if v != 0 => {
                        return Err(Error::DroppedNonzero {
                            gate: g.id,
                            port,
                            value: v,
                        })
                    }
                    None => {}
                }
            }
        }
        Ok(self
            .netlist
            .outputs()
            .iter()
            .map(|w| w.map_or(0, |w| values[w.index()]))
            .collect())
    }
}

/// How verification spreads vectors over threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over vectors. `workers: None` uses the global pool.
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel {
        workers: Option<usize>,
    },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { workers: None }
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    pub expected: Vec<u8>,
    /// Empty when evaluation itself failed.
    pub got: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub design: String,
    pub radix: u32,
    pub width: usize,
    pub mode: Mode,
    pub vectors: u64,
    pub mismatches: Vec<Mismatch>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v["passed"] = self.passed().into();
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

fn digits_of(mut v: u128, radix: u32, width: usize) -> Vec<u8> {
    (0..width)
        .map(|_| {
            let d = (v % u128::from(radix)) as u8;
            v /= u128::from(radix);
            d
        })
        .collect()
}

fn check(sim: &Simulator<'_>, scratch: &mut [u8], x: &[u8], y: &[u8]) -> Option<Mismatch> {
    let n = sim.netlist();
    let expected = oracle(n.radix(), n.width(), x, y);
    match sim.run(x, y, scratch) {
        Ok(got) if got == expected => None,
        Ok(got) => Some(Mismatch {
            x: x.to_vec(),
            y: y.to_vec(),
            expected,
            got,
            error: None,
        }),
        Err(e) => Some(Mismatch {
            x: x.to_vec(),
            y: y.to_vec(),
            expected,
            got: Vec::new(),
            error: Some(e.to_string()),
        }),
    }
}

fn run_vectors<F>(sim: &Simulator<'_>, count: u64, exec: Execution, vector: F) -> Vec<Mismatch>
where
    F: Fn(u64) -> (Vec<u8>, Vec<u8>) + Sync,
{
    match exec {
        Execution::Sequential => {
            let mut scratch = sim.scratch();
            (0..count)
                .filter_map(|i| {
                    let (x, y) = vector(i);
                    check(sim, &mut scratch, &x, &y)
                })
                .collect()
        }
        #[cfg(feature = "parallel")]
        Execution::Parallel { workers } => {
            use rayon::prelude::*;
            let job = || {
                (0..count)
                    .into_par_iter()
                    .map_init(
                        || sim.scratch(),
                        |scratch, i| {
                            let (x, y) = vector(i);
                            check(sim, scratch, &x, &y)
                        },
                    )
                    .flatten_iter()
                    .collect()
            };
            match workers {
                Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                    Ok(pool) => pool.install(job),
                    Err(_) => job(),
                },
                None => job(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel { .. } => run_vectors(sim, count, Execution::Sequential, vector),
    }
}

/// Number of `(x, y)` pairs of an N×N multiplier in the given radix.
pub fn input_space(radix: u32, width: usize) -> u128 {
    u128::from(radix)
        .checked_pow(2 * width as u32)
        .unwrap_or(u128::MAX)
}

/// Checks every operand pair against the oracle, up to [`DEFAULT_EXHAUSTIVE_CAP`] vectors.
pub fn verify_exhaustive(n: &Netlist) -> Result<VerificationReport> {
    verify_exhaustive_with(n, DEFAULT_EXHAUSTIVE_CAP, Execution::default())
}

pub fn verify_exhaustive_with(
    n: &Netlist,
    cap: u128,
    exec: Execution,
) -> Result<VerificationReport> {
    let space = input_space(n.radix(), n.width());
    if space > cap {
        return Err(Error::SpaceTooLarge {
            vectors: space,
            cap,
        });
    }
    let sim = Simulator::new(n)?;
    let (radix, width) = (n.radix(), n.width());
    let half = u128::from(radix).pow(width as u32);
    let mismatches = run_vectors(&sim, space as u64, exec, |i| {
        let i = u128::from(i);
        (
            digits_of(i % half, radix, width),
            digits_of(i / half, radix, width),
        )
    });
    Ok(VerificationReport {
        design: n.label(),
        radix,
        width,
        mode: Mode::Exhaustive,
        vectors: space as u64,
        mismatches,
    })
}

/// Checks `count` operand pairs drawn from a ChaCha8 stream seeded with `seed`.
pub fn verify_random(n: &Netlist, count: u64, seed: u64) -> Result<VerificationReport> {
    verify_random_with(n, count, seed, Execution::default())
}

pub fn verify_random_with(
    n: &Netlist,
    count: u64,
    seed: u64,
    exec: Execution,
) -> Result<VerificationReport> {
    if count == 0 {
        return Err(Error::ZeroCount);
    }
    let sim = Simulator::new(n)?;
    let (radix, width) = (n.radix(), n.width());
    let radix_u8 = radix as u8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors: Vec<(Vec<u8>, Vec<u8>)> = (0..count)
        .map(|_| {
            let mut draw = || (0..width).map(|_| rng.random_range(0..radix_u8)).collect();
            (draw(), draw())
        })
        .collect();
    let mismatches = run_vectors(&sim, count, exec, |i| vectors[i as usize].clone());
    Ok(VerificationReport {
        design: n.label(),
        radix,
        width,
        mode: Mode::Random { seed },
        vectors: count,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::gen_multiplier;

    #[test]
    fn oracle_examples() {
        // 23 * 33 in base 4, digits least significant first.
        assert_eq!(oracle(4, 2, &[3, 2], &[3, 3]), vec![1, 1, 2, 2]);
        assert_eq!(
            oracle(2, 4, &[1, 1, 1, 1], &[1, 0, 1, 1]),
            vec![1, 1, 0, 0, 0, 0, 1, 1]
        );
        assert_eq!(oracle(4, 1, &[3], &[3]), vec![1, 2]);
    }

    #[test]
    fn evaluate_two_quit_products() {
        let n = gen_multiplier(4, 2).unwrap();
        let a = Assignment::from_operands(&n, &[3, 2], &[3, 3]).unwrap();
        assert_eq!(evaluate(&n, &a).unwrap(), vec![1, 1, 2, 2]);
        let a = Assignment::from_operands(&n, &[3, 2], &[3, 2]).unwrap();
        assert_eq!(evaluate(&n, &a).unwrap(), vec![1, 2, 3, 1]);
        let a = Assignment::from_operands(&n, &[3, 2], &[0, 0]).unwrap();
        assert_eq!(evaluate(&n, &a).unwrap(), vec![0; 4]);
    }

    #[test]
    fn evaluate_rejects_bad_assignments() {
        let n = gen_multiplier(2, 2).unwrap();
        assert!(Assignment::from_operands(&n, &[1], &[1, 1]).is_err());
        assert!(Assignment::from_operands(&n, &[2, 0], &[1, 1]).is_err());
        let mut a = Assignment::from_operands(&n, &[1, 0], &[1, 1]).unwrap();
        let partial = {
            let mut p = Assignment::new();
            p.set(n.inputs()[0].wire, LogicLevel::binary(1).unwrap());
            p
        };
        assert!(matches!(evaluate(&n, &partial), Err(Error::Assignment(_))));
        a.set(
            WireId(n.wires().len() as u32 - 1),
            LogicLevel::binary(0).unwrap(),
        );
        assert!(matches!(evaluate(&n, &a), Err(Error::Assignment(_))));
    }

    #[test]
    fn single_digit_quaternary_is_exhaustively_correct() {
        let r = verify_exhaustive(&gen_multiplier(4, 1).unwrap()).unwrap();
        assert_eq!(r.vectors, 16);
        assert!(r.passed());
    }

    #[test]
    fn cap_is_enforced() {
        let n = gen_multiplier(4, 6).unwrap();
        assert!(matches!(
            verify_exhaustive(&n),
            Err(Error::SpaceTooLarge { vectors, .. }) if vectors == 1 << 24
        ));
        let n = gen_multiplier(2, 4).unwrap();
        assert!(verify_exhaustive_with(&n, 255, Execution::Sequential).is_err());
        assert!(verify_exhaustive_with(&n, 256, Execution::Sequential).is_ok());
    }

    #[test]
    fn oracle_width_limit() {
        assert!(verify_random(&gen_multiplier(4, 32).unwrap(), 2, 1)
            .unwrap()
            .passed());
        assert!(matches!(
            verify_random(&gen_multiplier(4, 33).unwrap(), 2, 1),
            Err(Error::Assignment(_))
        ));
    }

    #[test]
    fn random_is_seeded_and_rejects_zero() {
        let n = gen_multiplier(2, 8).unwrap();
        let a = verify_random(&n, 1000, 42).unwrap();
        let b = verify_random(&n, 1000, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
        assert!(matches!(verify_random(&n, 0, 1), Err(Error::ZeroCount)));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let n = gen_multiplier(4, 3).unwrap();
        let s = verify_exhaustive_with(&n, DEFAULT_EXHAUSTIVE_CAP, Execution::Sequential).unwrap();
        let p = verify_exhaustive_with(
            &n,
            DEFAULT_EXHAUSTIVE_CAP,
            Execution::Parallel { workers: Some(2) },
        )
        .unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn report_json_carries_verdict() {
        let r = verify_random(&gen_multiplier(2, 2).unwrap(), 4, 7).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["passed"], true);
        assert_eq!(v["mode"]["kind"], "random");
        assert_eq!(v["mode"]["seed"], 7);
    }
}
