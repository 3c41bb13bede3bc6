// SPDX-License-Identifier: Apache-2.0
//! Per-port gate delays and least-squares calibration from path totals.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::GateTag;

/// An output port of a gate kind, written `TAG.port`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub tag: GateTag,
    pub port: String,
}

impl PortRef {
    pub fn new(tag: GateTag, port: &str) -> Result<Self> {
        if !tag.output_ports().contains(&port) {
            return Err(Error::Parse(format!("{tag} has no output port `{port}`")));
        }
        Ok(PortRef {
            tag,
            port: port.to_owned(),
        })
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.tag, self.port)
    }
}

/// Delays in picoseconds, indexed by gate kind and output port.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingLibrary {
    pub name: String,
    pub note: String,
    delays: BTreeMap<GateTag, Vec<Option<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct TimingFile {
    name: String,
    #[serde(default)]
    note: String,
    delay: BTreeMap<String, BTreeMap<String, f64>>,
}

impl TimingLibrary {
    pub fn new(name: impl Into<String>, note: impl Into<String>) -> Self {
        TimingLibrary {
            name: name.into(),
            note: note.into(),
            delays: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, port: &PortRef, ps: f64) -> Result<()> {
        if !ps.is_finite() || ps < 0.0 {
            return Err(Error::Parse(format!(
                "delay of {port} must be finite and >= 0, got {ps}"
            )));
        }
        let ports = port.tag.output_ports();
        let idx = ports
            .iter()
            .position(|p| *p == port.port)
            .expect("checked by PortRef");
        self.delays
            .entry(port.tag)
            .or_insert_with(|| vec![None; ports.len()])[idx] = Some(ps);
        Ok(())
    }

    /// Delay through output `port` of `tag`.
    pub fn delay(&self, tag: GateTag, port: usize) -> Result<f64> {
        self.delays
            .get(&tag)
            .and_then(|d| d.get(port).copied().flatten())
            .ok_or_else(|| {
                let name = tag.output_ports().get(port).copied().unwrap_or("?");
                Error::MissingEntry(format!("{tag}.{name} in timing library `{}`", self.name))
            })
    }

    /// Whether every output port of `tag` has a delay.
    pub fn covers(&self, tag: GateTag) -> bool {
        self.delays
            .get(&tag)
            .is_some_and(|d| d.iter().all(Option::is_some))
    }

    pub fn entries(&self) -> impl Iterator<Item = (PortRef, f64)> + '_ {
        self.delays.iter().flat_map(|(tag, d)| {
            d.iter().enumerate().filter_map(move |(i, v)| {
                v.map(|v| {
                    (
                        PortRef {
                            tag: *tag,
                            port: tag.output_ports()[i].to_owned(),
                        },
                        v,
                    )
                })
            })
        })
    }

    /// Every delay multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for d in out.delays.values_mut().flatten().flatten() {
            *d *= k;
        }
        out
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let f: TimingFile = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let mut lib = TimingLibrary::new(f.name, f.note);
        for (tag, ports) in f.delay {
            let tag: GateTag = tag.parse()?;
            for (port, ps) in ports {
                lib.set(&PortRef::new(tag, &port)?, ps)?;
            }
        }
        Ok(lib)
    }

    pub fn to_toml(&self) -> String {
        let mut delay: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (p, v) in self.entries() {
            delay
                .entry(p.tag.to_string())
                .or_default()
                .insert(p.port, v);
        }
        let f = TimingFile {
            name: self.name.clone(),
            note: self.note.clone(),
            delay,
        };
        toml::to_string(&f).expect("timing library serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// An observed total delay over a multiset of port traversals.
#[derive(Clone, Debug, PartialEq)]
pub struct PathConstraint {
    pub traversals: Vec<(PortRef, u32)>,
    pub observed_ps: f64,
}

/// Inputs to [`calibrate_timing`]. Ports in one tie group share a delay;
/// fixed ports take a measured value and are not fitted.
#[derive(Clone, Debug, Default)]
pub struct CalibrationSpec {
    pub name: String,
    pub note: String,
    pub constraints: Vec<PathConstraint>,
    pub ties: Vec<Vec<PortRef>>,
    pub fixed: Vec<(PortRef, f64)>,
}

const RANK_EPS: f64 = 1e-9;

/// Fits per-port delays to the constraints by least squares.
pub fn calibrate_timing(spec: &CalibrationSpec) -> Result<TimingLibrary> {
    if spec.constraints.is_empty() {
        return Err(Error::NoConstraints);
    }
    let fixed: BTreeMap<&PortRef, f64> = spec.fixed.iter().map(|(p, v)| (p, *v)).collect();

    // Each unknown port maps to a group; ties merge groups.
    let mut group_of: BTreeMap<&PortRef, usize> = BTreeMap::new();
    let mut groups: Vec<Vec<&PortRef>> = Vec::new();
    for tie in &spec.ties {
        let members: Vec<&PortRef> = tie.iter().filter(|p| !fixed.contains_key(p)).collect();
        if members.len() < tie.len() && !members.is_empty() {
            return Err(Error::Calibration(format!(
                "tie group containing {} mixes fixed and fitted ports",
                tie[0]
            )));
        }
        if members.is_empty() {
            continue;
        }
        let existing: Option<usize> = members.iter().find_map(|p| group_of.get(p).copied());
        let g = existing.unwrap_or_else(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        for p in members {
            if let Some(&old) = group_of.get(p) {
                if old != g {
                    return Err(Error::Calibration(format!("{p} is in two tie groups")));
                }
                continue;
            }
            group_of.insert(p, g);
            groups[g].push(p);
        }
    }
    for c in &spec.constraints {
        for (p, _) in &c.traversals {
            if !fixed.contains_key(p) && !group_of.contains_key(p) {
                group_of.insert(p, groups.len());
                groups.push(vec![p]);
            }
        }
    }

    let rows = spec.constraints.len();
    let cols = groups.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for (r, c) in spec.constraints.iter().enumerate() {
        b[r] = c.observed_ps;
        for (p, k) in &c.traversals {
            match fixed.get(p) {
                Some(v) => b[r] -= v * f64::from(*k),
                None => a[(r, group_of[p])] += f64::from(*k),
            }
        }
    }

    let mut lib = TimingLibrary::new(spec.name.clone(), spec.note.clone());
    if cols > 0 {
        let svd = a.clone().svd(true, true);
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let tol = RANK_EPS * svd.singular_values.max().max(1.0);
        // A group is determined iff its unit vector lies in the row space.
        let free: Vec<String> = (0..cols)
            .filter(|&j| {
                let norm: f64 = (0..v_t.nrows())
                    .filter(|&r| svd.singular_values[r] > tol)
                    .map(|r| v_t[(r, j)].powi(2))
                    .sum();
                norm < 1.0 - 1e-6
            })
            .flat_map(|j| groups[j].iter().map(|p| p.to_string()))
            .collect();
        if !free.is_empty() {
            return Err(Error::Underdetermined(free));
        }
        let x = svd
            .solve(&b, tol)
            .map_err(|e| Error::Calibration(e.to_string()))?;
        for (j, members) in groups.iter().enumerate() {
            if x[j] < -1e-9 {
                return Err(Error::Calibration(format!(
                    "fit gives negative delay {:.3} ps for {}",
                    x[j], members[0]
                )));
            }
            for p in members {
                lib.set(p, x[j].max(0.0))?;
            }
        }
    }
    for (p, v) in &spec.fixed {
        lib.set(p, *v)?;
    }
    Ok(lib)
}

pub const PRESET_BINARY_09V: &str = "paper-0.9V-binary";
pub const PRESET_BINARY_045V: &str = "paper-0.45V-binary";
pub const PRESET_QUATERNARY_09V: &str = "paper-0.9V-quaternary";
pub const PRESETS: [&str; 3] = [PRESET_BINARY_09V, PRESET_BINARY_045V, PRESET_QUATERNARY_09V];

fn p(tag: GateTag, port: &str) -> PortRef {
    PortRef::new(tag, port).expect("preset port")
}

/// Fit for the binary 8×8 multiplier: 3 sum and 11 carry traversals over
/// `total_ps`, with every adder port tied and AND excluded.
fn binary_spec(name: &str, total_ps: f64, vdd: &str) -> CalibrationSpec {
    use GateTag::*;
    CalibrationSpec {
        name: name.to_owned(),
        note: format!("2fF load, {vdd} supply; fitted to a 14-adder path of {total_ps} ps"),
        constraints: vec![PathConstraint {
            traversals: vec![(p(BinFa, "sum"), 3), (p(BinFa, "carry"), 11)],
            observed_ps: total_ps,
        }],
        ties: vec![vec![
            p(BinFa, "sum"),
            p(BinFa, "carry"),
            p(BinHa, "sum"),
            p(BinHa, "carry"),
        ]],
        fixed: vec![(p(And, "out"), 0.0)],
    }
}

fn quaternary_spec() -> CalibrationSpec {
    use GateTag::*;
    CalibrationSpec {
        name: PRESET_QUATERNARY_09V.to_owned(),
        note: "2fF load, 0.9V supply; fitted to a 7-adder path of 646 ps, QM1 measured".to_owned(),
        constraints: vec![PathConstraint {
            traversals: vec![
                (p(Qfac2, "sum"), 4),
                (p(Qha, "carry"), 1),
                (p(Qfac2, "carry"), 1),
                (p(Qfac2Wc, "sum"), 1),
            ],
            observed_ps: 646.0,
        }],
        ties: vec![vec![
            p(Qfac2, "sum"),
            p(Qfac2, "carry"),
            p(Qha, "sum"),
            p(Qha, "carry"),
            p(Qfac2Wc, "sum"),
        ]],
        fixed: vec![(p(Qm1, "product"), 118.0), (p(Qm1, "carry"), 118.0)],
    }
}

/// Calibration inputs of a built-in preset.
pub fn preset_spec(name: &str) -> Result<CalibrationSpec> {
    match name {
        PRESET_BINARY_09V => Ok(binary_spec(name, 312.0, "0.9V")),
        PRESET_BINARY_045V => Ok(binary_spec(name, 799.0, "0.45V")),
        PRESET_QUATERNARY_09V => Ok(quaternary_spec()),
        _ => Err(Error::Parse(format!(
            "unknown timing preset `{name}` (known: {})",
            PRESETS.join(", ")
        ))),
    }
}

/// A built-in timing library.
pub fn timing_preset(name: &str) -> Result<TimingLibrary> {
    calibrate_timing(&preset_spec(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn binary_presets_divide_evenly() {
        let lib = timing_preset(PRESET_BINARY_09V).unwrap();
        assert_relative_eq!(
            lib.delay(GateTag::BinFa, 0).unwrap(),
            312.0 / 14.0,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            lib.delay(GateTag::BinHa, 1).unwrap(),
            312.0 / 14.0,
            epsilon = 1e-9
        );
        assert_eq!(lib.delay(GateTag::And, 0).unwrap(), 0.0);
        let lib = timing_preset(PRESET_BINARY_045V).unwrap();
        assert_relative_eq!(
            lib.delay(GateTag::BinFa, 1).unwrap(),
            799.0 / 14.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn quaternary_preset() {
        let lib = timing_preset(PRESET_QUATERNARY_09V).unwrap();
        assert_relative_eq!(
            lib.delay(GateTag::Qfac2, 0).unwrap(),
            646.0 / 7.0,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            lib.delay(GateTag::Qfac2Wc, 0).unwrap(),
            646.0 / 7.0,
            epsilon = 1e-9
        );
        assert_eq!(lib.delay(GateTag::Qm1, 1).unwrap(), 118.0);
        assert!(lib.covers(GateTag::Qha));
        assert!(!lib.covers(GateTag::BinFa));
        assert!(lib.delay(GateTag::BinFa, 0).is_err());
    }

    #[test]
    fn untied_single_constraint_names_free_ports() {
        let mut spec = preset_spec(PRESET_BINARY_09V).unwrap();
        spec.ties.clear();
        match calibrate_timing(&spec) {
            Err(Error::Underdetermined(free)) => {
                assert_eq!(
                    free,
                    vec!["BIN_FA.sum".to_owned(), "BIN_FA.carry".to_owned()]
                );
            }
            other => panic!("expected underdetermined, got {other:?}"),
        }
    }

    #[test]
    fn overdetermined_fit_is_least_squares() {
        let fa = p(GateTag::BinFa, "sum");
        let spec = CalibrationSpec {
            name: "t".into(),
            constraints: vec![
                PathConstraint {
                    traversals: vec![(fa.clone(), 1)],
                    observed_ps: 10.0,
                },
                PathConstraint {
                    traversals: vec![(fa.clone(), 1)],
                    observed_ps: 12.0,
                },
            ],
            ..Default::default()
        };
        let lib = calibrate_timing(&spec).unwrap();
        assert_relative_eq!(lib.delay(GateTag::BinFa, 0).unwrap(), 11.0, epsilon = 1e-9);
        assert!(lib.delay(GateTag::BinFa, 1).is_err());
    }

    #[test]
    fn no_constraints_rejected() {
        assert!(matches!(
            calibrate_timing(&CalibrationSpec::default()),
            Err(Error::NoConstraints)
        ));
    }

    #[test]
    fn toml_round_trip() {
        let lib = timing_preset(PRESET_QUATERNARY_09V).unwrap();
        let back = TimingLibrary::from_toml(&lib.to_toml()).unwrap();
        assert_eq!(back, lib);
        assert!(TimingLibrary::from_toml("name='x'\n[delay.QHA]\nbogus = 1.0\n").is_err());
        assert!(TimingLibrary::from_toml("name='x'\n[delay.QHA]\nsum = -1.0\n").is_err());
    }
}
