// SPDX-License-Identifier: Apache-2.0
//! Area cost as the sum of transistor diameters (ΣDi), per gate kind.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::GateTag;
use crate::netlist::Netlist;

/// One row of the nanotube diameter table. `vth_v` is informational.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterEntry {
    pub n: u32,
    pub diameter_nm: f64,
    pub vth_v: f64,
}

pub const DEFAULT_DIAMETERS: [DiameterEntry; 6] = [
    DiameterEntry {
        n: 8,
        diameter_nm: 0.626,
        vth_v: 0.696,
    },
    DiameterEntry {
        n: 10,
        diameter_nm: 0.783,
        vth_v: 0.557,
    },
    DiameterEntry {
        n: 13,
        diameter_nm: 1.018,
        vth_v: 0.428,
    },
    DiameterEntry {
        n: 19,
        diameter_nm: 1.487,
        vth_v: 0.293,
    },
    DiameterEntry {
        n: 29,
        diameter_nm: 2.27,
        vth_v: 0.192,
    },
    DiameterEntry {
        n: 37,
        diameter_nm: 2.896,
        vth_v: 0.150,
    },
];

/// ΣDi per gate kind plus an optional per-gate energy attribute.
#[derive(Clone, Debug, PartialEq)]
pub struct CostLibrary {
    pub name: String,
    sigma_di: BTreeMap<GateTag, f64>,
    energy_fj: BTreeMap<GateTag, f64>,
    diameters: Vec<DiameterEntry>,
}

#[derive(Serialize, Deserialize)]
struct CostFile {
    name: String,
    sigma_di: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    energy_fj: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    diameter: Vec<DiameterEntry>,
}

/// Helper kinds whose cost is folded into the blocks that use them.
fn zero_cost_allowed(tag: GateTag) -> bool {
    matches!(tag, GateTag::Mux4 | GateTag::Decoder | GateTag::Unary)
}

fn tag_map(m: BTreeMap<String, f64>, what: &str) -> Result<BTreeMap<GateTag, f64>> {
    m.into_iter()
        .map(|(k, v)| {
            let tag: GateTag = k.parse()?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parse(format!(
                    "{what} for {tag} must be finite and >= 0, got {v}"
                )));
            }
            Ok((tag, v))
        })
        .collect()
}

impl CostLibrary {
    /// Builds a library, rejecting non-positive costs for block kinds.
    pub fn new(
        name: impl Into<String>,
        sigma_di: BTreeMap<GateTag, f64>,
        energy_fj: BTreeMap<GateTag, f64>,
        diameters: Vec<DiameterEntry>,
    ) -> Result<Self> {
        for (&tag, &v) in &sigma_di {
            if !v.is_finite() || v < 0.0 || (v == 0.0 && !zero_cost_allowed(tag)) {
                return Err(Error::Parse(format!(
                    "sigma_di for {tag} must be > 0, got {v}"
                )));
            }
        }
        Ok(CostLibrary {
            name: name.into(),
            sigma_di,
            energy_fj,
            diameters,
        })
    }

    pub fn sigma_di(&self, tag: GateTag) -> Result<f64> {
        self.sigma_di
            .get(&tag)
            .copied()
            .ok_or_else(|| Error::MissingEntry(format!("{tag} in cost library `{}`", self.name)))
    }

    pub fn energy_fj(&self, tag: GateTag) -> Option<f64> {
        self.energy_fj.get(&tag).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (GateTag, f64)> + '_ {
        self.sigma_di.iter().map(|(t, v)| (*t, *v))
    }

    pub fn diameters(&self) -> &[DiameterEntry] {
        &self.diameters
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let f: CostFile = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let diameters = if f.diameter.is_empty() {
            DEFAULT_DIAMETERS.to_vec()
        } else {
            f.diameter
        };
        CostLibrary::new(
            f.name,
            tag_map(f.sigma_di, "sigma_di")?,
            tag_map(f.energy_fj, "energy_fj")?,
            diameters,
        )
    }

    pub fn to_toml(&self) -> String {
        let f = CostFile {
            name: self.name.clone(),
            sigma_di: self
                .sigma_di
                .iter()
                .map(|(t, v)| (t.to_string(), *v))
                .collect(),
            energy_fj: self
                .energy_fj
                .iter()
                .map(|(t, v)| (t.to_string(), *v))
                .collect(),
            diameter: self.diameters.clone(),
        };
        toml::to_string(&f).expect("cost library serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

pub fn default_cost_library() -> CostLibrary {
    use GateTag::*;
    let sigma_di = [
        (And, 8.9),
        (BinHa, 18.0),
        (BinFa, 32.0),
        (Qha, 83.0),
        (Qfac2, 227.0),
        (Qfac2Wc, 227.0),
        (Qm1, 132.0),
        (Mux4, 0.0),
        (Decoder, 0.0),
        (Unary, 0.0),
    ]
    .into_iter()
    .collect();
    CostLibrary::new(
        "default",
        sigma_di,
        BTreeMap::new(),
        DEFAULT_DIAMETERS.to_vec(),
    )
    .expect("default costs are valid")
}

/// ΣDi of a netlist in nanometers.
pub fn area_estimate(n: &Netlist, lib: &CostLibrary) -> Result<f64> {
    n.inventory()
        .iter()
        .map(|(tag, count)| Ok(lib.sigma_di(tag)? * count as f64))
        .sum()
}

/// Total energy attribute, if the library has an entry for every kind used.
pub fn energy_estimate(n: &Netlist, lib: &CostLibrary) -> Option<f64> {
    n.inventory()
        .iter()
        .map(|(tag, count)| lib.energy_fj(tag).map(|e| e * count as f64))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lookups() {
        let lib = default_cost_library();
        assert_eq!(lib.sigma_di(GateTag::Qm1).unwrap(), 132.0);
        assert_eq!(lib.sigma_di(GateTag::BinFa).unwrap(), 32.0);
        assert_eq!(lib.sigma_di(GateTag::Mux4).unwrap(), 0.0);
        assert_eq!(lib.diameters().len(), 6);
        assert_eq!(lib.diameters()[2].diameter_nm, 1.018);
    }

    #[test]
    fn toml_round_trip() {
        let lib = default_cost_library();
        assert_eq!(CostLibrary::from_toml(&lib.to_toml()).unwrap(), lib);
    }

    #[test]
    fn toml_rejects_bad_entries() {
        let bad = "name = \"x\"\n[sigma_di]\nAND = 0.0\n";
        assert!(CostLibrary::from_toml(bad).is_err());
        let bad = "name = \"x\"\n[sigma_di]\nXOR = 1.0\n";
        assert!(CostLibrary::from_toml(bad).is_err());
        let ok = "name = \"x\"\n[sigma_di]\nAND = 1.5\n[energy_fj]\nAND = 0.2\n";
        let lib = CostLibrary::from_toml(ok).unwrap();
        assert_eq!(lib.energy_fj(GateTag::And), Some(0.2));
        assert_eq!(lib.diameters().len(), 6);
        assert!(lib.sigma_di(GateTag::BinHa).is_err());
    }

    #[test]
    fn energy_needs_every_kind() {
        let n = crate::netgen::gen_multiplier(2, 2).unwrap();
        assert_eq!(energy_estimate(&n, &default_cost_library()), None);
        let lib = CostLibrary::from_toml(
            "name = \"e\"\n[sigma_di]\nAND = 1\nBIN_HA = 1\n[energy_fj]\nAND = 1.0\nBIN_HA = 2.0\n",
        )
        .unwrap();
        assert_eq!(energy_estimate(&n, &lib), Some(8.0));
    }
}
