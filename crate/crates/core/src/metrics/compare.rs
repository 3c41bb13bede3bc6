// SPDX-License-Identifier: Apache-2.0
//! Side-by-side area and delay of several designs.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::GateTag;
use crate::metrics::cost::{area_estimate, energy_estimate, CostLibrary};
use crate::metrics::path::{critical_path_scoped, PathScope};
use crate::metrics::timing::TimingLibrary;
use crate::netgen::gen_multiplier;
use crate::netlist::{GateInventory, Netlist};

/// A design with the libraries it is measured against.
#[derive(Clone, Debug)]
pub struct Design {
    pub label: String,
    pub netlist: Netlist,
    pub cost: CostLibrary,
    pub timing: TimingLibrary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignMetrics {
    pub label: String,
    pub radix: u32,
    pub width: usize,
    pub inventory: GateInventory,
    pub area_nm: f64,
    /// Adder-tree delay, partial-product generators excluded.
    pub delay_ps: f64,
    pub full_delay_ps: f64,
    pub path: Vec<String>,
    pub timing_library: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_fj: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRatio {
    pub a: String,
    pub b: String,
    pub area_ratio: f64,
    pub delay_ratio: Option<f64>,
    pub smaller: String,
    pub faster: String,
    /// Component ratios, present when `a` is quaternary and `b` binary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<ComponentRatios>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentRatios {
    /// ΣDi(QHA) / ΣDi(BIN_HA).
    pub ha_area: f64,
    /// ΣDi(QFAC2) / ΣDi(BIN_FA).
    pub fa_area: f64,
    /// QHA count / BIN_HA count.
    pub ha_count: Option<f64>,
    /// QFAC2 count (WC included) / BIN_FA count.
    pub fa_count: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub designs: Vec<DesignMetrics>,
    pub pairs: Vec<PairRatio>,
}

fn measure(d: &Design) -> Result<DesignMetrics> {
    let n = &d.netlist;
    let tree = critical_path_scoped(n, &d.timing, PathScope::ReductionOnly)?;
    let full = critical_path_scoped(n, &d.timing, PathScope::Full)?;
    Ok(DesignMetrics {
        label: d.label.clone(),
        radix: n.radix(),
        width: n.width(),
        inventory: n.inventory(),
        area_nm: area_estimate(n, &d.cost)?,
        delay_ps: tree.delay_ps,
        full_delay_ps: full.delay_ps,
        path: tree.kinds(n),
        timing_library: d.timing.name.clone(),
        energy_fj: energy_estimate(n, &d.cost),
    })
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| a / b)
}

fn count_ratio(a: usize, b: usize) -> Option<f64> {
    ratio(a as f64, b as f64)
}

fn pair(
    a: &DesignMetrics,
    b: &DesignMetrics,
    ca: &CostLibrary,
    cb: &CostLibrary,
) -> Result<PairRatio> {
    let components = if a.radix == 4 && b.radix == 2 {
        let ia = &a.inventory;
        let ib = &b.inventory;
        Some(ComponentRatios {
            ha_area: ca.sigma_di(GateTag::Qha)? / cb.sigma_di(GateTag::BinHa)?,
            fa_area: ca.sigma_di(GateTag::Qfac2)? / cb.sigma_di(GateTag::BinFa)?,
            ha_count: count_ratio(ia.count(GateTag::Qha), ib.count(GateTag::BinHa)),
            fa_count: count_ratio(
                ia.count(GateTag::Qfac2) + ia.count(GateTag::Qfac2Wc),
                ib.count(GateTag::BinFa),
            ),
        })
    } else {
        None
    };
    let pick = |x: f64, y: f64| {
        if x <= y {
            a.label.clone()
        } else {
            b.label.clone()
        }
    };
    Ok(PairRatio {
        a: a.label.clone(),
        b: b.label.clone(),
        area_ratio: ratio(a.area_nm, b.area_nm).unwrap_or(f64::NAN),
        delay_ratio: ratio(a.delay_ps, b.delay_ps),
        smaller: pick(a.area_nm, b.area_nm),
        faster: pick(a.delay_ps, b.delay_ps),
        components,
    })
}

/// Measures every design and every pair `(i, j)` with `i < j`.
pub fn compare(designs: &[Design]) -> Result<ComparisonReport> {
    let n = designs.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    compare_pairs(designs, &pairs)
}

/// Measures every design and only the listed pairs.
pub fn compare_pairs(designs: &[Design], pairs: &[(usize, usize)]) -> Result<ComparisonReport> {
    if designs.len() < 2 {
        return Err(Error::TooFewDesigns);
    }
    let metrics = designs.iter().map(measure).collect::<Result<Vec<_>>>()?;
    let pairs = pairs
        .iter()
        .map(|&(i, j)| pair(&metrics[i], &metrics[j], &designs[i].cost, &designs[j].cost))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        designs: metrics,
        pairs,
    })
}

/// The three quaternary-versus-binary head-to-heads of equal operand range.
pub const HEAD_TO_HEAD: [((u32, usize), (u32, usize)); 3] =
    [((4, 1), (2, 2)), ((4, 2), (2, 4)), ((4, 4), (2, 8))];

/// Runs [`HEAD_TO_HEAD`]. Each design takes the first timing library that
/// covers all of its gate kinds.
pub fn compare_head_to_head(
    cost: &CostLibrary,
    timing: &[TimingLibrary],
) -> Result<ComparisonReport> {
    let mut designs = Vec::new();
    let mut pairs = Vec::new();
    for (qa, qb) in HEAD_TO_HEAD {
        let i = designs.len();
        for (radix, width) in [qa, qb] {
            designs.push(design(radix, width, cost, timing)?);
        }
        pairs.push((i, i + 1));
    }
    compare_pairs(&designs, &pairs)
}

/// Generates a design and picks its timing library.
pub fn design(
    radix: u32,
    width: usize,
    cost: &CostLibrary,
    timing: &[TimingLibrary],
) -> Result<Design> {
    let netlist = gen_multiplier(radix, width)?;
    with_libraries(netlist, cost, timing)
}

pub fn with_libraries(
    netlist: Netlist,
    cost: &CostLibrary,
    timing: &[TimingLibrary],
) -> Result<Design> {
    let inv = netlist.inventory();
    let lib = timing
        .iter()
        .find(|l| inv.iter().all(|(t, _)| l.covers(t)))
        .ok_or_else(|| {
            Error::MissingEntry(format!(
                "no timing library covers every kind in {} {inv}",
                netlist.label()
            ))
        })?;
    Ok(Design {
        label: netlist.label(),
        netlist,
        cost: cost.clone(),
        timing: lib.clone(),
    })
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.digits$}"))
}

impl ComparisonReport {
    pub fn design(&self, label: &str) -> Option<&DesignMetrics> {
        self.designs.iter().find(|d| d.label == label)
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairRatio> {
        self.pairs.iter().find(|p| p.a == a && p.b == b)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("| design | radix | width | gates | ΣDi (nm) | tree delay (ps) | full delay (ps) | timing library |\n");
        s.push_str("|---|---|---|---|---|---|---|---|\n");
        for d in &self.designs {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {:.1} | {:.1} | {:.1} | {} |",
                d.label,
                d.radix,
                d.width,
                d.inventory,
                d.area_nm,
                d.delay_ps,
                d.full_delay_ps,
                d.timing_library
            );
        }
        if !self.pairs.is_empty() {
            s.push_str("\n| pair | area ratio | delay ratio | smaller | faster | HA area | FA area | HA count | FA count |\n");
            s.push_str("|---|---|---|---|---|---|---|---|---|\n");
            for p in &self.pairs {
                let c = p.components.as_ref();
                let _ = writeln!(
                    s,
                    "| {} / {} | x{:.2} | {} | {} | {} | {} | {} | {} | {} |",
                    p.a,
                    p.b,
                    p.area_ratio,
                    p.delay_ratio.map_or("-".to_owned(), |r| format!("x{r:.2}")),
                    p.smaller,
                    p.faster,
                    fmt_opt(c.map(|c| c.ha_area), 2),
                    fmt_opt(c.map(|c| c.fa_area), 2),
                    fmt_opt(c.and_then(|c| c.ha_count), 3),
                    fmt_opt(c.and_then(|c| c.fa_count), 3),
                );
            }
        }
        s
    }

    /// Long-format CSV: one `scope,subject,metric,value` row per number.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |scope: &str, subject: &str, metric: &str, value: String| {
            w.write_record([scope, subject, metric, value.as_str()])
        };
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        row("scope", "subject", "metric", "value".into()).map_err(io)?;
        for d in &self.designs {
            row("design", &d.label, "area_nm", format!("{:.3}", d.area_nm)).map_err(io)?;
            row(
                "design",
                &d.label,
                "tree_delay_ps",
                format!("{:.3}", d.delay_ps),
            )
            .map_err(io)?;
            row(
                "design",
                &d.label,
                "full_delay_ps",
                format!("{:.3}", d.full_delay_ps),
            )
            .map_err(io)?;
            for (tag, count) in d.inventory.iter() {
                row(
                    "design",
                    &d.label,
                    &format!("count_{tag}"),
                    count.to_string(),
                )
                .map_err(io)?;
            }
            if let Some(e) = d.energy_fj {
                row("design", &d.label, "energy_fj", format!("{e:.3}")).map_err(io)?;
            }
        }
        for p in &self.pairs {
            let subject = format!("{}/{}", p.a, p.b);
            row(
                "pair",
                &subject,
                "area_ratio",
                format!("{:.4}", p.area_ratio),
            )
            .map_err(io)?;
            if let Some(r) = p.delay_ratio {
                row("pair", &subject, "delay_ratio", format!("{r:.4}")).map_err(io)?;
            }
            row("pair", &subject, "smaller", p.smaller.clone()).map_err(io)?;
            row("pair", &subject, "faster", p.faster.clone()).map_err(io)?;
            if let Some(c) = &p.components {
                row(
                    "pair",
                    &subject,
                    "ha_area_ratio",
                    format!("{:.4}", c.ha_area),
                )
                .map_err(io)?;
                row(
                    "pair",
                    &subject,
                    "fa_area_ratio",
                    format!("{:.4}", c.fa_area),
                )
                .map_err(io)?;
                if let Some(r) = c.ha_count {
                    row("pair", &subject, "ha_count_ratio", format!("{r:.4}")).map_err(io)?;
                }
                if let Some(r) = c.fa_count {
                    row("pair", &subject, "fa_count_ratio", format!("{r:.4}")).map_err(io)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
