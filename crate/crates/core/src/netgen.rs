// SPDX-License-Identifier: Apache-2.0
//! Multiplier generation: partial products, row-grouping Wallace reduction
//! and a ripple final adder.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gates::GateKind;
use crate::netlist::{GateRole, Netlist, NetlistBuilder, Operand, WireId};

/// One wire in the dot matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dot {
    pub wire: WireId,
    pub range_max: u8,
}

/// Rows of dots keyed by column. Column `k` has weight `base^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DotMatrix {
    base: u32,
    width: usize,
    rows: Vec<BTreeMap<usize, Dot>>,
}

impl DotMatrix {
    /// Empty matrix with `width` columns.
    pub fn new(base: u32, width: usize) -> Self {
        DotMatrix {
            base,
            width,
            rows: Vec::new(),
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[BTreeMap<usize, Dot>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Appends a row, dropping it if empty.
    pub fn push_row(&mut self, row: BTreeMap<usize, Dot>) {
        if !row.is_empty() {
            self.rows.push(row);
        }
    }

    /// Dots per column in row order, up to the highest occupied column.
    pub fn columns(&self) -> Vec<Vec<Dot>> {
        let top = self
            .rows
            .iter()
            .filter_map(|r| r.keys().next_back())
            .max()
            .map_or(0, |c| c + 1);
        let mut cols = vec![Vec::new(); top];
        for row in &self.rows {
            for (&c, &d) in row {
                cols[c].push(d);
            }
        }
        cols
    }

    pub fn heights(&self) -> Vec<usize> {
        self.columns().iter().map(Vec::len).collect()
    }

    pub fn max_height(&self) -> usize {
        self.heights().into_iter().max().unwrap_or(0)
    }

    /// Largest value the matrix can represent: sum of `range_max * base^k`.
    pub fn capacity(&self) -> u128 {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .map(|(&c, d)| u128::from(d.range_max) * u128::from(self.base).pow(c as u32))
            .sum()
    }

    /// Packs every column's dots towards row 0, keeping their order.
    pub fn repacked(&self) -> DotMatrix {
        let mut out = DotMatrix::new(self.base, self.width);
        let cols = self.columns();
        let h = cols.iter().map(Vec::len).max().unwrap_or(0);
        for r in 0..h {
            out.push_row(
                cols.iter()
                    .enumerate()
                    .filter_map(|(c, dots)| dots.get(r).map(|d| (c, *d)))
                    .collect(),
            );
        }
        out
    }
}

/// Number of row-grouping stages needed to bring `h` rows down to 2.
pub fn stages_for_height(h: usize) -> u32 {
    let (mut cap, mut s) = (2usize, 0u32);
    while cap < h {
        cap = cap * 3 / 2;
        s += 1;
    }
    s
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroWidth)
    } else {
        Ok(())
    }
}

fn dot(b: &NetlistBuilder, w: Option<WireId>) -> Option<Dot> {
    w.map(|wire| Dot {
        wire,
        range_max: b.wire_range(wire),
    })
}

/// One AND per bit pair; `x[i] & y[j]` lands in column `i + j`, one row per `j`.
pub fn build_pp_binary(b: &mut NetlistBuilder, x: &[WireId], y: &[WireId]) -> Result<DotMatrix> {
    check_width(x.len().min(y.len()))?;
    let mut m = DotMatrix::new(2, x.len() + y.len());
    for (j, &yj) in y.iter().enumerate() {
        let mut row = BTreeMap::new();
        for (i, &xi) in x.iter().enumerate() {
            let out = b.add_gate(GateKind::And, &[xi, yj], GateRole::PartialProduct)?;
            row.insert(i + j, dot(b, out[0]).expect("AND output"));
        }
        m.push_row(row);
    }
    Ok(m)
}

/// One QM1 per digit pair. Product digits land in column `i + j` and carry
/// digits in `i + j + 1`; rows alternate product, carry per `j`.
pub fn build_pp_quaternary(
    b: &mut NetlistBuilder,
    x: &[WireId],
    y: &[WireId],
) -> Result<DotMatrix> {
    check_width(x.len().min(y.len()))?;
    let mut m = DotMatrix::new(4, x.len() + y.len());
    for (j, &yj) in y.iter().enumerate() {
        let mut products = BTreeMap::new();
        let mut carries = BTreeMap::new();
        for (i, &xi) in x.iter().enumerate() {
            let out = b.add_gate(GateKind::Qm1, &[xi, yj], GateRole::PartialProduct)?;
            products.insert(i + j, dot(b, out[0]).expect("product"));
            carries.insert(i + j + 1, dot(b, out[1]).expect("carry"));
        }
        m.push_row(products);
        m.push_row(carries);
    }
    Ok(m)
}

/// Adds `dots` (two or three, carry-in last) in one column. The carry is
/// left unconnected when it would leave the matrix.
fn column_add(
    b: &mut NetlistBuilder,
    base: u32,
    col: usize,
    width: usize,
    dots: &[Dot],
    role: GateRole,
) -> Result<(Dot, Option<Dot>)> {
    let kind = match (base, dots.len()) {
        (2, 2) => GateKind::BinHa,
        (2, 3) => GateKind::BinFa,
        (4, 2) => GateKind::Qha,
        (4, 3) => GateKind::Qfac2,
        _ => unreachable!("column adder over {} dots", dots.len()),
    };
    let wires: Vec<WireId> = dots.iter().map(|d| d.wire).collect();
    let drop: &[usize] = if col + 1 >= width { &[1] } else { &[] };
    let out = b.add_gate_masked(kind, &wires, role, drop)?;
    Ok((dot(b, out[0]).expect("sum"), dot(b, out[1])))
}

/// One classic row-grouping reduction step.
///
/// Rows are taken three at a time; leftover rows pass through. In each
/// column of a group, three dots make a full adder, two a half adder and one
/// passes. In radix 4 the first dot of range 2 or less goes to the carry-in;
/// with none available the two oldest dots go to a QHA and the third moves
/// to an extra row.
pub fn wallace_stage(b: &mut NetlistBuilder, m: &DotMatrix, stage: u32) -> Result<DotMatrix> {
    let role = GateRole::Reduction(stage);
    let mut out = DotMatrix::new(m.base, m.width);
    let groups = m.rows.len() / 3;
    for g in 0..groups {
        let grp = &m.rows[3 * g..3 * g + 3];
        let mut sums = BTreeMap::new();
        let mut carries = BTreeMap::new();
        let mut extra = BTreeMap::new();
        let cols: std::collections::BTreeSet<usize> =
            grp.iter().flat_map(|r| r.keys().copied()).collect();
        for c in cols {
            let mut dots: Vec<Dot> = grp.iter().filter_map(|r| r.get(&c).copied()).collect();
            if dots.len() == 1 {
                sums.insert(c, dots[0]);
                continue;
            }
            if m.base == 4 && dots.len() == 3 {
                match dots.iter().position(|d| d.range_max <= 2) {
                    Some(k) => {
                        let cin = dots.remove(k);
                        dots.push(cin);
                    }
                    None => {
                        extra.insert(c, dots.pop().expect("three dots"));
                    }
                }
            }
            let (s, k) = column_add(b, m.base, c, m.width, &dots, role)?;
            sums.insert(c, s);
            if let Some(k) = k {
                carries.insert(c + 1, k);
            }
        }
        out.push_row(sums);
        out.push_row(carries);
        out.push_row(extra);
    }
    for row in &m.rows[3 * groups..] {
        out.push_row(row.clone());
    }
    Ok(out)
}

/// Ripple-carry add of the last two rows. Returns one wire per column;
/// `None` marks a column that is constant zero.
pub fn final_cpa(b: &mut NetlistBuilder, m: &DotMatrix) -> Result<Vec<Option<WireId>>> {
    if m.row_count() > 2 {
        return Err(Error::TooManyRows(m.row_count()));
    }
    let cols = m.columns();
    let mut outputs = vec![None; m.width];
    let mut carry: Option<Dot> = None;
    for (c, slot) in outputs.iter_mut().enumerate() {
        let mut dots = cols.get(c).cloned().unwrap_or_default();
        dots.extend(carry.take());
        match dots.len() {
            0 => {}
            1 => *slot = Some(dots[0].wire),
            _ => {
                let (s, k) = column_add(b, m.base, c, m.width, &dots, GateRole::FinalAdd)?;
                *slot = Some(s.wire);
                carry = k;
            }
        }
    }
    Ok(outputs)
}

/// A generated netlist and the dot matrix before each reduction stage and
/// after the last one.
#[derive(Clone, Debug)]
pub struct Generated {
    pub netlist: Netlist,
    pub matrices: Vec<DotMatrix>,
}

/// Builds an N×N multiplier in radix 2 or 4.
pub fn gen_multiplier(radix: u32, n: usize) -> Result<Netlist> {
    Ok(generate(radix, n)?.netlist)
}

/// [`gen_multiplier`] keeping the intermediate dot matrices.
pub fn generate(radix: u32, n: usize) -> Result<Generated> {
    if radix != 2 && radix != 4 {
        return Err(Error::InvalidRadix(radix));
    }
    check_width(n)?;
    let mut b = NetlistBuilder::new(radix, n);
    let x: Vec<WireId> = (0..n).map(|i| b.add_input(Operand::X, i)).collect();
    let y: Vec<WireId> = (0..n).map(|i| b.add_input(Operand::Y, i)).collect();
    let mut m = if radix == 2 {
        build_pp_binary(&mut b, &x, &y)?
    } else {
        build_pp_quaternary(&mut b, &x, &y)?
    };
    if stages_for_height(m.max_height()) < stages_for_height(m.row_count()) {
        m = m.repacked();
    }
    let mut matrices = vec![m.clone()];
    let mut stage = 0;
    while m.row_count() > 2 {
        stage += 1;
        m = wallace_stage(&mut b, &m, stage)?;
        matrices.push(m.clone());
    }
    let outputs = final_cpa(&mut b, &m)?;
    for g in b.gates_mut() {
        if g.kind == GateKind::Qfac2 && g.outputs[1].is_none() {
            g.kind = GateKind::Qfac2Wc;
            g.outputs.truncate(1);
        }
    }
    let netlist = b.finish(outputs);
    netlist.validate().map_err(Error::Invalid)?;
    Ok(Generated { netlist, matrices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateTag;

    fn pp(radix: u32, n: usize) -> DotMatrix {
        let mut b = NetlistBuilder::new(radix, n);
        let x: Vec<_> = (0..n).map(|i| b.add_input(Operand::X, i)).collect();
        let y: Vec<_> = (0..n).map(|i| b.add_input(Operand::Y, i)).collect();
        if radix == 2 {
            build_pp_binary(&mut b, &x, &y).unwrap()
        } else {
            build_pp_quaternary(&mut b, &x, &y).unwrap()
        }
    }

    #[test]
    fn binary_partial_products() {
        assert_eq!(pp(2, 2).heights(), vec![1, 2, 1]);
        assert_eq!(pp(2, 1).heights(), vec![1]);
        let n = gen_multiplier(2, 8).unwrap();
        assert_eq!(n.inventory().count(GateTag::And), 64);
    }

    #[test]
    fn quaternary_partial_products() {
        let m = pp(4, 4);
        assert_eq!(m.row_count(), 8);
        let m = pp(4, 1);
        assert_eq!(m.heights(), vec![1, 1]);
        assert_eq!(m.rows()[0][&0].range_max, 3);
        assert_eq!(m.rows()[1][&1].range_max, 2);
        let m = pp(4, 2);
        let dots: Vec<u8> = m
            .rows()
            .iter()
            .flat_map(|r| r.values().map(|d| d.range_max))
            .collect();
        assert_eq!(dots.iter().filter(|&&r| r == 3).count(), 4);
        assert_eq!(dots.iter().filter(|&&r| r == 2).count(), 4);
    }

    #[test]
    fn zero_width_and_bad_radix_rejected() {
        assert!(matches!(gen_multiplier(2, 0), Err(Error::ZeroWidth)));
        assert!(matches!(gen_multiplier(3, 2), Err(Error::InvalidRadix(3))));
        let mut b = NetlistBuilder::new(2, 1);
        assert!(matches!(
            build_pp_binary(&mut b, &[], &[]),
            Err(Error::ZeroWidth)
        ));
    }

    #[test]
    fn two_rows_need_no_stage() {
        let m = pp(2, 2);
        let mut b = NetlistBuilder::new(2, 2);
        assert_eq!(stages_for_height(m.row_count()), 0);
        let mut one = DotMatrix::new(2, 2);
        one.push_row(m.rows()[0].clone());
        assert_eq!(final_cpa(&mut b, &one).unwrap().iter().flatten().count(), 2);
        assert_eq!(b.finish(vec![]).gates().len(), 0);
    }

    #[test]
    fn final_adder_rejects_three_rows() {
        let mut b = NetlistBuilder::new(2, 2);
        assert!(matches!(
            final_cpa(&mut b, &pp(2, 3)),
            Err(Error::TooManyRows(3))
        ));
    }

    #[test]
    fn stage_schedule() {
        let seq: Vec<u32> = [2, 3, 4, 6, 7, 9, 13, 19, 20]
            .map(stages_for_height)
            .to_vec();
        assert_eq!(seq, vec![0, 1, 2, 3, 4, 4, 5, 6, 7]);
    }

    #[test]
    fn eight_row_trees_take_four_stages() {
        assert_eq!(gen_multiplier(2, 8).unwrap().stages(), 4);
        assert_eq!(gen_multiplier(4, 4).unwrap().stages(), 4);
    }

    #[test]
    fn binary_8x8_tree_inventory() {
        let n = gen_multiplier(2, 8).unwrap();
        let tree = n.inventory_by_role(|r| matches!(r, GateRole::Reduction(_)));
        assert_eq!(tree.count(GateTag::BinFa), 38);
        assert_eq!(tree.count(GateTag::BinHa), 15);
    }

    #[test]
    fn quaternary_4x4_inventory() {
        let inv = gen_multiplier(4, 4).unwrap().inventory();
        assert_eq!(inv.count(GateTag::Qm1), 16);
        assert_eq!(inv.count(GateTag::Qfac2) + inv.count(GateTag::Qfac2Wc), 22);
        assert_eq!(inv.count(GateTag::Qha), 5);
    }

    #[test]
    fn quaternary_2x2_uses_one_stage() {
        let n = gen_multiplier(4, 2).unwrap();
        assert_eq!(n.stages(), 1);
        let inv = n.inventory();
        assert_eq!(inv.count(GateTag::Qfac2), 2);
        assert_eq!(inv.count(GateTag::Qha), 1);
        assert_eq!(inv.count(GateTag::Qfac2Wc), 1);
    }

    #[test]
    fn single_digit_multipliers() {
        let n = gen_multiplier(2, 1).unwrap();
        assert_eq!(n.inventory().to_string(), "{AND:1}");
        assert_eq!(n.outputs()[1], None);
        let n = gen_multiplier(4, 1).unwrap();
        assert_eq!(n.inventory().to_string(), "{QM1:1}");
        assert!(n.outputs().iter().all(Option::is_some));
    }

    #[test]
    fn matrices_keep_capacity_and_shrink() {
        for (radix, n) in [(2, 4), (2, 8), (4, 2), (4, 4), (4, 6), (2, 11)] {
            let g = generate(radix, n).unwrap();
            let max = (u128::from(radix).pow(n as u32) - 1).pow(2);
            let mut prev = usize::MAX;
            for m in &g.matrices {
                assert!(m.capacity() >= max, "r{radix}n{n}");
                let h = m.max_height();
                assert!(h < prev || h <= 2, "r{radix}n{n}");
                prev = h;
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for (radix, n) in [(2, 5), (4, 3)] {
            assert_eq!(
                gen_multiplier(radix, n).unwrap(),
                gen_multiplier(radix, n).unwrap()
            );
        }
    }
}
