//! Root cells, the loop property, eligible pairs, contraction search and the
//! bounded free constructions for each property.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::collections::PointedCollection;
use crate::globular::Side;
use crate::operads::{GenId, GenKind, LoopMode, Operad, OperadError, Property, TermData, TermId};
use crate::pasting::Pasting;
use crate::trees::Tree;

/// Classification of an ordered pair of cells of equal dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairClass {
    pub x: TermId,
    pub y: TermId,
    pub dim: usize,
    pub is_root_pair: bool,
    pub has_loop: bool,
    pub parallel: bool,
    pub same_arity: bool,
    pub same_factor: bool,
    pub eligible: bool,
}

pub fn is_root(op: &Operad, t: TermId) -> Result<bool, OperadError> {
    let i = op.info(t);
    if i.dim == 0 {
        return Err(OperadError::DimensionMismatch(
            "root cells have positive dimension".into(),
        ));
    }
    Ok(i.arity.is_root_only())
}

fn zero_boundaries(op: &Operad, t: TermId) -> Result<(TermId, TermId), OperadError> {
    Ok((
        op.class_of(op.iterated_boundary(t, 0, Side::Source)?),
        op.class_of(op.iterated_boundary(t, 0, Side::Target)?),
    ))
}

/// The four-way equation `s0(x) = s0(y) = t0(x) = t0(y)`.
pub fn has_loop(op: &Operad, x: TermId, y: TermId) -> Result<bool, OperadError> {
    if op.dim(x) != op.dim(y) || op.dim(x) == 0 {
        return Err(OperadError::DimensionMismatch(
            "loop test needs two cells of the same positive dim".into(),
        ));
    }
    let (sx, tx) = zero_boundaries(op, x)?;
    let (sy, ty) = zero_boundaries(op, y)?;
    Ok(sx == sy && sy == tx && tx == ty)
}

/// The two-way reading `s0(x) = t0(y)`.
pub fn has_loop_two_way(op: &Operad, x: TermId, y: TermId) -> Result<bool, OperadError> {
    if op.dim(x) != op.dim(y) || op.dim(x) == 0 {
        return Err(OperadError::DimensionMismatch(
            "loop test needs two cells of the same positive dim".into(),
        ));
    }
    Ok(zero_boundaries(op, x)?.0 == zero_boundaries(op, y)?.1)
}

pub fn classify(op: &Operad, x: TermId, y: TermId) -> Result<PairClass, OperadError> {
    let (xi, yi) = (op.info(x), op.info(y));
    if xi.dim != yi.dim {
        return Err(OperadError::DimensionMismatch(format!(
            "pair of dims {} and {}",
            xi.dim, yi.dim
        )));
    }
    let same_factor = xi.mask & yi.mask != 0;
    let k = xi.dim;
    if k == 0 {
        let eligible = op.class_of(x) == op.class_of(y);
        return Ok(PairClass {
            x,
            y,
            dim: 0,
            is_root_pair: false,
            has_loop: false,
            parallel: false,
            same_arity: xi.arity == yi.arity && xi.in_colour == yi.in_colour,
            same_factor,
            eligible,
        });
    }
    let cls = |t: Option<TermId>| t.map(|t| op.class_of(t));
    let parallel = cls(xi.src) == cls(yi.src) && cls(xi.tgt) == cls(yi.tgt);
    let same_arity =
        xi.arity == yi.arity && xi.in_colour == yi.in_colour && xi.out_colour == yi.out_colour;
    let is_root_pair = is_root(op, x)? && is_root(op, y)?;
    let loop_ok = match op.loop_mode() {
        LoopMode::FourWay => has_loop(op, x, y)?,
        LoopMode::TwoWay => has_loop_two_way(op, x, y)?,
    };
    let eligible = parallel && same_arity && (!is_root_pair || loop_ok);
    Ok(PairClass {
        x,
        y,
        dim: k,
        is_root_pair,
        has_loop: loop_ok,
        parallel,
        same_arity,
        same_factor,
        eligible,
    })
}

type GroupKey = (Tree, usize, usize, Option<TermId>, Option<TermId>);

fn group_key(op: &Operad, t: TermId) -> GroupKey {
    let i = op.info(t);
    (
        i.arity.clone(),
        i.in_colour,
        i.out_colour,
        i.src.map(|s| op.class_of(s)),
        i.tgt.map(|s| op.class_of(s)),
    )
}

/// Eligible ordered pairs among the stored `k`-cells, in a deterministic order.
pub fn eligible_pairs(op: &Operad, k: usize) -> Result<Vec<PairClass>, OperadError> {
    let cells = op.cells(k);
    let mut out = Vec::new();
    if k == 0 {
        for &x in cells {
            out.push(classify(op, x, x)?);
        }
        return Ok(out);
    }
    let mut groups: Vec<Vec<TermId>> = Vec::new();
    let mut index: HashMap<GroupKey, usize> = HashMap::new();
    for &x in cells {
        let key = group_key(op, x);
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(x);
    }
    for g in &groups {
        for &x in g {
            for &y in g {
                let pc = classify(op, x, y)?;
                if pc.eligible {
                    out.push(pc);
                }
            }
        }
    }
    Ok(out)
}

/// Splits `t` into a part built from generators of one factor and the pieces cut off below it.
fn cut(op: &mut Operad, t: TermId, bit: u32) -> Option<(TermId, Vec<TermId>)> {
    let info = op.info(t).clone();
    match op.data(t).clone() {
        TermData::Unit { .. } => (info.mask & bit != 0).then(|| (t, vec![t])),
        TermData::Node { gen, inner } => {
            if op.gen(gen).mask & bit != 0 {
                let sc = inner.scheme();
                let mut tops = Vec::new();
                let mut pieces = Vec::new();
                for &c in &sc.leaf_cells {
                    let (a, p) = cut(op, inner.labels[c], bit)?;
                    tops.push(a);
                    pieces.extend(p);
                }
                let filled = op.fill(inner.shape.clone(), tops).ok()?;
                let node = op.intern(TermData::Node { gen, inner: filled }).ok()?;
                Some((node, pieces))
            } else {
                let u = op.unit(info.out_colour, info.dim);
                (op.mask(u) & bit != 0).then(|| (u, vec![t]))
            }
        }
    }
}

fn factor_bits(op: &Operad) -> Vec<u32> {
    (0..op.base().factor_count().max(1))
        .map(|i| 1u32 << i)
        .collect()
}

/// `x = gamma(a; q)`, `y = gamma(b; q)` with `a`, `b` inside one factor.
fn factor_through(op: &mut Operad, x: TermId, y: TermId) -> Result<Option<TermId>, OperadError> {
    for bit in factor_bits(op) {
        let (Some((a, px)), Some((b, py))) = (cut(op, x, bit), cut(op, y, bit)) else {
            continue;
        };
        if px != py || op.mask(a) & op.mask(b) & bit == 0 {
            continue;
        }
        let shape = op.info(a).arity.clone();
        let Ok(q) = op.fill(shape, px) else { continue };
        if op.gamma(a, &q).ok() != Some(x) || op.gamma(b, &q).ok() != Some(y) {
            continue;
        }
        if !classify(op, a, b)?.eligible {
            continue;
        }
        let g = op.contraction_gen(a, b)?;
        let c = op.gen_term(g);
        let k = op.dim(x);
        let qd = q.degenerate(k + 1)?;
        return Ok(Some(op.gamma(c, &qd)?));
    }
    Ok(None)
}

/// A cell from `x` to `y` supplied by the property, if any.
pub fn find_contraction(
    op: &mut Operad,
    x: TermId,
    y: TermId,
) -> Result<Option<TermId>, OperadError> {
    let pc = classify(op, x, y)?;
    if !pc.eligible {
        return Err(OperadError::NotEligible(format!(
            "{} , {}",
            op.print(x),
            op.print(y)
        )));
    }
    match op.property() {
        Property::C => {
            if pc.same_factor {
                let g = op.contraction_gen(x, y)?;
                Ok(Some(op.gen_term(g)))
            } else {
                factor_through(op, x, y)
            }
        }
        Property::SU => Ok(Some(op.reflexivity_cell(x)?)),
        Property::IdU if x == y => Ok(Some(op.reflexivity_cell(x)?)),
        Property::S | Property::Id | Property::IdU => Ok(None),
    }
}

/// Incremental index of stored cells used by the enumerator.
#[derive(Default)]
struct CellIndex {
    by_colour: HashMap<(usize, usize), Vec<TermId>>,
    by_src: HashMap<(usize, usize, TermId), Vec<TermId>>,
}

impl CellIndex {
    fn add(&mut self, op: &Operad, t: TermId) {
        let i = op.info(t);
        self.by_colour
            .entry((i.dim, i.out_colour))
            .or_default()
            .push(t);
        if let Some(s) = i.src {
            self.by_src
                .entry((i.dim, i.out_colour, s))
                .or_default()
                .push(t);
        }
    }

    fn candidates(&self, dim: usize, colour: usize, src: Option<TermId>) -> &[TermId] {
        let v = match src {
            Some(s) => self.by_src.get(&(dim, colour, s)),
            None => self.by_colour.get(&(dim, colour)),
        };
        v.map(Vec::as_slice).unwrap_or(&[])
    }
}

struct Labeller<'a> {
    op: &'a Operad,
    sc: crate::trees::Scheme,
    labels: Vec<Option<TermId>>,
    trail: Vec<usize>,
}

impl Labeller<'_> {
    fn set(&mut self, c: usize, l: TermId) -> bool {
        match self.labels[c] {
            Some(prev) => prev == l,
            None => {
                self.labels[c] = Some(l);
                self.trail.push(c);
                let cell = self.sc.cells[c];
                if let (Some(s), Some(t)) = (cell.src, cell.tgt) {
                    let i = self.op.info(l);
                    let (ls, lt) = (i.src.unwrap(), i.tgt.unwrap());
                    self.set(s, ls) && self.set(t, lt)
                } else {
                    true
                }
            }
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let c = self.trail.pop().unwrap();
            self.labels[c] = None;
        }
    }
}

/// All pastings on `shape` whose leaf labels are stored cells of colour `colour`
/// with widths summing to `width`; `allow_top` filters labels in the top dimension.
fn pastings_of_width(
    op: &Operad,
    index: &CellIndex,
    shape: &Tree,
    colour: usize,
    width: usize,
    allow_top: &dyn Fn(TermId) -> bool,
    out: &mut Vec<Pasting<TermId>>,
) {
    let sc = shape.scheme();
    let leaves = sc.leaf_cells.clone();
    let n = sc.len();
    let mut lab = Labeller {
        op,
        sc,
        labels: vec![None; n],
        trail: Vec::new(),
    };
    #[allow(clippy::too_many_arguments)]
    fn go(
        lab: &mut Labeller,
        index: &CellIndex,
        leaves: &[usize],
        j: usize,
        used: usize,
        width: usize,
        colour: usize,
        top: usize,
        allow_top: &dyn Fn(TermId) -> bool,
        out: &mut Vec<Pasting<TermId>>,
    ) {
        if j == leaves.len() {
            if used == width {
                let labels = lab.labels.iter().map(|l| l.unwrap()).collect();
                out.push(Pasting {
                    shape: Tree::root_only(0),
                    labels,
                });
            }
            return;
        }
        let remaining = leaves.len() - j - 1;
        if used + remaining + 1 > width {
            return;
        }
        let budget = width - used - remaining;
        let c = leaves[j];
        let cell = lab.sc.cells[c];
        let src = cell.src.and_then(|s| lab.labels[s]);
        let cands = index.candidates(cell.dim, colour, src).to_vec();
        for l in cands {
            let w = lab.op.width(l);
            if w > budget || (j == leaves.len() - 1 && w != budget) {
                continue;
            }
            if cell.dim == top && !allow_top(l) {
                continue;
            }
            let mark = lab.trail.len();
            if lab.set(c, l) {
                go(
                    lab,
                    index,
                    leaves,
                    j + 1,
                    used + w,
                    width,
                    colour,
                    top,
                    allow_top,
                    out,
                );
            }
            lab.undo(mark);
        }
    }
    let start = out.len();
    go(
        &mut lab,
        index,
        &leaves,
        0,
        0,
        width,
        colour,
        shape.dim(),
        allow_top,
        out,
    );
    for p in &mut out[start..] {
        p.shape = shape.clone();
    }
}

/// The bounded free operad on a pointed collection for a property.
pub fn free_operad(
    base: &PointedCollection,
    property: Property,
    max_dim: usize,
    max_width: usize,
) -> Result<Operad, OperadError> {
    let mut op = Operad::new(base, property, max_dim, max_width);
    materialize(&mut op)?;
    Ok(op)
}

/// Enumerates every cell within bounds, saturating or quotienting per the property.
pub fn materialize(op: &mut Operad) -> Result<(), OperadError> {
    let max_dim = op.max_dim();
    let max_width = op.max_width();
    let property = op.property();
    let mut cells: Vec<Vec<TermId>> = vec![Vec::new(); max_dim + 1];
    let mut index = CellIndex::default();
    let mut seen = std::collections::HashSet::new();
    let colours = op.colours().len();
    for k in 0..=max_dim {
        if property.has_units() {
            for c in 0..colours {
                for p in 0..k {
                    op.refl_gen(c, p, k)?;
                }
            }
        }
        if property.is_contractible() && k >= 1 {
            op.cells = Some(cells.clone());
            for pc in eligible_pairs(op, k - 1)? {
                if pc.same_factor {
                    op.contraction_gen(pc.x, pc.y)?;
                }
            }
        }
        let lazy_top = property.is_contractible() && k == max_dim && k > 0;
        let gens: Vec<GenId> = op
            .gens()
            .filter(|(_, g)| g.dim == k && !(lazy_top && matches!(g.kind, GenKind::Con(..))))
            .map(|(id, _)| id)
            .collect();
        for c in 0..colours {
            let u = op.unit(c, k);
            if seen.insert(u) {
                cells[k].push(u);
                index.add(op, u);
            }
        }
        for w in 1..=max_width {
            let mut first = true;
            loop {
                let mut fresh = Vec::new();
                for &g in &gens {
                    let gi = op.gen(g).clone();
                    let sc = gi.arity.scheme();
                    let top_leaves = sc
                        .leaf_cells
                        .iter()
                        .filter(|&&c| sc.cells[c].dim == k)
                        .count();
                    if !first && !(top_leaves == 1 && sc.leaf_cells.len() == 1) {
                        continue;
                    }
                    let mut ps = Vec::new();
                    let allow = |_: TermId| true;
                    pastings_of_width(op, &index, &gi.arity, gi.in_colour, w, &allow, &mut ps);
                    for p in ps {
                        let t = op.intern(TermData::Node { gen: g, inner: p })?;
                        if op.width(t) <= max_width && seen.insert(t) {
                            fresh.push(t);
                        }
                    }
                }
                if fresh.is_empty() {
                    break;
                }
                for t in fresh {
                    cells[k].push(t);
                    index.add(op, t);
                }
                let total: usize = cells.iter().map(Vec::len).sum();
                if total > op.budget {
                    return Err(OperadError::BudgetExceeded {
                        dim: k,
                        cells: total,
                    });
                }
                first = false;
            }
        }
        if lazy_top {
            let cons: Vec<GenId> = op
                .gens()
                .filter(|(_, g)| g.dim == k && matches!(g.kind, GenKind::Con(..)))
                .map(|(id, _)| id)
                .collect();
            for g in cons {
                let t = op.gen_term(g);
                if op.width(t) <= max_width && seen.insert(t) {
                    cells[k].push(t);
                }
            }
        }
    }
    op.cell_set = cells.iter().flatten().copied().collect();
    op.cells = Some(cells);
    if property.is_strict() {
        congruence_closure(op)?;
    }
    Ok(())
}

fn uf_find(parent: &mut [u32], x: u32) -> u32 {
    let mut r = x;
    while parent[r as usize] != r {
        r = parent[r as usize];
    }
    let mut c = x;
    while parent[c as usize] != r {
        let n = parent[c as usize];
        parent[c as usize] = r;
        c = n;
    }
    r
}

fn uf_union(parent: &mut [u32], a: u32, b: u32) -> bool {
    let (ra, rb) = (uf_find(parent, a), uf_find(parent, b));
    if ra == rb {
        return false;
    }
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    parent[hi as usize] = lo;
    true
}

/// Identifies eligible pairs and closes under composition, to a fixpoint.
pub fn congruence_closure(op: &mut Operad) -> Result<(), OperadError> {
    let stored: Vec<TermId> = (0..=op.max_dim())
        .flat_map(|d| op.cells(d).to_vec())
        .collect();
    let mut parent: Vec<u32> = (0..op.term_count() as u32).collect();
    loop {
        let mut changed = false;
        op.classes = Some(parent.clone());
        for k in 1..=op.max_dim() {
            let mut groups: HashMap<GroupKey, Vec<TermId>> = HashMap::new();
            for &x in op.cells(k) {
                groups.entry(group_key(op, x)).or_default().push(x);
            }
            let mut keys: Vec<&GroupKey> = groups.keys().collect();
            keys.sort_by_key(|k| groups[*k][0]);
            for key in keys {
                let g = &groups[key];
                let rep = g[0];
                for &y in &g[1..] {
                    if classify(op, rep, y)?.eligible && uf_union(&mut parent, rep.0, y.0) {
                        changed = true;
                    }
                }
            }
        }
        let mut sigs: HashMap<(GenId, Vec<u32>), u32> = HashMap::new();
        for &t in &stored {
            if let TermData::Node { gen, inner } = op.data(t) {
                let key = (
                    *gen,
                    inner
                        .labels
                        .iter()
                        .map(|l| uf_find(&mut parent, l.0))
                        .collect(),
                );
                match sigs.get(&key) {
                    Some(&r) => changed |= uf_union(&mut parent, r, t.0),
                    None => {
                        sigs.insert(key, t.0);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    for i in 0..parent.len() as u32 {
        uf_find(&mut parent, i);
    }
    op.classes = Some(parent);
    Ok(())
}

/// Congruence classes of stored cells of a dimension, keyed by representative.
pub fn classes_of_dim(op: &Operad, dim: usize) -> BTreeMap<TermId, Vec<TermId>> {
    let mut out: BTreeMap<TermId, Vec<TermId>> = BTreeMap::new();
    for &t in op.cells(dim) {
        out.entry(op.class_of(t)).or_default().push(t);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditViolation {
    MissingContraction { dim: usize, x: String, y: String },
    IneligibleContraction { cell: String },
    NotCongruent { dim: usize, x: String, y: String },
    MissingReflexivity { colour: String, p: usize, n: usize },
    UnexpectedContraction { cell: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    pub property: Property,
    pub pairs_checked: usize,
    pub violations: Vec<AuditViolation>,
}

impl Audit {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits the defining property of a materialized presentation within its bounds.
pub fn verify_property(op: &mut Operad) -> Result<Audit, OperadError> {
    if !op.is_materialized() {
        materialize(op)?;
    }
    let property = op.property();
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    let cons: Vec<(GenId, TermId, TermId)> = op
        .gens()
        .filter_map(|(id, g)| match g.kind {
            GenKind::Con(x, y) => Some((id, x, y)),
            _ => None,
        })
        .collect();
    for &(g, x, y) in &cons {
        let t = op.gen_term(g);
        if !op.cell_set.contains(&t) {
            continue;
        }
        if !property.is_contractible() {
            violations.push(AuditViolation::UnexpectedContraction { cell: op.print(t) });
        } else if !classify(op, x, y)?.eligible {
            violations.push(AuditViolation::IneligibleContraction { cell: op.print(t) });
        }
    }
    if property.has_units() {
        for c in 0..op.colours().len() {
            for n in 1..=op.max_dim() {
                for p in 0..n {
                    let ok = op
                        .find_gen(&GenKind::Refl { colour: c, p, n })
                        .map(|g| {
                            let t = op.gen_term(g);
                            op.cell_set.contains(&t)
                        })
                        .unwrap_or(false);
                    if !ok {
                        violations.push(AuditViolation::MissingReflexivity {
                            colour: op.colour_name(c).to_string(),
                            p,
                            n,
                        });
                    }
                }
            }
        }
    }
    if property.is_contractible() || property.is_strict() {
        for k in 0..op.max_dim() {
            for pc in eligible_pairs(op, k)? {
                pairs_checked += 1;
                if property.is_strict() {
                    if op.class_of(pc.x) != op.class_of(pc.y) {
                        violations.push(AuditViolation::NotCongruent {
                            dim: k,
                            x: op.print(pc.x),
                            y: op.print(pc.y),
                        });
                    }
                    continue;
                }
                let present = match op.find_gen(&GenKind::Con(pc.x, pc.y)) {
                    Some(g) => {
                        let t = op.gen_term(g);
                        op.cell_set.contains(&t)
                    }
                    None => {
                        !pc.same_factor && matches!(factor_through(op, pc.x, pc.y), Ok(Some(_)))
                    }
                };
                if !present {
                    violations.push(AuditViolation::MissingContraction {
                        dim: k,
                        x: op.print(pc.x),
                        y: op.print(pc.y),
                    });
                }
            }
        }
    }
    Ok(Audit {
        property,
        pairs_checked,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collections::build_complex;

    #[test]
    fn identity_counts_by_width() {
        let op = free_operad(&build_complex(0, 1), Property::Id, 1, 3).unwrap();
        let mut by_w = [0; 4];
        for &t in op.cells(1) {
            by_w[op.width(t)] += 1;
        }
        assert_eq!(by_w[1..], [1, 1, 2]);
    }

    #[test]
    fn reflexive_unit_counts_by_width() {
        let op = free_operad(&build_complex(0, 1), Property::IdU, 1, 3).unwrap();
        let mut by_w = [0; 4];
        for &t in op.cells(1) {
            by_w[op.width(t)] += 1;
        }
        assert_eq!(by_w[1..], [2, 4, 16]);
    }

    #[test]
    fn root_and_loop() {
        let mut op = Operad::new(&build_complex(2, 1), Property::C, 2, 3);
        let tau = op.parse("tau").unwrap();
        assert!(is_root(&op, tau).unwrap());
        assert!(!has_loop(&op, tau, tau).unwrap());
        assert!(!classify(&op, tau, tau).unwrap().eligible);
        let mu = op.parse("mu(1,0)").unwrap();
        assert!(!is_root(&op, mu).unwrap());
        let u1 = op.parse("u1").unwrap();
        assert!(!is_root(&op, u1).unwrap());
        assert!(has_loop(&op, u1, u1).unwrap());
        assert!(find_contraction(&mut op, tau, tau).is_err());
    }

    #[test]
    fn contraction_between_bracketings() {
        let mut op = Operad::new(&build_complex(0, 2), Property::C, 2, 3);
        let x = op.parse("gamma(mu(1,0); mu(1,0) *[1,0] u1)").unwrap();
        let y = op.parse("gamma(mu(1,0); u1 *[1,0] mu(1,0))").unwrap();
        let c = find_contraction(&mut op, x, y).unwrap().unwrap();
        assert_eq!(op.term_boundary(c, Side::Source).unwrap(), x);
        assert_eq!(op.term_boundary(c, Side::Target).unwrap(), y);
        assert_eq!(op.info(c).arity, op.info(x).arity.degenerate(2).unwrap());
        let mut id = Operad::new(&build_complex(0, 2), Property::Id, 2, 3);
        let x = id.parse("gamma(mu(1,0); mu(1,0) *[1,0] u1)").unwrap();
        let y = id.parse("gamma(mu(1,0); u1 *[1,0] mu(1,0))").unwrap();
        assert_eq!(find_contraction(&mut id, x, y).unwrap(), None);
    }
}
