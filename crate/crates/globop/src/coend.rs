//! Tree-indexed pushout operads and cells of the coendomorphism operad of the
//! complex `B^0, B^1, ...`: serially commuting tuples of operad morphisms.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collections::{
    alpha_functor, beta_functor, build_complex, coface, functor_symbol, iterated_coface,
    principal_name, second_functor_symbol, wide_pushout, Arity, Coface, CollectionCell,
    CollectionError, CollectionMorphism, Gluing, PointedCollection, Pushout,
};
use crate::contraction::find_contraction;
use crate::globular::Side;
use crate::operads::{
    apply_morphism, check_morphism, Operad, OperadError, OperadMorphism, Property, TermId,
    Violation,
};
use crate::trees::{Tree, TreeError, TreeMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoendError {
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Collection(#[from] CollectionError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("gluing mismatch: {0}")]
    GluingMismatch(String),
    #[error("no contraction available: {0}")]
    ContractionUnavailable(String),
    #[error("boundaries are not parallel: {0}")]
    NotParallel(String),
    #[error("no argument order type-checks: {0}")]
    TypingUnresolvable(String),
}

/// Which of the two `p = 0` horizontal composites a composition cell uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Left,
    Right,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "left" => Ok(Variant::Left),
            "right" => Ok(Variant::Right),
            _ => Err(format!("unknown variant {s}")),
        }
    }
}

/// The coglobular complex the cells map out of.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceComplex {
    /// `C^0, C^1, C^2, ...`
    #[default]
    Standard,
    /// A three-level complex freely generated by one 1-cell `e` of the given arity,
    /// two parallel copies `e-`, `e+` and a 2-cell `e^` between them.
    Classifier { arity: TreeMatrix },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum SlotKey {
    Tree {
        heights: Vec<usize>,
        junctions: Vec<usize>,
    },
    Source {
        complex: SourceComplex,
        level: usize,
    },
}

/// The operad of a tree: copies of `B^h` per leaf glued along `B^c` per junction.
#[derive(Debug, Clone)]
pub struct TreeOperad {
    pub heights: Vec<usize>,
    pub junctions: Vec<usize>,
    pub pushout: Pushout,
    pub operad: Operad,
}

impl TreeOperad {
    pub fn colour_count(&self) -> usize {
        self.operad.colours().len()
    }
}

/// Leaf heights and junction levels; a root-only tree has a single height-0 factor.
pub fn tree_factors(t: &Tree) -> (Vec<usize>, Vec<usize>) {
    if t.is_root_only() {
        return (vec![0], Vec::new());
    }
    let m = t.matrix();
    (m.top, m.bot)
}

/// Factors of `t` merged by truncation to `level`, as `(first, last, height)`.
fn factor_groups(
    heights: &[usize],
    junctions: &[usize],
    level: usize,
) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut first = 0;
    for j in 0..heights.len() {
        if j + 1 == heights.len() || junctions[j] < level {
            let h = if first == j {
                heights[j].min(level)
            } else {
                level
            };
            out.push((first, j, h));
            first = j + 1;
        }
    }
    out
}

/// A morphism out of a pushout given by compatible legs out of its factors.
fn induced_collection_map(
    po: &Pushout,
    legs: &[CollectionMorphism],
) -> Result<CollectionMorphism, CoendError> {
    let mut m = CollectionMorphism {
        colour_map: BTreeMap::new(),
        cell_map: BTreeMap::new(),
    };
    for (inj, leg) in po.injections.iter().zip(legs) {
        for (a, b) in &inj.colour_map {
            let img = leg
                .colour(a)
                .ok_or_else(|| CoendError::GluingMismatch(format!("colour {a} has no image")))?;
            if let Some(prev) = m.colour_map.insert(b.clone(), img.to_string()) {
                if prev != img {
                    return Err(CoendError::GluingMismatch(format!(
                        "colour {b}: {prev} vs {img}"
                    )));
                }
            }
        }
        for (a, b) in &inj.cell_map {
            let img = leg
                .apply(a)
                .ok_or_else(|| CoendError::GluingMismatch(format!("cell {a} has no image")))?;
            if let Some(prev) = m.cell_map.insert(b.clone(), img.to_string()) {
                if prev != img {
                    return Err(CoendError::GluingMismatch(format!(
                        "cell {b}: {prev} vs {img}"
                    )));
                }
            }
        }
    }
    Ok(m)
}

fn classifier_collection(
    arity: &Tree,
    level: usize,
    max_dim: usize,
) -> Result<PointedCollection, CoendError> {
    if arity.dim() != 1 {
        return Err(CoendError::DimensionMismatch(
            "classifier arities are 1-dimensional".into(),
        ));
    }
    if level == 0 {
        return Ok(build_complex(0, max_dim));
    }
    let mut raw = build_complex(1, max_dim).raw().clone();
    let functors: Vec<String> = (0..=max_dim).map(functor_symbol).collect();
    raw.cells.retain(|c| !functors.contains(&c.name));
    raw.principal = None;
    let cell = |name: &str, dim: usize, bd: Option<(&str, &str)>, tree: Tree| CollectionCell {
        name: name.into(),
        dim,
        src: bd.map(|b| b.0.to_string()),
        tgt: bd.map(|b| b.1.to_string()),
        arity: Arity {
            tree,
            colour: "1".into(),
        },
        colour: "2".into(),
    };
    raw.cells.push(cell("e0", 0, None, Tree::root_only(0)));
    match level {
        1 => raw
            .cells
            .push(cell("e", 1, Some(("e0", "e0")), arity.clone())),
        2 => {
            raw.cells
                .push(cell("e-", 1, Some(("e0", "e0")), arity.clone()));
            raw.cells
                .push(cell("e+", 1, Some(("e0", "e0")), arity.clone()));
            raw.cells
                .push(cell("e^", 2, Some(("e-", "e+")), arity.degenerate(2)?));
            raw.principal = Some("e^".into());
        }
        _ => {
            return Err(CoendError::DimensionMismatch(format!(
                "classifier has no level {level}"
            )))
        }
    }
    Ok(PointedCollection::validate(raw)?)
}

/// Bounded operads, tree cofaces and source complexes shared by all cells built against them.
#[derive(Debug, Clone)]
pub struct CoendEnv {
    property: Property,
    max_dim: usize,
    max_width: usize,
    variant: Variant,
    slots: BTreeMap<SlotKey, TreeOperad>,
}

impl CoendEnv {
    pub fn new(property: Property, max_dim: usize, max_width: usize) -> CoendEnv {
        CoendEnv {
            property,
            max_dim,
            max_width,
            variant: Variant::Left,
            slots: BTreeMap::new(),
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> CoendEnv {
        self.variant = variant;
        self
    }

    pub fn property(&self) -> Property {
        self.property
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    fn tree_key(t: &Tree) -> SlotKey {
        let (heights, junctions) = tree_factors(t);
        SlotKey::Tree { heights, junctions }
    }

    fn source_key(&self, src: &SourceComplex, level: usize) -> SlotKey {
        match src {
            SourceComplex::Standard => SlotKey::Tree {
                heights: vec![level],
                junctions: Vec::new(),
            },
            c => SlotKey::Source {
                complex: c.clone(),
                level,
            },
        }
    }

    fn build_slot(&self, key: &SlotKey) -> Result<TreeOperad, CoendError> {
        let (heights, junctions, pushout) = match key {
            SlotKey::Tree { heights, junctions } => {
                let pushout = if heights.len() == 1 {
                    let c = build_complex(heights[0], self.max_dim);
                    Pushout {
                        injections: vec![CollectionMorphism::identity(&c)],
                        collection: c,
                    }
                } else {
                    let factors: Vec<PointedCollection> = heights
                        .iter()
                        .map(|&h| build_complex(h, self.max_dim))
                        .collect();
                    let gluings: Vec<Gluing> = junctions
                        .iter()
                        .enumerate()
                        .map(|(j, &c)| Gluing {
                            shared: build_complex(c, self.max_dim),
                            left: j,
                            to_left: iterated_coface(c, heights[j], Coface::Kappa, self.max_dim),
                            right: j + 1,
                            to_right: iterated_coface(
                                c,
                                heights[j + 1],
                                Coface::Delta,
                                self.max_dim,
                            ),
                        })
                        .collect();
                    wide_pushout(&factors, &gluings)?
                };
                (heights.clone(), junctions.clone(), pushout)
            }
            SlotKey::Source {
                complex: SourceComplex::Classifier { arity },
                level,
            } => {
                let c = classifier_collection(&Tree::from_matrix(arity)?, *level, self.max_dim)?;
                (
                    vec![*level],
                    Vec::new(),
                    Pushout {
                        injections: vec![CollectionMorphism::identity(&c)],
                        collection: c,
                    },
                )
            }
            SlotKey::Source {
                complex: SourceComplex::Standard,
                level,
            } => {
                return self.build_slot(&SlotKey::Tree {
                    heights: vec![*level],
                    junctions: Vec::new(),
                })
            }
        };
        let operad = Operad::new(
            &pushout.collection,
            self.property,
            self.max_dim,
            self.max_width,
        );
        Ok(TreeOperad {
            heights,
            junctions,
            pushout,
            operad,
        })
    }

    fn slot(&mut self, key: SlotKey) -> Result<&mut TreeOperad, CoendError> {
        if !self.slots.contains_key(&key) {
            let s = self.build_slot(&key)?;
            self.slots.insert(key.clone(), s);
        }
        Ok(self.slots.get_mut(&key).unwrap())
    }

    /// `B^t`; degenerate trees share the operad of the tree they degenerate.
    pub fn tree_operad(&mut self, t: &Tree) -> Result<&mut TreeOperad, CoendError> {
        self.slot(Self::tree_key(t))
    }

    /// Level `level` of a source complex.
    pub fn source_operad(
        &mut self,
        src: &SourceComplex,
        level: usize,
    ) -> Result<&mut Operad, CoendError> {
        let key = self.source_key(src, level);
        Ok(&mut self.slot(key)?.operad)
    }

    /// The coface `W^{level-1} -> W^level` of a source complex.
    pub fn source_coface(
        &self,
        src: &SourceComplex,
        level: usize,
        side: Coface,
    ) -> CollectionMorphism {
        match src {
            SourceComplex::Standard => coface(level - 1, side, self.max_dim),
            SourceComplex::Classifier { .. } if level == 1 => coface(0, side, self.max_dim),
            SourceComplex::Classifier { .. } => {
                let base = build_complex(1, self.max_dim);
                let functors: Vec<String> = (0..=self.max_dim).map(functor_symbol).collect();
                let mut m = CollectionMorphism::identity(&base);
                m.cell_map.retain(|k, _| !functors.contains(k));
                m.cell_map.insert("e0".into(), "e0".into());
                let e = if side == Coface::Delta { "e-" } else { "e+" };
                m.cell_map.insert("e".into(), e.into());
                m
            }
        }
    }

    /// The tree coface `B^{∂t} -> B^t` as a map of base collections.
    pub fn tree_coface_collection(
        &mut self,
        t: &Tree,
        side: Coface,
    ) -> Result<CollectionMorphism, CoendError> {
        if t.dim() == 0 {
            return Err(CoendError::DimensionMismatch(
                "a 0-tree has no boundary".into(),
            ));
        }
        let bt = self.tree_operad(t)?.clone();
        let dt = t.truncate(1)?;
        let bdt = self.tree_operad(&dt)?.clone();
        let groups = factor_groups(&bt.heights, &bt.junctions, t.dim() - 1);
        let heights: Vec<usize> = groups.iter().map(|g| g.2).collect();
        if heights != bdt.heights {
            return Err(CoendError::GluingMismatch(format!(
                "boundary factors {heights:?} vs {:?}",
                bdt.heights
            )));
        }
        let legs = groups
            .iter()
            .map(|&(first, last, h)| {
                let j = if side == Coface::Delta { first } else { last };
                iterated_coface(h, bt.heights[j], side, self.max_dim)
                    .then(&bt.pushout.injections[j])
            })
            .collect::<Vec<_>>();
        induced_collection_map(&bdt.pushout, &legs)
    }

    /// The tree coface as an operad morphism.
    pub fn tree_coface(&mut self, t: &Tree, side: Coface) -> Result<OperadMorphism, CoendError> {
        let cm = self.tree_coface_collection(t, side)?;
        let src = self.tree_operad(&t.truncate(1)?)?.operad.clone();
        let tgt = &mut self.tree_operad(t)?.operad;
        Ok(OperadMorphism::from_collection_map(&src, tgt, &cm)?)
    }

    fn source_coface_op(
        &mut self,
        src: &SourceComplex,
        level: usize,
        side: Coface,
    ) -> Result<OperadMorphism, CoendError> {
        let cm = self.source_coface(src, level, side);
        let lower = self.source_operad(src, level - 1)?.clone();
        let upper = self.source_operad(src, level)?;
        Ok(OperadMorphism::from_collection_map(&lower, upper, &cm)?)
    }
}

/// A cell of level `n` over an `n`-tree: `maps[0] = [top]`, `maps[k] = [minus, plus]` at level `n - k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoendCell {
    pub n: usize,
    pub tree: Tree,
    pub source: SourceComplex,
    pub maps: Vec<Vec<OperadMorphism>>,
}

impl CoendCell {
    pub fn top(&self) -> &OperadMorphism {
        &self.maps[0][0]
    }

    /// Tree of the targets at depth `k`.
    pub fn tree_at(&self, k: usize) -> Tree {
        self.tree.truncate(k).expect("depth within dim")
    }
}

/// `second ∘ first`.
fn compose_morphisms(
    first: &OperadMorphism,
    second: &OperadMorphism,
    a: &Operad,
    b: &Operad,
    c: &mut Operad,
) -> Result<OperadMorphism, OperadError> {
    let colour_map = first
        .colour_map
        .iter()
        .map(|&i| second.colour_map[i])
        .collect();
    let mut images = BTreeMap::new();
    for g in a.base_gen_ids() {
        let Some(&t) = first.images.get(&g) else {
            continue;
        };
        images.insert(g, apply_morphism(second, b, c, t)?);
    }
    Ok(OperadMorphism { colour_map, images })
}

/// The identity cell on `B^n`.
pub fn identity_cell(env: &mut CoendEnv, n: usize) -> Result<CoendCell, CoendError> {
    let mut maps = Vec::new();
    for level in (0..=n).rev() {
        let op = env.source_operad(&SourceComplex::Standard, level)?;
        let id = OperadMorphism::identity(op);
        maps.push(if level == n {
            vec![id]
        } else {
            vec![id.clone(), id]
        });
    }
    Ok(CoendCell {
        n,
        tree: Tree::linear(n),
        source: SourceComplex::Standard,
        maps,
    })
}

/// One violated serial equation or boundary condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SerialViolation {
    Equation {
        equation: String,
        generator: String,
        expected: String,
        found: String,
    },
    Colour {
        equation: String,
        colour: String,
        expected: String,
        found: String,
    },
    Morphism {
        map: String,
        violation: Violation,
    },
    Shape {
        reason: String,
    },
}

impl fmt::Display for SerialViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SerialViolation::Equation {
                equation,
                generator,
                expected,
                found,
            } => {
                write!(f, "{equation} fails on {generator}: {expected} vs {found}")
            }
            SerialViolation::Colour {
                equation,
                colour,
                expected,
                found,
            } => {
                write!(
                    f,
                    "{equation} fails on colour {colour}: {expected} vs {found}"
                )
            }
            SerialViolation::Morphism { map, violation } => write!(f, "{map}: {violation}"),
            SerialViolation::Shape { reason } => write!(f, "{reason}"),
        }
    }
}

fn map_label(n: usize, k: usize, i: usize) -> String {
    let level = n - k;
    match (k, i) {
        (0, _) => format!("f{level}"),
        (_, 0) => format!("f{level}-"),
        _ => format!("f{level}+"),
    }
}

/// Checks every map generator-wise and every serial equation of the tuple.
pub fn check_serial(
    env: &mut CoendEnv,
    cell: &CoendCell,
) -> Result<Vec<SerialViolation>, CoendError> {
    let mut out = Vec::new();
    if cell.tree.dim() != cell.n || cell.maps.len() != cell.n + 1 {
        out.push(SerialViolation::Shape {
            reason: format!("level {} with {} map levels", cell.n, cell.maps.len()),
        });
        return Ok(out);
    }
    for (k, row) in cell.maps.iter().enumerate() {
        let want = if k == 0 { 1 } else { 2 };
        if row.len() != want {
            out.push(SerialViolation::Shape {
                reason: format!("depth {k} has {} maps", row.len()),
            });
            return Ok(out);
        }
    }
    for k in 0..=cell.n {
        let level = cell.n - k;
        let s = cell.tree_at(k);
        let w = env.source_operad(&cell.source, level)?.clone();
        for (i, f) in cell.maps[k].iter().enumerate() {
            let label = map_label(cell.n, k, i);
            let tgt = &mut env.tree_operad(&s)?.operad;
            for v in check_morphism(f, &w, tgt) {
                out.push(SerialViolation::Morphism {
                    map: label.clone(),
                    violation: v,
                });
            }
            if level == 0 {
                continue;
            }
            let w_lower = env.source_operad(&cell.source, level - 1)?.clone();
            for (side, lower, name) in [
                (Coface::Delta, &cell.maps[k + 1][0], "delta"),
                (Coface::Kappa, &cell.maps[k + 1][1], "kappa"),
            ] {
                let equation = format!(
                    "{label} . {name} = {name} . {}",
                    map_label(cell.n, k + 1, if side == Coface::Delta { 0 } else { 1 })
                );
                let wc = env.source_coface_op(&cell.source, level, side)?;
                let tc = env.tree_coface(&s, side)?;
                let ds = s.truncate(1)?;
                for (c, &lc) in lower.colour_map.iter().enumerate() {
                    let lhs = f.colour_map[wc.colour_map[c]];
                    let rhs = tc.colour_map[lc];
                    if lhs != rhs {
                        let op = &env.tree_operad(&s)?.operad;
                        out.push(SerialViolation::Colour {
                            equation: equation.clone(),
                            colour: w_lower.colour_name(c).to_string(),
                            expected: op.colour_name(rhs).to_string(),
                            found: op.colour_name(lhs).to_string(),
                        });
                    }
                }
                let w_upper = env.source_operad(&cell.source, level)?.clone();
                for g in w_lower.base_gen_ids() {
                    let Some(&lower_img) = lower.images.get(&g) else {
                        continue;
                    };
                    let Some(&wg) = wc.images.get(&g) else {
                        continue;
                    };
                    let bds = env.tree_operad(&ds)?.operad.clone();
                    let tgt = &mut env.tree_operad(&s)?.operad;
                    let lhs = apply_morphism(f, &w_upper, tgt, wg);
                    let rhs = apply_morphism(&tc, &bds, tgt, lower_img);
                    match (lhs, rhs) {
                        (Ok(a), Ok(b)) if a == b => {}
                        (a, b) => {
                            let show = |r: Result<TermId, OperadError>| match r {
                                Ok(t) => tgt.print(t),
                                Err(e) => format!("error: {e}"),
                            };
                            let found = show(a);
                            let expected = show(b);
                            out.push(SerialViolation::Equation {
                                equation: equation.clone(),
                                generator: w_lower.gen_name(g),
                                expected,
                                found,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The source or target cell one level down.
pub fn coend_boundary(cell: &CoendCell, side: Side) -> Result<CoendCell, CoendError> {
    if cell.n == 0 {
        return Err(CoendError::DimensionMismatch(
            "level-0 cells have no boundary".into(),
        ));
    }
    let i = if side == Side::Source { 0 } else { 1 };
    let mut maps = vec![vec![cell.maps[1][i].clone()]];
    maps.extend(cell.maps[2..].iter().cloned());
    Ok(CoendCell {
        n: cell.n - 1,
        tree: cell.tree.truncate(1)?,
        source: cell.source.clone(),
        maps,
    })
}

/// The map `B^{∂^k t} -> B^{∂^k t'}` induced by the inner cells, on the `side` boundaries.
fn induced_level_map(
    env: &mut CoendEnv,
    t: &Tree,
    t2: &Tree,
    inners: &[CoendCell],
    offsets: &[usize],
    k: usize,
    side: usize,
) -> Result<OperadMorphism, CoendError> {
    let level = t.dim() - k;
    let bt = env.tree_operad(&t.truncate(k)?)?.clone();
    let (h, junc) = tree_factors(t);
    let (h2, junc2) = tree_factors(t2);
    let groups = factor_groups(&h, &junc, level);
    let groups2 = factor_groups(&h2, &junc2, level);
    let group_of = |j: usize| groups2.iter().position(|g| g.0 <= j && j <= g.1).unwrap();
    let t2k = t2.truncate(k)?;
    let bt2 = env.tree_operad(&t2k)?.clone();
    let mut images = BTreeMap::new();
    let mut colour_map = vec![usize::MAX; bt.operad.colours().len()];
    for (gi, &(first, last, gh)) in groups.iter().enumerate() {
        let j = if side == 0 { first } else { last };
        let inner = &inners[j];
        let (map, inner_tree) = if h[j] <= level {
            (inner.top().clone(), inner.tree.clone())
        } else {
            let d = h[j] - level;
            (inner.maps[d][side].clone(), inner.tree.truncate(d)?)
        };
        // block inclusion of the inner target into the composite
        let (ih, ijunc) = tree_factors(&inner_tree);
        let igroups = factor_groups(&ih, &ijunc, inner_tree.dim());
        let binner = env.tree_operad(&inner_tree)?.clone();
        let legs = igroups
            .iter()
            .enumerate()
            .map(|(r, &(_, _, rh))| {
                let g2 = group_of(offsets[j] + r);
                let target_h = bt2.heights[g2];
                if target_h != rh {
                    return Err(CoendError::GluingMismatch(format!(
                        "factor heights {rh} vs {target_h}"
                    )));
                }
                Ok(
                    CollectionMorphism::identity(&build_complex(rh, env.max_dim))
                        .then(&bt2.pushout.injections[g2]),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let block = induced_collection_map(&binner.pushout, &legs)?;
        let tgt = &mut env.tree_operad(&t2k)?.operad;
        let block_op = OperadMorphism::from_collection_map(&binner.operad, tgt, &block)?;
        let src_factor = env.source_operad(&SourceComplex::Standard, gh)?.clone();
        let tgt = &mut env.tree_operad(&t2k)?.operad;
        let leg = compose_morphisms(&map, &block_op, &src_factor, &binner.operad, tgt)?;
        let inj = &bt.pushout.injections[gi];
        for (a, b) in &inj.colour_map {
            let ca = src_factor.colour_index(a).unwrap();
            let cb = bt.operad.colour_index(b).unwrap();
            let img = leg.colour_map[ca];
            if colour_map[cb] != usize::MAX && colour_map[cb] != img {
                return Err(CoendError::GluingMismatch(format!("colour {b}")));
            }
            colour_map[cb] = img;
        }
        for (a, b) in &inj.cell_map {
            let (Some(ga), Some(gb)) = (src_factor.base_gen(a), bt.operad.base_gen(b)) else {
                continue;
            };
            let img = leg.images[&ga];
            if let Some(prev) = images.insert(gb, img) {
                if prev != img {
                    return Err(CoendError::GluingMismatch(format!("generator {b}")));
                }
            }
        }
    }
    Ok(OperadMorphism { colour_map, images })
}

/// Substitutes one inner cell per leaf of the outer tree.
pub fn coend_compose(
    env: &mut CoendEnv,
    outer: &CoendCell,
    inners: &[CoendCell],
) -> Result<CoendCell, CoendError> {
    let n = outer.n;
    let (h, junc) = tree_factors(&outer.tree);
    if inners.len() != h.len() {
        return Err(CoendError::GluingMismatch(format!(
            "{} inner cells for {} leaves",
            inners.len(),
            h.len()
        )));
    }
    if outer.source != SourceComplex::Standard
        || inners.iter().any(|c| c.source != SourceComplex::Standard)
    {
        return Err(CoendError::GluingMismatch(
            "composition needs the standard complex".into(),
        ));
    }
    for (j, c) in inners.iter().enumerate() {
        if c.n != h[j] {
            return Err(CoendError::GluingMismatch(format!(
                "leaf {j} has height {} but the inner cell level {}",
                h[j], c.n
            )));
        }
    }
    let mut t2 = inners[0].tree.lift_to(n)?;
    for (j, c) in inners.iter().enumerate().skip(1) {
        t2 = t2
            .star(&c.tree.lift_to(n)?, junc[j - 1])
            .map_err(|e| CoendError::GluingMismatch(e.to_string()))?;
    }
    let mut offsets = Vec::new();
    let mut flat = Vec::new();
    for c in inners {
        offsets.push(flat.len());
        flat.extend(tree_factors(&c.tree).0);
    }
    if tree_factors(&t2).0 != flat {
        return Err(CoendError::GluingMismatch(
            "substituted tree does not split along the inner trees".into(),
        ));
    }
    let mut maps = Vec::new();
    for k in 0..=n {
        let level = n - k;
        let w = env.source_operad(&SourceComplex::Standard, level)?.clone();
        let mut row = Vec::new();
        for (i, f) in outer.maps[k].iter().enumerate() {
            let phi = induced_level_map(env, &outer.tree, &t2, inners, &offsets, k, i)?;
            let mid = env.tree_operad(&outer.tree.truncate(k)?)?.operad.clone();
            let tgt = &mut env.tree_operad(&t2.truncate(k)?)?.operad;
            row.push(compose_morphisms(f, &phi, &w, &mid, tgt)?);
        }
        maps.push(row);
    }
    Ok(CoendCell {
        n,
        tree: t2,
        source: SourceComplex::Standard,
        maps,
    })
}

fn name_in(po: &Pushout, factor: usize, name: &str) -> Result<String, CoendError> {
    po.injections[factor]
        .apply(name)
        .map(str::to_string)
        .ok_or_else(|| CoendError::GluingMismatch(format!("{name} missing from factor {factor}")))
}

fn gen_by_name(op: &mut Operad, name: &str) -> Result<TermId, CoendError> {
    let g = op
        .base_gen(name)
        .ok_or_else(|| OperadError::UnknownGenerator(name.to_string()))?;
    Ok(op.gen_term(g))
}

/// `gamma(outer; inner)` for a single-leaf outer, trying both orders.
fn apply_to(op: &mut Operad, outer: TermId, inner: TermId) -> Result<TermId, CoendError> {
    let attempt = |op: &mut Operad, a: TermId, b: TermId| -> Result<TermId, OperadError> {
        let shape = op.info(a).arity.clone();
        let q = op.fill(shape, vec![b])?;
        op.gamma(a, &q)
    };
    attempt(op, outer, inner)
        .or_else(|_| attempt(op, inner, outer))
        .map_err(|e| {
            CoendError::TypingUnresolvable(format!(
                "{} with {}: {e}",
                op.print(outer),
                op.print(inner)
            ))
        })
}

/// `gamma(mu; a ⋆ b)` with `mu` the binary composition of the given dimension and level.
fn compose_pair(op: &mut Operad, mu: TermId, a: TermId, b: TermId) -> Result<TermId, CoendError> {
    let shape = op.info(mu).arity.clone();
    let q = op
        .fill(shape.clone(), vec![a, b])
        .or_else(|_| op.fill(shape, vec![b, a]));
    let q = q.map_err(|e| {
        CoendError::TypingUnresolvable(format!("{} over {}: {e}", op.print(a), op.print(b)))
    })?;
    Ok(op.gamma(mu, &q)?)
}

/// Chooses the image of a free generator: `(target, name, lower map, source operad)`.
type FreeImage<'a> =
    dyn FnMut(&mut Operad, &str, &OperadMorphism, &Operad) -> Result<TermId, CoendError> + 'a;

/// Top map of a cell determined by its boundary maps except on the free generators.
fn extend_top(
    env: &mut CoendEnv,
    src: &SourceComplex,
    n: usize,
    t: &Tree,
    minus: &OperadMorphism,
    plus: &OperadMorphism,
    free: &mut FreeImage<'_>,
) -> Result<OperadMorphism, CoendError> {
    let w = env.source_operad(src, n)?.clone();
    let w_lower = env.source_operad(src, n - 1)?.clone();
    let dc = env.source_coface(src, n, Coface::Delta);
    let kc = env.source_coface(src, n, Coface::Kappa);
    let ds = t.truncate(1)?;
    let td = env.tree_coface(t, Coface::Delta)?;
    let tk = env.tree_coface(t, Coface::Kappa)?;
    let bds = env.tree_operad(&ds)?.operad.clone();
    let mut colour_map = vec![usize::MAX; w.colours().len()];
    for (c, name) in w_lower.colours().iter().enumerate() {
        for (m, cm, tc) in [(minus, &dc, &td), (plus, &kc, &tk)] {
            let wc = w.colour_index(cm.colour(name).unwrap()).unwrap();
            let img = tc.colour_map[m.colour_map[c]];
            if colour_map[wc] != usize::MAX && colour_map[wc] != img {
                return Err(CoendError::NotParallel(format!(
                    "colour {}",
                    w.colour_name(wc)
                )));
            }
            colour_map[wc] = img;
        }
    }
    if colour_map.contains(&usize::MAX) {
        return Err(CoendError::GluingMismatch(
            "a colour is not reached by the boundary maps".into(),
        ));
    }
    let mut images: BTreeMap<crate::operads::GenId, TermId> = BTreeMap::new();
    let mut preimage: BTreeMap<String, Vec<(String, usize)>> = BTreeMap::new();
    for (i, cm) in [&dc, &kc].into_iter().enumerate() {
        for (a, b) in &cm.cell_map {
            preimage.entry(b.clone()).or_default().push((a.clone(), i));
        }
    }
    let mut gens: Vec<_> = w.base_gen_ids().collect();
    gens.sort_by_key(|&g| (w.gen(g).dim, g));
    for g in gens {
        let name = w.gen_name(g);
        let mut img = None;
        for (a, i) in preimage.get(&name).cloned().unwrap_or_default() {
            let Some(ga) = w_lower.base_gen(&a) else {
                continue;
            };
            let (m, tc) = if i == 0 { (minus, &td) } else { (plus, &tk) };
            let tgt = &mut env.tree_operad(t)?.operad;
            let v = apply_morphism(tc, &bds, tgt, m.images[&ga])?;
            if img.is_some_and(|p| p != v) {
                return Err(CoendError::NotParallel(format!(
                    "{name}: {} vs {}",
                    tgt.print(img.unwrap()),
                    tgt.print(v)
                )));
            }
            img = Some(v);
        }
        let v = match img {
            Some(v) => v,
            None => {
                let partial = OperadMorphism {
                    colour_map: colour_map.clone(),
                    images: images.clone(),
                };
                let tgt = &mut env.tree_operad(t)?.operad;
                free(tgt, &name, &partial, &w)?
            }
        };
        images.insert(g, v);
    }
    Ok(OperadMorphism { colour_map, images })
}

/// Source or target functor symbol of dimension `m` in `C^n`, `n >= 2`.
fn functor_family(n: usize, side: Side, m: usize) -> String {
    match (n, side) {
        (2, Side::Source) => functor_symbol(m),
        (2, Side::Target) => second_functor_symbol(m),
        (_, Side::Source) => alpha_functor(m),
        (_, Side::Target) => beta_functor(m),
    }
}

/// The composition cell over `1(n) ⋆_p 1(n)`.
pub fn make_mu(
    env: &mut CoendEnv,
    n: usize,
    p: usize,
    variant: Variant,
) -> Result<CoendCell, CoendError> {
    if p >= n {
        return Err(CoendError::DimensionMismatch(format!(
            "need p < n, got p = {p}, n = {n}"
        )));
    }
    let t = Tree::linear(n).star(&Tree::linear(n), p)?;
    let lower = if p + 1 == n {
        identity_cell(env, n - 1)?
    } else {
        make_mu(env, n - 1, p, variant)?
    };
    let mut maps = vec![vec![], vec![lower.top().clone(), lower.top().clone()]];
    maps.extend(lower.maps[1..].iter().cloned());
    let po = env.tree_operad(&t)?.pushout.clone();
    let principal = principal_name(n);
    let mut free = |op: &mut Operad,
                    name: &str,
                    _: &OperadMorphism,
                    _: &Operad|
     -> Result<TermId, CoendError> {
        if n == 1 {
            // functor family: apply the first copy, then the second
            let m = name
                .trim_start_matches(|c: char| !c.is_ascii_digit())
                .parse::<usize>()
                .map_err(|_| {
                    CoendError::TypingUnresolvable(format!("unexpected free generator {name}"))
                })?;
            let f = gen_by_name(op, &name_in(&po, 0, &functor_symbol(m))?)?;
            let g = gen_by_name(op, &name_in(&po, 1, &functor_symbol(m))?)?;
            return apply_to(op, g, f);
        }
        if name != principal {
            return Err(CoendError::TypingUnresolvable(format!(
                "unexpected free generator {name}"
            )));
        }
        let sigma = gen_by_name(op, &name_in(&po, 0, &principal)?)?;
        let tau = gen_by_name(op, &name_in(&po, 1, &principal)?)?;
        let d = n - 1;
        if p > 0 {
            let mu_name = name_in(&po, 0, &format!("nu({d},{})", p - 1))?;
            let mu = gen_by_name(op, &mu_name)?;
            return compose_pair(op, mu, sigma, tau);
        }
        let mu_name = name_in(&po, 1, &format!("nu({d},0)"))?;
        let mu = gen_by_name(op, &mu_name)?;
        let a0 = gen_by_name(op, &name_in(&po, 0, &functor_family(n, Side::Source, 0))?)?;
        let b0 = gen_by_name(op, &name_in(&po, 0, &functor_family(n, Side::Target, 0))?)?;
        let c_top = gen_by_name(op, &name_in(&po, 1, &functor_family(n, Side::Source, d))?)?;
        let d_top = gen_by_name(op, &name_in(&po, 1, &functor_family(n, Side::Target, d))?)?;
        let whisker = |op: &mut Operad, cell: TermId, zero: TermId| -> Result<TermId, CoendError> {
            let shape = op.info(cell).arity.clone();
            let q = op.fill(shape, vec![zero])?;
            Ok(op.gamma(cell, &q)?)
        };
        let (a, b) = match variant {
            Variant::Left => (apply_to(op, c_top, sigma)?, whisker(op, tau, b0)?),
            Variant::Right => (whisker(op, tau, a0)?, apply_to(op, d_top, sigma)?),
        };
        compose_pair(op, mu, a, b)
    };
    let top = extend_top(
        env,
        &SourceComplex::Standard,
        n,
        &t,
        &maps[1][0].clone(),
        &maps[1][1].clone(),
        &mut free,
    )?;
    maps[0].push(top);
    Ok(CoendCell {
        n,
        tree: t,
        source: SourceComplex::Standard,
        maps,
    })
}

/// The cell assigned to a generator of `C^0`: units to identities, compositions to composition cells.
pub fn cw_image(env: &mut CoendEnv, name: &str) -> Result<CoendCell, CoendError> {
    let bad = || CoendError::Operad(OperadError::UnknownGenerator(name.to_string()));
    if let Some(m) = name.strip_prefix('u') {
        return identity_cell(env, m.parse().map_err(|_| bad())?);
    }
    let inner = name
        .strip_prefix("mu(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let (m, p) = inner.split_once(',').ok_or_else(bad)?;
    let (m, p) = (
        m.trim().parse().map_err(|_| bad())?,
        p.trim().parse().map_err(|_| bad())?,
    );
    let variant = env.variant;
    make_mu(env, m, p, variant)
}

/// The level-1 cell over `t` out of the classifier complex sending `e` to `x`.
pub fn classifying_cell(env: &mut CoendEnv, t: &Tree, x: TermId) -> Result<CoendCell, CoendError> {
    if t.dim() != 1 {
        return Err(CoendError::DimensionMismatch(
            "classifying cells live over 1-trees".into(),
        ));
    }
    let (arity, s0, t0) = {
        let op = &env.tree_operad(t)?.operad;
        if op.dim(x) != 1 {
            return Err(CoendError::DimensionMismatch(
                "classified cells are 1-cells".into(),
            ));
        }
        (
            op.info(x).arity.matrix(),
            op.iterated_boundary(x, 0, Side::Source)?,
            op.iterated_boundary(x, 0, Side::Target)?,
        )
    };
    if s0 != t0 {
        return Err(CoendError::NotParallel(
            "the classified cell is not a loop on one 0-cell".into(),
        ));
    }
    let source = SourceComplex::Classifier { arity };
    let lower_op = env.source_operad(&SourceComplex::Standard, 0)?;
    let id0 = OperadMorphism::identity(lower_op);
    let mut free = |op: &mut Operad,
                    name: &str,
                    _: &OperadMorphism,
                    _: &Operad|
     -> Result<TermId, CoendError> {
        match name {
            "e0" => Ok(s0),
            "e" => Ok(x),
            _ => {
                let _ = op;
                Err(CoendError::TypingUnresolvable(format!(
                    "unexpected free generator {name}"
                )))
            }
        }
    };
    let top = extend_top(env, &source, 1, t, &id0, &id0, &mut free)?;
    Ok(CoendCell {
        n: 1,
        tree: t.clone(),
        source,
        maps: vec![vec![top], vec![id0.clone(), id0]],
    })
}

/// Fills a parallel pair of cells with a contraction cell one level up.
pub fn lift_contraction(
    env: &mut CoendEnv,
    minus: &CoendCell,
    plus: &CoendCell,
) -> Result<CoendCell, CoendError> {
    if minus.n != plus.n || minus.tree != plus.tree || minus.source != plus.source {
        return Err(CoendError::NotParallel(
            "cells differ in level, tree or source".into(),
        ));
    }
    if minus.maps[1..] != plus.maps[1..] {
        return Err(CoendError::NotParallel("lower levels differ".into()));
    }
    if minus.n == 0 {
        return Err(CoendError::DimensionMismatch(
            "lifting starts from level-1 cells".into(),
        ));
    }
    let n = minus.n + 1;
    let t = minus.tree.degenerate(n)?;
    let mut free = |op: &mut Operad,
                    name: &str,
                    partial: &OperadMorphism,
                    w: &Operad|
     -> Result<TermId, CoendError> {
        let g = w.base_gen(name).unwrap();
        let gi = w.gen(g).clone();
        let (Some(s), Some(tg)) = (gi.src, gi.tgt) else {
            return Err(CoendError::DimensionMismatch(format!(
                "{name} has no boundary to contract"
            )));
        };
        let x = apply_morphism(partial, w, op, s)?;
        let y = apply_morphism(partial, w, op, tg)?;
        match find_contraction(op, x, y) {
            Ok(Some(c)) => Ok(c),
            Ok(None) | Err(OperadError::NotEligible(_)) => Err(CoendError::ContractionUnavailable(
                format!("[{} | {}]", op.print(x), op.print(y)),
            )),
            Err(e) => Err(e.into()),
        }
    };
    let top = extend_top(
        env,
        &minus.source,
        n,
        &t,
        minus.top(),
        plus.top(),
        &mut free,
    )?;
    let mut maps = vec![vec![top], vec![minus.top().clone(), plus.top().clone()]];
    maps.extend(minus.maps[1..].iter().cloned());
    Ok(CoendCell {
        n,
        tree: t,
        source: minus.source.clone(),
        maps,
    })
}

/// Generator-image table of one map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapTable {
    pub colours: BTreeMap<String, String>,
    pub images: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoendCellJson {
    pub n: usize,
    pub tree: TreeMatrix,
    #[serde(default, skip_serializing_if = "is_standard")]
    pub source: SourceComplex,
    pub maps: Vec<Vec<MapTable>>,
}

fn is_standard(s: &SourceComplex) -> bool {
    *s == SourceComplex::Standard
}

pub fn cell_to_json(env: &mut CoendEnv, cell: &CoendCell) -> Result<CoendCellJson, CoendError> {
    let mut maps = Vec::new();
    for (k, row) in cell.maps.iter().enumerate() {
        let w = env.source_operad(&cell.source, cell.n - k)?.clone();
        let tgt = &env.tree_operad(&cell.tree_at(k))?.operad;
        maps.push(
            row.iter()
                .map(|m| MapTable {
                    colours: m.colour_names(&w, tgt),
                    images: m.table(&w, tgt),
                })
                .collect(),
        );
    }
    Ok(CoendCellJson {
        n: cell.n,
        tree: cell.tree.matrix(),
        source: cell.source.clone(),
        maps,
    })
}

pub fn cell_from_json(env: &mut CoendEnv, j: &CoendCellJson) -> Result<CoendCell, CoendError> {
    let tree = Tree::from_matrix(&j.tree)?;
    let cell = CoendCell {
        n: j.n,
        tree,
        source: j.source.clone(),
        maps: Vec::new(),
    };
    if j.maps.len() != j.n + 1 {
        return Err(CoendError::DimensionMismatch(format!(
            "{} map levels for level {}",
            j.maps.len(),
            j.n
        )));
    }
    let mut maps = Vec::new();
    for (k, row) in j.maps.iter().enumerate() {
        let w = env.source_operad(&cell.source, cell.n - k)?.clone();
        let s = cell.tree_at(k);
        let tgt = &mut env.tree_operad(&s)?.operad;
        maps.push(
            row.iter()
                .map(|m| OperadMorphism::from_table(&w, tgt, &m.colours, &m.images))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(CoendCell { maps, ..cell })
}
