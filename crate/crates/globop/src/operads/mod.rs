//! Presented coloured ω-operads: hash-consed normal-form terms, operadic
//! composition, boundaries, morphisms and pushouts.
//!
//! A term is either a unit or a node `Node(g, P)` whose generator `g` is applied
//! to a pasting `P` of terms shaped like the arity of `g`. A bare generator is the
//! node over the pasting of units. Terms built through [`Operad::gamma`] are
//! always in normal form, so equality of normal forms is equality of ids.

mod parse;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collections::{CollectionError, CollectionMorphism, PointedCollection, Pushout};
use crate::globular::Side;
use crate::pasting::{graft, Pasting, PastingError};
use crate::trees::{Tree, TreeError};

pub use parse::{RawPasting, RawTerm, TermJson};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperadError {
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("unknown colour {0}")]
    UnknownColour(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("term {0} has {1} well-typed readings")]
    Ambiguous(String, usize),
    #[error("no well-typed reading of {0}")]
    NoInterpretation(String),
    #[error("pair is not eligible: {0}")]
    NotEligible(String),
    #[error("out of bounds: {0}")]
    OutOfBounds(String),
    #[error("missing image for {0}")]
    MissingImage(String),
    #[error("cell budget exceeded at dim {dim} ({cells} cells)")]
    BudgetExceeded { dim: usize, cells: usize },
    #[error("no contraction available: {0}")]
    ContractionUnavailable(String),
    #[error("property {0} does not provide {1}")]
    Unsupported(Property, &'static str),
    #[error(transparent)]
    Pasting(#[from] PastingError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Collection(#[from] CollectionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenId(pub u32);

/// Which free construction a presentation realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Property {
    Id,
    IdU,
    C,
    S,
    SU,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Id,
        Property::IdU,
        Property::C,
        Property::S,
        Property::SU,
    ];

    /// Reflexive units are adjoined.
    pub fn has_units(self) -> bool {
        matches!(self, Property::IdU | Property::C | Property::SU)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Property::S | Property::SU)
    }

    pub fn is_contractible(self) -> bool {
        self == Property::C
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Id => "id",
            Property::IdU => "idu",
            Property::C => "c",
            Property::S => "s",
            Property::SU => "su",
        })
    }
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Property, String> {
        match s.to_ascii_lowercase().as_str() {
            "id" => Ok(Property::Id),
            "idu" | "id_u" => Ok(Property::IdU),
            "c" => Ok(Property::C),
            "s" => Ok(Property::S),
            "su" | "s_u" => Ok(Property::SU),
            other => Err(format!("unknown property {other}")),
        }
    }
}

/// The root/loop reading used for eligibility of root pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LoopMode {
    #[default]
    FourWay,
    TwoWay,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GenKind {
    /// Non-unit cell of the base collection, by index.
    Base(usize),
    /// Contraction cell with the given endpoints.
    Con(TermId, TermId),
    /// Reflexivity of the unit `u_p` lifted to dimension `n`.
    Refl { colour: usize, p: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermData {
    Unit { colour: usize, dim: usize },
    Node { gen: GenId, inner: Pasting<TermId> },
}

#[derive(Debug, Clone)]
pub struct GenInfo {
    pub kind: GenKind,
    pub dim: usize,
    pub arity: Tree,
    pub in_colour: usize,
    pub out_colour: usize,
    pub src: Option<TermId>,
    pub tgt: Option<TermId>,
    pub mask: u32,
}

#[derive(Debug, Clone)]
pub struct TermInfo {
    pub dim: usize,
    pub arity: Tree,
    pub in_colour: usize,
    pub out_colour: usize,
    pub src: Option<TermId>,
    pub tgt: Option<TermId>,
    pub width: usize,
    pub mask: u32,
}

/// A presented operad over a pointed collection.
#[derive(Debug, Clone)]
pub struct Operad {
    base: PointedCollection,
    property: Property,
    max_dim: usize,
    max_width: usize,
    pub(crate) loop_mode: LoopMode,
    pub(crate) budget: usize,
    colour_masks: Vec<u32>,
    gens: Vec<GenInfo>,
    gen_index: HashMap<GenKind, GenId>,
    base_gens: Vec<Option<GenId>>,
    terms: Vec<TermData>,
    infos: Vec<TermInfo>,
    term_index: HashMap<TermData, TermId>,
    pub(crate) cells: Option<Vec<Vec<TermId>>>,
    pub(crate) cell_set: HashSet<TermId>,
    pub(crate) classes: Option<Vec<u32>>,
}

impl Operad {
    /// An unmaterialized presentation; cells are admitted on demand.
    pub fn new(
        base: &PointedCollection,
        property: Property,
        max_dim: usize,
        max_width: usize,
    ) -> Operad {
        let colour_masks = base.colours().iter().map(|g| base.colour_mask(g)).collect();
        let mut op = Operad {
            base: base.clone(),
            property,
            max_dim,
            max_width,
            loop_mode: LoopMode::FourWay,
            budget: 2_000_000,
            colour_masks,
            gens: Vec::new(),
            gen_index: HashMap::new(),
            base_gens: vec![None; base.cells().len()],
            terms: Vec::new(),
            infos: Vec::new(),
            term_index: HashMap::new(),
            cells: None,
            cell_set: HashSet::new(),
            classes: None,
        };
        let mut order: Vec<usize> = (0..base.cells().len()).collect();
        order.sort_by_key(|&i| base.cells()[i].dim);
        for i in order {
            let c = &base.cells()[i];
            if c.dim > max_dim || base.is_unit(&c.name) {
                continue;
            }
            let in_colour = op
                .colour_index(&c.arity.colour)
                .expect("validated collection");
            let out_colour = op.colour_index(&c.colour).expect("validated collection");
            let (src, tgt) = match (&c.src, &c.tgt) {
                (Some(s), Some(t)) => (Some(op.cell_term(s)), Some(op.cell_term(t))),
                _ => (None, None),
            };
            let g = op.push_gen(GenInfo {
                kind: GenKind::Base(i),
                dim: c.dim,
                arity: c.arity.tree.clone(),
                in_colour,
                out_colour,
                src,
                tgt,
                mask: base.factor_mask(&c.name),
            });
            op.base_gens[i] = Some(g);
        }
        op
    }

    pub fn with_loop_mode(mut self, mode: LoopMode) -> Operad {
        self.loop_mode = mode;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Operad {
        self.budget = budget;
        self
    }

    pub fn base(&self) -> &PointedCollection {
        &self.base
    }

    pub fn property(&self) -> Property {
        self.property
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_width(&self) -> usize {
        self.max_width
    }

    pub fn loop_mode(&self) -> LoopMode {
        self.loop_mode
    }

    pub fn colours(&self) -> &[String] {
        self.base.colours()
    }

    pub fn colour_index(&self, name: &str) -> Option<usize> {
        self.base.colours().iter().position(|g| g == name)
    }

    pub fn colour_name(&self, i: usize) -> &str {
        &self.base.colours()[i]
    }

    fn push_gen(&mut self, info: GenInfo) -> GenId {
        let id = GenId(self.gens.len() as u32);
        self.gen_index.insert(info.kind.clone(), id);
        self.gens.push(info);
        id
    }

    /// The term for a base cell: a unit or a bare generator.
    fn cell_term(&mut self, name: &str) -> TermId {
        if let Some((g, m)) = self.base.unit_key(name) {
            let colour = self.colour_index(&g).unwrap();
            return self.unit(colour, m);
        }
        let i = self
            .base
            .cells()
            .iter()
            .position(|c| c.name == name)
            .expect("boundary exists");
        let g = self.base_gens[i].expect("boundaries are registered first");
        self.gen_term(g)
    }

    pub fn gen(&self, g: GenId) -> &GenInfo {
        &self.gens[g.0 as usize]
    }

    pub fn gens(&self) -> impl Iterator<Item = (GenId, &GenInfo)> {
        self.gens
            .iter()
            .enumerate()
            .map(|(i, g)| (GenId(i as u32), g))
    }

    pub fn gen_count(&self) -> usize {
        self.gens.len()
    }

    pub fn find_gen(&self, kind: &GenKind) -> Option<GenId> {
        self.gen_index.get(kind).copied()
    }

    /// Generator of the base cell with this exact name.
    pub fn base_gen(&self, name: &str) -> Option<GenId> {
        let i = self.base.cells().iter().position(|c| c.name == name)?;
        self.base_gens[i]
    }

    pub fn base_gen_ids(&self) -> impl Iterator<Item = GenId> + '_ {
        self.base_gens.iter().flatten().copied()
    }

    pub fn data(&self, t: TermId) -> &TermData {
        &self.terms[t.0 as usize]
    }

    pub fn info(&self, t: TermId) -> &TermInfo {
        &self.infos[t.0 as usize]
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn dim(&self, t: TermId) -> usize {
        self.info(t).dim
    }

    pub fn width(&self, t: TermId) -> usize {
        self.info(t).width
    }

    pub fn mask(&self, t: TermId) -> u32 {
        self.info(t).mask
    }

    /// Arity as (tree, source colour name).
    pub fn term_arity(&self, t: TermId) -> (Tree, String) {
        let i = self.info(t);
        (i.arity.clone(), self.colour_name(i.in_colour).to_string())
    }

    pub fn out_colour(&self, t: TermId) -> &str {
        self.colour_name(self.info(t).out_colour)
    }

    pub fn term_boundary(&self, t: TermId, side: Side) -> Result<TermId, OperadError> {
        let i = self.info(t);
        match side {
            Side::Source => i.src,
            Side::Target => i.tgt,
        }
        .ok_or_else(|| {
            OperadError::DimensionMismatch("0-dimensional terms have no boundary".into())
        })
    }

    /// Boundary at level `k` on one side.
    pub fn iterated_boundary(
        &self,
        t: TermId,
        k: usize,
        side: Side,
    ) -> Result<TermId, OperadError> {
        let mut cur = t;
        if k > self.dim(t) {
            return Err(OperadError::DimensionMismatch(format!(
                "level {k} above dim {}",
                self.dim(t)
            )));
        }
        while self.dim(cur) > k {
            cur = self.term_boundary(cur, side)?;
        }
        Ok(cur)
    }

    pub fn is_parallel(&self, x: TermId, y: TermId) -> bool {
        let (a, b) = (self.info(x), self.info(y));
        a.dim == b.dim && a.dim >= 1 && a.src == b.src && a.tgt == b.tgt
    }

    pub fn is_unit(&self, t: TermId) -> bool {
        matches!(self.data(t), TermData::Unit { .. })
    }

    /// The generator of a bare-generator term.
    pub fn as_bare(&self, t: TermId) -> Option<GenId> {
        match self.data(t) {
            TermData::Node { gen, inner } if inner.labels.iter().all(|&l| self.is_unit(l)) => {
                Some(*gen)
            }
            _ => None,
        }
    }

    pub fn unit(&mut self, colour: usize, dim: usize) -> TermId {
        self.intern(TermData::Unit { colour, dim })
            .expect("units are well typed")
    }

    fn unit_pasting(&mut self, shape: &Tree, colour: usize) -> Pasting<TermId> {
        let sc = shape.scheme();
        let labels = sc.cells.iter().map(|c| self.unit(colour, c.dim)).collect();
        Pasting {
            shape: shape.clone(),
            labels,
        }
    }

    /// The bare term of a generator.
    pub fn gen_term(&mut self, g: GenId) -> TermId {
        let info = self.gen(g).clone();
        let inner = self.unit_pasting(&info.arity, info.in_colour);
        self.intern(TermData::Node { gen: g, inner })
            .expect("bare generators are well typed")
    }

    fn boundary_fn(&self) -> impl Fn(&TermId, Side) -> Result<TermId, OperadError> + '_ {
        move |t: &TermId, side| self.term_boundary(*t, side)
    }

    /// Interns a term, computing and checking its typing data.
    pub fn intern(&mut self, data: TermData) -> Result<TermId, OperadError> {
        if let Some(&t) = self.term_index.get(&data) {
            return Ok(t);
        }
        let info = match &data {
            TermData::Unit { colour, dim } => {
                let (colour, dim) = (*colour, *dim);
                if colour >= self.colours().len() {
                    return Err(OperadError::UnknownColour(colour.to_string()));
                }
                let bd = if dim == 0 {
                    None
                } else {
                    Some(self.unit(colour, dim - 1))
                };
                TermInfo {
                    dim,
                    arity: Tree::linear(dim),
                    in_colour: colour,
                    out_colour: colour,
                    src: bd,
                    tgt: bd,
                    width: 1,
                    mask: self.colour_masks[colour],
                }
            }
            TermData::Node { gen, inner } => {
                let g = self.gen(*gen).clone();
                if inner.shape != g.arity {
                    return Err(OperadError::ArityMismatch(format!(
                        "pasting shape {} but generator arity {}",
                        inner.shape, g.arity
                    )));
                }
                let sc = inner.scheme();
                if inner.labels.len() != sc.len() {
                    return Err(PastingError::LabelCount {
                        expected: sc.len(),
                        found: inner.labels.len(),
                    }
                    .into());
                }
                for (c, &l) in sc.cells.iter().zip(&inner.labels) {
                    let li = self.info(l);
                    if li.dim != c.dim {
                        return Err(OperadError::DimensionMismatch(format!(
                            "label of dim {} at a {}-cell",
                            li.dim, c.dim
                        )));
                    }
                    if li.out_colour != g.in_colour {
                        return Err(OperadError::ArityMismatch(format!(
                            "label colour {} but generator expects {}",
                            self.colour_name(li.out_colour),
                            self.colour_name(g.in_colour)
                        )));
                    }
                    if let (Some(s), Some(t)) = (c.src, c.tgt) {
                        if li.src != Some(inner.labels[s]) || li.tgt != Some(inner.labels[t]) {
                            return Err(OperadError::BoundaryMismatch(
                                "adjacent labels do not share their shell".into(),
                            ));
                        }
                    }
                }
                let leaves: Vec<TermId> = sc.leaf_cells.iter().map(|&c| inner.labels[c]).collect();
                let in_colour = self.info(leaves[0]).in_colour;
                if leaves.iter().any(|&l| self.info(l).in_colour != in_colour) {
                    return Err(OperadError::ArityMismatch(
                        "labels disagree on source colour".into(),
                    ));
                }
                let shapes: Vec<Tree> =
                    leaves.iter().map(|&l| self.info(l).arity.clone()).collect();
                let arity = graft(&g.arity, &shapes)?.tree;
                let width = leaves.iter().map(|&l| self.info(l).width).sum();
                let mask = leaves.iter().fold(g.mask, |m, &l| m & self.info(l).mask);
                let (src, tgt) = if g.dim == 0 {
                    (None, None)
                } else {
                    let mut bds = [None, None];
                    for (k, side) in [Side::Source, Side::Target].into_iter().enumerate() {
                        let outer = match side {
                            Side::Source => g.src,
                            Side::Target => g.tgt,
                        }
                        .expect("generators of positive dim have boundaries");
                        let q = inner.boundary(g.dim - 1, side)?;
                        bds[k] = Some(self.gamma(outer, &q)?);
                    }
                    (bds[0], bds[1])
                };
                TermInfo {
                    dim: g.dim,
                    arity,
                    in_colour,
                    out_colour: g.out_colour,
                    src,
                    tgt,
                    width,
                    mask,
                }
            }
        };
        if let Some(&t) = self.term_index.get(&data) {
            return Ok(t);
        }
        let id = TermId(self.terms.len() as u32);
        self.term_index.insert(data.clone(), id);
        self.terms.push(data);
        self.infos.push(info);
        Ok(id)
    }

    /// Operadic composition: substitutes the pasting `q` into the term `outer`.
    pub fn gamma(&mut self, outer: TermId, q: &Pasting<TermId>) -> Result<TermId, OperadError> {
        let oi = self.info(outer).clone();
        if q.shape != oi.arity {
            return Err(OperadError::ArityMismatch(format!(
                "pasting shape {} but arity {}",
                q.shape, oi.arity
            )));
        }
        let sc = q.scheme();
        if q.labels.len() != sc.len() {
            return Err(PastingError::LabelCount {
                expected: sc.len(),
                found: q.labels.len(),
            }
            .into());
        }
        for (c, &l) in sc.cells.iter().zip(&q.labels) {
            let li = self.info(l);
            if li.dim != c.dim || li.out_colour != oi.in_colour {
                return Err(OperadError::ArityMismatch(format!(
                    "label {} does not fit a {}-cell of colour {}",
                    self.print(l),
                    c.dim,
                    self.colour_name(oi.in_colour)
                )));
            }
        }
        match self.data(outer).clone() {
            TermData::Unit { .. } => Ok(*q.labels.last().expect("linear shapes have a top cell")),
            TermData::Node { gen, inner } => {
                let isc = inner.scheme();
                let leaves: Vec<TermId> = isc.leaf_cells.iter().map(|&c| inner.labels[c]).collect();
                let shapes: Vec<Tree> =
                    leaves.iter().map(|&l| self.info(l).arity.clone()).collect();
                let g = graft(&inner.shape, &shapes)?;
                let mut new_leaves = Vec::with_capacity(leaves.len());
                for (j, &t) in leaves.iter().enumerate() {
                    let qj = Pasting {
                        shape: shapes[j].clone(),
                        labels: g.embeddings[j].iter().map(|&c| q.labels[c]).collect(),
                    };
                    new_leaves.push(self.gamma(t, &qj)?);
                }
                let filled = Pasting::fill(inner.shape.clone(), new_leaves, self.boundary_fn())?;
                self.intern(TermData::Node { gen, inner: filled })
            }
        }
    }

    /// The pasting of `t` alone: shape `1(dim t)` with its iterated boundaries.
    pub fn eta(&self, t: TermId) -> Pasting<TermId> {
        Pasting::eta_with(t, self.dim(t), self.boundary_fn()).expect("terms have all boundaries")
    }

    /// Builds a pasting from leaf labels, checking shells.
    pub fn fill(&self, shape: Tree, leaves: Vec<TermId>) -> Result<Pasting<TermId>, OperadError> {
        Pasting::fill(shape, leaves, self.boundary_fn())
    }

    /// Composite of two pastings along level `p`.
    pub fn star(
        &self,
        a: &Pasting<TermId>,
        b: &Pasting<TermId>,
        p: usize,
    ) -> Result<Pasting<TermId>, OperadError> {
        if a.dim() != b.dim() {
            return Err(OperadError::DimensionMismatch(format!(
                "star of dims {} and {}",
                a.dim(),
                b.dim()
            )));
        }
        Ok(a.star(b, p)?)
    }

    /// Contraction generator `[x | y]`, created if the pair is eligible.
    pub fn contraction_gen(&mut self, x: TermId, y: TermId) -> Result<GenId, OperadError> {
        if let Some(g) = self.find_gen(&GenKind::Con(x, y)) {
            return Ok(g);
        }
        if !self.property.is_contractible() {
            return Err(OperadError::Unsupported(self.property, "contraction cells"));
        }
        let pc = crate::contraction::classify(self, x, y)?;
        if !pc.eligible {
            return Err(OperadError::NotEligible(format!(
                "[{} | {}]",
                self.print(x),
                self.print(y)
            )));
        }
        let (xi, yi) = (self.info(x).clone(), self.info(y).clone());
        if xi.mask & yi.mask == 0 {
            return Err(OperadError::NotEligible(format!(
                "[{} | {}] spans several factors",
                self.print(x),
                self.print(y)
            )));
        }
        Ok(self.push_gen(GenInfo {
            kind: GenKind::Con(x, y),
            dim: xi.dim + 1,
            arity: xi.arity.degenerate(xi.dim + 1)?,
            in_colour: xi.in_colour,
            out_colour: xi.out_colour,
            src: Some(x),
            tgt: Some(y),
            mask: xi.mask & yi.mask,
        }))
    }

    /// Reflexivity generator on the unit `u_p` of a colour in dimension `n`.
    pub fn refl_gen(&mut self, colour: usize, p: usize, n: usize) -> Result<GenId, OperadError> {
        if let Some(g) = self.find_gen(&GenKind::Refl { colour, p, n }) {
            return Ok(g);
        }
        if !self.property.has_units() {
            return Err(OperadError::Unsupported(self.property, "reflexive units"));
        }
        if p >= n {
            return Err(OperadError::DimensionMismatch(format!(
                "reflexivity from {p} to {n}"
            )));
        }
        let bd = if n - 1 == p {
            self.unit(colour, p)
        } else {
            let g = self.refl_gen(colour, p, n - 1)?;
            self.gen_term(g)
        };
        Ok(self.push_gen(GenInfo {
            kind: GenKind::Refl { colour, p, n },
            dim: n,
            arity: Tree::linear(p).degenerate(n)?,
            in_colour: colour,
            out_colour: colour,
            src: Some(bd),
            tgt: Some(bd),
            mask: self.colour_masks[colour],
        }))
    }

    /// Identity-like `(k+1)`-cell on a `k`-cell, through the reflexive units.
    pub fn reflexivity_cell(&mut self, x: TermId) -> Result<TermId, OperadError> {
        let xi = self.info(x).clone();
        let r = self.refl_gen(xi.out_colour, xi.dim, xi.dim + 1)?;
        let r = self.gen_term(r);
        let q = self.eta(x).degenerate(xi.dim + 1)?;
        self.gamma(r, &q)
    }

    /// Whether a term lies in the presentation: bounds and generator admissibility.
    pub fn admit(&self, t: TermId) -> Result<(), OperadError> {
        let i = self.info(t);
        if i.dim > self.max_dim {
            return Err(OperadError::OutOfBounds(format!(
                "dim {} > {}",
                i.dim, self.max_dim
            )));
        }
        if i.width > self.max_width {
            return Err(OperadError::OutOfBounds(format!(
                "width {} > {}",
                i.width, self.max_width
            )));
        }
        if let TermData::Node { gen, inner } = self.data(t) {
            match &self.gen(*gen).kind {
                GenKind::Base(_) => {}
                GenKind::Refl { .. } if self.property.has_units() => {}
                GenKind::Con(x, y) if self.property.is_contractible() => {
                    self.admit(*x)?;
                    self.admit(*y)?;
                }
                _ => return Err(OperadError::Unsupported(self.property, "this generator")),
            }
            for &l in &inner.labels {
                self.admit(l)?;
            }
        }
        Ok(())
    }

    pub fn is_materialized(&self) -> bool {
        self.cells.is_some()
    }

    /// Stored cells of a dimension (empty before materialization).
    pub fn cells(&self, dim: usize) -> &[TermId] {
        self.cells
            .as_ref()
            .and_then(|c| c.get(dim))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        (0..=self.max_dim).map(|d| self.cells(d).len()).collect()
    }

    /// Membership: stored cell, or an admitted term when the dimension is kept lazily.
    pub fn contains(&self, t: TermId) -> bool {
        if self.cell_set.contains(&t) {
            return true;
        }
        let lazy = !self.is_materialized()
            || (self.property.is_contractible() && self.dim(t) == self.max_dim);
        lazy && self.admit(t).is_ok()
    }

    /// Drops a stored cell; used to exercise audits.
    pub fn remove_cell(&mut self, t: TermId) -> bool {
        if !self.cell_set.remove(&t) {
            return false;
        }
        if let Some(cells) = &mut self.cells {
            for v in cells.iter_mut() {
                v.retain(|&c| c != t);
            }
        }
        true
    }

    /// Congruence class representative (identity outside strict presentations).
    pub fn class_of(&self, t: TermId) -> TermId {
        match &self.classes {
            Some(parent) if (t.0 as usize) < parent.len() => {
                let mut x = t.0;
                while parent[x as usize] != x {
                    x = parent[x as usize];
                }
                TermId(x)
            }
            _ => t,
        }
    }

    /// Equality of normal forms, up to the congruence for strict presentations.
    pub fn equal_terms(&self, a: TermId, b: TermId) -> Result<bool, OperadError> {
        if a == b {
            return Ok(true);
        }
        for t in [a, b] {
            self.admit(t)?;
        }
        if self.property.is_strict() {
            if self.classes.is_none() {
                return Err(OperadError::OutOfBounds(
                    "strict presentation is not materialized".into(),
                ));
            }
            for t in [a, b] {
                if !self.cell_set.contains(&t) {
                    return Err(OperadError::OutOfBounds(format!(
                        "{} is not a stored cell",
                        self.print(t)
                    )));
                }
            }
            return Ok(self.class_of(a) == self.class_of(b));
        }
        Ok(false)
    }

    /// Display name of a generator.
    pub fn gen_name(&self, g: GenId) -> String {
        match &self.gen(g).kind {
            GenKind::Base(i) => self.base.cells()[*i].name.clone(),
            GenKind::Con(x, y) => format!("[{} | {}]", self.print(*x), self.print(*y)),
            GenKind::Refl { colour, p, n } => {
                format!("r[{p},{n}]({})", self.unit_name(*colour, *p))
            }
        }
    }

    pub fn unit_name(&self, colour: usize, dim: usize) -> String {
        match self.base.unit(self.colour_name(colour), dim) {
            Some(n) => n.to_string(),
            None => format!("u@{}({dim})", self.colour_name(colour)),
        }
    }
}

/// A morphism of presented operads, given on base generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperadMorphism {
    pub colour_map: Vec<usize>,
    pub images: BTreeMap<GenId, TermId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    MissingImage {
        generator: String,
    },
    ArityMismatch {
        generator: String,
        expected: String,
        found: String,
    },
    ColourMismatch {
        generator: String,
        expected: String,
        found: String,
    },
    BoundaryMismatch {
        generator: String,
        side: Side,
        expected: String,
        found: String,
    },
    ContractionMissing {
        generator: String,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingImage { generator } => write!(f, "{generator}: no image"),
            Violation::ArityMismatch {
                generator,
                expected,
                found,
            } => {
                write!(f, "{generator}: arity {found}, expected {expected}")
            }
            Violation::ColourMismatch {
                generator,
                expected,
                found,
            } => {
                write!(f, "{generator}: colour {found}, expected {expected}")
            }
            Violation::BoundaryMismatch {
                generator,
                side,
                expected,
                found,
            } => {
                write!(f, "{generator}: {side:?} {found}, expected {expected}")
            }
            Violation::ContractionMissing { generator, reason } => {
                write!(f, "{generator}: {reason}")
            }
        }
    }
}

impl OperadMorphism {
    /// The identity on an operad; its images are interned in `op`, so clone afterwards for a target.
    pub fn identity(op: &mut Operad) -> OperadMorphism {
        let ids: Vec<GenId> = op.base_gen_ids().collect();
        let images = ids.into_iter().map(|g| (g, op.gen_term(g))).collect();
        OperadMorphism {
            colour_map: (0..op.colours().len()).collect(),
            images,
        }
    }

    /// Induced by a map of base collections sending generators to generators or units.
    pub fn from_collection_map(
        src: &Operad,
        tgt: &mut Operad,
        m: &CollectionMorphism,
    ) -> Result<OperadMorphism, OperadError> {
        let colour_map = src
            .colours()
            .iter()
            .map(|g| {
                let h = m
                    .colour(g)
                    .ok_or_else(|| OperadError::UnknownColour(g.clone()))?;
                tgt.colour_index(h)
                    .ok_or_else(|| OperadError::UnknownColour(h.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut images = BTreeMap::new();
        for g in src.base_gen_ids().collect::<Vec<_>>() {
            let name = src.gen_name(g);
            let img = m
                .apply(&name)
                .ok_or_else(|| OperadError::MissingImage(name.clone()))?;
            let t = if let Some((c, d)) = tgt.base.unit_key(img) {
                let c = tgt.colour_index(&c).unwrap();
                tgt.unit(c, d)
            } else {
                let h = tgt
                    .base_gen(img)
                    .ok_or_else(|| OperadError::UnknownGenerator(img.to_string()))?;
                tgt.gen_term(h)
            };
            images.insert(g, t);
        }
        Ok(OperadMorphism { colour_map, images })
    }

    /// Images keyed by generator name, printed in the target.
    pub fn table(&self, src: &Operad, tgt: &Operad) -> BTreeMap<String, String> {
        self.images
            .iter()
            .map(|(&g, &t)| (src.gen_name(g), tgt.print(t)))
            .collect()
    }

    /// Inverse of [`OperadMorphism::table`].
    pub fn from_table(
        src: &Operad,
        tgt: &mut Operad,
        colours: &BTreeMap<String, String>,
        table: &BTreeMap<String, String>,
    ) -> Result<OperadMorphism, OperadError> {
        let colour_map = src
            .colours()
            .iter()
            .map(|g| {
                let h = colours
                    .get(g)
                    .ok_or_else(|| OperadError::UnknownColour(g.clone()))?;
                tgt.colour_index(h)
                    .ok_or_else(|| OperadError::UnknownColour(h.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut images = BTreeMap::new();
        for (name, text) in table {
            let g = src
                .base_gen(name)
                .ok_or_else(|| OperadError::UnknownGenerator(name.clone()))?;
            let expected = src.gen(g);
            let out = colour_map[expected.out_colour];
            let t = tgt.parse_typed(text, Some(out))?;
            images.insert(g, t);
        }
        Ok(OperadMorphism { colour_map, images })
    }

    pub fn colour_names(&self, src: &Operad, tgt: &Operad) -> BTreeMap<String, String> {
        self.colour_map
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                (
                    src.colour_name(i).to_string(),
                    tgt.colour_name(j).to_string(),
                )
            })
            .collect()
    }
}

/// Extends a morphism freely to a term.
pub fn apply_morphism(
    m: &OperadMorphism,
    src: &Operad,
    tgt: &mut Operad,
    t: TermId,
) -> Result<TermId, OperadError> {
    let mut memo = HashMap::new();
    apply_rec(m, src, tgt, t, &mut memo)
}

fn apply_rec(
    m: &OperadMorphism,
    src: &Operad,
    tgt: &mut Operad,
    t: TermId,
    memo: &mut HashMap<TermId, TermId>,
) -> Result<TermId, OperadError> {
    if let Some(&r) = memo.get(&t) {
        return Ok(r);
    }
    let r = match src.data(t) {
        TermData::Unit { colour, dim } => {
            let c = m.colour_map[*colour];
            tgt.unit(c, *dim)
        }
        TermData::Node { gen, inner } => {
            let outer = match &src.gen(*gen).kind {
                GenKind::Base(_) => *m
                    .images
                    .get(gen)
                    .ok_or_else(|| OperadError::MissingImage(src.gen_name(*gen)))?,
                GenKind::Refl { colour, p, n } => {
                    let g = tgt.refl_gen(m.colour_map[*colour], *p, *n)?;
                    tgt.gen_term(g)
                }
                GenKind::Con(x, y) => {
                    let (x, y) = (*x, *y);
                    let fx = apply_rec(m, src, tgt, x, memo)?;
                    let fy = apply_rec(m, src, tgt, y, memo)?;
                    let c = crate::contraction::find_contraction(tgt, fx, fy)?;
                    c.ok_or_else(|| {
                        OperadError::ContractionUnavailable(format!(
                            "[{} | {}]",
                            tgt.print(fx),
                            tgt.print(fy)
                        ))
                    })?
                }
            };
            let q = inner
                .clone()
                .try_map(|&l| apply_rec(m, src, tgt, l, memo))?;
            tgt.gamma(outer, &q)?
        }
    };
    memo.insert(t, r);
    Ok(r)
}

/// Generator-wise check of arity, colour and boundary compatibility.
pub fn check_morphism(m: &OperadMorphism, src: &Operad, tgt: &mut Operad) -> Vec<Violation> {
    let mut out = Vec::new();
    for g in src.base_gen_ids().collect::<Vec<_>>() {
        let name = src.gen_name(g);
        let gi = src.gen(g).clone();
        let Some(&img) = m.images.get(&g) else {
            out.push(Violation::MissingImage { generator: name });
            continue;
        };
        let ii = tgt.info(img).clone();
        let expected_arity = format!(
            "{} in {}",
            gi.arity,
            tgt.colour_name(m.colour_map[gi.in_colour])
        );
        let found_arity = format!("{} in {}", ii.arity, tgt.colour_name(ii.in_colour));
        if expected_arity != found_arity {
            out.push(Violation::ArityMismatch {
                generator: name.clone(),
                expected: expected_arity,
                found: found_arity,
            });
            continue;
        }
        if m.colour_map[gi.out_colour] != ii.out_colour {
            out.push(Violation::ColourMismatch {
                generator: name.clone(),
                expected: tgt.colour_name(m.colour_map[gi.out_colour]).to_string(),
                found: tgt.colour_name(ii.out_colour).to_string(),
            });
            continue;
        }
        for (side, b, ib) in [
            (Side::Source, gi.src, ii.src),
            (Side::Target, gi.tgt, ii.tgt),
        ] {
            let Some(b) = b else { continue };
            match apply_morphism(m, src, tgt, b) {
                Ok(fb) if Some(fb) == ib => {}
                Ok(fb) => out.push(Violation::BoundaryMismatch {
                    generator: name.clone(),
                    side,
                    expected: tgt.print(fb),
                    found: ib.map(|t| tgt.print(t)).unwrap_or_default(),
                }),
                Err(e) => out.push(Violation::MissingImage {
                    generator: format!("{name} boundary: {e}"),
                }),
            }
        }
    }
    out
}

/// Additionally checks that the stored contraction cells of `src` have images.
pub fn check_contractions(m: &OperadMorphism, src: &Operad, tgt: &mut Operad) -> Vec<Violation> {
    let mut out = Vec::new();
    for (g, gi) in src.gens() {
        if let GenKind::Con(x, y) = gi.kind {
            let name = src.gen_name(g);
            let r = apply_morphism(m, src, tgt, x).and_then(|fx| {
                let fy = apply_morphism(m, src, tgt, y)?;
                let c = crate::contraction::find_contraction(tgt, fx, fy)?;
                match c {
                    Some(c) if tgt.info(c).src == Some(fx) && tgt.info(c).tgt == Some(fy) => Ok(()),
                    Some(_) => Err(OperadError::BoundaryMismatch(
                        "contraction endpoints differ".into(),
                    )),
                    None => Err(OperadError::ContractionUnavailable(name.clone())),
                }
            });
            if let Err(e) = r {
                out.push(Violation::ContractionMissing {
                    generator: name,
                    reason: e.to_string(),
                });
            }
        }
    }
    out
}

/// Operad pushout together with its two injections.
#[derive(Debug, Clone)]
pub struct OperadPushout {
    pub operad: Operad,
    pub left: OperadMorphism,
    pub right: OperadMorphism,
}

/// Presentation over the pushed-out base; contraction cells stay within one factor.
pub fn operad_over_pushout(
    po: &Pushout,
    property: Property,
    max_dim: usize,
    max_width: usize,
) -> Operad {
    Operad::new(&po.collection, property, max_dim, max_width)
}

/// Pushout of `B ← A → B'` given by maps of base collections.
pub fn pushout_operads(
    a: &Operad,
    b: &Operad,
    f: &CollectionMorphism,
    b2: &Operad,
    g: &CollectionMorphism,
) -> Result<OperadPushout, OperadError> {
    let po = crate::collections::pushout_collections(a.base(), b.base(), f, b2.base(), g)?;
    let mut operad = operad_over_pushout(
        &po,
        b.property(),
        b.max_dim().min(b2.max_dim()),
        b.max_width().min(b2.max_width()),
    )
    .with_loop_mode(b.loop_mode());
    let left = OperadMorphism::from_collection_map(b, &mut operad, &po.injections[0])?;
    let right = OperadMorphism::from_collection_map(b2, &mut operad, &po.injections[1])?;
    Ok(OperadPushout {
        operad,
        left,
        right,
    })
}

#[cfg(test)]
mod tests;
