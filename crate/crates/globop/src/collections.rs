//! Coloured collections over constant colour sets, pointings, the complex of
//! higher-transformation collections with its cofaces, tensor, unit and pushouts.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::globular::{validate_globular_set, GCell, GlobularSet, RawGlobularSet, Side};
use crate::pasting::{graft, labelings, Pasting};
use crate::trees::Tree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CollectionError {
    #[error("duplicate cell {0}")]
    DuplicateCell(String),
    #[error("unknown cell {0}")]
    UnknownCell(String),
    #[error("unknown colour {0}")]
    UnknownColour(String),
    #[error("cell {0} is not globular")]
    NotGlobular(String),
    #[error("arity of {0} does not restrict to the arity of its boundary")]
    ArityBoundary(String),
    #[error("missing or malformed unit for colour {colour} at dim {dim}")]
    BadUnit { colour: String, dim: usize },
    #[error("morphism violation at {cell}: {reason}")]
    Morphism { cell: String, reason: String },
    #[error("gluing mismatch: {0}")]
    GluingMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arity {
    pub tree: Tree,
    pub colour: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionCell {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt: Option<String>,
    pub arity: Arity,
    pub colour: String,
}

impl CollectionCell {
    fn new(
        name: &str,
        dim: usize,
        bd: Option<(&str, &str)>,
        tree: Tree,
        in_colour: &str,
        colour: &str,
    ) -> Self {
        CollectionCell {
            name: name.to_string(),
            dim,
            src: bd.map(|b| b.0.to_string()),
            tgt: bd.map(|b| b.1.to_string()),
            arity: Arity {
                tree,
                colour: in_colour.to_string(),
            },
            colour: colour.to_string(),
        }
    }
}

/// Exchange form of a pointed collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCollection {
    pub colours: Vec<String>,
    pub max_dim: usize,
    pub cells: Vec<CollectionCell>,
    pub units: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub factors: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub colour_factors: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedCollection {
    raw: RawCollection,
    index: HashMap<String, usize>,
}

impl PointedCollection {
    pub fn validate(raw: RawCollection) -> Result<PointedCollection, CollectionError> {
        let mut index = HashMap::new();
        for (i, c) in raw.cells.iter().enumerate() {
            if index.insert(c.name.clone(), i).is_some() {
                return Err(CollectionError::DuplicateCell(c.name.clone()));
            }
        }
        let pc = PointedCollection { raw, index };
        for c in &pc.raw.cells {
            for g in [&c.colour, &c.arity.colour] {
                if !pc.raw.colours.contains(g) {
                    return Err(CollectionError::UnknownColour(g.clone()));
                }
            }
            if c.arity.tree.dim() != c.dim {
                return Err(CollectionError::NotGlobular(c.name.clone()));
            }
            match (&c.src, &c.tgt) {
                (None, None) if c.dim == 0 => {}
                (Some(s), Some(t)) if c.dim > 0 => {
                    let lower = c.arity.tree.truncate(1).expect("dim >= 1");
                    for b in [s, t] {
                        let bc = pc
                            .cell(b)
                            .ok_or_else(|| CollectionError::UnknownCell(b.clone()))?;
                        if bc.dim + 1 != c.dim || bc.colour != c.colour {
                            return Err(CollectionError::NotGlobular(c.name.clone()));
                        }
                        if bc.arity.tree != lower || bc.arity.colour != c.arity.colour {
                            return Err(CollectionError::ArityBoundary(c.name.clone()));
                        }
                    }
                    if c.dim >= 2 {
                        let (sc, tc) = (pc.cell(s).unwrap(), pc.cell(t).unwrap());
                        if sc.src != tc.src || sc.tgt != tc.tgt {
                            return Err(CollectionError::NotGlobular(c.name.clone()));
                        }
                    }
                }
                _ => return Err(CollectionError::NotGlobular(c.name.clone())),
            }
        }
        for g in &pc.raw.colours {
            let us = pc.raw.units.get(g).ok_or(CollectionError::BadUnit {
                colour: g.clone(),
                dim: 0,
            })?;
            if us.len() != pc.raw.max_dim + 1 {
                return Err(CollectionError::BadUnit {
                    colour: g.clone(),
                    dim: us.len(),
                });
            }
            for (m, u) in us.iter().enumerate() {
                let bad = CollectionError::BadUnit {
                    colour: g.clone(),
                    dim: m,
                };
                let c = pc.cell(u).ok_or(bad.clone())?;
                let ok = c.dim == m
                    && c.colour == *g
                    && c.arity
                        == Arity {
                            tree: Tree::linear(m),
                            colour: g.clone(),
                        }
                    && (m == 0
                        || (c.src.as_ref() == Some(&us[m - 1])
                            && c.tgt.as_ref() == Some(&us[m - 1])));
                if !ok {
                    return Err(bad);
                }
            }
        }
        if let Some(p) = &pc.raw.principal {
            pc.cell(p)
                .ok_or_else(|| CollectionError::UnknownCell(p.clone()))?;
        }
        Ok(pc)
    }

    pub fn raw(&self) -> &RawCollection {
        &self.raw
    }

    pub fn colours(&self) -> &[String] {
        &self.raw.colours
    }

    pub fn max_dim(&self) -> usize {
        self.raw.max_dim
    }

    pub fn cells(&self) -> &[CollectionCell] {
        &self.raw.cells
    }

    pub fn cell(&self, name: &str) -> Option<&CollectionCell> {
        self.index.get(name).map(|&i| &self.raw.cells[i])
    }

    pub fn cells_of_dim(&self, dim: usize) -> impl Iterator<Item = &CollectionCell> {
        self.raw.cells.iter().filter(move |c| c.dim == dim)
    }

    pub fn unit(&self, colour: &str, dim: usize) -> Option<&str> {
        self.raw
            .units
            .get(colour)
            .and_then(|v| v.get(dim))
            .map(String::as_str)
    }

    pub fn is_unit(&self, name: &str) -> bool {
        self.raw.units.values().any(|v| v.iter().any(|u| u == name))
    }

    /// Unit cells of this collection as (colour, dim) pairs.
    pub fn unit_key(&self, name: &str) -> Option<(String, usize)> {
        self.raw
            .units
            .iter()
            .find_map(|(g, v)| v.iter().position(|u| u == name).map(|m| (g.clone(), m)))
    }

    pub fn principal(&self) -> Option<&str> {
        self.raw.principal.as_deref()
    }

    pub fn factor_mask(&self, name: &str) -> u32 {
        self.raw.factors.get(name).copied().unwrap_or(1)
    }

    pub fn colour_mask(&self, colour: &str) -> u32 {
        self.raw.colour_factors.get(colour).copied().unwrap_or(1)
    }

    pub fn factor_count(&self) -> usize {
        let all = self.raw.factors.values().fold(1u32, |a, &b| a | b);
        32 - all.leading_zeros() as usize
    }

    /// Non-unit cells, the generators of the free operad.
    pub fn generators(&self) -> impl Iterator<Item = &CollectionCell> {
        self.raw
            .cells
            .iter()
            .filter(move |c| !self.is_unit(&c.name))
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.raw.max_dim + 1];
        for c in &self.raw.cells {
            out[c.dim] += 1;
        }
        out
    }

    /// Underlying globular set of cell names.
    pub fn globular(&self) -> GlobularSet {
        let cells = self
            .raw
            .cells
            .iter()
            .map(|c| GCell {
                id: c.name.clone(),
                dim: c.dim,
                src: c.src.clone(),
                tgt: c.tgt.clone(),
            })
            .collect();
        validate_globular_set(RawGlobularSet {
            max_dim: self.raw.max_dim,
            cells,
        })
        .expect("validated collection")
    }

    pub fn boundary(&self, name: &str, side: Side) -> Option<&str> {
        let c = self.cell(name)?;
        match side {
            Side::Source => c.src.as_deref(),
            Side::Target => c.tgt.as_deref(),
        }
    }
}

fn unit_prefix(k: usize) -> String {
    match k {
        0 => "u".into(),
        1 => "v".into(),
        2 => "w".into(),
        _ => format!("u@{}", k + 1),
    }
}

fn unit_name(k: usize, m: usize) -> String {
    if k < 3 {
        format!("{}{m}", unit_prefix(k))
    } else {
        format!("u{m}@{}", k + 1)
    }
}

struct Builder {
    colours: Vec<String>,
    max_dim: usize,
    cells: Vec<CollectionCell>,
    units: BTreeMap<String, Vec<String>>,
}

impl Builder {
    fn new(colours: &[&str], max_dim: usize) -> Builder {
        Builder {
            colours: colours.iter().map(|s| s.to_string()).collect(),
            max_dim,
            cells: Vec::new(),
            units: BTreeMap::new(),
        }
    }

    fn push(&mut self, c: CollectionCell) {
        if c.dim <= self.max_dim {
            self.cells.push(c);
        }
    }

    /// The composition system on one colour: units `u_m` and `mu(m,p)`.
    fn composition_system(&mut self, k: usize, comp: &str) {
        let g = self.colours[k].clone();
        let mut us = Vec::new();
        for m in 0..=self.max_dim {
            let u = unit_name(k, m);
            let prev = us.last().cloned();
            self.push(CollectionCell::new(
                &u,
                m,
                prev.as_deref().map(|p: &str| (p, p)),
                Tree::linear(m),
                &g,
                &g,
            ));
            us.push(u);
            for p in 0..m {
                let name = format!("{comp}({m},{p})");
                let bd = if m == 1 {
                    None
                } else if p == m - 1 {
                    Some(unit_name(k, m - 1))
                } else {
                    Some(format!("{comp}({},{p})", m - 1))
                };
                let shell = bd.clone().unwrap_or_else(|| unit_name(k, 0));
                let tree = Tree::linear(m).star(&Tree::linear(m), p).unwrap();
                self.push(CollectionCell::new(
                    &name,
                    m,
                    Some((&shell, &shell)),
                    tree,
                    &g,
                    &g,
                ));
            }
        }
        self.units.insert(g, us);
    }

    /// A functor-symbol family `name(m)` from colour 1 to colour 2.
    fn functor(&mut self, name: &dyn Fn(usize) -> String) {
        for m in 0..=self.max_dim {
            let prev = if m == 0 { None } else { Some(name(m - 1)) };
            let c = CollectionCell::new(
                &name(m),
                m,
                prev.as_deref().map(|p| (p, p)),
                Tree::linear(m),
                &self.colours[0],
                &self.colours[1],
            );
            self.push(c);
        }
    }

    /// A transformation symbol: root arity in colour 1, output colour 2.
    fn transformation(&mut self, name: &str, dim: usize, src: &str, tgt: &str) {
        let c = CollectionCell::new(
            name,
            dim,
            Some((src, tgt)),
            Tree::root_only(dim),
            &self.colours[0],
            &self.colours[1],
        );
        self.push(c);
    }

    fn finish(self, principal: Option<String>) -> PointedCollection {
        let principal = principal.filter(|p| self.cells.iter().any(|c| &c.name == p));
        PointedCollection::validate(RawCollection {
            colours: self.colours,
            max_dim: self.max_dim,
            cells: self.cells,
            units: self.units,
            principal,
            factors: BTreeMap::new(),
            colour_factors: BTreeMap::new(),
        })
        .expect("built-in complexes are valid")
    }
}

pub fn functor_symbol(m: usize) -> String {
    format!("F{m}")
}

pub fn second_functor_symbol(m: usize) -> String {
    format!("H{m}")
}

pub fn alpha_functor(m: usize) -> String {
    format!("alpha0({m})")
}

pub fn beta_functor(m: usize) -> String {
    format!("beta0({m})")
}

pub fn alpha(p: usize) -> String {
    format!("alpha({p})")
}

pub fn beta(p: usize) -> String {
    format!("beta({p})")
}

/// Name of the principal cell of `C^n`.
pub fn principal_name(n: usize) -> String {
    match n {
        0 => "mu".into(),
        1 => "F0".into(),
        2 => "tau".into(),
        _ => format!("xi{n}"),
    }
}

/// The pointed collection `C^n` truncated at `max_dim`.
pub fn build_complex(n: usize, max_dim: usize) -> PointedCollection {
    if n == 0 {
        let mut b = Builder::new(&["1"], max_dim);
        b.composition_system(0, "mu");
        return b.finish(None);
    }
    let mut b = Builder::new(&["1", "2"], max_dim);
    b.composition_system(0, "mu");
    b.composition_system(1, "nu");
    match n {
        1 => {
            b.functor(&functor_symbol);
            b.finish(Some(functor_symbol(0)))
        }
        2 => {
            b.functor(&functor_symbol);
            b.functor(&second_functor_symbol);
            b.transformation("tau", 1, "F0", "H0");
            b.finish(Some("tau".into()))
        }
        _ => {
            b.functor(&alpha_functor);
            b.functor(&beta_functor);
            for p in 1..=n - 2 {
                let (s, t) = if p == 1 {
                    (alpha_functor(0), beta_functor(0))
                } else {
                    (alpha(p - 1), beta(p - 1))
                };
                b.transformation(&alpha(p), p, &s, &t);
                b.transformation(&beta(p), p, &s, &t);
            }
            b.transformation(&principal_name(n), n - 1, &alpha(n - 2), &beta(n - 2));
            b.finish(Some(principal_name(n)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coface {
    Delta,
    Kappa,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CollectionMorphism {
    pub colour_map: BTreeMap<String, String>,
    pub cell_map: BTreeMap<String, String>,
}

impl CollectionMorphism {
    pub fn identity(c: &PointedCollection) -> CollectionMorphism {
        CollectionMorphism {
            colour_map: c.colours().iter().map(|g| (g.clone(), g.clone())).collect(),
            cell_map: c
                .cells()
                .iter()
                .map(|x| (x.name.clone(), x.name.clone()))
                .collect(),
        }
    }

    pub fn apply(&self, name: &str) -> Option<&str> {
        self.cell_map.get(name).map(String::as_str)
    }

    pub fn colour(&self, g: &str) -> Option<&str> {
        self.colour_map.get(g).map(String::as_str)
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &CollectionMorphism) -> CollectionMorphism {
        CollectionMorphism {
            colour_map: self
                .colour_map
                .iter()
                .filter_map(|(k, v)| then.colour_map.get(v).map(|w| (k.clone(), w.clone())))
                .collect(),
            cell_map: self
                .cell_map
                .iter()
                .filter_map(|(k, v)| then.cell_map.get(v).map(|w| (k.clone(), w.clone())))
                .collect(),
        }
    }

    /// Checks dims, boundaries, arities, colours and units.
    pub fn check(
        &self,
        source: &PointedCollection,
        target: &PointedCollection,
    ) -> Result<(), CollectionError> {
        let err = |cell: &str, reason: &str| CollectionError::Morphism {
            cell: cell.to_string(),
            reason: reason.to_string(),
        };
        for c in source.cells() {
            let img = self
                .apply(&c.name)
                .ok_or_else(|| err(&c.name, "no image"))?;
            let ic = target
                .cell(img)
                .ok_or_else(|| err(&c.name, "image not in target"))?;
            if ic.dim != c.dim {
                return Err(err(&c.name, "dimension"));
            }
            for side in [Side::Source, Side::Target] {
                let b = source.boundary(&c.name, side).map(|b| self.apply(b));
                if b.map(|x| x.map(str::to_string))
                    != target.boundary(img, side).map(|x| Some(x.to_string()))
                {
                    return Err(err(&c.name, "boundary"));
                }
            }
            if ic.arity.tree != c.arity.tree
                || self.colour(&c.arity.colour) != Some(ic.arity.colour.as_str())
            {
                return Err(err(&c.name, "arity"));
            }
            if self.colour(&c.colour) != Some(ic.colour.as_str()) {
                return Err(err(&c.name, "colour"));
            }
            if let Some((g, m)) = source.unit_key(&c.name) {
                let h = self.colour(&g).ok_or_else(|| err(&c.name, "colour"))?;
                if target.unit(h, m) != Some(img) {
                    return Err(err(&c.name, "unit not preserved"));
                }
            }
        }
        Ok(())
    }
}

/// The coface `C^n → C^{n+1}`.
pub fn coface(n: usize, side: Coface, max_dim: usize) -> CollectionMorphism {
    let source = build_complex(n, max_dim);
    let colours: BTreeMap<String, String> = match (n, side) {
        (0, Coface::Kappa) => [("1".to_string(), "2".to_string())].into(),
        _ => source
            .colours()
            .iter()
            .map(|g| (g.clone(), g.clone()))
            .collect(),
    };
    let mut cells = BTreeMap::new();
    for c in source.cells() {
        let name = c.name.as_str();
        let img = match n {
            0 => match side {
                Coface::Delta => name.to_string(),
                Coface::Kappa => {
                    if let Some(rest) = name.strip_prefix("mu") {
                        format!("nu{rest}")
                    } else {
                        name.replacen('u', "v", 1)
                    }
                }
            },
            1 => match (name.strip_prefix('F'), side) {
                (Some(m), Coface::Kappa) => format!("H{m}"),
                _ => name.to_string(),
            },
            2 => {
                if let Some(m) = name.strip_prefix('F') {
                    alpha_functor(m.parse().unwrap())
                } else if let Some(m) = name.strip_prefix('H') {
                    beta_functor(m.parse().unwrap())
                } else if name == "tau" {
                    match side {
                        Coface::Delta => alpha(1),
                        Coface::Kappa => beta(1),
                    }
                } else {
                    name.to_string()
                }
            }
            _ => {
                if name == principal_name(n) {
                    match side {
                        Coface::Delta => alpha(n - 1),
                        Coface::Kappa => beta(n - 1),
                    }
                } else {
                    name.to_string()
                }
            }
        };
        cells.insert(c.name.clone(), img);
    }
    CollectionMorphism {
        colour_map: colours,
        cell_map: cells,
    }
}

/// `I(G)`: the units only.
pub fn unit_collection(colours: &[&str], max_dim: usize) -> PointedCollection {
    let mut b = Builder::new(colours, max_dim);
    for k in 0..colours.len() {
        let g = b.colours[k].clone();
        let mut us = Vec::new();
        for m in 0..=max_dim {
            let u = unit_name(k, m);
            let prev = us.last().cloned();
            b.push(CollectionCell::new(
                &u,
                m,
                prev.as_deref().map(|p: &str| (p, p)),
                Tree::linear(m),
                &g,
                &g,
            ));
            us.push(u);
        }
        b.units.insert(g, us);
    }
    b.finish(None)
}

/// Result of a tensor: the collection plus the (diagram, operation) pair behind each cell.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub collection: PointedCollection,
    pub parts: BTreeMap<String, (Pasting<String>, String)>,
}

fn tensor_name(p: &Pasting<String>, b: &str) -> String {
    format!("<{}|{b}>", p.leaf_labels().join(","))
}

/// Checks the pullback condition for a pair and returns its arity and colour.
pub fn tensor_cell(
    c: &PointedCollection,
    c2: &PointedCollection,
    p: &Pasting<String>,
    b: &str,
) -> Result<(Arity, String), CollectionError> {
    let bc = c2
        .cell(b)
        .ok_or_else(|| CollectionError::UnknownCell(b.to_string()))?;
    if p.shape != bc.arity.tree {
        return Err(CollectionError::GluingMismatch(format!(
            "colour tree {} differs from arity {}",
            p.shape, bc.arity.tree
        )));
    }
    let mut in_colour = None;
    let mut shapes = Vec::new();
    for l in &p.labels {
        let lc = c
            .cell(l)
            .ok_or_else(|| CollectionError::UnknownCell(l.clone()))?;
        if lc.colour != bc.arity.colour {
            return Err(CollectionError::GluingMismatch(format!(
                "label {l} has colour {}",
                lc.colour
            )));
        }
        match &in_colour {
            None => in_colour = Some(lc.arity.colour.clone()),
            Some(g) if *g == lc.arity.colour => {}
            Some(_) => {
                return Err(CollectionError::GluingMismatch(
                    "labels disagree on input colour".into(),
                ))
            }
        }
    }
    for l in p.leaf_labels() {
        shapes.push(c.cell(&l).unwrap().arity.tree.clone());
    }
    let g = graft(&p.shape, &shapes).map_err(|e| CollectionError::GluingMismatch(e.to_string()))?;
    Ok((
        Arity {
            tree: g.tree,
            colour: in_colour.unwrap(),
        },
        bc.colour.clone(),
    ))
}

/// `C ⊗ C'`: all pairs (diagram of C-cells, C'-cell) satisfying the pullback condition.
pub fn tensor_collections(
    c: &PointedCollection,
    c2: &PointedCollection,
) -> Result<Tensor, CollectionError> {
    if c.colours() != c2.colours() {
        return Err(CollectionError::GluingMismatch("colour sets differ".into()));
    }
    let names: Vec<String> = c.cells().iter().map(|x| x.name.clone()).collect();
    let mut cells = Vec::new();
    let mut parts = BTreeMap::new();
    let mut by_b: HashMap<String, Vec<Pasting<String>>> = HashMap::new();
    for b in c2.cells() {
        let g = b.arity.colour.clone();
        let cands: Vec<String> = names
            .iter()
            .filter(|n| c.cell(n).unwrap().colour == g)
            .cloned()
            .collect();
        let ps = labelings(
            &b.arity.tree,
            &cands,
            &|l: &String| c.cell(l).map(|x| x.dim).unwrap_or(usize::MAX),
            &|l: &String, side| c.boundary(l, side).map(str::to_string),
            usize::MAX,
        );
        by_b.insert(b.name.clone(), ps);
    }
    for b in c2.cells() {
        for p in &by_b[&b.name] {
            let Ok((arity, colour)) = tensor_cell(c, c2, p, &b.name) else {
                continue;
            };
            let name = tensor_name(p, &b.name);
            let bd = if b.dim == 0 {
                None
            } else {
                let s = tensor_name(
                    &p.boundary(b.dim - 1, Side::Source).unwrap(),
                    b.src.as_ref().unwrap(),
                );
                let t = tensor_name(
                    &p.boundary(b.dim - 1, Side::Target).unwrap(),
                    b.tgt.as_ref().unwrap(),
                );
                Some((s, t))
            };
            cells.push(CollectionCell {
                name: name.clone(),
                dim: b.dim,
                src: bd.as_ref().map(|x| x.0.clone()),
                tgt: bd.as_ref().map(|x| x.1.clone()),
                arity,
                colour,
            });
            parts.insert(name, (p.clone(), b.name.clone()));
        }
    }
    let mut units = BTreeMap::new();
    for g in c.colours() {
        let us = (0..=c.max_dim())
            .map(|m| {
                let u = c.unit(g, m).unwrap();
                let p = crate::pasting::eta(&c.globular(), u).unwrap();
                tensor_name(&p, c2.unit(g, m).unwrap())
            })
            .collect();
        units.insert(g.clone(), us);
    }
    let collection = PointedCollection::validate(RawCollection {
        colours: c.colours().to_vec(),
        max_dim: c.max_dim().min(c2.max_dim()),
        cells,
        units,
        principal: None,
        factors: BTreeMap::new(),
        colour_factors: BTreeMap::new(),
    })?;
    Ok(Tensor { collection, parts })
}

/// One gluing of a wide pushout: `shared` maps into factors `left` and `right`.
#[derive(Debug, Clone)]
pub struct Gluing {
    pub shared: PointedCollection,
    pub left: usize,
    pub to_left: CollectionMorphism,
    pub right: usize,
    pub to_right: CollectionMorphism,
}

#[derive(Debug, Clone)]
pub struct Pushout {
    pub collection: PointedCollection,
    pub injections: Vec<CollectionMorphism>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// Colimit of factors glued pairwise along shared collections.
pub fn wide_pushout(
    factors: &[PointedCollection],
    gluings: &[Gluing],
) -> Result<Pushout, CollectionError> {
    let mut cell_off = vec![0];
    let mut colour_off = vec![0];
    for f in factors {
        cell_off.push(cell_off.last().unwrap() + f.cells().len());
        colour_off.push(colour_off.last().unwrap() + f.colours().len());
    }
    let cell_id = |i: usize, name: &str| -> Result<usize, CollectionError> {
        factors[i]
            .index
            .get(name)
            .map(|&k| cell_off[i] + k)
            .ok_or_else(|| CollectionError::UnknownCell(name.to_string()))
    };
    let colour_id = |i: usize, g: &str| -> Result<usize, CollectionError> {
        factors[i]
            .colours()
            .iter()
            .position(|h| h == g)
            .map(|k| colour_off[i] + k)
            .ok_or_else(|| CollectionError::UnknownColour(g.to_string()))
    };
    let mut cp = (0..*cell_off.last().unwrap()).collect::<Vec<_>>();
    let mut gp = (0..*colour_off.last().unwrap()).collect::<Vec<_>>();
    for gl in gluings {
        gl.to_left.check(&gl.shared, &factors[gl.left])?;
        gl.to_right.check(&gl.shared, &factors[gl.right])?;
        for g in gl.shared.colours() {
            let a = colour_id(gl.left, gl.to_left.colour(g).unwrap())?;
            let b = colour_id(gl.right, gl.to_right.colour(g).unwrap())?;
            union(&mut gp, a, b);
        }
        for c in gl.shared.cells() {
            let a = cell_id(gl.left, gl.to_left.apply(&c.name).unwrap())?;
            let b = cell_id(gl.right, gl.to_right.apply(&c.name).unwrap())?;
            union(&mut cp, a, b);
        }
    }
    let owner = |off: &[usize], x: usize| off.iter().rposition(|&o| o <= x).unwrap();

    let mut colour_names: HashMap<usize, String> = HashMap::new();
    let mut colours = Vec::new();
    let mut colour_factors = BTreeMap::new();
    for x in 0..gp.len() {
        let r = find(&mut gp, x);
        let name = colour_names.entry(r).or_insert_with(|| {
            colours.push((colours.len() + 1).to_string());
            colours.last().unwrap().clone()
        });
        *colour_factors.entry(name.clone()).or_insert(0u32) |= 1 << owner(&colour_off, x);
    }
    let colour_of = |gp: &mut Vec<usize>, i: usize, g: &str| -> String {
        let id = colour_off[i] + factors[i].colours().iter().position(|h| h == g).unwrap();
        colour_names[&find(gp, id)].clone()
    };

    let mut classes: Vec<usize> = Vec::new();
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for x in 0..cp.len() {
        let r = find(&mut cp, x);
        if !members.contains_key(&r) {
            classes.push(r);
        }
        members.entry(r).or_default().push(x);
    }
    let cell_at = |x: usize| {
        let i = owner(&cell_off, x);
        (i, &factors[i].raw.cells[x - cell_off[i]])
    };

    let mut unit_of: HashMap<usize, String> = HashMap::new();
    for &r in &classes {
        let (i, c) = cell_at(r);
        if let Some((g, m)) = factors[i].unit_key(&c.name) {
            let colour = colour_of(&mut gp, i, &g);
            let k = colours.iter().position(|h| *h == colour).unwrap();
            unit_of.insert(r, unit_name(k, m));
        }
    }
    let mut by_base: HashMap<String, Vec<usize>> = HashMap::new();
    for &r in &classes {
        if !unit_of.contains_key(&r) {
            by_base
                .entry(cell_at(r).1.name.clone())
                .or_default()
                .push(r);
        }
    }
    let mut names: HashMap<usize, String> = unit_of.clone();
    for (base, rs) in &by_base {
        for (j, &r) in rs.iter().enumerate() {
            let shared = members[&r]
                .iter()
                .map(|&x| owner(&cell_off, x))
                .collect::<std::collections::BTreeSet<_>>()
                .len()
                > 1;
            let name = if rs.len() == 1 || (j == 0 && shared) {
                base.clone()
            } else {
                format!("{base}#{}", owner(&cell_off, r) + 1)
            };
            names.insert(r, name);
        }
    }

    let mut cells = Vec::new();
    let mut factor_masks = BTreeMap::new();
    for &r in &classes {
        let (i, c) = cell_at(r);
        let mut mask = 0u32;
        for &x in &members[&r] {
            let (j, d) = cell_at(x);
            mask |= 1 << j;
            let same = d.dim == c.dim
                && d.arity.tree == c.arity.tree
                && colour_of(&mut gp, j, &d.colour) == colour_of(&mut gp, i, &c.colour)
                && colour_of(&mut gp, j, &d.arity.colour) == colour_of(&mut gp, i, &c.arity.colour);
            if !same {
                return Err(CollectionError::GluingMismatch(format!(
                    "{} and {} are identified but differ",
                    c.name, d.name
                )));
            }
        }
        let bd = |b: &Option<String>, cp: &mut Vec<usize>| -> Option<String> {
            b.as_ref()
                .map(|b| names[&find(cp, cell_off[i] + factors[i].index[b])].clone())
        };
        let src = bd(&c.src, &mut cp);
        let tgt = bd(&c.tgt, &mut cp);
        let name = names[&r].clone();
        factor_masks.insert(name.clone(), mask);
        cells.push(CollectionCell {
            name,
            dim: c.dim,
            src,
            tgt,
            arity: Arity {
                tree: c.arity.tree.clone(),
                colour: colour_of(&mut gp, i, &c.arity.colour),
            },
            colour: colour_of(&mut gp, i, &c.colour),
        });
    }
    let max_dim = factors
        .iter()
        .map(PointedCollection::max_dim)
        .min()
        .unwrap_or(0);
    let units = colours
        .iter()
        .enumerate()
        .map(|(k, g)| (g.clone(), (0..=max_dim).map(|m| unit_name(k, m)).collect()))
        .collect();
    let collection = PointedCollection::validate(RawCollection {
        colours: colours.clone(),
        max_dim,
        cells,
        units,
        principal: None,
        factors: factor_masks,
        colour_factors,
    })?;
    let mut injections = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let colour_map = f
            .colours()
            .iter()
            .map(|g| (g.clone(), colour_of(&mut gp, i, g)))
            .collect();
        let cell_map = f
            .cells()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                (
                    c.name.clone(),
                    names[&find(&mut cp, cell_off[i] + k)].clone(),
                )
            })
            .collect();
        injections.push(CollectionMorphism {
            colour_map,
            cell_map,
        });
    }
    Ok(Pushout {
        collection,
        injections,
    })
}

/// Pushout of `f: A → B` and `g: A → B'`.
pub fn pushout_collections(
    a: &PointedCollection,
    b: &PointedCollection,
    f: &CollectionMorphism,
    b2: &PointedCollection,
    g: &CollectionMorphism,
) -> Result<Pushout, CollectionError> {
    wide_pushout(
        &[b.clone(), b2.clone()],
        &[Gluing {
            shared: a.clone(),
            left: 0,
            to_left: f.clone(),
            right: 1,
            to_right: g.clone(),
        }],
    )
}

/// Tree-shaped complex pushout `C^n ⊔_{C^p} C^n` glued along κ into the left copy and δ into the right.
pub fn binary_complex_pushout(
    n: usize,
    p: usize,
    max_dim: usize,
) -> Result<Pushout, CollectionError> {
    let a = build_complex(p, max_dim);
    let f = iterated_coface(p, n, Coface::Kappa, max_dim);
    let g = iterated_coface(p, n, Coface::Delta, max_dim);
    let b = build_complex(n, max_dim);
    pushout_collections(&a, &b, &f, &b, &g)
}

/// `C^p → C^n`: the first step uses `side`; later steps do not change the composite.
pub fn iterated_coface(p: usize, n: usize, side: Coface, max_dim: usize) -> CollectionMorphism {
    assert!(p <= n);
    let mut m = CollectionMorphism::identity(&build_complex(p, max_dim));
    for k in p..n {
        let s = if k == p { side } else { Coface::Delta };
        m = m.then(&coface(k, s, max_dim));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::TreeMatrix;

    fn names(c: &PointedCollection, dim: usize) -> Vec<String> {
        let mut v: Vec<String> = c.cells_of_dim(dim).map(|c| c.name.clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn base_complex_counts() {
        let c = build_complex(0, 3);
        assert_eq!(c.counts(), vec![1, 2, 3, 4]);
        assert_eq!(names(&c, 2), vec!["mu(2,0)", "mu(2,1)", "u2"]);
        let mu21 = c.cell("mu(2,1)").unwrap();
        assert_eq!(mu21.src.as_deref(), Some("u1"));
        let mu20 = c.cell("mu(2,0)").unwrap();
        assert_eq!(mu20.src.as_deref(), Some("mu(1,0)"));
        assert_eq!(mu20.arity.tree.matrix(), TreeMatrix::new(2, &[2, 2], &[0]));
    }

    #[test]
    fn transformation_complex() {
        let c = build_complex(2, 1);
        assert_eq!(
            names(&c, 1),
            vec!["F1", "H1", "mu(1,0)", "nu(1,0)", "tau", "u1", "v1"]
        );
        let tau = c.cell("tau").unwrap();
        assert_eq!(
            (tau.src.as_deref(), tau.tgt.as_deref()),
            (Some("F0"), Some("H0"))
        );
        assert_eq!(
            tau.arity,
            Arity {
                tree: Tree::root_only(1),
                colour: "1".into()
            }
        );
        assert_eq!(tau.colour, "2");
        assert_eq!(names(&build_complex(1, 0), 0), vec!["F0", "u0", "v0"]);
    }

    #[test]
    fn higher_complex_principal_dim() {
        let c = build_complex(3, 3);
        let xi = c.cell("xi3").unwrap();
        assert_eq!(xi.dim, 2);
        assert_eq!(xi.src.as_deref(), Some("alpha(1)"));
        assert_eq!(
            c.cell("alpha(1)").unwrap().src.as_deref(),
            Some("alpha0(0)")
        );
    }

    #[test]
    fn cofaces_are_morphisms() {
        for n in 0..4 {
            for side in [Coface::Delta, Coface::Kappa] {
                coface(n, side, 3)
                    .check(&build_complex(n, 3), &build_complex(n + 1, 3))
                    .unwrap();
            }
        }
        let k = coface(0, Coface::Kappa, 2);
        assert_eq!(k.apply("mu(2,1)"), Some("nu(2,1)"));
        assert_eq!(k.apply("u2"), Some("v2"));
        assert_eq!(coface(1, Coface::Kappa, 2).apply("F2"), Some("H2"));
        assert_eq!(coface(2, Coface::Delta, 2).apply("tau"), Some("alpha(1)"));
        assert_eq!(coface(2, Coface::Kappa, 2).apply("tau"), Some("beta(1)"));
    }

    #[test]
    fn coglobular_identities() {
        for n in 0..4 {
            for first in [Coface::Delta, Coface::Kappa] {
                let a = coface(n, first, 3).then(&coface(n + 1, Coface::Delta, 3));
                let b = coface(n, first, 3).then(&coface(n + 1, Coface::Kappa, 3));
                assert_eq!(a, b, "n = {n}");
            }
        }
    }

    #[test]
    fn pushout_of_functor_complexes() {
        let po = binary_complex_pushout(1, 0, 1).unwrap();
        let c = &po.collection;
        assert_eq!(c.colours(), &["1", "2", "3"]);
        assert_eq!(names(c, 1).len(), 8);
        assert_eq!(c.cell("F1#1").unwrap().colour, "2");
        assert_eq!(c.cell("F1#2").unwrap().arity.colour, "2");
        assert_eq!(c.cell("nu(1,0)#2").unwrap().colour, "3");
        assert_eq!(c.factor_mask("nu(1,0)"), 3);
        for (i, inj) in po.injections.iter().enumerate() {
            inj.check(&build_complex(1, 1), c)
                .unwrap_or_else(|e| panic!("injection {i}: {e}"));
        }
    }

    #[test]
    fn iterated_cofaces_follow_first_step() {
        let k = iterated_coface(0, 2, Coface::Kappa, 2);
        assert_eq!(k.apply("mu(1,0)"), Some("nu(1,0)"));
        let d = iterated_coface(0, 3, Coface::Delta, 2);
        assert_eq!(d.apply("u2"), Some("u2"));
        k.check(&build_complex(0, 2), &build_complex(2, 2)).unwrap();
    }

    #[test]
    fn pushout_along_identities() {
        let b = build_complex(1, 2);
        let id = CollectionMorphism::identity(&b);
        let po = pushout_collections(&b, &b, &id, &b, &id).unwrap();
        assert_eq!(po.collection.cells(), b.cells());
    }

    #[test]
    fn tensor_unit_laws() {
        let c = build_complex(0, 1);
        let i = unit_collection(&["1"], 1);
        let left = tensor_collections(&i, &c).unwrap();
        assert_eq!(left.collection.cells().len(), c.cells().len());
        let right = tensor_collections(&c, &i).unwrap();
        assert_eq!(right.collection.cells().len(), c.cells().len());
    }

    #[test]
    fn tensor_pullback_condition() {
        let c = build_complex(0, 1);
        let x = c.globular();
        let uu = crate::pasting::eta(&x, "u1")
            .unwrap()
            .star(&crate::pasting::eta(&x, "u1").unwrap(), 0)
            .unwrap();
        let (arity, _) = tensor_cell(&c, &c, &uu, "mu(1,0)").unwrap();
        assert_eq!(arity.tree.matrix(), TreeMatrix::new(1, &[1, 1], &[0]));
        let mu = crate::pasting::eta(&x, "mu(1,0)").unwrap();
        assert!(tensor_cell(&c, &c, &mu, "u1").is_ok());
        assert!(tensor_cell(&c, &c, &uu, "u1").is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = build_complex(2, 2);
        let s = serde_json::to_string(c.raw()).unwrap();
        let back = PointedCollection::validate(serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
