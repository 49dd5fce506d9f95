//! Finite, dimension-truncated globular sets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Source,
    Target,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Source => Side::Target,
            Side::Target => Side::Source,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlobularError {
    #[error("cell {cell} references unknown cell {reference}")]
    MissingReference { cell: String, reference: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("globular identity violated at cell {0}")]
    GlobularIdentityViolation(String),
    #[error("duplicate cell id {0}")]
    DuplicateCell(String),
    #[error("unknown cell {0}")]
    UnknownCell(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GCell {
    pub id: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt: Option<String>,
}

impl GCell {
    pub fn point(id: &str) -> GCell {
        GCell {
            id: id.to_string(),
            dim: 0,
            src: None,
            tgt: None,
        }
    }

    pub fn arrow(id: &str, dim: usize, src: &str, tgt: &str) -> GCell {
        GCell {
            id: id.to_string(),
            dim,
            src: Some(src.to_string()),
            tgt: Some(tgt.to_string()),
        }
    }
}

/// Unvalidated cell table, the JSON exchange form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGlobularSet {
    pub max_dim: usize,
    pub cells: Vec<GCell>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobularSet {
    max_dim: usize,
    cells: Vec<GCell>,
    index: HashMap<String, usize>,
}

pub fn validate_globular_set(raw: RawGlobularSet) -> Result<GlobularSet, GlobularError> {
    let mut index = HashMap::new();
    for (i, c) in raw.cells.iter().enumerate() {
        if index.insert(c.id.clone(), i).is_some() {
            return Err(GlobularError::DuplicateCell(c.id.clone()));
        }
    }
    for c in &raw.cells {
        if c.dim > raw.max_dim {
            return Err(GlobularError::DimensionMismatch(format!(
                "cell {} has dim {} above max_dim {}",
                c.id, c.dim, raw.max_dim
            )));
        }
        match (c.dim, &c.src, &c.tgt) {
            (0, None, None) => {}
            (0, _, _) => {
                return Err(GlobularError::DimensionMismatch(format!(
                    "0-cell {} has a boundary",
                    c.id
                )))
            }
            (_, Some(s), Some(t)) => {
                for r in [s, t] {
                    let j = *index
                        .get(r)
                        .ok_or_else(|| GlobularError::MissingReference {
                            cell: c.id.clone(),
                            reference: r.clone(),
                        })?;
                    if raw.cells[j].dim + 1 != c.dim {
                        return Err(GlobularError::DimensionMismatch(format!(
                            "cell {} of dim {} has boundary {} of dim {}",
                            c.id, c.dim, r, raw.cells[j].dim
                        )));
                    }
                }
            }
            _ => {
                return Err(GlobularError::DimensionMismatch(format!(
                    "cell {} of dim {} lacks a boundary",
                    c.id, c.dim
                )))
            }
        }
    }
    let set = GlobularSet {
        max_dim: raw.max_dim,
        cells: raw.cells,
        index,
    };
    for c in &set.cells {
        if c.dim >= 2 {
            let s = set.cell(c.src.as_deref().unwrap()).unwrap();
            let t = set.cell(c.tgt.as_deref().unwrap()).unwrap();
            if s.src != t.src || s.tgt != t.tgt {
                return Err(GlobularError::GlobularIdentityViolation(c.id.clone()));
            }
        }
    }
    Ok(set)
}

impl GlobularSet {
    /// The terminal set truncated at `max_dim`: one cell `*m` per dimension.
    pub fn terminal(max_dim: usize) -> GlobularSet {
        GlobularSet::constant(&["*"], max_dim)
    }

    /// The constant globular set on a colour set: one cell `g(m)` per colour and dimension.
    pub fn constant(colours: &[&str], max_dim: usize) -> GlobularSet {
        let mut cells = Vec::new();
        for m in 0..=max_dim {
            for g in colours {
                let id = format!("{g}({m})");
                if m == 0 {
                    cells.push(GCell::point(&id));
                } else {
                    let b = format!("{g}({})", m - 1);
                    cells.push(GCell::arrow(&id, m, &b, &b));
                }
            }
        }
        validate_globular_set(RawGlobularSet { max_dim, cells })
            .expect("constant sets are globular")
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn cells(&self) -> &[GCell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, id: &str) -> Option<&GCell> {
        self.index.get(id).map(|&i| &self.cells[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn cells_of_dim(&self, dim: usize) -> impl Iterator<Item = &GCell> {
        self.cells.iter().filter(move |c| c.dim == dim)
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.max_dim + 1];
        for c in &self.cells {
            out[c.dim] += 1;
        }
        out
    }

    pub fn boundary(&self, id: &str, side: Side) -> Option<&str> {
        let c = self.cell(id)?;
        match side {
            Side::Source => c.src.as_deref(),
            Side::Target => c.tgt.as_deref(),
        }
    }

    pub fn to_raw(&self) -> RawGlobularSet {
        RawGlobularSet {
            max_dim: self.max_dim,
            cells: self.cells.clone(),
        }
    }

    /// The composite boundary `s^{dim}_k` or `t^{dim}_k`; the identity when `k = dim`.
    pub fn iterated_boundary<'a>(
        &'a self,
        id: &'a str,
        k: usize,
        side: Side,
    ) -> Result<&'a str, GlobularError> {
        let c = self
            .cell(id)
            .ok_or_else(|| GlobularError::UnknownCell(id.to_string()))?;
        if k > c.dim {
            return Err(GlobularError::DimensionMismatch(format!(
                "cannot take the {k}-boundary of the {}-cell {id}",
                c.dim
            )));
        }
        let mut cur = id;
        for _ in k..c.dim {
            cur = self.boundary(cur, side).expect("validated");
        }
        Ok(cur)
    }

    pub fn is_parallel(&self, x: &str, y: &str) -> Result<bool, GlobularError> {
        let cx = self
            .cell(x)
            .ok_or_else(|| GlobularError::UnknownCell(x.to_string()))?;
        let cy = self
            .cell(y)
            .ok_or_else(|| GlobularError::UnknownCell(y.to_string()))?;
        if cx.dim != cy.dim || cx.dim == 0 {
            return Err(GlobularError::DimensionMismatch(format!(
                "parallelism needs equal positive dims, got {} and {}",
                cx.dim, cy.dim
            )));
        }
        Ok(cx.src == cy.src && cx.tgt == cy.tgt)
    }

    /// Checks that `map` sends every cell to a cell of `target` preserving dim, src and tgt.
    pub fn check_map(
        &self,
        target: &GlobularSet,
        map: &HashMap<String, String>,
    ) -> Result<(), GlobularError> {
        for c in &self.cells {
            let img = map
                .get(&c.id)
                .ok_or_else(|| GlobularError::UnknownCell(c.id.clone()))?;
            let ic = target
                .cell(img)
                .ok_or_else(|| GlobularError::UnknownCell(img.clone()))?;
            if ic.dim != c.dim {
                return Err(GlobularError::DimensionMismatch(format!(
                    "{} maps to {}",
                    c.id, img
                )));
            }
            for side in [Side::Source, Side::Target] {
                if let Some(b) = self.boundary(&c.id, side) {
                    if map.get(b).map(String::as_str) != target.boundary(img, side) {
                        return Err(GlobularError::GlobularIdentityViolation(c.id.clone()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A chosen reflexive structure: one-step lifts `x ↦ 1(x)`, iterated for `1^p_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReflexiveStructure {
    lift: HashMap<String, String>,
}

impl ReflexiveStructure {
    pub fn new(
        owner: &GlobularSet,
        lift: HashMap<String, String>,
    ) -> Result<ReflexiveStructure, GlobularError> {
        for (x, l) in &lift {
            let cx = owner
                .cell(x)
                .ok_or_else(|| GlobularError::UnknownCell(x.clone()))?;
            let cl = owner
                .cell(l)
                .ok_or_else(|| GlobularError::UnknownCell(l.clone()))?;
            if cl.dim != cx.dim + 1 {
                return Err(GlobularError::DimensionMismatch(format!(
                    "lift of {x} is {l}"
                )));
            }
            if cl.src.as_deref() != Some(x.as_str()) || cl.tgt.as_deref() != Some(x.as_str()) {
                return Err(GlobularError::GlobularIdentityViolation(l.clone()));
            }
        }
        Ok(ReflexiveStructure { lift })
    }

    /// Freely adjoins identity cells `1(x)` to every cell below `max_dim`.
    pub fn freely_adjoin(set: &GlobularSet) -> (GlobularSet, ReflexiveStructure) {
        let mut cells: Vec<GCell> = Vec::new();
        let mut lift = HashMap::new();
        let mut by_dim: Vec<Vec<String>> = vec![Vec::new(); set.max_dim + 1];
        for c in set.cells() {
            cells.push(c.clone());
            by_dim[c.dim].push(c.id.clone());
        }
        for m in 0..set.max_dim {
            let layer = by_dim[m].clone();
            for x in layer {
                let id = format!("1({x})");
                cells.push(GCell::arrow(&id, m + 1, &x, &x));
                lift.insert(x.clone(), id.clone());
                by_dim[m + 1].push(id);
            }
        }
        let owner = validate_globular_set(RawGlobularSet {
            max_dim: set.max_dim,
            cells,
        })
        .expect("identities are globular");
        let refl = ReflexiveStructure::new(&owner, lift).expect("identities are reflexive");
        (owner, refl)
    }

    /// `1^p_n(x)` for a p-cell x.
    pub fn lift(&self, owner: &GlobularSet, x: &str, n: usize) -> Result<String, GlobularError> {
        let p = owner
            .cell(x)
            .ok_or_else(|| GlobularError::UnknownCell(x.to_string()))?
            .dim;
        if n < p {
            return Err(GlobularError::DimensionMismatch(format!(
                "cannot lift a {p}-cell to dim {n}"
            )));
        }
        let mut cur = x.to_string();
        for _ in p..n {
            cur = self
                .lift
                .get(&cur)
                .cloned()
                .ok_or_else(|| GlobularError::UnknownCell(format!("1({cur})")))?;
        }
        Ok(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrow_set() -> GlobularSet {
        validate_globular_set(RawGlobularSet {
            max_dim: 2,
            cells: vec![
                GCell::point("a"),
                GCell::point("b"),
                GCell::arrow("f", 1, "a", "b"),
                GCell::arrow("g", 1, "a", "b"),
                GCell::arrow("h", 1, "b", "a"),
                GCell::arrow("e", 2, "f", "g"),
            ],
        })
        .unwrap()
    }

    #[test]
    fn single_point_is_valid() {
        let raw = RawGlobularSet {
            max_dim: 0,
            cells: vec![GCell::point("a")],
        };
        assert!(validate_globular_set(raw).is_ok());
    }

    #[test]
    fn arrow_is_valid() {
        let raw = RawGlobularSet {
            max_dim: 1,
            cells: vec![
                GCell::point("a"),
                GCell::point("b"),
                GCell::arrow("f", 1, "a", "b"),
            ],
        };
        assert!(validate_globular_set(raw).is_ok());
    }

    #[test]
    fn mismatched_shell_is_rejected() {
        let raw = RawGlobularSet {
            max_dim: 2,
            cells: vec![
                GCell::point("a"),
                GCell::point("b"),
                GCell::arrow("f", 1, "a", "b"),
                GCell::arrow("h", 1, "b", "a"),
                GCell::arrow("e", 2, "f", "h"),
            ],
        };
        assert_eq!(
            validate_globular_set(raw),
            Err(GlobularError::GlobularIdentityViolation("e".into()))
        );
    }

    #[test]
    fn missing_and_misdimensioned_references() {
        let raw = RawGlobularSet {
            max_dim: 1,
            cells: vec![GCell::point("a"), GCell::arrow("f", 1, "a", "z")],
        };
        assert!(matches!(
            validate_globular_set(raw),
            Err(GlobularError::MissingReference { .. })
        ));
        let raw = RawGlobularSet {
            max_dim: 2,
            cells: vec![GCell::point("a"), GCell::arrow("e", 2, "a", "a")],
        };
        assert!(matches!(
            validate_globular_set(raw),
            Err(GlobularError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn iterated_boundaries() {
        let x = arrow_set();
        assert_eq!(x.iterated_boundary("e", 2, Side::Source).unwrap(), "e");
        assert_eq!(x.iterated_boundary("e", 0, Side::Source).unwrap(), "a");
        assert_eq!(x.iterated_boundary("e", 1, Side::Target).unwrap(), "g");
        assert_eq!(x.iterated_boundary("f", 0, Side::Target).unwrap(), "b");
        assert!(x.iterated_boundary("f", 2, Side::Target).is_err());
    }

    #[test]
    fn parallelism() {
        let x = arrow_set();
        assert!(x.is_parallel("f", "g").unwrap());
        assert!(!x.is_parallel("f", "h").unwrap());
        assert!(x.is_parallel("a", "b").is_err());
        assert!(x.is_parallel("f", "e").is_err());
    }

    #[test]
    fn reflexive_lifts_compose() {
        let x = arrow_set();
        let (owner, refl) = ReflexiveStructure::freely_adjoin(&x);
        let l2 = refl.lift(&owner, "a", 2).unwrap();
        let l1 = refl.lift(&owner, "a", 1).unwrap();
        assert_eq!(refl.lift(&owner, &l1, 2).unwrap(), l2);
        assert_eq!(owner.boundary(&l1, Side::Source), Some("a"));
        assert_eq!(owner.boundary(&l1, Side::Target), Some("a"));
    }

    #[test]
    fn json_round_trip() {
        let x = arrow_set();
        let text = serde_json::to_string(&x.to_raw()).unwrap();
        let back = validate_globular_set(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, x);
        assert!(!text.contains("\"src\":null"));
    }
}
