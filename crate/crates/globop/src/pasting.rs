//! Labelled pasting diagrams and the free strict ω-category monad.
//!
//! `Pasting<L>` is a tree together with a total labelling of its pasting scheme.
//! With `L = String` over a finite globular set these are the cells of `T(X)`;
//! operad terms reuse the same structure with terms as labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::globular::{GlobularSet, Side};
use crate::trees::{glue, recompose_with, Scheme, Tree, TreeError, TreeMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PastingError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("label {label} has dimension {found}, scheme cell needs {expected}")]
    DimensionMismatch {
        label: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown cell {0}")]
    UnknownCell(String),
    #[error("expected {expected} labels, got {found}")]
    LabelCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pasting<L> {
    pub shape: Tree,
    pub labels: Vec<L>,
}

/// A grafted tree together with the scheme embeddings of every piece.
#[derive(Debug, Clone)]
pub struct Graft {
    pub tree: Tree,
    pub scheme: Scheme,
    pub embeddings: Vec<Vec<usize>>,
}

#[derive(Clone)]
struct Part {
    tree: Tree,
    maps: Vec<(usize, Vec<usize>, Vec<usize>)>,
}

/// Substitutes `pieces[j]` into the j-th leaf cell of `outer` (the tree part of μ).
pub fn graft(outer: &Tree, pieces: &[Tree]) -> Result<Graft, PastingError> {
    let sc = outer.scheme();
    if pieces.len() != sc.leaf_cells.len() {
        return Err(PastingError::LabelCount {
            expected: sc.leaf_cells.len(),
            found: pieces.len(),
        });
    }
    let n = outer.dim();
    let mut parts = Vec::with_capacity(pieces.len());
    for (j, (piece, &cell)) in pieces.iter().zip(&sc.leaf_cells).enumerate() {
        let d = sc.cells[cell].dim;
        if piece.dim() != d {
            return Err(PastingError::DimensionMismatch {
                label: format!("piece {j}"),
                expected: d,
                found: piece.dim(),
            });
        }
        let k = piece.node_count();
        parts.push(Part {
            tree: piece.lift_to(n)?,
            maps: vec![(j, (0..k).collect(), vec![0; k])],
        });
    }
    let junctions = outer.matrix().bot;
    let joined =
        recompose_with::<Part, PastingError>(&parts, &junctions, &mut |a: Part, b: Part, p| {
            let g = glue(&a.tree, &b.tree, p).map_err(|e| match e {
                TreeError::TruncationMismatch(l) => PastingError::BoundaryMismatch(format!(
                    "adjacent pieces disagree below level {l}"
                )),
                other => PastingError::Tree(other),
            })?;
            let mut maps = Vec::with_capacity(a.maps.len() + b.maps.len());
            for (j, nm, sh) in a.maps {
                maps.push((j, nm.iter().map(|&v| g.left[v]).collect(), sh));
            }
            for (j, nm, sh) in b.maps {
                let sh2 = nm
                    .iter()
                    .zip(&sh)
                    .map(|(&v, &s)| s + g.right_shift[v])
                    .collect();
                maps.push((j, nm.iter().map(|&v| g.right[v]).collect(), sh2));
            }
            Ok(Part { tree: g.tree, maps })
        })?;
    let scheme = joined.tree.scheme();
    let mut embeddings = vec![Vec::new(); pieces.len()];
    for (j, nm, sh) in joined.maps {
        embeddings[j] = pieces[j].scheme().embed(&scheme, &nm, &sh);
    }
    Ok(Graft {
        tree: joined.tree,
        scheme,
        embeddings,
    })
}

impl<L: Clone> Pasting<L> {
    pub fn new(shape: Tree, labels: Vec<L>) -> Result<Pasting<L>, PastingError> {
        let expected = shape.scheme().len();
        if labels.len() != expected {
            return Err(PastingError::LabelCount {
                expected,
                found: labels.len(),
            });
        }
        Ok(Pasting { shape, labels })
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn scheme(&self) -> Scheme {
        self.shape.scheme()
    }

    pub fn map<M>(&self, mut f: impl FnMut(&L) -> M) -> Pasting<M> {
        Pasting {
            shape: self.shape.clone(),
            labels: self.labels.iter().map(&mut f).collect(),
        }
    }

    pub fn try_map<M, E>(&self, mut f: impl FnMut(&L) -> Result<M, E>) -> Result<Pasting<M>, E> {
        Ok(Pasting {
            shape: self.shape.clone(),
            labels: self.labels.iter().map(&mut f).collect::<Result<_, _>>()?,
        })
    }

    pub fn leaf_labels(&self) -> Vec<L> {
        self.scheme()
            .leaf_cells
            .iter()
            .map(|&c| self.labels[c].clone())
            .collect()
    }

    /// The label of the top cell when the shape is linear.
    pub fn top_label(&self) -> Option<&L> {
        if self.shape.is_linear() {
            self.labels.last()
        } else {
            None
        }
    }

    pub fn degenerate(&self, n: usize) -> Result<Pasting<L>, PastingError> {
        Ok(Pasting {
            shape: self.shape.degenerate(n)?,
            labels: self.labels.clone(),
        })
    }

    /// Source or target at level `k`: truncated shape, top-level sectors taken from the chosen side.
    pub fn boundary(&self, k: usize, side: Side) -> Result<Pasting<L>, PastingError> {
        let dim = self.dim();
        if k > dim {
            return Err(TreeError::BadLevel { level: k, dim }.into());
        }
        if k == dim {
            return Ok(self.clone());
        }
        let sc = self.scheme();
        let mut labels = Vec::new();
        for (v, &d) in self.shape.depths().iter().enumerate() {
            let d = d as usize;
            if d < k {
                for s in 0..sc.sector_count(v) {
                    labels.push(self.labels[sc.cell_at(v, s)].clone());
                }
            } else if d == k {
                let s = match side {
                    Side::Source => 0,
                    Side::Target => sc.sector_count(v) - 1,
                };
                labels.push(self.labels[sc.cell_at(v, s)].clone());
            }
        }
        Ok(Pasting {
            shape: self.shape.truncate_to(k)?,
            labels,
        })
    }

    /// Unit diagram on a single cell: shape `1(dim)`, shell labels from `bd`.
    pub fn eta_with<E>(
        x: L,
        dim: usize,
        mut bd: impl FnMut(&L, Side) -> Result<L, E>,
    ) -> Result<Pasting<L>, E> {
        let mut srcs = vec![x.clone()];
        let mut tgts = Vec::new();
        let mut cur = x.clone();
        for _ in 0..dim {
            tgts.push(bd(&cur, Side::Target)?);
            cur = bd(&cur, Side::Source)?;
            srcs.push(cur.clone());
        }
        let mut labels = Vec::with_capacity(2 * dim + 1);
        for k in 0..dim {
            labels.push(srcs[dim - k].clone());
            labels.push(tgts[dim - 1 - k].clone());
        }
        labels.push(x);
        Ok(Pasting {
            shape: Tree::linear(dim),
            labels,
        })
    }
}

impl<L: Clone + PartialEq + std::fmt::Debug> Pasting<L> {
    /// Builds the total labelling from labels on the leaf cells, checking shell agreement.
    pub fn fill<E: From<PastingError>>(
        shape: Tree,
        leaves: Vec<L>,
        mut bd: impl FnMut(&L, Side) -> Result<L, E>,
    ) -> Result<Pasting<L>, E> {
        let sc = shape.scheme();
        if leaves.len() != sc.leaf_cells.len() {
            return Err(PastingError::LabelCount {
                expected: sc.leaf_cells.len(),
                found: leaves.len(),
            }
            .into());
        }
        let mut labels: Vec<Option<L>> = vec![None; sc.len()];
        for (&c, l) in sc.leaf_cells.iter().zip(leaves) {
            labels[c] = Some(l);
        }
        for c in (0..sc.len()).rev() {
            let cell = sc.cells[c];
            if cell.src.is_none() {
                continue;
            }
            let l = labels[c].clone().expect("higher cells are filled first");
            for (side, tgt) in [
                (Side::Source, cell.src.unwrap()),
                (Side::Target, cell.tgt.unwrap()),
            ] {
                let b = bd(&l, side)?;
                match &labels[tgt] {
                    None => labels[tgt] = Some(b),
                    Some(prev) if *prev == b => {}
                    Some(prev) => {
                        return Err(PastingError::BoundaryMismatch(format!(
                            "scheme cell {} gets {:?} and {:?}",
                            sc.position(tgt),
                            prev,
                            b
                        ))
                        .into())
                    }
                }
            }
        }
        Ok(Pasting {
            shape,
            labels: labels
                .into_iter()
                .map(|l| l.expect("every cell is a boundary or a leaf"))
                .collect(),
        })
    }

    /// Composite along level `p`; the shared shell must carry equal labels.
    pub fn star(&self, other: &Pasting<L>, p: usize) -> Result<Pasting<L>, PastingError> {
        let g = glue(&self.shape, &other.shape, p)?;
        let sc = g.tree.scheme();
        let left = self
            .scheme()
            .embed(&sc, &g.left, &vec![0; self.shape.node_count()]);
        let right = other.scheme().embed(&sc, &g.right, &g.right_shift);
        let mut labels: Vec<Option<L>> = vec![None; sc.len()];
        for (emb, src) in [(&left, self), (&right, other)] {
            for (i, &c) in emb.iter().enumerate() {
                place(&mut labels, c, &src.labels[i], &sc)?;
            }
        }
        Ok(Pasting {
            shape: g.tree,
            labels: labels.into_iter().map(Option::unwrap).collect(),
        })
    }
}

fn place<L: Clone + PartialEq + std::fmt::Debug>(
    labels: &mut [Option<L>],
    c: usize,
    l: &L,
    sc: &Scheme,
) -> Result<(), PastingError> {
    match &labels[c] {
        None => {
            labels[c] = Some(l.clone());
            Ok(())
        }
        Some(prev) if prev == l => Ok(()),
        Some(prev) => Err(PastingError::BoundaryMismatch(format!(
            "scheme cell {} gets {:?} and {:?}",
            sc.position(c),
            prev,
            l
        ))),
    }
}

/// Monad multiplication: grafts the leaf diagrams of `q` into its shape.
pub fn substitute<L: Clone + PartialEq + std::fmt::Debug>(
    q: &Pasting<Pasting<L>>,
) -> Result<Pasting<L>, PastingError> {
    let pieces = q.leaf_labels();
    let shapes: Vec<Tree> = pieces.iter().map(|p| p.shape.clone()).collect();
    let g = graft(&q.shape, &shapes)?;
    let mut labels: Vec<Option<L>> = vec![None; g.scheme.len()];
    for (piece, emb) in pieces.iter().zip(&g.embeddings) {
        for (i, &c) in emb.iter().enumerate() {
            place(&mut labels, c, &piece.labels[i], &g.scheme)?;
        }
    }
    let labels = labels
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| PastingError::BoundaryMismatch("grafted scheme not covered".into()))?;
    Ok(Pasting {
        shape: g.tree,
        labels,
    })
}

/// Every labelling of `shape` by candidates, enumerated leaf by leaf with shell propagation.
pub fn labelings<L: Clone + PartialEq>(
    shape: &Tree,
    candidates: &[L],
    dim_of: &dyn Fn(&L) -> usize,
    bd: &dyn Fn(&L, Side) -> Option<L>,
    limit: usize,
) -> Vec<Pasting<L>> {
    let sc = shape.scheme();
    let mut labels: Vec<Option<L>> = vec![None; sc.len()];
    let mut out = Vec::new();

    fn assign<L: Clone + PartialEq>(
        sc: &Scheme,
        labels: &mut Vec<Option<L>>,
        trail: &mut Vec<usize>,
        c: usize,
        l: L,
        bd: &dyn Fn(&L, Side) -> Option<L>,
    ) -> bool {
        match &labels[c] {
            Some(prev) => return *prev == l,
            None => {
                labels[c] = Some(l.clone());
                trail.push(c);
            }
        }
        let cell = sc.cells[c];
        if let (Some(s), Some(t)) = (cell.src, cell.tgt) {
            for (side, b) in [(Side::Source, s), (Side::Target, t)] {
                match bd(&l, side) {
                    Some(x) => {
                        if !assign(sc, labels, trail, b, x, bd) {
                            return false;
                        }
                    }
                    None => return false,
                }
            }
        }
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn rec<L: Clone + PartialEq>(
        sc: &Scheme,
        shape: &Tree,
        j: usize,
        labels: &mut Vec<Option<L>>,
        candidates: &[L],
        dim_of: &dyn Fn(&L) -> usize,
        bd: &dyn Fn(&L, Side) -> Option<L>,
        limit: usize,
        out: &mut Vec<Pasting<L>>,
    ) {
        if out.len() >= limit {
            return;
        }
        if j == sc.leaf_cells.len() {
            out.push(Pasting {
                shape: shape.clone(),
                labels: labels.iter().map(|l| l.clone().unwrap()).collect(),
            });
            return;
        }
        let c = sc.leaf_cells[j];
        for x in candidates.iter().filter(|x| dim_of(x) == sc.cells[c].dim) {
            let mut trail = Vec::new();
            if assign(sc, labels, &mut trail, c, x.clone(), bd) {
                rec(sc, shape, j + 1, labels, candidates, dim_of, bd, limit, out);
            }
            for t in trail {
                labels[t] = None;
            }
        }
    }

    rec(
        &sc,
        shape,
        0,
        &mut labels,
        candidates,
        dim_of,
        bd,
        limit,
        &mut out,
    );
    out
}

/// A pasting diagram over a finite globular set, labels are cell ids.
pub type PastingDiagram = Pasting<String>;

pub fn validate_diagram(x: &GlobularSet, p: &PastingDiagram) -> Result<(), PastingError> {
    let sc = p.scheme();
    if p.labels.len() != sc.len() {
        return Err(PastingError::LabelCount {
            expected: sc.len(),
            found: p.labels.len(),
        });
    }
    for (i, c) in sc.cells.iter().enumerate() {
        let l = &p.labels[i];
        let cell = x
            .cell(l)
            .ok_or_else(|| PastingError::UnknownCell(l.clone()))?;
        if cell.dim != c.dim {
            return Err(PastingError::DimensionMismatch {
                label: l.clone(),
                expected: c.dim,
                found: cell.dim,
            });
        }
        if let (Some(s), Some(t)) = (c.src, c.tgt) {
            if cell.src.as_deref() != Some(p.labels[s].as_str())
                || cell.tgt.as_deref() != Some(p.labels[t].as_str())
            {
                return Err(PastingError::BoundaryMismatch(format!(
                    "label {l} at {}",
                    sc.position(i)
                )));
            }
        }
    }
    Ok(())
}

pub fn eta(x: &GlobularSet, id: &str) -> Result<PastingDiagram, PastingError> {
    let dim = x
        .cell(id)
        .ok_or_else(|| PastingError::UnknownCell(id.to_string()))?
        .dim;
    Pasting::eta_with(id.to_string(), dim, |c: &String, side| {
        x.boundary(c, side)
            .map(str::to_string)
            .ok_or_else(|| PastingError::UnknownCell(c.clone()))
    })
}

pub fn pd_boundary(
    p: &PastingDiagram,
    k: usize,
    side: Side,
) -> Result<PastingDiagram, PastingError> {
    p.boundary(k, side)
}

pub fn map_labels(
    x: &GlobularSet,
    y: &GlobularSet,
    f: &std::collections::HashMap<String, String>,
    p: &PastingDiagram,
) -> Result<PastingDiagram, PastingError> {
    x.check_map(y, f)
        .map_err(|e| PastingError::BoundaryMismatch(e.to_string()))?;
    p.try_map(|l| {
        f.get(l)
            .cloned()
            .ok_or_else(|| PastingError::UnknownCell(l.clone()))
    })
}

/// Every diagram over `x` on a given shape.
pub fn diagrams_on(x: &GlobularSet, shape: &Tree, limit: usize) -> Vec<PastingDiagram> {
    let ids: Vec<String> = x.cells().iter().map(|c| c.id.clone()).collect();
    labelings(
        shape,
        &ids,
        &|l: &String| x.cell(l).map(|c| c.dim).unwrap_or(usize::MAX),
        &|l: &String, side| x.boundary(l, side).map(str::to_string),
        limit,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub shape: TreeMatrix,
    pub over: String,
    pub labels: BTreeMap<String, String>,
}

impl DiagramJson {
    pub fn from_diagram(p: &PastingDiagram, over: &str) -> DiagramJson {
        let sc = p.scheme();
        DiagramJson {
            shape: p.shape.matrix(),
            over: over.to_string(),
            labels: (0..sc.len())
                .map(|i| (sc.position(i), p.labels[i].clone()))
                .collect(),
        }
    }

    pub fn to_diagram(&self) -> Result<PastingDiagram, PastingError> {
        let shape = Tree::from_matrix(&self.shape)?;
        let sc = shape.scheme();
        let labels = (0..sc.len())
            .map(|i| {
                let pos = sc.position(i);
                self.labels
                    .get(&pos)
                    .cloned()
                    .ok_or(PastingError::UnknownCell(pos))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if labels.len() != self.labels.len() {
            return Err(PastingError::LabelCount {
                expected: labels.len(),
                found: self.labels.len(),
            });
        }
        Ok(Pasting { shape, labels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::globular::{validate_globular_set, GCell, RawGlobularSet};
    use crate::trees::TreeMatrix;

    fn chain() -> GlobularSet {
        validate_globular_set(RawGlobularSet {
            max_dim: 2,
            cells: vec![
                GCell::point("a"),
                GCell::point("b"),
                GCell::point("c"),
                GCell::arrow("f", 1, "a", "b"),
                GCell::arrow("g", 1, "b", "c"),
                GCell::arrow("f2", 1, "a", "b"),
                GCell::arrow("f3", 1, "a", "b"),
                GCell::arrow("e", 2, "f", "f2"),
                GCell::arrow("e2", 2, "f2", "f3"),
            ],
        })
        .unwrap()
    }

    fn tm(dim: usize, top: &[usize], bot: &[usize]) -> Tree {
        Tree::from_matrix(&TreeMatrix::new(dim, top, bot)).unwrap()
    }

    #[test]
    fn eta_labels_shell() {
        let x = chain();
        let p = eta(&x, "a").unwrap();
        assert_eq!(p.labels, vec!["a"]);
        let p = eta(&x, "f").unwrap();
        assert_eq!(p.labels, vec!["a", "b", "f"]);
        let p = eta(&x, "e").unwrap();
        assert_eq!(p.labels, vec!["a", "b", "f", "f2", "e"]);
        validate_diagram(&x, &p).unwrap();
    }

    #[test]
    fn boundaries() {
        let x = chain();
        let f = eta(&x, "f").unwrap();
        assert_eq!(
            pd_boundary(&f, 0, Side::Source).unwrap(),
            eta(&x, "a").unwrap()
        );
        let fg = f.star(&eta(&x, "g").unwrap(), 0).unwrap();
        assert_eq!(fg.shape.matrix(), TreeMatrix::new(1, &[1, 1], &[0]));
        assert_eq!(
            pd_boundary(&fg, 0, Side::Target).unwrap(),
            eta(&x, "c").unwrap()
        );
        let ee = eta(&x, "e")
            .unwrap()
            .star(&eta(&x, "e2").unwrap(), 1)
            .unwrap();
        assert_eq!(ee.shape, tm(2, &[2, 2], &[1]));
        assert_eq!(pd_boundary(&ee, 1, Side::Source).unwrap(), f);
        assert_eq!(
            pd_boundary(&ee, 1, Side::Target).unwrap(),
            eta(&x, "f3").unwrap()
        );
        validate_diagram(&x, &ee).unwrap();
    }

    #[test]
    fn star_rejects_mismatched_shell() {
        let x = chain();
        let f = eta(&x, "f").unwrap();
        assert!(matches!(
            f.star(&f, 0),
            Err(PastingError::BoundaryMismatch(_))
        ));
    }

    #[test]
    fn unit_laws() {
        let x = chain();
        let fg = eta(&x, "f")
            .unwrap()
            .star(&eta(&x, "g").unwrap(), 0)
            .unwrap();
        let right = fg.map(|l| eta(&x, l).unwrap());
        assert_eq!(substitute(&right).unwrap(), fg);
        let left = Pasting::eta_with(fg.clone(), 1, |p, side| p.boundary(0, side)).unwrap();
        assert_eq!(substitute(&left).unwrap(), fg);
    }

    #[test]
    fn terminal_grafting() {
        let two = tm(1, &[1, 1], &[0]);
        let g = graft(&two, &[two.clone(), two.clone()]).unwrap();
        assert_eq!(
            g.tree.matrix(),
            TreeMatrix::new(1, &[1, 1, 1, 1], &[0, 0, 0])
        );
        assert!(matches!(
            graft(&two, std::slice::from_ref(&two)),
            Err(PastingError::LabelCount { .. })
        ));
    }

    #[test]
    fn fill_matches_star() {
        let x = chain();
        let fg = eta(&x, "f")
            .unwrap()
            .star(&eta(&x, "g").unwrap(), 0)
            .unwrap();
        let filled = Pasting::fill(
            fg.shape.clone(),
            vec!["f".to_string(), "g".to_string()],
            |l: &String, s| {
                x.boundary(l, s)
                    .map(str::to_string)
                    .ok_or(PastingError::UnknownCell(l.clone()))
            },
        )
        .unwrap();
        assert_eq!(filled, fg);
        let bad = Pasting::fill(
            fg.shape.clone(),
            vec!["g".to_string(), "f".to_string()],
            |l: &String, s| {
                x.boundary(l, s)
                    .map(str::to_string)
                    .ok_or(PastingError::UnknownCell(l.clone()))
            },
        );
        assert!(matches!(bad, Err(PastingError::BoundaryMismatch(_))));
    }

    #[test]
    fn terminal_diagrams_are_trees() {
        let one = GlobularSet::terminal(2);
        for t in crate::trees::enumerate_trees(2, 3) {
            assert_eq!(diagrams_on(&one, &t, 10).len(), 1);
        }
    }

    #[test]
    fn json_round_trip() {
        let x = chain();
        let ee = eta(&x, "e")
            .unwrap()
            .star(&eta(&x, "e2").unwrap(), 1)
            .unwrap();
        let j = DiagramJson::from_diagram(&ee, "chain");
        let s = serde_json::to_string(&j).unwrap();
        let back: DiagramJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_diagram().unwrap(), ee);
    }
}
