//! Batanin trees: planar rooted trees of bounded height with an ambient dimension.
//!
//! A tree is stored as its preorder depth sequence (root at depth 0). The
//! two-row matrix form is a derived codec: the top row lists leaf heights from
//! left to right and the bottom row the heights of the meets of consecutive
//! leaves.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::globular::{validate_globular_set, GCell, GlobularSet, RawGlobularSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),
    #[error("bad level {level} for ambient dimension {dim}")]
    BadLevel { level: usize, dim: usize },
    #[error("truncations at level {0} differ")]
    TruncationMismatch(usize),
    #[error("ambient dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    dim: usize,
    depths: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeMatrix {
    pub dim: usize,
    pub top: Vec<usize>,
    pub bot: Vec<usize>,
}

impl TreeMatrix {
    pub fn new(dim: usize, top: &[usize], bot: &[usize]) -> TreeMatrix {
        TreeMatrix {
            dim,
            top: top.to_vec(),
            bot: bot.to_vec(),
        }
    }
}

impl PartialOrd for TreeMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TreeMatrix {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.dim, &self.top, &self.bot).cmp(&(other.dim, &other.top, &other.bot))
    }
}

impl fmt::Display for TreeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        write!(
            f,
            "tree{{{}; top=[{}]; bot=[{}]}}",
            self.dim,
            join(&self.top),
            join(&self.bot)
        )
    }
}

/// Child lists per node of a preorder depth sequence.
pub(crate) fn children_of(depths: &[u8]) -> Vec<Vec<usize>> {
    let mut children = vec![Vec::new(); depths.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (i, &d) in depths.iter().enumerate() {
        while stack.len() > d as usize {
            stack.pop();
        }
        if let Some(&p) = stack.last() {
            children[p].push(i);
        }
        stack.push(i);
    }
    children
}

impl Tree {
    /// The linear tree `1(n)`.
    pub fn linear(n: usize) -> Tree {
        Tree {
            dim: n,
            depths: (0..=n as u8).collect(),
        }
    }

    /// The root-only tree in ambient dimension `n`, i.e. `1(0)` degenerated to `n`.
    pub fn root_only(n: usize) -> Tree {
        Tree {
            dim: n,
            depths: vec![0],
        }
    }

    pub fn from_depths(dim: usize, depths: Vec<u8>) -> Result<Tree, TreeError> {
        if depths.first() != Some(&0) {
            return Err(TreeError::MalformedMatrix(
                "depth sequence must start at the root".into(),
            ));
        }
        for w in depths.windows(2) {
            if w[1] == 0 || w[1] > w[0] + 1 {
                return Err(TreeError::MalformedMatrix(format!(
                    "invalid depth step {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if depths.iter().any(|&d| d as usize > dim) {
            return Err(TreeError::MalformedMatrix(format!(
                "height exceeds ambient dimension {dim}"
            )));
        }
        Ok(Tree { dim, depths })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depths(&self) -> &[u8] {
        &self.depths
    }

    pub fn node_count(&self) -> usize {
        self.depths.len()
    }

    pub fn height(&self) -> usize {
        self.depths.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn is_root_only(&self) -> bool {
        self.depths.len() == 1
    }

    /// Whether this is `1(dim)`.
    pub fn is_linear(&self) -> bool {
        self.depths.len() == self.dim + 1 && self.height() == self.dim
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        children_of(&self.depths)
    }

    /// Leaf nodes in planar order.
    pub fn leaf_nodes(&self) -> Vec<usize> {
        let n = self.depths.len();
        (0..n)
            .filter(|&i| i + 1 == n || self.depths[i + 1] <= self.depths[i])
            .collect()
    }

    /// Number of leaves; the root-only tree has none.
    pub fn leaf_count(&self) -> usize {
        if self.is_root_only() {
            0
        } else {
            self.leaf_nodes().len()
        }
    }

    pub fn matrix(&self) -> TreeMatrix {
        if self.is_root_only() {
            return if self.dim == 0 {
                TreeMatrix::new(0, &[0], &[])
            } else {
                TreeMatrix::new(self.dim, &[], &[])
            };
        }
        let leaves = self.leaf_nodes();
        let top = leaves.iter().map(|&l| self.depths[l] as usize).collect();
        let bot = leaves[..leaves.len() - 1]
            .iter()
            .map(|&l| self.depths[l + 1] as usize - 1)
            .collect();
        TreeMatrix {
            dim: self.dim,
            top,
            bot,
        }
    }

    pub fn from_matrix(m: &TreeMatrix) -> Result<Tree, TreeError> {
        if m.top.is_empty() || m.top == [0] {
            if !m.bot.is_empty() {
                return Err(TreeError::MalformedMatrix(
                    "root-only form has an empty bottom row".into(),
                ));
            }
            return Ok(Tree::root_only(m.dim));
        }
        if m.bot.len() + 1 != m.top.len() {
            return Err(TreeError::MalformedMatrix(format!(
                "bottom row has {} entries, expected {}",
                m.bot.len(),
                m.top.len() - 1
            )));
        }
        if let Some(&i) = m.top.iter().find(|&&i| i > m.dim) {
            return Err(TreeError::MalformedMatrix(format!(
                "leaf height {i} exceeds {}",
                m.dim
            )));
        }
        for (j, &b) in m.bot.iter().enumerate() {
            if b >= m.top[j].min(m.top[j + 1]) {
                return Err(TreeError::MalformedMatrix(format!(
                    "meet height {b} is not below min({}, {})",
                    m.top[j],
                    m.top[j + 1]
                )));
            }
        }
        let mut depths: Vec<u8> = (0..=m.top[0] as u8).collect();
        for (j, &b) in m.bot.iter().enumerate() {
            depths.extend((b as u8 + 1)..=(m.top[j + 1] as u8));
        }
        Ok(Tree { dim: m.dim, depths })
    }

    fn restrict_to_level(&self, level: usize) -> Tree {
        Tree {
            dim: level,
            depths: self
                .depths
                .iter()
                .copied()
                .filter(|&d| d as usize <= level)
                .collect(),
        }
    }

    /// Removes the top `k` levels, giving a tree of ambient dimension `dim - k`.
    pub fn truncate(&self, k: usize) -> Result<Tree, TreeError> {
        if k > self.dim {
            return Err(TreeError::BadLevel {
                level: k,
                dim: self.dim,
            });
        }
        Ok(self.restrict_to_level(self.dim - k))
    }

    /// The truncation that keeps levels `0..=level`.
    pub fn truncate_to(&self, level: usize) -> Result<Tree, TreeError> {
        if level > self.dim {
            return Err(TreeError::BadLevel {
                level,
                dim: self.dim,
            });
        }
        Ok(self.restrict_to_level(level))
    }

    /// Same shape seen in the higher ambient dimension `n`.
    pub fn degenerate(&self, n: usize) -> Result<Tree, TreeError> {
        if n <= self.dim {
            return Err(TreeError::BadLevel {
                level: n,
                dim: self.dim,
            });
        }
        Ok(Tree {
            dim: n,
            depths: self.depths.clone(),
        })
    }

    /// Like `degenerate` but accepts `n == dim`.
    pub fn lift_to(&self, n: usize) -> Result<Tree, TreeError> {
        if n == self.dim {
            Ok(self.clone())
        } else {
            self.degenerate(n)
        }
    }

    /// Glues `other` to the right of `self` along their common `p`-truncation.
    pub fn star(&self, other: &Tree, p: usize) -> Result<Tree, TreeError> {
        Ok(merge(self, other, p, false)?.tree)
    }

    /// Leaf-wise factors (linear trees degenerated to the ambient dim) and junction levels.
    pub fn decompose(&self) -> Decomposition {
        let m = self.matrix();
        if self.is_root_only() {
            return Decomposition {
                factors: vec![self.clone()],
                junctions: Vec::new(),
            };
        }
        let factors = m
            .top
            .iter()
            .map(|&h| {
                Tree::linear(h)
                    .lift_to(self.dim)
                    .expect("height within dim")
            })
            .collect();
        Decomposition {
            factors,
            junctions: m.bot,
        }
    }

    pub fn scheme(&self) -> Scheme {
        Scheme::of(self)
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix())
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix())
    }
}

impl Serialize for Tree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.matrix().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = TreeMatrix::deserialize(d)?;
        Tree::from_matrix(&m).map_err(serde::de::Error::custom)
    }
}

/// Result of gluing two trees, with the node embeddings of both operands.
#[derive(Debug, Clone)]
pub struct Glue {
    pub tree: Tree,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Per right-operand node: how far its sectors shift in the result.
    pub right_shift: Vec<usize>,
}

pub fn glue(a: &Tree, b: &Tree, p: usize) -> Result<Glue, TreeError> {
    merge(a, b, p, true)
}

/// Gluing, recording the node embeddings only when `track` is set.
fn merge(a: &Tree, b: &Tree, p: usize, track: bool) -> Result<Glue, TreeError> {
    if a.dim != b.dim {
        return Err(TreeError::DimensionMismatch(a.dim, b.dim));
    }
    if p >= a.dim {
        return Err(TreeError::BadLevel {
            level: p,
            dim: a.dim,
        });
    }
    let level = p as u8;
    let keys_a = a.depths.iter().filter(|&&d| d <= level);
    let keys_b = b.depths.iter().filter(|&&d| d <= level);
    if !keys_a.eq(keys_b) {
        return Err(TreeError::TruncationMismatch(p));
    }
    let mut g = Glue {
        tree: Tree {
            dim: a.dim,
            depths: Vec::with_capacity(a.depths.len() + b.depths.len()),
        },
        left: Vec::new(),
        right: Vec::new(),
        right_shift: Vec::new(),
    };
    if track {
        g.left = vec![usize::MAX; a.depths.len()];
        g.right = vec![usize::MAX; b.depths.len()];
        g.right_shift = vec![0; b.depths.len()];
    }
    // Preorder merge: shared nodes of depth <= p appear in the same order in
    // both operands, and only depth-p nodes carry subtrees above the gluing level.
    let (mut i, mut j) = (0, 0);
    while i < a.depths.len() {
        let d = a.depths[i];
        if track {
            g.left[i] = g.tree.depths.len();
            g.right[j] = g.tree.depths.len();
        }
        g.tree.depths.push(d);
        let vb = j;
        i += 1;
        j += 1;
        if d == level {
            let mut children = 0;
            while i < a.depths.len() && a.depths[i] > level {
                if a.depths[i] == level + 1 {
                    children += 1;
                }
                if track {
                    g.left[i] = g.tree.depths.len();
                }
                g.tree.depths.push(a.depths[i]);
                i += 1;
            }
            if track {
                g.right_shift[vb] = children;
            }
            while j < b.depths.len() && b.depths[j] > level {
                if track {
                    g.right[j] = g.tree.depths.len();
                }
                g.tree.depths.push(b.depths[j]);
                j += 1;
            }
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub factors: Vec<Tree>,
    pub junctions: Vec<usize>,
}

impl Decomposition {
    /// Rebuilds the tree: split at the lowest junction, glue left to right.
    pub fn recompose(&self) -> Result<Tree, TreeError> {
        recompose_with(
            &self.factors,
            &self.junctions,
            &mut |a: Tree, b: Tree, p| a.star(&b, p),
        )
    }
}

/// Folds a sequence of items along junction levels: the lowest junction is the
/// outermost gluing, equal levels associate to the left.
pub fn recompose_with<T: Clone, E>(
    items: &[T],
    junctions: &[usize],
    join: &mut dyn FnMut(T, T, usize) -> Result<T, E>,
) -> Result<T, E> {
    assert_eq!(
        items.len(),
        junctions.len() + 1,
        "one junction between consecutive items"
    );
    if junctions.is_empty() {
        return Ok(items[0].clone());
    }
    let lo = *junctions.iter().min().unwrap();
    let mut acc: Option<T> = None;
    let mut start = 0;
    for cut in junctions
        .iter()
        .enumerate()
        .filter(|(_, &j)| j == lo)
        .map(|(i, _)| i + 1)
        .chain([items.len()])
    {
        let part = recompose_with(&items[start..cut], &junctions[start..cut - 1], join)?;
        acc = Some(match acc {
            None => part,
            Some(a) => join(a, part, lo)?,
        });
        start = cut;
    }
    Ok(acc.unwrap())
}

/// All trees of ambient dim `dim` with at most `max_leaves` leaves, ordered by matrix.
pub fn enumerate_trees(dim: usize, max_leaves: usize) -> Vec<Tree> {
    let mut out = vec![Tree::root_only(dim)];
    if dim == 0 {
        return out;
    }
    let mut top = Vec::new();
    let mut bot = Vec::new();
    fn rec(
        dim: usize,
        max: usize,
        top: &mut Vec<usize>,
        bot: &mut Vec<usize>,
        out: &mut Vec<Tree>,
    ) {
        if !top.is_empty() {
            out.push(
                Tree::from_matrix(&TreeMatrix {
                    dim,
                    top: top.clone(),
                    bot: bot.clone(),
                })
                .unwrap(),
            );
        }
        if top.len() == max {
            return;
        }
        if top.is_empty() {
            for h in 1..=dim {
                top.push(h);
                rec(dim, max, top, bot, out);
                top.pop();
            }
        } else {
            let last = *top.last().unwrap();
            for b in 0..last {
                for h in (b + 1)..=dim {
                    top.push(h);
                    bot.push(b);
                    rec(dim, max, top, bot, out);
                    top.pop();
                    bot.pop();
                }
            }
        }
    }
    rec(dim, max_leaves, &mut top, &mut bot, &mut out);
    out.sort_by_key(|t| t.matrix());
    out
}

/// One cell of a pasting scheme: sector `sector` of node `node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeCell {
    pub node: usize,
    pub sector: usize,
    pub dim: usize,
    pub src: Option<usize>,
    pub tgt: Option<usize>,
}

/// The globular pasting shape of a tree. A node with `r > 0` children has `r + 1`
/// sectors, a leaf has one; child `j` of `w` runs from sector `j` to sector `j + 1` of `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    pub cells: Vec<SchemeCell>,
    pub first: Vec<usize>,
    pub leaf_cells: Vec<usize>,
    pub paths: Vec<Vec<usize>>,
}

impl Scheme {
    pub fn of(t: &Tree) -> Scheme {
        let ch = t.children();
        let n = t.depths.len();
        let mut parent = vec![(usize::MAX, 0usize); n];
        for (w, cs) in ch.iter().enumerate() {
            for (j, &c) in cs.iter().enumerate() {
                parent[c] = (w, j);
            }
        }
        let mut first = Vec::with_capacity(n);
        let mut total = 0;
        for cs in &ch {
            first.push(total);
            total += cs.len() + 1;
        }
        let mut cells = Vec::with_capacity(total);
        let mut leaf_cells = Vec::new();
        let mut paths = vec![Vec::new(); n];
        for v in 0..n {
            if v > 0 {
                let (w, j) = parent[v];
                let mut p = paths[w].clone();
                p.push(j);
                paths[v] = p;
            }
            let (src, tgt) = if v == 0 {
                (None, None)
            } else {
                let (w, j) = parent[v];
                (Some(first[w] + j), Some(first[w] + j + 1))
            };
            if ch[v].is_empty() {
                leaf_cells.push(cells.len());
            }
            for s in 0..=ch[v].len() {
                cells.push(SchemeCell {
                    node: v,
                    sector: s,
                    dim: t.depths[v] as usize,
                    src,
                    tgt,
                });
            }
        }
        Scheme {
            cells,
            first,
            leaf_cells,
            paths,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_at(&self, node: usize, sector: usize) -> usize {
        self.first[node] + sector
    }

    pub fn sector_count(&self, node: usize) -> usize {
        let end = self
            .first
            .get(node + 1)
            .copied()
            .unwrap_or(self.cells.len());
        end - self.first[node]
    }

    pub fn counts(&self, dim: usize) -> Vec<usize> {
        let mut out = vec![0; dim + 1];
        for c in &self.cells {
            out[c.dim] += 1;
        }
        out
    }

    /// Canonical address `r.i.j/s` of a cell: child indices from the root, then the sector.
    pub fn position(&self, cell: usize) -> String {
        let c = &self.cells[cell];
        let mut s = String::from("r");
        for i in &self.paths[c.node] {
            s.push('.');
            s.push_str(&i.to_string());
        }
        s.push('/');
        s.push_str(&c.sector.to_string());
        s
    }

    pub fn find_position(&self, pos: &str) -> Option<usize> {
        (0..self.cells.len()).find(|&i| self.position(i) == pos)
    }

    /// Maps a cell of an operand's scheme into a glued scheme, given node map and sector shifts.
    pub fn embed(&self, target: &Scheme, node_map: &[usize], shift: &[usize]) -> Vec<usize> {
        self.cells
            .iter()
            .map(|c| target.cell_at(node_map[c.node], c.sector + shift[c.node]))
            .collect()
    }
}

pub fn pasting_scheme(t: &Tree) -> GlobularSet {
    let sc = t.scheme();
    let cells = (0..sc.len())
        .map(|i| {
            let c = sc.cells[i];
            GCell {
                id: sc.position(i),
                dim: c.dim,
                src: c.src.map(|j| sc.position(j)),
                tgt: c.tgt.map(|j| sc.position(j)),
            }
        })
        .collect();
    validate_globular_set(RawGlobularSet {
        max_dim: t.dim,
        cells,
    })
    .expect("pasting schemes are globular")
}

/// Parses the tree grammar: `1(n)`, `d[k,n](T)`, `T *[n,p] T`, `tree{n; top=[..]; bot=[..]}`.
pub fn parse_tree(text: &str) -> Result<Tree, TreeError> {
    let mut p = TreeParser {
        s: text.as_bytes(),
        pos: 0,
    };
    let t = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

struct TreeParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl TreeParser<'_> {
    fn err(&self, msg: &str) -> TreeError {
        TreeError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), TreeError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{tok}`")))
        }
    }

    fn num(&mut self) -> Result<usize, TreeError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected a number"))
    }

    fn list(&mut self) -> Result<Vec<usize>, TreeError> {
        self.expect("[")?;
        let mut out = Vec::new();
        if self.eat("]") {
            return Ok(out);
        }
        loop {
            out.push(self.num()?);
            if self.eat("]") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn expr(&mut self) -> Result<Tree, TreeError> {
        let mut acc = self.atom()?;
        while self.eat("*") {
            self.expect("[")?;
            let n = self.num()?;
            self.expect(",")?;
            let p = self.num()?;
            self.expect("]")?;
            let rhs = self.atom()?;
            if acc.dim != n {
                return Err(TreeError::DimensionMismatch(acc.dim, n));
            }
            acc = acc.star(&rhs, p)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Tree, TreeError> {
        if self.eat("(") {
            let t = self.expr()?;
            self.expect(")")?;
            return Ok(t);
        }
        if self.eat("tree{") {
            let dim = self.num()?;
            self.expect(";")?;
            self.expect("top")?;
            self.expect("=")?;
            let top = self.list()?;
            self.expect(";")?;
            self.expect("bot")?;
            self.expect("=")?;
            let bot = self.list()?;
            self.expect("}")?;
            return Tree::from_matrix(&TreeMatrix { dim, top, bot });
        }
        if self.eat("d[") {
            let k = self.num()?;
            self.expect(",")?;
            let n = self.num()?;
            self.expect("]")?;
            self.expect("(")?;
            let t = self.expr()?;
            self.expect(")")?;
            if t.dim != k {
                return Err(TreeError::DimensionMismatch(t.dim, k));
            }
            return t.degenerate(n);
        }
        if self.eat("1(") {
            let n = self.num()?;
            self.expect(")")?;
            return Ok(Tree::linear(n));
        }
        Err(self.err("expected a tree"))
    }
}
