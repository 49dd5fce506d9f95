//! Acceptance checks shared by the acceptance runner and the integration tests.
//! Each returns a short summary on success and a description of the first failure otherwise.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use globop::coend::{
    check_serial, classifying_cell, coend_boundary, cw_image, lift_contraction, make_mu, CoendEnv,
    CoendError, Variant,
};
use globop::collections::{binary_complex_pushout, build_complex, coface, Coface};
use globop::contraction::{
    classes_of_dim, find_contraction, free_operad, has_loop, is_root, verify_property,
};
use globop::globular::{validate_globular_set, GCell, GlobularSet, RawGlobularSet};
use globop::operads::{GenKind, Operad, Property};
use globop::pasting::{diagrams_on, eta, labelings, substitute, Pasting, PastingDiagram};
use globop::trees::{enumerate_trees, parse_tree, Tree, TreeMatrix};
use globop::Side;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub const X: &str = "gamma(gamma(F1; gamma(mu(1,0); u1 *[1,0] mu(1,0))); F1 *[1,0] F1 *[1,0] F1)";
pub const Y: &str = "gamma(gamma(F1; gamma(mu(1,0); mu(1,0) *[1,0] u1)); F1 *[1,0] F1 *[1,0] F1)";
pub const COHERENCE: &str = "gamma([gamma(F1; gamma(mu(1,0); u1 *[1,0] mu(1,0))); gamma(F1; gamma(mu(1,0); mu(1,0) *[1,0] u1))]; r[1,2](F1) *[2,0] r[1,2](F1) *[2,0] r[1,2](F1))";

pub fn worked_example() -> Check {
    let po = binary_complex_pushout(1, 0, 2).map_err(err)?;
    let mut op = Operad::new(&po.collection, Property::C, 2, 4);
    let x = op.parse(X).map_err(err)?;
    let y = op.parse(Y).map_err(err)?;
    let (tx, cx) = op.term_arity(x);
    let expected = TreeMatrix::new(1, &[1, 1, 1], &[0, 0]);
    ensure!(tx.matrix() == expected, "arity of x is {}", tx.matrix());
    ensure!(
        op.term_arity(y) == (tx.clone(), cx.clone()),
        "x and y have different arities"
    );
    ensure!(cx == "1", "source colour {cx}");
    ensure!(
        op.out_colour(x) == "3" && op.out_colour(y) == "3",
        "output colour {}",
        op.out_colour(x)
    );
    ensure!(op.is_parallel(x, y), "x and y are not parallel");
    let c = op.parse(COHERENCE).map_err(err)?;
    ensure!(
        op.term_boundary(c, Side::Source).map_err(err)? == x,
        "coherence source differs from x"
    );
    ensure!(
        op.term_boundary(c, Side::Target).map_err(err)? == y,
        "coherence target differs from y"
    );
    ensure!(
        op.info(c).arity == tx.degenerate(2).map_err(err)?,
        "coherence arity {}",
        op.info(c).arity
    );
    let found = find_contraction(&mut op, x, y).map_err(err)?;
    ensure!(
        found == Some(c),
        "contraction search returned {:?}",
        found.map(|f| op.print(f))
    );
    Ok(format!(
        "arity {expected}, colours 1 -> 3, coherence cell found"
    ))
}

/// One row of the generator table: dim, source, target, arity matrix, arity colour, output colour.
type Row = (
    usize,
    Option<String>,
    Option<String>,
    TreeMatrix,
    String,
    String,
);

fn linear(m: usize) -> TreeMatrix {
    TreeMatrix::new(m, &[m], &[])
}

/// Root-only trees of positive dimension have empty rows.
fn root(p: usize) -> TreeMatrix {
    TreeMatrix::new(p, &[], &[])
}

/// The generator table of `C^n` up to `max_dim`, written out from the defining lists.
pub fn expected_complex(n: usize, max_dim: usize) -> BTreeMap<String, Row> {
    let mut t = BTreeMap::new();
    let bd = |m: usize, s: String| {
        if m == 0 {
            (None, None)
        } else {
            (Some(s.clone()), Some(s))
        }
    };
    let families: &[(&str, &str, &str)] = if n == 0 {
        &[("u", "mu", "1")]
    } else {
        &[("u", "mu", "1"), ("v", "nu", "2")]
    };
    for &(unit, comp, colour) in families {
        for m in 0..=max_dim {
            let (s, g) = bd(m, format!("{unit}{}", m.saturating_sub(1)));
            t.insert(
                format!("{unit}{m}"),
                (m, s, g, linear(m), colour.to_string(), colour.to_string()),
            );
            for p in 0..m {
                let b = if p + 1 == m {
                    format!("{unit}{p}")
                } else {
                    format!("{comp}({},{p})", m - 1)
                };
                let arity = TreeMatrix::new(m, &[m, m], &[p]);
                t.insert(
                    format!("{comp}({m},{p})"),
                    (
                        m,
                        Some(b.clone()),
                        Some(b),
                        arity,
                        colour.into(),
                        colour.into(),
                    ),
                );
            }
        }
    }
    let functor = |t: &mut BTreeMap<String, Row>, f: &dyn Fn(usize) -> String| {
        for m in 0..=max_dim {
            let (s, g) = if m == 0 {
                (None, None)
            } else {
                (Some(f(m - 1)), Some(f(m - 1)))
            };
            t.insert(f(m), (m, s, g, linear(m), "1".into(), "2".into()));
        }
    };
    match n {
        0 => {}
        1 => functor(&mut t, &|m| format!("F{m}")),
        2 => {
            functor(&mut t, &|m| format!("F{m}"));
            functor(&mut t, &|m| format!("H{m}"));
            if max_dim >= 1 {
                t.insert(
                    "tau".into(),
                    (
                        1,
                        Some("F0".into()),
                        Some("H0".into()),
                        root(1),
                        "1".into(),
                        "2".into(),
                    ),
                );
            }
        }
        _ => {
            functor(&mut t, &|m| format!("alpha0({m})"));
            functor(&mut t, &|m| format!("beta0({m})"));
            for p in 1..=(n - 2).min(max_dim) {
                let (s, g) = if p == 1 {
                    ("alpha0(0)".to_string(), "beta0(0)".to_string())
                } else {
                    (format!("alpha({})", p - 1), format!("beta({})", p - 1))
                };
                for name in [format!("alpha({p})"), format!("beta({p})")] {
                    t.insert(
                        name,
                        (
                            p,
                            Some(s.clone()),
                            Some(g.clone()),
                            root(p),
                            "1".into(),
                            "2".into(),
                        ),
                    );
                }
            }
            if n - 1 <= max_dim {
                let (s, g) = (format!("alpha({})", n - 2), format!("beta({})", n - 2));
                t.insert(
                    format!("xi{n}"),
                    (n - 1, Some(s), Some(g), root(n - 1), "1".into(), "2".into()),
                );
            }
        }
    }
    t
}

/// Images of the listed cofaces `C^n -> C^{n+1}` on a named cell.
fn expected_coface(n: usize, side: Coface, name: &str) -> String {
    let kappa = side == Coface::Kappa;
    match n {
        0 if kappa => {
            if let Some(rest) = name.strip_prefix("mu") {
                format!("nu{rest}")
            } else if let Some(rest) = name.strip_prefix('u') {
                format!("v{rest}")
            } else {
                name.into()
            }
        }
        1 if kappa => name
            .strip_prefix('F')
            .map(|m| format!("H{m}"))
            .unwrap_or_else(|| name.into()),
        2 => {
            if name == "tau" {
                return if kappa { "beta(1)" } else { "alpha(1)" }.to_string();
            }
            if let Some(m) = name.strip_prefix('F') {
                format!("alpha0({m})")
            } else if let Some(m) = name.strip_prefix('H') {
                format!("beta0({m})")
            } else {
                name.into()
            }
        }
        _ if n >= 3 && name == format!("xi{n}") => {
            format!("{}({})", if kappa { "beta" } else { "alpha" }, n - 1)
        }
        _ => name.into(),
    }
}

pub fn generator_tables() -> Check {
    let max_dim = 3;
    for n in 0..=3 {
        let c = build_complex(n, max_dim);
        let found: BTreeMap<String, Row> = c
            .cells()
            .iter()
            .map(|cell| {
                let row = (
                    cell.dim,
                    cell.src.clone(),
                    cell.tgt.clone(),
                    cell.arity.tree.matrix(),
                    cell.arity.colour.clone(),
                    cell.colour.clone(),
                );
                (cell.name.clone(), row)
            })
            .collect();
        let expected = expected_complex(n, max_dim);
        let names: BTreeSet<&String> = found.keys().chain(expected.keys()).collect();
        for name in names {
            ensure!(
                found.get(name) == expected.get(name),
                "C^{n} cell {name}: built {:?}, listed {:?}",
                found.get(name),
                expected.get(name)
            );
        }
    }
    let c0 = build_complex(0, max_dim).counts();
    ensure!(c0 == vec![1, 2, 3, 4], "C^0 counts {c0:?}");
    let c2 = build_complex(2, max_dim).counts();
    ensure!(c2[1] == 7, "C^2 has {} 1-cells", c2[1]);
    let mut images = 0;
    for n in 0..=3 {
        let (src, tgt) = (build_complex(n, max_dim), build_complex(n + 1, max_dim));
        for side in [Coface::Delta, Coface::Kappa] {
            let f = coface(n, side, max_dim);
            f.check(&src, &tgt)
                .map_err(|e| format!("coface {n} {side:?}: {e}"))?;
            for cell in src.cells() {
                let want = expected_coface(n, side, &cell.name);
                ensure!(
                    f.apply(&cell.name) == Some(want.as_str()),
                    "coface {n} {side:?} sends {} to {:?}, listed {want}",
                    cell.name,
                    f.apply(&cell.name)
                );
                images += 1;
            }
        }
    }
    Ok(format!(
        "C^0..C^3 tables match, {images} coface images checked"
    ))
}

pub fn coglobular_identities() -> Check {
    let max_dim = 3;
    let mut checked = 0;
    for n in 0..=3 {
        let src = build_complex(n, max_dim);
        for first in [Coface::Delta, Coface::Kappa] {
            let a = coface(n, first, max_dim).then(&coface(n + 1, Coface::Delta, max_dim));
            let b = coface(n, first, max_dim).then(&coface(n + 1, Coface::Kappa, max_dim));
            for cell in src.cells() {
                ensure!(
                    a.apply(&cell.name) == b.apply(&cell.name),
                    "n={n} {first:?}: {} goes to {:?} and {:?}",
                    cell.name,
                    a.apply(&cell.name),
                    b.apply(&cell.name)
                );
                checked += 1;
            }
            for colour in src.colours() {
                ensure!(
                    a.colour(colour) == b.colour(colour),
                    "n={n}: colour {colour} differs"
                );
            }
        }
    }
    Ok(format!("{checked} cells agree"))
}

/// A random globular set with at most six cells and dimension at most two.
pub fn random_globular_set(rng: &mut ChaCha8Rng) -> GlobularSet {
    let points = rng.gen_range(1..=2);
    let mut cells: Vec<GCell> = (0..points)
        .map(|i| GCell::point(&format!("x{i}")))
        .collect();
    let arrows = rng.gen_range(1..=3);
    for i in 0..arrows {
        let s = rng.gen_range(0..points);
        let t = rng.gen_range(0..points);
        cells.push(GCell::arrow(
            &format!("a{i}"),
            1,
            &format!("x{s}"),
            &format!("x{t}"),
        ));
    }
    let mut k = 0;
    while cells.len() < 6 && rng.gen_bool(0.7) {
        let ones: Vec<GCell> = cells.iter().filter(|c| c.dim == 1).cloned().collect();
        let a = ones.choose(rng).unwrap();
        let parallel: Vec<&GCell> = ones
            .iter()
            .filter(|b| b.src == a.src && b.tgt == a.tgt)
            .collect();
        let b = parallel.choose(rng).unwrap();
        cells.push(GCell::arrow(&format!("h{k}"), 2, &a.id, &b.id));
        k += 1;
    }
    validate_globular_set(RawGlobularSet { max_dim: 2, cells }).expect("random set is globular")
}

fn small_shapes(max_cells: usize) -> Vec<Tree> {
    (0..=2)
        .flat_map(|d| enumerate_trees(d, 4))
        .filter(|t| t.scheme().len() <= max_cells)
        .collect()
}

fn random_diagram(
    rng: &mut ChaCha8Rng,
    x: &GlobularSet,
    shapes: &[Tree],
) -> Option<PastingDiagram> {
    let shape = shapes.choose(rng)?;
    diagrams_on(x, shape, 64).choose(rng).cloned()
}

fn nested_boundary<L: Clone>(p: &Pasting<L>, side: Side) -> Option<Pasting<L>> {
    let d = p.dim();
    if d == 0 {
        None
    } else {
        p.boundary(d - 1, side).ok()
    }
}

/// The unit diagram on a diagram, one level up.
fn unit_of<L: Clone>(p: Pasting<L>) -> Pasting<Pasting<L>> {
    let d = p.dim();
    Pasting::eta_with(p, d, |q: &Pasting<L>, side| q.boundary(q.dim() - 1, side))
        .expect("boundaries of a diagram")
}

/// Random diagrams whose labels are drawn from `pool`, a set of diagrams closed under boundaries.
fn random_nested<L: Clone + PartialEq>(
    rng: &mut ChaCha8Rng,
    pool: &[Pasting<L>],
    shapes: &[Tree],
) -> Option<Pasting<Pasting<L>>> {
    let shape = shapes.choose(rng)?;
    let mut candidates = pool.to_vec();
    candidates.shuffle(rng);
    labelings(
        shape,
        &candidates,
        &|p: &Pasting<L>| p.dim(),
        &|p, side| nested_boundary(p, side),
        16,
    )
    .choose(rng)
    .cloned()
}

/// Closes a list of diagrams under boundaries.
fn boundary_closure<L: Clone + PartialEq>(mut pool: Vec<Pasting<L>>) -> Vec<Pasting<L>> {
    let mut i = 0;
    while i < pool.len() {
        for side in [Side::Source, Side::Target] {
            if let Some(b) = nested_boundary(&pool[i], side) {
                if !pool.contains(&b) {
                    pool.push(b);
                }
            }
        }
        i += 1;
    }
    pool
}

pub fn monad_laws(samples: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = small_shapes(8);
    let pool_shapes = small_shapes(4);
    let (mut units, mut assoc, mut attempts) = (0, 0, 0);
    while (units < samples || assoc < samples) && attempts < 50 * samples {
        attempts += 1;
        let x = random_globular_set(&mut rng);
        let Some(p) = random_diagram(&mut rng, &x, &shapes) else {
            continue;
        };
        let right = p.map(|l| eta(&x, l).expect("label is a cell"));
        ensure!(
            substitute(&right).map_err(err)? == p,
            "right unit fails on {:?}",
            p.labels
        );
        let left = unit_of(p.clone());
        ensure!(
            substitute(&left).map_err(err)? == p,
            "left unit fails on {:?}",
            p.labels
        );
        units += 1;

        let mut level1: Vec<PastingDiagram> = (0..12)
            .filter_map(|_| random_diagram(&mut rng, &x, &pool_shapes))
            .collect();
        level1.extend(x.cells().iter().map(|c| eta(&x, &c.id).expect("cell")));
        let level1 = boundary_closure(level1);
        let mut level2: Vec<Pasting<PastingDiagram>> = (0..12)
            .filter_map(|_| random_nested(&mut rng, &level1, &pool_shapes))
            .collect();
        level2.extend(level1.iter().cloned().map(unit_of));
        let level2 = boundary_closure(level2);
        let Some(r) = random_nested(&mut rng, &level2, &shapes) else {
            continue;
        };
        let inner_first = r.try_map(substitute).map_err(err)?;
        let a = substitute(&inner_first).map_err(err)?;
        let b = substitute(&substitute(&r).map_err(err)?).map_err(err)?;
        ensure!(
            a == b,
            "associativity fails: {:?} vs {:?}",
            a.labels,
            b.labels
        );
        assoc += 1;
    }
    ensure!(
        units >= samples && assoc >= samples,
        "only {units} unit and {assoc} associativity samples"
    );
    Ok(format!("{units} unit and {assoc} associativity samples"))
}

/// Indices of two trees and their gluing.
type Glued = (usize, usize, Tree);

/// Leaf data of a tree relative to gluing at level `p`: gluing two trees with the same
/// p-truncation merges their shared leaves below `p` and their bare nodes at depth `p`.
#[derive(Clone, Copy)]
struct GlueProfile {
    leaves: usize,
    shallow: usize,
    slots: usize,
    bare: u64,
}

impl GlueProfile {
    fn of(t: &Tree, p: usize) -> GlueProfile {
        let ds = t.depths();
        let level = p as u8;
        let (mut shallow, mut bare, mut slot) = (0, 0u64, 0);
        for (i, &d) in ds.iter().enumerate() {
            let is_leaf = i + 1 == ds.len() || ds[i + 1] <= d;
            if d < level && is_leaf {
                shallow += 1;
            }
            if d == level {
                if is_leaf {
                    bare |= 1 << slot;
                }
                slot += 1;
            }
        }
        GlueProfile {
            leaves: t.leaf_count().max(1),
            shallow,
            slots: slot,
            bare,
        }
    }

    /// Largest partner leaf count that can still glue within `max` leaves.
    fn partner_limit(&self, max: usize) -> usize {
        (max + self.shallow + self.slots).saturating_sub(self.leaves)
    }

    /// Leaves of the glued tree, counting the root-only tree as one leaf.
    fn glued_leaves(&self, other: &GlueProfile) -> usize {
        self.leaves + other.leaves - self.shallow - (self.bare | other.bare).count_ones() as usize
    }
}

pub fn tree_calculus(max_dim: usize, max_leaves: usize) -> Check {
    let mut all = Vec::new();
    for d in 0..=max_dim {
        all.extend(enumerate_trees(d, max_leaves));
    }
    for t in &all {
        let m = t.matrix();
        ensure!(
            Tree::from_matrix(&m).map_err(err)? == *t,
            "matrix round trip fails on {m}"
        );
        ensure!(
            parse_tree(&t.to_string()).map_err(err)? == *t,
            "text round trip fails on {m}"
        );
        let j: TreeMatrix =
            serde_json::from_str(&serde_json::to_string(&m).map_err(err)?).map_err(err)?;
        ensure!(j == m, "json round trip fails on {m}");
        ensure!(
            t.decompose().recompose().map_err(err)? == *t,
            "recomposition fails on {m}"
        );
    }
    let (mut assoc, mut interchange) = (0usize, 0usize);
    for d in 1..=max_dim {
        let trees: Vec<&Tree> = all.iter().filter(|t| t.dim() == d).collect();
        // pairs[p]: every `a ⋆_p b` within the leaf bound, as (a, b, a ⋆_p b).
        let mut pairs: Vec<Vec<Glued>> = vec![Vec::new(); d];
        let mut buckets: Vec<HashMap<Tree, Vec<usize>>> = vec![HashMap::new(); d];
        for p in 0..d {
            let prof: Vec<GlueProfile> = trees.iter().map(|t| GlueProfile::of(t, p)).collect();
            for (i, t) in trees.iter().enumerate() {
                buckets[p]
                    .entry(t.truncate_to(p).map_err(err)?)
                    .or_default()
                    .push(i);
            }
            for members in buckets[p].values_mut() {
                members.sort_by_key(|&i| prof[i].leaves);
                for &i in members.iter() {
                    let limit = prof[i].partner_limit(max_leaves);
                    let fits = |&&j: &&usize| prof[i].glued_leaves(&prof[j]) <= max_leaves;
                    for &j in members
                        .iter()
                        .take_while(|&&j| prof[j].leaves <= limit)
                        .filter(fits)
                    {
                        let ab = trees[i]
                            .star(trees[j], p)
                            .map_err(|e| format!("star undefined: {e}"))?;
                        ensure!(
                            ab.leaf_count().max(1) == prof[i].glued_leaves(&prof[j]),
                            "leaf prediction fails on {} and {}",
                            trees[i],
                            trees[j]
                        );
                        pairs[p].push((i, j, ab));
                    }
                }
            }
            for (i, j, ab) in &pairs[p] {
                let key = ab.truncate_to(p).map_err(err)?;
                let pab = GlueProfile::of(ab, p);
                let limit = pab.partner_limit(max_leaves);
                let candidates = buckets[p][&key]
                    .iter()
                    .take_while(|&&k| prof[k].leaves <= limit);
                for &k in candidates.filter(|&&k| pab.glued_leaves(&prof[k]) <= max_leaves) {
                    let lhs = ab.star(trees[k], p).map_err(err)?;
                    let rhs = trees[*i]
                        .star(&trees[*j].star(trees[k], p).map_err(err)?, p)
                        .map_err(err)?;
                    ensure!(
                        lhs == rhs,
                        "associativity fails at level {p}: {} vs {}",
                        lhs,
                        rhs
                    );
                    assoc += 1;
                }
            }
        }
        for (q, level_pairs) in pairs.iter().enumerate().skip(1) {
            for p in 0..q {
                let mut by_key: HashMap<Tree, Vec<(GlueProfile, &Glued)>> = HashMap::new();
                for e in level_pairs {
                    by_key
                        .entry(e.2.truncate_to(p).map_err(err)?)
                        .or_default()
                        .push((GlueProfile::of(&e.2, p), e));
                }
                for group in by_key.values_mut() {
                    group.sort_by_key(|g| g.0.leaves);
                    for (p1, (a, b, ab)) in group.iter() {
                        let limit = p1.partner_limit(max_leaves);
                        let candidates = group.iter().take_while(|(p2, _)| p2.leaves <= limit);
                        for (_, (c, e, ce)) in
                            candidates.filter(|(p2, _)| p1.glued_leaves(p2) <= max_leaves)
                        {
                            let lhs = ab.star(ce, p).map_err(err)?;
                            let ac = trees[*a].star(trees[*c], p).map_err(err)?;
                            let be = trees[*b].star(trees[*e], p).map_err(err)?;
                            let rhs = ac
                                .star(&be, q)
                                .map_err(|x| format!("interchange side undefined: {x}"))?;
                            ensure!(
                                lhs == rhs,
                                "interchange fails at ({p},{q}): {} vs {}",
                                lhs,
                                rhs
                            );
                            interchange += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{} trees, {assoc} associativity triples, {interchange} interchange quadruples",
        all.len()
    ))
}

pub fn strict_collapse() -> Check {
    let op = free_operad(&build_complex(0, 2), Property::SU, 2, 3).map_err(err)?;
    let mut total = 0;
    for d in 0..=2 {
        let mut per_arity: BTreeMap<String, usize> = BTreeMap::new();
        for rep in classes_of_dim(&op, d).keys() {
            *per_arity
                .entry(op.info(*rep).arity.to_string())
                .or_default() += 1;
        }
        if let Some((arity, n)) = per_arity.iter().find(|(_, &n)| n != 1) {
            return Err(format!("dim {d}: arity {arity} has {n} classes"));
        }
        let trees: BTreeSet<String> = enumerate_trees(d, 3)
            .iter()
            .map(|t| t.to_string())
            .collect();
        let found: BTreeSet<String> = per_arity.into_keys().collect();
        ensure!(
            found == trees,
            "dim {d}: classes cover {} arities, {} trees enumerated",
            found.len(),
            trees.len()
        );
        total += trees.len();
    }
    Ok(format!("one class for each of {total} arity trees"))
}

pub fn saturation_audit() -> Check {
    let mut op = free_operad(&build_complex(0, 2), Property::C, 2, 3).map_err(err)?;
    let audit = verify_property(&mut op).map_err(err)?;
    ensure!(
        audit.is_clean(),
        "{} violations, first {:?}",
        audit.violations.len(),
        audit.violations.first()
    );
    ensure!(audit.pairs_checked > 0, "no pairs checked");
    let op = free_operad(&build_complex(2, 2), Property::C, 2, 3).map_err(err)?;
    let mut roots = 0;
    for (_, g) in op.gens() {
        if let GenKind::Con(x, y) = g.kind {
            if op.dim(x) >= 1 && is_root(&op, x).map_err(err)? {
                roots += 1;
                ensure!(
                    has_loop(&op, x, y).map_err(err)?,
                    "root contraction without loop: {}",
                    op.print(x)
                );
            }
        }
    }
    let tau = op.base_gen("tau").ok_or("no tau")?;
    ensure!(
        op.gens()
            .all(|(_, g)| !matches!(g.kind, GenKind::Con(x, _) if op.as_bare(x) == Some(tau))),
        "a contraction starts at tau"
    );
    Ok(format!(
        "{} pairs clean on C^0; {roots} root contractions on C^2, all with loops",
        audit.pairs_checked
    ))
}

pub fn composition_system() -> Check {
    let mut env = CoendEnv::new(Property::C, 2, 4);
    let mut cells = 0;
    for (n, p, v) in [
        (1, 0, Variant::Left),
        (2, 0, Variant::Left),
        (2, 0, Variant::Right),
        (2, 1, Variant::Left),
    ] {
        let cell = make_mu(&mut env, n, p, v).map_err(err)?;
        let violations = check_serial(&mut env, &cell).map_err(err)?;
        ensure!(
            violations.is_empty(),
            "mu({n},{p}) {v:?}: {}",
            violations[0]
        );
        cells += 1;
    }
    let c0 = build_complex(0, 2);
    let mut images = 0;
    for cell in c0.cells().iter().filter(|c| c.dim >= 1) {
        images += 1;
        let image = cw_image(&mut env, &cell.name).map_err(err)?;
        for side in [Side::Source, Side::Target] {
            let b = coend_boundary(&image, side).map_err(err)?;
            let name = c0.boundary(&cell.name, side).ok_or("missing boundary")?;
            ensure!(
                b == cw_image(&mut env, name).map_err(err)?,
                "{} {side:?} boundary does not commute",
                cell.name
            );
        }
    }
    Ok(format!(
        "{cells} composition cells serial, boundaries of {images} images commute"
    ))
}

pub fn contraction_lifting() -> Check {
    let t = Tree::linear(1).star(&Tree::linear(1), 0).map_err(err)?;
    let mut env = CoendEnv::new(Property::C, 2, 4);
    let op = &mut env.tree_operad(&t).map_err(err)?.operad;
    let x = op.parse(X).map_err(err)?;
    let y = op.parse(Y).map_err(err)?;
    let coherence = op.parse(COHERENCE).map_err(err)?;
    let minus = classifying_cell(&mut env, &t, x).map_err(err)?;
    let plus = classifying_cell(&mut env, &t, y).map_err(err)?;
    let lift = lift_contraction(&mut env, &minus, &plus).map_err(err)?;
    ensure!(lift.n == 2, "lift at level {}", lift.n);
    let violations = check_serial(&mut env, &lift).map_err(err)?;
    ensure!(
        violations.is_empty(),
        "lift is not serial: {}",
        violations[0]
    );
    let source = env.source_operad(&lift.source, 2).map_err(err)?;
    let top = source.base_gen("e^").ok_or("classifier has no top cell")?;
    let image = lift.top().images.get(&top).copied();
    ensure!(
        image == Some(coherence),
        "principal image differs from the coherence cell"
    );

    let mut control = CoendEnv::new(Property::Id, 2, 4);
    let op = &mut control.tree_operad(&t).map_err(err)?.operad;
    let (x, y) = (op.parse(X).map_err(err)?, op.parse(Y).map_err(err)?);
    let minus = classifying_cell(&mut control, &t, x).map_err(err)?;
    let plus = classifying_cell(&mut control, &t, y).map_err(err)?;
    match lift_contraction(&mut control, &minus, &plus) {
        Err(CoendError::ContractionUnavailable(_)) => {}
        other => return Err(format!("control over Id gave {:?}", other.map(|c| c.n))),
    }
    Ok("serial level-2 cell with the coherence cell as principal image; Id control refused".into())
}

/// Binary bracketings of `width` leaves drawn from `leaf_kinds`.
pub fn magma_terms(width: usize, leaf_kinds: &[&str]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    if width == 1 {
        out.extend(leaf_kinds.iter().map(|s| s.to_string()));
    }
    for left in 1..width {
        for a in magma_terms(left, leaf_kinds) {
            for b in magma_terms(width - left, leaf_kinds) {
                out.insert(format!("({a}.{b})"));
            }
        }
    }
    out
}

pub fn magmatic_instances() -> Check {
    let mut summary = Vec::new();
    for (property, kinds) in [(Property::Id, &["x"][..]), (Property::IdU, &["x", "e"][..])] {
        let mut op = free_operad(&build_complex(0, 1), property, 1, 3).map_err(err)?;
        let mut by_width = [0usize; 4];
        for &t in op.cells(1) {
            by_width[op.width(t)] += 1;
        }
        for (w, &found) in by_width.iter().enumerate().skip(1) {
            let expected = magma_terms(w, kinds).len();
            ensure!(
                found == expected,
                "{property} width {w}: {found} cells, {expected} bracketings"
            );
        }
        let audit = verify_property(&mut op).map_err(err)?;
        ensure!(
            audit.is_clean(),
            "{property}: {:?}",
            audit.violations.first()
        );
        ensure!(
            op.gens().all(|(_, g)| !matches!(g.kind, GenKind::Con(..))),
            "{property} has contraction cells"
        );
        let refls = op
            .gens()
            .filter(|(_, g)| matches!(g.kind, GenKind::Refl { .. }))
            .count();
        ensure!(
            (refls > 0) == (property == Property::IdU),
            "{property}: {refls} reflexivity generators"
        );
        summary.push(format!("{property} {:?}", &by_width[1..]));
    }
    Ok(summary.join(", "))
}
