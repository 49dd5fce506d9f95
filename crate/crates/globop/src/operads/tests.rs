use super::*;
use crate::collections::{binary_complex_pushout, build_complex, coface, Coface};

fn c0(p: Property) -> Operad {
    Operad::new(&build_complex(0, 2), p, 2, 4)
}

#[test]
fn unit_laws() {
    let mut op = c0(Property::Id);
    let mu = op.parse("mu(1,0)").unwrap();
    let u1 = op.unit(0, 1);
    let e = op.eta(mu);
    assert_eq!(op.gamma(u1, &e).unwrap(), mu);
    let arity = op.info(mu).arity.clone();
    let units = op.fill(arity, vec![u1, u1]).unwrap();
    assert_eq!(op.gamma(mu, &units).unwrap(), mu);
}

#[test]
fn composite_arity() {
    let mut op = c0(Property::Id);
    let t = op.parse("gamma(mu(1,0); u1 *[1,0] mu(1,0))").unwrap();
    let (tree, colour) = op.term_arity(t);
    assert_eq!(tree, Tree::from_depths(1, vec![0, 1, 1, 1]).unwrap());
    assert_eq!(colour, "1");
    assert_eq!(op.width(t), 3);
    assert_eq!(op.dim(t), 1);
}

#[test]
fn composition_is_associative() {
    let mut op = c0(Property::Id);
    let a = op.parse("gamma(mu(1,0); mu(1,0) *[1,0] u1)").unwrap();
    let b = op
        .parse("gamma(gamma(mu(1,0); mu(1,0) *[1,0] u1); u1 *[1,0] mu(1,0) *[1,0] u1)")
        .unwrap();
    let c = op
        .parse("gamma(mu(1,0); gamma(mu(1,0); u1 *[1,0] mu(1,0)) *[1,0] u1)")
        .unwrap();
    assert_eq!(op.width(a), 3);
    assert_eq!(b, c);
}

#[test]
fn mismatched_composition_is_rejected() {
    let mut op = c0(Property::Id);
    let mu = op.parse("mu(1,0)").unwrap();
    let u0 = op.unit(0, 0);
    let p = op.fill(Tree::root_only(0), vec![u0]).unwrap();
    assert!(op.gamma(mu, &p).is_err());
}

#[test]
fn print_parse_round_trip() {
    let mut op = c0(Property::IdU);
    for s in ["mu(1,0)", "gamma(mu(1,0); u1 *[1,0] mu(1,0))", "r[0,1](u0)"] {
        let t = op.parse(s).unwrap();
        let printed = op.print(t);
        assert_eq!(op.parse(&printed).unwrap(), t, "{printed}");
        let j = op.to_json(t);
        assert_eq!(op.from_json(&j).unwrap(), t);
    }
}

#[test]
fn stored_cells_round_trip() {
    let op = crate::contraction::free_operad(&build_complex(0, 2), Property::IdU, 2, 2).unwrap();
    let mut work = op.clone();
    for d in 0..=2 {
        for &t in op.cells(d) {
            let printed = op.print(t);
            assert_eq!(work.parse(&printed).unwrap(), t, "{printed}");
        }
    }
}

#[test]
fn json_round_trip_through_serde() {
    let mut op = c0(Property::Id);
    let t = op.parse("gamma(mu(1,0); mu(1,0) *[1,0] mu(1,0))").unwrap();
    let text = serde_json::to_string(&op.to_json(t)).unwrap();
    let back: parse::TermJson = serde_json::from_str(&text).unwrap();
    assert_eq!(op.from_json(&back).unwrap(), t);
}

#[test]
fn boundaries_of_two_cells() {
    let mut op = c0(Property::Id);
    let m = op.parse("mu(2,0)").unwrap();
    let s = op.term_boundary(m, Side::Source).unwrap();
    let mu = op.parse("mu(1,0)").unwrap();
    assert_eq!(s, mu);
    let m1 = op.parse("mu(2,1)").unwrap();
    let s1 = op.term_boundary(m1, Side::Source).unwrap();
    assert!(op.is_unit(s1));
}

#[test]
fn pushout_terms_are_parallel() {
    let po = binary_complex_pushout(1, 0, 2).unwrap();
    let mut op = Operad::new(&po.collection, Property::C, 2, 4);
    let x = op
        .parse("gamma(gamma(F1; gamma(mu(1,0); u1 *[1,0] mu(1,0))); F1 *[1,0] F1 *[1,0] F1)")
        .unwrap();
    let y = op
        .parse("gamma(gamma(F1; gamma(mu(1,0); mu(1,0) *[1,0] u1)); F1 *[1,0] F1 *[1,0] F1)")
        .unwrap();
    assert!(op.is_parallel(x, y));
    assert_eq!(op.dim(x), 1);
    assert_eq!(op.mask(x) & op.mask(y), 0);
}

#[test]
fn ambiguous_names_are_reported() {
    let po = binary_complex_pushout(1, 0, 2).unwrap();
    let mut op = Operad::new(&po.collection, Property::C, 2, 4);
    assert!(matches!(op.parse("F1"), Err(OperadError::Ambiguous(..))));
    assert!(op.parse("nosuch").is_err());
}

#[test]
fn identity_morphism_checks() {
    let mut a = c0(Property::Id);
    let m = OperadMorphism::identity(&mut a);
    let mut b = a.clone();
    assert!(check_morphism(&m, &a, &mut b).is_empty());
    let mut bad = m.clone();
    let g = a.base_gen("mu(1,0)").unwrap();
    let u1 = b.unit(0, 1);
    bad.images.insert(g, u1);
    let v = check_morphism(&bad, &a, &mut b);
    assert!(
        v.iter()
            .any(|v| matches!(v, Violation::ArityMismatch { .. })),
        "{v:?}"
    );
}

#[test]
fn coface_induces_morphism() {
    let small = build_complex(1, 2);
    let big = build_complex(2, 2);
    for side in [Coface::Delta, Coface::Kappa] {
        let f = coface(1, side, 2);
        let src = Operad::new(&small, Property::Id, 2, 4);
        let mut tgt = Operad::new(&big, Property::Id, 2, 4);
        let m = OperadMorphism::from_collection_map(&src, &mut tgt, &f).unwrap();
        assert!(check_morphism(&m, &src, &mut tgt).is_empty());
    }
}

#[test]
fn reflexivity_cells_are_loops() {
    let mut op = c0(Property::IdU);
    let mu = op.parse("mu(1,0)").unwrap();
    let r = op.reflexivity_cell(mu).unwrap();
    assert_eq!(op.term_boundary(r, Side::Source).unwrap(), mu);
    assert_eq!(op.term_boundary(r, Side::Target).unwrap(), mu);
    assert_eq!(op.dim(r), 2);
}
