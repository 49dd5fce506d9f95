//! Pasting diagrams in a small globular set, their boundaries and the monad multiplication.
use globop::globular::{validate_globular_set, GCell, RawGlobularSet, Side};
use globop::pasting::{diagrams_on, eta, substitute, validate_diagram, Pasting};
use globop::trees::{parse_tree, pasting_scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two parallel arrows a, b : x -> y, a 2-cell h : a => b and a loop e : y -> y.
    let x = validate_globular_set(RawGlobularSet {
        max_dim: 2,
        cells: vec![
            GCell::point("x"),
            GCell::point("y"),
            GCell::arrow("a", 1, "x", "y"),
            GCell::arrow("b", 1, "x", "y"),
            GCell::arrow("e", 1, "y", "y"),
            GCell::arrow("h", 2, "a", "b"),
        ],
    })?;

    let shape = parse_tree("1(2) *[2,0] d[1,2](1(1))")?;
    println!(
        "scheme of {} has cells per dimension {:?}",
        shape.matrix(),
        pasting_scheme(&shape).counts()
    );
    let diagrams = diagrams_on(&x, &shape, 100);
    println!("{} diagrams of that shape", diagrams.len());
    for p in &diagrams {
        validate_diagram(&x, p)?;
        let src = p.boundary(1, Side::Source)?;
        println!("  {:?}  source {:?}", p.labels, src.labels);
    }

    let outer = eta(&x, "h")?;
    let nested: Pasting<Pasting<String>> = outer.map(|l| eta(&x, l).expect("cell exists"));
    let flat = substitute(&nested)?;
    assert_eq!(flat, outer);
    println!("unit law holds on h: {:?}", flat.labels);
    Ok(())
}
