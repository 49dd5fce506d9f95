//! Terms of free operads, composition and the strict-unit quotient.
use globop::collections::build_complex;
use globop::contraction::{classes_of_dim, free_operad};
use globop::operads::{Operad, Property};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = build_complex(0, 2);
    let mut op = Operad::new(&base, Property::Id, 2, 4);
    let left = op.parse("gamma(mu(1,0); mu(1,0) *[1,0] u1)")?;
    let right = op.parse("gamma(mu(1,0); u1 *[1,0] mu(1,0))")?;
    let (arity, colour) = op.term_arity(left);
    println!(
        "{} has arity {} at colour {colour}",
        op.print(left),
        arity.matrix()
    );
    println!("brackets differ: {}", !op.equal_terms(left, right)?);

    for property in [Property::Id, Property::IdU, Property::S, Property::SU] {
        let op = free_operad(&base, property, 1, 4)?;
        let classes = classes_of_dim(&op, 1).len();
        println!(
            "{property}: {} stored 1-cells, {classes} classes",
            op.cells(1).len()
        );
    }
    Ok(())
}
