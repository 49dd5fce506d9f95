//! Eligible pairs and the audit of the contraction property.
use globop::collections::build_complex;
use globop::contraction::{eligible_pairs, find_contraction, free_operad, verify_property};
use globop::operads::{Operad, Property};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = build_complex(0, 2);
    let mut op = Operad::new(&base, Property::C, 2, 3);
    let x = op.parse("gamma(mu(1,0); mu(1,0) *[1,0] u1)")?;
    let y = op.parse("gamma(mu(1,0); u1 *[1,0] mu(1,0))")?;
    if let Some(c) = find_contraction(&mut op, x, y)? {
        println!("associator: {}", op.print(c));
    }

    let mut full = free_operad(&base, Property::C, 2, 3)?;
    println!("cells per dimension {:?}", full.cell_counts());
    println!("eligible 1-pairs: {}", eligible_pairs(&full, 1)?.len());
    let audit = verify_property(&mut full)?;
    println!(
        "{} pairs checked, clean: {}",
        audit.pairs_checked,
        audit.is_clean()
    );
    Ok(())
}
