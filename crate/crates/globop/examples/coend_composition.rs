//! Composition cells of the coendomorphism operad and their serial equations.
use globop::coend::{check_serial, coend_boundary, cw_image, make_mu, CoendEnv, Variant};
use globop::globular::Side;
use globop::operads::Property;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut env = CoendEnv::new(Property::C, 2, 4);
    for (n, p, v) in [
        (1, 0, Variant::Left),
        (2, 1, Variant::Left),
        (2, 0, Variant::Left),
        (2, 0, Variant::Right),
    ] {
        let cell = make_mu(&mut env, n, p, v)?;
        let violations = check_serial(&mut env, &cell)?;
        let src = coend_boundary(&cell, Side::Source)?;
        println!(
            "mu({n},{p}) {v:?} over {}: {} violations, source over {}",
            cell.tree.matrix(),
            violations.len(),
            src.tree.matrix()
        );
    }
    let m = cw_image(&mut env, "mu(2,0)")?;
    println!("image of mu(2,0) lives over {}", m.tree.matrix());
    Ok(())
}
