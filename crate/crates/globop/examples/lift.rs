//! Filling two parallel coendomorphism cells with a contraction cell.
use globop::coend::{check_serial, classifying_cell, lift_contraction, CoendEnv};
use globop::operads::Property;
use globop::trees::Tree;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = Tree::linear(1).star(&Tree::linear(1), 0)?;
    for property in [Property::C, Property::Id] {
        let mut env = CoendEnv::new(property, 2, 4);
        let op = &mut env.tree_operad(&t)?.operad;
        let x = op
            .parse("gamma(gamma(F1; gamma(mu(1,0); u1 *[1,0] mu(1,0))); F1 *[1,0] F1 *[1,0] F1)")?;
        let y = op
            .parse("gamma(gamma(F1; gamma(mu(1,0); mu(1,0) *[1,0] u1)); F1 *[1,0] F1 *[1,0] F1)")?;
        let minus = classifying_cell(&mut env, &t, x)?;
        let plus = classifying_cell(&mut env, &t, y)?;
        match lift_contraction(&mut env, &minus, &plus) {
            Ok(cell) => println!(
                "{property}: lifted, {} serial violations",
                check_serial(&mut env, &cell)?.len()
            ),
            Err(e) => println!("{property}: {e}"),
        }
    }
    Ok(())
}
