//! The collections of higher transformations and their cofaces.
use globop::collections::{binary_complex_pushout, build_complex, coface, Coface};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 0..=3 {
        let c = build_complex(n, 2);
        println!(
            "C^{n}: colours {:?}, cells per dimension {:?}",
            c.colours(),
            c.counts()
        );
        let principal = c.principal().unwrap_or("-");
        println!("  principal generator {principal}");
    }
    for side in [Coface::Delta, Coface::Kappa] {
        let f = coface(1, side, 2);
        f.check(&build_complex(1, 2), &build_complex(2, 2))?;
        println!("{side:?}: F1 -> {}", f.apply("F1").unwrap_or("?"));
    }
    let po = binary_complex_pushout(1, 0, 2)?;
    println!(
        "C^1 glued to C^1 over C^0: colours {:?}, cells {:?}",
        po.collection.colours(),
        po.collection.counts()
    );
    Ok(())
}
