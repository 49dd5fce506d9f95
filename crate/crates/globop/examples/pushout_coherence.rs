//! Two parallel composites in the operad of a glued pair of transformations,
//! connected by a contraction cell.
use globop::cli::example_certificate;

fn main() {
    for (step, ok, detail) in example_certificate() {
        println!("{} {step}: {detail}", if ok { "ok  " } else { "FAIL" });
    }
}
