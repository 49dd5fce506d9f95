//! Parsing, gluing and decomposing trees.
use globop::trees::{enumerate_trees, parse_tree, Tree};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let edge = Tree::linear(1);
    let path = edge.star(&edge, 0)?;
    println!("1(1) *[1,0] 1(1) = {}", path.matrix());

    let t = parse_tree("1(2) *[2,1] 1(2) *[2,0] 1(2)")?;
    println!(
        "parsed: {}  leaves={} nodes={}",
        t.matrix(),
        t.leaf_count(),
        t.node_count()
    );
    let d = t.decompose();
    let factors: Vec<String> = d.factors.iter().map(|f| f.matrix().to_string()).collect();
    println!("factors {factors:?} at junctions {:?}", d.junctions);
    assert_eq!(d.recompose()?, t);

    println!("source boundary: {}", t.truncate(1)?.matrix());
    println!("as a degenerate 3-tree: {}", t.degenerate(3)?.matrix());

    for dim in 0..=3 {
        let counts: Vec<usize> = (1..=4).map(|k| enumerate_trees(dim, k).len()).collect();
        println!("dim {dim}: trees with at most 1..4 leaves {counts:?}");
    }
    Ok(())
}
