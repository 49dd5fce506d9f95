mod common;

#[test]
fn worked_example_in_the_pushout() {
    common::worked_example().unwrap();
}

#[test]
fn strict_units_collapse_to_trees() {
    common::strict_collapse().unwrap();
}

#[test]
fn composition_cells_are_serial() {
    common::composition_system().unwrap();
}

#[test]
fn coherence_cell_lifts_to_the_coendomorphism_operad() {
    common::contraction_lifting().unwrap();
}

#[test]
fn magmatic_instances() {
    common::magmatic_instances().unwrap();
}
