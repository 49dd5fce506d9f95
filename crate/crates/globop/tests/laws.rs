mod common;

#[test]
fn generator_tables_match_the_listed_data() {
    common::generator_tables().unwrap();
}

#[test]
fn cofaces_satisfy_the_coglobular_identities() {
    common::coglobular_identities().unwrap();
}

#[test]
fn substitution_is_a_monad_on_random_diagrams() {
    common::monad_laws(100, 7).unwrap();
}

#[test]
fn tree_calculus_on_small_trees() {
    common::tree_calculus(3, 5).unwrap();
}
