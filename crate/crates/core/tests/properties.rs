mod props;

const CASES: u32 = 500;

#[test]
fn ring_axioms() {
    props::ring_axioms(CASES).unwrap();
}

#[test]
fn hom_multiplicativity() {
    props::hom_multiplicativity(CASES).unwrap();
}

#[test]
fn word_laws() {
    props::word_laws(CASES).unwrap();
}

#[test]
fn y_adic_round_trip() {
    props::y_adic_round_trip(CASES).unwrap();
}

#[test]
fn module_membership() {
    props::module_membership(CASES).unwrap();
}
