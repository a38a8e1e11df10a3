mod common;

use proptest::prelude::*;
use teamlogic::syntax::{parse_formula, to_nnf, OmegaProfile};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ty = random_type(&mut r, 3);
        let f = random_formula(&mut r, &ty, OmegaProfile::ALL, 3, 8, true);
        let text = f.display(&ty).to_string();
        let back = parse_formula(&text, &ty).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, f, "{}", text);
    }

    #[test]
    fn nnf_is_idempotent_and_keeps_rank(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ty = random_type(&mut r, 3);
        let f = random_formula(&mut r, &ty, OmegaProfile::ALL, 3, 8, true);
        let n = to_nnf(&f, OmegaProfile::ALL).unwrap();
        prop_assert!(!n.contains_not());
        prop_assert_eq!(n.quantifier_rank(), f.quantifier_rank());
        prop_assert_eq!(n.free_vars(), f.free_vars());
        prop_assert_eq!(to_nnf(&n, OmegaProfile::ALL).unwrap(), n);
    }
}

#[test]
fn nnf_needs_duals_in_profile() {
    let ty = teamlogic::syntax::FiniteType::of(&[], &["x", "y"]);
    let f = parse_formula("not D[x] y", &ty).unwrap();
    let d = OmegaProfile::of(&[teamlogic::syntax::AtomKind::Dep]);
    assert!(to_nnf(&f, d).is_err());
    assert_eq!(
        to_nnf(&f, OmegaProfile::LFD)
            .unwrap()
            .display(&ty)
            .to_string(),
        "Y[x] y"
    );
}
