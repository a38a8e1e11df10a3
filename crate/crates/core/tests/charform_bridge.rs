mod common;

use proptest::prelude::*;
use teamlogic::bisim::{bisimilarity, Depth};
use teamlogic::charform::{char_formula, CharBuilder, CharError};
use teamlogic::checker::check_all;
use teamlogic::model::load_model;
use teamlogic::syntax::{AtomKind, OmegaProfile};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn characteristic_formulas_define_stages(seed in any::<u64>()) {
        let mut r = rng(seed);
        let omega = CLOSED_PROFILES[(seed % 6) as usize];
        let ty = random_type(&mut r, 3);
        let left = random_model(&mut r, &ty, 3, 5);
        let right = partner_model(&mut r, &left, 3, 5);
        let out = bisimilarity(&left, 0, &right, 0, omega, Depth::Steps(2)).unwrap();
        let mut b = CharBuilder::new(&left, omega).unwrap();
        for k in 0..=2 {
            for s in 0..left.len() {
                let chi = b.formula(s, k).unwrap();
                prop_assert_eq!(chi.quantifier_rank(), k);
                prop_assert!(!chi.contains_not());
                prop_assert!(chi.omega().iter().all(|a| omega.contains(a)));
                prop_assert!(check_all(&chi, &left).unwrap()[s]);
                let truth = check_all(&chi, &right).unwrap();
                for (s2, v) in truth.into_iter().enumerate() {
                    prop_assert_eq!(v, out.history[k].contains(s, s2));
                }
            }
        }
    }
}

#[test]
fn distinguishes_notgf2_points_only_with_equality() {
    let left = load_model(NOTGF2_LEFT).unwrap();
    let right = load_model(NOTGF2_RIGHT).unwrap();
    let chi = char_formula(&left, 0, 3, OmegaProfile::LFD).unwrap();
    assert!(check_all(&chi, &right).unwrap()[0]);
    let chi = char_formula(&left, 0, 0, OmegaProfile::LFD_EQ).unwrap();
    assert!(!check_all(&chi, &right).unwrap()[0]);
}

#[test]
fn rejects_bad_inputs() {
    let m = load_model(LOCAL_DEP).unwrap();
    let open = OmegaProfile::of(&[AtomKind::Incl]);
    assert!(matches!(
        char_formula(&m, 0, 1, open),
        Err(CharError::NotNegationClosed(_))
    ));
    assert!(matches!(
        char_formula(&m, 9, 1, OmegaProfile::LFD),
        Err(CharError::RowOutOfRange(9))
    ));
}
