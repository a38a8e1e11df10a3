mod common;

use proptest::prelude::*;
use teamlogic::checker::check_all;
use teamlogic::fo::{
    build_standard_relational_model, eval_fo, expand, lift_full_team, modal_translation, parse_fo,
    translate_with, AtomStyle,
};
use teamlogic::model::{full_team, load_model, materialize_fo_team, Elem, Structure};
use teamlogic::syntax::{parse_formula, to_nnf, AtomKind, FiniteType, OmegaProfile};

use common::*;

const MODAL: OmegaProfile =
    OmegaProfile::of(&[AtomKind::Dep, AtomKind::Anon, AtomKind::Ind, AtomKind::NInd]);

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn modal_translation_matches_checker(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ty = random_type(&mut r, 3);
        let m = random_model(&mut r, &ty, 3, 6);
        let f = random_formula(&mut r, &ty, MODAL, 3, 6, true);
        let tr = modal_translation(&f, &ty).unwrap();
        let srm = build_standard_relational_model(&m, &f);
        let truth = check_all(&to_nnf(&f, MODAL).unwrap(), &m).unwrap();
        let w0 = ["w0".to_string()];
        for (row, v) in truth.into_iter().enumerate() {
            prop_assert_eq!(eval_fo(&tr, &srm, &w0, &[Elem(row as u32)]).unwrap(), v);
        }
    }

    #[test]
    fn guarded_and_standard_translations_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ty = random_type(&mut r, 3);
        let m = random_model(&mut r, &ty, 3, 6);
        let omega = OmegaProfile::of(&[AtomKind::Incl, AtomKind::Excl, AtomKind::Dep]);
        let f = random_formula(&mut r, &ty, omega, 2, 6, false);
        let st = expand(&m);
        let a = translate_with(&f, &ty, AtomStyle::Standard);
        let b = translate_with(&f, &ty, AtomStyle::Guarded);
        for s in m.team() {
            prop_assert_eq!(
                eval_fo(&a, &st, ty.variables(), &s.0).unwrap(),
                eval_fo(&b, &st, ty.variables(), &s.0).unwrap()
            );
        }
    }

    #[test]
    fn printed_translations_reparse(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ty = random_type(&mut r, 3);
        let f = random_formula(&mut r, &ty, OmegaProfile::ALL, 2, 6, true);
        let fo = translate_with(&f, &ty, AtomStyle::Standard);
        let vars: Vec<&str> = ty.variables().iter().map(String::as_str).collect();
        prop_assert_eq!(parse_fo(&fo.to_string(), &vars).unwrap(), fo);
    }

    #[test]
    fn lifted_sentences_hold_on_full_teams(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ty = random_type(&mut r, 3);
        let size = 1 + (seed % 3) as usize;
        let st = random_structure(&mut r, &ty, size);
        let m = full_team(&st, &ty, 1000).unwrap();
        let sentence = random_fo_sentence(&mut r, &ty, 3);
        let want = eval_fo(&sentence, &st, &[], &[]).unwrap();
        let lifted = lift_full_team(&sentence, &ty).unwrap();
        prop_assert!(check_all(&lifted, &m).unwrap().into_iter().all(|v| v == want));
    }
}

#[test]
fn full_team_example() {
    let ty = FiniteType::of(&[("R", 2)], &["x", "y"]);
    let mut st = Structure::numeric(2);
    st.add_relation("R", 2, [vec![Elem(0), Elem(1)], vec![Elem(1), Elem(1)]])
        .unwrap();
    let m = full_team(&st, &ty, 100).unwrap();
    let sentence = parse_fo("forall x. exists y. R(x, y)", &[]).unwrap();
    let lifted = lift_full_team(&sentence, &ty).unwrap();
    assert_eq!(lifted.display(&ty).to_string(), "A[y] E[x] R(x,y)");
    let global = parse_formula("A[] E[x] R(x,y)", &ty).unwrap();
    assert_eq!(check_all(&lifted, &m).unwrap(), vec![true; 4]);
    assert_eq!(check_all(&global, &m).unwrap(), vec![true; 4]);
    let converse =
        lift_full_team(&parse_fo("forall y. exists x. R(x, y)", &[]).unwrap(), &ty).unwrap();
    assert_eq!(check_all(&converse, &m).unwrap(), vec![false; 4]);
}

#[test]
fn materialized_teams() {
    let m = load_model(LOCAL_DEP).unwrap();
    let ty = m.ty().clone();
    let st = m.structure().clone();
    let phi = parse_fo("(x = 0 & y = 0) | R2(x, y)", &["x", "y", "z"]);
    assert!(phi.is_ok());
    let all = materialize_fo_team(&st, &ty, &parse_fo("true", &[]).unwrap(), 100).unwrap();
    assert_eq!(all.0.len(), 27);
    assert_eq!(all.1, 0);
    let diag = parse_fo("x = y & y = z", &["x", "y", "z"]).unwrap();
    let (d, b) = materialize_fo_team(&st, &ty, &diag, 100).unwrap();
    assert_eq!(d.len(), 3);
    assert_eq!(b, 3);
    assert!(materialize_fo_team(&st, &ty, &diag, 26).is_err());
}
