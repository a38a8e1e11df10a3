mod common;

use proptest::prelude::*;
use teamlogic::checker::{check_all, check_global_atom, check_row, CheckError, GlobalAtom};
use teamlogic::fo::{eval_fo, expand, standard_translation};
use teamlogic::model::{load_model, Assignment};
use teamlogic::syntax::{parse_formula, to_nnf, OmegaProfile, Var};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn checker_matches_first_order_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ty = random_type(&mut r, 3);
        let m = random_model(&mut r, &ty, 3, 6);
        let f = random_formula(&mut r, &ty, OmegaProfile::ALL, 2, 6, true);
        let nnf = to_nnf(&f, OmegaProfile::ALL).unwrap();
        let got = check_all(&nnf, &m).unwrap();
        let fo = standard_translation(&f, &ty);
        let st = expand(&m);
        for (row, v) in got.into_iter().enumerate() {
            let want = eval_fo(&fo, &st, ty.variables(), &m.row(row).0).unwrap();
            prop_assert_eq!(v, want, "{} at row {}", f.display(&ty), row);
        }
    }

    #[test]
    fn global_atoms_match_direct_definitions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ty = random_type(&mut r, 3);
        let m = random_model(&mut r, &ty, 3, 6);
        let x = Var(0);
        let y = Var((ty.num_vars() - 1) as u32);
        for atom in [
            GlobalAtom::Dep { on: vec![x], target: y },
            GlobalAtom::Incl { left: vec![x], right: vec![y] },
            GlobalAtom::Excl { left: vec![x], right: vec![y] },
            GlobalAtom::Anon { on: vec![x], target: y },
            GlobalAtom::Indep { left: vec![x], right: vec![y] },
        ] {
            // check_global_atom asserts agreement with the local form internally.
            check_global_atom(&atom, &m).unwrap();
        }
    }
}

#[test]
fn local_dependence_example() {
    let m = load_model(LOCAL_DEP).unwrap();
    let at = |f: &str, row: &str| {
        let phi = parse_formula(f, m.ty()).unwrap();
        check_row(&phi, &m, m.parse_row(row).unwrap())
            .unwrap()
            .value
    };
    assert!(at("D[y] x", "1 1 0"));
    assert!(at("D[z] y", "1 2 1"));
    assert!(at("D[z] y", "2 2 1"));
    assert!(!at("D[x] y", "1 1 0"));
    // Globally, y does not determine x and z does not determine y.
    assert!(!at("A[] D[y] x", "1 1 0"));
    assert!(!at("A[] D[z] y", "1 2 1"));
}

#[test]
fn rejects_points_outside_the_team_and_negations() {
    let m = load_model(LOCAL_DEP).unwrap();
    let phi = parse_formula("D[x] y", m.ty()).unwrap();
    let outside = Assignment::from_indices(&[2, 2, 2]);
    assert!(matches!(
        teamlogic::checker::check(&phi, &m, &outside),
        Err(CheckError::NotInTeam(_))
    ));
    let neg = parse_formula("not D[x] y", m.ty()).unwrap();
    assert!(matches!(check_all(&neg, &m), Err(CheckError::NotNnf)));
}
