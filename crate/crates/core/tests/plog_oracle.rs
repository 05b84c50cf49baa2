mod common;

use common::{check_case, random_case};
use icorpp::plog::{enumerate_worlds, ground, parse_literal, parse_program, query, query_all, Evidence, PlogError};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn engine_matches_joint_table(seed in any::<u64>()) {
        let case = random_case(seed);
        prop_assert!(case.random_attributes() <= 12);
        if let Err(msg) = check_case(&case, 1e-9) {
            prop_assert!(false, "{}", msg);
        }
    }

    #[test]
    fn observations_only_remove_worlds(seed in any::<u64>(), pick in 0usize..64) {
        let case = random_case(seed);
        let Ok(before) = case.engine() else { return Ok(()) };
        let (key, _) = before.iter().nth(pick % before.len()).unwrap();
        let atoms = case.ground_atoms();
        let i = pick % atoms.len();
        let lit = parse_literal(&format!("{}={}", atoms[i], key[i])).unwrap();
        let mut narrowed = case.clone();
        narrowed.evidence.push(Evidence::obs(lit));
        let after = narrowed.engine().unwrap();
        prop_assert!(!after.is_empty());
        prop_assert!(after.keys().all(|k| before.contains_key(k)));
    }
}

#[test]
fn fixed_seeds_cover_every_feature() {
    let cases: Vec<_> = (0..200).map(random_case).collect();
    assert!(cases.iter().any(|c| c.source.contains("random(y(X))")));
    assert!(cases.iter().any(|c| c.source.contains("ok(V)")));
    assert!(cases.iter().any(|c| c.source.contains("not d")));
    assert!(cases.iter().any(|c| c.evidence.iter().any(|e| e.to_string().starts_with("do("))));
    let mut empty = 0;
    for c in &cases {
        check_case(c, 1e-9).unwrap();
        empty += matches!(c.engine(), Err(PlogError::NoWorlds)) as usize;
    }
    assert!(empty < cases.len() / 4);
}


proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surviving_mass_is_normalized(seed in any::<u64>()) {
        let case = random_case(seed);
        let Ok(table) = case.engine() else { return Ok(()) };
        prop_assert!((table.values().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(table.values().all(|p| *p > 0.0));
    }

    #[test]
    fn conditioning_matches_ratio(seed in any::<u64>(), i in 0usize..12, v in 0usize..3) {
        let case = random_case(seed);
        let i = i % case.random_attributes();
        let e = parse_literal(&case.lit_text(i, v % case.value_count(i))).unwrap();
        let gp = ground(&parse_program(&case.source).unwrap()).unwrap();
        let Ok(pe) = query(&gp, &e, &case.evidence) else { return Ok(()) };
        prop_assume!(pe > 1e-6);
        let mut conditioned = case.evidence.clone();
        conditioned.push(Evidence::obs(e.clone()));
        for l in &case.queries {
            let joint = query_all(&gp, &[l.clone(), e.clone()], &case.evidence).unwrap();
            let direct = query(&gp, l, &conditioned).unwrap();
            prop_assert!((direct - joint / pe).abs() < 1e-9);
        }
    }

    #[test]
    fn intervention_leaves_non_descendants(seed in any::<u64>(), v in 0usize..3) {
        let case = random_case(seed);
        prop_assume!(!case.has_constraints());
        let gp = ground(&parse_program(&case.source).unwrap()).unwrap();
        let v = v % case.value_count(0);
        let act = [Evidence::intervene(parse_literal(&case.lit_text(0, v)).unwrap())];
        let before = enumerate_worlds(&gp, &[]).unwrap();
        let after = enumerate_worlds(&gp, &act).unwrap();
        let below = case.descendants(0);
        for (atom, moved) in case.ground_atoms().iter().zip(below) {
            if !moved {
                let m0 = before.marginal(&gp, atom).unwrap();
                let m1 = after.marginal(&gp, atom).unwrap();
                for (k, p) in &m0 {
                    prop_assert!((p - m1.get(k).copied().unwrap_or(0.0)).abs() < 1e-9, "{atom}");
                }
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let case = random_case(seed);
        let gp = ground(&parse_program(&case.source).unwrap()).unwrap();
        let a = enumerate_worlds(&gp, &case.evidence);
        let b = enumerate_worlds(&ground(&parse_program(&case.source).unwrap()).unwrap(), &case.evidence);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(&a.worlds, &b.worlds);
                prop_assert_eq!(&a.probs, &b.probs);
            }
            (a, b) => prop_assert_eq!(a.err(), b.err()),
        }
    }
}

#[test]
fn observation_can_shift_an_ancestor() {
    let gp = ground(&parse_program("x : boolean. y : boolean. random(x). random(y). pr(y | x) = 0.9. pr(y | -x) = 0.1.").unwrap()).unwrap();
    let x = parse_literal("x").unwrap();
    let y = parse_literal("y").unwrap();
    assert!((query(&gp, &x, &[Evidence::obs(y.clone())]).unwrap() - 0.9).abs() < 1e-12);
    assert!((query(&gp, &x, &[Evidence::intervene(y)]).unwrap() - 0.5).abs() < 1e-12);
}
