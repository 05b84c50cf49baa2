use std::collections::BTreeMap;

use icorpp::domains::*;
use icorpp::model::{build_model, BuildOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A tree grown by attaching node `i` under one of the earlier non-leaf
/// candidates; `picks[i]` chooses the parent.
fn grown_tree(picks: &[usize]) -> Ontology {
    let mut parent = BTreeMap::new();
    let mut nodes = vec!["root".to_string()];
    for (i, p) in picks.iter().enumerate() {
        let name = format!("n{i}");
        parent.insert(name.clone(), nodes[p % nodes.len()].clone());
        nodes.push(name);
    }
    Ontology { root: "root".into(), parent }
}

proptest! {
    #[test]
    fn item_closeness_properties(picks in prop::collection::vec(0usize..100, 2..14)) {
        let o = grown_tree(&picks);
        let leaves = o.leaves();
        for a in &leaves {
            for b in &leaves {
                let l = item_closeness(&o, a, b).unwrap();
                prop_assert!(l > 0.0 && l <= 1.0);
                prop_assert_eq!(l == 1.0, a == b);
                prop_assert_eq!(l, item_closeness(&o, b, a).unwrap());
            }
        }
    }

    #[test]
    fn deepening_an_item_never_raises_closeness(picks in prop::collection::vec(0usize..100, 2..14), which in 0usize..64) {
        let o = grown_tree(&picks);
        let leaves = o.leaves();
        let a = &leaves[which % leaves.len()];
        let mut deeper = o.clone();
        let above = deeper.parent[a].clone();
        deeper.parent.insert("inserted".into(), above);
        deeper.parent.insert(a.clone(), "inserted".into());
        for b in leaves.iter().filter(|b| *b != a) {
            prop_assert!(item_closeness(&deeper, a, b).unwrap() <= item_closeness(&o, a, b).unwrap() + 1e-12);
        }
    }

    #[test]
    fn room_closeness_properties(d in prop::collection::vec(0.1f64..10.0, 2..5)) {
        let dist: BTreeMap<String, f64> = d.iter().enumerate().map(|(i, x)| (format!("r{i}"), *x)).collect();
        for (a, da) in &dist {
            for (b, db) in &dist {
                let l = room_closeness(&dist, a, b).unwrap();
                prop_assert!(l > 0.0 && l < 1.0);
                if a == b {
                    prop_assert!((l - 1.0 / 3.0).abs() < 1e-15);
                } else if (da - db).abs() > 1e-9 {
                    prop_assert!((l - room_closeness(&dist, b, a).unwrap()).abs() > 1e-12);
                }
            }
        }
    }
}

#[test]
fn closeness_reward_is_bounded() {
    let mut cfg = DialogConfig::tuning();
    cfg.delivery = DeliverySetting::Closeness { r_plus: 30.0, r_minus: -30.0 };
    let scheme = cfg.delivery_scheme();
    let dims = DialogConfig::dims();
    let mut requests = Vec::new();
    for i in &cfg.items {
        for r in &cfg.rooms {
            for p in cfg.person_names() {
                requests.push(vec![i.clone(), r.clone(), p]);
            }
        }
    }
    for req in &requests {
        for del in &requests {
            let r = delivery_reward(&scheme, &dims, req, del).unwrap();
            assert!((-30.0..=30.0).contains(&r));
            assert_eq!(r == 30.0, req == del);
        }
    }
}

#[test]
fn wrong_answers_spread_uniformly() {
    let b = preset("dialog-paper-full").unwrap().bundle().unwrap();
    let sensor = DialogSensor::from_task(&b.task).unwrap();
    let request: Vec<String> = sensor.vocabulary.iter().map(|v| v[0].clone()).collect();
    let dist = sensor.answer_distribution(&request, &DialogAction::Ask(0)).unwrap();
    let wrong: Vec<f64> = dist.iter().filter(|(v, _)| *v != request[0]).map(|(_, p)| *p).collect();
    assert!(wrong.len() >= 2);
    assert!(wrong.iter().all(|p| (p - wrong[0]).abs() < 1e-12));
    assert!((dist.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn simulator_matches_model_transitions() {
    let cfg = NavConfig { time: "morning".into(), weather: "sunny".into(), walker: None, ..NavConfig::paper() };
    let world = NavWorld::new(cfg.clone());
    let facts = world.sense();
    let b = Scenario::Navigation(cfg.clone()).bundle().unwrap();
    let m = build_model(&b, &facts, BuildOptions::FULL).unwrap();
    let index = |s: NavState| {
        let vals = [s.cell.row_name(), s.cell.col_name(), s.term.to_string()];
        m.space.index_of(&vals).unwrap()
    };
    let rows = [
        (Cell::new(4, 1), "up"),
        (Cell::new(2, 3), "left"),
        (Cell::new(0, 0), "up"),
        (Cell::new(1, 5), "down"),
        (Cell::new(3, 3), "right"),
        (Cell::new(0, 4), "right"),
        (Cell::new(2, 0), "down"),
        (Cell::new(4, 5), "left"),
    ];
    let samples = 1_000_000 / rows.len();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (cell, action) in rows {
        let start = NavState { cell, term: false };
        let s = index(start);
        let a = m.action_index(action).unwrap();
        let mut counts = vec![0usize; m.states()];
        for _ in 0..samples {
            counts[index(navigation_step(&world, start, action, &mut rng).0)] += 1;
        }
        for (t, c) in counts.iter().enumerate() {
            let model: f64 = m.mdp().row(s, a).iter().filter(|(x, _)| *x as usize == t).map(|(_, p)| p).sum();
            let freq = *c as f64 / samples as f64;
            assert!((freq - model).abs() < 0.005, "{cell:?} {action} -> {}: {freq} vs {model}", m.state_label(t));
        }
    }
}
