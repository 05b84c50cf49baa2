use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::controller::SolverConfig;
use crate::model::{build_model, BuildOptions, DomainBundle, ModelError, SensedFacts};
use crate::planning::{pbvi_solve, Belief, PbviConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub belief: [f64; 3],
    pub action: String,
}

/// Policy actions over a grid on the simplex of room beliefs, with the item
/// and the person known. The grid points are added to the solver's belief
/// set so the policy is backed up exactly where it is queried.
pub fn policy_map(
    bundle: &DomainBundle,
    sensed: &SensedFacts,
    item: &str,
    person: &str,
    resolution: usize,
    solver: &SolverConfig,
) -> Result<Vec<MapPoint>, BenchError> {
    if resolution < 2 {
        return Err(BenchError::Config("policy map resolution must be at least 2".into()));
    }
    let model = build_model(bundle, sensed, BuildOptions::FULL)?;
    let pomdp = model.pomdp().ok_or_else(|| BenchError::Config("policy maps need a dialog model".into()))?;
    let space = &model.space;
    let rooms = space
        .var_index("req_room")
        .map(|i| space.domains[i].clone())
        .filter(|r| r.len() == 3)
        .ok_or_else(|| BenchError::Config("policy maps need exactly three rooms".into()))?;
    let corner = |room: &str| {
        let vals: Vec<String> = space
            .vars
            .iter()
            .map(|v| match v.as_str() {
                "req_item" => item.to_string(),
                "req_room" => room.to_string(),
                "req_person" => person.to_string(),
                _ => String::new(),
            })
            .collect();
        space.index_of(&vals).ok_or_else(|| BenchError::Config(format!("no state for {item} in {room} for {person}")))
    };
    let corners = rooms.iter().map(|r| corner(r)).collect::<Result<Vec<_>, _>>()?;

    let mut grid = Vec::new();
    for i in (0..=resolution).rev() {
        for j in (0..=resolution - i).rev() {
            let k = resolution - i - j;
            let w = [i, j, k].map(|x| x as f64 / resolution as f64);
            let mut b = vec![0.0; model.states()];
            for (c, p) in corners.iter().zip(w) {
                b[*c] = p;
            }
            grid.push((w, Belief(b)));
        }
    }
    let cfg = PbviConfig {
        extra_beliefs: grid.iter().map(|(_, b)| b.clone()).collect(),
        belief_budget: solver.pbvi.belief_budget.max(grid.len() + 1),
        ..solver.pbvi.clone()
    };
    let policy = pbvi_solve(pomdp, &cfg).map_err(ModelError::from)?;
    Ok(grid.into_iter().map(|(w, b)| MapPoint { belief: w, action: model.actions[policy.lookahead_action(pomdp, &b)].clone() }).collect())
}
