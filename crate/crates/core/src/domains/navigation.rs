use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DomainError, RewardSpec};
use crate::model::{
    ActionSpec, DomainBundle, ModelError, ModelView, RewardBuilder, SensedFacts, TaskSpec, TermMode, VariablePartition,
};

pub const TIMES: [&str; 3] = ["morning", "noon", "evening"];
pub const WEATHER: [&str; 5] = ["sunny", "cloudy", "rainy", "snowy", "foggy"];
pub const MOVES: [&str; 4] = ["up", "down", "left", "right"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn row_name(&self) -> String {
        format!("rw{}", self.row)
    }

    pub fn col_name(&self) -> String {
        format!("cl{}", self.col)
    }
}

/// A pedestrian cycling through a patrol path, one cell per `period` robot
/// steps. `offset` shifts the phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walker {
    pub patrol: Vec<Cell>,
    pub period: usize,
    #[serde(default)]
    pub offset: usize,
}

impl Walker {
    pub fn position(&self, step: usize) -> Option<Cell> {
        if self.patrol.is_empty() {
            return None;
        }
        Some(self.patrol[((step + self.offset) / self.period.max(1)) % self.patrol.len()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavConfig {
    pub rows: usize,
    pub cols: usize,
    pub near_window: Vec<Cell>,
    pub goal: Cell,
    pub start: Cell,
    pub move_success: f64,
    pub sun_loss: f64,
    pub goal_reward: f64,
    pub fail_penalty: f64,
    pub step_cost: f64,
    pub discount: f64,
    /// Actual conditions of the simulated world.
    pub time: String,
    pub weather: String,
    #[serde(default)]
    pub walker: Option<Walker>,
}

impl NavConfig {
    /// Five rows by six columns with the goal at the top of a window column.
    /// The walker steps onto that column two steps into an episode and stays
    /// for four periods.
    pub fn paper() -> Self {
        let shelf = Cell::new(4, 0);
        let aisle = Cell::new(1, 3);
        NavConfig {
            rows: 5,
            cols: 6,
            near_window: vec![Cell::new(1, 3), Cell::new(2, 3), Cell::new(3, 3)],
            goal: Cell::new(0, 3),
            start: Cell::new(4, 3),
            move_success: 0.9,
            sun_loss: 0.9,
            goal_reward: 50.0,
            fail_penalty: 100.0,
            step_cost: 1.0,
            discount: 0.95,
            time: "evening".into(),
            weather: "cloudy".into(),
            walker: Some(Walker { patrol: vec![shelf, aisle, aisle, aisle, aisle], period: 5, offset: 3 }),
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |m: String| Err(DomainError::Config(m));
        if self.rows == 0 || self.cols == 0 {
            return bad("empty grid".into());
        }
        let inside = |c: &Cell| c.row < self.rows && c.col < self.cols;
        for c in self.near_window.iter().chain([&self.goal, &self.start]) {
            if !inside(c) {
                return bad(format!("cell ({}, {}) outside the grid", c.row, c.col));
            }
        }
        if let Some(w) = &self.walker {
            if w.period == 0 || !w.patrol.iter().all(inside) {
                return bad("walker patrol must be inside the grid with a positive period".into());
            }
        }
        if self.near_window.contains(&self.goal) {
            return bad("goal lies in a cell where the robot can get lost".into());
        }
        for p in [self.move_success, self.sun_loss] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("probability {p} outside [0, 1]"));
            }
        }
        if !TIMES.contains(&self.time.as_str()) || !WEATHER.contains(&self.weather.as_str()) {
            return bad(format!("unknown time/weather {}/{}", self.time, self.weather));
        }
        Ok(())
    }

    pub fn neighbor(&self, c: Cell, action: &str) -> Option<Cell> {
        match action {
            "up" if c.row > 0 => Some(Cell::new(c.row - 1, c.col)),
            "down" if c.row + 1 < self.rows => Some(Cell::new(c.row + 1, c.col)),
            "left" if c.col > 0 => Some(Cell::new(c.row, c.col - 1)),
            "right" if c.col + 1 < self.cols => Some(Cell::new(c.row, c.col + 1)),
            _ => None,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| Cell::new(r, c)))
    }

    /// Number of joint assignments to location, term, weather and time in a
    /// flat encoding where every cell carries a sunny and a blocked flag.
    pub fn naive_state_count(&self) -> u128 {
        let cells = (self.rows * self.cols) as u128;
        cells * (1u128 << (2 * cells)) * WEATHER.len() as u128 * TIMES.len() as u128 * 2
    }
}

fn names(prefix: &str, n: usize) -> String {
    (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(", ")
}

pub fn build_navigation_domain(cfg: &NavConfig) -> Result<DomainBundle, DomainError> {
    cfg.validate()?;
    let mut d = String::new();
    let _ = writeln!(d, "row = {{{}}}.\ncol = {{{}}}.", names("rw", cfg.rows), names("cl", cfg.cols));
    let _ = writeln!(d, "time = {{{}}}.\nweather = {{{}}}.\n", TIMES.join(", "), WEATHER.join(", "));
    d.push_str(
        "curr_row : row.
curr_col : col.
curr_term : boolean.
curr_time : time.
curr_weather : weather.
belowof : row, row -> boolean.
leftof : col, col -> boolean.
near_row : row, row -> boolean.
near_col : col, col -> boolean.
near_window : row, col -> boolean.
sunny : row, col -> boolean.
blocked : row, col -> boolean.

random(curr_row).
random(curr_col).
random(curr_term).

",
    );
    for r in 1..cfg.rows {
        let _ = writeln!(d, "belowof(rw{r}, rw{}).", r - 1);
    }
    for c in 1..cfg.cols {
        let _ = writeln!(d, "leftof(cl{}, cl{c}).", c - 1);
    }
    d.push_str(
        "near_row(R1, R2) :- belowof(R1, R2).
near_row(R1, R2) :- near_row(R2, R1).
near_col(C1, C2) :- leftof(C1, C2).
near_col(C1, C2) :- near_col(C2, C1).

% windows let in sunlight in the morning unless we learn otherwise
",
    );
    for c in &cfg.near_window {
        let _ = writeln!(d, "near_window({}, {}).", c.row_name(), c.col_name());
    }
    d.push_str(
        "sunny(R, C) :- near_window(R, C), not -sunny(R, C), curr_time = morning.
-sunny(R, C) :- near_window(R, C), curr_weather = W, W != sunny.
",
    );

    let (gr, gc) = (cfg.goal.row_name(), cfg.goal.col_name());
    let (success, loss) = (cfg.move_success, cfg.sun_loss);
    let dynamics = format!(
        "action = {{{moves}}}.
curr_a : action.
next_row : row.
next_col : col.
next_term : boolean.
at_goal : boolean.
exposed : boolean.
row_option : row -> boolean.
col_option : col -> boolean.

random(curr_a).
random(next_term).
random(next_row : {{R : row_option(R)}}).
random(next_col : {{C : col_option(C)}}).

at_goal :- curr_row = {gr}, curr_col = {gc}.
exposed :- curr_row = R, curr_col = C, sunny(R, C).
pr(next_term | curr_term) = 1.0.
pr(next_term | at_goal) = 1.0.
pr(next_term | exposed, -curr_term) = {loss:?}.
pr(next_term = false | -curr_term, not at_goal, not exposed) = 1.0.

row_option(R) :- curr_row = R.
row_option(R2) :- curr_a = up, curr_row = R1, belowof(R1, R2), curr_col = C, -next_term, not blocked(R2, C).
row_option(R2) :- curr_a = down, curr_row = R1, belowof(R2, R1), curr_col = C, -next_term, not blocked(R2, C).
col_option(C) :- curr_col = C.
col_option(C2) :- curr_a = left, curr_col = C1, leftof(C2, C1), curr_row = R, -next_term, not blocked(R, C2).
col_option(C2) :- curr_a = right, curr_col = C1, leftof(C1, C2), curr_row = R, -next_term, not blocked(R, C2).

pr(next_row = R2 | curr_a = up, curr_row = R1, belowof(R1, R2)) = {success:?}.
pr(next_row = R2 | curr_a = down, curr_row = R1, belowof(R2, R1)) = {success:?}.
pr(next_col = C2 | curr_a = left, curr_col = C1, leftof(C2, C1)) = {success:?}.
pr(next_col = C2 | curr_a = right, curr_col = C1, leftof(C1, C2)) = {success:?}.
",
        moves = MOVES.join(", ")
    );

    let task = TaskSpec {
        name: "navigation".into(),
        partition: VariablePartition {
            endogenous: vec!["curr_row".into(), "curr_col".into(), "curr_term".into()],
            exogenous: vec!["curr_time".into(), "curr_weather".into(), "blocked".into(), "sunny".into()],
            defaults: [
                ("curr_time", vec!["curr_time=noon".to_string()]),
                ("curr_weather", vec!["curr_weather=cloudy".to_string()]),
                ("blocked", vec![]),
                ("sunny", vec![]),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        },
        relevant: vec!["curr_row".into(), "curr_col".into(), "curr_term".into()],
        context: vec!["sunny".into(), "blocked".into()],
        term: TermMode::Factor { attr: "curr_term".into() },
        next_of: BTreeMap::new(),
        action_attr: "curr_a".into(),
        actions: ActionSpec::List { values: MOVES.iter().map(|m| m.to_string()).collect() },
        discount: cfg.discount,
        reward: RewardSpec::Navigation {
            goal: [("curr_row".to_string(), gr), ("curr_col".to_string(), gc)].into(),
            goal_reward: cfg.goal_reward,
            fail_penalty: cfg.fail_penalty,
            step_cost: cfg.step_cost,
        },
        observation: None,
    };
    Ok(DomainBundle { domain: d, dynamics, priors: String::new(), task })
}

/// Expected immediate reward of the transition: the goal bonus on entering
/// the goal, the penalty on getting lost, the step cost otherwise.
pub(crate) struct NavReward {
    goal: Vec<(String, String)>,
    goal_reward: f64,
    fail_penalty: f64,
    step_cost: f64,
}

impl NavReward {
    pub(crate) fn new(task: &TaskSpec) -> Result<Self, ModelError> {
        match &task.reward {
            RewardSpec::Navigation { goal, goal_reward, fail_penalty, step_cost } => Ok(NavReward {
                goal: goal.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
                goal_reward: *goal_reward,
                fail_penalty: *fail_penalty,
                step_cost: *step_cost,
            }),
            _ => Err(ModelError::Task("navigation reward expected".into())),
        }
    }

    fn at_goal(&self, view: &ModelView<'_>, s: usize) -> bool {
        self.goal.iter().all(|(var, val)| view.value(s, var) == Some(val))
    }
}

impl RewardBuilder for NavReward {
    fn reward(&self, view: &ModelView<'_>, s: usize, a: usize) -> f64 {
        if view.space.is_term(s) || self.at_goal(view, s) {
            return 0.0;
        }
        view.row(s, a)
            .iter()
            .map(|&(t, p)| {
                let t = t as usize;
                let r = if view.space.is_term(t) {
                    -self.fail_penalty
                } else if self.at_goal(view, t) {
                    self.goal_reward
                } else {
                    -self.step_cost
                };
                p * r
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NavState {
    pub cell: Cell,
    pub term: bool,
}

impl NavState {
    /// Values of the relevant attributes, in state-space order.
    pub fn values(&self) -> Vec<String> {
        vec![self.cell.row_name(), self.cell.col_name(), self.term.to_string()]
    }
}

/// The simulated environment: true conditions plus the walker clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavWorld {
    pub cfg: NavConfig,
    pub time: String,
    pub weather: String,
    /// Near-window cells known to be shaded.
    pub shaded: BTreeSet<Cell>,
    pub step: usize,
}

impl NavWorld {
    pub fn new(cfg: NavConfig) -> Self {
        NavWorld { time: cfg.time.clone(), weather: cfg.weather.clone(), cfg, shaded: BTreeSet::new(), step: 0 }
    }

    pub fn start(&self) -> NavState {
        NavState { cell: self.cfg.start, term: false }
    }

    pub fn sunny(&self, c: Cell) -> bool {
        self.time == "morning" && self.weather == "sunny" && self.cfg.near_window.contains(&c) && !self.shaded.contains(&c)
    }

    pub fn walker(&self) -> Option<Cell> {
        self.cfg.walker.as_ref().and_then(|w| w.position(self.step))
    }

    pub fn blocked(&self, c: Cell) -> bool {
        self.walker() == Some(c)
    }

    pub fn done(&self, s: &NavState) -> bool {
        s.term || s.cell == self.cfg.goal
    }

    pub fn sense(&self) -> SensedFacts {
        let mut f = SensedFacts::new()
            .with("curr_time", [format!("curr_time={}", self.time)])
            .with("curr_weather", [format!("curr_weather={}", self.weather)]);
        f.set("blocked", self.walker().map(|c| format!("blocked({},{})", c.row_name(), c.col_name())));
        f.set("sunny", self.shaded.iter().map(|c| format!("-sunny({},{})", c.row_name(), c.col_name())));
        f
    }
}

/// Samples one step of the true dynamics.
pub fn navigation_step<R: Rng + ?Sized>(world: &NavWorld, s: NavState, action: &str, rng: &mut R) -> (NavState, f64) {
    let cfg = &world.cfg;
    if s.term {
        return (s, 0.0);
    }
    if s.cell == cfg.goal {
        return (NavState { term: true, ..s }, 0.0);
    }
    if world.sunny(s.cell) && rng.gen::<f64>() < cfg.sun_loss {
        return (NavState { term: true, ..s }, -cfg.fail_penalty);
    }
    let mut cell = s.cell;
    if let Some(t) = cfg.neighbor(s.cell, action) {
        if !world.blocked(t) && rng.gen::<f64>() < cfg.move_success {
            cell = t;
        }
    }
    let r = if cell == cfg.goal { cfg.goal_reward } else { -cfg.step_cost };
    (NavState { cell, term: false }, r)
}
