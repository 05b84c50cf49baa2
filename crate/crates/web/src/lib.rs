//! Browser bindings: exact queries over a typed program, a dialog driven by
//! typed answers, and the room-belief policy map.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use icorpp::bench::{self, DialogSession, Prompt};
use icorpp::controller::SolverConfig;
use icorpp::domains::{preset, Scenario};
use icorpp::model::{BuildOptions, SensedFacts};
use icorpp::plog::{self, parse_literal, Evidence, EvidenceKind};

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[derive(Serialize)]
struct QueryResult {
    probability: f64,
    worlds: Vec<(f64, Vec<String>)>,
}

/// Probability of `query` under `program`. Each evidence line is either
/// `obs(lit)` or `do(lit)`. Returns JSON with the possible worlds too.
#[wasm_bindgen]
pub fn query(program: &str, query: &str, evidence: &str) -> Result<String, JsError> {
    let gp = plog::ground(&plog::parse_program(program).map_err(err)?).map_err(err)?;
    let mut ev = Vec::new();
    for line in evidence.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (kind, inner) = if let Some(rest) = line.strip_prefix("obs(") {
            (EvidenceKind::Obs, rest)
        } else if let Some(rest) = line.strip_prefix("do(") {
            (EvidenceKind::Do, rest)
        } else {
            return Err(JsError::new(&format!("expected obs(..) or do(..), got `{line}`")));
        };
        let inner = inner.trim_end_matches('.').strip_suffix(')').ok_or_else(|| JsError::new(&format!("unclosed `{line}`")))?;
        ev.push(Evidence { kind, literal: parse_literal(inner).map_err(err)? });
    }
    let target = parse_literal(query).map_err(err)?;
    let dist = plog::enumerate_worlds(&gp, &ev).map_err(err)?;
    let result = QueryResult {
        probability: plog::query(&gp, &target, &ev).map_err(err)?,
        worlds: dist.iter().take(64).map(|(w, p)| (p, gp.describe(w))).collect(),
    };
    serde_json::to_string(&result).map_err(err)
}

fn scenario(name: &str) -> Result<Scenario, JsError> {
    preset(name).map_err(err)
}

fn time_fact(time: &str) -> SensedFacts {
    if time.is_empty() {
        SensedFacts::new()
    } else {
        SensedFacts::new().with("curr_time", [format!("curr_time={time}")])
    }
}

#[derive(Serialize)]
struct Turn {
    /// Question label, or `None` once the robot delivers.
    question: Option<String>,
    delivery: Option<String>,
    options: Vec<String>,
    turns: usize,
    top: Vec<(String, f64)>,
}

/// A dialog session over one of the dialog presets.
#[wasm_bindgen]
pub struct Dialog {
    session: DialogSession,
}

#[wasm_bindgen]
impl Dialog {
    /// `time` may be empty; `uniform` drops the commonsense prior.
    #[wasm_bindgen(constructor)]
    pub fn new(scenario_name: &str, time: &str, uniform: bool) -> Result<Dialog, JsError> {
        let bundle = scenario(scenario_name)?.bundle().map_err(err)?;
        let opts = if uniform { BuildOptions::FILTER_ONLY } else { BuildOptions::FULL };
        let session = DialogSession::new(&bundle, &time_fact(time), opts, &SolverConfig::default()).map_err(err)?;
        Ok(Dialog { session })
    }

    /// Current question or delivery as JSON.
    pub fn state(&self) -> Result<String, JsError> {
        let (question, delivery) = match self.session.prompt() {
            Prompt::Ask(q) => (Some(q), None),
            Prompt::Deliver(d) => (None, Some(d)),
        };
        let options = question.as_deref().map(|q| self.session.expected(q)).unwrap_or_default();
        let turn = Turn { question, delivery, options, turns: self.session.turns(), top: self.session.top(5) };
        serde_json::to_string(&turn).map_err(err)
    }

    pub fn answer(&mut self, text: &str) -> Result<String, JsError> {
        self.session.answer(text).map_err(err)?;
        self.state()
    }
}

/// Policy actions on a triangular grid of room beliefs, as JSON
/// `[{belief: [p0, p1, p2], action}]`.
#[wasm_bindgen]
pub fn policy_map(scenario_name: &str, item: &str, person: &str, resolution: usize) -> Result<String, JsError> {
    let bundle = scenario(scenario_name)?.bundle().map_err(err)?;
    let points = bench::policy_map(&bundle, &SensedFacts::new(), item, person, resolution, &SolverConfig::default()).map_err(err)?;
    serde_json::to_string(&points).map_err(err)
}
