use serde::{Deserialize, Serialize};

pub const TRACE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Effective exogenous facts when the action was chosen.
    pub facts: Vec<String>,
    pub model: String,
    pub action: String,
    pub observation: Option<String>,
    pub reward: f64,
}

/// A rebuild triggered by facts that contradict the current world set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplanEvent {
    pub step: usize,
    pub added: Vec<String>,
    pub removed: Vec<String>,
    pub from_model: String,
    pub to_model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub schema: u32,
    pub strategy: String,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub replans: Vec<ReplanEvent>,
    /// Model ids in the order they were used.
    pub models: Vec<String>,
    pub inconsistencies: usize,
    pub terminal: bool,
    pub truncated: bool,
    pub total_reward: f64,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line<'a> {
    Step(&'a StepRecord),
    Replan(&'a ReplanEvent),
    Summary {
        schema: u32,
        strategy: &'a str,
        seed: u64,
        steps: usize,
        models: &'a [String],
        replans: usize,
        inconsistencies: usize,
        terminal: bool,
        truncated: bool,
        total_reward: f64,
    },
}

impl EpisodeTrace {
    pub fn new(strategy: &str, seed: u64) -> Self {
        EpisodeTrace {
            schema: TRACE_SCHEMA,
            strategy: strategy.to_string(),
            seed,
            steps: Vec::new(),
            replans: Vec::new(),
            models: Vec::new(),
            inconsistencies: 0,
            terminal: false,
            truncated: false,
            total_reward: 0.0,
        }
    }

    pub fn actions(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.action.as_str()).collect()
    }

    pub fn discounted_reward(&self, gamma: f64) -> f64 {
        self.steps.iter().rev().fold(0.0, |acc, s| s.reward + gamma * acc)
    }

    /// Steps and replans interleaved by step, then one summary line.
    pub fn to_jsonl(&self) -> String {
        let mut lines = Vec::new();
        let mut replans = self.replans.iter().peekable();
        for s in &self.steps {
            while let Some(r) = replans.next_if(|r| r.step <= s.step) {
                lines.push(Line::Replan(r));
            }
            lines.push(Line::Step(s));
        }
        lines.extend(replans.map(Line::Replan));
        lines.push(Line::Summary {
            schema: self.schema,
            strategy: &self.strategy,
            seed: self.seed,
            steps: self.steps.len(),
            models: &self.models,
            replans: self.replans.len(),
            inconsistencies: self.inconsistencies,
            terminal: self.terminal,
            truncated: self.truncated,
            total_reward: self.total_reward,
        });
        let mut out = String::new();
        for l in lines {
            out.push_str(&serde_json::to_string(&l).expect("trace lines serialize"));
            out.push('\n');
        }
        out
    }
}
