use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use icorpp::bench::{policy_map, run_benchmark, simulate, BenchConfig, DialogSession, Prompt};
use icorpp::controller::{solve_model, KnowledgeCondition, SolverConfig, Strategy};
use icorpp::domains::{preset, Scenario, PRESETS};
use icorpp::model::{build_model, BuildOptions, DomainBundle, SensedFacts};
use icorpp::planning::{save_policy, Policy};
use icorpp::plog::{self, parse_literal, Evidence, EvidenceKind};

#[derive(Parser)]
#[command(name = "icorpp", version, about = "Commonsense reasoning and probabilistic planning for robot controllers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability of a literal under a program, with optional evidence.
    Reason {
        file: PathBuf,
        #[arg(long)]
        query: String,
        /// Observed literal; repeatable.
        #[arg(long = "obs")]
        obs: Vec<String>,
        /// Intervention `a=v` on a random attribute; repeatable.
        #[arg(long = "do")]
        interventions: Vec<String>,
        /// Also list every possible world.
        #[arg(long)]
        worlds: bool,
    },
    /// Build a model for a domain and solve it.
    Plan {
        /// Preset name, scenario TOML file, or domain bundle directory.
        domain: String,
        #[arg(long, value_enum)]
        solver: Option<SolverKind>,
        #[command(flatten)]
        facts: FactArgs,
        /// Write the policy file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one seeded episode and print its trace as JSON lines.
    Simulate {
        /// Preset name or scenario TOML file.
        domain: String,
        #[arg(long, default_value = "icorpp")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long, value_enum, default_value = "all")]
        condition: Condition,
    },
    /// Seeded campaign over strategies and knowledge conditions.
    Bench(BenchArgs),
    /// Policy actions over the simplex of room beliefs.
    PolicyMap {
        #[arg(long, default_value = "dialog-tuning")]
        scenario: String,
        #[arg(long, default_value = "cookie")]
        item: String,
        #[arg(long, default_value = "alice")]
        person: String,
        #[arg(long, default_value_t = 20)]
        resolution: usize,
        #[command(flatten)]
        facts: FactArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Talk to the dialog policy, typing answers or replaying a script.
    Dialog {
        #[arg(long, default_value = "dialog-fig11")]
        scenario: String,
        #[arg(long, conflicts_with = "script", required_unless_present = "script")]
        interactive: bool,
        /// One answer per line; `#` starts a comment.
        #[arg(long)]
        script: Option<PathBuf>,
        #[command(flatten)]
        facts: FactArgs,
        /// Start from a uniform prior over the logically possible requests.
        #[arg(long)]
        uniform: bool,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Preset name or scenario TOML file; overrides the campaign file.
    scenario: Option<String>,
    /// Campaign TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<Strategy>,
    #[arg(long, value_enum, value_delimiter = ',')]
    conditions: Vec<Condition>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fix the true time of day instead of drawing it.
    #[arg(long)]
    time: Option<String>,
    #[arg(long, value_delimiter = ',')]
    unavailable: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FactArgs {
    /// Sensed fact such as `curr_time=morning` or `unavailable(soda)`; repeatable.
    #[arg(long = "fact")]
    facts: Vec<String>,
}

impl FactArgs {
    fn sensed(&self) -> Result<SensedFacts> {
        let mut out = SensedFacts::new();
        for text in &self.facts {
            let lit = parse_literal(text).with_context(|| format!("fact `{text}`"))?;
            let mut lits = out.0.remove(&lit.atom.name).unwrap_or_default();
            lits.push(lit.to_string());
            out.set(&lit.atom.name, lits);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Vi,
    Pbvi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Condition {
    All,
    Limited,
    Inaccurate,
}

impl From<Condition> for KnowledgeCondition {
    fn from(c: Condition) -> Self {
        match c {
            Condition::All => KnowledgeCondition::All,
            Condition::Limited => KnowledgeCondition::Limited,
            Condition::Inaccurate => KnowledgeCondition::Inaccurate,
        }
    }
}

/// Campaign file: the scenario plus any `BenchConfig` field.
#[derive(Deserialize)]
struct Campaign {
    scenario: Option<String>,
    #[serde(flatten)]
    bench: BenchConfig,
}

fn scenario(name: &str) -> Result<Scenario> {
    if PRESETS.contains(&name) {
        return Ok(preset(name)?);
    }
    let path = Path::new(name);
    if path.extension().is_some_and(|e| e == "toml") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
        return toml::from_str(&text).with_context(|| format!("parsing {name}"));
    }
    bail!("unknown scenario `{name}`; presets are {}", PRESETS.join(", "))
}

fn bundle(domain: &str) -> Result<DomainBundle> {
    let path = Path::new(domain);
    if path.is_dir() {
        return DomainBundle::load(path).with_context(|| format!("loading bundle {domain}"));
    }
    Ok(scenario(domain)?.bundle()?)
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn reason(file: &Path, query: &str, obs: &[String], interventions: &[String], worlds: bool) -> Result<()> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let gp = plog::ground(&plog::parse_program(&text)?)?;
    let mut evidence = Vec::new();
    for (kind, lits) in [(EvidenceKind::Obs, obs), (EvidenceKind::Do, interventions)] {
        for l in lits {
            evidence.push(Evidence { kind, literal: parse_literal(l).with_context(|| format!("evidence `{l}`"))? });
        }
    }
    let target = parse_literal(query).with_context(|| format!("query `{query}`"))?;
    if worlds {
        let dist = plog::enumerate_worlds(&gp, &evidence)?;
        for (w, p) in dist.iter() {
            println!("{p:.6}  {{{}}}", gp.describe(w).join(", "));
        }
    }
    println!("P({target}) = {:.12}", plog::query(&gp, &target, &evidence)?);
    Ok(())
}

fn plan(domain: &str, solver: Option<SolverKind>, facts: &FactArgs, out: Option<&Path>) -> Result<()> {
    let b = bundle(domain)?;
    let model = build_model(&b, &facts.sensed()?, BuildOptions::FULL)?;
    match (solver, model.pomdp().is_some()) {
        (Some(SolverKind::Vi), true) => bail!("value iteration needs a fully observable model; use --solver pbvi"),
        (Some(SolverKind::Pbvi), false) => bail!("point-based iteration needs a partially observable model; use --solver vi"),
        _ => {}
    }
    eprintln!(
        "model {}: {} states, {} actions, {} observations",
        &model.hash[..12],
        model.states(),
        model.actions.len(),
        model.observations.len()
    );
    let policy = solve_model(&model, &SolverConfig::default())?;
    match &policy {
        Policy::Mdp(p) => {
            for (s, a) in p.actions.iter().enumerate() {
                eprintln!("  {:<28} {:<8} {:>10.4}", model.state_label(s), model.actions[*a], p.values[s]);
            }
        }
        Policy::Alpha(p) => {
            let pomdp = model.pomdp().expect("alpha policies come from POMDPs");
            eprintln!("  {} alpha vectors; first action {}", p.vectors.len(), model.actions[p.lookahead_action(pomdp, &pomdp.prior)]);
        }
    }
    if let Some(path) = out {
        write_out(Some(path), &save_policy(&policy, &model.hash, model.mdp().discount))?;
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let (file_scenario, mut cfg) = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let c: Campaign = toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            (c.scenario, c.bench)
        }
        None => (None, BenchConfig::new(vec![Strategy::Icorpp], 2000, 0)),
    };
    let name = args.scenario.or(file_scenario).context("no scenario given")?;
    if !args.strategies.is_empty() {
        cfg.strategies = args.strategies;
    }
    if !args.conditions.is_empty() {
        cfg.conditions = args.conditions.into_iter().map(Into::into).collect();
    }
    cfg.trials = args.trials.unwrap_or(cfg.trials);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.time = args.time.or(cfg.time);
    if !args.unavailable.is_empty() {
        cfg.unavailable = args.unavailable;
    }
    let result = run_benchmark(&scenario(&name)?, &cfg)?;
    for a in &result.aggregates {
        eprintln!(
            "{:<16} {:<10} cost {:>7.2} ±{:.2}  accuracy {:.3} ±{:.3}  reward {:>8.2} ±{:.2}",
            a.strategy, a.condition, a.cost.mean, a.cost.stderr, a.accuracy.mean, a.accuracy.stderr, a.reward.mean, a.reward.stderr
        );
    }
    write_out(args.out.as_deref(), &result.to_csv()?)
}

fn map(name: &str, item: &str, person: &str, resolution: usize, facts: &FactArgs, out: Option<&Path>) -> Result<()> {
    let sc = scenario(name)?;
    let Scenario::Dialog(cfg) = &sc else { bail!("policy maps need a dialog scenario") };
    let points = policy_map(&sc.bundle()?, &facts.sensed()?, item, person, resolution, &SolverConfig::default())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = cfg.rooms.iter().map(|r| format!("p_{r}")).collect();
    header.push("action".into());
    w.write_record(&header)?;
    for p in points {
        let mut rec: Vec<String> = p.belief.iter().map(|x| format!("{x:.6}")).collect();
        rec.push(p.action);
        w.write_record(&rec)?;
    }
    write_out(out, &String::from_utf8(w.into_inner()?)?)
}

fn dialog(name: &str, script: Option<&Path>, facts: &FactArgs, uniform: bool) -> Result<()> {
    let opts = if uniform { BuildOptions::FILTER_ONLY } else { BuildOptions::FULL };
    let mut session = DialogSession::new(&bundle(name)?, &facts.sensed()?, opts, &SolverConfig::default())?;
    let mut answers: Box<dyn Iterator<Item = String>> = match script {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let lines: Vec<String> = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
                .filter(|l| !l.is_empty())
                .collect();
            Box::new(lines.into_iter())
        }
        None => Box::new(io::stdin().lock().lines().map_while(|l| l.ok())),
    };
    let interactive = script.is_none();
    loop {
        let question = match session.prompt() {
            Prompt::Deliver(action) => {
                println!("robot: {action} (after {} turns)", session.turns());
                return Ok(());
            }
            Prompt::Ask(q) => q,
        };
        println!("robot: {question}? [{}]", session.expected(&question).join("/"));
        if interactive {
            print!("you: ");
            io::stdout().flush()?;
        }
        let Some(answer) = answers.next() else { bail!("no answer for `{question}` after {} turns", session.turns()) };
        if !interactive {
            println!("you: {answer}");
        }
        match answer.trim() {
            "quit" | "exit" => return Ok(()),
            "top" => {
                for (label, p) in session.top(5) {
                    println!("  {p:.3}  {label}");
                }
            }
            a => {
                if let Err(e) = session.answer(a) {
                    println!("robot: {e}");
                }
            }
        }
    }
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Reason { file, query, obs, interventions, worlds } => reason(&file, &query, &obs, &interventions, worlds),
        Command::Plan { domain, solver, facts, out } => plan(&domain, solver, &facts, out.as_deref()),
        Command::Simulate { domain, strategy, seed, trial, condition } => {
            let mut cfg = BenchConfig::new(vec![strategy], 1, seed);
            cfg.conditions = vec![condition.into()];
            for (row, trace) in simulate(&scenario(&domain)?, &cfg, trial)? {
                print!("{}", trace.to_jsonl());
                eprintln!("requested {} delivered {} success {} reward {:.2}", row.requested, row.delivered, row.success, row.reward);
            }
            Ok(())
        }
        Command::Bench(args) => bench(args),
        Command::PolicyMap { scenario, item, person, resolution, facts, out } => {
            map(&scenario, &item, &person, resolution, &facts, out.as_deref())
        }
        Command::Dialog { scenario, script, facts, uniform, .. } => dialog(&scenario, script.as_deref(), &facts, uniform),
    }
}
