use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{item_closeness, room_closeness, DeliveryScheme, DomainError, ObservationSpec, Ontology, RewardSpec};
use crate::model::{
    ActionSpec, DialogDim, DomainBundle, ModelError, ModelView, ObservationBuilder, RewardBuilder, StateSpace, TaskSpec,
    TermMode, VariablePartition,
};

pub const YES: &str = "yes";
pub const NO: &str = "no";
pub const TIMES: [&str; 3] = ["morning", "noon", "evening"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Prof,
    Student,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub name: String,
    pub role: Role,
    #[serde(default)]
    pub paid: bool,
    #[serde(default)]
    pub registered: bool,
    #[serde(default)]
    pub office: Option<String>,
}

impl Person {
    fn new(name: &str, role: Role, authorized: bool, office: Option<&str>) -> Self {
        Person {
            name: name.into(),
            role,
            paid: authorized && role == Role::Prof,
            registered: authorized && role == Role::Student,
            office: office.map(Into::into),
        }
    }
}

/// Time-dependent preference for the items under an ontology node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPrior {
    pub class: String,
    pub time: String,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeliverySetting {
    Flat { correct: f64, wrong: f64 },
    Closeness { r_plus: f64, r_minus: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogConfig {
    pub ontology: Ontology,
    pub items: Vec<String>,
    pub rooms: Vec<String>,
    /// Distance from the shop to each room.
    pub distances: BTreeMap<String, f64>,
    pub persons: Vec<Person>,
    #[serde(default)]
    pub item_priors: Vec<ItemPrior>,
    /// Probability that a request goes to the requester's own office.
    #[serde(default)]
    pub office_affinity: Option<f64>,
    pub confirm_accuracy: f64,
    #[serde(default)]
    pub wh_accuracy: Option<f64>,
    pub ask_cost: f64,
    pub confirm_cost: f64,
    pub delivery: DeliverySetting,
    pub discount: f64,
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn distances(rooms: &[&str]) -> BTreeMap<String, f64> {
    rooms.iter().enumerate().map(|(i, r)| (r.to_string(), (i + 1) as f64)).collect()
}

impl DialogConfig {
    fn base(ontology: Ontology, items: &[&str], rooms: &[&str], persons: Vec<Person>) -> Self {
        DialogConfig {
            ontology,
            items: strings(items),
            rooms: strings(rooms),
            distances: distances(rooms),
            persons,
            item_priors: Vec::new(),
            office_affinity: None,
            confirm_accuracy: 0.8,
            wh_accuracy: None,
            ask_cost: 1.0,
            confirm_cost: 2.0,
            delivery: DeliverySetting::Flat { correct: 50.0, wrong: 100.0 },
            discount: 0.95,
        }
    }

    fn coffee_and_sandwich() -> Ontology {
        Ontology::from_edges("item", &[("item", "drink"), ("item", "food"), ("drink", "coffee"), ("food", "sandwich")])
    }

    fn morning_coffee(class: &str) -> Vec<ItemPrior> {
        vec![ItemPrior { class: class.into(), time: "morning".into(), mass: 0.8 }]
    }

    /// Two items, one room, two authorized persons.
    pub fn paper_small() -> Self {
        let persons = vec![Person::new("alice", Role::Prof, true, None), Person::new("bob", Role::Prof, true, None)];
        DialogConfig {
            item_priors: Self::morning_coffee("coffee"),
            ..Self::base(Self::coffee_and_sandwich(), &["coffee", "sandwich"], &["lab"], persons)
        }
    }

    /// Six items, three rooms, four persons of whom two are authorized.
    pub fn paper_full() -> Self {
        let o = Ontology::default();
        let items = ["regular", "decaf", "soda", "juice", "sandwich", "cookie"];
        let persons = vec![
            Person::new("alice", Role::Prof, true, Some("r0")),
            Person::new("bob", Role::Prof, false, Some("r1")),
            Person::new("dan", Role::Student, true, Some("r2")),
            Person::new("erin", Role::Student, false, Some("r1")),
        ];
        DialogConfig {
            item_priors: Self::morning_coffee("coffee"),
            office_affinity: Some(0.7),
            ..Self::base(o, &items, &["r0", "r1", "r2"], persons)
        }
    }

    /// Four items, three rooms, two persons, no commonsense preferences, and
    /// closeness-weighted delivery penalties.
    pub fn tuning() -> Self {
        let persons = vec![Person::new("alice", Role::Prof, true, None), Person::new("dan", Role::Student, true, None)];
        DialogConfig {
            delivery: DeliverySetting::Closeness { r_plus: 20.0, r_minus: -20.0 },
            ..Self::base(Ontology::default(), &["regular", "decaf", "soda", "cookie"], &["r0", "r1", "r2"], persons)
        }
    }

    /// Two items, two rooms, two persons each with an office. Yes/no answers
    /// are recognized more reliably than open ones and cost the same.
    pub fn illustrative() -> Self {
        let persons = vec![Person::new("p0", Role::Prof, true, Some("r0")), Person::new("p1", Role::Prof, true, Some("r1"))];
        DialogConfig {
            item_priors: Self::morning_coffee("coffee"),
            office_affinity: Some(0.7),
            confirm_accuracy: 0.95,
            wh_accuracy: Some(0.7),
            confirm_cost: 1.0,
            ..Self::base(Self::coffee_and_sandwich(), &["coffee", "sandwich"], &["r0", "r1"], persons)
        }
    }

    /// Five persons where three are authorized by payment or registration.
    pub fn five_persons() -> Self {
        let persons = vec![
            Person::new("alice", Role::Prof, true, None),
            Person::new("bob", Role::Prof, true, None),
            Person::new("carol", Role::Prof, false, None),
            Person::new("dan", Role::Student, true, None),
            Person::new("erin", Role::Student, false, None),
        ];
        Self::base(Self::coffee_and_sandwich(), &["coffee", "sandwich"], &["lab"], persons)
    }

    pub fn person_names(&self) -> Vec<String> {
        self.persons.iter().map(|p| p.name.clone()).collect()
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |m: String| Err(DomainError::Config(m));
        self.ontology.validate()?;
        if self.items.is_empty() || self.rooms.is_empty() || self.persons.is_empty() {
            return bad("items, rooms and persons must be non-empty".into());
        }
        let mut seen = BTreeSet::from([YES.to_string(), NO.to_string()]);
        for name in self.items.iter().chain(&self.rooms).chain(self.persons.iter().map(|p| &p.name)) {
            if !seen.insert(name.clone()) || name.contains('_') {
                return bad(format!("name `{name}` must be unique, not yes/no, and free of underscores"));
            }
        }
        for i in &self.items {
            if !self.ontology.is_leaf(i) {
                return bad(format!("item `{i}` is not a leaf of the ontology"));
            }
        }
        for r in &self.rooms {
            match self.distances.get(r) {
                Some(d) if *d > 0.0 => {}
                _ => return bad(format!("room `{r}` needs a positive distance")),
            }
        }
        for p in &self.persons {
            if let Some(o) = &p.office {
                if !self.rooms.contains(o) {
                    return Err(DomainError::UnknownName(o.clone()));
                }
            }
        }
        for ip in &self.item_priors {
            if !self.ontology.contains(&ip.class) || !TIMES.contains(&ip.time.as_str()) {
                return Err(DomainError::UnknownName(format!("{}@{}", ip.class, ip.time)));
            }
        }
        let acc = [Some(self.confirm_accuracy), self.wh_accuracy, self.office_affinity];
        if acc.iter().flatten().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return bad("accuracies and affinities must lie in (0, 1]".into());
        }
        Ok(())
    }

    pub fn dims() -> Vec<DialogDim> {
        [("req_item", "item"), ("req_room", "room"), ("req_person", "person")]
            .map(|(attr, label)| DialogDim { attr: attr.into(), label: label.into() })
            .to_vec()
    }

    /// Every action the dynamics must know about, over the full sorts.
    fn all_actions(&self) -> Vec<String> {
        let mut out = strings(&["ask_item", "ask_room", "ask_person"]);
        out.extend(self.items.iter().chain(&self.rooms).chain(self.persons.iter().map(|p| &p.name)).map(|v| format!("conf_{v}")));
        out.extend(self.deliveries());
        out
    }

    fn deliveries(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in &self.items {
            for r in &self.rooms {
                for p in &self.persons {
                    out.push(format!("del_{i}_{r}_{}", p.name));
                }
            }
        }
        out
    }

    pub fn delivery_scheme(&self) -> DeliveryScheme {
        match self.delivery {
            DeliverySetting::Flat { correct, wrong } => DeliveryScheme::Flat { correct, wrong },
            DeliverySetting::Closeness { r_plus, r_minus } => DeliveryScheme::Closeness {
                r_plus,
                r_minus,
                ontology: self.ontology.clone(),
                distances: self.distances.clone(),
            },
        }
    }
}

pub fn build_dialog_domain(cfg: &DialogConfig) -> Result<DomainBundle, DomainError> {
    cfg.validate()?;
    let mut d = String::new();
    let classes = cfg.ontology.classes();
    let _ = writeln!(d, "item = {{{}}}.", cfg.items.join(", "));
    let _ = writeln!(d, "room = {{{}}}.", cfg.rooms.join(", "));
    let _ = writeln!(d, "person = {{{}}}.", cfg.person_names().join(", "));
    let _ = writeln!(d, "class = {{{}}}.", classes.join(", "));
    let _ = writeln!(d, "time = {{{}}}.\n", TIMES.join(", "));
    d.push_str(
        "req_item : item.
req_room : room.
req_person : person.
curr_time : time.
prof : person -> boolean.
student : person -> boolean.
paid : person -> boolean.
registered : person -> boolean.
authorized : person -> boolean.
place : person, room -> boolean.
subcls : class, class -> boolean.
is : item, class -> boolean.
unavailable : item -> boolean.
available : item -> boolean.
task : item, room, person -> boolean.

random(curr_time).
random(req_item : {I : available(I)}).
random(req_room).
random(req_person : {P : authorized(P)}).

",
    );
    for p in &cfg.persons {
        let role = match p.role {
            Role::Prof => "prof",
            Role::Student => "student",
        };
        let _ = writeln!(d, "{role}({}).", p.name);
        if let Some(o) = &p.office {
            let _ = writeln!(d, "place({}, {o}).", p.name);
        }
    }
    for f in cfg.ontology.facts(&cfg.items) {
        let _ = writeln!(d, "{f}");
    }
    d.push_str(
        "
subcls(C1, C3) :- subcls(C1, C2), subcls(C2, C3).
is(I, C1) :- is(I, C2), subcls(C2, C1).

authorized(P) :- paid(P), prof(P).
authorized(P) :- registered(P), student(P).
-paid(P) :- not paid(P), prof(P).
-registered(P) :- not registered(P), student(P).
-authorized(P) :- not authorized(P).

available(I) :- not unavailable(I).
task(I, R, P) :- req_item = I, req_room = R, req_person = P, authorized(P).
",
    );

    let mut priors = String::new();
    for ip in &cfg.item_priors {
        let leaves: Vec<_> = cfg.ontology.leaves_under(&ip.class).into_iter().filter(|l| cfg.items.contains(l)).collect();
        for l in &leaves {
            let _ = writeln!(priors, "pr(req_item = {l} | curr_time = {}) = {:?}.", ip.time, ip.mass / leaves.len() as f64);
        }
    }
    if let Some(a) = cfg.office_affinity {
        let _ = writeln!(priors, "pr(req_room = R | req_person = P, place(P, R)) = {a:?}.");
    }

    let mut dynamics = format!(
        "action = {{{}}}.
curr_a : action.
curr_term : boolean.
next_term : boolean.
next_item : item.
next_room : room.
next_person : person.
delivery : action -> boolean.

random(curr_a).
random(curr_term).
random(next_term).

next_item = I :- req_item = I.
next_room = R :- req_room = R.
next_person = P :- req_person = P.
pr(next_term | curr_term) = 1.0.
pr(next_term | curr_a = A, delivery(A)) = 1.0.
pr(next_term = false | -curr_term, curr_a = A, not delivery(A)) = 1.0.

",
        cfg.all_actions().join(", ")
    );
    for a in cfg.deliveries() {
        let _ = writeln!(dynamics, "delivery({a}).");
    }

    let facts = |attr: &str, pick: fn(&Person) -> bool| -> Vec<String> {
        cfg.persons.iter().filter(|p| pick(p)).map(|p| format!("{attr}({})", p.name)).collect()
    };
    let dims = DialogConfig::dims();
    let task = TaskSpec {
        name: "dialog".into(),
        partition: VariablePartition {
            endogenous: strings(&["req_item", "req_room", "req_person"]),
            exogenous: strings(&["curr_time", "unavailable", "paid", "registered"]),
            defaults: [
                ("curr_time".to_string(), vec![]),
                ("unavailable".to_string(), vec![]),
                ("paid".to_string(), facts("paid", |p| p.paid)),
                ("registered".to_string(), facts("registered", |p| p.registered)),
            ]
            .into(),
        },
        relevant: strings(&["req_item", "req_room", "req_person"]),
        context: Vec::new(),
        term: TermMode::Single { attr: "curr_term".into() },
        next_of: [("req_item", "next_item"), ("req_room", "next_room"), ("req_person", "next_person")]
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .into(),
        action_attr: "curr_a".into(),
        actions: ActionSpec::Dialog { dims },
        discount: cfg.discount,
        reward: RewardSpec::Dialog { ask_cost: cfg.ask_cost, confirm_cost: cfg.confirm_cost, delivery: cfg.delivery_scheme() },
        observation: Some(ObservationSpec::Dialog {
            confirm_accuracy: cfg.confirm_accuracy,
            wh_accuracy: cfg.wh_accuracy,
            vocabulary: vec![cfg.items.clone(), cfg.rooms.clone(), cfg.person_names()],
        }),
    };
    Ok(DomainBundle { domain: d, dynamics, priors, task })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DialogAction {
    /// Open question about one dimension.
    Ask(usize),
    /// Yes/no question about one value of a dimension.
    Confirm(usize, String),
    /// Delivery of one value per dimension.
    Deliver(Vec<String>),
}

impl DialogAction {
    pub fn is_question(&self) -> bool {
        !matches!(self, DialogAction::Deliver(_))
    }

    pub fn label(&self, dims: &[DialogDim]) -> String {
        match self {
            DialogAction::Ask(k) => format!("ask_{}", dims[*k].label),
            DialogAction::Confirm(_, v) => format!("conf_{v}"),
            DialogAction::Deliver(vs) => format!("del_{}", vs.join("_")),
        }
    }

    /// Inverse of [`label`](Self::label); `vocabulary` resolves which
    /// dimension a confirmed value belongs to.
    pub fn parse(label: &str, dims: &[DialogDim], vocabulary: &[Vec<String>]) -> Option<Self> {
        if let Some(l) = label.strip_prefix("ask_") {
            return dims.iter().position(|d| d.label == l).map(DialogAction::Ask);
        }
        if let Some(v) = label.strip_prefix("conf_") {
            return vocabulary.iter().position(|vs| vs.iter().any(|x| x == v)).map(|k| DialogAction::Confirm(k, v.to_string()));
        }
        let parts: Vec<String> = label.strip_prefix("del_")?.split('_').map(String::from).collect();
        (parts.len() == dims.len() && parts.iter().zip(vocabulary).all(|(p, vs)| vs.contains(p)))
            .then_some(DialogAction::Deliver(parts))
    }
}

/// Questions over every dimension, confirmations of each value present in
/// the state space, and one delivery per combination of present values.
pub fn dialog_actions(dims: &[DialogDim], space: &StateSpace) -> Result<Vec<(String, DialogAction)>, DomainError> {
    let domains = dims
        .iter()
        .map(|d| space.var_index(&d.attr).map(|i| space.domains[i].clone()).ok_or_else(|| DomainError::UnknownName(d.attr.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out: Vec<DialogAction> = (0..dims.len()).map(DialogAction::Ask).collect();
    for (k, vs) in domains.iter().enumerate() {
        out.extend(vs.iter().map(|v| DialogAction::Confirm(k, v.clone())));
    }
    let mut combos = vec![Vec::new()];
    for vs in &domains {
        combos = combos
            .into_iter()
            .flat_map(|c: Vec<String>| {
                vs.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    out.extend(combos.into_iter().map(DialogAction::Deliver));
    Ok(out.into_iter().map(|a| (a.label(dims), a)).collect())
}

/// Request values of a state in dimension order.
fn request(view: &ModelView<'_>, dims: &[DialogDim], s: usize) -> Option<Vec<String>> {
    dims.iter().map(|d| view.value(s, &d.attr).map(String::from)).collect()
}

/// Accuracy of an open question over `n` confusable answers.
pub fn wh_accuracy(n: usize, fixed: Option<f64>) -> f64 {
    if n <= 1 {
        1.0
    } else {
        fixed.unwrap_or_else(|| (0.9 - 0.05 * (n as f64 - 2.0)).max(0.5))
    }
}

/// Noisy answers to questions; serves both as the model's observation
/// function and as the simulated user.
#[derive(Debug, Clone, PartialEq)]
pub struct DialogSensor {
    pub dims: Vec<DialogDim>,
    pub vocabulary: Vec<Vec<String>>,
    pub confirm_accuracy: f64,
    pub wh_accuracy: Vec<f64>,
}

impl DialogSensor {
    pub fn new(spec: &ObservationSpec, dims: &[DialogDim]) -> Result<Self, ModelError> {
        let ObservationSpec::Dialog { confirm_accuracy, wh_accuracy: fixed, vocabulary } = spec;
        if vocabulary.len() != dims.len() {
            return Err(ModelError::Task("one vocabulary per dialog dimension".into()));
        }
        Ok(DialogSensor {
            dims: dims.to_vec(),
            vocabulary: vocabulary.clone(),
            confirm_accuracy: *confirm_accuracy,
            wh_accuracy: vocabulary.iter().map(|v| wh_accuracy(v.len(), *fixed)).collect(),
        })
    }

    pub fn from_task(task: &TaskSpec) -> Result<Self, ModelError> {
        match (&task.observation, &task.actions) {
            (Some(spec), ActionSpec::Dialog { dims }) => Self::new(spec, dims),
            _ => Err(ModelError::Task("not a dialog task".into())),
        }
    }

    pub fn parse(&self, label: &str) -> Option<DialogAction> {
        DialogAction::parse(label, &self.dims, &self.vocabulary)
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self.vocabulary.iter().flatten().cloned().collect();
        out.push(YES.into());
        out.push(NO.into());
        out
    }

    /// Distribution over answer labels for a question about `request`.
    pub fn answer_distribution(&self, request: &[String], action: &DialogAction) -> Result<Vec<(String, f64)>, DomainError> {
        match action {
            DialogAction::Ask(k) => {
                let vs = &self.vocabulary[*k];
                let acc = self.wh_accuracy[*k];
                let wrong = if vs.len() > 1 { (1.0 - acc) / (vs.len() - 1) as f64 } else { 0.0 };
                Ok(vs.iter().map(|v| (v.clone(), if *v == request[*k] { acc } else { wrong })).collect())
            }
            DialogAction::Confirm(k, v) => {
                let p_yes = if request[*k] == *v { self.confirm_accuracy } else { 1.0 - self.confirm_accuracy };
                Ok(vec![(YES.into(), p_yes), (NO.into(), 1.0 - p_yes)])
            }
            DialogAction::Deliver(_) => Err(DomainError::NotAQuestion(action.label(&self.dims))),
        }
    }
}

impl ObservationBuilder for DialogSensor {
    fn labels(&self) -> Vec<String> {
        DialogSensor::labels(self)
    }

    fn prob(&self, view: &ModelView<'_>, a: usize, next: usize, o: usize) -> f64 {
        let labels = DialogSensor::labels(self);
        let action = self.parse(&view.actions[a]);
        let req = request(view, &self.dims, next);
        match (action, req) {
            (Some(act), Some(req)) if act.is_question() => self
                .answer_distribution(&req, &act)
                .map(|dist| dist.iter().filter(|(l, _)| *l == labels[o]).map(|(_, p)| p).sum())
                .unwrap_or(0.0),
            _ => f64::from(u8::from(labels[o] == NO)),
        }
    }
}

/// Samples the simulated user's answer.
pub fn dialog_observe<R: Rng + ?Sized>(
    sensor: &DialogSensor,
    request: &[String],
    action: &DialogAction,
    rng: &mut R,
) -> Result<String, DomainError> {
    match action {
        DialogAction::Ask(k) => {
            if rng.gen::<f64>() < sensor.wh_accuracy[*k] {
                return Ok(request[*k].clone());
            }
            let others: Vec<&String> = sensor.vocabulary[*k].iter().filter(|v| **v != request[*k]).collect();
            Ok(others.choose(rng).map_or_else(|| request[*k].clone(), |v| (*v).clone()))
        }
        DialogAction::Confirm(k, v) => {
            let truth = request[*k] == *v;
            let honest = rng.gen::<f64>() < sensor.confirm_accuracy;
            Ok(if truth == honest { YES } else { NO }.to_string())
        }
        DialogAction::Deliver(_) => Err(DomainError::NotAQuestion(action.label(&sensor.dims))),
    }
}

/// Reward of delivering `delivered` when `requested` was asked for. Closeness
/// uses the dimension labels `item` and `room`; other dimensions count as
/// fully close.
pub fn delivery_reward(
    scheme: &DeliveryScheme,
    dims: &[DialogDim],
    requested: &[String],
    delivered: &[String],
) -> Result<f64, DomainError> {
    let exact = requested == delivered;
    match scheme {
        DeliveryScheme::Flat { correct, wrong } => Ok(if exact { *correct } else { -*wrong }),
        DeliveryScheme::Closeness { r_plus, r_minus, ontology, distances } => {
            if exact {
                return Ok(*r_plus);
            }
            let mut lambda = 1.0;
            for ((d, req), del) in dims.iter().zip(requested).zip(delivered) {
                lambda *= match d.label.as_str() {
                    "item" => item_closeness(ontology, del, req)?,
                    "room" => room_closeness(distances, del, req)?,
                    _ => 1.0,
                };
            }
            Ok((1.0 - lambda) * r_minus)
        }
    }
}

pub(crate) struct DialogReward {
    dims: Vec<DialogDim>,
    sensor_vocab: Vec<Vec<String>>,
    ask_cost: f64,
    confirm_cost: f64,
    scheme: DeliveryScheme,
}

impl DialogReward {
    pub(crate) fn new(task: &TaskSpec, dims: &[DialogDim]) -> Result<Self, ModelError> {
        let RewardSpec::Dialog { ask_cost, confirm_cost, delivery } = &task.reward else {
            return Err(ModelError::Task("dialog reward expected".into()));
        };
        let vocab = match &task.observation {
            Some(ObservationSpec::Dialog { vocabulary, .. }) => vocabulary.clone(),
            None => return Err(ModelError::Task("dialog reward needs the answer vocabulary".into())),
        };
        Ok(DialogReward {
            dims: dims.to_vec(),
            sensor_vocab: vocab,
            ask_cost: *ask_cost,
            confirm_cost: *confirm_cost,
            scheme: delivery.clone(),
        })
    }
}

impl RewardBuilder for DialogReward {
    fn reward(&self, view: &ModelView<'_>, s: usize, a: usize) -> f64 {
        let Some(req) = request(view, &self.dims, s) else { return 0.0 };
        match DialogAction::parse(&view.actions[a], &self.dims, &self.sensor_vocab) {
            Some(DialogAction::Ask(_)) => -self.ask_cost,
            Some(DialogAction::Confirm(..)) => -self.confirm_cost,
            Some(DialogAction::Deliver(del)) => delivery_reward(&self.scheme, &self.dims, &req, &del).unwrap_or(f64::NAN),
            None => f64::NAN,
        }
    }
}
