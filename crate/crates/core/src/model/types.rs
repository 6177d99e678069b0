use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::expr::{Block, Expr, Type, Value};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Characteristic {
    pub id: String,
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entity {
    pub name: String,
    pub characteristics: Vec<Characteristic>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    /// Taxonomy class of the parameter's data type; defaults to the type name.
    pub class: Option<String>,
    pub unit: Option<String>,
}

impl Param {
    pub fn type_term(&self) -> String {
        self.class.clone().unwrap_or_else(|| self.ty.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventDef {
    pub id: String,
    pub name: String,
    pub sender: String,
    pub receivers: Vec<String>,
    pub params: Vec<Param>,
}

impl EventDef {
    /// Product color of the parameters: UNIT, a single type, or a tuple.
    pub fn color(&self) -> Type {
        Type::product(&self.params.iter().map(|p| p.ty.clone()).collect::<Vec<_>>())
    }

    pub fn is_internal(&self) -> bool {
        self.receivers.len() == 1 && self.receivers[0] == self.sender
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionDef {
    pub id: String,
    pub name: String,
    pub event: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exit {
    pub action: String,
    pub next: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDef {
    pub id: String,
    pub name: String,
    pub is_initial: bool,
    pub is_final: bool,
    pub is_goal: bool,
    pub exits: Vec<Exit>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SemanticTags {
    pub aoi: BTreeSet<String>,
    pub purpose: BTreeSet<String>,
}

impl SemanticTags {
    pub fn is_empty(&self) -> bool {
        self.aoi.is_empty() && self.purpose.is_empty()
    }
}

/// Direction of an event relative to a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Send,
    Receive,
    /// The component both sends and receives the event.
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasicComponent {
    pub name: String,
    pub entity: Option<Entity>,
    pub events: Vec<EventDef>,
    pub actions: Vec<ActionDef>,
    pub states: Vec<StateDef>,
    /// Tags applying to every action without its own entry.
    pub tags: SemanticTags,
    pub action_tags: BTreeMap<String, SemanticTags>,
}

impl BasicComponent {
    pub fn event(&self, id: &str) -> Option<&EventDef> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn action(&self, id: &str) -> Option<&ActionDef> {
        self.actions.iter().find(|a| a.id == id)
    }

    pub fn state(&self, id: &str) -> Option<&StateDef> {
        self.states.iter().find(|s| s.id == id)
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }

    /// Resolves a state by id, falling back to its name.
    pub fn resolve_state(&self, key: &str) -> Option<&StateDef> {
        self.state(key).or_else(|| self.states.iter().find(|s| s.name == key))
    }

    pub fn initial_state(&self) -> &StateDef {
        self.states.iter().find(|s| s.is_initial).expect("validated: one initial state")
    }

    pub fn event_of_action(&self, action: &str) -> Option<&EventDef> {
        self.action(action).and_then(|a| self.event(&a.event))
    }

    pub fn direction(&self, event: &EventDef) -> Direction {
        let sends = event.sender == self.name;
        let receives = event.receivers.iter().any(|r| *r == self.name);
        match (sends, receives) {
            (true, true) => Direction::Internal,
            (true, false) => Direction::Send,
            _ => Direction::Receive,
        }
    }

    pub fn action_direction(&self, action: &str) -> Option<Direction> {
        self.event_of_action(action).map(|e| self.direction(e))
    }

    pub fn tags_for(&self, action: &str) -> &SemanticTags {
        self.action_tags.get(action).unwrap_or(&self.tags)
    }

    /// (from, action, to) triples of every exit condition.
    pub fn exit_triples(&self) -> Vec<(String, String, String)> {
        self.states
            .iter()
            .flat_map(|s| s.exits.iter().map(move |x| (s.id.clone(), x.action.clone(), x.next.clone())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVar {
    pub name: String,
    pub ty: Type,
    pub initial: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtTransition {
    pub from: String,
    pub to: String,
    pub event: String,
    #[serde(serialize_with = "ser_display")]
    pub guard: Expr,
    #[serde(serialize_with = "ser_block")]
    pub action: Block,
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_block<S: serde::Serializer>(b: &Block, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&b.iter().map(|st| st.to_string()).collect::<Vec<_>>().join(" "))
}

/// A basic component enriched with state variables and guarded transitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedComponent {
    pub base: BasicComponent,
    pub vars: Vec<StateVar>,
    pub transitions: Vec<ExtTransition>,
    /// True when generated from the base alone (no extension block).
    pub trivial: bool,
}

impl ExtendedComponent {
    pub fn var(&self, name: &str) -> Option<&StateVar> {
        self.vars.iter().find(|v| v.name == name)
    }

    /// Extension with no variables and one unguarded transition per exit.
    pub fn trivial(base: &BasicComponent) -> Self {
        let transitions = base
            .exit_triples()
            .into_iter()
            .map(|(from, action, to)| ExtTransition {
                from,
                to,
                event: base.action(&action).expect("validated").event.clone(),
                guard: Expr::Lit(Value::Bool(true)),
                action: Vec::new(),
                inputs: BTreeSet::new(),
                outputs: BTreeSet::new(),
            })
            .collect();
        ExtendedComponent { base: base.clone(), vars: Vec::new(), transitions, trivial: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberRef {
    pub name: String,
    pub path: String,
    pub instances: usize,
}

/// `(component, action id)`.
pub type ActionRef = (String, String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoiEntry {
    pub id: String,
    pub sender: ActionRef,
    pub receivers: Vec<ActionRef>,
    /// Name of the top-level place carrying this interaction in colored
    /// compositions; defaults to the entry id.
    pub socket: Option<String>,
}

impl PoiEntry {
    pub fn socket_name(&self) -> &str {
        self.socket.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComposedComponent {
    pub name: String,
    pub members: Vec<MemberRef>,
    pub act_in: Vec<String>,
    pub act_out: Vec<String>,
    pub poi: Vec<PoiEntry>,
    pub tags: SemanticTags,
    pub taxonomy: Option<String>,
    pub requirements: Option<String>,
}

impl ComposedComponent {
    pub fn is_closed(&self) -> bool {
        self.act_in.is_empty() && self.act_out.is_empty()
    }

    pub fn member(&self, name: &str) -> Option<&MemberRef> {
        self.members.iter().find(|m| m.name == name)
    }

    pub fn instances_of(&self, name: &str) -> usize {
        self.member(name).map_or(0, |m| m.instances)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintKind {
    S1Syntactic,
    S2StaticSemantic,
    S3aStateMachine,
    S3bTransformation,
    Custom,
}

impl ConstraintKind {
    pub fn mandatory() -> [(ConstraintKind, &'static str, &'static str); 4] {
        [
            (ConstraintKind::S1Syntactic, "s1", "components are composable at the syntactic level"),
            (ConstraintKind::S2StaticSemantic, "s2", "components are composable at the static-semantic level"),
            (ConstraintKind::S3aStateMachine, "s3a", "state-machine matching succeeds"),
            (ConstraintKind::S3bTransformation, "s3b", "the executable model preserves the conceptual model"),
        ]
    }

    pub fn from_id(id: &str) -> ConstraintKind {
        match id.to_ascii_lowercase().as_str() {
            "s1" => ConstraintKind::S1Syntactic,
            "s2" => ConstraintKind::S2StaticSemantic,
            "s3a" => ConstraintKind::S3aStateMachine,
            "s3b" => ConstraintKind::S3bTransformation,
            _ => ConstraintKind::Custom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Objective {
    pub id: String,
    pub description: String,
    pub check: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub id: String,
    pub kind: ConstraintKind,
    pub description: String,
    pub check: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QueryMode {
    /// Some explored node satisfies the predicate.
    Reachable,
    /// No explored node satisfies the predicate.
    Never,
    /// Every explored node satisfies the predicate.
    Always,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedQuery {
    pub name: String,
    pub mode: QueryMode,
    pub predicate: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RequirementSpec {
    pub objectives: Vec<Objective>,
    pub constraints: Vec<Constraint>,
    pub queries: Vec<NamedQuery>,
}

impl RequirementSpec {
    pub fn query(&self, name: &str) -> Option<&NamedQuery> {
        self.queries.iter().find(|q| q.name == name)
    }
}
