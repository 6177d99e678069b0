use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{enumerate_block, eval, Env, EvalError, FirstChoice, Type, Value};

use super::component::{ColoredComponent, PortTag};
use super::system::{ColoredSystem, CompTransition, Layer, Relay, RelayKind, SysTransition, SystemMarking};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("binding {0} is not enabled in this marking")]
    StaleBinding(String),
    #[error("evaluating {transition}: {source}")]
    Eval { transition: String, source: EvalError },
    #[error("guard of {0} did not evaluate to a boolean")]
    NonBooleanGuard(String),
    #[error("token {value} does not fit place `{place}` of color {color}")]
    BadToken { place: String, value: Value, color: Type },
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("no enabled binding")]
    NoEnabledBinding,
    #[error("cannot build the system: {0}")]
    Compose(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One way a transition can occur in a marking: the tokens it takes, the
/// tokens it puts, and the variable values it saw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub transition: usize,
    pub label: String,
    pub instance: Option<i64>,
    /// Index of the `choose` outcome among the action's branches.
    pub branch: usize,
    pub assignment: BTreeMap<String, Value>,
    pub consumed: Vec<(usize, Value)>,
    pub produced: Vec<(usize, Value)>,
}

impl Binding {
    /// Short human description, e.g. `Battery.Fire#1 {CurTarget=...}`.
    pub fn describe(&self) -> String {
        let mut s = self.label.clone();
        if let Some(i) = self.instance {
            s.push_str(&format!("#{i}"));
        }
        if !self.assignment.is_empty() {
            let vars: Vec<String> = self.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
            s.push_str(&format!(" {{{}}}", vars.join(", ")));
        }
        if self.branch > 0 {
            s.push_str(&format!(" [branch {}]", self.branch));
        }
        s
    }
}

/// Every index vector of a cartesian product of lists with the given sizes,
/// in lexicographic order.
fn odometer(sizes: &[usize]) -> Vec<Vec<usize>> {
    if sizes.iter().any(|&n| n == 0) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![0; sizes.len()];
    loop {
        out.push(cur.clone());
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < sizes[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

fn params_from_token(params: &[(String, Type)], token: &Value) -> Vec<(String, Value)> {
    match params.len() {
        0 => Vec::new(),
        1 => vec![(params[0].0.clone(), token.clone())],
        _ => match token {
            Value::Tuple(fields) => params.iter().map(|(n, _)| n.clone()).zip(fields.iter().cloned()).collect(),
            _ => Vec::new(),
        },
    }
}

fn token_from_params(params: &[(String, Type)], env: &Env) -> Value {
    let get = |n: &str| env.get(n).cloned().unwrap_or(Value::Unit);
    match params.len() {
        0 => Value::Unit,
        1 => get(&params[0].0),
        _ => Value::Tuple(params.iter().map(|(n, _)| get(n)).collect()),
    }
}

fn keyed(inst: i64, v: Value) -> Value {
    Value::Tuple(vec![Value::Int(inst), v])
}

/// Candidate `(token, value)` pairs of `place` for instance `inst`. Keyed
/// places hold `(instance, value)` tokens; others hold the value itself.
fn instance_tokens(m: &SystemMarking, place: usize, keyed: bool, inst: i64) -> Vec<(Value, Value)> {
    m.tokens(place)
        .keys()
        .filter_map(|tok| match tok {
            _ if !keyed => Some((tok.clone(), tok.clone())),
            Value::Tuple(kv) if kv.len() == 2 && kv[0] == Value::Int(inst) => Some((tok.clone(), kv[1].clone())),
            _ => None,
        })
        .collect()
}

fn component_bindings(
    sys: &ColoredSystem,
    m: &SystemMarking,
    ti: usize,
    ct: &CompTransition,
    out: &mut Vec<Binding>,
) -> Result<(), EngineError> {
    let comp = &sys.components[ct.component].0;
    let lt = sys.local_transition(ct);
    let err = |source| EngineError::Eval { transition: ct.label.clone(), source };
    for inst in 0..ct.instances as i64 {
        if m.multiplicity(ct.state_in, &Value::Int(inst)) == 0 {
            continue;
        }
        // Candidate (token, value) pairs per input arc.
        let mut lists: Vec<Vec<(Value, Value)>> = Vec::new();
        for (_, place) in &ct.sv_in {
            lists.push(instance_tokens(m, *place, ct.keyed, inst));
        }
        let port_in = match ct.port {
            Some((p, PortTag::In)) => Some(p),
            _ => None,
        };
        if let Some(p) = port_in {
            lists.push(instance_tokens(m, p, ct.keyed, inst));
        }
        let sizes: Vec<usize> = lists.iter().map(Vec::len).collect();
        for pick in odometer(&sizes) {
            let mut env = Env::new(inst);
            let mut assignment = BTreeMap::new();
            let mut consumed = vec![(ct.state_in, Value::Int(inst))];
            for (k, (var, place)) in ct.sv_in.iter().enumerate() {
                let (tok, v) = &lists[k][pick[k]];
                env.set(var, v.clone());
                assignment.insert(var.clone(), v.clone());
                consumed.push((*place, tok.clone()));
            }
            if let Some(p) = port_in {
                let (tok, v) = &lists[ct.sv_in.len()][pick[ct.sv_in.len()]];
                for (n, v) in params_from_token(&lt.params, v) {
                    assignment.insert(n.clone(), v.clone());
                    env.set(&n, v);
                }
                consumed.push((p, tok.clone()));
            } else {
                for (n, ty) in &lt.params {
                    env.set(n, ty.default_value());
                }
            }
            for var in &lt.sv_out {
                if env.get(var).is_none() {
                    let ty = comp.sv(var).map(|s| s.color.clone()).unwrap_or(Type::Unit);
                    env.set(var, ty.default_value());
                }
            }
            match eval(&lt.guard, &env, &mut FirstChoice).map_err(err)? {
                Value::Bool(true) => {}
                Value::Bool(false) => continue,
                _ => return Err(EngineError::NonBooleanGuard(ct.label.clone())),
            }
            for (branch, outcome) in enumerate_block(&lt.action, &env).into_iter().enumerate() {
                let after = outcome.map_err(err)?;
                let mut produced = vec![(ct.state_out, Value::Int(inst))];
                for (var, place) in &ct.sv_out {
                    let v = after.get(var).cloned().unwrap_or(Value::Unit);
                    produced.push((*place, if ct.keyed { keyed(inst, v) } else { v }));
                }
                if let Some((p, PortTag::Out)) = ct.port {
                    produced.push((p, token_from_params(&lt.params, &after)));
                }
                out.push(Binding {
                    transition: ti,
                    label: ct.label.clone(),
                    instance: (ct.instances > 1).then_some(inst),
                    branch,
                    assignment: assignment.clone(),
                    consumed: consumed.clone(),
                    produced,
                });
            }
        }
    }
    Ok(())
}

/// Sorted multisets of size `k` drawn from `tokens`.
fn sub_multisets(tokens: &BTreeMap<Value, u32>, k: usize) -> Vec<Vec<Value>> {
    fn go(items: &[(&Value, u32)], k: usize, acc: &mut Vec<Value>, out: &mut Vec<Vec<Value>>) {
        if k == 0 {
            out.push(acc.clone());
            return;
        }
        let Some(((v, n), rest)) = items.split_first() else { return };
        for take in (0..=(*n as usize).min(k)).rev() {
            for _ in 0..take {
                acc.push((*v).clone());
            }
            go(rest, k - take, acc, out);
            acc.truncate(acc.len() - take);
        }
    }
    let items: Vec<(&Value, u32)> = tokens.iter().map(|(v, n)| (v, *n)).collect();
    let mut out = Vec::new();
    go(&items, k, &mut Vec::new(), &mut out);
    out.sort();
    out
}

fn relay_bindings(m: &SystemMarking, ti: usize, r: &Relay, out: &mut Vec<Binding>) {
    let groups: Vec<Vec<Value>> = match r.kind {
        RelayKind::Fork => m.tokens(r.input).keys().map(|v| vec![v.clone()]).collect(),
        RelayKind::Join => sub_multisets(m.tokens(r.input), r.take),
    };
    for g in groups {
        let forwarded = match r.kind {
            RelayKind::Join if r.pack => Value::Seq(g.clone()),
            RelayKind::Join => Value::Unit,
            RelayKind::Fork => g[0].clone(),
        };
        let mut produced = Vec::new();
        for &(p, instances) in &r.outputs {
            if instances > 1 {
                for i in 0..instances as i64 {
                    produced.push((p, keyed(i, forwarded.clone())));
                }
            } else {
                produced.push((p, forwarded.clone()));
            }
        }
        out.push(Binding {
            transition: ti,
            label: r.name.clone(),
            instance: None,
            branch: 0,
            assignment: BTreeMap::new(),
            consumed: g.into_iter().map(|v| (r.input, v)).collect(),
            produced,
        });
    }
}

/// All bindings enabled in `m`, ordered by transition, instance, consumed
/// token values, and `choose` branch.
pub fn enabled_bindings(sys: &ColoredSystem, m: &SystemMarking) -> Result<Vec<Binding>, EngineError> {
    let mut out = Vec::new();
    for (ti, t) in sys.transitions.iter().enumerate() {
        match t {
            SysTransition::Component(ct) => component_bindings(sys, m, ti, ct, &mut out)?,
            SysTransition::Relay(r) => relay_bindings(m, ti, r, &mut out),
        }
    }
    Ok(out)
}

/// Occurs `b` in `m`. Fails with `StaleBinding` if a consumed token is not
/// there, and with `BadToken` if a produced token does not fit its place.
pub fn fire_binding(sys: &ColoredSystem, m: &SystemMarking, b: &Binding) -> Result<SystemMarking, EngineError> {
    let mut need: HashMap<(usize, &Value), u32> = HashMap::new();
    for (p, v) in &b.consumed {
        *need.entry((*p, v)).or_default() += 1;
    }
    let mut next = m.clone();
    for ((p, v), k) in need {
        if !next.remove(p, v, k) {
            return Err(EngineError::StaleBinding(b.describe()));
        }
    }
    for (p, v) in &b.produced {
        let decl = &sys.places[*p];
        if !v.conforms_to(&decl.color) {
            return Err(EngineError::BadToken { place: decl.name.clone(), value: v.clone(), color: decl.color.clone() });
        }
        next.add(*p, v.clone(), 1);
    }
    Ok(next)
}

/// Successor markings of `m`, labeled with binding descriptions. Bindings
/// that reach the same marking are kept as separate arcs.
pub fn successors(sys: &ColoredSystem, m: &SystemMarking) -> Result<Vec<(String, SystemMarking)>, EngineError> {
    enabled_bindings(sys, m)?
        .into_iter()
        .map(|b| Ok((b.label.clone(), fire_binding(sys, m, &b)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub binding: Binding,
    /// Non-empty top-level places after the step, as `name: tokens`.
    pub observed: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceEnd {
    Deadlock,
    MaxSteps,
    Stopped,
    Quit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecutionTrace {
    pub system: String,
    pub seed: Option<u64>,
    pub steps: Vec<TraceStep>,
    pub end: TraceEnd,
    pub final_marking: SystemMarking,
}

impl ExecutionTrace {
    pub fn labels(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.binding.label.as_str()).collect()
    }

    /// Text rendering including the final marking.
    pub fn render(&self, sys: &ColoredSystem) -> String {
        format!("{self}final marking:\n{}\n", self.final_marking.describe(sys))
    }
}

impl fmt::Display for ExecutionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.seed {
            Some(s) => writeln!(f, "trace of {} (seed {s})", self.system)?,
            None => writeln!(f, "trace of {} (interactive)", self.system)?,
        }
        for s in &self.steps {
            writeln!(f, "{:>4}. {}", s.step, s.binding.describe())?;
            for o in &s.observed {
                writeln!(f, "        {o}")?;
            }
        }
        let end = match self.end {
            TraceEnd::Deadlock => "deadlock",
            TraceEnd::MaxSteps => "step limit",
            TraceEnd::Stopped => "stop condition",
            TraceEnd::Quit => "quit",
        };
        writeln!(f, "end: {end} after {} steps", self.steps.len())
    }
}

fn observe(sys: &ColoredSystem, m: &SystemMarking) -> Vec<String> {
    let text = m.describe_where(sys, |p| p.layer == Layer::Socket);
    if text.is_empty() {
        Vec::new()
    } else {
        text.lines().map(str::to_string).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationMode {
    Auto { seed: u64, max_steps: usize },
    /// Reads selections from stdin and writes prompts to stdout.
    Interactive { max_steps: usize },
}

pub fn simulate(sys: &ColoredSystem, mode: SimulationMode) -> Result<ExecutionTrace, EngineError> {
    match mode {
        SimulationMode::Auto { seed, max_steps } => simulate_until(sys, seed, max_steps, |_| false),
        SimulationMode::Interactive { max_steps } => {
            let stdin = std::io::stdin();
            simulate_interactive(sys, stdin.lock(), std::io::stdout(), max_steps)
        }
    }
}

/// Automatic run: each step picks uniformly among the enabled bindings with
/// a ChaCha8 generator seeded by `seed`. Stops on deadlock, after
/// `max_steps`, or once `stop` holds for the current marking.
pub fn simulate_until(
    sys: &ColoredSystem,
    seed: u64,
    max_steps: usize,
    stop: impl Fn(&SystemMarking) -> bool,
) -> Result<ExecutionTrace, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = sys.initial_marking();
    let mut steps = Vec::new();
    let end = loop {
        if stop(&m) {
            break TraceEnd::Stopped;
        }
        if steps.len() >= max_steps {
            break TraceEnd::MaxSteps;
        }
        let mut bindings = enabled_bindings(sys, &m)?;
        if bindings.is_empty() {
            break TraceEnd::Deadlock;
        }
        let b = bindings.swap_remove(rng.random_range(0..bindings.len()));
        m = fire_binding(sys, &m, &b)?;
        steps.push(TraceStep { step: steps.len() + 1, binding: b, observed: observe(sys, &m) });
    };
    Ok(ExecutionTrace { system: sys.name.clone(), seed: Some(seed), steps, end, final_marking: m })
}

/// Operator-driven run over a line protocol: the enabled bindings are
/// printed with indices and one index is read per step; `q` or end of input
/// quits.
pub fn simulate_interactive<R: BufRead, W: Write>(
    sys: &ColoredSystem,
    mut input: R,
    mut output: W,
    max_steps: usize,
) -> Result<ExecutionTrace, EngineError> {
    let mut m = sys.initial_marking();
    let mut steps = Vec::new();
    let end = loop {
        if steps.len() >= max_steps {
            break TraceEnd::MaxSteps;
        }
        let bindings = enabled_bindings(sys, &m)?;
        if bindings.is_empty() {
            writeln!(output, "deadlock")?;
            break TraceEnd::Deadlock;
        }
        writeln!(output, "step {}:", steps.len() + 1)?;
        for (i, b) in bindings.iter().enumerate() {
            writeln!(output, "  [{i}] {}", b.describe())?;
        }
        let chosen = loop {
            write!(output, "> ")?;
            output.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                break None;
            }
            let line = line.trim();
            if line == "q" {
                break None;
            }
            match line.parse::<usize>() {
                Ok(i) if i < bindings.len() => break Some(i),
                _ => writeln!(output, "enter an index below {} or q", bindings.len())?,
            }
        };
        let Some(i) = chosen else { break TraceEnd::Quit };
        let b = bindings[i].clone();
        m = fire_binding(sys, &m, &b)?;
        let observed = observe(sys, &m);
        for o in &observed {
            writeln!(output, "  {o}")?;
        }
        steps.push(TraceStep { step: steps.len() + 1, binding: b, observed });
    };
    Ok(ExecutionTrace { system: sys.name.clone(), seed: None, steps, end, final_marking: m })
}

/// Reads an interaction order back from a trace.
///
/// Sockets decouple senders from receivers, so the completion order of
/// interactions in the trace need not be one the synchronous composition
/// could produce. Each machine instance, however, takes part in its
/// interactions in a definite local order. The completed interactions and
/// these local orders form a precedence graph; the result is its
/// topological order, ties broken by completion step. A cycle, which no
/// synchronous run could produce, ends the order early.
pub fn interaction_order(sys: &ColoredSystem, trace: &ExecutionTrace) -> Vec<String> {
    // (wire, occurrence) per machine instance, in local firing order.
    let mut local: BTreeMap<(usize, i64), Vec<(usize, usize)>> = BTreeMap::new();
    let mut seen: HashMap<(usize, usize, i64), usize> = HashMap::new();
    let mut done: HashMap<(usize, usize), (usize, usize)> = HashMap::new(); // -> (parts, last step)
    for (step, s) in trace.steps.iter().enumerate() {
        let t = s.binding.transition;
        let SysTransition::Component(ct) = &sys.transitions[t] else { continue };
        let inst = s.binding.instance.unwrap_or(0);
        for (w, wire) in sys.wires.iter().enumerate() {
            let sends = wire.senders.contains(&t);
            let receives = wire.receivers.contains(&t);
            if !sends && !receives {
                continue;
            }
            let role = usize::from(receives && !wire.internal);
            let n = seen.entry((w, role, ct.component as i64 * 1_000_000 + inst)).or_default();
            let occ = *n;
            *n += 1;
            local.entry((ct.component, inst)).or_default().push((w, occ));
            let e = done.entry((w, occ)).or_default();
            e.0 += 1;
            e.1 = step;
        }
    }
    let complete = |k: &(usize, usize)| {
        let w = &sys.wires[k.0];
        let need = if w.internal { w.sends } else { w.sends + w.receipts };
        done.get(k).is_some_and(|&(parts, _)| parts >= need)
    };
    let mut succ: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    let mut indeg: HashMap<(usize, usize), usize> = HashMap::new();
    for chain in local.values() {
        let chain: Vec<_> = chain.iter().copied().filter(|k| complete(k)).collect();
        for k in &chain {
            indeg.entry(*k).or_default();
        }
        for pair in chain.windows(2) {
            succ.entry(pair[0]).or_default().push(pair[1]);
            *indeg.entry(pair[1]).or_default() += 1;
        }
    }
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<(usize, usize, usize)>> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(k, _)| std::cmp::Reverse((done[k].1, k.0, k.1)))
        .collect();
    let mut out = Vec::new();
    while let Some(std::cmp::Reverse((_, w, occ))) = ready.pop() {
        out.push(sys.wires[w].event.clone());
        for next in succ.get(&(w, occ)).into_iter().flatten() {
            let d = indeg.get_mut(next).expect("node");
            *d -= 1;
            if *d == 0 {
                ready.push(std::cmp::Reverse((done[next].1, next.0, next.1)));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionalReport {
    pub passed: bool,
    /// Tokens emitted on each OUT port, in emission order.
    pub outputs: BTreeMap<String, Vec<Value>>,
    pub steps: usize,
    /// False if the step limit cut the run short.
    pub quiescent: bool,
}

const FUNCTIONAL_STEP_LIMIT: usize = 10_000;

/// Runs `comp` alone (one instance). Stimuli are fed per IN port in the
/// given order, one token at a time, the next only once the port is empty.
/// Each step fires the first enabled binding; OUT tokens are collected and
/// removed. Runs until nothing is enabled and no stimulus can be fed, then
/// applies `expected` to the collected outputs.
pub fn functional_test(
    comp: &ColoredComponent,
    stimuli: &[(String, Vec<Value>)],
    expected: impl Fn(&BTreeMap<String, Vec<Value>>) -> bool,
) -> Result<FunctionalReport, EngineError> {
    let sys = ColoredSystem::standalone(comp.clone(), 1).map_err(EngineError::Compose)?;
    let mut feeds = Vec::new();
    for (port, tokens) in stimuli {
        let name = format!("{}.{port}", comp.name);
        let p = sys.place_index(&name).ok_or(EngineError::UnknownPlace(name))?;
        for v in tokens {
            if !v.conforms_to(&sys.places[p].color) {
                return Err(EngineError::BadToken {
                    place: sys.places[p].name.clone(),
                    value: v.clone(),
                    color: sys.places[p].color.clone(),
                });
            }
        }
        feeds.push((p, tokens.iter().cloned().collect::<std::collections::VecDeque<_>>()));
    }
    let out_ports: Vec<(usize, String)> = comp
        .ports
        .iter()
        .filter(|p| p.tag == PortTag::Out)
        .filter_map(|p| sys.place_index(&format!("{}.{}", comp.name, p.name)).map(|i| (i, p.name.clone())))
        .collect();
    let mut outputs: BTreeMap<String, Vec<Value>> = out_ports.iter().map(|(_, n)| (n.clone(), Vec::new())).collect();
    let mut m = sys.initial_marking();
    let mut steps = 0;
    let mut quiescent = false;
    while steps < FUNCTIONAL_STEP_LIMIT {
        for (p, queue) in &mut feeds {
            if m.count(*p) == 0 {
                if let Some(v) = queue.pop_front() {
                    m.add(*p, v, 1);
                }
            }
        }
        let bindings = enabled_bindings(&sys, &m)?;
        let Some(b) = bindings.into_iter().next() else {
            quiescent = true;
            break;
        };
        m = fire_binding(&sys, &m, &b)?;
        steps += 1;
        for (p, v) in &b.produced {
            if let Some((_, name)) = out_ports.iter().find(|(i, _)| i == p) {
                m.remove(*p, v, 1);
                outputs.get_mut(name).expect("declared").push(v.clone());
            }
        }
    }
    Ok(FunctionalReport { passed: quiescent && expected(&outputs), outputs, steps, quiescent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odometer_orders_lexicographically() {
        assert_eq!(odometer(&[2, 2]), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(odometer(&[]), vec![Vec::<usize>::new()]);
        assert!(odometer(&[3, 0]).is_empty());
    }

    #[test]
    fn multisets_respect_multiplicity() {
        let toks = BTreeMap::from([(Value::Int(1), 2), (Value::Int(2), 1)]);
        let got = sub_multisets(&toks, 2);
        assert_eq!(
            got,
            vec![vec![Value::Int(1), Value::Int(1)], vec![Value::Int(1), Value::Int(2)]]
        );
        assert_eq!(sub_multisets(&toks, 3).len(), 1);
        assert!(sub_multisets(&toks, 4).is_empty());
    }
}
