//! Output (`se`) and next-state (`de`) evaluation of hierarchical netlists.
//!
//! Occurrences are evaluated once, in order, over a wire environment seeded
//! with the formal inputs. A flip-flop exposes its current state and latches
//! its D wire on `de`; a memory reads at its address pins and writes on `de`.
//! The state of a module is a node with one child per stateful occurrence, in
//! occurrence order; a stateless module has the empty node as its state.

use std::fmt;

use thiserror::Error;

use crate::fourval::{values_to_string, GateId, GateTable, StdGates, Value4, Vec4};
use crate::memory::{mem_make, mem_read, mem_wf, mem_write, MemError, MemKind, MemTree};
use crate::netlist::{check_wf, Netlist, PrimRef, Ref};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateTree {
    Bit(Value4),
    Cell(MemTree),
    Node(Vec<StateTree>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateShape {
    Bit,
    Mem { kind: MemKind, depth: usize, width: usize },
    Node(Vec<StateShape>),
}

impl StateShape {
    /// All flip-flops `F`, every memory filled with `F` bits of its declared kind.
    pub fn zero_state(&self) -> StateTree {
        self.fill_state(&mut |_| Value4::F)
    }

    /// Build a conforming state, drawing every bit (flip-flop or payload) from `draw`.
    /// The argument tells whether the bit belongs to a memory payload.
    pub fn fill_state(&self, draw: &mut impl FnMut(bool) -> Value4) -> StateTree {
        match self {
            StateShape::Bit => StateTree::Bit(draw(false)),
            StateShape::Mem { kind, depth, width } => {
                let cells = (0..1usize << depth)
                    .map(|_| crate::memory::MemCell::new(*kind, Vec4::new((0..*width).map(|_| draw(true)).collect())))
                    .collect();
                StateTree::Cell(MemTree::from_cells(cells))
            }
            StateShape::Node(children) => StateTree::Node(children.iter().map(|c| c.fill_state(draw)).collect()),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, StateShape::Node(c) if c.is_empty())
    }
}

/// Node-for-node conformance, including memory depth, width and cell kinds.
pub fn wf_state(s: &StateTree, shape: &StateShape) -> bool {
    match (s, shape) {
        (StateTree::Bit(_), StateShape::Bit) => true,
        (StateTree::Cell(m), StateShape::Mem { kind, depth, width }) => {
            mem_wf(m, *depth, *width) && m.cells().iter().all(|c| c.kind == *kind)
        }
        (StateTree::Node(cs), StateShape::Node(ss)) => cs.len() == ss.len() && cs.iter().zip(ss).all(|(c, s)| wf_state(c, s)),
        _ => false,
    }
}

impl StateTree {
    pub fn empty() -> Self {
        StateTree::Node(Vec::new())
    }

    /// Every stored value in a fixed order: flip-flop bits, then memory payloads
    /// cell by cell in address order, children left to right.
    pub fn values(&self) -> Vec<Value4> {
        let mut out = Vec::new();
        self.collect_values(&mut out);
        out
    }

    fn collect_values(&self, out: &mut Vec<Value4>) {
        match self {
            StateTree::Bit(v) => out.push(*v),
            StateTree::Cell(m) => {
                for c in m.cells() {
                    out.extend_from_slice(c.payload.bits());
                }
            }
            StateTree::Node(cs) => cs.iter().for_each(|c| c.collect_values(out)),
        }
    }

    /// Same shape and kinds with the values replaced, in [`StateTree::values`] order.
    /// Panics if `vals` is too short.
    pub fn with_values(&self, vals: &[Value4]) -> StateTree {
        let mut it = vals.iter().copied();
        let out = self.rebuild(&mut it);
        debug_assert!(it.next().is_none(), "too many values");
        out
    }

    fn rebuild(&self, it: &mut impl Iterator<Item = Value4>) -> StateTree {
        match self {
            StateTree::Bit(_) => StateTree::Bit(it.next().expect("value count")),
            StateTree::Cell(m) => {
                let cells = m
                    .cells()
                    .into_iter()
                    .map(|c| {
                        let payload = (0..c.payload.width()).map(|_| it.next().expect("value count")).collect();
                        crate::memory::MemCell::new(c.kind, Vec4::new(payload))
                    })
                    .collect();
                StateTree::Cell(MemTree::from_cells(cells))
            }
            StateTree::Node(cs) => StateTree::Node(cs.iter().map(|c| c.rebuild(it)).collect()),
        }
    }

    /// Path of the first leaf where `self` is not below `other`, e.g. `2/cell[5]/bit[0]`.
    pub fn first_divergence(&self, other: &StateTree) -> Option<String> {
        fn go(a: &StateTree, b: &StateTree, path: &str) -> Option<String> {
            let here = |s: String| if path.is_empty() { s } else { format!("{path}/{s}") };
            match (a, b) {
                (StateTree::Bit(x), StateTree::Bit(y)) => (!x.approx(*y)).then(|| if path.is_empty() { "bit".into() } else { path.to_string() }),
                (StateTree::Cell(m1), StateTree::Cell(m2)) => {
                    let (c1, c2) = (m1.cells(), m2.cells());
                    if c1.len() != c2.len() {
                        return Some(here("cell-shape".into()));
                    }
                    for (i, (x, y)) in c1.iter().zip(&c2).enumerate() {
                        if x.kind != y.kind {
                            return Some(here(format!("cell[{i}]/kind")));
                        }
                        if x.payload.width() != y.payload.width() {
                            return Some(here(format!("cell[{i}]/width")));
                        }
                        if let Some(j) = (0..x.payload.width()).find(|&j| !x.payload.get(j).approx(y.payload.get(j))) {
                            return Some(here(format!("cell[{i}]/bit[{j}]")));
                        }
                    }
                    None
                }
                (StateTree::Node(xs), StateTree::Node(ys)) => {
                    if xs.len() != ys.len() {
                        return Some(here("node-length".into()));
                    }
                    xs.iter().zip(ys).enumerate().find_map(|(i, (x, y))| go(x, y, &here(i.to_string())))
                }
                _ => Some(here("shape".into())),
            }
        }
        go(self, other, "")
    }
}

impl fmt::Display for StateTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_state(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("netlist is not well-formed: {0}")]
    NotWellFormed(String),
    #[error("no module at position {0}")]
    NoSuchModule(usize),
    #[error("module {module} takes {expected} inputs, got {got}")]
    InputCount { module: String, expected: usize, got: usize },
    #[error("state does not match the state shape of module {0}")]
    StateShape(String),
    #[error("module {module} read undefined wire {wire}")]
    UndefinedWire { module: String, wire: String },
    #[error("memory access in module {module}: {source}")]
    Memory { module: String, source: MemError },
}

#[derive(Debug, Clone)]
enum Kind {
    Gate(GateId),
    Ff,
    Mem { depth: usize },
    Sub(usize),
}

#[derive(Debug, Clone)]
struct COcc {
    kind: Kind,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    /// Index among the module's state children.
    slot: Option<usize>,
}

#[derive(Debug, Clone)]
struct CModule {
    name: String,
    wires: Vec<String>,
    n_inputs: usize,
    outputs: Vec<usize>,
    occs: Vec<COcc>,
    shape: StateShape,
}

/// A netlist compiled for repeated evaluation under a given gate semantics.
pub struct Evaluator {
    netlist: Netlist,
    modules: Vec<CModule>,
    gates: Box<dyn GateTable>,
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Evaluator").field("modules", &self.modules.len()).finish()
    }
}

type Pass = (Vec<Value4>, Option<Vec<StateTree>>);

impl Evaluator {
    pub fn new(netlist: &Netlist) -> Result<Self, EvalError> {
        Self::with_gates(netlist, Box::new(StdGates))
    }

    /// Compile `netlist`, which must pass [`check_wf`].
    pub fn with_gates(netlist: &Netlist, gates: Box<dyn GateTable>) -> Result<Self, EvalError> {
        let report = check_wf(netlist);
        if let Some(v) = report.violations.first() {
            return Err(EvalError::NotWellFormed(v.to_string()));
        }
        let n = netlist.modules.len();
        let mut modules: Vec<Option<CModule>> = vec![None; n];
        for pos in (0..n).rev() {
            let m = &netlist.modules[pos];
            let mut index = std::collections::HashMap::new();
            let mut wires = Vec::new();
            for w in m.inputs.iter().chain(m.occurrences.iter().flat_map(|o| o.outputs.iter())) {
                index.insert(w.as_str(), wires.len());
                wires.push(w.clone());
            }
            let mut occs = Vec::new();
            let mut shapes = Vec::new();
            for o in &m.occurrences {
                let (kind, shape) = match &o.reference {
                    Ref::Prim(PrimRef::Gate(g)) => (Kind::Gate(*g), None),
                    Ref::Prim(PrimRef::Ff) => (Kind::Ff, Some(StateShape::Bit)),
                    Ref::Prim(PrimRef::Mem { kind, depth, width }) => (
                        Kind::Mem { depth: *depth },
                        Some(StateShape::Mem {
                            kind: *kind,
                            depth: *depth,
                            width: *width,
                        }),
                    ),
                    Ref::Module(name) => {
                        let sub = (pos + 1..n).find(|&j| &netlist.modules[j].name == name).expect("checked by check_wf");
                        let sh = &modules[sub].as_ref().expect("compiled bottom-up").shape;
                        (Kind::Sub(sub), (!sh.is_empty()).then(|| sh.clone()))
                    }
                };
                let slot = shape.map(|s| {
                    shapes.push(s);
                    shapes.len() - 1
                });
                occs.push(COcc {
                    kind,
                    inputs: o.inputs.iter().map(|w| index[w.as_str()]).collect(),
                    outputs: o.outputs.iter().map(|w| index[w.as_str()]).collect(),
                    slot,
                });
            }
            modules[pos] = Some(CModule {
                name: m.name.clone(),
                n_inputs: m.inputs.len(),
                outputs: m.outputs.iter().map(|w| index[w.as_str()]).collect(),
                wires,
                occs,
                shape: StateShape::Node(shapes),
            });
        }
        Ok(Evaluator {
            netlist: netlist.clone(),
            modules: modules.into_iter().map(|m| m.expect("compiled")).collect(),
            gates,
        })
    }

    pub fn netlist(&self) -> &Netlist {
        &self.netlist
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.netlist.position(name)
    }

    pub fn module_name(&self, at: usize) -> &str {
        &self.modules[at].name
    }

    pub fn input_count(&self, at: usize) -> usize {
        self.modules[at].n_inputs
    }

    pub fn output_count(&self, at: usize) -> usize {
        self.modules[at].outputs.len()
    }

    pub fn state_shape(&self, at: usize) -> Result<&StateShape, EvalError> {
        self.modules.get(at).map(|m| &m.shape).ok_or(EvalError::NoSuchModule(at))
    }

    fn check_call(&self, at: usize, inputs: &[Value4], s: &StateTree) -> Result<(), EvalError> {
        let m = self.modules.get(at).ok_or(EvalError::NoSuchModule(at))?;
        if inputs.len() != m.n_inputs {
            return Err(EvalError::InputCount {
                module: m.name.clone(),
                expected: m.n_inputs,
                got: inputs.len(),
            });
        }
        if !wf_state(s, &m.shape) {
            return Err(EvalError::StateShape(m.name.clone()));
        }
        Ok(())
    }

    pub fn se(&self, at: usize, inputs: &[Value4], s: &StateTree) -> Result<Vec<Value4>, EvalError> {
        self.check_call(at, inputs, s)?;
        Ok(self.pass(at, inputs, children(s), false)?.0)
    }

    pub fn de(&self, at: usize, inputs: &[Value4], s: &StateTree) -> Result<StateTree, EvalError> {
        Ok(self.step(at, inputs, s)?.1)
    }

    /// Outputs and next state from a single evaluation pass.
    pub fn step(&self, at: usize, inputs: &[Value4], s: &StateTree) -> Result<(Vec<Value4>, StateTree), EvalError> {
        self.check_call(at, inputs, s)?;
        let (outs, next) = self.pass(at, inputs, children(s), true)?;
        Ok((outs, StateTree::Node(next.expect("requested"))))
    }

    /// Fold `step` over a stimulus trace.
    pub fn run(&self, at: usize, s0: &StateTree, trace: &[Vec<Value4>]) -> Result<(Vec<Vec<Value4>>, StateTree), EvalError> {
        let mut s = s0.clone();
        let mut outs = Vec::with_capacity(trace.len());
        for inputs in trace {
            let (o, next) = self.step(at, inputs, &s)?;
            outs.push(o);
            s = next;
        }
        Ok((outs, s))
    }

    fn pass(&self, at: usize, inputs: &[Value4], state: &[StateTree], want_next: bool) -> Result<Pass, EvalError> {
        let m = &self.modules[at];
        let mut env: Vec<Option<Value4>> = vec![None; m.wires.len()];
        for (slot, v) in env.iter_mut().zip(inputs) {
            *slot = Some(*v);
        }
        let read = |env: &[Option<Value4>], w: usize| {
            env[w].ok_or_else(|| EvalError::UndefinedWire {
                module: m.name.clone(),
                wire: m.wires[w].clone(),
            })
        };
        let shape_err = || EvalError::StateShape(m.name.clone());
        let mut sub_next: Vec<Option<StateTree>> = Vec::new();
        if want_next {
            sub_next.resize(state.len(), None);
        }
        for o in &m.occs {
            match &o.kind {
                Kind::Gate(g) => {
                    let mut args = [Value4::X; 3];
                    for (a, w) in args.iter_mut().zip(&o.inputs) {
                        *a = read(&env, *w)?;
                    }
                    env[o.outputs[0]] = Some(self.gates.eval(*g, &args[..o.inputs.len()]));
                }
                Kind::Ff => {
                    let StateTree::Bit(v) = state[o.slot.expect("stateful")] else {
                        return Err(shape_err());
                    };
                    env[o.outputs[0]] = Some(v);
                }
                Kind::Mem { depth } => {
                    let StateTree::Cell(mem) = &state[o.slot.expect("stateful")] else {
                        return Err(shape_err());
                    };
                    let addr = o.inputs[1..1 + depth].iter().map(|w| read(&env, *w)).collect::<Result<Vec<_>, _>>()?;
                    let data = mem_read(mem, &addr).map_err(|source| EvalError::Memory {
                        module: m.name.clone(),
                        source,
                    })?;
                    for (w, v) in o.outputs.iter().zip(data.bits()) {
                        env[*w] = Some(*v);
                    }
                }
                Kind::Sub(sub) => {
                    let args = o.inputs.iter().map(|w| read(&env, *w)).collect::<Result<Vec<_>, _>>()?;
                    let sub_state: &[StateTree] = match o.slot {
                        Some(k) => match &state[k] {
                            StateTree::Node(cs) => cs,
                            _ => return Err(shape_err()),
                        },
                        None => &[],
                    };
                    let (outs, next) = self.pass(*sub, &args, sub_state, want_next && o.slot.is_some())?;
                    for (w, v) in o.outputs.iter().zip(outs) {
                        env[*w] = Some(v);
                    }
                    if let (Some(k), Some(next)) = (o.slot, next) {
                        sub_next[k] = Some(StateTree::Node(next));
                    }
                }
            }
        }
        let outputs = m.outputs.iter().map(|w| read(&env, *w)).collect::<Result<Vec<_>, _>>()?;
        if !want_next {
            return Ok((outputs, None));
        }
        let mut next = Vec::with_capacity(state.len());
        for o in &m.occs {
            let Some(k) = o.slot else { continue };
            let s = match &o.kind {
                Kind::Ff => StateTree::Bit(read(&env, o.inputs[0])?),
                Kind::Mem { depth } => {
                    let StateTree::Cell(mem) = &state[k] else {
                        return Err(shape_err());
                    };
                    let vals = o.inputs.iter().map(|w| read(&env, *w)).collect::<Result<Vec<_>, _>>()?;
                    let written = mem_write(mem, &vals[1..1 + depth], &vals[1 + depth..], vals[0]).map_err(|source| EvalError::Memory {
                        module: m.name.clone(),
                        source,
                    })?;
                    StateTree::Cell(written)
                }
                Kind::Sub(_) => sub_next[k].take().expect("computed in pass"),
                Kind::Gate(_) => unreachable!("gates are stateless"),
            };
            next.push(s);
        }
        Ok((outputs, Some(next)))
    }
}

fn children(s: &StateTree) -> &[StateTree] {
    match s {
        StateTree::Node(cs) => cs,
        _ => &[],
    }
}

/// State shape of the module at `at`; the netlist must pass [`check_wf`].
pub fn state_shape(n: &Netlist, at: usize) -> Result<StateShape, EvalError> {
    Evaluator::new(n)?.state_shape(at).cloned()
}

pub fn se(n: &Netlist, at: usize, inputs: &[Value4], s: &StateTree) -> Result<Vec<Value4>, EvalError> {
    Evaluator::new(n)?.se(at, inputs, s)
}

pub fn de(n: &Netlist, at: usize, inputs: &[Value4], s: &StateTree) -> Result<StateTree, EvalError> {
    Evaluator::new(n)?.de(at, inputs, s)
}

pub fn run(n: &Netlist, at: usize, s0: &StateTree, trace: &[Vec<Value4>]) -> Result<(Vec<Vec<Value4>>, StateTree), EvalError> {
    Evaluator::new(n)?.run(at, s0, trace)
}

// ---------------------------------------------------------------------------
// Text forms

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct TextError {
    pub line: usize,
    pub msg: String,
}

/// Parse a stimulus file: one vector per non-blank line; `;` starts a comment.
pub fn parse_stimulus(text: &str) -> Result<Vec<Vec<Value4>>, TextError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec4 = line.parse().map_err(|e: crate::fourval::BadValueChar| TextError {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(v.into_bits());
    }
    Ok(out)
}

/// Nested state text: a bit is a value character, a node is `( children )`, and a
/// memory is `(KIND depth width) fill` optionally followed by `{ addr vec ... }`
/// records overriding the fill.
pub fn print_state(s: &StateTree) -> String {
    match s {
        StateTree::Bit(v) => v.to_char().to_string(),
        StateTree::Cell(m) => {
            let cells = m.cells();
            // Most frequent word, earliest on ties.
            let mut counts: Vec<(&Vec4, usize)> = Vec::new();
            for c in &cells {
                match counts.iter_mut().find(|(v, _)| **v == c.payload) {
                    Some(e) => e.1 += 1,
                    None => counts.push((&c.payload, 1)),
                }
            }
            let fill = counts.iter().rev().max_by_key(|(_, n)| *n).map(|(v, _)| (*v).clone()).unwrap_or_default();
            let mut out = format!("({} {} {}) {fill}", m.kind(), m.depth(), m.width());
            let recs: Vec<String> = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.payload != fill)
                .map(|(a, c)| format!("{a} {}", c.payload))
                .collect();
            if !recs.is_empty() {
                out.push_str(&format!(" {{ {} }}", recs.join(" ")));
            }
            out
        }
        StateTree::Node(cs) => format!("({})", cs.iter().map(print_state).collect::<Vec<_>>().join(" ")),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    LBrace,
    RBrace,
    Word(String),
}

fn tokenize_state(text: &str) -> Result<Vec<(Tok, usize)>, TextError> {
    let mut toks = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("");
        let mut word = String::new();
        let flush = |word: &mut String, toks: &mut Vec<(Tok, usize)>| {
            if !word.is_empty() {
                toks.push((Tok::Word(std::mem::take(word).to_ascii_uppercase()), i + 1));
            }
        };
        for c in line.chars() {
            let t = match c {
                '(' => Some(Tok::Open),
                ')' => Some(Tok::Close),
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                c if c.is_whitespace() => None,
                c => {
                    word.push(c);
                    continue;
                }
            };
            flush(&mut word, &mut toks);
            if let Some(t) = t {
                toks.push((t, i + 1));
            }
        }
        flush(&mut word, &mut toks);
    }
    Ok(toks)
}

pub fn parse_state(text: &str) -> Result<StateTree, TextError> {
    let toks = tokenize_state(text)?;
    let mut pos = 0;
    let s = parse_state_at(&toks, &mut pos)?;
    if let Some((_, line)) = toks.get(pos) {
        return Err(TextError {
            line: *line,
            msg: "trailing input after state".into(),
        });
    }
    Ok(s)
}

fn parse_state_at(toks: &[(Tok, usize)], pos: &mut usize) -> Result<StateTree, TextError> {
    let last_line = toks.last().map(|t| t.1).unwrap_or(1);
    let err = |line, msg: &str| TextError { line, msg: msg.to_string() };
    let Some((tok, line)) = toks.get(*pos) else {
        return Err(err(last_line, "unexpected end of state"));
    };
    let line = *line;
    *pos += 1;
    match tok {
        Tok::Word(w) => {
            let mut cs = w.chars();
            match (cs.next().and_then(Value4::from_char), cs.next()) {
                (Some(v), None) => Ok(StateTree::Bit(v)),
                _ => Err(err(line, &format!("expected a single value character, got {w}"))),
            }
        }
        Tok::Open => {
            if let Some((Tok::Word(k), _)) = toks.get(*pos) {
                if let Some(kind) = MemKind::from_name(k) {
                    *pos += 1;
                    return parse_cell(toks, pos, kind, line);
                }
            }
            let mut children = Vec::new();
            loop {
                match toks.get(*pos) {
                    Some((Tok::Close, _)) => {
                        *pos += 1;
                        return Ok(StateTree::Node(children));
                    }
                    Some(_) => children.push(parse_state_at(toks, pos)?),
                    None => return Err(err(last_line, "unbalanced parentheses")),
                }
            }
        }
        _ => Err(err(line, "unexpected token")),
    }
}

fn parse_cell(toks: &[(Tok, usize)], pos: &mut usize, kind: MemKind, line: usize) -> Result<StateTree, TextError> {
    let err = |line, msg: String| TextError { line, msg };
    let word = |pos: &mut usize, what: &str| -> Result<(String, usize), TextError> {
        match toks.get(*pos) {
            Some((Tok::Word(w), l)) => {
                *pos += 1;
                Ok((w.clone(), *l))
            }
            Some((_, l)) => Err(err(*l, format!("expected {what}"))),
            None => Err(err(line, format!("expected {what}"))),
        }
    };
    let nat = |(w, l): (String, usize)| w.parse::<usize>().map_err(|_| err(l, format!("expected a number, got {w}")));
    let depth = nat(word(pos, "memory depth")?)?;
    let width = nat(word(pos, "memory width")?)?;
    if depth > crate::netlist::MAX_MEM_DEPTH {
        return Err(err(line, format!("memory depth {depth} exceeds limit")));
    }
    match toks.get(*pos) {
        Some((Tok::Close, _)) => *pos += 1,
        _ => return Err(err(line, "expected `)` after memory header".into())),
    }
    let (fw, fl) = word(pos, "fill vector")?;
    let fill: Vec4 = fw.parse().map_err(|e: crate::fourval::BadValueChar| err(fl, e.to_string()))?;
    let mut cells = match mem_make(kind, depth, width, &fill) {
        Ok(m) => m.cells().into_iter().cloned().collect::<Vec<_>>(),
        Err(e) => return Err(err(fl, e.to_string())),
    };
    if let Some((Tok::LBrace, _)) = toks.get(*pos) {
        *pos += 1;
        loop {
            if let Some((Tok::RBrace, _)) = toks.get(*pos) {
                *pos += 1;
                break;
            }
            let (aw, al) = word(pos, "memory address")?;
            let addr = nat((aw, al))?;
            if addr >= cells.len() {
                return Err(err(al, format!("address {addr} out of range")));
            }
            let (vw, vl) = word(pos, "memory value")?;
            let v: Vec4 = vw.parse().map_err(|e: crate::fourval::BadValueChar| err(vl, e.to_string()))?;
            if v.width() != width {
                return Err(err(vl, format!("value width {} does not match memory width {width}", v.width())));
            }
            cells[addr].payload = v;
        }
    }
    Ok(StateTree::Cell(MemTree::from_cells(cells)))
}

/// Render output vectors of a run, one line per cycle.
pub fn format_outputs(outs: &[Vec<Value4>]) -> String {
    outs.iter().enumerate().map(|(t, o)| format!("{t} {}\n", values_to_string(o))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;
    use Value4::*;

    fn nl(s: &str) -> Netlist {
        parse_netlist(s).unwrap()
    }

    const FF: &str = "(FFM (D) (Q) ((R (Q) FF (D))))";

    #[test]
    fn shapes() {
        let n = nl("(G (A) (O) ((X (O) NOT (A))))");
        assert_eq!(state_shape(&n, 0).unwrap(), StateShape::Node(vec![]));
        assert_eq!(state_shape(&nl(FF), 0).unwrap(), StateShape::Node(vec![StateShape::Bit]));
        let n = nl("(M (D WE A0 A1) (Q O0 O1 O2 O3) ((R (Q) FF (D)) (M (O0 O1 O2 O3) (RAM 2 4) (WE A0 A1 D D D D))))");
        assert_eq!(
            state_shape(&n, 0).unwrap(),
            StateShape::Node(vec![
                StateShape::Bit,
                StateShape::Mem {
                    kind: MemKind::Ram,
                    depth: 2,
                    width: 4
                }
            ])
        );
    }

    #[test]
    fn wf_state_examples() {
        let shape = StateShape::Node(vec![
            StateShape::Bit,
            StateShape::Mem {
                kind: MemKind::Ram,
                depth: 2,
                width: 4,
            },
        ]);
        let z = shape.zero_state();
        assert!(wf_state(&z, &shape));
        let bad = StateTree::Node(vec![StateTree::Bit(F), StateTree::Bit(F)]);
        assert!(!wf_state(&bad, &shape));
        let m = mem_make(MemKind::Ram, 1, 4, &"FFFF".parse().unwrap()).unwrap();
        assert!(!wf_state(&StateTree::Node(vec![StateTree::Bit(F), StateTree::Cell(m)]), &shape));
        let rom = mem_make(MemKind::Rom, 2, 4, &"FFFF".parse().unwrap()).unwrap();
        assert!(!wf_state(&StateTree::Node(vec![StateTree::Bit(F), StateTree::Cell(rom)]), &shape));
    }

    #[test]
    fn se_de_basics() {
        let buf = nl("(ID (A) (O) ((G (O) BUF (A))))");
        assert_eq!(se(&buf, 0, &[T], &StateTree::empty()).unwrap(), vec![T]);
        let ff = nl(FF);
        let s = StateTree::Node(vec![StateTree::Bit(F)]);
        assert_eq!(se(&ff, 0, &[T], &s).unwrap(), vec![F]);
        assert_eq!(de(&ff, 0, &[T], &s).unwrap(), StateTree::Node(vec![StateTree::Bit(T)]));
        assert_eq!(de(&buf, 0, &[T], &StateTree::empty()).unwrap(), StateTree::empty());
    }

    #[test]
    fn rom_ignores_writes_through_evaluator() {
        let n = nl("(M (WE A D) (O) ((R (O) (ROM 1 1) (WE A D))))");
        let s0 = StateTree::Node(vec![StateTree::Cell(mem_make(MemKind::Rom, 1, 1, &"F".parse().unwrap()).unwrap())]);
        assert_eq!(de(&n, 0, &[T, T, T], &s0).unwrap(), s0);
    }

    #[test]
    fn run_examples() {
        let ff = nl(FF);
        let s0 = StateTree::Node(vec![StateTree::Bit(X)]);
        let (outs, fin) = run(&ff, 0, &s0, &[vec![T], vec![F]]).unwrap();
        assert_eq!(outs, vec![vec![X], vec![T]]);
        assert_eq!(fin, StateTree::Node(vec![StateTree::Bit(F)]));
        let (outs, fin) = run(&ff, 0, &s0, &[]).unwrap();
        assert!(outs.is_empty());
        assert_eq!(fin, s0);
    }

    #[test]
    fn stateful_submodule_state_nests() {
        let n = nl("(TOP (D) (Q) ((G (W) NOT (D)) (S (Q) FFM (W)) (H (U) BUF (D))))\n(FFM (D) (Q) ((R (Q) FF (D))))");
        let ev = Evaluator::new(&n).unwrap();
        let shape = ev.state_shape(0).unwrap().clone();
        assert_eq!(shape, StateShape::Node(vec![StateShape::Node(vec![StateShape::Bit])]));
        let s = shape.zero_state();
        let (o, next) = ev.step(0, &[F], &s).unwrap();
        assert_eq!(o, vec![F]);
        assert_eq!(next, StateTree::Node(vec![StateTree::Node(vec![StateTree::Bit(T)])]));
    }

    #[test]
    fn contract_errors() {
        let ff = nl(FF);
        assert!(matches!(se(&ff, 0, &[], &StateTree::Node(vec![StateTree::Bit(F)])), Err(EvalError::InputCount { .. })));
        assert!(matches!(se(&ff, 0, &[T], &StateTree::empty()), Err(EvalError::StateShape(_))));
        let bad = nl("(M (A) (O) ((G (O) AND2 (A W))))");
        assert!(matches!(Evaluator::new(&bad), Err(EvalError::NotWellFormed(_))));
    }

    #[test]
    fn state_text_round_trip() {
        let m = crate::memory::parse_mem_image("2 TX\n", MemKind::Ram, 2, 2, &"FF".parse().unwrap()).unwrap();
        let s = StateTree::Node(vec![StateTree::Bit(T), StateTree::Node(vec![]), StateTree::Cell(m)]);
        let text = print_state(&s);
        assert_eq!(text, "(T () (RAM 2 2) FF { 2 TX })");
        assert_eq!(parse_state(&text).unwrap(), s);
        assert_eq!(parse_state("( x (rom 0 3) tfz )").unwrap().to_string(), "(X (ROM 0 3) TFZ)");
        assert!(parse_state("(T").is_err());
        assert!(matches!(parse_state("(RAM 1 2) FF").unwrap(), StateTree::Cell(_)));
        assert!(parse_state("((RAM 1 2) FFF)").is_err());
        assert!(parse_state("((RAM 1 2) FF { 2 TT })").is_err());
        assert!(parse_state("TT").is_err());
    }

    #[test]
    fn stimulus_parsing() {
        assert_eq!(parse_stimulus("TF\n; c\n\nxz\n").unwrap(), vec![vec![T, F], vec![X, Z]]);
        assert_eq!(parse_stimulus("T\nQ").unwrap_err().line, 2);
    }

    #[test]
    fn values_round_trip() {
        let m = crate::memory::parse_mem_image("1 TX\n", MemKind::Rom, 1, 2, &"FF".parse().unwrap()).unwrap();
        let s = StateTree::Node(vec![StateTree::Bit(Z), StateTree::Cell(m)]);
        let vals = s.values();
        assert_eq!(vals, vec![Z, F, F, T, X]);
        assert_eq!(s.with_values(&vals), s);
        let x = s.with_values(&[X; 5]);
        assert_eq!(x.first_divergence(&s), None);
        assert_eq!(s.first_divergence(&x).as_deref(), Some("0"));
    }
}
