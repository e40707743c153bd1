//! Hierarchical netlists: data model, reader/printer and well-formedness.
//!
//! A netlist is an ordered sequence of modules; position 0 is the default top.
//! A module may only instantiate modules that appear after it, so the
//! hierarchy is acyclic by construction.
//!
//! Concrete syntax (dialect 1), case-insensitive, `;` comments to end of line:
//!
//! ```text
//! netlist    := module*
//! module     := "(" name "(" name* ")" "(" name* ")" "(" occurrence* ")" ")"
//! occurrence := "(" name "(" name+ ")" ref "(" name* ")" ")"
//! ref        := PRIMNAME | "(" ("RAM"|"ROM"|"STUB") nat nat ")" | name
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::fourval::GateId;
use crate::memory::MemKind;

pub const MAX_MEM_DEPTH: usize = 16;
pub const MAX_MEM_WIDTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimRef {
    Gate(GateId),
    /// D in, Q out; state is one value.
    Ff,
    /// Inputs: write enable, `depth` address bits, `width` data bits. Outputs: `width` data bits.
    Mem { kind: MemKind, depth: usize, width: usize },
}

impl PrimRef {
    pub fn arity(&self) -> (usize, usize) {
        match *self {
            PrimRef::Gate(g) => (g.arity(), 1),
            PrimRef::Ff => (1, 1),
            PrimRef::Mem { depth, width, .. } => (1 + depth + width, width),
        }
    }

    pub fn is_stateful(&self) -> bool {
        !matches!(self, PrimRef::Gate(_))
    }

    /// Input positions that only feed the next state and are not read when
    /// computing outputs: the D pin of a flip-flop, write enable and data of a memory.
    pub fn is_next_state_input(&self, pos: usize) -> bool {
        match *self {
            PrimRef::Gate(_) => false,
            PrimRef::Ff => true,
            PrimRef::Mem { depth, .. } => pos == 0 || pos > depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ref {
    Prim(PrimRef),
    Module(String),
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ref::Prim(PrimRef::Gate(g)) => write!(f, "{g}"),
            Ref::Prim(PrimRef::Ff) => f.write_str("FF"),
            Ref::Prim(PrimRef::Mem { kind, depth, width }) => write!(f, "({kind} {depth} {width})"),
            Ref::Module(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub name: String,
    pub outputs: Vec<String>,
    pub reference: Ref,
    pub inputs: Vec<String>,
}

impl Occurrence {
    pub fn new(name: impl Into<String>, outputs: Vec<String>, reference: Ref, inputs: Vec<String>) -> Self {
        Occurrence {
            name: name.into(),
            outputs,
            reference,
            inputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleDef {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub occurrences: Vec<Occurrence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Netlist {
    pub modules: Vec<ModuleDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("unresolved module reference {0}")]
    Unresolved(String),
}

impl Netlist {
    pub fn new(modules: Vec<ModuleDef>) -> Self {
        Netlist { modules }
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.modules.iter().position(|m| m.name == name)
    }

    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.modules.iter().find(|m| m.name == name)
    }
}

/// Find `name` strictly after position `from`.
pub fn lookup<'a>(n: &'a Netlist, from: usize, name: &str) -> Result<(usize, &'a ModuleDef), LookupError> {
    n.modules
        .iter()
        .enumerate()
        .skip(from + 1)
        .find(|(_, m)| m.name == name)
        .ok_or_else(|| LookupError::Unresolved(name.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefArity {
    pub inputs: usize,
    pub outputs: usize,
    pub stateful: bool,
}

/// Input/output counts of a reference seen from module position `from`, with
/// statefulness computed through the hierarchy.
pub fn ref_arity(n: &Netlist, from: usize, r: &Ref) -> Result<RefArity, LookupError> {
    match r {
        Ref::Prim(p) => {
            let (inputs, outputs) = p.arity();
            Ok(RefArity {
                inputs,
                outputs,
                stateful: p.is_stateful(),
            })
        }
        Ref::Module(name) => {
            let (pos, m) = lookup(n, from, name)?;
            let mut stateful = false;
            for o in &m.occurrences {
                if ref_arity(n, pos, &o.reference)?.stateful {
                    stateful = true;
                    break;
                }
            }
            Ok(RefArity {
                inputs: m.inputs.len(),
                outputs: m.outputs.len(),
                stateful,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Reader

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg} at line {line}, column {col}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SExp {
    Atom(String, usize, usize),
    List(Vec<SExp>, usize, usize),
}

impl SExp {
    fn pos(&self) -> (usize, usize) {
        match self {
            SExp::Atom(_, l, c) | SExp::List(_, l, c) => (*l, *c),
        }
    }
}

fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        msg: msg.into(),
    })
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Read the text into a sequence of s-expressions. Atoms are folded to upper case.
fn read_sexps(text: &str) -> Result<Vec<SExp>, ParseError> {
    let mut stack: Vec<(Vec<SExp>, usize, usize)> = vec![(Vec::new(), 1, 1)];
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '(' => {
                chars.next();
                stack.push((Vec::new(), line, col));
                col += 1;
            }
            ')' => {
                chars.next();
                if stack.len() == 1 {
                    return perr(line, col, format!("unbalanced parentheses at line {line}"));
                }
                let (items, l, c0) = stack.pop().expect("nonempty");
                stack.last_mut().expect("root").0.push(SExp::List(items, l, c0));
                col += 1;
            }
            c if is_name_char(c) => {
                let (l, c0) = (line, col);
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_name_char(c) {
                        break;
                    }
                    s.push(c.to_ascii_uppercase());
                    chars.next();
                    col += 1;
                }
                stack.last_mut().expect("root").0.push(SExp::Atom(s, l, c0));
            }
            other => return perr(line, col, format!("unexpected character {other:?}")),
        }
    }
    if stack.len() > 1 {
        let (_, l, c) = stack.pop().expect("nonempty");
        return perr(l, c, format!("unbalanced parentheses at line {l}"));
    }
    Ok(stack.pop().expect("root").0)
}

fn expect_list<'a>(e: &'a SExp, what: &str) -> Result<&'a [SExp], ParseError> {
    match e {
        SExp::List(items, _, _) => Ok(items),
        SExp::Atom(_, l, c) => perr(*l, *c, format!("expected a list for {what}")),
    }
}

fn expect_name(e: &SExp, what: &str) -> Result<String, ParseError> {
    match e {
        SExp::Atom(s, _, _) => Ok(s.clone()),
        SExp::List(_, l, c) => perr(*l, *c, format!("expected a name for {what}")),
    }
}

fn names(e: &SExp, what: &str) -> Result<Vec<String>, ParseError> {
    expect_list(e, what)?.iter().map(|x| expect_name(x, what)).collect()
}

fn parse_nat(e: &SExp, what: &str) -> Result<usize, ParseError> {
    let s = expect_name(e, what)?;
    let (l, c) = e.pos();
    s.parse().or_else(|_| perr(l, c, format!("expected a natural number for {what}")))
}

fn parse_ref(e: &SExp) -> Result<Ref, ParseError> {
    match e {
        SExp::Atom(s, _, _) => {
            if s == "FF" {
                Ok(Ref::Prim(PrimRef::Ff))
            } else if let Some(g) = GateId::from_name(s) {
                Ok(Ref::Prim(PrimRef::Gate(g)))
            } else {
                Ok(Ref::Module(s.clone()))
            }
        }
        SExp::List(items, l, c) => {
            let [k, d, w] = items.as_slice() else {
                return perr(*l, *c, "memory reference must be (KIND depth width)");
            };
            let kname = expect_name(k, "memory kind")?;
            let Some(kind) = MemKind::from_name(&kname) else {
                let (l, c) = k.pos();
                return perr(l, c, format!("unknown memory kind {kname}"));
            };
            let depth = parse_nat(d, "memory depth")?;
            let width = parse_nat(w, "memory width")?;
            if depth > MAX_MEM_DEPTH {
                let (l, c) = d.pos();
                return perr(l, c, format!("memory depth {depth} exceeds limit {MAX_MEM_DEPTH}"));
            }
            if width == 0 || width > MAX_MEM_WIDTH {
                let (l, c) = w.pos();
                return perr(l, c, format!("memory width {width} outside 1..={MAX_MEM_WIDTH}"));
            }
            Ok(Ref::Prim(PrimRef::Mem { kind, depth, width }))
        }
    }
}

fn parse_occurrence(e: &SExp) -> Result<Occurrence, ParseError> {
    let items = expect_list(e, "occurrence")?;
    let [name, outs, r, ins] = items else {
        let (l, c) = e.pos();
        return perr(l, c, "occurrence must be (name (outputs) ref (inputs))");
    };
    let outputs = names(outs, "occurrence outputs")?;
    if outputs.is_empty() {
        let (l, c) = outs.pos();
        return perr(l, c, "occurrence must have at least one output");
    }
    Ok(Occurrence {
        name: expect_name(name, "occurrence name")?,
        outputs,
        reference: parse_ref(r)?,
        inputs: names(ins, "occurrence inputs")?,
    })
}

fn parse_module(e: &SExp) -> Result<ModuleDef, ParseError> {
    let items = expect_list(e, "module")?;
    let [name, ins, outs, occs] = items else {
        let (l, c) = e.pos();
        return perr(l, c, "module must be (name (inputs) (outputs) (occurrences))");
    };
    Ok(ModuleDef {
        name: expect_name(name, "module name")?,
        inputs: names(ins, "module inputs")?,
        outputs: names(outs, "module outputs")?,
        occurrences: expect_list(occs, "occurrence list")?
            .iter()
            .map(parse_occurrence)
            .collect::<Result<_, _>>()?,
    })
}

/// Lexical and structural parsing only; see [`check_wf`] for the semantic checks.
pub fn parse_netlist(text: &str) -> Result<Netlist, ParseError> {
    let modules = read_sexps(text)?.iter().map(parse_module).collect::<Result<_, _>>()?;
    Ok(Netlist { modules })
}

/// Canonical text: upper-case symbols, one occurrence per line, two-space indent.
pub fn print_netlist(n: &Netlist) -> String {
    let mut out = String::new();
    for (i, m) in n.modules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!(
            "({}\n  ({})\n  ({})\n  (",
            m.name.to_ascii_uppercase(),
            join_upper(&m.inputs),
            join_upper(&m.outputs)
        ));
        for o in &m.occurrences {
            out.push_str(&format!(
                "\n   ({} ({}) {} ({}))",
                o.name.to_ascii_uppercase(),
                join_upper(&o.outputs),
                o.reference.to_string().to_ascii_uppercase(),
                join_upper(&o.inputs)
            ));
        }
        out.push_str("))\n");
    }
    out
}

fn join_upper(names: &[String]) -> String {
    names.iter().map(|s| s.to_ascii_uppercase()).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------
// Well-formedness

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationClass {
    DuplicateModule,
    DuplicateOccurrence,
    DuplicateWire,
    UseBeforeDef,
    UndefinedWire,
    UndefinedOutput,
    ArityMismatch,
    UnresolvedRef,
    ForwardReferenceViolation,
    BadName,
    BadPrimitive,
}

impl ViolationClass {
    pub fn name(self) -> &'static str {
        match self {
            ViolationClass::DuplicateModule => "duplicate-module",
            ViolationClass::DuplicateOccurrence => "duplicate-occurrence",
            ViolationClass::DuplicateWire => "duplicate-wire",
            ViolationClass::UseBeforeDef => "use-before-def",
            ViolationClass::UndefinedWire => "undefined-wire",
            ViolationClass::UndefinedOutput => "undefined-output",
            ViolationClass::ArityMismatch => "arity-mismatch",
            ViolationClass::UnresolvedRef => "unresolved-ref",
            ViolationClass::ForwardReferenceViolation => "forward-reference-violation",
            ViolationClass::BadName => "bad-name",
            ViolationClass::BadPrimitive => "bad-primitive",
        }
    }
}

impl fmt::Display for ViolationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfViolation {
    pub class: ViolationClass,
    pub module: String,
    /// Occurrence name, when the violation is local to one.
    pub occurrence: Option<String>,
    pub detail: String,
}

impl fmt::Display for WfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.class, self.module)?;
        if let Some(o) = &self.occurrence {
            write!(f, "/{o}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WfReport {
    pub violations: Vec<WfViolation>,
}

impl WfReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn classes(&self) -> Vec<ViolationClass> {
        self.violations.iter().map(|v| v.class).collect()
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_name_char)
}

/// Statically check a netlist.
///
/// Flip-flop D pins and memory write-enable/data pins are next-state inputs:
/// they must be defined somewhere in the module but may be defined after the
/// occurrence, which is how feedback through state is written. Every other
/// input must be defined by a formal input or an earlier occurrence.
pub fn check_wf(n: &Netlist) -> WfReport {
    let mut violations = Vec::new();
    let mut push = |class, module: &str, occ: Option<&str>, detail: String| {
        violations.push(WfViolation {
            class,
            module: module.to_string(),
            occurrence: occ.map(str::to_string),
            detail,
        })
    };

    let mut seen_modules = HashSet::new();
    for m in &n.modules {
        if !seen_modules.insert(m.name.as_str()) {
            push(ViolationClass::DuplicateModule, &m.name, None, format!("module {} defined more than once", m.name));
        }
    }

    for (pos, m) in n.modules.iter().enumerate() {
        let mname = m.name.as_str();
        if !valid_name(mname) {
            push(ViolationClass::BadName, mname, None, format!("invalid module name {mname:?}"));
        }
        let mut defined: HashSet<&str> = HashSet::new();
        for w in &m.inputs {
            if !valid_name(w) {
                push(ViolationClass::BadName, mname, None, format!("invalid wire name {w:?}"));
            }
            if !defined.insert(w) {
                push(ViolationClass::DuplicateWire, mname, None, format!("formal input {w} listed twice"));
            }
        }
        // All definitions in the module, for next-state inputs.
        let mut all_defs: HashSet<&str> = defined.clone();
        for o in &m.occurrences {
            all_defs.extend(o.outputs.iter().map(String::as_str));
        }

        let mut occ_names = HashSet::new();
        for o in &m.occurrences {
            let oname = Some(o.name.as_str());
            if !valid_name(&o.name) {
                push(ViolationClass::BadName, mname, oname, format!("invalid occurrence name {:?}", o.name));
            }
            if !occ_names.insert(o.name.as_str()) {
                push(ViolationClass::DuplicateOccurrence, mname, oname, format!("occurrence {} defined more than once", o.name));
            }

            let prim = match &o.reference {
                Ref::Prim(p) => Some(*p),
                Ref::Module(_) => None,
            };
            if let Some(PrimRef::Mem { depth, width, .. }) = prim {
                if depth > MAX_MEM_DEPTH || width == 0 || width > MAX_MEM_WIDTH {
                    push(ViolationClass::BadPrimitive, mname, oname, format!("memory ({depth}, {width}) outside tool limits"));
                }
            }

            for (i, w) in o.inputs.iter().enumerate() {
                if !valid_name(w) {
                    push(ViolationClass::BadName, mname, oname, format!("invalid wire name {w:?}"));
                }
                let next_state = prim.is_some_and(|p| p.is_next_state_input(i));
                if defined.contains(w.as_str()) {
                    continue;
                }
                if next_state {
                    if !all_defs.contains(w.as_str()) {
                        push(ViolationClass::UndefinedWire, mname, oname, format!("wire {w} is never defined"));
                    }
                } else {
                    push(ViolationClass::UseBeforeDef, mname, oname, format!("wire {w} read before it is defined"));
                }
            }

            match &o.reference {
                Ref::Module(target) => match n.modules.iter().position(|x| &x.name == target) {
                    None => push(ViolationClass::UnresolvedRef, mname, oname, format!("no module named {target}")),
                    Some(_) => match lookup(n, pos, target) {
                        Err(_) => push(
                            ViolationClass::ForwardReferenceViolation,
                            mname,
                            oname,
                            format!("module {target} is not defined after {mname}"),
                        ),
                        Ok(_) => check_arity(n, pos, o, mname, &mut push),
                    },
                },
                Ref::Prim(_) => check_arity(n, pos, o, mname, &mut push),
            }

            for w in &o.outputs {
                if !valid_name(w) {
                    push(ViolationClass::BadName, mname, oname, format!("invalid wire name {w:?}"));
                }
                if !defined.insert(w) {
                    push(ViolationClass::DuplicateWire, mname, oname, format!("wire {w} defined more than once"));
                }
            }
        }

        for w in &m.outputs {
            if !defined.contains(w.as_str()) {
                push(ViolationClass::UndefinedOutput, mname, None, format!("formal output {w} is never defined"));
            }
        }
    }
    WfReport { violations }
}

fn check_arity(n: &Netlist, from: usize, o: &Occurrence, mname: &str, push: &mut impl FnMut(ViolationClass, &str, Option<&str>, String)) {
    // Resolution failures are reported separately.
    let Ok(a) = ref_arity(n, from, &o.reference) else { return };
    if a.inputs != o.inputs.len() || a.outputs != o.outputs.len() {
        push(
            ViolationClass::ArityMismatch,
            mname,
            Some(&o.name),
            format!(
                "{} expects {} inputs and {} outputs, got {} and {}",
                o.reference,
                a.inputs,
                a.outputs,
                o.inputs.len(),
                o.outputs.len()
            ),
        );
    }
}

/// Statefulness of every module, computed bottom-up. Assumes references resolve forward.
pub fn stateful_modules(n: &Netlist) -> HashMap<String, bool> {
    let mut out: HashMap<String, bool> = HashMap::new();
    for m in n.modules.iter().rev() {
        let s = m.occurrences.iter().any(|o| match &o.reference {
            Ref::Prim(p) => p.is_stateful(),
            Ref::Module(t) => out.get(t).copied().unwrap_or(false),
        });
        out.entry(m.name.clone()).or_insert(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUF: &str = "(ID (A) (O) ((G (O) BUF (A))))";

    #[test]
    fn parse_minimal() {
        let n = parse_netlist(BUF).unwrap();
        assert_eq!(n.modules.len(), 1);
        let m = &n.modules[0];
        assert_eq!(m.name, "ID");
        assert_eq!(m.occurrences[0].reference, Ref::Prim(PrimRef::Gate(GateId::Buf)));
    }

    #[test]
    fn parse_memory_ref() {
        let n = parse_netlist("(M (A) (O) ((G (O) (RAM 2 4) (WE A0 A1 D0 D1 D2 D3))))").unwrap();
        assert_eq!(
            n.modules[0].occurrences[0].reference,
            Ref::Prim(PrimRef::Mem {
                kind: MemKind::Ram,
                depth: 2,
                width: 4
            })
        );
    }

    #[test]
    fn parse_errors() {
        let e = parse_netlist("(M (A) (O)").unwrap_err();
        assert!(e.to_string().contains("unbalanced parentheses at line 1"), "{e}");
        let e = parse_netlist("(M (A) (O) ()))").unwrap_err();
        assert!(e.msg.contains("unbalanced"));
        assert!(parse_netlist("(M (A) (O))").is_err());
        assert!(parse_netlist("(M (A) (O) ((G () BUF (A))))").is_err());
        assert!(parse_netlist("(M (A) (O) ((G (O) (RAM 17 4) (A))))").is_err());
        assert!(parse_netlist("(M (A) (O) ((G (O) (RAM 2 0) (A))))").is_err());
        assert!(parse_netlist("(M (A) (O) ((G (O) (RAM 2 65) (A))))").is_err());
        assert!(parse_netlist("(M (A) (O) ((G (O) (DISK 2 4) (A))))").is_err());
        let e = parse_netlist("(M (A)\n (O) ((G (O) BUF (A.B))))").unwrap_err();
        assert_eq!((e.line, e.col), (2, 20));
    }

    #[test]
    fn case_folding_and_comments() {
        let n = parse_netlist("; identity\n(id (a) (o) ((g (o) buf (a)))) ; done").unwrap();
        assert_eq!(n, parse_netlist(BUF).unwrap());
    }

    #[test]
    fn print_round_trip() {
        let text = "(TOP (A B) (O P) ((X (W) AND2 (A B)) (Y (O) SUB (W)) (Z (P) (ROM 1 2) (A B A B))))\n(SUB (I) (O) ((G (O) NOT (I))))";
        let n = parse_netlist(text).unwrap();
        let printed = print_netlist(&n);
        assert_eq!(parse_netlist(&printed).unwrap(), n);
        assert!(printed.contains("\n   (Y (O) SUB (W))"));
    }

    #[test]
    fn wf_accepts_minimal() {
        assert!(check_wf(&parse_netlist(BUF).unwrap()).is_ok());
    }

    fn classes(text: &str) -> Vec<ViolationClass> {
        check_wf(&parse_netlist(text).unwrap()).classes()
    }

    #[test]
    fn wf_seeded_defects() {
        assert_eq!(classes("(M (A) (O) ((G (O) AND2 (A W)) (H (W) BUF (A))))"), vec![ViolationClass::UseBeforeDef]);
        assert_eq!(classes("(M (A) (O) ((G (O) M (A))))"), vec![ViolationClass::ForwardReferenceViolation]);
        assert_eq!(classes("(M (A) (O) ((G (O) AND2 (A A A))))"), vec![ViolationClass::ArityMismatch]);
        assert_eq!(classes("(M (A) (O) ((G (O) NOPE (A))))"), vec![ViolationClass::UnresolvedRef]);
        assert_eq!(
            classes("(M (A) (O) ((G (O) BUF (A)) (H (O) BUF (A))))"),
            vec![ViolationClass::DuplicateWire]
        );
        assert_eq!(
            classes("(M (A) (O) ((G (O) BUF (A)) (G (P) BUF (A))))"),
            vec![ViolationClass::DuplicateOccurrence]
        );
        assert_eq!(classes("(M (A) (O) ((G (P) BUF (A))))"), vec![ViolationClass::UndefinedOutput]);
        assert_eq!(classes("(M (A A) (O) ((G (O) BUF (A))))"), vec![ViolationClass::DuplicateWire]);
        assert_eq!(
            classes("(S (I) (O) ((G (O) BUF (I))))\n(M (A) (O) ((G (O) S (A))))"),
            vec![ViolationClass::ForwardReferenceViolation]
        );
        assert_eq!(
            classes("(M (A) (O) ((G (O) BUF (A))))\n(M (A) (O) ((G (O) BUF (A))))"),
            vec![ViolationClass::DuplicateModule]
        );
    }

    #[test]
    fn next_state_inputs_may_be_defined_later() {
        // Toggle flip-flop: D is computed from Q after the FF occurrence.
        assert!(classes("(T () (Q) ((R (Q) FF (D)) (N (D) NOT (Q))))").is_empty());
        assert_eq!(classes("(T () (Q) ((R (Q) FF (D))))"), vec![ViolationClass::UndefinedWire]);
        // Memory address pins are read by output evaluation and must be defined first.
        assert_eq!(
            classes("(M (WE D) (O) ((R (O) (RAM 1 1) (WE A D)) (N (A) NOT (D))))"),
            vec![ViolationClass::UseBeforeDef]
        );
        assert!(classes("(M (A) (O) ((R (O) (RAM 1 1) (WE A D)) (N (WE) NOT (A)) (M (D) BUF (A))))").is_empty());
    }

    #[test]
    fn lookup_is_forward_only() {
        let n = parse_netlist("(A () (O) ((G (O) B ())))\n(B () (O) ((G (O) VDD ())))").unwrap();
        assert_eq!(lookup(&n, 0, "B").unwrap().0, 1);
        assert!(lookup(&n, 1, "A").is_err());
        assert!(lookup(&n, 0, "A").is_err());
        assert!(lookup(&n, 0, "C").is_err());
    }

    #[test]
    fn arities() {
        let n = parse_netlist("(A (I) (O) ((G (O) B (I))))\n(B (I) (O) ((G (O) NOT (I))))\n(C (D) (Q) ((G (Q) FF (D))))").unwrap();
        let and2 = ref_arity(&n, 0, &Ref::Prim(PrimRef::Gate(GateId::And2))).unwrap();
        assert_eq!((and2.inputs, and2.outputs, and2.stateful), (2, 1, false));
        let mem = ref_arity(
            &n,
            0,
            &Ref::Prim(PrimRef::Mem {
                kind: MemKind::Ram,
                depth: 2,
                width: 4,
            }),
        )
        .unwrap();
        assert_eq!((mem.inputs, mem.outputs, mem.stateful), (7, 4, true));
        assert!(!ref_arity(&n, 0, &Ref::Module("B".into())).unwrap().stateful);
        assert!(ref_arity(&n, 0, &Ref::Module("C".into())).unwrap().stateful);
        assert!(ref_arity(&n, 1, &Ref::Module("A".into())).is_err());
        let st = stateful_modules(&n);
        assert_eq!((st["A"], st["B"], st["C"]), (false, false, true));
    }
}
