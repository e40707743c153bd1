//! Four-valued signals, the approximation order on them, and primitive gates.
//!
//! `X` is the bottom of the order; `T`, `F` and `Z` are pairwise incomparable
//! maximal elements. Gates are defined by the monotone extension of their
//! boolean function: `Z` inputs read as `X`, every boolean completion of the
//! unknown inputs is evaluated, and the gate returns the common result if all
//! completions agree and `X` otherwise.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value4 {
    T,
    F,
    X,
    Z,
}

impl Value4 {
    pub const ALL: [Value4; 4] = [Value4::T, Value4::F, Value4::X, Value4::Z];

    pub fn from_bool(b: bool) -> Self {
        if b {
            Value4::T
        } else {
            Value4::F
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value4::T => Some(true),
            Value4::F => Some(false),
            _ => None,
        }
    }

    pub fn is_bool(self) -> bool {
        matches!(self, Value4::T | Value4::F)
    }

    /// `self ⊑ other`: `X` approximates everything, otherwise equality.
    pub fn approx(self, other: Value4) -> bool {
        self == Value4::X || self == other
    }

    pub fn to_char(self) -> char {
        match self {
            Value4::T => 'T',
            Value4::F => 'F',
            Value4::X => 'X',
            Value4::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'T' => Some(Value4::T),
            'F' => Some(Value4::F),
            'X' => Some(Value4::X),
            'Z' => Some(Value4::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Value4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

pub fn value_approx(a: Value4, b: Value4) -> bool {
    a.approx(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid value character {0:?} at offset {1}")]
pub struct BadValueChar(pub char, pub usize);

/// A fixed-width vector of four-valued bits, least-significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Vec4(Vec<Value4>);

impl Vec4 {
    pub fn new(bits: Vec<Value4>) -> Self {
        Vec4(bits)
    }

    pub fn filled(v: Value4, width: usize) -> Self {
        Vec4(vec![v; width])
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[Value4] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<Value4> {
        self.0
    }

    /// Panics when `i` is out of range; an out-of-range access is a caller bug,
    /// never an unknown value.
    pub fn get(&self, i: usize) -> Value4 {
        self.0[i]
    }

    pub fn is_bool(&self) -> bool {
        self.0.iter().all(|v| v.is_bool())
    }

    pub fn approx(&self, other: &Vec4) -> bool {
        vec_approx(self, other)
    }
}

impl From<Vec<Value4>> for Vec4 {
    fn from(bits: Vec<Value4>) -> Self {
        Vec4(bits)
    }
}

impl FromStr for Vec4 {
    type Err = BadValueChar;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(i, c)| Value4::from_char(c).ok_or(BadValueChar(c, i)))
            .collect::<Result<Vec<_>, _>>()
            .map(Vec4)
    }
}

impl fmt::Display for Vec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            write!(f, "{}", v.to_char())?;
        }
        Ok(())
    }
}

pub fn vec_approx(u: &Vec4, v: &Vec4) -> bool {
    u.width() == v.width() && u.0.iter().zip(&v.0).all(|(a, b)| a.approx(*b))
}

/// Render a slice of values in the textual vector form.
pub fn values_to_string(vals: &[Value4]) -> String {
    vals.iter().map(|v| v.to_char()).collect()
}

/// `Some(n)` for boolean vectors, `None` ("non-boolean") otherwise.
/// Widths above 128 bits are not representable and also yield `None`.
pub fn vec_to_nat(v: &Vec4) -> Option<u128> {
    if v.width() > 128 {
        return None;
    }
    let mut acc = 0u128;
    for (i, b) in v.bits().iter().enumerate() {
        match b {
            Value4::T => acc |= 1 << i,
            Value4::F => {}
            _ => return None,
        }
    }
    Some(acc)
}

pub fn nat_to_vec(n: u128, width: usize) -> Vec4 {
    Vec4((0..width).map(|i| Value4::from_bool(i < 128 && (n >> i) & 1 == 1)).collect())
}

/// The fixed set of primitive combinational gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateId {
    Vdd,
    Vss,
    Buf,
    Not,
    And2,
    Or2,
    Nand2,
    Nor2,
    Xor2,
    Xnor2,
    /// Inputs are (select, then, else); select `T` picks the then-branch.
    Mux,
}

impl GateId {
    pub const ALL: [GateId; 11] = [
        GateId::Vdd,
        GateId::Vss,
        GateId::Buf,
        GateId::Not,
        GateId::And2,
        GateId::Or2,
        GateId::Nand2,
        GateId::Nor2,
        GateId::Xor2,
        GateId::Xnor2,
        GateId::Mux,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateId::Vdd | GateId::Vss => 0,
            GateId::Buf | GateId::Not => 1,
            GateId::Mux => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateId::Vdd => "VDD",
            GateId::Vss => "VSS",
            GateId::Buf => "BUF",
            GateId::Not => "NOT",
            GateId::And2 => "AND2",
            GateId::Or2 => "OR2",
            GateId::Nand2 => "NAND2",
            GateId::Nor2 => "NOR2",
            GateId::Xor2 => "XOR2",
            GateId::Xnor2 => "XNOR2",
            GateId::Mux => "MUX",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        GateId::ALL.into_iter().find(|g| g.name().eq_ignore_ascii_case(s))
    }

    /// The gate's boolean function; `args.len()` must equal the arity.
    pub fn eval_bool(self, args: &[bool]) -> bool {
        match self {
            GateId::Vdd => true,
            GateId::Vss => false,
            GateId::Buf => args[0],
            GateId::Not => !args[0],
            GateId::And2 => args[0] && args[1],
            GateId::Or2 => args[0] || args[1],
            GateId::Nand2 => !(args[0] && args[1]),
            GateId::Nor2 => !(args[0] || args[1]),
            GateId::Xor2 => args[0] ^ args[1],
            GateId::Xnor2 => !(args[0] ^ args[1]),
            GateId::Mux => {
                if args[0] {
                    args[1]
                } else {
                    args[2]
                }
            }
        }
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("gate {gate} takes {expected} inputs, got {got}")]
pub struct ArityError {
    pub gate: GateId,
    pub expected: usize,
    pub got: usize,
}

/// Evaluate a gate by enumerating the boolean completions of its unknown inputs.
pub fn gate_eval(g: GateId, args: &[Value4]) -> Result<Value4, ArityError> {
    if args.len() != g.arity() {
        return Err(ArityError {
            gate: g,
            expected: g.arity(),
            got: args.len(),
        });
    }
    let unknown: Vec<usize> = (0..args.len()).filter(|&i| !args[i].is_bool()).collect();
    let mut bools: Vec<bool> = args.iter().map(|v| *v == Value4::T).collect();
    let mut seen: Option<bool> = None;
    for mask in 0u32..(1 << unknown.len()) {
        for (k, &i) in unknown.iter().enumerate() {
            bools[i] = (mask >> k) & 1 == 1;
        }
        let r = g.eval_bool(&bools);
        match seen {
            None => seen = Some(r),
            Some(prev) if prev != r => return Ok(Value4::X),
            _ => {}
        }
    }
    Ok(Value4::from_bool(seen.expect("at least one completion")))
}

/// Gate semantics as seen by the evaluator. Implementations must accept exactly
/// `g.arity()` arguments.
pub trait GateTable: Send + Sync {
    fn eval(&self, g: GateId, args: &[Value4]) -> Value4;
}

// Base-3 code of a gate input: F=0, T=1, X/Z=2.
fn trit(v: Value4) -> usize {
    match v {
        Value4::F => 0,
        Value4::T => 1,
        Value4::X | Value4::Z => 2,
    }
}

fn trit_index(args: &[Value4]) -> usize {
    args.iter().rev().fold(0, |acc, v| acc * 3 + trit(*v))
}

fn untrit(code: usize, arity: usize) -> Vec<Value4> {
    let mut c = code;
    (0..arity)
        .map(|_| {
            let v = [Value4::F, Value4::T, Value4::X][c % 3];
            c /= 3;
            v
        })
        .collect()
}

static STD_TABLE: LazyLock<Vec<[Value4; 27]>> = LazyLock::new(|| {
    GateId::ALL
        .iter()
        .map(|&g| {
            let mut row = [Value4::X; 27];
            for (code, slot) in row.iter_mut().enumerate().take(3usize.pow(g.arity() as u32)) {
                *slot = gate_eval(g, &untrit(code, g.arity())).expect("arity matches");
            }
            row
        })
        .collect()
});

/// The standard monotone gate semantics, tabulated from [`gate_eval`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StdGates;

impl GateTable for StdGates {
    #[inline]
    fn eval(&self, g: GateId, args: &[Value4]) -> Value4 {
        debug_assert_eq!(args.len(), g.arity());
        STD_TABLE[g as usize][trit_index(args)]
    }
}

/// Standard semantics with a set of planted overrides, used to check that the
/// monotonicity harness notices a broken primitive.
#[derive(Debug, Clone, Default)]
pub struct PatchedGates {
    patches: Vec<(GateId, usize, Value4)>,
}

impl PatchedGates {
    pub fn new() -> Self {
        Self::default()
    }

    /// Override `g(args) = out`. `Z` arguments match as `X`.
    pub fn patch(mut self, g: GateId, args: &[Value4], out: Value4) -> Self {
        assert_eq!(args.len(), g.arity(), "patch arity");
        self.patches.push((g, trit_index(args), out));
        self
    }

    /// The classic planted fault: `and2(F, X) = T`.
    pub fn and2_fx_fault() -> Self {
        Self::new().patch(GateId::And2, &[Value4::F, Value4::X], Value4::T)
    }
}

impl GateTable for PatchedGates {
    fn eval(&self, g: GateId, args: &[Value4]) -> Value4 {
        let idx = trit_index(args);
        self.patches
            .iter()
            .find(|(pg, pi, _)| *pg == g && *pi == idx)
            .map(|(_, _, out)| *out)
            .unwrap_or_else(|| StdGates.eval(g, args))
    }
}
