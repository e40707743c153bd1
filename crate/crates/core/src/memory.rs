//! Tagged tree memories.
//!
//! A memory of depth `d` is a complete binary tree with `2^d` cells at its
//! tips. Each cell is a pair of a kind flag (ROM, RAM or STUB) and a
//! four-valued payload of the memory's width. Address bit 0 selects at the
//! root, `F` going left and `T` going right.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::fourval::{Value4, Vec4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemKind {
    Rom,
    Ram,
    Stub,
}

impl MemKind {
    pub const ALL: [MemKind; 3] = [MemKind::Rom, MemKind::Ram, MemKind::Stub];

    pub fn name(self) -> &'static str {
        match self {
            MemKind::Rom => "ROM",
            MemKind::Ram => "RAM",
            MemKind::Stub => "STUB",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        MemKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for MemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MemCell {
    pub kind: MemKind,
    pub payload: Vec4,
}

impl MemCell {
    pub fn new(kind: MemKind, payload: Vec4) -> Self {
        MemCell { kind, payload }
    }
}

/// Branches are shared between the old and new tree after a write.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MemTree {
    Cell(MemCell),
    Node(Arc<MemTree>, Arc<MemTree>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MemError {
    #[error("fill vector has width {got}, memory width is {expected}")]
    FillWidth { expected: usize, got: usize },
    #[error("address has width {got}, memory depth is {expected}")]
    AddrWidth { expected: usize, got: usize },
    #[error("data has width {got}, memory width is {expected}")]
    DataWidth { expected: usize, got: usize },
    #[error("memory tree is not uniform")]
    Malformed,
}

impl MemTree {
    pub fn depth(&self) -> usize {
        match self {
            MemTree::Cell(_) => 0,
            MemTree::Node(l, _) => 1 + l.depth(),
        }
    }

    pub fn width(&self) -> usize {
        self.first_cell().payload.width()
    }

    pub fn first_cell(&self) -> &MemCell {
        match self {
            MemTree::Cell(c) => c,
            MemTree::Node(l, _) => l.first_cell(),
        }
    }

    /// Kind of the leftmost cell; for trees built by [`mem_make`] this is the kind of every cell.
    pub fn kind(&self) -> MemKind {
        self.first_cell().kind
    }

    /// Cells in address order (address bit 0 least significant).
    pub fn cells(&self) -> Vec<&MemCell> {
        let d = self.depth();
        (0..1usize << d).map(|a| self.cell_at(a, d)).collect()
    }

    fn cell_at(&self, addr: usize, bits: usize) -> &MemCell {
        match self {
            MemTree::Cell(c) => c,
            MemTree::Node(l, r) => {
                let rest = addr >> 1;
                if addr & 1 == 1 {
                    r.cell_at(rest, bits - 1)
                } else {
                    l.cell_at(rest, bits - 1)
                }
            }
        }
    }

    /// Build a tree of depth `depth` from cells listed in address order.
    /// Panics unless `cells.len()` is a power of two.
    pub fn from_cells(cells: Vec<MemCell>) -> MemTree {
        assert!(cells.len().is_power_of_two(), "cell count must be a power of two");
        fn build(cells: &[MemCell], stride: usize, offset: usize, n: usize) -> MemTree {
            if n == 1 {
                MemTree::Cell(cells[offset].clone())
            } else {
                MemTree::Node(
                    Arc::new(build(cells, stride * 2, offset, n / 2)),
                    Arc::new(build(cells, stride * 2, offset + stride, n / 2)),
                )
            }
        }
        let n = cells.len();
        build(&cells, 1, 0, n)
    }

    /// Apply `f` to every cell, rebuilding the tree.
    pub fn map_cells(&self, f: &mut impl FnMut(&MemCell) -> MemCell) -> MemTree {
        match self {
            MemTree::Cell(c) => MemTree::Cell(f(c)),
            MemTree::Node(l, r) => {
                let l = l.map_cells(f);
                MemTree::Node(Arc::new(l), Arc::new(r.map_cells(f)))
            }
        }
    }
}

pub fn mem_make(kind: MemKind, depth: usize, width: usize, fill: &Vec4) -> Result<MemTree, MemError> {
    if fill.width() != width {
        return Err(MemError::FillWidth {
            expected: width,
            got: fill.width(),
        });
    }
    let mut t = MemTree::Cell(MemCell::new(kind, fill.clone()));
    for _ in 0..depth {
        let child = Arc::new(t);
        t = MemTree::Node(child.clone(), child);
    }
    Ok(t)
}

/// Pointwise agreement: positions where both sides hold the same boolean keep it.
fn agree(acc: &mut [Value4], v: &[Value4]) {
    for (a, b) in acc.iter_mut().zip(v) {
        if !(a.is_bool() && a == b) {
            *a = Value4::X;
        }
    }
}

fn cell_read(c: &MemCell) -> Vec<Value4> {
    match c.kind {
        MemKind::Stub => vec![Value4::X; c.payload.width()],
        MemKind::Rom | MemKind::Ram => c.payload.bits().to_vec(),
    }
}

pub fn mem_read(m: &MemTree, addr: &[Value4]) -> Result<Vec4, MemError> {
    let depth = m.depth();
    if addr.len() != depth {
        return Err(MemError::AddrWidth {
            expected: depth,
            got: addr.len(),
        });
    }
    if addr.iter().all(|a| a.is_bool()) {
        let mut t = m;
        for a in addr {
            t = match t {
                MemTree::Node(l, r) => {
                    if *a == Value4::T {
                        r
                    } else {
                        l
                    }
                }
                MemTree::Cell(_) => return Err(MemError::Malformed),
            };
        }
        return match t {
            MemTree::Cell(c) => Ok(Vec4::new(cell_read(c))),
            MemTree::Node(..) => Err(MemError::Malformed),
        };
    }
    fn walk(t: &MemTree, addr: &[Value4], acc: &mut Option<Vec<Value4>>) -> Result<(), MemError> {
        match (t, addr.split_first()) {
            (MemTree::Cell(c), None) => {
                let v = cell_read(c);
                match acc {
                    None => *acc = Some(v),
                    Some(a) => agree(a, &v),
                }
                Ok(())
            }
            (MemTree::Node(l, r), Some((a, rest))) => {
                if *a != Value4::T {
                    walk(l, rest, acc)?;
                }
                if *a != Value4::F {
                    walk(r, rest, acc)?;
                }
                Ok(())
            }
            _ => Err(MemError::Malformed),
        }
    }
    let mut acc = None;
    walk(m, addr, &mut acc)?;
    // At least two candidates were merged, so no Z survives.
    acc.map(Vec4::new).ok_or(MemError::Malformed)
}

/// Write `val` at `addr` when `we` is `T`. An unknown enable or address turns
/// every RAM cell that some completion could address into all-`X`. ROM and
/// STUB cells never change.
pub fn mem_write(m: &MemTree, addr: &[Value4], val: &[Value4], we: Value4) -> Result<MemTree, MemError> {
    let depth = m.depth();
    if addr.len() != depth {
        return Err(MemError::AddrWidth {
            expected: depth,
            got: addr.len(),
        });
    }
    let width = m.width();
    if val.len() != width {
        return Err(MemError::DataWidth {
            expected: width,
            got: val.len(),
        });
    }
    if we == Value4::F {
        return Ok(m.clone());
    }
    let exact = we == Value4::T && addr.iter().all(|a| a.is_bool());
    fn go(t: &Arc<MemTree>, addr: &[Value4], val: &[Value4], exact: bool) -> Result<Arc<MemTree>, MemError> {
        match (t.as_ref(), addr.split_first()) {
            (MemTree::Cell(c), None) => {
                if c.kind != MemKind::Ram {
                    return Ok(t.clone());
                }
                let payload = if exact {
                    Vec4::new(val.to_vec())
                } else {
                    Vec4::filled(Value4::X, val.len())
                };
                Ok(Arc::new(MemTree::Cell(MemCell::new(MemKind::Ram, payload))))
            }
            (MemTree::Node(l, r), Some((a, rest))) => {
                let nl = if *a != Value4::T { go(l, rest, val, exact)? } else { l.clone() };
                let nr = if *a != Value4::F { go(r, rest, val, exact)? } else { r.clone() };
                Ok(Arc::new(MemTree::Node(nl, nr)))
            }
            _ => Err(MemError::Malformed),
        }
    }
    let root = Arc::new(m.clone());
    let out = go(&root, addr, val, exact)?;
    Ok(Arc::try_unwrap(out).unwrap_or_else(|a| (*a).clone()))
}

/// Uniform depth, every payload of the given width.
pub fn mem_wf(m: &MemTree, depth: usize, width: usize) -> bool {
    match m {
        MemTree::Cell(c) => depth == 0 && c.payload.width() == width,
        MemTree::Node(l, r) => depth > 0 && mem_wf(l, depth - 1, width) && mem_wf(r, depth - 1, width),
    }
}

/// Cellwise approximation: same shape, same kinds, payloads pointwise below.
pub fn mem_approx(m1: &MemTree, m2: &MemTree) -> bool {
    match (m1, m2) {
        (MemTree::Cell(a), MemTree::Cell(b)) => a.kind == b.kind && a.payload.approx(&b.payload),
        (MemTree::Node(l1, r1), MemTree::Node(l2, r2)) => mem_approx(l1, l2) && mem_approx(r1, r2),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("memory image line {line}: {msg}")]
pub struct ImageError {
    pub line: usize,
    pub msg: String,
}

/// Parse a memory image: one `<decimal address> <vector>` record per line.
/// Blank lines and `;` comments are skipped; unlisted addresses hold `fill`.
pub fn parse_mem_image(text: &str, kind: MemKind, depth: usize, width: usize, fill: &Vec4) -> Result<MemTree, ImageError> {
    let err = |line, msg: String| ImageError { line, msg };
    if fill.width() != width {
        return Err(err(0, format!("fill width {} does not match memory width {width}", fill.width())));
    }
    let mut cells = vec![MemCell::new(kind, fill.clone()); 1 << depth];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(a), Some(v), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(err(i + 1, "expected `<address> <vector>`".into()));
        };
        let addr: usize = a.parse().map_err(|_| err(i + 1, format!("bad address {a:?}")))?;
        if addr >= cells.len() {
            return Err(err(i + 1, format!("address {addr} out of range for depth {depth}")));
        }
        let val = Vec4::from_str(v).map_err(|e| err(i + 1, e.to_string()))?;
        if val.width() != width {
            return Err(err(i + 1, format!("vector width {} does not match memory width {width}", val.width())));
        }
        cells[addr].payload = val;
    }
    Ok(MemTree::from_cells(cells))
}

/// Render every cell whose payload differs from `fill` as an image record.
pub fn print_mem_image(m: &MemTree, fill: &Vec4) -> String {
    let mut out = String::new();
    for (a, c) in m.cells().into_iter().enumerate() {
        if &c.payload != fill {
            out.push_str(&format!("{a} {}\n", c.payload));
        }
    }
    out
}
