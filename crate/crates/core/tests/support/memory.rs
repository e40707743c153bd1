//! Memory reads and writes against an independent cell-list oracle.

use dekit_core::fourval::{Value4, Vec4};
use dekit_core::memory::{mem_approx, mem_read, mem_write, MemCell, MemKind, MemTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use Value4::*;

const KINDS: [MemKind; 3] = [MemKind::Ram, MemKind::Rom, MemKind::Stub];

fn tuples(n: usize) -> Vec<Vec<Value4>> {
    (0..4usize.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let v = Value4::ALL[k % 4];
                    k /= 4;
                    v
                })
                .collect()
        })
        .collect()
}

fn memory(kind: MemKind, payloads: &[Vec<Value4>]) -> MemTree {
    MemTree::from_cells(payloads.iter().map(|p| MemCell::new(kind, Vec4::new(p.clone()))).collect())
}

/// Every memory of the given shape and kind, payloads over all of Value4.
fn all_memories(kind: MemKind, depth: usize, width: usize) -> impl Iterator<Item = MemTree> {
    let words = tuples(width);
    let cells = 1usize << depth;
    let count = words.len().pow(cells as u32);
    (0..count).map(move |mut k| {
        let ps: Vec<Vec<Value4>> = (0..cells)
            .map(|_| {
                let w = words[k % words.len()].clone();
                k /= words.len();
                w
            })
            .collect();
        memory(kind, &ps)
    })
}

/// Memories in which each cell position takes every payload value.
fn covering_memories(kind: MemKind, depth: usize, width: usize) -> Vec<MemTree> {
    let words = tuples(width);
    let cells = 1usize << depth;
    (0..words.len())
        .map(|j| {
            let ps: Vec<Vec<Value4>> = (0..cells).map(|i| words[(j + i * 5) % words.len()].clone()).collect();
            memory(kind, &ps)
        })
        .collect()
}

fn completions(addr: &[Value4]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (k, a) in addr.iter().enumerate() {
        out = match a {
            F => out,
            T => out.into_iter().map(|i| i | 1 << k).collect(),
            X | Z => out.iter().flat_map(|&i| [i, i | 1 << k]).collect(),
        };
    }
    out
}

fn cell_value(c: &MemCell) -> Vec<Value4> {
    match c.kind {
        MemKind::Stub => vec![X; c.payload.width()],
        _ => c.payload.bits().to_vec(),
    }
}

fn read_oracle(m: &MemTree, addr: &[Value4]) -> Vec4 {
    let cells = m.cells();
    let idx = completions(addr);
    if idx.len() == 1 {
        return Vec4::new(cell_value(cells[idx[0]]));
    }
    let vals: Vec<Vec<Value4>> = idx.iter().map(|&i| cell_value(cells[i])).collect();
    Vec4::new(
        (0..m.width())
            .map(|b| {
                let v = vals[0][b];
                if v.is_bool() && vals.iter().all(|w| w[b] == v) {
                    v
                } else {
                    X
                }
            })
            .collect(),
    )
}

fn write_oracle(m: &MemTree, addr: &[Value4], val: &[Value4], we: Value4) -> Vec<MemCell> {
    let idx = completions(addr);
    let exact = we == T && idx.len() == 1;
    m.cells()
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if c.kind != MemKind::Ram || we == F || !idx.contains(&i) {
                c.clone()
            } else if exact {
                MemCell::new(MemKind::Ram, Vec4::new(val.to_vec()))
            } else {
                MemCell::new(MemKind::Ram, Vec4::filled(X, val.len()))
            }
        })
        .collect()
}

fn check_read(m: &MemTree, addr: &[Value4]) {
    assert_eq!(mem_read(m, addr).unwrap(), read_oracle(m, addr), "read {m:?} at {addr:?}");
}

fn check_write(m: &MemTree, addr: &[Value4], val: &[Value4], we: Value4) {
    let got = mem_write(m, addr, val, we).unwrap();
    let got_cells: Vec<MemCell> = got.cells().into_iter().cloned().collect();
    assert_eq!(got_cells, write_oracle(m, addr, val, we), "write {val:?} at {addr:?} we {we:?}");
}

/// All single-bit weakenings of a value list.
fn weakenings(v: &[Value4]) -> Vec<Vec<Value4>> {
    (0..v.len())
        .filter(|&i| v[i] != X)
        .map(|i| {
            let mut w = v.to_vec();
            w[i] = X;
            w
        })
        .collect()
}

fn memory_weakenings(m: &MemTree) -> Vec<MemTree> {
    let cells: Vec<MemCell> = m.cells().into_iter().cloned().collect();
    let mut out = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        for w in weakenings(c.payload.bits()) {
            let mut cs = cells.clone();
            cs[i] = MemCell::new(c.kind, Vec4::new(w));
            out.push(MemTree::from_cells(cs));
        }
    }
    out
}

fn approx(a: &Vec4, b: &Vec4) -> bool {
    a.approx(b)
}

/// Monotonicity of read and write through covering pairs at one point;
/// `mem_weak` are weakenings of `m`. Transitivity of the order extends these
/// to all related pairs.
fn check_monotone_at(m: &MemTree, mem_weak: &[MemTree], addr: &[Value4], val: &[Value4], we: Value4, with_write: bool) {
    let r = mem_read(m, addr).unwrap();
    for wm in mem_weak {
        assert!(approx(&mem_read(wm, addr).unwrap(), &r));
    }
    for wa in weakenings(addr) {
        assert!(approx(&mem_read(m, &wa).unwrap(), &r), "read not monotone in address {addr:?} -> {wa:?}");
    }
    if !with_write {
        return;
    }
    let w = mem_write(m, addr, val, we).unwrap();
    for wm in mem_weak {
        assert!(mem_approx(&mem_write(wm, addr, val, we).unwrap(), &w));
    }
    for wa in weakenings(addr) {
        assert!(mem_approx(&mem_write(m, &wa, val, we).unwrap(), &w), "write not monotone in address");
    }
    for wv in weakenings(val) {
        assert!(mem_approx(&mem_write(m, addr, &wv, we).unwrap(), &w));
    }
    if we != X {
        assert!(mem_approx(&mem_write(m, addr, val, X).unwrap(), &w), "write not monotone in enable {we:?}");
    }
}

fn sizes() -> Vec<(usize, usize)> {
    (0..=2).flat_map(|d| (1..=2).map(move |w| (d, w))).collect()
}

pub fn read_matches_oracle_exhaustively() {
    for (d, w) in sizes() {
        let addrs = tuples(d);
        for kind in KINDS {
            for m in all_memories(kind, d, w) {
                for a in &addrs {
                    check_read(&m, a);
                }
            }
        }
    }
}

pub fn read_after_write_exhaustive() {
    for (d, w) in sizes() {
        let vals = tuples(w);
        let bool_addrs: Vec<Vec<Value4>> = tuples(d).into_iter().filter(|a| a.iter().all(|v| v.is_bool())).collect();
        for kind in KINDS {
            for m in all_memories(kind, d, w) {
                for a in &bool_addrs {
                    for v in &vals {
                        let m2 = mem_write(&m, a, v, T).unwrap();
                        let back = mem_read(&m2, a).unwrap();
                        let expect = match kind {
                            MemKind::Ram => Vec4::new(v.clone()),
                            MemKind::Rom => mem_read(&m, a).unwrap(),
                            MemKind::Stub => Vec4::filled(X, w),
                        };
                        assert_eq!(back, expect);
                        if kind != MemKind::Ram {
                            assert_eq!(m2, m, "{kind} changed by a write");
                        }
                        let untouched = mem_write(&m, a, v, F).unwrap();
                        assert_eq!(untouched, m);
                    }
                }
            }
        }
    }
}

pub fn write_matches_oracle_exhaustive_small() {
    for (d, w) in sizes() {
        let (addrs, vals) = (tuples(d), tuples(w));
        for kind in KINDS {
            let mems: Vec<MemTree> = if (d, w) == (2, 2) {
                covering_memories(kind, d, w)
            } else {
                all_memories(kind, d, w).collect()
            };
            for m in &mems {
                for a in &addrs {
                    for v in &vals {
                        for we in Value4::ALL {
                            check_write(m, a, v, we);
                        }
                    }
                }
            }
        }
    }
}

pub fn read_monotone_exhaustive() {
    for (d, w) in sizes() {
        let addrs = tuples(d);
        for kind in KINDS {
            for m in all_memories(kind, d, w) {
                let ws = memory_weakenings(&m);
                for a in &addrs {
                    check_monotone_at(&m, &ws, a, &[], X, false);
                }
            }
        }
    }
}

pub fn write_monotone_exhaustive_small() {
    for (d, w) in sizes() {
        let (addrs, vals) = (tuples(d), tuples(w));
        for kind in KINDS {
            let mems: Vec<MemTree> = if (d, w) == (2, 2) {
                covering_memories(kind, d, w)
            } else {
                all_memories(kind, d, w).collect()
            };
            for m in &mems {
                let ws = memory_weakenings(m);
                for a in &addrs {
                    for v in &vals {
                        for we in Value4::ALL {
                            check_monotone_at(m, &ws, a, v, we, true);
                        }
                    }
                }
            }
        }
    }
}

fn rand_value(rng: &mut impl Rng) -> Value4 {
    Value4::ALL[rng.gen_range(0..4)]
}

fn rand_vals(rng: &mut impl Rng, n: usize, p_unknown: f64) -> Vec<Value4> {
    (0..n)
        .map(|_| {
            if rng.gen_bool(p_unknown) {
                if rng.gen_bool(0.5) {
                    X
                } else {
                    Z
                }
            } else {
                Value4::from_bool(rng.gen())
            }
        })
        .collect()
}

pub fn fuzz_deep_memories(cases: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let d = rng.gen_range(0..=6);
        let w = rng.gen_range(1..=8);
        let kind = KINDS[rng.gen_range(0..3)];
        let cells: Vec<Vec<Value4>> = (0..1 << d).map(|_| (0..w).map(|_| rand_value(&mut rng)).collect()).collect();
        let m = memory(kind, &cells);
        let addr = rand_vals(&mut rng, d, 0.2);
        let val: Vec<Value4> = (0..w).map(|_| rand_value(&mut rng)).collect();
        let we = if rng.gen_bool(0.8) { Value4::from_bool(rng.gen()) } else { rand_value(&mut rng) };
        check_read(&m, &addr);
        check_write(&m, &addr, &val, we);
        let cells: Vec<MemCell> = m.cells().into_iter().cloned().collect();
        let ws: Vec<MemTree> = (0..12)
            .map(|_| {
                let mut cs = cells.clone();
                for _ in 0..rng.gen_range(1..=3) {
                    let c = &mut cs[rng.gen_range(0..cells.len())];
                    let mut bits = c.payload.bits().to_vec();
                    bits[rng.gen_range(0..w)] = X;
                    c.payload = Vec4::new(bits);
                }
                MemTree::from_cells(cs)
            })
            .collect();
        check_monotone_at(&m, &ws, &addr, &val, we, true);
        let bool_addr: Vec<Value4> = (0..d).map(|_| Value4::from_bool(rng.gen())).collect();
        let back = mem_read(&mem_write(&m, &bool_addr, &val, T).unwrap(), &bool_addr).unwrap();
        match kind {
            MemKind::Ram => assert_eq!(back.bits(), &val[..]),
            MemKind::Rom => assert_eq!(back, mem_read(&m, &bool_addr).unwrap()),
            MemKind::Stub => assert_eq!(back, Vec4::filled(X, w)),
        }
    }
}

pub fn all_exhaustive() {
    read_matches_oracle_exhaustively();
    read_after_write_exhaustive();
    write_matches_oracle_exhaustive_small();
    read_monotone_exhaustive();
    write_monotone_exhaustive_small();
}
