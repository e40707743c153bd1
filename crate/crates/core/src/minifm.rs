//! A small two-phase 8-bit CPU, its instruction-level specification, and the
//! harness that checks the netlist against the specification.
//!
//! Architectural state: a 6-bit word-addressed `pc`, four 8-bit registers in a
//! RAM of depth 2, zero and carry flags, and a 64-word ROM program store.
//!
//! Instruction word, bit 7 first: `ooo dd aa 0` with opcode `o`, destination
//! `d` and source `a`. `BZ` uses bits 4..1 as a signed offset instead.
//!
//! | op | mnemonic | effect                                   |
//! |----|----------|------------------------------------------|
//! | 0  | ADD      | rd <- rd + ra; c <- carry; z             |
//! | 1  | AND      | rd <- rd & ra; z                         |
//! | 2  | OR       | rd <- rd \| ra; z                        |
//! | 3  | XOR      | rd <- rd ^ ra; z                         |
//! | 4  | NOT      | rd <- !ra; z                             |
//! | 5  | MOV      | rd <- ra; z                              |
//! | 6  | LDI      | rd <- a (the 2-bit field itself); z      |
//! | 7  | BZ       | if z then pc <- pc + 1 + offset          |
//!
//! The netlist takes two cycles per instruction. Phase 0 latches the fetched
//! word and the value of `ra`; phase 1 reads `rd`, computes the result, writes
//! it back and updates the flags and `pc`.

use std::fmt;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::approx::trial_rng;
use crate::eval::{EvalError, Evaluator, StateTree};
use crate::fourval::{nat_to_vec, vec_to_nat, GateId, Value4, Vec4};
use crate::genlib::{bus, gate, occ, Builder, GenError};
use crate::memory::{mem_read, mem_write, MemCell, MemKind, MemTree};
use crate::netlist::{ModuleDef, Netlist, PrimRef, Ref};

pub const PC_BITS: usize = 6;
pub const WORD_BITS: usize = 8;
pub const REG_ADDR_BITS: usize = 2;
pub const TOP: &str = "MINIFM";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchState {
    pub pc: Vec4,
    pub regs: MemTree,
    pub z: Value4,
    pub c: Value4,
    pub prog: MemTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error("architectural state is not fully boolean ({0})")]
    NonBoolean(&'static str),
    #[error("instruction word must be 8 boolean bits")]
    BadWord,
    #[error("field {field} = {value} out of range")]
    Field { field: &'static str, value: i32 },
    #[error("assembly line {line}: {msg}")]
    Asm { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    Add { rd: u8, ra: u8 },
    And { rd: u8, ra: u8 },
    Or { rd: u8, ra: u8 },
    Xor { rd: u8, ra: u8 },
    Not { rd: u8, ra: u8 },
    Mov { rd: u8, ra: u8 },
    Ldi { rd: u8, imm: u8 },
    Bz { offset: i8 },
}

impl Instr {
    pub fn opcode(self) -> u8 {
        match self {
            Instr::Add { .. } => 0,
            Instr::And { .. } => 1,
            Instr::Or { .. } => 2,
            Instr::Xor { .. } => 3,
            Instr::Not { .. } => 4,
            Instr::Mov { .. } => 5,
            Instr::Ldi { .. } => 6,
            Instr::Bz { .. } => 7,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        ["ADD", "AND", "OR", "XOR", "NOT", "MOV", "LDI", "BZ"][self.opcode() as usize]
    }

    /// The instruction byte; bit 0 is always clear.
    pub fn encode_byte(self) -> Result<u8, IsaError> {
        let field = |field, v: u8, max: u8| {
            if v <= max {
                Ok(v)
            } else {
                Err(IsaError::Field { field, value: v as i32 })
            }
        };
        let op = self.opcode() << 5;
        Ok(match self {
            Instr::Bz { offset } => {
                if !(-8..=7).contains(&offset) {
                    return Err(IsaError::Field {
                        field: "offset",
                        value: offset as i32,
                    });
                }
                op | (((offset as u8) & 0xF) << 1)
            }
            Instr::Ldi { rd, imm } => op | field("rd", rd, 3)? << 3 | field("imm", imm, 3)? << 1,
            Instr::Add { rd, ra }
            | Instr::And { rd, ra }
            | Instr::Or { rd, ra }
            | Instr::Xor { rd, ra }
            | Instr::Not { rd, ra }
            | Instr::Mov { rd, ra } => op | field("rd", rd, 3)? << 3 | field("ra", ra, 3)? << 1,
        })
    }

    /// Every byte decodes; bit 0 is ignored.
    pub fn decode_byte(w: u8) -> Instr {
        let rd = (w >> 3) & 3;
        let ra = (w >> 1) & 3;
        match w >> 5 {
            0 => Instr::Add { rd, ra },
            1 => Instr::And { rd, ra },
            2 => Instr::Or { rd, ra },
            3 => Instr::Xor { rd, ra },
            4 => Instr::Not { rd, ra },
            5 => Instr::Mov { rd, ra },
            6 => Instr::Ldi { rd, imm: ra },
            _ => {
                let raw = (w >> 1) & 0xF;
                Instr::Bz {
                    offset: ((raw << 4) as i8) >> 4,
                }
            }
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instr::Bz { offset } => write!(f, "BZ {offset}"),
            Instr::Ldi { rd, imm } => write!(f, "LDI r{rd},#{imm}"),
            Instr::Add { rd, ra }
            | Instr::And { rd, ra }
            | Instr::Or { rd, ra }
            | Instr::Xor { rd, ra }
            | Instr::Not { rd, ra }
            | Instr::Mov { rd, ra } => write!(f, "{} r{rd},r{ra}", self.mnemonic()),
        }
    }
}

pub fn encode(i: Instr) -> Result<Vec4, IsaError> {
    Ok(nat_to_vec(i.encode_byte()? as u128, WORD_BITS))
}

pub fn decode(w: &Vec4) -> Result<Instr, IsaError> {
    if w.width() != WORD_BITS {
        return Err(IsaError::BadWord);
    }
    let n = vec_to_nat(w).ok_or(IsaError::BadWord)?;
    Ok(Instr::decode_byte(n as u8))
}

fn parse_reg(s: &str) -> Option<u8> {
    let s = s.trim();
    let n = s.strip_prefix('r').or_else(|| s.strip_prefix('R'))?;
    n.parse().ok().filter(|r| *r < 4)
}

/// One instruction per line: `ADD r0,r1`, `LDI r2,#3`, `BZ -2`. `;` starts a comment.
pub fn assemble(text: &str) -> Result<Vec<Instr>, IsaError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| IsaError::Asm {
            line: i + 1,
            msg: format!("{msg}: {line:?}"),
        };
        let (mn, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let mn = mn.to_ascii_uppercase();
        let instr = if mn == "BZ" {
            let offset: i8 = rest.parse().map_err(|_| err("bad branch offset"))?;
            Instr::Bz { offset }
        } else {
            let (a, b) = rest.split_once(',').ok_or_else(|| err("expected two operands"))?;
            let rd = parse_reg(a).ok_or_else(|| err("bad destination register"))?;
            if mn == "LDI" {
                let imm: u8 = b.trim().strip_prefix('#').and_then(|s| s.parse().ok()).ok_or_else(|| err("bad immediate"))?;
                Instr::Ldi { rd, imm }
            } else {
                let ra = parse_reg(b).ok_or_else(|| err("bad source register"))?;
                match mn.as_str() {
                    "ADD" => Instr::Add { rd, ra },
                    "AND" => Instr::And { rd, ra },
                    "OR" => Instr::Or { rd, ra },
                    "XOR" => Instr::Xor { rd, ra },
                    "NOT" => Instr::Not { rd, ra },
                    "MOV" => Instr::Mov { rd, ra },
                    _ => return Err(err("unknown mnemonic")),
                }
            }
        };
        instr.encode_byte().map_err(|e| err(&e.to_string()))?;
        out.push(instr);
    }
    if out.len() > 1 << PC_BITS {
        return Err(IsaError::Asm {
            line: 0,
            msg: format!("program has {} instructions, the store holds {}", out.len(), 1 << PC_BITS),
        });
    }
    Ok(out)
}

/// Memory-image text for a program, one record per instruction.
pub fn program_image(prog: &[Instr]) -> Result<String, IsaError> {
    prog.iter()
        .enumerate()
        .map(|(a, i)| Ok(format!("{a} {}\n", encode(*i)?)))
        .collect()
}

/// Program store holding `prog` from address 0, remaining words zero.
pub fn program_rom(prog: &[Instr]) -> Result<MemTree, IsaError> {
    let mut cells = vec![MemCell::new(MemKind::Rom, Vec4::filled(Value4::F, WORD_BITS)); 1 << PC_BITS];
    for (a, i) in prog.iter().enumerate() {
        cells[a].payload = encode(*i)?;
    }
    Ok(MemTree::from_cells(cells))
}

fn bool_nat(v: &Vec4, what: &'static str) -> Result<u128, IsaError> {
    vec_to_nat(v).ok_or(IsaError::NonBoolean(what))
}

fn bool_bit(v: Value4, what: &'static str) -> Result<bool, IsaError> {
    v.as_bool().ok_or(IsaError::NonBoolean(what))
}

fn reg(regs: &MemTree, r: u8) -> Result<u8, IsaError> {
    let v = mem_read(regs, nat_to_vec(r as u128, REG_ADDR_BITS).bits()).map_err(|_| IsaError::NonBoolean("regs"))?;
    Ok(bool_nat(&v, "regs")? as u8)
}

impl ArchState {
    /// All registers zero, flags clear, `pc` zero.
    pub fn reset(prog: MemTree) -> Self {
        ArchState {
            pc: Vec4::filled(Value4::F, PC_BITS),
            regs: crate::memory::mem_make(MemKind::Ram, REG_ADDR_BITS, WORD_BITS, &Vec4::filled(Value4::F, WORD_BITS)).expect("widths agree"),
            z: Value4::F,
            c: Value4::F,
            prog,
        }
    }

    pub fn reg(&self, r: u8) -> Result<u8, IsaError> {
        reg(&self.regs, r)
    }

    pub fn pc_value(&self) -> Result<u8, IsaError> {
        Ok(bool_nat(&self.pc, "pc")? as u8)
    }

    fn check_boolean(&self) -> Result<(), IsaError> {
        if self.pc.width() != PC_BITS || !self.pc.is_bool() {
            return Err(IsaError::NonBoolean("pc"));
        }
        bool_bit(self.z, "z")?;
        bool_bit(self.c, "c")?;
        let regs_ok = crate::memory::mem_wf(&self.regs, REG_ADDR_BITS, WORD_BITS) && self.regs.cells().iter().all(|c| c.payload.is_bool());
        if !regs_ok {
            return Err(IsaError::NonBoolean("regs"));
        }
        let prog_ok = crate::memory::mem_wf(&self.prog, PC_BITS, WORD_BITS) && self.prog.cells().iter().all(|c| c.payload.is_bool());
        if !prog_ok {
            return Err(IsaError::NonBoolean("prog"));
        }
        Ok(())
    }

    /// Named fields that differ from `other`, with both renderings.
    pub fn diff(&self, other: &ArchState) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        if self.pc != other.pc {
            out.push(("pc".into(), self.pc.to_string(), other.pc.to_string()));
        }
        let (a, b) = (self.regs.cells(), other.regs.cells());
        if a.len() != b.len() {
            out.push(("regs".into(), format!("{} cells", a.len()), format!("{} cells", b.len())));
        } else {
            for (r, (x, y)) in a.iter().zip(&b).enumerate() {
                if x != y {
                    out.push((format!("r{r}"), x.payload.to_string(), y.payload.to_string()));
                }
            }
        }
        if self.z != other.z {
            out.push(("z".into(), self.z.to_string(), other.z.to_string()));
        }
        if self.c != other.c {
            out.push(("c".into(), self.c.to_string(), other.c.to_string()));
        }
        if self.prog != other.prog {
            out.push(("prog".into(), "...".into(), "...".into()));
        }
        out
    }
}

/// One instruction of the behavioral specification.
pub fn isa_step(a: &ArchState) -> Result<ArchState, IsaError> {
    a.check_boolean()?;
    let pc = a.pc_value()?;
    let word = mem_read(&a.prog, a.pc.bits()).map_err(|_| IsaError::NonBoolean("prog"))?;
    let instr = decode(&word)?;
    let mut next = a.clone();
    let pc_next = |n: i32| nat_to_vec((pc as i32 + n).rem_euclid(1 << PC_BITS) as u128, PC_BITS);
    next.pc = pc_next(1);
    let write = |rd: u8, v: u8, next: &mut ArchState| {
        next.regs = mem_write(&a.regs, nat_to_vec(rd as u128, REG_ADDR_BITS).bits(), nat_to_vec(v as u128, WORD_BITS).bits(), Value4::T)
            .expect("widths agree");
        next.z = Value4::from_bool(v == 0);
    };
    match instr {
        Instr::Add { rd, ra } => {
            let sum = a.reg(rd)? as u16 + a.reg(ra)? as u16;
            write(rd, sum as u8, &mut next);
            next.c = Value4::from_bool(sum > 0xFF);
        }
        Instr::And { rd, ra } => write(rd, a.reg(rd)? & a.reg(ra)?, &mut next),
        Instr::Or { rd, ra } => write(rd, a.reg(rd)? | a.reg(ra)?, &mut next),
        Instr::Xor { rd, ra } => write(rd, a.reg(rd)? ^ a.reg(ra)?, &mut next),
        Instr::Not { rd, ra } => write(rd, !a.reg(ra)?, &mut next),
        Instr::Mov { rd, ra } => write(rd, a.reg(ra)?, &mut next),
        Instr::Ldi { rd, imm } => write(rd, imm, &mut next),
        Instr::Bz { offset } => {
            if a.z == Value4::T {
                next.pc = pc_next(1 + offset as i32);
            }
        }
    }
    Ok(next)
}

// ---------------------------------------------------------------------------
// Netlist implementation

/// State child positions of the top module.
pub mod slots {
    pub const PHASE: usize = 0;
    pub const PC: usize = 1;
    pub const Z: usize = 7;
    pub const C: usize = 8;
    pub const IR: usize = 9;
    pub const OPA: usize = 17;
    pub const PROG: usize = 25;
    pub const REGS: usize = 26;
    pub const COUNT: usize = 27;
}

fn s(x: &str) -> String {
    x.to_string()
}

fn cat(parts: &[Vec<String>]) -> Vec<String> {
    parts.concat()
}

fn ff(name: &str, q: &str, d: &str) -> crate::netlist::Occurrence {
    occ(name, vec![s(q)], Ref::Prim(PrimRef::Ff), vec![s(d)])
}

/// Emit the CPU and the generator modules it uses; returns `MINIFM`.
pub fn build_cpu(b: &mut Builder) -> Result<String, GenError> {
    if b.contains(TOP) {
        return Ok(TOP.into());
    }
    let add8 = b.gen_adder(WORD_BITS)?;
    let add6 = b.gen_adder(PC_BITS)?;
    let mux8 = b.gen_mux(WORD_BITS)?;
    let mux6 = b.gen_mux(PC_BITS)?;
    let dec3 = b.gen_decoder(3)?;
    let and8 = b.gen_pointwise(GateId::And2, WORD_BITS)?;
    let or8 = b.gen_pointwise(GateId::Or2, WORD_BITS)?;
    let xor8 = b.gen_pointwise(GateId::Xor2, WORD_BITS)?;
    let not8 = b.gen_pointwise(GateId::Not, WORD_BITS)?;
    let sub = |name: &str, outs: Vec<String>, m: &str, ins: Vec<String>| occ(name, outs, Ref::Module(m.to_string()), ins);

    let lo = |n: usize| vec![s("LO"); n];
    let mut o = Vec::new();

    // State elements, in state order.
    o.push(ff("R_PHASE", "PHASE", "PHASE_N"));
    for i in 0..PC_BITS {
        o.push(ff(&format!("R_PC_{i}"), &format!("PC_{i}"), &format!("PC_N_{i}")));
    }
    o.push(ff("R_Z", "Z", "Z_N"));
    o.push(ff("R_C", "C", "C_N"));
    for i in 0..WORD_BITS {
        o.push(ff(&format!("R_IR_{i}"), &format!("IR_{i}"), &format!("IR_N_{i}")));
    }
    for i in 0..WORD_BITS {
        o.push(ff(&format!("R_OPA_{i}"), &format!("OPA_{i}"), &format!("OPA_N_{i}")));
    }
    o.push(gate("K_LO", "LO", GateId::Vss, &[]));
    o.push(gate("K_HI", "HI", GateId::Vdd, &[]));
    o.push(occ(
        "PROG",
        bus("W", WORD_BITS),
        Ref::Prim(PrimRef::Mem {
            kind: MemKind::Rom,
            depth: PC_BITS,
            width: WORD_BITS,
        }),
        cat(&[lo(1), bus("PC", PC_BITS), lo(WORD_BITS)]),
    ));
    // Register address: `ra` of the fetched word in phase 0, `rd` of IR in phase 1.
    for j in 0..REG_ADDR_BITS {
        o.push(gate(format!("AM_{j}"), format!("RA_{j}"), GateId::Mux, &["PHASE", &format!("IR_{}", 3 + j), &format!("W_{}", 1 + j)]));
    }
    o.push(gate("G_NRESET", "NRESET", GateId::Not, &["RESET"]));
    o.push(sub("DECODE", bus("OP", 8), &dec3, vec![s("IR_5"), s("IR_6"), s("IR_7")]));
    o.push(gate("G_NOTBZ", "NOTBZ", GateId::Not, &["OP_7"]));
    o.push(gate("G_WEA", "WE_A", GateId::And2, &["PHASE", "NRESET"]));
    o.push(gate("G_WE", "WE", GateId::And2, &["WE_A", "NOTBZ"]));
    o.push(occ(
        "REGS",
        bus("RD", WORD_BITS),
        Ref::Prim(PrimRef::Mem {
            kind: MemKind::Ram,
            depth: REG_ADDR_BITS,
            width: WORD_BITS,
        }),
        cat(&[vec![s("WE")], bus("RA", REG_ADDR_BITS), bus("RES", WORD_BITS)]),
    ));

    // ALU.
    let (rd, opa) = (bus("RD", WORD_BITS), bus("OPA", WORD_BITS));
    let mut sum_out = bus("SUM", WORD_BITS);
    sum_out.push(s("COUT"));
    o.push(sub("U_ADD", sum_out, &add8, cat(&[lo(1), rd.clone(), opa.clone()])));
    o.push(sub("U_AND", bus("ANDV", WORD_BITS), &and8, cat(&[rd.clone(), opa.clone()])));
    o.push(sub("U_OR", bus("ORV", WORD_BITS), &or8, cat(&[rd.clone(), opa.clone()])));
    o.push(sub("U_XOR", bus("XORV", WORD_BITS), &xor8, cat(&[rd, opa.clone()])));
    o.push(sub("U_NOT", bus("NOTV", WORD_BITS), &not8, opa.clone()));
    let imm = cat(&[vec![s("IR_1"), s("IR_2")], lo(WORD_BITS - 2)]);
    let ir5 = vec![s("IR_5")];
    let ir6 = vec![s("IR_6")];
    o.push(sub("M01", bus("M01", WORD_BITS), &mux8, cat(&[ir5.clone(), bus("ANDV", WORD_BITS), bus("SUM", WORD_BITS)])));
    o.push(sub("M23", bus("M23", WORD_BITS), &mux8, cat(&[ir5.clone(), bus("XORV", WORD_BITS), bus("ORV", WORD_BITS)])));
    o.push(sub("M45", bus("M45", WORD_BITS), &mux8, cat(&[ir5, opa.clone(), bus("NOTV", WORD_BITS)])));
    o.push(sub("M4567", bus("M4567", WORD_BITS), &mux8, cat(&[ir6.clone(), imm, bus("M45", WORD_BITS)])));
    o.push(sub("M0123", bus("M0123", WORD_BITS), &mux8, cat(&[ir6, bus("M23", WORD_BITS), bus("M01", WORD_BITS)])));
    o.push(sub("M_RES", bus("RES", WORD_BITS), &mux8, cat(&[vec![s("IR_7")], bus("M4567", WORD_BITS), bus("M0123", WORD_BITS)])));

    // Zero detect.
    o.push(gate("ZO_1", "ZO_1", GateId::Or2, &["RES_0", "RES_1"]));
    for k in 2..WORD_BITS {
        o.push(gate(format!("ZO_{k}"), format!("ZO_{k}"), GateId::Or2, &[&format!("ZO_{}", k - 1), &format!("RES_{k}")]));
    }
    o.push(gate("G_ZR", "ZR", GateId::Not, &[&format!("ZO_{}", WORD_BITS - 1)]));

    // Flags.
    o.push(gate("G_ZS", "ZS", GateId::Mux, &["OP_7", "Z", "ZR"]));
    o.push(gate("G_ZP", "ZP", GateId::Mux, &["PHASE", "ZS", "Z"]));
    o.push(gate("G_ZN", "Z_N", GateId::And2, &["NRESET", "ZP"]));
    o.push(gate("G_CS", "CS", GateId::Mux, &["OP_0", "COUT", "C"]));
    o.push(gate("G_CP", "CP", GateId::Mux, &["PHASE", "CS", "C"]));
    o.push(gate("G_CN", "C_N", GateId::And2, &["NRESET", "CP"]));

    // Program counter.
    let pc = bus("PC", PC_BITS);
    let mut inc_out = bus("PC1", PC_BITS);
    inc_out.push(s("INC_CO"));
    o.push(sub("U_INC", inc_out, &add6, cat(&[vec![s("HI")], pc.clone(), lo(PC_BITS)])));
    let mut br_out = bus("PCB", PC_BITS);
    br_out.push(s("BR_CO"));
    let offset: Vec<String> = ["IR_1", "IR_2", "IR_3", "IR_4", "IR_4", "IR_4"].iter().map(|x| s(x)).collect();
    o.push(sub("U_BR", br_out, &add6, cat(&[lo(1), bus("PC1", PC_BITS), offset])));
    o.push(gate("G_TAKEN", "TAKEN", GateId::And2, &["OP_7", "Z"]));
    o.push(sub("M_PCS", bus("PCS", PC_BITS), &mux6, cat(&[vec![s("TAKEN")], bus("PCB", PC_BITS), bus("PC1", PC_BITS)])));
    o.push(sub("M_PCP", bus("PCP", PC_BITS), &mux6, cat(&[vec![s("PHASE")], bus("PCS", PC_BITS), pc])));
    for i in 0..PC_BITS {
        o.push(gate(format!("G_PCN_{i}"), format!("PC_N_{i}"), GateId::And2, &["NRESET", &format!("PCP_{i}")]));
    }

    // Phase, instruction register, operand latch.
    o.push(gate("G_NPH", "NPH", GateId::Not, &["PHASE"]));
    o.push(gate("G_PHN", "PHASE_N", GateId::And2, &["NRESET", "NPH"]));
    o.push(sub("M_IR", bus("IR_N", WORD_BITS), &mux8, cat(&[vec![s("PHASE")], bus("IR", WORD_BITS), bus("W", WORD_BITS)])));
    o.push(sub("M_OPA", bus("OPA_N", WORD_BITS), &mux8, cat(&[vec![s("PHASE")], opa, bus("RD", WORD_BITS)])));

    Ok(b.add(ModuleDef {
        name: TOP.into(),
        inputs: vec![s("RESET")],
        outputs: bus("PC", PC_BITS),
        occurrences: o,
    }))
}

pub fn cpu_netlist() -> Netlist {
    let mut b = Builder::new();
    build_cpu(&mut b).expect("fixed parameters are within limits");
    b.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectError {
    #[error("state does not have the CPU state shape")]
    Shape,
    #[error("mid-instruction state (phase = {0})")]
    MidInstruction(Value4),
}

fn bits(children: &[StateTree], from: usize, n: usize) -> Result<Vec4, ProjectError> {
    children[from..from + n]
        .iter()
        .map(|c| match c {
            StateTree::Bit(v) => Ok(*v),
            _ => Err(ProjectError::Shape),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Vec4::new)
}

/// Architectural view of a CPU state at an instruction boundary.
pub fn project(st: &StateTree) -> Result<ArchState, ProjectError> {
    let StateTree::Node(ch) = st else {
        return Err(ProjectError::Shape);
    };
    if ch.len() != slots::COUNT {
        return Err(ProjectError::Shape);
    }
    let phase = bits(ch, slots::PHASE, 1)?.get(0);
    if phase != Value4::F {
        return Err(ProjectError::MidInstruction(phase));
    }
    let (StateTree::Cell(prog), StateTree::Cell(regs)) = (&ch[slots::PROG], &ch[slots::REGS]) else {
        return Err(ProjectError::Shape);
    };
    Ok(ArchState {
        pc: bits(ch, slots::PC, PC_BITS)?,
        regs: regs.clone(),
        z: bits(ch, slots::Z, 1)?.get(0),
        c: bits(ch, slots::C, 1)?.get(0),
        prog: prog.clone(),
    })
}

/// A phase-0 CPU state whose projection is `a`; the instruction register and
/// operand latch are zero.
pub fn inject(a: &ArchState) -> StateTree {
    let mut ch = Vec::with_capacity(slots::COUNT);
    ch.push(StateTree::Bit(Value4::F));
    ch.extend(a.pc.bits().iter().map(|v| StateTree::Bit(*v)));
    ch.push(StateTree::Bit(a.z));
    ch.push(StateTree::Bit(a.c));
    ch.extend((0..2 * WORD_BITS).map(|_| StateTree::Bit(Value4::F)));
    ch.push(StateTree::Cell(a.prog.clone()));
    ch.push(StateTree::Cell(a.regs.clone()));
    StateTree::Node(ch)
}

/// The CPU netlist compiled for evaluation.
#[derive(Debug)]
pub struct Cpu {
    ev: Evaluator,
    at: usize,
}

impl Cpu {
    pub fn new() -> Self {
        let ev = Evaluator::new(&cpu_netlist()).expect("generated CPU is well-formed");
        let at = ev.position(TOP).expect("top module present");
        Cpu { ev, at }
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.ev
    }

    pub fn top(&self) -> usize {
        self.at
    }

    pub fn cycle(&self, reset: Value4, s: &StateTree) -> Result<StateTree, EvalError> {
        self.ev.de(self.at, &[reset], s)
    }

    /// Two cycles with reset low.
    pub fn instruction(&self, s: &StateTree) -> Result<StateTree, EvalError> {
        let mid = self.cycle(Value4::F, s)?;
        self.cycle(Value4::F, &mid)
    }
}

impl Default for Cpu {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub program: u64,
    pub step: usize,
    pub field: String,
    pub expected: String,
    pub actual: String,
    /// Initial architectural state of the failing trial in state-text form.
    pub initial: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivReport {
    pub programs: u64,
    pub steps: usize,
    pub seed: u64,
    pub mismatches: Vec<Mismatch>,
    pub elapsed_ms: u128,
}

impl EquivReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn random_arch_state(rng: &mut impl Rng) -> ArchState {
    let word = |rng: &mut _| nat_to_vec(Rng::gen::<u8>(rng) as u128, WORD_BITS);
    let prog = MemTree::from_cells((0..1 << PC_BITS).map(|_| MemCell::new(MemKind::Rom, word(rng))).collect());
    let regs = MemTree::from_cells((0..1 << REG_ADDR_BITS).map(|_| MemCell::new(MemKind::Ram, word(rng))).collect());
    ArchState {
        pc: nat_to_vec(rng.gen_range(0..1u128 << PC_BITS), PC_BITS),
        regs,
        z: Value4::from_bool(rng.gen()),
        c: Value4::from_bool(rng.gen()),
        prog,
    }
}

/// Check `project(de(de(s))) == isa_step(project(s))` along random programs.
pub fn equiv_check(cpu: &Cpu, programs: u64, steps: usize, seed: u64) -> EquivReport {
    let start = Instant::now();
    let per: Vec<Vec<Mismatch>> = (0..programs)
        .into_par_iter()
        .map(|p| {
            let mut rng = trial_rng(seed, p);
            let a0 = random_arch_state(&mut rng);
            let initial = inject(&a0).to_string();
            let mismatch = |step, field: &str, expected: String, actual: String| Mismatch {
                program: p,
                step,
                field: field.to_string(),
                expected,
                actual,
                initial: initial.clone(),
            };
            let mut arch = a0.clone();
            let mut st = inject(&a0);
            for step in 0..steps {
                let expected = match isa_step(&arch) {
                    Ok(e) => e,
                    Err(e) => return vec![mismatch(step, "isa", String::new(), e.to_string())],
                };
                st = match cpu.instruction(&st) {
                    Ok(s) => s,
                    Err(e) => return vec![mismatch(step, "eval", String::new(), e.to_string())],
                };
                let actual = match project(&st) {
                    Ok(a) => a,
                    Err(e) => return vec![mismatch(step, "phase", "F".into(), e.to_string())],
                };
                let diffs = expected.diff(&actual);
                if !diffs.is_empty() {
                    return diffs.into_iter().map(|(f, e, a)| mismatch(step, &f, e, a)).collect();
                }
                arch = expected;
            }
            Vec::new()
        })
        .collect();
    EquivReport {
        programs,
        steps,
        seed,
        mismatches: per.into_iter().flatten().collect(),
        elapsed_ms: start.elapsed().as_millis(),
    }
}
