//! Parameterized circuit generators.
//!
//! Each generator emits one flat module per parameter set (`ADDER_8`,
//! `MUX_6`, ...) into a [`Builder`] and returns its name; asking twice for the
//! same parameters returns the existing module. Modules are appended callees
//! first and [`Builder::finish`] reverses the sequence, so the last module
//! built becomes the top and every reference points forward.

use thiserror::Error;

use crate::fourval::GateId;
use crate::memory::MemKind;
use crate::netlist::{ModuleDef, Netlist, Occurrence, PrimRef, Ref};

pub const MAX_WIDTH: usize = 64;
pub const MAX_DECODER_BITS: usize = 6;
pub const MAX_REGFILE_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("{generator}: parameter {value} outside {min}..={max}")]
    Limit {
        generator: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("gate {0} is not supported by the pointwise generator")]
    Gate(GateId),
}

fn limit(generator: &'static str, value: usize, min: usize, max: usize) -> Result<(), GenError> {
    if (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(GenError::Limit { generator, value, min, max })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Builder {
    modules: Vec<ModuleDef>,
    counter: usize,
}

/// `PREFIX_0 .. PREFIX_{n-1}`.
pub fn bus(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}_{i}")).collect()
}

pub(crate) fn occ(name: impl Into<String>, outputs: Vec<String>, reference: Ref, inputs: Vec<String>) -> Occurrence {
    Occurrence::new(name, outputs, reference, inputs)
}

pub(crate) fn gate(name: impl Into<String>, out: impl Into<String>, g: GateId, inputs: &[&str]) -> Occurrence {
    occ(name, vec![out.into()], Ref::Prim(PrimRef::Gate(g)), inputs.iter().map(|s| s.to_string()).collect())
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.modules.iter().any(|m| m.name == name)
    }

    /// Append a module whose callees are already present.
    pub fn add(&mut self, m: ModuleDef) -> String {
        let name = m.name.clone();
        self.modules.push(m);
        name
    }

    /// A module name not yet used in this builder.
    pub fn fresh(&mut self, prefix: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{prefix}-{}", self.counter);
            if !self.contains(&name) {
                return name;
            }
        }
    }

    pub fn modules(&self) -> &[ModuleDef] {
        &self.modules
    }

    /// The netlist with the most recently built module on top.
    pub fn finish(self) -> Netlist {
        let mut modules = self.modules;
        modules.reverse();
        Netlist::new(modules)
    }

    fn cached(&self, name: &str) -> Option<String> {
        self.contains(name).then(|| name.to_string())
    }

    pub fn gen_pointwise(&mut self, g: GateId, n: usize) -> Result<String, GenError> {
        limit("pointwise", n, 1, MAX_WIDTH)?;
        if !(1..=2).contains(&g.arity()) {
            return Err(GenError::Gate(g));
        }
        let name = format!("{}_{n}", g.name());
        if let Some(hit) = self.cached(&name) {
            return Ok(hit);
        }
        let binary = g.arity() == 2;
        let mut inputs = bus("A", n);
        if binary {
            inputs.extend(bus("B", n));
        }
        let occurrences = (0..n)
            .map(|i| {
                let (a, b) = (format!("A_{i}"), format!("B_{i}"));
                let ins: Vec<&str> = if binary { vec![&a, &b] } else { vec![&a] };
                gate(format!("G_{i}"), format!("O_{i}"), g, &ins)
            })
            .collect();
        Ok(self.add(ModuleDef {
            name,
            inputs,
            outputs: bus("O", n),
            occurrences,
        }))
    }

    /// Ripple-carry adder: inputs `CIN, A_*, B_*`, outputs `S_*, COUT`.
    pub fn gen_adder(&mut self, n: usize) -> Result<String, GenError> {
        limit("adder", n, 1, MAX_WIDTH)?;
        let name = format!("ADDER_{n}");
        if let Some(hit) = self.cached(&name) {
            return Ok(hit);
        }
        let mut inputs = vec!["CIN".to_string()];
        inputs.extend(bus("A", n));
        inputs.extend(bus("B", n));
        let mut outputs = bus("S", n);
        outputs.push("COUT".into());
        let mut occurrences = Vec::with_capacity(5 * n);
        for i in 0..n {
            let (a, b) = (format!("A_{i}"), format!("B_{i}"));
            let cin = if i == 0 { "CIN".to_string() } else { format!("C_{i}") };
            let cout = if i + 1 == n { "COUT".to_string() } else { format!("C_{}", i + 1) };
            let (p, g, t) = (format!("P_{i}"), format!("G_{i}"), format!("T_{i}"));
            occurrences.push(gate(format!("XP_{i}"), &p, GateId::Xor2, &[&a, &b]));
            occurrences.push(gate(format!("XS_{i}"), format!("S_{i}"), GateId::Xor2, &[&p, &cin]));
            occurrences.push(gate(format!("AG_{i}"), &g, GateId::And2, &[&a, &b]));
            occurrences.push(gate(format!("AT_{i}"), &t, GateId::And2, &[&p, &cin]));
            occurrences.push(gate(format!("OC_{i}"), cout, GateId::Or2, &[&g, &t]));
        }
        Ok(self.add(ModuleDef {
            name,
            inputs,
            outputs,
            occurrences,
        }))
    }

    /// `O_i = mux(S, A_i, B_i)`: `S = T` selects `A`.
    pub fn gen_mux(&mut self, n: usize) -> Result<String, GenError> {
        limit("mux", n, 1, MAX_WIDTH)?;
        let name = format!("MUX_{n}");
        if let Some(hit) = self.cached(&name) {
            return Ok(hit);
        }
        let mut inputs = vec!["S".to_string()];
        inputs.extend(bus("A", n));
        inputs.extend(bus("B", n));
        let occurrences = (0..n)
            .map(|i| gate(format!("M_{i}"), format!("O_{i}"), GateId::Mux, &["S", &format!("A_{i}"), &format!("B_{i}")]))
            .collect();
        Ok(self.add(ModuleDef {
            name,
            inputs,
            outputs: bus("O", n),
            occurrences,
        }))
    }

    /// One-hot decoder: output `O_k` is `T` iff the inputs spell `k`, LSB first.
    pub fn gen_decoder(&mut self, n: usize) -> Result<String, GenError> {
        limit("decoder", n, 1, MAX_DECODER_BITS)?;
        let name = format!("DEC_{n}");
        if let Some(hit) = self.cached(&name) {
            return Ok(hit);
        }
        let mut occurrences = Vec::new();
        for i in 0..n {
            occurrences.push(gate(format!("N_{i}"), format!("NA_{i}"), GateId::Not, &[&format!("A_{i}")]));
        }
        let lit = |k: usize, i: usize| {
            if (k >> i) & 1 == 1 {
                format!("A_{i}")
            } else {
                format!("NA_{i}")
            }
        };
        for k in 0..1usize << n {
            if n == 1 {
                occurrences.push(gate(format!("D_{k}"), format!("O_{k}"), GateId::Buf, &[&lit(k, 0)]));
                continue;
            }
            let mut acc = lit(k, 0);
            for i in 1..n {
                let out = if i + 1 == n { format!("O_{k}") } else { format!("T_{k}_{i}") };
                occurrences.push(gate(format!("D_{k}_{i}"), &out, GateId::And2, &[&acc, &lit(k, i)]));
                acc = out;
            }
        }
        Ok(self.add(ModuleDef {
            name,
            inputs: bus("A", n),
            outputs: bus("O", 1 << n),
            occurrences,
        }))
    }

    /// Loadable register: `Q_i` holds its value unless `LOAD` is `T`.
    pub fn gen_register(&mut self, n: usize) -> Result<String, GenError> {
        limit("register", n, 1, MAX_WIDTH)?;
        let name = format!("REG_{n}");
        if let Some(hit) = self.cached(&name) {
            return Ok(hit);
        }
        let mut inputs = vec!["LOAD".to_string()];
        inputs.extend(bus("D", n));
        let mut occurrences = Vec::with_capacity(2 * n);
        for i in 0..n {
            let (q, nx) = (format!("Q_{i}"), format!("N_{i}"));
            occurrences.push(occ(format!("R_{i}"), vec![q.clone()], Ref::Prim(PrimRef::Ff), vec![nx.clone()]));
            occurrences.push(gate(format!("M_{i}"), nx, GateId::Mux, &["LOAD", &format!("D_{i}"), &q]));
        }
        Ok(self.add(ModuleDef {
            name,
            inputs,
            outputs: bus("Q", n),
            occurrences,
        }))
    }

    fn gen_memfile(&mut self, kind: MemKind, prefix: &str, depth: usize, width: usize) -> Result<String, GenError> {
        limit("regfile depth", depth, 0, MAX_REGFILE_DEPTH)?;
        limit("regfile width", width, 1, MAX_WIDTH)?;
        let name = format!("{prefix}_{depth}_{width}");
        if let Some(hit) = self.cached(&name) {
            return Ok(hit);
        }
        let mut inputs = vec!["WE".to_string()];
        inputs.extend(bus("ADDR", depth));
        inputs.extend(bus("DIN", width));
        let occurrences = vec![occ("MEM", bus("DOUT", width), Ref::Prim(PrimRef::Mem { kind, depth, width }), inputs.clone())];
        Ok(self.add(ModuleDef {
            name,
            inputs,
            outputs: bus("DOUT", width),
            occurrences,
        }))
    }

    /// RAM wrapper: inputs `WE, ADDR_*, DIN_*`, outputs `DOUT_*`.
    pub fn gen_regfile(&mut self, depth: usize, width: usize) -> Result<String, GenError> {
        self.gen_memfile(MemKind::Ram, "REGFILE", depth, width)
    }

    /// Same ports as [`Builder::gen_regfile`] around a ROM.
    pub fn gen_romfile(&mut self, depth: usize, width: usize) -> Result<String, GenError> {
        self.gen_memfile(MemKind::Rom, "ROMFILE", depth, width)
    }
}
