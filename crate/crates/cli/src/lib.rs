//! Command-line front end: argument handling and the subcommand drivers.
//!
//! [`run`] takes the gate table explicitly so callers can substitute a
//! patched one; the binary always passes the standard table.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use dekit_core::approx::{check_monotonic, MonoConfig, MonoReport};
use dekit_core::eval::{format_outputs, parse_state, parse_stimulus, StateTree};
use dekit_core::fourval::{values_to_string, GateTable, Value4, Vec4};
use dekit_core::genlib::Builder;
use dekit_core::memory::{parse_mem_image, MemKind, MemTree};
use dekit_core::minifm::{assemble, build_cpu, equiv_check, program_image, Cpu, EquivReport};
use dekit_core::netlist::{check_wf, parse_netlist, print_netlist, Netlist, WfReport};
use dekit_core::report::Report;
use dekit_core::Evaluator;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dekit", version, about = "Four-valued hierarchical netlist toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Adder,
    Mux,
    Decoder,
    Register,
    Regfile,
    Romfile,
    Cpu,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report well-formedness violations of a netlist.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Simulate a module over a stimulus, printing outputs per cycle.
    Sim {
        file: PathBuf,
        #[arg(long)]
        top: Option<String>,
        #[arg(long)]
        stim: PathBuf,
        /// Initial state; defaults to the all-F state of the right shape.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Memory image loaded into the first ROM of the initial state.
        #[arg(long)]
        mem_init: Option<PathBuf>,
        /// Value of memory words the image does not list.
        #[arg(long, default_value = "F")]
        mem_fill: char,
        /// Stop after this many cycles.
        #[arg(long)]
        cycles: Option<usize>,
        /// Append the final state after the outputs.
        #[arg(long)]
        print_state: bool,
    },
    /// Randomized monotonicity check of one module.
    Mono {
        file: PathBuf,
        #[arg(long)]
        top: Option<String>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Emit a generated netlist.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Check the CPU netlist against its instruction-level specification.
    CpuEquiv {
        #[arg(long, default_value_t = 500)]
        programs: u64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Assemble a CPU program into a memory image.
    Asm {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// A failure that maps to the usage/contract exit code.
#[derive(Debug)]
pub struct Fatal(pub String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

type Outcome = Result<i32, Fatal>;

/// Parse `args` (program name first) and run the subcommand.
pub fn run<I, T>(args: I, gates: &dyn Fn() -> Box<dyn GateTable>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_PASS
            };
            return code;
        }
    };
    match dispatch(cli.command, gates, out) {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn load_netlist(path: &Path) -> Result<Netlist, Fatal> {
    parse_netlist(&read(path)?).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn evaluator(n: &Netlist, gates: &dyn Fn() -> Box<dyn GateTable>) -> Result<Evaluator, Fatal> {
    Ok(Evaluator::with_gates(n, gates())?)
}

fn top_position(ev: &Evaluator, top: Option<&str>) -> Result<usize, Fatal> {
    match top {
        Some(name) => ev
            .position(&name.to_ascii_uppercase())
            .ok_or_else(|| Fatal(format!("no module named {name}"))),
        None if ev.netlist().modules.is_empty() => Err(Fatal("netlist has no modules".into())),
        None => Ok(0),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Fatal> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn write_or_emit(path: Option<&Path>, out: &mut dyn Write, text: &str) -> Result<(), Fatal> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Fatal(format!("{}: {e}", p.display()))),
        None => emit(out, text),
    }
}

fn verdict(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_VIOLATIONS
    }
}

fn dispatch(cmd: Command, gates: &dyn Fn() -> Box<dyn GateTable>, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Check { file, format } => {
            let n = load_netlist(&file)?;
            let r = check_wf(&n);
            emit(out, &render_wf(&r, format))?;
            Ok(verdict(r.is_ok()))
        }
        Command::Sim {
            file,
            top,
            stim,
            state,
            mem_init,
            mem_fill,
            cycles,
            print_state,
        } => {
            let n = load_netlist(&file)?;
            let ev = evaluator(&n, gates)?;
            let at = top_position(&ev, top.as_deref())?;
            let mut trace = parse_stimulus(&read(&stim)?).map_err(|e| Fatal(format!("{}: {e}", stim.display())))?;
            if let Some(c) = cycles {
                if c > trace.len() {
                    return Err(Fatal(format!("stimulus has {} cycles, {c} requested", trace.len())));
                }
                trace.truncate(c);
            }
            let mut s0 = match &state {
                Some(p) => parse_state(&read(p)?).map_err(|e| Fatal(format!("{}: {e}", p.display())))?,
                None => ev.state_shape(at)?.zero_state(),
            };
            if let Some(p) = &mem_init {
                let fill = Value4::from_char(mem_fill).ok_or_else(|| Fatal(format!("bad fill value {mem_fill:?}")))?;
                load_image(&mut s0, &read(p)?, fill).map_err(|e| Fatal(format!("{}: {}", p.display(), e.0)))?;
            }
            let (outs, last) = ev.run(at, &s0, &trace)?;
            emit(out, &format_outputs(&outs))?;
            if print_state {
                emit(out, &format!("{last}\n"))?;
            }
            Ok(EXIT_PASS)
        }
        Command::Mono {
            file,
            top,
            trials,
            seed,
            p,
            format,
        } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Fatal(format!("--p must lie in [0, 1], got {p}")));
            }
            let n = load_netlist(&file)?;
            let ev = evaluator(&n, gates)?;
            let at = top_position(&ev, top.as_deref())?;
            let r = check_monotonic(&ev, at, &MonoConfig { trials, p, seed })?;
            emit(out, &render_mono(&r, format))?;
            Ok(verdict(r.pass()))
        }
        Command::Gen {
            kind,
            n,
            depth,
            width,
            output,
        } => {
            let nl = generate(kind, n, depth, width)?;
            write_or_emit(output.as_deref(), out, &print_netlist(&nl))?;
            Ok(EXIT_PASS)
        }
        Command::CpuEquiv {
            programs,
            steps,
            seed,
            format,
        } => {
            let r = equiv_check(&Cpu::new(), programs, steps, seed);
            emit(out, &render_equiv(&r, format))?;
            Ok(verdict(r.pass()))
        }
        Command::Asm { file, output } => {
            let prog = assemble(&read(&file)?)?;
            write_or_emit(output.as_deref(), out, &program_image(&prog)?)?;
            Ok(EXIT_PASS)
        }
    }
}

pub fn generate(kind: GenKind, n: Option<usize>, depth: Option<usize>, width: Option<usize>) -> Result<Netlist, Fatal> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Fatal(format!("{flag} is required for this generator")));
    let mut b = Builder::new();
    match kind {
        GenKind::Adder => b.gen_adder(need(n, "--n")?)?,
        GenKind::Mux => b.gen_mux(need(n, "--n")?)?,
        GenKind::Decoder => b.gen_decoder(need(n, "--n")?)?,
        GenKind::Register => b.gen_register(need(n, "--n")?)?,
        GenKind::Regfile => b.gen_regfile(need(depth, "--depth")?, need(width.or(n), "--width")?)?,
        GenKind::Romfile => b.gen_romfile(need(depth, "--depth")?, need(width.or(n), "--width")?)?,
        GenKind::Cpu => build_cpu(&mut b)?,
    };
    Ok(b.finish())
}

pub struct ImageFailure(pub String);

/// Replace the first ROM in `s` (or the first memory, when there is no ROM)
/// with the image.
pub fn load_image(s: &mut StateTree, text: &str, fill: Value4) -> Result<(), ImageFailure> {
    fn find<'a>(s: &'a mut StateTree, want: Option<MemKind>) -> Option<&'a mut MemTree> {
        match s {
            StateTree::Cell(m) if want.is_none_or(|k| m.kind() == k) => Some(m),
            StateTree::Node(cs) => cs.iter_mut().find_map(|c| find(c, want)),
            _ => None,
        }
    }
    let has_rom = find(s, Some(MemKind::Rom)).is_some();
    let target = find(s, if has_rom { Some(MemKind::Rom) } else { None }).ok_or_else(|| ImageFailure("state has no memory".into()))?;
    let (kind, depth, width) = (target.kind(), target.depth(), target.width());
    *target = parse_mem_image(text, kind, depth, width, &Vec4::filled(fill, width)).map_err(|e| ImageFailure(e.to_string()))?;
    Ok(())
}

pub fn render_wf(r: &WfReport, format: Format) -> String {
    match format {
        Format::Json => Report::from(r).to_json() + "\n",
        Format::Text if r.is_ok() => "ok: no violations\n".into(),
        Format::Text => {
            let mut s: String = r.violations.iter().map(|v| format!("{v}\n")).collect();
            s.push_str(&format!("{} violation(s)\n", r.violations.len()));
            s
        }
    }
}

pub fn render_mono(r: &MonoReport, format: Format) -> String {
    if format == Format::Json {
        return Report::from(r).to_json() + "\n";
    }
    let mut s = format!(
        "mono {}: {} trials, seed {}, p {}: {}\n",
        r.module,
        r.trials,
        r.seed,
        r.p,
        if r.pass() { "pass" } else { "FAIL" }
    );
    for v in &r.violations {
        s.push_str(&format!(
            "  trial {} {} {}\n    weak   in {} state {} -> {}\n    strong in {} state {} -> {}\n",
            v.trial,
            v.kind.name(),
            v.position,
            values_to_string(&v.weak_inputs),
            v.weak_state,
            v.weak_result,
            values_to_string(&v.strong_inputs),
            v.strong_state,
            v.strong_result
        ));
    }
    s
}

pub fn render_equiv(r: &EquivReport, format: Format) -> String {
    if format == Format::Json {
        return Report::from(r).to_json() + "\n";
    }
    let mut s = format!(
        "cpu-equiv: {} programs x {} steps, seed {}: {}\n",
        r.programs,
        r.steps,
        r.seed,
        if r.pass() { "pass" } else { "FAIL" }
    );
    for m in &r.mismatches {
        s.push_str(&format!(
            "  program {} step {} field {}: expected {} got {}\n",
            m.program, m.step, m.field, m.expected, m.actual
        ));
    }
    s
}

/// Standard gate table, as used by the binary.
pub fn std_gates() -> Box<dyn GateTable> {
    Box::new(dekit_core::fourval::StdGates)
}

/// Gate table with `and2(F, X) = T`, a deliberately non-monotone fault.
pub fn faulty_gates() -> Box<dyn GateTable> {
    Box::new(dekit_core::fourval::PatchedGates::and2_fx_fault())
}
