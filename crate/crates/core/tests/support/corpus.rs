use std::fs;
use std::path::PathBuf;

use dekit_core::fourval::GateId;
use dekit_core::genlib::Builder;
use dekit_core::minifm::cpu_netlist;
use dekit_core::netlist::{check_wf, parse_netlist, print_netlist, Netlist, ViolationClass};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../netlists")
}

pub fn de_files(dir: &PathBuf) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "de"))
        .collect();
    v.sort();
    v
}

pub fn generated() -> Vec<Netlist> {
    let mut out = Vec::new();
    let mut one = |f: &dyn Fn(&mut Builder)| {
        let mut b = Builder::new();
        f(&mut b);
        out.push(b.finish());
    };
    for n in [1, 4, 8, 32] {
        one(&|b| drop(b.gen_adder(n).unwrap()));
        one(&|b| drop(b.gen_mux(n).unwrap()));
        one(&|b| drop(b.gen_register(n).unwrap()));
    }
    for n in 1..=6 {
        one(&|b| drop(b.gen_decoder(n).unwrap()));
    }
    for g in GateId::ALL.into_iter().filter(|g| g.arity() > 0 && g.arity() < 3) {
        one(&|b| drop(b.gen_pointwise(g, 5).unwrap()));
    }
    for (d, w) in [(0, 1), (2, 8), (8, 16)] {
        one(&|b| drop(b.gen_regfile(d, w).unwrap()));
        one(&|b| drop(b.gen_romfile(d, w).unwrap()));
    }
    out.push(cpu_netlist());
    out
}

pub fn expected_class(stem: &str) -> ViolationClass {
    match stem {
        "use_before_def" => ViolationClass::UseBeforeDef,
        "duplicate_wire" => ViolationClass::DuplicateWire,
        "duplicate_occurrence" => ViolationClass::DuplicateOccurrence,
        "duplicate_module" => ViolationClass::DuplicateModule,
        "arity_mismatch" => ViolationClass::ArityMismatch,
        "unresolved_ref" => ViolationClass::UnresolvedRef,
        "backward_ref" => ViolationClass::ForwardReferenceViolation,
        "undefined_output" => ViolationClass::UndefinedOutput,
        other => panic!("no expectation for corpus file {other}"),
    }
}

pub fn assert_round_trip(n: &Netlist) {
    let text = print_netlist(n);
    let back = parse_netlist(&text).unwrap();
    assert_eq!(&back, n);
    assert_eq!(print_netlist(&back), text);
}

pub fn shipped() -> Vec<(PathBuf, Netlist)> {
    let dir = corpus_dir();
    de_files(&dir)
        .into_iter()
        .chain(de_files(&dir.join("malformed")))
        .map(|f| {
            let n = parse_netlist(&fs::read_to_string(&f).unwrap()).unwrap();
            (f, n)
        })
        .collect()
}

/// Each malformed file yields exactly its expected class; everything else is accepted.
pub fn wf_corpus() -> usize {
    let mut rejected = 0;
    for (f, n) in shipped() {
        let r = check_wf(&n);
        if f.parent().unwrap().ends_with("malformed") {
            let want = expected_class(f.file_stem().unwrap().to_str().unwrap());
            assert_eq!(r.classes(), vec![want], "{}", f.display());
            rejected += 1;
        } else {
            assert!(r.is_ok(), "{}: {:?}", f.display(), r);
        }
    }
    for n in generated() {
        assert!(check_wf(&n).is_ok(), "{}: {:?}", n.modules[0].name, check_wf(&n));
    }
    rejected
}

/// Returns the number of netlists checked.
pub fn round_trip_all() -> usize {
    let all: Vec<Netlist> = shipped().into_iter().map(|(_, n)| n).chain(generated()).collect();
    for n in &all {
        assert_round_trip(n);
    }
    all.len()
}
