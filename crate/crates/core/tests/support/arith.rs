use dekit_core::eval::{Evaluator, StateTree};
use dekit_core::fourval::{nat_to_vec, vec_to_nat, Value4, Vec4};
use dekit_core::genlib::{Builder, GenError};
use dekit_core::netlist::check_wf;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn build(f: impl FnOnce(&mut Builder) -> Result<String, GenError>) -> Evaluator {
    let mut b = Builder::new();
    f(&mut b).unwrap();
    let n = b.finish();
    assert!(check_wf(&n).is_ok());
    Evaluator::new(&n).unwrap()
}

pub fn nat(v: &[Value4]) -> u128 {
    vec_to_nat(&Vec4::new(v.to_vec())).expect("boolean output")
}

pub fn add_once(ev: &Evaluator, n: usize, cin: bool, a: u128, b: u128) -> (u128, bool) {
    let mut ins = vec![Value4::from_bool(cin)];
    ins.extend(nat_to_vec(a, n).into_bits());
    ins.extend(nat_to_vec(b, n).into_bits());
    let out = ev.se(0, &ins, &StateTree::empty()).unwrap();
    (nat(&out[..n]), out[n] == Value4::T)
}

/// All `2^(2n+1)` boolean inputs for every width up to `max_n`.
pub fn adder_exhaustive(max_n: usize) {
    for n in 1..=max_n {
        let ev = build(|b| b.gen_adder(n));
        let m = 1u128 << n;
        for cin in [false, true] {
            for a in 0..m {
                for b in 0..m {
                    let total = a + b + cin as u128;
                    assert_eq!(add_once(&ev, n, cin, a, b), (total % m, total >= m), "n={n} {a}+{b}+{cin}");
                }
            }
        }
    }
}

pub fn adder_random_32(cases: usize, seed: u64) {
    let ev = build(|b| b.gen_adder(32));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let (a, b, cin) = (rng.gen::<u32>() as u128, rng.gen::<u32>() as u128, rng.gen::<bool>());
        let total = a + b + cin as u128;
        assert_eq!(add_once(&ev, 32, cin, a, b), (total & 0xFFFF_FFFF, total >> 32 == 1));
    }
}
