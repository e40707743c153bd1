mod support;

use dekit_core::approx::{random_shape, s_approx, state_tail, weaken_with, TailError};
use dekit_core::eval::StateTree;
use dekit_core::fourval::Value4;
use dekit_core::memory::{MemCell, MemKind, MemTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::laws::{any_state, oracle, reflexive_transitive, tail_preserved};

#[test]
fn reflexive_and_transitive_on_random_chains() {
    reflexive_transitive(10_000, 1);
}

#[test]
fn tail_preserves_approximation() {
    tail_preserved(10_000, 3);
}

#[test]
fn agrees_with_structural_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut related = 0;
    for _ in 0..10_000 {
        let shape = random_shape(&mut rng, 2);
        let a = any_state(&shape, &mut rng);
        let b = if rng.gen_bool(0.5) {
            weaken_with(&a, 0.5, &mut rng)
        } else {
            any_state(&shape, &mut rng)
        };
        let c = any_state(&random_shape(&mut rng, 2), &mut rng);
        assert_eq!(s_approx(&b, &a), oracle(&b, &a));
        assert_eq!(s_approx(&c, &a), oracle(&c, &a));
        if s_approx(&b, &a) && s_approx(&a, &b) {
            assert_eq!(a, b);
        }
        if s_approx(&c, &b) && s_approx(&b, &a) {
            assert!(s_approx(&c, &a));
        }
        related += s_approx(&b, &a) as usize;
    }
    assert!(related > 4_000);
}

#[test]
fn tail_errors() {
    assert_eq!(state_tail(&StateTree::Bit(Value4::T)), Err(TailError::NotANode));
    assert_eq!(state_tail(&StateTree::Node(vec![])), Err(TailError::Empty));
}

#[test]
fn memory_kind_mismatch_is_unrelated() {
    let cell = |k| StateTree::Cell(MemTree::Cell(MemCell::new(k, "TF".parse().unwrap())));
    assert!(!s_approx(&cell(MemKind::Rom), &cell(MemKind::Ram)));
    assert!(!s_approx(&cell(MemKind::Stub), &StateTree::Node(vec![])));
    assert!(!s_approx(&StateTree::Bit(Value4::X), &cell(MemKind::Ram)));
    let weak = StateTree::Cell(MemTree::Cell(MemCell::new(MemKind::Ram, "XF".parse().unwrap())));
    assert!(s_approx(&weak, &cell(MemKind::Ram)));
}
