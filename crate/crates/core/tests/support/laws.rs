use dekit_core::approx::{random_shape, s_approx, state_tail, weaken_with};
use dekit_core::eval::{wf_state, StateShape, StateTree};
use dekit_core::fourval::Value4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn any_state(shape: &StateShape, rng: &mut impl Rng) -> StateTree {
    shape.fill_state(&mut |_| Value4::ALL[rng.gen_range(0..4)])
}

/// Independent statement of the relation: identical structure and kinds,
/// stored values pointwise below.
pub fn oracle(a: &StateTree, b: &StateTree) -> bool {
    match (a, b) {
        (StateTree::Bit(x), StateTree::Bit(y)) => x.approx(*y),
        (StateTree::Cell(m), StateTree::Cell(n)) => {
            let (cm, cn) = (m.cells(), n.cells());
            m.depth() == n.depth()
                && m.width() == n.width()
                && cm.iter().zip(&cn).all(|(c, d)| c.kind == d.kind && c.payload.approx(&d.payload))
        }
        (StateTree::Node(xs), StateTree::Node(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| oracle(x, y)),
        _ => false,
    }
}

/// Reflexivity and transitivity on random chains `s1 ⊑ s2 ⊑ s3`.
pub fn reflexive_transitive(cases: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let shape = random_shape(&mut rng, 3);
        let s3 = any_state(&shape, &mut rng);
        let s2 = weaken_with(&s3, 0.3, &mut rng);
        let s1 = weaken_with(&s2, 0.3, &mut rng);
        for s in [&s1, &s2, &s3] {
            assert!(s_approx(s, s));
            assert!(wf_state(s, &shape));
        }
        assert!(s_approx(&s1, &s2) && s_approx(&s2, &s3));
        assert!(s_approx(&s1, &s3));
    }
}

/// Related pairs stay related after dropping the first child.
pub fn tail_preserved(cases: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let n = rng.gen_range(1..=5);
        let shape = StateShape::Node((0..n).map(|_| random_shape(&mut rng, 3)).collect());
        let s2 = any_state(&shape, &mut rng);
        let s1 = weaken_with(&s2, 0.3, &mut rng);
        assert!(s_approx(&s1, &s2));
        assert!(wf_state(&s1, &shape) && wf_state(&s2, &shape));
        let (t1, t2) = (state_tail(&s1).unwrap(), state_tail(&s2).unwrap());
        assert!(s_approx(&t1, &t2));
    }
}
