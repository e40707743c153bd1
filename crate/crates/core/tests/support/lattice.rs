use dekit_core::fourval::{GateId, GateTable, Value4};

use Value4::*;

pub fn tuples(n: usize) -> Vec<Vec<Value4>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                Value4::ALL.into_iter().map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

fn pointwise_approx(a: &[Value4], b: &[Value4]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.approx(*y))
}

/// Reflexivity over 4 values, antisymmetry over 16 pairs, transitivity over 64 triples.
pub fn order_laws() {
    assert_eq!(tuples(1).len(), 4);
    for a in Value4::ALL {
        assert!(a.approx(a));
        assert!(X.approx(a));
    }
    let pairs = tuples(2);
    assert_eq!(pairs.len(), 16);
    for t in pairs {
        if t[0].approx(t[1]) && t[1].approx(t[0]) {
            assert_eq!(t[0], t[1]);
        }
    }
    let triples = tuples(3);
    assert_eq!(triples.len(), 64);
    for t in triples {
        if t[0].approx(t[1]) && t[1].approx(t[2]) {
            assert!(t[0].approx(t[2]));
        }
    }
}

/// Every related input pair of every gate where the outputs are unrelated.
pub fn monotone_failures(table: &dyn GateTable) -> Vec<(GateId, Vec<Value4>, Vec<Value4>)> {
    let mut bad = Vec::new();
    for g in GateId::ALL {
        let ins = tuples(g.arity());
        for a in &ins {
            for b in &ins {
                if pointwise_approx(a, b) && !table.eval(g, a).approx(table.eval(g, b)) {
                    bad.push((g, a.clone(), b.clone()));
                }
            }
        }
    }
    bad
}
