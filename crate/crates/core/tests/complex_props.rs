//! Structural properties of filtered complexes on randomly generated
//! inputs: boundary-of-boundary vanishing, sublevel composition, lazy
//! candidate coverage, and skeleton behavior.

use std::collections::BTreeSet;

use alphax::{FilteredComplex, Simplex, SparseMatrixFp};
use proptest::prelude::*;

/// Random complex on up to 10 vertices, closed under faces by
/// construction: every generated triple contributes its triangle, edges
/// and vertices, with weights that grow with dimension plus jitter.
fn complex_strategy() -> impl Strategy<Value = FilteredComplex> {
    let triple = (0u32..10, 0u32..10, 0u32..10);
    let jitter = proptest::collection::vec(0.0f64..0.1, 40);
    (proptest::collection::vec(triple, 1..25), jitter).prop_map(|(triples, jitter)| {
        let mut complex = FilteredComplex::new();
        let mut noise = jitter.into_iter().cycle();
        let mut bump = move |base: f64| base + noise.next().unwrap();
        for (a, b, c) in triples {
            let mut vs = vec![a, b, c];
            vs.sort_unstable();
            vs.dedup();
            for &v in &vs {
                if !complex.contains(&[v]) {
                    complex.insert(Simplex::vertex(v), 0.0);
                }
            }
            if vs.len() >= 2 {
                for i in 0..vs.len() {
                    for j in i + 1..vs.len() {
                        if !complex.contains(&[vs[i], vs[j]]) {
                            complex.insert(Simplex::edge(vs[i], vs[j]), bump(1.0));
                        }
                    }
                }
            }
            if vs.len() == 3 && !complex.contains(&vs) {
                let floor = vs
                    .iter()
                    .flat_map(|&x| vs.iter().filter(move |&&y| y > x).map(move |&y| (x, y)))
                    .map(|(x, y)| complex.weight(&[x, y]).unwrap())
                    .fold(0.0, f64::max);
                complex.insert(Simplex::new(vs).unwrap(), bump(floor.max(2.0)));
            }
        }
        complex
    })
}

fn dense(m: &SparseMatrixFp) -> Vec<Vec<u64>> {
    let mut out = vec![vec![0u64; m.cols()]; m.rows()];
    for &(r, c, v) in m.triples() {
        out[r as usize][c as usize] = v;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_complexes_are_valid(complex in complex_strategy()) {
        complex.validate(1e-12).unwrap();
    }

    #[test]
    fn boundary_composes_to_zero(complex in complex_strategy()) {
        for prime in [2u64, 5] {
            for k in 1..complex.dimension_count().saturating_sub(1) {
                let low = dense(&complex.boundary_matrix(k, prime).unwrap());
                let high = dense(&complex.boundary_matrix(k + 1, prime).unwrap());
                if low.is_empty() || high.is_empty() {
                    continue;
                }
                for i in 0..low.len() {
                    for j in 0..high[0].len() {
                        let dot: u64 = (0..high.len())
                            .map(|t| low[i][t] * high[t][j] % prime)
                            .sum();
                        prop_assert_eq!(dot % prime, 0, "entry ({}, {}) mod {}", i, j, prime);
                    }
                }
            }
        }
    }

    #[test]
    fn sublevel_composition(complex in complex_strategy(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let two_step = complex.sublevel(a).sublevel(b);
        let direct = complex.sublevel(a.min(b));
        prop_assert_eq!(two_step, direct);
    }

    #[test]
    fn lazy_candidates_cover_stored_simplices(complex in complex_strategy()) {
        for k in 2..complex.dimension_count() {
            let candidates: BTreeSet<Simplex> =
                complex.skeleton(k as isize - 1).lazy_candidates(k).into_iter().collect();
            for (s, _) in complex.layer(k) {
                prop_assert!(candidates.contains(s), "{} not offered as a candidate", s);
            }
        }
    }

    #[test]
    fn skeleton_truncates_sizes(complex in complex_strategy(), k in -1isize..4) {
        let skel = complex.skeleton(k);
        let keep = (k + 1).max(0) as usize;
        let want: Vec<usize> = complex.sizes().into_iter().take(keep).collect();
        prop_assert_eq!(skel.sizes(), want);
        let euler: i64 = skel
            .sizes()
            .iter()
            .enumerate()
            .map(|(i, &n)| if i % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum();
        prop_assert_eq!(skel.euler_characteristic(), euler);
    }
}
