//! Random cross-checks between the dual active-set solver and the
//! enumeration oracle: strong duality on feasible instances, consistent
//! infeasibility reports, KKT conditions at the reported optimum, and the
//! single-constraint lower bound.

use alphax::{
    primal_from_dual, single_constraint_bound, solve_dual, DualProblem, DualStatus,
    PrimalProblem, PrimalSolution, QpError, Tolerances,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

struct Instance {
    x: Vec<f64>,
    a: Vec<f64>,
    v: Vec<f64>,
    equalities: Vec<usize>,
    gram: Vec<f64>,
    linear: Vec<f64>,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let m = rng.gen_range(1..=4usize);
    let n = rng.gen_range(1..=8usize);
    let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut a: Vec<f64> = (0..n * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // A third of the instances get a built-in contradiction so the
    // infeasible branch is exercised: some row r must satisfy both
    // r.y <= v and r.y >= v + 1/2.
    if n >= 2 && rng.gen_bool(0.3) {
        let strength = rng.gen_range(0.5..2.0);
        for t in 0..m {
            a[t + m] = -a[t] * strength;
        }
        v[1] = (-v[0] - 0.5) * strength;
    }
    let equalities: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.25)).collect();

    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = (0..m).map(|t| a[i * m + t] * a[j * m + t]).sum();
        }
    }
    let linear: Vec<f64> = (0..n)
        .map(|i| (0..m).map(|t| a[i * m + t] * x[t]).sum::<f64>() - v[i])
        .collect();
    Instance {
        x,
        a,
        v,
        equalities,
        gram,
        linear,
    }
}

#[test]
fn dual_matches_enumeration_on_random_instances() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut feasible_seen, mut infeasible_seen) = (0, 0);

    for _ in 0..500 {
        let inst = random_instance(&mut rng);
        let n = inst.v.len();
        let primal = PrimalProblem::new(
            inst.x.clone(),
            inst.a.clone(),
            inst.v.clone(),
            inst.equalities.clone(),
        )
        .unwrap();
        let reference = alphax::primal_enumerate(&primal).unwrap();

        let unbounded_probe = DualProblem::new(
            &inst.gram,
            &inst.linear,
            &inst.equalities,
            f64::INFINITY,
        )
        .unwrap();
        let sol = solve_dual(&unbounded_probe, &tol).unwrap();

        match &reference {
            PrimalSolution::Feasible { y: y_ref, cstar } => {
                feasible_seen += 1;
                assert_eq!(
                    sol.status,
                    DualStatus::Optimal,
                    "dual gave up on a feasible instance (oracle c* = {cstar})"
                );
                assert!(
                    (sol.cstar - cstar).abs() <= 1e-8 * (1.0 + cstar.abs()),
                    "duality gap: dual {} vs primal {}",
                    sol.cstar,
                    cstar
                );

                let y = primal_from_dual(&inst.x, &inst.a, &sol.lambda).unwrap();
                let dist: f64 = y
                    .iter()
                    .zip(y_ref)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                assert!(dist <= 1e-6, "recovered point off by {dist}");

                let m = inst.x.len();
                for i in 0..n {
                    let lhs: f64 = (0..m).map(|t| inst.a[i * m + t] * y[t]).sum();
                    let resid = lhs - inst.v[i];
                    let scale = 1.0 + inst.v[i].abs().max(lhs.abs());
                    if inst.equalities.contains(&i) {
                        assert!(resid.abs() <= 1e-8 * scale, "equality {i} violated: {resid}");
                    } else {
                        assert!(resid <= 1e-8 * scale, "inequality {i} violated: {resid}");
                        assert!(sol.lambda[i] >= -1e-10, "negative multiplier {i}");
                        // Near-dependent constraints can carry enormous
                        // multipliers, so complementarity is scaled by them.
                        assert!(
                            (sol.lambda[i] * resid).abs()
                                <= 1e-8 * scale * (1.0 + sol.lambda[i].abs()),
                            "complementary slackness broken at {i}: lambda {}, resid {resid}",
                            sol.lambda[i]
                        );
                    }
                }

                // Example 3.1-style bounds stay below the optimum.
                for i in 0..n {
                    match single_constraint_bound(&unbounded_probe, i, &tol) {
                        Ok(b) => assert!(
                            b <= cstar + 1e-8 * (1.0 + cstar.abs()),
                            "single-constraint bound {b} above optimum {cstar}"
                        ),
                        Err(QpError::DegenerateConstraint { .. }) => {}
                        Err(e) => panic!("unexpected error: {e}"),
                    }
                }

                // A bound strictly below the optimum must trip the early exit.
                if *cstar > 1e-6 {
                    let below =
                        DualProblem::new(&inst.gram, &inst.linear, &inst.equalities, cstar / 2.0)
                            .unwrap();
                    let s = solve_dual(&below, &tol).unwrap();
                    assert_eq!(s.status, DualStatus::BoundExceeded);
                    assert!(s.cstar.is_infinite());
                }
            }
            PrimalSolution::Infeasible => {
                infeasible_seen += 1;
                assert_eq!(
                    sol.status,
                    DualStatus::BoundExceeded,
                    "dual found an optimum on an infeasible instance"
                );
                for c1 in [0.0, 1.0, 10.0, 1e6] {
                    let p =
                        DualProblem::new(&inst.gram, &inst.linear, &inst.equalities, c1).unwrap();
                    let s = solve_dual(&p, &tol).unwrap();
                    assert_eq!(s.status, DualStatus::BoundExceeded, "bound {c1}");
                }
            }
        }
    }
    assert!(feasible_seen >= 50, "only {feasible_seen} feasible instances");
    assert!(
        infeasible_seen >= 50,
        "only {infeasible_seen} infeasible instances"
    );
}
