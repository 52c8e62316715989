mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use support::*;
use ttc_core::lp::{LinearProgram, Relation, Solution};
use ttc_core::Rational;

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut optimal, mut infeasible) = (0, 0);
    for _ in 0..200 {
        let lp = random_boxed_lp(&mut rng);
        match (lp.solve().unwrap(), vertex_optimum(&lp)) {
            (Solution::Optimal { value, point }, VertexResult::Optimal(best)) => {
                assert!(lp.is_feasible_point(&point));
                assert_eq!(lp.objective_value(&point), value);
                assert_eq!(value, best, "{lp:?}");
                optimal += 1;
            }
            (Solution::Infeasible(cert), VertexResult::Infeasible) => {
                assert!(cert.verify(&lp), "{lp:?}");
                infeasible += 1;
            }
            (got, want) => panic!("{lp:?}: simplex {got:?}, oracle {want:?}"),
        }
    }
    assert!(optimal > 20 && infeasible > 5, "{optimal} optimal, {infeasible} infeasible");
}

#[test]
fn unbounded_programs_come_with_rays() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut seen = 0;
    for _ in 0..300 {
        let n = rng.gen_range(1..=4);
        let mut lp = LinearProgram::new(n);
        lp.maximize((0..n).map(|_| Rational::from_integer(rng.gen_range(-2..=3))).collect())
            .unwrap();
        for _ in 0..rng.gen_range(0..=4) {
            let coeffs = (0..n).map(|_| Rational::from_integer(rng.gen_range(-3..=3))).collect();
            lp.add_constraint(coeffs, Relation::Le, Rational::from_integer(rng.gen_range(0..=5)))
                .unwrap();
        }
        // x >= 0 and b >= 0 keep the origin feasible
        match lp.solve().unwrap() {
            Solution::Unbounded { point, ray } => {
                assert!(lp.is_feasible_point(&point));
                assert!(lp.is_improving_ray(&ray));
                seen += 1;
            }
            Solution::Optimal { point, .. } => assert!(lp.is_feasible_point(&point)),
            Solution::Infeasible(_) => panic!("origin is feasible"),
        }
    }
    assert!(seen > 10);
}
