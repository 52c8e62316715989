mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use support::*;
use ttc_core::matrix::{birkhoff_decompose, decompose_within, ConstrainedDecomposition};
use ttc_core::BistochasticMatrix;

#[test]
fn roundtrip_within_term_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..300 {
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=12);
        let m = random_bistochastic(&mut rng, n, k);
        let d = birkhoff_decompose(&m);
        assert!(d.is_valid_for(&m));
        assert!(d.len() <= n * n + 2 - 2 * n);
    }
}

#[test]
fn uniform_matrix_needs_n_terms() {
    for n in 1..=6 {
        let d = birkhoff_decompose(&BistochasticMatrix::uniform(n));
        assert!(d.is_valid_for(&BistochasticMatrix::uniform(n)));
        assert_eq!(d.len(), n);
    }
}

#[test]
fn constrained_decomposition_agrees_with_hull_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let perms = all_perms(3);
    for _ in 0..200 {
        let k = rng.gen_range(1..=6);
        let m = random_bistochastic(&mut rng, 3, k);
        let allowed: Vec<_> = perms.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        match decompose_within(&m, &allowed).unwrap() {
            ConstrainedDecomposition::Feasible { decomposition } => {
                assert!(decomposition.is_valid_for(&m));
                assert!(decomposition.terms.iter().all(|t| allowed.contains(&t.perm)));
                assert!(in_hull(&m, &allowed));
            }
            ConstrainedDecomposition::Infeasible { certificate } => {
                assert!(certificate.separates(&m, &allowed));
                assert!(!in_hull(&m, &allowed));
            }
        }
    }
}
