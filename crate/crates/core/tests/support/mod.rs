//! Random corpora and brute-force oracles shared by the integration tests.
//!
//! Nothing in here calls the simplex solver: each oracle decides its question
//! by a different route so that agreement means something.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use ttc_core::lp::{Bounds, LinearProgram, Relation};
use ttc_core::matrix::cumulative;
use ttc_core::prefs::permutations;
use ttc_core::{BistochasticMatrix, DeterministicAssignment, ObjectId, Preference, Profile, Rational};

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn random_pref<R: Rng>(rng: &mut R, n: usize) -> Preference {
    let mut r: Vec<usize> = (0..n).collect();
    r.shuffle(rng);
    Preference::from_indices(&r).unwrap()
}

pub fn random_profile<R: Rng>(rng: &mut R, n: usize) -> Profile {
    Profile::new((0..n).map(|_| random_pref(rng, n)).collect()).unwrap()
}

pub fn random_perm<R: Rng>(rng: &mut R, n: usize) -> DeterministicAssignment {
    let mut r: Vec<usize> = (0..n).collect();
    r.shuffle(rng);
    DeterministicAssignment::from_indices(&r).unwrap()
}

/// Average of `denom` random permutation matrices: every entry is a multiple
/// of `1/denom`.
pub fn random_bistochastic<R: Rng>(rng: &mut R, n: usize, denom: usize) -> BistochasticMatrix {
    let mut rows = vec![vec![Rational::zero(); n]; n];
    let w = Rational::new(1, denom as i64);
    for _ in 0..denom {
        let p = random_perm(rng, n);
        for (i, row) in rows.iter_mut().enumerate() {
            row[p.object_of(i).0] += &w;
        }
    }
    BistochasticMatrix::new(rows).unwrap()
}

/// `(matrix, profile)` pairs with `n` in {3, 4} and denominators up to 6.
pub fn corpus<R: Rng>(rng: &mut R, size: usize) -> Vec<(BistochasticMatrix, Profile)> {
    (0..size)
        .map(|_| {
            let n = rng.gen_range(3..=4);
            let d = rng.gen_range(1..=6);
            (random_bistochastic(rng, n, d), random_profile(rng, n))
        })
        .collect()
}

// ------------------------------------------------------------- TTC oracle

/// TTC that clears every cycle of the pointing graph in the same round.
pub fn ttc_all_cycles(profile: &Profile) -> Vec<usize> {
    let n = profile.n();
    let mut left = vec![true; n];
    let mut assign = vec![usize::MAX; n];
    while left.iter().any(|&l| l) {
        let points: Vec<usize> = (0..n)
            .map(|i| if left[i] { profile.pref(i).top_among(&left).unwrap().0 } else { i })
            .collect();
        let on_cycle: Vec<bool> = (0..n)
            .map(|i| {
                let mut a = points[i];
                for _ in 0..n {
                    if a == i {
                        return left[i];
                    }
                    a = points[a];
                }
                false
            })
            .collect();
        for i in 0..n {
            if on_cycle[i] {
                assign[i] = points[i];
                left[i] = false;
            }
        }
    }
    assign
}

// ---------------------------------------------------------- SD oracles

fn sd_weak(p: &Preference, l: &[Rational], r: &[Rational]) -> (bool, bool) {
    let (cl, cr) = (cumulative(p, l), cumulative(p, r));
    let weak = cl.iter().zip(&cr).all(|(a, b)| a >= b);
    (weak, weak && cl != cr)
}

/// Every bi-stochastic matrix whose entries are multiples of `1/q`, as
/// integer numerators, for `n = 3`.
fn lattice_3x3(q: i64) -> Vec<[[i64; 3]; 3]> {
    let mut out = Vec::new();
    for a in 0..=q {
        for b in 0..=q - a {
            for d in 0..=q - a {
                for e in 0..=q - b {
                    let c = q - a - b;
                    let f = q - d - e;
                    let g = q - a - d;
                    let h = q - b - e;
                    let i = q - c - f;
                    if f >= 0 && g >= 0 && h >= 0 && i >= 0 && g + h + i == q {
                        out.push([[a, b, c], [d, e, f], [g, h, i]]);
                    }
                }
            }
        }
    }
    out
}

/// SD-Pareto efficiency at `n = 3` by exhaustive search on the grid of
/// multiples of `1/q`, `q` the common denominator of `m`.
///
/// Searching the grid is enough: an inefficient `m` admits an improving
/// exchange cycle, and moving `1/q` around it stays on the grid because
/// every positive entry of `m` is at least `1/q`.
pub fn sd_pareto_by_lattice(m: &BistochasticMatrix, profile: &Profile) -> bool {
    assert_eq!(m.n(), 3);
    let mut qd: i64 = 1;
    for row in m.rows() {
        for v in row {
            let d: i64 = v.denom().try_into().unwrap();
            qd = qd / gcd(qd, d) * d;
        }
    }
    for cand in lattice_3x3(qd) {
        let rows: Vec<Vec<Rational>> = cand
            .iter()
            .map(|r| r.iter().map(|&k| Rational::new(k, qd)).collect())
            .collect();
        let mut weak = true;
        let mut strict = false;
        for (i, row) in rows.iter().enumerate() {
            let (w, s) = sd_weak(profile.pref(i), row, m.row(i));
            weak &= w;
            strict |= s;
        }
        if weak && strict {
            return false;
        }
    }
    true
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Two agents can improve by trading within their rows iff some object pair
/// `(a, b)` has `i` preferring `a`, holding some `b`, and `j` the reverse.
pub fn pair_dominated_by_swap(m: &BistochasticMatrix, profile: &Profile, i: usize, j: usize) -> bool {
    let n = m.n();
    (0..n).any(|a| {
        (0..n).any(|b| {
            profile.pref(i).strictly_prefers(ObjectId(a), ObjectId(b))
                && profile.pref(j).strictly_prefers(ObjectId(b), ObjectId(a))
                && m.get(i, b).is_positive()
                && m.get(j, a).is_positive()
        })
    })
}

/// Whether `m` lies in the convex hull of `allowed` (any `n`, but exponential
/// in `allowed.len()`).
///
/// By Carathéodory, `m` is in the hull iff it is a nonnegative combination of
/// some linearly independent subset, and such a subset has at most one
/// solution for its weights. Row sums force the weights to add up to one.
pub fn in_hull(m: &BistochasticMatrix, allowed: &[DeterministicAssignment]) -> bool {
    let n = m.n();
    let k = allowed.len();
    for mask in 1u32..1 << k {
        let chosen: Vec<&DeterministicAssignment> =
            (0..k).filter(|&b| mask >> b & 1 == 1).map(|b| &allowed[b]).collect();
        let mut a: Vec<Vec<Rational>> = Vec::new();
        let mut rhs = Vec::new();
        for cell in 0..n * n {
            a.push(
                chosen
                    .iter()
                    .map(|p| {
                        if p.object_of(cell / n).0 == cell % n {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect(),
            );
            rhs.push(m.get(cell / n, cell % n).clone());
        }
        if let Some(w) = solve_unique(&a, &rhs) {
            if w.iter().all(|x| !x.is_negative()) {
                return true;
            }
        }
    }
    false
}

// ----------------------------------------------------------- LP oracle

/// Boxed random program: each variable lies in a finite interval, given
/// either as a bound or as explicit constraint rows on a free variable.
pub fn random_boxed_lp<R: Rng>(rng: &mut R) -> LinearProgram {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(0..=8 - n.min(3));
    let small = |rng: &mut R| Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=3));
    let mut lp = LinearProgram::new(n);
    lp.maximize((0..n).map(|_| small(rng)).collect()).unwrap();
    let mut explicit = Vec::new();
    for v in 0..n {
        let lo = Rational::from_integer(rng.gen_range(-4..=1));
        let hi = &lo + Rational::from_integer(rng.gen_range(0..=6));
        if rng.gen_bool(0.25) {
            lp.set_bounds(v, Bounds::free()).unwrap();
            explicit.push((v, lo, hi));
        } else {
            lp.set_bounds(v, Bounds { lower: Some(lo), upper: Some(hi) }).unwrap();
        }
    }
    for _ in 0..m {
        let coeffs: Vec<Rational> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { Rational::zero() } else { small(rng) })
            .collect();
        let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
        lp.add_constraint(coeffs, rel, small(rng) * Rational::from_integer(2)).unwrap();
    }
    for (v, lo, hi) in explicit {
        lp.add_sparse(&[(v, Rational::one())], Relation::Ge, lo).unwrap();
        lp.add_sparse(&[(v, Rational::one())], Relation::Le, hi).unwrap();
    }
    lp
}


/// Gaussian elimination; the unique solution of `a x = b` if `a` has full
/// column rank and the system is consistent.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> =
        a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
    let mut pivot_row = 0;
    for c in 0..cols {
        let p = (pivot_row..rows).find(|&r| !m[r][c].is_zero())?;
        m.swap(pivot_row, p);
        let inv = m[pivot_row][c].recip();
        for v in m[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..=cols {
                    let d = &f * &m[pivot_row][k];
                    m[r][k] -= d;
                }
            }
        }
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|c| m[c][cols].clone()).collect())
}

/// Result of the brute-force vertex search.
#[derive(Debug, PartialEq)]
pub enum VertexResult {
    Optimal(Rational),
    Infeasible,
}

/// Maximizes over a bounded polyhedron by enumerating every basic solution:
/// choose `n` of the constraint/bound hyperplanes, solve them as equalities,
/// keep the feasible ones. Only valid when every variable has both bounds.
pub fn vertex_optimum(lp: &LinearProgram) -> VertexResult {
    let n = lp.num_vars();
    // all hyperplanes a·x = b that can be active at a vertex
    let mut planes: Vec<(Vec<Rational>, Rational)> =
        lp.constraints().iter().map(|c| (c.coeffs.clone(), c.rhs.clone())).collect();
    for (v, b) in lp.bounds().iter().enumerate() {
        let unit: Vec<Rational> =
            (0..n).map(|k| if k == v { Rational::one() } else { Rational::zero() }).collect();
        for end in [&b.lower, &b.upper].into_iter().flatten() {
            planes.push((unit.clone(), end.clone()));
        }
    }
    let mut best: Option<Rational> = None;
    let mut choose = Vec::new();
    subsets(planes.len(), n, 0, &mut choose, &mut |idx| {
        let a: Vec<Vec<Rational>> = idx.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<Rational> = idx.iter().map(|&k| planes[k].1.clone()).collect();
        if let Some(x) = solve_unique(&a, &b) {
            if lp.is_feasible_point(&x) {
                let v = lp.objective_value(&x);
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
    });
    match best {
        Some(v) => VertexResult::Optimal(v),
        None => VertexResult::Infeasible,
    }
}

fn subsets(total: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..total {
        if total - i < k - cur.len() {
            break;
        }
        cur.push(i);
        subsets(total, k, i + 1, cur, f);
        cur.pop();
    }
}

/// All permutations of `0..n` as assignments.
pub fn all_perms(n: usize) -> Vec<DeterministicAssignment> {
    permutations(n).iter().map(|p| DeterministicAssignment::from_indices(p).unwrap()).collect()
}
