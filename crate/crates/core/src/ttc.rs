//! Top Trading Cycles.
//!
//! Every remaining agent points at the owner of their favourite remaining
//! object. The pointing graph is functional, so it has a cycle; the agents on
//! one cycle each receive the object they point at and leave with it. Repeat
//! until nobody is left.
//!
//! When several cycles coexist, this implementation removes the one through
//! the lowest-indexed agent that lies on any cycle. Which cycle goes first
//! does not change the final assignment, since disjoint cycles never
//! interfere.
//!
//! ```
//! use ttc_core::prefs::{Preference, Profile};
//! use ttc_core::ttc::ttc;
//!
//! // Agent 0 owns x0 but wants x1; agent 1 owns x1 but wants x0.
//! let p = |r: &[usize]| Preference::from_indices(r).unwrap();
//! let profile = Profile::new(vec![p(&[1, 0]), p(&[0, 1])]).unwrap();
//! assert_eq!(ttc(&profile).to_indices(), vec![1, 0]);
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DeterministicAssignment;
use crate::prefs::{ObjectId, Preference, Profile};

/// One round of the algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TtcRound {
    /// agents still in the market at the start of the round
    pub remaining: Vec<usize>,
    /// `(agent, owner of its top remaining object)`
    pub edges: Vec<(usize, usize)>,
    /// the removed cycle, starting from its lowest-indexed agent
    pub cycle: Vec<usize>,
    /// objects handed out this round
    pub assigned: Vec<(usize, ObjectId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TtcTrace {
    pub rounds: Vec<TtcRound>,
}

/// The TTC assignment at `profile`, with agent `i` endowed with object `i`.
pub fn ttc(profile: &Profile) -> DeterministicAssignment {
    run(profile.prefs(), None)
}

/// Same as [`ttc`], also recording every round.
pub fn ttc_traced(profile: &Profile) -> (DeterministicAssignment, TtcTrace) {
    let mut trace = TtcTrace::default();
    let assignment = run(profile.prefs(), Some(&mut trace));
    (assignment, trace)
}

/// TTC under an arbitrary endowment: agent `i` initially owns `endowment[i]`.
///
/// Objects are renamed so that the endowment becomes the identity, the rule
/// runs there, and the result is mapped back.
pub fn ttc_with_endowment(
    profile: &Profile,
    endowment: &DeterministicAssignment,
) -> Result<DeterministicAssignment> {
    let n = profile.n();
    if endowment.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: endowment.n() });
    }
    // new name of object x = the agent who owns it
    let mut rename = vec![0; n];
    for i in 0..n {
        rename[endowment.object_of(i).0] = i;
    }
    let relabeled = profile
        .prefs()
        .iter()
        .map(|p| Preference::new(p.ranking().iter().map(|x| ObjectId(rename[x.0])).collect()))
        .collect::<Result<Vec<_>>>()?;
    let inner = ttc(&Profile::new(relabeled)?);
    DeterministicAssignment::new(
        inner.as_slice().iter().map(|x| endowment.object_of(x.0)).collect(),
    )
}

fn run(prefs: &[Preference], mut trace: Option<&mut TtcTrace>) -> DeterministicAssignment {
    let n = prefs.len();
    let mut available = vec![true; n];
    let mut assign = vec![ObjectId(usize::MAX); n];
    let mut points_to = vec![0usize; n];
    let mut left = n;

    while left > 0 {
        for i in (0..n).filter(|&i| available[i]) {
            // owner of object j is agent j
            points_to[i] = prefs[i].top_among(&available).expect("an object remains").0;
        }
        // Lowest agent that returns to itself within `left` steps is on a cycle.
        let start = (0..n)
            .filter(|&i| available[i])
            .find(|&i| {
                let mut a = points_to[i];
                for _ in 0..left {
                    if a == i {
                        return true;
                    }
                    a = points_to[a];
                }
                false
            })
            .expect("a functional graph on a finite set has a cycle");

        let mut cycle = vec![start];
        let mut a = points_to[start];
        while a != start {
            cycle.push(a);
            a = points_to[a];
        }

        if let Some(t) = trace.as_deref_mut() {
            let remaining: Vec<usize> = (0..n).filter(|&i| available[i]).collect();
            let edges = remaining.iter().map(|&i| (i, points_to[i])).collect();
            let assigned = cycle.iter().map(|&i| (i, ObjectId(points_to[i]))).collect();
            t.rounds.push(TtcRound { remaining, edges, cycle: cycle.clone(), assigned });
        }

        for &i in &cycle {
            assign[i] = ObjectId(points_to[i]);
        }
        for &i in &cycle {
            available[i] = false;
        }
        left -= cycle.len();
    }
    DeterministicAssignment::new(assign).expect("TTC output is a permutation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefs::{enumerate_profiles, Domain};

    fn profile(rows: &[&[usize]]) -> Profile {
        Profile::new(rows.iter().map(|r| Preference::from_indices(r).unwrap()).collect()).unwrap()
    }

    // a=0, b=1, c=2, d=3
    fn example2_profile() -> Profile {
        profile(&[&[2, 0, 1, 3], &[0, 2, 3, 1], &[0, 1, 2, 3], &[2, 3, 0, 1]])
    }

    #[test]
    fn own_top_everywhere_gives_identity() {
        let p = profile(&[&[0, 1, 2], &[1, 0, 2], &[2, 1, 0]]);
        assert_eq!(ttc(&p), DeterministicAssignment::identity(3));
    }

    #[test]
    fn example2_under_other_endowments() {
        let c = DeterministicAssignment::from_indices(&[0, 3, 1, 2]).unwrap();
        let d = DeterministicAssignment::from_indices(&[1, 2, 0, 3]).unwrap();
        let e_adbc = DeterministicAssignment::from_indices(&[0, 3, 1, 2]).unwrap();
        let e_bcad = DeterministicAssignment::from_indices(&[1, 2, 0, 3]).unwrap();
        assert_eq!(ttc_with_endowment(&example2_profile(), &e_adbc).unwrap(), c);
        assert_eq!(ttc_with_endowment(&example2_profile(), &e_bcad).unwrap(), d);
    }

    #[test]
    fn example2_identity_endowment_hand_trace() {
        // Round 1: 0->2, 1->0, 2->0, 3->2; cycle (0 2): 0 gets c, 2 gets a.
        // Round 2: 1 and 3 both point at 3 (object d); 3 keeps d.
        // Round 3: 1 keeps b.
        let (assignment, trace) = ttc_traced(&example2_profile());
        assert_eq!(assignment.to_indices(), vec![2, 1, 0, 3]);
        let cycles: Vec<_> = trace.rounds.iter().map(|r| r.cycle.clone()).collect();
        assert_eq!(cycles, vec![vec![0, 2], vec![3], vec![1]]);
        assert_eq!(trace.rounds[0].edges, vec![(0, 2), (1, 0), (2, 0), (3, 2)]);
        assert_eq!(trace.rounds[1].edges, vec![(1, 3), (3, 3)]);
    }

    #[test]
    fn two_agents() {
        // both rank x1 first: agent 1 keeps x1
        let p = profile(&[&[1, 0], &[1, 0]]);
        assert_eq!(ttc(&p), DeterministicAssignment::identity(2));
    }

    #[test]
    fn example1_cycle_profile_gives_identity() {
        for n in 3..=6 {
            let rows: Vec<Vec<usize>> =
                (0..n).map(|i| (0..n).map(|k| (i + k) % n).collect()).collect();
            let refs: Vec<&[usize]> = rows.iter().map(Vec::as_slice).collect();
            assert_eq!(ttc(&profile(&refs)), DeterministicAssignment::identity(n));
        }
    }

    #[test]
    fn rounds_shrink_and_outcome_is_individually_rational() {
        for n in 1..=4 {
            let d = Domain::unrestricted(n);
            for p in enumerate_profiles(&d, n).unwrap() {
                let (a, trace) = ttc_traced(&p);
                for w in trace.rounds.windows(2) {
                    assert!(w[1].remaining.len() < w[0].remaining.len());
                }
                for i in 0..n {
                    assert!(p.pref(i).weakly_prefers(a.object_of(i), ObjectId(i)));
                }
            }
        }
    }

    #[test]
    fn endowment_size_mismatch() {
        assert!(ttc_with_endowment(&example2_profile(), &DeterministicAssignment::identity(3)).is_err());
    }
}
