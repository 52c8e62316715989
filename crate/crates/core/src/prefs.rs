//! Strict preferences over objects, profiles and preference domains.
//!
//! Objects and agents share the index space `0..n`, and agent `i` is always
//! endowed with object `i`. Inputs that come with some other endowment are
//! relabeled at the edge (see [`crate::io`]) so that everything in here can
//! assume the identity.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// An object, identified by its dense index. Object `i` is agent `i`'s endowment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ObjectId(pub usize);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A strict linear order over `n` objects, most preferred first.
///
/// Cloning is a reference-count bump; profiles copy preferences freely.
#[derive(Clone)]
pub struct Preference(Arc<Order>);

struct Order {
    ranking: Vec<ObjectId>,
    // position[x] = rank of object x (0 = top)
    position: Vec<usize>,
}

impl PartialEq for Preference {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.ranking == other.0.ranking
    }
}

impl Eq for Preference {}

impl Hash for Preference {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.ranking.hash(state);
    }
}

impl Preference {
    pub fn new(ranking: Vec<ObjectId>) -> Result<Self> {
        let n = ranking.len();
        let mut position = vec![usize::MAX; n];
        for (rank, x) in ranking.iter().enumerate() {
            if x.0 >= n {
                return Err(Error::InvalidPreference(format!(
                    "object index {} out of range for {n} objects",
                    x.0
                )));
            }
            if position[x.0] != usize::MAX {
                return Err(Error::InvalidPreference(format!("object {x} listed twice")));
            }
            position[x.0] = rank;
        }
        Ok(Preference(Arc::new(Order { ranking, position })))
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().copied().map(ObjectId).collect())
    }

    pub fn n(&self) -> usize {
        self.0.ranking.len()
    }

    pub fn ranking(&self) -> &[ObjectId] {
        &self.0.ranking
    }

    pub fn top(&self) -> ObjectId {
        self.0.ranking[0]
    }

    /// Rank of `x`, 0 for the most preferred object.
    pub fn rank_of(&self, x: ObjectId) -> usize {
        self.0.position[x.0]
    }

    /// `x` is at least as good as `y`.
    pub fn weakly_prefers(&self, x: ObjectId, y: ObjectId) -> bool {
        self.0.position[x.0] <= self.0.position[y.0]
    }

    pub fn strictly_prefers(&self, x: ObjectId, y: ObjectId) -> bool {
        self.0.position[x.0] < self.0.position[y.0]
    }

    /// Objects weakly preferred to `x`, best first. Always ends with `x` itself.
    pub fn upper_contour(&self, x: ObjectId) -> &[ObjectId] {
        &self.0.ranking[..=self.0.position[x.0]]
    }

    /// Most preferred object among those with `available[x] == true`.
    pub fn top_among(&self, available: &[bool]) -> Option<ObjectId> {
        self.0.ranking.iter().copied().find(|x| available[x.0])
    }
}

impl fmt::Display for Preference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, x) in self.0.ranking.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Preference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Preference({self})")
    }
}

impl Serialize for Preference {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.ranking.serialize(serializer)
    }
}

/// One preference per agent; agent `i` reports `prefs[i]`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Profile {
    prefs: Vec<Preference>,
}

impl Profile {
    /// Square profiles only: `n` agents with preferences over `n` objects.
    pub fn new(prefs: Vec<Preference>) -> Result<Self> {
        let n = prefs.len();
        if let Some(p) = prefs.iter().find(|p| p.n() != n) {
            return Err(Error::SizeMismatch { expected: n, found: p.n() });
        }
        Ok(Profile { prefs })
    }

    pub fn n(&self) -> usize {
        self.prefs.len()
    }

    pub fn prefs(&self) -> &[Preference] {
        &self.prefs
    }

    pub fn pref(&self, agent: usize) -> &Preference {
        &self.prefs[agent]
    }

    /// The profile with agent `agent`'s report replaced.
    pub fn with_report(&self, agent: usize, report: Preference) -> Profile {
        let mut prefs = self.prefs.clone();
        prefs[agent] = report;
        Profile { prefs }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.prefs.iter().map(|p| p.to_string())).finish()
    }
}

/// A finite set of admissible preferences over `n` objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    n: usize,
    prefs: Vec<Preference>,
}

impl Domain {
    pub fn new(n: usize, prefs: Vec<Preference>) -> Result<Self> {
        if prefs.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut seen = HashSet::with_capacity(prefs.len());
        for p in &prefs {
            if p.n() != n {
                return Err(Error::SizeMismatch { expected: n, found: p.n() });
            }
            if !seen.insert(p) {
                return Err(Error::DuplicatePreference(p.to_string()));
            }
        }
        Ok(Domain { n, prefs })
    }

    /// All `n!` preferences, in lexicographic order of their rankings.
    pub fn unrestricted(n: usize) -> Self {
        let prefs = permutations(n)
            .into_iter()
            .map(|r| Preference::from_indices(&r).expect("permutation"))
            .collect();
        Domain { n, prefs }
    }

    /// One preference per ordered pair `(a, b)`: `a`, `b`, then the rest ascending.
    pub fn minimal_fpt(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObjects { what: "minimal FPT domain", min: 2, n });
        }
        let mut prefs = Vec::with_capacity(n * (n - 1));
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                prefs.push(with_head(n, &[a, b]));
            }
        }
        Domain::new(n, prefs)
    }

    /// One preference per ordered triple `(a, b, c)`: the triple, then the rest ascending.
    pub fn minimal_ftt(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooFewObjects { what: "minimal FTT domain", min: 3, n });
        }
        let mut prefs = Vec::with_capacity(n * (n - 1) * (n - 2));
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                for c in (0..n).filter(|&c| c != a && c != b) {
                    prefs.push(with_head(n, &[a, b, c]));
                }
            }
        }
        Domain::new(n, prefs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.prefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefs.is_empty()
    }

    pub fn prefs(&self) -> &[Preference] {
        &self.prefs
    }

    pub fn index_of(&self, p: &Preference) -> Option<usize> {
        self.prefs.iter().position(|q| q == p)
    }

    pub fn contains(&self, p: &Preference) -> bool {
        self.index_of(p).is_some()
    }

    /// First ordered pair `(a, b)` that no preference ranks top-two, if any.
    pub fn missing_pair(&self) -> Option<(ObjectId, ObjectId)> {
        let n = self.n;
        let mut seen = vec![false; n * n];
        for p in self.prefs.iter().filter(|p| p.n() >= 2) {
            let r = p.ranking();
            seen[r[0].0 * n + r[1].0] = true;
        }
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .find(|&(a, b)| a != b && !seen[a * n + b])
            .map(|(a, b)| (ObjectId(a), ObjectId(b)))
    }

    /// First ordered triple that no preference ranks top-three, if any.
    pub fn missing_triple(&self) -> Result<Option<(ObjectId, ObjectId, ObjectId)>> {
        let n = self.n;
        if n < 3 {
            return Err(Error::FttUndefined);
        }
        let mut seen = vec![false; n * n * n];
        for p in &self.prefs {
            let r = p.ranking();
            seen[(r[0].0 * n + r[1].0) * n + r[2].0] = true;
        }
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                for c in (0..n).filter(|&c| c != a && c != b) {
                    if !seen[(a * n + b) * n + c] {
                        return Ok(Some((ObjectId(a), ObjectId(b), ObjectId(c))));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Free Pair at the Top: every ordered pair of distinct objects heads some preference.
    pub fn is_fpt(&self) -> bool {
        self.missing_pair().is_none()
    }

    /// Free Triple at the Top. Undefined (an error) below three objects.
    pub fn is_ftt(&self) -> Result<bool> {
        Ok(self.missing_triple()?.is_none())
    }

    /// Number of profiles `|D|^n`, or `None` on overflow.
    pub fn profile_count(&self) -> Option<u64> {
        (self.prefs.len() as u64).checked_pow(self.n as u32)
    }

    /// The profile at position `index` of the lexicographic enumeration.
    pub fn profile_at(&self, mut index: u64) -> Profile {
        let k = self.prefs.len() as u64;
        let mut prefs = vec![self.prefs[0].clone(); self.n];
        for slot in prefs.iter_mut().rev() {
            *slot = self.prefs[(index % k) as usize].clone();
            index /= k;
        }
        Profile { prefs }
    }

    /// Position of a profile in the lexicographic enumeration.
    pub fn profile_index(&self, profile: &Profile) -> Option<u64> {
        if profile.n() != self.n {
            return None;
        }
        let k = self.prefs.len() as u64;
        profile
            .prefs()
            .iter()
            .try_fold(0u64, |acc, p| Some(acc * k + self.index_of(p)? as u64))
    }
}

fn with_head(n: usize, head: &[usize]) -> Preference {
    let mut ranking: Vec<usize> = head.to_vec();
    ranking.extend((0..n).filter(|x| !head.contains(x)));
    Preference::from_indices(&ranking).expect("head plus ascending tail is a permutation")
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next_permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// Cached [`permutations`] for small `n`; computed on demand above that.
pub(crate) fn permutation_table(n: usize) -> std::borrow::Cow<'static, [Vec<usize>]> {
    use std::sync::OnceLock;
    static TABLES: [OnceLock<Vec<Vec<usize>>>; 9] = [const { OnceLock::new() }; 9];
    match TABLES.get(n) {
        Some(cell) => std::borrow::Cow::Borrowed(cell.get_or_init(|| permutations(n))),
        None => std::borrow::Cow::Owned(permutations(n)),
    }
}

/// Iterator over all `|D|^n` profiles, agent 0's preference index most significant.
pub struct Profiles<'a> {
    domain: &'a Domain,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for Profiles<'_> {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        if self.done {
            return None;
        }
        let prefs = self.digits.iter().map(|&d| self.domain.prefs[d].clone()).collect();
        let k = self.domain.prefs.len();
        self.done = true;
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < k {
                self.done = false;
                break;
            }
            *d = 0;
        }
        Some(Profile { prefs })
    }
}

/// Enumerates every profile of `n_agents` reports drawn from `domain`.
pub fn enumerate_profiles(domain: &Domain, n_agents: usize) -> Result<Profiles<'_>> {
    if n_agents != domain.n {
        return Err(Error::SizeMismatch { expected: domain.n, found: n_agents });
    }
    Ok(Profiles { domain, digits: vec![0; n_agents], done: n_agents == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pref(xs: &[usize]) -> Preference {
        Preference::from_indices(xs).unwrap()
    }

    #[test]
    fn upper_contour_examples() {
        let abc = pref(&[0, 1, 2]);
        assert_eq!(abc.upper_contour(ObjectId(0)), &[ObjectId(0)]);
        assert_eq!(abc.upper_contour(ObjectId(2)), &[ObjectId(0), ObjectId(1), ObjectId(2)]);
        // c,a,b,d with a=0,b=1,c=2,d=3; contour of b is {c,a,b}
        let p1 = pref(&[2, 0, 1, 3]);
        let mut uc: Vec<_> = p1.upper_contour(ObjectId(1)).to_vec();
        uc.sort();
        assert_eq!(uc, vec![ObjectId(0), ObjectId(1), ObjectId(2)]);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Preference::from_indices(&[0, 0, 1]).is_err());
        assert!(Preference::from_indices(&[0, 3, 1]).is_err());
        assert!(Profile::new(vec![pref(&[0, 1]), pref(&[0, 1, 2])]).is_err());
        assert!(matches!(Domain::new(2, vec![]), Err(Error::EmptyDomain)));
        assert!(matches!(
            Domain::new(2, vec![pref(&[0, 1]), pref(&[0, 1])]),
            Err(Error::DuplicatePreference(_))
        ));
    }

    #[test]
    fn fpt_examples() {
        assert!(Domain::unrestricted(3).is_fpt());
        let d = Domain::new(3, vec![pref(&[0, 1, 2]), pref(&[1, 2, 0])]).unwrap();
        assert!(!d.is_fpt());
        assert_eq!(d.missing_pair(), Some((ObjectId(0), ObjectId(2))));
        assert!(Domain::minimal_fpt(4).unwrap().is_fpt());
    }

    #[test]
    fn ftt_examples() {
        assert!(Domain::unrestricted(3).is_ftt().unwrap());
        assert!(!Domain::minimal_fpt(4).unwrap().is_ftt().unwrap());
        assert!(Domain::minimal_ftt(4).unwrap().is_ftt().unwrap());
        assert!(matches!(Domain::unrestricted(2).is_ftt(), Err(Error::FttUndefined)));
    }

    #[test]
    fn generator_sizes() {
        let d2 = Domain::minimal_fpt(2).unwrap();
        assert_eq!(d2.prefs(), &[pref(&[0, 1]), pref(&[1, 0])]);
        assert_eq!(Domain::minimal_fpt(3).unwrap().len(), 6);
        assert_eq!(Domain::minimal_fpt(4).unwrap().len(), 12);
        let ftt3 = Domain::minimal_ftt(3).unwrap();
        assert_eq!(ftt3.prefs(), Domain::unrestricted(3).prefs());
        assert_eq!(Domain::minimal_ftt(4).unwrap().len(), 24);
        assert_eq!(Domain::minimal_ftt(5).unwrap().len(), 60);
        assert!(Domain::minimal_fpt(1).is_err());
        assert!(Domain::minimal_ftt(2).is_err());
    }

    #[test]
    fn minimal_fpt_up_to_eight() {
        for n in 2..=8 {
            let d = Domain::minimal_fpt(n).unwrap();
            assert_eq!(d.len(), n * (n - 1));
            assert!(d.is_fpt());
            if n >= 3 {
                let ftt = Domain::minimal_ftt(n).unwrap();
                assert!(ftt.is_ftt().unwrap() && ftt.is_fpt());
            }
        }
    }

    #[test]
    fn profile_enumeration() {
        let d = Domain::minimal_fpt(2).unwrap();
        assert_eq!(enumerate_profiles(&d, 2).unwrap().count(), 4);
        let u3 = Domain::unrestricted(3);
        let all: Vec<_> = enumerate_profiles(&u3, 3).unwrap().collect();
        assert_eq!(all.len(), 216);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 216);
        for (i, p) in all.iter().enumerate() {
            assert_eq!(u3.profile_index(p), Some(i as u64));
            assert_eq!(&u3.profile_at(i as u64), p);
        }
        assert_eq!(Domain::minimal_ftt(4).unwrap().profile_count(), Some(331_776));
        assert!(enumerate_profiles(&u3, 2).is_err());
    }

    #[test]
    fn permutations_are_lexicographic() {
        let ps = permutations(3);
        assert_eq!(ps.len(), 6);
        assert!(ps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    fn arb_pref() -> impl Strategy<Value = Preference> {
        (1usize..7)
            .prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|r| Preference::from_indices(&r).unwrap())
    }

    proptest! {
        #[test]
        fn contour_is_antisymmetric_and_sized(p in arb_pref()) {
            let n = p.n();
            for k in 0..n {
                prop_assert_eq!(p.upper_contour(p.ranking()[k]).len(), k + 1);
            }
            for x in 0..n {
                for y in 0..n {
                    let (x, y) = (ObjectId(x), ObjectId(y));
                    let y_in_x = p.upper_contour(x).contains(&y);
                    let x_in_y = p.upper_contour(y).contains(&x);
                    if x == y {
                        prop_assert!(y_in_x && x_in_y);
                    } else {
                        prop_assert!(y_in_x ^ x_in_y);
                    }
                }
            }
        }

        #[test]
        fn ftt_implies_fpt(n in 3usize..5, mask in proptest::collection::vec(any::<bool>(), 24)) {
            let all = Domain::unrestricted(n);
            let prefs: Vec<_> = all.prefs().iter().zip(mask.iter().cycle())
                .filter(|(_, &keep)| keep).map(|(p, _)| p.clone()).collect();
            if let Ok(d) = Domain::new(n, prefs) {
                if d.is_ftt().unwrap() {
                    prop_assert!(d.is_fpt());
                }
            }
        }
    }
}
