//! Probabilistic assignments as exact bi-stochastic matrices.
//!
//! Rows are agents and columns are objects. A row is a lottery over objects,
//! compared under an agent's preference by first-order stochastic dominance:
//! one lottery weakly dominates another when it puts at least as much mass on
//! every upper contour set.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Solution};
use crate::prefs::{ObjectId, Preference};
use crate::rational::Rational;

/// A permutation: agent `i` receives object `assign[i]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicAssignment {
    assign: Vec<ObjectId>,
}

impl DeterministicAssignment {
    pub fn new(assign: Vec<ObjectId>) -> Result<Self> {
        let n = assign.len();
        let mut seen = vec![false; n];
        for x in &assign {
            if x.0 >= n || std::mem::replace(&mut seen[x.0], true) {
                return Err(Error::InvalidAssignment(format!(
                    "{:?} is not a permutation of 0..{n}",
                    assign.iter().map(|x| x.0).collect::<Vec<_>>()
                )));
            }
        }
        Ok(DeterministicAssignment { assign })
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().copied().map(ObjectId).collect())
    }

    pub fn identity(n: usize) -> Self {
        DeterministicAssignment { assign: (0..n).map(ObjectId).collect() }
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn object_of(&self, agent: usize) -> ObjectId {
        self.assign[agent]
    }

    pub fn as_slice(&self) -> &[ObjectId] {
        &self.assign
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.assign.iter().map(|x| x.0).collect()
    }

    pub fn to_matrix(&self) -> BistochasticMatrix {
        let n = self.n();
        let mut entries = vec![Rational::zero(); n * n];
        for (i, x) in self.assign.iter().enumerate() {
            entries[i * n + x.0] = Rational::one();
        }
        BistochasticMatrix { n, entries }
    }

    /// The agent holding object `x`.
    pub fn holder_of(&self, x: ObjectId) -> usize {
        self.assign.iter().position(|&y| y == x).expect("bijective")
    }
}

impl fmt::Debug for DeterministicAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_indices())
    }
}

impl Serialize for DeterministicAssignment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_indices().serialize(s)
    }
}

/// An `n × n` matrix of exact probabilities whose rows and columns each sum to one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BistochasticMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl BistochasticMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::SizeMismatch { expected: n, found: row.len() });
            }
            entries.extend(row);
        }
        Self::from_entries(n, entries)
    }

    pub fn from_entries(n: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::SizeMismatch { expected: n * n, found: entries.len() });
        }
        for (k, v) in entries.iter().enumerate() {
            if v.is_negative() || *v > Rational::one() {
                return Err(Error::NotBistochastic(format!(
                    "entry ({}, {}) = {v} is outside [0, 1]",
                    k / n,
                    k % n
                )));
            }
        }
        let m = BistochasticMatrix { n, entries };
        for i in 0..n {
            let s: Rational = m.row(i).iter().sum();
            if !s.is_one() {
                return Err(Error::NotBistochastic(format!("row {i} sums to {s}")));
            }
            let s: Rational = (0..n).map(|r| m.get(r, i)).sum();
            if !s.is_one() {
                return Err(Error::NotBistochastic(format!("column {i} sums to {s}")));
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        DeterministicAssignment::identity(n).to_matrix()
    }

    /// Every entry `1/n`.
    pub fn uniform(n: usize) -> Self {
        let v = Rational::new(1, n as i64);
        BistochasticMatrix { n, entries: vec![v; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, agent: usize, object: usize) -> &Rational {
        &self.entries[agent * self.n + object]
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.entries[agent * self.n..(agent + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.n.max(1)).take(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.rows().map(<[Rational]>::to_vec).collect()
    }

    /// Total probability agent `agent` receives some object in `set`.
    pub fn row_prob(&self, agent: usize, set: impl IntoIterator<Item = ObjectId>) -> Rational {
        let row = self.row(agent);
        set.into_iter().map(|x| &row[x.0]).sum()
    }

    /// The permutation this matrix encodes, if every entry is 0 or 1.
    pub fn as_permutation(&self) -> Option<DeterministicAssignment> {
        let mut assign = Vec::with_capacity(self.n);
        for row in self.rows() {
            let mut hit = None;
            for (j, v) in row.iter().enumerate() {
                if v.is_one() {
                    hit = Some(ObjectId(j));
                } else if !v.is_zero() {
                    return None;
                }
            }
            assign.push(hit?);
        }
        DeterministicAssignment::new(assign).ok()
    }

    /// Copy of `self` with the given rows replaced. Callers keep columns stochastic.
    pub(crate) fn with_rows_replaced(&self, replacements: &[(usize, Vec<Rational>)]) -> Self {
        let mut out = self.clone();
        for (i, row) in replacements {
            out.entries[i * self.n..(i + 1) * self.n].clone_from_slice(row);
        }
        out
    }
}

impl fmt::Debug for BistochasticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Serialize for BistochasticMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BistochasticMatrix", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("rows", &self.to_rows())?;
        st.end()
    }
}

fn check_distribution(n: usize, row: &[Rational], which: &str) -> Result<()> {
    if row.len() != n {
        return Err(Error::NotDistribution(format!(
            "{which} has {} entries for {n} objects",
            row.len()
        )));
    }
    if let Some(v) = row.iter().find(|v| v.is_negative()) {
        return Err(Error::NotDistribution(format!("{which} has negative mass {v}")));
    }
    let s: Rational = row.iter().sum();
    if !s.is_one() {
        return Err(Error::NotDistribution(format!("{which} sums to {s}")));
    }
    Ok(())
}

/// `cum[k]` is the mass `row` puts on the `k + 1` objects `p` ranks highest.
pub fn cumulative(p: &Preference, row: &[Rational]) -> Vec<Rational> {
    let mut acc = Rational::zero();
    p.ranking()
        .iter()
        .map(|x| {
            acc += &row[x.0];
            acc.clone()
        })
        .collect()
}

/// Compares two lotteries under `p` without validating them.
/// Returns `(weakly, strictly)`.
pub(crate) fn sd_compare(p: &Preference, lhs: &[Rational], rhs: &[Rational]) -> (bool, bool) {
    let mut l = Rational::zero();
    let mut r = Rational::zero();
    let mut strict = false;
    for x in p.ranking() {
        l += &lhs[x.0];
        r += &rhs[x.0];
        if l < r {
            return (false, false);
        }
        if l > r {
            strict = true;
        }
    }
    (true, strict)
}

/// `lhs` puts at least as much mass as `rhs` on every upper contour set of `p`.
pub fn sd_weakly_prefers(p: &Preference, lhs: &[Rational], rhs: &[Rational]) -> Result<bool> {
    check_distribution(p.n(), lhs, "left lottery")?;
    check_distribution(p.n(), rhs, "right lottery")?;
    Ok(sd_compare(p, lhs, rhs).0)
}

/// Weak dominance plus strictly more mass on some upper contour set.
pub fn sd_strictly_prefers(p: &Preference, lhs: &[Rational], rhs: &[Rational]) -> Result<bool> {
    check_distribution(p.n(), lhs, "left lottery")?;
    check_distribution(p.n(), rhs, "right lottery")?;
    let (weak, strict) = sd_compare(p, lhs, rhs);
    Ok(weak && strict)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionTerm {
    pub weight: Rational,
    pub perm: DeterministicAssignment,
}

/// A convex combination of permutation matrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
#[serde(transparent)]
pub struct Decomposition {
    pub terms: Vec<DecompositionTerm>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ weight · perm`, entrywise, as a flat row-major vector.
    pub fn recombine(&self, n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); n * n];
        for t in &self.terms {
            for (i, x) in t.perm.as_slice().iter().enumerate() {
                out[i * n + x.0] += &t.weight;
            }
        }
        out
    }

    /// Weights positive, summing to one, and recombining to `m` exactly.
    pub fn is_valid_for(&self, m: &BistochasticMatrix) -> bool {
        let n = m.n();
        self.terms.iter().all(|t| t.weight.is_positive() && t.perm.n() == n)
            && self.terms.iter().map(|t| &t.weight).sum::<Rational>().is_one()
            && self.recombine(n) == m.entries
    }
}

/// Perfect matching inside the positive support of `residual`, found with
/// Kuhn's augmenting paths: agents in index order, objects tried ascending.
fn support_matching(n: usize, residual: &[Rational]) -> Option<Vec<usize>> {
    fn augment(
        agent: usize,
        n: usize,
        residual: &[Rational],
        visited: &mut [bool],
        holder: &mut [Option<usize>],
    ) -> bool {
        for obj in 0..n {
            if visited[obj] || !residual[agent * n + obj].is_positive() {
                continue;
            }
            visited[obj] = true;
            let free = match holder[obj] {
                None => true,
                Some(other) => augment(other, n, residual, visited, holder),
            };
            if free {
                holder[obj] = Some(agent);
                return true;
            }
        }
        false
    }

    let mut holder = vec![None; n];
    for agent in 0..n {
        let mut visited = vec![false; n];
        if !augment(agent, n, residual, &mut visited, &mut holder) {
            return None;
        }
    }
    let mut assign = vec![0; n];
    for (obj, h) in holder.into_iter().enumerate() {
        assign[h.expect("perfect")] = obj;
    }
    Some(assign)
}

/// Birkhoff–von Neumann decomposition: repeatedly peel off a permutation in
/// the support, weighted by its smallest entry. Each step zeroes at least one
/// entry and drops to a lower-dimensional face, so at most `n² − 2n + 2`
/// terms come out.
pub fn birkhoff_decompose(m: &BistochasticMatrix) -> Decomposition {
    let n = m.n();
    let mut residual = m.entries.clone();
    let mut terms = Vec::new();
    while residual.iter().any(Rational::is_positive) {
        let assign = support_matching(n, &residual)
            .expect("a scaled bi-stochastic matrix has a perfect matching in its support");
        let weight = assign
            .iter()
            .enumerate()
            .map(|(i, &j)| residual[i * n + j].clone())
            .min()
            .expect("n >= 1");
        for (i, &j) in assign.iter().enumerate() {
            residual[i * n + j] -= &weight;
        }
        let perm = DeterministicAssignment::from_indices(&assign).expect("matching");
        terms.push(DecompositionTerm { weight, perm });
    }
    Decomposition { terms }
}

/// Certificate that `m` is outside the convex hull of a set of permutations:
/// `⟨W, P⟩ + offset ≤ 0` for every allowed `P` while `⟨W, m⟩ + offset > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatingHyperplane {
    pub weights: Vec<Vec<Rational>>,
    pub offset: Rational,
}

impl SeparatingHyperplane {
    fn value_at(&self, entry: impl Fn(usize, usize) -> Rational) -> Rational {
        let mut acc = self.offset.clone();
        for (i, row) in self.weights.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                if !w.is_zero() {
                    acc += w * entry(i, j);
                }
            }
        }
        acc
    }

    pub fn separates(&self, m: &BistochasticMatrix, allowed: &[DeterministicAssignment]) -> bool {
        let n = m.n();
        if self.weights.len() != n || self.weights.iter().any(|r| r.len() != n) {
            return false;
        }
        let on_perm = |p: &DeterministicAssignment| {
            let mut acc = self.offset.clone();
            for (i, x) in p.as_slice().iter().enumerate() {
                acc += &self.weights[i][x.0];
            }
            acc
        };
        allowed.iter().all(|p| p.n() == n && !on_perm(p).is_positive())
            && self.value_at(|i, j| m.get(i, j).clone()).is_positive()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ConstrainedDecomposition {
    Feasible { decomposition: Decomposition },
    Infeasible { certificate: SeparatingHyperplane },
}

/// Writes `m` as a convex combination of permutations drawn from `allowed`,
/// or proves that no such combination exists.
pub fn decompose_within(
    m: &BistochasticMatrix,
    allowed: &[DeterministicAssignment],
) -> Result<ConstrainedDecomposition> {
    let n = m.n();
    if let Some(p) = allowed.iter().find(|p| p.n() != n) {
        return Err(Error::SizeMismatch { expected: n, found: p.n() });
    }
    if allowed.is_empty() {
        return Ok(ConstrainedDecomposition::Infeasible {
            certificate: SeparatingHyperplane {
                weights: vec![vec![Rational::zero(); n]; n],
                offset: Rational::one(),
            },
        });
    }

    let k = allowed.len();
    let mut lp = LinearProgram::new(k);
    let mut cells: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n * n];
    for (v, p) in allowed.iter().enumerate() {
        for (i, x) in p.as_slice().iter().enumerate() {
            cells[i * n + x.0].push((v, Rational::one()));
        }
    }
    for (cell, terms) in cells.iter().enumerate() {
        lp.add_sparse(terms, Relation::Eq, m.entries[cell].clone())?;
    }
    lp.add_constraint(vec![Rational::one(); k], Relation::Eq, Rational::one())?;

    match lp.solve()? {
        Solution::Optimal { point, .. } => {
            let terms = point
                .into_iter()
                .zip(allowed)
                .filter(|(w, _)| w.is_positive())
                .map(|(weight, perm)| DecompositionTerm { weight, perm: perm.clone() })
                .collect();
            Ok(ConstrainedDecomposition::Feasible { decomposition: Decomposition { terms } })
        }
        Solution::Infeasible(cert) => {
            let y = cert.multipliers;
            let weights = y[..n * n].chunks(n).map(<[Rational]>::to_vec).collect();
            Ok(ConstrainedDecomposition::Infeasible {
                certificate: SeparatingHyperplane { weights, offset: y[n * n].clone() },
            })
        }
        Solution::Unbounded { .. } => unreachable!("zero objective is never unbounded"),
    }
}
