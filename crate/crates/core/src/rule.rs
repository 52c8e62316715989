//! Assignment rules: maps from profiles to probabilistic assignments.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::{BistochasticMatrix, DeterministicAssignment};
use crate::prefs::{Domain, ObjectId, Preference, Profile};
use crate::rational::Rational;
use crate::ttc::ttc;

pub trait AssignmentRule: Sync {
    fn n(&self) -> usize;

    fn name(&self) -> String;

    fn outcome(&self, profile: &Profile) -> Result<BistochasticMatrix>;

    /// Probability that `agent` receives `object` at `profile`.
    fn probability(&self, profile: &Profile, agent: usize, object: ObjectId) -> Result<Rational> {
        Ok(self.outcome(profile)?.get(agent, object.0).clone())
    }

    /// `agent`'s lottery at `profile`.
    fn lottery(&self, profile: &Profile, agent: usize) -> Result<Vec<Rational>> {
        Ok(self.outcome(profile)?.row(agent).to_vec())
    }
}

/// TTC with the identity endowment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TtcRule {
    n: usize,
}

impl TtcRule {
    pub fn new(n: usize) -> Self {
        TtcRule { n }
    }
}

/// TTC as a rule on `domain`'s profiles.
pub fn ttc_rule(domain: &Domain) -> TtcRule {
    TtcRule::new(domain.n())
}

impl AssignmentRule for TtcRule {
    fn n(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        "ttc".to_string()
    }

    fn outcome(&self, profile: &Profile) -> Result<BistochasticMatrix> {
        check_size(self.n, profile)?;
        Ok(ttc(profile).to_matrix())
    }

    fn probability(&self, profile: &Profile, agent: usize, object: ObjectId) -> Result<Rational> {
        check_size(self.n, profile)?;
        Ok(if ttc(profile).object_of(agent) == object {
            Rational::one()
        } else {
            Rational::zero()
        })
    }

    fn lottery(&self, profile: &Profile, agent: usize) -> Result<Vec<Rational>> {
        check_size(self.n, profile)?;
        let x = ttc(profile).object_of(agent);
        Ok((0..self.n)
            .map(|j| if j == x.0 { Rational::one() } else { Rational::zero() })
            .collect())
    }
}

/// The same matrix at every profile.
#[derive(Debug, Clone)]
pub struct ConstantRule {
    matrix: BistochasticMatrix,
}

impl ConstantRule {
    pub fn new(matrix: BistochasticMatrix) -> Self {
        ConstantRule { matrix }
    }
}

impl AssignmentRule for ConstantRule {
    fn n(&self) -> usize {
        self.matrix.n()
    }

    fn name(&self) -> String {
        "constant".to_string()
    }

    fn outcome(&self, profile: &Profile) -> Result<BistochasticMatrix> {
        check_size(self.matrix.n(), profile)?;
        Ok(self.matrix.clone())
    }
}

/// A rule given as a full table over a domain's profiles, in enumeration order.
#[derive(Debug, Clone)]
pub struct TableRule {
    name: String,
    domain: Domain,
    index: HashMap<Preference, usize>,
    outcomes: Vec<BistochasticMatrix>,
}

impl TableRule {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        outcomes: Vec<BistochasticMatrix>,
    ) -> Result<Self> {
        let expected = domain.profile_count().ok_or(Error::Input("domain too large".into()))?;
        if outcomes.len() as u64 != expected {
            return Err(Error::SizeMismatch { expected: expected as usize, found: outcomes.len() });
        }
        if let Some(m) = outcomes.iter().find(|m| m.n() != domain.n()) {
            return Err(Error::SizeMismatch { expected: domain.n(), found: m.n() });
        }
        let index = domain.prefs().iter().enumerate().map(|(k, p)| (p.clone(), k)).collect();
        Ok(TableRule { name: name.into(), domain, index, outcomes })
    }

    /// A deterministic rule: one permutation per profile.
    pub fn deterministic(
        name: impl Into<String>,
        domain: Domain,
        perms: &[DeterministicAssignment],
    ) -> Result<Self> {
        Self::new(name, domain, perms.iter().map(DeterministicAssignment::to_matrix).collect())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn outcomes(&self) -> &[BistochasticMatrix] {
        &self.outcomes
    }

    fn slot(&self, profile: &Profile) -> Result<usize> {
        check_size(self.domain.n(), profile)?;
        let k = self.domain.len();
        profile.prefs().iter().try_fold(0usize, |acc, p| {
            Ok(acc * k + *self.index.get(p).ok_or(Error::OutsideDomain)?)
        })
    }
}

impl AssignmentRule for TableRule {
    fn n(&self) -> usize {
        self.domain.n()
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn outcome(&self, profile: &Profile) -> Result<BistochasticMatrix> {
        Ok(self.outcomes[self.slot(profile)?].clone())
    }

    fn probability(&self, profile: &Profile, agent: usize, object: ObjectId) -> Result<Rational> {
        Ok(self.outcomes[self.slot(profile)?].get(agent, object.0).clone())
    }

    fn lottery(&self, profile: &Profile, agent: usize) -> Result<Vec<Rational>> {
        Ok(self.outcomes[self.slot(profile)?].row(agent).to_vec())
    }
}

fn check_size(n: usize, profile: &Profile) -> Result<()> {
    if profile.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: profile.n() });
    }
    Ok(())
}
