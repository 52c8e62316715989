//! Desk-scale verification: axiom sweeps over every profile of a domain, the
//! exhaustive two-agent uniqueness check, and the two worked examples.
//!
//! Sweeps only cover the "TTC satisfies the bundle" direction. The converse
//! quantifies over all rules and is checked exhaustively only for `n = 2`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::axioms::{
    self, check_sd_pair_efficient, check_sd_pareto_efficient, manipulation_at, pair_dominator,
    witness_is_valid, Axiom, Manipulability, Witness,
};
use crate::error::{Error, Result};
use crate::limits;
use crate::matrix::{sd_compare, BistochasticMatrix, Decomposition, DeterministicAssignment};
use crate::prefs::{Domain, Preference, Profile};
use crate::rational::Rational;
use crate::rule::{AssignmentRule, TableRule, TtcRule};
use crate::ttc::{ttc, ttc_with_endowment};

/// Counterexamples kept in a report; the tallies still count every violation.
pub const COUNTEREXAMPLE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// SD-Pareto, SD-IR, SD-top-SP on FPT domains
    One,
    /// SD-pair, SD-IR, SD-top-SP on FTT domains
    Two,
    /// ex-post Pareto, ex-post IR, SD-top-SP on FPT domains
    Three,
    /// ex-post pair, ex-post IR, SD-top-SP on FTT domains
    Four,
}

impl Theorem {
    pub fn number(self) -> u8 {
        match self {
            Theorem::One => 1,
            Theorem::Two => 2,
            Theorem::Three => 3,
            Theorem::Four => 4,
        }
    }

    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Theorem::One),
            2 => Ok(Theorem::Two),
            3 => Ok(Theorem::Three),
            4 => Ok(Theorem::Four),
            _ => Err(Error::Input(format!("no theorem {k}; expected 1, 2, 3 or 4"))),
        }
    }

    pub fn axioms(self) -> [Axiom; 3] {
        match self {
            Theorem::One => [Axiom::SdPareto, Axiom::SdIr, Axiom::SdTopSp],
            Theorem::Two => [Axiom::SdPair, Axiom::SdIr, Axiom::SdTopSp],
            Theorem::Three => [Axiom::ExPostPareto, Axiom::ExPostIr, Axiom::SdTopSp],
            Theorem::Four => [Axiom::ExPostPair, Axiom::ExPostIr, Axiom::SdTopSp],
        }
    }

    /// Pair efficiency needs free triples; Pareto efficiency only free pairs.
    pub fn needs_ftt(self) -> bool {
        matches!(self, Theorem::Two | Theorem::Four)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = s
            .trim()
            .trim_start_matches("thm")
            .parse()
            .map_err(|_| Error::Input(format!("no theorem `{s}`")))?;
        Theorem::from_number(k)
    }
}

impl Serialize for Theorem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DomainSummary {
    pub n: usize,
    pub preferences: usize,
    pub fpt: bool,
    /// `None` below three objects
    pub ftt: Option<bool>,
}

impl DomainSummary {
    pub fn of(domain: &Domain) -> Self {
        DomainSummary {
            n: domain.n(),
            preferences: domain.len(),
            fpt: domain.is_fpt(),
            ftt: domain.is_ftt().ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomTally {
    pub axiom: Axiom,
    pub holds: bool,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub profile_index: u64,
    pub profile: Profile,
    pub axiom: Axiom,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub rule: String,
    pub domain: DomainSummary,
    pub profiles_checked: u64,
    pub verdicts: Vec<AxiomTally>,
    /// the first [`COUNTEREXAMPLE_LIMIT`] violations in enumeration order
    pub counterexamples: Vec<Counterexample>,
    /// Not serialized, so that reports are byte-for-byte reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

/// Domain condition for `theorem`, reporting the first missing pair or triple.
pub fn check_domain_condition(domain: &Domain, theorem: Theorem) -> Result<()> {
    if let Some((a, b)) = domain.missing_pair() {
        return Err(Error::NotFpt(a.to_string(), b.to_string()));
    }
    if theorem.needs_ftt() {
        if let Some((a, b, c)) = domain.missing_triple()? {
            return Err(Error::NotFtt(a.to_string(), b.to_string(), c.to_string()));
        }
    }
    Ok(())
}

/// Runs `theorem`'s axiom bundle on the TTC rule at every profile of `domain`.
pub fn verify_ttc_axioms(domain: &Domain, theorem: Theorem, jobs: usize) -> Result<TheoremReport> {
    check_domain_condition(domain, theorem)?;
    verify_rule_axioms(&TtcRule::new(domain.n()), domain, theorem, jobs)
}

/// Runs `theorem`'s axiom bundle on an arbitrary rule, without checking the
/// domain condition. Violations are reported, not raised.
pub fn verify_rule_axioms<R: AssignmentRule + ?Sized>(
    rule: &R,
    domain: &Domain,
    theorem: Theorem,
    jobs: usize,
) -> Result<TheoremReport> {
    let n = domain.n();
    if rule.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: rule.n() });
    }
    let cap = limits::sweep_cap();
    if n > cap {
        return Err(Error::SizeCap { what: "profile sweeps", n, cap });
    }
    let total = domain.profile_count().ok_or(Error::Input("too many profiles".into()))?;
    let start = Instant::now();
    let bundle = theorem.axioms();

    let jobs = (jobs.max(1) as u64).min(total.max(1));
    let chunk = total.div_ceil(jobs);
    let ranges: Vec<(u64, u64)> =
        (0..jobs).map(|k| (k * chunk, ((k + 1) * chunk).min(total))).collect();
    let partials: Vec<Result<Partial>> = if jobs == 1 {
        vec![sweep(rule, domain, &bundle, 0, total)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = ranges
                .iter()
                .map(|&(lo, hi)| s.spawn(move || sweep(rule, domain, &bundle, lo, hi)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
        })
    };

    let mut merged = Partial::new();
    for p in partials {
        merged.absorb(p?);
    }
    Ok(TheoremReport {
        theorem,
        rule: rule.name(),
        domain: DomainSummary::of(domain),
        profiles_checked: total,
        verdicts: bundle
            .iter()
            .zip(merged.violations)
            .map(|(&axiom, violations)| AxiomTally { axiom, holds: violations == 0, violations })
            .collect(),
        counterexamples: merged.counterexamples,
        wall_time: start.elapsed(),
    })
}

struct Partial {
    violations: [u64; 3],
    counterexamples: Vec<Counterexample>,
}

impl Partial {
    fn new() -> Self {
        Partial { violations: [0; 3], counterexamples: Vec::new() }
    }

    fn record(&mut self, slot: usize, cx: Counterexample) {
        self.violations[slot] += 1;
        if self.counterexamples.len() < COUNTEREXAMPLE_LIMIT {
            self.counterexamples.push(cx);
        }
    }

    fn absorb(&mut self, other: Partial) {
        for (a, b) in self.violations.iter_mut().zip(other.violations) {
            *a += b;
        }
        let room = COUNTEREXAMPLE_LIMIT - self.counterexamples.len();
        self.counterexamples.extend(other.counterexamples.into_iter().take(room));
    }
}

fn sweep<R: AssignmentRule + ?Sized>(
    rule: &R,
    domain: &Domain,
    bundle: &[Axiom; 3],
    lo: u64,
    hi: u64,
) -> Result<Partial> {
    let mut out = Partial::new();
    for idx in lo..hi {
        let profile = domain.profile_at(idx);
        let outcome = rule.outcome(&profile)?;
        for (slot, &axiom) in bundle.iter().enumerate() {
            let witness = if axiom.is_rule_level() {
                let kind = if axiom == Axiom::SdTopSp {
                    Manipulability::Top
                } else {
                    Manipulability::Full
                };
                let mut found = None;
                for agent in 0..domain.n() {
                    if let Some(m) = manipulation_at(rule, domain, &profile, agent, kind)? {
                        found = Some(Witness::Manipulation(m));
                        break;
                    }
                }
                found.map(Some)
            } else {
                let v = axiom.check(&outcome, &profile)?;
                (!v.holds).then_some(v.witness)
            };
            if let Some(witness) = witness {
                let profile = profile.clone();
                out.record(slot, Counterexample { profile_index: idx, profile, axiom, witness });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- uniqueness

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub domain: DomainSummary,
    pub profiles: u64,
    pub rules_checked: u64,
    /// surviving rules as one assignment per profile, in enumeration order
    pub survivors: Vec<Vec<DeterministicAssignment>>,
    pub ttc: Vec<DeterministicAssignment>,
    /// exactly one survivor, and it is TTC
    pub unique_survivor_is_ttc: bool,
}

/// Every deterministic rule on a two-object domain, filtered by
/// SD-top-strategy-proofness, individual rationality and pair efficiency.
pub fn uniqueness_n2(domain: &Domain) -> Result<UniquenessReport> {
    if domain.n() != 2 {
        return Err(Error::Input(format!(
            "exhaustive uniqueness is only run for n = 2, got n = {}",
            domain.n()
        )));
    }
    let k = domain.profile_count().expect("at most 4 profiles") as usize;
    let id = DeterministicAssignment::identity(2);
    let swap = DeterministicAssignment::from_indices(&[1, 0]).expect("permutation");
    let profiles: Vec<Profile> = (0..k as u64).map(|i| domain.profile_at(i)).collect();
    let ttc_table: Vec<_> = profiles.iter().map(ttc).collect();

    let mut survivors = Vec::new();
    for mask in 0u64..1 << k {
        let table: Vec<_> = (0..k)
            .map(|p| if mask >> p & 1 == 1 { swap.clone() } else { id.clone() })
            .collect();
        let rule = TableRule::deterministic(format!("rule-{mask}"), domain.clone(), &table)?;
        let mut ok = axioms::check_sd_top_sp(&rule, domain)?.holds;
        for (profile, perm) in profiles.iter().zip(&table) {
            if !ok {
                break;
            }
            let m = perm.to_matrix();
            ok = axioms::check_sd_ir(&m, profile)?.holds
                && check_sd_pair_efficient(&m, profile)?.holds;
        }
        if ok {
            survivors.push(table);
        }
    }
    let unique_survivor_is_ttc = survivors.len() == 1 && survivors[0] == ttc_table;
    Ok(UniquenessReport {
        domain: DomainSummary::of(domain),
        profiles: k as u64,
        rules_checked: 1 << k,
        survivors,
        ttc: ttc_table,
        unique_survivor_is_ttc,
    })
}

// ------------------------------------------------------------------ example 1

/// Agent `i` ranks `x_i, x_{i+1}, ...` cyclically.
pub fn example1_profile(n: usize) -> Profile {
    let prefs = (0..n)
        .map(|i| {
            Preference::from_indices(&(0..n).map(|k| (i + k) % n).collect::<Vec<_>>())
                .expect("rotation")
        })
        .collect();
    Profile::new(prefs).expect("square")
}

/// `b` on `(i, x_i)` and `1 - b` on `(i, x_{i+1})`.
pub fn example1_matrix(n: usize, b: &Rational) -> Result<BistochasticMatrix> {
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] += b;
        row[(i + 1) % n] += Rational::one() - b;
    }
    BistochasticMatrix::new(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1Case {
    pub b: Rational,
    pub matrix: BistochasticMatrix,
    pub sd_pair_efficient: bool,
    pub sd_pareto_efficient: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominated_by: Option<BistochasticMatrix>,
    /// Pareto verdict is "holds iff b = 1", and any dominating witness is the identity
    pub as_expected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1Report {
    pub n: usize,
    pub profile: Profile,
    pub cases: Vec<Example1Case>,
    pub all_as_expected: bool,
}

pub fn repro_example1(n: usize, bs: &[Rational]) -> Result<Example1Report> {
    if n < 3 {
        return Err(Error::TooFewObjects { what: "the cyclic example", min: 3, n });
    }
    let profile = example1_profile(n);
    let identity = BistochasticMatrix::identity(n);
    let mut cases = Vec::with_capacity(bs.len());
    for b in bs {
        if b.is_negative() || *b > Rational::one() {
            return Err(Error::Input(format!("b = {b} is outside [0, 1]")));
        }
        let matrix = example1_matrix(n, b)?;
        let pair = check_sd_pair_efficient(&matrix, &profile)?;
        let pareto = check_sd_pareto_efficient(&matrix, &profile)?;
        let dominated_by = match pareto.witness {
            Some(Witness::Dominating { matrix }) => Some(matrix),
            _ => None,
        };
        let as_expected = pair.holds
            && pareto.holds == b.is_one()
            && dominated_by.as_ref().is_none_or(|w| *w == identity);
        cases.push(Example1Case {
            b: b.clone(),
            matrix,
            sd_pair_efficient: pair.holds,
            sd_pareto_efficient: pareto.holds,
            dominated_by,
            as_expected,
        });
    }
    let all_as_expected = cases.iter().all(|c| c.as_expected);
    Ok(Example1Report { n, profile, cases, all_as_expected })
}

// ------------------------------------------------------------------ example 2

/// Object names of the four-object example, `a..d` = `x0..x3`.
pub const EXAMPLE2_OBJECTS: [&str; 4] = ["a", "b", "c", "d"];

/// `c a b d / a c d b / a b c d / c d a b`.
pub fn example2_profile() -> Profile {
    let rows: [[usize; 4]; 4] = [[2, 0, 1, 3], [0, 2, 3, 1], [0, 1, 2, 3], [2, 3, 0, 1]];
    Profile::new(rows.iter().map(|r| Preference::from_indices(r).expect("permutation")).collect())
        .expect("square")
}

fn halves(rows: [[u8; 4]; 4]) -> BistochasticMatrix {
    let half = Rational::new(1, 2);
    BistochasticMatrix::new(
        rows.iter()
            .map(|r| r.iter().map(|&v| if v == 1 { half.clone() } else { Rational::zero() }).collect())
            .collect(),
    )
    .expect("bi-stochastic")
}

pub fn example2_a() -> BistochasticMatrix {
    halves([[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 0, 0], [0, 0, 1, 1]])
}

pub fn example2_b() -> BistochasticMatrix {
    halves([[0, 1, 1, 0], [1, 0, 0, 1], [1, 1, 0, 0], [0, 0, 1, 1]])
}

pub fn example2_c() -> DeterministicAssignment {
    DeterministicAssignment::from_indices(&[0, 3, 1, 2]).expect("permutation")
}

pub fn example2_d() -> DeterministicAssignment {
    DeterministicAssignment::from_indices(&[1, 2, 0, 3]).expect("permutation")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2Assertions {
    /// B SD-Pareto dominates A, and the checker rejects A with a valid witness
    pub b_dominates_a: bool,
    /// A decomposes over Pareto-efficient permutations
    pub a_expost_pareto: bool,
    /// TTC at endowments (a,d,b,c) and (b,c,a,d) gives C and D
    pub ttc_gives_c_and_d: bool,
    /// agents 1 and 2 can both gain by trading within A
    pub a_not_pair_efficient_at_1_2: bool,
}

impl Example2Assertions {
    pub fn all(&self) -> bool {
        self.b_dominates_a
            && self.a_expost_pareto
            && self.ttc_gives_c_and_d
            && self.a_not_pair_efficient_at_1_2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2Report {
    pub objects: [&'static str; 4],
    pub profile: Profile,
    pub a: BistochasticMatrix,
    pub b: BistochasticMatrix,
    pub c: DeterministicAssignment,
    pub d: DeterministicAssignment,
    pub pareto_witness: Option<BistochasticMatrix>,
    pub decomposition: Option<Decomposition>,
    pub pair_witness: Option<BistochasticMatrix>,
    pub assertions: Example2Assertions,
}

pub fn repro_example2() -> Result<Example2Report> {
    let profile = example2_profile();
    let (a, b, c, d) = (example2_a(), example2_b(), example2_c(), example2_d());

    let b_dominates = {
        let mut strict = false;
        let mut weak = true;
        for i in 0..4 {
            let (w, s) = sd_compare(profile.pref(i), b.row(i), a.row(i));
            weak &= w;
            strict |= s;
        }
        weak && strict
    };
    let pareto = check_sd_pareto_efficient(&a, &profile)?;
    let pareto_ok = !pareto.holds && witness_is_valid(Axiom::SdPareto, &a, &profile, &pareto);
    let pareto_witness = match pareto.witness {
        Some(Witness::Dominating { matrix }) => Some(matrix),
        _ => None,
    };

    let expost = axioms::check_expost_pareto(&a, &profile)?;
    let expost_ok = expost.holds && witness_is_valid(Axiom::ExPostPareto, &a, &profile, &expost);
    let decomposition = match expost.witness {
        Some(Witness::Decomposition { decomposition }) => Some(decomposition),
        _ => None,
    };

    let e_adbc = DeterministicAssignment::from_indices(&[0, 3, 1, 2])?;
    let e_bcad = DeterministicAssignment::from_indices(&[1, 2, 0, 3])?;
    let ttc_ok = ttc_with_endowment(&profile, &e_adbc)? == c
        && ttc_with_endowment(&profile, &e_bcad)? == d;

    let pair_witness = pair_dominator(&a, &profile, 0, 1)?;

    Ok(Example2Report {
        objects: EXAMPLE2_OBJECTS,
        assertions: Example2Assertions {
            b_dominates_a: b_dominates && pareto_ok,
            a_expost_pareto: expost_ok,
            ttc_gives_c_and_d: ttc_ok,
            a_not_pair_efficient_at_1_2: pair_witness.is_some(),
        },
        profile,
        a,
        b,
        c,
        d,
        pareto_witness,
        decomposition,
        pair_witness,
    })
}
