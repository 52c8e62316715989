//! JSON and text formats, and the relabeling that puts every endowment at the identity.
//!
//! Objects have arbitrary string names on the outside. A preference file
//! looks like
//!
//! ```json
//! { "objects": ["a", "b", "c", "d"],
//!   "prefs": ["c,a,b,d", ["a", "c", "d", "b"], "a,b,c,d", "c,d,a,b"] }
//! ```
//!
//! where each preference is either a comma-separated string or a list, and
//! entries are names or integer indices. Without `"objects"`, the names are
//! sorted (numerically if they all are numbers). Domains use the same
//! format; a profile is just a file with one preference per object.
//!
//! Internally object `i` is agent `i`'s endowment. With the default
//! endowment, internal order is the `"objects"` order. With an explicit
//! endowment `e`, object `e[i]` becomes internal object `i`; everything
//! written back out lists its `"objects"` in that internal order, so it reads
//! back the same way.
//!
//! Rationals are always strings such as `"1/2"`; JSON floats are rejected.

use std::collections::HashMap;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{BistochasticMatrix, Decomposition, DeterministicAssignment};
use crate::prefs::{Domain, ObjectId, Preference, Profile};
use crate::rational::Rational;

/// Object names, indexed by internal object id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Labels {
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (k, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Input("empty object name".into()));
            }
            if index.insert(name.clone(), k).is_some() {
                return Err(Error::Input(format!("object `{name}` listed twice")));
            }
        }
        Ok(Labels { names, index })
    }

    /// `"0"`, `"1"`, ...
    pub fn numeric(n: usize) -> Self {
        Labels::new((0..n).map(|k| k.to_string()).collect()).expect("distinct")
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: ObjectId) -> &str {
        &self.names[x.0]
    }

    pub fn id(&self, name: &str) -> Result<ObjectId> {
        self.index
            .get(name)
            .map(|&k| ObjectId(k))
            .ok_or_else(|| Error::Input(format!("unknown object `{name}`")))
    }

    /// Reordered so that agent `i`'s endowment `endowment[i]` comes `i`-th.
    pub fn with_endowment(&self, endowment: &[String]) -> Result<Labels> {
        if endowment.len() != self.n() {
            return Err(Error::SizeMismatch { expected: self.n(), found: endowment.len() });
        }
        for name in endowment {
            self.id(name)?;
        }
        Labels::new(endowment.to_vec())
    }
}

/// Splits `"a,d,b,c"` into names.
pub fn parse_name_list(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawItem {
    Index(usize),
    Name(String),
}

impl RawItem {
    fn name(&self) -> String {
        match self {
            RawItem::Index(k) => k.to_string(),
            RawItem::Name(s) => s.trim().to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPref {
    Text(String),
    List(Vec<RawItem>),
}

impl RawPref {
    fn names(&self) -> Vec<String> {
        match self {
            RawPref::Text(s) => parse_name_list(s),
            RawPref::List(items) => items.iter().map(RawItem::name).collect(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrefs {
    n: Option<usize>,
    objects: Option<Vec<String>>,
    /// accepted as a synonym for `objects`
    #[serde(default)]
    labels: Option<Vec<String>>,
    prefs: Vec<RawPref>,
}

/// Preferences read from a file, in their own names.
#[derive(Debug, Clone)]
pub struct PreferenceFile {
    /// object order as written (or inferred)
    pub objects: Labels,
    pub prefs: Vec<Vec<String>>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    // Syntax errors keep their line and column this way.
    let value: Value = serde_json::from_str(text)?;
    Ok(serde_json::from_value(value)?)
}

pub fn read_preference_file(text: &str) -> Result<PreferenceFile> {
    let raw: RawPrefs = parse_json(text)?;
    let prefs: Vec<Vec<String>> = raw.prefs.iter().map(RawPref::names).collect();
    let objects = match raw.objects.or(raw.labels) {
        Some(names) => Labels::new(names.into_iter().map(|s| s.trim().to_string()).collect())?,
        None => {
            let mut names: Vec<String> = prefs.iter().flatten().cloned().collect();
            names.sort();
            names.dedup();
            if names.iter().all(|s| s.parse::<u64>().is_ok()) {
                names.sort_by_key(|s| s.parse::<u64>().expect("numeric"));
            }
            Labels::new(names)?
        }
    };
    if let Some(n) = raw.n {
        if n != objects.n() {
            return Err(Error::SizeMismatch { expected: n, found: objects.n() });
        }
    }
    Ok(PreferenceFile { objects, prefs })
}

impl PreferenceFile {
    /// Internal labels: `"objects"` order, or the endowment order if given.
    pub fn labels(&self, endowment: Option<&[String]>) -> Result<Labels> {
        match endowment {
            Some(e) => self.objects.with_endowment(e),
            None => Ok(self.objects.clone()),
        }
    }

    fn preferences(&self, labels: &Labels) -> Result<Vec<Preference>> {
        self.prefs
            .iter()
            .map(|names| {
                if names.len() != labels.n() {
                    return Err(Error::InvalidPreference(format!(
                        "`{}` ranks {} objects, expected {}",
                        names.join(","),
                        names.len(),
                        labels.n()
                    )));
                }
                Preference::new(names.iter().map(|s| labels.id(s)).collect::<Result<_>>()?)
            })
            .collect()
    }

    pub fn profile(&self, labels: &Labels) -> Result<Profile> {
        Profile::new(self.preferences(labels)?)
    }

    pub fn domain(&self, labels: &Labels) -> Result<Domain> {
        Domain::new(labels.n(), self.preferences(labels)?)
    }
}

/// A profile file, relabeled for `endowment`.
pub fn read_profile(text: &str, endowment: Option<&[String]>) -> Result<(Labels, Profile)> {
    let file = read_preference_file(text)?;
    let labels = file.labels(endowment)?;
    let profile = file.profile(&labels)?;
    Ok((labels, profile))
}

/// A domain file, relabeled for `endowment`.
pub fn read_domain(text: &str, endowment: Option<&[String]>) -> Result<(Labels, Domain)> {
    let file = read_preference_file(text)?;
    let labels = file.labels(endowment)?;
    let domain = file.domain(&labels)?;
    Ok((labels, domain))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Int(i64),
    Text(String),
    Float(f64),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    n: Option<usize>,
    objects: Option<Vec<String>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    rows: Vec<Vec<RawNumber>>,
}

fn rational(raw: &RawNumber) -> Result<Rational> {
    match raw {
        RawNumber::Int(k) => Ok(Rational::from_integer(*k)),
        RawNumber::Text(s) => {
            s.parse().map_err(|e| Error::Input(format!("`{s}` is not a rational: {e}")))
        }
        RawNumber::Float(x) => Err(Error::Input(format!(
            "{x} is a float; write probabilities as exact strings like \"1/2\""
        ))),
    }
}

/// A matrix file. Columns follow the file's `"objects"` if present, else
/// `base` (the object order of the accompanying profile); they are then
/// permuted into `labels` order.
pub fn read_matrix(text: &str, base: &Labels, labels: &Labels) -> Result<BistochasticMatrix> {
    let raw: RawMatrix = parse_json(text)?;
    let rows: Vec<Vec<Rational>> = raw
        .rows
        .iter()
        .map(|r| r.iter().map(rational).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    if let Some(n) = raw.n {
        if n != rows.len() {
            return Err(Error::SizeMismatch { expected: n, found: rows.len() });
        }
    }
    let columns = match raw.objects.or(raw.labels) {
        Some(names) => Labels::new(names)?,
        None => base.clone(),
    };
    if columns.n() != labels.n() || rows.len() != labels.n() {
        return Err(Error::SizeMismatch { expected: labels.n(), found: rows.len() });
    }
    let from: Vec<usize> =
        labels.names().iter().map(|name| columns.id(name).map(|x| x.0)).collect::<Result<_>>()?;
    let rows = rows
        .into_iter()
        .map(|row| {
            if row.len() != from.len() {
                return Err(Error::SizeMismatch { expected: from.len(), found: row.len() });
            }
            Ok(from.iter().map(|&k| row[k].clone()).collect())
        })
        .collect::<Result<Vec<Vec<Rational>>>>()?;
    BistochasticMatrix::new(rows)
}

/// A matrix file on its own, with object names taken from the file or numeric.
pub fn read_matrix_standalone(text: &str) -> Result<BistochasticMatrix> {
    let raw: RawMatrix = parse_json(text)?;
    let rows = raw
        .rows
        .iter()
        .map(|r| r.iter().map(rational).collect::<Result<_>>())
        .collect::<Result<Vec<Vec<Rational>>>>()?;
    if let Some(n) = raw.n {
        if n != rows.len() {
            return Err(Error::SizeMismatch { expected: n, found: rows.len() });
        }
    }
    BistochasticMatrix::new(rows)
}

fn names<'a>(labels: &'a Labels, pref: &Preference) -> Vec<&'a str> {
    pref.ranking().iter().map(|&x| labels.name(x)).collect()
}

pub fn profile_json(labels: &Labels, profile: &Profile) -> Value {
    json!({
        "n": profile.n(),
        "objects": labels.names(),
        "prefs": profile.prefs().iter().map(|p| names(labels, p)).collect::<Vec<_>>(),
    })
}

pub fn domain_json(labels: &Labels, domain: &Domain) -> Value {
    json!({
        "n": domain.n(),
        "objects": labels.names(),
        "prefs": domain.prefs().iter().map(|p| names(labels, p)).collect::<Vec<_>>(),
    })
}

/// `{"n", "objects", "rows"}`; columns in `labels` order.
pub fn matrix_json(labels: &Labels, m: &BistochasticMatrix) -> Value {
    json!({
        "n": m.n(),
        "objects": labels.names(),
        "rows": m.to_rows(),
    })
}

/// Agent `i`'s object, by name.
pub fn assignment_json(labels: &Labels, a: &DeterministicAssignment) -> Value {
    Value::from(a.as_slice().iter().map(|&x| labels.name(x)).collect::<Vec<_>>())
}

/// `[{"weight", "perm"}]` with permutations given by name.
pub fn decomposition_json(labels: &Labels, d: &Decomposition) -> Value {
    Value::from(
        d.terms
            .iter()
            .map(|t| json!({ "weight": t.weight, "perm": assignment_json(labels, &t.perm) }))
            .collect::<Vec<_>>(),
    )
}
