//! Exact linear programming over [`Rational`]s.
//!
//! Dense two-phase simplex with Bland's rule. Every outcome carries something
//! checkable: an optimal point, a Farkas certificate of infeasibility, or a
//! feasible point together with an improving ray.
//!
//! ```
//! use ttc_core::lp::{LinearProgram, Relation, Solution};
//! use ttc_core::Rational;
//!
//! // maximize x subject to x <= 1 (x >= 0 by default)
//! let mut lp = LinearProgram::new(1);
//! lp.maximize(vec![Rational::one()]).unwrap();
//! lp.add_constraint(vec![Rational::one()], Relation::Le, Rational::one()).unwrap();
//! match lp.solve().unwrap() {
//!     Solution::Optimal { value, point } => {
//!         assert_eq!(value, Rational::one());
//!         assert_eq!(point, vec![Rational::one()]);
//!     }
//!     other => panic!("unexpected {other:?}"),
//! }
//! ```

use std::fmt;

use serde::Serialize;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    fn holds_at(&self, x: &[Rational]) -> bool {
        let lhs = dot(&self.coeffs, x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bounds {
    pub fn nonnegative() -> Self {
        Bounds { lower: Some(Rational::zero()), upper: None }
    }

    pub fn free() -> Self {
        Bounds { lower: None, upper: None }
    }

    fn contains(&self, v: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| v >= l) && self.upper.as_ref().is_none_or(|u| v <= u)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("expected {expected} coefficients, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable {var} has lower bound above its upper bound")]
    InvalidBounds { var: usize },
    #[error("variable index {var} out of range")]
    NoSuchVariable { var: usize },
}

/// `maximize objective·x` subject to linear constraints and variable bounds.
///
/// Variables default to `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
    bounds: Vec<Bounds>,
}

/// Multipliers `y`, one per constraint, with `y >= 0` on `>=` rows and
/// `y <= 0` on `<=` rows. Every feasible `x` would satisfy
/// `(Σ y_i a_i)·x >= Σ y_i b_i`, yet the left side cannot reach the right
/// anywhere inside the variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible(FarkasCertificate),
    Unbounded { point: Vec<Rational>, ray: Vec<Rational> },
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![Bounds::nonnegative(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn maximize(&mut self, objective: Vec<Rational>) -> Result<&mut Self, LpError> {
        self.check_len(objective.len())?;
        self.objective = objective;
        Ok(self)
    }

    pub fn set_bounds(&mut self, var: usize, bounds: Bounds) -> Result<&mut Self, LpError> {
        let slot = self.bounds.get_mut(var).ok_or(LpError::NoSuchVariable { var })?;
        *slot = bounds;
        Ok(self)
    }

    pub fn add_constraint(
        &mut self,
        coeffs: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<&mut Self, LpError> {
        self.check_len(coeffs.len())?;
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(self)
    }

    /// Like [`add_constraint`](Self::add_constraint) with `(variable, coefficient)` terms.
    /// Repeated variables accumulate.
    pub fn add_sparse(
        &mut self,
        terms: &[(usize, Rational)],
        relation: Relation,
        rhs: Rational,
    ) -> Result<&mut Self, LpError> {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        for (var, c) in terms {
            *coeffs.get_mut(*var).ok_or(LpError::NoSuchVariable { var: *var })? += c;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    fn check_len(&self, found: usize) -> Result<(), LpError> {
        if found != self.num_vars() {
            return Err(LpError::DimensionMismatch { expected: self.num_vars(), found });
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    /// `x` satisfies every constraint and bound exactly.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && self.bounds.iter().zip(x).all(|(b, v)| b.contains(v))
            && self.constraints.iter().all(|c| c.holds_at(x))
    }

    /// `ray` is a recession direction of the feasible set that strictly improves the objective.
    pub fn is_improving_ray(&self, ray: &[Rational]) -> bool {
        if ray.len() != self.num_vars() || !dot(&self.objective, ray).is_positive() {
            return false;
        }
        let bounds_ok = self.bounds.iter().zip(ray).all(|(b, r)| {
            (b.lower.is_none() || r.signum() >= 0) && (b.upper.is_none() || r.signum() <= 0)
        });
        bounds_ok
            && self.constraints.iter().all(|c| {
                let s = dot(&c.coeffs, ray).signum();
                match c.relation {
                    Relation::Le => s <= 0,
                    Relation::Eq => s == 0,
                    Relation::Ge => s >= 0,
                }
            })
    }

    pub fn solve(&self) -> Result<Solution, LpError> {
        for (var, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                if l > u {
                    return Err(LpError::InvalidBounds { var });
                }
            }
        }
        for c in &self.constraints {
            self.check_len(c.coeffs.len())?;
        }
        self.check_len(self.objective.len())?;
        Ok(StandardForm::build(self).solve(self))
    }
}

impl FarkasCertificate {
    /// Re-derives the contradiction from the original program.
    pub fn verify(&self, lp: &LinearProgram) -> bool {
        if self.multipliers.len() != lp.constraints.len() {
            return false;
        }
        let mut combo = vec![Rational::zero(); lp.num_vars()];
        let mut rhs = Rational::zero();
        for (y, c) in self.multipliers.iter().zip(&lp.constraints) {
            let sign_ok = match c.relation {
                Relation::Le => y.signum() <= 0,
                Relation::Eq => true,
                Relation::Ge => y.signum() >= 0,
            };
            if !sign_ok {
                return false;
            }
            if y.is_zero() {
                continue;
            }
            for (acc, a) in combo.iter_mut().zip(&c.coeffs) {
                if !a.is_zero() {
                    *acc += y * a;
                }
            }
            rhs += y * &c.rhs;
        }
        // Largest value of combo·x over the bounding box.
        let mut best = Rational::zero();
        for (g, b) in combo.iter().zip(&lp.bounds) {
            let end = match g.signum() {
                0 => continue,
                1 => &b.upper,
                _ => &b.lower,
            };
            match end {
                Some(v) => best += g * v,
                None => return false,
            }
        }
        best < rhs
    }
}

/// How an original variable is expressed through nonnegative tableau columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// x = lower + y
    Shifted { col: usize, lower: Rational },
    /// x = upper - y
    Reflected { col: usize, upper: Rational },
    /// x = y⁺ - y⁻
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    maps: Vec<VarMap>,
    n_struct: usize,
    n_slack: usize,
    /// rows, each of width n_struct + n_slack + 1 (last entry is the rhs)
    rows: Vec<Vec<Rational>>,
    /// sign applied to each row to make its rhs nonnegative
    signs: Vec<i32>,
    /// number of rows that come from original constraints (bound rows follow)
    n_original: usize,
    cost: Vec<Rational>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut maps = Vec::with_capacity(lp.num_vars());
        let mut n_struct = 0;
        let mut upper_rows = Vec::new();
        for b in &lp.bounds {
            let map = match (&b.lower, &b.upper) {
                (Some(l), u) => {
                    let col = n_struct;
                    n_struct += 1;
                    if let Some(u) = u {
                        upper_rows.push((col, u - l));
                    }
                    VarMap::Shifted { col, lower: l.clone() }
                }
                (None, Some(u)) => {
                    let col = n_struct;
                    n_struct += 1;
                    VarMap::Reflected { col, upper: u.clone() }
                }
                (None, None) => {
                    let pos = n_struct;
                    n_struct += 2;
                    VarMap::Split { pos, neg: pos + 1 }
                }
            };
            maps.push(map);
        }

        let n_slack = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count()
            + upper_rows.len();
        let width = n_struct + n_slack + 1;

        let mut rows = Vec::new();
        let mut signs = Vec::new();
        let mut slack = n_struct;
        let mut push_row = |mut row: Vec<Rational>, rows: &mut Vec<Vec<Rational>>| {
            let sign = if row[width - 1].is_negative() {
                for v in row.iter_mut().filter(|v| !v.is_zero()) {
                    *v = -&*v;
                }
                -1
            } else {
                1
            };
            rows.push(row);
            signs.push(sign);
        };

        for c in &lp.constraints {
            let mut row = vec![Rational::zero(); width];
            let mut rhs = c.rhs.clone();
            for (a, map) in c.coeffs.iter().zip(&maps) {
                if a.is_zero() {
                    continue;
                }
                match map {
                    VarMap::Shifted { col, lower } => {
                        row[*col] = a.clone();
                        rhs -= a * lower;
                    }
                    VarMap::Reflected { col, upper } => {
                        row[*col] = -a;
                        rhs -= a * upper;
                    }
                    VarMap::Split { pos, neg } => {
                        row[*pos] = a.clone();
                        row[*neg] = -a;
                    }
                }
            }
            match c.relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[width - 1] = rhs;
            push_row(row, &mut rows);
        }
        let n_original = rows.len();
        for (col, cap) in upper_rows {
            let mut row = vec![Rational::zero(); width];
            row[col] = Rational::one();
            row[slack] = Rational::one();
            slack += 1;
            row[width - 1] = cap;
            push_row(row, &mut rows);
        }

        let mut cost = vec![Rational::zero(); n_struct + n_slack];
        for (c, map) in lp.objective.iter().zip(&maps) {
            match map {
                VarMap::Shifted { col, .. } => cost[*col] = c.clone(),
                VarMap::Reflected { col, .. } => cost[*col] = -c,
                VarMap::Split { pos, neg } => {
                    cost[*pos] = c.clone();
                    cost[*neg] = -c;
                }
            }
        }

        StandardForm { maps, n_struct, n_slack, rows, signs, n_original, cost }
    }

    fn to_original(&self, y: &[Rational], is_direction: bool) -> Vec<Rational> {
        self.maps
            .iter()
            .map(|map| match map {
                VarMap::Shifted { col, lower } => {
                    if is_direction {
                        y[*col].clone()
                    } else {
                        lower + &y[*col]
                    }
                }
                VarMap::Reflected { col, upper } => {
                    if is_direction {
                        -&y[*col]
                    } else {
                        upper - &y[*col]
                    }
                }
                VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
            })
            .collect()
    }

    fn solve(self, lp: &LinearProgram) -> Solution {
        let n_cols = self.n_struct + self.n_slack;
        let m = self.rows.len();
        let art_start = n_cols;
        let width = n_cols + m + 1;

        // Phase I: one artificial per row.
        let rows: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = Vec::with_capacity(width);
                row.extend_from_slice(&r[..n_cols]);
                row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
                row.push(r[n_cols].clone());
                row
            })
            .collect();
        let basis: Vec<usize> = (art_start..art_start + m).collect();
        let mut obj = vec![Rational::zero(); width];
        for row in &rows {
            for (j, v) in row[..n_cols].iter().enumerate() {
                if !v.is_zero() {
                    obj[j] += v;
                }
            }
            obj[width - 1] += &row[width - 1];
        }

        let mut tab = Tableau { rows, obj, basis };
        let phase_one = tab.run(n_cols);
        debug_assert!(phase_one.is_none(), "phase I is bounded");

        // obj[rhs] holds -z = Σ artificials.
        if tab.obj[width - 1].is_positive() {
            let multipliers = (0..self.n_original)
                .map(|i| {
                    let w = Rational::one() + &tab.obj[art_start + i];
                    if self.signs[i] < 0 {
                        -w
                    } else {
                        w
                    }
                })
                .collect();
            return Solution::Infeasible(FarkasCertificate { multipliers });
        }

        // Drive zero-valued artificials out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..n_cols).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in &mut tab.rows {
            row.drain(art_start..art_start + m);
        }

        // Phase II.
        let width = n_cols + 1;
        let mut obj = vec![Rational::zero(); width];
        obj[..n_cols].clone_from_slice(&self.cost);
        for (row, &b) in tab.rows.iter().zip(&tab.basis) {
            let cb = &self.cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o -= cb * v;
                }
            }
        }
        tab.obj = obj;

        let unbounded_col = tab.run(n_cols);

        let mut y = vec![Rational::zero(); n_cols];
        for (row, &b) in tab.rows.iter().zip(&tab.basis) {
            y[b] = row[width - 1].clone();
        }
        let point = self.to_original(&y, false);
        match unbounded_col {
            None => Solution::Optimal { value: lp.objective_value(&point), point },
            Some(c) => {
                let mut dir = vec![Rational::zero(); n_cols];
                dir[c] = Rational::one();
                for (row, &b) in tab.rows.iter().zip(&tab.basis) {
                    dir[b] = -&row[c];
                }
                let ray = self.to_original(&dir, true);
                Solution::Unbounded { point, ray }
            }
        }
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// reduced costs, with -z in the last slot
    obj: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    /// Runs simplex over columns `0..n_enter` with Bland's rule. Returns the
    /// entering column if the objective is unbounded along it.
    fn run(&mut self, n_enter: usize) -> Option<usize> {
        loop {
            let c = (0..n_enter).find(|&j| self.obj[j].is_positive())?;
            let rhs = self.obj.len() - 1;
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Some(c),
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        let nz: Vec<usize> = {
            let row = &mut self.rows[r];
            let mut nz = Vec::new();
            for (k, v) in row.iter_mut().enumerate() {
                if !v.is_zero() {
                    *v *= &inv;
                    nz.push(k);
                }
            }
            nz
        };
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |target: &mut Vec<Rational>| {
            let f = target[c].clone();
            if f.is_zero() {
                return;
            }
            for &k in &nz {
                let delta = &f * &pivot_row[k];
                target[k] -= delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }
}
