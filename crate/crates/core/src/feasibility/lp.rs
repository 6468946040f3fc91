//! Exact two-phase simplex over rationals (Dantzig pricing with a Bland
//! fallback).
//!
//! The solver works on a dense tableau. Variables may be free or carry a
//! lower bound; rows are `≤`, `≥` or `=`. Infeasibility is reported with a
//! Farkas certificate read off the phase-one duals.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    num_vars: usize,
    rows: Vec<Constraint>,
    lower_bounds: Vec<Option<Rational>>,
}

impl LinearSystem {
    /// A system over `num_vars` free variables with no rows.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            rows: Vec::new(),
            lower_bounds: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn lower_bounds(&self) -> &[Option<Rational>] {
        &self.lower_bounds
    }

    pub fn set_lower_bound(&mut self, var: usize, bound: Rational) {
        self.lower_bounds[var] = Some(bound);
    }

    /// Adds a dense row.
    ///
    /// # Panics
    /// If the coefficient vector does not have `num_vars` entries.
    pub fn add_row(&mut self, coefficients: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coefficients.len(), self.num_vars, "row width mismatch");
        self.rows.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
    }

    /// Adds a row given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coefficients = vec![Rational::zero(); self.num_vars];
        for (var, c) in terms {
            coefficients[*var] += c;
        }
        self.add_row(coefficients, relation, rhs);
    }

    /// Whether `x` satisfies every row and bound exactly.
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        let bounds_ok = self
            .lower_bounds
            .iter()
            .zip(x)
            .all(|(lb, xv)| lb.as_ref().is_none_or(|l| xv >= l));
        bounds_ok
            && self.rows.iter().all(|row| {
                let lhs: Rational = row.coefficients.iter().zip(x).map(|(a, b)| a * b).sum();
                match row.relation {
                    Relation::Le => lhs <= row.rhs,
                    Relation::Ge => lhs >= row.rhs,
                    Relation::Eq => lhs == row.rhs,
                }
            })
    }
}

/// Multipliers proving a system infeasible.
///
/// Each row is read in `≤` orientation (a `≥` row is negated first) and
/// multiplied by its entry; entries for inequality rows are nonnegative,
/// entries for equality rows have any sign. The combined row `c·x ≤ d` has
/// `c_k = 0` on free variables and `c_k ≥ 0` on bounded ones, and
/// `Σ c_k l_k > d`, which no point can satisfy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FarkasCertificate {
    #[serde(serialize_with = "crate::report::ser_vec")]
    pub multipliers: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityVerdict {
    Feasible(Vec<Rational>),
    Infeasible(FarkasCertificate),
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible(FarkasCertificate),
    Unbounded,
}

/// Decides feasibility of `system` exactly.
pub fn lp_feasible(system: &LinearSystem) -> FeasibilityVerdict {
    match maximize(system, &vec![Rational::zero(); system.num_vars]) {
        LpOutcome::Optimal { x, .. } => FeasibilityVerdict::Feasible(x),
        LpOutcome::Infeasible(cert) => FeasibilityVerdict::Infeasible(cert),
        LpOutcome::Unbounded => unreachable!("zero objective is bounded"),
    }
}

/// Maximizes `objective · x` over `system`.
pub fn maximize(system: &LinearSystem, objective: &[Rational]) -> LpOutcome {
    assert_eq!(objective.len(), system.num_vars);
    Standardized::build(system).solve(objective)
}

pub fn minimize(system: &LinearSystem, objective: &[Rational]) -> LpOutcome {
    let negated: Vec<Rational> = objective.iter().map(|c| -c).collect();
    match maximize(system, &negated) {
        LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
        other => other,
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Debug, Clone)]
enum VarMap {
    // x = lower + y[col]
    Shifted { col: usize, lower: Rational },
    // x = y[pos] - y[neg]
    Split { pos: usize, neg: usize },
}

struct Standardized<'a> {
    system: &'a LinearSystem,
    vars: Vec<VarMap>,
    // Structural plus slack columns; artificial columns follow.
    num_cols: usize,
    // Row r of the tableau equals sign[r] times the original row r.
    sign: Vec<bool>,
    // Phase-one basis of each row: an artificial, or a slack with
    // coefficient +1 when the row already has a nonnegative rhs.
    start: Vec<StartBasis>,
    tableau: Tableau,
}

#[derive(Debug, Clone, Copy)]
enum StartBasis {
    Artificial(usize),
    Slack(usize),
}

struct Tableau {
    // m rows of equal width; last entry is the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
}

/// Consecutive degenerate pivots tolerated under Dantzig pricing before the
/// solver falls back to Bland's rule for the rest of the phase.
const DEGENERATE_PATIENCE: usize = 32;

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize, objective: &mut [Rational]) {
        let inv = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r != row {
                eliminate(other, &pivot_row, col);
            }
        }
        eliminate(objective, &pivot_row, col);
        self.basis[row] = col;
    }

    /// Minimizes with reduced costs `d` (enter on negative). Prices by most
    /// negative reduced cost and switches to Bland's smallest-index rule
    /// after a run of degenerate pivots, which rules out cycling. Columns at
    /// or beyond `allowed` never enter. Returns false if unbounded.
    fn run(&mut self, d: &mut [Rational], allowed: usize) -> bool {
        let mut degenerate = 0;
        loop {
            let bland = degenerate >= DEGENERATE_PATIENCE;
            let entering = if bland {
                (0..allowed).find(|&j| d[j].is_negative())
            } else {
                (0..allowed)
                    .filter(|&j| d[j].is_negative())
                    .min_by(|&a, &b| d[a].cmp(&d[b]).then(a.cmp(&b)))
            };
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = &row[col];
                if a.is_positive() {
                    let ratio = row.last().expect("rhs") / a;
                    let better = match &best {
                        None => true,
                        Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        degenerate += 1;
                    } else if !bland {
                        degenerate = 0;
                    }
                    self.pivot(r, col, d)
                }
            }
        }
    }
}

fn eliminate(target: &mut [Rational], pivot_row: &[Rational], col: usize) {
    let factor = target[col].clone();
    if factor.is_zero() {
        return;
    }
    for (t, p) in target.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *t -= &factor * p;
        }
    }
}

impl<'a> Standardized<'a> {
    fn build(system: &'a LinearSystem) -> Self {
        let mut vars = Vec::with_capacity(system.num_vars);
        let mut next = 0;
        for lb in &system.lower_bounds {
            match lb {
                Some(l) => {
                    vars.push(VarMap::Shifted {
                        col: next,
                        lower: l.clone(),
                    });
                    next += 1;
                }
                None => {
                    vars.push(VarMap::Split {
                        pos: next,
                        neg: next + 1,
                    });
                    next += 2;
                }
            }
        }
        let m = system.rows.len();
        let mut slack_of_row = vec![None; m];
        for (r, row) in system.rows.iter().enumerate() {
            if row.relation != Relation::Eq {
                slack_of_row[r] = Some(next);
                next += 1;
            }
        }
        let num_cols = next;

        // Lay out rows over structural and slack columns first; artificial
        // columns are appended once we know which rows need one.
        let mut rows = Vec::with_capacity(m);
        let mut sign = Vec::with_capacity(m);
        let mut start = Vec::with_capacity(m);
        let mut num_art = 0;
        for (r, row) in system.rows.iter().enumerate() {
            let mut t = vec![Rational::zero(); num_cols];
            let mut rhs = row.rhs.clone();
            for (k, a) in row.coefficients.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                match &vars[k] {
                    VarMap::Shifted { col, lower } => {
                        t[*col] += a;
                        rhs -= a * lower;
                    }
                    VarMap::Split { pos, neg } => {
                        t[*pos] += a;
                        t[*neg] -= a;
                    }
                }
            }
            if let Some(c) = slack_of_row[r] {
                t[c] = match row.relation {
                    Relation::Le => Rational::one(),
                    _ => -Rational::one(),
                };
            }
            // Flip negative right-hand sides, and zero ones whose slack
            // would otherwise enter with coefficient -1.
            let flip = rhs.is_negative() || (rhs.is_zero() && row.relation == Relation::Ge);
            if flip {
                for x in t.iter_mut() {
                    *x = -x.clone();
                }
                rhs = -rhs;
            }
            match slack_of_row[r] {
                Some(c) if t[c].is_positive() => start.push(StartBasis::Slack(c)),
                _ => {
                    start.push(StartBasis::Artificial(num_cols + num_art));
                    num_art += 1;
                }
            }
            t.push(rhs);
            sign.push(!flip);
            rows.push(t);
        }
        let total = num_cols + num_art;
        let mut basis = Vec::with_capacity(m);
        for (t, s) in rows.iter_mut().zip(&start) {
            let rhs = t.pop().expect("rhs");
            t.resize(total, Rational::zero());
            let b = match *s {
                StartBasis::Artificial(a) => {
                    t[a] = Rational::one();
                    a
                }
                StartBasis::Slack(c) => c,
            };
            t.push(rhs);
            basis.push(b);
        }
        Self {
            system,
            vars,
            num_cols,
            sign,
            start,
            tableau: Tableau { rows, basis },
        }
    }

    fn solve(mut self, objective: &[Rational]) -> LpOutcome {
        let total = self.tableau.rows.first().map_or(self.num_cols, |r| r.len() - 1);

        if total > self.num_cols {
            // Phase one: minimize the sum of artificials.
            let mut d = vec![Rational::zero(); total + 1];
            for dj in &mut d[self.num_cols..total] {
                *dj = Rational::one();
            }
            for (r, s) in self.start.iter().enumerate() {
                if let StartBasis::Artificial(_) = s {
                    for (dj, a) in d.iter_mut().zip(&self.tableau.rows[r]) {
                        if !a.is_zero() {
                            *dj -= a;
                        }
                    }
                }
            }
            let bounded = self.tableau.run(&mut d, self.num_cols);
            debug_assert!(bounded, "phase one is bounded below by zero");
            // d[total] holds minus the phase-one objective.
            if (-d[total].clone()).is_positive() {
                return LpOutcome::Infeasible(self.farkas(&d));
            }

            // Drive zero-level artificials out of the basis, dropping rows
            // that are linear combinations of others.
            let mut r = 0;
            while r < self.tableau.rows.len() {
                if self.tableau.basis[r] >= self.num_cols {
                    if let Some(col) = (0..self.num_cols).find(|&j| !self.tableau.rows[r][j].is_zero()) {
                        self.tableau.pivot(r, col, &mut d);
                    } else {
                        self.tableau.rows.remove(r);
                        self.tableau.basis.remove(r);
                        continue;
                    }
                }
                r += 1;
            }
            // Artificial columns are dead weight from here on.
            for row in &mut self.tableau.rows {
                row.drain(self.num_cols..total);
            }
        }

        // Phase two: minimize -objective over structural columns.
        let width = self.num_cols;
        let mut cost = vec![Rational::zero(); width + 1];
        for (k, c) in objective.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match &self.vars[k] {
                VarMap::Shifted { col, .. } => cost[*col] -= c,
                VarMap::Split { pos, neg } => {
                    cost[*pos] -= c;
                    cost[*neg] += c;
                }
            }
        }
        let mut d2 = cost.clone();
        for (r, row) in self.tableau.rows.iter().enumerate() {
            let cb = cost[self.tableau.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d2.iter_mut().zip(row) {
                if !a.is_zero() {
                    *dj -= &cb * a;
                }
            }
        }
        if !self.tableau.run(&mut d2, width) {
            return LpOutcome::Unbounded;
        }
        let x = self.primal();
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, value }
    }

    fn primal(&self) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.num_cols];
        for (row, &b) in self.tableau.rows.iter().zip(&self.tableau.basis) {
            y[b] = row.last().expect("rhs").clone();
        }
        self.vars
            .iter()
            .map(|map| match map {
                VarMap::Shifted { col, lower } => lower + &y[*col],
                VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
            })
            .collect()
    }

    /// Farkas multipliers from the phase-one reduced costs: the dual of a
    /// row started on artificial `a` is `1 - d_a`, and on slack `s` it is
    /// `-d_s` (cost zero, coefficient +1).
    fn farkas(&self, d: &[Rational]) -> FarkasCertificate {
        let multipliers = self
            .system
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let dual = match self.start[r] {
                    StartBasis::Artificial(a) => Rational::one() - &d[a],
                    StartBasis::Slack(s) => -d[s].clone(),
                };
                let signed = if self.sign[r] { dual } else { -dual };
                match row.relation {
                    Relation::Ge => signed,
                    Relation::Le | Relation::Eq => -signed,
                }
            })
            .collect();
        FarkasCertificate { multipliers }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::verify::verify_farkas;

    #[test]
    fn empty_system_is_feasible_at_zero() {
        let sys = LinearSystem::new(3);
        assert_eq!(lp_feasible(&sys), FeasibilityVerdict::Feasible(vec![int(0); 3]));
    }

    #[test]
    fn contradictory_pair_gets_unit_multipliers() {
        let mut sys = LinearSystem::new(1);
        sys.add_row(vec![int(1)], Relation::Le, int(0));
        sys.add_row(vec![int(1)], Relation::Ge, int(1));
        match lp_feasible(&sys) {
            FeasibilityVerdict::Infeasible(cert) => {
                assert_eq!(cert.multipliers, vec![int(1), int(1)]);
                assert!(verify_farkas(&sys, &cert));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn infeasibility_through_lower_bounds() {
        // x + y <= 1 with x, y >= 1.
        let mut sys = LinearSystem::new(2);
        sys.set_lower_bound(0, int(1));
        sys.set_lower_bound(1, int(1));
        sys.add_row(vec![int(1), int(1)], Relation::Le, int(1));
        match lp_feasible(&sys) {
            FeasibilityVerdict::Infeasible(cert) => assert!(verify_farkas(&sys, &cert)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn equality_rows_and_free_variables() {
        // x - y = 3/2, x + y = 1/2: unique point (1, -1/2).
        let mut sys = LinearSystem::new(2);
        sys.add_row(vec![int(1), int(-1)], Relation::Eq, frac(3, 2));
        sys.add_row(vec![int(1), int(1)], Relation::Eq, frac(1, 2));
        assert_eq!(
            lp_feasible(&sys),
            FeasibilityVerdict::Feasible(vec![int(1), frac(-1, 2)])
        );
    }

    #[test]
    fn small_optimization() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0 -> (8/5, 6/5).
        let mut sys = LinearSystem::new(2);
        sys.set_lower_bound(0, int(0));
        sys.set_lower_bound(1, int(0));
        sys.add_row(vec![int(1), int(2)], Relation::Le, int(4));
        sys.add_row(vec![int(3), int(1)], Relation::Le, int(6));
        match maximize(&sys, &[int(1), int(1)]) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![frac(8, 5), frac(6, 5)]);
                assert_eq!(value, frac(14, 5));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            minimize(&sys, &[int(-1), int(-1)]),
            LpOutcome::Optimal {
                x: vec![frac(8, 5), frac(6, 5)],
                value: frac(-14, 5)
            }
        );
    }

    #[test]
    fn unbounded_objective() {
        let mut sys = LinearSystem::new(1);
        sys.set_lower_bound(0, int(0));
        assert_eq!(maximize(&sys, &[int(1)]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut sys = LinearSystem::new(2);
        sys.set_lower_bound(0, int(0));
        sys.set_lower_bound(1, int(0));
        sys.add_row(vec![int(1), int(1)], Relation::Eq, int(1));
        sys.add_row(vec![int(2), int(2)], Relation::Eq, int(2));
        match maximize(&sys, &[int(1), int(0)]) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, int(1));
                assert!(sys.is_satisfied_by(&x));
            }
            other => panic!("{other:?}"),
        }
    }
}
