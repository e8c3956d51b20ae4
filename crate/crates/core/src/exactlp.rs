//! Exact linear programming.
//!
//! A dense two-phase tableau simplex with Bland's pivoting rule. Every result
//! carries a certificate that can be re-checked by substitution:
//!
//! * optimal: a dual vector `y` satisfying sign feasibility, dual feasibility
//!   and complementary slackness against the returned primal point;
//! * infeasible: a Farkas vector `y` with `yᵀA ≤ 0` and `yᵀ(b − A·l) > 0`;
//! * unbounded: a feasible point plus an improving recession direction.
//!
//! Certificates are stated for the minimization form of the program, i.e. the
//! objective is negated first when the sense is [`Sense::Maximize`]. Dual and
//! Farkas multipliers use the sign convention `y_i ≥ 0` for `≥` rows,
//! `y_i ≤ 0` for `≤` rows and free for `=` rows.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    fn holds<T: Scalar>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// `optimize objective·x` subject to the constraints and `x ≥ lower_bounds`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram<T> {
    num_vars: usize,
    constraints: Vec<Constraint<T>>,
    objective: Vec<T>,
    sense: Sense,
    lower_bounds: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate<T> {
    /// Dual multipliers, one per constraint.
    Dual(Vec<T>),
    /// Farkas multipliers, one per constraint.
    Farkas(Vec<T>),
    /// Improving direction in variable space.
    Ray(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpResult<T> {
    pub status: LpStatus,
    /// Optimal point, or a feasible point when unbounded.
    pub solution: Option<Vec<T>>,
    pub objective: Option<T>,
    pub certificate: Certificate<T>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility<T> {
    Feasible(Vec<T>),
    /// Farkas multipliers proving emptiness.
    Infeasible(Vec<T>),
}

impl<T> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

impl<T: Scalar> LinearProgram<T> {
    /// A feasibility problem over `num_vars` nonnegative variables.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            constraints: Vec::new(),
            objective: vec![T::zero(); num_vars],
            sense: Sense::Minimize,
            lower_bounds: vec![T::zero(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn lower_bounds(&self) -> &[T] {
        &self.lower_bounds
    }

    pub fn set_objective(&mut self, sense: Sense, objective: Vec<T>) -> &mut Self {
        self.sense = sense;
        self.objective = objective;
        self
    }

    pub fn set_lower_bound(&mut self, var: usize, bound: T) -> &mut Self {
        self.lower_bounds[var] = bound;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    /// Adds `Σ coeff·x_var  relation  rhs` from a sparse term list.
    pub fn add_sparse(
        &mut self,
        terms: impl IntoIterator<Item = (usize, T)>,
        relation: Relation,
        rhs: T,
    ) -> &mut Self {
        let mut coeffs = vec![T::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[j] += c;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    fn check(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::arg("objective length differs from variable count"));
        }
        if self.lower_bounds.len() != self.num_vars {
            return Err(Error::arg("lower bound count differs from variable count"));
        }
        if let Some(k) = self.constraints.iter().position(|c| c.coeffs.len() != self.num_vars) {
            return Err(Error::arg(format!("constraint {k} has the wrong number of coefficients")));
        }
        Ok(())
    }

    fn min_costs(&self) -> Vec<T> {
        match self.sense {
            Sense::Minimize => self.objective.clone(),
            Sense::Maximize => self.objective.iter().map(|c| -c.clone()).collect(),
        }
    }

    /// Right-hand sides after shifting `x = l + z`.
    fn shifted_rhs(&self) -> Vec<T> {
        self.constraints
            .iter()
            .map(|c| c.rhs.clone() - dot(&c.coeffs, &self.lower_bounds))
            .collect()
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        dot(&self.objective, x)
    }

    /// Exact substitution check of a primal point.
    pub fn is_feasible_point(&self, x: &[T]) -> bool {
        x.len() == self.num_vars
            && x.iter().zip(&self.lower_bounds).all(|(v, l)| v >= l)
            && self.constraints.iter().all(|c| c.relation.holds(&dot(&c.coeffs, x), &c.rhs))
    }

    /// Re-checks a solver result against this program. Returns a description of
    /// the first violated condition.
    pub fn verify(&self, result: &LpResult<T>) -> std::result::Result<(), String> {
        match (&result.status, &result.certificate) {
            (LpStatus::Optimal, Certificate::Dual(y)) => {
                let x = result.solution.as_ref().ok_or("optimal result without solution")?;
                if !self.is_feasible_point(x) {
                    return Err("solution violates a constraint".into());
                }
                self.check_dual(x, y)?;
                if result.objective.as_ref() != Some(&self.objective_value(x)) {
                    return Err("reported objective differs from cᵀx".into());
                }
                Ok(())
            }
            (LpStatus::Infeasible, Certificate::Farkas(y)) => self.check_farkas(y),
            (LpStatus::Unbounded, Certificate::Ray(d)) => {
                let x = result.solution.as_ref().ok_or("unbounded result without a point")?;
                if !self.is_feasible_point(x) {
                    return Err("unbounded witness point is infeasible".into());
                }
                self.check_ray(d)
            }
            _ => Err("certificate kind does not match status".into()),
        }
    }

    fn sign_ok(&self, y: &[T]) -> std::result::Result<(), String> {
        if y.len() != self.constraints.len() {
            return Err("multiplier count differs from constraint count".into());
        }
        for (k, (c, yk)) in self.constraints.iter().zip(y).enumerate() {
            let ok = match c.relation {
                Relation::Le => !yk.is_positive(),
                Relation::Ge => !yk.is_negative(),
                Relation::Eq => true,
            };
            if !ok {
                return Err(format!("multiplier {k} has the wrong sign"));
            }
        }
        Ok(())
    }

    fn weighted_rows(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.num_vars];
        for (c, yk) in self.constraints.iter().zip(y) {
            if yk.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&c.coeffs) {
                if !a.is_zero() {
                    *o += yk.clone() * a.clone();
                }
            }
        }
        out
    }

    fn check_dual(&self, x: &[T], y: &[T]) -> std::result::Result<(), String> {
        self.sign_ok(y)?;
        let c = self.min_costs();
        let ay = self.weighted_rows(y);
        for j in 0..self.num_vars {
            let reduced = c[j].clone() - ay[j].clone();
            if reduced.is_negative() {
                return Err(format!("reduced cost of variable {j} is negative"));
            }
            if !reduced.is_zero() && x[j] != self.lower_bounds[j] {
                return Err(format!("complementary slackness fails at variable {j}"));
            }
        }
        for (k, (con, yk)) in self.constraints.iter().zip(y).enumerate() {
            if !yk.is_zero() && dot(&con.coeffs, x) != con.rhs {
                return Err(format!("complementary slackness fails at constraint {k}"));
            }
        }
        Ok(())
    }

    fn check_farkas(&self, y: &[T]) -> std::result::Result<(), String> {
        self.sign_ok(y)?;
        if self.weighted_rows(y).iter().any(|v| v.is_positive()) {
            return Err("Farkas combination has a positive coefficient".into());
        }
        if !dot(y, &self.shifted_rhs()).is_positive() {
            return Err("Farkas combination right-hand side is not positive".into());
        }
        Ok(())
    }

    fn check_ray(&self, d: &[T]) -> std::result::Result<(), String> {
        if d.len() != self.num_vars || d.iter().any(|v| v.is_negative()) {
            return Err("ray must be a nonnegative direction".into());
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if !c.relation.holds(&dot(&c.coeffs, d), &T::zero()) {
                return Err(format!("ray leaves constraint {k}"));
            }
        }
        if !dot(&self.min_costs(), d).is_negative() {
            return Err("ray does not improve the objective".into());
        }
        Ok(())
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x.clone() * y.clone();
        }
    }
    s
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau<T> {
    // m rows of (cols + 1) entries; last entry is the right-hand side
    rows: Vec<Vec<T>>,
    // reduced costs, last entry is minus the objective value
    obj: Vec<T>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    // initial unit column of each row (slack or artificial)
    unit_col: Vec<usize>,
    pivots: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

impl<T: Scalar> Tableau<T> {
    fn cols(&self) -> usize {
        self.kinds.len()
    }

    fn set_costs(&mut self, costs: &[T]) {
        let mut obj: Vec<T> = costs.to_vec();
        obj.push(T::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (o, a) in obj.iter_mut().zip(&self.rows[i]) {
                if !a.is_zero() {
                    *o -= cb.clone() * a.clone();
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let inv = T::one() / self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        let nz: Vec<usize> = (0..self.rows[r].len()).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<T>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] -= f.clone() * pivot_row[j].clone();
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// Bland's rule: lowest-index improving column, lowest-index basic variable
    /// among ratio-test ties.
    fn run(&mut self, allow_artificial: bool) -> PhaseEnd {
        loop {
            let entering = (0..self.cols()).find(|&j| {
                (allow_artificial || self.kinds[j] != ColKind::Artificial) && self.obj[j].is_negative()
            });
            let Some(c) = entering else {
                return PhaseEnd::Optimal;
            };
            let rhs = self.cols();
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = row[rhs].clone() / row[c].clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return PhaseEnd::Unbounded(c),
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    /// Row multipliers `c_B B⁻¹` read off the reduced costs of the initial
    /// unit columns.
    fn duals(&self, costs: &[T]) -> Vec<T> {
        self.unit_col
            .iter()
            .map(|&k| costs[k].clone() - self.obj[k].clone())
            .collect()
    }

    fn primal(&self, n: usize) -> Vec<T> {
        let rhs = self.cols();
        let mut x = vec![T::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rows[i][rhs].clone();
            }
        }
        x
    }
}

/// Solves `lp` exactly.
pub fn solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpResult<T>> {
    lp.check()?;
    let n = lp.num_vars;
    let m_all = lp.constraints.len();
    let shifted = lp.shifted_rhs();

    // Normalize rows to nonnegative right-hand sides; drop all-zero rows.
    let mut kept: Vec<usize> = Vec::new();
    let mut signs: Vec<bool> = vec![false; m_all]; // true = row negated
    for (k, c) in lp.constraints.iter().enumerate() {
        let negate = shifted[k].is_negative();
        signs[k] = negate;
        if c.coeffs.iter().all(|a| a.is_zero()) {
            let rel = if negate { c.relation.flipped() } else { c.relation };
            let b = if negate { -shifted[k].clone() } else { shifted[k].clone() };
            if !rel.holds(&T::zero(), &b) {
                // 0 R b with b > 0 fails only for = and ≥ after normalization
                let mut y = vec![T::zero(); m_all];
                y[k] = if negate { -T::one() } else { T::one() };
                return Ok(LpResult {
                    status: LpStatus::Infeasible,
                    solution: None,
                    objective: None,
                    certificate: Certificate::Farkas(y),
                    pivots: 0,
                });
            }
            continue;
        }
        kept.push(k);
    }

    let m = kept.len();
    let mut kinds = vec![ColKind::Structural; n];
    let mut rels = Vec::with_capacity(m);
    for &k in &kept {
        let rel = if signs[k] { lp.constraints[k].relation.flipped() } else { lp.constraints[k].relation };
        rels.push(rel);
    }
    let mut slack_of = vec![None; m];
    for (i, rel) in rels.iter().enumerate() {
        if *rel != Relation::Eq {
            slack_of[i] = Some(kinds.len());
            kinds.push(ColKind::Slack);
        }
    }
    let mut art_of = vec![None; m];
    for (i, rel) in rels.iter().enumerate() {
        if *rel != Relation::Le {
            art_of[i] = Some(kinds.len());
            kinds.push(ColKind::Artificial);
        }
    }
    let cols = kinds.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut unit_col = Vec::with_capacity(m);
    for (i, &k) in kept.iter().enumerate() {
        let c = &lp.constraints[k];
        let mut row: Vec<T> = Vec::with_capacity(cols + 1);
        for a in &c.coeffs {
            row.push(if signs[k] { -a.clone() } else { a.clone() });
        }
        row.resize(cols + 1, T::zero());
        if let Some(s) = slack_of[i] {
            row[s] = if rels[i] == Relation::Le { T::one() } else { -T::one() };
        }
        if let Some(a) = art_of[i] {
            row[a] = T::one();
        }
        row[cols] = if signs[k] { -shifted[k].clone() } else { shifted[k].clone() };
        let unit = if rels[i] == Relation::Le { slack_of[i].unwrap() } else { art_of[i].unwrap() };
        basis.push(unit);
        unit_col.push(unit);
        rows.push(row);
    }
    let mut t = Tableau { rows, obj: Vec::new(), basis, kinds, unit_col, pivots: 0 };

    // Phase one.
    let phase1: Vec<T> = t
        .kinds
        .iter()
        .map(|k| if *k == ColKind::Artificial { T::one() } else { T::zero() })
        .collect();
    if t.kinds.contains(&ColKind::Artificial) {
        t.set_costs(&phase1);
        if let PhaseEnd::Unbounded(_) = t.run(true) {
            unreachable!("phase one is bounded below by zero");
        }
        if !t.obj[cols].is_zero() {
            let y = t.duals(&phase1);
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                solution: None,
                objective: None,
                certificate: Certificate::Farkas(expand(&y, &kept, &signs, m_all)),
                pivots: t.pivots,
            });
        }
        // Drive zero-level artificials out of the basis where possible; rows
        // where that is impossible are redundant and stay inert.
        for i in 0..m {
            if t.kinds[t.basis[i]] != ColKind::Artificial {
                continue;
            }
            if let Some(j) = (0..cols).find(|&j| t.kinds[j] != ColKind::Artificial && !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
    }

    // Phase two.
    let mut costs = lp.min_costs();
    costs.resize(cols, T::zero());
    t.set_costs(&costs);
    match t.run(false) {
        PhaseEnd::Optimal => {
            let z = t.primal(n);
            let x: Vec<T> = z.iter().zip(&lp.lower_bounds).map(|(a, b)| a.clone() + b.clone()).collect();
            let y = t.duals(&costs);
            let objective = lp.objective_value(&x);
            Ok(LpResult {
                status: LpStatus::Optimal,
                solution: Some(x),
                objective: Some(objective),
                certificate: Certificate::Dual(expand(&y, &kept, &signs, m_all)),
                pivots: t.pivots,
            })
        }
        PhaseEnd::Unbounded(c) => {
            let z = t.primal(n);
            let x: Vec<T> = z.iter().zip(&lp.lower_bounds).map(|(a, b)| a.clone() + b.clone()).collect();
            let mut d = vec![T::zero(); cols];
            d[c] = T::one();
            for (i, &b) in t.basis.iter().enumerate() {
                d[b] = -t.rows[i][c].clone();
            }
            d.truncate(n);
            Ok(LpResult {
                status: LpStatus::Unbounded,
                solution: Some(x),
                objective: None,
                certificate: Certificate::Ray(d),
                pivots: t.pivots,
            })
        }
    }
}

fn expand<T: Scalar>(y: &[T], kept: &[usize], signs: &[bool], m_all: usize) -> Vec<T> {
    let mut out = vec![T::zero(); m_all];
    for (i, &k) in kept.iter().enumerate() {
        out[k] = if signs[k] { -y[i].clone() } else { y[i].clone() };
    }
    out
}

/// Feasibility only; the objective is ignored.
pub fn feasible<T: Scalar>(lp: &LinearProgram<T>) -> Result<Feasibility<T>> {
    let mut plain = lp.clone();
    plain.objective = vec![T::zero(); lp.num_vars];
    plain.sense = Sense::Minimize;
    let res = solve(&plain)?;
    Ok(match (res.status, res.certificate) {
        (LpStatus::Infeasible, Certificate::Farkas(y)) => Feasibility::Infeasible(y),
        (_, _) => Feasibility::Feasible(res.solution.expect("feasible program yields a point")),
    })
}
