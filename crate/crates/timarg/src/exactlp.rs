//! Exact rational linear programming with replayable certificates.
//!
//! The canonical problem is a *maximisation*:
//!
//! ```text
//! maximise   c · x
//! subject to a_i · x  =  b_i   for equality rows,
//!            a_i · x  >= b_i   for greater-or-equal rows,
//!            x_j >= 0 for nonnegative variables, x_j free otherwise.
//! ```
//!
//! The associated dual minimises `b · y` over multipliers `y` that are free
//! on equality rows and nonpositive on `>=` rows, with `(Aᵀy)_j >= c_j` on
//! nonnegative variables and `(Aᵀy)_j = c_j` on free ones.  [`solve`] runs a
//! two-phase primal simplex on a dense tableau with Bland's smallest-index
//! anti-cycling rule, entirely in big-rational arithmetic, and returns one of
//! three verdicts, each carrying enough data for independent replay:
//!
//! * **optimal** — a primal point and dual multipliers whose objective values
//!   coincide exactly;
//! * **infeasible** — multipliers `u` (nonpositive on `>=` rows) with
//!   `Aᵀu >= 0` on nonnegative variables, `Aᵀu = 0` on free ones, and
//!   `u · b < 0`, which is impossible alongside any feasible point;
//! * **unbounded** — a feasible point plus a ray that preserves feasibility
//!   and strictly increases the objective.
//!
//! [`verify_certificate`] replays those algebraic conditions against the
//! program using nothing from the solver's internal state, so a verdict can
//! be trusted without trusting the pivoting code.

use num::{One, Signed, Zero};

use crate::error::Error;
use crate::rat::{dot, Rat};
use crate::Result;

/// Constraint row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `a · x = b`
    Equality,
    /// `a · x >= b`
    GreaterEqual,
}

/// Per-variable sign restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    /// `x_j >= 0`
    NonNegative,
    /// `x_j` unrestricted.
    Free,
}

/// A linear program in the crate's canonical maximisation form.
///
/// Rows are stored sparsely as `(column, coefficient)` pairs; columns within
/// a row must be distinct and in range.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    /// Objective coefficients, one per variable (maximised).
    pub objective: Vec<Rat>,
    /// Sparse constraint rows.
    pub constraint_matrix: Vec<Vec<(usize, Rat)>>,
    /// Right-hand sides, one per row.
    pub rhs: Vec<Rat>,
    /// Sense of each row.
    pub row_kinds: Vec<RowKind>,
    /// Sign restriction of each variable.
    pub variable_bounds: Vec<VarBound>,
}

impl LinearProgram {
    /// Create a program with `num_vars` nonnegative variables, zero
    /// objective, and no rows.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rat::zero(); num_vars],
            constraint_matrix: Vec::new(),
            rhs: Vec::new(),
            row_kinds: Vec::new(),
            variable_bounds: vec![VarBound::NonNegative; num_vars],
        }
    }

    /// Number of variables.
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Number of constraint rows.
    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Append a row.  Entries may be in any order but must name distinct,
    /// in-range columns (checked by [`LinearProgram::validate`]).
    pub fn add_row(&mut self, kind: RowKind, entries: Vec<(usize, Rat)>, rhs: Rat) {
        self.constraint_matrix.push(entries);
        self.rhs.push(rhs);
        self.row_kinds.push(kind);
    }

    /// Structural validation: consistent lengths, in-range and duplicate-free
    /// column indices.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.variable_bounds.len() != n {
            return Err(Error::structural(format!(
                "variable_bounds has length {} but objective has length {n}",
                self.variable_bounds.len()
            )));
        }
        let m = self.constraint_matrix.len();
        if self.rhs.len() != m || self.row_kinds.len() != m {
            return Err(Error::structural(format!(
                "row count mismatch: {} rows, {} rhs, {} kinds",
                m,
                self.rhs.len(),
                self.row_kinds.len()
            )));
        }
        for (i, row) in self.constraint_matrix.iter().enumerate() {
            let mut seen = vec![false; n];
            for (j, _) in row {
                if *j >= n {
                    return Err(Error::structural(format!(
                        "row {i} references column {j} but there are only {n} variables"
                    )));
                }
                if seen[*j] {
                    return Err(Error::structural(format!(
                        "row {i} references column {j} more than once"
                    )));
                }
                seen[*j] = true;
            }
        }
        Ok(())
    }

    /// Exact value of row `i` at point `x`.
    pub fn row_value(&self, i: usize, x: &[Rat]) -> Rat {
        self.constraint_matrix[i]
            .iter()
            .map(|(j, a)| a * &x[*j])
            .fold(Rat::zero(), |acc, t| acc + t)
    }

    /// Exact objective value at point `x`.
    pub fn objective_value(&self, x: &[Rat]) -> Rat {
        dot(&self.objective, x)
    }

    /// Exact dual objective `b · y`.
    pub fn dual_value(&self, y: &[Rat]) -> Rat {
        dot(&self.rhs, y)
    }

    /// `(Aᵀy)_j` for every variable `j`.
    fn transpose_apply(&self, y: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.num_vars()];
        for (i, row) in self.constraint_matrix.iter().enumerate() {
            if y[i].is_zero() {
                continue;
            }
            for (j, a) in row {
                out[*j] += a * &y[i];
            }
        }
        out
    }
}

/// Verdict class of a [`Certificate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// A feasible point (objective ignored).
    Feasible,
    /// No feasible point exists; refuting multipliers attached.
    Infeasible,
    /// Optimal primal point with exactly matching dual multipliers.
    Optimal,
    /// Feasible, with a ray along which the objective grows without bound.
    Unbounded,
}

/// A replayable verdict for a [`LinearProgram`].
///
/// Which fields are populated depends on `kind`: feasible verdicts carry a
/// primal point; infeasible verdicts carry refuting dual multipliers;
/// optimal verdicts carry both plus the shared objective value; unbounded
/// verdicts carry a feasible point and an improving ray.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Verdict class.
    pub kind: CertificateKind,
    /// Feasible primal point (feasible / optimal / unbounded verdicts).
    pub primal_point: Option<Vec<Rat>>,
    /// Dual multipliers, one per row (optimal / infeasible verdicts).
    pub dual_multipliers: Option<Vec<Rat>>,
    /// Improving feasible ray (unbounded verdicts).
    pub ray: Option<Vec<Rat>>,
    /// Optimal objective value (optimal verdicts).
    pub objective_value: Option<Rat>,
}

impl Certificate {
    fn feasible(x: Vec<Rat>) -> Self {
        Certificate {
            kind: CertificateKind::Feasible,
            primal_point: Some(x),
            dual_multipliers: None,
            ray: None,
            objective_value: None,
        }
    }

    fn infeasible(u: Vec<Rat>) -> Self {
        Certificate {
            kind: CertificateKind::Infeasible,
            primal_point: None,
            dual_multipliers: Some(u),
            ray: None,
            objective_value: None,
        }
    }

    fn optimal(x: Vec<Rat>, y: Vec<Rat>, value: Rat) -> Self {
        Certificate {
            kind: CertificateKind::Optimal,
            primal_point: Some(x),
            dual_multipliers: Some(y),
            ray: None,
            objective_value: Some(value),
        }
    }

    fn unbounded(x: Vec<Rat>, ray: Vec<Rat>) -> Self {
        Certificate {
            kind: CertificateKind::Unbounded,
            primal_point: Some(x),
            dual_multipliers: None,
            ray: Some(ray),
            objective_value: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Simplex engine
// ---------------------------------------------------------------------------

/// Dense two-phase simplex tableau over the computational standard form
/// `Ã x̃ = b̃, x̃ >= 0` obtained by splitting free variables, adding surplus
/// columns to `>=` rows, flipping rows to make the right-hand side
/// nonnegative, and appending one artificial column per row.
struct Tableau {
    /// Constraint rows; each has `ncols + 1` cells, the last being the rhs.
    rows: Vec<Vec<Rat>>,
    /// Basic column of each row.
    basis: Vec<usize>,
    /// Rows eliminated as redundant after phase one.
    dropped: Vec<bool>,
    /// Active objective row: `cell[j] = (reduced cost of column j)`, last
    /// cell = current objective value.  Optimal when all eligible cells >= 0.
    obj: Vec<Rat>,
    /// The real objective row, carried through phase-one pivots.
    real_obj: Vec<Rat>,
    /// Total column count excluding the rhs cell.
    ncols: usize,
    /// First artificial column.
    artif_start: usize,
    /// Per-variable computational columns: `(plus, minus)`; `minus` is
    /// present only for free variables.
    var_cols: Vec<(usize, Option<usize>)>,
    /// Row sign flips applied to make `b̃ >= 0`.
    row_sign: Vec<Rat>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars();
        let m = lp.num_rows();

        let mut var_cols = Vec::with_capacity(n);
        let mut next = 0usize;
        for bound in &lp.variable_bounds {
            match bound {
                VarBound::NonNegative => {
                    var_cols.push((next, None));
                    next += 1;
                }
                VarBound::Free => {
                    var_cols.push((next, Some(next + 1)));
                    next += 2;
                }
            }
        }
        let mut surplus_col = vec![None; m];
        for i in 0..m {
            if lp.row_kinds[i] == RowKind::GreaterEqual {
                surplus_col[i] = Some(next);
                next += 1;
            }
        }
        let artif_start = next;
        let ncols = artif_start + m;

        let mut rows = vec![vec![Rat::zero(); ncols + 1]; m];
        let mut row_sign = vec![Rat::one(); m];
        for i in 0..m {
            for (j, a) in &lp.constraint_matrix[i] {
                let (plus, minus) = var_cols[*j];
                rows[i][plus] += a;
                if let Some(mc) = minus {
                    rows[i][mc] -= a;
                }
            }
            if let Some(sc) = surplus_col[i] {
                rows[i][sc] = -Rat::one();
            }
            rows[i][ncols] = lp.rhs[i].clone();
            if rows[i][ncols].is_negative() {
                row_sign[i] = -Rat::one();
                for cell in rows[i].iter_mut() {
                    *cell = -std::mem::take(cell);
                }
            }
            rows[i][artif_start + i] = Rat::one();
        }

        // Phase-one objective: maximise minus the sum of artificials.  With
        // the artificial basis, the reduced cost of column j is
        // `-(column sum) - c_j`, i.e. plus one on artificial columns.
        let mut obj = vec![Rat::zero(); ncols + 1];
        for row in &rows {
            for (cell, r) in obj.iter_mut().zip(row) {
                *cell -= r;
            }
        }
        for i in 0..m {
            obj[artif_start + i] += Rat::one();
        }

        // Real objective row under the artificial basis: reduced costs are
        // simply `-c_j` on original columns, value zero.
        let mut real_obj = vec![Rat::zero(); ncols + 1];
        for (j, c) in lp.objective.iter().enumerate() {
            let (plus, minus) = var_cols[j];
            real_obj[plus] = -c.clone();
            if let Some(mc) = minus {
                real_obj[mc] = c.clone();
            }
        }

        Tableau {
            rows,
            basis: (0..m).map(|i| artif_start + i).collect(),
            dropped: vec![false; m],
            obj,
            real_obj,
            ncols,
            artif_start,
            var_cols,
            row_sign,
        }
    }

    /// Pivot on `(pr, pc)`: row `pr` becomes the basic row of column `pc`.
    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = self.rows[pr][pc].clone().recip();
        if !inv.is_one() {
            for cell in self.rows[pr].iter_mut() {
                if !cell.is_zero() {
                    *cell *= &inv;
                }
            }
        }
        let prow = std::mem::take(&mut self.rows[pr]);
        let nz: Vec<usize> = (0..=self.ncols).filter(|&k| !prow[k].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == pr || self.dropped[i] {
                continue;
            }
            let f = std::mem::replace(&mut self.rows[i][pc], Rat::zero());
            if f.is_zero() {
                continue;
            }
            for &k in &nz {
                if k == pc {
                    continue;
                }
                let t = &f * &prow[k];
                self.rows[i][k] -= t;
            }
        }
        for objrow in [&mut self.obj, &mut self.real_obj] {
            let f = std::mem::replace(&mut objrow[pc], Rat::zero());
            if !f.is_zero() {
                for &k in &nz {
                    if k == pc {
                        continue;
                    }
                    let t = &f * &prow[k];
                    objrow[k] -= t;
                }
            }
        }
        self.rows[pr] = prow;
        self.basis[pr] = pc;
    }

    /// Bland entering column: the smallest eligible column with a negative
    /// reduced cost.  Artificial columns are never eligible.
    fn entering(&self) -> Option<usize> {
        (0..self.artif_start).find(|&j| self.obj[j].is_negative())
    }

    /// Bland leaving row for entering column `jc`: minimum ratio over
    /// positive column entries, ties broken by the smallest basic column.
    fn leaving(&self, jc: usize) -> Option<usize> {
        let mut best: Option<(Rat, usize, usize)> = None;
        for i in 0..self.rows.len() {
            if self.dropped[i] {
                continue;
            }
            let a = &self.rows[i][jc];
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.rows[i][self.ncols] / a;
            let candidate = (ratio, self.basis[i], i);
            best = match best {
                None => Some(candidate),
                Some(cur) => {
                    if candidate.0 < cur.0 || (candidate.0 == cur.0 && candidate.1 < cur.1) {
                        Some(candidate)
                    } else {
                        Some(cur)
                    }
                }
            };
        }
        best.map(|(_, _, i)| i)
    }

    /// Run simplex iterations until optimality or unboundedness.
    fn iterate(&mut self) -> SimplexEnd {
        loop {
            let Some(jc) = self.entering() else {
                return SimplexEnd::Optimal;
            };
            let Some(ir) = self.leaving(jc) else {
                return SimplexEnd::Unbounded { entering: jc };
            };
            self.pivot(ir, jc);
        }
    }

    /// After a zero-value phase one, pivot basic artificials out of the
    /// basis or drop their rows as redundant.
    fn purge_artificials(&mut self) {
        for i in 0..self.rows.len() {
            if self.dropped[i] || self.basis[i] < self.artif_start {
                continue;
            }
            match (0..self.artif_start).find(|&j| !self.rows[i][j].is_zero()) {
                // The basic artificial sits at value zero, so this pivot is
                // degenerate and preserves feasibility regardless of sign.
                Some(j) => self.pivot(i, j),
                None => self.dropped[i] = true,
            }
        }
    }

    /// Map the current basic solution back to the original variable space.
    fn primal_point(&self) -> Vec<Rat> {
        let mut comp = vec![Rat::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            if !self.dropped[i] {
                comp[b] = self.rows[i][self.ncols].clone();
            }
        }
        self.var_cols
            .iter()
            .map(|&(plus, minus)| match minus {
                None => comp[plus].clone(),
                Some(mc) => &comp[plus] - &comp[mc],
            })
            .collect()
    }

    /// Dual multipliers on the original rows, read from an objective row's
    /// artificial reduced costs.  `shift` is subtracted from each raw cell
    /// (phase one prices artificials at minus one, so its cells sit one
    /// above the multiplier; the real objective prices them at zero).
    fn dual_from(&self, objrow: &[Rat], shift: &Rat) -> Vec<Rat> {
        (0..self.rows.len())
            .map(|i| {
                if self.dropped[i] {
                    Rat::zero()
                } else {
                    (&objrow[self.artif_start + i] - shift) * &self.row_sign[i]
                }
            })
            .collect()
    }

    /// Feasible ray in the original variable space for an entering column
    /// with no positive tableau entries.
    fn ray(&self, entering: usize) -> Vec<Rat> {
        let mut comp = vec![Rat::zero(); self.ncols];
        comp[entering] = Rat::one();
        for (i, &b) in self.basis.iter().enumerate() {
            if !self.dropped[i] {
                comp[b] = -self.rows[i][entering].clone();
            }
        }
        self.var_cols
            .iter()
            .map(|&(plus, minus)| match minus {
                None => comp[plus].clone(),
                Some(mc) => &comp[plus] - &comp[mc],
            })
            .collect()
    }
}

enum SimplexEnd {
    Optimal,
    Unbounded { entering: usize },
}

/// Outcome of phase one, shared by [`solve`] and [`solve_feasibility`].
enum PhaseOne {
    Feasible(Tableau),
    Infeasible(Certificate),
}

fn phase_one(lp: &LinearProgram) -> PhaseOne {
    let mut t = Tableau::build(lp);
    match t.iterate() {
        SimplexEnd::Optimal => {}
        // The phase-one objective is bounded above by zero, so an unbounded
        // direction cannot occur.
        SimplexEnd::Unbounded { .. } => unreachable!("phase-one objective is bounded"),
    }
    let value = t.obj[t.ncols].clone();
    if value.is_negative() {
        let u = t.dual_from(&t.obj.clone(), &Rat::one());
        PhaseOne::Infeasible(Certificate::infeasible(u))
    } else {
        t.purge_artificials();
        PhaseOne::Feasible(t)
    }
}

/// Solve the program to a replayable verdict: optimal, infeasible, or
/// unbounded.  Exact throughout; never returns a feasible-only verdict.
pub fn solve(lp: &LinearProgram) -> Result<Certificate> {
    lp.validate()?;
    let cert = match phase_one(lp) {
        PhaseOne::Infeasible(c) => c,
        PhaseOne::Feasible(mut t) => {
            t.obj = t.real_obj.clone();
            match t.iterate() {
                SimplexEnd::Optimal => {
                    let x = t.primal_point();
                    let y = t.dual_from(&t.obj.clone(), &Rat::zero());
                    let value = lp.objective_value(&x);
                    Certificate::optimal(x, y, value)
                }
                SimplexEnd::Unbounded { entering } => {
                    Certificate::unbounded(t.primal_point(), t.ray(entering))
                }
            }
        }
    };
    debug_assert_eq!(
        verify_certificate_detailed(lp, &cert),
        Ok(()),
        "solver produced a certificate that fails replay"
    );
    Ok(cert)
}

/// Decide feasibility only: returns a feasible-point certificate or an
/// infeasibility certificate, ignoring the objective.
pub fn solve_feasibility(lp: &LinearProgram) -> Result<Certificate> {
    lp.validate()?;
    let cert = match phase_one(lp) {
        PhaseOne::Infeasible(c) => c,
        PhaseOne::Feasible(t) => Certificate::feasible(t.primal_point()),
    };
    debug_assert_eq!(
        verify_certificate_detailed(lp, &cert),
        Ok(()),
        "feasibility certificate fails replay"
    );
    Ok(cert)
}

// ---------------------------------------------------------------------------
// Certificate replay
// ---------------------------------------------------------------------------

/// Replay a certificate against a program, independent of how it was found.
///
/// Returns `true` exactly when the verdict's algebraic conditions hold; see
/// [`verify_certificate_detailed`] for the first failing condition.
pub fn verify_certificate(lp: &LinearProgram, cert: &Certificate) -> bool {
    verify_certificate_detailed(lp, cert).is_ok()
}

/// As [`verify_certificate`], reporting the first failed condition.
pub fn verify_certificate_detailed(
    lp: &LinearProgram,
    cert: &Certificate,
) -> std::result::Result<(), String> {
    if lp.validate().is_err() {
        return Err("program fails structural validation".into());
    }
    match cert.kind {
        CertificateKind::Feasible => {
            let x = require(&cert.primal_point, lp.num_vars(), "primal point")?;
            check_primal_feasible(lp, x)
        }
        CertificateKind::Infeasible => {
            let u = require(&cert.dual_multipliers, lp.num_rows(), "dual multipliers")?;
            check_farkas(lp, u)
        }
        CertificateKind::Optimal => {
            let x = require(&cert.primal_point, lp.num_vars(), "primal point")?;
            let y = require(&cert.dual_multipliers, lp.num_rows(), "dual multipliers")?;
            check_primal_feasible(lp, x)?;
            check_dual_feasible(lp, y)?;
            let primal = lp.objective_value(x);
            let dual = lp.dual_value(y);
            if primal != dual {
                return Err(format!(
                    "objective gap: primal value {primal} but dual value {dual}"
                ));
            }
            if let Some(v) = &cert.objective_value {
                if *v != primal {
                    return Err(format!(
                        "stated objective value {v} differs from primal value {primal}"
                    ));
                }
            }
            Ok(())
        }
        CertificateKind::Unbounded => {
            let x = require(&cert.primal_point, lp.num_vars(), "primal point")?;
            let r = require(&cert.ray, lp.num_vars(), "ray")?;
            check_primal_feasible(lp, x)?;
            check_ray(lp, r)
        }
    }
}

fn require<'a>(
    field: &'a Option<Vec<Rat>>,
    expect_len: usize,
    what: &str,
) -> std::result::Result<&'a Vec<Rat>, String> {
    match field {
        None => Err(format!("certificate is missing its {what}")),
        Some(v) if v.len() != expect_len => Err(format!(
            "{what} has length {} but {expect_len} is required",
            v.len()
        )),
        Some(v) => Ok(v),
    }
}

fn check_primal_feasible(lp: &LinearProgram, x: &[Rat]) -> std::result::Result<(), String> {
    for (j, bound) in lp.variable_bounds.iter().enumerate() {
        if *bound == VarBound::NonNegative && x[j].is_negative() {
            return Err(format!("variable {j} is negative at {}", x[j]));
        }
    }
    for i in 0..lp.num_rows() {
        let lhs = lp.row_value(i, x);
        match lp.row_kinds[i] {
            RowKind::Equality if lhs != lp.rhs[i] => {
                return Err(format!(
                    "equality row {i} evaluates to {lhs}, required {}",
                    lp.rhs[i]
                ));
            }
            RowKind::GreaterEqual if lhs < lp.rhs[i] => {
                return Err(format!(
                    "row {i} evaluates to {lhs}, below its bound {}",
                    lp.rhs[i]
                ));
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_dual_feasible(lp: &LinearProgram, y: &[Rat]) -> std::result::Result<(), String> {
    for i in 0..lp.num_rows() {
        if lp.row_kinds[i] == RowKind::GreaterEqual && y[i].is_positive() {
            return Err(format!("multiplier on >= row {i} is positive at {}", y[i]));
        }
    }
    let aty = lp.transpose_apply(y);
    for (j, bound) in lp.variable_bounds.iter().enumerate() {
        match bound {
            VarBound::NonNegative if aty[j] < lp.objective[j] => {
                return Err(format!(
                    "dual slack on variable {j}: (Aᵀy)_{j} = {} is below c_{j} = {}",
                    aty[j], lp.objective[j]
                ));
            }
            VarBound::Free if aty[j] != lp.objective[j] => {
                return Err(format!(
                    "free variable {j}: (Aᵀy)_{j} = {} must equal c_{j} = {}",
                    aty[j], lp.objective[j]
                ));
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_farkas(lp: &LinearProgram, u: &[Rat]) -> std::result::Result<(), String> {
    for i in 0..lp.num_rows() {
        if lp.row_kinds[i] == RowKind::GreaterEqual && u[i].is_positive() {
            return Err(format!("refuting multiplier on >= row {i} is positive"));
        }
    }
    let atu = lp.transpose_apply(u);
    for (j, bound) in lp.variable_bounds.iter().enumerate() {
        match bound {
            VarBound::NonNegative if atu[j].is_negative() => {
                return Err(format!("refutation has negative column value at variable {j}"));
            }
            VarBound::Free if !atu[j].is_zero() => {
                return Err(format!(
                    "refutation has nonzero column value at free variable {j}"
                ));
            }
            _ => {}
        }
    }
    let ub = lp.dual_value(u);
    if !ub.is_negative() {
        return Err(format!("refutation value u·b = {ub} is not negative"));
    }
    Ok(())
}

fn check_ray(lp: &LinearProgram, r: &[Rat]) -> std::result::Result<(), String> {
    for (j, bound) in lp.variable_bounds.iter().enumerate() {
        if *bound == VarBound::NonNegative && r[j].is_negative() {
            return Err(format!("ray is negative on nonnegative variable {j}"));
        }
    }
    for i in 0..lp.num_rows() {
        let v = lp.row_value(i, r);
        match lp.row_kinds[i] {
            RowKind::Equality if !v.is_zero() => {
                return Err(format!("ray does not annihilate equality row {i}"));
            }
            RowKind::GreaterEqual if v.is_negative() => {
                return Err(format!("ray decreases >= row {i}"));
            }
            _ => {}
        }
    }
    let gain = lp.objective_value(r);
    if !gain.is_positive() {
        return Err(format!("ray objective gain {gain} is not positive"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn le_row(entries: Vec<(usize, i64)>, rhs: i64) -> (Vec<(usize, Rat)>, Rat) {
        // Express `a·x <= b` as `-a·x >= -b`.
        (
            entries.into_iter().map(|(j, a)| (j, rat_int(-a))).collect(),
            rat_int(-rhs),
        )
    }

    fn int_entries(entries: Vec<(usize, i64)>) -> Vec<(usize, Rat)> {
        entries.into_iter().map(|(j, a)| (j, rat_int(a))).collect()
    }

    #[test]
    fn box_maximum() {
        // max x + y with x <= 4, y <= 3: optimum 7 at (4, 3).
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat_int(1), rat_int(1)];
        let (e, b) = le_row(vec![(0, 1)], 4);
        lp.add_row(RowKind::GreaterEqual, e, b);
        let (e, b) = le_row(vec![(1, 1)], 3);
        lp.add_row(RowKind::GreaterEqual, e, b);
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Optimal);
        assert_eq!(cert.objective_value, Some(rat_int(7)));
        assert_eq!(cert.primal_point, Some(vec![rat_int(4), rat_int(3)]));
        assert!(verify_certificate(&lp, &cert));
    }

    #[test]
    fn production_example() {
        // max 3x + 5y with x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6).
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat_int(3), rat_int(5)];
        for (entries, rhs) in [
            (vec![(0, 1)], 4),
            (vec![(1, 2)], 12),
            (vec![(0, 3), (1, 2)], 18),
        ] {
            let (e, b) = le_row(entries, rhs);
            lp.add_row(RowKind::GreaterEqual, e, b);
        }
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Optimal);
        assert_eq!(cert.objective_value, Some(rat_int(36)));
        assert_eq!(cert.primal_point, Some(vec![rat_int(2), rat_int(6)]));
        let y = cert.dual_multipliers.as_ref().unwrap();
        assert_eq!(lp.dual_value(y), rat_int(36));
    }

    #[test]
    fn equality_with_free_variable() {
        // max x subject to x + y = 2, y >= 0, x free: optimum 2 at (2, 0).
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat_int(1), rat_int(0)];
        lp.variable_bounds = vec![VarBound::Free, VarBound::NonNegative];
        lp.add_row(
            RowKind::Equality,
            int_entries(vec![(0, 1), (1, 1)]),
            rat_int(2),
        );
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Optimal);
        assert_eq!(cert.objective_value, Some(rat_int(2)));
        // The dual multiplier on the equality row must price the free
        // variable exactly: y_0 * 1 = 1.
        assert_eq!(cert.dual_multipliers, Some(vec![rat_int(1)]));
    }

    #[test]
    fn infeasible_interval() {
        // x >= 1 together with -x >= 0 (i.e. x <= 0).
        let mut lp = LinearProgram::new(1);
        lp.add_row(RowKind::GreaterEqual, int_entries(vec![(0, 1)]), rat_int(1));
        lp.add_row(RowKind::GreaterEqual, int_entries(vec![(0, -1)]), rat_int(0));
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Infeasible);
        assert!(verify_certificate(&lp, &cert));
    }

    #[test]
    fn infeasible_parallel_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(
            RowKind::Equality,
            int_entries(vec![(0, 1), (1, 1)]),
            rat_int(2),
        );
        lp.add_row(
            RowKind::Equality,
            int_entries(vec![(0, 1), (1, 1)]),
            rat_int(3),
        );
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Infeasible);
        assert!(verify_certificate(&lp, &cert));
    }

    #[test]
    fn unbounded_with_ray() {
        // max x subject to x - y >= 0: push x and y up together forever.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat_int(1), rat_int(0)];
        lp.add_row(
            RowKind::GreaterEqual,
            int_entries(vec![(0, 1), (1, -1)]),
            rat_int(0),
        );
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Unbounded);
        assert!(verify_certificate(&lp, &cert));
        let ray = cert.ray.as_ref().unwrap();
        assert!(lp.objective_value(ray).is_positive());
    }

    #[test]
    fn degenerate_cycling_guard() {
        // A classic degenerate program on which naive largest-coefficient
        // pivoting cycles; Bland's rule must terminate at value 1/20.
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![rat(3, 4), rat_int(-150), rat(1, 50), rat_int(-6)];
        let rows: Vec<(Vec<(usize, Rat)>, Rat)> = vec![
            (
                vec![(0, rat(-1, 4)), (1, rat_int(60)), (2, rat(1, 25)), (3, rat_int(-9))],
                rat_int(0),
            ),
            (
                vec![(0, rat(-1, 2)), (1, rat_int(90)), (2, rat(1, 50)), (3, rat_int(-3))],
                rat_int(0),
            ),
            (vec![(2, rat_int(-1))], rat_int(-1)),
        ];
        for (e, b) in rows {
            lp.add_row(RowKind::GreaterEqual, e, b);
        }
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Optimal);
        assert_eq!(cert.objective_value, Some(rat(1, 20)));
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat_int(1), rat_int(0)];
        for _ in 0..3 {
            lp.add_row(
                RowKind::Equality,
                int_entries(vec![(0, 1), (1, 1)]),
                rat_int(2),
            );
        }
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Optimal);
        assert_eq!(cert.objective_value, Some(rat_int(2)));
        assert_eq!(cert.dual_multipliers.as_ref().map(|y| y.len()), Some(3));
    }

    #[test]
    fn feasibility_only() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(
            RowKind::Equality,
            int_entries(vec![(0, 1), (1, 2)]),
            rat_int(3),
        );
        let cert = solve_feasibility(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Feasible);
        assert!(verify_certificate(&lp, &cert));
        assert!(cert.dual_multipliers.is_none());
    }

    #[test]
    fn verifier_rejects_tampering() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat_int(1), rat_int(1)];
        let (e, b) = le_row(vec![(0, 1), (1, 1)], 5);
        lp.add_row(RowKind::GreaterEqual, e, b);
        let cert = solve(&lp).unwrap();
        assert!(verify_certificate(&lp, &cert));

        let mut bad = cert.clone();
        bad.primal_point.as_mut().unwrap()[0] += rat_int(1);
        assert!(!verify_certificate(&lp, &bad));

        let mut bad = cert.clone();
        bad.objective_value = Some(rat_int(99));
        assert!(!verify_certificate(&lp, &bad));

        let mut bad = cert.clone();
        bad.dual_multipliers.as_mut().unwrap()[0] = rat_int(7);
        assert!(!verify_certificate(&lp, &bad));

        let mut bad = cert;
        bad.primal_point = None;
        assert!(!verify_certificate(&lp, &bad));
    }

    #[test]
    fn validation_rejects_malformed_programs() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(RowKind::Equality, int_entries(vec![(3, 1)]), rat_int(0));
        assert!(lp.validate().is_err());

        let mut lp = LinearProgram::new(2);
        lp.add_row(
            RowKind::Equality,
            int_entries(vec![(0, 1), (0, 2)]),
            rat_int(0),
        );
        assert!(lp.validate().is_err());

        let mut lp = LinearProgram::new(2);
        lp.variable_bounds.pop();
        assert!(lp.validate().is_err());
    }

    #[test]
    fn zero_rows_and_zero_objective() {
        let lp = LinearProgram::new(3);
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Optimal);
        assert_eq!(cert.objective_value, Some(rat_int(0)));
    }

    #[test]
    fn free_variable_negative_optimum() {
        // max -x with x free and x >= -3 forces x = -3 (value 3).
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![rat_int(-1)];
        lp.variable_bounds = vec![VarBound::Free];
        lp.add_row(RowKind::GreaterEqual, int_entries(vec![(0, 1)]), rat_int(-3));
        let cert = solve(&lp).unwrap();
        assert_eq!(cert.kind, CertificateKind::Optimal);
        assert_eq!(cert.primal_point, Some(vec![rat_int(-3)]));
        assert_eq!(cert.objective_value, Some(rat_int(3)));
    }

    #[test]
    fn row_scaling_preserves_verdict_and_value() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat_int(2), rat_int(3)];
        let (e, b) = le_row(vec![(0, 1), (1, 2)], 6);
        lp.add_row(RowKind::GreaterEqual, e, b);
        let (e, b) = le_row(vec![(0, 2), (1, 1)], 6);
        lp.add_row(RowKind::GreaterEqual, e, b);
        let base = solve(&lp).unwrap();

        let mut scaled = lp.clone();
        let factor = rat(7, 3);
        for (j, a) in scaled.constraint_matrix[1].iter_mut() {
            let _ = j;
            *a *= &factor;
        }
        scaled.rhs[1] *= &factor;
        let after = solve(&scaled).unwrap();
        assert_eq!(base.kind, after.kind);
        assert_eq!(base.objective_value, after.objective_value);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_rat() -> impl Strategy<Value = Rat> {
            (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
        }

        fn small_lp() -> impl Strategy<Value = LinearProgram> {
            (1usize..=4, 0usize..=4)
                .prop_flat_map(|(n, m)| {
                    let objective = prop::collection::vec(small_rat(), n);
                    let bounds = prop::collection::vec(
                        prop_oneof![
                            3 => Just(VarBound::NonNegative),
                            1 => Just(VarBound::Free)
                        ],
                        n,
                    );
                    let rows = prop::collection::vec(
                        (
                            prop::collection::vec(small_rat(), n),
                            small_rat(),
                            prop_oneof![
                                1 => Just(RowKind::Equality),
                                2 => Just(RowKind::GreaterEqual)
                            ],
                        ),
                        m,
                    );
                    (objective, bounds, rows)
                })
                .prop_map(|(objective, bounds, rows)| {
                    let n = objective.len();
                    let mut lp = LinearProgram::new(n);
                    lp.objective = objective;
                    lp.variable_bounds = bounds;
                    for (coeffs, rhs, kind) in rows {
                        let entries = coeffs
                            .into_iter()
                            .enumerate()
                            .filter(|(_, a)| !a.is_zero())
                            .collect();
                        lp.add_row(kind, entries, rhs);
                    }
                    lp
                })
        }

        proptest! {
            #[test]
            fn every_solve_verifies(lp in small_lp()) {
                let cert = solve(&lp).unwrap();
                prop_assert_eq!(verify_certificate_detailed(&lp, &cert), Ok(()));
            }

            #[test]
            fn optimal_means_zero_duality_gap(lp in small_lp()) {
                let cert = solve(&lp).unwrap();
                if cert.kind == CertificateKind::Optimal {
                    let x = cert.primal_point.as_ref().unwrap();
                    let y = cert.dual_multipliers.as_ref().unwrap();
                    prop_assert_eq!(lp.objective_value(x), lp.dual_value(y));
                }
            }

            #[test]
            fn positive_row_scaling_is_invariant(
                lp in small_lp(),
                num in 1i64..=5,
                den in 1i64..=5,
            ) {
                prop_assume!(lp.num_rows() > 0);
                let factor = rat(num, den);
                let mut scaled = lp.clone();
                for (_, a) in scaled.constraint_matrix[0].iter_mut() {
                    *a *= &factor;
                }
                scaled.rhs[0] *= &factor;
                let base = solve(&lp).unwrap();
                let after = solve(&scaled).unwrap();
                prop_assert_eq!(base.kind, after.kind);
                if base.kind == CertificateKind::Optimal {
                    prop_assert_eq!(base.objective_value, after.objective_value);
                }
            }

            #[test]
            fn feasibility_agrees_with_solve(lp in small_lp()) {
                let full = solve(&lp).unwrap();
                let feas = solve_feasibility(&lp).unwrap();
                let full_feasible = full.kind != CertificateKind::Infeasible;
                prop_assert_eq!(feas.kind == CertificateKind::Feasible, full_feasible);
                prop_assert_eq!(verify_certificate_detailed(&lp, &feas), Ok(()));
            }
        }
    }
}
