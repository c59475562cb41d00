//! Two-phase dense simplex over exact rationals.
//!
//! Free (cost-kind) variables are split into a difference of two
//! non-negative columns. Every row receives an artificial variable for
//! phase one; remaining basic artificials are driven out or their rows
//! dropped as redundant before phase two. Pivoting follows Bland's rule
//! throughout, so the algorithm terminates and is deterministic.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use super::{Assignment, LpError, LpProblem, Rat, Relation, VarId, VarKind};

struct Tableau {
    rows: Vec<Vec<Rat>>,
    obj: Vec<Rat>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rat {
        &self.rows[row][self.width - 1]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = {
            let v = &self.rows[row][col];
            debug_assert!(!v.is_zero());
            Rat::one() / v.clone()
        };
        for x in self.rows[row].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (x, p) in r.iter_mut().zip(&pivot_row) {
                *x -= &factor * p;
            }
        }
        if !self.obj[col].is_zero() {
            let factor = self.obj[col].clone();
            for (x, p) in self.obj.iter_mut().zip(&pivot_row) {
                *x -= &factor * p;
            }
        }
        self.basis[row] = col;
    }

    /// Install a cost vector and restore the canonical form for the
    /// current basis.
    fn set_costs(&mut self, costs: &[Rat]) {
        self.obj = costs.to_vec();
        self.obj.push(Rat::zero());
        for i in 0..self.rows.len() {
            let c = self.obj[self.basis[i]].clone();
            if !c.is_zero() {
                let row = self.rows[i].clone();
                for (x, p) in self.obj.iter_mut().zip(&row) {
                    *x -= &c * p;
                }
            }
        }
    }

    /// Run simplex iterations until optimal or unbounded. Entering
    /// columns are restricted by `allowed`.
    fn iterate(&mut self, allowed: impl Fn(usize) -> bool) -> Result<(), LpError> {
        loop {
            // Bland: lowest-index column with a negative reduced cost.
            let entering = (0..self.width - 1)
                .find(|&j| allowed(j) && self.obj[j].is_negative());
            let Some(entering) = entering else {
                return Ok(());
            };
            // Minimum ratio test; Bland tie-break on the basic variable index.
            let mut leaving: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][entering];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                match &leaving {
                    None => leaving = Some((i, ratio)),
                    Some((best_row, best)) => {
                        if ratio < *best
                            || (ratio == *best && self.basis[i] < self.basis[*best_row])
                        {
                            leaving = Some((i, ratio));
                        }
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, entering);
        }
    }
}

pub(super) fn solve(p: &LpProblem) -> Result<Assignment, LpError> {
    // Column layout: variable columns (free vars split in two), then one
    // slack per inequality, then one artificial per row, then the rhs.
    let mut col_of: BTreeMap<VarId, (usize, Option<usize>)> = BTreeMap::new();
    let mut ncols = 0usize;
    for v in &p.vars {
        match v.kind {
            VarKind::Potential => {
                col_of.insert(v.id, (ncols, None));
                ncols += 1;
            }
            VarKind::Cost => {
                col_of.insert(v.id, (ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
    }
    let var_cols = ncols;

    struct Row {
        coeffs: Vec<Rat>,
        rel: Relation,
        rhs: Rat,
        provenance: String,
    }
    let mut rows = Vec::new();
    for c in &p.constraints {
        let (expr, rel) = c.normalized();
        let mut coeffs = vec![Rat::zero(); var_cols];
        for (v, coeff) in expr.terms() {
            let (pos, neg) = col_of
                .get(&v)
                .copied()
                .ok_or_else(|| LpError::Infeasible(format!("unregistered variable {}", v)))?;
            coeffs[pos] += coeff;
            if let Some(neg) = neg {
                coeffs[neg] -= coeff;
            }
        }
        rows.push(Row {
            coeffs,
            rel,
            rhs: -expr.constant_part().clone(),
            provenance: c.provenance.clone(),
        });
    }

    let n_slack = rows.iter().filter(|r| r.rel == Relation::Le).count();
    let m = rows.len();
    let slack_offset = var_cols;
    let art_offset = var_cols + n_slack;
    let width = art_offset + m + 1;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        obj: Vec::new(),
        basis: Vec::with_capacity(m),
        width,
    };
    let mut slack_idx = 0usize;
    for (i, row) in rows.iter().enumerate() {
        let mut full = vec![Rat::zero(); width];
        full[..var_cols].clone_from_slice(&row.coeffs);
        if row.rel == Relation::Le {
            full[slack_offset + slack_idx] = Rat::one();
            slack_idx += 1;
        }
        full[width - 1] = row.rhs.clone();
        if full[width - 1].is_negative() {
            for x in full.iter_mut() {
                *x = -x.clone();
            }
        }
        full[art_offset + i] = Rat::one();
        t.rows.push(full);
        t.basis.push(art_offset + i);
    }

    // Phase one: minimize the sum of artificials.
    let mut phase1 = vec![Rat::zero(); width - 1];
    for j in art_offset..width - 1 {
        phase1[j] = Rat::one();
    }
    t.set_costs(&phase1);
    t.iterate(|_| true)?;
    let infeasibility = -t.obj[width - 1].clone();
    if infeasibility.is_positive() {
        let mut stuck: Vec<&str> = Vec::new();
        for (i, &b) in t.basis.iter().enumerate() {
            if b >= art_offset && t.rhs(i).is_positive() {
                stuck.push(&rows[b - art_offset].provenance);
            }
        }
        stuck.dedup();
        return Err(LpError::Infeasible(format!(
            "phase-1 residual {}; conflicting constraints include: {}",
            infeasibility,
            stuck.join("; ")
        )));
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut redundant = Vec::new();
    for i in 0..t.rows.len() {
        if t.basis[i] < art_offset {
            continue;
        }
        match (0..art_offset).find(|&j| !t.rows[i][j].is_zero()) {
            Some(j) => t.pivot(i, j),
            None => redundant.push(i),
        }
    }
    for &i in redundant.iter().rev() {
        t.rows.remove(i);
        t.basis.remove(i);
    }

    // Phase two: the real objective.
    let mut phase2 = vec![Rat::zero(); width - 1];
    for (v, coeff) in p.objective.terms() {
        if let Some(&(pos, neg)) = col_of.get(&v) {
            phase2[pos] += coeff;
            if let Some(neg) = neg {
                phase2[neg] -= coeff;
            }
        }
    }
    t.set_costs(&phase2);
    t.iterate(|j| j < art_offset)?;

    let mut x = vec![Rat::zero(); width - 1];
    for (i, &b) in t.basis.iter().enumerate() {
        x[b] = t.rhs(i).clone();
    }
    let mut assignment = Assignment::new();
    for v in &p.vars {
        let (pos, neg) = col_of[&v.id];
        let value = match neg {
            None => x[pos].clone(),
            Some(neg) => &x[pos] - &x[neg],
        };
        assignment.insert(v.id, value);
    }

    debug_assert!(
        p.constraints
            .iter()
            .all(|c| c.satisfied_by(&assignment).unwrap_or(false)),
        "simplex produced an assignment violating a constraint"
    );
    Ok(assignment)
}
