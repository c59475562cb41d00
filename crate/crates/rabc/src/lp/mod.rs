//! Exact-rational linear constraint store and simplex solver.
//!
//! All arithmetic is arbitrary-precision rational: a returned assignment
//! satisfies every constraint literally, with no epsilon anywhere. The
//! solver is a dense two-phase simplex with Bland's anti-cycling rule,
//! which keeps solutions deterministic for a fixed variable and
//! constraint insertion order.

mod simplex;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Identifier of an annotation variable, unique per analysis session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Domain of an annotation variable.
///
/// Potential-kind variables range over `[0, +inf)`; cost-kind variables
/// are sign-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Potential,
    Cost,
}

/// Registry entry for one variable of an [`LpProblem`].
#[derive(Debug, Clone)]
pub struct VarInfo {
    pub id: VarId,
    pub kind: VarKind,
    pub name: String,
}

/// Affine expression over annotation variables with rational coefficients.
///
/// Kept canonical: zero-coefficient terms are never retained.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinExpr {
    terms: BTreeMap<VarId, Rat>,
    constant: Rat,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        let mut e = LinExpr::zero();
        e.add_term(v, Rat::one());
        e
    }

    pub fn add_term(&mut self, v: VarId, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(v).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add_const(&mut self, c: Rat) {
        self.constant += c;
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.add_term(*v, c.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        self.plus(&other.times(&-Rat::one()))
    }

    pub fn times(&self, k: &Rat) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, &Rat)> {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.keys().copied()
    }

    /// Exact value of the expression under an assignment.
    pub fn eval(&self, a: &Assignment) -> Result<Rat, LpError> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            let val = a.get(v).ok_or(LpError::Unassigned(*v))?;
            acc += c * val;
        }
        Ok(acc)
    }

    /// Render with a caller-supplied variable namer.
    pub fn display_with(&self, name: impl Fn(VarId) -> String) -> String {
        let mut out = String::new();
        let mut first = true;
        for (v, c) in &self.terms {
            if first {
                if c.is_negative() {
                    out.push_str("-");
                }
                first = false;
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            let mag = c.abs();
            if !mag.is_one() {
                out.push_str(&format!("{} ", mag));
            }
            out.push_str(&name(*v));
        }
        if !self.constant.is_zero() || first {
            if first {
                out.push_str(&format!("{}", self.constant));
            } else if self.constant.is_negative() {
                out.push_str(&format!(" - {}", self.constant.abs()));
            } else {
                out.push_str(&format!(" + {}", self.constant));
            }
        }
        out
    }
}

/// Relation of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Le => write!(f, "<="),
            Relation::Eq => write!(f, "="),
        }
    }
}

/// A linear (in)equality with a provenance note naming the rule and
/// source location that emitted it.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub lhs: LinExpr,
    pub rel: Relation,
    pub rhs: LinExpr,
    pub provenance: String,
}

impl Constraint {
    pub fn le(lhs: LinExpr, rhs: LinExpr, provenance: impl Into<String>) -> Self {
        Constraint {
            lhs,
            rel: Relation::Le,
            rhs,
            provenance: provenance.into(),
        }
    }

    pub fn eq(lhs: LinExpr, rhs: LinExpr, provenance: impl Into<String>) -> Self {
        Constraint {
            lhs,
            rel: Relation::Eq,
            rhs,
            provenance: provenance.into(),
        }
    }

    /// Normal form `expr <= 0` or `expr = 0`.
    pub fn normalized(&self) -> (LinExpr, Relation) {
        (self.lhs.minus(&self.rhs), self.rel)
    }

    /// Exact satisfaction check under an assignment.
    pub fn satisfied_by(&self, a: &Assignment) -> Result<bool, LpError> {
        let v = self.lhs.minus(&self.rhs).eval(a)?;
        Ok(match self.rel {
            Relation::Le => !v.is_positive(),
            Relation::Eq => v.is_zero(),
        })
    }

    pub fn display_with(&self, name: impl Fn(VarId) -> String + Copy) -> String {
        format!(
            "{} {} {}",
            self.lhs.display_with(name),
            self.rel,
            self.rhs.display_with(name)
        )
    }
}

/// Solved values, one per registered variable.
pub type Assignment = BTreeMap<VarId, Rat>;

/// A complete linear program: variable registry, constraints, and an
/// objective to minimize.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub vars: Vec<VarInfo>,
    pub constraints: Vec<Constraint>,
    pub objective: LinExpr,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("infeasible linear program: {0}")]
    Infeasible(String),
    #[error("objective unbounded below (missing domain constraint)")]
    Unbounded,
    #[error("variable {0} has no assigned value")]
    Unassigned(VarId),
}

impl LpProblem {
    /// Minimize the objective subject to all constraints.
    ///
    /// The returned assignment covers every registered variable and
    /// satisfies every constraint exactly.
    pub fn solve(&self) -> Result<Assignment, LpError> {
        simplex::solve(self)
    }

    /// Write the problem in CPLEX-LP textual format.
    pub fn dump_cplex_lp(&self, out: &mut dyn Write, comment: &str) -> io::Result<()> {
        let name = |v: VarId| -> String {
            self.vars
                .iter()
                .find(|i| i.id == v)
                .map(|i| i.name.clone())
                .unwrap_or_else(|| format!("{}", v))
        };
        writeln!(out, "\\ {}", comment)?;
        writeln!(out, "Minimize")?;
        writeln!(out, " obj: {}", lp_format_expr(&self.objective, &name))?;
        writeln!(out, "Subject To")?;
        for (i, c) in self.constraints.iter().enumerate() {
            let (expr, rel) = c.normalized();
            let rhs = -expr.constant_part().clone();
            let mut body = LinExpr::zero();
            for (v, coeff) in expr.terms() {
                body.add_term(v, coeff.clone());
            }
            writeln!(
                out,
                " c{}: {} {} {}",
                i,
                lp_format_expr(&body, &name),
                rel,
                lp_format_rat(&rhs)
            )?;
        }
        writeln!(out, "Bounds")?;
        for v in &self.vars {
            if v.kind == VarKind::Cost {
                writeln!(out, " {} free", v.name)?;
            }
        }
        writeln!(out, "End")?;
        Ok(())
    }
}

fn lp_format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        return r.numer().to_string();
    }
    // The LP format only accepts decimal numbers; our coefficients are
    // integers or dyadic rationals in practice, which print exactly.
    let mut den = r.denom().clone();
    let mut scale = BigInt::one();
    let ten = BigInt::from(10);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut digits = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        scale *= &five;
        digits += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        scale *= &two;
        digits += 1;
    }
    if !den.is_one() {
        // Non-terminating decimal; fall back to the exact fraction, which
        // some readers accept and which keeps the dump lossless.
        return format!("{}/{}", r.numer(), r.denom());
    }
    let scaled = r.numer() * &scale;
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    while s.len() <= digits {
        s.insert(0, '0');
    }
    s.insert(s.len() - digits, '.');
    let _ = ten;
    if neg {
        format!("-{}", s)
    } else {
        s
    }
}

fn lp_format_expr(e: &LinExpr, name: &impl Fn(VarId) -> String) -> String {
    let mut out = String::new();
    let mut first = true;
    for (v, c) in e.terms() {
        if first {
            if c.is_negative() {
                out.push_str("- ");
            }
            first = false;
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let mag = c.abs();
        if mag.is_one() {
            out.push_str(&name(v));
        } else {
            out.push_str(&format!("{} {}", lp_format_rat(&mag), name(v)));
        }
    }
    if first {
        out.push('0');
    }
    out
}
