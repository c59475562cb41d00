//! Resource-annotated types and the constraint-emitting judgements over
//! them: enrichment, subtyping, well-formedness, sharing, prophesying,
//! merging, and equality.
//!
//! Every list position carries one potential annotation variable; a
//! mutable reference carries a current component and a prophecy
//! component, the type it promises to hold when the borrow ends.

use thiserror::Error;

use crate::lp::{Constraint, LinExpr, VarInfo};
pub use crate::lp::{VarId, VarKind};
use crate::syntax::SimpleType;

/// Resource-annotated type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RichType {
    Bot,
    IntR,
    BoolR,
    UnitR,
    ListR(VarId),
    BoxListR(VarId),
    SharedR(Box<RichType>),
    MutR(Box<RichType>, Box<RichType>),
}

impl RichType {
    pub fn shared(inner: RichType) -> RichType {
        RichType::SharedR(Box::new(inner))
    }

    pub fn mutable(current: RichType, prophecy: RichType) -> RichType {
        RichType::MutR(Box::new(current), Box::new(prophecy))
    }

    /// Erase annotations back to a simple type. `Bot` has no erasure.
    pub fn erase(&self) -> Option<SimpleType> {
        Some(match self {
            RichType::Bot => return None,
            RichType::IntR => SimpleType::Int,
            RichType::BoolR => SimpleType::Bool,
            RichType::UnitR => SimpleType::Unit,
            RichType::ListR(_) => SimpleType::List,
            RichType::BoxListR(_) => SimpleType::BoxList,
            RichType::SharedR(inner) => SimpleType::SharedRef(Box::new(inner.erase()?)),
            RichType::MutR(current, _) => SimpleType::MutRef(Box::new(current.erase()?)),
        })
    }

    /// All annotation variables, current components before prophecies.
    pub fn annot_vars(&self, out: &mut Vec<VarId>) {
        match self {
            RichType::Bot | RichType::IntR | RichType::BoolR | RichType::UnitR => {}
            RichType::ListR(a) | RichType::BoxListR(a) => out.push(*a),
            RichType::SharedR(inner) => inner.annot_vars(out),
            RichType::MutR(current, prophecy) => {
                current.annot_vars(out);
                prophecy.annot_vars(out);
            }
        }
    }

    pub fn contains_mut(&self) -> bool {
        match self {
            RichType::MutR(..) => true,
            RichType::SharedR(inner) => inner.contains_mut(),
            _ => false,
        }
    }

    fn describe(&self) -> String {
        match self.erase() {
            Some(t) => format!("{}", t),
            None => "bot".to_string(),
        }
    }
}

pub type ConstraintSet = Vec<Constraint>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AnnotError {
    #[error("shape mismatch between `{0}` and `{1}`")]
    Shape(String, String),
    #[error("no sharing of mutable borrows")]
    NoShareOfMut,
}

fn shape_err<T>(t1: &RichType, t2: &RichType) -> Result<T, AnnotError> {
    Err(AnnotError::Shape(t1.describe(), t2.describe()))
}

/// One analysis session: the fresh-variable factory and the accumulated
/// constraint store. Watermarks expose which variables and constraints
/// belong to the group currently being analyzed.
#[derive(Debug, Default)]
pub struct Session {
    vars: Vec<VarInfo>,
    constraints: Vec<Constraint>,
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    /// Allocate a fresh annotation variable. The note records which rule
    /// or site created it and becomes part of the variable's name.
    pub fn fresh(&mut self, kind: VarKind, note: &str) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarInfo {
            id,
            kind,
            name: format!("v{}_{}", id.0, mangle(note)),
        });
        id
    }

    pub fn emit(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn emit_all(&mut self, cs: ConstraintSet) {
        self.constraints.extend(cs);
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var_info(&self, id: VarId) -> &VarInfo {
        &self.vars[id.0 as usize]
    }

    pub fn kind_of(&self, id: VarId) -> VarKind {
        self.vars[id.0 as usize].kind
    }

    pub fn var_watermark(&self) -> u32 {
        self.vars.len() as u32
    }

    pub fn constraint_watermark(&self) -> usize {
        self.constraints.len()
    }
}

fn mangle(note: &str) -> String {
    note.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Mirror a simple type with fresh potential annotations on every list
/// position; a mutable reference gets two independent enrichments.
pub fn enrich(t: &SimpleType, session: &mut Session, note: &str) -> RichType {
    match t {
        SimpleType::Int => RichType::IntR,
        SimpleType::Bool => RichType::BoolR,
        SimpleType::Unit => RichType::UnitR,
        SimpleType::List => RichType::ListR(session.fresh(VarKind::Potential, note)),
        SimpleType::BoxList => RichType::BoxListR(session.fresh(VarKind::Potential, note)),
        SimpleType::SharedRef(inner) => RichType::shared(enrich(inner, session, note)),
        SimpleType::MutRef(inner) => {
            let current = enrich(inner, session, &format!("{}_cur", note));
            let prophecy = enrich(inner, session, &format!("{}_pro", note));
            RichType::mutable(current, prophecy)
        }
    }
}

/// Subtyping: `t1` holds no more potential than `t2`. The prophecy
/// component of a mutable reference is contravariant.
pub fn subtype(t1: &RichType, t2: &RichType, prov: &str) -> Result<ConstraintSet, AnnotError> {
    use RichType::*;
    Ok(match (t1, t2) {
        (Bot, _) => vec![],
        // Below bot means carrying no potential at all: pin every
        // positive-polarity annotation to zero.
        (_, Bot) => at_most_zero(t1, prov),
        (IntR, IntR) | (BoolR, BoolR) | (UnitR, UnitR) => vec![],
        (ListR(a1), ListR(a2)) | (BoxListR(a1), BoxListR(a2)) => vec![Constraint::le(
            LinExpr::var(*a1),
            LinExpr::var(*a2),
            format!("{prov}:sub-list"),
        )],
        (SharedR(x), SharedR(y)) => subtype(x, y, prov)?,
        (MutR(c1, p1), MutR(c2, p2)) => {
            let mut cs = subtype(c1, c2, prov)?;
            cs.extend(subtype(p2, p1, prov)?);
            cs
        }
        _ => return shape_err(t1, t2),
    })
}

fn at_most_zero(t: &RichType, prov: &str) -> ConstraintSet {
    use RichType::*;
    match t {
        Bot | IntR | BoolR | UnitR => vec![],
        ListR(a) | BoxListR(a) => vec![Constraint::le(
            LinExpr::var(*a),
            LinExpr::zero(),
            format!("{prov}:sub-bot"),
        )],
        SharedR(inner) => at_most_zero(inner, prov),
        // The potential of a mutable reference is current minus prophecy
        // and prophecies are non-negative, so zeroing the current side
        // suffices.
        MutR(current, _) => at_most_zero(current, prov),
    }
}

/// Well-formedness: the type denotes a non-negative potential and may be
/// dropped. Mutable references carry the dropping condition, prophecy
/// below current.
pub fn wellformed(t: &RichType, prov: &str) -> ConstraintSet {
    use RichType::*;
    match t {
        Bot | IntR | BoolR | UnitR => vec![],
        ListR(a) | BoxListR(a) => vec![Constraint::le(
            LinExpr::zero(),
            LinExpr::var(*a),
            format!("{prov}:wf-list"),
        )],
        SharedR(inner) => wellformed(inner, prov),
        MutR(current, prophecy) => {
            let mut cs = subtype(prophecy, current, &format!("{prov}:wf-drop"))
                .expect("mutable reference components share an erasure");
            cs.extend(wellformed(current, prov));
            cs.extend(wellformed(prophecy, prov));
            cs
        }
    }
}

/// Split a type into two parts whose potentials sum to the original.
/// There is no sharing of mutable borrows.
pub fn share(
    t: &RichType,
    session: &mut Session,
    note: &str,
) -> Result<(RichType, RichType, ConstraintSet), AnnotError> {
    use RichType::*;
    Ok(match t {
        IntR | BoolR | UnitR => (t.clone(), t.clone(), vec![]),
        ListR(a) | BoxListR(a) => {
            let a1 = session.fresh(VarKind::Potential, &format!("{}_1", note));
            let a2 = session.fresh(VarKind::Potential, &format!("{}_2", note));
            let sum = LinExpr::var(a1).plus(&LinExpr::var(a2));
            let c = Constraint::eq(LinExpr::var(*a), sum, format!("{note}:share-list"));
            let wrap = |v: VarId| match t {
                ListR(_) => ListR(v),
                _ => BoxListR(v),
            };
            (wrap(a1), wrap(a2), vec![c])
        }
        SharedR(inner) => {
            let (l, r, cs) = share(inner, session, note)?;
            (RichType::shared(l), RichType::shared(r), cs)
        }
        MutR(..) => return Err(AnnotError::NoShareOfMut),
        Bot => return shape_err(t, t),
    })
}

/// Fresh prophecy for a type: every list annotation position gets a fresh
/// potential variable; atoms map to themselves.
pub fn prophesy(t: &RichType, session: &mut Session, note: &str) -> RichType {
    use RichType::*;
    match t {
        // No prophecy rule constructs potential out of an undefined
        // position; keep it at zero potential.
        Bot => Bot,
        IntR | BoolR | UnitR => t.clone(),
        ListR(_) => ListR(session.fresh(VarKind::Potential, note)),
        BoxListR(_) => BoxListR(session.fresh(VarKind::Potential, note)),
        SharedR(inner) => RichType::shared(prophesy(inner, session, note)),
        MutR(current, prophecy) => RichType::mutable(
            prophesy(current, session, &format!("{}_cur", note)),
            prophesy(prophecy, session, &format!("{}_pro", note)),
        ),
    }
}

/// Meet of two types: a lower bound on both, used when control-flow paths
/// merge. Exact minima are relaxed to fresh lower-bounded variables so
/// constraints stay linear.
pub fn meet(
    t1: &RichType,
    t2: &RichType,
    session: &mut Session,
    note: &str,
) -> Result<(RichType, ConstraintSet), AnnotError> {
    use RichType::*;
    Ok(match (t1, t2) {
        (Bot, other) | (other, Bot) => {
            // The non-bot side's potential is dropped, which demands its
            // dropping conditions.
            (Bot, wellformed(other, &format!("{note}:meet-bot-drop")))
        }
        (IntR, IntR) | (BoolR, BoolR) | (UnitR, UnitR) => (t1.clone(), vec![]),
        (ListR(a1), ListR(a2)) | (BoxListR(a1), BoxListR(a2)) => {
            let m = session.fresh(VarKind::Potential, &format!("{}_meet", note));
            let cs = vec![
                Constraint::le(LinExpr::var(m), LinExpr::var(*a1), format!("{note}:meet-list")),
                Constraint::le(LinExpr::var(m), LinExpr::var(*a2), format!("{note}:meet-list")),
            ];
            let wrapped = if matches!(t1, ListR(_)) {
                ListR(m)
            } else {
                BoxListR(m)
            };
            (wrapped, cs)
        }
        (SharedR(x), SharedR(y)) => {
            let (inner, cs) = meet(x, y, session, note)?;
            (RichType::shared(inner), cs)
        }
        (MutR(c1, p1), MutR(c2, p2)) => {
            let (current, mut cs) = meet(c1, c2, session, note)?;
            let (prophecy, join_cs) = join(p1, p2, session, note)?;
            cs.extend(join_cs);
            cs.extend(subtype(p1, c1, &format!("{note}:meet-mut-drop"))?);
            cs.extend(subtype(p2, c2, &format!("{note}:meet-mut-drop"))?);
            (RichType::mutable(current, prophecy), cs)
        }
        _ => return shape_err(t1, t2),
    })
}

/// Join of two types: an upper bound on both; dual to [`meet`].
pub fn join(
    t1: &RichType,
    t2: &RichType,
    session: &mut Session,
    note: &str,
) -> Result<(RichType, ConstraintSet), AnnotError> {
    use RichType::*;
    Ok(match (t1, t2) {
        (Bot, other) | (other, Bot) => (other.clone(), vec![]),
        (IntR, IntR) | (BoolR, BoolR) | (UnitR, UnitR) => (t1.clone(), vec![]),
        (ListR(a1), ListR(a2)) | (BoxListR(a1), BoxListR(a2)) => {
            let j = session.fresh(VarKind::Potential, &format!("{}_join", note));
            let cs = vec![
                Constraint::le(LinExpr::var(*a1), LinExpr::var(j), format!("{note}:join-list")),
                Constraint::le(LinExpr::var(*a2), LinExpr::var(j), format!("{note}:join-list")),
            ];
            let wrapped = if matches!(t1, ListR(_)) {
                ListR(j)
            } else {
                BoxListR(j)
            };
            (wrapped, cs)
        }
        (SharedR(x), SharedR(y)) => {
            let (inner, cs) = join(x, y, session, note)?;
            (RichType::shared(inner), cs)
        }
        (MutR(c1, p1), MutR(c2, p2)) => {
            let (current, mut cs) = join(c1, c2, session, note)?;
            let (prophecy, meet_cs) = meet(p1, p2, session, note)?;
            cs.extend(meet_cs);
            cs.extend(subtype(p1, c1, &format!("{note}:join-mut-drop"))?);
            cs.extend(subtype(p2, c2, &format!("{note}:join-mut-drop"))?);
            (RichType::mutable(current, prophecy), cs)
        }
        _ => return shape_err(t1, t2),
    })
}

/// Pairwise equality on all annotation positions, both components of a
/// mutable reference included.
pub fn equate(t1: &RichType, t2: &RichType, prov: &str) -> Result<ConstraintSet, AnnotError> {
    use RichType::*;
    Ok(match (t1, t2) {
        (Bot, Bot) => vec![],
        (IntR, IntR) | (BoolR, BoolR) | (UnitR, UnitR) => vec![],
        (ListR(a1), ListR(a2)) | (BoxListR(a1), BoxListR(a2)) => {
            if a1 == a2 {
                vec![]
            } else {
                vec![Constraint::eq(
                    LinExpr::var(*a1),
                    LinExpr::var(*a2),
                    format!("{prov}:equate"),
                )]
            }
        }
        (SharedR(x), SharedR(y)) => equate(x, y, prov)?,
        (MutR(c1, p1), MutR(c2, p2)) => {
            let mut cs = equate(c1, c2, prov)?;
            cs.extend(equate(p1, p2, prov)?);
            cs
        }
        _ => return shape_err(t1, t2),
    })
}

/// Convenience: the `0 <= a` bound as a plain expression, used when
/// registering potential variables in an LP problem.
pub fn nonneg(v: VarId, prov: &str) -> Constraint {
    Constraint::le(LinExpr::zero(), LinExpr::var(v), prov.to_string())
}
