//! Whole-program analysis: per-function signatures, group-by-group
//! constraint collection in call-graph order, and LP solving with the
//! heuristic objective.
//!
//! Recursive functions are grouped as strongly connected components of
//! the call graph and groups are analyzed in dependency order. Calls to
//! functions in the current group use the group's shared signature; calls
//! into earlier groups clone that group's signature and constraints,
//! because annotations are sensitive to the actual arguments at each call
//! site.

mod check;
mod ctx;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::annot::{enrich, equate, wellformed, RichType, Session, VarId, VarKind};
use crate::lp::{rat, ratio, Assignment, Constraint, LinExpr, LpError, LpProblem, Rat, VarInfo};
use crate::syntax::{call_graph_sccs, validate, Program, ValidationReport, RET};

use check::Checker;
pub use check::type_expr;
pub use ctx::{TypeError, TypingContext};

/// A function's inferred interface: entry context, input-independent cost
/// variable, and the remainder context left by the body.
#[derive(Debug, Clone)]
pub struct Signature {
    pub name: String,
    pub param_names: Vec<String>,
    pub entry: TypingContext,
    pub delta: VarId,
    pub exit: Option<TypingContext>,
}

/// One analyzed call-graph group: its functions and the session ranges
/// holding the variables and constraints it owns. The ranges double as
/// the clone template for later call sites.
#[derive(Debug, Clone)]
pub struct GroupInfo {
    pub functions: Vec<String>,
    pub var_range: (u32, u32),
    pub constraint_range: (usize, usize),
}

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("validation failed:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("no consistent annotation for group [{functions}]: {diagnostic}")]
    Infeasible {
        functions: String,
        diagnostic: String,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

/// Objective weights: signature annotations dominate, then the cost
/// variables, then a tiny weight on every remaining potential variable to
/// pin a unique solution.
#[derive(Debug, Clone)]
pub struct AnalyzerOptions {
    pub w_sig: Rat,
    pub w_int: Rat,
}

impl Default for AnalyzerOptions {
    fn default() -> Self {
        AnalyzerOptions {
            w_sig: rat(1024),
            w_int: ratio(1, 1024),
        }
    }
}

/// Result of analyzing a whole program.
#[derive(Debug)]
pub struct AnalysisResult {
    pub program: Program,
    pub signatures: BTreeMap<String, Signature>,
    pub groups: Vec<GroupInfo>,
    pub assignment: Assignment,
    pub vars: Vec<VarInfo>,
    pub constraints: Vec<Constraint>,
    pub lp_problems: Vec<LpProblem>,
}

impl AnalysisResult {
    pub fn value_of(&self, v: VarId) -> Rat {
        self.assignment
            .get(&v)
            .cloned()
            .unwrap_or_else(|| rat(0))
    }

    /// Solved input-independent cost of a function.
    pub fn delta_of(&self, name: &str) -> Rat {
        self.value_of(self.signatures[name].delta)
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0 as usize].name
    }

    /// Override one variable's value by its dump name. Used to replay a
    /// stale assignment; returns false when no such variable exists.
    pub fn override_var(&mut self, name: &str, value: Rat) -> bool {
        match self.vars.iter().find(|i| i.name == name) {
            Some(info) => {
                self.assignment.insert(info.id, value);
                true
            }
            None => false,
        }
    }
}

pub(crate) struct CheckEnv<'p> {
    pub program: &'p Program,
    pub session: Session,
    pub signatures: BTreeMap<String, Signature>,
    pub group_of: BTreeMap<String, usize>,
    pub groups: Vec<GroupInfo>,
}

pub(crate) struct ClonedSig {
    pub params: Vec<RichType>,
    pub ret: RichType,
    pub delta: VarId,
}

/// Clone an analyzed group's signature and constraints with a fresh
/// renaming of every variable the group owns. Solved values are not
/// substituted: the clone is re-solved in the calling group's problem.
pub(crate) fn instantiate_signature(
    env: &mut CheckEnv<'_>,
    callee: &str,
    site: &str,
) -> ClonedSig {
    let gidx = env.group_of[callee];
    let (v_start, v_end) = env.groups[gidx].var_range;
    let (c_start, c_end) = env.groups[gidx].constraint_range;

    let mut map: HashMap<VarId, VarId> = HashMap::new();
    let infos: Vec<(VarId, VarKind, String)> = (v_start..v_end)
        .map(|i| {
            let info = env.session.var_info(VarId(i));
            (info.id, info.kind, info.name.clone())
        })
        .collect();
    for (old, kind, name) in infos {
        // Strip the old id prefix so clone names stay readable.
        let note = name.split_once('_').map(|(_, n)| n).unwrap_or(&name);
        let fresh = env.session.fresh(kind, &format!("{note}_cl"));
        map.insert(old, fresh);
    }

    let cloned: Vec<Constraint> = env.session.constraints()[c_start..c_end]
        .iter()
        .map(|c| Constraint {
            lhs: rename_expr(&c.lhs, &map),
            rel: c.rel,
            rhs: rename_expr(&c.rhs, &map),
            provenance: format!("{} [clone@{}]", c.provenance, site),
        })
        .collect();
    for c in cloned {
        env.session.emit(c);
    }

    let sig = &env.signatures[callee];
    ClonedSig {
        params: sig
            .param_names
            .iter()
            .map(|p| rename_type(sig.entry.get(p).expect("signature domain"), &map))
            .collect(),
        ret: rename_type(sig.entry.get(RET).expect("signature domain"), &map),
        delta: map[&sig.delta],
    }
}

fn rename_type(t: &RichType, map: &HashMap<VarId, VarId>) -> RichType {
    use RichType::*;
    match t {
        Bot | IntR | BoolR | UnitR => t.clone(),
        ListR(a) => ListR(map[a]),
        BoxListR(a) => BoxListR(map[a]),
        SharedR(inner) => RichType::shared(rename_type(inner, map)),
        MutR(c, p) => RichType::mutable(rename_type(c, map), rename_type(p, map)),
    }
}

fn rename_expr(e: &LinExpr, map: &HashMap<VarId, VarId>) -> LinExpr {
    let mut out = LinExpr::constant(e.constant_part().clone());
    for (v, coeff) in e.terms() {
        out.add_term(map[&v], coeff.clone());
    }
    out
}

/// Analyze a program with default objective weights.
pub fn analyze(program: &Program) -> Result<AnalysisResult, AnalyzeError> {
    analyze_with(program, &AnalyzerOptions::default())
}

/// Analyze a validated program group by group in call-graph order.
pub fn analyze_with(
    program: &Program,
    options: &AnalyzerOptions,
) -> Result<AnalysisResult, AnalyzeError> {
    let report = validate(program);
    if !report.is_empty() {
        return Err(AnalyzeError::Invalid(report));
    }

    let mut env = CheckEnv {
        program,
        session: Session::new(),
        signatures: BTreeMap::new(),
        group_of: BTreeMap::new(),
        groups: Vec::new(),
    };
    let mut assignment = Assignment::new();
    let mut lp_problems = Vec::new();

    for group in call_graph_sccs(program) {
        let v_start = env.session.var_watermark();
        let c_start = env.session.constraint_watermark();
        let group_set: BTreeSet<String> = group.iter().cloned().collect();

        // Predefine every member's signature so recursive calls inside
        // the group resolve to shared variables.
        for fname in &group {
            let f = program.function(fname).expect("validated");
            let mut entry = TypingContext::new();
            let mut param_names = Vec::new();
            for (pname, ty) in &f.params {
                entry.insert(
                    pname.clone(),
                    enrich(ty, &mut env.session, &format!("{fname}_{pname}")),
                );
                param_names.push(pname.clone());
            }
            for decl in f.locals() {
                entry.insert(
                    decl.name.clone(),
                    enrich(&decl.ty, &mut env.session, &format!("{fname}_{}", decl.name)),
                );
            }
            entry.insert(
                RET.to_string(),
                enrich(&f.ret, &mut env.session, &format!("{fname}_ret")),
            );
            let delta = env.session.fresh(VarKind::Cost, &format!("{fname}_delta"));
            env.group_of.insert(fname.clone(), env.groups.len());
            env.signatures.insert(
                fname.clone(),
                Signature {
                    name: fname.clone(),
                    param_names,
                    entry,
                    delta,
                    exit: None,
                },
            );
        }

        // Check each member's body against its signature.
        for fname in &group {
            let f = program.function(fname).expect("validated");
            let entry_ctx = env.signatures[fname].entry.clone();
            let delta = env.signatures[fname].delta;
            let mut checker = Checker {
                env: &mut env,
                fn_name: fname.clone(),
                group: group_set.clone(),
                ctx: entry_ctx,
            };
            let body_delta = checker.type_block(&f.body)?;
            let exit_ctx = checker.ctx;

            for (x, t) in exit_ctx.iter() {
                env.session
                    .emit_all(wellformed(t, &format!("exit-wf_{fname}_{x}")));
            }
            let ret_exit = exit_ctx.get(RET).expect("context domain");
            let ret_entry = env.signatures[fname].entry.get(RET).expect("domain");
            let ret_cs = equate(ret_exit, ret_entry, &format!("ret-match_{fname}")).map_err(
                |_| TypeError::Shape {
                    message: format!(
                        "`ret` of `{}` must end at its declared shape (was it moved out?)",
                        fname
                    ),
                    span: f.span,
                },
            )?;
            env.session.emit_all(ret_cs);
            env.session.emit(Constraint::eq(
                body_delta,
                LinExpr::var(delta),
                format!("fn-delta@{fname}"),
            ));
            env.signatures.get_mut(fname).unwrap().exit = Some(exit_ctx);
        }

        // Solve this group.
        let v_end = env.session.var_watermark();
        let c_end = env.session.constraint_watermark();
        let vars = env.session.vars()[v_start as usize..v_end as usize].to_vec();
        let constraints = env.session.constraints()[c_start..c_end].to_vec();

        let mut sig_vars: BTreeSet<VarId> = BTreeSet::new();
        let mut member_deltas: BTreeSet<VarId> = BTreeSet::new();
        for fname in &group {
            let sig = &env.signatures[fname];
            let mut collected = Vec::new();
            for pname in &sig.param_names {
                sig.entry.get(pname).expect("domain").annot_vars(&mut collected);
            }
            sig.entry.get(RET).expect("domain").annot_vars(&mut collected);
            sig_vars.extend(collected);
            member_deltas.insert(sig.delta);
        }

        let mut objective = LinExpr::zero();
        for info in &vars {
            if sig_vars.contains(&info.id) {
                objective.add_term(info.id, options.w_sig.clone());
            } else if member_deltas.contains(&info.id) {
                objective.add_term(info.id, rat(1));
            } else if info.kind == VarKind::Potential {
                objective.add_term(info.id, options.w_int.clone());
            }
        }

        let problem = LpProblem {
            vars,
            constraints,
            objective,
        };
        match problem.solve() {
            Ok(solution) => assignment.extend(solution),
            Err(LpError::Infeasible(diagnostic)) => {
                return Err(AnalyzeError::Infeasible {
                    functions: group.join(", "),
                    diagnostic,
                })
            }
            Err(other) => return Err(AnalyzeError::Internal(other.to_string())),
        }
        lp_problems.push(problem);
        env.groups.push(GroupInfo {
            functions: group,
            var_range: (v_start, v_end),
            constraint_range: (c_start, c_end),
        });
    }

    Ok(AnalysisResult {
        program: program.clone(),
        signatures: env.signatures,
        groups: env.groups,
        assignment,
        vars: env.session.vars().to_vec(),
        constraints: env.session.constraints().to_vec(),
        lp_problems,
    })
}
