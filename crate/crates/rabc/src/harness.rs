//! Potential evaluation and empirical validation of inferred bounds.
//!
//! The central check: run a function on concrete inputs, evaluate the
//! potential of the entry and exit stores under the solved annotations,
//! and verify that the typed cost covers the measured cost plus the
//! potential difference. Non-negative slack on every run witnesses the
//! soundness of the analysis; slack identically zero means the bound is
//! tight.

use num::Zero;
use thiserror::Error;

use crate::annot::RichType;
use crate::infer::{AnalysisResult, TypingContext};
use crate::interp::{Interp, RtPlace, RuntimeError, Store, Value, ENTRY_FRAME, OWNER_FRAME};
use crate::lp::{rat, Assignment, Rat, VarId};
use crate::syntax::{Function, SimpleType};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum HarnessError {
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("potential shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("annotation variable {0} has no solved value")]
    Unassigned(VarId),
    #[error("`{0}` is not runnable by the generator: {1}")]
    NotRunnable(String, String),
    #[error("function `{0}` was not analyzed")]
    NotAnalyzed(String),
}

/// Potential of one value under an annotated type.
///
/// The undefined value carries no potential under any type, and the bot
/// type assigns no potential to any value; both cases arise routinely
/// when binding locals or after moves.
pub fn potential(v: &Value, t: &RichType, a: &Assignment) -> Result<Rat, HarnessError> {
    let lookup = |var: &VarId| -> Result<Rat, HarnessError> {
        a.get(var).cloned().ok_or(HarnessError::Unassigned(*var))
    };
    match (v, t) {
        (Value::Undef, _) | (_, RichType::Bot) => Ok(rat(0)),
        (Value::Int(_), RichType::IntR) | (Value::BoolV(_), RichType::BoolR) => Ok(rat(0)),
        (Value::ListV(_), RichType::ListR(alpha)) => {
            let per_element = lookup(alpha)?;
            let len = v.list_len().ok_or_else(|| {
                HarnessError::ShapeMismatch("malformed list value".to_string())
            })?;
            Ok(per_element * rat(len as i64))
        }
        (Value::BoxV(payload), RichType::BoxListR(alpha)) => {
            potential(payload, &RichType::ListR(*alpha), a)
        }
        (Value::Borrow(_, payload), RichType::SharedR(inner)) => potential(payload, inner, a),
        (Value::Borrow(_, payload), RichType::MutR(current, prophecy)) => {
            let held = potential(payload, current, a)?;
            let promised = potential(payload, prophecy, a)?;
            Ok(held - promised)
        }
        (value, ty) => Err(HarnessError::ShapeMismatch(format!(
            "value {} does not match type shape {:?}",
            value, ty
        ))),
    }
}

/// Potential of a whole store frame under a typing context: the sum over
/// the context's domain.
pub fn potential_store(
    store: &Store,
    frame: u32,
    ctx: &TypingContext,
    a: &Assignment,
) -> Result<Rat, HarnessError> {
    let mut total = rat(0);
    for (name, ty) in ctx.iter() {
        total += potential(&store.get_var(frame, name), ty, a)?;
    }
    Ok(total)
}

/// A concrete input for one run: hidden owner slots for reference-typed
/// parameters live in the owner frame, and the argument values point at
/// them.
#[derive(Debug, Clone)]
pub struct Scaffold {
    pub store: Store,
    pub args: Vec<Value>,
}

/// Build arguments for a function at list size `n`. Boolean parameters
/// take their values from `bools` in order. Returns `None` when a
/// parameter shape cannot be generated.
pub fn scaffold_args(f: &Function, n: usize, bools: &[bool]) -> Option<Scaffold> {
    let mut store = Store::new();
    let mut owners = 0usize;
    let mut next_bool = 0usize;
    let mut args = Vec::new();
    for (_, ty) in &f.params {
        args.push(build_value(
            ty,
            n,
            &mut store,
            &mut owners,
            bools,
            &mut next_bool,
        )?);
    }
    Some(Scaffold { store, args })
}

fn build_value(
    t: &SimpleType,
    n: usize,
    store: &mut Store,
    owners: &mut usize,
    bools: &[bool],
    next_bool: &mut usize,
) -> Option<Value> {
    Some(match t {
        SimpleType::Int => Value::Int(1),
        SimpleType::Bool => {
            let b = bools.get(*next_bool).copied().unwrap_or(true);
            *next_bool += 1;
            Value::BoolV(b)
        }
        SimpleType::Unit => Value::Undef,
        SimpleType::List => Value::list(&sample_elements(n)),
        SimpleType::BoxList => {
            let Value::ListV(lv) = Value::list(&sample_elements(n)) else {
                unreachable!()
            };
            Value::boxed_list(lv)
        }
        SimpleType::SharedRef(inner) | SimpleType::MutRef(inner) => {
            let payload = build_value(inner, n, store, owners, bools, next_bool)?;
            let name = format!("own{}", *owners);
            *owners += 1;
            store.set_var(OWNER_FRAME, &name, payload.clone());
            Value::Borrow(RtPlace::var(OWNER_FRAME, name), Box::new(payload))
        }
    })
}

fn sample_elements(n: usize) -> Vec<i64> {
    (1..=n as i64).collect()
}

/// Number of boolean parameters, to enumerate branch combinations.
pub fn bool_param_count(f: &Function) -> usize {
    f.params
        .iter()
        .filter(|(_, t)| matches!(t, SimpleType::Bool))
        .count()
}

/// All boolean combinations for up to four boolean parameters; beyond
/// that, a single all-true combination.
pub fn bool_combos(count: usize) -> Vec<Vec<bool>> {
    if count == 0 {
        return vec![vec![]];
    }
    if count > 4 {
        return vec![vec![true; count]];
    }
    (0..1usize << count)
        .map(|bits| (0..count).map(|i| bits >> i & 1 == 1).collect())
        .collect()
}

/// Number of parameters that carry a list anywhere in their type.
pub fn list_param_count(f: &Function) -> usize {
    fn has_list(t: &SimpleType) -> bool {
        match t {
            SimpleType::List | SimpleType::BoxList => true,
            SimpleType::SharedRef(inner) | SimpleType::MutRef(inner) => has_list(inner),
            _ => false,
        }
    }
    f.params.iter().filter(|(_, t)| has_list(t)).count()
}

/// One soundness check: the typed cost must cover the measured cost plus
/// the potential difference.
#[derive(Debug, Clone)]
pub struct PotentialReport {
    pub fn_name: String,
    pub size: usize,
    pub entry_store: Store,
    pub entry_potential: Rat,
    pub exit_store: Store,
    pub exit_potential: Rat,
    pub runtime_cost: i64,
    pub typed_cost: Rat,
    /// `typed - (exit - entry + runtime)`; non-negative iff sound.
    pub slack: Rat,
}

impl PotentialReport {
    pub fn is_sound(&self) -> bool {
        self.slack >= Rat::zero()
    }
}

/// Run one scaffolded input and evaluate both sides of the soundness
/// inequality.
pub fn check_soundness(
    result: &AnalysisResult,
    fn_name: &str,
    scaffold: Scaffold,
    size: usize,
    fuel: u64,
) -> Result<PotentialReport, HarnessError> {
    let sig = result
        .signatures
        .get(fn_name)
        .ok_or_else(|| HarnessError::NotAnalyzed(fn_name.to_string()))?;
    let exit_ctx = sig
        .exit
        .as_ref()
        .ok_or_else(|| HarnessError::NotAnalyzed(fn_name.to_string()))?;
    let f = result
        .program
        .function(fn_name)
        .ok_or_else(|| HarnessError::NotAnalyzed(fn_name.to_string()))?;

    let mut interp = Interp::new(&result.program, fuel);
    interp.store = scaffold.store;
    interp.bind_entry(f, scaffold.args)?;
    let entry_store = interp.store.clone();
    let entry_potential = potential_store(&entry_store, ENTRY_FRAME, &sig.entry, &result.assignment)?;
    interp.exec_entry(f)?;
    let exit_store = interp.store.clone();
    let exit_potential = potential_store(&exit_store, ENTRY_FRAME, exit_ctx, &result.assignment)?;
    let runtime_cost = interp.cost();
    let typed_cost = result.value_of(sig.delta);
    let slack =
        typed_cost.clone() - (exit_potential.clone() - entry_potential.clone() + rat(runtime_cost));
    Ok(PotentialReport {
        fn_name: fn_name.to_string(),
        size,
        entry_store,
        entry_potential,
        exit_store,
        exit_potential,
        runtime_cost,
        typed_cost,
        slack,
    })
}

/// Soundness checks for one function across a size range, exercising
/// every boolean-parameter combination at every size.
pub fn soundness_sweep(
    result: &AnalysisResult,
    fn_name: &str,
    sizes: impl Iterator<Item = usize>,
    fuel: u64,
) -> Result<Vec<PotentialReport>, HarnessError> {
    let f = result
        .program
        .function(fn_name)
        .ok_or_else(|| HarnessError::NotAnalyzed(fn_name.to_string()))?;
    let combos = bool_combos(bool_param_count(f));
    let mut reports = Vec::new();
    for n in sizes {
        for combo in &combos {
            let scaffold = scaffold_args(f, n, combo).ok_or_else(|| {
                HarnessError::NotRunnable(fn_name.to_string(), "unsupported parameter".into())
            })?;
            reports.push(check_soundness(result, fn_name, scaffold, n, fuel)?);
        }
    }
    Ok(reports)
}

/// Measured costs against the inferred bound over a size range.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub fn_name: String,
    pub sizes: Vec<usize>,
    /// Worst measured cost per size, across boolean combinations.
    pub costs: Vec<i64>,
    /// The bound is `constant + slope * n`.
    pub bound_constant: Rat,
    pub bound_slope: Rat,
    pub max_slack: Rat,
    pub min_slack: Rat,
    pub sound: bool,
    pub tight: bool,
}

impl FitReport {
    pub fn bound_at(&self, n: usize) -> Rat {
        self.bound_constant.clone() + self.bound_slope.clone() * rat(n as i64)
    }
}

/// Run a function over a range of list sizes and compare measured costs
/// with the bound derived from the solved signature: the function's
/// input-independent cost plus the entry potential of the arguments.
///
/// Requires at most one list-bearing parameter so the bound is a function
/// of a single size.
pub fn measure_and_fit(
    result: &AnalysisResult,
    fn_name: &str,
    sizes: impl Iterator<Item = usize>,
    fuel: u64,
) -> Result<FitReport, HarnessError> {
    let f = result
        .program
        .function(fn_name)
        .ok_or_else(|| HarnessError::NotAnalyzed(fn_name.to_string()))?;
    if list_param_count(f) > 1 {
        return Err(HarnessError::NotRunnable(
            fn_name.to_string(),
            "more than one list-bearing parameter".into(),
        ));
    }
    let sig = &result.signatures[fn_name];
    let combos = bool_combos(bool_param_count(f));

    let entry_potential_at = |n: usize| -> Result<Rat, HarnessError> {
        let scaffold = scaffold_args(f, n, &combos[0]).ok_or_else(|| {
            HarnessError::NotRunnable(fn_name.to_string(), "unsupported parameter".into())
        })?;
        let mut store = scaffold.store;
        for ((name, _), v) in f.params.iter().zip(scaffold.args) {
            store.set_var(ENTRY_FRAME, name, v);
        }
        potential_store(&store, ENTRY_FRAME, &sig.entry, &result.assignment)
    };
    let constant = result.value_of(sig.delta);
    let base = entry_potential_at(0)?;
    let slope = entry_potential_at(1)? - base.clone();

    let mut report = FitReport {
        fn_name: fn_name.to_string(),
        sizes: Vec::new(),
        costs: Vec::new(),
        bound_constant: constant.clone() + base.clone(),
        bound_slope: slope.clone(),
        max_slack: rat(0),
        min_slack: rat(0),
        sound: true,
        tight: false,
    };

    let mut slacks: Vec<Rat> = Vec::new();
    for n in sizes {
        // The potential of the generated input must be affine in the
        // size; double-check rather than assume.
        let expected = base.clone() + slope.clone() * rat(n as i64);
        let actual = entry_potential_at(n)?;
        if expected != actual {
            return Err(HarnessError::ShapeMismatch(format!(
                "entry potential of `{}` is not affine in the input size",
                fn_name
            )));
        }
        let bound = constant.clone() + actual;
        let mut worst: Option<i64> = None;
        for combo in &combos {
            let scaffold = scaffold_args(f, n, combo).ok_or_else(|| {
                HarnessError::NotRunnable(fn_name.to_string(), "unsupported parameter".into())
            })?;
            let mut interp = Interp::new(&result.program, fuel);
            interp.store = scaffold.store;
            interp.bind_entry(f, scaffold.args)?;
            interp.exec_entry(f)?;
            let cost = interp.cost();
            if rat(cost) > bound {
                report.sound = false;
            }
            worst = Some(worst.map_or(cost, |w| w.max(cost)));
        }
        let cost = worst.unwrap_or(0);
        slacks.push(bound - rat(cost));
        report.sizes.push(n);
        report.costs.push(cost);
    }
    if let (Some(max), Some(min)) = (slacks.iter().max(), slacks.iter().min()) {
        report.max_slack = max.clone();
        report.min_slack = min.clone();
        report.tight = max == min;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annot::VarKind;
    use crate::infer::analyze;
    use crate::interp::DEFAULT_FUEL;
    use crate::syntax::parse;

    const ITER: &str = "
        fn iter(l: & list) -> unit {
            let h: i32;
            let t: box list;
            let u: unit;
            match *l {
                nil => { tick(1); },
                cons(h, t) => { tick(2); u := iter(&*t); }
            };
            return;
        }
    ";

    #[test]
    fn potential_of_lists_and_borrows() {
        let mut a = Assignment::new();
        a.insert(VarId(0), rat(2));
        a.insert(VarId(1), rat(3));
        a.insert(VarId(2), rat(1));
        // list of length 3 at list(2) -> 6
        let v = Value::list(&[7, 8, 9]);
        assert_eq!(potential(&v, &RichType::ListR(VarId(0)), &a).unwrap(), rat(6));
        // borrow of a length-2 list at mut(list(3), list(1)) -> 6 - 2 = 4
        let borrowed = Value::Borrow(
            RtPlace::var(OWNER_FRAME, "o"),
            Box::new(Value::list(&[1, 2])),
        );
        let ty = RichType::mutable(RichType::ListR(VarId(1)), RichType::ListR(VarId(2)));
        assert_eq!(potential(&borrowed, &ty, &a).unwrap(), rat(4));
        // atoms carry nothing
        assert_eq!(potential(&Value::Int(7), &RichType::IntR, &a).unwrap(), rat(0));
        // undefined carries nothing under any type
        assert_eq!(
            potential(&Value::Undef, &RichType::ListR(VarId(0)), &a).unwrap(),
            rat(0)
        );
    }

    #[test]
    fn potential_store_sums_over_context_domain() {
        let mut a = Assignment::new();
        a.insert(VarId(0), rat(2));
        let mut ctx = TypingContext::new();
        // empty context -> 0
        let store = Store::new();
        assert_eq!(potential_store(&store, 1, &ctx, &a).unwrap(), rat(0));

        let mut store = Store::new();
        store.set_var(1, "l", Value::list(&[1, 2, 3, 4, 5]));
        ctx.insert("l", RichType::ListR(VarId(0)));
        assert_eq!(potential_store(&store, 1, &ctx, &a).unwrap(), rat(10));

        // a mutable borrow whose prophecy equals its current contributes 0
        let mut ctx = TypingContext::new();
        ctx.insert(
            "x",
            RichType::mutable(RichType::ListR(VarId(0)), RichType::ListR(VarId(0))),
        );
        let mut store = Store::new();
        store.set_var(
            1,
            "x",
            Value::Borrow(RtPlace::var(0, "o"), Box::new(Value::list(&[1, 2]))),
        );
        assert_eq!(potential_store(&store, 1, &ctx, &a).unwrap(), rat(0));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Assignment::new();
        let err = potential(&Value::Int(7), &RichType::ListR(VarId(0)), &a).unwrap_err();
        assert!(matches!(err, HarnessError::ShapeMismatch(_)));
    }

    #[test]
    fn iter_is_sound_and_tight_across_sizes() {
        let p = parse(ITER).unwrap();
        let result = analyze(&p).unwrap();
        let reports = soundness_sweep(&result, "iter", 0..=20, DEFAULT_FUEL).unwrap();
        for r in &reports {
            assert!(r.is_sound(), "slack {} at size {}", r.slack, r.size);
            assert!(r.slack.is_zero(), "iter should be tight");
        }
        let fit = measure_and_fit(&result, "iter", 0..=20, DEFAULT_FUEL).unwrap();
        assert!(fit.sound && fit.tight);
        assert_eq!(fit.bound_constant, rat(1));
        assert_eq!(fit.bound_slope, rat(2));
        assert_eq!(fit.costs[3], 7); // 2n + 1 at n = 3
    }

    #[test]
    fn corrupted_cost_is_detected() {
        let p = parse(ITER).unwrap();
        let mut result = analyze(&p).unwrap();
        let delta = result.signatures["iter"].delta;
        let v = result.assignment[&delta].clone();
        result.assignment.insert(delta, v - rat(1));
        let reports = soundness_sweep(&result, "iter", 0..=5, DEFAULT_FUEL).unwrap();
        assert!(reports.iter().any(|r| !r.is_sound()));
    }

    #[test]
    fn fresh_session_var_kinds_do_not_leak() {
        // potential() must fail loudly when a needed variable is missing
        // from the assignment.
        let a = Assignment::new();
        let err = potential(&Value::list(&[1]), &RichType::ListR(VarId(9)), &a).unwrap_err();
        assert_eq!(err, HarnessError::Unassigned(VarId(9)));
        let _ = VarKind::Potential;
    }
}
