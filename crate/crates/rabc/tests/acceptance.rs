//! Acceptance suite: the bounds, relational claims, soundness sweeps,
//! and property checks the project promises, one test per criterion.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use num::{Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use rabc::annot::{self, RichType, Session, VarKind};
use rabc::harness::{self, potential, potential_store};
use rabc::infer::{self, AnalysisResult, TypingContext};
use rabc::interp::{Interp, RtPlace, Store, Value, DEFAULT_FUEL};
use rabc::lp::{rat, ratio, Assignment, Constraint, LinExpr, LpProblem, Rat, Relation, VarId,
    VarInfo};
use rabc::syntax::{parse, Expr, ExprKind, Place, Program};

fn bench_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../benchmarks")
        .join(name)
}

fn load(name: &str) -> Program {
    let path = bench_path(name);
    let text = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {}", path.display(), e));
    parse(&text).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

fn analyzed(name: &str) -> AnalysisResult {
    infer::analyze(&load(name)).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

/// Solved values of a parameter's annotation positions, in order.
fn annots(result: &AnalysisResult, fn_name: &str, param: &str) -> Vec<Rat> {
    let sig = &result.signatures[fn_name];
    let mut vars = Vec::new();
    sig.entry.get(param).unwrap().annot_vars(&mut vars);
    vars.into_iter().map(|v| result.value_of(v)).collect()
}

const CORPUS: &[&str] = &[
    "iter.rabc",
    "update.rabc",
    "weak.rabc",
    "sum.rabc",
    "rev.rabc",
    "dup.rabc",
    "end.rabc",
    "nested.rabc",
];

#[test]
fn criterion_1_iter_signature() {
    let result = analyzed("iter.rabc");
    assert_eq!(annots(&result, "iter", "l"), vec![rat(2)]);
    assert_eq!(result.delta_of("iter"), rat(1));
    println!("criterion 1 (iter : fn(l: &list(2)) -> unit | 1): PASS");
}

#[test]
fn criterion_2_iter_twice_signature() {
    let result = analyzed("iter.rabc");
    assert_eq!(annots(&result, "iter_twice", "l"), vec![rat(4)]);
    assert_eq!(result.delta_of("iter_twice"), rat(2));
    println!("criterion 2 (iter_twice : fn(l: &list(4)) -> unit | 2): PASS");
}

#[test]
fn criterion_3_update_signature() {
    let result = analyzed("update.rabc");
    // current component 2, prophecy 0
    assert_eq!(annots(&result, "update", "l"), vec![rat(2), rat(0)]);
    assert_eq!(result.delta_of("update"), rat(7));
    println!("criterion 3 (update : fn(l: &mut list(2, 0)) -> unit | 7): PASS");
}

/// Destructure a `v1 <= v2` constraint between single variables.
fn as_var_le(c: &Constraint) -> Option<(VarId, VarId)> {
    if c.rel != Relation::Le {
        return None;
    }
    let side = |e: &LinExpr| -> Option<VarId> {
        let mut vars: Vec<_> = e.terms().collect();
        if vars.len() == 1 && vars[0].1 == &rat(1) && e.constant_part().is_zero() {
            Some(vars.pop().unwrap().0)
        } else {
            None
        }
    };
    Some((side(&c.lhs)?, side(&c.rhs)?))
}

#[test]
fn criterion_4_weak_merge_constraints() {
    let result = analyzed("weak.rabc");

    // Branch currents are the entry current annotations of l1 and l2.
    let p1 = annot_var_of(&result, "weak", "l1", 0);
    let p2 = annot_var_of(&result, "weak", "l2", 0);

    let merged: Vec<&Constraint> = result
        .constraints
        .iter()
        .filter(|c| c.provenance.starts_with("merge_l_weak"))
        .collect();
    let meet_list: Vec<(VarId, VarId)> = merged
        .iter()
        .filter(|c| c.provenance.contains(":meet-list"))
        .map(|c| as_var_le(c).expect("meet emits var <= var"))
        .collect();
    let join_list: Vec<(VarId, VarId)> = merged
        .iter()
        .filter(|c| c.provenance.contains(":join-list"))
        .map(|c| as_var_le(c).expect("join emits var <= var"))
        .collect();
    let drops: Vec<(VarId, VarId)> = merged
        .iter()
        .filter(|c| c.provenance.contains(":meet-mut-drop"))
        .map(|c| as_var_le(c).expect("drop condition is var <= var"))
        .collect();

    // current <= both branch currents, with one shared fresh variable
    assert_eq!(meet_list.len(), 2);
    let c = meet_list[0].0;
    assert_eq!(meet_list[1].0, c);
    let meet_rhs: BTreeSet<VarId> = meet_list.iter().map(|(_, r)| *r).collect();
    assert_eq!(meet_rhs, BTreeSet::from([p1, p2]));

    // prophecy >= both branch prophecies
    assert_eq!(join_list.len(), 2);
    let j = join_list[0].1;
    assert_eq!(join_list[1].1, j);
    let (q1, q2) = (join_list[0].0, join_list[1].0);

    // dropping conditions for both branches: q_i <= p_i
    let drop_set: BTreeSet<(VarId, VarId)> = drops.into_iter().collect();
    assert_eq!(drop_set, BTreeSet::from([(q1, p1), (q2, p2)]));

    // Entailment probe: under *any* assignment satisfying the emitted
    // set, current <= min(branch currents) and prophecy >= max(branch
    // prophecies). Verified by minimizing each slack over the emitted
    // constraints; a non-negative optimum is entailment.
    let emitted: Vec<Constraint> = merged.into_iter().cloned().collect();
    for (lo, hi) in [(c, p1), (c, p2), (q1, j), (q2, j)] {
        let gap = minimize_gap(&result, &emitted, hi, lo);
        assert!(
            gap >= rat(0),
            "emitted constraints do not entail {:?} <= {:?}",
            lo,
            hi
        );
    }

    // Satisfying-assignment probe: the emitted constraints accept a
    // conservative merge and reject an aggressive one.
    let mut probe = Assignment::new();
    probe.insert(p1, rat(5));
    probe.insert(p2, rat(3));
    probe.insert(q1, rat(1));
    probe.insert(q2, rat(2));
    probe.insert(c, rat(3));
    probe.insert(j, rat(2));
    assert!(emitted.iter().all(|con| con.satisfied_by(&probe).unwrap()));
    probe.insert(c, rat(4)); // above min(5, 3)
    assert!(!emitted.iter().all(|con| con.satisfied_by(&probe).unwrap()));

    println!("criterion 4 (weak-merge constraint structure and probes): PASS");
}

fn annot_var_of(result: &AnalysisResult, fn_name: &str, param: &str, idx: usize) -> VarId {
    let mut vars = Vec::new();
    result.signatures[fn_name]
        .entry
        .get(param)
        .unwrap()
        .annot_vars(&mut vars);
    vars[idx]
}

/// Minimize `hi - lo` subject to the given constraints over fresh
/// non-negative copies of every mentioned variable.
fn minimize_gap(result: &AnalysisResult, constraints: &[Constraint], hi: VarId, lo: VarId) -> Rat {
    let mut vars: BTreeSet<VarId> = BTreeSet::from([hi, lo]);
    for c in constraints {
        vars.extend(c.lhs.vars());
        vars.extend(c.rhs.vars());
    }
    let problem = LpProblem {
        vars: vars
            .into_iter()
            .map(|id| VarInfo {
                id,
                kind: VarKind::Potential,
                name: result.var_name(id).to_string(),
            })
            .collect(),
        constraints: constraints.to_vec(),
        objective: LinExpr::var(hi).minus(&LinExpr::var(lo)),
    };
    let solution = problem.solve().expect("probe problem is feasible");
    problem.objective.eval(&solution).unwrap()
}

#[test]
fn criterion_5_relational_claims() {
    let sum = analyzed("sum.rabc");
    let sum_coeff = annots(&sum, "sum_rec", "l")[0].clone();
    let sum2_coeff = annots(&sum, "sum2", "l")[0].clone();
    assert_eq!(sum2_coeff, rat(2) * sum_coeff);
    // Our lowering of sum2 adds no ticks of its own, so the call
    // overhead term is zero and the constant doubles exactly.
    assert_eq!(sum.delta_of("sum2"), rat(2) * sum.delta_of("sum_rec"));

    let rev = analyzed("rev.rabc");
    let rev_coeff = annots(&rev, "rev", "l")[0].clone();
    let rev2_coeff = annots(&rev, "rev2", "l")[0].clone();
    assert_eq!(rev2_coeff, rat(2) * rev_coeff);

    let dup = analyzed("dup.rabc");
    let dup_slope = annots(&dup, "dup", "l")[0].clone() - annots(&dup, "dup", "l")[1].clone();
    let dup2_slope = annots(&dup, "dup2", "l")[0].clone() - annots(&dup, "dup2", "l")[1].clone();
    assert_eq!(dup2_slope, rat(3) * dup_slope);

    println!("criterion 5 (sum2 = 2x sum_rec, rev2 = 2x rev, dup2 slope = 3x dup): PASS");
}

#[test]
fn criterion_6_soundness_fuzz() {
    let mut names = BTreeSet::new();
    let mut runs = 0usize;
    for file in CORPUS {
        let result = analyzed(file);
        for f in &result.program.functions.clone() {
            names.insert(f.name.clone());
            let reports = harness::soundness_sweep(&result, &f.name, 0..=50, DEFAULT_FUEL)
                .unwrap_or_else(|e| panic!("{file} {}: {}", f.name, e));
            for r in &reports {
                assert!(
                    r.is_sound(),
                    "{file} {}: slack {} at size {}",
                    f.name,
                    r.slack,
                    r.size
                );
            }
            runs += reports.len();
        }
    }
    assert!(
        names.len() >= 14,
        "corpus has only {} distinct functions",
        names.len()
    );
    println!(
        "criterion 6 (soundness fuzz, {} functions, {} runs, sizes 0..=50, zero violations): PASS",
        names.len(),
        runs
    );
}

#[test]
fn criterion_7_tightness() {
    let tight: &[(&str, &str)] = &[
        ("iter.rabc", "iter"),
        ("iter.rabc", "iter_twice"),
        ("update.rabc", "update"),
        ("sum.rabc", "sum_rec"),
        ("rev.rabc", "rev_rec"),
    ];
    for (file, name) in tight {
        let result = analyzed(file);
        let reports = harness::soundness_sweep(&result, name, 0..=50, DEFAULT_FUEL).unwrap();
        for r in &reports {
            assert!(
                r.slack.is_zero(),
                "{name} should be tight, slack {} at size {}",
                r.slack,
                r.size
            );
        }
    }
    // Branch-merged programs stay sound but may leave slack: the bound
    // pays for both branches while a run takes one.
    let weak = analyzed("weak.rabc");
    let reports = harness::soundness_sweep(&weak, "weak", 0..=10, DEFAULT_FUEL).unwrap();
    assert!(reports.iter().all(|r| r.is_sound()));
    assert!(reports.iter().any(|r| r.slack.is_positive()));
    println!("criterion 7 (tight benchmarks at zero slack; merges stay upper bounds): PASS");
}

#[test]
fn criterion_8_mutation_detection() {
    let tight: &[(&str, &str)] = &[
        ("iter.rabc", "iter"),
        ("iter.rabc", "iter_twice"),
        ("update.rabc", "update"),
        ("sum.rabc", "sum_rec"),
        ("rev.rabc", "rev_rec"),
        ("dup.rabc", "dup"),
        ("end.rabc", "append"),
    ];
    for (file, name) in tight {
        let mut result = analyzed(file);
        let delta = result.signatures[*name].delta;
        let solved = result.assignment[&delta].clone();
        result.assignment.insert(delta, solved - rat(1));
        let reports = harness::soundness_sweep(&result, name, 0..=5, DEFAULT_FUEL).unwrap();
        assert!(
            reports.iter().any(|r| !r.is_sound()),
            "decrementing {name}'s cost must violate soundness somewhere"
        );
    }
    println!("criterion 8 (decremented costs are caught by the soundness check): PASS");
}

// ---------------------------------------------------------------------
// Criterion 9: property suites.
// ---------------------------------------------------------------------

fn rand_rat(rng: &mut StdRng, max: i64) -> Rat {
    // small rationals with denominator 1, 2 or 4
    let denom = [1, 2, 4][rng.gen_range(0..3)];
    ratio(rng.gen_range(0..=max * denom), denom)
}

fn rand_rat_between(rng: &mut StdRng, lo: &Rat, hi: &Rat) -> Rat {
    // lo + t * (hi - lo) with t in {0, 1/4, 1/2, 3/4, 1}
    let t = ratio(rng.gen_range(0..=4), 4);
    lo.clone() + t * (hi.clone() - lo.clone())
}

#[derive(Clone, Copy)]
enum Shape {
    List,
    BoxList,
    SharedList,
    SharedShared,
    MutList,
    MutSharedList,
    MutMutList,
}

const ALL_SHAPES: &[Shape] = &[
    Shape::List,
    Shape::BoxList,
    Shape::SharedList,
    Shape::SharedShared,
    Shape::MutList,
    Shape::MutSharedList,
    Shape::MutMutList,
];

/// Generate a subtype pair `t1 <= t2` with an assignment satisfying
/// well-formedness of both sides, constructively.
fn gen_subtype_pair(
    rng: &mut StdRng,
    shape: Shape,
    session: &mut Session,
    asgn: &mut Assignment,
) -> (RichType, RichType) {
    let mut fresh = |asgn: &mut Assignment, value: Rat| -> VarId {
        let v = session.fresh(VarKind::Potential, "gen");
        asgn.insert(v, value);
        v
    };
    match shape {
        Shape::List | Shape::BoxList | Shape::SharedList | Shape::SharedShared => {
            let hi = rand_rat(rng, 6);
            let lo = rand_rat_between(rng, &rat(0), &hi);
            let (a1, a2) = (fresh(asgn, lo), fresh(asgn, hi));
            let wrap = |v: VarId| match shape {
                Shape::List => RichType::ListR(v),
                Shape::BoxList => RichType::BoxListR(v),
                Shape::SharedList => RichType::shared(RichType::ListR(v)),
                _ => RichType::shared(RichType::shared(RichType::ListR(v))),
            };
            (wrap(a1), wrap(a2))
        }
        Shape::MutList | Shape::MutSharedList => {
            // currents c1 <= c2, prophecies p2 <= p1, and p_i <= c_i
            let c2 = rand_rat(rng, 6);
            let c1 = rand_rat_between(rng, &rat(0), &c2);
            let p1 = rand_rat_between(rng, &rat(0), &c1);
            let p2 = rand_rat_between(rng, &rat(0), &p1);
            let wrap = |v: RichType| match shape {
                Shape::MutList => v,
                _ => RichType::shared(v),
            };
            let mk = |asgn: &mut Assignment,
                      fresh: &mut dyn FnMut(&mut Assignment, Rat) -> VarId,
                      c: Rat,
                      p: Rat| {
                let cv = fresh(asgn, c);
                let pv = fresh(asgn, p);
                RichType::mutable(wrap(RichType::ListR(cv)), wrap(RichType::ListR(pv)))
            };
            (mk(asgn, &mut fresh, c1, p1), mk(asgn, &mut fresh, c2, p2))
        }
        Shape::MutMutList => {
            // side i is &mut(&mut(a_i, b_i), &mut(c_i, d_i)); the chain
            // b <= d <= c <= a holds within each side, and across sides
            // a1 <= a2, b1 >= b2, c1 >= c2, d1 <= d2.
            let a2 = rand_rat(rng, 8);
            let c2 = rand_rat_between(rng, &rat(0), &a2);
            let d2 = rand_rat_between(rng, &rat(0), &c2);
            let b2 = rand_rat_between(rng, &rat(0), &d2);
            let a1 = rand_rat_between(rng, &c2, &a2);
            let c1 = rand_rat_between(rng, &c2, &a1);
            let d1 = rand_rat_between(rng, &b2, &d2);
            let b1 = rand_rat_between(rng, &b2, &d1);
            let mut mk = |asgn: &mut Assignment, a: Rat, b: Rat, c: Rat, d: Rat| {
                let (av, bv, cv, dv) = (
                    fresh(asgn, a),
                    fresh(asgn, b),
                    fresh(asgn, c),
                    fresh(asgn, d),
                );
                RichType::mutable(
                    RichType::mutable(RichType::ListR(av), RichType::ListR(bv)),
                    RichType::mutable(RichType::ListR(cv), RichType::ListR(dv)),
                )
            };
            (mk(asgn, a1, b1, c1, d1), mk(asgn, a2, b2, c2, d2))
        }
    }
}

/// A runtime value matching a rich type's erasure, with random list
/// lengths. Borrow payloads are cached consistently.
fn value_for(rng: &mut StdRng, t: &RichType) -> Value {
    match t {
        RichType::Bot | RichType::UnitR => Value::Undef,
        RichType::IntR => Value::Int(rng.gen_range(-5..5)),
        RichType::BoolR => Value::BoolV(rng.gen_bool(0.5)),
        RichType::ListR(_) => {
            let len = rng.gen_range(0..8);
            Value::list(&(0..len).map(|i| i as i64).collect::<Vec<_>>())
        }
        RichType::BoxListR(_) => {
            let Value::ListV(lv) = value_for(rng, &RichType::ListR(VarId(0))) else {
                unreachable!()
            };
            Value::boxed_list(lv)
        }
        RichType::SharedR(inner) => {
            let payload = value_for(rng, inner);
            Value::Borrow(RtPlace::var(0, "owner"), Box::new(payload))
        }
        RichType::MutR(current, _) => {
            let payload = value_for(rng, current);
            Value::Borrow(RtPlace::var(0, "owner"), Box::new(payload))
        }
    }
}

fn check_all(constraints: &[Constraint], asgn: &Assignment) -> bool {
    constraints.iter().all(|c| c.satisfied_by(asgn).unwrap())
}

fn lemma_1_monotonicity(rng: &mut StdRng, cases: usize) {
    for i in 0..cases {
        let shape = ALL_SHAPES[rng.gen_range(0..ALL_SHAPES.len())];
        let mut session = Session::new();
        let mut asgn = Assignment::new();
        let (t1, t2) = gen_subtype_pair(rng, shape, &mut session, &mut asgn);
        // the generated assignment satisfies the emitted judgements
        let mut cs = annot::subtype(&t1, &t2, "t").unwrap();
        cs.extend(annot::wellformed(&t1, "t"));
        cs.extend(annot::wellformed(&t2, "t"));
        assert!(check_all(&cs, &asgn), "generator broke its own constraints");
        // and the potentials are ordered on every matching value
        let v = value_for(rng, &t1);
        let phi1 = potential(&v, &t1, &asgn).unwrap();
        let phi2 = potential(&v, &t2, &asgn).unwrap();
        assert!(
            !phi1.is_negative() && phi1 <= phi2,
            "case {i}: 0 <= {phi1} <= {phi2} failed"
        );
    }
}

fn mutless(shape: Shape) -> bool {
    matches!(
        shape,
        Shape::List | Shape::BoxList | Shape::SharedList | Shape::SharedShared
    )
}

fn share_conservation(rng: &mut StdRng, cases: usize) {
    let shapes: Vec<Shape> = ALL_SHAPES.iter().copied().filter(|s| mutless(*s)).collect();
    for i in 0..cases {
        let shape = shapes[rng.gen_range(0..shapes.len())];
        let mut session = Session::new();
        let mut asgn = Assignment::new();
        // total type with a known annotation value
        let total_value = rand_rat(rng, 8);
        let alpha = session.fresh(VarKind::Potential, "a");
        asgn.insert(alpha, total_value);
        let t = match shape {
            Shape::List => RichType::ListR(alpha),
            Shape::BoxList => RichType::BoxListR(alpha),
            Shape::SharedList => RichType::shared(RichType::ListR(alpha)),
            _ => RichType::shared(RichType::shared(RichType::ListR(alpha))),
        };
        let (t1, t2, cs) = annot::share(&t, &mut session, "sh").unwrap();
        // satisfy each sum constraint by splitting randomly
        for c in &cs {
            let (total, parts) = (&c.lhs, &c.rhs);
            let total = total.eval(&asgn).unwrap();
            let part_vars: Vec<VarId> = parts.vars().collect();
            assert_eq!(part_vars.len(), 2);
            let left = rand_rat_between(rng, &rat(0), &total);
            asgn.insert(part_vars[0], left.clone());
            asgn.insert(part_vars[1], total - left);
        }
        assert!(check_all(&cs, &asgn));
        let v = value_for(rng, &t);
        let whole = potential(&v, &t, &asgn).unwrap();
        let first = potential(&v, &t1, &asgn).unwrap();
        let second = potential(&v, &t2, &asgn).unwrap();
        assert_eq!(whole, first.clone() + second.clone(), "case {i}");
    }
}

/// One coherent store/context pair with a writable place, for the update
/// lemma. Returns the place, plus a generator for shape-correct new
/// values and types.
struct UpdateCase {
    store: Store,
    ctx: TypingContext,
    place: Place,
}

fn gen_update_case(rng: &mut StdRng, session: &mut Session, asgn: &mut Assignment) -> UpdateCase {
    let mut fresh = |asgn: &mut Assignment, value: Rat| -> VarId {
        let v = session.fresh(VarKind::Potential, "g");
        asgn.insert(v, value);
        v
    };
    let mut store = Store::new();
    let mut ctx = TypingContext::new();
    let lv = value_for(rng, &RichType::ListR(VarId(0)));
    match rng.gen_range(0..3) {
        // plain list variable
        0 => {
            let a = fresh(asgn, rand_rat(rng, 6));
            store.set_var(1, "x", lv);
            ctx.insert("x", RichType::ListR(a));
            UpdateCase {
                store,
                ctx,
                place: Place::var("x"),
            }
        }
        // through a box
        1 => {
            let a = fresh(asgn, rand_rat(rng, 6));
            let Value::ListV(inner) = lv else { unreachable!() };
            store.set_var(1, "x", Value::boxed_list(inner));
            ctx.insert("x", RichType::BoxListR(a));
            UpdateCase {
                store,
                ctx,
                place: Place::var("x").deref(),
            }
        }
        // through a mutable borrow: the lender's context type is the
        // borrow's prophecy, and the cached payload matches the origin
        _ => {
            let c = rand_rat(rng, 6);
            let q = rand_rat_between(rng, &rat(0), &c);
            let cv = fresh(asgn, c);
            let qv = fresh(asgn, q);
            store.set_var(1, "y", lv.clone());
            store.set_var(1, "x", Value::Borrow(RtPlace::var(1, "y"), Box::new(lv)));
            ctx.insert("y", RichType::ListR(qv));
            ctx.insert(
                "x",
                RichType::mutable(RichType::ListR(cv), RichType::ListR(qv)),
            );
            UpdateCase {
                store,
                ctx,
                place: Place::var("x").deref(),
            }
        }
    }
}

fn lemma_3_update(rng: &mut StdRng, cases: usize) {
    for i in 0..cases {
        let mut session = Session::new();
        let mut asgn = Assignment::new();
        let case = gen_update_case(rng, &mut session, &mut asgn);
        let rt = RtPlace::from_place(1, &case.place);
        let old_value = case.store.read(&rt).unwrap();
        let tau = case.ctx.read(&case.place, Default::default()).unwrap();

        // store write: a fresh list value of the same shape
        let new_value = match &old_value {
            Value::ListV(_) => value_for(rng, &RichType::ListR(VarId(0))),
            _ => unreachable!("all cases read list values"),
        };
        let mut store2 = case.store.clone();
        store2.write(&rt, new_value.clone()).unwrap();
        let lhs = potential_store(&store2, 1, &case.ctx, &asgn).unwrap()
            - potential_store(&case.store, 1, &case.ctx, &asgn).unwrap();
        let rhs = potential(&new_value, &tau, &asgn).unwrap()
            - potential(&old_value, &tau, &asgn).unwrap();
        assert_eq!(lhs, rhs, "store update case {i}");

        // context write: a fresh annotation of the same shape
        let b = session.fresh(VarKind::Potential, "new");
        asgn.insert(b, rand_rat(rng, 6));
        let new_type = RichType::ListR(b);
        let mut ctx2 = case.ctx.clone();
        ctx2.write(&case.place, new_type.clone(), Default::default(), "t")
            .unwrap();
        let lhs = potential_store(&case.store, 1, &ctx2, &asgn).unwrap()
            - potential_store(&case.store, 1, &case.ctx, &asgn).unwrap();
        let rhs = potential(&old_value, &new_type, &asgn).unwrap()
            - potential(&old_value, &tau, &asgn).unwrap();
        assert_eq!(lhs, rhs, "context update case {i}");
    }
}

fn lemma_4_evaluation(rng: &mut StdRng, cases: usize) {
    let program = parse("fn dummy() -> unit { return; }").unwrap();
    for i in 0..cases {
        let mut session = Session::new();
        let mut asgn = Assignment::new();
        // one variable of a borrowable shape
        let shape = ALL_SHAPES[rng.gen_range(0..ALL_SHAPES.len())];
        let (t, _) = gen_subtype_pair(rng, shape, &mut session, &mut asgn);
        let value = value_for(rng, &t);
        let mut ctx = TypingContext::new();
        ctx.insert("x", t.clone());
        let mut store = Store::new();
        store.set_var(1, "x", value);

        let place = Place::var("x");
        let expr = match rng.gen_range(0..4) {
            0 => ExprKind::Move(place),
            1 if !t.contains_mut() => ExprKind::BorrowShared(place),
            2 => ExprKind::BorrowMut(place),
            _ => ExprKind::Nil,
        };
        let expr = Expr {
            kind: expr,
            span: Default::default(),
        };

        let mut interp = Interp::new(&program, 100);
        interp.store = store.clone();
        let value = interp.eval_expr(1, &expr).unwrap();
        assert_eq!(interp.store, store, "expression evaluation must be pure");

        let watermark = session.constraint_watermark();
        let mut ctx2 = ctx.clone();
        let tau = infer::type_expr(&mut ctx2, &expr, &mut session, "t").unwrap();
        // give every fresh variable a value: split sums exactly, draw
        // the rest (prophecies, nil annotations) at random
        for c in session.constraints()[watermark..].to_vec() {
            let unknown: Vec<VarId> = c
                .lhs
                .vars()
                .chain(c.rhs.vars())
                .filter(|v| !asgn.contains_key(v))
                .collect();
            if c.rel == Relation::Eq && unknown.len() == 2 {
                let total = c.lhs.eval(&asgn).unwrap();
                let left = rand_rat_between(rng, &rat(0), &total);
                asgn.insert(unknown[0], left.clone());
                asgn.insert(unknown[1], total - left);
            }
        }
        for info in session.vars() {
            asgn.entry(info.id).or_insert_with(|| rand_rat(rng, 6));
        }
        assert!(check_all(&session.constraints()[watermark..], &asgn));

        let before = potential_store(&store, 1, &ctx, &asgn).unwrap();
        let after = potential_store(&store, 1, &ctx2, &asgn).unwrap();
        let lost = potential(&value, &tau, &asgn).unwrap();
        assert_eq!(after - before, -lost, "evaluation lemma case {i}");
    }
}

// Brute-force vertex enumeration oracle for tiny linear programs.
mod vertex_oracle {
    use super::*;

    /// Solve an n-by-n rational system; None when singular.
    fn solve_square(mut m: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, pivot);
            b.swap(col, pivot);
            let p = m[col][col].clone();
            for x in m[col].iter_mut() {
                *x /= &p;
            }
            b[col] /= &p;
            for r in 0..n {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c2 in 0..n {
                        let v = &m[col][c2] * &f;
                        m[r][c2] -= v;
                    }
                    let v = &b[col] * &f;
                    b[r] -= v;
                }
            }
        }
        Some(b)
    }

    /// Minimum objective value over all vertices of the feasible region,
    /// or None when no vertex is feasible.
    pub fn minimum(problem: &LpProblem) -> Option<Rat> {
        let n = problem.vars.len();
        let ids: Vec<VarId> = problem.vars.iter().map(|v| v.id).collect();
        // hyperplanes: constraint boundaries plus the axes
        let mut planes: Vec<(Vec<Rat>, Rat)> = Vec::new();
        for c in &problem.constraints {
            let (expr, _) = c.normalized();
            let coeffs: Vec<Rat> = ids
                .iter()
                .map(|id| {
                    expr.terms()
                        .find(|(v, _)| v == id)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(Rat::zero)
                })
                .collect();
            planes.push((coeffs, -expr.constant_part().clone()));
        }
        for i in 0..n {
            let mut axis = vec![Rat::zero(); n];
            axis[i] = rat(1);
            planes.push((axis, Rat::zero()));
        }

        let feasible = |point: &[Rat]| -> bool {
            if point.iter().any(|x| x.is_negative()) {
                return false;
            }
            let mut asgn = Assignment::new();
            for (id, v) in ids.iter().zip(point) {
                asgn.insert(*id, v.clone());
            }
            problem
                .constraints
                .iter()
                .all(|c| c.satisfied_by(&asgn).unwrap())
        };

        let mut best: Option<Rat> = None;
        for_each_combination(planes.len(), n, &mut |subset| {
            let m: Vec<Vec<Rat>> = subset.iter().map(|&i| planes[i].0.clone()).collect();
            let b: Vec<Rat> = subset.iter().map(|&i| planes[i].1.clone()).collect();
            if let Some(point) = solve_square(m, b) {
                if feasible(&point) {
                    let mut asgn = Assignment::new();
                    for (id, v) in ids.iter().zip(&point) {
                        asgn.insert(*id, v.clone());
                    }
                    let value = problem.objective.eval(&asgn).unwrap();
                    best = Some(match best.take() {
                        None => value,
                        Some(b) if value < b => value,
                        Some(b) => b,
                    });
                }
            }
        });
        best
    }

    fn for_each_combination(total: usize, k: usize, f: &mut impl FnMut(&[usize])) {
        fn rec(
            total: usize,
            k: usize,
            from: usize,
            acc: &mut Vec<usize>,
            f: &mut impl FnMut(&[usize]),
        ) {
            if acc.len() == k {
                f(acc);
                return;
            }
            for i in from..total {
                acc.push(i);
                rec(total, k, i + 1, acc, f);
                acc.pop();
            }
        }
        rec(total, k, 0, &mut Vec::new(), f);
    }
}

fn lp_against_vertex_oracle(rng: &mut StdRng, cases: usize) {
    for case in 0..cases {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(0..=6);
        let vars: Vec<VarInfo> = (0..n)
            .map(|i| VarInfo {
                id: VarId(i as u32),
                kind: VarKind::Potential,
                name: format!("x{}", i),
            })
            .collect();
        let mut constraints = Vec::new();
        for ci in 0..m {
            let mut lhs = LinExpr::zero();
            for v in &vars {
                lhs.add_term(v.id, rat(rng.gen_range(-3..=3)));
            }
            let rhs = LinExpr::constant(rat(rng.gen_range(-2..=6)));
            let c = if rng.gen_bool(0.7) {
                Constraint::le(lhs, rhs, format!("c{}", ci))
            } else {
                Constraint::eq(lhs, rhs, format!("c{}", ci))
            };
            constraints.push(c);
        }
        let mut objective = LinExpr::zero();
        for v in &vars {
            objective.add_term(v.id, rat(rng.gen_range(0..=4)));
        }
        let problem = LpProblem {
            vars,
            constraints,
            objective: objective.clone(),
        };
        let oracle = vertex_oracle::minimum(&problem);
        match problem.solve() {
            Ok(solution) => {
                let got = objective.eval(&solution).unwrap();
                let want = oracle.unwrap_or_else(|| {
                    panic!("case {case}: solver found a solution, oracle found none")
                });
                assert_eq!(got, want, "case {case}: solver and oracle optima differ");
            }
            Err(rabc::LpError::Infeasible(_)) => {
                assert!(oracle.is_none(), "case {case}: oracle disagrees on infeasibility");
            }
            Err(other) => panic!("case {case}: unexpected solver error {other}"),
        }
    }
}

#[test]
fn criterion_9_property_suites() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    lemma_1_monotonicity(&mut rng, 1000);
    share_conservation(&mut rng, 1000);
    lemma_3_update(&mut rng, 1000);
    lemma_4_evaluation(&mut rng, 1000);
    lp_against_vertex_oracle(&mut rng, 200);
    println!(
        "criterion 9 (monotonicity, share conservation, update/evaluation lemmas x1000, \
         LP vertex oracle x200): PASS"
    );
}
