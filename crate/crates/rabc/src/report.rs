//! Rendering of analysis results: signature lines, constraint listings,
//! and the JSON report schemas.

use num::One;
use serde::{Deserialize, Serialize};

use crate::annot::RichType;
use crate::harness::{FitReport, PotentialReport};
use crate::infer::AnalysisResult;
use crate::lp::Rat;
use crate::syntax::RET;

/// Render a rational: integers plainly, fractions as `p/q`.
pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse the `rat_str` form back.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let n: num::BigInt = num.trim().parse().ok()?;
            let d: num::BigInt = den.trim().parse().ok()?;
            if d == num::BigInt::from(0) {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => {
            let n: num::BigInt = s.parse().ok()?;
            Some(Rat::from_integer(n))
        }
    }
}

fn annotated_type(t: &RichType, result: &AnalysisResult, paper_style: bool) -> String {
    match t {
        RichType::Bot => "bot".into(),
        RichType::IntR => "i32".into(),
        RichType::BoolR => "bool".into(),
        RichType::UnitR => "unit".into(),
        RichType::ListR(a) => format!("list({})", rat_str(&result.value_of(*a))),
        RichType::BoxListR(a) => format!("box list({})", rat_str(&result.value_of(*a))),
        RichType::SharedR(inner) => format!("&{}", annotated_type(inner, result, paper_style)),
        RichType::MutR(current, prophecy) => {
            if paper_style {
                // The prose form shows only the current component.
                return format!("&mut {}", annotated_type(current, result, paper_style));
            }
            match (&**current, &**prophecy) {
                (RichType::ListR(c), RichType::ListR(p)) => format!(
                    "&mut list({}, {})",
                    rat_str(&result.value_of(*c)),
                    rat_str(&result.value_of(*p))
                ),
                (RichType::BoxListR(c), RichType::BoxListR(p)) => format!(
                    "&mut box list({}, {})",
                    rat_str(&result.value_of(*c)),
                    rat_str(&result.value_of(*p))
                ),
                _ => format!(
                    "&mut({}, {})",
                    annotated_type(current, result, paper_style),
                    annotated_type(prophecy, result, paper_style)
                ),
            }
        }
    }
}

/// One signature line, e.g. `iter : fn(l: &list(2)) -> unit | 1`.
pub fn signature_line(result: &AnalysisResult, fn_name: &str, paper_style: bool) -> String {
    let sig = &result.signatures[fn_name];
    let params: Vec<String> = sig
        .param_names
        .iter()
        .map(|p| {
            format!(
                "{}: {}",
                p,
                annotated_type(sig.entry.get(p).expect("domain"), result, paper_style)
            )
        })
        .collect();
    let ret = annotated_type(sig.entry.get(RET).expect("domain"), result, paper_style);
    format!(
        "{} : fn({}) -> {} | {}",
        fn_name,
        params.join(", "),
        ret,
        rat_str(&result.delta_of(fn_name))
    )
}

/// All signatures in program order.
pub fn signature_report(result: &AnalysisResult, paper_style: bool) -> String {
    let mut out = String::new();
    for f in &result.program.functions {
        out.push_str(&signature_line(result, &f.name, paper_style));
        out.push('\n');
    }
    out
}

/// Constraint listing with provenance notes, for `--explain`.
pub fn explain_constraints(result: &AnalysisResult) -> String {
    let mut out = String::new();
    for (gi, group) in result.groups.iter().enumerate() {
        out.push_str(&format!(
            "group {} [{}]: {} variables, {} constraints\n",
            gi,
            group.functions.join(", "),
            group.var_range.1 - group.var_range.0,
            group.constraint_range.1 - group.constraint_range.0
        ));
        for c in &result.constraints[group.constraint_range.0..group.constraint_range.1] {
            let rendered = c.display_with(|v| result.var_name(v).to_string());
            out.push_str(&format!("  {}    ; {}\n", rendered, c.provenance));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct JsonTyped {
    #[serde(rename = "type")]
    pub ty: String,
    pub annotations: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct JsonParam {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub annotations: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct JsonFunction {
    pub name: String,
    pub params: Vec<JsonParam>,
    pub ret: JsonTyped,
    pub delta: String,
    pub constraints_count: usize,
}

/// Schema of `analyze --json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct JsonReport {
    pub functions: Vec<JsonFunction>,
    pub solved: bool,
}

fn annotation_values(t: &RichType, result: &AnalysisResult) -> Vec<String> {
    let mut vars = Vec::new();
    t.annot_vars(&mut vars);
    vars.into_iter()
        .map(|v| rat_str(&result.value_of(v)))
        .collect()
}

pub fn json_report(result: &AnalysisResult) -> JsonReport {
    let functions = result
        .program
        .functions
        .iter()
        .map(|f| {
            let sig = &result.signatures[&f.name];
            let group = result
                .groups
                .iter()
                .find(|g| g.functions.contains(&f.name))
                .expect("every function belongs to a group");
            JsonFunction {
                name: f.name.clone(),
                params: f
                    .params
                    .iter()
                    .map(|(pname, pty)| JsonParam {
                        name: pname.clone(),
                        ty: pty.to_string(),
                        annotations: annotation_values(
                            sig.entry.get(pname).expect("domain"),
                            result,
                        ),
                    })
                    .collect(),
                ret: JsonTyped {
                    ty: f.ret.to_string(),
                    annotations: annotation_values(sig.entry.get(RET).expect("domain"), result),
                },
                delta: rat_str(&result.delta_of(&f.name)),
                constraints_count: group.constraint_range.1 - group.constraint_range.0,
            }
        })
        .collect();
    JsonReport {
        functions,
        solved: true,
    }
}

/// Per-benchmark schema of `check --json`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct JsonCheck {
    #[serde(rename = "fn")]
    pub fn_name: String,
    pub sizes: Vec<usize>,
    pub costs: Vec<i64>,
    pub bound_coeffs: Vec<String>,
    pub slack_max: String,
    pub sound: bool,
    pub tight: bool,
}

pub fn json_check_from_fit(fit: &FitReport) -> JsonCheck {
    JsonCheck {
        fn_name: fit.fn_name.clone(),
        sizes: fit.sizes.clone(),
        costs: fit.costs.clone(),
        bound_coeffs: vec![rat_str(&fit.bound_constant), rat_str(&fit.bound_slope)],
        slack_max: rat_str(&fit.max_slack),
        sound: fit.sound,
        tight: fit.tight,
    }
}

/// Fallback schema for functions that only run the soundness sweep
/// (e.g. several list-bearing parameters).
pub fn json_check_from_sweep(fn_name: &str, reports: &[PotentialReport]) -> JsonCheck {
    let mut sizes = Vec::new();
    let mut costs = Vec::new();
    for r in reports {
        if sizes.last() != Some(&r.size) {
            sizes.push(r.size);
            costs.push(r.runtime_cost);
        } else if let Some(last) = costs.last_mut() {
            *last = (*last).max(r.runtime_cost);
        }
    }
    let slack_max = reports
        .iter()
        .map(|r| r.slack.clone())
        .max()
        .unwrap_or_else(|| crate::lp::rat(0));
    JsonCheck {
        fn_name: fn_name.to_string(),
        sizes,
        costs,
        bound_coeffs: vec![],
        slack_max: rat_str(&slack_max),
        sound: reports.iter().all(|r| r.is_sound()),
        tight: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::analyze;
    use crate::lp::{rat, ratio};
    use crate::syntax::parse;

    #[test]
    fn rational_rendering_round_trips() {
        for r in [rat(0), rat(7), rat(-3), ratio(7, 2), ratio(-1, 1024)] {
            assert_eq!(parse_rat(&rat_str(&r)), Some(r));
        }
        assert_eq!(parse_rat("1/0"), None);
    }

    #[test]
    fn signature_lines_match_expected_shape() {
        let src = "
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
            fn update(l: &mut list) -> unit {
                let u: unit;
                u := iter(&*l);
                *l := cons(3, box(nil));
                u := iter(&*l);
                u := iter(&*l);
                return;
            }
        ";
        let result = analyze(&parse(src).unwrap()).unwrap();
        assert_eq!(
            signature_line(&result, "iter", false),
            "iter : fn(l: &list(2)) -> unit | 1"
        );
        assert_eq!(
            signature_line(&result, "update", false),
            "update : fn(l: &mut list(2, 0)) -> unit | 7"
        );
        assert_eq!(
            signature_line(&result, "update", true),
            "update : fn(l: &mut list(2)) -> unit | 7"
        );
    }

    #[test]
    fn json_report_round_trips() {
        let src = "fn noop(x: i32) -> unit { tick(3); return; }";
        let result = analyze(&parse(src).unwrap()).unwrap();
        let report = json_report(&result);
        let text = serde_json::to_string(&report).unwrap();
        let back: JsonReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report, back);
        assert_eq!(back.functions[0].delta, "3");
        assert!(back.solved);
    }
}
