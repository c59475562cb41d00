//! Command-line entry points: analyze, run, check.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::harness::{self, list_param_count, HarnessError};
use crate::infer::{analyze_with, AnalysisResult, AnalyzeError, AnalyzerOptions};
use crate::interp::{Interp, RtPlace, Value, DEFAULT_FUEL, ENTRY_FRAME, OWNER_FRAME};
use crate::lp::Rat;
use crate::report::{
    explain_constraints, json_check_from_fit, json_check_from_sweep, json_report, parse_rat,
    rat_str, signature_report, JsonCheck,
};
use crate::syntax::{parse, print_stmt_line, validate, Program, SimpleType, RET};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_TYPE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "rabc",
    version,
    about = "Linear resource-bound inference and cost checking for .rabc programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Infer resource-annotated signatures and print them.
    Analyze {
        file: PathBuf,
        /// Emit the full analysis result as JSON.
        #[arg(long)]
        json: bool,
        /// Write each group's linear program in CPLEX-LP format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        /// Show only the current component of mutable references.
        #[arg(long)]
        paper_style: bool,
        /// List every collected constraint with its provenance.
        #[arg(long)]
        explain: bool,
        /// Objective weight for signature annotations.
        #[arg(long, default_value = "1024")]
        w_sig: String,
        /// Objective weight for internal potential annotations.
        #[arg(long, default_value = "1/1024")]
        w_int: String,
    },
    /// Execute a function on literal arguments and report the cost.
    Run {
        file: PathBuf,
        /// Function to run.
        #[arg(long = "fn")]
        function: String,
        /// Comma-separated value literals: integers, true/false, [1,2,3].
        #[arg(long, default_value = "")]
        args: String,
        /// Statement budget.
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Print each executed statement with the running cost.
        #[arg(long)]
        trace: bool,
    },
    /// Analyze, then validate bounds against measured costs over a size
    /// range.
    Check {
        file: PathBuf,
        /// Inclusive size range, e.g. 0..50.
        #[arg(long, default_value = "0..50")]
        sizes: String,
        /// Emit one JSON record per benchmark.
        #[arg(long)]
        json: bool,
        /// Replay a (possibly stale) assignment dumped earlier instead of
        /// trusting the fresh solution.
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Write the solved assignment as JSON.
        #[arg(long)]
        dump_assignment: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        #[arg(long, default_value = "1024")]
        w_sig: String,
        #[arg(long, default_value = "1/1024")]
        w_int: String,
    },
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Analyze {
            file,
            json,
            dump_lp,
            paper_style,
            explain,
            w_sig,
            w_int,
        } => cmd_analyze(&file, json, dump_lp.as_deref(), paper_style, explain, &w_sig, &w_int),
        Command::Run {
            file,
            function,
            args,
            fuel,
            trace,
        } => cmd_run(&file, &function, &args, fuel, trace),
        Command::Check {
            file,
            sizes,
            json,
            assignment,
            dump_assignment,
            fuel,
            w_sig,
            w_int,
        } => cmd_check(
            &file,
            &sizes,
            json,
            assignment.as_deref(),
            dump_assignment.as_deref(),
            fuel,
            &w_sig,
            &w_int,
        ),
    }
}

fn load_program(path: &Path) -> Result<Program, i32> {
    let source = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {}", path.display(), e);
        EXIT_PARSE
    })?;
    let program = parse(&source).map_err(|e| {
        eprintln!("error: {}", e);
        EXIT_PARSE
    })?;
    let report = validate(&program);
    if !report.is_empty() {
        eprint!("{}", report);
        return Err(EXIT_PARSE);
    }
    Ok(program)
}

fn weight_options(w_sig: &str, w_int: &str) -> Result<AnalyzerOptions, i32> {
    let parse_weight = |s: &str, what: &str| -> Result<Rat, i32> {
        match parse_rat(s) {
            Some(r) if r > Rat::from_integer(0.into()) => Ok(r),
            _ => {
                eprintln!("error: {} must be a positive rational, got `{}`", what, s);
                Err(EXIT_PARSE)
            }
        }
    };
    Ok(AnalyzerOptions {
        w_sig: parse_weight(w_sig, "--w-sig")?,
        w_int: parse_weight(w_int, "--w-int")?,
    })
}

fn run_analysis(program: &Program, options: &AnalyzerOptions) -> Result<AnalysisResult, i32> {
    analyze_with(program, options).map_err(|e| match e {
        AnalyzeError::Invalid(report) => {
            eprint!("{}", report);
            EXIT_PARSE
        }
        AnalyzeError::Type(err) => {
            eprintln!("type error: {}", err);
            EXIT_TYPE
        }
        AnalyzeError::Infeasible { .. } => {
            eprintln!("error: {}", e);
            EXIT_TYPE
        }
        AnalyzeError::Internal(msg) => {
            eprintln!("internal error: {}", msg);
            EXIT_INTERNAL
        }
    })
}

fn cmd_analyze(
    file: &Path,
    json: bool,
    dump_lp: Option<&Path>,
    paper_style: bool,
    explain: bool,
    w_sig: &str,
    w_int: &str,
) -> i32 {
    let program = match load_program(file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let options = match weight_options(w_sig, w_int) {
        Ok(o) => o,
        Err(code) => return code,
    };
    let result = match run_analysis(&program, &options) {
        Ok(r) => r,
        Err(code) => return code,
    };
    if let Some(path) = dump_lp {
        if let Err(e) = write_lp_dumps(&result, path) {
            eprintln!("error: cannot write LP dump: {}", e);
            return EXIT_INTERNAL;
        }
    }
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json_report(&result)).expect("serializable")
        );
    } else {
        print!("{}", signature_report(&result, paper_style));
    }
    if explain {
        print!("{}", explain_constraints(&result));
    }
    EXIT_OK
}

fn write_lp_dumps(result: &AnalysisResult, path: &Path) -> std::io::Result<()> {
    if result.lp_problems.len() == 1 {
        let mut out = fs::File::create(path)?;
        let comment = format!("group 0 [{}]", result.groups[0].functions.join(", "));
        result.lp_problems[0].dump_cplex_lp(&mut out, &comment)?;
        return Ok(());
    }
    for (i, problem) in result.lp_problems.iter().enumerate() {
        let numbered = PathBuf::from(format!("{}.g{}", path.display(), i));
        let mut out = fs::File::create(&numbered)?;
        let comment = format!("group {} [{}]", i, result.groups[i].functions.join(", "));
        problem.dump_cplex_lp(&mut out, &comment)?;
        eprintln!("wrote {}", numbered.display());
    }
    Ok(())
}

fn cmd_run(file: &Path, function: &str, args: &str, fuel: u64, trace: bool) -> i32 {
    let program = match load_program(file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let Some(f) = program.function(function) else {
        eprintln!("error: no function named `{}`", function);
        return EXIT_RUNTIME;
    };
    let literals = match parse_value_literals(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: bad argument literals: {}", e);
            return EXIT_RUNTIME;
        }
    };
    if literals.len() != f.params.len() {
        eprintln!(
            "error: `{}` takes {} argument(s), got {}",
            function,
            f.params.len(),
            literals.len()
        );
        return EXIT_RUNTIME;
    }

    let mut interp = Interp::new(&program, fuel);
    let mut owners = 0usize;
    let mut wrapped = Vec::new();
    for ((pname, pty), lit) in f.params.iter().zip(literals) {
        match wrap_literal(pty, lit, &mut interp, &mut owners) {
            Ok(v) => wrapped.push(v),
            Err(e) => {
                eprintln!("error: argument for `{}`: {}", pname, e);
                return EXIT_RUNTIME;
            }
        }
    }
    if trace {
        interp.set_trace(Box::new(|s, cost| {
            eprintln!("[cost {:>5}] {}", cost, print_stmt_line(s));
        }));
    }
    if let Err(e) = interp.bind_entry(f, wrapped).and_then(|()| interp.exec_entry(f)) {
        eprintln!("error: {}", e);
        return EXIT_RUNTIME;
    }
    let ret = interp.store.get_var(ENTRY_FRAME, RET);
    if ret != Value::Undef {
        println!("ret = {}", ret);
    }
    println!("cost = {}", interp.cost());
    EXIT_OK
}

/// Wrap a literal value for a parameter: reference-shaped parameters get
/// a hidden owner slot holding the payload, with the argument borrowing
/// from it.
fn wrap_literal(
    ty: &SimpleType,
    lit: Value,
    interp: &mut Interp<'_>,
    owners: &mut usize,
) -> Result<Value, String> {
    match ty {
        SimpleType::Int => match lit {
            v @ Value::Int(_) => Ok(v),
            other => Err(format!("expected an integer, got {}", other)),
        },
        SimpleType::Bool => match lit {
            v @ Value::BoolV(_) => Ok(v),
            other => Err(format!("expected a boolean, got {}", other)),
        },
        SimpleType::List => match lit {
            v @ Value::ListV(_) => Ok(v),
            other => Err(format!("expected a list, got {}", other)),
        },
        SimpleType::BoxList => match lit {
            Value::ListV(lv) => Ok(Value::boxed_list(lv)),
            other => Err(format!("expected a list, got {}", other)),
        },
        SimpleType::Unit => Err("unit parameters cannot be supplied".to_string()),
        SimpleType::SharedRef(inner) | SimpleType::MutRef(inner) => {
            let payload = wrap_literal(inner, lit, interp, owners)?;
            let name = format!("own{}", *owners);
            *owners += 1;
            interp.store.set_var(OWNER_FRAME, &name, payload.clone());
            Ok(Value::Borrow(
                RtPlace::var(OWNER_FRAME, name),
                Box::new(payload),
            ))
        }
    }
}

fn parse_value_literals(s: &str) -> Result<Vec<Value>, String> {
    let trimmed = s.trim();
    if trimmed.is_empty() {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in trimmed.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.checked_sub(1).ok_or("unbalanced `]`")?,
            ',' if depth == 0 => {
                out.push(parse_value_literal(&trimmed[start..i])?);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(parse_value_literal(&trimmed[start..])?);
    Ok(out)
}

fn parse_value_literal(s: &str) -> Result<Value, String> {
    let t = s.trim();
    match t {
        "true" => return Ok(Value::BoolV(true)),
        "false" => return Ok(Value::BoolV(false)),
        _ => {}
    }
    if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(Value::list(&[]));
        }
        let items: Result<Vec<i64>, _> = inner
            .split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|e| e.to_string()))
            .collect();
        return Ok(Value::list(&items?));
    }
    t.parse::<i64>()
        .map(Value::Int)
        .map_err(|_| format!("cannot parse `{}` as a value", t))
}

fn parse_sizes(s: &str) -> Result<(usize, usize), String> {
    let cleaned = s.trim().replace("..=", "..");
    let (lo, hi) = cleaned
        .split_once("..")
        .ok_or_else(|| format!("expected a range like 0..50, got `{}`", s))?;
    let lo: usize = lo.trim().parse().map_err(|_| "bad range start".to_string())?;
    let hi: usize = hi.trim().parse().map_err(|_| "bad range end".to_string())?;
    if lo > hi {
        return Err("range start exceeds end".to_string());
    }
    Ok((lo, hi))
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    file: &Path,
    sizes: &str,
    json: bool,
    assignment: Option<&Path>,
    dump_assignment: Option<&Path>,
    fuel: u64,
    w_sig: &str,
    w_int: &str,
) -> i32 {
    let program = match load_program(file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let options = match weight_options(w_sig, w_int) {
        Ok(o) => o,
        Err(code) => return code,
    };
    let (lo, hi) = match parse_sizes(sizes) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_PARSE;
        }
    };
    let mut result = match run_analysis(&program, &options) {
        Ok(r) => r,
        Err(code) => return code,
    };

    if let Some(path) = dump_assignment {
        let map: BTreeMap<String, String> = result
            .assignment
            .iter()
            .map(|(v, value)| (result.var_name(*v).to_string(), rat_str(value)))
            .collect();
        let text = serde_json::to_string_pretty(&map).expect("serializable");
        if let Err(e) = fs::write(path, text) {
            eprintln!("error: cannot write assignment: {}", e);
            return EXIT_INTERNAL;
        }
    }
    if let Some(path) = assignment {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read assignment: {}", e);
                return EXIT_PARSE;
            }
        };
        let map: BTreeMap<String, String> = match serde_json::from_str(&text) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: bad assignment file: {}", e);
                return EXIT_PARSE;
            }
        };
        for (name, value) in map {
            let Some(value) = parse_rat(&value) else {
                eprintln!("error: bad rational `{}` for `{}`", value, name);
                return EXIT_PARSE;
            };
            if !result.override_var(&name, value) {
                eprintln!("warning: no variable named `{}` in this analysis", name);
            }
        }
    }

    let mut records: Vec<JsonCheck> = Vec::new();
    let mut violations = 0usize;
    let mut runs = 0usize;
    for f in &program.functions {
        if f.params.iter().any(|(_, t)| matches!(t, SimpleType::Unit)) {
            if !json {
                println!("{}: skipped (unit parameter)", f.name);
            }
            continue;
        }
        let sweep = match harness::soundness_sweep(&result, &f.name, lo..=hi, fuel) {
            Ok(reports) => reports,
            Err(HarnessError::Runtime(e)) => {
                eprintln!("error: running `{}`: {}", f.name, e);
                return EXIT_RUNTIME;
            }
            Err(HarnessError::NotRunnable(_, why)) => {
                if !json {
                    println!("{}: skipped ({})", f.name, why);
                }
                continue;
            }
            Err(e) => {
                eprintln!("internal error: {}", e);
                return EXIT_INTERNAL;
            }
        };
        runs += sweep.len();
        let unsound_runs = sweep.iter().filter(|r| !r.is_sound()).count();
        violations += unsound_runs;

        let record = if list_param_count(f) <= 1 {
            match harness::measure_and_fit(&result, &f.name, lo..=hi, fuel) {
                Ok(fit) => {
                    if !fit.sound {
                        violations += 1;
                    }
                    json_check_from_fit(&fit)
                }
                Err(HarnessError::Runtime(e)) => {
                    eprintln!("error: running `{}`: {}", f.name, e);
                    return EXIT_RUNTIME;
                }
                Err(e) => {
                    eprintln!("internal error: {}", e);
                    return EXIT_INTERNAL;
                }
            }
        } else {
            json_check_from_sweep(&f.name, &sweep)
        };
        let mut record = record;
        record.sound = record.sound && unsound_runs == 0;
        if !json {
            let bound = if record.bound_coeffs.len() == 2 {
                format!(
                    "bound = {} + {}*n",
                    record.bound_coeffs[0], record.bound_coeffs[1]
                )
            } else {
                "bound: theorem check only".to_string()
            };
            println!(
                "{}: sound={} tight={} {} slack_max={}",
                record.fn_name,
                if record.sound { "yes" } else { "NO" },
                if record.tight { "yes" } else { "no" },
                bound,
                record.slack_max
            );
        }
        records.push(record);
    }
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&records).expect("serializable")
        );
    } else {
        println!(
            "checked {} function(s), {} run(s), {} violation(s)",
            records.len(),
            runs,
            violations
        );
    }
    if violations == 0 {
        EXIT_OK
    } else {
        EXIT_RUNTIME
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_literal_parsing() {
        assert_eq!(
            parse_value_literals("[1,2,3], 5, true").unwrap(),
            vec![Value::list(&[1, 2, 3]), Value::Int(5), Value::BoolV(true)]
        );
        assert_eq!(parse_value_literals("[]").unwrap(), vec![Value::list(&[])]);
        assert_eq!(parse_value_literals("").unwrap(), vec![]);
        assert!(parse_value_literals("nope").is_err());
    }

    #[test]
    fn size_range_parsing() {
        assert_eq!(parse_sizes("0..50").unwrap(), (0, 50));
        assert_eq!(parse_sizes("3..=7").unwrap(), (3, 7));
        assert!(parse_sizes("9..1").is_err());
        assert!(parse_sizes("x").is_err());
    }
}
