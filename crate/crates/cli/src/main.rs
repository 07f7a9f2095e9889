use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use cacsa_core::analysis::OBLIGATIONS;
use cacsa_core::deduction::{exp_normalize_traced, trans_normalize_traced, ExpDeduction, Strategy, TransDeduction};
use cacsa_core::position::signed_positions;
use cacsa_core::subtyping::subtype;
use cacsa_core::syntax::{parse_spec, parse_term, SpecFile};
use cacsa_core::termination::{check_system, rewriter, RuleReport, SystemReport};
use cacsa_core::{Rewriter, Sign, Signature, DEFAULT_FUEL};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cacsa", version, about = "Size-based termination checker for higher-order rewrite systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every rule of each file against the termination criterion.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Show calls, accessibility paths and size inference notes.
        #[arg(long)]
        explain: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Decide whether the first type is a subtype of the second.
    Subtype {
        t: String,
        u: String,
        /// File providing the signature and the rules used for conversion.
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// List the positive and negative positions of a term.
    Positions {
        t: String,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Normalize a subtyping deduction, eliminating transitivity or expansion.
    NormalizeDeduction {
        deduction: String,
        system: System,
        /// Print each contraction.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = StrategyArg::Innermost)]
        strategy: StrategyArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    JsonLines,
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Trans,
    Exp,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Innermost,
    Outermost,
}

const EXIT_REJECTED: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { files, fuel, explain, format } => run_check(&files, fuel, explain, format),
        Command::Subtype { t, u, sig, fuel } => cmd_subtype(&t, &u, sig, fuel),
        Command::Positions { t, sig } => cmd_positions(&t, sig),
        Command::NormalizeDeduction { deduction, system, trace, strategy } => {
            cmd_normalize_deduction(&deduction, system, trace, strategy)
        }
    };
    ExitCode::from(code)
}

/// Result of checking one file: its printed output and exit code.
struct FileOutcome {
    stdout: String,
    stderr: String,
    code: u8,
}

fn run_check(files: &[PathBuf], fuel: usize, explain: bool, format: Format) -> u8 {
    let outcomes: Vec<FileOutcome> = std::thread::scope(|s| {
        let handles: Vec<_> = files.iter().map(|f| s.spawn(move || check_file(f, fuel, explain, format))).collect();
        handles.into_iter().map(|h| h.join().expect("checker thread panicked")).collect()
    });
    let mut code = 0;
    for o in outcomes {
        print!("{}", o.stdout);
        eprint!("{}", o.stderr);
        code = code.max(o.code);
    }
    code
}

fn check_file(path: &PathBuf, fuel: usize, explain: bool, format: Format) -> FileOutcome {
    let name = path.display().to_string();
    let failed = |msg: String| FileOutcome { stdout: String::new(), stderr: msg, code: EXIT_ERROR };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return failed(format!("{name}: {e}\n")),
    };
    let spec = match parse_spec(&text) {
        Ok(s) => s,
        Err(e) => return failed(format!("{name}:{e}\n")),
    };
    let report = check_system(&spec.signature, &spec.rules, fuel);
    let code = if !report.signature.is_ok() {
        EXIT_ERROR
    } else if report.accepted() {
        0
    } else {
        EXIT_REJECTED
    };
    let (stdout, stderr) = match format {
        Format::Text => (render_text(&name, &spec, &report, explain), String::new()),
        Format::JsonLines => {
            let mut err = String::new();
            for d in &report.signature.errors {
                let _ = writeln!(err, "{name}: error: {d}");
            }
            (render_json(&name, &report, explain), err)
        }
    };
    FileOutcome { stdout, stderr, code }
}

fn render_text(name: &str, spec: &SpecFile, report: &SystemReport, explain: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "== {name}");
    let sig = &report.signature;
    if sig.errors.is_empty() {
        let _ = writeln!(out, "signature: ok");
    }
    for d in &sig.errors {
        let _ = writeln!(out, "error: {d}");
    }
    for d in &sig.warnings {
        let _ = writeln!(out, "warning: {d}");
    }
    if explain {
        for n in &sig.notes {
            let _ = writeln!(out, "note: {n}");
        }
    }
    for (r, loc) in report.rules.iter().zip(&spec.rule_locations) {
        let verdict = if r.accepted() { "accepted" } else { "not accepted" };
        let _ = writeln!(out, "rule {} (line {}): {}", r.index, loc.line, r.rule);
        for (cond, o) in r.conditions() {
            let _ = writeln!(out, "  {cond:<15} {o}");
        }
        if explain {
            explain_rule(&mut out, r);
        }
        let _ = writeln!(out, "  assumes: {}", OBLIGATIONS.join("; "));
        let _ = writeln!(out, "  verdict: {verdict}");
    }
    let accepted = report.rules.iter().filter(|r| r.accepted()).count();
    let _ = writeln!(out, "user obligations, not checked:");
    for ob in &sig.obligations {
        let _ = writeln!(out, "  - {ob}");
    }
    let _ = writeln!(out, "{accepted} of {} rules accepted", report.rules.len());
    out
}

fn explain_rule(out: &mut String, r: &RuleReport) {
    for (x, path) in &r.access_paths {
        let _ = writeln!(out, "    {x} reached through {path}");
    }
    for c in &r.calls {
        let psi: Vec<String> = c.psi.iter().map(|(k, v)| format!("{k} := {v}")).collect();
        let cmp = &c.comparison;
        let _ = writeln!(
            out,
            "    call {} at {} with {{{}}}: {} by {:?} ({} vs {})",
            c.callee,
            c.position,
            psi.join(", "),
            if cmp.holds { "smaller" } else { "not smaller" },
            cmp.decided_by,
            cmp.caller_value,
            cmp.callee_value
        );
    }
    for n in &r.notes {
        let _ = writeln!(out, "    note: {n}");
    }
}

fn render_json(name: &str, report: &SystemReport, explain: bool) -> String {
    let mut out = String::new();
    for r in &report.rules {
        let mut rec = json!({
            "file": name,
            "rule-index": r.index,
            "head": r.head,
            "rule": r.rule,
            "obligations": report.signature.obligations,
        });
        let obj = rec.as_object_mut().expect("record is an object");
        for (cond, o) in r.conditions() {
            obj.insert(cond.to_string(), serde_json::to_value(o).expect("outcome serializes"));
        }
        if explain {
            obj.insert("access-paths".into(), json!(r.access_paths));
            obj.insert("calls".into(), serde_json::to_value(&r.calls).expect("calls serialize"));
            obj.insert("notes".into(), json!(r.notes));
        }
        let _ = writeln!(out, "{rec}");
    }
    out
}

fn load_signature(sig: Option<PathBuf>) -> Result<(Signature, Rewriter), String> {
    let Some(path) = sig else {
        return Ok((Signature::new(), Rewriter::new(Vec::new())));
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let spec = parse_spec(&text).map_err(|e| format!("{}:{e}", path.display()))?;
    let rw = rewriter(&spec.rules);
    Ok((spec.signature, rw))
}

fn cmd_subtype(t: &str, u: &str, sig: Option<PathBuf>, fuel: usize) -> u8 {
    let (sig, rw) = match load_signature(sig) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_ERROR;
        }
    };
    let parsed = parse_term(t, &sig, true).and_then(|t| Ok((t, parse_term(u, &sig, true)?)));
    let (t, u) = match parsed {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_ERROR;
        }
    };
    match subtype(&rw, &t, &u, fuel) {
        Ok(b) => {
            println!("{b}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_REJECTED
        }
    }
}

fn cmd_positions(t: &str, sig: Option<PathBuf>) -> u8 {
    let (sig, _) = match load_signature(sig) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_ERROR;
        }
    };
    let t = match parse_term(t, &sig, true) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_ERROR;
        }
    };
    for (label, sign) in [("positive", Sign::Pos), ("negative", Sign::Neg)] {
        match signed_positions(&t, sign, &sig) {
            Ok(ps) => {
                let shown: Vec<String> = ps.iter().map(ToString::to_string).collect();
                println!("{label}: {{{}}}", shown.join(", "));
            }
            Err(e) => {
                eprintln!("{e}");
                return EXIT_ERROR;
            }
        }
    }
    0
}

fn cmd_normalize_deduction(text: &str, system: System, trace: bool, strategy: StrategyArg) -> u8 {
    match system {
        System::Trans => {
            let d: TransDeduction = match text.parse() {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("{e}");
                    return EXIT_ERROR;
                }
            };
            let (nf, steps) = trans_normalize_traced(&d);
            if trace {
                for s in &steps {
                    let after: Vec<String> = s.after.iter().map(|m| format!("{m:?}")).collect();
                    let before = s.before.map_or("-".to_string(), |m| format!("{m:?}"));
                    println!("({}) {} => {}  measure {before} -> [{}]", s.rule, s.redex, s.contractum, after.join(", "));
                }
            }
            println!("{nf}");
        }
        System::Exp => {
            let d: ExpDeduction = match text.parse() {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("{e}");
                    return EXIT_ERROR;
                }
            };
            let strategy = match strategy {
                StrategyArg::Innermost => Strategy::Innermost,
                StrategyArg::Outermost => Strategy::Outermost,
            };
            let (nf, steps) = exp_normalize_traced(&d, strategy);
            if trace {
                for rule in &steps {
                    println!("({rule})");
                }
            }
            println!("{nf}");
        }
    }
    0
}
