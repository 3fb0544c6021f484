use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accountable::causality::{explicit_causes, CausalityError, CauseSource};
use accountable::checks::{check_all, has_errors, Mode, Severity};
use accountable::dsl::{load_scenario, LoadError};
use accountable::model::IdSet;
use accountable::notions::{compare_notions, hall_accountable, lindberg_accountable, raci_accountable};
use accountable::relations::QueryError;
use accountable::report::{build_report, fmt_set, render_notions, render_text, CAUSE_CONFLICT};
use accountable::{EntityId, Model};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_VIOLATIONS: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_CAUSES: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// Accountability analysis of socio-technical system scenarios.
#[derive(Parser)]
#[command(name = "accountable", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the schema checks and list violations.
    Validate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate one accountability notion.
    Query {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long, value_name = "ID")]
        component: Option<String>,
        #[arg(long, value_name = "ID")]
        event: Option<String>,
    },
    /// Violations, derived relations, notions and causes in one report.
    Report {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        strict: bool,
    },
    /// Explicit and computed causes of an event.
    Causes {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "ID")]
        event: String,
        /// Also list the minimal cause sets.
        #[arg(long)]
        minimal: bool,
    },
    /// Compare the three notions over every component and event.
    Compare {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Args)]
struct Input {
    /// Scenario file (.acct).
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NotionArg {
    Hall,
    Lindberg,
    Raci,
}

/// A failed invocation: exit code plus diagnostics for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

type Outcome = Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("{}", f.message.trim_end());
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { input, strict } => validate(&input, mode(strict)),
        Command::Query { input, notion, component, event } => query(&input, notion, component, event),
        Command::Report { input, strict } => report(&input, mode(strict)),
        Command::Causes { input, event, minimal } => causes(&input, &event, minimal),
        Command::Compare { input } => compare(&input),
    }
}

fn mode(strict: bool) -> Mode {
    if strict {
        Mode::Strict
    } else {
        Mode::Lenient
    }
}

fn load(path: &Path) -> Result<Model, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    load_scenario(&bytes).map_err(|e| {
        let lines: Vec<String> = match e {
            LoadError::Parse(errs) => errs.iter().map(|x| format!("{}:{x}", path.display())).collect(),
            LoadError::Build(errs) => errs.iter().map(|x| format!("{}: {x}", path.display())).collect(),
        };
        Failure::new(EXIT_INPUT, lines.join("\n"))
    })
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn entity(kind: &str, name: &str) -> Result<EntityId, Failure> {
    EntityId::new(name).map_err(|_| Failure::new(EXIT_INPUT, format!("`{name}` is not a valid {kind} id")))
}

fn validate(input: &Input, mode: Mode) -> Outcome {
    let model = load(&input.file)?;
    let violations = check_all(&model, mode);
    let errors = violations.iter().filter(|v| v.severity == Severity::Error).count();
    let warnings = violations.len() - errors;
    let out = match input.format {
        Format::Json => json_text(&json!({
            "scenario": model.name(),
            "mode": mode,
            "violations": violations,
            "errors": errors,
            "warnings": warnings,
        })),
        Format::Text => {
            let mut s = String::new();
            for v in &violations {
                let subjects: Vec<&str> = v.subjects.iter().map(|x| x.as_str()).collect();
                s.push_str(&format!("{} [{}] ({}) {}\n", v.rule, v.severity, subjects.join(", "), v.message));
            }
            s.push_str(&format!("{errors} error(s), {warnings} warning(s)\n"));
            s
        }
    };
    let code = if has_errors(&violations) { EXIT_VIOLATIONS } else { 0 };
    Ok((out, code))
}

fn query_error(e: QueryError) -> Failure {
    Failure::new(EXIT_INPUT, e.to_string())
}

fn query(input: &Input, notion: NotionArg, component: Option<String>, event: Option<String>) -> Outcome {
    let usage = |msg: &str| Err(Failure::new(EXIT_USAGE, msg.to_string()));
    match (notion, &component, &event) {
        (NotionArg::Hall, None, None) => {}
        (NotionArg::Lindberg, Some(_), None) => {}
        (NotionArg::Raci, None, Some(_)) => {}
        (NotionArg::Hall, _, _) => return usage("--notion hall takes neither --component nor --event"),
        (NotionArg::Lindberg, _, _) => return usage("--notion lindberg requires --component and no --event"),
        (NotionArg::Raci, _, _) => return usage("--notion raci requires --event and no --component"),
    }
    let model = load(&input.file)?;

    let (name, subject, result, extra) = match notion {
        NotionArg::Hall => ("hall", None, hall_accountable(&model), None),
        NotionArg::Lindberg => {
            let c = entity("component", component.as_deref().unwrap())?;
            let result = lindberg_accountable(&model, &c).map_err(query_error)?;
            ("lindberg", Some(c), result, None)
        }
        NotionArg::Raci => {
            let e = entity("event", event.as_deref().unwrap())?;
            let (causes, source) = raci_causes(&model, &e)?;
            let result = raci_accountable(&model, &e, &causes).map_err(query_error)?;
            ("raci", Some(e), result, Some((causes, source)))
        }
    };

    let out = match input.format {
        Format::Json => {
            let mut v = json!({ "notion": name, "subject": subject, "result": result });
            if let Some((causes, source)) = &extra {
                v["causes"] = json!(causes);
                v["source"] = json!(source);
            }
            json_text(&v)
        }
        Format::Text => {
            let head = match &subject {
                Some(s) => format!("{name}({s})"),
                None => name.to_string(),
            };
            let mut line = format!("{head}: {}", fmt_set(&result));
            if let Some((causes, source)) = &extra {
                line.push_str(&format!(" via {} causes {}", source_label(*source), fmt_set(causes)));
            }
            line + "\n"
        }
    };
    Ok((out, 0))
}

fn source_label(source: CauseSource) -> &'static str {
    match source {
        CauseSource::Explicit => "explicit",
        CauseSource::Computed => "computed",
    }
}

/// Explicit causes first, then the but-for set of the structural model.
fn raci_causes(model: &Model, e: &EntityId) -> Result<(IdSet, CauseSource), Failure> {
    let explicit = explicit_causes(model, e).map_err(|x| Failure::new(EXIT_INPUT, x.to_string()))?;
    if let Some(set) = explicit {
        return Ok((set, CauseSource::Explicit));
    }
    let computed = model
        .structural()
        .ok_or(CausalityError::NoStructuralModel)
        .and_then(|sm| sm.but_for_causes(e));
    match computed {
        Ok(set) => Ok((set, CauseSource::Computed)),
        Err(x) => Err(Failure::new(EXIT_NO_CAUSES, format!("no causal information for {e}: {x}"))),
    }
}

fn report(input: &Input, mode: Mode) -> Outcome {
    let model = load(&input.file)?;
    let report = build_report(&model, mode);
    let out = match input.format {
        Format::Json => json_text(&serde_json::to_value(&report).expect("report serializes")),
        Format::Text => render_text(&report),
    };
    let code = if has_errors(&report.violations) { EXIT_VIOLATIONS } else { 0 };
    Ok((out, code))
}

fn compare(input: &Input) -> Outcome {
    let model = load(&input.file)?;
    let n = compare_notions(&model);
    let out = match input.format {
        Format::Json => json_text(&serde_json::to_value(&n).expect("report serializes")),
        Format::Text => render_notions(&n).trim_start().to_string(),
    };
    Ok((out, 0))
}

fn causes(input: &Input, event: &str, minimal: bool) -> Outcome {
    let model = load(&input.file)?;
    let e = entity("event", event)?;
    let explicit = explicit_causes(&model, &e).map_err(|x| Failure::new(EXIT_INPUT, x.to_string()))?;

    let sm = model.structural().ok_or(CausalityError::NoStructuralModel);
    let but_for = sm.clone().and_then(|sm| sm.but_for_causes(&e));
    let minimal_sets = if minimal { Some(sm.and_then(|sm| sm.minimal_cause_sets(&e))) } else { None };

    let computed_error = match (&but_for, &minimal_sets) {
        (Err(x), _) | (_, Some(Err(x))) => Some(x.to_string()),
        _ => None,
    };
    if let (None, Some(err)) = (&explicit, &computed_error) {
        return Err(Failure::new(EXIT_NO_CAUSES, format!("no causal information for {e}: {err}")));
    }
    let conflict = matches!((&explicit, &but_for), (Some(x), Ok(b)) if x != b);
    let mut warnings = Vec::new();
    if conflict {
        warnings.push(format!("{CAUSE_CONFLICT}: explicit and computed causes of {e} differ"));
    }

    let out = match input.format {
        Format::Json => {
            let computed = match (&but_for, &minimal_sets) {
                (Ok(b), Some(Ok(m))) => json!({ "source": "computed", "but_for": b, "minimal_sets": m }),
                (Ok(b), None) => json!({ "source": "computed", "but_for": b }),
                _ => Value::Null,
            };
            let explicit = explicit.as_ref().map(|x| json!({ "source": "explicit", "causes": x }));
            json_text(&json!({
                "event": e,
                "explicit": explicit,
                "computed": computed,
                "computed_error": computed_error,
                "warnings": warnings,
            }))
        }
        Format::Text => {
            let mut s = format!("event: {e}\n");
            match &explicit {
                Some(x) => s.push_str(&format!("explicit: {}\n", fmt_set(x))),
                None => s.push_str("explicit: absent\n"),
            }
            match (&but_for, &computed_error) {
                (Ok(b), None) => s.push_str(&format!("computed: {}\n", fmt_set(b))),
                (_, Some(err)) => s.push_str(&format!("computed: unavailable ({err})\n")),
                (Err(_), None) => unreachable!(),
            }
            if let Some(Ok(sets)) = &minimal_sets {
                let sets: Vec<String> = sets.iter().map(fmt_set).collect();
                s.push_str(&format!("minimal: [{}]\n", sets.join(", ")));
            }
            for w in &warnings {
                s.push_str(&format!("warning {w}\n"));
            }
            s
        }
    };
    Ok((out, 0))
}
