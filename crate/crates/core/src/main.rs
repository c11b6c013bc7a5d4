use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rcm::io::{self, DocumentError};
use rcm::store::{CmpOp, ValuePredicate};
use rcm::{Annotations, Decision, Engine, Fact, QoC, Query, ResolutionPolicy, Severity, Timestamp, Value};

/// Context and situation modeling engine.
///
/// Every invocation starts from the core ontology and built-in units (or
/// from `--state`), applies the `--load` documents, then runs one command.
#[derive(Parser)]
#[command(name = "rcm", version)]
struct Cli {
    /// Tab-separated output for scripts.
    #[arg(long, global = true)]
    porcelain: bool,

    /// Document to apply before the command; repeatable.
    #[arg(short, long = "load", value_name = "FILE", global = true)]
    load: Vec<String>,

    /// Canonical document holding the engine state. Read at start if it
    /// exists; `load` and `assert` write it back.
    #[arg(long, value_name = "FILE", global = true)]
    state: Option<PathBuf>,

    /// Start without the core ontology and units.
    #[arg(long, global = true)]
    bare: bool,

    /// Directories searched for documents, `:`-separated.
    #[arg(long, env = io::SEARCH_PATH_VAR, value_name = "DIRS", global = true, hide_env_values = true)]
    path: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply documents in order and report what each added.
    Load {
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Record a fact about an individual.
    Assert {
        subject: String,
        property: String,
        /// Literal, or the object id for a relation.
        value: String,
        #[arg(long)]
        unit: Option<String>,
        #[arg(long = "prob", value_name = "P")]
        probability: Option<f64>,
        #[arg(long, value_name = "E")]
        mean_error: Option<f64>,
        #[arg(long)]
        accuracy: Option<f64>,
        /// Observation time; defaults to now.
        #[arg(long = "ts", value_name = "TIME")]
        timestamp: Option<Timestamp>,
        #[arg(long)]
        source: Option<String>,
        /// Who records the fact; defaults to the source.
        #[arg(long)]
        actor: Option<String>,
    },
    /// Current value of a property.
    Get {
        subject: String,
        property: String,
        /// latest, all, confident, or confident:<threshold>.
        #[arg(long, default_value = "latest")]
        policy: ResolutionPolicy,
    },
    /// Facts matching every given constraint.
    Query {
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        property: Option<String>,
        #[arg(long)]
        subject: Option<String>,
        /// Value comparison such as `">= 100 fahrenheit"`.
        #[arg(long = "where", value_name = "CMP")]
        filter: Option<String>,
    },
    /// Every fact ever recorded for a property, oldest first.
    History { subject: String, property: String },
    /// Convert a quantity between units of one dimension.
    #[command(allow_negative_numbers = true)]
    Convert { value: f64, from: String, to: String },
    /// Access control.
    Access {
        #[command(subcommand)]
        command: AccessCommand,
    },
    /// Scenario scripts.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Check documents against the engine without applying them, or the
    /// engine's own schema when no file is given.
    Validate { files: Vec<String> },
    /// Write the engine state.
    Export {
        #[arg(long, value_enum, default_value_t = Format::Canonical)]
        format: Format,
        /// Base IRI for rdfxml namespaces.
        #[arg(long, default_value = io::DEFAULT_BASE_IRI)]
        base: String,
        /// Output file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AccessCommand {
    /// Whether an entity may perform an activity class. Exits 1 when
    /// denied.
    Check { entity: String, activity_class: String },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Apply a document and run its scenario. Exits 1 if any expectation
    /// fails.
    Run { file: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Canonical,
    Rdfxml,
}

/// A failed command: the message is printed and the process exits 1.
struct Failure {
    kind: &'static str,
    message: String,
}

impl From<rcm::Error> for Failure {
    fn from(e: rcm::Error) -> Self {
        Failure {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        Failure {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        kind: "IoError",
        message: format!("{}: {e}", path.display()),
    }
}

/// Writes to stdout. A closed pipe (`rcm ... | head`) ends the process
/// quietly instead of panicking.
fn emit(args: fmt::Arguments) {
    if let Err(e) = std::io::stdout().lock().write_fmt(args) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("writing to stdout: {e}");
    }
}

macro_rules! outln {
    ($($arg:tt)*) => {
        emit(format_args!("{}\n", format_args!($($arg)*)))
    };
}

/// Outcome of a command that ran: `false` means a negative answer (denied,
/// failed expectations, validation errors) rather than an error.
type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error[{}]: {}", f.kind, f.message);
            ExitCode::from(1)
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    search: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn read(&self, name: &str) -> Result<String, Failure> {
        Ok(io::read_document(name, &self.search)?)
    }

    fn apply(&self, engine: &mut Engine, name: &str) -> Result<io::Report, Failure> {
        let doc = io::parse_document(&self.read(name)?).map_err(|e| in_file(name, e))?;
        io::apply_document(engine, &doc).map_err(|e| in_file(name, e))
    }

    fn save(&self, engine: &Engine) -> Result<(), Failure> {
        if let Some(p) = &self.cli.state {
            std::fs::write(p, io::export_canonical(engine)).map_err(|e| io_failure(p, e))?;
        }
        Ok(())
    }
}

fn in_file(name: &str, e: DocumentError) -> Failure {
    Failure {
        kind: e.kind(),
        message: format!("{name}: {e}"),
    }
}

fn initial_engine(ctx: &Ctx) -> Result<Engine, Failure> {
    let cli = ctx.cli;
    let mut engine = match &cli.state {
        Some(p) if p.exists() => {
            let mut e = Engine::new();
            let text = std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
            let doc = io::parse_document(&text).map_err(|e| in_file(&p.display().to_string(), e))?;
            io::apply_document(&mut e, &doc).map_err(|e| in_file(&p.display().to_string(), e))?;
            e
        }
        _ if cli.bare => Engine::new(),
        _ => Engine::with_core(),
    };
    for name in &cli.load {
        ctx.apply(&mut engine, name)?;
    }
    Ok(engine)
}

fn run(cli: &Cli) -> Outcome {
    let ctx = Ctx {
        cli,
        search: cli.path.as_deref().map(io::split_search_path).unwrap_or_default(),
    };
    let mut engine = initial_engine(&ctx)?;
    let porcelain = cli.porcelain;

    match &cli.command {
        Command::Load { files } => {
            for name in files {
                let report = ctx.apply(&mut engine, name)?;
                if porcelain {
                    for (k, n) in report.rows() {
                        outln!("{name}\t{k}\t{n}");
                    }
                } else {
                    outln!("{name}: {report}");
                }
            }
            ctx.save(&engine)?;
        }
        Command::Assert {
            subject,
            property,
            value,
            unit,
            probability,
            mean_error,
            accuracy,
            timestamp,
            source,
            actor,
        } => {
            let now = Timestamp::from_epoch_seconds(chrono::Utc::now().timestamp());
            let at = timestamp.unwrap_or(now);
            let ann = Annotations {
                timestamp: Some(at),
                unit: unit.clone(),
                qoc: QoC {
                    accuracy: *accuracy,
                    probability: *probability,
                    mean_error: *mean_error,
                    ..QoC::default()
                },
                source: source.clone(),
            };
            let actor = actor.as_deref().or(source.as_deref()).unwrap_or(rcm::SYSTEM);
            let p = engine.property(property)?;
            let facts = if engine.schema().object_property(&p).is_some() {
                let (f, derived) = engine.assert_relation(subject, property, value, ann, actor, now)?;
                std::iter::once(f).chain(derived).collect()
            } else {
                vec![engine.assert_literal(subject, property, value, ann, actor, now)?]
            };
            for f in &facts {
                print_fact(f, porcelain, true);
            }
            ctx.save(&engine)?;
        }
        Command::Get {
            subject,
            property,
            policy,
        } => {
            let facts = engine.get_current(subject, property, *policy)?;
            if facts.is_empty() && !porcelain {
                outln!("no current value");
            }
            for f in &facts {
                print_fact(f, porcelain, false);
            }
        }
        Command::Query {
            class,
            property,
            subject,
            filter,
        } => {
            let value = filter
                .as_deref()
                .map(parse_filter)
                .transpose()
                .map_err(|message| Failure {
                    kind: "InvalidFilter",
                    message,
                })?;
            let q = Query {
                class: class.clone(),
                property: property.clone(),
                subject: subject.clone(),
                value,
            };
            for f in engine.query(&q)? {
                print_fact(&f, porcelain, true);
            }
        }
        Command::History { subject, property } => {
            for f in engine.history(subject, property)? {
                print_fact(&f, porcelain, false);
            }
        }
        Command::Convert { value, from, to } => {
            let x = engine.convert(*value, from, to)?;
            if porcelain {
                outln!("{x}");
            } else {
                outln!("{}", fixed(x));
            }
        }
        Command::Access {
            command: AccessCommand::Check { entity, activity_class },
        } => {
            let d = engine.check(entity, activity_class)?;
            match (&d, porcelain) {
                (Decision::Allowed { via }, true) => outln!("allowed\t{via}"),
                (Decision::Allowed { via }, false) => outln!("Allowed via {via}"),
                (Decision::Denied, true) => outln!("denied\t"),
                (Decision::Denied, false) => outln!("Denied"),
            }
            return Ok(d.is_allowed());
        }
        Command::Scenario {
            command: ScenarioCommand::Run { file },
        } => {
            let doc = io::parse_document(&ctx.read(file)?).map_err(|e| in_file(file, e))?;
            let script = doc
                .scenario
                .clone()
                .ok_or(DocumentError::NoScenario)
                .map_err(|e| in_file(file, e))?;
            io::apply_document(&mut engine, &doc).map_err(|e| in_file(file, e))?;
            let report = io::run_scenario(&script, &mut engine).map_err(|e| in_file(file, e))?;
            if porcelain {
                for e in &report.entries {
                    let at = e.at.map(|t| t.to_string()).unwrap_or_default();
                    let status = match e.kind {
                        io::EntryKind::Check { passed: true } => "pass",
                        io::EntryKind::Check { passed: false } => "fail",
                        io::EntryKind::Transition => "transition",
                        io::EntryKind::Assertion => "assertion",
                    };
                    outln!("{}\t{at}\t{status}\t{}\t{}", e.step, e.tag, e.text);
                }
            } else {
                outln!("{report}");
            }
            return Ok(report.passed());
        }
        Command::Validate { files } => {
            let mut clean = true;
            let mut report = |source: &str, issues: Vec<rcm::Issue>| {
                for i in &issues {
                    clean &= i.severity != Severity::Error;
                    if porcelain {
                        let sev = if i.severity == Severity::Error {
                            "error"
                        } else {
                            "warning"
                        };
                        outln!("{source}\t{sev}\t{}\t{}", i.code, i.message);
                    } else {
                        outln!("{source}: {i}");
                    }
                }
                if issues.is_empty() && !porcelain {
                    outln!("{source}: ok");
                }
            };
            if files.is_empty() {
                report("schema", engine.validate_schema());
            }
            for name in files {
                report(name, io::check_document(&engine, &ctx.read(name)?));
            }
            return Ok(clean);
        }
        Command::Export { format, base, output } => {
            let text = match format {
                Format::Canonical => io::export_canonical(&engine),
                Format::Rdfxml => io::export_rdfxml(&engine, base),
            };
            match output {
                Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e))?,
                None => emit(format_args!("{text}")),
            }
        }
    }
    Ok(true)
}

/// Five decimals with trailing zeros dropped.
fn fixed(x: f64) -> String {
    let s = format!("{x:.5}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

fn parse_filter(s: &str) -> Result<ValuePredicate, String> {
    let mut parts = s.split_whitespace();
    let (Some(op), Some(operand)) = (parts.next(), parts.next()) else {
        return Err(format!("expected `<op> <value> [unit]`, got `{s}`"));
    };
    let op: CmpOp = op.parse()?;
    let operand = match operand.parse::<f64>() {
        Ok(x) => Value::Real(x),
        Err(_) => Value::Text(operand.to_owned()),
    };
    let unit = parts.next().map(str::to_owned);
    if let Some(extra) = parts.next() {
        return Err(format!("unexpected `{extra}` in `{s}`"));
    }
    Ok(ValuePredicate { op, operand, unit })
}

fn print_fact(f: &Fact, porcelain: bool, with_subject: bool) {
    let av = &f.payload;
    if porcelain {
        let opt = |o: Option<String>| o.unwrap_or_default();
        outln!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            f.id.0,
            f.subject,
            f.property,
            av.value,
            opt(av.unit.clone()),
            av.timestamp,
            opt(av.qoc.probability.map(|p| p.to_string())),
            opt(av.source.clone()),
            f.asserted_by
        );
    } else if with_subject {
        outln!("{} {} {} = {av}", f.id, f.subject, f.property);
    } else {
        outln!("{av}");
    }
}
