use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use softfix::magic::{answer_directly, answer_query, rewrite};
use softfix::operators::{fixpoint_state_model, EvalConfig, Engine};
use softfix::propagate::{propagate_update, DeltaSet, Mode};
use softfix::stratify::{stratification, DependencyGraph};
use softfix::viewupdate::{solve_view_update, Outcome, VURequest, VuConfig};
use softfix::{parse_program, Database, Error, Program, RequestKind};

#[derive(Parser)]
#[command(name = "softfix", version, about = "Deductive database engine: queries, update propagation, view updates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and report its stratification and dependency graph.
    Check { file: PathBuf },
    /// Answer a query.
    Query {
        file: PathBuf,
        query: String,
        #[arg(long, value_enum, default_value_t = EngineArg::Soft)]
        engine: EngineArg,
        /// Evaluate the original rules instead of the magic rewriting.
        #[arg(long)]
        no_magic: bool,
        /// Print generated facts per relation.
        #[arg(long)]
        stats: bool,
    },
    /// Compute the changes induced by base updates such as `+e(2,3)`.
    Propagate {
        file: PathBuf,
        #[arg(required = true)]
        requests: Vec<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Magic)]
        mode: ModeArg,
        #[arg(long)]
        stats: bool,
        /// Write the updated program to this file.
        #[arg(long, value_name = "OUT")]
        apply: Option<PathBuf>,
    },
    /// Search for base updates realizing a view update such as `+p(2)`.
    Viewupdate {
        file: PathBuf,
        request: String,
        #[arg(long, default_value_t = 10)]
        max_depth: usize,
        /// Print the search tree.
        #[arg(long)]
        log: bool,
    },
    /// Print the magic rewriting of the rules for a query.
    Rewrite { file: PathBuf, query: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Iterated,
    Soft,
    Alternating,
    General,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Iterated => Engine::Iterated,
            EngineArg::Soft => Engine::Soft,
            EngineArg::Alternating => Engine::Alternating,
            EngineArg::General => Engine::General,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Naive,
    Magic,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inconsistent | Error::ConstraintsUnsatisfiable => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn user_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Run = Result<(String, u8), Failure>;

fn load(path: &Path) -> Result<Program, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| user_error(format!("{}: {e}", path.display())))?;
    let program = parse_program(&text).map_err(|e| user_error(format!("{}: {e}", path.display())))?;
    program.database.validate()?;
    Ok(program)
}

fn check(db: &Database) -> Run {
    let mut out = String::new();
    let mut code = 0;
    writeln!(out, "rules\t{}", db.rules.len()).unwrap();
    writeln!(out, "facts\t{}", db.facts.len() + db.disjunctions.len()).unwrap();
    writeln!(out, "constraints\t{}", db.constraints.len()).unwrap();
    match stratification(&db.rules) {
        Ok(strata) => {
            for (i, preds) in strata.partition.layer_preds().iter().enumerate() {
                let names: Vec<String> = preds.iter().map(|p| p.to_string()).collect();
                writeln!(out, "stratum {i}\t{}", names.join(" ")).unwrap();
            }
            match fixpoint_state_model(db, &EvalConfig::default()) {
                Ok(_) => writeln!(out, "consistent\ttrue").unwrap(),
                Err(e @ (Error::Inconsistent | Error::ConstraintsUnsatisfiable)) => {
                    writeln!(out, "consistent\tfalse ({e})").unwrap();
                    code = 2;
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(cycle) => {
            writeln!(out, "not stratifiable\t{cycle}").unwrap();
            code = 1;
        }
    }
    out.push_str(&DependencyGraph::build(&db.rules).to_dot());
    Ok((out, code))
}

fn query(db: &Database, text: &str, engine: Engine, no_magic: bool, stats: bool) -> Run {
    let atom = softfix::parser::parse_atom(text).map_err(|e| user_error(format!("query: {e}")))?;
    let cfg = EvalConfig::default();
    let answer = if no_magic {
        answer_directly(db, &atom, engine, &cfg)?
    } else {
        answer_query(db, &atom, engine, &cfg)?
    };
    let mut out = format!("{}\n", answer.holds);
    if !atom.is_ground() {
        for a in &answer.answers {
            writeln!(out, "{a}").unwrap();
        }
    }
    if stats {
        write_stats(&mut out, answer.model.generated.iter().map(|(k, v)| (k.to_string(), *v)));
    }
    Ok((out, 0))
}

fn write_stats(out: &mut String, counts: impl Iterator<Item = (String, usize)>) {
    let mut total = 0;
    for (rel, n) in counts {
        writeln!(out, "{rel}\t{n}").unwrap();
        total += n;
    }
    writeln!(out, "total\t{total}").unwrap();
}

fn propagate(program: &Program, requests: &[String], mode: Mode, stats: bool, apply: Option<&Path>) -> Run {
    let db = &program.database;
    let mut parsed = Vec::new();
    for r in requests {
        let req = softfix::parser::parse_request_for(r, db).map_err(|e| user_error(format!("{r}: {e}")))?;
        if req.kind != RequestKind::BaseUpdate {
            return Err(user_error(format!("{r}: expected a base update")));
        }
        parsed.push(req);
    }
    let update = DeltaSet::from_requests(&parsed)?;
    let result = propagate_update(db, &update, mode, &EvalConfig::default())?;
    let mut out = result.deltas.to_string();
    if stats {
        write_stats(&mut out, result.stats(db).into_iter());
    }
    if let Some(path) = apply {
        let updated = Program {
            database: db.with_facts(update.apply_to(&db.facts)),
            queries: program.queries.clone(),
        };
        std::fs::write(path, updated.to_string()).map_err(|e| user_error(format!("{}: {e}", path.display())))?;
    }
    Ok((out, 0))
}

fn viewupdate(db: &Database, text: &str, max_depth: usize, log: bool) -> Run {
    let req = softfix::parser::parse_request_for(text, db).map_err(|e| user_error(format!("{text}: {e}")))?;
    let cfg = VuConfig {
        max_depth,
        ..VuConfig::default()
    };
    let result = solve_view_update(db, &VURequest::from_request(&req), &cfg)?;
    let mut out = String::new();
    if log {
        for node in &result.log {
            writeln!(out, "# {node}").unwrap();
        }
    }
    let code = match &result.outcome {
        Outcome::Realizations(rs) => {
            for (i, r) in rs.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&r.to_string());
            }
            0
        }
        Outcome::NoRealization => {
            out.push_str("no realization\n");
            2
        }
        Outcome::DepthExhausted => {
            writeln!(out, "no realization within depth {max_depth}").unwrap();
            2
        }
    };
    Ok((out, code))
}

fn show_rewrite(db: &Database, text: &str) -> Run {
    let atom = softfix::parser::parse_atom(text).map_err(|e| user_error(format!("query: {e}")))?;
    let program = rewrite(db, &atom)?;
    let mut out = String::new();
    for s in &program.seeds {
        writeln!(out, "{s}.").unwrap();
    }
    for r in &program.rules {
        writeln!(out, "{r}").unwrap();
    }
    Ok((out, 0))
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Check { file } => check(&load(&file)?.database),
        Command::Query {
            file,
            query: q,
            engine,
            no_magic,
            stats,
        } => query(&load(&file)?.database, &q, engine.into(), no_magic, stats),
        Command::Propagate {
            file,
            requests,
            mode,
            stats,
            apply,
        } => {
            let mode = match mode {
                ModeArg::Naive => Mode::Naive,
                ModeArg::Magic => Mode::Magic,
            };
            propagate(&load(&file)?, &requests, mode, stats, apply.as_deref())
        }
        Command::Viewupdate {
            file,
            request,
            max_depth,
            log,
        } => viewupdate(&load(&file)?.database, &request, max_depth, log),
        Command::Rewrite { file, query: q } => show_rewrite(&load(&file)?.database, &q),
    }
}

/// Deletion requests such as `-e(2,3)` look like flags; a leading space keeps
/// them positional and the request parser skips it.
fn protect_requests(args: impl Iterator<Item = String>) -> Vec<String> {
    args.map(|a| {
        let bytes = a.as_bytes();
        if bytes.len() > 1 && bytes[0] == b'-' && bytes[1].is_ascii_lowercase() && a.contains('(') {
            format!(" {a}")
        } else {
            a
        }
    })
    .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(protect_requests(std::env::args()));
    match run(cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
