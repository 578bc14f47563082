use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use geotrace::check::{check_all, Violation};
use geotrace::exec::{run, RunConfig};
use geotrace::io::{self, serve};
use geotrace::lang::{parse, Span};
use geotrace::net::{Diagram, EventId};
use geotrace::query;

#[derive(Parser)]
#[command(name = "geotrace", version, about = "Run concurrent programs and inspect their history diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a program and write its diagram document.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        /// Environment input for a channel, e.g. `c=8,9`.
        #[arg(long = "in", value_name = "CH=V1,V2,...", value_parser = parse_inputs)]
        inputs: Vec<(String, Vec<i64>)>,
        /// Base for a channel's message serials, e.g. `c=83`.
        #[arg(long = "msg-offset", value_name = "CH=N", value_parser = parse_offset)]
        offsets: Vec<(String, u64)>,
        #[arg(short = 'o', value_name = "OUT.json")]
        out: Option<PathBuf>,
    },
    /// Re-check a diagram document and report its violations.
    Check { diagram: PathBuf },
    /// Causal navigation from one event.
    #[command(group(ArgGroup::new("mode").required(true).args(["back", "past", "forward"])))]
    Query {
        diagram: PathBuf,
        #[arg(long)]
        event: u32,
        /// Immediate causes.
        #[arg(long)]
        back: bool,
        /// Whole causal past.
        #[arg(long)]
        past: bool,
        /// Immediate effects.
        #[arg(long)]
        forward: bool,
    },
    /// Source locations responsible for a reported violation.
    Locate {
        diagram: PathBuf,
        #[arg(long)]
        violation: usize,
    },
    /// Serve the document and viewer over HTTP.
    Serve {
        diagram: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn parse_inputs(s: &str) -> Result<(String, Vec<i64>), String> {
    let (ch, vals) = s.split_once('=').ok_or("expected CH=V1,V2,...")?;
    let vals = vals
        .split(',')
        .filter(|v| !v.is_empty())
        .map(|v| v.trim().parse::<i64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()?;
    Ok((ch.to_string(), vals))
}

fn parse_offset(s: &str) -> Result<(String, u64), String> {
    let (ch, n) = s.split_once('=').ok_or("expected CH=N")?;
    Ok((ch.to_string(), n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?))
}

/// Failure that is the user's fault at the command line, not the program's.
struct Usage(String);

fn read(path: &Path) -> Result<Vec<u8>, Usage> {
    std::fs::read(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Diagram, Usage> {
    io::deserialize(&read(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn report(d: &Diagram, vs: &[Violation]) {
    for (i, v) in vs.iter().enumerate() {
        let at = v
            .spans
            .first()
            .map(|s| {
                let (line, col) = s.line_col(&d.source);
                format!(" at {line}:{col}")
            })
            .unwrap_or_default();
        eprintln!("[{i}] {v}{at}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Usage> {
    match command {
        Command::Run {
            file,
            seed,
            max_steps,
            inputs,
            offsets,
            out,
        } => {
            let bytes = read(&file)?;
            let source = String::from_utf8(bytes).map_err(|e| Usage(format!("{}: {e}", file.display())))?;
            let program = match parse(&source) {
                Ok(p) => p,
                Err(failures) => {
                    for f in &failures {
                        let (line, col) = f.span.line_col(&source);
                        eprintln!("{} at {line}:{col}: {}", f.kind.code(), f.message);
                    }
                    return Ok(30);
                }
            };
            let mut config = RunConfig {
                seed,
                max_steps,
                ..RunConfig::default()
            };
            config.channel_inputs.extend(inputs);
            config.message_offset.extend(offsets);
            let d = run(&program, &source, &config);
            let doc = io::serialize(&d);
            match out {
                Some(path) => std::fs::write(&path, &doc).map_err(|e| Usage(format!("{}: {e}", path.display())))?,
                None => println!("{}", String::from_utf8_lossy(&doc)),
            }
            let vs = check_all(&d).expect("fresh runs are well formed");
            report(&d, &vs);
            Ok(io::exit_code(&vs))
        }
        Command::Check { diagram } => {
            let d = load(&diagram)?;
            let vs = check_all(&d).map_err(|e| Usage(e.to_string()))?;
            report(&d, &vs);
            if vs.is_empty() {
                println!("no violations");
            }
            Ok(io::exit_code(&vs))
        }
        Command::Query {
            diagram,
            event,
            back,
            past,
            ..
        } => {
            let d = load(&diagram)?;
            let e = EventId(event);
            let err = |e: query::QueryError| Usage(e.to_string());
            if past {
                for id in query::causal_past(&d, e).map_err(err)? {
                    println!("{id}");
                }
            } else {
                let steps = if back {
                    query::immediate_causes(&d, e)
                } else {
                    query::immediate_effects(&d, e)
                }
                .map_err(err)?;
                for s in steps {
                    let via = s.via.map_or("same transaction".to_string(), |a| format!("arrow {a}"));
                    println!("{} -> {} via {via}: {}", s.from, s.to, s.label);
                }
            }
            Ok(0)
        }
        Command::Locate { diagram, violation } => {
            let d = load(&diagram)?;
            let vs = check_all(&d).map_err(|e| Usage(e.to_string()))?;
            let v = vs
                .get(violation)
                .ok_or_else(|| Usage(format!("no violation with index {violation} ({} reported)", vs.len())))?;
            for (span, label) in query::locate(&d, v).map_err(|e| Usage(e.to_string()))? {
                let (line, col) = Span::line_col(&span, &d.source);
                println!("{line}:{col} {span} {label}");
            }
            Ok(0)
        }
        Command::Serve { diagram, port } => {
            let d = load(&diagram)?;
            let addr = SocketAddr::from(([127, 0, 0, 1], port));
            eprintln!("serving on http://{addr}/");
            let rt = tokio::runtime::Runtime::new().map_err(|e| Usage(e.to_string()))?;
            rt.block_on(serve::serve(d, addr)).map_err(|e| Usage(e.to_string()))?;
            Ok(0)
        }
    }
}
