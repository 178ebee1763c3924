use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use similar::TextDiff;

use sepforge::change_graph::ChangeId;
use sepforge::diff::{map_asts, render_mapping};
use sepforge::fgpdg::{GraphOptions, Mode, DEFAULT_CLOSURE_DEPTH};
use sepforge::lang::{parse_method, Signatures};
use sepforge::miner::{mine_seps, MinerConfig};
use sepforge::pipeline::{build_change_graphs, cross_validate, ingest_corpus, EvalConfig, PatternsFile};
use sepforge::transformer::{repair_all, Client};
use sepforge::{Error, FORMAT_VERSION};

#[derive(Parser)]
#[command(name = "sepforge", version, about = "Mine, detect and apply systematic edit patterns in MiniJ code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Label abstraction.
    #[arg(long, default_value = "sirius")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_CLOSURE_DEPTH)]
    closure_depth: usize,
    /// Extra signature table merged over the corpus one.
    #[arg(long)]
    signatures: Option<PathBuf>,
}

impl GraphArgs {
    fn options(&self) -> GraphOptions {
        GraphOptions {
            mode: self.mode,
            closure_depth: self.closure_depth,
            strict: false,
        }
    }

    fn signatures(&self, mut base: Signatures) -> Result<Signatures, Error> {
        if let Some(p) = &self.signatures {
            base.merge(Signatures::load(p)?);
        }
        Ok(base)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mine edit patterns from a corpus directory.
    Mine {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        min_support: usize,
        #[arg(long, default_value_t = 20)]
        max_nodes: usize,
        /// Keep every valid frequent pattern, not only maximal ones.
        #[arg(long)]
        all_frequent: bool,
        #[command(flatten)]
        graph: GraphArgs,
        /// Patterns file to write (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report pattern occurrences in client methods.
    Detect {
        #[arg(long)]
        patterns: PathBuf,
        /// A .minij file or a directory of them.
        #[arg(long)]
        client: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply patterns to client methods.
    Repair {
        #[arg(long)]
        patterns: PathBuf,
        #[arg(long)]
        client: PathBuf,
        /// Print diffs without rewriting files.
        #[arg(long)]
        dry_run: bool,
        /// JSON report destination (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leave-one-change-out cross-validation.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        min_support: usize,
        #[arg(long, default_value_t = 20)]
        max_nodes: usize,
        #[command(flatten)]
        graph: GraphArgs,
        /// Shuffles trial scheduling; the report must not depend on it.
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report destination; the table goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the syntax-tree mapping between two versions of a method.
    DiffAst { old: PathBuf, new: PathBuf },
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `.minij` files of a client path, sorted.
fn client_files(path: &Path) -> Result<Vec<PathBuf>, Error> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "minij"))
        .collect();
    files.sort();
    Ok(files)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Mine {
            corpus,
            min_support,
            max_nodes,
            all_frequent,
            graph,
            out,
        } => {
            let c = ingest_corpus(&corpus)?;
            for s in &c.skipped {
                eprintln!("skipped {}: {}", s.name, s.reason);
            }
            let opts = graph.options();
            let sigs = graph.signatures(c.signatures.clone())?;
            let graphs = build_change_graphs(&c.examples, &sigs, &opts)?;
            let cfg = MinerConfig {
                min_support,
                max_nodes,
                all_frequent,
            };
            let seps = mine_seps(&graphs, &cfg);
            eprintln!("{} changes, {} patterns", graphs.len(), seps.len());
            let file = PatternsFile::new(seps, &c.examples, sigs, &opts, min_support);
            emit(&out, &file.to_json())
        }
        Command::Detect { patterns, client, out } => {
            let pf = PatternsFile::load(&patterns)?;
            let opts = pf.graph_options();
            let mut found = Vec::new();
            for file in client_files(&client)? {
                let c = Client::parse(&read(&file)?, &pf.signatures, &opts)?;
                for sep in &pf.seps {
                    for m in c.matches(sep)? {
                        let anchors: Vec<_> = m
                            .g_map
                            .iter()
                            .map(|&g| {
                                let n = c.graph.node(g);
                                let span = c.ast.node(n.primary_anchor()).span;
                                json!({"label": n.label, "text": n.text, "line": span.line, "column": span.column})
                            })
                            .collect();
                        found.push(json!({
                            "sep_id": sep.id,
                            "file": file.display().to_string(),
                            "method": c.ast.method_name(),
                            "anchors": anchors,
                        }));
                    }
                }
            }
            let doc = json!({"format_version": FORMAT_VERSION, "matches": found});
            emit(&out, &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))
        }
        Command::Repair {
            patterns,
            client,
            dry_run,
            out,
        } => {
            let pf = PatternsFile::load(&patterns)?;
            let opts = pf.graph_options();
            let refs = pf.reference_graphs()?;
            let mut report = Vec::new();
            for file in client_files(&client)? {
                let original = read(&file)?;
                let mut current = Client::parse(&original, &pf.signatures, &opts)?;
                let mut text = original.clone();
                for sep in &pf.seps {
                    let id: &ChangeId = &sep.instances[0].change_id;
                    let cg = refs.get(id).ok_or_else(|| {
                        Error::Invariant(format!("patterns file lacks the source of change {id}"))
                    })?;
                    let r = repair_all(&current, sep, cg, &opts)?;
                    for o in &r.outcomes {
                        report.push(json!({
                            "file": file.display().to_string(),
                            "sep_id": sep.id,
                            "status": if o.applied { "applied" } else { "failed" },
                            "error": o.error,
                        }));
                    }
                    if r.applied() > 0 {
                        text = r.text;
                        current = Client::parse(&text, &pf.signatures, &opts)?;
                    }
                }
                if text != original {
                    let name = file.display().to_string();
                    let diff = TextDiff::from_lines(&original, &text);
                    print!("{}", diff.unified_diff().header(&name, &name));
                    if !dry_run {
                        write(&file, &text)?;
                    }
                }
            }
            let doc = json!({"format_version": FORMAT_VERSION, "dry_run": dry_run, "results": report});
            emit(&out, &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))
        }
        Command::Eval {
            corpus,
            min_support,
            max_nodes,
            graph,
            seed,
            out,
        } => {
            let mut c = ingest_corpus(&corpus)?;
            c.signatures = graph.signatures(c.signatures.clone())?;
            let cfg = EvalConfig {
                min_support,
                max_nodes,
                graph: graph.options(),
                schedule_seed: seed,
            };
            let report = cross_validate(&c, &cfg)?;
            print!("{}", report.to_table());
            if let Some(p) = &out {
                write(p, &report.to_json())?;
            }
            Ok(())
        }
        Command::DiffAst { old, new } => {
            let a = parse_method(&read(&old)?)?;
            let b = parse_method(&read(&new)?)?;
            print!("{}", render_mapping(&a, &b, &map_asts(&a, &b)));
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invariant(_)
        | Error::MalformedTree(_)
        | Error::ForeignAstNode(_)
        | Error::DisconnectedFragment
        | Error::UnattachableMts(_)
        | Error::InvalidResult(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
