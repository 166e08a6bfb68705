//! `comlex` command-line tool.
//!
//! Exit status: 0 on success, 1 when validation finds errors, 2 on usage or
//! I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use comlex::corpus::CorpusIndex;
use comlex::eval::{
    agreement, coverage, coverage_all_modes, read_instances, render_agreement, render_coverage, CoverageMode,
    TaggedInstance,
};
use comlex::export::{to_records, to_sgml};
use comlex::lexicon::{
    fixture_registry, read_entries, validate_entry, Diagnostic, FrameRegistry, Lexicon, Locus,
    ParseMode, PartOfSpeech, PdirClass,
};
use comlex::store::{LexiconStore, StoreConfig};

#[derive(Parser)]
#[command(name = "comlex", version, about = "Subcategorization lexicon toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a lexicon file against a frame inventory.
    Validate(ValidateArgs),
    /// Look up a headword in the store.
    Query(QueryArgs),
    /// Print a lexicon in another format.
    Convert(ConvertArgs),
    /// Replace the p-dir token in every :pval with the class members.
    ExpandPdir(ExpandArgs),
    /// Coverage and agreement measurements.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Concordance lines for a word from a directory of .txt files.
    Kwic(KwicArgs),
    /// Run the HTTP service over a store.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ValidateArgs {
    lexicon: PathBuf,
    /// Frame definitions; the built-in inventory when omitted.
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Directional preposition list, one per line.
    #[arg(long)]
    pdir: Option<PathBuf>,
    /// Treat unknown keywords and heads as errors.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    orth: String,
    #[arg(long)]
    pos: Option<String>,
    #[arg(long, env = "COMLEX_ROOT", default_value = ".")]
    root: PathBuf,
    /// Prefix each entry with its lexicon and version.
    #[arg(long)]
    verbose: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Sgml,
    Records,
    Canonical,
}

#[derive(Args)]
struct ConvertArgs {
    lexicon: PathBuf,
    #[arg(long, value_enum)]
    to: Format,
}

#[derive(Args)]
struct ExpandArgs {
    lexicon: PathBuf,
    /// Class members, one per line; the default list when omitted.
    #[arg(long)]
    class: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Share of gold instances each lexicon, pair and union covers.
    Coverage(CoverageArgs),
    /// Raw label agreement between two annotation files.
    Agreement(AgreementArgs),
}

#[derive(Args)]
struct CoverageArgs {
    #[arg(long)]
    gold: PathBuf,
    /// One lexicon file per annotator; rows are named by file stem.
    #[arg(long, num_args = 1.., required = true)]
    lexicons: Vec<PathBuf>,
    /// complements-only, full-strict, full-pdir, or all.
    #[arg(long, default_value = "all")]
    mode: String,
    #[arg(long)]
    pdir: Option<PathBuf>,
    #[arg(long)]
    exclude_flagged: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AgreementArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct KwicArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Surface form to find; repeat for several.
    #[arg(long, required = true)]
    word: Vec<String>,
    /// Also search the regular inflections of the word for this part of speech.
    #[arg(long)]
    inflect: Option<String>,
    #[arg(long, default_value_t = 40)]
    window: usize,
    #[arg(long, default_value_t = 50)]
    limit: usize,
    /// Index cache file; rebuilt when the corpus changes.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "COMLEX_ROOT", default_value = ".")]
    root: PathBuf,
    #[arg(long, default_value_t = 7411)]
    port: u16,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_pdir(path: Option<&Path>) -> Result<PdirClass> {
    Ok(match path {
        Some(p) => PdirClass::parse(&read(p)?),
        None => PdirClass::default(),
    })
}

fn load_lexicon(path: &Path) -> Result<Lexicon> {
    let (lex, _) = Lexicon::parse(&read(path)?, ParseMode::Lenient).with_context(|| format!("parsing {}", path.display()))?;
    Ok(lex)
}

fn load_instances(path: &Path) -> Result<Vec<TaggedInstance>> {
    read_instances(&read(path)?).with_context(|| format!("reading {}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn report(path: &Path, text: &str, at: Option<comlex::sexpr::Span>, d: &Diagnostic) {
    let span = match &d.locus {
        Locus::Span(s) => Some(*s),
        _ => at,
    };
    match span {
        Some(s) => {
            let (line, col) = s.line_col(text);
            eprintln!("{}:{line}:{col}: {d}", path.display());
        }
        None => eprintln!("{}: {d}", path.display()),
    }
}

/// Returns whether any error was found.
fn validate(args: &ValidateArgs) -> Result<bool> {
    let mode = if args.strict { ParseMode::Strict } else { ParseMode::Lenient };
    let mut failed = false;
    let registry = match &args.frames {
        Some(p) => {
            let text = read(p)?;
            let (reg, diags) = match FrameRegistry::parse(&text, mode) {
                Ok(r) => r,
                Err(e) => {
                    let (line, col) = e.span().map_or((1, 1), |s| s.line_col(&text));
                    eprintln!("{}:{line}:{col}: error: {e}", p.display());
                    return Ok(true);
                }
            };
            // Registry parsing already runs the per-frame checks.
            for d in &diags {
                report(p, &text, None, d);
                failed |= d.is_error();
            }
            reg
        }
        None => fixture_registry(),
    };
    let pdir = load_pdir(args.pdir.as_deref())?;
    let text = read(&args.lexicon)?;
    let forms = match read_entries(&text, mode) {
        Ok(f) => f,
        Err(e) => {
            let (line, col) = e.span().line_col(&text);
            eprintln!("{}:{line}:{col}: error: {e}", args.lexicon.display());
            return Ok(true);
        }
    };
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for (form, res) in forms {
        match res {
            Ok((entry, mut diags)) => {
                count += 1;
                if !seen.insert(entry.key()) {
                    let (line, col) = form.span.line_col(&text);
                    eprintln!(
                        "{}:{line}:{col}: error[DuplicateEntry]: `{}` ({}) defined more than once",
                        args.lexicon.display(),
                        entry.orth,
                        entry.pos
                    );
                    failed = true;
                }
                diags.extend(validate_entry(&entry, &registry, &pdir));
                for d in &diags {
                    report(&args.lexicon, &text, Some(form.span), d);
                    failed |= d.is_error();
                }
            }
            Err(e) => {
                let (line, col) = e.span().unwrap_or(form.span).line_col(&text);
                eprintln!("{}:{line}:{col}: error: {e}", args.lexicon.display());
                failed = true;
            }
        }
    }
    if !failed {
        println!("{}: {count} entries ok", args.lexicon.display());
    }
    Ok(failed)
}

fn query(args: &QueryArgs) -> Result<()> {
    let store = LexiconStore::open(&args.root, StoreConfig::from_root(&args.root)?)
        .with_context(|| format!("opening store {}", args.root.display()))?;
    let pos = args.pos.as_deref().map(|p| PartOfSpeech::resolve(&p.to_lowercase()).0);
    for hit in store.lookup(&args.orth, pos.as_ref()) {
        if args.verbose {
            println!("; {} v{}", hit.lexicon, hit.version);
        }
        println!("{}", hit.entry);
    }
    Ok(())
}

fn eval_coverage(args: &CoverageArgs) -> Result<()> {
    let gold = load_instances(&args.gold)?;
    let pdir = load_pdir(args.pdir.as_deref())?;
    let lexicons = args
        .lexicons
        .iter()
        .map(|p| Ok((stem(p), load_lexicon(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let include = !args.exclude_flagged;
    let reports = if args.mode == "all" {
        coverage_all_modes(&lexicons, &gold, &pdir, include)?.reports
    } else {
        let mode: CoverageMode = args.mode.parse().map_err(anyhow::Error::msg)?;
        vec![coverage(&lexicons, &gold, mode, &pdir, include)?]
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        print!("{}", render_coverage(&reports));
    }
    Ok(())
}

fn eval_agreement(args: &AgreementArgs) -> Result<()> {
    let r = agreement(&load_instances(&args.a)?, &load_instances(&args.b)?)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        print!("{}", render_agreement(&r));
    }
    Ok(())
}

fn kwic(args: &KwicArgs) -> Result<()> {
    let index = match &args.cache {
        Some(c) => CorpusIndex::from_dir_cached(&args.corpus, c)?,
        None => CorpusIndex::from_dir(&args.corpus)?,
    };
    let mut forms: Vec<String> = args.word.clone();
    if let Some(pos) = &args.inflect {
        let (pos, _) = PartOfSpeech::resolve(&pos.to_lowercase());
        for w in &args.word {
            let entry = comlex::Entry::new(pos.clone(), w.clone());
            forms.extend(comlex::lexicon::inflections(&entry)?);
        }
    }
    let lines = index.kwic(&forms, args.window, args.limit)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&lines)?);
    } else {
        for l in &lines {
            println!("{}", l.display(args.window));
        }
    }
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<()> {
    let state = comlex_service::AppState::open(&args.root).with_context(|| format!("opening store {}", args.root.display()))?;
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], args.port));
    let rt = tokio::runtime::Runtime::new()?;
    eprintln!("serving {} on http://{addr}", args.root.display());
    rt.block_on(comlex_service::serve(addr, state))?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate(a) => return Ok(if validate(&a)? { ExitCode::from(1) } else { ExitCode::SUCCESS }),
        Command::Query(a) => query(&a)?,
        Command::Convert(a) => {
            let lex = load_lexicon(&a.lexicon)?;
            print!(
                "{}",
                match a.to {
                    Format::Sgml => to_sgml(&lex),
                    Format::Records => to_records(&lex),
                    Format::Canonical => lex.to_text(),
                }
            );
        }
        Command::ExpandPdir(a) => {
            let class = load_pdir(a.class.as_deref())?;
            if class.is_empty() {
                bail!("p-dir class is empty");
            }
            print!("{}", load_lexicon(&a.lexicon)?.expand_pdir(&class)?.to_text());
        }
        Command::Eval(EvalCommand::Coverage(a)) => eval_coverage(&a)?,
        Command::Eval(EvalCommand::Agreement(a)) => eval_agreement(&a)?,
        Command::Kwic(a) => kwic(&a)?,
        Command::Serve(a) => serve(&a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
