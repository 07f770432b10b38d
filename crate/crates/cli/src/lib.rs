//! Command-line front end: builds a model from C++ headers, generates and
//! checks `.adl` files, and edits `@adl.*` annotations.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use adlgen_core::config::{load_config_dir, Config};
use adlgen_core::frontend::{
    import_header, inject_annotation, inject_member_annotation, parse_header, TypeMap, HEADER_EXTENSIONS,
};
use adlgen_core::generator::{select_classes, write_unit, AdlOutVisitor, GenOptions, NO_OPEN_PROJECT, NO_SELECTION};
use adlgen_core::model::{Model, PropertyKey, ShapeType};
use adlgen_core::reader::{check_parsed, parse_adl_bytes, Diagnostic, Severity};
use adlgen_core::GenerateError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const SUCCESS: i32 = 0;
pub const FAILURE: i32 = 1;
pub const NOTHING_TO_DO: i32 = 2;

const NO_OPEN_DIAGRAM: &str = "No open diagram";
const DEFAULT_CONFIG_DIR: &str = "config";

const EXIT_STATUS: &str = "\
Exit status:
  0  success
  1  at least one file or class failed (parse, validation or write errors)
  2  nothing to do: no input headers, or the selection matched no class";

#[derive(Debug, Parser)]
#[command(name = "adlgen", version, about, after_help = EXIT_STATUS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one `.adl` file per selected class.
    Generate(GenerateArgs),
    /// Check `.adl` files for consistency.
    Check(CheckArgs),
    /// Set or remove `@adl.*` tags on a class or member in a header.
    Annotate(AnnotateArgs),
    /// Print the model and the resolved ADL options of each class.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Header files or directories scanned for .h/.hpp/.hh files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Library headers: their classes can be referenced but are never generated.
    #[arg(long = "import", value_name = "PATH")]
    pub imports: Vec<PathBuf>,
    /// Configuration directory [default: ./config, if present].
    #[arg(long, value_name = "DIR")]
    pub config_dir: Option<PathBuf>,
    /// Extra `cppType = adlType` mappings.
    #[arg(long, value_name = "FILE")]
    pub typemap: Option<PathBuf>,
    /// Qualified-name globs; `*` stays within a `::` segment, `**` spans segments.
    #[arg(long = "select", value_name = "GLOB", default_value = "*")]
    pub selectors: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output root; class folders are created beneath it.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// `.adl` files or directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub config_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Header file to edit in place.
    pub file: PathBuf,
    /// Class name, plain or `::`-qualified.
    #[arg(long)]
    pub class: String,
    /// Annotate this member of the class instead of the class itself.
    #[arg(long)]
    pub member: Option<String>,
    /// Set a tag, e.g. `ADLINTERFACE=DataObject` or `ADLPERSISTENT=`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Remove a tag.
    #[arg(long = "unset", value_name = "KEY")]
    pub unset: Vec<String>,
    /// Keep the original as `<file>.bak` when the file changes.
    #[arg(long)]
    pub backup: bool,
    #[arg(long, value_name = "DIR")]
    pub config_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// File listing selector globs, one per line.
    #[arg(long, value_name = "FILE")]
    pub diagram: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Generate(args) => generate(&args, out, err),
        Command::Check(args) => check(&args, out, err),
        Command::Annotate(args) => annotate(&args, out),
        Command::Inspect(args) => inspect(&args, out, err),
    };
    match result {
        Ok(status) => status,
        Err(Failure { status, message }) => {
            let _ = writeln!(err, "{message}");
            status
        }
    }
}

/// Ends a command with a message on the error stream.
struct Failure {
    status: i32,
    message: String,
}

impl Failure {
    fn new(status: i32, message: impl ToString) -> Self {
        Failure {
            status,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn load_config(dir: Option<&Path>) -> Result<Config, Failure> {
    match dir {
        Some(dir) => load_config_dir(dir).map_err(|e| Failure::new(FAILURE, e)),
        None if Path::new(DEFAULT_CONFIG_DIR).is_dir() => {
            load_config_dir(Path::new(DEFAULT_CONFIG_DIR)).map_err(|e| Failure::new(FAILURE, e))
        }
        None => Ok(Config::default()),
    }
}

/// Files under `inputs` with one of `extensions`, sorted per directory.
/// Explicitly named files are taken as-is.
fn collect_files(inputs: &[PathBuf], extensions: &[&str], err: &mut dyn Write) -> (Vec<PathBuf>, bool) {
    fn walk(dir: &Path, extensions: &[&str], files: &mut Vec<PathBuf>) -> io::Result<()> {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(&path, extensions, files)?;
            } else if path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| extensions.contains(&e))
            {
                files.push(path);
            }
        }
        Ok(())
    }

    let mut files = Vec::new();
    let mut ok = true;
    for input in inputs {
        let result = if input.is_dir() {
            walk(input, extensions, &mut files)
        } else if input.is_file() {
            files.push(input.clone());
            Ok(())
        } else {
            Err(io::Error::new(io::ErrorKind::NotFound, "no such file or directory"))
        };
        if let Err(e) = result {
            let _ = writeln!(err, "{}: {e}", input.display());
            ok = false;
        }
    }
    (files, ok)
}

struct Loaded {
    model: Model,
    config: Config,
    typemap: TypeMap,
    ok: bool,
}

fn load_model(args: &ModelArgs, err: &mut dyn Write) -> Result<Loaded, Failure> {
    let config = load_config(args.config_dir.as_deref())?;
    let mut typemap = config.defaults.typemap.clone();
    if let Some(path) = &args.typemap {
        let text = fs::read_to_string(path).map_err(|e| Failure::new(FAILURE, format!("{}: {e}", path.display())))?;
        let extra = TypeMap::parse(&text).map_err(|e| Failure::new(FAILURE, format!("{}: {e}", path.display())))?;
        typemap.extend(&extra);
    }

    let (headers, mut ok) = collect_files(&args.inputs, HEADER_EXTENSIONS, err);
    let (imports, imports_ok) = collect_files(&args.imports, HEADER_EXTENSIONS, err);
    ok &= imports_ok;
    if headers.is_empty() {
        return Err(Failure::new(NOTHING_TO_DO, NO_OPEN_PROJECT));
    }

    let mut model = Model::new();
    let sources = imports
        .iter()
        .map(|p| (p, true))
        .chain(headers.iter().map(|p| (p, false)));
    for (path, imported) in sources {
        let parsed = fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|text| {
            let add = if imported { import_header } else { parse_header };
            add(&mut model, &text, path).map_err(|e| e.to_string())
        });
        if let Err(message) = parsed {
            let _ = writeln!(err, "{message}");
            ok = false;
        }
    }
    Ok(Loaded {
        model,
        config,
        typemap,
        ok,
    })
}

fn select(model: &Model, selectors: &[String]) -> Result<BTreeSet<adlgen_core::ElementId>, Failure> {
    select_classes(model, selectors)
        .map(|ids| ids.into_iter().collect())
        .map_err(|e| match e {
            GenerateError::NoOpenProject | GenerateError::NoSelection => Failure::new(NOTHING_TO_DO, e),
            other => Failure::new(FAILURE, other),
        })
}

fn generate(args: &GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let Loaded {
        model,
        config,
        typemap,
        mut ok,
    } = load_model(&args.model, err)?;
    if model.is_empty() {
        return Err(Failure::new(if ok { NOTHING_TO_DO } else { FAILURE }, NO_OPEN_PROJECT));
    }
    let selected = select(&model, &args.model.selectors)?;

    let mut visitor = AdlOutVisitor::new(&config, &typemap);
    for &root in model.roots() {
        model.accept(root, &mut visitor).map_err(|e| Failure::new(FAILURE, e))?;
    }
    for outcome in visitor.into_outcomes() {
        if !selected.contains(&outcome.class) {
            continue;
        }
        let written = outcome.result.and_then(|unit| match (unit, &outcome.options) {
            (Some(unit), Some(options)) => write_unit(&unit, &args.out, &options.folder, out).map(Some),
            _ => Ok(None),
        });
        if let Err(e) = written {
            let _ = writeln!(err, "{e}");
            ok = false;
        }
    }
    Ok(if ok { SUCCESS } else { FAILURE })
}

fn check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let config = load_config(args.config_dir.as_deref())?;
    let (files, mut ok) = collect_files(&args.inputs, &["adl"], err);
    if files.is_empty() {
        return Err(Failure::new(if ok { NOTHING_TO_DO } else { FAILURE }, NO_OPEN_PROJECT));
    }
    for file in &files {
        let shown = file.display().to_string();
        let bytes = match fs::read(file) {
            Ok(bytes) => bytes,
            Err(e) => {
                let _ = writeln!(err, "{shown}: {e}");
                ok = false;
                continue;
            }
        };
        let diagnostics = match parse_adl_bytes(&bytes) {
            Ok(parsed) => check_parsed(&parsed, &siblings(file), &config.schemas),
            Err(e) => vec![Diagnostic {
                severity: Severity::Error,
                line: e.line,
                message: e.message,
            }],
        };
        for diagnostic in diagnostics {
            ok &= diagnostic.severity != Severity::Error;
            let _ = writeln!(out, "{}", diagnostic.render(&shown));
        }
    }
    Ok(if ok { SUCCESS } else { FAILURE })
}

/// Names of the `.adl` files beside `file`.
fn siblings(file: &Path) -> BTreeSet<String> {
    let dir = file
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "adl"))
        .filter_map(|p| p.file_name().and_then(|n| n.to_str()).map(str::to_string))
        .collect()
}

fn annotate(args: &AnnotateArgs, out: &mut dyn Write) -> Outcome {
    let config = load_config(args.config_dir.as_deref())?;
    let original =
        fs::read_to_string(&args.file).map_err(|e| Failure::new(FAILURE, format!("{}: {e}", args.file.display())))?;

    let key = |text: &str| text.parse::<PropertyKey>().map_err(|e| Failure::new(FAILURE, e));
    let mut edits = Vec::new();
    for assignment in &args.set {
        let (name, value) = assignment.split_once('=').unwrap_or((assignment, ""));
        let key = key(name.trim())?;
        if args.member.is_none() {
            config
                .schemas
                .validate_value(ShapeType::Class, &key, value)
                .map_err(|e| Failure::new(FAILURE, e))?;
        }
        edits.push((key, Some(value.to_string())));
    }
    for name in &args.unset {
        edits.push((key(name.trim())?, None));
    }
    if edits.is_empty() {
        return Err(Failure::new(NOTHING_TO_DO, "nothing to annotate: use --set or --unset"));
    }

    let mut text = original.clone();
    for (key, value) in &edits {
        text = match &args.member {
            Some(member) => inject_member_annotation(&text, &args.class, member, key, value.as_deref()),
            None => inject_annotation(&text, &args.class, key, value.as_deref()),
        }
        .map_err(|e| Failure::new(FAILURE, e))?;
    }

    let shown = args.file.display();
    if text == original {
        let _ = writeln!(out, "unchanged {shown}");
        return Ok(SUCCESS);
    }
    let io_failure = |e: io::Error| Failure::new(FAILURE, format!("{shown}: {e}"));
    if args.backup {
        let mut backup = args.file.clone().into_os_string();
        backup.push(".bak");
        fs::write(backup, &original).map_err(io_failure)?;
    }
    fs::write(&args.file, text).map_err(io_failure)?;
    let _ = writeln!(out, "updated {shown}");
    Ok(SUCCESS)
}

#[derive(Serialize)]
struct ClassReport<'a> {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    options: Option<&'a GenOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct InspectReport<'a> {
    model: &'a Model,
    classes: Vec<ClassReport<'a>>,
}

fn inspect(args: &InspectArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let Loaded {
        model,
        config,
        typemap,
        ok,
    } = load_model(&args.model, err)?;
    if model.is_empty() {
        return Err(Failure::new(if ok { NOTHING_TO_DO } else { FAILURE }, NO_OPEN_PROJECT));
    }
    let selectors = match &args.diagram {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|_| Failure::new(NOTHING_TO_DO, NO_OPEN_DIAGRAM))?;
            let globs: Vec<String> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect();
            if globs.is_empty() {
                return Err(Failure::new(NOTHING_TO_DO, NO_SELECTION));
            }
            globs
        }
        None => args.model.selectors.clone(),
    };
    let selected = select(&model, &selectors)?;

    let mut visitor = AdlOutVisitor::new(&config, &typemap);
    for &root in model.roots() {
        model.accept(root, &mut visitor).map_err(|e| Failure::new(FAILURE, e))?;
    }
    let outcomes: Vec<_> = visitor
        .into_outcomes()
        .into_iter()
        .filter(|o| selected.contains(&o.class))
        .collect();
    let classes: Vec<ClassReport> = outcomes
        .iter()
        .map(|o| ClassReport {
            name: o.qualified_name.clone(),
            options: o.options.as_ref(),
            error: o.result.as_ref().err().map(ToString::to_string),
        })
        .collect();

    let clean = ok && classes.iter().all(|c| c.error.is_none());
    let written = match args.format {
        Format::Json => {
            let report = InspectReport { model: &model, classes };
            serde_json::to_writer_pretty(&mut *out, &report)
                .map_err(io::Error::from)
                .and_then(|()| writeln!(out))
        }
        Format::Text => write_text_report(out, &model, &classes),
    };
    written.map_err(|e| Failure::new(FAILURE, e))?;
    Ok(if clean { SUCCESS } else { FAILURE })
}

fn write_text_report(out: &mut dyn Write, model: &Model, classes: &[ClassReport]) -> io::Result<()> {
    out.write_all(model.dump().as_bytes())?;
    writeln!(out)?;
    for class in classes {
        match (class.options, &class.error) {
            (_, Some(error)) => writeln!(out, "{}: error: {error}", class.name)?,
            (Some(o), None) => writeln!(
                out,
                "{}: ADLENABLED={} ADLINTERFACE={} ADLFOLDER={:?}",
                class.name, o.mode, o.kind, o.folder
            )?,
            (None, None) => {}
        }
    }
    Ok(())
}
