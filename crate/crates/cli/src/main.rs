mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jspkdm::pipeline::{
    run_pipeline, scan_webapp, write_outputs, write_servlet_sources, OutputFormat, PipelineConfig, ScanOptions,
};
use jspkdm::servlet_translator::TranslationOptions;

use crate::config::FileConfig;

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_FATAL: u8 = 2;

#[derive(Parser)]
#[command(
    name = "jspkdm",
    version,
    about = "Static analysis of JSP web applications into a KDM code model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a webapp directory and write model.xmi, model.json, deps.dot and report.json.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Webapp root (the directory holding WEB-INF).
    root: PathBuf,
    /// Output directory [default: jspkdm-out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated artifacts to write: xmi, json, dot [default: all]
    #[arg(long, value_delimiter = ',')]
    format: Vec<OutputFormat>,
    /// Context path the app is deployed under, e.g. /shop
    #[arg(long)]
    context_path: Option<String>,
    /// Extra directory to search for @WebServlet classes (repeatable).
    #[arg(long)]
    source_root: Vec<PathBuf>,
    /// Only analyze files matching this root-relative glob (repeatable).
    #[arg(long)]
    include: Vec<String>,
    /// Skip files matching this root-relative glob (repeatable).
    #[arg(long)]
    exclude: Vec<String>,
    /// Also write the translated servlet sources here.
    #[arg(long)]
    servlet_src_out: Option<PathBuf>,
    /// Exit with status 2 when any warning or error is reported.
    #[arg(long)]
    strict: bool,
    /// TOML file with defaults for the options above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Encoding of the pages (WHATWG label) [default: utf-8]
    #[arg(long)]
    encoding: Option<String>,
    /// Package of the generated servlet classes [default: org.apache.jsp]
    #[arg(long)]
    package: Option<String>,
    /// Custom tag with a known handler class, as prefix:name=fully.qualified.Class (repeatable).
    #[arg(long, value_name = "TAG=CLASS")]
    tag_handler: Vec<String>,
    /// Do not print diagnostics.
    #[arg(long, short)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => match analyze(args) {
            Ok(code) => ExitCode::from(code),
            Err(message) => {
                eprintln!("error: {message}");
                ExitCode::from(EXIT_FATAL)
            }
        },
    }
}

fn analyze(args: AnalyzeArgs) -> Result<u8, String> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    let formats = if !args.format.is_empty() {
        args.format
    } else if let Some(names) = &file.formats {
        names
            .iter()
            .map(|n| n.parse())
            .collect::<Result<Vec<OutputFormat>, _>>()?
    } else {
        OutputFormat::ALL.to_vec()
    };
    let mut tag_handlers = file.tag_handlers;
    for spec in &args.tag_handler {
        let (tag, class) = spec
            .split_once('=')
            .ok_or_else(|| format!("--tag-handler expects TAG=CLASS, got `{spec}`"))?;
        tag_handlers.insert(tag.trim().to_string(), class.trim().to_string());
    }
    let mut translation = TranslationOptions {
        tag_handlers,
        ..Default::default()
    };
    if let Some(package) = args.package.or(file.package) {
        translation.package = package;
    }
    let config = PipelineConfig {
        context_path: args.context_path.or(file.context_path).unwrap_or_default(),
        encoding: args.encoding.or(file.encoding),
        translation,
    };
    let scan = ScanOptions {
        include: if args.include.is_empty() {
            file.include
        } else {
            args.include
        },
        exclude: if args.exclude.is_empty() {
            file.exclude
        } else {
            args.exclude
        },
        source_roots: if args.source_root.is_empty() {
            file.source_roots
        } else {
            args.source_root
        },
    };
    let out_dir = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("jspkdm-out"));
    let servlet_src_out = args.servlet_src_out.or(file.servlet_src_out);
    let strict = args.strict || file.strict.unwrap_or(false);

    let inventory = scan_webapp(&args.root, &scan).map_err(|e| e.to_string())?;
    let output = run_pipeline(&inventory, &config).map_err(|e| e.to_string())?;
    write_outputs(&out_dir, &formats, &output).map_err(|e| e.to_string())?;
    if let Some(dir) = servlet_src_out {
        write_servlet_sources(&dir, &output.units).map_err(|e| e.to_string())?;
    }

    let report = &output.report;
    if !args.quiet {
        for d in report.all_diagnostics().filter(|d| d.is_problem()) {
            eprintln!("{d}");
        }
    }
    let c = &report.counts;
    eprintln!(
        "{} pages ({} failed), {} refs: {} internal, {} external, {} unresolved; {} relationships; {} warnings, {} errors",
        c.pages, c.pages_failed, c.refs, c.internal, c.external, c.unresolved, c.relationships, c.warnings, c.errors
    );
    Ok(match (report.has_problems(), strict) {
        (false, _) => 0,
        (true, false) => EXIT_DIAGNOSTICS,
        (true, true) => EXIT_FATAL,
    })
}
