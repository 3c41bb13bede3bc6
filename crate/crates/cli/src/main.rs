// SPDX-License-Identifier: Apache-2.0
//! `mvlmul`: generate, verify, compare and export multiplier netlists.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or
//! configuration error, 3 I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mvlmul::metrics::compare::{
    compare, compare_head_to_head, with_libraries, ComparisonReport, Design,
};
use mvlmul::metrics::libs::LibrarySource;
use mvlmul::metrics::timing::{TimingLibrary, PRESETS, PRESET_BINARY_09V, PRESET_QUATERNARY_09V};
use mvlmul::netgen::gen_multiplier;
use mvlmul::netlist::Netlist;
use mvlmul::sim::{
    input_space, verify_exhaustive_with, verify_random_with, Execution, VerificationReport,
    DEFAULT_EXHAUSTIVE_CAP,
};
use mvlmul::spice::export_spice;
use mvlmul::Error;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

/// Mismatches listed on the console; the JSON report keeps all of them.
const SHOW_MISMATCHES: usize = 10;

#[derive(Parser)]
#[command(
    name = "mvlmul",
    version,
    about = "Binary and quaternary Wallace-tree multiplier toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an N×N multiplier netlist and print its gate inventory.
    Generate {
        #[command(flatten)]
        design: DesignArgs,
        /// Netlist JSON destination (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a netlist against integer multiplication.
    Verify(VerifyArgs),
    /// Tabulate area and delay of several designs.
    Compare(CompareArgs),
    /// Write a structural SPICE-style deck.
    ExportSpice {
        /// Netlist JSON file.
        netlist: Option<PathBuf>,
        #[command(flatten)]
        design: OptDesignArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a library as TOML, as a starting point for overrides.
    DumpLib {
        /// `cost` or a timing preset name.
        name: String,
    },
}

fn parse_radix(s: &str) -> Result<u32, String> {
    match s {
        "2" => Ok(2),
        "4" => Ok(4),
        _ => Err(format!("radix must be 2 or 4, got `{s}`")),
    }
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long, value_parser = parse_radix)]
    radix: u32,
    /// Operand width in digits.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=256))]
    width: u32,
}

#[derive(Args)]
struct OptDesignArgs {
    /// Generate instead of reading a netlist file.
    #[arg(long, value_parser = parse_radix, requires = "width")]
    radix: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=256), requires = "radix")]
    width: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Csv,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    /// Netlist JSON file.
    netlist: Option<PathBuf>,
    #[command(flatten)]
    design: OptDesignArgs,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    count: u64,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    workers: Option<usize>,
    /// Report JSON destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `json` prints the report instead of the summary.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct CompareArgs {
    /// Designs as `r<radix>n<width>` or netlist JSON files.
    designs: Vec<String>,
    /// `head-to-head`: r4n1/r2n2, r4n2/r2n4 and r4n4/r2n8.
    #[arg(long)]
    preset: Option<String>,
    /// Cost library TOML file.
    #[arg(long)]
    cost_lib: Option<PathBuf>,
    /// Timing preset name or TOML file; repeatable. Each design uses the
    /// first library covering all of its gate kinds.
    #[arg(long)]
    timing_lib: Vec<String>,
    /// Defaults to the `--out` extension, else Markdown.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| io_failure(Path::new("<stdout>"), e))
        }
    }
}

fn load_netlist(path: &Path) -> Result<Netlist, Failure> {
    let n =
        Netlist::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    n.validate()
        .map_err(|v| usage(format!("{}: {}", path.display(), Error::Invalid(v))))?;
    Ok(n)
}

fn netlist_from(file: Option<&Path>, design: &OptDesignArgs) -> Result<Netlist, Failure> {
    match (file, design.radix, design.width) {
        (Some(_), Some(_), _) => Err(usage(
            "give either a netlist file or --radix/--width, not both",
        )),
        (Some(p), None, _) => load_netlist(p),
        (None, Some(r), Some(w)) => Ok(gen_multiplier(r, w as usize)?),
        _ => Err(usage("a netlist file or --radix and --width is required")),
    }
}

fn execution(workers: Option<usize>) -> Result<Execution, Failure> {
    match workers {
        None => Ok(Execution::default()),
        Some(0) => Err(usage("--workers must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        Some(k) => Ok(Execution::Parallel { workers: Some(k) }),
    }
}

fn generate(design: &DesignArgs, out: Option<&Path>) -> Result<u8, Failure> {
    let n = gen_multiplier(design.radix, design.width as usize)?;
    let json = n.to_json()?;
    let summary = format!(
        "{} {} ({} gates)",
        n.label(),
        n.inventory(),
        n.gates().len()
    );
    match out {
        Some(p) => {
            write_out(Some(p), &json)?;
            println!("{summary}");
        }
        None => {
            write_out(None, &json)?;
            eprintln!("{summary}");
        }
    }
    Ok(0)
}

fn digits(d: &[u8]) -> String {
    d.iter().rev().map(|v| char::from(b'0' + v)).collect()
}

fn print_summary(r: &VerificationReport) {
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    println!(
        "{verdict} {}: {} vectors, {} mismatches",
        r.design,
        r.vectors,
        r.mismatches.len()
    );
    for m in r.mismatches.iter().take(SHOW_MISMATCHES) {
        match &m.error {
            Some(e) => println!("  {} x {}: {e}", digits(&m.x), digits(&m.y)),
            None => println!(
                "  {} x {}: expected {} got {}",
                digits(&m.x),
                digits(&m.y),
                digits(&m.expected),
                digits(&m.got)
            ),
        }
    }
    if r.mismatches.len() > SHOW_MISMATCHES {
        println!("  ... {} more", r.mismatches.len() - SHOW_MISMATCHES);
    }
}

fn verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let n = netlist_from(args.netlist.as_deref(), &args.design)?;
    let exec = execution(args.workers)?;
    let report = match args.mode {
        Mode::Exhaustive => {
            let space = input_space(n.radix(), n.width());
            if space > DEFAULT_EXHAUSTIVE_CAP {
                return Err(usage(format!(
                    "{} has {space} input pairs, above the exhaustive cap of {DEFAULT_EXHAUSTIVE_CAP}; \
                     use --mode random --count <N> --seed <S>",
                    n.label()
                )));
            }
            verify_exhaustive_with(&n, DEFAULT_EXHAUSTIVE_CAP, exec)?
        }
        Mode::Random => verify_random_with(&n, args.count, args.seed, exec)?,
    };
    let json = report.to_json()?;
    if let Some(p) = &args.out {
        write_out(Some(p), &json)?;
    }
    match args.format {
        Some(Format::Json) => write_out(None, &(json + "\n"))?,
        Some(Format::Csv) => return Err(usage("verify prints md or json")),
        Some(Format::Md) | None => print_summary(&report),
    }
    Ok(if report.passed() { 0 } else { EXIT_MISMATCH })
}

fn parse_design(spec: &str) -> Result<Option<(u32, usize)>, Failure> {
    let Some(rest) = spec.strip_prefix('r') else {
        return Ok(None);
    };
    let Some((r, n)) = rest.split_once('n') else {
        return Ok(None);
    };
    let (Ok(r), Ok(n)) = (r.parse::<u32>(), n.parse::<usize>()) else {
        return Ok(None);
    };
    if r != 2 && r != 4 {
        return Err(usage(format!("{spec}: radix must be 2 or 4")));
    }
    if n == 0 {
        return Err(usage(format!("{spec}: width must be at least 1")));
    }
    Ok(Some((r, n)))
}

fn render(report: &ComparisonReport, format: Format) -> Result<String, Failure> {
    Ok(match format {
        Format::Md => report.to_markdown(),
        Format::Csv => report.to_csv()?,
        Format::Json => report.to_json()? + "\n",
    })
}

fn compare_cmd(args: &CompareArgs, libs: &LibrarySource) -> Result<u8, Failure> {
    let cost = libs.cost(args.cost_lib.as_deref())?;
    let names: Vec<String> = if args.timing_lib.is_empty() {
        vec![
            PRESET_BINARY_09V.to_owned(),
            PRESET_QUATERNARY_09V.to_owned(),
        ]
    } else {
        args.timing_lib.clone()
    };
    let timing = names
        .iter()
        .map(|s| libs.timing(s))
        .collect::<Result<Vec<TimingLibrary>, _>>()?;
    let report = match args.preset.as_deref() {
        Some("head-to-head") => {
            if !args.designs.is_empty() {
                return Err(usage("--preset takes no design arguments"));
            }
            compare_head_to_head(&cost, &timing)?
        }
        Some(other) => {
            return Err(usage(format!(
                "unknown preset `{other}` (known: head-to-head)"
            )))
        }
        None => {
            if args.designs.len() < 2 {
                return Err(usage(
                    "compare needs at least two designs or --preset head-to-head",
                ));
            }
            let mut designs = Vec::new();
            for spec in &args.designs {
                let n = match parse_design(spec)? {
                    Some((r, w)) => gen_multiplier(r, w)?,
                    None => load_netlist(Path::new(spec))?,
                };
                let mut d = with_libraries(n, &cost, &timing)?;
                let seen = designs
                    .iter()
                    .filter(|e: &&Design| e.netlist.label() == d.label)
                    .count();
                if seen > 0 {
                    d.label = format!("{}#{}", d.label, seen + 1);
                }
                designs.push(d);
            }
            compare(&designs)?
        }
    };
    let format = args.format.unwrap_or_else(|| {
        match args
            .out
            .as_deref()
            .and_then(Path::extension)
            .and_then(|e| e.to_str())
        {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => Format::Md,
        }
    });
    write_out(args.out.as_deref(), &render(&report, format)?)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let libs = LibrarySource::from_env();
    match &cli.command {
        Command::Generate { design, out } => generate(design, out.as_deref()),
        Command::Verify(args) => verify(args),
        Command::Compare(args) => compare_cmd(args, &libs),
        Command::ExportSpice {
            netlist,
            design,
            out,
        } => {
            let n = netlist_from(netlist.as_deref(), design)?;
            write_out(out.as_deref(), &export_spice(&n)?)?;
            Ok(0)
        }
        Command::DumpLib { name } => {
            let text = if name == "cost" {
                libs.cost(None)?.to_toml()
            } else if PRESETS.contains(&name.as_str()) {
                libs.timing(name)?.to_toml()
            } else {
                return Err(usage(format!(
                    "unknown library `{name}` (known: cost, {})",
                    PRESETS.join(", ")
                )));
            };
            write_out(None, &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("mvlmul: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
