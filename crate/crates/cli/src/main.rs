use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::Sign;
use serde::Serialize;

use delta_simplex::atlas::{
    atlas_stats, build_atlas, read_atlas, verify_atlas, write_atlas, AtlasRecord, EnumerateOptions,
    FamilySelection, VerifyReport,
};
use delta_simplex::corner::{corner_minimum, corner_minimum_excluding_vertex};
use delta_simplex::equivalence::{check_equivalence, Verdict};
use delta_simplex::formats::{ints, parse_input, InputDoc, Int, MapDoc, NormalizedDoc};
use delta_simplex::normal_form::{canonical_key, normalize, normalize_auto};
use delta_simplex::Family;

#[derive(Parser)]
#[command(
    name = "delta-simplex",
    version,
    about = "Atlas of empty Δ-modular simplices"
)]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "DELTA_SIMPLEX_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Empty,
    Lattice,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate class representatives and write them as JSON lines.
    Enumerate {
        #[arg(long)]
        delta: u64,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "both")]
        family: FamilyArg,
        /// Also include every smaller Δ.
        #[arg(long)]
        up_to: bool,
        /// Re-check every record before writing.
        #[arg(long)]
        verify: bool,
        /// Output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two simplices are unimodularly equivalent.
    CheckEquiv { a: PathBuf, b: PathBuf },
    /// Bring a simplex into normalized form.
    Normalize {
        file: PathBuf,
        /// `auto` or comma-separated 0-based row indices.
        #[arg(long, default_value = "auto")]
        base: String,
    },
    /// Re-check an atlas file.
    Verify { atlas: PathBuf },
    /// Count records per (Δ, n, family).
    Stats { atlas: PathBuf },
    /// Solve the corner problem of a normalized system.
    Corner { file: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Enumerate {
            delta,
            dim,
            family,
            up_to,
            verify,
            out,
        } => cmd_enumerate(delta, dim, family, up_to, verify, out.as_deref()),
        Command::CheckEquiv { a, b } => cmd_check_equiv(&a, &b),
        Command::Normalize { file, base } => cmd_normalize(&file, &base),
        Command::Verify { atlas } => cmd_verify(&atlas),
        Command::Stats { atlas } => cmd_stats(&atlas),
        Command::Corner { file } => cmd_corner(&file),
    }
}

fn read_doc(path: &Path) -> Result<InputDoc> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_input(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_atlas(path: &Path) -> Result<Vec<AtlasRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_atlas(BufReader::new(file))?)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

fn report_issues(report: &VerifyReport) {
    for issue in &report.issues {
        match &issue.provenance {
            Some(p) => eprintln!("FAIL {} [{}]: {}", issue.key, p, issue.problem),
            None => eprintln!("FAIL {}: {}", issue.key, issue.problem),
        }
    }
}

fn cmd_enumerate(
    delta: u64,
    dim: usize,
    family: FamilyArg,
    up_to: bool,
    verify: bool,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let family = match family {
        FamilyArg::Empty => FamilySelection::Empty,
        FamilyArg::Lattice => FamilySelection::Lattice,
        FamilyArg::Both => FamilySelection::Both,
    };
    let start = Instant::now();
    let records = build_atlas(&EnumerateOptions {
        delta,
        n: dim,
        family,
        up_to,
    })?;
    if verify {
        let report = verify_atlas(&records)?;
        if !report.passed() {
            report_issues(&report);
            return Ok(ExitCode::from(1));
        }
    }
    match out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_atlas(&records, BufWriter::new(file))
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => write_atlas(&records, io::stdout().lock())?,
    }
    let empty = records.iter().filter(|r| r.family == Family::Empty).count();
    eprintln!(
        "{} records ({} empty, {} lattice_empty) in {:.2?}",
        records.len(),
        empty,
        records.len() - empty,
        start.elapsed()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EquivalentOut {
    equivalent: bool,
    witness: MapDoc,
}

#[derive(Serialize)]
struct NotEquivalentOut {
    equivalent: bool,
    certificate: &'static str,
}

fn cmd_check_equiv(a: &Path, b: &Path) -> Result<ExitCode> {
    let s = read_doc(a)?.to_system();
    let t = read_doc(b)?.to_system();
    match check_equivalence(&s, &t)? {
        Verdict::Equivalent { witness } => {
            print_json(&EquivalentOut {
                equivalent: true,
                witness: MapDoc::from_map(&witness),
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Verdict::NotEquivalent { certificate } => {
            print_json(&NotEquivalentOut {
                equivalent: false,
                certificate: certificate.as_str(),
            })?;
            Ok(ExitCode::from(1))
        }
    }
}

#[derive(Serialize)]
struct NormalizeOut {
    normalized: NormalizedDoc,
    map: MapDoc,
    rows: Vec<usize>,
    canonical_key: String,
}

fn cmd_normalize(file: &Path, base: &str) -> Result<ExitCode> {
    let sys = read_doc(file)?.to_system();
    let result = if base == "auto" {
        normalize_auto(&sys)?
    } else {
        let rows = base
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| {
                format!("base {base:?} is neither `auto` nor a list of row indices")
            })?;
        normalize(&sys, &rows)?
    };
    print_json(&NormalizeOut {
        canonical_key: canonical_key(&result.system).to_string(),
        normalized: NormalizedDoc::from_normalized(&result.system),
        map: MapDoc::from_map(&result.map),
        rows: result.rows,
    })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(path: &Path) -> Result<ExitCode> {
    let records = load_atlas(path)?;
    let report = verify_atlas(&records)?;
    report_issues(&report);
    println!(
        "{} records checked, {} with the point-count oracle, {} issues",
        report.checked,
        report.oracle_checked,
        report.issues.len()
    );
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_stats(path: &Path) -> Result<ExitCode> {
    let records = load_atlas(path)?;
    let mut violated = false;
    println!("delta\tn\tfamily\tcount\tbound\tstatus");
    for row in atlas_stats(&records) {
        let (bound, status) = match (row.bound, row.within_bound) {
            (Some(b), Some(ok)) => {
                violated |= !ok;
                (format!("{b:.1}"), if ok { "ok" } else { "VIOLATED" })
            }
            _ => ("-".to_string(), "-"),
        };
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            row.delta, row.n, row.family, row.count, bound, status
        );
    }
    Ok(if violated {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct CornerOut {
    f_star: Int,
    witness: Vec<Int>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_star_excluding_vertex: Option<Int>,
}

fn cmd_corner(file: &Path) -> Result<ExitCode> {
    let InputDoc::Normalized(ns) = read_doc(file)? else {
        bail!("corner expects a normalized-v1 document");
    };
    let sol = corner_minimum(ns.h_matrix(), ns.h(), ns.c())?;
    let excluding = if ns.h().iter().all(|x| x.sign() == Sign::NoSign) {
        Some(Int(
            corner_minimum_excluding_vertex(ns.h_matrix(), ns.c())?.f_star
        ))
    } else {
        None
    };
    print_json(&CornerOut {
        f_star: Int(sol.f_star),
        witness: ints(&sol.witness_x),
        f_star_excluding_vertex: excluding,
    })?;
    Ok(ExitCode::SUCCESS)
}
