//! Command-line surface: design, verify, eval, sweep, compare.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use retarder_forge::analysis::{self, DEFAULT_THRESHOLDS};
use retarder_forge::designer::{self, Branch};
use retarder_forge::jones::{Angle, PhaseShift};
use retarder_forge::sequences::{Family, SequenceFile, SequenceSpec, Target};
use retarder_forge::table;

const EXIT_USAGE: u8 = 2;
const EXIT_NO_SOLUTION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "retarder-forge",
    version,
    about = "Broadband composite polarization retarder design and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Re,
    Im,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TargetSignArg {
    Plus,
    Minus,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the derivative-nullification system for a family and plate count
    Design {
        /// Design family: a, b, c, or d
        family: String,
        /// Number of plates
        n: usize,
        /// Number of random solver starts (shared across sign/branch combinations)
        #[arg(long, default_value_t = 200)]
        starts: usize,
        /// RNG seed for start points
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Which part of the final half-counted derivative to nullify
        #[arg(long, value_enum, default_value_t = BranchArg::Both)]
        branch: BranchArg,
        /// Quarter-wave target sign J0(+π/2) or J0(−π/2) (families b, d)
        #[arg(long, value_enum, default_value_t = TargetSignArg::Both)]
        target_sign: TargetSignArg,
        /// Write the solution JSON here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a table of angle sets against its design conditions
    Verify {
        /// JSON file: either one sequence object or an array of table rows
        file: PathBuf,
    },
    /// Evaluate one sequence at a single phase shift
    Eval {
        #[command(flatten)]
        source: SequenceSource,
        /// Phase shift in units of π
        #[arg(long, default_value_t = 1.0)]
        phi: f64,
    },
    /// Fidelity-vs-φ sweep as CSV
    Sweep {
        #[command(flatten)]
        source: SequenceSource,
        /// Sweep start, in units of π
        #[arg(long, default_value_t = 0.0)]
        min: f64,
        /// Sweep end, in units of π
        #[arg(long, default_value_t = 2.0)]
        max: f64,
        /// Number of φ samples
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        /// Append a λ/λ₀ = π/φ column
        #[arg(long)]
        wavelength: bool,
        /// Write CSV here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bandwidth table for several sequence files
    Compare {
        /// Sequence JSON files
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Fidelity thresholds
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        thresholds: Option<Vec<f64>>,
        /// Write CSV here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SequenceSource {
    /// Sequence JSON file {family, target, angles_deg}
    #[arg(conflicts_with = "angles")]
    file: Option<PathBuf>,
    /// Inline angle list in degrees, e.g. --angles 0,69.3,318.6,69.3
    #[arg(long, value_delimiter = ',', num_args = 1.., requires = "family")]
    angles: Option<Vec<f64>>,
    /// Family for --angles
    #[arg(long)]
    family: Option<String>,
    /// Target for --angles: half, quarter_plus, quarter_minus
    #[arg(long)]
    target: Option<String>,
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

impl SequenceSource {
    fn load(&self) -> Result<(String, SequenceSpec<f64>), String> {
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let sf: SequenceFile =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let seq = sf.to_sequence().map_err(|e| e.to_string())?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sequence".into());
            Ok((label, seq))
        } else if let Some(angles) = &self.angles {
            let family: Family = self
                .family
                .as_deref()
                .ok_or("--angles requires --family")?
                .parse()
                .map_err(|e: retarder_forge::sequences::SequenceError| e.to_string())?;
            let sf = SequenceFile {
                family,
                target: match &self.target {
                    Some(t) => {
                        Some(t.parse::<Target>().map_err(|e| e.to_string())?)
                    }
                    None => None,
                },
                angles_deg: angles.clone(),
            };
            let seq = sf.to_sequence().map_err(|e| e.to_string())?;
            Ok((format!("{family}{}", angles.len()), seq))
        } else {
            Err("provide a sequence file or --family/--angles".into())
        }
    }
}

fn write_or_print(output: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("RETARDER_FORGE_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Design { family, n, starts, seed, branch, target_sign, output } => {
            cmd_design(&family, n, starts, seed, branch, target_sign, &output)
        }
        Command::Verify { file } => cmd_verify(&file),
        Command::Eval { source, phi } => cmd_eval(&source, phi),
        Command::Sweep { source, min, max, samples, wavelength, output } => {
            cmd_sweep(&source, min, max, samples, wavelength, &output)
        }
        Command::Compare { files, thresholds, output } => cmd_compare(&files, thresholds, &output),
    }
}

fn cmd_design(
    family: &str,
    n: usize,
    starts: usize,
    seed: u64,
    branch: BranchArg,
    target_sign: TargetSignArg,
    output: &Option<PathBuf>,
) -> ExitCode {
    let family: Family = match family.parse() {
        Ok(f) => f,
        Err(e) => return usage_error(e),
    };
    if starts == 0 {
        return usage_error("--starts must be at least 1");
    }
    let mut problem = match designer::assemble_problem(family, n) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    match target_sign {
        TargetSignArg::Plus => problem.targets.retain(|t| *t != Target::QuarterMinus),
        TargetSignArg::Minus if problem.targets.contains(&Target::QuarterMinus) => {
            problem.targets.retain(|t| *t == Target::QuarterMinus)
        }
        _ => {}
    }
    let mut solutions = designer::solve(&problem, starts, seed);
    match branch {
        BranchArg::Re => solutions.retain(|s| s.branch != Some(Branch::Im)),
        BranchArg::Im => solutions.retain(|s| s.branch != Some(Branch::Re)),
        BranchArg::Both => {}
    }
    if solutions.is_empty() {
        eprintln!("no solution converged for family {family} N={n} with {starts} starts");
        return ExitCode::from(EXIT_NO_SOLUTION);
    }
    let mut json = serde_json::to_string_pretty(&solutions).expect("solutions serialize");
    json.push('\n');
    match write_or_print(output, &json) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage_error(e),
    }
}

fn cmd_verify(file: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return usage_error(format!("cannot read {}: {e}", file.display())),
    };
    // accept either a row array (like the bundled table) or one sequence file
    let rows: Vec<table::TableRow> = match serde_json::from_str(&text) {
        Ok(rows) => rows,
        Err(_) => match serde_json::from_str::<SequenceFile>(&text) {
            Ok(sf) => vec![table::TableRow {
                family: sf.family,
                n: sf.angles_deg.len(),
                target: sf.target.unwrap_or(Target::Half),
                angles_deg: sf.angles_deg,
            }],
            Err(e) => return usage_error(format!("{}: {e}", file.display())),
        },
    };
    if rows.is_empty() {
        return usage_error("no rows to verify");
    }
    let mut all_ok = true;
    println!("row   fidelity(pi)  residual_norm  worst_derivative  status");
    for row in &rows {
        let angles: Vec<Angle<f64>> =
            row.angles_deg.iter().map(|&d| Angle::from_degrees(d)).collect();
        match designer::verify_angles(row.family, &angles) {
            Ok(sol) => {
                let worst =
                    sol.derivative_profile.iter().cloned().fold(0.0f64, f64::max);
                let ok = sol.fidelity_at_pi >= 0.999 && worst <= 5e-3;
                all_ok &= ok;
                println!(
                    "{:<5} {:<13.6} {:<14.3e} {:<17.3e} {}",
                    row.label(),
                    sol.fidelity_at_pi,
                    sol.residual_norm,
                    worst,
                    if ok { "ok" } else { "FAIL" }
                );
            }
            Err(e) => return usage_error(e),
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_eval(source: &SequenceSource, phi_over_pi: f64) -> ExitCode {
    let (label, seq) = match source.load() {
        Ok(v) => v,
        Err(e) => return usage_error(e),
    };
    if !phi_over_pi.is_finite() {
        return usage_error("--phi must be finite");
    }
    let phi = PhaseShift(phi_over_pi * std::f64::consts::PI);
    let m = retarder_forge::sequences::sequence_matrix(&seq, phi);
    let f = match analysis::fidelity(&m, seq.target) {
        Ok(f) => f,
        Err(e) => return usage_error(e),
    };
    println!("sequence: {label}");
    println!("phi/pi:   {phi_over_pi}");
    println!("J = [[{:.6}, {:.6}],", m.m11, m.m12);
    println!("     [{:.6}, {:.6}]]", m.m21, m.m22);
    println!("fidelity: {f:.12}");
    if seq.family != Family::Custom {
        let angles: Vec<Angle<f64>> = seq.plates.iter().map(|p| p.theta).collect();
        if let Ok(sol) = designer::verify_angles(seq.family, &angles) {
            println!("residual_norm:      {:.6e}", sol.residual_norm);
            println!(
                "derivative_profile: [{}]",
                sol.derivative_profile
                    .iter()
                    .map(|v| format!("{v:.3e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
    }
    ExitCode::SUCCESS
}

fn cmd_sweep(
    source: &SequenceSource,
    min: f64,
    max: f64,
    samples: usize,
    wavelength: bool,
    output: &Option<PathBuf>,
) -> ExitCode {
    let (_, seq) = match source.load() {
        Ok(v) => v,
        Err(e) => return usage_error(e),
    };
    let result = match analysis::sweep(
        &seq,
        PhaseShift(min * std::f64::consts::PI),
        PhaseShift(max * std::f64::consts::PI),
        samples,
    ) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let csv = analysis::sweep_to_csv(&result, wavelength);
    match write_or_print(output, &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage_error(e),
    }
}

fn cmd_compare(
    files: &[PathBuf],
    thresholds: Option<Vec<f64>>,
    output: &Option<PathBuf>,
) -> ExitCode {
    let mut seqs = Vec::new();
    for path in files {
        let source = SequenceSource {
            file: Some(path.clone()),
            angles: None,
            family: None,
            target: None,
        };
        match source.load() {
            Ok(pair) => seqs.push(pair),
            Err(e) => return usage_error(e),
        }
    }
    let thresholds = thresholds.unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec());
    let rows = match analysis::compare(&seqs, &thresholds) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let csv = analysis::compare_to_csv(&rows);
    match write_or_print(output, &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage_error(e),
    }
}
