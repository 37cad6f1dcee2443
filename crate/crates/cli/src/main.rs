use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photon_cartan::cartan::DofConvention;
use photon_cartan::circuit::OpticalCircuit;
use photon_cartan::compiler::{compile, compile_m4, CompileOptions, Target};
use photon_cartan::matrix::{haar_random_unitary, ComplexMatrix, ToleranceConfig};
use photon_cartan::simulator::{simulate, verify};
use photon_cartan::Error;

const VERIFY_FAILED: u8 = 1;
const BAD_INPUT: u8 = 2;
const NUMERICAL: u8 = 3;

/// Compile single-photon unitaries into PBS / wave-plate / phase-shifter circuits.
#[derive(Parser)]
#[command(name = "photon-cartan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a 4×4 or 8×8 unitary into an optical circuit.
    Compile {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "sp")]
        convention: DofConvention,
        #[arg(long)]
        optimize: bool,
        /// Simulate the circuit and fail with exit code 1 on a mismatch.
        #[arg(long)]
        verify: bool,
        /// Reproduce the matrix exactly instead of up to a global phase.
        #[arg(long)]
        emit_phase_ps: bool,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the unitary realized by a circuit.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a circuit with a matrix up to global phase.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Emit a built-in target matrix (walk or qft).
    Target {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "ps")]
        convention: DofConvention,
        /// Also compile and optimize it.
        #[arg(long)]
        compile: bool,
    },
    /// Emit a Haar-random unitary, deterministic per seed.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command: exit code and message.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => NUMERICAL,
            _ => BAD_INPUT,
        };
        Failure(code, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure(BAD_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure(BAD_INPUT, format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn tolerances(t: f64) -> Result<ToleranceConfig, Failure> {
    Ok(ToleranceConfig::with_equivalence(t)?)
}

fn compile_any(
    u: &ComplexMatrix,
    opts: &CompileOptions,
) -> Result<photon_cartan::compiler::Compilation, Failure> {
    Ok(match u.dim() {
        8 => compile_m4(u, opts)?,
        _ => compile(u, opts)?,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile {
            matrix,
            convention,
            optimize,
            verify,
            emit_phase_ps,
            tolerance,
            out,
        } => {
            let u = ComplexMatrix::from_json(&read(&matrix)?)?;
            let opts = CompileOptions {
                convention,
                optimize,
                verify,
                tolerances: tolerances(tolerance)?,
                emit_global_phase_ps: emit_phase_ps,
            };
            let c = compile_any(&u, &opts)?;
            emit(&c.circuit.serialize(), out.as_deref())?;
            eprintln!("{}", c.circuit.element_count());
            if let Some(r) = c.report {
                eprintln!(
                    "verification {}: distance {:.3e}, global phase {:.6}",
                    if r.passed { "passed" } else { "FAILED" },
                    r.distance,
                    r.global_phase
                );
                if !r.passed {
                    return Err(Failure(
                        VERIFY_FAILED,
                        "circuit does not match the matrix".into(),
                    ));
                }
            }
            Ok(())
        }
        Command::Simulate { circuit, out } => {
            let c = OpticalCircuit::deserialize(&read(&circuit)?)?;
            emit(&simulate(&c)?.to_json(), out.as_deref())
        }
        Command::Verify {
            circuit,
            matrix,
            tolerance,
        } => {
            let c = OpticalCircuit::deserialize(&read(&circuit)?)?;
            let u = ComplexMatrix::from_json(&read(&matrix)?)?;
            let r = verify(&c, &u, &tolerances(tolerance)?)?;
            let text = serde_json::to_string_pretty(&r).expect("report JSON is infallible");
            emit(&text, None)?;
            if r.passed {
                Ok(())
            } else {
                Err(Failure(
                    VERIFY_FAILED,
                    format!("distance {:.3e} exceeds {tolerance:e}", r.distance),
                ))
            }
        }
        Command::Target {
            name,
            convention,
            compile,
        } => {
            let target: Target = name.parse()?;
            let u = target.matrix();
            if !compile {
                return emit(&u.to_json(), None);
            }
            let c = compile_any(&u, &CompileOptions::new(convention).optimized())?;
            let report = c.report.expect("verification requested");
            let doc = serde_json::json!({
                "matrix": serde_json::from_str::<serde_json::Value>(&u.to_json()).expect("valid JSON"),
                "circuit": serde_json::from_str::<serde_json::Value>(&c.circuit.serialize()).expect("valid JSON"),
                "verification": report,
            });
            emit(
                &serde_json::to_string_pretty(&doc).expect("valid JSON"),
                None,
            )?;
            eprintln!(
                "{target} ({convention}): {} elements after optimization; hand-optimized reference {}",
                c.circuit.len(),
                target.hand_count(convention)
            );
            if report.passed {
                Ok(())
            } else {
                Err(Failure(
                    VERIFY_FAILED,
                    "compiled target does not verify".into(),
                ))
            }
        }
        Command::Random { dim, seed, out } => {
            if !matches!(dim, 4 | 8) {
                return Err(Failure(
                    BAD_INPUT,
                    format!("--dim must be 4 or 8, got {dim}"),
                ));
            }
            emit(&haar_random_unitary(dim, seed)?.to_json(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
