use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shor_nmr::compiler::compile_to_pulses;
use shor_nmr::molecule::{load_molecule, sample_molecule, sample_molecule_text};
use shor_nmr::pipeline::{algorithm_circuit, binned, reference_spectra, run_shor_with, spectrum_csv, Artifact};
use shor_nmr::postproc::FactorStatus;
use shor_nmr::prep::PrepMode;
use shor_nmr::spinsys::MoleculeSpec;
use shor_nmr::{Level, RunConfig};

#[derive(Parser)]
#[command(name = "shor-nmr", version, about = "Simulate order finding for N = 15 on a seven-spin NMR register")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write a summary, spectra and dumps.
    Run(RunArgs),
    /// Print the gate list for a base.
    DumpCircuit {
        #[arg(long)]
        a: u64,
        /// Apply the peephole optimizer for the |0000001> input.
        #[arg(long)]
        optimized: bool,
    },
    /// Print the compiled pulse program for a base.
    DumpPulses {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        molecule: Option<PathBuf>,
    },
    /// Write reference spectra of every spin.
    Spectra {
        #[arg(long, value_enum)]
        state: RefState,
        #[arg(long)]
        molecule: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the built-in sample molecule file.
    SampleMolecule,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    a: u64,
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    decoherence: Switch,
    #[arg(long, value_enum, default_value_t = LevelArg::Gate)]
    level: LevelArg,
    #[arg(long)]
    molecule: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = PrepArg::Ideal)]
    prep: PrepArg,
    /// Multiply every T2 by this factor.
    #[arg(long, default_value_t = 1.0)]
    t2_scale: f64,
    /// Acquisition time per spectrum in seconds.
    #[arg(long, default_value_t = 1.0)]
    acq_duration: f64,
    /// Skip the peephole optimizer.
    #[arg(long)]
    unoptimized: bool,
    /// Simulate with chemical shifts evolving (refocused by the compiler).
    #[arg(long)]
    off_resonance: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write binned spectra for plotting.
    #[arg(long)]
    plot_data: bool,
    /// Write the pulse program (pulse level only).
    #[arg(long)]
    dump_pulses: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Gate,
    Pulse,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrepArg {
    Ideal,
    Simulated,
    PulseLowered,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefState {
    Thermal,
    Pure,
}

const PLOT_BINS: usize = 512;

type CliResult<T> = Result<T, String>;

fn molecule(path: Option<&Path>) -> CliResult<MoleculeSpec> {
    match path {
        Some(p) => load_molecule(p).map_err(|e| e.to_string()),
        None => Ok(sample_molecule()),
    }
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn config(args: &RunArgs) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::new(args.a, molecule(args.molecule.as_deref())?);
    cfg.decoherence = matches!(args.decoherence, Switch::On);
    cfg.level = match args.level {
        LevelArg::Gate => Level::Gate,
        LevelArg::Pulse => Level::Pulse,
    };
    cfg.prep = match args.prep {
        PrepArg::Ideal => PrepMode::Ideal,
        PrepArg::Simulated => PrepMode::Simulated,
        PrepArg::PulseLowered => PrepMode::PulseLowered,
    };
    cfg.t2_scale = args.t2_scale;
    cfg.acquisition.duration_s = args.acq_duration;
    cfg.optimize = !args.unoptimized;
    cfg.off_resonance = args.off_resonance;
    cfg.seed = args.seed;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn run(args: &RunArgs) -> CliResult<bool> {
    let cfg = config(args)?;
    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let start = Instant::now();
    let mut io_error = None;
    let result = run_shor_with(&cfg, &mut |artifact| {
        let res = match artifact {
            Artifact::Circuit(c) => write(&out.join("circuit.txt"), &c.to_text()),
            Artifact::Pulses(p) if args.dump_pulses => write(&out.join("pulses.txt"), &p.to_text()),
            Artifact::Pulses(_) => Ok(()),
            Artifact::Spectrum(sp) => {
                let q = sp.spin + 1;
                write(&out.join(format!("spectrum_q{q}.csv")), &spectrum_csv(sp)).and_then(|_| {
                    if !args.plot_data {
                        return Ok(());
                    }
                    let mut s = String::from("freq_hz,real,imag\n");
                    for (f, re, im) in binned(sp, PLOT_BINS) {
                        s.push_str(&format!("{f},{re},{im}\n"));
                    }
                    write(&out.join(format!("plot_q{q}.csv")), &s)
                })
            }
        };
        if let Err(e) = res {
            io_error.get_or_insert(e);
        }
        Ok(())
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let output = result.map_err(|e| e.to_string())?;
    let wall = start.elapsed().as_secs_f64();
    let summary = serde_json::to_string_pretty(&output.summary).map_err(|e| e.to_string())?;
    write(&out.join("summary.json"), &(summary + "\n"))?;
    let timing = serde_json::json!({ "wall_time_s": wall, "threads": available_threads() });
    write(&out.join("timing.json"), &(timing.to_string() + "\n"))?;

    let s = &output.summary;
    for q in &s.qubits {
        println!("qubit {}: s = {:+.4} ({:?})", q.qubit, q.s, q.class);
    }
    println!("y support: {:?}", s.y_support);
    match s.r {
        Some(r) => println!("period r = {r}"),
        None => println!("period: none"),
    }
    if s.status == FactorStatus::Success {
        println!("factors: {:?}", s.factors);
    } else {
        println!("no factors: {}", s.message);
    }
    if let Some(rep) = &output.optimization {
        for line in rep.describe() {
            println!("  optimized {line}");
        }
    }
    if s.level == Level::Pulse {
        println!("sequence: {} pulses, {:.1} ms", s.n_pulses, s.total_duration_s * 1e3);
    }
    println!("wall time {wall:.2} s, outputs in {}", out.display());
    Ok(s.status == FactorStatus::Success)
}

fn available_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Run(args) => run(&args),
        Command::DumpCircuit { a, optimized } => {
            let (c, _) = algorithm_circuit(a, optimized).map_err(|e| e.to_string())?;
            print!("{}", c.to_text());
            Ok(true)
        }
        Command::DumpPulses { a, molecule: path } => {
            let mol = molecule(path.as_deref())?;
            // three-qubit gates have no pulse lowering, so the optimized circuit is required
            let (c, _) = algorithm_circuit(a, true).map_err(|e| e.to_string())?;
            let p = compile_to_pulses(&c, &mol, false).map_err(|e| e.to_string())?;
            print!("{}", p.to_text());
            Ok(true)
        }
        Command::Spectra { state, molecule: path, out } => {
            let cfg = RunConfig::new(7, molecule(path.as_deref())?);
            let pure = matches!(state, RefState::Pure);
            let spectra = reference_spectra(&cfg, pure).map_err(|e| e.to_string())?;
            fs::create_dir_all(&out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
            let tag = if pure { "pure" } else { "thermal" };
            for sp in &spectra {
                let path = out.join(format!("{tag}_spin{}.csv", sp.spin + 1));
                write(&path, &spectrum_csv(sp))?;
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::SampleMolecule => {
            print!("{}", sample_molecule_text());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
