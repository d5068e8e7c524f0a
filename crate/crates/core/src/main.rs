use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use dyncorr::channels::{choi_state, parse_channel_file, ChannelFile};
use dyncorr::correlation::{
    error_probability, i_bar, is_maximally_correlated, reshuffle_unitarity_defect,
};
use dyncorr::experiments::{
    default_temperatures, distance_sweep, isolines, log_grid, p_error_grid, write_csv, RunManifest,
    SweepOptions, DEFAULT_T_BRACKET,
};
use dyncorr::lindblad::EvolutionConfig;
use dyncorr::models::{TwoAtomParams, ZZThermalParams};
use dyncorr::selftest;
use dyncorr::tolerance::{self, Tolerances};
use dyncorr::{ComplexMatrix, Error};

const DEFAULT_MANIFEST: &str = "dyncorr-manifest.json";

#[derive(Parser, Debug)]
#[command(
    name = "dyncorr",
    version,
    about = "Spatial correlations of bipartite quantum dynamics"
)]
struct Cli {
    /// JSON tolerance record; missing fields keep their defaults. Overrides
    /// the DYNCORR_TOLERANCE_PROFILE environment variable.
    #[arg(long, global = true, value_name = "FILE")]
    tolerances: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ī and entropies of a channel file.
    Measure {
        file: PathBuf,
        /// Expected local dimensions d_A,d_B; must match the file.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, default_value = DEFAULT_MANIFEST)]
        manifest: PathBuf,
    },
    /// Distance sweep of the two-atom model.
    TwoAtom(TwoAtomArgs),
    /// Constant-P_error isolines of the ZZ model in thermal baths.
    ZzThermal(ZzArgs),
    /// Whether a unitary channel is maximally correlated.
    VerifyUnitary {
        file: PathBuf,
        #[arg(long, default_value = DEFAULT_MANIFEST)]
        manifest: PathBuf,
    },
    /// Runs the embedded invariant suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = DEFAULT_MANIFEST)]
        manifest: PathBuf,
    },
}

#[derive(Args, Debug)]
struct TwoAtomArgs {
    /// Interatomic distances, units of 1/ω.
    #[arg(long = "r", value_delimiter = ',', num_args = 1.., required = true)]
    r: Vec<f64>,
    /// Time grid bounds and size, units of 1/γ₀ (log spacing).
    #[arg(long, default_value_t = 1e-3)]
    t_min: f64,
    #[arg(long, default_value_t = 50.0)]
    t_max: f64,
    #[arg(long, default_value_t = 200)]
    t_points: usize,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 2.0)]
    dipole: f64,
    /// Output directory for the CSV files and the manifest.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct ZzArgs {
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    #[arg(long, default_value_t = 4.0 / 3.0)]
    gamma0: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0.1")]
    target_p_error: Vec<f64>,
    /// Temperatures in units of ω; defaults to 12 log-spaced values in [0.05, 5].
    #[arg(long = "T", value_delimiter = ',', num_args = 1..)]
    temperatures: Option<Vec<f64>>,
    /// Isoline search window, units of 1/γ₀.
    #[arg(long, default_value_t = DEFAULT_T_BRACKET.0)]
    t_min: f64,
    #[arg(long, default_value_t = DEFAULT_T_BRACKET.1)]
    t_max: f64,
    /// Time points per temperature in the P_error grid.
    #[arg(long, default_value_t = 40)]
    grid_points: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

/// A failed command: the message for standard error and the exit code.
struct Failure {
    code: u8,
    error: Error,
}

impl Failure {
    fn with_note(self, note: String) -> Self {
        Self {
            code: self.code,
            error: self.error.context(note),
        }
    }
}

type CmdResult = std::result::Result<ExitCode, Failure>;

fn fail(code: u8) -> impl FnOnce(Error) -> Failure {
    move |error| Failure { code, error }
}

/// Exit code for errors met while reading and checking a channel file.
fn input_code(e: &Error) -> u8 {
    match e.root() {
        Error::Parse(_) | Error::Json(_) | Error::Io(_) => 2,
        Error::NotUnitary { .. } | Error::NotTracePreserving { .. } => 3,
        Error::DimensionMismatch(_)
        | Error::BadDimension(_)
        | Error::AsymmetricDimensions { .. } => 4,
        _ => 1,
    }
}

/// Exit code for errors met while running a sweep.
fn sweep_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) => 1,
        Error::BracketFailure { .. } | Error::NotMonotone { .. } => 6,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        _ => 5,
    }
}

fn install_tolerances(path: Option<&Path>) -> dyncorr::Result<()> {
    let tol = match path {
        Some(p) => Tolerances::from_json(&fs::read_to_string(p)?)?,
        None => Tolerances::from_env()?,
    };
    tolerance::install(tol)
}

fn load_channel(path: &Path) -> std::result::Result<ChannelFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(e).context(format!("reading {}", path.display())))
        .map_err(fail(2))?;
    parse_channel_file(&text)
        .map_err(|e| e.context(path.display().to_string()))
        .map_err(|e| Failure {
            code: input_code(&e),
            error: e,
        })
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serialisable")
    );
}

fn write_manifest(manifest: &RunManifest, path: &Path) -> std::result::Result<(), Failure> {
    manifest
        .write(path)
        .map_err(|e| e.context(format!("writing manifest {}", path.display())))
        .map_err(fail(1))?;
    info!("manifest written to {}", path.display());
    Ok(())
}

fn cmd_measure(file: &Path, dims: Option<&[usize]>, manifest_path: &Path) -> CmdResult {
    let cf = load_channel(file)?;
    if let Some(d) = dims {
        if d.len() != 2 {
            return Err(fail(1)(Error::Config(format!(
                "--dims takes two values d_A,d_B, got {}",
                d.len()
            ))));
        }
        if (d[0], d[1]) != cf.dims {
            return Err(Failure {
                code: 4,
                error: Error::DimensionMismatch(format!(
                    "--dims {},{} but the file declares {},{}",
                    d[0], d[1], cf.dims.0, cf.dims.1
                )),
            });
        }
    }
    let to_failure = |e: Error| Failure {
        code: input_code(&e),
        error: e,
    };
    let choi = choi_state(&cf.channel, cf.dims.0, cf.dims.1).map_err(to_failure)?;
    let report = i_bar(&choi).map_err(to_failure)?;
    let p_error = error_probability(&choi).map_err(to_failure)?;
    let mut out = serde_json::to_value(report).expect("serialisable");
    out["p_error"] = json!(p_error);
    out["dims"] = json!([cf.dims.0, cf.dims.1]);

    let mut m = RunManifest::new(
        "measure",
        json!({ "file": file, "dims": [cf.dims.0, cf.dims.1] }),
    );
    m.add_input(file).map_err(fail(2))?;
    write_manifest(&m, manifest_path)?;
    print_json(&out);
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_unitary(file: &Path, manifest_path: &Path) -> CmdResult {
    let cf = load_channel(file)?;
    let ops = cf.channel.kraus_operators();
    let u: ComplexMatrix = match ops.as_slice() {
        [single] => single.clone(),
        _ => {
            return Err(Failure {
                code: 3,
                error: Error::NotUnitary {
                    defect: f64::INFINITY,
                },
            }
            .with_note(format!(
                "{} Kraus operators; a unitary map has one",
                ops.len()
            )))
        }
    };
    let to_failure = |e: Error| Failure {
        code: input_code(&e),
        error: e,
    };
    let (d_a, d_b) = cf.dims;
    if d_a != d_b {
        return Err(to_failure(Error::AsymmetricDimensions { d_a, d_b }));
    }
    let maximal = is_maximally_correlated(&u, d_a, None).map_err(to_failure)?;
    let defect = reshuffle_unitarity_defect(&u, d_a).map_err(to_failure)?;
    let choi = choi_state(&cf.channel, d_a, d_b).map_err(to_failure)?;
    let value = i_bar(&choi).map_err(to_failure)?.i_bar;

    let mut m = RunManifest::new(
        "verify-unitary",
        json!({ "file": file, "dims": [d_a, d_b] }),
    );
    m.add_input(file).map_err(fail(2))?;
    write_manifest(&m, manifest_path)?;
    print_json(&json!({
        "maximally_correlated": maximal,
        "i_bar": value,
        "reshuffle_unitarity_defect": defect,
    }));
    Ok(if maximal {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(10)
    })
}

fn sweep_failure(e: Error) -> Failure {
    Failure {
        code: sweep_code(&e),
        error: e,
    }
}

fn cmd_two_atom(a: &TwoAtomArgs) -> CmdResult {
    let template = TwoAtomParams {
        omega: a.omega,
        dipole_norm: a.dipole,
        r: 0.0,
        theta: a.theta,
    };
    template.validate().map_err(fail(1))?;
    let grid = log_grid(a.t_min, a.t_max, a.t_points).map_err(fail(1))?;
    let opts = SweepOptions {
        evolution: EvolutionConfig::default(),
        workers: a.workers,
    };
    fs::create_dir_all(&a.out).map_err(|e| fail(1)(e.into()))?;
    info!(
        "two-atom sweep over {} distances, {} times",
        a.r.len(),
        grid.len()
    );
    let sweep = distance_sweep(&a.r, &grid, &template, &opts).map_err(sweep_failure)?;

    let traces = a.out.join("two_atom_traces.csv");
    let maxima = a.out.join("two_atom_maxima.csv");
    write_csv(&sweep.traces, &traces).map_err(fail(1))?;
    write_csv(&sweep.maxima, &maxima).map_err(fail(1))?;
    for w in &sweep.warnings {
        warn!("{w}");
    }
    let mut m = RunManifest::new(
        "two-atom",
        json!({
            "r": a.r,
            "time_grid_gamma0_units": { "min": a.t_min, "max": a.t_max, "points": a.t_points, "spacing": "log" },
            "model": template,
            "gamma0": template.gamma0(),
            "evolution": opts.evolution,
            "workers": a.workers,
        }),
    );
    m.warnings = sweep.warnings.clone();
    m.add_output(&traces).map_err(fail(1))?;
    m.add_output(&maxima).map_err(fail(1))?;
    write_manifest(&m, &a.out.join("manifest.json"))?;
    print_json(&json!({ "traces": traces, "maxima": maxima, "warnings": sweep.warnings }));
    Ok(ExitCode::SUCCESS)
}

fn cmd_zz_thermal(a: &ZzArgs) -> CmdResult {
    for &t in &a.target_p_error {
        if !(t > 0.0 && t < 1.0) {
            return Err(fail(1)(Error::Config(format!(
                "--target-p-error values must lie in (0, 1), got {t}"
            ))));
        }
    }
    let template = ZZThermalParams {
        omega: a.omega,
        j: a.j,
        gamma0: a.gamma0,
        temperature: 0.0,
        include_local_hamiltonian: false,
    };
    template.validate().map_err(fail(1))?;
    if a.grid_points < 2 {
        return Err(fail(1)(Error::Config(
            "--grid-points must be at least 2".into(),
        )));
    }
    let temperatures = a.temperatures.clone().unwrap_or_else(default_temperatures);
    let bracket = (a.t_min, a.t_max);
    let opts = SweepOptions {
        evolution: EvolutionConfig::default(),
        workers: a.workers,
    };
    fs::create_dir_all(&a.out).map_err(|e| fail(1)(e.into()))?;
    info!(
        "isolines for {} targets at {} temperatures",
        a.target_p_error.len(),
        temperatures.len()
    );
    let lines = isolines(&template, &a.target_p_error, &temperatures, bracket, &opts)
        .map_err(sweep_failure)?;

    // the grid stops a little past the slowest isoline, where P_error still
    // rises monotonically in t
    let t_top = lines
        .iter()
        .filter_map(|r| r.param("gamma0_t"))
        .fold(0.0, f64::max)
        * 1.2;
    let grid_times =
        log_grid(bracket.0.min(t_top / 10.0), t_top, a.grid_points).map_err(fail(1))?;
    let grid = p_error_grid(&template, &temperatures, &grid_times, &opts).map_err(sweep_failure)?;

    let lines_path = a.out.join("zz_isolines.csv");
    let grid_path = a.out.join("zz_p_error_grid.csv");
    write_csv(&lines, &lines_path).map_err(fail(1))?;
    write_csv(&grid, &grid_path).map_err(fail(1))?;
    let mut m = RunManifest::new(
        "zz-thermal",
        json!({
            "model": template,
            "target_p_error": a.target_p_error,
            "T": temperatures,
            "t_bracket_gamma0_units": [bracket.0, bracket.1],
            "grid_gamma0_t": { "min": grid_times[0], "max": t_top, "points": a.grid_points, "spacing": "log" },
            "evolution": opts.evolution,
            "workers": a.workers,
        }),
    );
    m.add_output(&lines_path).map_err(fail(1))?;
    m.add_output(&grid_path).map_err(fail(1))?;
    write_manifest(&m, &a.out.join("manifest.json"))?;
    print_json(&json!({ "isolines": lines_path, "p_error_grid": grid_path }));
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(seed: u64, manifest_path: &Path) -> CmdResult {
    let report = selftest::run(seed).map_err(fail(20))?;
    print!("{}", report.table());
    let mut m = RunManifest::new("selftest", json!({ "seed": seed }));
    let failures = report.failures();
    m.warnings = failures.iter().map(|f| format!("failed: {f}")).collect();
    write_manifest(&m, manifest_path)?;
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in failures {
            eprintln!("selftest failed: {f}");
        }
        Ok(ExitCode::from(20))
    }
}

fn run(cli: Cli) -> CmdResult {
    install_tolerances(cli.tolerances.as_deref()).map_err(fail(1))?;
    match &cli.command {
        Command::Measure {
            file,
            dims,
            manifest,
        } => cmd_measure(file, dims.as_deref(), manifest),
        Command::TwoAtom(a) => cmd_two_atom(a),
        Command::ZzThermal(a) => cmd_zz_thermal(a),
        Command::VerifyUnitary { file, manifest } => cmd_verify_unitary(file, manifest),
        Command::Selftest { seed, manifest } => cmd_selftest(*seed, manifest),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure { code, error }) => {
            eprintln!("error: {error}");
            ExitCode::from(code)
        }
    }
}
