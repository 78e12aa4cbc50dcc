//! `epsense` command-line front end: QFI and noise sweeps, transmon
//! population curves, OpenQASM export and a SWAP-test demo.
//!
//! Exit codes: 0 success, 2 configuration error (bad flags, config file or
//! output path), 3 numerical failure.

mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use epsense_core::circuit::{stream_rng, swap_test, StateVector};
use epsense_core::dilation::dilate;
use epsense_core::hamiltonians::{transmon_populations, Level, ModelKind, Transmon};
use epsense_core::linalg::DEFAULT_TOL_DEFECTIVE;
use epsense_core::noise::{linspace, noise_sweep, ChannelFamily, GammaGrid};
use epsense_core::qasm::{swap_test_qasm, to_qasm};
use epsense_core::qfi::{qfi_sweep, QfiMethod, SweepSettings, DEFAULT_BURES_KAPPA, DEFAULT_STEP};
use epsense_core::{Error, Exec};

use output::{io_err, num};

/// Failure of a subcommand, mapped onto the exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::Unsupported(_) | Error::Dimension { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "epsense", version, about = "Exceptional-point sensing on a dilated qubit")]
struct Cli {
    /// Flat `key = value` file; explicit flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// QFI of the `+` eigenstate along a γ grid.
    #[command(args_override_self = true)]
    QfiSweep(QfiSweepArgs),
    /// Largest QFI near the EP as a noise parameter varies.
    #[command(args_override_self = true)]
    NoiseSweep(NoiseSweepArgs),
    /// Normalized e/f populations of the driven transmon sub-system.
    #[command(args_override_self = true)]
    Transmon(TransmonArgs),
    /// Write the dilated circuit (and optionally the SWAP test) as OpenQASM 2.0.
    #[command(args_override_self = true)]
    ExportQasm(ExportArgs),
    /// Estimate fidelities of three reference pairs with the SWAP test.
    #[command(args_override_self = true)]
    SwapDemo(SwapArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Model {
    Nh1,
    Nh2,
    Nh3,
}

#[derive(Args, Debug, Clone, Copy)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// NH2 loss rate ε.
    #[arg(long, default_value_t = 2.0)]
    eps: f64,
    /// NH2 coupling g.
    #[arg(long, default_value_t = 1.0)]
    g: f64,
}

impl ModelArgs {
    fn kind(&self) -> ModelKind {
        match self.model {
            Model::Nh1 => ModelKind::Nh1,
            Model::Nh2 => ModelKind::Nh2 { eps: self.eps, g: self.g },
            Model::Nh3 => ModelKind::Nh3,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    Biortho,
    Bures,
}

#[derive(Args, Debug)]
struct QfiSweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    gamma_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    gamma_max: f64,
    /// Number of grid points, at least 2.
    #[arg(long)]
    steps: usize,
    /// Finite-difference step δγ = h.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Method::Biortho)]
    method: Method,
    /// Calibration factor of the Bures route.
    #[arg(long, default_value_t = DEFAULT_BURES_KAPPA)]
    kappa: f64,
    #[arg(long, default_value_t = DEFAULT_TOL_DEFECTIVE)]
    tol_defective: f64,
    /// Drop grid points this close to a known EP.
    #[arg(long, default_value_t = 0.0)]
    exclude_radius: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a matplotlib script plotting log QFI against γ.
    #[arg(long, value_name = "FILE")]
    plot_script: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Channel {
    Ad,
    PauliX,
    PauliY,
    PauliZ,
    PauliEq,
}

impl Channel {
    fn family(self) -> ChannelFamily {
        match self {
            Channel::Ad => ChannelFamily::AmplitudeDamping,
            Channel::PauliX => ChannelFamily::PauliX,
            Channel::PauliY => ChannelFamily::PauliY,
            Channel::PauliZ => ChannelFamily::PauliZ,
            Channel::PauliEq => ChannelFamily::PauliEqual,
        }
    }
}

#[derive(Args, Debug)]
struct NoiseSweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    channel: Channel,
    /// Noise values, evenly spaced over [param-min, param-max].
    #[arg(long)]
    param_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    param_min: f64,
    #[arg(long, default_value_t = 1.0)]
    param_max: f64,
    /// γ offsets from the EP per side, log-spaced.
    #[arg(long, default_value_t = 40)]
    gamma_points: usize,
    #[arg(long, default_value_t = 1e-4)]
    min_offset: f64,
    #[arg(long, default_value_t = 1e-1)]
    max_offset: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a matplotlib script plotting max log QFI against the noise.
    #[arg(long, value_name = "FILE")]
    plot_script: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Init {
    E,
    F,
}

#[derive(Args, Debug)]
struct TransmonArgs {
    #[arg(long)]
    jtilde: f64,
    #[arg(long, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long)]
    gamma_e: f64,
    #[arg(long, allow_negative_numbers = true)]
    evx: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long)]
    steps: usize,
    /// Level the sub-system starts in.
    #[arg(long, value_enum, default_value_t = Init::E)]
    init: Init,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    plot_script: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    /// Evolution time t.
    #[arg(long, default_value_t = 1.0)]
    time: f64,
    /// Also write `swap_test.qasm`.
    #[arg(long)]
    swap_test: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SwapArgs {
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    match try_run(argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn try_run(argv: Vec<String>) -> Result<(), CliError> {
    let argv = config::merge(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 {
                Ok(())
            } else {
                Err(CliError::Config("invalid arguments".into()))
            };
        }
    };
    let exec = executor()?;
    match cli.command {
        Command::QfiSweep(a) => cmd_qfi_sweep(&a, exec),
        Command::NoiseSweep(a) => cmd_noise_sweep(&a, exec),
        Command::Transmon(a) => cmd_transmon(&a),
        Command::ExportQasm(a) => cmd_export(&a),
        Command::SwapDemo(a) => cmd_swap(&a),
    }
}

/// Reads `EPSENSE_THREADS`: unset or 0 means all cores, 1 means sequential.
fn executor() -> Result<Exec, CliError> {
    let n = match std::env::var("EPSENSE_THREADS") {
        Err(_) => 0,
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("EPSENSE_THREADS must be a count, got {v:?}")))?,
    };
    if n == 1 {
        return Ok(Exec::Sequential);
    }
    #[cfg(feature = "parallel")]
    if n > 1 {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(Exec::Parallel)
}

fn require(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

fn write_plot(
    script: Option<&Path>,
    csv: Option<&Path>,
    cols: (&str, &str),
    labels: (&str, &str),
) -> Result<(), CliError> {
    let Some(script) = script else {
        return Ok(());
    };
    let csv = csv.ok_or_else(|| CliError::Config("--plot-script needs --out".into()))?;
    let text = output::plot_script(csv, cols.0, cols.1, labels.0, labels.1);
    std::fs::write(script, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", script.display())))
}

fn cmd_qfi_sweep(a: &QfiSweepArgs, exec: Exec) -> Result<(), CliError> {
    require(a.steps >= 2, "--steps must be at least 2")?;
    require(a.gamma_max > a.gamma_min, "--gamma-max must exceed --gamma-min")?;
    require(a.delta > 0.0, "--delta must be positive")?;
    require(a.exclude_radius >= 0.0, "--exclude-radius must be non-negative")?;
    require(a.tol_defective > 0.0, "--tol-defective must be positive")?;
    let kind = a.model.kind();
    if matches!(kind, ModelKind::Nh1) {
        require(a.gamma_min - a.delta >= 0.0, "nh1 needs gamma-min - delta >= 0")?;
    }
    let settings = SweepSettings {
        method: match a.method {
            Method::Biortho => QfiMethod::BiorthoDeriv,
            Method::Bures => QfiMethod::BuresFd,
        },
        step: a.delta,
        tol_defective: a.tol_defective,
        kappa: a.kappa,
        exclude_radius: a.exclude_radius,
    };
    let grid = linspace(a.gamma_min, a.gamma_max, a.steps);
    let curve = qfi_sweep(kind, &grid, &settings, exec);

    for e in &curve.excluded {
        eprintln!("excluded gamma={}: {}", num(e.gamma), e.reason);
    }
    if let Some(out) = &a.out {
        if !curve.excluded.is_empty() {
            let mut w = output::open(Some(&output::sidecar(out)))?;
            writeln!(w, "gamma,reason").map_err(io_err)?;
            for e in &curve.excluded {
                writeln!(w, "{},\"{}\"", num(e.gamma), e.reason.replace('"', "\"\"")).map_err(io_err)?;
            }
            w.flush().map_err(io_err)?;
        }
    }
    if curve.samples.is_empty() {
        return Err(CliError::Numeric("every grid point was excluded".into()));
    }

    let mut w = output::open(a.out.as_deref())?;
    writeln!(w, "gamma,qfi_numeric,qfi_analytic,log_qfi").map_err(io_err)?;
    for (g, q, analytic, log_q) in curve.rows() {
        let analytic = analytic.map(num).unwrap_or_default();
        writeln!(w, "{},{},{},{}", num(g), num(q), analytic, num(log_q)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    write_plot(a.plot_script.as_deref(), a.out.as_deref(), ("gamma", "log_qfi"), ("gamma", "log QFI"))
}

fn cmd_noise_sweep(a: &NoiseSweepArgs, exec: Exec) -> Result<(), CliError> {
    require(a.param_steps >= 2, "--param-steps must be at least 2")?;
    require(
        0.0 <= a.param_min && a.param_min < a.param_max && a.param_max <= 1.0,
        "noise range must satisfy 0 <= param-min < param-max <= 1",
    )?;
    require(a.gamma_points >= 1, "--gamma-points must be at least 1")?;
    require(
        a.min_offset > 0.0 && a.max_offset >= a.min_offset,
        "offsets must satisfy 0 < min-offset <= max-offset",
    )?;
    let kind = a.model.kind();
    let mut gammas = GammaGrid::around_ep(kind);
    gammas.per_side = a.gamma_points;
    gammas.min_offset = a.min_offset;
    gammas.max_offset = a.max_offset;
    let grid = linspace(a.param_min, a.param_max, a.param_steps);
    let points = noise_sweep(kind, a.channel.family(), &grid, &gammas, exec)?;

    let mut w = output::open(a.out.as_deref())?;
    writeln!(w, "noise_param,max_log_qfi").map_err(io_err)?;
    for p in &points {
        for (g, reason) in &p.failures {
            eprintln!("skipped gamma={} at noise {}: {reason}", num(*g), num(p.noise_param));
        }
        writeln!(w, "{},{}", num(p.noise_param), num(p.max_log_qfi)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    write_plot(
        a.plot_script.as_deref(),
        a.out.as_deref(),
        ("noise_param", "max_log_qfi"),
        ("noise parameter", "max log QFI"),
    )
}

fn cmd_transmon(a: &TransmonArgs) -> Result<(), CliError> {
    require(a.steps >= 2, "--steps must be at least 2")?;
    require(a.t_max > 0.0, "--t-max must be positive")?;
    require(a.gamma_e >= 0.0, "--gamma-e must be non-negative")?;
    let model = Transmon {
        jtilde: a.jtilde,
        delta: a.delta,
        gamma_e: a.gamma_e,
        evx: a.evx,
    };
    if model.is_at_ep(1e-12) {
        eprintln!("note: parameters sit on the exceptional point");
    }
    let init = match a.init {
        Init::E => Level::E,
        Init::F => Level::F,
    };
    let mut w = output::open(a.out.as_deref())?;
    writeln!(w, "t,pe_norm,pf_norm").map_err(io_err)?;
    for t in linspace(0.0, a.t_max, a.steps) {
        let p = transmon_populations(&model, t, init)?;
        writeln!(w, "{},{},{}", num(t), num(p.pe_norm), num(p.pf_norm)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    write_plot(a.plot_script.as_deref(), a.out.as_deref(), ("t", "pe_norm"), ("t", "P_e"))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_export(a: &ExportArgs) -> Result<(), CliError> {
    require(a.time > 0.0, "--time must be positive")?;
    let kind = a.model.kind();
    let h = kind.at(a.gamma)?;
    let program = to_qasm(&dilate(&h, a.time)?)?;
    write_file(&a.out_dir.join(format!("{}.qasm", kind.name())), &program.text)?;
    if a.swap_test {
        write_file(&a.out_dir.join("swap_test.qasm"), &swap_test_qasm(2)?.text)?;
    }
    Ok(())
}

fn cmd_swap(a: &SwapArgs) -> Result<(), CliError> {
    require(a.shots >= 1, "--shots must be at least 1")?;
    let zero = StateVector::basis(2, 0);
    let one = StateVector::basis(2, 1);
    let plus = StateVector::from_real(&[1.0, 1.0])?;
    let pairs = [("plus,plus", &plus, &plus), ("zero,one", &zero, &one), ("zero,plus", &zero, &plus)];
    let mut w = output::open(None)?;
    writeln!(w, "pair,exact,estimate,sigma").map_err(io_err)?;
    for (k, (name, a1, a2)) in pairs.into_iter().enumerate() {
        let est = swap_test(a1, a2, a.shots, &mut stream_rng(a.seed, k as u64))?;
        let exact = a1.fidelity(a2);
        let p = est.p0_exact;
        let sigma = 2.0 * (p * (1.0 - p) / a.shots as f64).sqrt();
        writeln!(w, "\"{name}\",{},{},{}", num(exact), num(est.f_estimate), num(sigma)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
