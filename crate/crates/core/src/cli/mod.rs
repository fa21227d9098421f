//! Command-line front end.

pub mod output;
pub mod state;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classical::{
    bsc_ib_information, bsc_ib_rate, classical_ib_curve, classical_ib_dual_curve, classical_pf_curve,
    classical_pf_dual_curve, ClassicalConfig,
};
use crate::curve::{linear_grid, log_grid, Curve, CurveKind};
use crate::error::{invalid, Error, Result};
use crate::quantum::{mutual_information, purify, subsystem_entropy, QuantumState};
use crate::rate_region::wak_boundary;
use crate::solver::{
    dimension_study, normalize_curve, quantum_ib_curve, quantum_ib_dual_curve, quantum_pf_curve,
    quantum_pf_dual_curve, GradientMode, SolverConfig,
};
use crate::verify::{run_suite, Suite};
use output::{
    curve_rows, manifest_path, region_rows, svg_plot, to_csv, to_json, write_output, OutputDigest, RunManifest, Series,
    StudyRow,
};
use state::{LoadedState, StateFile, StateSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable fixing the worker-thread count.
pub const THREADS_ENV: &str = "BOTTLENECK_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bottleneck-lab", version, about = "Information-bottleneck, privacy-funnel and rate-region curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize a source; `--out` writes it as a JSON state file.
    State(StateArgs),
    /// Information-bottleneck curve R(a), or I_Y(R) with `--dual`.
    Ib(CurveArgs),
    /// Privacy-funnel curve G(t), or P(a) with `--dual`.
    Pf(CurveArgs),
    /// Lower boundary Q_Y(Q_X) of the helper rate region.
    RateRegion(SolveArgs),
    /// IB curves for several output dimensions.
    DimStudy(DimArgs),
    /// Run the built-in self-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct StateArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// rho3:p=, bsc:delta=, pure2q[:seed=], classical-joint:ROWS, random:seed=,dx=,dy=, or a JSON file.
    #[arg(long)]
    pub state: String,
    /// Solve the classical problem on the joint table.
    #[arg(long, conflicts_with = "quantum")]
    pub classical: bool,
    /// Solve the quantum problem (default).
    #[arg(long)]
    pub quantum: bool,
    #[arg(long)]
    pub dw: Option<usize>,
    #[arg(long)]
    pub dv: Option<usize>,
    /// Number of evenly spaced abscissae.
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    /// `log:LO:HI:N`, `lin:LO:HI:N` or a comma-separated list.
    #[arg(long)]
    pub beta_grid: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum, default_value = "analytic")]
    pub gradient: GradientArg,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write an SVG plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientArg {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Compute the dual function instead.
    #[arg(long)]
    pub dual: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DimArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub dw_list: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Map a library error to a process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Numerical(_) => EXIT_FAILURE,
        _ => EXIT_VALIDATION,
    }
}

/// `log:LO:HI:N`, `lin:LO:HI:N` or `b1,b2,...`.
pub fn parse_beta_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || invalid(format!("cannot parse multiplier grid `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [kind @ ("log" | "lin"), lo, hi, n] => {
            let lo: f64 = lo.parse().map_err(|_| bad())?;
            let hi: f64 = hi.parse().map_err(|_| bad())?;
            let n: usize = n.parse().map_err(|_| bad())?;
            if !(lo > 0.0 && hi >= lo && n > 0) {
                return Err(bad());
            }
            if *kind == "log" {
                log_grid(lo, hi, n)
            } else {
                linear_grid(lo, hi, n)
            }
        }
        [list] => list.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() || grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(invalid("multipliers must be positive and finite"));
    }
    Ok(grid)
}

impl SolveArgs {
    fn load(&self) -> Result<LoadedState> {
        self.state.parse::<StateSpec>()?.load()
    }

    fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig { seed: self.seed, d_w: self.dw, d_v: self.dv, ..SolverConfig::default() };
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        if let Some(b) = &self.beta_grid {
            cfg.beta_grid = parse_beta_grid(b)?;
        }
        cfg.gradient = match self.gradient {
            GradientArg::Analytic => GradientMode::Analytic,
            GradientArg::FiniteDifference => GradientMode::FiniteDifference,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn classical_config(&self) -> Result<ClassicalConfig> {
        if self.dv.is_some() {
            return Err(invalid("--dv applies to quantum runs only"));
        }
        let mut cfg = ClassicalConfig { seed: self.seed, ..ClassicalConfig::default() };
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        if let Some(b) = &self.beta_grid {
            cfg.beta_grid = parse_beta_grid(b)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn grid(&self, hi: f64) -> Result<Vec<f64>> {
        if self.grid == 0 {
            return Err(invalid("--grid must be at least 1"));
        }
        Ok(linear_grid(0.0, hi, self.grid))
    }
}

struct Emitted {
    outputs: Vec<OutputDigest>,
    config: serde_json::Value,
    seed: u64,
}

fn emit(out: Option<&PathBuf>, bytes: &[u8], outputs: &mut Vec<OutputDigest>) -> Result<()> {
    match out {
        Some(p) => outputs.push(write_output(p, bytes)?),
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn source_scales(st: &LoadedState) -> Result<(f64, f64, f64)> {
    let rho = &st.rho;
    Ok((
        subsystem_entropy(rho, &["X"])?,
        subsystem_entropy(rho, &["Y"])?,
        mutual_information(rho, &["X"], &["Y"])?,
    ))
}

fn curve_command(args: &CurveArgs, pf: bool) -> Result<Emitted> {
    let a = &args.solve;
    let st = a.load()?;
    let (s_x, _, i_xy) = source_scales(&st)?;
    let kind = match (pf, args.dual) {
        (false, false) => CurveKind::Ib,
        (false, true) => CurveKind::IbDual,
        (true, false) => CurveKind::Pf,
        (true, true) => CurveKind::PfDual,
    };
    let (curve, config) = if a.classical {
        let p = st.classical()?;
        let cfg = a.classical_config()?;
        let dw = a.dw.unwrap_or(p.shape().0 + 1);
        let grid = match kind {
            CurveKind::Ib | CurveKind::PfDual => a.grid(p.mutual_information())?,
            CurveKind::IbDual | CurveKind::Pf => a.grid(p.h_x())?,
        };
        let mut curve = match kind {
            CurveKind::Ib => classical_ib_curve(&p, dw, &grid, &cfg)?,
            CurveKind::IbDual => classical_ib_dual_curve(&p, dw, &grid, &cfg)?,
            CurveKind::Pf => classical_pf_curve(&p, dw, &grid, &cfg)?,
            CurveKind::PfDual => classical_pf_dual_curve(&p, dw, &grid, &cfg)?,
        };
        if let Some(delta) = st.bsc_delta {
            for pt in &mut curve.points {
                pt.reference = match kind {
                    CurveKind::Ib => Some(bsc_ib_rate(pt.abscissa, delta)?),
                    CurveKind::IbDual => Some(bsc_ib_information(pt.abscissa.min(1.0), delta)?),
                    _ => pt.reference,
                };
            }
        }
        (curve, serde_json::json!({ "args": args, "classical": cfg, "d_w": dw }))
    } else {
        let cfg = a.solver_config()?;
        let grid = match kind {
            CurveKind::Ib | CurveKind::PfDual => a.grid(i_xy)?,
            CurveKind::IbDual | CurveKind::Pf => a.grid(2.0 * s_x)?,
        };
        let curve = match kind {
            CurveKind::Ib => quantum_ib_curve(&st.rho, &cfg, &grid)?,
            CurveKind::IbDual => quantum_ib_dual_curve(&st.rho, &cfg, &grid)?,
            CurveKind::Pf => quantum_pf_curve(&st.rho, &cfg, &grid)?,
            CurveKind::PfDual => quantum_pf_dual_curve(&st.rho, &cfg, &grid)?,
        };
        (curve, serde_json::json!({ "args": args, "solver": cfg }))
    };
    let curve = if a.normalize { normalize_curve(&curve, &st.rho)? } else { curve };
    let mut outputs = Vec::new();
    let bytes = match a.format {
        Format::Csv => to_csv(&curve_rows(&curve))?,
        Format::Json => to_json(&curve)?,
    };
    emit(a.out.as_ref(), &bytes, &mut outputs)?;
    if let Some(p) = &a.plot {
        outputs.push(write_output(p, curve_svg(&curve).as_bytes())?);
    }
    Ok(Emitted { outputs, config, seed: a.seed })
}

fn curve_svg(curve: &Curve) -> String {
    let (xl, yl) = curve.kind.axis_labels(curve.meta.normalized);
    let mut series =
        vec![Series { name: "computed".into(), points: curve.points.iter().map(|p| (p.abscissa, p.value)).collect() }];
    let reference: Vec<(f64, f64)> =
        curve.points.iter().filter_map(|p| p.reference.map(|r| (p.abscissa, r))).collect();
    if !reference.is_empty() {
        series.push(Series { name: "reference".into(), points: reference });
    }
    svg_plot(&series, xl, yl)
}

fn region_command(a: &SolveArgs) -> Result<Emitted> {
    if a.classical {
        return Err(invalid("the rate region is computed for quantum sources only"));
    }
    let st = a.load()?;
    let cfg = a.solver_config()?;
    let psi = purify(&st.rho, "R")?;
    let (s_x, _, _) = source_scales(&st)?;
    let boundary = wak_boundary(&psi, &a.grid(s_x)?, &cfg)?;
    let mut outputs = Vec::new();
    let bytes = match a.format {
        Format::Csv => to_csv(&region_rows(&boundary))?,
        Format::Json => to_json(&boundary)?,
    };
    emit(a.out.as_ref(), &bytes, &mut outputs)?;
    if let Some(p) = &a.plot {
        let pts = boundary.points.iter().map(|r| (r.q_x, r.q_y)).collect();
        let svg = svg_plot(&[Series { name: "Q_Y(Q_X)".into(), points: pts }], "Q_X", "Q_Y");
        outputs.push(write_output(p, svg.as_bytes())?);
    }
    Ok(Emitted { outputs, config: serde_json::json!({ "args": a, "solver": cfg }), seed: a.seed })
}

fn dim_command(args: &DimArgs) -> Result<Emitted> {
    let a = &args.solve;
    if a.classical {
        return Err(invalid("the dimension study is computed for quantum sources only"));
    }
    if a.dw.is_some() {
        return Err(invalid("use --dw-list for the dimension study"));
    }
    let st = a.load()?;
    let cfg = a.solver_config()?;
    let (_, _, i_xy) = source_scales(&st)?;
    let mut curves = dimension_study(&st.rho, &args.dw_list, &cfg, &a.grid(i_xy)?)?;
    if a.normalize {
        curves = curves.iter().map(|c| normalize_curve(c, &st.rho)).collect::<Result<_>>()?;
    }
    let mut outputs = Vec::new();
    let bytes = match a.format {
        Format::Csv => {
            let rows: Vec<StudyRow> = args
                .dw_list
                .iter()
                .zip(&curves)
                .flat_map(|(&d_w, c)| {
                    c.points.iter().map(move |p| StudyRow {
                        d_w,
                        abscissa: p.abscissa,
                        value: p.value,
                        achieved_constraint: p.achieved_constraint,
                        converged: p.converged,
                    })
                })
                .collect();
            to_csv(&rows)?
        }
        Format::Json => to_json(&curves)?,
    };
    emit(a.out.as_ref(), &bytes, &mut outputs)?;
    if let Some(p) = &a.plot {
        let series: Vec<Series> = args
            .dw_list
            .iter()
            .zip(&curves)
            .map(|(d, c)| Series { name: format!("d_W = {d}"), points: c.points.iter().map(|p| (p.abscissa, p.value)).collect() })
            .collect();
        let (xl, yl) = CurveKind::Ib.axis_labels(a.normalize);
        outputs.push(write_output(p, svg_plot(&series, xl, yl).as_bytes())?);
    }
    Ok(Emitted { outputs, config: serde_json::json!({ "args": args, "solver": cfg }), seed: a.seed })
}

fn state_command(a: &StateArgs) -> Result<Emitted> {
    let st = a.state.parse::<StateSpec>()?.load()?;
    let (s_x, s_y, i_xy) = source_scales(&st)?;
    println!("dims: {:?}", st.rho.dims());
    println!("S(X) = {s_x}");
    println!("S(Y) = {s_y}");
    println!("I(X;Y) = {i_xy}");
    println!("classical: {}", st.classical().is_ok());
    let mut outputs = Vec::new();
    if let Some(p) = &a.out {
        outputs.push(write_output(p, &to_json(&StateFile::from_density(&st.rho))?)?);
    }
    Ok(Emitted { outputs, config: serde_json::json!({ "args": a }), seed: 0 })
}

fn verify_command(a: &VerifyArgs) -> Result<(Emitted, bool)> {
    let report = run_suite(a.suite, a.seed)?;
    for c in &report.checks {
        println!(
            "{} [{:?}] {}: worst {:e} (tolerance {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.worst,
            c.tolerance
        );
    }
    let mut outputs = Vec::new();
    if let Some(p) = &a.out {
        outputs.push(write_output(p, &to_json(&report)?)?);
    }
    Ok((Emitted { outputs, config: serde_json::json!({ "args": a }), seed: a.seed }, report.pass()))
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_manifest(argv: &[String], emitted: &Emitted, started: Instant) -> Result<()> {
    let Some(first) = emitted.outputs.first() else { return Ok(()) };
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        argv: argv.to_vec(),
        config: emitted.config.clone(),
        seed: emitted.seed,
        threads: rayon::current_num_threads(),
        wall_time_secs: started.elapsed().as_secs_f64(),
        outputs: emitted.outputs.clone(),
    };
    std::fs::write(manifest_path(std::path::Path::new(&first.path)), to_json(&manifest)?)?;
    Ok(())
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let started = Instant::now();
    let text: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::State(a) => state_command(a).map(|e| (e, true)),
        Command::Ib(a) => curve_command(a, false).map(|e| (e, true)),
        Command::Pf(a) => curve_command(a, true).map(|e| (e, true)),
        Command::RateRegion(a) => region_command(a).map(|e| (e, true)),
        Command::DimStudy(a) => dim_command(a).map(|e| (e, true)),
        Command::Verify(a) => verify_command(a),
    };
    match result.and_then(|(e, ok)| write_manifest(&text, &e, started).map(|_| ok)) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
