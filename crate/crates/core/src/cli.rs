//! Command-line front end.
//!
//! Every command writes CSV to `--out <dir>` (one file per product) or to
//! stdout when no directory is given. Settings come from a JSON file given
//! with `--config` and are overridden by flags.
//!
//! Exit codes: 0 success, 1 numerical non-convergence or a failed check,
//! 2 usage, configuration or I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use crate::classical::{free_classical, helix_position, default_gyration_center};
use crate::error::Error;
use crate::freefield::{
    energy_moments, evolved_moments, kg_density, nonrel_moments, probability_density,
    velocity_moments, FreeCoherentState, Moment, NormalizationConvention,
};
use crate::magnetic::{
    kg_field_batch, nonrel_expectations, LandauSeries, MagneticCoherentState, PositionVariant,
    SeriesSpec,
};
use crate::neutral::{neutral_field, NeutralCoherentState};
use crate::output::{units, Field, Table};
use crate::quadrature::QuadratureSpec;
use crate::reference::{self, ConservedRow, CONSERVED_COLUMNS, TABLE1, TABLE2, TABLE3, TABLE4};
use crate::validate::{self, argmax, gyration_center_drift, neutral_max_imag, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kgcoherent", version, about = "Klein-Gordon coherent states: tables, figure data and checks")]
pub struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV output (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Relative tolerance of the momentum quadrature.
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Tail tolerance of the Landau series.
    #[arg(long, global = true)]
    pub series_tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free charged packets in 1+1 dimensions.
    Free(FreeArgs),
    /// Packets in a uniform magnetic field.
    Magnetic(MagneticArgs),
    /// Real fields built from charge-parity pairs.
    Neutral(NeutralArgs),
    /// Run the invariant suites and table comparisons.
    Validate(ValidateArgs),
}

/// `start:stop:step` grid flags.
#[derive(Debug, Clone, Default, Args)]
pub struct TauGridArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tau_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_stop: Option<f64>,
    #[arg(long)]
    pub tau_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct XGridArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_stop: Option<f64>,
    #[arg(long)]
    pub x_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FreeObservable {
    /// Moments against τ.
    Moments,
    /// Moments at τ = 0 against ⟨p⟩.
    MomentsVsP,
    /// Mean velocity.
    Vdot,
    /// Energy mean and dispersion.
    Energy,
    /// ρ and |ψ|² on a (τ, x) grid.
    Density,
    /// Positions of the maxima of ρ and |ψ|² against τ.
    Maxima,
}

#[derive(Debug, Args)]
pub struct FreeArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p_mean: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<i8>,
    #[arg(long, value_enum, default_value_t = FreeObservable::Moments)]
    pub observable: FreeObservable,
    /// Reproduce a published table (only 1).
    #[arg(long)]
    pub table: Option<u8>,
    #[command(flatten)]
    pub tau: TauGridArgs,
    #[command(flatten)]
    pub x: XGridArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub p_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p_stop: Option<f64>,
    #[arg(long)]
    pub p_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MagneticObservable {
    /// Positions and momenta against τ/τ_cl.
    Trajectory,
    /// Time-independent expectation values.
    Conserved,
    /// Δx³Δp₃ against τ/τ_cl.
    Uncertainty,
    /// |ψ(τ)|² along a coordinate axis.
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    X1,
    X2,
    X3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Helix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MagneticCheck {
    GyrationCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Printed,
    Symmetric,
}

impl From<VariantArg> for PositionVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Printed => PositionVariant::Printed,
            VariantArg::Symmetric => PositionVariant::Symmetric,
        }
    }
}

#[derive(Debug, Args)]
pub struct MagneticArgs {
    /// Field strength Λ.
    #[arg(long = "field")]
    pub lambda_field: Option<f64>,
    #[arg(long)]
    pub lambda_perp: Option<f64>,
    /// Set λ⊥ = √Λ.
    #[arg(long)]
    pub matched: bool,
    #[arg(long)]
    pub lambda3: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p3: Option<f64>,
    /// Total momentum ⟨Π⟩, split by `--p1-fraction`.
    #[arg(long)]
    pub total: Option<f64>,
    #[arg(long)]
    pub p1_fraction: Option<f64>,
    #[arg(long, value_enum, default_value_t = MagneticObservable::Trajectory)]
    pub observable: MagneticObservable,
    /// Reproduce a published table (2, 3 or 4).
    #[arg(long)]
    pub table: Option<u8>,
    #[arg(long, value_enum)]
    pub fig: Option<Figure>,
    #[arg(long, value_enum)]
    pub check: Option<MagneticCheck>,
    #[arg(long, value_enum, default_value_t = VariantArg::Printed)]
    pub variant: VariantArg,
    /// Axis of a field slice.
    #[arg(long, value_enum, default_value_t = Axis::X1)]
    pub slice: Axis,
    /// τ grid, in classical periods.
    #[command(flatten)]
    pub tau: TauGridArgs,
    #[command(flatten)]
    pub x: XGridArgs,
}

#[derive(Debug, Args)]
pub struct NeutralArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p_mean: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Report the largest |Im ψ| on the grid instead of the field.
    #[arg(long)]
    pub reality_check: bool,
    #[command(flatten)]
    pub tau: TauGridArgs,
    #[command(flatten)]
    pub x: XGridArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Run the table comparisons and every invariant suite.
    #[arg(long)]
    pub all: bool,
    /// Only compare against the published tables.
    #[arg(long)]
    pub tables: bool,
    #[arg(long, value_enum, default_value_t = VariantArg::Printed)]
    pub variant: VariantArg,
}

/// Evenly spaced grid, inclusive of `stop` up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let GridSpec { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(CliError::Usage(format!("{name} grid must be finite")));
        }
        if !(step > 0.0) {
            return Err(CliError::Usage(format!("{name} grid step must be positive, got {step}")));
        }
        if stop < start {
            return Err(CliError::Usage(format!("{name} grid is empty: stop {stop} < start {start}")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if n > 10_000_000 {
            return Err(CliError::Usage(format!("{name} grid has {n} points")));
        }
        Ok((0..n).map(|i| start + step * i as f64).collect())
    }

    fn merge(base: Option<GridSpec>, start: Option<f64>, stop: Option<f64>, step: Option<f64>, default: GridSpec) -> GridSpec {
        let b = base.unwrap_or(default);
        GridSpec {
            start: start.unwrap_or(b.start),
            stop: stop.unwrap_or(b.stop),
            step: step.unwrap_or(b.step),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeConfig {
    pub lambda: Option<f64>,
    pub p_mean: Option<f64>,
    pub alpha: Option<f64>,
    pub epsilon: Option<i8>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagneticConfig {
    #[serde(rename = "Lambda")]
    pub lambda_field: Option<f64>,
    pub lambda_perp: Option<f64>,
    pub matched: Option<bool>,
    pub lambda3: Option<f64>,
    pub p1_mean: Option<f64>,
    pub p3_mean: Option<f64>,
    pub total: Option<f64>,
    pub p1_fraction: Option<f64>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub quad: Option<QuadratureSpec>,
    pub series: Option<SeriesSpec>,
    pub free: FreeConfig,
    pub magnetic: MagneticConfig,
    pub tau: Option<GridSpec>,
    pub x: Option<GridSpec>,
    pub p: Option<GridSpec>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(Error),
    Io(io::Error),
    /// A check ran but did not pass.
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_non_convergence() {
            CliError::Numeric(e)
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) | CliError::Failed(_) => EXIT_NUMERIC,
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
        }
    }
}

/// Settings shared by every command after merging file and flags.
struct Context {
    cfg: RunConfig,
    out: Option<PathBuf>,
    quad: QuadratureSpec,
    series: SeriesSpec,
}

impl Context {
    fn emit(&self, name: &str, table: &Table, stdout: &mut dyn Write) -> Result<(), CliError> {
        match &self.out {
            Some(dir) => table.write(&dir.join(format!("{name}.csv")))?,
            None => stdout.write_all(table.to_csv().as_bytes())?,
        }
        Ok(())
    }

    fn emit_text(&self, name: &str, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        stdout.write_all(text.as_bytes())?;
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Output goes to `stdout`, diagnostics to `stderr`; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "kgcoherent: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let mut quad = cfg.quad.unwrap_or_default();
    if let Some(t) = cli.quad_tol {
        quad.rel_tol = t;
    }
    quad.validate()?;
    let mut series = cfg.series.unwrap_or_default();
    if let Some(t) = cli.series_tol {
        series.tail_tol = t;
    }
    series.validate()?;
    if let Some(n) = cli.threads.or(cfg.threads) {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // the global pool can only be set once per process; later calls keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let ctx = Context {
        out: cli.out.clone().or_else(|| cfg.out.clone()),
        cfg,
        quad,
        series,
    };
    match cli.command {
        Command::Free(a) => cmd_free(&ctx, &a, stdout),
        Command::Magnetic(a) => cmd_magnetic(&ctx, &a, stdout),
        Command::Neutral(a) => cmd_neutral(&ctx, &a, stdout),
        Command::Validate(a) => cmd_validate(&ctx, &a, stdout),
    }
}

fn free_state(ctx: &Context, a: &FreeArgs) -> Result<FreeCoherentState, CliError> {
    let c = &ctx.cfg.free;
    Ok(FreeCoherentState::new(
        a.lambda.or(c.lambda).unwrap_or(1.0),
        a.alpha.or(c.alpha).unwrap_or(0.0),
        a.p_mean.or(c.p_mean).unwrap_or(1.0),
        a.epsilon.or(c.epsilon).unwrap_or(1),
    )?)
}

fn with_unit(name: &str, unit: &str) -> String {
    format!("{name}{unit}")
}

fn cmd_free(ctx: &Context, a: &FreeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let q = ctx.quad;
    if let Some(t) = a.table {
        if t != 1 {
            return Err(CliError::Usage(format!("free has only table 1, got {t}")));
        }
        return ctx.emit("free_table1", &free_table1(&q)?, stdout);
    }
    let s = free_state(ctx, a)?;
    let tau_grid = || {
        GridSpec::merge(ctx.cfg.tau, a.tau.tau_start, a.tau.tau_stop, a.tau.tau_step, GridSpec { start: 0.0, stop: 20.0, step: 1.0 })
            .points("tau")
    };
    match a.observable {
        FreeObservable::Vdot => {
            let v = velocity_moments(&s, &q)?;
            let (v_cl, _) = free_classical(s.p_mean);
            let mut t = Table::new([
                "lambda".to_string(),
                with_unit("p_mean", units::MOMENTUM),
                "epsilon".into(),
                with_unit("v_mean", units::VELOCITY),
                with_unit("dv", units::VELOCITY),
                with_unit("v_classical", units::VELOCITY),
            ]);
            t.push(vec![s.lambda.into(), s.p_mean.into(), Field::Int(s.epsilon as i64), v.mean.into(), v.var.sqrt().into(), (s.eps() * v_cl).into()]);
            ctx.emit("free_vdot", &t, stdout)
        }
        FreeObservable::Energy => {
            let (e, var) = energy_moments(&s, &q)?;
            let e_nr = nonrel_moments(&s, 0.0).value(Moment::EMean);
            let (_, e_cl) = free_classical(s.p_mean);
            let mut t = Table::new([
                "lambda".to_string(),
                with_unit("p_mean", units::MOMENTUM),
                with_unit("E_mean", units::ENERGY),
                with_unit("dE", units::ENERGY),
                with_unit("E_nr", units::ENERGY),
                with_unit("E_classical", units::ENERGY),
                with_unit("E_mean/E_classical", units::RATIO),
                with_unit("E_nr/E_classical", units::RATIO),
            ]);
            t.push(vec![s.lambda.into(), s.p_mean.into(), e.into(), var.sqrt().into(), e_nr.into(), e_cl.into(), (e / e_cl).into(), (e_nr / e_cl).into()]);
            ctx.emit("free_energy", &t, stdout)
        }
        FreeObservable::Moments => {
            let taus = tau_grid()?;
            let rows: Result<Vec<_>, Error> = taus
                .par_iter()
                .map(|&tau| {
                    let m = evolved_moments(&s, tau, &q)?;
                    let nr = nonrel_moments(&s, tau);
                    Ok(vec![
                        Field::Num(tau),
                        m.value(Moment::XMean).into(),
                        m.value(Moment::XVar).sqrt().into(),
                        nr.value(Moment::XMean).into(),
                        nr.value(Moment::XVar).sqrt().into(),
                        m.value(Moment::VMean).into(),
                        m.value(Moment::VVar).sqrt().into(),
                        m.value(Moment::EMean).into(),
                        m.value(Moment::EVar).sqrt().into(),
                        m.value(Moment::UncertaintyProduct).into(),
                        nr.value(Moment::UncertaintyProduct).into(),
                    ])
                })
                .collect();
            let mut t = Table::new([
                with_unit("tau", units::TIME),
                with_unit("x_mean", units::LENGTH),
                with_unit("dx", units::LENGTH),
                with_unit("x_mean_nr", units::LENGTH),
                with_unit("dx_nr", units::LENGTH),
                with_unit("v_mean", units::VELOCITY),
                with_unit("dv", units::VELOCITY),
                with_unit("E_mean", units::ENERGY),
                with_unit("dE", units::ENERGY),
                with_unit("dx_dp", "[hbar]"),
                with_unit("dx_dp_nr", "[hbar]"),
            ]);
            for r in rows? {
                t.push(r);
            }
            ctx.emit("free_moments", &t, stdout)
        }
        FreeObservable::MomentsVsP => {
            let ps = GridSpec::merge(ctx.cfg.p, a.p_start, a.p_stop, a.p_step, GridSpec { start: 0.0, stop: 5.0, step: 0.1 })
                .points("p")?;
            let rows: Result<Vec<_>, Error> = ps
                .par_iter()
                .map(|&p| {
                    let st = FreeCoherentState { p_mean: p, ..s };
                    let v = velocity_moments(&st, &q)?;
                    let (e, var) = energy_moments(&st, &q)?;
                    let nr = nonrel_moments(&st, 0.0);
                    let (v_cl, e_cl) = free_classical(p);
                    Ok(vec![
                        Field::Num(p),
                        e.into(),
                        var.sqrt().into(),
                        nr.value(Moment::EMean).into(),
                        e_cl.into(),
                        v.mean.into(),
                        v.var.sqrt().into(),
                        nr.value(Moment::VMean).into(),
                        (st.eps() * v_cl).into(),
                    ])
                })
                .collect();
            let mut t = Table::new([
                with_unit("p_mean", units::MOMENTUM),
                with_unit("E_mean", units::ENERGY),
                with_unit("dE", units::ENERGY),
                with_unit("E_nr", units::ENERGY),
                with_unit("E_classical", units::ENERGY),
                with_unit("v_mean", units::VELOCITY),
                with_unit("dv", units::VELOCITY),
                with_unit("v_nr", units::VELOCITY),
                with_unit("v_classical", units::VELOCITY),
            ]);
            for r in rows? {
                t.push(r);
            }
            ctx.emit("free_moments_vs_p", &t, stdout)
        }
        FreeObservable::Density => {
            let taus = tau_grid()?;
            let xs = GridSpec::merge(ctx.cfg.x, a.x.x_start, a.x.x_stop, a.x.x_step, GridSpec { start: -10.0, stop: 40.0, step: 0.1 })
                .points("x")?;
            let cells: Vec<(f64, f64)> = taus.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
            let norm = NormalizationConvention::default();
            let rows: Result<Vec<_>, Error> = cells
                .par_iter()
                .map(|&(tau, x)| {
                    Ok(vec![
                        Field::Num(tau),
                        x.into(),
                        probability_density(&s, tau, x, &q)?.into(),
                        kg_density(&s, tau, x, &norm, &q)?.into(),
                    ])
                })
                .collect();
            let mut t = Table::new([
                with_unit("tau", units::TIME),
                with_unit("x", units::LENGTH),
                with_unit("rho", units::DENSITY_1D),
                with_unit("psi_sq", units::DENSITY_1D),
            ]);
            for r in rows? {
                t.push(r);
            }
            ctx.emit("free_density", &t, stdout)
        }
        FreeObservable::Maxima => {
            let taus = tau_grid()?;
            let norm = NormalizationConvention::default();
            let rows: Result<Vec<_>, Error> = taus
                .par_iter()
                .map(|&tau| {
                    let m = evolved_moments(&s, tau, &q)?;
                    let c = m.value(Moment::XMean);
                    let w = 6.0 * m.value(Moment::XVar).sqrt();
                    let rho = argmax(|x| probability_density(&s, tau, x, &q), c - w, c + w, 600)?;
                    let psi = argmax(|x| kg_density(&s, tau, x, &norm, &q), c - w, c + w, 600)?;
                    Ok(vec![Field::Num(tau), rho.into(), psi.into(), c.into()])
                })
                .collect();
            let mut t = Table::new([
                with_unit("tau", units::TIME),
                with_unit("x_max_rho", units::LENGTH),
                with_unit("x_max_psi_sq", units::LENGTH),
                with_unit("x_mean", units::LENGTH),
            ]);
            for r in rows? {
                t.push(r);
            }
            ctx.emit("free_maxima", &t, stdout)
        }
    }
}

fn deviation_columns(t: &mut Vec<String>, name: &str) {
    t.push(name.to_string());
    t.push(format!("{name} paper"));
    t.push(format!("{name} abs_dev"));
    t.push(format!("{name} rel_dev"));
}

fn deviation_cells(row: &mut Vec<Field>, got: f64, paper: f64) {
    row.push(got.into());
    row.push(paper.into());
    row.push((got - paper).abs().into());
    row.push(((got - paper) / paper).abs().into());
}

fn free_table1(q: &QuadratureSpec) -> Result<Table, CliError> {
    let mut cols = vec![with_unit("p_mean", units::MOMENTUM), "lambda".to_string()];
    deviation_columns(&mut cols, "E_mean/E_cl");
    deviation_columns(&mut cols, "E_nr/E_cl");
    let mut t = Table::new(cols);
    for cell in TABLE1 {
        let s = FreeCoherentState::particle(cell.lambda, 0.0, cell.p_mean)?;
        let (_, e_cl) = free_classical(cell.p_mean);
        let (e, _) = energy_moments(&s, q)?;
        let e_nr = nonrel_moments(&s, 0.0).value(Moment::EMean);
        let mut row = vec![Field::Num(cell.p_mean), cell.lambda.into()];
        deviation_cells(&mut row, e / e_cl, cell.energy_ratio);
        deviation_cells(&mut row, e_nr / e_cl, cell.nonrel_ratio);
        t.push(row);
    }
    Ok(t)
}

fn magnetic_state(ctx: &Context, a: &MagneticArgs) -> Result<MagneticCoherentState, CliError> {
    let c = &ctx.cfg.magnetic;
    let lam = a.lambda_field.or(c.lambda_field).unwrap_or(0.01);
    let matched = a.matched || c.matched.unwrap_or(false);
    let lp = if matched {
        lam.sqrt()
    } else {
        a.lambda_perp.or(c.lambda_perp).unwrap_or_else(|| lam.sqrt())
    };
    let l3 = a.lambda3.or(c.lambda3).unwrap_or(1e-3);
    let p1 = a.p1.or(c.p1_mean);
    let p3 = a.p3.or(c.p3_mean);
    let total = a.total.or(c.total);
    match (p1, p3, total) {
        (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => Err(CliError::Usage(
            "give either --total (with --p1-fraction) or --p1/--p3, not both".into(),
        )),
        (None, None, total) => {
            let frac = a.p1_fraction.or(c.p1_fraction).unwrap_or(reference::P1_FRACTION);
            if !(0.0..=1.0).contains(&frac) {
                return Err(CliError::Usage(format!("--p1-fraction must lie in [0, 1], got {frac}")));
            }
            Ok(MagneticCoherentState::with_total_momentum(lam, lp, l3, total.unwrap_or(2.0), frac)?)
        }
        (p1, p3, None) => Ok(MagneticCoherentState::new(lam, lp, l3, p1.unwrap_or(0.0), p3.unwrap_or(0.0))?),
    }
}

fn conserved_table_row(row: &ConservedRow, got: [f64; 5]) -> Vec<Field> {
    let mut cells = vec![
        Field::Num(row.lambda_field),
        row.total.into(),
        row.p1.into(),
        row.p3.into(),
        row.lambda_perp.label().into(),
        row.lambda3.into(),
    ];
    for (g, p) in got.iter().zip(row.values) {
        deviation_cells(&mut cells, *g, p);
    }
    cells
}

fn conserved_table(rows: &[ConservedRow], o: &ValidateOptions) -> Result<Table, CliError> {
    let mut cols = vec![
        "Lambda".to_string(),
        with_unit("Pi", units::MOMENTUM),
        with_unit("p1", units::MOMENTUM),
        with_unit("p3", units::MOMENTUM),
        "lambda_perp".into(),
        "lambda3".into(),
    ];
    for c in CONSERVED_COLUMNS {
        deviation_columns(&mut cols, c);
    }
    let mut t = Table::new(cols);
    let got: Result<Vec<_>, Error> = rows.par_iter().map(|r| validate::conserved_ratios(r, o)).collect();
    for (r, g) in rows.iter().zip(got?) {
        t.push(conserved_table_row(r, g));
    }
    Ok(t)
}

fn slow_table(o: &ValidateOptions) -> Result<Table, CliError> {
    let mut cols = vec!["Lambda".to_string(), "lambda_perp".into(), "lambda3".into()];
    for c in ["E/E_cl", "E_nr/E_cl", "x3dot/x3dot_cl"] {
        deviation_columns(&mut cols, c);
    }
    let mut t = Table::new(cols);
    for r in TABLE4 {
        let st = r.state()?;
        let ls = LandauSeries::new(&st, &o.series, &o.quad)?;
        let e_cl = st.classical_energy();
        let mut row = vec![Field::Num(r.lambda_field), r.lambda_perp.into(), r.lambda3.into()];
        deviation_cells(&mut row, ls.conserved().energy / e_cl, r.energy_ratio);
        deviation_cells(&mut row, nonrel_expectations(&st, 0.0).energy / e_cl, r.nonrel_energy_ratio);
        deviation_cells(&mut row, ls.parallel(0.0).x3dot_mean / st.classical_parallel_velocity(), r.x3dot_ratio);
        t.push(row);
    }
    Ok(t)
}

fn trajectory_rows(ls: &LandauSeries, periods: &[f64], variant: PositionVariant) -> Result<Vec<Vec<Field>>, Error> {
    let st = ls.state;
    let r = st.classical_radius();
    let t_cl = st.classical_period();
    let pi_perp = st.p1_mean;
    let helix = st.helix();
    let gc = default_gyration_center(&helix);
    periods
        .par_iter()
        .map(|&k| {
            let tau = k * t_cl;
            let x = ls.transverse(tau, variant)?;
            let m = ls.momenta_at(x);
            let x3 = ls.parallel(tau).x3_mean;
            // classical orbit through the origin with velocity along +x¹
            let c = helix_position(&helix, tau, gc);
            Ok(vec![
                Field::Num(k),
                (x[0] / r).into(),
                (x[1] / r).into(),
                x3.into(),
                (m.p1 / pi_perp).into(),
                (m.p2 / pi_perp).into(),
                (m.pi1 / pi_perp).into(),
                (m.pi2 / pi_perp).into(),
                (c[0] / r).into(),
                (c[1] / r).into(),
                c[2].into(),
            ])
        })
        .collect()
}

fn trajectory_columns() -> Vec<String> {
    vec![
        "tau/tau_cl".into(),
        "x1/R_cl".into(),
        "x2/R_cl".into(),
        with_unit("x3", units::LENGTH),
        "p1/Pi_perp".into(),
        "p2/Pi_perp".into(),
        "Pi1/Pi_perp".into(),
        "Pi2/Pi_perp".into(),
        "x1_classical/R_cl".into(),
        "x2_classical/R_cl".into(),
        with_unit("x3_classical", units::LENGTH),
    ]
}

fn cmd_magnetic(ctx: &Context, a: &MagneticArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let o = ValidateOptions {
        quad: ctx.quad,
        series: ctx.series,
        variant: a.variant.into(),
    };
    if let Some(t) = a.table {
        let table = match t {
            2 => conserved_table(&TABLE2, &o)?,
            3 => conserved_table(&TABLE3, &o)?,
            4 => slow_table(&o)?,
            _ => return Err(CliError::Usage(format!("magnetic tables are 2, 3 and 4, got {t}"))),
        };
        return ctx.emit(&format!("magnetic_table{t}"), &table, stdout);
    }
    let periods = || {
        GridSpec::merge(ctx.cfg.tau, a.tau.tau_start, a.tau.tau_stop, a.tau.tau_step, GridSpec { start: 0.0, stop: 3.0, step: 0.01 })
            .points("tau")
    };
    if let Some(Figure::Helix) = a.fig {
        let ks = periods()?;
        let mut cols = vec!["case".to_string()];
        cols.extend(trajectory_columns());
        cols.push("x3/(x3dot_cl*tau_cl)".into());
        let mut t = Table::new(cols);
        for (lp, l3) in reference::HELIX_WIDTHS.iter() {
            let lam = reference::HELIX_LAMBDA;
            let st = MagneticCoherentState::new(lam, lp.resolve(lam), *l3, 1.2, 1.6)?;
            let ls = LandauSeries::new(&st, &ctx.series, &ctx.quad)?;
            let scale = st.classical_parallel_velocity() * st.classical_period();
            for row in trajectory_rows(&ls, &ks, o.variant)? {
                let x3 = match row[3] {
                    Field::Num(v) => v,
                    _ => unreachable!(),
                };
                let mut full = vec![Field::Text(format!("lambda_perp={} lambda3={l3}", lp.label()))];
                full.extend(row);
                full.push((x3 / scale).into());
                t.push(full);
            }
        }
        return ctx.emit("magnetic_helix", &t, stdout);
    }
    let st = magnetic_state(ctx, a)?;
    if let Some(MagneticCheck::GyrationCenter) = a.check {
        let ls = LandauSeries::new(&st, &ctx.series, &ctx.quad)?;
        let drift = gyration_center_drift(&ls, 5.0, 100, o.variant)?;
        let tol = 1e-10;
        let mut t = Table::new(["max_drift/R_cl", "tolerance", "passed"]);
        t.push(vec![drift.into(), tol.into(), (if drift <= tol { "true" } else { "false" }).into()]);
        ctx.emit("magnetic_gyration_center", &t, stdout)?;
        return if drift <= tol {
            Ok(())
        } else {
            Err(CliError::Failed(format!("gyration center drifts by {drift:e} R_cl")))
        };
    }
    match a.observable {
        MagneticObservable::Trajectory => {
            let ks = periods()?;
            let ls = LandauSeries::new(&st, &ctx.series, &ctx.quad)?;
            let mut t = Table::new(trajectory_columns());
            for r in trajectory_rows(&ls, &ks, o.variant)? {
                t.push(r);
            }
            ctx.emit("magnetic_trajectory", &t, stdout)
        }
        MagneticObservable::Uncertainty => {
            let ks = periods()?;
            let ls = LandauSeries::new(&st, &ctx.series, &ctx.quad)?;
            let t_cl = st.classical_period();
            let mut t = Table::new(["tau/tau_cl", "dx3_dp3[hbar]"]);
            for k in ks {
                t.push(vec![k.into(), ls.x3_uncertainty(k * t_cl).into()]);
            }
            ctx.emit("magnetic_uncertainty", &t, stdout)
        }
        MagneticObservable::Conserved => {
            let ls = LandauSeries::new(&st, &ctx.series, &ctx.quad)?;
            let c = ls.conserved();
            let par = ls.parallel(0.0);
            let r = st.classical_radius();
            let mut t = Table::new([
                "Lambda".to_string(),
                "lambda_perp".into(),
                "lambda3".into(),
                with_unit("p1", units::MOMENTUM),
                with_unit("p3", units::MOMENTUM),
                with_unit("E_mean", units::ENERGY),
                with_unit("x3dot_mean", units::VELOCITY),
                with_unit("L3_mean", "[hbar]"),
                with_unit("R_mean", units::LENGTH),
                with_unit("R_sq_mean", "[(hbar/mc)^2]"),
                with_unit("dR", units::LENGTH),
                "E/E_cl".into(),
                "x3dot/x3dot_cl".into(),
                "R/R_cl".into(),
                "R2/R_cl2".into(),
                "dR/R_cl".into(),
                with_unit("R_sq_closed", "[(hbar/mc)^2]"),
                with_unit("R_sq_closed_second_moment", "[(hbar/mc)^2]"),
                "occupation_sum".into(),
            ]);
            t.push(vec![
                st.lambda_field.into(),
                st.lambda_perp.into(),
                st.lambda3.into(),
                st.p1_mean.into(),
                st.p3_mean.into(),
                c.energy.into(),
                par.x3dot_mean.into(),
                c.l3.into(),
                c.r_mean.into(),
                c.r_sq_mean.into(),
                c.r_var.sqrt().into(),
                (c.energy / st.classical_energy()).into(),
                (par.x3dot_mean / st.classical_parallel_velocity()).into(),
                (c.r_mean / r).into(),
                (c.r_sq_mean / (r * r)).into(),
                (c.r_var.sqrt() / r).into(),
                c.r_sq_closed.into(),
                c.r_sq_closed_second_moment.into(),
                c.total_mass.into(),
            ]);
            ctx.emit("magnetic_conserved", &t, stdout)
        }
        MagneticObservable::Field => {
            let xs = GridSpec::merge(ctx.cfg.x, a.x.x_start, a.x.x_stop, a.x.x_step, GridSpec { start: -10.0, stop: 10.0, step: 0.25 })
                .points("x")?;
            let tau = a.tau.tau_start.or(ctx.cfg.tau.map(|g| g.start)).unwrap_or(0.0) * st.classical_period();
            let norm = NormalizationConvention::default();
            let values = match a.slice {
                Axis::X1 | Axis::X2 => {
                    let base = if a.slice == Axis::X1 { 0.0 } else { std::f64::consts::FRAC_PI_2 };
                    let pts: Vec<(f64, f64)> = xs
                        .iter()
                        .map(|&x| (x.abs(), if x < 0.0 { base + std::f64::consts::PI } else { base }))
                        .collect();
                    kg_field_batch(&st, tau, 0.0, &pts, &norm, &ctx.series, &ctx.quad)?.0
                }
                Axis::X3 => {
                    let v: Result<Vec<_>, Error> = xs
                        .par_iter()
                        .map(|&x3| Ok(kg_field_batch(&st, tau, x3, &[(0.0, 0.0)], &norm, &ctx.series, &ctx.quad)?.0[0]))
                        .collect();
                    v?
                }
            };
            let axis = match a.slice {
                Axis::X1 => "x1",
                Axis::X2 => "x2",
                Axis::X3 => "x3",
            };
            let mut t = Table::new([
                with_unit(axis, units::LENGTH),
                with_unit("psi_sq", units::DENSITY_3D),
                "Re_psi".to_string(),
                "Im_psi".to_string(),
            ]);
            for (x, z) in xs.iter().zip(values) {
                t.push(vec![(*x).into(), z.norm_sqr().into(), z.re.into(), z.im.into()]);
            }
            ctx.emit(&format!("magnetic_field_{axis}"), &t, stdout)
        }
    }
}

fn cmd_neutral(ctx: &Context, a: &NeutralArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let c = &ctx.cfg.free;
    let s = NeutralCoherentState::from_params(
        a.lambda.or(c.lambda).unwrap_or(1.0),
        a.alpha.or(c.alpha).unwrap_or(0.0),
        a.p_mean.or(c.p_mean).unwrap_or(1.0),
    )?;
    let taus = GridSpec::merge(ctx.cfg.tau, a.tau.tau_start, a.tau.tau_stop, a.tau.tau_step, GridSpec { start: 0.0, stop: 10.0, step: 2.5 })
        .points("tau")?;
    let xg = GridSpec::merge(ctx.cfg.x, a.x.x_start, a.x.x_stop, a.x.x_step, GridSpec { start: -15.0, stop: 15.0, step: 0.5 });
    let xs = xg.points("x")?;
    if a.reality_check {
        let dev = neutral_max_imag(&s, &taus, xg.start, *xs.last().expect("nonempty"), xs.len(), &ctx.quad)?;
        let tol = 1e-10;
        let mut t = Table::new(["max_abs_Im_psi", "tolerance", "passed"]);
        t.push(vec![dev.into(), tol.into(), (if dev <= tol { "true" } else { "false" }).into()]);
        ctx.emit("neutral_reality", &t, stdout)?;
        return if dev <= tol {
            Ok(())
        } else {
            Err(CliError::Failed(format!("neutral field has |Im psi| = {dev:e}")))
        };
    }
    let cells: Vec<(f64, f64)> = taus.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
    let rows: Result<Vec<_>, Error> = cells
        .par_iter()
        .map(|&(tau, x)| {
            let z = neutral_field(&s, tau, x, &ctx.quad)?;
            Ok(vec![Field::Num(tau), x.into(), z.re.into(), z.im.into()])
        })
        .collect();
    let mut t = Table::new([
        with_unit("tau", units::TIME),
        with_unit("x", units::LENGTH),
        "Re_psi".to_string(),
        "Im_psi".to_string(),
    ]);
    for r in rows? {
        t.push(r);
    }
    ctx.emit("neutral_field", &t, stdout)
}

fn cmd_validate(ctx: &Context, a: &ValidateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let o = ValidateOptions {
        quad: ctx.quad,
        series: ctx.series,
        variant: a.variant.into(),
    };
    let invariants = a.all || !a.tables;
    let tables = a.all || a.tables || !a.tables;
    let report = validate::run(&o, tables, invariants)?;
    ctx.emit_text("validation.txt", &report.to_text(), stdout)?;
    if let Some(dir) = &ctx.out {
        fs::write(dir.join("validation.json"), report.to_json())?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} of {} checks failed", report.failures(), report.checks.len())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("kgcoherent").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grid_points() {
        let g = GridSpec { start: 0.0, stop: 1.0, step: 0.25 };
        assert_eq!(g.points("t").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = GridSpec { start: 0.0, stop: 0.3, step: 0.1 };
        assert_eq!(g.points("t").unwrap().len(), 4);
        assert!(GridSpec { start: 1.0, stop: 0.0, step: 0.1 }.points("t").is_err());
        assert!(GridSpec { start: 0.0, stop: 1.0, step: 0.0 }.points("t").is_err());
    }

    #[test]
    fn empty_tau_grid_is_usage_error() {
        let (code, _, err) = run_capture(&["free", "--tau-start", "5", "--tau-stop", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("empty"));
    }

    #[test]
    fn vdot_row() {
        let (code, out, _) = run_capture(&["free", "--lambda", "1", "--p-mean", "1", "--observable", "vdot"]);
        assert_eq!(code, EXIT_OK);
        let line = out.lines().nth(1).unwrap();
        let v: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((v - 0.6421).abs() < 5e-4);
    }

    #[test]
    fn unknown_flag_and_help() {
        assert_eq!(run_capture(&["free", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
        assert_eq!(run_capture(&["free", "--table", "2"]).0, EXIT_USAGE);
    }

    #[test]
    fn invalid_parameter_is_usage_error() {
        assert_eq!(run_capture(&["free", "--lambda", "-1", "--observable", "vdot"]).0, EXIT_USAGE);
    }

    #[test]
    fn series_caps_give_numeric_exit() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"series": {"n_max": 5, "ell_max": 5}, "magnetic": {"Lambda": 0.01, "lambda_perp": 0.5}}"#).unwrap();
        let (code, _, err) = run_capture(&["magnetic", "--config", cfg.to_str().unwrap(), "--observable", "conserved"]);
        assert_eq!(code, EXIT_NUMERIC, "{err}");
    }
}
