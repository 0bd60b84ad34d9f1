use bosebox::energy::{constant_term_position, constant_term_spectral};
use bosebox::fock::solve_toy;
use bosebox::green::{neumann_green, FreeKernelSpec};
use bosebox::kernels::{build_w_and_k, hyperbolic_split, project_eta, verify_prop_eta};
use bosebox::potential::PotentialSpec;
use bosebox::runs::{run, study, Route, Trace};
use bosebox::scattering::{default_r_max, scatter, scattering_length, DEFAULT_STEPS};
use bosebox::thermo::lower_bound_rows;
use bosebox::twobody::{rescale_to_unit_box, solve_with, verify_minimizer_properties, BoxGeometry, PotentialSampling, SolverOptions};
use bosebox::{dump, Potential, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bosebox", version, about = "Dilute Bose gas in a Neumann box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PotentialArgs {
    /// soft-sphere, truncated-polynomial or tabulated-radial
    #[arg(long, default_value = "soft-sphere")]
    potential: String,
    #[arg(long = "v0", default_value_t = 1.0)]
    v0: f64,
    #[arg(long = "r0", default_value_t = 1.0)]
    r0: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// CSV table of (r, V) for tabulated-radial
    #[arg(long)]
    table: Option<String>,
}

impl PotentialArgs {
    fn build(&self) -> Result<Potential> {
        PotentialSpec { kind: self.potential.clone(), v0: self.v0, r0: self.r0, kappa: self.kappa, table: self.table.clone() }.build(None)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    CellCenter,
    CellAverage,
}

impl From<Sampling> for PotentialSampling {
    fn from(s: Sampling) -> Self {
        match s {
            Sampling::CellCenter => PotentialSampling::CellCenter,
            Sampling::CellAverage => PotentialSampling::CellAverage,
        }
    }
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Box side ℓ
    #[arg(long = "box", default_value_t = 8.0)]
    ell: f64,
    /// Grid points per axis
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Sampling::CellCenter)]
    sampling: Sampling,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum RouteArg {
    Spectral,
    Position,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-energy scattering solution and scattering length
    Scatter {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
    /// Neumann Green function of the D-dimensional box by image sums
    Green {
        #[arg(long, default_value_t = 6)]
        dim: usize,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long = "box", default_value_t = 1.0)]
        ell: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long, default_value_t = bosebox::green::DEFAULT_RADIUS)]
        radius: usize,
    },
    /// Two-body ground state and minimizer properties
    Twobody {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Write the minimizer as a binary field dump
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Correlation kernel η and its hyperbolic functions
    Kernels {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 2.0)]
        n: f64,
        #[arg(long, default_value_t = bosebox::kernels::DEFAULT_COARSE)]
        coarse: usize,
    },
    /// The constant C_{n,ℓ} by the spectral and/or position route
    Energy {
        #[command(flatten)]
        pot: PotentialArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 2.0)]
        n: f64,
        #[arg(long, default_value_t = 7)]
        cutoff: usize,
        #[arg(long, value_enum, default_value_t = RouteArg::Both)]
        route: RouteArg,
        /// CSV file for the cutoff convergence trace
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exact diagonalization in a truncated mode basis
    Fock {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        modes: usize,
        #[arg(long = "box", default_value_t = 4.0)]
        ell: f64,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = bosebox::energy::DEFAULT_ORDER)]
        order: usize,
    },
    /// Thermodynamic lower-bound curve as CSV
    Thermo {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, default_value_t = 1e-8)]
        rho_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        rho_max: f64,
        #[arg(long, default_value_t = 7)]
        points: usize,
        #[arg(long, default_value_t = bosebox::thermo::DEFAULT_REGIME)]
        c: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        c_const: f64,
    },
    /// Run a configuration and report log-log slopes of tracked quantities
    Study { config: PathBuf },
    /// Run a configuration and write its record
    Run { config: PathBuf },
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn print<T: Serialize>(v: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn solve(pot: &Potential, grid: &GridArgs) -> Result<bosebox::twobody::TwoBodySolution> {
    let geom = BoxGeometry::new(grid.d, grid.ell, grid.m)?;
    solve_with(&geom, pot, SolverOptions { tol: grid.tol, sampling: grid.sampling.into(), ..Default::default() })
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Scatter { pot, r_max, steps } => {
            let p = pot.build()?;
            print(&scatter(&p, r_max.unwrap_or_else(|| default_r_max(&p)), steps)?)
        }
        Command::Green { dim, eps, ell, x, y, radius } => {
            let spec = FreeKernelSpec::new(dim, eps)?;
            print(&neumann_green(&spec, ell, &x, &y, radius)?)
        }
        Command::Twobody { pot, grid, dump: path } => {
            let p = pot.build()?;
            let sol = solve(&p, &grid)?;
            let rep = verify_minimizer_properties(&sol, scattering_length(&p)?);
            if let Some(path) = path {
                dump::write_field(&path, &sol.field)?;
            }
            print(&json!({ "solution": sol, "report": rep }))
        }
        Command::Kernels { pot, grid, n, coarse } => {
            let p = pot.build()?;
            let sol = solve(&p, &grid)?;
            let (unit, _) = rescale_to_unit_box(&sol);
            let (_, k) = build_w_and_k(&unit, grid.ell, n, coarse)?;
            let (eta, _) = project_eta(&k);
            let hyp = hyperbolic_split(&eta);
            print(&verify_prop_eta(&eta, &hyp, n, grid.ell, p.kappa()))
        }
        Command::Energy { pot, grid, n, cutoff, route, trace } => {
            let p = pot.build()?;
            let sol = solve(&p, &grid)?;
            let route = match route {
                RouteArg::Spectral => Route::Spectral,
                RouteArg::Position => Route::Position,
                RouteArg::Both => Route::Both,
            };
            let mut out = serde_json::Map::new();
            if route != Route::Position {
                let (unit, _) = rescale_to_unit_box(&sol);
                let (_, k) = build_w_and_k(&unit, grid.ell, n, grid.m)?;
                let (eta, _) = project_eta(&k);
                let mut t = Trace::new(&["cutoff", "total", "truncation_estimate"]);
                let top = cutoff.min(grid.m - 1);
                for cut in 1..=top {
                    let b = constant_term_spectral(&p, n, grid.ell, &eta, cut, sol.sampling)?;
                    t.push(vec![cut as f64, b.total, b.truncation_estimate]);
                    if cut == top {
                        out.insert("spectral".into(), serde_json::to_value(b)?);
                    }
                }
                if let Some(path) = trace {
                    dump::write_atomic(&path, t.to_csv().as_bytes())?;
                }
            }
            if route != Route::Spectral {
                out.insert("position".into(), serde_json::to_value(constant_term_position(n, &sol)?)?);
            }
            print(&out)
        }
        Command::Fock { pot, n, modes, ell, d, order } => {
            let s = solve_toy(&pot.build()?, d, ell, n, modes, order)?;
            print(&json!({ "energy": s.energy, "depletion": s.depletion, "basis_dim": s.basis_dim, "summary": s }))
        }
        Command::Thermo { pot, rho_min, rho_max, points, c, c_const } => {
            let p = pot.build()?;
            let a = scattering_length(&p)?;
            let k = points.max(2);
            let rhos: Vec<f64> = (0..k).map(|i| rho_min * (rho_max / rho_min).powf(i as f64 / (k - 1) as f64)).collect();
            let rows = lower_bound_rows(a, p.kappa(), &rhos, c, c_const)?;
            let mut t = Trace::new(&["rho", "ell", "bound", "lhy", "ratio", "regime_ok"]);
            for r in rows {
                t.push(vec![r.rho, r.ell, r.bound, r.lhy, r.ratio, if r.regime_ok { 1.0 } else { 0.0 }]);
            }
            emit(&t.to_csv())
        }
        Command::Study { config } => print(&study(&config)?),
        Command::Run { config } => {
            let out = run(&config)?;
            print(&json!({ "output": out.output_dir, "record_sha256": out.record_sha256, "config_hash": out.record.config_hash }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
