//! Table and plot reproduction: runs grids of (solver, p, h) cells from a
//! flat TOML configuration and writes CSV and SVG files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{MassRegularization, PowerLaw};
use crate::precon::MgConfig;
use crate::problems::{Domain, Problem, ProblemSpec};
use crate::solvers::{
    dual_pd_solve, dual_tpd_solve, newton_solve, pgd_solve, DualPdOptions, Init, InnerSolver,
    PgdMode, PgdOptions, PgdPreconditioner, Preconditioner, SolveReport, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ErrorTable,
    IterationTable,
    SolverCompare,
    TimeGrowth,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ErrorTable => "error-table",
            Experiment::IterationTable => "iteration-table",
            Experiment::SolverCompare => "solver-compare",
            Experiment::TimeGrowth => "time-growth",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error-table" => Ok(Experiment::ErrorTable),
            "iteration-table" => Ok(Experiment::IterationTable),
            "solver-compare" => Ok(Experiment::SolverCompare),
            "time-growth" => Ok(Experiment::TimeGrowth),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    DualtpdJ,
    DualtpdM,
    Newton,
    Dualpd,
    PgdFixed,
    PgdLs,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::DualtpdJ => "dualtpd-j",
            SolverKind::DualtpdM => "dualtpd-m",
            SolverKind::Newton => "newton",
            SolverKind::Dualpd => "dualpd",
            SolverKind::PgdFixed => "pgd-fixed",
            SolverKind::PgdLs => "pgd-ls",
        }
    }
}

/// Either one value for every exponent or one per entry of `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerP {
    One(f64),
    Each(Vec<f64>),
}

impl PerP {
    fn get(&self, i: usize, n: usize, key: &str) -> Result<f64> {
        match self {
            PerP::One(v) => Ok(*v),
            PerP::Each(v) if v.len() == n => Ok(v[i]),
            PerP::Each(v) => Err(Error::Config(format!(
                "`{key}` has {} entries but `p` has {n}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Zero,
    Random,
}

fn default_p() -> Vec<f64> {
    vec![1.5]
}
fn default_inv_h() -> Vec<usize> {
    vec![32, 64, 128]
}
fn default_solvers() -> Vec<SolverKind> {
    vec![SolverKind::DualtpdJ]
}
fn default_inits() -> Vec<InitKind> {
    vec![InitKind::Zero]
}
fn one() -> PerP {
    PerP::One(1.0)
}
fn default_lambda() -> PerP {
    PerP::One(PowerLaw::DEFAULT_LAMBDA)
}
fn default_eps0() -> PerP {
    PerP::One(PowerLaw::DEFAULT_EPS0)
}
fn default_amplitude() -> f64 {
    ProblemSpec::DEFAULT_AMPLITUDE
}
fn default_seed() -> u64 {
    1
}
fn default_tol_mg() -> f64 {
    1e-2
}
fn default_max_it() -> usize {
    5
}
fn default_stop_tol() -> f64 {
    1e-6
}
fn default_error_stop_tol() -> f64 {
    1e-10
}
fn default_max_outer() -> usize {
    1000
}
fn default_theta() -> f64 {
    0.8
}
fn default_pgd_eps() -> f64 {
    1e-4
}
fn default_mass_branch() -> String {
    "shifted".into()
}

/// Flat configuration shared by all experiments. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_domain")]
    pub domain: String,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    /// Mesh sizes as `1/h`.
    #[serde(default = "default_inv_h")]
    pub inv_h: Vec<usize>,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    /// Step size used by any solver without its own `alpha_*` entry.
    #[serde(default = "one")]
    pub alpha: PerP,
    pub alpha_dualtpd_j: Option<PerP>,
    pub alpha_dualtpd_m: Option<PerP>,
    pub alpha_dualpd: Option<PerP>,
    pub alpha_pgd_fixed: Option<PerP>,
    pub alpha_pgd_ls: Option<PerP>,
    #[serde(default = "default_inits")]
    pub inits: Vec<InitKind>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: PerP,
    #[serde(default = "default_eps0")]
    pub eps0: PerP,
    /// `shifted` or `literal` reading of the small-flux mass coefficient.
    #[serde(default = "default_mass_branch")]
    pub mass_branch: String,
    /// Amplitude of the square's manufactured solution.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_tol_mg")]
    pub tol_mg: f64,
    #[serde(default = "default_max_it")]
    pub max_it: usize,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    /// Stopping tolerance for the error table's reference solves.
    #[serde(default = "default_error_stop_tol")]
    pub error_stop_tol: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Regularization of the weighted PGD preconditioner; `0` selects the
    /// unit Laplacian.
    #[serde(default = "default_pgd_eps")]
    pub pgd_eps: f64,
    /// Run independent cells on the rayon thread pool.
    #[serde(default)]
    pub parallel: bool,
}

fn default_domain() -> String {
    "square".into()
}

impl Default for BenchConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain()?;
        self.mass_branch()?;
        if self.p.is_empty()
            || self.inv_h.is_empty()
            || self.solvers.is_empty()
            || self.inits.is_empty()
        {
            return Err(Error::Config(
                "`p`, `inv_h`, `solvers` and `inits` must be non-empty".into(),
            ));
        }
        let n = self.p.len();
        for i in 0..n {
            self.alpha.get(i, n, "alpha")?;
            self.lambda.get(i, n, "lambda")?;
            self.eps0.get(i, n, "eps0")?;
            for s in &self.solvers {
                self.alpha_for(*s, i)?;
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain> {
        self.domain.parse()
    }

    fn mass_branch(&self) -> Result<MassRegularization> {
        match self.mass_branch.as_str() {
            "shifted" => Ok(MassRegularization::ShiftedNorm),
            "literal" => Ok(MassRegularization::Literal),
            other => Err(Error::Config(format!("unknown mass_branch `{other}`"))),
        }
    }

    pub fn alpha_for(&self, solver: SolverKind, i: usize) -> Result<f64> {
        let n = self.p.len();
        let specific = match solver {
            SolverKind::DualtpdJ => &self.alpha_dualtpd_j,
            SolverKind::DualtpdM => &self.alpha_dualtpd_m,
            SolverKind::Dualpd => &self.alpha_dualpd,
            SolverKind::PgdFixed => &self.alpha_pgd_fixed,
            SolverKind::PgdLs => &self.alpha_pgd_ls,
            SolverKind::Newton => return Ok(1.0),
        };
        match specific {
            Some(v) => v.get(i, n, solver.name()),
            None => self.alpha.get(i, n, "alpha"),
        }
    }

    /// Solver configuration for exponent index `i`.
    pub fn solver_config(
        &self,
        solver: SolverKind,
        i: usize,
        init: InitKind,
    ) -> Result<SolverConfig> {
        let n = self.p.len();
        Ok(SolverConfig {
            alpha: self.alpha_for(solver, i)?,
            preconditioner: match solver {
                SolverKind::DualtpdM => Preconditioner::Mass,
                _ => Preconditioner::Jacobian,
            },
            lambda: self.lambda.get(i, n, "lambda")?,
            eps0: self.eps0.get(i, n, "eps0")?,
            mass_branch: self.mass_branch()?,
            inner: InnerSolver::Multigrid(MgConfig {
                tol: self.tol_mg,
                max_cycles: self.max_it,
                ..MgConfig::default()
            }),
            stop_tol: self.stop_tol,
            max_outer: self.max_outer,
            init: match init {
                InitKind::Zero => Init::Zero,
                InitKind::Random => Init::Random(self.seed),
            },
            ..SolverConfig::default()
        })
    }

    pub fn problem_spec(&self, p: f64, inv_h: usize) -> Result<ProblemSpec> {
        Ok(
            ProblemSpec::with_mesh_size(self.domain()?, PowerLaw::new(p)?, inv_h)?
                .with_amplitude(self.amplitude),
        )
    }

    /// Single-line rendering used in CSV headers.
    pub fn summary(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Runs one solver on an assembled problem. PGD reports only `u`; its `σ`
/// is taken as `σ(u)`.
pub fn run_solver(
    problem: &Problem,
    solver: SolverKind,
    cfg: &SolverConfig,
    theta: f64,
    pgd_eps: f64,
) -> Result<(Vec<f64>, Vec<f64>, SolveReport)> {
    let pgd_pre = if pgd_eps > 0.0 {
        PgdPreconditioner::Weighted { eps: pgd_eps }
    } else {
        PgdPreconditioner::Poisson
    };
    match solver {
        SolverKind::DualtpdJ | SolverKind::DualtpdM => {
            let (s, r) = dual_tpd_solve(problem, cfg)?;
            Ok((s.sigma, s.u, r))
        }
        SolverKind::Newton => {
            let (s, r) = newton_solve(problem, cfg)?;
            Ok((s.sigma, s.u, r))
        }
        SolverKind::Dualpd => {
            let opts = DualPdOptions {
                theta,
                ..DualPdOptions::default()
            };
            let (s, r) = dual_pd_solve(problem, cfg, &opts)?;
            Ok((s.sigma, s.u, r))
        }
        SolverKind::PgdFixed | SolverKind::PgdLs => {
            let mode = if solver == SolverKind::PgdFixed {
                PgdMode::Fixed
            } else {
                PgdMode::LineSearch
            };
            let mut cfg = *cfg;
            if mode == PgdMode::LineSearch {
                // the line-search variant uses (near) exact inner solves
                cfg.inner = InnerSolver::Multigrid(MgConfig {
                    tol: 1e-8,
                    max_cycles: 50,
                    ..MgConfig::default()
                });
            }
            let law = cfg.law_for(problem)?;
            let (u, r) = pgd_solve(problem, &cfg, &PgdOptions::new(mode, pgd_pre))?;
            let (_, sigma) = crate::solvers::pgd_gradient(problem, &law, &u);
            Ok((sigma, u, r))
        }
    }
}

/// One result row.
#[derive(Debug, Clone)]
pub struct Cell {
    pub solver: SolverKind,
    pub p: f64,
    pub alpha: f64,
    pub inv_h: usize,
    pub init: InitKind,
    pub dofs: usize,
    pub report: SolveReport,
    pub u_error: f64,
    pub sigma_error: f64,
}

/// Written files and whether every cell converged.
#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub files: Vec<PathBuf>,
    pub cells: Vec<Cell>,
    pub all_converged: bool,
    /// Log-log slope of seconds against DoF (time-growth only).
    pub slope: Option<f64>,
}

struct Job {
    solver: SolverKind,
    pi: usize,
    inv_h: usize,
    init: InitKind,
}

fn run_jobs(cfg: &BenchConfig, jobs: Vec<Job>, stop_tol: Option<f64>) -> Result<Vec<Cell>> {
    // assemble each (p, h) once
    let mut keys: Vec<(usize, usize)> = jobs.iter().map(|j| (j.pi, j.inv_h)).collect();
    keys.sort_unstable();
    keys.dedup();
    let build = |&(pi, inv_h): &(usize, usize)| -> Result<((usize, usize), Problem)> {
        Ok(((pi, inv_h), cfg.problem_spec(cfg.p[pi], inv_h)?.assemble()?))
    };
    let problems: Vec<((usize, usize), Problem)> = if cfg.parallel {
        keys.par_iter().map(build).collect::<Result<_>>()?
    } else {
        keys.iter().map(build).collect::<Result<_>>()?
    };
    let lookup =
        |pi: usize, inv_h: usize| &problems.iter().find(|(k, _)| *k == (pi, inv_h)).unwrap().1;
    let run = |job: &Job| -> Result<Cell> {
        let problem = lookup(job.pi, job.inv_h);
        let mut scfg = cfg.solver_config(job.solver, job.pi, job.init)?;
        if let Some(t) = stop_tol {
            scfg.stop_tol = t;
        }
        let (sigma, u, report) = run_solver(problem, job.solver, &scfg, cfg.theta, cfg.pgd_eps)?;
        Ok(Cell {
            solver: job.solver,
            p: cfg.p[job.pi],
            alpha: scfg.alpha,
            inv_h: job.inv_h,
            init: job.init,
            dofs: problem.num_dofs(),
            u_error: problem.u_error(&u)?,
            sigma_error: problem.sigma_error(&sigma)?,
            report,
        })
    };
    if cfg.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    }
}

fn header(cfg: &BenchConfig, experiment: Experiment) -> String {
    format!(
        "# experiment: {}\n# config: {}\n",
        experiment.name(),
        cfg.summary()
    )
}

fn init_name(i: InitKind) -> &'static str {
    match i {
        InitKind::Zero => "zero",
        InitKind::Random => "random",
    }
}

/// `log2(e_coarse / e_fine) / log2(h_coarse / h_fine)`.
pub fn observed_rate(e_coarse: f64, e_fine: f64, inv_h_coarse: usize, inv_h_fine: usize) -> f64 {
    (e_coarse / e_fine).ln() / (inv_h_fine as f64 / inv_h_coarse as f64).ln()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Runs `experiment` and writes its files into `out`.
pub fn run_experiment(
    experiment: Experiment,
    cfg: &BenchConfig,
    out: &Path,
) -> Result<BenchOutcome> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    match experiment {
        Experiment::ErrorTable => run_error_table(cfg, out),
        Experiment::IterationTable | Experiment::SolverCompare => {
            run_iteration_table(experiment, cfg, out)
        }
        Experiment::TimeGrowth => run_time_growth(cfg, out),
    }
}

fn run_error_table(cfg: &BenchConfig, out: &Path) -> Result<BenchOutcome> {
    let mut inv_h = cfg.inv_h.clone();
    inv_h.sort_unstable();
    let mut jobs = Vec::new();
    for pi in 0..cfg.p.len() {
        for &h in &inv_h {
            jobs.push(Job {
                solver: SolverKind::DualtpdJ,
                pi,
                inv_h: h,
                init: InitKind::Zero,
            });
        }
    }
    let cells = run_jobs(cfg, jobs, Some(cfg.error_stop_tol))?;
    let mut csv = header(cfg, Experiment::ErrorTable);
    csv.push_str("p,h,dofs,u_error,sigma_error,u_rate,sigma_rate,iterations,converged\n");
    for (k, c) in cells.iter().enumerate() {
        let prev = k.checked_sub(1).map(|j| &cells[j]).filter(|q| q.p == c.p);
        let (ur, sr) = match prev {
            Some(q) => (
                format!(
                    "{:.3}",
                    observed_rate(q.u_error, c.u_error, q.inv_h, c.inv_h)
                ),
                format!(
                    "{:.3}",
                    observed_rate(q.sigma_error, c.sigma_error, q.inv_h, c.inv_h)
                ),
            ),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            csv,
            "{},1/{},{},{:.6e},{:.6e},{},{},{},{}",
            c.p,
            c.inv_h,
            c.dofs,
            c.u_error,
            c.sigma_error,
            ur,
            sr,
            c.report.iterations,
            c.report.converged
        );
    }
    let path = out.join("error_table.csv");
    fs::write(&path, csv)?;
    Ok(BenchOutcome {
        all_converged: cells.iter().all(|c| c.report.converged),
        files: vec![path],
        cells,
        slope: None,
    })
}

fn run_iteration_table(
    experiment: Experiment,
    cfg: &BenchConfig,
    out: &Path,
) -> Result<BenchOutcome> {
    let inits: Vec<InitKind> = match experiment {
        Experiment::SolverCompare => cfg.inits.clone(),
        _ => vec![cfg.inits[0]],
    };
    let mut jobs = Vec::new();
    for &solver in &cfg.solvers {
        for pi in 0..cfg.p.len() {
            for &init in &inits {
                for &inv_h in &cfg.inv_h {
                    jobs.push(Job {
                        solver,
                        pi,
                        inv_h,
                        init,
                    });
                }
            }
        }
    }
    let cells = run_jobs(cfg, jobs, None)?;
    let mut csv = header(cfg, experiment);
    csv.push_str("solver,p,alpha,h,init,dofs,iterations,avg_inner,final_residual,u_error,seconds,converged\n");
    for c in &cells {
        let _ = writeln!(
            csv,
            "{},{},{},1/{},{},{},{},{:.2},{:.3e},{:.4e},{:.4},{}",
            c.solver.name(),
            c.p,
            c.alpha,
            c.inv_h,
            init_name(c.init),
            c.dofs,
            c.report.iterations,
            c.report.avg_inner(),
            c.report.final_residual(),
            c.u_error,
            c.report.seconds,
            c.report.converged
        );
    }
    let path = out.join(format!("{}.csv", experiment.name().replace('-', "_")));
    fs::write(&path, csv)?;
    Ok(BenchOutcome {
        all_converged: cells.iter().all(|c| c.report.converged),
        files: vec![path],
        cells,
        slope: None,
    })
}

fn run_time_growth(cfg: &BenchConfig, out: &Path) -> Result<BenchOutcome> {
    let mut inv_h = cfg.inv_h.clone();
    inv_h.sort_unstable();
    let solver = cfg.solvers[0];
    let jobs = inv_h
        .iter()
        .map(|&h| Job {
            solver,
            pi: 0,
            inv_h: h,
            init: cfg.inits[0],
        })
        .collect();
    // timings are only meaningful one cell at a time
    let sequential = BenchConfig {
        parallel: false,
        ..cfg.clone()
    };
    let cells = run_jobs(&sequential, jobs, None)?;
    let points: Vec<(f64, f64)> = cells
        .iter()
        .map(|c| (c.dofs as f64, c.report.seconds.max(1e-9)))
        .collect();
    let slope = loglog_slope(&points);
    let mut csv = header(cfg, Experiment::TimeGrowth);
    csv.push_str("solver,p,h,dofs,iterations,seconds,converged\n");
    for c in &cells {
        let _ = writeln!(
            csv,
            "{},{},1/{},{},{},{:.4},{}",
            c.solver.name(),
            c.p,
            c.inv_h,
            c.dofs,
            c.report.iterations,
            c.report.seconds,
            c.report.converged
        );
    }
    match slope {
        Some(s) => {
            let _ = writeln!(csv, "# fitted_slope: {s:.3}");
        }
        None => csv.push_str("# fitted_slope: n/a\n"),
    }
    let csv_path = out.join("time_growth.csv");
    fs::write(&csv_path, csv)?;
    let svg_path = out.join("time_growth.svg");
    fs::write(&svg_path, loglog_svg(&points, slope, "DoF", "seconds"))?;
    Ok(BenchOutcome {
        all_converged: cells.iter().all(|c| c.report.converged),
        files: vec![csv_path, svg_path],
        cells,
        slope,
    })
}

/// Log-log polyline plot with decade ticks.
pub fn loglog_svg(points: &[(f64, f64)], slope: Option<f64>, xlabel: &str, ylabel: &str) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const M: f64 = 60.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    if points.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let (x0, x1) = (
        lx.iter().cloned().fold(f64::INFINITY, f64::min).floor(),
        lx.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil(),
    );
    let (y0, y1) = (
        ly.iter().cloned().fold(f64::INFINITY, f64::min).floor(),
        ly.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil(),
    );
    let (x1, y1) = (
        if x1 > x0 { x1 } else { x0 + 1.0 },
        if y1 > y0 { y1 } else { y0 + 1.0 },
    );
    let px = |v: f64| M + (v - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |v: f64| H - M - (v - y0) / (y1 - y0) * (H - 2.0 * M);
    let _ = writeln!(
        s,
        r#"<path d="M{} {} L{} {} L{} {}" fill="none" stroke="black"/>"#,
        M,
        M,
        M,
        H - M,
        W - M,
        H - M
    );
    for d in x0 as i32..=x1 as i32 {
        let x = px(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/>"#,
            H - M,
            H - M + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">1e{d}</text>"#,
            H - M + 20.0
        );
    }
    for d in y0 as i32..=y1 as i32 {
        let y = py(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.1}" x2="{M}" y2="{y:.1}" stroke="black"/>"#,
            M - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"#,
            M - 8.0,
            y + 4.0
        );
    }
    let pts: Vec<String> = lx
        .iter()
        .zip(&ly)
        .map(|(&x, &y)| format!("{:.1},{:.1}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        pts.join(" ")
    );
    for (&x, &y) in lx.iter().zip(&ly) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="steelblue"/>"#,
            px(x),
            py(y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
    if let Some(k) = slope {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">slope {k:.2}</text>"#,
            M + 10.0,
            M + 10.0
        );
    }
    s.push_str("</svg>\n");
    s
}
