use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use koopman_lyap::basis::{build_orthonormal_basis, OrthonormalBasis};
use koopman_lyap::flow::{
    check_decay_bound, check_linearization, check_port_hamiltonian, check_tangent, cost_oracle, cost_oracle_batch,
    estimate_omega0, omega0_grid, read_points_csv, write_oracle_csv, HypothesisReport,
};
use koopman_lyap::gramian::{
    assemble_generator, assemble_observation, decay_fit, laguerre_coefficients, lyap_residual, pde_residual,
    solve_gramian, sos_eval, write_eigenfunction_csv, write_eigenvalues_csv, write_value_csv, GramianSolution,
    LaguerreConfig, SumOfSquares,
};
use koopman_lyap::linalg::{solve_lyapunov_kron, DenseMatrix};
use koopman_lyap::model::{cartesian, linspace, NuclearCost};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ProblemConfig, Reference};
use crate::report::RunReport;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Check the hypotheses on the field, weight and domain.
    Check,
    /// Discretize, solve the Lyapunov equation and write eigenvalues, eigenfunctions and v.
    Solve,
    /// Trajectory-integrated v at configured or seeded points.
    Oracle,
    /// Error of the sum-of-squares v against the oracle or the exact quadratic.
    Compare,
    /// Laguerre coefficients of one observable along one trajectory.
    Laguerre,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Oracle => "oracle",
            Command::Compare => "compare",
            Command::Laguerre => "laguerre",
        }
    }
}

fn stage(name: &'static str) -> impl Fn(koopman_lyap::Error) -> CliError {
    move |source| CliError::Stage { stage: name, source }
}

struct Output<'a> {
    dir: &'a Path,
    hash: &'a str,
}

impl Output<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Creates `name` and writes the config-hash comment line.
    fn csv(&self, name: &str, report: &mut RunReport) -> Result<BufWriter<File>, CliError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let mut out = BufWriter::new(file);
        writeln!(out, "# config_hash={}", self.hash).map_err(|source| CliError::Io { path, source })?;
        report.files.push(name.into());
        Ok(out)
    }

    fn finish(&self, name: &str, mut out: BufWriter<File>) -> Result<(), CliError> {
        out.flush().map_err(|source| CliError::Io {
            path: self.path(name),
            source,
        })
    }
}

fn seconds(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

fn random_points(n: usize, lower: &[f64], upper: &[f64], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| lower.iter().zip(upper).map(|(&a, &b)| rng.gen_range(a..=b)).collect())
        .collect()
}

/// Runs `command` and writes its files and `report.txt` into `out_dir`.
pub fn run(command: Command, cfg: &ProblemConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let out = Output { dir: out_dir, hash: &cfg.hash };
    let mut report = RunReport::new(command.name(), &cfg.hash, cfg.seed());
    report.info("system", &cfg.problem.name);
    let start = Instant::now();
    match command {
        Command::Check => check(cfg, &mut report)?,
        Command::Solve => solve_command(cfg, &out, &mut report)?,
        Command::Oracle => oracle(cfg, &out, &mut report)?,
        Command::Compare => compare(cfg, &out, &mut report)?,
        Command::Laguerre => laguerre(cfg, &out, &mut report)?,
    }
    report.timing("total", seconds(start));
    let path = out.path("report.txt");
    fs::write(&path, report.to_string()).map_err(|source| CliError::Io { path, source })?;
    Ok(report)
}

fn check(cfg: &ProblemConfig, report: &mut RunReport) -> Result<(), CliError> {
    let p = &cfg.problem;
    let c = &cfg.raw.check;
    report.hypotheses.push(check_tangent(&p.field, &p.domain, c.boundary_points).map_err(stage("tangent check"))?);

    let grid = omega0_grid(&p.domain, c.grid);
    let omega0 = estimate_omega0(&p.field, &p.weight, &grid).map_err(stage("omega0 estimate"))?;
    report.hypotheses.push(HypothesisReport::new("omega0", omega0 < 0.0, [("omega0", omega0)]));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let n_times = 100;
    let times: Vec<f64> = (1..=n_times).map(|k| c.horizon * k as f64 / n_times as f64).collect();
    let starts = random_points(c.trajectories, p.domain.lower(), p.domain.upper(), &mut rng);
    let mut worst: Option<HypothesisReport> = None;
    for z in starts.iter().filter(|z| !p.weight.is_singular_at(z)) {
        let r = check_decay_bound(&p.field, &p.weight, z, &times, omega0, &cfg.integrator).map_err(stage("decay bound"))?;
        let v = r.get("max_violation").unwrap_or(f64::INFINITY);
        if worst.as_ref().map_or(true, |w| v > w.get("max_violation").unwrap_or(f64::NEG_INFINITY)) {
            worst = Some(r);
        }
    }
    report.hypotheses.extend(worst);

    report
        .hypotheses
        .push(check_linearization(&p.field, p.domain.equilibrium()).map_err(stage("linearization"))?);
    if let Some(ph) = &p.port_hamiltonian {
        let grid: Vec<Vec<f64>> = grid.into_iter().filter(|x| !p.weight.is_singular_at(x)).collect();
        report
            .hypotheses
            .push(check_port_hamiltonian(&ph.hamiltonian, &ph.j, &ph.r, &grid).map_err(stage("port-Hamiltonian check"))?);
    }
    report.info("decay_bound_trajectories", starts.len());
    Ok(())
}

struct Solved {
    sol: GramianSolution,
    sos: SumOfSquares,
}

fn solve(cfg: &ProblemConfig, report: &mut RunReport) -> Result<Solved, CliError> {
    let p = &cfg.problem;
    let t = Instant::now();
    let onb: Arc<OrthonormalBasis> = Arc::new(
        build_orthonormal_basis(&cfg.discretization, &p.domain, &p.weight).map_err(stage("basis construction"))?,
    );
    report.timing("basis", seconds(t));
    let t = Instant::now();
    let gen = assemble_generator(&p.field, &onb).map_err(stage("generator assembly"))?;
    let obs = assemble_observation(&p.cost, &onb).map_err(stage("observation assembly"))?;
    report.timing("assembly", seconds(t));
    let t = Instant::now();
    let sol = solve_gramian(&gen, &obs).map_err(stage("Lyapunov solve"))?;
    report.timing("lyapunov", seconds(t));
    let sos = SumOfSquares::new(&sol, cfg.tolerances().trunc_tol).map_err(stage("sum of squares"))?;

    report.info("raw_basis_size", onb.raw().len());
    report.info("rank", onb.rank());
    report.info("quadrature_points", onb.grid().len());
    report.info("retained_terms", sos.len());
    report.residual("lyapunov_relative", lyap_residual(&gen, &obs, &sol).map_err(stage("residual"))?);
    report.residual("orthonormality", onb.orthonormality_error().map_err(stage("residual"))?);
    report.residual("max_eigenvalue_clamp", sol.max_clamp);
    for (i, r) in obs.residuals.iter().enumerate() {
        report.residual(&format!("observable_{}_projection", i + 1), *r);
    }
    report.info("generator_abscissa", format!("{:.12e}", sol.generator_abscissa));
    if let Ok(fit) = decay_fit(&sol.eigenvalues, 5) {
        report.info("decay_m_hat", format!("{:.6}", fit.m_hat));
        report.info("decay_fit_quality", format!("{:.6}", fit.fit_quality));
        report.info("decay_fit_range", format!("{}..={}", fit.n_min, fit.n_max));
    }
    Ok(Solved { sol, sos })
}

fn solve_command(cfg: &ProblemConfig, out: &Output, report: &mut RunReport) -> Result<(), CliError> {
    let Solved { sol, sos } = solve(cfg, report)?;
    let p = &cfg.problem;
    report.eigenvalues = sol.eigenvalues.iter().copied().take(20).collect();

    let t = Instant::now();
    let mut f = out.csv("eigenvalues.csv", report)?;
    write_eigenvalues_csv(&mut f, &sol.eigenvalues).map_err(stage("eigenvalue output"))?;
    out.finish("eigenvalues.csv", f)?;

    let grid = p.domain.uniform_grid(cfg.raw.output.grid);
    for i in 0..cfg.raw.output.eigenfunctions.min(sos.len()) {
        let name = format!("eigenfunctions_{}.csv", i + 1);
        let mut f = out.csv(&name, report)?;
        write_eigenfunction_csv(&mut f, &sos, i, &grid).map_err(stage("eigenfunction output"))?;
        out.finish(&name, f)?;
    }
    let mut f = out.csv("value.csv", report)?;
    write_value_csv(&mut f, &sos, &grid).map_err(stage("value output"))?;
    out.finish("value.csv", f)?;
    report.timing("output", seconds(t));

    let stats = pde_residual(&sos, &p.field, &p.cost, &grid).map_err(stage("PDE residual"))?;
    report.residual("pde_max_on_output_grid", stats.max);
    report.residual("pde_rms_on_output_grid", stats.rms);
    Ok(())
}

fn oracle(cfg: &ProblemConfig, out: &Output, report: &mut RunReport) -> Result<(), CliError> {
    let p = &cfg.problem;
    let o = &cfg.raw.oracle;
    let mut points = o.points.clone();
    if let Some(path) = &o.file {
        let file = File::open(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        points.extend(read_points_csv(BufReader::new(file), p.field.dim_in()).map_err(stage("oracle points"))?);
    }
    let n_random = o.random.unwrap_or(if points.is_empty() { 100 } else { 0 });
    let lower = o.lower.as_deref().unwrap_or(p.domain.lower());
    let upper = o.upper.as_deref().unwrap_or(p.domain.upper());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    points.extend(random_points(n_random, lower, upper, &mut rng));

    let t = Instant::now();
    let results = cost_oracle_batch(&p.field, &p.cost, &points, &cfg.integrator, cfg.tolerances().oracle_tail_tol);
    report.timing("oracle", seconds(t));
    let mut f = out.csv("oracle.csv", report)?;
    write_oracle_csv(&mut f, &points, &results).map_err(|source| CliError::Io {
        path: out.path("oracle.csv"),
        source,
    })?;
    out.finish("oracle.csv", f)?;

    let failed = results.iter().filter(|r| r.is_err()).count();
    let max_tail = results.iter().flatten().map(|c| c.tail_bound).fold(0.0, f64::max);
    let max_horizon = results.iter().flatten().map(|c| c.horizon).fold(0.0, f64::max);
    report.info("points", points.len());
    report.info("failed", failed);
    report.error("max_tail_bound", max_tail);
    report.info("max_horizon", format!("{max_horizon:.6e}"));
    if let Some(e) = results.iter().find_map(|r| r.as_ref().err()) {
        report.failures.push(format!("{failed} oracle evaluations failed, first: {e}"));
    }
    Ok(())
}

/// `X` with `v(z) = (z − x_eq)ᵀ X (z − x_eq)` for a linear field and linear observables.
fn quadratic_value(cfg: &ProblemConfig) -> Result<DenseMatrix, CliError> {
    let p = &cfg.problem;
    let d = p.field.dim_in();
    let origin = vec![0.0; d];
    let mut q = DenseMatrix::zeros(d, d);
    for c in p.cost.observables() {
        let a = c.gradient(&origin).map_err(stage("quadratic reference"))?;
        for i in 0..d {
            for j in 0..d {
                q[(i, j)] += a[i] * a[j];
            }
        }
    }
    solve_lyapunov_kron(&p.field.linear_part().transpose(), &q).map_err(stage("quadratic reference"))
}

fn compare(cfg: &ProblemConfig, out: &Output, report: &mut RunReport) -> Result<(), CliError> {
    let p = &cfg.problem;
    let c = &cfg.raw.compare;
    let Solved { sos, .. } = solve(cfg, report)?;
    let lower = c.lower.as_deref().unwrap_or(p.domain.lower());
    let upper = c.upper.as_deref().unwrap_or(p.domain.upper());
    let mut points = if c.grid > 0 {
        let axes: Vec<Vec<f64>> = lower.iter().zip(upper).map(|(&a, &b)| linspace(a, b, c.grid)).collect();
        cartesian(&axes)
    } else {
        Vec::new()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    points.extend(random_points(c.random, lower, upper, &mut rng));
    let eq = p.domain.equilibrium();
    points.retain(|z| z.iter().zip(eq).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() >= c.exclude_radius);
    if points.is_empty() {
        return Err(CliError::Config("compare has no points (set compare.grid or compare.random)".into()));
    }

    let t = Instant::now();
    let reference: Vec<Result<f64, String>> = match cfg.reference {
        Reference::Quadratic => {
            let x = quadratic_value(cfg)?;
            points
                .iter()
                .map(|z| {
                    let s: Vec<f64> = z.iter().zip(eq).map(|(a, b)| a - b).collect();
                    let xs = x.matvec(&s).map_err(|e| e.to_string())?;
                    Ok(s.iter().zip(&xs).map(|(a, b)| a * b).sum())
                })
                .collect()
        }
        Reference::Oracle => cost_oracle_batch(&p.field, &p.cost, &points, &cfg.integrator, cfg.tolerances().oracle_tail_tol)
            .into_iter()
            .map(|r| r.map(|c| c.value).map_err(|e| e.to_string()))
            .collect(),
    };
    report.timing("reference", seconds(t));

    let name = "compare.csv";
    let mut f = out.csv(name, report)?;
    let io = |source| CliError::Io { path: out.path(name), source };
    let mut header: Vec<String> = (1..=p.field.dim_in()).map(|k| format!("x{k}")).collect();
    header.extend(["v_sos", "v_ref", "abs_error"].map(String::from));
    writeln!(f, "{}", header.join(",")).map_err(io)?;
    let (mut max, mut sq, mut n, mut failed) = (0.0f64, 0.0, 0usize, 0usize);
    let mut argmax = vec![f64::NAN; p.field.dim_in()];
    for (z, r) in points.iter().zip(&reference) {
        let v = sos_eval(&sos, z).map_err(stage("sum-of-squares evaluation"))?.0;
        let coords: Vec<String> = z.iter().map(|x| format!("{x:e}")).collect();
        match r {
            Ok(vr) => {
                let err = (v - vr).abs();
                if err > max {
                    max = err;
                    argmax = z.clone();
                }
                sq += err * err;
                n += 1;
                writeln!(f, "{},{v:e},{vr:e},{err:e}", coords.join(",")).map_err(io)?;
            }
            Err(_) => {
                failed += 1;
                writeln!(f, "{},{v:e},NaN,NaN", coords.join(",")).map_err(io)?;
            }
        }
    }
    out.finish(name, f)?;

    report.info("reference", if cfg.reference == Reference::Oracle { "oracle" } else { "quadratic" });
    report.info("points", points.len());
    report.info("failed_references", failed);
    report.error("max_abs", max);
    report.error("rms_abs", if n > 0 { (sq / n as f64).sqrt() } else { f64::NAN });
    report.info("argmax", format!("{argmax:?}"));
    if failed > 0 {
        report.failures.push(format!("{failed} reference evaluations failed"));
    }
    if let Some(tol) = c.tolerance {
        if !(max <= tol) {
            report.failures.push(format!("max_abs {max:e} exceeds compare.tolerance {tol:e}"));
        }
    }
    Ok(())
}

fn laguerre(cfg: &ProblemConfig, out: &Output, report: &mut RunReport) -> Result<(), CliError> {
    let p = &cfg.problem;
    let l = &cfg.raw.laguerre;
    let z = l.point.clone().unwrap_or_else(|| {
        p.domain
            .equilibrium()
            .iter()
            .zip(p.domain.upper())
            .map(|(e, u)| 0.5 * (e + u))
            .collect()
    });
    let c = &p.cost.observables()[l.observable];
    let tol = cfg.tolerances().laguerre_tail_tol;
    let lcfg = LaguerreConfig {
        tail_tol: tol,
        ..LaguerreConfig::default()
    };
    let t = Instant::now();
    let dec = laguerre_coefficients(&p.field, c, &z, l.terms, &cfg.integrator, &lcfg).map_err(stage("Laguerre coefficients"))?;
    report.timing("laguerre", seconds(t));
    let single = NuclearCost::new(vec![c.clone()]).map_err(stage("Laguerre oracle"))?;
    let oracle = cost_oracle(&p.field, &single, &z, &cfg.integrator, tol).map_err(stage("Laguerre oracle"))?;

    let name = "laguerre.csv";
    let mut f = out.csv(name, report)?;
    let io = |source| CliError::Io { path: out.path(name), source };
    writeln!(f, "n,a_n,parseval_partial_sum").map_err(io)?;
    let sums = dec.parseval_partial_sums();
    for (n, (a, s)) in dec.coefficients.iter().zip(&sums).enumerate() {
        writeln!(f, "{n},{a:e},{s:e}").map_err(io)?;
    }
    out.finish(name, f)?;

    let parseval = sums.last().copied().unwrap_or(0.0);
    report.info("point", format!("{z:?}"));
    report.info("observable", l.observable + 1);
    report.info("terms", l.terms);
    report.info("horizon", format!("{:.6e}", dec.horizon));
    report.info("parseval_sum", format!("{parseval:.12e}"));
    report.info("oracle_value", format!("{:.12e}", oracle.value));
    report.error("parseval_gap", (parseval - oracle.value).abs());
    report.error("integrand_tail_bound", dec.tail_bound);
    Ok(())
}
