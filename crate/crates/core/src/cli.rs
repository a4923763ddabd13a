//! Command-line front end: verification suites, continuation solves, and
//! ellipticity diagnostics on user-supplied curvature data.
//!
//! Exit status: 0 when every check passes, 1 when a check or a solver
//! fails (the report is still written), 2 on configuration or input
//! errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use crate::continuation::{
    self, certify_positive, linspace, solve_dhym, solve_sigma_k, NewtonOpts, PathReport,
};
use crate::ellipticity::{
    condition_e_value, full_symbol_scan, min_rank_one, sigma2_pd_criterion, symbol_matrix,
    SymbolProbe,
};
use crate::equations::{
    binomial, closed_sigma2, dhym_angle, factorial, poly_residual, sym3, EquationCoeffs,
};
use crate::forms::{standard_kahler, CurvatureData};
use crate::matrixkit::{random_hermitian, random_matrix, random_unit_vector, CMatrix};
use crate::models::{self, j_path, k_of_t, vbma_extend, vbma_path, PathPoint};
use crate::report::{Check, RunReport};
use crate::tol;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "vbforms",
    version,
    about = "Pointwise vector-bundle equation laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a verification suite: vbma-path | vbma-extended | j-path | sigma2-lemmas.
    Verify {
        suite: String,
        /// Grid points along the path parameter.
        #[arg(long)]
        grid: Option<usize>,
        /// Random trials for the sigma2 suites.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Extra base dimensions for vbma-extended.
        #[arg(long, default_value_t = 0)]
        extra_dims: usize,
        /// Extra bundle rank for vbma-extended.
        #[arg(long, default_value_t = 0)]
        extra_rank: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Override the path-residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the path-table CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a continuation family: sigma-k | dhym.
    Solve {
        family: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Newton residual tolerance override.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Ellipticity diagnostics on a curvature JSON document.
    Ellipticity {
        /// CurvatureData document ({n, r, terms: [{I, J, re, im}]}).
        #[arg(long)]
        input: PathBuf,
        /// Equation: vbma | sigma-k | j | dhym.
        #[arg(long, default_value = "vbma")]
        equation: String,
        #[arg(long)]
        k: Option<usize>,
        /// Expected rank of the input (validated when given).
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidParam(_) | Error::Parse(_) | Error::Io(_) | Error::Shape(_) => 2,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Verify {
            suite,
            grid,
            trials,
            extra_dims,
            extra_rank,
            seed,
            tol,
            out,
            csv,
        } => {
            let (report, path) = match suite.as_str() {
                "vbma-path" => {
                    suite_vbma_path(grid.unwrap_or(101), tol.unwrap_or(tol::PATH_RESIDUAL))
                }
                "vbma-extended" => suite_vbma_extended(
                    grid.unwrap_or(51),
                    extra_dims,
                    extra_rank,
                    tol.unwrap_or(tol::PATH_RESIDUAL),
                ),
                "j-path" => suite_j_path(grid.unwrap_or(201), tol.unwrap_or(tol::PATH_RESIDUAL)),
                "sigma2-lemmas" => suite_sigma2(trials, seed).map(|r| (r, Vec::new())),
                other => Err(Error::InvalidParam(format!(
                    "unknown verify suite '{other}'"
                ))),
            }?;
            if let Some(path_buf) = csv {
                let mut file = std::fs::File::create(path_buf)?;
                models::write_path_csv(&mut file, &path)?;
            }
            finish(report, out)
        }
        Command::Solve {
            family,
            k,
            n,
            eps,
            theta,
            delta,
            grid,
            seed,
            tol,
            out,
            csv,
        } => {
            if eps < 0.0 {
                return Err(Error::InvalidParam("eps must be >= 0".into()));
            }
            let mut opts = NewtonOpts::default();
            if let Some(t) = tol {
                if t <= 0.0 {
                    return Err(Error::InvalidParam("tol must be positive".into()));
                }
                opts.tol = t;
            }
            let (report, path_report) = match family.as_str() {
                "sigma-k" => {
                    let k = k.unwrap_or(3);
                    let n = n.unwrap_or(k + 1);
                    if k < 3 || k >= n {
                        return Err(Error::InvalidParam(format!(
                            "sigma-k wants 3 <= k < n, got k={k}, n={n}"
                        )));
                    }
                    run_sigma_k(k, n, eps, grid.unwrap_or(21), &opts, seed)?
                }
                "dhym" => {
                    let n = n.unwrap_or(3);
                    if n < 3 {
                        return Err(Error::InvalidParam(format!("dhym wants n >= 3, got {n}")));
                    }
                    if delta <= 0.0 || delta >= 1.0 {
                        return Err(Error::InvalidParam(format!(
                            "dhym wants 0 < delta < 1 (the Jacobian vanishes at t = 0), got {delta}"
                        )));
                    }
                    if theta <= 0.0 {
                        return Err(Error::InvalidParam("theta must be positive".into()));
                    }
                    run_dhym(n, eps, theta, delta, grid.unwrap_or(20), &opts, seed)?
                }
                other => {
                    return Err(Error::InvalidParam(format!(
                        "unknown solve family '{other}'"
                    )))
                }
            };
            if let Some(path_buf) = csv {
                let mut file = std::fs::File::create(path_buf)?;
                path_report.write_csv(&mut file)?;
            }
            finish(report, out)
        }
        Command::Ellipticity {
            input,
            equation,
            k,
            r,
            samples,
            restarts,
            seed,
            out,
        } => {
            let text = std::fs::read_to_string(&input)?;
            let data = CurvatureData::from_json(&text)?;
            if let Some(want) = r {
                if data.r() != want {
                    return Err(Error::InvalidParam(format!(
                        "input has rank {}, expected {}",
                        data.r(),
                        want
                    )));
                }
            }
            let report = cmd_ellipticity(&data, &equation, k, samples, restarts, seed)?;
            finish(report, out)
        }
    }
}

fn finish(report: RunReport, out: Option<PathBuf>) -> Result<i32> {
    report.print_lines();
    if let Some(path) = out {
        std::fs::write(path, report.to_json())?;
    }
    Ok(if report.pass { 0 } else { 1 })
}

// --- verify suites ----------------------------------------------------------

/// vbMA path: equation residual against K(t), the certified K minimum, and
/// the witness behaviour at the endpoints.
pub fn suite_vbma_path(grid: usize, res_tol: f64) -> Result<(RunReport, Vec<PathPoint>)> {
    let mut report = RunReport::new("verify", "vbma-path", json!({"grid": grid, "tol": res_tol}));
    let omega = standard_kahler(3, 3);
    let eq = EquationCoeffs::vbma(3);
    let probe = SymbolProbe::coordinate(3, 3, 1, 0, 0);

    let mut max_residual = 0.0f64;
    let mut max_affine_dev = 0.0f64;
    let mut min_label = f64::INFINITY;
    let mut points = Vec::with_capacity(grid);
    let mut witness0 = 0.0;
    let mut witness1 = 0.0;
    for i in 0..grid {
        let t = i as f64 / (grid - 1) as f64;
        let pt = vbma_path(t)?;
        let f = pt.data.assemble();
        let top = f.power(3)?.top_coefficient()?;
        let k_id = CMatrix::identity(3).scaled_re(k_of_t(t));
        max_residual = max_residual.max(top.sub(&k_id).fro_norm());
        let value = condition_e_value(&f, &omega, &eq, &probe)?;
        if i == 0 {
            witness0 = value;
        }
        if i == grid - 1 {
            witness1 = value;
        }
        let closed_ratio = (3.0 * pt.label("p") * pt.label("x") - pt.label("b").powi(2)) / 3.0;
        if i == 0 {
            // value(0) calibrates the ratio.
        }
        max_affine_dev = max_affine_dev.max((value / witness0 - closed_ratio).abs());
        for name in ["p", "q", "r", "s", "u", "v", "x", "y", "z"] {
            min_label = min_label.min(pt.label(name));
        }
        points.push(pt);
    }
    let (k_min, t_min) = certify_positive(k_of_t, (0.0, 1.0), grid.max(101))?;

    report.push(Check::le("residual_matches_k", max_residual, res_tol));
    report.push(Check::near("k_min_value", k_min, 0.76, 0.01));
    report.push(Check::near("k_min_location", t_min, 0.78, 0.01));
    report.push(Check::gt("k_min_positive", k_min, 0.0));
    report.push(Check::le("witness_affine_identity", max_affine_dev, 1e-9));
    report.push(Check::le(
        "witness_at_t1",
        witness1.abs(),
        tol::WITNESS_ZERO,
    ));
    report.push(Check::gt("witness_at_t0", witness0, 1.0));
    report.push(Check::gt("diagonal_labels_positive", min_label, 0.0));
    report.set_value("k_min", json!({"value": k_min, "location": t_min}));
    Ok((report, points))
}

/// Block extension: the equation constant and the witness staying a fixed
/// positive multiple of `3px − b²` in the normalised labels.
pub fn suite_vbma_extended(
    grid: usize,
    extra_dims: usize,
    extra_rank: usize,
    res_tol: f64,
) -> Result<(RunReport, Vec<PathPoint>)> {
    let mut report = RunReport::new(
        "verify",
        "vbma-extended",
        json!({"grid": grid, "extra_dims": extra_dims, "extra_rank": extra_rank, "tol": res_tol}),
    );
    let n = 3 + extra_dims;
    let r = 3 + extra_rank;
    let constant = binomial(extra_dims + 3, 3) * factorial(extra_dims) * 6.0;
    let omega = standard_kahler(n, r);
    let eq = EquationCoeffs::vbma(n);
    let probe = SymbolProbe::coordinate(n, r, 1, 0, 0);

    let mut max_residual = 0.0f64;
    let mut max_ratio_dev = 0.0f64;
    let mut ratio = 0.0f64;
    let mut witness0 = 0.0f64;
    let mut points = Vec::with_capacity(grid);
    for i in 0..grid {
        let t = i as f64 / (grid - 1) as f64;
        let pt = vbma_extend(&vbma_path(t)?, extra_rank, extra_dims)?;
        let f = pt.data.assemble();
        let top = f.power(n)?.top_coefficient()?;
        let want = CMatrix::identity(r).scaled_re(constant);
        max_residual = max_residual.max(top.sub(&want).fro_norm() / (1.0 + constant));
        let value = condition_e_value(&f, &omega, &eq, &probe)?;
        let expr = 3.0 * pt.label("p") * pt.label("x") - pt.label("b").powi(2);
        if i == 0 {
            ratio = value / expr;
            witness0 = value;
        }
        max_ratio_dev = max_ratio_dev.max((value - ratio * expr).abs() / (1.0 + witness0.abs()));
        points.push(pt);
    }
    report.push(Check::le("equation_constant", max_residual, res_tol));
    report.push(Check::le(
        "witness_ratio_deviation",
        max_ratio_dev,
        tol::WITNESS_ZERO,
    ));
    report.push(Check::gt("witness_ratio_positive", ratio, 0.0));
    report.set_value("equation_constant", json!(constant));
    report.set_value("witness_ratio", json!(ratio));
    Ok((report, points))
}

/// J path: residual on both segments, the segment-one reciprocal identity,
/// continuity at the chart boundary, and the closed-form witness.
pub fn suite_j_path(grid: usize, res_tol: f64) -> Result<(RunReport, Vec<PathPoint>)> {
    let mut report = RunReport::new("verify", "j-path", json!({"grid": grid, "tol": res_tol}));
    let omega = standard_kahler(3, 3);
    let eq = EquationCoeffs::j_equation(3);
    let probe = SymbolProbe::coordinate(3, 3, 2, 0, 0);

    let mut max_residual = 0.0f64;
    let mut max_identity = 0.0f64;
    let mut max_witness_dev = 0.0f64;
    let mut calibration = 0.0f64;
    let mut witness0 = 0.0f64;
    let mut witness_end = 0.0f64;
    let mut points = Vec::with_capacity(grid);
    for i in 0..grid {
        let s = 2.0 * i as f64 / (grid - 1) as f64;
        let pt = j_path(s)?;
        let f = pt.data.assemble();
        max_residual = max_residual.max(poly_residual(&f, &omega, &eq)?.fro_norm());
        if s <= 1.0 {
            let inv = 1.0 / pt.label("r") + 1.0 / pt.label("v") + 1.0 / pt.label("z");
            max_identity = max_identity.max((inv - 3.0).abs());
        }
        let value = condition_e_value(&f, &omega, &eq, &probe)?;
        let expr = 2.0
            * (3.0 * pt.label("p") * pt.label("s")
                - pt.label("a").powi(2)
                - pt.label("p")
                - pt.label("s"));
        if i == 0 {
            calibration = value / expr;
            witness0 = value;
        }
        max_witness_dev =
            max_witness_dev.max((value - calibration * expr).abs() / (1.0 + witness0.abs()));
        if i == grid - 1 {
            witness_end = value;
        }
        points.push(pt);
    }
    // Chart continuity at s = 1: both charts evaluated at the boundary.
    let left = models::j_path_chart1(1.0);
    let right = models::j_path_chart2(0.0);
    let boundary = models::LABEL_NAMES
        .iter()
        .map(|k| (left.label(k) - right.label(k)).abs())
        .fold(0.0f64, f64::max);

    report.push(Check::le("residual_max", max_residual, res_tol));
    report.push(Check::le(
        "segment1_identity",
        max_identity,
        tol::SEGMENT_IDENTITY,
    ));
    report.push(Check::le(
        "chart_continuity",
        boundary,
        tol::SEGMENT_IDENTITY,
    ));
    report.push(Check::le(
        "witness_closed_form",
        max_witness_dev,
        tol::WITNESS_ZERO,
    ));
    report.push(Check::gt("witness_at_start", witness0, 0.0));
    report.push(Check::le(
        "witness_at_end",
        witness_end.abs(),
        tol::WITNESS_ZERO,
    ));
    report.set_value("witness_calibration", json!(calibration));
    Ok((report, points))
}

/// σ_2 suite: closed form versus engine, the kernel identity, and
/// exclusion of positive-definite residuals over singular `Σ_{i≠k}A_i`.
pub fn suite_sigma2(trials: usize, seed: u64) -> Result<RunReport> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut report = RunReport::new(
        "verify",
        "sigma2-lemmas",
        json!({"trials": trials, "seed": seed}),
    );
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);

    // Exact symmetriser identity.
    let e13 = CMatrix::matrix_unit(3, 0, 2);
    let e21 = CMatrix::matrix_unit(3, 1, 0);
    let e32 = CMatrix::matrix_unit(3, 2, 1);
    let sym_dev = sym3(&e13, &e21, &e32).sub(&CMatrix::identity(3)).fro_norm();
    report.push(Check::le("sym3_unit_identity", sym_dev, 0.0));

    // Closed form against the engine for n in {2,3,4}.
    let mut max_rel = 0.0f64;
    for &n in &[2usize, 3, 4] {
        let id_case = CurvatureData::trivial(n, 3, 1.0);
        let sigma2 = EquationCoeffs::sigma_k(2, n)?;
        let omega = standard_kahler(n, 3);
        let engine_id = poly_residual(&id_case.assemble(), &omega, &sigma2)?;
        let constant = engine_id[(0, 0)].re / closed_sigma2(&id_case)[(0, 0)].re;
        for _ in 0..trials {
            let a = (0..n).map(|_| random_hermitian(&mut rng, 3, 1.0)).collect();
            let mut b = BTreeMap::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.7) {
                        b.insert((i, j), random_matrix(&mut rng, 3, 3));
                    }
                }
            }
            let c = CurvatureData::new(n, a, b)?;
            let engine = poly_residual(&c.assemble(), &omega, &sigma2)?;
            let closed = closed_sigma2(&c).scaled_re(constant);
            max_rel = max_rel.max(engine.sub(&closed).fro_norm() / (1.0 + closed.fro_norm()));
        }
    }
    report.push(Check::le("closed_vs_engine", max_rel, tol::CLOSED_FORM_REL));

    // Kernel identity on constructed instances.
    let mut max_violation = 0.0f64;
    for _ in 0..trials {
        let n = 3 + rng.gen_range(0..2usize);
        let r = 3;
        let k = rng.gen_range(0..n);
        let (a, v) = singular_sum_instance(&mut rng, n, r, k);
        let mut lhs = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let braces = crate::equations::sym2(&a[i], &a[j]);
                for p in 0..r {
                    for q in 0..r {
                        lhs += v[p].conj() * braces[(p, q)] * v[q];
                    }
                }
            }
        }
        let mut rhs = 0.0;
        for (i, ai) in a.iter().enumerate() {
            if i == k {
                continue;
            }
            for p in 0..r {
                let mut acc = Complex64::new(0.0, 0.0);
                for q in 0..r {
                    acc += ai[(p, q)] * v[q];
                }
                rhs += acc.norm_sqr();
            }
        }
        max_violation = max_violation.max((lhs.re + rhs).abs() / (1.0 + rhs));
    }
    report.push(Check::le(
        "kernel_identity",
        max_violation,
        tol::CLOSED_FORM_REL,
    ));

    // Positive-definite residual never coexists with a singular sum. The
    // singular boundary is the pointwise-decidable face of "not positive
    // definite"; a hit would contradict the kernel identity above.
    let mut hits = 0usize;
    let boundary_trials = trials * 50;
    for _ in 0..boundary_trials {
        let (n, r) = (3usize, 3usize);
        let k = rng.gen_range(0..n);
        let (a, _) = singular_sum_instance(&mut rng, n, r, k);
        let mut b = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.5) {
                    b.insert((i, j), random_matrix(&mut rng, r, r));
                }
            }
        }
        let cd = CurvatureData::new(n, a, b)?;
        if closed_sigma2(&cd).is_positive_definite()? {
            hits += 1;
        }
    }
    report.push(Check::le("pd_with_singular_sum_hits", hits as f64, 0.0));
    report.set_value("boundary_trials", json!(boundary_trials));
    Ok(report)
}

/// Random Hermitian blocks with `Σ_{i≠k} A_i` singular: one block is
/// corrected so a chosen unit vector lies in the kernel of the sum.
fn singular_sum_instance<R: rand::Rng>(
    rng: &mut R,
    n: usize,
    r: usize,
    k: usize,
) -> (Vec<CMatrix>, Vec<Complex64>) {
    let mut a: Vec<CMatrix> = (0..n).map(|_| random_hermitian(rng, r, 1.0)).collect();
    let v = random_unit_vector(rng, r);
    let fix = if k == n - 1 { n - 2 } else { n - 1 };
    let mut sum = CMatrix::zeros(r, r);
    for (i, ai) in a.iter().enumerate() {
        if i != k {
            sum = sum.add(ai);
        }
    }
    let mut vv = CMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            vv[(i, j)] = v[i] * v[j].conj();
        }
    }
    a[fix] = a[fix]
        .sub(&sum.mul(&vv))
        .sub(&vv.mul(&sum))
        .add(&vv.mul(&sum).mul(&vv));
    (a, v)
}

// --- solve wrappers -----------------------------------------------------------

fn run_sigma_k(
    k: usize,
    n: usize,
    eps: f64,
    grid_points: usize,
    opts: &NewtonOpts,
    seed: u64,
) -> Result<(RunReport, PathReport)> {
    let grid = linspace(0.0, 1.0, grid_points.max(2));
    let path = solve_sigma_k(k, n, eps, &grid, opts, seed)?;
    let mut report = RunReport::new(
        "solve",
        "sigma-k",
        json!({"k": k, "n": n, "eps": eps, "grid": grid_points, "seed": seed, "newton_tol": opts.tol}),
    );
    let max_res = path
        .rows
        .iter()
        .map(|r| r.residual_norm)
        .fold(0.0, f64::max);
    let min_alpha = path
        .rows
        .iter()
        .map(|r| r.triple.alpha)
        .fold(f64::INFINITY, f64::min);
    report.push(Check::le("residual_max", max_res, tol::SOLVED_RESIDUAL));
    report.push(Check::gt("alpha_min", min_alpha, 0.0));
    report.push(Check::le(
        "witness_at_t1",
        path.rows
            .last()
            .map(|r| r.condition_e.abs())
            .unwrap_or(f64::INFINITY),
        tol::WITNESS_ZERO,
    ));
    report.push(Check::gt(
        "witness_at_t0",
        path.rows.first().map(|r| r.condition_e).unwrap_or(0.0),
        0.0,
    ));
    // The implicit-function Jacobian factor 36(1+t)(1+2t)(1−0.9t).
    let factor = |t: f64| 36.0 * (1.0 + t) * (1.0 + 2.0 * t) * (1.0 - 0.9 * t);
    let (jmin, jarg) = certify_positive(factor, (0.0, 1.0), 101)?;
    report.push(Check::near("jacobian_factor_min", jmin, 21.6, 1e-10));
    report.push(Check::near("jacobian_factor_argmin", jarg, 1.0, 1e-10));
    // Deviation from the closed-form unknowns: exact recovery at ε = 0,
    // a first-order band for small ε.
    let dev = path
        .rows
        .iter()
        .map(|row| {
            (row.unknowns["u"] - models::vbma_u(row.t))
                .abs()
                .max((row.unknowns["z"] - models::vbma_z(row.t)).abs())
        })
        .fold(0.0, f64::max);
    if eps == 0.0 {
        report.push(Check::le("closed_form_recovery", dev, tol::CLOSED_FORM_REL));
    } else {
        report.push(Check::le("perturbation_bound", dev, 100.0 * eps));
    }
    report.set_value("fitted_amp_sq", json!(path.fitted_amp_sq));
    report.set_value(
        "witness_monotone_decreasing",
        json!(path.witness_monotone_decreasing),
    );
    Ok((report, path))
}

fn run_dhym(
    n: usize,
    eps: f64,
    theta: f64,
    delta: f64,
    grid_points: usize,
    opts: &NewtonOpts,
    seed: u64,
) -> Result<(RunReport, PathReport)> {
    let path = solve_dhym(n, eps, theta, delta, grid_points, opts, seed)?;
    let mut report = RunReport::new(
        "solve",
        "dhym",
        json!({
            "n": n, "eps": eps, "theta": theta, "delta": delta,
            "grid": grid_points, "seed": seed, "newton_tol": opts.tol
        }),
    );
    let max_res = path
        .rows
        .iter()
        .map(|r| r.residual_norm)
        .fold(0.0, f64::max);
    report.push(Check::le("residual_max", max_res, tol::SOLVED_RESIDUAL));
    let dev_v = path
        .rows
        .iter()
        .map(|row| (row.unknowns["v"] - models::j_seg2_v(row.t)).abs())
        .fold(0.0, f64::max);
    report.push(Check::le(
        "v_deviation",
        dev_v,
        10.0 * eps.max(f64::MIN_POSITIVE),
    ));
    report.push(Check::gt(
        "min_rank_one_at_delta",
        path.min_rank_one_at_start.unwrap_or(f64::NEG_INFINITY),
        0.0,
    ));
    report.push(Check::le(
        "witness_at_t1",
        path.rows
            .last()
            .map(|r| r.condition_e.abs())
            .unwrap_or(f64::INFINITY),
        tol::WITNESS_ZERO,
    ));
    report.set_value("fitted_amp_sq", json!(path.fitted_amp_sq));
    report.set_value(
        "theta_hat",
        json!(continuation::dhym_theta_hat(n, eps, theta)),
    );
    Ok((report, path))
}

// --- ellipticity command -------------------------------------------------------

fn probe_json(value: f64, probe: &SymbolProbe) -> serde_json::Value {
    let r = probe.g.rows();
    let mut re = vec![vec![0.0; r]; r];
    let mut im = vec![vec![0.0; r]; r];
    for i in 0..r {
        for j in 0..r {
            re[i][j] = probe.g[(i, j)].re;
            im[i][j] = probe.g[(i, j)].im;
        }
    }
    json!({
        "value": value,
        "a": probe.a.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
        "g": {"re": re, "im": im},
    })
}

/// Ellipticity diagnostics on curvature data; the CLI and the file-input
/// round-trip tests share this entry point.
pub fn cmd_ellipticity(
    data: &CurvatureData,
    equation: &str,
    k: Option<usize>,
    samples: usize,
    restarts: usize,
    seed: u64,
) -> Result<RunReport> {
    let n = data.n();
    let omega = standard_kahler(n, data.r());
    let f = data.assemble();
    let (eq, sigma2_mode) = match equation {
        "vbma" => (EquationCoeffs::vbma(n), false),
        "j" => (EquationCoeffs::j_equation(n), false),
        "sigma-k" => {
            let k = k.ok_or_else(|| Error::InvalidParam("sigma-k needs --k".into()))?;
            (EquationCoeffs::sigma_k(k, n)?, k == 2)
        }
        "dhym" => {
            let angle = dhym_angle(&f, &omega)?;
            (EquationCoeffs::dhym(n, angle), false)
        }
        other => return Err(Error::InvalidParam(format!("unknown equation '{other}'"))),
    };
    let mut report = RunReport::new(
        "ellipticity",
        equation,
        json!({
            "n": n, "r": data.r(), "samples": samples, "restarts": restarts, "seed": seed,
            "k": k,
        }),
    );
    let (min_value, probe) = min_rank_one(&f, &omega, &eq, restarts, seed)?;
    let scan = full_symbol_scan(&f, &omega, &eq, samples, seed)?;
    report.set_value("min_rank_one", probe_json(min_value, &probe));
    report.set_value(
        "symbol_scan",
        json!({
            "min_eigenvalue": scan.min_eigenvalue,
            "min_singular": scan.min_singular,
            "worst_chi": scan.worst_chi.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
            "note": "sampled necessary check, not a proof of ellipticity",
        }),
    );
    if sigma2_mode {
        let per_k: Vec<f64> = (0..n)
            .map(|dir| sigma2_pd_criterion(data, dir))
            .collect::<Result<_>>()?;
        report.set_value("sigma2_criterion_per_k", json!(per_k));
    }
    if equation == "dhym" {
        report.set_value("theta_hat", json!(dhym_angle(&f, &omega)?));
    }
    // Symbol at the worst covector, for downstream inspection.
    let s = symbol_matrix(&f, &omega, &eq, &scan.worst_chi)?;
    report.set_value("worst_symbol_min_singular", json!(s.min_singular_value()?));
    Ok(report)
}
