//! Newton root-finding and the homotopy drivers that realise the σ_k and
//! dHYM constructions at small ε, plus 1-D positivity certification.
//!
//! The continuation scheme is deliberately simple: at every grid value of
//! `t` the 2- or 3-dimensional system is solved independently by Newton
//! from the ε = 0 closed-form solution (no t-to-t warm starting), with the
//! off-diagonal amplitude fixed beforehand by an affine fit that drives
//! the positivity witness to zero at `t = 1`. Residuals always come from
//! the full wedge engine, never from the closed forms, so the closed
//! forms remain an independent cross-check.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ellipticity::{
    condition_e_value, full_symbol_scan, min_rank_one, SymbolProbe, SymbolWorkspace,
};
use crate::equations::{off_diagonal_norm, poly_residual, EquationCoeffs, ResidualTriple};
use crate::forms::{diag_form, MatrixForm};
use crate::matrixkit::{real_condition, real_solve};
use crate::models::{self, KnownScaffold, ScaffoldKind};
use crate::tol;
use crate::{Error, Result};

/// Newton driver options.
#[derive(Debug, Clone)]
pub struct NewtonOpts {
    /// Residual infinity-norm target.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative step for the central finite-difference Jacobian.
    pub fd_step: f64,
}

impl Default for NewtonOpts {
    fn default() -> Self {
        NewtonOpts {
            tol: tol::NEWTON_TOL,
            max_iter: 50,
            fd_step: tol::FD_STEP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Condition number of the last Jacobian factored.
    pub jacobian_cond: f64,
}

/// Damped-free Newton with a central finite-difference Jacobian.
/// Non-convergence and near-singular Jacobians are hard errors carrying
/// the residual trace and the offending point.
pub fn newton<F>(mut f: F, x0: &[f64], opts: &NewtonOpts, context: &str) -> Result<NewtonResult>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut trace = Vec::new();
    for iteration in 0..=opts.max_iter {
        let fx = f(&x)?;
        if fx.len() != d {
            return Err(Error::Shape(format!(
                "residual returns {} values for {} unknowns",
                fx.len(),
                d
            )));
        }
        let norm = fx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        trace.push(norm);
        if iteration == opts.max_iter {
            if norm <= opts.tol {
                return Ok(NewtonResult {
                    x,
                    iterations: iteration,
                    residual_norm: norm,
                    jacobian_cond: f64::NAN,
                });
            }
            return Err(Error::NoConvergence {
                context: context.to_string(),
                iterations: opts.max_iter,
                residual: norm,
                trace,
            });
        }
        // The Jacobian is validated even at a converged iterate: a root
        // with a singular linearisation (the implicit-function-theorem
        // failure mode) is reported as an error, not as success.
        let mut jac = vec![vec![0.0f64; d]; d];
        for i in 0..d {
            let orig = x[i];
            let h = opts.fd_step * (1.0 + orig.abs());
            x[i] = orig + h;
            let fp = f(&x)?;
            x[i] = orig - h;
            let fm = f(&x)?;
            x[i] = orig;
            for row in 0..d {
                jac[row][i] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        let cond = real_condition(&jac);
        if !cond.is_finite() || cond > tol::JACOBIAN_COND_MAX {
            return Err(Error::SingularJacobian {
                context: format!("{context}, x = {x:?}"),
                cond,
            });
        }
        if norm <= opts.tol {
            return Ok(NewtonResult {
                x,
                iterations: iteration,
                residual_norm: norm,
                jacobian_cond: cond,
            });
        }
        let rhs: Vec<f64> = fx.iter().map(|v| -v).collect();
        let step = real_solve(jac, rhs).ok_or_else(|| Error::SingularJacobian {
            context: format!("{context}, x = {x:?}"),
            cond,
        })?;
        for i in 0..d {
            x[i] += step[i];
        }
    }
    unreachable!("loop returns or errors");
}

/// Sampling-based positivity certificate: grid scan plus golden-section
/// refinement around the best cell, endpoints always included. Returns
/// `(min value, argmin)`; "certified" means certified by sampling, which
/// is how the reports label it.
pub fn certify_positive<F>(f: F, interval: (f64, f64), grid_points: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if grid_points < 101 {
        return Err(Error::InvalidParam(format!(
            "certify_positive wants >= 101 grid points, got {grid_points}"
        )));
    }
    let (lo, hi) = interval;
    if hi <= lo {
        return Err(Error::InvalidParam("empty interval".into()));
    }
    let mut best = (f(lo), lo);
    let mut best_idx = 0usize;
    for i in 0..grid_points {
        let t = lo + (hi - lo) * i as f64 / (grid_points - 1) as f64;
        let v = f(t);
        if v < best.0 {
            best = (v, t);
            best_idx = i;
        }
    }
    // Golden-section refinement on the bracket around the best cell.
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut a = (lo + (best_idx.saturating_sub(1)) as f64 * step).max(lo);
    let mut b = (lo + ((best_idx + 1) as f64) * step).min(hi);
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        let probe = if fc < fd { (fc, c) } else { (fd, d) };
        if probe.0 < best.0 {
            best = probe;
        }
    }
    // Endpoint values participate exactly.
    for t in [lo, hi] {
        let v = f(t);
        if v < best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// Equation coefficients for a scaffold. At ε = 0 the dHYM family
/// degenerates (the whole residual carries a factor sin(εθ)), so that
/// limit is represented by its normalised form, the J-equation.
pub fn scaffold_equation(sc: &KnownScaffold) -> Result<EquationCoeffs> {
    match sc.kind {
        ScaffoldKind::SigmaK { k } => EquationCoeffs::sigma_k(k, sc.n),
        ScaffoldKind::Dhym { theta } => {
            if sc.eps > 0.0 {
                Ok(EquationCoeffs::dhym(
                    sc.n,
                    dhym_theta_hat(sc.n, sc.eps, theta),
                ))
            } else {
                Ok(EquationCoeffs::j_equation(sc.n))
            }
        }
    }
}

/// `θ̂ = −εθ + πn/2`.
pub fn dhym_theta_hat(n: usize, eps: f64, theta: f64) -> f64 {
    -eps * theta + std::f64::consts::FRAC_PI_2 * n as f64
}

pub fn scaffold_omega(sc: &KnownScaffold) -> Result<MatrixForm> {
    diag_form(sc.n, 3, &sc.omega_weights())
}

/// The designated positivity witness of each family: `(e_2, E_11)` for
/// σ_k, `(e_3, E_11)` for dHYM.
pub fn scaffold_witness(sc: &KnownScaffold) -> SymbolProbe {
    match sc.kind {
        ScaffoldKind::SigmaK { .. } => SymbolProbe::coordinate(sc.n, 3, 1, 0, 0),
        ScaffoldKind::Dhym { .. } => SymbolProbe::coordinate(sc.n, 3, 2, 0, 0),
    }
}

fn witness_at(sc: &KnownScaffold, unknowns: &[f64]) -> Result<f64> {
    let eq = scaffold_equation(sc)?;
    let omega = scaffold_omega(sc)?;
    let f = sc.curvature(unknowns)?.assemble();
    condition_e_value(&f, &omega, &eq, &scaffold_witness(sc))
}

/// Fit the squared off-diagonal amplitude so the positivity witness
/// vanishes at `t = 1`. The witness is exactly affine in the squared
/// amplitude for these block shapes; the fit is evaluated at 0 and 1,
/// checked at a third sample, and must have a negative slope.
pub fn fit_offdiag_amplitude(scaffold: &KnownScaffold) -> Result<f64> {
    let at_one = match scaffold.kind {
        ScaffoldKind::SigmaK { k } => models::sigma_k_scaffold(1.0, k, scaffold.n, scaffold.eps)?,
        ScaffoldKind::Dhym { theta } => {
            models::dhym_scaffold(1.0, scaffold.n, scaffold.eps, theta)?
        }
    };
    let guesses = at_one.initial_guesses();
    let e0 = witness_at(&at_one.clone().with_amplitude_sq(0.0), &guesses)?;
    let e1 = witness_at(&at_one.clone().with_amplitude_sq(1.0), &guesses)?;
    let slope = e1 - e0;
    if slope >= 0.0 {
        return Err(Error::InfeasibleFit { slope });
    }
    let amp_sq = -e0 / slope;
    let third = witness_at(&at_one.with_amplitude_sq(amp_sq), &guesses)?;
    if third.abs() > tol::AFFINE_FIT * (1.0 + e0.abs()) {
        return Err(Error::InvalidParam(format!(
            "amplitude fit is not affine: residual {third:.3e} at the fitted point"
        )));
    }
    Ok(amp_sq)
}

/// One solved grid point.
#[derive(Debug, Clone, Serialize)]
pub struct PathRow {
    pub t: f64,
    /// Distance of the residual matrix from the solution manifold
    /// (`‖R − α Id‖` for σ_k, `‖R‖` for dHYM).
    pub residual_norm: f64,
    pub k_value: Option<f64>,
    pub triple: ResidualTriple,
    pub condition_e: f64,
    pub unknowns: BTreeMap<String, f64>,
    pub symbol_scan_min: f64,
}

/// Full record of a continuation run.
#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub equation: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub fitted_amp_sq: f64,
    /// Observed (not assumed) monotone decrease of the witness values.
    pub witness_monotone_decreasing: bool,
    pub min_rank_one_at_start: Option<f64>,
    pub rows: Vec<PathRow>,
}

impl PathReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Fixed columns:
    /// `t,residual_norm,k_value,alpha,beta,gamma,condition_e,symbol_scan_min,u,v,z`.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "t,residual_norm,k_value,alpha,beta,gamma,condition_e,symbol_scan_min,u,v,z"
        )?;
        for row in &self.rows {
            let field = |o: Option<f64>| o.map(|v| format!("{v}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                row.t,
                row.residual_norm,
                field(row.k_value),
                row.triple.alpha,
                row.triple.beta,
                row.triple.gamma,
                row.condition_e,
                row.symbol_scan_min,
                field(row.unknowns.get("u").copied()),
                field(row.unknowns.get("v").copied()),
                field(row.unknowns.get("z").copied()),
            )?;
        }
        Ok(())
    }

    fn check_monotone(&mut self) {
        self.witness_monotone_decreasing = self
            .rows
            .windows(2)
            .all(|w| w[1].condition_e <= w[0].condition_e + 1e-12);
    }
}

/// Uniform grid including both endpoints.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

const ROW_SCAN_SAMPLES: usize = 24;

/// Solve the σ_k continuation on a `t` grid: fit the amplitude once, then
/// per grid point Newton-solve `(u, z)` so the diagonal residual entries
/// equalise (`β − α = 0`, `γ − α = 0`), asserting `α > 0` throughout.
pub fn solve_sigma_k(
    k: usize,
    n: usize,
    eps: f64,
    grid: &[f64],
    opts: &NewtonOpts,
    seed: u64,
) -> Result<PathReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParam("empty grid".into()));
    }
    let amp_sq = fit_offdiag_amplitude(&models::sigma_k_scaffold(grid[0], k, n, eps)?)?;
    let mut report = PathReport {
        equation: "sigma-k".into(),
        params: BTreeMap::from([
            ("k".to_string(), k as f64),
            ("n".to_string(), n as f64),
            ("eps".to_string(), eps),
        ]),
        seed,
        fitted_amp_sq: amp_sq,
        witness_monotone_decreasing: false,
        min_rank_one_at_start: None,
        rows: Vec::new(),
    };
    for (idx, &t) in grid.iter().enumerate() {
        let sc = models::sigma_k_scaffold(t, k, n, eps)?.with_amplitude_sq(amp_sq);
        let eq = scaffold_equation(&sc)?;
        let omega = scaffold_omega(&sc)?;
        let residual = |x: &[f64]| -> Result<Vec<f64>> {
            let r = poly_residual(&sc.curvature(x)?.assemble(), &omega, &eq)?;
            let tr = ResidualTriple::from_matrix(&r)?;
            Ok(vec![tr.beta - tr.alpha, tr.gamma - tr.alpha])
        };
        let solved = newton(
            residual,
            &sc.initial_guesses(),
            opts,
            &format!("sigma-k at t = {t}"),
        )?;
        let r = poly_residual(&sc.curvature(&solved.x)?.assemble(), &omega, &eq)?;
        let triple = ResidualTriple::from_matrix(&r)?;
        if triple.alpha <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "sigma-k solution lost positivity at t = {t}: alpha = {}",
                triple.alpha
            )));
        }
        let alpha_id = crate::matrixkit::CMatrix::identity(3).scaled_re(triple.alpha);
        let residual_norm = r.sub(&alpha_id).fro_norm();
        let f = sc.curvature(&solved.x)?.assemble();
        let witness = condition_e_value(&f, &omega, &eq, &scaffold_witness(&sc))?;
        let scan = full_symbol_scan(
            &f,
            &omega,
            &eq,
            ROW_SCAN_SAMPLES,
            seed.wrapping_add(idx as u64),
        )?;
        let mut unknowns = BTreeMap::new();
        for ((name, _), value) in sc.unknowns.iter().zip(&solved.x) {
            unknowns.insert(name.clone(), *value);
        }
        report.rows.push(PathRow {
            t,
            residual_norm,
            // ε = 0 reference: the first three directions follow the vbMA
            // path, whose diagonal value is K(t).
            k_value: Some(crate::models::k_of_t(t)),
            triple,
            condition_e: witness,
            unknowns,
            symbol_scan_min: scan.min_eigenvalue,
        });
    }
    report.check_monotone();
    Ok(report)
}

/// Solve the dHYM continuation on `[δ, 1]`: per grid point Newton-solve
/// `(v, u, z)` so the three diagonal residual entries vanish; the
/// residual must stay diagonal, the rank-one minimum must be positive at
/// the first grid point, and the witness must reach zero at `t = 1`.
pub fn solve_dhym(
    n: usize,
    eps: f64,
    theta: f64,
    delta: f64,
    grid_points: usize,
    opts: &NewtonOpts,
    seed: u64,
) -> Result<PathReport> {
    if delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidParam(format!(
            "dhym continuation needs 0 < delta < 1 (the Jacobian vanishes at t = 0), got {delta}"
        )));
    }
    if grid_points < 2 {
        return Err(Error::InvalidParam(
            "dhym grid wants at least 2 points".into(),
        ));
    }
    let grid = linspace(delta, 1.0, grid_points);
    let amp_sq = fit_offdiag_amplitude(&models::dhym_scaffold(grid[0], n, eps, theta)?)?;
    let mut report = PathReport {
        equation: "dhym".into(),
        params: BTreeMap::from([
            ("n".to_string(), n as f64),
            ("eps".to_string(), eps),
            ("theta".to_string(), theta),
            ("delta".to_string(), delta),
        ]),
        seed,
        fitted_amp_sq: amp_sq,
        witness_monotone_decreasing: false,
        min_rank_one_at_start: None,
        rows: Vec::new(),
    };
    for (idx, &t) in grid.iter().enumerate() {
        let sc = models::dhym_scaffold(t, n, eps, theta)?.with_amplitude_sq(amp_sq);
        let eq = scaffold_equation(&sc)?;
        let omega = scaffold_omega(&sc)?;
        let residual = |x: &[f64]| -> Result<Vec<f64>> {
            let r = poly_residual(&sc.curvature(x)?.assemble(), &omega, &eq)?;
            let tr = ResidualTriple::from_matrix(&r)?;
            Ok(vec![tr.alpha, tr.beta, tr.gamma])
        };
        let solved = newton(
            residual,
            &sc.initial_guesses(),
            opts,
            &format!("dhym at t = {t}"),
        )?;
        let r = poly_residual(&sc.curvature(&solved.x)?.assemble(), &omega, &eq)?;
        let off = off_diagonal_norm(&r);
        if off > 1e-10 * (1.0 + r.fro_norm()) {
            return Err(Error::NotDiagonal {
                context: format!("dhym at t = {t}"),
                norm: off,
            });
        }
        let triple = ResidualTriple::from_matrix(&r)?;
        let f = sc.curvature(&solved.x)?.assemble();
        let witness = condition_e_value(&f, &omega, &eq, &scaffold_witness(&sc))?;
        let scan = full_symbol_scan(
            &f,
            &omega,
            &eq,
            ROW_SCAN_SAMPLES,
            seed.wrapping_add(idx as u64),
        )?;
        if idx == 0 {
            let (min_probe, _) = min_rank_one(&f, &omega, &eq, 8, seed)?;
            if min_probe <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "dhym start point t = {t} is not condition-E positive: {min_probe:.3e}"
                )));
            }
            report.min_rank_one_at_start = Some(min_probe);
        }
        let mut unknowns = BTreeMap::new();
        for ((name, _), value) in sc.unknowns.iter().zip(&solved.x) {
            unknowns.insert(name.clone(), *value);
        }
        report.rows.push(PathRow {
            t,
            residual_norm: r.fro_norm(),
            k_value: None,
            triple,
            condition_e: witness,
            unknowns,
            symbol_scan_min: scan.min_eigenvalue,
        });
    }
    if let Some(last) = report.rows.last() {
        if (last.t - 1.0).abs() < 1e-12 && last.condition_e.abs() > tol::WITNESS_ZERO {
            return Err(Error::InvalidParam(format!(
                "dhym witness did not reach zero at t = 1: {:.3e}",
                last.condition_e
            )));
        }
    }
    report.check_monotone();
    Ok(report)
}

/// Condition number of the finite-difference Jacobian of a scaffold's
/// Newton system at its initial guesses. How the t → 0 degeneracy of the
/// dHYM system is observed.
pub fn scaffold_jacobian_condition(sc: &KnownScaffold, opts: &NewtonOpts) -> Result<f64> {
    let eq = scaffold_equation(sc)?;
    let omega = scaffold_omega(sc)?;
    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let r = poly_residual(&sc.curvature(x)?.assemble(), &omega, &eq)?;
        let tr = ResidualTriple::from_matrix(&r)?;
        match sc.kind {
            ScaffoldKind::SigmaK { .. } => Ok(vec![tr.beta - tr.alpha, tr.gamma - tr.alpha]),
            ScaffoldKind::Dhym { .. } => Ok(vec![tr.alpha, tr.beta, tr.gamma]),
        }
    };
    let x = sc.initial_guesses();
    let d = x.len();
    let mut x = x;
    let mut jac = vec![vec![0.0f64; d]; d];
    for i in 0..d {
        let orig = x[i];
        let h = opts.fd_step * (1.0 + orig.abs());
        x[i] = orig + h;
        let fp = residual(&x)?;
        x[i] = orig - h;
        let fm = residual(&x)?;
        x[i] = orig;
        for row in 0..d {
            jac[row][i] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(real_condition(&jac))
}

/// How far a symbol workspace is reused by callers that evaluate many
/// witnesses on one fixed background.
pub fn witness_value_on(ws: &SymbolWorkspace, probe: &SymbolProbe) -> Result<f64> {
    ws.condition_e(probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        dhym_scaffold, j_seg2_u, j_seg2_v, j_seg2_z, sigma_k_scaffold, vbma_u, vbma_z,
    };

    #[test]
    fn newton_examples() {
        // Scalar square root.
        let res = newton(
            |x| Ok(vec![x[0] * x[0] - 4.0]),
            &[3.0],
            &NewtonOpts::default(),
            "sqrt",
        )
        .unwrap();
        assert!((res.x[0] - 2.0).abs() < 1e-12);

        // Well-conditioned linear system solves in one step plus checks.
        let res = newton(
            |x| Ok(vec![2.0 * x[0] + x[1] - 3.0, x[0] + 3.0 * x[1] - 4.0]),
            &[10.0, -7.0],
            &NewtonOpts::default(),
            "linear",
        )
        .unwrap();
        assert!(res.iterations <= 2);
        assert!((res.x[0] - 1.0).abs() < 1e-10 && (res.x[1] - 1.0).abs() < 1e-10);

        // Singular Jacobian at the start point.
        let err = newton(
            |x| Ok(vec![x[0] * x[0]]),
            &[0.0],
            &NewtonOpts::default(),
            "degenerate",
        );
        assert!(matches!(err, Err(Error::SingularJacobian { .. })));
    }

    #[test]
    fn newton_is_deterministic() {
        let run = || {
            newton(
                |x| Ok(vec![x[0].powi(3) - 2.0 * x[0] - 5.0]),
                &[2.0],
                &NewtonOpts::default(),
                "cubic",
            )
            .unwrap()
            .x[0]
        };
        assert_eq!(run().to_bits(), run().to_bits());
    }

    #[test]
    fn certify_positive_examples() {
        // K(t) dips to about 0.76 near t = 0.78 and stays positive.
        let (kmin, tmin) = certify_positive(crate::models::k_of_t, (0.0, 1.0), 101).unwrap();
        assert!((kmin - 0.76).abs() <= 0.01, "kmin = {kmin}");
        assert!((tmin - 0.78).abs() <= 0.01, "tmin = {tmin}");
        assert!(kmin > 0.0);

        // Boundary minimum.
        let (m, arg) = certify_positive(|t| t * (1.0 - t), (0.0, 1.0), 101).unwrap();
        assert!(m.abs() < 1e-12 && (arg < 1e-6 || (1.0 - arg).abs() < 1e-6));

        // The sigma-k Jacobian factor: minimum 21.6 exactly at t = 1.
        let f = |t: f64| 36.0 * (1.0 + t) * (1.0 + 2.0 * t) * (1.0 - 0.9 * t);
        let (m, arg) = certify_positive(f, (0.0, 1.0), 101).unwrap();
        assert!((m - 21.6).abs() <= 1e-10, "m = {m}");
        assert!((arg - 1.0).abs() <= 1e-10);

        assert!(certify_positive(|t| t, (0.0, 1.0), 50).is_err());
    }

    #[test]
    fn amplitude_fit_reduces_to_closed_forms_at_eps_zero() {
        let amp = fit_offdiag_amplitude(&sigma_k_scaffold(0.5, 3, 4, 0.0).unwrap()).unwrap();
        assert!((amp - 3.0).abs() <= 1e-12, "sigma-k amplitude {amp}");
        let amp = fit_offdiag_amplitude(&dhym_scaffold(0.5, 3, 0.0, 1.0).unwrap()).unwrap();
        assert!((amp - 3.0).abs() <= 1e-12, "dhym amplitude {amp}");
    }

    #[test]
    fn sigma_k_recovers_closed_forms_at_eps_zero() {
        let grid = linspace(0.0, 1.0, 6);
        let report = solve_sigma_k(3, 4, 0.0, &grid, &NewtonOpts::default(), 17).expect("solve");
        for row in &report.rows {
            let u = row.unknowns["u"];
            let z = row.unknowns["z"];
            assert!((u - vbma_u(row.t)).abs() <= 1e-9, "t = {}", row.t);
            assert!((z - vbma_z(row.t)).abs() <= 1e-9, "t = {}", row.t);
            assert!(row.residual_norm <= tol::SOLVED_RESIDUAL);
            assert!(row.triple.alpha > 0.0);
        }
        // Witness decreasing from positive to zero.
        assert!(report.witness_monotone_decreasing);
        assert!(report.rows.first().unwrap().condition_e > 0.0);
        assert!(report.rows.last().unwrap().condition_e.abs() <= tol::WITNESS_ZERO);
    }

    #[test]
    fn sigma_k_small_eps_stays_near_closed_forms() {
        let eps = 1e-3;
        let grid = linspace(0.0, 1.0, 6);
        let report = solve_sigma_k(3, 4, eps, &grid, &NewtonOpts::default(), 17).expect("solve");
        for row in &report.rows {
            assert!(row.residual_norm <= tol::SOLVED_RESIDUAL);
            let du = (row.unknowns["u"] - vbma_u(row.t)).abs();
            let dz = (row.unknowns["z"] - vbma_z(row.t)).abs();
            assert!(
                du <= 100.0 * eps && dz <= 100.0 * eps,
                "t = {}: {du}, {dz}",
                row.t
            );
        }
        assert!(report.rows.last().unwrap().condition_e.abs() <= tol::WITNESS_ZERO);
    }

    #[test]
    fn dhym_tracks_the_j_path_solution() {
        let eps = 1e-3;
        let report = solve_dhym(3, eps, 1.0, 0.05, 6, &NewtonOpts::default(), 23).expect("solve");
        assert!(report.min_rank_one_at_start.unwrap() > 0.0);
        for row in &report.rows {
            assert!(row.residual_norm <= tol::SOLVED_RESIDUAL);
            let dv = (row.unknowns["v"] - j_seg2_v(row.t)).abs();
            assert!(dv <= 10.0 * eps, "t = {}: dv = {dv}", row.t);
            let du = (row.unknowns["u"] - j_seg2_u(row.t)).abs();
            let dz = (row.unknowns["z"] - j_seg2_z(row.t)).abs();
            assert!(du <= 1.0 && dz <= 1.0);
        }
        assert!(report.rows.last().unwrap().condition_e.abs() <= tol::WITNESS_ZERO);
    }

    #[test]
    fn dhym_rejects_zero_delta() {
        let err = solve_dhym(3, 1e-3, 1.0, 0.0, 10, &NewtonOpts::default(), 1);
        assert!(matches!(err, Err(Error::InvalidParam(_))));
    }

    #[test]
    fn dhym_jacobian_degenerates_towards_t_zero() {
        let eps = 1e-3;
        let opts = NewtonOpts::default();
        let near =
            scaffold_jacobian_condition(&dhym_scaffold(0.01, 3, eps, 1.0).unwrap(), &opts).unwrap();
        let mid =
            scaffold_jacobian_condition(&dhym_scaffold(0.5, 3, eps, 1.0).unwrap(), &opts).unwrap();
        assert!(near > 5.0 * mid, "cond {near:.3e} vs {mid:.3e}");
    }

    #[test]
    fn path_report_csv_has_fixed_columns() {
        let grid = linspace(0.0, 1.0, 3);
        let report = solve_sigma_k(3, 4, 0.0, &grid, &NewtonOpts::default(), 5).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "t,residual_norm,k_value,alpha,beta,gamma,condition_e,symbol_scan_min,u,v,z"
        ));
        assert_eq!(text.lines().count(), 4);
    }
}
