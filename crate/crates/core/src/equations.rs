//! Residual evaluators for the vbMA, σ_k, J and dHYM equations as one
//! polynomial family `Σ_m c_m (iF)^m ∧ ω^{n−m}`, plus closed-form
//! expressions used to cross-validate the wedge engine.
//!
//! "Solving" is pointwise: the residual of an equation is the top-degree
//! coefficient matrix, and a curvature datum solves the equation when that
//! matrix is the required multiple of the identity (a positive reported
//! constant for vbMA/σ_k, zero for J and dHYM).

use num_complex::Complex64;
use serde::Serialize;

use crate::forms::CurvatureData;
use crate::forms::MatrixForm;
use crate::matrixkit::CMatrix;
use crate::tol;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real coefficients `c_m` of the operator `Σ_m c_m (iF)^m ∧ ω^{n−m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationCoeffs {
    n: usize,
    coeffs: Vec<(usize, f64)>,
}

impl EquationCoeffs {
    pub fn new(n: usize, coeffs: Vec<(usize, f64)>) -> Result<Self> {
        if coeffs.iter().all(|(_, c)| *c == 0.0) {
            return Err(Error::InvalidParam("all coefficients vanish".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (m, _) in &coeffs {
            if *m > n {
                return Err(Error::InvalidParam(format!(
                    "degree {} exceeds n = {}",
                    m, n
                )));
            }
            if !seen.insert(*m) {
                return Err(Error::InvalidParam(format!("duplicate degree {}", m)));
            }
        }
        Ok(EquationCoeffs { n, coeffs })
    }

    /// `(iF)^n = η ⊗ Id`.
    pub fn vbma(n: usize) -> Self {
        EquationCoeffs {
            n,
            coeffs: vec![(n, 1.0)],
        }
    }

    /// `(iF)^k ∧ ω^{n−k} = η ⊗ Id`.
    pub fn sigma_k(k: usize, n: usize) -> Result<Self> {
        if k > n || k == 0 {
            return Err(Error::InvalidParam(format!(
                "sigma_k wants 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        Ok(EquationCoeffs {
            n,
            coeffs: vec![(k, 1.0)],
        })
    }

    /// `(iF)^n − ω Id ∧ (iF)^{n−1} = 0` (the constant already divided out).
    pub fn j_equation(n: usize) -> Self {
        EquationCoeffs {
            n,
            coeffs: vec![(n, 1.0), (n - 1, -1.0)],
        }
    }

    /// Expansion of `Im(e^{-iθ̂}(ω Id − F)^n)`:
    /// `(ω Id − F)^n = Σ_m C(n,m) i^m (iF)^m ∧ ω^{n−m}`, so taking the
    /// metric imaginary part of `e^{-iθ̂}` times it gives
    /// `c_m = C(n,m) sin(mπ/2 − θ̂)`.
    pub fn dhym(n: usize, theta_hat: f64) -> Self {
        let coeffs = (0..=n)
            .map(|m| {
                (
                    m,
                    binomial(n, m) * (m as f64 * std::f64::consts::FRAC_PI_2 - theta_hat).sin(),
                )
            })
            .collect();
        EquationCoeffs { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[(usize, f64)] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> f64 {
        self.coeffs
            .iter()
            .find(|(d, _)| *d == m)
            .map(|(_, c)| *c)
            .unwrap_or(0.0)
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(m, _)| *m)
            .max()
            .unwrap_or(0)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn check_scalar_form(omega: &MatrixForm) -> Result<()> {
    let r = omega.r();
    for (_, m) in omega.terms() {
        let mean = m.trace() / r as f64;
        let dev = m.sub(&CMatrix::identity(r).scaled(mean)).fro_norm();
        if dev > 1e-12 * (1.0 + m.fro_norm()) {
            return Err(Error::Shape(
                "omega must have scalar (multiple of Id) coefficients".into(),
            ));
        }
    }
    Ok(())
}

/// `top(Σ_m c_m (iF)^m ∧ ω^{n−m})`. Hermitian for Hermitian `iF`.
pub fn poly_residual(f: &MatrixForm, omega: &MatrixForm, eq: &EquationCoeffs) -> Result<CMatrix> {
    if f.bidegree() != (1, 1) || omega.bidegree() != (1, 1) {
        return Err(Error::Shape("poly_residual expects (1,1) forms".into()));
    }
    if f.n() != eq.n() || omega.n() != eq.n() || f.r() != omega.r() {
        return Err(Error::Shape(format!(
            "dimension mismatch: F on n={}, omega on n={}, equation n={}",
            f.n(),
            omega.n(),
            eq.n()
        )));
    }
    check_scalar_form(omega)?;
    let n = eq.n();
    let mut total = CMatrix::zeros(f.r(), f.r());
    let mut f_pow = MatrixForm::one(f.n(), f.r());
    let mut f_pows = vec![f_pow.clone()];
    for _ in 0..eq.max_degree() {
        f_pow = f_pow.wedge(f)?;
        f_pows.push(f_pow.clone());
    }
    for (m, c) in eq.coeffs() {
        if *c == 0.0 {
            continue;
        }
        let term = f_pows[*m].wedge(&omega.power(n - m)?)?;
        total = total.add(&term.top_coefficient()?.scaled_re(*c));
    }
    Ok(total)
}

/// Pointwise dHYM angle: the argument of `Tr top((ω Id − F)^n)`,
/// in `(-π, π]`.
pub fn dhym_angle(f: &MatrixForm, omega: &MatrixForm) -> Result<f64> {
    let z = dhym_trace(f, omega)?;
    if z.norm() <= 1e-12 {
        return Err(Error::DegenerateAngle { modulus: z.norm() });
    }
    Ok(z.arg())
}

fn omega_id_minus_f(f: &MatrixForm, omega: &MatrixForm) -> Result<MatrixForm> {
    // We store iF; the plain curvature form is -i times that.
    omega.sub(&f.scaled(-I))
}

fn dhym_trace(f: &MatrixForm, omega: &MatrixForm) -> Result<Complex64> {
    let base = omega_id_minus_f(f, omega)?;
    Ok(base.power(f.n())?.top_coefficient()?.trace())
}

/// Direct evaluation of `Im_H(e^{-iθ̂} top((ω Id − F)^n))` with
/// `Im_H(Z) = (Z − Z*)/(2i)`. Independent route used to validate
/// [`EquationCoeffs::dhym`].
pub fn dhym_residual_direct(f: &MatrixForm, omega: &MatrixForm, theta_hat: f64) -> Result<CMatrix> {
    let base = omega_id_minus_f(f, omega)?;
    let top = base.power(f.n())?.top_coefficient()?;
    let rotated = top.scaled(Complex64::from_polar(1.0, -theta_hat));
    Ok(rotated
        .sub(&rotated.adjoint())
        .scaled(Complex64::new(0.0, -0.5)))
}

/// `{A,B,C} = ABC + ACB + BAC + BCA + CAB + CBA`.
pub fn sym3(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> CMatrix {
    a.mul(b)
        .mul(c)
        .add(&a.mul(c).mul(b))
        .add(&b.mul(a).mul(c))
        .add(&b.mul(c).mul(a))
        .add(&c.mul(a).mul(b))
        .add(&c.mul(b).mul(a))
}

/// `{X,Y} = XY + YX`.
pub fn sym2(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x.mul(y).add(&y.mul(x))
}

fn b_or_zero(c: &CurvatureData, i: usize, j: usize) -> CMatrix {
    c.b_block(i, j)
        .cloned()
        .unwrap_or_else(|| CMatrix::zeros(c.r(), c.r()))
}

/// Closed form of `top((iF)^3)` in dimension three:
/// `{A1,A2,A3} − {A1,B23,B23*} − {A2,B13,B13*} − {A3,B12,B12*}
///  + {B13,B12*,B23*} + {B13*,B12,B23}`.
pub fn closed_vbma3(c: &CurvatureData) -> Result<CMatrix> {
    if c.n() != 3 {
        return Err(Error::Shape(format!(
            "closed_vbma3 wants n = 3, got {}",
            c.n()
        )));
    }
    let (a1, a2, a3) = (c.a_block(0), c.a_block(1), c.a_block(2));
    let b12 = b_or_zero(c, 0, 1);
    let b13 = b_or_zero(c, 0, 2);
    let b23 = b_or_zero(c, 1, 2);
    Ok(sym3(a1, a2, a3)
        .sub(&sym3(a1, &b23, &b23.adjoint()))
        .sub(&sym3(a2, &b13, &b13.adjoint()))
        .sub(&sym3(a3, &b12, &b12.adjoint()))
        .add(&sym3(&b13, &b12.adjoint(), &b23.adjoint()))
        .add(&sym3(&b13.adjoint(), &b12, &b23)))
}

/// `Σ_{i<j} (A_i A_j + A_j A_i − B_ij B_ij* − B_ij* B_ij)`, the σ_2
/// residual up to one positive constant fixed by the identity case.
pub fn closed_sigma2(c: &CurvatureData) -> CMatrix {
    let mut out = CMatrix::zeros(c.r(), c.r());
    for i in 0..c.n() {
        for j in i + 1..c.n() {
            out = out.add(&sym2(c.a_block(i), c.a_block(j)));
            if let Some(b) = c.b_block(i, j) {
                out = out.sub(&sym2(b, &b.adjoint()));
            }
        }
    }
    out
}

/// Closed form of the J-equation matrix in dimension three: the vbMA cube
/// minus `Σ {A_i,A_j}` plus `Σ {B_ij,B_ij*}`.
pub fn closed_j3(c: &CurvatureData) -> Result<CMatrix> {
    if c.n() != 3 {
        return Err(Error::Shape(format!(
            "closed_j3 wants n = 3, got {}",
            c.n()
        )));
    }
    Ok(closed_vbma3(c)?.sub(&closed_sigma2(c)))
}

/// The three diagonal residual entries of the rank-three systems.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ResidualTriple {
    /// Diagonal of a 3×3 residual; imaginary leakage must be negligible.
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        if m.rows() < 3 {
            return Err(Error::Shape(format!(
                "residual triple wants rank >= 3, got {}",
                m.rows()
            )));
        }
        for k in 0..3 {
            let z = m[(k, k)];
            if z.im.abs() > tol::IMAG_LEAK * (1.0 + z.norm()) {
                return Err(Error::NotHermitian(format!(
                    "diagonal entry {} has imaginary part {:.3e}",
                    k + 1,
                    z.im
                )));
            }
        }
        Ok(ResidualTriple {
            alpha: m[(0, 0)].re,
            beta: m[(1, 1)].re,
            gamma: m[(2, 2)].re,
        })
    }
}

/// Frobenius norm of the off-diagonal part.
pub fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{standard_kahler, CurvatureData};
    use crate::matrixkit::{random_hermitian, random_matrix, random_unitary};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::BTreeMap;

    fn random_curvature(rng: &mut ChaCha20Rng, n: usize, r: usize) -> CurvatureData {
        let a = (0..n).map(|_| random_hermitian(rng, r, 1.0)).collect();
        let mut b = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.8) {
                    b.insert((i, j), random_matrix(rng, r, r));
                }
            }
        }
        CurvatureData::new(n, a, b).unwrap()
    }

    /// Model-shaped blocks: diagonal A_i, single-entry B_ij.
    fn shaped_curvature(rng: &mut ChaCha20Rng) -> CurvatureData {
        let diag = |rng: &mut ChaCha20Rng| {
            CMatrix::from_real_diag(&[
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.1..3.0),
            ])
        };
        let mut b = BTreeMap::new();
        b.insert(
            (0, 1),
            CMatrix::matrix_unit(3, 0, 1).scaled_re(rng.gen_range(0.0..2.0)),
        );
        b.insert(
            (0, 2),
            CMatrix::matrix_unit(3, 0, 2).scaled_re(rng.gen_range(0.0..2.0)),
        );
        b.insert(
            (1, 2),
            CMatrix::matrix_unit(3, 1, 2).scaled_re(rng.gen_range(0.0..2.0)),
        );
        CurvatureData::new(3, vec![diag(rng), diag(rng), diag(rng)], b).unwrap()
    }

    #[test]
    fn sym3_identities() {
        let id = CMatrix::identity(3);
        assert!(sym3(&id, &id, &id).sub(&id.scaled_re(6.0)).fro_norm() < 1e-15);
        let e13 = CMatrix::matrix_unit(3, 0, 2);
        let e21 = CMatrix::matrix_unit(3, 1, 0);
        let e32 = CMatrix::matrix_unit(3, 2, 1);
        assert!(sym3(&e13, &e21, &e32).sub(&CMatrix::identity(3)).fro_norm() < 1e-15);
        let e12 = CMatrix::matrix_unit(2, 0, 1);
        let e21 = CMatrix::matrix_unit(2, 1, 0);
        assert!(sym2(&e12, &e21).sub(&CMatrix::identity(2)).fro_norm() < 1e-15);
    }

    #[test]
    fn closed_vbma3_trivial_case() {
        let c = CurvatureData::trivial(3, 3, 1.0);
        let m = closed_vbma3(&c).unwrap();
        assert!(m.sub(&CMatrix::identity(3).scaled_re(6.0)).fro_norm() < 1e-14);
    }

    #[test]
    fn closed_vbma3_matches_engine() {
        let mut rng = ChaCha20Rng::seed_from_u64(101);
        for trial in 0..100 {
            let c = if trial % 2 == 0 {
                random_curvature(&mut rng, 3, 3)
            } else {
                shaped_curvature(&mut rng)
            };
            let engine = c.assemble().power(3).unwrap().top_coefficient().unwrap();
            let closed = closed_vbma3(&c).unwrap();
            let rel = engine.sub(&closed).fro_norm() / (1.0 + closed.fro_norm());
            assert!(rel <= 1e-9, "trial {trial}: rel {rel:e}");
        }
    }

    #[test]
    fn closed_sigma2_examples_and_engine_constant() {
        // Identity case: 3 pairs, each contributing 2·Id.
        let c = CurvatureData::trivial(3, 3, 1.0);
        assert!(
            closed_sigma2(&c)
                .sub(&CMatrix::identity(3).scaled_re(6.0))
                .fro_norm()
                < 1e-14
        );

        // Single B_12 = E_12 with A = 0: residual is -(E_11 + E_22).
        let mut b = BTreeMap::new();
        b.insert((0, 1), CMatrix::matrix_unit(3, 0, 1));
        let zero = CMatrix::zeros(3, 3);
        let c = CurvatureData::new(3, vec![zero.clone(), zero.clone(), zero], b).unwrap();
        let want = CMatrix::matrix_unit(3, 0, 0)
            .add(&CMatrix::matrix_unit(3, 1, 1))
            .scaled_re(-1.0);
        assert!(closed_sigma2(&c).sub(&want).fro_norm() < 1e-14);

        // Engine equals (n-2)! times the closed form, the constant fixed by
        // evaluating both sides at the identity case.
        let mut rng = ChaCha20Rng::seed_from_u64(202);
        for &n in &[2usize, 3, 4] {
            let id_case = CurvatureData::trivial(n, 2, 1.0);
            let sigma2 = EquationCoeffs::sigma_k(2, n).unwrap();
            let omega = standard_kahler(n, 2);
            let engine_id = poly_residual(&id_case.assemble(), &omega, &sigma2).unwrap();
            let closed_id = closed_sigma2(&id_case);
            let constant = engine_id[(0, 0)].re / closed_id[(0, 0)].re;
            assert!((constant - factorial(n - 2)).abs() < 1e-12);
            for _ in 0..34 {
                let c = random_curvature(&mut rng, n, 2);
                let engine = poly_residual(&c.assemble(), &omega, &sigma2).unwrap();
                let closed = closed_sigma2(&c).scaled_re(constant);
                let rel = engine.sub(&closed).fro_norm() / (1.0 + closed.fro_norm());
                assert!(rel <= 1e-9, "n = {n}: rel {rel:e}");
            }
        }
    }

    #[test]
    fn closed_j3_matches_engine_and_trivial_zero() {
        let c = CurvatureData::trivial(3, 3, 1.0);
        assert!(closed_j3(&c).unwrap().fro_norm() < 1e-14);

        let mut rng = ChaCha20Rng::seed_from_u64(303);
        let j = EquationCoeffs::j_equation(3);
        let omega = standard_kahler(3, 3);
        for _ in 0..100 {
            let c = random_curvature(&mut rng, 3, 3);
            let engine = poly_residual(&c.assemble(), &omega, &j).unwrap();
            let closed = closed_j3(&c).unwrap();
            let rel = engine.sub(&closed).fro_norm() / (1.0 + closed.fro_norm());
            assert!(rel <= 1e-9, "rel {rel:e}");
        }
    }

    #[test]
    fn hermitian_input_gives_hermitian_residual() {
        let mut rng = ChaCha20Rng::seed_from_u64(404);
        let omega = standard_kahler(3, 3);
        let eqs = [
            EquationCoeffs::vbma(3),
            EquationCoeffs::sigma_k(2, 3).unwrap(),
            EquationCoeffs::j_equation(3),
            EquationCoeffs::dhym(3, 0.7),
        ];
        for _ in 0..10 {
            let c = random_curvature(&mut rng, 3, 3);
            for eq in &eqs {
                let res = poly_residual(&c.assemble(), &omega, eq).unwrap();
                assert!(res.hermitian_defect() <= 1e-12 * (1.0 + res.max_abs()));
            }
        }
    }

    #[test]
    fn dhym_coeffs_special_angles() {
        // θ̂ = πn/2 recovers the J-equation leading terms.
        let n = 3;
        let eq = EquationCoeffs::dhym(n, std::f64::consts::FRAC_PI_2 * n as f64);
        assert!(eq.coeff(3).abs() < 1e-15);
        assert!((eq.coeff(2) - (-3.0)).abs() < 1e-12);
        assert!(eq.coeff(1).abs() < 1e-12);
        assert!((eq.coeff(0) - 1.0).abs() < 1e-12);

        // n = 1, θ̂ = 0: residual is Im(ω Id − F): c_1 = 1, c_0 = 0.
        let eq = EquationCoeffs::dhym(1, 0.0);
        assert!((eq.coeff(1) - 1.0).abs() < 1e-15);
        assert!(eq.coeff(0).abs() < 1e-15);
    }

    #[test]
    fn dhym_coeffs_match_direct_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(505);
        let omega = standard_kahler(3, 3);
        for _ in 0..100 {
            let c = random_curvature(&mut rng, 3, 3);
            let theta: f64 = rng.gen_range(-3.0..3.0);
            let f = c.assemble();
            let via_coeffs = poly_residual(&f, &omega, &EquationCoeffs::dhym(3, theta)).unwrap();
            let direct = dhym_residual_direct(&f, &omega, theta).unwrap();
            let err = via_coeffs.sub(&direct).fro_norm() / (1.0 + direct.fro_norm());
            assert!(err <= 1e-10, "err {err:e}");
        }
    }

    #[test]
    fn dhym_angle_examples() {
        // F = 0: trace is r·n! > 0, angle 0.
        let f = MatrixForm::zero(3, 3, 1, 1);
        let omega = standard_kahler(3, 3);
        let z = dhym_angle(&f, &omega).unwrap();
        assert!(z.abs() < 1e-14);

        // F = ω Id: perfect cancellation, degenerate angle. In the stored
        // iF convention that input is i·ω.
        let err = dhym_angle(&omega.scaled(I), &omega);
        assert!(matches!(err, Err(Error::DegenerateAngle { .. })));
    }

    #[test]
    fn dhym_angle_perturbative_limit() {
        // With ω = (εθ/n)·ω̃ over J-equation data, the angle approaches
        // πn/2 (mod 2π) linearly in ε: the J-equation makes the two
        // leading trace terms equal, so the deviation is ≈ εθ.
        let pt = crate::models::j_path(0.5).unwrap();
        let f = pt.data.assemble();
        let n = 3usize;
        let theta = 1.0;
        let target = std::f64::consts::FRAC_PI_2 * n as f64;
        let wrap = |x: f64| {
            let two_pi = std::f64::consts::TAU;
            let mut y = x % two_pi;
            if y > std::f64::consts::PI {
                y -= two_pi;
            }
            if y <= -std::f64::consts::PI {
                y += two_pi;
            }
            y
        };
        for eps in [1e-2, 1e-3, 1e-4] {
            let omega = crate::forms::kahler(3, 3, &[eps * theta / 3.0; 3]).unwrap();
            let angle = dhym_angle(&f, &omega).unwrap();
            let dev = wrap(angle - target).abs();
            assert!(dev <= 2.0 * eps * theta, "eps {eps}: deviation {dev:e}");
        }
    }

    #[test]
    fn unitary_conjugation_equivariance() {
        let mut rng = ChaCha20Rng::seed_from_u64(606);
        let omega = standard_kahler(3, 3);
        let u = random_unitary(&mut rng, 3);
        let eqs = [
            EquationCoeffs::vbma(3),
            EquationCoeffs::sigma_k(2, 3).unwrap(),
            EquationCoeffs::j_equation(3),
            EquationCoeffs::dhym(3, 1.3),
        ];
        for _ in 0..5 {
            let c = random_curvature(&mut rng, 3, 3);
            let cu = c.conjugate_by(&u);
            for eq in &eqs {
                let res = poly_residual(&c.assemble(), &omega, eq).unwrap();
                let res_u = poly_residual(&cu.assemble(), &omega, eq).unwrap();
                let diff = res_u.sub(&res.conjugate_by(&u)).fro_norm();
                assert!(diff <= 1e-10 * (1.0 + res.fro_norm()), "diff {diff:e}");
            }
        }
    }

    #[test]
    fn coeff_validation() {
        assert!(EquationCoeffs::new(3, vec![(4, 1.0)]).is_err());
        assert!(EquationCoeffs::new(3, vec![(2, 1.0), (2, -1.0)]).is_err());
        assert!(EquationCoeffs::new(3, vec![(2, 0.0)]).is_err());
        assert!(EquationCoeffs::sigma_k(4, 3).is_err());
    }

    #[test]
    fn residual_triple_and_offdiag() {
        let mut m = CMatrix::from_real_diag(&[1.0, 2.0, 3.0]);
        let t = ResidualTriple::from_matrix(&m).unwrap();
        assert_eq!((t.alpha, t.beta, t.gamma), (1.0, 2.0, 3.0));
        m[(0, 1)] = Complex64::new(0.0, 2.0);
        assert!((off_diagonal_norm(&m) - 2.0).abs() < 1e-15);
    }
}
