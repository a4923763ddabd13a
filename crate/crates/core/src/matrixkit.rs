//! Dense complex matrix arithmetic and the spectral primitives the rest of
//! the crate leans on.
//!
//! Matrices here are tiny (rank ≤ 8, symbol operators ≤ 64×64), so
//! everything is plain `Vec<Complex64>` storage with a cyclic Jacobi
//! eigensolver for the Hermitian case. Singular values come from the
//! Hermitian solver through the `[[0, M], [M*, 0]]` embedding, whose
//! eigenvalues are `±σ_i`; this keeps small singular values accurate in
//! absolute terms instead of squaring them through `M* M`.
//!
//! All values are immutable after construction and safe to share across
//! threads.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::tol;
use crate::{Error, Result};

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// `E_ij`: the matrix whose `(i, j)` entry is 1 (zero-based indices).
    pub fn matrix_unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= z;
        }
        out
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        self.scaled(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M*|` entrywise; zero for exactly Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    /// Hermitian within `HERMITIAN_REL * (1 + max|M|)`.
    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermitian_defect() <= tol::HERMITIAN_REL * (1.0 + self.max_abs())
    }

    fn require_hermitian(&self, what: &str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "{what}: matrix is {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.is_hermitian() {
            return Err(Error::NotHermitian(format!(
                "{what}: defect {:.3e} exceeds {:.1e}*(1+max|M|)",
                self.hermitian_defect(),
                tol::HERMITIAN_REL
            )));
        }
        Ok(())
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> CMatrix {
        self.add(&self.adjoint()).scaled_re(0.5)
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> Complex64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a[(i, k)].norm() > a[(piv, k)].norm() {
                    piv = i;
                }
            }
            if a[(piv, k)].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if piv != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(piv, j)];
                    a[(piv, j)] = t;
                }
                det = -det;
            }
            det *= a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        det
    }

    /// Eigenvalues (ascending) and a unitary whose columns are the matching
    /// eigenvectors, for Hermitian input.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        self.require_hermitian("hermitian_eigen")?;
        let (vals, vecs) = jacobi_hermitian(self, true);
        Ok((vals, vecs.expect("vectors requested")))
    }

    /// Eigenvalues only (ascending), for Hermitian input.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian("hermitian_eigenvalues")?;
        Ok(jacobi_hermitian(self, false).0)
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn hermitian_min_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_eigenvalues()?[0])
    }

    /// Smallest singular value, accurate in absolute terms near zero.
    pub fn min_singular_value(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "min_singular_value: matrix is {}x{}",
                self.rows, self.cols
            )));
        }
        let m = self.rows;
        if m == 0 {
            return Ok(0.0);
        }
        // Jordan-Wielandt embedding: eigenvalues of [[0, M], [M*, 0]] are ±σ_i.
        let mut h = CMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                h[(i, m + j)] = self[(i, j)];
                h[(m + j, i)] = self[(i, j)].conj();
            }
        }
        let vals = jacobi_hermitian(&h, false).0;
        Ok(vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min))
    }

    /// All singular values, descending. Computed through `M* M`, which is
    /// accurate enough for the inequality tests that use the full list.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let gram = self.adjoint().mul(self);
        let mut vals = jacobi_hermitian(&gram, false).0;
        for v in &mut vals {
            *v = v.max(0.0).sqrt();
        }
        vals.reverse();
        Ok(vals)
    }

    /// Positive definiteness with the scale-aware margin
    /// `min eig > PD_MIN_EIG_REL * (1 + ||M||_F)`.
    pub fn is_positive_definite(&self) -> Result<bool> {
        let min = self.hermitian_min_eigenvalue()?;
        Ok(min > tol::PD_MIN_EIG_REL * (1.0 + self.fro_norm()))
    }

    /// Conjugation `U* M U` by a unitary frame change.
    pub fn conjugate_by(&self, u: &CMatrix) -> CMatrix {
        u.adjoint().mul(self).mul(u)
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Column-stacked vectorisation of an `r × r` matrix. The `(i, j)` entry
/// lands at position `i + r*j`; every consumer of the basis order (the
/// symbol operator in particular) goes through this type.
#[derive(Debug, Clone, PartialEq)]
pub struct MatVec {
    r: usize,
    data: Vec<Complex64>,
}

impl MatVec {
    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn from_components(r: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != r * r {
            return Err(Error::Shape(format!(
                "MatVec wants {} entries, got {}",
                r * r,
                data.len()
            )));
        }
        Ok(MatVec { r, data })
    }
}

/// Column-stacked `vec` of a square matrix.
pub fn vec_of(m: &CMatrix) -> Result<MatVec> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "vec: matrix is {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let r = m.rows();
    let mut data = Vec::with_capacity(r * r);
    for j in 0..r {
        for i in 0..r {
            data.push(m[(i, j)]);
        }
    }
    Ok(MatVec { r, data })
}

/// Inverse of [`vec_of`].
pub fn unvec(v: &MatVec) -> CMatrix {
    let r = v.r;
    let mut m = CMatrix::zeros(r, r);
    for j in 0..r {
        for i in 0..r {
            m[(i, j)] = v.data[i + r * j];
        }
    }
    m
}

/// Index into a column-stacked vector for matrix entry `(i, j)`.
pub fn vec_index(r: usize, i: usize, j: usize) -> usize {
    i + r * j
}

// --- Jacobi eigensolver -------------------------------------------------

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi for complex Hermitian matrices. Returns eigenvalues in
/// ascending order; eigenvectors (columns) when requested.
///
/// Each (p, q) rotation first strips the phase of `a_pq`, then applies the
/// classic symmetric 2×2 Schur rotation, so the combined transform is the
/// unitary `[[c, s], [-s e^{-iφ}, c e^{-iφ}]]`.
fn jacobi_hermitian(m: &CMatrix, want_vectors: bool) -> (Vec<f64>, Option<CMatrix>) {
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = if want_vectors {
        Some(CMatrix::identity(n))
    } else {
        None
    };
    if n <= 1 {
        let vals = (0..n).map(|i| a[(i, i)].re).collect();
        return (vals, v);
    }
    let scale = a.fro_norm().max(f64::MIN_POSITIVE);
    let target = 1e-14 * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 {
                    continue;
                }
                let phase = apq / g; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase.conj() * s; // s e^{-iφ}

                // Columns: col_p' = c col_p - sp col_q ; col_q' = s col_p + c/phase col_q.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * sp;
                    a[(i, q)] = aip * s + aiq * (phase.conj() * c);
                }
                // Rows with the conjugate coefficients.
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - aqj * (phase * s);
                    a[(q, j)] = apj * s + aqj * (phase * c);
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                if let Some(vm) = v.as_mut() {
                    for i in 0..n {
                        let vip = vm[(i, p)];
                        let viq = vm[(i, q)];
                        vm[(i, p)] = vip * c - viq * sp;
                        vm[(i, q)] = vip * s + viq * (phase.conj() * c);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vecs = v.map(|vm| {
        let mut out = CMatrix::zeros(n, n);
        for (newj, &oldj) in order.iter().enumerate() {
            for i in 0..n {
                out[(i, newj)] = vm[(i, oldj)];
            }
        }
        out
    });
    (vals, vecs)
}

// --- Real linear solves for the Newton driver ----------------------------

/// Gaussian elimination with partial pivoting; `None` on a vanishing pivot.
#[allow(clippy::needless_range_loop)]
pub fn real_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[piv][k].abs() {
                piv = i;
            }
        }
        if a[piv][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}

/// 2-norm condition number of a small real matrix.
pub fn real_condition(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = Complex64::new(a[i][j], 0.0);
        }
    }
    let sv = m.singular_values().expect("square");
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

// --- Random sampling helpers ---------------------------------------------

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Uniform point on the unit sphere of C^n.
pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| random_complex(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = random_complex(rng);
        }
    }
    m
}

/// Random Hermitian matrix `(G + G*)/2` scaled by `scale`.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    random_matrix(rng, n, n).hermitian_part().scaled_re(scale)
}

/// Random unitary from modified Gram-Schmidt on a Gaussian matrix.
#[allow(clippy::needless_range_loop)]
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        let g = random_matrix(rng, n, n);
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| g.column(j)).collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let proj: Complex64 = cols[k]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for i in 0..n {
                    let ck = cols[k][i];
                    cols[j][i] -= proj * ck;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for z in &mut cols[j] {
                *z /= norm;
            }
        }
        if ok {
            let mut u = CMatrix::zeros(n, n);
            for j in 0..n {
                for i in 0..n {
                    u[(i, j)] = cols[j][i];
                }
            }
            return u;
        }
    }
}
