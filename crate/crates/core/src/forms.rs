//! Exact graded algebra of `End(E)`-valued (p,q)-forms at one point of C^n.
//!
//! A form is a finite map from pairs of strictly increasing index tuples
//! `(I, J)` to `r × r` complex coefficient matrices, representing
//! `Σ M_{I,J} dz^I ∧ dz̄^J` in the canonical order
//! `dz^{i_1} ∧ … ∧ dz^{i_p} ∧ dz̄^{j_1} ∧ … ∧ dz̄^{j_q}`. Index tuples are
//! stored as bitmasks (bit `i` set ⇔ `dz^{i+1}` present), which makes them
//! canonically sorted, and every wedge sign is the parity of the merge that
//! restores canonical order — one total order, no per-case sign tables.
//!
//! Factors of `i = √-1` are folded into the coefficients: what we store for
//! curvature is `iF`, never `F`. The volume form is
//! `Π_k (i dz^k ∧ dz̄^k)` and [`MatrixForm::top_coefficient`] rescales the
//! raw canonical coefficient by the exact power of `i` and transposition
//! sign relating the two.
//!
//! Forms are immutable; `wedge`/`power` are pure, so grid loops in the
//! higher modules can evaluate them concurrently without synchronisation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrixkit::CMatrix;
use crate::tol;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Bitmask for a strictly increasing tuple of 1-based indices.
pub fn mask_from_indices(indices: &[usize]) -> u32 {
    let mut m = 0u32;
    for &i in indices {
        assert!((1..=32).contains(&i), "index out of range");
        m |= 1 << (i - 1);
    }
    m
}

/// 1-based indices of a mask, ascending.
pub fn indices_from_mask(mut mask: u32) -> Vec<usize> {
    let mut out = Vec::new();
    while mask != 0 {
        let b = mask.trailing_zeros() as usize;
        out.push(b + 1);
        mask &= mask - 1;
    }
    out
}

/// Sign of merging two disjoint ascending tuples into one ascending tuple;
/// `None` when they overlap (the wedge vanishes). The parity counts, for
/// each element of `b`, the elements of `a` above it.
fn merge_sign(a: u32, b: u32) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        inversions += (a >> (bit + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    })
}

/// Homogeneous `End(E)`-valued (p,q)-form at a point.
#[derive(Debug, Clone)]
pub struct MatrixForm {
    n: usize,
    r: usize,
    p: usize,
    q: usize,
    terms: BTreeMap<(u32, u32), CMatrix>,
}

impl MatrixForm {
    pub fn zero(n: usize, r: usize, p: usize, q: usize) -> Self {
        MatrixForm {
            n,
            r,
            p,
            q,
            terms: BTreeMap::new(),
        }
    }

    /// The scalar unit `1 ⊗ Id` of bidegree (0,0).
    pub fn one(n: usize, r: usize) -> Self {
        let mut f = MatrixForm::zero(n, r, 0, 0);
        f.terms.insert((0, 0), CMatrix::identity(r));
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &CMatrix)> {
        self.terms.iter()
    }

    pub fn term(&self, i_mask: u32, j_mask: u32) -> Option<&CMatrix> {
        self.terms.get(&(i_mask, j_mask))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn insert_term(&mut self, i_mask: u32, j_mask: u32, m: CMatrix) -> Result<()> {
        if i_mask.count_ones() as usize != self.p || j_mask.count_ones() as usize != self.q {
            return Err(Error::Shape(format!(
                "term ({:b},{:b}) does not match bidegree ({},{})",
                i_mask, j_mask, self.p, self.q
            )));
        }
        if i_mask >> self.n != 0 || j_mask >> self.n != 0 {
            return Err(Error::Shape("index beyond base dimension".into()));
        }
        if m.rows() != self.r || m.cols() != self.r {
            return Err(Error::Shape(format!(
                "coefficient is {}x{}, rank is {}",
                m.rows(),
                m.cols(),
                self.r
            )));
        }
        accumulate(&mut self.terms, (i_mask, j_mask), m);
        Ok(())
    }

    /// Largest coefficient Frobenius norm; 0 for the zero form.
    pub fn max_coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|m| m.fro_norm())
            .fold(0.0, f64::max)
    }

    /// Drop coefficients below `PRUNE_REL` of the largest term.
    pub fn pruned(mut self) -> Self {
        let cutoff = tol::PRUNE_REL * self.max_coeff_norm();
        self.terms
            .retain(|_, m| m.fro_norm() > cutoff && m.fro_norm() > 0.0);
        self
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        for m in out.terms.values_mut() {
            *m = m.scaled(z);
        }
        out
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        self.scaled(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.check_compatible(other)?;
        if (self.p, self.q) != (other.p, other.q) {
            return Err(Error::Shape(format!(
                "adding bidegrees ({},{}) and ({},{})",
                self.p, self.q, other.p, other.q
            )));
        }
        let mut out = self.clone();
        for (k, m) in &other.terms {
            accumulate(&mut out.terms, *k, m.clone());
        }
        Ok(out.pruned())
    }

    pub fn sub(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.add(&other.scaled_re(-1.0))
    }

    fn check_compatible(&self, other: &MatrixForm) -> Result<()> {
        if self.n != other.n || self.r != other.r {
            return Err(Error::Shape(format!(
                "forms live on (n={},r={}) and (n={},r={})",
                self.n, self.r, other.n, other.r
            )));
        }
        Ok(())
    }

    /// Wedge product. The sign of each merged term is
    /// `(-1)^{q₁ p₂} · sign(merge I) · sign(merge J)`, from moving the `dz`
    /// factors of `other` past the `dz̄` factors of `self` and then
    /// restoring canonical order; the coefficient is the matrix product in
    /// the original operand order.
    pub fn wedge(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.check_compatible(other)?;
        let swap_sign = if (self.q * other.p) % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        let mut out = MatrixForm::zero(self.n, self.r, self.p + other.p, self.q + other.q);
        for ((i1, j1), m1) in &self.terms {
            for ((i2, j2), m2) in &other.terms {
                let (Some(si), Some(sj)) = (merge_sign(*i1, *i2), merge_sign(*j1, *j2)) else {
                    continue;
                };
                let coeff = m1.mul(m2).scaled_re(si * sj * swap_sign);
                accumulate(&mut out.terms, (i1 | i2, j1 | j2), coeff);
            }
        }
        Ok(out.pruned())
    }

    /// Metric adjoint: `(M dz^I ∧ dz̄^J)† = (-1)^{pq} M* dz^J ∧ dz̄^I`.
    /// An involution, and the identity on forms assembled from Hermitian
    /// curvature data.
    pub fn dagger(&self) -> MatrixForm {
        let sign = if (self.p * self.q) % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        let mut out = MatrixForm::zero(self.n, self.r, self.q, self.p);
        for ((i, j), m) in &self.terms {
            out.terms.insert((*j, *i), m.adjoint().scaled_re(sign));
        }
        out
    }

    /// Left-to-right k-fold wedge. `power(f, 0)` is the scalar unit; powers
    /// past the base dimension are the zero form.
    pub fn power(&self, k: usize) -> Result<MatrixForm> {
        if self.bidegree() != (1, 1) {
            return Err(Error::Shape(format!(
                "power expects a (1,1) form, got ({},{})",
                self.p, self.q
            )));
        }
        let mut acc = MatrixForm::one(self.n, self.r);
        for _ in 0..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// For an (n,n)-form `f`, the matrix `M` with
    /// `f = M · Π_{k=1}^{n} (i dz^k ∧ dz̄^k)`.
    pub fn top_coefficient(&self) -> Result<CMatrix> {
        if (self.p, self.q) != (self.n, self.n) {
            return Err(Error::Shape(format!(
                "top_coefficient expects bidegree ({n},{n}), got ({},{})",
                self.p,
                self.q,
                n = self.n
            )));
        }
        let full = if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        };
        let raw = match self.terms.get(&(full, full)) {
            Some(m) => m.clone(),
            None => CMatrix::zeros(self.r, self.r),
        };
        // Π (i dz^k dz̄^k) = i^n (-1)^{n(n-1)/2} dz^{1..n} ∧ dz̄^{1..n}, so the
        // canonical coefficient converts by the inverse factor.
        let mut factor = Complex64::new(1.0, 0.0);
        for _ in 0..self.n {
            factor *= -I;
        }
        if (self.n * (self.n - 1) / 2) % 2 == 1 {
            factor = -factor;
        }
        Ok(raw.scaled(factor))
    }

    /// Coefficientwise distance (max Frobenius norm over the union of
    /// term keys). Used by tests and diagnostics.
    pub fn distance(&self, other: &MatrixForm) -> f64 {
        let mut d = 0.0f64;
        for (k, m) in &self.terms {
            let diff = match other.terms.get(k) {
                Some(o) => m.sub(o).fro_norm(),
                None => m.fro_norm(),
            };
            d = d.max(diff);
        }
        for (k, m) in &other.terms {
            if !self.terms.contains_key(k) {
                d = d.max(m.fro_norm());
            }
        }
        d
    }

    /// Every coefficient conjugated by a fixed unitary frame change of E.
    pub fn conjugate_by(&self, u: &CMatrix) -> MatrixForm {
        let mut out = self.clone();
        for m in out.terms.values_mut() {
            *m = m.conjugate_by(u);
        }
        out
    }
}

fn accumulate(terms: &mut BTreeMap<(u32, u32), CMatrix>, key: (u32, u32), m: CMatrix) {
    match terms.get_mut(&key) {
        Some(existing) => *existing = existing.add(&m),
        None => {
            terms.insert(key, m);
        }
    }
}

/// Diagonal scalar (1,1)-form `Σ w_i (i dz^i ∧ dz̄^i) ⊗ Id` without a
/// positivity requirement on the weights; degenerate limits of the Kähler
/// form (ε = 0 directions) go through here.
pub fn diag_form(n: usize, r: usize, weights: &[f64]) -> Result<MatrixForm> {
    if weights.len() != n {
        return Err(Error::Shape(format!(
            "{} weights for n = {}",
            weights.len(),
            n
        )));
    }
    let mut f = MatrixForm::zero(n, r, 1, 1);
    for (i, w) in weights.iter().enumerate() {
        if *w != 0.0 {
            let mask = 1u32 << i;
            f.terms
                .insert((mask, mask), CMatrix::identity(r).scaled(I * *w));
        }
    }
    Ok(f)
}

/// Kähler form with per-direction weights, all strictly positive.
pub fn kahler(n: usize, r: usize, weights: &[f64]) -> Result<MatrixForm> {
    if weights.iter().any(|w| *w <= 0.0) {
        return Err(Error::InvalidParam(
            "kahler weights must be positive".into(),
        ));
    }
    diag_form(n, r, weights)
}

/// Standard all-ones Kähler form.
pub fn standard_kahler(n: usize, r: usize) -> MatrixForm {
    kahler(n, r, &vec![1.0; n]).expect("positive weights")
}

/// A (1,0)-form `ξ = a ⊗ g = Σ a_k g dz^k`.
pub fn covector_form(n: usize, a: &[Complex64], g: &CMatrix) -> Result<MatrixForm> {
    if a.len() != n {
        return Err(Error::Shape(format!(
            "covector has {} components for n = {}",
            a.len(),
            n
        )));
    }
    let mut f = MatrixForm::zero(n, g.rows(), 1, 0);
    for (k, ak) in a.iter().enumerate() {
        if ak.norm() > 0.0 {
            f.terms.insert((1 << k, 0), g.scaled(*ak));
        }
    }
    Ok(f)
}

/// The (1,1)-form `(i χ ∧ χ̄) Ψ = Σ i a_k ā_l Ψ dz^k ∧ dz̄^l` entering the
/// principal symbol. Sign fixed so the trivial-curvature symbol form is
/// positive definite.
pub fn chi_pair_form(n: usize, chi: &[Complex64], psi: &CMatrix) -> Result<MatrixForm> {
    if chi.len() != n {
        return Err(Error::Shape(format!(
            "covector has {} components for n = {}",
            chi.len(),
            n
        )));
    }
    let mut f = MatrixForm::zero(n, psi.rows(), 1, 1);
    for (k, ak) in chi.iter().enumerate() {
        for (l, al) in chi.iter().enumerate() {
            let z = I * ak * al.conj();
            if z.norm() > 0.0 {
                f.terms.insert((1 << k, 1 << l), psi.scaled(z));
            }
        }
    }
    Ok(f)
}

// --- Curvature data -------------------------------------------------------

/// Pointwise normal form of `iF_H`: Hermitian diagonal blocks `A_i` and
/// arbitrary off-diagonal blocks `B_ij` for `i < j` (0-based keys).
#[derive(Debug, Clone)]
pub struct CurvatureData {
    n: usize,
    r: usize,
    a: Vec<CMatrix>,
    b: BTreeMap<(usize, usize), CMatrix>,
}

impl CurvatureData {
    pub fn new(n: usize, a: Vec<CMatrix>, b: BTreeMap<(usize, usize), CMatrix>) -> Result<Self> {
        if a.len() != n || n == 0 {
            return Err(Error::Shape(format!(
                "{} diagonal blocks for n = {}",
                a.len(),
                n
            )));
        }
        let r = a[0].rows();
        for (i, m) in a.iter().enumerate() {
            if m.rows() != r || m.cols() != r {
                return Err(Error::Shape(format!(
                    "A_{} is {}x{}",
                    i + 1,
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_hermitian() {
                return Err(Error::NotHermitian(format!(
                    "A_{} defect {:.3e}",
                    i + 1,
                    m.hermitian_defect()
                )));
            }
        }
        for (&(i, j), m) in &b {
            if i >= j || j >= n {
                return Err(Error::Shape(format!(
                    "B block key ({},{}) needs i < j <= n",
                    i, j
                )));
            }
            if m.rows() != r || m.cols() != r {
                return Err(Error::Shape(format!(
                    "B_{}{} is {}x{}",
                    i + 1,
                    j + 1,
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(CurvatureData { n, r, a, b })
    }

    /// Diagonal data `A_i = ρ Id`, `B = 0`: the trivial solution.
    pub fn trivial(n: usize, r: usize, rho: f64) -> Self {
        let a = (0..n)
            .map(|_| CMatrix::identity(r).scaled_re(rho))
            .collect();
        CurvatureData {
            n,
            r,
            a,
            b: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn a_block(&self, i: usize) -> &CMatrix {
        &self.a[i]
    }

    pub fn b_block(&self, i: usize, j: usize) -> Option<&CMatrix> {
        self.b.get(&(i, j))
    }

    pub fn b_blocks(&self) -> impl Iterator<Item = (&(usize, usize), &CMatrix)> {
        self.b.iter()
    }

    /// `Σ_{i≠k} A_i` (0-based k).
    pub fn a_sum_excluding(&self, k: usize) -> CMatrix {
        let mut s = CMatrix::zeros(self.r, self.r);
        for (i, ai) in self.a.iter().enumerate() {
            if i != k {
                s = s.add(ai);
            }
        }
        s
    }

    /// The (1,1)-form
    /// `iF = Σ A_i (i dz^i ∧ dz̄^i) + Σ_{i<j} (B_ij (i dz^i ∧ dz̄^j) + B_ij* (i dz^j ∧ dz̄^i))`
    /// with the factors of `i` folded into the coefficients.
    pub fn assemble(&self) -> MatrixForm {
        let mut f = MatrixForm::zero(self.n, self.r, 1, 1);
        for (i, ai) in self.a.iter().enumerate() {
            if ai.fro_norm() > 0.0 {
                f.terms.insert((1 << i, 1 << i), ai.scaled(I));
            }
        }
        for (&(i, j), bij) in &self.b {
            if bij.fro_norm() > 0.0 {
                f.terms.insert((1 << i, 1 << j), bij.scaled(I));
                f.terms.insert((1 << j, 1 << i), bij.adjoint().scaled(I));
            }
        }
        f
    }

    /// Recover curvature blocks from an assembled (1,1)-form, validating
    /// Hermitian structure.
    pub fn from_form(f: &MatrixForm) -> Result<Self> {
        if f.bidegree() != (1, 1) {
            return Err(Error::Parse(format!(
                "curvature form must have bidegree (1,1), got {:?}",
                f.bidegree()
            )));
        }
        let (n, r) = (f.n(), f.r());
        let mut a = vec![CMatrix::zeros(r, r); n];
        let mut b = BTreeMap::new();
        let scale = f.max_coeff_norm();
        for ((im, jm), m) in &f.terms {
            let i = im.trailing_zeros() as usize;
            let j = jm.trailing_zeros() as usize;
            let block = m.scaled(-I); // divide by i
            if i == j {
                a[i] = block;
            } else if i < j {
                b.insert((i, j), block);
            } else {
                // With the folded i, the (i>j) coefficient is i·B† while the
                // partner is i·B, so the pair satisfies m = -partner†.
                let partner = f
                    .term(1 << j, 1 << i)
                    .cloned()
                    .unwrap_or_else(|| CMatrix::zeros(r, r));
                let defect = m.add(&partner.adjoint()).fro_norm();
                if defect > tol::HERMITIAN_REL * (1.0 + scale) {
                    return Err(Error::NotHermitian(format!(
                        "off-diagonal blocks ({},{}) are not adjoint partners: defect {:.3e}",
                        j + 1,
                        i + 1,
                        defect
                    )));
                }
            }
        }
        CurvatureData::new(n, a, b)
    }

    /// Every block conjugated by one unitary: `A_i -> U* A_i U`,
    /// `B_ij -> U* B_ij U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> CurvatureData {
        CurvatureData {
            n: self.n,
            r: self.r,
            a: self.a.iter().map(|m| m.conjugate_by(u)).collect(),
            b: self
                .b
                .iter()
                .map(|(k, m)| (*k, m.conjugate_by(u)))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        form_to_json(&self.assemble())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        CurvatureData::from_form(&form_from_json(text)?)
    }
}

// --- JSON schema -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermDoc {
    #[serde(rename = "I")]
    i: Vec<usize>,
    #[serde(rename = "J")]
    j: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct FormDoc {
    n: usize,
    r: usize,
    terms: Vec<TermDoc>,
}

/// Serialize a form to the `{n, r, terms: [{I, J, re, im}]}` document.
/// Indices are 1-based; `re`/`im` are row-major `r × r` arrays. The stored
/// coefficients include the folded factor of `i` (the document describes
/// `iF`, matching what [`CurvatureData::assemble`] produces).
pub fn form_to_json(f: &MatrixForm) -> String {
    let r = f.r();
    let terms = f
        .terms()
        .map(|((im, jm), m)| {
            let mut re = vec![vec![0.0; r]; r];
            let mut imag = vec![vec![0.0; r]; r];
            for a in 0..r {
                for b in 0..r {
                    re[a][b] = m[(a, b)].re;
                    imag[a][b] = m[(a, b)].im;
                }
            }
            TermDoc {
                i: indices_from_mask(*im),
                j: indices_from_mask(*jm),
                re,
                im: imag,
            }
        })
        .collect();
    let doc = FormDoc {
        n: f.n(),
        r: f.r(),
        terms,
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

pub fn form_from_json(text: &str) -> Result<MatrixForm> {
    let doc: FormDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.n == 0 || doc.n > 16 {
        return Err(Error::Parse(format!(
            "base dimension {} out of range",
            doc.n
        )));
    }
    if doc.terms.is_empty() {
        return Err(Error::Parse("document has no terms".into()));
    }
    let p = doc.terms[0].i.len();
    let q = doc.terms[0].j.len();
    let mut f = MatrixForm::zero(doc.n, doc.r, p, q);
    for term in &doc.terms {
        if term.i.len() != p || term.j.len() != q {
            return Err(Error::Parse("mixed bidegrees in document".into()));
        }
        if term.i.iter().any(|&i| i == 0 || i > doc.n)
            || term.j.iter().any(|&j| j == 0 || j > doc.n)
        {
            return Err(Error::Parse("index out of range in document".into()));
        }
        if term.re.len() != doc.r || term.im.len() != doc.r {
            return Err(Error::Parse("coefficient block does not match rank".into()));
        }
        let mut m = CMatrix::zeros(doc.r, doc.r);
        for a in 0..doc.r {
            if term.re[a].len() != doc.r || term.im[a].len() != doc.r {
                return Err(Error::Parse("coefficient block does not match rank".into()));
            }
            for b in 0..doc.r {
                m[(a, b)] = Complex64::new(term.re[a][b], term.im[a][b]);
            }
        }
        f.insert_term(mask_from_indices(&term.i), mask_from_indices(&term.j), m)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(f)
}
