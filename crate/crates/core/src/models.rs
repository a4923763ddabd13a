//! Explicit curvature families: the vbMA path, its block extension to
//! higher rank and dimension, the two-segment J-equation path, and the
//! known-function scaffolds that seed the σ_k and dHYM continuations.
//!
//! All families use rank-three blocks in the first three base directions:
//! `A_1 = diag(p,q,r)`, `A_2 = diag(s,u,v)`, `A_3 = diag(x,y,z)`,
//! `B_12 = a E_12`, `B_13 = b E_13`, `B_23 = c E_23`, with the twelve label
//! functions depending on the path parameter.

use std::collections::BTreeMap;

use crate::forms::CurvatureData;
use crate::matrixkit::CMatrix;
use crate::{Error, Result};

pub const LABEL_NAMES: [&str; 12] = ["p", "q", "r", "s", "u", "v", "x", "y", "z", "a", "b", "c"];

/// One point of a labelled curvature path.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub t: f64,
    pub data: CurvatureData,
    pub omega_weights: Vec<f64>,
    pub labels: BTreeMap<String, f64>,
}

impl PathPoint {
    pub fn label(&self, name: &str) -> f64 {
        self.labels[name]
    }

    /// Labels must reproduce the block entries they name exactly.
    pub fn verify_labels(&self) -> bool {
        let d = &self.data;
        let eq = |x: f64, z: num_complex::Complex64| z.re == x && z.im == 0.0;
        eq(self.label("p"), d.a_block(0)[(0, 0)])
            && eq(self.label("q"), d.a_block(0)[(1, 1)])
            && eq(self.label("r"), d.a_block(0)[(2, 2)])
            && eq(self.label("s"), d.a_block(1)[(0, 0)])
            && eq(self.label("u"), d.a_block(1)[(1, 1)])
            && eq(self.label("v"), d.a_block(1)[(2, 2)])
            && eq(self.label("x"), d.a_block(2)[(0, 0)])
            && eq(self.label("y"), d.a_block(2)[(1, 1)])
            && eq(self.label("z"), d.a_block(2)[(2, 2)])
            && eq(
                self.label("a"),
                d.b_block(0, 1).map_or(0.0.into(), |b| b[(0, 1)]),
            )
            && eq(
                self.label("b"),
                d.b_block(0, 2).map_or(0.0.into(), |b| b[(0, 2)]),
            )
            && eq(
                self.label("c"),
                d.b_block(1, 2).map_or(0.0.into(), |b| b[(1, 2)]),
            )
    }
}

fn labels_from(values: [f64; 12]) -> BTreeMap<String, f64> {
    LABEL_NAMES
        .iter()
        .zip(values)
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Rank-3 curvature in `n >= 3` dimensions from the twelve labels; base
/// directions beyond the third carry `tail_coeff · Id`.
fn rank3_curvature(n: usize, labels: &BTreeMap<String, f64>, tail_coeff: f64) -> CurvatureData {
    let l = |name: &str| labels[name];
    let mut a = vec![
        CMatrix::from_real_diag(&[l("p"), l("q"), l("r")]),
        CMatrix::from_real_diag(&[l("s"), l("u"), l("v")]),
        CMatrix::from_real_diag(&[l("x"), l("y"), l("z")]),
    ];
    for _ in 3..n {
        a.push(CMatrix::identity(3).scaled_re(tail_coeff));
    }
    let mut b = BTreeMap::new();
    for (key, (i, j)) in [("a", (0, 1)), ("b", (0, 2)), ("c", (1, 2))] {
        if l(key) != 0.0 {
            b.insert((i, j), CMatrix::matrix_unit(3, i, j).scaled_re(l(key)));
        }
    }
    CurvatureData::new(n, a, b).expect("diagonal blocks are Hermitian")
}

// --- vbMA path -------------------------------------------------------------

/// `u(t) = (6 + 14.7 t²) / (6 (1 + t))`.
pub fn vbma_u(t: f64) -> f64 {
    (6.0 + 14.7 * t * t) / (6.0 * (1.0 + t))
}

/// `z(t) = (6 + 12.3 t²) / (6 (1 + 2t)(1 − 0.9t))`.
pub fn vbma_z(t: f64) -> f64 {
    (6.0 + 12.3 * t * t) / (6.0 * (1.0 + 2.0 * t) * (1.0 - 0.9 * t))
}

/// The continuity path along which `top((iF_t)^3) = K(t) Id`:
/// `p,s,x,y ≡ 1`, `q = 1+t`, `r = 1+2t`, `v = 1−0.9t`, `a = b = c = √(3t)`,
/// with `u, z` the rational functions that equalise the three diagonal
/// entries.
pub fn vbma_path(t: f64) -> Result<PathPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParam(format!(
            "vbma_path wants t in [0,1], got {t}"
        )));
    }
    let amp = (3.0 * t).sqrt();
    let labels = labels_from([
        1.0,
        1.0 + t,
        1.0 + 2.0 * t,
        1.0,
        vbma_u(t),
        1.0 - 0.9 * t,
        1.0,
        1.0,
        vbma_z(t),
        amp,
        amp,
        amp,
    ]);
    let data = rank3_curvature(3, &labels, 0.0);
    Ok(PathPoint {
        t,
        data,
        omega_weights: vec![1.0; 3],
        labels,
    })
}

/// `K(t) = 6 − 18t + 2.7t² + 6t√(3t)`, the common diagonal value of the
/// vbMA path cube.
pub fn k_of_t(t: f64) -> f64 {
    6.0 - 18.0 * t + 2.7 * t * t + 6.0 * t * (3.0 * t).sqrt()
}

/// Block extension of a vbMA path point to rank `3 + extra_rank` and
/// dimension `3 + extra_dims`. The original blocks are first divided by
/// `(K(t)/3!)^{1/3}`, which pins the three-sector cube at `3! · Id`; the
/// added rank block and the added base directions then carry plain `Id`,
/// and the extended path satisfies its equation with constant
/// `C(k+3,3) · k! · 3!`.
pub fn vbma_extend(pt: &PathPoint, extra_rank: usize, extra_dims: usize) -> Result<PathPoint> {
    if pt.data.n() != 3 || pt.data.r() != 3 {
        return Err(Error::InvalidParam(
            "vbma_extend expects a rank-3, dimension-3 path point".into(),
        ));
    }
    let scale = (k_of_t(pt.t) / 6.0).powf(1.0 / 3.0);
    let mut labels = pt.labels.clone();
    for v in labels.values_mut() {
        *v /= scale;
    }
    let l = |name: &str| labels[name];
    let n = 3 + extra_dims;
    let r = 3 + extra_rank;
    let extend_diag = |d: [f64; 3]| {
        let mut full = d.to_vec();
        full.extend(std::iter::repeat_n(1.0, extra_rank));
        CMatrix::from_real_diag(&full)
    };
    let mut a = vec![
        extend_diag([l("p"), l("q"), l("r")]),
        extend_diag([l("s"), l("u"), l("v")]),
        extend_diag([l("x"), l("y"), l("z")]),
    ];
    for _ in 3..n {
        a.push(CMatrix::identity(r));
    }
    let mut b = BTreeMap::new();
    for (key, (i, j)) in [("a", (0, 1)), ("b", (0, 2)), ("c", (1, 2))] {
        if l(key) != 0.0 {
            b.insert((i, j), CMatrix::matrix_unit(r, i, j).scaled_re(l(key)));
        }
    }
    let data = CurvatureData::new(n, a, b)?;
    Ok(PathPoint {
        t: pt.t,
        data,
        omega_weights: vec![1.0; n],
        labels,
    })
}

// --- J-equation path --------------------------------------------------------

/// Segment-2 closed forms in the chart parameter `t = s − 1`.
pub fn j_seg2_p(t: f64) -> f64 {
    2.0 + 2.0 * t * (1.0 - t)
}

pub fn j_seg2_v(t: f64) -> f64 {
    2.0 + 2.0 * t + 10.0 * t * t
}

pub fn j_seg2_u(t: f64) -> f64 {
    2.0 + (25.0 * 5.5 * 5.5 / 12.0) * t - 4.0 * t * t
}

pub fn j_seg2_z(t: f64) -> f64 {
    (8.0 + (9.0 + 25.0 * 5.5 * 5.5 / 12.0) * t + (0.6 + 34.5) * t * t + 4.0 * t * t * t)
        / (16.0 + 20.0 * t + 100.0 * t * t)
}

/// First J-path chart on `t ∈ [0, 1]`: the diagonal family
/// `p = … = v = 1 + t`, `x = y = z = (1+t)/(1+3t)`, no off-diagonals.
pub fn j_path_chart1(t: f64) -> PathPoint {
    let diag = 1.0 + t;
    let tail = (1.0 + t) / (1.0 + 3.0 * t);
    let labels = labels_from([
        diag, diag, diag, diag, diag, diag, tail, tail, tail, 0.0, 0.0, 0.0,
    ]);
    let data = rank3_curvature(3, &labels, 0.0);
    PathPoint {
        t,
        data,
        omega_weights: vec![1.0; 3],
        labels,
    }
}

/// Second J-path chart on `t ∈ [0, 1]`: off-diagonal amplitudes switched
/// on, ending at `3ps − a² − p − s = 0`.
pub fn j_path_chart2(t: f64) -> PathPoint {
    let labels = labels_from([
        j_seg2_p(t),
        2.0,
        2.0,
        2.0 - t,
        j_seg2_u(t),
        j_seg2_v(t),
        0.5,
        0.5,
        j_seg2_z(t),
        3.0f64.sqrt() * t,
        (t / 5.0).sqrt(),
        5.5 * (5.0 * t / 12.0).sqrt(),
    ]);
    let data = rank3_curvature(3, &labels, 0.0);
    PathPoint {
        t,
        data,
        omega_weights: vec![1.0; 3],
        labels,
    }
}

/// Two-segment J-equation path, `s ∈ [0, 2]` with the chart boundary at
/// `s = 1`. Segment one runs diagonally from the all-ones point to
/// `p = … = v = 2`, `x = y = z = 1/2` with `3 = 1/r + 1/v + 1/z`
/// identically; segment two turns on the off-diagonal amplitudes and ends
/// at `3ps − a² − p − s = 0`. Both charts give the same labels at the
/// boundary.
pub fn j_path(s_param: f64) -> Result<PathPoint> {
    if !(0.0..=2.0).contains(&s_param) {
        return Err(Error::InvalidParam(format!(
            "j_path wants s in [0,2], got {s_param}"
        )));
    }
    let mut pt = if s_param <= 1.0 {
        j_path_chart1(s_param)
    } else {
        j_path_chart2(s_param - 1.0)
    };
    pt.t = s_param;
    Ok(pt)
}

// --- Continuation scaffolds --------------------------------------------------

/// Which continuation family a scaffold belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaffoldKind {
    /// σ_k with `k` leading curvature directions and `n − k` trailing
    /// `ε·Id` directions; ω carries weights `(ε,…,ε,1,…,1)`.
    SigmaK { k: usize },
    /// dHYM near the J-equation: `θ̂ = −εθ + πn/2`, `ω = (εθ/n) ω̃`.
    Dhym { theta: f64 },
}

/// Prescribed label functions plus named unknowns with initial guesses.
/// The off-diagonal amplitudes are parameterised by the squared amplitude
/// at `t = 1`; the continuation module fits that number so the positivity
/// witness vanishes at the endpoint.
#[derive(Debug, Clone)]
pub struct KnownScaffold {
    pub kind: ScaffoldKind,
    pub t: f64,
    pub n: usize,
    pub eps: f64,
    pub amp_sq_t1: f64,
    pub fixed: BTreeMap<String, f64>,
    pub unknowns: Vec<(String, f64)>,
}

impl KnownScaffold {
    pub fn with_amplitude_sq(mut self, amp_sq_t1: f64) -> Self {
        self.amp_sq_t1 = amp_sq_t1;
        self
    }

    /// Current off-diagonal amplitudes `(a, b, c)` under the family's
    /// scaling law in `t`.
    pub fn amplitudes(&self) -> (f64, f64, f64) {
        match self.kind {
            ScaffoldKind::SigmaK { .. } => {
                let amp = (self.amp_sq_t1 * self.t).sqrt();
                (amp, amp, amp)
            }
            ScaffoldKind::Dhym { .. } => (
                self.amp_sq_t1.sqrt() * self.t,
                (self.t / 5.0).sqrt(),
                5.5 * (5.0 * self.t / 12.0).sqrt(),
            ),
        }
    }

    /// Materialise curvature data for the given unknown values (order
    /// matching `self.unknowns`).
    pub fn curvature(&self, unknown_values: &[f64]) -> Result<CurvatureData> {
        if unknown_values.len() != self.unknowns.len() {
            return Err(Error::Shape(format!(
                "{} unknowns supplied for {}",
                unknown_values.len(),
                self.unknowns.len()
            )));
        }
        let mut labels = self.fixed.clone();
        for ((name, _), value) in self.unknowns.iter().zip(unknown_values) {
            labels.insert(name.clone(), *value);
        }
        let (a, b, c) = self.amplitudes();
        labels.insert("a".into(), a);
        labels.insert("b".into(), b);
        labels.insert("c".into(), c);
        let tail = match self.kind {
            ScaffoldKind::SigmaK { .. } => self.eps,
            ScaffoldKind::Dhym { .. } => 1.0,
        };
        Ok(rank3_curvature(self.n, &labels, tail))
    }

    /// ω weights for the family (the dHYM global `εθ/n` factor included).
    pub fn omega_weights(&self) -> Vec<f64> {
        match self.kind {
            ScaffoldKind::SigmaK { k } => {
                let mut w = vec![self.eps; k];
                w.extend(std::iter::repeat_n(1.0, self.n - k));
                w
            }
            ScaffoldKind::Dhym { theta } => {
                // ω = (εθ/n)·ω̃ for ε > 0; ε = 0 degenerates to the
                // J-equation limit with ω̃ itself.
                let scale = if self.eps > 0.0 {
                    self.eps * theta / self.n as f64
                } else {
                    1.0
                };
                vec![scale; self.n]
            }
        }
    }

    pub fn initial_guesses(&self) -> Vec<f64> {
        self.unknowns.iter().map(|(_, g)| *g).collect()
    }
}

/// σ_k scaffold: `s = y = 1`, `q = 1+t`, `r = 1+2t`, `v = 1−0.9t`,
/// `p = x = 1`, amplitudes `a = b = c = √(amp² t)` with `amp² = 3` at
/// ε = 0; unknowns `u, z` seeded from the vbMA closed forms.
pub fn sigma_k_scaffold(t: f64, k: usize, n: usize, eps: f64) -> Result<KnownScaffold> {
    if k < 3 {
        return Err(Error::InvalidParam(format!(
            "sigma_k scaffold wants k >= 3 (sigma_2 is handled by its own criterion), got {k}"
        )));
    }
    if k >= n {
        return Err(Error::InvalidParam(format!(
            "sigma_k scaffold wants k < n (k = n is the vbMA case), got k={k}, n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&t) || eps < 0.0 {
        return Err(Error::InvalidParam(format!(
            "t in [0,1] and eps >= 0 required, got t={t}, eps={eps}"
        )));
    }
    let mut fixed = BTreeMap::new();
    for (name, value) in [
        ("p", 1.0),
        ("q", 1.0 + t),
        ("r", 1.0 + 2.0 * t),
        ("s", 1.0),
        ("v", 1.0 - 0.9 * t),
        ("x", 1.0),
        ("y", 1.0),
    ] {
        fixed.insert(name.to_string(), value);
    }
    Ok(KnownScaffold {
        kind: ScaffoldKind::SigmaK { k },
        t,
        n,
        eps,
        amp_sq_t1: 3.0,
        fixed,
        unknowns: vec![("u".into(), vbma_u(t)), ("z".into(), vbma_z(t))],
    })
}

/// dHYM scaffold: the segment-2 J-path functions with amplitude
/// `a = √(amp²)·t` (`amp² = 3` at ε = 0); unknowns `v, u, z` seeded from
/// the J-path closed forms.
pub fn dhym_scaffold(t: f64, n: usize, eps: f64, theta: f64) -> Result<KnownScaffold> {
    if n < 3 {
        return Err(Error::InvalidParam(format!(
            "dhym scaffold wants n >= 3, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&t) || eps < 0.0 || theta <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "t in [0,1], eps >= 0, theta > 0 required, got t={t}, eps={eps}, theta={theta}"
        )));
    }
    let mut fixed = BTreeMap::new();
    for (name, value) in [
        ("p", j_seg2_p(t)),
        ("q", 2.0),
        ("r", 2.0),
        ("s", 2.0 - t),
        ("x", 0.5),
        ("y", 0.5),
    ] {
        fixed.insert(name.to_string(), value);
    }
    Ok(KnownScaffold {
        kind: ScaffoldKind::Dhym { theta },
        t,
        n,
        eps,
        amp_sq_t1: 3.0,
        fixed,
        unknowns: vec![
            ("v".into(), j_seg2_v(t)),
            ("u".into(), j_seg2_u(t)),
            ("z".into(), j_seg2_z(t)),
        ],
    })
}

/// Path table CSV: columns `t,p,q,r,s,u,v,x,y,z,a,b,c`.
pub fn write_path_csv<W: std::io::Write>(out: &mut W, points: &[PathPoint]) -> Result<()> {
    writeln!(out, "t,{}", LABEL_NAMES.join(","))?;
    for pt in points {
        let row: Vec<String> = LABEL_NAMES
            .iter()
            .map(|k| format!("{}", pt.label(k)))
            .collect();
        writeln!(out, "{},{}", pt.t, row.join(","))?;
    }
    Ok(())
}
