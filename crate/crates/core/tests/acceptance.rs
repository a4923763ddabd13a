//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line (visible with `cargo test -- --nocapture`).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use vbforms::continuation::{certify_positive, linspace, solve_dhym, solve_sigma_k, NewtonOpts};
use vbforms::ellipticity::{
    condition_e_value, full_symbol_scan, min_rank_one, pairing_check, symbol_matrix, SymbolProbe,
};
use vbforms::equations::{
    binomial, closed_sigma2, closed_vbma3, dhym_residual_direct, factorial, poly_residual, sym3,
    EquationCoeffs,
};
use vbforms::forms::{standard_kahler, CurvatureData};
use vbforms::matrixkit::{random_hermitian, random_matrix, random_unit_vector, CMatrix};
use vbforms::models::{j_path, j_seg2_v, k_of_t, vbma_extend, vbma_path, vbma_u, vbma_z};

fn passed(criterion: &str, detail: &str) {
    println!("[PASS] {criterion}: {detail}");
}

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

fn e_k(n: usize, k: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[k] = Complex64::new(1.0, 0.0);
    e
}

#[test]
fn criterion_1_vbma_path_verification() {
    let omega = standard_kahler(3, 3);
    let eq = EquationCoeffs::vbma(3);
    let probe = SymbolProbe::coordinate(3, 3, 1, 0, 0);
    let mut max_residual = 0.0f64;
    let mut witness0 = f64::NAN;
    let mut witness1 = f64::NAN;
    for i in 0..101 {
        let t = i as f64 / 100.0;
        let pt = vbma_path(t).unwrap();
        let f = pt.data.assemble();
        let top = f.power(3).unwrap().top_coefficient().unwrap();
        let residual = top
            .sub(&CMatrix::identity(3).scaled_re(k_of_t(t)))
            .fro_norm();
        max_residual = max_residual.max(residual);
        let w = condition_e_value(&f, &omega, &eq, &probe).unwrap();
        if i == 0 {
            witness0 = w;
        }
        if i == 100 {
            witness1 = w;
        }
    }
    assert!(max_residual <= 1e-10, "residual {max_residual:e}");

    let (k_min, t_min) = certify_positive(k_of_t, (0.0, 1.0), 101).unwrap();
    assert!((k_min - 0.76).abs() <= 0.01, "K min {k_min}");
    assert!((t_min - 0.78).abs() <= 0.01, "t0 {t_min}");
    assert!(witness1.abs() <= 1e-8, "witness at t=1: {witness1:e}");
    assert!(witness0 > 1.0, "witness at t=0: {witness0}");
    passed(
        "criterion 1",
        &format!(
            "vbma path: residual {max_residual:.2e}, K min {k_min:.4} at {t_min:.4}, witness {witness0:.1} -> {witness1:.2e}"
        ),
    );
}

#[test]
fn criterion_2_closed_cube_equivalence() {
    let mut rng = ChaCha20Rng::seed_from_u64(1002);
    let mut max_rel = 0.0f64;
    for _ in 0..100 {
        let c = random_curvature(&mut rng, 3, 3);
        let engine = c.assemble().power(3).unwrap().top_coefficient().unwrap();
        let closed = closed_vbma3(&c).unwrap();
        max_rel = max_rel.max(engine.sub(&closed).fro_norm() / (1.0 + closed.fro_norm()));
    }
    assert!(max_rel <= 1e-9, "closed vs engine {max_rel:e}");

    let e13 = CMatrix::matrix_unit(3, 0, 2);
    let e21 = CMatrix::matrix_unit(3, 1, 0);
    let e32 = CMatrix::matrix_unit(3, 2, 1);
    let exact = sym3(&e13, &e21, &e32).sub(&CMatrix::identity(3)).fro_norm();
    assert_eq!(exact, 0.0, "sym3 unit identity must be exact");
    passed(
        "criterion 2",
        &format!("closed vbma3 vs engine rel {max_rel:.2e}; sym3 identity exact"),
    );
}

#[test]
fn criterion_3_block_extension() {
    let combos = [(0usize, 1usize), (1, 0), (1, 1), (2, 2)];
    for (extra_dims, extra_rank) in combos {
        let n = 3 + extra_dims;
        let r = 3 + extra_rank;
        let constant = binomial(extra_dims + 3, 3) * factorial(extra_dims) * 6.0;
        let omega = standard_kahler(n, r);
        let eq = EquationCoeffs::vbma(n);
        let probe = SymbolProbe::coordinate(n, r, 1, 0, 0);
        let mut max_eq_dev = 0.0f64;
        let mut ratio = f64::NAN;
        let mut max_ratio_dev = 0.0f64;
        let mut scale = f64::NAN;
        for i in 0..51 {
            let t = i as f64 / 50.0;
            let pt = vbma_extend(&vbma_path(t).unwrap(), extra_rank, extra_dims).unwrap();
            let f = pt.data.assemble();
            let top = f.power(n).unwrap().top_coefficient().unwrap();
            let dev = top
                .sub(&CMatrix::identity(r).scaled_re(constant))
                .fro_norm()
                / (1.0 + constant);
            max_eq_dev = max_eq_dev.max(dev);
            let witness = condition_e_value(&f, &omega, &eq, &probe).unwrap();
            let expr = 3.0 * pt.label("p") * pt.label("x") - pt.label("b").powi(2);
            if i == 0 {
                ratio = witness / expr;
                scale = witness.abs();
                assert!(ratio > 0.0, "witness multiple must be positive");
            }
            max_ratio_dev = max_ratio_dev.max((witness - ratio * expr).abs() / (1.0 + scale));
        }
        assert!(
            max_eq_dev <= 1e-10,
            "({extra_dims},{extra_rank}): equation constant deviation {max_eq_dev:e}"
        );
        assert!(
            max_ratio_dev <= 1e-8,
            "({extra_dims},{extra_rank}): witness ratio deviation {max_ratio_dev:e}"
        );
        // Rank extension alone leaves the witness value unchanged.
        if extra_dims == 0 {
            let base = vbma_path(0.4).unwrap();
            let omega3 = standard_kahler(3, 3);
            let eq3 = EquationCoeffs::vbma(3);
            let w3 = condition_e_value(
                &vbma_extend(&base, 0, 0).unwrap().data.assemble(),
                &omega3,
                &eq3,
                &SymbolProbe::coordinate(3, 3, 1, 0, 0),
            )
            .unwrap();
            let wr = condition_e_value(
                &vbma_extend(&base, extra_rank, 0).unwrap().data.assemble(),
                &omega,
                &eq,
                &probe,
            )
            .unwrap();
            assert!((w3 - wr).abs() <= 1e-10 * (1.0 + w3.abs()));
        }
    }
    passed(
        "criterion 3",
        "block extensions (0,1),(1,0),(1,1),(2,2) keep the equation and witness ratio",
    );
}

#[test]
fn criterion_4_sigma2_suite() {
    let mut rng = ChaCha20Rng::seed_from_u64(1004);
    // Closed form vs engine, constant calibrated at the identity case.
    let mut max_rel = 0.0f64;
    for &n in &[2usize, 3, 4] {
        let sigma2 = EquationCoeffs::sigma_k(2, n).unwrap();
        let omega = standard_kahler(n, 3);
        let id_case = CurvatureData::trivial(n, 3, 1.0);
        let constant = poly_residual(&id_case.assemble(), &omega, &sigma2).unwrap()[(0, 0)].re
            / closed_sigma2(&id_case)[(0, 0)].re;
        for _ in 0..100 {
            let c = random_curvature(&mut rng, n, 3);
            let engine = poly_residual(&c.assemble(), &omega, &sigma2).unwrap();
            let closed = closed_sigma2(&c).scaled_re(constant);
            max_rel = max_rel.max(engine.sub(&closed).fro_norm() / (1.0 + closed.fro_norm()));
        }
    }
    assert!(max_rel <= 1e-9, "sigma2 closed vs engine {max_rel:e}");

    // Kernel identity on 200 constructed instances.
    let mut max_violation = 0.0f64;
    for _ in 0..200 {
        let n = 3 + rng.gen_range(0..2usize);
        let r = 3;
        let k = rng.gen_range(0..n);
        let (a, v) = singular_sum_instance(&mut rng, n, r, k);
        let mut lhs = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let braces = vbforms::equations::sym2(&a[i], &a[j]);
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
    assert!(
        max_violation <= 1e-9,
        "kernel identity violation {max_violation:e}"
    );

    // 10^4 instances on the singular face of the criterion: none may have
    // a positive definite sigma_2 residual.
    let mut hits = 0usize;
    for _ in 0..10_000 {
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
        let cd = CurvatureData::new(n, a, b).unwrap();
        if closed_sigma2(&cd).is_positive_definite().unwrap() {
            hits += 1;
        }
    }
    assert_eq!(hits, 0, "positive definite residual over a singular sum");
    passed(
        "criterion 4",
        &format!("sigma2: closed rel {max_rel:.2e}, kernel id {max_violation:.2e}, 0/10000 boundary hits"),
    );
}

fn singular_sum_instance(
    rng: &mut ChaCha20Rng,
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

#[test]
fn criterion_5_j_path() {
    let omega = standard_kahler(3, 3);
    let eq = EquationCoeffs::j_equation(3);
    let probe = SymbolProbe::coordinate(3, 3, 2, 0, 0);
    let mut max_residual = 0.0f64;
    let mut max_identity = 0.0f64;
    let mut calibration = f64::NAN;
    let mut scale = f64::NAN;
    let mut max_witness_dev = 0.0f64;
    let mut witness_end = f64::NAN;
    for i in 0..201 {
        let s = 2.0 * i as f64 / 200.0;
        let pt = j_path(s).unwrap();
        let f = pt.data.assemble();
        max_residual = max_residual.max(poly_residual(&f, &omega, &eq).unwrap().fro_norm());
        if s <= 1.0 {
            let inv = 1.0 / pt.label("r") + 1.0 / pt.label("v") + 1.0 / pt.label("z");
            max_identity = max_identity.max((inv - 3.0).abs());
        }
        let witness = condition_e_value(&f, &omega, &eq, &probe).unwrap();
        let expr = 2.0
            * (3.0 * pt.label("p") * pt.label("s")
                - pt.label("a").powi(2)
                - pt.label("p")
                - pt.label("s"));
        if i == 0 {
            calibration = witness / expr;
            scale = witness.abs();
        }
        max_witness_dev = max_witness_dev.max((witness - calibration * expr).abs() / (1.0 + scale));
        if i == 200 {
            witness_end = witness;
        }
    }
    assert!(max_residual <= 1e-10, "J residual {max_residual:e}");
    assert!(max_identity <= 1e-14, "segment-1 identity {max_identity:e}");
    assert!(
        max_witness_dev <= 1e-8,
        "witness closed form {max_witness_dev:e}"
    );
    assert!(
        witness_end.abs() <= 1e-8,
        "witness endpoint {witness_end:e}"
    );
    passed(
        "criterion 5",
        &format!(
            "J path: residual {max_residual:.2e}, identity {max_identity:.2e}, witness dev {max_witness_dev:.2e}, endpoint {witness_end:.2e}"
        ),
    );
}

#[test]
fn criterion_6_sigma_k_continuation() {
    let opts = NewtonOpts::default();
    let grid = linspace(0.0, 1.0, 21);

    // ε = 0 recovers the closed forms.
    let report0 = solve_sigma_k(3, 4, 0.0, &grid, &opts, 1006).unwrap();
    let mut max_dev = 0.0f64;
    for row in &report0.rows {
        max_dev = max_dev.max((row.unknowns["u"] - vbma_u(row.t)).abs());
        max_dev = max_dev.max((row.unknowns["z"] - vbma_z(row.t)).abs());
    }
    assert!(max_dev <= 1e-9, "eps=0 closed-form recovery {max_dev:e}");

    // ε = 1e-3: solvable, positive, witness zero at the endpoint.
    let eps = 1e-3;
    let report = solve_sigma_k(3, 4, eps, &grid, &opts, 1006).unwrap();
    let max_res = report
        .rows
        .iter()
        .map(|r| r.residual_norm)
        .fold(0.0, f64::max);
    assert!(max_res <= 1e-8, "residual {max_res:e}");
    assert!(
        report.rows.iter().all(|r| r.triple.alpha > 0.0),
        "alpha positive"
    );
    let w1 = report.rows.last().unwrap().condition_e;
    assert!(w1.abs() <= 1e-8, "witness at t=1: {w1:e}");
    assert!(report.rows.first().unwrap().condition_e > 0.0);

    // The Jacobian factor stays positive: minimum 21.6 at t = 1, exactly.
    let factor = |t: f64| 36.0 * (1.0 + t) * (1.0 + 2.0 * t) * (1.0 - 0.9 * t);
    let (jmin, jarg) = certify_positive(factor, (0.0, 1.0), 101).unwrap();
    assert!((jmin - 21.6).abs() <= 1e-10, "factor min {jmin}");
    assert!((jarg - 1.0).abs() <= 1e-10, "factor argmin {jarg}");
    passed(
        "criterion 6",
        &format!(
            "sigma_3 on n=4: eps=0 recovery {max_dev:.2e}, eps=1e-3 residual {max_res:.2e}, witness {w1:.2e}, factor min {jmin}"
        ),
    );
}

#[test]
fn criterion_7_dhym_continuation() {
    let opts = NewtonOpts::default();
    for eps in [1e-3, 1e-2] {
        let report = solve_dhym(3, eps, 1.0, 0.05, 20, &opts, 1007).unwrap();
        let max_res = report
            .rows
            .iter()
            .map(|r| r.residual_norm)
            .fold(0.0, f64::max);
        assert!(max_res <= 1e-8, "eps {eps}: residual {max_res:e}");
        let mut max_dev = 0.0f64;
        for row in &report.rows {
            max_dev = max_dev.max((row.unknowns["v"] - j_seg2_v(row.t)).abs());
        }
        assert!(max_dev <= 10.0 * eps, "eps {eps}: v deviation {max_dev:e}");
        assert!(
            report.min_rank_one_at_start.unwrap() > 0.0,
            "eps {eps}: start not positive"
        );
        let w1 = report.rows.last().unwrap().condition_e;
        assert!(w1.abs() <= 1e-8, "eps {eps}: witness {w1:e}");
    }

    // The coefficient expansion against the direct complex evaluation.
    let mut rng = ChaCha20Rng::seed_from_u64(1007);
    let omega = standard_kahler(3, 3);
    let mut max_err = 0.0f64;
    for _ in 0..100 {
        let c = random_curvature(&mut rng, 3, 3);
        let theta: f64 = rng.gen_range(-3.0..3.0);
        let f = c.assemble();
        let via = poly_residual(&f, &omega, &EquationCoeffs::dhym(3, theta)).unwrap();
        let direct = dhym_residual_direct(&f, &omega, theta).unwrap();
        max_err = max_err.max(via.sub(&direct).fro_norm() / (1.0 + direct.fro_norm()));
    }
    assert!(max_err <= 1e-10, "dhym coefficient identity {max_err:e}");
    passed(
        "criterion 7",
        &format!(
            "dhym continuation at eps in {{1e-3, 1e-2}} solved; coefficient identity {max_err:.2e}"
        ),
    );
}

#[test]
fn criterion_8_ellipticity_machinery() {
    let mut rng = ChaCha20Rng::seed_from_u64(1008);
    let omega = standard_kahler(3, 3);

    // Pairing identity on 100 random inputs.
    let mut max_gap = 0.0f64;
    for trial in 0..100 {
        let c = random_curvature(&mut rng, 3, 3);
        let eq = match trial % 3 {
            0 => EquationCoeffs::vbma(3),
            1 => EquationCoeffs::j_equation(3),
            _ => EquationCoeffs::dhym(3, 0.9),
        };
        let chi = random_unit_vector(&mut rng, 3);
        let psi = random_matrix(&mut rng, 3, 3);
        let (lhs, rhs) = pairing_check(&c.assemble(), &omega, &eq, &chi, &psi).unwrap();
        max_gap = max_gap.max((lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs()));
    }
    assert!(max_gap <= 1e-10, "pairing identity {max_gap:e}");

    // Trivial-curvature symbol.
    let eq = EquationCoeffs::vbma(3);
    let f = CurvatureData::trivial(3, 3, 1.0).assemble();
    let s = symbol_matrix(&f, &omega, &eq, &e_k(3, 0)).unwrap();
    let dev = s.sub(&CMatrix::identity(9).scaled_re(6.0)).fro_norm();
    assert!(dev <= 1e-12, "trivial symbol deviation {dev:e}");

    // Symbol scan at the vbMA endpoint, e2 always included.
    let f1 = vbma_path(1.0).unwrap().data.assemble();
    let scan = full_symbol_scan(&f1, &omega, &eq, 64, 1008).unwrap();
    assert!(
        scan.min_eigenvalue <= 1e-8,
        "scan at endpoint: {:e}",
        scan.min_eigenvalue
    );

    // And the rank-one minimiser sees the same degeneration.
    let (min_value, _) = min_rank_one(&f1, &omega, &eq, 16, 1008).unwrap();
    assert!(min_value <= 1e-8, "min_rank_one at endpoint {min_value:e}");
    passed(
        "criterion 8",
        &format!(
            "pairing {max_gap:.2e}, trivial symbol {dev:.2e}, endpoint scan {:.2e}",
            scan.min_eigenvalue
        ),
    );
}
