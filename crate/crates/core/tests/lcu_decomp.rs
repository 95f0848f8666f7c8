use std::f64::consts::PI;

use lcu_core::core_algebra::*;
use lcu_core::lcu_decomp::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

type Rng64 = rand_xoshiro::Xoshiro256PlusPlus;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn op_norm(m: &CMatrix) -> f64 {
    spectral_norm(m)
}

/// Hermitian matrix with the given eigenvalues in a random basis.
fn with_spectrum(values: &[f64], rng: &mut Rng64) -> DenseOperator {
    let n = values.len();
    let g = random_unit_hermitian(n, rng);
    let basis = EigenDecomposition::new(&g).unwrap();
    let v = basis.vectors();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, values.iter().map(|x| c(*x))));
    DenseOperator::hermitian(v * d * v.adjoint()).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn gaussian_coefficients_and_norm() {
    let g = gaussian_lcu(4.0, 1e-2).unwrap();
    let centre = g.lcu.terms().iter().find(|t| t.unitary.cost() == 0.0).unwrap();
    assert!((centre.coeff - g.delta_t / (2.0 * PI).sqrt()).abs() < 1e-16);
    assert!(g.lcu.l1_norm() <= 1.0 + g.delta_t);
    assert_eq!(g.lcu.len(), 2 * g.m + 1);
    assert!((g.lcu.tau_max() - g.tau_max()).abs() <= 1e-12 * g.tau_max());
    assert!(gaussian_lcu(1.0, 0.1).is_err());
    assert!(gaussian_lcu(2.0, 1.0).is_err());
}

#[test]
fn gaussian_matrix_accuracy_on_padded_z() {
    let h = PauliHamiltonian::parse("0.5*ZII").unwrap();
    let hd = DenseOperator::hermitian(h.to_dense()).unwrap();
    let eig = EigenDecomposition::new(&hd).unwrap();
    let g = gaussian_lcu(25.0, 1e-3).unwrap();
    let realized = realize_sum(&g.lcu, RealizeContext::Spectral(&eig)).unwrap();
    let oracle = matrix_function(&hd, |x| c((-25.0 * x * x).exp())).unwrap();
    assert!(op_norm(&(realized.matrix() - oracle.matrix())) <= 1e-3);
}

#[test]
fn gaussian_matrix_accuracy_on_random_unit_hamiltonians() {
    for seed in 0..20 {
        let mut rng = Rng64::seed_from_u64(seed);
        let h = random_unit_hermitian(8, &mut rng);
        let t = 1.5 + 30.0 * rng.random::<f64>();
        let gamma = 1e-3;
        let g = gaussian_lcu(t, gamma).unwrap();
        let eig = EigenDecomposition::new(&h).unwrap();
        let realized = realize_sum(&g.lcu, RealizeContext::Spectral(&eig)).unwrap();
        let oracle = matrix_function(&h, |x| c((-t * x * x).exp())).unwrap();
        assert!(op_norm(&(realized.matrix() - oracle.matrix())) <= gamma, "seed {seed}");
    }
}

#[test]
fn inverse_grid_stays_alias_free_at_small_kappa() {
    for (kappa, gamma) in [(1.0, 1e-3), (1.5, 1e-3), (2.0, 0.1 / 18.0), (3.0, 1e-3), (5.0, 1e-4)] {
        let inv = inverse_lcu(kappa, gamma).unwrap();
        let err = grid(1.0 / kappa, 1.0, 3001).into_iter().map(|x| (inv.scalar(x) - 1.0 / x).abs()).fold(0.0, f64::max);
        assert!(err <= gamma, "kappa {kappa} gamma {gamma}: {err}");
    }
    assert!(inverse_lcu(50.0, 1e-5).is_err());
}

#[test]
fn inverse_is_odd_and_accurate() {
    let inv = inverse_lcu(10.0, 1e-2).unwrap();
    let mut worst: f64 = 0.0;
    let pos = grid(0.1, 1.0, 1000);
    for &x in &pos {
        assert!((inv.scalar(x) + inv.scalar(-x)).abs() <= 1e-12);
        worst = worst.max((inv.scalar(x) - 1.0 / x).abs()).max((inv.scalar(-x) + 1.0 / x).abs());
    }
    assert!(worst <= 1e-2, "sup error {worst}");
    assert!(inv.scalar_sup_error <= 1e-2);
    // the largest evolution time is y_J · z_K
    let max_duration = inv.lcu.tau_max();
    assert!((max_duration - inv.tau_max()).abs() <= 1e-9 * max_duration);
}

#[test]
fn inverse_closed_form_matches_term_sum() {
    let inv = inverse_lcu(3.0, 0.05).unwrap();
    for x in [1.0 / 3.0, 0.5, -0.77, 1.0] {
        let direct = inv.lcu.scalar_response(x).unwrap();
        assert!(direct.im.abs() < 1e-9, "imaginary part {}", direct.im);
        assert!((direct.re - inv.scalar(x)).abs() < 1e-9);
    }
}

#[test]
fn inverse_norm_scaling_guard() {
    let gamma = 1e-2;
    for kappa in [2.0, 5.0, 10.0, 20.0] {
        let inv = inverse_lcu(kappa, gamma).unwrap();
        let bound = 10.0 * kappa * (kappa / gamma).ln().sqrt();
        assert!(inv.lcu.l1_norm() <= bound, "kappa {kappa}: {} > {bound}", inv.lcu.l1_norm());
    }
}

#[test]
fn inverse_matrix_accuracy_on_random_conditioned_inputs() {
    let kappa = 4.0;
    let gamma = 0.05;
    let inv = inverse_lcu(kappa, gamma).unwrap();
    for seed in 0..20 {
        let mut rng = Rng64::seed_from_u64(100 + seed);
        let values: Vec<f64> = (0..4)
            .map(|_| {
                let m = 1.0 / kappa + (1.0 - 1.0 / kappa) * rng.random::<f64>();
                if rng.random::<bool>() { m } else { -m }
            })
            .collect();
        let h = with_spectrum(&values, &mut rng);
        let eig = EigenDecomposition::new(&h).unwrap();
        let realized = realize_sum(&inv.lcu, RealizeContext::Spectral(&eig)).unwrap();
        let oracle = matrix_function(&h, |x| c(1.0 / x)).unwrap();
        assert!(op_norm(&(realized.matrix() - oracle.matrix())) <= gamma, "seed {seed}");
    }
}

#[test]
fn taylor_segment_exhaustive_enumeration() {
    let h = PauliHamiltonian::parse("0.3*X + 0.4*Z").unwrap();
    let seg = taylor_segment(&h, 1.0, 1, 8).unwrap();
    let all = seg.enumerate().unwrap();
    assert_eq!(all.len(), 682);
    assert!((all.l1_norm() - seg.l1_norm()).abs() < 1e-12);
    let realized = realize_sum(&all, RealizeContext::Pauli(&h)).unwrap();
    let oracle = time_evolution(&DenseOperator::hermitian(h.to_dense()).unwrap(), 1.0).unwrap();
    assert!(op_norm(&(realized.matrix() - oracle.matrix())) <= 1e-6);
}

#[test]
fn taylor_segment_norm_formulas() {
    let h = PauliHamiltonian::parse("0.3*XZ - 0.2*ZZ + 0.5*YI").unwrap();
    let beta = h.l1_norm();
    for (t, r, k) in [(0.5, 1, 0), (1.0, 2, 4), (3.0, 9, 6), (2.0, 3, 5)] {
        let seg = taylor_segment(&h, t, r, k).unwrap();
        let x: f64 = beta * t / r as f64;
        if k == 0 {
            assert!((seg.segment_l1() - (1.0 + x * x).sqrt()).abs() < 1e-15);
        }
        let zero_only = taylor_segment(&h, t, r, 0).unwrap();
        assert!((zero_only.segment_l1() - (1.0 + x * x).sqrt()).abs() < 1e-15);
        assert!(seg.l1_norm() <= (x * x * r as f64).exp() * (1.0 + 1e-12));
    }
}

#[test]
fn taylor_product_of_segments_approximates_evolution() {
    let h = PauliHamiltonian::parse("0.3*XZ - 0.2*ZZ + 0.5*YI").unwrap();
    let t = 1.5;
    let r = 3;
    let k = 4;
    let seg = taylor_segment(&h, t, r, k).unwrap();
    let one = realize_sum(&seg.enumerate().unwrap(), RealizeContext::Pauli(&h)).unwrap();
    let mut prod = CMatrix::identity(4, 4);
    for _ in 0..r {
        prod = one.matrix() * prod;
    }
    let oracle = time_evolution(&DenseOperator::hermitian(h.to_dense()).unwrap(), t).unwrap();
    let x = h.l1_norm() * t / r as f64;
    let tail = r as f64 * x.powi(k as i32 + 1) / (1..=k + 1).product::<usize>() as f64 * x.exp() * seg.l1_norm();
    assert!(op_norm(&(prod - oracle.matrix())) <= tail);
}

#[test]
fn taylor_sampler_follows_coefficients() {
    let h = PauliHamiltonian::parse("0.3*X - 0.4*Z").unwrap();
    let seg = taylor_segment(&h, 1.2, 1, 4).unwrap();
    let all = seg.enumerate().unwrap();
    let mut rng = Rng64::seed_from_u64(5);
    let n = 200_000;
    let mut counts = std::collections::HashMap::new();
    for _ in 0..n {
        let d = seg.sample(&mut rng);
        *counts.entry(format!("{:?}", d.unitary)).or_insert(0usize) += 1;
    }
    for term in all.terms() {
        let p = term.coeff / all.l1_norm();
        let seen = *counts.get(&format!("{:?}", term.unitary)).unwrap_or(&0) as f64 / n as f64;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((seen - p).abs() <= 5.0 * sd + 1e-9, "{:?}: {seen} vs {p}", term.unitary);
    }
}

#[test]
fn hamsim_parameter_choice() {
    let h = PauliHamiltonian::parse("0.3*X + 0.4*Z").unwrap();
    let p = hamsim_parameters(&h, 1.0, 0.1, 1.0).unwrap();
    assert_eq!(p.r, 1);
    assert_eq!(p.truncation, 4);
    let p0 = hamsim_parameters(&h, 0.0, 0.1, 1.0).unwrap();
    assert_eq!((p0.r, p0.truncation), (1, 0));
    let p2 = hamsim_parameters(&h, 2.0, 0.1, 1.0).unwrap();
    assert_eq!(p2.r, 2);
}

#[test]
fn chebyshev_small_cases() {
    let c2 = chebyshev_power_coeffs(2, 2);
    assert_eq!(c2.len(), 2);
    assert!((c2[0] - 0.5).abs() < 1e-15 && (c2[1] - 0.5).abs() < 1e-15);
    for x in grid(-1.0, 1.0, 101) {
        assert!((chebyshev_eval(&[0.5, 0.0, 0.5], x) - x * x).abs() < 1e-14);
    }
    let c1 = chebyshev_power_coeffs(1, 1);
    assert_eq!(c1.len(), 1);
    assert!((c1[0] - 1.0).abs() < 1e-15);
}

fn power_poly(t: usize, d: usize) -> Vec<f64> {
    let cs = chebyshev_power_coeffs(t, d);
    let mut dense = vec![0.0; t + 1];
    for (l, v) in cs.iter().enumerate() {
        dense[power_exponent(t, l)] = *v;
    }
    dense
}

#[test]
fn chebyshev_t50_accuracy() {
    let t = 50;
    let d = (2.0 * 50.0 * (2e6f64).ln()).sqrt().ceil() as usize;
    let p = power_poly(t, d);
    let worst = grid(-1.0, 1.0, 2001).into_iter().map(|x| (chebyshev_eval(&p, x) - x.powi(50)).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
    assert!(worst <= 2.0 * (-((d * d) as f64) / (2.0 * t as f64)).exp());
}

#[test]
fn exp_poly_examples() {
    let q0 = exp_poly_coeffs(0.0, 1e-3).unwrap();
    for x in grid(-1.0, 1.0, 11) {
        assert!((q0.eval(x) - 1.0).abs() < 1e-15);
    }
    for (t, eps) in [(1.0, 1e-3), (5.0, 1e-3), (20.0, 1e-3), (9.0, 1e-4)] {
        let q = exp_poly_coeffs(t, eps).unwrap();
        assert!(q.sup_error(2001) <= eps, "t {t}: {}", q.sup_error(2001));
        let at_one = q.eval(1.0);
        assert!(at_one <= 1.0 + 1e-12 && at_one >= 1.0 - eps);
        assert!(q.l1_norm() <= 1.0 + 1e-12);
    }
}

#[test]
fn gaussian_poly_examples() {
    let eps = 1e-3;
    assert!((gaussian_poly_eval(4.0, eps, 0.0).unwrap() - 1.0).abs() <= eps);
    assert!((gaussian_poly_eval(4.0, eps, 1.0).unwrap() - (-4.0f64).exp()).abs() <= eps);
    let g = gaussian_poly_coeffs(10.0, eps).unwrap();
    assert!(g.sup_error(2001) <= eps);
    // even-coefficient form evaluates the same polynomial in x
    let even = g.even_coeffs();
    let mut dense = vec![0.0; 2 * even.len()];
    for (e, v) in even.iter().enumerate() {
        dense[2 * e] = *v;
    }
    for x in grid(-1.0, 1.0, 51) {
        assert!((chebyshev_eval(&dense, x) - g.eval(x)).abs() < 1e-12);
    }
}

#[test]
fn realize_plumbing() {
    let mut rng = Rng64::seed_from_u64(9);
    let h = random_unit_hermitian(4, &mut rng);
    let eig = EigenDecomposition::new(&h).unwrap();
    let id = realize(&UnitaryDescriptor::Identity, RealizeContext::Spectral(&eig)).unwrap();
    assert!((id.matrix() - CMatrix::identity(4, 4)).iter().all(|x| x.norm() < 1e-15));
    let zero_time = realize(&UnitaryDescriptor::TimeEvolution { duration: 0.0, phase: Phase::One }, RealizeContext::Spectral(&eig)).unwrap();
    assert!((zero_time.matrix() - CMatrix::identity(4, 4)).iter().all(|x| x.norm() < 1e-12));
    let v = time_evolution(&h, 0.7).unwrap();
    let sq = realize(&UnitaryDescriptor::WalkPower { exponent: 2, phase: Phase::One }, RealizeContext::Walk(&v)).unwrap();
    assert!((sq.matrix() - v.matrix() * v.matrix()).iter().all(|x| x.norm() < 1e-14));
    // mismatched context
    let pauli = PauliHamiltonian::parse("X").unwrap();
    assert!(realize(&UnitaryDescriptor::WalkPower { exponent: 1, phase: Phase::One }, RealizeContext::Pauli(&pauli)).is_err());
}

#[test]
fn apply_descriptor_matches_realize() {
    let h = PauliHamiltonian::parse("0.3*XZ - 0.2*ZZ + 0.5*YI").unwrap();
    let seg = taylor_segment(&h, 0.9, 1, 4).unwrap();
    let psi = StateVector::from_real(&[0.2, -0.5, 0.7, 0.1]).unwrap();
    for term in seg.enumerate().unwrap().terms().iter().step_by(7) {
        let dense = realize(&term.unitary, RealizeContext::Pauli(&h)).unwrap().apply(psi.amplitudes());
        let direct = apply_descriptor(&term.unitary, RealizeContext::Pauli(&h), psi.amplitudes()).unwrap();
        for (a, b) in dense.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}

#[test]
fn coefficient_lists_are_reproducible() {
    assert_eq!(gaussian_lcu(7.0, 1e-3).unwrap().lcu, gaussian_lcu(7.0, 1e-3).unwrap().lcu);
    assert_eq!(inverse_lcu(3.0, 0.05).unwrap().lcu, inverse_lcu(3.0, 0.05).unwrap().lcu);
    assert_eq!(chebyshev_power_coeffs(33, 17), chebyshev_power_coeffs(33, 17));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gaussian_scalar_bound(t in 1.01f64..60.0, log_gamma in -4.0f64..-0.5) {
        let gamma = 10f64.powf(log_gamma);
        let g = gaussian_lcu(t, gamma).unwrap();
        prop_assert!(g.scalar_sup_error(2001) <= gamma);
        prop_assert!(g.lcu.l1_norm() <= 1.0 + g.delta_t);
        prop_assert!(g.lcu.coefficients().iter().all(|c| *c > 0.0 && c.is_finite()));
    }

    #[test]
    fn chebyshev_exact_when_degree_covers_power(t in 0usize..30, extra in 0usize..4) {
        let p = power_poly(t, t + extra);
        for x in grid(-1.0, 1.0, 41) {
            prop_assert!((chebyshev_eval(&p, x) - x.powi(t as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_truncation_error_and_mass(t in 1usize..400, log_eps in -8.0f64..-1.0) {
        let eps = 10f64.powf(log_eps);
        let d = (2.0 * t as f64 * (8.0 / eps).ln()).sqrt().ceil() as usize;
        let cs = chebyshev_power_coeffs(t, d);
        prop_assert!(cs.iter().sum::<f64>() >= 1.0 - eps / 4.0 - 1e-12);
        let p = power_poly(t, d);
        let bound = 2.0 * (-((d.min(t) * d.min(t)) as f64) / (2.0 * t as f64)).exp();
        let worst = grid(-1.0, 1.0, 401).into_iter().map(|x| (chebyshev_eval(&p, x) - x.powi(t as i32)).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= bound + 1e-12);
    }
}

#[test]
fn smaller_truncation_prefactor_misses_the_bound() {
    // M = ⌈√2(√t + √log(5/γ))√log(4/γ)⌉ cuts the Gaussian too early
    let (t, gamma) = (25.0f64, 1e-3f64);
    let m = (2f64.sqrt() * (t.sqrt() + (5.0 / gamma).ln().sqrt()) * (4.0 / gamma).ln().sqrt()).ceil() as usize;
    let short = gaussian_lcu_truncated(t, gamma, m).unwrap();
    assert!(short.scalar_sup_error(2001) > gamma);
    let full = gaussian_lcu(t, gamma).unwrap();
    assert!(full.m > m);
    assert!(full.scalar_sup_error(2001) <= gamma);
}
