use std::f64::consts::PI;

use edgeworth::cumulants::{bernoulli_distribution, lattice_stats, LatticeDistribution};
use edgeworth::edgeworth::{normal_pdf, EdgeworthModel, GaussCombo};
use edgeworth::exactprob::{
    binomial_cdf_exact, chvatal_q, chvatal_q_strict, poisson_cdf, total_variation_binomial_poisson,
};
use edgeworth::series::{
    bernoulli_numbers, bernoulli_polynomial, hermite, psi, psi_exact, Polynomial, TruncatedUSeries,
};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn to_f64(x: &BigRational) -> f64 {
    edgeworth::exactprob::rational_to_f64(x)
}

/// Small pmf on consecutive-ish integers with positive rational weights.
fn pmf_strategy() -> impl Strategy<Value = Vec<(i64, BigRational)>> {
    (-3i64..3, prop::collection::vec((1i64..5, 1u32..20), 2..6)).prop_map(|(start, steps)| {
        let total: u32 = steps.iter().map(|(_, w)| w).sum();
        let mut x = start;
        steps
            .into_iter()
            .map(|(gap, w)| {
                let point = (x, q(w as i64, total as i64));
                x += gap;
                point
            })
            .collect()
    })
}

/// Span-1 variant: the first two support points are adjacent.
fn span_one_pmf() -> impl Strategy<Value = Vec<(i64, BigRational)>> {
    pmf_strategy().prop_map(|mut pmf| {
        pmf[1].0 = pmf[0].0 + 1;
        pmf.sort_by_key(|(x, _)| *x);
        pmf.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 = &b.1 + &a.1;
                true
            } else {
                false
            }
        });
        pmf
    })
}

fn unit_p() -> impl Strategy<Value = BigRational> {
    (1i64..100).prop_map(|a| q(a, 100))
}

// ---------------------------------------------------------------- binomial

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_is_strong_median(n in 2u64..80, frac in 0.0f64..1.0) {
        let m = 1 + ((n - 2) as f64 * frac) as u64;
        let half = q(1, 2);
        let lt = binomial_cdf_exact(n, m, m as i64, true).unwrap();
        let le = binomial_cdf_exact(n, m, m as i64, false).unwrap();
        prop_assert!(lt < half && half < le, "n={n} m={m}");
    }

    #[test]
    fn complement_is_reflected_strict_cdf(n in 1u64..80, frac in 0.0f64..=1.0) {
        let m = (n as f64 * frac).round() as u64;
        let lhs = BigRational::one() - chvatal_q(n, m).unwrap();
        prop_assert_eq!(lhs, chvatal_q_strict(n, n - m).unwrap());
    }

    #[test]
    fn cdf_monotone_in_threshold(n in 1u64..60, frac in 0.0f64..=1.0) {
        let m = (n as f64 * frac).round() as u64;
        let mut prev = BigRational::zero();
        for t in -1..=n as i64 + 1 {
            for strict in [true, false] {
                let v = binomial_cdf_exact(n, m, t, strict).unwrap();
                prop_assert!(v >= prev && v <= BigRational::one());
                prev = v;
            }
        }
        prop_assert_eq!(prev, BigRational::one());
    }

    #[test]
    fn total_variation_below_p(n in 1u64..=500, frac in 0.0f64..1.0) {
        let m = 1 + ((n - 1) as f64 * frac) as u64;
        if m >= n {
            return Ok(());
        }
        let p = q(m as i64, n as i64);
        let tv = total_variation_binomial_poisson(n, &p, 128).unwrap();
        prop_assert!(tv.value() + tv.error_bound() < to_f64(&p));
        prop_assert!(tv.value() >= 0.0);
    }
}

#[test]
fn endpoints_are_one() {
    for n in 1..40 {
        assert_eq!(chvatal_q(n, 0).unwrap(), BigRational::one());
        assert_eq!(chvatal_q(n, n).unwrap(), BigRational::one());
    }
}

/// `P(Po(m) <= m) = (1/m!) int_m^inf t^m e^{-t} dt` by composite Simpson.
fn gamma_tail(m: u64) -> f64 {
    let mf = m as f64;
    let lgam = libm::lgamma(mf + 1.0);
    let f = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            (mf * t.ln() - t - lgam).exp()
        }
    };
    let hi = mf + 40.0 + 12.0 * mf.sqrt();
    let steps = 200_000;
    let h = (hi - mf) / steps as f64;
    let mut acc = f(mf) + f(hi);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(mf + i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn poisson_cdf_matches_gamma_integral() {
    for m in [1u64, 5, 20] {
        let v = poisson_cdf(&q(m as i64, 1), m as i64, false, 192).unwrap();
        let quad = gamma_tail(m);
        assert!(
            (v.value() - quad).abs() <= v.error_bound() + 1e-12,
            "m={m}: {} vs {quad}",
            v.value()
        );
    }
}

// ------------------------------------------------------------------ series

fn rational_poly(coeffs: Vec<i64>) -> Polynomial<BigRational> {
    Polynomial::new(coeffs.into_iter().map(|c| q(c, 3)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_exp_has_inverse(
        order in 1usize..6,
        raw in prop::collection::vec(prop::collection::vec(-4i64..5, 0..4), 6),
    ) {
        let mut coeffs = vec![Polynomial::zero()];
        coeffs.extend(raw.into_iter().take(order).map(rational_poly));
        let s = TruncatedUSeries::new(order, coeffs);
        let e = s.exp().unwrap();
        let inv = s.neg().exp().unwrap();
        prop_assert!(e.mul(&inv).is_one());
    }

    #[test]
    fn psi_is_periodic(r in 1usize..=8, x in -20.0f64..20.0) {
        let shift = psi(r, x + 1.0);
        let base = psi(r, x);
        // x + 1 may round differently from x; allow for the slope of psi_1
        prop_assert!((shift - base).abs() < 1e-12, "r={r} x={x}");
    }

    #[test]
    fn psi_exact_is_periodic(r in 1usize..=8, a in -200i64..200, b in 1i64..50) {
        let x = q(a, b);
        prop_assert_eq!(psi_exact(r, &x), psi_exact(r, &(&x + BigRational::one())));
    }

    #[test]
    fn psi_matches_fourier_series(r in 2usize..=6, x in 0.0f64..1.0) {
        // psi_r(x) = sum_{k != 0} e^{2 pi i k x} / (2 pi i k)^r
        let kmax = 10_000;
        let s = if r % 2 == 0 { (r / 2) as i32 } else { ((r - 1) / 2) as i32 };
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for k in (1..=kmax).rev() {
            let theta = 2.0 * PI * k as f64 * x;
            let trig = if r % 2 == 0 { theta.cos() } else { theta.sin() };
            acc += trig / (2.0 * PI * k as f64).powi(r as i32);
        }
        let fourier = 2.0 * sign * acc;
        let tail = 2.0 / (2.0 * PI).powi(r as i32) * (kmax as f64).powi(1 - r as i32)
            / (r as f64 - 1.0);
        prop_assert!((fourier - psi(r, x)).abs() <= tail + 1e-14, "r={r} x={x}");
    }

    #[test]
    fn hermite_chain_matches_difference_quotient(r in 1usize..=8, x in -4.0f64..4.0) {
        let d = |r: usize, x: f64| {
            let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * hermite::<f64>(r).eval_f64(x) * normal_pdf(x)
        };
        let h = 1e-5;
        let fd = (d(r - 1, x + h) - d(r - 1, x - h)) / (2.0 * h);
        let scale = (0..=r).map(|j| d(j, x).abs()).fold(1e-3, f64::max);
        prop_assert!((fd - d(r, x)).abs() <= 1e-6 * scale, "r={r} x={x}");
    }
}

#[test]
fn hermite_low_orders_match_direct_differences() {
    let h = 1e-3;
    for x in [-2.5, -0.7, 0.0, 0.4, 1.9] {
        let f = normal_pdf;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let d3 =
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h.powi(3));
        assert!((d1 + hermite::<f64>(1).eval_f64(x) * f(x)).abs() < 1e-7);
        assert!((d2 - hermite::<f64>(2).eval_f64(x) * f(x)).abs() < 1e-6);
        assert!((d3 + hermite::<f64>(3).eval_f64(x) * f(x)).abs() < 1e-5);
    }
}

#[test]
fn bernoulli_identities() {
    let b = bernoulli_numbers(12);
    for (r, br) in b.iter().enumerate() {
        let poly = bernoulli_polynomial(r);
        // B_r(0) = B_r, and B_r(1) = B_r except B_1(1) = +1/2
        assert_eq!(&poly.eval(&BigRational::zero()), br);
        let at_one = poly.eval(&BigRational::one());
        if r == 1 {
            assert_eq!(at_one, q(1, 2));
        } else {
            assert_eq!(&at_one, br);
        }
        if r >= 3 && r % 2 == 1 {
            assert!(br.is_zero());
        }
        // B_r'(x) = r B_{r-1}(x)
        if r >= 1 {
            let lhs = poly.derivative();
            let rhs = bernoulli_polynomial(r - 1).scale(&q(r as i64, 1));
            assert_eq!(lhs, rhs);
        }
    }
    // psi_2 is continuous across the integers
    assert_eq!(psi_exact(2, &q(0, 1)), psi_exact(2, &q(1, 1)));
    assert_eq!(b[12], q(-691, 2730));
}

// --------------------------------------------------------------- cumulants

/// `sum_b S2assoc(j, b) (b - 1)!`, where `S2assoc` counts partitions of a
/// `j`-set into `b` blocks of size at least 2.
fn cumulant_constant(j: usize) -> f64 {
    let mut s = vec![vec![0.0f64; j + 1]; j + 1];
    s[0][0] = 1.0;
    for n in 1..=j {
        for b in 1..=n / 2 {
            let keep = b as f64 * s[n - 1][b];
            let fresh = if n >= 2 {
                (n - 1) as f64 * s[n - 2][b - 1]
            } else {
                0.0
            };
            s[n][b] = keep + fresh;
        }
    }
    (1..=j / 2)
        .map(|b| s[j][b] * (1..b).map(|i| i as f64).product::<f64>())
        .sum()
}

#[test]
fn cumulant_constants_small_cases() {
    assert_eq!(cumulant_constant(3), 1.0);
    assert_eq!(cumulant_constant(4), 1.0 + 3.0);
    assert_eq!(cumulant_constant(6), 1.0 + 15.0 + 10.0 + 15.0 * 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cumulant_bounded_by_absolute_moment(pmf in pmf_strategy()) {
        let d = lattice_stats(&pmf, 8).unwrap();
        for j in 3..=8 {
            let bound = cumulant_constant(j) * d.big_lambda(j);
            prop_assert!(d.lambda(j).abs() <= bound * (1.0 + 1e-12), "j={j}");
        }
    }

    #[test]
    fn normalized_moments_increase(pmf in pmf_strategy()) {
        let d = lattice_stats(&pmf, 8).unwrap();
        let exact = d.abs_central_moments_exact.as_ref().unwrap();
        prop_assert_eq!(&exact[2], &d.variance);
        let mut prev = 1.0;
        for j in 3..=8 {
            let root = d.big_lambda(j).powf(1.0 / (j as f64 - 2.0));
            prop_assert!(root >= prev * (1.0 - 1e-12), "j={j}");
            prev = root;
        }
    }

    #[test]
    fn cumulants_ignore_shifts(pmf in pmf_strategy(), c in -10i64..10) {
        let shifted: Vec<_> = pmf.iter().map(|(x, p)| (x + c, p.clone())).collect();
        let a = lattice_stats(&pmf, 8).unwrap();
        let b = lattice_stats(&shifted, 8).unwrap();
        prop_assert_eq!(&b.cumulants[1], &(&a.cumulants[1] + q(c, 1)));
        prop_assert_eq!(&a.cumulants[2..], &b.cumulants[2..]);
        prop_assert_eq!(a.span, b.span);
    }

    #[test]
    fn bernoulli_cumulants_bounded_by_variance(p in unit_p()) {
        let d = bernoulli_distribution(&p, 8).unwrap();
        let sigma = d.sigma();
        for j in 3..=8 {
            let bound = cumulant_constant(j) * sigma.powi(2 - j as i32);
            prop_assert!(d.lambda(j).abs() <= bound * (1.0 + 1e-12));
        }
    }
}

// --------------------------------------------------------------- edgeworth

fn nonzero_cumulants(d: &LatticeDistribution, upto: usize) -> bool {
    d.cumulants[3..=upto].iter().all(|c| !c.is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pi_table_sparsity_and_parity(pmf in pmf_strategy(), k in 1usize..=6) {
        let d = lattice_stats(&pmf, k + 2).unwrap();
        let table = edgeworth::edgeworth::edgeworth_polynomials(&d, k).unwrap();
        for j in 1..=k {
            for r in 0..=3 * k + 2 {
                let v = table.pi_hat(j, r);
                if r < j + 2 || r > 3 * j || (r - j) % 2 == 1 {
                    prop_assert!(v.is_zero(), "j={j} r={r}");
                }
            }
            if nonzero_cumulants(&d, k + 2) {
                let p = table.p_hat(j);
                prop_assert_eq!(p.degree(), 3 * j as isize);
                prop_assert_eq!(p.lowest_degree(), Some(j + 2));
            }
        }
    }

    #[test]
    fn odd_even_derivatives_vanish_at_zero(pmf in span_one_pmf(), k in 1usize..=6) {
        let d = lattice_stats(&pmf, k + 2).unwrap();
        prop_assume!(d.span == 1);
        let model = EdgeworthModel::new(&d, k).unwrap();
        for j in 0..=k {
            for l in 0..=k {
                if (j + l) % 2 == 0 && (j, l) != (0, 0) {
                    let c = model.q_hat(j, l);
                    prop_assert!(c.phi_part.is_zero(), "j={j} l={l}");
                    prop_assert!(c.poly_part.coeff(0).is_zero(), "j={j} l={l}");
                }
            }
        }
    }

    #[test]
    fn gauss_combo_derivatives_match_differences(
        p in unit_p(),
        j in 0usize..=4,
        xs in prop::collection::vec(-5.0f64..5.0, 20),
    ) {
        let d = bernoulli_distribution(&p, 6).unwrap();
        let model = EdgeworthModel::new(&d, 4).unwrap();
        let base: GaussCombo<f64> = model.q_function(j, 0);
        let ders = base.derivatives(6);
        let h = 1e-5;
        for &x in &xs {
            for l in 0..6 {
                let fd = (ders[l].eval(x + h) - ders[l].eval(x - h)) / (2.0 * h);
                let exact = ders[l + 1].eval(x);
                let scale = ders.iter().map(|c| c.eval(x).abs()).fold(0.0, f64::max);
                let scale = scale.max(exact.abs()).max(1e-12);
                prop_assert!(
                    (fd - exact).abs() <= 1e-6 * scale,
                    "j={j} l={l} x={x}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn lattice_cdf_monotone_between_lattice_points(p in unit_p(), n in 20u64..400) {
        let d = bernoulli_distribution(&p, 6).unwrap();
        let model = EdgeworthModel::new(&d, 2).unwrap();
        prop_assume!(model.within_guarantee(n));
        let variant = edgeworth::edgeworth::Variant::Simplified;
        let mut prev = f64::NEG_INFINITY;
        for t in 0..=n as i64 {
            let lt = model.lattice_cdf_at(n, t, variant, true).unwrap();
            let le = model.lattice_cdf_at(n, t, variant, false).unwrap();
            // the jump at t approximates P(S_n = t) >= 0 up to the expansion error
            prop_assert!(le >= lt - 1e-3, "t={t}");
            prop_assert!(lt >= prev - 1e-3, "t={t}");
            prev = le;
        }
    }
}

#[test]
fn strict_value_differs_by_point_mass() {
    // Be(1/2), n = 100, t = 50: P(S = 50) ~ 0.0796
    let d = bernoulli_distribution(&q(1, 2), 6).unwrap();
    let model = EdgeworthModel::new(&d, 4).unwrap();
    let v = edgeworth::edgeworth::Variant::Simplified;
    let jump = model.lattice_cdf_at(100, 50, v, false).unwrap()
        - model.lattice_cdf_at(100, 50, v, true).unwrap();
    let exact = binomial_cdf_exact(100, 50, 50, false).unwrap()
        - binomial_cdf_exact(100, 50, 50, true).unwrap();
    assert!((jump - to_f64(&exact)).abs() < 1e-6);
}

#[test]
fn span_two_is_rejected() {
    let d = lattice_stats(&[(0, q(1, 2)), (2, q(1, 2))], 4).unwrap();
    assert_eq!(d.span, 2);
    let model = EdgeworthModel::new(&d, 2).unwrap();
    let v = edgeworth::edgeworth::Variant::Full;
    assert!(model.lattice_cdf_approx(10, 0.0, v, false).is_err());
}

/// `sup_x |H_{n,k}^{(m)}(x)| <= C_{k,m} (1 + Lambda_{k+2} n^{-k/2})` with
/// constants fitted on a calibration grid and then frozen.
#[test]
fn expansion_derivatives_stay_bounded() {
    let grid: Vec<f64> = (0..=400).map(|i| -5.0 + i as f64 * 0.025).collect();
    let sup = |model: &EdgeworthModel, n: u64, m: usize| -> f64 {
        let h = model.h_function(n).unwrap().derivatives(m).pop().unwrap();
        grid.iter().map(|&x| h.eval(x).abs()).fold(0.0, f64::max)
    };
    // frozen constants C_{k,m}, k = 1..=4, m = 0..=3
    const C: [[f64; 4]; 4] = [
        [1.05, 0.42, 0.27, 0.42],
        [1.05, 0.42, 0.27, 0.42],
        [1.05, 0.42, 0.27, 0.42],
        [1.05, 0.42, 0.27, 0.42],
    ];
    for p in [q(1, 20), q(1, 5), q(1, 2), q(7, 10), q(19, 20)] {
        let d = bernoulli_distribution(&p, 8).unwrap();
        for k in 1..=4 {
            let model = EdgeworthModel::new(&d, k).unwrap();
            for n in [50u64, 200, 1000, 5000, 20000] {
                if !model.within_guarantee(n) {
                    continue;
                }
                let weight = 1.0 + d.big_lambda(k + 2) * (n as f64).powf(-(k as f64) / 2.0);
                for (m, c) in C[k - 1].iter().enumerate() {
                    let s = sup(&model, n, m);
                    assert!(
                        s <= c * weight,
                        "p={p} k={k} n={n} m={m}: {s} > {}",
                        c * weight
                    );
                }
            }
        }
    }
}

#[test]
fn bernoulli_residuals_scale_with_variance() {
    use edgeworth::edgeworth::{default_grid, residual_scan, BinomialOracle, Variant};
    // one constant per k must cover every p and n: the worst ratio among
    // the larger n may not exceed twice the worst among the smaller ones
    let grid = default_grid();
    for k in 1..=3usize {
        let mut small: f64 = 0.0;
        let mut large: f64 = 0.0;
        for p in [q(1, 10), q(3, 10), q(1, 2), q(4, 5)] {
            let d = bernoulli_distribution(&p, k + 2).unwrap();
            let model = EdgeworthModel::new(&d, k).unwrap();
            for n in [100u64, 200, 400, 800, 1600, 3200] {
                if !model.within_guarantee(n) {
                    continue;
                }
                let oracle = BinomialOracle::new(n, &p).unwrap();
                let scan = residual_scan(&model, n, &grid, &oracle, Variant::Simplified).unwrap();
                let v = n as f64 * to_f64(&p) * (1.0 - to_f64(&p));
                let ratio = scan.sup_residual * v.powf((k as f64 + 1.0) / 2.0);
                if n <= 400 {
                    small = small.max(ratio);
                } else {
                    large = large.max(ratio);
                }
            }
        }
        assert!(
            small > 0.0 && large <= 2.0 * small,
            "k={k}: {small} {large}"
        );
    }
}

#[test]
fn abs_p_values_are_positive() {
    // sanity for the strategies above
    let d = lattice_stats(&[(0, q(1, 3)), (1, q(2, 3))], 4).unwrap();
    assert!(d.variance.is_positive());
}

// ---------------------------------------------------------------- binomial expansion

fn h1_ref(p: f64) -> f64 {
    (2.0 - p) / (3.0 * (2.0 * PI).sqrt() * (p * (1.0 - p)).sqrt())
}

fn h3_ref(p: f64) -> f64 {
    (2.0 - p) * (p * p + 23.0 * p - 23.0) / (540.0 * (2.0 * PI).sqrt() * (p * (1.0 - p)).powf(1.5))
}

/// Worst ratio among the smaller `n` and among the larger `n`.
fn split_worst(rows: &[(u64, f64)], cut: u64) -> (f64, f64) {
    rows.iter().fold((0.0, 0.0), |(s, l), &(n, r)| {
        if n <= cut {
            (s.max(r), l)
        } else {
            (s, l.max(r))
        }
    })
}

#[test]
fn two_term_expansion_error_has_one_constant() {
    use edgeworth::exactprob::QTable;
    let mut rows = Vec::new();
    for n in [200u64, 400, 800, 1600] {
        let table = QTable::new(n).unwrap();
        let nf = n as f64;
        for m in 1..n {
            let p = m as f64 / nf;
            let v = nf * p * (1.0 - p);
            if v < nf.ln().powi(2) {
                continue;
            }
            let qm = to_f64(&table.q(m));
            let err = (qm - 0.5 - h1_ref(p) / nf.sqrt() - h3_ref(p) * nf.powf(-1.5)).abs();
            rows.push((n, err * v.powf(2.5)));
        }
    }
    let (small, large) = split_worst(&rows, 400);
    assert!(small > 0.0 && large <= 2.0 * small, "{small} {large}");
}

#[test]
fn sawtooth_approximation_error_has_one_constant() {
    use edgeworth::binomial_chvatal::{scan_fixed_n, uniform_p_grid};
    let mut rows = Vec::new();
    for n in [100u64, 200, 400, 800, 1600] {
        for r in scan_fixed_n(n, &uniform_p_grid(199)).unwrap() {
            if !r.qualified {
                continue;
            }
            let p = to_f64(&r.p);
            let v = n as f64 * p * (1.0 - p);
            rows.push((n, r.rp_residual().abs() * v));
        }
    }
    let (small, large) = split_worst(&rows, 200);
    assert!(small > 0.0 && large <= 2.0 * small, "{small} {large}");
}

#[test]
fn predictor_signs_in_critical_window() {
    use edgeworth::binomial_chvatal::{predict_q_difference, Regime};
    use edgeworth::exactprob::QTable;
    for n in (500u64..=1000).step_by(50) {
        let table = QTable::new(n).unwrap();
        let mut seen = 0;
        for m in 0..n {
            let pred = predict_q_difference(n, m).unwrap();
            if pred.regime != Regime::CriticalWindow {
                continue;
            }
            seen += 1;
            let exact = table.le[m as usize + 1].cmp(&table.le[m as usize]);
            let want = if pred.predicted < 0.0 {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            };
            assert_eq!(exact, want, "n={n} m={m}");
        }
        assert!(seen >= 20);
    }
}
