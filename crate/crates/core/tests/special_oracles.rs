use proptest::prelude::*;
use vistheme_core::stats::special::{beta_inc, chi_square_sf, f_sf, gamma_p, gamma_q, ln_gamma};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300) || (a - b).abs() <= 1e-300
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn binom(n: u32, k: u32) -> f64 {
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
}

/// P(a, x) for integer a via the Poisson tail.
fn gamma_p_integer(a: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..a {
        term *= x / k as f64;
        sum += term;
    }
    1.0 - (-x).exp() * sum
}

/// I_x(a, b) for integer a, b via the binomial identity.
fn beta_inc_integer(a: u32, b: u32, x: f64) -> f64 {
    let n = a + b - 1;
    (a..=n).map(|j| binom(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32)).sum()
}

/// Composite Simpson on the t = sin²θ form of the beta integrand, which is
/// smooth on [0, π/2] for the half-integer shapes used below.
fn beta_inc_quadrature(a: f64, b: f64, x: f64) -> f64 {
    let f = |th: f64| th.sin().powf(2.0 * a - 1.0) * th.cos().powf(2.0 * b - 1.0);
    let simpson = |lo: f64, hi: f64| {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    simpson(0.0, x.sqrt().asin()) / simpson(0.0, std::f64::consts::FRAC_PI_2)
}

#[test]
fn ln_gamma_factorials_and_half_integers() {
    for n in 1..60u32 {
        assert!(rel_close(ln_gamma(n as f64), ln_factorial(n - 1), 1e-12) || n <= 2, "n = {n}");
    }
    assert!(ln_gamma(1.0f64).abs() < 1e-14 && ln_gamma(2.0f64).abs() < 1e-14);
    let pi_ln_half = 0.5 * std::f64::consts::PI.ln();
    for n in 0..40u32 {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        let exact = ln_factorial(2 * n) + pi_ln_half - n as f64 * 4f64.ln() - ln_factorial(n);
        assert!(rel_close(ln_gamma(n as f64 + 0.5), exact, 1e-10) || exact.abs() < 1e-10, "n = {n}");
    }
    assert!(ln_gamma(0.0f64).is_infinite() && ln_gamma(-3.0f64).is_infinite());
}

#[test]
fn chi_square_closed_forms() {
    for &x in &[0.1, 1.0, 2.5, 7.0, 20.0, 60.0] {
        assert!(rel_close(chi_square_sf(x, 2.0f64), (-x / 2.0f64).exp(), 1e-10));
        // df = 4: e^{-x/2} (1 + x/2)
        assert!(rel_close(chi_square_sf(x, 4.0f64), (-x / 2.0f64).exp() * (1.0 + x / 2.0), 1e-10));
    }
    assert_eq!(chi_square_sf(0.0f64, 3.0), 1.0);
}

#[test]
fn beta_inc_quadrature_for_fractional_shapes() {
    for &(a, b) in &[(1.5, 2.5), (2.5, 3.5), (3.5, 1.5), (0.5, 4.5)] {
        for &x in &[0.1, 0.3, 0.5, 0.8] {
            let q = beta_inc_quadrature(a, b, x);
            assert!((beta_inc(a, b, x) - q).abs() < 1e-10, "a={a} b={b} x={x}");
        }
    }
}

proptest! {
    #[test]
    fn gamma_p_matches_poisson_tail(a in 1u32..30, x in 0.01f64..60.0) {
        let exact = gamma_p_integer(a, x);
        prop_assert!((gamma_p(a as f64, x) - exact).abs() < 1e-10);
        prop_assert!((gamma_q(a as f64, x) - (1.0 - exact)).abs() < 1e-10);
    }

    #[test]
    fn beta_inc_matches_binomial(a in 1u32..25, b in 1u32..25, x in 0.0f64..1.0) {
        let exact = beta_inc_integer(a, b, x);
        prop_assert!((beta_inc(a as f64, b as f64, x) - exact).abs() < 1e-10);
    }

    #[test]
    fn beta_inc_symmetry(a in 0.2f64..30.0, b in 0.2f64..30.0, x in 0.0f64..1.0) {
        prop_assert!((beta_inc(a, b, x) + beta_inc(b, a, 1.0 - x) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn f_sf_two_numerator_df(f in 0.0f64..50.0, d2 in 1u32..200) {
        let d2 = d2 as f64;
        let exact = (1.0 + 2.0 * f / d2).powf(-d2 / 2.0);
        prop_assert!((f_sf(f, 2.0, d2) - exact).abs() < 1e-10);
    }
}
