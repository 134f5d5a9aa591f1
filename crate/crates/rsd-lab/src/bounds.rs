//! Closed forms the experiments compare against.

/// Constant in front of the single-school and uniform tail bounds.
pub const TAIL_CONSTANT: f64 = 17.0;
/// Denominator constant in the tail bound exponents.
pub const TAIL_SCALE: f64 = 32.0;

/// Single-school tail bound `17 exp(-ε · ratio / 32)` with
/// `ratio = α_k / γ̄_k`.
pub fn school_tail_bound(epsilon: f64, ratio: f64) -> f64 {
    TAIL_CONSTANT * (-epsilon * ratio / TAIL_SCALE).exp()
}

/// Uniform bound over `m` schools, `17 m exp(-ε η / 32)` with
/// `η = min_k α_k / γ̄_k`. For `m = 1` it is bit-identical to
/// [`school_tail_bound`].
pub fn uniform_tail_bound(epsilon: f64, eta: f64, m: usize) -> f64 {
    m as f64 * school_tail_bound(epsilon, eta)
}

/// Same bound written as `17 exp(ln m − ε η / 32)`.
pub fn uniform_tail_bound_log_form(epsilon: f64, eta: f64, m: usize) -> f64 {
    TAIL_CONSTANT * ((m as f64).ln() - epsilon * eta / TAIL_SCALE).exp()
}

/// Fixed-`t` deviation bound `8 exp(-n s / 32)` for `sup_t |X_t − E X_t|`.
pub fn fixed_t_bound(n: usize, s: f64) -> f64 {
    8.0 * (-(n as f64) * s / TAIL_SCALE).exp()
}

/// CDF of the lottery-unit cutoff of one block school: `x^c`.
pub fn block_cutoff_cdf(x: f64, c: usize) -> f64 {
    x.clamp(0.0, 1.0).powi(c as i32)
}

/// Expectation as stated alongside the CDF: `1 − 1/c`.
pub fn block_cutoff_mean_formula(c: usize) -> f64 {
    1.0 - 1.0 / c as f64
}

/// Expectation obtained by integrating `1 − x^c` over `[0, 1]`:
/// `1 − 1/(c+1)`.
pub fn block_cutoff_mean_integral(c: usize) -> f64 {
    1.0 - 1.0 / (c as f64 + 1.0)
}

/// Variance of the maximum of `c` independent uniforms.
pub fn block_cutoff_variance(c: usize) -> f64 {
    let c = c as f64;
    c / ((c + 1.0).powi(2) * (c + 2.0))
}

/// `P(min_k γ_k > t) = (1 − t^c)^m` for the block market.
pub fn min_cutoff_survival(t: f64, c: usize, m: usize) -> f64 {
    (1.0 - block_cutoff_cdf(t, c)).powi(m as i32)
}

/// Binomial standard error of a frequency estimated from `reps` trials.
pub fn binomial_stderr(p: f64, reps: u64) -> f64 {
    (p * (1.0 - p) / reps as f64).max(0.0).sqrt()
}

/// DKW half-width: with probability at least `1 − δ` the empirical CDF of
/// `reps` samples is within this sup-distance of the truth.
pub fn dkw_halfwidth(reps: u64, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * reps as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_bound_examples() {
        // ε = 0.1, α = 100, γ̄ = 1: 17 e^{-0.3125}
        let b = school_tail_bound(0.1, 100.0);
        assert!((b - 12.4375).abs() < 1e-3, "{b}");
        // ε = 0.5, α = 1e4, γ̄ = 0.9: exponent -173.6
        let b = school_tail_bound(0.5, 1e4 / 0.9);
        assert!(b < 1e-74 && b > 0.0, "{b}");
    }

    #[test]
    fn uniform_bound_forms_agree() {
        for &(e, eta, m) in &[(0.05, 1000.0, 100), (0.2, 50.0, 7), (0.01, 10.0, 1)] {
            let a = uniform_tail_bound(e, eta, m);
            let b = uniform_tail_bound_log_form(e, eta, m);
            assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} {b}");
        }
        assert_eq!(uniform_tail_bound(0.1, 33.0, 1), school_tail_bound(0.1, 33.0));
    }

    #[test]
    fn lottery_law_values() {
        assert_eq!(block_cutoff_cdf(0.5, 2), 0.25);
        assert_eq!(block_cutoff_mean_formula(2), 0.5);
        assert!((block_cutoff_mean_integral(2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(block_cutoff_mean_formula(1), 0.0);
        assert_eq!(block_cutoff_mean_integral(1), 0.5);
        assert!((min_cutoff_survival(0.5, 2, 2) - 0.5625).abs() < 1e-15);
    }

    /// Midpoint-rule quadrature of `1 − x^c` and of `x² · c x^{c−1}`.
    #[test]
    fn moments_match_quadrature() {
        for c in [1usize, 2, 5, 100] {
            let k = 200_000;
            let h = 1.0 / k as f64;
            let (mut mean, mut second) = (0.0, 0.0);
            for i in 0..k {
                let x = (i as f64 + 0.5) * h;
                mean += (1.0 - x.powi(c as i32)) * h;
                second += x * x * c as f64 * x.powi(c as i32 - 1) * h;
            }
            assert!((mean - block_cutoff_mean_integral(c)).abs() < 1e-8);
            let var = second - mean * mean;
            assert!((var - block_cutoff_variance(c)).abs() < 1e-7, "c={c}");
        }
    }

    #[test]
    fn survival_tends_to_inverse_e() {
        // t = m^{-1/c} makes t^c = 1/m exactly
        let m = 10_000usize;
        let c = 9usize;
        let t = (m as f64).powf(-1.0 / c as f64);
        let v = min_cutoff_survival(t, c, m);
        assert!((v - (-1f64).exp()).abs() < 0.01, "{v}");
    }
}
