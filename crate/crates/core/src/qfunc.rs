//! The Gaussian tail function and the shift probability it induces.

/// Gaussian tail function `Q(x) = P(N(0,1) > x) = erfc(x / sqrt(2)) / 2`.
///
/// Backed by `libm::erfc`, which is accurate to a few ulp over the whole
/// range, so `Q` keeps full relative accuracy deep into the tail (down to
/// arguments ~27 where the result underflows).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * core::f64::consts::FRAC_1_SQRT_2)
}

/// Probability `p(L) = Q(1 / (2 L eps))` that a run of nominal length `L`
/// crosses the rounding boundary to a neighbouring length.
///
/// Monotone increasing in both `L` and `eps`: long runs are fragile because
/// the multiplicative gain perturbs them by a proportional amount while the
/// quantization grid stays absolute.
pub fn shift_probability(l: u32, eps: f64) -> f64 {
    debug_assert!(l >= 1 && eps > 0.0);
    q_function(1.0 / (2.0 * l as f64 * eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 40-digit arbitrary precision arithmetic.
    const Q_ORACLE: &[(f64, f64)] = &[
        (0.0, 0.5),
        (0.5, 3.085375387259868963622954e-1),
        (1.0, 1.586552539314570514147675e-1),
        (2.5, 6.209665325776135166978105e-3),
        (3.125, 8.890252991084320593331889e-4),
        (5.0, 2.866515718791939116737523e-7),
        (1.0 / 0.24, 1.545429688229599289467921e-5),
        (1.0 / 0.3, 4.29060333196837226017084e-4),
        (8.0, 6.220960574271784123515995e-16),
        (-1.0, 8.413447460685429485852325e-1),
    ];

    #[test]
    fn matches_high_precision_oracle() {
        for &(x, q) in Q_ORACLE {
            let got = q_function(x);
            assert!(
                (got - q).abs() <= 1e-12 * q.max(1e-300),
                "Q({x}) = {got}, expected {q}"
            );
        }
    }

    #[test]
    fn symmetry_and_bounds() {
        for i in 0..200 {
            let x = -5.0 + i as f64 * 0.05;
            let q = q_function(x);
            assert!(q > 0.0 && q < 1.0);
            assert!((q + q_function(-x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_probability_monotone() {
        let mut prev = 0.0;
        for l in 1..=16 {
            let p = shift_probability(l, 0.1);
            assert!(p > prev, "p(L) must increase with L");
            prev = p;
        }
        let mut prev = 0.0;
        for i in 1..=40 {
            let p = shift_probability(3, i as f64 * 0.01);
            assert!(p > prev, "p(L) must increase with eps");
            prev = p;
        }
    }
}
