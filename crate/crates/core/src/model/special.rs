use crate::scalar::Real;

/// Standard Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn gaussian_q<T: Real>(x: T) -> T {
    T::lit(0.5 * libm::erfc(x.as_f64() / core::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(gaussian_q(0.0), 0.5);
        let q1 = gaussian_q(1.0_f64);
        assert!((q1 - 0.158_655_253_931_457_05).abs() < 1e-10 * q1);
        let far = gaussian_q(40.0_f64);
        assert!((0.0..1e-300).contains(&far));
        // symmetry Q(-x) = 1 - Q(x)
        assert!((gaussian_q(-1.3_f64) + gaussian_q(1.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_relative_accuracy() {
        // Q(5) and Q(10) from a high-precision evaluation
        let q5 = gaussian_q(5.0_f64);
        assert!((q5 / 2.866_515_718_791_939e-7 - 1.0).abs() < 1e-10);
        let q10 = gaussian_q(10.0_f64);
        assert!((q10 / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-10);
    }
}
