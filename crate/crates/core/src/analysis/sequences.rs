use super::{require_nonnegative, require_positive};
use crate::error::{Error, Result};

/// Closed-form bound for sequences with `(1 + b) xₙ ≤ xₙ₋₁ + rₙ₋₁`:
/// `xₙ ≤ (1 + b)⁻ⁿ x₀ + ((1 + b)/b) max rⱼ`.
pub fn gronwall_envelope(b: f64, x0: f64, r_max: f64, n: u64) -> Result<f64> {
    require_positive("b", b)?;
    require_nonnegative("x0", x0)?;
    require_nonnegative("r_max", r_max)?;
    let decay = (1.0 + b).powf(-(n as f64));
    Ok(decay * x0 + (1.0 + b) / b * r_max)
}

/// `z(t)²` for the exact solution of `dz/dt = (c4/ν³) z³`:
/// `z(t)² = z0² / (1 − 2 t c4 z0²/ν³)`, valid before `ν³/(2 c4 z0²)`.
pub fn comparison_ode(z0: f64, nu: f64, c4: f64, t: f64) -> Result<f64> {
    cubic_flow_sq(z0, nu, c4, t, 2.0)
}

/// `ζ(t)` solving `dζ/dt = g(ζ) = (2c4/ν³) ζ³`, the flow that dominates the
/// comparison sequence; blows up at `ν³/(4 c4 ζ0²)`.
pub fn comparison_flow(zeta0: f64, nu: f64, c4: f64, t: f64) -> Result<f64> {
    cubic_flow_sq(zeta0, nu, c4, t, 4.0).map(f64::sqrt)
}

fn cubic_flow_sq(z0: f64, nu: f64, c4: f64, t: f64, rate: f64) -> Result<f64> {
    require_nonnegative("z0", z0)?;
    require_positive("nu", nu)?;
    require_positive("c4", c4)?;
    require_nonnegative("t", t)?;
    let blowup = nu.powi(3) / (rate * c4 * z0 * z0);
    if t >= blowup {
        return Err(Error::BlowUp { t, blowup });
    }
    Ok(z0 * z0 / (1.0 - t / blowup))
}

/// `ζ₀, …, ζₙ` of `ζₙ = ζₙ₋₁ + k (2c4/ν³) ζₙ₋₁³`.
pub fn comparison_sequence(z0: f64, nu: f64, c4: f64, k: f64, n: usize) -> Result<Vec<f64>> {
    require_nonnegative("z0", z0)?;
    require_positive("nu", nu)?;
    require_positive("c4", c4)?;
    require_positive("k", k)?;
    let g = 2.0 * c4 / nu.powi(3);
    let mut seq = Vec::with_capacity(n + 1);
    let mut zeta = z0;
    seq.push(zeta);
    for _ in 0..n {
        zeta += k * g * zeta * zeta * zeta;
        seq.push(zeta);
    }
    Ok(seq)
}

/// `ζₙ` of [`comparison_sequence`].
pub fn comparison_seq(z0: f64, nu: f64, c4: f64, k: f64, n: usize) -> Result<f64> {
    Ok(*comparison_sequence(z0, nu, c4, k, n)?.last().expect("sequence is never empty"))
}

/// Explicit one-step bound `|∇uⁿ|² ≤ (1 + ak) x` with
/// `x = |∇uⁿ⁻¹|² + 2k|f|²/ν` and `a = 2 c4 x²/ν³`; requires `ak ≤ 2^{1/3} − 1`.
pub fn one_step_explicit_bound(grad_prev_sq: f64, f_l2_sup_sq: f64, nu: f64, k: f64, c4: f64) -> Result<f64> {
    require_nonnegative("|grad u|^2", grad_prev_sq)?;
    require_nonnegative("|f|^2", f_l2_sup_sq)?;
    require_positive("nu", nu)?;
    require_positive("k", k)?;
    require_positive("c4", c4)?;
    let x = grad_prev_sq + 2.0 * k * f_l2_sup_sq / nu;
    let ak = 2.0 * c4 * x * x / nu.powi(3) * k;
    if ak > 2f64.cbrt() - 1.0 {
        return Err(Error::RestrictionViolated { ak });
    }
    Ok((1.0 + ak) * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn envelope_special_cases() {
        assert_eq!(gronwall_envelope(1.0, 1.0, 0.0, 10).unwrap(), 2f64.powi(-10));
        for n in [0, 1, 7, 1000] {
            assert_eq!(gronwall_envelope(1.0, 0.0, 1.0, n).unwrap(), 2.0);
        }
        assert!(gronwall_envelope(0.0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn envelope_dominates_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let b: f64 = rng.random_range(1e-3..2.0);
            let x0: f64 = rng.random_range(0.0..10.0);
            let r_max: f64 = rng.random_range(0.0..5.0);
            let mut x = x0;
            for n in 1..=300u64 {
                x = (x + rng.random_range(0.0..=r_max)) / (1.0 + b);
                assert!(x <= gronwall_envelope(b, x0, r_max, n).unwrap());
            }
        }
    }

    #[test]
    fn doubling_time() {
        assert_eq!(comparison_ode(1.0, 1.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(comparison_ode(1.0, 1.0, 1.0, 0.25).unwrap(), 2.0);
        assert!(matches!(comparison_ode(1.0, 1.0, 1.0, 0.5), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn sequence_stays_below_flow() {
        let seq = comparison_sequence(1.0, 1.0, 1.0, 0.01, 20).unwrap();
        assert!((seq[1] - 1.02).abs() < 1e-15);
        for (n, z) in seq.iter().enumerate() {
            assert!(*z <= comparison_flow(1.0, 1.0, 1.0, n as f64 * 0.01).unwrap());
        }
        assert_eq!(comparison_seq(1.0, 1.0, 1.0, 0.01, 20).unwrap(), seq[20]);
    }

    #[test]
    fn explicit_bound() {
        assert_eq!(one_step_explicit_bound(0.0, 0.0, 1.0, 0.1, 1.0).unwrap(), 0.0);
        let b = one_step_explicit_bound(1.0, 0.0, 1.0, 0.01, 1.0).unwrap();
        assert!((b - 1.02).abs() < 1e-15);
        // a k = 0.3 with x = 1, c4 = ν = 1: k = 0.15
        assert!(matches!(one_step_explicit_bound(1.0, 0.0, 1.0, 0.15, 1.0), Err(Error::RestrictionViolated { .. })));
    }
}
