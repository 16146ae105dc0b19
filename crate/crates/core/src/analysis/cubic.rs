//! The one-step cubic `G(y; x) = (c4 k/ν³) y³ − (1 + νk/(2c0)) y + x`.
//!
//! For `x > 0` and `G(y₊) < 0` the cubic has one negative root `y0` and two
//! positive roots `y1 < y₊ < y2`. A fully implicit step then satisfies
//! `|∇uⁿ|² ≤ y1` when the timestep restrictions of the one-step lemma hold.

use serde::Serialize;

use super::{require_nonnegative, require_positive, ConstantsSet};
use crate::error::Result;
use crate::harness::output::{float, opt_float};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubicAnalysis {
    /// `|∇uⁿ⁻¹|² + 2k|f|²/ν`
    pub x: f64,
    pub cubic_coeff: f64,
    pub linear_coeff: f64,
    #[serde(with = "float")]
    pub y_plus: f64,
    #[serde(with = "float")]
    pub y_minus: f64,
    /// `G(y₊) = x − (2/3)(1 + νk/(2c0)) y₊`
    #[serde(with = "float")]
    pub g_at_y_plus: f64,
    #[serde(with = "float")]
    pub y0: f64,
    #[serde(with = "opt_float")]
    pub y1: Option<f64>,
    #[serde(with = "opt_float")]
    pub y2: Option<f64>,
    pub has_positive_roots: bool,
    /// `x = 0`; the roots are `0` and `±sqrt(linear/cubic)` in closed form.
    pub degenerate: bool,
    /// `x < (2/3) sqrt(ν³/(3 c4 k))`, the sufficient form of `G(y₊) < 0`.
    pub dtf1_ok: bool,
    /// `a = 2 c4 x²/ν³`
    pub a: f64,
    /// `a k ≤ 2^{1/3} − 1`, under which `y1 ≤ (1 + ak) x`.
    pub dtf3_ok: bool,
    /// `x / (1 + νk/(4c0))`
    pub y_star: f64,
}

impl CubicAnalysis {
    pub fn eval(&self, y: f64) -> f64 {
        (self.cubic_coeff * y * y - self.linear_coeff) * y + self.x
    }

    fn deriv(&self, y: f64) -> f64 {
        3.0 * self.cubic_coeff * y * y - self.linear_coeff
    }

    /// `(1 + ak) x`; meaningful as an upper bound for `y1` when `dtf3_ok`.
    pub fn explicit_bound(&self, k: f64) -> f64 {
        (1.0 + self.a * k) * self.x
    }

    /// Roots in increasing order.
    pub fn roots(&self) -> Vec<f64> {
        std::iter::once(self.y0).chain(self.y1).chain(self.y2).collect()
    }
}

/// Analyses the cubic for the step from `|∇uⁿ⁻¹|² = grad_prev_sq` with
/// `sup |f|² = f_l2_sup_sq`.
pub fn cubic_analyze(
    grad_prev_sq: f64,
    f_l2_sup_sq: f64,
    nu: f64,
    k: f64,
    consts: &ConstantsSet,
) -> Result<CubicAnalysis> {
    require_nonnegative("|grad u|^2", grad_prev_sq)?;
    require_nonnegative("|f|^2", f_l2_sup_sq)?;
    require_positive("nu", nu)?;
    require_positive("k", k)?;
    cubic_from_x(grad_prev_sq + 2.0 * k * f_l2_sup_sq / nu, nu, k, consts.c0, consts.c4)
}

/// Same as [`cubic_analyze`] with the constant term given directly.
pub fn cubic_from_x(x: f64, nu: f64, k: f64, c0: f64, c4: f64) -> Result<CubicAnalysis> {
    require_nonnegative("x", x)?;
    for (name, v) in [("nu", nu), ("k", k), ("c0", c0), ("c4", c4)] {
        require_positive(name, v)?;
    }
    let nu3 = nu * nu * nu;
    let cubic_coeff = c4 * k / nu3;
    let linear_coeff = 1.0 + nu * k / (2.0 * c0);
    let y_plus = (linear_coeff / (3.0 * cubic_coeff)).sqrt();
    let g_at_y_plus = x - 2.0 / 3.0 * linear_coeff * y_plus;
    let a = 2.0 * c4 * x * x / nu3;
    let mut c = CubicAnalysis {
        x,
        cubic_coeff,
        linear_coeff,
        y_plus,
        y_minus: -y_plus,
        g_at_y_plus,
        y0: f64::NAN,
        y1: None,
        y2: None,
        has_positive_roots: g_at_y_plus < 0.0,
        degenerate: x == 0.0,
        dtf1_ok: x < 2.0 / 3.0 * (nu3 / (3.0 * c4 * k)).sqrt(),
        a,
        dtf3_ok: a * k <= 2f64.cbrt() - 1.0,
        y_star: x / (1.0 + nu * k / (4.0 * c0)),
    };
    let s = (linear_coeff / cubic_coeff).sqrt();
    if c.degenerate {
        c.y0 = -s;
        c.y1 = Some(0.0);
        c.y2 = Some(s);
        return Ok(c);
    }
    // G(-s) = x > 0 and G(-(s + x/lin)) ≤ -x < 0
    c.y0 = bracketed_root(&c, -(s + x / linear_coeff), -s);
    if c.has_positive_roots {
        // G(0) = x > 0 > G(y₊), and G(s + x/lin) ≥ x > 0
        c.y1 = Some(bracketed_root(&c, 0.0, y_plus));
        c.y2 = Some(bracketed_root(&c, y_plus, s + x / linear_coeff));
    }
    Ok(c)
}

/// Safeguarded Newton on a sign-changing bracket: Newton steps that leave
/// the bracket are replaced by bisection.
fn bracketed_root(c: &CubicAnalysis, mut lo: f64, mut hi: f64) -> f64 {
    let lo_positive = c.eval(lo) > 0.0;
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = c.eval(y);
        if g == 0.0 {
            return y;
        }
        if (g > 0.0) == lo_positive {
            lo = y;
        } else {
            hi = y;
        }
        let dg = c.deriv(y);
        let newton = y - g / dg;
        let next = if dg != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let scale = y.abs().max(next.abs()).max(f64::MIN_POSITIVE);
        if (next - y).abs() <= 1e-15 * scale || hi - lo <= 4.0 * f64::EPSILON * scale {
            return next;
        }
        y = next;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factored() -> CubicAnalysis {
        // c4 = k = ν = 1, c0 = 1: G = y³ − 1.5y + 0.5 = (y − 1)(y² + y − 1/2)
        cubic_from_x(0.5, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn exact_factorisation() {
        let c = factored();
        let r3 = 3f64.sqrt();
        assert_eq!(c.linear_coeff, 1.5);
        assert!((c.y1.unwrap() - (r3 - 1.0) / 2.0).abs() < 1e-14);
        assert!((c.y2.unwrap() - 1.0).abs() < 1e-14);
        assert!((c.y0 + (1.0 + r3) / 2.0).abs() < 1e-14);
        assert!((c.y_plus - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(c.has_positive_roots);
    }

    #[test]
    fn degenerate_closed_form() {
        let c = cubic_from_x(0.0, 1.0, 0.5, 1.0, 2.0).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.y1, Some(0.0));
        let s = (c.linear_coeff / (2.0 * 0.5)).sqrt();
        assert_eq!(c.y2, Some(s));
        assert_eq!(c.y0, -s);
    }

    #[test]
    fn no_positive_roots_past_the_minimum() {
        let base = factored();
        let x = 2.0 / 3.0 * base.linear_coeff * base.y_plus * (1.0 + 1e-12);
        let c = cubic_from_x(x, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(!c.has_positive_roots);
        assert!(c.y1.is_none() && c.y2.is_none());
        assert!(c.y0 < 0.0 && c.eval(c.y0).abs() < 1e-12);
        assert!(!c.dtf1_ok);
    }

    #[test]
    fn negative_input_is_rejected() {
        assert!(cubic_from_x(-1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(cubic_from_x(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn roots_are_monotone_in_x() {
        let (nu, k, c0, c4) = (1.0, 0.05, 1.0, 1.0);
        let top = cubic_from_x(0.0, nu, k, c0, c4).unwrap();
        let limit = 2.0 / 3.0 * top.linear_coeff * top.y_plus;
        let mut last: Option<(f64, f64)> = None;
        for i in 0..200 {
            let x = limit * i as f64 / 200.0;
            let c = cubic_from_x(x, nu, k, c0, c4).unwrap();
            let (y1, y2) = (c.y1.unwrap(), c.y2.unwrap());
            assert!(y1 <= c.y_plus && c.y_plus <= y2);
            if let Some((p1, p2)) = last {
                assert!(y1 >= p1 && y2 <= p2);
            }
            last = Some((y1, y2));
        }
    }
}
