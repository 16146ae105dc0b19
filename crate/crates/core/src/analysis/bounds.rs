use serde::Serialize;

use super::{require_nonnegative, require_positive, Check, ConstantsSet};
use crate::error::Result;
use crate::field::SpectralField;
use crate::forcing::{Forcing, ForcingNorms};
use crate::harness::output::float;

/// A-priori bounds assembled from the initial data and the sup-in-time
/// forcing norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub nu: f64,
    pub k: f64,
    pub u0_l2_sq: f64,
    pub u0_h1_sq: f64,
    /// `sup |fⁿ|²` over the evaluation times.
    pub forcing: ForcingNorms,
    /// `|u₀|² + (c0/ν²)|f|²_{H⁻¹}`
    pub k0: f64,
    /// `|∇u₀|² + (2c0/ν²)|f|²`
    pub k1: f64,
    /// `|u₀|² + (2c0/ν²)|f|²_{H⁻¹}`
    pub k0_tilde: f64,
    /// `|∇u₀|² + (10c0/ν²)|f|²`
    pub k1_tilde: f64,
    /// `2|∇u₀|² + 2(ν²|f|²/c4)^{1/3} + (10c0/ν)|f|²`, the short-time
    /// replacement for the per-step lemma quantity.
    pub k_tilde_short: f64,
    /// `(ν²|f|²/c4)^{1/3}` (continuous and semi-implicit short-time shift).
    pub f_short: f64,
    /// `(2ν²|f|²/c4)^{1/3}` (fully implicit short-time shift).
    pub f_full: f64,
    c0: f64,
}

impl BoundsReport {
    pub fn from_norms(
        u0_l2_sq: f64,
        u0_h1_sq: f64,
        forcing: ForcingNorms,
        nu: f64,
        consts: &ConstantsSet,
        k: f64,
    ) -> Result<Self> {
        require_positive("nu", nu)?;
        require_nonnegative("k", k)?;
        require_nonnegative("|u0|^2", u0_l2_sq)?;
        require_nonnegative("|grad u0|^2", u0_h1_sq)?;
        require_nonnegative("|f|^2_H-1", forcing.hm1_sq)?;
        require_nonnegative("|f|^2", forcing.l2_sq)?;
        let c0 = consts.c0;
        let (fh, fl) = (forcing.hm1_sq, forcing.l2_sq);
        let nu2 = nu * nu;
        let f_short = (nu2 * fl / consts.c4).cbrt();
        Ok(Self {
            nu,
            k,
            u0_l2_sq,
            u0_h1_sq,
            forcing,
            k0: u0_l2_sq + c0 / nu2 * fh,
            k1: u0_h1_sq + 2.0 * c0 / nu2 * fl,
            k0_tilde: u0_l2_sq + 2.0 * c0 / nu2 * fh,
            k1_tilde: u0_h1_sq + 10.0 * c0 / nu2 * fl,
            k_tilde_short: 2.0 * u0_h1_sq + 2.0 * f_short + 10.0 * c0 / nu * fl,
            f_short,
            f_full: (2.0 * nu2 * fl / consts.c4).cbrt(),
            c0,
        })
    }

    /// `K⁽ⁿ⁻¹⁾ = |∇uⁿ⁻¹|² + (10c0/ν)|f|²`.
    pub fn lemma_k(&self, grad_prev_sq: f64) -> f64 {
        grad_prev_sq + 10.0 * self.c0 / self.nu * self.forcing.l2_sq
    }

    /// L² bound of both schemes, `K0 + (k/ν)|f|²_{H⁻¹}`.
    pub fn discrete_l2_bound(&self) -> f64 {
        self.k0 + self.k / self.nu * self.forcing.hm1_sq
    }

    /// Semi-implicit small-data H¹ bound, `K1 + (2k/ν)|f|²`.
    pub fn semi_h1_bound(&self) -> f64 {
        self.k1 + 2.0 * self.k / self.nu * self.forcing.l2_sq
    }
}

/// Bounds for initial data `u0` and forcing sampled at `times`.
pub fn compute_bounds(
    u0: &SpectralField,
    forcing: &Forcing,
    times: &[f64],
    nu: f64,
    consts: &ConstantsSet,
    k: f64,
) -> Result<BoundsReport> {
    BoundsReport::from_norms(u0.l2_sq(), u0.h1_sq(), forcing.sup_norms(times), nu, consts, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallnessVariant {
    /// `K0 K1 ≤ c2 ν⁴`
    ContinuousK0K1,
    /// `K1 ≤ c3 ν²`
    ContinuousK1,
    /// `(K0 + k|f|²_{H⁻¹}/ν)(K1 + 2k|f|²/ν) ≤ c2 ν⁴`
    Semi,
    /// `|∇u₀|² + (2c0/ν²)|f|² ≤ ν²/(2 sqrt(c0 c4))`
    Full,
}

pub fn smallness_check(bounds: &BoundsReport, consts: &ConstantsSet, variant: SmallnessVariant) -> Check {
    let nu = bounds.nu;
    let nu2 = nu * nu;
    match variant {
        SmallnessVariant::ContinuousK0K1 => Check::new(bounds.k0 * bounds.k1, consts.c2 * nu2 * nu2),
        SmallnessVariant::ContinuousK1 => Check::new(bounds.k1, consts.c3 * nu2),
        SmallnessVariant::Semi => {
            Check::new(bounds.discrete_l2_bound() * bounds.semi_h1_bound(), consts.c2 * nu2 * nu2)
        }
        SmallnessVariant::Full => Check::new(
            bounds.u0_h1_sq + 2.0 * consts.c0 / nu2 * bounds.forcing.l2_sq,
            nu2 / (2.0 * (consts.c0 * consts.c4).sqrt()),
        ),
    }
}

/// Time horizons of the short-time estimates. Infinite when the initial
/// data and forcing vanish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HorizonReport {
    /// `|∇u₀|² + F` with the short-time `F`.
    pub z0: f64,
    /// `ν³/(4 c4 z0²)`: the continuous solution at most doubles `z²` by then.
    #[serde(with = "float")]
    pub t_star_continuous: f64,
    /// `ν³/(8 c4 z0²)`
    #[serde(with = "float")]
    pub t_star_semi: f64,
    /// `ν³/(8 c4 ζ0²)` with `ζ0 = |∇u₀|² + F_full`.
    #[serde(with = "float")]
    pub t_f_star: f64,
    /// `ν³/(2 c4 z0²)`
    #[serde(with = "float")]
    pub blowup_time: f64,
}

impl HorizonReport {
    pub fn new(bounds: &BoundsReport, consts: &ConstantsSet) -> Self {
        let nu3 = bounds.nu.powi(3);
        let z0 = bounds.u0_h1_sq + bounds.f_short;
        let zeta0 = bounds.u0_h1_sq + bounds.f_full;
        let horizon = |factor: f64, z: f64| nu3 / (factor * consts.c4 * z * z);
        Self {
            z0,
            t_star_continuous: horizon(4.0, z0),
            t_star_semi: horizon(8.0, z0),
            t_f_star: horizon(8.0, zeta0),
            blowup_time: horizon(2.0, z0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms(hm1_sq: f64, l2_sq: f64) -> ForcingNorms {
        ForcingNorms { hm1_sq, l2_sq }
    }

    #[test]
    fn unforced_bounds() {
        let c = ConstantsSet::default();
        let b = BoundsReport::from_norms(1.0, 2.0, norms(0.0, 0.0), 1.0, &c, 0.1).unwrap();
        assert_eq!((b.k0, b.k0_tilde, b.f_short, b.f_full), (1.0, 1.0, 0.0, 0.0));
        assert_eq!((b.k1, b.k1_tilde), (2.0, 2.0));
    }

    #[test]
    fn forcing_enters_k0_and_k0_tilde() {
        let c = ConstantsSet::default();
        let b = BoundsReport::from_norms(0.0, 0.0, norms(4.0, 0.0), 1.0, &c, 0.1).unwrap();
        assert_eq!(b.k0, 4.0);
        assert_eq!(b.k0_tilde, 8.0);
    }

    #[test]
    fn short_time_shift() {
        let c = ConstantsSet::default();
        let b = BoundsReport::from_norms(0.0, 0.0, norms(0.0, 8.0), 2.0, &c, 0.1).unwrap();
        assert!((b.f_short - 32f64.cbrt()).abs() < 1e-15);
        assert!((b.f_short - 3.1748021039363987).abs() < 1e-12);
        assert!((b.f_full - 64f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn smallness_variants() {
        let c = ConstantsSet::default();
        let zero = BoundsReport::from_norms(0.0, 0.0, norms(0.0, 0.0), 1.0, &c, 0.1).unwrap();
        for v in [
            SmallnessVariant::ContinuousK0K1,
            SmallnessVariant::ContinuousK1,
            SmallnessVariant::Semi,
            SmallnessVariant::Full,
        ] {
            let chk = smallness_check(&zero, &c, v);
            assert!(chk.ok);
            assert_eq!(chk.fraction, 1.0);
        }
        let b = BoundsReport::from_norms(1.0, 2.0, norms(0.0, 0.0), 1.0, &c, 0.0).unwrap();
        let chk = smallness_check(&b, &c, SmallnessVariant::ContinuousK0K1);
        assert!(!chk.ok);
        assert_eq!(chk.slack, -1.0);
        let b = BoundsReport::from_norms(0.25, 0.25, norms(0.0, 0.0), 1.0, &c, 0.01).unwrap();
        let chk = smallness_check(&b, &c, SmallnessVariant::Full);
        assert!(chk.ok);
        assert_eq!(chk.slack, 0.25);
    }

    #[test]
    fn horizons_are_ordered() {
        let c = ConstantsSet::default();
        let b = BoundsReport::from_norms(1.0, 1.0, norms(0.5, 0.5), 1.0, &c, 0.1).unwrap();
        let h = HorizonReport::new(&b, &c);
        assert!(h.t_star_semi <= h.t_star_continuous && h.t_star_continuous <= h.blowup_time);
        assert!(h.t_f_star <= h.t_star_semi);
        let z = BoundsReport::from_norms(0.0, 0.0, norms(0.0, 0.0), 1.0, &c, 0.1).unwrap();
        assert_eq!(HorizonReport::new(&z, &c).t_star_semi, f64::INFINITY);
    }
}
