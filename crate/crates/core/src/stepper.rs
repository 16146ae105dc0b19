//! One step of the semi-implicit and fully implicit Euler schemes.
//!
//! Both schemes are solved by the same fixed-point iteration
//!
//! ```text
//! u⁽ᵐ⁺¹⁾ = (I − νkΔ)⁻¹ P[uⁿ⁻¹ − k B(u⁽ᵐ⁾) + k fⁿ],   u⁽⁰⁾ = uⁿ⁻¹
//! ```
//!
//! with `B(w) = uⁿ⁻¹·∇w` (semi-implicit) or `B(w) = w·∇w` (fully implicit).
//! The Stokes solve is diagonal in Fourier space. Iteration stops when the
//! relative H¹ increment drops below `fp_tol`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::norm_sq;
use crate::spectral::{inner, nonlinear_term, project_leray};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SemiImplicit,
    FullyImplicit,
}

fn default_fp_tol() -> f64 {
    1e-12
}

fn default_fp_max_iter() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(rename = "kind")]
    pub scheme: Scheme,
    /// Timestep.
    pub k: f64,
    /// Viscosity.
    pub nu: f64,
    #[serde(default = "default_fp_tol")]
    pub fp_tol: f64,
    #[serde(default = "default_fp_max_iter")]
    pub fp_max_iter: usize,
    #[serde(default)]
    pub deterministic: bool,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, k: f64, nu: f64) -> Self {
        Self { scheme, k, nu, fp_tol: default_fp_tol(), fp_max_iter: default_fp_max_iter(), deterministic: false }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("k", self.k)?;
        positive("nu", self.nu)?;
        positive("fp_tol", self.fp_tol)?;
        if self.fp_max_iter == 0 {
            return Err(invalid("fp_max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub u_new: SpectralField,
    pub fp_iters: usize,
    pub fp_residual: f64,
    pub energy_identity_residual: f64,
    /// `|∇(uⁿ − uⁿ⁻¹)|²`
    pub increment_h1_sq: f64,
}

/// Advances with `cfg.scheme`.
pub fn step(u_prev: &SpectralField, f_n: &SpectralField, cfg: &SchemeConfig) -> Result<StepResult> {
    match cfg.scheme {
        Scheme::SemiImplicit => semi_implicit_step(u_prev, f_n, cfg),
        Scheme::FullyImplicit => fully_implicit_step(u_prev, f_n, cfg),
    }
}

/// Solves `(uⁿ − uⁿ⁻¹)/k + P(uⁿ⁻¹·∇uⁿ) = νΔuⁿ + fⁿ`.
pub fn semi_implicit_step(u_prev: &SpectralField, f_n: &SpectralField, cfg: &SchemeConfig) -> Result<StepResult> {
    fixed_point(u_prev, f_n, cfg, |w| nonlinear_term(u_prev, w))
}

/// Solves `(uⁿ − uⁿ⁻¹)/k + P(uⁿ·∇uⁿ) = νΔuⁿ + fⁿ`.
pub fn fully_implicit_step(u_prev: &SpectralField, f_n: &SpectralField, cfg: &SchemeConfig) -> Result<StepResult> {
    fixed_point(u_prev, f_n, cfg, |w| nonlinear_term(w, w))
}

fn fixed_point(
    u_prev: &SpectralField,
    f_n: &SpectralField,
    cfg: &SchemeConfig,
    advect: impl Fn(&SpectralField) -> Result<SpectralField>,
) -> Result<StepResult> {
    cfg.validate()?;
    if u_prev.grid() != f_n.grid() {
        return Err(Error::GridMismatch { left: u_prev.grid().n(), right: f_n.grid().n() });
    }
    let (k, nu) = (cfg.k, cfg.nu);
    let explicit = u_prev + &f_n.scaled(k);
    let mut iterate = u_prev.clone();
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.fp_max_iter {
        let rhs = &explicit - &advect(&iterate)?.scaled(k);
        let next = project_leray(&rhs).map_modes(|kappa, c| {
            let d = 1.0 + nu * k * norm_sq(kappa);
            c.map(|z| z / d)
        });
        let increment = (&next - &iterate).h1_sq().sqrt();
        let size = next.h1_sq().sqrt();
        residual = if size > 0.0 {
            increment / size
        } else if increment == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if !size.is_finite() {
            return Err(Error::NonConvergence { iterations: iter, residual });
        }
        iterate = next;
        if residual <= cfg.fp_tol {
            debug_assert!(iterate.satisfies_invariants(1e-10));
            let energy_identity_residual = energy_identity_residual(u_prev, &iterate, f_n, cfg)?;
            let increment_h1_sq = (&iterate - u_prev).h1_sq();
            return Ok(StepResult {
                u_new: iterate,
                fp_iters: iter,
                fp_residual: residual,
                energy_identity_residual,
                increment_h1_sq,
            });
        }
    }
    Err(Error::NonConvergence { iterations: cfg.fp_max_iter, residual })
}

/// Relative defect of the discrete energy identity
/// `|uⁿ|² + |uⁿ−uⁿ⁻¹|² + 2νk|∇uⁿ|² = |uⁿ⁻¹|² + 2k(fⁿ,uⁿ)`,
/// which both schemes satisfy exactly because the advection term is
/// orthogonal to `uⁿ`.
pub fn energy_identity_residual(
    u_prev: &SpectralField,
    u_new: &SpectralField,
    f_n: &SpectralField,
    cfg: &SchemeConfig,
) -> Result<f64> {
    let (k, nu) = (cfg.k, cfg.nu);
    let prev = u_prev.l2_sq();
    let new = u_new.l2_sq();
    let lhs = new + (u_new - u_prev).l2_sq() + 2.0 * nu * k * u_new.h1_sq();
    let rhs = prev + 2.0 * k * inner(f_n, u_new)?;
    Ok((lhs - rhs).abs() / prev.max(new).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::initial::{make_field, InitialData};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn shear(n: usize, a: f64) -> SpectralField {
        make_field(Grid::new(n).unwrap(), &InitialData::Shear { amplitude: a }, 0).unwrap()
    }

    fn max_rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        (a - b).l2_sq().sqrt() / b.l2_sq().sqrt()
    }

    #[test]
    fn shear_decays_in_closed_form() {
        let u = shear(16, 1.0);
        let f = SpectralField::zeros(u.grid());
        for scheme in [Scheme::SemiImplicit, Scheme::FullyImplicit] {
            let cfg = SchemeConfig::new(scheme, 0.01, 1.0);
            let r = step(&u, &f, &cfg).unwrap();
            assert!(max_rel_diff(&r.u_new, &u.scaled(1.0 / 1.01)) < 1e-15);
            // the first update is already exact; the second only confirms it
            assert_eq!(r.fp_iters, 2);
            assert_eq!(r.fp_residual, 0.0);
            assert!(r.energy_identity_residual <= 1e-12);
        }
    }

    #[test]
    fn zero_stays_zero() {
        let z = SpectralField::zeros(Grid::new(8).unwrap());
        for scheme in [Scheme::SemiImplicit, Scheme::FullyImplicit] {
            let r = step(&z, &z, &SchemeConfig::new(scheme, 0.1, 1.0)).unwrap();
            assert_eq!(r.u_new, z);
            assert_eq!(r.fp_iters, 1);
            assert_eq!(r.energy_identity_residual, 0.0);
        }
    }

    #[test]
    fn forced_shear_is_a_discrete_steady_state() {
        let nu = 0.7;
        let u = shear(16, 0.4);
        let f = u.scaled(nu);
        for scheme in [Scheme::SemiImplicit, Scheme::FullyImplicit] {
            let r = step(&u, &f, &SchemeConfig::new(scheme, 0.05, nu)).unwrap();
            assert!(max_rel_diff(&r.u_new, &u) < 1e-15);
        }
    }

    #[test]
    fn single_forcing_mode_from_rest() {
        let grid = Grid::new(16).unwrap();
        let (k, nu) = (0.01, 1.0);
        let mut g = SpectralField::zeros(grid);
        let kappa = [1, 2, 0];
        g.set_mode(kappa, [Complex64::new(2e-3, 1e-3), Complex64::new(-1e-3, -5e-4), Complex64::new(0.0, 4e-3)])
            .unwrap();
        let g = project_leray(&g);
        let z = SpectralField::zeros(grid);
        let r = fully_implicit_step(&z, &g, &SchemeConfig::new(Scheme::FullyImplicit, k, nu)).unwrap();
        assert!(r.fp_iters <= 3);
        let expect = g.scaled(k / (1.0 + nu * k * 5.0));
        assert!(max_rel_diff(&r.u_new, &expect) < 1e-14);
    }

    #[test]
    fn huge_timestep_fails_to_converge() {
        let grid = Grid::new(16).unwrap();
        let u =
            make_field(grid, &InitialData::Random { seed: Some(5), slope: 0.0, amplitude: 1e3, kmax: 5 }, 0).unwrap();
        let f = SpectralField::zeros(grid);
        let cfg = SchemeConfig::new(Scheme::FullyImplicit, 1.0, 1.0);
        assert!(matches!(fully_implicit_step(&u, &f, &cfg), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn energy_residual_detects_perturbation() {
        let u = shear(16, 1.0);
        let f = SpectralField::zeros(u.grid());
        let cfg = SchemeConfig::new(Scheme::SemiImplicit, 0.01, 1.0);
        let r = step(&u, &f, &cfg).unwrap();
        let mut bad = r.u_new.clone();
        let c = bad.coeff([1, 0, 0]).unwrap();
        bad.set_mode([1, 0, 0], [c[0], c[1] + 1e-3, c[2]]).unwrap();
        assert!(energy_identity_residual(&u, &bad, &f, &cfg).unwrap() > 1e-6);
        let z = SpectralField::zeros(u.grid());
        assert_eq!(energy_identity_residual(&z, &z, &z, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let z = SpectralField::zeros(Grid::new(4).unwrap());
        let mut cfg = SchemeConfig::new(Scheme::SemiImplicit, 0.0, 1.0);
        assert!(step(&z, &z, &cfg).is_err());
        cfg.k = 0.1;
        cfg.fp_max_iter = 0;
        assert!(step(&z, &z, &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn steps_preserve_invariants_and_energy(seed in 0u64..1000, amp in 0.01f64..1.0, k in 0.005f64..0.1, full: bool) {
            let grid = Grid::new(8).unwrap();
            let u = make_field(grid, &InitialData::Random { seed: Some(seed), slope: 1.0, amplitude: amp, kmax: 3 }, 0).unwrap();
            let f = make_field(grid, &InitialData::Random { seed: Some(seed + 1), slope: 1.0, amplitude: amp, kmax: 2 }, 0).unwrap();
            let scheme = if full { Scheme::FullyImplicit } else { Scheme::SemiImplicit };
            let r = step(&u, &f, &SchemeConfig::new(scheme, k, 1.0)).unwrap();
            prop_assert!(r.u_new.satisfies_invariants(1e-12));
            prop_assert!(r.energy_identity_residual <= 1e-9);
        }
    }
}
