use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::initial::random_divfree;
use crate::spectral::{inner, neg_laplacian, nonlinear_term, norms};

/// The domain constants of the energy estimates.
///
/// `c0` is the Poincaré constant, exactly 1 for zero-mean fields on
/// `(0, 2π)³` (it also bounds `|∇u|² ≤ c0 |Δu|²`). The Sobolev-type
/// constants `c1`, `c2`, `c4`, `c5` have no known sharp values and default
/// to 1; `c3 = sqrt(c2 / c0)` is always derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantsSet {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl Default for ConstantsSet {
    fn default() -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0, 1.0).expect("unit constants are valid")
    }
}

impl ConstantsSet {
    pub fn new(c0: f64, c1: f64, c2: f64, c4: f64, c5: f64) -> Result<Self> {
        for (name, v) in [("c0", c0), ("c1", c1), ("c2", c2), ("c4", c4), ("c5", c5)] {
            super::require_positive(name, v)?;
        }
        Ok(Self { c0, c1, c2, c3: (c2 / c0).sqrt(), c4, c5 })
    }
}

/// Optional per-constant overrides as they appear in a configuration file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOverrides {
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Accepted only if it agrees with `sqrt(c2 / c0)`.
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
}

impl ConstantsOverrides {
    pub fn resolve(&self) -> Result<ConstantsSet> {
        let d = ConstantsSet::default();
        let set = ConstantsSet::new(
            self.c0.unwrap_or(d.c0),
            self.c1.unwrap_or(d.c1),
            self.c2.unwrap_or(d.c2),
            self.c4.unwrap_or(d.c4),
            self.c5.unwrap_or(d.c5),
        )?;
        if let Some(c3) = self.c3 {
            if (c3 * c3 * set.c0 - set.c2).abs() > 1e-12 * set.c2 {
                return Err(invalid(format!("c3 = {c3} is inconsistent with c3 = sqrt(c2/c0) = {}", set.c3)));
            }
        }
        Ok(set)
    }
}

/// Empirical lower bounds: each entry is the largest defining ratio seen
/// over the sampled fields, so the true constant is at least this large.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantEstimates {
    /// `sup |u|² / |∇u|²`
    pub c0_poincare: f64,
    /// `sup |∇u|² / |Δu|²`
    pub c0_h1: f64,
    /// `sup 2|(u·∇u, Δu)| / (|u|_{L³} |Δu|²)`
    pub c1: f64,
    /// `sup (27/16) |(u·∇u, Δu)|⁴ / (|∇u|⁶ |Δu|⁶)`, the value for which
    /// `|(u·∇u,Δu)| ≤ c4|∇u|⁶/(2ν³) + ν|Δu|²/2` holds at the optimal ν.
    pub c4: f64,
    pub samples: usize,
}

pub fn estimate_constants(grid: Grid, samples: usize, seed: u64) -> Result<ConstantEstimates> {
    let kmax = grid.kmax().min(4) as u32;
    let mut est = ConstantEstimates { c0_poincare: 0.0, c0_h1: 0.0, c1: 0.0, c4: 0.0, samples };
    // single modes attain the Poincaré ratios
    let mut unit = SpectralField::zeros(grid);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    unit.set_mode([0, 0, 1], [one, zero, zero])?;
    let mut fields = vec![unit];
    for s in 0..samples as u64 {
        let slope = (s % 4) as f64 * 0.5;
        fields.push(random_divfree(grid, seed.wrapping_add(s), slope, kmax)?);
    }
    for u in &fields {
        let nb = norms(u);
        est.c0_poincare = est.c0_poincare.max(nb.l2_sq / nb.h1_sq);
        est.c0_h1 = est.c0_h1.max(nb.h1_sq / nb.h2_sq);
        let t = inner(&nonlinear_term(u, u)?, &neg_laplacian(u))?.abs();
        if nb.l3 > 0.0 {
            est.c1 = est.c1.max(2.0 * t / (nb.l3 * nb.h2_sq));
        }
        est.c4 = est.c4.max(27.0 / 16.0 * t.powi(4) / (nb.h1_sq.powi(3) * nb.h2_sq.powi(3)));
    }
    Ok(est)
}
