//! Initial-data descriptors and random solenoidal fields.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{SpectralField, ZERO};
use crate::grid::{norm_sq, Grid};
use crate::spectral::project_leray;

fn default_slope() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    /// `A (sin z, 0, 0)`.
    Shear {
        amplitude: f64,
    },
    /// `A (−sin y, sin x, 0)`.
    PlanarVortex {
        amplitude: f64,
    },
    /// Random solenoidal field on `0 < |κ| ≤ kmax` with coefficient
    /// magnitudes `∝ |κ|^(−slope)`, rescaled so that `|∇u| = amplitude`.
    /// Without a seed the run seed is used.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_slope")]
        slope: f64,
        amplitude: f64,
        kmax: u32,
    },
    /// A snapshot in the binary field format.
    File {
        path: PathBuf,
    },
}

pub fn make_field(grid: Grid, data: &InitialData, default_seed: u64) -> Result<SpectralField> {
    let half_i = |a: f64| [Complex64::new(0.0, -0.5 * a), Complex64::new(0.0, 0.5 * a)];
    match *data {
        InitialData::Zero => Ok(SpectralField::zeros(grid)),
        InitialData::Shear { amplitude } => {
            check_finite("amplitude", amplitude)?;
            // sin z = (e^{iz} − e^{−iz}) / 2i
            let [pos, _] = half_i(amplitude);
            let mut f = SpectralField::zeros(grid);
            f.set_mode([0, 0, 1], [pos, ZERO[1], ZERO[2]])?;
            Ok(f)
        }
        InitialData::PlanarVortex { amplitude } => {
            check_finite("amplitude", amplitude)?;
            let [pos, neg] = half_i(amplitude);
            let mut f = SpectralField::zeros(grid);
            f.set_mode([0, 1, 0], [neg, ZERO[1], ZERO[2]])?;
            f.set_mode([1, 0, 0], [ZERO[0], pos, ZERO[2]])?;
            Ok(f)
        }
        InitialData::Random { seed, slope, amplitude, kmax } => {
            check_finite("amplitude", amplitude)?;
            let f = random_divfree(grid, seed.unwrap_or(default_seed), slope, kmax)?;
            Ok(f.scaled(amplitude / f.h1_sq().sqrt()))
        }
        InitialData::File { ref path } => {
            let f = SpectralField::load(path)?;
            if f.grid() != grid {
                return Err(crate::Error::GridMismatch { left: f.grid().n(), right: grid.n() });
            }
            if !f.satisfies_invariants(1e-10) {
                return Err(invalid(format!("{} is not divergence-free", path.display())));
            }
            Ok(f)
        }
    }
}

/// Unnormalised random solenoidal field; identical for identical arguments.
pub(crate) fn random_divfree(grid: Grid, seed: u64, slope: f64, kmax: u32) -> Result<SpectralField> {
    check_finite("slope", slope)?;
    if kmax == 0 || kmax as i32 > grid.kmax() {
        return Err(invalid(format!("kmax = {kmax} must lie in 1..={} for n = {}", grid.kmax(), grid.n())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    let limit = (kmax * kmax) as f64;
    for idx in grid.zero_index() + 1..grid.num_modes() {
        let k = grid.mode(idx);
        let k2 = norm_sq(k);
        if k2 > limit {
            continue;
        }
        let scale = k2.sqrt().powf(-slope);
        let mut draw = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale;
        let c = [draw(), draw(), draw()];
        f.set_mode(k, c)?;
    }
    Ok(project_leray(&f))
}

pub(crate) fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}
