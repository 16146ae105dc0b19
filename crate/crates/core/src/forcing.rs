use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::SpectralField;
use crate::grid::{Grid, Wavenumber};
use crate::initial::{check_finite, random_divfree};
use crate::spectral::project_leray;

fn default_slope() -> f64 {
    1.0
}

/// One prescribed forcing mode; its conjugate partner is implied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Wavenumber,
    pub re: [f64; 3],
    #[serde(default)]
    pub im: [f64; 3],
}

/// Scalar amplitude `a(t)` multiplying a base forcing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Modulation {
    Constant {
        value: f64,
    },
    /// `mean + amplitude · sin(omega t + phase)`
    Sine {
        mean: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `exp(−rate t)`
    Decay {
        rate: f64,
    },
}

impl Modulation {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Modulation::Constant { value } => value,
            Modulation::Sine { mean, amplitude, omega, phase } => mean + amplitude * (omega * t + phase).sin(),
            Modulation::Decay { rate } => (-rate * t).exp(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    #[default]
    Zero,
    /// Fixed modes, Leray-projected after assembly.
    Modes {
        modes: Vec<ModeSpec>,
    },
    /// Random solenoidal forcing rescaled to `|f| = amplitude` in L².
    Random {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_slope")]
        slope: f64,
        amplitude: f64,
        kmax: u32,
    },
    Modulated {
        base: Box<ForcingSpec>,
        modulation: Modulation,
    },
}

/// Squared forcing norms `|f|²_{H⁻¹}` and `|f|²_{L²}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForcingNorms {
    pub hm1_sq: f64,
    pub l2_sq: f64,
}

impl ForcingNorms {
    pub fn max(self, other: Self) -> Self {
        Self { hm1_sq: self.hm1_sq.max(other.hm1_sq), l2_sq: self.l2_sq.max(other.l2_sq) }
    }
}

/// A [`ForcingSpec`] realised on a grid: a fixed solenoidal shape times a
/// product of time modulations.
#[derive(Clone, Debug)]
pub struct Forcing {
    shape: SpectralField,
    shape_norms: ForcingNorms,
    modulations: Vec<Modulation>,
}

impl Forcing {
    pub fn build(spec: &ForcingSpec, grid: Grid, default_seed: u64) -> Result<Self> {
        let mut modulations = Vec::new();
        let mut spec = spec;
        while let ForcingSpec::Modulated { base, modulation } = spec {
            modulations.push(modulation.clone());
            spec = base;
        }
        let shape = match spec {
            ForcingSpec::Zero => SpectralField::zeros(grid),
            ForcingSpec::Modes { modes } => {
                let mut f = SpectralField::zeros(grid);
                for m in modes {
                    for v in m.re.iter().chain(&m.im) {
                        check_finite("forcing coefficient", *v)?;
                    }
                    f.set_mode(m.k, [0, 1, 2].map(|d| Complex64::new(m.re[d], m.im[d])))?;
                }
                project_leray(&f)
            }
            ForcingSpec::Random { seed, slope, amplitude, kmax } => {
                check_finite("amplitude", *amplitude)?;
                let f = random_divfree(grid, seed.unwrap_or(default_seed), *slope, *kmax)?;
                f.scaled(amplitude / f.l2_sq().sqrt())
            }
            ForcingSpec::Modulated { .. } => unreachable!(),
        };
        let shape_norms = ForcingNorms { hm1_sq: shape.hm1_sq(), l2_sq: shape.l2_sq() };
        Ok(Self { shape, shape_norms, modulations })
    }

    pub fn zero(grid: Grid) -> Self {
        Self { shape: SpectralField::zeros(grid), shape_norms: ForcingNorms::default(), modulations: Vec::new() }
    }

    /// A time-independent forcing equal to `field`.
    pub fn steady(field: SpectralField) -> Self {
        let shape_norms = ForcingNorms { hm1_sq: field.hm1_sq(), l2_sq: field.l2_sq() };
        Self { shape: field, shape_norms, modulations: Vec::new() }
    }

    pub fn grid(&self) -> Grid {
        self.shape.grid()
    }

    fn factor(&self, t: f64) -> f64 {
        self.modulations.iter().map(|m| m.at(t)).product()
    }

    pub fn at(&self, t: f64) -> SpectralField {
        if self.modulations.is_empty() {
            self.shape.clone()
        } else {
            self.shape.scaled(self.factor(t))
        }
    }

    pub fn norms_at(&self, t: f64) -> ForcingNorms {
        let a2 = self.factor(t).powi(2);
        ForcingNorms { hm1_sq: a2 * self.shape_norms.hm1_sq, l2_sq: a2 * self.shape_norms.l2_sq }
    }

    /// Largest norms over the given evaluation times. This under-estimates
    /// the true supremum of a modulated forcing between samples.
    pub fn sup_norms(&self, times: &[f64]) -> ForcingNorms {
        times.iter().map(|&t| self.norms_at(t)).fold(ForcingNorms::default(), ForcingNorms::max)
    }
}
