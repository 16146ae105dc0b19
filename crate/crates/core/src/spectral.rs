//! Projection, differentiation, the dealiased nonlinear term, inner
//! products and norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, VOLUME};
use crate::grid::norm_sq;
use crate::transform::PaddedTransform;

/// Every norm the monitors need, in the `(2π)³` Parseval convention.
/// `l3` and `l6` are norms (not squared) obtained by quadrature on the
/// padded collocation grid; the rest are exact spectral sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormBundle {
    pub l2_sq: f64,
    pub h1_sq: f64,
    pub h2_sq: f64,
    pub hm1_sq: f64,
    pub h_half_sq: f64,
    pub l3: f64,
    pub l6: f64,
}

fn same_grid(u: &SpectralField, v: &SpectralField) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch { left: u.grid().n(), right: v.grid().n() });
    }
    Ok(())
}

/// Leray projection `û − κ(κ·û)/|κ|²` applied mode by mode.
pub fn project_leray(field: &SpectralField) -> SpectralField {
    field.map_modes(|k, c| {
        let k2 = norm_sq(k);
        if k2 == 0.0 {
            return *c;
        }
        let dot: Complex64 = (0..3).map(|d| c[d] * k[d] as f64).sum();
        let s = dot / k2;
        [c[0] - s * k[0] as f64, c[1] - s * k[1] as f64, c[2] - s * k[2] as f64]
    })
}

/// Values of the three components on the padded collocation grid.
pub fn to_physical(u: &SpectralField) -> [Vec<f64>; 3] {
    let t = PaddedTransform::for_grid(u.grid());
    let c = u.coeffs();
    [0, 1, 2].map(|d| t.to_physical(|i| c[i][d]))
}

/// `P(u·∇v)` truncated to the retained modes.
///
/// The product is formed on the `3n/2` grid, where it is alias-free for
/// truncated inputs, so `(P(u·∇v), v) = 0` holds to roundoff whenever `u`
/// is divergence-free.
pub fn nonlinear_term(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    same_grid(u, v)?;
    let grid = u.grid();
    let t = PaddedTransform::for_grid(grid);
    let up = to_physical(u);
    let modes: Vec<_> = grid.wavenumbers().collect();
    let vc = v.coeffs();
    let mut out = vec![[Complex64::new(0.0, 0.0); 3]; grid.num_modes()];
    let mut acc = vec![0.0; t.points()];
    for comp in 0..3 {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for dir in 0..3 {
            let dv = t.to_physical(|i| Complex64::new(0.0, modes[i][dir] as f64) * vc[i][comp]);
            for ((a, &x), &y) in acc.iter_mut().zip(&up[dir]).zip(&dv) {
                *a += x * y;
            }
        }
        for (o, c) in out.iter_mut().zip(t.to_spectral(&acc)) {
            o[comp] = c;
        }
    }
    // the mean of u·∇v vanishes analytically; drop its roundoff
    out[grid.zero_index()] = crate::field::ZERO;
    let raw = SpectralField::from_raw(grid, out);
    let result = project_leray(&raw);
    debug_assert!(result.hermitian_defect() == 0.0);
    debug_assert!(result.max_divergence() <= 1e-12 * raw.max_abs() * grid.n() as f64);
    Ok(result)
}

/// `(u, v)` in L², the real part of `(2π)³ Σ û_κ·conj(v̂_κ)`.
pub fn inner(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    same_grid(u, v)?;
    let s: f64 =
        u.coeffs().iter().zip(v.coeffs()).map(|(a, b)| (0..3).map(|d| (a[d] * b[d].conj()).re).sum::<f64>()).sum();
    Ok(VOLUME * s)
}

pub fn norms(u: &SpectralField) -> NormBundle {
    let phys = to_physical(u);
    let points = phys[0].len() as f64;
    let (mut s3, mut s6) = (0.0, 0.0);
    for ((x, y), z) in phys[0].iter().zip(&phys[1]).zip(&phys[2]) {
        let m2 = x * x + y * y + z * z;
        s3 += m2 * m2.sqrt();
        s6 += m2 * m2 * m2;
    }
    NormBundle {
        l2_sq: u.l2_sq(),
        h1_sq: u.h1_sq(),
        h2_sq: u.h2_sq(),
        hm1_sq: u.hm1_sq(),
        h_half_sq: u.h_half_sq(),
        l3: (VOLUME * s3 / points).cbrt(),
        l6: (VOLUME * s6 / points).powf(1.0 / 6.0),
    }
}

/// `|u|²` by collocation quadrature on the padded grid.
pub fn collocation_l2_sq(u: &SpectralField) -> f64 {
    let phys = to_physical(u);
    let points = phys[0].len() as f64;
    let s: f64 = (0..phys[0].len()).map(|p| phys.iter().map(|c| c[p] * c[p]).sum::<f64>()).sum();
    VOLUME * s / points
}

/// `-Δu`, i.e. multiplication by `|κ|²`.
pub fn neg_laplacian(u: &SpectralField) -> SpectralField {
    u.map_modes(|k, c| c.map(|z| z * norm_sq(k)))
}
