//! Padded collocation transforms between retained Fourier modes and the
//! `m³` physical grid used for dealiased products.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub(crate) struct PaddedTransform {
    grid: Grid,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Wrapped position of each retained mode on the padded grid.
    slots: Vec<usize>,
}

impl PaddedTransform {
    /// Shared, lazily planned transform for `grid`.
    pub(crate) fn for_grid(grid: Grid) -> Arc<PaddedTransform> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<PaddedTransform>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(grid.n()).or_insert_with(|| Arc::new(PaddedTransform::new(grid))).clone()
    }

    fn new(grid: Grid) -> Self {
        let m = grid.padded();
        let mut planner = FftPlanner::new();
        let wrap = |c: i32| ((c + m as i32) as usize) % m;
        let slots = grid.wavenumbers().map(|[a, b, c]| (wrap(a) * m + wrap(b)) * m + wrap(c)).collect();
        Self { grid, m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m), slots }
    }

    pub(crate) fn points(&self) -> usize {
        self.m.pow(3)
    }

    /// Evaluates `Σ ĉ_κ e^{iκ·x}` on the padded grid. `coeff(i)` gives the
    /// coefficient of retained mode `i`; the result is real for Hermitian input.
    pub(crate) fn to_physical(&self, coeff: impl Fn(usize) -> Complex64) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.points()];
        for (i, &slot) in self.slots.iter().enumerate() {
            buf[slot] = coeff(i);
        }
        self.fft3(&mut buf, &*self.inverse);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Fourier coefficients of a real physical field, truncated to the
    /// retained modes and symmetrised so that `ĉ_{-κ} = conj(ĉ_κ)` exactly.
    pub(crate) fn to_spectral(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.points());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft3(&mut buf, &*self.forward);
        let scale = 1.0 / self.points() as f64;
        let mut out: Vec<Complex64> = self.slots.iter().map(|&s| buf[s] * scale).collect();
        let len = self.grid.num_modes();
        for i in 0..len / 2 {
            let j = len - 1 - i;
            let avg = 0.5 * (out[i] + out[j].conj());
            out[i] = avg;
            out[j] = avg.conj();
        }
        out[len / 2] = Complex64::new(out[len / 2].re, 0.0);
        out
    }

    fn fft3(&self, buf: &mut [Complex64], fft: &dyn Fft<f64>) {
        let m = self.m;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // z: contiguous
        fft.process_with_scratch(buf, &mut scratch);
        // y: transpose each x-plane
        let mut lines = vec![Complex64::new(0.0, 0.0); m * m];
        for plane in buf.chunks_exact_mut(m * m) {
            for j in 0..m {
                for l in 0..m {
                    lines[l * m + j] = plane[j * m + l];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for j in 0..m {
                for l in 0..m {
                    plane[j * m + l] = lines[l * m + j];
                }
            }
        }
        // x: gather one y-slab at a time
        for j in 0..m {
            for i in 0..m {
                for l in 0..m {
                    lines[l * m + i] = buf[(i * m + j) * m + l];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for i in 0..m {
                for l in 0..m {
                    buf[(i * m + j) * m + l] = lines[l * m + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_matches_direct_evaluation() {
        let grid = Grid::new(8).unwrap();
        let t = PaddedTransform::for_grid(grid);
        let kappa = [1, -2, 3];
        let i = grid.index(kappa).unwrap();
        let j = grid.conj_index(i);
        let c = Complex64::new(0.3, -0.7);
        let phys = t.to_physical(|idx| {
            if idx == i {
                c
            } else if idx == j {
                c.conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let m = grid.padded();
        for (p, &v) in phys.iter().enumerate().step_by(37) {
            let x = [(p / (m * m)) as f64, ((p / m) % m) as f64, (p % m) as f64].map(|q| 2.0 * PI * q / m as f64);
            let phase = kappa[0] as f64 * x[0] + kappa[1] as f64 * x[1] + kappa[2] as f64 * x[2];
            let expect = 2.0 * (c * Complex64::from_polar(1.0, phase)).re;
            assert!((v - expect).abs() < 1e-13, "{v} vs {expect}");
        }
        let back = t.to_spectral(&phys);
        assert!((back[i] - c).norm() < 1e-15);
        assert!((back[j] - c.conj()).norm() < 1e-15);
    }
}
