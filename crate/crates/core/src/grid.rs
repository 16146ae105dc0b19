use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wavenumber triple of a Fourier mode.
pub type Wavenumber = [i32; 3];

/// Truncated Fourier grid on the periodic box (0, 2π)³.
///
/// A grid of resolution `n` retains every mode whose components lie in
/// `[-n/2 + 1, n/2 - 1]`; the Nyquist plane is dropped so the mode set is
/// symmetric under `κ → -κ`. Modes are stored densely in lexicographic
/// order (`κx` slowest), which makes the conjugate of index `i` sit at
/// `len - 1 - i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest retained wavenumber component.
    pub fn kmax(&self) -> i32 {
        (self.n / 2 - 1) as i32
    }

    /// Number of retained wavenumbers per axis (`n - 1`).
    pub fn side(&self) -> usize {
        self.n - 1
    }

    pub fn num_modes(&self) -> usize {
        self.side().pow(3)
    }

    /// Collocation resolution for dealiased products: `3n/2` rounded up to
    /// an even integer. Quadratic products of retained modes are exact on it.
    pub fn padded(&self) -> usize {
        let m = 3 * self.n / 2;
        m + m % 2
    }

    pub fn zero_index(&self) -> usize {
        (self.num_modes() - 1) / 2
    }

    pub fn conj_index(&self, idx: usize) -> usize {
        self.num_modes() - 1 - idx
    }

    pub fn mode(&self, idx: usize) -> Wavenumber {
        let s = self.side();
        let k = self.kmax();
        let a = idx / (s * s);
        let b = (idx / s) % s;
        let c = idx % s;
        [a as i32 - k, b as i32 - k, c as i32 - k]
    }

    pub fn index(&self, kappa: Wavenumber) -> Option<usize> {
        let k = self.kmax();
        if kappa.iter().any(|c| c.abs() > k) {
            return None;
        }
        let s = self.side();
        let [a, b, c] = kappa.map(|c| (c + k) as usize);
        Some((a * s + b) * s + c)
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = Wavenumber> + '_ {
        (0..self.num_modes()).map(move |i| self.mode(i))
    }
}

impl TryFrom<usize> for Grid {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        Grid::new(n)
    }
}

impl From<Grid> for usize {
    fn from(g: Grid) -> usize {
        g.n
    }
}

pub fn norm_sq(kappa: Wavenumber) -> f64 {
    kappa.iter().map(|&c| (c * c) as f64).sum()
}
