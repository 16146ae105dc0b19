//! Spectral velocity fields and their snapshot file format.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::{norm_sq, Grid, Wavenumber};

/// A complex 3-vector: the Fourier coefficient of one mode.
pub type Coeff = [Complex64; 3];

pub const ZERO: Coeff = [Complex64::new(0.0, 0.0); 3];

/// Volume of the periodic box, `(2π)³`.
pub const VOLUME: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI;

const MAGIC: &[u8; 8] = b"NSE3DFLD";
const FORMAT_VERSION: u32 = 1;

/// Truncated Fourier representation `u(x) = Σ_κ û_κ e^{iκ·x}` of a real,
/// zero-mean vector field on the retained modes of a [`Grid`].
///
/// Hermitian symmetry and the zero mean are enforced on construction.
/// Divergence-freeness is what [`project_leray`](crate::spectral::project_leray)
/// establishes; every solver operation returns projected fields.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Coeff>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, coeffs: vec![ZERO; grid.num_modes()] }
    }

    /// Wraps raw coefficients, checking length, zero mean and Hermitian
    /// symmetry (to 1e-12 of the largest coefficient).
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Coeff>) -> Result<Self> {
        if coeffs.len() != grid.num_modes() {
            return Err(invalid(format!(
                "expected {} coefficients for n = {}, got {}",
                grid.num_modes(),
                grid.n(),
                coeffs.len()
            )));
        }
        let field = Self { grid, coeffs };
        if field.coeffs[grid.zero_index()] != ZERO {
            return Err(invalid("field has a nonzero mean mode"));
        }
        let scale = field.max_abs().max(f64::MIN_POSITIVE);
        if field.hermitian_defect() > 1e-12 * scale {
            return Err(invalid("coefficients are not Hermitian-symmetric"));
        }
        Ok(field)
    }

    pub(crate) fn from_raw(grid: Grid, coeffs: Vec<Coeff>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.num_modes());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    pub fn coeff(&self, kappa: Wavenumber) -> Option<Coeff> {
        self.grid.index(kappa).map(|i| self.coeffs[i])
    }

    /// Sets `û_κ = c` and `û_{-κ} = conj(c)`.
    pub fn set_mode(&mut self, kappa: Wavenumber, c: Coeff) -> Result<()> {
        if kappa == [0, 0, 0] {
            return Err(invalid("the mean mode must stay zero"));
        }
        let i = self
            .grid
            .index(kappa)
            .ok_or_else(|| invalid(format!("mode {kappa:?} is outside the n = {} grid", self.grid.n())))?;
        let j = self.grid.conj_index(i);
        self.coeffs[i] = c;
        self.coeffs[j] = c.map(|z| z.conj());
        Ok(())
    }

    /// Gradient `∇φ` of a scalar given by its Hermitian coefficients.
    pub fn gradient_of(grid: Grid, phi: &[Complex64]) -> Result<Self> {
        if phi.len() != grid.num_modes() {
            return Err(invalid("scalar has the wrong number of modes"));
        }
        let coeffs = grid.wavenumbers().zip(phi).map(|(k, &p)| k.map(|c| Complex64::new(0.0, c as f64) * p)).collect();
        Ok(Self::from_raw(grid, coeffs))
    }

    /// `Σ_κ w(|κ|²) |û_κ|²`, without the volume factor.
    pub(crate) fn weighted_energy(&self, weight: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .wavenumbers()
            .zip(&self.coeffs)
            .filter(|(k, _)| *k != [0, 0, 0])
            .map(|(k, c)| weight(norm_sq(k)) * c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn l2_sq(&self) -> f64 {
        VOLUME * self.weighted_energy(|_| 1.0)
    }

    pub fn h1_sq(&self) -> f64 {
        VOLUME * self.weighted_energy(|k2| k2)
    }

    pub fn h2_sq(&self) -> f64 {
        VOLUME * self.weighted_energy(|k2| k2 * k2)
    }

    pub fn hm1_sq(&self) -> f64 {
        VOLUME * self.weighted_energy(|k2| 1.0 / k2)
    }

    pub fn h_half_sq(&self) -> f64 {
        VOLUME * self.weighted_energy(f64::sqrt)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flat_map(|c| c.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|κ·û_κ|` over the retained modes.
    pub fn max_divergence(&self) -> f64 {
        self.grid
            .wavenumbers()
            .zip(&self.coeffs)
            .map(|(k, c)| (0..3).map(|d| c[d] * k[d] as f64).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|û_{-κ} - conj(û_κ)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let len = self.coeffs.len();
        (0..len)
            .flat_map(|i| {
                let j = len - 1 - i;
                (0..3).map(move |d| (i, j, d))
            })
            .map(|(i, j, d)| (self.coeffs[j][d] - self.coeffs[i][d].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Hermitian, zero-mean and divergence-free to `tol` relative to the
    /// largest coefficient times `n`.
    pub fn satisfies_invariants(&self, tol: f64) -> bool {
        let scale = self.max_abs() * self.grid.n() as f64;
        self.coeffs[self.grid.zero_index()] == ZERO
            && self.hermitian_defect() <= tol * scale
            && self.max_divergence() <= tol * scale
    }

    pub fn scaled(&self, a: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.map(|z| z * a)).collect();
        Self::from_raw(self.grid, coeffs)
    }

    pub(crate) fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let coeffs =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| [f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2])]).collect();
        Self::from_raw(self.grid, coeffs)
    }

    pub(crate) fn map_modes(&self, f: impl Fn(Wavenumber, &Coeff) -> Coeff) -> Self {
        let coeffs = self.grid.wavenumbers().zip(&self.coeffs).map(|(k, c)| f(k, c)).collect();
        Self::from_raw(self.grid, coeffs)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.n() as u32).to_le_bytes())?;
        for c in &self.coeffs {
            for z in c {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::MalformedFieldFile("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::MalformedFieldFile(format!("unsupported version {version}")));
        }
        let n = read_u32(&mut r)? as usize;
        let grid = Grid::new(n).map_err(|e| Error::MalformedFieldFile(e.to_string()))?;
        let mut coeffs = Vec::with_capacity(grid.num_modes());
        let mut buf = [0u8; 48];
        for _ in 0..grid.num_modes() {
            r.read_exact(&mut buf).map_err(truncated)?;
            let f = |q: usize| f64::from_le_bytes(buf[8 * q..8 * q + 8].try_into().unwrap());
            coeffs.push([Complex64::new(f(0), f(1)), Complex64::new(f(2), f(3)), Complex64::new(f(4), f(5))]);
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(Error::MalformedFieldFile("trailing bytes".into()));
        }
        Self::from_coeffs(grid, coeffs).map_err(|e| Error::MalformedFieldFile(e.to_string()))
    }

    /// Writes the snapshot atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::harness::output::write_atomic(path, |w| self.write_to(w))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::MalformedFieldFile("truncated file".into())
    } else {
        Error::Io(e)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;

    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scaled(self)
    }
}
