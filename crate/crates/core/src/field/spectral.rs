use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{check_grid, FieldError, GridField};

/// Cached forward and inverse transforms for one grid size.
#[derive(Clone)]
pub struct SpectralSolver {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Output of the Poisson solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonSolution {
    pub potential: GridField,
    /// mean subtracted from the source before solving
    pub mean_removed: f64,
}

impl SpectralSolver {
    pub fn new(n: usize) -> Result<Self, FieldError> {
        check_grid(n)?;
        let mut planner = FftPlanner::new();
        Ok(SpectralSolver {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Integer frequency of index `k`, in `(-n/2, n/2]`.
    #[inline]
    fn freq(&self, k: usize) -> f64 {
        if k <= self.n / 2 {
            k as f64
        } else {
            k as f64 - self.n as f64
        }
    }

    /// `4π²|k|²` for the flattened spectral index.
    #[inline]
    fn symbol(&self, idx: usize) -> f64 {
        let kx = self.freq(idx % self.n);
        let ky = self.freq(idx / self.n);
        4.0 * PI * PI * (kx * kx + ky * ky)
    }

    fn transform_2d(&self, buf: &mut [Complex<f64>], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        fft.process(buf);
        transpose(buf, n);
        fft.process(buf);
        transpose(buf, n);
    }

    /// Fourier coefficients `c_k = (1/n²) Σ f_j e^{-2πi k·j/n}`.
    pub fn coefficients(&self, f: &GridField) -> Result<Vec<Complex<f64>>, FieldError> {
        if f.n() != self.n {
            return Err(FieldError::SizeMismatch(f.n(), self.n));
        }
        let mut buf: Vec<Complex<f64>> = f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.transform_2d(&mut buf, &self.forward);
        let s = 1.0 / (self.n * self.n) as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        Ok(buf)
    }

    fn synthesize(&self, mut coeffs: Vec<Complex<f64>>) -> Result<GridField, FieldError> {
        self.transform_2d(&mut coeffs, &self.inverse);
        GridField::from_values(self.n, coeffs.iter().map(|c| c.re).collect())
    }

    /// Solves `-ΔU = source - mean(source)` with `mean(U) = 0`.
    pub fn solve(&self, source: &GridField) -> Result<PoissonSolution, FieldError> {
        let mean = source.mean();
        let mut c = self.coefficients(source)?;
        c[0] = Complex::new(0.0, 0.0);
        for (idx, v) in c.iter_mut().enumerate().skip(1) {
            *v /= self.symbol(idx);
        }
        let mut potential = self.synthesize(c)?;
        potential.mean_zero = true;
        Ok(PoissonSolution {
            potential,
            mean_removed: mean,
        })
    }

    /// `∫ |∇u|²` of the trigonometric interpolant of `u`.
    pub fn dirichlet_energy(&self, u: &GridField) -> Result<f64, FieldError> {
        let c = self.coefficients(u)?;
        Ok(c
            .iter()
            .enumerate()
            .map(|(idx, v)| self.symbol(idx) * v.norm_sqr())
            .sum())
    }

    /// `‖g‖²_{H⁻¹} = Σ_{k≠0} |c_k|² / (4π²|k|²)`, the mean being ignored.
    pub fn hm1_norm_sq(&self, g: &GridField) -> Result<f64, FieldError> {
        let c = self.coefficients(g)?;
        Ok(c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(idx, v)| v.norm_sqr() / self.symbol(idx))
            .sum())
    }

    /// Potential of `-ΔU = g - mean(g)` together with `‖g‖²_{H⁻¹}`, from a
    /// single forward transform.
    pub fn potential_and_hm1(&self, g: &GridField) -> Result<(GridField, f64), FieldError> {
        let mut c = self.coefficients(g)?;
        c[0] = Complex::new(0.0, 0.0);
        let mut hm1 = 0.0;
        for (idx, v) in c.iter_mut().enumerate().skip(1) {
            let s = self.symbol(idx);
            hm1 += v.norm_sqr() / s;
            *v /= s;
        }
        let mut u = self.synthesize(c)?;
        u.mean_zero = true;
        Ok((u, hm1))
    }

    /// Spectral `-Δu`.
    pub fn neg_laplacian(&self, u: &GridField) -> Result<GridField, FieldError> {
        let mut c = self.coefficients(u)?;
        for (idx, v) in c.iter_mut().enumerate() {
            *v *= self.symbol(idx);
        }
        self.synthesize(c)
    }
}

fn transpose(buf: &mut [Complex<f64>], n: usize) {
    for j in 0..n {
        for i in j + 1..n {
            buf.swap(j * n + i, i * n + j);
        }
    }
}

pub fn solve_poisson(source: &GridField) -> Result<PoissonSolution, FieldError> {
    SpectralSolver::new(source.n())?.solve(source)
}

pub fn dirichlet_energy(u: &GridField) -> Result<f64, FieldError> {
    SpectralSolver::new(u.n())?.dirichlet_energy(u)
}

pub fn hm1_norm_sq(g: &GridField) -> Result<f64, FieldError> {
    SpectralSolver::new(g.n())?.hm1_norm_sq(g)
}
