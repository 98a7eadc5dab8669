//! The finite number-phase grid and its operators.
//!
//! A [`PhaseGrid`] of dimension `d` carries the number basis `|n>`, the phase
//! basis `|phi_m> = d^{-1/2} sum_n exp(i n phi_m) |n>` with
//! `phi_m = phi0 + 2 pi m / d`, the clock/shift pair `U`, `V`, and the
//! displacement operators `D(k, l) = exp(-i pi k l / d) U^k V^l`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{adjoint, cis, cr, outer, Complex, ComplexMatrix, ComplexVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGrid {
    dim: usize,
    phi0: f64,
}

impl PhaseGrid {
    pub fn new(dim: usize, phi0: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if !phi0.is_finite() {
            return Err(Error::InvalidGrid(format!("reference angle {phi0} is not finite")));
        }
        Ok(Self { dim, phi0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// `phi_r = phi0 + 2 pi r / d` for any integer `r` (not reduced).
    pub fn phase(&self, r: i64) -> f64 {
        self.phi0 + 2.0 * PI * r as f64 / self.dim as f64
    }

    pub fn phases(&self) -> Vec<f64> {
        (0..self.dim as i64).map(|m| self.phase(m)).collect()
    }

    /// Index of the grid phase closest to `phi` (mod 2 pi).
    pub fn nearest_phase_index(&self, phi: f64) -> usize {
        let step = 2.0 * PI / self.dim as f64;
        let x = ((phi - self.phi0) / step).round() as i64;
        x.rem_euclid(self.dim as i64) as usize
    }

    pub fn number_ket(&self, n: usize) -> Result<ComplexVector> {
        ComplexVector::basis(self.dim, n)
    }

    /// `|phi_r>`; periodic in `r` with period `d`.
    pub fn phase_ket(&self, r: i64) -> ComplexVector {
        let norm = 1.0 / (self.dim as f64).sqrt();
        let phi = self.phase(r);
        ComplexVector::new((0..self.dim).map(|n| cis(n as f64 * phi) * norm).collect())
    }

    pub fn phase_projector(&self, r: i64) -> ComplexMatrix {
        let k = self.phase_ket(r);
        outer(&k, &k).expect("same dimension")
    }

    pub fn number_projector(&self, n: usize) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.dim);
        p[(n, n)] = cr(1.0);
        p
    }

    pub fn number_op(&self) -> ComplexMatrix {
        self.number_function_op(|n| cr(n as f64))
    }

    pub fn phase_op(&self) -> ComplexMatrix {
        self.phase_function_op(cr)
    }

    /// `f(n^) = sum_n f(n) |n><n|`
    pub fn number_function_op(&self, f: impl Fn(usize) -> Complex) -> ComplexMatrix {
        let diag: Vec<Complex> = (0..self.dim).map(f).collect();
        ComplexMatrix::diagonal(&diag)
    }

    /// `f(phi^) = sum_m f(phi_m) |phi_m><phi_m|`
    pub fn phase_function_op(&self, f: impl Fn(f64) -> Complex) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        for m in 0..self.dim as i64 {
            out.add_scaled(f(self.phase(m)), &self.phase_projector(m));
        }
        out
    }

    /// `V = exp(i 2 pi n^ / d)`
    pub fn v_op(&self) -> ComplexMatrix {
        let d = self.dim as f64;
        self.number_function_op(|n| cis(2.0 * PI * n as f64 / d))
    }

    /// Shift form of `U`: `sum_{n<s} |n><n+1| + exp(i d phi0) |s><0|`.
    pub fn u_op(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut u = ComplexMatrix::zeros(d);
        for n in 0..d - 1 {
            u[(n, n + 1)] = cr(1.0);
        }
        u[(d - 1, 0)] += cis(d as f64 * self.phi0);
        u
    }

    /// Spectral form of `U = exp(i phi^)`.
    pub fn u_op_spectral(&self) -> ComplexMatrix {
        self.phase_function_op(cis)
    }

    /// `D(k, l) = exp(-i pi k l / d) U^k V^l`, with `k`, `l` used as given.
    pub fn displacement(&self, k: i64, l: i64) -> ComplexMatrix {
        let u = self.u_op();
        let v = self.v_op();
        let uk = if k >= 0 { u.pow(k as u64) } else { adjoint(&u).pow(k.unsigned_abs()) };
        let vl = if l >= 0 { v.pow(l as u64) } else { adjoint(&v).pow(l.unsigned_abs()) };
        let phase = cis(-PI * (k as f64) * (l as f64) / self.dim as f64);
        (&uk * &vl).scaled(phase)
    }

    /// `D(k, l) = exp(i pi k l / d) sum_m exp(i k phi_m) |phi_{m+l}><phi_m|`.
    pub fn displacement_phase_form(&self, k: i64, l: i64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        for m in 0..self.dim as i64 {
            let p = outer(&self.phase_ket(m + l), &self.phase_ket(m)).expect("same dimension");
            out.add_scaled(cis(k as f64 * self.phase(m)), &p);
        }
        out.scaled(cis(PI * (k as f64) * (l as f64) / self.dim as f64))
    }

    /// Column `j` of `D(k, l)`: the single nonzero row index and its value.
    pub fn displacement_column(&self, k: i64, l: i64, j: usize) -> (usize, Complex) {
        let d = self.dim as i64;
        let shifted = j as i64 - k;
        let wraps = shifted.div_euclid(d);
        let row = shifted.rem_euclid(d) as usize;
        let phase = -PI * (k as f64) * (l as f64) / d as f64
            + 2.0 * PI * (l as f64) * (j as f64) / d as f64
            - (wraps as f64) * d as f64 * self.phi0;
        (row, cis(phase))
    }

    /// `Tr{a D(k, l)}` using the monomial structure of `D`.
    pub fn trace_with_displacement(&self, a: &ComplexMatrix, k: i64, l: i64) -> Complex {
        (0..self.dim)
            .map(|j| {
                let (row, val) = self.displacement_column(k, l, j);
                a[(j, row)] * val
            })
            .sum()
    }
}

/// A complex function on the grid, indexed by `(m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: PhaseGrid,
    values: Vec<Complex>,
}

impl GridFunction {
    pub fn new(grid: PhaseGrid, values: Vec<Complex>) -> Result<Self> {
        let d = grid.dim();
        if values.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PhaseGrid, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let d = grid.dim();
        let values = (0..d).flat_map(|m| (0..d).map(move |n| (m, n))).map(|(m, n)| f(m, n)).collect();
        Self { grid, values }
    }

    /// Function of the phase only: `f(phi_m, n) = f1(phi_m)`.
    pub fn of_phase(grid: PhaseGrid, f1: impl Fn(f64) -> Complex) -> Self {
        Self::from_fn(grid, |m, _| f1(grid.phase(m as i64)))
    }

    /// Function of the number only: `f(phi_m, n) = f2(n)`.
    pub fn of_number(grid: PhaseGrid, f2: impl Fn(usize) -> Complex) -> Self {
        Self::from_fn(grid, |_, n| f2(n))
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn get(&self, m: usize, n: usize) -> Complex {
        self.values[m * self.grid.dim() + n]
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Fourier coefficients `f~(k, l)` of a grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable {
    grid: PhaseGrid,
    values: Vec<Complex>,
}

impl FourierTable {
    pub fn new(grid: PhaseGrid, values: Vec<Complex>) -> Result<Self> {
        let d = grid.dim();
        if values.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn get(&self, k: usize, l: usize) -> Complex {
        self.values[k * self.grid.dim() + l]
    }
}

/// `exp{i (k phi_m + 2 pi l n / d)}`
pub(crate) fn grid_character(grid: &PhaseGrid, k: usize, l: usize, m: usize, n: usize) -> Complex {
    let d = grid.dim() as f64;
    cis(k as f64 * grid.phase(m as i64) + 2.0 * PI * (l * n) as f64 / d)
}

/// `f~(k, l) = (1/d) sum_{m,n} f(phi_m, n) exp{-i (k phi_m + 2 pi l n / d)}`
pub fn fourier_coeffs(f: &GridFunction) -> FourierTable {
    let grid = *f.grid();
    let d = grid.dim();
    let mut values = vec![Complex::default(); d * d];
    for k in 0..d {
        for l in 0..d {
            let mut acc = Complex::default();
            for m in 0..d {
                for n in 0..d {
                    acc += f.get(m, n) * grid_character(&grid, k, l, m, n).conj();
                }
            }
            values[k * d + l] = acc / d as f64;
        }
    }
    FourierTable { grid, values }
}

/// `f(phi_m, n) = (1/d) sum_{k,l} f~(k, l) exp{i (k phi_m + 2 pi l n / d)}`
pub fn inverse_fourier(t: &FourierTable) -> GridFunction {
    let grid = *t.grid();
    let d = grid.dim();
    GridFunction::from_fn(grid, |m, n| {
        let mut acc = Complex::default();
        for k in 0..d {
            for l in 0..d {
                acc += t.get(k, l) * grid_character(&grid, k, l, m, n);
            }
        }
        acc / d as f64
    })
}
