//! Wigner functions of density operators, expectation values, marginals and
//! state reconstruction from a Wigner grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{is_unimodular, Kernel, KernelFamily};
use crate::numerics::{cis, cr, frob_dist, trace, trace_product, Complex, ComplexMatrix, ComplexVector, PSD_SLACK, TOL};
use crate::phasespace::{grid_character, GridFunction, PhaseGrid};
use crate::quantizer::Quantizer;

/// Density operators are accepted when Hermiticity and trace hold to this level.
pub const DENSITY_TOL: f64 = 10.0 * TOL;

/// Denominators of the symmetric shortcut below this modulus trigger the
/// general reconstruction path.
pub const SHORTCUT_GUARD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DENSITY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_hermitian(tol) {
            return Err(Error::InvalidDensity("matrix is not Hermitian".into()));
        }
        let tr = trace(&matrix);
        if (tr - cr(1.0)).norm() > tol {
            return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
        }
        if !matrix.is_positive_semidefinite(PSD_SLACK) {
            return Err(Error::InvalidDensity("matrix is not positive semidefinite".into()));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scaled(cr(1.0 / dim as f64)) }
    }

    /// Projector onto `psi / |psi|`.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if norm < TOL {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let unit = psi.scaled(cr(1.0 / norm));
        let matrix = ComplexMatrix::from_fn(unit.dim(), |i, j| unit[i] * unit[j].conj());
        Ok(Self { matrix })
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        Self::pure(&ComplexVector::basis(dim, n)?)
    }

    pub fn phase_state(grid: &PhaseGrid, m: i64) -> Self {
        Self { matrix: grid.phase_projector(m) }
    }

    /// Qubit state `(1 + a . sigma) / 2` in the number basis.
    pub fn from_bloch(a: [f64; 3]) -> Result<Self> {
        let len = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1.0 + DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("Bloch vector has length {len} > 1")));
        }
        let matrix = ComplexMatrix::from_rows(vec![
            vec![cr(0.5 * (1.0 + a[2])), Complex::new(0.5 * a[0], -0.5 * a[1])],
            vec![Complex::new(0.5 * a[0], 0.5 * a[1]), cr(0.5 * (1.0 - a[2]))],
        ])?;
        Ok(Self { matrix })
    }

    /// `(|0> + |1>)(<0| + <1|) / 2` in dimension `dim >= 2`.
    pub fn superposition01(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::IndexOutOfRange { index: 1, dim });
        }
        let mut v = vec![Complex::default(); dim];
        v[0] = cr(1.0);
        v[1] = cr(1.0);
        Self::pure(&ComplexVector::new(v))
    }

    /// Pads with zero rows and columns up to `dim`.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        let d = self.dim();
        if dim < d {
            return Err(Error::InvalidEmbedding(format!("cannot embed dimension {d} into {dim}")));
        }
        let matrix = ComplexMatrix::from_fn(dim, |i, j| {
            if i < d && j < d {
                self.matrix[(i, j)]
            } else {
                Complex::default()
            }
        });
        Ok(Self { matrix })
    }

    /// Largest occupied number level, ignoring entries below `TOL`.
    pub fn max_level(&self) -> usize {
        let d = self.dim();
        (0..d)
            .rev()
            .find(|&i| (0..d).any(|j| self.matrix[(i, j)].norm() > TOL || self.matrix[(j, i)].norm() > TOL))
            .unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `{"dim": d, "matrix": [[[re, im], ...], ...]}`
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&matrix_file(&self.matrix))?)
    }

    /// Parses and validates a density matrix in the format of [`DensityOperator::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(matrix_from_json(text)?)
    }

    /// `alpha rho1 + (1 - alpha) rho2` for `alpha` in `[0, 1]`.
    pub fn mix(&self, other: &DensityOperator, alpha: f64) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let mut m = self.matrix.scaled(cr(alpha));
        m.add_scaled(cr(1.0 - alpha), &other.matrix);
        Self::new(m)
    }
}

/// Real-valued Wigner function on the `d x d` grid, indexed `m * d + n`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    grid: PhaseGrid,
    kernel: String,
    values: Vec<f64>,
}

impl WignerGrid {
    pub fn new(grid: PhaseGrid, kernel: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let d = grid.dim();
        if values.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: values.len() });
        }
        Ok(Self { grid, kernel: kernel.into(), values })
    }

    /// Keeps the real part of each value after checking the imaginary part
    /// is at most `TOL`.
    pub fn from_complex(grid: PhaseGrid, kernel: impl Into<String>, values: &[Complex]) -> Result<Self> {
        let d = grid.dim();
        let mut out = Vec::with_capacity(values.len());
        for (i, z) in values.iter().enumerate() {
            if z.im.abs() > TOL {
                return Err(Error::ImaginaryResidue { m: i / d, n: i % d, residue: z.im.abs() });
            }
            out.push(z.re);
        }
        Self::new(grid, kernel, out)
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn kernel_label(&self) -> &str {
        &self.kernel
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.dim() + n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &WignerGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        let d = self.dim();
        let file = WignerFile {
            dim: d,
            phi0: self.grid.phi0(),
            kernel: self.kernel.clone(),
            values: self.values.chunks(d).map(|r| r.to_vec()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WignerFile = serde_json::from_str(text)?;
        let grid = PhaseGrid::new(file.dim, file.phi0)?;
        if file.values.len() != file.dim || file.values.iter().any(|r| r.len() != file.dim) {
            return Err(Error::Parse(format!("values must be a {0} x {0} table", file.dim)));
        }
        Self::new(grid, file.kernel, file.values.concat())
    }

    /// CSV with header `m,n,phi,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::from("m,n,phi,value\n");
        for m in 0..d {
            for n in 0..d {
                out.push_str(&format!("{m},{n},{:.16e},{:.16e}\n", self.grid.phase(m as i64), self.get(m, n)));
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    dim: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

fn matrix_file(m: &ComplexMatrix) -> MatrixFile {
    MatrixFile {
        dim: m.dim(),
        matrix: m.rows().into_iter().map(|r| r.into_iter().map(|z| [z.re, z.im]).collect()).collect(),
    }
}

/// JSON text for any square matrix, in the density-matrix layout.
pub fn matrix_to_json(m: &ComplexMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(&matrix_file(m))?)
}

/// Reads the density-matrix layout without checking state conditions.
pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_str(text)?;
    if file.matrix.len() != file.dim {
        return Err(Error::Parse(format!("expected {} rows, found {}", file.dim, file.matrix.len())));
    }
    let rows = file
        .matrix
        .into_iter()
        .map(|r| r.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(rows)
}

#[derive(Serialize, Deserialize)]
struct WignerFile {
    dim: usize,
    phi0: f64,
    kernel: String,
    values: Vec<Vec<f64>>,
}

fn check_density_dim(grid: &PhaseGrid, rho: &DensityOperator) -> Result<()> {
    if rho.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: rho.dim() });
    }
    Ok(())
}

/// `rho_W(phi_m, n) = (1/d) Tr{rho Omega(phi_m, n)}`
pub fn wigner(q: &Quantizer, rho: &DensityOperator) -> Result<WignerGrid> {
    let grid = *q.grid();
    check_density_dim(&grid, rho)?;
    let d = grid.dim();
    let mut values = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            values.push(trace_product(rho.matrix(), q.omega(m, n))? / d as f64);
        }
    }
    WignerGrid::from_complex(grid, q.kernel().label(), &values)
}

/// Characteristic values `Tr{rho D(k, l)}` for `0 <= k, l < d`, using the sparse
/// action of the displacements.
pub fn characteristic(grid: &PhaseGrid, rho: &ComplexMatrix) -> Vec<Complex> {
    let d = grid.dim();
    (0..d * d)
        .map(|i| grid.trace_with_displacement(rho, (i / d) as i64, (i % d) as i64))
        .collect()
}

/// Single Wigner value straight from the kernel, without building any
/// phase-point operator. Suited to large dimensions.
pub fn wigner_value(grid: &PhaseGrid, kernel: &Kernel, chi: &[Complex], m: usize, n: usize) -> Complex {
    let d = grid.dim();
    let mut acc = Complex::default();
    for k in 0..d {
        for l in 0..d {
            acc += kernel.get(k, l) * chi[k * d + l] * grid_character(grid, k, l, m, n).conj();
        }
    }
    acc / (d * d) as f64
}

/// Full grid via [`wigner_value`].
pub fn wigner_fast(grid: &PhaseGrid, kernel: &Kernel, rho: &DensityOperator) -> Result<WignerGrid> {
    check_density_dim(grid, rho)?;
    if kernel.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: kernel.dim() });
    }
    let d = grid.dim();
    let chi = characteristic(grid, rho.matrix());
    let values: Vec<Complex> = (0..d * d).map(|i| wigner_value(grid, kernel, &chi, i / d, i % d)).collect();
    WignerGrid::from_complex(*grid, kernel.label(), &values)
}

/// `<n|rho|phi_m><phi_m|n>`
fn number_phase_overlap(grid: &PhaseGrid, rho: &ComplexMatrix, m: usize, n: usize) -> Complex {
    let d = grid.dim();
    let phi = grid.phase(m as i64);
    let row: Complex = (0..d).map(|j| rho[(n, j)] * cis(j as f64 * phi)).sum();
    row * cis(-(n as f64) * phi) / d as f64
}

/// `Re{<n|rho|phi_m><phi_m|n>}`
pub fn symmetric_wigner(grid: &PhaseGrid, rho: &DensityOperator) -> Result<WignerGrid> {
    check_density_dim(grid, rho)?;
    let d = grid.dim();
    let values = (0..d * d).map(|i| number_phase_overlap(grid, rho.matrix(), i / d, i % d).re).collect();
    WignerGrid::new(*grid, KernelFamily::Symmetric.to_string(), values)
}

/// `Re{e^{i eps} <n|rho|phi_m><phi_m|n>} / cos(eps)`
pub fn almost_symmetric_wigner(grid: &PhaseGrid, epsilon: f64, rho: &DensityOperator) -> Result<WignerGrid> {
    check_density_dim(grid, rho)?;
    let d = grid.dim();
    let values = (0..d * d)
        .map(|i| (cis(epsilon) * number_phase_overlap(grid, rho.matrix(), i / d, i % d)).re / epsilon.cos())
        .collect();
    WignerGrid::new(*grid, KernelFamily::AlmostSymmetric { epsilon }.to_string(), values)
}

/// Wootters-kernel Wigner function from its number-basis selection rule
/// `n' + n'' = 2n (mod d)`. Odd dimensions only.
pub fn wootters_wigner(grid: &PhaseGrid, rho: &DensityOperator) -> Result<WignerGrid> {
    check_density_dim(grid, rho)?;
    let d = grid.dim();
    if d % 2 == 0 {
        return Err(Error::WrongParity("odd"));
    }
    let r = rho.matrix();
    let mut values = Vec::with_capacity(d * d);
    for m in 0..d {
        let phi = grid.phase(m as i64);
        for n in 0..d {
            let mut acc = Complex::default();
            for n1 in 0..d {
                let n2 = (2 * n + d - n1) % d;
                acc += r[(n2, n1)] * cis((n1 as f64 - n2 as f64) * phi);
            }
            values.push(acc.re / d as f64);
        }
    }
    WignerGrid::new(*grid, KernelFamily::Wootters.to_string(), values)
}

/// Truncated sum `(1/d) sum_{r=-n}^{n} e^{2 i r phi_m} <n-r|rho|n+r>`, keeping
/// only terms inside the basis. Agrees with [`wootters_wigner`] when no
/// index wraps modulo `d`, e.g. for diagonal states.
pub fn wootters_truncated_sum(grid: &PhaseGrid, rho: &DensityOperator, m: usize, n: usize) -> Complex {
    let d = grid.dim() as i64;
    let phi = grid.phase(m as i64);
    let n = n as i64;
    let mut acc = Complex::default();
    for r in -n..=n {
        let (a, b) = (n - r, n + r);
        if a < d && b < d {
            acc += cis(2.0 * r as f64 * phi) * rho.matrix()[(a as usize, b as usize)];
        }
    }
    acc / d as f64
}

/// `sum_{m,n} f(phi_m, n) rho_W(phi_m, n)`
pub fn expectation(w: &WignerGrid, f: &GridFunction) -> Result<Complex> {
    if f.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let d = w.dim();
    Ok((0..d * d).map(|i| f.values()[i] * w.values[i]).sum())
}

/// Phase marginal `sum_n rho_W(phi_m, n)` and number marginal `sum_m rho_W(phi_m, n)`.
pub fn marginals(w: &WignerGrid) -> (Vec<f64>, Vec<f64>) {
    let d = w.dim();
    let phase = (0..d).map(|m| (0..d).map(|n| w.get(m, n)).sum()).collect();
    let number = (0..d).map(|n| (0..d).map(|m| w.get(m, n)).sum()).collect();
    (phase, number)
}

fn check_kernel(w: &WignerGrid, kernel: &Kernel) -> Result<()> {
    if kernel.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: kernel.dim() });
    }
    Ok(())
}

/// `<phi_r'|rho|phi_r>` from a Wigner grid for any valid kernel.
pub fn phase_matrix_element(w: &WignerGrid, kernel: &Kernel, r: usize, rp: usize) -> Complex {
    if r < rp {
        return phase_matrix_element(w, kernel, rp, r).conj();
    }
    let d = w.dim();
    let df = d as f64;
    let l = r - rp;
    let centre = (r + rp) as f64 / 2.0;
    let mut acc = Complex::default();
    for k in 0..d {
        let inv = 1.0 / kernel.get(k, l);
        for m in 0..d {
            let phase_k = cis(2.0 * PI * k as f64 * (m as f64 - centre) / df);
            let mut row = Complex::default();
            for n in 0..d {
                row += cis(2.0 * PI * (l * n) as f64 / df) * w.get(m, n);
            }
            acc += inv * phase_k * row;
        }
    }
    acc / df
}

/// Matrix of `rho` in the phase basis, entry `(r', r) = <phi_r'|rho|phi_r>`.
pub fn reconstruct_phase_basis(w: &WignerGrid, kernel: &Kernel) -> Result<ComplexMatrix> {
    check_kernel(w, kernel)?;
    let d = w.dim();
    Ok(ComplexMatrix::from_fn(d, |rp, r| phase_matrix_element(w, kernel, r, rp)))
}

/// Changes a phase-basis matrix to the number basis.
pub fn phase_to_number_basis(grid: &PhaseGrid, phase: &ComplexMatrix) -> ComplexMatrix {
    let d = grid.dim();
    // column r of the change of basis is |phi_r>
    let kets: Vec<ComplexVector> = (0..d).map(|r| grid.phase_ket(r as i64)).collect();
    ComplexMatrix::from_fn(d, |a, b| {
        let mut acc = Complex::default();
        for rp in 0..d {
            for r in 0..d {
                acc += kets[rp][a] * phase[(rp, r)] * kets[r][b].conj();
            }
        }
        acc
    })
}

/// Reconstructed operator in the number basis, without validation. Useful
/// for measuring how far an inconsistent grid is from a state.
pub fn reconstruct_matrix(w: &WignerGrid, kernel: &Kernel) -> Result<ComplexMatrix> {
    let phase = reconstruct_phase_basis(w, kernel)?;
    Ok(phase_to_number_basis(w.grid(), &phase))
}

pub fn reconstruct(w: &WignerGrid, kernel: &Kernel) -> Result<DensityOperator> {
    DensityOperator::new(reconstruct_matrix(w, kernel)?)
}

/// `rho = sum_{m,n} Omega(phi_m, n) rho_W(phi_m, n)`, valid for unimodular kernels.
pub fn reconstruct_unimodular(q: &Quantizer, w: &WignerGrid) -> Result<ComplexMatrix> {
    if !is_unimodular(q.kernel()) {
        return Err(Error::WrongKernel { required: "unimodular", found: q.kernel().label() });
    }
    if q.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let d = w.dim();
    let mut acc = ComplexMatrix::zeros(d);
    for m in 0..d {
        for n in 0..d {
            acc.add_scaled(cr(w.get(m, n)), q.omega(m, n));
        }
    }
    Ok(acc)
}

/// `sum_{k=-N}^{N} e^{i k phi_m} / (e^{i k phi_r} + e^{i k phi_r'})`, or `None`
/// if a denominator is too small.
fn symmetric_weight(grid: &PhaseGrid, m: usize, r: usize, rp: usize) -> Option<Complex> {
    let big_n = (grid.dim() / 2) as i64;
    let mut acc = Complex::default();
    for k in -big_n..=big_n {
        let kf = k as f64;
        let den = cis(kf * grid.phase(r as i64)) + cis(kf * grid.phase(rp as i64));
        if den.norm() < SHORTCUT_GUARD {
            return None;
        }
        acc += cis(kf * grid.phase(m as i64)) / den;
    }
    Some(acc)
}

fn require_symmetric(w: &WignerGrid) -> Result<()> {
    if w.dim() % 2 == 0 {
        return Err(Error::WrongParity("odd"));
    }
    Ok(())
}

/// Symmetric-kernel shortcut for `<phi_r'|rho|phi_r>`. Falls back to
/// [`phase_matrix_element`] when a denominator nearly vanishes.
pub fn symmetric_phase_element(w: &WignerGrid, r: usize, rp: usize) -> Result<Complex> {
    require_symmetric(w)?;
    let grid = w.grid();
    let d = grid.dim();
    let weights: Option<Vec<Complex>> = (0..d).map(|m| symmetric_weight(grid, m, r, rp)).collect();
    let Some(weights) = weights else {
        let kernel = crate::kernels::symmetric_kernel(d / 2)?;
        return Ok(phase_matrix_element(w, &kernel, r, rp));
    };
    let dphi = grid.phase(r as i64) - grid.phase(rp as i64);
    let mut acc = Complex::default();
    for (m, wt) in weights.iter().enumerate() {
        for n in 0..d {
            acc += wt * cis(n as f64 * dphi) * w.get(m, n);
        }
    }
    Ok(acc * 2.0 / d as f64)
}

/// Phase-basis matrix from [`symmetric_phase_element`].
pub fn reconstruct_symmetric(w: &WignerGrid) -> Result<ComplexMatrix> {
    require_symmetric(w)?;
    let d = w.dim();
    let mut out = ComplexMatrix::zeros(d);
    for rp in 0..d {
        for r in 0..d {
            out[(rp, r)] = symmetric_phase_element(w, r, rp)?;
        }
    }
    Ok(out)
}

/// Symmetric-kernel shortcut for the number-basis element `<n'|rho|n''>`.
pub fn symmetric_number_element(w: &WignerGrid, n1: usize, n2: usize) -> Result<Complex> {
    require_symmetric(w)?;
    let grid = w.grid();
    let d = grid.dim();
    let mut acc = Complex::default();
    for r1 in 0..d {
        for r2 in 0..d {
            let (p1, p2) = (grid.phase(r1 as i64), grid.phase(r2 as i64));
            for m in 0..d {
                let Some(wt) = symmetric_weight(grid, m, r2, r1) else {
                    return Err(Error::InvalidGrid(format!(
                        "phase pair ({r1}, {r2}) makes the shortcut singular"
                    )));
                };
                for n in 0..d {
                    let angle = (n1 as f64 - n as f64) * p1 + (n as f64 - n2 as f64) * p2;
                    acc += wt * cis(angle) * w.get(m, n);
                }
            }
        }
    }
    Ok(acc * 2.0 / (d * d) as f64)
}

/// Reconstructs and compares against the original state.
pub fn round_trip_error(q: &Quantizer, rho: &DensityOperator) -> Result<f64> {
    let w = wigner(q, rho)?;
    let back = reconstruct_matrix(&w, q.kernel())?;
    frob_dist(&back, rho.matrix())
}

pub mod sampling {
    //! Random states, Bloch vectors and grid functions for tests and studies.

    use rand::Rng;

    use super::DensityOperator;
    use crate::numerics::{adjoint, c, cr, trace, Complex, ComplexMatrix, ComplexVector};
    use crate::phasespace::{GridFunction, PhaseGrid};

    /// `G G^+ / Tr` for a random complex `G` of the given rank.
    pub fn random_density_of_rank(rng: &mut impl Rng, dim: usize, rank: usize) -> DensityOperator {
        let g = ComplexMatrix::from_fn(dim, |_, j| {
            if j < rank {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                Complex::default()
            }
        });
        let p = &g * &adjoint(&g);
        let tr = trace(&p).re;
        let m = p.scaled(cr(1.0 / tr));
        // symmetrize away roundoff
        let m = (&m + &adjoint(&m)).scaled(cr(0.5));
        DensityOperator::new(m).expect("Gram matrix is a state")
    }

    /// Full-rank random state.
    pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityOperator {
        random_density_of_rank(rng, dim, dim)
    }

    pub fn random_pure(rng: &mut impl Rng, dim: usize) -> DensityOperator {
        let v = ComplexVector::new((0..dim).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
        DensityOperator::pure(&v).expect("nonzero vector")
    }

    /// Uniform in the closed unit ball.
    pub fn random_bloch(rng: &mut impl Rng) -> [f64; 3] {
        loop {
            let a = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if a.iter().map(|x: &f64| x * x).sum::<f64>() <= 1.0 {
                return a;
            }
        }
    }

    pub fn random_grid_function(rng: &mut impl Rng, grid: PhaseGrid) -> GridFunction {
        GridFunction::from_fn(grid, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    pub fn random_real_grid_function(rng: &mut impl Rng, grid: PhaseGrid) -> GridFunction {
        GridFunction::from_fn(grid, |_, _| cr(rng.gen_range(-1.0..1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::sampling::*;
    use super::*;
    use crate::kernels::{almost_symmetric_kernel, default_epsilon, symmetric_kernel, wootters_kernel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quantizers(d: usize, phi0: f64) -> Vec<Quantizer> {
        let grid = PhaseGrid::new(d, phi0).unwrap();
        let n = d / 2;
        if d % 2 == 1 {
            vec![
                Quantizer::build(grid, symmetric_kernel(n).unwrap()).unwrap(),
                Quantizer::build(grid, wootters_kernel(n).unwrap()).unwrap(),
            ]
        } else {
            vec![Quantizer::build(grid, almost_symmetric_kernel(n, default_epsilon(n)).unwrap()).unwrap()]
        }
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(ComplexMatrix::identity(2)).is_err());
        let m = ComplexMatrix::diagonal(&[cr(1.5), cr(-0.5)]);
        assert!(DensityOperator::new(m).is_err());
        let nh = ComplexMatrix::from_rows(vec![vec![cr(0.5), cr(0.1)], vec![cr(0.0), cr(0.5)]]).unwrap();
        assert!(DensityOperator::new(nh).is_err());
        assert!(DensityOperator::from_bloch([1.0, 1.0, 0.0]).is_err());
        assert!(DensityOperator::from_bloch([0.0, 0.6, 0.8]).is_ok());
        assert!(DensityOperator::pure(&ComplexVector::zeros(3)).is_err());
    }

    #[test]
    fn maximally_mixed_is_flat() {
        for d in 2..=7 {
            for q in quantizers(d, 0.4) {
                let w = wigner(&q, &DensityOperator::maximally_mixed(d)).unwrap();
                let target = 1.0 / (d * d) as f64;
                assert!(w.values().iter().all(|v| (v - target).abs() < TOL));
            }
        }
    }

    #[test]
    fn symmetric_fock_state() {
        let grid = PhaseGrid::new(5, 1.1).unwrap();
        let q = Quantizer::build(grid, symmetric_kernel(2).unwrap()).unwrap();
        let w = wigner(&q, &DensityOperator::fock(5, 3).unwrap()).unwrap();
        for m in 0..5 {
            for n in 0..5 {
                let expected = if n == 3 { 0.2 } else { 0.0 };
                assert!((w.get(m, n) - expected).abs() < TOL);
            }
        }
    }

    #[test]
    fn closed_forms_match_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in [3, 5, 7] {
            let grid = PhaseGrid::new(d, -0.3).unwrap();
            let rho = random_density(&mut rng, d);
            let qs = Quantizer::build(grid, symmetric_kernel(d / 2).unwrap()).unwrap();
            let qw = Quantizer::build(grid, wootters_kernel(d / 2).unwrap()).unwrap();
            assert!(wigner(&qs, &rho).unwrap().max_abs_diff(&symmetric_wigner(&grid, &rho).unwrap()) < TOL);
            assert!(wigner(&qw, &rho).unwrap().max_abs_diff(&wootters_wigner(&grid, &rho).unwrap()) < TOL);
            assert!(wigner(&qs, &rho).unwrap().max_abs_diff(&wigner_fast(&grid, qs.kernel(), &rho).unwrap()) < TOL);
        }
        for d in [2, 4, 6] {
            let grid = PhaseGrid::new(d, 0.9).unwrap();
            let eps = default_epsilon(d / 2);
            let rho = random_density(&mut rng, d);
            let q = Quantizer::build(grid, almost_symmetric_kernel(d / 2, eps).unwrap()).unwrap();
            let closed = almost_symmetric_wigner(&grid, eps, &rho).unwrap();
            assert!(wigner(&q, &rho).unwrap().max_abs_diff(&closed) < TOL);
        }
    }

    #[test]
    fn wootters_truncated_sum_for_diagonal_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let grid = PhaseGrid::new(3, 0.0).unwrap();
        let q = Quantizer::build(grid, wootters_kernel(1).unwrap()).unwrap();
        let diag: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
        let s: f64 = diag.iter().sum();
        let rho = DensityOperator::new(ComplexMatrix::diagonal(&diag.iter().map(|x| cr(x / s)).collect::<Vec<_>>())).unwrap();
        let w = wigner(&q, &rho).unwrap();
        for m in 0..3 {
            for n in 0..3 {
                assert!((wootters_truncated_sum(&grid, &rho, m, n) - cr(w.get(m, n))).norm() < TOL);
            }
        }
    }

    #[test]
    fn expectation_matches_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let grid = PhaseGrid::new(5, 0.0).unwrap();
        let q = Quantizer::build(grid, symmetric_kernel(2).unwrap()).unwrap();
        let rho = random_density(&mut rng, 5);
        let w = wigner(&q, &rho).unwrap();
        let f = random_grid_function(&mut rng, grid);
        let direct = trace_product(&q.quantize(&f).unwrap(), rho.matrix()).unwrap();
        assert!((expectation(&w, &f).unwrap() - direct).norm() < TOL);

        let one = GridFunction::from_fn(grid, |_, _| cr(1.0));
        assert!((expectation(&w, &one).unwrap() - cr(1.0)).norm() < TOL);
        let wf = wigner(&q, &DensityOperator::fock(5, 4).unwrap()).unwrap();
        let number = GridFunction::of_number(grid, |n| cr(n as f64));
        assert!((expectation(&wf, &number).unwrap() - cr(4.0)).norm() < TOL);
    }

    #[test]
    fn marginals_hold_for_all_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for d in 2..=7 {
            for q in quantizers(d, 0.25) {
                let rho = random_density(&mut rng, d);
                let (pm, nm) = marginals(&wigner(&q, &rho).unwrap());
                for m in 0..d {
                    let ket = q.grid().phase_ket(m as i64);
                    let expected = ket.inner(&rho.matrix().apply(&ket).unwrap()).unwrap().re;
                    assert!((pm[m] - expected).abs() < TOL);
                }
                for n in 0..d {
                    assert!((nm[n] - rho.matrix()[(n, n)].re).abs() < TOL);
                }
            }
        }
        let grid = PhaseGrid::new(5, 0.0).unwrap();
        let q = Quantizer::build(grid, wootters_kernel(2).unwrap()).unwrap();
        let (pm, _) = marginals(&wigner(&q, &DensityOperator::phase_state(&grid, 3)).unwrap());
        for (m, p) in pm.iter().enumerate() {
            assert!((p - if m == 3 { 1.0 } else { 0.0 }).abs() < TOL);
        }
    }

    #[test]
    fn wigner_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for q in quantizers(4, 0.0) {
            let a = random_density(&mut rng, 4);
            let b = random_pure(&mut rng, 4);
            let mixed = a.mix(&b, 0.3).unwrap();
            let (wa, wb, wm) = (wigner(&q, &a).unwrap(), wigner(&q, &b).unwrap(), wigner(&q, &mixed).unwrap());
            for i in 0..16 {
                assert!((wm.values()[i] - 0.3 * wa.values()[i] - 0.7 * wb.values()[i]).abs() < TOL);
            }
        }
    }

    #[test]
    fn reconstruction_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for d in 2..=5 {
            for q in quantizers(d, 0.6) {
                for _ in 0..10 {
                    let rank = 1 + rng.gen_range(0..d);
                    let rho = random_density_of_rank(&mut rng, d, rank);
                    let w = wigner(&q, &rho).unwrap();
                    let back = reconstruct(&w, q.kernel()).unwrap();
                    assert!(frob_dist(back.matrix(), rho.matrix()).unwrap() < DENSITY_TOL);
                    let again = wigner(&q, &back).unwrap();
                    assert!(again.max_abs_diff(&w) < TOL);
                }
            }
        }
    }

    #[test]
    fn unimodular_shortcut_matches_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for d in [3, 5] {
            let grid = PhaseGrid::new(d, 0.2).unwrap();
            let q = Quantizer::build(grid, wootters_kernel(d / 2).unwrap()).unwrap();
            let rho = random_density(&mut rng, d);
            let w = wigner(&q, &rho).unwrap();
            let a = reconstruct_unimodular(&q, &w).unwrap();
            let b = reconstruct_matrix(&w, q.kernel()).unwrap();
            assert!(frob_dist(&a, &b).unwrap() < TOL);
        }
        let grid = PhaseGrid::new(3, 0.0).unwrap();
        let qs = Quantizer::build(grid, symmetric_kernel(1).unwrap()).unwrap();
        let w = wigner(&qs, &DensityOperator::maximally_mixed(3)).unwrap();
        assert!(reconstruct_unimodular(&qs, &w).is_err());
    }

    #[test]
    fn symmetric_shortcuts_match_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for d in [3, 5, 7] {
            let grid = PhaseGrid::new(d, 0.45).unwrap();
            let q = Quantizer::build(grid, symmetric_kernel(d / 2).unwrap()).unwrap();
            let rho = random_density(&mut rng, d);
            let w = wigner(&q, &rho).unwrap();
            let general = reconstruct_phase_basis(&w, q.kernel()).unwrap();
            let short = reconstruct_symmetric(&w).unwrap();
            assert!(frob_dist(&general, &short).unwrap() < TOL);
            let number = phase_to_number_basis(&grid, &short);
            for a in 0..d {
                for b in 0..d {
                    let e = symmetric_number_element(&w, a, b).unwrap();
                    assert!((e - number[(a, b)]).norm() < TOL);
                }
            }
        }
    }

    #[test]
    fn json_and_csv() {
        let grid = PhaseGrid::new(3, 0.5).unwrap();
        let q = Quantizer::build(grid, symmetric_kernel(1).unwrap()).unwrap();
        let w = wigner(&q, &DensityOperator::fock(3, 1).unwrap()).unwrap();
        let back = WignerGrid::from_json(&w.to_json().unwrap()).unwrap();
        assert_eq!(back, w);
        let csv = w.to_csv();
        assert!(csv.starts_with("m,n,phi,value\n"));
        assert_eq!(csv.lines().count(), 10);
        let last: f64 = csv.lines().nth(5).unwrap().split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(last, w.get(1, 1));
        assert!(WignerGrid::from_json(r#"{"dim":2,"phi0":0,"kernel":"x","values":[[1,2]]}"#).is_err());
    }

    #[test]
    fn density_json() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let rho = random_density(&mut rng, 3);
        assert_eq!(DensityOperator::from_json(&rho.to_json().unwrap()).unwrap(), rho);
        let bad = r#"{"dim": 2, "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#;
        assert!(matches!(DensityOperator::from_json(bad), Err(Error::InvalidDensity(_))));
        let short = r#"{"dim": 2, "matrix": [[[1, 0], [0, 0]]]}"#;
        assert!(DensityOperator::from_json(short).is_err());
        assert!(matches!(DensityOperator::from_json("{"), Err(Error::Json(_))));
    }

    #[test]
    fn imaginary_residue_is_reported() {
        let grid = PhaseGrid::new(2, 0.0).unwrap();
        let err = WignerGrid::from_complex(grid, "t", &[cr(0.5), Complex::new(0.0, 1e-6), cr(0.5), cr(0.0)]);
        assert!(matches!(err, Err(Error::ImaginaryResidue { m: 0, n: 1, .. })));
    }

    #[test]
    fn embedding_and_levels() {
        let rho = DensityOperator::superposition01(2).unwrap();
        let big = rho.embed(7).unwrap();
        assert_eq!(big.dim(), 7);
        assert_eq!(big.max_level(), 1);
        assert!(big.embed(3).is_err());
    }
}
