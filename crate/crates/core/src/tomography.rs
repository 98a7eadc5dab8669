//! Phase-space lines and their projectors, the even-dimensional construction
//! on a doubled half-integer grid, transforms between kernels, and the
//! large-dimension limit of scaled Wigner values.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{symmetric_kernel, wootters_kernel, KernelFamily, NONZERO_THRESHOLD};
use crate::numerics::{cis, cr, outer, trace_product, Complex, ComplexMatrix, TOL};
use crate::phasespace::PhaseGrid;
use crate::quantizer::Quantizer;
use crate::wigner::{characteristic, wigner_value, DensityOperator, WignerGrid};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Points `(m, n)` with `n1 m + n2 n = n3 (mod d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Line {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub dim: usize,
}

impl Line {
    pub fn new(n1: usize, n2: usize, n3: usize, dim: usize) -> Result<Self> {
        if dim == 0 || dim % 2 == 0 {
            return Err(Error::WrongParity("odd"));
        }
        for v in [n1, n2, n3] {
            if v >= dim {
                return Err(Error::IndexOutOfRange { index: v, dim });
            }
        }
        Ok(Self { n1, n2, n3, dim })
    }

    /// Lines whose family shares a factor with the dimension do not
    /// partition the grid into `d` lines of `d` points.
    pub fn is_degenerate(&self) -> bool {
        gcd(gcd(self.n1, self.n2), self.dim) > 1
    }

    pub fn contains(&self, m: usize, n: usize) -> bool {
        (self.n1 * m + self.n2 * n) % self.dim == self.n3
    }

    /// The parallel family `L(n1, n2, 0..d)`.
    pub fn family(n1: usize, n2: usize, dim: usize) -> Result<Vec<Line>> {
        (0..dim).map(|n3| Line::new(n1, n2, n3, dim)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinePoints {
    pub points: Vec<(usize, usize)>,
    pub degenerate: bool,
}

/// All grid points on the line, sorted by `m` then `n`.
pub fn line_points(line: &Line) -> LinePoints {
    let d = line.dim;
    let points = (0..d)
        .flat_map(|m| (0..d).map(move |n| (m, n)))
        .filter(|&(m, n)| line.contains(m, n))
        .collect();
    LinePoints { points, degenerate: line.is_degenerate() }
}

/// `P_L = (1/d) sum_{(m,n) in L} Omega(phi_m, n)`
pub fn line_projector(q: &Quantizer, line: &Line) -> Result<ComplexMatrix> {
    let d = q.dim();
    if d % 2 == 0 {
        return Err(Error::WrongParity("odd"));
    }
    if line.dim != d {
        return Err(Error::DimensionMismatch { expected: d, found: line.dim });
    }
    if line.is_degenerate() {
        return Err(Error::DegenerateLine { n1: line.n1, n2: line.n2, n3: line.n3, dim: d });
    }
    let mut acc = ComplexMatrix::zeros(d);
    for (m, n) in line_points(line).points {
        acc += q.omega(m, n);
    }
    Ok(acc.scaled(cr(1.0 / d as f64)))
}

/// `<n'|Omega(phi_m, n)|n''> = delta(n' + n'' = 2n mod d) e^{i(n' - n'') phi_m}`
/// for the Wootters kernel.
pub fn wootters_omega_element(grid: &PhaseGrid, m: usize, n: usize, n1: usize, n2: usize) -> Complex {
    let d = grid.dim();
    if (n1 + n2) % d != (2 * n) % d {
        return Complex::default();
    }
    cis((n1 as f64 - n2 as f64) * grid.phase(m as i64))
}

/// Same as [`wootters_omega_element`], checking that `q` uses the Wootters kernel.
pub fn wootters_quantizer_matrix_element(q: &Quantizer, m: usize, n: usize, n1: usize, n2: usize) -> Result<Complex> {
    if q.kernel().family() != KernelFamily::Wootters {
        return Err(Error::WrongKernel { required: "wootters", found: q.kernel().label() });
    }
    let d = q.dim();
    for v in [m, n, n1, n2] {
        if v >= d {
            return Err(Error::IndexOutOfRange { index: v, dim: d });
        }
    }
    Ok(wootters_omega_element(q.grid(), m, n, n1, n2))
}

/// `sum_p e^{-4 pi i p n / d} |phi_{m+p}><phi_{m-p}|`
pub fn wootters_omega_phase_form(grid: &PhaseGrid, m: usize, n: usize) -> ComplexMatrix {
    let d = grid.dim();
    let mut acc = ComplexMatrix::zeros(d);
    for p in 0..d as i64 {
        let w = cis(-4.0 * PI * (p * n as i64) as f64 / d as f64);
        let ket = grid.phase_ket(m as i64 + p);
        let bra = grid.phase_ket(m as i64 - p);
        acc.add_scaled(w, &outer(&ket, &bra).expect("same dimension"));
    }
    acc
}

/// Wigner function on the doubled grid of an even dimension `2N`. Points are
/// stored by doubled indices `(2m, 2n)`, each running over `0..4N`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfIntegerWignerGrid {
    n: usize,
    phi0: f64,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct HalfGridFile {
    #[serde(rename = "N")]
    n: usize,
    phi0: f64,
    values: Vec<Vec<f64>>,
}

impl HalfIntegerWignerGrid {
    pub fn new(n: usize, phi0: f64, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("N must be positive".into()));
        }
        let side = 4 * n;
        if values.len() != side * side {
            return Err(Error::DimensionMismatch { expected: side * side, found: values.len() });
        }
        Ok(Self { n, phi0, values })
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    /// Hilbert-space dimension `2N`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Points per axis, `4N`.
    pub fn side(&self) -> usize {
        4 * self.n
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn get(&self, m2: usize, n2: usize) -> f64 {
        self.values[m2 * self.side() + n2]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &HalfIntegerWignerGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = HalfGridFile {
            n: self.n,
            phi0: self.phi0,
            values: self.values.chunks(self.side()).map(|r| r.to_vec()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: HalfGridFile = serde_json::from_str(text)?;
        let side = 4 * file.n;
        if file.values.len() != side || file.values.iter().any(|r| r.len() != side) {
            return Err(Error::Parse(format!("values must be a {side} x {side} table")));
        }
        Self::new(file.n, file.phi0, file.values.concat())
    }

    /// CSV with header `m,n,phi,value`; `m` and `n` are printed as halves.
    pub fn to_csv(&self) -> String {
        let side = self.side();
        let mut out = String::from("m,n,phi,value\n");
        for m2 in 0..side {
            let phi = half_phase(self.n, self.phi0, m2 as i64);
            for n2 in 0..side {
                out.push_str(&format!(
                    "{},{},{:.16e},{:.16e}\n",
                    m2 as f64 / 2.0,
                    n2 as f64 / 2.0,
                    phi,
                    self.get(m2, n2)
                ));
            }
        }
        out
    }
}

/// `phi_m` at doubled index `m2 = 2m`.
fn half_phase(n: usize, phi0: f64, m2: i64) -> f64 {
    phi0 + PI * m2 as f64 / (2 * n) as f64
}

fn even_grid(n: usize, phi0: f64, rho: &DensityOperator) -> Result<PhaseGrid> {
    if n == 0 {
        return Err(Error::InvalidGrid("N must be positive".into()));
    }
    if rho.dim() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: rho.dim() });
    }
    PhaseGrid::new(2 * n, phi0)
}

/// Phase-point operator of the doubled grid,
/// `A(phi_m, n) = (1/2) sum'_p e^{-4 pi i p n / 2N} |phi_{m+p}><phi_{m-p}|`,
/// where only `p` with `m +- p` integral contribute.
pub fn leonhardt_operator(n: usize, phi0: f64, m2: usize, n2: usize) -> Result<ComplexMatrix> {
    let grid = PhaseGrid::new(2 * n, phi0)?;
    Ok(leonhardt_operator_on(&grid, m2, n2))
}

fn leonhardt_operator_on(grid: &PhaseGrid, m2: usize, n2: usize) -> ComplexMatrix {
    let d = grid.dim();
    let mut acc = ComplexMatrix::zeros(d);
    for p2 in (0..2 * d).filter(|p2| (p2 + m2) % 2 == 0) {
        let w = cis(-PI * (p2 * n2) as f64 / d as f64);
        let ket = grid.phase_ket(((m2 + p2) / 2) as i64);
        let bra = grid.phase_ket((m2 as i64 - p2 as i64) / 2);
        acc.add_scaled(w * 0.5, &outer(&ket, &bra).expect("same dimension"));
    }
    acc
}

/// `W(phi_m, n) = (1/4N) sum'_p e^{-4 pi i p n / 2N} <phi_{m-p}|rho|phi_{m+p}>`
pub fn leonhardt_wigner(n: usize, phi0: f64, rho: &DensityOperator) -> Result<HalfIntegerWignerGrid> {
    let grid = even_grid(n, phi0, rho)?;
    let d = grid.dim();
    let kets: Vec<_> = (0..d).map(|r| grid.phase_ket(r as i64)).collect();
    let applied: Vec<_> = kets.iter().map(|k| rho.matrix().apply(k)).collect::<Result<_>>()?;
    // phase[a][b] = <phi_a|rho|phi_b>
    let phase: Vec<Vec<Complex>> = kets
        .iter()
        .map(|a| applied.iter().map(|rb| a.inner(rb)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let side = 2 * d;
    let mut values = Vec::with_capacity(side * side);
    for m2 in 0..side {
        for n2 in 0..side {
            let mut acc = Complex::default();
            for p2 in (0..side).filter(|p2| (p2 + m2) % 2 == 0) {
                let a = ((m2 as i64 - p2 as i64) / 2).rem_euclid(d as i64) as usize;
                let b = ((m2 + p2) / 2) % d;
                acc += cis(-PI * (p2 * n2) as f64 / d as f64) * phase[a][b];
            }
            let v = acc / (2 * d) as f64;
            if v.im.abs() > TOL {
                return Err(Error::ImaginaryResidue { m: m2, n: n2, residue: v.im.abs() });
            }
            values.push(v.re);
        }
    }
    HalfIntegerWignerGrid::new(n, phi0, values)
}

/// `(1/2N) Tr{rho A(phi_m, n)}` over the whole doubled grid.
pub fn leonhardt_wigner_trace(n: usize, phi0: f64, rho: &DensityOperator) -> Result<HalfIntegerWignerGrid> {
    let grid = even_grid(n, phi0, rho)?;
    let d = grid.dim();
    let side = 2 * d;
    let mut values = Vec::with_capacity(side * side);
    for m2 in 0..side {
        for n2 in 0..side {
            let v = trace_product(rho.matrix(), &leonhardt_operator_on(&grid, m2, n2))? / d as f64;
            if v.im.abs() > TOL {
                return Err(Error::ImaginaryResidue { m: m2, n: n2, residue: v.im.abs() });
            }
            values.push(v.re);
        }
    }
    HalfIntegerWignerGrid::new(n, phi0, values)
}

/// Number-basis sum `(1/4N) sum'_{r=-n}^{n} e^{2 i r phi_m} <n-r|rho|n+r>` at
/// doubled indices, keeping only integral `n +- r` inside the basis. It drops
/// the terms that wrap around the phase circle, so it differs from
/// [`leonhardt_wigner`] for states with weight near the top level.
pub fn leonhardt_number_sum(n: usize, phi0: f64, rho: &DensityOperator, m2: usize, n2: usize) -> Result<Complex> {
    let grid = even_grid(n, phi0, rho)?;
    let d = grid.dim() as i64;
    let phi = half_phase(n, phi0, m2 as i64);
    let n2 = n2 as i64;
    let mut acc = Complex::default();
    for r2 in -n2..=n2 {
        if (n2 - r2) % 2 != 0 {
            continue;
        }
        let (a, b) = ((n2 - r2) / 2, (n2 + r2) / 2);
        if a < d && b < d {
            acc += cis(r2 as f64 * phi) * rho.matrix()[(a as usize, b as usize)];
        }
    }
    Ok(acc / (2 * d) as f64)
}

/// `sum'_{m,n} W(phi_m, n) A(phi_m, n)` without validation.
pub fn leonhardt_reconstruct_matrix(w: &HalfIntegerWignerGrid) -> Result<ComplexMatrix> {
    let grid = PhaseGrid::new(w.dim(), w.phi0())?;
    let side = w.side();
    let mut acc = ComplexMatrix::zeros(w.dim());
    for m2 in 0..side {
        for n2 in 0..side {
            let v = w.get(m2, n2);
            if v != 0.0 {
                acc.add_scaled(cr(v), &leonhardt_operator_on(&grid, m2, n2));
            }
        }
    }
    Ok(acc)
}

pub fn leonhardt_reconstruct(w: &HalfIntegerWignerGrid) -> Result<DensityOperator> {
    DensityOperator::new(leonhardt_reconstruct_matrix(w)?)
}

/// Symmetric-kernel Wigner function from a Wootters-kernel one,
/// `(1/d) sum_{m',n'} cos[4 pi (m - m')(n - n') / d] W(m', n')`.
pub fn relate_odd(w: &WignerGrid) -> Result<WignerGrid> {
    let d = w.dim();
    if d % 2 == 0 {
        return Err(Error::WrongParity("odd"));
    }
    let wootters = KernelFamily::Wootters.to_string();
    if w.kernel_label() != wootters {
        return Err(Error::WrongKernel { required: "wootters", found: w.kernel_label().to_string() });
    }
    let df = d as f64;
    let mut values = Vec::with_capacity(d * d);
    for m in 0..d as i64 {
        for n in 0..d as i64 {
            let mut acc = 0.0;
            for mp in 0..d as i64 {
                for np in 0..d as i64 {
                    let angle = 4.0 * PI * ((m - mp) * (n - np)) as f64 / df;
                    acc += angle.cos() * w.get(mp as usize, np as usize);
                }
            }
            values.push(acc / df);
        }
    }
    WignerGrid::new(*w.grid(), KernelFamily::Symmetric.to_string(), values)
}

/// Almost-symmetric Wigner function from a doubled-grid one,
/// `(1/(4N cos eps)) sum'_{m',n'} cos[4 pi (m - m')(n - n') / 2N - eps] W(m', n')`.
///
/// Only `cos(eps) != 0` is needed here. The result still equals
/// `Re{e^{i eps} <n|rho|phi_m><phi_m|n>} / cos(eps)` when `eps` makes some
/// kernel entry vanish, although no quantizer exists for that kernel.
pub fn relate_even(w: &HalfIntegerWignerGrid, epsilon: f64) -> Result<WignerGrid> {
    let d = w.dim();
    if !epsilon.is_finite() || epsilon.cos().abs() <= NONZERO_THRESHOLD {
        return Err(Error::InadmissibleEpsilon { epsilon, dim: d, k: 0, l: 0 });
    }
    let side = w.side() as i64;
    let grid = PhaseGrid::new(d, w.phi0())?;
    let mut values = Vec::with_capacity(d * d);
    for m in 0..d as i64 {
        for nn in 0..d as i64 {
            let mut acc = 0.0;
            for m2 in 0..side {
                for n2 in 0..side {
                    let angle = PI * ((2 * m - m2) * (2 * nn - n2)) as f64 / d as f64 - epsilon;
                    acc += angle.cos() * w.get(m2 as usize, n2 as usize);
                }
            }
            values.push(acc / (2.0 * d as f64 * epsilon.cos()));
        }
    }
    WignerGrid::new(grid, KernelFamily::AlmostSymmetric { epsilon }.to_string(), values)
}

/// Kernel used in a large-dimension study on odd grids `2N + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContinuumKernel {
    Symmetric,
    Wootters,
}

impl ContinuumKernel {
    /// Limit of `((2N + 1) / 2 pi) rho_W(phi, n)` as `N` grows.
    pub fn target(&self, rho: &DensityOperator, n: usize, phi: f64) -> f64 {
        match self {
            ContinuumKernel::Symmetric => symmetric_continuum_target(rho, n, phi),
            ContinuumKernel::Wootters => wootters_continuum_target(rho, n, phi),
        }
    }
}

/// `Re{<n|rho|phi><phi|n>}` with `<phi|n> = e^{-i n phi} / sqrt(2 pi)`.
pub fn symmetric_continuum_target(rho: &DensityOperator, n: usize, phi: f64) -> f64 {
    let d = rho.dim();
    if n >= d {
        return 0.0;
    }
    let s: Complex = (0..d).map(|j| rho.matrix()[(n, j)] * cis((j as f64 - n as f64) * phi)).sum();
    s.re / (2.0 * PI)
}

/// `(1/2 pi) sum_{r=-n}^{n} e^{2 i r phi} <n-r|rho|n+r>`
pub fn wootters_continuum_target(rho: &DensityOperator, n: usize, phi: f64) -> f64 {
    let d = rho.dim() as i64;
    let n = n as i64;
    let mut s = Complex::default();
    for r in -n..=n {
        let (a, b) = (n - r, n + r);
        if a < d && b < d {
            s += cis(2.0 * r as f64 * phi) * rho.matrix()[(a as usize, b as usize)];
        }
    }
    s.re / (2.0 * PI)
}

/// Phase density `<phi|rho|phi>` with `|phi> = sum_n e^{i n phi}|n> / sqrt(2 pi)`.
pub fn continuum_phase_density(rho: &DensityOperator, phi: f64) -> f64 {
    let d = rho.dim();
    let mut s = Complex::default();
    for a in 0..d {
        for b in 0..d {
            s += rho.matrix()[(a, b)] * cis((b as f64 - a as f64) * phi);
        }
    }
    s.re / (2.0 * PI)
}

/// Number sums of both continuum targets at one angle next to the phase density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalContrast {
    pub phi: f64,
    pub phase_density: f64,
    pub symmetric_sum: f64,
    pub wootters_sum: f64,
}

pub fn marginal_contrast(rho: &DensityOperator, phi: f64) -> MarginalContrast {
    let levels = 2 * rho.dim();
    MarginalContrast {
        phi,
        phase_density: continuum_phase_density(rho, phi),
        symmetric_sum: (0..levels).map(|n| symmetric_continuum_target(rho, n, phi)).sum(),
        wootters_sum: (0..levels).map(|n| wootters_continuum_target(rho, n, phi)).sum(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    /// Grid half-size; the dimension is `2N + 1`.
    pub big_n: usize,
    pub n: usize,
    pub phi_grid: f64,
    /// `phi_grid - phi` for the nearest grid angle.
    pub offset: f64,
    pub scaled_value: f64,
    pub target: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub kernel: ContinuumKernel,
    pub phi: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Errors never increase along the list, up to `MONOTONE_SLACK`.
    pub monotone: bool,
}

/// Errors at roundoff level may jitter without counting as growth.
pub const MONOTONE_SLACK: f64 = 1e-12;

impl ConvergenceReport {
    pub fn final_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.abs_error)
    }

    /// CSV with columns `N,n,phi_grid,scaled_value,target,abs_error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,n,phi_grid,scaled_value,target,abs_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.big_n, r.n, r.phi_grid, r.scaled_value, r.target, r.abs_error
            ));
        }
        out
    }
}

/// Embeds `state` into dimension `2N + 1` for each `N` in `ns`, evaluates
/// `((2N + 1) / 2 pi) rho_W(phi_m*, n)` at the grid angle nearest `phi`,
/// and compares with the continuum target at `phi`.
pub fn continuum_study(
    kernel: ContinuumKernel,
    state: &DensityOperator,
    n: usize,
    phi: f64,
    phi0: f64,
    ns: &[usize],
) -> Result<ConvergenceReport> {
    if ns.is_empty() {
        return Err(Error::InvalidEmbedding("empty list of N".into()));
    }
    let n_max = state.max_level();
    let mut rows = Vec::with_capacity(ns.len());
    for &big_n in ns {
        if big_n == 0 || 2 * n_max > big_n || n > big_n {
            return Err(Error::InvalidEmbedding(format!(
                "N = {big_n} is too small for a state up to level {n_max} queried at n = {n}"
            )));
        }
        let d = 2 * big_n + 1;
        let rho = state.embed(d)?;
        let grid = PhaseGrid::new(d, phi0)?;
        let k = match kernel {
            ContinuumKernel::Symmetric => symmetric_kernel(big_n)?,
            ContinuumKernel::Wootters => wootters_kernel(big_n)?,
        };
        let m = grid.nearest_phase_index(phi);
        let chi = characteristic(&grid, rho.matrix());
        let value = wigner_value(&grid, &k, &chi, m, n);
        if value.im.abs() > TOL {
            return Err(Error::ImaginaryResidue { m, n, residue: value.im.abs() });
        }
        let phi_grid = grid.phase(m as i64);
        let offset = (phi_grid - phi + PI).rem_euclid(2.0 * PI) - PI;
        let scaled_value = d as f64 / (2.0 * PI) * value.re;
        let target = kernel.target(state, n, phi);
        rows.push(ConvergenceRow {
            big_n,
            n,
            phi_grid,
            offset,
            scaled_value,
            target,
            abs_error: (scaled_value - target).abs(),
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].abs_error <= w[0].abs_error + MONOTONE_SLACK);
    Ok(ConvergenceReport { kernel, phi, rows, monotone })
}
